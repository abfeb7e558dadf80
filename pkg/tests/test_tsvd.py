import numpy as np
import pytest

from prank import (
    E15,
    FixedRank,
    RankError,
    WindowError,
    auto_window,
    dehankelize_ssa,
    hankel_tsvd_series,
    hankelize,
    svd,
    truncate,
    truncate_cleaned,
)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# ------------------------------------------------------------------- svd

def test_svd_identity():
    f = svd(np.eye(3))
    assert np.allclose(f.S, [1.0, 1.0, 1.0])


def test_svd_diagonal():
    f = svd(np.diag([3.0, 2.0, 1.0]))
    assert np.allclose(f.S, [3.0, 2.0, 1.0])
    assert np.allclose(np.abs(f.U), np.eye(3), atol=1e-12)
    assert np.allclose(np.abs(f.V), np.eye(3), atol=1e-12)


def test_svd_rank_one_outer_product():
    rng = np.random.default_rng(0)
    x = random_complex(rng, 4)
    y = random_complex(rng, 6)
    x *= 2.0 / np.linalg.norm(x)
    y *= 5.0 / np.linalg.norm(y)
    f = svd(np.outer(x, y.conj()))
    assert f.S[0] == pytest.approx(10.0, rel=1e-12)  # ||x|| * ||y||
    assert np.all(f.S[1:] <= 1e-12 * f.S[0])


@pytest.mark.parametrize("shape", [(5, 5), (8, 3), (3, 8)])
def test_svd_invariants(shape):
    rng = np.random.default_rng(42)
    for _ in range(5):
        A = random_complex(rng, shape)
        f = svd(A)
        recon = (f.U * f.S) @ f.V.conj().T
        assert np.linalg.norm(recon - A) <= 1e-12 * np.linalg.norm(A)
        p = min(shape)
        assert np.allclose(f.U.conj().T @ f.U, np.eye(p), atol=1e-12)
        assert np.allclose(f.V.conj().T @ f.V, np.eye(p), atol=1e-12)
        assert np.all(np.diff(f.S) <= 0)


def test_svd_sign_convention_and_determinism():
    rng = np.random.default_rng(1)
    A = random_complex(rng, (6, 4))
    f1 = svd(A)
    f2 = svd(A.copy())
    assert np.array_equal(f1.U, f2.U) and np.array_equal(f1.V, f2.V)
    pivots = f1.U[np.argmax(np.abs(f1.U), axis=0), np.arange(4)]
    assert np.allclose(pivots.imag, 0.0, atol=1e-14)
    assert np.all(pivots.real > 0)


def test_svd_real_input_stays_real():
    rng = np.random.default_rng(2)
    f = svd(rng.standard_normal((5, 4)))
    assert not np.iscomplexobj(f.U) and not np.iscomplexobj(f.V)


def test_svd_rejects_nonfinite():
    with pytest.raises(ValueError):
        svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


# ------------------------------------------------------------------- truncate

def test_truncate_full_rank_reproduces():
    rng = np.random.default_rng(3)
    A = random_complex(rng, (7, 5))
    f = svd(A)
    assert np.linalg.norm(truncate(f, 5) - A) <= 1e-12 * np.linalg.norm(A)


def test_truncate_zero_rank():
    f = svd(np.diag([3.0, 2.0, 1.0]))
    assert np.array_equal(truncate(f, 0), np.zeros((3, 3)))


def test_truncate_rank_one_of_diagonal():
    f = svd(np.diag([3.0, 2.0, 1.0]))
    assert np.allclose(truncate(f, 1), np.diag([3.0, 0.0, 0.0]), atol=1e-12)


def test_truncate_rank_error():
    f = svd(np.eye(3))
    with pytest.raises(RankError):
        truncate(f, 4)
    with pytest.raises(RankError):
        truncate(f, -1)


def test_truncate_invariant_under_phase_rotation():
    rng = np.random.default_rng(4)
    A = random_complex(rng, (6, 6))
    f = svd(A)
    r = 3
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=6))
    rotated = (f.U * phases)[:, :r] @ np.diag(f.S[:r]) @ ((f.V * phases)[:, :r]).conj().T
    assert np.allclose(rotated, truncate(f, r), atol=1e-12 * f.S[0])


def test_eckart_young_monotonicity():
    rng = np.random.default_rng(5)
    A = random_complex(rng, (8, 6))
    f = svd(A)
    errors = [np.linalg.norm(A - truncate(f, r)) for r in range(7)]
    assert all(errors[r] >= errors[r + 1] - 1e-12 for r in range(6))


def test_truncate_cleaned():
    f = svd(np.diag([3.0, 2.0, 1.0]))
    assert np.allclose(truncate_cleaned(f, 2, f.S[:2]), truncate(f, 2), atol=1e-14)
    assert np.array_equal(truncate_cleaned(f, 2, np.zeros(2)), np.zeros((3, 3)))
    out = truncate_cleaned(f, 2, np.array([2.9, 1.8]))
    assert np.allclose(out, np.diag([2.9, 1.8, 0.0]), atol=1e-12)
    with pytest.raises(RankError):
        truncate_cleaned(f, 2, np.ones(3))
    with pytest.raises(ValueError):
        truncate_cleaned(f, 2, np.array([1.0, -0.1]))


# ------------------------------------------------------------------- hankel

def test_hankelize_definition():
    hm = hankelize(np.array([1.0, 2.0, 3.0]), window=2)
    assert np.array_equal(hm.matrix, [[1.0, 2.0], [2.0, 3.0]])
    assert hm.series_len == 3 and hm.window == 2


def test_hankelize_auto_window_near_square():
    hm = hankelize(np.arange(10.0))
    assert hm.window == auto_window(10) == 6
    assert hm.matrix.shape == (6, 5)


def test_hankelize_constant_series_rank_one():
    hm = hankelize(np.ones(20))
    S = np.linalg.svd(hm.matrix, compute_uv=False)
    assert S[1] <= 1e-12 * S[0]


def test_hankelize_geometric_series_rank_one():
    t = np.arange(30)
    hm = hankelize(0.9 ** t)
    S = np.linalg.svd(hm.matrix, compute_uv=False)
    assert S[1] <= 1e-12 * S[0]


def test_hankelize_window_errors():
    with pytest.raises(WindowError):
        hankelize(np.array([1.0]))
    with pytest.raises(WindowError):
        hankelize(np.arange(5.0), window=0)
    with pytest.raises(WindowError):
        hankelize(np.arange(5.0), window=6)


def test_dehankelize_inverts_hankelize():
    rng = np.random.default_rng(6)
    for n, L in [(7, 3), (12, 6), (5, 5), (9, 1)]:
        s = random_complex(rng, n)
        assert np.array_equal(dehankelize_ssa(hankelize(s, L).matrix), s)


def test_dehankelize_averages_antidiagonals():
    out = dehankelize_ssa(np.array([[1.0, 3.0], [5.0, 7.0]]))
    assert np.allclose(out, [1.0, 4.0, 7.0])


def test_dehankelize_zero_matrix():
    assert np.array_equal(dehankelize_ssa(np.zeros((3, 4))), np.zeros(6))


def test_dehankelize_linearity():
    rng = np.random.default_rng(7)
    M1 = random_complex(rng, (4, 5))
    M2 = random_complex(rng, (4, 5))
    alpha = 2.5 - 1.25j
    lhs = dehankelize_ssa(alpha * M1 + M2)
    rhs = alpha * dehankelize_ssa(M1) + dehankelize_ssa(M2)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_hankel_rank_oracle_complex_exponentials():
    rng = np.random.default_rng(8)
    n = 120
    t = np.arange(n)
    for q in [1, 3, 5]:
        poles = np.exp((-rng.uniform(0.001, 0.02, q)) + 1j * rng.uniform(0.1, 3.0, q))
        amps = random_complex(rng, q)
        series = (amps[None, :] * poles[None, :] ** t[:, None]).sum(axis=1)
        hm = hankelize(series)
        S = np.linalg.svd(hm.matrix, compute_uv=False)
        assert S[q] <= 1e-9 * S[0]


# ------------------------------------------------------------- series filter

def damped_sinusoids(n=512, freqs=(0.12, 0.31), decays=(0.004, 0.007), seed=9):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    out = np.zeros(n)
    for f0, a0 in zip(freqs, decays):
        out += rng.uniform(0.5, 2.0) * np.exp(-a0 * t) * np.sin(2 * np.pi * f0 * t + rng.uniform(0, np.pi))
    return out


def test_hankel_tsvd_series_recovers_two_sinusoids():
    series = damped_sinusoids()
    # oracle: two real damped sinusoids generate a rank-4 Hankel matrix
    S = np.linalg.svd(hankelize(series).matrix, compute_uv=False)
    assert S[4] <= 1e-9 * S[0]
    out, record = hankel_tsvd_series(series, selector=FixedRank(4))
    assert len(out) == len(series)
    assert np.linalg.norm(out - series) <= 1e-8 * np.linalg.norm(series)
    assert record.rank == 4
    assert record.model is None


def test_hankel_tsvd_series_full_rank_identity():
    rng = np.random.default_rng(10)
    series = rng.standard_normal(64)
    out, record = hankel_tsvd_series(series, selector=FixedRank(10 ** 9))
    assert np.linalg.norm(out - series) <= 1e-10 * np.linalg.norm(series)
    assert record.rank == min(hankelize(series).matrix.shape)


def test_hankel_tsvd_series_e15_rejects_white_noise():
    # noise-only series: the fitted floor swallows (almost) everything
    for seed in range(5):
        rng = np.random.default_rng(seed)
        series = rng.standard_normal(1024)
        out, record = hankel_tsvd_series(series, selector=E15(0.10))
        assert record.rank <= 2
        assert np.sum(np.abs(out) ** 2) < np.sum(series ** 2)
        assert record.model is not None
        assert record.model.sigma_n > 0


def test_hankel_tsvd_series_too_short():
    with pytest.raises(WindowError):
        hankel_tsvd_series(np.ones(3), selector=FixedRank(1))
