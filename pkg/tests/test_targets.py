import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustspline.errors import InputError
from robustspline.kernel import cdf_discrepancy
from robustspline.targets import (
    MLP_M,
    NOISE_VARIANCE,
    XSINX_M,
    DesignSpec,
    MLP3Params,
    density_for,
    generate_design,
    linear,
    make_target,
    mlp3,
    mlp_forward,
    sample_dataset,
    xsinx,
    zero,
)


def test_paper_constants():
    assert (XSINX_M, MLP_M, NOISE_VARIANCE) == (100.0, 500.0, 1.0)


def test_xsinx_bound():
    f = xsinx()
    assert f.domain == (-10.0, 10.0) and f.bound == 10.0
    assert f.check_bound() <= 10.0
    assert f(np.pi / 2) == pytest.approx(np.pi / 2)


def test_linear_and_zero():
    f = linear(2.0, -1.0)
    assert f.bound == 1.0 and f(0.75) == 0.5
    assert zero()(np.array([0.3, 0.4])).tolist() == [0.0, 0.0]
    assert make_target("linear", slope=3.0, intercept=1.0)(1.0) == 4.0
    with pytest.raises(InputError):
        make_target("cosine")


def test_bound_violation_detected():
    f = make_target("xsinx")
    broken = type(f)("custom", f.domain, 5.0, f.fn)
    with pytest.raises(InputError):
        broken.check_bound()


def test_mlp_params_range_and_determinism():
    a = MLP3Params.from_seed(3)
    b = MLP3Params.from_seed(3)
    for name in ("W1", "b1", "W2", "b2", "W3", "b3"):
        arr = getattr(a, name)
        assert np.all(np.abs(arr) <= 1.0)
        assert np.array_equal(arr, getattr(b, name))
    assert a.width == 32
    x = np.linspace(-10, 10, 257)
    assert np.array_equal(mlp_forward(a, x), mlp_forward(b, x))
    with pytest.raises(InputError):
        MLP3Params(np.full((2, 1), 1.5), np.zeros(2), np.zeros((2, 2)), np.zeros(2), np.zeros((1, 2)), np.zeros(1))


def test_mlp_zero_weights():
    h = 4
    p = MLP3Params(np.zeros((h, 1)), np.zeros(h), np.zeros((h, h)), np.zeros(h), np.zeros((1, h)), np.zeros(1))
    assert mlp_forward(p, 2.5) == 0.0


def test_mlp_unit_width():
    p = MLP3Params(np.ones((1, 1)), np.zeros(1), np.ones((1, 1)), np.zeros(1), np.ones((1, 1)), np.zeros(1))
    for x in (-3.0, 0.2, 7.0):
        assert mlp_forward(p, x) == pytest.approx(np.tanh(np.tanh(x)), abs=1e-15)


def loop_forward(p, x):
    """Scalar loops over units, written without matrix products."""
    h = p.width
    h1 = [np.tanh(p.W1[j, 0] * x + p.b1[j]) for j in range(h)]
    h2 = [np.tanh(sum(p.W2[k, j] * h1[j] for j in range(h)) + p.b2[k]) for k in range(h)]
    return sum(p.W3[0, k] * h2[k] for k in range(h)) + p.b3[0]


def test_mlp_matches_loop_implementation():
    p = MLP3Params.from_seed(11)
    x = np.linspace(-10, 10, 41)
    np.testing.assert_allclose(mlp_forward(p, x), [loop_forward(p, t) for t in x], atol=1e-12, rtol=0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_mlp_bound(seed):
    f = mlp3(MLP3Params.from_seed(seed))
    assert f.bound <= 32 + 1
    assert f.check_bound() <= f.bound


def test_uniform_design():
    d = generate_design(DesignSpec("uniform", 3))
    np.testing.assert_allclose(d.x, [0.25, 0.5, 0.75])
    d = generate_design(DesignSpec("uniform", 9, (-10, 10)))
    assert d.domain == (-10.0, 10.0) and d.x[4] == pytest.approx(0.0, abs=1e-14)


def test_gaussian_design_symmetry():
    d = generate_design(DesignSpec("gaussian", 101, (-10, 10)))
    assert d.x[50] == pytest.approx(0.0, abs=1e-11)
    np.testing.assert_allclose(d.x, -d.x[::-1], atol=1e-11)


@pytest.mark.parametrize("kind", ["uniform", "gaussian"])
@pytest.mark.parametrize("n", [3, 10, 100, 1000])
def test_quantile_design_discrepancy(kind, n):
    spec = DesignSpec(kind, n, (-10, 10))
    d = generate_design(spec)
    assert cdf_discrepancy(d, density_for(spec)) <= 2 / (n + 1)
    a, b = spec.domain
    assert a < d.x[0] and d.x[-1] < b


def test_design_errors():
    with pytest.raises(InputError):
        DesignSpec("uniform", 2)
    with pytest.raises(InputError):
        DesignSpec("uniform", 10, (1, 0))
    with pytest.raises(InputError):
        DesignSpec("sobol", 10)
    with pytest.raises(InputError):
        generate_design(DesignSpec("explicit", 0, (0, 1), points=(0.1, 0.1, 0.5)))
    d = generate_design(DesignSpec("explicit", 0, (0, 1), points=(0.1, 0.2, 0.5)))
    assert d.n == 3


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 500), st.floats(-50, 50), st.floats(0.1, 100))
def test_designs_strictly_increasing(n, a, width):
    for kind in ("uniform", "gaussian"):
        d = generate_design(DesignSpec(kind, n, (a, a + width)))
        assert np.all(np.diff(d.x) > 0)
        assert a < d.x[0] and d.x[-1] < a + width


def test_noiseless_dataset():
    d = generate_design(DesignSpec("uniform", 20, (-10, 10)))
    f = xsinx()
    ds = sample_dataset(f, d, 0.0, np.random.default_rng(0))
    assert np.array_equal(ds.y, f(d.x))


def test_noise_moments():
    d = generate_design(DesignSpec("uniform", 1000))
    rng = np.random.default_rng(123)
    y = np.concatenate([sample_dataset(zero(), d, 2.0, rng).y for _ in range(100)])
    assert abs(y.mean()) <= 4 * 2.0 / np.sqrt(y.size)
    assert y.var() == pytest.approx(4.0, rel=0.05)


def test_dataset_determinism():
    d = generate_design(DesignSpec("gaussian", 50))
    a = sample_dataset(xsinx((0, 1)), d, 1.0, np.random.default_rng(5)).y
    b = sample_dataset(xsinx((0, 1)), d, 1.0, np.random.default_rng(5)).y
    assert a.tobytes() == b.tobytes()
    with pytest.raises(InputError):
        sample_dataset(zero(), d, -1.0, np.random.default_rng(5))
