import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from pmicopula.core import CopulaModel, independence, upper_bound
from pmicopula.errors import (InvalidGenerator, InvalidGenerators, InvalidPickands,
                              NoSamplingPath, ParamOutOfRange)
from pmicopula.families import (ArchimedeanGenerator, PickandsFunction, archimedean, evc,
                                example_pickands, fgm, fgm_cubic, fgm_generalized, frank,
                                frechet, gaussian, gen_amh, gen_clayton, gen_frank, gen_gumbel,
                                gen_independence, gen_joe, gen_lower_bound, invert_kernel,
                                marshall_olkin, sample)

MODELS = {
    "gaussian(0.7)": lambda: gaussian(0.7),
    "gaussian(-0.9)": lambda: gaussian(-0.9),
    "frank(8)": lambda: frank(8.0),
    "frank(-3)": lambda: frank(-3.0),
    "fgm(-1)": lambda: fgm(-1.0),
    "fgm_cubic": fgm_cubic,
    "frechet(0.3,0.5)": lambda: frechet(0.3, 0.5),
    "mo(0.4,0.8)": lambda: marshall_olkin(0.4, 0.8),
    "evc_example": lambda: evc(example_pickands()),
    "clayton(2)": lambda: archimedean(gen_clayton(2.0)),
    "clayton(-0.5)": lambda: archimedean(gen_clayton(-0.5)),
    "gumbel(2)": lambda: archimedean(gen_gumbel(2.0)),
    "joe(3)": lambda: archimedean(gen_joe(3.0)),
    "amh(0.5)": lambda: archimedean(gen_amh(0.5)),
}

t_grid = np.linspace(0, 1, 51)


@pytest.mark.parametrize("name", MODELS)
def test_copula_axioms(name):
    C = MODELS[name]()
    assert np.allclose(C.cdf(t_grid, 0.0), 0.0, atol=1e-12)
    assert np.allclose(C.cdf(0.0, t_grid), 0.0, atol=1e-12)
    assert np.allclose(C.cdf(t_grid, 1.0), t_grid, atol=1e-12)
    assert np.allclose(C.cdf(1.0, t_grid), t_grid, atol=1e-12)
    vals = C.cdf(*np.meshgrid(t_grid, t_grid, indexing="ij"))
    assert np.all(np.diff(np.diff(vals, axis=0), axis=1) >= -1e-12)


@pytest.mark.parametrize("name", MODELS)
@settings(max_examples=40, deadline=None)
@given(a=st.floats(0, 1), b=st.floats(0, 1), c=st.floats(0, 1), d=st.floats(0, 1))
def test_random_rectangles_nonnegative(name, a, b, c, d):
    C = MODELS[name]()
    a, b = sorted((a, b))
    c, d = sorted((c, d))
    assert C.volume(a, b, c, d) >= -1e-12


@pytest.mark.parametrize("name", MODELS)
def test_kernels_are_partial_derivatives(name):
    C = MODELS[name]()
    rng = np.random.default_rng(1)
    u, v = 0.05 + 0.9 * rng.random((2, 200))
    h = 1e-6
    d1 = (C.cdf(u + h, v) - C.cdf(u - h, v)) / (2 * h)
    d2 = (C.cdf(u, v + h) - C.cdf(u, v - h)) / (2 * h)
    # kinks (singular parts) are a null set; ignore points right next to one
    ok1 = np.abs(C.kernel(u + h, v) - C.kernel(u - h, v)) < 1e-4
    ok2 = np.abs(C.kernel2(u, v + h) - C.kernel2(u, v - h)) < 1e-4
    assert ok1.mean() > 0.9 and ok2.mean() > 0.9
    assert np.allclose(C.kernel(u, v)[ok1], d1[ok1], atol=1e-6)
    assert np.allclose(C.kernel2(u, v)[ok2], d2[ok2], atol=1e-6)


@pytest.mark.parametrize("name", [n for n in MODELS if MODELS[n]().density is not None])
def test_density_is_mixed_partial(name):
    C = MODELS[name]()
    rng = np.random.default_rng(2)
    u, v = 0.05 + 0.9 * rng.random((2, 100))
    h = 1e-4
    fd = (C.cdf(u + h, v + h) - C.cdf(u - h, v + h) - C.cdf(u + h, v - h)
          + C.cdf(u - h, v - h)) / (4 * h * h)
    assert np.allclose(C.density(u, v), fd, rtol=1e-4, atol=1e-4)


# ---------------------------------------------------------------------------
# Gaussian

def test_gaussian_zero_is_independence():
    uu, vv = np.meshgrid(t_grid, t_grid, indexing="ij")
    assert np.allclose(gaussian(0.0).cdf(uu, vv), uu * vv, atol=1e-9)


def test_gaussian_density_radial_symmetry():
    rng = np.random.default_rng(0)
    u, v = rng.random((2, 100))
    c = gaussian(0.5).density
    assert np.allclose(c(u, v), c(1 - u, 1 - v), rtol=1e-10)


def test_gaussian_cdf_matches_quadrature_of_density():
    C = gaussian(0.5)
    val, _ = integrate.dblquad(lambda y, x: C.density(x, y), 0, 0.5, 0, 0.5,
                               epsabs=1e-12, epsrel=1e-12)
    assert C.cdf(0.5, 0.5) == pytest.approx(val, abs=1e-8)
    # orthant probability
    assert C.cdf(0.5, 0.5) == pytest.approx(0.25 + np.arcsin(0.5) / (2 * np.pi), abs=1e-12)


def test_gaussian_cdf_matches_scipy_mvn():
    rng = np.random.default_rng(9)
    for rho in (-0.95, -0.4, 0.2, 0.8, 0.97):
        u, v = rng.random((2, 5))
        ref = stats.multivariate_normal([0, 0], [[1, rho], [rho, 1]]).cdf(
            np.column_stack([stats.norm.ppf(u), stats.norm.ppf(v)]))
        assert np.allclose(gaussian(rho).cdf(u, v), ref, atol=1e-6)


@pytest.mark.parametrize("rho", [1.0, -1.0, 1.5, np.nan])
def test_gaussian_rejects_bad_rho(rho):
    with pytest.raises(ParamOutOfRange):
        gaussian(rho)


# ---------------------------------------------------------------------------
# Frank

def test_frank_rejects_near_zero():
    with pytest.raises(ParamOutOfRange):
        frank(1e-9)


def test_frank_density_radial_symmetry():
    rng = np.random.default_rng(0)
    u, v = rng.random((2, 100))
    c = frank(5.0).density
    assert np.allclose(c(u, v), c(1 - u, 1 - v), rtol=1e-10)


def test_frank_total_mass():
    assert frank(2.0).volume(0, 1, 0, 1) == pytest.approx(1.0, abs=1e-12)


def test_frank_density_integrates_to_one():
    val, _ = integrate.dblquad(lambda y, x: frank(2.0).density(x, y), 0, 1, 0, 1)
    assert val == pytest.approx(1.0, abs=1e-8)


# ---------------------------------------------------------------------------
# FGM family

def test_fgm_zero_is_independence():
    uu, vv = np.meshgrid(t_grid, t_grid, indexing="ij")
    assert np.allclose(fgm(0.0).cdf(uu, vv), uu * vv, atol=1e-15)


def test_fgm_parameter_range():
    with pytest.raises(ParamOutOfRange):
        fgm(1.2)


def test_fgm_generators_validated():
    with pytest.raises(InvalidGenerators):
        fgm_generalized(lambda u: 3 * u * (1 - u), lambda v: v * (1 - v))
    with pytest.raises(InvalidGenerators):
        fgm_generalized(lambda u: u * (1 - u) + 0.1, lambda v: v * (1 - v))


def test_fgm_numeric_derivatives_agree():
    exact = fgm(0.7)
    approx = fgm_generalized(lambda u: 0.7 * u * (1 - u), lambda v: v * (1 - v))
    rng = np.random.default_rng(0)
    u, v = rng.random((2, 50))
    assert np.allclose(exact.density(u, v), approx.density(u, v), atol=1e-6)


# ---------------------------------------------------------------------------
# Frechet and Marshall-Olkin

def test_frechet_one_zero_is_m():
    uu, vv = np.meshgrid(t_grid, t_grid, indexing="ij")
    assert np.allclose(frechet(1.0, 0.0).cdf(uu, vv), np.minimum(uu, vv), atol=1e-15)


def test_frechet_rejects_bad_weights():
    with pytest.raises(ParamOutOfRange):
        frechet(0.7, 0.5)


def test_marshall_olkin_limits():
    uu, vv = np.meshgrid(t_grid, t_grid, indexing="ij")
    assert np.allclose(marshall_olkin(0, 0).cdf(uu, vv), uu * vv, atol=1e-15)
    assert np.allclose(marshall_olkin(1, 1).cdf(uu, vv), np.minimum(uu, vv), atol=1e-15)
    with pytest.raises(ParamOutOfRange):
        marshall_olkin(1.2, 0.5)


# ---------------------------------------------------------------------------
# extreme value copulas

def test_evc_constant_pickands_is_independence():
    A = PickandsFunction.piecewise_linear([(0, 1), (1, 1)])
    uu, vv = np.meshgrid(t_grid, t_grid, indexing="ij")
    assert np.allclose(evc(A).cdf(uu, vv), uu * vv, atol=1e-14)


def test_evc_lower_pickands_bound_is_m():
    A = PickandsFunction.piecewise_linear([(0, 1), (0.5, 0.5), (1, 1)])
    uu, vv = np.meshgrid(t_grid, t_grid, indexing="ij")
    assert np.allclose(evc(A).cdf(uu, vv), np.minimum(uu, vv), atol=1e-14)


def test_evc_gumbel_pickands_matches_gumbel_archimedean():
    th = 2.5
    fn = lambda t: (t ** th + (1 - t) ** th) ** (1 / th)
    d = lambda t: (t ** th + (1 - t) ** th) ** (1 / th - 1) * (t ** (th - 1) - (1 - t) ** (th - 1))
    C1 = evc(PickandsFunction.closed_form(fn, d))
    C2 = archimedean(gen_gumbel(th))
    rng = np.random.default_rng(0)
    u, v = rng.random((2, 100))
    assert np.allclose(C1.cdf(u, v), C2.cdf(u, v), atol=1e-12)
    assert np.allclose(C1.kernel(u, v), C2.kernel(u, v), atol=1e-8)


@pytest.mark.parametrize("knots", [
    [(0, 1), (0.5, 0.4), (1, 1)],            # below max(t, 1-t)
    [(0, 1), (0.3, 0.9), (0.6, 0.95), (1, 1)],  # not convex
    [(0.1, 1), (1, 1)],                      # does not start at 0
    [(0, 0.9), (1, 1)],                      # A(0) != 1
])
def test_pickands_validation(knots):
    with pytest.raises(InvalidPickands):
        PickandsFunction.piecewise_linear(knots)


# ---------------------------------------------------------------------------
# Archimedean copulas

def test_archimedean_independence_generator():
    uu, vv = np.meshgrid(t_grid, t_grid, indexing="ij")
    assert np.allclose(archimedean(gen_independence()).cdf(uu, vv), uu * vv, atol=1e-14)


def test_archimedean_frank_matches_closed_form():
    rng = np.random.default_rng(0)
    u, v = rng.random((2, 100))
    assert np.allclose(archimedean(gen_frank(5.0)).cdf(u, v), frank(5.0).cdf(u, v), atol=1e-10)


def test_archimedean_lower_bound_generator():
    uu, vv = np.meshgrid(t_grid, t_grid, indexing="ij")
    assert np.allclose(archimedean(gen_lower_bound()).cdf(uu, vv),
                       np.maximum(uu + vv - 1, 0), atol=1e-14)


def test_invalid_generators_rejected():
    with pytest.raises(InvalidGenerator):  # increasing
        archimedean(ArchimedeanGenerator(lambda t: t - 1.0, lambda x: x + 1.0))
    with pytest.raises(InvalidGenerator):  # concave
        archimedean(ArchimedeanGenerator(lambda t: 1 - t * t, lambda x: np.sqrt(1 - x)))
    with pytest.raises(InvalidGenerator):  # wrong inverse
        archimedean(ArchimedeanGenerator(lambda t: -np.log(t), lambda x: np.exp(-2 * x)))


def test_generator_parameter_ranges():
    for bad in (lambda: gen_clayton(-2), lambda: gen_gumbel(0.5), lambda: gen_joe(0.2),
                lambda: gen_amh(1.0), lambda: gen_frank(0.0)):
        with pytest.raises(ParamOutOfRange):
            bad()


# ---------------------------------------------------------------------------
# sampling

def test_sample_independence_spearman():
    xy = sample(independence(), 10_000, 1)
    assert abs(stats.spearmanr(xy[:, 0], xy[:, 1]).statistic) < 0.03


def test_sample_upper_bound_on_diagonal():
    xy = sample(upper_bound(), 100, 1)
    assert np.allclose(xy[:, 0], xy[:, 1], atol=1e-12)


def test_sample_gaussian_matches_cdf():
    xy = sample(gaussian(0.5), 100_000, 3)
    emp = np.mean((xy[:, 0] <= 0.5) & (xy[:, 1] <= 0.5))
    assert abs(emp - gaussian(0.5).cdf(0.5, 0.5)) < 0.01


@pytest.mark.parametrize("C", [archimedean(gen_clayton(2.0)), marshall_olkin(0.3, 0.6),
                               evc(example_pickands()), fgm(0.8)],
                         ids=["clayton", "mo", "evc", "fgm"])
def test_kernel_inversion_sampling(C):
    assert C.sampler is None
    xy = sample(C, 40_000, 5)
    for u, v in [(0.2, 0.3), (0.5, 0.5), (0.7, 0.9)]:
        emp = np.mean((xy[:, 0] <= u) & (xy[:, 1] <= v))
        assert abs(emp - C.cdf(u, v)) < 0.01


def test_sample_is_seed_deterministic():
    C = frank(3.0)
    assert np.array_equal(sample(C, 50, 7), sample(C, 50, 7))


def test_no_sampling_path():
    C = CopulaModel("bare", (), lambda u, v: np.minimum(u, v))
    with pytest.raises(NoSamplingPath):
        sample(C, 10, 0)


def test_invert_kernel_generalised_inverse():
    K = upper_bound().kernel
    u = np.array([0.2, 0.6])
    w = np.array([0.5, 0.5])
    assert np.allclose(invert_kernel(K, u, w), u, atol=1e-11)
