"""Parametric copula families and sampling by conditional inversion."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtr, ndtri

from . import _kernels
from .core import (CopulaModel, _arr, independence, lower_bound, make_rng, mixture,
                   upper_bound)
from .errors import (InvalidGenerator, InvalidGenerators, InvalidPickands, NoSamplingPath,
                     ParamOutOfRange)

BISECTION_TOL = 1e-12
BISECTION_MAXITER = 200


def _finite_param(name, x):
    x = float(x)
    if not np.isfinite(x):
        raise ParamOutOfRange(f"{name} must be finite, got {x}")
    return x


# ---------------------------------------------------------------------------
# Gaussian

def gaussian(rho: float) -> CopulaModel:
    """Gaussian copula with correlation ``rho`` in (-1, 1)."""
    rho = _finite_param("rho", rho)
    if not -1.0 < rho < 1.0:
        raise ParamOutOfRange(f"rho must lie in (-1, 1), got {rho}")
    s = np.sqrt(1.0 - rho * rho)

    def cdf(u, v):
        u, v = _arr(u, v)
        return np.clip(_kernels.bvn_cdf(ndtri(u), ndtri(v), rho), 0.0, np.minimum(u, v))

    def density(u, v):
        x, y = ndtri(np.asarray(u, float)), ndtri(np.asarray(v, float))
        q = (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * s * s)
        return np.exp(-q) / s

    def kernel(u, v):
        u, v = _arr(u, v)
        with np.errstate(invalid="ignore"):
            val = ndtr((ndtri(v) - rho * ndtri(u)) / s)
        return np.where(v >= 1.0, 1.0, np.where(v <= 0.0, 0.0, val))

    def kernel2(u, v):
        return kernel(v, u)

    def sampler(n, seed=None):
        z = make_rng(seed).standard_normal((n, 2))
        return ndtr(np.column_stack([z[:, 0], rho * z[:, 0] + s * z[:, 1]]))

    return CopulaModel("gaussian", (rho,), cdf, density, kernel, kernel2, sampler,
                       symmetric=True, meta={"quadrature": True})


# ---------------------------------------------------------------------------
# Frank

def frank(delta: float) -> CopulaModel:
    """Frank copula; ``delta`` must be nonzero (|delta| >= 1e-8)."""
    delta = _finite_param("delta", delta)
    if abs(delta) < 1e-8:
        raise ParamOutOfRange("Frank parameter too close to 0; use independence() instead")
    d = np.expm1(-delta)

    def cdf(u, v):
        u, v = _arr(u, v)
        a, b = np.expm1(-delta * u), np.expm1(-delta * v)
        return np.clip(-np.log1p(a * b / d) / delta, 0.0, np.minimum(u, v))

    def density(u, v):
        u, v = _arr(u, v)
        a, b = np.expm1(-delta * u), np.expm1(-delta * v)
        return -delta * d * np.exp(-delta * (u + v)) / (d + a * b) ** 2

    def kernel(u, v):
        u, v = _arr(u, v)
        a, b = np.expm1(-delta * u), np.expm1(-delta * v)
        return np.clip(np.exp(-delta * u) * b / (d + a * b), 0.0, 1.0)

    def kernel2(u, v):
        return kernel(v, u)

    def sampler(n, seed=None):
        rng = make_rng(seed)
        u, w = rng.random(n), rng.random(n)
        b = w * d / (w + (1.0 - w) * np.exp(-delta * u))
        return np.column_stack([u, -np.log1p(b) / delta])

    return CopulaModel("frank", (delta,), cdf, density, kernel, kernel2, sampler, symmetric=True)


# ---------------------------------------------------------------------------
# generalized FGM

def _num_deriv(fn, h=1e-6):
    def out(x):
        x = np.asarray(x, float)
        lo = np.clip(x - h, 0.0, 1.0)
        hi = np.clip(x + h, 0.0, 1.0)
        return (fn(hi) - fn(lo)) / (hi - lo)

    return out


def fgm_generalized(f: Callable, g: Callable, df: Optional[Callable] = None,
                    dg: Optional[Callable] = None, params=(), family="fgm_generalized",
                    grid: int = 200) -> CopulaModel:
    """Copula uv + f(u) g(v) for boundary-vanishing f, g.

    Derivatives are approximated by central differences when not supplied.
    Validity requires f'(u) g'(v) >= -1, checked on a ``grid`` x ``grid``
    mesh together with the boundary conditions.
    """
    df = df or _num_deriv(f)
    dg = dg or _num_deriv(g)
    ends = np.array([0.0, 1.0])
    if np.max(np.abs(f(ends))) > 1e-12 or np.max(np.abs(g(ends))) > 1e-12:
        raise InvalidGenerators("f and g must vanish at 0 and 1")
    t = (np.arange(grid) + 0.5) / grid
    t = np.concatenate([[0.0], t, [1.0]])
    prod = np.outer(df(t), dg(t))
    if prod.min() < -1.0 - 1e-12:
        raise InvalidGenerators(f"f'(u) g'(v) reaches {prod.min():.4g} < -1")

    def cdf(u, v):
        u, v = _arr(u, v)
        return u * v + f(u) * g(v)

    def density(u, v):
        u, v = _arr(u, v)
        return 1.0 + df(u) * dg(v)

    def kernel(u, v):
        u, v = _arr(u, v)
        return np.clip(v + df(u) * g(v), 0.0, 1.0)

    def kernel2(u, v):
        u, v = _arr(u, v)
        return np.clip(u + f(u) * dg(v), 0.0, 1.0)

    probe = np.linspace(0, 1, 17)
    sym = bool(np.allclose(f(probe), g(probe), atol=1e-14, rtol=0))
    return CopulaModel(family, tuple(params), cdf, density, kernel, kernel2, None, symmetric=sym)


def fgm(alpha: float) -> CopulaModel:
    """Classical FGM copula uv + alpha u v (1-u)(1-v), alpha in [-1, 1]."""
    alpha = _finite_param("alpha", alpha)
    if not -1.0 <= alpha <= 1.0:
        raise ParamOutOfRange(f"FGM alpha must lie in [-1, 1], got {alpha}")
    return fgm_generalized(lambda u: alpha * u * (1 - u), lambda v: v * (1 - v),
                           lambda u: alpha * (1 - 2 * u), lambda v: 1 - 2 * v,
                           params=(alpha,), family="fgm")


def fgm_cubic() -> CopulaModel:
    """FGM-type copula with f(u) = u(1-u)(1-2u), g(v) = v(1-v): PMI but not PQD."""
    return fgm_generalized(lambda u: u * (1 - u) * (1 - 2 * u), lambda v: v * (1 - v),
                           lambda u: 1 - 6 * u + 6 * u * u, lambda v: 1 - 2 * v,
                           family="fgm_cubic")


# ---------------------------------------------------------------------------
# Frechet and Marshall-Olkin

def frechet(alpha: float, beta: float) -> CopulaModel:
    """alpha M + (1 - alpha - beta) Pi + beta W."""
    alpha, beta = _finite_param("alpha", alpha), _finite_param("beta", beta)
    if alpha < 0 or beta < 0 or alpha + beta > 1.0 + 1e-15:
        raise ParamOutOfRange("need alpha, beta >= 0 and alpha + beta <= 1")
    rest = max(0.0, 1.0 - alpha - beta)
    return mixture([upper_bound(), independence(), lower_bound()], [alpha, rest, beta],
                   family="frechet", params=(alpha, beta))


def marshall_olkin(alpha: float, beta: float) -> CopulaModel:
    """Marshall-Olkin copula min(u^(1-alpha) v, u v^(1-beta)).

    The kernels are right-continuous and carry the jump caused by the
    singular curve u^alpha = v^beta.
    """
    alpha, beta = _finite_param("alpha", alpha), _finite_param("beta", beta)
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise ParamOutOfRange("Marshall-Olkin parameters must lie in [0, 1]")
    ab = alpha / beta if beta > 0 else np.inf
    ba = beta / alpha if alpha > 0 else np.inf

    def cdf(u, v):
        u, v = _arr(u, v)
        return np.minimum(u ** (1 - alpha) * v, u * v ** (1 - beta))

    def kernel(u, v):
        u, v = _arr(u, v)
        with np.errstate(divide="ignore", invalid="ignore"):
            below = (1 - alpha) * u ** (-alpha) * v
            above = v ** (1 - beta)
        out = np.where(v < u ** ab, below, above)
        return np.clip(np.where(v <= 0, 0.0, out), 0.0, 1.0)

    def kernel2(u, v):
        u, v = _arr(u, v)
        with np.errstate(divide="ignore", invalid="ignore"):
            right = u ** (1 - alpha)
            left = (1 - beta) * u * v ** (-beta)
        out = np.where(u >= v ** ba, right, left)
        return np.clip(np.where(u <= 0, 0.0, out), 0.0, 1.0)

    return CopulaModel("marshall_olkin", (alpha, beta), cdf, None, kernel, kernel2, None,
                       symmetric=alpha == beta)


# ---------------------------------------------------------------------------
# extreme value copulas

@dataclass(frozen=True)
class PickandsFunction:
    """Pickands dependence function on [0, 1].

    Either piecewise linear through ``knots`` (pairs (t, A(t)) including
    t = 0 and t = 1) or given by closed-form callables.
    """

    fn: Callable
    right_deriv: Callable
    left_deriv: Callable
    knots: Optional[tuple] = None

    def __call__(self, t):
        return self.fn(np.asarray(t, float))

    @classmethod
    def piecewise_linear(cls, knots) -> "PickandsFunction":
        k = np.asarray(knots, float)
        if k.ndim != 2 or k.shape[1] != 2 or k.shape[0] < 2:
            raise InvalidPickands("knots must be a sequence of (t, A(t)) pairs")
        t, a = k[:, 0], k[:, 1]
        if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0):
            raise InvalidPickands("knot abscissae must increase from 0 to 1")
        slopes = np.diff(a) / np.diff(t)
        if abs(a[0] - 1) > 1e-12 or abs(a[-1] - 1) > 1e-12:
            raise InvalidPickands("A(0) = A(1) = 1 is required")
        if np.any(a > 1 + 1e-12) or np.any(a < np.maximum(t, 1 - t) - 1e-12):
            raise InvalidPickands("max(t, 1-t) <= A(t) <= 1 violated at a knot")
        if np.any(np.diff(slopes) < -1e-12):
            raise InvalidPickands("piecewise-linear A is not convex")

        def fn(x):
            return np.interp(x, t, a)

        def right(x):
            idx = np.clip(np.searchsorted(t, x, side="right") - 1, 0, len(slopes) - 1)
            return slopes[idx]

        def left(x):
            idx = np.clip(np.searchsorted(t, x, side="left") - 1, 0, len(slopes) - 1)
            return slopes[idx]

        return cls(fn, right, left, tuple(map(tuple, k)))

    @classmethod
    def closed_form(cls, fn, deriv, left_deriv=None, grid: int = 1001) -> "PickandsFunction":
        t = np.linspace(0, 1, grid)
        a = fn(t)
        if abs(a[0] - 1) > 1e-12 or abs(a[-1] - 1) > 1e-12:
            raise InvalidPickands("A(0) = A(1) = 1 is required")
        if np.any(a > 1 + 1e-12) or np.any(a < np.maximum(t, 1 - t) - 1e-12):
            raise InvalidPickands("max(t, 1-t) <= A(t) <= 1 violated")
        if np.any(np.diff(a, 2) < -1e-10):
            raise InvalidPickands("A is not convex")
        return cls(fn, deriv, left_deriv or deriv)


def example_pickands() -> PickandsFunction:
    """Piecewise-linear Pickands function whose EVC is SI but not PMI."""
    return PickandsFunction.piecewise_linear([(0, 1), (0.2, 0.8), (0.5, 0.65), (0.8, 0.8), (1, 1)])


def evc(A: PickandsFunction) -> CopulaModel:
    """Extreme value copula (uv)^A(log u / log uv)."""
    if not isinstance(A, PickandsFunction):
        raise InvalidPickands("expected a PickandsFunction")

    def _core(u, v):
        with np.errstate(divide="ignore", invalid="ignore"):
            lu, lv = np.log(u), np.log(v)
            tot = lu + lv
            h = np.where(tot < 0, lu / np.where(tot < 0, tot, -1.0), 0.5)
            h = np.clip(h, 0.0, 1.0)
            c = np.exp(tot * A(h))
        return h, c

    def cdf(u, v):
        u, v = _arr(u, v)
        _, c = _core(u, v)
        c = np.where((u <= 0) | (v <= 0), 0.0, c)
        c = np.where(u >= 1, v, np.where(v >= 1, u, c))
        return np.clip(c, 0.0, np.minimum(u, v))

    def kernel(u, v):
        u, v = _arr(u, v)
        h, c = _core(u, v)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = c / u * (A(h) + (1 - h) * A.right_deriv(h))
        val = np.where(v <= 0, 0.0, np.where(v >= 1, 1.0, val))
        return np.clip(val, 0.0, 1.0)

    def kernel2(u, v):
        u, v = _arr(u, v)
        h, c = _core(u, v)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = c / v * (A(h) - h * A.left_deriv(h))
        val = np.where(u <= 0, 0.0, np.where(u >= 1, 1.0, val))
        return np.clip(val, 0.0, 1.0)

    probe = np.linspace(0, 1, 101)
    sym = bool(np.allclose(A(probe), A(1 - probe), atol=1e-14, rtol=0))
    return CopulaModel("evc", A.knots or (), cdf, None, kernel, kernel2, None, symmetric=sym,
                       meta={"pickands": A})


# ---------------------------------------------------------------------------
# Archimedean copulas

@dataclass(frozen=True)
class ArchimedeanGenerator:
    """Generator phi with pseudo-inverse psi and optional derivative dphi."""

    phi: Callable
    psi: Callable
    dphi: Optional[Callable] = None
    name: str = "archimedean"
    params: tuple = ()

    def validate(self, grid: int = 999, tol: float = 1e-9) -> None:
        t = np.linspace(0, 1, grid + 2)[1:-1]
        p = self.phi(t)
        if abs(float(self.phi(np.array(1.0)))) > tol:
            raise InvalidGenerator("phi(1) must be 0")
        if np.any(np.diff(p) >= 0):
            raise InvalidGenerator("phi must be strictly decreasing")
        # scale-aware convexity check via second differences
        if np.any(np.diff(p, 2) < -tol * np.maximum(1.0, np.abs(p[1:-1]))):
            raise InvalidGenerator("phi must be convex")
        back = self.psi(p)
        if np.max(np.abs(back - t)) > 1e-8:
            raise InvalidGenerator("psi is not a pseudo-inverse of phi")


def archimedean(gen: ArchimedeanGenerator) -> CopulaModel:
    """Archimedean copula psi(phi(u) + phi(v))."""
    gen.validate()
    dphi = gen.dphi or _num_deriv(gen.phi, 1e-7)

    def cdf(u, v):
        u, v = _arr(u, v)
        with np.errstate(divide="ignore", over="ignore"):
            c = gen.psi(gen.phi(u) + gen.phi(v))
        c = np.where((u <= 0) | (v <= 0), 0.0, c)
        c = np.where(u >= 1, v, np.where(v >= 1, u, c))
        return np.clip(c, 0.0, np.minimum(u, v))

    def kernel(u, v):
        u, v = _arr(u, v)
        c = cdf(u, v)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            val = dphi(u) / dphi(c)
        val = np.where(c > 0, val, 0.0)
        val = np.where(v >= 1, 1.0, val)
        return np.clip(np.nan_to_num(val, nan=0.0), 0.0, 1.0)

    def kernel2(u, v):
        return kernel(v, u)

    return CopulaModel(gen.name, gen.params, cdf, None, kernel, kernel2, None, symmetric=True,
                       meta={"generator": gen})


def gen_independence() -> ArchimedeanGenerator:
    return ArchimedeanGenerator(lambda t: -np.log(t), lambda x: np.exp(-x),
                                lambda t: -1.0 / t, "independence")


def gen_lower_bound() -> ArchimedeanGenerator:
    return ArchimedeanGenerator(lambda t: 1.0 - t, lambda x: np.maximum(1.0 - x, 0.0),
                                lambda t: -np.ones_like(t), "W")


def gen_frank(delta: float) -> ArchimedeanGenerator:
    if abs(delta) < 1e-8:
        raise ParamOutOfRange("Frank parameter too close to 0")
    d = np.expm1(-delta)
    return ArchimedeanGenerator(
        lambda t: -np.log(np.expm1(-delta * t) / d),
        lambda x: -np.log1p(np.exp(-x) * d) / delta,
        lambda t: delta * np.exp(-delta * t) / np.expm1(-delta * t),
        "frank_archimedean", (delta,))


def gen_clayton(theta: float) -> ArchimedeanGenerator:
    if theta < -1 or theta == 0:
        raise ParamOutOfRange("Clayton theta must be in [-1, 0) or (0, inf)")
    return ArchimedeanGenerator(
        lambda t: (t ** -theta - 1.0) / theta,
        lambda x: np.maximum(1.0 + theta * x, 0.0) ** (-1.0 / theta),
        lambda t: -t ** (-theta - 1.0), "clayton", (theta,))


def gen_gumbel(theta: float) -> ArchimedeanGenerator:
    if theta < 1:
        raise ParamOutOfRange("Gumbel theta must be >= 1")
    return ArchimedeanGenerator(
        lambda t: (-np.log(t)) ** theta,
        lambda x: np.exp(-x ** (1.0 / theta)),
        lambda t: -theta * (-np.log(t)) ** (theta - 1.0) / t, "gumbel", (theta,))


def gen_joe(theta: float) -> ArchimedeanGenerator:
    if theta < 1:
        raise ParamOutOfRange("Joe theta must be >= 1")
    return ArchimedeanGenerator(
        lambda t: -np.log1p(-(1.0 - t) ** theta),
        lambda x: 1.0 - (-np.expm1(-x)) ** (1.0 / theta),
        lambda t: -theta * (1.0 - t) ** (theta - 1.0) / (1.0 - (1.0 - t) ** theta),
        "joe", (theta,))


def gen_amh(theta: float) -> ArchimedeanGenerator:
    if not -1 <= theta < 1:
        raise ParamOutOfRange("Ali-Mikhail-Haq theta must be in [-1, 1)")
    return ArchimedeanGenerator(
        lambda t: np.log((1.0 - theta * (1.0 - t)) / t),
        lambda x: (1.0 - theta) / (np.exp(x) - theta),
        lambda t: theta / (1.0 - theta * (1.0 - t)) - 1.0 / t, "amh", (theta,))


# ---------------------------------------------------------------------------
# sampling

def invert_kernel(kernel: Callable, u: np.ndarray, w: np.ndarray,
                  tol: float = BISECTION_TOL, maxiter: int = BISECTION_MAXITER) -> np.ndarray:
    """Generalised inverse inf{v : kernel(u, v) >= w} by vectorised bisection."""
    lo = np.zeros_like(w)
    hi = np.ones_like(w)
    for _ in range(maxiter):
        if np.max(hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        up = kernel(u, mid) >= w
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return hi


def sample(C: CopulaModel, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` pairs from ``C`` using its sampler or by kernel inversion."""
    rng = make_rng(seed)
    if C.sampler is not None:
        return C.sampler(int(n), rng)
    if C.kernel is None:
        raise NoSamplingPath(f"{C.family} has neither a sampler nor a Markov kernel")
    u = rng.random(int(n))
    w = rng.random(int(n))
    return np.column_stack([u, invert_kernel(C.kernel, u, w)])


FAMILIES = {
    "gaussian": gaussian,
    "frank": frank,
    "fgm": fgm,
    "frechet": frechet,
    "marshall_olkin": marshall_olkin,
}
