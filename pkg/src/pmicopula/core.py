"""Bivariate copula models, the reflection group and order-theoretic helpers.

A :class:`CopulaModel` bundles vectorised callables for the distribution
function and, when known, the density, the Markov kernels and a sampler.
All callables accept broadcastable arrays and return float arrays.

Kernel conventions::

    kernel(u, v)  = K_C(u, [0, v]) = P(V <= v | U = u)  (d/du of the cdf)
    kernel2(u, v) = P(U <= u | V = v)                   (d/dv of the cdf)

Both are taken right-continuous in their distribution argument so that
singular components (atoms of the conditional law) are visible to
monotonicity checks.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NotInvariant, NotSymmetric

ArrayFn = Callable[..., np.ndarray]


def _arr(*xs):
    return np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in xs))


def make_rng(seed) -> np.random.Generator:
    """Private generator for ``seed`` (int, SeedSequence or Generator)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class CopulaModel:
    """Immutable bivariate copula with optional density, kernels and sampler."""

    family: str
    params: tuple
    cdf: ArrayFn
    density: Optional[ArrayFn] = None
    kernel: Optional[ArrayFn] = None
    kernel2: Optional[ArrayFn] = None
    sampler: Optional[Callable[[int, object], np.ndarray]] = None
    symmetric: bool = False
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, u, v):
        return self.cdf(u, v)

    def volume(self, a, b, c, d):
        """C-volume of [a, b] x [c, d]."""
        return self.cdf(b, d) - self.cdf(a, d) - self.cdf(b, c) + self.cdf(a, c)

    def __repr__(self):
        return f"CopulaModel({self.family}, params={self.params})"


# ---------------------------------------------------------------------------
# reflection group

class Reflection(enum.Enum):
    """Elements of the group generated by the permutation and nu_1.

    Each value is ``(swap, flip_u, flip_v)`` describing the induced map on a
    random vector: first ``U -> 1-U`` and/or ``V -> 1-V``, then optionally
    swap the coordinates.
    """

    IDENTITY = (False, False, False)
    NU1 = (False, True, False)
    NU2 = (False, False, True)
    NU = (False, True, True)
    PI = (True, False, False)
    PI_NU1 = (True, True, False)
    PI_NU2 = (True, False, True)
    PI_NU = (True, True, True)

    def apply_points(self, x, y):
        swap, fu, fv = self.value
        a = 1.0 - x if fu else x
        b = 1.0 - y if fv else y
        return (b, a) if swap else (a, b)

    def __matmul__(self, other: "Reflection") -> "Reflection":
        """Composition ``self @ other`` means apply ``other`` first."""
        probe = (0.1, 0.3)
        target = self.apply_points(*other.apply_points(*probe))
        for g in Reflection:
            if np.allclose(g.apply_points(*probe), target):
                return g
        raise AssertionError("group is not closed")  # pragma: no cover


GAMMA = tuple(Reflection)


def _left(fn, c, a):
    # left limit in the distribution argument
    return fn(c, np.nextafter(a, -np.inf))


def _conditional(fn, flip_c, flip_a):
    if fn is None:
        return None

    def out(c, a):
        c, a = _arr(c, a)
        cc = 1.0 - c if flip_c else c
        if flip_a:
            val = 1.0 - _left(fn, cc, 1.0 - a)
        else:
            val = fn(cc, a)
        return np.clip(val, 0.0, 1.0)

    return out


def reflect(C: CopulaModel, g: Reflection) -> CopulaModel:
    """Copula of the transformed random vector (lazy wrapper over ``C``)."""
    if g is Reflection.IDENTITY:
        return C
    swap, fu, fv = g.value
    base = C.cdf

    def cdf(u, v):
        u, v = _arr(u, v)
        p, q = (v, u) if swap else (u, v)
        if fu and fv:
            return p + q - 1.0 + base(1.0 - p, 1.0 - q)
        if fu:
            return q - base(1.0 - p, q)
        if fv:
            return p - base(p, 1.0 - q)
        return base(p, q)

    density = None
    if C.density is not None:
        def density(u, v):
            u, v = _arr(u, v)
            p, q = (v, u) if swap else (u, v)
            return C.density(1.0 - p if fu else p, 1.0 - q if fv else q)

    # conditional laws written as fn(conditioning, argument)
    k1 = C.kernel
    k2 = None if C.kernel2 is None else (lambda c, a: C.kernel2(a, c))
    if not swap:
        kernel_c = _conditional(k1, fu, fv)
        kernel2_c = _conditional(k2, fv, fu)
    else:
        kernel_c = _conditional(k2, fv, fu)
        kernel2_c = _conditional(k1, fu, fv)
    kernel = kernel_c
    kernel2 = None if kernel2_c is None else (lambda u, v: kernel2_c(v, u))

    sampler = None
    if C.sampler is not None:
        def sampler(n, seed=None):
            xy = C.sampler(n, seed)
            a, b = g.apply_points(xy[:, 0], xy[:, 1])
            return np.column_stack([a, b])

    return CopulaModel(
        family=f"{g.name.lower()}({C.family})", params=C.params, cdf=cdf, density=density,
        kernel=kernel, kernel2=kernel2, sampler=sampler,
        symmetric=C.symmetric and g in (Reflection.IDENTITY, Reflection.PI, Reflection.NU,
                                        Reflection.PI_NU),
        meta={"base": C, "reflection": g},
    )


def e_map(C: CopulaModel, u, v):
    """E_C(u, v) = C(u,v) + C(1-u,v) + C(u,1-v) + C(1-u,1-v) - 1."""
    u, v = _arr(u, v)
    f = C.cdf
    return f(u, v) + f(1.0 - u, v) + f(u, 1.0 - v) + f(1.0 - u, 1.0 - v) - 1.0


def ec_volume(C: CopulaModel, a, b, c, d):
    """E_C-volume of the rectangle [a, b] x [c, d]."""
    return e_map(C, b, d) - e_map(C, a, d) - e_map(C, b, c) + e_map(C, a, c)


# ---------------------------------------------------------------------------
# mixtures and the elementary copulas

def mixture(components: Sequence[CopulaModel], weights: Sequence[float], family="mixture",
            params=None, symmetric=None) -> CopulaModel:
    """Convex combination of copulas (cdf, density, kernels, sampler)."""
    comps = list(components)
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(comps),) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("mixture weights must be nonnegative and sum to one")
    keep = [i for i in range(len(comps)) if w[i] > 0]
    comps = [comps[i] for i in keep]
    w = w[keep]

    def combine(attr):
        fns = [getattr(c, attr) for c in comps]
        if any(fn is None for fn in fns):
            return None

        def out(u, v):
            u, v = _arr(u, v)
            return sum(wi * fn(u, v) for wi, fn in zip(w, fns))

        return out

    sampler = None
    if all(c.sampler is not None for c in comps):
        def sampler(n, seed=None):
            rng = make_rng(seed)
            idx = rng.choice(len(comps), size=n, p=w)
            out = np.empty((n, 2))
            for j, comp in enumerate(comps):
                sel = np.flatnonzero(idx == j)
                if sel.size:
                    out[sel] = comp.sampler(sel.size, rng)
            return out

    if symmetric is None:
        symmetric = all(c.symmetric for c in comps)
    return CopulaModel(family=family, params=tuple(params) if params is not None else tuple(w),
                       cdf=combine("cdf"), density=combine("density"), kernel=combine("kernel"),
                       kernel2=combine("kernel2"), sampler=sampler, symmetric=symmetric)


def _pi_cdf(u, v):
    u, v = _arr(u, v)
    return u * v


def _pi_density(u, v):
    u, v = _arr(u, v)
    return np.ones_like(u)


def _pi_kernel(u, v):
    u, v = _arr(u, v)
    return np.clip(v, 0.0, 1.0)


def _pi_kernel2(u, v):
    u, v = _arr(u, v)
    return np.clip(u, 0.0, 1.0)


def _pi_sampler(n, seed=None):
    return make_rng(seed).random((n, 2))


def independence() -> CopulaModel:
    """The product copula Pi."""
    return CopulaModel("independence", (), _pi_cdf, _pi_density, _pi_kernel, _pi_kernel2,
                       _pi_sampler, symmetric=True)


def _m_cdf(u, v):
    u, v = _arr(u, v)
    return np.minimum(u, v)


def _m_kernel(u, v):
    u, v = _arr(u, v)
    return (v >= u).astype(float)


def _m_kernel2(u, v):
    return _m_kernel(v, u)


def _m_sampler(n, seed=None):
    t = make_rng(seed).random(n)
    return np.column_stack([t, t])


def upper_bound() -> CopulaModel:
    """Comonotonicity copula M(u, v) = min(u, v)."""
    return CopulaModel("M", (), _m_cdf, None, _m_kernel, _m_kernel2, _m_sampler, symmetric=True)


def _w_cdf(u, v):
    u, v = _arr(u, v)
    return np.maximum(u + v - 1.0, 0.0)


def _w_kernel(u, v):
    u, v = _arr(u, v)
    return (v >= 1.0 - u).astype(float)


def _w_kernel2(u, v):
    return _w_kernel(v, u)


def _w_sampler(n, seed=None):
    t = make_rng(seed).random(n)
    return np.column_stack([t, 1.0 - t])


def lower_bound() -> CopulaModel:
    """Countermonotonicity copula W(u, v) = max(u + v - 1, 0)."""
    return CopulaModel("W", (), _w_cdf, None, _w_kernel, _w_kernel2, _w_sampler, symmetric=True)


def m_gamma() -> CopulaModel:
    """(M + W) / 2, the invariant copula generating Gini's gamma."""
    return mixture([upper_bound(), lower_bound()], [0.5, 0.5], family="M_Gamma", params=())


def v_cdf(u, v):
    u, v = _arr(u, v)
    lin = 0.5 * (u + v) - 0.25
    return np.clip(lin, np.maximum(u + v - 1.0, 0.0), np.minimum(u, v))


def _v_kernel(u, v):
    # given U = u the mass splits evenly between |1/2 - u| and 1 - |1/2 - u|
    u, v = _arr(u, v)
    lo = np.abs(0.5 - u)
    hi = 1.0 - lo
    return 0.5 * (v >= lo) + 0.5 * (v >= hi)


def _v_kernel2(u, v):
    return _v_kernel(v, u)


def _v_sampler(n, seed=None):
    rng = make_rng(seed)
    u = rng.random(n)
    upper = rng.random(n) < 0.5
    lo = np.abs(0.5 - u)
    return np.column_stack([u, np.where(upper, 1.0 - lo, lo)])


def v_copula() -> CopulaModel:
    """Invariant copula V, supported on the diamond through the edge midpoints."""
    return CopulaModel("V", (), v_cdf, None, _v_kernel, _v_kernel2, _v_sampler, symmetric=True)


# ---------------------------------------------------------------------------
# invariance, theta transform and ordering

def _grid(m, lo=0.0, hi=1.0):
    t = np.linspace(lo, hi, m)
    return np.meshgrid(t, t, indexing="ij")


def gamma_average(C: CopulaModel) -> CopulaModel:
    """Average of C over all eight group elements; always invariant."""
    return mixture([reflect(C, g) for g in GAMMA], [1.0 / 8.0] * 8,
                   family=f"gamma_average({C.family})", params=C.params, symmetric=True)


def is_symmetric(C: CopulaModel, m: int = 64, tol: float = 1e-12) -> bool:
    uu, vv = _grid(m)
    return bool(np.max(np.abs(C.cdf(uu, vv) - C.cdf(vv, uu))) <= tol)


def invariance_defect(C: CopulaModel, m: int = 100) -> float:
    """max over group elements and an m x m grid of |g(C) - C|."""
    uu, vv = _grid(m)
    base = C.cdf(uu, vv)
    return max(float(np.max(np.abs(reflect(C, g).cdf(uu, vv) - base))) for g in GAMMA)


def is_invariant(C: CopulaModel, m: int = 100, tol: float = 1e-12) -> bool:
    return invariance_defect(C, m) <= tol


_QUADRANTS = ((0, 0, Reflection.IDENTITY), (1, 0, Reflection.NU1),
              (0, 1, Reflection.NU2), (1, 1, Reflection.NU))


def theta_transform(C: CopulaModel, tol: float = 1e-12, m: int = 64) -> CopulaModel:
    """Place C on [0,1/2]^2 and mirror it across u = 1/2 and v = 1/2.

    The result is the invariant copula whose mass on each quarter square is
    1/4 and equals the scaled reflection of C there; its cdf accumulates the
    masses of all quarters lying below-left of (u, v).
    """
    if not is_symmetric(C, m, tol):
        raise NotSymmetric(f"{C.family} is not symmetric within {tol}")
    pieces = [(i, j, reflect(C, g)) for i, j, g in _QUADRANTS]

    def cdf(u, v):
        u, v = _arr(u, v)
        return sum(0.25 * D.cdf(np.clip(2 * u - i, 0.0, 1.0), np.clip(2 * v - j, 0.0, 1.0))
                   for i, j, D in pieces)

    def _quadrant_kernel(attr):
        if any(getattr(D, attr) is None for _, _, D in pieces):
            return None

        def out(u, v):
            # conditional law given the first argument (after optional swap)
            u, v = _arr(u, v)
            col = (u > 0.5).astype(int)
            acc = np.zeros_like(u)
            for i, j, D in pieces:
                sel = col == i
                val = getattr(D, attr)(np.clip(2 * u - i, 0.0, 1.0), np.clip(2 * v - j, 0.0, 1.0))
                acc += np.where(sel, 0.5 * val, 0.0)
            return acc

        return out

    kernel = _quadrant_kernel("kernel")
    kernel2 = None
    if all(D.kernel2 is not None for _, _, D in pieces):
        def kernel2(u, v):
            u, v = _arr(u, v)
            row = (v > 0.5).astype(int)
            acc = np.zeros_like(u)
            for i, j, D in pieces:
                val = D.kernel2(np.clip(2 * u - i, 0.0, 1.0), np.clip(2 * v - j, 0.0, 1.0))
                acc += np.where(row == j, 0.5 * val, 0.0)
            return acc

    density = None
    if all(D.density is not None for _, _, D in pieces):
        def density(u, v):
            u, v = _arr(u, v)
            i = (u > 0.5).astype(int)
            j = (v > 0.5).astype(int)
            acc = np.zeros_like(u)
            for qi, qj, D in pieces:
                sel = (i == qi) & (j == qj)
                acc += np.where(sel, D.density(np.clip(2 * u - qi, 0, 1), np.clip(2 * v - qj, 0, 1)),
                                0.0)
            return acc

    sampler = None
    if C.sampler is not None:
        def sampler(n, seed=None):
            rng = make_rng(seed)
            xy = C.sampler(n, rng)
            q = rng.integers(0, 4, size=n)
            out = np.empty((n, 2))
            for k, (i, j, g) in enumerate(_QUADRANTS):
                sel = q == k
                a, b = g.apply_points(xy[sel, 0], xy[sel, 1])
                out[sel, 0] = 0.5 * (a + i)
                out[sel, 1] = 0.5 * (b + j)
            return out

    return CopulaModel(f"theta({C.family})", C.params, cdf, density, kernel, kernel2, sampler,
                       symmetric=True, meta={"theta_of": C})


def theta_inverse(A: CopulaModel) -> CopulaModel:
    """Symmetric copula 4 A(u/2, v/2) recovered from an invariant A."""

    def cdf(u, v):
        u, v = _arr(u, v)
        return 4.0 * A.cdf(0.5 * u, 0.5 * v)

    kernel = None if A.kernel is None else (lambda u, v: 2.0 * A.kernel(0.5 * np.asarray(u),
                                                                          0.5 * np.asarray(v)))
    kernel2 = None if A.kernel2 is None else (lambda u, v: 2.0 * A.kernel2(0.5 * np.asarray(u),
                                                                             0.5 * np.asarray(v)))
    return CopulaModel(f"theta_inv({A.family})", A.params, cdf, kernel=kernel, kernel2=kernel2,
                       symmetric=True)


def precede(A: CopulaModel, B: CopulaModel, m: int = 200, tol: float = 1e-12,
            invariance_tol: float = 1e-9) -> bool:
    """A precedes B iff A <= B on [0, 1/2]^2 (both must be invariant)."""
    for X in (A, B):
        if not is_invariant(X, 64, invariance_tol):
            raise NotInvariant(f"{X.family} is not invariant")
    uu, vv = _grid(m, 0.0, 0.5)
    return bool(np.all(A.cdf(uu, vv) <= B.cdf(uu, vv) + tol))


def with_family(C: CopulaModel, family: str, params=None) -> CopulaModel:
    return replace(C, family=family, params=C.params if params is None else tuple(params))
