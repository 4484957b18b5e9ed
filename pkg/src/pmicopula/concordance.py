"""Measures of concordance induced by invariant copulas.

The doubly stochastic measure of an invariant copula A is represented by a
:class:`MeasureDescriptor`: a finite list of uniform square panels (density
parts) and uniform line segments (singular parts), each carrying a
Gauss-Legendre rule.  Integrals ``[C, A] = int C dmu_A`` are then plain
weighted sums.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _kernels
from .core import (CopulaModel, e_map, independence, is_invariant, m_gamma, mixture, precede,
                   v_copula)
from .errors import NotInvariant, OrderViolated, QuadratureFailure

PANEL_NODES = 64
SEGMENT_NODES = 256


@lru_cache(maxsize=None)
def _gl01(m):
    x, w = leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def _triangle_rule(m):
    # Duffy collapse of the unit square onto the reference triangle
    # (0,0), (1,0), (1,1): x = s, y = s t, jacobian s
    s, ws = _gl01(m)
    ss, tt = np.meshgrid(s, s, indexing="ij")
    w = np.outer(ws, ws) * ss
    return ss.ravel(), (ss * tt).ravel(), w.ravel()


def _triangle_nodes(p0, p1, p2, m):
    s, st, w = _triangle_rule(m)
    p0, p1, p2 = (np.asarray(p, float) for p in (p0, p1, p2))
    pts = p0 + np.outer(s - st, p1 - p0) + np.outer(st, p2 - p0)
    area = 0.5 * abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    return pts[:, 0], pts[:, 1], w * 2.0 * area


@dataclass(frozen=True)
class Panel:
    """Uniform mass ``weight`` on the square [x0, x1] x [y0, y1]."""

    x0: float
    x1: float
    y0: float
    y1: float
    weight: float
    kind: str = field(default="panel", init=False)

    def nodes(self, m=PANEL_NODES):
        # split along both diagonals so kinks on those lines fall on edges
        cx, cy = 0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)
        corners = [(self.x0, self.y0), (self.x1, self.y0), (self.x1, self.y1), (self.x0, self.y1)]
        xs, ys, ws = [], [], []
        for k in range(4):
            x, y, w = _triangle_nodes((cx, cy), corners[k], corners[(k + 1) % 4], m)
            xs.append(x)
            ys.append(y)
            ws.append(w)
        area = (self.x1 - self.x0) * (self.y1 - self.y0)
        return np.concatenate(xs), np.concatenate(ys), np.concatenate(ws) * self.weight / area

    def rectangle_mass(self, a, b, c, d):
        ox = np.clip(np.minimum(b, self.x1) - np.maximum(a, self.x0), 0.0, None)
        oy = np.clip(np.minimum(d, self.y1) - np.maximum(c, self.y0), 0.0, None)
        return self.weight * ox * oy / ((self.x1 - self.x0) * (self.y1 - self.y0))

    def restrict(self, a, b, c, d):
        x0, x1 = max(a, self.x0), min(b, self.x1)
        y0, y1 = max(c, self.y0), min(d, self.y1)
        if x1 <= x0 or y1 <= y0:
            return None
        return Panel(x0, x1, y0, y1, float(self.rectangle_mass(a, b, c, d)))


@dataclass(frozen=True)
class Segment:
    """Uniform mass ``weight`` on the segment from p0 to p1."""

    p0: tuple
    p1: tuple
    weight: float
    kind: str = field(default="segment", init=False)

    def nodes(self, m=SEGMENT_NODES):
        # four sub-segments so kinks at 1/4, 1/2, 3/4 of the way are edges
        k = max(m // 4, 1)
        s, w = _gl01(k)
        t = np.concatenate([(j + s) / 4.0 for j in range(4)])
        wt = np.concatenate([w / 4.0] * 4)
        x = self.p0[0] + t * (self.p1[0] - self.p0[0])
        y = self.p0[1] + t * (self.p1[1] - self.p0[1])
        return x, y, wt * self.weight

    def _t_range(self, a, b, c, d):
        lo = np.zeros(np.broadcast(a, b, c, d).shape)
        hi = np.ones_like(lo)
        for p, q, l, h in ((self.p0[0], self.p1[0], a, b), (self.p0[1], self.p1[1], c, d)):
            dq = q - p
            if dq == 0.0:
                inside = (p >= l) & (p <= h)
                hi = np.where(inside, hi, -1.0)
            else:
                t1, t2 = (l - p) / dq, (h - p) / dq
                lo = np.maximum(lo, np.minimum(t1, t2))
                hi = np.minimum(hi, np.maximum(t1, t2))
        return lo, hi

    def rectangle_mass(self, a, b, c, d):
        lo, hi = self._t_range(*(np.asarray(z, float) for z in (a, b, c, d)))
        return self.weight * np.clip(hi - lo, 0.0, None)

    def restrict(self, a, b, c, d):
        lo, hi = (float(z) for z in self._t_range(a, b, c, d))
        if hi <= lo:
            return None
        p = lambda t: (self.p0[0] + t * (self.p1[0] - self.p0[0]),
                       self.p0[1] + t * (self.p1[1] - self.p0[1]))
        return Segment(p(lo), p(hi), self.weight * (hi - lo))


@dataclass(frozen=True)
class Atom:
    """Point mass ``weight`` at (x, y)."""

    x: float
    y: float
    weight: float
    kind: str = field(default="atom", init=False)

    def nodes(self, m=None):
        return np.array([self.x]), np.array([self.y]), np.array([self.weight])

    def rectangle_mass(self, a, b, c, d):
        inside = (a <= self.x) & (self.x <= b) & (c <= self.y) & (self.y <= d)
        return self.weight * np.asarray(inside, float)

    def restrict(self, a, b, c, d):
        return self if bool(self.rectangle_mass(a, b, c, d)) else None


@dataclass(frozen=True)
class MeasureDescriptor:
    """Quadrature representation of a (sub-)probability measure on [0, 1]^2."""

    name: str
    components: tuple

    @property
    def total_mass(self) -> float:
        return float(sum(c.weight for c in self.components))

    def nodes(self, panel_nodes=PANEL_NODES, segment_nodes=SEGMENT_NODES):
        """Concatenated quadrature nodes ``(x, y, w)`` of all components."""
        return _cached_nodes(self, panel_nodes, segment_nodes)

    def rectangle_mass(self, a, b, c, d):
        return sum(comp.rectangle_mass(a, b, c, d) for comp in self.components)

    def restrict(self, a=0.0, b=0.5, c=0.0, d=0.5) -> "MeasureDescriptor":
        """The measure restricted to [a, b] x [c, d] (not renormalised)."""
        parts = [comp.restrict(a, b, c, d) for comp in self.components]
        return MeasureDescriptor(f"{self.name}|[{a},{b}]x[{c},{d}]",
                                 tuple(p for p in parts if p is not None))

    def integrate(self, fn: Callable, panel_nodes=PANEL_NODES, segment_nodes=SEGMENT_NODES):
        x, y, w = self.nodes(panel_nodes, segment_nodes)
        return float(np.dot(w, fn(x, y)))


@lru_cache(maxsize=64)
def _cached_nodes(desc, pn, sn):
    xs, ys, ws = [], [], []
    for comp in desc.components:
        x, y, w = comp.nodes(pn if comp.kind == "panel" else sn)
        xs.append(x)
        ys.append(y)
        ws.append(w)
    out = tuple(np.concatenate(z) for z in (xs, ys, ws))
    for z in out:
        z.setflags(write=False)
    return out


def mix_descriptors(descs, weights, name="mixture") -> MeasureDescriptor:
    comps = []
    for d, wt in zip(descs, weights):
        if wt == 0:
            continue
        for comp in d.components:
            kw = {k: getattr(comp, k) for k in comp.__dataclass_fields__ if k != "kind"}
            kw["weight"] = comp.weight * wt
            comps.append(type(comp)(**kw))
    return MeasureDescriptor(name, tuple(comps))


def descriptor_pi() -> MeasureDescriptor:
    """Uniform measure, as four quarter-square panels."""
    return MeasureDescriptor("Pi", tuple(Panel(i / 2, (i + 1) / 2, j / 2, (j + 1) / 2, 0.25)
                                         for i in range(2) for j in range(2)))


def descriptor_m() -> MeasureDescriptor:
    return MeasureDescriptor("M", (Segment((0.0, 0.0), (1.0, 1.0), 1.0),))


def descriptor_w() -> MeasureDescriptor:
    return MeasureDescriptor("W", (Segment((0.0, 1.0), (1.0, 0.0), 1.0),))


def descriptor_mgamma() -> MeasureDescriptor:
    """Both diagonals, mass 1/2 each."""
    return MeasureDescriptor("M_Gamma", (Segment((0.0, 0.0), (1.0, 1.0), 0.5),
                                         Segment((0.0, 1.0), (1.0, 0.0), 0.5)))


def descriptor_v() -> MeasureDescriptor:
    """Four edges of the diamond through the edge midpoints, mass 1/4 each."""
    pts = [(0.5, 0.0), (1.0, 0.5), (0.5, 1.0), (0.0, 0.5)]
    return MeasureDescriptor("V", tuple(Segment(pts[k], pts[(k + 1) % 4], 0.25)
                                        for k in range(4)))


# ---------------------------------------------------------------------------
# biconvex form

def biconvex(C: CopulaModel, D: MeasureDescriptor, tol: float = 1e-6) -> float:
    """[C, D] = int C dmu_D by the descriptor's quadrature.

    The rule with half the nodes serves as an error estimate.  If the two
    disagree by more than ``tol`` the node counts are doubled (up to four
    times); persistent disagreement raises :class:`QuadratureFailure`.
    """
    pn, sn = PANEL_NODES, SEGMENT_NODES
    prev = D.integrate(C.cdf, pn // 2, sn // 2)
    for _ in range(_MAX_REFINE):
        fine = D.integrate(C.cdf, pn, sn)
        if tol is None or (np.isfinite(fine) and abs(fine - prev) <= tol):
            return fine
        prev = fine
        pn, sn = pn * 2, sn * 2
    raise QuadratureFailure(f"[{C.family}, {D.name}] did not settle within {tol}")


_MAX_REFINE = 4


def e_integral(C: CopulaModel, D: MeasureDescriptor) -> float:
    """int E_C dmu_D."""
    return D.integrate(lambda u, v: e_map(C, u, v))


# ---------------------------------------------------------------------------
# cell averages of the generating copulas

def _m_antideriv(x, y):
    lo, hi = np.minimum(x, y), np.maximum(x, y)
    return lo * lo * hi / 2.0 - lo ** 3 / 6.0


def m_rect_integral(a, b, c, d):
    """Exact integral of min(u, v) over [a, b] x [c, d]."""
    G = _m_antideriv
    return G(b, d) - G(a, d) - G(b, c) + G(a, c)


def w_rect_integral(a, b, c, d):
    """Exact integral of max(u + v - 1, 0) over [a, b] x [c, d]."""
    return 0.5 * (b * b - a * a) * (d - c) - m_rect_integral(a, b, 1.0 - d, 1.0 - c)


def pi_rect_integral(a, b, c, d):
    return 0.25 * (b * b - a * a) * (d * d - c * c)


def v_rect_integral(a, b, c, d):
    a, b, c, d = np.broadcast_arrays(*(np.asarray(z, float) for z in (a, b, c, d)))
    return _kernels.v_rect_integrals(a, b, c, d).reshape(a.shape)


def _averaging(integral):
    def avg(a, b, c, d):
        a, b, c, d = (np.asarray(z, float) for z in (a, b, c, d))
        return integral(a, b, c, d) / ((b - a) * (d - c))

    return avg


# ---------------------------------------------------------------------------
# concordance specs

@dataclass(frozen=True)
class ConcordanceSpec:
    """An invariant copula A with its measure, normaliser and cell averages."""

    tag: str
    A: CopulaModel
    alpha: float
    measure: MeasureDescriptor
    cell_average: Callable
    weights: tuple = ()

    def kappa(self, C: CopulaModel) -> float:
        return kappa(C, self)


def _diag_integral(A: CopulaModel) -> float:
    # [M, A] = int_0^1 A(t, t) dt by symmetry of the biconvex form
    x, _, w = descriptor_m().nodes()
    return float(np.dot(w, A.cdf(x, x)))


def alpha(A: Union[CopulaModel, ConcordanceSpec], check: bool = True) -> float:
    """Normaliser 1 / ([M, A] - 1/4) of an invariant copula."""
    if isinstance(A, ConcordanceSpec):
        A = A.A
    if check and not is_invariant(A, 64, 1e-9):
        raise NotInvariant(f"{A.family} is not invariant")
    return 1.0 / (_diag_integral(A) - 0.25)


@lru_cache(maxsize=None)
def spec_pi() -> ConcordanceSpec:
    """Spearman's rho."""
    A = independence()
    return ConcordanceSpec("Pi", A, alpha(A), descriptor_pi(), _averaging(pi_rect_integral))


@lru_cache(maxsize=None)
def spec_mgamma() -> ConcordanceSpec:
    """Gini's gamma."""
    A = m_gamma()
    integ = lambda a, b, c, d: 0.5 * (m_rect_integral(a, b, c, d) + w_rect_integral(a, b, c, d))
    return ConcordanceSpec("M_Gamma", A, alpha(A), descriptor_mgamma(), _averaging(integ))


@lru_cache(maxsize=None)
def spec_v() -> ConcordanceSpec:
    A = v_copula()
    return ConcordanceSpec("V", A, alpha(A), descriptor_v(), _averaging(v_rect_integral))


@lru_cache(maxsize=None)
def spec_interp(a: float) -> ConcordanceSpec:
    """A_a = (1 - a) Pi + a M_Gamma."""
    a = float(a)
    if not 0.0 <= a <= 1.0:
        raise ValueError("mixing weight must lie in [0, 1]")
    p, g = spec_pi(), spec_mgamma()
    A = mixture([p.A, g.A], [1 - a, a], family=f"A_{a:g}", params=(a,), symmetric=True)
    meas = mix_descriptors([p.measure, g.measure], [1 - a, a], name=f"A_{a:g}")

    def cell(x0, x1, y0, y1):
        return (1 - a) * p.cell_average(x0, x1, y0, y1) + a * g.cell_average(x0, x1, y0, y1)

    return ConcordanceSpec(f"A_{a:g}", A, alpha(A), meas, cell, weights=(1 - a, a))


SPECS = {"Pi": spec_pi, "M_Gamma": spec_mgamma, "V": spec_v}


def get_spec(tag) -> ConcordanceSpec:
    if isinstance(tag, ConcordanceSpec):
        return tag
    aliases = {"pi": "Pi", "rho": "Pi", "mgamma": "M_Gamma", "m_gamma": "M_Gamma",
               "gamma": "M_Gamma", "v": "V", "kappav": "V"}
    key = aliases.get(str(tag).lower(), tag)
    if key in SPECS:
        return SPECS[key]()
    raise KeyError(f"unknown concordance spec {tag!r}")


def kappa(C: CopulaModel, spec: ConcordanceSpec, tol: float = 1e-6) -> float:
    """kappa_A(C) = alpha(A) ([C, A] - 1/4)."""
    return spec.alpha * (biconvex(C, spec.measure, tol) - 0.25)


def kappa_interpolated(C: CopulaModel, a: float, both: bool = False):
    """kappa of the mixture A_a; with ``both`` also the weighted-mean path."""
    direct = kappa(C, spec_interp(a))
    if not both:
        return direct
    rho, gam = kappa(C, spec_pi()), kappa(C, spec_mgamma())
    weighted = 2 * (1 - a) / (2 + a) * rho + 3 * a / (2 + a) * gam
    return direct, weighted


def comparison_slack(C: CopulaModel, A: ConcordanceSpec, B: ConcordanceSpec) -> float:
    """alpha(A) kappa_B(C) - alpha(B) kappa_A(C); nonnegative for PMI C when A precedes B."""
    if not precede(A.A, B.A):
        raise OrderViolated(f"{A.tag} does not precede {B.tag}")
    return A.alpha * kappa(C, B) - B.alpha * kappa(C, A)


# standard test pairs (A, B) with A preceding B
PAIRS = {"T1": ("Pi", "M_Gamma"), "T2": ("V", "Pi"), "T3": ("V", "M_Gamma")}


def pair_specs(pair: str):
    a, b = PAIRS[pair]
    return get_spec(a), get_spec(b)
