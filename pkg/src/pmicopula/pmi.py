"""Grid checkers for positive/negative measure inducing copulas and PQD."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import CopulaModel, e_map
from .errors import NoDensity, NoKernel

log = logging.getLogger(__name__)

DEFAULT_GRID = 200
MAX_VIOLATIONS = 25


@dataclass
class PmiReport:
    criterion: str
    grid_size: int
    direction: str
    passed: bool
    min_slack: float
    tol: float
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _default_tol(C: CopulaModel, tol):
    if tol is not None:
        return float(tol)
    return 1e-7 if C.meta.get("quadrature") else 1e-9


def _sign(direction: str) -> float:
    d = direction.upper()
    if d not in ("PMI", "NMI"):
        raise ValueError(f"direction must be PMI or NMI, got {direction!r}")
    return 1.0 if d == "PMI" else -1.0


def _midpoints(m, hi=0.5):
    return (np.arange(m) + 0.5) * hi / m


def _report(criterion, m, direction, slack, tol, locate):
    slack = np.asarray(slack, float)
    flat = slack.ravel()
    min_slack = float(flat.min()) if flat.size else 0.0
    bad = np.flatnonzero(flat < -tol)
    bad = bad[np.argsort(flat[bad])][:MAX_VIOLATIONS]
    violations = [dict(locate(np.unravel_index(k, slack.shape)), slack=float(flat[k]))
                  for k in bad]
    return PmiReport(criterion, int(m), direction.upper(), bool(min_slack >= -tol), min_slack,
                     tol, violations)


def check_pmi_volume(C: CopulaModel, m: int = DEFAULT_GRID, tol: Optional[float] = None,
                     direction: str = "PMI") -> PmiReport:
    """E_C-volumes of all cells of an m x m grid on [0, 1/2]^2 must be >= -tol."""
    if m < 4:
        raise ValueError("grid size must be at least 4")
    tol = _default_tol(C, tol)
    t = np.linspace(0.0, 0.5, m + 1)
    uu, vv = np.meshgrid(t, t, indexing="ij")
    E = e_map(C, uu, vv)
    vol = np.diff(np.diff(E, axis=0), axis=1) * _sign(direction)

    def locate(idx):
        i, j = idx
        return {"rect": [float(t[i]), float(t[i + 1]), float(t[j]), float(t[j + 1])]}

    return _report("volume", m, direction, vol, tol, locate)


def kernel_combination(C: CopulaModel, u, v):
    """K(u,v) - K(1-u,v) + K(u,1-v) - K(1-u,1-v) with K the Markov kernel of C."""
    if C.kernel is None:
        raise NoKernel(f"{C.family} has no Markov kernel")
    K = C.kernel
    return K(u, v) - K(1.0 - u, v) + K(u, 1.0 - v) - K(1.0 - u, 1.0 - v)


def check_pmi_kernel(C: CopulaModel, m: int = DEFAULT_GRID, tol: Optional[float] = None,
                     direction: str = "PMI", u_values: Optional[Sequence[float]] = None,
                     v_values: Optional[Sequence[float]] = None) -> PmiReport:
    """For each u in (0, 1/2) the kernel combination must be monotone in v.

    By default u runs over the m cell midpoints of (0, 1/2) and v over the
    interior cell edges, so that no grid point coincides with an atom of
    the kernel sitting at v = u or v = 1 - u up to rounding.  Explicit
    ``u_values`` / ``v_values`` override the grids.
    """
    if C.kernel is None:
        raise NoKernel(f"{C.family} has no Markov kernel")
    tol = _default_tol(C, tol)
    us = _midpoints(m) if u_values is None else np.asarray(u_values, float)
    if v_values is None:
        vs = np.arange(1, m) * 0.5 / m
    else:
        vs = np.sort(np.asarray(v_values, float))
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    G = kernel_combination(C, uu, vv)
    slack = np.diff(G, axis=1) * _sign(direction)

    def locate(idx):
        i, j = idx
        return {"u": float(us[i]), "v1": float(vs[j]), "v2": float(vs[j + 1])}

    return _report("kernel", m if u_values is None else len(us), direction, slack, tol, locate)


def check_pmi_density(C: CopulaModel, m: int = DEFAULT_GRID, tol: Optional[float] = None,
                      direction: str = "PMI") -> PmiReport:
    """c(u,v) - c(1-u,v) - c(u,1-v) + c(1-u,1-v) >= -tol at cell midpoints of (0,1/2)^2."""
    if C.density is None:
        raise NoDensity(f"{C.family} has no density")
    tol = _default_tol(C, tol)
    t = _midpoints(m)
    uu, vv = np.meshgrid(t, t, indexing="ij")
    c = C.density
    val = (c(uu, vv) - c(1 - uu, vv) - c(uu, 1 - vv) + c(1 - uu, 1 - vv)) * _sign(direction)

    def locate(idx):
        i, j = idx
        return {"point": [float(t[i]), float(t[j])]}

    return _report("density", m, direction, val, tol, locate)


def check_pqd(C: CopulaModel, m: int = DEFAULT_GRID, tol: Optional[float] = None,
              direction: str = "PMI") -> PmiReport:
    """C >= Pi - tol on the cell midpoints of an m x m grid of (0, 1)^2.

    With ``direction='NMI'`` the negative quadrant dependence C <= Pi is
    checked instead.
    """
    if m < 2:
        raise ValueError("grid size must be at least 2")
    tol = _default_tol(C, tol)
    t = _midpoints(m, 1.0)
    uu, vv = np.meshgrid(t, t, indexing="ij")
    val = (C.cdf(uu, vv) - uu * vv) * _sign(direction)

    def locate(idx):
        i, j = idx
        return {"point": [float(t[i]), float(t[j])]}

    return _report("pqd", m, direction, val, tol, locate)


CHECKERS = {
    "volume": check_pmi_volume,
    "kernel": check_pmi_kernel,
    "density": check_pmi_density,
    "pqd": check_pqd,
}


def check_all(C: CopulaModel, m: int = DEFAULT_GRID, tol: Optional[float] = None,
              direction: str = "PMI", pqd: bool = True) -> dict:
    """Run every applicable criterion; verdicts are kept separate."""
    out = {"volume": check_pmi_volume(C, m, tol, direction)}
    if C.kernel is not None:
        out["kernel"] = check_pmi_kernel(C, m, tol, direction)
    if C.density is not None:
        out["density"] = check_pmi_density(C, m, tol, direction)
    if pqd:
        out["pqd"] = check_pqd(C, m, tol, direction)
    return out


def probe_archimedean_conjecture(models: Sequence[CopulaModel], m: int = 100) -> list:
    """Compare PQD and PMI verdicts for Archimedean copulas (diagnostic only).

    Returns one record per model; disagreements are logged at WARNING level
    but never raised.
    """
    rows = []
    for C in models:
        pqd = check_pqd(C, m).passed
        pmi = check_pmi_volume(C, m).passed
        rec = {"family": C.family, "params": list(C.params), "pqd": pqd, "pmi": pmi,
               "agree": pqd == pmi}
        if not rec["agree"]:
            log.warning("PQD/PMI disagreement for %s%s", C.family, C.params)
        rows.append(rec)
    return rows
