"""Multiplier bootstrap variances and the asymptotic PMI/NMI tests.

For a replicate with multipliers xi_1..xi_n the bootstrap copula process is

    B(u)  = n^{-1/2} sum_i xi_i (phi_i(u) - C^(u))
    CC(u) = B(u) - d1C^(u) B(u_1, 1) - d2C^(u) B(1, u_2)

where phi_i is the indicator of the i-th (scaled) rank point for EC and the
distribution function of the uniform law on the i-th rank cell for ECC.
Because CC is linear in xi, the integral [CC, A] equals
n^{-1/2} sum_i xi_i d_i^A with a per-observation weight d_i^A that is
computed once, so each replicate costs one dot product.  The term
int phi_i dmu_A is integrated in closed form; the derivative terms use the
quadrature nodes of mu_A.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import ndtr, ndtri

from . import _kernels
from .concordance import ConcordanceSpec, get_spec, pair_specs, PAIRS
from .core import precede
from .empirical import RankData, estimate, estimator_copula
from .errors import DegenerateVariance, OrderViolated, TooFewObservations

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class BootstrapConfig:
    """Settings of the multiplier bootstrap.

    ``bandwidth=None`` selects h = n^{-1/2} for the partial derivatives.
    ``margin_correction=False`` drops the two derivative terms of CC; this
    underestimates the variance and is kept only for comparisons.
    The multiplier stream of replicate r is derived from (seed, r), so the
    result does not depend on how replicates are scheduled.
    """

    replicates: int = 1000
    seed: int = 0
    multiplier_law: str = "standard-normal"
    bandwidth: Optional[float] = None
    estimator_kind: str = "EC"
    margin_correction: bool = True

    def __post_init__(self):
        if self.replicates < 100:
            raise ValueError("at least 100 bootstrap replicates are required")
        if self.multiplier_law != "standard-normal":
            raise ValueError("only standard-normal multipliers are supported")
        if self.estimator_kind not in ("EC", "ECC"):
            raise ValueError("estimator_kind must be EC or ECC")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    def h(self, n: int) -> float:
        return float(self.bandwidth) if self.bandwidth is not None else n ** -0.5


@dataclass(frozen=True)
class TestReport:
    pair: str
    direction: str
    statistic: float
    variance: float
    threshold: float
    p_value: float
    reject: bool
    n: int
    kappa_a: float
    kappa_b: float
    level: float
    config: BootstrapConfig = field(repr=False)

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {"pair": self.pair, "direction": self.direction, "statistic": self.statistic,
                "variance": self.variance, "threshold": self.threshold,
                "p_value": self.p_value, "reject": self.reject, "seed": self.config.seed,
                "replicates": self.config.replicates, "estimator": self.config.estimator_kind,
                "margin_correction": self.config.margin_correction,
                "n": self.n, "level": self.level, "kappa_a": self.kappa_a,
                "kappa_b": self.kappa_b}


# ---------------------------------------------------------------------------
# partial derivatives

def partials(R: RankData, u, v, h: Optional[float] = None, kind: str = "EC"):
    """Finite-difference estimates of dC/du and dC/dv from the ranks.

    The stencil [u - h, u + h] is clamped to [0, 1] and divided by its actual
    width; results are clipped to [0, 1].
    """
    h = R.n ** -0.5 if h is None else float(h)
    C = estimator_copula(R, kind)
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    lo, hi = np.maximum(u - h, 0.0), np.minimum(u + h, 1.0)
    d1 = (C(hi, v) - C(lo, v)) / (hi - lo)
    lo, hi = np.maximum(v - h, 0.0), np.minimum(v + h, 1.0)
    d2 = (C(u, hi) - C(u, lo)) / (hi - lo)
    return np.clip(d1, 0.0, 1.0), np.clip(d2, 0.0, 1.0)


# ---------------------------------------------------------------------------
# linearised bootstrap weights

def _point_weights(R: RankData, spec: ConcordanceSpec, kind: str) -> np.ndarray:
    """int phi_i dmu_A for every observation i."""
    n = R.n
    if kind == "EC":
        x, y = R.r1 / (n + 1.0), R.r2 / (n + 1.0)
        return 1.0 - x - y + spec.A.cdf(x, y)
    a0, a1 = (R.r1 - 1) / n, R.r1 / n
    b0, b1 = (R.r2 - 1) / n, R.r2 / n
    return (1.0 - 0.5 * (a0 + a1) - 0.5 * (b0 + b1)
            + spec.cell_average(a0, a1, b0, b1))


def _margin_term(r, nodes, weights, kind, n):
    """sum_k w_k (phi_i(node_k) - F(node_k)) for the marginal process."""
    if kind == "EC":
        cols = np.clip(np.floor((n + 1) * nodes + 1e-10), 0, n).astype(np.int64)
        fracs = np.zeros_like(nodes)
        marg = cols / n
    else:
        scaled = n * nodes
        cols = np.clip(np.floor(scaled), 0, n).astype(np.int64)
        fracs = scaled - cols
        marg = nodes
    full, part = _kernels.weighted_column_sums(cols, weights, fracs, n + 1)
    # suffix[c] = sum of full columns >= c
    suffix = np.cumsum(full[::-1])[::-1]
    val = suffix[r]
    if kind == "ECC":
        # the ramp of cell r contributes its fractional part in column r - 1
        val = val + part[r - 1]
    return val - float(np.dot(weights, marg))


def _point_weights_nodes(R, x, y, w, kind):
    n = R.n
    if kind == "EC":
        i1 = R.r1[:, None] / (n + 1.0) <= x[None, :]
        i2 = R.r2[:, None] / (n + 1.0) <= y[None, :]
        return (i1 & i2).astype(float) @ w
    p1 = np.clip(n * x[None, :] - (R.r1[:, None] - 1), 0.0, 1.0)
    p2 = np.clip(n * y[None, :] - (R.r2[:, None] - 1), 0.0, 1.0)
    return (p1 * p2) @ w


def influence_weights(R: RankData, spec, kind: str = "EC", h: Optional[float] = None,
                      point_term: str = "exact", margin_correction: bool = True) -> np.ndarray:
    """Per-observation weights d_i with [CC, A] = n^{-1/2} sum_i xi_i d_i.

    ``point_term='nodes'`` integrates phi_i with the quadrature rule instead
    of exactly (O(n x nodes) memory); it exists to cross-check the algebra
    against :func:`bootstrap_variance_naive`.
    """
    spec = get_spec(spec)
    n = R.n
    x, y, w = spec.measure.nodes()
    d1, d2 = partials(R, x, y, h, kind)
    if point_term == "exact":
        g = _point_weights(R, spec, kind)
    else:
        g = _point_weights_nodes(R, x, y, w, kind)
    d = g - g.mean()
    if not margin_correction:
        return d
    d -= _margin_term(R.r1, x, w * d1, kind, n)
    d -= _margin_term(R.r2, y, w * d2, kind, n)
    return d


def _multipliers(seed, r, n):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(r),))
    return np.random.default_rng(ss).standard_normal(n)


def multiplier_matrix(seed: int, replicates: int, n: int) -> np.ndarray:
    """Row r holds the multipliers of replicate r."""
    return np.stack([_multipliers(seed, r, n) for r in range(replicates)])


def _variance_of(draws):
    return float(np.var(draws, ddof=1))


def bootstrap_draws(R: RankData, A, B=None, cfg: BootstrapConfig = BootstrapConfig(),
                    point_term: str = "exact"):
    """Replicates Z^r of alpha(A) alpha(B) ([CC, A] - [CC, B]).

    With ``B=None`` the single-measure draws alpha(A) [CC, A] are returned.
    """
    A = get_spec(A)
    h = cfg.h(R.n)
    dA = influence_weights(R, A, cfg.estimator_kind, h, point_term, cfg.margin_correction)
    if B is None:
        coef = A.alpha * dA
    else:
        B = get_spec(B)
        dB = influence_weights(R, B, cfg.estimator_kind, h, point_term, cfg.margin_correction)
        coef = A.alpha * B.alpha * (dA - dB)
    xi = multiplier_matrix(cfg.seed, cfg.replicates, R.n)
    return xi @ coef / np.sqrt(R.n)


def bootstrap_variance(R: RankData, A, B=None, cfg: BootstrapConfig = BootstrapConfig()) -> float:
    """Multiplier-bootstrap estimate of the limiting variance.

    For a pair (A, B) this targets the variance of
    sqrt(n) (alpha(B) kappa_{A,n} - alpha(A) kappa_{B,n}); with ``B=None``
    that of sqrt(n) kappa_{A,n}.  Comparing a measure with itself returns 0.
    """
    A = get_spec(A)
    if B is not None and get_spec(B).tag == A.tag:
        return 0.0
    var = _variance_of(bootstrap_draws(R, A, B, cfg))
    if not var >= VARIANCE_FLOOR:
        raise DegenerateVariance(f"bootstrap variance {var:.3g} is degenerate")
    return var


def bootstrap_variance_naive(R: RankData, A, B=None,
                             cfg: BootstrapConfig = BootstrapConfig()) -> float:
    """Reference implementation evaluating CC at every quadrature node.

    Memory grows like n times the number of nodes; meant for small n.
    """
    n = R.n
    kind = cfg.estimator_kind
    h = cfg.h(n)
    xi = multiplier_matrix(cfg.seed, cfg.replicates, n)
    C = estimator_copula(R, kind)

    def ind(r, t):
        if kind == "EC":
            return (r[:, None] / (n + 1.0) <= t[None, :]).astype(float)
        return np.clip(n * t[None, :] - (r[:, None] - 1), 0.0, 1.0)

    def integral(spec):
        x, y, w = spec.measure.nodes()
        d1, d2 = partials(R, x, y, h, kind)
        if not cfg.margin_correction:
            d1, d2 = np.zeros_like(d1), np.zeros_like(d2)
        phi = ind(R.r1, x) * ind(R.r2, y)
        m1 = ind(R.r1, x)
        m2 = ind(R.r2, y)
        one = np.ones_like(x)
        BB = xi @ (phi - C(x, y)) / np.sqrt(n)
        B1 = xi @ (m1 - C(x, one)) / np.sqrt(n)
        B2 = xi @ (m2 - C(one, y)) / np.sqrt(n)
        return (BB - d1 * B1 - d2 * B2) @ w

    A = get_spec(A)
    if B is None:
        draws = A.alpha * integral(A)
    else:
        B = get_spec(B)
        draws = A.alpha * B.alpha * (integral(A) - integral(B))
    return _variance_of(draws)


# ---------------------------------------------------------------------------
# tests

@lru_cache(maxsize=None)
def _ordered(pair: str) -> bool:
    A, B = pair_specs(pair)
    return precede(A.A, B.A)


def _check_args(pairs, direction, level, n):
    for pair in pairs:
        if pair not in PAIRS:
            raise ValueError(f"pair must be one of {sorted(PAIRS)}, got {pair!r}")
        if not _ordered(pair):
            raise OrderViolated(f"pair {pair} is not ordered")
    direction = direction.upper()
    if direction not in ("PMI", "NMI"):
        raise ValueError("direction must be PMI or NMI")
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    if n < 4:
        raise TooFewObservations("the test needs n >= 4")
    return direction


def run_tests(R: RankData, pairs=("T1", "T2", "T3"), direction: str = "PMI",
              level: float = 0.05, cfg: BootstrapConfig = BootstrapConfig()) -> list:
    """Run :func:`pmi_test` for several pairs on one sample.

    Estimates, influence weights and multipliers are computed once and
    shared, so each report equals the one :func:`pmi_test` returns.
    """
    pairs = tuple(pairs)
    direction = _check_args(pairs, direction, level, R.n)
    kind = cfg.estimator_kind
    h = cfg.h(R.n)
    tags = {t for p in pairs for t in PAIRS[p]}
    est = {t: estimate(R, t, kind).value for t in tags}
    d = {t: influence_weights(R, t, kind, h, margin_correction=cfg.margin_correction)
         for t in tags}
    xi = multiplier_matrix(cfg.seed, cfg.replicates, R.n)
    threshold = float(ndtri(1.0 - level))
    out = []
    for pair in pairs:
        A, B = pair_specs(pair)
        ka, kb = est[A.tag], est[B.tag]
        draws = xi @ (A.alpha * B.alpha * (d[A.tag] - d[B.tag])) / np.sqrt(R.n)
        var = _variance_of(draws)
        if not var >= VARIANCE_FLOOR:
            raise DegenerateVariance(f"bootstrap variance {var:.3g} is degenerate")
        stat = np.sqrt(R.n) * (B.alpha * ka - A.alpha * kb) / np.sqrt(var)
        if direction == "NMI":
            stat = -stat
        out.append(TestReport(pair, direction, float(stat), var, threshold,
                              float(ndtr(-stat)), bool(stat > threshold), R.n, ka, kb,
                              float(level), cfg))
    return out


def pmi_test(R: RankData, pair: str = "T1", direction: str = "PMI", level: float = 0.05,
             cfg: BootstrapConfig = BootstrapConfig()) -> TestReport:
    """Asymptotic test of H0: alpha(A) kappa_B >= alpha(B) kappa_A (PMI).

    The statistic is sqrt(n) (alpha(B) kappa_{A,n} - alpha(A) kappa_{B,n}) / sigma
    and H0 is rejected when it exceeds the upper ``level`` normal quantile.
    For ``direction='NMI'`` the statistic changes sign.
    """
    return run_tests(R, (pair,), direction, level, cfg)[0]
