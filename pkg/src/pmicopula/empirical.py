"""Ranks, empirical copulas and rank estimators of concordance measures.

Two estimators are provided for every measure kappa_A: ``EC`` integrates the
empirical copula (ranks scaled by 1/(n+1)), ``ECC`` the empirical
checkerboard copula (rank cells ((R-1)/n, R/n)).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import stats

from . import _kernels
from .concordance import ConcordanceSpec, get_spec
from .core import make_rng
from .errors import TiesPresent, TooFewObservations

KINDS = ("EC", "ECC")
_EDGE = 1e-10  # guards floor/ceil against representation error at grid points


@dataclass(frozen=True)
class RankData:
    """1-based ranks of a bivariate sample; both columns are permutations."""

    n: int
    r1: np.ndarray
    r2: np.ndarray
    tie_policy: str = "none"

    @classmethod
    def from_ranks(cls, r1, r2, tie_policy="none") -> "RankData":
        r1 = np.asarray(r1, dtype=np.int64)
        r2 = np.asarray(r2, dtype=np.int64)
        n = r1.size
        expect = np.arange(1, n + 1)
        if r2.size != n or not (np.array_equal(np.sort(r1), expect)
                                and np.array_equal(np.sort(r2), expect)):
            raise ValueError("ranks must be permutations of 1..n")
        r1.setflags(write=False)
        r2.setflags(write=False)
        return cls(n, r1, r2, tie_policy)

    @cached_property
    def table(self) -> np.ndarray:
        """T[a, b] = #{i : R_i1 <= a, R_i2 <= b} for a, b in 0..n."""
        return _kernels.count_table(self.r1, self.r2, self.n)

    def flip(self) -> "RankData":
        """Ranks of (1 - U, V), the sample analogue of the partial reflection."""
        return RankData(self.n, self.n + 1 - self.r1, self.r2, self.tie_policy)

    def __hash__(self):
        return hash((self.n, self.r1.tobytes(), self.r2.tobytes()))

    def __eq__(self, other):
        return (isinstance(other, RankData) and self.n == other.n
                and np.array_equal(self.r1, other.r1) and np.array_equal(self.r2, other.r2))


def _ordinal(x):
    r = np.empty(x.size, dtype=np.int64)
    r[np.argsort(x, kind="stable")] = np.arange(1, x.size + 1)
    return r


def _tied_rows(x):
    _, inv, counts = np.unique(x, return_inverse=True, return_counts=True)
    return np.flatnonzero(counts[inv] > 1)


def ranks(sample, tie_policy: str = "error", seed=None, min_n: int = 4) -> RankData:
    """Column-wise ranks of an (n, 2) sample.

    Parameters
    ----------
    sample : array_like, shape (n, 2)
    tie_policy : {"error", "jitter"}
        ``error`` raises :class:`TiesPresent` listing the tied rows (0-based).
        ``jitter`` adds seeded uniform noise of size 1e-9 times the column
        range before ranking, which breaks ties at random.
    seed : int, optional
        Seed for the jitter stream.
    min_n : int
        Minimal number of observations.
    """
    x = np.asarray(sample, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("sample must have shape (n, 2)")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    n = x.shape[0]
    if n < min_n:
        raise TooFewObservations(f"need at least {min_n} observations, got {n}")
    if tie_policy == "error":
        rows = np.union1d(_tied_rows(x[:, 0]), _tied_rows(x[:, 1]))
        if rows.size:
            raise TiesPresent(f"{rows.size} rows are involved in ties", rows.tolist())
        applied = "none"
    elif tie_policy == "jitter":
        rng = make_rng(seed)
        span = np.ptp(x, axis=0)
        scale = 1e-9 * np.where(span > 0, span, 1.0)
        x = x + rng.random(x.shape) * scale
        applied = "jitter"
    else:
        raise ValueError(f"unknown tie policy {tie_policy!r}")
    return RankData.from_ranks(_ordinal(x[:, 0]), _ordinal(x[:, 1]), applied)


def comonotone(n: int) -> RankData:
    i = np.arange(1, n + 1)
    return RankData.from_ranks(i, i)


def antithetic(n: int) -> RankData:
    i = np.arange(1, n + 1)
    return RankData.from_ranks(i, n + 1 - i)


# ---------------------------------------------------------------------------
# empirical copulas

def _index(R: RankData, u, variant):
    u = np.asarray(u, float)
    n = R.n
    if variant == "n+1":
        k = np.floor((n + 1) * u + _EDGE)
    elif variant == "star-star":
        k = np.floor(n * u + _EDGE)
    elif variant == "star":
        k = np.ceil(n * u - _EDGE)
    else:
        raise ValueError(f"unknown empirical copula variant {variant!r}")
    return np.clip(k, 0, n).astype(np.int64)


def emp_copula(R: RankData, u, v, variant: str = "n+1"):
    """Empirical copula C_n (``n+1``), C_n* (``star``) or C_n** (``star-star``)."""
    return R.table[_index(R, u, variant), _index(R, v, variant)] / R.n


def checkerboard(R: RankData, u, v):
    """Empirical checkerboard copula: density n on every rank cell."""
    n = R.n
    T = R.table
    x = np.clip(np.asarray(u, float), 0.0, 1.0) * n
    y = np.clip(np.asarray(v, float), 0.0, 1.0) * n
    a = np.clip(np.floor(x).astype(np.int64), 0, n - 1)
    b = np.clip(np.floor(y).astype(np.int64), 0, n - 1)
    fa, fb = x - a, y - b
    out = ((1 - fa) * (1 - fb) * T[a, b] + fa * (1 - fb) * T[a + 1, b]
           + (1 - fa) * fb * T[a, b + 1] + fa * fb * T[a + 1, b + 1])
    return out / n


def estimator_copula(R: RankData, kind: str):
    """The copula estimator underlying ``kind`` as a function of (u, v)."""
    if kind == "EC":
        return lambda u, v: emp_copula(R, u, v)
    if kind == "ECC":
        return lambda u, v: checkerboard(R, u, v)
    raise ValueError(f"unknown estimator kind {kind!r}")


def sup_distance(R: RankData, f, g) -> float:
    """sup |f - g| for piecewise-constant/bilinear functions of the ranks.

    Evaluated at all jump points k/n and k/(n+1) together with their left
    and right neighbours, which attains the supremum for the empirical
    copula variants and the checkerboard copula.
    """
    n = R.n
    b = np.unique(np.concatenate([np.arange(n + 1) / n, np.arange(n + 2) / (n + 1)]))
    pts = np.unique(np.clip(np.concatenate([b, b - 1e-12, b + 1e-12]), 0.0, 1.0))
    uu, vv = np.meshgrid(pts, pts, indexing="ij")
    return float(np.max(np.abs(f(uu, vv) - g(uu, vv))))


# ---------------------------------------------------------------------------
# biconvex forms and normalisers

def _check_n(n, kind):
    need = 4 if kind == "EC" else 2
    if n < need:
        raise TooFewObservations(f"{kind} estimators need n >= {need}, got {n}")


def biconvex_ec(R: RankData, spec: ConcordanceSpec) -> float:
    """[C_n, A] = (1/n) sum_i A(R_i1/(n+1), R_i2/(n+1))."""
    spec = get_spec(spec)
    s = R.n + 1.0
    return float(np.mean(spec.A.cdf(R.r1 / s, R.r2 / s)))


def biconvex_ecc(R: RankData, spec: ConcordanceSpec) -> float:
    """[C^_n, A] = (1/n) sum_i n^2 int_{rank cell i} A."""
    spec = get_spec(spec)
    n = float(R.n)
    a, c = (R.r1 - 1) / n, (R.r2 - 1) / n
    return float(np.mean(spec.cell_average(a, R.r1 / n, c, R.r2 / n)))


def _alpha_from_diag(value):
    return 1.0 / (value - 0.25)


def alpha_n(spec, n: int) -> float:
    """1 / ([M_n, A] - 1/4) for the empirical copula of a comonotone sample."""
    spec = get_spec(spec)
    _check_n(n, "EC")
    i = np.arange(1, n + 1) / (n + 1.0)
    return _alpha_from_diag(float(np.mean(spec.A.cdf(i, i))))


def alpha_hat_n(spec, n: int) -> float:
    """1 / ([M^_n, A] - 1/4) for the checkerboard copula of a comonotone sample."""
    spec = get_spec(spec)
    _check_n(n, "ECC")
    i = np.arange(1, n + 1, dtype=float)
    val = float(np.mean(spec.cell_average((i - 1) / n, i / n, (i - 1) / n, i / n)))
    if val <= 0.25:
        raise TooFewObservations(f"normaliser undefined for n = {n}")
    return _alpha_from_diag(val)


def alpha_n_closed(tag: str, n: int, kind: str = "EC") -> float:
    """Closed-form normalisers for Spearman's rho, Gini's gamma and kappa_V."""
    n = int(n)
    if tag == "Pi":
        return 12.0 * ((n + 1) ** 2 if kind == "EC" else n * n) / (n * n - 1)
    if tag == "M_Gamma":
        if kind == "EC":
            return 4.0 * n * (n + 1) / (n * n // 2)
        return 6.0 * n * n / ((n * (3 * n - 2)) // 4)
    if tag == "V" and kind == "EC":
        return 2.0 * n * (n + 1) / ((n - 1) ** 2 // 8)
    raise KeyError(f"no closed form for {tag} / {kind}")


# ---------------------------------------------------------------------------
# closed-form estimators

def spearman_rho(R: RankData) -> float:
    n = R.n
    d = (R.r1 - R.r2).astype(float)
    return 1.0 - 6.0 * float(d @ d) / (n * (n * n - 1.0))


def gini_gamma_ec(R: RankData) -> float:
    n = R.n
    s = np.abs(R.r1 + R.r2 - (n + 1)).sum() - np.abs(R.r1 - R.r2).sum()
    return float(s) / (n * n // 2)


def gini_gamma_ecc(R: RankData) -> float:
    n = R.n
    s = np.abs(R.r1 + R.r2 - (n + 1)).sum() - np.abs(R.r1 - R.r2).sum()
    corr = (np.count_nonzero(R.r1 + R.r2 == n + 1) - np.count_nonzero(R.r1 == R.r2)) / 3.0
    return 3.0 * (s + corr) / (2.0 * ((n * (3 * n - 2)) // 4))


def kappa_v_ec(R: RankData) -> float:
    n = R.n
    F = (n - 1) ** 2 // 8
    diff = np.abs(R.r1 - R.r2)
    summ = np.abs(R.r1 + R.r2 - (n + 1))
    half = (n + 1) / 2.0
    case = np.where(diff > half, diff, np.where(summ > half, (n + 1) - summ, half))
    return n * (n + 1) / (2.0 * F) - float(case.sum()) / F


_FAST = {("Pi", "EC"): spearman_rho, ("Pi", "ECC"): spearman_rho,
         ("M_Gamma", "EC"): gini_gamma_ec, ("M_Gamma", "ECC"): gini_gamma_ecc,
         ("V", "EC"): kappa_v_ec}


@dataclass(frozen=True)
class ConcordanceEstimate:
    value: float
    kind: str
    spec_tag: str
    alpha_n: float
    n: int

    def to_dict(self) -> dict:
        return {"value": self.value, "kind": self.kind, "measure": self.spec_tag,
                "alpha_n": self.alpha_n, "n": self.n}


def estimate(R: RankData, spec, kind: str = "EC", fast: bool = True) -> ConcordanceEstimate:
    """kappa_{A,n} (EC) or its checkerboard analogue (ECC).

    With ``fast`` the closed-form rank expressions are used where known;
    otherwise the generic biconvex-form path.
    """
    spec = get_spec(spec)
    kind = kind.upper()
    if kind not in KINDS:
        raise ValueError(f"estimator kind must be EC or ECC, got {kind!r}")
    _check_n(R.n, kind)
    if kind == "EC":
        an = alpha_n(spec, R.n)
    else:
        an = alpha_hat_n(spec, R.n)
    fn = _FAST.get((spec.tag, kind)) if fast else None
    if fn is not None:
        value = fn(R)
    elif kind == "EC":
        value = an * (biconvex_ec(R, spec) - 0.25)
    else:
        value = an * (biconvex_ecc(R, spec) - 0.25)
    return ConcordanceEstimate(float(value), kind, spec.tag, float(an), R.n)


def kendall_tau(R: RankData) -> float:
    """Sample Kendall's tau (descriptive only)."""
    return float(stats.kendalltau(R.r1, R.r2).statistic)


def load_csv(path, min_n: int = 4) -> np.ndarray:
    """Read two numeric columns from a comma-separated file.

    A header row is detected when its first two fields are not numeric.
    Rows with empty cells are dropped; other non-numeric cells raise
    ``ValueError`` naming the (1-based) line.
    """
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        import csv

        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            fields = [f.strip() for f in rec[:2]]
            if len(rec) < 2 or any(f == "" for f in fields):
                continue
            try:
                rows.append((float(fields[0]), float(fields[1])))
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise ValueError(f"non-numeric value on line {lineno}: {rec[:2]}") from None
    data = np.array(rows, dtype=float).reshape(-1, 2)
    if data.shape[0] < min_n:
        raise TooFewObservations(f"need at least {min_n} complete rows, got {data.shape[0]}")
    return data
