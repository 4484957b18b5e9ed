"""Desk-scale simulation studies: rejection rates and bootstrap variances.

Every repetition draws its randomness from
``SeedSequence(entropy=seed, spawn_key=(param index, n index, repetition))``,
so results do not depend on the number of workers or on the order in
which cells are processed.  Completed (param, n) cells can be journaled
to a JSON-lines file and skipped when a study is resumed.
"""
from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .concordance import PAIRS
from .core import CopulaModel, independence
from .empirical import KINDS, ranks
from .families import archimedean, fgm, frank, gaussian, gen_clayton, sample
from .inference import BootstrapConfig, run_tests

REJECTION_HEADER = ("family", "param", "n", "pair", "kind", "rate", "stderr",
                    "rejections", "repetitions")
VARIANCE_HEADER = ("family", "param", "n", "pair", "kind", "repetition", "variance")


def _frank_or_pi(delta):
    return independence() if delta == 0 else frank(delta)


def _clayton(theta):
    return independence() if theta == 0 else archimedean(gen_clayton(theta))


STUDY_FAMILIES = {
    "gaussian": gaussian,
    "frank": _frank_or_pi,
    "fgm": fgm,
    "clayton": _clayton,
    "independence": lambda _=None: independence(),
}


def build_model(family: str, param: float) -> CopulaModel:
    """One-parameter model used in studies; a zero Frank/Clayton parameter means Pi."""
    try:
        return STUDY_FAMILIES[family](param)
    except KeyError:
        raise ValueError(f"unknown study family {family!r}; "
                         f"choose from {sorted(STUDY_FAMILIES)}") from None


def _resolve_pair(p) -> str:
    if isinstance(p, str) and p in PAIRS:
        return p
    if isinstance(p, (tuple, list)) and len(p) == 2:
        a, b = p
        if a == b:
            raise ValueError(f"degenerate pair ({a}, {b}): a measure compared with itself")
        for tag, ab in PAIRS.items():
            if ab == (a, b):
                return tag
    raise ValueError(f"unknown pair {p!r}; choose from {sorted(PAIRS)}")


@dataclass(frozen=True)
class StudyConfig:
    """Grid of a simulation study.

    ``pairs`` holds test tags (``T1``..``T3``) or (A, B) measure tags;
    comparing a measure with itself is rejected.
    """

    family: str
    params: tuple
    ns: tuple
    repetitions: int = 200
    replicates: int = 1000
    level: float = 0.05
    pairs: tuple = ("T1", "T2", "T3")
    kinds: tuple = ("EC",)
    seed: int = 0
    direction: str = "PMI"
    workers: int = 1

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "params", tuple(float(p) for p in self.params))
        set_(self, "ns", tuple(int(n) for n in self.ns))
        set_(self, "pairs", tuple(_resolve_pair(p) for p in self.pairs))
        set_(self, "kinds", tuple(k.upper() for k in self.kinds))
        set_(self, "direction", self.direction.upper())
        if not (self.params and self.ns and self.pairs and self.kinds):
            raise ValueError("parameter, sample-size, pair and kind grids must be nonempty")
        if self.repetitions < 20:
            raise ValueError("at least 20 repetitions are required")
        if min(self.ns) < 4:
            raise ValueError("sample sizes must be at least 4")
        if any(k not in KINDS for k in self.kinds):
            raise ValueError(f"estimator kinds must be among {KINDS}")
        if self.direction not in ("PMI", "NMI"):
            raise ValueError("direction must be PMI or NMI")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        BootstrapConfig(replicates=self.replicates)
        for p in self.params:  # fail early on invalid parameters
            build_model(self.family, p)

    def fingerprint(self) -> str:
        d = asdict(self)
        d.pop("workers")
        return json.dumps(d, sort_keys=True)


def _rep_streams(cfg: StudyConfig, ip: int, jn: int, rep: int):
    ss = np.random.SeedSequence(entropy=int(cfg.seed), spawn_key=(ip, jn, rep))
    sample_ss, boot_ss = ss.spawn(2)
    return np.random.default_rng(sample_ss), int(boot_ss.generate_state(1, np.uint64)[0] >> 1)


def _one_rep(cfg: StudyConfig, ip: int, jn: int, rep: int, what: str) -> dict:
    rng, boot_seed = _rep_streams(cfg, ip, jn, rep)
    n = cfg.ns[jn]
    x = sample(build_model(cfg.family, cfg.params[ip]), n, rng)
    R = ranks(x, tie_policy="jitter", seed=rng)
    out = {}
    for kind in cfg.kinds:
        bc = BootstrapConfig(replicates=cfg.replicates, seed=boot_seed, estimator_kind=kind)
        for rep_ in run_tests(R, cfg.pairs, cfg.direction, cfg.level, bc):
            key = f"{rep_.pair}/{kind}"
            out[key] = rep_.reject if what == "rejection" else rep_.variance
    return out


def _run_cell(args) -> list:
    cfg, ip, jn, what = args
    return [_one_rep(cfg, ip, jn, r, what) for r in range(cfg.repetitions)]


def _cells(cfg):
    return [(ip, jn) for ip in range(len(cfg.params)) for jn in range(len(cfg.ns))]


def _load_journal(path, cfg, what) -> dict:
    done = {}
    if not path or not os.path.exists(path):
        return done
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                continue  # a partially written trailing line
            if rec.get("config") == cfg.fingerprint() and rec.get("study") == what:
                done[(rec["ip"], rec["jn"])] = rec["reps"]
    return done


def _append_journal(path, cfg, what, ip, jn, reps):
    if not path:
        return
    rec = {"study": what, "config": cfg.fingerprint(), "ip": ip, "jn": jn, "reps": reps}
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(rec) + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def _collect(cfg: StudyConfig, what: str, journal: Optional[str]) -> dict:
    results = _load_journal(journal, cfg, what)
    todo = [c for c in _cells(cfg) if c not in results]
    jobs = [(cfg, ip, jn, what) for ip, jn in todo]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers,
                                 mp_context=multiprocessing.get_context("spawn")) as ex:
            for (ip, jn), reps in zip(todo, ex.map(_run_cell, jobs)):
                results[(ip, jn)] = reps
                _append_journal(journal, cfg, what, ip, jn, reps)
    else:
        for (ip, jn), job in zip(todo, jobs):
            reps = _run_cell(job)
            results[(ip, jn)] = reps
            _append_journal(journal, cfg, what, ip, jn, reps)
    return results


def rejection_study(cfg: StudyConfig, journal: Optional[str] = None) -> list:
    """Rejection rates with binomial Monte Carlo standard errors.

    Returns one dict per (param, n, pair, kind) with the keys of
    :data:`REJECTION_HEADER`.
    """
    results = _collect(cfg, "rejection", journal)
    rows = []
    for ip, jn in _cells(cfg):
        reps = results[(ip, jn)]
        for pair in cfg.pairs:
            for kind in cfg.kinds:
                k = sum(bool(r[f"{pair}/{kind}"]) for r in reps)
                m = len(reps)
                rate = k / m
                rows.append({"family": cfg.family, "param": cfg.params[ip], "n": cfg.ns[jn],
                             "pair": pair, "kind": kind, "rate": rate,
                             "stderr": math.sqrt(rate * (1.0 - rate) / m),
                             "rejections": k, "repetitions": m})
    return rows


def variance_study(cfg: StudyConfig, journal: Optional[str] = None) -> list:
    """Bootstrap variance estimates for every repetition (long format).

    Returns one dict per cell and pair/kind with the list of estimates
    under ``variance_samples``.
    """
    results = _collect(cfg, "variance", journal)
    rows = []
    for ip, jn in _cells(cfg):
        reps = results[(ip, jn)]
        for pair in cfg.pairs:
            for kind in cfg.kinds:
                rows.append({"family": cfg.family, "param": cfg.params[ip], "n": cfg.ns[jn],
                             "pair": pair, "kind": kind,
                             "variance_samples": [float(r[f"{pair}/{kind}"]) for r in reps]})
    return rows


def variance_long(rows) -> list:
    """Flatten :func:`variance_study` rows to one record per estimate."""
    return [{"family": r["family"], "param": r["param"], "n": r["n"], "pair": r["pair"],
             "kind": r["kind"], "repetition": i, "variance": v}
            for r in rows for i, v in enumerate(r["variance_samples"])]


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def to_csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in header])
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path`` and rename it."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_study(cfg: StudyConfig, study: str, out: str, resume: bool = True) -> list:
    """Run a study, journal finished cells next to ``out`` and write the CSV."""
    journal = out + ".journal" if resume else None
    if study == "rejection":
        rows = rejection_study(cfg, journal)
        text = to_csv(rows, REJECTION_HEADER)
    elif study == "variance":
        rows = variance_study(cfg, journal)
        text = to_csv(variance_long(rows), VARIANCE_HEADER)
    else:
        raise ValueError("study must be 'rejection' or 'variance'")
    write_atomic(out, text)
    if journal and os.path.exists(journal):
        os.unlink(journal)
    return rows
