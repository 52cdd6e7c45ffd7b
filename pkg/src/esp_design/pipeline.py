"""
Running the design methods on one instance and collecting comparable records.

The relaxation is solved at most once per ``(instance, k, order)`` and shared
by RELAX, SAMPLE, GREEDY and GREEDY_FDV.  Reported wall times are cumulative
along each method's dependency chain: GREEDY includes the relaxation solve,
GREEDY_FDV includes GREEDY, UNIF_FDV includes its uniform draw.
"""
import csv
from dataclasses import asdict, dataclass, field
import io
import json
import time

import numpy as np

from .discretize import (
    MethodTag,
    fedorov_exchange,
    greedy_from_relaxation,
    sample_rounding,
    uniform_baseline,
)
from .objective import f_discrete, f_relaxed
from .relax import SolverConfig, solve_relaxation

RECORD_FIELDS = ["method", "l", "k", "n", "m", "objective", "wall_time_s", "seed", "subset"]


@dataclass
class RunRecord:
    method: MethodTag
    l: int
    k: int
    n: int
    m: int
    objective: float
    wall_time_s: float
    subset: list
    seed: int
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["method"] = MethodTag(self.method).value
        d["subset"] = [int(i) for i in self.subset]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self):
        d = self.to_dict()
        d["subset"] = " ".join(str(i) for i in d["subset"])
        d["objective"] = repr(float(d["objective"]))
        return [d[k] for k in RECORD_FIELDS]


def records_to_csv(records, path_or_buf=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_FIELDS)
    for r in records:
        w.writerow(r.csv_row())
    text = buf.getvalue()
    if path_or_buf is not None:
        with open(path_or_buf, "w", newline="") as fh:
            fh.write(text)
    return text


def _clock():
    return time.perf_counter()


def run_methods(X, k, order, methods, seed=0, cfg=None, max_sweeps=1000):
    """Run each requested method once and return one :class:`RunRecord` each.

    Parameters
    ----------
    X : np.ndarray (n, m)
    k, order : int
    methods : iterable of MethodTag or str
    seed : int
        Drives SAMPLE and the uniform draws of UNIF / UNIF_FDV.
    cfg : SolverConfig, optional
    max_sweeps : int
        Cap on Fedorov exchange sweeps.
    """
    X = np.asarray(X, dtype=float)
    n, m = X.shape
    cfg = cfg or SolverConfig(seed=seed)
    methods = [MethodTag(mt) for mt in methods]
    cache = {}

    def relaxation():
        if "relax" not in cache:
            t0 = _clock()
            rep = solve_relaxation(X, k, order, cfg)
            cache["relax"] = (rep, _clock() - t0)
        return cache["relax"]

    def greedy():
        if "greedy" not in cache:
            rep, t_rel = relaxation()
            t0 = _clock()
            S = greedy_from_relaxation(X, k, order, report=rep)
            cache["greedy"] = (S, t_rel + _clock() - t0)
        return cache["greedy"]

    def unif():
        if "unif" not in cache:
            t0 = _clock()
            S = uniform_baseline(n, k, seed, X)
            cache["unif"] = (S, _clock() - t0)
        return cache["unif"]

    records = []
    for tag in methods:
        extras = {}
        if tag is MethodTag.RELAX:
            rep, t = relaxation()
            z = rep.final_weights
            S = np.flatnonzero(z > 1e-6)
            obj = f_relaxed(X, z, order)
            extras = {
                "z_l1": float(z.sum()),
                "support_size": rep.support_size,
                "iterations": rep.iterations,
                "converged": rep.converged,
            }
        elif tag is MethodTag.SAMPLE:
            rep, t_rel = relaxation()
            t0 = _clock()
            out = sample_rounding(rep.final_weights, k, seed)
            S, t = out.subset, t_rel + _clock() - t0
            extras = {"draws": out.draws}
            obj = f_discrete(X, S, order)
        elif tag is MethodTag.GREEDY:
            S, t = greedy()
            obj = f_discrete(X, S, order)
        elif tag is MethodTag.GREEDY_FDV:
            S0, t_g = greedy()
            t0 = _clock()
            S = fedorov_exchange(X, k, order, S0, max_sweeps)
            t = t_g + _clock() - t0
            obj = f_discrete(X, S, order)
        elif tag is MethodTag.UNIF:
            S, t = unif()
            obj = f_discrete(X, S, order)
        else:
            S0, t_u = unif()
            t0 = _clock()
            S = fedorov_exchange(X, k, order, S0, max_sweeps)
            t = t_u + _clock() - t0
            obj = f_discrete(X, S, order)
        records.append(RunRecord(tag, order, k, n, m, float(obj), float(t),
                                 [int(i) for i in S], seed, extras))
    return records
