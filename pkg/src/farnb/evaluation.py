"""Cross-validation protocol, paired t-tests and win/tie/loss reporting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import betainc

from .dataset import Dataset
from .errors import ConfigError, DataError

SIGNIFICANCE = 0.05


@dataclass(frozen=True)
class FoldPlan:
    assignment: np.ndarray
    folds: int
    seed: int

    def split(self, fold: int):
        test = np.flatnonzero(self.assignment == fold)
        train = np.flatnonzero(self.assignment != fold)
        return train, test

    def __iter__(self):
        return (self.split(f) for f in range(self.folds))


def stratified_folds(d: Dataset, folds: int, seed: int = 0) -> FoldPlan:
    """Class-stratified partition of ``d`` into ``folds`` parts.

    Instances of each class are shuffled and dealt round-robin; the dealing
    position carries over from one class to the next so fold sizes stay
    within one of each other.
    """
    if folds < 2:
        raise ConfigError("need at least 2 folds")
    if folds > d.n:
        raise ConfigError(f"{folds} folds requested for {d.n} instances")
    labels = d.require_labels()
    rng = np.random.default_rng(seed)
    assignment = np.empty(d.n, dtype=np.int64)
    position = 0
    for c in range(len(d.classes)):
        idx = rng.permutation(np.flatnonzero(labels == c))
        assignment[idx] = (position + np.arange(idx.size)) % folds
        position = (position + idx.size) % folds
    return FoldPlan(assignment, folds, seed)


def run_cv(d: Dataset, method, plan: FoldPlan, return_models: bool = False):
    """Per-fold accuracies of ``method`` (anything with ``fit(Dataset)``
    returning an object with ``predict(Dataset)``)."""
    if plan.assignment.shape != (d.n,):
        raise ConfigError("fold plan does not match the dataset")
    labels = d.require_labels()
    accuracies, models = [], []
    for train, test in plan:
        model = method.fit(d.subset(train))
        predicted = np.asarray(model.predict(d.subset(test)))
        accuracies.append(float(np.mean(predicted == labels[test])))
        if return_models:
            models.append(model)
    return (accuracies, models) if return_models else accuracies


def t_upper_tail(t: float, df: int) -> float:
    """P(T >= t) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    tail = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return tail if t >= 0 else 1.0 - tail


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    verdict: str


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """One-tailed paired t-test of ``a`` against ``b`` at the 5% level.

    ``p`` is the tail probability in the direction of the observed mean
    difference, so swapping the arguments negates ``t`` and keeps ``p``.
    The verdict is from ``a``'s side: ``win``, ``loss`` or ``tie``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ConfigError(f"paired samples differ in length ({a.size} vs {b.size})")
    if a.size < 2:
        raise ConfigError("paired t-test needs at least two pairs")
    diff = a - b
    n = diff.size
    mean = float(np.mean(diff))
    sd = float(np.std(diff, ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(math.nan, 1.0, "tie")
        t = math.copysign(math.inf, mean)
    else:
        t = mean / (sd / math.sqrt(n))
    p = t_upper_tail(abs(t), n - 1)
    if p < SIGNIFICANCE and mean != 0.0:
        verdict = "win" if mean > 0 else "loss"
    else:
        verdict = "tie"
    return TTestResult(t, p, verdict)


def _fmt(x: float) -> str:
    return format(x, ".10g")


@dataclass(frozen=True)
class CVReport:
    datasets: tuple[str, ...]
    methods: tuple[str, ...]
    reference: str
    fold_accuracies: Mapping[tuple[str, str], tuple[float, ...]]
    means: Mapping[tuple[str, str], float]
    tests: Mapping[tuple[str, str], TTestResult]
    tally: Mapping[str, tuple[int, int, int]]

    def average(self, method: str) -> float:
        return float(np.mean([self.means[ds, method] for ds in self.datasets]))

    def to_text(self) -> str:
        lines = ["# farnb cross-validation report",
                 f"# reference\t{self.reference}",
                 "dataset\tmethod\tmean\tt\tp\tverdict\tfolds"]
        for ds in self.datasets:
            for method in self.methods:
                folds = ",".join(_fmt(a) for a in self.fold_accuracies[ds, method])
                if method == self.reference:
                    t, p, verdict = "-", "-", "reference"
                else:
                    r = self.tests[ds, method]
                    t, p, verdict = _fmt(r.t), _fmt(r.p), r.verdict
                lines.append(f"{ds}\t{method}\t{self.means[ds, method]:.10f}\t{t}\t{p}\t{verdict}\t{folds}")
        return "\n".join(lines) + "\n"

    def summary_text(self) -> str:
        lines = [f"# win/tie/loss of each method against {self.reference}",
                 "method\taverage\twins\tties\tlosses"]
        for method in self.methods:
            if method == self.reference:
                lines.append(f"{method}\t{self.average(method):.10f}\t-\t-\t-")
            else:
                w, t, l = self.tally[method]
                lines.append(f"{method}\t{self.average(method):.10f}\t{w}\t{t}\t{l}")
        return "\n".join(lines) + "\n"

    def gain_rows(self, against: str | None = None):
        """Per-dataset accuracy gain of the reference over ``against``.

        ``against`` defaults to the strongest other method by average accuracy.
        """
        others = [m for m in self.methods if m != self.reference]
        if not others:
            return None, []
        if against is None:
            against = max(others, key=lambda m: (self.average(m), -others.index(m)))
        rows = [(ds, self.means[ds, self.reference], self.means[ds, against],
                 self.means[ds, self.reference] - self.means[ds, against])
                for ds in self.datasets]
        return against, rows

    def gain_text(self, against: str | None = None) -> str:
        against, rows = self.gain_rows(against)
        lines = [f"dataset\t{self.reference}\t{against}\tgain"]
        lines += [f"{ds}\t{r:.10f}\t{o:.10f}\t{g:.10f}" for ds, r, o, g in rows]
        return "\n".join(lines) + "\n"


def aggregate_report(results: Mapping[str, Mapping[str, Sequence[float]]],
                     reference_method: str) -> CVReport:
    """Assemble per-dataset fold accuracies into a :class:`CVReport`.

    ``results[dataset][method]`` holds the fold accuracies; every dataset must
    cover the same methods, reference included.  Each method is tested
    against the reference on every dataset and tallied from the method's side.
    """
    datasets = tuple(results)
    if not datasets:
        raise DataError("no results to aggregate")
    methods = tuple(results[datasets[0]])
    if reference_method not in methods:
        raise ConfigError(f"reference method {reference_method!r} has no results")
    folds, means, tests = {}, {}, {}
    tally = {m: [0, 0, 0] for m in methods if m != reference_method}
    for ds in datasets:
        missing = set(methods) ^ set(results[ds])
        if missing:
            raise DataError(f"dataset {ds!r}: missing results for {sorted(missing)}")
        for method in methods:
            acc = tuple(float(a) for a in results[ds][method])
            if any(not 0.0 <= a <= 1.0 for a in acc):
                raise DataError(f"{ds}/{method}: accuracy outside [0, 1]")
            folds[ds, method] = acc
            means[ds, method] = float(np.mean(acc))
        for method in tally:
            r = paired_t_test(folds[ds, method], folds[ds, reference_method])
            tests[ds, method] = r
            tally[method][("win", "tie", "loss").index(r.verdict)] += 1
    return CVReport(datasets, methods, reference_method, folds, means, tests,
                    {m: tuple(v) for m, v in tally.items()})
