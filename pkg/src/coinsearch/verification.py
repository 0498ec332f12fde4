"""Ground truth for the search: exhaustive sweeps, exact means, Monte Carlo.

Monte Carlo placements come from :class:`random.Random` (CPython's MT19937)
seeded with the caller's 64-bit integer.  Each coin index is drawn as
``getrandbits(m)`` and repeats are rejected, so a placement is uniform over
3-subsets.  Placements are generated serially before any work is split
across processes, which keeps results independent of the worker count.
"""

from __future__ import annotations

import itertools
import math
import random
import statistics
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

from .errors import SizeError
from .model import Explicit, ProblemInstance, ScaleOracle, materialize
from .search import SearchTrace, search

SWEEP_MAX_M = 7
SEED_BITS = 64

SWEEP_CSV_HEADER = ["m", "placements_checked", "failures", "exact_mean", "exact_mean_float",
                    "max_total"]
HISTOGRAM_CSV_HEADER = ["m", "total", "count"]
MC_CSV_HEADER = ["m", "trials", "seed", "mean", "stddev", "stderr"]


def check_trace(trace: SearchTrace, instance: ProblemInstance, query_count: int) -> list[str]:
    """Every invariant a finished run must satisfy; returns the violated ones."""
    m = instance.m
    problems = []
    if trace.recovered != instance.forged:
        problems.append(f"recovered {trace.recovered} != forged {instance.forged}")
    if not (1 <= trace.l1 <= m - 1 and 1 <= trace.l2 <= m - trace.l1):
        problems.append(f"stage counters out of range: l1={trace.l1} l2={trace.l2}")
    if not 0 <= trace.l3 <= trace.n:
        problems.append(f"l3={trace.l3} outside [0, n={trace.n}]")
    if trace.total != trace.l1 + 2 * trace.l2 + trace.n + trace.l3:
        problems.append(f"total {trace.total} != l1 + 2 l2 + n + l3")
    if trace.total > 2 * m - 1:
        problems.append(f"total {trace.total} exceeds 2m-1 = {2 * m - 1}")
    if query_count != trace.total:
        problems.append(f"oracle counted {query_count} queries, trace lists {trace.total}")
    start = trace.l1 + 2 * trace.l2
    first = trace.weighings[start:start + trace.n]
    if trace.l3 != sum(1 for _, k in first if k == 1 or k == 2):
        problems.append("l3 disagrees with the stage-1 outcomes")
    return problems


@dataclass
class SweepReport:
    m: int
    placements_checked: int = 0
    failures: list = field(default_factory=list)
    histogram: dict = field(default_factory=dict)
    total_sum: int = 0
    max_total: int = 0

    @property
    def exact_mean(self) -> Fraction:
        return Fraction(self.total_sum, self.placements_checked)

    @property
    def passed(self) -> bool:
        return not self.failures and self.placements_checked == math.comb(1 << self.m, 3)

    def merge(self, other: SweepReport) -> SweepReport:
        hist = Counter(self.histogram)
        hist.update(other.histogram)
        return SweepReport(
            m=self.m,
            placements_checked=self.placements_checked + other.placements_checked,
            failures=self.failures + other.failures,
            histogram=dict(sorted(hist.items())),
            total_sum=self.total_sum + other.total_sum,
            max_total=max(self.max_total, other.max_total),
        )

    def csv_row(self) -> list:
        mean = self.exact_mean
        return [self.m, self.placements_checked, len(self.failures), str(mean),
                repr(float(mean)), self.max_total]

    def histogram_rows(self) -> list[list[int]]:
        return [[self.m, total, count] for total, count in sorted(self.histogram.items())]

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "placements_checked": self.placements_checked,
            "failures": self.failures,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "exact_mean": str(self.exact_mean),
            "exact_mean_float": float(self.exact_mean),
            "max_total": self.max_total,
        }


def _sweep_range(m: int, start: int, stop: int) -> SweepReport:
    report = SweepReport(m)
    hist: Counter = Counter()
    placements = itertools.islice(itertools.combinations(range(1 << m), 3), start, stop)
    for forged in placements:
        instance = ProblemInstance(m, forged)
        oracle = ScaleOracle(instance)
        trace = search(oracle, m)
        problems = check_trace(trace, instance, oracle.query_count)
        if problems:
            report.failures.append({"forged": list(forged), "recovered": list(trace.recovered),
                                    "problems": problems})
        total = trace.total
        hist[total] += 1
        report.total_sum += total
        if total > report.max_total:
            report.max_total = total
        report.placements_checked += 1
    report.histogram = dict(sorted(hist.items()))
    return report


def _chunks(size: int, parts: int) -> list[tuple[int, int]]:
    step = -(-size // parts)
    return [(lo, min(lo + step, size)) for lo in range(0, size, step)]


def _require_sweep_m(m: int) -> None:
    if not isinstance(m, int) or not 2 <= m <= SWEEP_MAX_M:
        raise SizeError(f"exhaustive sweeps support 2 <= m <= {SWEEP_MAX_M}, got {m!r}")


def exhaustive_verify(m: int, workers: int = 1) -> SweepReport:
    """Run the search on every 3-subset of ``2**m`` coins and check each trace."""
    _require_sweep_m(m)
    size = math.comb(1 << m, 3)
    if workers <= 1:
        return _sweep_range(m, 0, size)
    ranges = _chunks(size, workers * 4)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_sweep_range, [m] * len(ranges), *zip(*ranges)))
    report = SweepReport(m)
    for part in parts:
        report = report.merge(part)
    return report


@lru_cache(maxsize=None)
def cached_sweep(m: int) -> SweepReport:
    """:func:`exhaustive_verify` memoized per process (m = 7 takes most of a minute)."""
    return exhaustive_verify(m)


def exact_mean(m: int) -> Fraction:
    """Mean number of weighings over all C(2**m, 3) placements, as a fraction."""
    _require_sweep_m(m)
    return cached_sweep(m).exact_mean


def oracle_equivalence(m: int) -> tuple[int, list]:
    """Re-weigh every descriptor of a full sweep as an explicit coin list.

    Returns (descriptors checked, mismatches).  The explicit weighing goes
    through a separate oracle so the search's own query count is untouched.
    """
    _require_sweep_m(m)
    checked = 0
    mismatches = []
    for forged in itertools.combinations(range(1 << m), 3):
        instance = ProblemInstance(m, forged)
        oracle = ScaleOracle(instance)
        explicit_oracle = ScaleOracle(instance)
        trace = search(oracle, m)
        for descriptor, outcome in trace.weighings:
            coins = materialize(descriptor, instance)
            explicit = explicit_oracle.weigh(Explicit(tuple(coins)))
            brute = len(set(coins) & set(forged))
            checked += 1
            if not outcome == explicit == brute:
                mismatches.append({"forged": list(forged), "descriptor": descriptor.to_json(),
                                   "symbolic": outcome, "explicit": explicit, "brute": brute})
    return checked, mismatches


# Monte Carlo ---------------------------------------------------------------


def _require_seed(seed: int) -> None:
    if not isinstance(seed, int) or not 0 <= seed < 1 << SEED_BITS:
        raise ValueError(f"seed must be an integer in [0, 2**{SEED_BITS}), got {seed!r}")


def sample_placements(m: int, trials: int, seed: int) -> list[tuple[int, int, int]]:
    """``trials`` uniform 3-subsets of ``range(2**m)``, deterministic in ``seed``."""
    _require_seed(seed)
    rng = random.Random(seed)
    out = []
    for _ in range(trials):
        picked: list[int] = []
        while len(picked) < 3:
            c = rng.getrandbits(m)
            if c not in picked:
                picked.append(c)
        out.append(tuple(sorted(picked)))
    return out


def _run_totals(m: int, placements: Iterable[tuple[int, int, int]]) -> list[int]:
    totals = []
    for forged in placements:
        instance = ProblemInstance(m, forged)
        trace = search(ScaleOracle(instance), m)
        if trace.recovered != instance.forged:
            raise AssertionError(f"search recovered {trace.recovered}, forged {forged}")
        totals.append(trace.total)
    return totals


@dataclass(frozen=True)
class MonteCarloReport:
    m: int
    trials: int
    seed: int
    mean: float
    stddev: float
    stderr: float

    def csv_row(self) -> list:
        return [self.m, self.trials, self.seed, repr(self.mean), repr(self.stddev),
                repr(self.stderr)]

    def to_json(self) -> dict:
        return {"m": self.m, "trials": self.trials, "seed": self.seed, "mean": self.mean,
                "stddev": self.stddev, "stderr": self.stderr}


def monte_carlo(m: int, trials: int, seed: int, workers: int = 1) -> MonteCarloReport:
    if not isinstance(m, int) or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m!r}")
    if not isinstance(trials, int) or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials!r}")
    placements = sample_placements(m, trials, seed)
    if workers <= 1:
        totals = _run_totals(m, placements)
    else:
        ranges = _chunks(trials, workers * 4)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_totals, [m] * len(ranges),
                             [placements[lo:hi] for lo, hi in ranges])
            totals = [t for part in parts for t in part]
    mean = sum(totals) / trials
    stddev = statistics.stdev(totals) if trials > 1 else 0.0
    return MonteCarloReport(m, trials, seed, mean, stddev, stddev / math.sqrt(trials))

