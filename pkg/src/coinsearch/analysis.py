"""Mean number of weighings: the nested-sum model, its closed form, the rate.

The nested sum treats each bisection outcome as independent fair coin flips
for the three forged coins.  Real placements are uniform without
replacement, so the exhaustive and Monte Carlo means in
:mod:`coinsearch.verification` differ from it by a finite-size bias; the
report puts them side by side and never claims they are equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import DomainError

ASYMPTOTIC_RATE = Fraction(4, 7)
ASYMPTOTIC_RATE_DECIMAL = 0.571429
# Comparison constants only: best known static scheme and the static upper bound.
STATIC_ALGORITHM_RATE = 0.46
STATIC_RATE_BOUND = 0.6


def _require_m(m: int) -> None:
    if not isinstance(m, int) or m < 2:
        raise DomainError(f"m must be an integer >= 2, got {m!r}")


def _ambiguity_mean(n: int) -> float:
    # Expected number of stage-1 ambiguities among n digits, summed term by term.
    denom = 4 ** n
    total = 0.0
    for l3 in range(n + 1):
        total += l3 * math.comb(n, l3) * 3 ** l3 / denom
    return total


def mean_triple_sum(m: int) -> float:
    """Mean weighings from the nested sum over l1, l2, l3, evaluated as written.

    The middle sum runs l2 = 1 .. m-l1-1, so it is empty when l1 = m-1.
    """
    _require_m(m)
    total = 0.0
    for l1 in range(1, m):
        middle = 0.0
        for l2 in range(1, m - l1):
            n = m - l1 - l2
            inner = _ambiguity_mean(n)
            # The binomial mean is 3n/4; a mismatch means the sum was mistyped.
            assert abs(inner - 0.75 * n) <= 1e-12 * max(1.0, n), (n, inner)
            middle += 0.5 ** l2 * (2 * l2 + n + inner)
        total += 0.25 ** (l1 - 1) * 0.75 * (l1 + middle)
    return total


def mean_closed_form(m: int) -> float:
    """``7m/4 - 1/2 - (4m+22)/4**m - (24m-45)/2**(m+1)``."""
    _require_m(m)
    return 1.75 * m - 0.5 - (4 * m + 22) / 4 ** m - (24 * m - 45) / 2 ** (m + 1)


def mean_closed_form_exact(m: int) -> Fraction:
    _require_m(m)
    return (Fraction(7, 4) * m - Fraction(1, 2) - Fraction(4 * m + 22, 4 ** m)
            - Fraction(24 * m - 45, 2 ** (m + 1)))


def asymptotic_rate() -> Fraction:
    """Limit of m / N(m): exactly 4/7."""
    return ASYMPTOTIC_RATE


def rate_at(m: int) -> float:
    return m / mean_closed_form(m)


@dataclass
class DurationReport:
    m: int
    mean_triple_sum: float
    mean_closed_form: float
    mean_exact: Optional[Fraction] = None
    mean_monte_carlo: Optional[float] = None
    mc_stderr: Optional[float] = None
    mc_trials: Optional[int] = None
    mc_seed: Optional[int] = None

    @property
    def rate_at_m(self) -> float:
        return self.m / self.mean_closed_form

    def csv_row(self) -> list:
        return [
            self.m,
            repr(self.mean_triple_sum),
            repr(self.mean_closed_form),
            repr(float(self.mean_exact)) if self.mean_exact is not None else "",
            repr(self.mean_monte_carlo) if self.mean_monte_carlo is not None else "",
            repr(self.rate_at_m),
        ]

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "triple_sum": self.mean_triple_sum,
            "closed_form": self.mean_closed_form,
            "exact_mean": str(self.mean_exact) if self.mean_exact is not None else None,
            "exact_mean_float": float(self.mean_exact) if self.mean_exact is not None else None,
            "mc_mean": self.mean_monte_carlo,
            "mc_stderr": self.mc_stderr,
            "mc_trials": self.mc_trials,
            "mc_seed": self.mc_seed,
            "rate": self.rate_at_m,
        }


ANALYZE_CSV_HEADER = ["m", "triple_sum", "closed_form", "exact_mean", "mc_mean", "rate"]


def duration_report(m: int, exact: bool = False, mc_trials: Optional[int] = None,
                    seed: Optional[int] = None) -> DurationReport:
    """Collect every available estimate of the mean for one ``m``.

    ``exact`` runs the exhaustive sweep (m <= 7 only); ``mc_trials`` needs a seed.
    """
    from .verification import exact_mean, monte_carlo

    report = DurationReport(m, mean_triple_sum(m), mean_closed_form(m))
    if exact:
        report.mean_exact = exact_mean(m)
    if mc_trials is not None:
        if seed is None:
            raise ValueError("Monte Carlo estimates need an explicit seed")
        mc = monte_carlo(m, mc_trials, seed)
        report.mean_monte_carlo = mc.mean
        report.mc_stderr = mc.stderr
        report.mc_trials = mc.trials
        report.mc_seed = mc.seed
    return report
