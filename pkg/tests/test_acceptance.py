"""Exit criteria for the package, one test per criterion.

Each test appends a PASS/FAIL line to the acceptance log, which the
conftest prints in the terminal summary.
"""

import math
import time
from fractions import Fraction

import pytest

from coinsearch.analysis import (
    ASYMPTOTIC_RATE_DECIMAL,
    asymptotic_rate,
    mean_closed_form,
    mean_closed_form_exact,
    mean_triple_sum,
)
from coinsearch.channel import decode_transcript, expected_transmissions, per_user_rate, verify_channel
from coinsearch.search import decode_row
from coinsearch.verification import monte_carlo, oracle_equivalence

pytestmark = pytest.mark.slow

# Both printed decoding tables, transcribed independently of the implementation.
WEIGHING_TABLE = {
    (0, None): (0, 0, 0),
    (3, None): (1, 1, 1),
    (1, 0): (0, 1, 0),
    (1, 1): (0, 0, 1),
    (1, 2): (1, 0, 0),
    (2, 0): (0, 1, 1),
    (2, 1): (1, 1, 0),
    (2, 2): (1, 0, 1),
}
CHANNEL_TABLE = dict(WEIGHING_TABLE)

# Frozen from the first Monte Carlo run (sum of totals 1699104 over 100000 trials).
MC_SEED = 42
MC_GOLDEN_MEAN = 16.99104

# Frozen exhaustive means (cross-checked against the bit-arithmetic oracle in
# test_verification) and their gaps to the closed form.
EXACT_MEAN_4 = Fraction(226, 35)
EXACT_MEAN_7 = Fraction(10429, 889)
GAP_4 = EXACT_MEAN_4 - Fraction(609, 128)
GAP_7 = EXACT_MEAN_7 - Fraction(92295, 8192)


def record(log, number, title, ok, detail):
    log.append(f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}")
    print(log[-1])
    assert ok, detail


def test_1_table_fidelity(acceptance_log):
    start = time.perf_counter()
    weighing = {key: decode_row(*key) for key in WEIGHING_TABLE}
    channel = {}
    for (y, yp), _ in CHANNEL_TABLE.items():
        channel[(y, yp)] = decode_transcript(1, [y], [] if yp is None else [yp]).messages
    elapsed = time.perf_counter() - start
    ok = weighing == WEIGHING_TABLE and channel == CHANNEL_TABLE and elapsed < 1e-3
    record(acceptance_log, 1, "table fidelity", ok,
           f"8/8 weighing rows, 8/8 channel rows, {elapsed * 1e3:.3f} ms (< 1 ms)")


def test_2_exhaustive_correctness(acceptance_log, sweeps):
    start = time.perf_counter()
    m7 = sweeps[7]
    elapsed_m7 = time.perf_counter() - start
    reports = [sweeps[m] for m in range(2, 8)]
    ok = all(
        r.placements_checked == math.comb(1 << r.m, 3) and not r.failures
        and r.max_total <= 2 * r.m - 1
        for r in reports
    )
    ok = ok and m7.placements_checked == 341_376 and elapsed_m7 < 60
    record(acceptance_log, 2, "exhaustive correctness", ok,
           f"m=2..7, {sum(r.placements_checked for r in reports)} placements, "
           f"{sum(len(r.failures) for r in reports)} failures, max totals "
           f"{[r.max_total for r in reports]}, m=7 sweep {elapsed_m7:.1f} s (< 60 s)")


def test_3_formula_identity(acceptance_log):
    worst = 0.0
    for m in range(2, 41):
        a, b = mean_triple_sum(m), mean_closed_form(m)
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    anchors = (mean_triple_sum(2), mean_closed_form(2), mean_triple_sum(3), mean_closed_form(3))
    ok = worst <= 1e-9 and anchors == (0.75, 0.75, 2.53125, 2.53125)
    record(acceptance_log, 3, "formula identity", ok,
           f"max relative gap {worst:.2e} over m=2..40 (<= 1e-9); N(2)=0.75, N(3)=2.53125")


def test_4_asymptotic_rate(acceptance_log):
    target = float(asymptotic_rate())
    at_1000 = 1000 / mean_closed_form(1000)
    gaps = [abs(m / mean_closed_form(m) - target) for m in (10, 20, 40, 80)]
    ok = (abs(at_1000 - target) <= 1e-3 and all(a > b for a, b in zip(gaps, gaps[1:]))
          and round(target, 6) == ASYMPTOTIC_RATE_DECIMAL)
    record(acceptance_log, 4, "asymptotic rate", ok,
           f"1000/N(1000) = {at_1000:.6f} vs 4/7 = {target:.6f}; gaps at m=10,20,40,80 "
           f"{', '.join(f'{g:.4f}' for g in gaps)}")


def test_5_model_convergence(acceptance_log, sweeps):
    exact4, exact7 = sweeps[4].exact_mean, sweeps[7].exact_mean
    gap4 = exact4 - mean_closed_form_exact(4)
    gap7 = exact7 - mean_closed_form_exact(7)
    ok = (exact4, exact7) == (EXACT_MEAN_4, EXACT_MEAN_7) and (gap4, gap7) == (GAP_4, GAP_7)
    ok = ok and abs(gap7) < abs(gap4)
    record(acceptance_log, 5, "model convergence", ok,
           f"|exact - N| = {float(abs(gap4)):.4f} at m=4, {float(abs(gap7)):.4f} at m=7")


def test_6_monte_carlo(acceptance_log):
    first = monte_carlo(10, 100_000, MC_SEED)
    second = monte_carlo(10, 100_000, MC_SEED)
    target = mean_closed_form(10)
    ok = abs(first.mean - target) <= 0.15 and first == second and first.mean == MC_GOLDEN_MEAN
    record(acceptance_log, 6, "Monte Carlo", ok,
           f"m=10, 100000 trials, seed {MC_SEED}: mean {first.mean} "
           f"(stderr {first.stderr:.4f}) vs N(10) = {target:.4f}, "
           f"|diff| = {abs(first.mean - target):.4f} (<= 0.15); re-run identical: {first == second}")


def test_7_channel_zero_error(acceptance_log):
    start = time.perf_counter()
    reports = [verify_channel(l) for l in range(1, 5)]
    elapsed = time.perf_counter() - start
    ok = all(r.passed and r.sessions == 8 ** r.l for r in reports) and elapsed < 5
    record(acceptance_log, 7, "channel zero-error", ok,
           f"l=1..4, {sum(r.sessions for r in reports)} sessions, "
           f"{sum(len(r.failures) for r in reports)} decode failures, "
           f"{sum(r.law_violations for r in reports)} channel-law violations, "
           f"{elapsed:.2f} s (< 5 s)")


def test_8_channel_mean_cost(acceptance_log):
    report = verify_channel(4)
    rate = per_user_rate(4)
    ok = (report.exact_mean == 7 == expected_transmissions(4) and rate == Fraction(4, 7)
          and round(float(rate), 6) == 0.571429)
    record(acceptance_log, 8, "channel mean cost", ok,
           f"mean slots at l=4 = {report.exact_mean} (= 7l/4 = 7); per-user rate {rate}")


def test_9_oracle_equivalence(acceptance_log, sweeps):
    checked_total = 0
    mismatches = []
    for m in range(2, 7):
        checked, bad = oracle_equivalence(m)
        # Every weighing of every run must have been checked.
        assert checked == sweeps[m].total_sum
        checked_total += checked
        mismatches += bad
    record(acceptance_log, 9, "oracle equivalence", not mismatches,
           f"{checked_total} descriptors over m=2..6, {len(mismatches)} symbolic/explicit mismatches")
