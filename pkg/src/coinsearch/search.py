"""Three-stage sequential search for three forged coins among ``2**m``.

Stage 0 bisects the coins into three equal blocks holding one forged coin
each.  Stage 1 weighs, for every label digit, all coins whose digit is 1.
Stage 2 spends one more weighing on each digit whose stage-1 outcome was 1
or 2.  The shared :data:`DECODE_TABLE` turns the two outcomes of a digit into
the three hidden bits; the adder-channel decoder uses the same instance.

Conventions (fixed so that traces are reproducible): the lower half is
always the one weighed, and label digit 1 is the most significant bit of a
coin's offset inside its block.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import ContractError, CorruptedOracleError
from .model import (
    LOWER,
    Block,
    Clause,
    CoinLabel,
    DigitPredicate,
    IntervalHalf,
    ScaleOracle,
    SubsetDescriptor,
    descriptor_from_json,
)

TRACE_SCHEMA = "coinsearch.trace/1"

Bits = tuple[int, int, int]


class DecodeTable:
    """(first outcome, second outcome) -> the three hidden bits.

    ``second`` is ``None`` exactly when ``first`` is 0 or 3.
    """

    def __init__(self, rows: dict[tuple[int, Optional[int]], Bits]):
        if len(rows) != 8:
            raise ValueError(f"decode table needs 8 rows, got {len(rows)}")
        if len(set(rows.values())) != 8:
            raise ValueError("decode table outputs must be the 8 distinct bit triples")
        for (first, second), bits in rows.items():
            if sum(bits) != first:
                raise ValueError(f"row ({first}, {second}) -> {bits} disagrees with first outcome")
            if (second is None) != (first in (0, 3)):
                raise ValueError(f"row ({first}, {second}) has the wrong shape")
        self._rows = dict(rows)

    def decode(self, first: int, second: Optional[int] = None) -> Bits:
        try:
            return self._rows[(first, second)]
        except (KeyError, TypeError):
            raise ContractError(f"no decode row for first={first!r}, second={second!r}") from None

    def rows(self) -> list[tuple[tuple[int, Optional[int]], Bits]]:
        return list(self._rows.items())

    def __len__(self) -> int:
        return len(self._rows)


DECODE_TABLE = DecodeTable({
    (0, None): (0, 0, 0),
    (3, None): (1, 1, 1),
    (1, 0): (0, 1, 0),
    (1, 1): (0, 0, 1),
    (1, 2): (1, 0, 0),
    (2, 0): (0, 1, 1),
    (2, 1): (1, 1, 0),
    (2, 2): (1, 0, 1),
})


def decode_row(first: int, second: Optional[int] = None) -> Bits:
    """Look up the hidden digit triple for one label position."""
    return DECODE_TABLE.decode(first, second)


@dataclass(frozen=True)
class Stage0Result:
    m: int
    T1: Block
    T2: Block
    T3: Block
    l1: int
    l2: int

    @property
    def n(self) -> int:
        return self.m - self.l1 - self.l2

    @property
    def blocks(self) -> tuple[Block, Block, Block]:
        return (self.T1, self.T2, self.T3)

    @property
    def weighings(self) -> int:
        return self.l1 + 2 * self.l2


@dataclass(frozen=True)
class AmbiguityRecord:
    position: int
    first_outcome: int

    def __post_init__(self):
        if self.first_outcome not in (1, 2):
            raise ContractError(f"ambiguity needs outcome 1 or 2, got {self.first_outcome}")


@dataclass(frozen=True)
class Stage1Result:
    outcomes: tuple[int, ...]
    fixed: dict[int, Bits]
    ambiguities: tuple[AmbiguityRecord, ...]


def _check(outcome: int, holds: int, half: int, where: str) -> int:
    # A half of size ``half`` cut from a block holding ``holds`` forged coins.
    if not (isinstance(outcome, int) and 0 <= outcome <= holds
            and outcome <= half and holds - outcome <= half):
        raise CorruptedOracleError(
            f"{where}: outcome {outcome!r} impossible for a half of {half} coins "
            f"cut from a block holding {holds} forged"
        )
    return outcome


def _weigh(oracle: ScaleOracle, subset: SubsetDescriptor, log) -> int:
    outcome = oracle.weigh(subset)
    if log is not None:
        log.append((subset, outcome))
    return outcome


def stage0(oracle: ScaleOracle, m: int, log: Optional[list] = None) -> Stage0Result:
    """Bisect ``2**m`` coins into three blocks of ``2**n`` coins, one forged each.

    Costs exactly ``l1 + 2*l2`` weighings.  Weighings are appended to ``log``
    as ``(descriptor, outcome)`` pairs when a list is given.
    """
    if m < 2:
        raise ContractError(f"m must be >= 2, got {m}")

    # Phase A: halve the block holding all three until they split 1/2.
    block = Block(0, 1 << m)
    l1 = 0
    while True:
        half = block.length >> 1
        k = _check(_weigh(oracle, IntervalHalf(block.base, block.length, LOWER), log),
                   3, half, "phase A")
        l1 += 1
        if k == 3:
            block = block.lower()
        elif k == 0:
            block = block.upper()
        elif k == 1:
            single, double = block.lower(), block.upper()
            break
        else:
            single, double = block.upper(), block.lower()
            break

    # Phase B: halve the two-forged block until they separate.
    block = double
    l2 = 0
    while True:
        half = block.length >> 1
        k = _check(_weigh(oracle, IntervalHalf(block.base, block.length, LOWER), log),
                   2, half, "phase B")
        l2 += 1
        if k == 2:
            block = block.lower()
        elif k == 0:
            block = block.upper()
        else:
            t1, t2 = block.lower(), block.upper()
            break

    # Phase C: l2 bisections of the one-forged block, even when fewer would do.
    block = single
    for _ in range(l2):
        half = block.length >> 1
        k = _check(_weigh(oracle, IntervalHalf(block.base, block.length, LOWER), log),
                   1, half, "phase C")
        block = block.lower() if k == 1 else block.upper()

    return Stage0Result(m=m, T1=t1, T2=t2, T3=block, l1=l1, l2=l2)


def digit_weighing(blocks: Stage0Result, i: int) -> DigitPredicate:
    """All coins of T1, T2, T3 whose digit ``i`` is 1."""
    return DigitPredicate(i, _digit_clauses(blocks))


def resolving_weighing(blocks: Stage0Result, i: int) -> DigitPredicate:
    """Coins of T1 with digit ``i`` = 1 together with coins of T2 with digit ``i`` = 0."""
    return DigitPredicate(i, _resolving_clauses(blocks))


def _digit_clauses(blocks: Stage0Result) -> tuple[Clause, ...]:
    return (Clause("T1", blocks.T1, 1), Clause("T2", blocks.T2, 1), Clause("T3", blocks.T3, 1))


def _resolving_clauses(blocks: Stage0Result) -> tuple[Clause, ...]:
    return (Clause("T1", blocks.T1, 1), Clause("T2", blocks.T2, 0))


def stage1(oracle: ScaleOracle, blocks: Stage0Result, log: Optional[list] = None) -> Stage1Result:
    outcomes = []
    fixed: dict[int, Bits] = {}
    ambiguities = []
    clauses = _digit_clauses(blocks)
    for i in range(1, blocks.n + 1):
        k = _weigh(oracle, DigitPredicate(i, clauses), log)
        if k not in (0, 1, 2, 3):
            raise CorruptedOracleError(f"stage 1 digit {i}: outcome {k!r} outside 0..3")
        outcomes.append(k)
        if k in (0, 3):
            fixed[i] = decode_row(k)
        else:
            ambiguities.append(AmbiguityRecord(i, k))
    return Stage1Result(tuple(outcomes), fixed, tuple(ambiguities))


def stage2(oracle: ScaleOracle, blocks: Stage0Result, first: Stage1Result,
           log: Optional[list] = None) -> tuple[CoinLabel, CoinLabel, CoinLabel]:
    """Resolve every ambiguous digit and return the labels (c1, c2, c3)."""
    digits = dict(first.fixed)
    clauses = _resolving_clauses(blocks)
    for amb in sorted(first.ambiguities, key=lambda a: a.position):
        k = _weigh(oracle, DigitPredicate(amb.position, clauses), log)
        if k not in (0, 1, 2):
            # T3 is excluded, so at most two forged coins can be on the scale.
            raise CorruptedOracleError(
                f"stage 2 digit {amb.position}: outcome {k!r} outside 0..2"
            )
        digits[amb.position] = decode_row(amb.first_outcome, k)
    n = blocks.n
    if len(digits) != n or (n and (min(digits) != 1 or max(digits) != n)):
        raise ContractError(f"digits {sorted(digits)} do not cover positions 1..{n}")
    return tuple(CoinLabel(tuple(digits[i][j] for i in range(1, n + 1))) for j in range(3))


@dataclass
class SearchTrace:
    """Everything one run did: each weighing, the stage counters and the answer."""

    m: int
    forged: Optional[tuple[int, ...]]
    l1: int
    l2: int
    l3: int
    recovered: tuple[int, int, int]
    weighings: list[tuple[SubsetDescriptor, int]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.m - self.l1 - self.l2

    @property
    def total(self) -> int:
        return len(self.weighings)

    def stages(self) -> list[str]:
        """Stage tag of each weighing: 0A, 0B, 0C, 1 or 2."""
        return (["0A"] * self.l1 + ["0B"] * self.l2 + ["0C"] * self.l2
                + ["1"] * self.n + ["2"] * self.l3)

    def to_json(self) -> dict:
        return {
            "schema": TRACE_SCHEMA,
            "m": self.m,
            "forged": list(self.forged) if self.forged is not None else None,
            "l1": self.l1,
            "l2": self.l2,
            "l3": self.l3,
            "total": self.total,
            "weighings": [{"descriptor": d.to_json(), "outcome": k} for d, k in self.weighings],
            "recovered": list(self.recovered),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    @classmethod
    def from_json(cls, doc: dict) -> SearchTrace:
        if doc.get("schema") != TRACE_SCHEMA:
            raise ValueError(f"unsupported trace schema {doc.get('schema')!r}")
        trace = cls(
            m=doc["m"],
            forged=tuple(doc["forged"]) if doc["forged"] is not None else None,
            l1=doc["l1"], l2=doc["l2"], l3=doc["l3"],
            recovered=tuple(doc["recovered"]),
            weighings=[(descriptor_from_json(w["descriptor"]), w["outcome"])
                       for w in doc["weighings"]],
        )
        if trace.total != doc["total"]:
            raise ValueError(f"trace total {doc['total']} != {trace.total} weighings listed")
        return trace


def search(oracle: ScaleOracle, m: int) -> SearchTrace:
    """Identify the three forged coins; returns the full trace."""
    instance = getattr(oracle, "instance", None)
    if instance is not None and instance.m != m:
        raise ContractError(f"oracle instance has m={instance.m}, search asked for m={m}")
    log: list = []
    blocks = stage0(oracle, m, log)
    first = stage1(oracle, blocks, log)
    labels = stage2(oracle, blocks, first, log)
    recovered = tuple(sorted(b.coin_of(c) for b, c in zip(blocks.blocks, labels)))
    return SearchTrace(
        m=m,
        forged=instance.forged if instance is not None else None,
        l1=blocks.l1,
        l2=blocks.l2,
        l3=len(first.ambiguities),
        recovered=recovered,
        weighings=log,
    )
