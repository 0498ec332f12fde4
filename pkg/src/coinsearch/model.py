"""Problem instances, coin blocks and labels, subset descriptors and the scale.

Coins are 0-based integers in ``[0, 2**m)``.  A weighable subset is described
symbolically so that a weighing costs O(1) regardless of ``m``; the explicit
form exists only to cross-check the symbolic path on small instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .errors import DescriptorError, SizeError

FORGED_COUNT = 3
# Largest m for which subsets may be materialized into explicit coin lists.
EXPLICIT_MAX_M = 12

LOWER = "lower"
UPPER = "upper"


def _is_power_of_two(x: int) -> bool:
    return x >= 1 and x & (x - 1) == 0


@dataclass(frozen=True, slots=True)
class ProblemInstance:
    """``2**m`` coins of which exactly three (``forged``) weigh 1."""

    m: int
    forged: tuple[int, int, int]

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 2:
            raise ValueError(f"m must be an integer >= 2, got {self.m!r}")
        forged = tuple(sorted(self.forged))
        if len(forged) != FORGED_COUNT or len(set(forged)) != FORGED_COUNT:
            raise ValueError(f"need exactly 3 distinct forged coins, got {self.forged!r}")
        if forged[0] < 0 or forged[-1] >= 1 << self.m:
            raise ValueError(f"forged coins {forged} outside [0, {1 << self.m})")
        object.__setattr__(self, "forged", forged)

    @property
    def t(self) -> int:
        return 1 << self.m


@dataclass(frozen=True, slots=True)
class Block:
    """An aligned run of ``length`` consecutive coins starting at ``base``."""

    base: int
    length: int

    def __post_init__(self):
        if not _is_power_of_two(self.length):
            raise DescriptorError(f"block length {self.length} is not a power of two")
        if self.base < 0 or self.base % self.length:
            raise DescriptorError(f"block base {self.base} not aligned to {self.length}")

    @property
    def end(self) -> int:
        return self.base + self.length

    @property
    def label_length(self) -> int:
        return self.length.bit_length() - 1

    def contains(self, coin: int) -> bool:
        return self.base <= coin < self.base + self.length

    def lower(self) -> Block:
        return Block(self.base, self.length >> 1)

    def upper(self) -> Block:
        half = self.length >> 1
        return Block(self.base + half, half)

    def label_of(self, coin: int) -> CoinLabel:
        if not self.contains(coin):
            raise ValueError(f"coin {coin} is not in block {self}")
        return CoinLabel.from_value(coin - self.base, self.label_length)

    def coin_of(self, label: CoinLabel) -> int:
        if label.n != self.label_length:
            raise ValueError(f"label of length {label.n} does not fit block {self}")
        return self.base + label.value

    def coins(self) -> range:
        return range(self.base, self.base + self.length)


@dataclass(frozen=True, slots=True)
class CoinLabel:
    """Binary label of a coin within its block; ``bits[0]`` is digit 1 (the MSB)."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"label digits must be 0 or 1, got {self.bits!r}")

    @classmethod
    def from_value(cls, value: int, n: int) -> CoinLabel:
        if not 0 <= value < 1 << n:
            raise ValueError(f"value {value} does not fit in {n} digits")
        return cls(tuple((value >> (n - i)) & 1 for i in range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def value(self) -> int:
        v = 0
        for b in self.bits:
            v = (v << 1) | b
        return v

    def digit(self, i: int) -> int:
        """Digit ``i``, counted from 1."""
        if not 1 <= i <= self.n:
            raise IndexError(f"digit {i} out of range [1, {self.n}]")
        return self.bits[i - 1]

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


# Subset descriptors -------------------------------------------------------


@dataclass(frozen=True, slots=True)
class IntervalHalf:
    """The lower or upper half of the aligned interval ``[base, base+length)``."""

    base: int
    length: int
    half: str = LOWER

    def __post_init__(self):
        if self.length < 2 or not _is_power_of_two(self.length):
            raise DescriptorError(f"interval length {self.length} must be a power of two >= 2")
        if self.base < 0 or self.base % self.length:
            raise DescriptorError(f"interval base {self.base} not aligned to {self.length}")
        if self.half not in (LOWER, UPPER):
            raise DescriptorError(f"half must be {LOWER!r} or {UPPER!r}, got {self.half!r}")

    @property
    def block(self) -> Block:
        whole = Block(self.base, self.length)
        return whole.lower() if self.half == LOWER else whole.upper()

    @property
    def end(self) -> int:
        return self.base + self.length

    def weight(self, forged) -> int:
        lo = self.base if self.half == LOWER else self.base + (self.length >> 1)
        hi = lo + (self.length >> 1)
        return sum(1 for f in forged if lo <= f < hi)

    def coins(self) -> list[int]:
        return list(self.block.coins())

    def to_json(self) -> dict:
        return {"kind": "interval_half", "base": self.base, "length": self.length,
                "half": self.half}


@dataclass(frozen=True, slots=True)
class Clause:
    """Coins of the block named ``group`` whose selected digit equals ``value``."""

    group: str
    block: Block
    value: int

    def __post_init__(self):
        if self.value not in (0, 1):
            raise DescriptorError(f"required digit must be 0 or 1, got {self.value!r}")


@dataclass(frozen=True, slots=True)
class DigitPredicate:
    """Union over clauses of the coins whose digit ``digit`` matches the clause."""

    digit: int
    clauses: tuple[Clause, ...]
    # (base, end, value) per clause, precomputed for the weighing hot path.
    _spans: tuple = field(init=False, repr=False, compare=False)
    _n: int = field(init=False, repr=False, compare=False)
    _end: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.clauses:
            raise DescriptorError("digit predicate needs at least one clause")
        length = self.clauses[0].block.length
        spans = []
        bases = set()
        for c in self.clauses:
            b = c.block
            if b.length != length:
                raise DescriptorError("all clause blocks must have the same length")
            bases.add(b.base)
            spans.append((b.base, b.base + length, c.value))
        # Aligned equal-length blocks are either identical or disjoint.
        if len(bases) != len(spans):
            raise DescriptorError("clause blocks overlap")
        n = length.bit_length() - 1
        if not 1 <= self.digit <= n:
            raise DescriptorError(f"digit position {self.digit} outside [1, {n}]")
        object.__setattr__(self, "_spans", tuple(spans))
        object.__setattr__(self, "_n", n)
        object.__setattr__(self, "_end", max(bases) + length)

    @property
    def label_length(self) -> int:
        return self._n

    @property
    def end(self) -> int:
        return self._end

    def weight(self, forged) -> int:
        shift = self._n - self.digit
        w = 0
        for f in forged:
            for base, end, value in self._spans:
                if base <= f < end:
                    if ((f - base) >> shift) & 1 == value:
                        w += 1
                    break
        return w

    def coins(self) -> list[int]:
        shift = self.label_length - self.digit
        return sorted(
            coin
            for c in self.clauses
            for coin in c.block.coins()
            if ((coin - c.block.base) >> shift) & 1 == c.value
        )

    def to_json(self) -> dict:
        return {
            "kind": "digit_predicate",
            "digit": self.digit,
            "clauses": [
                {"group": c.group, "base": c.block.base, "length": c.block.length,
                 "value": c.value}
                for c in self.clauses
            ],
        }


@dataclass(frozen=True, slots=True)
class Explicit:
    """A literal set of coins (cross-check mode only)."""

    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(set(self.members)))
        if members and members[0] < 0:
            raise DescriptorError(f"negative coin index in {members!r}")
        object.__setattr__(self, "members", members)

    @property
    def end(self) -> int:
        return self.members[-1] + 1 if self.members else 0

    def weight(self, forged) -> int:
        members = set(self.members)
        return sum(1 for f in forged if f in members)

    def coins(self) -> list[int]:
        return list(self.members)

    def to_json(self) -> dict:
        return {"kind": "explicit", "coins": list(self.members)}


SubsetDescriptor = Union[IntervalHalf, DigitPredicate, Explicit]


def descriptor_from_json(doc: dict) -> SubsetDescriptor:
    kind = doc.get("kind")
    if kind == "interval_half":
        return IntervalHalf(doc["base"], doc["length"], doc["half"])
    if kind == "digit_predicate":
        clauses = tuple(
            Clause(c["group"], Block(c["base"], c["length"]), c["value"]) for c in doc["clauses"]
        )
        return DigitPredicate(doc["digit"], clauses)
    if kind == "explicit":
        return Explicit(tuple(doc["coins"]))
    raise DescriptorError(f"unknown descriptor kind {kind!r}")


# The scale -----------------------------------------------------------------


class ScaleOracle:
    """Counting scale over a fixed instance.

    Each call to :meth:`weigh` is one weighing and bumps ``query_count``.
    Not safe for concurrent use; :meth:`clone` one per worker.
    """

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        self.query_count = 0

    def weigh(self, subset: SubsetDescriptor) -> int:
        if subset.end > self.instance.t:
            raise DescriptorError(
                f"{type(subset).__name__} reaches coin {subset.end - 1}, "
                f"instance has only {self.instance.t} coins"
            )
        self.query_count += 1
        return subset.weight(self.instance.forged)

    def clone(self) -> ScaleOracle:
        return type(self)(self.instance)


def weigh(oracle: ScaleOracle, subset: SubsetDescriptor) -> int:
    """Number of forged coins in ``subset``; costs one weighing."""
    return oracle.weigh(subset)


def materialize(subset: SubsetDescriptor, context) -> list[int]:
    """Explicit sorted coin list of ``subset``.

    ``context`` is anything carrying the exponent ``m`` (a ProblemInstance or a
    Stage0Result); materializing is refused above ``2**EXPLICIT_MAX_M`` coins.
    """
    m = context.m
    if m > EXPLICIT_MAX_M:
        raise SizeError(f"refusing to materialize subsets of 2**{m} coins (limit 2**{EXPLICIT_MAX_M})")
    if subset.end > 1 << m:
        raise DescriptorError(f"descriptor reaches past the {1 << m} coins of the instance")
    return subset.coins()
