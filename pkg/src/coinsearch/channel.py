"""Three-user binary adder channel with noiseless feedback and its zero-error code.

Each slot, the three encoders send one bit each and the channel outputs their
sum.  Every encoder (and the decoder) sees all earlier outputs.  The code
runs in two stages:

1. ``l`` slots in which user i sends digit k of its own message.
2. One slot per ambiguous digit (stage-1 output 1 or 2), in ascending k,
   where users send ``b1[k]``, ``1 - b2[k]`` and ``0``.

Digits are recovered with the same decode table the coin search uses.
Messages are 0-based integers in ``[0, 2**l)``; ``MessageTriple.from_one_based``
converts from the 1-based message sets ``{1, ..., 2**l}``.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import ContractError, ProtocolError
from .search import DECODE_TABLE

CHANNEL_SCHEMA = "coinsearch.channel/1"
USERS = (1, 2, 3)


def adder(x1: int, x2: int, x3: int) -> int:
    """Channel output for one slot."""
    for x in (x1, x2, x3):
        if x not in (0, 1):
            raise ValueError(f"channel inputs must be bits, got {(x1, x2, x3)!r}")
    return x1 + x2 + x3


def to_bits(value: int, l: int) -> tuple[int, ...]:
    return tuple((value >> (l - k)) & 1 for k in range(1, l + 1))


def from_bits(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | b
    return v


@dataclass(frozen=True)
class MessageTriple:
    l: int
    m1: int
    m2: int
    m3: int

    def __post_init__(self):
        if not isinstance(self.l, int) or self.l < 1:
            raise ValueError(f"l must be a positive integer, got {self.l!r}")
        for m in self.messages:
            if not isinstance(m, int) or not 0 <= m < 1 << self.l:
                raise ValueError(f"message {m!r} outside [0, {1 << self.l})")

    @classmethod
    def from_one_based(cls, l: int, m1: int, m2: int, m3: int) -> MessageTriple:
        return cls(l, m1 - 1, m2 - 1, m3 - 1)

    def one_based(self) -> tuple[int, int, int]:
        return (self.m1 + 1, self.m2 + 1, self.m3 + 1)

    @property
    def messages(self) -> tuple[int, int, int]:
        return (self.m1, self.m2, self.m3)

    def bits(self, user: int) -> tuple[int, ...]:
        """Digits b^(1..l) of ``user``'s message, most significant first."""
        return to_bits(self.messages[user - 1], self.l)


@dataclass(frozen=True)
class Slot:
    stage: int
    k: int


def next_slot(l: int, feedback: Sequence[int]) -> Optional[Slot]:
    """The slot that follows ``feedback``, or None once the session is complete.

    Only the output sequence is consulted, so every encoder and the decoder
    derive the same schedule.
    """
    n = len(feedback)
    for j, y in enumerate(feedback[:l]):
        if y not in (0, 1, 2, 3):
            raise ProtocolError(f"stage-1 output y_{j + 1}={y!r} outside 0..3")
    if n < l:
        return Slot(1, n + 1)
    ambiguous = [k for k in range(1, l + 1) if feedback[k - 1] in (1, 2)]
    for y in feedback[l:]:
        if y not in (0, 1, 2):
            raise ProtocolError(f"stage-2 output {y!r} outside 0..2")
    done = n - l
    if done > len(ambiguous):
        raise ProtocolError(f"{n} outputs but the session has only {l + len(ambiguous)} slots")
    if done == len(ambiguous):
        return None
    return Slot(2, ambiguous[done])


def encoder_step(user: int, message_bits: Sequence[int], slot: Slot,
                 feedback: Sequence[int]) -> int:
    """Bit sent by ``user`` in ``slot`` given its own message and past outputs."""
    if user not in USERS:
        raise ContractError(f"user must be 1, 2 or 3, got {user!r}")
    l = len(message_bits)
    expected = next_slot(l, feedback)
    if expected is None:
        raise ProtocolError("session already complete")
    if slot != expected:
        raise ProtocolError(f"feedback implies {expected}, asked for {slot}")
    for j, y in enumerate(feedback[:l]):
        if (y == 0 and message_bits[j]) or (y == 3 and not message_bits[j]):
            raise ProtocolError(f"y_{j + 1}={y} contradicts own digit {message_bits[j]}")
    own = message_bits[slot.k - 1]
    if slot.stage == 1 or user == 1:
        return own
    if user == 2:
        return 1 - own
    return 0


class Encoder:
    """One user's transmitter: holds only its own message bits."""

    __slots__ = ("user", "_bits")

    def __init__(self, user: int, message_bits: Sequence[int]):
        self.user = user
        self._bits = tuple(message_bits)

    def transmit(self, feedback: Sequence[int]) -> int:
        slot = next_slot(len(self._bits), feedback)
        if slot is None:
            raise ProtocolError("session already complete")
        return encoder_step(self.user, self._bits, slot, feedback)


@dataclass(frozen=True)
class SlotRecord:
    stage: int
    k: int
    inputs: tuple[int, int, int]
    output: int


@dataclass
class ChannelTranscript:
    l: int
    slots: list[SlotRecord] = field(default_factory=list)

    @property
    def outputs(self) -> list[int]:
        return [s.output for s in self.slots]

    @property
    def stage1_outputs(self) -> list[int]:
        return [s.output for s in self.slots if s.stage == 1]

    @property
    def ambiguous_positions(self) -> list[int]:
        return [s.k for s in self.slots if s.stage == 2]

    @property
    def stage2_outputs(self) -> list[int]:
        return [s.output for s in self.slots if s.stage == 2]

    @property
    def total_transmissions(self) -> int:
        return len(self.slots)


def decode_transcript(l: int, y: Sequence[int], y_prime: Sequence[int]) -> MessageTriple:
    """Rebuild the three messages from the stage-1 and stage-2 outputs."""
    if len(y) != l:
        raise ProtocolError(f"expected {l} stage-1 outputs, got {len(y)}")
    if any(v not in (0, 1, 2, 3) for v in y):
        raise ProtocolError(f"stage-1 outputs {list(y)} outside 0..3")
    ambiguous = [k for k in range(1, l + 1) if y[k - 1] in (1, 2)]
    if len(y_prime) != len(ambiguous):
        raise ProtocolError(f"{len(ambiguous)} ambiguous positions but {len(y_prime)} "
                            "stage-2 outputs")
    second = dict(zip(ambiguous, y_prime))
    digits = []
    for k in range(1, l + 1):
        yk = y[k - 1]
        s = second.get(k)
        if s is not None and s not in (0, 1, 2):
            raise ProtocolError(f"stage-2 output {s!r} for position {k} outside 0..2")
        digits.append(DECODE_TABLE.decode(yk, s))
    return MessageTriple(l, *(from_bits([d[u] for d in digits]) for u in range(3)))


def session(l: int, msgs: MessageTriple) -> tuple[ChannelTranscript, MessageTriple]:
    """Run the whole feedback loop for one message triple and decode it."""
    if msgs.l != l:
        raise ContractError(f"messages are {msgs.l}-bit, session asked for l={l}")
    encoders = [Encoder(u, msgs.bits(u)) for u in USERS]
    transcript = ChannelTranscript(l)
    feedback: list[int] = []
    while (slot := next_slot(l, feedback)) is not None:
        seen = tuple(feedback)
        inputs = tuple(e.transmit(seen) for e in encoders)
        y = adder(*inputs)
        transcript.slots.append(SlotRecord(slot.stage, slot.k, inputs, y))
        feedback.append(y)
    decoded = decode_transcript(l, transcript.stage1_outputs, transcript.stage2_outputs)
    return transcript, decoded


def session_json(msgs: MessageTriple, transcript: ChannelTranscript,
                 decoded: MessageTriple) -> dict:
    return {
        "schema": CHANNEL_SCHEMA,
        "l": msgs.l,
        "messages": list(msgs.messages),
        "slots": [{"stage": s.stage, "k": s.k, "inputs": list(s.inputs), "output": s.output}
                  for s in transcript.slots],
        "y": transcript.stage1_outputs,
        "y_prime": transcript.stage2_outputs,
        "decoded": list(decoded.messages),
        "total": transcript.total_transmissions,
    }


def session_dumps(msgs: MessageTriple) -> str:
    transcript, decoded = session(msgs.l, msgs)
    return json.dumps(session_json(msgs, transcript, decoded), indent=2) + "\n"


def expected_transmissions(l: int) -> Fraction:
    """Mean slots per session for uniform messages: ``7l/4``.

    A digit position costs a second slot unless all three digits agree,
    which happens for 2 of the 8 equally likely digit triples.
    """
    if not isinstance(l, int) or l < 1:
        raise ValueError(f"l must be a positive integer, got {l!r}")
    return Fraction(7 * l, 4)


def per_user_rate(l: int) -> Fraction:
    """Message bits per slot for each user (4/7 for every l)."""
    return Fraction(l) / expected_transmissions(l)


@dataclass
class ChannelReport:
    l: int
    sessions: int = 0
    failures: list = field(default_factory=list)
    law_violations: int = 0
    histogram: dict = field(default_factory=dict)
    total_sum: int = 0

    @property
    def exact_mean(self) -> Fraction:
        return Fraction(self.total_sum, self.sessions)

    @property
    def passed(self) -> bool:
        return not self.failures and self.law_violations == 0 and self.sessions == 1 << 3 * self.l

    def histogram_rows(self) -> list[list[int]]:
        return [[self.l, total, count] for total, count in sorted(self.histogram.items())]

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "sessions": self.sessions,
            "passed": self.passed,
            "failures": self.failures,
            "law_violations": self.law_violations,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "exact_mean": str(self.exact_mean),
            "expected_mean": str(expected_transmissions(self.l)),
        }


CHANNEL_CSV_HEADER = ["l", "total", "count"]


def verify_channel(l: int) -> ChannelReport:
    """Run every one of the ``2**(3l)`` message triples and check each session."""
    report = ChannelReport(l)
    hist: Counter = Counter()
    for triple in itertools.product(range(1 << l), repeat=3):
        msgs = MessageTriple(l, *triple)
        transcript, decoded = session(l, msgs)
        report.sessions += 1
        report.law_violations += sum(1 for s in transcript.slots if s.output != sum(s.inputs))
        digits = list(zip(*(msgs.bits(u) for u in USERS)))
        a = sum(1 for d in digits if len(set(d)) > 1)
        problems = []
        if decoded != msgs:
            problems.append(f"decoded {decoded.messages}")
        if transcript.total_transmissions != l + a or len(transcript.stage2_outputs) != a:
            problems.append(f"{transcript.total_transmissions} slots for {a} ambiguities")
        if 3 in transcript.stage2_outputs:
            problems.append("stage-2 output 3")
        if problems:
            report.failures.append({"messages": list(triple), "problems": problems})
        hist[transcript.total_transmissions] += 1
        report.total_sum += transcript.total_transmissions
    report.histogram = dict(sorted(hist.items()))
    return report
