"""Actor state machines and session driver for the Bell-state comparison
protocol (the "jiang" scenario).

One session compares two L-bit secrets through a semi-honest third party
(TP).  TP prepares 2L Bell pairs and sends one half of each to Alice and
one to Bob.  Each participant either reflects a received qubit (CTRL) or
keeps it unmeasured and sends back a fresh Z-basis qubit encoding one bit
of M_i = Secret_i XOR R_i XOR K_AB (SIFT).  After all qubits return and
modes are declared, TP Bell-measures CTRL/CTRL positions against what it
prepared, Z-reads every SIFT return, and, if the mismatch rate stays at
or below the error threshold, the participants publish R_A and R_B so TP
can scan M_A XOR M_B XOR R_A XOR R_B for the first nonzero bit.

The i-th bit of a participant's message rides on their i-th SIFT position
in ascending position order.  Under the default balanced policy each
participant SIFTs exactly L of the 2L positions; under the coin policy a
SIFT deficit aborts the session and surplus SIFT positions carry fresh
uniformly random filler qubits that the comparison ignores.

Adversaries participate as channel taps with hooks on every forward and
return transit; see :mod:`sqpc.attacks`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .kernel import BellState, Register, prepare_bell, prepare_z

if TYPE_CHECKING:  # taps are duck-typed; see sqpc.attacks.ChannelTap
    from .attacks import AttackReport, ChannelTap

Bits = list[int]

BALANCED = "balanced"
INDEPENDENT_COIN = "coin"
MODE_POLICIES = (BALANCED, INDEPENDENT_COIN)

PARTICIPANTS = ("A", "B")

EAVESDROPPER_DETECTED = "eavesdropper-detected"
INSUFFICIENT_SIFT = "insufficient-sift"
DISCLOSURE_MISMATCH = "disclosure-mismatch"
_DETECTION_REASONS = (EAVESDROPPER_DETECTED, DISCLOSURE_MISMATCH)


class Mode(enum.Enum):
    CTRL = "ctrl"
    SIFT = "sift"


@dataclass(frozen=True)
class ComparisonOutcome:
    """Equal, NotEqual at a first differing index, or Aborted with a reason."""

    kind: str  # "equal" | "not-equal" | "aborted"
    first_diff_index: int | None = None
    abort_reason: str | None = None

    @classmethod
    def equal(cls) -> "ComparisonOutcome":
        return cls("equal")

    @classmethod
    def not_equal(cls, index: int) -> "ComparisonOutcome":
        return cls("not-equal", first_diff_index=index)

    @classmethod
    def aborted(cls, reason: str) -> "ComparisonOutcome":
        return cls("aborted", abort_reason=reason)

    @property
    def is_aborted(self) -> bool:
        return self.kind == "aborted"

    @property
    def attacker_detected(self) -> bool:
        """True when the abort reason corresponds to an integrity check firing."""
        return self.kind == "aborted" and self.abort_reason in _DETECTION_REASONS


def random_bits(length: int, rng: np.random.Generator) -> Bits:
    return [int(b) for b in rng.integers(0, 2, size=length)]


def xor_bits(*seqs: Sequence[int]) -> Bits:
    lengths = {len(s) for s in seqs}
    if len(lengths) != 1:
        raise ValueError(f"length mismatch: {sorted(len(s) for s in seqs)}")
    out = list(seqs[0])
    for s in seqs[1:]:
        out = [a ^ b for a, b in zip(out, s)]
    return out


def derive_message(secret: Sequence[int], r: Sequence[int], key: Sequence[int]) -> Bits:
    """M = Secret XOR R XOR K, bitwise."""
    return xor_bits(secret, r, key)


@dataclass
class SessionConfig:
    """Parameters of one comparison session.

    ``bell_weights`` orders the preparation distribution by ``BellState``
    value; the default is uniform and a point mass reproduces the
    all-phi+ setting used in the double C-NOT analysis.
    """

    L: int
    bell_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
    error_threshold: float = 0.0
    mode_policy: str = BALANCED
    seed: int = 0

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if len(self.bell_weights) != 4 or any(w < 0 for w in self.bell_weights):
            raise ValueError("bell_weights must be four non-negative weights")
        if abs(sum(self.bell_weights) - 1.0) > 1e-9:
            raise ValueError("bell_weights must sum to 1")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ValueError(f"error_threshold must lie in [0, 1], got {self.error_threshold}")
        if self.mode_policy not in MODE_POLICIES:
            raise ValueError(f"mode_policy must be one of {MODE_POLICIES}, got {self.mode_policy!r}")


@dataclass
class PairRecord:
    """One prepared pair: its register and the wires of every qubit in play.

    ``wire_a``/``wire_b`` are the halves as delivered to the participants
    (forward taps may grow the register but hand the same data wire on);
    ``return_a``/``return_b`` are the wires TP finally receives, which a
    SIFT response or a tampering tap may have replaced.
    """

    position: int
    prepared: BellState
    register: Register
    wire_a: int = 0
    wire_b: int = 1
    return_a: int | None = None
    return_b: int | None = None

    def wire(self, participant: str) -> int:
        return self.wire_a if participant == "A" else self.wire_b

    def return_wire(self, participant: str) -> int:
        w = self.return_a if participant == "A" else self.return_b
        if w is None:
            raise ValueError(f"participant {participant} has not responded at position {self.position}")
        return w


@dataclass
class PositionResult:
    """TP's measurement record for one position."""

    bell_outcome: BellState | None = None
    bell_mismatch: bool | None = None
    bit_a: int | None = None
    bit_b: int | None = None


@dataclass
class SessionTranscript:
    """Everything TP sees, plus the per-position quantum records."""

    config: SessionConfig
    records: list[PairRecord]
    modes_a: list[Mode]
    modes_b: list[Mode]
    r_a: Bits
    r_b: Bits
    sift_positions_a: list[int]
    sift_positions_b: list[int]
    message_positions_a: list[int]
    message_positions_b: list[int]
    position_results: list[PositionResult] = field(default_factory=list)
    ctrl_ctrl_positions: list[int] = field(default_factory=list)
    bell_mismatch_count: int = 0
    tp_m_a: Bits | None = None
    tp_m_b: Bits | None = None
    m_t: Bits | None = None
    outcome: ComparisonOutcome | None = None


def tp_prepare_pairs(config: SessionConfig, rng: np.random.Generator) -> list[PairRecord]:
    """Draw 2L Bell variants from the configured distribution and build one
    two-qubit register per position (qubit 0 = Alice's half, 1 = Bob's)."""
    variants = rng.choice(4, size=2 * config.L, p=np.asarray(config.bell_weights, dtype=float))
    return [
        PairRecord(position=pos, prepared=BellState(int(v)), register=Register(prepare_bell(BellState(int(v)))))
        for pos, v in enumerate(variants)
    ]


def draw_modes(
    num_positions: int, sift_quota: int, policy: str, rng: np.random.Generator
) -> list[Mode]:
    """Mode sequence for one participant.

    Balanced: a uniformly random arrangement with exactly ``sift_quota``
    SIFT entries.  Coin: an independent fair coin per position.
    """
    if policy == BALANCED:
        arranged = np.array([1] * sift_quota + [0] * (num_positions - sift_quota))
        arranged = arranged[rng.permutation(num_positions)]
    elif policy == INDEPENDENT_COIN:
        arranged = rng.integers(0, 2, size=num_positions)
    else:
        raise ValueError(f"unknown mode policy {policy!r}")
    return [Mode.SIFT if b else Mode.CTRL for b in arranged]


def choose_modes(config: SessionConfig, rng: np.random.Generator) -> list[Mode]:
    return draw_modes(2 * config.L, config.L, config.mode_policy, rng)


def participant_respond(
    mode: Mode, register: Register, incoming_wire: int, message_bit: int | None = None
) -> int:
    """Apply one participant's response at one position.

    CTRL reflects the incoming wire untouched.  SIFT keeps the incoming
    qubit in the register unmeasured (the physical "discard") and adjoins
    a fresh Z-basis qubit carrying ``message_bit``, which becomes the
    outgoing wire.
    """
    if mode is Mode.CTRL:
        return incoming_wire
    if message_bit is None:
        raise ValueError("SIFT response requires a message bit")
    return register.adjoin(prepare_z(message_bit))


def tp_resolve_position(
    record: PairRecord, mode_a: Mode, mode_b: Mode, rng: np.random.Generator
) -> PositionResult:
    """TP's per-position measurement.

    CTRL/CTRL positions get a Bell measurement on the two returned wires,
    flagged as a mismatch when the outcome differs from the prepared
    state.  At any other position TP Z-reads each SIFT return and leaves
    a reflected half, if any, unmeasured.
    """
    result = PositionResult()
    if mode_a is Mode.CTRL and mode_b is Mode.CTRL:
        outcome = record.register.measure_bell(record.return_wire("A"), record.return_wire("B"), rng)
        result.bell_outcome = outcome
        result.bell_mismatch = outcome != record.prepared
        return result
    if mode_a is Mode.SIFT:
        result.bit_a = record.register.measure_z(record.return_wire("A"), rng)
    if mode_b is Mode.SIFT:
        result.bit_b = record.register.measure_z(record.return_wire("B"), rng)
    return result


def tp_compare(
    m_a: Sequence[int], m_b: Sequence[int], r_a: Sequence[int], r_b: Sequence[int]
) -> tuple[ComparisonOutcome, Bits]:
    """Scan M_A XOR M_B XOR R_A XOR R_B in ascending index order, stopping
    at the first 1.  Returns the outcome and the prefix actually computed."""
    if not len(m_a) == len(m_b) == len(r_a) == len(r_b):
        raise ValueError("message and mask lengths differ")
    prefix: Bits = []
    for i, (a, b, ra, rb) in enumerate(zip(m_a, m_b, r_a, r_b)):
        bit = a ^ b ^ ra ^ rb
        prefix.append(bit)
        if bit:
            return ComparisonOutcome.not_equal(i), prefix
    return ComparisonOutcome.equal(), prefix


def sift_positions(modes: Sequence[Mode]) -> list[int]:
    return [pos for pos, mode in enumerate(modes) if mode is Mode.SIFT]


def run_session(
    config: SessionConfig,
    secret_a: Sequence[int],
    secret_b: Sequence[int],
    key: Sequence[int],
    taps: Sequence["ChannelTap"] = (),
    rng: np.random.Generator | None = None,
) -> tuple[SessionTranscript, ComparisonOutcome, list["AttackReport"]]:
    """Run one full session and return (transcript, outcome, attack reports).

    All randomness, including every tap's measurement draws, comes from
    ``rng`` (seeded from ``config.seed`` when not supplied), so identical
    inputs give bit-identical transcripts.  Taps fire on every forward and
    return transit of the channel they target; mode declarations become
    visible to taps only through ``finalize``, after TP has everything.
    """
    from .attacks import GroundTruth, PublicRecord

    L = config.L
    if not len(secret_a) == len(secret_b) == len(key) == L:
        raise ValueError("secrets and key must all have length L")
    if rng is None:
        rng = np.random.default_rng(config.seed)

    records = tp_prepare_pairs(config, rng)
    r_a = random_bits(L, rng)
    r_b = random_bits(L, rng)
    msg = {"A": derive_message(secret_a, r_a, key), "B": derive_message(secret_b, r_b, key)}
    modes = {"A": choose_modes(config, rng), "B": choose_modes(config, rng)}
    sift = {p: sift_positions(modes[p]) for p in PARTICIPANTS}
    msg_positions = {p: sift[p][:L] for p in PARTICIPANTS}

    transcript = SessionTranscript(
        config=config,
        records=records,
        modes_a=modes["A"],
        modes_b=modes["B"],
        r_a=r_a,
        r_b=r_b,
        sift_positions_a=sift["A"],
        sift_positions_b=sift["B"],
        message_positions_a=msg_positions["A"],
        message_positions_b=msg_positions["B"],
    )
    truth = GroundTruth(
        L=L,
        secrets={"A": list(secret_a), "B": list(secret_b)},
        key=list(key),
        messages=msg,
    )

    if any(len(sift[p]) < L for p in PARTICIPANTS):
        outcome = ComparisonOutcome.aborted(INSUFFICIENT_SIFT)
        transcript.outcome = outcome
        published = PublicRecord(protocol="jiang", L=L, announced=outcome.kind)
        return transcript, outcome, _finalize_taps(taps, published, truth, outcome)

    for tap in taps:
        tap.begin_session(2 * L, rng)
    for tap in taps:
        if tap.identity in PARTICIPANTS:
            tap.observe_own_modes(modes[tap.identity])

    # Forward transits, TP -> participant, channel A then B per position.
    for rec in records:
        for participant in PARTICIPANTS:
            wire = rec.wire(participant)
            for tap in taps:
                if tap.target == participant:
                    wire = tap.on_forward(rec.position, rec.register, wire, rng)
            if participant == "A":
                rec.wire_a = wire
            else:
                rec.wire_b = wire

    # Responses; the i-th SIFT position carries message bit i, surplus
    # SIFT positions under the coin policy carry random filler.
    msg_index = {p: {pos: i for i, pos in enumerate(msg_positions[p])} for p in PARTICIPANTS}
    for rec in records:
        for participant in PARTICIPANTS:
            mode = modes[participant][rec.position]
            bit: int | None = None
            if mode is Mode.SIFT:
                idx = msg_index[participant].get(rec.position)
                bit = msg[participant][idx] if idx is not None else int(rng.integers(0, 2))
            out_wire = participant_respond(mode, rec.register, rec.wire(participant), bit)
            if participant == "A":
                rec.return_a = out_wire
            else:
                rec.return_b = out_wire

    # Return transits, participant -> TP.
    for rec in records:
        for participant in PARTICIPANTS:
            wire = rec.return_wire(participant)
            for tap in taps:
                if tap.target == participant:
                    wire = tap.on_return(rec.position, rec.register, wire, rng)
            if participant == "A":
                rec.return_a = wire
            else:
                rec.return_b = wire

    # TP confirms receipt; only now are the mode declarations public.
    for rec in records:
        result = tp_resolve_position(rec, modes["A"][rec.position], modes["B"][rec.position], rng)
        transcript.position_results.append(result)
        if result.bell_mismatch is not None:
            transcript.ctrl_ctrl_positions.append(rec.position)
            transcript.bell_mismatch_count += int(result.bell_mismatch)

    transcript.tp_m_a = [transcript.position_results[pos].bit_a for pos in msg_positions["A"]]
    transcript.tp_m_b = [transcript.position_results[pos].bit_b for pos in msg_positions["B"]]

    n_ctrl = len(transcript.ctrl_ctrl_positions)
    if n_ctrl > 0 and transcript.bell_mismatch_count / n_ctrl > config.error_threshold:
        outcome = ComparisonOutcome.aborted(EAVESDROPPER_DETECTED)
        published = PublicRecord(
            protocol="jiang", L=L, modes=modes, announced=outcome.kind
        )
    else:
        outcome, m_t = tp_compare(transcript.tp_m_a, transcript.tp_m_b, r_a, r_b)
        transcript.m_t = m_t
        published = PublicRecord(
            protocol="jiang", L=L, modes=modes, r={"A": r_a, "B": r_b}, announced=outcome.kind
        )
    transcript.outcome = outcome
    return transcript, outcome, _finalize_taps(taps, published, truth, outcome)


def _finalize_taps(taps, published, truth, outcome) -> list["AttackReport"]:
    from .attacks import score_report

    reports = []
    for tap in taps:
        report = tap.finalize(published)
        if report is not None:
            score_report(report, truth)
            report.detected = outcome.attacker_detected
            reports.append(report)
    return reports
