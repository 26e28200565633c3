"""Three-party secret-sharing sessions over lossy channels.

One session runs a dealer (Alice) and two agents (Bob, then Charlie) through
``rounds`` rounds: preparation, transmission, designation of a test subset,
public announcements in a configurable order, error/efficiency checking, and
key distillation.  An optional adversary (a dishonest Bob) can intercept
rounds through a better replacement channel; see :mod:`triqss.adversary`.

Modes
-----
* ``CLASSICAL_KEY``: every delivered photon is measured on arrival and the
  surviving correlated key rounds are distilled into a shared classical key.
* ``STATE_SHARING``: non-test rounds stay unmeasured as stored qubits
  (message rounds); only designated test rounds are ever announced, so no
  detection record exists before designation.

Announcement orderings
----------------------
* ``VULNERABLE``: designation, detections, test outcomes, bases, dealer
  reveals.  Detections follow designation, which is what the loss-cheating
  attack exploits.
* ``REFINED``: like ``VULNERABLE`` but each test round interleaves outcome
  and basis declarations so that whoever spoke first declares their basis
  last.  This shuffles bases, not detections, so loss cheating survives it.
* ``SIFTING_FIRST``: all detections are declared before any designation.
  In classical mode this removes the loss-declaration branch on test rounds.
  In state-sharing mode there is nothing to declare before designation
  (message photons are unmeasured), so the schedule degenerates to the
  designation-first one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from .adversary import ActiveAdversary, AttackKind, AttackStrategy
from .channel import ChannelConfig, transmit
from .conventions import (
    HBB_BASIS_OF_CLASS,
    SCHEME_HBB,
    SCHEME_KKI,
    convention_bit,
    correlated_bases,
    hbb_reduced_state,
)
from .preparation import (
    HardenedPrep,
    HbbPrep,
    PreparedState,
    hbb_reduce,
    prepare_hardened_test_round,
)
from .qcore import (
    ATOL,
    Basis,
    BellOutcome,
    SIGNAL_ORDER,
    SignalTag,
    StateVector,
    ghz_state,
    overlap,
    signal_state,
)
from .registry import PhotonRegistry
from .stats import ratio, wilson_interval

__all__ = [
    "Mode",
    "Scheme",
    "OrderingPolicy",
    "RoundKind",
    "ConfigError",
    "SessionConfig",
    "Announcement",
    "RoundRecord",
    "SessionTranscript",
    "CheckReport",
    "run_session",
    "check_eavesdropping",
    "distill_keys",
    "extract_bits",
    "validate_announcement_order",
    "export_transcript_jsonl",
    "hbb_reduce",
    "prepare_hardened_test_round",
    "PreparedState",
    "HbbPrep",
    "HardenedPrep",
]


class Mode(Enum):
    CLASSICAL_KEY = "classical"
    STATE_SHARING = "state-sharing"


class Scheme(Enum):
    KKI = "kki"
    HBB = "hbb"
    HARDENED_KKI = "hardened-kki"

    @property
    def conventions_scheme(self) -> str:
        return SCHEME_HBB if self is Scheme.HBB else SCHEME_KKI

    @property
    def agent_bases(self) -> tuple[Basis, Basis]:
        if self is Scheme.HBB:
            return (Basis.X, Basis.Y)
        return (Basis.Z, Basis.X)


class OrderingPolicy(Enum):
    VULNERABLE = "vulnerable"
    REFINED = "refined"
    SIFTING_FIRST = "sifting"


class RoundKind(Enum):
    TEST = "test"
    KEY = "key"
    MESSAGE = "message"


class ConfigError(ValueError):
    """Invalid configuration, carrying the offending field name."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


@dataclass(frozen=True)
class SessionConfig:
    """Everything a session needs apart from the adversary's strategy."""

    channel: ChannelConfig
    rounds: int = 10_000
    test_fraction: float = 0.25
    ordering: OrderingPolicy = OrderingPolicy.VULNERABLE
    mode: Mode = Mode.CLASSICAL_KEY
    scheme: Scheme = Scheme.KKI
    error_threshold: float = 0.02
    efficiency_tolerance: float = 0.03
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.channel, ChannelConfig):
            raise ConfigError("channel", "expected a ChannelConfig")
        if not isinstance(self.rounds, int) or self.rounds < 1:
            raise ConfigError("rounds", f"need a positive integer, got {self.rounds!r}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(
                "test_fraction", f"must lie strictly in (0, 1), got {self.test_fraction}"
            )
        if not 0.0 < self.error_threshold < 1.0:
            raise ConfigError(
                "error_threshold", f"must lie in (0, 1), got {self.error_threshold}"
            )
        if not 0.0 < self.efficiency_tolerance < 1.0:
            raise ConfigError(
                "efficiency_tolerance",
                f"must lie in (0, 1), got {self.efficiency_tolerance}",
            )
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"need a non-negative integer, got {self.seed!r}")


Preparation = Union[PreparedState, HbbPrep, HardenedPrep]


@dataclass(frozen=True)
class Announcement:
    """One classical broadcast, in global sequence order."""

    seq: int
    party: str
    kind: str  # designation | detection | outcome | basis | class | state | prep
    round_id: int | None
    payload: object


@dataclass
class RoundRecord:
    """Everything one round produced, classical and quantum.

    ``delivered_*`` is physical arrival; ``declared_*`` is what the party
    announced (``None`` when the round carries no declaration obligation,
    e.g. message rounds).  Announced outcomes exist only for rounds whose
    photon was delivered, declared, and measured.
    """

    round_id: int
    kind: RoundKind
    test_coin: bool
    preparation: Preparation
    registry: PhotonRegistry
    delivered_bob: bool = False
    delivered_charlie: bool = False
    charlie_label: str = "C"
    declared_bob: bool | None = None
    declared_charlie: bool | None = None
    bob_basis: Basis | None = None
    charlie_basis: Basis | None = None
    bob_outcome: int | None = None
    charlie_outcome: int | None = None
    attacked: bool = False
    attack_mounted: bool = False
    bell_outcome: BellOutcome | None = None
    branch: str | None = None
    declared_loss_cheat: bool = False
    recovered_dealer_bit: int | None = None
    recovered_charlie_outcome: int | None = None
    _rng: np.random.Generator | None = field(default=None, repr=False, compare=False)


@dataclass
class SessionTranscript:
    """A finished session: configuration, per-round records, announcements."""

    config: SessionConfig
    strategy: AttackStrategy | None
    rounds: list[RoundRecord]
    announcements: list[Announcement]
    attack_fraction: float | None  # resolved fraction the adversary used


@dataclass(frozen=True)
class CheckReport:
    """Outcome of the public eavesdropping check."""

    rounds: int
    test_rounds_checked: int
    test_errors: int
    test_error_rate: float
    error_ci: tuple[float, float]
    observed_efficiency_bob: float
    observed_efficiency_charlie: float
    expected_efficiency: float
    sift_rate: float
    bob_leg_error_rate: float | None
    charlie_leg_error_rate: float | None
    efficiency_ok: bool
    errors_ok: bool
    verdict: str  # "secure" | "compromised"


def _entangled(prep: Preparation) -> bool:
    return not isinstance(prep, HardenedPrep)


def _prep_class(prep: Preparation) -> int:
    return prep.basis_class


def _prep_state(prep: Preparation, labels: tuple[str, str] = ("B", "C")) -> StateVector:
    if isinstance(prep, PreparedState):
        return prep.state(labels)
    if isinstance(prep, HbbPrep):
        state = hbb_reduced_state(prep.dealer_basis, prep.dealer_outcome)
        return state.reordered(labels) if state.labels != labels else state
    raise ValueError("hardened test rounds have no joint pair state")


def validate_session(config: SessionConfig, strategy: AttackStrategy | None) -> None:
    """Reject configurations the machinery cannot honor."""
    active = strategy is not None and strategy.kind is not AttackKind.PASSIVE
    if not active:
        return
    if config.scheme is Scheme.HBB:
        raise ConfigError(
            "strategy",
            "the interception repair only preserves the Z/X signal set; "
            "the GHZ scheme's Y-basis pairs are not invariant, so an active "
            "adversary is not supported for scheme 'hbb'",
        )
    ch = config.channel
    if ch.eta_prime < ch.eta:
        raise ConfigError(
            "channel.eta_prime",
            f"an active adversary needs eta_prime >= eta, got "
            f"eta={ch.eta} eta_prime={ch.eta_prime}",
        )
    if ch.eta_prime <= 0.0:
        raise ConfigError(
            "channel.eta_prime", "an active adversary needs a usable channel"
        )


def _round_generators(seed: int, n: int) -> list[np.random.Generator]:
    # Counter-style derivation: each round's generator depends only on
    # (seed, round index), never on how many draws other rounds made.
    words = np.random.SeedSequence(seed).generate_state(2 * n, dtype=np.uint64)
    out = []
    for i in range(n):
        key = int(words[2 * i]) | (int(words[2 * i + 1]) << 64)
        out.append(np.random.Generator(np.random.PCG64(key)))
    return out


def _agent_basis(bases: tuple[Basis, ...], rng: np.random.Generator) -> Basis:
    return bases[int(rng.integers(len(bases)))]


def _prepare_round(
    config: SessionConfig, test_coin: bool, registry: PhotonRegistry, rng
) -> Preparation:
    if config.scheme is Scheme.HBB:
        dealer_basis = Basis.X if rng.random() < 0.5 else Basis.Y
        outcome, pair = hbb_reduce(ghz_state(("A", "B", "C")), dealer_basis, rng)
        registry.add(pair)
        return HbbPrep.from_measurement(dealer_basis, outcome)
    if config.scheme is Scheme.HARDENED_KKI and test_coin:
        prep, photon_b, photon_c = prepare_hardened_test_round(rng)
        registry.add(photon_b)
        registry.add(photon_c)
        return prep
    tag = SIGNAL_ORDER[int(rng.integers(4))]
    prep = PreparedState.from_tag(tag)
    registry.add(signal_state(tag, ("B", "C")))
    return prep


def _initial_kind(config: SessionConfig, test_coin: bool) -> RoundKind:
    if config.mode is Mode.STATE_SHARING:
        return RoundKind.TEST if test_coin else RoundKind.MESSAGE
    return RoundKind.TEST if test_coin else RoundKind.KEY


def _physical_round(
    index: int,
    config: SessionConfig,
    adversary: ActiveAdversary | None,
    rng: np.random.Generator,
) -> RoundRecord:
    registry = PhotonRegistry()
    test_coin = rng.random() < config.test_fraction
    prep = _prepare_round(config, test_coin, registry, rng)
    rec = RoundRecord(
        round_id=index,
        kind=_initial_kind(config, test_coin),
        test_coin=test_coin,
        preparation=prep,
        registry=registry,
        _rng=rng,
    )
    if adversary is None:
        rec.delivered_bob = transmit(config.channel.eta, rng)
        rec.delivered_charlie = transmit(config.channel.eta, rng)
        if not rec.delivered_bob:
            registry.discard("B", rng)
        if not rec.delivered_charlie:
            registry.discard("C", rng)
    else:
        adversary.substitute(rec, rng)
    if config.mode is Mode.CLASSICAL_KEY:
        bases = config.scheme.agent_bases
        if rec.delivered_charlie:
            rec.charlie_basis = _agent_basis(bases, rng)
            rec.charlie_outcome = registry.measure(
                rec.charlie_label, rec.charlie_basis, rng
            ).outcome
        bob_now = (
            rec.delivered_bob
            if adversary is None
            else adversary.bob_measures_immediately(rec)
        )
        if bob_now:
            rec.bob_basis = _agent_basis(bases, rng)
            rec.bob_outcome = registry.measure("B", rec.bob_basis, rng).outcome
    return rec


class _Announcer:
    def __init__(self) -> None:
        self.log: list[Announcement] = []
        self._seq = 0

    def emit(self, party: str, kind: str, round_id: int | None, payload) -> None:
        self.log.append(Announcement(self._seq, party, kind, round_id, payload))
        self._seq += 1


def _resolve_test_declaration(
    rec: RoundRecord,
    config: SessionConfig,
    adversary: ActiveAdversary | None,
    loss_branch_available: bool,
) -> None:
    """Fix Bob's detection answer (and backing measurement) for a test round."""
    rng = rec._rng
    bases = config.scheme.agent_bases
    if adversary is None:
        rec.declared_bob = rec.delivered_bob
    elif rec.attacked:
        adversary.respond_test(rec, rng, loss_branch_available, bases)
    else:
        rec.declared_bob = adversary.untouched_test_declaration(rec, rng)
    if config.mode is Mode.STATE_SHARING and rec.declared_bob and rec.bob_outcome is None:
        # Honest-path test measurement happens only now, after designation.
        rec.bob_basis = _agent_basis(bases, rng)
        rec.bob_outcome = rec.registry.measure("B", rec.bob_basis, rng).outcome


def _resolve_key_declaration(
    rec: RoundRecord, adversary: ActiveAdversary | None
) -> None:
    if adversary is None:
        rec.declared_bob = rec.delivered_bob
    else:
        rec.declared_bob = adversary.key_declaration(rec, rec._rng)


def _finish_key_round_bob(
    rec: RoundRecord, config: SessionConfig, adversary: ActiveAdversary | None
) -> None:
    """Make sure a declared key round has a basis (real or faked) for Bob."""
    if not rec.declared_bob or rec.bob_basis is not None:
        return
    # Only an attacked, deferred round can reach this point unmeasured: Bob
    # never measured B and announces a random basis plus (later, privately)
    # a fabricated key bit.
    rng = rec._rng
    rec.bob_basis = adversary.fake_key_basis(rng, config.scheme.agent_bases)
    rec.bob_outcome = +1 if rng.random() < 0.5 else -1


def _emit_detections(ann: _Announcer, rounds: list[RoundRecord]) -> None:
    for rec in rounds:
        if rec.declared_bob is not None:
            ann.emit("bob", "detection", rec.round_id, bool(rec.declared_bob))
        if rec.declared_charlie is not None:
            ann.emit("charlie", "detection", rec.round_id, bool(rec.declared_charlie))


def _emit_test_outcomes_plain(ann: _Announcer, rounds: list[RoundRecord]) -> None:
    for rec in rounds:
        if rec.kind is not RoundKind.TEST:
            continue
        if rec.declared_bob:
            ann.emit("bob", "outcome", rec.round_id, int(rec.bob_outcome))
        if rec.declared_charlie:
            ann.emit("charlie", "outcome", rec.round_id, int(rec.charlie_outcome))


def _emit_bases(
    ann: _Announcer, rounds: list[RoundRecord], include_test: bool
) -> None:
    for rec in rounds:
        if rec.kind is RoundKind.MESSAGE:
            continue
        if rec.kind is RoundKind.TEST and not include_test:
            continue
        if rec.declared_bob and rec.bob_basis is not None:
            ann.emit("bob", "basis", rec.round_id, rec.bob_basis.value)
        if rec.declared_charlie and rec.charlie_basis is not None:
            ann.emit("charlie", "basis", rec.round_id, rec.charlie_basis.value)


def _emit_refined_test_blocks(ann: _Announcer, rounds: list[RoundRecord]) -> None:
    """Per test round: outcomes first, then bases in reverse declarer order."""
    for rec in rounds:
        if rec.kind is not RoundKind.TEST:
            continue
        declarers = []
        if rec.declared_bob:
            declarers.append("bob")
        if rec.declared_charlie:
            declarers.append("charlie")
        if not declarers:
            continue
        if len(declarers) == 2 and rec._rng.random() < 0.5:
            declarers.reverse()
        outcome_of = {"bob": rec.bob_outcome, "charlie": rec.charlie_outcome}
        basis_of = {"bob": rec.bob_basis, "charlie": rec.charlie_basis}
        for party in declarers:
            ann.emit(party, "outcome", rec.round_id, int(outcome_of[party]))
        for party in reversed(declarers):
            ann.emit(party, "basis", rec.round_id, basis_of[party].value)


def _dealer_reveal_payload(prep: Preparation) -> tuple[str, object]:
    if isinstance(prep, PreparedState):
        return "state", prep.tag.value
    if isinstance(prep, HbbPrep):
        return "state", {
            "dealer_basis": prep.dealer_basis.value,
            "dealer_outcome": prep.dealer_outcome,
        }
    return "prep", {
        "bob_basis": prep.bob_basis.value,
        "bob_sign": prep.bob_sign,
        "charlie_basis": prep.charlie_basis.value,
        "charlie_sign": prep.charlie_sign,
    }


def _emit_dealer_phase(ann: _Announcer, rounds: list[RoundRecord]) -> None:
    for rec in rounds:
        if rec.kind is RoundKind.MESSAGE:
            continue
        both = bool(rec.declared_bob and rec.declared_charlie)
        anyone = bool(rec.declared_bob or rec.declared_charlie)
        if both and _entangled(rec.preparation):
            ann.emit("alice", "class", rec.round_id, _prep_class(rec.preparation))
        if rec.kind is RoundKind.TEST and anyone:
            kind, payload = _dealer_reveal_payload(rec.preparation)
            ann.emit("alice", kind, rec.round_id, payload)


def _recovery_phase(
    rounds: list[RoundRecord], adversary: ActiveAdversary | None
) -> None:
    """After the dealer's class reveals, the adversary reads off key bits."""
    if adversary is None:
        return
    for rec in rounds:
        if rec.kind is not RoundKind.KEY or not rec.attack_mounted:
            continue
        entry = adversary.store.get(rec.round_id)
        if entry is None:
            continue
        both = bool(rec.declared_bob and rec.declared_charlie)
        if both and entry.holds_pair:
            rec.recovered_dealer_bit = adversary.recover_dealer_bit(
                rec, _prep_class(rec.preparation), rec._rng
            )
        if rec.declared_charlie and entry.fake_half:
            rec.recovered_charlie_outcome = adversary.recover_charlie_outcome(
                rec, rec.charlie_basis, rec._rng
            )


def _announce_designation_first(
    config: SessionConfig, rounds: list[RoundRecord], adversary, ann: _Announcer
) -> None:
    test_ids = tuple(r.round_id for r in rounds if r.kind is RoundKind.TEST)
    ann.emit("alice", "designation", None, test_ids)
    for rec in rounds:
        if rec.kind is RoundKind.TEST:
            _resolve_test_declaration(rec, config, adversary, loss_branch_available=True)
        else:
            _resolve_key_declaration(rec, adversary)
        rec.declared_charlie = rec.delivered_charlie
    _emit_detections(ann, rounds)
    if config.ordering is OrderingPolicy.REFINED:
        _emit_refined_test_blocks(ann, rounds)
        for rec in rounds:
            if rec.kind is RoundKind.KEY:
                _finish_key_round_bob(rec, config, adversary)
        _emit_bases(ann, rounds, include_test=False)
    else:
        _emit_test_outcomes_plain(ann, rounds)
        for rec in rounds:
            if rec.kind is RoundKind.KEY:
                _finish_key_round_bob(rec, config, adversary)
        _emit_bases(ann, rounds, include_test=True)
    _emit_dealer_phase(ann, rounds)
    _recovery_phase(rounds, adversary)


def _announce_sifting_first(
    config: SessionConfig, rounds: list[RoundRecord], adversary, ann: _Announcer
) -> None:
    for rec in rounds:
        if adversary is None:
            rec.declared_bob = rec.delivered_bob
        else:
            rec.declared_bob = adversary.sifting_declaration(rec, rec._rng)
        rec.declared_charlie = rec.delivered_charlie
    _emit_detections(ann, rounds)
    for rec in rounds:
        both = rec.declared_bob and rec.declared_charlie
        if config.scheme is Scheme.HARDENED_KKI:
            # Hardened test rounds are fixed at preparation time; an
            # undetected one simply yields no check data.
            continue
        if rec.test_coin and not both:
            rec.kind = RoundKind.KEY  # designation happens among detected rounds
    test_ids = tuple(r.round_id for r in rounds if r.kind is RoundKind.TEST)
    ann.emit("alice", "designation", None, test_ids)
    for rec in rounds:
        if rec.kind is not RoundKind.TEST:
            continue
        if adversary is not None and rec.attacked and rec.declared_bob:
            # The detection is already public; a wrong Bell outcome can no
            # longer be converted into a loss.
            adversary.respond_test(
                rec, rec._rng, loss_branch_available=False,
                agent_bases=config.scheme.agent_bases,
            )
    _emit_test_outcomes_plain(ann, rounds)
    for rec in rounds:
        if rec.kind is RoundKind.KEY:
            _finish_key_round_bob(rec, config, adversary)
    _emit_bases(ann, rounds, include_test=True)
    _emit_dealer_phase(ann, rounds)
    _recovery_phase(rounds, adversary)


def _announce_state_sharing(
    config: SessionConfig, rounds: list[RoundRecord], adversary, ann: _Announcer
) -> None:
    # Message photons are unmeasured, so no detection record can precede
    # designation regardless of the configured ordering; every policy
    # degenerates to the designation-first schedule.
    test_ids = tuple(r.round_id for r in rounds if r.kind is RoundKind.TEST)
    ann.emit("alice", "designation", None, test_ids)
    bases = config.scheme.agent_bases
    for rec in rounds:
        if rec.kind is not RoundKind.TEST:
            continue
        # Simulation order within the round: Charlie's measurement first so
        # factor merges stay small; the operations act on disjoint photons,
        # so announcement order is unaffected.
        rng = rec._rng
        if rec.delivered_charlie:
            rec.charlie_basis = _agent_basis(bases, rng)
            rec.charlie_outcome = rec.registry.measure(
                rec.charlie_label, rec.charlie_basis, rng
            ).outcome
        rec.declared_charlie = rec.delivered_charlie
        _resolve_test_declaration(rec, config, adversary, loss_branch_available=True)
    test_rounds = [r for r in rounds if r.kind is RoundKind.TEST]
    _emit_detections(ann, test_rounds)
    _emit_test_outcomes_plain(ann, test_rounds)
    _emit_bases(ann, test_rounds, include_test=True)
    _emit_dealer_phase(ann, test_rounds)


def run_session(
    config: SessionConfig, strategy: AttackStrategy | None = None
) -> SessionTranscript:
    """Simulate one full session and return its transcript.

    Randomness is derived per round from ``config.seed``; the same
    configuration and strategy always reproduce the same transcript.
    """
    validate_session(config, strategy)
    active = strategy is not None and strategy.kind is not AttackKind.PASSIVE
    adversary = ActiveAdversary(strategy, config.channel) if active else None
    generators = _round_generators(config.seed, config.rounds)
    rounds = [
        _physical_round(i, config, adversary, generators[i])
        for i in range(config.rounds)
    ]
    ann = _Announcer()
    if config.mode is Mode.STATE_SHARING:
        _announce_state_sharing(config, rounds, adversary, ann)
    elif config.ordering is OrderingPolicy.SIFTING_FIRST:
        _announce_sifting_first(config, rounds, adversary, ann)
    else:
        _announce_designation_first(config, rounds, adversary, ann)
    return SessionTranscript(
        config=config,
        strategy=strategy,
        rounds=rounds,
        announcements=ann.log,
        attack_fraction=adversary.fraction if adversary is not None else None,
    )


# ---------------------------------------------------------------------------
# Evaluation


def extract_bits(record: RoundRecord, announced_class: int) -> tuple[int, int]:
    """Key bits both agents extract from one announced round.

    Requires both outcomes and a correlated basis pairing; raises
    ``ValueError`` otherwise.
    """
    if record.bob_outcome is None or record.charlie_outcome is None:
        raise ValueError(f"round {record.round_id}: outcomes are incomplete")
    scheme = SCHEME_HBB if isinstance(record.preparation, HbbPrep) else SCHEME_KKI
    k_b = convention_bit(
        scheme, announced_class, record.bob_basis, record.charlie_basis,
        "bob", record.bob_outcome,
    )
    k_c = convention_bit(
        scheme, announced_class, record.bob_basis, record.charlie_basis,
        "charlie", record.charlie_outcome,
    )
    return k_b, k_c


@dataclass
class SessionTally:
    """Raw counters extracted from one or more transcripts (mergeable)."""

    rounds: int = 0
    bob_obligation: int = 0
    bob_declared: int = 0
    charlie_obligation: int = 0
    charlie_declared: int = 0
    basis_rounds: int = 0
    sifted_rounds: int = 0
    test_checked: int = 0
    test_errors: int = 0
    bob_leg_checked: int = 0
    bob_leg_errors: int = 0
    charlie_leg_checked: int = 0
    charlie_leg_errors: int = 0
    attacked_rounds: int = 0
    attacked_mounted: int = 0
    attacked_test_total: int = 0
    attacked_test_declared: int = 0
    attacked_test_mounted: int = 0
    attacked_test_loss_declared: int = 0
    bad_bell: int = 0
    bad_bell_checked: int = 0
    bad_bell_errors: int = 0
    key_sifted: int = 0
    key_sifted_attacked: int = 0
    dealer_bit_recoveries: int = 0
    dealer_bit_correct: int = 0
    charlie_bit_recoveries: int = 0
    charlie_bit_correct: int = 0
    message_rounds: int = 0
    attacked_message_mounted: int = 0
    adversary_pairs_intact: int = 0
    adversary_min_overlap: float = float("inf")
    shared_pairs_intact: int = 0

    def merge(self, other: "SessionTally") -> None:
        for name in self.__dataclass_fields__:
            if name == "adversary_min_overlap":
                self.adversary_min_overlap = min(
                    self.adversary_min_overlap, other.adversary_min_overlap
                )
            else:
                setattr(self, name, getattr(self, name) + getattr(other, name))


def _tally_message_round(rec: RoundRecord, tally: SessionTally) -> None:
    tally.message_rounds += 1
    if rec.attacked and rec.attack_mounted:
        tally.attacked_message_mounted += 1
        joint = rec.registry.joint_state(("B", "C"))
        if joint is not None and _entangled(rec.preparation):
            ov = overlap(joint, _prep_state(rec.preparation))
            tally.adversary_min_overlap = min(tally.adversary_min_overlap, ov)
            if ov >= 1.0 - ATOL:
                tally.adversary_pairs_intact += 1
    elif rec.delivered_bob and rec.delivered_charlie and not rec.attacked:
        joint = rec.registry.joint_state(("B", "C"))
        if joint is not None and _entangled(rec.preparation):
            if overlap(joint, _prep_state(rec.preparation)) >= 1.0 - ATOL:
                tally.shared_pairs_intact += 1


def tally_transcript(transcript: SessionTranscript) -> SessionTally:
    """Count everything the checks and reports need from one transcript."""
    config = transcript.config
    scheme = config.scheme.conventions_scheme
    tally = SessionTally()
    for rec in transcript.rounds:
        tally.rounds += 1
        if rec.attacked:
            tally.attacked_rounds += 1
            if rec.attack_mounted:
                tally.attacked_mounted += 1
        if rec.kind is RoundKind.MESSAGE:
            _tally_message_round(rec, tally)
            continue
        if rec.declared_bob is not None:
            tally.bob_obligation += 1
            tally.bob_declared += int(rec.declared_bob)
        if rec.declared_charlie is not None:
            tally.charlie_obligation += 1
            tally.charlie_declared += int(rec.declared_charlie)
        both = bool(rec.declared_bob and rec.declared_charlie)
        prep = rec.preparation
        if isinstance(prep, HardenedPrep):
            if rec.declared_bob:
                tally.bob_leg_checked += 1
                if rec.bob_basis is prep.bob_basis and rec.bob_outcome != prep.bob_sign:
                    tally.bob_leg_errors += 1
            if rec.declared_charlie:
                tally.charlie_leg_checked += 1
                if (
                    rec.charlie_basis is prep.charlie_basis
                    and rec.charlie_outcome != prep.charlie_sign
                ):
                    tally.charlie_leg_errors += 1
        else:
            correlated = False
            if both and rec.bob_basis is not None and rec.charlie_basis is not None:
                tally.basis_rounds += 1
                correlated = correlated_bases(
                    prep.basis_class, rec.bob_basis, rec.charlie_basis, scheme
                )
                if correlated:
                    tally.sifted_rounds += 1
            if rec.kind is RoundKind.TEST and correlated:
                k_b, k_c = extract_bits(rec, prep.basis_class)
                error = (k_b ^ k_c) != prep.bit
                tally.test_checked += 1
                tally.test_errors += int(error)
                if rec.branch in ("bad", "forced"):
                    tally.bad_bell_checked += 1
                    tally.bad_bell_errors += int(error)
            if rec.kind is RoundKind.KEY and correlated:
                tally.key_sifted += 1
                if rec.attacked and rec.attack_mounted:
                    tally.key_sifted_attacked += 1
                    if rec.recovered_dealer_bit is not None:
                        tally.dealer_bit_recoveries += 1
                        tally.dealer_bit_correct += int(
                            rec.recovered_dealer_bit == prep.bit
                        )
                    if rec.recovered_charlie_outcome is not None:
                        tally.charlie_bit_recoveries += 1
                        tally.charlie_bit_correct += int(
                            rec.recovered_charlie_outcome == rec.charlie_outcome
                        )
        if rec.kind is RoundKind.TEST and rec.attacked:
            tally.attacked_test_total += 1
            tally.attacked_test_declared += int(bool(rec.declared_bob))
            if rec.attack_mounted:
                tally.attacked_test_mounted += 1
                tally.attacked_test_loss_declared += int(rec.declared_loss_cheat)
                if rec.branch in ("bad", "forced"):
                    tally.bad_bell += 1
    return tally


def evaluate_tally(tally: SessionTally, config: SessionConfig) -> CheckReport:
    """Turn raw counters into the public check verdict."""
    hardened = config.scheme is Scheme.HARDENED_KKI
    if hardened:
        legs_checked = tally.bob_leg_checked + tally.charlie_leg_checked
        if legs_checked == 0:
            raise ValueError("no usable test announcements; cannot run the check")
        bob_rate = ratio(tally.bob_leg_errors, tally.bob_leg_checked)
        charlie_rate = ratio(tally.charlie_leg_errors, tally.charlie_leg_checked)
        if charlie_rate >= bob_rate:
            worst_errors, worst_checked = (
                tally.charlie_leg_errors,
                tally.charlie_leg_checked,
            )
        else:
            worst_errors, worst_checked = tally.bob_leg_errors, tally.bob_leg_checked
        test_checked = legs_checked
        test_errors = tally.bob_leg_errors + tally.charlie_leg_errors
        error_rate = max(bob_rate, charlie_rate)
        ci = wilson_interval(worst_errors, worst_checked)
        errors_ok = error_rate <= config.error_threshold
        leg_rates = (bob_rate, charlie_rate)
    else:
        if tally.test_checked == 0:
            raise ValueError("no usable test rounds; cannot run the check")
        test_checked = tally.test_checked
        test_errors = tally.test_errors
        error_rate = ratio(test_errors, test_checked)
        ci = wilson_interval(test_errors, test_checked)
        errors_ok = error_rate <= config.error_threshold
        leg_rates = (None, None)
    eff_bob = ratio(tally.bob_declared, tally.bob_obligation)
    eff_charlie = ratio(tally.charlie_declared, tally.charlie_obligation)
    eta = config.channel.eta
    tol = config.efficiency_tolerance
    efficiency_ok = abs(eff_bob - eta) <= tol and abs(eff_charlie - eta) <= tol
    return CheckReport(
        rounds=tally.rounds,
        test_rounds_checked=test_checked,
        test_errors=test_errors,
        test_error_rate=error_rate,
        error_ci=ci,
        observed_efficiency_bob=eff_bob,
        observed_efficiency_charlie=eff_charlie,
        expected_efficiency=eta,
        sift_rate=ratio(tally.sifted_rounds, tally.basis_rounds),
        bob_leg_error_rate=leg_rates[0],
        charlie_leg_error_rate=leg_rates[1],
        efficiency_ok=efficiency_ok,
        errors_ok=errors_ok,
        verdict="secure" if (errors_ok and efficiency_ok) else "compromised",
    )


def check_eavesdropping(
    transcript: SessionTranscript, config: SessionConfig | None = None
) -> CheckReport:
    """Run the public error/efficiency check on a finished session.

    Raises ``ValueError`` when the transcript contains no usable test data.
    """
    return evaluate_tally(tally_transcript(transcript), config or transcript.config)


def distill_keys(
    transcript: SessionTranscript,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dealer / agent-1 / agent-2 key bits over the sifted key rounds.

    The dealer's key XORs out of the two agents' keys round by round.  Not
    defined for state-sharing sessions, which never announce key bases.
    """
    if transcript.config.mode is Mode.STATE_SHARING:
        raise ValueError("state-sharing sessions distill no classical key")
    scheme = transcript.config.scheme.conventions_scheme
    k_a: list[int] = []
    k_b: list[int] = []
    k_c: list[int] = []
    for rec in transcript.rounds:
        if rec.kind is not RoundKind.KEY:
            continue
        if not (rec.declared_bob and rec.declared_charlie):
            continue
        prep = rec.preparation
        if not correlated_bases(
            prep.basis_class, rec.bob_basis, rec.charlie_basis, scheme
        ):
            continue
        bits = extract_bits(rec, prep.basis_class)
        k_a.append(prep.bit)
        k_b.append(bits[0])
        k_c.append(bits[1])
    return (
        np.array(k_a, dtype=np.uint8),
        np.array(k_b, dtype=np.uint8),
        np.array(k_c, dtype=np.uint8),
    )


# ---------------------------------------------------------------------------
# Announcement-order validation and export

_PHASE_RANKS_DESIGNATION_FIRST = {
    "designation": 0,
    "detection": 1,
    "outcome": 2,
    "basis": 3,
    "class": 4,
    "state": 4,
    "prep": 4,
}
_PHASE_RANKS_SIFTING = {
    "detection": 0,
    "designation": 1,
    "outcome": 2,
    "basis": 3,
    "class": 4,
    "state": 4,
    "prep": 4,
}


class AnnouncementOrderError(AssertionError):
    pass


def validate_announcement_order(transcript: SessionTranscript) -> None:
    """Assert the transcript's announcements follow the configured schedule.

    Raises ``AnnouncementOrderError`` on any violation; also checks that
    outcomes were only announced for declared detections and that the
    refined interleave (first outcome declarer announces their basis last)
    holds for every test round.
    """
    config = transcript.config
    sifting = (
        config.mode is Mode.CLASSICAL_KEY
        and config.ordering is OrderingPolicy.SIFTING_FIRST
    )
    refined = (
        config.mode is Mode.CLASSICAL_KEY
        and config.ordering is OrderingPolicy.REFINED
    )
    ranks = _PHASE_RANKS_SIFTING if sifting else _PHASE_RANKS_DESIGNATION_FIRST
    declared: dict[tuple[str, int], bool] = {}
    test_ids: set[int] = set()
    last_rank = -1
    refined_state: dict[int, list[tuple[str, str]]] = {}
    for a in transcript.announcements:
        if a.kind == "designation":
            test_ids = set(a.payload)
        rank = ranks.get(a.kind)
        if rank is None:
            raise AnnouncementOrderError(f"unknown announcement kind {a.kind!r}")
        if refined and a.kind in ("outcome", "basis") and a.round_id in test_ids:
            rank = 2  # test blocks interleave outcomes and bases
        if rank < last_rank:
            raise AnnouncementOrderError(
                f"announcement #{a.seq} ({a.party} {a.kind}) arrived after a "
                f"later phase had begun"
            )
        last_rank = max(last_rank, rank)
        if a.kind == "detection":
            declared[(a.party, a.round_id)] = bool(a.payload)
        if a.kind == "outcome":
            if not declared.get((a.party, a.round_id), False):
                raise AnnouncementOrderError(
                    f"round {a.round_id}: {a.party} announced an outcome "
                    f"without a declared detection"
                )
            if a.round_id not in test_ids:
                raise AnnouncementOrderError(
                    f"round {a.round_id}: outcome announced for a non-test round"
                )
        if refined and a.round_id in test_ids and a.kind in ("outcome", "basis"):
            refined_state.setdefault(a.round_id, []).append((a.party, a.kind))
    if refined:
        for rid, events in refined_state.items():
            outcomes = [p for p, k in events if k == "outcome"]
            bases = [p for p, k in events if k == "basis"]
            if sorted(outcomes) != sorted(bases):
                raise AnnouncementOrderError(
                    f"round {rid}: outcome/basis declarers differ: "
                    f"{outcomes} vs {bases}"
                )
            if len(outcomes) == 2 and (
                events != [
                    (outcomes[0], "outcome"),
                    (outcomes[1], "outcome"),
                    (outcomes[1], "basis"),
                    (outcomes[0], "basis"),
                ]
            ):
                raise AnnouncementOrderError(
                    f"round {rid}: refined interleave violated: {events}"
                )


def _prep_json(prep: Preparation) -> dict:
    if isinstance(prep, PreparedState):
        return {"kind": "pair", "tag": prep.tag.value,
                "class": prep.basis_class, "bit": prep.bit}
    if isinstance(prep, HbbPrep):
        return {"kind": "ghz", "dealer_basis": prep.dealer_basis.value,
                "dealer_outcome": prep.dealer_outcome,
                "class": prep.basis_class, "bit": prep.bit}
    return {"kind": "hardened", "bob_basis": prep.bob_basis.value,
            "bob_sign": prep.bob_sign, "charlie_basis": prep.charlie_basis.value,
            "charlie_sign": prep.charlie_sign}


def _announcement_json(a: Announcement) -> dict:
    payload = list(a.payload) if isinstance(a.payload, tuple) else a.payload
    return {"seq": a.seq, "party": a.party, "kind": a.kind, "payload": payload}


def export_transcript_jsonl(transcript: SessionTranscript, path: str) -> None:
    """Write a session transcript as line-delimited JSON.

    The first line is a session header (schema version, configuration,
    strategy, session-level announcements such as the test designation);
    every following line is one round with its scoped announcements.  See
    ``docs/transcript_schema.md`` for the field-by-field description.
    """
    config = transcript.config
    by_round: dict[int, list[Announcement]] = {}
    session_level: list[Announcement] = []
    for a in transcript.announcements:
        if a.round_id is None:
            session_level.append(a)
        else:
            by_round.setdefault(a.round_id, []).append(a)
    header = {
        "record": "session",
        "schema": 1,
        "config": {
            "eta": config.channel.eta,
            "eta_prime": config.channel.eta_prime,
            "rounds": config.rounds,
            "test_fraction": config.test_fraction,
            "ordering": config.ordering.value,
            "mode": config.mode.value,
            "scheme": config.scheme.value,
            "error_threshold": config.error_threshold,
            "efficiency_tolerance": config.efficiency_tolerance,
            "seed": config.seed,
        },
        "strategy": None
        if transcript.strategy is None
        else {
            "kind": transcript.strategy.kind.value,
            "attack_fraction": transcript.attack_fraction,
            "cheating_enabled": transcript.strategy.cheating_enabled,
        },
        "announcements": [_announcement_json(a) for a in session_level],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for rec in transcript.rounds:
            row = {
                "record": "round",
                "round_id": rec.round_id,
                "kind": rec.kind.value,
                "preparation": _prep_json(rec.preparation),
                "attacked": rec.attacked,
                "attack_mounted": rec.attack_mounted,
                "delivered": {"bob": rec.delivered_bob, "charlie": rec.delivered_charlie},
                "declared": {"bob": rec.declared_bob, "charlie": rec.declared_charlie},
                "bases": {
                    "bob": rec.bob_basis.value if rec.bob_basis else None,
                    "charlie": rec.charlie_basis.value if rec.charlie_basis else None,
                },
                "outcomes": {"bob": rec.bob_outcome, "charlie": rec.charlie_outcome},
                "bell_outcome": rec.bell_outcome.value if rec.bell_outcome else None,
                "branch": rec.branch,
                "announcements": [
                    _announcement_json(a) for a in by_round.get(rec.round_id, [])
                ],
            }
            fh.write(json.dumps(row, sort_keys=True) + "\n")
