"""Three-party secret sharing over a reusable entangled carrier.

Alice holds qubit a, Bob b, Charlie c; the trio (a, b, c) starts in the GHZ
state and is toggled between GHZ and the even-parity form at the end of every
round.  Each round Alice entangles a fresh two-qubit message (m1 to Bob, m2 to
Charlie) with her carrier qubit:

  odd rounds   message |qq>, CNOT(a->m1) and CNOT(a->m2); each receiver reads
               q on his own after disentangling with his carrier qubit.
  even rounds  message (|q0> + |qbar 1>)/sqrt2, CNOT(a->m1) only; the XOR of
               the two readings is q, so neither receiver learns it alone.

Decoding (CNOT(b->m1), CNOT(c->m2), measure) restores the carrier exactly, so
the same trio is reused every round.  The in-flight message marginal is
independent of q, which is what hides the bit from an eavesdropper.

The toggle is either the plain Hadamard triple or, in the hardened variant,
the phased triple h(ta) x h(tb) x h(tc) with ta+tb+tc = 0 mod 2pi (forward
after odd rounds, inverse after even rounds).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import gates, qcore
from .gates import CarrierKind, ThetaTriple

CARRIER_LABELS = ("a", "b", "c")
MESSAGE_LABELS = ("m1", "m2")
RESET_TOL = 1e-9


class Variant(enum.Enum):
    PLAIN = "plain"
    THETA = "theta"


class AnnounceOrder(enum.Enum):
    """Order of public claims inside one announced round.

    ALICE_FIRST: Alice, Bob, Charlie.  BOB_LAST: Alice, Charlie, Bob.
    """

    ALICE_FIRST = "alice-first"
    BOB_LAST = "bob-last"


@dataclass(frozen=True)
class ProtocolConfig:
    variant: Variant = Variant.PLAIN
    angles: ThetaTriple | None = None
    num_rounds: int = 20
    rng_seed: int = 0
    announce_fraction: float = 0.2
    announce_order: AnnounceOrder = AnnounceOrder.BOB_LAST

    def __post_init__(self) -> None:
        if self.num_rounds < 1:
            raise ValueError(f"num_rounds must be >= 1, got {self.num_rounds}")
        if not 0.0 < self.announce_fraction <= 1.0:
            raise ValueError(f"announce_fraction must lie in (0, 1], got {self.announce_fraction}")
        if self.variant is Variant.THETA:
            if self.angles is None:
                raise ValueError("theta variant requires toggle angles")
            self.angles.require_hardened()
        elif self.angles is not None:
            raise ValueError("plain variant takes no toggle angles")


@dataclass
class RoundRecord:
    round_index: int
    parity: str  # "odd" | "even"
    q: int
    bob_bit: int | None
    charlie_bit: int
    carrier_fidelity: float

    def to_json_obj(self) -> dict:
        return {
            "round": self.round_index,
            "parity": self.parity,
            "q": self.q,
            "bob": self.bob_bit,
            "charlie": self.charlie_bit,
            "carrier_fidelity": self.carrier_fidelity,
        }


@dataclass
class Transcript:
    num_rounds: int
    records: list[RoundRecord] = field(default_factory=list)

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r.to_json_obj()) for r in self.records) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Transcript":
        records = []
        for line in text.splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            records.append(
                RoundRecord(
                    round_index=doc["round"],
                    parity=doc["parity"],
                    q=doc["q"],
                    bob_bit=doc["bob"],
                    charlie_bit=doc["charlie"],
                    carrier_fidelity=doc["carrier_fidelity"],
                )
            )
        return cls(num_rounds=len(records), records=records)


@dataclass
class ProtocolSession:
    config: ProtocolConfig
    state: qcore.StateVector
    carrier_kind: CarrierKind
    rng: np.random.Generator
    round_index: int = 1
    pending_q: int | None = None
    records: list[RoundRecord] = field(default_factory=list)

    @property
    def parity(self) -> str:
        return "odd" if self.round_index % 2 == 1 else "even"


def parity_of(round_index: int) -> str:
    return "odd" if round_index % 2 == 1 else "even"


def init_session(
    config: ProtocolConfig,
    rng: np.random.Generator | None = None,
    extra_labels: tuple[str, ...] = (),
) -> ProtocolSession:
    """Fresh session: GHZ carrier on (a, b, c), message (and extras) in |0>."""
    labels = CARRIER_LABELS + extra_labels + MESSAGE_LABELS
    rest = np.zeros(2 ** (len(labels) - 3))
    rest[0] = 1.0
    amps = np.kron(gates.carrier_amplitudes(CarrierKind.GHZ), rest)
    state = qcore.from_amplitudes(labels, amps)
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    return ProtocolSession(config=config, state=state, carrier_kind=CarrierKind.GHZ, rng=rng)


def _require_reset_messages(session: ProtocolSession) -> None:
    st = session.state
    mass = qcore.probability_of_one(st, "m1") + qcore.probability_of_one(st, "m2")
    if mass > RESET_TOL:
        raise ValueError("message qubits are not reset to |00>")


def encoded_state(state: qcore.StateVector, parity: str, q: int) -> qcore.StateVector:
    """Alice's full encoding of q applied to a state with reset messages.

    Odd rounds load |qq> and stitch both message qubits to the carrier; even
    rounds load (|q 0> + |qbar 1>)/sqrt2 and stitch only the first, so each
    receiver alone sees noise and the XOR of their reads recovers q.
    """
    if parity == "odd":
        if q:
            state = qcore.apply_unitary(state, gates.X, ["m1"])
            state = qcore.apply_unitary(state, gates.X, ["m2"])
    else:
        state = qcore.apply_unitary(state, gates.H, ["m1"])
        state = qcore.apply_unitary(state, gates.CNOT, ["m1", "m2"])
        if q:
            state = qcore.apply_unitary(state, gates.X, ["m1"])
    state = qcore.apply_unitary(state, gates.CNOT, ["a", "m1"])
    if parity == "odd":
        state = qcore.apply_unitary(state, gates.CNOT, ["a", "m2"])
    return state


def encode_round(session: ProtocolSession, q: int) -> None:
    """Alice encodes q for the current round; leaves the message in flight."""
    if q not in (0, 1):
        raise ValueError(f"q must be 0 or 1, got {q!r}")
    if session.pending_q is not None:
        raise ValueError("previous round's message was never delivered")
    _require_reset_messages(session)
    session.state = encoded_state(session.state, session.parity, q)
    session.pending_q = q


def expected_full_state(session: ProtocolSession) -> qcore.StateVector:
    """Named carrier on (a, b, c), everything else |0>, same label layout."""
    rest = np.zeros(2 ** (session.state.num_qubits - 3))
    rest[0] = 1.0
    amps = np.kron(gates.carrier_amplitudes(session.carrier_kind), rest)
    return qcore.from_amplitudes(session.state.labels, amps)


def reset_messages(session: ProtocolSession, bob_bit: int, charlie_bit: int) -> None:
    # measured qubits are classical now; flip the ones back to |0>
    if bob_bit:
        session.state = qcore.apply_unitary(session.state, gates.X, ["m1"])
    if charlie_bit:
        session.state = qcore.apply_unitary(session.state, gates.X, ["m2"])


def deliver_and_decode(session: ProtocolSession) -> tuple[int, int]:
    """Bob and Charlie disentangle and read their message qubits.

    Restores the carrier (fidelity recorded per round), resets the message
    register, and appends the round record.  Returns (bob_bit, charlie_bit).
    """
    if session.pending_q is None:
        raise ValueError("no message in flight; call encode_round first")
    session.state = qcore.apply_unitary(session.state, gates.CNOT, ["b", "m1"])
    session.state = qcore.apply_unitary(session.state, gates.CNOT, ["c", "m2"])
    bob_bit, session.state = qcore.measure(session.state, "m1", session.rng)
    charlie_bit, session.state = qcore.measure(session.state, "m2", session.rng)
    reset_messages(session, bob_bit, charlie_bit)
    fid = qcore.fidelity(session.state, expected_full_state(session))
    session.records.append(
        RoundRecord(
            round_index=session.round_index,
            parity=session.parity,
            q=session.pending_q,
            bob_bit=bob_bit,
            charlie_bit=charlie_bit,
            carrier_fidelity=fid,
        )
    )
    session.pending_q = None
    return bob_bit, charlie_bit


def toggle_triple(config: ProtocolConfig, round_index: int) -> np.ndarray:
    """The 8x8 end-of-round toggle for the given round, as one product."""
    if config.variant is Variant.PLAIN:
        return np.kron(np.kron(gates.H, gates.H), gates.H)
    assert config.angles is not None
    ta, tb, tc = config.angles.as_tuple()
    m = np.kron(np.kron(gates.h_theta(ta), gates.h_theta(tb)), gates.h_theta(tc))
    if parity_of(round_index) == "even":
        m = m.conj().T  # even rounds toggle back with the inverse triple
    return m


def toggle_carrier(session: ProtocolSession) -> None:
    """End the round: flip the carrier form and advance the round counter."""
    if session.pending_q is not None:
        raise ValueError("cannot toggle with a message still in flight")
    m = toggle_triple(session.config, session.round_index)
    session.state = qcore.apply_unitary(session.state, m, list(CARRIER_LABELS))
    session.carrier_kind = (
        CarrierKind.EVEN_PARITY if session.carrier_kind is CarrierKind.GHZ else CarrierKind.GHZ
    )
    session.round_index += 1


def run_protocol(
    config: ProtocolConfig,
    bits: list[int] | None = None,
    rng: np.random.Generator | None = None,
) -> Transcript:
    """Honest end-to-end run; bits default to fair coin flips from the rng."""
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    session = init_session(config, rng=rng)
    if bits is None:
        bits = [int(b) for b in rng.integers(0, 2, size=config.num_rounds)]
    if len(bits) != config.num_rounds:
        raise ValueError(f"need {config.num_rounds} bits, got {len(bits)}")
    for q in bits:
        encode_round(session, q)
        deliver_and_decode(session)
        toggle_carrier(session)
    return Transcript(num_rounds=config.num_rounds, records=session.records)
