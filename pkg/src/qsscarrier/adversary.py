"""Bob's entanglement-splitting attack on the reusable carrier.

In round 2 Bob intercepts both message qubits and applies one 8x8 unitary on
(b, m1, m2) that rips the carrier into two Bell pairs: (a, bt) shared with
Alice and (b, c) shared with Charlie, where bt is the kept message qubit m1.
Which Bell pattern comes out encodes Alice's round-2 bit: PhiPlus pairs for
q2 = 0, PsiPlus pairs for q2 = 1.  The third qubit m2 is left in a fixed
blank state and forwarded as a counterfeit.

From round 3 on Bob plays man-in-the-middle: he decodes Alice's bit through
the (a, bt) pair and re-encodes a counterfeit for Charlie through (b, c).
Reads that go through a Psi-family pair come out complemented, and under the
end-of-round toggles the q2 = 1 branch alternates between the PsiPlus and
PhiMinus forms (the q2 = 0 branch stays PhiPlus), so Bob's records carry a
per-round family tag: the complement applies exactly to the tagged rounds
once the pattern hypothesis is resolved from a public announcement.

Maintenance choices Bob can play at each toggle: the plain Hadamard pair, the
conjugate pair h(-ta) (x) h(-tc), or the transpose pair h(ta)^T (x) h(tc)^T
(inverses of these on inverse-direction rounds).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import gates, protocol, qcore
from .gates import BellKind
from .protocol import ProtocolSession, Variant

RESIDUAL_TOL = 1e-8
SYNTHESIS_FAIL_TOL = 1e-6

KEPT_LABEL = "bt"
ATTACK_EXTRA_LABELS = (KEPT_LABEL,)


class PatternHypothesis(enum.Enum):
    PHI = "phi"
    PSI = "psi"
    UNKNOWN = "unknown"


class MaintenancePolicy(enum.Enum):
    KNOWN_THETA_U = "u"
    KNOWN_THETA_V = "v"
    RANDOM_GUESS = "random"
    PLAIN_HADAMARD = "plain"


@dataclass(frozen=True)
class SplitUnitary:
    """Synthesized 8x8 splitting operator with its verification numbers."""

    matrix: np.ndarray
    residuals: tuple[float, float]
    unitarity_defect: float
    blank: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {
                "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
                "residuals": list(self.residuals),
                "unitarity_defect": self.unitarity_defect,
            }
        )


@dataclass
class RawRecord:
    round_index: int
    parity: str
    raw: int
    claim: int
    psi_tagged: bool  # pair was Psi-family at read time under the q2=1 branch
    honest: bool = False


@dataclass
class AttackState:
    maintenance_policy: MaintenancePolicy
    rng: np.random.Generator
    kept_label: str = KEPT_LABEL
    pattern_hypothesis: PatternHypothesis = PatternHypothesis.UNKNOWN
    # True while the q2=1 branch would be Psi-family; flips at every toggle.
    psi_family_now: bool = True
    current_guess: str | None = None
    records: dict[int, RawRecord] = field(default_factory=dict)
    charlie_round2: int | None = None
    round2_bit: int | None = None
    # experiment-side truth for instrumentation; Bob's logic never reads it
    q2_truth: int | None = None

    def learned_bit(self, round_index: int) -> int | None:
        """Bob's best current value for Alice's bit in the given round."""
        if round_index == 2:
            # the split bit IS the pattern: either heard directly or read off
            # the resolved hypothesis
            if self.round2_bit is not None:
                return self.round2_bit
            if self.pattern_hypothesis is PatternHypothesis.UNKNOWN:
                return None
            return int(self.pattern_hypothesis is PatternHypothesis.PSI)
        rec = self.records.get(round_index)
        if rec is None:
            return None
        if rec.honest or not rec.psi_tagged:
            return rec.raw
        if self.pattern_hypothesis is PatternHypothesis.UNKNOWN:
            return rec.raw
        return rec.raw ^ (self.pattern_hypothesis is PatternHypothesis.PSI)


# ---------------------------------------------------------------------------
# synthesis


def _encoded_round2_state(q: int) -> qcore.StateVector:
    """Even-parity carrier plus Alice's round-2 encoding of q, canonical labels."""
    rest = np.zeros(4)
    rest[0] = 1.0
    amps = np.kron(gates.carrier_amplitudes(gates.CarrierKind.EVEN_PARITY), rest)
    state = qcore.from_amplitudes(("a", "b", "c", "m1", "m2"), amps)
    # message (|q0> + |qbar 1>)/sqrt2, then CNOT(a->m1): the even-round encoding
    state = qcore.apply_unitary(state, gates.H, ["m1"])
    state = qcore.apply_unitary(state, gates.CNOT, ["m1", "m2"])
    if q:
        state = qcore.apply_unitary(state, gates.X, ["m1"])
    return qcore.apply_unitary(state, gates.CNOT, ["a", "m1"])


def _target_split_state(q: int, blank: np.ndarray) -> qcore.StateVector:
    """Bell(a, m1) x Bell(b, c) x blank(m2); PhiPlus pairs for q=0, PsiPlus for q=1."""
    bell = gates.bell_amplitudes(BellKind.PHI_PLUS if q == 0 else BellKind.PSI_PLUS).reshape(2, 2)
    amps = np.einsum("am,bc,x->abcmx", bell, bell, blank).reshape(-1)
    return qcore.from_amplitudes(("a", "b", "c", "m1", "m2"), amps)


def _group_bm1m2_by_ac(state: qcore.StateVector) -> np.ndarray:
    """Reshape a canonical 5-qubit state into an 8x4 matrix: rows (b,m1,m2), cols (a,c)."""
    t = state.amps.reshape((2,) * 5)
    return np.transpose(t, (1, 3, 4, 0, 2)).reshape(8, 4)


def synthesize_split_unitary(blank: np.ndarray | None = None) -> SplitUnitary:
    """Solve for the splitting operator from its two input/output constraints.

    Each constraint pins the action of U (x) I on one 32-dim state, giving a
    rank-4 linear system over U's 64 entries; the orthogonal complement is
    completed orthonormally and the result is polished by polar projection.
    Raises if either constraint cannot be met, naming the offending one.
    """
    if blank is None:
        blank = np.array([1.0, 0.0], dtype=np.complex128)
    blank = np.asarray(blank, dtype=np.complex128)
    if blank.shape != (2,) or abs(np.linalg.norm(blank) - 1.0) > 1e-12:
        raise ValueError("blank must be a normalized single-qubit state")

    ins = [_encoded_round2_state(q) for q in (0, 1)]
    outs = [_target_split_state(q, blank) for q in (0, 1)]
    x = np.hstack([_group_bm1m2_by_ac(s) for s in ins])
    y = np.hstack([_group_bm1m2_by_ac(s) for s in outs])

    w, sv, vh = np.linalg.svd(x)
    rank = int(np.sum(sv > 1e-12))
    w_in, w_free = w[:, :rank], w[:, rank:]
    images = y @ vh.conj().T[:, :rank] / sv[:rank]
    iso_defect = np.abs(images.conj().T @ images - np.eye(rank)).max()
    if iso_defect > SYNTHESIS_FAIL_TOL:
        raise ValueError(
            "split constraints are not jointly isometric on (b, m1, m2): "
            f"the q=0/q=1 output overlaps disagree with the inputs by {iso_defect:.3e}"
        )
    wz = np.linalg.svd(images)[0]
    u0 = images @ w_in.conj().T + wz[:, rank:] @ w_free.conj().T
    pw, _, pvh = np.linalg.svd(u0)
    u = pw @ pvh  # polar projection onto the unitary group

    residuals = []
    for q in (0, 1):
        moved = qcore.apply_unitary(ins[q], u, ["b", "m1", "m2"])
        residuals.append(float(np.linalg.norm(moved.amps - outs[q].amps)))
    for q, r in enumerate(residuals):
        if r > SYNTHESIS_FAIL_TOL:
            raise ValueError(f"split constraint for q2={q} unmet: residual {r:.3e}")
    return SplitUnitary(
        matrix=u,
        residuals=(residuals[0], residuals[1]),
        unitarity_defect=qcore.unitarity_defect(u),
        blank=blank,
    )


def no_signaling_distances(su: SplitUnitary) -> dict[str, float]:
    """Trace distances between the q2=0 and q2=1 cases of everything Bob can
    measure right after the split.  All must vanish: the split may not leak
    the bit it is keyed on."""
    post = [
        qcore.apply_unitary(_encoded_round2_state(q), su.matrix, ["b", "m1", "m2"])
        for q in (0, 1)
    ]
    out = {}
    for keep in (("b",), ("m1",), ("m2",), ("b", "m1", "m2")):
        r0, r1 = (qcore.reduced_density(p, keep) for p in post)
        out["+".join(keep)] = qcore.trace_distance(r0, r1)
    return out


# ---------------------------------------------------------------------------
# attack execution


def execute_split(
    session: ProtocolSession,
    su: SplitUnitary,
    policy: MaintenancePolicy,
    rng: np.random.Generator,
) -> AttackState:
    """Apply the splitting operator during round 2 and keep m1 as bt.

    Requires the round-2 message to be encoded but not yet delivered, and an
    idle bt slot in the register.  The label swap m1 <-> bt is bookkeeping
    only; afterwards bt holds the Bell half paired with a, m1 is a fresh |0>,
    and m2 holds the blank counterfeit.
    """
    if session.round_index != 2 or session.pending_q is None:
        raise ValueError("split must run on the encoded, undelivered round-2 state")
    if KEPT_LABEL not in session.state.labels:
        raise ValueError(f"register has no {KEPT_LABEL!r} slot for the kept qubit")
    if qcore.probability_of_one(session.state, KEPT_LABEL) > 1e-12:
        raise ValueError(f"{KEPT_LABEL!r} slot is occupied")
    session.state = qcore.apply_unitary(session.state, su.matrix, ["b", "m1", "m2"])
    session.state = session.state.relabeled({"m1": KEPT_LABEL, KEPT_LABEL: "m1"})
    return AttackState(
        maintenance_policy=policy,
        rng=rng,
        q2_truth=session.pending_q,
    )


def pattern_pair_state(
    kind_at: BellKind,
    kind_bc: BellKind,
    labels: tuple[str, str, str, str] = ("a", KEPT_LABEL, "b", "c"),
) -> qcore.StateVector:
    """Four-qubit fraud pattern: one Bell pair on the first two labels
    (Alice's side), one on the last two (Charlie's side)."""
    b1 = gates.bell_amplitudes(kind_at).reshape(2, 2)
    b2 = gates.bell_amplitudes(kind_bc).reshape(2, 2)
    return qcore.from_amplitudes(labels, np.einsum("at,bc->atbc", b1, b2).reshape(-1))


def fraud_pattern_state(session: ProtocolSession, attack: AttackState) -> qcore.StateVector:
    """The intact-orbit pattern the pairs should be in right now (truth-side)."""
    if attack.q2_truth == 0:
        kind = BellKind.PHI_PLUS
    else:
        kind = BellKind.PSI_PLUS if attack.psi_family_now else BellKind.PHI_MINUS
    bell = gates.bell_amplitudes(kind).reshape(2, 2)
    labels = session.state.labels
    axis_of = {"a": 0, KEPT_LABEL: 1, "b": 2, "c": 3, "m1": 4, "m2": 5}
    if sorted(labels) != sorted(axis_of):
        raise ValueError(f"unexpected attack register labels {labels}")
    e0 = np.array([1.0, 0.0])
    amps = np.einsum("at,bc,m,n->atbcmn", bell, bell, e0, e0)
    amps = np.transpose(amps, axes=[axis_of[lab] for lab in labels])
    return qcore.from_amplitudes(labels, amps.reshape(-1))


def fraud_pattern_fidelity(session: ProtocolSession, attack: AttackState) -> float:
    return qcore.fidelity(session.state, fraud_pattern_state(session, attack))


def forward_round2_counterfeit(session: ProtocolSession, attack: AttackState) -> int:
    """Send the blank on to Charlie and let him decode round 2 honestly.

    Bob rotates the blank to |+> first: Charlie's decode CNOT is inert on an
    X eigenstate, so his measurement is uniform noise and the (b, c) pair
    survives.  Forwarding the raw |0> would let that CNOT copy c and collapse
    the pair.  Appends the round-2 record (Bob has no bit of his own here).
    """
    if session.round_index != 2 or session.pending_q is None:
        raise ValueError("round-2 counterfeit must follow the split in round 2")
    session.state = qcore.apply_unitary(session.state, gates.H, ["m2"])
    session.state = qcore.apply_unitary(session.state, gates.CNOT, ["c", "m2"])
    bit, session.state = qcore.measure(session.state, "m2", session.rng)
    if bit:
        session.state = qcore.apply_unitary(session.state, gates.X, ["m2"])
    attack.charlie_round2 = bit
    session.records.append(
        protocol.RoundRecord(
            round_index=2,
            parity="even",
            q=session.pending_q,
            bob_bit=None,
            charlie_bit=bit,
            carrier_fidelity=fraud_pattern_fidelity(session, attack),
        )
    )
    session.pending_q = None
    return bit


def choice_operators(
    angles: gates.ThetaTriple | None, choice: str, forward: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Bob's (bt, b) maintenance operators for one toggle.

    choice "h" is the plain Hadamard pair, "u" the conjugate-angle pair
    h(-ta) (x) h(-tc), "v" the transpose pair h(ta)^T (x) h(tc)^T; inverse
    operators are returned when the toggle runs in the inverse direction.
    """
    if choice == "h":
        return gates.H, gates.H
    if angles is None:
        raise ValueError(f"choice {choice!r} needs toggle angles; the plain protocol has none")
    ta, _, tc = angles.as_tuple()
    if choice == "u":
        on_bt, on_b = gates.h_theta(-ta), gates.h_theta(-tc)
    elif choice == "v":
        on_bt, on_b = gates.h_theta(ta).T.copy(), gates.h_theta(tc).T.copy()
    else:
        raise ValueError(f"unknown maintenance choice {choice!r}")
    if not forward:
        on_bt, on_b = on_bt.conj().T, on_b.conj().T
    return on_bt, on_b


def _maintenance_pair(
    session: ProtocolSession, attack: AttackState, forward: bool
) -> tuple[str, np.ndarray, np.ndarray]:
    """Bob's choice name and his (bt, b) operators for this toggle direction."""
    policy = attack.maintenance_policy
    if session.config.variant is Variant.PLAIN:
        if policy is not MaintenancePolicy.PLAIN_HADAMARD:
            raise ValueError(f"policy {policy.value!r} needs toggle angles; plain protocol has none")
        choice = "h"
    elif policy is MaintenancePolicy.PLAIN_HADAMARD:
        choice = "h"
    elif policy is MaintenancePolicy.RANDOM_GUESS:
        # one fair coin per toggle-direction pair: drawn at each forward
        # toggle, reused for the inverse one that follows; the lone inverse
        # toggle ending round 2 draws its own
        if forward or attack.current_guess is None:
            attack.current_guess = "u" if attack.rng.random() < 0.5 else "v"
        choice = attack.current_guess
    elif policy is MaintenancePolicy.KNOWN_THETA_U:
        choice = "u"
    else:
        choice = "v"
    on_bt, on_b = choice_operators(session.config.angles, choice, forward)
    return choice, on_bt, on_b


def maintain_carriers(session: ProtocolSession, attack: AttackState) -> str:
    """End-of-round toggle for an attacked session.

    Alice and Charlie toggle a and c honestly; Bob applies his maintenance
    choice on (bt, b) instead of the honest toggle on b.  Advances the round
    and flips the family phase.  Returns the choice played ("h", "u" or "v").
    """
    if session.pending_q is not None:
        raise ValueError("cannot toggle with a message still in flight")
    forward = session.parity == "odd"
    if session.config.variant is Variant.PLAIN:
        on_a = on_c = gates.H
    else:
        assert session.config.angles is not None
        ta, _, tc = session.config.angles.as_tuple()
        on_a, on_c = gates.h_theta(ta), gates.h_theta(tc)
        if not forward:
            on_a, on_c = on_a.conj().T, on_c.conj().T
    choice, on_bt, on_b = _maintenance_pair(session, attack, forward)
    session.state = qcore.apply_unitary(session.state, on_a, ["a"])
    session.state = qcore.apply_unitary(session.state, on_c, ["c"])
    session.state = qcore.apply_unitary(session.state, on_bt, [attack.kept_label])
    session.state = qcore.apply_unitary(session.state, on_b, ["b"])
    session.carrier_kind = (
        gates.CarrierKind.EVEN_PARITY
        if session.carrier_kind is gates.CarrierKind.GHZ
        else gates.CarrierKind.GHZ
    )
    session.round_index += 1
    attack.psi_family_now = not attack.psi_family_now
    return choice


def attack_decode_and_forward(session: ProtocolSession, attack: AttackState) -> tuple[int, int]:
    """One man-in-the-middle delivery for a round after the split.

    Bob disentangles the intercepted message with bt, reads his raw bit, then
    re-encodes a counterfeit through b for Charlie's honest decode.  On even
    rounds the counterfeit is raw XOR u for a fresh coin u, which Bob later
    claims as his share: Charlie's read then XORs with u to Alice's bit no
    matter which branch the pattern is in.  Returns (bob_learned, charlie_bit).
    """
    if session.pending_q is None:
        raise ValueError("no message in flight; Alice must encode first")
    if session.round_index <= 2:
        raise ValueError("decode-and-forward applies to rounds after the split")
    bt = attack.kept_label
    odd = session.parity == "odd"
    session.state = qcore.apply_unitary(session.state, gates.CNOT, [bt, "m1"])
    if odd:
        session.state = qcore.apply_unitary(session.state, gates.CNOT, [bt, "m2"])
    r1, session.state = qcore.measure(session.state, "m1", attack.rng)
    r2, session.state = qcore.measure(session.state, "m2", attack.rng)
    protocol.reset_messages(session, r1, r2)
    raw = r1 if odd else r1 ^ r2

    if odd:
        forward_bit, claim = raw, raw
    else:
        share = int(attack.rng.integers(0, 2))
        forward_bit, claim = raw ^ share, share
    if forward_bit:
        session.state = qcore.apply_unitary(session.state, gates.X, ["m2"])
    session.state = qcore.apply_unitary(session.state, gates.CNOT, ["b", "m2"])
    session.state = qcore.apply_unitary(session.state, gates.CNOT, ["c", "m2"])
    charlie_bit, session.state = qcore.measure(session.state, "m2", session.rng)
    if charlie_bit:
        session.state = qcore.apply_unitary(session.state, gates.X, ["m2"])

    attack.records[session.round_index] = RawRecord(
        round_index=session.round_index,
        parity=session.parity,
        raw=raw,
        claim=claim,
        psi_tagged=attack.psi_family_now,
    )
    session.records.append(
        protocol.RoundRecord(
            round_index=session.round_index,
            parity=session.parity,
            q=session.pending_q,
            bob_bit=claim,
            charlie_bit=charlie_bit,
            carrier_fidelity=fraud_pattern_fidelity(session, attack),
        )
    )
    session.pending_q = None
    return attack.learned_bit(session.round_index), charlie_bit


def record_honest_round(attack: AttackState, round_index: int, parity: str, bob_bit: int) -> None:
    """Pre-split rounds Bob played honestly still go into his ledger."""
    attack.records[round_index] = RawRecord(
        round_index=round_index,
        parity=parity,
        raw=bob_bit,
        claim=bob_bit,
        psi_tagged=False,
        honest=True,
    )


def resolve_from_round2(attack: AttackState, alice_bit: int) -> PatternHypothesis:
    """Hearing q2 itself names the pattern outright."""
    if attack.pattern_hypothesis is PatternHypothesis.UNKNOWN:
        attack.pattern_hypothesis = (
            PatternHypothesis.PHI if alice_bit == 0 else PatternHypothesis.PSI
        )
    attack.round2_bit = alice_bit
    return attack.pattern_hypothesis


def resolve_pattern(attack: AttackState, announcement: tuple[int, int]) -> PatternHypothesis:
    """Update the pattern hypothesis from one announced (round, alice_bit).

    Only rounds whose record is family-tagged carry pattern information: a
    tagged raw equal to the announcement means the Phi branch, a complemented
    one the Psi branch.  Untagged rounds (odd rounds in protocol runs, where
    both branches show a Phi-family pair) are consistency checks only.  Once
    resolved the hypothesis never reverts.
    """
    round_index, alice_bit = announcement
    rec = attack.records.get(round_index)
    if rec is None:
        raise KeyError(f"no recorded bit for announced round {round_index}")
    if rec.psi_tagged and attack.pattern_hypothesis is PatternHypothesis.UNKNOWN:
        attack.pattern_hypothesis = (
            PatternHypothesis.PHI if rec.raw == alice_bit else PatternHypothesis.PSI
        )
    return attack.pattern_hypothesis
