"""Monte Carlo harness: honest and attacked runs, detection statistics, sweeps.

Each trial owns three independent RNG streams spawned from one seed (protocol
measurements, Bob's private coins, announcement sampling), so trials can fan
out to worker processes and aggregate in any order without changing results.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

import numpy as np

from . import adversary, detection, gates, protocol, qcore
from .adversary import AttackState, MaintenancePolicy, SplitUnitary
from .detection import Announcement, DetectionReport
from .gates import BellKind, ThetaTriple
from .protocol import AnnounceOrder, ProtocolConfig, Transcript, Variant

INTACT_TOL = 1e-10

SeedLike = int | np.random.SeedSequence


@dataclass(frozen=True)
class TrialResult:
    transcript: Transcript
    announcements: list[Announcement]
    report: DetectionReport
    announced_odd: int
    announced_even: int
    attacked: bool
    recovered_fraction: float | None = None
    hypothesis: str | None = None
    min_pattern_fidelity: float | None = None
    min_restore_fidelity: float | None = None
    max_disguise_distance: float | None = None


@dataclass(frozen=True)
class AggregateStats:
    trials: int
    num_rounds: int
    attacked: bool
    detection_probability: float
    mean_mismatch_rate: float
    odd_error_rate: float
    even_error_rate: float
    mean_carrier_fidelity: float
    min_carrier_fidelity: float
    mean_recovered_fraction: float | None = None
    max_disguise_distance: float | None = None

    def to_json_obj(self) -> dict:
        obj = {
            "trials": self.trials,
            "rounds": self.num_rounds,
            "attacked": self.attacked,
            "detection_probability": self.detection_probability,
            "mean_mismatch_rate": self.mean_mismatch_rate,
            "odd_error_rate": self.odd_error_rate,
            "even_error_rate": self.even_error_rate,
            "mean_carrier_fidelity": self.mean_carrier_fidelity,
            "min_carrier_fidelity": self.min_carrier_fidelity,
        }
        if self.mean_recovered_fraction is not None:
            obj["mean_recovered_fraction"] = self.mean_recovered_fraction
        if self.max_disguise_distance is not None:
            obj["max_disguise_distance"] = self.max_disguise_distance
        return obj


def trial_rngs(seed: SeedLike) -> tuple[np.random.Generator, ...]:
    """(protocol, Bob, announcement) generators, order-independent across trials."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return tuple(np.random.default_rng(child) for child in ss.spawn(3))


def build_announcements(
    transcript: Transcript,
    fraction: float,
    rng: np.random.Generator,
    attack: AttackState | None = None,
    order: AnnounceOrder = AnnounceOrder.BOB_LAST,
) -> list[Announcement]:
    """Open a random subset of rounds and collect the three parties' claims.

    Honest claims come straight off the transcript.  A cheating Bob answers
    from his attack ledger, resolving his pattern hypothesis as Alice's bits
    come out.  His round-2 claim is pure fabrication: announcing last he can
    name alice XOR charlie and always pass; announcing before Charlie he can
    only guess the blank read, which fails half the time.
    """
    rounds = detection.select_rounds(transcript.num_rounds, fraction, rng)
    by_round = {rec.round_index: rec for rec in transcript.records}
    anns = []
    for r in rounds:
        rec = by_round[r]
        alice, charlie = rec.q, rec.charlie_bit
        if attack is None:
            bob = rec.bob_bit
        elif r == 2:
            adversary.resolve_from_round2(attack, alice)
            if order is AnnounceOrder.BOB_LAST:
                bob = alice ^ charlie
            else:
                bob = alice ^ int(attack.rng.integers(0, 2))
        else:
            adversary.resolve_pattern(attack, (r, alice))
            bob = attack.records[r].claim
        assert bob is not None
        anns.append(Announcement(r, alice, bob, charlie))
    return anns


def _parity_split(announcements: list[Announcement]) -> tuple[int, int]:
    odd = sum(1 for a in announcements if a.round_index % 2 == 1)
    return odd, len(announcements) - odd


def run_honest_trial(
    config: ProtocolConfig,
    seed: SeedLike | None = None,
    instrument_disguise: bool = False,
    tolerance: float = 0.0,
) -> TrialResult:
    """One honest end-to-end run plus its announcement check.

    With instrumentation on, every round also computes the in-flight (m1, m2)
    marginal for the bit actually sent and for its flip; their trace distance
    is what an interceptor without carrier access could exploit.
    """
    rng_p, _rng_bob, rng_ann = trial_rngs(config.rng_seed if seed is None else seed)
    max_dist = None
    if not instrument_disguise:
        transcript = protocol.run_protocol(config, rng=rng_p)
    else:
        session = protocol.init_session(config, rng=rng_p)
        bits = [int(b) for b in rng_p.integers(0, 2, size=config.num_rounds)]
        max_dist = 0.0
        for q in bits:
            pre = session.state
            protocol.encode_round(session, q)
            sent = qcore.reduced_density(session.state, ("m1", "m2"))
            flipped = qcore.reduced_density(
                protocol.encoded_state(pre, session.parity, 1 - q), ("m1", "m2")
            )
            max_dist = max(max_dist, qcore.trace_distance(sent, flipped))
            protocol.deliver_and_decode(session)
            protocol.toggle_carrier(session)
        transcript = Transcript(num_rounds=config.num_rounds, records=session.records)
    anns = build_announcements(transcript, config.announce_fraction, rng_ann)
    report = detection.evaluate(transcript, anns, tolerance)
    odd_n, even_n = _parity_split(anns)
    fids = [rec.carrier_fidelity for rec in transcript.records]
    return TrialResult(
        transcript=transcript,
        announcements=anns,
        report=report,
        announced_odd=odd_n,
        announced_even=even_n,
        attacked=False,
        min_restore_fidelity=min(fids),
        max_disguise_distance=max_dist,
    )


def run_attack_trial(
    config: ProtocolConfig,
    policy: MaintenancePolicy,
    seed: SeedLike | None = None,
    su: SplitUnitary | None = None,
    tolerance: float = 0.0,
) -> TrialResult:
    """One full split-attack run: honest round 1, split in round 2, then
    man-in-the-middle decode-and-forward under the given maintenance policy,
    ending with the announcement phase and Bob's bit recovery."""
    if config.num_rounds < 2:
        raise ValueError("the split happens in round 2; need at least 2 rounds")
    rng_p, rng_bob, rng_ann = trial_rngs(config.rng_seed if seed is None else seed)
    if su is None:
        su = adversary.synthesize_split_unitary()
    session = protocol.init_session(config, rng=rng_p, extra_labels=adversary.ATTACK_EXTRA_LABELS)
    bits = [int(b) for b in rng_p.integers(0, 2, size=config.num_rounds)]

    attack: AttackState | None = None
    honest_round1 = None
    for i, q in enumerate(bits, start=1):
        protocol.encode_round(session, q)
        if i == 1:
            honest_round1, _ = protocol.deliver_and_decode(session)
            protocol.toggle_carrier(session)
            continue
        if i == 2:
            attack = adversary.execute_split(session, su, policy, rng_bob)
            assert honest_round1 is not None
            adversary.record_honest_round(attack, 1, "odd", honest_round1)
            adversary.forward_round2_counterfeit(session, attack)
        else:
            assert attack is not None
            adversary.attack_decode_and_forward(session, attack)
        adversary.maintain_carriers(session, attack)
    assert attack is not None

    transcript = Transcript(num_rounds=config.num_rounds, records=session.records)
    anns = build_announcements(
        transcript, config.announce_fraction, rng_ann, attack, config.announce_order
    )
    report = detection.evaluate(transcript, anns, tolerance)
    odd_n, even_n = _parity_split(anns)
    recovered = sum(
        attack.learned_bit(i) == q for i, q in enumerate(bits, start=1)
    ) / len(bits)
    pattern_fids = [rec.carrier_fidelity for rec in transcript.records if rec.round_index >= 2]
    return TrialResult(
        transcript=transcript,
        announcements=anns,
        report=report,
        announced_odd=odd_n,
        announced_even=even_n,
        attacked=True,
        recovered_fraction=recovered,
        hypothesis=attack.pattern_hypothesis.value,
        min_pattern_fidelity=min(pattern_fids),
    )


def _honest_worker(args) -> TrialResult:
    config, seed, instrument, tolerance = args
    return run_honest_trial(config, seed, instrument, tolerance)


def _attack_worker(args) -> TrialResult:
    config, policy, seed, su, tolerance = args
    return run_attack_trial(config, policy, seed, su, tolerance)


def run_trials(
    config: ProtocolConfig,
    trials: int,
    base_seed: int = 0,
    policy: MaintenancePolicy | None = None,
    instrument_disguise: bool = False,
    tolerance: float = 0.0,
    workers: int = 1,
) -> list[TrialResult]:
    """Independent trials from spawned seeds; policy=None runs honestly."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seeds = np.random.SeedSequence(base_seed).spawn(trials)
    if policy is None:
        jobs = [(config, s, instrument_disguise, tolerance) for s in seeds]
        worker = _honest_worker
    else:
        su = adversary.synthesize_split_unitary()
        jobs = [(config, policy, s, su, tolerance) for s in seeds]
        worker = _attack_worker
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            return pool.map(worker, jobs)
    return [worker(job) for job in jobs]


def aggregate(results: list[TrialResult]) -> AggregateStats:
    """Merge per-trial results by summation; order-independent."""
    n = len(results)
    if n == 0:
        raise ValueError("no trial results to aggregate")
    detected = sum(r.report.cheating_detected for r in results)
    odd_n = sum(r.announced_odd for r in results)
    even_n = sum(r.announced_even for r in results)
    odd_bad = sum(r.report.odd_mismatches for r in results)
    even_bad = sum(r.report.even_mismatches for r in results)
    attacked = results[0].attacked
    if attacked:
        fids = [r.min_pattern_fidelity for r in results]
        recov = [r.recovered_fraction for r in results]
        mean_recov = float(np.mean(recov))
    else:
        fids = [r.min_restore_fidelity for r in results]
        mean_recov = None
    dists = [r.max_disguise_distance for r in results if r.max_disguise_distance is not None]
    return AggregateStats(
        trials=n,
        num_rounds=results[0].transcript.num_rounds,
        attacked=attacked,
        detection_probability=detected / n,
        mean_mismatch_rate=float(np.mean([r.report.rate for r in results])),
        odd_error_rate=odd_bad / odd_n if odd_n else 0.0,
        even_error_rate=even_bad / even_n if even_n else 0.0,
        mean_carrier_fidelity=float(np.mean(fids)),
        min_carrier_fidelity=float(np.min(fids)),
        mean_recovered_fraction=mean_recov,
        max_disguise_distance=max(dists) if dists else None,
    )


def symmetric_triple(theta: float) -> ThetaTriple:
    """Angles with the receiver-side pair equal: (g, -2g mod 2pi, g)."""
    return ThetaTriple.from_ab(theta, float(np.mod(-2.0 * theta, 2.0 * np.pi)))


def sweep(
    grid: list[float],
    trials: int = 200,
    num_rounds: int = 50,
    announce_fraction: float = 0.2,
    policy: MaintenancePolicy = MaintenancePolicy.RANDOM_GUESS,
    base_seed: int = 0,
    workers: int = 1,
) -> list[dict]:
    """Attack statistics per grid angle theta_a = theta_c = g (theta variant)."""
    rows = []
    for idx, g in enumerate(grid):
        triple = symmetric_triple(g)
        config = ProtocolConfig(
            variant=Variant.THETA,
            angles=triple,
            num_rounds=num_rounds,
            rng_seed=base_seed,
            announce_fraction=announce_fraction,
        )
        stats = aggregate(
            run_trials(config, trials, base_seed + idx, policy=policy, workers=workers)
        )
        rows.append(
            {
                "theta": float(g),
                "angles": list(triple.as_tuple()),
                "trials": trials,
                "rounds": num_rounds,
                "detection_probability": stats.detection_probability,
                "mean_mismatch_rate": stats.mean_mismatch_rate,
                "mean_recovered_fraction": stats.mean_recovered_fraction,
            }
        )
    return rows


def survival_probability(
    angles: ThetaTriple | None,
    policy: MaintenancePolicy,
    trials: int = 2000,
    base_seed: int = 0,
) -> float:
    """Chance one toggle leaves both fraud pairs in exactly the pattern they
    held before it.

    Samples the split bit and the round parity uniformly, places the pairs in
    the pattern the intact orbit would show at that point (PhiPlus pairs for
    q2 = 0; PhiMinus at odd rounds and PsiPlus at even ones for q2 = 1),
    plays one maintenance step, and scores survival as fidelity 1 with the
    pre-toggle pattern.  angles=None runs the plain-protocol variant.
    """
    rng = np.random.default_rng(base_seed)
    labels = ("a", "bt", "b", "c")
    survived = 0
    for _ in range(trials):
        q2 = int(rng.integers(0, 2))
        odd_round = bool(rng.integers(0, 2))
        if q2 == 0:
            kind = BellKind.PHI_PLUS
        else:
            kind = BellKind.PHI_MINUS if odd_round else BellKind.PSI_PLUS
        bell = gates.bell_amplitudes(kind).reshape(2, 2)
        amps = np.einsum("at,bc->atbc", bell, bell).reshape(-1)
        state = qcore.from_amplitudes(labels, amps)

        if policy is MaintenancePolicy.PLAIN_HADAMARD:
            choice = "h"
        elif policy is MaintenancePolicy.KNOWN_THETA_U:
            choice = "u"
        elif policy is MaintenancePolicy.KNOWN_THETA_V:
            choice = "v"
        else:
            choice = "u" if rng.random() < 0.5 else "v"
        if angles is None:
            on_a = on_c = gates.H
        else:
            ta, _, tc = angles.as_tuple()
            on_a, on_c = gates.h_theta(ta), gates.h_theta(tc)
            if not odd_round:
                on_a, on_c = on_a.conj().T, on_c.conj().T
        on_bt, on_b = adversary.choice_operators(angles, choice, odd_round)
        after = qcore.apply_unitary(state, on_a, ["a"])
        after = qcore.apply_unitary(after, on_c, ["c"])
        after = qcore.apply_unitary(after, on_bt, ["bt"])
        after = qcore.apply_unitary(after, on_b, ["b"])
        survived += qcore.fidelity(after, state) >= 1.0 - INTACT_TOL
    return survived / trials
