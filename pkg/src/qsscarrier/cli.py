"""Command-line front end: run experiments, verify identities, sweep angles.

Reports are machine-readable JSON (a human summary goes to stdout); identical
spec and seed give byte-identical reports apart from the timestamp field.

Exit codes: 0 success, 1 invalid config, 2 identity-suite failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import adversary, experiments, gates, qcore
from .adversary import MaintenancePolicy
from .gates import BellKind, CarrierKind, ThetaTriple
from .protocol import AnnounceOrder, ProtocolConfig, Variant

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IDENTITY = 2
EXIT_IO = 3

IDENTITY_TOL = 1e-10
RESIDUAL_TOL = 1e-8
NO_SIGNALING_TOL = 1e-12
DEGENERACY_FLOOR = 1e-3

POLICY_BY_FLAG = {
    "u": MaintenancePolicy.KNOWN_THETA_U,
    "v": MaintenancePolicy.KNOWN_THETA_V,
    "random": MaintenancePolicy.RANDOM_GUESS,
    "plain": MaintenancePolicy.PLAIN_HADAMARD,
}

_CONFIG_KEYS = (
    "rounds",
    "seed",
    "variant",
    "theta",
    "attack",
    "policy",
    "announce_frac",
    "order",
    "trials",
    "tolerance",
    "workers",
    "out",
    "transcripts",
)


class CliError(Exception):
    """Invalid configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); keep 2 for identities
        raise CliError(message)


@dataclass(frozen=True)
class ExperimentSpec:
    """One resolved run request: protocol config plus attack and output choices."""

    config: ProtocolConfig
    attack: str
    policy: MaintenancePolicy | None
    trials: int
    tolerance: float
    workers: int
    out: str | None
    transcripts: str | None

    def echo(self) -> dict:
        cfg = self.config
        return {
            "rounds": cfg.num_rounds,
            "seed": cfg.rng_seed,
            "variant": cfg.variant.value,
            "theta": list(cfg.angles.as_tuple()) if cfg.angles is not None else None,
            "attack": self.attack,
            "policy": self.policy.value if self.policy is not None else None,
            "announce_frac": cfg.announce_fraction,
            "order": cfg.announce_order.value,
            "trials": self.trials,
            "tolerance": self.tolerance,
        }


def _load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise CliError("config file must hold a JSON object of flag values")
    for key in obj:
        if key not in _CONFIG_KEYS:
            raise CliError(f"unknown config key: {key}")
    return obj


def _merged(ns: argparse.Namespace, key: str, default):
    value = getattr(ns, key, None)
    if value is not None:
        return value
    if getattr(ns, "config", None):
        file_vals = ns._config_file_values
        if key in file_vals and file_vals[key] is not None:
            return file_vals[key]
    return default


def build_spec(ns: argparse.Namespace) -> ExperimentSpec:
    """Resolve flags, config file, and defaults into a validated spec."""
    ns._config_file_values = _load_config_file(ns.config) if getattr(ns, "config", None) else {}

    rounds = int(_merged(ns, "rounds", 20))
    seed = int(_merged(ns, "seed", 0))
    variant_name = str(_merged(ns, "variant", "plain"))
    theta = _merged(ns, "theta", None)
    attack = str(_merged(ns, "attack", "none"))
    policy_name = _merged(ns, "policy", None)
    frac = float(_merged(ns, "announce_frac", 0.2))
    order_name = str(_merged(ns, "order", "bob-last"))
    trials = int(_merged(ns, "trials", 1))
    tolerance = float(_merged(ns, "tolerance", 0.0))
    workers = int(_merged(ns, "workers", 1))
    out = _merged(ns, "out", None)
    transcripts = _merged(ns, "transcripts", None)

    if trials < 1:
        raise CliError("trials must be >= 1")
    if rounds < 1:
        raise CliError("rounds must be >= 1")
    if not 0.0 < frac <= 1.0:
        raise CliError("announce fraction must be in (0, 1]")
    if workers < 1:
        raise CliError("workers must be >= 1")
    try:
        variant = Variant(variant_name)
    except ValueError:
        raise CliError(f"variant must be plain or theta, got {variant_name!r}") from None
    try:
        order = AnnounceOrder(order_name)
    except ValueError:
        raise CliError(f"order must be alice-first or bob-last, got {order_name!r}") from None
    if attack not in ("none", "split"):
        raise CliError(f"attack must be none or split, got {attack!r}")

    angles = None
    if variant is Variant.THETA:
        if theta is None:
            raise CliError("variant theta requires --theta A B")
        if len(theta) != 2:
            raise CliError("--theta takes exactly two angles; the third is derived")
        try:
            angles = ThetaTriple.from_ab(float(theta[0]), float(theta[1]))
            angles.require_hardened()
        except ValueError as exc:
            raise CliError(str(exc)) from None
    elif theta is not None:
        raise CliError("--theta is only meaningful with --variant theta")

    policy = None
    if attack == "split":
        if rounds < 2:
            raise CliError("split attack needs at least 2 rounds")
        if policy_name is None:
            raise CliError("attack split requires --policy u|v|random|plain")
        if str(policy_name) not in POLICY_BY_FLAG:
            raise CliError(f"policy must be u, v, random or plain, got {policy_name!r}")
        policy = POLICY_BY_FLAG[str(policy_name)]
        if variant is Variant.PLAIN and policy is not MaintenancePolicy.PLAIN_HADAMARD:
            raise CliError("policy u|v|random requires --variant theta")
    elif policy_name is not None:
        raise CliError("--policy requires --attack split")

    config = ProtocolConfig(
        variant=variant,
        angles=angles,
        num_rounds=rounds,
        rng_seed=seed,
        announce_fraction=frac,
        announce_order=order,
    )
    return ExperimentSpec(
        config=config,
        attack=attack,
        policy=policy,
        trials=trials,
        tolerance=tolerance,
        workers=workers,
        out=out,
        transcripts=transcripts,
    )


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text)


# ---------------------------------------------------------------------------
# run


def cmd_run(ns: argparse.Namespace) -> int:
    spec = build_spec(ns)
    results = experiments.run_trials(
        spec.config,
        spec.trials,
        base_seed=spec.config.rng_seed,
        policy=spec.policy if spec.attack == "split" else None,
        tolerance=spec.tolerance,
        workers=spec.workers,
    )
    stats = experiments.aggregate(results)
    report = {
        "command": "run",
        "timestamp": _timestamp(),
        "config": spec.echo(),
        "results": stats.to_json_obj(),
    }
    print(f"trials:                {stats.trials} x {stats.num_rounds} rounds"
          f" ({'split attack' if stats.attacked else 'honest'})")
    print(f"detection probability: {stats.detection_probability:.4f}")
    print(f"mean mismatch rate:    {stats.mean_mismatch_rate:.4f}")
    print(f"odd/even error rates:  {stats.odd_error_rate:.4f} / {stats.even_error_rate:.4f}")
    print(f"mean carrier fidelity: {stats.mean_carrier_fidelity:.6f}")
    if stats.mean_recovered_fraction is not None:
        print(f"bit recovery rate:     {stats.mean_recovered_fraction:.4f}")
    try:
        if spec.out:
            _write_text(spec.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
        if spec.transcripts:
            tdir = Path(spec.transcripts)
            tdir.mkdir(parents=True, exist_ok=True)
            for idx, res in enumerate(results):
                (tdir / f"trial_{idx:04d}.jsonl").write_text(res.transcript.to_jsonl())
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _sample_hardened_triple(rng: np.random.Generator, margin: float = 0.3) -> ThetaTriple:
    while True:
        a, b = rng.uniform(0.0, gates.TWO_PI, size=2)
        triple = ThetaTriple.from_ab(float(a), float(b))
        if min(gates.distance_to_degenerate(t) for t in triple.as_tuple()) >= margin:
            return triple


def _sample_hardened_pair(rng: np.random.Generator, margin: float = 0.3) -> tuple[float, float]:
    out = []
    while len(out) < 2:
        t = float(rng.uniform(0.0, gates.TWO_PI))
        if gates.distance_to_degenerate(t) >= margin:
            out.append(t)
    return out[0], out[1]


def _state_fidelity(x: np.ndarray, y: np.ndarray) -> float:
    return float(abs(np.vdot(x, y)) ** 2)


def _toggle_fidelities(ta: float, tb: float, tc: float) -> tuple[float, float]:
    """(forward GHZ -> even-parity, inverse even-parity -> GHZ) fidelities."""
    ghz = gates.carrier_amplitudes(CarrierKind.GHZ)
    even = gates.carrier_amplitudes(CarrierKind.EVEN_PARITY)
    m = np.kron(np.kron(gates.h_theta(ta), gates.h_theta(tb)), gates.h_theta(tc))
    return _state_fidelity(m @ ghz, even), _state_fidelity(m.conj().T @ even, ghz)


def _conjunction_image(
    ta: float, tc: float, start: qcore.StateVector, choice: str, forward: bool
) -> qcore.StateVector:
    """Honest toggles on (a, c) plus Bob's maintenance pair on (bt, b)."""
    on_a, on_c = gates.h_theta(ta), gates.h_theta(tc)
    if choice == "u":
        on_bt, on_b = gates.h_theta(-ta), gates.h_theta(-tc)
    else:
        on_bt, on_b = gates.h_theta(ta).T.copy(), gates.h_theta(tc).T.copy()
    if not forward:
        on_a, on_c = on_a.conj().T, on_c.conj().T
        on_bt, on_b = on_bt.conj().T, on_b.conj().T
    state = qcore.apply_unitary(start, on_a, ["a"])
    state = qcore.apply_unitary(state, on_c, ["c"])
    state = qcore.apply_unitary(state, on_bt, ["bt"])
    return qcore.apply_unitary(state, on_b, ["b"])


def _closest_pattern(state: qcore.StateVector) -> tuple[str, float]:
    best_name, best_fid = "", -1.0
    for k1 in BellKind:
        for k2 in BellKind:
            fid = qcore.fidelity(state, adversary.pattern_pair_state(k1, k2))
            if fid > best_fid:
                best_name, best_fid = f"{k1.name}(a,bt) {k2.name}(b,c)", fid
    return best_name, best_fid


def run_identity_suite(
    thetas: list[float] | None, seed: int = 0
) -> list[tuple[str, bool | None, str]]:
    """All identity checks as (name, ok, detail); ok=None is informational.

    With no angles given, angles are sampled away from the degenerate points.
    A two-angle input derives the third to satisfy the sum constraint; a
    three-angle input is taken raw, so deliberately broken triples show the
    identities failing.
    """
    rng = np.random.default_rng(seed)
    items: list[tuple[str, bool | None, str]] = []

    ghz = gates.carrier_amplitudes(CarrierKind.GHZ)
    even = gates.carrier_amplitudes(CarrierKind.EVEN_PARITY)
    h3 = np.kron(np.kron(gates.H, gates.H), gates.H)
    f1 = _state_fidelity(h3 @ ghz, even)
    f2 = _state_fidelity(h3 @ even, ghz)
    items.append(
        ("plain-toggle", min(f1, f2) >= 1 - IDENTITY_TOL,
         f"GHZ<->even-parity fidelities {f1:.12f}, {f2:.12f}")
    )

    if thetas is None:
        triples = [_sample_hardened_triple(rng).as_tuple() for _ in range(25)]
        raw_mode = False
    elif len(thetas) == 2:
        triples = [ThetaTriple.from_ab(thetas[0], thetas[1]).as_tuple()]
        raw_mode = False
    else:
        triples = [tuple(thetas)]
        raw_mode = True

    worst = 1.0
    for ta, tb, tc in triples:
        fwd, inv = _toggle_fidelities(ta, tb, tc)
        worst = min(worst, fwd, inv)
    residue = float(np.mod(sum(triples[0]), gates.TWO_PI))
    residue = min(residue, gates.TWO_PI - residue)
    detail = f"worst fidelity {worst:.12f} over {len(triples)} triple(s)"
    if raw_mode and residue > gates.ANGLE_SUM_TOL:
        detail += f" (angle sum residue {residue:.3f} breaks the identity, as the constraint requires)"
    items.append(("theta-toggle", worst >= 1 - IDENTITY_TOL, detail))

    hardened_ok = True
    hardened_detail = "sum constraint and degeneracy gap hold"
    try:
        for ta, tb, tc in triples:
            ThetaTriple(ta, tb, tc).require_hardened()
    except ValueError as exc:
        hardened_ok = False
        hardened_detail = str(exc)
    items.append(("hardened-angles", hardened_ok, hardened_detail))

    su = adversary.synthesize_split_unitary()
    split_ok = su.unitarity_defect < IDENTITY_TOL and max(su.residuals) < RESIDUAL_TOL
    items.append(
        ("split-maps", split_ok,
         f"residuals {su.residuals[0]:.3e}, {su.residuals[1]:.3e};"
         f" unitarity defect {su.unitarity_defect:.3e}")
    )

    dists = adversary.no_signaling_distances(su)
    ns_worst = max(dists.values())
    items.append(
        ("split-no-signaling", ns_worst < NO_SIGNALING_TOL,
         f"max trace distance over Bob's subsystems {ns_worst:.3e}")
    )

    # ten plain toggles: PhiPlus pattern is fixed, the other orbit alternates
    # PhiMinus <-> PsiPlus
    state = adversary.pattern_pair_state(BellKind.PHI_PLUS, BellKind.PHI_PLUS)
    alt = adversary.pattern_pair_state(BellKind.PHI_MINUS, BellKind.PHI_MINUS)
    orbit = [BellKind.PSI_PLUS, BellKind.PHI_MINUS]
    worst_plain = 1.0
    for step in range(10):
        for lab in ("a", "bt", "b", "c"):
            state = qcore.apply_unitary(state, gates.H, [lab])
            alt = qcore.apply_unitary(alt, gates.H, [lab])
        expect = orbit[step % 2]
        worst_plain = min(
            worst_plain,
            qcore.fidelity(state, adversary.pattern_pair_state(BellKind.PHI_PLUS, BellKind.PHI_PLUS)),
            qcore.fidelity(alt, adversary.pattern_pair_state(expect, expect)),
        )
    items.append(
        ("plain-maintenance", worst_plain >= 1 - IDENTITY_TOL,
         f"both patterns track their orbit for 10 toggles; worst fidelity {worst_plain:.12f}")
    )

    if thetas is None:
        pairs = [_sample_hardened_pair(rng) for _ in range(10)]
    else:
        pairs = [(triples[0][0], triples[0][2])]
    phi_plus = adversary.pattern_pair_state(BellKind.PHI_PLUS, BellKind.PHI_PLUS)
    worst_a = 1.0
    for ta, tc in pairs:
        for forward in (True, False):
            img = _conjunction_image(ta, tc, phi_plus, "u", forward)
            worst_a = min(worst_a, qcore.fidelity(img, phi_plus))
    items.append(
        ("conjugate-maintenance", worst_a >= 1 - IDENTITY_TOL,
         f"PhiPlus pattern preserved both directions; worst fidelity {worst_a:.12f}")
    )

    ta, tc = pairs[0]
    phi_minus = adversary.pattern_pair_state(BellKind.PHI_MINUS, BellKind.PHI_MINUS)
    img = _conjunction_image(ta, tc, phi_minus, "v", True)
    psi_p = qcore.fidelity(img, adversary.pattern_pair_state(BellKind.PSI_PLUS, BellKind.PSI_PLUS))
    psi_m = qcore.fidelity(img, adversary.pattern_pair_state(BellKind.PSI_MINUS, BellKind.PSI_MINUS))
    name, best = _closest_pattern(img)
    items.append(
        ("transpose-maintenance", None,
         f"recorded at theta=({ta:.3f}, {tc:.3f}): PhiMinus pattern maps to"
         f" PsiPlus/PsiMinus pattern with fidelity {psi_p:.6f}/{psi_m:.6f};"
         f" closest pattern {name} at {best:.6f}")
    )

    d0 = gates.best_scalar_distance(gates.h_theta(0.0).T, gates.h_theta(-0.0))
    dpi = gates.best_scalar_distance(gates.h_theta(np.pi).T, gates.h_theta(-np.pi))
    deg_ok = d0 < IDENTITY_TOL and dpi < IDENTITY_TOL
    deg_detail = f"transpose = conjugate-angle at 0 and pi (distances {d0:.2e}, {dpi:.2e})"
    check_angles = [t for pair in pairs for t in pair]
    hazard = [t for t in check_angles if gates.distance_to_degenerate(t) <= 1e-6]
    if hazard:
        deg_ok = False
        deg_detail = (
            f"degenerate-angle hazard: at theta={hazard[0]:.3f} the transpose pair equals the"
            " conjugate-angle pair and the defense collapses to the plain toggle"
        )
    else:
        worst_sep = min(
            gates.best_scalar_distance(gates.h_theta(t).T, gates.h_theta(-t))
            for t in check_angles
        )
        deg_ok = deg_ok and worst_sep > DEGENERACY_FLOOR
        deg_detail += f"; distinct elsewhere (min scalar distance {worst_sep:.3e})"
    items.append(("transpose-degeneracy", deg_ok, deg_detail))
    return items


def cmd_verify(ns: argparse.Namespace) -> int:
    thetas = [float(t) for t in ns.theta] if ns.theta is not None else None
    if thetas is not None and len(thetas) not in (2, 3):
        raise CliError("--theta takes two angles (third derived) or three raw angles")
    items = run_identity_suite(thetas, seed=int(ns.seed or 0))
    failed = False
    for name, ok, detail in items:
        if ok is None:
            tag = "INFO"
        elif ok:
            tag = "PASS"
        else:
            tag, failed = "FAIL", True
        print(f"{tag}  {name:24s} {detail}")
    return EXIT_IDENTITY if failed else EXIT_OK


# ---------------------------------------------------------------------------
# sweep and synthesize


def cmd_sweep(ns: argparse.Namespace) -> int:
    grid = [float(g) for g in ns.grid]
    policy = POLICY_BY_FLAG[ns.policy or "random"]
    for g in grid:
        try:
            experiments.symmetric_triple(g).require_hardened()
        except ValueError as exc:
            raise CliError(f"grid angle {g}: {exc}") from None
    rows = experiments.sweep(
        grid,
        trials=int(ns.trials or 200),
        num_rounds=int(ns.rounds or 50),
        announce_fraction=float(ns.announce_frac or 0.2),
        policy=policy,
        base_seed=int(ns.seed or 0),
        workers=int(ns.workers or 1),
    )
    print(f"{'theta':>8s} {'detect_prob':>12s} {'mismatch':>10s} {'recovered':>10s}")
    for row in rows:
        print(
            f"{row['theta']:8.3f} {row['detection_probability']:12.4f}"
            f" {row['mean_mismatch_rate']:10.4f} {row['mean_recovered_fraction']:10.4f}"
        )
    try:
        if ns.out:
            if ns.out.endswith(".csv"):
                with open(ns.out, "w", newline="") as fh:
                    fields = ["theta", "angles", "trials", "rounds",
                              "detection_probability", "mean_mismatch_rate",
                              "mean_recovered_fraction"]
                    writer = csv.DictWriter(fh, fieldnames=fields)
                    writer.writeheader()
                    writer.writerows(rows)
            else:
                report = {"command": "sweep", "timestamp": _timestamp(), "rows": rows}
                _write_text(ns.out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_synthesize(ns: argparse.Namespace) -> int:
    su = adversary.synthesize_split_unitary()
    print(f"residuals:        {su.residuals[0]:.3e}, {su.residuals[1]:.3e}")
    print(f"unitarity defect: {su.unitarity_defect:.3e}")
    try:
        if ns.out:
            _write_text(ns.out, su.to_json() + "\n")
        else:
            print(su.to_json())
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsscarrier", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo protocol runs, honest or attacked")
    run.add_argument("--rounds", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--variant", choices=["plain", "theta"])
    run.add_argument("--theta", type=float, nargs=2, metavar=("A", "B"),
                     help="toggle angles for a and b; c is derived as -(A+B) mod 2pi")
    run.add_argument("--attack", choices=["none", "split"])
    run.add_argument("--policy", choices=["u", "v", "random", "plain"])
    run.add_argument("--announce-frac", dest="announce_frac", type=float)
    run.add_argument("--order", choices=["alice-first", "bob-last"])
    run.add_argument("--trials", type=int)
    run.add_argument("--tolerance", type=float)
    run.add_argument("--workers", type=int)
    run.add_argument("--out", help="write the aggregate JSON report here")
    run.add_argument("--transcripts", help="directory for per-trial JSONL transcripts")
    run.add_argument("--config", help="JSON file of flag values; explicit flags win")
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="check the carrier/attack identities")
    ver.add_argument("--theta", type=float, nargs="+", metavar="T",
                     help="two angles (third derived) or three raw angles")
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify)

    sw = sub.add_parser("sweep", help="attack statistics across toggle angles")
    sw.add_argument("--grid", type=float, nargs="+", required=True,
                    help="angles g; each grid point runs theta_a = theta_c = g")
    sw.add_argument("--trials", type=int)
    sw.add_argument("--rounds", type=int)
    sw.add_argument("--announce-frac", dest="announce_frac", type=float)
    sw.add_argument("--policy", choices=["u", "v", "random", "plain"])
    sw.add_argument("--seed", type=int)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--out", help=".json or .csv table")
    sw.set_defaults(func=cmd_sweep)

    syn = sub.add_parser("synthesize", help="solve for the splitting unitary")
    syn.add_argument("--out", help="write the operator JSON here")
    syn.set_defaults(func=cmd_synthesize)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        return ns.func(ns)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
