"""Command-line front end: ``catport run | verify | sweep | analyze``.

Exit codes: 0 pass, 1 verification failure, 2 usage or configuration error.
All randomness comes from ``--seed`` (default 20011); reports land in
``--report``/``--out-dir``, else ``$CATPORT_REPORT_DIR``, else ``./reports``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import report as rpt
from .analysis import (
    channel_negativity_report,
    closed_form_emax,
    frame_for_overlap,
    teleportable_entanglement_range,
    teleportable_entropy,
)
from .errors import CatportError
from .locc import run_protocol
from .protocol_math import SchmidtFrame
from .protocols import ChannelSpec, TeleportInput, build_script, min_fidelity
from .qstate import entanglement_entropy, schmidt
from .verify import (
    DEFAULT_SEED,
    FID_TOL,
    check_analysis,
    check_cat,
    check_entanglement_range,
    check_ghz,
    check_ghz_class,
    check_ghz_class_with_fault,
    check_order,
    check_probabilistic,
    parse_fault,
    verify_all,
)

PROTOCOLS = ("ghz", "ghz-class", "cat")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- scenarios --------------------------------------------------------------

SCENARIO_DEFAULTS = {
    "protocol": "ghz-class",
    "N": None,
    "r": [0.5],
    "epsilon": 0.0,
    "alpha2": 0.5,
    "beta_phase": 0.0,
    "a2": 0.5,
    "seed": DEFAULT_SEED,
}


def _float_list(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",")]
    except ValueError:
        raise UsageError(f"expected a number or comma-separated numbers, got {text!r}") from None


def load_scenario(args) -> dict:
    """Scenario file fields overridden by any flags given on the command line."""
    scenario = dict(SCENARIO_DEFAULTS)
    if getattr(args, "scenario", None):
        try:
            data = json.loads(Path(args.scenario).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read scenario {args.scenario}: {exc}") from None
        unknown = set(data) - set(SCENARIO_DEFAULTS) - {"phis", "phi_primes", "frame", "frame1", "frame2"}
        if unknown:
            raise UsageError(f"unknown scenario fields {sorted(unknown)}")
        scenario.update(data)
    for key in SCENARIO_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            scenario[key] = value
    scenario["r"] = _float_list(scenario["r"])
    if scenario["protocol"] not in PROTOCOLS:
        raise UsageError(f"protocol must be one of {PROTOCOLS}")
    if scenario["N"] is None:
        scenario["N"] = 2 if scenario["protocol"] != "cat" else max(len(scenario["r"]) + 1, 3)
    scenario["N"] = int(scenario["N"])
    if scenario["protocol"] in ("ghz", "ghz-class") and scenario["N"] != 2:
        raise UsageError(f"{scenario['protocol']} runs with N = 2")
    for key in ("alpha2", "a2"):
        if not 0.0 <= float(scenario[key]) <= 1.0:
            raise UsageError(f"{key} must lie in [0, 1]")
    return scenario


def _vec(pairs) -> np.ndarray:
    return rpt.amplitudes_from_json(pairs)


def _frame(data) -> SchmidtFrame:
    return SchmidtFrame(_vec(data[0]), _vec(data[1]))


def build_scenario(scenario: dict):
    """``(TeleportInput, ChannelSpec)`` described by a scenario dict."""
    n = scenario["N"]
    alpha = np.sqrt(float(scenario["alpha2"]))
    beta = np.sqrt(1.0 - float(scenario["alpha2"])) * np.exp(1j * float(scenario["beta_phase"]))
    a2 = float(scenario["a2"])
    a, b = np.sqrt(a2), np.sqrt(1.0 - a2)
    if scenario["protocol"] == "ghz":
        f1 = _frame(scenario["frame1"]) if "frame1" in scenario else SchmidtFrame.computational()
        f2 = _frame(scenario["frame2"]) if "frame2" in scenario else SchmidtFrame.computational()
        return TeleportInput.schmidt(alpha, beta, f1, f2), ChannelSpec.ghz(a, b)
    if "phis" in scenario:
        phis = [_vec(v) for v in scenario["phis"]]
        primes = [_vec(v) for v in scenario["phi_primes"]]
    else:
        rs = scenario["r"] * (n - 1) if len(scenario["r"]) == 1 else scenario["r"]
        if len(rs) != n - 1:
            raise UsageError(f"need {n - 1} overlap values for N = {n}, got {len(rs)}")
        frames = [frame_for_overlap(r, float(scenario["epsilon"])) for r in rs]
        phis = [f.phi for f in frames]
        primes = [f.phi_prime for f in frames]
    frame = _frame(scenario["frame"]) if "frame" in scenario else SchmidtFrame.computational()
    inp = TeleportInput(alpha, beta, phis, primes, frame)
    family = "ghz-class" if scenario["protocol"] == "ghz-class" else "cat"
    return inp, ChannelSpec(family, tuple(phis), tuple(primes), a, b)


def _scenario_json(scenario: dict) -> dict:
    return {k: scenario[k] for k in SCENARIO_DEFAULTS} | {
        k: scenario[k] for k in ("phis", "phi_primes", "frame", "frame1", "frame2") if k in scenario
    }


# -- run --------------------------------------------------------------------


def cmd_run(args) -> int:
    scenario = load_scenario(args)
    inp, channel = build_scenario(scenario)
    script = build_script(inp, channel)
    seed = int(scenario["seed"])
    if args.enumerate:
        branches = run_protocol(script)
    else:
        branches = [run_protocol(script, "sample", seed=seed)]

    passed = all(b.fidelity >= 1 - FID_TOL for b in branches if b.success)
    for br in branches:
        print(rpt.transcript_text(br.transcript))
        if br.success:
            print(f"final state ({','.join(br.final_state.labels)}): {rpt.ket_string(br.final_state)}")
            print(f"fidelity to target: {br.fidelity:.12f}")
        elif br.probability < 1e-14:
            print("unreachable branch (probability 0)")
        else:
            print("protocol failed on this branch (filter did not succeed)")
        print()
    print(f"target ({','.join(script.target.labels)}): {rpt.ket_string(script.target)}")
    print("RESULT:", "PASS" if passed else "FAIL")

    doc = {
        "command": "run",
        "protocol": script.name,
        "mode": "enumerate" if args.enumerate else "sample",
        "seed": seed,
        "scenario": _scenario_json(scenario),
        "target": rpt.state_json(script.target),
        "branches": [rpt.branch_json(b) for b in branches],
        "passed": passed,
    }
    path = Path(args.report) if args.report else rpt.report_dir() / f"run-{scenario['protocol']}-seed{seed}.json"
    rpt.write_text(path, rpt.dumps(doc))
    print(f"report: {path}")
    return EXIT_OK if passed else EXIT_FAIL


# -- verify -----------------------------------------------------------------


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.inject_fault:
        results = [check_ghz_class_with_fault(args.trials, rng, parse_fault(args.inject_fault))]
    elif args.all or args.protocol is None:
        results = verify_all(args.trials, args.seed, args.cat_trials)
    elif args.protocol == "ghz":
        results = [check_ghz(args.trials, rng)]
    elif args.protocol == "ghz-class":
        results = [check_ghz_class(args.trials, rng), check_order(args.trials, 0, rng)]
    elif args.protocol == "cat":
        ns = [args.N] if args.N else range(2, 7)
        results = [check_cat(n, args.cat_trials, rng) for n in ns]
        if not args.N or args.N == 3:
            results.append(check_order(0, 20, rng))
    elif args.protocol == "probabilistic":
        results = [check_probabilistic(max(args.trials // 20, 2), rng)]
    else:
        results = [check_analysis(), check_entanglement_range()]

    for res in results:
        print(res.line())
        if "branches_per_run" in res.extra:
            print(f"  branches per run: {res.extra['branches_per_run']}")
        for msg in res.failures:
            print(f"  - {msg}")
    ok = all(r.passed for r in results)
    print(
        "SUMMARY:",
        "PASS" if ok else "FAIL",
        f"min_fidelity={min(r.min_fidelity for r in results):.15f}",
        f"max_prob_defect={max(r.max_probability_defect for r in results):.3e}",
    )
    doc = {
        "command": "verify",
        "seed": args.seed,
        "trials": args.trials,
        "passed": ok,
        "checks": [
            {
                "name": r.name,
                "passed": r.passed,
                "runs": r.runs,
                "branches": r.branches,
                "min_fidelity": rpt.num(r.min_fidelity),
                "max_probability_defect": rpt.num(r.max_probability_defect),
                "failures": r.failures,
            }
            for r in results
        ],
    }
    path = Path(args.report) if args.report else rpt.report_dir() / "verify.json"
    rpt.write_text(path, rpt.dumps(doc))
    return EXIT_OK if ok else EXIT_FAIL


# -- analyze / sweep --------------------------------------------------------


def parse_grid(text: str) -> list[float]:
    """``"start:stop:step"`` (inclusive) or a single number."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        start, stop, step = map(float, parts)
    except ValueError:
        raise UsageError(f"grid must be 'start:stop:step', got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError(f"empty or invalid grid {text!r}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _check_unit(values, name):
    if any(not 0.0 <= v <= 1.0 for v in values):
        raise UsageError(f"{name} values must lie in [0, 1]")


def _emit(rows, args, stem: str, x: str, ys: list[str], title: str) -> None:
    text = rpt.csv_text(rows)
    sys.stdout.write(text)
    out_dir = args.out_dir or os.environ.get(rpt.REPORT_DIR_ENV)
    if out_dir:
        out = Path(out_dir)
        rpt.write_text(out / f"{stem}.csv", text)
        if not args.no_plot and len(rows) > 1:
            rpt.plot_curve(rows, x, ys, out / f"{stem}.png", title)


def cmd_analyze(args) -> int:
    if args.curve == "negativity":
        rs = parse_grid(args.r_grid) if args.r is None else _float_list(args.r)
        _check_unit(rs, "r")
        rows = []
        for r in rs:
            frame = frame_for_overlap(r)
            rep = channel_negativity_report(ChannelSpec.ghz_class(frame.phi, frame.phi_prime))
            rows.append({"r": r, "negativity_AB2": rep.negativity_AB2, "negativity_AB1": rep.negativity_AB1})
        _emit(rows, args, "negativity", "r", ["negativity_AB2", "negativity_AB1"], "reduced channel negativity")
    elif args.curve == "e-max":
        rs = parse_grid(args.r_grid) if args.r is None else _float_list(args.r)
        _check_unit(rs, "r")
        rows = []
        for r in rs:
            res = teleportable_entanglement_range(frame_for_overlap(r), args.points)
            if abs(res.e_max - closed_form_emax(r)) > 1e-6:
                print(f"e_max grid/closed-form mismatch at r={r}", file=sys.stderr)
                return EXIT_FAIL
            rows.append({"r": r, "entropy": res.e_max})
        _emit(rows, args, "e_max", "r", ["entropy"], "largest teleportable entanglement")
    else:
        rs = _float_list(args.r if args.r is not None else 0.5)
        alphas = parse_grid(args.alpha2_grid)
        _check_unit(rs, "r")
        _check_unit(alphas, "alpha2")
        rows = [
            {"r": r, "alpha2": p, "entropy": teleportable_entropy(frame_for_overlap(r), p)}
            for r in rs
            for p in alphas
        ]
        _emit(rows, args, "entropy", "alpha2", ["entropy"], "entanglement of the teleportable plane")
    return EXIT_OK


def _sweep_point(job):
    protocol, n, r, alpha2 = job
    scenario = dict(SCENARIO_DEFAULTS, protocol=protocol, N=n, r=[r], alpha2=alpha2)
    inp, channel = build_scenario(scenario)
    branches = run_protocol(build_script(inp, channel))
    good = [b for b in branches if b.success]
    state = good[0].final_state
    ent = entanglement_entropy(schmidt(state, state.labels[-1:]))
    return ent, min_fidelity(branches)


def cmd_sweep(args) -> int:
    alphas = parse_grid(args.alpha2_grid)
    _check_unit(alphas, "alpha2")
    r = 0.0 if args.protocol == "ghz" else float(args.r)
    _check_unit([r], "r")
    n = args.N or (2 if args.protocol != "cat" else 3)
    jobs = [(args.protocol, n, r, p) for p in alphas]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    rows = [{"r": r, "alpha2": p, "entropy": ent} for p, (ent, _) in zip(alphas, results)]
    _emit(rows, args, f"sweep-{args.protocol}", "alpha2", ["entropy"], f"{args.protocol} teleported entanglement")
    worst = min(f for _, f in results)
    if worst < 1 - FID_TOL:
        print(f"fidelity failure: min branch fidelity {worst!r}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="catport", description="Entanglement teleportation through GHZ-class and cat-like channels")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one protocol (sampled or fully enumerated)")
    run.add_argument("--scenario", help="JSON scenario file; flags override its fields")
    run.add_argument("--protocol", choices=PROTOCOLS)
    run.add_argument("--N", type=int)
    run.add_argument("--r", help="overlap |<phi|phi'>|, or comma list for cat channels")
    run.add_argument("--epsilon", type=float, help="overlap phase")
    run.add_argument("--alpha2", type=float, help="|alpha|^2 of the teleported state")
    run.add_argument("--beta-phase", dest="beta_phase", type=float)
    run.add_argument("--a2", type=float, help="channel weight |a|^2 (0.5 = deterministic)")
    run.add_argument("--seed", type=int)
    run.add_argument("--enumerate", action="store_true", help="print every branch instead of one sample")
    run.add_argument("--report", help="report path")
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="exhaustive randomized verification")
    ver.add_argument("--all", action="store_true")
    ver.add_argument("--protocol", choices=PROTOCOLS + ("probabilistic", "analysis"))
    ver.add_argument("--N", type=int)
    ver.add_argument("--trials", type=int, default=200)
    ver.add_argument("--cat-trials", type=int, default=50)
    ver.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ver.add_argument("--inject-fault", help=argparse.SUPPRESS)
    ver.add_argument("--report", help="report path")
    ver.set_defaults(func=cmd_verify)

    ana = sub.add_parser("analyze", help="channel negativity and teleportable-entanglement curves")
    ana.add_argument("--curve", choices=("negativity", "e-max", "entropy"), required=True)
    ana.add_argument("--r-grid", default="0:1:0.1")
    ana.add_argument("--r", help="single r (or comma list) instead of --r-grid")
    ana.add_argument("--alpha2-grid", default="0:1:0.01")
    ana.add_argument("--points", type=int, default=101, help="|alpha|^2 grid size for e-max")
    ana.add_argument("--out-dir")
    ana.add_argument("--no-plot", action="store_true")
    ana.set_defaults(func=cmd_analyze)

    sw = sub.add_parser("sweep", help="run a protocol across an |alpha|^2 grid")
    sw.add_argument("--protocol", choices=PROTOCOLS, default="ghz-class")
    sw.add_argument("--r", default="0.5")
    sw.add_argument("--N", type=int)
    sw.add_argument("--alpha2-grid", default="0:1:0.05")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out-dir")
    sw.add_argument("--no-plot", action="store_true")
    sw.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, CatportError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
