"""Command-line interface.

Subcommands: validate, build, simulate, stationary, uphill-scan, plot,
duality-check, repro.  Exit codes: 0 success / scientific pass, 1 scientific
check failed, 2 input error.  Every run that writes files also writes a JSON
manifest recording the command, input hash, seeds, version and outputs.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, analytic, experiments
from .duality import DUALITY_TOL, check_self_duality
from .model import ProcessModel
from .rates import MacroParams, build_model, validate
from .simulate import SimConfig, initial_configuration, run_ensemble
from .svg import emit_svg


class InputError(Exception):
    pass


def parse_params(path) -> MacroParams:
    """Load macroscopic parameters from JSON, rejecting malformed input."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"params file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc
    try:
        params = MacroParams.from_json(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad params file {path}: {exc}") from exc
    for name in ("rhoL1", "rhoL2", "rhoR1", "rhoR2"):
        v = getattr(params, name)
        if not 0.0 <= v <= 1.0:
            raise InputError(f"{name}={v} outside [0, 1]")
    if params.rhoL1 + params.rhoL2 > 1.0:
        raise InputError(f"rhoL1+rhoL2={params.rhoL1 + params.rhoL2} exceeds 1")
    if params.rhoR1 + params.rhoR2 > 1.0:
        raise InputError(f"rhoR1+rhoR2={params.rhoR1 + params.rhoR2} exceeds 1")
    return params


def _file_hash(path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]
    except OSError:
        return "unavailable"


def _write_manifest(out_path: Path, command: str, t0: float, outputs,
                    params_path=None, seeds=None, extra=None) -> None:
    doc = {"command": command, "version": __version__,
           "wall_time_s": round(time.time() - t0, 3),
           "outputs": [str(o) for o in outputs]}
    if params_path is not None:
        doc["params_sha256"] = _file_hash(params_path)
    if seeds is not None:
        doc["seeds"] = seeds
    if extra:
        doc.update(extra)
    out_path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def _fmt(v) -> str:
    return format(float(v), ".12g")


def cmd_validate(args) -> int:
    params = parse_params(args.params)
    verdict = validate(params)
    print(json.dumps(verdict.to_json(), indent=1))
    return 0 if verdict.valid else 1


def cmd_build(args) -> int:
    t0 = time.time()
    params = parse_params(args.params)
    verdict = validate(params)
    if not verdict.valid:
        print(json.dumps(verdict.to_json(), indent=1))
        print("parameters rejected; no model written", file=sys.stderr)
        return 1
    model = build_model(params, args.n_sites)
    out = Path(args.out)
    model.save(out)
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"),
                    "build", t0, [out], params_path=args.params)
    print(f"wrote {out}")
    return 0


def cmd_simulate(args) -> int:
    t0 = time.time()
    try:
        model = ProcessModel.load(args.model)
    except FileNotFoundError as exc:
        raise InputError(f"model file not found: {args.model}") from exc
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"bad model file {args.model}: {exc}") from exc
    cfg = SimConfig(seed=args.seed, burn_in_time=args.burn_in,
                    sample_time=args.sample, replicas=args.replicas)
    eta0 = initial_configuration(model, seed=args.seed)
    stats = run_ensemble(model, eta0, cfg)
    out = Path(args.out)
    with open(out, "w") as fh:
        fh.write("site,species,mean,stderr\n")
        for z in range(stats.mu.shape[0]):
            for a in range(3):
                fh.write(f"{z + 1},{a},{_fmt(stats.mu[z, a])},"
                         f"{_fmt(stats.stderr[z, a])}\n")
    bonds = out.with_name(out.stem + "_bonds" + out.suffix)
    with open(bonds, "w") as fh:
        fh.write("bond,total_current,stderr\n")
        for e in range(stats.current.shape[0]):
            fh.write(f"{e + 1},{_fmt(stats.current[e])},"
                     f"{_fmt(stats.current_stderr[e])}\n")
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "simulate",
                    t0, [out, bonds], seeds=[args.seed],
                    extra={"events": stats.event_count,
                           "replicas": args.replicas,
                           "absorbed": stats.absorbed})
    if stats.absorbed:
        print("note: the dynamics reached an absorbing state", file=sys.stderr)
    print(f"wrote {out} and {bonds} ({stats.event_count} events)")
    return 0


def _profile_csv(path: Path, samples) -> None:
    with open(path, "w") as fh:
        fh.write("x,rho1,rho2,J1,J2\n")
        for row in samples:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def cmd_stationary(args) -> int:
    t0 = time.time()
    params = parse_params(args.params)
    verdict = validate(params)
    if not verdict.valid:
        print(json.dumps(verdict.to_json(), indent=1))
        return 1
    sol = analytic.stationary_continuum(params)
    out = Path(args.out)
    _profile_csv(out, sol.sample(args.samples))
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "stationary",
                    t0, [out], params_path=args.params)
    print(f"wrote {out}")
    return 0


def cmd_uphill_scan(args) -> int:
    t0 = time.time()
    params = parse_params(args.params)
    verdict = validate(params)
    if not verdict.valid:
        print(json.dumps(verdict.to_json(), indent=1))
        return 1
    g = args.grid
    if not 0.0 < g <= 0.5:
        raise InputError(f"grid step {g} outside (0, 0.5]")
    values = np.round(np.arange(0.0, 1.0 + 0.5 * g, g), 12)
    out = Path(args.out)
    rows = 0
    with open(out, "w") as fh:
        fh.write("rhoL1,rhoL2,rhoR1,rhoR2,global,local1,local2,"
                 "minJ1_x,minJ1,minJ2_x,minJ2\n")
        for rL1 in values:
            for rL2 in values:
                if rL1 + rL2 > 1.0 + 1e-12:
                    continue
                for rR1 in values:
                    for rR2 in values:
                        if rR1 + rR2 > 1.0 + 1e-12:
                            continue
                        bc = analytic.BoundaryDensities(rL1, rL2, rR1, rR2)
                        sol = analytic.stationary_continuum(params, bc)
                        v = analytic.classify_uphill(sol, bc)
                        fh.write(",".join([
                            _fmt(rL1), _fmt(rL2), _fmt(rR1), _fmt(rR2),
                            v.global_uphill or "none",
                            str(int(v.local1)), str(int(v.local2)),
                            _fmt(v.min_J1[0]), _fmt(v.min_J1[1]),
                            _fmt(v.min_J2[0]), _fmt(v.min_J2[1])]) + "\n")
                        rows += 1
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "uphill-scan",
                    t0, [out], params_path=args.params, extra={"rows": rows})
    print(f"wrote {out} ({rows} boundary tuples)")
    return 0


def cmd_plot(args) -> int:
    t0 = time.time()
    try:
        lines = [ln for ln in Path(args.profile).read_text().splitlines()
                 if ln.strip()]
    except OSError as exc:
        raise InputError(f"profile file not found: {args.profile}") from exc
    if len(lines) < 2:
        raise InputError(f"profile file {args.profile} holds no samples")
    raw = np.atleast_2d(np.genfromtxt(lines[1:], delimiter=","))
    try:
        svg = emit_svg(raw)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = Path(args.out)
    out.write_text(svg)
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "plot", t0,
                    [out])
    print(f"wrote {out}")
    return 0


def cmd_duality_check(args) -> int:
    params = parse_params(args.params)
    try:
        report = check_self_duality(params, args.sites,
                                    exploratory=args.exploratory)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    for kind, res in sorted(report.per_operator.items()):
        print(f"operator {kind}: max residual {res:.3e}")
    print(f"combined generator: max residual {report.combined:.3e}")
    print(f"overall: {'PASS' if report.passed else 'FAIL'} "
          f"(tolerance {DUALITY_TOL:g})")
    return 0 if report.passed else 1


def cmd_repro(args) -> int:
    t0 = time.time()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = parse_params(args.params) if args.params else None
    if args.what == "figures":
        panels = experiments.reproduce_figures(params or experiments.REFERENCE_PARAMS)
        outputs = []
        results = []
        ok = True
        for i, panel in enumerate(panels, start=1):
            csv_path = out_dir / f"panel{i}.csv"
            _profile_csv(csv_path, panel.samples)
            svg_path = out_dir / f"panel{i}.svg"
            svg_path.write_text(emit_svg(panel.samples))
            outputs += [csv_path, svg_path]
            v = panel.verdict
            results.append({"boundary": list(panel.boundary),
                            "local1": v.local1,
                            "global": v.global_uphill,
                            "min_J1": list(v.min_J1)})
            ok = ok and v.local1 and v.global_uphill is None
        _write_manifest(out_dir / "manifest.json", "repro figures", t0, outputs,
                        params_path=args.params,
                        extra={"panels": results, "pass": ok})
        print(f"figures: {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1
    if args.what == "sim-vs-ode":
        p = params if params is not None else replace(
            experiments.REFERENCE_PARAMS, rhoL1=0.2, rhoL2=0.6, rhoR1=0.3,
            rhoR2=0.1)
        replicas = args.replicas or 24
        cfg = SimConfig(seed=args.seed, burn_in_time=400.0, sample_time=4000.0,
                        replicas=replicas)
        report = experiments.sim_vs_ode(p, args.n_sites, cfg)
        csv_path = out_dir / "sim_vs_ode.csv"
        with open(csv_path, "w") as fh:
            fh.write("site,species,mean_sim,mean_ode,stderr\n")
            N = report.mu_sim.shape[0]
            for z in range(N):
                for a in range(2):
                    fh.write(f"{z + 1},{a + 1},{_fmt(report.mu_sim[z, a])},"
                             f"{_fmt(report.mu_ode[z, a])},"
                             f"{_fmt(report.stderr[z, a])}\n")
        # max-over-sites gate: with ~2 n_sites near-independent deviations a
        # healthy run peaks around 2.5 standard errors
        ok = report.max_sigma_units <= 3.5
        _write_manifest(out_dir / "manifest.json", "repro sim-vs-ode", t0,
                        [csv_path], params_path=args.params, seeds=[args.seed],
                        extra={"max_sigma_units": report.max_sigma_units,
                               "events": report.event_count, "pass": ok})
        print(f"sim-vs-ode: max |diff|/SE = {report.max_sigma_units:.2f} "
              f"-> {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1
    if args.what == "hydro":
        p = params if params is not None else experiments.REFERENCE_PARAMS
        report = experiments.hydro_convergence(p, replicas=args.replicas or 300,
                                               seed=args.seed)
        csv_path = out_dir / "hydro.csv"
        with open(csv_path, "w") as fh:
            fh.write("epsilon,l1_error,noise_floor\n")
            for eps, err, fl in zip(report.epsilons, report.errors,
                                    report.noise_floors):
                fh.write(f"{_fmt(eps)},{_fmt(err)},{_fmt(fl)}\n")
        ok = report.monotone_flag and report.errors[-1] < 0.05
        _write_manifest(out_dir / "manifest.json", "repro hydro", t0, [csv_path],
                        params_path=args.params, seeds=[args.seed],
                        extra={**report.to_json(), "pass": ok})
        print(f"hydro: errors {[round(e, 4) for e in report.errors]} "
              f"-> {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1
    raise InputError(f"unknown repro target {args.what!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uphill",
        description="Boundary-driven two-species reaction-diffusion exclusion "
                    "processes: build, simulate, analyse.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check macroscopic parameters")
    p.add_argument("--params", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("build", help="emit the explicit chain model as JSON")
    p.add_argument("--params", required=True)
    p.add_argument("--n-sites", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("simulate", help="run the exact stochastic simulation")
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--burn-in", type=float, default=0.0)
    p.add_argument("--sample", type=float, required=True)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stationary", help="closed-form stationary profile CSV")
    p.add_argument("--params", required=True)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("uphill-scan", help="classify uphill over a density grid")
    p.add_argument("--params", required=True)
    p.add_argument("--grid", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_uphill_scan)

    p = sub.add_parser("plot", help="render a profile CSV as SVG")
    p.add_argument("profile")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("duality-check", help="verify self-duality exhaustively")
    p.add_argument("--params", required=True)
    p.add_argument("--sites", type=int, default=3)
    p.add_argument("--exploratory", action="store_true",
                   help="probe parameters outside the symmetric family")
    p.set_defaults(func=cmd_duality_check)

    p = sub.add_parser("repro", help="orchestrated reproductions")
    p.add_argument("what", choices=["figures", "sim-vs-ode", "hydro"])
    p.add_argument("--out", required=True)
    p.add_argument("--params", default=None)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--replicas", type=int, default=0,
                   help="0 picks a per-experiment default")
    p.add_argument("--n-sites", type=int, default=20)
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
