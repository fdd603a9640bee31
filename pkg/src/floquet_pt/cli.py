"""Command-line front end.

    floquet-pt <subcommand> --config job.json --out DIR [--jobs N] [--full]

Exit codes: 0 success, 2 config/schema error, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from .sweep import (SUBCOMMANDS, ConfigError, PointFailure, parse_job, point_model,
                    run_grid, write_csv, write_manifest, write_svg)

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _resolve_jobs(arg) -> int:
    if arg is not None:
        return max(1, int(arg))
    env = os.environ.get("FLOQUET_PT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"FLOQUET_PT_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _single_model(job):
    return point_model(job.base, {})


def cmd_spectrum(job, out):
    from .analysis import gamma_total, mode_diagnostics
    from .floquet import converged_spectrum

    eng = job.engine
    model = _single_model(job)
    spec = converged_spectrum(model, "rotated", eng["tau"] * model.period, eng["qe_tol"],
                              eng["spectrum_max_steps"], eng["scheme"])
    rows = []
    for j in range(spec.size):
        d = mode_diagnostics(spec, j, model)
        rows.append((j + 1, d.quasienergy.real, d.quasienergy.imag, d.ipr, d.left_weight,
                     d.defect_weight))
    write_csv(os.path.join(out, "result.csv"),
              ["mode_index", "re_eps", "im_eps", "ipr", "left_weight", "defect_weight"], rows)
    return {"converged": spec.converged, "drift": spec.drift, "n_steps": spec.n_steps,
            "gamma_total": gamma_total(spec)}


def cmd_threshold(job, out):
    from .analysis import find_threshold

    eng = job.engine
    res = find_threshold(_single_model(job), eng["gamma_max"], eng["coarse_step"],
                         eng["refine_tol"], eng["cutoff"], qe_tol=eng["qe_tol"],
                         max_steps=eng["max_steps"])
    hi = res.bracket[1]
    write_csv(os.path.join(out, "result.csv"),
              ["gamma_c", "status", "gamma_low", "gamma_high", "gamma_max_probed", "cutoff",
               "n_evaluations", "n_unconverged"],
              [(res.gamma_c, res.status, res.bracket[0], -1.0 if math.isinf(hi) else hi,
                res.gamma_max_probed, res.cutoff, res.n_evaluations, res.n_unconverged)])
    return {"status": res.status, "samples": [list(s) for s in res.samples]}


def cmd_threshold_map(job, out, jobs):
    values, failures, n_cached = run_grid(job, out, jobs)
    rows = []
    for iy, ix, _ in job.points():
        rows.append((job.y_axis.values[iy], job.x_axis.values[ix], values[iy, ix]))
    complete = not failures
    if complete:
        write_csv(os.path.join(out, "result.csv"), [job.y_axis.name, job.x_axis.name, job.quantity],
                  rows)
        write_svg(os.path.join(out, "result.svg"), values, job.x_axis, job.y_axis, job.quantity,
                  -1.0 if job.quantity == "gamma_c" else None)
    info = {"cached_points": n_cached, "failed_points": failures,
            "completed_points": int(np.isfinite(values).sum())}
    if failures:
        raise PointFailure(json.dumps(info))
    return info


def cmd_winding_scan(job, out):
    from .effective import hf_couplings
    from .topology import floquet_windings, static_winding

    n_k = job.engine["n_k"] or 512
    rows = []
    for _, _, over in job.points():
        model = point_model(job.base, over)
        lat = model.lattice
        ratio = model.drive.amplitude / model.drive.omega
        row = [over[job.x_axis.name]]
        try:
            fw = floquet_windings(model, n_k)
            row += ["ok", fw.nu1.nu, fw.nu2.nu, float(fw.nu0), float(fw.nu_pi),
                    max(fw.nu1.chiral_certificate, fw.nu2.chiral_certificate)]
        except (ArithmeticError, ValueError) as exc:
            status = "gapless" if "gapless" in str(exc) else "chiral-broken"
            row += [status, "", "", "", "", ""]
        try:
            j1, j2 = hf_couplings(ratio, lat.a, lat.b, lat.j_hop)
            row.append(static_winding(j1, j2, lat.a, lat.b).nu)
        except ArithmeticError:
            row.append("")
        rows.append(row)
    write_csv(os.path.join(out, "result.csv"),
              [job.x_axis.name, "status", "nu1", "nu2", "nu0", "nu_pi", "chiral_certificate",
               "static_nu"], rows)
    return {}


def cmd_chiral_scan(job, out):
    from .topology import chiral_expectation_scan

    model = _single_model(job)
    n_k = job.engine["n_k"] or 128
    rows = []
    maxima = {}
    for frac in job.engine["taus"]:
        scan = chiral_expectation_scan(model, float(frac) * model.period, n_k)
        maxima[str(frac)] = scan.max_abs
        for k, sz, touch in zip(scan.k, scan.sigma_z, scan.touching):
            rows.append((float(frac), k, sz, bool(touch)))
    write_csv(os.path.join(out, "result.csv"), ["tau_over_T", "k", "sigma_z", "touching"], rows)
    return {"max_abs_sigma_z": maxima}


def cmd_edge_trace(job, out):
    from .analysis import sigma_p_trace

    eng = job.engine
    model = _single_model(job)
    trace = sigma_p_trace(model, int(eng["n_samples"]), int(eng["steps_per_period"]))
    rows = [(t, t / model.period, s) for t, s in zip(trace.times, trace.sigma_p)]
    write_csv(os.path.join(out, "result.csv"), ["time", "time_over_T", "sigma_p"], rows)
    return {"max_sigma_p": float(trace.sigma_p.max())}


def cmd_effective_compare(job, out):
    from .effective import (double_drive_effective_chain, effective_spectrum, fold_to_zone,
                            hf_effective_chain)
    from .floquet import converged_spectrum
    from .linalg import sort_order

    eng = job.engine
    model = _single_model(job)
    spec = converged_spectrum(model, "rotated", 0.0, eng["qe_tol"], eng["spectrum_max_steps"],
                              eng["scheme"])
    if model.defect.co_driven:
        chain = double_drive_effective_chain(model)
    else:
        chain = hf_effective_chain(model)
    eff = fold_to_zone(effective_spectrum(chain), model.period)
    eff = eff[sort_order(eff)]
    rows = [(j + 1, e.real, e.imag, f.real, f.imag, abs(e - f))
            for j, (e, f) in enumerate(zip(spec.quasienergies, eff))]
    write_csv(os.path.join(out, "result.csv"),
              ["mode_index", "exact_re", "exact_im", "effective_re", "effective_im",
               "abs_deviation"], rows)
    return {"max_deviation": max(r[-1] for r in rows)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floquet-pt", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="job JSON file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker processes (default: $FLOQUET_PT_THREADS or CPU count)")
        p.add_argument("--full", action="store_true", help="apply the config's 'full' overrides")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        job = parse_job(raw, args.subcommand, args.full)
        jobs = _resolve_jobs(args.jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO
    manifest = os.path.join(args.out, "manifest.json")
    handlers = {
        "spectrum": cmd_spectrum, "threshold": cmd_threshold,
        "winding-scan": cmd_winding_scan, "chiral-scan": cmd_chiral_scan,
        "edge-trace": cmd_edge_trace, "effective-compare": cmd_effective_compare,
    }
    code, status, extra = EXIT_OK, "complete", {}
    try:
        if args.subcommand == "threshold-map":
            extra = cmd_threshold_map(job, args.out, jobs)
        else:
            extra = handlers[args.subcommand](job, args.out)
    except PointFailure as exc:
        code, status, extra = EXIT_NUMERIC, "partial", json.loads(str(exc))
    except OSError as exc:
        code, status, extra = EXIT_IO, "failed", {"error": str(exc)}
    except (ArithmeticError, ValueError) as exc:
        code, status, extra = EXIT_NUMERIC, "failed", {"error": f"{type(exc).__name__}: {exc}"}
    timings = {"wall_seconds": time.perf_counter() - start, "workers": jobs}
    try:
        write_manifest(manifest, job, status, timings, extra)
    except OSError as exc:
        print(f"error: cannot write manifest: {exc}", file=sys.stderr)
        return EXIT_IO
    if code:
        print(f"error ({status}): {extra.get('error', 'see manifest.json')}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
