"""Command-line front end: region export, classification, runs, sweeps.

Every subcommand resolves its inputs into one canonical configuration
mapping before any computation; the mapping is schema-checked (unknown keys
rejected), hashed, and the hash stamped into every output file so a result
can be traced back to the exact configuration that produced it.  Outputs are
deterministic: the same configuration and seed reproduce files byte for
byte.

Exit codes: ``0`` success, ``2`` configuration error, ``3`` inadmissible
parameters (the violated admissibility inequality is printed), ``4``
internal invariant violation.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import itertools
import json
import math
import os
import sys
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__
from .dynamics import CoefficientPath, _octant_masks, octant_spec, simulate_ws
from .errors import ConfigError, InadmissibleError, InternalInvariantError
from .params import Params, classify_regime, validate
from .pde import (BackgroundSpec, InitialData, KernelSpec, PDEConfig,
                  run_pde)
from .phaseplane import admissibility, corner_set
from .regions import (SUBCRITICAL, classify_Grho, export_region, region_pair)
from .verification import CHECKS, run_suite

__all__ = ["main", "main_entry", "run_sweep"]

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_INADMISSIBLE = 3
_EXIT_INTERNAL = 4

_CORNER_NAMES = ("w1", "s2", "w3", "s4", "wt1", "st2", "wt3", "wt_star")


# ---------------------------------------------------------------------------
# configuration plumbing
# ---------------------------------------------------------------------------


def _config_hash(canonical: Mapping[str, Any]) -> str:
    """Stable short hash of one resolved run configuration."""
    blob = json.dumps(canonical, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def _load_json_object(path: str, what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {path!r}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path!r} is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ConfigError(f"{what} file {path!r} must hold a JSON object")
    return payload


def _check_keys(payload: Mapping, required: Sequence[str],
                optional: Sequence[str], what: str) -> None:
    unknown = set(payload) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"unknown keys in {what}: {sorted(unknown)}")
    missing = set(required) - set(payload)
    if missing:
        raise ConfigError(f"missing keys in {what}: {sorted(missing)}")


def _params_from_file(path: str) -> Params:
    return validate(_load_json_object(path, "parameter"))


def _json_document(config_hash: str, payload: Mapping[str, Any]) -> str:
    doc = {"tool": "ctepa", "version": __version__,
           "config_hash": config_hash}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _csv_cell(value) -> str:
    """One deterministic CSV cell; floats keep shortest round-trip form."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, config_hash: str, columns: Sequence[str],
               rows) -> None:
    lines = [f"# ctepa {__version__} config {config_hash}",
             ",".join(columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _ensure_out_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path!r}: {exc}") from None
    return path


def _worker_count(requested: int | None, n_items: int) -> int:
    """Resolve the worker pool size, honoring the CTEPA_THREADS cap."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    if n < 1:
        raise ConfigError("worker count must be at least 1")
    cap = os.environ.get("CTEPA_THREADS")
    if cap is not None:
        try:
            cap_n = int(cap)
        except ValueError:
            raise ConfigError(
                f"CTEPA_THREADS must be an integer, got {cap!r}") from None
        if cap_n < 1:
            raise ConfigError("CTEPA_THREADS must be at least 1")
        n = min(n, cap_n)
    return max(1, min(n, n_items))


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


def _closure_label(region) -> str:
    """How the subcritical boundary closes, reported in the metadata."""
    if region.s_cap is None:
        return "unbounded-lower-arcs"
    if "ac3" in region.adm.required:
        return "lens-full-chain"
    return "lens-median-convention"


def _cmd_regions(args) -> int:
    p = _params_from_file(args.params)
    canonical = {"command": "regions", "params": p.to_json(),
                 "resolution": args.resolution}
    cfg_hash = _config_hash(canonical)
    out_dir = _ensure_out_dir(args.out)

    sub, sup, sub_err = region_pair(p)
    regime = classify_regime(p)
    adm = admissibility(p)

    meta: dict[str, Any] = {
        "params": p.to_json(),
        "regime": regime.label,
        "scenario_sub": regime.scenario_sub,
        "scenario_sup": regime.scenario_sup,
        "corners": corner_set(p).to_json(adm),
        "admissibility": adm.to_json(),
        "supercritical": {"scenario": sup.scenario, "s_cap": sup.s_cap,
                          "s_reach": sup.s_reach},
    }
    if sub is not None:
        meta["subcritical"] = {"scenario": sub.scenario, "s_cap": sub.s_cap,
                               "s_reach": sub.s_reach,
                               "closure": _closure_label(sub)}
    else:
        meta["subcritical"] = None
        meta["subcritical_violation"] = sub_err

    _write_text(os.path.join(out_dir, "region_meta.json"),
                _json_document(cfg_hash, meta))

    segments = []
    if sub is not None:
        segments.extend(export_region(sub, resolution=args.resolution))
    segments.extend(export_region(sup, resolution=args.resolution))
    rows = []
    for seg in segments:
        for wv, sv, gv, rv in zip(seg["w"], seg["s"], seg["G"], seg["rho"]):
            rows.append((seg["segment_id"], float(wv), float(sv),
                         None if not math.isfinite(gv) else float(gv),
                         None if not math.isfinite(rv) else float(rv)))
    _write_csv(os.path.join(out_dir, "curves.csv"), cfg_hash,
               ("segment_id", "w", "s", "G", "rho"), rows)

    if sub is None:
        violated = adm.first_violated()
        if violated is not None:
            name, lhs, rhs = violated
            print(f"inadmissible parameters: {name.upper()} fails "
                  f"(lhs={lhs:.12g}, rhs={rhs:.12g}); supercritical "
                  f"outputs written to {out_dir}", file=sys.stderr)
        else:
            print(f"subcritical region unavailable: {sub_err}",
                  file=sys.stderr)
        return _EXIT_INADMISSIBLE
    print(f"wrote region_meta.json and curves.csv to {out_dir} "
          f"[config {cfg_hash}]")
    return _EXIT_OK


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------


def _cmd_classify(args) -> int:
    p = _params_from_file(args.params)
    canonical = {"command": "classify", "params": p.to_json(),
                 "G": args.G, "rho": args.rho}
    cfg_hash = _config_hash(canonical)
    result = classify_Grho(p, args.G, args.rho)
    print(f"{result.verdict} (G={args.G:g}, rho={args.rho:g}, "
          f"branch: {result.branch})")
    doc = {"params": p.to_json(), "G": args.G, "rho": args.rho,
           "classification": result.to_json()}
    print(_json_document(cfg_hash, doc), end="")
    return _EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _trajectory_rows(p: Params, traj) -> list[tuple]:
    """CSV rows (t, w, s, region, L_active) for every accepted sample."""
    sub, sup, _ = region_pair(p)
    masks = _octant_masks(p, traj.w, traj.s)
    rows: list[tuple] = []
    for i, (t, w, s) in enumerate(zip(traj.t, traj.w, traj.s)):
        codes = [code for code in masks if masks[code][i]]
        L_active = None
        for code in codes:
            tag, _sign = octant_spec(code)
            region = sub if not tag.endswith("t") else sup
            table = None if region is None else region.tables.get(tag)
            if table is None:
                continue
            if table.s_lo <= s <= table.s_hi:
                L_active = float(table.eval_L(float(w), float(s)))
                break
        rows.append((float(t), float(w), float(s), "+".join(codes) or None,
                     L_active))
    return rows


def _cmd_simulate(args) -> int:
    p = _params_from_file(args.params)
    if not args.T > 0.0:
        raise ConfigError("--T must be positive")
    if not (math.isfinite(args.w0) and math.isfinite(args.s0)
            and args.s0 > 0.0):
        raise ConfigError("--w0/--s0 must be finite with s0 > 0")
    canonical = {"command": "simulate", "params": p.to_json(),
                 "w0": args.w0, "s0": args.s0, "T": args.T,
                 "coeff_mode": args.coeff_mode}
    cfg_hash = _config_hash(canonical)
    try:
        coeffs = CoefficientPath.from_mode(p, args.coeff_mode, args.T)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    traj = simulate_ws(p, coeffs, args.w0, args.s0, args.T)
    rows = _trajectory_rows(p, traj)
    _write_csv(args.out, cfg_hash, ("t", "w", "s", "region", "L_active"),
               rows)
    line = (f"{traj.status}: {len(rows)} samples over "
            f"t in [0, {float(traj.t[-1]):.6g}]")
    if traj.blowup is not None:
        line += (f"; breakdown at t_hit={traj.blowup.t_hit:.6g} with "
                 f"w={traj.blowup.w_hit:.6g}")
    print(f"{line}; wrote {args.out} [config {cfg_hash}]")
    return _EXIT_OK


# ---------------------------------------------------------------------------
# pde-run
# ---------------------------------------------------------------------------


def _kernel_from_config(payload: Mapping) -> KernelSpec:
    _check_keys(payload, ("kind",), ("psi0", "base", "amp"), "kernel spec")
    kind = payload["kind"]
    try:
        if kind == "constant":
            _check_keys(payload, ("kind", "psi0"), (), "constant kernel spec")
            return KernelSpec.constant(float(payload["psi0"]))
        if kind == "cosine-bump":
            _check_keys(payload, ("kind", "base", "amp"), (),
                        "cosine-bump kernel spec")
            return KernelSpec.cosine_bump(float(payload["base"]),
                                          float(payload["amp"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad kernel spec: {exc}") from None
    raise ConfigError(f"unknown kernel kind {kind!r}; expected "
                      "'constant' or 'cosine-bump'")


def _background_from_config(payload: Mapping) -> BackgroundSpec:
    _check_keys(payload, ("kind",), ("level", "amp", "wavenumber", "omega"),
                "background spec")
    kind = payload["kind"]
    try:
        if kind == "constant":
            _check_keys(payload, ("kind", "level"), (),
                        "constant background spec")
            return BackgroundSpec.constant(float(payload["level"]))
        if kind == "standing-wave":
            _check_keys(payload, ("kind", "level", "amp"),
                        ("wavenumber", "omega"), "standing-wave background spec")
            return BackgroundSpec.standing_wave(
                float(payload["level"]), float(payload["amp"]),
                int(payload.get("wavenumber", 1)),
                float(payload.get("omega", 0.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad background spec: {exc}") from None
    raise ConfigError(f"unknown background kind {kind!r}; expected "
                      "'constant' or 'standing-wave'")


def _initial_from_config(payload: Mapping) -> InitialData:
    fields = ("rho_mean", "rho_amp", "rho_phase", "u_mean", "u_amp", "u_phase")
    _check_keys(payload, (), fields, "initial-data spec")
    try:
        return InitialData(**{name: float(payload[name])
                              for name in fields if name in payload})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad initial-data spec: {exc}") from None


def _pde_config_from_file(path: str) -> PDEConfig:
    payload = _load_json_object(path, "run configuration")
    _check_keys(payload, ("k", "kernel", "background", "initial", "T"),
                ("n_particles", "n_grid", "cfl", "snap_dt", "rho_blow",
                 "g_blow", "max_steps"), "run configuration")
    for name in ("kernel", "background", "initial"):
        if not isinstance(payload[name], dict):
            raise ConfigError(f"{name} section must be a JSON object")
    try:
        return PDEConfig(
            k=float(payload["k"]),
            kernel=_kernel_from_config(payload["kernel"]),
            background=_background_from_config(payload["background"]),
            ic=_initial_from_config(payload["initial"]),
            T=float(payload["T"]),
            n_particles=int(payload.get("n_particles", 512)),
            n_grid=(int(payload["n_grid"]) if "n_grid" in payload else None),
            cfl=float(payload.get("cfl", 0.1)),
            snap_dt=float(payload.get("snap_dt", 0.25)),
            rho_blow=float(payload.get("rho_blow", 1e6)),
            g_blow=float(payload.get("g_blow", 1e6)),
            max_steps=int(payload.get("max_steps", 2_000_000)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad run configuration: {exc}") from None


def _cmd_pde_run(args) -> int:
    config = _pde_config_from_file(args.config)
    canonical = {"command": "pde-run", "config": config.to_json()}
    cfg_hash = _config_hash(canonical)
    out_dir = _ensure_out_dir(args.out)

    run = run_pde(config)
    rows = []
    for snap in run.snapshots:
        for i in range(snap.x.size):
            rows.append((float(snap.t), i, float(snap.x[i]),
                         float(snap.u[i]), float(snap.rho[i]),
                         float(snap.G[i])))
    _write_csv(os.path.join(out_dir, "snapshots.csv"), cfg_hash,
               ("t", "i", "x", "u", "rho", "G"), rows)

    outcome = {
        "outcome": run.outcome,
        "t_final": run.t_final,
        "t_star": run.t_star,
        "i_star": run.i_star,
        "params": run.params.to_json(),
        "monitors": {key: float(val) for key, val in run.monitors.items()},
        "n_snapshots": len(run.snapshots),
        "config": config.to_json(),
    }
    _write_text(os.path.join(out_dir, "outcome.json"),
                _json_document(cfg_hash, outcome))
    line = f"{run.outcome} at t={run.t_star:.6g}" if run.outcome == "Blowup" \
        else f"{run.outcome} over [0, {run.t_final:g}]"
    print(f"{line}; wrote snapshots.csv and outcome.json to {out_dir} "
          f"[config {cfg_hash}]")
    return _EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _cmd_verify(args) -> int:
    if args.suite == "all":
        names: Sequence[str] | str = "all"
    else:
        names = [part.strip() for part in args.suite.split(",") if part.strip()]
        unknown = set(names) - set(CHECKS)
        if unknown:
            raise ConfigError(
                f"unknown suite names {sorted(unknown)}; available: "
                f"{', '.join(CHECKS)} (or 'all')")
    results = run_suite(names, seed=args.seed, stream=sys.stdout)
    n_failed = sum(not r.passed for r in results)
    total = sum(r.elapsed for r in results)
    print(f"{len(results) - n_failed}/{len(results)} checks passed "
          f"in {total:.1f}s (seed {args.seed})")
    return _EXIT_OK if n_failed == 0 else 1


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _parse_axis(spec: str) -> tuple[str, np.ndarray]:
    """Parse one ``field=lo:hi:n`` sweep axis."""
    try:
        field, rest = spec.split("=", 1)
        lo_s, hi_s, n_s = rest.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError:
        raise ConfigError(f"bad sweep axis {spec!r}; expected "
                          "field=lo:hi:n") from None
    if field not in ("k", "c_minus", "c_plus", "nu_minus", "nu_plus"):
        raise ConfigError(f"unknown sweep field {field!r}")
    if n < 1:
        raise ConfigError("sweep axis needs at least one point")
    if n == 1 and lo != hi:
        raise ConfigError("single-point axis must have lo == hi")
    values = np.linspace(lo, hi, n) if n > 1 else np.asarray([lo])
    return field, values


def _sweep_cell(base: dict, assignment: dict) -> dict:
    """Analyze one sweep cell; never raises for an invalid cell."""
    raw = dict(base)
    raw.update(assignment)
    row = dict(raw)
    try:
        p = validate(raw)
    except (ConfigError, ValueError) as exc:
        row.update({"status": "invalid", "detail": str(exc)})
        return row
    regime = classify_regime(p)
    corners = corner_set(p)
    adm = admissibility(p, corners)
    row.update({
        "status": "ok", "detail": "",
        "regime": regime.label,
        "scenario_sub": regime.scenario_sub,
        "scenario_sup": regime.scenario_sup,
        "ac1": adm.ac1, "ac2": adm.ac2, "ac3": adm.ac3,
        "admissible": adm.satisfied,
    })
    for name in _CORNER_NAMES:
        row[name] = getattr(corners, name)
    return row


def run_sweep(base: Mapping[str, float],
              axes: Sequence[tuple[str, np.ndarray]],
              workers: int | None = None) -> list[dict]:
    """Evaluate regime, admissibility and corners over a parameter grid.

    ``base`` maps the five parameter names to their fixed values; each axis
    overrides one field with a range of values.  Cells are analyzed in
    parallel and returned in row-major axis order regardless of worker
    scheduling.
    """
    fields = [name for name, _ in axes]
    if len(set(fields)) != len(fields):
        raise ConfigError("sweep axes must name distinct fields")
    base = {name: float(base[name]) for name in base}
    grids = [vals for _, vals in axes]
    assignments = [dict(zip(fields, combo))
                   for combo in itertools.product(*[
                       [float(v) for v in vals] for vals in grids])]
    n_workers = _worker_count(workers, len(assignments))
    if n_workers == 1:
        return [_sweep_cell(base, a) for a in assignments]
    with concurrent.futures.ThreadPoolExecutor(n_workers) as pool:
        return list(pool.map(lambda a: _sweep_cell(base, a), assignments))


def _cmd_sweep(args) -> int:
    base_payload = _load_json_object(args.params, "parameter")
    _check_keys(base_payload, (), ("k", "c_minus", "c_plus", "nu_minus",
                                   "nu_plus"), "parameter file")
    axes = [_parse_axis(spec) for spec in args.vary]
    if not axes:
        raise ConfigError("sweep needs at least one --vary axis")
    swept = {name for name, _ in axes}
    missing = {"k", "c_minus", "c_plus", "nu_minus", "nu_plus"} \
        - swept - set(base_payload)
    if missing:
        raise ConfigError(f"parameter file must fix the unswept fields; "
                          f"missing {sorted(missing)}")
    canonical = {"command": "sweep",
                 "base": {k: float(v) for k, v in base_payload.items()},
                 "axes": [{"field": name, "values": [float(v) for v in vals]}
                          for name, vals in axes]}
    cfg_hash = _config_hash(canonical)

    rows = run_sweep(base_payload, axes, workers=args.workers)
    columns = (["cell", "k", "c_minus", "c_plus", "nu_minus", "nu_plus",
                "status", "regime", "scenario_sub", "scenario_sup",
                "ac1", "ac2", "ac3", "admissible"]
               + list(_CORNER_NAMES) + ["detail"])
    table = []
    for idx, row in enumerate(rows):
        table.append([idx] + [row.get(col) for col in columns[1:]])
    _write_csv(args.out, cfg_hash, columns, table)
    n_adm = sum(1 for row in rows if row.get("admissible") is True)
    print(f"swept {len(rows)} cells ({n_adm} admissible); wrote "
          f"{args.out} [config {cfg_hash}]")
    return _EXIT_OK


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctepa",
        description="Critical-threshold regions and characteristic dynamics "
                    "for 1D pressureless Euler-Poisson-alignment systems.")
    parser.add_argument("--version", action="version",
                        version=f"ctepa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("regions",
                        help="export threshold-region boundaries and metadata")
    sp.add_argument("--params", required=True, metavar="FILE",
                    help="JSON file with k, c_minus, c_plus, nu_minus, nu_plus")
    sp.add_argument("--out", required=True, metavar="DIR",
                    help="output directory for region_meta.json and curves.csv")
    sp.add_argument("--resolution", type=int, default=512,
                    help="base points per boundary segment (default 512)")
    sp.set_defaults(func=_cmd_regions)

    sp = sub.add_parser("classify", help="classify one initial state (G, rho)")
    sp.add_argument("--params", required=True, metavar="FILE")
    sp.add_argument("--G", required=True, type=float,
                    help="initial forced slope value G(0)")
    sp.add_argument("--rho", required=True, type=float,
                    help="initial density value rho(0) > 0")
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("simulate",
                        help="integrate one characteristic state (w, s)")
    sp.add_argument("--params", required=True, metavar="FILE")
    sp.add_argument("--w0", required=True, type=float)
    sp.add_argument("--s0", required=True, type=float)
    sp.add_argument("--T", required=True, type=float)
    sp.add_argument("--coeff-mode", default="const-minmax",
                    metavar="MODE",
                    help="coefficient path: const-minmax, sine or "
                         "random:<seed> (default const-minmax)")
    sp.add_argument("--out", default="traj.csv", metavar="FILE")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("pde-run", help="run the Lagrangian particle solver")
    sp.add_argument("--config", required=True, metavar="FILE",
                    help="JSON run configuration")
    sp.add_argument("--out", required=True, metavar="DIR",
                    help="output directory for snapshots.csv and outcome.json")
    sp.set_defaults(func=_cmd_pde_run)

    sp = sub.add_parser("verify", help="run the verification suites")
    sp.add_argument("--suite", default="all",
                    help="'all' or a comma-separated list of check names")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("sweep",
                        help="tabulate regime/admissibility over a grid")
    sp.add_argument("--params", required=True, metavar="FILE",
                    help="JSON file fixing the unswept parameters")
    sp.add_argument("--vary", action="append", default=[],
                    metavar="FIELD=LO:HI:N",
                    help="sweep axis (repeatable)")
    sp.add_argument("--out", default="sweep.csv", metavar="FILE")
    sp.add_argument("--workers", type=int, default=None,
                    help="worker threads (capped by CTEPA_THREADS)")
    sp.set_defaults(func=_cmd_sweep)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand; returns the process exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InadmissibleError as exc:
        print(f"inadmissible parameters: {exc.condition.upper()} fails "
              f"(lhs={exc.lhs:.12g}, rhs={exc.rhs:.12g})", file=sys.stderr)
        return _EXIT_INADMISSIBLE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except InternalInvariantError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return _EXIT_INTERNAL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG


def main_entry() -> None:
    """Console-script entry point."""
    sys.exit(main())
