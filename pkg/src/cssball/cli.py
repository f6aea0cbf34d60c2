"""Command-line front end: validated configs and bit-exact data emission.

Every run follows parse, validate, dispatch, emit.  Numeric text is
written with 17 significant digits so doubles survive a round trip,
JSON keys are sorted, line endings are LF, and identical configurations
produce byte-identical artifacts.  Exit codes: 0 success, 2 usage
error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import limit, linearized
from .driver import (AnsatzSpec, build_ansatz, grid_for, reduced_scan,
                     scan_window, solve, sweep)
from .radial import Grid, RadialField
from .soliton import Params, scaled_soliton, scaled_soliton_prime, \
    soliton_constants, truncation_length

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

FIELD_HEADER = ("r", "u", "H", "Tail")


class UsageError(Exception):
    """Configuration rejected before any computation started."""


# ---------------------------------------------------------------------------
# value parsers


def _float(text: str) -> float:
    return float(text)


def _int(text: str) -> int:
    return int(text)


def _float_list(text: str) -> list[float]:
    vals = [float(tok) for tok in text.split(",") if tok.strip()]
    if not vals:
        raise ValueError("expected a comma-separated list of numbers")
    return vals


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean (true/false)")


def _choice(*allowed: str):
    def parse(text: str) -> str:
        if text not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}")
        return text

    return parse


# ---------------------------------------------------------------------------
# option tables


@dataclass(frozen=True)
class Opt:
    name: str  # flag spelling, without the leading dashes
    parse: object
    default: object
    help: str
    flag: bool = False  # boolean switch; config files use key=true/false


def _dest(name: str) -> str:
    return name.replace("-", "_")


def _common(fmt_default: str) -> list[Opt]:
    return [
        Opt("out", str, None, "output path; primary artifact goes to stdout when omitted"),
        Opt("format", _choice("csv", "json"), fmt_default,
            "which artifact is primary (csv or json)"),
        Opt("seed", _int, 0, "seed recorded with the run"),
        Opt("config", str, None, "flat key=value configuration file; flags override"),
    ]


_OPT_P = Opt("p", _float, 2.0, "nonlinearity exponent, in (1, 3)")
_OPT_OMEGA = Opt("omega", _float, 0.05, "frequency, positive")
_OPT_BRANCH = Opt("branch", _choice("lower", "upper", "tangent"), "upper",
                  "frequency root: lower/upper of the pair, or the tangent "
                  "root at the existence threshold (overrides --omega)")

_OPTIONS: dict[str, list[Opt]] = {
    "thresholds": [
        _OPT_P,
        Opt("p-min", _float, None, "sweep start exponent (with --p-max)"),
        Opt("p-max", _float, None, "sweep end exponent (with --p-min)"),
        Opt("samples", _int, 25, "sweep sample count"),
        Opt("plot", _bool, None, "render the threshold curves (requires --out)", flag=True),
        *_common("csv"),
    ],
    "roots": [_OPT_P, _OPT_OMEGA, *_common("json")],
    "soliton": [
        _OPT_P, _OPT_OMEGA, _OPT_BRANCH,
        Opt("radius", _float, None, "evaluation half-range (default: decay length)"),
        Opt("nodes", _int, 1001, "number of sample points"),
        *_common("csv"),
    ],
    "spectrum": [
        _OPT_P, _OPT_OMEGA, _OPT_BRANCH,
        Opt("nodes", _int, 2000, "interior nodes of the symmetric grid"),
        *_common("json"),
    ],
    "scan": [
        _OPT_P, _OPT_OMEGA,
        Opt("radius", _float, 100.0, "disk radius"),
        Opt("nodes", _int, None, "interior nodes (default: 40 per unit radius)"),
        Opt("alpha", _float, None, "window exponent alpha (default: admissible)"),
        Opt("beta", _float, None, "window exponent beta (default: admissible)"),
        Opt("samples", _int, 64, "scan sample count"),
        Opt("plot", _bool, None, "render energy vs model curves (requires --out)", flag=True),
        *_common("csv"),
    ],
    "solve": [
        _OPT_P, _OPT_OMEGA,
        Opt("radius", _float, 80.0, "disk radius"),
        Opt("nodes", _int, None, "interior nodes (default: 40 per unit radius)"),
        Opt("alpha", _float, None, "window exponent alpha (default: admissible)"),
        Opt("beta", _float, None, "window exponent beta (default: admissible)"),
        Opt("tol", _float, 1e-8, "weighted gradient norm target"),
        Opt("max-iter", _int, 20000, "iteration budget for the descent phase"),
        Opt("plot", _bool, None, "render the solution profile (requires --out)", flag=True),
        *_common("json"),
    ],
    "sweep": [
        _OPT_P, _OPT_OMEGA,
        Opt("radius", _float_list, [50.0, 100.0, 150.0],
            "comma-separated disk radii"),
        Opt("tol", _float, 1e-8, "solve tolerance (with --solve)"),
        Opt("solve", _bool, None, "run full minimizations, not just scans", flag=True),
        *_common("csv"),
    ],
}

_SUMMARIES = {
    "thresholds": "existence and sign-change frequency thresholds",
    "roots": "classify and solve the scalar frequency equation",
    "soliton": "sample a line soliton profile and its constants",
    "spectrum": "low spectrum of the second variation at a soliton",
    "scan": "reduced energy of the boundary-layer ansatz over its window",
    "solve": "minimize the disk energy from the best scanned ansatz",
    "sweep": "scan (and optionally solve) across several radii",
}


# ---------------------------------------------------------------------------
# parsing


def _read_config(path: str, opts: dict[str, Opt]) -> dict[str, object]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in opts:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        opt = opts[key]
        parse = _bool if opt.flag else opt.parse
        try:
            values[key] = parse(value)
        except ValueError as exc:
            raise UsageError(
                f"{path}:{lineno}: invalid value {value!r} for key {key!r}: {exc}")
    return values


def parse_config(argv: list[str]) -> tuple[str, dict[str, object]]:
    """argv -> (command, merged option mapping).

    Flags override config-file keys; unknown config keys are hard
    errors.  Values are fully coerced and defaulted here, so handlers
    see a complete mapping.
    """
    parser = argparse.ArgumentParser(
        prog="cssball",
        description="concentrated radial states of a gauged Schroedinger "
                    "energy on a disk: thresholds, solitons, spectra, scans, "
                    "and full minimizations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in _OPTIONS.items():
        sp = sub.add_parser(name, help=_SUMMARIES[name])
        for opt in opts:
            if opt.flag:
                sp.add_argument(f"--{opt.name}", dest=_dest(opt.name),
                                action="store_true", default=None, help=opt.help)
            else:
                sp.add_argument(f"--{opt.name}", dest=_dest(opt.name),
                                default=None, metavar="V", help=opt.help)
    ns = parser.parse_args(argv)

    opts = {o.name: o for o in _OPTIONS[ns.command]}
    from_file: dict[str, object] = {}
    if getattr(ns, "config", None):
        from_file = _read_config(ns.config, opts)

    merged: dict[str, object] = {}
    for opt in opts.values():
        raw = getattr(ns, _dest(opt.name))
        if raw is not None:
            if opt.flag:
                merged[_dest(opt.name)] = bool(raw)
            else:
                try:
                    merged[_dest(opt.name)] = opt.parse(raw)
                except ValueError as exc:
                    raise UsageError(f"invalid value {raw!r} for --{opt.name}: {exc}")
        elif opt.name in from_file:
            merged[_dest(opt.name)] = from_file[opt.name]
        else:
            merged[_dest(opt.name)] = opt.default

    # fail before any computation, not after it
    if merged.get("plot") and merged.get("out") is None:
        raise UsageError("--plot requires --out")
    out = merged.get("out")
    if out is not None:
        parent = Path(out).parent
        if parent and not parent.exists():
            raise OSError(f"output directory does not exist: {parent}")
    return ns.command, merged


# ---------------------------------------------------------------------------
# emission


def format_float(x: float) -> str:
    """Full double precision, '.' decimal separator, no locale surprises."""
    return format(float(x), ".17g")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def json_text(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _artifact_paths(out: str) -> dict[str, Path]:
    base = Path(out)
    if base.suffix.lower() in (".csv", ".json", ".svg"):
        base = base.with_suffix("")
    return {
        "csv": base.with_suffix(".csv"),
        "json": base.with_suffix(".json"),
        "svg": base.with_suffix(".svg"),
    }


def _write(path: Path, text: str) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        raise OSError(f"output directory does not exist: {path.parent}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _emit(cfg: dict, texts: dict[str, str]) -> None:
    """Write every artifact next to --out, or the primary one to stdout."""
    if cfg["out"] is None:
        sys.stdout.write(texts[cfg["format"]])
        return
    paths = _artifact_paths(cfg["out"])
    for kind, text in texts.items():
        _write(paths[kind], text)


def _plot_target(cfg: dict) -> Path | None:
    if not cfg.get("plot"):
        return None
    if cfg["out"] is None:
        raise UsageError("--plot requires --out")
    return _artifact_paths(cfg["out"])["svg"]


# ---------------------------------------------------------------------------
# field CSV round trip


def field_csv(fld: RadialField) -> str:
    rows = zip(fld.grid.r, fld.u, fld.H, fld.Tail)
    return csv_text(FIELD_HEADER, rows)


def _grid_from_spacing(h: float, n: int) -> Grid:
    # invert h = R / (n + 1) exactly; the rounded product can sit a few
    # ulps off the unique preimage, so walk the neighbourhood
    target = h * (n + 1)
    up = down = target
    for _ in range(4):
        for cand in (up, down):
            grid = Grid(R=cand, n=n)
            if grid.h == h:
                return grid
        up = math.nextafter(up, math.inf)
        down = math.nextafter(down, -math.inf)
    return Grid(R=target, n=n)


def read_field(path) -> RadialField:
    """Re-ingest a field CSV; exact double equality with the writer.

    The grid is reconstructed from the first node (which equals the
    spacing exactly), the caches are recomputed from u by the one fixed
    code path, and the stored columns must match them bit for bit.
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
    if header != ",".join(FIELD_HEADER):
        raise ValueError(f"{path}: expected header {','.join(FIELD_HEADER)!r}, got {header!r}")
    if data.shape[1] != 4:
        raise ValueError(f"{path}: expected 4 columns, got {data.shape[1]}")
    r, u, H, Tail = data.T
    grid = _grid_from_spacing(float(r[0]), r.size)
    if not np.array_equal(grid.r, r):
        raise ValueError(f"{path}: radii are not a uniform mesh starting at its spacing")
    fld = RadialField.from_values(grid, u)
    if not (np.array_equal(fld.H, H) and np.array_equal(fld.Tail, Tail)):
        raise ValueError(f"{path}: stored caches do not match the recomputation")
    return fld


# ---------------------------------------------------------------------------
# handlers


def _branch_root(p: float, omega: float, branch: str) -> tuple[float, float]:
    """Resolve --branch to (k, omega actually used)."""
    if branch == "tangent":
        return limit.critical_frequency(p), limit.thresholds(p).omega1
    roots = limit.concentration_roots(p, omega)
    if roots.kind != "pair":
        raise UsageError(
            f"no frequency pair at omega={omega} (classification: {roots.kind}); "
            f"choose omega below the existence threshold or --branch tangent")
    return (roots.k1 if branch == "lower" else roots.k2), omega


def _cmd_thresholds(cfg: dict) -> int:
    if (cfg["p_min"] is None) != (cfg["p_max"] is None):
        raise UsageError("--p-min and --p-max must be given together")
    if cfg["p_min"] is not None:
        if not cfg["p_min"] < cfg["p_max"]:
            raise UsageError("--p-min must be below --p-max")
        if cfg["samples"] < 2:
            raise UsageError("--samples must be at least 2 for a sweep")
        ps = np.linspace(cfg["p_min"], cfg["p_max"], cfg["samples"])
    else:
        ps = [cfg["p"]]
    rows = []
    for p in ps:
        consts = soliton_constants(float(p))
        th = limit.thresholds(consts.p, consts.mass)
        rows.append({"p": consts.p, "m": consts.mass,
                     "omega0": th.omega0, "omega1": th.omega1})
    texts = {
        "csv": csv_text(("p", "m", "omega0", "omega1"),
                        [(r["p"], r["m"], r["omega0"], r["omega1"]) for r in rows]),
        "json": json_text({"rows": rows, "seed": cfg["seed"]}),
    }
    _emit(cfg, texts)
    target = _plot_target(cfg)
    if target is not None:
        from . import plotting

        plotting.threshold_curves(rows, str(target))
    return EXIT_OK


def _cmd_roots(cfg: dict) -> int:
    params = Params(p=cfg["p"], omega=cfg["omega"])
    consts = soliton_constants(params.p)
    th = limit.thresholds(params.p, consts.mass)
    roots = limit.concentration_roots(params.p, params.omega, consts.mass)
    residual = lambda k: (None if k is None else
                          float(limit.root_function(params.p, params.omega,
                                                    consts.mass, k)))
    payload = {
        "p": params.p, "omega": params.omega, "m": consts.mass,
        "kind": roots.kind, "k1": roots.k1, "k2": roots.k2,
        "residual_k1": residual(roots.k1), "residual_k2": residual(roots.k2),
        "omega0": th.omega0, "omega1": th.omega1, "seed": cfg["seed"],
    }
    header = ("p", "omega", "m", "kind", "k1", "k2",
              "residual_k1", "residual_k2", "omega0", "omega1")
    texts = {
        "csv": csv_text(header, [tuple(payload[key] for key in header)]),
        "json": json_text(payload),
    }
    _emit(cfg, texts)
    return EXIT_OK


def _cmd_soliton(cfg: dict) -> int:
    params = Params(p=cfg["p"], omega=cfg["omega"])
    k, omega_used = _branch_root(params.p, params.omega, cfg["branch"])
    if cfg["nodes"] < 2:
        raise UsageError("--nodes must be at least 2")
    radius = cfg["radius"] if cfg["radius"] is not None else truncation_length(params.p, k)
    if not radius > 0:
        raise UsageError("--radius must be positive")
    r = np.linspace(0.0, float(radius), cfg["nodes"])
    w = scaled_soliton(params.p, k, r)
    wp = scaled_soliton_prime(params.p, k, r)
    consts = soliton_constants(params.p)
    mass_k, kinetic_k, potential_k = consts.scaled(k)
    texts = {
        "csv": csv_text(("r", "w", "wprime"), zip(r, w, wp)),
        "json": json_text({
            "p": params.p, "omega": omega_used, "branch": cfg["branch"], "k": k,
            "radius": float(radius), "nodes": cfg["nodes"],
            "m": consts.mass, "mass": mass_k, "kinetic": kinetic_k,
            "potential": potential_k, "seed": cfg["seed"],
        }),
    }
    _emit(cfg, texts)
    return EXIT_OK


def _cmd_spectrum(cfg: dict) -> int:
    params = Params(p=cfg["p"], omega=cfg["omega"])
    k, omega_used = _branch_root(params.p, params.omega, cfg["branch"])
    grid = linearized.line_grid(k, n=cfg["nodes"])
    op = linearized.second_variation(Params(p=params.p, omega=omega_used), k, grid)
    vals, _ = linearized.low_spectrum(op, count=6)
    rep = linearized.coercivity_constant(op)
    payload = {
        "p": params.p, "omega": omega_used, "branch": cfg["branch"], "k": k,
        "nodes": grid.n, "half_width": grid.half_width, "mass": op.mass,
        "eigenvalues": vals, "coercivity": rep.value,
        "degenerate": rep.degenerate, "flag_threshold": rep.flag_threshold,
        "alignment": rep.alignment,
        "translation_residual": rep.translation_residual,
        "seed": cfg["seed"],
    }
    header = ["p", "omega", "branch", "k", "nodes", "coercivity", "degenerate",
              "alignment", "translation_residual", "mass"]
    row = [payload[key] for key in header]
    for i, v in enumerate(vals):
        header.append(f"eig{i}")
        row.append(v)
    texts = {"csv": csv_text(header, [row]), "json": json_text(payload)}
    _emit(cfg, texts)
    return EXIT_OK


def _scan_setup(cfg: dict):
    params = Params(p=cfg["p"], omega=cfg["omega"])
    if cfg["nodes"] is None:
        grid = grid_for(cfg["radius"])
    else:
        grid = Grid(R=cfg["radius"], n=cfg["nodes"])
    return params, grid


def _cmd_scan(cfg: dict) -> int:
    params, grid = _scan_setup(cfg)
    scan = reduced_scan(params, grid, samples=cfg["samples"],
                        alpha=cfg["alpha"], beta=cfg["beta"])
    lo, hi = scan_window(grid.R, scan.k, scan.alpha, scan.beta)
    summary = {
        "p": params.p, "omega": params.omega, "radius": grid.R, "nodes": grid.n,
        "alpha": scan.alpha, "beta": scan.beta, "k": scan.k,
        "limit_value": scan.limit_value, "window_lo": lo, "window_hi": hi,
        "rho_star": scan.rho_star, "phi_star": scan.phi_star,
        "interior": scan.interior, "seed": cfg["seed"],
    }
    texts = {
        "csv": csv_text(("rho", "phi", "model_phi"),
                        zip(scan.rho, scan.phi, scan.model)),
        "json": json_text(summary),
    }
    _emit(cfg, texts)
    target = _plot_target(cfg)
    if target is not None:
        from . import plotting

        plotting.scan_curves(scan, str(target))
    return EXIT_OK


def _cmd_solve(cfg: dict) -> int:
    params, grid = _scan_setup(cfg)
    scan = reduced_scan(params, grid, alpha=cfg["alpha"], beta=cfg["beta"])
    init = build_ansatz(params, grid, AnsatzSpec(rho=scan.rho_star, k=scan.k))
    report = solve(params, grid, init, tol=cfg["tol"],
                   max_iter=cfg["max_iter"], newton=True)
    summary = {
        "p": params.p, "omega": params.omega, "radius": grid.R, "nodes": grid.n,
        "tol": cfg["tol"], "k": report.k, "converged": report.converged,
        "message": report.message, "iterations": report.iterations,
        "grad_norm": report.grad_norm, "rho_star": scan.rho_star,
        "rho_fit": report.rho_fit, "profile_error": report.profile_error,
        "min_value": report.min_value, "energy": report.energy.as_dict(),
        "seed": cfg["seed"],
    }
    texts = {"json": json_text(summary), "csv": field_csv(report.field)}
    _emit(cfg, texts)
    target = _plot_target(cfg)
    if target is not None:
        from . import plotting

        plotting.solution_profile(report, str(target))
    return EXIT_OK if report.converged else EXIT_NUMERIC


def _cmd_sweep(cfg: dict) -> int:
    cells = [(cfg["p"], cfg["omega"], R) for R in cfg["radius"]]
    results = sweep(cells, do_solve=bool(cfg["solve"]), tol=cfg["tol"])
    header = ("p", "omega", "R", "n", "k", "rho_star", "phi_star", "interior",
              "converged", "iterations", "grad_norm", "energy_total",
              "rho_fit", "profile_error", "error")
    rows = []
    entries = []
    failed = False
    for cell in results:
        scan, rep = cell.scan, cell.report
        failed = failed or cell.error is not None or (rep is not None and not rep.converged)
        rows.append((
            cell.p, cell.omega, cell.R, cell.n,
            scan.k if scan else None,
            scan.rho_star if scan else None,
            scan.phi_star if scan else None,
            scan.interior if scan else None,
            rep.converged if rep else None,
            rep.iterations if rep else None,
            rep.grad_norm if rep else None,
            rep.energy.total if rep else None,
            rep.rho_fit if rep else None,
            rep.profile_error if rep else None,
            cell.error,
        ))
        entries.append({key: value for key, value in zip(header, rows[-1])})
    texts = {
        "csv": csv_text(header, rows),
        "json": json_text({"cells": entries, "seed": cfg["seed"]}),
    }
    _emit(cfg, texts)
    return EXIT_NUMERIC if failed else EXIT_OK


_HANDLERS = {
    "thresholds": _cmd_thresholds,
    "roots": _cmd_roots,
    "soliton": _cmd_soliton,
    "spectrum": _cmd_spectrum,
    "scan": _cmd_scan,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    try:
        command, cfg = parse_config(sys.argv[1:] if argv is None else list(argv))
        return _HANDLERS[command](cfg)
    except SystemExit as exc:  # argparse help/usage paths
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except np.linalg.LinAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RuntimeError as exc:  # convergence and quadrature failures
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
