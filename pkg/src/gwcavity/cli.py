"""Batch command-line front end.

    gwcavity <command> --config <path> [--out <path>] [--format csv|json] [--no-plot]

Commands: couplings, response, spectrum, squeeze, radiate, gauge-check,
commutator.  Configuration is a single strict-schema JSON document; grids
go to CSV (or JSON), reports to JSON, and grid commands also render a
matplotlib figure next to the delimited output.  Outputs are
deterministic: identical config and version give byte-identical files.

Exit codes: 0 success, 1 validation failure (message names the field),
2 numerical failure (message names the operation and achieved tolerance),
64 usage error.  The environment variable GWCAVITY_THREADS sets the
worker count for grid evaluation; row order is fixed by the grid.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .commutator_audit import audit_report
from .errors import (
    IntegrationFailureError,
    SingularityError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .freq_response import (
    IN_CHANNELS,
    QUADRATURES,
    FrequencyGrid,
    solve_at,
    solve_detuned,
    solve_general,
    solve_tuned,
)
from .gauge_equivalence import compare_gauges
from .gw_field import h_input_channel, radiated_field_exact, radiated_field_farzone, stress_energy_source
from .io_noise import (
    alpha1_spectrum,
    backaction_kernels,
    input_output,
    output_relation,
    output_spectrum,
    qcrb_bound,
    squeeze_params,
)
from .model import INFINITE_MASS, PhysicalConstants, SystemParams, derive_couplings

_COMPONENTS = ("xx", "xy", "xz", "yy", "yz", "zz")
_COMP_INDEX = {"xx": (0, 0), "xy": (0, 1), "xz": (0, 2), "yy": (1, 1), "yz": (1, 2), "zz": (2, 2)}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

_SCHEMA = {
    "system": {"omega0": float, "alpha_bar": float, "gamma": float, "delta": float, "m": (float, str), "L": float},
    "constants": {"G": float, "c": float, "hbar": float},
    "grid": {"min": float, "max": float, "count": int, "spacing": str},
    "response": {"configuration": str},
    "spectrum": {"homodyne_angles": list, "include_qcrb": bool, "include_gw": bool},
    "squeeze": {},
    "radiate": {"omega": float, "points": list, "rtol": float, "compare_farzone": bool},
    "gauge_check": {},
    "commutator": {"times": list},
}


def _type_ok(value, expected):
    if expected is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if expected is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(expected, tuple):
        return any(_type_ok(value, e) for e in expected)
    return isinstance(value, expected)


def validate_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ValidationError("config: top level must be a JSON object")
    for key, section in cfg.items():
        if key not in _SCHEMA:
            raise ValidationError(f"config.{key}: unknown section")
        if not isinstance(section, dict):
            raise ValidationError(f"config.{key}: must be an object")
        for field, value in section.items():
            if field not in _SCHEMA[key]:
                raise ValidationError(f"config.{key}.{field}: unknown key")
            if not _type_ok(value, _SCHEMA[key][field]):
                raise ValidationError(f"config.{key}.{field}: wrong type {type(value).__name__!r}")
    if "system" not in cfg:
        raise ValidationError("config.system: required section missing")
    return cfg


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"config: cannot read {path!r}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config: invalid JSON in {path!r}: {exc}") from exc
    return validate_config(cfg)


def build_consts(cfg: dict) -> PhysicalConstants:
    sec = cfg.get("constants", {})
    return PhysicalConstants(**sec) if sec else PhysicalConstants()


def build_params(cfg: dict) -> SystemParams:
    sec = dict(cfg["system"])
    m = sec.get("m", INFINITE_MASS)
    if isinstance(m, str):
        if m.lower() in ("inf", "infinite", "infinity"):
            sec["m"] = INFINITE_MASS
        else:
            raise ValidationError(f"config.system.m: unrecognized string {m!r} (use a number or 'inf')")
    required = ("omega0", "alpha_bar", "gamma")
    for name in required:
        if name not in sec:
            raise ValidationError(f"config.system.{name}: required field missing")
    return SystemParams(**sec)


def build_grid(cfg: dict) -> FrequencyGrid:
    sec = cfg.get("grid")
    if sec is None:
        raise ValidationError("config.grid: required section missing for this command")
    for name in ("min", "max", "count"):
        if name not in sec:
            raise ValidationError(f"config.grid.{name}: required field missing")
    spacing = sec.get("spacing", "log")
    if spacing == "log":
        return FrequencyGrid.logarithmic(sec["min"], sec["max"], sec["count"])
    if spacing == "lin":
        return FrequencyGrid.linear(sec["min"], sec["max"], sec["count"])
    raise ValidationError(f"config.grid.spacing: must be 'lin' or 'log', got {spacing!r}")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _json_envelope(cfg: dict, body: dict) -> dict:
    return {"engine": "gwcavity", "version": __version__, "config": cfg, **body}


def _plain(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    return value


def rows_to_json(path: Path, cfg: dict, header: list[str], rows) -> None:
    plain = [[_plain(v) for v in r] for r in rows]
    write_json(path, _json_envelope(cfg, {"columns": header, "rows": plain}))


def _nthreads() -> int:
    try:
        return max(1, int(os.environ.get("GWCAVITY_THREADS", "1")))
    except ValueError:
        return 1


def grid_map(fn, values):
    """Order-preserving map, optionally threaded; output independent of scheduling."""
    n = _nthreads()
    if n <= 1:
        return [fn(v) for v in values]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, values))


def render_plot(path: Path, x, series: dict, xlabel: str, ylabel: str, logx=True, logy=True, title=""):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, y in series.items():
        ax.plot(x, y, label=label, linewidth=1.2)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if series:
        ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": f"gwcavity {__version__}"})
    plt.close(fig)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_couplings(cfg, out: Path, fmt: str, plot: bool) -> None:
    consts = build_consts(cfg)
    params = build_params(cfg)
    coup = derive_couplings(params, consts)
    write_json(
        out,
        _json_envelope(
            cfg,
            {
                "couplings": {
                    "epsilon_q": coup.epsilon_q,
                    "epsilon_gw": coup.epsilon_gw,
                    "M_G": coup.M_G,
                }
            },
        ),
    )


def _response_solver(name: str):
    return {
        "auto": solve_at,
        "tuned": solve_tuned,
        "detuned": solve_detuned,
        "general": solve_general,
    }[name]


def cmd_response(cfg, out: Path, fmt: str, plot: bool) -> None:
    consts = build_consts(cfg)
    params = build_params(cfg)
    coup = derive_couplings(params, consts)
    grid = build_grid(cfg)
    if coup.epsilon_q != 0.0:
        grid.require_no_zero()
    mode = cfg.get("response", {}).get("configuration", "auto")
    if mode not in ("auto", "tuned", "detuned", "general"):
        raise ValidationError(f"config.response.configuration: unknown mode {mode!r}")
    solver = _response_solver(mode)

    def one(w):
        sol = solver(-1j * w, params, coup)
        return input_output(sol, params), sol

    results = grid_map(one, grid.points)
    header = ["omega[rad/s]"]
    for quad in QUADRATURES:
        for ch in IN_CHANNELS:
            header += [f"re_{quad}_out_{ch}", f"im_{quad}_out_{ch}"]
    rows = []
    for w, (outsol, _) in zip(grid.points, results):
        row = [float(w)]
        for i in range(2):
            for j in range(4):
                c = outsol.coeffs[i, j]
                row += [c.real, c.imag]
        rows.append(row)
    if fmt == "csv":
        write_csv(out, header, rows)
    else:
        rows_to_json(out, cfg, header, rows)
    if plot:
        mags = {
            f"|{quad}_out <- {ch}|": [abs(r.coeffs[i, j]) for (r, _) in results]
            for i, quad in enumerate(QUADRATURES)
            for j, ch in enumerate(IN_CHANNELS)
            if any(abs(r.coeffs[i, j]) > 0 for (r, _) in results)
        }
        render_plot(out.with_suffix(".png"), grid.points, mags, "Omega [rad/s]",
                    "|transfer coefficient|", title="output transfer magnitudes")


def cmd_spectrum(cfg, out: Path, fmt: str, plot: bool) -> None:
    consts = build_consts(cfg)
    params = build_params(cfg)
    if params.delta != 0.0:
        raise ValidationError("config.system.delta: spectrum command requires the tuned configuration")
    coup = derive_couplings(params, consts)
    grid = build_grid(cfg)
    if coup.epsilon_q != 0.0:
        grid.require_no_zero()
    sec = cfg.get("spectrum", {})
    angles = sec.get("homodyne_angles", [0.0, math.pi / 2.0])
    for i, a in enumerate(angles):
        if not isinstance(a, (int, float)) or isinstance(a, bool):
            raise ValidationError(f"config.spectrum.homodyne_angles[{i}]: must be a number")
    include_qcrb = sec.get("include_qcrb", False)
    include_gw = sec.get("include_gw", True)
    channel = h_input_channel(params, consts)
    rels = grid_map(lambda w: output_relation(w, params, coup, channel, consts), grid.points)
    spectra = [output_spectrum(rels, a, consts.hbar, include_gw=include_gw) for a in angles]
    header = ["omega[rad/s]"] + [f"S[zeta={_fmt(float(a))}][hbar]" for a in angles]
    qcrb_vals = None
    if include_qcrb:
        header.append("qcrb_S_h[1/Hz]")
        s_h = [channel.spectral_density(w) if include_gw else 0.0 for w in grid.points]
        qcrb_vals = []
        for w, sh in zip(grid.points, s_h):
            sol = solve_at(-1j * w, params, coup)
            s_a1 = alpha1_spectrum(sol, consts.hbar, sh)
            qcrb_vals.append(qcrb_bound(w, params, s_a1, consts.hbar))
    rows = []
    for i, w in enumerate(grid.points):
        row = [float(w)] + [float(s.values[i]) for s in spectra]
        if qcrb_vals is not None:
            row.append(float(qcrb_vals[i]))
        rows.append(row)
    if fmt == "csv":
        write_csv(out, header, rows)
    else:
        rows_to_json(out, cfg, header, rows)
    if plot:
        series = {f"zeta={_fmt(float(a))}": s.values for a, s in zip(angles, spectra)}
        if qcrb_vals is not None:
            series["qCRB"] = qcrb_vals
        render_plot(out.with_suffix(".png"), grid.points, series, "Omega [rad/s]",
                    "spectral density", title="homodyne output spectra")


def cmd_squeeze(cfg, out: Path, fmt: str, plot: bool) -> None:
    consts = build_consts(cfg)
    params = build_params(cfg)
    if params.delta != 0.0:
        raise ValidationError("config.system.delta: squeeze command requires the tuned configuration")
    coup = derive_couplings(params, consts)
    grid = build_grid(cfg)
    if coup.epsilon_q != 0.0:
        grid.require_no_zero()

    def one(w):
        k_pd, k_gw = backaction_kernels(w, params, coup)
        ell = squeeze_params(k_pd)
        return k_pd, k_gw, ell

    results = grid_map(one, grid.points)
    header = ["omega[rad/s]", "K_pd", "K_gw", "r[nepers]", "theta[rad]", "phi[rad]"]
    rows = [
        [float(w), k_pd, k_gw, ell.r, ell.theta, ell.phi]
        for w, (k_pd, k_gw, ell) in zip(grid.points, results)
    ]
    if fmt == "csv":
        write_csv(out, header, rows)
    else:
        rows_to_json(out, cfg, header, rows)
    if plot:
        render_plot(
            out.with_suffix(".png"),
            grid.points,
            {
                "K_pd": [r[0] for r in results],
                "|K_gw|": [abs(r[1]) for r in results],
                "r": [r[2].r for r in results],
            },
            "Omega [rad/s]",
            "backaction kernels / squeeze factor",
            title="ponderomotive and radiative backaction",
        )


def cmd_radiate(cfg, out: Path, fmt: str, plot: bool) -> None:
    consts = build_consts(cfg)
    params = build_params(cfg)
    coup = derive_couplings(params, consts)
    sec = cfg.get("radiate")
    if sec is None:
        raise ValidationError("config.radiate: required section missing")
    if "omega" not in sec:
        raise ValidationError("config.radiate.omega: required field missing")
    omega = sec["omega"]
    pts = sec.get("points")
    if not pts:
        raise ValidationError("config.radiate.points: required non-empty list of [x,y,z]")
    for i, p in enumerate(pts):
        if not (isinstance(p, list) and len(p) == 3):
            raise ValidationError(f"config.radiate.points[{i}]: must be [x, y, z]")
    rtol = sec.get("rtol", 1e-6)
    src = stress_energy_source(params, consts)
    header = ["point", "x[m]", "y[m]", "z[m]", "component"]
    header += ["re_exact", "im_exact", "re_farzone", "im_farzone", "rel_modulus_diff"]
    rows = []
    mags = []
    for idx, p in enumerate(pts):
        x = np.asarray(p, dtype=float)
        h_ex = radiated_field_exact(omega, x, params, coup, consts, rtol=rtol)
        h_fz = radiated_field_farzone(omega, x, src, consts)
        scale = max(np.max(np.abs(h_fz)), 1e-300)
        mags.append((np.max(np.abs(h_ex)), np.max(np.abs(h_fz))))
        for comp in _COMPONENTS:
            i, j = _COMP_INDEX[comp]
            rows.append(
                [
                    idx,
                    float(x[0]),
                    float(x[1]),
                    float(x[2]),
                    comp,
                    h_ex[i, j].real,
                    h_ex[i, j].imag,
                    h_fz[i, j].real,
                    h_fz[i, j].imag,
                    float(abs(abs(h_ex[i, j]) - abs(h_fz[i, j])) / scale),
                ]
            )
    if fmt == "csv":
        write_csv(out, header, rows)
    else:
        rows_to_json(out, cfg, header, rows)
    if plot:
        idxs = list(range(len(pts)))
        render_plot(
            out.with_suffix(".png"),
            [i + 1 for i in idxs],
            {
                "max|h| exact": [m[0] for m in mags],
                "max|h| far zone": [m[1] for m in mags],
            },
            "field point #",
            "max |h component|",
            logx=False,
            title="radiated field: exact vs far zone",
        )


def cmd_gauge_check(cfg, out: Path, fmt: str, plot: bool) -> None:
    consts = build_consts(cfg)
    params = build_params(cfg)
    coup = derive_couplings(params, consts)
    grid = build_grid(cfg)
    report = compare_gauges(grid, params, coup, consts)
    write_json(out, _json_envelope(cfg, {"gauge_check": report.to_dict()}))
    if plot:
        render_plot(
            out.with_suffix(".png"),
            report.omegas,
            {"relative deviation": np.maximum(report.deviations, 1e-20)},
            "Omega [rad/s]",
            "max relative deviation",
            title=f"gauge equivalence ({report.configuration})",
        )


def cmd_commutator(cfg, out: Path, fmt: str, plot: bool) -> None:
    consts = build_consts(cfg)
    params = build_params(cfg)
    coup = derive_couplings(params, consts)
    sec = cfg.get("commutator")
    if sec is None or "times" not in sec or not sec["times"]:
        raise ValidationError("config.commutator.times: required non-empty list")
    times = sec["times"]
    for i, t in enumerate(times):
        if not isinstance(t, (int, float)) or isinstance(t, bool) or t < 0:
            raise ValidationError(f"config.commutator.times[{i}]: must be a number >= 0")
    report = audit_report(times, params, coup, consts)
    write_json(out, _json_envelope(cfg, {"commutator_audit": report}))
    if plot:
        pts = report["points"]
        render_plot(
            out.with_suffix(".png"),
            [p["t"] for p in pts],
            {
                "|[a1,a2]/hbar - i| with field channel": [max(p["with_gw_deviation"], 1e-20) for p in pts],
                "without field channel": [max(p["without_gw_deviation"], 1e-20) for p in pts],
            },
            "t [s]",
            "deviation from canonical",
            logx=False,
            title="equal-time commutator audit",
        )


_COMMANDS = {
    "couplings": (cmd_couplings, "json"),
    "response": (cmd_response, "csv"),
    "spectrum": (cmd_spectrum, "csv"),
    "squeeze": (cmd_squeeze, "csv"),
    "radiate": (cmd_radiate, "csv"),
    "gauge-check": (cmd_gauge_check, "json"),
    "commutator": (cmd_commutator, "json"),
}

_JSON_ONLY = {"couplings", "gauge-check", "commutator"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(64)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gwcavity", description=__doc__)
    parser.add_argument("--version", action="version", version=f"gwcavity {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON configuration")
        p.add_argument("--out", default=None, help="output file path")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 64
    handler, default_fmt = _COMMANDS[args.command]
    fmt = args.format or default_fmt
    if args.command in _JSON_ONLY and fmt != "json":
        print(f"gwcavity {args.command}: error: this command only emits JSON reports", file=sys.stderr)
        return 64
    out = Path(args.out) if args.out else Path(f"{args.command.replace('-', '_')}.{fmt}")
    try:
        cfg = load_config(args.config)
        handler(cfg, out, fmt, not args.no_plot)
    except ValidationError as exc:
        print(f"gwcavity {args.command}: validation error: {exc}", file=sys.stderr)
        return 1
    except (IntegrationFailureError, SingularityError, UnsupportedConfigurationError) as exc:
        print(f"gwcavity {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
