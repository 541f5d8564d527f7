"""Command-line front end.

Every subcommand resolves its configuration from built-in defaults, an
optional ``key=value`` config file and command-line flags (in increasing
priority), and echoes the resolved configuration into the output header as
``# config: key=value`` lines. Those lines are accepted back by ``--config``,
so any output file re-runs to identical data.

Exit codes: 0 ok, 1 domain/runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from .dicke import ModelParams, QuenchProtocol, make_ansatz
from .evolve import PropagationError, simulate
from .observables import squeezing_report
from .physical import (
    ATOMIC_MASS_UNIT,
    SODIUM_23_MASS_U,
    SODIUM_SCATTERING_LENGTH,
    PhysicalParams,
    kappa_thomas_fermi,
    model_time_to_lab,
)
from .search import SearchError, find_first_jx_max, optimal_coupling_scan, predict_t0

log = logging.getLogger("squeezestore")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
CONFIG_PREFIX = "# config:"


class UsageError(Exception):
    pass


def fmt(x: Any) -> str:
    """12 significant digits for floats; ints and strings verbatim."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def _round12(x: Any) -> Any:
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(format(float(x), ".12g"))
    if isinstance(x, (int, np.integer)):
        return int(x)
    return x


# --- configuration ---------------------------------------------------------

def _float_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    return [float(v) for v in text.split(",")]


def _quench(text: str) -> str:
    """Normalize to 'auto', 'never' or 'at <t>'."""
    parts = text.replace(":", " ").split()
    if parts in (["auto"], ["never"]):
        return parts[0]
    if len(parts) == 2 and parts[0] == "at":
        parts = parts[1:]
    if len(parts) == 1:
        t = float(parts[0])
        if t < 0:
            raise ValueError("quench time must be >= 0")
        return f"at {fmt(t)}"
    raise ValueError(f"quench must be auto, never or 'at <time>', got {text!r}")


def _bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise ValueError("must be a positive integer")
    return v


def _format(text: str) -> str:
    if text not in ("csv", "json"):
        raise ValueError("format must be csv or json")
    return text


def _ansatz_kind(text: str) -> str:
    if text not in ("auto", "even", "odd"):
        raise ValueError("ansatz must be auto, even or odd")
    return text


@dataclass
class Option:
    key: str
    flag: str
    convert: Callable[[str], Any]
    default: Any = None
    help: str = ""
    nargs: Optional[str] = None


COMMON = [
    Option("n_atoms", "--n", _positive_int, None, "number of atoms N"),
    Option("format", "--format", _format, "csv", "output format: csv or json"),
    Option("output", "--output", str, "-", "output path ('-' for stdout)"),
]

COMMANDS: dict[str, list[Option]] = {
    "simulate": [
        Option("omega_ratio", "--omega", float, 0.0, "Josephson coupling Omega_R/kappa"),
        Option("t_max", "--t-max", float, None, "end time in 1/kappa (default: two pendulum periods)"),
        Option("dt_out", "--dt-out", float, None, "output spacing (default: t_max/400)"),
        Option("quench", "--quench", _quench, "never", "auto | never | at <time>", "+"),
        Option("snapshots", "--snapshots", _float_list, [], "comma-separated times for |c_m|^2 tables"),
    ],
    "sweep": [
        Option("omega_min", "--omega-min", float, None, "lower end of the coupling range"),
        Option("omega_max", "--omega-max", float, None, "upper end of the coupling range"),
        Option("grid_points", "--grid-points", _positive_int, 16, "number of grid couplings"),
        Option("refine_tol", "--refine-tol", float, 1e-4, "coupling refinement tolerance"),
        Option("plateau_digits", "--plateau-digits", _positive_int, 5,
               "significant digits shared by plateau couplings"),
    ],
    "ansatz": [
        Option("ansatz", "--ansatz", _ansatz_kind, "auto", "auto | even | odd"),
        Option("alpha_min", "--alpha-min", float, 0.0, "radians"),
        Option("alpha_max", "--alpha-max", float, math.pi / 2, "radians"),
        Option("alpha_points", "--alpha-points", _positive_int, 31, ""),
        Option("phi_min", "--phi-min", float, 0.0, "radians"),
        Option("phi_max", "--phi-max", float, 2 * math.pi, "radians"),
        Option("phi_points", "--phi-points", _positive_int, 31, ""),
    ],
    "predict": [
        Option("omega_ratio", "--omega", float, None, "Josephson coupling Omega_R/kappa"),
        Option("physical", "--physical", _bool, True, "also report kappa and lab times (true/false)"),
        Option("numeric", "--numeric", _bool, False, "also locate t0 numerically (true/false)"),
    ],
    "physical": [
        Option("t_model", "--t-model", float, None, "model time in 1/kappa to convert"),
    ],
}

PHYSICAL_OPTIONS = [
    Option("trap_hz", "--trap-hz", float, 500.0, "trap frequency omega/2pi in Hz"),
    Option("mass_u", "--mass-u", float, SODIUM_23_MASS_U, "atomic mass in u"),
    Option("a_aa_nm", "--a-aa", float, SODIUM_SCATTERING_LENGTH * 1e9, "scattering length a_aa in nm"),
    Option("a_bb_nm", "--a-bb", float, SODIUM_SCATTERING_LENGTH * 1e9, "scattering length a_bb in nm"),
    Option("a_ab_nm", "--a-ab", float, SODIUM_SCATTERING_LENGTH * 1e9 / 2, "scattering length a_ab in nm"),
]
COMMANDS["predict"] += PHYSICAL_OPTIONS
COMMANDS["physical"] = PHYSICAL_OPTIONS + COMMANDS["physical"]


def options_for(command: str) -> list[Option]:
    return COMMON + COMMANDS[command]


def read_config_file(path: str) -> dict[str, str]:
    """Parse ``key=value`` lines; also accepts the ``# config:`` header of an output file.

    Reading stops at the first line that is neither a comment nor a
    key=value pair, i.e. at the data section of an output file.
    """
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            return {k: _config_text(v) for k, v in json.loads(text)["config"].items()}
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"bad JSON config in {path}: {exc}") from None
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith(CONFIG_PREFIX):
            line = line[len(CONFIG_PREFIX):].strip()
        elif not line or line.startswith("#"):
            continue
        elif "=" not in line:
            break
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _config_text(value: Any) -> str:
    if isinstance(value, list):
        return ",".join(fmt(v) for v in value)
    return fmt(value) if value is not None else ""


def resolve_config(command: str, args: argparse.Namespace) -> dict[str, Any]:
    opts = options_for(command)
    known = {o.key: o for o in opts}
    raw: dict[str, Any] = {}
    if args.config:
        for key, value in read_config_file(args.config).items():
            if key not in known:
                raise UsageError(f"unknown config key {key!r} for {command}")
            raw[key] = value
    for o in opts:
        flag_value = getattr(args, o.key, None)
        if flag_value is not None:
            raw[o.key] = " ".join(flag_value) if isinstance(flag_value, list) else flag_value
    config: dict[str, Any] = {}
    for o in opts:
        if o.key in raw and raw[o.key] != "":
            try:
                config[o.key] = o.convert(str(raw[o.key]))
            except ValueError as exc:
                raise UsageError(f"invalid value for {o.key} ({o.flag}): {exc}") from None
        else:
            config[o.key] = list(o.default) if isinstance(o.default, list) else o.default
    if config["n_atoms"] is None:
        raise UsageError("--n (n_atoms) is required")
    return config


# --- output ----------------------------------------------------------------

@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    name: str = "data"


@dataclass
class Result:
    command: str
    config: dict[str, Any]
    metadata: dict[str, Any] = field(default_factory=dict)
    tables: list[Table] = field(default_factory=list)


def render_csv(result: Result, table: Table) -> str:
    buf = io.StringIO()
    buf.write(f"# squeezestore {__version__} {result.command}\n")
    for key, value in result.config.items():
        buf.write(f"{CONFIG_PREFIX} {key}={_config_text(value)}\n")
    for key, value in result.metadata.items():
        buf.write(f"# {key}: {fmt(value)}\n")
    if table.name != "data":
        buf.write(f"# table: {table.name}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def render_json(result: Result, tables: list[Table]) -> str:
    doc = {
        "program": f"squeezestore {__version__}",
        "command": result.command,
        "config": {k: _round12(v) if not isinstance(v, list) else [_round12(x) for x in v]
                   for k, v in result.config.items()},
        "metadata": {k: _round12(v) for k, v in result.metadata.items()},
        "tables": {t.name: {"columns": t.columns, "rows": [[_round12(v) for v in r] for r in t.rows]}
                   for t in tables},
    }
    return json.dumps(doc, indent=1) + "\n"


def write_result(result: Result, out=None) -> list[str]:
    """Write the main table (and any extra tables) and return the paths written."""
    path = result.config["output"]
    ext = result.config["format"]
    main, extras = result.tables[0], result.tables[1:]
    if ext == "json":
        documents = [(path, render_json(result, result.tables))]
    else:
        documents = [(path, render_csv(result, main))]
        for t in extras:
            if path == "-":
                documents.append(("-", "\n" + render_csv(result, t)))
            else:
                p = Path(path)
                documents.append((str(p.with_name(f"{p.stem}_{t.name}{p.suffix}")), render_csv(result, t)))
    written = []
    for target, text in documents:
        if target == "-":
            (out or sys.stdout).write(text)
        else:
            Path(target).write_text(text)
            written.append(target)
    return written


# --- subcommands -----------------------------------------------------------

def cmd_simulate(config: dict[str, Any]) -> Result:
    """Time series of xi, theta_min and <Jx> under the quench protocol."""
    params = ModelParams(config["n_atoms"], config["omega_ratio"])
    coupling = params.omega_ratio
    t_max = config["t_max"]
    if t_max is None:
        t_max = 2 * predict_t0(params).period if coupling > 0 else 0.05
    dt_out = config["dt_out"] if config["dt_out"] is not None else t_max / 400
    if t_max <= 0 or dt_out <= 0:
        raise UsageError("t_max and dt_out must be positive")

    meta: dict[str, Any] = {}
    quench = config["quench"]
    if quench == "never":
        t_off = None
    elif quench == "auto":
        if coupling <= 0:
            raise ValueError("quench=auto needs a nonzero coupling")
        located = find_first_jx_max(params)
        t_off = located.time
        meta["t0_located"] = t_off
        meta["jx_max_over_j"] = located.value / params.j
    else:
        t_off = float(quench.split()[1])
    meta["t_off"] = "never" if t_off is None else t_off

    series = simulate(params, QuenchProtocol(coupling, t_off), t_max, dt_out, config["snapshots"])
    rows = [
        [t, r.xi, r.theta_min, r.jx_mean / params.j, r.a_moment, r.b_moment, r.c_moment, bool(on)]
        for t, r, on in zip(series.times, series.reports, series.field_on)
    ]
    tables = [Table(["t", "xi", "theta_min", "jx_mean_over_j", "A", "B", "C", "field_on"], rows)]
    for i, snap in enumerate(series.snapshots):
        tables.append(Table(
            ["m", "prob"],
            [[m, p] for m, p in zip(snap.m, snap.probabilities)],
            name=f"snapshot{i}_t{fmt(snap.time)}",
        ))
    return Result("simulate", config, meta, tables)


def cmd_sweep(config: dict[str, Any]) -> Result:
    """Scan the coupling for the deepest first squeezing minimum."""
    lo, hi = config["omega_min"], config["omega_max"]
    if lo is None or hi is None or not (0 < lo < hi):
        raise UsageError("sweep needs a non-empty coupling range 0 < --omega-min < --omega-max")
    if config["grid_points"] < 8:
        raise UsageError("--grid-points must be >= 8")
    params = ModelParams(config["n_atoms"])
    scan = optimal_coupling_scan(params, (lo, hi), grid_points=config["grid_points"],
                                 refine_tol=config["refine_tol"], plateau_digits=config["plateau_digits"])
    meta = {
        "optimum_omega": scan.optimum,
        "optimum_xi": scan.optimum_xi,
        "optimum_tau0": scan.optimum_time,
        "plateau_lo": scan.plateau[0],
        "plateau_hi": scan.plateau[1],
        "plateau_threshold": scan.plateau_threshold,
    }
    rows = [list(row) for row in scan.grid]
    return Result("sweep", config, meta, [Table(["omega", "min_xi", "tau0"], rows)])


def cmd_ansatz(config: dict[str, Any]) -> Result:
    """xi over an (alpha, phi) grid of the few-level ansatz states."""
    params = ModelParams(config["n_atoms"])
    kind = config["ansatz"]
    if kind == "even" and not params.is_even or kind == "odd" and params.is_even:
        raise ValueError(f"{kind} ansatz requested but N={params.n_atoms} is {'even' if params.is_even else 'odd'}")
    alphas = np.linspace(config["alpha_min"], config["alpha_max"], config["alpha_points"])
    phis = np.linspace(config["phi_min"], config["phi_max"], config["phi_points"])
    rows = []
    for a in alphas:
        for p in phis:
            rep = squeezing_report(make_ansatz(params, a, p), check_mean_spin=False)
            rows.append([a, p, rep.xi, rep.theta_min])
    meta = {"ansatz": "even" if params.is_even else "odd"}
    return Result("ansatz", config, meta, [Table(["alpha", "phi", "xi", "theta_min"], rows)])


def _physical_params(config) -> PhysicalParams:
    return PhysicalParams(
        atom_mass=config["mass_u"] * ATOMIC_MASS_UNIT,
        trap_frequency=2 * math.pi * config["trap_hz"],
        a_aa=config["a_aa_nm"] * 1e-9,
        a_bb=config["a_bb_nm"] * 1e-9,
        a_ab=config["a_ab_nm"] * 1e-9,
        n_atoms=config["n_atoms"],
    )


def _physical_rows(config, times: dict[str, float]) -> list[list[Any]]:
    phys = _physical_params(config)
    kappa = kappa_thomas_fermi(phys)
    omega = phys.trap_frequency
    rows = [
        ["a_ho_m", phys.oscillator_length],
        ["a_eff_m", phys.a_eff],
        ["kappa_over_hbar_omega", kappa],
    ]
    for name, t in times.items():
        rows.append([f"{name}_omega_inv", t / kappa])
        rows.append([f"{name}_seconds", model_time_to_lab(t, kappa, omega)])
    return rows


def cmd_predict(config: dict[str, Any]) -> Result:
    """Pendulum-model t0 estimate and lab-unit conversions."""
    if config["omega_ratio"] is None:
        raise UsageError("predict needs --omega")
    params = ModelParams(config["n_atoms"], config["omega_ratio"])
    pred = predict_t0(params)
    rows: list[list[Any]] = [
        ["omega_eff", pred.omega_eff],
        ["period", pred.period],
        ["t0_estimate", pred.t0],
    ]
    times = {"t0_estimate": pred.t0}
    if config["numeric"]:
        located = find_first_jx_max(params)
        rows.append(["t0_numeric", located.time])
        times["t0_numeric"] = located.time
    if config["physical"]:
        rows += _physical_rows(config, times)
    return Result("predict", config, {}, [Table(["quantity", "value"], rows)])


def cmd_physical(config: dict[str, Any]) -> Result:
    """Thomas-Fermi kappa and model-to-lab time conversion."""
    times = {} if config["t_model"] is None else {"t_model": config["t_model"]}
    return Result("physical", config, {}, [Table(["quantity", "value"], _physical_rows(config, times))])


HANDLERS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "ansatz": cmd_ansatz,
    "predict": cmd_predict,
    "physical": cmd_physical,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="squeezestore", description="Spin squeezing storage in a two-component BEC.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in HANDLERS:
        p = sub.add_parser(name, help=(HANDLERS[name].__doc__ or "").strip() or None)
        p.add_argument("--config", help="key=value config file (or a previous output file)")
        for o in options_for(name):
            p.add_argument(o.flag, dest=o.key, default=None, nargs=o.nargs, help=o.help)
    return parser


def main(argv: Optional[list[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(HANDLERS))
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        config = resolve_config(args.command, args)
        result = HANDLERS[args.command](config)
        written = write_result(result, out)
    except UsageError as exc:
        print(f"squeezestore: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, SearchError, PropagationError, OSError) as exc:
        print(f"squeezestore: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if "t0_located" in result.metadata:
        print(f"t0 = {fmt(result.metadata['t0_located'])} (1/kappa)", file=sys.stderr if not written else out)
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
