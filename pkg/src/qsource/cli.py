"""``qsource`` command line: analytic curves, optimization, scans, cat sweeps, QEC dynamics.

Exit status: 0 on success, 2 on invalid input, 3 on a numerical failure
(a density matrix leaving the PSD cone).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from ._validation import PSDViolationError, check_count, check_odd, check_rate
from .analytic import ic_maximally_mixed_dephasing, ic_z2_dephasing
from .channels import ChannelProgram, NoiseParams
from .codes import CodeParams, classical_z2_code, quantum_z2_code, run_dynamics
from .coherent import cat_crossover_sweep
from .optimizer import OptimizerConfig, SourceOptimizer
from .scan import COLUMNS, grid_points, line_cut_points, linspace, scan_phase_diagram

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

# flags that never reach the config comment: they must not change output bytes
_UNRECORDED = {"out", "config", "threads", "timing", "verbose"}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "analytic": {"qz_min": 0.0, "qz_max": 1.0, "qz_steps": 21},
    "optimize": {
        "restarts": 5, "seed": 0, "max_iters": 50_000, "lr": 0.05, "grad": "analytic",
        "dump_rho": False,
    },
    "scan": {
        "restarts": 5, "seed": 0, "max_iters": 50_000, "lr": 0.05, "grad": "analytic",
        "threads": 1, "timing": False,
    },
    "cat-sweep": {"q_min": 0.0, "q_max": 0.3, "q_steps": 31, "include_even": False},
    "code-dynamics": {"m": 1, "no_qec": False, "seed": 0},
}

_REQUIRED = {
    "analytic": ["n"],
    "optimize": ["n", "qu", "qz"],
    "scan": ["n", "qz_min", "qz_max", "qz_steps"],
    "cat-sweep": ["n_max"],
    "code-dynamics": ["code", "n", "qu", "qz", "t"],
}


class UsageError(ValueError):
    pass


def fmt(x: Any) -> str:
    """12 significant digits for floats; lower-case booleans; empty for missing."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def _round12(x: Any) -> Any:
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.12g}")
    if isinstance(x, (list, tuple)):
        return [_round12(v) for v in x]
    if isinstance(x, dict):
        return {k: _round12(v) for k, v in x.items()}
    return x


def _recorded_config(command: str, opts: dict) -> dict:
    cfg = {"command": command}
    cfg.update({k: v for k, v in sorted(opts.items()) if k not in _UNRECORDED})
    return cfg


def render_csv(command: str, opts: dict, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    cfg = json.dumps(_round12(_recorded_config(command, opts)), sort_keys=True)
    buf.write(f"# qsource {__version__} config={cfg}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- argument handling ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with flag values; explicit flags win")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true", default=None)

    parser = argparse.ArgumentParser(prog="qsource", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qsource {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        # every option defaults to None so the config file can fill the gaps
        p = sub.add_parser(name, parents=[common], help=help_, argument_default=None)
        return p

    a = add("analytic", "closed-form I_c along q_u = 0")
    a.add_argument("--n", type=int)
    a.add_argument("--qz-min", type=float)
    a.add_argument("--qz-max", type=float)
    a.add_argument("--qz-steps", type=int)

    def optimizer_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--restarts", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--max-iters", type=int)
        p.add_argument("--lr", type=float)
        p.add_argument("--grad", choices=("analytic", "fd"))

    o = add("optimize", "optimize the source at one ORUM point (JSON report)")
    o.add_argument("--n", type=int)
    o.add_argument("--qu", type=float)
    o.add_argument("--qz", type=float)
    optimizer_flags(o)
    o.add_argument("--dump-rho", action="store_true", help="include |rho_opt| in the report")

    s = add("scan", "optimize over a (q_u, q_z) grid or a p line cut")
    s.add_argument("--n", type=int)
    for axis in ("qu", "qz"):
        s.add_argument(f"--{axis}-min", type=float)
        s.add_argument(f"--{axis}-max", type=float)
        s.add_argument(f"--{axis}-steps", type=int)
    s.add_argument("--p", type=float, help="scan the ray q_u = 2 q_z / p over the q_z grid")
    optimizer_flags(s)
    s.add_argument("--threads", type=int)
    s.add_argument("--timing", action="store_true", help="fill the wall_ms column")

    c = add("cat-sweep", "per-use I_c of cat sources through single-qubit depolarizing noise")
    c.add_argument("--n-max", type=int)
    c.add_argument("--q-min", type=float)
    c.add_argument("--q-max", type=float)
    c.add_argument("--q-steps", type=int)
    c.add_argument("--include-even", action="store_true")

    d = add("code-dynamics", "I_c of an encoded Z2 source under repeated ORUM steps")
    d.add_argument("--code", choices=("classical", "quantum"))
    d.add_argument("--n", type=int)
    d.add_argument("--m", type=int)
    d.add_argument("--qu", type=float)
    d.add_argument("--qz", type=float)
    d.add_argument("--t", type=int)
    d.add_argument("--no-qec", action="store_true")
    d.add_argument("--seed", type=int, help="recorded only; the dynamics are deterministic")
    return parser


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < explicit flags and check required keys."""
    command = args.command
    opts = {k: v for k, v in vars(args).items() if k != "command"}
    known = set(opts)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in loaded.items():
            key = key.lstrip("-").replace("-", "_")
            if key == "command":
                if value != command:
                    raise UsageError(f"config is for {value!r}, not {command!r}")
                continue
            if key not in known:
                raise UsageError(f"unknown config key {key!r} for {command}")
            if opts[key] is None:
                opts[key] = value
    for key, value in _DEFAULTS.get(command, {}).items():
        if opts.get(key) is None:
            opts[key] = value
    missing = [k for k in _REQUIRED[command] if opts.get(k) is None]
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise UsageError(f"{command}: missing required option(s) {flags}")
    return opts


def _optimizer_config(opts: dict) -> OptimizerConfig:
    est = SourceOptimizer(
        learning_rate=opts["lr"],
        max_iters=opts["max_iters"],
        restarts=opts["restarts"],
        random_state=opts["seed"],
        gradient=opts["grad"],
    )
    return est._config()


# -- subcommands --------------------------------------------------------------


def cmd_analytic(opts: dict) -> str:
    n = check_count(opts["n"], "n", minimum=1)
    qs = [check_rate(q, "q_z") for q in linspace(opts["qz_min"], opts["qz_max"], opts["qz_steps"])]
    rows = [(n, q, ic_maximally_mixed_dephasing(n, q), ic_z2_dephasing(n, q)) for q in qs]
    return render_csv("analytic", opts, ("n", "q_z", "ic_mixed", "ic_z2"), rows)


def cmd_optimize(opts: dict) -> str:
    n = check_count(opts["n"], "n", minimum=1)
    params = NoiseParams(q_u=opts["qu"], q_z=opts["qz"])
    est = SourceOptimizer(
        learning_rate=opts["lr"],
        max_iters=opts["max_iters"],
        restarts=opts["restarts"],
        random_state=opts["seed"],
        gradient=opts["grad"],
    ).fit(ChannelProgram.orum(n, params))
    report = {
        "version": __version__,
        "config": _recorded_config("optimize", opts),
        "i_c": est.i_c_,
        "q1": est.q1_,
        "purity": est.purity_,
        "phase": est.phase_.label,
        "offblock": est.phase_.offblock,
        "iterations": est.n_iter_,
        "converged": est.converged_,
        "restart_ic": list(est.result_.restart_ic),
    }
    if opts["dump_rho"]:
        report["rho_abs"] = np.abs(est.rho_opt_.matrix).tolist()
    return json.dumps(_round12(report), indent=2, sort_keys=True) + "\n"


def cmd_scan(opts: dict) -> str:
    n = check_count(opts["n"], "n", minimum=1)
    qz = linspace(opts["qz_min"], opts["qz_max"], opts["qz_steps"])
    if opts.get("p") is not None:
        points = line_cut_points(qz, opts["p"])
    else:
        missing = [k for k in ("qu_min", "qu_max", "qu_steps") if opts.get(k) is None]
        if missing:
            raise UsageError("scan needs --qu-min/--qu-max/--qu-steps unless --p is given")
        points = grid_points(linspace(opts["qu_min"], opts["qu_max"], opts["qu_steps"]), qz)
    rows = scan_phase_diagram(
        points, n, _optimizer_config(opts), threads=opts["threads"], timing=opts["timing"]
    )
    return render_csv("scan", opts, COLUMNS, ([getattr(r, c) for c in COLUMNS] for r in rows))


def cmd_cat_sweep(opts: dict) -> str:
    qs = linspace(opts["q_min"], opts["q_max"], opts["q_steps"])
    rows = cat_crossover_sweep(opts["n_max"], qs, include_even=bool(opts["include_even"]))
    return render_csv("cat-sweep", opts, ("n", "q", "ic_per_use", "is_argmax"), rows)


def cmd_code_dynamics(opts: dict) -> str:
    n = check_odd(opts["n"], "n")
    if opts["code"] == "classical":
        if opts["m"] != 1:
            raise UsageError("--m applies only to the quantum code")
        code = classical_z2_code(n)
    else:
        code = quantum_z2_code(CodeParams(n, check_odd(opts["m"], "m")))
    params = NoiseParams(q_u=opts["qu"], q_z=opts["qz"])
    t = check_count(opts["t"], "t")
    records = run_dynamics(code, params, t, qec_enabled=not opts["no_qec"])
    return render_csv("code-dynamics", opts, ("t", "i_c", "purity"), records)


COMMANDS = {
    "analytic": cmd_analytic,
    "optimize": cmd_optimize,
    "scan": cmd_scan,
    "cat-sweep": cmd_cat_sweep,
    "code-dynamics": cmd_code_dynamics,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        opts = resolve_options(args)
        text = COMMANDS[args.command](opts)
        _emit(text, opts.get("out"))
    except PSDViolationError as exc:
        print(f"qsource: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"qsource: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
