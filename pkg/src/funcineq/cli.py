"""Command-line interface: ``funcineq functionals | verify | flow``.

Exit codes: 0 success, 1 verification failures, 2 usage errors, 3 numerical
errors. Every command also reads an optional JSON config file whose keys
match the long flag names (dashes become underscores); flags given on the
command line take precedence and unknown keys are rejected.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FuncIneqError, ParameterError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DENSITY_KEYS = ("gaussian", "tilt", "quartic", "grid", "density")
CONFIG_KEYS = {
    "functionals": {"gaussian", "tilt", "quartic", "grid", "output"},
    "verify": {"suite", "format", "output", "seed"},
    "flow": {"gaussian", "tilt", "quartic", "grid", "density", "potential", "tmax", "samples",
             "certify", "output"},
}
DEFAULTS = {
    "functionals": {},
    "verify": {"format": "json", "seed": 0},
    "flow": {"potential": "quadratic", "tmax": 8.0, "samples": 81, "certify": True},
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Merged command parameters (config file, then flags, then defaults)."""

    command: str
    values: dict = field(default_factory=dict)
    seed: int = 0

    def get(self, key, default=None):
        return self.values.get(key, default)


def _pair(text):
    try:
        parts = [float(v) for v in str(text).split(",")]
    except ValueError as exc:
        raise UsageError(f"expected 'm,s', got {text!r}") from exc
    if len(parts) != 2:
        raise UsageError(f"expected 'm,s', got {text!r}")
    return parts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="funcineq",
                                     description="Gaussian functional inequalities, numerically")
    sub = parser.add_subparsers(dest="command", required=True)

    def density_flags(p, named=False):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--gaussian", metavar="M,S", help="N(M, S) with variance S")
        g.add_argument("--tilt", type=float, metavar="B", help="tilted Gaussian N(B, 1)")
        g.add_argument("--quartic", type=float, metavar="A", help="log f = -A x^4 (normalized)")
        g.add_argument("--grid", metavar="FILE", help="grid-density file (x<TAB>log f)")
        if named:
            g.add_argument("--density", choices=["even_tilt"],
                           help="named density built from the potential")

    p = sub.add_parser("functionals", help="H, I, deficits, TV, W1 and W2 against gamma")
    density_flags(p)
    p.add_argument("-o", "--output")
    p.add_argument("--config")

    p = sub.add_parser("verify", help="run an inequality suite")
    p.add_argument("--suite", help="gaussian_scale, tilt, quartic, product, wehrl or all")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")
    p.add_argument("--config")

    p = sub.add_parser("flow", help="entropy and Fisher information along a flow")
    density_flags(p, named=True)
    p.add_argument("--potential", help="quadratic (OU flow), quartic or double_well")
    p.add_argument("--tmax", type=float)
    p.add_argument("--samples", type=int, help="number of equally spaced sample times")
    p.add_argument("--certify", action=argparse.BooleanOptionalAction, default=None,
                   help="record the spectral-gap certificate at every sample")
    p.add_argument("-o", "--output")
    p.add_argument("--config")
    return parser


def load_config(args) -> RunConfig:
    command = args.command
    allowed = CONFIG_KEYS[command]
    values = dict(DEFAULTS[command])
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
        values.update(data)
    for key in allowed:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    given = [k for k in DENSITY_KEYS if k in allowed and values.get(k) is not None]
    if len(given) > 1:
        raise UsageError(f"choose one density specification, got {', '.join(given)}")
    seed = values.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise UsageError("seed must be an integer")
    return RunConfig(command, values, seed)


def make_density(cfg: RunConfig, potential=None):
    from . import measures
    if cfg.get("gaussian") is not None:
        m, s = _pair(cfg.get("gaussian"))
        if not s > 0:
            raise UsageError("the variance must be positive")
        return measures.gaussian_relative(m, s)
    if cfg.get("tilt") is not None:
        return measures.exponential_tilt(float(cfg.get("tilt")))
    if cfg.get("quartic") is not None:
        a = float(cfg.get("quartic"))
        if not a > 0:
            raise UsageError("the quartic coefficient must be positive")
        return measures.quartic_tilt(a)
    if cfg.get("grid") is not None:
        return measures.load_grid_density(cfg.get("grid"))
    if cfg.get("density") == "even_tilt":
        from .semigroup import even_tilt
        if potential is None:
            raise UsageError("even_tilt needs a potential")
        return even_tilt(potential)
    raise UsageError("no density given (use --gaussian, --tilt, --quartic, --grid or --density)")


def _emit(text: str, output, stdout):
    if output:
        Path(output).write_text(text)
    else:
        stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_functionals(cfg: RunConfig, stdout=sys.stdout) -> int:
    from .functionals import entropy, fisher, lsi_deficit, total_variation
    from .transport import tal_deficit, w1_1d, w2_1d
    from .verify import SCHEMA, _json_value

    nu = make_density(cfg)
    values = {}
    errors = {}
    for key, fn in (("H", entropy), ("I", fisher), ("delta_LSI", lsi_deficit),
                    ("delta_Tal", tal_deficit), ("TV", total_variation), ("W1", w1_1d),
                    ("W2", w2_1d)):
        v = fn(nu)
        values[key] = v.value
        errors[key] = v.est_error
    doc = {"schema": SCHEMA, "density": nu.label, **values, "est_error": errors}
    _emit(_json_value(doc) + "\n", cfg.get("output"), stdout)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, stdout=sys.stdout) -> int:
    from .verify import SUITES, run_suite, summarize, to_csv, to_json

    suite = cfg.get("suite")
    if not suite:
        raise UsageError("--suite is required")
    if suite != "all" and suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(sorted(SUITES))}, all")
    fmt = cfg.get("format", "json")
    if fmt not in ("json", "csv"):
        raise UsageError(f"unknown format {fmt!r}")
    reports = run_suite(suite, seed=cfg.seed)
    text = to_json(reports, suite) if fmt == "json" else to_csv(reports)
    _emit(text, cfg.get("output"), stdout)
    s = summarize(reports)
    stdout.write(f"pass={s['pass']} fail={s['fail']} skip={s['skip']}\n")
    return EXIT_FAIL if s["fail"] else EXIT_OK


def debruijn_row(trace):
    """``(H(0) - H(T), int_0^T I dt, |difference|)`` from the sampled trace (Simpson in t)."""
    from scipy.integrate import simpson
    t = np.array([s.t for s in trace])
    i = np.array([s.I for s in trace])
    dissipated = trace[0].H - trace[-1].H
    integral = float(simpson(i, x=t)) if len(t) > 2 else float(np.trapz(i, t))
    return dissipated, integral, abs(dissipated - integral)


def cmd_flow(cfg: RunConfig, stdout=sys.stdout) -> int:
    from .semigroup import POTENTIALS, _fmt, fp_evolve, ou_evolve

    name = cfg.get("potential")
    if name not in POTENTIALS:
        raise UsageError(f"unknown potential {name!r}; choose from {', '.join(sorted(POTENTIALS))}")
    tmax = float(cfg.get("tmax"))
    samples = int(cfg.get("samples"))
    if not tmax > 0 or samples < 2:
        raise UsageError("need tmax > 0 and at least 2 samples")
    potential = POTENTIALS[name]()
    nu = make_density(cfg, potential)
    times = np.linspace(0.0, tmax, samples)
    certify = bool(cfg.get("certify"))
    if potential.is_quadratic:
        state = ou_evolve(nu, tmax, times=times, certify_lambda=certify)
    else:
        state = fp_evolve(potential, nu, tmax, times=times, certify_lambda=certify)
    text = state.to_csv()
    dissipated, integral, gap = debruijn_row(state.trace)
    text += f"de_bruijn,{_fmt(dissipated)},{_fmt(integral)},{_fmt(gap)}\n"
    _emit(text, cfg.get("output"), stdout)
    return EXIT_OK


COMMANDS = {"functionals": cmd_functionals, "verify": cmd_verify, "flow": cmd_flow}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg, stdout)
    except (UsageError, ParameterError, OSError) as exc:
        stderr.write(f"funcineq: error: {exc}\n")
        return EXIT_USAGE
    except (FuncIneqError, FloatingPointError, ValueError) as exc:
        stderr.write(f"funcineq: numerical error: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
