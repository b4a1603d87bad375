"""Command-line front end.

Configuration is a flat ``key = value`` file with ``#`` comments; every key
may also be given as ``--key value`` on the command line, which wins over
the file. Output is a CSV table (or JSON records) preceded by a ``#``
metadata block echoing the effective configuration, so identical inputs
give byte-identical files.

Exit status: 0 success, 1 invalid input, 2 a requested comparison exceeded
its tolerance.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from . import bessel_family as bf
from . import kinetic as kin
from . import kspecial as ks
from .fracops import TimeGrid, numeric_laplace, rl_integral_power, standard_decay, volterra_solve
from .mittag_leffler import MLParams, ml
from .series import DomainError, EvalResult, SeriesControl, Status

COMMANDS = ("eval", "solve", "oracle-compare", "laplace-check")
FORMATS = ("csv", "json")
VARIANTS = tuple(str(v) for v in kin.Variant) + ("thm2", "thm3")

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE = 0, 1, 2


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _finite(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def _integer(text: str) -> int:
    value = _finite(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _float_list(text: str) -> tuple[float, ...]:
    items = [s for s in text.replace(";", ",").split(",") if s.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(_finite(s) for s in items)


def _choice(options: Sequence[str]) -> Callable[[str], str]:
    def parse(text: str) -> str:
        text = text.strip()
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return parse


FUNCTIONS = (
    "ml", "gamma", "ln_gamma", "rgamma", "gamma_k", "pochhammer", "pochhammer_k",
    "bessel_j", "bessel_i", "spherical_j", "gen_bessel_w", "phi", "k_bessel",
    "gen_mod_k_bessel", "coeff", "kinetic", "laplace", "rl_integral_power",
    "standard_decay",
)

# key -> (parser, default); None means "no default"
SCHEMA: dict[str, tuple[Callable[[str], Any], Any]] = {
    "command": (_choice(COMMANDS), None),
    "format": (_choice(FORMATS), "csv"),
    "out": (str, "-"),
    "function": (_choice(FUNCTIONS), None),
    # scalar arguments
    "alpha": (_finite, None), "beta": (_finite, None), "z": (_finite, None),
    "x": (_finite, None), "n": (_integer, None), "order": (_finite, None),
    "t": (_finite, None), "branch": (_choice(("auto", "series", "asymptotic")), "auto"),
    # k-Bessel parameters
    "b": (_finite, 1.0), "c": (_finite, -1.0), "g": (_finite, 1.0),
    "lam": (_finite, 1.0), "mu": (_finite, 1.0), "k": (_finite, 1.0),
    # kinetic problem
    "n0": (_finite, 1.0), "e": (_finite, 1.0), "a": (_finite, None),
    "nu": (_finite, 1.0), "variant": (_choice(VARIANTS), "thm1"),
    "cor2_sqrt_pi": (_bool, False), "cor2_squared_factorial": (_bool, False),
    # grids and checks
    "t_max": (_finite, None), "m": (_integer, None), "oracle_m": (_integer, 8192),
    "tol": (_finite, None), "p": (_float_list, None), "tail_exponent": (_finite, 0.0),
    # series control
    "max_terms": (_integer, 2000), "abs_tol": (_finite, 1e-15), "rel_tol": (_finite, 1e-12),
    "compensated": (_bool, True), "z_switch": (_finite, 30.0),
    "extended_precision": (_bool, True),
}

CTRL_KEYS = ("max_terms", "abs_tol", "rel_tol", "compensated", "z_switch", "extended_precision")


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully typed configuration."""

    command: str
    values: dict[str, Any]
    ctrl: SeriesControl
    out: str = "-"
    fmt: str = "csv"

    def get(self, key: str) -> Any:
        return self.values.get(key)

    def require(self, key: str) -> Any:
        value = self.values.get(key)
        if value is None:
            raise ConfigError(f"missing required key {key!r} for {self.command}")
        return value


def parse_lines(text: str, source: str = "<config>") -> dict[str, str]:
    """Split ``key = value`` lines into a raw dictionary; '#' starts a comment."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line.strip()!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        raw[key.replace("-", "_")] = value
    return raw


def parse_config(text: str = "", overrides: dict[str, str] | None = None,
                 source: str = "<config>") -> RunConfig:
    """Parse file text, apply overrides and validate every field."""
    raw = parse_lines(text, source)
    raw.update(overrides or {})
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    values: dict[str, Any] = {}
    for key, (parse, default) in SCHEMA.items():
        if key in raw:
            try:
                values[key] = parse(raw[key])
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        else:
            values[key] = default
    command = values.pop("command")
    if command is None:
        raise ConfigError("missing required key 'command'")
    try:
        ctrl = SeriesControl(**{k: values.pop(k) for k in CTRL_KEYS})
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    out, fmt = values.pop("out"), values.pop("format")
    cfg = RunConfig(command, values, ctrl, out, fmt)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    """Re-check domain invariants early so errors name the violated rule."""
    v = cfg.values
    try:
        if cfg.command == "eval":
            cfg.require("function")
        else:
            _problem(cfg)
            _grid(cfg)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    if v["k"] is not None and not v["k"] > 0:
        raise ConfigError("k must be > 0")
    if v["mu"] is not None and cfg.command != "eval" and not v["mu"] > -1:
        raise ConfigError("mu must exceed -1")


# -- problem construction ---------------------------------------------------------


def _params(cfg: RunConfig) -> bf.KBesselParams:
    v = cfg.values
    return bf.KBesselParams(v["b"], v["c"], v["g"], v["lam"], v["mu"], v["k"])


def _problem(cfg: RunConfig, variant: str | None = None) -> kin.KineticProblem:
    v = cfg.values
    name = variant or v["variant"]
    if name in ("thm2", "thm3"):
        name += "-derived"
    return kin.KineticProblem(
        v["n0"], v["e"], v["nu"], _params(cfg), kin.Variant(name), v["a"],
        v["cor2_sqrt_pi"], v["cor2_squared_factorial"],
    )


_GRID_DEFAULTS = {"solve": (2.0, 128), "oracle-compare": (2.0, 128), "laplace-check": (16.0, 4096)}


def _grid(cfg: RunConfig) -> TimeGrid:
    t_max_default, m_default = _GRID_DEFAULTS[cfg.command]
    t_max = cfg.get("t_max") if cfg.get("t_max") is not None else t_max_default
    m = cfg.get("m") if cfg.get("m") is not None else m_default
    return TimeGrid(t_max, m)


# -- commands ------------------------------------------------------------------------


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    notes: list[str] = dataclasses.field(default_factory=list)
    exit_code: int = EXIT_OK


def _eval_function(cfg: RunConfig) -> EvalResult:
    fn = cfg.require("function")
    ctrl = cfg.ctrl
    v = cfg.values

    def plain(value: float) -> EvalResult:
        return EvalResult(value, 1, 0.0, Status.CONVERGED)

    if fn == "ml":
        return ml(MLParams(cfg.require("alpha"), v["beta"] if v["beta"] is not None else 1.0),
                  cfg.require("z"), ctrl, v["branch"])
    if fn == "gamma":
        return plain(ks.gamma(cfg.require("x")))
    if fn == "ln_gamma":
        return plain(ks.ln_gamma(cfg.require("x")))
    if fn == "rgamma":
        return plain(ks.rgamma(cfg.require("x")))
    if fn == "gamma_k":
        return plain(ks.gamma_k(cfg.require("x"), v["k"]))
    if fn == "pochhammer":
        return plain(ks.pochhammer(cfg.require("x"), cfg.require("n")))
    if fn == "pochhammer_k":
        return plain(ks.pochhammer_k(cfg.require("x"), cfg.require("n"), v["k"]))
    if fn == "bessel_j":
        return bf.bessel_j(cfg.require("order"), cfg.require("z"), ctrl)
    if fn == "bessel_i":
        return bf.bessel_i(cfg.require("order"), cfg.require("z"), ctrl)
    if fn == "spherical_j":
        return bf.spherical_j(cfg.require("order"), cfg.require("z"), ctrl)
    if fn == "gen_bessel_w":
        return bf.gen_bessel_w(cfg.require("order"), v["b"], v["c"], cfg.require("z"), ctrl)
    if fn == "phi":
        return bf.phi_transform(cfg.require("order"), v["b"], v["c"], cfg.require("z"), ctrl)
    if fn == "k_bessel":
        return bf.k_bessel(v["k"], v["mu"], v["g"], v["lam"], cfg.require("z"), ctrl)
    if fn == "gen_mod_k_bessel":
        return bf.gen_mod_k_bessel(_params(cfg), cfg.require("z"), ctrl)
    if fn == "coeff":
        return plain(kin.coeff(cfg.require("n"), _params(cfg)))
    if fn == "kinetic":
        return kin.solve(_problem(cfg), cfg.require("t"), ctrl)
    if fn == "laplace":
        return plain(kin.laplace_solution_thm1(_problem(cfg), cfg.require("p")[0], ctrl))
    if fn == "rl_integral_power":
        return plain(rl_integral_power(v["mu"], v["nu"], cfg.require("t")))
    if fn == "standard_decay":
        return plain(standard_decay(v["n0"], v["e"], cfg.require("t")))
    raise ConfigError(f"unknown function {fn!r}")  # pragma: no cover


def cmd_eval(cfg: RunConfig) -> Table:
    res = _eval_function(cfg)
    return Table(["value", "terms_used", "tail_estimate", "status"],
                 [[res.value, res.terms_used, res.tail_estimate, str(res.status)]],
                 [f"flags={','.join(res.flags)}"] if res.flags else [])


def cmd_solve(cfg: RunConfig) -> Table:
    prob = _problem(cfg)
    crv = kin.curve(prob, _grid(cfg), cfg.ctrl)
    rows = [[t, n, str(s)] for t, n, s in zip(crv.grid, crv.values, crv.statuses)]
    notes = [f"statuses={_fmt_counts(crv.meta['statuses'])}"]
    if crv.meta["flags"]:
        notes.append(f"flags={','.join(crv.meta['flags'])}")
    return Table(["t", "N", "status"], rows, notes)


def _fmt_counts(counts: dict[str, int]) -> str:
    return ",".join(f"{k}:{v}" for k, v in sorted(counts.items()))


def _candidates(cfg: RunConfig) -> list[tuple[str, kin.KineticProblem]]:
    """Closed forms to compare against the oracle of the chosen equation."""
    name = cfg.values["variant"]
    family = name.split("-")[0]
    if family in ("thm2", "thm3"):
        return [(kind, _problem(cfg, f"{family}-{kind}")) for kind in ("published", "derived")]
    if family == "cor2":
        base = _problem(cfg)
        return [("literal", dataclasses.replace(base, cor2_sqrt_pi=False)),
                ("sqrt_pi", dataclasses.replace(base, cor2_sqrt_pi=True))]
    return [(family, _problem(cfg))]


def cmd_oracle_compare(cfg: RunConfig) -> Table:
    grid = _grid(cfg)
    oracle_m = cfg.values["oracle_m"]
    if oracle_m % grid.m:
        raise ConfigError("oracle_m must be a multiple of m")
    tol = cfg.values["tol"] if cfg.values["tol"] is not None else 5e-4
    candidates = _candidates(cfg)
    ref = candidates[0][1]
    oracle_grid = TimeGrid(grid.t_max, oracle_m)
    oracle = volterra_solve(kin.forcing(ref, grid.t_max, cfg.ctrl), kin.rate(ref), ref.nu,
                            oracle_grid)
    step = oracle_m // grid.m
    reference = oracle.values[step - 1::step]
    columns = ["t", "oracle"]
    series = []
    for label, prob in candidates:
        values = kin.curve(prob, grid, cfg.ctrl).values
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.abs(values - reference) / np.abs(reference)
        series.append((label, values, rel))
        columns += [label, f"rel_err_{label}"]
    rows = []
    for i, t in enumerate(grid.nodes):
        row: list[Any] = [t, reference[i]]
        for _, values, rel in series:
            row += [values[i], rel[i]]
        rows.append(row)
    notes = [f"oracle=volterra h={oracle_grid.h!r}", f"tol={tol!r}"]
    matched = []
    for label, _, rel in series:
        worst = float(np.max(rel)) if rel.size else 0.0
        notes.append(f"max_rel_err_{label}={worst!r}")
        if math.isfinite(worst) and worst <= tol:
            matched.append(label)
    if len(series) > 1:
        verdict = " and ".join(matched) if matched else "none"
        notes.append(f"verdict={verdict} matched the oracle within {tol!r}")
    else:
        notes.append(f"verdict={'pass' if matched else 'fail'}")
    return Table(columns, rows, notes, EXIT_OK if matched else EXIT_TOLERANCE)


def cmd_laplace_check(cfg: RunConfig) -> Table:
    prob = _problem(cfg)
    if prob.variant is not kin.Variant.THM1:
        raise ConfigError("laplace-check supports variant=thm1 only")
    grid = _grid(cfg)
    ps = cfg.values["p"] or (2.0, 4.0, 8.0)
    tol = cfg.values["tol"] if cfg.values["tol"] is not None else 1e-3
    crv = kin.curve(prob, grid, cfg.ctrl)
    rows = []
    worst = 0.0
    for p in ps:
        closed = kin.laplace_solution_thm1(prob, p, cfg.ctrl)
        quad = numeric_laplace(crv, cfg.values["tail_exponent"], p)
        rel = abs(quad.value - closed) / abs(closed) if closed else abs(quad.value)
        worst = max(worst, rel if quad.tail_fraction < 0.01 else math.inf)
        rows.append([p, closed, quad.value, rel, quad.tail_fraction])
    ok = worst <= tol
    notes = [f"tol={tol!r}", f"verdict={'pass' if ok else 'fail'}"]
    return Table(["p", "closed_form", "quadrature", "rel_err", "tail_fraction"], rows, notes,
                 EXIT_OK if ok else EXIT_TOLERANCE)


RUNNERS: dict[str, Callable[[RunConfig], Table]] = {
    "eval": cmd_eval,
    "solve": cmd_solve,
    "oracle-compare": cmd_oracle_compare,
    "laplace-check": cmd_laplace_check,
}


# -- output --------------------------------------------------------------------------


def _num(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def _json_value(x: Any) -> Any:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else _num(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def config_echo(cfg: RunConfig) -> list[str]:
    items = {"command": cfg.command, "format": cfg.fmt, **cfg.values,
             **dataclasses.asdict(cfg.ctrl)}
    lines = []
    for key in sorted(items):
        value = items[key]
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ",".join(_num(x) for x in value)
        lines.append(f"{key}={_num(value)}")
    return lines


def render(cfg: RunConfig, table: Table) -> str:
    meta = config_echo(cfg) + table.notes
    if cfg.fmt == "json":
        records = [{c: _json_value(v) for c, v in zip(table.columns, row)} for row in table.rows]
        doc = {"meta": {"config": config_echo(cfg), "notes": table.notes}, "records": records}
        return json.dumps(doc, indent=1, sort_keys=False, allow_nan=False) + "\n"
    buf = io.StringIO()
    for line in meta:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_num(x) for x in row])
    return buf.getvalue()


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute a configuration; returns the exit status and the rendered output."""
    table = RUNNERS[cfg.command](cfg)
    return table.exit_code, render(cfg, table)


# -- entry point ---------------------------------------------------------------------


def _split_overrides(extra: Sequence[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    i = 0
    while i < len(extra):
        arg = extra[i]
        if not arg.startswith("--") or len(arg) == 2:
            raise ConfigError(f"unexpected argument {arg!r}")
        key = arg[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for {arg}")
            value = extra[i + 1]
            i += 2
        out[key.replace("-", "_")] = value
    return out


class _Parser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they exit 1, not argparse's 2."""

    def error(self, message: str):
        raise ConfigError(message)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _Parser(
        prog="frackin",
        # single-letter keys such as --c must not expand to --config/--command
        allow_abbrev=False,
        description="Evaluate k-Bessel/Mittag-Leffler functions and fractional kinetic solutions.",
        epilog="Any config key may be passed as --key value and overrides the file.",
    )
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--command", choices=COMMANDS)
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=FORMATS)
    try:
        args, extra = parser.parse_known_args(argv)
        overrides = _split_overrides(extra)
        for key in ("command", "out", "format"):
            if getattr(args, key) is not None:
                overrides[key] = getattr(args, key)
        text, source = "", "<flags>"
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text, source = fh.read(), args.config
        cfg = parse_config(text, overrides, source)
        code, output = run(cfg)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if cfg.out in ("-", ""):
        sys.stdout.write(output)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(output)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
