"""``ar2max`` command line: spectrum, cdf, validate, tail and mc sub-commands.

Exit codes: 0 ok, 1 a validation check failed, 2 bad input, 3 numerical failure.
"""
import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import Ar2MaxError, InputError, InvalidParameter, NumericalError
from .maxdist import build_expansion, cdf_at, decay_law, discretize, ratio_settles
from .mc import rng_metadata, simulate_max_cdf
from .model import EMPIRICAL_BURNIN, GAUSSIAN_STATIONARY, initial_law, make_innovation, validate_params
from .spectral import eig
from .validation import FAIL, CheckResult, check_identity, check_kernel, check_monte_carlo

DEFAULTS = {
    "r1": 0.5,
    "r2": 0.3,
    "sigma_e": 1.0,
    "innovation": "gaussian",
    "x": [3.0],
    "n": list(range(21)),
    "m": 40,
    "spectrum_count": None,
    "eps": 1e-8,
    "inner_rule": 32,
    "reps": 100_000,
    "seed": 0,
    "init_mode": None,
    "burnin": 1000,
    "law_reps": 1_000_000,
    "workers": 1,
    "out": None,
    "format": "csv",
    "dump_json": None,
    "mc_n": [1, 2, 5, 10, 25],
}
INT_KEYS = {"m", "inner_rule", "reps", "seed", "burnin", "law_reps", "workers"}
FLOAT_KEYS = {"r1", "r2", "sigma_e", "eps"}
EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def parse_floats(text):
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def parse_counts(text):
    """``"0-20"``, ``"1,2,5"`` or a mix like ``"0-3,10"``."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(v) for v in text]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def read_config_file(path):
    """JSON object or flat ``key = value`` lines (``#`` comments allowed)."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
        if not isinstance(data, dict):
            raise InvalidParameter(f"config {path}: JSON top level must be an object")
        return data
    except json.JSONDecodeError:
        pass
    data = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameter(f"config {path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        data[key] = value
    return data


def _coerce(key, value):
    if value is None or value == "None":
        return None
    try:
        if key in ("x",):
            return parse_floats(value)
        if key in ("n", "mc_n"):
            return parse_counts(value)
        if key == "spectrum_count":
            return int(value)
        if key in INT_KEYS:
            return int(value)
        if key in FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidParameter(f"bad value for {key}: {value!r} ({exc})") from None
    return value


def resolve_config(args):
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        for key, value in read_config_file(args.config).items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise InvalidParameter(f"unknown config key {key!r}")
            cfg[key] = _coerce(key, value)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = _coerce(key, value)
    if cfg["init_mode"] is None:
        cfg["init_mode"] = GAUSSIAN_STATIONARY if cfg["innovation"] == "gaussian" else EMPIRICAL_BURNIN
    if cfg["format"] not in ("csv", "json"):
        raise InvalidParameter(f"format must be csv or json, got {cfg['format']!r}")
    if cfg["m"] < 2:
        raise InvalidParameter(f"m must be >= 2, got {cfg['m']}")
    if any(n < 0 for n in cfg["n"]):
        raise InvalidParameter("n values must be >= 0")
    return cfg


class Setup:
    """Objects shared by every sub-command, built once from the config."""

    def __init__(self, cfg, need_law=True):
        self.cfg = cfg
        self.params = validate_params(cfg["r1"], cfg["r2"], cfg["sigma_e"])
        self.innovation = make_innovation(cfg["innovation"], cfg["sigma_e"])
        self.law = None
        if need_law:
            self.law = initial_law(self.params, self.innovation, cfg["init_mode"], cfg["burnin"],
                                   cfg["law_reps"], cfg["seed"])

    def disc(self, x):
        c = self.cfg
        return discretize(self.params, self.innovation, x, c["m"], c["eps"], c["inner_rule"])


# ---- output -----------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _echoed(cfg):
    # the destination is not part of what was computed
    return {k: v for k, v in cfg.items() if k not in ("out", "dump_json")}


def _provenance(cfg):
    return {"tool": "ar2max", "version": __version__, "config": _echoed(cfg)}


def emit(cfg, header, rows, extra=None):
    """Write rows as CSV (config echoed in ``#`` lines) or as one JSON document."""
    buf = io.StringIO()
    if cfg["format"] == "json":
        doc = dict(_provenance(cfg))
        if extra:
            doc.update(extra)
        doc["columns"] = header
        doc["rows"] = [dict(zip(header, (float(v) if isinstance(v, np.floating) else v for v in r)))
                       for r in rows]
        json.dump(doc, buf, indent=2, sort_keys=True, default=_json_default)
        buf.write("\n")
    else:
        buf.write(f"# ar2max {__version__}\n")
        buf.write(f"# config: {json.dumps(_echoed(cfg), sort_keys=True)}\n")
        for key, value in (extra or {}).items():
            buf.write(f"# {key}: {json.dumps(value, sort_keys=True, default=_json_default)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([_fmt(v) for v in r])
    text = buf.getvalue()
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


# ---- sub-commands -------------------------------------------------------------


def cmd_spectrum(cfg):
    s = Setup(cfg, need_law=False)
    rows, extra = [], {}
    for x in cfg["x"]:
        d = s.disc(x)
        want = cfg["spectrum_count"] or 10
        if want > d.op.n_classes:
            _warn(f"spectrum count {want} exceeds the {d.op.n_classes} distinct eigenpairs of the "
                  f"grid; clipped to {d.op.n_classes}")
            want = d.op.n_classes
        spec = eig(d.op, J=want)
        for j, (lam, res) in enumerate(zip(spec.eigenvalues, spec.residuals), 1):
            rows.append((x, j, lam.real, lam.imag, abs(lam), res))
        extra[f"x={x!r}"] = {"M": spec.leading_multiplicity(), "cond_retained": spec.cond,
                            "cond_all": spec.cond_all, "n_resolved": spec.n_resolved,
                            "nodes": d.grid.size, "classes": d.op.n_classes}
    emit(cfg, ["x", "rank", "re", "im", "abs", "residual"], rows, extra)
    return EXIT_OK


def _expansion(s, x, disc=None):
    c = s.cfg
    return build_expansion(s.params, s.innovation, s.law, x, c["m"], c["spectrum_count"], c["eps"],
                           c["inner_rule"], disc=disc)


def cmd_cdf(cfg):
    s = Setup(cfg)
    rows, extra = [], {}
    for x in cfg["x"]:
        exp = _expansion(s, x)
        if cfg["dump_json"]:
            path = Path(cfg["dump_json"]) / f"expansion_x{x!r}.json"
            path.parent.mkdir(parents=True, exist_ok=True)
            doc = exp.to_json()
            doc.update(_provenance(cfg))
            path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
        for n in cfg["n"]:
            rows.append((n, x, cdf_at(exp, n), cdf_at(exp, n, clamp=True)))
        extra[f"x={x!r}"] = {"J": exp.diagnostics["J"], "lambda1": exp.lam[0].real}
    emit(cfg, ["n", "x", "u_raw", "u_clamped"], rows, extra)
    return EXIT_OK


def cmd_validate(cfg):
    s = Setup(cfg)
    rows, failed = [], False
    for x in cfg["x"]:
        d = s.disc(x)
        checks = [check_kernel(d.ctx), check_identity(s.params, s.innovation, s.law, d)]
        try:
            exp = _expansion(s, x, disc=d)
            mc, _ = check_monte_carlo(s.params, s.innovation, cfg["init_mode"], exp, cfg["mc_n"],
                                      cfg["reps"], cfg["seed"] + 1, cfg["burnin"], workers=cfg["workers"])
        except NumericalError as exc:
            mc = CheckResult("monte_carlo", FAIL, float("nan"), 4.0, f"{type(exc).__name__}: {exc}")
        checks.append(mc)
        for c in checks:
            failed |= c.status == FAIL
            rows.append((x, c.name, c.status, c.measured, c.tolerance, c.detail))
    emit(cfg, ["x", "check", "status", "measured", "tolerance", "detail"], rows,
         {"overall": "fail" if failed else "pass"})
    return EXIT_FAILED if failed else EXIT_OK


def cmd_tail(cfg):
    s = Setup(cfg)
    rows = []
    for x in cfg["x"]:
        exp = _expansion(s, x)
        dl = decay_law(exp)
        rows.append((x, dl.lambda1, dl.M, dl.B_H, dl.B_G1, ratio_settles(exp, dl.lambda1)))
    emit(cfg, ["x", "lambda1", "M", "B_H", "B_G1", "n_ratio_settled"], rows)
    return EXIT_OK


def cmd_mc(cfg):
    s = Setup(cfg, need_law=False)
    if cfg["reps"] <= 0:
        raise InvalidParameter("mc needs reps > 0")
    est = simulate_max_cdf(s.params, s.innovation, cfg["init_mode"], cfg["n"], cfg["x"], cfg["reps"],
                           cfg["seed"], cfg["burnin"], cfg["workers"])
    rows = [(e.n, e.x, e.p_hat, e.se, e.reps, e.seed) for e in est]
    emit(cfg, ["n", "x", "p_hat", "se", "reps", "seed"], rows, rng_metadata())
    return EXIT_OK


COMMANDS = {
    "spectrum": (cmd_spectrum, "leading eigenvalues of the discretised kernel"),
    "cdf": (cmd_cdf, "P(M_n <= x) from the spectral expansion"),
    "validate": (cmd_validate, "kernel, spectral/direct and Monte Carlo checks"),
    "tail": (cmd_tail, "leading eigenvalue and geometric decay constants"),
    "mc": (cmd_mc, "Monte Carlo estimates of P(M_n <= x)"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or key=value file; flags override it")
    common.add_argument("--r1", type=float)
    common.add_argument("--r2", type=float)
    common.add_argument("--sigma-e", dest="sigma_e", type=float)
    common.add_argument("--innovation", choices=["gaussian", "logistic"])
    common.add_argument("--x", help="threshold or comma list")
    common.add_argument("--n", help="counts, e.g. 0-20 or 1,2,5")
    common.add_argument("--m", type=int, help="Gauss-Legendre nodes per axis")
    common.add_argument("--spectrum-count", dest="spectrum_count", type=int, help="eigenpairs kept (J)")
    common.add_argument("--eps", type=float, help="tail mass left outside the box")
    common.add_argument("--inner-rule", dest="inner_rule", type=int)
    common.add_argument("--reps", type=int, help="Monte Carlo replications (0 skips MC checks)")
    common.add_argument("--seed", type=int)
    common.add_argument("--init-mode", dest="init_mode", choices=[GAUSSIAN_STATIONARY, EMPIRICAL_BURNIN])
    common.add_argument("--burnin", type=int)
    common.add_argument("--law-reps", dest="law_reps", type=int, help="paths for the burn-in initial law")
    common.add_argument("--mc-n", dest="mc_n", help="n values checked by validate")
    common.add_argument("--workers", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--dump-json", dest="dump_json", help="directory for per-x expansion JSON")

    parser = argparse.ArgumentParser(prog="ar2max", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ar2max {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: _warn(str(msg))
            cfg = resolve_config(args)
            return COMMANDS[args.command][0](cfg)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Ar2MaxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
