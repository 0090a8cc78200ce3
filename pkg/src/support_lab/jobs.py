"""Job files: parsing, validation and dispatch.

A job file is a flat TOML document, for example::

    command = "scan-ec"
    curve = [0, 0, 1, -1, 0]
    point = [0, 0, 1]
    point2 = [1, 0, 1]
    primes_max = 1000

Curves are ``[a1, a2, a3, a4, a6]`` (or ``[a4, a6]``), points are projective
``[X, Y, Z]`` integer triples, rationals are integers or strings ``"p/q"``.
"""

from __future__ import annotations

import json
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import density as dens
from . import ec_core as ec
from . import mahler as mah
from . import rigidity_sl2 as sl2
from . import support as sup
from .modmath import is_probable_prime
from .store import CacheError, OrderCache, default_cache_path, render_report

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2
COMMANDS = ("scan-gm", "scan-ec", "infer-n", "specialize", "density", "isogeny", "sl2", "mahler")
FORMATS = ("csv", "json-lines")

_COMMON = {"command", "primes_max", "skip", "out", "cache", "threads", "format", "figure"}
_KEYS = {
    "scan-gm": ({"x", "y"}, set()),
    "scan-ec": ({"curve", "point", "point2"}, {"curve2"}),
    "infer-n": ({"mode", "n_bound"}, {"curve", "point", "point2", "curve2", "x", "y"}),
    "specialize": ({"curve", "point", "chain"}, set()),
    "density": ({"curve", "point", "ell"}, {"torsion"}),
    "isogeny": ({"curve", "kernel"}, {"point"}),
    "sl2": (set(), {"fields", "modulus", "unit"}),
    "mahler": (set(), {"head", "tail", "tail_values", "modulus_max", "range", "degree_max"}),
}
_DEFAULT_BOUND = 1000


class JobError(ValueError):
    def __init__(self, message, line=None, key=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.key = key


@dataclass
class JobSpec:
    command: str
    fields: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.fields.get(key, default)

    @property
    def bound(self):
        return self.fields.get("primes_max", _DEFAULT_BOUND)

    def render(self) -> str:
        return tomli_w.dumps({"command": self.command, **self.fields})


# -- parsing ----------------------------------------------------------------


def _line_of(text, key):
    m = re.search(rf"^\s*{re.escape(key)}\s*=", text, re.MULTILINE)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _int_list(v, key, length=None):
    if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise JobError(f"{key!r} must be an array of integers", key=key)
    if length is not None and len(v) not in length:
        raise JobError(f"{key!r} must have {' or '.join(map(str, length))} entries", key=key)
    return v


def _curve(spec, key):
    try:
        return ec.CurveOverQ.from_list(_int_list(spec.get(key), key, (2, 5)))
    except ec.SingularCurveError as exc:
        raise JobError(f"{key!r}: {exc}", key=key) from exc


def _point(spec, key, E):
    v = _int_list(spec.get(key), key, (3,))
    try:
        P = ec.RationalPoint(*v)
    except ValueError as exc:
        raise JobError(f"{key!r}: {exc}", key=key) from exc
    res = E.residual(P)
    if res:
        raise JobError(f"{key!r} {v} is not on the curve y^2 + a1xy + a3y = x^3 + a2x^2 + a4x + a6 "
                       f"with {list(E.ainvs)}: equation residual {res}", key=key)
    return P


def _rational(spec, key):
    v = spec.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise JobError(f"{key!r} must be an integer or a 'p/q' string", key=key)
    try:
        return Fraction(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise JobError(f"{key!r} is not a rational number: {v!r}", key=key) from exc


def _positive_int(spec, key, minimum=1):
    v = spec.get(key)
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise JobError(f"{key!r} must be an integer >= {minimum}", key=key)
    return v


def _parse_chain(spec, E):
    raw = spec.get("chain")
    if not isinstance(raw, list) or not raw or not all(isinstance(s, str) for s in raw):
        raise JobError("'chain' must be a nonempty array of step strings", key="chain")
    steps, cur = [], E
    for s in raw:
        kind, _, arg = s.partition(":")
        try:
            if kind == "mul":
                steps.append(sup.MultiplyBy(int(arg)))
            elif kind == "isogeny":
                K = ec.RationalPoint(*(int(c) for c in arg.split(":")))
                if not cur.contains(K):
                    raise JobError(f"chain step {s!r}: kernel point not on {cur}", key="chain")
                j = ec.velu_isogeny(cur, K)
                steps.append(j)
                cur = j.codomain
            else:
                raise JobError(f"chain step {s!r}: expected 'mul:N' or 'isogeny:X:Y:Z'", key="chain")
        except (ValueError, TypeError) as exc:
            if isinstance(exc, JobError):
                raise
            raise JobError(f"chain step {s!r}: {exc}", key="chain") from exc
    return sup.HomChain(E, tuple(steps))


def _validate(spec: JobSpec):
    f = spec.fields
    if "primes_max" in f:
        _positive_int(spec, "primes_max", sup.MIN_PRIME)
    if "threads" in f:
        _positive_int(spec, "threads")
    if "skip" in f:
        _int_list(f["skip"], "skip")
    if "format" in f and f["format"] not in FORMATS:
        raise JobError(f"'format' must be one of {FORMATS}", key="format")
    for k in ("out", "cache"):
        if k in f and not isinstance(f[k], str):
            raise JobError(f"{k!r} must be a string path", key=k)
    if "figure" in f and not isinstance(f["figure"], bool):
        raise JobError("'figure' must be true or false", key="figure")
    build(spec)


def parse_job(text: str) -> JobSpec:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        if m:
            line = int(m.group(1))
        else:
            # "at end of document": blame the last non-blank line
            line = len(text.rstrip().splitlines()) or None
        raise JobError(f"syntax error: {exc}", line=line) from exc
    command = data.pop("command", None)
    if command not in COMMANDS:
        raise JobError(f"'command' must be one of {COMMANDS}", line=_line_of(text, "command"), key="command")
    required, optional = _KEYS[command]
    for key in data:
        if key not in required | optional | _COMMON:
            raise JobError(f"unknown key {key!r} for command {command!r}", line=_line_of(text, key), key=key)
    for key in sorted(required):
        if key not in data:
            raise JobError(f"missing required field {key!r}", key=key)
    spec = JobSpec(command, data)
    try:
        _validate(spec)
    except JobError as exc:
        if exc.line is None and exc.key is not None:
            raise JobError(str(exc), line=_line_of(text, exc.key), key=exc.key) from None
        raise
    return spec


def load_job(path) -> JobSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise JobError(f"cannot read job file {path}: {exc}") from exc
    return parse_job(text)


# -- building and running ---------------------------------------------------


def build(spec: JobSpec) -> dict:
    """Typed inputs for the job's command (raises JobError naming the field)."""
    c = spec.command
    out: dict = {}
    if c == "scan-gm" or (c == "infer-n" and spec.get("mode") == "gm"):
        for k in ("x", "y"):
            if k not in spec.fields:
                raise JobError(f"missing required field {k!r}", key=k)
            q = _rational(spec, k)
            if q in (0, 1, -1):
                raise JobError(f"{k!r} must not be 0 or +-1", key=k)
            out[k] = q
    if c in ("scan-ec", "specialize", "density", "isogeny") or (c == "infer-n" and spec.get("mode") == "ec"):
        for k in ("curve", "point") if c != "isogeny" else ("curve",):
            if k not in spec.fields:
                raise JobError(f"missing required field {k!r}", key=k)
        out["curve"] = E = _curve(spec, "curve")
        if "point" in spec.fields:
            out["point"] = _point(spec, "point", E)
    if c == "infer-n":
        if spec.get("mode") not in ("ec", "gm"):
            raise JobError("'mode' must be 'ec' or 'gm'", key="mode")
        out["n_bound"] = _positive_int(spec, "n_bound")
    if c in ("scan-ec", "infer-n") and "curve" in out:
        E2 = _curve(spec, "curve2") if "curve2" in spec.fields else out["curve"]
        if "point2" not in spec.fields:
            raise JobError("missing required field 'point2'", key="point2")
        out["curve2"], out["point2"] = E2, _point(spec, "point2", E2)
    if c == "specialize":
        out["chain"] = _parse_chain(spec, out["curve"])
    if c == "density":
        ell = _positive_int(spec, "ell", 2)
        if not is_probable_prime(ell):
            raise JobError("'ell' must be prime", key="ell")
        out["ell"] = ell
        if "torsion" in spec.fields:
            out["torsion"] = _point(spec, "torsion", out["curve"])
    if c == "isogeny":
        K = _point(spec, "kernel", out["curve"])
        try:
            out["isogeny"] = ec.velu_isogeny(out["curve"], K)
        except ec.IsogenyError as exc:
            raise JobError(f"'kernel': {exc}", key="kernel") from exc
    if c == "sl2":
        fields_ = _int_list(spec.get("fields", [5, 7, 11, 13]), "fields")
        for q in fields_:
            if not is_probable_prime(q) or q > sl2.EXHAUSTIVE_CENSUS_MAX:
                raise JobError(f"'fields' entries must be primes <= {sl2.EXHAUSTIVE_CENSUS_MAX}", key="fields")
        out["fields"] = fields_
        if "modulus" in spec.fields:
            out["modulus"] = _positive_int(spec, "modulus", 2)
        if "unit" in spec.fields:
            if "modulus" not in out:
                raise JobError("'unit' needs 'modulus'", key="unit")
            out["unit"] = spec.get("unit")
    if c == "mahler":
        try:
            rule = mah.CoefficientRule(
                tuple(_int_list(spec.get("head", [1]), "head")),
                spec.get("tail", "constant"),
                tuple(_int_list(spec.get("tail_values", [1]), "tail_values")),
            )
        except ValueError as exc:
            if isinstance(exc, JobError):
                raise
            raise JobError(f"'tail': {exc}", key="tail") from exc
        out["map"] = mah.MahlerMap(rule)
        out["modulus_max"] = _positive_int(spec, "modulus_max", 2) if "modulus_max" in spec.fields else 50
        out["range"] = _positive_int(spec, "range") if "range" in spec.fields else 200
        out["degree_max"] = _positive_int(spec, "degree_max", 0) if "degree_max" in spec.fields else 30
    return out


@dataclass
class RunResult:
    status: int
    report: object = None
    summary: dict = field(default_factory=dict)
    written: list = field(default_factory=list)


def _sl2_report(args):
    table = sl2.census_table(args["fields"])
    summary = table.summary()
    if "modulus" in args:
        m = args["modulus"]
        units = [args["unit"]] if "unit" in args else [a for a in range(1, m) if math.gcd(a, m) == 1]
        ok = True
        for a in units:
            try:
                factors = sl2.deligne_factorization(a, m)
            except sl2.DomainError as exc:
                raise JobError(f"'unit': {exc}", key="unit") from exc
            ok &= sl2.product(factors) == sl2.diag(pow(a, -1, m), a, m)
        summary["deligne_identity_holds"] = ok
        summary["deligne_units_checked"] = len(units)
    return table, summary, summary.get("deligne_identity_holds", True)


def run_job(spec: JobSpec, figure: bool | None = None) -> RunResult:
    """Run a validated job, write its report (and figure) and return the status."""
    try:
        args = build(spec)
        cache_path = spec.get("cache") or default_cache_path()
        cache = OrderCache(cache_path) if cache_path else OrderCache()
        cfg = sup.ScanConfig(spec.bound, frozenset(spec.get("skip", ())), cache, spec.get("threads", 1))
    except (JobError, CacheError, sup.InputError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return RunResult(EXIT_INPUT)
    c = spec.command
    summary = None
    try:
        if c == "scan-gm":
            report = sup.scan_gm(args["x"], args["y"], cfg)
            ok = not report.violations
        elif c == "scan-ec":
            report = sup.scan_ec(args["curve"], args["point"], args["curve2"], args["point2"], cfg)
            ok = not report.violations
        elif c == "infer-n":
            if spec.get("mode") == "gm":
                report = sup.infer_multiplier_gm(args["x"], args["y"], args["n_bound"], cfg)
            else:
                report = sup.infer_multiplier_ec(args["curve"], args["point"], args["point2"],
                                                 args["n_bound"], cfg, codomain=args["curve2"])
            ok = report.verified
        elif c == "specialize":
            report = sup.check_specialization(args["chain"], args["point"], cfg)
            ok = report.all_commute
        elif c == "density":
            if "torsion" in args:
                report = dens.torsion_shift_scan(args["curve"], args["point"], args["torsion"], cfg)
                ok = report.cross_check_holds
            else:
                report = dens.density_scan(args["curve"], args["point"], args["ell"], cfg)
                ok = True
        elif c == "isogeny":
            j = args["isogeny"]
            if "point" in args:
                report = sup.check_specialization(sup.HomChain(args["curve"], (j,)), args["point"], cfg)
                ok = report.all_commute
            else:
                report = sup.SpecializationReport("isogeny", cfg.bound, (), ())
                ok = True
        elif c == "sl2":
            report, summary, ok = _sl2_report(args)
        else:
            report = mah.mahler_report(args["map"], args["modulus_max"], args["range"], args["degree_max"])
            s = report.summary()
            ok = s["all_commute"] and s["nonpolynomial_degrees"] == s["degrees_tested"]
    except (sup.InputError, ec.NotOnCurveError, ec.IsogenyError, JobError, CacheError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return RunResult(EXIT_INPUT)
    if summary is None:
        summary = report.summary()
    if c == "isogeny":
        j = args["isogeny"]
        summary.update(kind="isogeny", degree=j.degree, codomain=list(j.codomain.ainvs))
        if "point" in args:
            summary["image"] = str(ec.isogeny_eval(j, args["point"]))

    result = RunResult(EXIT_OK if ok else EXIT_VIOLATION, report, summary)
    fmt = spec.get("format", "csv")
    data = render_report(report, fmt)
    out = spec.get("out")
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        result.written.append(path)
        if figure if figure is not None else spec.get("figure", True):
            from .plotting import render_figure

            fig_path = render_figure(report, path.with_suffix(".png"))
            if fig_path is not None:
                result.written.append(fig_path)
        print(json.dumps(summary, sort_keys=True, default=str))
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        print(json.dumps(summary, sort_keys=True, default=str), file=sys.stderr)
    return result
