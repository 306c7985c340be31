"""Command line front end.

Every verification command emits one JSON record per checked point with the
fields {check, lhs, rhs, residual, tolerance, pass}; ``check`` names the
identity being exercised (functional-equation, reflection-form, ladder-form,
basic-formula, main-identity, residue-formula, tube-line, zero-count,
growth).  Outputs are deterministic: fixed summation orders, shortest
round-tripping floats, no timestamps, so re-running a command with the same
configuration is bit-identical on the JSON payload.

Commands::

    forms                      structure constants of the built-in forms
    coeffs                     exact coefficient table (n, c(n), a(n))
    eval                       evaluate the twisted series at one point
    verify-basic               smoothed strip identity, two code paths
    verify-fe                  untwisted chain, or the reflection theorem
                               for one twist frequency when --alpha is given
    residues                   Cauchy circles against the closed form
    trivial-zeros              refine far-left zeros against the tube line
    count-zeros                winding count vs the counting main term
    growth                     fitted |F| growth exponents on one line
    report                     all suites, summary, residual histogram

A config file (``--config PATH``) holds ``key = value`` lines mirroring the
long flags, e.g. ``form = ETA24`` or ``tol = 1e-8``; flags given on the
command line win.  Exit codes: 0 all records pass, 1 any residual above
tolerance (or a refinement diverged), 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (ConvergenceError, DomainError, PoleProximityError,
                     StripConditionError)
from .etaq import PRESET_NAMES, build_preset
from .lfun import (LSeriesEvaluator, functional_equation_sides,
                   ladder_form_sides, reflection_form_sides)
from .twist import (F_X_twist, F_twist_continued, F_twist_series,
                    TwistContext, a_ladder, basic_formula_rhs, fe_rhs,
                    residue_circle, residue_kappa, twist_abscissa)
from .zeros import (growth_probe, nontrivial_zero_count,
                    rvm_linear_coefficient, rvm_prediction, tube_data,
                    tube_zero_count)

__all__ = ["main", "CLIError"]


class CLIError(Exception):
    """A configuration problem: bad flag value, bad config file, bad combo."""


# ---------------------------------------------------------------------------
# argument and config parsing
# ---------------------------------------------------------------------------

def parse_alpha(text: str) -> Fraction:
    """Exact rational p/q (or a bare integer).  Floats are refused on
    purpose: spectrum membership is decided in exact arithmetic and a float
    frequency has no well-defined answer."""
    body = text.strip()
    parts = body.split("/")
    if len(parts) > 2 or not all(p.strip().isdigit() for p in parts):
        raise CLIError(
            f"--alpha takes an exact positive rational like 5/12, got {text!r}")
    p = int(parts[0])
    q = int(parts[1]) if len(parts) == 2 else 1
    if q == 0:
        raise CLIError("--alpha has denominator zero")
    alpha = Fraction(p, q)
    if alpha <= 0:
        raise CLIError("--alpha must be positive")
    return alpha


def _alpha_type(text: str) -> Fraction:
    try:
        return parse_alpha(text)
    except CLIError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _float_list_type(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _points_type(text: str) -> str | int:
    if text == "default":
        return text
    try:
        n = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"--points takes 'default' or an integer, got {text!r}") from exc
    if n < 1:
        raise argparse.ArgumentTypeError("--points must be positive")
    return n


def load_config(path: str) -> list[tuple[str, str]]:
    """Plain key-value lines, ``#`` comments, order preserved."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CLIError(f"cannot read config file {path!r}: {exc}") from exc
    entries: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" in body:
            key, _, value = body.partition("=")
        else:
            key, _, value = body.partition(" ")
        key = key.strip()
        value = value.strip()
        if not key:
            raise CLIError(f"{path}:{lineno}: missing key")
        entries.append((key, value))
    return entries


_TRUE_WORDS = {"1", "true", "yes", "on"}
_FALSE_WORDS = {"0", "false", "no", "off", ""}


def _config_flags(entries: list[tuple[str, str]],
                  sub: argparse.ArgumentParser) -> list[str]:
    """Turn config entries into an argv fragment for one subcommand."""
    known = sub._option_string_actions
    out: list[str] = []
    for key, value in entries:
        flag = "--" + key
        action = known.get(flag)
        if action is None:
            raise CLIError(f"config key {key!r} is not a flag of this command")
        if action.nargs == 0:
            low = value.lower()
            if low in _TRUE_WORDS:
                out.append(flag)
            elif low in _FALSE_WORDS:
                pass
            else:
                raise CLIError(f"config key {key!r} wants a boolean, "
                               f"got {value!r}")
        else:
            out.extend((flag, value))
    return out


def _inject_config(argv: list[str],
                   subparsers) -> list[str]:
    """Splice config-file values in front of the explicit flags (flags win)."""
    if not argv or argv[0].startswith("-"):
        return argv
    path = None
    it = iter(range(len(argv)))
    for i in it:
        tok = argv[i]
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return argv
    sub = subparsers.choices.get(argv[0])
    if sub is None:
        return argv
    entries = load_config(path)
    return [argv[0]] + _config_flags(entries, sub) + argv[1:]


# ---------------------------------------------------------------------------
# records and output
# ---------------------------------------------------------------------------

def _jval(v):
    """JSON-safe value: complex becomes [re, im], Fraction a p/q string."""
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _record(check: str, extras: dict, lhs, rhs,
            residual: float, tol: float) -> dict:
    rec: dict = {"check": check}
    for key, value in extras.items():
        rec[key] = _jval(value)
    rec["lhs"] = _jval(lhs)
    rec["rhs"] = _jval(rhs)
    rec["residual"] = float(residual)
    rec["tolerance"] = float(tol)
    rec["pass"] = bool(residual <= tol)
    return rec


_RECORD_TAIL = ("lhs_re", "lhs_im", "rhs_re", "rhs_im",
                "residual", "tolerance", "pass")


def _record_row(rec: dict, extras: tuple[str, ...]) -> tuple:
    lhs, rhs = rec["lhs"], rec["rhs"]
    if not isinstance(lhs, list):
        lhs = [lhs, 0.0]
    if not isinstance(rhs, list):
        rhs = [rhs, 0.0]
    head = tuple(rec[k] for k in extras)
    return head + (lhs[0], lhs[1], rhs[0], rhs[1],
                   rec["residual"], rec["tolerance"], rec["pass"])


@dataclass
class CommandResult:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple]
    records: list[dict]
    failures: int = 0
    histogram: list[tuple[str, int, int, int]] = field(default_factory=list)
    summary: str = ""


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(columns: tuple[str, ...], rows: list[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _json_text(records: list[dict]) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)


def _table_cell(v) -> str:
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def _table_text(columns: tuple[str, ...], rows: list[tuple]) -> str:
    cells = [tuple(_table_cell(v) for v in row) for row in rows]
    widths = [len(c) for c in columns]
    for row in cells:
        for i, c in enumerate(row):
            widths[i] = max(widths[i], len(c))
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    for row in cells:
        lines.append("  ".join(c.ljust(w)
                               for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _residual_histogram(records: list[dict]
                        ) -> list[tuple[str, int, int, int]]:
    """log10-binned residual counts per check, plot-ready."""
    counts: dict[tuple[str, int], int] = {}
    for rec in records:
        r = rec.get("residual")
        if r is None:
            continue
        lo = math.floor(math.log10(r)) if r > 0 else -18
        lo = max(-18, min(1, lo))
        key = (rec["check"], lo)
        counts[key] = counts.get(key, 0) + 1
    return [(check, lo, lo + 1, n)
            for (check, lo), n in sorted(counts.items())]


def _emit(result: CommandResult, args: argparse.Namespace) -> None:
    as_json = getattr(args, "json", False)
    as_csv = getattr(args, "csv", False)
    if as_json:
        sys.stdout.write(_json_text(result.records))
    elif as_csv:
        sys.stdout.write(_csv_text(result.columns, result.rows))
    else:
        if result.summary:
            sys.stdout.write(result.summary)
        sys.stdout.write(_table_text(result.columns, result.rows))
    out_dir = getattr(args, "out", None)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)

        def write(fname: str, text: str) -> None:
            with open(os.path.join(out_dir, fname), "w",
                      encoding="utf-8", newline="\n") as fh:
                fh.write(text)

        write(result.name + ".json", _json_text(result.records))
        write(result.name + ".csv", _csv_text(result.columns, result.rows))
        if result.histogram:
            write("histogram.csv",
                  _csv_text(("check", "log10_lo", "log10_hi", "count"),
                            list(result.histogram)))
        if result.summary:
            write("summary.txt",
                  result.summary + _table_text(result.columns, result.rows))


def _count_failures(records: list[dict]) -> int:
    return sum(1 for r in records if r.get("pass") is False)


# ---------------------------------------------------------------------------
# check cores (shared between single commands and the report)
# ---------------------------------------------------------------------------

_CHAIN_EXTRAS = ("form", "sigma", "t", "check")
_TWIST_EXTRAS = ("form", "alpha", "sigma", "t", "check")
_BASIC_EXTRAS = ("form", "alpha", "sigma", "t", "x", "check")
_RESIDUE_EXTRAS = ("form", "alpha", "ell", "check")

_CHAIN_POINTS = tuple(complex(sig, t)
                      for sig in (-1.0, -0.25, 0.5, 1.25, 2.0)
                      for t in (0.6, -2.3))

_THEOREM_SIGMAS = (-1.5, -1.2, -0.9, -0.6, -0.3)
_THEOREM_TS = (2.0, -10.0)


def _rel(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def chain_records(form_name: str, points: tuple[complex, ...],
                  tol: float) -> list[dict]:
    """Untwisted consistency chain: symmetric, reflected and ladder forms."""
    form = build_preset(form_name)
    ev = LSeriesEvaluator(form)
    ladder = tuple(int(a) for a in a_ladder(form.h_star))
    records = []
    for s in points:
        extras = {"form": form_name, "sigma": s.real, "t": s.imag}
        for check, (lhs, rhs) in (
                ("functional-equation", functional_equation_sides(ev, s)),
                ("reflection-form", reflection_form_sides(ev, s)),
                ("ladder-form", ladder_form_sides(ev, s, ladder))):
            records.append(_record(check, extras, lhs, rhs,
                                   _rel(lhs, rhs), tol))
    return records


def theorem_grid(n: int | str) -> tuple[complex, ...]:
    """Left-strip sample points for the reflection theorem."""
    default = tuple(complex(sig, t)
                    for sig in _THEOREM_SIGMAS for t in _THEOREM_TS)
    if n == "default":
        return default
    if n <= len(default):
        return default[:n]
    sigmas = np.linspace(-1.5, -0.3, (n + 1) // 2)
    grid = tuple(complex(sig, t) for sig in sigmas for t in _THEOREM_TS)
    return grid[:n]


def main_identity_records(form_name: str, alpha: Fraction,
                          points: tuple[complex, ...],
                          tol: float) -> list[dict]:
    """Continued twist against its reflected series, left of the strip."""
    tc = TwistContext.for_preset(form_name, alpha)
    fe_tol = min(1e-7, 0.1 * tol)
    cont_tol = min(1e-8, 0.01 * tol)
    records = []
    for s in points:
        lhs = F_twist_continued(tc, s, tol=cont_tol).value
        rhs = fe_rhs(tc, s, tol=fe_tol).value
        resid = abs(lhs - rhs) / max(1.0, abs(rhs))
        records.append(_record(
            "main-identity",
            {"form": form_name, "alpha": alpha, "sigma": s.real, "t": s.imag},
            lhs, rhs, resid, tol))
    return records


def basic_records(form_name: str, alpha: Fraction,
                  points: tuple[complex, ...], xs: tuple[float, ...],
                  tol: float) -> list[dict]:
    """Smoothed sum against its reflected double series inside the strip."""
    tc = TwistContext.for_preset(form_name, alpha)
    records = []
    for x in xs:
        for s in points:
            lhs = F_X_twist(tc, s, x).value
            rhs = basic_formula_rhs(tc, s, x).value
            resid = abs(lhs - rhs) / max(abs(lhs), 1e-300)
            records.append(_record(
                "basic-formula",
                {"form": form_name, "alpha": alpha,
                 "sigma": s.real, "t": s.imag, "x": x},
                lhs, rhs, resid, tol))
    return records


def basic_strip_points(delta: float) -> tuple[complex, ...]:
    """Six points inside the overlap of (-2 delta, -delta) with the
    asserted strip of the reflected evaluator."""
    if not 0.0 < delta <= 0.45:
        raise CLIError("--delta must lie in (0, 0.45]")
    lo = max(-2.0 * delta, -0.8)
    hi = min(-delta, -0.4)
    if not lo < hi:
        raise CLIError(
            f"delta = {delta} leaves no overlap with the asserted strip "
            "(-0.8, -0.4); use delta in (0.2, 0.45]")
    sigmas = tuple(lo + f * (hi - lo) for f in (0.2, 0.5, 0.8))
    return tuple(complex(sig, t) for sig in sigmas for t in (0.7, -1.1))


def residue_records(form_name: str, alpha: Fraction, ells: tuple[int, ...],
                    radius: float, points: int, tol_spectral: float,
                    tol_entire: float) -> list[dict]:
    """Cauchy circles at the candidate poles.

    On the twist spectrum the circle must reproduce the closed-form residue;
    off it the same average certifies analyticity by being tiny."""
    tc = TwistContext.for_preset(form_name, alpha)
    records = []
    for ell in ells:
        circ = residue_circle(tc, ell, radius=radius, points=points)
        extras = {"form": form_name, "alpha": alpha, "ell": ell}
        if tc.in_spectrum:
            kap = residue_kappa(tc, ell)
            resid = abs(circ.value - kap) / abs(kap)
            records.append(_record("residue-formula", extras, circ.value,
                                   kap, resid, tol_spectral))
        else:
            records.append(_record("residue-formula", extras, circ.value,
                                   0.0 + 0.0j, abs(circ.value), tol_entire))
    return records


def tube_records(form_name: str, alpha: Fraction, beta_lo: float,
                 beta_hi: float, eps: float,
                 refine_tol: float) -> list[dict]:
    """Refined far-left zeros against the predicted tube line."""
    if not beta_lo < beta_hi <= 0.0:
        raise CLIError("--range wants BETA_LO,BETA_HI with "
                       "BETA_LO < BETA_HI <= 0")
    tc = TwistContext.for_preset(form_name, alpha)
    td = tube_data(tc)
    zeros = tube_zero_count(tc, beta_hi - beta_lo, sigma0=-beta_hi,
                            tol=refine_tol)
    records = []
    for z in zeros:
        beta = z.location.real
        on_line = complex(beta, td.line_t(beta))
        records.append(_record(
            "tube-line",
            {"form": form_name, "alpha": alpha, "kind": z.kind,
             "zero_residual": z.residual},
            z.location, on_line, z.distance_to_line, eps))
    return records


def count_record(form_name: str, alpha: Fraction, big_t: float,
                 slack: float = 3.0) -> dict:
    """Winding count against the two-term counting prediction.

    The admitted deviation is ``slack * log T``; the unresolved constant in
    the remainder makes any fixed numeric tolerance arbitrary, so the slack
    is deliberately generous and the cross-T ratio test lives in the suite.
    """
    tc = TwistContext.for_preset(form_name, alpha)
    counted = nontrivial_zero_count(tc, big_t)
    predicted = rvm_prediction(tc, big_t)
    return _record(
        "zero-count",
        {"form": form_name, "alpha": alpha, "T": big_t,
         "linear_coefficient": rvm_linear_coefficient(tc)},
        float(counted), predicted, abs(counted - predicted),
        slack * math.log(big_t))


def growth_records(form_name: str, alpha: Fraction, sigma: float,
                   tmin: float, tmax: float, npts: int,
                   tol: float | None) -> list[dict]:
    """Fitted growth exponents of |F| on one vertical line, both t signs."""
    tc = TwistContext.for_preset(form_name, alpha)
    absc = twist_abscissa(tc.form)
    if sigma <= 0.0:
        expected, default_tol = 1.0 - 2.0 * sigma, 0.15
    elif sigma >= absc + 0.25:
        expected, default_tol = 0.0, 0.10
    else:
        raise StripConditionError(
            f"growth fits need sigma <= 0 or sigma >= {absc + 0.25}")
    use_tol = default_tol if tol is None else tol
    ts = tuple(float(v) for v in np.geomspace(tmin, tmax, npts))
    expo_plus, expo_minus = growth_probe(tc, sigma, ts)
    records = []
    for sign, expo in (("+", expo_plus), ("-", expo_minus)):
        records.append(_record(
            "growth",
            {"form": form_name, "alpha": alpha, "sigma": sigma, "sign": sign,
             "tmin": tmin, "tmax": tmax, "points": npts},
            float(expo), expected, abs(expo - expected), use_tol))
    return records


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_forms(args: argparse.Namespace) -> CommandResult:
    columns = ("form", "k", "level", "h_star", "mu", "abscissa",
               "omega_re", "omega_im", "dual_re", "dual_im", "support")
    rows = []
    records = []
    for name in PRESET_NAMES:
        form = build_preset(name)
        support = "squares" if form.square_support else "progression"
        rows.append((name, form.k, form.N, form.h_star, form.mu,
                     twist_abscissa(form), form.omega.real, form.omega.imag,
                     form.dual_phase.real, form.dual_phase.imag, support))
        records.append({
            "form": name, "k": form.k, "level": form.N,
            "h_star": form.h_star, "mu": form.mu,
            "abscissa": twist_abscissa(form),
            "omega": _jval(form.omega),
            "dual_phase": _jval(form.dual_phase),
            "support": support,
        })
    return CommandResult("forms", columns, rows, records)


def cmd_coeffs(args: argparse.Namespace) -> CommandResult:
    if args.max < 1:
        raise CLIError("--max must be at least 1")
    form = build_preset(args.form)
    n, c = form.support(args.max)
    _, a = form.support_normalized(args.max)
    rows = [(int(n[i]), int(c[i]), float(a[i])) for i in range(len(n))]
    records = [{"n": nn, "c": cc, "a": aa} for nn, cc, aa in rows]
    return CommandResult("coeffs", ("n", "c", "a"), rows, records)


_ROUTES = ("auto", "series", "smoothed", "continued", "reflected")


def cmd_eval(args: argparse.Namespace) -> CommandResult:
    tc = TwistContext.for_preset(args.form, args.alpha)
    s = complex(args.sigma, args.t)
    tol = 1e-6 if args.tol is None else args.tol
    route = args.route
    if route == "auto":
        absc = twist_abscissa(tc.form)
        if s.real >= absc + 0.25:
            route = "series"
        elif s.real <= -0.3:
            route = "reflected"
        else:
            route = "continued"
    if route == "series":
        ce = F_twist_series(tc, s, tol=min(tol, 1e-10))
    elif route == "smoothed":
        ce = F_X_twist(tc, s, args.x, tol=min(tol, 1e-10))
    elif route == "reflected":
        ce = fe_rhs(tc, s, tol=min(tol, 1e-8))
    else:
        ce = F_twist_continued(tc, s, tol=min(tol, 1e-8),
                               x_grid=args.xgrid)
    record = {
        "check": "evaluation", "form": args.form, "alpha": _jval(args.alpha),
        "sigma": s.real, "t": s.imag, "route": route, "method": ce.method,
        "value": _jval(ce.value), "error": float(ce.error),
        "tolerance": tol, "pass": bool(ce.error <= tol),
    }
    columns = ("form", "alpha", "sigma", "t", "route", "method",
               "value_re", "value_im", "error", "tolerance", "pass")
    rows = [(args.form, _jval(args.alpha), s.real, s.imag, route, ce.method,
             ce.value.real, ce.value.imag, float(ce.error), tol,
             record["pass"])]
    return CommandResult("eval", columns, rows, [record],
                         failures=0 if record["pass"] else 1)


def cmd_verify_basic(args: argparse.Namespace) -> CommandResult:
    tol = 1e-8 if args.tol is None else args.tol
    xs = args.xgrid if args.xgrid is not None else (50.0, 100.0)
    if any(x <= 1.0 for x in xs):
        raise CLIError("--xgrid smoothing scales must exceed 1")
    points = basic_strip_points(args.delta)
    records = basic_records(args.form, args.alpha, points, tuple(xs), tol)
    rows = [_record_row(r, _BASIC_EXTRAS) for r in records]
    return CommandResult("verify-basic", _BASIC_EXTRAS + _RECORD_TAIL, rows,
                         records, failures=_count_failures(records))


def cmd_verify_fe(args: argparse.Namespace) -> CommandResult:
    if args.alpha is None:
        tol = 1e-8 if args.tol is None else args.tol
        points = _CHAIN_POINTS
        if args.points != "default":
            points = _chain_grid(args.points)
        records = chain_records(args.form, points, tol)
        extras = _CHAIN_EXTRAS
        name = "verify-fe"
    else:
        tol = 1e-6 if args.tol is None else args.tol
        records = main_identity_records(args.form, args.alpha,
                                        theorem_grid(args.points), tol)
        extras = _TWIST_EXTRAS
        name = "verify-fe"
    rows = [_record_row(r, extras) for r in records]
    return CommandResult(name, extras + _RECORD_TAIL, rows, records,
                         failures=_count_failures(records))


def _chain_grid(n: int) -> tuple[complex, ...]:
    if n <= len(_CHAIN_POINTS):
        return _CHAIN_POINTS[:n]
    sigmas = np.linspace(-1.0, 2.0, (n + 1) // 2)
    grid = tuple(complex(sig, t) for sig in sigmas for t in (0.6, -2.3))
    return grid[:n]


def cmd_residues(args: argparse.Namespace) -> CommandResult:
    tc = TwistContext.for_preset(args.form, args.alpha)
    ells = tuple(range(tc.h_star + 1)) if args.ell is None else (args.ell,)
    tol_spectral = 1e-5 if args.tol is None else args.tol
    tol_entire = 1e-6 if args.tol is None else args.tol
    records = residue_records(args.form, args.alpha, ells, args.radius,
                              args.points if args.points != "default" else 8,
                              tol_spectral, tol_entire)
    rows = [_record_row(r, _RESIDUE_EXTRAS) for r in records]
    return CommandResult("residues", _RESIDUE_EXTRAS + _RECORD_TAIL, rows,
                         records, failures=_count_failures(records))


def cmd_trivial_zeros(args: argparse.Namespace) -> CommandResult:
    if len(args.range) != 2:
        raise CLIError("--range wants exactly BETA_LO,BETA_HI")
    tol = 1e-8 if args.tol is None else args.tol
    records = tube_records(args.form, args.alpha, args.range[0],
                           args.range[1], args.eps, tol)
    columns = ("beta", "gamma", "residual", "kind", "distance_to_line")
    rows = [(r["lhs"][0], r["lhs"][1], r["zero_residual"], r["kind"],
             r["residual"]) for r in records]
    return CommandResult("trivial-zeros", columns, rows, records,
                         failures=_count_failures(records))


def cmd_count_zeros(args: argparse.Namespace) -> CommandResult:
    if args.T <= math.e:
        raise CLIError("--T must exceed e for the counting main term")
    record = count_record(args.form, args.alpha, args.T)
    extras = ("form", "alpha", "T", "linear_coefficient", "check")
    rows = [_record_row(record, extras)]
    return CommandResult("count-zeros", extras + _RECORD_TAIL, rows,
                         [record], failures=_count_failures([record]))


def cmd_growth(args: argparse.Namespace) -> CommandResult:
    if args.points == "default":
        npts = 12
    else:
        npts = args.points
    if npts < 4:
        raise CLIError("--points must be at least 4 for a meaningful fit")
    if not 0.0 < args.tmin < args.tmax:
        raise CLIError("need 0 < --tmin < --tmax")
    records = growth_records(args.form, args.alpha, args.sigma, args.tmin,
                             args.tmax, npts, args.tol)
    extras = ("form", "alpha", "sigma", "sign", "check")
    rows = [_record_row(r, extras) for r in records]
    return CommandResult("growth", extras + _RECORD_TAIL, rows, records,
                         failures=_count_failures(records))


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

_REPORT_MAIN_COMBOS = (
    ("ETA24", Fraction(1, 12)),
    ("ETA24", Fraction(3, 10)),
    ("ETA8_CUBED", Fraction(1, 4)),
    ("ETA8_CUBED", Fraction(1, 3)),
    ("ETA8_FIFTH", Fraction(1, 24)),
)

_REPORT_MAIN_POINTS = tuple(complex(sig, t)
                            for sig in (-1.2, -0.6) for t in (2.0, -3.0))
_REPORT_MAIN_POINTS_SLOW = (complex(-1.2, 2.0), complex(-0.6, -3.0))

_REPORT_BASIC_COMBOS = (("ETA24", Fraction(1, 12)),
                        ("ETA8_CUBED", Fraction(1, 4)))
_REPORT_BASIC_POINTS = (complex(-0.6, 0.7), complex(-0.68, -1.1))

_REPORT_RESIDUE_COMBOS = (("ETA24", Fraction(1, 12)),
                          ("ETA8_CUBED", Fraction(1, 4)),
                          ("ETA24", Fraction(3, 10)))


def report_records() -> list[dict]:
    """The full verification suite at desk scale, deterministic order."""
    records: list[dict] = []
    for name in PRESET_NAMES:
        records.extend(chain_records(name, _CHAIN_POINTS[:4], 1e-8))
    for name, alpha in _REPORT_MAIN_COMBOS:
        pts = (_REPORT_MAIN_POINTS_SLOW if name == "ETA8_FIFTH"
               else _REPORT_MAIN_POINTS)
        records.extend(main_identity_records(name, alpha, pts, 1e-6))
    for name, alpha in _REPORT_BASIC_COMBOS:
        records.extend(basic_records(name, alpha, _REPORT_BASIC_POINTS,
                                     (50.0,), 1e-8))
    for name, alpha in _REPORT_RESIDUE_COMBOS:
        records.extend(residue_records(name, alpha, (0,), 1e-3, 8,
                                       1e-5, 1e-6))
    records.extend(tube_records("ETA24", Fraction(1, 12), -30.0, -5.0,
                                0.05, 1e-8))
    records.append(count_record("ETA24", Fraction(1, 12), 15.0))
    records.extend(growth_records("ETA24", Fraction(1, 12), -1.0,
                                  20.0, 200.0, 12, None))
    records.extend(growth_records("ETA24", Fraction(1, 12), 2.0,
                                  20.0, 200.0, 12, None))
    return records


def cmd_report(args: argparse.Namespace) -> CommandResult:
    records = report_records()
    per_check: dict[str, list[dict]] = {}
    for rec in records:
        per_check.setdefault(rec["check"], []).append(rec)
    columns = ("check", "records", "failed", "worst_residual")
    rows = []
    for check in sorted(per_check):
        group = per_check[check]
        failed = _count_failures(group)
        worst = max(r["residual"] for r in group)
        rows.append((check, len(group), failed, worst))
    failures = _count_failures(records)
    status = "PASS" if failures == 0 else "FAIL"
    summary = (f"{status}: {len(records)} records, "
               f"{failures} above tolerance\n")
    return CommandResult("report", columns, rows, records,
                         failures=failures,
                         histogram=_residual_histogram(records),
                         summary=summary)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> tuple[argparse.ArgumentParser, argparse._SubParsersAction]:
    parser = argparse.ArgumentParser(
        prog="twistlab",
        description="Exponentially twisted L-series: evaluation and "
                    "identity verification.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command")

    def common(p: argparse.ArgumentParser, form: str | None = "required",
               alpha: str | None = "required") -> None:
        if form is not None:
            p.add_argument("--form", required=(form == "required"),
                           help=f"one of {', '.join(PRESET_NAMES)}")
        if alpha is not None:
            p.add_argument("--alpha", type=_alpha_type,
                           required=(alpha == "required"),
                           help="twist frequency as an exact rational P/Q")
        p.add_argument("--config", help="key = value file mirroring the "
                                        "long flags; explicit flags win")
        p.add_argument("--tol", type=float, default=None,
                       help="pass/fail tolerance (command-specific default)")
        p.add_argument("--out", help="directory for JSON/CSV artifacts")
        p.add_argument("--json", action="store_true",
                       help="JSON lines on stdout instead of a table")
        p.add_argument("--csv", action="store_true",
                       help="CSV on stdout instead of a table")

    p = sub.add_parser("forms", help="structure constants of the presets")
    common(p, form=None, alpha=None)
    p.set_defaults(func=cmd_forms)

    p = sub.add_parser("coeffs", help="exact coefficients (n, c(n), a(n))")
    common(p, alpha=None)
    p.add_argument("--max", type=int, default=100,
                   help="largest index to list (default 100)")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("eval", help="evaluate the twisted series")
    common(p)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--route", choices=_ROUTES, default="auto")
    p.add_argument("--x", type=float, default=50.0,
                   help="smoothing scale for --route smoothed")
    p.add_argument("--xgrid", type=_float_list_type, default=None,
                   help="extrapolation scales a,b,c for --route continued")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify-basic",
                       help="smoothed strip identity on two code paths")
    common(p)
    p.add_argument("--delta", type=float, default=0.4,
                   help="strip parameter in (0, 0.45] (default 0.4)")
    p.add_argument("--xgrid", type=_float_list_type, default=None,
                   help="smoothing scales (default 50,100)")
    p.set_defaults(func=cmd_verify_basic)

    p = sub.add_parser("verify-fe",
                       help="untwisted chain, or the reflection theorem "
                            "for one twist frequency with --alpha")
    common(p, alpha="optional")
    p.add_argument("--points", type=_points_type, default="default",
                   help="'default' or a point count")
    p.set_defaults(func=cmd_verify_fe)

    p = sub.add_parser("residues", help="Cauchy circles at candidate poles")
    common(p)
    p.add_argument("--ell", type=int, default=None,
                   help="single ladder index (default: all)")
    p.add_argument("--radius", type=float, default=1e-3)
    p.add_argument("--points", type=_points_type, default=8,
                   help="trapezoid points on the circle (default 8)")
    p.set_defaults(func=cmd_residues)

    p = sub.add_parser("trivial-zeros",
                       help="refine far-left zeros against the tube line")
    common(p)
    p.add_argument("--range", type=_float_list_type, default=(-30.0, -5.0),
                   help="real-part window BETA_LO,BETA_HI "
                        "(write --range=-30,-5)")
    p.add_argument("--eps", type=float, default=0.05,
                   help="admitted distance to the tube line")
    p.set_defaults(func=cmd_trivial_zeros)

    p = sub.add_parser("count-zeros",
                       help="winding count against the counting main term")
    common(p)
    p.add_argument("--T", type=float, default=15.0,
                   help="height of the counting rectangle")
    p.set_defaults(func=cmd_count_zeros)

    p = sub.add_parser("growth", help="fitted growth exponents of |F|")
    common(p)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--tmin", type=float, default=20.0)
    p.add_argument("--tmax", type=float, default=200.0)
    p.add_argument("--points", type=_points_type, default=12)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("report", help="all verification suites, aggregated")
    common(p, form=None, alpha=None)
    p.set_defaults(func=cmd_report)

    return parser, sub


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub = build_parser()
    try:
        argv = _inject_config(argv, sub)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    try:
        if getattr(args, "json", False) and getattr(args, "csv", False):
            raise CLIError("--json and --csv both claim stdout; pick one "
                           "(use --out DIR to get both as files)")
        result = args.func(args)
        _emit(result, args)
    except (CLIError, DomainError, StripConditionError,
            PoleProximityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    if result.failures:
        failing = sorted({r["check"] for r in result.records
                          if r.get("pass") is False})
        print(f"FAIL {', '.join(failing)}: {result.failures} record(s) "
              f"above tolerance", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
