#!/usr/bin/env python3
"""Survey the far-left zero tube for one form across several frequencies.

For each requested alpha the script prints the two-term tube data (gaps,
phases, line slope and intercept), the predicted seed spacing, then refines
every predicted zero in the requested window and reports the worst distance
to the line and the zero density per unit length in each 10-wide subwindow.

Example:
    python3 scripts/tube_survey.py --form ETA24 --alphas 1/12,5/12,7/12
    python3 scripts/tube_survey.py --form ETA8_FIFTH --alphas 1/24 --range=-20,-5
"""

from __future__ import annotations

import argparse
import csv
import sys
from fractions import Fraction

from twistlab.cli import parse_alpha
from twistlab.twist import TwistContext
from twistlab.zeros import seed_spacing, tube_data, tube_zero_count


def survey(form: str, alpha: Fraction, lo: float, hi: float) -> dict:
    tc = TwistContext.for_preset(form, alpha)
    td = tube_data(tc)
    zeros = tube_zero_count(tc, hi - lo, sigma0=-hi)
    worst = max((z.distance_to_line for z in zeros), default=0.0)
    densities = []
    edge = lo
    while edge < hi - 1e-9:
        top = min(edge + 10.0, hi)
        n = sum(1 for z in zeros if edge <= z.location.real < top)
        densities.append(n / (top - edge))
        edge = top
    return {
        "form": form,
        "alpha": alpha,
        "m_plus": float(td.m_plus),
        "m_minus": float(td.m_minus),
        "slope": td.slope,
        "intercept": td.intercept,
        "spacing": seed_spacing(td),
        "zeros": len(zeros),
        "worst_distance": worst,
        "densities": densities,
    }


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--form", default="ETA24")
    ap.add_argument("--alphas", default="1/12,5/12,7/12",
                    help="comma-separated exact rationals")
    ap.add_argument("--range", default="-30,-5",
                    help="real-part window LO,HI (write --range=-30,-5)")
    ap.add_argument("--csv", help="also write rows to this file")
    args = ap.parse_args(argv)

    lo, hi = (float(v) for v in args.range.split(","))
    rows = []
    for text in args.alphas.split(","):
        r = survey(args.form, parse_alpha(text), lo, hi)
        rows.append(r)
        print(f"{r['form']} alpha={r['alpha']}  gaps m+ = {r['m_plus']:g}, "
              f"m- = {r['m_minus']:g}")
        print(f"  line: t = {r['slope']:+.6f} beta {r['intercept']:+.6f}, "
              f"seed spacing {r['spacing']:.5f}")
        dens = ", ".join(f"{d:.3f}" for d in r["densities"])
        print(f"  {r['zeros']} zeros in [{lo:g}, {hi:g}), worst distance "
              f"to line {r['worst_distance']:.2e}, density/window: {dens}")

    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("form", "alpha", "m_plus", "m_minus", "slope",
                             "intercept", "spacing", "zeros",
                             "worst_distance"))
            for r in rows:
                writer.writerow((r["form"], r["alpha"], repr(r["m_plus"]),
                                 repr(r["m_minus"]), repr(r["slope"]),
                                 repr(r["intercept"]), repr(r["spacing"]),
                                 r["zeros"], repr(r["worst_distance"])))
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
