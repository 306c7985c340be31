#!/usr/bin/env python3
"""Measure how fast the smoothing remainder dies as the scale X grows.

At a point s left of the critical strip the smoothed sum minus the singular
part should approach the reflected series like c/X: the script evaluates
r(X) = F_X - Sigma_X - fe_rhs on a doubling grid of scales, prints |r(X)|
per scale and the fitted log-log exponent (expected near -1, approached
from above because the next-order term has the same sign).

Example:
    python3 scripts/xdecay_probe.py --form ETA24 --alpha 1/12 --sigma=-0.5 --t 1
"""

from __future__ import annotations

import argparse

import numpy as np

from twistlab.cli import parse_alpha
from twistlab.twist import F_X_twist, TwistContext, fe_rhs, sigma_X


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--form", default="ETA24")
    ap.add_argument("--alpha", type=parse_alpha, default="1/12")
    ap.add_argument("--sigma", type=float, default=-0.5)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--x-start", type=float, default=50.0)
    ap.add_argument("--doublings", type=int, default=3)
    args = ap.parse_args(argv)

    tc = TwistContext.for_preset(args.form, args.alpha)
    s = complex(args.sigma, args.t)
    limit = fe_rhs(tc, s, tol=1e-9).value
    print(f"{args.form} alpha={args.alpha} s={s}")
    print(f"reflected limit {limit:.12g}")

    xs = [args.x_start * 2.0 ** j for j in range(args.doublings + 1)]
    remainders = []
    for x in xs:
        r = F_X_twist(tc, s, x).value - sigma_X(tc, s, x) - limit
        remainders.append(abs(r))
        print(f"  X = {x:7.1f}   |r(X)| = {abs(r):.6e}")

    slope = float(np.polyfit(np.log(xs), np.log(remainders), 1)[0])
    print(f"fitted exponent {slope:+.4f}  (expected near -1)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
