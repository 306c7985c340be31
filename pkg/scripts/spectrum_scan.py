#!/usr/bin/env python3
"""List the first twist frequencies on the spectrum of a form.

For each spectral alpha the closed-form residue at the top pole and the
implied normalization constant are printed; the constant must not depend
on alpha, so its relative spread across the scan is the interesting number
(it certifies the residue formula's alpha-dependence).

Example:
    python3 scripts/spectrum_scan.py --form ETA24 --count 8
"""

from __future__ import annotations

import argparse

from twistlab.etaq import build_preset
from twistlab.twist import (TwistContext, cf_from_residue, residue_kappa,
                            spectral_alphas)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--form", default="ETA24")
    ap.add_argument("--count", type=int, default=6)
    args = ap.parse_args(argv)

    form = build_preset(args.form)
    alphas = spectral_alphas(form, args.count)
    if not alphas:
        print(f"{args.form}: empty spectrum (no supported square index)")
        return 0

    constants = []
    print(f"{args.form}: first {len(alphas)} spectral frequencies")
    print(f"{'alpha':>10}  {'n_alpha':>8}  {'kappa_0':>28}  {'C_F':>14}")
    for alpha in alphas:
        tc = TwistContext(form, alpha)
        kap = residue_kappa(tc, 0)
        cf = cf_from_residue(tc, 0, kap)
        constants.append(cf)
        print(f"{str(alpha):>10}  {str(tc.n_alpha):>8}  "
              f"{kap.real:+.6e}{kap.imag:+.6e}j  {abs(cf):14.10f}")

    mean = sum(constants) / len(constants)
    spread = max(abs(c - mean) for c in constants) / abs(mean)
    print(f"normalization constant spread: {spread:.2e} (should be ~1e-16)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
