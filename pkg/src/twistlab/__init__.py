"""twistlab: numerics for exponentially twisted L-series of half-integral
weight cusp forms.

Submodules:
    etaq        exact eta-product q-expansions and the preset forms
    logcomplex  log-domain complex arithmetic
    special     gamma family (log gamma, incomplete gamma, Mellin-Barnes)
    lfun        untwisted L-series evaluators (direct and completed)
    twist       the exponentially twisted series, its reflection identity,
                truncated sums and extrapolated analytic continuation
    zeros       trivial-zero geometry, zero counting, growth probes
    cli         command line interface
"""

__version__ = "0.1.0"
