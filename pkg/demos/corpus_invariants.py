"""
Invariants of the shipped configurations
========================================

Fits the weight quasi-polynomial of every corpus document and checks the
leading moment against the exact Duistermaat-Heckman measure.
"""

from __future__ import annotations

from tcspectra import fit_invariants, load_corpus
from tcspectra.rational import format_rat
from tcspectra.spectra import b0_from_dh, dh_measure, norms

corpus = load_corpus()
print(f"{'name':<16} {'a0':>6} {'b0':>8} {'F0':>8} {'F1':>8} {'|T|_2^2':>10}  b0 check")
for name, doc in corpus.items():
    cfg = doc.config
    inv = fit_invariants(cfg)
    # the same number from the survival function of the DH measure
    agree = inv.b0 == b0_from_dh(dh_measure(cfg))
    n2 = norms(cfg, 2).norm_pow
    print(f"{name:<16} {format_rat(inv.a0):>6} {format_rat(inv.b0):>8} {format_rat(inv.F0):>8} {format_rat(inv.F1):>8} {format_rat(n2):>10}  {agree}")
