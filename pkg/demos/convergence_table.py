"""
Spectral measures approaching the DH measure
============================================

The level-k spectral measure is atomic; its Kolmogorov distance to the
limit measure shrinks like 1/k.
"""

from __future__ import annotations

from tcspectra import load_corpus
from tcspectra.rational import format_rat
from tcspectra.spectra import cdf_distance, dh_measure, spectral_measure

corpus = load_corpus()
for name in ("product_p1", "normal_cone_p1", "two_piece_p1", "blowup_product"):
    cfg = corpus[name].config
    dh = dh_measure(cfg)
    print(name)
    for k in (8, 16, 32, 64):
        d = cdf_distance(spectral_measure(cfg, k), dh).kolmogorov
        print(f"  k={k:<4} d={format_rat(d):<10} k*d={format_rat(k * d)}")
