"""
Distance to Kahler-Einstein metrics
===================================

On the anticanonical blow-up of the plane the product configuration has a
positive Donaldson-Futaki invariant, which gives a lower bound on how far any
toric metric is from being Kahler-Einstein.
"""

from __future__ import annotations

from tcspectra import load_corpus
from tcspectra.kebounds import density_ratio, fano_model, verify_fano_bound

cfg = load_corpus()["blowup_product"].config
model = fano_model("blowup", perturbations=3)
for i in range(len(model.metrics)):
    ratio = density_ratio(model, i)
    for p in (1, 2, "inf"):
        rep = verify_fano_bound(model, cfg, p, i, ratio=ratio)
        print(f"metric {i} p={p!s:<3} lhs={rep.lhs:.4f} rhs={rep.rhs:.4f} holds={rep.holds}")
