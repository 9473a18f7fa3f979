"""
A weak geodesic ray on the projective line
==========================================

Starting from the Fubini-Study potential, the ray of the product
configuration is an explicit translate, and its energy grows linearly.
"""

from __future__ import annotations

import numpy as np

from tcspectra import load_corpus
from tcspectra.geodesic import aubin_mabuchi_slope, build_ray, gradient_map_residual, primal_grid
from tcspectra.potentials import GuilleminPotential

cfg = load_corpus()["product_p1"].config
u0 = primal_grid(GuilleminPotential(cfg.polytope), 4000)
ray = build_ray(u0, cfg)

# phi_t(y) = log(1 + e^(y + t)) for this configuration
for t in (0.0, 0.5, 1.0, 2.0):
    phi = ray.at(t)
    y = phi.axes[0]
    err = np.max(np.abs(phi.values - np.logaddexp(0.0, y + t)))
    print(f"t={t:<4} max deviation from closed form {err:.2e}")

print("gradient-map residual at t=1:", f"{gradient_map_residual(u0, cfg, 1.0).value:.2e}")
energy = aubin_mabuchi_slope(u0, cfg, np.linspace(0, 1, 6))
print(f"energy slope {energy.slope:.6f} (b0 = 1/2)")
