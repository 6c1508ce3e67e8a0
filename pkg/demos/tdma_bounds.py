"""Lattice TDMA: exact success probability between its two analytic bounds.

Run: python demos/tdma_bounds.py
"""

from netoutage.asymptotics import gamma3_approx, tdma_bounds
from netoutage.special import epstein_zeta

theta, alpha = 2.0, 4.0
for d in (1, 2, 3):
    print(f"d={d}: gamma={theta * epstein_zeta(d, alpha):.6f} kappa={alpha / d:.4g}")
    for m in (1, 2, 3, 4, 6, 8):
        b = tdma_bounds(d, m, theta, alpha)
        print(f"  m={m}  eta={b.eta:.3e}  lower={b.lower:.6f}  exact={b.exact:.6f}  upper={b.upper:.6f}")
print(f"cubic lattice sum {epstein_zeta(3, alpha):.6f}, closed approximation {gamma3_approx(alpha):.6f}")
