"""
Only the total weight matters under a global bias
=================================================

If a single bias is shared by every voter in the union, all states tend to
vote alike, and the deficit depends on the weights only through their sum G.
It is smallest at G = mu1 N.
"""

import numpy as np

from twotier import GLOBAL, MeasureSpec, Uniform, UnionSpec, exact_deficit, weight_scheme

spec = MeasureSpec.collective_bias(Uniform(), GLOBAL)

for n in (201, 2001, 20001):
    u = UnionSpec.from_populations([n, 3 * n, 5 * n])
    G = 0.5 * u.total
    dd = {s: exact_deficit(u, spec, weight_scheme(u, s).rescaled(G)) for s in ("proportional", "equal", "sqrt")}
    spread = (max(dd.values()) - min(dd.values())) / max(dd.values())
    print(f"N={u.total:>6}: deficit/N^2 = {np.round(np.array(list(dd.values())) / u.total**2, 5)}, spread {spread:.1e}")

# scanning G traces the parabola G^2 - 2 mu1 G N + mu2 N^2
u = UnionSpec.from_populations([2001, 6001, 10001])
print("\nG/N   deficit/N^2")
for frac in (0.3, 0.4, 0.5, 0.6, 0.7):
    g = weight_scheme(u, "equal").rescaled(frac * u.total)
    print(f"{frac:.1f}   {exact_deficit(u, spec, g) / u.total**2:.5f}")
