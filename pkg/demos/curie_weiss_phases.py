"""
Curie-Weiss phases
==================

Ferromagnetic coupling between voters changes the growth of E|S| with N:
exponent 1/2 below the critical coupling, 3/4 at it, and 1 above it.
"""

import numpy as np

from twotier import MeasureSpec, cw_magnetization, margin_distribution, moments

ns = np.array([1001, 10001, 100001])
for beta in (0.5, 1.0, 2.0):
    spec = MeasureSpec.curie_weiss(beta)
    e = np.array([moments(margin_distribution(int(n), spec)).abs_mean for n in ns])
    slope = np.polyfit(np.log(ns), np.log(e), 1)[0]
    print(f"beta={beta}: E|S| = {np.round(e, 2)}, log-log slope {slope:.4f}")

print("\nbeta=0.5: E|S|/sqrt(N) vs sqrt(2/pi)/sqrt(1-beta)")
e = moments(margin_distribution(10001, MeasureSpec.curie_weiss(0.5))).abs_mean
print(f"  {e / np.sqrt(10001):.5f} vs {np.sqrt(2 / np.pi) / np.sqrt(0.5):.5f}")

print("\nsupercritical magnetization m = tanh(beta m):")
for beta in (1.2, 1.5, 2.0, 4.0, 8.0):
    print(f"  beta={beta:<4} m={cw_magnetization(beta):.6f}")
