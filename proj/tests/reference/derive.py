"""Independent reference values for the unit tests.

Builds the master-equation generator from scratch (own state ordering) and
propagates with scipy's expm; the two-atom moments come from sympy.
Run: python tests/reference/derive.py
"""
import numpy as np
import sympy as sp
from scipy.linalg import expm


def generator(n_half, g1, g2):
    states = [(n, m) for m in range(2 * n_half + 1) for n in range(m + 1)]
    pos = {s: i for i, s in enumerate(states)}
    g = np.zeros((len(states), len(states)))
    for (n, m), i in pos.items():
        ground = 2 * n_half - m + 1
        r1 = g1 * n * ground
        r2 = g2 * (m - n) * ground
        if r1:
            g[pos[(n - 1, m - 1)], i] += r1
            g[i, i] -= r1
        if r2:
            g[pos[(n, m - 1)], i] += r2
            g[i, i] -= r2
    return states, pos, g


def propagate(n_half, g1, g2, t, start=None):
    states, pos, g = generator(n_half, g1, g2)
    p0 = np.zeros(len(states))
    p0[pos[start or (n_half, 2 * n_half)]] = 1.0
    return states, pos, expm(g * t) @ p0


def main():
    for n_half, g1, g2, t in [(2, 1.0, 0.1, 0.3), (2, 1.0, 0.1, 1.0), (3, 1.0, 1.0, 0.25)]:
        states, pos, p = propagate(n_half, g1, g2, t)
        top = pos[(n_half, 2 * n_half)]
        i1 = sum(g1 * n * (2 * n_half - m + 1) * p[pos[(n, m)]] for n, m in states)
        i2 = sum(g2 * (m - n) * (2 * n_half - m + 1) * p[pos[(n, m)]] for n, m in states)
        print(f"N={n_half} G=({g1},{g2}) t={t}: P_top={p[top]:.17g} P00={p[pos[(0, 0)]]:.17g} "
              f"I1={i1:.17g} I2={i2:.17g}")

    # Two atoms, equal rates: tau = M1/A and sigma from the exact integrals.
    t = sp.symbols("t", positive=True)
    a, b, c = sp.Function("a"), sp.Function("b"), sp.Function("c")
    sol = sp.dsolve(
        [sp.Eq(a(t).diff(t), -2 * a(t)), sp.Eq(b(t).diff(t), a(t) - 2 * b(t)), sp.Eq(c(t).diff(t), a(t) - 2 * c(t))],
        ics={a(0): 1, b(0): 0, c(0): 0},
    )
    pa, pb, pc = (s.rhs for s in sol)
    # P11 and P01 both decay at 2 (one excited atom, two-fold enhanced).
    i1 = pa + 2 * pb
    area = sp.integrate(i1, (t, 0, sp.oo))
    m1 = sp.integrate(t * i1, (t, 0, sp.oo))
    m2 = sp.integrate(t * t * i1, (t, 0, sp.oo))
    tau = sp.simplify(m1 / area)
    sigma = sp.simplify(sp.sqrt(m2 / area - tau**2) / tau)
    print("two atoms equal rates: area", area, "tau", tau, "sigma", sigma, float(sigma))


if __name__ == "__main__":
    main()
