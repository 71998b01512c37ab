"""Independent oracle: embedded error of one Fehlberg 4(5) step on dx/dt = lam*x.

Exact rational arithmetic with the tableau written out from the classical
1969 coefficients. Run directly to print the frozen values used by the tests.
"""
import sympy as sp

A = [
    [],
    [sp.Rational(1, 4)],
    [sp.Rational(3, 32), sp.Rational(9, 32)],
    [sp.Rational(1932, 2197), sp.Rational(-7200, 2197), sp.Rational(7296, 2197)],
    [sp.Rational(439, 216), -8, sp.Rational(3680, 513), sp.Rational(-845, 4104)],
    [sp.Rational(-8, 27), 2, sp.Rational(-3544, 2565), sp.Rational(1859, 4104), sp.Rational(-11, 40)],
]
B5 = [sp.Rational(16, 135), 0, sp.Rational(6656, 12825), sp.Rational(28561, 56430), sp.Rational(-9, 50), sp.Rational(2, 55)]
B4 = [sp.Rational(25, 216), 0, sp.Rational(1408, 2565), sp.Rational(2197, 4104), sp.Rational(-1, 5), 0]


def step(lam, x, h):
    ks = []
    for row in A:
        ks.append(lam * (x + h * sum(a * k for a, k in zip(row, ks))))
    x5 = x + h * sum(b * k for b, k in zip(B5, ks))
    x4 = x + h * sum(b * k for b, k in zip(B4, ks))
    return x5, abs(x5 - x4)


if __name__ == "__main__":
    for lam in (1, 100):
        x5, err = step(sp.Integer(lam), sp.Integer(1), sp.Integer(1))
        print(f"lam={lam}: x5={sp.nsimplify(x5)} = {float(x5)!r}, err={sp.nsimplify(err)} = {float(err)!r}")
