"""
Reference evaluations coded independently of the package.

Complex numbers are carried as pairs of ``Fraction`` so the scattering
factor and the four-port probabilities are exact for rational inputs.
"""

from fractions import Fraction as F


class Q:
    """Exact complex number a + ib with rational parts."""

    def __init__(self, re, im=0):
        self.re, self.im = F(re), F(im)

    def __add__(self, o):
        o = o if isinstance(o, Q) else Q(o)
        return Q(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = o if isinstance(o, Q) else Q(o)
        return Q(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        o = o if isinstance(o, Q) else Q(o)
        return Q(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = o if isinstance(o, Q) else Q(o)
        d = o.re * o.re + o.im * o.im
        return Q((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))


I = Q(0, 1)


def exact_u(dk, da, n, lam, gamma=1):
    """U = -i g s / (q + i g s / 2), or the bare two-level form when n lam^2 = 0."""
    dk, da, lam, gamma = F(dk), F(da), F(lam), F(gamma)
    nl2 = n * lam * lam
    if nl2 == 0:
        return (Q(0, -gamma)) / (Q(dk) + I * Q(gamma / 2))
    s = dk + da
    q = dk * s - nl2
    return Q(0, -gamma * s) / Q(q, gamma * s / 2)


def exact_probabilities(u, rates):
    """(T_p, R_p, T_pbar, R_pbar) for input R_a from squared rates.

    Probabilities only need the products of rates, so no square roots appear:
    |sqrt(x y) U / g|^2 = x y |U|^2 / g^2.
    """
    ar, al, br, bl = (F(x) for x in rates)
    g = ar + al + br + bl
    t = u * Q(ar / g) + Q(1)
    u2 = u.abs2()
    return t.abs2(), ar * al * u2 / g ** 2, ar * br * u2 / g ** 2, ar * bl * u2 / g ** 2


def quadratic_roots(da, nl2):
    """Textbook roots of x^2 + da x - nl2 = 0, lower first."""
    import math

    disc = math.sqrt(da * da + 4 * nl2)
    return (-da - disc) / 2, (-da + disc) / 2


def eig2(a, b, d):
    """Eigenvalues of the real symmetric 2x2 [[a, b], [b, d]] via trace and determinant."""
    import math

    tr, det = a + d, a * d - b * b
    disc = math.sqrt(tr * tr / 4 - det)
    return tr / 2 - disc, tr / 2 + disc
