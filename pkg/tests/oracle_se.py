"""Straight-line spectral-efficiency reference for the default scenario.

Deliberately standalone: plain ``math`` loops, no package imports.  Places an
80x80 half-wavelength RIS at the origin facing both terminals, sets each
element's bit from the parity of its Fresnel zone, reflects every element and
sums the free-space cascade terms one by one.

    python tests/oracle_se.py
"""
import cmath
import math

C0 = 299792458.0


def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _norm(a):
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def _scale(a, k):
    return (a[0] * k, a[1] * k, a[2] * k)


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def reference_se(freq=28e9, tx=(0.0, 12.0, 0.0), rx=(5.0, 0.0, 0.0), n=80,
                 p_dbm=30.0, noise_dbm=-90.0):
    lam = C0 / freq
    p = 10 ** ((p_dbm - 30) / 10)
    noise = 10 ** ((noise_dbm - 30) / 10)
    center = (0.0, 0.0, 0.0)
    t = _scale(_sub(tx, center), 1 / _norm(_sub(tx, center)))
    r = _scale(_sub(rx, center), 1 / _norm(_sub(rx, center)))
    normal = _add(t, r)
    normal = _scale(normal, 1 / _norm(normal))
    x = (1.0, 0.0, 0.0)
    u = _sub(x, _scale(normal, _dot(x, normal)))
    u = _scale(u, 1 / _norm(u))
    v = _cross(normal, u)
    los = _norm(_sub(tx, rx))
    h = 0j
    for i in range(n):
        for j in range(n):
            a = (i - (n - 1) / 2) * lam / 2
            b = (j - (n - 1) / 2) * lam / 2
            q = _add(center, _add(_scale(u, a), _scale(v, b)))
            d1 = _norm(_sub(q, tx))
            d2 = _norm(_sub(rx, q))
            excess = d1 + d2 - los
            zone = math.floor(excess / (lam / 2)) + 1
            sign = 1.0 if zone % 2 == 1 else -1.0
            amp = lam * lam / (16 * math.pi ** 2 * d1 * d2)
            h += sign * amp * cmath.exp(-2j * math.pi * (d1 + d2) / lam)
    return math.log2(1 + p * abs(h) ** 2 / noise)


if __name__ == "__main__":
    print(f"{reference_se():.17g}")
