"""Regenerate the embedded Daubechies lowpass table by spectral factorization."""
import mpmath as mp

mp.mp.dps = 60


def daubechies(p):
    # P(y) = sum_{k<p} C(p-1+k, k) y^k, y = sin^2(w/2) = (2 - z - 1/z)/4
    coeffs = [mp.binomial(p - 1 + k, k) for k in range(p)]
    zs = []
    if p > 1:
        ys = mp.polyroots(list(reversed(coeffs)), maxsteps=500, extraprec=400)
        for y in ys:
            b = 2 - 4 * y
            disc = mp.sqrt(b * b - 4)
            z1, z2 = (b + disc) / 2, (b - disc) / 2
            zs.append(z1 if abs(z1) < 1 else z2)
    poly = [mp.mpf(1)]
    for _ in range(p):
        poly = [a + b for a, b in zip(poly + [0], [0] + poly)]
    for z in zs:
        poly = [a - z * b for a, b in zip(poly + [0], [0] + poly)]
    poly = [mp.re(c) for c in poly]
    s = mp.fsum(poly)
    h = [c * mp.sqrt(2) / s for c in poly]
    return h


if __name__ == "__main__":
    for p in range(1, 11):
        h = daubechies(p)
        print(f'    "db{p}": (')
        for c in h:
            print(f"        {mp.nstr(c, 22, min_fixed=-30, max_fixed=30)},")
        print("    ),")
