"""Oracle: zero-temperature 2D free-fermion two-point function.

Independent route: adaptive quadrature (scipy dblquad) of the Fermi-sea
integral Lambda(dx, dy) = (2 pi)^-2 integral over {cos kx + cos ky >= -mu/2}
of cos(kx dx) cos(ky dy), using the exact transverse band limit
K(kx) = arccos(-mu/2 - cos kx).  Also prints diagonal values at mu = 0
(exactly 1/2 by particle-hole symmetry).  Does not import the package under
test.
"""

import numpy as np
from scipy.integrate import quad


def lam_entry(mu, dx, dy):
    kmax = np.arccos(-mu / 2.0 - 1.0)

    def inner(kx):
        arg = np.clip(-mu / 2.0 - np.cos(kx), -1.0, 1.0)
        kq = np.arccos(arg)
        if dy == 0:
            trans = kq
        else:
            trans = np.sin(kq * dy) / dy
        return np.cos(kx * dx) * trans

    val = quad(inner, 0.0, kmax, limit=400)[0]
    return val / np.pi ** 2


if __name__ == "__main__":
    for mu in (-0.3, -1.0):
        print(f"mu={mu}:")
        for dx, dy in ((0, 0), (1, 0), (1, 1), (2, 0), (3, 1)):
            print(f"  delta=({dx},{dy}): {lam_entry(mu, dx, dy):.15f}")
