"""Oracle: localized-vs-full purification deviation on a two-qubit pure state.

State cos(t)|00> + sin(t)|11>, observable Z on the first qubit, regions
A = {0}, B = empty, C = {1}.  Both estimators reduce to closed forms:

    full:      Tr[Z rho^n]/Tr[rho^n] = cos^2 - sin^2   (pure state)
    localized: (cos^{2n} - sin^{2n}) / (cos^{2n} + sin^{2n})

The deviation is their difference.  Does not import the package under test.
"""

import numpy as np


def deviation(theta, n):
    c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    full = c2 - s2
    local = (c2 ** n - s2 ** n) / (c2 ** n + s2 ** n)
    return local - full


if __name__ == "__main__":
    for theta, n in ((0.3, 2), (0.3, 3), (0.7, 2), (1.1, 2)):
        print(f"theta={theta} n={n}: deviation = {deviation(theta, n):.15f}")
