"""Noise channels on dense density matrices.

Pauli conjugations are carried out with index permutations and sign masks
instead of matrix products, so a channel application costs O(4^N).
"""

from dataclasses import dataclass

import numpy as np

from .dense import DensityMatrix
from .errors import InvalidRate

KINDS = ("global_depolarizing", "local_depolarizing", "local_dephasing")


@dataclass(frozen=True)
class NoiseModel:
    """Channel kind plus error rate p in [0, 1]."""

    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidRate(f"unknown channel kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise InvalidRate(f"rate p={self.p} outside [0, 1]")


def _bit_flip_indices(n, qubit):
    # column/row reindexing for X on `qubit` (site 0 = most significant bit)
    return np.arange(1 << n) ^ (1 << (n - 1 - qubit))


def _z_signs(n, qubit):
    j = np.arange(1 << n)
    return np.where((j >> (n - 1 - qubit)) & 1 == 0, 1.0, -1.0)


def apply_qubit_channel(mat, n, qubit, kind, p):
    """One single-qubit channel factor applied to a dense matrix.

    X rho X is a row+column bit permutation; Z rho Z a sign mask; Y rho Y the
    composition of the two (the i X Z phases cancel between the two sides).
    """
    if kind == "local_dephasing":
        s = _z_signs(n, qubit)
        return (1 - p) * mat + p * (mat * np.outer(s, s))
    if kind == "local_depolarizing":
        s = _z_signs(n, qubit)
        ix = _bit_flip_indices(n, qubit)
        zrz = mat * np.outer(s, s)
        xrx = mat[np.ix_(ix, ix)]
        yry = zrz[np.ix_(ix, ix)]
        return (1 - p) * mat + (p / 3.0) * (xrx + yry + zrz)
    raise InvalidRate(f"not a single-qubit channel: {kind}")


def apply_channel(rho, model):
    """Apply a NoiseModel to a DensityMatrix.

    global_depolarizing: (1-p) rho + p I/2^N.
    local_depolarizing:  per qubit, (1-p) rho + (p/3)(X rho X + Y rho Y + Z rho Z).
    local_dephasing:     per qubit, (1-p) rho + p Z rho Z.
    """
    if not isinstance(model, NoiseModel):
        model = NoiseModel(*model)
    n = rho.n_sites
    mat = rho.matrix
    if model.kind == "global_depolarizing":
        dim = mat.shape[0]
        out = (1 - model.p) * mat + (model.p / dim) * np.eye(dim)
    else:
        out = mat
        for q in range(n):
            out = apply_qubit_channel(out, n, q, model.kind, model.p)
    return DensityMatrix(matrix=out, sites=rho.sites,
                         hamiltonian=rho.hamiltonian if model.p == 0 else None,
                         beta=rho.beta if model.p == 0 else None)
