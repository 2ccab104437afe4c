"""Pauli strings and the transverse-field Ising Hamiltonian.

Tensor-factor convention: site 0 is the most significant (leftmost) Kronecker
factor, so the basis index of |b_0 b_1 ... b_{N-1}> is sum_k b_k 2^{N-1-k}.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionLimit

DENSE_LIMIT = 14

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-site Paulis, one letter (I/X/Y/Z) per site."""

    letters: str

    def __post_init__(self):
        if not self.letters or any(c not in "IXYZ" for c in self.letters):
            raise ValueError(f"letters must be a non-empty IXYZ string, got {self.letters!r}")

    @property
    def n_sites(self):
        return len(self.letters)

    @property
    def support(self):
        return frozenset(i for i, c in enumerate(self.letters) if c != "I")

    def restrict(self, keep):
        """Letters at the sites `keep` (ascending), requiring identity elsewhere."""
        keep = sorted(keep)
        outside = self.support - set(keep)
        if outside:
            raise ValueError(f"support {sorted(outside)} outside the kept sites")
        return PauliString("".join(self.letters[i] for i in keep))


def pauli_from_letters(n_sites, placed):
    """PauliString of length `n_sites` with letters from the dict {site: letter}."""
    letters = ["I"] * n_sites
    for site, letter in placed.items():
        letters[site] = letter
    return PauliString("".join(letters))


def pauli_action(p):
    """Permutation-and-phase form of a Pauli string.

    Returns (perm, phase) with P|j> = phase[j] |perm[j]>. Both arrays have
    length 2^N; phase is complex with entries in {1, -1, i, -i}.
    """
    n = p.n_sites
    dim = 1 << n
    j = np.arange(dim)
    perm = j.copy()
    phase = np.ones(dim, dtype=complex)
    for site, letter in enumerate(p.letters):
        if letter == "I":
            continue
        bit = (j >> (n - 1 - site)) & 1
        if letter == "X":
            perm ^= 1 << (n - 1 - site)
        elif letter == "Y":
            perm ^= 1 << (n - 1 - site)
            phase = phase * np.where(bit == 0, 1j, -1j)
        elif letter == "Z":
            phase = phase * np.where(bit == 0, 1.0, -1.0)
    return perm, phase


def pauli_operator(p, dense_limit=DENSE_LIMIT):
    """Dense matrix of a Pauli string (site 0 = most significant factor).

    Raises DimensionLimit when the string is longer than `dense_limit` sites.
    """
    if p.n_sites > dense_limit:
        raise DimensionLimit(f"{p.n_sites} sites exceed the dense limit {dense_limit}")
    dim = 1 << p.n_sites
    perm, phase = pauli_action(p)
    mat = np.zeros((dim, dim), dtype=complex)
    mat[perm, np.arange(dim)] = phase
    return mat


def apply_pauli_left(p, mat):
    """P @ mat without building P, via the permutation-and-phase form."""
    perm, phase = pauli_action(p)
    out = np.empty_like(mat)
    out[perm, :] = phase[:, None] * mat
    return out


@dataclass(frozen=True)
class Term:
    """One geometrically local Hamiltonian term: coeff * pauli."""

    coeff: float
    pauli: PauliString
    support: frozenset


@dataclass(frozen=True)
class Hamiltonian:
    """Dense Hermitian matrix plus its decomposition into local Pauli terms."""

    matrix: np.ndarray
    terms: tuple
    n_sites: int


def tfi_hamiltonian(lattice, lam, dense_limit=DENSE_LIMIT):
    """Transverse-field Ising chain H = -sum Z_i Z_{i+1} - lam sum X_i.

    The boundary bond is included exactly when the chain is periodic. The term
    list carries one entry per bond and one per site, each with its support.

    Parameters
    ----------
    lattice : Lattice
        Must be a chain.
    lam : float
        Transverse-field amplitude.

    Returns
    -------
    Hamiltonian
    """
    if lattice.kind != "chain":
        raise ValueError("dense TFI is built on chains only")
    n = lattice.n_sites
    if n > dense_limit:
        raise DimensionLimit(f"{n} sites exceed the dense limit {dense_limit}")
    terms = []
    for a, b in sorted(lattice.adjacency):
        terms.append(Term(coeff=-1.0,
                          pauli=pauli_from_letters(n, {a: "Z", b: "Z"}),
                          support=frozenset((a, b))))
    for site in range(n):
        terms.append(Term(coeff=-float(lam),
                          pauli=pauli_from_letters(n, {site: "X"}),
                          support=frozenset((site,))))
    dim = 1 << n
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for t in terms:
        perm, phase = pauli_action(t.pauli)
        mat[perm, cols] += t.coeff * phase
    return Hamiltonian(matrix=mat, terms=tuple(terms), n_sites=n)


def embed_operator(op, op_sites, all_sites):
    """Embed `op` (acting on `op_sites`, in that order) into the space of
    `all_sites`, with tensor factors ordered by ascending site label.
    """
    op_sites = list(op_sites)
    all_sites = sorted(all_sites)
    if not set(op_sites) <= set(all_sites):
        raise ValueError("op_sites must be a subset of all_sites")
    rest = [s for s in all_sites if s not in op_sites]
    full = np.kron(op, np.eye(1 << len(rest), dtype=complex))
    current = op_sites + rest          # factor order of `full`
    m = len(all_sites)
    perm = [current.index(s) for s in all_sites]
    tens = full.reshape((2,) * (2 * m))
    tens = tens.transpose(perm + [m + q for q in perm])
    return np.ascontiguousarray(tens.reshape(1 << m, 1 << m))
