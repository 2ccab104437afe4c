"""Lattice graphs (chain, square, cubic) and the A/B/C region partition.

Sites are indexed row-major over the axes, so site = x*Ly*Lz + y*Lz + z for a
cubic lattice with extents (Lx, Ly, Lz). The partition splits the sites into the
observable support A, a buffer B of all sites within graph distance d of A, and
the untouched remainder C.
"""

from collections import deque
from dataclasses import dataclass

from .errors import InvalidExtent

KINDS = ("chain", "square", "cubic")


@dataclass(frozen=True)
class Lattice:
    """Hypercubic lattice graph.

    Attributes
    ----------
    kind : str
        One of "chain", "square", "cubic".
    extents : tuple of int
        Site count per axis.
    periodic : bool
        Wrap-around bonds on every axis when True.
    adjacency : frozenset of (int, int)
        Nearest-neighbor pairs, each stored once as (min, max).
    """

    kind: str
    extents: tuple
    periodic: bool
    adjacency: frozenset

    @property
    def n_sites(self):
        n = 1
        for e in self.extents:
            n *= e
        return n

    def neighbors(self, site):
        """Sites adjacent to `site`."""
        out = []
        for a, b in self.adjacency:
            if a == site:
                out.append(b)
            elif b == site:
                out.append(a)
        return sorted(out)


@dataclass(frozen=True)
class RegionPartition:
    """A/B/C split of the lattice sites around an observable support.

    region_b holds every site at graph distance 1..buffer_width from region_a;
    region_c is the remainder, so any site in C is at distance >= buffer_width+1
    from A.
    """

    region_a: frozenset
    region_b: frozenset
    region_c: frozenset
    buffer_width: int


def build_lattice(kind, extents, periodic=False):
    """Construct a chain, square, or cubic lattice.

    Parameters
    ----------
    kind : str
        "chain", "square", or "cubic".
    extents : sequence of int
        One entry per axis (1, 2, or 3 entries to match `kind`).
    periodic : bool
        Include wrap-around bonds.

    Returns
    -------
    Lattice

    Raises
    ------
    InvalidExtent
        If any extent is 0, or for the periodic chain of length 2 (its single
        bond would be double-counted).
    """
    if kind not in KINDS:
        raise InvalidExtent(f"unknown lattice kind {kind!r}")
    extents = tuple(int(e) for e in extents)
    ndim = KINDS.index(kind) + 1
    if len(extents) != ndim:
        raise InvalidExtent(f"{kind} lattice needs {ndim} extents, got {len(extents)}")
    if any(e < 1 for e in extents):
        raise InvalidExtent(f"extents must be >= 1, got {extents}")
    if kind == "chain" and periodic and extents[0] == 2:
        raise InvalidExtent("periodic chain of length 2 is rejected (double edge)")

    # row-major strides
    strides = [1] * ndim
    for ax in range(ndim - 2, -1, -1):
        strides[ax] = strides[ax + 1] * extents[ax + 1]

    def index(coord):
        return sum(c * s for c, s in zip(coord, strides))

    edges = set()
    coords = [()]
    for e in extents:
        coords = [c + (i,) for c in coords for i in range(e)]
    for coord in coords:
        for ax in range(ndim):
            if coord[ax] + 1 < extents[ax]:
                nb = list(coord)
                nb[ax] += 1
                edges.add(tuple(sorted((index(coord), index(tuple(nb))))))
            elif periodic and extents[ax] > 2:
                nb = list(coord)
                nb[ax] = 0
                edges.add(tuple(sorted((index(coord), index(tuple(nb))))))
            elif periodic and extents[ax] == 2:
                # wrap bond coincides with the bulk bond; skip
                pass
    return Lattice(kind=kind, extents=extents, periodic=bool(periodic),
                   adjacency=frozenset(edges))


def graph_distances(lattice, sources):
    """Breadth-first graph distance from the site set `sources` to every site.

    Returns a list dist[site]; unreachable sites get -1 (cannot happen on a
    connected lattice).
    """
    adj = [[] for _ in range(lattice.n_sites)]
    for a, b in lattice.adjacency:
        adj[a].append(b)
        adj[b].append(a)
    dist = [-1] * lattice.n_sites
    queue = deque()
    for s in sources:
        dist[s] = 0
        queue.append(s)
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def partition_regions(lattice, support, d):
    """Split the lattice into regions A (support), B (buffer), C (rest).

    Parameters
    ----------
    lattice : Lattice
    support : iterable of int
        Non-empty site set carrying the observable.
    d : int
        Buffer width: B collects the sites at graph distance 1..d from A.

    Returns
    -------
    RegionPartition
    """
    support = frozenset(int(s) for s in support)
    if not support:
        raise ValueError("support must be non-empty")
    if any(s < 0 or s >= lattice.n_sites for s in support):
        raise ValueError("support site outside the lattice")
    d = int(d)
    if d < 0:
        raise ValueError("buffer width must be >= 0")
    dist = graph_distances(lattice, support)
    region_b = frozenset(v for v in range(lattice.n_sites) if 1 <= dist[v] <= d)
    region_c = frozenset(v for v in range(lattice.n_sites)
                         if v not in support and v not in region_b)
    return RegionPartition(region_a=support, region_b=region_b,
                           region_c=region_c, buffer_width=d)
