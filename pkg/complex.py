"""
Order complexes and integral simplicial homology.

The order complex of a poset has the non-empty chains as simplices and is
weak homotopy equivalent to the finite space, so its homology is the
homology of the space. Boundary matrices are numpy int64 arrays reduced to
Smith normal form with explicit overflow checks.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Sequence, Tuple

import numpy as np

from poset import FinitePoset

logger = logging.getLogger(__name__)

INT64_MAX = int(np.iinfo(np.int64).max)

Simplex = Tuple[str, ...]


@dataclass(frozen=True)
class SimplicialComplex:
    """Finite simplicial complex; simplices are id-sorted vertex tuples."""

    vertices: FrozenSet[str]
    simplices: FrozenSet[Simplex]

    @property
    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def simplices_of_dim(self, k: int) -> List[Simplex]:
        return sorted(s for s in self.simplices if len(s) == k + 1)

    def f_vector(self) -> List[int]:
        return [len(self.simplices_of_dim(k)) for k in range(self.dimension + 1)]


@dataclass
class HomologyProfile:
    """Betti numbers and torsion coefficients per dimension."""

    betti: List[int] = field(default_factory=list)
    torsion: List[List[int]] = field(default_factory=list)

    @property
    def torsion_free(self) -> bool:
        return not any(self.torsion)

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * b for k, b in enumerate(self.betti))


def order_complex(p: FinitePoset) -> SimplicialComplex:
    """All non-empty chains of p."""
    chains = set()

    def extend(chain: Tuple[str, ...], top: str):
        chains.add(tuple(sorted(chain)))
        for y in sorted(p.strictly_above(top)):
            extend(chain + (y,), y)

    for x in p:
        extend((x,), x)
    logger.debug(f"Order complex of {len(p)} points has {len(chains)} simplices")
    return SimplicialComplex(frozenset(p.elements), frozenset(chains))


def boundary_matrix(K: SimplicialComplex, k: int) -> np.ndarray:
    """
    Matrix of the boundary map from k-simplices to (k-1)-simplices.

    Rows follow the sorted (k-1)-simplices, columns the sorted k-simplices;
    the face dropping position i carries sign (-1)^i.
    """
    faces = K.simplices_of_dim(k - 1)
    cells = K.simplices_of_dim(k)
    matrix = np.zeros((len(faces), len(cells)), dtype=np.int64)
    if k <= 0:
        return matrix
    row = {s: i for i, s in enumerate(faces)}
    for j, s in enumerate(cells):
        for i in range(len(s)):
            matrix[row[s[:i] + s[i + 1:]], j] = (-1) ** i
    return matrix


def _checked_axpy(target: np.ndarray, q: int, source: np.ndarray) -> np.ndarray:
    """target - q * source, refusing to leave the int64 range."""
    bound = abs(q) * int(np.max(np.abs(source), initial=0)) + int(np.max(np.abs(target), initial=0))
    if bound > INT64_MAX:
        raise OverflowError("Smith normal form intermediate exceeds the int64 range")
    return target - np.int64(q) * source


def _min_pivot(block: np.ndarray):
    nonzero = np.argwhere(block != 0)
    if nonzero.size == 0:
        return None
    values = np.abs(block[nonzero[:, 0], nonzero[:, 1]])
    i, j = nonzero[int(np.argmin(values))]
    return int(i), int(j)


def smith_normal_form(matrix: Sequence[Sequence[int]]) -> Tuple[int, List[int]]:
    """
    Rank and invariant factors d1 | d2 | ... of an integer matrix.

    Raises OverflowError if an entry or any intermediate leaves int64.
    """
    raw = np.asarray(matrix, dtype=object)
    if raw.size == 0:
        return 0, []
    if any(abs(int(v)) > INT64_MAX for v in raw.flat):
        raise OverflowError("matrix entry exceeds the int64 range")
    A = raw.astype(np.int64).reshape(raw.shape[0], -1).copy()
    m, n = A.shape

    diagonal: List[int] = []
    t = 0
    while t < min(m, n):
        pivot = _min_pivot(A[t:, t:])
        if pivot is None:
            break
        i, j = pivot
        A[[t, t + i]] = A[[t + i, t]]
        A[:, [t, t + j]] = A[:, [t + j, t]]

        while True:
            p = int(A[t, t])
            for r in range(t + 1, m):
                q = int(A[r, t]) // p
                if q:
                    A[r] = _checked_axpy(A[r], q, A[t])
            for c in range(t + 1, n):
                q = int(A[t, c]) // p
                if q:
                    A[:, c] = _checked_axpy(A[:, c], q, A[:, t])

            column, row = A[t + 1:, t], A[t, t + 1:]
            if not column.any() and not row.any():
                break
            # a remainder survived; move the smallest one into the pivot
            candidates = [(abs(int(v)), 'r', t + 1 + r) for r, v in enumerate(column) if v]
            candidates += [(abs(int(v)), 'c', t + 1 + c) for c, v in enumerate(row) if v]
            _, axis, index = min(candidates)
            if axis == 'r':
                A[[t, index]] = A[[index, t]]
            else:
                A[:, [t, index]] = A[:, [index, t]]

        diagonal.append(abs(int(A[t, t])))
        t += 1

    # diag(a, b) is equivalent to diag(gcd, lcm); sweep until the chain divides
    factors = sorted(diagonal)
    changed = True
    while changed:
        changed = False
        for a in range(len(factors)):
            for b in range(a + 1, len(factors)):
                g = math.gcd(factors[a], factors[b])
                if g != factors[a]:
                    factors[a], factors[b] = g, factors[a] * factors[b] // g
                    changed = True
    return len(factors), factors


def homology(K: SimplicialComplex) -> HomologyProfile:
    """Unreduced integral homology; vanishing top groups are dropped, H0 is kept."""
    top = K.dimension
    profile = HomologyProfile()
    if top < 0:
        return profile

    ranks: Dict[int, int] = {0: 0, top + 1: 0}
    factors: Dict[int, List[int]] = {top + 1: []}
    for k in range(1, top + 1):
        ranks[k], factors[k] = smith_normal_form(boundary_matrix(K, k))

    for k in range(top + 1):
        cells = len(K.simplices_of_dim(k))
        profile.betti.append(cells - ranks[k] - ranks[k + 1])
        profile.torsion.append([d for d in factors[k + 1] if d > 1])

    # trailing vanishing groups are not reported
    while len(profile.betti) > 1 and profile.betti[-1] == 0 and not profile.torsion[-1]:
        profile.betti.pop()
        profile.torsion.pop()
    logger.debug(f"Homology betti={profile.betti} torsion={profile.torsion}")
    return profile


def euler_characteristic(K: SimplicialComplex) -> int:
    return sum((-1) ** k * count for k, count in enumerate(K.f_vector()))


def format_homology(profile: HomologyProfile) -> List[str]:
    """Lines of the form 'H<k>: Z^<b> [+ Z/<d> ...]'."""
    lines = []
    for k, b in enumerate(profile.betti):
        text = f"H{k}: Z^{b}"
        for d in profile.torsion[k]:
            text += f" + Z/{d}"
        lines.append(text)
    return lines
