"""Exact integer linear algebra: Smith and Hermite normal forms,
integral kernels, and presentations of finitely generated abelian
groups as quotients of a free lattice.

Matrices are sequences of equal-length rows of ints.  Functions return
tuples of tuples so results are hashable and safe to share.  No
floating point is used anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


def identity_matrix(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def transpose(mat):
    if not mat:
        return ()
    return tuple(tuple(row[j] for row in mat) for j in range(len(mat[0])))


def matmul(a, b):
    if not a:
        return ()
    if not b:
        return tuple(() for _ in a)
    if len(a[0]) != len(b):
        raise ValueError("matrix shape mismatch")
    bt = transpose(b)
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def mat_vec(mat, vec):
    return tuple(sum(x * y for x, y in zip(row, vec)) for row in mat)


def _copy(mat):
    return [list(map(int, row)) for row in mat]


def _swap_rows(mats, i, j):
    for m in mats:
        m[i], m[j] = m[j], m[i]


def _swap_cols(mats, i, j):
    for m in mats:
        for row in m:
            row[i], row[j] = row[j], row[i]


def _row_sub(mats, i, j, q):
    # row i -= q * row j
    for m in mats:
        ri, rj = m[i], m[j]
        for k in range(len(ri)):
            ri[k] -= q * rj[k]


def _col_sub(mats, i, j, q):
    # column i -= q * column j
    for m in mats:
        for row in m:
            row[i] -= q * row[j]


def _col_add(mats, i, j):
    # column i += column j
    for m in mats:
        for row in m:
            row[i] += row[j]


def _select_pivot(a, t):
    """Nonzero entry of smallest absolute value in the submatrix with
    both indices >= t; ties broken by lowest row-major position."""
    best = None
    for i in range(t, len(a)):
        row = a[i]
        for j in range(t, len(row)):
            x = row[j]
            if x and (best is None or abs(x) < best[0]):
                best = (abs(x), i, j)
    if best is None:
        return None
    return best[1], best[2]


def smith_normal_form(mat, width=None):
    """Smith normal form with transforms.

    Returns (U, D, V) with U * mat * V = D, where U and V are
    unimodular and D is diagonal with nonnegative entries, each
    dividing the next.  Elimination pivots are always the remaining
    entry of smallest absolute value, lowest row-major position first,
    which makes the transforms deterministic.
    """
    a = _copy(mat)
    nr = len(a)
    nc = len(a[0]) if nr else int(width or 0)
    if any(len(row) != nc for row in a):
        raise ValueError("ragged matrix")
    u = [list(row) for row in identity_matrix(nr)]
    v = [list(row) for row in identity_matrix(nc)]
    k = min(nr, nc)

    t = 0
    while t < k:
        if _select_pivot(a, t) is None:
            break
        while True:
            pi, pj = _select_pivot(a, t)
            if pi != t:
                _swap_rows([a, u], t, pi)
            if pj != t:
                _swap_cols([a, v], t, pj)
            clean = True
            for i in range(t + 1, nr):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    _row_sub([a, u], i, t, q)
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, nc):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    _col_sub([a, v], j, t, q)
                    if a[t][j]:
                        clean = False
            if clean:
                break
        t += 1

    # enforce the divisibility chain on the diagonal
    for i in range(k):
        if a[i][i] == 0:
            break
        for j in range(i + 1, k):
            if a[j][j] == 0 or a[j][j] % a[i][i] == 0:
                continue
            _col_add([a, v], i, j)
            while a[j][i]:
                q = a[i][i] // a[j][i]
                _row_sub([a, u], i, j, q)
                _swap_rows([a, u], i, j)
            if a[i][j]:
                q, r = divmod(a[i][j], a[i][i])
                if r:
                    raise AssertionError("divisibility fix failed")
                _col_sub([a, v], j, i, q)

    for i in range(k):
        if a[i][i] < 0:
            for m in (a, u):
                m[i] = [-x for x in m[i]]

    freeze = lambda m: tuple(tuple(row) for row in m)
    return freeze(u), freeze(a), freeze(v)


def hermite_normal_form(mat, width=None):
    """Row Hermite normal form of the lattice spanned by the rows.

    Returns the nonzero rows in echelon form: pivot columns strictly
    increase, pivots are positive, and every entry above a pivot lies
    in [0, pivot).
    """
    a = _copy(mat)
    nr = len(a)
    nc = len(a[0]) if nr else int(width or 0)
    if any(len(row) != nc for row in a):
        raise ValueError("ragged matrix")
    r = 0
    for col in range(nc):
        while True:
            nz = [i for i in range(r, nr) if a[i][col]]
            if not nz:
                pivot = None
                break
            if len(nz) == 1:
                pivot = nz[0]
                break
            p = min(nz, key=lambda i: (abs(a[i][col]), i))
            for i in nz:
                if i == p:
                    continue
                q = a[i][col] // a[p][col]
                a[i] = [x - q * y for x, y in zip(a[i], a[p])]
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        if a[r][col] < 0:
            a[r] = [-x for x in a[r]]
        for i in range(r):
            q = a[i][col] // a[r][col]
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == nr:
            break
    return tuple(tuple(row) for row in a[:r])


def _pivot_index(row):
    for j, x in enumerate(row):
        if x:
            return j
    raise ValueError("zero row in echelon basis")


def lattice_coordinates(basis, vector):
    """Integer coefficients of `vector` in an echelon (Hermite) basis,
    or None when the vector is not in the lattice."""
    v = list(map(int, vector))
    coeffs = []
    for row in basis:
        j = _pivot_index(row)
        q, r = divmod(v[j], row[j])
        if r:
            return None
        if q:
            v = [x - q * y for x, y in zip(v, row)]
        coeffs.append(q)
    if any(v):
        return None
    return tuple(coeffs)


def reduce_mod_lattice(basis, vector):
    """Canonical representative of `vector` modulo the row lattice of an
    echelon basis; entries at pivot columns land in [0, pivot)."""
    v = list(map(int, vector))
    for row in basis:
        j = _pivot_index(row)
        q = v[j] // row[j]
        if q:
            v = [x - q * y for x, y in zip(v, row)]
    return tuple(v)


def kernel_basis(mat, width=None):
    """Basis of the integral right kernel {x : mat @ x = 0}.

    The rows returned form a basis of a saturated lattice: every
    integer solution is an integer combination of them.
    """
    nr = len(mat)
    nc = len(mat[0]) if nr else width
    if nc is None:
        raise ValueError("width required for an empty matrix")
    if nr == 0:
        return identity_matrix(nc)
    _, d, v = smith_normal_form(mat)
    rank = sum(1 for i in range(min(nr, nc)) if d[i][i])
    return tuple(tuple(v[i][j] for i in range(nc)) for j in range(rank, nc))


def matrix_rank(mat):
    rows = [[Fraction(x) for x in row] for row in mat if any(row)]
    if not rows:
        return 0
    nc = len(rows[0])
    rank = 0
    for col in range(nc):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col] / pr[col]
                rows[i] = [x - f * y for x, y in zip(rows[i], pr)]
        rank += 1
    return rank


def determinant(mat):
    """Determinant by the Bareiss fraction-free elimination."""
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return 1
    a = _copy(mat)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[-1][-1]


def invert_unimodular(mat):
    """Exact inverse of an integer matrix with determinant +-1."""
    n = len(mat)
    aug = [
        [Fraction(x) for x in row] + [Fraction(1 if i == j else 0) for j in range(n)]
        for i, row in enumerate(mat)
    ]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col]), None)
        if piv is None:
            raise ValueError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        pr = aug[col]
        lead = pr[col]
        aug[col] = [x / lead for x in pr]
        for i in range(n):
            if i != col and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    out = []
    for i in range(n):
        row = []
        for j in range(n, 2 * n):
            x = aug[i][j]
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular")
            row.append(int(x))
        out.append(tuple(row))
    return tuple(out)


@dataclass(frozen=True)
class KElement:
    """Element of Z^f + Z/d_1 + ... + Z/d_t, with torsion coordinates
    stored reduced modulo their orders."""

    free: tuple
    torsion: tuple
    orders: tuple

    def __post_init__(self):
        orders = tuple(int(d) for d in self.orders)
        if len(self.torsion) != len(orders):
            raise ValueError("torsion length mismatch")
        object.__setattr__(self, "free", tuple(int(x) for x in self.free))
        object.__setattr__(self, "orders", orders)
        object.__setattr__(
            self, "torsion", tuple(int(t) % d for t, d in zip(self.torsion, orders))
        )

    def _check(self, other):
        if self.orders != other.orders or len(self.free) != len(other.free):
            raise ValueError("elements of different groups")

    def __add__(self, other):
        self._check(other)
        return KElement(
            tuple(a + b for a, b in zip(self.free, other.free)),
            tuple(a + b for a, b in zip(self.torsion, other.torsion)),
            self.orders,
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return KElement(
            tuple(-a for a in self.free), tuple(-a for a in self.torsion), self.orders
        )

    def __mul__(self, c):
        c = int(c)
        return KElement(
            tuple(c * a for a in self.free),
            tuple(c * a for a in self.torsion),
            self.orders,
        )

    __rmul__ = __mul__

    def is_zero(self):
        return not any(self.free) and not any(self.torsion)


@dataclass(frozen=True)
class ClassGroupPresentation:
    """Z^ambient_rank modulo a sublattice, split into free and torsion
    parts by a unimodular change of coordinates.

    `transform` is the unimodular matrix carrying the ambient lattice to
    coordinates in which the sublattice is spanned by multiples of the
    first basis vectors; `section_matrix` is its inverse.
    """

    ambient_rank: int
    free_rank: int
    torsion: tuple
    transform: tuple
    section_matrix: tuple
    torsion_slots: tuple
    free_slots: tuple

    def invariants(self):
        return (self.free_rank, self.torsion)

    def is_free(self):
        return not self.torsion

    def zero(self):
        return KElement((0,) * self.free_rank, (0,) * len(self.torsion), self.torsion)

    def project(self, vector):
        if len(vector) != self.ambient_rank:
            raise ValueError("vector has wrong length")
        y = mat_vec(self.transform, vector)
        return KElement(
            tuple(y[i] for i in self.free_slots),
            tuple(y[i] for i in self.torsion_slots),
            self.torsion,
        )

    def section(self, element):
        """Some ambient vector projecting to the given element."""
        if element.orders != self.torsion:
            raise ValueError("element not in this group")
        y = [0] * self.ambient_rank
        for slot, val in zip(self.free_slots, element.free):
            y[slot] = val
        for slot, val in zip(self.torsion_slots, element.torsion):
            y[slot] = val
        return mat_vec(self.section_matrix, y)

    def free_projection_rows(self):
        return tuple(self.transform[i] for i in self.free_slots)

    def torsion_projection_rows(self):
        return tuple(self.transform[i] for i in self.torsion_slots)


def cokernel_of_rows(rows, ambient_rank):
    """Presentation of Z^ambient_rank modulo the lattice spanned by the
    given rows."""
    n = int(ambient_rank)
    rows = [list(map(int, row)) for row in rows]
    for row in rows:
        if len(row) != n:
            raise ValueError("generator of wrong length")
    # columns of b are the generators; the quotient is read off the SNF
    b = [[row[i] for row in rows] for i in range(n)]
    u, d, _ = smith_normal_form(b, width=len(rows))
    k = min(n, len(rows))
    diag = [d[i][i] for i in range(k)]
    rank = sum(1 for x in diag if x)
    torsion_slots = tuple(i for i in range(rank) if diag[i] != 1)
    torsion = tuple(diag[i] for i in torsion_slots)
    free_slots = tuple(range(rank, n))
    return ClassGroupPresentation(
        ambient_rank=n,
        free_rank=n - rank,
        torsion=torsion,
        transform=u,
        section_matrix=invert_unimodular(u),
        torsion_slots=torsion_slots,
        free_slots=free_slots,
    )


def generates_full_group(elements, presentation):
    """True when the given elements generate the whole group."""
    f = presentation.free_rank
    orders = presentation.torsion
    t = len(orders)
    if f == 0 and t == 0:
        return True
    cols = [list(e.free) + list(e.torsion) for e in elements]
    for i, d in enumerate(orders):
        col = [0] * (f + t)
        col[f + i] = d
        cols.append(col)
    mat = [[col[i] for col in cols] for i in range(f + t)]
    _, d, _ = smith_normal_form(mat, width=len(cols))
    k = min(f + t, len(cols))
    diag = [d[i][i] for i in range(k)]
    rank = sum(1 for x in diag if x)
    return rank == f + t and all(x == 1 for x in diag[:rank])


def kernel_with_congruences(free_rows, torsion_rows, moduli, width):
    """Echelon basis of {x in Z^width : F x = 0, T_i x = 0 mod m_i}."""
    t = len(torsion_rows)
    if len(moduli) != t:
        raise ValueError("one modulus per torsion row")
    stacked = []
    for row in free_rows:
        stacked.append(list(row) + [0] * t)
    for i, row in enumerate(torsion_rows):
        aux = [0] * t
        aux[i] = int(moduli[i])
        stacked.append(list(row) + aux)
    if stacked:
        big = kernel_basis(stacked, width=width + t)
    else:
        big = identity_matrix(width + t)
    projected = [row[:width] for row in big]
    return hermite_normal_form(projected, width=width)
