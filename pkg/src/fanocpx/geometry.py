"""Exact rational polyhedral geometry: cones, polytopes, lattice point
enumeration and fiber polytopes of integer projections.

Cones and polytopes are handled through a double description method
over the integers.  Insertions keep only adjacent-pair combinations,
which keeps every intermediate generator set minimal, so the rays a
computation returns are always extremal.  Coordinates of polytope
vertices are fractions; everything else is plain ints.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from math import gcd

from .intlinalg import identity_matrix, kernel_basis, matmul, mat_vec, matrix_rank


class EmptyRegionError(ValueError):
    """The described region contains no point."""


class UnboundedRegionError(ValueError):
    """The described region is unbounded where a polytope was required."""


class DescriptionSizeError(RuntimeError):
    """A double description run exceeded the safety bound."""


_GUARD = 20000


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def primitive_vector(vec):
    """Divide an integer vector by the gcd of its entries."""
    g = 0
    for x in vec:
        g = gcd(g, abs(x))
    if g <= 1:
        return tuple(int(x) for x in vec)
    return tuple(int(x) // g for x in vec)


def scale_to_integer(vec):
    """Clear denominators of a rational vector and make it primitive."""
    mult = 1
    for x in vec:
        if isinstance(x, Fraction):
            mult = mult * x.denominator // gcd(mult, x.denominator)
    return primitive_vector([int(x * mult) for x in vec])


def _row_times_matrix(row, mat):
    return tuple(
        sum(row[j] * mat[j][i] for j in range(len(mat))) for i in range(len(mat[0]))
    ) if mat else ()


def solve_exact(rows, rhs):
    """Unique rational solution x of rows @ x = rhs, or None.

    None means the system is inconsistent or the columns are linearly
    dependent (no unique solution).
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    aug = [[Fraction(x) for x in row] + [Fraction(rhs[i])] for i, row in enumerate(rows)]
    pivots = []
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, m) if aug[i][col]), None)
        if piv is None:
            return None
        aug[rank], aug[piv] = aug[piv], aug[rank]
        pr = aug[rank]
        lead = pr[col]
        aug[rank] = [x / lead for x in pr]
        for i in range(m):
            if i != rank and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[rank])]
        pivots.append(col)
        rank += 1
    for i in range(rank, m):
        if aug[i][n]:
            return None
    out = [Fraction(0)] * n
    for r, col in enumerate(pivots):
        out[col] = aug[r][n]
    return tuple(out)


def _pointed_dd(vectors, dim, guard=_GUARD):
    """Minimal generating rays of {y in Q^dim : v . y >= 0 for all v}.

    The vectors must span the dual space, so the resulting cone is
    pointed.  Rays are returned as primitive integer tuples together
    with nothing else; minimality follows from combining only adjacent
    pairs at every insertion.
    """
    if dim == 0:
        return ()
    seen = set()
    vecs = []
    for v in vectors:
        p = primitive_vector(v)
        if p not in seen:
            seen.add(p)
            vecs.append(p)
    # initial simplicial cone from a maximal independent subset
    chosen_idx = []
    echelon = []
    for i, v in enumerate(vecs):
        row = [Fraction(x) for x in v]
        for er in echelon:
            piv = next(j for j, x in enumerate(er) if x)
            if row[piv]:
                f = row[piv] / er[piv]
                row = [x - f * y for x, y in zip(row, er)]
        if any(row):
            echelon.append(row)
            chosen_idx.append(i)
            if len(chosen_idx) == dim:
                break
    if len(chosen_idx) < dim:
        raise ValueError("constraint vectors do not span the dual space")
    base = [vecs[i] for i in chosen_idx]
    # rays of the initial cone: columns of the inverse of the base matrix
    n = dim
    aug = [[Fraction(x) for x in row] + [Fraction(1 if i == j else 0) for j in range(n)]
           for i, row in enumerate(base)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        lead = aug[col][col]
        aug[col] = [x / lead for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    rays = []
    zerosets = []
    chosen_set = set(chosen_idx)
    for j in range(n):
        col = [aug[i][n + j] for i in range(n)]
        rays.append(scale_to_integer(col))
        zerosets.append({chosen_idx[i] for i in range(n) if i != j})

    for idx, a in enumerate(vecs):
        if idx in chosen_set:
            continue
        vals = [dot(a, r) for r in rays]
        if all(x >= 0 for x in vals):
            for k, x in enumerate(vals):
                if x == 0:
                    zerosets[k].add(idx)
            continue
        pos = [k for k, x in enumerate(vals) if x > 0]
        neg = [k for k, x in enumerate(vals) if x < 0]
        zero = [k for k, x in enumerate(vals) if x == 0]
        new_rays = []
        new_zero = []
        for p in pos:
            for q in neg:
                common = zerosets[p] & zerosets[q]
                adjacent = True
                for k in range(len(rays)):
                    if k != p and k != q and common <= zerosets[k]:
                        adjacent = False
                        break
                if adjacent:
                    vec = primitive_vector(
                        [vals[p] * rays[q][c] - vals[q] * rays[p][c] for c in range(dim)]
                    )
                    new_rays.append(vec)
                    new_zero.append(common | {idx})
        keep_rays = [rays[k] for k in pos] + [rays[k] for k in zero] + new_rays
        keep_zero = (
            [zerosets[k] for k in pos]
            + [zerosets[k] | {idx} for k in zero]
            + new_zero
        )
        rays, zerosets = keep_rays, keep_zero
        if len(rays) > guard:
            raise DescriptionSizeError(f"ray count exceeded {guard}")
    return tuple(rays)


def dual_description(dim, ineqs, eqs=(), guard=_GUARD):
    """Rays and lines of {x in Q^dim : i . x >= 0, e . x = 0}.

    Rays come back extremal and lines as a lattice basis of the
    lineality space; both are primitive integer tuples.
    """
    ineqs = [primitive_vector(a) for a in ineqs if any(a)]
    eqs = [primitive_vector(a) for a in eqs if any(a)]
    s = kernel_basis(eqs, width=dim) if eqs else identity_matrix(dim)
    k1 = len(s)
    if k1 == 0:
        return (), ()
    red = []
    for a in ineqs:
        ra = mat_vec(s, a)
        if any(ra):
            red.append(ra)
    lz = kernel_basis(red, width=k1) if red else identity_matrix(k1)
    lines = tuple(primitive_vector(_row_times_matrix(z, s)) for z in lz)
    if not red:
        return (), lines
    # complement of the lineality inside the solution space: spanned by
    # an independent subset of the restricted inequality vectors
    w = []
    echelon = []
    for v in red:
        row = [Fraction(x) for x in v]
        for er in echelon:
            piv = next(j for j, x in enumerate(er) if x)
            if row[piv]:
                f = row[piv] / er[piv]
                row = [x - f * y for x, y in zip(row, er)]
        if any(row):
            echelon.append(row)
            w.append(v)
    k2 = len(w)
    tilde = [mat_vec(w, a) for a in red]
    rays_w = _pointed_dd(tilde, k2, guard=guard)
    m = matmul(w, s)
    rays = tuple(primitive_vector(_row_times_matrix(r, m)) for r in rays_w)
    return rays, lines


class Cone:
    """Rational polyhedral cone, convertible between generator and
    halfspace descriptions on demand."""

    def __init__(self, dim, rays=None, lines=None, ineqs=None, eqs=None):
        self.dim = int(dim)
        self._rays = None if rays is None else tuple(primitive_vector(r) for r in rays)
        self._lines = None if lines is None else tuple(primitive_vector(l) for l in lines)
        self._ineqs = None if ineqs is None else tuple(primitive_vector(a) for a in ineqs if any(a))
        self._eqs = None if eqs is None else tuple(primitive_vector(a) for a in eqs if any(a))
        self._min_rays = None
        self._min_lines = None
        if self._rays is None and self._ineqs is None:
            raise ValueError("need generators or inequalities")

    @classmethod
    def from_generators(cls, rays, lines=(), dim=None):
        rays = tuple(tuple(r) for r in rays)
        lines = tuple(tuple(l) for l in lines)
        if dim is None:
            if not rays and not lines:
                raise ValueError("ambient dimension required for the zero cone")
            dim = len((rays + lines)[0])
        return cls(dim, rays=rays, lines=lines)

    @classmethod
    def from_inequalities(cls, ineqs, eqs=(), dim=None):
        ineqs = tuple(tuple(a) for a in ineqs)
        eqs = tuple(tuple(a) for a in eqs)
        if dim is None:
            if not ineqs and not eqs:
                raise ValueError("ambient dimension required for the full cone")
            dim = len((ineqs + eqs)[0])
        return cls(dim, ineqs=ineqs, eqs=eqs)

    @classmethod
    def full_space(cls, dim):
        return cls(dim, ineqs=(), eqs=())

    @classmethod
    def zero(cls, dim):
        return cls(dim, rays=(), lines=())

    # -- lazy descriptions ------------------------------------------------

    def _need_hrep(self):
        if self._ineqs is None:
            rays, lines = dual_description(self.dim, self._rays, self._lines or ())
            self._ineqs, self._eqs = rays, lines
        return self._ineqs, self._eqs or ()

    def _need_grep(self):
        if self._rays is None:
            rays, lines = dual_description(self.dim, self._ineqs, self._eqs or ())
            self._rays, self._lines = rays, lines
            self._min_rays, self._min_lines = rays, lines
        return self._rays, self._lines or ()

    def _need_minimal(self):
        if self._min_rays is None:
            ineqs, eqs = self._need_hrep()
            self._min_rays, self._min_lines = dual_description(self.dim, ineqs, eqs)
        return self._min_rays, self._min_lines

    @property
    def inequalities(self):
        return self._need_hrep()[0]

    @property
    def equations(self):
        return self._need_hrep()[1]

    @property
    def generators(self):
        rays, lines = self._need_grep()
        return rays + lines + tuple(tuple(-x for x in l) for l in lines)

    # -- predicates --------------------------------------------------------

    def contains(self, vec):
        ineqs, eqs = self._need_hrep()
        return all(dot(a, vec) == 0 for a in eqs) and all(dot(a, vec) >= 0 for a in ineqs)

    def relint_contains(self, vec):
        """Membership in the relative interior."""
        ineqs, eqs = self._need_hrep()
        if not all(dot(a, vec) == 0 for a in eqs):
            return False
        gens = self.generators
        for a in ineqs:
            val = dot(a, vec)
            if val < 0:
                return False
            if val == 0 and any(dot(a, g) != 0 for g in gens):
                return False
        return True

    def dimension(self):
        _, eqs = self._need_hrep()
        return self.dim - len(eqs)

    def is_full_space(self):
        ineqs, eqs = self._need_hrep()
        return not ineqs and not eqs

    def is_pointed(self):
        ineqs, eqs = self._need_hrep()
        return matrix_rank(list(ineqs) + list(eqs)) == self.dim if self.dim else True

    def lineality_dimension(self):
        _, lines = self._need_minimal()
        return len(lines)

    def extremal_rays(self):
        """Sorted primitive extremal rays; only defined for pointed cones."""
        rays, lines = self._need_minimal()
        if lines:
            raise ValueError("extremal rays of a non-pointed cone")
        return tuple(sorted(rays))

    def intersect(self, other):
        if self.dim != other.dim:
            raise ValueError("ambient dimension mismatch")
        a1, e1 = self._need_hrep()
        a2, e2 = other._need_hrep()
        return Cone(self.dim, ineqs=a1 + a2, eqs=e1 + e2)

    def dual(self):
        ineqs, eqs = self._need_hrep()
        c = Cone(self.dim, rays=ineqs, lines=eqs)
        if self._rays is not None:
            c._ineqs = self._rays
            c._eqs = self._lines or ()
        return c

    def contains_cone(self, other):
        rays, lines = other._need_grep()
        for r in rays:
            if not self.contains(r):
                return False
        for l in lines:
            if not self.contains(l) or not self.contains(tuple(-x for x in l)):
                return False
        return True

    def same_cone(self, other):
        return self.contains_cone(other) and other.contains_cone(self)

    def __repr__(self):
        if self._rays is not None:
            return f"Cone(dim={self.dim}, rays={list(self._rays)})"
        return f"Cone(dim={self.dim}, ineqs={list(self._ineqs)})"


class Polytope:
    """Bounded convex hull of finitely many rational points.

    Vertices are canonical: irredundant, stored as tuples of Fractions
    and sorted, so equality of polytopes is equality of the tuples.
    """

    def __init__(self, points):
        pts = [tuple(Fraction(x) for x in p) for p in points]
        if not pts:
            raise EmptyRegionError("polytope needs at least one point")
        self.dim = len(pts[0])
        if any(len(p) != self.dim for p in pts):
            raise ValueError("points of mixed dimension")
        pts = sorted(set(pts))
        homog = [scale_to_integer((Fraction(1),) + p) for p in pts]
        facets, feqs = dual_description(self.dim + 1, homog)
        self.facets = facets
        self.affine_equations = feqs
        vrays, vlines = dual_description(self.dim + 1, facets, feqs)
        if vlines or any(r[0] == 0 for r in vrays):
            raise AssertionError("cone over a finite point set must be pointed")
        verts = []
        for r in vrays:
            t = r[0]
            verts.append(tuple(Fraction(x, t) for x in r[1:]))
        self.vertices = tuple(sorted(verts))

    @classmethod
    def from_inequalities(cls, pairs, dim):
        """Polytope {x : a . x >= rhs for (a, rhs) in pairs}.

        Raises EmptyRegionError or UnboundedRegionError when the region
        is not a nonempty bounded polytope.
        """
        homog = [(1,) + (0,) * dim]
        for a, rhs in pairs:
            homog.append(scale_to_integer((Fraction(-rhs),) + tuple(Fraction(x) for x in a)))
        rays, lines = dual_description(dim + 1, homog)
        verts = [r for r in rays if r[0] > 0]
        if not verts:
            raise EmptyRegionError("inequalities have no solution")
        if lines or len(verts) < len(rays):
            raise UnboundedRegionError("region is unbounded")
        return cls([tuple(Fraction(x, r[0]) for x in r[1:]) for r in verts])

    def contains(self, point):
        h = (Fraction(1),) + tuple(Fraction(x) for x in point)
        return all(dot(e, h) == 0 for e in self.affine_equations) and all(
            dot(a, h) >= 0 for a in self.facets
        )

    def translate(self, vec):
        return Polytope([tuple(x + y for x, y in zip(p, vec)) for p in self.vertices])

    def minkowski(self, other):
        return Polytope(
            [tuple(x + y for x, y in zip(p, q)) for p in self.vertices for q in other.vertices]
        )

    def dimension(self):
        return self.dim - len(self.affine_equations)

    def lattice_points(self, cap=2_000_000):
        """All integer points, sorted lexicographically."""
        lo = []
        hi = []
        for i in range(self.dim):
            coords = [p[i] for p in self.vertices]
            lo.append(-((-min(coords)).__floor__()))
            hi.append(max(coords).__floor__())
        total = 1
        for a, b in zip(lo, hi):
            total *= max(0, b - a + 1)
            if total > cap:
                raise DescriptionSizeError("lattice point bounding box too large")
        out = []
        for pt in product(*[range(a, b + 1) for a, b in zip(lo, hi)]):
            if self.contains(pt):
                out.append(pt)
        return tuple(out)

    def dual_polytope(self):
        """The polytope {u : u . x >= -1 on self}; needs the origin in
        the interior."""
        if self.affine_equations:
            raise ValueError("dual of a lower-dimensional polytope")
        verts = []
        for f in self.facets:
            if f[0] <= 0:
                raise ValueError("origin is not an interior point")
            verts.append(tuple(Fraction(x, f[0]) for x in f[1:]))
        return Polytope(verts)

    def __eq__(self, other):
        return isinstance(other, Polytope) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        return f"Polytope({[tuple(map(str, v)) for v in self.vertices]})"


def fiber_polytope(rows, rhs, width=None):
    """The polytope {x >= 0 : rows @ x = rhs}.

    Vertices are enumerated as basic feasible solutions.  Raises
    UnboundedRegionError when the region has a nonzero recession cone
    and EmptyRegionError when it has no point.
    """
    n = width if width is not None else len(rows[0])
    rows = [tuple(row) for row in rows]
    rec_rays, rec_lines = dual_description(n, identity_matrix(n), rows)
    if rec_rays or rec_lines:
        raise UnboundedRegionError("fiber region is unbounded")
    rank = matrix_rank(rows)
    verts = []
    for subset in combinations(range(n), rank):
        sub = [[row[j] for j in subset] for row in rows]
        sol = solve_exact(sub, rhs)
        if sol is None or any(x < 0 for x in sol):
            continue
        full = [Fraction(0)] * n
        for j, val in zip(subset, sol):
            full[j] = val
        verts.append(tuple(full))
    if rank == 0:
        # only the origin can be feasible
        if all(not any(r) for r in rows) and not any(rhs):
            verts.append(tuple(Fraction(0) for _ in range(n)))
    if not verts:
        raise EmptyRegionError("fiber region is empty")
    return Polytope(verts)
