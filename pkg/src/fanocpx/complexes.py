"""Anticanonical complex and the singularity predicates built on it.

The tropical support of one of our varieties is a union of leaves: the
common lineality space {0} x Q^s and one half-space direction per
block.  Inside that support the anticanonical divisor cuts out a
polyhedral complex.  Its vertices are the matrix columns together with
one rational point per elementary fan cone, and its lattice points
decide the singularity type: all elementary cones must carry a
positive excess for log terminality, and terminality additionally
forbids lattice points other than the origin and the columns
themselves.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .geometry import Polytope, fiber_polytope, primitive_vector
from .grading import grading_of, is_fano
from .intlinalg import mat_vec
from .pairs import validate
from .strata import _as_relevant_data, is_big_cone, is_q_factorial, leaf_cone


# -- elementary cones ----------------------------------------------------


def platonic_checks(exponents):
    """(is_platonic, at_most_two_nontrivial) for a tuple of positive ints.

    Sorted descending, a tuple is platonic when every entry beyond the
    third is 1 and the leading triple matches (x,y,1), (x,2,2),
    (3,3,2), (4,3,2) or (5,3,2).  The second flag records whether at
    most two entries exceed 1.
    """
    ls = sorted((int(x) for x in exponents), reverse=True)
    if not ls or ls[-1] < 1:
        raise ValueError("exponents must be positive integers")
    while len(ls) < 3:
        ls.append(1)
    at_most_two = sum(1 for x in ls if x > 1) <= 2
    a, b, c = ls[0], ls[1], ls[2]
    if any(x != 1 for x in ls[3:]):
        platonic = False
    elif c == 1:
        platonic = True
    elif b == c == 2:
        platonic = True
    else:
        platonic = (a, b, c) in ((3, 3, 2), (4, 3, 2), (5, 3, 2))
    return platonic, at_most_two


def elementary_data(exponents, rays):
    """Cofactors, excess and shift vector of one column choice.

    The cofactor of a ray is the product of the other chosen
    exponents; the excess is their sum minus (r-1) times the full
    product and is positive exactly for platonic exponent tuples.  The
    shift is the cofactor-weighted sum of the rays.
    """
    total = 1
    for l in exponents:
        total *= l
    cofactors = tuple(total // l for l in exponents)
    excess = sum(cofactors) - (len(exponents) - 2) * total
    dim = len(rays[0])
    shift = tuple(
        sum(c * ray[t] for c, ray in zip(cofactors, rays)) for t in range(dim)
    )
    return cofactors, excess, shift


@dataclass(frozen=True)
class ElementaryCone:
    """A fan cone spanned by one column from every block.

    The shift always lands in the lineality space (zero upper
    coordinates); dividing it by a positive excess gives the vertex the
    cone contributes to the anticanonical complex.
    """

    indices: tuple
    rays: tuple
    exponents: tuple
    cofactors: tuple
    excess: int
    shift: tuple

    def vertex(self):
        if self.excess <= 0:
            raise ValueError("no vertex: the excess of the cone is not positive")
        return tuple(Fraction(x, self.excess) for x in self.shift)

    def lineality_vertex(self):
        """The vertex in the coordinates of the lineality space."""
        return self.vertex()[len(self.exponents) - 1 :]


def elementary_cone_at(dp, indices):
    """The elementary cone choosing the given column index per block."""
    spans = dp.block_spans()
    if len(indices) != len(spans):
        raise ValueError("need one column index per block")
    cols = dp.columns()
    exps = []
    for i, j in enumerate(indices):
        start, stop = spans[i]
        if not start <= j < stop:
            raise ValueError(f"column {j} is not in block {i}")
        exps.append(dp.exponents[i][j - start])
    rays = tuple(cols[j] for j in indices)
    cofactors, excess, shift = elementary_data(tuple(exps), rays)
    assert all(x == 0 for x in shift[: dp.r])
    return ElementaryCone(tuple(indices), rays, tuple(exps), cofactors, excess, shift)


def elementary_cones(dp):
    """Every choice of one column per block, in lexicographic order."""
    return tuple(
        elementary_cone_at(dp, pick)
        for pick in product(*[range(a, b) for a, b in dp.block_spans()])
    )


def sigma_elementary_cones(source):
    """The elementary cones lying in some cone of the fan."""
    rd = _as_relevant_data(source)
    maximal = rd.maximal_cones()
    out = []
    for ec in elementary_cones(rd.pair):
        if any(all(c.contains(ray) for ray in ec.rays) for c in maximal):
            out.append(ec)
    return tuple(out)


def elementary_invariants(cone):
    """(excess, shift, vertex) of an elementary cone.

    Raises when the excess is not positive, in which case the cone has
    no vertex and log terminality already failed.
    """
    return cone.excess, cone.shift, cone.vertex()


# -- cone taxonomy -------------------------------------------------------


def classify_cone(source, cone):
    """Sort a fan cone into "big", "elementary-big", "leaf" or "other".

    Big cones meet the interior of every leaf; the elementary-big ones
    among them have exactly one ray in each leaf and none in the
    lineality space.  Leaf cones sit inside a single leaf.  Raises
    ValueError when the cone does not belong to the fan.
    """
    rd = _as_relevant_data(source)
    dp = rd.pair
    r, s = dp.r, dp.s
    if not any(mc.contains_cone(cone) for mc in rd.maximal_cones()):
        raise ValueError("cone does not belong to the fan")
    column_rays = {primitive_vector(col) for col in dp.columns()}
    rays = cone.extremal_rays()
    if any(ray not in column_rays for ray in rays):
        raise ValueError("cone does not belong to the fan")
    if is_big_cone(dp, cone):
        in_lineality = sum(1 for ray in rays if not any(ray[:r]))
        counts = [
            sum(1 for ray in rays if leaf_cone(r, s, i).contains(ray))
            for i in range(r + 1)
        ]
        if in_lineality == 0 and all(c == 1 for c in counts):
            return "elementary-big"
        return "big"
    for i in range(r + 1):
        if leaf_cone(r, s, i).contains_cone(cone):
            return "leaf"
    return "other"


# -- the complex itself --------------------------------------------------


def is_log_terminal(source):
    """Whether every elementary cone of the fan has positive excess.

    Equivalently the exponent tuple of each such cone is platonic, so
    the anticanonical complex is bounded.
    """
    return all(ec.excess > 0 for ec in sigma_elementary_cones(source))


@dataclass(frozen=True)
class LeafComplex:
    """Bounded model of the anticanonical complex.

    The lineality polytope is written in the last s coordinates,
    shared by all leaves.  ``leaves[i]`` is the hull of the lineality
    points and the block-i columns in coordinates (t, u) with t >= 0;
    the ambient point is t e_i + u for i >= 1 and -t(e_1+...+e_r) + u
    for leaf 0, so every column appears as (exponent, lower part).
    """

    pair: object
    lineality: Polytope
    leaves: tuple

    def ambient_point(self, i, point):
        r = self.pair.r
        t = point[0]
        if i == 0:
            upper = (-t,) * r
        else:
            upper = tuple(t if k == i - 1 else 0 for k in range(r))
        return upper + tuple(point[1:])

    def allowed_points(self, i):
        """Leaf-i coordinates of the origin and the columns in the leaf."""
        dp = self.pair
        cols = dp.columns()
        out = {(0,) * (1 + dp.s)}
        for k in range(dp.m):
            out.add((0,) + cols[dp.n + k][dp.r :])
        start, stop = dp.block_spans()[i]
        for j in range(start, stop):
            out.add((dp.exponents[i][j - start],) + cols[j][dp.r :])
        return out


def build_leaf_complex(source, fan_restricted=True):
    """Per-leaf hulls of the anticanonical complex.

    Needs a simplicial fan; raises "not log terminal" when some
    contributing elementary cone has nonpositive excess, since the
    complex is unbounded then.  The contributing cones are by default
    the ones lying in the fan; ``fan_restricted=False`` takes all of
    them instead.
    """
    rd = _as_relevant_data(source)
    dp = rd.pair
    if not is_q_factorial(rd):
        raise ValueError("leaf hulls need a simplicial fan")
    cones = sigma_elementary_cones(rd) if fan_restricted else elementary_cones(dp)
    if any(ec.excess <= 0 for ec in cones):
        raise ValueError("not log terminal")
    cols = dp.columns()
    points = [tuple(Fraction(x) for x in cols[dp.n + k][dp.r :]) for k in range(dp.m)]
    points.extend(ec.lineality_vertex() for ec in cones)
    if not points:
        raise ValueError("complex has no lineality points")
    lineality = Polytope(points)
    zero = Fraction(0)
    leaves = []
    for i, (start, stop) in enumerate(dp.block_spans()):
        hull = [(zero,) + p for p in points]
        for j in range(start, stop):
            hull.append(
                (Fraction(dp.exponents[i][j - start]),)
                + tuple(Fraction(x) for x in cols[j][dp.r :])
            )
        leaves.append(Polytope(hull))
    return LeafComplex(dp, lineality, tuple(leaves))


def terminality_witness(source):
    """None when terminal, else an ambient lattice point of the complex
    beyond the origin and the columns."""
    lc = build_leaf_complex(source)
    for i, poly in enumerate(lc.leaves):
        allowed = lc.allowed_points(i)
        for pt in sorted(poly.lattice_points(), reverse=True):
            if pt not in allowed:
                return lc.ambient_point(i, pt)
    return None


def is_terminal(source):
    return terminality_witness(source) is None


def complex_lattice_points(source):
    """All ambient lattice points of the complex, leaf by leaf."""
    lc = build_leaf_complex(source)
    points = set()
    for i, poly in enumerate(lc.leaves):
        for pt in poly.lattice_points():
            points.add(lc.ambient_point(i, pt))
    return frozenset(points)


# -- independent slow construction ---------------------------------------


def dual_polytope_oracle(dp, grading=None, cap=2_000_000):
    """Lattice points of the complex computed from first principles.

    Builds the anticanonical polyhedron as the dual of the pulled-back
    degree fiber and intersects it with each leaf.  Exponential in the
    number of columns, hence capped at 8; used to cross-check the leaf
    hulls.
    """
    if dp.total_columns > 8:
        raise ValueError("oracle handles at most 8 columns")
    report = validate(dp)
    if not report.ok:
        raise ValueError("invalid pair: " + "; ".join(report.errors))
    g = grading if grading is not None else grading_of(dp)
    if not is_fano(g):
        raise ValueError("oracle needs a Fano pair")
    width = dp.total_columns
    body = fiber_polytope(
        g.presentation.free_projection_rows(), g.anticanonical.free, width=width
    )
    spans = dp.block_spans()
    monomials = []
    for i, (start, stop) in enumerate(spans):
        vec = [0] * width
        vec[start:stop] = dp.exponents[i]
        monomials.append(tuple(vec))
    for t in range(dp.r - 1):
        body = body.minkowski(Polytope(monomials[t : t + 3]))
    body = body.translate((-1,) * width)
    # pull back through the transpose of the defining matrix
    mat = dp.matrix()
    pairs = []
    for f in body.facets:
        pairs.append((mat_vec(mat, f[1:]), -f[0]))
    for e in body.affine_equations:
        normal = mat_vec(mat, e[1:])
        pairs.append((normal, -e[0]))
        pairs.append((tuple(-x for x in normal), e[0]))
    ambient = dp.r + dp.s
    pulled = Polytope.from_inequalities(pairs, ambient)
    anti = pulled.dual_polytope()
    points = set()
    for i in range(dp.r + 1):
        leaf = leaf_cone(dp.r, dp.s, i)
        cut = [(f[1:], -f[0]) for f in anti.facets]
        cut.extend((ineq, 0) for ineq in leaf.inequalities)
        for eq in leaf.equations:
            cut.append((eq, 0))
            cut.append((tuple(-x for x in eq), 0))
        piece = Polytope.from_inequalities(cut, ambient)
        points.update(piece.lattice_points(cap))
    return frozenset(points)
