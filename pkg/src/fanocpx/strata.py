"""Orbit faces of the total coordinate space, the collection of
relevant faces, the ambient fan, and the local structure of strata."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import Cone, dot
from .grading import grading_of, is_fano
from .intlinalg import generates_full_group

_FACE_LIMIT = 14


def face_indices(mask):
    """Column indices packed in a face bitmask, ascending."""
    out = []
    j = 0
    m = mask
    while m:
        if m & 1:
            out.append(j)
        m >>= 1
        j += 1
    return tuple(out)


def face_mask(indices):
    mask = 0
    for j in indices:
        mask |= 1 << j
    return mask


def full_blocks(dp, mask):
    """Blocks all of whose variables belong to the face."""
    out = []
    for i, (a, b) in enumerate(dp.block_spans()):
        if all(mask >> j & 1 for j in range(a, b)):
            out.append(i)
    return tuple(out)


def is_f_face(dp, mask):
    """Whether the coordinate face meets the zero set of the relations.

    On the orbit picked out by the face, the i-th relation monomial is
    nonzero exactly when block i lies inside the face.  The trinomial
    system confines the vector of monomial values to a plane whose
    coordinate functionals are pairwise independent, so a functional on
    the plane either vanishes identically or kills at most one
    coordinate: the face qualifies iff no block is complete or at most
    one block is incomplete.  Free variables impose no constraint.
    """
    if mask < 0 or mask >> dp.total_columns:
        raise ValueError("face mask out of range")
    full = full_blocks(dp, mask)
    if not full:
        return True
    return dp.r + 1 - len(full) <= 1


def enumerate_f_faces(dp):
    """All face masks passing the orbit test, ascending.

    Exhaustive over the 2^(n+m) subsets; every instance in the
    classification range stays well under the variable limit.
    """
    if dp.total_columns > _FACE_LIMIT:
        raise RuntimeError(
            f"face enumeration limited to {_FACE_LIMIT} variables"
        )
    return tuple(m for m in range(1 << dp.total_columns) if is_f_face(dp, m))


def _minimal_masks(masks):
    out = []
    for m in masks:
        if not any(o != m and o & m == o for o in masks):
            out.append(m)
    return tuple(out)


@dataclass
class RelevantData:
    """Face lists of a Fano pair together with the derived fan.

    `relevant` are the orbit faces whose weight cone contains the
    anticanonical class in its relative interior; `covering` are the
    inclusion-minimal ones.  The fan of the minimal ambient toric
    variety is recovered through `fan_cone`: the cone of a face is
    spanned by the defining-matrix columns outside it, so covering
    faces give the maximal cones and face-closure is implicit.
    """

    pair: object
    grading: object
    f_faces: tuple
    relevant: tuple
    covering: tuple
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def weight_cone(self, mask):
        """Image of the face under the degree map, in the free part of
        the class group."""
        key = ("weights", mask)
        if key not in self._cache:
            delta = self.grading.presentation.free_rank
            gens = [self.grading.weights[j].free for j in face_indices(mask)]
            self._cache[key] = Cone.from_generators(gens, dim=delta)
        return self._cache[key]

    def fan_cone(self, mask):
        """Cone spanned by the columns outside the face."""
        key = ("fan", mask)
        if key not in self._cache:
            cols = self.pair.columns()
            gens = [cols[j] for j in range(len(cols)) if not mask >> j & 1]
            self._cache[key] = Cone.from_generators(
                gens, dim=self.pair.r + self.pair.s
            )
        return self._cache[key]

    def maximal_cones(self):
        """Deduplicated maximal cones of the fan, one per covering face."""
        if "maximal" not in self._cache:
            cones = []
            for mask in self.covering:
                c = self.fan_cone(mask)
                if not any(c.same_cone(o) for o in cones):
                    cones.append(c)
            self._cache["maximal"] = tuple(cones)
        return self._cache["maximal"]

    def stratum_depths(self):
        """Longest strictly descending chain of relevant faces below
        each relevant face, as a mask -> depth mapping."""
        if "depths" not in self._cache:
            depths = {}
            order = sorted(self.relevant, key=lambda m: (bin(m).count("1"), m))
            for mask in order:
                best = 0
                for other in self.relevant:
                    if other != mask and other & mask == other:
                        best = max(best, depths[other] + 1)
                depths[mask] = best
            self._cache["depths"] = depths
        return self._cache["depths"]


def relevant_and_covering(dp, grading=None):
    """Faces whose strata matter for the polarized quotient: the weight
    cone must contain the anticanonical class in its relative interior.

    Raises ValueError when the pair is not Fano.
    """
    g = grading if grading is not None else grading_of(dp)
    if not is_fano(g):
        raise ValueError("relevant faces are defined for Fano pairs only")
    kappa = g.anticanonical.free
    delta = g.presentation.free_rank
    cache = {}
    relevant = []
    faces = enumerate_f_faces(dp)
    for mask in faces:
        gens = [g.weights[j].free for j in face_indices(mask)]
        cone = Cone.from_generators(gens, dim=delta)
        cache[("weights", mask)] = cone
        if cone.relint_contains(kappa):
            relevant.append(mask)
    return RelevantData(
        pair=dp,
        grading=g,
        f_faces=faces,
        relevant=tuple(relevant),
        covering=_minimal_masks(relevant),
        _cache=cache,
    )


def _as_relevant_data(source):
    if isinstance(source, RelevantData):
        return source
    return relevant_and_covering(source)


def is_q_factorial(source):
    """Every relevant face has a full-dimensional weight cone."""
    rd = _as_relevant_data(source)
    delta = rd.grading.presentation.free_rank
    return all(rd.weight_cone(m).dimension() == delta for m in rd.relevant)


def stratum_dimension(source, mask):
    """Dimension of the stratum of a relevant face, computed as the
    length of the longest chain of relevant faces strictly below it."""
    rd = _as_relevant_data(source)
    depths = rd.stratum_depths()
    if mask not in depths:
        raise ValueError("face is not relevant")
    return depths[mask]


def nongenerating_faces(source, positive_only=True):
    """Relevant faces whose weights do not generate the class group.

    With positive_only, only faces of positive stratum dimension are
    examined; a three-dimensional variety whose singularities are
    isolated must be factorial along all of those.
    """
    rd = _as_relevant_data(source)
    pres = rd.grading.presentation
    skip = set(rd.covering) if positive_only else set()
    bad = []
    for mask in rd.relevant:
        if mask in skip:
            continue
        ws = [rd.grading.weights[j] for j in face_indices(mask)]
        if not generates_full_group(ws, pres):
            bad.append(mask)
    return tuple(bad)


def positive_strata_factorial(source):
    """No positive-dimensional stratum breaks factoriality."""
    return not nongenerating_faces(source, positive_only=True)


def degenerate_blocks(dp, mask):
    """Blocks whose relation monomial has identically vanishing
    differential on the stratum of the face.

    The derivative of the block-i monomial by one of its variables
    survives exactly when every other variable of the block lies in the
    face and the differentiated variable has exponent one or lies in
    the face itself.
    """
    dead = []
    for i, (a, b) in enumerate(dp.block_spans()):
        exps = dp.exponents[i]
        live = False
        for j in range(a, b):
            others = all(mask >> t & 1 for t in range(a, b) if t != j)
            if others and (exps[j - a] == 1 or mask >> j & 1):
                live = True
                break
        if not live:
            dead.append(i)
    return tuple(dead)


def stratum_jacobian_full(dp, mask):
    """Whether the Jacobian of the relations keeps rank r-1 on the
    stratum of the face.

    Each Jacobian column is a scalar multiple of the column of the
    relation coefficient matrix indexed by the block the variable
    belongs to, and the scalar is nonzero exactly for the blocks with a
    surviving derivative.  The coefficient matrix has r+1 columns, full
    rank r-1, and a 2-dimensional kernel supported on no fewer than all
    but one coordinate, so deleting up to two columns never lowers the
    rank while deleting three always does.
    """
    return dp.r + 1 - len(degenerate_blocks(dp, mask)) >= dp.r - 1


def is_smooth(source):
    """Factorial with smooth total space over every relevant face."""
    rd = _as_relevant_data(source)
    if nongenerating_faces(rd, positive_only=False):
        return False
    return all(stratum_jacobian_full(rd.pair, m) for m in rd.relevant)


def leaf_cone(r, s, i):
    """Leaf i of the degeneration locus: the ray of the i-th block
    direction plus the lineality space of the last s coordinates."""
    if not 0 <= i <= r:
        raise ValueError("leaf index out of range")
    ray = [0] * (r + s)
    if i == 0:
        for t in range(r):
            ray[t] = -1
    else:
        ray[i - 1] = 1
    lines = []
    for t in range(r, r + s):
        unit = [0] * (r + s)
        unit[t] = 1
        lines.append(unit)
    return Cone.from_generators([ray], lines=lines, dim=r + s)


def meets_leaf_interior(cone, r, s, i):
    """Whether the cone contains a point strictly inside leaf i.

    The leaf is a halfspace-slab over its lineality space with a single
    facet, so the intersection reaches the relative interior iff the
    facet functional is not identically zero on it.
    """
    cap = cone.intersect(leaf_cone(r, s, i))
    phi = [0] * (r + s)
    if i == 0:
        phi[0] = -1
    else:
        phi[i - 1] = 1
    return any(dot(phi, g) != 0 for g in cap.generators)


def is_big_cone(dp, cone):
    """Big cones reach the open part of every leaf."""
    return all(
        meets_leaf_interior(cone, dp.r, dp.s, i) for i in range(dp.r + 1)
    )


def has_big_cone(source):
    """Whether some maximal cone of the fan is big."""
    rd = _as_relevant_data(source)
    return any(is_big_cone(rd.pair, c) for c in rd.maximal_cones())
