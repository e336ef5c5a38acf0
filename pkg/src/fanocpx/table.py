"""The classification target: twelve families of Fano threefolds.

Each row records the shape of the trinomial relation (exponent blocks
plus the number of free variables), the divisor class group, and the
degree matrix listing the variable classes.  Free rows of the degree
matrix are integer vectors; one extra row per finite cyclic factor
holds the torsion components, reduced modulo the order of the factor.
The rows live in ``data/table.json`` and are loaded once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources


@dataclass(frozen=True)
class TableRow:
    ident: str          # row label, "2.01" .. "2.12"
    exponents: tuple    # exponent tuples of the relation blocks
    free_count: int     # number of variables outside the relation
    torsion: tuple      # orders of the finite cyclic factors
    degree_rows: tuple  # free part of the degree matrix, two rows
    torsion_rows: tuple  # one row per torsion order, entries mod order
    smooth: bool

    @property
    def block_sizes(self):
        return tuple(len(block) for block in self.exponents)

    @property
    def variable_count(self):
        return sum(self.block_sizes) + self.free_count

    def block_spans(self):
        spans = []
        start = 0
        for size in self.block_sizes:
            spans.append((start, start + size))
            start += size
        return tuple(spans)

    def weight(self, j):
        """Class of variable j: (free part, torsion part)."""
        free = tuple(row[j] for row in self.degree_rows)
        tors = tuple(row[j] for row in self.torsion_rows)
        return free, tors

    def weights(self):
        return tuple(self.weight(j) for j in range(self.variable_count))

    def relation_degree(self):
        """Common class of the relation monomials, asserted equal
        across blocks."""
        degs = []
        for i, (a, b) in enumerate(self.block_spans()):
            free = [0, 0]
            tors = [0] * len(self.torsion)
            for j in range(a, b):
                l = self.exponents[i][j - a]
                wf, wt = self.weight(j)
                free[0] += l * wf[0]
                free[1] += l * wf[1]
                for t, x in enumerate(wt):
                    tors[t] = (tors[t] + l * x) % self.torsion[t]
            degs.append((tuple(free), tuple(tors)))
        if any(d != degs[0] for d in degs[1:]):
            raise AssertionError(f"row {self.ident}: block degrees differ")
        return degs[0]


@lru_cache(maxsize=None)
def target_rows():
    """The twelve rows, in table order."""
    text = resources.files("fanocpx").joinpath("data/table.json").read_text()
    rows = []
    for rec in json.loads(text)["rows"]:
        rows.append(
            TableRow(
                ident=rec["ident"],
                exponents=tuple(tuple(b) for b in rec["exponents"]),
                free_count=rec["free_count"],
                torsion=tuple(rec["torsion"]),
                degree_rows=tuple(tuple(r) for r in rec["degree_rows"]),
                torsion_rows=tuple(tuple(r) for r in rec["torsion_rows"]),
                smooth=rec["smooth"],
            )
        )
    return tuple(rows)


def target_row(ident):
    for row in target_rows():
        if row.ident == ident:
            return row
    raise KeyError(f"no table row named {ident!r}")
