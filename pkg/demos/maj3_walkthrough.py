"""Why MAJ3 needs five leaves: the LP stops at 9/2, one clique lifts it to 5.

Run: python demos/maj3_walkthrough.py
"""

import math

from kwbound.boolfunc import brute_force_formula_size, formula_size, maj, maj3_formula
from kwbound.bounds import lp_bound, strengthened_bound
from kwbound.builders import cert_maj3
from kwbound.certificates import CliqueSpec, verify_certificate
from kwbound.commmatrix import fig1_matrix, singleton_cells
from kwbound.rects import enumerate_all_mono_rects
from kwbound.search import min_disjoint_cover

m = fig1_matrix()
print("Communication matrix of MAJ3 (rows: minterms, cols: maxterms):")
print(m.to_csv())
print(f"singleton cells: {len(singleton_cells(m))}")

lp = lp_bound(m)
print(f"plain cover LP: {lp.value}  (rounds up to {math.ceil(lp.value)})")

cert = cert_maj3()
v = verify_certificate(m, cert)
print(f"singleton weights 1 plus one clique at z=-1: {v.summary()}")

strong = strengthened_bound(m, [CliqueSpec(q.pairs) for q in cert.cliques])
print(f"LP with the clique constraint: {strong.value}")

rects = enumerate_all_mono_rects(m)
cover = min_disjoint_cover(m, rects)
print(f"minimum disjoint cover by {len(rects)} candidate rectangles: {cover.count}")
for rect in cover.cover:
    print(f"  color {rect.color}: rows {list(rect.rows)} x cols {list(rect.cols)}")

print(f"smallest formula (exhaustive): {brute_force_formula_size(maj(3)).size}, "
      f"e.g. size-{formula_size(maj3_formula())} {maj3_formula()}")
