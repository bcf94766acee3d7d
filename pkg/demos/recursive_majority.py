"""Recursive majorities: where the plain LP falls short and groups close the gap.

Run: python demos/recursive_majority.py
"""

from kwbound.boolfunc import formula_size, urec_formula
from kwbound.bounds import lp_bound
from kwbound.builders import brec_bound, build_brec, build_urec, cert_brec2, urec_bound
from kwbound.certificates import verify_certificate
from kwbound.commmatrix import brec2_submatrix

sub = brec2_submatrix()[0]
print(f"BRec h=2, 9x9 submatrix: plain LP {lp_bound(sub).value}")
cert = cert_brec2()
print(f"  with 12 cliques and one rank group (alpha 4): {verify_certificate(sub, cert).summary()}")

built = build_brec(2)
print(f"  recursive scheme: {'verified' if built.accepted else 'solved'} {built.value} "
      f"(closed form {brec_bound(2)}, adversary bound 16)")

for mode in ("monotone", "general"):
    built = build_urec(2, mode)
    how = "scheme verified" if built.accepted else "scheme rejected, solver"
    print(f"URec h=2 ({mode} cells): {how} {built.value} (closed form {urec_bound(2)})")
    for note in built.notes:
        print(f"  note: {note}")
print(f"  upper bound: formula of size {formula_size(urec_formula(2))}")
