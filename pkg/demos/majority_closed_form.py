"""Certificates for MAJ5 and MAJ7 against Khrapchenko's (l+1)^2.

Run: python demos/majority_closed_form.py        (MAJ7 takes ~15 s)
"""

import math
import time

from kwbound.builders import cert_maj, maj_bound, maj_epsilon, maj_scheme
from kwbound.certificates import verify_certificate

for l in (2, 3):
    t = time.perf_counter()
    scheme = maj_scheme(l)
    cert = cert_maj(l)
    v = verify_certificate(cert.matrix, cert)
    print(f"MAJ{2 * l + 1}: k* = {scheme.kstar}, a = {scheme.a}, b = {scheme.b}, "
          f"eps = {maj_epsilon(l)}")
    print(f"  {len(cert.cliques)} cliques on a {cert.matrix.shape[0]}x{cert.matrix.shape[1]} "
          f"matrix; {v.summary()} (closed form {maj_bound(l)})")
    print(f"  integral bound {math.ceil(v.objective)} vs Khrapchenko {(l + 1) ** 2}"
          f"  [{time.perf_counter() - t:.1f}s]")
