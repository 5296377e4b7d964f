"""Walk through the root data the rest of the library is built on.

Run with ``python demos/root_systems.py``.
"""

from artifact.exact import fmt_vec
from artifact.lattice import coroot_lattice, integral_lattice
from artifact.rootsys import build_root_system, center_structure, rho_pairing, two_rho

for label, rank in [("A", 3), ("B", 3), ("D", 4), ("G2", None), ("E8", None)]:
    rs = build_root_system(label, rank)
    group, _ = center_structure(rs)
    print(f"{rs.name:>3}: {len(rs.roots):3d} roots, centre {group}, 2rho = {fmt_vec(two_rho(rs))}")

# rho takes the value 1 on every simple coroot; this is how the chamber is checked
rs = build_root_system("F4")
print("F4 rho on simple coroots:", [str(rho_pairing(rs, rs.roots[i].coroot)) for i in rs.simples])

# The integral lattice of SU(4)/Z2 sits between the coroot lattice and the central lattice
lat = integral_lattice("A", 3, ["2L1"])
print("[integral : coroot] for SU(4)/Z2 =", lat.index_of(coroot_lattice(build_root_system("A", 3))))
