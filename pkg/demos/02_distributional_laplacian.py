# The distributional Laplacian of the distance function
#
# Away from the cut locus, Delta d is an honest function. On the cut locus it
# carries a singular part, a negative measure concentrated on the skeleton.
# The pairing <-Delta d, psi> can be computed two ways: by integration by
# parts against grad d, or by adding the smooth part to an explicit skeleton
# integral. Agreement of the two is a check on the geometry.

from hardylab import Ball, QuadratureScheme, Rectangle, Strip, cut_locus, distributional_pairing, radial_bump

# For a strip the skeleton is the mid-line and the smooth part vanishes, so
# the whole pairing lives on the line.

strip = Strip([0.0, 1.0], 1.0)
psi = radial_bump([0.0, -0.3], 0.5)
print("strip cut locus:", cut_locus(strip).kind)
for method in ("IBP", "GEOMETRIC"):
    print(f"  {method:<9} {distributional_pairing(strip, psi, method=method):.12f}")

# Cells crossing the mid-line see two values of grad d. Without splitting
# them the IBP rule is only first order in the finest cell size.

plain = distributional_pairing(strip, psi, QuadratureScheme(cut_cells=False))
print(f"  IBP without cut cells {plain:.12f}")

# A disk has a single skeleton point, a rectangle a tree of segments.

for dom, bump in ((Ball([0.0, 0.0], 1.0), radial_bump([0.1, 0.0], 0.4)),
                  (Rectangle([0.0, 0.0], [2.0, 1.0]), radial_bump([1.0, 0.5], 0.45))):
    ibp = distributional_pairing(dom, bump, method="IBP")
    geo = distributional_pairing(dom, bump, method="GEOMETRIC")
    print(f"{type(dom).__name__:<10} IBP={ibp:.10f} GEOMETRIC={geo:.10f} gap={abs(ibp - geo):.1e}")
