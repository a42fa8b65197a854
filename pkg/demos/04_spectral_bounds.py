# Spectral lower bounds
#
# Two lower bounds for the first Dirichlet eigenvalue follow from the Hardy
# identities: a Davies-type bound 1/(4 mu^2) and an improved bound that adds
# a Bessel mass term scaled by the essential diameter. We compare both to a
# finite-difference eigenvalue.

from hardylab import Annulus, Ball, Interval, Rectangle, Strip, bound_report

domains = [Interval(0.0, 1.0), Ball([0.0, 0.0], 1.0), Rectangle([0.0, 0.0], [2.0, 1.0]), Annulus([0.0, 0.0], 0.5, 1.0)]
print(f"{'domain':<24} {'mu':>8} {'davies':>9} {'improved':>9} {'lambda1':>9}")
for dom in domains:
    rep = bound_report(dom)
    print(f"{rep.domain:<24} {rep.mu:8.5f} {rep.davies:9.5f} {rep.improved:9.5f} {rep.lambda1:9.5f}")

# An unbounded strip has infinite essential diameter, so only the Davies
# bound survives and no eigenvalue is computed.

rep = bound_report(Strip([0.0, 1.0], 1.0))
print(f"strip: davies={rep.davies:.5f} improved={rep.improved:.5f} fallback={rep.fallback}")
