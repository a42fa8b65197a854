import math

import numpy as np
import pytest
import scipy.sparse as sp
from scipy import optimize, special

from hardylab.bessel import lamb_constant
from hardylab.errors import BoundViolation, GridTooCoarse, InfiniteEssentialDiameter, UnsupportedDomain
from hardylab.geometry import Annulus, Ball, ExteriorOfBall, Interval, Polygon2D, Rectangle, Strip
from hardylab.spectral import (
    bound_report,
    davies_bound,
    dirichlet_matrix,
    first_dirichlet_eigenvalue,
    improved_bound,
)

Z0 = special.jn_zeros(0, 1)[0]
LAMBDA0 = 0.9407705639497375


def _annulus_eigenvalue(a, b):
    # first root of J0(k a) Y0(k b) - J0(k b) Y0(k a)
    f = lambda k: special.j0(k * a) * special.y0(k * b) - special.j0(k * b) * special.y0(k * a)
    ks = np.linspace(0.1, 10.0, 2000)
    i = int(np.argmax(np.sign(f(ks[:-1])) != np.sign(f(ks[1:]))))
    return optimize.brentq(f, ks[i], ks[i + 1], xtol=1e-15) ** 2


class TestEigenvalue:
    @pytest.mark.parametrize("domain,ref,tol", [
        (Interval(0.0, 1.0), math.pi**2, 1e-6),
        (Ball([0.0, 0.0], 1.0), Z0**2, 1e-4),
        (Rectangle([0.0, 0.0], [1.0, 2.0]), 1.25 * math.pi**2, 1e-6),
        (Annulus([0.0, 0.0], 0.5, 2.0), _annulus_eigenvalue(0.5, 2.0), 1e-4),
        (Ball([0.3, -0.2], 0.7), Z0**2 / 0.49, 1e-4),
    ], ids=["interval", "disk", "rectangle", "annulus", "offset-disk"])
    def test_against_closed_forms(self, domain, ref, tol):
        res = first_dirichlet_eigenvalue(domain)
        assert res.lambda1 == pytest.approx(ref, rel=tol)
        # extrapolation beats the finer raw grid
        assert abs(res.lambda1 - ref) < abs(res.lambda_half - ref)

    def test_square_polygon_matches_rectangle(self):
        sq = Polygon2D([[0, 0], [1, 0], [1, 1], [0, 1]])
        assert first_dirichlet_eigenvalue(sq).lambda1 == pytest.approx(2 * math.pi**2, rel=1e-6)

    @pytest.mark.parametrize("domain", [Interval(0.0, 1.0), Ball([0.0, 0.0], 1.0), Annulus([0, 0], 0.5, 2.0)],
                             ids=lambda d: d.label)
    def test_rayleigh_residual(self, domain):
        res = first_dirichlet_eigenvalue(domain)
        A, pts = dirichlet_matrix(domain, 0.5 * res.h)
        v = res.vector
        assert np.linalg.norm(A @ v - res.lambda_half * v) / np.linalg.norm(v) < 1e-8
        assert (v @ (A @ v)) / (v @ v) == pytest.approx(res.lambda_half, rel=1e-10)
        assert len(pts) == len(v)

    def test_second_order_convergence(self):
        d = Ball([0.0, 0.0], 1.0)
        errs = [abs(first_dirichlet_eigenvalue(d, h).lambda_h - Z0**2) for h in (1 / 32, 1 / 64)]
        assert errs[0] / errs[1] > 3.0

    def test_grid_too_coarse(self):
        with pytest.raises(GridTooCoarse):
            first_dirichlet_eigenvalue(Interval(0.0, 1.0), h=0.05)

    @pytest.mark.parametrize("domain", [Strip([0, 1], 1.0), ExteriorOfBall([0, 0], 1.0), Ball([0, 0, 0], 1.0)],
                             ids=lambda d: d.label)
    def test_unsupported(self, domain):
        with pytest.raises(UnsupportedDomain):
            first_dirichlet_eigenvalue(domain)

    def test_matrix_is_positive(self):
        A, _ = dirichlet_matrix(Ball([0, 0], 1.0), 1 / 32)
        assert np.all(A.diagonal() > 0)
        off = A - sp.diags(A.diagonal(), format="csc")
        assert np.all(off.data <= 0)


class TestBounds:
    def test_interval(self):
        # mu = 1/2 for the unit interval, so davies = 1 / (4 mu^2) = 1
        assert davies_bound(Interval(0.0, 1.0)) == pytest.approx(1.0, abs=1e-9)
        assert improved_bound(Interval(0.0, 1.0)) == pytest.approx(1.0 + 4 * LAMBDA0**2, abs=1e-9)

    def test_disk(self):
        assert davies_bound(Ball([0, 0], 1.0)) == pytest.approx(0.5, abs=1e-9)
        assert improved_bound(Ball([0, 0], 1.0)) == pytest.approx(0.5 + 2 * LAMBDA0**2, abs=1e-9)

    def test_improvement_strict(self):
        for d in (Interval(0, 1), Ball([0, 0], 1.0), Rectangle([0, 0], [1, 2]), Annulus([0, 0], 0.5, 2.0)):
            gap = improved_bound(d) - davies_bound(d)
            D = d.essential_diameter()
            assert gap == pytest.approx(4 * d.dim * lamb_constant() ** 2 / D**2, rel=1e-12)
            assert gap > 0

    def test_infinite_essential_diameter(self):
        with pytest.raises(InfiniteEssentialDiameter):
            improved_bound(Strip([0, 1], 1.0))

    @pytest.mark.parametrize("domain", [
        Interval(0.0, 1.0),
        Ball([0.0, 0.0], 1.0),
        Rectangle([0.0, 0.0], [1.0, 2.0]),
        Annulus([0.0, 0.0], 0.5, 2.0),
        Polygon2D([[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]]),
    ], ids=lambda d: d.label)
    def test_ordering(self, domain):
        rep = bound_report(domain)
        assert rep.davies < rep.improved <= rep.lambda1 * 1.02
        assert rep.margin == pytest.approx(rep.lambda1 - rep.improved)

    @pytest.mark.parametrize("s", [0.5, 2.0])
    @pytest.mark.parametrize("domain", [Ball([0.0, 0.0], 1.0), Rectangle([0.0, 0.0], [1.0, 2.0])],
                             ids=lambda d: d.label)
    def test_dilation_covariance(self, domain, s):
        a, b = bound_report(domain), bound_report(domain.dilate(s))
        for key in ("davies", "improved", "lambda1"):
            assert getattr(b, key) == pytest.approx(getattr(a, key) / s**2, rel=1e-6)

    def test_strip_fallback(self):
        rep = bound_report(Strip([0, 1], 1.0))
        assert rep.fallback
        assert rep.improved == rep.davies
        assert rep.lambda1 is None and rep.margin is None

    def test_violation_is_raised(self):
        with pytest.raises(BoundViolation):
            bound_report(Interval(0.0, 1.0), slack=-0.6)

    def test_serialization(self):
        rep = bound_report(Interval(0.0, 1.0))
        d = rep.to_dict()
        assert d["N"] == 1 and d["margin"] == rep.margin
        assert len(rep.csv_row()) == len(rep.CSV_HEADER)
