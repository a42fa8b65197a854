import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import gamma

from hardylab.bessel import lamb_pair, power_pair
from hardylab.errors import (
    InvalidGammaArgument,
    PointOutsideDomain,
    RhoExceedsPairInterval,
    UnboundedSupremum,
)
from hardylab.geometry import Annulus, Ball, ExteriorOfBall, Interval, Polygon2D, Rectangle, Strip
from hardylab.mean_distance import (
    line_distances,
    mean_distance,
    quasi_inradius,
    skeletal_mean,
    spherical_mean_weights,
    xi,
)
from hardylab.quadrature import sphere_quadrature
from hardylab.testfunctions import eta

# centre of the unit square: rho_nu = 1 / (2 max(|cos|, |sin|)) and the circle
# average of max(cos^2, sin^2) is 1/2 + 1/pi, so mu = (2 + 4/pi)^(-1/2)
SQUARE_MU_CLOSED_FORM = (2.0 + 4.0 / math.pi) ** -0.5
# regression value from the default 256-node circle rule and 64^2 search grid
SQUARE_MU_REGRESSION = 0.5527167481011988

DOMAINS = [
    Ball([0.0, 0.0], 1.0),
    Ball([0.1, 0.0, -0.2], 0.7),
    Annulus([0.0, 0.0], 0.5, 2.0),
    Rectangle([0.0, 0.0], [1.0, 2.0]),
    Polygon2D([[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]]),
    Strip([0.0, 1.0], 1.0),
]


def _interior(domain, n, rng):
    lo, hi = domain.bbox() if domain.bounded else domain.search_box()
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    x = lo + (hi - lo) * rng.random((8 * n, domain.dim))
    return x[domain._contains(x)][:n]


class TestXi:
    @pytest.mark.parametrize("N", [1, 2, 3, 5])
    def test_xi_p2_equals_dimension(self, N):
        assert xi(N, 2.0) == pytest.approx(N, rel=1e-14)

    @given(st.floats(0.1, 10.0))
    @settings(max_examples=30, deadline=None)
    def test_xi_one_dimension_is_one(self, p):
        assert xi(1, p) == pytest.approx(1.0, rel=1e-13)

    def test_xi_2_1(self):
        assert xi(2, 1.0) == pytest.approx(math.pi / 2, rel=1e-14)

    @pytest.mark.parametrize("N,p", [(2, 1.5), (3, 3.0), (4, 2.5), (7, 1.2)])
    def test_against_gamma(self, N, p):
        ref = math.sqrt(math.pi) * gamma((N + p) / 2) / (gamma((p + 1) / 2) * gamma(N / 2))
        assert xi(N, p) == pytest.approx(ref, rel=1e-13)

    @pytest.mark.parametrize("N,p", [(2, 1.5), (3, 3.0)])
    def test_reciprocal_of_cosine_moment(self, N, p):
        sq = sphere_quadrature(N, 8192 if N == 2 else 65536)
        moment = sq.weights @ np.abs(sq.nodes[:, 0]) ** p
        assert moment * xi(N, p) == pytest.approx(1.0, rel=1e-4)

    @pytest.mark.parametrize("N,p", [(0, 2.0), (2, -1.0), (1, -2.5)])
    def test_invalid(self, N, p):
        with pytest.raises(InvalidGammaArgument):
            xi(N, p)


class TestMeanDistance:
    @pytest.mark.parametrize("R,N", [(1.0, 2), (0.7, 2), (2.0, 3)])
    def test_ball_centre(self, R, N):
        assert mean_distance(Ball(np.zeros(N), R), np.zeros(N)) == pytest.approx(R / math.sqrt(N), rel=1e-13)

    def test_interval_midpoint(self):
        # (1/2 * 2^2 + 1/2 * 2^2)^(-1/2) with the two-point rule and Xi(1, 2) = 1
        assert mean_distance(Interval(0.0, 1.0), 0.5) == pytest.approx(0.5, rel=1e-14)

    def test_interval_general_point(self):
        # both directions see the nearer end of the interval
        t = np.array([0.1, 0.3, 0.8])
        ref = np.minimum(t, 1 - t)
        np.testing.assert_allclose(mean_distance(Interval(0.0, 1.0), t[:, None]), ref, rtol=1e-14)

    def test_square_centre_closed_form(self):
        sq = sphere_quadrature(2, 16384)
        val = math.sqrt(2) * mean_distance(Rectangle([0, 0], [1, 1]), [0.5, 0.5], sq=sq)
        assert val == pytest.approx(SQUARE_MU_CLOSED_FORM, rel=1e-7)

    @pytest.mark.parametrize("domain", DOMAINS, ids=lambda d: d.label)
    def test_bounded_by_distance(self, domain):
        # rho_nu >= d for every nu, so avg rho^-p <= d^-p
        rng = np.random.default_rng(42)
        x = _interior(domain, 50, rng)
        sq = sphere_quadrature(domain.dim)
        avg = line_distances(domain, x, sq.nodes) ** -2.0 @ sq.weights
        assert np.all(avg <= domain._dist(x) ** -2.0 * (1 + 1e-12))

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_round_trip(self, p):
        domain = Annulus([0, 0], 0.5, 2.0)
        x = _interior(domain, 20, np.random.default_rng(42))
        sq = sphere_quadrature(2)
        lhs = mean_distance(domain, x, p=p, sq=sq) ** -p / xi(2, p)
        rhs = line_distances(domain, x, sq.nodes) ** -p @ sq.weights
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12)

    @pytest.mark.parametrize("s", [0.5, 2.0])
    def test_dilation(self, s):
        domain = Polygon2D([[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]])
        x = np.array([[1.0, 0.5], [0.6, 0.3]])
        np.testing.assert_allclose(mean_distance(domain.dilate(s), s * x), s * mean_distance(domain, x), rtol=1e-12)

    def test_outside(self):
        with pytest.raises(PointOutsideDomain):
            mean_distance(Ball([0, 0], 1.0), [1.5, 0.0])

    def test_nonpositive_p(self):
        with pytest.raises(ValueError):
            mean_distance(Ball([0, 0], 1.0), [0.0, 0.0], p=0.0)


class TestQuasiInradius:
    def test_ball(self):
        assert quasi_inradius(Ball([0, 0], 1.0)) == pytest.approx(1.0, abs=1e-9)

    def test_interval(self):
        assert quasi_inradius(Interval(0.0, 1.0)) == pytest.approx(0.5, abs=1e-9)

    def test_square_regression(self):
        mu, x = quasi_inradius(Rectangle([0, 0], [1, 1]), return_point=True)
        assert mu == pytest.approx(SQUARE_MU_REGRESSION, rel=1e-12)
        np.testing.assert_allclose(x, [0.5, 0.5], atol=1e-6)
        assert mu == pytest.approx(SQUARE_MU_CLOSED_FORM, rel=5e-5)

    def test_strip_is_translation_invariant(self):
        # on the mid-line rho_nu = w / |cos|, so d_M = w and mu = sqrt(2) w
        assert quasi_inradius(Strip([0, 1], 0.75)) == pytest.approx(math.sqrt(2) * 0.75, rel=1e-9)

    def test_sup_dominates_samples(self):
        domain = Polygon2D([[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]])
        mu = quasi_inradius(domain)
        x = _interior(domain, 500, np.random.default_rng(42))
        assert math.sqrt(2) * np.max(mean_distance(domain, x)) <= mu * (1 + 1e-12)

    @pytest.mark.parametrize("s", [0.5, 2.0])
    def test_dilation(self, s):
        d = Rectangle([0, 0], [1, 2])
        assert quasi_inradius(d.dilate(s)) == pytest.approx(s * quasi_inradius(d), rel=1e-10)

    def test_exterior_unbounded(self):
        with pytest.raises(UnboundedSupremum):
            quasi_inradius(ExteriorOfBall([0, 0], 1.0))
        with pytest.raises(UnboundedSupremum):
            quasi_inradius(ExteriorOfBall([0, 0], 1.0), box=([-3, -3], [3, 3]))


class TestSphericalMeans:
    @pytest.mark.parametrize("N", [2, 3])
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_unit_weight_constants(self, N, p):
        # V = 1: vTilde = 1/Xi(N, p), vMean = 1, wMean = ((p-1)/p)^p / (Xi d_M^p)
        domain = Ball(np.zeros(N), 1.0)
        sq = sphere_quadrature(N, 16384 if N == 2 else 65536)
        x = np.zeros(N)
        x[0] = 0.3
        mw = spherical_mean_weights(power_pair(p, 0.0), domain, x, sq=sq)
        tol = 1e-8 if N == 2 else 2e-3
        assert mw.vTilde == pytest.approx(1.0 / xi(N, p), rel=tol)
        assert mw.vMean == pytest.approx(1.0, rel=1e-14)
        ref = ((p - 1) / p) ** p / (xi(N, p) * mean_distance(domain, x, p, sq) ** p)
        assert mw.wMean == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("N", [2, 3])
    def test_vtilde_is_one_over_n_for_p2(self, N):
        sq = sphere_quadrature(N, None if N == 2 else 65536)
        mw = spherical_mean_weights(power_pair(2.0, 0.0), Ball(np.zeros(N), 1.0), np.zeros(N), sq=sq)
        assert mw.vTilde == pytest.approx(1.0 / N, rel=1e-12 if N == 2 else 1e-4)

    @pytest.mark.parametrize("domain", DOMAINS[:5], ids=lambda d: d.label)
    @pytest.mark.parametrize("pair", [power_pair(2.0, 1.0), power_pair(3.0, -0.5), power_pair(1.5, 0.0)],
                             ids=lambda q: q.label)
    def test_vtilde_below_vmean(self, domain, pair):
        x = _interior(domain, 1000, np.random.default_rng(42))
        mw = spherical_mean_weights(pair, domain, x, sq=sphere_quadrature(domain.dim, 64 if domain.dim == 2 else 128))
        assert len(x) == 1000
        assert np.all(mw.vTilde <= mw.vMean * (1 + 1e-14))

    def test_reference_vector_independence_for_unit_weight(self):
        domain = Rectangle([0, 0], [1, 2])
        x = np.array([[0.3, 0.4], [0.8, 1.7]])
        pair = power_pair(3.0, 0.0)
        a = spherical_mean_weights(pair, domain, x, e_ref=[1.0, 0.0])
        b = spherical_mean_weights(pair, domain, x, e_ref=[0.6, 0.8])
        np.testing.assert_allclose(a.vTilde, b.vTilde, rtol=1e-8)

    def test_reference_vector_independence_at_ball_centre(self):
        pair = power_pair(2.0, 1.0)
        a = spherical_mean_weights(pair, Ball([0, 0], 1.0), [0.0, 0.0], e_ref=[1.0, 0.0])
        b = spherical_mean_weights(pair, Ball([0, 0], 1.0), [0.0, 0.0], e_ref=[0.0, 1.0])
        assert a.vTilde == pytest.approx(b.vTilde, rel=1e-12)

    def test_rho_exceeds_pair_interval(self):
        # the Lamb pair scaled to R = 0.3 stops at z0 R / lambda0, about 0.77
        pair = lamb_pair(0.0, R=0.3)
        with pytest.raises(RhoExceedsPairInterval) as info:
            spherical_mean_weights(pair, Ball([0, 0], 1.0), [0.0, 0.0])
        assert info.value.node is not None


class TestSkeletalMean:
    def test_zero(self):
        f = lambda m: np.zeros(len(m))
        assert skeletal_mean(Ball([0, 0], 1.0), f, ([-0.5, -0.5], [0.5, 0.5])) == 0.0

    def test_ball_radial_bump_against_diameter_integral(self):
        # every chord midpoint lies on the diameter perpendicular to nu
        rho = 0.3
        f = lambda m: eta(np.linalg.norm(m, axis=-1) / rho)
        box = ([-rho, -rho], [rho, rho])
        val = skeletal_mean(Ball([0, 0], 1.0), f, box, lateral_cells=1024)
        ref, _ = integrate.quad(lambda s: float(eta(abs(s) / rho)), -rho, rho, epsabs=1e-13)
        assert val == pytest.approx(ref, rel=1e-6)

    def test_interval_single_midpoint(self):
        f = lambda m: np.exp(-((m[:, 0] - 0.9) ** 2))
        val = skeletal_mean(Interval(0.0, 2.0), f, ([0.5], [1.5]))
        assert val == pytest.approx(math.exp(-0.01), rel=1e-14)

    def test_linear_and_monotone(self):
        domain = Rectangle([0, 0], [1, 2])
        box = ([0.1, 0.1], [0.9, 1.9])
        f = lambda m: eta(np.linalg.norm(m - [0.5, 1.0], axis=-1) / 0.4)
        g = lambda m: eta(np.linalg.norm(m - [0.4, 0.8], axis=-1) / 0.3)
        sq = sphere_quadrature(2, 64)
        sf = skeletal_mean(domain, f, box, sq, 128)
        sg = skeletal_mean(domain, g, box, sq, 128)
        sfg = skeletal_mean(domain, lambda m: 2.0 * f(m) - 3.0 * g(m), box, sq, 128)
        assert sfg == pytest.approx(2.0 * sf - 3.0 * sg, rel=1e-12)
        assert sf > 0 and sg > 0
