"""Mean distance, spherical means of Bessel pairs and the skeletal mean.

Directional quantities are averaged over the unit sphere with the normalized
measure. For a point x and a direction nu the distance used in these averages
is the two-sided line distance min(rho_nu(x), rho_{-nu}(x)): the distance from
x to the nearer end of the segment of the line through x in direction nu.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gammaln

from .errors import InvalidGammaArgument, RhoExceedsPairInterval, UnboundedSupremum
from .geometry import _check_inside, _points, lateral_grid
from .quadrature import SphereQuadrature, midpoint_grid, sphere_quadrature

__all__ = [
    "SphereQuadrature",
    "sphere_quadrature",
    "xi",
    "line_distances",
    "mean_distance",
    "quasi_inradius",
    "MeanWeights",
    "spherical_mean_weights",
    "skeletal_mean",
]

_CHUNK = 4096


def xi(N, p):
    """Xi(N, p) = sqrt(pi) Gamma((N+p)/2) / (Gamma((p+1)/2) Gamma(N/2)).

    It is the reciprocal of the sphere average of |nu . e|^p.
    """
    args = (0.5 * (N + p), 0.5 * (p + 1.0), 0.5 * N)
    if N < 1 or min(args) <= 0:
        raise InvalidGammaArgument(f"Gamma arguments must be positive for N={N}, p={p}")
    return math.exp(0.5 * math.log(math.pi) + gammaln(args[0]) - gammaln(args[1]) - gammaln(args[2]))


def _default_sq(domain, sq):
    return sphere_quadrature(domain.dim) if sq is None else sq


def line_distances(domain, pts, nodes):
    """Two-sided line distances, shape (P, M), for unchecked points."""
    out = np.empty((len(pts), len(nodes)))
    for s in range(0, len(pts), _CHUNK):
        x = pts[s : s + _CHUNK]
        X = np.broadcast_to(x[:, None, :], (len(x), len(nodes), domain.dim))
        nu = np.broadcast_to(nodes[None], X.shape)
        out[s : s + _CHUNK] = np.minimum(domain._ray(X, nu), domain._ray(X, -nu))
    return out


def _mean_distance_unchecked(domain, pts, p, sq):
    rho = line_distances(domain, pts, sq.nodes)
    with np.errstate(divide="ignore"):
        avg = (rho ** (-p)) @ sq.weights
    return (xi(domain.dim, p) * avg) ** (-1.0 / p)


def mean_distance(domain, x, p=2.0, sq=None):
    """d_{M,p}(x) = (Xi(N,p) avg_nu rho_nu(x)^{-p})^{-1/p}."""
    if p <= 0:
        raise ValueError("p must be positive")
    sq = _default_sq(domain, sq)
    pts, single = _points(domain, x)
    _check_inside(domain, pts)
    val = _mean_distance_unchecked(domain, pts, p, sq)
    return float(val[0]) if single else val


def _golden_max(f, a, b, iters=60):
    """Maximize a unimodal f on [a, b]; fixed iteration count for determinism."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def quasi_inradius(domain, sq=None, grid=64, box=None, sweeps=2, return_point=False):
    """mu = sqrt(N) sup_x d_{M,2}(x).

    The supremum is located on a ``grid``^N midpoint grid over ``box`` (the
    domain's search box by default), then refined by golden-section searches
    along each coordinate within one cell of the best node.
    """
    sq = _default_sq(domain, sq)
    if box is None:
        box = domain.search_box()
    if box is None:
        raise UnboundedSupremum(f"no bounded search region for {domain.label}")
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    pts, _, h = midpoint_grid(lo, hi, grid)
    inside = domain._contains(pts)
    vals = np.full(len(pts), -np.inf)
    vals[inside] = _mean_distance_unchecked(domain, pts[inside], 2.0, sq)
    best = int(np.argmax(vals))
    if not domain.bounded:
        idx = np.stack(np.unravel_index(np.arange(len(pts)), (grid,) * domain.dim), axis=-1)
        edge = np.any((idx == 0) | (idx == grid - 1), axis=-1)
        interior_max = vals[~edge].max()
        if vals[edge].max() > interior_max * (1.0 + 1e-12):
            raise UnboundedSupremum("mean distance keeps growing towards the search box boundary")

    def value(y):
        y = y[None]
        if not domain._contains(y)[0]:
            return -np.inf
        return float(_mean_distance_unchecked(domain, y, 2.0, sq)[0])

    x = pts[best].copy()
    fx = vals[best]
    for _ in range(sweeps):
        for i in range(domain.dim):
            def along(t, i=i):
                y = x.copy()
                y[i] = t
                return value(y)

            t, ft = _golden_max(along, x[i] - h[i], x[i] + h[i])
            if ft > fx:
                x[i], fx = t, ft
    mu = math.sqrt(domain.dim) * fx
    return (mu, x) if return_point else mu


@dataclass(frozen=True)
class MeanWeights:
    """Spherical means of a Bessel pair at one or more points."""

    vTilde: np.ndarray
    vMean: np.ndarray
    wMean: np.ndarray


def spherical_mean_weights(pair, domain, x, sq=None, e_ref=None):
    """Return (V~, V_M, W_M) at x.

    V~ = avg V(rho_nu)|nu . e|^p, V_M = avg V(rho_nu), W_M = avg W(rho_nu),
    with e the first coordinate axis unless ``e_ref`` is given.
    """
    sq = _default_sq(domain, sq)
    pts, single = _points(domain, x)
    _check_inside(domain, pts)
    e = np.eye(domain.dim)[0] if e_ref is None else np.asarray(e_ref, dtype=float)
    rho = line_distances(domain, pts, sq.nodes)
    if math.isfinite(pair.R):
        bad = np.argwhere(rho >= pair.R)
        if len(bad):
            k = int(bad[0, 1])
            raise RhoExceedsPairInterval(
                f"rho = {rho[bad[0, 0], k]:g} along node {k} is not below R = {pair.R:g}", node=k
            )
    V = pair.V(rho)
    cosp = np.abs(sq.nodes @ e) ** pair.p
    out = MeanWeights((V * cosp) @ sq.weights, V @ sq.weights, pair.W(rho) @ sq.weights)
    if single:
        return MeanWeights(float(out.vTilde[0]), float(out.vMean[0]), float(out.wMean[0]))
    return out


def skeletal_mean(domain, f, box, sq=None, lateral_cells=256, directional=False):
    """S[f] = avg_nu int_{nu-perp} sum over segments f(midpoint) dx'.

    ``f`` maps points (P, N) to values, or (points, nu) when ``directional``;
    it must vanish outside ``box``. Each line appears once for nu and once for
    -nu with the same midpoints, so only half of the antipodal nodes are
    visited, with doubled weights; a directional f must be even in nu.
    """
    sq = _default_sq(domain, sq).half()
    total = 0.0
    for nu, w in zip(sq.nodes, sq.weights):
        base, cell = lateral_grid(domain, nu, box, lateral_cells)
        chords = domain._chords(base, nu)
        mid = 0.5 * (chords[..., 0] + chords[..., 1])
        ok = np.isfinite(mid)
        if not np.any(ok):
            continue
        m = base[:, None, :] + mid[..., None] * nu
        m = m[ok]
        vals = f(m, nu) if directional else f(m)
        total += w * cell * float(np.sum(vals))
    return total
