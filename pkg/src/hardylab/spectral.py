"""First Dirichlet eigenvalue and the mean-distance lower bounds.

The Laplacian is discretized on a uniform grid anchored at the lower corner of
the bounding box. Nodes next to a curved or off-grid boundary use the
Shortley-Weller stencil with the exact distance to the boundary along the
axis, so the eigenvalue error is O(h^2) and Richardson extrapolation over h and
h/2 applies.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .bessel import lamb_constant
from .errors import (
    BoundViolation,
    GridTooCoarse,
    InfiniteEssentialDiameter,
    UnsupportedDomain,
)
from .geometry import Annulus, Ball, Interval, Polygon2D, Rectangle
from .mean_distance import quasi_inradius

__all__ = [
    "EigenResult",
    "dirichlet_matrix",
    "first_dirichlet_eigenvalue",
    "davies_bound",
    "improved_bound",
    "BoundReport",
    "bound_report",
    "BOUND_SLACK",
]

MIN_NODES = 32
BOUND_SLACK = 0.02
_ON_BOUNDARY = 1e-10


def _supported(domain):
    if isinstance(domain, (Interval, Polygon2D)):
        return True
    if isinstance(domain, (Ball, Annulus, Rectangle)):
        return domain.dim <= 2
    return False


def _grid_shape(domain, h):
    lo, hi = (np.asarray(b, dtype=float) for b in domain.bbox())
    n = np.ceil((hi - lo) / h - 1e-9).astype(int) - 1
    if np.any(n < MIN_NODES):
        raise GridTooCoarse(
            f"h = {h:g} leaves {int(n.min())} interior nodes on some axis; need {MIN_NODES}")
    return lo, n


def dirichlet_matrix(domain, h):
    """Sparse matrix of -Delta_h with zero boundary values, and its nodes.

    Returns (A, points). A is square in the interior nodes; it is symmetric
    whenever no boundary cuts a grid arm (e.g. an aligned rectangle).
    """
    if not _supported(domain):
        raise UnsupportedDomain(f"no eigenvalue discretization for {domain.label}")
    lo, n = _grid_shape(domain, h)
    axes = [lo[i] + h * np.arange(1, n[i] + 1) for i in range(domain.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    interior = domain._contains(pts) & (domain._dist(pts) > _ON_BOUNDARY * h)
    index = np.full(len(pts), -1)
    index[interior] = np.arange(int(interior.sum()))
    flat = np.arange(len(pts)).reshape(tuple(n))
    x = pts[interior]
    m = len(x)
    rows, cols, vals = [], [], []
    diag = np.zeros(m)
    for i in range(domain.dim):
        arms, nbrs = [], []
        for sgn in (1.0, -1.0):
            e = np.zeros(domain.dim)
            e[i] = sgn
            ray = domain._ray(x, np.broadcast_to(e, x.shape))
            # neighbour index, or -1 when it falls off the grid
            k = np.stack(np.unravel_index(np.flatnonzero(interior), tuple(n)), axis=-1)
            k[:, i] += int(sgn)
            ok = (k[:, i] >= 0) & (k[:, i] < n[i])
            nb = np.full(m, -1)
            nb[ok] = index[flat[tuple(k[ok].T)]]
            use = (ray >= h * (1.0 - _ON_BOUNDARY)) & (nb >= 0)
            arms.append(np.where(use, h, np.minimum(ray, h)))
            nbrs.append(np.where(use, nb, -1))
        hp, hm = arms
        # u'' ~ 2 [u+ / (h+ (h+ + h-)) + u- / (h- (h+ + h-)) - u0 / (h+ h-)]
        diag += 2.0 / (hp * hm)
        for arm, other, nb in ((hp, hm, nbrs[0]), (hm, hp, nbrs[1])):
            sel = nb >= 0
            rows.append(np.flatnonzero(sel))
            cols.append(nb[sel])
            vals.append(-2.0 / (arm[sel] * (arm[sel] + other[sel])))
    rows.append(np.arange(m))
    cols.append(np.arange(m))
    vals.append(diag)
    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m))
    return A, x


def _inverse_iteration(A, tol=1e-11, max_iter=2000):
    """Smallest eigenpair of A by inverse iteration with shift 0."""
    lu = splu(A)
    v = np.ones(A.shape[0]) / math.sqrt(A.shape[0])
    lam, res = 0.0, np.inf
    for it in range(1, max_iter + 1):
        v = lu.solve(v)
        v /= np.linalg.norm(v)
        Av = A @ v
        lam = float(v @ Av)
        res = float(np.linalg.norm(Av - lam * v))
        if res < tol * lam:
            break
    return lam, v, it, res


@dataclass(frozen=True)
class EigenResult:
    """Extrapolated first Dirichlet eigenvalue with the finer-grid eigenpair.

    ``residual`` is ||(A - lambda_half) v|| for the unit vector ``vector`` on
    the h/2 grid; ``lambda_h`` and ``lambda_half`` are the raw grid values.
    """

    lambda1: float
    h: float
    iterations: int
    residual: float
    lambda_h: float
    lambda_half: float
    vector: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)


def first_dirichlet_eigenvalue(domain, h=None):
    """lambda_1 of -Delta with Dirichlet data, Richardson-extrapolated over h, h/2.

    ``h`` defaults to 1/64 of the shortest side of the bounding box.
    """
    if not _supported(domain):
        raise UnsupportedDomain(f"no eigenvalue discretization for {domain.label}")
    if h is None:
        lo, hi = (np.asarray(b, dtype=float) for b in domain.bbox())
        h = float(np.min(hi - lo)) / 64.0
    A1, _ = dirichlet_matrix(domain, h)
    lam1, _, it1, _ = _inverse_iteration(A1)
    A2, pts = dirichlet_matrix(domain, 0.5 * h)
    lam2, v, it2, res = _inverse_iteration(A2)
    return EigenResult((4.0 * lam2 - lam1) / 3.0, h, it1 + it2, res, lam1, lam2, v, pts)


def davies_bound(domain, sq=None, grid=64):
    """N / (4 mu^2) with mu the quasi-inradius."""
    mu = quasi_inradius(domain, sq=sq, grid=grid)
    return domain.dim / (4.0 * mu * mu)


def improved_bound(domain, sq=None, grid=64):
    """N / (4 mu^2) + 4 N lambda0^2 / D_inf^2."""
    D = domain.essential_diameter()
    if not math.isfinite(D):
        raise InfiniteEssentialDiameter(f"D_inf is infinite for {domain.label}")
    lam0 = lamb_constant()
    return davies_bound(domain, sq, grid) + 4.0 * domain.dim * lam0 * lam0 / (D * D)


@dataclass
class BoundReport:
    """Lower bounds against the computed first eigenvalue.

    ``lambda1`` is None when the domain has no eigenvalue discretization; the
    orderings involving it are then skipped. ``fallback`` marks an infinite
    essential diameter, in which case improved equals davies.
    """

    domain: str
    dim: int
    mu: float
    D_inf: float
    davies: float
    improved: float
    lambda1: float = None
    fallback: bool = False
    improvement_margin: float = 0.0
    eigen_margin: float = None
    slack: float = BOUND_SLACK

    CSV_HEADER = ("domain", "N", "mu", "D_inf", "davies", "improved", "lambda1", "margin")

    @property
    def margin(self):
        """lambda1 - improved, or None without an eigenvalue."""
        return self.eigen_margin

    def to_dict(self):
        return {
            "domain": self.domain,
            "N": self.dim,
            "mu": self.mu,
            "D_inf": self.D_inf,
            "davies": self.davies,
            "improved": self.improved,
            "lambda1": self.lambda1,
            "fallback": self.fallback,
            "improvement_margin": self.improvement_margin,
            "margin": self.eigen_margin,
            "slack": self.slack,
        }

    def csv_row(self):
        return (self.domain, self.dim, self.mu, self.D_inf, self.davies, self.improved,
                self.lambda1, self.eigen_margin)


def bound_report(domain, h=None, sq=None, grid=64, check=True, slack=BOUND_SLACK):
    """Assemble davies, improved and lambda_1 and check their ordering.

    Raises BoundViolation unless davies < improved (equal under the fallback)
    and improved <= lambda_1 (1 + slack).
    """
    mu = quasi_inradius(domain, sq=sq, grid=grid)
    davies = domain.dim / (4.0 * mu * mu)
    D = domain.essential_diameter()
    fallback = not math.isfinite(D)
    if fallback:
        improved = davies
    else:
        lam0 = lamb_constant()
        improved = davies + 4.0 * domain.dim * lam0 * lam0 / (D * D)
    lam1 = first_dirichlet_eigenvalue(domain, h).lambda1 if _supported(domain) else None
    rep = BoundReport(domain.label, domain.dim, mu, D, davies, improved, lam1, fallback,
                      improved - davies, None if lam1 is None else lam1 - improved, slack)
    if check:
        if not (fallback or davies < improved):
            raise BoundViolation(f"davies {davies!r} is not below improved {improved!r}")
        if lam1 is not None and improved > lam1 * (1.0 + slack):
            raise BoundViolation(f"improved {improved!r} exceeds lambda1 {lam1!r}")
    return rep
