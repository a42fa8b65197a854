"""Distance-to-boundary geometry for a closed catalog of domains.

Every domain in the catalog carries analytic formulas for the distance to the
boundary, its gradient, ray casting, the Laplacian of the distance on the good
set, and the decomposition of a line into the segments it cuts out of the
domain. All evaluators are vectorized: points are arrays of shape ``(P, N)``.

The public functions (`distance`, `grad_distance`, ...) validate their inputs
and raise the catalogued errors; the underscore methods on the domain classes
are unchecked kernels used by the quadrature code.
"""

from dataclasses import dataclass, field, fields
import itertools
import math

import numpy as np
from scipy.optimize import linprog

from .errors import (
    NoCutLocusDescriptor,
    NonSmoothBoundaryPoint,
    OnCutLocus,
    OnSkeleton,
    PointOutsideDomain,
    SchemaError,
)
from .quadrature import composite_gauss, sphere_quadrature

SKELETON_RTOL = 1e-9


# ----------------------------------------------------------------------------
# helpers


def _sphere_roots(y, nu, radius):
    """Roots t of |y + t nu|^2 = radius^2 for unit nu, sorted, NaN if none.

    Uses the cancellation-free form of the quadratic formula.
    """
    b = np.einsum("...i,...i->...", y, nu)
    q = np.einsum("...i,...i->...", y, y) - radius**2
    disc = b * b - q
    real = disc >= 0.0
    sq = np.sqrt(np.where(real, disc, 0.0))
    r1 = -(b + np.copysign(sq, b))
    safe = np.where(r1 == 0.0, 1.0, r1)
    r2 = np.where(r1 == 0.0, 0.0, q / safe)
    lo = np.where(real, np.minimum(r1, r2), np.nan)
    hi = np.where(real, np.maximum(r1, r2), np.nan)
    return lo, hi, disc


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("zero vector cannot be normalized")
    return v / n


def orthonormal_complement(nu):
    """Orthonormal basis of the hyperplane orthogonal to the unit vector nu.

    Returns an array of shape (N-1, N); for N = 1 the result has shape (0, 1).
    """
    nu = np.asarray(nu, dtype=float)
    n = nu.size
    if n == 1:
        return np.zeros((0, 1))
    if n == 2:
        return np.array([[-nu[1], nu[0]]])
    # Householder reflection mapping e_k to nu; its other columns span nu-perp.
    k = int(np.argmin(np.abs(nu)))
    e = np.zeros(n)
    e[k] = 1.0
    basis = [e - np.dot(e, nu) * nu]
    basis[0] /= np.linalg.norm(basis[0])
    for i in range(n):
        if len(basis) == n - 1:
            break
        v = np.zeros(n)
        v[i] = 1.0
        v = v - np.dot(v, nu) * nu - sum(np.dot(v, b) * b for b in basis)
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
    return np.array(basis)


@dataclass(frozen=True)
class NearSet:
    """Near points of x: finitely many boundary points, or a whole sphere."""

    points: np.ndarray
    sphere: tuple = None  # (center, radius) when the near set is a sphere

    def __len__(self):
        return len(self.points) if self.sphere is None else math.inf


@dataclass(frozen=True)
class LineSegmentFamily:
    """Connected components of the line {x' + t nu} intersected with the domain.

    ``intervals`` holds (entry, exit) parameters, possibly infinite, ordered
    along nu. ``midpoints`` has one row per bounded segment, NaN otherwise.
    """

    direction: np.ndarray
    base: np.ndarray
    intervals: np.ndarray
    midpoints: np.ndarray

    @property
    def lengths(self):
        return self.intervals[:, 1] - self.intervals[:, 0]

    def __len__(self):
        return len(self.intervals)


@dataclass(frozen=True)
class NormalPatch:
    """Boundary piece sampled in normal coordinates x = y + r n(y).

    ``weights`` discretize the surface measure dH^{N-1} on the boundary,
    ``cut`` is the cut distance c(y) (``inf`` when the normal never meets the
    cut locus), ``theta(r, idx)`` is the Jacobian density and ``lap(r, idx)`` is
    the Laplacian of the distance along the normal.
    """

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    cut: np.ndarray
    theta: object
    lap: object
    flat: bool


@dataclass(frozen=True)
class CutLocusDescriptor:
    """Cut locus of a catalog domain plus its normal-coordinate patches."""

    kind: str  # "point", "sphere", "plane", "segments", "empty"
    data: dict
    domain: object

    def patches(self, box=None, angular_nodes=2048, lateral_nodes=512):
        return self.domain._normal_patches(box, angular_nodes, lateral_nodes)


# ----------------------------------------------------------------------------
# domain catalog


class Domain:
    """Common interface of the catalog domains."""

    variant = None
    dim = None

    # kernels implemented per variant ------------------------------------
    def _contains(self, x):
        raise NotImplementedError

    def _dist(self, x):
        raise NotImplementedError

    def _grad(self, x):
        raise NotImplementedError

    def _skeleton_gap(self, x):
        """Difference of the two smallest boundary distances (0 on skeleton)."""
        raise NotImplementedError

    def _skeleton_dist(self, x):
        """Euclidean distance to the skeleton, used for refinement and tubes."""
        raise NotImplementedError

    def _lap(self, x):
        raise NotImplementedError

    def _ray(self, x, nu):
        raise NotImplementedError

    def _chords(self, base, nu):
        """Segment parameters (L, K, 2) of lines base + t nu, NaN padded."""
        raise NotImplementedError

    def _near(self, x):
        raise NotImplementedError

    def _normal_patches(self, box, angular_nodes, lateral_nodes):
        raise NoCutLocusDescriptor(f"{self.variant} has no cut locus descriptor")

    # scalar catalog data ------------------------------------------------
    def inradius(self):
        raise NotImplementedError

    def essential_diameter(self):
        raise NotImplementedError

    def diameter(self):
        raise NotImplementedError

    def bbox(self):
        """Axis-aligned bounding box (lo, hi), or None for unbounded domains."""
        return None

    def search_box(self):
        """Region searched for the supremum of the mean distance."""
        return self.bbox()

    def cut_locus(self):
        raise NoCutLocusDescriptor(f"{self.variant} has no cut locus descriptor")

    def dilate(self, s):
        raise NotImplementedError

    @property
    def scale(self):
        """Characteristic length used for relative tolerances."""
        d = self.diameter()
        return d if math.isfinite(d) else 2.0 * self.inradius()

    @property
    def bounded(self):
        return self.bbox() is not None

    def to_dict(self):
        out = {"variant": self.variant}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.tolist() if isinstance(v, np.ndarray) else v
        return out

    @property
    def label(self):
        parts = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, np.ndarray):
                v = "(" + ",".join(f"{c:g}" for c in v.ravel()) + ")"
            elif isinstance(v, float):
                v = f"{v:g}"
            parts.append(str(v))
        return f"{self.variant}[{';'.join(parts)}]"


def _as_array(v):
    return np.array(v, dtype=float).ravel()


@dataclass(frozen=True, eq=False)
class Interval(Domain):
    a: float
    b: float
    variant = "interval"

    def __post_init__(self):
        if not (float(self.a) < float(self.b)):
            raise ValueError("interval requires a < b")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self):
        return 1

    @property
    def mid(self):
        return 0.5 * (self.a + self.b)

    def _contains(self, x):
        t = x[..., 0]
        return (t > self.a) & (t < self.b)

    def _dist(self, x):
        t = x[..., 0]
        return np.minimum(t - self.a, self.b - t)

    def _grad(self, x):
        return np.where(x[..., :1] < self.mid, 1.0, -1.0)

    def _skeleton_gap(self, x):
        return np.abs(2.0 * x[..., 0] - self.a - self.b)

    def _skeleton_dist(self, x):
        return np.abs(x[..., 0] - self.mid)

    def _lap(self, x):
        return np.zeros(x.shape[:-1])

    def _ray(self, x, nu):
        t = x[..., 0]
        s = np.broadcast_to(nu, x.shape)[..., 0]
        return np.where(s > 0, (self.b - t) / np.where(s > 0, s, 1.0),
                        (t - self.a) / np.where(s < 0, -s, 1.0))

    def _chords(self, base, nu):
        s = float(np.ravel(nu)[0])
        lo, hi = (self.a, self.b) if s > 0 else (-self.b, -self.a)
        out = np.empty(base.shape[:-1] + (1, 2))
        out[..., 0, 0] = lo - s * base[..., 0] if s > 0 else lo + base[..., 0]
        out[..., 0, 1] = hi - s * base[..., 0] if s > 0 else hi + base[..., 0]
        return out

    def _near(self, x):
        t = float(x[0])
        da, db = t - self.a, self.b - t
        tol = SKELETON_RTOL * self.scale
        pts = []
        if da <= db + tol:
            pts.append([self.a])
        if db <= da + tol:
            pts.append([self.b])
        return NearSet(np.array(pts))

    def _normal_patches(self, box, angular_nodes, lateral_nodes):
        c = np.full(1, 0.5 * (self.b - self.a))
        one = lambda r, idx: np.ones_like(r)
        zero = lambda r, idx: np.zeros_like(r)
        return [
            NormalPatch(np.array([[self.a]]), np.array([[1.0]]), np.ones(1), c, one, zero, True),
            NormalPatch(np.array([[self.b]]), np.array([[-1.0]]), np.ones(1), c, one, zero, True),
        ]

    def inradius(self):
        return 0.5 * (self.b - self.a)

    def essential_diameter(self):
        return self.b - self.a

    def diameter(self):
        return self.b - self.a

    def bbox(self):
        return np.array([self.a]), np.array([self.b])

    def cut_locus(self):
        return CutLocusDescriptor("point", {"point": np.array([self.mid])}, self)

    def dilate(self, s):
        return Interval(s * self.a, s * self.b)


class _RoundDomain(Domain):
    """Shared code for the variants built from concentric spheres."""

    def _y(self, x):
        return x - self.center

    def _r(self, x):
        return np.linalg.norm(x - self.center, axis=-1)

    def _radial(self, x):
        y = self._y(x)
        r = np.linalg.norm(y, axis=-1)
        safe = np.where(r > 0, r, 1.0)[..., None]
        e = y / safe
        # at the center any unit vector will do; pick the first axis
        e = np.where((r > 0)[..., None], e, np.eye(self.dim)[0])
        return e, r

    def _sphere_patch(self, radius, inward_sign, cut, angular_nodes):
        """Sphere of the given radius, normals pointing into the domain."""
        n = self.dim
        sq = sphere_quadrature(n, angular_nodes)
        area = radius ** (n - 1) * 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)
        pts = self.center + radius * sq.nodes
        normals = inward_sign * sq.nodes
        k = inward_sign / radius  # principal curvature, convex side negative
        theta = lambda r, idx: (1.0 + k * r) ** (n - 1)
        lap = lambda r, idx: (n - 1) * k / (1.0 + k * r)
        return NormalPatch(pts, normals, area * sq.weights, np.full(len(pts), cut), theta, lap, False)


@dataclass(frozen=True, eq=False)
class Ball(_RoundDomain):
    center: np.ndarray
    radius: float
    variant = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _as_array(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.center.size < 2:
            raise ValueError("ball requires dim >= 2; use Interval in 1D")

    @property
    def dim(self):
        return self.center.size

    def _contains(self, x):
        return self._r(x) < self.radius

    def _dist(self, x):
        return self.radius - self._r(x)

    def _grad(self, x):
        e, _ = self._radial(x)
        return -e

    def _skeleton_gap(self, x):
        return 2.0 * self._r(x)

    def _skeleton_dist(self, x):
        return self._r(x)

    def _lap(self, x):
        return -(self.dim - 1) / self._r(x)

    def _ray(self, x, nu):
        nu = np.broadcast_to(nu, x.shape)
        _, hi, _ = _sphere_roots(self._y(x), nu, self.radius)
        return hi

    def _chords(self, base, nu):
        nu = np.broadcast_to(nu, base.shape)
        lo, hi, disc = _sphere_roots(self._y(base), nu, self.radius)
        ok = disc > 0
        out = np.stack([np.where(ok, lo, np.nan), np.where(ok, hi, np.nan)], axis=-1)
        return out[..., None, :]

    def _near(self, x):
        e, r = self._radial(x[None])
        if r[0] <= SKELETON_RTOL * self.scale:
            return NearSet(np.empty((0, self.dim)), (self.center.copy(), self.radius))
        return NearSet(self.center + self.radius * e)

    def _normal_patches(self, box, angular_nodes, lateral_nodes):
        return [self._sphere_patch(self.radius, -1.0, self.radius, angular_nodes)]

    def inradius(self):
        return self.radius

    def essential_diameter(self):
        return 2.0 * self.radius

    def diameter(self):
        return 2.0 * self.radius

    def bbox(self):
        return self.center - self.radius, self.center + self.radius

    def cut_locus(self):
        return CutLocusDescriptor("point", {"point": self.center.copy()}, self)

    def dilate(self, s):
        return Ball(s * self.center, s * self.radius)


@dataclass(frozen=True, eq=False)
class Annulus(_RoundDomain):
    center: np.ndarray
    r_in: float
    r_out: float
    variant = "annulus"

    def __post_init__(self):
        object.__setattr__(self, "center", _as_array(self.center))
        object.__setattr__(self, "r_in", float(self.r_in))
        object.__setattr__(self, "r_out", float(self.r_out))
        if not (0 < self.r_in < self.r_out):
            raise ValueError("annulus requires 0 < r_in < r_out")
        if self.center.size < 2:
            raise ValueError("annulus requires dim >= 2")

    @property
    def dim(self):
        return self.center.size

    @property
    def mid(self):
        return 0.5 * (self.r_in + self.r_out)

    def _contains(self, x):
        r = self._r(x)
        return (r > self.r_in) & (r < self.r_out)

    def _dist(self, x):
        r = self._r(x)
        return np.minimum(r - self.r_in, self.r_out - r)

    def _grad(self, x):
        e, r = self._radial(x)
        return np.where((r < self.mid)[..., None], e, -e)

    def _skeleton_gap(self, x):
        return np.abs(2.0 * self._r(x) - self.r_in - self.r_out)

    def _skeleton_dist(self, x):
        return np.abs(self._r(x) - self.mid)

    def _lap(self, x):
        r = self._r(x)
        return np.where(r < self.mid, 1.0, -1.0) * (self.dim - 1) / r

    def _ray(self, x, nu):
        nu = np.broadcast_to(nu, x.shape)
        y = self._y(x)
        lo_in, _, disc_in = _sphere_roots(y, nu, self.r_in)
        _, hi_out, _ = _sphere_roots(y, nu, self.r_out)
        hits_inner = (disc_in >= 0) & (lo_in > 0)
        return np.where(hits_inner, lo_in, hi_out)

    def _chords(self, base, nu):
        nu = np.broadcast_to(nu, base.shape)
        y = self._y(base)
        lo_o, hi_o, disc_o = _sphere_roots(y, nu, self.r_out)
        lo_i, hi_i, disc_i = _sphere_roots(y, nu, self.r_in)
        outer = disc_o > 0
        split = outer & (disc_i > 0)
        nan = np.full_like(lo_o, np.nan)
        first = np.stack([np.where(split, lo_o, np.where(outer, lo_o, nan)),
                          np.where(split, lo_i, np.where(outer, hi_o, nan))], axis=-1)
        second = np.stack([np.where(split, hi_i, nan), np.where(split, hi_o, nan)], axis=-1)
        return np.stack([first, second], axis=-2)

    def _near(self, x):
        e, r = self._radial(x[None])
        tol = SKELETON_RTOL * self.scale
        pts = []
        if r[0] - self.r_in <= self.r_out - r[0] + tol:
            pts.append(self.center + self.r_in * e[0])
        if self.r_out - r[0] <= r[0] - self.r_in + tol:
            pts.append(self.center + self.r_out * e[0])
        return NearSet(np.array(pts))

    def _normal_patches(self, box, angular_nodes, lateral_nodes):
        c = 0.5 * (self.r_out - self.r_in)
        return [
            self._sphere_patch(self.r_in, 1.0, c, angular_nodes),
            self._sphere_patch(self.r_out, -1.0, c, angular_nodes),
        ]

    def inradius(self):
        return 0.5 * (self.r_out - self.r_in)

    def essential_diameter(self):
        # chords tangent to the inner sphere are the longest segments
        return 2.0 * math.sqrt(self.r_out**2 - self.r_in**2)

    def diameter(self):
        return 2.0 * self.r_out

    def bbox(self):
        return self.center - self.r_out, self.center + self.r_out

    def cut_locus(self):
        return CutLocusDescriptor("sphere", {"center": self.center.copy(), "radius": self.mid}, self)

    def dilate(self, s):
        return Annulus(s * self.center, s * self.r_in, s * self.r_out)


@dataclass(frozen=True, eq=False)
class Strip(Domain):
    """Slab {x : |x . n| < half_width} through the origin."""

    normal: np.ndarray
    half_width: float
    variant = "strip"

    def __post_init__(self):
        object.__setattr__(self, "normal", _unit(_as_array(self.normal)))
        object.__setattr__(self, "half_width", float(self.half_width))
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.normal.size < 2:
            raise ValueError("strip requires dim >= 2; use Interval in 1D")

    @property
    def dim(self):
        return self.normal.size

    def _s(self, x):
        return x @ self.normal

    def _contains(self, x):
        return np.abs(self._s(x)) < self.half_width

    def _dist(self, x):
        return self.half_width - np.abs(self._s(x))

    def _grad(self, x):
        s = self._s(x)
        return -np.where(s >= 0, 1.0, -1.0)[..., None] * self.normal

    def _skeleton_gap(self, x):
        return 2.0 * np.abs(self._s(x))

    def _skeleton_dist(self, x):
        return np.abs(self._s(x))

    def _lap(self, x):
        return np.zeros(x.shape[:-1])

    def _ray(self, x, nu):
        a = np.broadcast_to(nu, x.shape) @ self.normal
        s = self._s(x)
        w = self.half_width
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(a > 0, (w - s) / a, np.where(a < 0, (-w - s) / a, np.inf))
        return t

    def _chords(self, base, nu):
        a = float(np.dot(np.ravel(nu), self.normal))
        s = self._s(base)
        w = self.half_width
        if a != 0.0:
            t1, t2 = (-w - s) / a, (w - s) / a
            lo, hi = np.minimum(t1, t2), np.maximum(t1, t2)
        else:
            inside = np.abs(s) < w
            lo = np.where(inside, -np.inf, np.nan)
            hi = np.where(inside, np.inf, np.nan)
        return np.stack([lo, hi], axis=-1)[..., None, :]

    def _near(self, x):
        s = float(self._s(x[None])[0])
        w = self.half_width
        tol = SKELETON_RTOL * self.scale
        proj = x - s * self.normal
        pts = []
        if w - s <= w + s + tol:
            pts.append(proj + w * self.normal)
        if w + s <= w - s + tol:
            pts.append(proj - w * self.normal)
        return NearSet(np.array(pts))

    def _lateral_grid(self, box, nodes):
        """Midpoint grid on the projection of the box onto the mid-plane."""
        basis = orthonormal_complement(self.normal)
        lo, hi = box
        corners = np.array(list(itertools.product(*zip(lo, hi))))
        coords = corners @ basis.T
        axes = []
        for k in range(basis.shape[0]):
            a, b = coords[:, k].min(), coords[:, k].max()
            h = (b - a) / nodes
            axes.append((a + h * (np.arange(nodes) + 0.5), h))
        mesh = np.meshgrid(*[ax for ax, _ in axes], indexing="ij")
        pts = sum(m.reshape(-1, 1) * basis[k] for k, m in enumerate(mesh))
        return pts, math.prod(h for _, h in axes)

    def _normal_patches(self, box, angular_nodes, lateral_nodes):
        if box is None:
            raise ValueError("strip patches need a bounding box of the integrand support")
        q, dA = self._lateral_grid(box, lateral_nodes)
        w = self.half_width
        one = lambda r, idx: np.ones_like(r)
        zero = lambda r, idx: np.zeros_like(r)
        wts = np.full(len(q), dA)
        cut = np.full(len(q), w)
        n = self.normal
        return [
            NormalPatch(q + w * n, np.broadcast_to(-n, q.shape), wts, cut, one, zero, True),
            NormalPatch(q - w * n, np.broadcast_to(n, q.shape), wts, cut, one, zero, True),
        ]

    def inradius(self):
        return self.half_width

    def essential_diameter(self):
        return math.inf

    def diameter(self):
        return math.inf

    def search_box(self):
        # translation invariant along the plane: any lateral window will do
        w = self.half_width
        return -w * np.ones(self.dim), w * np.ones(self.dim)

    def cut_locus(self):
        return CutLocusDescriptor("plane", {"normal": self.normal.copy(), "offset": 0.0}, self)

    def dilate(self, s):
        return Strip(self.normal, s * self.half_width)


class _ConvexPolytope(Domain):
    """Intersection of half-spaces {n_j . x > c_j} with unit inward normals."""

    def _slacks(self, x):
        return x @ self.normals.T - self.offsets

    def _contains(self, x):
        return np.all(self._slacks(x) > 0, axis=-1)

    def _dist(self, x):
        return self._slacks(x).min(axis=-1)

    def _grad(self, x):
        return self.normals[np.argmin(self._slacks(x), axis=-1)]

    def _skeleton_gap(self, x):
        s = np.sort(self._slacks(x), axis=-1)
        return s[..., 1] - s[..., 0]

    def _skeleton_dist(self, x):
        s = self._slacks(x)
        i = np.argmin(s, axis=-1)
        si = np.take_along_axis(s, i[..., None], axis=-1)
        ni = self.normals[i]
        diff = np.linalg.norm(self.normals[None, :, :] - ni.reshape(-1, 1, self.dim), axis=-1)
        diff = diff.reshape(s.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            dist = np.where(diff > 0, (s - si) / diff, np.inf)
        return dist.min(axis=-1)

    def _lap(self, x):
        return np.zeros(x.shape[:-1])

    def _ray(self, x, nu):
        s = self._slacks(x)
        rate = np.broadcast_to(nu, x.shape) @ self.normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(rate < 0, s / -rate, np.inf)
        return t.min(axis=-1)

    def _chords(self, base, nu):
        s = self._slacks(base)
        rate = np.ravel(nu) @ self.normals.T
        lo = np.full(s.shape[:-1], -np.inf)
        hi = np.full(s.shape[:-1], np.inf)
        empty = np.zeros(s.shape[:-1], dtype=bool)
        for j, a in enumerate(rate):
            if a > 0:
                lo = np.maximum(lo, -s[..., j] / a)
            elif a < 0:
                hi = np.minimum(hi, s[..., j] / -a)
            else:
                empty |= s[..., j] <= 0
        empty |= lo >= hi
        out = np.stack([np.where(empty, np.nan, lo), np.where(empty, np.nan, hi)], axis=-1)
        return out[..., None, :]

    def _near(self, x):
        s = self._slacks(x[None])[0]
        tol = SKELETON_RTOL * self.scale
        idx = np.nonzero(s <= s.min() + tol)[0]
        return NearSet(x - s[idx, None] * self.normals[idx])

    def _edge_patches(self, edges, nodes_per_panel=8, panels=64):
        """Flat patches for 2D polygons: edges (start, end, inward normal)."""
        patches = []
        one = lambda r, idx: np.ones_like(r)
        zero = lambda r, idx: np.zeros_like(r)
        for i, (p0, p1, ni) in enumerate(edges):
            length = np.linalg.norm(p1 - p0)
            tangent = (p1 - p0) / length
            # c(s) is the minimum of affine functions of arclength; split at
            # their crossings so each panel integrates a smooth integrand
            lines = []
            for j, (q0, q1, nj) in enumerate(edges):
                denom = 1.0 - float(ni @ nj)
                if j == i or denom <= 1e-14:
                    continue
                c0 = float(nj @ (p0 - q0)) / denom
                slope = float(nj @ tangent) / denom
                lines.append((c0, slope))
            breaks = {0.0, length}
            for (c0, k0), (c1, k1) in itertools.combinations(lines, 2):
                if k0 != k1:
                    s_star = (c1 - c0) / (k0 - k1)
                    if 0.0 < s_star < length:
                        breaks.add(s_star)
            breaks = sorted(breaks)
            s_nodes, s_wts = [], []
            for s0, s1 in zip(breaks[:-1], breaks[1:]):
                t, w = composite_gauss(s0, s1, panels, nodes_per_panel)
                s_nodes.append(t)
                s_wts.append(w)
            s = np.concatenate(s_nodes)
            w = np.concatenate(s_wts)
            cut = np.min([c0 + k * s for c0, k in lines], axis=0)
            pts = p0 + s[:, None] * tangent
            patches.append(NormalPatch(pts, np.broadcast_to(ni, pts.shape), w, cut, one, zero, True))
        return patches

    def essential_diameter(self):
        return self.diameter()

    def bbox(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def inradius(self):
        # Chebyshev center: maximize t subject to n_j . x - c_j >= t
        n = self.dim
        A = np.hstack([-self.normals, np.ones((len(self.normals), 1))])
        res = linprog(np.r_[np.zeros(n), -1.0], A_ub=A, b_ub=-self.offsets,
                      bounds=[(None, None)] * (n + 1), method="highs")
        return float(res.x[-1])


@dataclass(frozen=True, eq=False)
class Rectangle(_ConvexPolytope):
    """Axis-aligned box prod_i (lower_i, upper_i)."""

    lower: np.ndarray
    upper: np.ndarray
    variant = "rectangle"

    def __post_init__(self):
        object.__setattr__(self, "lower", _as_array(self.lower))
        object.__setattr__(self, "upper", _as_array(self.upper))
        if self.lower.shape != self.upper.shape or self.lower.size < 2:
            raise ValueError("rectangle requires matching bounds with dim >= 2")
        if np.any(self.lower >= self.upper):
            raise ValueError("rectangle requires lower < upper")

    @property
    def dim(self):
        return self.lower.size

    @property
    def normals(self):
        eye = np.eye(self.dim)
        return np.vstack([eye, -eye])

    @property
    def offsets(self):
        return np.concatenate([self.lower, -self.upper])

    @property
    def vertices(self):
        return np.array(list(itertools.product(*zip(self.lower, self.upper))))

    def _normal_patches(self, box, angular_nodes, lateral_nodes):
        if self.dim != 2:
            raise NoCutLocusDescriptor("rectangle patches implemented in 2D only")
        (a1, a2), (b1, b2) = self.lower, self.upper
        v = [np.array(p) for p in [(a1, a2), (b1, a2), (b1, b2), (a1, b2)]]
        return self._edge_patches(_ccw_edges(v))

    def inradius(self):
        return 0.5 * float(np.min(self.upper - self.lower))

    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def bbox(self):
        return self.lower.copy(), self.upper.copy()

    def cut_locus(self):
        return CutLocusDescriptor("segments", {"medial_axis": True}, self)

    def dilate(self, s):
        return Rectangle(s * self.lower, s * self.upper)


def _ccw_edges(verts):
    edges = []
    for k in range(len(verts)):
        p0, p1 = verts[k], verts[(k + 1) % len(verts)]
        t = (p1 - p0) / np.linalg.norm(p1 - p0)
        edges.append((p0, p1, np.array([-t[1], t[0]])))
    return edges


@dataclass(frozen=True, eq=False)
class Polygon2D(_ConvexPolytope):
    """Convex polygon with counterclockwise vertices."""

    vertices: np.ndarray
    variant = "polygon"

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("polygon needs at least three 2D vertices")
        object.__setattr__(self, "vertices", v)
        e = np.roll(v, -1, axis=0) - v
        e_next = np.roll(e, -1, axis=0)
        cross = e[:, 0] * e_next[:, 1] - e[:, 1] * e_next[:, 0]
        if np.any(np.linalg.norm(e, axis=1) == 0) or np.any(cross <= 0):
            raise ValueError("polygon must be convex, simple and counterclockwise")
        edges = _ccw_edges(list(v))
        object.__setattr__(self, "_normals", np.array([n for _, _, n in edges]))
        object.__setattr__(self, "_offsets", np.array([n @ p0 for p0, _, n in edges]))

    @property
    def dim(self):
        return 2

    @property
    def normals(self):
        return self._normals

    @property
    def offsets(self):
        return self._offsets

    def to_dict(self):
        return {"variant": self.variant, "vertices": self.vertices.tolist()}

    @property
    def label(self):
        return "polygon[" + ";".join(f"({x:g},{y:g})" for x, y in self.vertices) + "]"

    def _normal_patches(self, box, angular_nodes, lateral_nodes):
        return self._edge_patches(_ccw_edges(list(self.vertices)))

    def diameter(self):
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None] - v[None], axis=-1)))

    def cut_locus(self):
        return CutLocusDescriptor("segments", {"medial_axis": True}, self)

    def dilate(self, s):
        return Polygon2D(s * self.vertices)


@dataclass(frozen=True, eq=False)
class PuncturedBall(_RoundDomain):
    """Ball with its center removed; the puncture belongs to the boundary."""

    center: np.ndarray
    radius: float
    variant = "punctured_ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _as_array(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.center.size < 2:
            raise ValueError("punctured ball requires dim >= 2")

    @property
    def dim(self):
        return self.center.size

    def _contains(self, x):
        r = self._r(x)
        return (r > 0) & (r < self.radius)

    def _dist(self, x):
        r = self._r(x)
        return np.minimum(r, self.radius - r)

    def _grad(self, x):
        e, r = self._radial(x)
        return np.where((r < 0.5 * self.radius)[..., None], e, -e)

    def _skeleton_gap(self, x):
        return np.abs(2.0 * self._r(x) - self.radius)

    def _skeleton_dist(self, x):
        return np.abs(self._r(x) - 0.5 * self.radius)

    def _lap(self, x):
        r = self._r(x)
        return np.where(r < 0.5 * self.radius, 1.0, -1.0) * (self.dim - 1) / r

    def _through_center(self, y, nu):
        b = np.einsum("...i,...i->...", y, nu)
        perp = np.linalg.norm(y - b[..., None] * nu, axis=-1)
        return perp <= 1e-14 * self.radius, b

    def _ray(self, x, nu):
        nu = np.broadcast_to(nu, x.shape)
        y = self._y(x)
        _, hi, _ = _sphere_roots(y, nu, self.radius)
        hit, b = self._through_center(y, nu)
        return np.where(hit & (b < 0), -b, hi)

    def _chords(self, base, nu):
        nu = np.broadcast_to(nu, base.shape)
        y = self._y(base)
        lo, hi, disc = _sphere_roots(y, nu, self.radius)
        ok = disc > 0
        hit, b = self._through_center(y, nu)
        split = ok & hit
        nan = np.full_like(lo, np.nan)
        first = np.stack([np.where(ok, lo, nan), np.where(split, -b, np.where(ok, hi, nan))], axis=-1)
        second = np.stack([np.where(split, -b, nan), np.where(split, hi, nan)], axis=-1)
        return np.stack([first, second], axis=-2)

    def _near(self, x):
        e, r = self._radial(x[None])
        tol = SKELETON_RTOL * self.scale
        pts = []
        if r[0] <= self.radius - r[0] + tol:
            pts.append(self.center.copy())
        if self.radius - r[0] <= r[0] + tol:
            pts.append(self.center + self.radius * e[0])
        return NearSet(np.array(pts))

    def inradius(self):
        # The catalog reports r for the punctured ball, the value quoted for
        # this example; the supremum of the distance function is r/2.
        return self.radius

    def sup_distance(self):
        return 0.5 * self.radius

    def essential_diameter(self):
        return 2.0 * self.radius

    def diameter(self):
        return 2.0 * self.radius

    def bbox(self):
        return self.center - self.radius, self.center + self.radius

    def dilate(self, s):
        return PuncturedBall(s * self.center, s * self.radius)


@dataclass(frozen=True, eq=False)
class ExteriorOfBall(_RoundDomain):
    center: np.ndarray
    radius: float
    variant = "exterior_ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _as_array(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.center.size < 2:
            raise ValueError("exterior of a ball requires dim >= 2")

    @property
    def dim(self):
        return self.center.size

    def _contains(self, x):
        return self._r(x) > self.radius

    def _dist(self, x):
        return self._r(x) - self.radius

    def _grad(self, x):
        e, _ = self._radial(x)
        return e

    def _skeleton_gap(self, x):
        return np.full(x.shape[:-1], np.inf)

    def _skeleton_dist(self, x):
        return np.full(x.shape[:-1], np.inf)

    def _lap(self, x):
        return (self.dim - 1) / self._r(x)

    def _ray(self, x, nu):
        nu = np.broadcast_to(nu, x.shape)
        lo, _, disc = _sphere_roots(self._y(x), nu, self.radius)
        return np.where((disc >= 0) & (lo > 0), lo, np.inf)

    def _chords(self, base, nu):
        nu = np.broadcast_to(nu, base.shape)
        lo, hi, disc = _sphere_roots(self._y(base), nu, self.radius)
        ok = disc > 0
        inf = np.full_like(lo, np.inf)
        nan = np.full_like(lo, np.nan)
        first = np.stack([-inf, np.where(ok, lo, inf)], axis=-1)
        second = np.stack([np.where(ok, hi, nan), np.where(ok, inf, nan)], axis=-1)
        return np.stack([first, second], axis=-2)

    def _near(self, x):
        e, _ = self._radial(x[None])
        return NearSet(self.center + self.radius * e)

    def _normal_patches(self, box, angular_nodes, lateral_nodes):
        return [self._sphere_patch(self.radius, 1.0, math.inf, angular_nodes)]

    def inradius(self):
        return math.inf

    def essential_diameter(self):
        return math.inf

    def diameter(self):
        return math.inf

    @property
    def scale(self):
        return 2.0 * self.radius

    def search_box(self):
        return None

    def cut_locus(self):
        return CutLocusDescriptor("empty", {}, self)

    def dilate(self, s):
        return ExteriorOfBall(s * self.center, s * self.radius)


# ----------------------------------------------------------------------------
# checked public interface


def _points(domain, x):
    """Return (array of shape (P, N), single) for a point or a batch."""
    x = np.asarray(x, dtype=float)
    n = domain.dim
    if x.ndim == 0:
        if n != 1:
            raise ValueError(f"scalar point given for a {n}-dimensional domain")
        return x.reshape(1, 1), True
    if x.ndim == 1:
        if x.size == n:
            return x.reshape(1, n), True
        if n == 1:
            return x.reshape(-1, 1), False
    if x.shape[-1] != n:
        raise ValueError(f"points must have trailing dimension {n}")
    return x.reshape(-1, n), False


def _check_inside(domain, pts):
    inside = domain._contains(pts)
    if not np.all(inside):
        bad = pts[np.argmin(inside)]
        raise PointOutsideDomain(f"point {bad.tolist()} is not in {domain.label}")


def _skeleton_tol(domain):
    return SKELETON_RTOL * domain.scale


def _out(values, single):
    return values[0] if single else values


def distance(domain, x):
    """Distance from x to the boundary of the domain."""
    pts, single = _points(domain, x)
    _check_inside(domain, pts)
    return _out(domain._dist(pts), single)


def grad_distance(domain, x):
    """Gradient of the distance function, a unit vector off the skeleton."""
    pts, single = _points(domain, x)
    _check_inside(domain, pts)
    gap = domain._skeleton_gap(pts)
    if np.any(gap < _skeleton_tol(domain)):
        raise OnSkeleton("distance is not differentiable on the skeleton")
    return _out(domain._grad(pts), single)


def near_points(domain, x):
    """Set of boundary points nearest to the single point x."""
    pts, single = _points(domain, x)
    if not single:
        raise ValueError("near_points expects a single point")
    _check_inside(domain, pts)
    return domain._near(pts[0])


def directional_distance(domain, x, nu):
    """Distance from x to the boundary along the ray x + t nu, t > 0."""
    pts, single = _points(domain, x)
    _check_inside(domain, pts)
    nu = np.asarray(nu, dtype=float)
    if np.ndim(nu) == 0:
        nu = nu.reshape(1)
    if not np.allclose(np.linalg.norm(nu, axis=-1), 1.0, atol=1e-12):
        raise ValueError("direction must be a unit vector")
    return _out(domain._ray(pts, nu), single)


def line_distance(domain, x, nu):
    """Two-sided distance min(rho_nu, rho_-nu) along the line through x."""
    nu = np.asarray(nu, dtype=float)
    return np.minimum(directional_distance(domain, x, nu), directional_distance(domain, x, -nu))


def laplacian_distance_good(domain, x):
    """Laplacian of the distance at good points, from boundary curvatures."""
    pts, single = _points(domain, x)
    _check_inside(domain, pts)
    if np.any(domain._skeleton_gap(pts) < _skeleton_tol(domain)):
        raise OnCutLocus("point lies on the cut locus")
    if isinstance(domain, PuncturedBall) and np.any(domain._r(pts) < 0.5 * domain.radius):
        raise NonSmoothBoundaryPoint("near point is the puncture, which is not a C2 hypersurface")
    if isinstance(domain, _ConvexPolytope):
        for p in pts:
            near = domain._near(p).points
            for q in near:
                if np.min(np.linalg.norm(domain.vertices - q, axis=1)) < _skeleton_tol(domain):
                    raise NonSmoothBoundaryPoint("near point is a vertex")
    return _out(domain._lap(pts), single)


def inradius(domain):
    return domain.inradius()


def essential_diameter(domain):
    return domain.essential_diameter()


def diameter(domain):
    return domain.diameter()


def cut_locus(domain):
    return domain.cut_locus()


def segments_along_line(domain, base, nu):
    """Components of the line {base + t nu} inside the domain."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if not math.isclose(float(np.linalg.norm(nu)), 1.0, abs_tol=1e-12):
        raise ValueError("direction must be a unit vector")
    base = np.atleast_1d(np.asarray(base, dtype=float))
    chords = domain._chords(base[None], nu)[0]
    keep = ~np.isnan(chords[:, 0])
    iv = chords[keep]
    iv = iv[np.argsort(iv[:, 0])]
    mids = np.full((len(iv), domain.dim), np.nan)
    bounded = np.isfinite(iv).all(axis=1)
    mids[bounded] = base + 0.5 * (iv[bounded, 0] + iv[bounded, 1])[:, None] * nu
    return LineSegmentFamily(nu, base, iv, mids)


def lateral_grid(domain, nu, box, cells):
    """Midpoint grid in nu-perp covering the projection of the box.

    Returns base points of shape (L, N) and the cell measure.
    """
    basis = orthonormal_complement(nu)
    if basis.shape[0] == 0:
        return np.zeros((1, domain.dim)), 1.0
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    coords = corners @ basis.T
    axes, cell = [], 1.0
    for k in range(basis.shape[0]):
        a, b = coords[:, k].min(), coords[:, k].max()
        h = (b - a) / cells
        axes.append(a + h * (np.arange(cells) + 0.5))
        cell *= h
    mesh = np.meshgrid(*axes, indexing="ij")
    base = sum(m.reshape(-1, 1) * basis[k] for k, m in enumerate(mesh))
    return base, cell


def nu_skeleton(domain, nu, box=None, cells=256):
    """Segment midpoints over a lateral grid: a sample of the nu-skeleton."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if box is None:
        box = domain.bbox() if domain.bounded else domain.search_box()
    base, _ = lateral_grid(domain, nu, box, cells)
    chords = domain._chords(base, nu)
    with np.errstate(invalid="ignore"):
        # unbounded components have no midpoint
        mid = 0.5 * (chords[..., 0] + chords[..., 1])
    ok = np.isfinite(mid)
    pts = base[:, None, :] + mid[..., None] * nu
    return pts[ok]


def weakly_mean_convex(domain, samples=2000, seed=0):
    """Sampled check that the Laplacian of d is nonpositive on the good set.

    Bounded domains are sampled in their bounding box, the exterior of a ball
    within four radii of the center.
    """
    box = domain.bbox() if domain.bounded else domain.search_box()
    if box is None:
        c = np.asarray(domain.center, dtype=float)
        box = (c - 4.0 * domain.radius, c + 4.0 * domain.radius)
    lo, hi = box
    rng = np.random.default_rng(seed)
    x = rng.uniform(lo, hi, size=(samples, domain.dim))
    x = x[domain._contains(x)]
    x = x[domain._skeleton_gap(x) > 1e-6 * domain.scale]
    return bool(np.all(domain._lap(x) <= 0.0))


# ----------------------------------------------------------------------------
# JSON construction

_VARIANTS = {
    "interval": (Interval, {"a", "b"}, set()),
    "ball": (Ball, {"center", "radius"}, {"dim"}),
    "annulus": (Annulus, {"center", "r_in", "r_out"}, {"dim"}),
    "strip": (Strip, {"normal", "half_width"}, {"dim"}),
    "rectangle": (Rectangle, {"lower", "upper"}, {"dim"}),
    "punctured_ball": (PuncturedBall, {"center", "radius"}, {"dim"}),
    "exterior_ball": (ExteriorOfBall, {"center", "radius"}, {"dim"}),
    "polygon": (Polygon2D, {"vertices"}, set()),
}


def domain_from_dict(obj):
    """Build a catalog domain from its JSON object; unknown fields rejected."""
    if not isinstance(obj, dict):
        raise SchemaError("domain must be a JSON object")
    variant = obj.get("variant")
    if variant not in _VARIANTS:
        raise SchemaError(f"unknown domain variant {variant!r}")
    cls, required, optional = _VARIANTS[variant]
    keys = set(obj) - {"variant"}
    unknown = keys - required - optional
    if unknown:
        raise SchemaError(f"unknown field(s) for {variant}: {sorted(unknown)}")
    missing = required - keys
    if missing:
        raise SchemaError(f"missing field(s) for {variant}: {sorted(missing)}")
    try:
        dom = cls(**{k: obj[k] for k in required})
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid {variant}: {exc}") from exc
    if "dim" in obj and obj["dim"] != dom.dim:
        raise SchemaError(f"dim {obj['dim']} inconsistent with {variant} data")
    return dom


def domain_to_dict(domain):
    out = domain.to_dict()
    if "dim" in _VARIANTS[domain.variant][2]:
        out["dim"] = domain.dim
    return out
