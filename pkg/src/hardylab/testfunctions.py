"""Smooth compactly supported test functions with exact gradients."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import PointOutsideDomain, SchemaError
from .geometry import _sphere_roots
from .quadrature import sphere_quadrature


def eta(s):
    """Bump profile exp(1 - 1/(1 - s^2)) on |s| < 1, zero outside; eta(0) = 1."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    t = np.where(inside, 1.0 - s * s, 1.0)
    return np.where(inside, np.exp(1.0 - 1.0 / t), 0.0)


def eta_prime_over_s(s):
    """eta'(s) / s = -2 eta(s) / (1 - s^2)^2, smooth at s = 0."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    t = np.where(inside, 1.0 - s * s, 1.0)
    return np.where(inside, -2.0 * eta(s) / (t * t), 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Bump test function u with its gradient.

    family:
      ``radial-bump``   A eta(|x - c| / rho)
      ``tensor-bump``   A prod_i eta((x_i - c_i) / rho_i)
      ``shifted-bump``  A eta(|x - c| / rho) (1 + tilt . (x - c) / rho)
    """

    __test__ = False  # not a pytest class

    family: str
    center: np.ndarray
    radii: np.ndarray
    amplitude: float = 1.0
    tilt: np.ndarray = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        r = np.atleast_1d(np.asarray(self.radii, dtype=float))
        if self.family not in ("radial-bump", "tensor-bump", "shifted-bump"):
            raise ValueError(f"unknown test function family {self.family!r}")
        if self.family != "tensor-bump" and r.size != 1:
            raise ValueError("radial bumps take a single radius")
        if self.family == "tensor-bump" and r.size == 1:
            r = np.full(c.size, r[0])
        if r.size not in (1, c.size) or np.any(r <= 0):
            raise ValueError("radii must be positive and match the dimension")
        tilt = np.zeros(c.size) if self.tilt is None else np.atleast_1d(np.asarray(self.tilt, dtype=float))
        if tilt.size != c.size:
            raise ValueError("tilt must match the dimension")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "tilt", tilt)
        object.__setattr__(self, "amplitude", float(self.amplitude))

    @property
    def dim(self):
        return self.center.size

    @property
    def rho(self):
        return float(self.radii[0])

    def value(self, x):
        y = np.asarray(x, dtype=float) - self.center
        if self.family == "tensor-bump":
            return self.amplitude * np.prod(eta(y / self.radii), axis=-1)
        s = np.linalg.norm(y, axis=-1) / self.rho
        u = self.amplitude * eta(s)
        if self.family == "shifted-bump":
            u = u * (1.0 + y @ self.tilt / self.rho)
        return u

    def gradient(self, x):
        y = np.asarray(x, dtype=float) - self.center
        if self.family == "tensor-bump":
            s = y / self.radii
            e = eta(s)
            de = eta_prime_over_s(s) * s / self.radii
            out = np.empty_like(y)
            for i in range(self.dim):
                others = np.prod(np.delete(e, i, axis=-1), axis=-1)
                out[..., i] = others * de[..., i]
            return self.amplitude * out
        s = np.linalg.norm(y, axis=-1) / self.rho
        g = self.amplitude * eta_prime_over_s(s)[..., None] * y / self.rho**2
        if self.family == "shifted-bump":
            mod = 1.0 + y @ self.tilt / self.rho
            g = g * mod[..., None] + self.amplitude * eta(s)[..., None] * self.tilt / self.rho
        return g

    def __call__(self, x):
        return self.value(x)

    # support ----------------------------------------------------------------
    def support_box(self):
        r = self.radii if self.family == "tensor-bump" else np.full(self.dim, self.rho)
        return self.center - r, self.center + r

    def in_support(self, x, pad=0.0):
        y = np.asarray(x, dtype=float) - self.center
        if self.family == "tensor-bump":
            return np.all(np.abs(y) < self.radii + pad, axis=-1)
        return np.linalg.norm(y, axis=-1) < self.rho + pad

    def line_support(self, base, nu):
        """Parameter interval (L, 2) where base + t nu meets the support."""
        base = np.asarray(base, dtype=float)
        nu = np.asarray(nu, dtype=float)
        if self.family == "tensor-bump":
            lo_b, hi_b = self.support_box()
            lo = np.full(base.shape[:-1], -np.inf)
            hi = np.full(base.shape[:-1], np.inf)
            empty = np.zeros(base.shape[:-1], dtype=bool)
            for i, a in enumerate(nu):
                if a != 0:
                    with np.errstate(over="ignore"):
                        t1 = (lo_b[i] - base[..., i]) / a
                        t2 = (hi_b[i] - base[..., i]) / a
                    lo = np.maximum(lo, np.minimum(t1, t2))
                    hi = np.minimum(hi, np.maximum(t1, t2))
                else:
                    empty |= (base[..., i] <= lo_b[i]) | (base[..., i] >= hi_b[i])
            empty |= lo >= hi
            return np.stack([np.where(empty, np.nan, lo), np.where(empty, np.nan, hi)], axis=-1)
        y = base - self.center
        lo, hi, disc = _sphere_roots(y, np.broadcast_to(nu, y.shape), self.rho)
        ok = disc > 0
        return np.stack([np.where(ok, lo, np.nan), np.where(ok, hi, np.nan)], axis=-1)

    def check_inside(self, domain, margin=None):
        """Raise PointOutsideDomain unless the support sits inside the domain.

        The support boundary and a grid over the support are sampled; every
        sample must lie in the domain at distance at least ``margin`` (default
        1e-3 times the inradius, or the domain scale when that is infinite).
        """
        if self.dim != domain.dim:
            raise ValueError("test function and domain dimensions differ")
        if margin is None:
            d0 = domain.inradius()
            margin = 1e-3 * (d0 if math.isfinite(d0) else domain.scale)
        lo, hi = self.support_box()
        if self.family == "tensor-bump":
            m = 65 if self.dim <= 2 else 17
            axes = [np.linspace(lo[i], hi[i], m) for i in range(self.dim)]
            pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
        else:
            sq = sphere_quadrature(self.dim, 2048 if self.dim == 2 else (2048 if self.dim == 3 else None))
            rim = self.center + self.rho * sq.nodes
            m = 33 if self.dim <= 2 else 13
            axes = [np.linspace(lo[i], hi[i], m) for i in range(self.dim)]
            grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
            pts = np.vstack([rim, self.center, grid[self.in_support(grid)]])
        inside = domain._contains(pts)
        if not np.all(inside) or np.any(domain._dist(pts) < margin):
            raise PointOutsideDomain("test function support is not compactly inside the domain")

    def to_dict(self):
        out = {"family": self.family, "center": self.center.tolist(), "amplitude": self.amplitude}
        if self.family == "tensor-bump":
            out["radii"] = self.radii.tolist()
        else:
            out["radius"] = self.rho
        if self.family == "shifted-bump":
            out["tilt"] = self.tilt.tolist()
        return out

    @property
    def label(self):
        c = ",".join(f"{v:g}" for v in self.center)
        return f"{self.family}@({c})"


def radial_bump(center, radius, amplitude=1.0):
    return TestFunction("radial-bump", center, radius, amplitude)


def tensor_bump(center, radii, amplitude=1.0):
    return TestFunction("tensor-bump", center, radii, amplitude)


def shifted_bump(center, radius, tilt, amplitude=1.0):
    return TestFunction("shifted-bump", center, radius, amplitude, tilt)


def test_function_from_dict(obj):
    if not isinstance(obj, dict):
        raise SchemaError("test_function must be a JSON object")
    fam = obj.get("family")
    spec = {
        "radial-bump": ({"center", "radius"}, {"amplitude"}),
        "tensor-bump": ({"center", "radii"}, {"amplitude"}),
        "shifted-bump": ({"center", "radius", "tilt"}, {"amplitude"}),
    }
    if fam not in spec:
        raise SchemaError(f"unknown test function family {fam!r}")
    required, optional = spec[fam]
    keys = set(obj) - {"family"}
    if keys - required - optional:
        raise SchemaError(f"unknown field(s) for {fam}: {sorted(keys - required - optional)}")
    if required - keys:
        raise SchemaError(f"missing field(s) for {fam}: {sorted(required - keys)}")
    try:
        radii = obj["radii"] if fam == "tensor-bump" else obj["radius"]
        return TestFunction(fam, obj["center"], radii, obj.get("amplitude", 1.0), obj.get("tilt"))
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"invalid test function: {exc}") from exc
