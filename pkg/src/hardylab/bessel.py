"""p-Bessel pairs, the remainder function C_p, J0 and Lamb's constant.

A pair (V, W) on (0, R) is a p-Bessel pair when the equation

    (V |phi'|^{p-2} phi')' + W |phi|^{p-2} phi = 0

has a positive solution phi on (0, R). The catalog below covers the power
pair, the Lamb pair built from J0 and the logarithmic pair for 1 < p < 2.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .errors import (
    DegenerateExponent,
    ExponentOutOfRange,
    LambdaOutOfRange,
    OutOfInterval,
)


def spow(z, q):
    """Signed power |z|^{q-1} z for scalars, elementwise; 0 at z = 0."""
    z = np.asarray(z, dtype=float)
    a = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a > 0, np.sign(z) * a ** (q - 1.0), 0.0)


# ----------------------------------------------------------------------------
# C_p


def _norm(v):
    return np.sqrt(np.sum(v * v, axis=-1))


def _cp_first(x, y, p):
    z = x - y
    nz = _norm(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        zp2 = np.where(nz > 0, nz ** (p - 2.0), 0.0)
    return _norm(x) ** p - nz**p - p * zp2 * np.sum(z * y, axis=-1)


def _cp_second(x, y, p):
    z = x - y
    nz = _norm(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        zp2 = np.where(nz > 0, nz ** (p - 2.0), 0.0)
    return _norm(x) ** p + (p - 1.0) * nz**p - p * zp2 * np.sum(z * x, axis=-1)


def _vec(v):
    v = np.asarray(v, dtype=float)
    return v[..., None] if v.ndim == 0 else v


def cp(x, y, p, form=None):
    """Remainder C_p(x, y) = |x|^p - |x-y|^p - p|x-y|^{p-2}(x-y).y.

    Vectors live on the last axis; scalars are treated as 1-vectors. The
    second algebraic form |x|^p + (p-1)|x-y|^p - p|x-y|^{p-2}(x-y).x is used
    when ``form=2``, and automatically for p < 2 where x - y is tiny relative
    to |x| + |y|.
    """
    if p <= 1:
        raise ExponentOutOfRange(f"C_p needs p > 1, got {p}")
    x, y = np.broadcast_arrays(_vec(x), _vec(y))
    if form == 1:
        return _cp_first(x, y, p)
    if form == 2:
        return _cp_second(x, y, p)
    if p >= 2:
        return _cp_first(x, y, p)
    close = _norm(x - y) < 1e-8 * (_norm(x) + _norm(y))
    return np.where(close, _cp_second(x, y, p), _cp_first(x, y, p))


def cp_from_difference(x, z, p):
    """C_p(x, x - z) written in terms of z = x - y.

    This is the form the identities need: z = u (phi'/phi)(d) grad d is
    available directly, and computing y = x - z first would lose digits.
    Equal to |x|^p - |z|^p - p|z|^{p-2} z.(x - z).
    """
    x, z = np.broadcast_arrays(_vec(x), _vec(z))
    nz = _norm(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        zp2 = np.where(nz > 0, nz ** (p - 2.0), 0.0)
    return _norm(x) ** p + (p - 1.0) * nz**p - p * zp2 * np.sum(z * x, axis=-1)


# ----------------------------------------------------------------------------
# J0 and Lamb's constant

_JMAX = 60


def _j0_scalar(r):
    q = (0.5 * r) ** 2
    term, total, dterm = 1.0, 1.0, 0.0
    for j in range(1, _JMAX):
        term = -term * q / (j * j)
        total += term
        if r > 0:
            dterm += term * 2.0 * j / r
        if abs(term) < 1e-16 * max(1.0, abs(total)):
            break
    return total, dterm


def _j0_terms(r):
    if np.ndim(r) == 0:
        return _j0_scalar(float(r))
    r = np.asarray(r, dtype=float)
    q = (0.5 * r) ** 2
    term = np.ones_like(r)
    total = np.ones_like(r)
    dterm = np.zeros_like(r)
    for j in range(1, _JMAX):
        term = -term * q / (j * j)
        total = total + term
        # d/dr of (r/2)^{2j} = j (r/2)^{2j-1}
        dterm = dterm + np.where(r > 0, term * 2.0 * j / np.where(r > 0, r, 1.0), 0.0)
        if np.all(np.abs(term) < 1e-16 * np.maximum(1.0, np.abs(total))):
            break
    return total, dterm


def j0(r):
    """Bessel J0 from its power series, accurate for 0 <= r <= 10."""
    total, _ = _j0_terms(r)
    return total if np.ndim(total) else float(total)


def j0_prime(r):
    """Derivative of J0 by term-wise differentiation of the series."""
    _, d = _j0_terms(r)
    return d if np.ndim(d) else float(d)


def _bisect(f, lo, hi, iters=200):
    flo = f(lo)
    if flo * f(hi) >= 0:
        raise ValueError("bracket does not contain a sign change")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=None)
def j0_first_zero():
    """First positive zero z0 of J0."""
    return _bisect(j0, 2.0, 3.0)


@lru_cache(maxsize=None)
def lamb_constant(lam=0.0):
    """First positive root of ((1+lam)/2) J0(r) + r J0'(r).

    For lam = 0 this is Lamb's equation J0(r) + 2 r J0'(r) = 0, whose root is
    close to 0.940. The expression equals r^{-(1+lam)/2} times the derivative
    of r^{(1+lam)/2} J0(r), so the root is where that function stops growing.
    """
    if lam <= -1:
        raise LambdaOutOfRange("the Lamb constant needs lam > -1")
    f = lambda r: 0.5 * (1.0 + lam) * j0(r) + r * j0_prime(r)
    if lam == 0.0:
        return _bisect(f, 0.5, 1.5)
    return _bisect(f, 1e-12, j0_first_zero())


# ----------------------------------------------------------------------------
# pairs


@dataclass(frozen=True)
class BesselPair:
    """A p-Bessel pair on (0, R) with its positive solution phi.

    V, W, phi and dphi are vectorized callables of r > 0. ``R`` is the right
    end of the interval on which phi stays positive (``inf`` when unbounded).
    """

    family: str
    p: float
    R: float
    V: object
    W: object
    phi: object
    dphi: object
    phi_increasing: bool
    phi_prime_constant_sign: bool
    params: dict = field(default_factory=dict)

    def log_derivative(self, r):
        """phi'/phi at r."""
        return self.dphi(r) / self.phi(r)

    def g(self, r):
        """Boundary weight V |phi'/phi|^{p-2} (phi'/phi) at r."""
        return self.V(r) * spow(self.log_derivative(r), self.p)

    @property
    def label(self):
        parts = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family}({parts})"


def power_pair(p, lam):
    """Pair (r^-lam, |(p+lam-1)/p|^p r^{-lam-p}) with phi = r^{(p+lam-1)/p}."""
    if p <= 1:
        raise ExponentOutOfRange(f"p must exceed 1, got {p}")
    k = (p + lam - 1.0) / p
    if k == 0.0:
        raise DegenerateExponent("p + lambda - 1 = 0 gives a constant phi")
    c = abs(k) ** p
    return BesselPair(
        family="power",
        p=float(p),
        R=math.inf,
        V=lambda r: np.asarray(r, dtype=float) ** (-lam),
        W=lambda r: c * np.asarray(r, dtype=float) ** (-lam - p),
        phi=lambda r: np.asarray(r, dtype=float) ** k,
        dphi=lambda r: k * np.asarray(r, dtype=float) ** (k - 1.0),
        phi_increasing=k > 0,
        phi_prime_constant_sign=True,
        params={"p": float(p), "lambda": float(lam)},
    )


def lamb_pair(lam, Lambda=None, R=1.0):
    """Pair (r^-lam, ((lam+1)/2)^2 r^{-lam-2} + (Lambda/R)^2 r^-lam).

    The solution is phi = r^{(lam+1)/2} J0(Lambda r / R), positive up to
    z0 R / Lambda, which is the interval endpoint stored on the pair. With
    Lambda equal to the Lamb constant for lam, phi'(R) = 0.
    """
    if Lambda is None:
        Lambda = lamb_constant(float(lam))
    z0 = j0_first_zero()
    if not (0 < Lambda <= z0 * (1 + 1e-15)):
        raise LambdaOutOfRange(f"Lambda must lie in (0, z0], got {Lambda}")
    if R <= 0:
        raise ValueError("R must be positive")
    a = 0.5 * (lam + 1.0)
    b = Lambda / R
    end = z0 * R / Lambda

    def phi(r):
        r = np.asarray(r, dtype=float)
        return r**a * j0(b * r)

    def dphi(r):
        r = np.asarray(r, dtype=float)
        return a * r ** (a - 1.0) * j0(b * r) + b * r**a * j0_prime(b * r)

    # monotonicity by sampling, including the end of the stated interval
    rs = np.linspace(1e-6, 1.0, 2001) * R
    increasing = bool(np.all(dphi(rs) >= -1e-14 * np.abs(phi(rs)) / rs))
    return BesselPair(
        family="lamb",
        p=2.0,
        R=end,
        V=lambda r: np.asarray(r, dtype=float) ** (-lam),
        W=lambda r: a * a * np.asarray(r, dtype=float) ** (-lam - 2.0)
        + b * b * np.asarray(r, dtype=float) ** (-lam),
        phi=phi,
        dphi=dphi,
        phi_increasing=increasing,
        phi_prime_constant_sign=True,
        params={"lambda": float(lam), "Lambda": float(Lambda), "R": float(R)},
    )


def log_pair(p, R):
    """Pair (r, c r^{1-p} L^{-p} + C r^{1-p} L^{1-p}) with L = log(R/r).

    c = (p-1)^2 / p^p and C = (2-p) / p^{p-1}; the solution phi = L^{1/p}
    decreases to 0 at r = R. Defined for 1 < p < 2 only.
    """
    if not (1 < p < 2):
        raise ExponentOutOfRange(f"the logarithmic pair needs 1 < p < 2, got {p}")
    if R <= 0:
        raise ValueError("R must be positive")
    c = (p - 1.0) ** 2 / p**p
    C = (2.0 - p) / p ** (p - 1.0)

    def L(r):
        return np.log(R / np.asarray(r, dtype=float))

    return BesselPair(
        family="log",
        p=float(p),
        R=float(R),
        V=lambda r: np.asarray(r, dtype=float) * 1.0,
        W=lambda r: np.asarray(r, dtype=float) ** (1.0 - p) * (c * L(r) ** (-p) + C * L(r) ** (1.0 - p)),
        phi=lambda r: L(r) ** (1.0 / p),
        dphi=lambda r: -(1.0 / p) * L(r) ** (1.0 / p - 1.0) / np.asarray(r, dtype=float),
        phi_increasing=False,
        phi_prime_constant_sign=True,
        params={"p": float(p), "R": float(R)},
    )


def ode_residual(pair, r, eps=1e-2, relative=False):
    """Residual of the pair equation at r by central differences.

    The flux V |phi'|^{p-2} phi' is differentiated with step
    1e-5 min(r, R - r). With ``relative=True`` the residual is divided by
    max(|W phi^{p-1}|, 1e-30).
    """
    r = float(r)
    R = pair.R
    upper = (1.0 - eps) * R if math.isfinite(R) else math.inf
    if not (r > 0 and (not math.isfinite(R) or eps * R < r < upper)):
        raise OutOfInterval(f"r = {r} outside the admissible part of (0, {R})")
    h = 1e-5 * (min(r, R - r) if math.isfinite(R) else r)
    p = pair.p

    def flux(s):
        return float(pair.V(s) * spow(pair.dphi(s), p))

    dflux = (flux(r + h) - flux(r - h)) / (2.0 * h)
    source = float(pair.W(r) * spow(pair.phi(r), p))
    res = dflux + source
    if relative:
        return res / max(abs(source), 1e-30)
    return res


def pair_from_dict(obj, default_R=None):
    """Build a catalog pair from {"family", "p", "lambda", "Lambda", "R"}."""
    from .errors import SchemaError

    if not isinstance(obj, dict):
        raise SchemaError("pair must be a JSON object")
    allowed = {
        "power": ({"p", "lambda"}, set()),
        "lamb": (set(), {"lambda", "Lambda", "R", "p"}),
        "log": ({"p"}, {"R"}),
    }
    fam = obj.get("family")
    if fam not in allowed:
        raise SchemaError(f"unknown pair family {fam!r}")
    required, optional = allowed[fam]
    keys = set(obj) - {"family"}
    if keys - required - optional:
        raise SchemaError(f"unknown field(s) for {fam} pair: {sorted(keys - required - optional)}")
    if required - keys:
        raise SchemaError(f"missing field(s) for {fam} pair: {sorted(required - keys)}")
    for k in keys:
        if not isinstance(obj[k], (int, float)) or isinstance(obj[k], bool):
            raise SchemaError(f"pair field {k} must be a number")
    if fam == "power":
        return power_pair(float(obj["p"]), float(obj["lambda"]))
    if fam == "lamb":
        if "p" in obj and float(obj["p"]) != 2.0:
            raise SchemaError("the Lamb pair has p = 2")
        R = obj.get("R", default_R)
        if R is None:
            raise SchemaError("lamb pair needs R")
        return lamb_pair(float(obj.get("lambda", 0.0)), obj.get("Lambda"), float(R))
    R = obj.get("R", default_R)
    if R is None:
        raise SchemaError("log pair needs R")
    return log_pair(float(obj["p"]), float(R))
