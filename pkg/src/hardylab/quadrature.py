"""Quadrature building blocks: Gauss-Legendre panels, sphere nodes, volume grids."""

from dataclasses import dataclass
import math

import numpy as np


def composite_gauss(a, b, panels, nodes):
    """Composite Gauss-Legendre rule on [a, b].

    ``a`` and ``b`` may be arrays of the same shape; the result then has that
    shape plus a trailing axis of length ``panels * nodes``. Empty or inverted
    intervals get zero weights.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    length = np.where(b > a, b - a, 0.0)
    h = length / panels
    k = np.arange(panels)
    # panel midpoints then nodes inside each panel, flattened in order
    centers = a[..., None] + h[..., None] * (k + 0.5)
    t = centers[..., :, None] + 0.5 * h[..., None, None] * x
    wt = np.broadcast_to(0.5 * h[..., None, None] * w, t.shape)
    shape = a.shape + (panels * nodes,)
    return t.reshape(shape), wt.reshape(shape)


@dataclass(frozen=True)
class SphereQuadrature:
    """Nodes on the unit sphere with weights summing to one."""

    dim: int
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)

    def half(self):
        """One node of each antipodal pair, weights doubled.

        Valid for integrands that are even under nu -> -nu.
        """
        n = len(self) // 2
        return SphereQuadrature(self.dim, self.nodes[:n], 2.0 * self.weights[:n])


def sphere_quadrature(dim, nodes=None):
    """Deterministic antipodally symmetric rule for the normalized sphere measure.

    N = 1 uses the two points +-1. N = 2 uses ``nodes`` equispaced angles
    (default 256) offset by half a step. N = 3 uses a Fibonacci lattice of
    ``nodes // 2`` points together with their antipodes (default 1024 total).
    In every case the first half of the nodes are the antipodes of the second.
    """
    if dim == 1:
        return SphereQuadrature(1, np.array([[1.0], [-1.0]]), np.array([0.5, 0.5]))
    if dim == 2:
        m = 256 if nodes is None else int(nodes)
        if m < 2 or m % 2:
            raise ValueError("the circle rule needs an even number of nodes")
        k = np.arange(m // 2)
        theta = 2.0 * math.pi * (k + 0.5) / m
        half = np.column_stack([np.cos(theta), np.sin(theta)])
        pts = np.vstack([half, -half])
        return SphereQuadrature(2, pts, np.full(m, 1.0 / m))
    if dim == 3:
        m = 1024 if nodes is None else int(nodes)
        if m < 2 or m % 2:
            raise ValueError("the Fibonacci rule needs an even number of nodes")
        n = m // 2
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        i = np.arange(n)
        # upper hemisphere lattice; the antipodes fill the lower one
        z = 1.0 - (i + 0.5) / n
        r = np.sqrt(1.0 - z * z)
        phi = 2.0 * math.pi * i / golden
        half = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        pts = np.vstack([half, -half])
        return SphereQuadrature(3, pts, np.full(m, 1.0 / m))
    raise ValueError(f"no sphere rule for dimension {dim}")


def midpoint_grid(lo, hi, cells):
    """Cell centers (P, N) and the common cell volume of a tensor midpoint rule."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    h = (hi - lo) / cells
    axes = [lo[i] + h[i] * (np.arange(cells) + 0.5) for i in range(lo.size)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    return pts, float(np.prod(h)), h


def _expand_cells(centers, size, vol, cell_nodes):
    """Replace each cell center by a tensor Gauss-Legendre rule inside the cell."""
    n = centers.shape[1]
    x, w = np.polynomial.legendre.leggauss(cell_nodes)
    grid = np.array(np.meshgrid(*[x] * n, indexing="ij")).reshape(n, -1).T
    wt = np.prod(np.array(np.meshgrid(*[w] * n, indexing="ij")).reshape(n, -1), axis=0) / 2**n
    pts = (centers[:, None, :] + 0.5 * grid[None] * size).reshape(-1, n)
    return pts, np.tile(vol * wt, len(centers))


def _triangle_rule(p0, p1, p2, n):
    """Collapsed Gauss rule with n^2 nodes on each triangle; inputs (T, 2)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    u, v = (m.ravel() for m in np.meshgrid(x, x, indexing="ij"))
    wu = np.outer(w, w).ravel() * u
    e1, e2 = p1 - p0, p2 - p1
    area2 = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    pts = p0[:, None] + u[None, :, None] * e1[:, None] + (u * v)[None, :, None] * e2[:, None]
    return pts.reshape(-1, 2), (area2[:, None] * wu[None]).ravel()


def _clip_square(corners, phi):
    """Vertices of {phi < 0} inside each square, padded to 8 by repeating the last.

    ``corners`` is (C, 4, 2) in cyclic order and ``phi`` the (C, 4) values of
    an affine function at the corners.
    """
    c = len(corners)
    verts = np.zeros((c, 8, 2))
    valid = np.zeros((c, 8), dtype=bool)
    for k in range(4):
        a, b = corners[:, k], corners[:, (k + 1) % 4]
        fa, fb = phi[:, k], phi[:, (k + 1) % 4]
        verts[:, 2 * k] = a
        valid[:, 2 * k] = fa < 0
        with np.errstate(invalid="ignore", divide="ignore"):
            t = fa / (fa - fb)
        verts[:, 2 * k + 1] = a + np.where(np.isfinite(t), t, 0.0)[:, None] * (b - a)
        valid[:, 2 * k + 1] = (fa < 0) != (fb < 0)
    # stable compaction of the valid vertices, keeping the cyclic order
    order = np.argsort(~valid, axis=1, kind="stable")
    verts = np.take_along_axis(verts, order[..., None], axis=1)
    count = valid.sum(axis=1)
    last = np.take_along_axis(verts, np.maximum(count - 1, 0)[:, None, None].repeat(2, axis=2), axis=1)
    pad = np.arange(8)[None] >= count[:, None]
    verts = np.where(pad[..., None], last, verts)
    return verts, count


def _polygon_rule(verts, n):
    """Fan triangulation of convex polygons padded as in _clip_square."""
    pts, wts = [], []
    for i in range(1, 7):
        p, w = _triangle_rule(verts[:, 0], verts[:, i], verts[:, i + 1], n)
        pts.append(p.reshape(len(verts), -1, 2))
        wts.append(w.reshape(len(verts), -1))
    return np.concatenate(pts, axis=1).reshape(-1, 2), np.concatenate(wts, axis=1).ravel()


def cut_cell_rule(centers, size, dist, grad, n=3, spread=0.1):
    """Split planar cells along a jump of grad d.

    ``grad`` is sampled on a 3x3 grid including the corners. When the samples
    form two tight clusters (within ``spread`` radians), the two sides are
    modelled by the affine extensions d_i(x) = d(x_i) + g_i . (x - x_i) of one
    sample from each cluster; the cell is cut along d_1 = d_2 and each side
    gets a collapsed Gauss rule. Returns the mask of cut cells with their
    nodes and weights.
    """
    off = np.array([(a, b) for a in (-0.5, 0.0, 0.5) for b in (-0.5, 0.0, 0.5)])
    samp = centers[:, None, :] + off[None] * size
    g = grad(samp.reshape(-1, 2)).reshape(len(centers), 9, 2)
    tight = math.cos(spread)
    ref_a = g[:, 0]
    in_a = np.einsum("cki,ci->ck", g, ref_a) > tight
    ib = np.argmax(~in_a, axis=1)
    ref_b = g[np.arange(len(g)), ib]
    in_b = np.einsum("cki,ci->ck", g, ref_b) > tight
    cut = (~in_a).any(axis=1) & np.all(in_a | in_b, axis=1) & ~np.any(in_a & in_b, axis=1)
    if not np.any(cut):
        return cut, np.zeros((0, 2)), np.zeros(0)
    idx = np.flatnonzero(cut)
    xa, xb = samp[idx, 0], samp[idx, ib[idx]]
    ga, gb = ref_a[idx], ref_b[idx]
    da, db = dist(xa), dist(xb)
    corners = centers[idx, None, :] + np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]) * size

    def phi(x):
        # d_a - d_b; the side where d_a is smaller has grad d = g_a
        return (da[:, None] + np.einsum("cki,ci->ck", x - xa[:, None], ga)
                - db[:, None] - np.einsum("cki,ci->ck", x - xb[:, None], gb))

    f = phi(corners)
    pts, wts = [], []
    for sign in (1.0, -1.0):
        verts, _ = _clip_square(corners, sign * f)
        p, w = _polygon_rule(verts, n)
        pts.append(p)
        wts.append(w)
    return cut, np.concatenate(pts), np.concatenate(wts)


def refined_volume_rule(lo, hi, cells, skeleton_dist=None, depth=0, tube=0.0, keep=None, cell_nodes=1,
                        cut=None):
    """Cell-based rule on a box with local quadtree refinement near a skeleton.

    Cells whose center lies within half a cell diagonal of the skeleton are
    split into 2^N children, ``depth`` times. ``keep`` is an optional mask
    function; cells with keep(center, pad) false are dropped early, which is
    how cells outside the integrand's support are skipped. Each surviving cell
    carries a ``cell_nodes``^N tensor Gauss rule (1 is the midpoint rule).
    In the plane, ``cut = (dist, grad)`` splits the finest near cells along a
    jump of grad d (see `cut_cell_rule`). Nodes within ``tube`` of the
    skeleton get weight zero.

    Returns points (P, N), weights (P,) and the base spacing (N,).
    """
    pts, vol, h = midpoint_grid(lo, hi, cells)
    n = pts.shape[1]
    offsets = np.array(np.meshgrid(*[[-0.25, 0.25]] * n, indexing="ij")).reshape(n, -1).T
    out_p, out_w = [], []
    size = h.copy()
    near = np.zeros(len(pts), dtype=bool)
    for level in range(depth + 1):
        if keep is not None:
            # keep cells that may touch the support: test the center, padded
            mask = keep(pts, 0.5 * float(np.linalg.norm(size)))
            pts = pts[mask]
        if skeleton_dist is None:
            break
        near = skeleton_dist(pts) < 0.5 * float(np.linalg.norm(size)) * (1.0 + 1e-9)
        if level == depth:
            break
        p, w = _expand_cells(pts[~near], size, vol, cell_nodes)
        out_p.append(p)
        out_w.append(w)
        pts = (pts[near][:, None, :] + offsets[None] * size).reshape(-1, n)
        size = 0.5 * size
        vol = vol / 2**n
    if cut is not None and n == 2 and np.any(near):
        is_cut, p, w = cut_cell_rule(pts[near], size, *cut, n=max(cell_nodes, 3))
        out_p.append(p)
        out_w.append(w)
        drop = np.flatnonzero(near)[is_cut]
        pts = np.delete(pts, drop, axis=0)
    p, w = _expand_cells(pts, size, vol, cell_nodes)
    out_p.append(p)
    out_w.append(w)
    pts, w = np.concatenate(out_p), np.concatenate(out_w)
    if skeleton_dist is not None and tube > 0.0:
        w = np.where(skeleton_dist(pts) < tube, 0.0, w)
    return pts, w, h
