"""Brownian excursions, loops, hulls, frontiers, and non-disconnection.

The half-plane excursion pairs a Brownian x-coordinate with the norm of
an independent 3-component Brownian motion (so positivity is exact in
law, not enforced by an SDE scheme).  Loops are Brownian bridges.  Hulls
are computed on uniform grids: polylines are rasterized with supercover
subdivision (8-connected chains), the complement is flood filled from
the outside with 4-connectivity, and the hull is everything the outside
flood cannot reach; the duality of the two connectivities means a chain
can never be leaked through diagonally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ._jit import maybe_njit
from .conformal import SlitMap
from .estimates import EstimateWithError, binomial_estimate
from .sle import PlanarCurve


# ---------------------------------------------------------------------------
# Excursions and loops
# ---------------------------------------------------------------------------


def excursion(T: float, N: int, rng: np.random.Generator) -> PlanarCurve:
    """Half-plane Brownian excursion from 0 on a uniform grid of N steps."""
    if N < 1 or T <= 0:
        raise ValueError("need N >= 1 and T > 0")
    dt = T / N
    x = np.concatenate(([0.0], np.cumsum(rng.normal(0.0, math.sqrt(dt), N))))
    w3 = rng.normal(0.0, math.sqrt(dt), (3, N)).cumsum(axis=1)
    y = np.concatenate(([0.0], np.sqrt((w3 ** 2).sum(axis=0))))
    times = dt * np.arange(N + 1)
    return PlanarCurve(x + 1j * y, times, "half-plane")


def rooted_loop(t_dur: float, N: int, rng: np.random.Generator) -> PlanarCurve:
    """Closed planar Brownian bridge of duration t_dur (start = end exactly)."""
    if N < 2 or t_dur <= 0:
        raise ValueError("need N >= 2 and t_dur > 0")
    dt = t_dur / N
    times = dt * np.arange(N + 1)
    frac = times / t_dur
    pts = np.empty(N + 1, dtype=complex)
    for part in (0, 1):
        w = np.concatenate(([0.0], np.cumsum(rng.normal(0.0, math.sqrt(dt), N))))
        bridge = w - frac * w[-1]
        bridge[-1] = 0.0
        if part == 0:
            pts.real = bridge
        else:
            pts.imag = bridge
    return PlanarCurve(pts, times, "plane")


def loop_duration_sampler(t_min: float, t_max: float, rng: np.random.Generator, size: int = 1):
    """Durations with density 1/t on [t_min, t_max] plus unrooted weights 1/T."""
    if not 0 < t_min < t_max:
        raise ValueError("need 0 < t_min < t_max")
    u = rng.uniform(math.log(t_min), math.log(t_max), size)
    durations = np.exp(u)
    return durations, 1.0 / durations


# ---------------------------------------------------------------------------
# Excursion avoidance of half-plane obstacles (restriction checks)
# ---------------------------------------------------------------------------


@maybe_njit()
def _excursion_avoid_kernel(seed, n_runs, x0, h, disk_x, disk_rho, r_far, dt_min, results):
    """Adaptive-step excursion runs versus a slit and/or a boundary half disk.

    Hitting the slit means crossing the line x = x0 at height <= h, so the
    straddle test with linear height interpolation is the exact event up to
    step resolution (the step shrinks to distance/6 near the obstacle);
    escape beyond r_far counts as avoidance.  For boundary-attached
    obstacles path avoidance coincides with hull avoidance: a filled pocket
    cannot cover any part of the obstacle without a path crossing it.
    disk_rho <= 0 disables the half-disk obstacle, h <= 0 the slit.
    """
    np.random.seed(seed)
    for run in range(n_runs):
        x = 0.0
        y = 0.0
        b1 = 0.0
        b2 = 0.0
        b3 = 0.0
        hit = 0
        while True:
            r2 = x * x + y * y
            if r2 > r_far * r_far:
                break
            # distance to the obstacle cluster controls the step
            dx_s = x - x0
            d_slit = math.sqrt(dx_s * dx_s + (y - min(max(y, 0.0), h)) ** 2) if h > 0 else 1e30
            if disk_rho > 0.0:
                dd = math.sqrt((x - disk_x) ** 2 + y * y) - disk_rho
                if dd < d_slit:
                    d_slit = dd
            step = d_slit / 6.0
            dt = step * step
            if dt < dt_min:
                dt = dt_min
            s = math.sqrt(dt)
            nx = x + s * np.random.normal()
            b1 += s * np.random.normal()
            b2 += s * np.random.normal()
            b3 += s * np.random.normal()
            ny = math.sqrt(b1 * b1 + b2 * b2 + b3 * b3)
            if h > 0:
                crossed = (x - x0) * (nx - x0) < 0.0
                if crossed:
                    denom = abs(nx - x) if abs(nx - x) > 1e-300 else 1e-300
                    t = abs(x - x0) / denom
                    ycross = y + t * (ny - y)
                    if ycross <= h:
                        hit = 1
                        break
            if disk_rho > 0.0:
                if (nx - disk_x) ** 2 + ny * ny <= disk_rho * disk_rho:
                    hit = 1
                    break
            x = nx
            y = ny
        results[run] = hit
    return results


def excursion_avoidance(
    obstacle: SlitMap,
    n_runs: int,
    rng: np.random.Generator,
    n_excursions: int = 1,
    r_far: float | None = None,
    dt_min: float = 1.6e-5,
) -> EstimateWithError:
    """P(n_excursions independent excursions all avoid the obstacle).

    One excursion estimates the base restriction probability (exponent 1);
    joint runs give the filled-union families of higher integer exponent.
    """
    if r_far is None:
        r_far = max(10.0, 8.0 * obstacle.extent())
    if obstacle.kind == "vertical-slit":
        x0, h, dx, dr = obstacle.param1, obstacle.param2, 0.0, 0.0
    else:
        x0, h, dx, dr = 0.0, 0.0, obstacle.param1, obstacle.param2
    results = np.zeros(n_runs * n_excursions, dtype=np.int64)
    seed = int(rng.integers(2 ** 62))
    _excursion_avoid_kernel(
        seed, n_runs * n_excursions, x0, h, dx, dr, r_far, dt_min, results
    )
    joint = results.reshape(n_runs, n_excursions)
    avoided = int((joint.sum(axis=1) == 0).sum())
    return binomial_estimate(
        avoided,
        n_runs,
        window=f"dt_min={dt_min:g}, r_far={r_far:g}, k={n_excursions}",
        single=float(1.0 - results.mean()),
    )


# ---------------------------------------------------------------------------
# Grid regions: rasterization, hull filling, frontier
# ---------------------------------------------------------------------------


@dataclass
class GridRegion:
    """Occupied cells of a uniform grid with world-coordinate anchoring."""

    resolution: float
    origin: complex
    mask: np.ndarray
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.ndim != 2 or not self.mask.any():
            raise ValueError("region mask must be 2-d and nonempty")

    @property
    def cell_count(self) -> int:
        return int(self.mask.sum())

    @property
    def area(self) -> float:
        return self.cell_count * self.resolution ** 2

    def cell_centers(self) -> np.ndarray:
        ii, jj = np.nonzero(self.mask)
        return (
            self.origin
            + (jj + 0.5) * self.resolution
            + 1j * (ii + 0.5) * self.resolution
        )


@maybe_njit()
def _mark_polyline(re, im, x0, y0, res, mask):
    """Supercover rasterization: segments subdivided to half-cell spacing.

    Segments whose endpoint cells are already 8-adjacent mark only the
    endpoints: the chain stays 8-connected (no 4-connected leak through
    it) and no corner-adjacent cells are spuriously added, which keeps
    refilling a traced boundary an exact fixed point.
    """
    rows, cols = mask.shape
    inv = 1.0 / res
    px = re[0]
    py = im[0]
    pj = int((px - x0) * inv)
    pi = int((py - y0) * inv)
    if 0 <= pi < rows and 0 <= pj < cols:
        mask[pi, pj] = True
    for k in range(1, len(re)):
        qx = re[k]
        qy = im[k]
        qj = int((qx - x0) * inv)
        qi = int((qy - y0) * inv)
        if abs(qi - pi) > 1 or abs(qj - pj) > 1:
            seg = math.hypot(qx - px, qy - py)
            nsub = int(seg * inv * 2.0) + 1
            for s in range(1, nsub):
                t = s / nsub
                xx = px + t * (qx - px)
                yy = py + t * (qy - py)
                j = int((xx - x0) * inv)
                i = int((yy - y0) * inv)
                if 0 <= i < rows and 0 <= j < cols:
                    mask[i, j] = True
        if 0 <= qi < rows and 0 <= qj < cols:
            mask[qi, qj] = True
        px = qx
        py = qy
        pi = qi
        pj = qj
    return mask


_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def hull_fill(curves, resolution: float) -> GridRegion:
    """Rasterize curves and fill the holes: complement of the outside flood.

    The returned region is the union of the rasterized curves and every
    cell the 4-connected outside flood cannot reach.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if isinstance(curves, PlanarCurve):
        curves = [curves]
    pts_list = [np.asarray(c.points, dtype=complex) for c in curves]
    if not pts_list:
        raise ValueError("need at least one curve")
    allpts = np.concatenate(pts_list)
    x_lo, x_hi = allpts.real.min(), allpts.real.max()
    y_lo, y_hi = allpts.imag.min(), allpts.imag.max()
    # snap the origin to the resolution lattice so refills of derived
    # curves (e.g. traced frontiers) land on the same cells
    origin = complex(
        (math.floor(x_lo / resolution) - 2) * resolution,
        (math.floor(y_lo / resolution) - 2) * resolution,
    )
    cols = int((x_hi - origin.real) / resolution) + 3
    rows = int((y_hi - origin.imag) / resolution) + 3
    if rows * cols > 2 ** 26:
        raise ValueError("grid would exceed 64M cells; coarsen the resolution")
    mask = np.zeros((rows, cols), dtype=bool)
    for pts in pts_list:
        _mark_polyline(pts.real, pts.imag, origin.real, origin.imag, resolution, mask)
    free = ~mask
    labels, _ = ndimage.label(free, structure=_FOUR)
    border = np.unique(
        np.concatenate(
            [labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1]]
        )
    )
    border = border[border != 0]
    outside = np.isin(labels, border)
    hull = ~outside
    flags = {}
    diam = math.hypot(x_hi - x_lo, y_hi - y_lo)
    if diam < 2 * resolution:
        flags["resolution_warning"] = True
    if hull.sum() <= mask.sum():
        flags["no_interior"] = True
    return GridRegion(resolution, origin, hull, flags)


_MOORE = [(0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1)]


def frontier(region: GridRegion) -> PlanarCurve:
    """Outer boundary of the region as a closed curve through cell centers.

    Moore-neighbor tracing on the largest connected component (flagged in
    the region when others were dropped).
    """
    mask = region.mask
    labels, count = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    if count > 1:
        sizes = ndimage.sum_labels(np.ones_like(labels), labels, range(1, count + 1))
        keep = int(np.argmax(sizes)) + 1
        mask = labels == keep
        region.flags["dropped_components"] = count - 1
    rows, cols = mask.shape
    ii, jj = np.nonzero(mask)
    start = (int(ii[0]), int(jj[0]))
    k0 = ii == start[0]
    start = (start[0], int(jj[k0].min()))

    def is_set(i, j):
        return 0 <= i < rows and 0 <= j < cols and mask[i, j]

    # Moore tracing, entering from the west of the first (top-left) cell;
    # terminate on a repeated (cell, entry direction) state, which closes
    # pinched boundaries correctly where first-return stopping truncates
    path = [start]
    prev_dir = 4  # came from the east-scan; backtrack points west
    cur = start
    seen = set()
    while True:
        found = False
        for d in range(8):
            k = (prev_dir + 1 + d) % 8
            di, dj = _MOORE[k]
            ni, nj = cur[0] + di, cur[1] + dj
            if is_set(ni, nj):
                state = (cur, k)
                if state in seen:
                    found = False
                    break
                seen.add(state)
                path.append((ni, nj))
                prev_dir = (k + 4) % 8
                cur = (ni, nj)
                found = True
                break
        if not found:
            break  # isolated cell or closed cycle
        if len(path) > 8 * mask.size:
            raise RuntimeError("frontier tracing failed to close")
    pts = np.array(
        [
            region.origin
            + (j + 0.5) * region.resolution
            + 1j * (i + 0.5) * region.resolution
            for i, j in path
        ],
        dtype=complex,
    )
    if pts[0] != pts[-1]:
        pts = np.concatenate([pts, pts[:1]])
    return PlanarCurve(pts, None, "plane")


# ---------------------------------------------------------------------------
# Box-counting dimension
# ---------------------------------------------------------------------------


def box_dimension(source, n_scales: int = 8, coarsest_div: int = 8) -> EstimateWithError:
    """Box-counting slope of log N(eps) versus log(1/eps).

    source: complex point array or PlanarCurve (cover counts), or a
    GridRegion (filled-cell counts; calibration mode for areas).  Scales
    are dyadic from diameter/coarsest_div downward.
    """
    if isinstance(source, GridRegion):
        pts = source.cell_centers()
        floor = 2.0 * source.resolution
    elif isinstance(source, PlanarCurve):
        pts = np.asarray(source.points, dtype=complex)
        floor = 0.0
    else:
        pts = np.asarray(source, dtype=complex)
        floor = 0.0
    if len(pts) < 2:
        raise ValueError("need at least two points")
    diam = math.hypot(
        pts.real.max() - pts.real.min(), pts.imag.max() - pts.imag.min()
    )
    if diam <= 0:
        raise ValueError("degenerate source: zero diameter")
    scales = [diam / coarsest_div / 2 ** k for k in range(n_scales)]
    scales = [s for s in scales if s > floor]
    if len(scales) < 4 or scales[-1] > diam / 100:
        raise ValueError(
            "scale window too small: need >= 4 dyadic scales reaching "
            "2 decades below the diameter"
        )
    counts = []
    x_rel = pts.real - pts.real.min()
    y_rel = pts.imag - pts.imag.min()
    shrink = 1.0 - 1e-12
    for eps in scales:
        # shrink keeps the extreme points out of a spurious extra cell,
        # so calibration sources count exact powers
        cx = np.floor(x_rel * shrink / eps).astype(np.int64)
        cy = np.floor(y_rel * shrink / eps).astype(np.int64)
        counts.append(len(np.unique(cx * (2 ** 31) + cy)))
    lx = np.log(1.0 / np.asarray(scales))
    ly = np.log(np.asarray(counts, dtype=float))
    coef = np.polyfit(lx, ly, 1)
    resid = ly - np.polyval(coef, lx)
    sxx = float(((lx - lx.mean()) ** 2).sum())
    dof = max(len(lx) - 2, 1)
    se = float(math.sqrt(max(resid @ resid / dof, 1e-30) / sxx))
    return EstimateWithError(
        float(coef[0]),
        se,
        len(scales),
        f"{len(scales)} dyadic scales, {scales[-1]:.3g}..{scales[0]:.3g}",
        {"counts": dict(zip([float(s) for s in scales], counts))},
    )


# ---------------------------------------------------------------------------
# Non-disconnecting pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathPair:
    """Two Brownian paths from 0 with their annulus observation window."""

    first: PlanarCurve
    second: PlanarCurve
    eps: float
    r_out: float

    def __post_init__(self):
        for c in (self.first, self.second):
            if c.points[0] != 0:
                raise ValueError("paths must start at the origin")
            r = np.abs(c.points)
            if r.max() < self.r_out:
                raise ValueError("path does not reach the outer circle")

    def clipped(self, which: int) -> np.ndarray:
        """Window from the first eps-circle hit to the first r_out hit."""
        pts = (self.first if which == 0 else self.second).points
        r = np.abs(pts)
        i0 = int(np.argmax(r >= self.eps))
        i1 = int(np.argmax(r >= self.r_out))
        return pts[i0 : i1 + 1]


@maybe_njit()
def _bm_path_kernel(seed, eps, r_out, out_re, out_im):
    """Brownian path from 0 to the r_out circle with scale-adaptive steps.

    The spatial step tracks max(eps/8, |z|/12), exact in law at any step
    size; returns the number of points written.
    """
    np.random.seed(seed)
    cap = len(out_re)
    x = 0.0
    y = 0.0
    out_re[0] = 0.0
    out_im[0] = 0.0
    k = 1
    while k < cap:
        r = math.sqrt(x * x + y * y)
        step = r / 12.0
        if step < eps / 8.0:
            step = eps / 8.0
        s = step
        x += s * np.random.normal()
        y += s * np.random.normal()
        out_re[k] = x
        out_im[k] = y
        k += 1
        if x * x + y * y >= r_out * r_out:
            return k
    return -1


@maybe_njit()
def _origin_free_kernel(mask, start_i, start_j, stack):
    """4-connected BFS over free cells; True when the border is reached."""
    rows, cols = mask.shape
    if mask[start_i, start_j]:
        return False
    visited = np.zeros(mask.shape, dtype=np.uint8)
    top = 0
    stack[top, 0] = start_i
    stack[top, 1] = start_j
    top += 1
    visited[start_i, start_j] = 1
    while top > 0:
        top -= 1
        i = stack[top, 0]
        j = stack[top, 1]
        if i == 0 or j == 0 or i == rows - 1 or j == cols - 1:
            return True
        for d in range(4):
            if d == 0:
                ni, nj = i + 1, j
            elif d == 1:
                ni, nj = i - 1, j
            elif d == 2:
                ni, nj = i, j + 1
            else:
                ni, nj = i, j - 1
            if visited[ni, nj] == 0 and not mask[ni, nj]:
                visited[ni, nj] = 1
                stack[top, 0] = ni
                stack[top, 1] = nj
                top += 1
    return False


def non_disconnecting_pair(
    eps: float,
    rng: np.random.Generator,
    max_trials: int = 20000,
    target_accepts: int = 1,
    r_out_cap: float = 8.0,
    resolution: float | None = None,
) -> tuple:
    """Rejection sampler for a non-disconnecting pair of Brownian paths.

    Runs pairs of Brownian motions from 0, windows them to the annulus
    (eps, min(1/eps, r_out_cap)), and accepts when the origin's cell stays
    4-connected to the outside of the rasterized union.  Returns
    (PathPair or None, acceptance EstimateWithError).
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    r_out = min(1.0 / eps, r_out_cap)
    if resolution is None:
        resolution = eps / 4.0
    half = r_out + 4 * resolution
    cols = int(2 * half / resolution) + 3
    mask = np.zeros((cols, cols), dtype=bool)
    origin = complex(-half, -half)
    oi = int((0.0 - origin.imag) / resolution)
    oj = int((0.0 - origin.real) / resolution)
    stack = np.empty((cols * cols, 2), dtype=np.int64)
    cap = 4_000_000
    buf_re = np.empty(cap)
    buf_im = np.empty(cap)
    accepts = 0
    trials = 0
    sample = None
    while trials < max_trials and accepts < target_accepts:
        trials += 1
        pair_pts = []
        ok = True
        for _ in range(2):
            n = _bm_path_kernel(int(rng.integers(2 ** 62)), eps, r_out, buf_re, buf_im)
            if n < 0:
                ok = False
                break
            pair_pts.append(buf_re[:n] + 1j * buf_im[:n])
        if not ok:
            continue
        mask[:] = False
        for pts in pair_pts:
            r = np.abs(pts)
            i0 = int(np.argmax(r >= eps))
            seg = pts[max(i0 - 1, 0) :]
            _mark_polyline(
                seg.real, seg.imag, origin.real, origin.imag, resolution, mask
            )
        if _origin_free_kernel(mask, oi, oj, stack):
            accepts += 1
            if sample is None:
                curves = [PlanarCurve(p, None, "plane") for p in pair_pts]
                sample = PathPair(curves[0], curves[1], eps, r_out)
    if accepts == 0 and trials >= max_trials and accepts / max(trials, 1) < 1e-4:
        raise RuntimeError(
            f"acceptance below 1e-4 after {trials} trials; enlarge eps"
        )
    est = binomial_estimate(
        accepts, trials, window=f"annulus ({eps:g}, {r_out:g}), res={resolution:g}"
    )
    return sample, est


def non_disconnection_probability(
    eps: float,
    n_trials: int,
    rng: np.random.Generator,
    r_out_cap: float = 8.0,
) -> EstimateWithError:
    """P(V_eps): origin stays connected to infinity off the path pair."""
    _, est = non_disconnecting_pair(
        eps, rng, max_trials=n_trials, target_accepts=n_trials + 1, r_out_cap=r_out_cap
    )
    return est
