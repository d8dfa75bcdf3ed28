"""Exact combinatorics of self-avoiding walks and polygons on Z^d.

Enumeration of walk/polygon/half-space counts, bridge and renewal
decomposition, the Kesten partial-sum estimate of the connective constant,
and the half-space walk samplers built from irreducible-bridge catalogs.

Conventions (d = 2 unless stated otherwise):
  * a walk of length n is a nearest-neighbor path [w_0=0, ..., w_n]
    visiting no vertex twice;
  * a polygon of length 2n additionally closes up (w_{2n} = w_0) and must
    have at least 4 steps (the degenerate 2-step back-and-forth is not a
    polygon);
  * the half space is {x : x_1 > 0}, entered after the first step;
  * a bridge satisfies x_1(w_0) < x_1(w_j) <= x_1(w_n) for all j >= 1
    (Madras-Slade convention); `is_bridge` can also evaluate the variant
    inequality anchored at w_1 instead of w_0, kept for comparison because
    the two conventions disagree for every bridge of length >= 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from ._jit import maybe_njit

DEFAULT_SAW_CAP = 20
DEFAULT_HALF_CAP = 24
DEFAULT_SAP_CAP = 22

UNIT_STEPS_2D = ((1, 0), (-1, 0), (0, 1), (0, -1))


class EnumerationCapError(RuntimeError):
    """Requested count exceeds the configured enumeration cap."""


# ---------------------------------------------------------------------------
# Walk type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Walk:
    """Ordered lattice-point sequence, either an open walk or a polygon."""

    points: tuple
    kind: str = "open"

    def __post_init__(self):
        if self.kind not in ("open", "polygon"):
            raise ValueError(f"kind must be 'open' or 'polygon', got {self.kind!r}")
        pts = tuple(tuple(int(c) for c in p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValueError("walk needs at least one point")
        d = len(pts[0])
        if d < 2:
            raise ValueError("lattice dimension must be >= 2")
        if any(len(p) != d for p in pts):
            raise ValueError("all points must share one dimension")
        for a, b in zip(pts, pts[1:]):
            if sum(abs(x - y) for x, y in zip(a, b)) != 1:
                raise ValueError(f"step {a} -> {b} is not a unit lattice step")
        if self.kind == "open":
            if len(set(pts)) != len(pts):
                raise ValueError("open walk revisits a vertex")
        else:
            n = len(pts) - 1
            if n < 4 or n % 2:
                raise ValueError("polygon length must be even and >= 4")
            if pts[0] != pts[-1]:
                raise ValueError("polygon must close up")
            if len(set(pts[:-1])) != n:
                raise ValueError("polygon revisits a vertex")

    @property
    def n_steps(self) -> int:
        return len(self.points) - 1

    @property
    def dim(self) -> int:
        return len(self.points[0])

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.int64)

    @classmethod
    def from_steps(cls, steps: str, kind: str = "open") -> "Walk":
        """Build a d=2 walk from a string of E/W/N/S moves."""
        move = {"E": (1, 0), "W": (-1, 0), "N": (0, 1), "S": (0, -1)}
        pts = [(0, 0)]
        for c in steps.upper():
            dx, dy = move[c]
            x, y = pts[-1]
            pts.append((x + dx, y + dy))
        return cls(tuple(pts), kind)


def in_half_space(walk: Walk) -> bool:
    """True when every vertex after the start has positive first coordinate."""
    return all(p[0] > 0 for p in walk.points[1:])


def renewal_times(walk: Walk) -> list:
    """Renewal indices of a half-space walk.

    j in {1,...,n-1} is a renewal time when x_1(w_k) <= x_1(w_j) < x_1(w_m)
    for all k <= j < m.
    """
    if walk.kind != "open":
        raise ValueError("renewal times are defined for open walks")
    if not in_half_space(walk):
        raise ValueError("walk is not in the half space x_1 > 0")
    xs = [p[0] for p in walk.points]
    return _renewal_indices(xs)


def _renewal_indices(xs) -> list:
    n = len(xs) - 1
    out = []
    # tail_min[j] = min(xs[j+1 .. n])
    tail_min = [0] * n
    m = xs[n]
    for j in range(n - 1, -1, -1):
        tail_min[j] = m
        if xs[j] < m:
            m = xs[j]
    pref = xs[0]
    for j in range(1, n):
        pref = max(pref, xs[j])
        if pref == xs[j] and xs[j] < tail_min[j]:
            out.append(j)
    return out


def first_renewal_time(walk: Walk):
    """Least renewal time, or None for an irreducible-or-non-bridge walk."""
    times = renewal_times(walk)
    return times[0] if times else None


def is_bridge(walk: Walk, convention: str = "standard") -> bool:
    """Bridge test.

    "standard" anchors the lower bound at w_0 (Madras-Slade); "paper"
    anchors it at w_1, which kills every bridge of length >= 2 because
    index 1 then always qualifies as a renewal of the standard bridge.
    """
    xs = [p[0] for p in walk.points]
    n = len(xs) - 1
    if n < 1:
        return False
    if convention == "standard":
        return all(xs[0] < xs[j] <= xs[n] for j in range(1, n + 1))
    if convention == "paper":
        return all(xs[1] < xs[j] <= xs[n] for j in range(2, n + 1))
    raise ValueError(f"unknown bridge convention {convention!r}")


def is_irreducible_bridge(walk: Walk, convention: str = "standard") -> bool:
    return is_bridge(walk, convention) and not renewal_times(walk)


# ---------------------------------------------------------------------------
# Counting kernels (numba-accelerated when available)
# ---------------------------------------------------------------------------


@maybe_njit()
def _saw_counts_2d(nmax):
    """Counts of n-step SAWs from the origin on Z^2 for n = 0..nmax.

    Uses the dihedral trick: C_n = 4 + 8 * (#walks whose first step is E
    and whose first off-axis step is N), so only 1/8 of the tree is walked.
    """
    counts = np.zeros(nmax + 1, dtype=np.int64)
    counts[0] = 1
    if nmax >= 1:
        counts[1] = 4
    if nmax < 2:
        return counts
    side = 2 * nmax + 3
    occ = np.zeros(side * side, dtype=np.uint8)
    c0 = nmax + 1
    occ[c0 * side + c0] = 1
    # stack: position, direction cursor, mode (0 = still straight east)
    px = np.empty(nmax + 2, dtype=np.int64)
    py = np.empty(nmax + 2, dtype=np.int64)
    cur = np.empty(nmax + 2, dtype=np.int64)
    mode = np.empty(nmax + 2, dtype=np.uint8)
    free_nodes = np.zeros(nmax + 1, dtype=np.int64)
    dx = np.array([1, 0, -1, 0], dtype=np.int64)
    dy = np.array([0, 1, 0, -1], dtype=np.int64)
    depth = 1
    px[1] = c0 + 1
    py[1] = c0
    cur[1] = 0
    mode[1] = 0
    occ[(c0 + 1) * side + c0] = 1
    while depth >= 1:
        advanced = False
        # straight mode tries E then N; free mode tries all four
        lim = 2 if mode[depth] == 0 else 4
        while cur[depth] < lim:
            k = cur[depth]
            cur[depth] += 1
            nx = px[depth] + dx[k]
            ny = py[depth] + dy[k]
            if occ[nx * side + ny] == 0 and depth + 1 <= nmax:
                nm = mode[depth]
                if nm == 0 and k == 1:
                    nm = 1
                depth += 1
                px[depth] = nx
                py[depth] = ny
                cur[depth] = 0
                mode[depth] = nm
                occ[nx * side + ny] = 1
                if nm == 1:
                    free_nodes[depth] += 1
                advanced = True
                break
        if not advanced:
            occ[px[depth] * side + py[depth]] = 0
            depth -= 1
    for n in range(2, nmax + 1):
        counts[n] = 4 + 8 * free_nodes[n]
    return counts


@maybe_njit()
def _saw_counts_general(nmax, d):
    """Counts of n-step SAWs on Z^d, first-step symmetry factor 2d only."""
    counts = np.zeros(nmax + 1, dtype=np.int64)
    counts[0] = 1
    if nmax < 1:
        return counts
    side = 2 * nmax + 3
    strides = np.empty(d, dtype=np.int64)
    strides[d - 1] = 1
    for i in range(d - 2, -1, -1):
        strides[i] = strides[i + 1] * side
    occ = np.zeros(side ** d, dtype=np.uint8)
    center = 0
    for i in range(d):
        center += (nmax + 1) * strides[i]
    occ[center] = 1
    pos = np.empty(nmax + 2, dtype=np.int64)
    cur = np.empty(nmax + 2, dtype=np.int64)
    depth = 1
    pos[1] = center + strides[0]
    cur[1] = 0
    occ[pos[1]] = 1
    counts[1] = 2 * d
    nodes = np.zeros(nmax + 1, dtype=np.int64)
    nodes[1] = 1
    while depth >= 1:
        advanced = False
        while cur[depth] < 2 * d:
            k = cur[depth]
            cur[depth] += 1
            step = strides[k >> 1]
            if k & 1:
                step = -step
            np_ = pos[depth] + step
            if occ[np_] == 0 and depth + 1 <= nmax:
                depth += 1
                pos[depth] = np_
                cur[depth] = 0
                occ[np_] = 1
                nodes[depth] += 1
                advanced = True
                break
        if not advanced:
            occ[pos[depth]] = 0
            depth -= 1
    for n in range(1, nmax + 1):
        counts[n] = 2 * d * nodes[n]
    return counts


@maybe_njit()
def _half_space_tables_2d(nmax):
    """One DFS pass over the half-space walks of length <= nmax.

    Returns (upsilon, irreducible, no_renewal, first_renewal) where
    first_renewal[n, k] counts walks of length n whose least renewal
    time is k (column 0 collects walks without renewal time).
    """
    ups = np.zeros(nmax + 1, dtype=np.int64)
    irr = np.zeros(nmax + 1, dtype=np.int64)
    rnr = np.zeros(nmax + 1, dtype=np.int64)
    fr = np.zeros((nmax + 1, nmax + 1), dtype=np.int64)
    ups[0] = 1
    rnr[0] = 1
    if nmax < 1:
        return ups, irr, rnr, fr
    side = 2 * nmax + 3
    occ = np.zeros(side * side, dtype=np.uint8)
    c0 = nmax + 1
    occ[c0 * side + c0] = 1
    px = np.empty(nmax + 2, dtype=np.int64)
    py = np.empty(nmax + 2, dtype=np.int64)
    cur = np.empty(nmax + 2, dtype=np.int64)
    xs = np.empty(nmax + 2, dtype=np.int64)
    pmax = np.empty(nmax + 2, dtype=np.int64)
    smin = np.empty(nmax + 2, dtype=np.int64)
    dx = np.array([1, 0, -1, 0], dtype=np.int64)
    dy = np.array([0, 1, 0, -1], dtype=np.int64)
    # first step is forced to +e1
    px[1] = c0 + 1
    py[1] = c0
    cur[1] = 0
    occ[(c0 + 1) * side + c0] = 1
    xs[0] = 0
    xs[1] = 1
    pmax[0] = 0
    pmax[1] = 1
    depth = 1
    while depth >= 1:
        if cur[depth] == 0:
            # record statistics for the walk ending at this node
            n = depth
            ups[n] += 1
            # smin[j] = min(xs[j+1 .. n])
            m = xs[n]
            for j in range(n - 1, 0, -1):
                smin[j] = m
                if xs[j] < m:
                    m = xs[j]
            s = 0
            for j in range(1, n):
                if pmax[j] == xs[j] and xs[j] < smin[j]:
                    s = j
                    break
            fr[n, s] += 1
            if s == 0:
                rnr[n] += 1
                if xs[n] == pmax[n]:
                    irr[n] += 1
        advanced = False
        while cur[depth] < 4:
            k = cur[depth]
            cur[depth] += 1
            nx = px[depth] + dx[k]
            ny = py[depth] + dy[k]
            if nx > c0 and occ[nx * side + ny] == 0 and depth + 1 <= nmax:
                depth += 1
                px[depth] = nx
                py[depth] = ny
                cur[depth] = 0
                occ[nx * side + ny] = 1
                xs[depth] = nx - c0
                pmax[depth] = max(pmax[depth - 1], xs[depth])
                advanced = True
                break
        if not advanced:
            occ[px[depth] * side + py[depth]] = 0
            depth -= 1
    return ups, irr, rnr, fr


@maybe_njit()
def _sap_rooted_counts_2d(n2max):
    """Rooted SAP counts per even length <= n2max (degenerate length 2 -> 0).

    Count walks that return to the origin at step n with all intermediate
    vertices distinct; rotational symmetry contributes the factor 4 for the
    forced first step east. Prunes on Manhattan distance to the origin.
    """
    counts = np.zeros(n2max + 1, dtype=np.int64)
    if n2max < 4:
        return counts
    side = 2 * n2max + 3
    occ = np.zeros(side * side, dtype=np.uint8)
    c0 = n2max + 1
    occ[c0 * side + c0] = 1
    px = np.empty(n2max + 2, dtype=np.int64)
    py = np.empty(n2max + 2, dtype=np.int64)
    cur = np.empty(n2max + 2, dtype=np.int64)
    dx = np.array([1, 0, -1, 0], dtype=np.int64)
    dy = np.array([0, 1, 0, -1], dtype=np.int64)
    px[1] = c0 + 1
    py[1] = c0
    cur[1] = 0
    occ[(c0 + 1) * side + c0] = 1
    depth = 1
    while depth >= 1:
        if cur[depth] == 0 and depth >= 3:
            dist = abs(px[depth] - c0) + abs(py[depth] - c0)
            if dist == 1 and depth + 1 <= n2max:
                counts[depth + 1] += 4
        advanced = False
        while cur[depth] < 4:
            k = cur[depth]
            cur[depth] += 1
            nx = px[depth] + dx[k]
            ny = py[depth] + dy[k]
            if occ[nx * side + ny] == 0 and depth + 1 < n2max:
                # must still be able to come home
                if abs(nx - c0) + abs(ny - c0) <= n2max - depth - 1:
                    depth += 1
                    px[depth] = nx
                    py[depth] = ny
                    cur[depth] = 0
                    occ[nx * side + ny] = 1
                    advanced = True
                    break
        if not advanced:
            occ[px[depth] * side + py[depth]] = 0
            depth -= 1
    return counts


@maybe_njit()
def _saw_diameter_squared_hist(nmax, half_space):
    """hist[n, q] = number of length-n walks with squared diameter q.

    Squared Euclidean diameter of an integer walk is itself an integer, so
    the histogram is exact. half_space restricts to x_1 > 0 after the start.
    """
    qmax = 2 * nmax * nmax
    hist = np.zeros((nmax + 1, qmax + 1), dtype=np.int64)
    side = 2 * nmax + 3
    occ = np.zeros(side * side, dtype=np.uint8)
    c0 = nmax + 1
    occ[c0 * side + c0] = 1
    px = np.empty(nmax + 2, dtype=np.int64)
    py = np.empty(nmax + 2, dtype=np.int64)
    cur = np.empty(nmax + 2, dtype=np.int64)
    dia = np.empty(nmax + 2, dtype=np.int64)
    dx = np.array([1, 0, -1, 0], dtype=np.int64)
    dy = np.array([0, 1, 0, -1], dtype=np.int64)
    px[0] = c0
    py[0] = c0
    cur[0] = 0
    dia[0] = 0
    depth = 0
    hist[0, 0] = 1
    while depth >= 0:
        advanced = False
        while cur[depth] < 4:
            k = cur[depth]
            cur[depth] += 1
            nx = px[depth] + dx[k]
            ny = py[depth] + dy[k]
            if occ[nx * side + ny] != 0 or depth + 1 > nmax:
                continue
            if half_space and nx <= c0:
                continue
            q = dia[depth]
            for j in range(depth + 1):
                dq = (nx - px[j]) ** 2 + (ny - py[j]) ** 2
                if dq > q:
                    q = dq
            depth += 1
            px[depth] = nx
            py[depth] = ny
            cur[depth] = 0
            dia[depth] = q
            occ[nx * side + ny] = 1
            hist[depth, q] += 1
            advanced = True
            break
        if not advanced:
            occ[px[depth] * side + py[depth]] = 0
            depth -= 1
    return hist


@maybe_njit()
def _sap_diameter_squared_hist(n2, half_space):
    """hist[q] over squared diameter for rooted SAPs of exact length n2.

    half_space demands positive second coordinate for vertices 1..n2-2
    (the vertex adjacent to the closing step is exempt). Run per length:
    that exemption index depends on where the polygon closes.
    """
    qmax = 2 * n2 * n2
    hist = np.zeros(qmax + 1, dtype=np.int64)
    if n2 < 4 or n2 % 2:
        return hist
    side = 2 * n2 + 3
    occ = np.zeros(side * side, dtype=np.uint8)
    c0 = n2 + 1
    occ[c0 * side + c0] = 1
    px = np.empty(n2 + 2, dtype=np.int64)
    py = np.empty(n2 + 2, dtype=np.int64)
    cur = np.empty(n2 + 2, dtype=np.int64)
    dia = np.empty(n2 + 2, dtype=np.int64)
    dx = np.array([1, 0, -1, 0], dtype=np.int64)
    dy = np.array([0, 1, 0, -1], dtype=np.int64)
    px[0] = c0
    py[0] = c0
    cur[0] = 0
    dia[0] = 0
    depth = 0
    while depth >= 0:
        if depth == n2 - 1 and cur[depth] == 0:
            dist = abs(px[depth] - c0) + abs(py[depth] - c0)
            if dist == 1:
                hist[dia[depth]] += 1
        advanced = False
        while cur[depth] < 4:
            k = cur[depth]
            cur[depth] += 1
            nx = px[depth] + dx[k]
            ny = py[depth] + dy[k]
            if occ[nx * side + ny] != 0 or depth + 1 >= n2:
                continue
            if abs(nx - c0) + abs(ny - c0) > n2 - depth - 1:
                continue
            if half_space and depth + 1 <= n2 - 2 and ny <= c0:
                continue
            q = dia[depth]
            for j in range(depth + 1):
                dq = (nx - px[j]) ** 2 + (ny - py[j]) ** 2
                if dq > q:
                    q = dq
            depth += 1
            px[depth] = nx
            py[depth] = ny
            cur[depth] = 0
            dia[depth] = q
            occ[nx * side + ny] = 1
            advanced = True
            break
        if not advanced:
            occ[px[depth] * side + py[depth]] = 0
            depth -= 1
    return hist


# ---------------------------------------------------------------------------
# Public counting API
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def saw_count_table(nmax: int, d: int = 2) -> tuple:
    """C_0..C_nmax as a tuple of ints."""
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if d == 2:
        return tuple(int(c) for c in _saw_counts_2d(nmax))
    return tuple(int(c) for c in _saw_counts_general(nmax, d))


def count_saws(n: int, d: int = 2, cap: int = DEFAULT_SAW_CAP) -> int:
    """Number of n-step self-avoiding walks from the origin on Z^d."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > cap:
        raise EnumerationCapError(f"n={n} exceeds the enumeration cap {cap}")
    return saw_count_table(n, d)[n]


@lru_cache(maxsize=8)
def half_space_tables(nmax: int):
    """(upsilon, irreducible, no_renewal, first_renewal) arrays up to nmax."""
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    ups, irr, rnr, fr = _half_space_tables_2d(nmax)
    return (
        np.asarray(ups, dtype=np.int64),
        np.asarray(irr, dtype=np.int64),
        np.asarray(rnr, dtype=np.int64),
        np.asarray(fr, dtype=np.int64),
    )


def count_half_space(n: int, cap: int = DEFAULT_HALF_CAP) -> int:
    """upsilon_n: walks from 0 with positive first coordinate after the start."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > cap:
        raise EnumerationCapError(f"n={n} exceeds the enumeration cap {cap}")
    return int(half_space_tables(n)[0][n])


def count_irreducible_bridges(k: int, cap: int = DEFAULT_HALF_CAP) -> int:
    """lambda_k: irreducible bridges of length k (standard convention)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > cap:
        raise EnumerationCapError(f"k={k} exceeds the enumeration cap {cap}")
    return int(half_space_tables(k)[1][k])


def count_saps(n2: int, cap: int = DEFAULT_SAP_CAP):
    """(rooted, classes) counts of self-avoiding polygons of length n2.

    rooted counts origin-rooted oriented polygons; classes divides out the
    4n representatives (2n roots x 2 orientations) of each translation class.
    """
    if n2 % 2:
        raise ValueError("polygon length must be even")
    if n2 < 2:
        raise ValueError("polygon length must be >= 2")
    if n2 > cap:
        raise EnumerationCapError(f"n2={n2} exceeds the enumeration cap {cap}")
    rooted = int(_sap_rooted_counts_2d(n2)[n2])
    classes = rooted // (2 * n2) if rooted else 0
    if rooted and rooted % (2 * n2):
        raise AssertionError("rooted SAP count not divisible by 4n")
    return rooted, classes


# ---------------------------------------------------------------------------
# Enumeration catalogs (small lengths; plain recursion)
# ---------------------------------------------------------------------------


def iter_saws(n: int):
    """Yield every n-step SAW from the origin as a tuple of points (d=2)."""
    path = [(0, 0)]
    occ = {(0, 0)}

    def rec():
        if len(path) == n + 1:
            yield tuple(path)
            return
        x, y = path[-1]
        for dx, dy in UNIT_STEPS_2D:
            p = (x + dx, y + dy)
            if p not in occ:
                occ.add(p)
                path.append(p)
                yield from rec()
                path.pop()
                occ.remove(p)

    yield from rec()


def iter_half_space_walks(n: int):
    """Yield every length-n half-space walk as an (n+1, 2) int array."""
    if n == 0:
        yield np.zeros((1, 2), dtype=np.int64)
        return
    path = [(0, 0), (1, 0)]
    occ = {(0, 0), (1, 0)}

    def rec():
        if len(path) == n + 1:
            yield np.asarray(path, dtype=np.int64)
            return
        x, y = path[-1]
        for dx, dy in UNIT_STEPS_2D:
            p = (x + dx, y + dy)
            if p[0] > 0 and p not in occ:
                occ.add(p)
                path.append(p)
                yield from rec()
                path.pop()
                occ.remove(p)

    yield from rec()


def _first_renewal_of_xs(xs) -> int:
    idx = _renewal_indices(list(xs))
    return idx[0] if idx else 0


def irreducible_bridge_catalog(kmax: int) -> list:
    """catalog[k] = list of (k+1, 2) arrays of irreducible bridges, k <= kmax."""
    catalog = [[] for _ in range(kmax + 1)]
    for k in range(1, kmax + 1):
        for arr in iter_half_space_walks(k):
            xs = arr[:, 0]
            if xs.max() == xs[-1] and _first_renewal_of_xs(xs) == 0:
                catalog[k].append(arr)
    return catalog


def no_renewal_catalog(kmax: int) -> list:
    """catalog[k] = half-space walks of length k without renewal time."""
    catalog = [[] for _ in range(kmax + 1)]
    catalog[0].append(np.zeros((1, 2), dtype=np.int64))
    for k in range(1, kmax + 1):
        for arr in iter_half_space_walks(k):
            if _first_renewal_of_xs(arr[:, 0]) == 0:
                catalog[k].append(arr)
    return catalog


# ---------------------------------------------------------------------------
# BridgeTable and Kesten's relation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BridgeTable:
    """Exact counts C_n, upsilon_n, lambda_n up to the truncation K."""

    K: int
    saw_counts: tuple
    half_counts: tuple
    irreducible_counts: tuple
    no_renewal_counts: tuple
    beta_estimate: float = field(default=0.0)

    @classmethod
    def build(cls, K: int, saw_cap: int = DEFAULT_SAW_CAP) -> "BridgeTable":
        if K < 1:
            raise ValueError("K must be >= 1")
        ups, irr, rnr, _ = half_space_tables(K)
        saws = saw_count_table(min(K, saw_cap))
        table = cls(
            K=K,
            saw_counts=tuple(int(c) for c in saws[1:]),
            half_counts=tuple(int(c) for c in ups[1 : K + 1]),
            irreducible_counts=tuple(int(c) for c in irr[1 : K + 1]),
            no_renewal_counts=tuple(int(c) for c in rnr[: K + 1]),
        )
        object.__setattr__(table, "beta_estimate", kesten_beta(table))
        table.validate()
        return table

    def validate(self):
        K = self.K
        if len(self.half_counts) != K or len(self.irreducible_counts) != K:
            raise ValueError("count arrays must have length K")
        for k in range(K):
            lam = self.irreducible_counts[k]
            ups = self.half_counts[k]
            if not (0 < lam <= ups):
                raise ValueError(f"need 0 < lambda_{k+1} <= upsilon_{k+1}")
            if k < len(self.saw_counts) and ups > self.saw_counts[k]:
                raise ValueError(f"upsilon_{k+1} exceeds C_{k+1}")
        cs = self.saw_counts
        for n in range(1, len(cs) + 1):
            for m in range(1, len(cs) + 1 - n):
                if cs[n + m - 1] > cs[n - 1] * cs[m - 1]:
                    raise ValueError(f"submultiplicativity fails at ({n},{m})")

    def saw(self, n: int) -> int:
        return self.saw_counts[n - 1]

    def half(self, n: int) -> int:
        return 1 if n == 0 else self.half_counts[n - 1]

    def irreducible(self, k: int) -> int:
        return self.irreducible_counts[k - 1]


def kesten_partial_sum(table: BridgeTable, beta: float, K: int | None = None) -> float:
    """S_K(beta) = sum_{k<=K} lambda_k beta^{-k}."""
    if beta <= 1.0:
        raise ValueError("beta must exceed 1")
    K = table.K if K is None else K
    if K > table.K:
        raise ValueError("K exceeds the table truncation")
    return float(sum(table.irreducible(k) * beta ** (-k) for k in range(1, K + 1)))


def kesten_beta(table: BridgeTable, K: int | None = None) -> float:
    """Truncated root beta_K of sum_{k<=K} lambda_k beta^{-k} = 1.

    The partial sums of the full relation converge to 1 from below at the
    true connective constant, so beta_K increases with K and stays below it.
    """
    K = table.K if K is None else K
    if K > table.K:
        raise ValueError("K exceeds the table truncation")
    if K == 1:
        return float(table.irreducible(1))

    def f(b):
        return sum(table.irreducible(k) * b ** (-k) for k in range(1, K + 1)) - 1.0

    lo, hi = 1e-9, 8.0
    if f(hi) > 0:
        raise ArithmeticError("no Kesten root in bracket (1e-9, 8)")
    return float(brentq(f, lo, hi, xtol=1e-13, rtol=1e-15))


# ---------------------------------------------------------------------------
# Half-space samplers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfSpaceSampler:
    """Sampler for the infinite half-space SAW via i.i.d. irreducible bridges.

    A bridge of length k is drawn with probability proportional to
    lambda_k beta^{-k} (renormalized over k <= K), uniformly within its
    length class, and bridges are concatenated end to start.
    """

    table: BridgeTable
    beta: float
    weights: tuple
    _catalog: tuple

    @classmethod
    def build(cls, K: int = 10, beta: float | None = None, table: BridgeTable | None = None):
        table = BridgeTable.build(K) if table is None else table
        if table.K < K:
            raise ValueError("table truncation below sampler K")
        beta = table.beta_estimate if beta is None else float(beta)
        raw = np.array(
            [table.irreducible(k) * beta ** (-k) for k in range(1, K + 1)], dtype=float
        )
        weights = raw / raw.sum()
        catalog = irreducible_bridge_catalog(K)
        for k in range(1, K + 1):
            if len(catalog[k]) != table.irreducible(k):
                raise AssertionError("bridge catalog disagrees with counts")
        return cls(table=table, beta=beta, weights=tuple(weights), _catalog=tuple(
            tuple(c) for c in catalog
        ))

    @property
    def K(self) -> int:
        return len(self.weights)

    def sample_bridge(self, rng: np.random.Generator) -> np.ndarray:
        k = int(rng.choice(self.K, p=np.asarray(self.weights))) + 1
        pool = self._catalog[k]
        return pool[int(rng.integers(len(pool)))]

    def sample_points(self, steps: int, rng: np.random.Generator) -> np.ndarray:
        """Concatenated bridge walk with at least `steps` steps, as an array."""
        pieces = [np.zeros((1, 2), dtype=np.int64)]
        total = 0
        offset = np.zeros(2, dtype=np.int64)
        while total < steps:
            br = self.sample_bridge(rng)
            pieces.append(br[1:] + offset)
            offset = offset + br[-1]
            total += br.shape[0] - 1
        return np.concatenate(pieces, axis=0)


def sample_half_space_saw(steps: int, sampler: HalfSpaceSampler, rng: np.random.Generator) -> Walk:
    """Half-space SAW of length >= steps, truncated at the first renewal past it."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    pts = sampler.sample_points(steps, rng)
    return Walk(tuple(map(tuple, pts)), "open")


@dataclass(frozen=True)
class WeightedHalfSpaceSampler:
    """Sampler for the measure that weights a length-n half-space walk by a^n.

    Splitting a nonempty walk at all of its renewal times is a bijection
    onto (irreducible bridges b_1..b_m, renewal-free tail of length >= 1),
    so with L(a) = sum lambda_k a^k and R1(a) = sum_{j>=1} r_j a^j the
    total weight is Z = 1 + R1/(1 - L): emit the empty walk with mass 1/Z,
    otherwise a geometric number of bridges followed by a nonempty tail.
    Lengths <= K are then distributed exactly proportionally to
    upsilon_n a^n.
    """

    K: int
    a: float
    empty_prob: float
    bridge_weights: tuple
    tail_weights: tuple
    continue_prob: float
    _bridges: tuple
    _tails: tuple

    @classmethod
    def build(cls, a: float, K: int = 10, table: BridgeTable | None = None):
        table = BridgeTable.build(K) if table is None else table
        if a <= 0:
            raise ValueError("a must be positive")
        if a >= 1.0 / table.beta_estimate:
            raise ValueError(
                f"a={a} is not below 1/beta_K = {1.0 / table.beta_estimate:.6f}; "
                "the weighted measure does not normalize"
            )
        lam_w = np.array([table.irreducible(k) * a ** k for k in range(1, K + 1)])
        big_l = lam_w.sum()
        if big_l >= 1.0:
            raise ValueError("truncated bridge series reaches 1; lower a")
        tail_w = np.array(
            [table.no_renewal_counts[j] * a ** j for j in range(1, K + 1)]
        )
        z = 1.0 + tail_w.sum() / (1.0 - big_l)
        bridges = irreducible_bridge_catalog(K)
        tails = no_renewal_catalog(K)
        return cls(
            K=K,
            a=float(a),
            empty_prob=float(1.0 / z),
            bridge_weights=tuple(lam_w / big_l),
            tail_weights=tuple(tail_w / tail_w.sum()),
            continue_prob=float(big_l),
            _bridges=tuple(tuple(c) for c in bridges),
            _tails=tuple(tuple(c) for c in tails),
        )

    def sample_points(self, rng: np.random.Generator) -> np.ndarray:
        pieces = [np.zeros((1, 2), dtype=np.int64)]
        if rng.random() < self.empty_prob:
            return pieces[0]
        offset = np.zeros(2, dtype=np.int64)
        while rng.random() < self.continue_prob:
            k = int(rng.choice(self.K, p=np.asarray(self.bridge_weights))) + 1
            pool = self._bridges[k]
            br = pool[int(rng.integers(len(pool)))]
            pieces.append(br[1:] + offset)
            offset = offset + br[-1]
        j = int(rng.choice(self.K, p=np.asarray(self.tail_weights))) + 1
        pool = self._tails[j]
        tail = pool[int(rng.integers(len(pool)))]
        pieces.append(tail[1:] + offset)
        return np.concatenate(pieces, axis=0)


def sample_weighted_half_space(
    a: float,
    rng: np.random.Generator,
    K: int = 10,
    sampler: WeightedHalfSpaceSampler | None = None,
) -> Walk:
    """Draw from the normalized a^n-weighted measure on half-space walks."""
    if sampler is None:
        sampler = WeightedHalfSpaceSampler.build(a, K)
    pts = sampler.sample_points(rng)
    return Walk(tuple(map(tuple, pts)), "open")
