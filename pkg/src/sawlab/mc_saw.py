"""Pivot-algorithm Monte Carlo for SAWs and critical-exponent estimation.

The pivot chain holds a fixed-length self-avoiding walk; a move applies
one of the 7 non-identity lattice symmetries of Z^2 about a uniformly
random interior site to the tail and accepts iff the result is still
self-avoiding, which preserves the uniform measure.  Collision checks
walk outward from the pivot against the prefix only, via an index grid.

Exponent estimators fit log-log slopes over a grid of lengths with
batch-mean error bars; debug families ("straight", "random-walk") give
closed-form calibration targets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._jit import maybe_njit
from .estimates import EstimateWithError
from . import lattice

# the dihedral group of Z^2 as row-major 2x2 integer matrices, identity first
SYMMETRIES_2D = np.array(
    [
        [1, 0, 0, 1],
        [0, -1, 1, 0],
        [-1, 0, 0, -1],
        [0, 1, -1, 0],
        [1, 0, 0, -1],
        [-1, 0, 0, 1],
        [0, 1, 1, 0],
        [0, -1, -1, 0],
    ],
    dtype=np.int64,
)


@dataclass
class PivotChain:
    """Fixed-length SAW sampler state."""

    points: np.ndarray
    accepted: int = 0
    proposed: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("pivot chains are implemented for Z^2 walks")
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[0] - 1

    @classmethod
    def straight(cls, n: int) -> "PivotChain":
        pts = np.zeros((n + 1, 2), dtype=np.int64)
        pts[:, 0] = np.arange(n + 1)
        return cls(pts)

    def as_walk(self) -> lattice.Walk:
        return lattice.Walk(tuple(map(tuple, self.points)), "open")


def propose_pivot(points: np.ndarray, site: int, sym: np.ndarray):
    """Apply a symmetry about points[site] to the tail; None if blocked."""
    pts = np.asarray(points, dtype=np.int64)
    n = pts.shape[0] - 1
    if not 1 <= site <= n - 1:
        raise ValueError("pivot site must be interior")
    mat = np.asarray(sym, dtype=np.int64).reshape(2, 2)
    pivot = pts[site]
    tail = (pts[site + 1 :] - pivot) @ mat.T + pivot
    prefix = set(map(tuple, pts[: site + 1]))
    for p in map(tuple, tail):
        if p in prefix:
            return None
    out = pts.copy()
    out[site + 1 :] = tail
    return out


def pivot_step(chain: PivotChain, rng: np.random.Generator) -> bool:
    """One pivot proposal; returns True when accepted."""
    n = chain.n
    site = int(rng.integers(1, n))
    sym = SYMMETRIES_2D[int(rng.integers(1, 8))]
    chain.proposed += 1
    new = propose_pivot(chain.points, site, sym)
    if new is None:
        return False
    chain.points = new
    chain.accepted += 1
    return True


@maybe_njit()
def _pivot_run(
    x, y, grid, side, off, n_measure, stride, count_accepted, seed,
    out_end2, out_diam2, out_half,
):
    """Advance the chain by stride moves per measurement.

    stride counts proposals (count_accepted False) so that measurements
    sit at deterministic chain times; sampling only after acceptances
    would bias toward states with high acceptance rates.  Burn-in calls
    count accepted moves instead (count_accepted True).  grid holds the
    walk index of the occupying point or -1; collisions count only
    against indices <= pivot site.

    Pivot sites >= 1 never move the first bond, so the chain samples the
    first-step-east class; out_half records the all-x>0 indicator on that
    class, whose mean is 4x the uniform-measure half-plane probability.
    """
    np.random.seed(seed)
    n = len(x) - 1
    syms = np.array(
        [
            [0, -1, 1, 0],
            [-1, 0, 0, -1],
            [0, 1, -1, 0],
            [1, 0, 0, -1],
            [-1, 0, 0, 1],
            [0, 1, 1, 0],
            [0, -1, -1, 0],
        ],
        dtype=np.int64,
    )
    accepted_total = 0
    for meas in range(n_measure):
        got = 0
        while got < stride:
            site = 1 + np.random.randint(n - 1)
            s = np.random.randint(7)
            a = syms[s, 0]
            b = syms[s, 1]
            c = syms[s, 2]
            d = syms[s, 3]
            px = x[site]
            py = y[site]
            ok = True
            for j in range(site + 1, n + 1):
                dx0 = x[j] - px
                dy0 = y[j] - py
                tx = px + a * dx0 + b * dy0
                ty = py + c * dx0 + d * dy0
                idx = grid[(tx + off) * side + (ty + off)]
                if 0 <= idx <= site:
                    ok = False
                    break
            if not count_accepted:
                got += 1
            if not ok:
                continue
            # clear the old tail, then write the transformed one
            for j in range(site + 1, n + 1):
                grid[(x[j] + off) * side + (y[j] + off)] = -1
            for j in range(site + 1, n + 1):
                dx0 = x[j] - px
                dy0 = y[j] - py
                x[j] = px + a * dx0 + b * dy0
                y[j] = py + c * dx0 + d * dy0
                grid[(x[j] + off) * side + (y[j] + off)] = j
            accepted_total += 1
            if count_accepted:
                got += 1
        ex = x[n] - x[0]
        ey = y[n] - y[0]
        out_end2[meas] = ex * ex + ey * ey
        best = 0
        for i in range(n + 1):
            for j in range(i + 1, n + 1):
                dx0 = x[i] - x[j]
                dy0 = y[i] - y[j]
                q = dx0 * dx0 + dy0 * dy0
                if q > best:
                    best = q
        out_diam2[meas] = best
        up = 1
        for j in range(1, n + 1):
            if x[j] <= 0:
                up = 0
                break
        out_half[meas] = up
    return accepted_total


def pivot_samples(
    n: int,
    n_measure: int,
    rng: np.random.Generator,
    stride: int | None = None,
    therm_factor: int = 10,
):
    """(end2, diam2, half_x) arrays from a thermalized pivot chain of length n.

    half_x is the strict x>0 indicator on the first-step-east class; its
    mean divided by 4 estimates the uniform half-plane probability.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if stride is None:
        # global observables decorrelate in O(1) accepted pivots, but slow
        # modes (half-plane sidedness) want strides growing with n
        stride = max(32, n // 4)
    chain = PivotChain.straight(n)
    x = chain.points[:, 0].copy()
    y = chain.points[:, 1].copy()
    side = 2 * n + 3
    off = n + 1
    grid = np.full(side * side, -1, dtype=np.int32)
    for j in range(n + 1):
        grid[(x[j] + off) * side + (y[j] + off)] = j
    # thermalization: discard therm_factor * n accepted moves
    burn = np.empty(1, dtype=np.int64)
    burn_d = np.empty(1, dtype=np.int64)
    burn_u = np.empty(1, dtype=np.int64)
    seed = int(rng.integers(2 ** 62))
    _pivot_run(
        x, y, grid, side, off, 1, therm_factor * n, True, seed, burn, burn_d, burn_u
    )
    end2 = np.empty(n_measure, dtype=np.int64)
    diam2 = np.empty(n_measure, dtype=np.int64)
    upper = np.empty(n_measure, dtype=np.int64)
    seed = int(rng.integers(2 ** 62))
    _pivot_run(
        x, y, grid, side, off, n_measure, stride, False, seed, end2, diam2, upper
    )
    return end2, diam2, upper


def _random_walk_samples(n: int, n_measure: int, rng: np.random.Generator):
    """Plain nearest-neighbor random walk statistics (debug oracle family)."""
    steps = rng.integers(0, 4, size=(n_measure, n))
    dx = np.where(steps == 0, 1, np.where(steps == 1, -1, 0))
    dy = np.where(steps == 2, 1, np.where(steps == 3, -1, 0))
    xs = np.cumsum(dx, axis=1)
    ys = np.cumsum(dy, axis=1)
    end2 = xs[:, -1] ** 2 + ys[:, -1] ** 2
    span = np.maximum(xs.max(axis=1) - xs.min(axis=1), 0) ** 2 + np.maximum(
        ys.max(axis=1) - ys.min(axis=1), 0
    ) ** 2
    upper = (ys > 0).all(axis=1).astype(np.int64)
    return end2.astype(np.int64), span.astype(np.int64), upper


def _batch_mean_se(values: np.ndarray, n_batches: int = 32):
    """Mean and batch-mean standard error."""
    v = np.asarray(values, dtype=float)
    mean = float(v.mean())
    k = min(n_batches, len(v))
    if k < 2:
        return mean, 0.0
    usable = (len(v) // k) * k
    batches = v[:usable].reshape(k, -1).mean(axis=1)
    se = float(batches.std(ddof=1) / math.sqrt(k))
    return mean, se


def _loglog_slope(xs, ys, y_ses):
    """Unweighted LS slope of log y vs log x with propagated slope error."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    rel = np.asarray(y_ses, dtype=float) / np.asarray(ys, dtype=float)
    xbar = lx.mean()
    sxx = float(((lx - xbar) ** 2).sum())
    w = (lx - xbar) / sxx
    slope = float((w * ly).sum())
    slope_se = float(math.sqrt((w ** 2 * rel ** 2).sum()))
    return slope, slope_se


def estimate_nu(
    lengths,
    samples: int,
    rng: np.random.Generator,
    family: str = "saw",
    stride: int | None = None,
) -> EstimateWithError:
    """Mean-square displacement exponent from log <|w(n)|^2> ~ 2 nu log n.

    Families: "saw" (pivot sampling), "random-walk" (debug, exact target
    1/2), "straight" (calibration, target 1).  Details carry the
    diameter-based variant estimate.
    """
    lengths = sorted(int(n) for n in lengths)
    if len(lengths) < 3:
        raise ValueError("need at least 3 grid lengths")
    if min(lengths) < 2:
        raise ValueError("lengths must be >= 2")
    means, ses, dmeans, dses = [], [], [], []
    for n in lengths:
        if family == "saw":
            end2, diam2, _ = pivot_samples(n, samples, rng, stride=stride)
        elif family == "random-walk":
            end2, diam2, _ = _random_walk_samples(n, samples, rng)
        elif family == "straight":
            end2 = np.full(samples, n * n, dtype=np.int64)
            diam2 = end2
        else:
            raise ValueError(f"unknown family {family!r}")
        m, s = _batch_mean_se(end2)
        means.append(m)
        ses.append(s)
        dm, ds = _batch_mean_se(np.sqrt(diam2.astype(float)))
        dmeans.append(dm)
        dses.append(ds)
    slope, slope_se = _loglog_slope(lengths, means, ses)
    dslope, dslope_se = _loglog_slope(lengths, dmeans, dses)
    window = f"n in {lengths}, {samples} samples"
    return EstimateWithError(
        slope / 2.0,
        slope_se / 2.0,
        samples * len(lengths),
        window,
        {"nu_from_diameter": dslope, "nu_from_diameter_se": dslope_se, "family": family},
    )


def estimate_rho(
    lengths,
    samples: int,
    rng: np.random.Generator,
    family: str = "saw",
    stride: int | None = None,
) -> EstimateWithError:
    """Half-plane survival exponent from P(walk stays in y > 0) ~ n^-rho.

    Pivot samples live on the first-step-east class, where the uniform
    half-plane probability equals a quarter of the all-x>0 class fraction.
    """
    lengths = sorted(int(n) for n in lengths)
    if len(lengths) < 3:
        raise ValueError("need at least 3 grid lengths")
    fracs, ses, used = [], [], []
    dropped = []
    for n in lengths:
        if family == "saw":
            _, _, half = pivot_samples(n, samples, rng, stride=stride)
            scale = 0.25
        elif family == "random-walk":
            _, _, half = _random_walk_samples(n, samples, rng)
            scale = 1.0
        else:
            raise ValueError(f"unknown family {family!r}")
        hits = int(half.sum())
        if hits == 0:
            dropped.append(n)
            continue
        p = hits / samples
        fracs.append(p * scale)
        ses.append(scale * math.sqrt(p * (1 - p) / samples))
        used.append(n)
    if len(used) < 3:
        raise ValueError("too few usable grid points for the rho fit")
    slope, slope_se = _loglog_slope(used, fracs, ses)
    return EstimateWithError(
        -slope,
        slope_se,
        samples * len(used),
        f"n in {used}, {samples} samples",
        {"dropped_lengths": dropped, "fractions": dict(zip(used, fracs)), "family": family},
    )


def half_plane_fraction_exact(n: int) -> Fraction:
    """Exact #(half-plane walks)/C_n for small n via enumeration."""
    return Fraction(lattice.count_half_space(n), lattice.count_saws(n))


def estimate_gamma_pair(
    lengths,
    samples: int,
    rng: np.random.Generator,
) -> EstimateWithError:
    """Experimental: gamma from pair nonintersection, P ~ n^(1-gamma).

    Tests whether two independent uniform walks, one shifted by e1 and
    reversed, can be concatenated; desk-scale bias is unquantified, so
    this stays outside the acceptance suite.
    """
    lengths = sorted(int(n) for n in lengths)
    if len(lengths) < 3:
        raise ValueError("need at least 3 grid lengths")
    fracs, ses = [], []
    for n in lengths:
        walks = pivot_walks(n, 2 * samples, rng)
        hits = 0
        shift = np.array([1, 0], dtype=np.int64)
        for a, b in zip(walks[::2], walks[1::2]):
            sa = set(map(tuple, -a))
            sb = set(map(tuple, b + shift))
            hits += not (sa & sb)
        p = hits / samples
        if p == 0:
            raise ValueError(f"no nonintersecting pairs at n={n}")
        fracs.append(p)
        ses.append(math.sqrt(p * (1 - p) / samples))
    slope, slope_se = _loglog_slope(lengths, fracs, ses)
    return EstimateWithError(
        1.0 - slope, slope_se, samples * len(lengths),
        f"n in {lengths}, {samples} pairs", {"experimental": True},
    )


@maybe_njit()
def _pivot_halfspace_run(x, y, grid, side, off, stride, seed):
    """Pivot proposals restricted to the half space x > 0 (after the start).

    Same move set as _pivot_run; a proposal is additionally rejected when
    any transformed tail point leaves the half space, so the chain is
    stationary for the uniform measure on half-space walks.  Advances
    exactly stride proposals.
    """
    np.random.seed(seed)
    n = len(x) - 1
    syms = np.array(
        [
            [0, -1, 1, 0],
            [-1, 0, 0, -1],
            [0, 1, -1, 0],
            [1, 0, 0, -1],
            [-1, 0, 0, 1],
            [0, 1, 1, 0],
            [0, -1, -1, 0],
        ],
        dtype=np.int64,
    )
    accepted = 0
    for _ in range(stride):
        site = 1 + np.random.randint(n - 1)
        s = np.random.randint(7)
        a = syms[s, 0]
        b = syms[s, 1]
        c = syms[s, 2]
        d = syms[s, 3]
        px = x[site]
        py = y[site]
        ok = True
        for j in range(site + 1, n + 1):
            dx0 = x[j] - px
            dy0 = y[j] - py
            tx = px + a * dx0 + b * dy0
            if tx <= 0:
                ok = False
                break
            ty = py + c * dx0 + d * dy0
            idx = grid[(tx + off) * side + (ty + off)]
            if 0 <= idx <= site:
                ok = False
                break
        if not ok:
            continue
        for j in range(site + 1, n + 1):
            grid[(x[j] + off) * side + (y[j] + off)] = -1
        for j in range(site + 1, n + 1):
            dx0 = x[j] - px
            dy0 = y[j] - py
            x[j] = px + a * dx0 + b * dy0
            y[j] = py + c * dx0 + d * dy0
            grid[(x[j] + off) * side + (y[j] + off)] = j
        accepted += 1
    return accepted


def halfspace_pivot_walks(
    n: int,
    n_walks: int,
    rng: np.random.Generator,
    stride: int | None = None,
    therm_factor: int = 20,
) -> list:
    """Snapshots of a uniform half-space SAW chain as (n+1, 2) arrays.

    The head of a uniform walk on the length-n half-space class converges
    to the infinite half-space SAW as n grows, which makes this the
    reference lattice object for continuum comparisons.
    """
    if stride is None:
        stride = 2 * n
    chain = PivotChain.straight(n)
    x = chain.points[:, 0].copy()
    y = chain.points[:, 1].copy()
    side = 2 * n + 3
    off = n + 1
    grid = np.full(side * side, -1, dtype=np.int32)
    for j in range(n + 1):
        grid[(x[j] + off) * side + (y[j] + off)] = j
    _pivot_halfspace_run(
        x, y, grid, side, off, therm_factor * stride, int(rng.integers(2 ** 62))
    )
    out = []
    for _ in range(n_walks):
        _pivot_halfspace_run(x, y, grid, side, off, stride, int(rng.integers(2 ** 62)))
        out.append(np.column_stack([x, y]).copy())
    return out


def pivot_walks(
    n: int,
    n_walks: int,
    rng: np.random.Generator,
    stride: int | None = None,
    therm_factor: int = 10,
) -> list:
    """Snapshots of the pivot chain as (n+1, 2) point arrays."""
    if stride is None:
        stride = max(32, n // 4)
    chain = PivotChain.straight(n)
    x = chain.points[:, 0].copy()
    y = chain.points[:, 1].copy()
    side = 2 * n + 3
    off = n + 1
    grid = np.full(side * side, -1, dtype=np.int32)
    for j in range(n + 1):
        grid[(x[j] + off) * side + (y[j] + off)] = j
    scratch = (np.empty(1, dtype=np.int64),) * 3
    _pivot_run(x, y, grid, side, off, 1, therm_factor * n, True,
               int(rng.integers(2 ** 62)), *scratch)
    out = []
    for _ in range(n_walks):
        _pivot_run(x, y, grid, side, off, 1, stride, False,
                   int(rng.integers(2 ** 62)), *scratch)
        out.append(np.column_stack([x, y]).copy())
    return out


# ---------------------------------------------------------------------------
# Exponent algebra (exact rationals)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentSet:
    """Exact critical exponents and the derived scaling exponents."""

    nu: Fraction
    gamma: Fraction
    rho: Fraction
    a: Fraction = field(init=False)
    b: Fraction = field(init=False)
    a_prime: Fraction = field(init=False)
    b_prime: Fraction = field(init=False)
    alpha: Fraction = field(init=False)

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        object.__setattr__(self, "a", 1 + (2 * self.rho - self.gamma) / (2 * self.nu))
        object.__setattr__(self, "b", 1 - self.gamma / (2 * self.nu))
        object.__setattr__(self, "a_prime", Fraction(2))
        object.__setattr__(self, "b_prime", 2 - 1 / self.nu)
        object.__setattr__(self, "alpha", 2 - 2 * self.nu)

    def boundary_interior_sum_identity(self) -> bool:
        """a + b = 2 + (rho - gamma)/nu, exactly."""
        return self.a + self.b == 2 + (self.rho - self.gamma) / self.nu


def exponent_algebra(nu, gamma, rho) -> ExponentSet:
    """Derived scaling exponents from (nu, gamma, rho) in exact arithmetic."""
    return ExponentSet(Fraction(nu), Fraction(gamma), Fraction(rho))


SAW_EXPONENTS = exponent_algebra(Fraction(3, 4), Fraction(43, 32), Fraction(25, 64))


# ---------------------------------------------------------------------------
# Diameter-window mass scaling
# ---------------------------------------------------------------------------

_MASS_KINDS = ("saw-free", "saw-half", "sap-free", "sap-half")


def diameter_mass_scaling(
    kind: str,
    r_grid=(1, 2, 3),
    n_cap: int | None = None,
    beta: float | None = None,
    table_K: int = 12,
) -> EstimateWithError:
    """Fit of the beta^{-n}-weighted count of walks/polygons with diameter
    in [R, 2R) against R on a small grid, by exact enumeration.

    Desk-scale only: the n-sum is truncated at n_cap, and the reported
    details include the weight fraction carried by the top two lengths
    (truncation diagnostic) plus the per-window table.
    """
    if kind not in _MASS_KINDS:
        raise ValueError(f"kind must be one of {_MASS_KINDS}")
    r_grid = sorted(int(r) for r in r_grid)
    if len(r_grid) < 2:
        raise ValueError("need at least two window radii")
    if beta is None:
        beta = lattice.BridgeTable.build(table_K).beta_estimate
    if n_cap is None:
        n_cap = 14 if kind.startswith("saw") else 18
    if kind.startswith("saw"):
        hist = lattice._saw_diameter_squared_hist(n_cap, kind == "saw-half")
        lengths = range(1, n_cap + 1)
        hists = {n: hist[n] for n in lengths}
    else:
        hists = {
            n2: lattice._sap_diameter_squared_hist(n2, kind == "sap-half")
            for n2 in range(4, n_cap + 1, 2)
        }
    masses, tr_fracs = [], []
    for r in r_grid:
        lo, hi = r * r, 4 * r * r
        total = 0.0
        top = 0.0
        top_lengths = sorted(hists)[-2:]
        for n, h in hists.items():
            qs = np.arange(min(hi, len(h) - 1) + 1)
            sel = (qs >= lo) & (qs < hi)
            contrib = float(h[: len(qs)][sel].sum()) * beta ** (-n)
            total += contrib
            if n in top_lengths:
                top += contrib
        if total <= 0:
            raise ValueError(f"empty diameter window at R={r}; enlarge n_cap")
        masses.append(total)
        tr_fracs.append(top / total)
    lx = np.log(np.asarray(r_grid, float))
    ly = np.log(np.asarray(masses))
    slope = float(np.polyfit(lx, ly, 1)[0])
    resid = ly - np.polyval(np.polyfit(lx, ly, 1), lx)
    se = float(
        math.sqrt(max(resid.var(), 1e-30) / ((lx - lx.mean()) ** 2).sum())
    )
    return EstimateWithError(
        slope,
        se,
        len(r_grid),
        f"R in {r_grid}, n <= {n_cap}",
        {
            "kind": kind,
            "beta": beta,
            "masses": dict(zip(r_grid, masses)),
            "truncation_fraction": max(tr_fracs),
            "truncation_flag": max(tr_fracs) > 0.2,
        },
    )
