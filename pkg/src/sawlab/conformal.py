"""Closed-form conformal maps for hull removal, with derivative machinery.

Complex points are plain Python/numpy complex numbers; the point at
infinity is the constant COMPLEX_INFINITY.  Two obstacle shapes are
supported in the upper half plane H, both with closed-form removal maps
normalized to fix 0 and infinity with derivative 1 at infinity:

  * a vertical slit from x0 on the real axis up to x0 + i h,
  * a half disk of radius rho centered at a real point x != 0.

The radial (unit disk) geometry reuses the half-plane half-disk via the
Cayley transport 0 -> i, 1 -> infinity.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

COMPLEX_INFINITY = complex(float("inf"), float("inf"))

CHORDAL_RESTRICTION_EXPONENT = 5.0 / 8.0
INTERIOR_RESTRICTION_EXPONENT = 5.0 / 48.0


class SingularMapError(ArithmeticError):
    """Derivative vanished where the Schwarzian needs to divide by it."""


def _is_inf(z) -> bool:
    return cmath.isinf(complex(z))


def cayley(z):
    """Unit disk to upper half plane, 0 -> i and 1 -> infinity."""
    z = complex(z)
    if z == 1:
        return COMPLEX_INFINITY
    return 1j * (1 + z) / (1 - z)


def cayley_inverse(w):
    """Inverse transport; infinity -> 1."""
    if _is_inf(w):
        return complex(1.0)
    w = complex(w)
    if w == -1j:
        return COMPLEX_INFINITY
    return (w - 1j) / (w + 1j)


# ---------------------------------------------------------------------------
# Half-plane hull-removal maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlitMap:
    """Removal map for a vertical slit or a boundary half disk.

    kind "vertical-slit": obstacle {x0 + i t : 0 <= t <= h}, parameters
    (x0, h); kind "half-disk": obstacle {|z - x| <= rho} in H, parameters
    (x, rho).  The map fixes 0 and infinity and looks like z at infinity;
    its derivative at 0 lies in (0, 1).
    """

    kind: str
    param1: float
    param2: float

    def __post_init__(self):
        if self.kind not in ("vertical-slit", "half-disk"):
            raise ValueError(f"unknown slit map kind {self.kind!r}")
        if self.param1 == 0:
            raise ValueError("obstacle must not touch the origin")
        if self.param2 <= 0:
            raise ValueError("obstacle size must be positive")
        if self.kind == "half-disk" and self.param2 >= abs(self.param1):
            raise ValueError("half disk would cover the origin")

    @classmethod
    def vertical_slit(cls, x0: float, h: float) -> "SlitMap":
        return cls("vertical-slit", float(x0), float(h))

    @classmethod
    def half_disk(cls, x: float, rho: float) -> "SlitMap":
        return cls("half-disk", float(x), float(rho))

    # -- membership ----------------------------------------------------

    def on_obstacle(self, z, tol: float = 1e-12) -> bool:
        z = complex(z)
        if self.kind == "vertical-slit":
            x0, h = self.param1, self.param2
            return abs(z.real - x0) <= tol and -tol <= z.imag <= h + tol
        x, rho = self.param1, self.param2
        return abs(z - x) <= rho + tol and z.imag >= -tol

    def boundary_points(self, m: int = 128) -> np.ndarray:
        """Points along the obstacle's interface with the domain."""
        if self.kind == "vertical-slit":
            x0, h = self.param1, self.param2
            t = (np.arange(m) + 0.5) / m
            return x0 + 1j * h * t
        x, rho = self.param1, self.param2
        phi = np.pi * (np.arange(m) + 0.5) / m
        return x + rho * np.exp(1j * phi)

    def extent(self) -> float:
        """Diameter scale of the obstacle, distance from 0 included."""
        if self.kind == "vertical-slit":
            return abs(complex(self.param1, self.param2))
        return abs(self.param1) + self.param2

    # -- evaluation ----------------------------------------------------

    def eval(self, z):
        """Phi_A(z) for z in H minus the obstacle (boundary allowed)."""
        z = complex(z)
        if _is_inf(z):
            return COMPLEX_INFINITY
        if self.on_obstacle(z):
            raise ValueError(f"point {z} lies on the obstacle")
        if self.kind == "vertical-slit":
            return self._psi(z) - self._psi(0.0)
        x, rho = self.param1, self.param2
        return z + rho * rho / (z - x) + rho * rho / x

    def _psi(self, z):
        """sqrt((z-x0)^2 + h^2) with branch cut along the slit, ~ z - x0."""
        x0, h = self.param1, self.param2
        u = complex(z) - x0
        # principal sqrt of 1 + (h/u)^2 puts the cut exactly on the slit
        return u * cmath.sqrt(1.0 + (h / u) ** 2)

    def derivatives(self, z):
        """(f, f', f'', f''') at z, closed form."""
        z = complex(z)
        if self.on_obstacle(z):
            raise ValueError(f"point {z} lies on the obstacle")
        if self.kind == "vertical-slit":
            x0, h = self.param1, self.param2
            psi = self._psi(z)
            u = z - x0
            f = psi - self._psi(0.0)
            f1 = u / psi
            f2 = h * h / psi ** 3
            f3 = -3.0 * h * h * u / psi ** 5
            return f, f1, f2, f3
        x, rho = self.param1, self.param2
        u = z - x
        r2 = rho * rho
        f = z + r2 / u + r2 / x
        f1 = 1.0 - r2 / u ** 2
        f2 = 2.0 * r2 / u ** 3
        f3 = -6.0 * r2 / u ** 4
        return f, f1, f2, f3

    def derivative_at_zero(self) -> float:
        """Phi_A'(0), the restriction-probability base in (0, 1)."""
        return float(self.derivatives(0.0)[1].real)

    def __call__(self, z):
        return self.eval(z)


def restriction_probability(m: SlitMap, exponent: float = CHORDAL_RESTRICTION_EXPONENT) -> float:
    """Phi_A'(0)^exponent, the chance a restriction-family hull misses A."""
    return m.derivative_at_zero() ** exponent


# ---------------------------------------------------------------------------
# Schwarzian derivative
# ---------------------------------------------------------------------------


def _schwarzian_from_derivs(f1, f2, f3, z):
    if abs(f1) < 1e-12:
        raise SingularMapError(f"f'({z}) ~ 0, Schwarzian undefined")
    return f3 / f1 - 1.5 * (f2 / f1) ** 2


def _fd_derivatives(f, z, floor_step):
    """Central differences on a descending Richardson ladder.

    Returns (f1, f2, f3).  Steps shrink geometrically from a coarse start
    toward floor_step while a Neville table extrapolates in h^2; each
    derivative keeps the entry with the smallest bracketed error, so the
    result is read off before roundoff cancellation takes over (the raw
    third-difference at the floor step alone is only ~1e-4 accurate).
    """
    z = complex(z)
    con = 1.6
    con2 = con * con
    levels = 12
    h0 = floor_step * con ** (levels - 1)
    tabs = [np.empty((levels, levels), dtype=complex) for _ in range(3)]
    best = [None, None, None]
    best_err = [np.inf, np.inf, np.inf]
    f0 = f(z)
    h = h0
    for i in range(levels):
        fp1 = f(z + h)
        fm1 = f(z - h)
        fp2 = f(z + 2 * h)
        fm2 = f(z - 2 * h)
        vals = (
            (fp1 - fm1) / (2 * h),
            (fp1 - 2 * f0 + fm1) / (h * h),
            (fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * h ** 3),
        )
        for q in range(3):
            tab = tabs[q]
            tab[0, i] = vals[q]
            if i == 0:
                best[q] = vals[q]
                continue
            fac = con2
            for j in range(1, i + 1):
                tab[j, i] = (tab[j - 1, i] * fac - tab[j - 1, i - 1]) / (fac - 1.0)
                fac *= con2
                err = max(
                    abs(tab[j, i] - tab[j - 1, i]),
                    abs(tab[j, i] - tab[j - 1, i - 1]),
                )
                if err <= best_err[q]:
                    best_err[q] = err
                    best[q] = tab[j, i]
        h /= con
    return best[0], best[1], best[2]


def schwarzian(f, z, base_step: float = 1e-4):
    """Schwarzian derivative f'''/f' - (3/2)(f''/f')^2 at z.

    SlitMap arguments use stored closed-form derivatives; any other
    callable goes through Richardson-extrapolated central differences
    with base step base_step * max(1, |z|).
    """
    z = complex(z)
    if isinstance(f, SlitMap):
        _, f1, f2, f3 = f.derivatives(z)
        return _schwarzian_from_derivs(f1, f2, f3, z)
    step = base_step * max(1.0, abs(z))
    f1, f2, f3 = _fd_derivatives(f, z, step)
    return _schwarzian_from_derivs(f1, f2, f3, z)


def bubble_hit_measure(m: SlitMap) -> float:
    """Boundary-bubble measure of hulls hitting the obstacle: -(5/48) S(0)."""
    return float((-INTERIOR_RESTRICTION_EXPONENT * schwarzian(m, 0.0)).real)


# ---------------------------------------------------------------------------
# Radial (unit disk) restriction geometry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialRestrictionMap:
    """Obstacle at boundary point e^{i theta} of the disk, marked points 0 and 1.

    The obstacle is the Cayley preimage of the half-plane half disk centered
    at x = -cot(theta/2) with radius rho = delta / (2 sin^2(theta/2)); near
    e^{i theta} it is a half-disk-shaped bump of radius ~ delta.  Defining it
    through the preimage keeps every quantity closed form: the normalized map
    Psi : U -> D with Psi(0) = 0, Psi(1) = 1 is

        Psi = cayley_inverse . M . G . cayley,

    G the half-disk removal map and M the real affine map returning G(i)
    to i while fixing infinity.
    """

    theta: float
    delta: float

    def __post_init__(self):
        th = float(self.theta) % (2 * np.pi)
        if th == 0.0:
            raise ValueError("obstacle angle must avoid the marked point 1")
        object.__setattr__(self, "theta", th)
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.delta >= abs(1 - cmath.exp(1j * th)):
            raise ValueError("obstacle would reach the marked point 1")
        x, rho = self.halfplane_obstacle()
        if rho >= abs(complex(x, -1)):
            raise ValueError("obstacle would cover the marked interior point")

    def halfplane_obstacle(self):
        """(x, rho) of the transported half disk in H."""
        half = self.theta / 2.0
        x = -1.0 / np.tan(half)
        rho = self.delta / (2.0 * np.sin(half) ** 2)
        return float(x), float(rho)

    def contains(self, z) -> bool:
        """Obstacle membership for a disk point."""
        x, rho = self.halfplane_obstacle()
        w = cayley(z)
        if _is_inf(w):
            return False
        return abs(w - x) <= rho

    def probe_points(self, m: int = 128) -> np.ndarray:
        """Disk-side points along the obstacle's interface arc."""
        x, rho = self.halfplane_obstacle()
        phi = np.pi * (np.arange(m) + 0.5) / m
        w = x + rho * np.exp(1j * phi)
        return np.array([cayley_inverse(v) for v in w])

    def _halfplane_map(self) -> SlitMap:
        x, rho = self.halfplane_obstacle()
        return SlitMap.half_disk(x, rho)

    def eval(self, z):
        """Psi(z) for z in the disk minus the obstacle."""
        z = complex(z)
        if z == 1:
            return complex(1.0)
        x, rho = self.halfplane_obstacle()
        w = cayley(z)
        g = (w - x) + rho * rho / (w - x)
        p = self._image_of_i()
        v = (g - p.real) / p.imag
        return cayley_inverse(v)

    def _image_of_i(self):
        x, rho = self.halfplane_obstacle()
        u = 1j - x
        return u + rho * rho / u

    def factors(self):
        """(|Psi'(1)|, |Psi'(0)|, predicted avoidance probability).

        Chain rule through the four closed-form pieces: the boundary factor
        collapses to Im G(i) because the three maps at infinity compose to
        w -> w / Im G(i) up to translation, and the Cayley charts at 1 and
        infinity cancel; the interior factor is |G'(i)| / Im G(i).
        """
        x, rho = self.halfplane_obstacle()
        p = self._image_of_i()
        g1 = 1.0 - rho * rho / (1j - x) ** 2
        psi1 = p.imag
        psi0 = abs(g1) / p.imag
        prob = psi1 ** CHORDAL_RESTRICTION_EXPONENT * psi0 ** INTERIOR_RESTRICTION_EXPONENT
        return float(psi1), float(psi0), float(prob)

    def predicted_probability(self) -> float:
        return self.factors()[2]
