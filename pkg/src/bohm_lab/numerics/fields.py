"""Grids, sampled fields and finite-difference calculus.

Defines the substrate every other module computes on:
- GridKind / Grid: uniform 1D lattice on the line or the radial half-line
- FieldMeaning / Field: immutable real samples on a Grid
- MaskedField: a Field plus a validity mask (nodes, endpoints)
- laplacian, gradient, normalize, integrate, restrict: O(h^2) calculus

Radial fields live on r >= 0 with measure 4*pi*r^2 dr and the s-wave
Laplacian f'' + (2/r) f'.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.integrate import trapezoid

from bohm_lab.errors import DomainError, NormalizationError

logger = logging.getLogger(__name__)

NORMALIZED_TOL = 1e-8


class GridKind(str, Enum):
    """Geometry of the lattice."""

    CARTESIAN = "cartesian"
    RADIAL = "radial"


class FieldMeaning(str, Enum):
    """What a sampled field represents."""

    AMPLITUDE = "amplitude"
    POTENTIAL = "potential"
    DENSITY = "density"
    GENERIC = "generic"


# ===== GRID =====


@dataclass(frozen=True)
class Grid:
    """Uniform lattice x_i = x_min + i*h, i = 0..n-1."""

    kind: GridKind
    x_min: float
    x_max: float
    n: int

    @property
    def h(self) -> float:
        """Lattice spacing (x_max - x_min)/(n - 1)."""
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        """Lattice points, reproducible from (x_min, h, i)."""
        return self.x_min + np.arange(self.n) * self.h

    @property
    def coordinate_name(self) -> str:
        return "r" if self.kind == GridKind.RADIAL else "x"

    def measure(self) -> np.ndarray:
        """Integration weight per point: 1 (cartesian) or 4*pi*r^2 (radial)."""
        if self.kind == GridKind.RADIAL:
            r = self.points
            return 4.0 * np.pi * r * r
        return np.ones(self.n)

    def index_of(self, x: float, rtol: float = 1e-9) -> int:
        """Index of the lattice point equal to x.

        Raises:
            DomainError: If x is not a lattice point.
        """
        i = int(round((x - self.x_min) / self.h))
        if i < 0 or i >= self.n or abs(self.x_min + i * self.h - x) > rtol * max(1.0, abs(x)):
            raise DomainError(f"{x} is not a point of {self.describe()}")
        return i

    def matches(self, other: "Grid") -> bool:
        return (
            self.kind == other.kind
            and self.n == other.n
            and self.x_min == other.x_min
            and self.x_max == other.x_max
        )

    def describe(self) -> str:
        return f"{self.kind.value} grid [{self.x_min}, {self.x_max}] n={self.n} h={self.h:.6g}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "n": self.n,
            "h": self.h,
        }


def make_uniform_grid(kind: GridKind | str, x_min: float, x_max: float, n: int) -> Grid:
    """
    Build a uniform grid.

    Args:
        kind: "cartesian" or "radial"
        x_min: Left end (radial: r_min >= 0)
        x_max: Right end, strictly greater than x_min
        n: Number of points, at least 3

    Returns:
        Grid with spacing h = (x_max - x_min)/(n - 1)

    Raises:
        DomainError: On invalid bounds, n < 3, or negative radial start.

    Example:
        >>> make_uniform_grid("cartesian", 0.0, 1.0, 5).h
        0.25
    """
    try:
        kind = GridKind(kind)
    except ValueError as e:
        raise DomainError(f"Unknown grid kind {kind!r}") from e
    if not (np.isfinite(x_min) and np.isfinite(x_max)):
        raise DomainError(f"Grid bounds must be finite, got [{x_min}, {x_max}]")
    if n < 3:
        raise DomainError(f"Grid needs at least 3 points, got n={n}")
    if not x_min < x_max:
        raise DomainError(f"Grid requires x_min < x_max, got [{x_min}, {x_max}]")
    if kind == GridKind.RADIAL and x_min < 0.0:
        raise DomainError(f"Radial grid cannot start at r={x_min} < 0")
    return Grid(kind=kind, x_min=float(x_min), x_max=float(x_max), n=int(n))


def grid_from_spacing(kind: GridKind | str, x_min: float, x_max: float, h: float) -> Grid:
    """Grid with the point count that realises spacing h (rounded)."""
    if not h > 0.0:
        raise DomainError(f"Grid spacing must be positive, got h={h}")
    n = int(round((x_max - x_min) / h)) + 1
    return make_uniform_grid(kind, x_min, x_max, n)


# ===== FIELDS =====


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Field:
    """Real samples on a grid. Immutable after construction."""

    grid: Grid
    values: np.ndarray
    meaning: FieldMeaning = FieldMeaning.GENERIC
    normalized: bool = False

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        if values.shape != (self.grid.n,):
            raise DomainError(
                f"Field has {values.shape} values for a grid of {self.grid.n} points"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("Field values must be finite (use MaskedField for invalid points)")
        object.__setattr__(self, "values", values)
        if self.normalized:
            if self.meaning != FieldMeaning.AMPLITUDE:
                raise DomainError("Only amplitudes carry a normalized flag")
            norm2 = norm_squared(self)
            if abs(norm2 - 1.0) > NORMALIZED_TOL:
                raise NormalizationError(f"normalized flag set but norm^2 = {norm2:.12g}")

    def with_values(self, values: np.ndarray, meaning: Optional[FieldMeaning] = None) -> "Field":
        return Field(self.grid, values, meaning or self.meaning)

    def scaled(self, c: float) -> "Field":
        return Field(self.grid, c * self.values, self.meaning)

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values, self.meaning)


@dataclass(frozen=True)
class MaskedField:
    """A field whose entries are valid only where mask is True.

    Masked entries of ``base`` hold 0.0; use ``as_array`` for a NaN-filled view.
    """

    base: Field
    mask: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        mask = np.array(self.mask, dtype=bool, copy=True)
        if mask.shape != (self.base.grid.n,):
            raise DomainError("Mask length does not match the grid")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_array(
        cls,
        grid: Grid,
        values: np.ndarray,
        mask: np.ndarray,
        meaning: FieldMeaning = FieldMeaning.GENERIC,
    ) -> "MaskedField":
        """Build from raw values; non-finite entries are masked out."""
        values = np.asarray(values, dtype=float)
        mask = np.asarray(mask, dtype=bool) & np.isfinite(values)
        clean = np.where(mask, values, 0.0)
        return cls(Field(grid, clean, meaning), mask)

    @classmethod
    def unmasked(cls, f: Field) -> "MaskedField":
        return cls(f, np.ones(f.grid.n, dtype=bool))

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    @property
    def valid_values(self) -> np.ndarray:
        return self.base.values[self.mask]

    @property
    def masked_fraction(self) -> float:
        return float(1.0 - self.mask.mean())

    def as_array(self) -> np.ndarray:
        """Values with masked entries replaced by NaN."""
        return np.where(self.mask, self.base.values, np.nan)

    def max_abs(self) -> float:
        valid = self.valid_values
        return float(np.max(np.abs(valid))) if valid.size else 0.0

    def rms(self) -> float:
        valid = self.valid_values
        return float(np.sqrt(np.mean(valid * valid))) if valid.size else 0.0


def sample(
    grid: Grid, fn: Callable[[np.ndarray], np.ndarray], meaning: FieldMeaning = FieldMeaning.GENERIC
) -> Field:
    """Evaluate a vectorised function on the grid points."""
    return Field(grid, np.asarray(fn(grid.points), dtype=float), meaning)


# ===== CALCULUS =====


def laplacian(f: Field, even_symmetry: bool = False) -> MaskedField:
    """
    Second-order finite-difference Laplacian.

    Cartesian: (f[i-1] - 2 f[i] + f[i+1]) / h^2.
    Radial: f'' + (2/r) f' with central differences (s-wave Laplacian).

    Endpoints carry the value of the nearest interior point and are masked.
    On a radial grid that starts at r = 0 the origin is masked as well, unless
    ``even_symmetry`` is set, in which case the mirror stencil gives
    laplacian(0) = 3 f''(0) = 6 (f[1] - f[0]) / h^2 and the origin is valid.

    Args:
        f: Field with at least 3 points
        even_symmetry: Caller asserts f is even about r = 0

    Returns:
        MaskedField of the Laplacian
    """
    grid = f.grid
    h = grid.h
    v = f.values
    out = np.empty_like(v)
    out[1:-1] = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / (h * h)

    if grid.kind == GridKind.RADIAL:
        r = grid.points[1:-1]
        out[1:-1] += (2.0 / r) * (v[2:] - v[:-2]) / (2.0 * h)

    out[0] = out[1]
    out[-1] = out[-2]
    mask = np.ones(grid.n, dtype=bool)
    mask[0] = mask[-1] = False

    if grid.kind == GridKind.RADIAL and grid.x_min == 0.0 and even_symmetry:
        out[0] = 6.0 * (v[1] - v[0]) / (h * h)
        mask[0] = True

    return MaskedField(Field(grid, out, FieldMeaning.GENERIC), mask)


def gradient(f: Field) -> MaskedField:
    """Central first difference; endpoints copied from neighbours and masked."""
    h = f.grid.h
    v = f.values
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = out[1]
    out[-1] = out[-2]
    mask = np.ones(f.grid.n, dtype=bool)
    mask[0] = mask[-1] = False
    return MaskedField(Field(f.grid, out, FieldMeaning.GENERIC), mask)


def integrate(f: Field) -> float:
    """Trapezoidal integral of f with the grid measure (dx or 4*pi*r^2 dr)."""
    return float(trapezoid(f.values * f.grid.measure(), dx=f.grid.h))


def norm_squared(f: Field) -> float:
    """Integral of f^2 with the grid measure."""
    return float(trapezoid(f.values * f.values * f.grid.measure(), dx=f.grid.h))


def normalize(f: Field) -> Field:
    """
    Scale an amplitude to unit norm.

    Args:
        f: Field with meaning amplitude

    Returns:
        c*f with integral of (c f)^2 d(mu) = 1, normalized flag set

    Raises:
        DomainError: If f is not an amplitude.
        NormalizationError: If the norm is zero or not finite.

    Example:
        >>> g = make_uniform_grid("cartesian", -10, 10, 2001)
        >>> R = normalize(sample(g, lambda x: np.exp(-x**2 / 2), FieldMeaning.AMPLITUDE))
        >>> round(float(R.values[1000]), 4)
        0.7511
    """
    if f.meaning != FieldMeaning.AMPLITUDE:
        raise DomainError(f"normalize expects an amplitude, got {f.meaning.value}")
    norm2 = norm_squared(f)
    if not np.isfinite(norm2) or norm2 <= 0.0:
        raise NormalizationError(f"Cannot normalize: norm^2 = {norm2}")
    c = 1.0 / np.sqrt(norm2)
    return Field(f.grid, c * f.values, FieldMeaning.AMPLITUDE, normalized=True)


def restrict(f: Field, x_min: float, x_max: float) -> Field:
    """
    Sub-window of a field on the same lattice.

    The window ends are snapped to the nearest lattice points.

    Raises:
        DomainError: If the window leaves the grid or has fewer than 3 points.
    """
    g = f.grid
    i0 = int(round((x_min - g.x_min) / g.h))
    i1 = int(round((x_max - g.x_min) / g.h))
    if i0 < 0 or i1 >= g.n or i1 - i0 < 2:
        raise DomainError(f"Window [{x_min}, {x_max}] is not inside {g.describe()}")
    sub = Grid(g.kind, g.x_min + i0 * g.h, g.x_min + i1 * g.h, i1 - i0 + 1)
    return Field(sub, f.values[i0 : i1 + 1], f.meaning)


def add(a: Field, b: Field) -> Field:
    """Pointwise sum of two fields on the same grid."""
    if not a.grid.matches(b.grid):
        raise DomainError(f"Grid mismatch: {a.grid.describe()} vs {b.grid.describe()}")
    return Field(a.grid, a.values + b.values, a.meaning)
