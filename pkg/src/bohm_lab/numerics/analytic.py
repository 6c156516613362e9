"""Closed-form reference amplitudes, energies and potentials.

Families:
- harmonic: V = m w^2 x^2 / 2, Hermite-Gaussian states, E_n = (n + 1/2) hbar w
- hydrogen_s: V = -e^2 / r, 1s state only, E_0 = -m e^4 / 2 hbar^2
- step: V_Q = 0 (x < 0), V0 (x >= 0); R = 1 then cos(k x), no discrete energy
- linear_airy: V_Q = kappa x; R = Ai(-k1^(1/3) x) (or Bi), no discrete energy
- box: hard walls on [0, L], sine states

Target quantum potentials carry no energy offset; the classical potential of
every family is the negated target.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from bohm_lab.errors import DomainError, NoDiscreteEnergyError
from bohm_lab.numerics.fields import (
    Field,
    FieldMeaning,
    Grid,
    GridKind,
    grid_from_spacing,
)
from bohm_lab.numerics.qpotential import PhysParams
from bohm_lab.numerics.specfun import AiryBranch, airy_array, hermite

logger = logging.getLogger(__name__)

MAX_REFERENCE_N = 20


class FamilyTag(str, Enum):
    """Reference families with closed-form solutions."""

    HARMONIC = "harmonic"
    HYDROGEN_S = "hydrogen_s"
    STEP = "step"
    LINEAR_AIRY = "linear_airy"
    BOX = "box"


# family -> the constant it requires
_REQUIRED_CONSTANT = {
    FamilyTag.HARMONIC: "omega",
    FamilyTag.HYDROGEN_S: "charge",
    FamilyTag.STEP: "v0",
    FamilyTag.LINEAR_AIRY: "kappa",
    FamilyTag.BOX: "length",
}


@dataclass(frozen=True)
class ReferenceFamily:
    """A reference family with its constants and physical parameters."""

    tag: FamilyTag
    p: PhysParams
    omega: Optional[float] = None
    charge: Optional[float] = None
    v0: Optional[float] = None
    kappa: Optional[float] = None
    length: Optional[float] = None
    branch: AiryBranch = AiryBranch.AI

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag", FamilyTag(self.tag))
        object.__setattr__(self, "branch", AiryBranch(self.branch))
        name = _REQUIRED_CONSTANT[self.tag]
        value = getattr(self, name)
        if value is None or not (math.isfinite(value) and value > 0.0):
            raise DomainError(f"{self.tag.value} family needs {name} > 0, got {value}")

    @classmethod
    def from_params(
        cls, family: str, params: Dict[str, Any], hbar: float = 1.0
    ) -> "ReferenceFamily":
        """Build from a flat parameter dict (fiducial catalogue or CLI flags).

        Raises:
            DomainError: On an unknown family, a missing mass or a bad constant.
        """
        try:
            tag = FamilyTag(family)
        except ValueError as e:
            raise DomainError(
                f"Unknown family {family!r}. Available: {[t.value for t in FamilyTag]}"
            ) from e
        if "mass" not in params:
            raise DomainError(f"{tag.value} family needs a mass")
        constants = {
            key: float(params[key])
            for key in ("omega", "charge", "v0", "kappa", "length")
            if params.get(key) is not None
        }
        return cls(
            tag=tag,
            p=PhysParams(mass=float(params["mass"]), hbar=float(params.get("hbar", hbar))),
            branch=AiryBranch(params.get("branch", "Ai")),
            **constants,
        )

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "family": self.tag.value,
            "mass": self.p.mass,
            "hbar": self.p.hbar,
        }
        name = _REQUIRED_CONSTANT[self.tag]
        out[name] = getattr(self, name)
        if self.tag == FamilyTag.LINEAR_AIRY:
            out["branch"] = self.branch.value
        return out

    # ----- derived scales -----

    @property
    def oscillator_length(self) -> float:
        """sqrt(hbar / m w)."""
        return math.sqrt(self.p.hbar / (self.p.mass * self.omega))

    @property
    def bohr_radius(self) -> float:
        """a0 = hbar^2 / (m e^2)."""
        return self.p.hbar**2 / (self.p.mass * self.charge**2)

    @property
    def step_wavenumber(self) -> float:
        """k = sqrt(2 m V0) / hbar."""
        return math.sqrt(2.0 * self.p.mass * self.v0) / self.p.hbar

    @property
    def linear_k1(self) -> float:
        """k1 = 2 m kappa / hbar^2."""
        return 2.0 * self.p.mass * self.kappa / self.p.hbar**2

    @property
    def is_normalizable(self) -> bool:
        return self.tag in (FamilyTag.HARMONIC, FamilyTag.HYDROGEN_S, FamilyTag.BOX)


def _check_n(fam: ReferenceFamily, n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError(f"Quantum number must be a non-negative integer, got {n}")
    if fam.tag in (FamilyTag.HARMONIC, FamilyTag.BOX):
        if n > MAX_REFERENCE_N:
            raise DomainError(f"{fam.tag.value} reference supports n <= {MAX_REFERENCE_N}, got {n}")
    elif n != 0:
        raise DomainError(f"{fam.tag.value} reference only has n = 0, got {n}")


def _as_output(x: Any, values: np.ndarray) -> Any:
    if np.ndim(x) == 0:
        return float(values)
    return values


# ===== REFERENCE VALUES =====


def reference_amplitude(fam: ReferenceFamily, n: int, x: float | np.ndarray) -> float | np.ndarray:
    """
    Closed-form amplitude R_n at x.

    Args:
        fam: Reference family
        n: Quantum number (0 only for hydrogen_s, step, linear_airy; <= 20 otherwise)
        x: Scalar or array position (radial coordinate for hydrogen_s)

    Raises:
        DomainError: On an unsupported n or negative r.

    Example:
        >>> fam = ReferenceFamily(FamilyTag.HARMONIC, PhysParams(mass=1.0), omega=0.5)
        >>> round(reference_amplitude(fam, 0, 0.0), 7)
        0.6316188
    """
    _check_n(fam, n)
    xa = np.asarray(x, dtype=float)
    m, hbar = fam.p.mass, fam.p.hbar

    if fam.tag == FamilyTag.HARMONIC:
        alpha = m * fam.omega / hbar
        xi = math.sqrt(alpha) * xa
        prefactor = (alpha / math.pi) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))
        values = prefactor * hermite(int(n), xi) * np.exp(-0.5 * xi * xi)
    elif fam.tag == FamilyTag.HYDROGEN_S:
        if np.any(xa < 0.0):
            raise DomainError("hydrogen_s amplitude is defined for r >= 0")
        a0 = fam.bohr_radius
        values = a0**-1.5 / math.sqrt(math.pi) * np.exp(-xa / a0)
    elif fam.tag == FamilyTag.STEP:
        values = np.where(xa < 0.0, 1.0, np.cos(fam.step_wavenumber * xa))
    elif fam.tag == FamilyTag.LINEAR_AIRY:
        arg = -(fam.linear_k1 ** (1.0 / 3.0)) * xa
        values = airy_array(fam.branch, arg).reshape(xa.shape)
    else:
        L = fam.length
        inside = (xa >= 0.0) & (xa <= L)
        values = np.where(inside, math.sqrt(2.0 / L) * np.sin((n + 1) * math.pi * xa / L), 0.0)

    return _as_output(x, np.asarray(values, dtype=float))


def reference_energy(fam: ReferenceFamily, n: int) -> float:
    """
    Discrete energy E_n of a normalizable family.

    Raises:
        NoDiscreteEnergyError: For the step and linear_airy families.
        DomainError: On an unsupported n.

    Example:
        >>> fam = ReferenceFamily(FamilyTag.HYDROGEN_S, PhysParams(mass=0.511), charge=1.0)
        >>> reference_energy(fam, 0)
        -0.2555
    """
    if not fam.is_normalizable:
        raise NoDiscreteEnergyError(
            f"{fam.tag.value} is a continuum example without a discrete energy"
        )
    _check_n(fam, n)
    m, hbar = fam.p.mass, fam.p.hbar
    if fam.tag == FamilyTag.HARMONIC:
        return (n + 0.5) * hbar * fam.omega
    if fam.tag == FamilyTag.HYDROGEN_S:
        return -m * fam.charge**4 / (2.0 * hbar**2)
    return (n + 1) ** 2 * math.pi**2 * hbar**2 / (2.0 * m * fam.length**2)


def reference_quantum_potential(fam: ReferenceFamily, x: float | np.ndarray) -> float | np.ndarray:
    """
    Target quantum potential as the figure captions state it (no E_0 offset).

    harmonic -m w^2 x^2 / 2; hydrogen_s e^2 / r (inf at r = 0); step 0 / V0;
    linear_airy kappa x; box 0.
    """
    xa = np.asarray(x, dtype=float)
    if fam.tag == FamilyTag.HARMONIC:
        values = -0.5 * fam.p.mass * fam.omega**2 * xa * xa
    elif fam.tag == FamilyTag.HYDROGEN_S:
        with np.errstate(divide="ignore"):
            values = fam.charge**2 / np.abs(xa)
    elif fam.tag == FamilyTag.STEP:
        values = np.where(xa < 0.0, 0.0, fam.v0)
    elif fam.tag == FamilyTag.LINEAR_AIRY:
        values = fam.kappa * xa
    else:
        values = np.zeros_like(xa)
    return _as_output(x, np.asarray(values, dtype=float))


def reference_classical_potential(
    fam: ReferenceFamily, x: float | np.ndarray
) -> float | np.ndarray:
    """Classical potential whose states the family describes: minus the target V_Q."""
    values = -np.asarray(reference_quantum_potential(fam, x), dtype=float)
    return _as_output(x, values + 0.0)


# ===== SAMPLED FIELDS =====


def _finite_origin(grid: Grid, values: np.ndarray) -> np.ndarray:
    # The radial solver never reads the origin; keep the Field finite there.
    if grid.kind == GridKind.RADIAL and not np.isfinite(values[0]):
        values = values.copy()
        values[0] = values[1]
    return values


def quantum_potential_field(fam: ReferenceFamily, grid: Grid) -> Field:
    """Target V_Q sampled on a grid (radial origin filled with V_Q(h))."""
    values = np.asarray(reference_quantum_potential(fam, grid.points), dtype=float)
    return Field(grid, _finite_origin(grid, values), FieldMeaning.POTENTIAL)


def classical_potential_field(fam: ReferenceFamily, grid: Grid) -> Field:
    """Classical V sampled on a grid (radial origin filled with V(h))."""
    values = np.asarray(reference_classical_potential(fam, grid.points), dtype=float)
    return Field(grid, _finite_origin(grid, values), FieldMeaning.POTENTIAL)


def amplitude_field(fam: ReferenceFamily, n: int, grid: Grid) -> Field:
    """Reference amplitude sampled on a grid (not renormalized)."""
    values = np.asarray(reference_amplitude(fam, n, grid.points), dtype=float)
    return Field(grid, values, FieldMeaning.AMPLITUDE)


def default_window(fam: ReferenceFamily) -> Tuple[GridKind, float, float, float]:
    """
    Default solve domain and spacing (kind, x_min, x_max, h).

    harmonic: [-12 l, 12 l], h = 0.01 l with l the oscillator length;
    hydrogen_s: [0, 30 a0], h = 0.0025 a0; box: [0, L], h = L / 1000.

    Raises:
        NoDiscreteEnergyError: For continuum families (no bound-state domain).
    """
    if fam.tag == FamilyTag.HARMONIC:
        ell = fam.oscillator_length
        return GridKind.CARTESIAN, -12.0 * ell, 12.0 * ell, 0.01 * ell
    if fam.tag == FamilyTag.HYDROGEN_S:
        a0 = fam.bohr_radius
        return GridKind.RADIAL, 0.0, 30.0 * a0, 0.0025 * a0
    if fam.tag == FamilyTag.BOX:
        return GridKind.CARTESIAN, 0.0, fam.length, fam.length / 1000.0
    raise NoDiscreteEnergyError(f"{fam.tag.value} has no bound-state domain")


def default_grid(fam: ReferenceFamily, h: Optional[float] = None) -> Grid:
    """Grid over the default window, optionally at a caller spacing."""
    kind, x_min, x_max, h_default = default_window(fam)
    return grid_from_spacing(kind, x_min, x_max, h or h_default)
