"""Special functions for the analytic references: Airy Ai/Bi and Hermite H_n.

Airy strategy (real argument, |x| <= 40):
- Maclaurin series: Ai = c1 f - c2 g, Bi = sqrt(3) (c1 f + c2 g), where f, g are
  the two power-series solutions of y'' = x y. Used on [-7, 8] for Bi and on
  [-7, 2] for Ai.
- Ai on (2, 8]: the series cancels catastrophically there, so the value is
  carried from x = 8 by Taylor steps of y'' = x y, integrating towards smaller
  x (the direction in which Ai grows and Bi decays).
- Asymptotic expansions beyond: |x| > 7 on the oscillatory side, x > 8 on the
  exponential side.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from bohm_lab.errors import AiryRangeError, DomainError

logger = logging.getLogger(__name__)

# Ai(0) = 3^(-2/3)/Gamma(2/3), -Ai'(0) = 3^(-1/3)/Gamma(1/3)
AI0 = 0.35502805388781723926
AIP0_NEG = 0.25881940379280679840
SQRT3 = 1.7320508075688772935
SQRT_PI = 1.7724538509055160273

AIRY_MAX_ABS_X = 40.0
NEGATIVE_SPLIT = -7.0
POSITIVE_SPLIT = 8.0
AI_SERIES_LIMIT = 2.0
TAYLOR_STEP = 0.5

HERMITE_MAX_N = 50

_EPS = 1e-17
_MAX_SERIES_TERMS = 200


class AiryBranch(str, Enum):
    """The two Airy solutions."""

    AI = "Ai"
    BI = "Bi"


@dataclass(frozen=True)
class AiryValue:
    """Airy function value, its derivative, and whether Ai underflowed."""

    value: float
    derivative: float
    underflow: bool = False


# ===== MACLAURIN SERIES =====


def _maclaurin(x: float) -> Tuple[float, float, float, float]:
    """f, f', g, g' of the two power-series solutions of y'' = x y."""
    x3 = x * x * x
    f, fp = 1.0, 0.0
    g, gp = x, 1.0
    tf, tg = 1.0, x
    for k in range(_MAX_SERIES_TERMS):
        tf *= x3 / ((3 * k + 2) * (3 * k + 3))
        tg *= x3 / ((3 * k + 3) * (3 * k + 4))
        f += tf
        g += tg
        if x != 0.0:
            fp += (3 * k + 3) * tf / x
            gp += (3 * k + 4) * tg / x
        if abs(tf) <= _EPS * abs(f) and abs(tg) <= _EPS * max(abs(g), 1e-300):
            break
    return f, fp, g, gp


def _series(branch: AiryBranch, x: float) -> AiryValue:
    f, fp, g, gp = _maclaurin(x)
    if branch == AiryBranch.AI:
        return AiryValue(AI0 * f - AIP0_NEG * g, AI0 * fp - AIP0_NEG * gp)
    return AiryValue(SQRT3 * (AI0 * f + AIP0_NEG * g), SQRT3 * (AI0 * fp + AIP0_NEG * gp))


# ===== ASYMPTOTIC EXPANSIONS =====


def _asymptotic_coefficients(zeta: float) -> Tuple[list, list]:
    """u_k, v_k up to the smallest term for the given zeta."""
    u = [1.0]
    v = [1.0]
    k = 1
    while k < 60:
        uk = u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        vk = -(6 * k + 1) / (6 * k - 1) * uk
        # stop before the terms start to grow (optimal truncation)
        if abs(uk) / zeta**k >= abs(u[-1]) / zeta ** (k - 1) or abs(uk) / zeta**k < _EPS:
            break
        u.append(uk)
        v.append(vk)
        k += 1
    return u, v


def _asymptotic_positive(branch: AiryBranch, x: float) -> AiryValue:
    zeta = 2.0 / 3.0 * x**1.5
    u, v = _asymptotic_coefficients(zeta)
    quarter = x**0.25
    if branch == AiryBranch.AI:
        su = sum((-1) ** k * uk / zeta**k for k, uk in enumerate(u))
        sv = sum((-1) ** k * vk / zeta**k for k, vk in enumerate(v))
        e = math.exp(-zeta)
        return AiryValue(e * su / (2.0 * SQRT_PI * quarter), -quarter * e * sv / (2.0 * SQRT_PI))
    su = sum(uk / zeta**k for k, uk in enumerate(u))
    sv = sum(vk / zeta**k for k, vk in enumerate(v))
    e = math.exp(zeta)
    return AiryValue(e * su / (SQRT_PI * quarter), quarter * e * sv / SQRT_PI)


def _asymptotic_negative(branch: AiryBranch, x: float) -> AiryValue:
    z = -x
    zeta = 2.0 / 3.0 * z**1.5
    u, v = _asymptotic_coefficients(zeta)
    u_even = sum((-1) ** (k // 2) * uk / zeta**k for k, uk in enumerate(u) if k % 2 == 0)
    u_odd = sum((-1) ** (k // 2) * uk / zeta**k for k, uk in enumerate(u) if k % 2 == 1)
    v_even = sum((-1) ** (k // 2) * vk / zeta**k for k, vk in enumerate(v) if k % 2 == 0)
    v_odd = sum((-1) ** (k // 2) * vk / zeta**k for k, vk in enumerate(v) if k % 2 == 1)
    c = math.cos(zeta - math.pi / 4.0)
    s = math.sin(zeta - math.pi / 4.0)
    quarter = z**0.25
    if branch == AiryBranch.AI:
        value = (c * u_even + s * u_odd) / (SQRT_PI * quarter)
        derivative = quarter * (s * v_even - c * v_odd) / SQRT_PI
    else:
        value = (-s * u_even + c * u_odd) / (SQRT_PI * quarter)
        derivative = quarter * (c * v_even + s * v_odd) / SQRT_PI
    return AiryValue(value, derivative)


# ===== TAYLOR CONTINUATION =====


def _taylor_step(x0: float, y: float, yp: float, delta: float) -> Tuple[float, float]:
    """Advance (y, y') of y'' = x y from x0 to x0 + delta by its Taylor series.

    Coefficients obey (j+2)(j+1) a[j+2] = x0 a[j] + a[j-1].
    """
    coeffs = [y, yp, x0 * y / 2.0]
    for j in range(1, _MAX_SERIES_TERMS):
        a_next = (x0 * coeffs[j] + coeffs[j - 1]) / ((j + 2) * (j + 1))
        coeffs.append(a_next)
        if j > 4 and abs(a_next) * abs(delta) ** (j + 2) <= _EPS * abs(y):
            break
    value = 0.0
    slope = 0.0
    for k in range(len(coeffs) - 1, -1, -1):
        value = value * delta + coeffs[k]
    for k in range(len(coeffs) - 1, 0, -1):
        slope = slope * delta + k * coeffs[k]
    return value, slope


def _ai_continued(x: float) -> AiryValue:
    start = _asymptotic_positive(AiryBranch.AI, POSITIVE_SPLIT)
    y, yp = start.value, start.derivative
    x0 = POSITIVE_SPLIT
    while x0 - x > 1e-15:
        delta = -min(TAYLOR_STEP, x0 - x)
        y, yp = _taylor_step(x0, y, yp, delta)
        x0 += delta
    return AiryValue(y, yp)


# ===== PUBLIC API =====


def airy_eval(branch: AiryBranch | str, x: float) -> AiryValue:
    """
    Airy function and derivative at real x.

    Args:
        branch: "Ai" or "Bi"
        x: Finite real argument, |x| <= 40 for Bi

    Returns:
        AiryValue(value, derivative, underflow)

    Raises:
        DomainError: If x is not finite.
        AiryRangeError: If Bi is requested beyond x = 40.

    Example:
        >>> round(airy_eval("Ai", 0.0).value, 16)
        0.3550280538878172
    """
    branch = AiryBranch(branch)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"Airy argument must be finite, got {x}")

    if abs(x) > AIRY_MAX_ABS_X:
        if branch == AiryBranch.AI and x > 0.0:
            logger.debug(f"Ai({x}) underflows; returning 0")
            return AiryValue(0.0, 0.0, underflow=True)
        if branch == AiryBranch.BI and x > 0.0:
            raise AiryRangeError(f"Bi({x}) overflows double precision (|x| > {AIRY_MAX_ABS_X})")
        raise DomainError(f"Airy argument {x} outside the supported range |x| <= {AIRY_MAX_ABS_X}")

    if x < NEGATIVE_SPLIT:
        return _asymptotic_negative(branch, x)
    if x > POSITIVE_SPLIT:
        return _asymptotic_positive(branch, x)
    if branch == AiryBranch.AI and x > AI_SERIES_LIMIT:
        return _ai_continued(x)
    return _series(branch, x)


def airy(branch: AiryBranch | str, x: float) -> float:
    """Airy function value Ai(x) or Bi(x)."""
    return airy_eval(branch, x).value


def airy_array(branch: AiryBranch | str, x: np.ndarray) -> np.ndarray:
    """Airy values on an array of arguments."""
    return np.array([airy_eval(branch, xi).value for xi in np.asarray(x, dtype=float).ravel()])


def hermite(n: int, x: float | np.ndarray) -> float | np.ndarray:
    """
    Physicists' Hermite polynomial H_n(x) by upward recurrence.

    H_0 = 1, H_1 = 2x, H_{k+1} = 2x H_k - 2k H_{k-1}.

    Args:
        n: Degree, 0 <= n <= 50
        x: Scalar or array

    Raises:
        DomainError: If n is outside [0, 50].

    Example:
        >>> hermite(3, 2.0)
        40.0
    """
    if not isinstance(n, (int, np.integer)) or n < 0 or n > HERMITE_MAX_N:
        raise DomainError(f"Hermite degree must be an integer in [0, {HERMITE_MAX_N}], got {n}")
    x_arr = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x_arr)
    if n == 0:
        result = h_prev
    else:
        h = 2.0 * x_arr
        for k in range(1, n):
            h_prev, h = h, 2.0 * x_arr * h - 2.0 * k * h_prev
        result = h
    if np.ndim(x) == 0:
        return float(result)
    return result
