#!/usr/bin/env python3
"""
Even/odd Schrödinger cat states and their finite-dimensional approximations.

A cat |beta_±> = N_±(|-beta> ± |beta>) is expanded over the displaced
number basis {D(i*alpha)|k>}. Truncating that expansion after n+1 terms
gives the cat qudit (SCQ), which is also characterized by the n roots of
its polynomial in the creation operator.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import minimize_scalar

from catengine.errors import (
    CutoffTooSmall,
    DegenerateQudit,
    LeadingTermVanishes,
    NonConvergence,
)
from catengine.fock_core import (
    FockVector,
    auto_cutoff,
    check_coherent_tail,
    coherent_superposition,
    creation_matrix,
    displace,
    displacement_matrix,
    log_sqrt_factorials,
    sqrt_factorials,
)

logger = logging.getLogger(__name__)

DEGENERATE_NORM = 1e-300
LEADING_TERM_TOLERANCE = 1e-12
ROOT_RESIDUAL = 1e-12
ROOT_MAX_ITERATIONS = 500
ALPHA_SCAN_LIMIT = 5.0
ALPHA_SCAN_POINTS = 201

# Trigonometric factors this close to zero are exact zeros (parity selection).
_TRIG_SNAP = 1e-13
_I_POWERS = np.array([1.0, 1j, -1.0, -1j])


class Parity(Enum):
    """Photon-number parity of a cat state."""
    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> int:
        return 1 if self is Parity.EVEN else -1

    @classmethod
    def parse(cls, value) -> "Parity":
        if isinstance(value, Parity):
            return value
        return cls(str(value).strip().lower())


@dataclass(frozen=True)
class CatSpec:
    """Target cat: real beta > 0, parity, and the real representation displacement alpha."""
    beta: float
    parity: Parity
    alpha: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "parity", Parity.parse(self.parity))
        beta = float(self.beta)
        alpha = float(self.alpha)
        if not math.isfinite(beta) or beta <= 0.0:
            raise ValueError(f"cat amplitude beta must be positive, got {self.beta!r}")
        if not math.isfinite(alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha!r}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "alpha", alpha)

    @property
    def radius(self) -> float:
        """sqrt(alpha^2 + beta^2)."""
        return math.hypot(self.alpha, self.beta)

    @property
    def phase(self) -> float:
        """arctan(alpha / beta)."""
        return math.atan2(self.alpha, self.beta)

    @property
    def norm_factor(self) -> float:
        """N_± = (2(1 ± exp(-2 beta^2)))^(-1/2)."""
        overlap = math.exp(-2.0 * self.beta ** 2)
        if self.parity is Parity.EVEN:
            return 1.0 / math.sqrt(2.0 * (1.0 + overlap))
        return 1.0 / math.sqrt(-2.0 * math.expm1(-2.0 * self.beta ** 2))

    def with_alpha(self, alpha: float) -> "CatSpec":
        return CatSpec(self.beta, self.parity, alpha)

    def to_dict(self) -> dict:
        return {"beta": self.beta, "parity": self.parity.value, "alpha": self.alpha}


@dataclass(frozen=True)
class CreationPolynomial:
    """sum_k coeffs[k] (a^dagger)^k; index is the power."""
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=np.complex128).reshape(-1)
        if coeffs.size == 0 or coeffs[-1] == 0:
            raise ValueError("CreationPolynomial needs a nonzero leading coefficient")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return P.polyval(z, self.coeffs)

    def monic(self) -> "CreationPolynomial":
        return CreationPolynomial(self.coeffs / self.coeffs[-1])

    def fock_amplitudes(self, cutoff: Optional[int] = None) -> np.ndarray:
        """Amplitudes of f(a^dagger)|0>: coefficient k times sqrt(k!)."""
        cutoff = self.degree if cutoff is None else cutoff
        if cutoff < self.degree:
            raise CutoffTooSmall(f"cutoff {cutoff} below polynomial degree {self.degree}")
        amps = np.zeros(cutoff + 1, dtype=np.complex128)
        amps[: self.coeffs.size] = self.coeffs * sqrt_factorials(self.degree)
        return amps

    @classmethod
    def from_fock_amplitudes(cls, amplitudes: Sequence[complex], tolerance: float = 1e-10) -> "CreationPolynomial":
        """Inverse of fock_amplitudes; trailing coefficients below tolerance * max are dropped."""
        amps = np.asarray(amplitudes, dtype=np.complex128)
        coeffs = amps * np.exp(-log_sqrt_factorials(amps.size - 1))
        scale = np.max(np.abs(coeffs)) if coeffs.size else 0.0
        if scale == 0.0:
            raise ValueError("zero vector has no creation polynomial")
        keep = np.nonzero(np.abs(coeffs) > tolerance * scale)[0]
        return cls(coeffs[: keep[-1] + 1])


@dataclass(frozen=True)
class RootSet:
    """Roots with multiplicity; scale * prod(z - z_j) is the source polynomial."""
    roots: np.ndarray
    scale: complex = 1.0

    def __post_init__(self) -> None:
        roots = np.array(self.roots, dtype=np.complex128).reshape(-1)
        roots.setflags(write=False)
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "scale", complex(self.scale))

    def __len__(self) -> int:
        return self.roots.size

    def polynomial(self) -> CreationPolynomial:
        return CreationPolynomial(self.scale * P.polyfromroots(self.roots))


# ---------------------------------------------------------------------------
# Cat states
# ---------------------------------------------------------------------------

def scs_vector(spec: CatSpec, cutoff: Optional[int] = None) -> FockVector:
    """
    N_±(|-beta> ± |beta>) in the Fock basis.

    Built from the real coherent amplitudes so the suppressed parity is
    exactly zero rather than a rounding residue.
    """
    cutoff = auto_cutoff([spec.beta]) if cutoff is None else cutoff
    check_coherent_tail(spec.beta, cutoff)
    n = np.arange(cutoff + 1)
    magnitude = np.exp(-0.5 * spec.beta ** 2 + n * math.log(spec.beta) - log_sqrt_factorials(cutoff))
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    amps = spec.norm_factor * magnitude * (signs + spec.parity.sign)
    return FockVector(amps.astype(np.complex128))


def displaced_scs_vector(
    spec: CatSpec,
    shift: complex,
    cutoff: Optional[int] = None,
    strict: bool = True,
) -> FockVector:
    """D(shift)|beta_±>, using D(d)|g> = exp(i Im(d g*)) |d + g>."""
    shift = complex(shift)
    if cutoff is None:
        cutoff = auto_cutoff([shift + spec.beta, shift - spec.beta])
    weights = [
        spec.norm_factor * np.exp(1j * (-spec.beta * shift.imag)),
        spec.parity.sign * spec.norm_factor * np.exp(1j * (spec.beta * shift.imag)),
    ]
    return coherent_superposition(weights, [shift - spec.beta, shift + spec.beta], cutoff, strict=strict)


def _trig_factors(spec: CatSpec, k: np.ndarray) -> np.ndarray:
    angles = spec.alpha * spec.beta + k * (spec.phase + 0.5 * math.pi)
    values = np.cos(angles) if spec.parity is Parity.EVEN else np.sin(angles)
    return np.where(np.abs(values) < _TRIG_SNAP, 0.0, values)


def alpha_rep_amplitudes(spec: CatSpec, n_max: int) -> np.ndarray:
    """
    Coefficients a_k of D(-i alpha)|beta_±> = N_± exp(-radius^2/2) sum_k a_k |k>.

    a_k = 2 (i radius)^k / sqrt(k!) cos(alpha beta + k(phase + pi/2)) for even
    cats, and i times the same with sin for odd ones.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    k = np.arange(n_max + 1)
    magnitude = 2.0 * np.exp(k * math.log(spec.radius) - log_sqrt_factorials(n_max))
    amps = magnitude * _I_POWERS[k % 4] * _trig_factors(spec, k)
    if spec.parity is Parity.ODD:
        amps = 1j * amps
    return amps.astype(np.complex128)


def kitten_approximation(beta_in: float, parity, cutoff: Optional[int] = None) -> FockVector:
    """Two-term small-amplitude cat: |0> + b^2/sqrt(2)|2> or |1> + b^2/sqrt(6)|3>, normalized."""
    parity = Parity.parse(parity)
    cutoff = 3 if cutoff is None else cutoff
    if cutoff < 3:
        raise CutoffTooSmall(f"cutoff {cutoff} too small for the two-term kitten (need >= 3)")
    amps = np.zeros(cutoff + 1, dtype=np.complex128)
    if parity is Parity.EVEN:
        amps[0], amps[2] = 1.0, beta_in ** 2 / math.sqrt(2.0)
    else:
        amps[1], amps[3] = 1.0, beta_in ** 2 / math.sqrt(6.0)
    return FockVector(amps).normalized()


# ---------------------------------------------------------------------------
# Cat qudits
# ---------------------------------------------------------------------------

def _qudit_coefficients(n: int, spec: CatSpec) -> Tuple[np.ndarray, float]:
    if n < 0:
        raise ValueError(f"qudit order n must be non-negative, got {n}")
    amps = alpha_rep_amplitudes(spec, n)
    weight = float(np.sum(np.abs(amps) ** 2))
    if weight <= DEGENERATE_NORM:
        raise DegenerateQudit(
            f"every retained term vanishes for n={n}, beta={spec.beta}, alpha={spec.alpha}, {spec.parity.value}"
        )
    return amps, weight


def scq_vector(n: int, spec: CatSpec, cutoff: Optional[int] = None) -> FockVector:
    """(n+1)-term truncation of the cat over {D(i alpha)|k>}, normalized, in the Fock basis."""
    amps, weight = _qudit_coefficients(n, spec)
    cutoff = auto_cutoff([spec.alpha], photons=n) if cutoff is None else cutoff
    if cutoff < n:
        raise CutoffTooSmall(f"cutoff {cutoff} below qudit order {n}")
    local = FockVector(np.pad(amps / math.sqrt(weight), (0, cutoff - n)))
    return displace(local, 1j * spec.alpha, cutoff)


def scq_fidelity(n: int, spec: CatSpec) -> float:
    """Exact |<SCQ_n|beta_±>|^2 = N_±^2 exp(-radius^2) sum_{k<=n} |a_k|^2."""
    _, weight = _qudit_coefficients(n, spec)
    log_value = 2.0 * math.log(spec.norm_factor) - spec.radius ** 2 + math.log(weight)
    return float(min(1.0, math.exp(log_value)))


def _safe_scq_fidelity(n: int, beta: float, parity: Parity, alpha: float) -> float:
    try:
        return scq_fidelity(n, CatSpec(beta, parity, alpha))
    except DegenerateQudit:
        return 0.0


def scq_upper_bound(
    n: int,
    beta: float,
    parity,
    alpha_mode: str = "maximized",
    alpha: float = 0.0,
) -> Tuple[float, float]:
    """
    Fidelity of the genuine n-photon cat qudit with the cat.

    ``alpha_mode="fixed"`` evaluates at ``alpha``; ``"maximized"`` scans real
    alpha in [-5, 5] on a grid and refines the best cell with a bounded
    scalar search. Returns (fidelity, alpha_used).
    """
    parity = Parity.parse(parity)
    if alpha_mode == "fixed":
        return _safe_scq_fidelity(n, beta, parity, alpha), float(alpha)
    if alpha_mode != "maximized":
        raise ValueError(f"alpha_mode must be 'fixed' or 'maximized', got {alpha_mode!r}")

    grid = np.linspace(-ALPHA_SCAN_LIMIT, ALPHA_SCAN_LIMIT, ALPHA_SCAN_POINTS)
    values = np.array([_safe_scq_fidelity(n, beta, parity, a) for a in grid])
    best = int(np.argmax(values))
    step = grid[1] - grid[0]
    lo = max(-ALPHA_SCAN_LIMIT, grid[best] - step)
    hi = min(ALPHA_SCAN_LIMIT, grid[best] + step)
    refined = minimize_scalar(
        lambda a: -_safe_scq_fidelity(n, beta, parity, a),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    if -refined.fun > values[best]:
        return float(-refined.fun), float(refined.x)
    return float(values[best]), float(grid[best])


def scq_polynomial(n: int, spec: CatSpec) -> CreationPolynomial:
    """
    Monic polynomial f with SCQ proportional to f(a^dagger)|0> before D(i alpha).

    Coefficient k is n! (i radius)^(k-n) trig_k / (k! trig_n).
    """
    if n < 0:
        raise ValueError(f"qudit order n must be non-negative, got {n}")
    k = np.arange(n + 1)
    trig = _trig_factors(spec, k)
    if abs(trig[n]) <= LEADING_TERM_TOLERANCE:
        raise LeadingTermVanishes(
            f"leading trigonometric factor {trig[n]:.3e} vanishes for n={n}, "
            f"beta={spec.beta}, alpha={spec.alpha}, {spec.parity.value}"
        )
    log_mag = (
        2.0 * (log_sqrt_factorials(n)[n] - log_sqrt_factorials(n))
        + (k - n) * math.log(spec.radius)
    )
    phase = _I_POWERS[(k - n) % 4]
    coeffs = np.exp(log_mag) * phase * trig / trig[n]
    coeffs[n] = 1.0
    return CreationPolynomial(coeffs)


def _backward_residuals(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    value = np.abs(P.polyval(z, coeffs))
    scale = P.polyval(np.abs(z), np.abs(coeffs))
    return value / np.where(scale > 0.0, scale, 1.0)


def _aberth_sweep(z: np.ndarray, coeffs: np.ndarray, derivative: np.ndarray, active: np.ndarray) -> None:
    """One Gauss-Seidel Aberth pass over the active approximations, in place."""
    for i in np.nonzero(active)[0]:
        value = P.polyval(z[i], coeffs)
        slope = P.polyval(z[i], derivative)
        repulsion = np.sum(1.0 / (z[i] - np.delete(z, i)))
        denom = slope - value * repulsion
        if denom != 0:
            z[i] = z[i] - value / denom


def polynomial_roots(
    p: CreationPolynomial,
    tolerance: float = ROOT_RESIDUAL,
    max_iterations: int = ROOT_MAX_ITERATIONS,
) -> RootSet:
    """
    All complex roots by Aberth-Ehrlich simultaneous iteration.

    Exact zero roots are split off first. Starting points lie on the circle
    of radius 1 + max|c_k / c_n|; iteration stops once every backward
    residual |p(z)| / sum_k |c_k||z|^k is below ``tolerance``.

    Raises:
        NonConvergence: if the residual target is not met within ``max_iterations``.
    """
    if p.degree < 1:
        raise ValueError("polynomial_roots needs degree >= 1")
    coeffs = np.asarray(p.coeffs)
    nonzero = np.nonzero(coeffs)[0]
    zero_roots = int(nonzero[0])
    reduced = coeffs[zero_roots:] / coeffs[-1]
    degree = reduced.size - 1
    if degree == 0:
        return RootSet(np.zeros(zero_roots), scale=coeffs[-1])

    derivative = P.polyder(reduced)
    radius = 1.0 + float(np.max(np.abs(reduced[:-1])))
    z = radius * np.exp(1j * (2.0 * math.pi * np.arange(degree) / degree + 0.4))

    for iteration in range(max_iterations):
        residuals = _backward_residuals(reduced, z)
        if np.all(residuals <= tolerance):
            logger.debug("Aberth converged after %d iterations (degree %d)", iteration, degree)
            break
        _aberth_sweep(z, reduced, derivative, residuals > tolerance)
    else:
        worst = float(np.max(_backward_residuals(reduced, z)))
        raise NonConvergence(
            f"Aberth iteration did not reach residual {tolerance:g} in {max_iterations} "
            f"iterations (worst {worst:.2e}, degree {degree})"
        )

    polished = z.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        _aberth_sweep(polished, reduced, derivative, np.ones(degree, dtype=bool))
    if np.all(np.isfinite(polished)) and np.max(_backward_residuals(reduced, polished)) <= tolerance:
        z = polished

    roots = np.concatenate([np.zeros(zero_roots, dtype=np.complex128), z])
    return RootSet(roots, scale=coeffs[-1])


def match_root_multisets(found: Sequence[complex], expected: Sequence[complex]) -> float:
    """Greedy nearest pairing of two root multisets; returns the largest paired distance."""
    found = list(np.asarray(found, dtype=np.complex128))
    expected = np.asarray(expected, dtype=np.complex128)
    if len(found) != expected.size:
        raise ValueError(f"root counts differ: {len(found)} vs {expected.size}")
    worst = 0.0
    for target in expected:
        distances = [abs(candidate - target) for candidate in found]
        best = int(np.argmin(distances))
        worst = max(worst, distances[best])
        found.pop(best)
    return worst


def scq_from_roots(roots: RootSet, spec: CatSpec, n: int, cutoff: Optional[int] = None) -> FockVector:
    """prod_j (a^dagger - z_j)|0>, then D(i alpha), normalized."""
    if len(roots) != n:
        raise ValueError(f"expected {n} roots, got {len(roots)}")
    cutoff = auto_cutoff([spec.alpha], photons=n) if cutoff is None else cutoff
    monic = CreationPolynomial(P.polyfromroots(roots.roots)) if n > 0 else CreationPolynomial([1.0])
    local = FockVector(monic.fock_amplitudes(cutoff)).normalized()
    return displace(local, 1j * spec.alpha, cutoff)


def scq_from_displacements(roots: RootSet, spec: CatSpec, cutoff: Optional[int] = None) -> FockVector:
    """
    prod_j D(z_j*) a^dagger D^dagger(z_j*)|0>, then D(i alpha), normalized.

    Every factor equals a^dagger - z_j; the product is evaluated in a working
    space enlarged past the largest displacement and truncated at the end.
    """
    n = len(roots)
    cutoff = auto_cutoff([spec.alpha], photons=n) if cutoff is None else cutoff
    largest = max([abs(z) for z in roots.roots] + [abs(spec.alpha)])
    working = max(cutoff, auto_cutoff([largest], photons=n)) + n
    raise_op = creation_matrix(working)
    state = np.zeros(working + 1, dtype=np.complex128)
    state[0] = 1.0
    for z in roots.roots:
        shift = np.conj(z)
        if shift == 0:
            state = raise_op @ state
            continue
        forward = displacement_matrix(shift, working)
        state = forward @ (raise_op @ (forward.conj().T @ state))
    local = FockVector(state).normalized()
    shifted = displace(local, 1j * spec.alpha, working)
    return FockVector(shifted.amplitudes[: cutoff + 1]).normalized()
