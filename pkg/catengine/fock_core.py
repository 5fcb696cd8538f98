#!/usr/bin/env python3
"""
Truncated single-mode Fock-space algebra.

States are FockVector values holding amplitudes c_0..c_N. Displacement
matrix elements are generated along the diagonals of the matrix with the
normalized associated-Laguerre three-term recurrence, so building D(alpha)
costs O(N^2) and never exponentiates a truncated generator.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from catengine.errors import CutoffTooSmall, IndexOutOfRange, NotNormalized

logger = logging.getLogger(__name__)

# Complex scalars (gamma, alpha_k, t_k, r_k) are plain Python/numpy complex values.
ComplexAmplitude = complex

TAIL_TOLERANCE = 1e-10
NORMALIZATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FockVector:
    """Pure single-mode state c_0..c_cutoff. Amplitudes are copied and frozen."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size == 0:
            raise ValueError("FockVector needs at least one amplitude")
        if not np.all(np.isfinite(amps)):
            raise ValueError("FockVector amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "FockVector":
        norm = self.norm()
        if norm == 0.0:
            raise NotNormalized("cannot normalize the zero vector")
        return FockVector(self.amplitudes / norm)

    def padded(self, cutoff: int) -> "FockVector":
        """Zero-pad up to ``cutoff``; never truncates."""
        if cutoff < self.cutoff:
            raise ValueError(f"cannot pad cutoff {self.cutoff} down to {cutoff}")
        if cutoff == self.cutoff:
            return self
        amps = np.zeros(cutoff + 1, dtype=np.complex128)
        amps[: self.amplitudes.size] = self.amplitudes
        return FockVector(amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def mean_photon_number(self) -> float:
        probs = self.probabilities()
        return float(np.dot(np.arange(probs.size), probs) / probs.sum())


@lru_cache(maxsize=64)
def log_sqrt_factorials(cutoff: int) -> np.ndarray:
    """log(sqrt(n!)) for n = 0..cutoff."""
    values = 0.5 * gammaln(np.arange(cutoff + 1) + 1.0)
    values.setflags(write=False)
    return values


def sqrt_factorials(cutoff: int) -> np.ndarray:
    """sqrt(n!) for n = 0..cutoff; entries overflow to inf past n ~ 300, use the log table there."""
    with np.errstate(over="ignore"):
        return np.exp(log_sqrt_factorials(cutoff))


def auto_cutoff(amplitudes: Iterable[complex] = (), photons: int = 0) -> int:
    """
    Cutoff policy N = ceil(M^2 + 6M + 20).

    M is the largest |amplitude|, widened by sqrt(2*photons + 1) when a
    polynomial of that degree is displaced afterwards.
    """
    radius = max((abs(complex(a)) for a in amplitudes), default=0.0)
    if photons > 0:
        radius += math.sqrt(2 * photons + 1)
    return int(math.ceil(radius * radius + 6.0 * radius + 20.0))


def _check_cutoff(cutoff: int) -> int:
    if int(cutoff) != cutoff or cutoff < 0:
        raise ValueError(f"cutoff must be a non-negative integer, got {cutoff!r}")
    return int(cutoff)


def _coherent_amplitudes(gamma: complex, cutoff: int) -> np.ndarray:
    amps = np.zeros(cutoff + 1, dtype=np.complex128)
    if gamma == 0:
        amps[0] = 1.0
        return amps
    n = np.arange(cutoff + 1)
    log_mag = -0.5 * abs(gamma) ** 2 + n * math.log(abs(gamma)) - log_sqrt_factorials(cutoff)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(gamma))


def check_coherent_tail(gamma: complex, cutoff: int) -> None:
    mean = abs(gamma) ** 2
    if mean == 0.0:
        return
    tail = float(poisson.sf(cutoff, mean))
    if tail > TAIL_TOLERANCE:
        raise CutoffTooSmall(
            f"cutoff {cutoff} leaves Poisson tail {tail:.2e} for |gamma|={abs(gamma):.3f} "
            f"(need >= {auto_cutoff([gamma])})"
        )


def coherent_vector(gamma: ComplexAmplitude, cutoff: int) -> FockVector:
    """Coherent state |gamma> truncated at ``cutoff``; raises CutoffTooSmall if the tail exceeds 1e-10."""
    cutoff = _check_cutoff(cutoff)
    gamma = complex(gamma)
    check_coherent_tail(gamma, cutoff)
    return FockVector(_coherent_amplitudes(gamma, cutoff))


def coherent_superposition(
    weights: Sequence[complex],
    amplitudes: Sequence[complex],
    cutoff: int,
    strict: bool = True,
) -> FockVector:
    """
    Unnormalized sum_j w_j |gamma_j>.

    With ``strict=False`` the tail check is skipped; retained amplitudes are
    still exact.
    """
    if len(weights) != len(amplitudes):
        raise ValueError("weights and amplitudes must have equal length")
    cutoff = _check_cutoff(cutoff)
    total = np.zeros(cutoff + 1, dtype=np.complex128)
    for weight, gamma in zip(weights, amplitudes):
        gamma = complex(gamma)
        if strict:
            check_coherent_tail(gamma, cutoff)
        total += complex(weight) * _coherent_amplitudes(gamma, cutoff)
    return FockVector(total)


def number_state(k: int, cutoff: int) -> FockVector:
    cutoff = _check_cutoff(cutoff)
    if k < 0 or k > cutoff:
        raise IndexOutOfRange(f"photon number {k} outside 0..{cutoff}")
    amps = np.zeros(cutoff + 1, dtype=np.complex128)
    amps[k] = 1.0
    return FockVector(amps)


def displacement_matrix(alpha: ComplexAmplitude, cutoff: int) -> np.ndarray:
    """
    Matrix <m|D(alpha)|n> for m, n = 0..cutoff.

    Along the diagonal m = n + d the normalized element
    E_n^(d) = sqrt(n!/(n+d)!) alpha^d e^{-|alpha|^2/2} L_n^(d)(|alpha|^2)
    obeys
        E_{n+1} = (2n+1+d-x)/sqrt((n+1)(n+1+d)) E_n
                  - sqrt(n(n+d)/((n+1)(n+1+d))) E_{n-1},
    started from E_0^(d) in log domain. Elements above the diagonal follow
    from <n|D(alpha)|n+d> = conj((-1)^d E_n^(d)).

    Raises:
        CutoffTooSmall: if |alpha|^2 + 6|alpha| + 10 > cutoff.
    """
    cutoff = _check_cutoff(cutoff)
    alpha = complex(alpha)
    radius = abs(alpha)
    x = radius * radius
    if x + 6.0 * radius + 10.0 > cutoff:
        raise CutoffTooSmall(
            f"cutoff {cutoff} too small for |alpha|={radius:.3f} "
            f"(need >= {int(math.ceil(x + 6.0 * radius + 10.0))})"
        )
    size = cutoff + 1
    if alpha == 0:
        return np.eye(size, dtype=np.complex128)

    d = np.arange(size)
    sign = np.where(d % 2 == 0, 1.0, -1.0)
    log_start = d * math.log(radius) - 0.5 * x - log_sqrt_factorials(cutoff)
    e_curr = np.exp(log_start) * np.exp(1j * d * np.angle(alpha))
    e_prev = np.zeros(size, dtype=np.complex128)

    matrix = np.zeros((size, size), dtype=np.complex128)
    for n in range(size):
        length = size - n
        diag = d[:length]
        current = e_curr[:length]
        matrix[n + diag, n] = current
        matrix[n, n + diag[1:]] = np.conj(sign[1:length] * current[1:])
        if n == cutoff:
            break
        dd = d[: length - 1]
        denom = np.sqrt((n + 1.0) * (n + 1.0 + dd))
        a_coef = (2.0 * n + 1.0 + dd - x) / denom
        b_coef = np.sqrt(n * (n + dd)) / denom
        e_next = a_coef * e_curr[: length - 1] - b_coef * e_prev[: length - 1]
        e_prev, e_curr = e_curr, e_next
    return matrix


def vacuum_projection_row(alpha: ComplexAmplitude, cutoff: int) -> np.ndarray:
    """Row vector <0|D(alpha)| = <-alpha|."""
    return np.conj(coherent_vector(-complex(alpha), cutoff).amplitudes)


def displaced_number_state(k: int, alpha: ComplexAmplitude, cutoff: int) -> FockVector:
    """|k, alpha> = D(alpha)|k>."""
    cutoff = _check_cutoff(cutoff)
    if k < 0 or k > cutoff:
        raise IndexOutOfRange(f"photon number {k} outside 0..{cutoff}")
    return FockVector(displacement_matrix(alpha, cutoff)[:, k])


def displace(vector: FockVector, alpha: ComplexAmplitude, cutoff: Optional[int] = None) -> FockVector:
    """D(alpha) applied to ``vector``; the result lives at ``cutoff`` (default: the vector's own)."""
    cutoff = vector.cutoff if cutoff is None else max(_check_cutoff(cutoff), vector.cutoff)
    if complex(alpha) == 0:
        return vector.padded(cutoff)
    matrix = displacement_matrix(alpha, cutoff)
    return FockVector(matrix @ vector.padded(cutoff).amplitudes)


def creation_matrix(cutoff: int) -> np.ndarray:
    """Truncated a^dagger."""
    cutoff = _check_cutoff(cutoff)
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=-1).astype(np.complex128)


def inner_product(a: FockVector, b: FockVector) -> complex:
    """<a|b>; mismatched cutoffs are zero-padded."""
    size = max(a.cutoff, b.cutoff)
    return complex(np.vdot(a.padded(size).amplitudes, b.padded(size).amplitudes))


def fidelity_pure(a: FockVector, b: FockVector) -> float:
    """|<a|b>|^2 for normalized pure states."""
    for label, vector in (("first", a), ("second", b)):
        norm = vector.norm()
        if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
            raise NotNormalized(f"{label} state has norm {norm:.12f}")
    return float(min(1.0, abs(inner_product(a, b)) ** 2))
