#!/usr/bin/env python3
"""
Conditional state generation with a beam-splitter cascade.

Mode 0 meets auxiliary Fock modes |k_1>..|k_m> one at a time on real beam
splitters (t = cos(theta), r = sin(theta)). Auxiliary mode k is displaced by
alpha_k and projected on vacuum right after its beam splitter, so only a
two-mode amplitude matrix is ever held in memory. The heralded mode-0 state
is finally displaced by D(i*alpha_0).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gammaln

from catengine.cat_states import (
    CatSpec,
    CreationPolynomial,
    Parity,
    displaced_scs_vector,
    kitten_approximation,
    scs_vector,
)
from catengine.errors import CutoffTooSmall, DegenerateBS, UnsupportedInput, ZeroProbability
from catengine.fock_core import (
    FockVector,
    auto_cutoff,
    coherent_vector,
    displace,
    fidelity_pure,
    number_state,
    vacuum_projection_row,
)

logger = logging.getLogger(__name__)

ZERO_PROBABILITY = 1e-300
DROPPED_WEIGHT_TOLERANCE = 1e-10
KITTEN_WARNING_AMPLITUDE = 1.5
DEGENERATE_BS_TOLERANCE = 1e-12


class InputKind(Enum):
    """State fed into mode 0."""
    VACUUM = "vacuum"
    FOCK = "fock"
    COHERENT = "coherent"
    KITTEN = "kitten"


@dataclass(frozen=True)
class InputSpec:
    kind: InputKind = InputKind.VACUUM
    k0: int = 0
    gamma: complex = 0j
    beta_in: float = 0.0
    parity: Parity = Parity.EVEN
    approximate: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", InputKind(self.kind))
        object.__setattr__(self, "parity", Parity.parse(self.parity))
        object.__setattr__(self, "gamma", complex(self.gamma))
        if self.kind is InputKind.FOCK and self.k0 < 0:
            raise ValueError(f"Fock input photon number must be non-negative, got {self.k0}")
        if self.kind is InputKind.KITTEN:
            if not self.beta_in > 0.0:
                raise ValueError(f"kitten amplitude must be positive, got {self.beta_in}")
            if self.beta_in > KITTEN_WARNING_AMPLITUDE:
                logger.warning(
                    "Kitten amplitude %.3f is above the small-cat regime (%.1f)",
                    self.beta_in, KITTEN_WARNING_AMPLITUDE,
                )

    @classmethod
    def vacuum(cls) -> "InputSpec":
        return cls(InputKind.VACUUM)

    @classmethod
    def fock(cls, k0: int) -> "InputSpec":
        return cls(InputKind.FOCK, k0=int(k0))

    @classmethod
    def coherent(cls, gamma: complex) -> "InputSpec":
        return cls(InputKind.COHERENT, gamma=complex(gamma))

    @classmethod
    def kitten(cls, beta_in: float, parity, approximate: bool = False) -> "InputSpec":
        return cls(InputKind.KITTEN, beta_in=float(beta_in), parity=Parity.parse(parity), approximate=approximate)

    @property
    def photons(self) -> int:
        if self.kind is InputKind.FOCK:
            return self.k0
        if self.kind is InputKind.KITTEN and self.approximate:
            return 3
        return 0

    @property
    def amplitude(self) -> float:
        if self.kind is InputKind.COHERENT:
            return abs(self.gamma)
        if self.kind is InputKind.KITTEN and not self.approximate:
            return self.beta_in
        return 0.0

    def vector(self, cutoff: int) -> FockVector:
        if self.kind is InputKind.VACUUM:
            return number_state(0, cutoff)
        if self.kind is InputKind.FOCK:
            return number_state(self.k0, cutoff)
        if self.kind is InputKind.COHERENT:
            return coherent_vector(self.gamma, cutoff)
        if self.approximate:
            return kitten_approximation(self.beta_in, self.parity, cutoff)
        return scs_vector(CatSpec(self.beta_in, self.parity), cutoff)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind is InputKind.FOCK:
            data["k0"] = self.k0
        elif self.kind is InputKind.COHERENT:
            data["gamma"] = [self.gamma.real, self.gamma.imag]
        elif self.kind is InputKind.KITTEN:
            data.update(beta_in=self.beta_in, parity=self.parity.value, approximate=self.approximate)
        return data


@dataclass(frozen=True)
class SchemeConfig:
    """
    One black-box setting: input, auxiliary photon numbers k_1..k_m,
    beam-splitter angles, auxiliary displacements and the final alpha_0.
    ``cutoff=None`` selects the automatic cutoff policy.
    """
    input: InputSpec
    aux_photons: Tuple[int, ...]
    bs_theta: Tuple[float, ...]
    aux_alpha: Tuple[complex, ...]
    alpha0: float = 0.0
    cutoff: Optional[int] = None

    def __post_init__(self) -> None:
        photons = tuple(int(k) for k in self.aux_photons)
        thetas = tuple(float(x) for x in self.bs_theta)
        alphas = tuple(complex(a) for a in self.aux_alpha)
        if not photons:
            raise ValueError("a scheme needs at least one auxiliary mode")
        if not len(photons) == len(thetas) == len(alphas):
            raise ValueError(
                f"aux_photons, bs_theta and aux_alpha lengths differ: "
                f"{len(photons)}, {len(thetas)}, {len(alphas)}"
            )
        if any(k < 0 for k in photons):
            raise ValueError(f"auxiliary photon numbers must be non-negative, got {photons}")
        if not all(math.isfinite(x) for x in thetas) or not all(np.isfinite(a) for a in alphas):
            raise ValueError("beam-splitter angles and displacements must be finite")
        if self.cutoff is not None and self.cutoff < 0:
            raise ValueError(f"cutoff must be non-negative, got {self.cutoff}")
        object.__setattr__(self, "aux_photons", photons)
        object.__setattr__(self, "bs_theta", thetas)
        object.__setattr__(self, "aux_alpha", alphas)
        object.__setattr__(self, "alpha0", float(self.alpha0))

    @property
    def m(self) -> int:
        return len(self.aux_photons)

    @property
    def total_photons(self) -> int:
        return sum(self.aux_photons) + self.input.photons

    @property
    def transmissions(self) -> np.ndarray:
        return np.cos(np.asarray(self.bs_theta))

    @property
    def reflections(self) -> np.ndarray:
        return np.sin(np.asarray(self.bs_theta))

    def with_alpha0(self, alpha0: float) -> "SchemeConfig":
        return replace(self, alpha0=alpha0)

    def contraction_cutoff(self) -> int:
        """Cutoff for the mode-0 state before the final displacement."""
        if self.cutoff is not None:
            return self.cutoff
        amplitudes = [self.input.amplitude] + [abs(a) for a in self.aux_alpha]
        return auto_cutoff(amplitudes) + self.total_photons

    def output_cutoff(self) -> int:
        """Cutoff for the heralded state after D(i alpha_0)."""
        if self.cutoff is not None:
            return self.cutoff
        shifted = self.input.amplitude + abs(self.alpha0)
        return max(self.contraction_cutoff(), auto_cutoff([shifted], photons=self.total_photons))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input": self.input.to_dict(),
            "aux_photons": list(self.aux_photons),
            "bs_theta": list(self.bs_theta),
            "aux_alpha": [[a.real, a.imag] for a in self.aux_alpha],
            "alpha0": self.alpha0,
            "cutoff": self.cutoff,
        }


@dataclass
class ConditionalResult:
    """Heralded mode-0 state after D(i alpha_0), its success probability and optional fidelity."""
    state: FockVector
    success_probability: float
    fidelity: Optional[float] = None
    cutoff: int = field(init=False)

    def __post_init__(self) -> None:
        self.cutoff = self.state.cutoff

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cutoff": self.cutoff,
            "success_probability": self.success_probability,
            "fidelity": self.fidelity,
            "amplitudes": [[float(c.real), float(c.imag)] for c in self.state.amplitudes],
        }


# ---------------------------------------------------------------------------
# Beam splitter
# ---------------------------------------------------------------------------

def _column_transfer(theta: float, nk: int, cutoff: int) -> np.ndarray:
    """
    T[n0, p] = <p, n0+nk-p| BS(theta) |n0, nk> for n0, p = 0..cutoff.

    Uses a0^dag -> t a0^dag + r ak^dag and ak^dag -> -r a0^dag + t ak^dag:
    picking i photons of the first factor and j of the second lands in
    p = i + j with weight
    C(n0,i) C(nk,j) t^i r^(n0-i) (-r)^j t^(nk-j) sqrt(p! q! / (n0! nk!)).
    """
    t, r = math.cos(theta), math.sin(theta)
    size = cutoff + 1
    n0 = np.arange(size)[:, None]
    i = np.arange(size)[None, :]
    valid = i <= n0
    rest = np.where(valid, n0 - i, 0)
    transfer = np.zeros((size, size), dtype=np.float64)
    for j in range(nk + 1):
        p = i + j
        q = rest + nk - j
        log_mag = (
            gammaln(n0 + 1.0) - gammaln(i + 1.0) - gammaln(rest + 1.0)
            + gammaln(nk + 1.0) - gammaln(j + 1.0) - gammaln(nk - j + 1.0)
            + 0.5 * (gammaln(p + 1.0) + gammaln(q + 1.0) - gammaln(n0 + 1.0) - gammaln(nk + 1.0))
        )
        trig = np.power(t, i) * np.power(r, rest) * ((-r) ** j) * (t ** (nk - j))
        block = np.where(valid, np.exp(log_mag) * trig, 0.0)
        transfer[:, j:] += block[:, : size - j]
    return transfer


def apply_beam_splitter(joint: np.ndarray, theta: float) -> np.ndarray:
    """
    Two-mode amplitudes c[n0, nk] through the beam splitter of angle theta.

    Entries with n0 + nk above the cutoff cannot be represented; they are
    dropped when they carry at most 1e-10 of the total weight.

    Raises:
        CutoffTooSmall: if the dropped weight is larger than that.
    """
    joint = np.asarray(joint, dtype=np.complex128)
    if joint.ndim != 2 or joint.shape[0] != joint.shape[1]:
        raise ValueError(f"joint amplitudes must be a square matrix, got shape {joint.shape}")
    cutoff = joint.shape[0] - 1
    n0 = np.arange(cutoff + 1)[:, None]
    nk = np.arange(cutoff + 1)[None, :]
    weights = np.abs(joint) ** 2
    total = float(weights.sum())
    overflow = (n0 + nk) > cutoff
    dropped = float(weights[overflow].sum())
    if total > 0.0 and dropped > DROPPED_WEIGHT_TOLERANCE * total:
        raise CutoffTooSmall(
            f"cutoff {cutoff} truncates weight {dropped / total:.2e} at the beam splitter "
            f"(tolerance {DROPPED_WEIGHT_TOLERANCE:g})"
        )
    if dropped:
        logger.debug("Beam splitter drops weight %.3e above cutoff %d", dropped, cutoff)
    joint = np.where(overflow, 0.0, joint)

    output = np.zeros_like(joint)
    rows = np.arange(cutoff + 1)[:, None]
    cols = np.arange(cutoff + 1)[None, :]
    for column in np.nonzero(np.any(joint != 0, axis=0))[0]:
        transfer = _column_transfer(theta, int(column), cutoff)
        contribution = joint[:, column][:, None] * transfer
        q = rows + column - cols
        keep = (contribution != 0) & (q >= 0) & (q <= cutoff)
        np.add.at(output, (np.broadcast_to(cols, keep.shape)[keep], q[keep]), contribution[keep])
    return output


# ---------------------------------------------------------------------------
# Sequential contraction
# ---------------------------------------------------------------------------

def contract_scheme(config: SchemeConfig, cutoff: Optional[int] = None) -> Tuple[FockVector, int]:
    """
    Unnormalized heralded mode-0 vector before D(i alpha_0).

    For each auxiliary mode: place |k_k> beside the current mode-0 vector,
    mix on the beam splitter, then contract mode k with <0|D(alpha_k).
    The squared norm of the result is the success probability.
    """
    cutoff = config.contraction_cutoff() if cutoff is None else cutoff
    if config.total_photons > cutoff:
        raise CutoffTooSmall(f"cutoff {cutoff} below the photon budget {config.total_photons}")
    psi = config.input.vector(cutoff).amplitudes.copy()
    for k, (photons, theta, alpha) in enumerate(
        zip(config.aux_photons, config.bs_theta, config.aux_alpha), start=1
    ):
        joint = np.zeros((cutoff + 1, cutoff + 1), dtype=np.complex128)
        joint[:, photons] = psi
        joint = apply_beam_splitter(joint, theta)
        psi = joint @ vacuum_projection_row(alpha, cutoff)
        logger.debug("Mode %d contracted: squared norm %.6e", k, float(np.vdot(psi, psi).real))
    return FockVector(psi), cutoff


def _checked_probability(vector: FockVector) -> float:
    probability = vector.norm() ** 2
    if probability < ZERO_PROBABILITY:
        raise ZeroProbability(f"heralded amplitude vanishes (probability {probability:.3e})")
    return float(min(probability, 1.0))


def run_scheme(config: SchemeConfig, target: Optional[CatSpec] = None) -> ConditionalResult:
    """Heralded state D(i alpha_0) psi / |psi|, success probability |psi|^2, fidelity to ``target``."""
    psi, _ = contract_scheme(config)
    probability = _checked_probability(psi)
    out_cutoff = config.output_cutoff()
    state = displace(psi.normalized().padded(out_cutoff), 1j * config.alpha0, out_cutoff).normalized()
    fidelity = None
    if target is not None:
        fidelity = fidelity_pure(state, scs_vector(target, max(out_cutoff, auto_cutoff([target.beta]))))
    return ConditionalResult(state=state, success_probability=probability, fidelity=fidelity)


def evaluate_scheme(config: SchemeConfig, target: CatSpec) -> Tuple[float, float]:
    """
    (fidelity, probability) without materializing the displaced state.

    The fidelity is |<D(-i alpha_0) beta_±|psi>|^2 / |psi|^2, evaluated in the
    frame of the undisplaced heralded vector.
    """
    psi, cutoff = contract_scheme(config)
    probability = _checked_probability(psi)
    frame_target = displaced_scs_vector(target, -1j * config.alpha0, cutoff, strict=False)
    overlap = np.vdot(frame_target.amplitudes, psi.amplitudes)
    fidelity = float(min(1.0, abs(overlap) ** 2 / psi.norm() ** 2))
    return fidelity, probability


# ---------------------------------------------------------------------------
# Closed-form conditional states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _ConditionalForm:
    roots: List[Tuple[complex, int]]
    log_prefactor: complex
    shift: complex


def _conditional_form(config: SchemeConfig) -> _ConditionalForm:
    """
    Closed form of the heralded vector for Vacuum, Fock and Coherent inputs:
        C * D(gamma T) prod_k (a^dag - z_k)^(k_k) |0>,
    with T the product of all transmissions, s_k = r_k prod_{j<k} t_j and
    A_k = alpha_k + gamma s_k.
    """
    kind = config.input.kind
    if kind is InputKind.KITTEN:
        raise UnsupportedInput("closed-form conditional states need Vacuum, Fock or Coherent input")
    gamma = config.input.gamma if kind is InputKind.COHERENT else 0j
    t = config.transmissions
    r = config.reflections
    alphas = np.asarray(config.aux_alpha, dtype=np.complex128)
    m = config.m
    head = np.concatenate([[1.0], np.cumprod(t)[:-1]])  # prod_{j<k} t_j
    total_t = float(np.prod(t))
    s = r * head
    big_a = alphas + gamma * s

    log_c = -0.5 * float(np.sum(np.abs(big_a) ** 2)) + 1j * float(np.sum(np.imag(alphas * np.conj(gamma * s))))
    roots: List[Tuple[complex, int]] = []
    for k in range(m):
        photons = config.aux_photons[k]
        if photons == 0:
            continue
        tail = float(np.prod(t[k + 1:]))
        if abs(r[k]) < DEGENERATE_BS_TOLERANCE or abs(tail) < DEGENERATE_BS_TOLERANCE:
            raise DegenerateBS(
                f"beam splitter {k + 1} leaves |{photons}> without a path to mode 0 "
                f"(r={r[k]:.3e}, downstream transmission {tail:.3e})"
            )
        coupled = 0j
        for j in range(k + 1, m):
            coupled += r[j] * float(np.prod(t[k + 1:j])) * np.conj(big_a[j])
        z = (r[k] * coupled - t[k] * np.conj(big_a[k])) / (r[k] * tail)
        roots.append((complex(z), photons))
        log_c += photons * np.log(complex(-r[k] * tail)) - 0.5 * gammaln(photons + 1.0)

    if kind is InputKind.FOCK and config.input.k0 > 0:
        if abs(total_t) < DEGENERATE_BS_TOLERANCE:
            raise DegenerateBS("Fock input never reaches the output port (total transmission 0)")
        z0 = complex(np.sum(s * np.conj(big_a)) / total_t)
        roots.insert(0, (z0, config.input.k0))
        log_c += config.input.k0 * np.log(complex(total_t)) - 0.5 * gammaln(config.input.k0 + 1.0)
    return _ConditionalForm(roots=roots, log_prefactor=complex(log_c), shift=complex(gamma * total_t))


def conditional_roots(config: SchemeConfig) -> List[Tuple[complex, int]]:
    """Roots z_k of the heralded polynomial with their multiplicities (input root first)."""
    return _conditional_form(config).roots


def _root_polynomial(roots: Sequence[Tuple[complex, int]]) -> CreationPolynomial:
    flat = [z for z, multiplicity in roots for _ in range(multiplicity)]
    if not flat:
        return CreationPolynomial([1.0])
    return CreationPolynomial(P.polyfromroots(flat))


def analytic_conditional(config: SchemeConfig, cutoff: Optional[int] = None) -> Tuple[FockVector, List[Tuple[complex, int]], float]:
    """Closed-form (state, roots, probability) for any m with Vacuum/Fock/Coherent input."""
    form = _conditional_form(config)
    polynomial = _root_polynomial(form.roots)
    amplitudes = polynomial.fock_amplitudes()
    probability = float(np.exp(2.0 * form.log_prefactor.real) * np.sum(np.abs(amplitudes) ** 2))
    if probability < ZERO_PROBABILITY:
        raise ZeroProbability(f"heralded amplitude vanishes (probability {probability:.3e})")
    shift = form.shift + 1j * config.alpha0
    cutoff = auto_cutoff([shift], photons=polynomial.degree) if cutoff is None else cutoff
    local = FockVector(polynomial.fock_amplitudes(cutoff)).normalized()
    state = displace(local, shift, cutoff).normalized()
    return state, form.roots, probability


def analytic_conditional_m1(
    gamma: complex,
    theta1: float,
    alpha1: complex,
    k1: int,
    alpha0: float,
    cutoff: Optional[int] = None,
) -> Tuple[FockVector, complex, float]:
    """
    Single auxiliary mode with coherent input gamma:
    exp(i phi_1) exp(-|alpha_1 + gamma r_1|^2 / 2) (-r_1)^k1 / sqrt(k1!)
    D(i alpha_0) D(gamma t_1) (a^dag - z_1)^k1 |0>, z_1 = -(t_1 (alpha_1 + gamma r_1) / r_1)*.
    """
    if abs(math.sin(theta1)) < DEGENERATE_BS_TOLERANCE:
        raise DegenerateBS(f"r_1 = sin({theta1}) vanishes")
    config = SchemeConfig(InputSpec.coherent(gamma), (k1,), (theta1,), (alpha1,), alpha0)
    t1, r1 = math.cos(theta1), math.sin(theta1)
    z1 = -np.conj(t1 * (complex(alpha1) + complex(gamma) * r1) / r1)
    state, _, probability = analytic_conditional(config, cutoff)
    return state, complex(z1), probability


def analytic_conditional_m2(
    gamma: complex,
    theta1: float,
    theta2: float,
    alpha1: complex,
    alpha2: complex,
    k1: int,
    k2: int,
    alpha0: float,
    cutoff: Optional[int] = None,
) -> Tuple[FockVector, complex, complex, float]:
    """Two auxiliary modes with coherent input gamma; returns (state, z_1, z_2, probability)."""
    t1, r1 = math.cos(theta1), math.sin(theta1)
    t2, r2 = math.cos(theta2), math.sin(theta2)
    for label, value in (("r_1", r1), ("r_2", r2), ("t_2", t2)):
        if abs(value) < DEGENERATE_BS_TOLERANCE:
            raise DegenerateBS(f"{label} vanishes")
    gamma, alpha1, alpha2 = complex(gamma), complex(alpha1), complex(alpha2)
    big_a1 = alpha1 + gamma * r1
    big_a2 = alpha2 + gamma * r2 * t1
    z1 = (r1 * r2 * np.conj(big_a2) - t1 * np.conj(big_a1)) / (r1 * t2)
    z2 = -t2 * np.conj(big_a2) / r2
    config = SchemeConfig(InputSpec.coherent(gamma), (k1, k2), (theta1, theta2), (alpha1, alpha2), alpha0)
    state, _, probability = analytic_conditional(config, cutoff)
    return state, complex(z1), complex(z2), probability
