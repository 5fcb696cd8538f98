#!/usr/bin/env python3
"""
Symbolic cross-check of the beam-splitter cascade.

Creation operators commute, so the input is written as a polynomial
f(x_0, .., x_m) in commuting symbols (times exp(gamma x_0) for coherent
components). Every beam splitter is a linear substitution of two symbols,
and projecting auxiliary mode k on <0|D(alpha_k) = <-alpha_k| replaces
x_k by -conj(alpha_k). What is left is a polynomial in x_0 acting on the
vacuum, read off coefficient by coefficient.
"""

from __future__ import annotations

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
import sympy as sp

from catengine.cat_states import CatSpec, kitten_approximation
from catengine.errors import UnsupportedInput, ZeroProbability
from catengine.fock_core import FockVector, auto_cutoff, displace, sqrt_factorials
from catengine.scheme_sim import InputKind, InputSpec, SchemeConfig

logger = logging.getLogger(__name__)

MAX_ORACLE_MODES = 4

# (weight, coherent amplitude, polynomial in x_0)
_Branch = Tuple[complex, complex, sp.Expr]


def _input_branches(spec: InputSpec, x0: sp.Symbol) -> List[_Branch]:
    if spec.kind is InputKind.VACUUM:
        return [(1.0, 0j, sp.Integer(1))]
    if spec.kind is InputKind.FOCK:
        return [(1.0, 0j, x0 ** spec.k0 / sp.sqrt(sp.factorial(spec.k0)))]
    if spec.kind is InputKind.COHERENT:
        return [(1.0, spec.gamma, sp.Integer(1))]
    if spec.approximate:
        amplitudes = kitten_approximation(spec.beta_in, spec.parity).amplitudes
        poly = sum(
            sp.sympify(complex(c)) * x0 ** l / sp.sqrt(sp.factorial(l))
            for l, c in enumerate(amplitudes)
            if c != 0
        )
        return [(1.0, 0j, poly)]
    norm = CatSpec(spec.beta_in, spec.parity).norm_factor
    return [
        (norm, complex(-spec.beta_in), sp.Integer(1)),
        (spec.parity.sign * norm, complex(spec.beta_in), sp.Integer(1)),
    ]


def _propagate(config: SchemeConfig, symbols, poly: sp.Expr, gamma: complex):
    """Push the polynomial and the exponent gamma*x_0 through the cascade and the projections."""
    x0 = symbols[0]
    exponent = sp.sympify(gamma) * x0
    for k, photons in enumerate(config.aux_photons, start=1):
        poly = poly * symbols[k] ** photons / sp.sqrt(sp.factorial(photons))
    for k, theta in enumerate(config.bs_theta, start=1):
        t, r = sp.Float(math.cos(theta), 17), sp.Float(math.sin(theta), 17)
        rotation = {x0: t * x0 + r * symbols[k], symbols[k]: -r * x0 + t * symbols[k]}
        poly = sp.expand(poly.subs(rotation, simultaneous=True))
        exponent = sp.expand(exponent.subs(rotation, simultaneous=True))
    projection = {symbols[k]: -sp.sympify(complex(np.conj(a))) for k, a in enumerate(config.aux_alpha, start=1)}
    poly = sp.expand(poly.subs(projection))
    exponent = sp.expand(exponent.subs(projection))
    slope = complex(sp.N(exponent.coeff(x0, 1)))
    offset = complex(sp.N(exponent.coeff(x0, 0)))
    return poly, slope, offset


def polynomial_oracle(config: SchemeConfig, cutoff: Optional[int] = None) -> Tuple[FockVector, float]:
    """
    Heralded (state, probability) by symbolic substitution.

    A branch exp(c x_0) p(x_0)|0> equals exp(|c|^2/2) D(c) p(x_0 + c*)|0>;
    the Fock amplitudes of p(x_0)|0> are coefficient_l * sqrt(l!). The
    probability carries exp(-|gamma|^2/2 - sum_k |alpha_k|^2/2) from the
    coherent normalizations.

    Raises:
        UnsupportedInput: for more than four auxiliary modes.
    """
    if config.m > MAX_ORACLE_MODES:
        raise UnsupportedInput(f"symbolic oracle handles at most {MAX_ORACLE_MODES} auxiliary modes, got {config.m}")
    symbols = sp.symbols(f"x0:{config.m + 1}")
    x0 = symbols[0]
    alpha_weight = 0.5 * sum(abs(a) ** 2 for a in config.aux_alpha)

    branches = []
    for weight, gamma, poly in _input_branches(config.input, x0):
        reduced, slope, offset = _propagate(config, symbols, poly, gamma)
        shifted = sp.expand(reduced.subs(x0, x0 + sp.sympify(complex(np.conj(slope)))))
        coeffs = [complex(sp.N(c)) for c in reversed(sp.Poly(shifted, x0).all_coeffs())]
        amplitudes = np.asarray(coeffs, dtype=np.complex128) * sqrt_factorials(len(coeffs) - 1)
        log_prefactor = -0.5 * abs(gamma) ** 2 - alpha_weight + offset + 0.5 * abs(slope) ** 2
        branches.append((weight * np.exp(log_prefactor), slope, amplitudes))
        logger.debug("Oracle branch gamma=%s: degree %d, shift %s", gamma, len(coeffs) - 1, slope)

    degree = max(b[2].size for b in branches) - 1
    largest = max(abs(b[1]) for b in branches) + abs(config.alpha0)
    cutoff = max(auto_cutoff([largest], photons=degree), degree) if cutoff is None else cutoff

    if len(branches) == 1:
        scale, slope, amplitudes = branches[0]
        probability = float(abs(scale) ** 2 * np.sum(np.abs(amplitudes) ** 2))
        psi = displace(FockVector(np.pad(amplitudes, (0, cutoff - amplitudes.size + 1))), slope, cutoff)
    else:
        total = np.zeros(cutoff + 1, dtype=np.complex128)
        for scale, slope, amplitudes in branches:
            local = FockVector(np.pad(amplitudes, (0, cutoff - amplitudes.size + 1)))
            total += scale * displace(local, slope, cutoff).amplitudes
        psi = FockVector(total)
        probability = psi.norm() ** 2
    if probability < 1e-300:
        raise ZeroProbability(f"heralded amplitude vanishes (probability {probability:.3e})")
    state = displace(psi.normalized(), 1j * config.alpha0, cutoff).normalized()
    return state, float(min(probability, 1.0))
