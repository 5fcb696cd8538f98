#!/usr/bin/env python3
"""
Multi-start Nelder-Mead search over black-box settings.

Start points come from a scrambled Halton sequence over the bounded
parameter box plus, when available, a start derived from the roots of the
matching cat-qudit polynomial and a warm start. Restarts run as worker
threads bounded by a semaphore and are reduced in restart-index order, so
results do not depend on completion order.
"""

from __future__ import annotations

import asyncio
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from catengine import settings
from catengine.cat_states import (
    CatSpec,
    Parity,
    polynomial_roots,
    scq_polynomial,
    scq_upper_bound,
)
from catengine.errors import AllStartsInfeasible, CatEngineError
from catengine.scheme_sim import InputKind, InputSpec, SchemeConfig, evaluate_scheme

logger = logging.getLogger(__name__)

PENALTY = 10.0
TIE_TOLERANCE = 1e-12
BOUND_TOLERANCE = 1e-9
SEED_THETA = math.pi / 4


@dataclass
class OptimizerBudget:
    """
    Restart and evaluation limits for one optimization.

    scipy's Nelder-Mead stops once every vertex lies within ``xatol`` (max
    norm) of the best vertex and the function values within ``fatol``, so
    the simplex diameter is at most ``2 * xatol`` at termination.
    """
    restarts: int = field(default_factory=lambda: settings.DEFAULT_RESTARTS)
    seed: int = field(default_factory=lambda: settings.DEFAULT_SEED)
    threads: int = field(default_factory=lambda: settings.DEFAULT_THREADS)
    max_evaluations: int = field(default_factory=lambda: settings.DEFAULT_MAX_EVALUATIONS)
    xatol: float = 5e-10
    fatol: float = 1e-12
    analytic_seed: bool = True

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        if self.max_evaluations < 1:
            raise ValueError(f"max_evaluations must be >= 1, got {self.max_evaluations}")


@dataclass(frozen=True)
class SearchSpace:
    """
    Free parameters over a template config.

    Parameter order: theta_1..theta_m, Re alpha_1..Re alpha_m,
    Im alpha_1..Im alpha_m (when ``complex_alpha``), alpha_0, Re gamma,
    Im gamma, beta_in, each present only when marked free.
    """
    template: SchemeConfig
    free_theta: bool = True
    free_alpha: bool = True
    complex_alpha: bool = True
    free_alpha0: bool = True
    free_gamma: bool = False
    free_beta_in: bool = False
    bounds: Dict[str, Tuple[float, float]] = field(default_factory=lambda: dict(settings.DEFAULT_BOUNDS))

    def __post_init__(self) -> None:
        kind = self.template.input.kind
        if self.free_gamma and kind is not InputKind.COHERENT:
            raise ValueError("gamma can only be free for a coherent input")
        if self.free_beta_in and kind is not InputKind.KITTEN:
            raise ValueError("beta_in can only be free for a kitten input")
        for family, (lo, hi) in self.bounds.items():
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bounds for '{family}' must be a finite non-empty interval, got {(lo, hi)}")
        lo, hi = self.bounds["theta"]
        if lo <= 0.0 or hi >= math.pi / 2:
            raise ValueError(f"theta bounds must lie strictly inside (0, pi/2), got {(lo, hi)}")
        if not self.names():
            raise ValueError("search space has no free parameters")

    def _layout(self) -> List[Tuple[str, str]]:
        m = self.template.m
        layout: List[Tuple[str, str]] = []
        if self.free_theta:
            layout += [(f"theta_{k}", "theta") for k in range(1, m + 1)]
        if self.free_alpha:
            layout += [(f"re_alpha_{k}", "alpha") for k in range(1, m + 1)]
            if self.complex_alpha:
                layout += [(f"im_alpha_{k}", "alpha") for k in range(1, m + 1)]
        if self.free_alpha0:
            layout.append(("alpha_0", "alpha_0"))
        if self.free_gamma:
            layout += [("re_gamma", "gamma"), ("im_gamma", "gamma")]
        if self.free_beta_in:
            layout.append(("beta_in", "beta_in"))
        return layout

    def names(self) -> List[str]:
        return [name for name, _ in self._layout()]

    @property
    def dimension(self) -> int:
        return len(self._layout())

    def bounds_array(self) -> np.ndarray:
        return np.array([self.bounds[family] for _, family in self._layout()], dtype=float)

    def clip(self, params: Sequence[float]) -> np.ndarray:
        box = self.bounds_array()
        return np.clip(np.asarray(params, dtype=float), box[:, 0], box[:, 1])

    def encode(self, config: SchemeConfig) -> np.ndarray:
        values: List[float] = []
        if self.free_theta:
            values += list(config.bs_theta)
        if self.free_alpha:
            values += [a.real for a in config.aux_alpha]
            if self.complex_alpha:
                values += [a.imag for a in config.aux_alpha]
        if self.free_alpha0:
            values.append(config.alpha0)
        if self.free_gamma:
            values += [config.input.gamma.real, config.input.gamma.imag]
        if self.free_beta_in:
            values.append(config.input.beta_in)
        return np.asarray(values, dtype=float)

    def materialize(self, params: Sequence[float]) -> SchemeConfig:
        params = np.asarray(params, dtype=float)
        if params.size != self.dimension:
            raise ValueError(f"expected {self.dimension} parameters, got {params.size}")
        m = self.template.m
        cursor = 0

        def take(count: int) -> np.ndarray:
            nonlocal cursor
            chunk = params[cursor: cursor + count]
            cursor += count
            return chunk

        config = self.template
        thetas = tuple(take(m)) if self.free_theta else config.bs_theta
        alphas = config.aux_alpha
        if self.free_alpha:
            real = take(m)
            imag = take(m) if self.complex_alpha else np.zeros(m)
            alphas = tuple(complex(x, y) for x, y in zip(real, imag))
        alpha0 = float(take(1)[0]) if self.free_alpha0 else config.alpha0
        source = config.input
        if self.free_gamma:
            re, im = take(2)
            source = replace(source, gamma=complex(re, im))
        if self.free_beta_in:
            source = replace(source, beta_in=float(take(1)[0]))
        return replace(config, input=source, bs_theta=thetas, aux_alpha=alphas, alpha0=alpha0)


@dataclass
class OptimizationOutcome:
    best_config: SchemeConfig
    fidelity: float
    success_probability: float
    restarts_used: int
    objective_evaluations: int
    seed: int
    best_params: np.ndarray
    best_start: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fidelity": self.fidelity,
            "success_probability": self.success_probability,
            "restarts_used": self.restarts_used,
            "objective_evaluations": self.objective_evaluations,
            "seed": self.seed,
            "best_start": self.best_start,
            "best_config": self.best_config.to_dict(),
        }


@dataclass
class _RestartResult:
    index: int
    params: np.ndarray
    fidelity: float
    probability: float
    evaluations: int
    feasible: bool


def objective(params: Sequence[float], space: SearchSpace, target: CatSpec) -> float:
    """1 - fidelity; configurations that raise a CatEngineError score 1 + PENALTY."""
    try:
        fidelity, _ = evaluate_scheme(space.materialize(params), target)
    except CatEngineError as exc:
        logger.debug("Penalized evaluation: %s", exc)
        return 1.0 + PENALTY
    return 1.0 - fidelity


# ---------------------------------------------------------------------------
# Start points
# ---------------------------------------------------------------------------

def _cluster_by_angle(roots: np.ndarray, sizes: Sequence[int]) -> List[complex]:
    order = np.argsort(np.angle(roots))
    ordered = roots[order]
    centers = []
    start = 0
    for size in sizes:
        centers.append(complex(np.mean(ordered[start: start + size])) if size else 0j)
        start += size
    return centers


def analytic_seed(space: SearchSpace, target: CatSpec) -> Optional[np.ndarray]:
    """
    Start point from the cat-qudit roots with the same photon budget.

    Roots of the qudit polynomial at the fidelity-maximizing alpha are sorted
    by angle and grouped into clusters of sizes k_j; each cluster mean is
    the requested root z_j. With all beam splitters at theta = pi/4 the
    conditional-root relations are solved backwards for the displacements.
    """
    config = space.template
    n = config.total_photons
    if n == 0:
        return None
    try:
        _, alpha_star = scq_upper_bound(n, target.beta, target.parity, "maximized")
        roots = polynomial_roots(scq_polynomial(n, target.with_alpha(alpha_star))).roots
    except CatEngineError as exc:
        logger.debug("No analytic seed: %s", exc)
        return None

    sizes = ([config.input.photons] if config.input.kind is InputKind.FOCK else []) + list(config.aux_photons)
    centers = _cluster_by_angle(np.asarray(roots), sizes)
    if config.input.kind is InputKind.FOCK:
        centers = centers[1:]

    m = config.m
    t = r = math.sin(SEED_THETA)
    gamma = config.input.gamma if config.input.kind is InputKind.COHERENT else 0j
    s = np.array([r * t ** k for k in range(m)])
    big_a = np.zeros(m, dtype=np.complex128)
    for k in reversed(range(m)):
        if config.aux_photons[k] == 0:
            big_a[k] = gamma * s[k]
            continue
        coupled = sum(r * t ** (j - k - 1) * np.conj(big_a[j]) for j in range(k + 1, m))
        tail = t ** (m - k - 1)
        big_a[k] = np.conj((r * coupled - centers[k] * r * tail) / t)
    alphas = big_a - gamma * s
    if not space.complex_alpha:
        alphas = alphas.real.astype(np.complex128)
    seeded = replace(
        config,
        bs_theta=tuple([SEED_THETA] * m),
        aux_alpha=tuple(complex(a) for a in alphas),
        alpha0=alpha_star if space.free_alpha0 else config.alpha0,
    )
    return space.clip(space.encode(seeded))


def start_points(
    space: SearchSpace,
    target: CatSpec,
    budget: OptimizerBudget,
    warm_start: Optional[Sequence[float]] = None,
) -> List[np.ndarray]:
    """[warm start], [analytic seed], then ``budget.restarts`` scrambled Halton points."""
    box = space.bounds_array()
    sampler = qmc.Halton(d=space.dimension, scramble=True, seed=budget.seed)
    halton = qmc.scale(sampler.random(budget.restarts), box[:, 0], box[:, 1])
    starts: List[np.ndarray] = []
    if warm_start is not None:
        starts.append(space.clip(warm_start))
    if budget.analytic_seed:
        seed_point = analytic_seed(space, target)
        if seed_point is not None:
            starts.append(seed_point)
    starts.extend(np.asarray(point) for point in halton)
    return starts


# ---------------------------------------------------------------------------
# Restarts
# ---------------------------------------------------------------------------

def _run_restart(
    index: int,
    x0: np.ndarray,
    space: SearchSpace,
    target: CatSpec,
    budget: OptimizerBudget,
) -> _RestartResult:
    result = minimize(
        objective,
        x0,
        args=(space, target),
        method="Nelder-Mead",
        bounds=space.bounds_array(),
        options={
            "maxfev": budget.max_evaluations,
            "xatol": budget.xatol,
            "fatol": budget.fatol,
            "adaptive": True,
        },
    )
    params = space.clip(result.x)
    try:
        fidelity, probability = evaluate_scheme(space.materialize(params), target)
    except CatEngineError as exc:
        logger.debug("Restart %d ended infeasible: %s", index, exc)
        return _RestartResult(index, params, 0.0, 0.0, int(result.nfev), False)
    logger.debug("Restart %d: fidelity %.6f, probability %.3e (%d evaluations)",
                 index, fidelity, probability, result.nfev)
    return _RestartResult(index, params, fidelity, probability, int(result.nfev), True)


def _better(candidate: _RestartResult, incumbent: Optional[_RestartResult]) -> bool:
    if incumbent is None:
        return True
    if candidate.fidelity > incumbent.fidelity + TIE_TOLERANCE:
        return True
    if abs(candidate.fidelity - incumbent.fidelity) <= TIE_TOLERANCE:
        return candidate.probability > incumbent.probability
    return False


async def optimize_async(
    space: SearchSpace,
    target: CatSpec,
    budget: Optional[OptimizerBudget] = None,
    warm_start: Optional[Sequence[float]] = None,
) -> OptimizationOutcome:
    budget = budget or OptimizerBudget()
    starts = start_points(space, target, budget, warm_start)
    semaphore = asyncio.Semaphore(budget.threads)

    async def run(index: int, x0: np.ndarray) -> _RestartResult:
        async with semaphore:
            return await asyncio.to_thread(_run_restart, index, x0, space, target, budget)

    results = await asyncio.gather(*(run(i, x0) for i, x0 in enumerate(starts)))

    best: Optional[_RestartResult] = None
    for result in sorted(results, key=lambda r: r.index):
        if result.feasible and _better(result, best):
            best = result
    evaluations = sum(r.evaluations for r in results)
    if best is None:
        raise AllStartsInfeasible(
            f"all {len(starts)} starts ended infeasible for beta={target.beta}, {target.parity.value}"
        )

    best_config = space.materialize(best.params)
    fidelity, probability = evaluate_scheme(best_config, target)
    logger.info(
        "Optimized %s cat beta=%.3f: fidelity %.6f, probability %.3e (start %d of %d, %d evaluations)",
        target.parity.value, target.beta, fidelity, probability, best.index, len(starts), evaluations,
    )
    return OptimizationOutcome(
        best_config=best_config,
        fidelity=fidelity,
        success_probability=probability,
        restarts_used=len(starts),
        objective_evaluations=evaluations,
        seed=budget.seed,
        best_params=best.params,
        best_start=best.index,
    )


def optimize(
    space: SearchSpace,
    target: CatSpec,
    budget: Optional[OptimizerBudget] = None,
    warm_start: Optional[Sequence[float]] = None,
) -> OptimizationOutcome:
    """Best fidelity over all restarts; raises AllStartsInfeasible when none is feasible."""
    return asyncio.run(optimize_async(space, target, budget, warm_start))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepPoint:
    beta: float
    fidelity: Optional[float]
    probability: Optional[float]
    config: Optional[SchemeConfig]
    bound_fixed: float
    bound_maximized: float
    alpha_maximized: float
    exceeds_bound: bool = False
    error: Optional[str] = None

    def to_row(self) -> Dict[str, Any]:
        return {
            "beta": self.beta,
            "fidelity": self.fidelity,
            "probability": self.probability,
            "scq_bound_alpha0": self.bound_fixed,
            "scq_bound_maximized": self.bound_maximized,
            "scq_alpha_maximized": self.alpha_maximized,
            "exceeds_bound": self.exceeds_bound,
            "error": self.error,
        }


def beta_grid(beta_range: Tuple[float, float, float]) -> np.ndarray:
    lo, hi, step = (float(v) for v in beta_range)
    if not lo < hi:
        raise ValueError(f"empty beta range: lo={lo} must be below hi={hi}")
    if not step > 0.0:
        raise ValueError(f"beta step must be positive, got {step}")
    if lo <= 0.0:
        raise ValueError(f"beta must be positive, got lo={lo}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def _bound_is_strict(config: SchemeConfig) -> bool:
    return config.input.kind in (InputKind.VACUUM, InputKind.FOCK)


def sweep_beta(
    space: SearchSpace,
    parity,
    beta_range: Tuple[float, float, float],
    budget: Optional[OptimizerBudget] = None,
) -> List[SweepPoint]:
    """
    One optimization per beta, each warm-started from the previous optimum.

    Every point also carries the genuine-qudit fidelity for the same photon
    number, at alpha = 0 and maximized over alpha. Per-point failures are
    recorded on the point.
    """
    parity = Parity.parse(parity)
    budget = budget or OptimizerBudget()
    n = space.template.total_photons
    points: List[SweepPoint] = []
    warm: Optional[np.ndarray] = None
    for beta in beta_grid(beta_range):
        bound_fixed, _ = scq_upper_bound(n, beta, parity, "fixed", 0.0)
        bound_max, alpha_max = scq_upper_bound(n, beta, parity, "maximized")
        try:
            outcome = optimize(space, CatSpec(beta, parity), budget, warm_start=warm)
        except CatEngineError as exc:
            logger.exception("Sweep point beta=%.3f failed", beta)
            points.append(SweepPoint(beta, None, None, None, bound_fixed, bound_max, alpha_max, error=str(exc)))
            continue
        warm = outcome.best_params
        exceeds = outcome.fidelity > bound_max + BOUND_TOLERANCE
        if exceeds:
            if _bound_is_strict(space.template):
                logger.error(
                    "beta=%.3f: fidelity %.9f exceeds the qudit bound %.9f for a %s input",
                    beta, outcome.fidelity, bound_max, space.template.input.kind.value,
                )
            else:
                logger.warning(
                    "beta=%.3f: fidelity %.9f above the n=%d qudit fidelity %.9f (%s input)",
                    beta, outcome.fidelity, n, bound_max, space.template.input.kind.value,
                )
        points.append(SweepPoint(
            beta, outcome.fidelity, outcome.success_probability, outcome.best_config,
            bound_fixed, bound_max, alpha_max, exceeds_bound=exceeds,
        ))
        logger.info("Sweep point beta=%.3f done: fidelity %.6f", beta, outcome.fidelity)
    return points


def amplification_ratio(points: Sequence[SweepPoint], beta_in: float) -> float:
    """beta at the fidelity peak divided by the input kitten amplitude."""
    scored = [p for p in points if p.fidelity is not None]
    if not scored:
        raise ValueError("no successful sweep points")
    if not beta_in > 0.0:
        raise ValueError(f"beta_in must be positive, got {beta_in}")
    peak = max(scored, key=lambda p: (p.fidelity, -p.beta))
    return peak.beta / beta_in


@dataclass
class Alpha0Point:
    alpha0: float
    fidelity: Optional[float]
    probability: Optional[float]
    error: Optional[str] = None


def alpha0_scan(
    space: SearchSpace,
    target: CatSpec,
    alpha0_grid: Sequence[float],
    budget: Optional[OptimizerBudget] = None,
) -> List[Alpha0Point]:
    """Fidelity versus a fixed final displacement, remaining parameters optimized."""
    budget = budget or OptimizerBudget()
    fixed_space = replace(space, free_alpha0=False)
    points: List[Alpha0Point] = []
    warm: Optional[np.ndarray] = None
    for alpha0 in alpha0_grid:
        scan_space = replace(fixed_space, template=space.template.with_alpha0(float(alpha0)))
        try:
            outcome = optimize(scan_space, target, budget, warm_start=warm)
        except CatEngineError as exc:
            logger.exception("alpha_0=%.3f failed", alpha0)
            points.append(Alpha0Point(float(alpha0), None, None, error=str(exc)))
            continue
        warm = outcome.best_params
        points.append(Alpha0Point(float(alpha0), outcome.fidelity, outcome.success_probability))
    return points


def make_template(
    aux_photons: Sequence[int],
    source: Optional[InputSpec] = None,
    alpha0: float = 0.0,
    cutoff: Optional[int] = None,
) -> SchemeConfig:
    """Config with balanced beam splitters and zero displacements."""
    m = len(aux_photons)
    return SchemeConfig(
        input=source or InputSpec.vacuum(),
        aux_photons=tuple(aux_photons),
        bs_theta=tuple([SEED_THETA] * m),
        aux_alpha=tuple([0j] * m),
        alpha0=alpha0,
        cutoff=cutoff,
    )
