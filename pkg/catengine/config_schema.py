"""JSON schema for scheme configurations and run manifests."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from catengine import settings
from catengine.cat_states import CatSpec
from catengine.optimizer import SEED_THETA, OptimizerBudget, SearchSpace
from catengine.scheme_sim import InputSpec, SchemeConfig

ParityName = Literal["even", "odd"]
BoundFamily = Literal["theta", "alpha", "alpha_0", "gamma", "beta_in"]


class InputModel(BaseModel):
    """Mode-0 input state."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["vacuum", "fock", "coherent", "kitten"]
    k0: Optional[int] = Field(default=None, ge=0)
    gamma: Optional[Tuple[float, float]] = None
    beta_in: Optional[float] = Field(default=None, gt=0.0)
    parity: Optional[ParityName] = None
    approximate: bool = False

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "InputModel":
        if self.kind == "fock" and self.k0 is None:
            raise ValueError("fock input needs k0")
        if self.kind == "coherent" and self.gamma is None:
            raise ValueError("coherent input needs gamma as [re, im]")
        if self.kind == "kitten" and (self.beta_in is None or self.parity is None):
            raise ValueError("kitten input needs beta_in and parity")
        return self

    def to_spec(self) -> InputSpec:
        if self.kind == "fock":
            return InputSpec.fock(self.k0)
        if self.kind == "coherent":
            return InputSpec.coherent(complex(*self.gamma))
        if self.kind == "kitten":
            return InputSpec.kitten(self.beta_in, self.parity, approximate=self.approximate)
        return InputSpec.vacuum()


class TargetModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beta: float = Field(gt=0.0)
    parity: ParityName

    def to_spec(self) -> CatSpec:
        return CatSpec(self.beta, self.parity)


class OptimizerModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    restarts: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    threads: Optional[int] = Field(default=None, ge=1)
    max_evaluations: Optional[int] = Field(default=None, ge=1)
    bounds: Optional[Dict[BoundFamily, Tuple[float, float]]] = None
    complex_alpha: bool = True
    free_gamma: bool = False
    free_beta_in: bool = False


class SchemeConfigModel(BaseModel):
    """
    One document serves simulate, optimize and sweep. ``"free"`` marks a
    parameter family for the optimizer; simulate needs every value fixed.
    """

    model_config = ConfigDict(extra="forbid")

    input: InputModel
    aux_photons: List[int] = Field(min_length=1)
    bs_theta: Union[Literal["free"], List[float]] = "free"
    aux_alpha: Union[Literal["free"], List[Tuple[float, float]]] = "free"
    alpha0: Union[Literal["free"], float] = "free"
    target: Optional[TargetModel] = None
    optimizer: OptimizerModel = Field(default_factory=OptimizerModel)
    cutoff: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _check_lengths(self) -> "SchemeConfigModel":
        m = len(self.aux_photons)
        if any(k < 0 for k in self.aux_photons):
            raise ValueError("aux_photons must be non-negative")
        if self.bs_theta != "free":
            if len(self.bs_theta) != m:
                raise ValueError(f"bs_theta has {len(self.bs_theta)} entries, aux_photons has {m}")
            if not all(math.isfinite(x) for x in self.bs_theta):
                raise ValueError("bs_theta entries must be finite")
        if self.aux_alpha != "free" and len(self.aux_alpha) != m:
            raise ValueError(f"aux_alpha has {len(self.aux_alpha)} entries, aux_photons has {m}")
        return self

    @property
    def free_families(self) -> List[str]:
        return [
            name for name, value in (
                ("bs_theta", self.bs_theta), ("aux_alpha", self.aux_alpha), ("alpha0", self.alpha0)
            ) if value == "free"
        ]

    def to_scheme_config(self, require_fixed: bool = False) -> SchemeConfig:
        """Scheme config; free families start at theta = pi/4, zero displacements."""
        if require_fixed and self.free_families:
            raise ValueError(f"parameters marked free: {', '.join(self.free_families)}")
        m = len(self.aux_photons)
        return SchemeConfig(
            input=self.input.to_spec(),
            aux_photons=tuple(self.aux_photons),
            bs_theta=tuple([SEED_THETA] * m) if self.bs_theta == "free" else tuple(self.bs_theta),
            aux_alpha=tuple([0j] * m) if self.aux_alpha == "free" else tuple(complex(*a) for a in self.aux_alpha),
            alpha0=0.0 if self.alpha0 == "free" else float(self.alpha0),
            cutoff=self.cutoff,
        )

    def to_search_space(self) -> SearchSpace:
        bounds = dict(settings.DEFAULT_BOUNDS)
        bounds.update(self.optimizer.bounds or {})
        return SearchSpace(
            template=self.to_scheme_config(),
            free_theta=self.bs_theta == "free",
            free_alpha=self.aux_alpha == "free",
            complex_alpha=self.optimizer.complex_alpha,
            free_alpha0=self.alpha0 == "free",
            free_gamma=self.optimizer.free_gamma,
            free_beta_in=self.optimizer.free_beta_in,
            bounds=bounds,
        )

    def to_budget(self, **overrides) -> OptimizerBudget:
        """Budget from the document, then non-None ``overrides`` (command-line flags) on top."""
        values = {
            key: value
            for key, value in (
                ("restarts", self.optimizer.restarts),
                ("seed", self.optimizer.seed),
                ("threads", self.optimizer.threads),
                ("max_evaluations", self.optimizer.max_evaluations),
            )
            if value is not None
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return OptimizerBudget(**values)

    def target_spec(self) -> Optional[CatSpec]:
        return self.target.to_spec() if self.target else None


class RunManifest(BaseModel):
    """Sidecar written next to every data file."""

    model_config = ConfigDict(extra="forbid")

    command: str
    config_digest: str
    seed: int
    tool_version: str
    wall_time_seconds: float
    data_file: Optional[str] = None


def load_config(path: Union[str, Path]) -> SchemeConfigModel:
    """Parse and validate a config file; raises json.JSONDecodeError or pydantic.ValidationError."""
    return SchemeConfigModel.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
