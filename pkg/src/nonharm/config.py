"""Run configuration dataclasses.

Every numeric threshold used by the verification campaigns lives in
:class:`Tolerances`; the CLI serializes the full :class:`RunConfig` into each
report so a run can be reproduced from its output alone.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

MODEL_IDS = ("h-model", "dirichlet", "periodic")
FAMILIES = ("exp_diff", "poly_diff")
QUADRATURES = ("gauss-legendre", "trapezoid")


class ConfigError(ValueError):
    """Raised when a configuration fails validation."""


@dataclass(frozen=True)
class Tolerances:
    biorth: float = 1e-8          # max |Gram - I|
    eig: float = 1e-8             # eigen-residual relative to max(1, |lambda|)
    roundtrip: float = 1e-8       # transform / quantization round trips
    parseval: float = 1e-8
    exact: float = 1e-10          # identities that hold exactly on the truncated span
    mask_eps: float = 1e-6        # zero-set threshold relative to sup|u_xi|
    mask_fraction: float = 0.2    # admissibility: max masked fraction
    exponent: float = 0.3         # slack on fitted decay exponents
    band_exponent: float = 0.5    # slack on band-probe residual exponents
    zero_floor: float = 1e-9      # relative level below which a remainder counts as vanishing
    riesz_stability: float = 0.05
    hy_stability: float = 0.05
    apriori_stability: float = 0.2
    kernel_growth: float = 2.0    # max sup growth under truncation doubling


@dataclass(frozen=True)
class ModelConfig:
    model: str = "h-model"
    h: float = 2.0
    xi_max: int = 64
    nodes: int = 2048
    quadrature: str = "gauss-legendre"
    m: float | None = None
    s0: float | None = None

    def validate(self) -> None:
        if self.model not in MODEL_IDS:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODEL_IDS}")
        if self.model == "h-model" and not self.h > 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if self.xi_max < 1:
            raise ConfigError("xi_max must be at least 1")
        if self.nodes < 4 * self.xi_max:
            raise ConfigError(
                f"nodes={self.nodes} is below the resolution guard 4*xi_max={4 * self.xi_max}")
        if self.quadrature not in QUADRATURES:
            raise ConfigError(f"unknown quadrature {self.quadrature!r}")
        if self.quadrature == "trapezoid" and self.model != "periodic":
            raise ConfigError("trapezoid quadrature is only offered for the periodic model")
        if self.m is not None and not self.m > 0:
            raise ConfigError("m must be positive")
        if self.s0 is not None and not self.s0 > 0:
            raise ConfigError("s0 must be positive")


@dataclass(frozen=True)
class DifferenceConfig:
    family: str = "exp_diff"
    alpha_max: int = 4
    beta_max: int = 2

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown difference family {self.family!r}")
        if self.alpha_max < 0 or self.beta_max < 0:
            raise ConfigError("alpha_max and beta_max must be nonnegative")


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    difference: DifferenceConfig = field(default_factory=DifferenceConfig)
    rho: float = 1.0
    delta: float = 0.0
    n_terms: int = 3
    probes: int = 32
    seed: int = 0
    out: str = "reports"
    format: str = "csv"
    tolerances: Tolerances = field(default_factory=Tolerances)

    def validate(self) -> "RunConfig":
        self.model.validate()
        self.difference.validate()
        if not (0.0 <= self.delta <= 1.0 and 0.0 <= self.rho <= 1.0):
            raise ConfigError("rho and delta must lie in [0, 1]")
        if self.n_terms < 1:
            raise ConfigError("n_terms must be at least 1")
        if self.probes < 1:
            raise ConfigError("probe set is empty; probes must be at least 1")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        for f in fields(self.tolerances):
            if not getattr(self.tolerances, f.name) > 0:
                raise ConfigError(f"tolerance {f.name} must be positive")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        model = dict(data.pop("model", {}) or {})
        tol = dict(model.pop("tolerances", {}) or {})
        tol.update(data.pop("tolerances", {}) or {})
        diff = dict(data.pop("difference", {}) or {})
        try:
            cfg = cls(
                model=ModelConfig(**model),
                difference=DifferenceConfig(**diff),
                tolerances=Tolerances(**tol),
                **data,
            )
        except TypeError as exc:
            raise ConfigError(f"bad configuration key: {exc}") from None
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(data)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})
