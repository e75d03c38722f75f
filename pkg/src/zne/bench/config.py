"""Experiment configuration: JSON-friendly dataclasses with per-scenario defaults."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..densim import NoiseModel
from ..extrapolate import by_name
from ..folding import FoldMethod

SCENARIOS = ("table2", "rb_decay", "random6", "param_noise", "adaptive_compare")
_SCENARIO_ALIASES = {"rb": "table2", "fig2": "rb_decay", "fig3": "random6",
                     "fig5": "param_noise", "fig8": "adaptive_compare"}
ADAPTIVE_METHOD = "adaptive-exp"
# noise scaling without folding: multiply the simulator's rates, or inject angle noise
NON_FOLDING_SCALINGS = ("backend", "param")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class NoiseConfig:
    """One named noise model.

    ``depolarizing`` is the probability of a non-identity Pauli error per
    channel application; see :meth:`NoiseModel.from_pauli_error`.
    """

    name: str = "depolarizing"
    depolarizing: float = 0.0
    placement: str = "layer"
    scope: str = "local"
    amplitude_damping: float = 0.0
    angle_noise: float = 0.0

    def to_model(self, n_qubits: int) -> NoiseModel:
        extra = dict(amplitude_damping=self.amplitude_damping, angle_noise=self.angle_noise)
        if self.depolarizing == 0:
            return NoiseModel(**extra)
        return NoiseModel.from_pauli_error(self.depolarizing, self.placement, self.scope,
                                           n_qubits, **extra)


_DEPOL_1 = {"name": "depolarizing", "depolarizing": 0.01}
_AMP_DAMP = {"name": "amplitude_damping", "amplitude_damping": 0.01}


def _defaults(scenario: str) -> dict:
    if scenario == "table2":
        return dict(n_circuits=20, n_qubits=2, depth=27, noise=[_DEPOL_1, _AMP_DAMP],
                    scaling=["global", "random", "left"], lambdas=[1, 1.5, 2, 2.5],
                    extrapolation=["linear", "poly:2", "richardson", "exp", ADAPTIVE_METHOD],
                    asymptote=0.25, adaptive_iterations=2)
    if scenario == "rb_decay":
        return dict(n_circuits=8, n_qubits=2, noise=[_DEPOL_1], scaling=["global"],
                    lambdas=[1, 1.5, 2], extrapolation=["poly:2"],
                    lengths=[1, 3, 5, 8, 12, 16, 20, 25, 30], fix_decay_floor=True)
    if scenario == "random6":
        return dict(n_circuits=50, n_qubits=6, depth=40, noise=[_DEPOL_1], scaling=["left"],
                    lambdas=[1, 1.5, 2, 2.5], extrapolation=["poly:2"])
    if scenario == "param_noise":
        return dict(n_circuits=50, n_qubits=6, depth=20,
                    noise=[{"name": "angle", "angle_noise": 0.001}],
                    scaling=["param", "left"], lambdas=[1, 2, 3], extrapolation=["linear"],
                    param_mode="channel", members=200)
    if scenario == "adaptive_compare":
        return dict(n_circuits=10, n_qubits=5, depth=10,
                    noise=[{"name": "depolarizing", "depolarizing": 0.05, "scope": "global"}],
                    scaling=["backend"], lambdas=[1, 1.5, 2, 2.5], extrapolation=["exp"],
                    asymptote=1 / 32, budgets=[400, 800, 1600, 3200, 6400, 12800],
                    trials=200, adaptive_iterations=4)
    raise ConfigError(f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}")


@dataclass
class ExperimentConfig:
    """Everything a scenario needs; the run is a pure function of this object.

    ``shots`` of None means exact expectation values.  Scenario-specific
    fields are ignored by scenarios that do not use them.
    """

    scenario: str
    seed: int = 0
    n_circuits: int = 20
    n_qubits: int = 2
    depth: float = 27
    noise: list[NoiseConfig] = field(default_factory=lambda: [NoiseConfig(**_DEPOL_1)])
    scaling: list[str] = field(default_factory=lambda: ["global"])
    lambdas: list[float] = field(default_factory=lambda: [1.0, 1.5, 2.0, 2.5])
    extrapolation: list[str] = field(default_factory=lambda: ["poly:2"])
    asymptote: float | None = None
    shots: int | None = None
    adaptive_iterations: int = 2
    lambda_max: float = 5.0
    lengths: list[int] = field(default_factory=list)
    fix_decay_floor: bool = True
    param_mode: str = "channel"
    members: int = 200
    budgets: list[int] = field(default_factory=list)
    trials: int = 200
    output: str | None = None

    def __post_init__(self):
        self.scenario = _SCENARIO_ALIASES.get(self.scenario, self.scenario)
        self.noise = [n if isinstance(n, NoiseConfig) else NoiseConfig(**n) for n in self.noise]
        self.lambdas = [float(x) for x in self.lambdas]
        self.validate()

    @classmethod
    def for_scenario(cls, scenario: str, **overrides) -> ExperimentConfig:
        """Headline settings for ``scenario`` with ``overrides`` applied."""
        scenario = _SCENARIO_ALIASES.get(scenario, scenario)
        return cls.from_dict({"scenario": scenario, **overrides})

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        if "scenario" not in data:
            raise ConfigError("config needs a 'scenario' key")
        scenario = _SCENARIO_ALIASES.get(data["scenario"], data["scenario"])
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged = {**_defaults(scenario), **data, "scenario": scenario}
        try:
            return cls(**merged)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> ExperimentConfig:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.n_circuits < 1:
            raise ConfigError("n_circuits must be >= 1")
        if not self.noise:
            raise ConfigError("at least one noise model is required")
        if not self.lambdas or min(self.lambdas) < 1:
            raise ConfigError("lambdas must be non-empty and >= 1")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots must be >= 1 or null")
        if self.param_mode not in ("channel", "ensemble"):
            raise ConfigError("param_mode must be 'channel' or 'ensemble'")
        if not self.lambda_max > 1:
            raise ConfigError("lambda_max must exceed 1")
        if self.adaptive_iterations < 1:
            raise ConfigError("adaptive_iterations must be >= 1")
        for method in self.scaling:
            if method not in NON_FOLDING_SCALINGS:
                try:
                    FoldMethod(method)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from exc
        for method in self.extrapolation:
            if method != ADAPTIVE_METHOD:
                try:
                    by_name(method, self.asymptote)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from exc
        for n in self.noise:
            try:
                n.to_model(self.n_qubits)
            except ValueError as exc:
                raise ConfigError(f"noise {n.name!r}: {exc}") from exc
