"""
Experiment Configuration

YAML-backed configuration for a full experiment. Every field has an explicit default
and the resolved configuration is written next to the results.
"""

import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

import yaml

from optimizer import SubgradientSchedule
from spectrum import EIGENSOLVERS

NETWORKS = ("random", "static")
BASELINE_SCHEMES = ("metropolis", "sgbw")
OPTIMIZED_SCHEMES = ("phi", "psi")
MAX_SEED = 2 ** 64


class ConfigError(ValueError):
    """Raised for invalid configuration files or values."""


@dataclass(frozen=True)
class Scheme:
    """A weight rule: a baseline, or phi_n / psi_n minimization."""
    kind: str
    n: Optional[int] = None

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        """Parse 'metropolis', 'sgbw', 'phi:<n>' or 'psi:<n>'."""
        name, sep, index = str(text).strip().lower().partition(":")
        if name in BASELINE_SCHEMES and not sep:
            return cls(name)
        if name in OPTIMIZED_SCHEMES and sep and index.isdigit() and int(index) >= 1:
            return cls(name, int(index))
        raise ConfigError(f"Invalid scheme '{text}': expected metropolis, sgbw, phi:<n> or psi:<n>")

    @property
    def label(self) -> str:
        return self.kind if self.n is None else f"{self.kind}_{self.n}"

    def __str__(self) -> str:
        return self.kind if self.n is None else f"{self.kind}:{self.n}"


@dataclass
class GraphSource:
    """Generate a geometric supergraph, or load one from graph/correlation files."""
    n_nodes: int = 120
    target_edges: int = 449
    c1: float = 0.6
    c2: float = 0.2
    max_attempts: int = 1000
    graph_file: Optional[str] = None
    correlation_file: Optional[str] = None

    def __post_init__(self):
        # YAML reads "1e-3" without a dot as a string
        self.c1 = float(self.c1)
        self.c2 = float(self.c2)

    @property
    def from_files(self) -> bool:
        return self.graph_file is not None


@dataclass
class ScheduleOverrides:
    step_rule: str = "polyak"
    scale: Optional[float] = None
    max_iters: int = 2000
    margin: float = 1e-3
    target_gap: Optional[float] = None
    patience: int = 200
    log_every: int = 100

    def __post_init__(self):
        self.margin = float(self.margin)
        if self.scale is not None:
            self.scale = float(self.scale)
        if self.target_gap is not None:
            self.target_gap = float(self.target_gap)

    def to_schedule(self) -> SubgradientSchedule:
        try:
            return SubgradientSchedule(**asdict(self))
        except ValueError as exc:
            raise ConfigError(f"schedule: {exc}") from exc


@dataclass
class ExperimentConfig:
    graph: GraphSource = field(default_factory=GraphSource)
    network: str = "random"
    schemes: List[str] = field(default_factory=lambda: ["metropolis", "sgbw", "phi:1", "phi:30"])
    horizon: int = 100
    trials: int = 100
    seed: int = 0
    thresholds: List[float] = field(default_factory=lambda: [1e-2, 1e-3])
    eigensolver: str = "lapack"
    workers: int = 1
    schedule: ScheduleOverrides = field(default_factory=ScheduleOverrides)
    output_dir: str = "results"

    @property
    def parsed_schemes(self) -> List[Scheme]:
        return [Scheme.parse(text) for text in self.schemes]

    def validate(self, n_nodes: Optional[int] = None) -> None:
        """
        Check every field.

        Args:
            n_nodes: Node count of the actual graph; defaults to the generator's N.
        """
        if not self.schemes:
            raise ConfigError("schemes: at least one scheme is required")
        schemes = self.parsed_schemes
        labels = [scheme.label for scheme in schemes]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"schemes: duplicate entries in {self.schemes}")
        if self.network not in NETWORKS:
            raise ConfigError(f"network: expected one of {NETWORKS}, got '{self.network}'")
        if self.horizon < 1:
            raise ConfigError(f"horizon: must be at least 1, got {self.horizon}")
        if self.trials < 1:
            raise ConfigError(f"trials: must be at least 1, got {self.trials}")
        if not (0 <= self.seed < MAX_SEED):
            raise ConfigError(f"seed: must be a 64-bit unsigned integer, got {self.seed}")
        if self.eigensolver not in EIGENSOLVERS:
            raise ConfigError(f"eigensolver: expected one of {EIGENSOLVERS}, got '{self.eigensolver}'")
        if self.workers < 1:
            raise ConfigError(f"workers: must be at least 1, got {self.workers}")
        if not self.thresholds or any(not (0.0 < t <= 1.0) for t in self.thresholds):
            raise ConfigError(f"thresholds: values must lie in (0, 1], got {self.thresholds}")

        source = self.graph
        if not source.from_files:
            if source.n_nodes < 2:
                raise ConfigError(f"graph.n_nodes: must be at least 2, got {source.n_nodes}")
            if not (0.0 <= source.c1 < 1.0):
                raise ConfigError(f"graph.c1: must lie in [0, 1), got {source.c1}")
            if not (0.0 <= source.c2 < 1.0):
                raise ConfigError(f"graph.c2: must lie in [0, 1), got {source.c2}")
        n_nodes = n_nodes if n_nodes is not None else (None if source.from_files else source.n_nodes)
        if n_nodes is not None:
            for scheme in schemes:
                if scheme.n is not None and not (1 <= scheme.n <= n_nodes - 1):
                    raise ConfigError(f"schemes: index of '{scheme}' must lie in [1, {n_nodes - 1}]")
        self.schedule.to_schedule()

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["schemes"] = list(self.schemes)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        data = dict(data or {})
        _reject_unknown(data, cls, "")
        graph = data.pop("graph", None) or {}
        schedule = data.pop("schedule", None) or {}
        _reject_unknown(graph, GraphSource, "graph.")
        _reject_unknown(schedule, ScheduleOverrides, "schedule.")
        try:
            config = cls(graph=GraphSource(**graph), schedule=ScheduleOverrides(**schedule), **data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        config.schemes = [str(scheme) for scheme in config.schemes]
        config.thresholds = [float(t) for t in config.thresholds]
        return config


def _reject_unknown(data: Dict[str, Any], kind: type, prefix: str) -> None:
    known = {f.name for f in fields(kind)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"Unknown configuration key(s): {', '.join(prefix + key for key in unknown)}")


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a YAML configuration file."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path) as handle:
        try:
            data = yaml.safe_load(handle)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    config = ExperimentConfig.from_dict(data or {})
    config.validate()
    return config


def save_config(config: ExperimentConfig, path: str) -> None:
    """Write the configuration with all defaults filled in."""
    with open(path, "w") as handle:
        yaml.safe_dump(config.to_dict(), handle, sort_keys=False, default_flow_style=False)
