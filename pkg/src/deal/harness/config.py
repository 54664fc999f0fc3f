"""Experiment configuration and seed derivation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..optimize import OptimizerConfig
from ..simulator import NoiseModel
from ..zne import ZneConfig

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def cell_seed(master: int, *key) -> int:
    """Seed for one cell, a function of the master seed and the cell key only."""
    digest = hashlib.blake2b("/".join(map(str, key)).encode(), digest_size=8).digest()
    return splitmix64((int(master) & MASK64) ^ int.from_bytes(digest, "little")) >> 1


@dataclass
class ProblemConfig:
    type: str = "maxcut"
    size: int = 4
    seed: int = 0
    edge_prob: float | None = None     # None -> complete graph for MaxCut
    per_repeat_instance: bool = False  # draw a fresh seeded instance for every repeat
    capacity: int | None = None
    values: list[float] | None = None
    weights: list[float] | None = None
    distances: list[list[float]] | None = None
    penalty: float | None = None
    instance: str | None = None        # path to a problem JSON file


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    methods: list[str] = field(default_factory=lambda: ["DEAL", "VANILLA"])
    depths: list[int] = field(default_factory=lambda: [1])
    repeats: int = 1
    batch: int = 1
    seed: int = 0
    shots: int = 1024
    exact: bool = False
    noise: NoiseModel | None = None
    trajectories: int = 256
    zne: ZneConfig | None = None
    zne_during_optimization: bool = False
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    init: dict[str, str] = field(default_factory=lambda: {"DEAL": "qpn", "VANILLA": "random"})
    lambda_gamma: float = 3.141592653589793
    lambda_beta: float = 1.5707963267948966
    mixer_floor: float = 0.0
    truncate: float = 1e-4
    device: str | None = None
    noise_repeats: int = 16
    eigen_k: int = 50
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.problem, dict):
            self.problem = ProblemConfig(**self.problem)
        if isinstance(self.noise, dict):
            self.noise = NoiseModel(**self.noise)
        if isinstance(self.zne, dict):
            self.zne = ZneConfig(**self.zne)
        if isinstance(self.optimizer, dict):
            self.optimizer = OptimizerConfig(**self.optimizer)
        if isinstance(self.depths, dict):
            self.depths = list(range(self.depths["start"], self.depths["stop"] + 1))
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if any(p < 1 for p in self.depths):
            raise ValueError("depths must be >= 1")
        for m in self.methods:
            if m not in ("DEAL", "VANILLA"):
                raise ValueError(f"unknown method {m!r}")
        if self.problem.instance and not Path(self.problem.instance).exists():
            raise FileNotFoundError(self.problem.instance)
        if self.device and not _device_exists(self.device):
            raise FileNotFoundError(self.device)

    @property
    def measure_shots(self) -> int:
        return 0 if self.exact else self.shots

    def to_dict(self) -> dict:
        d = asdict(self)
        d["noise"] = self.noise.to_dict() if self.noise else None
        d["zne"] = self.zne.to_dict() if self.zne else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def with_overrides(self, **kw) -> ExperimentConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


def _device_exists(name: str) -> bool:
    from ..mapping import PRESETS
    return name in PRESETS or Path(name).exists()
