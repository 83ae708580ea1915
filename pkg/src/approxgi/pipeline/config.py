from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace


def default_r(n: int, epsilon: float) -> int:
    return max(1, min(math.ceil(8 * math.log(n) / epsilon**2), (n - 1) ** 2))


def default_threshold(n: int, epsilon: float, rule: str = "min") -> float:
    if rule == "min":
        return 0.5 + min(epsilon / 4, 1 / (4 * n))
    if rule == "plain":
        return 0.5 + epsilon / 4
    raise ValueError(f"unknown threshold rule {rule!r}")


def default_s(n: int) -> int:
    """Seed count: ``ceil(6 ln n)`` capped at ``n // 2``.

    The uncapped value exceeds the number of vertices for n <= 16 (15 seeds
    at n = 12), which would leave nothing to reconstruct.
    """
    return max(2, min(math.ceil(6 * math.log(n)), n // 2))


def default_rounds(n: int) -> int:
    return math.ceil(4 * math.sqrt(n))


def default_ae_grid(epsilon: float) -> int:
    return 2 ** math.ceil(math.log2(4 * math.pi / (epsilon / 2)))


@dataclass(frozen=True)
class PipelineConfig:
    n: int
    epsilon: float
    r: int
    threshold: float
    s: int
    search_rounds: int
    walk_steps_per_round: int = 3
    ae_grid: int = 512
    seed: int = 0
    search_restarts: int = 3
    seed_attempts_per_seed: int = 10
    scoring: str = "classical"

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if self.n > 1 and self.r > (self.n - 1) ** 2:
            raise ValueError(f"r={self.r} exceeds (n-1)^2={(self.n - 1) ** 2}")
        if not 0.5 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (1/2, 1), got {self.threshold}")
        m = self.ae_grid
        if m < 1 or m & (m - 1):
            raise ValueError(f"ae_grid must be a power of two, got {m}")
        if self.s < 2:
            raise ValueError("need at least two seeds")
        if self.scoring not in ("classical", "ae"):
            raise ValueError(f"unknown scoring mode {self.scoring!r}")

    @classmethod
    def for_n(cls, n: int, epsilon: float, threshold_rule: str = "min", **overrides) -> "PipelineConfig":
        if n < 3:
            raise ValueError("the pipeline needs n >= 3")
        if not 0.0 < epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0,1), got {epsilon}")
        base = dict(
            n=n,
            epsilon=epsilon,
            r=default_r(n, epsilon),
            threshold=default_threshold(n, epsilon, threshold_rule),
            s=default_s(n),
            search_rounds=default_rounds(n),
            ae_grid=default_ae_grid(epsilon),
        )
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    def with_(self, **changes) -> "PipelineConfig":
        return replace(self, **changes)

    @property
    def accept_cutoff(self) -> float:
        return 1.5 * self.epsilon

    def as_dict(self) -> dict:
        return asdict(self)


def scaled_config(cfg: PipelineConfig, kappa: float) -> PipelineConfig:
    """Shrink marking samples and search rounds by ``kappa`` (budget knob)."""
    return cfg.with_(
        r=max(1, math.ceil(kappa * cfg.r)),
        search_rounds=max(1, math.ceil(kappa * cfg.search_rounds)),
    )

