from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Sequence

from fastretrial.model import ArrivalLaw, ArrivalModel

ADAPTIVE = "adaptive"
SEED_MAX = 2**64 - 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one run.

    ``l1=None`` means the pool size is driven by the adaptive controller.
    ``lam`` is a common per-device rate or an explicit per-device list.
    ``mu`` and ``warmup`` default to ``0.01 / n1`` and 10% of the horizon.
    """

    n1: int
    lam: float | tuple[float, ...]
    l1: int | None = 20
    l_total: int = 50
    arrival_law: ArrivalLaw = ArrivalLaw.BERNOULLI
    mu: float | None = None
    horizon: int = 100_000
    warmup: int | None = None
    seed: int = 0
    l1_min_floor: int = 1

    def __post_init__(self):
        try:
            object.__setattr__(self, "arrival_law", ArrivalLaw(self.arrival_law))
        except ValueError:
            raise ConfigError(f"unknown arrival law {self.arrival_law!r}") from None
        if not isinstance(self.lam, (int, float)):
            object.__setattr__(self, "lam", tuple(float(x) for x in self.lam))
        if self.n1 < 1:
            raise ConfigError(f"n1 must be >= 1, got {self.n1}")
        if self.l_total < 2:
            raise ConfigError(f"l_total must be >= 2, got {self.l_total}")
        if self.l1 is not None and not 1 <= self.l1 <= self.l_total - 1:
            raise ConfigError(f"l1 must be in [1, {self.l_total - 1}], got {self.l1}")
        if not 1 <= self.l1_min_floor <= self.l_total - 1:
            raise ConfigError(f"l1_min_floor must be in [1, {self.l_total - 1}]")
        if self.horizon <= 0:
            raise ConfigError(f"horizon must be > 0, got {self.horizon}")
        if not 0 <= self.effective_warmup < self.horizon:
            raise ConfigError(f"warmup must satisfy 0 <= warmup < horizon, got {self.warmup}")
        if self.mu is not None and not (math.isfinite(self.mu) and self.mu > 0):
            raise ConfigError(f"mu must be > 0, got {self.mu}")
        if not 0 <= self.seed <= SEED_MAX:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if isinstance(self.lam, tuple) and len(self.lam) != self.n1:
            raise ConfigError(f"expected {self.n1} per-device rates, got {len(self.lam)}")
        try:
            self.arrival_model()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def adaptive(self) -> bool:
        return self.l1 is None

    @property
    def rates(self) -> tuple[float, ...]:
        if isinstance(self.lam, tuple):
            return self.lam
        return (float(self.lam),) * self.n1

    @property
    def effective_mu(self) -> float:
        return 0.01 / self.n1 if self.mu is None else self.mu

    @property
    def effective_warmup(self) -> int:
        return self.horizon // 10 if self.warmup is None else self.warmup

    def arrival_model(self) -> ArrivalModel:
        return ArrivalModel(self.arrival_law, self.rates)

    def with_param(self, name: str, value: Any) -> "ScenarioConfig":
        key = {"lambda": "lam"}.get(name, name)
        if key not in {"lam", "n1", "l1", "seed"}:
            raise ConfigError(f"cannot sweep parameter {name!r}")
        if key == "n1" and isinstance(self.lam, tuple):
            raise ConfigError("n1 sweeps need a scalar arrival rate")
        return replace(self, **{key: value})

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        lam = out.pop("lam")
        out["lambda"] = list(lam) if isinstance(lam, tuple) else lam
        out["l1"] = ADAPTIVE if self.l1 is None else self.l1
        out["arrival_law"] = self.arrival_law.value
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)} | {"lambda"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("n1", "lambda"):
            if key not in data:
                raise ConfigError(f"missing required key {key!r}")
        lam = data.pop("lambda")
        if isinstance(lam, Sequence) and not isinstance(lam, str):
            lam = tuple(lam)
        elif not isinstance(lam, (int, float)) or isinstance(lam, bool):
            raise ConfigError(f"lambda must be a number or list, got {lam!r}")
        if data.get("l1") == ADAPTIVE:
            data["l1"] = None
        for key in ("n1", "l_total", "horizon", "warmup", "seed", "l1_min_floor", "l1"):
            val = data.get(key)
            if val is not None and (isinstance(val, bool) or not isinstance(val, int)):
                raise ConfigError(f"{key} must be an integer, got {val!r}")
        try:
            return cls(lam=lam, **data)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(data)
