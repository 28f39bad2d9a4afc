"""Per-slot dynamics of type-1 devices under fast retrial.

One slot proceeds as: arrivals are appended to the device queues, every
device with a nonempty queue transmits a uniformly drawn preamble from the
type-1 pool, devices whose preamble nobody else picked succeed and pop one
request, everybody else retries in the next slot.

All randomness comes from a single ``numpy.random.Generator`` consumed in a
fixed order: arrivals for devices 0..N1-1, then preamble draws for the
active devices in ascending index order.
"""

from __future__ import annotations

import enum
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np


class ArrivalLaw(str, enum.Enum):
    BERNOULLI = "bernoulli"
    POISSON = "poisson"


@dataclass(frozen=True)
class ArrivalModel:
    """Per-device iid arrival process with mean ``rates[n]`` requests/slot."""

    law: ArrivalLaw
    rates: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "law", ArrivalLaw(self.law))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if not self.rates:
            raise ValueError("at least one device rate is required")
        for r in self.rates:
            if not math.isfinite(r) or r < 0:
                raise ValueError(f"arrival rate must be finite and >= 0, got {r}")
            if self.law is ArrivalLaw.BERNOULLI and r > 1:
                raise ValueError(f"Bernoulli arrival rate must be <= 1, got {r}")

    @classmethod
    def uniform(cls, n1: int, rate: float, law: ArrivalLaw | str = ArrivalLaw.BERNOULLI) -> "ArrivalModel":
        return cls(ArrivalLaw(law), (rate,) * n1)

    @property
    def n1(self) -> int:
        return len(self.rates)

    @property
    def mean_rate(self) -> float:
        return sum(self.rates) / len(self.rates)


@dataclass
class DeviceState:
    """Queue of pending requests, each tagged with its arrival slot."""

    arrival_slots: deque = field(default_factory=deque)

    @property
    def queue_len(self) -> int:
        return len(self.arrival_slots)


@dataclass(frozen=True)
class SlotOutcome:
    slot: int
    active: frozenset[int]
    choices: Mapping[int, int]
    successes: frozenset[int]
    collisions: frozenset[int]
    # (device, access delay) for every request served this slot
    served: tuple[tuple[int, int], ...] = ()

    @property
    def k1(self) -> int:
        return len(self.active)


def sample_arrivals(model: ArrivalModel, rng: np.random.Generator) -> list[int]:
    if model.law is ArrivalLaw.BERNOULLI:
        return [1 if rng.random() < r else 0 for r in model.rates]
    return [int(rng.poisson(r)) for r in model.rates]


def select_preambles(active: Sequence[int] | set[int], l1: int, rng: np.random.Generator) -> dict[int, int]:
    """Draw a preamble in ``1..l1`` for every active device, lowest index first."""
    if l1 < 1:
        raise ValueError(f"preamble pool size must be >= 1, got {l1}")
    return {n: int(rng.integers(1, l1 + 1)) for n in sorted(active)}


def resolve_collisions(choices: Mapping[object, int]) -> tuple[set, set]:
    counts = Counter(choices.values())
    successes = {dev for dev, p in choices.items() if counts[p] == 1}
    collisions = set(choices) - successes
    return successes, collisions


def step_slot(
    devices: list[DeviceState],
    model: ArrivalModel,
    l1: int,
    slot: int,
    rng: np.random.Generator,
    arrivals: Sequence[int] | None = None,
) -> tuple[list[DeviceState], SlotOutcome]:
    """Advance all devices by one slot, mutating ``devices`` in place.

    ``arrivals`` overrides the sampled arrival counts (scripted replays);
    when given, no arrival randomness is consumed.
    """
    if l1 < 1:
        raise ValueError(f"preamble pool size must be >= 1, got {l1}")
    if len(devices) != model.n1:
        raise ValueError("device list and arrival model disagree on N1")
    if arrivals is None:
        arrivals = sample_arrivals(model, rng)
    for dev, a in zip(devices, arrivals):
        dev.arrival_slots.extend([slot] * a)

    active = [n for n, dev in enumerate(devices) if dev.arrival_slots]
    choices = select_preambles(active, l1, rng)
    successes, collisions = resolve_collisions(choices)
    served = tuple((n, slot - devices[n].arrival_slots.popleft()) for n in sorted(successes))
    outcome = SlotOutcome(
        slot=slot,
        active=frozenset(active),
        choices=choices,
        successes=frozenset(successes),
        collisions=frozenset(collisions),
        served=served,
    )
    return devices, outcome


def new_devices(n1: int) -> list[DeviceState]:
    return [DeviceState() for _ in range(n1)]
