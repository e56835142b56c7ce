"""Random telegraph field: a +/-delta signal that flips sign at every kick.

Kick spacings are independent and uniform on ``[tau0 - dtau, tau0 + dtau]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class TelegraphConfig:
    delta_amp: float
    tau0: float
    dtau: float = 0.0
    initial_sign: int | None = None  # None draws +1/-1 with equal odds

    def __post_init__(self):
        if self.delta_amp < 0:
            raise ValueError("delta_amp must be >= 0")
        if self.tau0 <= 0:
            raise ValueError("tau0 must be > 0")
        if not 0 <= self.dtau <= self.tau0:
            raise ValueError("dtau must lie in [0, tau0]")
        if self.initial_sign not in (None, 1, -1):
            raise ValueError("initial_sign must be +1, -1 or None")

    @classmethod
    def from_model(cls, params, initial_sign: int | None = None) -> "TelegraphConfig":
        return cls(params.delta_amp, params.tau0, params.dtau, initial_sign)


@dataclass(frozen=True)
class KickEvent:
    time: float
    sign_after: int


def draw_interval(config: TelegraphConfig, u):
    """Map a uniform variate on [0, 1) to a kick spacing."""
    return config.tau0 + config.dtau * (2.0 * u - 1.0)


def draw_initial_sign(config: TelegraphConfig, rng: np.random.Generator) -> int:
    """Resolve the sign before the first kick; consumes one draw only when random."""
    if config.initial_sign is not None:
        return config.initial_sign
    return 1 if rng.random() < 0.5 else -1


def next_kick(config: TelegraphConfig, current: KickEvent, rng: np.random.Generator) -> KickEvent:
    return KickEvent(current.time + draw_interval(config, rng.random()), -current.sign_after)


def iter_kicks(config: TelegraphConfig, rng: np.random.Generator) -> Iterator[KickEvent]:
    """Stream kicks lazily, starting after ``tau = 0``.

    One uniform draw per kick, preceded by a single draw if the initial
    sign is random.
    """
    event = KickEvent(0.0, draw_initial_sign(config, rng))
    while True:
        event = next_kick(config, event, rng)
        yield event


def generate_kicks(config: TelegraphConfig, n: int, seed: int = 0) -> list[KickEvent]:
    rng = np.random.default_rng(seed)
    kicks = iter_kicks(config, rng)
    return [next(kicks) for _ in range(n)]


def value_at(events: Sequence[KickEvent], config: TelegraphConfig, tau):
    """Telegraph field at ``tau``; the sign ``sign_after`` holds for tau > kick time.

    Raises ``ValueError`` for ``tau`` outside ``[0, last kick time]``.
    """
    if not events:
        raise ValueError("no kicks generated")
    times = np.fromiter((e.time for e in events), float, len(events))
    tau_arr = np.asarray(tau, dtype=float)
    if np.any(tau_arr < 0) or np.any(tau_arr > times[-1]):
        raise ValueError(f"tau outside generated range [0, {times[-1]}]")
    n_before = np.searchsorted(times, tau_arr, side="left")
    first_sign = -events[0].sign_after
    signs = np.where(n_before % 2 == 0, first_sign, -first_sign)
    out = signs * config.delta_amp
    return float(out) if out.ndim == 0 else out
