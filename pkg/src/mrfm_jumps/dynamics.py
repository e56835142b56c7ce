"""Quantum-jump engine.

The cantilever tip moves on a prescribed harmonic trajectory whose
frequency is ``1 + branch * domega``. Each telegraph kick rotates the
effective field ``(epsilon, 0, 2*eta*x_c + Delta)``; the spin then collapses
onto the new field and ends up reversed relative to it with probability
``sin^2(dTheta / 2)``.

Random numbers come from numpy's PCG64 bit generator seeded through
``SeedSequence(seed, spawn_key=stream)``. Every kick consumes exactly two
doubles in order (kick spacing, then the Bernoulli draw), preceded by one
double when the initial telegraph sign is random. The chunk size used to
fetch draws therefore never changes a trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from .noise import KickEvent, TelegraphConfig, draw_initial_sign
from .units import ModelParams

RNG_ALGORITHM = "PCG64 (numpy), seeded via SeedSequence(seed, spawn_key=stream)"


def make_rng(seed: int, stream: tuple[int, ...] = ()) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(stream))))


@dataclass(frozen=True)
class PhaseState:
    """Cantilever phase bookkeeping; phase is continuous across jumps."""

    time: float = 0.0
    phase: float = 0.0
    branch: int = 1

    def phase_at(self, tau, domega: float):
        return self.phase + (1.0 + self.branch * domega) * (tau - self.time)

    def flipped(self, tau: float, domega: float) -> "PhaseState":
        return PhaseState(tau, self.phase_at(tau, domega), -self.branch)


class EffectiveField(NamedTuple):
    x: float
    y: float
    z: float


def ct_position(tau, phase_state: PhaseState, params: ModelParams):
    return params.x_m * np.cos(phase_state.phase_at(tau, params.domega))


def effective_field(tau, delta_value, params: ModelParams, phase_state: PhaseState) -> EffectiveField:
    z = 2.0 * params.eta * ct_position(tau, phase_state, params) + delta_value
    return EffectiveField(params.epsilon, 0.0, z)


def jump_probability(before, after) -> float:
    """Probability ``sin^2(dTheta/2)`` that the spin flips relative to the field.

    Only the directions of the two fields matter. The angle comes from
    ``atan2(|a x b|, a . b)`` so tiny rotations are not lost to cancellation.
    """
    a = np.asarray(before, dtype=float)
    b = np.asarray(after, dtype=float)
    if np.linalg.norm(a) == 0 or np.linalg.norm(b) == 0:
        raise ValueError("effective field has zero magnitude")
    angle = math.atan2(np.linalg.norm(np.cross(a, b)), float(np.dot(a, b)))
    return math.sin(0.5 * angle) ** 2


def retain_probability(before, after) -> float:
    return 1.0 - jump_probability(before, after)


def mean_jump_probability(params: ModelParams, n_phase: int = 1 << 16) -> float:
    """Per-kick jump probability averaged over a uniform cantilever phase.

    ``tau0 / mean_jump_probability`` approximates the mean jump interval
    whenever a single transverse crossing rarely produces more than one jump.
    """
    phi = (np.arange(n_phase) + 0.5) * (2.0 * np.pi / n_phase)
    zc = 2.0 * params.eta * params.x_m * np.cos(phi)
    a = zc + params.delta_amp
    b = zc - params.delta_amp
    angle = np.arctan2(params.epsilon * np.abs(a - b), params.epsilon**2 + a * b)
    return float(np.mean(np.sin(0.5 * angle) ** 2))


@njit(cache=True)
def _advance(u, tau0, dtau, eps, eta, x_m, delta, domega, t_max,
             fstate, istate, jump_times, jump_kicks, kick_log_t, kick_log_s):
    # fstate: time, segment start time, segment start phase
    # istate: branch, telegraph sign, kicks done, jumps stored
    t = fstate[0]
    seg_t = fstate[1]
    seg_phi = fstate[2]
    branch = istate[0]
    tele = istate[1]
    kicks = istate[2]
    nj = 0
    n_used = 0
    n_log = kick_log_t.shape[0]
    for k in range(u.shape[0]):
        t_next = t + (tau0 + dtau * (2.0 * u[k, 0] - 1.0))
        if t_next > t_max:
            break
        t = t_next
        n_used += 1
        phi = seg_phi + (1.0 + branch * domega) * (t - seg_t)
        zc = 2.0 * eta * (x_m * math.cos(phi))
        a = zc + delta * tele
        b = zc - delta * tele
        angle = math.atan2(eps * abs(a - b), eps * eps + a * b)
        s = math.sin(0.5 * angle)
        tele = -tele
        if kicks < n_log:
            kick_log_t[kicks] = t
            kick_log_s[kicks] = tele
        kicks += 1
        if u[k, 1] < s * s:
            jump_times[nj] = t
            jump_kicks[nj] = kicks
            nj += 1
            seg_phi = phi
            seg_t = t
            branch = -branch
    fstate[0] = t
    fstate[1] = seg_t
    fstate[2] = seg_phi
    istate[0] = branch
    istate[1] = tele
    istate[2] = kicks
    istate[3] = nj
    return n_used


@dataclass
class JumpTrace:
    """Result of one simulation run.

    ``jump_kicks[i]`` is the 1-based index of the kick that produced jump i.
    """

    jump_times: np.ndarray
    jump_kicks: np.ndarray
    initial_branch: int
    total_duration: float
    kick_count: int
    seed: int = 0
    stream: tuple = ()
    initial_sign: int = 1
    kicks: list = field(default_factory=list)

    @property
    def intervals(self) -> np.ndarray:
        """Gaps between consecutive jumps; the wait before the first jump is excluded."""
        return np.diff(self.jump_times)

    @property
    def n_jumps(self) -> int:
        return len(self.jump_times)

    @property
    def final_branch(self) -> int:
        return self.initial_branch * (-1) ** (self.n_jumps % 2)


def simulate_run(
    params: ModelParams,
    telegraph: TelegraphConfig | None = None,
    *,
    max_kicks: int | None = None,
    max_time: float | None = None,
    seed: int = 0,
    stream: tuple[int, ...] = (),
    initial_branch: int = 1,
    record_kicks: int = 0,
    chunk_size: int = 1 << 16,
) -> JumpTrace:
    """Run the jump model for ``max_kicks`` kicks or up to time ``max_time``.

    Exactly one stop criterion must be given. ``telegraph`` defaults to the
    noise settings in ``params`` with a random initial sign; if supplied, its
    amplitude and timing must agree with ``params``.
    """
    if (max_kicks is None) == (max_time is None):
        raise ValueError("give exactly one of max_kicks or max_time")
    if max_kicks is not None and (int(max_kicks) != max_kicks or max_kicks <= 0):
        raise ValueError(f"max_kicks must be a positive integer, got {max_kicks!r}")
    if max_time is not None and not (max_time > 0 and math.isfinite(max_time)):
        raise ValueError(f"max_time must be positive and finite, got {max_time!r}")
    if initial_branch not in (1, -1):
        raise ValueError("initial_branch must be +1 or -1")
    if telegraph is None:
        telegraph = TelegraphConfig.from_model(params)
    elif (telegraph.delta_amp, telegraph.tau0, telegraph.dtau) != (params.delta_amp, params.tau0, params.dtau):
        raise ValueError("telegraph config disagrees with model parameters")

    rng = make_rng(seed, stream)
    sign0 = draw_initial_sign(telegraph, rng)

    fstate = np.zeros(3)
    istate = np.array([initial_branch, sign0, 0, 0], dtype=np.int64)
    kick_log_t = np.empty(record_kicks)
    kick_log_s = np.empty(record_kicks, dtype=np.int64)
    t_max = math.inf if max_time is None else float(max_time)
    remaining = math.inf if max_kicks is None else int(max_kicks)
    jump_buf = np.empty(chunk_size)
    kick_buf = np.empty(chunk_size, dtype=np.int64)
    times, kick_ids = [], []
    while remaining > 0:
        n = int(min(chunk_size, remaining))
        u = rng.random((n, 2))
        used = _advance(u, params.tau0, params.dtau, params.epsilon, params.eta, params.x_m,
                        params.delta_amp, params.domega, t_max, fstate, istate,
                        jump_buf, kick_buf, kick_log_t, kick_log_s)
        nj = istate[3]
        if nj:
            times.append(jump_buf[:nj].copy())
            kick_ids.append(kick_buf[:nj].copy())
        remaining -= used
        if used < n:
            break

    kicks_done = int(istate[2])
    n_logged = min(record_kicks, kicks_done)
    return JumpTrace(
        jump_times=np.concatenate(times) if times else np.empty(0),
        jump_kicks=np.concatenate(kick_ids) if kick_ids else np.empty(0, dtype=np.int64),
        initial_branch=initial_branch,
        total_duration=float(fstate[0]) if max_time is None else float(max_time),
        kick_count=kicks_done,
        seed=seed,
        stream=tuple(stream),
        initial_sign=sign0,
        kicks=[KickEvent(float(kick_log_t[i]), int(kick_log_s[i])) for i in range(n_logged)],
    )
