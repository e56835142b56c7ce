"""Parameter sweeps over (Delta, tau0) and the log-log scaling law.

Run ``r`` of grid point ``i`` draws from ``make_rng(master_seed, (i, r))``.
Results are folded in (point, run) order, so the table does not depend on
how many worker processes were used.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._linfit import line_fit
from .dynamics import mean_jump_probability, simulate_run
from .errors import InsufficientDataError
from .units import ModelParams, PhysicalParams, dimensionless_time_to_seconds

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ("delta", "tau0", "x_m", "domega", "dtau", "mean_tau_jump",
                 "std_tau_jump", "n_jumps", "n_kicks", "seed")


@dataclass
class SweepGrid:
    """Grid of noise amplitudes and kick times at fixed x_m and domega.

    ``dtau_rule`` is ``("fraction", f)`` for ``dtau = f * tau0`` or
    ``("fixed", value)``. When ``kicks_per_point`` is ``None`` the kick
    budget is sized from the phase-averaged jump probability so that each
    point should collect about ``target_jumps`` jumps.
    """

    delta_values: list = field(default_factory=lambda: list(np.geomspace(10, 300, 5)))
    tau0_values: list = field(default_factory=lambda: list(np.geomspace(1e-3, 1, 5)))
    x_m: float = 1.2e5
    domega: float = 4.2e-7
    dtau_rule: tuple = ("fraction", 0.25)
    kicks_per_point: int | None = None
    runs_per_point: int = 1
    master_seed: int = 0
    target_jumps: int = 1000
    max_kicks_per_point: int = 2_000_000_000

    def __post_init__(self):
        if not len(self.delta_values) or not len(self.tau0_values):
            raise ValueError("delta_values and tau0_values must be non-empty")
        if self.dtau_rule[0] not in ("fraction", "fixed"):
            raise ValueError(f"unknown dtau rule {self.dtau_rule!r}")
        if self.runs_per_point < 1:
            raise ValueError("runs_per_point must be >= 1")
        if self.kicks_per_point is not None and self.kicks_per_point < 1:
            raise ValueError("kicks_per_point must be >= 1")

    def dtau_for(self, tau0: float) -> float:
        kind, value = self.dtau_rule
        return value * tau0 if kind == "fraction" else value

    def points(self, template: ModelParams) -> list[ModelParams]:
        return [
            replace(template, delta_amp=float(d), tau0=float(t), dtau=self.dtau_for(float(t)),
                    x_m=self.x_m, domega=self.domega)
            for d in self.delta_values
            for t in self.tau0_values
        ]


@dataclass
class SweepRow:
    point_index: int
    delta: float
    tau0: float
    x_m: float
    domega: float
    dtau: float
    mean_tau_jump: float
    std_tau_jump: float
    n_jumps: int
    n_intervals: int
    n_kicks: int
    seed: int

    @property
    def ok(self) -> bool:
        return self.n_intervals >= 2

    @property
    def std_err(self) -> float:
        return self.std_tau_jump / math.sqrt(self.n_intervals) if self.ok else math.nan

    def as_record(self) -> dict:
        return {c: getattr(self, c) for c in SWEEP_COLUMNS}


@dataclass
class ScalingFit:
    p: float
    q: float
    residual_rms: float
    points: list  # (delta, tau0, mean_tau_jump, std_err)

    def predict(self, delta, tau0):
        """Mean jump interval (dimensionless) from the fitted power law."""
        return np.exp(self.p + self.q * np.log(np.asarray(tau0) / np.asarray(delta) ** 2))


def kicks_for_target(params: ModelParams, target_jumps: int, safety: float = 1.5) -> int:
    p = mean_jump_probability(params)
    if p <= 0:
        raise ValueError("jump probability is zero for this point")
    return int(math.ceil(safety * target_jumps / p))


def _run_one(args):
    params, n_kicks, master_seed, point, run = args
    trace = simulate_run(params, max_kicks=n_kicks, seed=master_seed, stream=(point, run))
    return trace.intervals, trace.n_jumps, trace.kick_count


def run_sweep(grid: SweepGrid, template: ModelParams, n_jobs: int = 1) -> list[SweepRow]:
    """Simulate every grid point and pool the intervals of its runs.

    Points with fewer than two intervals are returned with NaN moments and
    ``ok == False``.
    """
    points = grid.points(template)
    tasks = []
    for i, params in enumerate(points):
        if grid.kicks_per_point is not None:
            total = grid.kicks_per_point
        else:
            total = min(kicks_for_target(params, grid.target_jumps), grid.max_kicks_per_point)
        per_run = max(1, math.ceil(total / grid.runs_per_point))
        expected = per_run * grid.runs_per_point * mean_jump_probability(params)
        if expected < 100:
            log.warning("point %d (delta=%g, tau0=%g) expects only %.0f jumps",
                        i, params.delta_amp, params.tau0, expected)
        tasks.extend((params, per_run, grid.master_seed, i, r) for r in range(grid.runs_per_point))

    if n_jobs == 1:
        results = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_one, tasks))

    rows = []
    for i, params in enumerate(points):
        chunk = results[i * grid.runs_per_point : (i + 1) * grid.runs_per_point]
        intervals = np.concatenate([c[0] for c in chunk])
        n_int = len(intervals)
        rows.append(SweepRow(
            point_index=i,
            delta=params.delta_amp,
            tau0=params.tau0,
            x_m=params.x_m,
            domega=params.domega,
            dtau=params.dtau,
            mean_tau_jump=float(intervals.mean()) if n_int >= 2 else math.nan,
            std_tau_jump=float(intervals.std()) if n_int >= 2 else math.nan,
            n_jumps=int(sum(c[1] for c in chunk)),
            n_intervals=n_int,
            n_kicks=int(sum(c[2] for c in chunk)),
            seed=grid.master_seed,
        ))
        if n_int < 2:
            log.warning("point %d produced fewer than 2 intervals", i)
    return rows


def fit_scaling(rows) -> ScalingFit:
    """Unweighted fit of ``ln<tau_jump> = p + q ln(tau0 / Delta^2)`` over valid rows."""
    good = [r for r in rows if r.ok]
    if len(good) < 4:
        raise InsufficientDataError(f"need at least 4 valid sweep points, got {len(good)}")
    x = np.log([r.tau0 / r.delta**2 for r in good])
    if np.ptp(x) == 0:
        raise ValueError("all points share the same tau0/Delta^2")
    y = np.log([r.mean_tau_jump for r in good])
    q, p, _ = line_fit(x, y)
    rms = float(np.sqrt(np.mean((y - (p + q * x)) ** 2)))
    return ScalingFit(p, q, rms, [(r.delta, r.tau0, r.mean_tau_jump, r.std_err) for r in good])


def predict_physical_time(fit: ScalingFit, delta: float, tau0: float, phys: PhysicalParams) -> float:
    """Predicted mean jump interval in seconds."""
    return float(dimensionless_time_to_seconds(fit.predict(delta, tau0), phys))
