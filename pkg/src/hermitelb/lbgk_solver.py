"""Periodic one-dimensional LBGK stream-and-collide solver."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import EquilibriumKernel, default_order
from .lattice_model import ModelParams


@dataclass(frozen=True)
class ShockTube:
    rho_left: float = 1.0
    rho_right: float = 0.5


@dataclass(frozen=True)
class Uniform:
    rho: float = 1.0
    u: float = 0.0


@dataclass(frozen=True)
class SolverConfig:
    model: ModelParams
    nodes: int
    steps: int
    tau: float
    order_n: int | None = None
    init: object = field(default_factory=ShockTube)
    snapshot_every: int = 0  # 0 keeps only the final state
    threads: int = 1
    boundary: str = "periodic"

    def __post_init__(self):
        if self.order_n is None:
            object.__setattr__(self, "order_n", default_order(self.model.lattice.n_q))
        if not self.tau > 0.5:
            raise ValueError("tau must exceed 1/2")
        if self.nodes <= 2 * max(self.model.lattice.speeds):
            raise ValueError("domain too short for the largest speed")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.boundary != "periodic":
            raise ValueError("only periodic boundaries are supported")
        if not self.model.lattice.on_cartesian:
            raise ValueError("streaming needs integer speeds")

    @property
    def viscosity(self) -> float:
        return (self.tau - 0.5) * (1 + 2 * self.model.mu) * self.model.theta


def tau_for_viscosity(model: ModelParams, nu: float) -> float:
    return 0.5 + nu / ((1 + 2 * model.mu) * model.theta)


@dataclass
class SimulationState:
    f: np.ndarray  # (nodes, n_q)
    time: int = 0

    def density(self) -> np.ndarray:
        return self.f.sum(axis=1)

    def momentum(self, velocities: np.ndarray) -> np.ndarray:
        return self.f @ velocities


class Solver:
    def __init__(self, config: SolverConfig):
        self.config = config
        self.kernel = EquilibriumKernel(config.model, config.order_n)
        if not self.kernel.weights.positive:
            raise ValueError("weights are not all positive at this theta")
        self.c = self.kernel.velocities
        self.shifts = [int(round(v)) for v in self.c]
        self._pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()

    def positions(self) -> np.ndarray:
        """Node coordinates x = 1..L."""
        return np.arange(1, self.config.nodes + 1)

    def init_state(self) -> SimulationState:
        cfg = self.config
        x = self.positions()
        if isinstance(cfg.init, ShockTube):
            rho = np.where(x <= cfg.nodes / 2, cfg.init.rho_left, cfg.init.rho_right).astype(float)
            u = np.zeros(cfg.nodes)
        elif isinstance(cfg.init, Uniform):
            rho = np.full(cfg.nodes, float(cfg.init.rho))
            u = np.full(cfg.nodes, float(cfg.init.u))
        else:
            raise ValueError(f"unknown initial condition {cfg.init!r}")
        return SimulationState(self.kernel.evaluate(rho, u), 0)

    def _collide_block(self, f: np.ndarray, out: np.ndarray, sl: slice) -> None:
        blk = f[sl]
        rho = blk.sum(axis=1)
        if not np.all(rho > 0):
            bad = np.flatnonzero(~(rho > 0))[0] + (sl.start or 0)
            raise FloatingPointError(f"non-positive or NaN density at node {bad + 1}")
        u = (blk @ self.c) / rho
        feq = self.kernel.evaluate(rho, u)
        out[sl] = blk - (blk - feq) / self.config.tau

    def collide(self, state: SimulationState) -> SimulationState:
        f = state.f
        out = np.empty_like(f)
        n = f.shape[0]
        if self._pool is None:
            self._collide_block(f, out, slice(0, n))
        else:
            edges = np.linspace(0, n, self.config.threads + 1).astype(int)
            jobs = [self._pool.submit(self._collide_block, f, out, slice(a, b)) for a, b in zip(edges, edges[1:])]
            for j in jobs:
                j.result()
        return SimulationState(out, state.time)

    def stream(self, state: SimulationState) -> SimulationState:
        out = np.empty_like(state.f)
        for i, s in enumerate(self.shifts):
            out[:, i] = np.roll(state.f[:, i], s)
        return SimulationState(out, state.time + 1)

    def step(self, state: SimulationState) -> SimulationState:
        return self.stream(self.collide(state))


@dataclass
class Snapshot:
    step: int
    rho: np.ndarray
    u: np.ndarray
    mass: float
    momentum: float


@dataclass
class RunResult:
    config: SolverConfig
    snapshots: list
    final: SimulationState
    initial_mass: float

    @property
    def last(self) -> Snapshot:
        return self.snapshots[-1]


def _snapshot(state: SimulationState, c: np.ndarray) -> Snapshot:
    rho = state.density()
    mom = state.momentum(c)
    return Snapshot(state.time, rho, mom / rho, float(rho.sum()), float(mom.sum()))


def run(config: SolverConfig, state: SimulationState | None = None) -> RunResult:
    solver = Solver(config)
    try:
        st = state if state is not None else solver.init_state()
        m0 = float(st.f.sum())
        snaps = [_snapshot(st, solver.c)] if config.snapshot_every else []
        for n in range(1, config.steps + 1):
            st = solver.step(st)
            if config.snapshot_every and n % config.snapshot_every == 0 and n != config.steps:
                snaps.append(_snapshot(st, solver.c))
        final = _snapshot(st, solver.c)
        if not np.all(np.isfinite(final.rho)):
            raise FloatingPointError("NaN in final density")
        snaps.append(final)
        return RunResult(config, snaps, st, m0)
    finally:
        solver.close()


def shock_tube_config(model: ModelParams, nu: float = 1 / 30, nodes: int = 8000, steps: int = 3000, **kw) -> SolverConfig:
    return SolverConfig(model, nodes, steps, tau_for_viscosity(model, nu), **kw)


def front_position(rho: np.ndarray, start: int, level: float) -> int:
    """Index of the first node right of `start` where rho drops below level."""
    below = np.flatnonzero(rho[start:] < level)
    return int(start + below[0]) if below.size else -1
