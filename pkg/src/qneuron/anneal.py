"""Simulated annealing over the flat parameter vector of any neuron model.

A model only has to provide ``parameters()``, ``with_parameters(vector)``,
``outputs(inputs)`` and ``arity``. The trainer perturbs one parameter at a
time by ``+/- step_scale``, accepts moves with the Metropolis rule and, after
every ``steps_per_epoch`` moves, resets the temperature to
``beta * E * exp(-gamma * epoch)`` where ``E`` is the current error.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

TEMPERATURE_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class TrainingSet:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        t = np.asarray(self.targets, dtype=float).reshape(-1)
        if len(x) != len(t):
            raise ValueError("inputs and targets differ in length")
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(x)):
            raise ValueError("training data must be finite")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", t)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[Sequence[float], float]]) -> "TrainingSet":
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def arity(self) -> int:
        return self.inputs.shape[1]

    @classmethod
    def read_csv(cls, path: str | Path) -> "TrainingSet":
        """Header row, then one row per pair: input components, then target."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 2:
            raise ValueError(f"{path}: need a header row and at least one pair")
        width = len(rows[0])
        if width < 2:
            raise ValueError(f"{path}: need at least one input column and a target")
        body = [r for r in rows[1:] if r]
        if any(len(r) != width for r in body):
            raise ValueError(f"{path}: inconsistent column count")
        data = np.array(body, dtype=float)
        return cls(data[:, :-1], data[:, -1])

    def write_csv(self, path: str | Path) -> None:
        header = [f"x{i + 1}" for i in range(self.arity)] + ["target"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for x, t in zip(self.inputs, self.targets):
                writer.writerow([f"{v:.12g}" for v in (*x, t)])


@dataclass(frozen=True)
class AnnealConfig:
    initial_temperature: float | None = None  # None: start at the initial error
    steps_per_epoch: int = 500
    beta: float = 1.0
    gamma: float = 0.05
    step_scale: float = 0.05
    max_epochs: int = 100
    stability_window: int = 5
    stability_tolerance: float = 1e-4
    error_tolerance: float = 1e-6
    full_vector: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if self.initial_temperature is not None and not self.initial_temperature > 0:
            raise ValueError("initial_temperature must be positive")
        for name in ("beta", "gamma", "step_scale", "stability_tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("steps_per_epoch", "stability_window"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "AnnealConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown anneal config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainReport:
    final_error: float
    error_trace: list[float]
    best_trace: list[float]
    accepted: int
    epochs: int
    steps: int
    converged: bool
    stop_reason: str
    max_deviation: float = field(default=float("nan"))

    def to_dict(self) -> dict:
        return asdict(self)


def _check_arity(model, data: TrainingSet) -> None:
    if model.arity != data.arity:
        raise ValueError(f"model takes {model.arity} inputs, data has {data.arity}")


def error_functional(model, data: TrainingSet) -> float:
    """``sum_alpha (P(x_alpha) - t_alpha)**2``."""
    _check_arity(model, data)
    r = model.outputs(data.inputs) - data.targets
    return float(r @ r)


def max_deviation(model, data: TrainingSet) -> float:
    _check_arity(model, data)
    return float(np.max(np.abs(model.outputs(data.inputs) - data.targets)))


def accept_probability(delta_e: float, temperature: float) -> float:
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    if delta_e <= 0:
        return 1.0
    return math.exp(-delta_e / temperature)


def train(model, data: TrainingSet, config: AnnealConfig = AnnealConfig(),
          penalty: Callable | None = None):
    """Anneal ``model`` on ``data``; returns ``(best model, report)``.

    ``penalty(model) -> float`` is added to the error when given. The best
    visited state is returned, not the last one.
    """
    _check_arity(model, data)

    inputs, targets = data.inputs, data.targets

    def objective(m) -> float:
        r = m.outputs(inputs) - targets
        e = float(r @ r)
        return e + penalty(m) if penalty is not None else e

    rng = np.random.default_rng(config.rng_seed)
    current, w = model, model.parameters()
    energy = objective(current)
    best, best_energy = current, energy
    trace, best_trace = [energy], [energy]
    snapshots = [w.copy()]
    accepted = steps = epochs = 0

    def finish(converged: bool, reason: str):
        report = TrainReport(
            final_error=best_energy, error_trace=trace, best_trace=best_trace,
            accepted=accepted, epochs=epochs, steps=steps, converged=converged,
            stop_reason=reason, max_deviation=max_deviation(best, data),
        )
        return best, report

    if energy < config.error_tolerance:
        return finish(True, "error below tolerance")
    temperature = config.initial_temperature or energy

    while epochs < config.max_epochs:
        for _ in range(config.steps_per_epoch):
            steps += 1
            proposal = w.copy()
            if config.full_vector:
                proposal += config.step_scale * rng.choice((-1.0, 1.0), size=len(w))
            else:
                i = rng.integers(len(w))
                proposal[i] += config.step_scale * (1.0 if rng.random() < 0.5 else -1.0)
            candidate = current.with_parameters(proposal)
            cand_energy = objective(candidate)
            delta = cand_energy - energy
            if delta <= 0 or rng.random() < accept_probability(delta, temperature):
                current, w, energy = candidate, candidate.parameters(), cand_energy
                accepted += 1
                if energy < best_energy:
                    best, best_energy = current, energy
                    if best_energy < config.error_tolerance:
                        epochs += 1
                        trace.append(energy)
                        best_trace.append(best_energy)
                        return finish(True, "error below tolerance")
        epochs += 1
        trace.append(energy)
        best_trace.append(best_energy)
        snapshots.append(w.copy())
        temperature = config.beta * energy * math.exp(-config.gamma * epochs)
        if temperature < TEMPERATURE_FLOOR:
            return finish(False, "temperature underflow")
        if len(snapshots) > config.stability_window:
            old = snapshots[-1 - config.stability_window]
            change = np.max(np.abs(w - old) / np.maximum(np.abs(old), 1e-12))
            if change < config.stability_tolerance:
                return finish(True, "parameters stable")
    return finish(False, "max epochs reached")


@dataclass
class RestartResult:
    model: object
    report: TrainReport
    restarts: int
    success: bool
    seeds: list[int]


def restart_seeds(master: int, *path: int, count: int) -> list[int]:
    """Per-restart seeds derived from ``master`` and an index path."""
    seq = np.random.SeedSequence([master, *path])
    return [int(s.generate_state(1)[0]) for s in seq.spawn(count)]


def train_restarts(factory: Callable, data: TrainingSet, config: AnnealConfig,
                   restarts: int, tolerance: float, master_seed: int = 0,
                   path: Sequence[int] = (), penalty: Callable | None = None) -> RestartResult:
    """Train fresh models until one reaches ``max_deviation < tolerance``.

    ``factory(rng)`` builds an initial model. Each restart gets its own seed
    for both the initial model and the annealing chain. The best attempt is
    returned when every restart fails.
    """
    seeds = restart_seeds(master_seed, *path, count=restarts)
    best = None
    for attempt, seed in enumerate(seeds, start=1):
        rng = np.random.default_rng(seed)
        start = factory(rng)
        cfg = AnnealConfig(**{**config.to_dict(), "rng_seed": seed})
        model, report = train(start, data, cfg, penalty)
        if best is None or report.max_deviation < best[1].max_deviation:
            best = (model, report)
        if report.max_deviation < tolerance:
            return RestartResult(model, report, attempt, True, seeds[:attempt])
    return RestartResult(best[0], best[1], restarts, False, seeds)
