"""Canned experiments, model persistence and surface export."""

from __future__ import annotations

import csv
import json
import os
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import slits
from .anneal import AnnealConfig, TrainingSet, train_restarts
from .slits import SlitNeuron, random_slit_neuron
from .slm import SlmNeuron, random_slm_neuron
from .waveguide import WgmNeuron

HIGH_INDEX = 5 / 3
BOOLEAN_INPUTS = np.array(
    [(1.0, 1.0), (1.0, HIGH_INDEX), (HIGH_INDEX, 1.0), (HIGH_INDEX, HIGH_INDEX)]
)
XOR_PATTERN = (0.0, 1.0, 1.0, 0.0)
SURFACE_RANGE = (1.0, 1.67)
PENALTY_WEIGHT = 10.0
DEFAULT_CONFIG = AnnealConfig()


# ---------------------------------------------------------------- models


def model_kind(data: dict) -> str:
    if "kind" in data:
        return data["kind"]
    if "universes" in data:
        return "wgm"
    if "nodes" in data:
        return "slm"
    if "gaps" in data:
        return "slit"
    raise ValueError("cannot tell the model kind from its keys")


def model_from_dict(data: dict):
    kind = model_kind(data)
    loaders = {"slit": SlitNeuron.from_dict, "wgm": WgmNeuron.from_dict,
               "slm": SlmNeuron.from_dict}
    if kind not in loaders:
        raise ValueError(f"unknown model kind {kind!r}")
    return loaders[kind](data)


def model_to_dict(model) -> dict:
    kinds = {SlitNeuron: "slit", WgmNeuron: "wgm", SlmNeuron: "slm"}
    return {"kind": kinds[type(model)], **model.to_dict()}


def load_model(path: str | Path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def save_model(model, path: str | Path) -> None:
    write_json(model_to_dict(model), path)


def write_json(data: dict, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------- boolean


def boolean_targets(code: int) -> np.ndarray:
    """Truth table of function ``code``; bit ``k`` is the output on input row ``k``."""
    if not 0 <= code < 16:
        raise ValueError("two-input Boolean functions are numbered 0..15")
    return np.array([(code >> k) & 1 for k in range(4)], dtype=float)


def boolean_dataset(code: int) -> TrainingSet:
    return TrainingSet(BOOLEAN_INPUTS, boolean_targets(code))


def run_xor_demo(h_over_lambda: float = 1e4, wavelength: float = 1.0,
                 r2_over_h: float = 10.0, tolerance: float = 1e-3) -> dict:
    """Exact path sum of the tuned double slit at the four Boolean inputs."""
    if h_over_lambda < 1e3:
        raise ValueError("h/lambda must be at least 1000")
    h = h_over_lambda * wavelength
    stack = slits.xor_stack(r2_over_h * h, h, wavelength)
    raw = slits.detection_probabilities(stack, BOOLEAN_INPUTS)
    normalized = raw / raw.max()
    deviation = float(np.max(np.abs(normalized - XOR_PATTERN)))
    closed = [slits.xor_closed_form(*n) for n in BOOLEAN_INPUTS]
    return {
        "h_over_lambda": h_over_lambda,
        "path_difference": slits.xor_path_difference(stack) / wavelength,
        "raw": raw.tolist(),
        "normalized": normalized.tolist(),
        "closed_form": closed,
        "max_deviation": deviation,
        "passed": deviation < tolerance,
        "stack": stack.to_dict(),
    }


def _slit_factory(rng):
    return random_slit_neuron(rng, slits=4, gap=20.0, spread=15.0)


def _boolean_job(args):
    code, config, restarts, tolerance, seed = args
    result = train_restarts(_slit_factory, boolean_dataset(code), config, restarts,
                            tolerance, seed, (code,))
    outputs = result.model.outputs(BOOLEAN_INPUTS)
    return {
        "function": code,
        "targets": boolean_targets(code).tolist(),
        "outputs": outputs.tolist(),
        "max_deviation": result.report.max_deviation,
        "restarts": result.restarts,
        "success": result.success,
        "model": model_to_dict(result.model),
    }


def run_boolean_suite(config: AnnealConfig = DEFAULT_CONFIG, restarts: int = 20,
                      tolerance: float = 0.1, seed: int = 0, jobs: int = 1,
                      functions: Sequence[int] = range(16)) -> dict:
    """Train the four-slit barrier on each two-input Boolean function."""
    tasks = [(code, config, restarts, tolerance, seed) for code in functions]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_boolean_job, tasks))
    else:
        results = [_boolean_job(t) for t in tasks]
    failed = [r["function"] for r in results if not r["success"]]
    return {"seed": seed, "results": results, "failed": failed,
            "passed": len(results) - len(failed), "total": len(results)}


def run_slm_training(data: TrainingSet, config: AnnealConfig = DEFAULT_CONFIG,
                     restarts: int = 20, tolerance: float = 0.1, seed: int = 0,
                     nodes: int = 32):
    """Anneal randomly initialized SLM neurons, calibrated so max output is 1."""
    def factory(rng):
        return random_slm_neuron(rng, nodes).calibrated(data.inputs)

    return train_restarts(factory, data, config, restarts, tolerance, seed)


# ---------------------------------------------------------------- surfaces


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    x1: np.ndarray
    x2: np.ndarray
    values: np.ndarray  # values[i, j] is the output at (x1[i], x2[j])

    def __post_init__(self):
        if self.values.shape != (len(self.x1), len(self.x2)):
            raise ValueError("surface values do not match the axes")
        if np.any(self.values < 0):
            raise ValueError("surface values must be non-negative")

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x1", "x2", "p"])
            for i, a in enumerate(self.x1):
                for j, b in enumerate(self.x2):
                    writer.writerow([f"{a:.12g}", f"{b:.12g}", f"{self.values[i, j]:.12g}"])

    @classmethod
    def read_csv(cls, path: str | Path) -> "SurfaceGrid":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        data = np.array(rows, dtype=float)
        x1, x2 = np.unique(data[:, 0]), np.unique(data[:, 1])
        return cls(x1, x2, data[:, 2].reshape(len(x1), len(x2)))


def export_surface(model, resolution: int = 101,
                   bounds: Sequence[tuple[float, float]] = (SURFACE_RANGE, SURFACE_RANGE)
                   ) -> SurfaceGrid:
    if model.arity != 2:
        raise ValueError("surface export needs a two-input model")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    x1 = np.linspace(*bounds[0], resolution)
    x2 = np.linspace(*bounds[1], resolution)
    mesh = np.stack(np.meshgrid(x1, x2, indexing="ij"), axis=-1).reshape(-1, 2)
    values = np.asarray(model.outputs(mesh)).reshape(resolution, resolution)
    return SurfaceGrid(x1, x2, values)


TIE_TOLERANCE = 1e-12


def _interior_extrema(line: np.ndarray, atol: float = 0.0) -> int:
    # neighbours closer than atol count as equal, so round-off on a flat
    # stretch is not mistaken for an extremum
    step = np.diff(line)
    sign = np.where(np.abs(step) <= atol, 0, np.sign(step))
    left, right = sign[:-1], sign[1:]
    return int(np.count_nonzero(left * right < 0))


def smoothness_metric(grid: SurfaceGrid, rtol: float = TIE_TOLERANCE) -> float:
    """Mean number of strict interior local extrema along grid rows and columns.

    Differences below ``rtol`` times the largest value are treated as ties.
    """
    v = grid.values
    if min(v.shape) < 3:
        raise ValueError("need at least 3 points per axis")
    atol = rtol * float(np.max(np.abs(v)))
    counts = [_interior_extrema(v[i, :], atol) for i in range(v.shape[0])]
    counts += [_interior_extrema(v[:, j], atol) for j in range(v.shape[1])]
    return float(np.mean(counts))


# ---------------------------------------------------------------- generalization


def spread_penalty(limit: float | None = None, target: float | None = None,
                   index_spread: float = HIGH_INDEX - 1, weight: float = PENALTY_WEIGHT):
    """Penalty on the optical path spread ``index_spread * path_spread``.

    With ``limit`` only excess above it is penalized; with ``target`` any
    departure from it is. Both are measured in wavelengths.
    """
    if (limit is None) == (target is None):
        raise ValueError("give exactly one of limit or target")

    def penalty(model: SlitNeuron) -> float:
        optical = index_spread * model.path_spread() / model.stack.wavelength
        if limit is not None:
            excess = max(0.0, optical - limit)
        else:
            excess = optical - target
        return weight * excess * excess

    return penalty


def run_smoothness_comparison(seed: int = 0, function: int = 8,
                              config: AnnealConfig = DEFAULT_CONFIG,
                              restarts: int = 5, resolution: int = 101) -> dict:
    """Train one function with small and with large optical path spread.

    Function 8 (AND) by default. The constrained run keeps
    ``dn * dl <= lambda/2``, the other is pulled to ``dn * dl ~ 4 lambda``.
    """
    data = boolean_dataset(function)
    out = {"seed": seed, "function": function}
    for label, penalty in (("constrained", spread_penalty(limit=0.5)),
                           ("unconstrained", spread_penalty(target=4.0))):
        result = train_restarts(_slit_factory, data, config, restarts, 0.1, seed,
                                (function, label == "constrained"), penalty)
        grid = export_surface(result.model, resolution)
        out[label] = {
            "smoothness": smoothness_metric(grid),
            "max_deviation": result.report.max_deviation,
            "optical_spread": (HIGH_INDEX - 1) * result.model.path_spread()
                              / result.model.stack.wavelength,
            "restarts": result.restarts,
        }
    out["smoother_when_constrained"] = (
        out["constrained"]["smoothness"] < out["unconstrained"]["smoothness"]
    )
    return out


def seed_from_env(seed: int | None, default: int = 0) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("QNEURON_SEED")
    return int(env) if env not in (None, "") else default
