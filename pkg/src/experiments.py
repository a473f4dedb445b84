"""Memory experiments: engine retention against trace length and parameters."""

import time
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np
import pandas as pd

from src.config import settings
from src.engine import new_engine
from src.exceptions import ConfigurationError
from src.logger import app_logger
from src.stdlib import EXPERIMENT_FAMILIES, experiment_spec
from src.syntax import Specification
from src.values import Value, bool_value, enum_value, int_value

Event = Dict[str, Value]


def synthetic_columns(family: str, length: int, n: int, seed: Optional[int] = None) -> Dict[str, np.ndarray]:
    """Raw input columns for ``family``: a noisy period-n signal, random ints or flags."""
    rng = np.random.default_rng(settings.experiment_seed if seed is None else seed)
    if family == "nsum":
        return {"s": rng.integers(-1000, 1000, size=length)}
    if family == "alarm":
        return {
            "alarm": rng.random(length) < 0.1,
            "allclear": rng.random(length) < 0.3,
            "shutdown": rng.random(length) < 0.05,
        }
    if family == "sender":
        return {"senderState": rng.integers(0, 3, size=length)}
    if family not in EXPERIMENT_FAMILIES:
        raise ConfigurationError(f"unknown experiment {family}")
    signal = (np.arange(length) % max(n, 1)) < max(n // 2, 1)
    flips = rng.random(length) < 0.05
    return {"p": signal ^ flips}


def synthetic_events(family: str, length: int, n: int, spec: Specification,
                     seed: Optional[int] = None) -> Iterator[Event]:
    """Events built lazily from the synthetic columns."""
    columns = synthetic_columns(family, length, n, seed)
    types = {decl.name: decl.type for decl in spec.inputs}
    for j in range(length):
        event: Event = {}
        for name, column in columns.items():
            value_type = types[name]
            if value_type.is_enum:
                event[name] = enum_value(value_type, value_type.variants[int(column[j])])
            elif column.dtype == np.bool_:
                event[name] = bool_value(bool(column[j]))
            else:
                event[name] = int_value(int(column[j]))
        yield event


def measure(family: str, n: int, length: int, seed: Optional[int] = None,
            simplify: Optional[bool] = None) -> Dict[str, Union[int, float, str]]:
    """Run one synthetic trace and report engine statistics."""
    spec = experiment_spec(family, n)
    engine = new_engine(spec, simplify=simplify)
    started = time.perf_counter()
    for event in synthetic_events(family, length, n, spec, seed):
        engine.push_event(event)
    engine.finish()
    elapsed = time.perf_counter() - started
    stats = engine.stats()
    streams = len(spec.decls)
    return {
        "family": family,
        "n": n,
        "length": length,
        "streams": streams,
        "window": engine.window,
        **stats.to_dict(),
        "retained_cells": stats.max_retained * streams,
        "seconds": round(elapsed, 3),
    }


def sweep(family: str, ns: Iterable[int], lengths: Iterable[int], seed: Optional[int] = None,
          simplify: Optional[bool] = None) -> pd.DataFrame:
    """One row per (n, length) combination."""
    lengths = list(lengths)
    records = []
    for n in ns:
        for length in lengths:
            record = measure(family, n, length, seed, simplify)
            app_logger.info(f"{family} n={n} length={length}: retained {record['max_retained']}")
            records.append(record)
    return pd.DataFrame.from_records(records)


def linear_fit(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float]:
    """(slope, intercept, largest residual relative to the fitted value)."""
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x_arr, y_arr, 1)
    fitted = slope * x_arr + intercept
    residual = np.abs(y_arr - fitted) / np.maximum(np.abs(fitted), 1e-9)
    return float(slope), float(intercept), float(residual.max())


def plot_sweep(frame: pd.DataFrame, x: str, y: str, path: Union[str, Path]) -> Path:
    """Plot ``y`` against ``x``, one line per value of the other sweep axis."""
    group = "length" if x == "n" else "n"
    fig, ax = plt.subplots(figsize=(7, 4))
    for key, part in frame.groupby(group):
        part = part.sort_values(x)
        ax.plot(part[x], part[y], marker="o", label=f"{group}={key}")
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.set_title(f"{frame['family'].iloc[0]}: {y} by {x}")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def summarize(frame: pd.DataFrame) -> List[str]:
    """Slope of retained instants and cells against n, per trace length."""
    lines = []
    for length, part in frame.groupby("length"):
        if part["n"].nunique() < 2:
            continue
        slope, _, residual = linear_fit(part["n"], part["max_retained"])
        cells, _, cell_residual = linear_fit(part["n"], part["retained_cells"])
        lines.append(
            f"length {length}: instants/n slope {slope:.2f} (max deviation {residual:.1%}), "
            f"cells/n slope {cells:.2f} (max deviation {cell_residual:.1%})"
        )
    return lines
