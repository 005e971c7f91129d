"""Plot-ready per-timestep Gaussian tubes."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .core.exceptions import RangeError, UnsupportedQueryError
from .core.gaussian import ActionGaussian, GaussianModel, gaussian_two_sided_tail
from .core.membership import FittedModel, ModeConditionedModel
from .helpers import write_frame

_LOGGER = logging.getLogger(__name__)


def _level_name(level: float) -> str:
    return f"{level:g}"


def tube_columns(levels: Sequence[float]) -> list[str]:
    """Column order of an exported tube."""
    columns = ["mode_label", "step", "time", "center_x", "center_y", "sigma_x", "sigma_y"]
    for level in levels:
        name = _level_name(level)
        columns += [f"lower_x_{name}", f"upper_x_{name}", f"lower_y_{name}", f"upper_y_{name}"]
    return columns


def level_tails(levels: Sequence[float]) -> dict[str, float]:
    """Two-sided Gaussian exceedance of each sigma level."""
    return {_level_name(level): gaussian_two_sided_tail(level) for level in levels}


def _centre_and_spread(model: FittedModel) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(model, ActionGaussian):
        return model.means(), model.marginal_sigmas()
    if isinstance(model, GaussianModel) and model.dim == 2:
        return model.mean[None, :], np.sqrt(np.diag(model.cov))[None, :]
    raise UnsupportedQueryError(
        f"tube export needs a 2D Gaussian action model, got {getattr(model, 'model_class', type(model).__name__)}")


def tube_frame(model: FittedModel, mode_label: int | None, levels: Sequence[float],
               sample_rate: float | None = None) -> pd.DataFrame:
    """Centre line, marginal sigmas and centre +/- level * sigma per timestep."""
    if not levels:
        raise RangeError("tube export needs at least one sigma level")
    if any(level < 0 for level in levels):
        raise RangeError(f"sigma levels must be non-negative, got {list(levels)}")
    if isinstance(model, ModeConditionedModel):
        if mode_label is None:
            raise UnsupportedQueryError("a mode-conditioned model needs a mode label to export")
        try:
            model = model.models[mode_label]
        except KeyError as err:
            raise RangeError(f"no model was fitted for mode {mode_label}") from err

    centre, sigma = _centre_and_spread(model)
    steps = np.arange(1, len(centre) + 1)
    frame = pd.DataFrame({
        "mode_label": pd.array([mode_label] * len(centre), dtype="Int64"),
        "step": steps,
        "time": steps / sample_rate if sample_rate else steps.astype(float),
        "center_x": centre[:, 0],
        "center_y": centre[:, 1],
        "sigma_x": sigma[:, 0],
        "sigma_y": sigma[:, 1],
    })
    for level in levels:
        name = _level_name(level)
        frame[f"lower_x_{name}"] = centre[:, 0] - level * sigma[:, 0]
        frame[f"upper_x_{name}"] = centre[:, 0] + level * sigma[:, 0]
        frame[f"lower_y_{name}"] = centre[:, 1] - level * sigma[:, 1]
        frame[f"upper_y_{name}"] = centre[:, 1] + level * sigma[:, 1]
    return frame[tube_columns(levels)]


def export_tube(model: FittedModel, mode_label: int | None, levels: Sequence[float],
                path: Path | str, sample_rate: float | None = None) -> Path:
    """Write a Gaussian tube as CSV, one row per timestep."""
    frame = tube_frame(model, mode_label, levels, sample_rate)
    _LOGGER.info("Exporting %d-step tube at levels %s", len(frame), [_level_name(v) for v in levels])
    return write_frame(Path(path), frame)
