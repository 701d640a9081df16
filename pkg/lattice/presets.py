"""Figure presets: model parameters as printed in the captions, plus the run settings used to reproduce them."""

import math

from lattice.errors import UnknownFigure
from lattice.model import ModelSpec

L = 150
X0 = 75

TRIVIAL_HALF = ModelSpec(model="ladder_trivial", t0=0.5, t1=0.5, gamma=0.8)
TRIVIAL_ONE = ModelSpec(model="ladder_trivial", t0=1.0, t1=0.5, gamma=0.8)
FLUX_A = ModelSpec(model="ladder_flux", t0=0.5, t1=0.5, tp=0.3, gamma=0.8, phi=math.pi / 2)
FLUX_B = ModelSpec(model="ladder_flux", t0=1.0, t1=0.5, tp=0.7, gamma=0.8, phi=math.pi / 2)

FIGURES = {
    "fig1b": {"kind": "spectrum", "model": TRIVIAL_HALF},
    "fig1c": {"kind": "spectrum", "model": TRIVIAL_ONE},
    "fig1d": {"kind": "local", "model": TRIVIAL_HALF, "t_max": 1000.0, "window": (50.0, 500.0),
              "exponent": -1 / 2, "tolerance": 0.05},
    "fig1e": {"kind": "local", "model": TRIVIAL_ONE, "t_max": 1000.0, "window": (50.0, 500.0),
              "exponent": -1 / 4, "tolerance": 0.05},
    "fig4a": {"kind": "spectrum", "model": FLUX_A},
    "fig4b": {"kind": "spectrum", "model": FLUX_B},
    "fig4c": {"kind": "short_time", "model": FLUX_A, "rate_range": (-0.055, -0.040)},
    "fig4d": {"kind": "short_time", "model": FLUX_B, "rate_tolerance": 0.15},
    # long enough for >= 10 recurrences spanning a decade
    "fig4e": {"kind": "recurrence", "model": FLUX_A, "t_max": 6000.0, "speed": 0.3,
              "exponent": -1 / 2, "tolerance": 0.07},
    "fig4f": {"kind": "recurrence", "model": FLUX_B, "t_max": 1500.0, "speed": 1.4,
              "exponent": -1 / 3, "tolerance": 0.07},
    "fig5a": {"kind": "worldline", "model": FLUX_A, "t_max": 2000.0, "window": (50.0, 2000.0), "speed": 0.3,
              "exponent": -1 / 2, "tolerance": 0.05, "order": 2},
    "fig5b": {"kind": "worldline", "model": FLUX_B, "t_max": 2000.0, "window": (50.0, 2000.0), "speed": 1.4,
              "exponent": -1 / 3, "tolerance": 0.05, "order": 3},
}


def get_preset(figure_id: str) -> dict:
    try:
        preset = FIGURES[figure_id]
    except KeyError:
        raise UnknownFigure(f"unknown figure {figure_id!r}; choose one of {', '.join(FIGURES)}")
    return {"figure": figure_id, "L": L, "x0": X0, **preset}
