"""Result files: CSV tables, Green's-function series with a JSON header, JSON reports and SVG plots."""

import json
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from lattice.dynamics import GreensSeries

logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "nhlat"

FLOAT_FORMAT = "%.17g"


def _jsonable(value):
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (tuple, set)):
        return list(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_jsonable)


def _prepare(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json(payload, path) -> Path:
    path = _prepare(path)
    path.write_text(dumps(payload) + "\n")
    logger.info(f"Wrote {path}")
    return path


def write_table(frame: pd.DataFrame, path) -> Path:
    path = _prepare(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {path} ({len(frame)} rows)")
    return path


def write_series(series: GreensSeries, path) -> Path:
    """CSV (t, re_G, im_G, abs_G) preceded by one '# {meta}' line."""
    path = _prepare(path)
    with open(path, "w", newline="") as f:
        f.write("# " + json.dumps(series.meta, sort_keys=True, default=_jsonable) + "\n")
        series.to_frame().to_csv(f, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {path} ({len(series.times)} samples)")
    return path


def read_series(path) -> GreensSeries:
    path = Path(path)
    with open(path) as f:
        first = f.readline()
    meta = json.loads(first[1:]) if first.startswith("#") else {}
    frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    return GreensSeries(times=frame["t"].to_numpy(dtype=float),
                        values=frame["re_G"].to_numpy(dtype=float) + 1j * frame["im_G"].to_numpy(dtype=float),
                        meta=meta)


def _save(fig, path) -> Path:
    path = _prepare(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote {path}")
    return path


def plot_spectrum(pbc: np.ndarray, obc: np.ndarray, path, saddles: Sequence[complex] = ()) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(np.real(pbc), np.imag(pbc), ".", ms=1.5, color="tab:blue", label="PBC")
    ax.plot(np.real(obc), np.imag(obc), ".", ms=3, color="tab:red", label="OBC")
    if len(saddles):
        ax.plot(np.real(saddles), np.imag(saddles), "x", color="black", label="saddles")
    ax.set_xlabel("Re E")
    ax.set_ylabel("Im E")
    ax.legend(loc="best", fontsize="small")
    return _save(fig, path)


def plot_series(series: Iterable[Tuple[str, GreensSeries]], path, guide: Optional[Tuple[float, float]] = None,
                peaks: Sequence[Tuple[float, float]] = (), loglog: bool = True) -> Path:
    """|G| against t; `guide` = (exponent, anchor time) draws a t**exponent line through the first series."""
    fig, ax = plt.subplots(figsize=(5, 4))
    first = None
    for label, s in series:
        keep = s.times > 0 if loglog else np.ones_like(s.times, dtype=bool)
        ax.plot(s.times[keep], s.magnitude[keep], lw=1, label=label)
        first = first or s
    if peaks:
        ax.plot(*zip(*peaks), "o", ms=3, color="black", label="envelope peaks")
    if guide and first is not None:
        exponent, anchor = guide
        t = first.times[first.times >= anchor]
        if len(t):
            level = np.interp(anchor, first.times, first.magnitude)
            ax.plot(t, level * (t / anchor) ** exponent, "k--", lw=1, label=f"t^{exponent:.3g}")
    if loglog:
        ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("|G|")
    ax.legend(loc="best", fontsize="small")
    return _save(fig, path)
