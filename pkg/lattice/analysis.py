"""Scaling exponents, decay rates and recurrence periods of Green's-function series."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import find_peaks
from scipy.stats import linregress, theilslopes

from lattice.dynamics import GreensSeries
from lattice.errors import TooFewPeaks, WindowTooNarrow, ZeroVelocity
from options import options

logger = logging.getLogger(__name__)

settings = options["analysis"]

Peak = Tuple[float, float]


@dataclass(frozen=True)
class FitReport:
    kind: str
    value: float
    stderr: float
    window: Tuple[float, float]
    r2: float
    n_points: int
    intercept: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PeriodReport:
    T: float
    T_std: float
    peaks: List[Peak]
    T_theory: float

    @property
    def deviation(self) -> float:
        return abs(self.T - self.T_theory) / self.T_theory

    def as_dict(self) -> dict:
        return {"T_measured": self.T, "T_std": self.T_std, "T_theory": self.T_theory,
                "deviation": self.deviation, "n_peaks": len(self.peaks)}


def _arrays(data: Union[GreensSeries, Sequence[Peak]]):
    if isinstance(data, GreensSeries):
        return np.asarray(data.times, dtype=float), data.magnitude
    points = np.asarray(list(data), dtype=float).reshape(-1, 2)
    return points[:, 0], points[:, 1]


def _dominant(t, y, candidates, radius):
    """Greedy suppression: tallest maxima first, dropping any within `radius` of one already kept."""
    kept = []
    for i in sorted(candidates, key=lambda i: -y[i]):
        if all(abs(t[i] - t[j]) > radius for j in kept):
            kept.append(i)
    return sorted(kept)


def _prominent(t, y, kept, factor):
    """Keep maxima that rise by `factor` above the line through the neighbouring minima."""
    result = []
    for j, i in enumerate(kept):
        lo = kept[j - 1] if j > 0 else 0
        hi = kept[j + 1] if j + 1 < len(kept) else len(y) - 1
        left = lo + int(np.argmin(y[lo:i + 1]))
        right = i + int(np.argmin(y[i:hi + 1]))
        if left == i and right == i:
            continue
        if left == i or right == i or t[right] == t[left]:
            floor = y[right] if left == i else y[left]
        else:
            floor = np.interp(t[i], [t[left], t[right]], [y[left], y[right]])
        if y[i] >= factor * floor:
            result.append(i)
    return result


def envelope_peaks(series: GreensSeries, spacing_hint: Optional[float] = None,
                   t_min: Optional[float] = None, prominence: Optional[float] = None) -> List[Peak]:
    """
    Local maxima of |G| that conform to its envelope.

    Maxima are kept tallest first, and a smaller one closer than a quarter
    spacing (three quarters when the spacing is given) to a kept maximum is
    dropped. A survivor must also stand `prominence` times above the
    interpolated minima on either side. Without a hint the spacing is the
    median distance between surviving maxima, re-estimated until the
    selection is stable.
    """
    factor = prominence or settings["prominence"]
    t, y = _arrays(series)
    if t_min is not None:
        keep = t >= t_min
        t, y = t[keep], y[keep]

    candidates = list(find_peaks(y)[0])
    if len(candidates) < 3:
        raise TooFewPeaks(f"only {len(candidates)} local maxima in the series")

    spacing = spacing_hint or float(np.median(np.diff(t[candidates])))
    selected = candidates
    for _ in range(10):
        radius = 0.75 * spacing if spacing_hint else 0.25 * spacing
        selected = _prominent(t, y, _dominant(t, y, candidates, radius), factor)
        if spacing_hint or len(selected) < 2:
            break
        updated = float(np.median(np.diff(t[selected])))
        if np.isclose(updated, spacing, rtol=1e-9):
            break
        spacing = updated

    if len(selected) < 3:
        raise TooFewPeaks(f"only {len(selected)} envelope maxima survive (spacing {spacing:.6g})")
    logger.debug(f"{len(selected)} envelope peaks with spacing ~{spacing:.6g}")
    return [(float(t[i]), float(y[i])) for i in selected]


def _windowed(t, y, window):
    lo, hi = window
    mask = (t >= lo) & (t <= hi) & (y > options["dynamics"]["amplitude_floor"])
    if mask.sum() < settings["min_points"]:
        raise WindowTooNarrow(f"window [{lo}, {hi}] holds {int(mask.sum())} usable points, "
                              f"need {settings['min_points']}")
    return t[mask], y[mask]


def fit_power_law(data: Union[GreensSeries, Sequence[Peak]], window: Tuple[float, float]) -> FitReport:
    """Least squares of log|G| on log t; the exponent is the slope."""
    lo, hi = window
    if lo <= 0 or hi < 10 * lo:
        raise WindowTooNarrow(f"power-law window [{lo}, {hi}] spans less than one decade")
    t, y = _windowed(*_arrays(data), window)
    fit = linregress(np.log(t), np.log(y))
    report = FitReport(kind="power", value=float(fit.slope), stderr=float(fit.stderr), window=(lo, hi),
                       r2=float(fit.rvalue ** 2), n_points=len(t), intercept=float(fit.intercept))
    logger.info(f"Power-law exponent {report.value:.5g} +- {report.stderr:.2g} on [{lo:g}, {hi:g}]")
    return report


def fit_exponential(series: Union[GreensSeries, Sequence[Peak]], window: Tuple[float, float],
                    power_correction: float = 0.0, use_peaks: bool = True) -> FitReport:
    """
    Least squares of log(|G| t^p) on t; the rate is the slope.

    Envelope peaks inside the window are used when there are enough of them,
    otherwise every sample. `power_correction` p removes a t^{-p} prefactor.
    """
    lo, hi = window
    if hi <= lo:
        raise WindowTooNarrow(f"empty exponential window [{lo}, {hi}]")
    t, y = _arrays(series)
    if use_peaks and isinstance(series, GreensSeries):
        try:
            inside = (t >= lo) & (t <= hi)
            peaks = envelope_peaks(GreensSeries(times=t[inside], values=y[inside]))
            if len(peaks) >= settings["min_points"]:
                t, y = _arrays(peaks)
        except TooFewPeaks:
            logger.debug("Too few envelope peaks; fitting every sample")
    t, y = _windowed(t, y, window)
    if power_correction and np.any(t <= 0):
        t, y = t[t > 0], y[t > 0]
    target = np.log(y) + power_correction * np.log(t) if power_correction else np.log(y)
    fit = linregress(t, target)
    report = FitReport(kind="exponential", value=float(fit.slope), stderr=float(fit.stderr), window=(lo, hi),
                       r2=float(fit.rvalue ** 2), n_points=len(t), intercept=float(fit.intercept))
    logger.info(f"Exponential rate {report.value:.5g} +- {report.stderr:.2g} on [{lo:g}, {hi:g}]")
    return report


def detect_period(series: GreensSeries, v_theory: float, L: int, t_min: Optional[float] = None) -> PeriodReport:
    """
    Recurrence period next to T = L/|v|.

    Peak times are regressed on their recurrence index (rounded t/T_theory)
    with the Theil-Sen estimator.
    """
    if v_theory == 0:
        raise ZeroVelocity("a recurrence period needs a nonzero group velocity")
    T_theory = L / abs(v_theory)
    peaks = envelope_peaks(series, spacing_hint=T_theory, t_min=0.5 * T_theory if t_min is None else t_min)
    times = np.array([p[0] for p in peaks])
    index = np.rint((times - times[0]) / T_theory)
    slope, _, low, high = theilslopes(times, index)
    report = PeriodReport(T=float(slope), T_std=float((high - low) / 2), peaks=peaks, T_theory=T_theory)
    logger.info(f"Recurrence period {report.T:.5g} (theory {T_theory:.5g}, deviation {report.deviation:.2%})")
    return report
