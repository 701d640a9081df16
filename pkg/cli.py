"""Command-line front end: `python cli.py <command> [options]`.

Every command writes its results into --out (default: the reports directory) as
{command}.{csv|json|svg}; `reproduce` writes {figure}_{artifact}.{ext} per preset.
Exit status is 0 on success, 2 for invalid input and 3 for numerical failure; on
failure a one-line JSON diagnostic goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from lattice import analysis, asymptotics, dynamics, spectral
from lattice.errors import ConfigError, LatticeError
from lattice.model import Boundary, ModelSpec, model_from_spec
from lattice.presets import FIGURES
from lattice.reproduce import Reproducer, saddle_frame, spectrum_frame
from options import options
from tools import export

logger = logging.getLogger(__name__)

Command = Literal["spectrum", "winding", "gbz", "saddles", "evolve", "worldline", "fit", "reproduce"]

MODEL_COMMANDS = {"spectrum", "winding", "gbz", "saddles", "evolve", "worldline"}
MODEL_FLAGS = ("model", "t0", "t1", "tp", "gamma", "phi")


def parse_energy(text) -> complex:
    """Accepts '0+0i', '-0.5-0.2j', '1.5' or a [re, im] pair."""
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return complex(float(text[0]), float(text[1]))
    if isinstance(text, (int, float, complex)):
        return complex(text)
    try:
        return complex(str(text).strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ValueError(f"cannot read {text!r} as a complex energy")


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    command: Command
    model: Optional[ModelSpec] = None
    L: int = Field(default=options["dynamics"]["default_L"], ge=3)
    boundary: Boundary = "OBC"
    x0: Optional[int] = None
    orbital: int = Field(default=0, ge=0)
    n_k: Optional[int] = Field(default=None, ge=64)
    t_min: float = Field(default=0.1, gt=0)
    t_max: float = Field(default=1000.0, gt=0)
    v: Optional[float] = None
    Eb: Optional[complex] = None
    window: Optional[Tuple[float, float]] = None
    kind: Literal["power", "exponential", "period"] = "power"
    series: Optional[Path] = None
    figure: Optional[str] = None
    out: Path = Path(options["reports_dir"])
    tol: float = Field(default=1e-2, gt=0)
    band: Optional[int] = None

    @field_validator("Eb", mode="before")
    @classmethod
    def _energy(cls, value):
        return None if value is None else parse_energy(value)

    @field_validator("boundary", mode="before")
    @classmethod
    def _upper(cls, value):
        return value.upper() if isinstance(value, str) else value

    @model_validator(mode="after")
    def _required(self):
        missing = []
        if self.command in MODEL_COMMANDS and self.model is None:
            missing.append("model")
        if self.command == "winding" and self.Eb is None:
            missing.append("Eb")
        if self.command == "worldline" and self.v is None:
            missing.append("v")
        if self.command == "fit":
            missing += [name for name in ("series", "window") if getattr(self, name) is None]
            if self.kind == "period" and self.v is None:
                missing.append("v")
        if self.command == "reproduce" and self.figure is None:
            missing.append("figure")
        if missing:
            raise ValueError(f"command {self.command!r} needs: {', '.join(missing)}")
        if self.figure is not None and self.figure != "all" and self.figure not in FIGURES:
            raise ValueError(f"unknown figure {self.figure!r}; choose one of all, {', '.join(FIGURES)}")
        if self.t_min >= self.t_max:
            raise ValueError("t_min must be smaller than t_max")
        return self

    @property
    def site(self) -> int:
        return self.L // 2 if self.x0 is None else self.x0


def _spectrum(config: RunConfig, model):
    bandset = spectral.pbc_bands(model, config.n_k)
    obc = spectral.obc_spectrum(model, config.L)
    export.write_table(spectrum_frame(bandset, obc), config.out / "spectrum.csv")
    export.plot_spectrum(bandset.bands.ravel(), obc, config.out / "spectrum.svg")
    closings = spectral.gap_closing_points(model, config.n_k)
    export.write_json({"gap_closing": [{"k0": k, "band": b} for k, b in closings],
                       "max_im_E": float(bandset.bands.imag.max())}, config.out / "spectrum.json")


def _winding(config: RunConfig, model):
    result = spectral.winding_number(model, config.Eb, config.n_k)
    export.write_json({"E_b": result.E_b, "W": result.W, "N_k": result.N_k,
                       "phase_residual": result.phase_residual}, config.out / "winding.json")
    print(result.W)


def _gbz(config: RunConfig, model):
    points = spectral.gbz_check(model, config.L, config.tol)
    frame = pd.DataFrame({
        "re_E": [p.E.real for p in points],
        "im_E": [p.E.imag for p in points],
        "radius": [p.radius for p in points],
        "mid_ratio": [p.mid_ratio for p in points],
        "outlier": [p.outlier for p in points],
    })
    export.write_table(frame, config.out / "gbz.csv")
    outliers = int(frame["outlier"].sum())
    if outliers:
        logger.warning(f"{outliers} of {len(frame)} OBC eigenvalues miss the GBZ condition at tol={config.tol}")


def _saddles(config: RunConfig, model):
    dominant = asymptotics.dominant_saddle(model, config.band)
    export.write_table(saddle_frame(dominant.candidates), config.out / "saddles.csv")
    export.write_json({
        "dominant": [{"band": s.band, "beta": s.beta_s, "E": s.E_s, "order": s.order} for s in dominant.saddles],
        "multiple_dominant": dominant.multiple_dominant,
        "rate": dominant.rate,
    }, config.out / "saddles.json")


def _evolve(config: RunConfig, model):
    times = dynamics.log_time_grid(config.t_min, config.t_max)
    series = dynamics.local_green(model, config.L, config.boundary, config.site, config.orbital, times)
    export.write_series(series, config.out / "evolve.csv")
    export.plot_series([(config.boundary, series)], config.out / "evolve.svg")


def _worldline(config: RunConfig, model):
    series = dynamics.worldline_green(model, config.L, config.site, config.v, config.t_max, config.orbital)
    export.write_series(series, config.out / "worldline.csv")
    export.plot_series([("world line", series)], config.out / "worldline.svg")


def _fit(config: RunConfig):
    series = export.read_series(config.series)
    if config.kind == "power":
        report = analysis.fit_power_law(series, config.window).as_dict()
    elif config.kind == "exponential":
        report = analysis.fit_exponential(series, config.window).as_dict()
    else:
        L = series.meta.get("L") or config.L
        period = analysis.detect_period(series, config.v, L, t_min=config.window[0])
        report = {**analysis.fit_power_law(period.peaks, config.window).as_dict(), **period.as_dict()}
    export.write_json(report, config.out / "fit.json")


def _reproduce(config: RunConfig) -> bool:
    reproducer = Reproducer(out_dir=config.out)
    if config.figure == "all":
        reports = reproducer.act_all()
    else:
        reports = {config.figure: reproducer.act(config.figure)}
    export.write_json({figure: report["passed"] for figure, report in reports.items()},
                      config.out / "reproduce.json")
    return all(report["passed"] for report in reports.values())


def execute(config: RunConfig) -> None:
    logger.info(f"Running {config.command} into {config.out}")
    if config.command == "fit":
        return _fit(config)
    if config.command == "reproduce":
        if not _reproduce(config):
            logger.warning("some acceptance checks failed; see the *_acceptance.json files")
        return
    model = model_from_spec(config.model)
    handlers = {"spectrum": _spectrum, "winding": _winding, "gbz": _gbz, "saddles": _saddles,
                "evolve": _evolve, "worldline": _worldline}
    handlers[config.command](config, model)


def _diagnose(error: Exception, status: int) -> int:
    print(json.dumps({"error": type(error).__name__, "message": str(error), "exit_status": status}),
          file=sys.stderr)
    return status


def run(config) -> int:
    """Validate `config` (a RunConfig or a plain mapping), execute it and return the exit status."""
    try:
        if not isinstance(config, RunConfig):
            config = RunConfig.model_validate(config)
        execute(config)
    except ValidationError as e:
        return _diagnose(e, 2)
    except LatticeError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return _diagnose(e, e.exit_status)
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, help="JSON file with RunConfig fields; inline flags override it.")
    shared.add_argument("--out", type=Path, help=f"Output directory (default: {options['reports_dir']}).")
    shared.add_argument("--model", choices=["ladder_trivial", "ladder_flux"], help="Model family.")
    shared.add_argument("--t0", type=float, help="Intra-cell A-B hopping.")
    shared.add_argument("--t1", type=float, help="Inter-cell A-B hopping.")
    shared.add_argument("--tp", type=float, help="Same-orbital hopping (flux model).")
    shared.add_argument("--gamma", type=float, help="Loss rate on orbital B.")
    shared.add_argument("--phi", type=float, help="Flux per plaquette.")
    shared.add_argument("--L", type=int, help="Number of unit cells.")
    shared.add_argument("--boundary", choices=["OBC", "PBC", "obc", "pbc"], help="Boundary conditions.")
    shared.add_argument("--x0", type=int, help="Initial cell (default: L // 2).")
    shared.add_argument("--orbital", type=int, help="Initial orbital index.")
    shared.add_argument("--Nk", dest="n_k", type=int, help="Bloch momentum samples.")
    shared.add_argument("--t-min", dest="t_min", type=float, help="First nonzero time of the log grid.")
    shared.add_argument("--t-max", dest="t_max", type=float, help="Last time.")
    shared.add_argument("--v", type=float, help="World-line drift velocity or theoretical group velocity.")
    shared.add_argument("--Eb", help="Reference energy such as 0+0i.")
    shared.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"), help="Fit window.")
    shared.add_argument("--kind", choices=["power", "exponential", "period"], help="Fit type.")
    shared.add_argument("--series", type=Path, help="Green's-function CSV to fit.")
    shared.add_argument("--tol", type=float, help="GBZ modulus-ratio tolerance.")
    shared.add_argument("--band", type=int, help="Restrict saddle search to one band (+1 or -1).")

    p = argparse.ArgumentParser(description="Dissipative lattice dynamics: spectra, saddles, Green's functions.")
    commands = p.add_subparsers(dest="command", required=True)
    for name, text in [
        ("spectrum", "PBC bands, OBC eigenvalues and gap-closing momenta."),
        ("winding", "Spectral winding number around --Eb."),
        ("gbz", "Check OBC eigenvalues against the generalized Brillouin zone."),
        ("saddles", "Saddle points, orders, thimble parities and the dominant saddle."),
        ("evolve", "Local Green's function on a log time grid."),
        ("worldline", "Green's function along x0 + v t under PBC."),
        ("fit", "Power-law, exponential or recurrence fit of a saved series."),
    ]:
        commands.add_parser(name, parents=[shared], help=text)
    reproduce = commands.add_parser("reproduce", parents=[shared], help="Recompute a figure preset.")
    reproduce.add_argument("figure", help=f"One of: all, {', '.join(FIGURES)}.")
    return p


def config_from_args(args: argparse.Namespace) -> dict:
    document = {}
    if args.config is not None:
        try:
            document = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}")
        if not isinstance(document, dict):
            raise ConfigError("a config file must hold a JSON object")

    flags = {key: value for key, value in vars(args).items() if value is not None and key != "config"}
    model_flags = {key: flags.pop(key) for key in MODEL_FLAGS if key in flags}
    if model_flags:
        block = dict(document.get("model") or {})
        block.update(model_flags)
        block.setdefault("model", "ladder_flux" if block.get("tp") else "ladder_trivial")
        document["model"] = block
    document.update(flags)
    return document


def _attach_values(argv: List[str]) -> List[str]:
    """Glue `--Eb VALUE` into `--Eb=VALUE` so energies like -2+0.1i are not read as flags."""
    joined, tokens = [], iter(argv)
    for token in tokens:
        if token == "--Eb":
            value = next(tokens, None)
            joined.append(token if value is None else f"{token}={value}")
        else:
            joined.append(token)
    return joined


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_arg_parser().parse_args(_attach_values(argv))
    try:
        document = config_from_args(args)
    except ConfigError as e:
        return _diagnose(e, e.exit_status)
    return run(document)


if __name__ == "__main__":
    sys.exit(main())
