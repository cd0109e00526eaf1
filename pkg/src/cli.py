"""
Command-Line Interface

One click command per computation. Each command fills a RunConfig and
hands it to run(), which dispatches, writes the CSV or JSON artifact and
returns the exit status (0 success, 2 validation, 3 numerical, 4 I/O).
"""

import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple

import click
import pandas as pd

from .config import load_settings
from .degeneration import (EnvelopeKind, FamilySpec, check_bounds, make_pinching_family,
                           tau_coordinate)
from .detlap import log_det_laplacian, spectral_constants
from .errors import EXIT_OK, DomainError, SelbergLabError, exit_code_for
from .heat import find_t0, heat_trace, heat_trace_lower_bound
from .length_spectrum import LengthSpectrum, enumerate_spectrum
from .surface_group import (GroupPresentation, build_genus2_from_fn, builtin_octagon,
                            parse_group_file)
from .zeta import (estimate_zeta_prime_at_one, selberg_zeta_log, zeta_log_derivative_mckean,
                   zeta_log_derivative_product)

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
DEFAULT_T_GRID = (2.5, 3.0, 5.0, 10.0, 25.0, 50.0)
DEFAULT_S_GRID = (2.0, 3.0, 4.0)
BUILTINS = {"octagon": builtin_octagon}


class Command(Enum):
    SPECTRUM = "spectrum"
    HEAT_TRACE = "heat-trace"
    ZETA = "zeta"
    DET = "det"
    T0 = "t0"
    FAMILY = "family"


@dataclass(frozen=True)
class RunConfig:
    """
    Everything one command needs.

    Attributes:
        command (Command): Computation to run
        output_path (Path): CSV or JSON artifact
        input_path (Optional[Path]): Group file, alternative to builtin / fn_params
        builtin (Optional[str]): Name of a built-in surface
        fn_params (Tuple[float]): Fenchel-Nielsen coordinates
        cutoff (float): Spectrum cutoff
        max_depth (int): Enumeration depth
        t_values (Tuple[float]): Heat trace times
        s_values (Tuple[float]): Zeta evaluation points
        n (int): Weight for det
        genus (int): Genus for t0
        experimental (bool): Allow the n = 1 determinant
        pinch (Tuple[int]): Pinched curves for family
        ell_grid (Tuple[float]): Pinching lengths for family
        n_values (Tuple[int]): Weights for family
        threads (int): Worker threads
    """

    command: Command
    output_path: Path
    input_path: Optional[Path] = None
    builtin: Optional[str] = None
    fn_params: Tuple[float, ...] = ()
    cutoff: float = 3.1
    max_depth: int = 6
    t_values: Tuple[float, ...] = DEFAULT_T_GRID
    s_values: Tuple[float, ...] = DEFAULT_S_GRID
    n: int = 2
    genus: int = 2
    experimental: bool = False
    pinch: Tuple[int, ...] = (1,)
    ell_grid: Tuple[float, ...] = ()
    n_values: Tuple[int, ...] = (2, 3, 4, 5, 6)
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)

    def __post_init__(self):
        needs_surface = self.command not in (Command.T0, Command.FAMILY)
        sources = sum(x is not None and x != () for x in (self.input_path, self.builtin,
                                                         self.fn_params or None))
        if needs_surface and sources != 1:
            raise DomainError(
                f"{self.command.value} needs exactly one of --builtin, --fn or --group-file")
        if self.command is Command.FAMILY and (len(self.fn_params) != 6 or not self.ell_grid):
            raise DomainError("family needs --fn with six values and at least one --ell")
        if self.threads < 1:
            raise DomainError(f"threads must be at least 1, got {self.threads}")


def _load_surface(config: RunConfig) -> GroupPresentation:
    if config.input_path is not None:
        return parse_group_file(config.input_path)
    if config.builtin is not None:
        if config.builtin not in BUILTINS:
            raise DomainError(f"unknown builtin surface {config.builtin!r}; "
                              f"known: {', '.join(sorted(BUILTINS))}")
        return BUILTINS[config.builtin]()
    return build_genus2_from_fn(config.fn_params)


def _spectrum(config: RunConfig) -> LengthSpectrum:
    surface = _load_surface(config)
    return enumerate_spectrum(surface, config.cutoff, config.max_depth, threads=config.threads)


def _write_csv(frame: pd.DataFrame, path: Path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n",
                 na_rep="nan")


def _write_json(doc: dict, path: Path):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _run_spectrum(config: RunConfig):
    spectrum = _spectrum(config)
    frame = pd.DataFrame({"length": spectrum.lengths,
                          "multiplicity": spectrum.multiplicities.astype(int)},
                         columns=["length", "multiplicity"])
    _write_csv(frame, config.output_path)
    _write_json({"cutoff": spectrum.cutoff, "word_depth": spectrum.word_depth,
                 "stabilized": spectrum.stabilized},
                config.output_path.with_suffix(".json"))


def _run_heat_trace(config: RunConfig):
    spectrum = _spectrum(config)
    rows = []
    for t in config.t_values:
        sample = heat_trace(spectrum, t)
        lower = heat_trace_lower_bound(spectrum.genus, t) if t > 2.0 else math.nan
        rows.append({"t": t, "htr": sample.value, "tail_bound": sample.tail_bound,
                     "lower_bound": lower})
    _write_csv(pd.DataFrame(rows, columns=["t", "htr", "tail_bound", "lower_bound"]),
               config.output_path)


def _run_zeta(config: RunConfig):
    spectrum = _spectrum(config)
    rows = []
    for s in config.s_values:
        evaluation = selberg_zeta_log(spectrum, s)
        rows.append({"s": s, "log_z": evaluation.log_value,
                     "dlogz_product": zeta_log_derivative_product(spectrum, s),
                     "dlogz_mckean": zeta_log_derivative_mckean(spectrum, s),
                     "tail_log": evaluation.tail_log_bound.to_wire()})
    columns = ["s", "log_z", "dlogz_product", "dlogz_mckean", "tail_log"]
    _write_csv(pd.DataFrame(rows, columns=columns), config.output_path)


def _run_det(config: RunConfig):
    spectrum = _spectrum(config)
    if config.n == 1:
        zeta_data = estimate_zeta_prime_at_one(spectrum)
    else:
        zeta_data = selberg_zeta_log(spectrum, float(config.n))
    log_det = log_det_laplacian(spectrum.genus, config.n, zeta_data,
                                experimental=config.experimental)
    constants = spectral_constants(spectrum.genus, config.n)
    _write_json({"g": constants.g, "n": constants.n, "c_n": constants.c_n,
                 "log_C_gn": constants.log_C_gn, "log_z": zeta_data.log_value,
                 "log_det": log_det}, config.output_path)


def _run_t0(config: RunConfig):
    _write_json({"g": config.genus, "t0": find_t0(config.genus)}, config.output_path)


def _run_family(config: RunConfig):
    spec = FamilySpec(tuple(config.fn_params), tuple(config.pinch), tuple(config.ell_grid),
                      tuple(config.n_values))
    family = make_pinching_family(spec)
    records = check_bounds(family, spec.n_values, config.cutoff, config.max_depth,
                           threads=config.threads)
    rows = []
    for ell, record in zip(spec.ell_grid, records):
        for n in spec.n_values:
            # Every pinched curve of a member sits at the grid value, so they share one tau.
            row = {"ell": ell, "tau": tau_coordinate(ell), "log_z2": record.log_Z2, "n": n}
            if record.valid:
                envelopes = record.envelope_logs[n]
                row.update(log_zn=record.log_Zn[n],
                           lower_ok=str(record.lower_ok[n]).lower(),
                           upper_ok=str(record.upper_ok[n]).lower(),
                           mt1_upper=envelopes[EnvelopeKind.RATIO_UPPER].to_wire(),
                           zx2=envelopes[EnvelopeKind.Z2_SHAPE].to_wire(),
                           mu_pole=envelopes[EnvelopeKind.MUMFORD_POLE].to_wire())
            else:
                row.update(log_zn=math.nan, lower_ok="invalid", upper_ok="invalid",
                           mt1_upper="", zx2="", mu_pole="")
            rows.append(row)
    columns = ["ell", "tau", "log_z2", "n", "log_zn", "lower_ok", "upper_ok",
               "mt1_upper", "zx2", "mu_pole"]
    _write_csv(pd.DataFrame(rows, columns=columns), config.output_path)


HANDLERS = {
    Command.SPECTRUM: _run_spectrum,
    Command.HEAT_TRACE: _run_heat_trace,
    Command.ZETA: _run_zeta,
    Command.DET: _run_det,
    Command.T0: _run_t0,
    Command.FAMILY: _run_family,
}


def run(config: RunConfig) -> int:
    """
    Execute one command and write its artifact.

    Args:
        config (RunConfig): Validated command configuration

    Returns:
        int: Exit status; the error message goes to standard error
    """
    try:
        HANDLERS[config.command](config)
    except (SelbergLabError, OSError) as exc:
        code = exit_code_for(exc)
        click.echo(f"error: {exc}", err=True)
        logger.debug("%s failed", config.command.value, exc_info=True)
        return code
    logger.info("%s written to %s", config.command.value, config.output_path)
    return EXIT_OK


def _configure_logging(verbose: bool):
    level = "DEBUG" if verbose else load_settings().log_level
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _parse_floats(text: Optional[str]) -> Tuple[float, ...]:
    if not text:
        return ()
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from None


def _dispatch(command: Command, **kwargs):
    try:
        config = RunConfig(command=command, **kwargs)
    except SelbergLabError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exit_code_for(exc))
    sys.exit(run(config))


def _surface_options(f):
    f = click.option("--builtin", type=click.Choice(sorted(BUILTINS)), default=None,
                     help="Built-in surface")(f)
    f = click.option("--fn", "fn_text", default=None,
                     help="Fenchel-Nielsen coordinates l1,l2,l3,theta1,theta2,theta3")(f)
    f = click.option("--group-file", type=click.Path(path_type=Path), default=None,
                     help="Group file (JSON)")(f)
    f = click.option("--cutoff", type=float, default=3.1, show_default=True,
                     help="Spectrum cutoff")(f)
    f = click.option("--max-depth", type=int, default=6, show_default=True,
                     help="Word enumeration depth")(f)
    return f


def _common_options(f):
    f = click.option("--out", "output_path", type=click.Path(path_type=Path), required=True,
                     help="Output file")(f)
    f = click.option("--threads", type=int, default=os.cpu_count() or 1,
                     help="Worker threads (results do not depend on it)")(f)
    return f


@click.group()
@click.option("--verbose", is_flag=True, help="Debug logging on standard error")
def main(verbose: bool):
    """Selberg zeta values, heat traces and determinants of compact hyperbolic surfaces."""
    _configure_logging(verbose)


@main.command("spectrum")
@_surface_options
@_common_options
def spectrum_command(builtin, fn_text, group_file, cutoff, max_depth, output_path, threads):
    """Primitive length spectrum as length,multiplicity CSV plus a JSON sidecar."""
    _dispatch(Command.SPECTRUM, builtin=builtin, fn_params=_parse_floats(fn_text),
              input_path=group_file, cutoff=cutoff, max_depth=max_depth,
              output_path=output_path, threads=threads)


@main.command("heat-trace")
@_surface_options
@_common_options
@click.option("--t", "t_values", type=float, multiple=True, help="Time (repeatable)")
def heat_trace_command(builtin, fn_text, group_file, cutoff, max_depth, output_path, threads,
                       t_values):
    """Heat trace with truncation bound and the large-time lower bound."""
    _dispatch(Command.HEAT_TRACE, builtin=builtin, fn_params=_parse_floats(fn_text),
              input_path=group_file, cutoff=cutoff, max_depth=max_depth,
              output_path=output_path, threads=threads,
              t_values=tuple(t_values) or DEFAULT_T_GRID)


@main.command("zeta")
@_surface_options
@_common_options
@click.option("--s", "s_values", type=float, multiple=True, help="Evaluation point (repeatable)")
def zeta_command(builtin, fn_text, group_file, cutoff, max_depth, output_path, threads,
                 s_values):
    """log Z(s) and Z'/Z(s) by the Euler product and the McKean integral."""
    _dispatch(Command.ZETA, builtin=builtin, fn_params=_parse_floats(fn_text),
              input_path=group_file, cutoff=cutoff, max_depth=max_depth,
              output_path=output_path, threads=threads,
              s_values=tuple(s_values) or DEFAULT_S_GRID)


@main.command("det")
@_surface_options
@_common_options
@click.option("--n", type=int, default=2, show_default=True, help="Weight")
@click.option("--experimental", is_flag=True, help="Allow n = 1 through an estimate of Z'(1)")
def det_command(builtin, fn_text, group_file, cutoff, max_depth, output_path, threads, n,
                experimental):
    """log det* of the weight-n Laplacian."""
    _dispatch(Command.DET, builtin=builtin, fn_params=_parse_floats(fn_text),
              input_path=group_file, cutoff=cutoff, max_depth=max_depth,
              output_path=output_path, threads=threads, n=n, experimental=experimental)


@main.command("t0")
@click.option("--genus", type=int, default=2, show_default=True)
@click.option("--out", "output_path", type=click.Path(path_type=Path), required=True)
def t0_command(genus, output_path):
    """Threshold time after which the heat trace lower bound applies."""
    _dispatch(Command.T0, genus=genus, output_path=output_path, threads=1)


@main.command("family")
@_common_options
@click.option("--fn", "fn_text", required=True, help="Base coordinates l1,l2,l3,theta1,theta2,theta3")
@click.option("--pinch", type=int, multiple=True, help="Pinched curve index (repeatable)")
@click.option("--ell", "ell_grid", type=float, multiple=True, help="Pinching length (repeatable)")
@click.option("--n", "n_values", type=int, multiple=True, help="Weight (repeatable)")
@click.option("--cutoff", type=float, default=3.1, show_default=True)
@click.option("--max-depth", type=int, default=6, show_default=True)
def family_command(output_path, threads, fn_text, pinch, ell_grid, n_values, cutoff, max_depth):
    """Bound checks for log(Z(n)/Z(2)) along a pinching family."""
    _dispatch(Command.FAMILY, fn_params=_parse_floats(fn_text), pinch=tuple(pinch) or (1,),
              ell_grid=tuple(ell_grid), n_values=tuple(n_values) or (2, 3, 4, 5, 6),
              cutoff=cutoff, max_depth=max_depth, output_path=output_path, threads=threads)


if __name__ == "__main__":
    main()
