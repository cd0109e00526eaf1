#!/usr/bin/env python
"""
Workspace check for Selberg Lab.

Creates the output directories, verifies the closed-form anchors the
numerics rest on and exports the octagon group file as a template for
--group-file. Exits non-zero when an anchor is off.
"""

import logging
import math
import sys
from pathlib import Path

import click

from src.detlap import zeta_prime_minus_one
from src.errors import SelbergLabError
from src.heat import find_t0
from src.length_spectrum import enumerate_spectrum
from src.surface_group import builtin_octagon, export_group_file

logger = logging.getLogger("selberg_lab.setup")

ZETA_PRIME_MINUS_ONE = -0.1654211437004509
OCTAGON_SYSTOLE = 2.0 * math.acosh(1.0 + math.sqrt(2.0))


def check_anchors() -> bool:
    octagon = builtin_octagon()
    checks = {
        "octagon relator": octagon.relator_residual(0) < 1e-9,
        "zeta'(-1)": abs(zeta_prime_minus_one() - ZETA_PRIME_MINUS_ONE) < 1e-10,
        "t0(2) > 2": find_t0(2) > 2.0,
    }
    spectrum = enumerate_spectrum(octagon, cutoff=3.1, max_depth=4)
    checks["octagon systole"] = abs(spectrum.systole - OCTAGON_SYSTOLE) < 1e-9
    for name, ok in checks.items():
        (logger.info if ok else logger.error)("%s: %s", name, "ok" if ok else "FAILED")
    return all(checks.values())


@click.command()
@click.option("--groups-dir", type=click.Path(path_type=Path), default=Path("data/groups"),
              show_default=True, help="Where the octagon group file is exported")
def main(groups_dir: Path):
    """Prepare output directories and verify the numerical anchors."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    for directory in (Path("output"), groups_dir):
        directory.mkdir(parents=True, exist_ok=True)
    try:
        ok = check_anchors()
        export_group_file(builtin_octagon(), groups_dir / "octagon.json")
    except (SelbergLabError, OSError) as exc:
        logger.error("%s", exc)
        sys.exit(1)
    logger.info("wrote %s", groups_dir / "octagon.json")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
