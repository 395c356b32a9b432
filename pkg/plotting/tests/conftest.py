"""Shared fixtures: paths to the committed trajectory files and a tiny
hand-written CSV for schema and fidelity tests.

The committed files under data/ were produced by the solver CLI
(`soliton integrate ... --out`), one collapsed run and one run started
on the critical slope, so the rendering tests exercise real output
rather than synthetic curves.
"""
from __future__ import annotations

from pathlib import Path

import pytest

from solitonplots import EXPECTED_COLUMNS

DATA = Path(__file__).parent / "data"

_HEADER = ",".join(EXPECTED_COLUMNS)

# Three schema-conformant rows with awkward but exactly representable
# values (negatives, exponents, full 17 digit mantissas).
_SMALL_ROWS = (
    "0.0034294529883517151,0.0068587177569111833,1.9998353540740534,"
    "1.000011760917265,0.006858637093047782,-5.8804932122970005e-05,"
    "-0.03429358878455592,0.006858637093047782,19.998823949768276,"
    "-3.5527136788005009e-15",
    "0.5,1.25,0.75,2.0,-0.125,-3.0,-1.5,0.625,4.0,1e-12",
    "1.0,1.5,0.25,2.25,0.0625,-4.5,-2.0,0.66666666666666663,2.5,-2e-13",
)


@pytest.fixture
def collapsed_csv() -> Path:
    return DATA / "collapsed.csv"


@pytest.fixture
def nearcritical_csv() -> Path:
    return DATA / "nearcritical.csv"


@pytest.fixture
def small_rows() -> tuple[str, ...]:
    return _SMALL_ROWS


@pytest.fixture
def small_csv(tmp_path: Path) -> Path:
    """A minimal valid trajectory file holding the small_rows samples."""
    path = tmp_path / "small.csv"
    path.write_text(_HEADER + "\n" + "\n".join(_SMALL_ROWS) + "\n")
    return path
