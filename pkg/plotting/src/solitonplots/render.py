"""Profile figures from trajectory CSV files.

build_figure assembles a matplotlib Figure directly, with no pyplot and
therefore no global state or GUI backend involved; render_profiles saves
the result.  Keeping construction separate from output lets tests pull
the plotted line data back out of the figure and compare it against the
parsed CSV arrays.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

from matplotlib.figure import Figure

from .reader import read_trajectory

PLOTTABLE = ("a", "b", "Q", "R", "f")

# One linestyle per input file so curves from different runs stay
# distinguishable even in grayscale print.
_FILE_STYLES = ("solid", "dashed", "dotted", "dashdot")


@dataclass(frozen=True)
class PlotSpec:
    """One figure: which files to read, which curves to draw, where to save.

    The output format follows the suffix of `out`; .svg and .pdf stay
    vector and are the intended choices.
    """

    inputs: tuple[Path, ...]
    out: Path
    curves: tuple[str, ...] = ("a", "b", "Q")
    title: str | None = None

    def __post_init__(self) -> None:
        if not self.inputs:
            raise ValueError("no input files given")
        if not self.curves:
            raise ValueError("no curves requested")
        unknown = [name for name in self.curves if name not in PLOTTABLE]
        if unknown:
            raise ValueError(
                f"cannot plot {', '.join(unknown)}; choose from {', '.join(PLOTTABLE)}"
            )
        if len(set(self.curves)) != len(self.curves):
            raise ValueError(f"duplicate curve in {', '.join(self.curves)}")


def curve_label(curve: str, path: Path, multiple_inputs: bool) -> str:
    """Legend entry for one curve; file stems disambiguate multi-file figures."""
    if multiple_inputs:
        return f"{curve} ({Path(path).stem})"
    return curve


def build_figure(spec: PlotSpec) -> Figure:
    """Read every input and draw the requested curves against arclength.

    Each curve is plotted verbatim from the parsed arrays; the renderer
    never resamples, smooths, or rescales the data.
    """
    fig = Figure(figsize=(7.0, 4.5))
    axes = fig.add_subplot()
    multiple = len(spec.inputs) > 1
    for path, style in zip(spec.inputs, itertools.cycle(_FILE_STYLES)):
        data = read_trajectory(path)
        for curve in spec.curves:
            axes.plot(
                data["s"],
                data[curve],
                linestyle=style,
                label=curve_label(curve, Path(path), multiple),
            )
    axes.set_xlabel("s")
    axes.set_ylabel("profile value")
    if spec.title:
        axes.set_title(spec.title)
    axes.legend()
    return fig


def render_profiles(spec: PlotSpec) -> Path:
    """Render the figure described by spec and write it to spec.out."""
    fig = build_figure(spec)
    out = Path(spec.out)
    fig.savefig(out)
    return out
