"""BER-curve rendering: one line per (detector, T) series on a log BER axis."""

from __future__ import annotations

from dataclasses import dataclass

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .reader import MalformedCsvError, group_series, read_ber_points

DEFAULT_FLOOR = 1e-6


@dataclass(frozen=True)
class PlotSpec:
    """What to render: input CSV, output image, zero-BER floor, and title."""

    input_csv: str
    output_image: str
    floor: float = DEFAULT_FLOOR
    title: str = ""

    def __post_init__(self):
        if not 0.0 < self.floor < 1.0:
            raise ValueError("floor must lie in (0, 1)")


def _validated_series(points):
    series = group_series(points)
    if not series:
        raise MalformedCsvError(0, "no data rows to plot")
    for key, pts in series.items():
        if len(pts) < 2:
            raise MalformedCsvError(
                pts[0].line_no, f"series {key[0]}, T={key[1]} has fewer than 2 points"
            )
    return series


def build_figure(spec, points):
    """Assemble the figure without touching the filesystem.

    Plotted values equal the CSV values exactly; zero-BER points alone are
    raised to the floor and drawn with a distinct marker.
    """
    series = _validated_series(points)
    fig = Figure(figsize=(7.0, 5.0))
    ax = fig.add_subplot(111)
    for (detector, T), pts in sorted(series.items()):
        x = [p.snr_db for p in pts]
        y = [p.ber if p.ber > 0.0 else spec.floor for p in pts]
        (line,) = ax.plot(x, y, marker="o", label=f"{detector}, T={T}")
        floored = [(p.snr_db, spec.floor) for p in pts if p.ber == 0.0]
        if floored:
            ax.plot(
                [fx for fx, _ in floored],
                [fy for _, fy in floored],
                linestyle="none",
                marker="v",
                color=line.get_color(),
                markersize=10.0,
                fillstyle="none",
            )
    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    if spec.title:
        ax.set_title(spec.title)
    return fig


def render_ber_curves(spec):
    """Parse the CSV, build the figure, and write the image file.

    Nothing is written when the CSV is malformed or has no plottable series.
    Returns the output path.
    """
    points = read_ber_points(spec.input_csv)
    fig = build_figure(spec, points)
    FigureCanvasAgg(fig)
    try:
        fig.savefig(spec.output_image)
    except OSError as exc:
        raise OSError(f"cannot write image to {spec.output_image}: {exc}") from exc
    return spec.output_image
