# display.py
# All terminal output for the hap-link simulator.
#
# This module owns presentation entirely. scenario.py and cli.py never format
# strings for the terminal; they call named functions here. Everything goes to
# standard error so standard output carries CSV only.
#
# Colour language:
#   cyan    pipeline events (loading, planning, running)
#   yellow  checks and warnings
#   green   success
#   red     failures and halts
#   magenta numeric summaries

from collections.abc import Callable, Iterator
from contextlib import contextmanager
from pathlib import Path

import pandas as pd
from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.rule import Rule
from rich.table import Table
from rich.text import Text

from hap_link.models import Scenario

console = Console(stderr=True)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _label(tag: str, color: str) -> Text:
    t = Text()
    t.append(f" {tag} ", style=f"bold white on {color}")
    return t


def _km(metres: float) -> str:
    return f"{metres / 1000.0:,.1f} km"


# ---------------------------------------------------------------------------
# Pipeline entry
# ---------------------------------------------------------------------------


def banner(command: str, scenario_path: Path) -> None:
    console.print()
    console.print(
        Panel.fit(
            "[bold cyan]hap-link[/bold cyan]  [dim]GEO satellite to HAP link simulator[/dim]\n\n"
            f"[dim]Command  :[/dim] [white]{command}[/white]\n"
            f"[dim]Scenario :[/dim] [white]{scenario_path}[/white]",
            border_style="cyan",
            padding=(0, 2),
        )
    )


def scenario_loaded(scenario: Scenario) -> None:
    table = Table(
        box=box.SIMPLE_HEAVY,
        border_style="cyan",
        show_header=True,
        header_style="bold cyan",
        padding=(0, 1),
    )
    table.add_column("#", justify="center", width=3)
    table.add_column("PoI", style="bold white")
    table.add_column("Lat / Lon (deg)", style="white")
    table.add_column("Alt", justify="right")
    table.add_column("Interest", justify="center")

    for i, poi in enumerate(scenario.hap.pois):
        table.add_row(
            str(i),
            poi.label or "-",
            f"{poi.latitude_deg:.4f} / {poi.longitude_deg:.4f}",
            _km(poi.altitude_m),
            str(poi.interest_level),
        )

    sat = scenario.satellite.position
    console.print(
        Panel(
            table,
            title=_label("SCENARIO", "cyan"),
            subtitle=(
                f"[dim]satellite {sat.latitude_deg:.2f}/{sat.longitude_deg:.2f} deg "
                f"@ {_km(sat.altitude_m)} · {scenario.link.carrier_frequency_ghz:g} GHz · "
                f"{scenario.environment} · seed {scenario.seed}[/dim]"
            ),
            border_style="cyan",
            padding=(0, 1),
        )
    )


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def eirp_mismatch(gap_db: float) -> None:
    console.print(
        _label("CHECK", "yellow"),
        f"[yellow] Transmit EIRP differs from the configured EIRP density by "
        f"{gap_db:+.2f} dB[/yellow]",
    )


def validation_ok(scenario_path: Path) -> None:
    console.print(
        _label("VALID", "green"), f"[bold green] {scenario_path} passed validation[/bold green]"
    )


def validation_failed(message: str) -> None:
    console.print()
    console.print(
        Panel(
            f"[bold red]Scenario rejected.[/bold red]\n\n[white]{message}[/white]",
            title=_label("VALIDATION ✗", "red"),
            border_style="red",
            padding=(0, 2),
        )
    )


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def mission_planned(duration_s: float, samples: int) -> None:
    hours = duration_s / 3600.0
    console.print()
    console.print(Rule(f"[cyan]MISSION: {samples:,} samples, {hours:,.1f} h[/cyan]", style="cyan"))


@contextmanager
def progress(description: str) -> Iterator[Callable[[int, int], None]]:
    """Progress bar on stderr; yields a (done, total) callback."""
    bar = Progress(
        TextColumn("[cyan]{task.description}[/cyan]"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    )
    task = bar.add_task(description, total=None)

    def update(done: int, total: int) -> None:
        bar.update(task, completed=done, total=total)

    with bar:
        yield update


def mission_summary(frame: pd.DataFrame, arrivals: pd.DataFrame | None = None) -> None:
    best = frame.loc[frame["snr_db"].idxmax()]
    positive = frame.loc[frame["snr_db"] > 0.0, "ground_m"]
    coverage = _km(positive.max()) if not positive.empty else "none"
    console.print(
        Panel(
            f"[magenta]Peak SNR    [/magenta] [white]{best['snr_db']:.3f} dB[/white] "
            f"[dim]at t = {best['time_s']:,.0f} s, {_km(best['ground_m'])} "
            f"from the sub-satellite point[/dim]\n"
            f"[magenta]Peak rate   [/magenta] [white]{best['capacity_bps'] / 1e9:.3f} Gbit/s"
            "[/white]\n"
            f"[magenta]SNR > 0 dB  [/magenta] [white]{coverage}[/white] "
            "[dim](farthest ground distance)[/dim]",
            title=_label("SUMMARY", "magenta"),
            border_style="magenta",
            padding=(0, 2),
        )
    )
    if arrivals is not None:
        _arrivals(arrivals)


def _arrivals(arrivals: pd.DataFrame) -> None:
    table = Table(box=box.SIMPLE_HEAVY, header_style="bold magenta", padding=(0, 1))
    table.add_column("#", justify="center", width=3)
    table.add_column("PoI", style="bold white")
    table.add_column("Closest at", justify="right")
    table.add_column("Miss distance", justify="right")
    for row in arrivals.itertuples(index=False):
        table.add_row(
            str(row.poi), row.label or "-", f"{row.time_s:,.0f} s", _km(row.distance_m)
        )
    console.print(table)


def sweep_summary(frame: pd.DataFrame, column: str) -> None:
    worst = frame.loc[frame["snr_db"].idxmin()]
    best = frame.loc[frame["snr_db"].idxmax()]
    console.print(
        Panel(
            f"[magenta]Best  [/magenta] [white]{best['snr_db']:.2f} dB[/white] "
            f"[dim]at {best[column]:g} GHz[/dim]\n"
            f"[magenta]Worst [/magenta] [white]{worst['snr_db']:.2f} dB[/white] "
            f"[dim]at {worst[column]:g} GHz[/dim]",
            title=_label("SWEEP", "magenta"),
            border_style="magenta",
            padding=(0, 2),
        )
    )


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


def output_written(path: Path, rows: int) -> None:
    console.print(
        _label("DONE", "green"), f"[green] {rows:,} rows written to[/green] [white]{path}[/white]"
    )


def tables_written(paths: list[Path]) -> None:
    for path in paths:
        console.print(f"  [bold green]✓[/bold green] [white]{path}[/white]")


def halt(reason: str) -> None:
    console.print()
    console.print(
        Panel(
            f"[bold white]{reason}[/bold white]",
            title=_label("HALT", "red"),
            border_style="red",
            padding=(0, 2),
        )
    )
    console.print()
