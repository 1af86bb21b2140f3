"""Rich tables and panels for command summaries."""

from __future__ import annotations

from datetime import datetime

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from accel_sim import CycleReport, ReportComparison
from renderer import AccessReport, StepTrace
from sparse import CodecStats, SparsityCensus
from utils.byte_size import ByteSize

console = Console()


class StatusLog:
    """Timestamped progress entries shown at the end of a command."""

    LEVEL_COLORS = {"info": "blue", "success": "green", "warning": "yellow", "error": "red"}
    LEVEL_SYMBOLS = {"info": "●", "success": "✓", "warning": "⚠", "error": "✗"}

    def __init__(self) -> None:
        self.entries: list[str] = []

    def add(self, message: str, level: str = "info") -> None:
        timestamp = datetime.now().strftime("%H:%M:%S")
        color = self.LEVEL_COLORS.get(level, "white")
        symbol = self.LEVEL_SYMBOLS.get(level, "●")
        self.entries.append(f"[dim]{timestamp}[/dim] [{color}]{symbol}[/{color}] {message}")

    def render(self) -> Table:
        table = Table.grid(padding=(0, 1), expand=True)
        table.add_column(style="dim", no_wrap=True)
        for entry in self.entries[-12:]:
            table.add_row(entry)
        return table


def create_header(command: str) -> Panel:
    grid = Table.grid(expand=True)
    grid.add_column(justify="center", ratio=1)
    title = Text()
    title.append("RT-NERF ", style="bold cyan")
    title.append(command.upper(), style="bold white")
    grid.add_row(title)
    return Panel(grid, style="bright_black", box=box.HEAVY)


def framed(renderable: Table, title: str) -> Panel:
    return Panel(
        renderable,
        title=f"[bold white]{title}[/bold white]",
        border_style="bright_black",
        box=box.ROUNDED,
        padding=(1, 2),
    )


def _property_table() -> Table:
    table = Table(box=box.SIMPLE, show_header=False, expand=True, padding=(0, 1))
    table.add_column("Property", style="bright_cyan", no_wrap=True)
    table.add_column("Value", style="white", justify="right")
    return table


def create_trace_table(trace: StepTrace) -> Table:
    table = _property_table()
    for key, value in trace.counters().items():
        table.add_row(key, f"{value:,}")
    for key, value in trace.spu_primitives.to_dict().items():
        table.add_row(f"spu.{key}", f"{value:,}")
    table.add_row("embedding traffic", ByteSize.from_bytes(trace.embedding_bytes).format_bytes())
    return table


def create_cycle_table(report: CycleReport) -> Table:
    """Per-step cycles with breakdown share and the bound that set them."""
    table = Table(box=box.SIMPLE, show_header=True, header_style="bold cyan", expand=True, padding=(0, 1))
    table.add_column("Step", style="bright_cyan", no_wrap=True)
    table.add_column("Cycles", justify="right", style="white")
    table.add_column("Share", justify="right", style="bright_green")
    table.add_column("Bound", justify="center")
    breakdown = report.breakdown
    for key, cycles in report.cycles.items():
        bound = "[yellow]memory[/yellow]" if report.memory_bound[key] else "[dim]compute[/dim]"
        table.add_row(key, f"{cycles:,.1f}", f"{100 * breakdown[key]:.1f}%", bound)
    table.add_row("[bold]total[/bold]", f"{report.total_cycles:,.1f}", f"{report.fps:,.2f} fps", "")
    return table


def create_comparison_table(comparison: ReportComparison) -> Table:
    table = Table(box=box.SIMPLE, show_header=True, header_style="bold cyan", expand=True, padding=(0, 1))
    table.add_column("Step", style="bright_cyan", no_wrap=True)
    table.add_column("Speedup", justify="right", style="bright_green")
    table.add_column("Share shift", justify="right", style="white")
    for key, speedup in comparison.step_speedup.items():
        shift = comparison.fraction_shift[key]
        style = "bright_red" if shift > 0 else "bright_green"
        table.add_row(key, f"{speedup:.3f}x", f"[{style}]{100 * shift:+.2f} pts[/{style}]")
    table.add_row("[bold]total[/bold]", f"{comparison.total_speedup:.3f}x", "")
    return table


def create_census_table(census: SparsityCensus, limit: int = 12) -> Table:
    table = Table(box=box.SIMPLE, show_header=True, header_style="bold cyan", expand=True, padding=(0, 1))
    table.add_column("Factor", style="bright_cyan", no_wrap=True)
    table.add_column("Sparsity", justify="right", style="white")
    table.add_column("Format", justify="center")
    for entry in census.factors[:limit]:
        table.add_row(entry.name, f"{100 * entry.sparsity:.1f}%", entry.variant.value)
    if len(census.factors) > limit:
        table.add_row(f"[dim]... {len(census.factors) - limit} more[/dim]", "", "")
    table.add_row("[bold]low share[/bold]", f"{100 * census.low_share:.1f}%", "")
    return table


def create_codec_table(stats: CodecStats) -> Table:
    table = _property_table()
    table.add_row("queries", f"{stats.queries:,}")
    for cycles, count in sorted(stats.cycle_histogram.items()):
        table.add_row(f"{cycles}-cycle queries", f"{count:,}")
    table.add_row("COO share", f"{100 * stats.coo_fraction:.1f}%")
    table.add_row("zero products", f"{100 * stats.zero_product_fraction:.1f}%")
    table.add_row("encoded", ByteSize.from_bytes(stats.encoded_bytes).format_bytes())
    table.add_row("dense", ByteSize.from_bytes(stats.dense_bytes).format_bytes())
    return table


def create_access_table(report: AccessReport) -> Table:
    table = _property_table()
    table.add_row("uniform accesses", f"{report.uniform_accesses:,}")
    table.add_row("rt accesses", f"{report.rt_accesses:,}")
    table.add_row("occupied cells", f"{report.popcount:,}")
    ratio = report.ratio
    table.add_row("ratio", "unbounded" if ratio is None else f"{ratio:,.2f}x")
    return table
