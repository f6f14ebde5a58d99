"""
Progress reporting using Rich.

Falls back to plain text when Rich is missing or progress is disabled.
"""
import sys
import time
from typing import Optional

try:
    from rich.console import Console
    from rich.progress import (
        BarColumn,
        Progress,
        SpinnerColumn,
        TaskProgressColumn,
        TextColumn,
        TimeElapsedColumn,
        TimeRemainingColumn,
    )
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False

from .tracker import ProgressTracker, Stage


class ProgressReporter:
    """
    Reports progress to the console using Rich.

    Provides:
    - Overall cell progress bar
    - Current stage progress bar
    - Time elapsed and remaining
    """

    def __init__(self, tracker: ProgressTracker):
        self.tracker = tracker
        self.console = Console(stderr=True)
        self.progress: Optional[Progress] = None
        self.overall_task_id = None
        self.stage_task_id = None
        self.start_time = time.time()

    def __enter__(self) -> "ProgressReporter":
        self.progress = Progress(
            SpinnerColumn(),
            TextColumn("[bold blue]{task.description}"),
            BarColumn(bar_width=40),
            TaskProgressColumn(),
            TimeElapsedColumn(),
            TextColumn("ETA:"),
            TimeRemainingColumn(),
            console=self.console,
            transient=False,
        )
        self.progress.start()
        self.overall_task_id = self.progress.add_task(
            f"[cyan]Overall: {self.tracker.label[:40]}",
            total=100,
        )
        self.tracker.on_update = self._on_progress_update
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.progress:
            self.progress.stop()

    def _on_progress_update(self, tracker: ProgressTracker):
        if not self.progress:
            return

        if self.overall_task_id is not None:
            self.progress.update(self.overall_task_id, completed=tracker.overall_percent)

        stage_progress = tracker.current_stage_progress
        if stage_progress and self.stage_task_id is not None:
            self.progress.update(
                self.stage_task_id,
                description=f"  {tracker.get_status_text()}",
                completed=stage_progress.completed,
                total=stage_progress.total,
            )

    def start_stage(self, stage: Stage, description: str, total: float = 100):
        """Start a new stage with a fresh progress bar."""
        if self.progress and self.stage_task_id is not None:
            self.progress.update(self.stage_task_id, visible=False)
        if self.progress:
            self.stage_task_id = self.progress.add_task(f"  {description}", total=total)
        self.tracker.start_stage(stage, description, total)

    def update(self, advance: float = 0, completed: Optional[float] = None):
        self.tracker.update_stage(advance=advance, completed=completed)

    def complete_stage(self):
        self.tracker.complete_stage()

    def print_summary(self):
        elapsed = time.time() - self.start_time
        minutes = int(elapsed // 60)
        seconds = int(elapsed % 60)
        self.console.print(f"[green]{self.tracker.label} completed in {minutes}m {seconds}s[/green]")


class SimpleReporter:
    """
    Plain-text progress reporter for non-Rich environments.
    """

    def __init__(self, tracker: ProgressTracker, quiet: bool = False):
        self.tracker = tracker
        self.quiet = quiet
        self.last_percent = -1
        self.start_time = time.time()

    def __enter__(self) -> "SimpleReporter":
        if not self.quiet:
            print(f"Running: {self.tracker.label}", file=sys.stderr)
        self.tracker.on_update = self._on_progress_update
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if not self.quiet:
            print(file=sys.stderr)

    def _on_progress_update(self, tracker: ProgressTracker):
        if self.quiet:
            return
        percent = int(tracker.overall_percent)
        if percent != self.last_percent:
            self.last_percent = percent
            print(f"\r[{percent:3d}%] {tracker.get_status_text()}", end="", file=sys.stderr, flush=True)

    def start_stage(self, stage: Stage, description: str, total: float = 100):
        self.tracker.start_stage(stage, description, total)

    def update(self, advance: float = 0, completed: Optional[float] = None):
        self.tracker.update_stage(advance=advance, completed=completed)

    def complete_stage(self):
        self.tracker.complete_stage()

    def print_summary(self):
        if not self.quiet:
            print(f"\n{self.tracker.label} completed in {time.time() - self.start_time:.0f}s", file=sys.stderr)


def create_reporter(tracker: ProgressTracker, show_progress: bool = True):
    """Create the appropriate reporter; show_progress=False yields a silent one."""
    if not show_progress:
        return SimpleReporter(tracker, quiet=True)
    if RICH_AVAILABLE:
        return ProgressReporter(tracker)
    return SimpleReporter(tracker)
