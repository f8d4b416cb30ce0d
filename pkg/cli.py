"""🧪 Trajectory CLI - batch driver for the trajectory engine.

Every invocation restores the session snapshot (``--store``, default
``data/session.snap``), runs one command, and saves the session again when
the command changed the store.

Usage:
    python cli.py load-devices devices.csv
    python cli.py load-regions regions.jsonl
    python cli.py load-points points.csv
    python cli.py segment --eps 50 --tau 600
    python cli.py annotate
    python cli.py query "stops where duration > 10min"
    python cli.py export --kind semantic --object MO

Exit codes: 0 success, 1 user error, 2 internal error.
"""

from __future__ import annotations

import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import click
from pydantic import ValidationError

# Add src to Python path for imports
sys.path.insert(0, str(Path(__file__).parent))

from src.config import DEBUG_MODE, STORE_PATH, validate_config  # noqa: E402
from src.errors import EngineError  # noqa: E402
from src.models import IngestKind, IngestReport, PresentationKind, SegmentationParams  # noqa: E402
from src.tools.engine import TrajectoryEngine  # noqa: E402
from src.tools.snapshot import load_snapshot, save_snapshot  # noqa: E402

logger = logging.getLogger(__name__)

_CLI_HANDLER_NAME = "trajectory-cli"


# =============================================================================
# 🎨 CLI STYLING AND HELPERS
# =============================================================================


def print_success(message: str) -> None:
    """✅ Print success message."""
    click.echo(click.style(f"✅ {message}", fg="green"))


def print_error(message: str) -> None:
    """❌ Print error message to stderr."""
    click.echo(click.style(f"❌ {message}", fg="red"), err=True)


def print_info(message: str) -> None:
    """ℹ️ Print info message."""
    click.echo(click.style(f"ℹ️  {message}", fg="blue"))


def setup_cli_logging(verbose: bool) -> None:
    """📊 Route package logs to stderr so stdout stays a clean table stream."""
    package_logger = logging.getLogger("src")
    for handler in list(package_logger.handlers):
        if handler.get_name() == _CLI_HANDLER_NAME:
            package_logger.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.set_name(_CLI_HANDLER_NAME)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    package_logger.addHandler(handler)
    package_logger.setLevel(logging.DEBUG if verbose or DEBUG_MODE else logging.WARNING)


class CliSession:
    """Engine plus the snapshot file it is restored from and saved to."""

    def __init__(self, store_path: Path) -> None:
        self.store_path = store_path
        self.engine = TrajectoryEngine()
        if store_path.exists():
            self.engine.store = load_snapshot(store_path)

    def commit(self) -> None:
        save_snapshot(self.store_path, self.engine.store)


pass_session = click.make_pass_decorator(CliSession)


def print_report(report: IngestReport) -> None:
    print_success(
        f"{Path(report.file).name}: {report.records_accepted} accepted, {report.records_rejected} rejected"
    )
    for error in report.first_errors:
        click.echo(f"  line {error.line}: {error.message}")


# =============================================================================
# 🛰️ COMMANDS
# =============================================================================


@click.group()
@click.option(
    "--store",
    "store_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=STORE_PATH,
    show_default=True,
    help="Session snapshot restored before and saved after each command",
)
@click.option("--verbose", "-v", is_flag=True, help="Log debug output to stderr")
@click.pass_context
def cli(ctx: click.Context, store_path: Path, verbose: bool) -> None:
    """🛰️ Moving-object trajectory engine."""
    setup_cli_logging(verbose)
    validate_config()
    ctx.obj = CliSession(store_path)


def _loader(kind: IngestKind) -> click.Command:
    @click.command(name=f"load-{kind.value}", help=f"📥 Load a {kind.value} file into the session.")
    @click.argument("path", type=click.Path(path_type=Path))
    @pass_session
    def command(session: CliSession, path: Path) -> None:
        report = session.engine.load(kind, path)
        session.commit()
        print_report(report)

    return command


for _kind in IngestKind:
    cli.add_command(_loader(_kind))


@cli.command()
@click.option("--eps", type=float, required=True, help="Neighbourhood radius in meters")
@click.option("--tau", type=int, required=True, help="Minimum stop duration in seconds")
@click.option("--object", "object_id", default=None, help="Segment only this moving object")
@pass_session
def segment(session: CliSession, eps: float, tau: int, object_id: str | None) -> None:
    """✂️ Split raw trajectories into stops and moves."""
    summary = session.engine.segment(SegmentationParams(eps=eps, tau=tau), object_id)
    session.commit()
    print_success(f"Segmented {summary.objects} objects: {summary.stops} stops, {summary.moves} moves")


@cli.command()
@pass_session
def annotate(session: CliSession) -> None:
    """🏷️ Label episodes with regions of interest."""
    summary = session.engine.annotate()
    session.commit()
    print_success(
        f"Annotated {summary.objects} objects: {summary.annotated_episodes} episodes labelled, "
        f"{summary.unannotated_episodes} outside every region"
    )


@cli.command()
@click.option("--cell-size", type=float, default=None, help="Grid cell edge in meters")
@click.option("--time-bucket", type=int, default=None, help="Time bucket length in seconds")
@pass_session
def index(session: CliSession, cell_size: float | None, time_bucket: int | None) -> None:
    """🗂️ Build the spatio-temporal grid index."""
    summary = session.engine.build_index(cell_size, time_bucket)
    session.commit()
    print_success(
        f"Indexed {summary.events} events into {summary.buckets} buckets "
        f"(cell {summary.cell_size:g} m, bucket {summary.time_bucket} s)"
    )


@cli.command()
@click.argument("dsl")
@pass_session
def query(session: CliSession, dsl: str) -> None:
    """🔎 Run a query and print a tab-separated table."""
    click.echo(session.engine.query(dsl).to_tsv(), nl=False)


@cli.command()
@click.option(
    "--kind",
    type=click.Choice([kind.value for kind in PresentationKind]),
    required=True,
    help="Presentation to export",
)
@click.option("--object", "object_id", required=True, help="Moving object id")
@pass_session
def export(session: CliSession, kind: str, object_id: str) -> None:
    """📤 Print one presentation of a moving object as JSON."""
    click.echo(json.dumps(session.engine.export(kind, object_id), indent=2, sort_keys=True))


@cli.command(name="compose-process")
@click.argument("name")
@click.argument("activity_ids", nargs=-1, required=True)
@pass_session
def compose_process(session: CliSession, name: str, activity_ids: tuple[str, ...]) -> None:
    """🧩 Group activities of one object into a named process."""
    process = session.engine.compose_process(name, list(activity_ids))
    session.commit()
    print_success(f"Process {process.id!r}: {' -> '.join(process.activities)}")


@cli.command()
@click.argument("path", type=click.Path(dir_okay=False, path_type=Path))
@pass_session
def save(session: CliSession, path: Path) -> None:
    """💾 Save the session store to a snapshot file."""
    target = session.engine.save(path)
    print_success(f"Saved revision {session.engine.store.revision} to {target}")


@cli.command()
@click.argument("path", type=click.Path(dir_okay=False, path_type=Path))
@pass_session
def load(session: CliSession, path: Path) -> None:
    """📂 Replace the session store with a snapshot file."""
    session.engine.restore(path)
    session.commit()
    print_success(f"Loaded revision {session.engine.store.revision} from {path}")


@cli.command()
@pass_session
def status(session: CliSession) -> None:
    """💚 Show the session revision and entity counts."""
    summary = session.engine.summary()
    print_info(f"Revision {summary['revision']}, index {'fresh' if summary['index_fresh'] else 'stale'}")
    for name, count in summary["counts"].items():
        click.echo(f"  {name}: {count}")


# =============================================================================
# 🚀 ENTRY POINTS
# =============================================================================


def run_cli(argv: Sequence[str]) -> int:
    """Run one command line; returns the process exit code."""
    try:
        result = cli.main(args=list(argv), prog_name="trajectory-cli", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.Abort:
        print_error("Aborted")
        return 1
    except (EngineError, ValidationError) as e:
        print_error(str(e))
        return 1
    except Exception as e:
        logger.exception("💥 Internal error")
        print_error(f"internal error: {e}")
        return 2
    return result if isinstance(result, int) else 0


def main() -> None:
    """🚀 Main CLI entry point."""
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
