"""
Shared Output Utility
=====================

Writes result tables as UTF-8 CSV preceded by a ``#``-prefixed header block
(tool version, resolved config, seed, wall-clock) and structured reports as
JSON. Float formatting is fixed so that identical inputs give identical bytes.
"""
import json
import logging
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, TextIO

import pandas as pd

from utils.config import TOOL_NAME, TOOL_VERSION
from utils.errors import OutputError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


@contextmanager
def open_output(path: Path) -> Iterator[TextIO]:
    """Context manager for an output file; parent directories are created."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        handle = open(path, "w", encoding="utf-8", newline="")
    except OSError as e:
        raise OutputError(f"cannot open {path} for writing: {e}") from e
    try:
        yield handle
    finally:
        handle.close()


def header_lines(
    config: Dict[str, Any],
    seed: Optional[int] = None,
    wall_clock: bool = True,
) -> List[str]:
    """Build the ``#`` header block for an output file."""
    lines = [
        f"# tool: {TOOL_NAME} {TOOL_VERSION}",
        f"# config: {json.dumps(config, sort_keys=True, default=str)}",
        f"# seed: {seed if seed is not None else 'none'}",
    ]
    if wall_clock:
        lines.append(f"# wall_clock: {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    return lines


def write_csv(
    df: pd.DataFrame,
    path: Path,
    config: Dict[str, Any],
    seed: Optional[int] = None,
    wall_clock: bool = True,
) -> Path:
    """
    Write a table with its header block.

    Args:
        df: Table to write; column order is preserved
        path: Destination file
        config: Resolved run configuration echoed into the header
        seed: Seed used for the run, if any
        wall_clock: Include the wall-clock line (the only non-reproducible line)

    Returns:
        The path written
    """
    path = Path(path)
    with open_output(path) as handle:
        for line in header_lines(config, seed, wall_clock):
            handle.write(line + "\n")
        df.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"✅ Wrote {len(df)} rows to {path}")
    return path


def write_report(
    report: Dict[str, Any],
    path: Path,
    config: Dict[str, Any],
    seed: Optional[int] = None,
    wall_clock: bool = True,
) -> Path:
    """Write a structured report as JSON with the same header fields."""
    path = Path(path)
    document = {
        "tool": f"{TOOL_NAME} {TOOL_VERSION}",
        "config": config,
        "seed": seed,
        "report": report,
    }
    if wall_clock:
        document["wall_clock"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    with open_output(path) as handle:
        json.dump(document, handle, indent=2, sort_keys=True, default=str)
        handle.write("\n")
    logger.info(f"✅ Wrote report to {path}")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    """Read a table written by ``write_csv`` (header block skipped)."""
    try:
        return pd.read_csv(path, comment="#")
    except OSError as e:
        raise OutputError(f"cannot read {path}: {e}") from e
