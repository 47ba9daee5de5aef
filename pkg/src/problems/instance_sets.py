"""
Generate N_c-filtered sets of random problem instances.

Instances are drawn uniformly (see ``random_instance``) and kept only when
their critical ensemble size satisfies a predicate:
- "eq:<n>"  N_c == n  (e.g. the N_c = 3 set)
- "gt:<n>"  N_c > n   (e.g. the hard N_c > 7 set)
- "<n>"     same as "eq:<n>"

Draws with a degenerate ground corner are always rejected. Per-draw seeds
come from one root seed, so a set is reproducible from (M, count, predicate, seed).
"""
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional

import pandas as pd

from analytics.landscape import derive_seeds, landscape_summary
from problems.instances import ProblemInstance, random_instance, save_instance
from utils.errors import ConfigError, GuardLimitError
from utils.output import write_csv

logger = logging.getLogger(__name__)

# draws allowed per requested instance before giving up
MAX_DRAWS_PER_INSTANCE = 2000

_PREDICATE = re.compile(r"^(?:(eq|gt):)?(\d+)$")


@dataclass
class InstanceSet:
    instances: List[ProblemInstance]
    summary: pd.DataFrame
    rejections: int
    predicate: str

    @property
    def draws(self) -> int:
        return len(self.instances) + self.rejections


def parse_nc_predicate(predicate: str) -> Callable[[int], bool]:
    """Turn "eq:<n>" or "gt:<n>" into a test on N_c."""
    match = _PREDICATE.match(predicate.strip())
    if not match:
        raise ConfigError(f"N_c predicate must look like 'eq:<n>' or 'gt:<n>', got {predicate!r}")
    op, n = match.group(1) or "eq", int(match.group(2))
    if op == "eq":
        return lambda nc: nc == n
    return lambda nc: nc > n


def generate_instance_set(
    M: int,
    count: int,
    nc_predicate: str,
    seed: int,
    max_draws: Optional[int] = None,
) -> InstanceSet:
    """
    Rejection-sample ``count`` random instances whose N_c satisfies the predicate.

    Args:
        M: Number of logical spins
        count: Instances to accept
        nc_predicate: "eq:<n>" or "gt:<n>"
        seed: Root seed
        max_draws: Draw budget (default MAX_DRAWS_PER_INSTANCE * count)

    Returns:
        InstanceSet with a summary row (seed, Nc, eps0, eps1, delta) per accepted instance
    """
    if count < 1:
        raise ConfigError(f"count must be at least 1, got {count}")
    accept = parse_nc_predicate(nc_predicate)
    max_draws = max_draws or MAX_DRAWS_PER_INSTANCE * count

    instances: List[ProblemInstance] = []
    rows = []
    rejections = 0
    for draw_seed in derive_seeds(seed, max_draws):
        inst = random_instance(M, draw_seed)
        summary = landscape_summary(inst)
        if summary.Nc is None or not accept(summary.Nc):
            rejections += 1
            continue
        instances.append(inst)
        rows.append({
            "name": inst.name,
            "seed": draw_seed,
            "Nc": summary.Nc,
            "eps0": summary.eps0,
            "eps1": summary.eps1,
            "delta": summary.delta,
        })
        if len(instances) == count:
            break

    if len(instances) < count:
        raise GuardLimitError(
            f"only {len(instances)}/{count} instances with N_c {nc_predicate} in {max_draws} draws"
        )
    logger.info(
        f"✅ Instance set M={M} N_c {nc_predicate}: accepted {count}, "
        f"rejected {rejections} ({rejections / (count + rejections) * 100:.1f}% of draws)"
    )
    return InstanceSet(instances, pd.DataFrame(rows), rejections, nc_predicate)


def save_instance_set(iset: InstanceSet, directory: Path, seed: int, wall_clock: bool = True) -> Path:
    """Write one JSON file per instance plus ``summary.csv``."""
    directory = Path(directory)
    for inst in iset.instances:
        save_instance(inst, directory / f"{inst.name}.json")
    config = {"predicate": iset.predicate, "count": len(iset.instances), "rejections": iset.rejections}
    return write_csv(iset.summary, directory / "summary.csv", config, seed=seed, wall_clock=wall_clock)


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    iset = generate_instance_set(M=3, count=60, nc_predicate="eq:3", seed=1)

    print(f"\n📊 Instance set statistics:")
    print(f"   Accepted: {len(iset.instances)}")
    print(f"   Rejected: {iset.rejections}")
    print(f"   Mean delta: {iset.summary['delta'].mean():.3f}")
    save_instance_set(iset, Path("data/instance_sets/M3_nc_eq3"), seed=1)
    print("\n✅ Instance set generation complete!")
