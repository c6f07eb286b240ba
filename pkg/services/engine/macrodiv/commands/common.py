"""
Helpers shared by the CLI commands: profile resolution and output writers.
"""
import csv
import sys
from contextlib import contextmanager
from typing import Any, Iterable, Iterator, Optional, Sequence, TextIO, Tuple

import numpy as np
import orjson

from ..config import settings
from ..core import mpsk_params, swap_users
from ..errors import ConfigError
from ..schemas import GridScale, GridSpec, Modulation, PowerProfile, RunConfig, SystemConfig
from ..simulation.scenarios import build_scenario, table1_scenario


def resolve_profile(cfg: RunConfig) -> Tuple[PowerProfile, float, str]:
    """(profile, sigma2, label) from a scenario id or explicit powers"""
    if cfg.scenario is not None:
        spec = table1_scenario(cfg.scenario, rho_db=cfg.rho_db, n_r=cfg.n_r, total_p1=cfg.total_p1)
        p, sigma2 = build_scenario(spec)
        label = cfg.scenario.value
        if cfg.sigma2 is not None:
            sigma2 = cfg.sigma2
    elif cfg.p1 is not None and cfg.p2 is not None:
        if cfg.sigma2 is None:
            raise ConfigError("explicit profiles need --sigma2")
        p = PowerProfile.from_arrays(cfg.p1, cfg.p2)
        sigma2 = cfg.sigma2
        label = "explicit"
    else:
        raise ConfigError("give --scenario or both --p1 and --p2")
    if cfg.user == 2:
        p = swap_users(p)
        label += ":user2"
    return p, float(sigma2), label


def resolve_system(cfg: RunConfig) -> Tuple[PowerProfile, SystemConfig, str]:
    """Profile plus the (sigma2, receiver, modulation order) it is analysed under"""
    p, sigma2, label = resolve_profile(cfg)
    return p, SystemConfig(sigma2=sigma2, receiver=cfg.receiver, modulation_order=cfg.modulation_order), label


def modulation(cfg: RunConfig) -> Modulation:
    return mpsk_params(cfg.modulation_order)


def make_grid(grid: GridSpec) -> np.ndarray:
    if grid.scale == GridScale.LOG:
        return np.geomspace(grid.z_min, grid.z_max, grid.n_points)
    return np.linspace(grid.z_min, grid.z_max, grid.n_points)


def seed_of(cfg: RunConfig) -> int:
    return settings.SEED if cfg.mc.seed is None else cfg.mc.seed


def fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    if path:
        with open(path, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: Optional[str]) -> int:
    count = 0
    with open_output(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
            count += 1
    return count


def dumps(payload: Any) -> bytes:
    return orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_NON_STR_KEYS)


def write_json(payload: Any, path: Optional[str]) -> None:
    data = dumps(payload)
    if path:
        with open(path, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode() + "\n")
