"""Benchmark map lookup.

A map argument is resolved in this order:

1. an existing file path;
2. ``<name>.map`` inside ``$PIBT_TIEBREAK_DATA`` (official MovingAI files go here);
3. a map bundled with the package (``empty-48-48``, ``room-64-64-8``);
4. a deterministic generated stand-in for a benchmark that is not bundled
   (``random-32-32-10``, ``warehouse-10-20-10-2-2``, ``sortation``), with a
   warning, since its obstacle layout differs from the official file.
"""

from __future__ import annotations

import logging
import os
from importlib import resources
from pathlib import Path

from .grid_graph import (
    GridMap,
    generate_random_map,
    generate_sortation_map,
    generate_warehouse_map,
    load_map,
    parse_map,
)

log = logging.getLogger(__name__)

DATA_ENV = "PIBT_TIEBREAK_DATA"

BUNDLED = ("empty-48-48", "room-64-64-8")

# same dimensions as the official maps, different obstacle layout
STAND_INS = {
    "random-32-32-10": lambda: generate_random_map(32, 32, 102, seed=32_32_10),
    "warehouse-10-20-10-2-2": generate_warehouse_map,
    "sortation": lambda: generate_sortation_map(140, 200),
}

BENCHMARK_MAPS = ("random-32-32-10", "room-64-64-8", "warehouse-10-20-10-2-2", "sortation", "empty-48-48")


class MapNotFound(FileNotFoundError):
    pass


def _stem(name: str) -> str:
    return name[:-4] if name.endswith(".map") else name


def resolve_map(spec: str | os.PathLike) -> GridMap:
    path = Path(spec)
    if path.is_file():
        return load_map(path)
    stem = _stem(path.name)
    data_dir = os.environ.get(DATA_ENV)
    if data_dir:
        candidate = Path(data_dir) / f"{stem}.map"
        if candidate.is_file():
            return load_map(candidate)
    if stem in BUNDLED:
        text = resources.files("pibt_tiebreak").joinpath(f"data/maps/{stem}.map").read_text()
        return parse_map(text, name=stem)
    if stem in STAND_INS:
        log.warning("official %s.map not found; using a generated stand-in of the same size", stem)
        grid = STAND_INS[stem]()
        return GridMap.from_mask(grid.passable, name=stem)
    raise MapNotFound(f"map {str(spec)!r} not found (set ${DATA_ENV} to a directory of .map files)")
