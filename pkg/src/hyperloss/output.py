"""CSV and JSON emitters with a reproducibility header.

CSV files start with ``#`` comment lines carrying the schema version, the dB
sign convention and the fully resolved configuration as one JSON line,
followed by a fixed header row. Numbers are written with ``repr`` precision
so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .network import SCHEMA_VERSION

SWEEP_COLUMNS = (
    "phi_rad",
    "omega_hz",
    "eps",
    "v_min_rel_shot",
    "v_max_rel_shot",
    "v_sqz_quad_rel_shot",
    "squeezing_db",
    "cold_loss_frac",
)
MAP_COLUMNS = ("phi_rad", "omega_hz", "v_min_rel_shot", "squeezing_db")
CHAIN_COLUMNS = ("phi_rad", "squeezing_db", "below_threshold")
DB_CONVENTION = "squeezing_db > 0: noise below shot noise; < 0: excess noise above shot noise"


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return None if math.isnan(float(obj)) else float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _header(config: dict, extra: tuple = ()) -> list:
    lines = [
        f"# schema: {SCHEMA_VERSION}",
        f"# {DB_CONVENTION}",
        "# config: " + json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":")),
    ]
    lines += [f"# {line}" for line in extra]
    return lines


def sweep_csv(sweep, config: dict) -> str:
    omega_hz = sweep.omega / (2 * np.pi)
    db = sweep.squeezing_db("optimal")
    cold = sweep.cold_loss if sweep.cold_loss is not None else np.full(len(sweep.grid), np.nan)
    lines = _header(config, (f"sweep axis: {sweep.axis}",))
    lines.append(",".join(SWEEP_COLUMNS))
    for i in range(len(sweep.grid)):
        row = (
            sweep.phi[i], omega_hz, sweep.eps[i], sweep.v_min[i], sweep.v_max[i],
            sweep.v_squeezed[i], db[i], cold[i],
        )
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def sweep_json(sweep, config: dict) -> str:
    return dumps(
        {
            "schema": SCHEMA_VERSION,
            "config": config,
            "convention": DB_CONVENTION,
            "axis": sweep.axis,
            "omega_hz": sweep.omega / (2 * np.pi),
            "columns": {
                "phi_rad": sweep.phi,
                "eps": sweep.eps,
                "v_min_rel_shot": sweep.v_min,
                "v_max_rel_shot": sweep.v_max,
                "v_sqz_quad_rel_shot": sweep.v_squeezed,
                "squeezing_db": sweep.squeezing_db("optimal"),
                "cold_loss_frac": sweep.cold_loss,
            },
        }
    )


def map_csv(pmap, config: dict) -> str:
    lines = _header(config)
    lines.append(",".join(MAP_COLUMNS))
    omegas_hz = np.asarray(pmap.omega_grid) / (2 * np.pi)
    for i, phi in enumerate(pmap.phi_grid):
        for j, f in enumerate(omegas_hz):
            v = pmap.v_min[i, j]
            lines.append(",".join(fmt(x) for x in (phi, f, v, -10 * np.log10(v))))
    return "\n".join(lines) + "\n"


def map_json(pmap, config: dict) -> str:
    return dumps(
        {
            "schema": SCHEMA_VERSION,
            "config": config,
            "convention": DB_CONVENTION,
            "phi_rad": pmap.phi_grid,
            "omega_hz": np.asarray(pmap.omega_grid) / (2 * np.pi),
            "v_min_rel_shot": pmap.v_min,
        }
    )


def chain_csv(phis, db, threshold_db: float, config: dict) -> str:
    lines = _header(config, (f"threshold_db: {threshold_db!r}",))
    lines.append(",".join(CHAIN_COLUMNS))
    for phi, val in zip(phis, db):
        lines.append(f"{fmt(phi)},{fmt(val)},{int(val < threshold_db - 1e-9)}")
    return "\n".join(lines) + "\n"


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
