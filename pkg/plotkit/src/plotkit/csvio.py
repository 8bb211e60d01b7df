"""Readers for the engine's CSV schemas.

Series files ("# nafdyn-series v1") carry one estimate per row with empty
re/im/stderr fields marking undefined points; those become NaN here and stay
NaN all the way into the figure, so gaps are never interpolated.  Sweep files
("# nafdyn-sweep v1 ...") hold final-time values of many series keyed by a
parameter.
"""

import json
from dataclasses import dataclass

import numpy as np

SERIES_MAGIC = "# nafdyn-series v1"
SWEEP_MAGIC = "# nafdyn-sweep v1"


class SchemaError(ValueError):
    pass


@dataclass
class Series:
    x: np.ndarray
    values: np.ndarray  # complex, NaN when undefined
    stderr: np.ndarray
    n_traj: np.ndarray
    descriptor: dict
    path: str


def read_series(path):
    path = str(path)
    try:
        fh = open(path)
    except OSError as err:
        raise SchemaError(f"{path}: cannot open ({err})") from err
    with fh:
        magic = fh.readline().strip()
        if magic != SERIES_MAGIC:
            raise SchemaError(f"{path}: expected '{SERIES_MAGIC}', got {magic!r}")
        desc_line = fh.readline().strip()
        if not desc_line.startswith("# descriptor: "):
            raise SchemaError(f"{path}: missing '# descriptor:' header line")
        try:
            descriptor = json.loads(desc_line[len("# descriptor: "):])
        except json.JSONDecodeError as err:
            raise SchemaError(f"{path}: descriptor is not valid JSON ({err})") from err
        header = fh.readline().strip()
        if header != "time,re,im,stderr,n_traj":
            raise SchemaError(f"{path}: unexpected columns {header!r}")
        x, vals, errs, ntr = [], [], [], []
        for lineno, line in enumerate(fh, start=4):
            cells = line.rstrip("\n").split(",")
            if len(cells) != 5:
                raise SchemaError(f"{path}:{lineno}: expected 5 fields, got {len(cells)}")
            try:
                x.append(float(cells[0]))
                if cells[1] == "":
                    vals.append(complex(np.nan, np.nan))
                    errs.append(np.nan)
                else:
                    vals.append(complex(float(cells[1]), float(cells[2])))
                    errs.append(float(cells[3]))
                ntr.append(int(cells[4]))
            except ValueError as err:
                raise SchemaError(f"{path}:{lineno}: {err}") from err
    return Series(np.array(x), np.array(vals), np.array(errs), np.array(ntr),
                  descriptor, path)


def read_sweep(path, select):
    """Extract one named series from a sweep file: x = parameter values."""
    path = str(path)
    with open(path) as fh:
        magic = fh.readline().strip()
        if not magic.startswith(SWEEP_MAGIC):
            raise SchemaError(f"{path}: expected '{SWEEP_MAGIC} ...', got {magic!r}")
        header = fh.readline().strip()
        if header != "param,series,time,re,im,stderr,n_traj":
            raise SchemaError(f"{path}: unexpected columns {header!r}")
        x, vals, errs, ntr = [], [], [], []
        for lineno, line in enumerate(fh, start=3):
            cells = line.rstrip("\n").split(",")
            if len(cells) != 7:
                raise SchemaError(f"{path}:{lineno}: expected 7 fields, got {len(cells)}")
            if cells[1] != select:
                continue
            x.append(float(cells[0]))
            if cells[3] == "":
                vals.append(complex(np.nan, np.nan))
                errs.append(np.nan)
            else:
                vals.append(complex(float(cells[3]), float(cells[4])))
                errs.append(float(cells[5]))
            ntr.append(int(cells[6]))
    if not x:
        raise SchemaError(f"{path}: no rows for series {select!r}")
    order = np.argsort(x)
    return Series(np.array(x)[order], np.array(vals)[order], np.array(errs)[order],
                  np.array(ntr)[order], {"kind": "sweep", "series": select}, path)
