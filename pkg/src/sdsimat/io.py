"""CSV and sidecar-metadata files produced by the harness and CLI."""
from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np

from .harness import CurvePoint

__all__ = [
    "CURVE_HEADER",
    "write_csv",
    "read_csv",
    "write_metadata",
    "write_rows",
    "read_complex_csv",
    "write_taps_csv",
    "read_pattern_file",
]

CURVE_HEADER = ("method", "pilot_mode", "snr_db", "mse", "ber", "trials", "failures")


def _num(x) -> str:
    # repr gives the shortest string that round-trips a double exactly
    return repr(float(x))


def write_csv(points, path) -> None:
    """Write curve points with the fixed header; ``path`` may be an open text file."""
    rows = [(p.method, p.pilot_mode, float(p.snr_db), float(p.mse), float(p.ber), p.trials, p.failures) for p in points]
    if hasattr(path, "write"):
        write_rows(path, CURVE_HEADER, rows)
        return
    try:
        write_rows(path, CURVE_HEADER, rows)
    except OSError as exc:
        raise OSError(f"could not write results to {path}: {exc}") from exc


def read_csv(path) -> list:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CURVE_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            CurvePoint(
                row["method"],
                row["pilot_mode"],
                float(row["snr_db"]),
                float(row["mse"]),
                float(row["ber"]),
                int(row["trials"]),
                int(row["failures"]),
            )
            for row in reader
        ]


def write_metadata(path, **fields) -> None:
    from . import __version__

    meta = {
        "versions": {
            "sdsimat": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        **fields,
    }
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")


def write_rows(path_or_fh, header, rows) -> None:
    def _emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) if isinstance(v, float) else v for v in row])

    if hasattr(path_or_fh, "write"):
        _emit(path_or_fh)
    else:
        with Path(path_or_fh).open("w", newline="") as fh:
            _emit(fh)


def read_complex_csv(path) -> np.ndarray:
    """Read ``real,imag`` pairs, one per line; a header row is optional."""
    values = []
    with Path(path).open(newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or row[0].startswith("#"):
                continue
            try:
                re, im = float(row[0]), float(row[1]) if len(row) > 1 else 0.0
            except ValueError:
                if i == 0:
                    continue
                raise ValueError(f"{path}:{i + 1}: cannot parse {row!r}") from None
            values.append(complex(re, im))
    return np.asarray(values, dtype=complex)


def write_taps_csv(path_or_fh, taps) -> None:
    taps = np.asarray(taps, dtype=complex)
    write_rows(path_or_fh, ("index", "real", "imag"), [(i, float(t.real), float(t.imag)) for i, t in enumerate(taps)])


def read_pattern_file(path) -> list:
    """Integers separated by whitespace or commas, ``#`` comments allowed."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0]
        out.extend(int(tok) for tok in line.replace(",", " ").split())
    return out
