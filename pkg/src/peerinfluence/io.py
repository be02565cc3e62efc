"""File formats: edge lists, response matrices, draw tables, summaries.

Network file: a metadata line ``n=<count>,base=<0|1>``, a ``source,target``
header, then one directed nomination per line. Loading symmetrizes by
logical OR and drops self-loops with a warning.

Response file: a header of item ids, then one row of 0/1 values per
respondent.

All numeric table output is written with ``repr`` (shortest round-trip),
so identical draws produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import warnings
from pathlib import Path

import numpy as np

from .model import DataError, ItemResponseData, NetworkData


def _parse_meta(line, path):
    fields = dict(part.split("=", 1) for part in line.strip().split(",")
                  if "=" in part)
    try:
        n = int(fields["n"])
        base = int(fields["base"])
    except (KeyError, ValueError):
        raise DataError(f"{path}:1: expected metadata line 'n=<count>,base=<0|1>', "
                        f"got {line.strip()!r}") from None
    if base not in (0, 1):
        raise DataError(f"{path}:1: base must be 0 or 1, got {base}")
    if n < 1:
        raise DataError(f"{path}:1: n must be positive")
    return n, base


def load_network(path) -> NetworkData:
    """Read an edge-list file into a symmetric adjacency matrix.

    Directed nominations are OR-symmetrized; self-loops are dropped and
    counted in a warning. Malformed lines report their line number.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"network file not found: {path}")
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2:
        raise DataError(f"{path}: file too short (need metadata and header lines)")
    n, base = _parse_meta(lines[0], path)
    if lines[1].strip() != "source,target":
        raise DataError(f"{path}:2: expected header 'source,target', "
                        f"got {lines[1].strip()!r}")
    adj = np.zeros((n, n))
    self_loops = 0
    for lineno, raw in enumerate(lines[2:], start=3):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected 'source,target', got {raw!r}")
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-integer id in {raw!r}") from None
        src -= base
        dst -= base
        if not (0 <= src < n and 0 <= dst < n):
            raise DataError(f"{path}:{lineno}: id out of range for n={n}: {raw!r}")
        if src == dst:
            self_loops += 1
            continue
        adj[src, dst] = 1.0
        adj[dst, src] = 1.0
    if self_loops:
        warnings.warn(f"dropped {self_loops} self-loop(s) from {path}")
    return NetworkData(adj)


def save_network(path, net: NetworkData, base: int = 0) -> None:
    """Write the upper-triangle edges of a network in the edge-list format."""
    path = Path(path)
    rows, cols = np.nonzero(np.triu(net.adjacency, 1))
    with open(path, "w", newline="") as fh:
        fh.write(f"n={net.n},base={base}\n")
        fh.write("source,target\n")
        for r, c in zip(rows, cols):
            fh.write(f"{r + base},{c + base}\n")


def load_responses(path) -> ItemResponseData:
    """Read a response-matrix file: item-id header then 0/1 rows."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"response file not found: {path}")
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataError(f"{path}: empty file")
    header = [c for c in lines[0].split(",") if c.strip()]
    p = len(header)
    if p == 0:
        raise DataError(f"{path}:1: empty item header")
    rows = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != p:
            raise DataError(f"{path}:{lineno}: expected {p} values, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric value in {raw!r}") from None
    if not rows:
        raise DataError(f"{path}: no response rows")
    return ItemResponseData(np.array(rows))


def save_responses(path, resp: ItemResponseData) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(f"item_{i + 1}" for i in range(resp.p)) + "\n")
        for row in resp.responses.astype(int):
            fh.write(",".join(str(v) for v in row) + "\n")


def write_scalar_draws(path, columns: dict) -> None:
    """One row per retained draw; columns are equal-length scalar vectors."""
    names = list(columns)
    arrays = [np.asarray(columns[c]) for c in names]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["draw"] + names)
        for s in range(arrays[0].shape[0]):
            writer.writerow([s] + [repr(float(a[s])) for a in arrays])


def write_latent_draws(path, draws) -> None:
    """Long-format latent draws: draw, entity, dim, value."""
    draws = np.asarray(draws)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["draw", "entity", "dim", "value"])
        for s in range(draws.shape[0]):
            for e in range(draws.shape[1]):
                for dim in range(draws.shape[2]):
                    writer.writerow([s, e, dim + 1, repr(float(draws[s, e, dim]))])


def write_summary(path, summary: dict) -> None:
    """Structured key-value report, one ``key = value`` line per entry."""
    with open(path, "w") as fh:
        for key, value in summary.items():
            if isinstance(value, float):
                fh.write(f"{key} = {value:.6g}\n")
            else:
                fh.write(f"{key} = {value}\n")


def read_summary(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            if "=" not in line:
                continue
            key, value = line.split("=", 1)
            value = value.strip()
            try:
                out[key.strip()] = float(value)
            except ValueError:
                out[key.strip()] = value
    return out


def write_error_record(out_dir, code: int, exc: BaseException) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    record = {"exit_code": code, "error": type(exc).__name__, "message": str(exc)}
    with open(out_dir / "error.json", "w") as fh:
        json.dump(record, fh, indent=2)
