"""File formats: field snapshots, CSV outputs, run manifests.

Snapshot format (binary): the ASCII line ``SNAP1 name=<f> time=<t> nx=<n>
nz=<m>\\n`` followed by nx*nz little-endian float64 values in node order
(gid = ix * nz + iz, iz fastest, bottom to top).  A companion grid file
written once holds the node coordinates as two snapshots (x then z).
"""
from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

_MAGIC = b"SNAP1"


def write_snapshot(path, name: str, time: float, nx: int, nz: int,
                   values: np.ndarray) -> None:
    values = np.asarray(values, dtype="<f8")
    if values.size != nx * nz:
        raise ConfigurationError(
            f"snapshot {name}: {values.size} values for a {nx} x {nz} grid"
        )
    header = f"{_MAGIC.decode()} name={name} time={time:.17g} nx={nx} nz={nz}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode())
        fh.write(values.tobytes())


def read_snapshot(path):
    with open(path, "rb") as fh:
        header = fh.readline().decode()
        raw = fh.read()
    parts = header.split()
    if not parts or parts[0] != _MAGIC.decode():
        raise ConfigurationError(f"{path}: not a snapshot file")
    meta = dict(p.split("=", 1) for p in parts[1:])
    nx, nz = int(meta["nx"]), int(meta["nz"])
    n = nx * nz
    if len(raw) != 8 * n:
        raise ConfigurationError(f"{path}: payload size mismatch")
    values = np.frombuffer(raw, dtype="<f8", count=n)
    return meta["name"], float(meta["time"]), nx, nz, values


def write_grid_snapshot(path, mesh) -> None:
    """Node coordinates companion file: x field then z field."""
    hx = f"{_MAGIC.decode()} name=x time=0 nx={mesh.nnx} nz={mesh.nnz}\n"
    hz = f"{_MAGIC.decode()} name=z time=0 nx={mesh.nnx} nz={mesh.nnz}\n"
    with open(path, "wb") as fh:
        fh.write(hx.encode())
        fh.write(np.asarray(mesh.X, dtype="<f8").tobytes())
        fh.write(hz.encode())
        fh.write(np.asarray(mesh.Z, dtype="<f8").tobytes())


def read_grid_snapshot(path):
    with open(path, "rb") as fh:
        data = fh.read()
    nl = data.index(b"\n")
    header = data[:nl].decode().split()
    meta = dict(p.split("=", 1) for p in header[1:])
    nx, nz = int(meta["nx"]), int(meta["nz"])
    n = nx * nz
    x = np.frombuffer(data, dtype="<f8", count=n, offset=nl + 1)
    rest = data[nl + 1 + 8 * n:]
    nl2 = rest.index(b"\n")
    z = np.frombuffer(rest, dtype="<f8", count=n, offset=nl2 + 1)
    return nx, nz, x, z


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    cols = [np.asarray(c) for c in columns]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ConfigurationError("CSV columns must share one length")
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(c[i]) for c in cols) + "\n")


def write_matrix_csv(path, matrix: np.ndarray) -> None:
    m = np.asarray(matrix)
    with open(path, "w", newline="\n") as fh:
        for row in m:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, entries: dict, files: list[Path]) -> None:
    """Plain-text key/value manifest with SHA-256 checksums of outputs."""
    base = Path(path).parent
    with open(path, "w", newline="\n") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")
        for f in files:
            rel = Path(f).relative_to(base)
            fh.write(f"file.{rel} = {sha256_of(f)}\n")


def read_manifest(path):
    entries = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    return entries
