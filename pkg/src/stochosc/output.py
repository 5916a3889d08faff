"""Plain-text serialization of run artifacts.

Everything is CSV (or ``key = value`` sidecar metadata) so any plotting
tool can consume it.  Floats are written with 17 significant digits,
which round-trips IEEE doubles bit-exactly; every file starts with
comment lines carrying the format version and the seed that produced
it.  Grid files get a sidecar ``.meta`` recording the axes, the
normalization residual and any coverage warnings.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .config import FORMAT_VERSION, RunManifest, format_run_config
from .ensemble import jump_histogram
from .errors import ParameterError

__all__ = ["write_outputs", "ensure_writable_dir"]


def _fmt(value) -> str:
    return f"{float(value):.17g}"


def _header(seed: int) -> list:
    return [f"# format_version={FORMAT_VERSION}", f"# master_seed={seed}"]


def _write_lines(directory, name, lines, written):
    with open(os.path.join(directory, name), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    written.append(name)


def ensure_writable_dir(path: str):
    """Create the output directory and prove it is writable (preflight)."""
    os.makedirs(path, exist_ok=True)
    probe = tempfile.NamedTemporaryFile(dir=path, prefix=".writable", delete=True)
    probe.close()


def _series_table(seed, names, columns):
    lines = _header(seed)
    lines.append(",".join(names))
    for row in np.column_stack(columns):
        lines.append(",".join(_fmt(v) for v in row))
    return lines


def _write_observables(directory, manifest, results, written):
    multi = len(manifest.runs) > 1
    for run in manifest.runs:
        series = results[run.label].observables
        suffix = f"_{run.label}" if multi else ""
        _write_lines(
            directory,
            f"observables{suffix}.csv",
            _series_table(run.config.master_seed, series.COLUMNS, series.columns()),
            written,
        )
    if multi:
        # one combined table for paired-model / paired-state overlays
        names = ["time"]
        columns = [results[manifest.runs[0].label].observables.time]
        for run in manifest.runs:
            series = results[run.label].observables
            for name, col in zip(series.COLUMNS[1:], series.columns()[1:]):
                names.append(f"{name}_{run.label}")
                columns.append(col)
        _write_lines(
            directory,
            "observables.csv",
            _series_table(manifest.master_seed, names, columns),
            written,
        )


def _write_coherence(directory, manifest, results, written):
    multi = len(manifest.runs) > 1
    for run in manifest.runs:
        series = results[run.label].observables
        suffix = f"_{run.label}" if multi else ""
        _write_lines(
            directory,
            f"coherence{suffix}.csv",
            _series_table(
                run.config.master_seed, ("time", "coherence"), [series.time, series.coherence]
            ),
            written,
        )


def _shared_jump_edges(manifest, results, direction):
    """One bin grid per direction, shared across runs for overlay plots."""
    width = manifest.jump_bin_width
    attr = "jump_positions_12" if direction == "1to2" else "jump_positions_21"
    data = [getattr(results[r.label].accumulator, attr) for r in manifest.runs]
    data = [d for d in data if d.size]
    if not data:
        return np.array([-width, width])
    points = np.concatenate(data)
    lo = np.floor(points.min() / width) * width
    hi = np.ceil(points.max() / width) * width
    if hi <= lo:
        hi = lo + width
    n = int(round((hi - lo) / width))
    return lo + width * np.arange(n + 1)


def _write_jumps(directory, manifest, results, written):
    multi = len(manifest.runs) > 1
    for direction in ("1to2", "2to1"):
        edges = _shared_jump_edges(manifest, results, direction)
        for run in manifest.runs:
            counts, _ = jump_histogram(results[run.label].accumulator, direction, edges)
            suffix = f"_{run.label}" if multi else ""
            lines = _header(run.config.master_seed)
            lines.append("bin_left,bin_right,count")
            for left, right, count in zip(edges[:-1], edges[1:], counts):
                lines.append(f"{_fmt(left)},{_fmt(right)},{count}")
            _write_lines(directory, f"jumps_{direction}{suffix}.csv", lines, written)


def _time_tag(t: float) -> str:
    return f"{t:g}".replace(".", "p").replace("-", "m")


def _write_wigner(directory, manifest, results, written):
    multi = len(manifest.runs) > 1
    for run in manifest.runs:
        for t, grid in results[run.label].wigner.items():
            suffix = f"_{run.label}" if multi else ""
            stem = f"wigner_t{_time_tag(t)}{suffix}"
            lines = _header(run.config.master_seed)
            lines.append("x,p,w")
            for i, x in enumerate(grid.x_axis):
                for j, p in enumerate(grid.p_axis):
                    lines.append(f"{_fmt(x)},{_fmt(p)},{_fmt(grid.values[i, j])}")
            _write_lines(directory, stem + ".csv", lines, written)

            meta = _header(run.config.master_seed) + [
                f"time = {t!r}",
                f"x_min = {grid.x_axis[0]!r}",
                f"x_max = {grid.x_axis[-1]!r}",
                f"x_points = {grid.x_axis.size}",
                f"p_min = {grid.p_axis[0]!r}",
                f"p_max = {grid.p_axis[-1]!r}",
                f"p_points = {grid.p_axis.size}",
                f"normalization_residual = {_fmt(grid.normalization_residual)}",
                f"coverage_warnings = {'; '.join(grid.coverage_warnings)}",
            ]
            _write_lines(directory, stem + ".meta", meta, written)


def _write_fock(directory, manifest, results, written):
    multi = len(manifest.runs) > 1
    for run in manifest.runs:
        for t, fock in results[run.label].fock.items():
            suffix = f"_{run.label}" if multi else ""
            stem = f"fock_t{_time_tag(t)}{suffix}"
            lines = _header(run.config.master_seed)
            lines.append("row,col,re,im")
            n = fock.n_max + 1
            for i in range(n):
                for j in range(n):
                    v = fock.values[i, j]
                    lines.append(f"{i},{j},{_fmt(v.real)},{_fmt(v.imag)}")
            _write_lines(directory, stem + ".csv", lines, written)

            diag = fock.diagonal()
            with np.errstate(divide="ignore"):
                log_diag = np.log10(np.maximum(diag, 0.0))
            dlines = _header(run.config.master_seed)
            dlines.append("n,p,log10_p")
            for i in range(n):
                dlines.append(f"{i},{_fmt(diag[i])},{_fmt(log_diag[i])}")
            _write_lines(directory, f"fock_diag_t{_time_tag(t)}{suffix}.csv", dlines, written)

            meta = _header(run.config.master_seed) + [
                f"time = {t!r}",
                f"n_max = {fock.n_max}",
                f"basis_omega = {fock.basis_omega!r}",
                f"trace = {_fmt(fock.trace)}",
                f"leakage = {_fmt(fock.leakage)}",
            ]
            _write_lines(directory, stem + ".meta", meta, written)


_WRITERS = {
    "observables": _write_observables,
    "coherence": _write_coherence,
    "jumps": _write_jumps,
    "wigner": _write_wigner,
    "fock": _write_fock,
}


def write_outputs(manifest: RunManifest, results: dict) -> list:
    """Serialize all requested artifacts; returns the paths written."""
    for run in manifest.runs:
        if run.label not in results:
            raise ParameterError(f"results missing run {run.label!r}")
    directory = manifest.output_dir
    ensure_writable_dir(directory)
    written: list = []
    multi = len(manifest.runs) > 1
    for run in manifest.runs:
        name = f"config_{run.label}.txt" if multi else "config.txt"
        with open(os.path.join(directory, name), "w", encoding="utf-8") as fh:
            fh.write(format_run_config(manifest, run))
        written.append(name)
    for kind in manifest.outputs:
        _WRITERS[kind](directory, manifest, results, written)
    return [os.path.join(directory, name) for name in written]
