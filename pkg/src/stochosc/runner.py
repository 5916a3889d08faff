"""Execute a run manifest: simulate every run and build its artifacts."""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import RunManifest
from .ensemble import EnsembleAccumulator, ObservableSeries, ensemble_observables, run_ensemble
from .gaussian import OscillatorParams
from .phasespace import FockMatrix, WignerGrid, ensemble_wigner, fock_density_matrix

__all__ = ["RunResult", "run_manifest"]


@dataclass
class RunResult:
    """Everything computed for one labelled run."""

    label: str
    accumulator: EnsembleAccumulator
    observables: ObservableSeries
    wigner: dict = field(default_factory=dict)  # time -> WignerGrid
    fock: dict = field(default_factory=dict)    # time -> FockMatrix


def run_manifest(manifest: RunManifest, n_threads: int = 1) -> dict:
    """Simulate all runs of a manifest; returns {label: RunResult}.

    Snapshots are collected only at the times some requested artifact
    actually needs, so observables-only manifests stay lean.
    """
    want_wigner = "wigner" in manifest.outputs
    want_fock = "fock" in manifest.outputs
    snapshot_times = sorted(
        set(manifest.wigner_times if want_wigner else ())
        | set(manifest.fock_times if want_fock else ())
    )

    results = {}
    for run in manifest.runs:
        acc = run_ensemble(run.config, snapshot_times=snapshot_times, n_threads=n_threads)
        result = RunResult(
            label=run.label,
            accumulator=acc,
            observables=ensemble_observables(acc),
        )
        snapshots_by_time = {snap.time: snap for snap in acc.snapshots.values()}
        if want_wigner:
            for t in manifest.wigner_times:
                result.wigner[t] = ensemble_wigner(
                    snapshots_by_time[t], manifest.x_axis(), manifest.p_axis()
                )
        if want_fock:
            basis = OscillatorParams(
                omega=manifest.fock_basis_omega,
                mass=run.config.mass,
                hbar=run.config.hbar,
            )
            for t in manifest.fock_times:
                result.fock[t] = fock_density_matrix(
                    snapshots_by_time[t], basis, manifest.fock_n_max
                )
        results[run.label] = result
    return results
