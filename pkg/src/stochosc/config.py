"""Run manifests: config-document parsing and figure-reproduction presets.

Config documents are line-oriented ``key = value`` text with ``#``
comments.  Unknown keys are rejected, every omitted key takes the
standard-run default, and an empty document therefore reproduces the
canonical two-model comparison run (the ``fig1`` preset).

``model = both`` expands into two runs (constant and ground-overlap
rate) inside one manifest; squeezed presets expand into an X-squeezed
and a P-squeezed run.  Each run of a multi-run manifest gets its own
seed derived from the manifest master seed, and the per-run config echo
written next to the outputs is a complete single-run document that
reproduces that run bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError, ParseError
from .gaussian import GaussianState
from .jumps import CONSTANT, GROUND_OVERLAP

__all__ = [
    "FORMAT_VERSION",
    "RunSpec",
    "RunManifest",
    "parse_config",
    "preset",
    "preset_names",
    "preset_description",
    "format_run_config",
    "apply_overrides",
]

FORMAT_VERSION = 1

MODEL_BOTH = "both"
OUTPUT_KINDS = ("observables", "jumps", "wigner", "fock", "coherence")

_MODEL_LABELS = {CONSTANT: "constant", GROUND_OVERLAP: "overlap"}


@dataclass(frozen=True)
class RunSpec:
    """One concrete ensemble run inside a manifest."""

    label: str
    config: "SimulationConfig"  # noqa: F821  (import below avoids a cycle)


@dataclass(frozen=True)
class RunManifest:
    """Validated description of what to simulate and what to write."""

    runs: tuple
    outputs: tuple
    output_dir: str
    format_version: int
    master_seed: int
    wigner_times: tuple
    fock_times: tuple
    fock_n_max: int
    fock_basis_omega: float
    grid_x: tuple  # (min, max, points)
    grid_p: tuple
    jump_bin_width: float

    def x_axis(self) -> np.ndarray:
        lo, hi, n = self.grid_x
        return np.linspace(lo, hi, int(n))

    def p_axis(self) -> np.ndarray:
        lo, hi, n = self.grid_p
        return np.linspace(lo, hi, int(n))


def _parse_float(text):
    return float(text)


def _parse_int(text):
    value = int(text, 0)
    return value


def _parse_str(text):
    return text


def _parse_float_list(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(float(part.strip()) for part in text.split(","))


def _parse_str_list(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(part.strip() for part in text.split(","))


# key -> (parser, default); defaults are the canonical paper-style run
_KEYS = {
    "omega1": (_parse_float, 0.7),
    "omega2": (_parse_float, 1.2),
    "mass": (_parse_float, 1.0),
    "hbar": (_parse_float, 1.0),
    "nu": (_parse_float, 0.8),
    "model": (_parse_str, MODEL_BOTH),
    "initial_mean_x": (_parse_float, 2.0),
    "initial_mean_p": (_parse_float, 0.0),
    "initial_var_x": (_parse_float, 0.5),
    "initial_var_p": (_parse_float, 0.5),
    "initial_cov_xp": (_parse_float, 0.0),
    "initial_level": (_parse_int, 1),
    "t_final": (_parse_float, 30.0),
    "dt": (_parse_float, 0.01),
    "sample_stride": (_parse_int, 10),
    "n_trajectories": (_parse_int, 30000),
    "master_seed": (_parse_int, 123456789),
    "outputs": (_parse_str_list, ("observables",)),
    "output_dir": (_parse_str, "out"),
    "wigner_times": (_parse_float_list, ()),
    "fock_times": (_parse_float_list, ()),
    "fock_n_max": (_parse_int, 40),
    "fock_basis_omega": (_parse_float, None),  # defaults to omega1
    "grid_x_min": (_parse_float, -12.0),
    "grid_x_max": (_parse_float, 12.0),
    "grid_x_points": (_parse_int, 241),
    "grid_p_min": (_parse_float, -12.0),
    "grid_p_max": (_parse_float, 12.0),
    "grid_p_points": (_parse_int, 241),
    "jump_bin_width": (_parse_float, 0.2),
}


def parse_config(text: str) -> RunManifest:
    """Parse and validate a config document; errors name line and key."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=lineno)
        key, _, rest = line.partition("=")
        key = key.strip()
        value_text = rest.strip()
        if key not in _KEYS:
            raise ParseError("unknown key", line=lineno, key=key)
        if key in values:
            raise ParseError("duplicate key", line=lineno, key=key)
        parser, _ = _KEYS[key]
        try:
            values[key] = parser(value_text)
        except ValueError:
            raise ParseError(f"cannot parse value {value_text!r}", line=lineno, key=key) from None
    return build_manifest(values)


def _derived_seed(master_seed: int, index: int) -> int:
    seq = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(seq.generate_state(1, np.uint64)[0])


def _seed_runs(pairs, master_seed):
    """(label, config) pairs -> RunSpecs; multi-run manifests get derived seeds."""
    if len(pairs) == 1:
        label, config = pairs[0]
        return (RunSpec(label, replace(config, master_seed=master_seed)),)
    return tuple(
        RunSpec(label, replace(config, master_seed=_derived_seed(master_seed, i)))
        for i, (label, config) in enumerate(pairs)
    )


def build_manifest(values: dict, run_overrides=None) -> RunManifest:
    """Fill defaults, cross-validate, and expand the model axis into runs.

    ``run_overrides`` lets presets substitute their own (label,
    initial-state, model) matrix while reusing all shared validation.
    """
    from .ensemble import SimulationConfig  # deferred: ensemble imports phasespace

    merged = {key: values.get(key, default) for key, (_, default) in _KEYS.items()}
    for key in values:
        if key not in _KEYS:
            raise ParseError("unknown key", key=key)

    model = merged["model"]
    if model not in (CONSTANT, GROUND_OVERLAP, MODEL_BOTH):
        raise ParseError(
            f"model must be one of {CONSTANT!r}, {GROUND_OVERLAP!r}, {MODEL_BOTH!r}",
            key="model",
        )
    for name in merged["outputs"]:
        if name not in OUTPUT_KINDS:
            raise ParseError(f"unknown output {name!r}; expected any of {OUTPUT_KINDS}", key="outputs")
    if merged["nu"] * merged["dt"] > 0.1:
        raise ParseError(
            f"nu*dt exceeds 0.1 (got {merged['nu'] * merged['dt']:.4g})", key="nu"
        )

    try:
        initial_state = GaussianState(
            mean_x=merged["initial_mean_x"],
            mean_p=merged["initial_mean_p"],
            var_x=merged["initial_var_x"],
            var_p=merged["initial_var_p"],
            cov_xp=merged["initial_cov_xp"],
        )
    except ParameterError as exc:
        raise ParseError(str(exc), key="initial_var_x") from None

    def make_config(kind, state):
        try:
            return SimulationConfig(
                omega1=merged["omega1"],
                omega2=merged["omega2"],
                mass=merged["mass"],
                hbar=merged["hbar"],
                nu=merged["nu"],
                model=kind,
                initial_state=state,
                initial_level=merged["initial_level"],
                t_final=merged["t_final"],
                dt=merged["dt"],
                sample_stride=merged["sample_stride"],
                n_trajectories=merged["n_trajectories"],
                master_seed=merged["master_seed"],
            )
        except ParameterError as exc:
            raise ParseError(str(exc)) from None

    if run_overrides is not None:
        pairs = [(label, make_config(kind, state)) for label, kind, state in run_overrides]
    elif model == MODEL_BOTH:
        pairs = [
            ("constant", make_config(CONSTANT, initial_state)),
            ("overlap", make_config(GROUND_OVERLAP, initial_state)),
        ]
    else:
        pairs = [("run", make_config(model, initial_state))]
    runs = _seed_runs(pairs, merged["master_seed"])

    sample_spacing = merged["dt"] * merged["sample_stride"]
    for key in ("wigner_times", "fock_times"):
        for t in merged[key]:
            if t < 0 or t > merged["t_final"]:
                raise ParseError(f"time {t} outside [0, t_final]", key=key)
            if abs(t / sample_spacing - round(t / sample_spacing)) > 1e-9:
                raise ParseError(
                    f"time {t} is not aligned to the sample spacing {sample_spacing}", key=key
                )
    if "wigner" in merged["outputs"] and not merged["wigner_times"]:
        raise ParseError("outputs include 'wigner' but wigner_times is empty", key="wigner_times")
    if "fock" in merged["outputs"] and not merged["fock_times"]:
        raise ParseError("outputs include 'fock' but fock_times is empty", key="fock_times")
    if merged["fock_n_max"] < 0:
        raise ParseError("fock_n_max must be nonnegative", key="fock_n_max")
    for axis in ("x", "p"):
        lo, hi, n = merged[f"grid_{axis}_min"], merged[f"grid_{axis}_max"], merged[f"grid_{axis}_points"]
        if not (hi > lo and n >= 2):
            raise ParseError(f"grid_{axis} must satisfy max > min and points >= 2", key=f"grid_{axis}_min")
    if merged["jump_bin_width"] <= 0:
        raise ParseError("jump_bin_width must be positive", key="jump_bin_width")

    return RunManifest(
        runs=runs,
        outputs=tuple(merged["outputs"]),
        output_dir=merged["output_dir"],
        format_version=FORMAT_VERSION,
        master_seed=merged["master_seed"],
        wigner_times=tuple(merged["wigner_times"]),
        fock_times=tuple(merged["fock_times"]),
        fock_n_max=merged["fock_n_max"],
        fock_basis_omega=(
            merged["fock_basis_omega"] if merged["fock_basis_omega"] is not None else merged["omega1"]
        ),
        grid_x=(merged["grid_x_min"], merged["grid_x_max"], merged["grid_x_points"]),
        grid_p=(merged["grid_p_min"], merged["grid_p_max"], merged["grid_p_points"]),
        jump_bin_width=merged["jump_bin_width"],
    )


def _squeezed_states():
    base = dict(mean_x=2.0, mean_p=0.0, cov_xp=0.0)
    x_sq = GaussianState(var_x=0.25, var_p=1.0, **base)
    p_sq = GaussianState(var_x=1.0, var_p=0.25, **base)
    return x_sq, p_sq


def _squeezed_manifest(values):
    x_sq, p_sq = _squeezed_states()
    overrides = [
        ("x_squeezed", GROUND_OVERLAP, x_sq),
        ("p_squeezed", GROUND_OVERLAP, p_sq),
    ]
    return build_manifest(values, run_overrides=overrides)


_PRESET_BUILDERS = {}
_PRESET_DOCS = {
    "fig1": "ensemble energy vs time, constant vs ground-overlap jump model",
    "fig2": "histogram of packet positions at 1->2 jumps, both models",
    "fig3": "histogram of packet positions at 2->1 jumps, both models",
    "fig4": "ensemble mean position vs time, both models",
    "fig5": "ensemble mean momentum vs time, both models",
    "fig6": "ensemble position variance vs time, both models",
    "fig7": "x-coherence decay vs time, both models",
    "fig8": "number-basis diagonal at t=30 (basis omega1), both models",
    "fig9": "ensemble Wigner function at four times, ground-overlap model",
    "fig10": "ensemble Wigner function at t=30, ground-overlap model",
    "fig11": "ensemble energy vs time for X- and P-squeezed initial states",
    "fig12": "jump-position histograms for squeezed initial states",
    "fig13": "ensemble mean position vs time for squeezed initial states",
    "fig14": "ensemble position variance vs time for squeezed initial states",
    "fig15": "x-coherence decay vs time for squeezed initial states",
}


def _register_presets():
    for name in ("fig1", "fig4", "fig5", "fig6"):
        _PRESET_BUILDERS[name] = lambda: build_manifest({})
    for name in ("fig2", "fig3"):
        _PRESET_BUILDERS[name] = lambda: build_manifest({"outputs": ("observables", "jumps")})
    _PRESET_BUILDERS["fig7"] = lambda: build_manifest({"outputs": ("observables", "coherence")})
    _PRESET_BUILDERS["fig8"] = lambda: build_manifest(
        {"outputs": ("fock",), "fock_times": (30.0,)}
    )
    _PRESET_BUILDERS["fig9"] = lambda: build_manifest(
        {"model": GROUND_OVERLAP, "outputs": ("wigner",), "wigner_times": (0.0, 2.0, 8.0, 30.0)}
    )
    _PRESET_BUILDERS["fig10"] = lambda: build_manifest(
        {"model": GROUND_OVERLAP, "outputs": ("wigner",), "wigner_times": (30.0,)}
    )
    for name in ("fig11", "fig13", "fig14"):
        _PRESET_BUILDERS[name] = lambda: _squeezed_manifest({})
    _PRESET_BUILDERS["fig12"] = lambda: _squeezed_manifest({"outputs": ("observables", "jumps")})
    _PRESET_BUILDERS["fig15"] = lambda: _squeezed_manifest({"outputs": ("observables", "coherence")})


_register_presets()


def preset_names() -> tuple:
    return tuple(sorted(_PRESET_BUILDERS, key=lambda s: int(s[3:])))


def preset_description(name: str) -> str:
    return _PRESET_DOCS[name]


def preset(name: str) -> RunManifest:
    """Manifest reproducing one of the named standard runs."""
    try:
        builder = _PRESET_BUILDERS[name]
    except KeyError:
        raise ParameterError(
            f"unknown preset {name!r}; valid presets: {', '.join(preset_names())}"
        ) from None
    return builder()


def apply_overrides(
    manifest: RunManifest,
    seed: int | None = None,
    dt: float | None = None,
    n_trajectories: int | None = None,
    output_dir: str | None = None,
) -> RunManifest:
    """Rebuild a manifest with CLI-level overrides, re-deriving run seeds."""
    master = manifest.master_seed if seed is None else seed
    config_changes = {}
    if dt is not None:
        config_changes["dt"] = dt
    if n_trajectories is not None:
        config_changes["n_trajectories"] = n_trajectories
    pairs = [(run.label, replace(run.config, **config_changes)) for run in manifest.runs]
    runs = _seed_runs(pairs, master)
    return replace(
        manifest,
        runs=runs,
        master_seed=master,
        output_dir=manifest.output_dir if output_dir is None else output_dir,
    )


def format_run_config(manifest: RunManifest, run: RunSpec) -> str:
    """Re-parseable echo of one run's complete effective configuration."""
    cfg = run.config
    lines = [
        f"# format_version={manifest.format_version}",
        f"# master_seed={cfg.master_seed}",
        f"# effective configuration for run '{run.label}'",
        f"omega1 = {cfg.omega1!r}",
        f"omega2 = {cfg.omega2!r}",
        f"mass = {cfg.mass!r}",
        f"hbar = {cfg.hbar!r}",
        f"nu = {cfg.nu!r}",
        f"model = {cfg.model}",
        f"initial_mean_x = {cfg.initial_state.mean_x!r}",
        f"initial_mean_p = {cfg.initial_state.mean_p!r}",
        f"initial_var_x = {cfg.initial_state.var_x!r}",
        f"initial_var_p = {cfg.initial_state.var_p!r}",
        f"initial_cov_xp = {cfg.initial_state.cov_xp!r}",
        f"initial_level = {cfg.initial_level}",
        f"t_final = {cfg.t_final!r}",
        f"dt = {cfg.dt!r}",
        f"sample_stride = {cfg.sample_stride}",
        f"n_trajectories = {cfg.n_trajectories}",
        f"master_seed = {cfg.master_seed}",
        f"outputs = {', '.join(manifest.outputs)}",
        f"output_dir = {manifest.output_dir}",
        f"wigner_times = {', '.join(repr(t) for t in manifest.wigner_times)}",
        f"fock_times = {', '.join(repr(t) for t in manifest.fock_times)}",
        f"fock_n_max = {manifest.fock_n_max}",
        f"fock_basis_omega = {manifest.fock_basis_omega!r}",
        f"grid_x_min = {manifest.grid_x[0]!r}",
        f"grid_x_max = {manifest.grid_x[1]!r}",
        f"grid_x_points = {manifest.grid_x[2]}",
        f"grid_p_min = {manifest.grid_p[0]!r}",
        f"grid_p_max = {manifest.grid_p[1]!r}",
        f"grid_p_points = {manifest.grid_p[2]}",
        f"jump_bin_width = {manifest.jump_bin_width!r}",
    ]
    return "\n".join(lines) + "\n"
