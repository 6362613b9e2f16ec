"""Config-driven experiment runner shared by the command line tool.

A config is one JSON document describing a single experiment.  Parsing turns
it into an :class:`ExperimentConfig`; every field error is reported as
:class:`ConfigInvalid` carrying the dotted path of the offending field.
Outputs are CSV (and JSON for cycle analysis) written with a fixed float
format so that reruns of the same config are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, rng
from .effective import (
    exact_cycle_hamiltonian,
    magnus_first_order,
    ps_decompose,
    ps_fidelity_bounds,
)
from .errors import ConfigInvalid, InsufficientPoints, PointerStateError
from .linalg import SZ
from .model import (
    CouplingEnsembleSpec,
    build_H0,
    coupling_strength_A,
    initial_state,
    normalized_state,
    sample_couplings,
)
from .propagate import Trajectory, cycle_propagator, run_stroboscopic, trajectory_stats
from .pulses import (
    BELL,
    PulseErrorModel,
    PulseSequence,
    Segment,
    apply_pulse_errors,
    epr_cycle,
    epr_pointer_basis,
    named_qubit_cycle,
    pauli_error,
    uhrig_cycle,
)
from .semiclassical import (
    ESRPulseErrorSpec,
    RandomFieldSpec,
    dominant_axis,
    ensemble_average,
    esr_effective_cycle,
    esr_sample_errors,
    pauli_components,
)

KINDS = ("trajectory", "sweep", "semiclassical", "esr", "analyze-cycle")
QUBIT_CYCLES = ("free", "ZZ", "XYXY", "XZXZ")
BELL_CYCLES = ("E1", "E2", "E3")
DEFAULT_LOG_COUNT = 60
FLOAT_FMT = ".17g"

_S2 = 1 / math.sqrt(2)
QUBIT_STATES = {
    "0": (1, 0),
    "1": (0, 1),
    "+Z": (1, 0),
    "-Z": (0, 1),
    "+X": (_S2, _S2),
    "-X": (_S2, -_S2),
    "+Y": (_S2, 1j * _S2),
    "-Y": (_S2, -1j * _S2),
}


def named_state(name: str, n_qubits: int) -> np.ndarray:
    """Named system states: qubit labels, computational strings, ``EPR0``..``EPR3``."""
    if n_qubits == 1 and name in QUBIT_STATES:
        return np.array(QUBIT_STATES[name], dtype=complex)
    if n_qubits == 2 and name.startswith("EPR") and name[3:] in ("0", "1", "2", "3"):
        return BELL[int(name[3:])].copy()
    if len(name) == n_qubits and set(name) <= {"0", "1"}:
        v = np.zeros(2**n_qubits, dtype=complex)
        v[int(name, 2)] = 1
        return v
    raise KeyError(name)


# -- schedules and fitting -----------------------------------------------------


def log_schedule(N_max: int, count: int = DEFAULT_LOG_COUNT) -> np.ndarray:
    """``0`` followed by roughly log-spaced cycle counts ending at ``N_max``."""
    if N_max < 0 or count < 1:
        raise ValueError("N_max must be nonnegative and count positive")
    if N_max == 0 or count == 1:
        return np.array([N_max], dtype=np.int64) if N_max == 0 else np.array([0, N_max])
    pts = np.round(np.logspace(0, math.log10(N_max), count - 1)).astype(np.int64)
    return np.unique(np.concatenate(([0], pts, [N_max])))


def plateau_schedule(N_max: int, count: int = 40) -> np.ndarray:
    """Log-spaced early samples plus a uniform grid over the second half."""
    early = log_schedule(N_max // 2, count // 2) if N_max >= 2 else np.array([0])
    late = np.linspace(N_max // 2, N_max, count - count // 2).round().astype(np.int64)
    return np.unique(np.concatenate((early, late)))


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    c: float  # intercept of the natural-log fit
    r2: float
    n_points: int

    @property
    def prefactor(self) -> float:
        return math.exp(self.c)


def power_law_fit(x, y) -> PowerLawFit:
    """Least squares fit of ``log y = alpha log x + c``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if ok.sum() < 4:
        raise InsufficientPoints("a power-law fit needs at least 4 positive points")
    lx, ly = np.log(x[ok]), np.log(y[ok])
    alpha, c = np.polyfit(lx, ly, 1)
    resid = ly - (alpha * lx + c)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(alpha), float(c), r2, int(ok.sum()))


# -- config parsing ------------------------------------------------------------


@dataclass(frozen=True)
class StateSpec:
    label: str
    vector: np.ndarray


@dataclass(frozen=True)
class SequenceSpec:
    name: str
    tau: float
    uhrig: int | None = None
    eta: float = 0.0
    error_axis: tuple[float, float, float] | None = None
    error_labels: tuple[str, ...] | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    raw: dict
    model: CouplingEnsembleSpec | None = None
    field_spec: RandomFieldSpec | None = None
    sequence: SequenceSpec | None = None
    states: tuple[StateSpec, ...] = ()
    schedule: tuple[int, ...] = (0,)
    seeds: tuple[int, ...] = (0,)
    sweep: dict = field(default_factory=dict)
    esr: dict = field(default_factory=dict)
    pointer: dict = field(default_factory=dict)
    method: str = "iterate"
    output: str = "out"

    @property
    def config_hash(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode()).hexdigest()


def _get(d: dict, key: str, path: str, kind=None, default=..., check=None):
    if key not in d:
        if default is ...:
            raise ConfigInvalid(f"{path}.{key}" if path else key, "missing required field")
        return default
    v = d[key]
    p = f"{path}.{key}" if path else key
    if kind is not None and not isinstance(v, kind) or isinstance(v, bool) and kind is not bool:
        raise ConfigInvalid(p, f"expected {getattr(kind, '__name__', kind)}")
    if check is not None and not check(v):
        raise ConfigInvalid(p, "value out of range")
    return v


_NUM = (int, float)


def _parse_model(d, path) -> CouplingEnsembleSpec:
    if not isinstance(d, dict):
        raise ConfigInvalid(path, "expected an object")
    K = _get(d, "K", path, _NUM + (type(None),), None)
    n_q = _get(d, "n_qubits", path, int, 1, lambda v: v in (1, 2))
    n_B = _get(d, "n_B", path, int, 1, lambda v: 1 <= v and n_q + v <= 11)
    return CouplingEnsembleSpec(
        J_cap=float(_get(d, "J_cap", path, _NUM, 1.0, lambda v: v >= 0)),
        beta_cap=float(_get(d, "beta_cap", path, _NUM, 0.0, lambda v: v >= 0)),
        K=None if K is None else float(K),
        n_qubits=n_q,
        n_B=n_B,
        seed=_get(d, "seed", path, int, 0, lambda v: v >= 0),
    )


def _parse_sequence(d, path, n_qubits) -> SequenceSpec:
    if not isinstance(d, dict):
        raise ConfigInvalid(path, "expected an object")
    name = _get(d, "name", path, str)
    allowed = QUBIT_CYCLES if n_qubits == 1 else BELL_CYCLES + ("free",)
    if name not in allowed:
        raise ConfigInvalid(f"{path}.name", f"unknown sequence {name!r} for {n_qubits} qubit(s)")
    tau = float(_get(d, "tau", path, _NUM, check=lambda v: v > 0))
    uhrig = _get(d, "uhrig", path, int, None, lambda v: v >= 1)
    if uhrig is not None and name != "ZZ":
        raise ConfigInvalid(f"{path}.uhrig", "Uhrig timing is only available for ZZ")
    err = d.get("errors")
    eta, axis, labels = 0.0, None, None
    if err is not None:
        ep = f"{path}.errors"
        if not isinstance(err, dict):
            raise ConfigInvalid(ep, "expected an object")
        eta = float(_get(err, "eta", ep, _NUM, check=lambda v: v >= 0))
        ax = _get(err, "axis", ep, list, None, lambda v: len(v) == 3)
        if ax is not None:
            if not all(isinstance(a, _NUM) and not isinstance(a, bool) for a in ax):
                raise ConfigInvalid(f"{ep}.axis", "expected three numbers")
            axis = tuple(float(a) for a in ax)
        lb = _get(err, "labels", ep, list, None, lambda v: len(v) > 0)
        if lb is not None:
            if not all(isinstance(s, str) for s in lb):
                raise ConfigInvalid(f"{ep}.labels", "expected a list of pulse labels")
            labels = tuple(lb)
    return SequenceSpec(name, tau, uhrig, eta, axis, labels)


def _parse_amplitude(v, p):
    if isinstance(v, bool):
        raise ConfigInvalid(p, "expected a number or [re, im]")
    if isinstance(v, _NUM):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(a, _NUM) for a in v):
        return complex(v[0], v[1])
    raise ConfigInvalid(p, "expected a number or [re, im]")


def _parse_states(lst, path, n_qubits) -> tuple[StateSpec, ...]:
    if not isinstance(lst, list) or not lst:
        raise ConfigInvalid(path, "expected a nonempty list")
    out = []
    for i, s in enumerate(lst):
        p = f"{path}[{i}]"
        if isinstance(s, str):
            try:
                out.append(StateSpec(s, named_state(s, n_qubits)))
            except KeyError:
                raise ConfigInvalid(p, f"unknown state name {s!r}") from None
        elif isinstance(s, dict):
            label = _get(s, "label", p, str)
            amps = _get(s, "amplitudes", p, list)
            if len(amps) != 2**n_qubits:
                raise ConfigInvalid(f"{p}.amplitudes", f"expected {2**n_qubits} entries")
            vec = [_parse_amplitude(a, f"{p}.amplitudes[{k}]") for k, a in enumerate(amps)]
            try:
                out.append(StateSpec(label, normalized_state(vec)))
            except PointerStateError as e:
                raise ConfigInvalid(f"{p}.amplitudes", str(e)) from None
        else:
            raise ConfigInvalid(p, "expected a state name or an object")
    labels = [s.label for s in out]
    if len(set(labels)) != len(labels):
        raise ConfigInvalid(path, "state labels must be unique")
    return tuple(out)


def _parse_schedule(d, path) -> tuple[int, ...]:
    if d is None:
        return tuple(int(n) for n in log_schedule(1000))
    if not isinstance(d, dict):
        raise ConfigInvalid(path, "expected an object")
    if "explicit" in d:
        lst = _get(d, "explicit", path, list, check=lambda v: len(v) > 0)
        if not all(isinstance(n, int) and not isinstance(n, bool) and n >= 0 for n in lst):
            raise ConfigInvalid(f"{path}.explicit", "expected nonnegative integers")
        if any(b <= a for a, b in zip(lst, lst[1:])):
            raise ConfigInvalid(f"{path}.explicit", "must be strictly increasing")
        return tuple(lst)
    N_max = _get(d, "N_max", path, int, check=lambda v: v >= 0)
    count = _get(d, "count", path, int, DEFAULT_LOG_COUNT, lambda v: v >= 1)
    return tuple(int(n) for n in log_schedule(N_max, count))


def _parse_int_list(d, key, path, default, check=lambda v: True):
    v = d.get(key, default)
    p = f"{path}.{key}"
    if not isinstance(v, list) or not v:
        raise ConfigInvalid(p, "expected a nonempty list")
    if not all(isinstance(a, int) and not isinstance(a, bool) and check(a) for a in v):
        raise ConfigInvalid(p, "expected a list of valid integers")
    return v


def _parse_num_list(d, key, path, default, check=lambda v: True):
    v = d.get(key, default)
    p = f"{path}.{key}"
    if not isinstance(v, list) or not v:
        raise ConfigInvalid(p, "expected a nonempty list")
    if not all(isinstance(a, _NUM) and not isinstance(a, bool) and check(a) for a in v):
        raise ConfigInvalid(p, "expected a list of valid numbers")
    return [float(a) for a in v]


def parse_config(raw: dict, *, seed_override: int | None = None) -> ExperimentConfig:
    """Validate a config document.  ``seed_override`` replaces every seed."""
    if not isinstance(raw, dict):
        raise ConfigInvalid("$", "config must be a JSON object")
    raw = json.loads(json.dumps(raw))  # private deep copy
    if seed_override is not None:
        if not 0 <= seed_override < 2**64:
            raise ConfigInvalid("--seed", "seed must be an unsigned 64-bit integer")
        for key in ("model", "field", "esr"):
            if isinstance(raw.get(key), dict):
                raw[key]["seed"] = seed_override
        raw["seeds"] = [seed_override]
        if isinstance(raw.get("sweep"), dict) and "seeds" in raw["sweep"]:
            raw["sweep"]["seeds"] = [seed_override]

    kind = _get(raw, "kind", "", str)
    if kind not in KINDS:
        raise ConfigInvalid("kind", f"must be one of {', '.join(KINDS)}")
    output = _get(raw, "output", "", str, "out")
    method = _get(raw, "method", "", str, "iterate", lambda v: v in ("iterate", "spectral"))
    kw: dict = {"kind": kind, "raw": raw, "output": output, "method": method}

    if kind == "esr":
        d = _get(raw, "esr", "", dict)
        kw["esr"] = {
            "eps0": float(_get(d, "eps0", "esr", _NUM, check=lambda v: v >= 0)),
            "n0": float(_get(d, "n0", "esr", _NUM, check=lambda v: v >= 0)),
            "seed": _get(d, "seed", "esr", int, 0, lambda v: v >= 0),
            "n_draws": _get(d, "n_draws", "esr", int, 100, lambda v: v >= 1),
            "b_z": float(_get(d, "b_z", "esr", _NUM, 1.0)),
            "tau": float(_get(d, "tau", "esr", _NUM, check=lambda v: v > 0)),
            "names": tuple(
                _get(d, "names", "esr", list, ["XYXY", "XZXZ"],
                     lambda v: len(v) > 0 and all(n in ("XYXY", "XZXZ") for n in v))
            ),
        }
        return ExperimentConfig(**kw)

    if kind == "semiclassical":
        d = _get(raw, "field", "", dict)
        try:
            fs = RandomFieldSpec(
                distribution=_get(d, "distribution", "field", str, "isotropic-gaussian"),
                B=float(_get(d, "B", "field", _NUM, 1.0)),
                vector=tuple(float(a) for a in _get(d, "vector", "field", list, [0, 0, 0])),
                n_samples=_get(d, "n_samples", "field", int, 1000),
                seed=_get(d, "seed", "field", int, 0, lambda v: v >= 0),
                convention=_get(d, "convention", "field", str, "magnitude"),
            )
        except (ValueError, TypeError) as e:
            if isinstance(e, ConfigInvalid):
                raise
            raise ConfigInvalid("field", str(e)) from None
        kw["field_spec"] = fs
        kw["sequence"] = _parse_sequence(_get(raw, "sequence", "", dict), "sequence", 1)
        kw["states"] = _parse_states(raw.get("states", ["0"]), "states", 1)
        kw["schedule"] = _parse_schedule(raw.get("schedule"), "schedule")
        return ExperimentConfig(**kw)

    model = _parse_model(_get(raw, "model", "", dict), "model")
    kw["model"] = model
    kw["sequence"] = _parse_sequence(_get(raw, "sequence", "", dict), "sequence", model.n_qubits)
    kw["schedule"] = _parse_schedule(raw.get("schedule"), "schedule")
    kw["seeds"] = tuple(_parse_int_list(raw, "seeds", "", [model.seed], lambda v: v >= 0))
    if kind == "analyze-cycle":
        kw["pointer"] = _parse_pointer(raw.get("pointer"), "pointer", model, kw["sequence"])
        return ExperimentConfig(**kw)
    kw["states"] = _parse_states(_get(raw, "states", "", list), "states", model.n_qubits)
    if kind == "sweep":
        d = _get(raw, "sweep", "", dict)
        seq = kw["sequence"]
        kw["sweep"] = {
            "tau": _parse_num_list(d, "tau", "sweep", [seq.tau], lambda v: v > 0),
            "n_B": _parse_int_list(d, "n_B", "sweep", [model.n_B],
                                   lambda v: 1 <= v and model.n_qubits + v <= 11),
            "seeds": _parse_int_list(d, "seeds", "sweep", [model.seed], lambda v: v >= 0),
            "eta": _parse_num_list(d, "eta", "sweep", [seq.eta], lambda v: v >= 0),
            "abscissa": _get(d, "abscissa", "sweep", str, "tauA",
                             lambda v: v in ("tauA", "tauA_sqrt_nB")),
            "window_fraction": float(
                _get(d, "window_fraction", "sweep", _NUM, 0.5, lambda v: 0 < v <= 1)
            ),
        }
    return ExperimentConfig(**kw)


def _parse_pointer(d, path, model: CouplingEnsembleSpec, seq: SequenceSpec) -> dict:
    D_S = 2**model.n_qubits
    if d is None:
        if seq.name in BELL_CYCLES:
            basis, p = epr_pointer_basis(seq.name)
            return {"basis": basis, "p": p, "hamiltonian": "exact"}
        return {"basis": list(np.eye(D_S, dtype=complex)), "p": D_S, "hamiltonian": "exact"}
    if not isinstance(d, dict):
        raise ConfigInvalid(path, "expected an object")
    states = _parse_states(_get(d, "states", path, list), f"{path}.states", model.n_qubits)
    p = _get(d, "p", path, int, len(states), lambda v: 1 <= v <= len(states))
    ham = _get(d, "hamiltonian", path, str, "exact", lambda v: v in ("exact", "magnus"))
    return {"basis": [s.vector for s in states], "p": p, "hamiltonian": ham}


def load_config(path: str, *, seed_override: int | None = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise ConfigInvalid("--config", f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigInvalid("$", f"invalid JSON: {e}") from None
    return parse_config(raw, seed_override=seed_override)


# -- building blocks -----------------------------------------------------------


def build_sequence(spec: SequenceSpec, n_qubits: int, seed: int = 0) -> PulseSequence:
    """Cycle from a descriptor, with pulse errors applied when ``eta > 0``."""
    D_S = 2**n_qubits
    if spec.name == "free":
        seq = PulseSequence((Segment(spec.tau, np.eye(D_S, dtype=complex), None),), label="free")
    elif spec.name in BELL_CYCLES:
        seq = epr_cycle(spec.name, spec.tau)
    elif spec.uhrig is not None:
        seq = uhrig_cycle(SZ, spec.uhrig, spec.uhrig * spec.tau, label="Z")
    else:
        seq = named_qubit_cycle(spec.name, spec.tau)
    if spec.eta > 0:
        if n_qubits != 1:
            raise ConfigInvalid("sequence.errors", "pulse errors are defined for single qubits")
        axis = spec.error_axis
        if axis is None:
            axis = tuple(rng.stream(seed, "pulse-axis").uniform(-1, 1, 3))
        present = sorted({s.label for s in seq.segments if s.label is not None})
        labels = spec.error_labels or tuple(present)
        E = pauli_error(spec.eta, axis)
        seq = apply_pulse_errors(seq, PulseErrorModel({lb: E for lb in labels}))
    return seq


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), FLOAT_FMT)


def write_csv(path: str, header: list[str], columns: list[str], rows) -> None:
    lines = [f"# {h}" for h in header]
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _json_clean(v):
    if isinstance(v, dict):
        return {k: _json_clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_clean(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def _provenance(cfg: ExperimentConfig, **extra) -> list[str]:
    head = [
        f"pointerstates {__version__}",
        f"config_sha256 {cfg.config_hash}",
        f"kind {cfg.kind}",
    ]
    head += [f"{k} {v}" for k, v in extra.items()]
    return head


def _model_for(cfg: ExperimentConfig, seed: int, n_B: int | None = None):
    spec = cfg.model
    if n_B is not None:
        spec = CouplingEnsembleSpec(spec.J_cap, spec.beta_cap, spec.K, spec.n_qubits, n_B, seed)
    else:
        spec = CouplingEnsembleSpec(spec.J_cap, spec.beta_cap, spec.K, spec.n_qubits, spec.n_B, seed)
    return sample_couplings(spec)


def simulate(cfg: ExperimentConfig, seed: int, state: StateSpec, *, n_B=None, tau=None, eta=None):
    """One stroboscopic trajectory for a grid point; returns (trajectory, model)."""
    model = _model_for(cfg, seed, n_B)
    sspec = cfg.sequence
    if tau is not None or eta is not None:
        sspec = SequenceSpec(
            sspec.name,
            sspec.tau if tau is None else tau,
            sspec.uhrig,
            sspec.eta if eta is None else eta,
            sspec.error_axis,
            sspec.error_labels,
        )
    seq = build_sequence(sspec, model.n_qubits, seed)
    U = cycle_propagator(seq, build_H0(model))
    rho0 = initial_state(state.vector, model)
    meta = {"seed": seed, "sequence": seq.label, "tau": sspec.tau, "n_B": model.n_B}
    traj = run_stroboscopic(
        U, rho0, cfg.schedule, (model.dim_S, model.dim_B),
        state_label=state.label, T_c=seq.T_c, metadata=meta, method=cfg.method,
    )
    return traj, model


TRAJ_COLUMNS = ["cycle_index", "time", "fidelity", "purity"]


def _traj_rows(traj: Trajectory):
    return zip(traj.cycle_indices, traj.times, traj.fidelity, traj.purity)


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


def _trajectory_task(args):
    cfg, seed, state = args
    traj, _ = simulate(cfg, seed, state)
    return traj


def run_trajectories(cfg: ExperimentConfig, out_dir: str, workers: int = 1) -> list[str]:
    tasks = sorted(
        ((cfg, s, st) for s in cfg.seeds for st in cfg.states),
        key=lambda t: (t[1], t[2].label),
    )
    trajs = _map(_trajectory_task, tasks, workers)
    paths = []
    for (_, seed, state), traj in zip(tasks, trajs):
        name = f"trajectory_{_safe(state.label)}_seed{seed}.csv"
        path = os.path.join(out_dir, name)
        head = _provenance(
            cfg, seed=seed, state=state.label, sequence=traj.metadata["sequence"],
            tau=_fmt(traj.metadata["tau"]), n_B=traj.metadata["n_B"],
            columns="cycle_index [cycles], time [1/J_cap], fidelity, purity",
        )
        write_csv(path, head, TRAJ_COLUMNS, _traj_rows(traj))
        paths.append(path)
    return paths


def _safe(label: str) -> str:
    out = "".join(c if c.isalnum() else {"+": "p", "-": "m"}.get(c, "_") for c in label)
    return out or "state"


# -- sweeps --------------------------------------------------------------------


SWEEP_COLUMNS = [
    "tau", "n_B", "seed", "eta", "A", "x",
    "saturation_loss", "saturation_spread", "secular_slope",
]


def _sweep_task(args):
    cfg, tau, n_B, seed, eta = args
    traj, model = simulate(cfg, seed, cfg.states[0], n_B=n_B, tau=tau, eta=eta)
    st = trajectory_stats(traj, cfg.sweep["window_fraction"])
    A = coupling_strength_A(model, 0)
    x = tau * A
    if cfg.sweep["abscissa"] == "tauA_sqrt_nB":
        x *= math.sqrt(n_B)
    return (tau, n_B, seed, eta, A, x, 1 - st.saturation_mean, st.saturation_spread, st.secular_slope)


def sweep_and_fit(cfg: ExperimentConfig, workers: int = 1):
    """Saturation loss over the sweep grid and a power-law fit against the abscissa."""
    sw = cfg.sweep
    grid = sorted(
        (t, n, s, e) for t in sw["tau"] for n in sw["n_B"] for s in sw["seeds"] for e in sw["eta"]
    )
    if len(grid) < 4:
        raise InsufficientPoints("a sweep needs at least 4 grid points to fit")
    rows = _map(_sweep_task, [(cfg,) + g for g in grid], workers)
    fit = power_law_fit([r[5] for r in rows], [r[6] for r in rows])
    return rows, fit


def run_sweep(cfg: ExperimentConfig, out_dir: str, workers: int = 1) -> list[str]:
    rows, fit = sweep_and_fit(cfg, workers)
    csv_path = os.path.join(out_dir, "sweep.csv")
    head = _provenance(
        cfg, state=cfg.states[0].label, sequence=cfg.sequence.name,
        abscissa=cfg.sweep["abscissa"],
        columns="tau [1/J_cap], n_B, seed, eta, A [J_cap], x, saturation_loss, "
        "saturation_spread, secular_slope [1/time]",
    )
    write_csv(csv_path, head, SWEEP_COLUMNS, rows)
    fit_path = os.path.join(out_dir, "fit.json")
    report = {
        "config_sha256": cfg.config_hash,
        "model": "log(loss) = alpha * log(x) + c",
        "alpha": fit.alpha,
        "c": fit.c,
        "prefactor": fit.prefactor,
        "r2": fit.r2,
        "n_points": fit.n_points,
    }
    _write_json(fit_path, report)
    return [csv_path, fit_path]


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(_json_clean(obj), indent=2, sort_keys=True) + "\n")


# -- semiclassical, ESR and cycle analysis ------------------------------------


def run_semiclassical(cfg: ExperimentConfig, out_dir: str, workers: int = 1) -> list[str]:
    seq = build_sequence(cfg.sequence, 1, cfg.field_spec.seed)
    paths = []
    for state in cfg.states:
        traj = ensemble_average(cfg.field_spec, seq, cfg.schedule, state.vector, state.label)
        path = os.path.join(out_dir, f"semiclassical_{_safe(state.label)}_seed{cfg.field_spec.seed}.csv")
        head = _provenance(
            cfg, seed=cfg.field_spec.seed, state=state.label, sequence=seq.label,
            n_samples=cfg.field_spec.n_samples, convention=cfg.field_spec.convention,
            columns="cycle_index [cycles], time, fidelity, purity, loss_stderr",
        )
        rows = (
            (n, t, f, p, e)
            for (n, t, f, p), e in zip(_traj_rows(traj), traj.metadata["stderr"])
        )
        write_csv(path, head, TRAJ_COLUMNS + ["loss_stderr"], rows)
        paths.append(path)
    return paths


ESR_COLUMNS = [
    "draw", "sequence", "eps", "n_y", "n_z", "m_x", "m_z",
    "closed_x", "closed_y", "closed_z", "numeric_x", "numeric_y", "numeric_z", "dominant_axis",
]


def run_esr(cfg: ExperimentConfig, out_dir: str, workers: int = 1) -> list[str]:
    e = cfg.esr
    spec = ESRPulseErrorSpec(e["eps0"], e["n0"], e["seed"])
    draws = esr_sample_errors(spec, e["n_draws"])
    eps = np.atleast_1d(draws[0])
    axes = np.column_stack([np.atleast_1d(a) for a in draws[1:]])
    rows = []
    for name in e["names"]:
        for k in range(eps.size):
            ax = tuple(float(a) for a in axes[k])
            closed, numeric = esr_effective_cycle(name, float(eps[k]), ax, e["b_z"], e["tau"])
            rows.append(
                (k, name, eps[k], *ax, *pauli_components(closed), *pauli_components(numeric),
                 dominant_axis(numeric))
            )
    path = os.path.join(out_dir, "esr.csv")
    head = _provenance(
        cfg, seed=e["seed"], b_z=_fmt(e["b_z"]), tau=_fmt(e["tau"]),
        columns="Pauli components of the cycle Hamiltonian (closed form and numeric)",
    )
    write_csv(path, head, ESR_COLUMNS, rows)
    return [path]


def analyze_cycle(cfg: ExperimentConfig, seed: int) -> dict:
    model = _model_for(cfg, seed)
    seq = build_sequence(cfg.sequence, model.n_qubits, seed)
    H0 = build_H0(model)
    if cfg.pointer["hamiltonian"] == "magnus":
        H_c = magnus_first_order(seq, H0)
    else:
        H_c = exact_cycle_hamiltonian(cycle_propagator(seq, H0), seq.T_c)
    dims = (model.dim_S, model.dim_B)
    dec = ps_decompose(H_c, cfg.pointer["basis"], cfg.pointer["p"], dims)
    T_total = cfg.schedule[-1] * seq.T_c
    rep = ps_fidelity_bounds(dec, seq.T_c, T_total)
    return {
        "seed": seed,
        "sequence": seq.label,
        "T_c": seq.T_c,
        "T_total": T_total,
        "hamiltonian": cfg.pointer["hamiltonian"],
        "p": dec.p,
        "norm_H_c": dec.norm_H_c,
        "eps_norm": dec.eps_norm,
        "gap_Delta": dec.gap_Delta,
        "gap_Delta_0": dec.gap_Delta_0,
        "quantum_bound": rep.quantum_bound,
        "semiclassical_bound": rep.semiclassical_bound,
        "cond_B1": rep.cond_B1,
        "cond_B3": rep.cond_B3,
        "met_valid": rep.met_valid,
        "T_met": rep.T_met,
    }


def run_analyze(cfg: ExperimentConfig, out_dir: str, workers: int = 1) -> list[str]:
    paths = []
    for seed in cfg.seeds:
        report = {"config_sha256": cfg.config_hash, "version": __version__}
        report.update(analyze_cycle(cfg, seed))
        path = os.path.join(out_dir, f"analysis_seed{seed}.json")
        _write_json(path, report)
        paths.append(path)
    return paths


RUNNERS = {
    "trajectory": run_trajectories,
    "sweep": run_sweep,
    "semiclassical": run_semiclassical,
    "esr": run_esr,
    "analyze-cycle": run_analyze,
}


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None, workers: int = 1) -> list[str]:
    """Run ``cfg`` and write its result files; returns their paths."""
    out_dir = out_dir or cfg.output
    os.makedirs(out_dir, exist_ok=True)
    return RUNNERS[cfg.kind](cfg, out_dir, workers)


__all__ = [
    "ExperimentConfig",
    "PowerLawFit",
    "SequenceSpec",
    "StateSpec",
    "analyze_cycle",
    "build_sequence",
    "config_hash",
    "load_config",
    "log_schedule",
    "named_state",
    "parse_config",
    "plateau_schedule",
    "power_law_fit",
    "run_experiment",
    "simulate",
    "sweep_and_fit",
]
