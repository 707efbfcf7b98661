"""JSON scenario files.

A scenario fixes the model, the initial ensemble, the integrator and the
output paths of one run. Complex numbers are ``[re, im]`` pairs and
matrices are row-major nested lists of them. Example::

    {
      "version": 1,
      "model": {"domain": {"kind": "I", "m": 2, "n": 2},
                "family_index": 0, "coupling": 1.0,
                "drift": {"a": [[[0, 0.5], [0, 0]], [[0, 0], [0, -0.5]]]}},
      "N": 20,
      "init": {"kind": "sample_bs", "seed": 7},
      "integration": {"dt": 0.01, "t_end": 50, "method": "rk4",
                      "retract_every": 1, "monitor_every": 100},
      "outputs": {"csv": "series.csv", "jsonl": "snapshots.jsonl"}
    }
"""
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from . import domains
from .domains import DomainSpec
from .dynamics import METHODS, IntegrationConfig
from .errors import BSDError
from .flows import EnsembleState, ModelSpec, frequency_drift
from .groups import GroupSpec, make_generator

SCENARIO_VERSION = 1
INIT_KINDS = ("sample_bs", "sample_interior", "explicit")


class ScenarioError(ValueError):
    """Validation failure; ``where`` is a dotted field path or a line/column location."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class InitSpec:
    kind: str
    seed: Optional[int] = None
    matrices: Optional[List[np.ndarray]] = None


@dataclass
class OutputSpec:
    csv: str
    jsonl: Optional[str] = None


@dataclass
class CheckSpec:
    tolerance: Optional[float] = None
    transports: int = 100
    seed: int = 0


@dataclass
class Scenario:
    model: ModelSpec
    N: int
    init: InitSpec
    integration: IntegrationConfig
    outputs: OutputSpec
    check: CheckSpec = field(default_factory=CheckSpec)
    version: int = SCENARIO_VERSION
    base_dir: Path = field(default=Path("."), compare=False)


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=np.complex128)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def decode_matrix(data, where: str) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(where, "matrix must be a nested list of [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[-1] != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ScenarioError(where, f"matrix must have shape rows x cols x 2, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ScenarioError(where, "matrix entries must be finite")
    return arr[..., 0] + 1j * arr[..., 1]


def _get(obj: Dict[str, Any], key: str, where: str, kind, default=...):
    if not isinstance(obj, dict):
        raise ScenarioError(where, "expected an object")
    if key not in obj:
        if default is ...:
            raise ScenarioError(f"{where}.{key}", "missing required field")
        return default
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ScenarioError(f"{where}.{key}", f"expected {getattr(kind, '__name__', kind)}, got {value!r}")
    return value


def _parse_domain(obj, where) -> DomainSpec:
    kind = _get(obj, "kind", where, str)
    if kind not in ("I", "II", "III"):
        raise ScenarioError(f"{where}.kind", f"must be one of I, II, III, got {kind!r}")
    m = _get(obj, "m", where, int, None)
    n = _get(obj, "n", where, int)
    if m is None:
        m = n
    min_n = 2 if kind == "II" else 1
    if n < min_n:
        raise ScenarioError(f"{where}.n", f"type {kind} needs n >= {min_n}, got {n}")
    if kind == "I" and m < n:
        raise ScenarioError(f"{where}.m", f"type I needs m >= n, got m={m}, n={n}")
    if kind != "I" and m != n:
        raise ScenarioError(f"{where}.m", f"type {kind} needs m == n, got m={m}, n={n}")
    return DomainSpec(kind, m, n)


def _parse_model(obj, where) -> ModelSpec:
    domain = _parse_domain(_get(obj, "domain", where, dict), f"{where}.domain")
    t = _get(obj, "family_index", where, int, 0)
    kappa = _get(obj, "coupling", where, float, 1.0)
    if not math.isfinite(kappa):
        raise ScenarioError(f"{where}.coupling", "must be finite")
    sub = domains.component_subdomain(domain, t) if 0 <= t <= domain.max_rank else None
    if sub is None:
        raise ScenarioError(f"{where}.family_index", f"no Kuramoto model at index {t} on {domain.label()}")
    drift_obj = _get(obj, "drift", where, dict, {})
    dwhere = f"{where}.drift"
    try:
        if "omega" in drift_obj:
            if sub.shape != (1, 1):
                raise ScenarioError(f"{dwhere}.omega", "scalar frequency needs a (1,1) working domain")
            drift = frequency_drift(_get(drift_obj, "omega", dwhere, float))
        else:
            a = decode_matrix(drift_obj["a"], f"{dwhere}.a") if "a" in drift_obj else None
            d = decode_matrix(drift_obj["d"], f"{dwhere}.d") if "d" in drift_obj else None
            drift = make_generator(GroupSpec.for_domain(sub), a, None, d)
        return ModelSpec(domain, t, kappa, drift)
    except ScenarioError:
        raise
    except BSDError as exc:
        raise ScenarioError(dwhere, str(exc)) from None


def _parse_init(obj, where, N, model: ModelSpec) -> InitSpec:
    kind = _get(obj, "kind", where, str)
    if kind not in INIT_KINDS:
        raise ScenarioError(f"{where}.kind", f"must be one of {', '.join(INIT_KINDS)}, got {kind!r}")
    if kind == "explicit":
        raw = _get(obj, "matrices", where, list)
        if len(raw) != N:
            raise ScenarioError(f"{where}.matrices", f"expected N = {N} matrices, got {len(raw)}")
        mats = [decode_matrix(m, f"{where}.matrices[{i}]") for i, m in enumerate(raw)]
        spec = model.working_domain
        for i, M in enumerate(mats):
            if M.shape != spec.shape:
                raise ScenarioError(f"{where}.matrices[{i}]", f"shape {M.shape} does not match {spec.label()}")
            if not domains.structure_check(spec, M, 1e-9):
                raise ScenarioError(f"{where}.matrices[{i}]", f"violates the {spec.label()} symmetry")
        return InitSpec(kind, None, mats)
    seed = _get(obj, "seed", where, int)
    if seed < 0:
        raise ScenarioError(f"{where}.seed", "must be non-negative")
    return InitSpec(kind, seed)


def _parse_integration(obj, where, workers: int) -> IntegrationConfig:
    dt = _get(obj, "dt", where, float)
    t_end = _get(obj, "t_end", where, float)
    method = _get(obj, "method", where, str, "rk4").lower()
    retract_every = _get(obj, "retract_every", where, int, 1)
    monitor_every = _get(obj, "monitor_every", where, int, 10)
    tolerances = _get(obj, "tolerances", where, dict, {})
    for key, value in tolerances.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
            raise ScenarioError(f"{where}.tolerances.{key}", "must be a positive number")
    for name, value, ok in (
        ("dt", dt, dt > 0 and math.isfinite(dt)),
        ("t_end", t_end, t_end > 0 and math.isfinite(t_end)),
        ("method", method, method in METHODS),
        ("retract_every", retract_every, retract_every >= 0),
        ("monitor_every", monitor_every, monitor_every >= 1),
    ):
        if not ok:
            raise ScenarioError(f"{where}.{name}", f"invalid value {value!r}")
    return IntegrationConfig(dt, t_end, method, retract_every, monitor_every,
                             {k: float(v) for k, v in tolerances.items()}, workers)


def parse_scenario(data, base_dir=".", workers: int = 1) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("<root>", "scenario must be a JSON object")
    version = _get(data, "version", "<root>", int)
    if version != SCENARIO_VERSION:
        raise ScenarioError("version", f"unsupported version {version} (expected {SCENARIO_VERSION})")
    model = _parse_model(_get(data, "model", "<root>", dict), "model")
    N = _get(data, "N", "<root>", int)
    if N < 1:
        raise ScenarioError("N", "must be >= 1")
    init = _parse_init(_get(data, "init", "<root>", dict), "init", N, model)
    integration = _parse_integration(_get(data, "integration", "<root>", dict), "integration", workers)
    out = _get(data, "outputs", "<root>", dict)
    outputs = OutputSpec(_get(out, "csv", "outputs", str), _get(out, "jsonl", "outputs", str, None))
    chk = _get(data, "check", "<root>", dict, {})
    tol = _get(chk, "tolerance", "check", float, None)
    if tol is not None and not tol >= 0:
        raise ScenarioError("check.tolerance", "must be non-negative")
    check = CheckSpec(tol, _get(chk, "transports", "check", int, 100), _get(chk, "seed", "check", int, 0))
    return Scenario(model, N, init, integration, outputs, check, version, Path(base_dir))


def load_scenario(path, workers: int = 1) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(str(path), f"cannot read scenario: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return parse_scenario(data, path.parent, workers)


def scenario_to_dict(sc: Scenario) -> dict:
    model = sc.model
    drift = {"a": encode_matrix(model.drift.a)}
    if model.drift.d is not None:
        drift["d"] = encode_matrix(model.drift.d)
    init: Dict[str, Any] = {"kind": sc.init.kind}
    if sc.init.kind == "explicit":
        init["matrices"] = [encode_matrix(M) for M in sc.init.matrices]
    else:
        init["seed"] = sc.init.seed
    cfg = sc.integration
    outputs = {"csv": sc.outputs.csv}
    if sc.outputs.jsonl is not None:
        outputs["jsonl"] = sc.outputs.jsonl
    check: Dict[str, Any] = {"transports": sc.check.transports, "seed": sc.check.seed}
    if sc.check.tolerance is not None:
        check["tolerance"] = sc.check.tolerance
    return {
        "version": sc.version,
        "model": {
            "domain": {"kind": model.domain.kind.value, "m": model.domain.m, "n": model.domain.n},
            "family_index": model.family_index,
            "coupling": model.coupling,
            "drift": drift,
        },
        "N": sc.N,
        "init": init,
        "integration": {
            "dt": cfg.dt,
            "t_end": cfg.t_end,
            "method": cfg.method,
            "retract_every": cfg.retract_every,
            "monitor_every": cfg.monitor_every,
            "tolerances": dict(cfg.tolerances),
        },
        "outputs": outputs,
        "check": check,
    }


def oscillator_seeds(seed: int, N: int) -> List[int]:
    """Independent per-oscillator seeds derived from one scenario seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(N, dtype=np.uint32)]


def initial_ensemble(sc: Scenario) -> EnsembleState:
    spec = sc.model.working_domain
    if sc.init.kind == "explicit":
        return EnsembleState(np.stack(sc.init.matrices))
    sampler = domains.sample_bs_boundary if sc.init.kind == "sample_bs" else domains.sample_interior
    return EnsembleState(np.stack([sampler(spec, s) for s in oscillator_seeds(sc.init.seed, sc.N)]))
