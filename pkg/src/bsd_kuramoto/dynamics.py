"""Time integration of the coupled and lifted flows.

The default integrator is classical fixed-step RK4 on the product of the
oscillator matrices, followed on Bergman-Shilov runs by a projection back
onto the boundary (symmetrize for types II/III, then take the polar
factor). Interior runs may use adaptive RK45 instead.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
from scipy.integrate import solve_ivp

from . import observables
from .cxmat import DEFAULT_TOL, adjoint, hermitian_part, polar_unitary_factor
from .domains import DomainKind, DomainSpec, boundary_ranks, bs_defect_batch
from .errors import (
    ConstraintViolation,
    DivergenceDetected,
    RankDeficient,
    ShapeMismatch,
    TooFarToRetract,
)
from .flows import EnsembleState, ModelSpec, coupled_rhs_array, rhs_kernel
from .groups import GroupElement, is_group_member, lie_element, mobius_batch


METHODS = ("rk4", "rk45")
RETRACT_RADIUS = 0.1


def _default_tolerances():
    return {"retract": DEFAULT_TOL, "rank": 1e-8, "membership": 1e-6, "rtol": 1e-10, "atol": 1e-12}


@dataclass(frozen=True)
class IntegrationConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    method: str = "rk4"
    retract_every: int = 1
    monitor_every: int = 10
    tolerances: Dict[str, float] = field(default_factory=_default_tolerances)
    workers: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.retract_every < 0:
            raise ValueError("retract_every must be >= 0")
        if self.monitor_every < 1:
            raise ValueError("monitor_every must be >= 1")
        tol = _default_tolerances()
        tol.update(self.tolerances)
        object.__setattr__(self, "tolerances", tol)

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))

    @property
    def step(self) -> float:
        """Step actually used: ``t_end`` divided into ``n_steps`` equal parts."""
        return self.t_end / self.n_steps


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    snapshots: List[EnsembleState] = field(default_factory=list)
    monitors: List[observables.ObservableRecord] = field(default_factory=list)

    def append(self, snap: EnsembleState, rec: observables.ObservableRecord):
        if self.times and snap.time <= self.times[-1]:
            raise ValueError("trajectory times must increase")
        self.times.append(snap.time)
        self.snapshots.append(snap)
        self.monitors.append(rec)

    @property
    def final(self) -> EnsembleState:
        return self.snapshots[-1]

    def max_tangency_drift(self) -> float:
        return max(rec.max_tangency_drift for rec in self.monitors)


def rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _symmetrize(kind: DomainKind, zs: np.ndarray) -> np.ndarray:
    if kind is DomainKind.TYPE_II:
        return 0.5 * (zs - np.swapaxes(zs, -1, -2))
    if kind is DomainKind.TYPE_III:
        return 0.5 * (zs + np.swapaxes(zs, -1, -2))
    return zs


def _partial_polar(zs: np.ndarray, keep: int, tol: float) -> np.ndarray:
    # z f(z^dagger z) with f = s^{-1/2} on the top `keep` eigenvalues, 0 below
    gram = hermitian_part(adjoint(zs) @ zs)
    w, U = np.linalg.eigh(gram)
    drop = w.shape[-1] - keep
    if np.min(w[..., drop]) <= tol:
        raise RankDeficient("retraction target rank exceeds the numerical rank")
    f = np.zeros_like(w)
    f[..., drop:] = 1.0 / np.sqrt(w[..., drop:])
    return zs @ ((U * f[..., None, :]) @ adjoint(U))


def _frob_exceeds(zs: np.ndarray, limit: float):
    """Indices-free test ``max_k ||zs[k]||_F > limit``; returns the norms only when needed.

    ``||z||_F <= sqrt(m n) max|z_ij|`` screens the common case with two
    array operations.
    """
    m, n = zs.shape[-2:]
    peak = np.abs(zs).max()
    if peak * math.sqrt(m * n) <= limit:
        return None
    norms = np.sqrt((zs.real**2 + zs.imag**2).sum(axis=(-2, -1)))
    return norms if not (norms.max() <= limit) else None


def retract_batch(spec: DomainSpec, zs: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Nearest structured Bergman-Shilov point for each matrix in ``zs``."""
    if spec.n == 1 and spec.m == 1:
        # the nearest unit complex number
        r = np.abs(zs)
        if r.min() <= tol:
            raise RankDeficient("cannot retract a zero matrix")
        out = zs / r
    else:
        sym = _symmetrize(spec.kind, zs)
        if spec.n == 1 or (spec.kind is DomainKind.TYPE_II and spec.n == 2):
            # polar factor in closed form: z / ||z||_2, and ||z||_2 = ||z||_F / sqrt(n) here
            norms = np.sqrt((sym.real**2 + sym.imag**2).sum(axis=(-2, -1)) / spec.n)
            if np.min(norms) <= tol:
                raise RankDeficient("cannot retract a zero matrix")
            out = _symmetrize(spec.kind, sym / norms[:, None, None])
        elif spec.kind is DomainKind.TYPE_II and spec.n % 2:
            out = _symmetrize(spec.kind, _partial_polar(sym, spec.n - 1, tol))
        else:
            out = _symmetrize(spec.kind, polar_unitary_factor(sym, tol))
    dist = _frob_exceeds(zs - out, RETRACT_RADIUS)
    if dist is not None:
        k = int(np.argmax(dist))
        raise TooFarToRetract(f"oscillator {k} is {dist[k]:.3e} from the boundary (limit {RETRACT_RADIUS})")
    return out


def retract_state(spec: DomainSpec, ens: EnsembleState, tol: float = DEFAULT_TOL) -> EnsembleState:
    return EnsembleState(retract_batch(spec, ens.oscillators, tol), ens.time)


def _is_boundary_run(spec: DomainSpec, zs: np.ndarray, tol: float = 1e-8) -> bool:
    return bool(np.all(bs_defect_batch(spec, zs) <= tol))


def _check_divergence(spec: DomainSpec, zs: np.ndarray, time: float):
    norms = _frob_exceeds(zs, 10.0 * math.sqrt(spec.n))
    if norms is not None:
        k = int(np.argmax(np.where(np.isfinite(norms), norms, np.inf)))
        raise DivergenceDetected(f"oscillator {k} left the domain at t={time:.6g}", time=time, index=k)


def _validate_init(model: ModelSpec, init: EnsembleState) -> np.ndarray:
    spec = model.working_domain
    zs = init.oscillators
    if zs.shape[1:] != spec.shape:
        raise ShapeMismatch(f"initial oscillators {zs.shape[1:]} do not match {spec.label()}")
    ranks = boundary_ranks(spec, zs, 1e-8)
    if np.any(ranks < 0):
        raise ValueError("initial oscillators lie outside the closed domain")
    return zs


def integrate_ensemble(model: ModelSpec, init: EnsembleState, cfg: IntegrationConfig) -> Trajectory:
    """Integrate the coupled system from ``init`` to ``init.time + cfg.t_end``."""
    spec = model.working_domain
    zs = _validate_init(model, init).copy()
    boundary = _is_boundary_run(spec, zs)
    a, d, kappa = model.drift.a, model.drift.d_block(), model.coupling
    rank_tol = cfg.tolerances["rank"]
    traj = Trajectory()

    def snap(t, y):
        traj.append(EnsembleState(y.copy(), t), observables.record(t, spec, y, kappa, rank_tol, boundary))

    t0 = init.time
    snap(t0, zs)
    if cfg.method == "rk45":
        _integrate_adaptive(model, zs, t0, cfg, snap)
        return traj

    f = rhs_kernel(a, d, kappa, cfg.workers)
    h = cfg.step
    n_steps = cfg.n_steps
    retract = boundary and cfg.retract_every > 0
    for k in range(1, n_steps + 1):
        zs = rk4_step(f, zs, h)
        t = t0 + k * h
        _check_divergence(spec, zs, t)
        if retract and k % cfg.retract_every == 0:
            zs = retract_batch(spec, zs, cfg.tolerances["retract"])
        if k % cfg.monitor_every == 0 or k == n_steps:
            snap(t, zs)
    return traj


def _integrate_adaptive(model, zs, t0, cfg, snap):
    spec = model.working_domain
    shape = zs.shape
    a, d, kappa = model.drift.a, model.drift.d_block(), model.coupling

    def f(_t, y):
        return coupled_rhs_array(y.reshape(shape), a, d, kappa).ravel()

    every = cfg.monitor_every * cfg.step
    n_out = max(1, int(math.floor(cfg.t_end / every + 1e-9)))
    t_eval = t0 + every * np.arange(1, n_out + 1)
    if t_eval[-1] < t0 + cfg.t_end - 1e-12:
        t_eval = np.append(t_eval, t0 + cfg.t_end)
    sol = solve_ivp(f, (t0, t0 + cfg.t_end), zs.ravel(), method="RK45", t_eval=t_eval,
                    rtol=cfg.tolerances["rtol"], atol=cfg.tolerances["atol"])
    if not sol.success:
        raise DivergenceDetected(f"adaptive integration failed: {sol.message}")
    for t, y in zip(sol.t, sol.y.T):
        y = y.reshape(shape)
        _check_divergence(spec, y, t)
        snap(float(t), y)


def integrate_lift(model: ModelSpec, init: EnsembleState, cfg: IntegrationConfig):
    """Integrate ``dh/dt = x(Z) h`` from the identity and transport ``init`` with it.

    The mean field at each stage is computed from the ensemble transported
    by the stage value of ``h``. Returns ``(h_path, trajectory)`` sampled at
    the monitor times.
    """
    spec = model.working_domain
    group = model.group
    z0 = _validate_init(model, init)
    boundary = _is_boundary_run(spec, z0)
    m, kappa = spec.m, model.coupling
    a, d = model.drift.a, model.drift.d_block()
    N = z0.shape[0]
    mem_tol = cfg.tolerances["membership"]
    rank_tol = cfg.tolerances["rank"]

    def f(g):
        Z = (kappa / N) * mobius_batch(g, m, z0).sum(axis=0)
        x = np.block([[a, Z], [adjoint(Z), d]])
        return x @ g

    # validates the algebra structure once with the initial mean field
    lie_element(group, model.drift.with_b((kappa / N) * z0.sum(axis=0)))

    traj = Trajectory()
    h_path = []

    def snap(t, g):
        zs = mobius_batch(g, m, z0)
        h_path.append(GroupElement(g.copy(), group))
        traj.append(EnsembleState(zs, t), observables.record(t, spec, zs, kappa, rank_tol, boundary))

    g = np.eye(group.order, dtype=np.complex128)
    t0 = init.time
    snap(t0, g)
    h = cfg.step
    n_steps = cfg.n_steps
    for k in range(1, n_steps + 1):
        g = rk4_step(f, g, h)
        t = t0 + k * h
        if k % cfg.monitor_every == 0 or k == n_steps:
            if not is_group_member(group, g, mem_tol):
                raise ConstraintViolation(f"group element left {group.name()} at t={t:.6g}")
            snap(t, g)
    return h_path, traj
