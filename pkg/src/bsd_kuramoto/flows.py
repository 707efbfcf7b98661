"""Right-hand sides of the Kuramoto-type flows.

The coupled system for oscillators ``z^K`` on a common domain is the
Riccati field of the generator ``[[a, Z], [Z^dagger, d]]`` where the
off-diagonal block is the mean field ``Z = (kappa/N) sum_J z^J``::

    dz^K/dt = a z^K - z^K d + Z - z^K Z^dagger z^K

For ``m = n = 1`` and ``z = exp(i theta)`` this is the classic Kuramoto
model ``dtheta^I/dt = omega + (2 kappa/N) sum_J sin(theta^J - theta^I)``,
with the drift ``a = i omega/2``, ``d = -i omega/2``.

Sign convention: the coupling term carries ``sin(theta^J - theta^I)``
(attractive for ``kappa > 0``). The other common form with
``sin(theta^I - theta^J)`` is obtained by ``kappa -> -kappa``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cxmat import adjoint
from .domains import DomainKind, DomainSpec, component_subdomain, structure_check
from .errors import (
    ConstraintViolation,
    DomainViolation,
    EmptyEnsemble,
    InvalidDimensions,
    ShapeMismatch,
)
from .groups import (
    GeneratorSpec,
    GroupElement,
    GroupSpec,
    check_generator,
    lie_element,
    make_generator,
    mobius_batch,
)


@dataclass(frozen=True)
class ModelSpec:
    """A member of a Kuramoto family.

    ``family_index`` selects the boundary component ``t`` whose Bergman-Shilov
    boundary carries the oscillators; all matrices then live in the
    reduced domain ``working_domain``. ``drift`` holds the constant
    natural-frequency blocks ``a`` (and ``d`` for type I) with ``b = 0``.
    """

    domain: DomainSpec
    family_index: int = 0
    coupling: float = 1.0
    drift: GeneratorSpec = None

    def __post_init__(self):
        if not np.isfinite(self.coupling):
            raise ValueError("coupling must be finite")
        sub = component_subdomain(self.domain, self.family_index) if 0 <= self.family_index <= self.domain.max_rank else None
        if sub is None:
            raise InvalidDimensions(
                f"family index {self.family_index} leaves no Kuramoto model on {self.domain.label()}"
            )
        object.__setattr__(self, "_working", sub)
        group = GroupSpec.for_domain(sub)
        drift = self.drift if self.drift is not None else make_generator(group)
        check_generator(group, drift)
        if np.any(drift.b != 0):
            raise ConstraintViolation("drift generator must have b = 0")
        object.__setattr__(self, "drift", drift)

    @property
    def working_domain(self) -> DomainSpec:
        return self._working

    @property
    def group(self) -> GroupSpec:
        return GroupSpec.for_domain(self._working)


@dataclass
class EnsembleState:
    """``N`` oscillator matrices stacked as an array of shape ``(N, m, n)``."""

    oscillators: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.oscillators = np.array(self.oscillators, dtype=np.complex128)
        if self.oscillators.ndim == 2:
            self.oscillators = self.oscillators[None]
        if self.oscillators.ndim != 3:
            raise ShapeMismatch(f"expected (N, m, n) oscillators, got {self.oscillators.shape}")
        if self.oscillators.shape[0] < 1:
            raise EmptyEnsemble("ensemble has no oscillators")

    @property
    def N(self) -> int:
        return self.oscillators.shape[0]

    def copy(self) -> "EnsembleState":
        return EnsembleState(self.oscillators.copy(), self.time)


@dataclass(frozen=True)
class MeanField:
    Z: np.ndarray
    kappa: float = field(default=1.0)


def _stack(ens) -> np.ndarray:
    zs = ens.oscillators if isinstance(ens, EnsembleState) else np.asarray(ens, dtype=np.complex128)
    if zs.ndim != 3:
        raise ShapeMismatch(f"expected (N, m, n) oscillators, got {zs.shape}")
    if zs.shape[0] == 0:
        raise EmptyEnsemble("ensemble has no oscillators")
    return zs


def mean_field(ens, kappa: float) -> MeanField:
    zs = _stack(ens)
    return MeanField((kappa / zs.shape[0]) * zs.sum(axis=0), kappa)


def _riccati_terms(zs, a, d, Z):
    if zs.shape[1:] == (1, 1):
        # scalars commute: (a - d) z + Z - conj(Z) z^2
        return (a[0, 0] - d[0, 0]) * zs + Z - np.conj(Z) * zs * zs
    return a @ zs - zs @ d + Z - zs @ adjoint(Z) @ zs


def coupled_rhs_array(zs: np.ndarray, a: np.ndarray, d: np.ndarray, kappa: float, workers: int = 1) -> np.ndarray:
    """Array form of the coupled right-hand side for a stack ``zs``.

    The mean field is reduced once, sequentially; only the per-oscillator
    terms are split across ``workers`` threads, so the result does not
    depend on the worker count.
    """
    N = zs.shape[0]
    Z = (kappa / N) * zs.sum(axis=0)
    if workers <= 1 or N < 2 * workers:
        return _riccati_terms(zs, a, d, Z)
    bounds = np.linspace(0, N, workers + 1).astype(int)
    out = np.empty_like(zs)

    def work(i):
        lo, hi = bounds[i], bounds[i + 1]
        out[lo:hi] = _riccati_terms(zs[lo:hi], a, d, Z)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(work, range(workers)))
    return out


def rhs_kernel(a: np.ndarray, d: np.ndarray, kappa: float, workers: int = 1):
    """Closure ``f(zs)`` equal to ``coupled_rhs_array(zs, a, d, kappa, workers)``.

    Constants are bound once; the ``(1, 1)`` case skips the matrix products,
    which matters for long scalar runs where per-call overhead dominates.
    """
    if a.shape == (1, 1) and d.shape == (1, 1):
        c = complex(a[0, 0] - d[0, 0])

        def scalar(zs):
            # plain Python complex for the mean field: numpy scalar ops cost more here;
            # small ensembles are summed sequentially in Python, which is also cheaper
            N = zs.shape[0]
            Z = (sum(zs.ravel().tolist()) if N <= 64 else complex(zs.sum())) * (kappa / N)
            return Z + zs * (c - Z.conjugate() * zs)

        return scalar

    def matrix(zs):
        return coupled_rhs_array(zs, a, d, kappa, workers)

    return matrix


def coupled_rhs(model: ModelSpec, ens, workers: int = 1) -> np.ndarray:
    """Time derivative of every oscillator, shape ``(N, m, n)``."""
    zs = _stack(ens)
    if zs.shape[1:] != model.working_domain.shape:
        raise ShapeMismatch(
            f"oscillators of shape {zs.shape[1:]} do not match {model.working_domain.label()}"
        )
    return coupled_rhs_array(zs, model.drift.a, model.drift.d_block(), model.coupling, workers)


def classic_kuramoto_rhs(phases, omega: float, kappa: float) -> np.ndarray:
    """``omega + (2 kappa/N) sum_J sin(theta^J - theta^I)`` for each ``I``."""
    theta = np.asarray(phases, dtype=float)
    N = theta.size
    # sum_J sin(theta_J - theta_I) = Im(conj(e^{i theta_I}) sum_J e^{i theta_J})
    s = np.exp(1j * theta)
    coupling = np.imag(np.conj(s) * s.sum())
    return omega + (2.0 * kappa / N) * coupling


def frequency_drift(omega: float) -> GeneratorSpec:
    """Scalar drift for the ``(1, 1)`` model giving ``dz/dt = i omega z`` when uncoupled."""
    return make_generator(GroupSpec.for_domain(DomainSpec.type_i(1, 1)), [[0.5j * omega]], None, [[-0.5j * omega]])


def group_lift_rhs(model: ModelSpec, h: GroupElement, Z) -> np.ndarray:
    """``dh/dt = x h`` with ``x = [[a, Z], [Z^dagger, d]]``."""
    Z = Z.Z if isinstance(Z, MeanField) else np.asarray(Z, dtype=np.complex128)
    x = lie_element(model.group, model.drift.with_b(Z))
    return x @ h.g


def transport(h: GroupElement, initial: EnsembleState) -> EnsembleState:
    """Act with ``h`` on every oscillator of ``initial``."""
    zs = mobius_batch(h.g, h.spec.m, _stack(initial))
    return EnsembleState(zs, initial.time)


def disc_circle_rhs(z, a: complex, b: complex, on_circle: bool = False, tol: float = 1e-9):
    """Scalar flow ``dz/dt = b + 2 a z - conj(b) z^2`` on the disc.

    With ``on_circle`` the point ``z = exp(i theta)`` lies on the unit
    circle and the real phase velocity
    ``-i b e^{-i theta} - 2 i a + i conj(b) e^{i theta}`` is returned.
    ``z`` may be an array of points sharing ``a`` and ``b``.
    """
    if abs(np.real(a)) > tol:
        raise DomainViolation("drift a must be purely imaginary")
    z = np.asarray(z, dtype=np.complex128)
    r = np.abs(z)
    if on_circle:
        off = np.abs(r - 1.0)
        if np.any(off > tol):
            raise DomainViolation(f"|z| = {r.flat[np.argmax(off)]:.12g} is not on the unit circle")
        e = z / r
        theta_dot = np.real(-1j * b * np.conj(e) - 2j * a + 1j * np.conj(b) * e)
        return float(theta_dot) if theta_dot.ndim == 0 else theta_dot
    if np.any(r >= 1.0):
        raise DomainViolation(f"|z| = {np.max(r)} is outside the open disc")
    out = b + 2 * a * z - np.conj(b) * z * z
    return complex(out) if out.ndim == 0 else out


def ensemble_structure_ok(domain: DomainSpec, ens, tol: float = 1e-9) -> bool:
    zs = _stack(ens)
    if domain.kind is DomainKind.TYPE_I:
        return zs.shape[1:] == domain.shape
    return all(structure_check(domain, z, tol) for z in zs)
