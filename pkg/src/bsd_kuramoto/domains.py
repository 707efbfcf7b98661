"""Bounded symmetric domains of Cartan types I, II and III.

Points are complex matrices ``z``:

* type I  ``(m, n)``: ``m x n`` with ``Id_m - z z^dagger > 0``
* type II ``n``:      ``n x n`` antisymmetric, same inequality
* type III ``n``:     ``n x n`` symmetric, same inequality

The boundary splits into components classified by the number ``t`` of
unit singular values (for type II, the number of ``J`` blocks, i.e. half
that count). The component with maximal ``t`` is the Bergman-Shilov
boundary: complex Stiefel manifolds, unitary antisymmetric and unitary
symmetric matrices respectively.

All dimensions reported here are real dimensions.
"""
import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import cxmat
from .cxmat import DEFAULT_TOL, adjoint
from .errors import (
    InvalidDimensions,
    NotCanonical,
    OddNullity,
    OutsideClosure,
    ShapeMismatch,
    StructureViolation,
)


class DomainKind(str, enum.Enum):
    TYPE_I = "I"
    TYPE_II = "II"
    TYPE_III = "III"


@dataclass(frozen=True)
class DomainSpec:
    kind: DomainKind
    m: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", DomainKind(self.kind))
        m, n = self.m, self.n
        if not (isinstance(m, (int, np.integer)) and isinstance(n, (int, np.integer))):
            raise InvalidDimensions("m and n must be integers")
        if self.kind is DomainKind.TYPE_I:
            if n < 1:
                raise InvalidDimensions(f"type I needs n >= 1, got n={n}")
            if m < n:
                raise InvalidDimensions(f"type I needs m >= n, got m={m}, n={n}")
        elif self.kind is DomainKind.TYPE_II:
            if m != n:
                raise InvalidDimensions(f"type II needs m == n, got m={m}, n={n}")
            if n < 2:
                raise InvalidDimensions(f"type II needs n >= 2, got n={n}")
        else:
            if m != n:
                raise InvalidDimensions(f"type III needs m == n, got m={m}, n={n}")
            if n < 1:
                raise InvalidDimensions(f"type III needs n >= 1, got n={n}")

    @classmethod
    def type_i(cls, m: int, n: int) -> "DomainSpec":
        return cls(DomainKind.TYPE_I, m, n)

    @classmethod
    def type_ii(cls, n: int) -> "DomainSpec":
        return cls(DomainKind.TYPE_II, n, n)

    @classmethod
    def type_iii(cls, n: int) -> "DomainSpec":
        return cls(DomainKind.TYPE_III, n, n)

    @property
    def shape(self):
        return (self.m, self.n)

    @property
    def max_rank(self) -> int:
        """Boundary class of the Bergman-Shilov boundary."""
        return self.n // 2 if self.kind is DomainKind.TYPE_II else self.n

    @property
    def bs_rank(self) -> int:
        """Rank of ``z^dagger z`` for a Bergman-Shilov boundary point."""
        return 2 * (self.n // 2) if self.kind is DomainKind.TYPE_II else self.n

    def label(self) -> str:
        if self.kind is DomainKind.TYPE_I:
            return f"D^I_{{{self.m},{self.n}}}"
        return f"D^{self.kind.value}_{{{self.n}}}"


class BoundaryClass(int):
    """Boundary component index ``t`` (0 for interior points)."""


class CanonicalForm(NamedTuple):
    t: BoundaryClass
    sv: np.ndarray
    u1: np.ndarray
    u2: np.ndarray


def j_block(t: int) -> np.ndarray:
    """``J_t = [[0, Id_t], [-Id_t, 0]]`` of order ``2t``."""
    eye = np.eye(t)
    zero = np.zeros((t, t))
    return np.block([[zero, eye], [-eye, zero]]).astype(np.complex128)


def _leading_block(spec: DomainSpec, t: int) -> np.ndarray:
    if spec.kind is DomainKind.TYPE_II:
        return j_block(t)
    return np.eye(t, dtype=np.complex128)


def block_diag(top: np.ndarray, rest: np.ndarray) -> np.ndarray:
    """Place ``top`` and ``rest`` on the block diagonal (rectangular blocks allowed)."""
    r1, c1 = top.shape
    r2, c2 = rest.shape
    out = np.zeros((r1 + r2, c1 + c2), dtype=np.complex128)
    out[:r1, :c1] = top
    out[r1:, c1:] = rest
    return out


def _coerce(spec: DomainSpec, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    if z.shape != spec.shape:
        raise ShapeMismatch(f"{spec.label()} expects shape {spec.shape}, got {z.shape}")
    return z


def structure_check(spec: DomainSpec, z, tol: float = DEFAULT_TOL) -> bool:
    z = _coerce(spec, z)
    if spec.kind is DomainKind.TYPE_II:
        return bool(np.linalg.norm(z + z.T) <= tol)
    if spec.kind is DomainKind.TYPE_III:
        return bool(np.linalg.norm(z - z.T) <= tol)
    return True


def _checked(spec, z, tol):
    z = _coerce(spec, z)
    if not structure_check(spec, z, tol):
        word = "antisymmetric" if spec.kind is DomainKind.TYPE_II else "symmetric"
        raise StructureViolation(f"{spec.label()} requires a {word} matrix")
    return z


def defect_eigenvalues(spec: DomainSpec, z, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Ascending eigenvalues of ``Id_m - z z^dagger``."""
    z = _checked(spec, z, tol)
    w, _ = cxmat.herm_eig(np.eye(spec.m) - z @ adjoint(z), tol)
    return w


def contains_interior(spec: DomainSpec, z, tol: float = DEFAULT_TOL) -> bool:
    return bool(defect_eigenvalues(spec, z, tol)[0] > tol)


def boundary_rank(spec: DomainSpec, z, tol: float = DEFAULT_TOL) -> BoundaryClass:
    w = defect_eigenvalues(spec, z, tol)
    if w[0] < -tol:
        raise OutsideClosure(f"Id - z z^dagger has eigenvalue {w[0]:.3e} < -{tol:.1e}")
    count = int(np.count_nonzero(np.abs(w) <= tol))
    if spec.kind is DomainKind.TYPE_II:
        if count % 2:
            raise OddNullity(f"type II point has odd nullity {count}")
        count //= 2
    return BoundaryClass(count)


def bs_defect(spec: DomainSpec, z) -> float:
    """Frobenius distance of ``z^dagger z`` from its Bergman-Shilov value.

    For type II with odd ``n`` the target is the nearest rank ``n-1``
    orthogonal projector (the spectral projector of ``z^dagger z``).
    """
    z = np.asarray(z, dtype=np.complex128)
    gram = z.conj().T @ z
    if spec.kind is DomainKind.TYPE_II and spec.n % 2:
        w = np.linalg.eigvalsh(cxmat.hermitian_part(gram))
        target = np.ones_like(w)
        target[0] = 0.0
        return float(np.linalg.norm(w - target))
    return float(np.linalg.norm(np.eye(spec.n) - gram))


def bs_defect_batch(spec: DomainSpec, zs: np.ndarray) -> np.ndarray:
    """``bs_defect`` for a stack of points ``(N, m, n)``."""
    gram = adjoint(zs) @ zs
    if spec.kind is DomainKind.TYPE_II and spec.n % 2:
        w = np.linalg.eigvalsh(cxmat.hermitian_part(gram))
        w[:, 1:] -= 1.0
        return np.linalg.norm(w, axis=-1)
    return np.linalg.norm(np.eye(spec.n) - gram, axis=(-2, -1))


def on_bs_boundary(spec: DomainSpec, z, tol: float = DEFAULT_TOL) -> bool:
    z = _checked(spec, z, tol)
    gram = adjoint(z) @ z
    if spec.kind is DomainKind.TYPE_II and spec.n % 2:
        w = np.linalg.eigvalsh(cxmat.hermitian_part(gram))
        return bool(abs(w[0]) <= tol and np.all(np.abs(w[1:] - 1.0) <= tol))
    return bool(np.linalg.norm(np.eye(spec.n) - gram) <= tol)


def _unit_count(sv: np.ndarray, tol: float) -> int:
    return int(np.count_nonzero(np.abs(1.0 - sv**2) <= tol))


def _normalize_phases(U: np.ndarray, Vh: np.ndarray, k: int):
    # first nonzero component of each left singular vector made real positive;
    # the matching right vector absorbs the same phase so U S Vh is unchanged
    U = U.copy()
    Vh = Vh.copy()
    for j in range(U.shape[1]):
        col = U[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size == 0:
            continue
        phase = col[nz[0]] / abs(col[nz[0]])
        U[:, j] = col / phase
        if j < k:
            Vh[j, :] = Vh[j, :] / np.conj(phase)
    return U, Vh


def canonical_form(spec: DomainSpec, z, tol: float = DEFAULT_TOL) -> CanonicalForm:
    """SVD normal form ``u1 z u2^{-1} = diag(Id_t, diag(sv))``.

    Singular values are sorted descending; those with ``|1 - s^2| <= tol``
    form the identity block. ``u1`` is ``m x m`` and ``u2`` is ``n x n``,
    both unitary.
    """
    z = _checked(spec, z, tol)
    U, s, Vh = np.linalg.svd(z, full_matrices=True)
    if np.any(1.0 - s**2 < -tol):
        raise OutsideClosure(f"singular value {s.max():.6f} exceeds 1")
    U, Vh = _normalize_phases(U, Vh, len(s))
    t = _unit_count(s, tol)
    return CanonicalForm(BoundaryClass(t), s[t:], adjoint(U), Vh)


def component_subdomain(spec: DomainSpec, t: int) -> Optional[DomainSpec]:
    """Domain the component ``F_t`` projects onto, or None when it is a point.

    ``t = 0`` returns ``spec`` itself.
    """
    if t == 0:
        return spec
    if spec.kind is DomainKind.TYPE_I:
        return DomainSpec.type_i(spec.m - t, spec.n - t) if spec.n - t >= 1 else None
    if spec.kind is DomainKind.TYPE_II:
        return DomainSpec.type_ii(spec.n - 2 * t) if spec.n - 2 * t >= 2 else None
    return DomainSpec.type_iii(spec.n - t) if spec.n - t >= 1 else None


def project_component(spec: DomainSpec, z, tol: float = DEFAULT_TOL):
    """Split a canonical boundary point ``diag(Id_t | J_t, X)`` into its residual.

    Returns ``(sub_spec, X)``; ``sub_spec`` is None when the component is
    the Bergman-Shilov boundary and the residual block carries no domain.
    """
    z = _checked(spec, z, tol)
    t = boundary_rank(spec, z, tol)
    if t < 1:
        raise NotCanonical("interior point: no boundary component to project")
    k = 2 * t if spec.kind is DomainKind.TYPE_II else t
    lead = _leading_block(spec, t)
    dev = np.linalg.norm(z[:k, :k] - lead)
    off = np.linalg.norm(z[:k, k:]) + np.linalg.norm(z[k:, :k])
    if dev > tol or off > tol:
        raise NotCanonical(
            f"leading {k}x{k} block deviates from canonical form by {dev + off:.3e}"
        )
    return component_subdomain(spec, t), z[k:, k:].copy()


def embed_component(spec: DomainSpec, t: int, residual) -> np.ndarray:
    """Inverse of ``project_component``: ``diag(Id_t | J_t, residual)``."""
    k = 2 * t if spec.kind is DomainKind.TYPE_II else t
    residual = np.asarray(residual, dtype=np.complex128).reshape(spec.m - k, spec.n - k)
    return block_diag(_leading_block(spec, t), residual)


def _gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _structured_gaussian(kind: DomainKind, m: int, n: int, rng) -> np.ndarray:
    G = _gaussian(rng, (m, n))
    if kind is DomainKind.TYPE_II:
        G = G - G.T
    elif kind is DomainKind.TYPE_III:
        G = G + G.T
    return G


def sample_interior(spec: DomainSpec, seed: int) -> np.ndarray:
    """Random interior point; largest singular value uniform in (0, 1)."""
    rng = np.random.default_rng(seed)
    G = _structured_gaussian(spec.kind, spec.m, spec.n, rng)
    radius = rng.uniform(0.0, 1.0)
    return G * (radius / np.linalg.norm(G, 2))


def sample_bs_boundary(spec: DomainSpec, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if spec.kind is DomainKind.TYPE_I:
        z0 = np.eye(spec.m, spec.n, dtype=np.complex128)
        u1 = cxmat.haar_unitary(spec.m, rng)
        u2 = cxmat.haar_unitary(spec.n, rng)
        return u1 @ z0 @ adjoint(u2)
    u = cxmat.haar_unitary(spec.n, rng)
    if spec.kind is DomainKind.TYPE_II:
        l = spec.n // 2
        J = block_diag(j_block(l), np.zeros((spec.n - 2 * l, spec.n - 2 * l)))
        z = u @ J @ u.T
        return 0.5 * (z - z.T)
    z = u @ u.T
    return 0.5 * (z + z.T)


def sample_component(spec: DomainSpec, t: int, seed: int, max_sv: float = 0.8) -> np.ndarray:
    """Random point of the boundary component ``F_t`` (``t = 0``: interior).

    The residual block has singular values below ``max_sv``, so the point
    sits well inside its component.
    """
    if not 0 <= t <= spec.max_rank:
        raise InvalidDimensions(f"t must be in 0..{spec.max_rank}, got {t}")
    rng = np.random.default_rng(seed)
    k = 2 * t if spec.kind is DomainKind.TYPE_II else t
    rm, rn = spec.m - k, spec.n - k
    if rm > 0 and rn > 0:
        X = _structured_gaussian(spec.kind, rm, rn, rng)
        norm = np.linalg.norm(X, 2)
        X = X * (rng.uniform(0.0, max_sv) / norm) if norm > 0 else X
    else:
        X = np.zeros((rm, rn), dtype=np.complex128)
    canon = block_diag(_leading_block(spec, t), X)
    if spec.kind is DomainKind.TYPE_I:
        return cxmat.haar_unitary(spec.m, rng) @ canon @ adjoint(cxmat.haar_unitary(spec.n, rng))
    u = cxmat.haar_unitary(spec.n, rng)
    z = u @ canon @ u.T
    return 0.5 * (z - z.T) if spec.kind is DomainKind.TYPE_II else 0.5 * (z + z.T)


def dims(spec: DomainSpec):
    """Real dimensions ``(dim D, dim BS(D))``."""
    m, n = spec.m, spec.n
    if spec.kind is DomainKind.TYPE_I:
        return 2 * m * n, n * (2 * m - n)
    if spec.kind is DomainKind.TYPE_II:
        if n % 2:
            # U(n) / (Sp((n-1)/2) x U(1)) for odd n
            return n * (n - 1), n * n - (n - 1) * n // 2 - 1
        return n * (n - 1), n * (n - 1) // 2
    return n * (n + 1), n * (n + 1) // 2


def boundary_ranks(spec: DomainSpec, zs: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Boundary class of every point in a stack ``(N, m, n)``.

    Vectorized counterpart of ``boundary_rank`` without structure checks;
    points outside the closure get class -1 and odd type II nullities are
    rounded down.
    """
    zs = np.asarray(zs, dtype=np.complex128)
    w = np.linalg.eigvalsh(cxmat.hermitian_part(np.eye(spec.m) - zs @ adjoint(zs)))
    counts = np.count_nonzero(np.abs(w) <= tol, axis=-1)
    if spec.kind is DomainKind.TYPE_II:
        counts = counts // 2
    return np.where(w[..., 0] < -tol, -1, counts)
