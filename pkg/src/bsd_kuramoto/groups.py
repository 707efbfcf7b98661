"""Matrix groups SU(m,n), SO*(2n), Sp(n,R) acting on the domains.

A group element is a block matrix ``[[A, B], [C, D]]`` of order ``m + n``
acting by ``z -> (A z + B)(C z + D)^{-1}``. Lie-algebra elements have the
block form ``[[a, b], [b^dagger, d]]`` with ``a``, ``d`` skew-Hermitian;
for SO*(2n) and Sp(n,R) the lower-right block is ``conj(a)`` and ``b`` is
antisymmetric resp. symmetric. The infinitesimal action is the Riccati
field ``b + a z - z d - z b^dagger z``.
"""
import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import cxmat
from .cxmat import adjoint
from .domains import DomainKind, DomainSpec
from .errors import ConstraintViolation, InvalidDimensions, ShapeMismatch, SingularDenominator

MOBIUS_TOL = 1e-12


class GroupKind(str, enum.Enum):
    SU_MN = "SU(m,n)"
    SO_STAR = "SO*(2n)"
    SP_R = "Sp(n,R)"


_GROUP_OF = {
    DomainKind.TYPE_I: GroupKind.SU_MN,
    DomainKind.TYPE_II: GroupKind.SO_STAR,
    DomainKind.TYPE_III: GroupKind.SP_R,
}
_DOMAIN_OF = {v: k for k, v in _GROUP_OF.items()}


@dataclass(frozen=True)
class GroupSpec:
    kind: GroupKind
    m: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "kind", GroupKind(self.kind))
        if self.kind is not GroupKind.SU_MN and self.m != self.n:
            raise InvalidDimensions(f"{self.kind.value} needs m == n")
        if self.m < 1 or self.n < 1:
            raise InvalidDimensions("group dimensions must be positive")

    @classmethod
    def for_domain(cls, domain: DomainSpec) -> "GroupSpec":
        return cls(_GROUP_OF[domain.kind], domain.m, domain.n)

    @property
    def domain(self) -> DomainSpec:
        return DomainSpec(_DOMAIN_OF[self.kind], self.m, self.n)

    @property
    def order(self) -> int:
        return self.m + self.n

    def name(self) -> str:
        if self.kind is GroupKind.SU_MN:
            return f"SU({self.m},{self.n})"
        if self.kind is GroupKind.SO_STAR:
            return f"SO*({2 * self.n})"
        return f"Sp({self.n},R)"


def as_group_spec(spec) -> GroupSpec:
    return GroupSpec.for_domain(spec) if isinstance(spec, DomainSpec) else spec


@dataclass(frozen=True)
class GroupElement:
    g: np.ndarray
    spec: GroupSpec

    def blocks(self):
        m = self.spec.m
        g = self.g
        return g[:m, :m], g[:m, m:], g[m:, :m], g[m:, m:]

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.g @ other.g, self.spec)

    @classmethod
    def identity(cls, spec) -> "GroupElement":
        spec = as_group_spec(spec)
        return cls(np.eye(spec.order, dtype=np.complex128), spec)


@dataclass(frozen=True)
class GeneratorSpec:
    """Blocks of a Lie-algebra element; ``d`` is None for SO*(2n)/Sp(n,R).

    ``trace_shift`` records the multiple of the identity removed from ``a``
    and ``d`` to balance the trace (type I only). The shift is central, so
    it does not change the vector field.
    """

    a: np.ndarray
    b: np.ndarray
    d: Optional[np.ndarray] = None
    trace_shift: complex = field(default=0j)

    def d_block(self) -> np.ndarray:
        return np.conj(self.a) if self.d is None else self.d

    def with_b(self, b) -> "GeneratorSpec":
        return GeneratorSpec(self.a, np.asarray(b, dtype=np.complex128), self.d, self.trace_shift)


def signature_forms(spec):
    """Hermitian form ``s`` and, for SO*(2n) and Sp(n,R), the bilinear form ``s1``."""
    spec = as_group_spec(spec)
    m, n = spec.m, spec.n
    s = np.diag(np.concatenate([-np.ones(m), np.ones(n)])).astype(np.complex128)
    if spec.kind is GroupKind.SU_MN:
        return s, None
    eye = np.eye(n)
    zero = np.zeros((n, n))
    if spec.kind is GroupKind.SO_STAR:
        s1 = np.block([[zero, eye], [eye, zero]])
    else:
        s1 = np.block([[zero, eye], [-eye, zero]])
    return s, s1.astype(np.complex128)


def is_group_member(spec, g, tol: float = 1e-9) -> bool:
    spec = as_group_spec(spec)
    g = np.asarray(g.g if isinstance(g, GroupElement) else g, dtype=np.complex128)
    if g.shape != (spec.order, spec.order):
        raise ShapeMismatch(f"{spec.name()} element must be {spec.order}x{spec.order}, got {g.shape}")
    s, s1 = signature_forms(spec)
    if np.linalg.norm(g @ s @ adjoint(g) - s) > tol:
        return False
    if abs(np.linalg.det(g) - 1.0) > tol:
        return False
    if s1 is not None and np.linalg.norm(g @ s1 @ g.T - s1) > tol:
        return False
    return True


def algebra_defect(spec, X) -> float:
    """Largest violation of the infinitesimal form conditions for ``X``."""
    spec = as_group_spec(spec)
    X = np.asarray(X, dtype=np.complex128)
    s, s1 = signature_forms(spec)
    defect = max(np.linalg.norm(X @ s + s @ adjoint(X)), abs(np.trace(X)))
    if s1 is not None:
        defect = max(defect, np.linalg.norm(X @ s1 + s1 @ X.T))
    return float(defect)


def _block_shapes(spec: GroupSpec):
    return (spec.m, spec.m), (spec.m, spec.n), (spec.n, spec.n)


def make_generator(spec, a=None, b=None, d=None) -> GeneratorSpec:
    """Build a validated generator, trace-balancing type I drift blocks.

    Missing blocks default to zero. For SO*(2n) and Sp(n,R) passing ``d``
    is an error, since it is fixed to ``conj(a)``.
    """
    spec = as_group_spec(spec)
    sa, sb, sd = _block_shapes(spec)
    a = np.zeros(sa, np.complex128) if a is None else np.array(a, dtype=np.complex128)
    b = np.zeros(sb, np.complex128) if b is None else np.array(b, dtype=np.complex128)
    if a.shape != sa or b.shape != sb:
        raise ShapeMismatch(f"blocks a{a.shape}, b{b.shape} do not fit {spec.name()}")
    if spec.kind is not GroupKind.SU_MN:
        if d is not None:
            raise ConstraintViolation(f"{spec.name()}: d is fixed to conj(a) and must not be given")
        gen = GeneratorSpec(a, b)
        check_generator(spec, gen)
        return gen
    d = np.zeros(sd, np.complex128) if d is None else np.array(d, dtype=np.complex128)
    if d.shape != sd:
        raise ShapeMismatch(f"block d{d.shape} does not fit {spec.name()}")
    shift = (np.trace(a) + np.trace(d)) / spec.order
    if abs(shift) <= 1e-15 * max(1.0, np.linalg.norm(a), np.linalg.norm(d)):
        # already balanced up to rounding; leave the blocks untouched so balancing is idempotent
        shift = 0j
    gen = GeneratorSpec(a - shift * np.eye(spec.m), b, d - shift * np.eye(spec.n), complex(shift))
    check_generator(spec, gen)
    return gen


def check_generator(spec, gen: GeneratorSpec, tol: float = 1e-12) -> None:
    """Raise ConstraintViolation naming the first failed block condition."""
    spec = as_group_spec(spec)
    a, b, d = gen.a, gen.b, gen.d_block()
    sa, sb, sd = _block_shapes(spec)
    if a.shape != sa or b.shape != sb or d.shape != sd:
        raise ShapeMismatch(f"generator blocks do not fit {spec.name()}")
    scale = max(1.0, np.linalg.norm(a), np.linalg.norm(b), np.linalg.norm(d))
    lim = tol * scale
    if np.linalg.norm(a + adjoint(a)) > lim:
        raise ConstraintViolation("a^dagger = -a violated")
    if spec.kind is GroupKind.SU_MN:
        if np.linalg.norm(d + adjoint(d)) > lim:
            raise ConstraintViolation("d^dagger = -d violated")
        if abs(np.trace(a) + np.trace(d)) > lim:
            raise ConstraintViolation("tr a + tr d = 0 violated")
    elif spec.kind is GroupKind.SO_STAR:
        if np.linalg.norm(b + b.T) > lim:
            raise ConstraintViolation("b^T = -b violated")
    elif np.linalg.norm(b - b.T) > lim:
        raise ConstraintViolation("b^T = b violated")


def lie_element(spec, gen: GeneratorSpec) -> np.ndarray:
    spec = as_group_spec(spec)
    check_generator(spec, gen)
    return np.block([[gen.a, gen.b], [adjoint(gen.b), gen.d_block()]])


def exp_group(spec, X, tol: float = 1e-9) -> GroupElement:
    spec = as_group_spec(spec)
    X = np.asarray(X, dtype=np.complex128)
    if X.shape != (spec.order, spec.order):
        raise ShapeMismatch(f"algebra element must be {spec.order}x{spec.order}")
    defect = algebra_defect(spec, X)
    if defect > tol * max(1.0, np.linalg.norm(X)):
        raise ConstraintViolation(f"X is not in the Lie algebra of {spec.name()} (defect {defect:.2e})")
    g = cxmat.mat_exp(X)
    if not is_group_member(spec, g, 10 * tol):
        raise ConstraintViolation(f"exp(X) left {spec.name()} beyond tolerance")
    return GroupElement(g, spec)


def mobius_batch(g: np.ndarray, m: int, zs: np.ndarray, tol: float = MOBIUS_TOL) -> np.ndarray:
    """``(A z + B)(C z + D)^{-1}`` for a stack ``zs`` of shape ``(N, m, n)``."""
    A, B, C, D = g[:m, :m], g[:m, m:], g[m:, :m], g[m:, m:]
    num = A @ zs + B
    den = C @ zs + D
    sv = np.linalg.svd(den, compute_uv=False)
    bad = sv[..., -1] <= tol * np.linalg.norm(den, axis=(-2, -1))
    if np.any(bad):
        raise SingularDenominator(f"C z + D is numerically singular for index {int(np.argmax(bad))}")
    # X D^{-1} = (D^{-T} X^T)^T
    return np.swapaxes(np.linalg.solve(np.swapaxes(den, -1, -2), np.swapaxes(num, -1, -2)), -1, -2)


def mobius(h: GroupElement, z, tol: float = MOBIUS_TOL) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    if z.shape != (h.spec.m, h.spec.n):
        raise ShapeMismatch(f"point shape {z.shape} does not match {h.spec.name()}")
    return mobius_batch(h.g, h.spec.m, z[None], tol)[0]


def vector_field(spec, gen: GeneratorSpec, z) -> np.ndarray:
    """Riccati field ``b + a z - z d - z b^dagger z``; broadcasts over leading axes of ``z``."""
    spec = as_group_spec(spec)
    z = np.asarray(z, dtype=np.complex128)
    if z.shape[-2:] != (spec.m, spec.n):
        raise ShapeMismatch(f"point shape {z.shape[-2:]} does not match {spec.name()}")
    b = gen.b
    return b + gen.a @ z - z @ gen.d_block() - z @ adjoint(b) @ z


def hc_coordinate(h: GroupElement, tol: float = MOBIUS_TOL) -> np.ndarray:
    """Harish-Chandra coordinate ``B D^{-1}`` (the image of the origin)."""
    _, B, _, D = h.blocks()
    sv = np.linalg.svd(D, compute_uv=False)
    if sv[-1] <= tol * np.linalg.norm(D):
        raise SingularDenominator("D block is numerically singular")
    return np.linalg.solve(D.T, B.T).T


def random_generator(spec, rng: np.random.Generator, scale: float = 1.0, drift_only=False) -> GeneratorSpec:
    """Random valid generator with blocks of Frobenius size about ``scale``."""
    spec = as_group_spec(spec)
    m, n = spec.m, spec.n
    a = cxmat.random_skew_hermitian(m, rng)
    a *= scale / max(np.linalg.norm(a), 1e-300)
    if drift_only:
        b = np.zeros((m, n), np.complex128)
    else:
        b = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        if spec.kind is GroupKind.SO_STAR:
            b = b - b.T
        elif spec.kind is GroupKind.SP_R:
            b = b + b.T
        b *= scale / max(np.linalg.norm(b), 1e-300)
    if spec.kind is GroupKind.SU_MN:
        d = cxmat.random_skew_hermitian(n, rng)
        d *= scale / max(np.linalg.norm(d), 1e-300)
        return make_generator(spec, a, b, d)
    return make_generator(spec, a, b)


def random_algebra_element(spec, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    return lie_element(spec, random_generator(spec, rng, scale))


def random_group_element(spec, rng: np.random.Generator, scale: float = 1.0) -> GroupElement:
    spec = as_group_spec(spec)
    return exp_group(spec, random_algebra_element(spec, rng, scale))


def stabilizer_element(spec, rng: np.random.Generator) -> GroupElement:
    """Random element of the maximal compact subgroup (block diagonal, fixes the origin)."""
    spec = as_group_spec(spec)
    A = cxmat.haar_unitary(spec.m, rng)
    if spec.kind is GroupKind.SU_MN:
        D = cxmat.haar_unitary(spec.n, rng)
        # fix the determinant to one with a central phase
        phase = np.linalg.det(A) * np.linalg.det(D)
        D = D / phase ** (1.0 / spec.n)
    else:
        D = np.conj(A)
    g = np.zeros((spec.order, spec.order), np.complex128)
    g[: spec.m, : spec.m] = A
    g[spec.m :, spec.m :] = D
    return GroupElement(g, spec)
