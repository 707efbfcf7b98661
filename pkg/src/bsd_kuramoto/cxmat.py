"""Small dense complex-matrix kernel.

All functions take numpy arrays and return new arrays. Where noted, leading
batch dimensions are accepted (``(..., m, n)``), which lets the integrators
treat a whole ensemble in one call.
"""
import numpy as np
import scipy.linalg

from .errors import NotHermitian, RankDeficient, ShapeMismatch, SingularMatrix

DEFAULT_TOL = 1e-9


def as_matrix(M) -> np.ndarray:
    """Coerce ``M`` to a finite 2-D complex128 array."""
    A = np.array(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ShapeMismatch(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def adjoint(M: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(M, -1, -2))


def hermitian_part(H: np.ndarray) -> np.ndarray:
    return 0.5 * (H + adjoint(H))


def _check_hermitian(H, tol):
    dev = np.linalg.norm(H - adjoint(H))
    # floor of 1 so that near-zero matrices (defects at boundary points) pass
    scale = max(np.linalg.norm(H), 1.0)
    if dev > tol * scale:
        raise NotHermitian(f"||H - H^dagger||_F = {dev:.3e} exceeds {tol:.1e} * max(||H||_F, 1)")


def herm_eig(H, tol: float = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray, ascending
    U : ndarray, unitary, with ``H = U diag(eigenvalues) U^dagger``
    """
    H = as_matrix(H)
    if H.shape[0] != H.shape[1]:
        raise ShapeMismatch(f"square matrix required, got {H.shape}")
    _check_hermitian(H, tol)
    w, U = np.linalg.eigh(hermitian_part(H))
    return w, U


def is_positive_definite(H, tol: float = DEFAULT_TOL) -> bool:
    w, _ = herm_eig(H, tol)
    return bool(w[0] > tol)


def inv_sqrt_psd(H, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Inverse square root ``H^{-1/2}`` of a Hermitian positive definite matrix."""
    w, U = herm_eig(H, tol)
    if w[0] <= tol:
        raise SingularMatrix(f"smallest eigenvalue {w[0]:.3e} <= tol {tol:.1e}")
    return (U / np.sqrt(w)) @ adjoint(U)


def mat_exp(X) -> np.ndarray:
    X = as_matrix(X)
    if X.shape[0] != X.shape[1]:
        raise ShapeMismatch(f"square matrix required, got {X.shape}")
    return scipy.linalg.expm(X)


def polar_unitary_factor(Z, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Unitary polar factor ``W = Z (Z^dagger Z)^{-1/2}``.

    ``W`` is the matrix with orthonormal columns nearest to ``Z`` in the
    Frobenius norm. Because the factor is a function of ``Z^dagger Z``
    applied on the right, (anti)symmetry of a square ``Z`` carries over
    to ``W``.

    Accepts a stack ``(..., m, n)`` with ``m >= n``.
    """
    Z = np.asarray(Z, dtype=np.complex128)
    if Z.ndim < 2:
        raise ShapeMismatch(f"matrix required, got shape {Z.shape}")
    m, n = Z.shape[-2:]
    if m < n:
        raise ShapeMismatch(f"polar factor needs rows >= cols, got {m}x{n}")
    gram = hermitian_part(adjoint(Z) @ Z)
    w, U = np.linalg.eigh(gram)
    smallest = np.min(w[..., 0])
    if smallest <= tol:
        raise RankDeficient(f"smallest eigenvalue of Z^dagger Z is {smallest:.3e} <= tol {tol:.1e}")
    inv_sqrt = (U / np.sqrt(w)[..., None, :]) @ adjoint(U)
    return Z @ inv_sqrt


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix (phase-corrected)."""
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_skew_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (G - adjoint(G))
