"""
Dense complex matrix functions.

Everything here works on square ``complex128`` arrays and never diagonalizes
its argument, so defective (non-diagonalizable) inputs are handled like any
other.  The exponential is the scaling-and-squaring Pade scheme of
Higham (2005); the square root is the Schur method of Bjorck & Hammarling
(1983) run on the complex Schur form.
"""
import math

import numpy as np
import scipy.linalg

from .errors import BranchCut, ConvergenceFailure, DimensionMismatch, NonFinite, Singular

__all__ = [
    "as_square", "expm", "sqrtm_principal", "sqrtm_scaled", "coshm", "sinhm", "cosh_sinh",
    "spectrum", "hermitian_part", "hermitian_part_min_eig",
    "inverse_norm_bound", "spectral_norm", "frobenius_norm", "det",
    "on_branch_cut", "BRANCH_TOL", "TOL_SQRT",
]

BRANCH_TOL = 1e-12
TOL_SQRT = 1e-10

# Pade numerator coefficients b_0..b_m and the 1-norm limits theta_m from
# Higham, "The scaling and squaring method for the matrix exponential
# revisited", SIAM J. Matrix Anal. Appl. 26(4), 2005, Table 2.1.
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def as_square(M, name="matrix"):
    """Return ``M`` as a finite square complex128 array, or raise."""
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    A = A.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(A)):
        raise NonFinite(f"{name} has NaN or infinite entries")
    return A


def _pade_low(A, m):
    b = _PADE[m]
    n = A.shape[0]
    ident = np.eye(n, dtype=A.dtype)
    A2 = A @ A
    powers = [ident, A2]
    for _ in range(2, (m + 1) // 2):
        powers.append(powers[-1] @ A2)
    U = sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
    V = sum(b[2 * k] * powers[k] for k in range(len(powers)))
    return A @ U, V


def _pade13(A):
    b = _PADE[13]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    return U, V


def expm(M):
    """
    Matrix exponential by scaling and squaring with a diagonal Pade approximant.

    The Pade degree (3, 5, 7, 9 or 13) is picked from the 1-norm of ``M``;
    when even degree 13 is not accurate enough the argument is scaled by
    ``2**-s`` and the result squared ``s`` times.

    Parameters
    ----------
    M : (n, n) array_like
        Square matrix with finite entries.

    Returns
    -------
    (n, n) complex ndarray
    """
    A = as_square(M)
    n = A.shape[0]
    if n == 0:
        return A.copy()
    norm1 = np.linalg.norm(A, 1)
    if norm1 == 0.0:
        return np.eye(n, dtype=np.complex128)

    squarings = 0
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            U, V = _pade_low(A, m)
            break
    else:
        squarings = max(0, int(math.ceil(math.log2(norm1 / _THETA[13]))))
        U, V = _pade13(A / 2.0 ** squarings)

    try:
        E = np.linalg.solve(V - U, V + U)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure("Pade denominator is singular") from exc
    for _ in range(squarings):
        E = E @ E
    return E


def cosh_sinh(M):
    """Return ``(cosh M, sinh M)`` from the two exponentials ``e^M`` and ``e^-M``."""
    A = as_square(M)
    ep = expm(A)
    em = expm(-A)
    return 0.5 * (ep + em), 0.5 * (ep - em)


def coshm(M):
    return cosh_sinh(M)[0]


def sinhm(M):
    return cosh_sinh(M)[1]


def on_branch_cut(lam, tol=BRANCH_TOL):
    """True when ``lam`` lies on (-inf, 0] up to a relative band of width ``tol``."""
    lam = complex(lam)
    band = tol * (1.0 + abs(lam))
    return abs(lam.imag) <= band and lam.real <= band


def sqrtm_principal(M, tol=TOL_SQRT):
    """
    Principal square root via the complex Schur form.

    With ``M = Z T Z*`` and ``T`` upper triangular, the root ``R`` of ``T``
    is built one superdiagonal at a time from

        R_ii = sqrt(T_ii),
        R_ij = (T_ij - sum_{i<k<j} R_ik R_kj) / (R_ii + R_jj),

    which needs no eigenvectors and therefore works for Jordan blocks.

    Raises
    ------
    BranchCut
        If some eigenvalue of ``M`` lies on the closed negative real axis.
    ConvergenceFailure
        If the computed root misses ``X @ X == M`` by more than ``tol``
        (relative Frobenius).
    """
    A = as_square(M)
    n = A.shape[0]
    if n == 0:
        return A.copy()
    try:
        T, Z = scipy.linalg.schur(A, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure("Schur decomposition failed") from exc

    diag = np.diag(T)
    for lam in diag:
        if on_branch_cut(lam):
            raise BranchCut(f"eigenvalue {lam!r} lies on the closed negative real axis")

    R = np.zeros_like(T)
    root = np.sqrt(diag)
    R[np.diag_indices(n)] = root
    for k in range(1, n):
        for i in range(n - k):
            j = i + k
            s = T[i, j] - R[i, i + 1:j] @ R[i + 1:j, j]
            R[i, j] = s / (root[i] + root[j])

    X = Z @ R @ Z.conj().T
    scale = np.linalg.norm(A)
    resid = np.linalg.norm(X @ X - A)
    if scale > 0 and resid > tol * scale:
        raise ConvergenceFailure(
            f"square root residual {resid / scale:.3e} exceeds tolerance {tol:.1e}")
    return X


def sqrtm_scaled(M, tol=TOL_SQRT):
    """
    ``sqrtm_principal`` applied to ``M / ||M||_F`` and rescaled by ``||M||_F**0.5``.

    The principal root is positively homogeneous, so this is the same root;
    it lets the branch-cut band act relative to the size of ``M`` rather
    than in absolute terms, which matters for matrices in SI units such as
    ``L C ~ 1e-17``.
    """
    A = as_square(M)
    k = np.linalg.norm(A)
    if k == 0.0:
        return sqrtm_principal(A, tol)
    return math.sqrt(k) * sqrtm_principal(A / k, tol)


def spectrum(M):
    """Eigenvalues of ``M`` with algebraic multiplicity (order unspecified)."""
    A = as_square(M)
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure("eigenvalue iteration did not converge") from exc


def hermitian_part(M):
    A = as_square(M)
    return 0.5 * (A + A.conj().T)


def hermitian_part_min_eig(M):
    """
    Smallest eigenvalue of ``(M + M*)/2``.

    This is also the smallest real part over the numerical range of ``M``,
    since ``Re(x* M x) = x* H(M) x`` for every unit vector ``x``.
    """
    H = hermitian_part(M)
    try:
        return float(np.linalg.eigvalsh(H)[0])
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure("Hermitian eigensolver did not converge") from exc


def spectral_norm(M):
    A = as_square(M)
    try:
        return float(np.linalg.norm(A, 2))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure("SVD did not converge") from exc


def frobenius_norm(M):
    return float(np.linalg.norm(as_square(M)))


def det(M):
    return complex(np.linalg.det(as_square(M)))


def inverse_norm_bound(M, tol=None):
    """
    Upper bound ``||M||_F**(n-1) / |det M|`` on the spectral norm of ``M^-1``.

    ``M`` is declared singular when it is numerically rank deficient
    (smallest singular value at most ``tol`` times the largest, default
    ``n * eps``) or when the bound is not representable.
    """
    A = as_square(M)
    n = A.shape[0]
    if n == 0:
        return 0.0
    tol = n * np.finfo(float).eps if tol is None else tol
    sv = np.linalg.svd(A, compute_uv=False)
    fro = np.linalg.norm(A)
    d = abs(np.linalg.det(A))
    if sv[-1] <= tol * sv[0] or d == 0.0:
        raise Singular(f"|det| = {d:.3e} is numerically zero (sigma_min/sigma_max = {sv[-1] / sv[0]:.3e})")
    bound = fro ** (n - 1) / d
    if not math.isfinite(bound):
        raise Singular(f"bound overflows (|det| = {d:.3e})")
    return float(bound)
