"""
Per-unit-length line constants and the scalar parameters derived from them.

All quantities are SI per meter.  ``LineConstants`` can only be built from
matrices that pass :func:`validate`; the stored copies are symmetrized and
read-only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import matfun
from .errors import DimensionMismatch, NonFinite, ValidationFailure

__all__ = [
    "LineConstants", "ValidationReport", "KappaGrid", "BoundParams",
    "validate", "accretivity_thresholds", "lemma_delta_coeffs",
    "kappa_estimate", "bound_params", "lossless_exponential", "random_constants",
]

SYMMETRY_TOL = 1e-12
NORMALITY_TOL = 1e-10
_NAMES = ("L", "C", "R", "G")


@dataclass(frozen=True)
class ValidationReport:
    n: int
    asymmetry: dict
    lambda_min_L: float
    lambda_min_C: float
    ok: bool
    problems: tuple = ()

    def summary(self):
        if self.ok:
            return "valid"
        return "; ".join(self.problems)


def _as_real_square(M, name):
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite(f"{name} has NaN or infinite entries")
    return A


def validate(L, C, R, G):
    """
    Check symmetry of all four matrices and positive definiteness of L and C.

    Returns a :class:`ValidationReport`; never raises for a failed check,
    only for malformed shapes.
    """
    mats = {k: _as_real_square(M, k) for k, M in zip(_NAMES, (L, C, R, G))}
    n = mats["L"].shape[0]
    for k, M in mats.items():
        if M.shape != (n, n):
            raise DimensionMismatch(f"{k} has shape {M.shape}, expected {(n, n)}")

    problems = []
    asym = {}
    for k, M in mats.items():
        gap = float(np.max(np.abs(M - M.T))) if n else 0.0
        asym[k] = gap
        scale = float(np.max(np.abs(M))) if n else 0.0
        if gap > SYMMETRY_TOL * max(scale, np.finfo(float).tiny):
            problems.append(f"{k} is not symmetric (max |{k} - {k}^T| = {gap:.3e})")

    lam = {}
    for k in ("L", "C"):
        sym = 0.5 * (mats[k] + mats[k].T)
        lam[k] = float(np.linalg.eigvalsh(sym)[0]) if n else math.inf
        if not lam[k] > 0.0:
            problems.append(f"{k} is not positive definite (lambda_min = {lam[k]:.6g})")

    return ValidationReport(n=n, asymmetry=asym, lambda_min_L=lam["L"],
                            lambda_min_C=lam["C"], ok=not problems,
                            problems=tuple(problems))


def _frozen(M):
    A = np.array(0.5 * (M + M.T), dtype=float)
    A.setflags(write=False)
    return A


@dataclass(frozen=True, eq=False)
class LineConstants:
    """Inductance, capacitance, resistance and conductance matrices (per meter)."""

    L: np.ndarray
    C: np.ndarray
    R: np.ndarray
    G: np.ndarray
    report: ValidationReport = field(repr=False)

    @classmethod
    def create(cls, L, C, R=None, G=None):
        """Validate, symmetrize and freeze.  ``R`` and ``G`` default to zero."""
        L = _as_real_square(L, "L")
        n = L.shape[0]
        R = np.zeros((n, n)) if R is None else R
        G = np.zeros((n, n)) if G is None else G
        report = validate(L, C, R, G)
        if not report.ok:
            raise ValidationFailure(report.summary(), report)
        mats = [_frozen(_as_real_square(M, k)) for k, M in zip(_NAMES, (L, C, R, G))]
        return cls(*mats, report=report)

    @property
    def n(self):
        return self.L.shape[0]

    def matrices(self):
        return {"L": self.L, "C": self.C, "R": self.R, "G": self.G}

    def dual(self):
        """Swap L with C and R with G."""
        return LineConstants.create(self.C, self.L, self.G, self.R)

    def lossless(self):
        return LineConstants.create(self.L, self.C)

    def __eq__(self, other):
        if not isinstance(other, LineConstants):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in
                   zip(self.matrices().values(), other.matrices().values()))

    __hash__ = None


def _lmin(M):
    return float(np.linalg.eigvalsh(M)[0])


def _lmax(M):
    return float(np.linalg.eigvalsh(M)[-1])


def _threshold(P, Q):
    # smallest t with P t + Q guaranteed positive definite (P > 0, Q symmetric)
    q = _lmin(Q)
    return -min(q / _lmax(P), q / _lmin(P)) + 0.0  # no negative zero


def accretivity_thresholds(constants):
    """
    Return ``(gamma, rho)``.

    ``C s + G`` is accretive for ``Re(s) > gamma`` and ``L s + R`` for
    ``Re(s) > rho``.
    """
    gamma = _threshold(constants.C, constants.G)
    rho = _threshold(constants.L, constants.R)
    return gamma, rho


def lemma_delta_coeffs(constants):
    """``(c0, c1)`` with ``||[[0, L t + R], [C t + G, 0]]|| <= c1 |t| + c0`` for real t."""
    c0 = max(matfun.spectral_norm(constants.R), matfun.spectral_norm(constants.G))
    c1 = max(matfun.spectral_norm(constants.L), matfun.spectral_norm(constants.C))
    return c0, c1


@dataclass(frozen=True)
class KappaGrid:
    """
    Frequency grid for sampling the lossless exponential.

    Samples are log-spaced over ``+-[omega_min, omega_max]``; the upper end is
    pushed out a decade at a time (at most ``max_extra_decades`` times) while
    the running maximum still moved within the last ``stagnation_decades``.
    ``periods`` extra samples are spread linearly over the slowest modal
    period so that at least one full oscillation is resolved.
    """

    omega_min: float = 1e-3
    omega_max: float = 1e9
    points_per_decade: int = 40
    stagnation_decades: int = 3
    max_extra_decades: int = 6
    periods: int = 4
    points_per_period: int = 256


class _LosslessModes:
    """
    Closed form of ``expm(j w [[0, L], [C, 0]])`` through a diagonalizer of ``LC``.

    With ``L^{1/2} C L^{1/2} = U diag(lam) U^T`` and ``Q = L^{1/2} U``:

        [[Q cos(w sqrt(lam)) Q^-1,            j Q lam^{-1/2} sin(w sqrt(lam)) Q^T],
         [j Q^-T lam^{1/2} sin(w sqrt(lam)) Q^-1, Q^-T cos(w sqrt(lam)) Q^T]]
    """

    def __init__(self, L, C):
        w, V = np.linalg.eigh(L)
        half = (V * np.sqrt(w)) @ V.T
        lam, U = np.linalg.eigh(half @ C @ half)
        self.lam = lam
        self.root = np.sqrt(lam)
        self.Q = half @ U
        self.Qinv = np.linalg.solve(self.Q, np.eye(len(lam)))

    def exp(self, omega):
        ph = omega * self.root
        c, s = np.cos(ph), np.sin(ph)
        Q, Qi = self.Q, self.Qinv
        a = (Q * c) @ Qi
        b = 1j * (Q * (s / self.root)) @ Q.T
        g = 1j * (Qi.T * (s * self.root)) @ Qi
        d = (Qi.T * c) @ Q.T
        return np.block([[a, b], [g, d]])


def lossless_exponential(constants, omega):
    """``expm([[0, j w L], [j w C, 0]])`` evaluated without scaling-and-squaring."""
    return _LosslessModes(constants.L, constants.C).exp(float(omega))


def _is_normal(M, tol=NORMALITY_TOL):
    scale = np.linalg.norm(M) ** 2
    comm = M @ M.conj().T - M.conj().T @ M
    return np.linalg.norm(comm) <= tol * scale


def _kappa_envelope(L, C):
    CL = C @ L
    c1 = max(matfun.spectral_norm(L), matfun.spectral_norm(C))
    lam_min = float(np.min(np.linalg.eigvals(CL).real))
    if _is_normal(CL):
        return 1.0 + c1 / math.sqrt(lam_min), True

    # Block-norm envelope.  LC = Q Lambda Q^-1 with either Q = L^{1/2} U or
    # Q = C^{-1/2} U'; take whichever has the smaller condition number.
    def cond_half(M):
        w = np.linalg.eigvalsh(M)
        return math.sqrt(w[-1] / w[0])

    cond_q = min(cond_half(L), cond_half(C))
    sqrt_cl_inv = np.linalg.inv(matfun.sqrtm_scaled(CL))
    sqrt_lc_inv = np.linalg.inv(matfun.sqrtm_scaled(L @ C))
    kb = matfun.spectral_norm(L @ sqrt_cl_inv) * cond_q
    kc = matfun.spectral_norm(C @ sqrt_lc_inv) * cond_q
    bound = np.array([[cond_q, kb], [kc, cond_q]])
    return float(np.linalg.norm(bound, 2)), False


def kappa_estimate(constants, grid=None):
    """
    Bracket ``kappa = sup_w ||expm(j w [[0, L], [C, 0]])||``.

    Returns ``(kappa_lower, kappa_upper)``.  The lower value is the largest
    norm actually observed on the sampling grid; the upper value is an
    analytic envelope and is the one to use wherever soundness matters.
    """
    grid = grid or KappaGrid()
    modes = _LosslessModes(constants.L, constants.C)

    def norm_at(w):
        return float(np.linalg.norm(modes.exp(w), 2))

    best = 1.0  # omega = 0 gives the identity
    slowest = float(np.min(modes.root))
    if slowest > 0 and grid.periods > 0:
        period = 2.0 * math.pi / slowest
        for w in np.linspace(0.0, grid.periods * period,
                             grid.periods * grid.points_per_period + 1):
            best = max(best, norm_at(w))

    edge = math.floor(math.log10(grid.omega_min))
    stop = math.ceil(math.log10(grid.omega_max))
    history = []  # running max at each decade edge
    while True:
        for w in np.logspace(edge, edge + 1, grid.points_per_decade, endpoint=False):
            best = max(best, norm_at(w), norm_at(-w))
        edge += 1
        history.append(best)
        if edge < stop:
            continue
        stagnant = len(history) > grid.stagnation_decades and \
            history[-1] == history[-1 - grid.stagnation_decades]
        if stagnant or edge >= stop + grid.max_extra_decades:
            break

    upper, _ = _kappa_envelope(constants.L, constants.C)
    return best, max(upper, best)


@dataclass(frozen=True)
class BoundParams:
    """Scalar constants of the growth envelopes (SI units, see field comments)."""

    alpha: float        # 1/s
    gamma: float        # 1/s
    rho: float          # 1/s
    c0: float           # max(||R||, ||G||)
    c1: float           # max(||L||, ||C||)
    kappa_lower: float
    kappa_upper: float
    theta: float        # 1/s
    nu_lower: float     # m/s, from kappa_upper
    nu_upper: float     # m/s, from kappa_lower
    b: float            # min(lambda_min L, lambda_min C)
    cl_normal: bool = False

    def envelope(self, s_real, d):
        """Sound growth envelope ``kappa e^{(|d|/nu)(|Re s| + theta)}`` for ``||Xi(s, d)||``."""
        return self.kappa_upper * math.exp(self.log_envelope_exponent(s_real, d))

    def log_envelope(self, s_real, d):
        return math.log(self.kappa_upper) + self.log_envelope_exponent(s_real, d)

    def log_envelope_exponent(self, s_real, d):
        return abs(d) / self.nu_lower * (abs(s_real) + self.theta)

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def bound_params(constants, grid=None):
    gamma, rho = accretivity_thresholds(constants)
    c0, c1 = lemma_delta_coeffs(constants)
    k_lo, k_hi = kappa_estimate(constants, grid)
    _, normal = _kappa_envelope(constants.L, constants.C)
    b = min(_lmin(constants.L), _lmin(constants.C))
    return BoundParams(
        alpha=max(rho, gamma), gamma=gamma, rho=rho, c0=c0, c1=c1,
        kappa_lower=k_lo, kappa_upper=k_hi, theta=c0 / c1,
        nu_lower=1.0 / (k_hi * c1), nu_upper=1.0 / (k_lo * c1), b=b,
        cl_normal=normal,
    )


def random_constants(n, rng, lossy=True, definite_losses=False, scale=1.0):
    """
    Random constants satisfying the symmetry / definiteness requirements.

    ``L`` and ``C`` are well-conditioned SPD matrices of order one.  ``R``
    and ``G`` are symmetric and, unless ``definite_losses``, may be
    indefinite.
    """
    def spd():
        A = rng.standard_normal((n, n))
        return (A @ A.T) / n + (0.3 + rng.random()) * np.eye(n)

    def sym(definite):
        A = rng.standard_normal((n, n))
        S = 0.25 * (A + A.T)
        if definite:
            S = S @ S.T + (0.05 + 0.5 * rng.random()) * np.eye(n)
        else:
            S = S + (0.2 + 0.5 * rng.random()) * np.eye(n)
        return S

    L, C = spd(), spd()
    if lossy:
        R, G = sym(definite_losses), sym(definite_losses)
    else:
        R = G = np.zeros((n, n))
    return LineConstants.create(scale * L, scale * C, scale * R, scale * G)
