"""
Two-port network matrices of a uniform multiconductor line.

Port convention: ``[V_out; I_out] = chain @ [V_in; I_in]`` and
``[V_in; I_in] = abcd @ [V_out; I_out]``; the admittance maps
``[V_in; V_out]`` to ``[I_in; -I_out]`` and the impedance is its inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matfun
from .errors import DomainError, SelfCheckMismatch, ShortCircuit, Singular
from .line import accretivity_thresholds

__all__ = [
    "PortMatrix", "AbcdBlocks", "abscissa", "exponent_matrix", "chain_matrix",
    "abcd_direct", "abcd_blockwise", "admittance", "impedance",
    "dual_constants", "lead_factor", "immittance_blocks", "flip_sign", "swap_rotation",
]

CHECK_TOL = 1e-8
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class PortMatrix:
    kind: str           # chain, abcd, admittance, impedance or lead
    value: np.ndarray   # 2n x 2n complex
    s: complex
    d: float

    @property
    def norm(self):
        return matfun.spectral_norm(self.value)


@dataclass(frozen=True)
class AbcdBlocks:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    Zc: np.ndarray
    Yc: np.ndarray
    sqrt_LR_CG: np.ndarray
    sqrt_CG_LR: np.ndarray
    s: complex
    d: float
    self_check_error: float = 0.0

    def assemble(self):
        return np.block([[self.A, self.B], [self.C, self.D]])


def abscissa(constants):
    """``max(rho, gamma)``: both series factors are accretive to the right of it."""
    gamma, rho = accretivity_thresholds(constants)
    return max(rho, gamma)


def _factors(constants, s):
    s = complex(s)
    Z = constants.L * s + constants.R
    Y = constants.C * s + constants.G
    return Z.astype(complex), Y.astype(complex)


def exponent_matrix(constants, s):
    """``[[0, L s + R], [C s + G, 0]]``."""
    Z, Y = _factors(constants, s)
    zero = np.zeros_like(Z)
    return np.block([[zero, Z], [Y, zero]])


def flip_sign(n):
    """``diag(-I, I)``; conjugating by it maps the ABCD matrix to the chain matrix."""
    return np.diag(np.r_[-np.ones(n), np.ones(n)]).astype(complex)


def swap_rotation(n):
    """``[[0, -I], [I, 0]]``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]]).astype(complex)


def chain_matrix(constants, s, d):
    """``Xi(s, -d) = expm(-d M(s))``, mapping input port data to output port data."""
    M = exponent_matrix(constants, s)
    return PortMatrix("chain", matfun.expm(-float(d) * M), complex(s), float(d))


def abcd_direct(constants, s, d):
    """``Xi(s, d) = expm(d M(s))``; the inverse of the chain matrix."""
    M = exponent_matrix(constants, s)
    return PortMatrix("abcd", matfun.expm(float(d) * M), complex(s), float(d))


def _effective_tol(tol, exponent):
    # scaling-and-squaring loses accuracy in proportion to the exponent's norm
    return max(tol, 1e3 * _EPS * np.linalg.norm(exponent, 1))


def _require_domain(constants, s, what):
    alpha = abscissa(constants)
    if not complex(s).real > alpha:
        raise DomainError(
            f"{what} needs Re(s) > alpha = {alpha:.6g}; got Re(s) = {complex(s).real:.6g}")
    return alpha


def abcd_blockwise(constants, s, d, check_tol=CHECK_TOL):
    """
    The four blocks of ``Xi(s, d)`` from principal square roots.

    With ``P = sqrt((Ls+R)(Cs+G))`` and ``Q = sqrt((Cs+G)(Ls+R))``::

        A = cosh(dP)            B = (Ls+R) Q^-1 sinh(dQ)
        C = (Cs+G) P^-1 sinh(dP)   D = cosh(dQ)

    The assembled matrix is always compared against :func:`abcd_direct`;
    a relative Frobenius gap above ``check_tol`` (widened for very large
    exponents) raises :class:`SelfCheckMismatch`.
    """
    _require_domain(constants, s, "blockwise ABCD decomposition")
    d = float(d)
    Zs, Ys = _factors(constants, s)
    P = matfun.sqrtm_scaled(Zs @ Ys)
    Q = matfun.sqrtm_scaled(Ys @ Zs)
    Zc = np.linalg.solve(Q.T, Zs.T).T
    Yc = np.linalg.solve(P.T, Ys.T).T
    coshP, sinhP = matfun.cosh_sinh(d * P)
    coshQ, sinhQ = matfun.cosh_sinh(d * Q)
    blocks = AbcdBlocks(A=coshP, B=Zc @ sinhQ, C=Yc @ sinhP, D=coshQ, Zc=Zc, Yc=Yc,
                        sqrt_LR_CG=P, sqrt_CG_LR=Q, s=complex(s), d=d)

    exponent = d * exponent_matrix(constants, s)
    direct = matfun.expm(exponent)
    err = np.linalg.norm(blocks.assemble() - direct) / np.linalg.norm(direct)
    if not err <= _effective_tol(check_tol, exponent):
        raise SelfCheckMismatch(
            f"blockwise and direct ABCD differ by {err:.3e} (relative) at s={s}, d={d}")
    return AbcdBlocks(**{**blocks.__dict__, "self_check_error": float(err)})


def immittance_blocks(blocks, Zs):
    """
    ``(D B^-1, B^-1)`` from the decaying exponential ``E = expm(-d Q)``.

    ``D B^-1 = coth(dQ) Zc^-1`` and ``B^-1 = csch(dQ) Zc^-1`` with
    ``coth(dQ) = (I + E^2)(I - E^2)^-1`` and ``csch(dQ) = 2 E (I - E^2)^-1``.
    Every factor stays bounded however fast the modes grow, whereas forming
    ``B`` first loses the slow modes once the growth rates differ by more
    than the double-precision range.
    """
    Q, d = blocks.sqrt_CG_LR, blocks.d
    n = Q.shape[0]
    eye = np.eye(n)
    E = matfun.expm(-d * Q)
    E2 = E @ E
    K = eye - E2
    if np.linalg.cond(K) * _EPS >= 1.0:
        raise Singular(f"B block is singular at s={blocks.s}, d={d}: sinh(dQ) has a zero eigenvalue")
    Zc_inv = Q @ np.linalg.solve(Zs, eye)
    coth = np.linalg.solve(K, eye + E2)      # K commutes with E2
    csch = 2.0 * np.linalg.solve(K, E)
    return coth @ Zc_inv, csch @ Zc_inv


def admittance(constants, s, d, check_tol=CHECK_TOL):
    """
    ``Y(s, d) = [[D B^-1, -B^-1], [-B^-1, D B^-1]]`` for ``d > 0`` and ``Re(s) > alpha``.

    The blocks come from :func:`immittance_blocks`, never from inverting ``B``.
    """
    d = float(d)
    if not d > 0.0:
        raise ShortCircuit(f"admittance undefined for d = {d}: a zero-length line is a short circuit")
    blocks = abcd_blockwise(constants, s, d, check_tol)
    Zs, _ = _factors(constants, s)
    DBinv, Binv = immittance_blocks(blocks, Zs)
    return PortMatrix("admittance", np.block([[DBinv, -Binv], [-Binv, DBinv]]),
                      complex(s), d)


def dual_constants(constants):
    """The dual line: ``L' = C, C' = L, R' = G, G' = R``."""
    return constants.dual()


def impedance(constants, s, d, check_tol=CHECK_TOL, cross_check=True):
    """
    ``Z(s, d) = Y(s, d)^-1`` obtained without inverting ``Y``.

    ``Z = J Y'(s, d) J^T`` where ``Y'`` is the admittance of the dual line and
    ``J = [[0, -I], [I, 0]]``.  With ``cross_check`` the product ``Z Y`` is
    compared with the identity.
    """
    d = float(d)
    if not d > 0.0:
        raise ShortCircuit(f"impedance undefined for d = {d}: a zero-length line is a short circuit")
    _require_domain(constants, s, "impedance matrix")
    J = swap_rotation(constants.n)
    Yd = admittance(dual_constants(constants), s, d, check_tol).value
    Z = J @ Yd @ J.T
    if cross_check:
        Y = admittance(constants, s, d, check_tol).value
        resid = np.linalg.norm(Z @ Y - np.eye(2 * constants.n)) / math.sqrt(2 * constants.n)
        # an ill-conditioned Y cannot confirm Z to better than cond(Y) * eps
        tol = max(_effective_tol(check_tol, d * exponent_matrix(constants, s)),
                  1e2 * _EPS * np.linalg.cond(Y))
        if not resid <= tol:
            raise SelfCheckMismatch(f"Z Y differs from I by {resid:.3e} at s={s}, d={d}")
    return PortMatrix("impedance", Z, complex(s), d)


def lead_factor(constants, s, d, nu):
    """
    ``H_d(s) = exp(-|d| s / nu) Xi(s, d)``.

    The scalar factor is folded into the exponent, ``expm(d M - (|d| s/nu) I)``,
    so neither factor overflows on its own when ``Re(s)`` is large.
    """
    d = float(d)
    M = d * exponent_matrix(constants, s)
    shift = abs(d) * complex(s) / float(nu)
    H = matfun.expm(M - shift * np.eye(M.shape[0]))
    return PortMatrix("lead", H, complex(s), d)
