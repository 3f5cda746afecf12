"""
Batch property checks over sampled frequencies and line lengths.

Each registered check draws its samples from a generator seeded by the
suite seed and the check id, so a report is reproducible bit for bit
regardless of execution order.  Equality checks report their largest
residual (pass when ``<= tolerance``); inequality checks report their
smallest normalized slack (pass when ``>= -tolerance``).
"""
from __future__ import annotations

import json
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import mpmath
import numpy as np
from scipy.optimize import fsolve

from . import matfun
from .errors import TelegraphError, UnknownCheck
from .line import (
    LineConstants, accretivity_thresholds, bound_params,
    lemma_delta_coeffs, lossless_exponential,
)
from .netparams import (
    abcd_blockwise, abcd_direct, abscissa, admittance, chain_matrix,
    exponent_matrix, flip_sign, impedance, lead_factor, swap_rotation,
)

__all__ = [
    "Region", "CheckSpec", "CheckReport", "CHECKS", "run_check", "run_suite",
    "default_suite", "load_suite", "report_to_json", "defective_witness",
    "imag_axis_grid", "imag_axis_norms", "imag_axis_stagnation",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 20240607
EQ_TOL = 1e-10
INEQ_TOL = 1e-9


@dataclass(frozen=True)
class Region:
    """Sampling region shared by the checks; each check reads what it needs."""

    beta: float | None = None       # defaults to max(0, alpha) + 0.5
    delta: float = 1.0
    epsilon: float = 0.5
    re_span: float = 10.0
    im_min: float = 1e-2
    im_max: float = 1e6
    d_max: float = 5.0
    omega_min: float = 1e-2
    omega_max: float = 1e9
    points_per_decade: int = 40
    stagnation: float = 0.01
    line_length: float = 1.0


@dataclass(frozen=True)
class CheckSpec:
    check_id: str
    samples: int | None = None
    tolerance: float | None = None
    seed: int = DEFAULT_SEED
    region: Region = field(default_factory=Region)


@dataclass
class CheckReport:
    check_id: str
    status: str
    worst_margin: float
    witness: dict | None
    samples_run: int
    quote_anchor: str
    kind: str
    tolerance: float
    seed: int
    notes: str = ""

    @property
    def passed(self):
        return self.status == "pass"


@dataclass(frozen=True)
class _Check:
    fn: object
    kind: str            # "equality" or "inequality"
    anchor: str
    samples: int
    tolerance: float | None = None


CHECKS: dict[str, _Check] = {}


def _register(check_id, kind, anchor, samples=100, tolerance=None):
    def deco(fn):
        CHECKS[check_id] = _Check(fn, kind, anchor, samples, tolerance)
        return fn
    return deco


class _Context:
    """Per-suite cache of the constants' derived quantities."""

    def __init__(self, constants, params=None):
        self.constants = constants
        self._params = params

    @property
    def params(self):
        if self._params is None:
            self._params = bound_params(self.constants)
        return self._params

    @property
    def alpha(self):
        return abscissa(self.constants)

    @property
    def n(self):
        return self.constants.n


def _witness(s=None, d=None, **extra):
    w = {"s_re": None, "s_im": None, "d": None}
    if s is not None:
        s = complex(s)
        w["s_re"], w["s_im"] = s.real, s.imag
    if d is not None:
        w["d"] = float(d)
    w.update(extra)
    return w


# --- sampling helpers --------------------------------------------------------

def _imag(rng, region):
    mag = 10.0 ** rng.uniform(math.log10(region.im_min), math.log10(region.im_max))
    return mag if rng.random() < 0.5 else -mag


def _s_right_of(rng, region, lo, open_=True):
    re = lo + region.re_span * (rng.random() if not open_ else 1.0 - rng.random())
    return complex(re, _imag(rng, region))


def _s_entire(rng, region):
    return complex(rng.uniform(-region.re_span, region.re_span), _imag(rng, region))


def _d(rng, region, lo=0.0):
    return lo + region.d_max * (1.0 - rng.random())


def _cond_scale(constants, s, d):
    # relative condition of the exponential grows with the exponent's norm
    return max(1.0, abs(d) * np.linalg.norm(exponent_matrix(constants, s), 1))


def _rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), np.finfo(float).tiny)


def _beta(ctx, region):
    return region.beta if region.beta is not None else max(0.0, ctx.alpha) + 0.5


def _eps_eff(ctx, region):
    # the spectral-inclusion lemmas need alpha + epsilon >= 0
    return max(region.epsilon, -ctx.alpha)


def _random_matrix(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def _random_unitary(rng, n):
    Q, R = np.linalg.qr(_random_matrix(rng, n))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


# --- kernel-level checks -----------------------------------------------------

def _series_expm(M, dps=40):
    with mpmath.workdps(dps):
        A = mpmath.matrix(M.tolist())
        n = A.rows
        term = mpmath.eye(n)
        total = mpmath.eye(n)
        k = 1
        while True:
            term = term * A / k
            total += term
            if mpmath.mnorm(term, 1) < mpmath.mpf(10) ** (-dps) * mpmath.mnorm(total, 1):
                break
            k += 1
        return np.array(total.tolist(), dtype=complex)


@_register("ExpmSeries", "equality", "expm(M) = sum_k M^k / k!  (||M|| <= 10)", samples=20,
           tolerance=1e-12)
def _check_expm_series(ctx, rng, spec, tol):
    for i in range(spec.samples):
        n = 1 + i % 5
        M = _random_matrix(rng, n)
        M *= 10.0 * rng.random() / np.linalg.norm(M, 2)
        yield _rel(matfun.expm(M), _series_expm(M)), _witness(sample=i, n=n)


@_register("SqrtmResidual", "equality",
           "X^2 = M and spec(X) in the open right half-plane", samples=100)
def _check_sqrtm(ctx, rng, spec, tol):
    for i in range(spec.samples):
        n = 1 + i % 6
        M = _random_matrix(rng, n) + 2.0 * n * np.eye(n)
        X = matfun.sqrtm_principal(M)
        r = _rel(X @ X, M)
        if np.min(matfun.spectrum(X).real) <= -1e-12:
            r = math.inf
        yield r, _witness(sample=i, n=n)


@_register("SqrtmJordan", "equality",
           "principal square root of a Jordan block (defective input)", samples=10)
def _check_sqrtm_jordan(ctx, rng, spec, tol):
    for i in range(spec.samples):
        lam = 1.0 if i == 0 else complex(rng.uniform(0.2, 3), rng.uniform(-2, 2))
        J = lam * np.eye(8) + np.eye(8, k=1)
        U = np.eye(8) if i == 0 else _random_unitary(rng, 8)
        M = U @ J @ U.conj().T
        X = matfun.sqrtm_principal(M)
        r = _rel(X @ X, M)
        if np.min(matfun.spectrum(X).real) <= -1e-12:
            r = math.inf
        yield r, _witness(sample=i, eigenvalue=str(lam))


@_register("InverseNormBound", "inequality", "||A^-1|| <= ||A||_F^(n-1) / |det A|")
def _check_inverse_norm(ctx, rng, spec, tol):
    for i in range(spec.samples):
        n = 1 + i % 6
        M = _random_matrix(rng, n) + n * np.eye(n)
        bound = matfun.inverse_norm_bound(M)
        true = matfun.spectral_norm(np.linalg.inv(M))
        yield bound / true - 1.0, _witness(sample=i, n=n)


@_register("NumericalRangeMin", "inequality",
           "lambda_min H(A) = min Re W(A) <= Re(x* A x) for unit x", samples=20)
def _check_numrange(ctx, rng, spec, tol):
    for i in range(spec.samples):
        n = 1 + i % 5
        M = _random_matrix(rng, n)
        lo = matfun.hermitian_part_min_eig(M)
        X = rng.standard_normal((n, 5000)) + 1j * rng.standard_normal((n, 5000))
        X /= np.linalg.norm(X, axis=0)
        quad = np.einsum("ij,ik,kj->j", X.conj(), M, X).real
        yield (float(np.min(quad)) - lo) / max(1.0, matfun.spectral_norm(M)), \
            _witness(sample=i, n=n)


@_register("ExpmUnitarySimilarity", "equality", "expm(U M U*) = U expm(M) U*",
           tolerance=1e-12)
def _check_expm_similarity(ctx, rng, spec, tol):
    for i in range(spec.samples):
        n = 1 + i % 6
        M = _random_matrix(rng, n)
        U = _random_unitary(rng, n)
        yield _rel(matfun.expm(U @ M @ U.conj().T), U @ matfun.expm(M) @ U.conj().T), \
            _witness(sample=i, n=n)


@_register("SinhSingularity", "equality",
           "sinh(X) singular iff spec(X) meets j*pi*Z", samples=40)
def _check_sinh_singular(ctx, rng, spec, tol):
    for i in range(spec.samples):
        n = 2 + i % 3
        lam = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        if i % 2 == 0:
            lam[0] = 1j * math.pi * int(rng.integers(-3, 4))
        V = np.eye(n) + 0.3 * _random_matrix(rng, n)
        X = V @ np.diag(lam) @ np.linalg.inv(V)
        S = matfun.sinhm(X)
        expected = np.prod(np.sinh(lam))
        scale = max(1.0, matfun.frobenius_norm(S) ** n)
        yield abs(matfun.det(S) - expected) / scale, _witness(sample=i, singular=bool(i % 2 == 0))


# --- line-level checks -------------------------------------------------------

@_register("AlphaIdentity", "equality",
           "alpha = max(rho, gamma) = -min of the four eigenvalue ratios", samples=1)
def _check_alpha(ctx, rng, spec, tol):
    c = ctx.constants
    lm = lambda M: np.linalg.eigvalsh(M)
    ratios = [lm(c.G)[0] / lm(c.C)[-1], lm(c.G)[0] / lm(c.C)[0],
              lm(c.R)[0] / lm(c.L)[-1], lm(c.R)[0] / lm(c.L)[0]]
    alpha_direct = -min(ratios)
    p = ctx.params
    r = abs(p.alpha - max(p.rho, p.gamma)) + abs(p.alpha - alpha_direct) / max(1.0, abs(alpha_direct))
    yield r, _witness()


@_register("Accretivity", "inequality",
           "Ls+R and Cs+G accretive for Re(s) > alpha", samples=200)
def _check_accretive(ctx, rng, spec, tol):
    c = ctx.constants
    for _ in range(spec.samples):
        s = _s_right_of(rng, spec.region, ctx.alpha + 1e-6)
        m = min(matfun.hermitian_part_min_eig(c.L * s + c.R),
                matfun.hermitian_part_min_eig(c.C * s + c.G))
        yield m, _witness(s=s)


@_register("DeltaNormBound", "inequality",
           "||[[0, L t + R], [C t + G, 0]]|| <= c1 |t| + c0", samples=401)
def _check_delta(ctx, rng, spec, tol):
    c0, c1 = lemma_delta_coeffs(ctx.constants)
    for t in np.linspace(-10.0, 10.0, spec.samples):
        lhs = matfun.spectral_norm(exponent_matrix(ctx.constants, t))
        rhs = c1 * abs(t) + c0
        yield (rhs - lhs) / max(rhs, 1.0), _witness(s=t)


@_register("KappaBracket", "inequality",
           "1 <= kappa <= kappa_upper with kappa = sup_w ||exp(j w [[0, L], [C, 0]])||",
           samples=10000)
def _check_kappa(ctx, rng, spec, tol):
    p = ctx.params
    yield p.kappa_lower - 1.0, _witness(omega=0.0)
    yield (p.kappa_upper - p.kappa_lower) / p.kappa_upper, _witness()
    omegas = np.sign(rng.standard_normal(spec.samples)) * \
        10.0 ** rng.uniform(-3, 9, spec.samples)
    worst, where = math.inf, None
    for w in omegas:
        m = 1.0 - matfun.spectral_norm(lossless_exponential(ctx.constants, w)) / p.kappa_upper
        if m < worst:
            worst, where = m, w
    yield worst, _witness(omega=float(where))


@_register("LosslessParams", "equality", "R = G = 0 implies alpha = theta = c0 = 0", samples=1)
def _check_lossless(ctx, rng, spec, tol):
    c = ctx.constants.lossless()
    gamma, rho = accretivity_thresholds(c)
    c0, c1 = lemma_delta_coeffs(c)
    yield abs(max(rho, gamma)) + abs(c0 / c1) + abs(c0), _witness()


@_register("DualParams", "equality", "kappa' = kappa, theta' = theta, nu' = nu for the dual line",
           samples=1)
def _check_dual_params(ctx, rng, spec, tol):
    p, q = ctx.params, bound_params(ctx.constants.dual())
    r = max(abs(p.kappa_upper - q.kappa_upper) / p.kappa_upper,
            abs(p.kappa_lower - q.kappa_lower) / p.kappa_lower,
            abs(p.theta - q.theta) / max(p.theta, 1.0),
            abs(p.nu_lower - q.nu_lower) / p.nu_lower)
    yield r, _witness()


# --- network-matrix checks ---------------------------------------------------

@_register("BlockwiseDirect", "equality",
           "expm(d [[0, Ls+R], [Cs+G, 0]]) = [[A_d, B_d], [C_d, D_d]] on Re(s) > alpha")
def _check_blockwise(ctx, rng, spec, tol):
    c = ctx.constants
    for _ in range(spec.samples):
        s = _s_right_of(rng, spec.region, ctx.alpha + 0.1)
        d = _d(rng, spec.region)
        blocks = abcd_blockwise(c, s, d, check_tol=math.inf)
        yield blocks.self_check_error / _cond_scale(c, s, d), _witness(s=s, d=d)


@_register("InverseIdentity", "equality", "Xi(s, -d) Xi(s, d) = I")
def _check_inverse(ctx, rng, spec, tol):
    c = ctx.constants
    for _ in range(spec.samples):
        s, d = _s_entire(rng, spec.region), _d(rng, spec.region)
        F = chain_matrix(c, s, d).value
        B = abcd_direct(c, s, d).value
        r = np.linalg.norm(F @ B - np.eye(2 * c.n)) / (np.linalg.norm(F, 2) * np.linalg.norm(B, 2))
        yield r / _cond_scale(c, s, d), _witness(s=s, d=d)


@_register("ChainAbcdNormEquality", "equality",
           "Xi(s, d) = U* Xi(s, -d) U with U = diag(-I, I), so the norms agree")
def _check_prop2(ctx, rng, spec, tol):
    c = ctx.constants
    U = flip_sign(c.n)
    for _ in range(spec.samples):
        s, d = _s_entire(rng, spec.region), _d(rng, spec.region)
        F = chain_matrix(c, s, d).value
        B = abcd_direct(c, s, d).value
        nf, nb = matfun.spectral_norm(F), matfun.spectral_norm(B)
        r = max(abs(nf - nb) / nb, _rel(U @ F @ U, B) / _cond_scale(c, s, d))
        yield r, _witness(s=s, d=d)


@_register("BlockCommutation", "equality",
           "A_d B_d = B_d D_d and D_d B_d^-1 = B_d^-1 A_d")
def _check_commutation(ctx, rng, spec, tol):
    c = ctx.constants
    for _ in range(spec.samples):
        s = _s_right_of(rng, spec.region, ctx.alpha + 0.1)
        d = _d(rng, spec.region)
        k = abcd_blockwise(c, s, d, check_tol=math.inf)
        nA, nB, nD = (np.linalg.norm(X) for X in (k.A, k.B, k.D))
        r1 = np.linalg.norm(k.A @ k.B - k.B @ k.D) / (nA * nB + nB * nD)
        Binv = -admittance(c, s, d, check_tol=math.inf).value[:c.n, c.n:]
        nBi = np.linalg.norm(Binv)
        r2 = np.linalg.norm(k.D @ Binv - Binv @ k.A) / (nD * nBi + nBi * nA)
        yield max(r1, r2) / _cond_scale(c, s, d), _witness(s=s, d=d)


@_register("AdmittancePortRelation", "equality",
           "[I_in; -I_out] = Y(s, d) [V_in; V_out] with [V_out; I_out] = Xi(s, -d) [V_in; I_in]")
def _check_admittance_ports(ctx, rng, spec, tol):
    c, n = ctx.constants, ctx.n
    for _ in range(spec.samples):
        s = _s_right_of(rng, spec.region, ctx.alpha + 0.1)
        d = _d(rng, spec.region)
        x_in = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
        x_out = chain_matrix(c, s, d).value @ x_in
        Y = admittance(c, s, d, check_tol=math.inf).value
        lhs = Y @ np.r_[x_in[:n], x_out[:n]]
        rhs = np.r_[x_in[n:], -x_out[n:]]
        scale = np.linalg.norm(Y, 2) * np.linalg.norm(np.r_[x_in[:n], x_out[:n]]) + np.linalg.norm(rhs)
        yield np.linalg.norm(lhs - rhs) / scale / _cond_scale(c, s, d), _witness(s=s, d=d)


@_register("ImpedanceDuality", "equality",
           "Z(s, d) Y(s, d) = I and ||Z(s, d)|| = ||Y'(s, d)|| for the dual line")
def _check_impedance(ctx, rng, spec, tol):
    c = ctx.constants
    dual = c.dual()
    for _ in range(spec.samples):
        s = _s_right_of(rng, spec.region, ctx.alpha + 0.1)
        d = _d(rng, spec.region)
        Z = impedance(c, s, d, check_tol=math.inf, cross_check=False).value
        Y = admittance(c, s, d, check_tol=math.inf).value
        Yd = admittance(dual, s, d, check_tol=math.inf).value
        r1 = np.linalg.norm(Z @ Y - np.eye(2 * c.n), 2) / (np.linalg.norm(Z, 2) * np.linalg.norm(Y, 2))
        nz, nyd = matfun.spectral_norm(Z), matfun.spectral_norm(Yd)
        yield max(r1 / _cond_scale(c, s, d), abs(nz - nyd) / nyd), _witness(s=s, d=d)


@_register("GrowthBound", "inequality",
           "||Xi(s, d)|| <= kappa exp(|d|/nu (|Re s| + theta))", samples=1000)
def _check_growth(ctx, rng, spec, tol):
    c, p = ctx.constants, ctx.params
    for _ in range(spec.samples):
        s, d = _s_entire(rng, spec.region), _d(rng, spec.region)
        if rng.random() < 0.5:
            d = -d
        lhs = math.log(matfun.spectral_norm(abcd_direct(c, s, d).value))
        yield 1.0 - math.exp(lhs - p.log_envelope(s.real, d)), _witness(s=s, d=d)


@_register("LeadFactorBound", "inequality",
           "||exp(-|d| s/nu) Xi(s, d)|| <= kappa exp(|d| theta / nu) on Re(s) > 0", samples=200)
def _check_lead(ctx, rng, spec, tol):
    c, p = ctx.constants, ctx.params
    for _ in range(spec.samples):
        s = _s_right_of(rng, spec.region, 0.0)
        d = _d(rng, spec.region)
        H = lead_factor(c, s, d, p.nu_lower).value
        bound = math.log(p.kappa_upper) + abs(d) * p.theta / p.nu_lower
        yield 1.0 - math.exp(math.log(matfun.spectral_norm(H)) - bound), _witness(s=s, d=d)


@_register("AdmittanceGrowthShape", "inequality",
           "||Y(s, d)|| <= M exp(n d/nu Re(s + theta)) on Re(s) >= beta, d >= delta",
           samples=40)
def _check_admittance_growth(ctx, rng, spec, tol):
    c, p, reg = ctx.constants, ctx.params, spec.region
    beta = _beta(ctx, reg)
    res = np.linspace(beta, beta + reg.re_span, spec.samples)
    for d in (reg.delta, 2.0 * reg.delta):
        gaps, where = [], []
        for re in res:
            g_best, w_best = -math.inf, None
            for _ in range(4):
                s = complex(re, _imag(rng, reg))
                y = matfun.spectral_norm(admittance(c, s, d, check_tol=math.inf).value)
                g = math.log(y) - c.n * d / p.nu_lower * (re + p.theta)
                if g > g_best:
                    g_best, w_best = g, s
            gaps.append(g_best)
            where.append(w_best)
        half = len(gaps) // 2
        near, far = max(gaps[:half]), max(gaps[half:])
        i = half + int(np.argmax(gaps[half:]))
        yield (near - far) / max(1.0, abs(near)), _witness(s=where[i], d=d, log_gap=far)


@_register("ImagAxisStability", "inequality",
           "sup_w ||Xi(jw, d)|| <= kappa e^{|d| theta / nu}; sup_w ||Y(jw, d)||, ||Z(jw, d)|| "
           "finite when R, G > 0", samples=1)
def _check_imag_axis(ctx, rng, spec, tol):
    # Gates on finiteness and the explicit chain bound.  The running-max
    # stagnation of each series is reported in the witness but does not
    # decide the status: on lightly damped lines the resonance peaks are far
    # narrower than any fixed log grid, so it measures grid resolution.
    c, p, reg = ctx.constants, ctx.params, spec.region
    d = reg.line_length
    lossy = bool(np.linalg.eigvalsh(c.R)[0] > 0 and np.linalg.eigvalsh(c.G)[0] > 0)
    omegas = imag_axis_grid(reg.omega_min, reg.omega_max, reg.points_per_decade)
    series = imag_axis_norms(c, d, omegas, immittances=lossy)
    stagnation = {k: imag_axis_stagnation(omegas, v) for k, v in series.items()}
    bound = math.log(p.kappa_upper) + abs(d) * p.theta / p.nu_lower
    xi = series["chain"]
    i_bad = int(np.argmax(xi))
    margins = [(1.0 - math.exp(math.log(xi[i_bad]) - bound),
                _witness(s=1j * omegas[i_bad], d=d, quantity="chain_bound",
                         stagnation=stagnation))]
    for name, vals in series.items():
        if not np.all(np.isfinite(vals)):
            k = int(np.argmin(np.isfinite(vals)))
            margins.append((-math.inf, _witness(s=1j * omegas[k], d=d, quantity=name,
                                                stagnation=stagnation)))
    yield min(margins, key=lambda m: m[0])


def imag_axis_grid(omega_min, omega_max, points_per_decade):
    decades = math.log10(omega_max / omega_min)
    return np.logspace(math.log10(omega_min), math.log10(omega_max),
                       int(round(decades * points_per_decade)) + 1)


def imag_axis_stagnation(omegas, values, decades=3.0):
    """
    Relative growth of the running maximum over the last ``decades`` of the grid.

    ``(max over all - max before the window) / max before the window``;
    ``inf`` when a value is not finite.
    """
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        return math.inf
    before = omegas <= omegas[-1] / 10.0 ** decades
    m_before = float(np.max(values[before]))
    return (float(np.max(values)) - m_before) / m_before


def imag_axis_norms(constants, d, omegas, immittances=True):
    """Spectral norms of the ABCD (and optionally Y, Z) matrices along ``s = j w``."""
    out = {"chain": np.array([matfun.spectral_norm(abcd_direct(constants, 1j * w, d).value)
                              for w in omegas])}
    if immittances:
        dual = constants.dual()
        J = swap_rotation(constants.n)
        ys, zs = [], []
        for w in omegas:
            ys.append(matfun.spectral_norm(admittance(constants, 1j * w, d).value))
            Yd = admittance(dual, 1j * w, d).value
            zs.append(matfun.spectral_norm(J @ Yd @ J.T))
        out["admittance"] = np.array(ys)
        out["impedance"] = np.array(zs)
    return out


@_register("SpectralInclusion", "inequality",
           "spec sqrt((Cs+G)(Ls+R)) in Re >= b*epsilon for Re(s) >= alpha + epsilon",
           samples=500)
def _check_spectral_inclusion(ctx, rng, spec, tol):
    c, p = ctx.constants, ctx.params
    eps = _eps_eff(ctx, spec.region)
    floor = p.b * eps
    for _ in range(spec.samples):
        s = _s_right_of(rng, spec.region, ctx.alpha + eps, open_=False)
        k = abcd_blockwise(c, s, 1.0, check_tol=math.inf)
        lo = float(np.min(matfun.spectrum(k.sqrt_CG_LR).real))
        yield (lo - floor) / floor, _witness(s=s)


def _log_abs_det_sinh(Q, d):
    # det sinh(dQ) is the product of sinh(d lambda) over spec(Q) with multiplicity;
    # forming sinh(dQ) and taking its determinant loses the slow modes once
    # the growth rates span more than the double-precision range
    lam = d * matfun.spectrum(Q)
    # log|sinh z| = Re z + log|1 - e^{-2z}| - log 2 for Re z > 0
    return float(np.sum(lam.real + np.log(np.abs(-np.expm1(-2.0 * lam))) - math.log(2.0)))


@_register("SinhDetFloor", "inequality",
           "|det sinh(d sqrt((Cs+G)(Ls+R)))| >= (delta b epsilon)^n", samples=500)
def _check_sinh_det(ctx, rng, spec, tol):
    c, p, reg = ctx.constants, ctx.params, spec.region
    eps = _eps_eff(ctx, reg)
    log_floor = c.n * math.log(reg.delta * p.b * eps)
    for _ in range(spec.samples):
        s = _s_right_of(rng, reg, ctx.alpha + eps, open_=False)
        d = _d(rng, reg, lo=reg.delta)
        k = abcd_blockwise(c, s, d, check_tol=math.inf)
        gap = _log_abs_det_sinh(k.sqrt_CG_LR, d) - log_floor
        yield min(math.expm1(min(gap, 1.0)), 1.0), _witness(s=s, d=d)


@_register("BdDetFloor", "inequality",
           "inf |det B_d(s)| > 0 over Re(s) >= beta, d >= delta", samples=500)
def _check_bd_det(ctx, rng, spec, tol):
    c, p, reg = ctx.constants, ctx.params, spec.region
    beta = _beta(ctx, reg)
    log_floor = c.n * math.log(reg.delta * p.b * (beta - ctx.alpha))
    for _ in range(spec.samples):
        s = _s_right_of(rng, reg, beta, open_=False)
        d = _d(rng, reg, lo=reg.delta)
        k = abcd_blockwise(c, s, d, check_tol=math.inf)
        # det B = det Zc det sinh(dQ); the floor carries the same det Zc factor
        gap = _log_abs_det_sinh(k.sqrt_CG_LR, d) - log_floor
        log_det_b = math.log(abs(matfun.det(k.Zc))) + _log_abs_det_sinh(k.sqrt_CG_LR, d)
        if not math.isfinite(log_det_b):
            gap = -math.inf
        yield min(math.expm1(min(gap, 1.0)), 1.0), _witness(s=s, d=d, log_abs_det_b=log_det_b)


@_register("DefectiveBlockwise", "equality",
           "blockwise ABCD on a line whose (Ls+R)(Cs+G) has a Jordan block", samples=3)
def _check_defective(ctx, rng, spec, tol):
    for i in range(spec.samples):
        consts, s, cond_v = defective_witness(rng)
        d = 0.5 + 2.0 * rng.random()
        k = abcd_blockwise(consts, s, d, check_tol=math.inf)
        yield k.self_check_error, _witness(s=s, d=d, eigvec_cond=cond_v)


def defective_witness(rng, max_tries=200):
    """
    A 2-conductor line and a point ``s`` where ``(Ls+R)(Cs+G)`` is defective.

    Uses ``L = C = I``, diagonal ``G`` and a coupled ``R``, and solves for
    ``Im(s)`` and the coupling term so that the product's two eigenvalues
    coincide while the product itself is not a multiple of the identity.
    Returns ``(constants, s, eigenvector_condition_number)``.
    """
    def disc(p, sigma, r1, r2, g1, g2):
        w, x = p
        s = complex(sigma, w)
        P = np.array([[s + r1, x], [x, s + r2]]) @ np.diag([s + g1, s + g2])
        z = np.trace(P) ** 2 - 4.0 * np.linalg.det(P)
        return [z.real, z.imag]

    for _ in range(max_tries):
        r1, r2, g1, g2 = rng.uniform(0.1, 2.0, 4)
        sigma = rng.uniform(0.0, 1.0)
        p0 = [rng.uniform(-3, 3), rng.uniform(-2, 2)]
        sol, _, ier, _ = fsolve(disc, p0, args=(sigma, r1, r2, g1, g2),
                                full_output=True, xtol=1e-15)
        if ier != 1:
            continue
        w, x = sol
        consts = LineConstants.create(np.eye(2), np.eye(2),
                                      np.array([[r1, x], [x, r2]]), np.diag([g1, g2]))
        s = complex(sigma, w)
        if not s.real > abscissa(consts) + 1e-3 or abs(x) < 1e-3:
            continue
        P = (consts.L * s + consts.R) @ (consts.C * s + consts.G)
        _, V = np.linalg.eig(P)
        cond_v = float(np.linalg.cond(V))
        if cond_v > 1e5:
            return consts, s, cond_v
    raise TelegraphError("no defective witness found")


# --- drivers -----------------------------------------------------------------

def _check_seed(seed, check_id):
    return (int(seed) * 1_000_003 + zlib.crc32(check_id.encode())) % 2 ** 63


def run_check(constants, spec, params=None, _ctx=None):
    """Run one check; kernel errors become a failing report with the offending sample."""
    if spec.check_id not in CHECKS:
        raise UnknownCheck(f"unknown check id {spec.check_id!r}")
    check = CHECKS[spec.check_id]
    samples = check.samples if spec.samples is None else int(spec.samples)
    default_tol = check.tolerance
    if default_tol is None:
        default_tol = EQ_TOL if check.kind == "equality" else INEQ_TOL
    tol = default_tol if spec.tolerance is None else float(spec.tolerance)
    spec = replace(spec, samples=samples, tolerance=tol)
    ctx = _ctx or _Context(constants, params)
    rng = np.random.default_rng(_check_seed(spec.seed, spec.check_id))

    worst = -math.inf if check.kind == "equality" else math.inf
    witness, count, notes, status = None, 0, "", None
    gen = check.fn(ctx, rng, spec, tol)
    last = None
    try:
        for margin, w in gen:
            count += 1
            last = w
            margin = float(margin)
            if math.isnan(margin):
                margin = math.inf if check.kind == "equality" else -math.inf
            if (check.kind == "equality" and margin > worst) or \
                    (check.kind == "inequality" and margin < worst):
                worst, witness = margin, w
    except TelegraphError as exc:
        status = "fail"
        notes = f"{type(exc).__name__}: {exc}"
        witness = dict(last or _witness(), error=type(exc).__name__, after_sample=count)
        worst = math.inf if check.kind == "equality" else -math.inf

    if status is None:
        ok = worst <= tol if check.kind == "equality" else worst >= -tol
        status = "pass" if ok else "fail"
    return CheckReport(check_id=spec.check_id, status=status, worst_margin=worst,
                       witness=witness, samples_run=count, quote_anchor=check.anchor,
                       kind=check.kind, tolerance=tol, seed=spec.seed, notes=notes)


def run_suite(constants, suite, params=None, workers=1):
    """Run every spec in ``suite``; order of the reports follows the suite."""
    suite = list(suite)
    for spec in suite:
        if spec.check_id not in CHECKS:
            raise UnknownCheck(f"unknown check id {spec.check_id!r}")
    if not suite:
        return []
    ctx = _Context(constants, params)
    if workers <= 1:
        return [run_check(constants, spec, _ctx=ctx) for spec in suite]
    ctx.params  # computed once before fanning out
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sp: run_check(constants, sp, _ctx=ctx), suite))


def default_suite(seed=DEFAULT_SEED, region=None):
    region = region or Region()
    return [CheckSpec(check_id=k, seed=seed, region=region) for k in CHECKS]


def load_suite(doc, seed=DEFAULT_SEED):
    """
    Build a suite from a parsed JSON document::

        {"seed": 7, "region": {...}, "checks": [{"check_id": "GrowthBound", "samples": 50}, ...]}

    A check entry may override ``samples``, ``tolerance``, ``seed`` and ``region``.
    """
    if isinstance(doc, list):
        doc = {"checks": doc}
    seed = int(doc.get("seed", seed))
    base = Region(**doc.get("region", {}))
    suite = []
    for entry in doc.get("checks", []):
        if isinstance(entry, str):
            entry = {"check_id": entry}
        cid = entry["check_id"]
        if cid not in CHECKS:
            raise UnknownCheck(f"unknown check id {cid!r}")
        region = replace(base, **entry.get("region", {}))
        suite.append(CheckSpec(check_id=cid, samples=entry.get("samples"),
                               tolerance=entry.get("tolerance"),
                               seed=int(entry.get("seed", seed)), region=region))
    return suite


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(x.item())
    return x


def report_to_json(reports, seed=None):
    rows = [_jsonable(asdict(r)) for r in reports]
    summary = {"total": len(reports),
               "passed": sum(r.passed for r in reports),
               "failed": sum(not r.passed for r in reports)}
    doc = {"summary": summary, "checks": rows}
    if seed is not None:
        doc["seed"] = seed
    return json.dumps(doc, indent=2, sort_keys=False)
