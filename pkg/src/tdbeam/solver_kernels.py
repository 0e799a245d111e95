"""Convex kernels: max-min covariance SDP, trust-region SCA step, time LP.

Both SDP kernels run the block interior-point method in :mod:`tdbeam._ipm`
on data normalized to O(1) and then certify the returned point with a
Lagrangian bound that holds for any non-negative multipliers, so the
reported gap does not depend on how accurately the IPM solved its dual.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from ._ipm import solve_block_maxmin
from .channel import ChannelSet

__all__ = [
    "Covariance",
    "SolverCertificate",
    "solve_multibeam",
    "solve_sca_subproblem",
    "solve_time_lp",
    "mrt_covariance",
    "isotropic_covariance",
    "multibeam_dual_bound",
    "FEAS_TOL",
    "OPT_TOL",
]

log = logging.getLogger(__name__)

FEAS_TOL = 1e-8
OPT_TOL = 1e-6
# width (normalized RF units) used for a zero trust radius
_PIN_WIDTH = 1e-9


@dataclass(frozen=True, eq=False)
class Covariance:
    """Hermitian PSD transmit covariance (watts) with a trace budget."""

    matrix: np.ndarray
    trace_budget: float

    def __post_init__(self):
        S = np.array(self.matrix, dtype=complex)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError("covariance must be square")
        tr = float(np.trace(S).real)
        if np.max(np.abs(S - S.conj().T), initial=0.0) > 1e-10:
            raise ValueError("covariance is not Hermitian")
        if S.size and np.linalg.eigvalsh(S)[0] < -1e-8 * max(tr, 0.0):
            raise ValueError("covariance is not positive semidefinite")
        if tr > self.trace_budget + 1e-8:
            raise ValueError(f"trace {tr} exceeds budget {self.trace_budget}")
        S.setflags(write=False)
        object.__setattr__(self, "matrix", S)

    @classmethod
    def project(cls, matrix, trace_budget: float) -> "Covariance":
        """Nearest-in-spirit feasible covariance: symmetrize, clip, rescale."""
        S = np.asarray(matrix, dtype=complex)
        S = 0.5 * (S + S.conj().T)
        ev, U = np.linalg.eigh(S)
        ev = np.clip(ev, 0.0, None)
        if ev.sum() > trace_budget:
            ev *= trace_budget / ev.sum()
        S = (U * ev) @ U.conj().T
        S = 0.5 * (S + S.conj().T)
        return cls(S, trace_budget)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def rank(self) -> int:
        ev = np.linalg.eigvalsh(self.matrix)
        return int(np.sum(ev > 1e-9 * max(ev[-1], 1e-300)))


@dataclass
class SolverCertificate:
    objective: float
    primal_residual: float
    duality_gap_bound: Optional[float]   # None when unavailable
    status: str                          # "optimal" | "max_iters" | "infeasible"
    iterations: int = 0
    dual_weights: Optional[np.ndarray] = field(default=None, repr=False)


def mrt_covariance(channels: ChannelSet, k: int, p_max: float) -> Covariance:
    """Rank-one beam aimed at ER ``k``: p_max h h^H / ||h||^2."""
    h = channels.column(k)
    return Covariance.project(p_max * np.outer(h, h.conj()) / np.vdot(h, h).real, p_max)


def isotropic_covariance(num_antennas: int, p_max: float) -> Covariance:
    return Covariance(np.eye(num_antennas, dtype=complex) * (p_max / num_antennas), p_max)


def multibeam_dual_bound(channels: ChannelSet, weights, p_max: float) -> float:
    """Upper bound (mW) on the max-min RF power for simplex weights."""
    w = np.asarray(weights, dtype=float)
    A = (channels.entries.conj().T * w) @ channels.entries
    return channels.rf_unit_scale * p_max * float(np.linalg.eigvalsh(A)[-1])


def _normalized(channels: ChannelSet):
    hs = float(np.sqrt(np.max(channels.gains)))
    return channels.entries / hs, hs


def _lagrangian_bound(rows, weights, lo, hi, z_epi, z_up, z_lo):
    """Upper bound on the normalized max-min value from any multipliers >= 0."""
    w = np.clip(z_epi, 0.0, None)
    tot = w.sum()
    if tot <= 0:
        return np.inf
    w, u, l = w / tot, np.clip(z_up, 0.0, None) / tot, np.clip(z_lo, 0.0, None) / tot
    coef = weights * w[:, None] - u + l                       # (K, N)
    bound = float(np.sum(u * hi) - np.sum(l * lo))
    for n in range(weights.shape[1]):
        A = (rows.conj().T * coef[:, n]) @ rows
        bound += max(0.0, float(np.linalg.eigvalsh(0.5 * (A + A.conj().T))[-1]))
    return bound


def _covariance_residual(S: np.ndarray, p_max: float) -> float:
    ev = np.linalg.eigvalsh(S)
    return max(0.0, -ev[0], float(np.trace(S).real) - p_max) / p_max


def _certify_multibeam(channels, p_max, S_unit, epi_duals):
    cov = Covariance.project(p_max * S_unit, p_max)
    obj = float(channels.rf_mw(cov).min())
    w = np.clip(epi_duals, 0.0, None)
    w = w / w.sum() if w.sum() > 0 else np.full(channels.num_ers, 1.0 / channels.num_ers)
    ub = multibeam_dual_bound(channels, w, p_max)
    gap = (ub - obj) / obj if obj > 0 else np.inf
    return cov, obj, w, gap


def solve_multibeam(channels: ChannelSet, p_max: float, tol: float = OPT_TOL, *,
                    feas_tol: float = FEAS_TOL, max_iters: int = 100):
    """Covariance maximizing the smallest received RF power.

    Returns ``(Covariance, SolverCertificate)``; the certificate objective is
    the achieved min RF power in mW and ``duality_gap_bound`` is relative.
    """
    if not p_max > 0:
        raise ValueError("p_max must be positive")
    rows, hs = _normalized(channels)
    K = channels.num_ers
    res = solve_block_maxmin(rows, np.ones((K, 1)), feas_tol=feas_tol, gap_tol=0.05 * tol,
                             max_iters=max_iters)
    cov, obj, w, gap = _certify_multibeam(channels, p_max, res.S[0], res.epi_duals)
    iters = res.iterations
    M = channels.num_antennas
    for attempt in range(2):
        if gap <= tol:
            break
        # The IPM can stall near 1e-6 when S* is rank deficient. The problem
        # is invariant under a unitary change of antenna basis while the
        # rounding is not, so re-solve in a fixed rotated basis.
        rng = np.random.default_rng(attempt)
        Q, _ = np.linalg.qr(rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M)))
        red = solve_block_maxmin(rows @ Q, np.ones((K, 1)), feas_tol=feas_tol,
                                 gap_tol=0.05 * tol, max_iters=max_iters)
        iters += red.iterations
        cand = _certify_multibeam(channels, p_max, Q @ red.S[0] @ Q.conj().T, red.epi_duals)
        if cand[3] < gap:
            cov, obj, w, gap = cand
    pres = _covariance_residual(cov.matrix, p_max)
    status = "optimal" if (gap <= tol and pres <= feas_tol) else "max_iters"
    if status != "optimal":
        log.warning("multibeam SDP stopped with gap %.3g after %d iterations", gap, iters)
    return cov, SolverCertificate(obj, pres, float(gap), status, iters, w)


def solve_sca_subproblem(coefs, centers, gamma: float, channels: ChannelSet, p_max: float,
                         durations, tol: float = OPT_TOL, *, feas_tol: float = FEAS_TOL,
                         max_iters: int = 100):
    """One linearized step of the per-slot covariance update.

    Maximizes ``min_k sum_n durations[n] * coefs[k, n] * rf[k, n]`` over
    per-slot covariances, where ``rf[k, n]`` is the RF power (mW) at ER k in
    slot n and must stay within ``gamma`` mW of ``centers[k, n]``.

    Returns ``(list of Covariance, SolverCertificate)``. The certificate
    objective is the linearized value at the returned point.
    """
    coefs = np.asarray(coefs, dtype=float)
    centers = np.asarray(centers, dtype=float)
    tau = np.asarray(durations, dtype=float)
    K, N = channels.num_ers, tau.size
    if coefs.shape != (K, N) or centers.shape != (K, N):
        raise ValueError(f"coefs and centers must be {K} x {N}")
    if gamma < 0:
        raise ValueError("trust radius must be non-negative")
    if np.any(coefs < 0) or np.any(tau < 0):
        raise ValueError("coefficients and durations must be non-negative")

    rows, hs = _normalized(channels)
    kappa = channels.rf_unit_scale * p_max * hs ** 2        # mW per normalized unit
    weights = tau[None, :] * coefs
    wscale = float(weights.max())
    wn = weights / wscale if wscale > 0 else weights
    half = max(gamma / kappa, _PIN_WIDTH)
    c = centers / kappa
    res = solve_block_maxmin(rows, wn, lo=c - half, hi=c + half, feas_tol=feas_tol,
                             gap_tol=0.05 * tol, max_iters=max_iters)

    covs = [Covariance.project(p_max * S, p_max) for S in res.S]
    rf = np.stack([channels.rf_mw(cv) for cv in covs], axis=1)       # (K, N)
    obj = float(np.min(np.sum(weights * rf, axis=1)))
    viol = max(0.0, float(np.max(np.abs(rf - centers) - max(gamma, _PIN_WIDTH * kappa))) / kappa)
    pres = max([viol] + [_covariance_residual(cv.matrix, p_max) for cv in covs])

    if res.status == "infeasible":
        return covs, SolverCertificate(obj, pres, None, "infeasible", res.iterations)
    bound = _lagrangian_bound(rows, wn, res.lo, res.hi, res.epi_duals, res.upper_duals,
                              res.lower_duals) * wscale * kappa
    if obj > 0:
        gap = (bound - obj) / obj
    else:
        gap = bound - obj if np.isfinite(bound) else np.inf
    if pres > 1e3 * feas_tol and res.status != "optimal":
        # never reached the trust region: treat as infeasible
        return covs, SolverCertificate(obj, pres, None, "infeasible", res.iterations)
    status = "optimal" if (gap <= tol and pres <= feas_tol) else "max_iters"
    return covs, SolverCertificate(obj, pres, float(gap), status, res.iterations)


def solve_time_lp(dc_table, total_time: float, tol: float = OPT_TOL):
    """Durations on the scaled simplex maximizing ``min_k sum_n tau_n dc[k, n]``.

    Solved with the HiGHS dual simplex so the returned point is a vertex and
    deterministic. An all-zero row forces the optimum to zero; uniform
    durations are returned then.
    """
    D = np.asarray(dc_table, dtype=float)
    if D.ndim != 2:
        raise ValueError("dc_table must be K x N")
    if not total_time > 0:
        raise ValueError("total_time must be positive")
    if np.any(D < 0):
        raise ValueError("dc_table must be non-negative")
    K, N = D.shape
    uniform = np.full(N, total_time / N)
    scale = float(D.max()) if D.size else 0.0
    if scale == 0.0 or np.any(np.all(D == 0, axis=1)):
        obj = float(np.min(D @ uniform))
        return uniform, SolverCertificate(obj, 0.0, 0.0, "optimal", 0, np.full(K, 1.0 / K))

    Dn = D / scale
    # variables [tau_1..tau_N, E]; minimize -E
    c = np.zeros(N + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-Dn, np.ones((K, 1))])
    A_eq = np.concatenate([np.ones(N), [0.0]])[None, :]
    bounds = [(0, None)] * N + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(K), A_eq=A_eq, b_eq=[1.0], bounds=bounds,
                  method="highs-ds")
    if res.status != 0:
        log.warning("time LP: %s", res.message)
        obj = float(np.min(D @ uniform))
        return uniform, SolverCertificate(obj, np.inf, None, "max_iters", int(res.nit))
    x = np.clip(res.x[:N], 0.0, None)
    x = x / x.sum()
    tau = total_time * x
    obj = float(np.min(D @ tau))
    w = np.clip(-np.asarray(res.ineqlin.marginals), 0.0, None)
    w = w / w.sum() if w.sum() > 0 else np.full(K, 1.0 / K)
    ub = total_time * float(np.max(w @ D))   # weak duality: any simplex weights
    gap = (ub - obj) / obj if obj > 0 else ub - obj
    pres = abs(float(tau.sum()) - total_time) / total_time
    status = "optimal" if gap <= max(tol, 1e-9) else "max_iters"
    return tau, SolverCertificate(obj, pres, float(gap), status, int(res.nit), w)
