"""Primal-dual interior-point method for block max-min SDPs.

Solves, for Hermitian ``S_1..S_N`` (M x M) and a scalar ``E``::

    maximize    E
    subject to  sum_n w[k, n] <S_n, H_k>  >= E          k = 1..K
                tr(S_n) <= 1                            n = 1..N
                lo[k, n] <= <S_n, H_k> <= hi[k, n]
                S_n >= 0 (PSD)

with ``H_k = h_k h_k^H``. The multi-beam problem is N = 1 with unit weights
and open bounds; the trust-region subproblem uses all rows.

The iteration is a Mehrotra predictor-corrector with Nesterov-Todd scaling.
Hermitian matrices are stored as real coordinate vectors in an orthonormal
basis for the real inner product ``Re tr(X^H Y)``. The normal equations are
block diagonal per slot plus a rank-K coupling from the epigraph rows, which
is eliminated with the Woodbury identity, so the cost per iteration is
O(N (M^6 + K^2 M^2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

OPEN_BOUND = np.inf


@lru_cache(maxsize=None)
def herm_basis(m: int) -> np.ndarray:
    """Orthonormal real basis of m x m Hermitian matrices, shape (m*m, m, m)."""
    basis = []
    r = 1.0 / math.sqrt(2.0)
    for i in range(m):
        e = np.zeros((m, m), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(m):
        for j in range(i + 1, m):
            e = np.zeros((m, m), dtype=complex)
            e[i, j] = e[j, i] = r
            basis.append(e)
            f = np.zeros((m, m), dtype=complex)
            f[i, j] = -1j * r
            f[j, i] = 1j * r
            basis.append(f)
    out = np.array(basis)
    out.setflags(write=False)
    return out


def to_coords(X: np.ndarray) -> np.ndarray:
    """Hermitian matrices (..., m, m) -> real coordinates (..., m*m)."""
    B = herm_basis(X.shape[-1])
    return np.einsum("iab,...ba->...i", B, X).real


def from_coords(x: np.ndarray, m: int) -> np.ndarray:
    return np.einsum("...i,iab->...ab", x, herm_basis(m))


@dataclass
class IpmResult:
    S: np.ndarray          # (N, M, M) primal covariances, trace units
    E: float
    epi_duals: np.ndarray  # (K,) multipliers of the epigraph rows
    upper_duals: np.ndarray  # (K, N)
    lower_duals: np.ndarray  # (K, N)
    lo: np.ndarray         # bounds actually used (open ones made finite)
    hi: np.ndarray
    status: str            # "optimal" | "max_iters" | "infeasible"
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    pobj: float            # primal value of E
    dobj: float            # dual upper bound on E


class _Problem:
    """Data of one instance plus the structured operators G, G^T."""

    def __init__(self, rows, weights, lo, hi):
        self.K, self.M = rows.shape
        self.N = weights.shape[1]
        self.m = self.M * self.M
        # H_k = h_k h_k^H with h_k = conj(row_k)
        H = np.einsum("ka,kb->kab", rows.conj(), rows)
        self.V = to_coords(H)                     # (K, m)
        self.icoord = to_coords(np.eye(self.M))   # identity
        self.W = weights                          # (K, N)
        self.hi = hi
        self.lo = lo
        K, N = self.K, self.N
        self.n_lp = K + N + 2 * K * N
        self.h_lp = np.concatenate([np.zeros(K), np.ones(N), hi.ravel(), -lo.ravel()])

    # LP rows are [epigraph K | power N | upper K*N | lower K*N]
    def split(self, v):
        K, N = self.K, self.N
        return (v[:K], v[K:K + N], v[K + N:K + N + K * N].reshape(K, N),
                v[K + N + K * N:].reshape(K, N))

    def G_lp(self, X, e):
        q = X @ self.V.T                          # (N, K)
        epi = e - np.sum(self.W * q.T, axis=1)
        pw = X @ self.icoord
        return np.concatenate([epi, pw, q.T.ravel(), -q.T.ravel()])

    def GT(self, z_lp, Zc):
        z_epi, z_pow, z_up, z_lo = self.split(z_lp)
        gX = (z_up - z_lo - self.W * z_epi[:, None]).T @ self.V
        gX = gX + z_pow[:, None] * self.icoord[None, :] - Zc
        return gX, float(np.sum(z_epi))


def _psd_scaling(Ss, Zs):
    """NT scaling for stacked PSD blocks.

    Returns R, Rinv, lam with R^H Z R = Rinv S Rinv^H = diag(lam).
    """
    Ls = np.linalg.cholesky(Ss)
    Lz = np.linalg.cholesky(Zs)
    _, lam, Vh = np.linalg.svd(np.conj(np.swapaxes(Lz, -1, -2)) @ Ls)
    Lsinv = np.linalg.inv(Ls)
    R = Ls @ np.conj(np.swapaxes(Vh, -1, -2)) / np.sqrt(lam)[:, None, :]
    Rinv = np.sqrt(lam)[:, :, None] * (Vh @ Lsinv)
    return R, Rinv, lam


def _cho(L, b):
    y = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, y)


def _herm(X):
    return 0.5 * (X + np.conj(np.swapaxes(X, -1, -2)))


def _max_step_lp(lam, d):
    neg = d < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-lam[neg] / d[neg]))


def _max_step_psd(lam, D):
    """Largest a with diag(lam) + a D >= 0 for each stacked block."""
    s = 1.0 / np.sqrt(lam)
    T = _herm(s[:, :, None] * D * s[:, None, :])
    ev = np.linalg.eigvalsh(T)[:, 0]
    if np.all(ev >= 0):
        return np.inf
    return float(np.min(-1.0 / ev[ev < 0]))


def solve_block_maxmin(rows, weights, lo=None, hi=None, *, feas_tol=1e-8, dual_tol=1e-6,
                       gap_tol=1e-7, max_iters=100) -> IpmResult:
    """Solve the block max-min SDP described in the module docstring.

    ``rows`` is the K x M matrix of ``h_k^H`` rows, ``weights`` is K x N and
    non-negative. Data is expected to be normalized to O(1): ``||h_k|| <= 1``
    and ``max(weights) == 1``. Infinite bounds are replaced by redundant
    finite ones.
    """
    rows = np.asarray(rows, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    K, M = rows.shape
    N = weights.shape[1]
    gains = np.sum(np.abs(rows) ** 2, axis=1)
    if lo is None:
        lo = np.full((K, N), -OPEN_BOUND)
    if hi is None:
        hi = np.full((K, N), OPEN_BOUND)
    # q = <S, H_k> lies in [0, gains_k] whenever tr S <= 1, S >= 0
    lo = np.maximum(np.asarray(lo, dtype=float), -0.5 * gains[:, None] - 0.5)
    hi = np.minimum(np.asarray(hi, dtype=float), 1.5 * gains[:, None] + 0.5)

    P = _Problem(rows, weights, lo, hi)
    m = P.m

    # infeasible start: centered PSD blocks, slacks pushed into the cone
    X = np.tile(P.icoord / (2.0 * M), (N, 1))
    q0 = X @ P.V.T
    e = float(np.min(np.sum(weights * q0.T, axis=1))) - 1.0
    s_lp = np.maximum(P.h_lp - P.G_lp(X, e), 1.0)
    z_lp = np.ones(P.n_lp)
    Ss = np.tile(np.eye(M, dtype=complex) / (2.0 * M), (N, 1, 1))
    Zs = np.tile(np.eye(M, dtype=complex), (N, 1, 1))
    nu = P.n_lp + N * M

    h_norm = max(1.0, float(np.linalg.norm(P.h_lp)))
    status = "max_iters"
    it = 0
    pres = dres = gap = np.inf
    B = herm_basis(M)

    best = (np.inf, X, e, z_lp, pres, dres, gap, np.inf, 0)
    stalls = 0
    for it in range(1, max_iters + 1):
        # residuals
        gX, ge = P.GT(z_lp, to_coords(Zs))
        rX, rE = gX, ge - 1.0
        rz_lp = P.G_lp(X, e) + s_lp - P.h_lp
        rz_psd = -X + to_coords(Ss)
        gap = float(s_lp @ z_lp + np.sum(np.einsum("nab,nba->n", Ss, Zs).real))
        pres = math.sqrt(float(rz_lp @ rz_lp + np.sum(rz_psd ** 2))) / h_norm
        dres = math.sqrt(float(np.sum(rX ** 2) + rE ** 2))
        pobj = e
        z_epi, z_pow, z_up, z_lo = P.split(z_lp)
        dobj = float(np.sum(z_pow) + np.sum(z_up * hi) - np.sum(z_lo * lo))
        relgap = gap / max(abs(pobj), 1e-3)
        merit = max(pres / feas_tol, dres / dual_tol, relgap / gap_tol)
        if merit < best[0]:
            best = (merit, X.copy(), e, z_lp.copy(), pres, dres, gap, dobj, it)
        elif it - best[-1] >= 5:
            break
        if merit <= 1.0:
            status = "optimal"
            break
        # primal infeasibility certificate: G^T z ~ 0 and h^T z < 0
        htz = float(P.h_lp @ z_lp)
        if htz < 0:
            ratio = math.sqrt(float(np.sum(gX ** 2) + ge ** 2)) / -htz
            if ratio <= feas_tol:
                status = "infeasible"
                break

        mu = gap / nu

        # scalings
        w_lp = np.sqrt(s_lp / z_lp)
        lam_lp = np.sqrt(s_lp * z_lp)
        d_lp = z_lp / s_lp
        try:
            R, Rinv, lam_psd = _psd_scaling(Ss, Zs)
        except np.linalg.LinAlgError:
            status = "max_iters"
            break
        Winv = np.conj(np.swapaxes(Rinv, -1, -2)) @ Rinv
        RH = np.conj(np.swapaxes(R, -1, -2))

        # PSD contribution to normal matrix: coords of X -> Winv X Winv
        # <X, Winv X Winv> = ||Rinv X Rinv^H||_F^2, so build it as a Gram matrix
        RinvH = np.conj(np.swapaxes(Rinv, -1, -2))
        Kj = to_coords(Rinv[:, None] @ B[None] @ RinvH[:, None])   # (N, m_j, m_i)
        Ppsd = Kj @ np.swapaxes(Kj, -1, -2)                        # (N, m, m)

        d_epi, d_pow, d_up, d_lo = P.split(d_lp)
        Bn = Ppsd + d_pow[:, None, None] * np.outer(P.icoord, P.icoord)[None]
        Bn = Bn + np.einsum("kn,ki,kj->nij", d_up + d_lo, P.V, P.V)
        Bn = 0.5 * (Bn + np.swapaxes(Bn, -1, -2))
        # equilibrated Cholesky of each slot block; Phi is built as a Gram
        # matrix so it stays PSD in floating point
        dsc = 1.0 / np.sqrt(np.einsum("nii->ni", Bn))
        Bs = dsc[:, :, None] * Bn * dsc[:, None, :]
        try:
            Lb = np.linalg.cholesky(Bs)
        except np.linalg.LinAlgError:
            # end-game rank loss; a tiny ridge keeps the direction usable
            try:
                Lb = np.linalg.cholesky(Bs + 1e-12 * np.eye(m)[None])
            except np.linalg.LinAlgError:
                break
        LbT = np.swapaxes(Lb, -1, -2)

        def bsolve(y):
            # y: (N, m, r) -> B_n^{-1} y
            t = np.linalg.solve(Lb, dsc[:, :, None] * y)
            return dsc[:, :, None] * np.linalg.solve(LbT, t)

        Yv = np.linalg.solve(Lb, dsc[:, :, None] * P.V.T[None])  # (N, m, K)
        BinvV = dsc[:, :, None] * np.linalg.solve(LbT, Yv)
        Psi = np.swapaxes(Yv, -1, -2) @ Yv                        # (N, K, K)
        Phi = np.einsum("kn,ln,nkl->kl", P.W, P.W, Psi)
        # epigraph coupling: with zeta = D_epi (U^T dX + 1 dE) the system is
        # B dX + U zeta = rX, 1^T zeta = rE, (D_epi^-1 + Phi) zeta = U^T B^-1 rX + 1 dE
        Mk = np.diag(s_lp[:K] / z_lp[:K]) + Phi
        try:
            Lk = np.linalg.cholesky(0.5 * (Mk + Mk.T))
        except np.linalg.LinAlgError:
            break
        ones_m = _cho(Lk, np.ones(K))
        one_m_one = float(np.sum(ones_m))
        def apply_H(DX, De):
            v = d_lp * P.G_lp(DX, De)
            hx, he = P.GT(v, np.zeros_like(DX))
            return hx + np.einsum("nij,nj->ni", Ppsd, DX), he

        def solve_normal(yX, yE):
            def once(yX, yE):
                By = bsolve(yX[:, :, None])[:, :, 0]
                g = -np.sum(P.W * (By @ P.V.T).T, axis=1)
                gm = _cho(Lk, g)
                De = (yE - float(np.sum(gm))) / one_m_one
                zeta = gm + De * ones_m
                DX = By + np.einsum("nik,kn->ni", BinvV, P.W * zeta[:, None])
                return DX, De
            DX, De = once(yX, yE)
            for _ in range(2):
                hx, he = apply_H(DX, De)
                cx, ce = once(yX - hx, yE - he)
                DX, De = DX + cx, De + ce
            return DX, De

        def direction(rc_lp, rc_psd):
            # u = lam^{-1} o rc in each cone, then W^T u
            u_lp = rc_lp / lam_lp
            u_psd = 2.0 * rc_psd / (lam_psd[:, :, None] + lam_psd[:, None, :])
            wu_lp = w_lp * u_lp
            wu_psd = R @ u_psd @ RH
            t_lp = rz_lp + wu_lp
            t_psd = from_coords(rz_psd, M) + wu_psd
            Dt_lp = d_lp * t_lp
            Dt_psd = to_coords(Winv @ t_psd @ Winv)
            gx, ge_ = P.GT(Dt_lp, Dt_psd)
            DX, De = solve_normal(-rX - gx, -rE - ge_)
            GDx_lp = P.G_lp(DX, De)
            dz_lp = d_lp * (GDx_lp + t_lp)
            # PSD dual step from the dual residual equation, not from Winv
            # products whose magnitude blows up near the boundary
            gx_dz, _ = P.GT(dz_lp, np.zeros_like(DX))
            dZ = from_coords(rX + gx_dz, M)
            ds_lp = -rz_lp - GDx_lp
            dS = from_coords(DX - rz_psd, M)
            # scaled directions
            ds_t = ds_lp / w_lp
            dz_t = w_lp * dz_lp
            dS_t = _herm(Rinv @ dS @ np.conj(np.swapaxes(Rinv, -1, -2)))
            dZ_t = _herm(RH @ dZ @ R)
            return DX, De, ds_lp, dz_lp, dS, _herm(dZ), ds_t, dz_t, dS_t, dZ_t

        def step_to_boundary(ds_t, dz_t, dS_t, dZ_t):
            return min(_max_step_lp(lam_lp, ds_t), _max_step_lp(lam_lp, dz_t),
                       _max_step_psd(lam_psd, dS_t), _max_step_psd(lam_psd, dZ_t))

        # predictor
        Lam = np.zeros((N, M, M))
        idx = np.arange(M)
        Lam[:, idx, idx] = lam_psd
        aff = direction(-lam_lp ** 2, -(Lam ** 2).astype(complex))
        a_aff = min(1.0, step_to_boundary(*aff[6:]))
        ds_t, dz_t, dS_t, dZ_t = aff[6:]
        gap_aff = float(np.sum((lam_lp + a_aff * ds_t) * (lam_lp + a_aff * dz_t)))
        gap_aff += float(np.sum(np.einsum("nab,nba->n", Lam + a_aff * dS_t,
                                          Lam + a_aff * dZ_t).real))
        sigma = min(1.0, max(0.0, gap_aff / gap)) ** 3

        # corrector
        rc_lp = sigma * mu - lam_lp ** 2 - ds_t * dz_t
        rc_psd = (sigma * mu * np.eye(M)[None] - Lam ** 2
                  - 0.5 * (dS_t @ dZ_t + dZ_t @ dS_t))
        DX, De, ds_lp, dz_lp, dS, dZ, ds_t, dz_t, dS_t, dZ_t = direction(rc_lp, rc_psd)
        a_max = step_to_boundary(ds_t, dz_t, dS_t, dZ_t)
        alpha = min(1.0, 0.95 * a_max)

        stalls = stalls + 1 if alpha < 1e-8 else 0
        if stalls >= 3:
            break
        X = X + alpha * DX
        e = e + alpha * De
        s_lp = s_lp + alpha * ds_lp
        z_lp = z_lp + alpha * dz_lp
        Ss = _herm(Ss + alpha * dS)
        Zs = _herm(Zs + alpha * dZ)

    _, X, e, z_lp, pres, dres, gap, dobj, _ = best
    z_epi, _, z_up, z_lo = P.split(z_lp)
    return IpmResult(S=_herm(from_coords(X, M)), E=float(e), epi_duals=z_epi.copy(),
                     upper_duals=z_up.copy(), lower_duals=z_lo.copy(), lo=lo, hi=hi,
                     status=status, iterations=it, primal_residual=float(pres),
                     dual_residual=float(dres), gap=float(gap), pobj=float(e), dobj=float(dobj))
