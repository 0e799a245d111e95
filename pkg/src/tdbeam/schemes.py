"""Transmission schemes and the schedule evaluator.

A :class:`Schedule` is a list of ``(duration, Covariance)`` slots covering one
block. Every scheme returns a schedule and a :class:`SolveReport` whose
``min_dc_energy`` is the smallest per-receiver harvested energy in
mW x (time unit of ``block_length``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .channel import ChannelSet
from .eh_model import EhParams, dc_power, dc_power_derivative, inflection_point
from .solver_kernels import (
    OPT_TOL,
    Covariance,
    SolverCertificate,
    isotropic_covariance,
    mrt_covariance,
    solve_multibeam,
    solve_sca_subproblem,
    solve_time_lp,
)

__all__ = [
    "Schedule",
    "SolveReport",
    "AlgorithmSettings",
    "Evaluation",
    "evaluate",
    "multibeam",
    "tdma",
    "isotropic",
    "time_division",
    "SCHEMES",
]

log = logging.getLogger(__name__)

INIT_STRATEGIES = ("best_of_baselines", "tdma", "multibeam", "uniform")


@dataclass(frozen=True)
class Schedule:
    slots: Tuple[Tuple[float, Covariance], ...]
    block_length: float

    def __post_init__(self):
        slots = tuple((float(t), c) for t, c in self.slots)
        if not slots:
            raise ValueError("schedule needs at least one slot")
        tau = np.array([t for t, _ in slots])
        if np.any(tau < 0):
            raise ValueError("slot durations must be non-negative")
        if abs(tau.sum() - self.block_length) > 1e-9 * max(1.0, self.block_length):
            raise ValueError(f"durations sum to {tau.sum()}, block length is {self.block_length}")
        dims = {c.matrix.shape for _, c in slots}
        if len(dims) != 1:
            raise ValueError("all slot covariances must have the same size")
        object.__setattr__(self, "slots", slots)

    @classmethod
    def from_parts(cls, durations, covariances, block_length) -> "Schedule":
        return cls(tuple(zip(durations, covariances)), block_length)

    @property
    def durations(self) -> np.ndarray:
        return np.array([t for t, _ in self.slots])

    @property
    def covariances(self) -> List[Covariance]:
        return [c for _, c in self.slots]

    @property
    def num_slots(self) -> int:
        return len(self.slots)


@dataclass
class Evaluation:
    min_dc_energy: float
    per_er_dc_energy: np.ndarray
    rf_mw: np.ndarray     # (K, N) RF power per receiver and slot
    dc_mw: np.ndarray     # (K, N) DC power per receiver and slot


@dataclass
class SolveReport:
    scheme: str
    min_dc_energy: float
    per_er_dc_energy: np.ndarray
    outer_iterations: int = 0
    inner_iterations: int = 0
    objective_trace: List[float] = field(default_factory=list)
    status: str = "optimal"
    certificates: List[SolverCertificate] = field(default_factory=list, repr=False)
    rf_mw: Optional[np.ndarray] = field(default=None, repr=False)
    dc_mw: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def mean_dc_energy(self) -> float:
        return float(np.mean(self.per_er_dc_energy))


@dataclass
class AlgorithmSettings:
    """Knobs of the alternating SCA / time-allocation loop.

    ``gamma_init`` of ``None`` means a quarter of the EH curve center, in mW
    of RF power. ``num_slots`` of ``None`` means one slot per receiver.
    """

    epsilon_outer: float = 1e-5
    gamma_floor: float = 1e-2
    gamma_init: Optional[float] = None
    max_outer: int = 50
    max_inner: int = 60
    init_strategy: str = "best_of_baselines"
    num_slots: Optional[int] = None
    tol: float = OPT_TOL

    def __post_init__(self):
        if not self.epsilon_outer > 0:
            raise ValueError("epsilon_outer must be positive")
        if not self.gamma_floor > 0:
            raise ValueError("gamma_floor must be positive")
        if self.gamma_init is not None and not self.gamma_init > self.gamma_floor:
            raise ValueError("gamma_init must exceed gamma_floor")
        if self.init_strategy not in INIT_STRATEGIES:
            raise ValueError(f"init_strategy must be one of {INIT_STRATEGIES}")
        if self.num_slots is not None and self.num_slots < 1:
            raise ValueError("num_slots must be >= 1")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")

    @classmethod
    def from_config(cls, cfg: dict) -> "AlgorithmSettings":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(cfg) - known
        if unknown:
            raise ValueError(f"unknown algorithm settings: {sorted(unknown)}")
        return cls(**cfg)

    def resolved_gamma_init(self, eh: EhParams) -> float:
        g = self.gamma_init if self.gamma_init is not None else 0.25 * inflection_point(eh)
        if not g > self.gamma_floor:
            raise ValueError("gamma_init must exceed gamma_floor")
        return g


def _rf_table(channels: ChannelSet, covariances: Sequence[Covariance]) -> np.ndarray:
    return np.stack([channels.rf_mw(c) for c in covariances], axis=1)


def _dc_table(rf: np.ndarray, eh: EhParams) -> np.ndarray:
    # round-off can leave -1e-20 on a null beam
    return dc_power(eh, np.clip(rf, 0.0, None))


def evaluate(schedule: Schedule, channels: ChannelSet, eh: EhParams) -> Evaluation:
    """Per-receiver harvested DC energy of a schedule and its minimum."""
    M = schedule.slots[0][1].matrix.shape[0]
    if M != channels.num_antennas:
        raise ValueError(f"schedule is for {M} antennas, channels have {channels.num_antennas}")
    rf = _rf_table(channels, schedule.covariances)
    dc = _dc_table(rf, eh)
    per_er = dc @ schedule.durations
    return Evaluation(float(per_er.min()), per_er, rf, dc)


def _report(name, schedule, channels, eh, **kw) -> SolveReport:
    ev = evaluate(schedule, channels, eh)
    return SolveReport(name, ev.min_dc_energy, ev.per_er_dc_energy, rf_mw=ev.rf_mw,
                       dc_mw=ev.dc_mw, **kw)


def multibeam(channels: ChannelSet, p_max: float, T: float, eh: EhParams,
              tol: float = OPT_TOL) -> Tuple[Schedule, SolveReport]:
    """One covariance for the whole block, maximizing the weakest RF power."""
    cov, cert = solve_multibeam(channels, p_max, tol)
    sched = Schedule(((T, cov),), T)
    rep = _report("multibeam", sched, channels, eh, status=cert.status, certificates=[cert])
    rep.objective_trace = [rep.min_dc_energy]
    return sched, rep


def tdma(channels: ChannelSet, p_max: float, T: float, eh: EhParams,
         tol: float = OPT_TOL) -> Tuple[Schedule, SolveReport]:
    """One MRT slot per receiver; only the durations are optimized."""
    covs = [mrt_covariance(channels, k, p_max) for k in range(channels.num_ers)]
    dc = _dc_table(_rf_table(channels, covs), eh)
    tau, cert = solve_time_lp(dc, T, tol)
    sched = Schedule.from_parts(tau, covs, T)
    rep = _report("tdma", sched, channels, eh, status=cert.status, certificates=[cert])
    rep.objective_trace = [rep.min_dc_energy]
    return sched, rep


def isotropic(num_antennas: int, p_max: float, T: float, channels: ChannelSet,
              eh: EhParams) -> Tuple[Schedule, SolveReport]:
    """Equal power on every antenna, (p_max / M) I, for the whole block."""
    sched = Schedule(((T, isotropic_covariance(num_antennas, p_max)),), T)
    rep = _report("isotropic", sched, channels, eh)
    rep.objective_trace = [rep.min_dc_energy]
    return sched, rep


def _tdma_start(channels, p_max, T, eh, N, tol):
    K = channels.num_ers
    sched, _ = tdma(channels, p_max, T, eh, tol)
    covs, tau = sched.covariances, sched.durations
    if N == K:
        return sched
    if N > K:
        # surplus slots start empty and replicate the last beam
        covs = covs + [covs[-1]] * (N - K)
        tau = np.concatenate([tau, np.zeros(N - K)])
        return Schedule.from_parts(tau, covs, T)
    keep = np.sort(np.argsort(-tau, kind="stable")[:N])
    covs = [covs[i] for i in keep]
    dc = _dc_table(_rf_table(channels, covs), eh)
    tau, _ = solve_time_lp(dc, T, tol)
    return Schedule.from_parts(tau, covs, T)


def _constant_start(cov, T, N):
    return Schedule.from_parts(np.full(N, T / N), [cov] * N, T)


def _alternate(channels, p_max, T, eh, s: AlgorithmSettings, start: Schedule):
    """Alternate SCA covariance updates and the time LP from ``start``."""
    gamma_init = s.resolved_gamma_init(eh)
    tau = start.durations.copy()
    covs = list(start.covariances)
    ev = evaluate(start, channels, eh)
    F = ev.min_dc_energy
    trace = [F]
    certs = []
    outer = inner_total = 0
    status = "max_iters"

    for _ in range(s.max_outer):
        F_start = F
        outer += 1
        gamma = gamma_init
        n_inner = 0
        while gamma > s.gamma_floor and n_inner < s.max_inner:
            n_inner += 1
            active = np.flatnonzero(tau >= 1e-12 * T)
            rf = _rf_table(channels, [covs[n] for n in active])
            centers = np.clip(rf, 0.0, None)
            coefs = dc_power_derivative(eh, centers)
            new, cert = solve_sca_subproblem(coefs, centers, gamma, channels, p_max,
                                             tau[active], s.tol)
            if cert.status == "infeasible":
                gamma /= 2.0
                continue
            cand = list(covs)
            for j, n in enumerate(active):
                cand[n] = new[j]
            F_new = evaluate(Schedule.from_parts(tau, cand, T), channels, eh).min_dc_energy
            # accept only a true increase of the non-linear objective
            if F_new > F + 1e-12 * abs(F):
                covs, F = cand, F_new
                trace.append(F)
                certs.append(cert)
            else:
                gamma /= 2.0
        inner_total += n_inner

        dc = _dc_table(_rf_table(channels, covs), eh)
        tau_new, lp_cert = solve_time_lp(dc, T, s.tol)
        F_lp = float(np.min(dc @ tau_new))
        if F_lp > F:
            tau, F = tau_new, F_lp
            trace.append(F)
        certs.append(lp_cert)
        if F - F_start < s.epsilon_outer:
            status = "converged"
            break

    sched = Schedule.from_parts(tau, covs, T)
    return sched, trace, outer, inner_total, status, certs


def time_division(channels: ChannelSet, p_max: float, T: float, eh: EhParams,
                  settings: Optional[AlgorithmSettings] = None) -> Tuple[Schedule, SolveReport]:
    """Per-slot covariances and durations by alternating optimization.

    Each outer round linearizes the DC curve at the current per-slot RF
    powers, takes trust-region SCA steps (a step is kept only if the true
    min DC energy grows, otherwise the radius is halved until it drops to
    ``gamma_floor``) and then re-solves the time-allocation LP with the
    covariances fixed. Rounds stop when the gain is below ``epsilon_outer``.

    A constant multi-beam schedule is a stationary point of this iteration,
    so ``best_of_baselines`` runs the loop from the TDMA schedule and keeps
    the result only if it beats the multi-beam schedule.
    """
    s = settings or AlgorithmSettings()
    N = s.num_slots or channels.num_ers
    strategy = s.init_strategy

    mb_sched = None
    if strategy in ("best_of_baselines", "multibeam"):
        mb_sched, mb_rep = multibeam(channels, p_max, T, eh, s.tol)
    if strategy == "multibeam":
        start = _constant_start(mb_sched.covariances[0], T, N)
    elif strategy == "uniform":
        start = _constant_start(isotropic_covariance(channels.num_antennas, p_max), T, N)
    else:
        start = _tdma_start(channels, p_max, T, eh, N, s.tol)

    sched, trace, outer, inner, status, certs = _alternate(channels, p_max, T, eh, s, start)

    if strategy == "best_of_baselines":
        mb_const = _constant_start(mb_sched.covariances[0], T, N)
        mb_val = evaluate(mb_const, channels, eh).min_dc_energy
        if mb_val > trace[-1]:
            sched = mb_const
            trace = [mb_val]
            certs = mb_rep.certificates + certs

    rep = _report("time_division", sched, channels, eh, outer_iterations=outer,
                  inner_iterations=inner, objective_trace=trace, status=status,
                  certificates=certs)
    return sched, rep


SCHEMES = ("multibeam", "tdma", "isotropic", "time_division")
