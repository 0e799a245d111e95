"""Channel sets: the fixed two-receiver example and Rician ULA fading.

Convention: row ``k`` of :attr:`ChannelSet.entries` is ``h_k^H``, so the RF
power delivered by a covariance ``S`` (watts) is ``row @ S @ row.conj()``
watts times the channel gain units, and ``rf_unit_scale`` times that in mW.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ChannelSet",
    "ChannelModelParams",
    "los_row",
    "sample_channels",
    "example1_channels",
    "db_to_linear",
    "dbm_to_watts",
]

W_TO_MW = 1e3


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def dbm_to_watts(p_dbm):
    return float(10.0 ** ((p_dbm - 30.0) / 10.0))


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """K x M complex channel matrix plus the watts-to-mW factor."""

    entries: np.ndarray
    rf_unit_scale: float = W_TO_MW

    def __post_init__(self):
        h = np.array(self.entries, dtype=complex)
        if h.ndim != 2 or min(h.shape) < 1:
            raise ValueError(f"channel matrix must be K x M with K, M >= 1, got shape {h.shape}")
        if np.any(np.all(h == 0, axis=1)):
            raise ValueError("channel set contains an all-zero row")
        if not np.all(np.isfinite(h)):
            raise ValueError("channel entries must be finite")
        if not self.rf_unit_scale > 0:
            raise ValueError("rf_unit_scale must be positive")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    @property
    def num_ers(self) -> int:
        return self.entries.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.entries.shape[1]

    @property
    def gains(self) -> np.ndarray:
        """Squared row norms ``||h_k||^2``."""
        return np.sum(np.abs(self.entries) ** 2, axis=1)

    def column(self, k: int) -> np.ndarray:
        """Channel vector ``h_k`` as a column (conjugate of row ``k``)."""
        return self.entries[k].conj()

    def rf_mw(self, cov) -> np.ndarray:
        """RF power (mW) at every receiver for one covariance (watts)."""
        S = np.asarray(getattr(cov, "matrix", cov))
        q = np.einsum("ka,ab,kb->k", self.entries, S, self.entries.conj())
        tr = abs(np.trace(S).real)
        scale = tr * np.max(self.gains) if tr > 0 else 1.0
        if np.max(np.abs(q.imag)) > 1e-10 * max(scale, 1e-300):
            raise ValueError("quadratic form is not real; covariance is not Hermitian")
        return self.rf_unit_scale * q.real

    def permuted(self, order) -> "ChannelSet":
        return ChannelSet(self.entries[np.asarray(order)], self.rf_unit_scale)

    def to_csv(self) -> str:
        """Serialize as ``er_index,antenna_index,re,im`` rows (0-based)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["er_index", "antenna_index", "re", "im"])
        for k, row in enumerate(self.entries):
            for m, v in enumerate(row):
                w.writerow([k, m, repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, rf_unit_scale: float = W_TO_MW) -> "ChannelSet":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty channel CSV")
        K = 1 + max(int(r["er_index"]) for r in rows)
        M = 1 + max(int(r["antenna_index"]) for r in rows)
        h = np.zeros((K, M), dtype=complex)
        seen = np.zeros((K, M), dtype=bool)
        for r in rows:
            k, m = int(r["er_index"]), int(r["antenna_index"])
            h[k, m] = complex(float(r["re"]), float(r["im"]))
            seen[k, m] = True
        if not seen.all():
            raise ValueError("channel CSV is missing entries")
        return cls(h, rf_unit_scale)


@dataclass(frozen=True)
class ChannelModelParams:
    """Rician/ULA link-budget parameters (linear units unless noted)."""

    num_ers: int = 30
    num_antennas: int = 4
    rician_factor: float = float(db_to_linear(5.0))
    distance_m: float = 4.0
    ref_gain: float = float(db_to_linear(-30.0))
    pathloss_exp: float = 3.0
    tx_gain_dbi: float = 10.0
    rx_gain_dbi: float = 2.8
    element_spacing_ratio: float = 0.5
    rf_unit_scale: float = field(default=W_TO_MW)

    def __post_init__(self):
        if self.num_ers < 1 or self.num_antennas < 1:
            raise ValueError("need at least one ER and one antenna")
        if self.rician_factor < 0:
            raise ValueError("rician_factor must be >= 0")
        if self.distance_m <= 0 or self.ref_gain <= 0:
            raise ValueError("distance_m and ref_gain must be positive")

    @classmethod
    def from_config(cls, cfg: dict, num_ers: int, num_antennas: int) -> "ChannelModelParams":
        return cls(
            num_ers=int(num_ers),
            num_antennas=int(num_antennas),
            rician_factor=float(db_to_linear(cfg.get("rician_factor_db", 5.0))),
            distance_m=float(cfg.get("distance_m", 4.0)),
            ref_gain=float(db_to_linear(cfg.get("ref_gain_db", -30.0))),
            pathloss_exp=float(cfg.get("pathloss_exp", 3.0)),
            tx_gain_dbi=float(cfg.get("tx_gain_dbi", 10.0)),
            rx_gain_dbi=float(cfg.get("rx_gain_dbi", 2.8)),
            element_spacing_ratio=float(cfg.get("element_spacing_ratio", 0.5)),
        )

    @property
    def avg_gain(self) -> float:
        """Average per-entry power gain g, antenna gains included."""
        ant = db_to_linear(self.tx_gain_dbi + self.rx_gain_dbi)
        return float(ant * self.ref_gain * self.distance_m ** (-self.pathloss_exp))

    def direction(self, k: int) -> float:
        """Angle of ER ``k`` (0-based) seen from the array, radians."""
        return -5.0 / 12.0 * np.pi + 2.0 * np.pi * k / self.num_ers

    def phase_step(self, k: int) -> float:
        return -2.0 * np.pi * self.element_spacing_ratio * np.sin(self.direction(k))


def los_row(model: ChannelModelParams, k: int) -> np.ndarray:
    """Line-of-sight row of ER ``k`` (0-based): sqrt(g) * ULA steering."""
    if not 0 <= k < model.num_ers:
        raise IndexError(f"ER index {k} out of range for K={model.num_ers}")
    theta = model.phase_step(k)
    return np.sqrt(model.avg_gain) * np.exp(1j * theta * np.arange(model.num_antennas))


def sample_channels(model: ChannelModelParams, seed: int) -> ChannelSet:
    """Draw one Rician channel set.

    Each ER gets its own generator spawned from ``seed`` so a row depends
    only on ``(seed, k)``.
    """
    K, M = model.num_ers, model.num_antennas
    g = model.avg_gain
    kr = model.rician_factor
    if np.isinf(kr):
        w_los, w_nlos = 1.0, 0.0
    else:
        w_los, w_nlos = np.sqrt(kr / (1.0 + kr)), np.sqrt(1.0 / (1.0 + kr))
    h = np.empty((K, M), dtype=complex)
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(K)):
        rng = np.random.default_rng(child)
        nlos = np.sqrt(g / 2.0) * (rng.standard_normal(M) + 1j * rng.standard_normal(M))
        h[k] = w_los * los_row(model, k) + w_nlos * nlos
    return ChannelSet(h, model.rf_unit_scale)


def example1_channels() -> ChannelSet:
    """Two orthogonal 4-antenna channels; MRT at 15 W gives 3 mW RF.

    The listed per-entry values 1e-4 are read as power gains, i.e. the
    amplitudes are 1e-2.
    """
    amp = 1e-2
    h = np.array([[amp, amp, 0, 0], [0, 0, amp, amp]], dtype=complex)
    return ChannelSet(h, W_TO_MW)
