"""Sigmoid RF-to-DC conversion curve of an energy receiver.

All powers are in mW. The curve is the logistic function shifted and
rescaled so that zero input RF power yields exactly zero DC output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["EhParams", "dc_power", "dc_power_derivative", "inflection_point"]


@dataclass(frozen=True)
class EhParams:
    """Fitted rectifier constants.

    Parameters
    ----------
    q_max : float
        Saturation DC output power (mW).
    a : float
        Curve steepness (1/mW).
    b : float
        Curve center (mW); also the convex/concave switch point.
    """

    q_max: float = 10.73
    a: float = 0.2308
    b: float = 5.365
    omega: float = field(init=False)

    def __post_init__(self):
        for name in ("q_max", "a", "b"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        # logistic(-a*b) written to stay finite for large a*b
        object.__setattr__(self, "omega", float(_logistic(-self.a * self.b)))

    @classmethod
    def from_config(cls, cfg: dict) -> "EhParams":
        return cls(q_max=float(cfg.get("q_max_mw", 10.73)),
                   a=float(cfg.get("a_per_mw", 0.2308)),
                   b=float(cfg.get("b_mw", 5.365)))


def _logistic(t):
    """1 / (1 + exp(-t)), overflow-free."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _check_rf(q_rf):
    q = np.asarray(q_rf, dtype=float)
    if np.any(np.isnan(q)) or np.any(q < 0):
        raise ValueError("RF input power must be non-negative")
    return q


def dc_power(params: EhParams, q_rf):
    """Harvested DC power (mW) for input RF power ``q_rf`` (mW).

    Accepts scalars or arrays; returns the same shape. Negative input raises
    ``ValueError``.
    """
    q = _check_rf(q_rf)
    sig = _logistic(params.a * (q - params.b))
    # (sig - omega) is exactly zero at q = 0 since omega = logistic(-a b)
    out = params.q_max * (sig - params.omega) / (1.0 - params.omega)
    out = np.clip(out, 0.0, params.q_max)
    return float(out) if out.ndim == 0 else out


def dc_power_derivative(params: EhParams, q_rf):
    """d(dc_power)/d(q_rf), dimensionless (mW per mW)."""
    q = _check_rf(q_rf)
    t = params.a * (q - params.b)
    # e^{-t}/(1+e^{-t})^2 == logistic(t)*logistic(-t); keeps the tail precise
    out = params.q_max * params.a * _logistic(t) * _logistic(-t) / (1.0 - params.omega)
    return float(out) if out.ndim == 0 else out


def inflection_point(params: EhParams) -> float:
    """RF power (mW) where the curve switches from convex to concave."""
    return float(params.b)
