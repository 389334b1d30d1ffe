"""Empirical speed-change behaviour around domain violations.

Mines historical tracks for encounters (close-approach pairs that actually
violate a domain), measures how the violating vessel was changing speed at
that moment, and fits a per-vessel-type kernel density over those rates. The
fitted density weights collision risk over candidate target speed changes.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .geometry import DomainParams, VesselTrack, VesselType, find_tdv
from .risk import (
    RiskParams,
    _overall_from_states,
    trapezoid_coefficients,
)

log = logging.getLogger(__name__)

DEFAULT_DCPA_THRESHOLD = 1852.0
DEFAULT_WINDOW = 60.0
DEFAULT_MIN_SAMPLES = 30
DEFAULT_DEGENERATE_SUPPORT = (-0.05, 0.05)

MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EncounterEvent:
    """One domain violation: vessel ``target_id`` entered the domain of
    ``own_id`` at time ``tdv``, changing speed at ``speed_change`` m/s^2."""

    own_id: str
    target_id: str
    tdv: float
    speed_change: float
    vessel_type: VesselType


def speed_change_at(track: VesselTrack, t: float, window: float = DEFAULT_WINDOW) -> float | None:
    """Finite-difference speed-change rate over the window ending at t.

    Returns (v(t) - v(t - window)) / window in m/s^2, or None when the
    window straddles the start of the track.
    """
    if window <= 0.0:
        raise ValueError(f"window must be positive, got {window}")
    if t - window < track.t_start or not track.covers(t):
        return None
    v_now = track.state_at(t).speed
    v_then = track.state_at(t - window).speed
    return (v_now - v_then) / window


def _min_forward_dcpa(track_a: VesselTrack, track_b: VesselTrack) -> float | None:
    """Minimum forward-looking closest-approach distance over the common grid.

    At each shared grid time both vessels are extrapolated at constant
    velocity; a closest approach in the past counts as the current distance.
    """
    times = track_a.common_times(track_b)
    if times.size == 0:
        return None
    ia = np.searchsorted(track_a.times, times)
    ib = np.searchsorted(track_b.times, times)
    dn = track_b.north[ib] - track_a.north[ia]
    de = track_b.east[ib] - track_a.east[ia]
    van = track_a.speed[ia] * np.cos(track_a.heading[ia])
    vae = track_a.speed[ia] * np.sin(track_a.heading[ia])
    vbn = track_b.speed[ib] * np.cos(track_b.heading[ib])
    vbe = track_b.speed[ib] * np.sin(track_b.heading[ib])
    rvn = vbn - van
    rve = vbe - vae
    rv2 = rvn * rvn + rve * rve
    with np.errstate(divide="ignore", invalid="ignore"):
        tcpa = np.where(rv2 > 0.0, -(dn * rvn + de * rve) / np.where(rv2 > 0.0, rv2, 1.0), 0.0)
    tcpa = np.maximum(tcpa, 0.0)
    dcpa = np.hypot(dn + rvn * tcpa, de + rve * tcpa)
    return float(np.min(dcpa))


def detect_encounters(
    tracks: Mapping[str, VesselTrack],
    dcpa_threshold: float = DEFAULT_DCPA_THRESHOLD,
    domain_params: DomainParams | None = None,
    window: float = DEFAULT_WINDOW,
) -> list[EncounterEvent]:
    """Find domain violations among all ordered track pairs.

    A pair (j, k) yields one event when their minimum forward DCPA falls
    below ``dcpa_threshold`` and k actually violates j's domain at some
    grid time (the TDV). The event records the violating vessel's
    speed-change rate at TDV and its type; pairs whose rate window sticks
    out of the track are dropped.
    """
    dp = domain_params or DomainParams()
    events: list[EncounterEvent] = []
    ids = sorted(tracks)
    for own_id in ids:
        for target_id in ids:
            if own_id == target_id:
                continue
            own, target = tracks[own_id], tracks[target_id]
            dcpa = _min_forward_dcpa(own, target)
            if dcpa is None or dcpa >= dcpa_threshold:
                continue
            tdv = find_tdv(own, target, dp)
            if tdv is None:
                continue
            rate = speed_change_at(target, tdv, window)
            if rate is None:
                continue
            events.append(
                EncounterEvent(
                    own_id=own_id,
                    target_id=target_id,
                    tdv=tdv,
                    speed_change=rate,
                    vessel_type=target.vessel_type,
                )
            )
    return events


def silverman_bandwidth(samples: np.ndarray) -> float:
    """Silverman's rule of thumb: 0.9 min(std, IQR/1.34) n^(-1/5)."""
    n = samples.size
    if n < 2:
        return 0.0
    std = float(np.std(samples, ddof=1))
    q75, q25 = np.percentile(samples, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(std, iqr / 1.34) if iqr > 0.0 else std
    return 0.9 * spread * n ** (-0.2)


@dataclass
class SpeedChangeModel:
    """Gaussian KDE over observed speed-change rates for one vessel type.

    The density is truncated to ``support`` (sample range padded by three
    bandwidths) and is zero outside it. A model built from too few samples
    is ``degenerate``: uniform over a configured default support.
    """

    vessel_type: VesselType
    samples: np.ndarray
    bandwidth: float
    support: tuple[float, float]
    degenerate: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        lo, hi = self.support
        if hi < lo:
            raise ValueError(f"support upside down: {self.support}")
        if not self.degenerate and self.bandwidth <= 0.0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")

    def density(self, rate):
        """Probability density at the given rate(s); zero outside support."""
        x = np.asarray(rate, dtype=float)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        if self.degenerate:
            width = hi - lo
            val = np.where(inside, 1.0 / width if width > 0.0 else np.inf, 0.0)
        else:
            z = (x[..., None] - self.samples) / self.bandwidth
            kernels = np.exp(-0.5 * z * z) / (self.bandwidth * math.sqrt(2.0 * math.pi))
            val = np.where(inside, kernels.mean(axis=-1), 0.0)
        return float(val) if val.ndim == 0 else val

    def to_dict(self) -> dict:
        return {
            "schema_version": MODEL_SCHEMA_VERSION,
            "vessel_type": self.vessel_type.value,
            "samples": self.samples.tolist(),
            "bandwidth": self.bandwidth,
            "support": list(self.support),
            "degenerate": self.degenerate,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SpeedChangeModel":
        if doc.get("schema_version") != MODEL_SCHEMA_VERSION:
            raise ValueError(f"unsupported model schema {doc.get('schema_version')}")
        return cls(
            vessel_type=VesselType.parse(doc["vessel_type"]),
            samples=np.asarray(doc["samples"], dtype=float),
            bandwidth=float(doc["bandwidth"]),
            support=(float(doc["support"][0]), float(doc["support"][1])),
            degenerate=bool(doc.get("degenerate", False)),
            metadata=dict(doc.get("metadata", {})),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "SpeedChangeModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def fit_model(
    events: Sequence[EncounterEvent],
    vessel_type: VesselType,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    degenerate_support: tuple[float, float] = DEFAULT_DEGENERATE_SUPPORT,
) -> SpeedChangeModel:
    """Fit the speed-change density for one vessel type.

    Uses Silverman's bandwidth and pads the support by three bandwidths on
    each side. Below ``min_samples`` events the model degrades to a uniform
    density over ``degenerate_support`` and is flagged as such.
    """
    rates = np.array(
        [e.speed_change for e in events if e.vessel_type is vessel_type], dtype=float
    )
    meta = {"sample_count": int(rates.size), "min_samples": int(min_samples)}
    if rates.size < min_samples:
        lo, hi = degenerate_support
        if hi <= lo:
            raise ValueError(f"degenerate support upside down: {degenerate_support}")
        log.info(
            "speed model for %s degenerate: %d of %d required samples",
            vessel_type.value,
            rates.size,
            min_samples,
        )
        return SpeedChangeModel(
            vessel_type=vessel_type,
            samples=rates,
            bandwidth=(hi - lo) / 2.0,
            support=(lo, hi),
            degenerate=True,
            metadata=meta,
        )
    h = silverman_bandwidth(rates)
    if h <= 0.0:
        # all samples identical; keep a sliver of bandwidth so the density
        # stays finite and peaks at the repeated value
        h = max(1e-6, 1e-3 * (1.0 + abs(float(rates[0]))))
    lo = float(rates.min()) - 3.0 * h
    hi = float(rates.max()) + 3.0 * h
    return SpeedChangeModel(
        vessel_type=vessel_type,
        samples=rates,
        bandwidth=h,
        support=(lo, hi),
        degenerate=False,
        metadata=meta,
    )


def probabilistic_cr(
    track_j: VesselTrack,
    track_k: VesselTrack,
    t: float,
    model: SpeedChangeModel,
    grid_n: int = 64,
    params: RiskParams | None = None,
    domain_params: DomainParams | None = None,
) -> float:
    """Collision risk averaged over target speed-change rates.

    Slices the overall collision risk at ``grid_n`` rates spanning the
    model support and weights each slice by the model density (trapezoid
    rule); the rate applies to the target only. A zero-mass density falls
    back to the deterministic risk at rate 0; a single-point support
    collapses to the risk at that rate.
    """
    rp = params or RiskParams()
    dp = domain_params or DomainParams()
    sj = track_j.state_at(t)
    sk = track_k.state_at(t)
    lo, hi = model.support
    if hi - lo <= 1e-15:
        return _overall_from_states(sj, sk, 0.5 * (lo + hi), rp, dp)
    if grid_n < 2:
        raise ValueError(f"grid_n must be at least 2, got {grid_n}")
    rates = np.linspace(lo, hi, grid_n)
    weights = np.asarray(model.density(rates), dtype=float) * trapezoid_coefficients(grid_n)
    total = float(weights.sum())
    if total <= 0.0:
        return _overall_from_states(sj, sk, 0.0, rp, dp)
    risks = np.array([_overall_from_states(sj, sk, float(r), rp, dp) for r in rates])
    return float(np.dot(weights, risks) / total)


def weighted_rate_average(rates, densities, values) -> float:
    """Trapezoid-weighted mean of ``values`` over a uniform rate grid.

    The quadrature core behind :func:`probabilistic_cr`, exposed for direct
    verification: sum(w_i P_i V_i) / sum(w_i P_i) with trapezoid w.
    """
    rates = np.asarray(rates, dtype=float)
    densities = np.asarray(densities, dtype=float)
    values = np.asarray(values, dtype=float)
    if rates.size != densities.size or rates.size != values.size:
        raise ValueError("rates, densities, values must align")
    weights = densities * trapezoid_coefficients(rates.size)
    total = float(weights.sum())
    if total <= 0.0:
        raise ValueError("density mass is zero over the grid")
    return float(np.dot(weights, values) / total)
