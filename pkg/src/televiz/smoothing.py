"""First-order low-pass smoothing of the virtual tracked-volume anchor.

Streamed odometry and channel jitter shake the anchor that places the
operator's tracked volume in the virtual scene. A per-update exponential
blend (linear on translation, spherical on rotation) removes the high
frequency content at the cost of a rate-dependent lag: smaller rates are
smoother and lag more. The analytic group delay is (1 - rate) / rate times
the update period.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .geometry import Pose, quat_slerp, yaw_of
from .signals import DegenerateSignal, estimate_lag

__all__ = ["FilterState", "filter_step", "measure_filter_lag", "DegenerateSignal"]


@dataclass(frozen=True)
class FilterState:
    """Smoothed pose plus the blend rate and update period.

    rate is in (0, 1]; 1.0 is a pass-through. The per-channel flags allow
    smoothing only rotation or only translation.
    """

    smoothed: Pose
    rate: float
    period: float = 1.0 / 60.0
    filter_rotation: bool = True
    filter_translation: bool = True

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must be in (0, 1]")
        if self.period <= 0.0:
            raise ValueError("period must be positive")


def filter_step(state: FilterState, target: Pose) -> FilterState:
    """Advance the filter one update toward `target`."""
    if state.rate == 1.0:
        return replace(state, smoothed=target)
    q = (
        quat_slerp(state.smoothed.q, target.q, state.rate)
        if state.filter_rotation
        else target.q
    )
    t = (
        state.smoothed.t + state.rate * (target.t - state.smoothed.t)
        if state.filter_translation
        else target.t
    )
    return replace(state, smoothed=Pose(q=q, t=t))


def measure_filter_lag(rate: float, period: float, signal, max_lag_s: float = 1.0) -> float:
    """Lag the filter introduces on a pose trace, in seconds.

    Runs the filter over the trace and cross-correlates the heading of the
    input against the heading of the output. The trace should be several
    filter time constants long so the transient does not dominate.
    Raises DegenerateSignal when the input heading never moves.
    """
    signal = list(signal)
    if len(signal) < 3:
        raise ValueError("signal too short")
    state = FilterState(smoothed=signal[0], rate=rate, period=period)
    yin, yout = [], []
    for pose in signal:
        state = filter_step(state, pose)
        yin.append(yaw_of(pose))
        yout.append(yaw_of(state.smoothed))
    return estimate_lag(yin, yout, period, max_lag_s=max_lag_s)
