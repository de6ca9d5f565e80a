"""Seeded simulation of the two teleoperation channels.

Commands flow operator to robot, feedback flows robot to operator. Each
channel applies a base delay, a non-negative jitter draw, and optionally an
instability episode that adds extra delay to everything sent while the
episode is active. Delivery is strictly first-in first-out: deliver times
are clamped monotone so jitter can never reorder a stream. All timing is
simulated; nothing here touches a wall clock or a socket.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .signals import DegenerateSignal, estimate_lag

__all__ = [
    "InstabilityWindow",
    "ChannelConfig",
    "DelayedChannel",
    "measure_head_latency",
    "DegenerateSignal",
]


@dataclass(frozen=True)
class InstabilityWindow:
    """Episode during which every send gains extra delay.

    Membership is half-open: start <= t < start + duration.
    """

    start: float
    duration: float
    extra_delay: float

    def active(self, now: float) -> bool:
        return self.start <= now < self.start + self.duration


@dataclass(frozen=True)
class ChannelConfig:
    base_delay: float = 0.0
    jitter_stddev: float = 0.0
    instability: Optional[InstabilityWindow] = None
    seed: int = 0
    tick_rate: float = 60.0

    def __post_init__(self):
        if self.base_delay < 0:
            raise ValueError("base_delay must be >= 0")
        if self.jitter_stddev < 0:
            raise ValueError("jitter_stddev must be >= 0")


class DelayedChannel:
    """FIFO channel with seeded delay, jitter, and instability episodes."""

    def __init__(self, config: ChannelConfig):
        self.config = config
        self._rng = np.random.default_rng(np.random.SeedSequence(config.seed))
        self._queue: deque[tuple[Any, float, float]] = deque()
        self._last_send = -np.inf
        self._last_deliver = -np.inf

    def send(self, payload: Any, now: float) -> None:
        """Enqueue a payload; the deliver time is fixed at send time."""
        if now < self._last_send:
            raise ValueError("send times must be monotone")
        self._last_send = now
        delay = self.config.base_delay
        if self.config.jitter_stddev > 0.0:
            delay += max(0.0, float(self._rng.normal(0.0, self.config.jitter_stddev)))
        window = self.config.instability
        if window is not None and window.active(now):
            delay += window.extra_delay
        deliver = max(now + delay, self._last_deliver)
        self._last_deliver = deliver
        self._queue.append((payload, now, deliver))

    def poll(self, now: float) -> list[Any]:
        """All payloads due at or before `now`, oldest first."""
        out = []
        while self._queue and self._queue[0][2] <= now:
            out.append(self._queue.popleft()[0])
        return out

    def pending(self) -> int:
        return len(self._queue)


def measure_head_latency(operator_trace, robot_trace, dt: float,
                         max_lag_s: float = 1.5) -> float:
    """Lag between the operator's head trace and the robot's, in seconds.

    Both traces are heading angles sampled on the same clock; the robot
    trace is expected to trail. Raises DegenerateSignal on constant traces.
    """
    return estimate_lag(operator_trace, robot_trace, dt, max_lag_s=max_lag_s)
