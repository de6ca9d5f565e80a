import math

import numpy as np
import pytest

from televiz.geometry import Pose, pose_distance, quat_slerp, rotation_angle
from televiz.smoothing import DegenerateSignal, FilterState, filter_step, measure_filter_lag

DT = 1.0 / 60.0


def yaw_signal(freq_hz, amplitude_rad, duration_s, dt=DT):
    n = int(round(duration_s / dt))
    return [
        Pose.rot_z(amplitude_rad * math.sin(2 * math.pi * freq_hz * i * dt))
        for i in range(n)
    ]


def test_rate_one_is_pass_through():
    state = FilterState(smoothed=Pose.identity(), rate=1.0, period=DT)
    target = Pose.from_yaw_pitch(0.3, -0.1, (1.0, 2.0, 3.0))
    out = filter_step(state, target)
    assert out.smoothed.same_bits(target)


def test_scalar_recurrence_values():
    state = FilterState(smoothed=Pose.identity(), rate=0.2, period=DT)
    target = Pose.translation(1, 0, 0)
    state = filter_step(state, target)
    assert abs(state.smoothed.t[0] - 0.2) < 1e-15
    state = filter_step(state, target)
    assert abs(state.smoothed.t[0] - 0.36) < 1e-15


@pytest.mark.parametrize("rate", [0.5, 0.2, 0.05])
def test_geometric_decay_toward_constant_target(rate):
    target = Pose.from_yaw_pitch(0.8, 0.0, (2.0, -1.0, 0.5))
    state = FilterState(smoothed=Pose.identity(), rate=rate, period=DT)
    rot0, trans0 = pose_distance(Pose.identity(), target)
    n = 40
    for _ in range(n):
        state = filter_step(state, target)
    rot, trans = pose_distance(state.smoothed, target)
    geom = (1.0 - rate) ** n
    assert abs(trans - geom * trans0) < 1e-9
    assert abs(rot - geom * rot0) < 1e-9


def test_invalid_rate_rejected():
    with pytest.raises(ValueError):
        FilterState(smoothed=Pose.identity(), rate=0.0)
    with pytest.raises(ValueError):
        FilterState(smoothed=Pose.identity(), rate=1.2)


def test_high_frequency_attenuation():
    freq = (1.0 / DT) / 4.0
    sig = yaw_signal(freq, 0.2, 2.0)
    for rate in (0.8, 0.5, 0.2):
        state = FilterState(smoothed=sig[0], rate=rate, period=DT)
        out = []
        for pose in sig:
            state = filter_step(state, pose)
            out.append(rotation_angle(state.smoothed.q) * np.sign(state.smoothed.q[3] or 1))
        steady = np.array(out[len(out) // 2:])
        assert (steady.max() - steady.min()) / 2 < 0.2


def test_translation_stays_in_input_hull():
    rng = np.random.default_rng(40)
    sig = [Pose(t=rng.uniform(-2, 2, size=3)) for _ in range(500)]
    state = FilterState(smoothed=sig[0], rate=0.3, period=DT)
    lo = np.min([p.t for p in sig], axis=0)
    hi = np.max([p.t for p in sig], axis=0)
    for pose in sig:
        state = filter_step(state, pose)
        assert np.all(state.smoothed.t >= lo - 1e-12)
        assert np.all(state.smoothed.t <= hi + 1e-12)


def test_rotation_step_bound():
    rng = np.random.default_rng(41)
    rate = 0.25
    targets = [Pose.rot_z(0.0)]
    for _ in range(300):
        targets.append(
            Pose(q=quat_slerp(targets[-1].q, Pose.rot_z(rng.uniform(-1, 1)).q, 0.3))
        )
    state = FilterState(smoothed=targets[0], rate=rate, period=DT)
    prev_s, prev_t = state.smoothed, targets[0]
    for tgt in targets[1:]:
        catchup, _ = pose_distance(prev_s, prev_t)
        nxt = filter_step(state, tgt)
        step_s, _ = pose_distance(nxt.smoothed, prev_s)
        step_t, _ = pose_distance(tgt, prev_t)
        assert step_s <= step_t + rate * catchup + 1e-9
        state, prev_s, prev_t = nxt, nxt.smoothed, tgt


def test_lag_zero_at_rate_one():
    sig = yaw_signal(0.25, 0.5, 10.0)
    assert measure_filter_lag(1.0, DT, sig) == 0.0


def test_lag_brackets_expected_value_at_default_rate():
    sig = yaw_signal(0.25, 0.5, 20.0)
    lag = measure_filter_lag(0.2, DT, sig)
    assert 0.040 <= lag <= 0.080


def test_lag_grows_as_rate_shrinks():
    sig = yaw_signal(0.25, 0.5, 30.0)
    lags = [measure_filter_lag(r, DT, sig) for r in (0.5, 0.2, 0.1, 0.05)]
    assert all(b > a for a, b in zip(lags, lags[1:]))


def test_degenerate_signal_rejected():
    sig = [Pose.identity() for _ in range(100)]
    with pytest.raises(DegenerateSignal):
        measure_filter_lag(0.2, DT, sig)
