import json
import time

import pytest
from fastapi.testclient import TestClient

from televiz.scenario import (
    CameraConfig,
    HeadSweep,
    Mode,
    NetworkConfig,
    OperatorConfig,
    OperatorShift,
    ScenarioConfig,
    preset,
)
from televiz.service import create_app


def live_config():
    # headset fovs modestly above the camera's, so a yaw offset visibly
    # costs coverage under the planar ray-grid measure
    return ScenarioConfig(
        name="live_test",
        duration_s=60.0,
        mode=Mode.DECOUPLED,
        coverage_every_n_ticks=3,
        hmd=CameraConfig(hfov_deg=100, vfov_deg=70, cols=32, rows=32),
        network=NetworkConfig(command_delay_s=0.05, feedback_delay_s=0.05),
        operator=OperatorConfig(script=[OperatorShift(at_s=0.2, offset_m=(0.0, 0.3, 0.0))]),
    )


def small_batch_config():
    return ScenarioConfig(
        name="batch",
        duration_s=2.0,
        coverage_every_n_ticks=0,
        network=NetworkConfig(command_delay_s=0.1, feedback_delay_s=0.1),
        operator=OperatorConfig(
            script=[HeadSweep(start_s=0.2, duration_s=1.8, amplitude_deg=25, period_s=1.5)]
        ),
    )


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app(live_config())) as c:
        yield c


def recv_until(ws, kind, limit=120):
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if msg["type"] == kind:
            return msg
    raise AssertionError(f"no {kind} message within {limit} frames")


def recv_snapshot_after(ws, tick, limit=200):
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        if msg["type"] == "snapshot" and msg["tick"] >= tick:
            return msg
    raise AssertionError(f"no snapshot past tick {tick}")


def test_health(client):
    res = client.get("/health")
    assert res.status_code == 200
    body = res.json()
    assert body["status"] == "ok"


def test_scenario_echo(client):
    res = client.get("/scenario")
    assert res.status_code == 200
    assert res.json()["name"] == "live_test"


def test_run_endpoint_summary_and_metrics(client):
    payload = {"config": json.loads(small_batch_config().model_dump_json()),
               "include_metrics": True}
    res = client.post("/run", json=payload)
    assert res.status_code == 200
    body = res.json()
    assert body["summary"]["ticks"] == 120
    assert len(body["metrics"]) == 120
    assert body["metrics"][0]["time_s"] == 0.0


def test_run_endpoint_is_deterministic(client):
    payload = {"config": json.loads(small_batch_config().model_dump_json()),
               "include_metrics": True}
    a = client.post("/run", json=payload).json()
    b = client.post("/run", json=payload).json()
    assert a == b


def test_run_endpoint_validation_error(client):
    res = client.post("/run", json={"config": {"filter_rate": 99}})
    assert res.status_code == 422


def test_compare_endpoint(client):
    cfg = preset("head_turn", seed=2).model_copy(
        update={"duration_s": 3.0, "coverage_every_n_ticks": 4}
    )
    res = client.post("/compare", json={"config": json.loads(cfg.model_dump_json())})
    assert res.status_code == 200
    rows = res.json()["rows"]
    assert [r["mode"] for r in rows] == ["FixedRGB", "Decoupled", "DecoupledWithMesh"]


def test_sweep_endpoint(client):
    cfg = small_batch_config().model_copy(update={"duration_s": 12.0})
    res = client.post(
        "/sweep-filter",
        json={"config": json.loads(cfg.model_dump_json()), "rates": [1.0, 0.2]},
    )
    assert res.status_code == 200
    entries = res.json()["entries"]
    assert entries[0]["lag_ms"] == 0.0
    assert entries[1]["lag_ms"] > 0.0


class TestWebsocket:
    def test_snapshot_stream_and_label_consistency(self, client):
        with client.websocket_connect("/ws") as ws:
            snap = recv_until(ws, "snapshot")
            assert {"tick", "operator_pose", "robot_pose", "calibration_residual"} <= set(snap)
            for _ in range(200):
                if snap.get("coverage_image"):
                    break
                snap = recv_until(ws, "snapshot")
            image = snap["coverage_image"]
            report = snap["coverage_report"]
            labels = image["labels"]
            total = image["cols"] * image["rows"]
            assert len(labels) == total
            assert len(image["colors_hex"]) == total * 6
            one_cell = 1.0 / total + 1e-12
            assert abs(labels.count("L") / total - report["live_fraction"]) <= one_cell
            assert abs(labels.count("M") / total - report["mesh_fraction"]) <= one_cell
            assert abs(labels.count("B") / total - report["blank_fraction"]) <= one_cell

    def test_calibrate_command_round_trip(self, client):
        with client.websocket_connect("/ws") as ws:
            snap = recv_until(ws, "snapshot")
            # the scripted sideways shift leaves a standing misalignment
            for _ in range(100):
                snap = recv_until(ws, "snapshot")
                if snap["time_s"] > 0.5:
                    break
            assert snap["calibration_residual"] > 0.05
            ws.send_text(json.dumps({"type": "command", "name": "calibrate"}))
            ack = recv_until(ws, "ack")
            assert ack["name"] == "calibrate"
            after = recv_snapshot_after(ws, ack["tick"] + 1)
            assert after["calibration_residual"] < 1e-9

    def test_head_target_and_mode_round_trip(self, client):
        with client.websocket_connect("/ws") as ws:
            recv_until(ws, "snapshot")
            ws.send_text(json.dumps(
                {"type": "command", "name": "head_target", "yaw": 30.0, "pitch": 5.0}
            ))
            ack = recv_until(ws, "ack")
            snap = recv_snapshot_after(ws, ack["tick"] + 1)
            assert abs(snap["operator_pose"]["yaw_deg"] - 30.0) < 1e-6
            ws.send_text(json.dumps(
                {"type": "command", "name": "set_mode", "mode": "DecoupledWithMesh"}
            ))
            ack = recv_until(ws, "ack")
            snap = recv_snapshot_after(ws, ack["tick"] + 1)
            assert snap["mode"] == "DecoupledWithMesh"
            ws.send_text(json.dumps(
                {"type": "command", "name": "set_mode", "mode": "Decoupled"}
            ))
            recv_until(ws, "ack")

    def test_head_target_beyond_neck_limit_saturates(self, client):
        # the operator may ask for 80 degrees, but the robot stops at its
        # 55 degree limit and the uncovered region grows
        with client.websocket_connect("/ws") as ws:
            snap = recv_until(ws, "snapshot")
            for _ in range(100):
                snap = recv_until(ws, "snapshot")
                if snap.get("coverage_report"):
                    break
            blank_before = snap["coverage_report"]["blank_fraction"]
            ws.send_text(json.dumps(
                {"type": "command", "name": "head_target", "yaw": 80.0, "pitch": 0.0}
            ))
            recv_until(ws, "ack")
            deadline = time.time() + 5.0
            while time.time() < deadline:
                snap = recv_until(ws, "snapshot")
                if abs(snap["robot_pose"]["yaw_deg"] - 55.0) < 1.0 and snap.get("coverage_report"):
                    break
            assert abs(snap["robot_pose"]["yaw_deg"] - 55.0) < 1.0
            assert abs(snap["operator_pose"]["yaw_deg"] - 80.0) < 1e-6
            assert snap["coverage_report"]["blank_fraction"] > blank_before + 0.02
            ws.send_text(json.dumps(
                {"type": "command", "name": "head_target", "yaw": 0.0, "pitch": 0.0}
            ))
            recv_until(ws, "ack")

    def test_scan_command_round_trip(self, client):
        with client.websocket_connect("/ws") as ws:
            recv_until(ws, "snapshot")
            ws.send_text(json.dumps({"type": "command", "name": "scan", "action": "start"}))
            ack = recv_until(ws, "ack")
            snap = recv_snapshot_after(ws, ack["tick"] + 1)
            assert snap["scanning"] is True
            ws.send_text(json.dumps({"type": "command", "name": "scan", "action": "stop"}))
            recv_until(ws, "ack")

    def test_bad_command_yields_error(self, client):
        with client.websocket_connect("/ws") as ws:
            recv_until(ws, "snapshot")
            ws.send_text(json.dumps({"type": "command", "name": "warp_drive"}))
            err = recv_until(ws, "error")
            assert "bad command" in err["message"]

    def test_reconnect_resumes_stream(self, client):
        with client.websocket_connect("/ws") as ws:
            first = recv_until(ws, "snapshot")
        time.sleep(0.1)
        with client.websocket_connect("/ws") as ws:
            second = recv_until(ws, "snapshot")
        assert second["tick"] >= first["tick"]
