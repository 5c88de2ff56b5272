import io
import json
import socket
import threading

import numpy as np
import pytest

from posegest import (
    CLASS_LABELS,
    GestureClass,
    MlpModel,
    PoseFrame,
    PredictionServer,
    ProtocolError,
    SynthConfig,
    TrainConfig,
    archetype_frame,
    generate,
    handle_line,
    loso_split,
    model_checksum,
    normalize_frame,
    parse_frame_line,
    predict,
    serve_stream,
    train_fold,
)


@pytest.fixture(scope="module")
def model():
    return MlpModel.initialize((132, 16, 8), seed=0)


@pytest.fixture(scope="module")
def checksum(model):
    return model_checksum(model)


@pytest.fixture(scope="module")
def trained_model():
    ds = generate(
        SynthConfig(subjects=2, samples_per_class_per_subject=3, distances=(1.0,), noise_std=0.005, seed=11)
    )
    fold = loso_split(ds).folds[0]
    config = TrainConfig(seed=0, max_epochs=300, patience=300)
    return train_fold(ds, fold, config, dims=(132, 16, 8)).model


def frame_line(frame, frame_id=None):
    message = {"type": "frame"}
    if frame_id is not None:
        message["id"] = frame_id
    message["landmarks"] = frame.points.tolist()
    return json.dumps(message)


class TestParseFrameLine:
    def test_valid_with_id(self):
        source = archetype_frame(GestureClass.STATIC)
        frame, frame_id = parse_frame_line(frame_line(source, 42))
        assert frame_id == 42
        assert np.array_equal(frame.points, source.points)

    def test_id_zero_is_kept(self):
        frame, frame_id = parse_frame_line(frame_line(archetype_frame(GestureClass.STATIC), 0))
        assert frame_id == 0

    def test_missing_or_null_id(self):
        source = archetype_frame(GestureClass.STATIC)
        assert parse_frame_line(frame_line(source))[1] is None
        message = json.loads(frame_line(source))
        message["id"] = None
        assert parse_frame_line(json.dumps(message))[1] is None

    @pytest.mark.parametrize(
        "line",
        [
            "hello",
            "{not json",
            "[1,2,3]",
            '"frame"',
            '{"type":"prediction","landmarks":[]}',
            '{"landmarks":[]}',
            '{"type":"frame"}',
            '{"type":"frame","landmarks":"rows"}',
        ],
    )
    def test_parse_errors(self, line):
        with pytest.raises(ProtocolError) as excinfo:
            parse_frame_line(line)
        assert excinfo.value.reason == "parse"

    def test_bad_id_type(self):
        message = json.loads(frame_line(archetype_frame(GestureClass.STATIC)))
        for bad in ("7", 1.5, True, [1]):
            message["id"] = bad
            with pytest.raises(ProtocolError) as excinfo:
                parse_frame_line(json.dumps(message))
            assert excinfo.value.reason == "parse"

    def test_arity_errors(self):
        rows = archetype_frame(GestureClass.STATIC).points.tolist()
        short = {"type": "frame", "landmarks": rows[:32]}
        with pytest.raises(ProtocolError) as excinfo:
            parse_frame_line(json.dumps(short))
        assert excinfo.value.reason == "arity"

        bad_row = [row[:] for row in rows]
        bad_row[5] = [0.1, 0.2, 0.3]
        with pytest.raises(ProtocolError) as excinfo:
            parse_frame_line(json.dumps({"type": "frame", "landmarks": bad_row}))
        assert excinfo.value.reason == "arity"

        not_a_row = [row[:] for row in rows]
        not_a_row[5] = "xyzw"
        with pytest.raises(ProtocolError) as excinfo:
            parse_frame_line(json.dumps({"type": "frame", "landmarks": not_a_row}))
        assert excinfo.value.reason == "arity"

    def test_nonfinite_errors(self):
        rows = archetype_frame(GestureClass.STATIC).points.tolist()
        for bad in (float("nan"), float("inf"), float("-inf")):
            rows[3][2] = bad
            with pytest.raises(ProtocolError) as excinfo:
                parse_frame_line(json.dumps({"type": "frame", "landmarks": rows}))
            assert excinfo.value.reason == "nonfinite"

    def test_non_numeric_value_is_parse(self):
        rows = archetype_frame(GestureClass.STATIC).points.tolist()
        rows[3][2] = "0.5"
        with pytest.raises(ProtocolError) as excinfo:
            parse_frame_line(json.dumps({"type": "frame", "landmarks": rows}))
        assert excinfo.value.reason == "parse"

    def test_visibility_out_of_range_is_parse(self):
        rows = archetype_frame(GestureClass.STATIC).points.tolist()
        rows[3][3] = 1.5
        with pytest.raises(ProtocolError) as excinfo:
            parse_frame_line(json.dumps({"type": "frame", "landmarks": rows}))
        assert excinfo.value.reason == "parse"


class TestHandleLine:
    def test_prediction_payload(self, model, checksum):
        source = archetype_frame(GestureClass.LEFT)
        reply = json.loads(handle_line(frame_line(source, 9), model, checksum))
        assert reply["type"] == "prediction"
        assert reply["id"] == 9
        assert list(reply["probs"]) == list(CLASS_LABELS)
        assert sum(reply["probs"].values()) == pytest.approx(1.0, abs=1e-9)
        assert reply["model"] == checksum
        gesture, probs = predict(model, source)
        assert reply["gesture"] == gesture.label
        assert reply["gesture"] == max(reply["probs"], key=reply["probs"].get)
        for label, p in zip(CLASS_LABELS, probs):
            assert reply["probs"][label] == p

    def test_id_omitted_when_absent(self, model, checksum):
        reply = json.loads(
            handle_line(frame_line(archetype_frame(GestureClass.STATIC)), model, checksum)
        )
        assert "id" not in reply

    def test_error_lines_are_exact(self, model, checksum):
        assert handle_line("hello", model, checksum) == '{"type":"error","reason":"parse"}'
        rows = archetype_frame(GestureClass.STATIC).points.tolist()
        assert (
            handle_line(json.dumps({"type": "frame", "landmarks": rows[:5]}), model, checksum)
            == '{"type":"error","reason":"arity"}'
        )

    def test_stateless_across_calls(self, model, checksum):
        left = frame_line(archetype_frame(GestureClass.LEFT), 1)
        first = handle_line(left, model, checksum)
        handle_line(frame_line(archetype_frame(GestureClass.STOP), 2), model, checksum)
        handle_line("garbage", model, checksum)
        assert handle_line(left, model, checksum) == first

    def test_transform_applied_before_prediction(self, model, checksum):
        source = archetype_frame(GestureClass.SHRUG)
        reply = json.loads(
            handle_line(frame_line(source), model, checksum, transform=normalize_frame)
        )
        gesture, probs = predict(model, normalize_frame(source))
        assert reply["gesture"] == gesture.label
        assert reply["probs"][gesture.label] == float(probs[gesture.index])

    def test_transform_failure_answers_nonfinite(self, model, checksum):
        degenerate = PoseFrame(np.zeros((33, 4)))
        reply = handle_line(frame_line(degenerate), model, checksum, transform=normalize_frame)
        assert reply == '{"type":"error","reason":"nonfinite"}'


class TestServeStream:
    def test_one_line_out_per_line_in(self, model, checksum):
        lines = [
            frame_line(archetype_frame(GestureClass.LEFT), 0),
            "broken",
            frame_line(archetype_frame(GestureClass.STOP), 1),
            "",
            frame_line(archetype_frame(GestureClass.YES), 2),
        ]
        out = io.StringIO()
        errors = serve_stream(model, checksum, io.StringIO("\n".join(lines) + "\n"), out)
        replies = out.getvalue().splitlines()
        assert errors == 1
        assert len(replies) == 4  # the blank line produces nothing
        assert json.loads(replies[0])["id"] == 0
        assert json.loads(replies[1]) == {"type": "error", "reason": "parse"}
        assert json.loads(replies[2])["id"] == 1
        assert json.loads(replies[3])["id"] == 2

    def test_matches_handle_line_bytes(self, model, checksum):
        line = frame_line(archetype_frame(GestureClass.ATTENTION), 5)
        out = io.StringIO()
        serve_stream(model, checksum, io.StringIO(line + "\n"), out)
        assert out.getvalue() == handle_line(line, model, checksum) + "\n"


@pytest.fixture()
def tcp_server(model, checksum):
    server = PredictionServer(("127.0.0.1", 0), model, checksum)
    thread = threading.Thread(target=server.serve_forever, kwargs={"poll_interval": 0.02})
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


def connect(server):
    host, port = server.bound_address
    sock = socket.create_connection((host, port), timeout=10)
    return sock, sock.makefile("rw", encoding="utf-8", newline="\n")


class TestTcpServer:
    def test_pipelined_frames_in_order(self, tcp_server, model, checksum):
        sock, fh = connect(tcp_server)
        with sock:
            frame = archetype_frame(GestureClass.STATIC)
            for i in range(100):
                fh.write(frame_line(frame, i) + "\n")
            fh.flush()
            ids = [json.loads(fh.readline())["id"] for _ in range(100)]
        assert ids == list(range(100))

    def test_malformed_line_keeps_connection_open(self, tcp_server):
        sock, fh = connect(tcp_server)
        with sock:
            fh.write("hello\n")
            fh.flush()
            assert json.loads(fh.readline()) == {"type": "error", "reason": "parse"}
            fh.write(frame_line(archetype_frame(GestureClass.LEFT), 7) + "\n")
            fh.flush()
            assert json.loads(fh.readline())["id"] == 7

    def test_concurrent_connections_stay_independent(self, tcp_server):
        frame = archetype_frame(GestureClass.STATIC)
        results = {}

        def client(base):
            sock, fh = connect(tcp_server)
            with sock:
                got = []
                for i in range(25):
                    fh.write(frame_line(frame, base + i) + "\n")
                    fh.flush()
                    got.append(json.loads(fh.readline())["id"])
                results[base] = got

        threads = [threading.Thread(target=client, args=(base,)) for base in (1000, 2000)]
        for t in threads:
            t.start()
        for t in threads:
            t.join(timeout=30)
        assert results[1000] == list(range(1000, 1025))
        assert results[2000] == list(range(2000, 2025))

    def test_tcp_reply_matches_stdio_reply(self, tcp_server, model, checksum):
        line = frame_line(archetype_frame(GestureClass.YES), 11)
        sock, fh = connect(tcp_server)
        with sock:
            fh.write(line + "\n")
            fh.flush()
            tcp_reply = fh.readline().rstrip("\n")
        assert tcp_reply == handle_line(line, model, checksum)


class TestEndToEnd:
    def test_trained_model_recognizes_left_archetype(self, trained_model):
        checksum = model_checksum(trained_model)
        reply = json.loads(
            handle_line(frame_line(archetype_frame(GestureClass.LEFT)), trained_model, checksum)
        )
        assert reply["gesture"] == "left"
        assert reply["probs"]["left"] > 0.5

    def test_zero_frame_is_still_answered(self, model, checksum):
        zero = PoseFrame(np.zeros((33, 4)))
        reply = json.loads(handle_line(frame_line(zero), model, checksum))
        assert reply["type"] == "prediction"
        assert reply["gesture"] in CLASS_LABELS
        assert sum(reply["probs"].values()) == pytest.approx(1.0, abs=1e-9)
