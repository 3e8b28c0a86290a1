from src.status_monitor import MAX_ERRORS, StageMonitor


def test_stage_is_current_until_inputs_or_outputs_change(tmp_path):
    source = tmp_path / "input.txt"
    source.write_text("a", encoding="utf-8")
    output = tmp_path / "output.txt"
    output.write_text("result", encoding="utf-8")

    monitor = StageMonitor(str(tmp_path))
    digest = monitor.input_hash({"k": 1}, [str(source), None])
    monitor.record_stage("ingest", digest, [str(output)])

    reloaded = StageMonitor(str(tmp_path))
    assert reloaded.is_current("ingest", digest)
    assert not reloaded.is_current("ingest", reloaded.input_hash({"k": 2}, [str(source)]))

    source.write_text("b", encoding="utf-8")
    assert StageMonitor.input_hash({"k": 1}, [str(source)]) != digest

    output.write_text("tampered", encoding="utf-8")
    assert not reloaded.is_current("ingest", digest)


def test_failed_stage_is_never_current(tmp_path):
    monitor = StageMonitor(str(tmp_path))
    digest = monitor.input_hash({}, [])
    monitor.record_stage("label", digest, [])
    monitor.record_error("label", "boom")
    assert not monitor.is_current("label", digest)
    assert monitor.status["errors"][0]["error"] == "boom"


def test_error_log_is_capped(tmp_path):
    monitor = StageMonitor(str(tmp_path))
    for i in range(MAX_ERRORS + 5):
        monitor.record_error("train", f"error {i}")
    assert len(monitor.status["errors"]) == MAX_ERRORS
    assert monitor.status["errors"][0]["error"] == f"error {MAX_ERRORS + 4}"
    assert monitor.record_run_start() == 1
