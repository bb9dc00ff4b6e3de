"""Scenario parsing, experiment outputs and CLI behavior."""

import warnings

import pytest

from lisec_rtf.cli import main
from lisec_rtf.experiment import RUNS_HEADER, SUMMARY_HEADER, run_experiment
from lisec_rtf.scenario import (
    ScenarioError,
    load_scenario,
    parse_scenario,
    parse_seeds,
)


SMALL = """
# small, fast experiment used across these tests
grid_m = 120
n_clients = 8
n_attackers = 1
duration_s = 420
startup_stagger_s = 120
data_warmup_s = 180
seeds = 3
arms = baseline,attack,defense
"""


# -- parsing --------------------------------------------------------------


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.scenario"
    path.write_text("")
    s = load_scenario(path)
    assert s.n_clients == 29
    assert s.params.duration_s == 1800.0
    assert s.params.grid_m == 200.0
    assert s.params.tx_range_m == 50.0
    assert s.seeds == list(range(10))


def test_unknown_key_rejected():
    with pytest.raises(ScenarioError, match="frobnicate"):
        parse_scenario("frobnicate = 7")


def test_malformed_numeric_names_key():
    with pytest.raises(ScenarioError, match="duration_s"):
        parse_scenario("duration_s = soon")


def test_attacker_count_relaxed_with_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        s = parse_scenario("n_attackers = 5")
        s.validate()
    assert s.n_attackers == 5
    assert any("n_attackers" in str(w.message) for w in caught)


def test_attack_arm_requires_attacker():
    s = parse_scenario("n_attackers = 0\narms = attack")
    with pytest.raises(ScenarioError, match="n_attackers"):
        s.validate()


def test_seed_forms():
    assert parse_seeds("4") == [0, 1, 2, 3]
    assert parse_seeds("3,5,9") == [3, 5, 9]
    with pytest.raises(ScenarioError):
        parse_seeds("a,b")


def test_comments_and_blank_lines_ignored():
    s = parse_scenario("\n# comment\nn_clients = 5  # trailing\n\n")
    assert s.n_clients == 5


def test_encrypted_swaps_defense_arm():
    s = parse_scenario("encrypted = on")
    assert s.effective_arms() == ["baseline", "attack", "defense_encrypted"]


def test_wide_license_requires_encrypted_mode():
    s = parse_scenario("license_width = 16")
    with pytest.raises(ScenarioError, match="license_width"):
        s.validate()
    s = parse_scenario("license_width = 16\nencrypted = on")
    s.validate()


# -- experiment outputs -----------------------------------------------------


@pytest.fixture(scope="module")
def small_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("results")
    scenario = parse_scenario(SMALL)
    report = run_experiment(scenario, out_dir=out, trace=True, base=0)
    return scenario, report, out


def test_row_count_matches_arms_times_seeds(small_report):
    scenario, report, _ = small_report
    assert len(report.rows) == 3 * 3


def test_runs_csv_layout(small_report):
    _, _, out = small_report
    lines = (out / "runs.csv").read_text().splitlines()
    assert lines[0] == RUNS_HEADER
    assert len(lines) == 1 + 9
    first = lines[1].split(",")
    assert first[0] == "baseline" and first[3] == "off"


def test_summary_csv_layout(small_report):
    _, _, out = small_report
    lines = (out / "summary.csv").read_text().splitlines()
    assert lines[0] == SUMMARY_HEADER
    assert len(lines) == 1 + 3


def test_trace_files_written(small_report):
    scenario, _, out = small_report
    traces = sorted(p.name for p in out.glob("trace-*.log"))
    assert len(traces) == 9
    assert "trace-baseline-0.log" in traces
    body = (out / "trace-baseline-0.log").read_text().splitlines()
    fields = body[0].split("\t")
    assert len(fields) == 4  # time, node, event, detail


def test_trace_vocabulary(small_report):
    _, _, out = small_report
    events = set()
    for path in out.glob("trace-*.log"):
        for line in path.read_text().splitlines():
            events.add(line.split("\t")[2])
    allowed = {"DIS_TX", "DIO_TX", "DAO_TX", "DAO_FWD", "ROUTE_ADD",
               "ROUTE_FULL", "ACK", "NACK", "BLACKLIST", "DATA_TX", "DATA_RX"}
    assert events <= allowed
    assert {"DIO_TX", "DAO_TX", "ROUTE_ADD", "DATA_RX", "ACK"} <= events


def test_baseline_lossfree_pdr_exactly_one(small_report):
    _, report, _ = small_report
    for row in report.arm_rows("baseline"):
        assert row.pdr == 1.0


def test_dao_trace_lines_carry_decodable_frames(small_report):
    from lisec_rtf.messages import decode_dao
    _, _, out = small_report
    frames = 0
    for line in (out / "trace-defense-0.log").read_text().splitlines():
        _, _, event, detail = line.split("\t")
        if event in ("DAO_TX", "DAO_FWD"):
            frame = bytes.fromhex(detail.split("frame=")[1])
            decode_dao(frame)
            frames += 1
    assert frames > 0


def test_thirty_rows_for_three_arms_ten_seeds(tmp_path):
    scenario = parse_scenario(
        "grid_m = 90\nn_clients = 6\nn_attackers = 1\nduration_s = 240\n"
        "startup_stagger_s = 60\ndata_warmup_s = 90\nseeds = 10\n"
        "arms = baseline,attack,defense\n")
    report = run_experiment(scenario, base=0)
    assert len(report.rows) == 30


def test_data_schedule_arithmetic():
    # a full-length run generates exactly 60 counted packets per client
    from lisec_rtf.config import ARMS, SimParams
    from lisec_rtf.engine import build_random_world
    params = SimParams(duration_s=1800.0, data_period_s=30.0,
                       startup_stagger_s=0.0, data_warmup_s=0.0, grid_m=90.0)
    world = build_random_world(params, ARMS["baseline"], seed=3, n_clients=5,
                               n_attackers=0)
    world._schedule_initial()
    per_client = {}
    for event in world._queue:
        if event.kind == "data" and event.payload:
            per_client[event.node_id] = per_client.get(event.node_id, 0) + 1
    assert set(per_client.values()) == {60}
    # at the reference scale of 29 clients that denominator is 1740
    assert 29 * 60 == 1740


def test_seed_base_offsets_runs(tmp_path):
    scenario = parse_scenario(SMALL)
    r0 = run_experiment(scenario, base=0)
    r7 = run_experiment(scenario, base=7)
    assert [r.seed for r in r7.rows] == [r.seed + 7 for r in r0.rows]


# -- CLI ---------------------------------------------------------------------


def write_scenario(tmp_path):
    path = tmp_path / "small.scenario"
    path.write_text(SMALL)
    return path


def test_cli_writes_outputs(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("LISEC_SEED_BASE", raising=False)
    path = write_scenario(tmp_path)
    out = tmp_path / "res"
    code = main(["--scenario", str(path), "--seeds", "2", "--out", str(out)])
    assert code == 0
    assert (out / "runs.csv").exists() and (out / "summary.csv").exists()
    stdout = capsys.readouterr().out
    assert "baseline" in stdout and "runs.csv" in stdout


def test_cli_flag_overrides(tmp_path, monkeypatch):
    monkeypatch.delenv("LISEC_SEED_BASE", raising=False)
    path = write_scenario(tmp_path)
    out = tmp_path / "res"
    code = main(["--scenario", str(path), "--arms", "baseline", "--seeds", "2",
                 "--attackers", "2", "--out", str(out)])
    assert code == 0
    lines = (out / "runs.csv").read_text().splitlines()
    assert len(lines) == 1 + 2
    assert all(line.split(",")[0] == "baseline" for line in lines[1:])
    assert all(line.split(",")[2] == "2" for line in lines[1:])


def test_cli_rejects_bad_scenario(tmp_path, capsys):
    path = tmp_path / "bad.scenario"
    path.write_text("nonsense_key = 4")
    assert main(["--scenario", str(path)]) == 2
    assert "nonsense_key" in capsys.readouterr().err


def test_cli_seed_base_env(tmp_path, monkeypatch):
    path = write_scenario(tmp_path)
    out = tmp_path / "res"
    monkeypatch.setenv("LISEC_SEED_BASE", "100")
    main(["--scenario", str(path), "--arms", "baseline", "--seeds", "1",
          "--out", str(out)])
    lines = (out / "runs.csv").read_text().splitlines()
    assert lines[1].split(",")[1] == "100"


def test_cli_reruns_are_byte_identical(tmp_path, monkeypatch):
    monkeypatch.delenv("LISEC_SEED_BASE", raising=False)
    path = write_scenario(tmp_path)
    blobs = []
    for name in ("one", "two"):
        out = tmp_path / name
        code = main(["--scenario", str(path), "--seeds", "2",
                     "--trace", "on", "--out", str(out)])
        assert code == 0
        runs = (out / "runs.csv").read_bytes()
        traces = b"".join(p.read_bytes() for p in sorted(out.glob("trace-*.log")))
        blobs.append((runs, traces))
    assert blobs[0] == blobs[1]
