import csv
import json

import pytest

from amapf import cli
from amapf.flow_solver import SolveStats, SolveTimeout

CORRIDOR_MAP = "type octile\nheight 1\nwidth 6\nmap\n......\n"
# agents at C and F heading for A and D
CORRIDOR_SCEN = "version 1\n0\tcorridor.map\t6\t1\t2\t0\t0\t0\t2\n0\tcorridor.map\t6\t1\t5\t0\t3\t0\t2\n"


@pytest.fixture
def files(tmp_path):
    maps = tmp_path / "maps"
    scens = tmp_path / "scens"
    maps.mkdir()
    scens.mkdir()
    (maps / "corridor.map").write_text(CORRIDOR_MAP)
    (scens / "corridor-1.scen").write_text(CORRIDOR_SCEN)
    (scens / "corridor-2.scen").write_text(CORRIDOR_SCEN.replace("\t5\t0\t3\t0", "\t4\t0\t5\t0"))
    return tmp_path, maps / "corridor.map", scens / "corridor-1.scen"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    return code, capsys.readouterr()


@pytest.mark.parametrize("engine", ["bulk", "baseline"])
def test_solve_corridor(files, capsys, engine):
    _, map_path, scen = files
    code, out = run(["solve", "--map", map_path, "--scen", scen, "--agents", 2, "--engine", engine], capsys)
    assert code == 0
    doc = json.loads(out.out)
    assert doc["makespan"] == 2 and doc["status"] == "solved"
    assert doc["map"] == {"name": "corridor", "width": 6, "height": 1}
    assert sorted(a["actions"] for a in doc["agents"]) == [["L", "L"], ["L", "L"]]
    assert doc["stats"]["augmentations"] >= 2


def test_plain_format(files, capsys):
    _, map_path, scen = files
    code, out = run(["solve", "--map", map_path, "--scen", scen, "--agents", 2, "--format", "plain"], capsys)
    assert code == 0 and "makespan: 2" in out.out


def test_zero_agents_is_usage_error(files, capsys):
    _, map_path, scen = files
    with pytest.raises(SystemExit) as info:
        cli.main(["solve", "--map", str(map_path), "--scen", str(scen), "--agents", "0"])
    assert info.value.code == 1


def test_missing_file_is_input_error(files, capsys):
    _, map_path, _ = files
    code, out = run(["solve", "--map", map_path, "--scen", "nowhere.scen", "--agents", 1], capsys)
    assert code == 2 and "cannot read" in out.err


def test_parse_error_is_input_error(files, capsys):
    tmp, _, scen = files
    bad = tmp / "bad.map"
    bad.write_text("type octile\nheight 2\nwidth 6\nmap\n......\n")
    code, out = run(["solve", "--map", bad, "--scen", scen, "--agents", 1], capsys)
    assert code == 2 and "row count mismatch" in out.err


def test_timeout_exit_code(files, capsys, monkeypatch):
    _, map_path, scen = files

    def slow(*args, **kwargs):
        raise SolveTimeout(SolveStats())

    monkeypatch.setattr(cli, "solve_amapf", slow)
    code, _ = run(["solve", "--map", map_path, "--scen", scen, "--agents", 2], capsys)
    assert code == 3


def test_t_override_below_optimum_reports_flow(files, capsys):
    _, map_path, scen = files
    code, out = run(["solve", "--map", map_path, "--scen", scen, "--agents", 2, "--t-override", 1], capsys)
    assert code == 0
    doc = json.loads(out.out)
    assert doc["status"] == "infeasible" and doc["horizon"] == 1
    assert doc["flow"] == 1 and doc["agents_count"] == 2


def test_t_override_above_optimum_solves(files, capsys):
    _, map_path, scen = files
    code, out = run(["solve", "--map", map_path, "--scen", scen, "--agents", 2, "--t-override", 4], capsys)
    doc = json.loads(out.out)
    assert code == 0 and doc["horizon"] == 4 and doc["makespan"] == 2


def solve_to_file(files, capsys):
    tmp, map_path, scen = files
    out = tmp / "solution.json"
    assert run(["solve", "--map", map_path, "--scen", scen, "--agents", 2, "--out", out], capsys)[0] == 0
    return out


def test_validate_round_trip(files, capsys):
    _, map_path, scen = files
    sol = solve_to_file(files, capsys)
    code, out = run(["validate", "--map", map_path, "--solution", sol], capsys)
    assert code == 0 and out.out.startswith("ok: 2 agents, makespan 2")
    code, _ = run(["validate", "--map", map_path, "--solution", sol, "--scen", scen, "--agents", 2], capsys)
    assert code == 0


def test_validate_reports_corrupted_action(files, capsys):
    _, map_path, _ = files
    sol = solve_to_file(files, capsys)
    doc = json.loads(sol.read_text())
    doc["agents"][0]["actions"] = ["R", "R"]  # runs head-on into the other agent
    sol.write_text(json.dumps(doc))
    code, out = run(["validate", "--map", map_path, "--solution", sol], capsys)
    assert code == 2
    assert "edge conflict: step 1 agents 0,1 on (3, 0)-(4, 0)" in out.out


def test_validate_off_map_move(files, capsys):
    _, map_path, _ = files
    sol = solve_to_file(files, capsys)
    doc = json.loads(sol.read_text())
    doc["agents"][0]["actions"][0] = "U"
    sol.write_text(json.dumps(doc))
    code, out = run(["validate", "--map", map_path, "--solution", sol], capsys)
    assert code == 2 and "illegal move: step 0" in out.out and "off-map" in out.out


def test_validate_wrong_dimensions(files, capsys):
    tmp, _, _ = files
    sol = solve_to_file(files, capsys)
    other = tmp / "wide.map"
    other.write_text("type octile\nheight 1\nwidth 7\nmap\n.......\n")
    code, out = run(["validate", "--map", other, "--solution", sol], capsys)
    assert code == 2 and "7x1" in out.err


def test_validate_schema_mismatch(files, capsys):
    tmp, map_path, _ = files
    sol = tmp / "junk.json"
    sol.write_text(json.dumps({"agents": []}))
    code, out = run(["validate", "--map", map_path, "--solution", sol], capsys)
    assert code == 2 and "schema" in out.err


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_bench_rows(files, capsys):
    tmp, _, _ = files
    out = tmp / "bench.csv"
    code, _ = run(["bench", "--maps", tmp / "maps", "--scens", tmp / "scens", "--agent-schedule", "1,2,4",
                   "--out", out], capsys)
    assert code == 0
    rows = read_rows(out)
    assert list(rows[0]) == cli.BENCH_COLUMNS
    # only two entries per scenario file: the 4-agent run is not attempted
    assert len(rows) == 2 * 2 * 2
    assert {r["status"] for r in rows} == {"solved"}
    lbs = [r for r in rows if r["agents"] == "2"]
    assert all(int(r["makespan"]) >= 1 for r in lbs)


def test_bench_three_rows_per_scenario_and_engine(tmp_path, capsys):
    code, _ = run(["generate", "--width", 8, "--height", 8, "--agents", 8, "--scenarios", 2, "--seed", 4,
                   "--out-dir", tmp_path], capsys)
    assert code == 0
    rows = cli.run_bench(tmp_path, tmp_path, ["bulk", "baseline"], [1, 2, 4], 30.0)
    per = {}
    for r in rows:
        per[(r["scenario"], r["engine"])] = per.get((r["scenario"], r["engine"]), 0) + 1
    assert len(per) == 4 and set(per.values()) == {3}


def test_bench_stops_scenario_on_timeout(files, monkeypatch):
    tmp, _, _ = files
    real = cli.solve_amapf

    def flaky(instance, engine, options):
        if instance.k == 2:
            raise SolveTimeout(SolveStats())
        return real(instance, engine, options)

    monkeypatch.setattr(cli, "solve_amapf", flaky)
    (tmp / "scens" / "corridor-1.scen").write_text(CORRIDOR_SCEN + "0\tcorridor.map\t6\t1\t1\t0\t1\t0\t0\n")
    rows = cli.run_bench(tmp / "maps", tmp / "scens", ["bulk"], [1, 2, 3], 30.0)
    mine = [(r["agents"], r["status"]) for r in rows if r["scenario"] == "corridor-1"]
    assert mine == [(1, "solved"), (2, "timeout")]


def test_bench_is_deterministic_and_parallel_safe(tmp_path, capsys):
    run(["generate", "--width", 8, "--height", 8, "--agents", 4, "--scenarios", 3, "--out-dir", tmp_path], capsys)
    strip = lambda rows: [{k: v for k, v in r.items() if not k.endswith("_ms")} for r in rows]  # noqa: E731
    serial = strip(cli.run_bench(tmp_path, tmp_path, ["bulk"], [1, 2, 4], 30.0))
    assert serial == strip(cli.run_bench(tmp_path, tmp_path, ["bulk"], [1, 2, 4], 30.0))
    assert serial == strip(cli.run_bench(tmp_path, tmp_path, ["bulk"], [1, 2, 4], 30.0, jobs=2))


def test_bench_unknown_engine(files, capsys):
    tmp, _, _ = files
    code, _ = run(["bench", "--maps", tmp / "maps", "--scens", tmp / "scens", "--engines", "dfs"], capsys)
    assert code == 1


def test_summary(tmp_path, capsys):
    rows = [
        {"map": "m", "scenario": "s1", "agents": "1", "engine": "bulk", "status": "solved"},
        {"map": "m", "scenario": "s1", "agents": "2", "engine": "bulk", "status": "solved"},
        {"map": "m", "scenario": "s1", "agents": "1", "engine": "baseline", "status": "solved"},
        {"map": "m", "scenario": "s1", "agents": "2", "engine": "baseline", "status": "timeout"},
    ]
    assert cli.success_rates(rows) == {"m": {"baseline": 0.5, "bulk": 1.0}}
    assert cli.success_rates(rows, 4) == {"m": {"baseline": 0.25, "bulk": 0.5}}
    path = tmp_path / "b.csv"
    with open(path, "w", newline="") as fh:
        cli.write_csv([dict(dict.fromkeys(cli.BENCH_COLUMNS, ""), **r) for r in rows], fh)
    code, out = run(["summary", path], capsys)
    assert code == 0
    assert out.out.splitlines() == ["map,baseline,bulk", "m,50%,100%"]


def test_generate_writes_loadable_files(tmp_path, capsys):
    code, out = run(["generate", "--width", 10, "--height", 6, "--agents", 5, "--seed", 9, "--out-dir", tmp_path],
                    capsys)
    assert code == 0
    map_path = tmp_path / "random-10-6-20.map"
    assert out.out.strip() == str(map_path)
    inst = cli.load_instance(str(map_path), str(tmp_path / "random-10-6-20-random-1.scen"), 5)
    assert inst.k == 5
