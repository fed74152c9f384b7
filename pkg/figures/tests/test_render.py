import subprocess
import sys
from pathlib import Path

import pytest

from figures.cli import main
from figures.render import KINDS, FigureError, FigureJob, render

HEADER = "experiment,strategy,hops,cost_std,instance,trial,metric,value,seed"
STRATEGIES = ("pses-layer-greedy", "ibt-layer-greedy", "pses-segment-greedy",
              "ibt-segment-greedy", "bbt")


def sweep_csv(tmp_path, name="hops_sweep.csv", x_field="hops", metric="completion_time"):
    lines = [HEADER]
    xs = (4, 5, 6) if x_field == "hops" else (0.0, 0.2, 0.4)
    for strategy in STRATEGIES:
        for x in xs:
            for inst in range(2):
                for trial in range(2):
                    value = 2.0 + (hash((strategy, x, inst, trial)) % 100) / 100.0
                    hops = x if x_field == "hops" else 6
                    std = 0.1 if x_field == "hops" else x
                    lines.append(
                        f"sweep,{strategy},{hops},{std},{inst},{trial},{metric},{value},7"
                    )
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


def bench_csv(tmp_path):
    lines = [HEADER]
    for strategy in STRATEGIES:
        for hops in (4, 6, 8):
            for inst in range(2):
                value = 10.0 * (1 + STRATEGIES.index(strategy)) * hops
                lines.append(
                    f"planner-bench,{strategy},{hops},0.1,{inst},,plan_wall_time_us,{value},7"
                )
    path = tmp_path / "planner_bench.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def retrans_csv(tmp_path):
    lines = [HEADER]
    for policy, scale in (("on-demand", 1.0), ("full-path", 3.0)):
        for inst in range(3):
            for trial in range(2):
                lines.append(f"retrans,{policy},5,0.1,{inst},{trial},completion_time,{4.0*scale},7")
                lines.append(f"retrans,{policy},5,0.1,{inst},{trial},pairs_prepared,{6.0*scale},7")
    path = tmp_path / "retrans_compare.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


class TestRenderKinds:
    def test_hops_line_chart_has_five_series(self, tmp_path):
        csv = sweep_csv(tmp_path)
        result = render(FigureJob("hops", str(csv), str(tmp_path / "hops.svg")))
        assert sorted(result["series"]) == sorted(STRATEGIES)
        assert Path(result["out"]).stat().st_size > 0

    def test_diff_chart_has_two_series(self, tmp_path):
        csv = sweep_csv(tmp_path)
        result = render(FigureJob("hops_diff", str(csv), str(tmp_path / "d.svg")))
        assert result["series"] == ["diff-layer-greedy", "diff-segment-greedy"]

    def test_std_charts(self, tmp_path):
        csv = sweep_csv(tmp_path, "std_sweep.csv", x_field="cost_std")
        for kind in ("std", "std_diff"):
            result = render(FigureJob(kind, str(csv), str(tmp_path / f"{kind}.svg")))
            assert result["series"]

    def test_retrans_grouped_bars(self, tmp_path):
        csv = retrans_csv(tmp_path)
        result = render(FigureJob("retrans", str(csv), str(tmp_path / "r.svg")))
        assert result["series"] == ["full-path", "on-demand"]

    def test_runtime_log_chart(self, tmp_path):
        csv = bench_csv(tmp_path)
        result = render(FigureJob("runtime", str(csv), str(tmp_path / "rt.png")))
        assert sorted(result["series"]) == sorted(STRATEGIES)

    def test_raster_format_from_extension(self, tmp_path):
        job = FigureJob("hops", "x.csv", str(tmp_path / "out.png"))
        assert job.format == "raster"
        assert FigureJob("hops", "x.csv", "out.svg").format == "vector"


class TestDeterminism:
    def test_rerender_is_byte_identical(self, tmp_path):
        csv = sweep_csv(tmp_path)
        out = tmp_path / "hops.svg"
        render(FigureJob("hops", str(csv), str(out)))
        first = out.read_bytes()
        render(FigureJob("hops", str(csv), str(out)))
        assert out.read_bytes() == first


class TestErrors:
    def test_missing_series_listed(self, tmp_path):
        lines = [HEADER]
        for x in (4, 5):
            lines.append(f"sweep,bbt,{x},0.1,0,0,completion_time,3.0,7")
        csv = tmp_path / "partial.csv"
        csv.write_text("\n".join(lines) + "\n")
        with pytest.raises(FigureError) as err:
            render(FigureJob("hops", str(csv), str(tmp_path / "x.svg")))
        assert "pses-layer-greedy" in str(err.value)

    def test_empty_csv_fails_without_output(self, tmp_path):
        csv = tmp_path / "empty.csv"
        csv.write_text(HEADER + "\n")
        out = tmp_path / "never.svg"
        with pytest.raises(FigureError):
            render(FigureJob("hops", str(csv), str(out)))
        assert not out.exists()

    def test_unknown_kind(self, tmp_path):
        csv = sweep_csv(tmp_path)
        with pytest.raises(FigureError):
            render(FigureJob("pie", str(csv), str(tmp_path / "x.svg")))


class TestCli:
    def test_cli_renders(self, tmp_path, capsys):
        csv = sweep_csv(tmp_path)
        out = tmp_path / "o.svg"
        assert main(["hops", str(csv), str(out)]) == 0
        assert out.exists()
        assert "5 series" in capsys.readouterr().out

    def test_cli_error_exit_2(self, tmp_path, capsys):
        csv = tmp_path / "empty.csv"
        csv.write_text(HEADER + "\n")
        assert main(["hops", str(csv), str(tmp_path / "x.svg")]) == 2
        assert "error" in capsys.readouterr().err


@pytest.fixture(scope="session")
def experiment_csvs(tmp_path_factory):
    """Real CSVs from the producing CLI, tiny instance counts."""
    results = tmp_path_factory.mktemp("results")
    for kind, hops in (("hops-sweep", "4,5"), ("std-sweep", "6"),
                       ("retrans-compare", "5"), ("planner-bench", "4,5")):
        proc = subprocess.run(
            [sys.executable, "-m", "swapsim.cli", "experiment", "--kind", kind,
             "--out-dir", str(results), "--instances", "2",
             "--trials-per-instance", "2", "--seed", "5", "--hops", hops],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
    return results


@pytest.mark.parametrize("kind", KINDS)
def test_acceptance_end_to_end(kind, experiment_csvs, tmp_path):
    """From real experiment CSVs, all six kinds render deterministically:
    exactly one series per strategy/policy and byte-identical re-renders."""
    csv_name = {
        "hops": "hops_sweep.csv", "hops_diff": "hops_sweep.csv",
        "std": "std_sweep.csv", "std_diff": "std_sweep.csv",
        "retrans": "retrans_compare.csv", "runtime": "planner_bench.csv",
    }[kind]
    out = tmp_path / f"{kind}.svg"
    result = render(FigureJob(kind, str(experiment_csvs / csv_name), str(out)))
    expected = {
        "hops": 5, "std": 5, "runtime": 5,
        "hops_diff": 2, "std_diff": 2, "retrans": 2,
    }[kind]
    assert len(result["series"]) == expected
    first = out.read_bytes()
    render(FigureJob(kind, str(experiment_csvs / csv_name), str(out)))
    assert out.read_bytes() == first
