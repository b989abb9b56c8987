"""
Integration tests for the hedgegraph command line

Each test drives ``main`` end to end against files in a temporary directory.
"""

import json

import numpy as np
import pandas as pd
import pytest

from hedgegraph import __version__
from hedgegraph.cli import main

pytestmark = pytest.mark.integration


@pytest.fixture
def synth_dir(tmp_path):
    """Ten synthetic assets covering 2020-2024, written by the synth command"""
    out = tmp_path / "synth"
    code = main(
        [
            "synth",
            "--seed", "3",
            "--n-assets", "10",
            "--n-days", "1300",
            "--rho", "0.15",
            "--drift", "0.0003",
            "--out-dir", str(out),
        ]
    )
    assert code == 0
    return out


@pytest.fixture
def panel_csv(synth_dir):
    return synth_dir / "panel.csv"


def _with_extra_column(src, dst, name, values):
    frame = pd.read_csv(src)
    frame[name] = values(frame)
    frame.to_csv(dst, index=False)
    return dst


class TestIngest:
    def test_wide_ingest(self, price_csv, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["ingest", "--input", str(price_csv), "--out-dir", str(out)]) == 0
        assert (out / "panel.csv").exists()
        assert (out / "manifest.json").exists()
        assert "rows_kept=1300" in capsys.readouterr().out

    def test_missing_input(self, tmp_path, capsys):
        code = main(["ingest", "--input", str(tmp_path / "absent.csv"), "--out-dir", str(tmp_path)])
        assert code == 2
        assert "ERR:FileUnreadable" in capsys.readouterr().err

    def test_synth_is_deterministic(self, synth_dir, tmp_path):
        again = tmp_path / "again"
        main(["synth", "--seed", "3", "--n-assets", "10", "--n-days", "1300",
              "--rho", "0.15", "--drift", "0.0003", "--out-dir", str(again)])
        assert (again / "panel.csv").read_bytes() == (synth_dir / "panel.csv").read_bytes()


class TestHedgeAndSelect:
    def test_hedge_outputs(self, panel_csv, tmp_path):
        out = tmp_path / "hedge"
        assert main(["hedge", "--panel", str(panel_csv), "--window", "2021", "--out-dir", str(out)]) == 0
        lines = (out / "hedge.csv").read_text().splitlines()
        assert lines[0] == "ticker,hedge_score,mean_return,product"
        assert len(lines) == 11
        payload = json.loads((out / "hedge.json").read_text())
        manifest = json.loads((out / "manifest.json").read_text())
        assert payload["manifest_id"] == manifest["manifest_id"]
        assert payload["window"]["label"] == "2021"

    def test_hedge_empty_window(self, panel_csv, tmp_path, capsys):
        code = main(["hedge", "--panel", str(panel_csv), "--window", "1999", "--out-dir", str(tmp_path)])
        assert code == 2
        assert "ERR:EmptyWindow" in capsys.readouterr().err

    def test_select(self, panel_csv, tmp_path, capsys):
        out = tmp_path / "select"
        capsys.readouterr()
        assert main(["select", "--panel", str(panel_csv), "--k", "4", "--out-dir", str(out)]) == 0
        chosen = capsys.readouterr().out.split()
        payload = json.loads((out / "selection.json").read_text())
        assert payload["chosen"] == chosen
        assert payload["k"] == 4

    def test_hedge_year_table(self, panel_csv, tmp_path):
        """Each year plus the full period, stacked in one CSV"""
        out = tmp_path / "hedge"
        code = main(["hedge", "--panel", str(panel_csv), "--years", "2020:2024",
                     "--out-dir", str(out)])
        assert code == 0
        frame = pd.read_csv(out / "hedge.csv", dtype=str, keep_default_na=False)
        assert list(frame.columns) == ["window", "ticker", "hedge_score", "mean_return", "product"]
        assert list(dict.fromkeys(frame["window"])) == ["2020", "2021", "2022", "2023", "2024", "full"]
        assert len(frame) == 6 * 10
        payload = json.loads((out / "hedge.json").read_text())
        assert [r["window"]["label"] for r in payload["reports"]][-1] == "full"

    def test_window_and_years_are_exclusive(self, panel_csv, tmp_path):
        code = main(["hedge", "--panel", str(panel_csv), "--window", "2021",
                     "--years", "2021", "--out-dir", str(tmp_path)])
        assert code == 2

    def test_selection_table(self, panel_csv, tmp_path, capsys):
        out = tmp_path / "select"
        capsys.readouterr()
        code = main(["select", "--panel", str(panel_csv), "--years", "2020:2022",
                     "--k", "8", "5", "--out-dir", str(out)])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert [line.split(":")[0] for line in lines] == [
            "2020 k=5", "2020 k=8", "2021 k=5", "2021 k=8", "2022 k=5", "2022 k=8",
        ]
        selections = json.loads((out / "selection.json").read_text())["selections"]
        assert [(s["window_label"], s["k"]) for s in selections][:2] == [("2020", 5), ("2020", 8)]
        assert all(len(s["chosen"]) == s["k"] for s in selections)

    def test_select_k_out_of_range(self, panel_csv, tmp_path, capsys):
        code = main(["select", "--panel", str(panel_csv), "--k", "0", "--out-dir", str(tmp_path)])
        assert code == 2
        assert "ERR:KOutOfRange" in capsys.readouterr().err


class TestGraph:
    def test_correlation_graph(self, panel_csv, tmp_path):
        out = tmp_path / "graph"
        code = main(
            ["graph", "--panel", str(panel_csv), "--window", "2022",
             "--tau-plus", "0.1", "--tau-minus", "-0.1", "--out-dir", str(out)]
        )
        assert code == 0
        payload = json.loads((out / "graph.json").read_text())
        assert payload["kind"] == "correlation"
        assert payload["n"] == 10
        assert (out / "graph_edges.csv").read_text().startswith("i,j,weight,sign\n")

    def test_constant_asset_correlation(self, panel_csv, tmp_path, capsys):
        flat = _with_extra_column(panel_csv, tmp_path / "flat.csv", "ZFLAT", lambda f: 100.0)
        code = main(["graph", "--panel", str(flat), "--corr", "--out-dir", str(tmp_path / "g")])
        assert code == 2
        assert "ERR:ZeroVariance" in capsys.readouterr().err

    def test_unpaired_taus(self, panel_csv, tmp_path):
        code = main(["graph", "--panel", str(panel_csv), "--tau-plus", "0.2", "--out-dir", str(tmp_path)])
        assert code == 2


class TestBacktest:
    """Tests for the backtest command"""

    def test_ewp_rows(self, panel_csv, tmp_path):
        out = tmp_path / "bt"
        code = main(["backtest", "--panel", str(panel_csv), "--years", "2020:2024",
                     "--methods", "ewp", "--out-dir", str(out)])
        assert code == 0
        frame = pd.read_csv(out / "backtest.csv", dtype=str, keep_default_na=False)
        assert list(frame["test"]) == ["2021", "2022", "2023", "2024"]
        assert set(frame["method"]) == {"EWP"}

    def test_reduced_rows_per_k(self, panel_csv, tmp_path):
        out = tmp_path / "bt"
        code = main(["backtest", "--panel", str(panel_csv), "--years", "2020", "2021", "2022",
                     "--methods", "pm+mpns", "--k", "5", "8", "--out-dir", str(out)])
        assert code == 0
        frame = pd.read_csv(out / "backtest.csv", dtype=str, keep_default_na=False)
        assert len(frame) == 4
        assert list(frame["k"]) == ["5", "8", "5", "8"]
        assert not frame["sharpe"].str.startswith("ERR").any()

    def test_singular_cell_is_reported(self, panel_csv, tmp_path):
        dup = _with_extra_column(panel_csv, tmp_path / "dup.csv", "ZDUP", lambda f: f["S000"])
        out = tmp_path / "bt"
        code = main(["backtest", "--panel", str(dup), "--years", "2020:2021",
                     "--methods", "ewp", "mp", "--out-dir", str(out)])
        assert code == 0
        frame = pd.read_csv(out / "backtest.csv", dtype=str, keep_default_na=False)
        mp = frame[frame["method"] == "MP"].iloc[0]
        assert mp["total_return_pct"] == "ERR:SingularCovariance"

    def test_byte_identical_reruns(self, panel_csv, tmp_path):
        args = ["backtest", "--panel", str(panel_csv), "--years", "2020:2023",
                "--methods", "ewp", "pm+ewp", "mpns", "--k", "3"]
        assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
        assert main(args + ["--out-dir", str(tmp_path / "b"), "--workers", "4"]) == 0
        first = (tmp_path / "a" / "backtest.csv").read_bytes()
        assert first == (tmp_path / "b" / "backtest.csv").read_bytes()

        ids = [
            json.loads((tmp_path / d / "manifest.json").read_text())["manifest_id"]
            for d in ("a", "b")
        ]
        assert ids[0] == ids[1]
        report = json.loads((tmp_path / "a" / "backtest.json").read_text())
        assert report["manifest_id"] == ids[0]

    def test_grid_file(self, panel_csv, tmp_path):
        grid = tmp_path / "grid.yaml"
        grid.write_text("- allocator: ewp\n- allocator: pm+ewp\n  k: 4\n")
        out = tmp_path / "bt"
        code = main(["backtest", "--panel", str(panel_csv), "--years", "2021:2023",
                     "--grid", str(grid), "--out-dir", str(out)])
        assert code == 0
        frame = pd.read_csv(out / "backtest.csv", dtype=str, keep_default_na=False)
        assert len(frame) == 4

    def test_explicit_epsilon_needs_value(self, panel_csv, tmp_path):
        code = main(["backtest", "--panel", str(panel_csv), "--years", "2020:2021",
                     "--methods", "mpns", "--epsilon-rule", "value", "--out-dir", str(tmp_path)])
        assert code == 2


class TestParser:
    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert __version__ in capsys.readouterr().out

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 2

    def test_missing_required_flag(self):
        assert main(["hedge"]) == 2


class TestManifest:
    def test_config_echoes_every_flag(self, panel_csv, tmp_path):
        out = tmp_path / "hedge"
        main(["hedge", "--panel", str(panel_csv), "--window", "2021", "--workers", "2",
              "--out-dir", str(out)])
        config = json.loads((out / "manifest.json").read_text())["config"]
        assert config["panel"] == str(panel_csv)
        assert config["out_dir"] == str(out)
        assert config["workers"] == 2
        assert config["verbose"] is False
        assert config["window"] == "2021"

    def test_moved_input_keeps_id(self, panel_csv, tmp_path):
        copy = tmp_path / "elsewhere.csv"
        copy.write_bytes(panel_csv.read_bytes())
        ids = []
        for source, out in ((panel_csv, "a"), (copy, "b")):
            main(["hedge", "--panel", str(source), "--out-dir", str(tmp_path / out)])
            ids.append(json.loads((tmp_path / out / "manifest.json").read_text())["manifest_id"])
        assert ids[0] == ids[1]


class TestExitCodes:
    def test_numerical_failure_exits_3(self, panel_csv, tmp_path, mocker, capsys):
        mocker.patch(
            "hedgegraph.cli.sample_cov", side_effect=np.linalg.LinAlgError("Singular matrix")
        )
        code = main(["graph", "--panel", str(panel_csv), "--out-dir", str(tmp_path)])
        assert code == 3
        assert "ERR:SingularCovariance" in capsys.readouterr().err
