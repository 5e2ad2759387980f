import csv
import io
import json
import math

import numpy as np
import pytest

from kout import cli
from kout.errors import BadParameters, UnknownColumn
from kout.harness.config import ExperimentConfig, from_mapping, load_config
from kout.harness.experiments import CSV_VERSION_LINE, monte_carlo, run_experiment
from kout.harness.families import build
from kout.harness.plot import PlotSpec, loglog_slope, plot, read_csv_text
from kout.harness.stats import combined_se, fmt, proportion_se, spread, summarize


def cfg(**kw):
    return from_mapping(kw)


def rows_of(res):
    header, rows = read_csv_text(res.to_csv())
    return rows


class TestConfig:
    def test_grid_product(self):
        c = cfg(experiment="intercomponent", family="leafy_tree", n=[512, 1024], k=[8, 16],
                trials=10, seed=1)
        assert c.grid == ({"n": 512, "k": 8}, {"n": 512, "k": 16},
                          {"n": 1024, "k": 8}, {"n": 1024, "k": 16})
        assert c.models == ("k-out",) and c.master_seed == 1

    def test_explicit_cells_and_params(self):
        c = cfg(experiment="psample_compare", family="clique_plus_small",
                cells=[{"n": 256, "k": 8}], trials=3, seed=2, min_ratio=5)
        assert c.grid == ({"n": 256, "k": 8},) and c.param("min_ratio") == 5

    @pytest.mark.parametrize("doc", [
        dict(experiment="tail", family="star", n=8, trials=0, seed=1),
        dict(experiment="tail", family="star", n=[], trials=5, seed=1),
        dict(experiment="tail", family="star", n=8, trials=5),
        dict(experiment="nope", family="star", n=8, trials=5, seed=1),
        dict(family="star", n=8, trials=5, seed=1),
    ])
    def test_invalid(self, doc):
        with pytest.raises(BadParameters):
            from_mapping(doc)

    def test_load(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(dict(experiment="tail", family="star", n=8, k=2, trials=5,
                                     seed=3)))
        assert load_config(p).experiment == "tail"
        p.write_text("[1, 2]")
        with pytest.raises(BadParameters):
            load_config(p)


class TestStats:
    def test_summary(self, rnd):
        x = [rnd.gauss(3, 2) for _ in range(500)]
        s = summarize(x)
        assert s.min <= s.mean <= s.max
        assert s.variance == pytest.approx(np.var(x, ddof=1))
        assert s.se == pytest.approx(math.sqrt(s.variance / 500))
        assert s.p50 <= s.p90 <= s.p99

    def test_single_trial(self):
        s = summarize([4])
        assert s.variance == 0 and s.se == 0

    def test_helpers(self):
        assert proportion_se(0.5, 100) == pytest.approx(0.05)
        assert combined_se(3, 4) == 5
        assert spread([1, 2, 4]) == 4 and spread([0, 1]) == math.inf

    def test_fmt(self):
        assert [fmt(x) for x in (1, True, 0.1, math.inf, None, "a", np.int64(3))] == \
            ["1", "1", "0.1", "inf", "", "a", "3"]
        assert fmt(1 / 3) == "0.3333333333"


class TestPlot:
    def test_empty_csv(self):
        svg = plot("", PlotSpec("k", "mean"))
        assert svg.startswith("<svg") and "polyline" not in svg
        assert plot(CSV_VERSION_LINE + "\n", PlotSpec("k", "mean")) == svg

    def test_unknown_column(self):
        with pytest.raises(UnknownColumn):
            plot("a,b\n1,2\n", PlotSpec("a", "c"))

    def test_sandwich_legend_order(self):
        res = run_experiment(cfg(experiment="sandwich", family="leafy_tree", n=[64, 128], k=4,
                                 trials=50, seed=2))
        svg = plot(res.to_csv(), PlotSpec("n", "mean", "label"))
        legend = [ln for ln in svg.splitlines() if 'class="legend"' in ln]
        assert len(legend) == 3
        order = [ln.split(">")[1].split(" (")[0].split("<")[0] for ln in legend]
        assert order == ["label=X_2k", "label=Y_k", "label=X_k/2"]
        assert svg.count("<polyline") == 3

    def test_intercomponent_slope(self):
        res = run_experiment(cfg(experiment="intercomponent", family="leafy_tree", n=1024,
                                 k=[4, 8, 16, 32], trials=300, seed=5))
        svg = plot(res.to_csv(), PlotSpec("k", "mean", "n"))
        slope = loglog_slope([(float(r["k"]), float(r["mean"])) for r in rows_of(res)])
        assert -1.3 < slope < -0.7
        assert f"(slope {slope:.2f})" in svg

    def test_byte_identical(self):
        text = "x,y,g\n1,2,a\n2,4,a\n1,3,b\n4,1,b\n"
        spec = PlotSpec("x", "y", "g", "t")
        assert plot(text, spec) == plot(text, spec)

    def test_nonpositive_values_skipped(self):
        svg = plot("x,y\n1,0\n2,5\n4,inf\n", PlotSpec("x", "y"))
        assert svg.count("<circle") == 1


class TestExperiments:
    def test_complete_graph_full_sample(self):
        res = run_experiment(cfg(experiment="intercomponent", family="complete", n=64, k=63,
                                 trials=20, seed=1))
        assert rows_of(res)[0]["mean"] == "0"

    def test_rows_echo_cell(self):
        res = run_experiment(cfg(experiment="intercomponent", family="leafy_tree",
                                 n=[64, 128], k=[2, 4], trials=20, seed=4,
                                 models=["k-out", "expected-k-out"]))
        rows = rows_of(res)
        assert len(rows) == 8
        assert {(r["n"], r["k"], r["model"]) for r in rows} == {
            (n, k, m) for n in ("64", "128") for k in ("2", "4")
            for m in ("k-out", "expected-k-out")}
        assert all(r["trials"] == "20" and r["seed"] == "4" for r in rows)
        assert res.to_csv().splitlines()[0] == CSV_VERSION_LINE

    def test_two_cliques_reference(self):
        res = run_experiment(cfg(experiment="intercomponent", family="two_cliques", n=60, k=4,
                                 trials=2000, seed=3))
        row = rows_of(res)[0]
        assert float(row["reference"]) == pytest.approx((1 - 8 / 60) ** 30)
        assert float(row["reference"]) == pytest.approx(0.013664, abs=1e-5)

    def test_tail_monotone(self):
        res = run_experiment(cfg(experiment="tail", family="leafy_tree", n=256, k=4,
                                 trials=500, seed=2))
        tails = [float(r["tail"]) for r in rows_of(res)]
        assert [r["ell"] for r in rows_of(res)] == ["1", "2", "3", "4"]
        assert tails == sorted(tails, reverse=True)

    def test_tail_constant_family(self):
        # every edge of a path is always sampled, so X = 0 and b_hat = 0
        res = run_experiment(cfg(experiment="tail", family="path", n=50, k=2, trials=100,
                                 seed=1))
        assert [float(r["tail"]) for r in rows_of(res)] == [0.0] * 4

    def test_sandwich_star(self):
        res = run_experiment(cfg(experiment="sandwich", family="star", n=20, k=4, trials=30,
                                 seed=1))
        assert [r["mean"] for r in rows_of(res)] == ["0", "0", "0"]
        assert res.ok

    def test_connectivity_cycle_rarely_connected(self):
        res = run_experiment(cfg(experiment="connectivity", family="circulant", n=200, d=1,
                                 k=1, trials=200, seed=1, check=False))
        assert float(rows_of(res)[0]["connected_rate"]) < 0.05

    def test_connectivity_dense(self):
        res = run_experiment(cfg(experiment="connectivity", family="circulant", n=64, d=31,
                                 k=12, trials=100, seed=1))
        assert float(rows_of(res)[0]["connected_rate"]) == 1.0

    def test_connectivity_reports_min_c(self):
        res = run_experiment(cfg(experiment="connectivity", family="circulant", n=128,
                                 c=[0.05, 1], k=20, trials=50, seed=3))
        rows = rows_of(res)
        assert all(r["min_c_rate_half"] == rows[0]["min_c_rate_half"] for r in rows)
        assert res.ok

    def test_psample_equivalence_on_regular(self):
        # on an r-regular graph expected k-out keeps an edge when either end
        # keeps it, so it matches p-sampling at p = 1 - (1 - k/r)^2
        k, r = 4, 16
        p = 1 - (1 - k / r) ** 2
        res = run_experiment(cfg(experiment="psample_compare", family="random_regular", n=256,
                                 r=r, k=k, p=p, kout_model="expected-k-out", trials=3000,
                                 seed=6))
        row = rows_of(res)[0]
        se = combined_se(float(row["se_kout"]), float(row["se_psample"]))
        assert abs(float(row["mean_kout"]) - float(row["mean_psample"])) <= 3 * se

    def test_almost_regular_p1(self):
        res = run_experiment(cfg(experiment="almost_regular", family="almost_regular", n=64,
                                 r=4, p=1.0, trials=20, seed=1))
        assert rows_of(res)[0]["mean"] == "0"

    def test_almost_regular_matches_expected_kout_cell(self):
        k, r = 4, 16
        p = 1 - (1 - k / r) ** 2
        a = run_experiment(cfg(experiment="almost_regular", family="random_regular", n=256,
                               r=r, p=p, trials=3000, seed=7))
        b = run_experiment(cfg(experiment="intercomponent", family="random_regular", n=256,
                               r=r, k=k, models=["expected-k-out"], trials=3000, seed=7))
        ra, rb = rows_of(a)[0], rows_of(b)[0]
        se = combined_se(float(ra["se"]), float(rb["se"]))
        assert abs(float(ra["mean"]) - float(rb["mean"])) <= 3 * se

    def test_protocol_rows(self):
        res = run_experiment(cfg(experiment="protocol", family="two_cliques", n=64, k=8, r=16,
                                 trials=10, seed=2))
        rows = rows_of(res)
        assert len(rows) == 10
        assert list(rows[0])[:10] == ["family", "n", "k", "r", "scheme_kind", "seed",
                                      "success", "decode_failures", "max_bits", "mean_bits"]

    def test_mapreduce_violation_reported(self):
        res = run_experiment(cfg(experiment="mapreduce", family="leafy_tree", n=64, k=4,
                                 trials=3, seed=1, budget=5))
        assert not res.ok
        assert all(r["violated"] == "1" for r in rows_of(res))

    def test_workers_do_not_change_output(self):
        doc = dict(experiment="intercomponent", family="leafy_tree", n=64, k=2, trials=3000,
                   seed=8)
        a = run_experiment(from_mapping(doc)).to_csv()
        import kout.harness.experiments as E
        old = E.BATCH_ELEMENTS
        E.BATCH_ELEMENTS = 2000
        try:
            b = run_experiment(from_mapping({**doc, "workers": 2})).to_csv()
        finally:
            E.BATCH_ELEMENTS = old
        assert a == b

    def test_rerun_byte_identical(self, tmp_path):
        doc = dict(experiment="sandwich", family="leafy_tree", n=128, k=4, trials=100, seed=9)
        run_experiment(from_mapping({**doc, "out": str(tmp_path / "a.csv")}))
        run_experiment(from_mapping({**doc, "out": str(tmp_path / "b.csv")}))
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_monte_carlo_edgeless(self):
        ts = monte_carlo(build("star", 1).graph, "k-out", 1, 0, 5)
        assert ts.inter.tolist() == [0] * 5 and ts.connected.all()


class TestCLI:
    def test_experiment_inline(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        code = cli.main(["experiment", "--experiment", "sandwich", "--family", "leafy_tree",
                         "--n", "64", "--k", "4", "--trials", "50", "--seed", "1",
                         "--out", str(out)])
        assert code == 0 and out.read_text().startswith(CSV_VERSION_LINE)
        assert "PASS" in capsys.readouterr().err

    def test_config_and_violation(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(dict(experiment="mapreduce", family="leafy_tree", n=64, k=4,
                                     trials=2, seed=1, budget=5)))
        assert cli.main(["mapreduce", "--config", str(p), "--out", str(tmp_path / "m.csv")]) == 1

    def test_usage_errors(self, tmp_path):
        assert cli.main(["experiment", "--family", "star"]) == 2
        assert cli.main(["experiment", "--experiment", "tail", "--family", "star", "--n", "8",
                         "--trials", "5"]) == 2
        assert cli.main(["plot", str(tmp_path / "missing.csv"), "--x", "a", "--y", "b"]) == 2
        with pytest.raises(SystemExit) as err:
            cli.main(["frobnicate"])
        assert err.value.code == 2

    def test_plot_unknown_column(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("a,b\n1,2\n")
        assert cli.main(["plot", str(p), "--x", "a", "--y", "zz"]) == 2

    def test_plot_roundtrip(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("a,b\n1,2\n2,3\n")
        cli.main(["plot", str(p), "--x", "a", "--y", "b", "--out", str(tmp_path / "1.svg")])
        cli.main(["plot", str(p), "--x", "a", "--y", "b", "--out", str(tmp_path / "2.svg")])
        assert (tmp_path / "1.svg").read_bytes() == (tmp_path / "2.svg").read_bytes()

    def test_sample(self, tmp_path, capsys):
        out = tmp_path / "e.txt"
        assert cli.main(["sample", "--family", "star", "--n", "6", "--k", "1", "--seed", "2",
                         "--out", str(out)]) == 0
        assert out.read_text() == "6\n0 1\n0 2\n0 3\n0 4\n0 5\n"
        assert "inter_component=0" in capsys.readouterr().err

    def test_protocol_and_alt(self, tmp_path):
        assert cli.main(["protocol", "--family", "two_cliques", "--n", "64", "--k", "8",
                         "--r", "16", "--trials", "5", "--seed", "1",
                         "--out", str(tmp_path / "p.csv")]) == 0
        assert cli.main(["protocol", "--alt", "--family", "two_cliques", "--family-k", "8",
                         "--n", "64", "--c", "2", "--trials", "5", "--seed", "1",
                         "--out", str(tmp_path / "a.csv")]) == 0
        rows = list(csv.DictReader(io.StringIO(
            "\n".join((tmp_path / "a.csv").read_text().splitlines()[1:]))))
        assert all(int(r["rounds_used"]) <= 6 for r in rows)

    def test_mapreduce_trace(self, tmp_path):
        assert cli.main(["mapreduce", "--family", "complete", "--n", "16", "--k", "4",
                         "--trials", "1", "--seed", "1", "--out", str(tmp_path / "m.csv"),
                         "--trace", str(tmp_path / "t.csv")]) == 0
        assert (tmp_path / "t.csv").read_text().startswith("round,machine")


def test_experiment_config_rejects_missing_seed():
    with pytest.raises(BadParameters):
        ExperimentConfig("tail", "star", ({"n": 4},), 3, None)
