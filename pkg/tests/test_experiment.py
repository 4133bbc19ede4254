import csv
import json

import numpy as np
import pytest

from tlgc import cli
from tlgc.experiment import (SUMMARY_FIELDS, TRIAL_FIELDS, ExperimentConfig, PipelineError, run_experiment,
                             summarize)
from tlgc.hsi_io import HsiCube, LabelMap, load_cube, load_labels, save_cube, save_labels
from tlgc.synthetic import SyntheticSpec, make_synthetic

SMALL = SyntheticSpec(height=12, width=12, n_classes=3, n_informative=3, n_nuisance=3, n_noise=2, block=3)


@pytest.fixture
def scene(tmp_path):
    cube, labels = make_synthetic(SMALL, seed=3)
    save_cube(cube, tmp_path / "s.hsic")
    save_labels(labels, tmp_path / "s.hsil")
    return tmp_path


def small_config(scene, out="out", **kw):
    base = dict(cube_path=str(scene / "s.hsic"), label_path=str(scene / "s.hsil"), dims=[1, 2], trials=2,
                samples_per_class=4, n_starts=2, seed=5, output_dir=str(scene / out))
    base.update(kw)
    return ExperimentConfig(**base)


def test_defaults_follow_protocol():
    cfg = ExperimentConfig()
    assert (cfg.delta, cfg.samples_per_class, cfg.trials) == (0.4, 10, 5)
    assert cfg.dims[0] == 4 and cfg.dims[-1] == 60 and cfg.noise_percents == [0.0]


@pytest.mark.parametrize("kw", [dict(trials=0), dict(dims=[]), dict(dims=[0]), dict(noise_percents=[101]),
                                dict(methods=["pca"]), dict(classifier="knn")])
def test_invalid_config(kw, scene):
    with pytest.raises(PipelineError) as err:
        run_experiment(small_config(scene, **kw))
    assert err.value.stage == "config"


def test_dims_beyond_bands(scene):
    with pytest.raises(PipelineError, match=r"\[config\]"):
        run_experiment(small_config(scene, dims=[SMALL.bands + 1]))


def test_missing_file_is_load_error(scene):
    with pytest.raises(PipelineError) as err:
        run_experiment(small_config(scene, cube_path=str(scene / "missing.hsic")))
    assert err.value.stage == "load"


def test_short_class_is_split_error(scene):
    with pytest.raises(PipelineError) as err:
        run_experiment(small_config(scene, samples_per_class=500))
    assert err.value.stage == "split"


def test_unknown_config_key():
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"bogus": 1})


def test_single_method_key():
    assert ExperimentConfig.from_dict({"method": "sc_l2"}).methods == ["sc_l2"]
    assert ExperimentConfig.from_dict({"method": "l1gc,sc_l2"}).methods == ["l1gc", "sc_l2"]


def test_outputs_are_reproducible(scene):
    names = ["report.txt", "trials.csv", "summary.csv"]
    run_experiment(small_config(scene, "a", noise_percents=[0, 5]))
    run_experiment(small_config(scene, "b", noise_percents=[0, 5]))
    for name in names:
        assert (scene / "a" / name).read_bytes() == (scene / "b" / name).read_bytes()
    configs = [json.loads((scene / d / "config.resolved.json").read_text()) for d in "ab"]
    assert [c.pop("output_dir") for c in configs] != [None, None] and configs[0] == configs[1]


def test_records_and_aggregation(scene):
    res = run_experiment(small_config(scene, noise_percents=[0, 10]))
    assert len(res.records) == 3 * 2 * 2 * 2
    for row in res.summary:
        recs = [r for r in res.records if (r["method"], r["noise_percent"], r["dim"])
                == (row["method"], row["noise_percent"], row["dim"])]
        assert row["trials"] == 2 == len(recs)
        oa = [r["oa"] for r in recs]
        assert abs(row["oa_mean"] - np.mean(oa)) <= 1e-12
        assert min(oa) <= row["oa_mean"] <= max(oa)
        assert row["kappa_std"] == pytest.approx(np.std([r["kappa"] for r in recs], ddof=1))


def test_csv_files(scene):
    res = run_experiment(small_config(scene, trials=1, dims=[2], methods=["tl_l1gc"]))
    with open(scene / "out" / "trials.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(TRIAL_FIELDS) and len(set(rows[0])) == len(rows[0])
    assert len(rows) == 2 and float(rows[1][4]) == res.records[0]["oa"]
    with open(scene / "out" / "summary.csv") as fh:
        assert next(csv.reader(fh)) == list(SUMMARY_FIELDS)
    table = [l for l in (scene / "out" / "report.txt").read_text().splitlines() if l.startswith("tl_l1gc")]
    assert len(table) == 2  # best-dimension row and one sweep row
    resolved = json.loads((scene / "out" / "config.resolved.json").read_text())
    assert resolved["dims"] == [2] and resolved["methods"] == ["tl_l1gc"]


def test_methods_share_split(scene):
    res = run_experiment(small_config(scene, trials=1, dims=[1]))
    assert len({(r["n_train"], r["n_test"]) for r in res.records}) == 1


def test_one_feature_data(tmp_path):
    labels = np.repeat([[1, 2]], 6, axis=0)
    data = (labels + np.random.default_rng(0).normal(0, 0.2, labels.shape))[None].astype(float)
    cfg = ExperimentConfig(cube_path="-", label_path="-", methods=["tl_l1gc"], dims=[1], trials=1,
                           samples_per_class=2, output_dir=str(tmp_path))
    res = run_experiment(cfg, HsiCube(data), LabelMap(labels))
    assert len(res.records) == 1 and res.records[0]["oa"] > 0.5


def test_filter_off_leaves_cube_untouched(monkeypatch, scene):
    import tlgc.experiment as ex

    seen = []
    real = ex.extract_dataset
    monkeypatch.setattr(ex, "extract_dataset", lambda cube, labels: seen.append(cube.data.copy()) or real(cube, labels))
    run_experiment(small_config(scene, trials=1, methods=["sc_l2"]), write=False)
    assert np.array_equal(seen[0], load_cube(scene / "s.hsic").data)
    run_experiment(small_config(scene, trials=1, methods=["sc_l2"], use_filter=True), write=False)
    assert not np.array_equal(seen[1], seen[0])


def test_summarize_single_trial_std():
    rows = summarize([{"method": "m", "noise_percent": 0.0, "dim": 1, "oa": 0.5, "aa": 0.5, "kappa": 0.0}])
    assert rows[0]["oa_std"] == 0.0 and rows[0]["trials"] == 1


# -- synthetic generator ------------------------------------------------------

def test_synthetic_is_seeded():
    a, la = make_synthetic(SMALL, 1)
    b, lb = make_synthetic(SMALL, 1)
    c, _ = make_synthetic(SMALL, 2)
    assert a.data.tobytes() == b.data.tobytes() and np.array_equal(la.labels, lb.labels)
    assert a.data.tobytes() != c.data.tobytes()


def test_synthetic_separable_without_nuisance():
    from tlgc.evaluation import predict_1nn
    from tlgc.hsi_io import extract_dataset

    spec = SyntheticSpec(height=20, width=20, n_classes=3, n_informative=4, n_nuisance=0, n_noise=0, class_sep=40.0)
    ds = extract_dataset(*make_synthetic(spec, 0))
    train = ds.subset(np.arange(0, ds.n_samples, 5))
    assert np.array_equal(predict_1nn(train, ds), ds.labels)


def test_nuisance_band_tracks_source():
    spec = SyntheticSpec(height=100, width=100)
    cube, _ = make_synthetic(spec, 0)
    Y = cube.pixels()
    for j in range(spec.n_nuisance):
        src = j % spec.n_informative
        assert np.corrcoef(Y[src], Y[spec.n_informative + j])[0, 1] >= 0.9


def test_every_class_present():
    _, labels = make_synthetic(SyntheticSpec(height=10, width=10, n_classes=4, block=5), 0)
    assert sorted(np.unique(labels.labels)) == [1, 2, 3, 4]


# -- command line ---------------------------------------------------------------

def test_cli_synth_check_run(tmp_path, capsys):
    cube, lab = tmp_path / "c.hsic", tmp_path / "c.hsil"
    assert cli.main(["synth", str(cube), str(lab), "--height", "12", "--width", "12", "--n-classes", "3",
                     "--n-informative", "3", "--n-nuisance", "2", "--n-noise", "1", "--block", "3",
                     "--seed", "4"]) == 0
    assert load_cube(cube).bands == 6 and load_labels(lab).n_classes == 3
    assert cli.main(["convert-check", str(cube), str(lab)]) == 0
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"cube_path": str(cube), "label_path": str(lab), "trials": 3}))
    out = tmp_path / "res"
    assert cli.main(["run", str(config), "--dims", "1:3", "--method", "sc_l2,l1gc", "--trials", "1",
                     "--samples-per-class", "3", "--noise", "0,5", "--classifier", "1nn", "--seed", "9",
                     "--delta", "0.2", "--use-filter", "--out", str(out)]) == 0
    resolved = json.loads((out / "config.resolved.json").read_text())
    assert resolved["dims"] == [1, 2, 3] and resolved["trials"] == 1 and resolved["use_filter"] is True
    assert resolved["methods"] == ["sc_l2", "l1gc"] and resolved["noise_percents"] == [0.0, 5.0]
    assert "sc_l2" in capsys.readouterr().out


def test_cli_reports_stage_on_failure(tmp_path, capsys):
    bad = tmp_path / "bad.hsic"
    bad.write_bytes(b"garbage")
    assert cli.main(["convert-check", str(bad)]) != 0
    assert "[convert-check]" in capsys.readouterr().err
    assert cli.main(["run", "--cube", str(bad), "--labels", str(bad), "--out", str(tmp_path)]) != 0
    assert "[load]" in capsys.readouterr().err
    assert cli.main(["run", "--trials", "0"]) != 0
    assert "[config]" in capsys.readouterr().err


def test_cli_set_override(tmp_path):
    args = cli.build_parser().parse_args(["run", "--cube", "a", "--labels", "b", "--set", "svm_C=10",
                                          "--set", "filter_radius=2"])
    cfg = cli.resolve_config(args)
    assert cfg.svm_C == 10 and cfg.filter_radius == 2
