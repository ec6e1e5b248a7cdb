import csv
import json

import numpy as np
import pytest

from dctkeca.cli import main
from dctkeca.config import ConfigError, PipelineConfig, config_lines, parse_config, parse_config_text
from dctkeca.keca import fit
from dctkeca.classifier import fit_classifier
from dctkeca.kernels import KernelConfig
from dctkeca.persistence import ModelFormatError, dumps, loads


def test_empty_config_is_default(tmp_path):
    (tmp_path / "c.cfg").write_text("# nothing here\n\n")
    cfg = parse_config(tmp_path / "c.cfg")
    assert cfg == PipelineConfig()
    e, k = cfg.entropy, cfg.kernel
    assert (e.block_size, e.quality, e.measure, e.renyi_order) == (8, 50, "renyi", 2.0)
    assert (k.family, k.degree, cfg.components, cfg.metric) == ("arccos", 2, 20, "mahalanobis")
    assert (cfg.illumination.suppress_count, cfg.illumination.epsilon) == (3, 1e-4)


def test_range_error_names_line(tmp_path):
    (tmp_path / "c.cfg").write_text("measure = renyi\nquality = 101\n")
    with pytest.raises(ConfigError, match=r"c\.cfg:2"):
        parse_config(tmp_path / "c.cfg")


def test_partial_override():
    cfg = parse_config_text("measure = shannon  # try the other one\n")
    assert cfg.entropy.measure == "shannon"
    assert cfg.entropy.quality == 50 and cfg.kernel == KernelConfig()


@pytest.mark.parametrize("text,match", [
    ("colour = red", r":1: unknown key 'colour'"),
    ("\nquality = high", r":2: invalid value"),
    ("quality", r"expected 'key = value'"),
    ("equalize = maybe", "invalid value"),
    ("metric = manhattan", "metric"),
    ("width = 46", "together"),
    ("kernel = arccos\ndegree = 3", "degree"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config_text(text)


def test_none_words_and_round_trip():
    cfg = parse_config_text("width = 46\nheight = 56\nsigma = 2.5\nkernel = rbf\n"
                            "dc_target = image\nequalize = off\n")
    assert (cfg.width, cfg.height, cfg.kernel.sigma) == (46, 56, 2.5)
    assert cfg.illumination.dc_target is None and not cfg.illumination.equalize
    assert parse_config_text(config_lines(cfg)) == cfg
    assert parse_config_text(config_lines(PipelineConfig())) == PipelineConfig()


def test_model_round_trip_is_exact():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(12, 5))
    y = [str(i % 3) for i in range(12)]
    model = fit(X, KernelConfig("rbf"), m=4)
    clf = fit_classifier(model.embeddings, y)
    cfg = PipelineConfig()
    cfg2, model2, clf2 = loads(dumps(cfg, model, clf))
    assert cfg2 == cfg and model2.kernel == model.kernel and clf2.labels == clf.labels
    np.testing.assert_array_equal(model2.eigenvectors, model.eigenvectors)
    np.testing.assert_array_equal(clf2.cov_inv, clf.cov_inv)
    assert dumps(cfg2, model2, clf2) == dumps(cfg, model, clf)


@pytest.mark.parametrize("text", ["PICKLE 1\n{}", "DCTKECA-MODEL 9\n{}", "DCTKECA-MODEL 1\n{"])
def test_bad_model_files(text):
    with pytest.raises(ModelFormatError):
        loads(text)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def small_cfg(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "fast.cfg"
    path.write_text("width = 46\nheight = 56\ncomponents = 10\n")
    return path


def test_extract_fit_classify(tmp_path, synthetic_manifest_path, synthetic_manifest, small_cfg):
    feats, model, preds = tmp_path / "f.csv", tmp_path / "m.model", tmp_path / "p.csv"
    common = ["--config", str(small_cfg), "--threads", "2"]
    assert main(["extract", "--manifest", str(synthetic_manifest_path), "--out", str(feats)]
                + common) == 0
    rows = _rows(feats)
    assert len(rows) - 1 == len(synthetic_manifest)
    assert rows[0][:3] == ["path", "subject_id", "v1"] and len(rows[0]) == 2 + 35
    assert main(["fit", "--features", str(feats), "--out", str(model)] + common) == 0
    assert model.read_text().startswith("DCTKECA-MODEL 1\n")
    assert main(["classify", "--model", str(model), "--features", str(feats),
                 "--out", str(preds)]) == 0
    out = _rows(preds)
    assert out[0] == ["path", "predicted_label", "distance"] and len(out) == len(rows)
    truth = [r[1] for r in rows[1:]]
    assert np.mean([a == b[1] for a, b in zip(truth, out[1:])]) > 0.8
    # images go through the stored config and must agree with the feature path
    preds2 = tmp_path / "p2.csv"
    assert main(["classify", "--model", str(model), "--manifest", str(synthetic_manifest_path),
                 "--out", str(preds2)]) == 0
    assert [r[1] for r in _rows(preds2)] == [r[1] for r in out]


def test_evaluate_writes_report(tmp_path, synthetic_manifest_path, small_cfg):
    out, summary = tmp_path / "r.json", tmp_path / "s.csv"
    args = ["evaluate", "--manifest", str(synthetic_manifest_path), "--protocol", "ep1",
            "--train", "5", "--config", str(small_cfg), "--out", str(out), "--csv", str(summary)]
    assert main(args) == 0
    report = json.loads(out.read_text())
    assert report["protocol"] == "ep1(5)" and report["config"]["width"] == 46
    assert main(args[:-4] + ["--baseline", "--out", str(out), "--csv", str(summary)]) == 0
    rows = _rows(summary)
    assert len(rows) == 3 and [r[0] for r in rows[1:]] == ["pipeline", "baseline"]


def test_normalize_writes_pgms(tmp_path, synthetic_manifest):
    src = [str(e.path) for e in synthetic_manifest.entries[:2]]
    assert main(["normalize", "--input", *src, "--out", str(tmp_path / "n")]) == 0
    assert len(list((tmp_path / "n").glob("*.pgm"))) == 2


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main(["extract"])
    assert info.value.code == 2


def test_selftest_passes(capsys):
    assert main(["selftest"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_stage_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "m.csv"
    bad.write_text("path,subject_id,index\nmissing.pgm,a,1\nmissing2.pgm,a,2\n")
    assert main(["extract", "--manifest", str(bad), "--out", str(tmp_path / "f.csv")]) == 1
    err = capsys.readouterr().err.strip()
    assert err.startswith("dctkeca: error: extract: load") and "missing.pgm" in err
    assert len(err.splitlines()) == 1
    (tmp_path / "c.cfg").write_text("quality = 0\n")
    assert main(["evaluate", "--manifest", str(bad), "--config", str(tmp_path / "c.cfg")]) == 1
    assert "c.cfg:1" in capsys.readouterr().err
    (tmp_path / "junk.model").write_text("nope\n")
    assert main(["classify", "--model", str(tmp_path / "junk.model"),
                 "--features", str(bad)]) == 1
    assert "model" in capsys.readouterr().err
