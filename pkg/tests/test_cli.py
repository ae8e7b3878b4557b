import json

import numpy as np
import pytest

from rhythmformants.audio import write_wav
from rhythmformants.cli import main
from rhythmformants.features import read_feature_csv
from rhythmformants.synth import SynthSpec, synth_am, synth_corpus

SR = 16000


def corpus_spec_json(tmp_path, per_class=6, duration_s=6.0):
    spec = {
        "classes": [
            {"group": "A", "kind": "AMFM", "f0_base_hz": 150.0,
             "mod": [[2.0, 0.1]], "am_mod": [[2.0, 0.45], [5.0, 0.35]],
             "duration_s": duration_s, "sample_rate": SR},
            {"group": "B", "kind": "AMFM", "f0_base_hz": 150.0,
             "mod": [[3.5, 0.1]], "am_mod": [[3.5, 0.45], [7.0, 0.35]],
             "duration_s": duration_s, "sample_rate": SR},
        ],
        "per_class": per_class,
        "speakers_per_class": 6,
        "jitter": 0.05,
        "seed": 11,
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    return path


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    """Small AMFM corpus shared by the featurize/evaluate CLI tests."""
    out = tmp_path_factory.mktemp("corpus")
    spec = corpus_spec_json(out)
    assert main(["synth", str(spec), "--out", str(out / "clips")]) == 0
    return out / "clips"


def test_synth_writes_corpus_and_manifest(tmp_path, capsys):
    spec = corpus_spec_json(tmp_path)
    assert main(["synth", str(spec), "--out", str(tmp_path / "c")]) == 0
    out = capsys.readouterr().out
    assert "12 clip(s)" in out
    assert (tmp_path / "c" / "manifest.csv").exists()
    wavs = sorted((tmp_path / "c").glob("*.wav"))
    assert len(wavs) == 12


def test_synth_rerun_is_byte_identical(tmp_path):
    spec = corpus_spec_json(tmp_path)
    assert main(["synth", str(spec), "--out", str(tmp_path / "c1")]) == 0
    assert main(["synth", str(spec), "--out", str(tmp_path / "c2")]) == 0
    for w1 in sorted((tmp_path / "c1").glob("*")):
        w2 = tmp_path / "c2" / w1.name
        assert w1.read_bytes() == w2.read_bytes(), w1.name


def test_synth_bad_depth_names_field(tmp_path, capsys):
    spec = corpus_spec_json(tmp_path)
    data = json.loads(spec.read_text())
    data["classes"][0]["am_mod"] = [[2.0, 1.7]]
    spec.write_text(json.dumps(data))
    assert main(["synth", str(spec), "--out", str(tmp_path / "c")]) == 1
    assert "am_mod[0].depth" in capsys.readouterr().err


def test_synth_missing_field_errors(tmp_path, capsys):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"classes": []}))
    assert main(["synth", str(path), "--out", str(tmp_path / "c")]) == 1
    assert "per_class" in capsys.readouterr().err


def test_analyze_outputs_and_axes(tmp_path):
    clip = synth_am(SynthSpec(kind="AM", mod=((2.5, 0.5),), duration_s=6.0,
                              sample_rate=SR))
    wav = tmp_path / "clip.wav"
    write_wav(wav, clip.samples, SR)
    out = tmp_path / "analysis"
    assert main(["analyze", str(wav), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "clip_am_envelope.tsv",
        "clip_am_spectrogram_w3.tsv",
        "clip_am_tracks_w3.csv",
        "clip_fm_envelope.tsv",
        "clip_fm_spectrogram_w3.tsv",
        "clip_fm_tracks_w3.csv",
        "config.json",
    ]
    lines = (out / "clip_am_spectrogram_w3.tsv").read_text().strip().split("\n")
    assert len(lines) == 120 + 1
    assert all(len(ln.split("\t")) == 50 + 1 for ln in lines)


def test_analyze_window_sweep(tmp_path):
    clip = synth_am(SynthSpec(kind="AM", mod=((2.5, 0.5),), duration_s=6.0,
                              sample_rate=SR))
    wav = tmp_path / "clip.wav"
    write_wav(wav, clip.samples, SR)
    out = tmp_path / "analysis"
    assert main(["analyze", str(wav), "--out", str(out), "--window", "3,4,5"]) == 0
    for w in ("w3", "w4", "w5"):
        assert (out / f"clip_am_spectrogram_{w}.tsv").exists()
        assert (out / f"clip_am_tracks_{w}.csv").exists()


def test_analyze_partial_success_on_unvoiced_clip(tmp_path, caplog):
    rng = np.random.default_rng(0)
    wav = tmp_path / "noise.wav"
    write_wav(wav, 0.9 * rng.uniform(-1, 1, 6 * SR), SR)
    out = tmp_path / "analysis"
    assert main(["analyze", str(wav), "--out", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert "noise_am_envelope.tsv" in names
    assert "noise_fm_envelope.tsv" not in names
    assert "insufficient voicing" in caplog.text


def test_featurize_all_families(corpus_dir, tmp_path):
    out = tmp_path / "features"
    assert main(["featurize", str(corpus_dir / "manifest.csv"),
                 "--out", str(out)]) == 0
    table = read_feature_csv(out / "features_w3.csv")
    assert len(table.names) == 6 + 6 + 4 + 4 + 78
    assert len(table.values) == 12
    assert (out / "features_w3.json").exists()
    assert (out / "config.json").exists()


def test_featurize_mfcc_only_has_78_columns(corpus_dir, tmp_path):
    out = tmp_path / "features"
    assert main(["featurize", str(corpus_dir / "manifest.csv"),
                 "--out", str(out), "--features", "mfcc"]) == 0
    table = read_feature_csv(out / "features_w3.csv")
    assert len(table.names) == 78
    assert table.names[0] == "MFCC-1"


def test_featurize_deterministic_and_jobs_invariant(corpus_dir, tmp_path):
    out1, out2, out3 = (tmp_path / d for d in ("f1", "f2", "f3"))
    base = ["featurize", str(corpus_dir / "manifest.csv"), "--features", "dct-am,var-am"]
    assert main(base + ["--out", str(out1)]) == 0
    assert main(base + ["--out", str(out2)]) == 0
    assert main(base + ["--out", str(out3), "--jobs", "2"]) == 0
    ref = (out1 / "features_w3.csv").read_bytes()
    assert (out2 / "features_w3.csv").read_bytes() == ref
    assert (out3 / "features_w3.csv").read_bytes() == ref


def test_featurize_missing_manifest_errors(tmp_path, capsys):
    assert main(["featurize", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_featurize_unknown_family_errors(corpus_dir, tmp_path, capsys):
    assert main(["featurize", str(corpus_dir / "manifest.csv"),
                 "--out", str(tmp_path), "--features", "bogus"]) == 1
    assert "unknown feature families" in capsys.readouterr().err


def small_grid_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"c_grid": [1.0, 10.0], "gamma_grid": [0.1]}))
    return cfg


def test_evaluate_from_manifest(corpus_dir, tmp_path, capsys):
    out = tmp_path / "eval"
    assert main(["evaluate", str(corpus_dir / "manifest.csv"), "--pair", "A,B",
                 "--features", "dct-am", "--out", str(out),
                 "--config", str(small_grid_config(tmp_path))]) == 0
    assert "accuracy" in capsys.readouterr().out
    report = json.loads((out / "report_A_vs_B_w3.json").read_text())
    assert report["pair"] == ["A", "B"]
    assert len(report["folds"]) == 3
    assert (out / "report_A_vs_B_w3.txt").exists()


def test_evaluate_fused_features_dimension(corpus_dir, tmp_path):
    out = tmp_path / "evalf"
    feats = tmp_path / "features"
    assert main(["featurize", str(corpus_dir / "manifest.csv"), "--out", str(feats),
                 "--features", "dct-am,dct-fm"]) == 0
    table = read_feature_csv(feats / "features_w3.csv")
    assert len(table.names) == 8  # fused AM+FM DCT vector
    assert main(["evaluate", str(feats / "features_w3.csv"), "--pair", "A,B",
                 "--features", "dct-am,dct-fm", "--out", str(out),
                 "--config", str(small_grid_config(tmp_path))]) == 0
    report = json.loads((out / "report_A_vs_B.json").read_text())
    assert report["feature_set"] == "dct-am+dct-fm"


def test_evaluate_rerun_byte_identical(corpus_dir, tmp_path):
    cfg = small_grid_config(tmp_path)
    out1, out2 = tmp_path / "e1", tmp_path / "e2"
    base = ["evaluate", str(corpus_dir / "manifest.csv"), "--pair", "A,B",
            "--features", "dct-am", "--config", str(cfg)]
    assert main(base + ["--out", str(out1)]) == 0
    assert main(base + ["--out", str(out2)]) == 0
    assert (out1 / "report_A_vs_B_w3.json").read_bytes() == \
        (out2 / "report_A_vs_B_w3.json").read_bytes()


def test_evaluate_single_group_errors(corpus_dir, tmp_path, capsys):
    assert main(["evaluate", str(corpus_dir / "manifest.csv"), "--pair", "A,A",
                 "--out", str(tmp_path)]) == 1
    assert "two" in capsys.readouterr().err.lower()


def test_evaluate_absent_group_errors(corpus_dir, tmp_path, capsys):
    assert main(["evaluate", str(corpus_dir / "manifest.csv"), "--pair", "A,Z",
                 "--out", str(tmp_path), "--config",
                 str(small_grid_config(tmp_path))]) == 1
    assert "not in data" in capsys.readouterr().err


def test_config_flag_beats_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"frames": 40, "seed": 5}))
    clip = synth_am(SynthSpec(kind="AM", mod=((2.5, 0.5),), duration_s=6.0,
                              sample_rate=SR))
    wav = tmp_path / "clip.wav"
    write_wav(wav, clip.samples, SR)
    out = tmp_path / "a"
    assert main(["analyze", str(wav), "--config", str(cfg),
                 "--frames", "30", "--out", str(out)]) == 0
    effective = json.loads((out / "config.json").read_text())
    assert effective["frames"] == 30  # flag wins
    assert effective["seed"] == 5  # file beats default
    lines = (out / "clip_am_spectrogram_w3.tsv").read_text().strip().split("\n")
    assert all(len(ln.split("\t")) == 30 + 1 for ln in lines)


def test_unknown_config_key_errors(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus_knob": 1}))
    assert main(["synth", str(corpus_spec_json(tmp_path)), "--config", str(cfg),
                 "--out", str(tmp_path / "c")]) == 1
    assert "bogus_knob" in capsys.readouterr().err
