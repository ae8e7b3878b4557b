"""Command-line front end: analyze, featurize, evaluate, synth."""

import argparse
import concurrent.futures
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from rhythmformants.audio import load_wav
from rhythmformants.config import ConfigError, RunConfig, load_config
from rhythmformants.envelopes import EnvelopeError, write_envelope_tsv
from rhythmformants.evaluation import EvaluationError, evaluate
from rhythmformants.features import (
    FAMILIES,
    FeatureError,
    FeatureTable,
    family_feature_names,
    read_feature_csv,
)
from rhythmformants.manifest import ManifestError, load_manifest
from rhythmformants.pipeline import analyze_clip, featurize_clip
from rhythmformants.spectra import SpectrumError, write_spectrogram_tsv, write_tracks_csv
from rhythmformants.synth import SynthSpec, SynthSpecError, synth_corpus

logger = logging.getLogger("rhythmformants")


def _atomic_write(path: Path, write_fn) -> None:
    """Write via temp-then-rename so partial files never land under the final name."""
    tmp = path.with_name(path.name + ".tmp")
    write_fn(tmp)
    os.replace(tmp, path)


def _write_text(path: Path, text: str) -> None:
    _atomic_write(path, lambda p: Path(p).write_text(text, encoding="utf-8"))


def _window_tag(window_s: float) -> str:
    return f"w{window_s:g}"


def _echo_config(cfg: RunConfig, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_text(out_dir / "config.json", json.dumps(cfg.to_dict(), indent=2) + "\n")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument(
        "--window",
        type=str,
        default=None,
        help="spectrogram window seconds, comma-separated for a sweep (e.g. 3,4,5)",
    )
    parser.add_argument("--frames", type=int, default=None, help="spectrogram frame count")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed")
    parser.add_argument("--jobs", type=int, default=None, help="parallel utterance workers")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument(
        "--features",
        type=str,
        default=None,
        help=f"comma list of feature families from: {', '.join(FAMILIES)}",
    )


def _config_from_args(args) -> RunConfig:
    overrides = {
        "frames": args.frames,
        "seed": args.seed,
        "jobs": args.jobs,
    }
    if args.window is not None:
        overrides["windows"] = tuple(float(w) for w in args.window.split(","))
    return load_config(args.config, overrides)


def _families_from_args(args, default=FAMILIES):
    if args.features is None:
        return list(default)
    families = [f.strip() for f in args.features.split(",") if f.strip()]
    family_feature_names(families)  # validates
    return families


def cmd_analyze(args) -> int:
    cfg = _config_from_args(args)
    out = args.out
    _echo_config(cfg, out)
    clip = load_wav(args.audio, utterance_id=Path(args.audio).stem)
    results, warnings = analyze_clip(clip, cfg)
    stem = clip.utterance_id
    written = 0
    for kind in ("AM", "FM"):
        if kind not in results:
            continue
        tag = kind.lower()
        _atomic_write(out / f"{stem}_{tag}_envelope.tsv",
                      lambda p, e=results[kind]: write_envelope_tsv(e, p))
        written += 1
        for window_s in cfg.windows:
            spec, tracks = results[(kind, window_s)]
            wtag = _window_tag(window_s)
            _atomic_write(out / f"{stem}_{tag}_spectrogram_{wtag}.tsv",
                          lambda p, s=spec: write_spectrogram_tsv(s, p))
            _atomic_write(out / f"{stem}_{tag}_tracks_{wtag}.csv",
                          lambda p, t=tracks: write_tracks_csv(t, p))
            written += 2
    for w in warnings:
        logger.warning(w)
    print(f"analyze: wrote {written} file(s) to {out} ({len(warnings)} warning(s))")
    return 0


def _featurize_entry(entry, families, window_s, cfg):
    """Worker: one utterance's feature row (or an error string)."""
    try:
        clip = load_wav(
            entry.path,
            utterance_id=entry.utterance_id,
            speaker_id=entry.speaker_id,
            group=entry.group,
        )
        values = featurize_clip(clip, families, window_s, cfg)
        return entry.utterance_id, values, None
    except (OSError, ValueError) as exc:
        return entry.utterance_id, None, str(exc)


def _featurize_manifest(manifest, families, window_s, cfg) -> tuple:
    """FeatureTable for one window; failed utterances are skipped with warnings."""
    names = family_feature_names(families)
    rows, uids, spks, grps, skipped = [], [], [], [], []
    if cfg.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            outputs = list(
                pool.map(
                    _featurize_entry,
                    manifest.entries,
                    [families] * len(manifest.entries),
                    [window_s] * len(manifest.entries),
                    [cfg] * len(manifest.entries),
                )
            )
    else:
        outputs = [_featurize_entry(e, families, window_s, cfg) for e in manifest.entries]
    for entry, (uid, values, err) in zip(manifest.entries, outputs):
        if err is not None:
            logger.warning("skipping %s: %s", uid, err)
            skipped.append(uid)
            continue
        rows.append(values)
        uids.append(entry.utterance_id)
        spks.append(entry.speaker_id)
        grps.append(entry.group)
    table = FeatureTable(
        names=names,
        values=np.asarray(rows, dtype=np.float64) if rows else np.empty((0, len(names))),
        utterance_ids=uids,
        speaker_ids=spks,
        groups=grps,
    )
    return table, skipped


def cmd_featurize(args) -> int:
    cfg = _config_from_args(args)
    families = _families_from_args(args)
    manifest = load_manifest(args.manifest)
    out = args.out
    _echo_config(cfg, out)
    total_skipped = 0
    for window_s in cfg.windows:
        table, skipped = _featurize_manifest(manifest, families, window_s, cfg)
        total_skipped += len(skipped)
        wtag = _window_tag(window_s)
        _atomic_write(out / f"features_{wtag}.csv", lambda p, t=table: t.write_csv(p))
        _atomic_write(out / f"features_{wtag}.json", lambda p, t=table: t.write_json(p))
        print(
            f"featurize: window {window_s:g} s -> {len(table.values)} row(s) x "
            f"{len(table.names)} feature(s), {len(skipped)} skipped"
        )
    return 0


def _sanitize(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in label)


def cmd_evaluate(args) -> int:
    cfg = _config_from_args(args)
    families = _families_from_args(args, default=("dct-am",))
    pair = tuple(p.strip() for p in args.pair.split(","))
    if len(pair) != 2:
        raise EvaluationError(f"--pair needs two comma-separated groups, got {args.pair!r}")
    out = args.out
    _echo_config(cfg, out)
    feature_names = family_feature_names(families)
    set_name = "+".join(families)

    input_path = Path(args.data)
    with open(input_path, encoding="utf-8") as fh:
        header = fh.readline()
    is_features = header.startswith("utterance_id,")

    jobs = []
    if is_features:
        jobs.append((None, read_feature_csv(input_path)))
    else:
        manifest = load_manifest(input_path)
        for window_s in cfg.windows:
            table, _ = _featurize_manifest(manifest, families, window_s, cfg)
            jobs.append((window_s, table))

    pair_tag = f"{_sanitize(pair[0])}_vs_{_sanitize(pair[1])}"
    for window_s, table in jobs:
        report = evaluate(
            table,
            pair,
            feature_names=feature_names,
            k=cfg.folds,
            seed=cfg.seed,
            c_grid=cfg.c_grid,
            gamma_grid=cfg.gamma_grid,
            feature_set_name=set_name,
        )
        stem = f"report_{pair_tag}" + ("" if window_s is None else f"_{_window_tag(window_s)}")
        _write_text(out / f"{stem}.json", report.to_json())
        _write_text(out / f"{stem}.txt", report.to_text())
        label = "" if window_s is None else f" [window {window_s:g} s]"
        print(f"evaluate{label}: accuracy {100 * report.mean_accuracy:.2f} "
              f"+/- {100 * report.std_accuracy:.2f} %")
    return 0


def _parse_class_spec(data: dict) -> SynthSpec:
    known = {"group", "kind", "duration_s", "sample_rate", "carrier_hz",
             "f0_base_hz", "mod", "am_mod", "chirp", "gaps", "seed"}
    unknown = set(data) - known
    if unknown:
        raise SynthSpecError(f"class spec: unknown field(s) {', '.join(sorted(unknown))}")
    fields = {k: v for k, v in data.items() if k != "group"}
    for key in ("mod", "am_mod", "gaps"):
        if key in fields:
            fields[key] = tuple(tuple(x) for x in fields[key])
    if "chirp" in fields:
        fields["chirp"] = tuple(fields["chirp"])
    spec = SynthSpec(**fields)
    spec.validate()
    return spec


def cmd_synth(args) -> int:
    with open(args.spec, encoding="utf-8") as fh:
        data = json.load(fh)
    for key in ("classes", "per_class"):
        if key not in data:
            raise SynthSpecError(f"spec: missing field {key!r}")
    class_specs = {}
    for cls in data["classes"]:
        if "group" not in cls:
            raise SynthSpecError("classes[]: missing field 'group'")
        class_specs[cls["group"]] = _parse_class_spec(cls)
    manifest = synth_corpus(
        class_specs,
        per_class=int(data["per_class"]),
        jitter=float(data.get("jitter", 0.0)),
        seed=int(data.get("seed", 0)),
        out_dir=args.out,
        speakers_per_class=int(data.get("speakers_per_class", 6)),
    )
    info = manifest.summary()
    print(
        f"synth: wrote {info['n_utterances']} clip(s), groups {info['groups']}, "
        f"{info['n_speakers']} speaker(s) to {args.out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rhythmformants",
        description="Rhythm formant analysis: LF rhythm spectrograms, features, and "
        "speaker-independent SVM evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="envelopes, spectrograms, and tracks for one WAV")
    p.add_argument("audio", type=Path, help="input WAV (PCM16)")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("featurize", help="feature CSV/JSON for a manifest of WAVs")
    p.add_argument("manifest", type=Path, help="manifest CSV")
    _add_common(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("evaluate", help="cross-validated SVM report for a group pair")
    p.add_argument("data", type=Path, help="manifest CSV or feature CSV")
    p.add_argument("--pair", required=True, help="two group labels, e.g. A,P")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic 2-class corpus")
    p.add_argument("spec", type=Path, help="JSON synthesis spec")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        ConfigError,
        ManifestError,
        SynthSpecError,
        EvaluationError,
        EnvelopeError,
        FeatureError,
        SpectrumError,
        FileNotFoundError,
        json.JSONDecodeError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
