"""Synthetic AM/FM modulation corpora with known ground truth."""

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from rhythmformants.audio import AudioClip, write_wav
from rhythmformants.manifest import DatasetManifest, ManifestEntry, write_manifest

N_HARMONICS = 10
GAP_EDGE_S = 0.010
GAP_NOISE_LEVEL = 1e-3


class SynthSpecError(ValueError):
    """Raised for invalid synthesis specifications (names the offending field)."""


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic clip.

    kind AM/CHIRP modulates a sinusoidal carrier's amplitude; kind FM sweeps
    the fundamental of a 10-harmonic tone; kind AMFM does both, with `mod`
    driving the f0 and `am_mod` the amplitude. `mod` lists (freq_hz, depth)
    components; CHIRP instead sweeps a single component's frequency linearly
    over `chirp` = (f_start, f_end), taking its depth from mod[0]. `gaps`
    lists (start_s, len_s) silent or unvoiced intervals.
    """

    kind: str
    duration_s: float = 12.0
    sample_rate: int = 16000
    carrier_hz: float = 220.0
    f0_base_hz: float = 150.0
    mod: tuple = ()
    am_mod: tuple = ()
    chirp: tuple = ()
    gaps: tuple = ()
    seed: int = 0

    def validate(self, f_min: float = 60.0, f_max: float = 400.0) -> None:
        if self.kind not in ("AM", "FM", "AMFM", "CHIRP"):
            raise SynthSpecError(f"kind: unknown value {self.kind!r}")
        if self.duration_s < 6.0:
            raise SynthSpecError(f"duration_s: {self.duration_s} is below the 6 s minimum")
        if self.sample_rate <= 0:
            raise SynthSpecError(f"sample_rate: {self.sample_rate} must be positive")
        for field_name, comps in (("mod", self.mod), ("am_mod", self.am_mod)):
            for i, (freq, depth) in enumerate(comps):
                if not 0.0 < freq <= 10.0:
                    raise SynthSpecError(f"{field_name}[{i}].freq: {freq} outside (0, 10] Hz")
                if not 0.0 < depth <= 1.0:
                    raise SynthSpecError(f"{field_name}[{i}].depth: {depth} outside (0, 1]")
        if self.am_mod and self.kind != "AMFM":
            raise SynthSpecError("am_mod: only valid for kind AMFM")
        am_depth = sum(d for _, d in self.am_mod)
        if am_depth > 1.0:
            raise SynthSpecError(
                f"am_mod: depths sum to {am_depth}, which would overmodulate (> 1)"
            )
        if self.kind == "CHIRP":
            if len(self.chirp) != 2:
                raise SynthSpecError("chirp: need (f_start, f_end)")
            for name, f in zip(("f_start", "f_end"), self.chirp):
                if not 0.0 < f <= 10.0:
                    raise SynthSpecError(f"chirp.{name}: {f} outside (0, 10] Hz")
        total_depth = sum(d for _, d in self.mod)
        if self.kind in ("AM", "CHIRP") and total_depth > 1.0:
            raise SynthSpecError(
                f"mod: depths sum to {total_depth}, which would overmodulate (> 1)"
            )
        if self.kind in ("FM", "AMFM"):
            swing = self.f0_base_hz * total_depth
            lo, hi = self.f0_base_hz - swing, self.f0_base_hz + swing
            if lo < f_min or hi > f_max:
                raise SynthSpecError(
                    f"f0_base_hz/mod: f0 range [{lo:.1f}, {hi:.1f}] Hz exits the "
                    f"[{f_min:.0f}, {f_max:.0f}] Hz tracker bounds"
                )
            if N_HARMONICS * hi >= self.sample_rate / 2:
                raise SynthSpecError(
                    f"sample_rate: {self.sample_rate} too low for {N_HARMONICS} "
                    f"harmonics of {hi:.0f} Hz"
                )
        for i, (start, length) in enumerate(self.gaps):
            if start < 0 or length <= 0 or start + length > self.duration_s:
                raise SynthSpecError(f"gaps[{i}]: ({start}, {length}) outside the clip")


def _gap_gate(spec: SynthSpec, n: int) -> np.ndarray:
    """1 outside gaps, 0 inside, with raised-cosine edges of GAP_EDGE_S."""
    sr = spec.sample_rate
    gate = np.ones(n)
    edge = int(round(GAP_EDGE_S * sr))
    ramp = 0.5 * (1.0 + np.cos(np.linspace(0.0, np.pi, edge)))  # 1 -> 0
    for start_s, len_s in spec.gaps:
        a = int(round(start_s * sr))
        b = min(int(round((start_s + len_s) * sr)), n)
        gate[a:b] = 0.0
        if b - a >= 2 * edge:  # ramps live inside the gap; short gaps stay hard-edged
            gate[a : a + edge] = ramp
            gate[b - edge : b] = ramp[::-1]
    return gate


def synth_am(spec: SynthSpec) -> AudioClip:
    """AM or CHIRP clip: (1 + modulator) * carrier, peak-normalized."""
    spec.validate()
    if spec.kind not in ("AM", "CHIRP"):
        raise SynthSpecError(f"kind: synth_am cannot make {spec.kind!r}")
    sr = spec.sample_rate
    t = np.arange(int(round(spec.duration_s * sr))) / sr
    modulator = np.zeros_like(t)
    for freq, depth in spec.mod:
        modulator += depth * np.cos(2.0 * np.pi * freq * t)
    if spec.kind == "CHIRP":
        f_start, f_end = spec.chirp
        depth = spec.mod[0][1] if spec.mod else 0.5
        inst_freq = f_start + (f_end - f_start) * t / spec.duration_s
        phase = 2.0 * np.pi * np.cumsum(inst_freq) / sr
        modulator = depth * np.cos(phase)
    x = (1.0 + modulator) * np.cos(2.0 * np.pi * spec.carrier_hz * t)
    x *= _gap_gate(spec, len(x))
    peak = np.abs(x).max()
    return AudioClip(samples=x / peak, sample_rate=sr)


def synth_fm(spec: SynthSpec) -> AudioClip:
    """FM (or AMFM) clip: 10-harmonic tone whose f0 follows the modulator.

    Gaps turn into low-level noise; AMFM additionally multiplies in an
    amplitude modulator built from am_mod.
    """
    spec.validate()
    if spec.kind not in ("FM", "AMFM"):
        raise SynthSpecError(f"kind: synth_fm cannot make {spec.kind!r}")
    sr = spec.sample_rate
    t = np.arange(int(round(spec.duration_s * sr))) / sr
    f0 = np.full_like(t, spec.f0_base_hz)
    for freq, depth in spec.mod:
        f0 += depth * spec.f0_base_hz * np.sin(2.0 * np.pi * freq * t)
    phase = 2.0 * np.pi * np.cumsum(f0) / sr
    x = np.zeros_like(t)
    for h in range(1, N_HARMONICS + 1):
        x += np.sin(h * phase) / h
    if spec.kind == "AMFM":
        am = np.ones_like(t)
        for freq, depth in spec.am_mod:
            am += depth * np.cos(2.0 * np.pi * freq * t)
        x *= am
    if spec.gaps:
        rng = np.random.default_rng(spec.seed)
        noise = GAP_NOISE_LEVEL * rng.standard_normal(len(x))
        gate = _gap_gate(spec, len(x))
        x = gate * x + (1.0 - gate) * noise * np.abs(x).max()
    peak = np.abs(x).max()
    return AudioClip(samples=x / peak, sample_rate=sr)


def synth_clip(spec: SynthSpec) -> AudioClip:
    return synth_fm(spec) if spec.kind in ("FM", "AMFM") else synth_am(spec)


def _jitter_components(comps, jitter, rng, renorm):
    out = []
    for freq, depth in comps:
        f = freq * (1.0 + rng.uniform(-jitter, jitter))
        d = depth * (1.0 + rng.uniform(-jitter, jitter))
        out.append((float(np.clip(f, 1e-3, 10.0)), float(min(d, 1.0))))
    total = sum(d for _, d in out)
    if renorm and total > 1.0:  # keep the clip legal
        out = [(f, d / total) for f, d in out]
    return tuple(out)


def _jittered(spec: SynthSpec, jitter: float, rng) -> SynthSpec:
    """Perturb modulation freqs/depths by up to +/-jitter (relative), seeded."""
    mod = _jitter_components(spec.mod, jitter, rng,
                             renorm=spec.kind in ("AM", "CHIRP"))
    am_mod = _jitter_components(spec.am_mod, jitter, rng, renorm=True)
    return replace(spec, mod=mod, am_mod=am_mod)


def synth_corpus(
    class_specs: dict,
    per_class: int,
    jitter: float,
    seed: int,
    out_dir,
    speakers_per_class: int = 6,
) -> DatasetManifest:
    """Write a labeled 2-class WAV corpus plus manifest.csv.

    Every utterance gets an independently jittered copy of its class
    template; synthetic speaker ids are assigned round-robin so
    speaker-independent folds are well-defined. Pure function of
    (templates, per_class, jitter, seed): reruns are bit-identical.
    """
    if len(class_specs) != 2:
        raise SynthSpecError(f"classes: need exactly 2, got {len(class_specs)}")
    if per_class < 6:
        raise SynthSpecError(f"per_class: {per_class} is below the minimum of 6")
    if speakers_per_class < 6:
        raise SynthSpecError(f"speakers_per_class: {speakers_per_class} must be >= 6")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    width = max(3, len(str(per_class)))
    entries = []
    for group in sorted(class_specs):
        template = class_specs[group]
        template.validate()
        for u in range(per_class):
            clip_spec = _jittered(template, jitter, rng)
            clip_spec = replace(clip_spec, seed=int(rng.integers(0, 2**31)))
            clip = synth_clip(clip_spec)
            fname = f"{group}_u{u:0{width}d}.wav"
            write_wav(out_dir / fname, clip.samples, clip.sample_rate)
            entries.append(
                ManifestEntry(
                    path=fname,
                    utterance_id=f"{group}_u{u:0{width}d}",
                    speaker_id=f"{group}_s{u % speakers_per_class:02d}",
                    group=group,
                )
            )
    write_manifest(out_dir / "manifest.csv", entries)
    resolved = [replace(e, path=str(out_dir / e.path)) for e in entries]
    return DatasetManifest(resolved)
