"""Per-utterance orchestration: clip -> envelopes -> spectrograms -> features."""

import logging

import numpy as np

from rhythmformants.audio import AudioClip, peak_normalize
from rhythmformants.config import RunConfig
from rhythmformants.envelopes import (
    Envelope,
    EnvelopeError,
    am_envelope,
    fm_envelope,
    track_f0,
)
from rhythmformants.features import (
    FeatureError,
    dct2_features,
    family_feature_names,
    mfcc_features,
    variance_features,
)
from rhythmformants.spectra import LFSpectrogram, lf_spectrogram, rformant_tracks

logger = logging.getLogger(__name__)


def clip_envelope(clip: AudioClip, kind: str, cfg: RunConfig) -> Envelope:
    """AM or FM envelope of a (normalized) clip under the run config."""
    clip = peak_normalize(clip)
    if kind == "AM":
        return am_envelope(clip, rate=cfg.envelope_rate, smooth_s=cfg.smooth_s)
    contour = track_f0(
        clip,
        frame_s=cfg.f0_frame_s,
        hop_s=cfg.f0_hop_s,
        f_min=cfg.f0_min,
        f_max=cfg.f0_max,
        voicing_threshold=cfg.voicing_threshold,
    )
    return fm_envelope(
        contour,
        rate=cfg.envelope_rate,
        min_voiced_fraction=cfg.min_voiced_fraction,
        source_utterance=clip.utterance_id,
    )


def envelope_spectrogram(env: Envelope, window_s: float, cfg: RunConfig) -> LFSpectrogram:
    return lf_spectrogram(
        env,
        window_s,
        frames=cfg.frames,
        band_hz=cfg.band_hz,
        pad_factor=cfg.pad_factor,
    )


def featurize_clip(clip: AudioClip, families, window_s: float, cfg: RunConfig) -> np.ndarray:
    """One utterance's concatenated feature values for the requested families.

    Raises FeatureError/EnvelopeError when a required envelope or feature
    cannot be computed; rank variances that are undefined come back as NaN.
    """
    names = family_feature_names(families)
    chunks = {}
    for kind in ("AM", "FM"):
        fams = [f for f in families if f.endswith(f"-{kind.lower()}")]
        if not fams:
            continue
        env = clip_envelope(clip, kind, cfg)
        spec = envelope_spectrogram(env, window_s, cfg)
        if f"var-{kind.lower()}" in families:
            chunks[f"var-{kind.lower()}"] = variance_features(
                rformant_tracks(spec, k=cfg.n_peaks)
            )
        if f"dct-{kind.lower()}" in families:
            chunks[f"dct-{kind.lower()}"] = dct2_features(spec, eps=cfg.log_eps)
    if "mfcc" in families:
        chunks["mfcc"] = mfcc_features(
            peak_normalize(clip),
            frame_s=cfg.vad_frame_s,
            hop_s=cfg.vad_hop_s,
            vad_theta=cfg.vad_theta,
        )
    values = np.concatenate([chunks[f] for f in families])
    if len(values) != len(names):
        raise FeatureError(f"feature length {len(values)} != name count {len(names)}")
    return values


def analyze_clip(clip: AudioClip, cfg: RunConfig):
    """Envelopes, spectrograms, and tracks for one utterance.

    Returns (results, warnings): results maps (kind) -> Envelope and
    (kind, window_s) -> (LFSpectrogram, RFormantTracks). A failed FM branch
    is reported as a warning instead of aborting the AM outputs.
    """
    results = {}
    warnings = []
    for kind in ("AM", "FM"):
        try:
            env = clip_envelope(clip, kind, cfg)
        except (EnvelopeError, FeatureError) as exc:
            warnings.append(f"{kind} envelope skipped for {clip.utterance_id or '<clip>'}: {exc}")
            continue
        results[kind] = env
        for window_s in cfg.windows:
            spec = envelope_spectrogram(env, window_s, cfg)
            results[(kind, window_s)] = (spec, rformant_tracks(spec, k=cfg.n_peaks))
    return results, warnings
