"""Fixed-length utterance features: track variances, 2D-DCT, and MFCC baseline."""

import csv
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from rhythmformants.audio import AudioClip
from rhythmformants.spectra import LFSpectrogram, RFormantTracks

logger = logging.getLogger(__name__)


class FeatureError(ValueError):
    """Raised when a feature vector cannot be computed for an utterance."""


# ---------------------------------------------------------------------------
# R-formant trajectory variances
# ---------------------------------------------------------------------------

def variance_features(tracks: RFormantTracks) -> np.ndarray:
    """Population variance (Hz^2) of each rank's valid track frequencies.

    Ranks with fewer than 2 valid frames come back as NaN with a warning;
    downstream experiments drop such utterances.
    """
    k = tracks.freqs.shape[0]
    out = np.full(k, np.nan)
    for rank in range(k):
        vals = tracks.freqs[rank, tracks.valid[rank]]
        if len(vals) < 2:
            logger.warning("rank-%d track has %d valid frame(s); variance is missing",
                           rank + 1, len(vals))
            continue
        out[rank] = float(np.var(vals))
    return out


# ---------------------------------------------------------------------------
# 2D-DCT of the log LF spectrogram
# ---------------------------------------------------------------------------

def dct_basis(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis: B[k, b] = w(k) * sqrt(2/n) * cos(pi k (2b+1) / 2n)."""
    k = np.arange(n)[:, None]
    b = np.arange(n)[None, :]
    basis = np.cos(np.pi * k * (2 * b + 1) / (2 * n)) * np.sqrt(2.0 / n)
    basis[0] /= np.sqrt(2.0)
    return basis


def dct2(matrix) -> np.ndarray:
    """Orthonormal 2D DCT-II via separable basis products.

    Equivalent to the direct double summation with 2*w(k)*w(l)/sqrt(NM)
    weights (w(0) = 1/sqrt(2), else 1); energy preserving.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("dct2 needs a non-empty 2-D matrix")
    n_rows, n_cols = m.shape
    return dct_basis(n_rows) @ m @ dct_basis(n_cols).T


def dct2_features(spec: LFSpectrogram, eps: float = 1e-6) -> np.ndarray:
    """Row-major 2x2 low-order block of the log-spectrogram's 2D-DCT."""
    coeffs = dct2(np.log(spec.matrix + eps))
    return coeffs[:2, :2].reshape(-1).copy()


# ---------------------------------------------------------------------------
# MFCC baseline (13 + delta + delta-delta, VAD-gated, mean+std pooled)
# ---------------------------------------------------------------------------

def _frame_signal(x, frame_len: int, hop: int) -> np.ndarray:
    n_frames = 1 + (len(x) - frame_len) // hop
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx]


def energy_vad(clip: AudioClip, frame_s: float = 0.020, hop_s: float = 0.010,
               theta: float = 0.1) -> np.ndarray:
    """Frame gate: mean-square energy at least theta times the median energy."""
    frame_len = int(round(frame_s * clip.sample_rate))
    hop = int(round(hop_s * clip.sample_rate))
    if len(clip.samples) < frame_len:
        raise FeatureError("clip shorter than one VAD frame")
    energy = np.mean(_frame_signal(clip.samples, frame_len, hop) ** 2, axis=1)
    return (energy >= theta * np.median(energy)) & (energy > 0)


def mel_filterbank(n_filters: int, nfft: int, sample_rate: int) -> np.ndarray:
    """Triangular mel filters from 0 Hz to Nyquist over rfft bins."""
    low_mel = 0.0
    high_mel = 2595.0 * np.log10(1.0 + (sample_rate / 2.0) / 700.0)
    mel_pts = np.linspace(low_mel, high_mel, n_filters + 2)
    hz_pts = 700.0 * (10.0 ** (mel_pts / 2595.0) - 1.0)
    bins = np.floor((nfft + 1) * hz_pts / sample_rate).astype(int)
    fb = np.zeros((n_filters, nfft // 2 + 1))
    for j in range(n_filters):
        for i in range(bins[j], bins[j + 1]):
            fb[j, i] = (i - bins[j]) / max(bins[j + 1] - bins[j], 1)
        for i in range(bins[j + 1], bins[j + 2]):
            fb[j, i] = (bins[j + 2] - i) / max(bins[j + 2] - bins[j + 1], 1)
    return fb


def _deltas(coeffs: np.ndarray) -> np.ndarray:
    """Regression deltas over +/-2 frames, edge frames replicated."""
    padded = np.concatenate([coeffs[:1], coeffs[:1], coeffs, coeffs[-1:], coeffs[-1:]])
    return (padded[3:-1] - padded[1:-3] + 2.0 * (padded[4:] - padded[:-4])) / 10.0


def mfcc_frames(clip: AudioClip, frame_s: float = 0.020, hop_s: float = 0.010,
                n_filters: int = 26, n_ceps: int = 13) -> np.ndarray:
    """Per-frame 39-dim vectors: 13 MFCCs plus delta and delta-delta."""
    sr = clip.sample_rate
    frame_len = int(round(frame_s * sr))
    hop = int(round(hop_s * sr))
    if len(clip.samples) < frame_len:
        raise FeatureError("clip shorter than one MFCC frame")
    nfft = 1
    while nfft < frame_len:
        nfft *= 2
    frames = _frame_signal(clip.samples, frame_len, hop) * np.hamming(frame_len)
    power = np.abs(np.fft.rfft(frames, nfft, axis=1)) ** 2
    mel = power @ mel_filterbank(n_filters, nfft, sr).T
    mel = np.log(np.maximum(mel, np.finfo(np.float64).eps))
    ceps = mel @ dct_basis(n_filters).T[:, :n_ceps]
    return np.hstack([ceps, _deltas(ceps), _deltas(_deltas(ceps))])


def mfcc_features(clip: AudioClip, frame_s: float = 0.020, hop_s: float = 0.010,
                  vad_theta: float = 0.1) -> np.ndarray:
    """78-dim utterance vector: mean and std of VAD-kept 39-dim frames."""
    frames = mfcc_frames(clip, frame_s=frame_s, hop_s=hop_s)
    voiced = energy_vad(clip, frame_s=frame_s, hop_s=hop_s, theta=vad_theta)
    kept = frames[voiced]
    if len(kept) < 3:
        raise FeatureError(
            f"only {len(kept)} frame(s) pass VAD for {clip.utterance_id or '<clip>'}; need 3"
        )
    return np.concatenate([kept.mean(axis=0), kept.std(axis=0)])


# ---------------------------------------------------------------------------
# Named feature families and the per-corpus feature table
# ---------------------------------------------------------------------------

FAMILIES = ("var-am", "var-fm", "dct-am", "dct-fm", "mfcc")

FAMILY_NAMES = {
    "var-am": [f"Var-RF{i}-AM" for i in range(1, 7)],
    "var-fm": [f"Var-RF{i}-FM" for i in range(1, 7)],
    "dct-am": [f"2D-DCT{i}-AM" for i in range(1, 5)],
    "dct-fm": [f"2D-DCT{i}-FM" for i in range(1, 5)],
    "mfcc": [f"MFCC-{i}" for i in range(1, 79)],
}


def family_feature_names(families) -> list:
    bad = [f for f in families if f not in FAMILY_NAMES]
    if bad:
        raise FeatureError(f"unknown feature families: {', '.join(bad)}")
    names = []
    for fam in families:
        names.extend(FAMILY_NAMES[fam])
    return names


@dataclass
class FeatureTable:
    """Per-utterance feature rows with names and corpus metadata."""

    names: list
    values: np.ndarray  # (n_utterances, n_features)
    utterance_ids: list = field(default_factory=list)
    speaker_ids: list = field(default_factory=list)
    groups: list = field(default_factory=list)

    def select(self, names) -> "FeatureTable":
        missing = [n for n in names if n not in self.names]
        if missing:
            raise FeatureError(f"features not in table: {', '.join(missing)}")
        cols = [self.names.index(n) for n in names]
        return FeatureTable(
            names=list(names),
            values=self.values[:, cols],
            utterance_ids=list(self.utterance_ids),
            speaker_ids=list(self.speaker_ids),
            groups=list(self.groups),
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["utterance_id", "speaker_id", "group"] + list(self.names))
            for i in range(len(self.values)):
                writer.writerow(
                    [self.utterance_ids[i], self.speaker_ids[i], self.groups[i]]
                    + [repr(float(v)) for v in self.values[i]]
                )

    def write_json(self, path) -> None:
        rows = []
        for i in range(len(self.values)):
            rows.append(
                {
                    "utterance_id": self.utterance_ids[i],
                    "speaker_id": self.speaker_ids[i],
                    "group": self.groups[i],
                    "features": {n: float(v) for n, v in zip(self.names, self.values[i])},
                }
            )
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"names": list(self.names), "rows": rows}, fh, indent=2, allow_nan=True)
            fh.write("\n")


def read_feature_csv(path) -> FeatureTable:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["utterance_id", "speaker_id", "group"]:
            raise FeatureError(f"{path} is not a feature CSV (unexpected header)")
        names = header[3:]
        uids, spks, grps, rows = [], [], [], []
        for row in reader:
            uids.append(row[0])
            spks.append(row[1])
            grps.append(row[2])
            rows.append([float(v) for v in row[3:]])
    return FeatureTable(
        names=names,
        values=np.asarray(rows, dtype=np.float64),
        utterance_ids=uids,
        speaker_ids=spks,
        groups=grps,
    )
