"""AM and FM low-frequency modulation envelopes."""

from dataclasses import dataclass

import numpy as np

from rhythmformants import kernels
from rhythmformants.audio import AudioClip


class EnvelopeError(ValueError):
    """Raised when an envelope cannot be extracted from the given input."""


@dataclass(frozen=True)
class Envelope:
    """Uniformly sampled modulation envelope (AM: amplitude >= 0, FM: Hz > 0)."""

    values: np.ndarray
    rate: float
    kind: str  # "AM" or "FM"
    source_utterance: str = ""

    def __post_init__(self):
        if self.kind not in ("AM", "FM"):
            raise ValueError(f"kind must be AM or FM, got {self.kind!r}")
        if self.rate < 20.0:
            raise ValueError(f"envelope rate {self.rate} Hz is below the 20 Hz minimum")
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", vals)
        if self.kind == "AM" and np.any(vals < 0):
            raise ValueError("AM envelope must be nonnegative")
        if self.kind == "FM" and np.any(vals <= 0):
            raise ValueError("FM envelope must be strictly positive")

    @property
    def duration_s(self) -> float:
        return len(self.values) / self.rate


@dataclass(frozen=True)
class F0Contour:
    """Frame-rate F0 track; 0 encodes unvoiced frames."""

    f0: np.ndarray
    hop: float
    frame_len: float
    voicing: np.ndarray

    @property
    def voiced_fraction(self) -> float:
        return float(np.mean(self.voicing)) if len(self.voicing) else 0.0


def analytic_magnitude(samples) -> np.ndarray:
    """|x + i*H(x)| via the frequency-domain analytic signal.

    Negative frequencies are zeroed and positive ones doubled (DC and
    Nyquist kept single) before the inverse transform.
    """
    x = np.asarray(samples, dtype=np.float64)
    n = len(x)
    if n == 0:
        raise ValueError("empty input")
    spec = np.fft.fft(x)
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[n // 2] = 1.0
        h[1 : n // 2] = 2.0
    else:
        h[1 : (n + 1) // 2] = 2.0
    return np.abs(np.fft.ifft(spec * h))


def moving_average(x, width: int) -> np.ndarray:
    """Centered moving average; edges average over the available samples."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    c = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(n)
    lo = np.maximum(idx - (width - 1) // 2, 0)
    hi = np.minimum(idx + width // 2 + 1, n)
    return (c[hi] - c[lo]) / (hi - lo)


def _decimate_mean(x, factor: int) -> np.ndarray:
    n_blocks = len(x) // factor
    return x[: n_blocks * factor].reshape(n_blocks, factor).mean(axis=1)


def am_envelope(clip: AudioClip, rate: float = 100.0, smooth_s: float = 0.05) -> Envelope:
    """Analytic magnitude, moving-average smoothing, block-mean decimation."""
    sr = clip.sample_rate
    width = int(round(smooth_s * sr))
    if len(clip.samples) < width:
        raise EnvelopeError(
            f"clip shorter than one smoothing window ({len(clip.samples)} < {width} samples)"
        )
    if sr % int(rate) != 0:
        raise EnvelopeError(f"sample rate {sr} not divisible by envelope rate {rate}")
    env = moving_average(analytic_magnitude(clip.samples), width)
    env = _decimate_mean(env, sr // int(rate))
    return Envelope(values=env, rate=float(rate), kind="AM", source_utterance=clip.utterance_id)


def track_f0(
    clip: AudioClip,
    frame_s: float = 0.040,
    hop_s: float = 0.010,
    f_min: float = 60.0,
    f_max: float = 400.0,
    voicing_threshold: float = 0.3,
    median_width: int = 5,
) -> F0Contour:
    """Simplified RAPT-style tracker: per-frame NCCF peak over the lag range.

    A frame is voiced iff its peak NCCF reaches voicing_threshold; voiced
    lags are refined by parabolic interpolation and the contour is cleaned
    with a median filter over each voiced run.
    """
    sr = clip.sample_rate
    frame_len = int(round(frame_s * sr))
    hop = int(round(hop_s * sr))
    lag_min = int(np.floor(sr / f_max))
    lag_max = int(np.ceil(sr / f_min))
    n_frames = kernels.nccf_frame_count(len(clip.samples), frame_len, hop, lag_max)
    if n_frames < 2:
        raise EnvelopeError(
            f"clip too short for F0 tracking: {n_frames} frame(s), need at least 2"
        )
    nccf = kernels.nccf_matrix(clip.samples, frame_len, hop, lag_min, lag_max)

    f0 = np.zeros(n_frames)
    voicing = np.zeros(n_frames, dtype=bool)
    n_lags = nccf.shape[1]
    for i in range(n_frames):
        row = nccf[i]
        j = int(np.argmax(row))
        if row[j] < voicing_threshold:
            continue
        lag = float(lag_min + j)
        if 0 < j < n_lags - 1:
            a, b, c = row[j - 1], row[j], row[j + 1]
            den = a - 2.0 * b + c
            if den < 0.0:
                shift = 0.5 * (a - c) / den
                lag += min(max(shift, -0.5), 0.5)
        voicing[i] = True
        f0[i] = min(max(sr / lag, f_min), f_max)

    f0 = _median_filter_runs(f0, voicing, median_width)
    return F0Contour(f0=f0, hop=hop_s, frame_len=frame_s, voicing=voicing)


def _median_filter_runs(f0, voicing, width: int) -> np.ndarray:
    """Median-filter f0 within each contiguous voiced run (window truncated at run edges)."""
    out = f0.copy()
    half = width // 2
    n = len(f0)
    i = 0
    while i < n:
        if not voicing[i]:
            i += 1
            continue
        j = i
        while j < n and voicing[j]:
            j += 1
        run = f0[i:j]
        for t in range(len(run)):
            lo = max(t - half, 0)
            hi = min(t + half + 1, len(run))
            out[i + t] = np.median(run[lo:hi])
        i = j
    return out


def fm_envelope(
    contour: F0Contour,
    rate: float = 100.0,
    min_voiced_fraction: float = 0.1,
    source_utterance: str = "",
) -> Envelope:
    """Median-fill unvoiced gaps and resample the contour to the envelope rate."""
    if contour.voiced_fraction < min_voiced_fraction:
        raise EnvelopeError(
            f"insufficient voicing: {contour.voiced_fraction:.1%} of frames voiced, "
            f"need {min_voiced_fraction:.0%}"
        )
    med = float(np.median(contour.f0[contour.voicing]))
    filled = np.where(contour.voicing, contour.f0, med)
    n = len(filled)
    src_t = np.arange(n) * contour.hop
    n_out = int(round(n * contour.hop * rate))
    dst_t = np.arange(n_out) / rate
    values = np.interp(dst_t, src_t, filled)
    return Envelope(values=values, rate=float(rate), kind="FM", source_utterance=source_utterance)


def write_envelope_tsv(env: Envelope, path) -> None:
    """Two-column TSV: time_s and value."""
    lines = ["time_s\tvalue"]
    for i, v in enumerate(env.values):
        lines.append(f"{i / env.rate!r}\t{float(v)!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
