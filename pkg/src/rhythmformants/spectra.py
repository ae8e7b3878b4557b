"""Low-frequency spectra, spectrograms, and rhythm-formant trajectories."""

from dataclasses import dataclass

import numpy as np

from rhythmformants.envelopes import Envelope


class SpectrumError(ValueError):
    """Raised for windows that cannot produce a valid LF spectrum."""


@dataclass(frozen=True)
class LFSpectrum:
    """Magnitude spectrum over (0, band] Hz, normalized to max 1."""

    freqs: np.ndarray
    mags: np.ndarray
    resolution: float


@dataclass(frozen=True)
class LFSpectrogram:
    """N frequency bins x M frames of per-window LF spectra."""

    matrix: np.ndarray  # (N, M)
    freqs: np.ndarray  # (N,)
    frame_times: np.ndarray  # (M,) window centers in seconds
    window_s: float

    @property
    def n_bins(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_frames(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class RFormantTracks:
    """Per-frame frequencies/magnitudes of the k highest-magnitude LF peaks.

    Row r holds the rank-(r+1) peak; entries where a frame had fewer peaks
    are padded with zeros and valid=False.
    """

    freqs: np.ndarray  # (k, M)
    mags: np.ndarray  # (k, M)
    valid: np.ndarray  # (k, M) bool


def lf_spectrum(
    env: Envelope,
    start_s: float,
    window_s: float,
    band_hz: float = 10.0,
    pad_factor: int = 4,
) -> LFSpectrum:
    """LF magnitude spectrum of one envelope window.

    The window's mean is removed (discarding the DC component robustly),
    the segment is zero-padded to pad_factor times its length, and the
    magnitudes over (0, band_hz] are scaled so the largest is 1.
    """
    if window_s <= 0:
        raise SpectrumError("window_s must be positive")
    n_win = int(round(window_s * env.rate))
    i0 = int(round(start_s * env.rate))
    if i0 < 0 or i0 + n_win > len(env.values):
        raise SpectrumError(
            f"window [{start_s}, {start_s + window_s}] s outside envelope of "
            f"{len(env.values) / env.rate} s"
        )
    seg = env.values[i0 : i0 + n_win]
    seg = seg - seg.mean()
    n_pad = pad_factor * n_win
    mags = np.abs(np.fft.rfft(seg, n_pad))
    freqs = np.fft.rfftfreq(n_pad, 1.0 / env.rate)
    keep = (freqs > 0) & (freqs <= band_hz + 1e-12)
    mags = mags[keep]
    peak = mags.max()
    if peak == 0.0:
        raise SpectrumError(f"flat window at {start_s} s (zero variance)")
    return LFSpectrum(freqs=freqs[keep], mags=mags / peak, resolution=env.rate / n_pad)


def lf_spectrogram(
    env: Envelope,
    window_s: float,
    frames: int = 50,
    band_hz: float = 10.0,
    pad_factor: int = 4,
) -> LFSpectrogram:
    """Stack frames evenly spaced LF spectra spanning the whole envelope.

    Window starts are m*(T - window_s)/(frames - 1) for m = 0..frames-1, so
    the frame count is fixed regardless of clip duration.
    """
    if frames < 2:
        raise SpectrumError(f"need at least 2 frames, got {frames}")
    total_s = env.duration_s
    if total_s <= window_s:
        raise SpectrumError(
            f"envelope of {total_s} s is not longer than the {window_s} s window"
        )
    n_win = int(round(window_s * env.rate))
    max_start = (len(env.values) - n_win) / env.rate
    step = (total_s - window_s) / (frames - 1)
    cols = []
    freqs = None
    for m in range(frames):
        start = min(m * step, max_start)
        spec = lf_spectrum(env, start, window_s, band_hz=band_hz, pad_factor=pad_factor)
        cols.append(spec.mags)
        freqs = spec.freqs
    times = np.arange(frames) * step + window_s / 2.0
    return LFSpectrogram(
        matrix=np.column_stack(cols), freqs=freqs, frame_times=times, window_s=window_s
    )


def pick_peaks(spectrum: LFSpectrum, k: int):
    """Top-k interior local maxima as (freq, mag), magnitude-descending.

    Plateaus count once at their leftmost bin; ties in magnitude are broken
    by lower frequency. Fewer than k maxima returns all found.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    mags = spectrum.mags
    freqs = spectrum.freqs
    n = len(mags)
    found = []
    i = 1
    while i < n - 1:
        if mags[i] > mags[i - 1]:
            j = i
            while j + 1 < n and mags[j + 1] == mags[i]:
                j += 1
            if j < n - 1 and mags[i] > mags[j + 1]:
                found.append((float(freqs[i]), float(mags[i])))
            i = j + 1
        else:
            i += 1
    found.sort(key=lambda p: (-p[1], p[0]))
    return found[:k]


def rformant_tracks(spec: LFSpectrogram, k: int = 6) -> RFormantTracks:
    """Rank-ordered peak trajectories; missing ranks padded invalid."""
    m = spec.n_frames
    freqs = np.zeros((k, m))
    mags = np.zeros((k, m))
    valid = np.zeros((k, m), dtype=bool)
    for col in range(m):
        column = LFSpectrum(freqs=spec.freqs, mags=spec.matrix[:, col], resolution=0.0)
        for rank, (f, mag) in enumerate(pick_peaks(column, k)):
            freqs[rank, col] = f
            mags[rank, col] = mag
            valid[rank, col] = True
    return RFormantTracks(freqs=freqs, mags=mags, valid=valid)


def write_spectrogram_tsv(spec: LFSpectrogram, path) -> None:
    """(N+1) x (M+1) TSV: header row of frame times, first column of bin freqs."""
    lines = ["freq_hz\t" + "\t".join(repr(float(t)) for t in spec.frame_times)]
    for r in range(spec.n_bins):
        row = "\t".join(repr(float(v)) for v in spec.matrix[r])
        lines.append(f"{float(spec.freqs[r])!r}\t{row}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_tracks_csv(tracks: RFormantTracks, path) -> None:
    """CSV rows frame,rank,freq_hz,mag,valid for every track cell."""
    lines = ["frame,rank,freq_hz,mag,valid"]
    k, m = tracks.freqs.shape
    for frame in range(m):
        for rank in range(k):
            lines.append(
                f"{frame},{rank + 1},{float(tracks.freqs[rank, frame])!r},"
                f"{float(tracks.mags[rank, frame])!r},"
                f"{'true' if tracks.valid[rank, frame] else 'false'}"
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
