"""PCM16 WAV loading/writing and peak normalization."""

import wave
from dataclasses import dataclass, replace

import numpy as np


class WavFormatError(ValueError):
    """Raised for WAV files this toolkit does not accept (non-PCM16, bad header, ...)."""


@dataclass(frozen=True)
class AudioClip:
    """Audio samples plus rate and corpus metadata.

    Samples are float64 in [-1, 1); loaders scale PCM16 by 1/32768.
    """

    samples: np.ndarray
    sample_rate: int
    utterance_id: str = ""
    speaker_id: str = ""
    group: str = ""

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if len(self.samples) == 0:
            raise ValueError("samples must be non-empty")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


def load_wav(path, utterance_id="", speaker_id="", group="") -> AudioClip:
    """Read a RIFF/WAVE file containing 16-bit PCM, mono or stereo.

    Stereo is downmixed by per-sample channel average. Samples are scaled to
    [-1, 1) by dividing by 32768. Anything other than PCM16 in 1 or 2
    channels is rejected with a WavFormatError naming the violation.
    """
    try:
        wf = wave.open(str(path), "rb")
    except FileNotFoundError:
        raise
    except (wave.Error, EOFError) as exc:
        raise WavFormatError(f"malformed WAV header in {path}: {exc}") from exc
    try:
        if wf.getcomptype() != "NONE":
            raise WavFormatError(
                f"unsupported codec {wf.getcomptype()!r} in {path}: only PCM accepted"
            )
        if wf.getsampwidth() != 2:
            raise WavFormatError(
                f"unsupported bit depth {8 * wf.getsampwidth()} in {path}: only 16-bit PCM accepted"
            )
        channels = wf.getnchannels()
        if channels not in (1, 2):
            raise WavFormatError(f"unsupported channel count {channels} in {path}")
        rate = wf.getframerate()
        raw = wf.readframes(wf.getnframes())
    finally:
        wf.close()

    data = np.frombuffer(raw, dtype="<i2").astype(np.float64)
    if channels == 2:
        data = data.reshape(-1, 2).mean(axis=1)
    return AudioClip(
        samples=data / 32768.0,
        sample_rate=rate,
        utterance_id=utterance_id,
        speaker_id=speaker_id,
        group=group,
    )


def write_wav(path, samples, sample_rate: int) -> None:
    """Write mono float samples as 16-bit PCM, clipping to [-1, 1)."""
    pcm = np.clip(np.round(np.asarray(samples, dtype=np.float64) * 32768.0), -32768, 32767)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(int(sample_rate))
        wf.writeframes(pcm.astype("<i2").tobytes())


def peak_normalize(clip: AudioClip) -> AudioClip:
    """Scale samples so max(|samples|) is exactly 1. Errors on all-zero input."""
    peak = np.max(np.abs(clip.samples))
    if peak == 0.0:
        raise ValueError(f"silent clip: {clip.utterance_id or '<unnamed>'} is all zeros")
    if peak == 1.0:
        return clip
    return replace(clip, samples=clip.samples / peak)
