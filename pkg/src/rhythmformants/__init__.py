"""Rhythm formant analysis toolkit.

Extracts AM/FM low-frequency rhythm spectrograms from speech audio, computes
rhythm-formant-trajectory and 2D-DCT features, and classifies utterances with
an SVM under speaker-independent cross-validation. A synthetic-modulation
generator provides ground-truth corpora for end-to-end validation.
"""

from rhythmformants.audio import AudioClip, WavFormatError, load_wav, peak_normalize, write_wav
from rhythmformants.manifest import DatasetManifest, ManifestEntry, ManifestError, load_manifest

__all__ = [
    "AudioClip",
    "WavFormatError",
    "load_wav",
    "peak_normalize",
    "write_wav",
    "DatasetManifest",
    "ManifestEntry",
    "ManifestError",
    "load_manifest",
]

__version__ = "0.1.0"
