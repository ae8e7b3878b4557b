import numpy as np
import pytest

from rhythmformants.audio import AudioClip
from rhythmformants.synth import SynthSpec, synth_am, synth_fm

SR = 16000


@pytest.fixture(scope="session")
def am_clip_2p5hz():
    """12 s carrier at 220 Hz with a single 2.5 Hz / depth-0.5 AM component."""
    return synth_am(SynthSpec(kind="AM", carrier_hz=220.0, mod=((2.5, 0.5),),
                              duration_s=12.0, sample_rate=SR))


@pytest.fixture(scope="session")
def fm_clip_3hz():
    """12 s 10-harmonic tone, f0 = 150 Hz modulated at 3 Hz (depth 2/15 -> 20 Hz swing)."""
    return synth_fm(SynthSpec(kind="FM", f0_base_hz=150.0, mod=((3.0, 2.0 / 15.0),),
                              duration_s=12.0, sample_rate=SR))


@pytest.fixture(scope="session")
def chirp_clip_2to6hz():
    """12 s AM chirp whose modulation frequency sweeps 2 -> 6 Hz."""
    return synth_am(SynthSpec(kind="CHIRP", carrier_hz=220.0, chirp=(2.0, 6.0),
                              mod=((2.0, 0.5),), duration_s=12.0, sample_rate=SR))


def tone_clip(freq=220.0, duration_s=2.0, sr=SR, amp=1.0, uid="tone"):
    t = np.arange(int(duration_s * sr)) / sr
    return AudioClip(samples=amp * np.sin(2 * np.pi * freq * t), sample_rate=sr,
                     utterance_id=uid)
