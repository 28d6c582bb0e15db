import numpy as np
import pytest

from binauralkit.ir_store import save_ir_set, synthesize_ir_set
from binauralkit.wavio import write_wav


@pytest.fixture(scope="session")
def lebedev_set():
    return synthesize_ir_set("lebedev50", 48000, 128, seed=7)


@pytest.fixture(scope="session")
def ring_set():
    return synthesize_ir_set(
        "ring_az_step",
        48000,
        128,
        seed=9,
        step_deg=15.0,
        elevations=[-75, -50, -25, 0, 25, 50, 75],
        subject_id="RING15",
    )


@pytest.fixture(scope="session")
def speaker_set():
    # 5 degree ring at elevations 0 and 45 covers every layout speaker
    # angle exactly, so same-layout surround renders resolve discretely
    return synthesize_ir_set(
        "ring_az_step",
        48000,
        96,
        seed=5,
        step_deg=5.0,
        elevations=[0.0, 45.0],
        subject_id="RING5",
    )


@pytest.fixture(scope="session")
def data_root(tmp_path_factory, lebedev_set, speaker_set):
    root = tmp_path_factory.mktemp("irdata")
    save_ir_set(lebedev_set, root)
    save_ir_set(speaker_set, root)
    return root


@pytest.fixture(scope="session")
def noise_wav(tmp_path_factory):
    path = tmp_path_factory.mktemp("sources") / "noise.wav"
    rng = np.random.default_rng(33)
    write_wav(path, 48000, 0.25 * rng.standard_normal(4800), "float32")
    return path
