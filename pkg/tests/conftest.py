import numpy as np
import pytest

from ldhsvd.synth import ClutterBurst, Jitter, SynthScene, Vessel, generate_stack

FS = 60e3

_REPORT = []


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def report():
    """Record one PASS/FAIL line per acceptance check, then assert it."""

    def check(label, ok, detail=""):
        _REPORT.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return check


@pytest.fixture
def rng():
    return np.random.default_rng(20201016)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


VESSELS = (
    Vessel(20, 20, 6, 8000.0),
    Vessel(44, 30, 4, 8000.0),
    Vessel(30, 48, 5, 8000.0),
    Vessel(50, 52, 3, 8000.0),
)
BURST_STARTS = (128, 896, 1664)
BACKGROUND = dict(background=1.0, background_width_hz=1000.0)
BURST_LENGTH = 384


def reference_scene(seed=1, bursts=True, **overrides):
    """64x64x2048 at 60 kHz: four 8 kHz-wide vessels, rank-one 3 kHz bursts
    with burst-free gaps, and a background that decorrelates over about
    1 kHz (diffuse slow flow) so the pooled temporal spectrum falls off
    monotonically with |f|."""
    params = dict(
        nx=64, ny=64, nt_total=2048, fs=FS,
        vessels=VESSELS,
        bursts=tuple(ClutterBurst(s, BURST_LENGTH, 3000.0, 2.0, "speckle") for s in BURST_STARTS)
        if bursts else (),
        seed=seed, **BACKGROUND,
    )
    params.update(overrides)
    return SynthScene(**params)


PULSE_PERIOD = 1024


def pulsatile_scene(seed=5):
    """48x48x4096: a vessel pulsing every 1024 frames, bursts on each pulse peak."""
    nt = 4096
    vessels = (
        Vessel(24, 24, 8, 8000.0, 1.0, FS / PULSE_PERIOD, 0.6, 0.0),
        Vessel(10, 38, 4, 8000.0),
    )
    bursts = []
    for peak in range(0, nt, PULSE_PERIOD):
        lo, hi = max(peak - 160, 0), min(peak + 160, nt)
        bursts.append(ClutterBurst(lo, hi - lo, 3000.0, 2.0, "speckle"))
    return SynthScene(48, 48, nt, FS, vessels=vessels, bursts=tuple(bursts),
                      seed=seed, **BACKGROUND)


def jitter_scene(seed=7):
    return SynthScene(
        64, 64, 2048, FS,
        vessels=VESSELS[:3],
        jitter=Jitter(46, 46, 4.0, 3.0, 6000.0),
        seed=seed, **BACKGROUND,
    )


@pytest.fixture(scope="session")
def reference():
    return generate_stack(reference_scene())


@pytest.fixture(scope="session")
def clutter_free():
    return generate_stack(reference_scene(bursts=False))


@pytest.fixture(scope="session")
def pulsatile():
    return generate_stack(pulsatile_scene())


@pytest.fixture(scope="session")
def jittery():
    return generate_stack(jitter_scene())
