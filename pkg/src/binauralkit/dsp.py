"""Rendering primitives: FFT convolution, constant-power panning, reverb,
and single-source binaural rendering with optional speaker-layout simulation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import interpolation
from .errors import FormatError, InvalidArgumentError
from .geometry import Direction, normalize_direction
from .interpolation import InterpolationMode, InterpolationPlan, blend, plan
from .ir_store import IRPoint, IRSet, nearest_point
from .layouts import SpeakerLayout
from .wavio import read_wav

# Maximum snap distance when a speaker direction is matched against stored
# IR points; beyond it the speaker IR is interpolated from the full set.
SPEAKER_SNAP_DEG = 2.0


@dataclass
class AudioBuffer:
    """Samples (frames,) for mono or (frames, channels) plus a sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim not in (1, 2):
            raise InvalidArgumentError(
                f"samples must be 1-D or 2-D, got shape {self.samples.shape}"
            )
        if self.samples.size == 0:
            raise InvalidArgumentError("audio buffer is empty")
        if not np.all(np.isfinite(self.samples)):
            raise InvalidArgumentError("audio buffer contains non-finite samples")
        self.sample_rate_hz = int(self.sample_rate_hz)
        if self.sample_rate_hz <= 0:
            raise InvalidArgumentError(
                f"sample rate must be positive, got {self.sample_rate_hz}"
            )

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return 1 if self.samples.ndim == 1 else self.samples.shape[1]


def load_audio(path) -> AudioBuffer:
    rate, samples = read_wav(path)
    if samples.shape[1] == 1:
        samples = samples[:, 0]
    return AudioBuffer(samples, rate)


def fft_convolve(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Full linear convolution via FFT overlap-add.

    Output length is len(x) + len(h) - 1. The FFT size is the next power of
    two at or above four times the shorter sequence, trading a little memory
    for throughput on long signals.
    """
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if x.ndim != 1 or h.ndim != 1 or len(x) == 0 or len(h) == 0:
        raise InvalidArgumentError("convolution operands must be non-empty 1-D")
    if len(h) > len(x):
        x, h = h, x
    if len(h) == 1:
        return x * h[0]
    n_out = len(x) + len(h) - 1
    nfft = 1 << max(2, (4 * len(h) - 1).bit_length())
    block = nfft - len(h) + 1
    hf = np.fft.rfft(h, nfft)
    y = np.zeros(n_out)
    for start in range(0, len(x), block):
        seg = x[start:start + block]
        yf = np.fft.irfft(np.fft.rfft(seg, nfft) * hf, nfft)
        stop = min(start + len(seg) + len(h) - 1, n_out)
        y[start:stop] += yf[:stop - start]
    return y


def convolve(signal: AudioBuffer, ir: AudioBuffer) -> AudioBuffer:
    """Convolve two mono buffers of the same sample rate."""
    if signal.sample_rate_hz != ir.sample_rate_hz:
        raise InvalidArgumentError(
            f"sample rate mismatch: signal {signal.sample_rate_hz} != "
            f"ir {ir.sample_rate_hz}"
        )
    if signal.n_channels != 1 or ir.n_channels != 1:
        raise InvalidArgumentError("convolve expects mono buffers")
    return AudioBuffer(fft_convolve(signal.samples, ir.samples), signal.sample_rate_hz)


def pan_constant_power(pan: float) -> tuple[float, float]:
    """Constant-power stereo gains for pan in [-1 (left), +1 (right)]."""
    if not math.isfinite(pan):
        raise InvalidArgumentError(f"pan must be finite, got {pan}")
    if pan < -1.0 or pan > 1.0:
        warnings.warn(f"pan {pan} outside [-1, 1]; clamping", stacklevel=2)
        pan = max(-1.0, min(1.0, pan))
    theta = (pan + 1.0) * math.pi / 4.0
    return math.cos(theta), math.sin(theta)


# ---------------------------------------------------------------------------
# reverb

REVERB_NAMES = {1: "Theatre", 2: "Office", 3: "Small Room", 4: "Meeting Room"}
_REVERB_DECAY_S = {1: 2.0, 2: 0.5, 3: 0.3, 4: 0.7}


@dataclass
class ReverbModel:
    """A mono reverb IR, energy-normalized so sum(ir**2) == 1."""

    id: int
    name: str
    sample_rate_hz: int
    ir: np.ndarray

    def __post_init__(self):
        self.ir = np.asarray(self.ir, dtype=np.float64)
        if self.ir.ndim != 1 or len(self.ir) == 0:
            raise InvalidArgumentError("reverb IR must be non-empty mono")
        energy = float(np.sum(self.ir**2))
        if energy <= 0.0 or not math.isfinite(energy):
            raise InvalidArgumentError(f"reverb IR {self.id} has no energy")
        self.ir = self.ir / math.sqrt(energy)
        self.ir.flags.writeable = False


def default_reverbs(sample_rate_hz: int) -> dict[int, ReverbModel]:
    """Synthetic stand-in reverbs: exponentially decaying seeded noise.

    Decay times: Theatre 2.0 s, Office 0.5 s, Small Room 0.3 s,
    Meeting Room 0.7 s. Deterministic per (id, sample rate).
    """
    models = {}
    for rid, name in REVERB_NAMES.items():
        decay = _REVERB_DECAY_S[rid]
        n = int(round(decay * sample_rate_hz))
        rng = np.random.default_rng(1000 + rid)
        t = np.arange(n) / sample_rate_hz
        ir = rng.standard_normal(n) * np.exp(-6.91 * t / decay)
        models[rid] = ReverbModel(rid, name, sample_rate_hz, ir)
    return models


def load_reverbs(data_root, sample_rate_hz: int) -> dict[int, ReverbModel]:
    """Reverbs from <root>/reverb/manifest.tsv when present, else defaults.

    Manifest rows are id<TAB>path with mono WAV paths relative to the
    manifest; ids must be in 1..4 (names are fixed).
    """
    mpath = Path(data_root) / "reverb" / "manifest.tsv"
    if not mpath.is_file():
        return default_reverbs(sample_rate_hz)
    models = default_reverbs(sample_rate_hz)
    for i, line in enumerate(mpath.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) < 2:
            raise FormatError(f"{mpath}:{i}: expected id<TAB>path")
        try:
            rid = int(cols[0])
        except ValueError:
            raise FormatError(f"{mpath}:{i}: bad reverb id {cols[0]!r}") from None
        if rid not in REVERB_NAMES:
            raise FormatError(f"{mpath}:{i}: reverb id must be 1..4, got {rid}")
        rate, samples = read_wav(mpath.parent / cols[1])
        if samples.shape[1] != 1:
            raise FormatError(f"{mpath}:{i}: reverb IRs must be mono")
        if rate != sample_rate_hz:
            raise FormatError(
                f"{mpath}:{i}: reverb rate {rate} != working rate {sample_rate_hz}"
            )
        models[rid] = ReverbModel(rid, REVERB_NAMES[rid], sample_rate_hz, samples[:, 0])
    return models


def apply_reverb(signal: AudioBuffer, model: ReverbModel, amount: float) -> AudioBuffer:
    """Wet/dry blend: (1 - amount) * dry + amount * (dry (*) ir).

    The dry path is zero-padded to the convolved length, so the output
    length is always len(signal) + len(ir) - 1, including at amount 0.
    """
    if signal.n_channels != 1:
        raise InvalidArgumentError("apply_reverb expects a mono buffer")
    if signal.sample_rate_hz != model.sample_rate_hz:
        raise InvalidArgumentError(
            f"sample rate mismatch: signal {signal.sample_rate_hz} != "
            f"reverb {model.sample_rate_hz}"
        )
    if not math.isfinite(amount):
        raise InvalidArgumentError(f"reverb amount must be finite, got {amount}")
    if amount < 0.0 or amount > 1.0:
        warnings.warn(f"reverb amount {amount} outside [0, 1]; clamping", stacklevel=2)
        amount = max(0.0, min(1.0, amount))
    n_out = signal.n_samples + len(model.ir) - 1
    out = np.zeros(n_out)
    out[:signal.n_samples] = (1.0 - amount) * signal.samples
    if amount > 0.0:
        out += amount * fft_convolve(signal.samples, model.ir)
    return AudioBuffer(out, signal.sample_rate_hz)


# ---------------------------------------------------------------------------
# source rendering


@dataclass
class RenderedSource:
    """A rendered stereo buffer plus the plan that produced it."""

    audio: AudioBuffer
    plan: InterpolationPlan
    # labels for plan entry indices when a layout restricted the candidates
    point_labels: tuple[str, ...] | None = None


def resolve_speaker_ir_set(
    ir_set: IRSet,
    layout: SpeakerLayout,
    mode,
    snap_threshold_deg: float = SPEAKER_SNAP_DEG,
) -> IRSet:
    """An IR set holding one IR per layout speaker, at the speaker directions.

    Each speaker direction is resolved to a stored point when one lies
    within the snap threshold; otherwise the speaker IR is interpolated
    from the full set with the requested mode.
    """
    points = []
    for d in layout.speaker_directions():
        idx, dist = nearest_point(ir_set, d)
        if dist <= snap_threshold_deg:
            src = ir_set.points[idx]
        else:
            src = blend(ir_set, plan(ir_set, d, mode, snap_threshold_deg))
        points.append(IRPoint(d, src.left, src.right))
    return IRSet(
        f"{ir_set.subject_id}:{layout.name}",
        ir_set.ir_type,
        ir_set.sample_rate_hz,
        tuple(points),
    )


def render_source_binaural(
    source: AudioBuffer,
    direction: Direction,
    ir_set: IRSet,
    mode=InterpolationMode.AUTO,
    layout: SpeakerLayout | None = None,
    snap_threshold_deg: float = interpolation.SNAP_THRESHOLD_DEG,
) -> RenderedSource:
    """Render a mono source at a direction to stereo.

    Without a layout, the IR is interpolated at the requested direction and
    the source is convolved with it. With a layout, candidates are
    restricted to the layout's speaker positions (amplitude-panning
    simulation): the plan spreads the source over up to three speakers,
    their IRs are blended, then convolved.
    """
    if source.n_channels != 1:
        raise InvalidArgumentError("render_source_binaural expects a mono source")
    if source.sample_rate_hz != ir_set.sample_rate_hz:
        raise InvalidArgumentError(
            f"sample rate mismatch: source {source.sample_rate_hz} != "
            f"IR set {ir_set.sample_rate_hz}"
        )
    direction = normalize_direction(direction.azimuth_deg, direction.elevation_deg)

    labels: tuple[str, ...] | None = None
    if layout is None:
        p = plan(ir_set, direction, mode, snap_threshold_deg)
        ir = blend(ir_set, p)
    else:
        speaker_set = resolve_speaker_ir_set(ir_set, layout, mode)
        p = plan(speaker_set, direction, mode, snap_threshold_deg)
        ir = blend(speaker_set, p)
        labels = tuple(c.label for c in layout.channels if not c.is_lfe)

    left = fft_convolve(source.samples, ir.left)
    right = fft_convolve(source.samples, ir.right)
    return RenderedSource(
        AudioBuffer(np.column_stack([left, right]), source.sample_rate_hz),
        p,
        labels,
    )
