"""Multi-track binaural/stereo mixing and surround-program rendering."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dsp import (
    AudioBuffer,
    REVERB_NAMES,
    ReverbModel,
    apply_reverb,
    default_reverbs,
    fft_convolve,
    pan_constant_power,
    render_source_binaural,
)
from .errors import FormatError, InvalidArgumentError, NotFoundError
from .geometry import Direction, normalize_direction
from .interpolation import InterpolationMode, InterpolationPlan
from .ir_store import IRSet, IRType, nearest_point
from .layouts import get_layout

_LFE_GAIN = 2.0 ** -0.5  # diotic LFE feed, -3 dB into each ear

NORMALIZE_MODES = ("off", "peak")


def _clamp01(value: float, what: str, track: str) -> float:
    if not (0.0 <= value <= 1.0):
        warnings.warn(
            f"track {track!r}: {what} {value} outside [0, 1]; clamping",
            stacklevel=3,
        )
        value = max(0.0, min(1.0, value))
    return float(value)


@dataclass
class TrackObject:
    """One mono source with placement and per-track processing amounts."""

    name: str
    audio: AudioBuffer
    level: float = 1.0
    reverb: float = 0.0
    azimuth_deg: float = 0.0
    elevation_deg: float = 0.0

    def __post_init__(self):
        if self.audio.n_channels != 1:
            raise InvalidArgumentError(f"track {self.name!r}: audio must be mono")
        self.level = _clamp01(self.level, "level", self.name)
        self.reverb = _clamp01(self.reverb, "reverb", self.name)

    @property
    def direction(self) -> Direction:
        return normalize_direction(self.azimuth_deg, self.elevation_deg)


@dataclass
class MixConfig:
    """Shared mix settings; azimuth/elevation live on the tracks."""

    subject_id: str
    sample_rate_hz: int
    ir_type: IRType = IRType.HRIR
    speaker_layout: str | None = None
    interpolation_mode: InterpolationMode = InterpolationMode.AUTO
    reverb_type: int = 1
    keep_tail: bool = True
    normalize: str = "off"

    def __post_init__(self):
        self.sample_rate_hz = int(self.sample_rate_hz)
        self.ir_type = IRType.parse(self.ir_type)
        self.interpolation_mode = InterpolationMode.parse(self.interpolation_mode)
        self.reverb_type = int(self.reverb_type)
        if self.reverb_type not in REVERB_NAMES:
            raise InvalidArgumentError(
                f"reverb_type must be one of {sorted(REVERB_NAMES)}, "
                f"got {self.reverb_type}"
            )
        if self.normalize not in NORMALIZE_MODES:
            raise InvalidArgumentError(
                f"normalize must be one of {NORMALIZE_MODES}, got {self.normalize!r}"
            )
        if self.speaker_layout is not None:
            get_layout(self.speaker_layout)  # validate the name early


@dataclass(frozen=True)
class MixResult:
    """A rendered stereo program plus bookkeeping for manifests and logs.

    peak_level/clipped describe the returned audio; with normalize="peak"
    the peak is 1 and clipped is False even if the raw sum exceeded 1.
    """

    audio: AudioBuffer
    peak_level: float
    clipped: bool
    track_plans: tuple[tuple[str, InterpolationPlan], ...] = field(default=())


def _check_ir_set(cfg: MixConfig, ir_set: IRSet):
    if (
        ir_set.subject_id != cfg.subject_id
        or ir_set.ir_type != cfg.ir_type
        or ir_set.sample_rate_hz != cfg.sample_rate_hz
    ):
        raise InvalidArgumentError(
            "IR set does not match config: set is "
            f"({ir_set.subject_id}, {ir_set.ir_type.value}, {ir_set.sample_rate_hz}), "
            f"config wants ({cfg.subject_id}, {cfg.ir_type.value}, "
            f"{cfg.sample_rate_hz})"
        )


def _track_source(track: TrackObject, cfg: MixConfig, reverbs) -> AudioBuffer:
    """Level gain then reverb. Reverb at amount 0 is skipped entirely so
    dry tracks keep their natural length (no silent multi-second tails)."""
    if track.audio.sample_rate_hz != cfg.sample_rate_hz:
        raise InvalidArgumentError(
            f"track {track.name!r}: sample rate {track.audio.sample_rate_hz} "
            f"!= config rate {cfg.sample_rate_hz}"
        )
    sig = AudioBuffer(track.audio.samples * track.level, cfg.sample_rate_hz)
    if track.reverb > 0.0:
        sig = apply_reverb(sig, reverbs[cfg.reverb_type], track.reverb)
    return sig


def _sum_stereo(
    rendered: list[np.ndarray],
    input_lengths: list[int],
    keep_tail: bool,
) -> np.ndarray:
    """Sum stereo arrays aligned at sample 0, in list order."""
    target = max(len(r) for r in rendered)
    if not keep_tail:
        target = min(target, max(input_lengths))
    out = np.zeros((target, 2))
    for r in rendered:
        n = min(len(r), target)
        out[:n] += r[:n]
    return out


def _finalize(out: np.ndarray, cfg: MixConfig, plans) -> MixResult:
    peak = float(np.max(np.abs(out))) if out.size else 0.0
    clipped = peak > 1.0
    if cfg.normalize == "peak" and peak > 0.0:
        out = out / peak
        peak, clipped = 1.0, False
    elif clipped:
        warnings.warn(
            f"mix peak {peak:.4f} exceeds 1.0; output left unclamped",
            stacklevel=3,
        )
    return MixResult(AudioBuffer(out, cfg.sample_rate_hz), peak, clipped, tuple(plans))


def mix_tracks_binaural(
    tracks,
    cfg: MixConfig,
    ir_set: IRSet,
    reverbs: dict[int, ReverbModel] | None = None,
) -> MixResult:
    """Render each track at its direction and sum to one stereo program.

    Per track: level gain, reverb, then binaural render (free-field when
    cfg.speaker_layout is None, otherwise amplitude-panned over that
    layout's speakers). Tracks are summed aligned at sample 0 in order.
    keep_tail=False trims the output to the longest input track.
    """
    tracks = list(tracks)
    if not tracks:
        raise InvalidArgumentError("mix_tracks_binaural needs at least one track")
    _check_ir_set(cfg, ir_set)
    if reverbs is None:
        reverbs = default_reverbs(cfg.sample_rate_hz)
    layout = None
    if cfg.speaker_layout is not None:
        layout = get_layout(cfg.speaker_layout)

    rendered, plans, input_lengths = [], [], []
    for track in tracks:
        sig = _track_source(track, cfg, reverbs)
        r = render_source_binaural(
            sig, track.direction, ir_set, cfg.interpolation_mode, layout
        )
        rendered.append(r.audio.samples)
        plans.append((track.name, r.plan))
        input_lengths.append(track.audio.n_samples)

    out = _sum_stereo(rendered, input_lengths, cfg.keep_tail)
    return _finalize(out, cfg, plans)


def mix_tracks_stereo(
    tracks,
    pan_map: dict[str, float],
    cfg: MixConfig,
    reverbs: dict[int, ReverbModel] | None = None,
) -> MixResult:
    """Constant-power stereo mix; pan_map maps track name to pan in [-1, 1].

    Track directions are ignored; level and reverb apply as in the
    binaural mixer.
    """
    tracks = list(tracks)
    if not tracks:
        raise InvalidArgumentError("mix_tracks_stereo needs at least one track")
    missing = [t.name for t in tracks if t.name not in pan_map]
    if missing:
        raise InvalidArgumentError(f"pan_map missing tracks: {', '.join(missing)}")
    if reverbs is None:
        reverbs = default_reverbs(cfg.sample_rate_hz)

    rendered, input_lengths = [], []
    for track in tracks:
        sig = _track_source(track, cfg, reverbs)
        gl, gr = pan_constant_power(pan_map[track.name])
        rendered.append(np.column_stack([sig.samples * gl, sig.samples * gr]))
        input_lengths.append(track.audio.n_samples)

    out = _sum_stereo(rendered, input_lengths, cfg.keep_tail)
    return _finalize(out, cfg, plans=[])


def render_surround_to_binaural(
    program: AudioBuffer,
    input_layout: str,
    output_layout: str,
    cfg: MixConfig,
    ir_set: IRSet,
) -> MixResult:
    """Render a channel-encoded surround program to binaural stereo.

    Same input and output layout: every non-LFE channel is convolved with
    the IR at its exact speaker direction, using stored points only (snapped
    within 2 degrees; farther is an error, surfacing coverage gaps).
    Different layouts: each input channel becomes a source at its
    input-layout direction, rendered over the output layout's speakers.
    LFE channels feed both ears equally at -3 dB with no spatialization.
    """
    _check_ir_set(cfg, ir_set)
    in_l = get_layout(input_layout)
    out_l = get_layout(output_layout)
    if program.sample_rate_hz != cfg.sample_rate_hz:
        raise InvalidArgumentError(
            f"program sample rate {program.sample_rate_hz} != "
            f"config rate {cfg.sample_rate_hz}"
        )
    if program.n_channels != in_l.channel_count:
        raise FormatError(
            f"channel count mismatch for layout {in_l.name}: "
            f"expected {in_l.channel_count}, got {program.n_channels}"
        )
    samples = program.samples
    if samples.ndim == 1:
        samples = samples[:, None]

    same = in_l.name == out_l.name
    rendered, plans = [], []
    for i, channel in enumerate(in_l.channels):
        chan = samples[:, i]
        if channel.is_lfe:
            feed = chan * _LFE_GAIN
            rendered.append(np.column_stack([feed, feed]))
            continue
        if same:
            idx, dist = nearest_point(ir_set, channel.direction)
            if dist > 2.0:
                d = channel.direction
                raise NotFoundError(
                    f"no stored IR within 2 degrees of speaker {channel.label} at "
                    f"({d.azimuth_deg:g}, {d.elevation_deg:g}); nearest is "
                    f"{dist:.2f} degrees away"
                )
            point = ir_set.points[idx]
            rendered.append(
                np.column_stack(
                    [fft_convolve(chan, point.left), fft_convolve(chan, point.right)]
                )
            )
        else:
            r = render_source_binaural(
                AudioBuffer(chan, cfg.sample_rate_hz),
                channel.direction,
                ir_set,
                cfg.interpolation_mode,
                out_l,
            )
            rendered.append(r.audio.samples)
            plans.append((channel.label, r.plan))

    out = _sum_stereo(rendered, [program.n_samples], cfg.keep_tail)
    return _finalize(out, cfg, plans)
