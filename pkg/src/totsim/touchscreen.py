"""Capacitive touchscreen interference and touch injection model.

Models a mutual-capacitance sensor grid under injected alternating
electric fields.  Interference intensity lives on the same scale as
the Δ metric the controller computes per frame: max minus min of the
per-sensor deviations from a calibration baseline.  A quiet screen
sits near Δ = 20; a finger press drives Δ past 250.

Injected noise produces false ("phantom") touch points.  Without a
finger on the glass the controller needs strong interference before
it reports anything, and the points spread along lines hugging the
screen edges.  With a finger down, phantoms appear already at the
profile's minimum attack voltage and scatter uniformly along the line
through the genuine touch parallel to the device's scatter axis.

Outcome probabilities for profiled handsets are reproduced from their
measured per-touch success rates rather than derived from physics; the
generic reference display instead resolves attacks purely from scatter
geometry.  Both paths share the attempt loop: a touch attempt resolves
to the button containing the first reported point, and five unresolved
attempts in a row mean the dialog was never answered.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GRID_ROWS",
    "GRID_COLS",
    "SENSOR_COUNT",
    "QUIET_DELTA",
    "TOUCH_DELTA",
    "NO_RESPONSE_ATTEMPTS",
    "ScatterAxis",
    "AnomalyMode",
    "PhantomOutcome",
    "Relay",
    "LengthMismatchError",
    "MisalignedButtonsError",
    "OutOfScreenError",
    "SensorGrid",
    "NoiseSignal",
    "TouchProfile",
    "TouchPoint",
    "TouchReport",
    "Rect",
    "ButtonPair",
    "ElectrodeGrid",
    "REFERENCE_GRID",
    "reference_touch_profile",
    "standard_dialog",
    "delta_metric",
    "interference",
    "phantoms_active",
    "simulate_frame",
    "simulate_touch_reports",
    "phantom_attack",
    "electrical_touch",
    "frames_to_csv",
    "reports_to_csv",
]

GRID_ROWS = 12
GRID_COLS = 22
SENSOR_COUNT = GRID_ROWS * GRID_COLS  # 264

QUIET_DELTA = 20.0   # Δ of an idle, noise-free screen
TOUCH_DELTA = 250.0  # Δ exceeded when a finger touches

NO_RESPONSE_ATTEMPTS = 5  # consecutive unresolved touches counted as failure


class ScatterAxis(Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class AnomalyMode(Enum):
    NONE = "none"
    EDGE_BIAS = "edge-bias"
    MIRROR_HALF = "mirror-half"
    LAG = "lag"
    NO_RECOGNITION = "no-recognition"


class PhantomOutcome(Enum):
    WRONG_BUTTON = "wrong-button"
    INTENDED_BUTTON = "intended-button"
    NO_RESPONSE = "no-response"


class Relay(Enum):
    GROUNDED = "grounded"
    FLOATING = "floating"


class LengthMismatchError(ValueError):
    """Frame and baseline vectors differ in length."""


class MisalignedButtonsError(ValueError):
    """Button line is perpendicular to the scatter axis; phantoms miss."""


class OutOfScreenError(ValueError):
    """Mapped coordinate falls outside the screen bounds."""


@dataclass(frozen=True)
class SensorGrid:
    """Sensor matrix and reporting characteristics of one display."""

    rows: int = GRID_ROWS
    cols: int = GRID_COLS
    width_px: int = 800
    height_px: int = 480
    width_cm: float = 15.5
    height_cm: float = 8.6
    raw_sample_hz: float = 7.0
    report_hz: float = 2.0
    max_touches: int = 10

    @property
    def sensor_count(self) -> int:
        return self.rows * self.cols

    @property
    def px_per_cm(self) -> tuple[float, float]:
        return self.width_px / self.width_cm, self.height_px / self.height_cm


REFERENCE_GRID = SensorGrid()


@dataclass(frozen=True)
class NoiseSignal:
    """Injected alternating field: frequency in kHz, amplitude in Vpp."""

    frequency_khz: float
    amplitude_vpp: float

    def __post_init__(self) -> None:
        if self.frequency_khz <= 0:
            raise ValueError("frequency must be positive")
        if self.amplitude_vpp < 0:
            raise ValueError("amplitude cannot be negative")

    @classmethod
    def off(cls) -> "NoiseSignal":
        return cls(frequency_khz=1.0, amplitude_vpp=0.0)


@dataclass(frozen=True)
class TouchProfile:
    """How one display reacts to injected noise.

    `success_rate` set: per-attempt probability that the attack flips
    the press to the wrong button once the signal reaches the profile's
    operating point (measured rates for the profiled handsets).
    `success_rate` None: outcomes are resolved from scatter geometry
    instead (the reference display).

    `gain_delta_per_vpp` left as None auto-calibrates so that the
    interference at (char-frequency, min-voltage) lands at Δ = 480,
    comfortably past both phantom thresholds.
    """

    susceptible: bool
    char_frequency_khz: float | None = None
    min_voltage_vpp: float | None = None
    scatter_axis: ScatterAxis = ScatterAxis.HORIZONTAL
    success_rate: float | None = None
    anomaly: AnomalyMode = AnomalyMode.NONE
    trials: int | None = None
    phantom_threshold: float = TOUCH_DELTA
    peak_width_khz: float = 10.0
    gain_delta_per_vpp: float | None = None

    def __post_init__(self) -> None:
        if self.susceptible:
            if self.char_frequency_khz is None or self.min_voltage_vpp is None:
                raise ValueError(
                    "susceptible profile needs char_frequency_khz and min_voltage_vpp"
                )
        elif self.success_rate not in (None, 0.0):
            raise ValueError("non-susceptible profile must have success rate 0")
        if self.success_rate is not None and not 0.0 <= self.success_rate <= 1.0:
            raise ValueError("success_rate must be within [0, 1]")

    @property
    def gain(self) -> float:
        """Δ gained per Vpp at the characteristic frequency."""
        if self.gain_delta_per_vpp is not None:
            return self.gain_delta_per_vpp
        if self.min_voltage_vpp is None:
            return 0.0
        return 2.0 * (TOUCH_DELTA - QUIET_DELTA) / self.min_voltage_vpp

    @property
    def operating_delta(self) -> float:
        """Interference at (char-frequency, min-voltage): the level at
        which phantoms appear alongside a genuine touch."""
        if not self.susceptible or self.min_voltage_vpp is None:
            return float("inf")
        return QUIET_DELTA + self.gain * self.min_voltage_vpp


def reference_touch_profile() -> TouchProfile:
    """The bench display: 90 kHz peak, phantoms with a touch from
    20 Vpp, without one only past 250-Δ interference (about 46 Vpp)."""
    return TouchProfile(
        susceptible=True,
        char_frequency_khz=90.0,
        min_voltage_vpp=20.0,
        scatter_axis=ScatterAxis.HORIZONTAL,
        success_rate=None,
        gain_delta_per_vpp=5.0,
    )


@dataclass(frozen=True)
class TouchPoint:
    x: float
    y: float
    genuine: bool = True


@dataclass(frozen=True)
class TouchReport:
    """One controller report: up to max_touches points at a tick."""

    tick: int
    points: tuple[TouchPoint, ...]


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in pixels, half-open on max edges."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError("rect must have positive extent")

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    @property
    def center(self) -> tuple[float, float]:
        return (self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0


@dataclass(frozen=True)
class ButtonPair:
    """Two dialog buttons; `intended` is the one the victim aims for."""

    intended: Rect
    wrong: Rect

    def axis(self) -> ScatterAxis:
        """Axis of the line the button centers share.

        Raises MisalignedButtonsError for diagonal layouts.
        """
        ix, iy = self.intended.center
        wx, wy = self.wrong.center
        if abs(iy - wy) < 1e-9:
            return ScatterAxis.HORIZONTAL
        if abs(ix - wx) < 1e-9:
            return ScatterAxis.VERTICAL
        raise MisalignedButtonsError("buttons do not share a row or column")


def standard_dialog(
    axis: ScatterAxis, grid: SensorGrid = REFERENCE_GRID
) -> ButtonPair:
    """Equal-width confirmation buttons laid out along `axis`, with the
    deny button as the intended target (matching an attack trial)."""
    w, h = grid.width_px, grid.height_px
    if axis is ScatterAxis.HORIZONTAL:
        y0, y1 = h * 0.44, h * 0.56
        return ButtonPair(
            intended=Rect(w * 0.30, y0, w * 0.45, y1),
            wrong=Rect(w * 0.55, y0, w * 0.70, y1),
        )
    x0, x1 = w * 0.42, w * 0.58
    return ButtonPair(
        intended=Rect(x0, h * 0.19, x1, h * 0.44),
        wrong=Rect(x0, h * 0.56, x1, h * 0.81),
    )


def delta_metric(frame: Sequence[float], baseline: Sequence[float]) -> float:
    """Δ = max_i(x_i − x̄_i) − min_i(x_i − x̄_i); always ≥ 0."""
    frame_arr = np.asarray(frame, dtype=np.float64)
    base_arr = np.asarray(baseline, dtype=np.float64)
    if frame_arr.shape != base_arr.shape or frame_arr.ndim != 1:
        raise LengthMismatchError(
            f"frame has {frame_arr.shape} values, baseline {base_arr.shape}"
        )
    deviations = frame_arr - base_arr
    return float(deviations.max() - deviations.min())


def _lorentzian(frequency_khz: float, center_khz: float, fwhm_khz: float) -> float:
    half = fwhm_khz / 2.0
    return half * half / ((frequency_khz - center_khz) ** 2 + half * half)


def interference(profile: TouchProfile, signal: NoiseSignal) -> float:
    """Interference intensity on the Δ scale.

    Unimodal in frequency (peak at the characteristic frequency,
    Lorentzian with the profile's width), linear in amplitude, and
    pinned to the quiet Δ for inert displays or a silent signal.
    """
    if not profile.susceptible or profile.char_frequency_khz is None:
        return QUIET_DELTA
    shape = _lorentzian(
        signal.frequency_khz, profile.char_frequency_khz, profile.peak_width_khz
    )
    return QUIET_DELTA + profile.gain * signal.amplitude_vpp * shape


def phantoms_active(
    profile: TouchProfile, signal: NoiseSignal, touched: bool
) -> bool:
    """Whether injected noise currently produces phantom points.

    With a finger down the bar is the profile's operating level
    (amplitude ≥ min-voltage at the characteristic frequency); without
    one the controller only fires past `phantom_threshold`.
    """
    if not profile.susceptible:
        return False
    level = interference(profile, signal)
    threshold = profile.operating_delta if touched else profile.phantom_threshold
    return level >= threshold


def simulate_frame(
    rng: np.random.Generator,
    grid: SensorGrid = REFERENCE_GRID,
    baseline: np.ndarray | None = None,
    profile: TouchProfile | None = None,
    signal: NoiseSignal | None = None,
    touched: bool = False,
) -> np.ndarray:
    """One raw capacitance frame.

    Sensor noise is sized so an idle frame's Δ sits near the quiet
    level; a touch adds a sharp local bump; injected noise adds a spike
    matching the interference intensity.
    """
    n = grid.sensor_count
    if baseline is None:
        baseline = np.full(n, 3000.0)
    frame = baseline + rng.normal(0.0, 3.6, n)
    if touched:
        idx = int(rng.integers(n))
        frame[idx] += 320.0
        frame[(idx + 1) % n] += 160.0
    if profile is not None and signal is not None:
        extra = interference(profile, signal) - QUIET_DELTA
        if extra > 0:
            idx = int(rng.integers(n))
            frame[idx] += extra
    return frame


def _edge_heavy(extent: float, rng: np.random.Generator) -> float:
    # 70% of no-touch scatter lines hug the screen edges
    r = rng.random()
    if r < 0.35:
        return rng.random() * 0.05 * extent
    if r < 0.70:
        return extent - rng.random() * 0.05 * extent
    return rng.random() * extent


def _edge_bias_region(grid: SensorGrid) -> Rect:
    # fixed off-button strip along the top of the screen
    return Rect(0.0, 0.0, float(grid.width_px), 0.08 * grid.height_px)


def _phantom_point(
    profile: TouchProfile,
    grid: SensorGrid,
    rng: np.random.Generator,
    touch: tuple[float, float] | None,
) -> TouchPoint:
    w, h = float(grid.width_px), float(grid.height_px)
    if profile.anomaly is AnomalyMode.EDGE_BIAS:
        region = _edge_bias_region(grid)
        x = region.x0 + rng.random() * (region.x1 - region.x0)
        y = region.y0 + rng.random() * (region.y1 - region.y0)
        return TouchPoint(x, y, genuine=False)
    if profile.scatter_axis is ScatterAxis.HORIZONTAL:
        y = touch[1] if touch is not None else _edge_heavy(h, rng)
        x = rng.random() * w
    else:
        x = touch[0] if touch is not None else _edge_heavy(w, rng)
        y = rng.random() * h
    if profile.anomaly is AnomalyMode.MIRROR_HALF:
        # along-axis coordinate reflected across the screen midline;
        # modulo keeps the fold inside the half-open pixel range
        if profile.scatter_axis is ScatterAxis.HORIZONTAL:
            x = (w - x) % w
        else:
            y = (h - y) % h
    return TouchPoint(x, y, genuine=False)


def simulate_touch_reports(
    profile: TouchProfile,
    signal: NoiseSignal,
    true_touch: tuple[float, float] | None,
    duration_ticks: int,
    rng: np.random.Generator,
    grid: SensorGrid = REFERENCE_GRID,
) -> list[TouchReport]:
    """Reported touch points over `duration_ticks` report slots.

    The genuine touch (if any) is reported first in each slot, phantom
    points after it.  Lag and no-recognition anomalies suppress all
    reporting while the noise signal is live.
    """
    if true_touch is not None:
        tx, ty = float(true_touch[0]), float(true_touch[1])
        if not (0 <= tx < grid.width_px and 0 <= ty < grid.height_px):
            raise OutOfScreenError(f"touch ({tx}, {ty}) outside the screen")
        touch: tuple[float, float] | None = (tx, ty)
    else:
        touch = None

    signal_live = signal.amplitude_vpp > 0
    suppressed = signal_live and profile.anomaly in (
        AnomalyMode.LAG,
        AnomalyMode.NO_RECOGNITION,
    )
    active = phantoms_active(profile, signal, touched=touch is not None)

    reports = []
    for tick in range(duration_ticks):
        points: list[TouchPoint] = []
        if not suppressed:
            if touch is not None:
                points.append(TouchPoint(touch[0], touch[1], genuine=True))
            if active:
                capacity = grid.max_touches - len(points)
                ratio = (
                    signal.amplitude_vpp / profile.min_voltage_vpp
                    if profile.min_voltage_vpp
                    else 1.0
                )
                extra = int(rng.binomial(capacity - 1, min(0.9, 0.3 * ratio)))
                for _ in range(1 + extra):
                    points.append(_phantom_point(profile, grid, rng, touch))
        reports.append(TouchReport(tick=tick, points=tuple(points)))
    return reports


def _line_point(
    profile: TouchProfile,
    grid: SensorGrid,
    rng: np.random.Generator,
    touch: tuple[float, float],
) -> tuple[float, float]:
    """Uniform draw along the scatter line through `touch`."""
    w, h = float(grid.width_px), float(grid.height_px)
    if profile.scatter_axis is ScatterAxis.HORIZONTAL:
        x, y = rng.random() * w, touch[1]
        if profile.anomaly is AnomalyMode.MIRROR_HALF:
            x = (w - x) % w
        return x, y
    x, y = touch[0], rng.random() * h
    if profile.anomaly is AnomalyMode.MIRROR_HALF:
        y = (h - y) % h
    return x, y


def phantom_attack(
    profile: TouchProfile,
    signal: NoiseSignal,
    buttons: ButtonPair,
    rng: np.random.Generator,
    grid: SensorGrid = REFERENCE_GRID,
    max_attempts: int = NO_RESPONSE_ATTEMPTS,
) -> PhantomOutcome:
    """Resolve one dialog under injected noise.

    The victim aims at `buttons.intended`.  Each attempt resolves to
    the button containing the first reported point, if either contains
    it; `max_attempts` consecutive unresolved attempts count as no
    response.  The button line must run along the profile's scatter
    axis; the caller is responsible for orienting the screen that way.
    """
    if buttons.axis() is not profile.scatter_axis:
        raise MisalignedButtonsError(
            "button line is perpendicular to the scatter axis"
        )
    signal_live = signal.amplitude_vpp > 0
    if not profile.susceptible:
        if profile.anomaly is AnomalyMode.LAG and signal_live:
            return PhantomOutcome.NO_RESPONSE
        return PhantomOutcome.INTENDED_BUTTON
    if not phantoms_active(profile, signal, touched=True):
        return PhantomOutcome.INTENDED_BUTTON
    if profile.anomaly is AnomalyMode.LAG:
        return PhantomOutcome.NO_RESPONSE
    if profile.anomaly is AnomalyMode.NO_RECOGNITION:
        return PhantomOutcome.INTENDED_BUTTON
    if profile.anomaly is AnomalyMode.EDGE_BIAS:
        # every attempt's first point lands in the bias strip, off the
        # buttons, so the dialog is never answered
        return PhantomOutcome.NO_RESPONSE

    if profile.success_rate is not None:
        # measured-rate path: the wrong button wins with probability p
        # per attempt; otherwise the genuine press lands as aimed
        if rng.random() < profile.success_rate:
            return PhantomOutcome.WRONG_BUTTON
        return PhantomOutcome.INTENDED_BUTTON

    # geometric path: the first reported point of each attempt is a
    # phantom drawn uniformly along the line through the press
    touch = buttons.intended.center
    for _ in range(max_attempts):
        x, y = _line_point(profile, grid, rng, touch)
        if buttons.wrong.contains(x, y):
            return PhantomOutcome.WRONG_BUTTON
        if buttons.intended.contains(x, y):
            return PhantomOutcome.INTENDED_BUTTON
    return PhantomOutcome.NO_RESPONSE


@dataclass(frozen=True)
class ElectrodeGrid:
    """Plate electrode array pressed against a screen-down device.

    Electrodes are square plates (plate_cm per side) separated by
    gap_cm, so centers sit pitch = plate + gap apart.  `offset_cm`
    places electrode (0, 0)'s corner relative to the screen origin.
    """

    rows: int
    cols: int
    plate_cm: float = 1.0
    gap_cm: float = 0.5
    offset_cm: tuple[float, float] = (0.0, 0.0)

    @property
    def pitch_cm(self) -> float:
        return self.plate_cm + self.gap_cm

    def center_cm(self, row: int, col: int) -> tuple[float, float]:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise IndexError(f"electrode ({row}, {col}) outside the array")
        half = self.plate_cm / 2.0
        return (
            self.offset_cm[0] + col * self.pitch_cm + half,
            self.offset_cm[1] + row * self.pitch_cm + half,
        )


def electrical_touch(
    electrodes: ElectrodeGrid,
    electrode: tuple[int, int],
    relay: Relay,
    grid: SensorGrid = REFERENCE_GRID,
    controller_front: bool = True,
) -> TouchPoint | None:
    """Inject a touch by grounding one plate electrode.

    Works only against devices whose NFC controller sits on the front
    (screen) side; a floating relay leaves the circuit open and no
    touch registers.  Grounding produces a touch at the screen pixel
    under the electrode center.
    """
    if not controller_front:
        raise ValueError("electrical touch needs a front-side NFC controller")
    if relay is Relay.FLOATING:
        return None
    row, col = electrode
    cx_cm, cy_cm = electrodes.center_cm(row, col)
    sx, sy = grid.px_per_cm
    x, y = cx_cm * sx, cy_cm * sy
    if not (0 <= x < grid.width_px and 0 <= y < grid.height_px):
        raise OutOfScreenError(
            f"electrode ({row}, {col}) maps to ({x:.1f}, {y:.1f}) px, off screen"
        )
    return TouchPoint(x, y, genuine=False)


def frames_to_csv(frames: Iterable[Sequence[float]]) -> str:
    """CSV trace: tick plus one column per sensor."""
    buf = io.StringIO()
    frames = list(frames)
    if frames:
        width = len(frames[0])
        buf.write("tick," + ",".join(f"s{i}" for i in range(width)) + "\n")
        for tick, frame in enumerate(frames):
            buf.write(str(tick) + "," + ",".join(repr(float(v)) for v in frame) + "\n")
    return buf.getvalue()


def reports_to_csv(reports: Iterable[TouchReport]) -> str:
    """CSV trace: tick, point index, x, y, genuine flag."""
    buf = io.StringIO()
    buf.write("tick,point_index,x,y,genuine\n")
    for report in reports:
        for i, pt in enumerate(report.points):
            buf.write(f"{report.tick},{i},{pt.x!r},{pt.y!r},{int(pt.genuine)}\n")
    return buf.getvalue()
