"""Victim-side device model: profiles, tag dispatch, user approval.

An Android handset reads a tag only when NFC is on, the screen is
unlocked and awake, and the tag sits within the device's maximum
read distance.  What happens next depends on the tag content: URLs,
app launches, and intents execute without asking; joining a Wi-Fi
network, pairing Bluetooth, or composing email first show a
confirmation dialog rendered from the device vendor's template.

The approve-all defense policy routes every operation through a
confirmation dialog that states the requested operation explicitly,
so even plain URL tags stop auto-executing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Union

import numpy as np

from .datafiles import load_json
from .deception import DialogRender, MessageTemplate, load_templates, render_dialog, visual_order
from .ndef import (
    AndroidApp,
    BtSsp,
    Email,
    Intent,
    TagContent,
    Text,
    UnknownType,
    Uri,
    WiFiConfig,
)
from .touchscreen import AnomalyMode, ScatterAxis, TouchProfile

__all__ = [
    "Orientation",
    "ControllerSide",
    "DefensePolicy",
    "IgnoreReason",
    "Decision",
    "DecisionContext",
    "NoTemplateError",
    "UnknownDeviceError",
    "DeviceProfile",
    "ScreenState",
    "AutoExecuted",
    "ApprovalRequested",
    "Ignored",
    "DispatchOutcome",
    "UserModel",
    "FingerprintInfo",
    "load_devices",
    "read_gate",
    "can_read",
    "dispatch",
    "user_decision",
    "fingerprint",
]


class Orientation(Enum):
    PORTRAIT = "portrait"
    LANDSCAPE = "landscape"


class ControllerSide(Enum):
    FRONT = "front"
    REAR = "rear"


class DefensePolicy(Enum):
    OFF = "off"
    APPROVE_ALL = "approve-all"


class IgnoreReason(Enum):
    LOCKED = "locked"
    ASLEEP = "asleep"
    NFC_DISABLED = "nfc-disabled"
    OUT_OF_RANGE = "out-of-range"
    UNKNOWN_TYPE = "unknown-type"


class Decision(Enum):
    APPROVE = "approve"
    DENY = "deny"


class DecisionContext(Enum):
    """Which approval probability applies to a dialog."""

    BASELINE = "baseline"
    DECEPTIVE = "deceptive"


class NoTemplateError(LookupError):
    """The device has no dialog template for this message family."""

    def __init__(self, model: str, family: str):
        super().__init__(f"{model} has no {family} message template")
        self.model = model
        self.family = family


class UnknownDeviceError(LookupError):
    """Requested model is not in the device dataset."""

    def __init__(self, model: str):
        super().__init__(f"unknown device model: {model!r}")
        self.model = model


@dataclass(frozen=True)
class DeviceProfile:
    """Static facts about one handset model."""

    model: str
    manufacturer: str
    android_version: str
    max_read_distance_cm: float
    nfc_factory_enabled: bool
    wifi_msg_type: str | None
    bt_msg_type: str
    nfc_controller_side: ControllerSide = ControllerSide.REAR
    touch_profile: TouchProfile | None = None


@dataclass
class ScreenState:
    """Mutable display state during an encounter."""

    locked: bool = False
    asleep: bool = False
    orientation: Orientation = Orientation.PORTRAIT
    foreground_app: str | None = None
    dimmed: bool = False


@dataclass(frozen=True)
class AutoExecuted:
    """The operation ran without asking the user."""

    action: str
    detail: str = ""


@dataclass(frozen=True)
class ApprovalRequested:
    """A confirmation dialog is on screen, awaiting a decision."""

    dialog: DialogRender


@dataclass(frozen=True)
class Ignored:
    """The tag had no effect."""

    reason: IgnoreReason


DispatchOutcome = Union[AutoExecuted, ApprovalRequested, Ignored]


@dataclass(frozen=True)
class UserModel:
    """Approval probabilities; assumptions, not measurements.

    `baseline` applies to honest-looking dialogs, `deceptive` to
    dialogs whose wording was forged, `dimmed` to any dialog shown on
    a darkened screen.
    """

    baseline: float = 0.05
    deceptive: float = 0.5
    dimmed: float = 0.5

    def __post_init__(self) -> None:
        for name in ("baseline", "deceptive", "dimmed"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} probability {p} outside [0, 1]")


@dataclass(frozen=True)
class FingerprintInfo:
    """What in-browser scripts can learn about a device.

    Deliberately excludes touchscreen internals: an attacker must look
    those up in its own measurement database by model name.
    """

    model: str
    manufacturer: str
    language: str
    orientation: Orientation
    controller_side: ControllerSide


def _touch_profile_from(entry: Mapping | None) -> TouchProfile | None:
    if entry is None:
        return None
    susceptible = bool(entry["susceptible"])
    trials = entry.get("trials")
    successes = entry.get("successes")
    if susceptible and trials:
        rate: float | None = successes / trials
    elif susceptible:
        rate = None
    else:
        rate = 0.0
    axis = entry.get("scatter_axis")
    return TouchProfile(
        susceptible=susceptible,
        char_frequency_khz=entry.get("char_frequency_khz"),
        min_voltage_vpp=entry.get("min_voltage_vpp"),
        scatter_axis=ScatterAxis(axis) if axis else ScatterAxis.HORIZONTAL,
        success_rate=rate,
        anomaly=AnomalyMode(entry.get("anomaly", "none")),
        trials=trials,
    )


def load_devices() -> dict[str, DeviceProfile]:
    """Load the bundled handset dataset (devices.json), keyed and
    ordered by model name as listed in the file."""
    raw = load_json("devices.json")
    devices: dict[str, DeviceProfile] = {}
    for entry in raw:
        profile = DeviceProfile(
            model=entry["model"],
            manufacturer=entry["manufacturer"],
            android_version=entry["android_version"],
            max_read_distance_cm=float(entry["max_read_distance_cm"]),
            nfc_factory_enabled=bool(entry["nfc_factory_enabled"]),
            wifi_msg_type=entry["wifi_msg_type"],
            bt_msg_type=entry["bt_msg_type"],
            nfc_controller_side=ControllerSide(entry.get("nfc_controller_side", "rear")),
            touch_profile=_touch_profile_from(entry.get("touch_profile")),
        )
        devices[profile.model] = profile
    return devices


def read_gate(
    profile: DeviceProfile,
    distance_cm: float,
    nfc_enabled: bool,
    screen: ScreenState,
) -> IgnoreReason | None:
    """First reason the tag cannot be read, or None if it can.

    Checked in range → radio → sleep → lock order so campaign counts
    attribute each blocked encounter to a single gate.
    """
    if distance_cm < 0:
        raise ValueError("distance cannot be negative")
    if distance_cm > profile.max_read_distance_cm:
        return IgnoreReason.OUT_OF_RANGE
    if not nfc_enabled:
        return IgnoreReason.NFC_DISABLED
    if screen.asleep:
        return IgnoreReason.ASLEEP
    if screen.locked:
        return IgnoreReason.LOCKED
    return None


def can_read(
    profile: DeviceProfile,
    distance_cm: float,
    nfc_enabled: bool,
    screen: ScreenState,
) -> bool:
    """True iff NFC is on, the screen is unlocked and awake, and the
    tag is within the profile's maximum read distance."""
    return read_gate(profile, distance_cm, nfc_enabled, screen) is None


# how each content kind dispatches: (action, needs approval)
_AUTO_ACTIONS = {
    AndroidApp: "launch-app",
    Intent: "send-intent",
    Text: "send-intent",
}


def _operation_description(content: TagContent) -> str:
    if isinstance(content, Uri):
        verb = "launch the instant app at" if content.instant else "open"
        return f"{verb} {content.url}"
    if isinstance(content, AndroidApp):
        return f"launch {content.package}"
    if isinstance(content, Intent):
        return f"send an intent to {content.target_app}"
    if isinstance(content, Text):
        return "deliver a text note"
    if isinstance(content, WiFiConfig):
        return f"connect to network {content.ssid_text}"
    if isinstance(content, BtSsp):
        return f"pair with Bluetooth device {content.name}"
    if isinstance(content, Email):
        return f"compose an email to {content.to}"
    return "perform an operation"


def _confirmation_dialog(content: TagContent) -> DialogRender:
    """Dialog for operations that normally run silently (the
    approve-all defense names the operation before allowing it)."""
    body = f"Allow this tag to {_operation_description(content)}?"
    return DialogRender(
        title="NFC operation",
        body=body,
        body_visual=visual_order(body),
        positive_label="ALLOW",
        negative_label="DENY",
    )


def _compose_dialog(content: Email) -> DialogRender:
    body = f"Send an email to {content.to}?"
    return DialogRender(
        title="Compose email",
        body=body,
        body_visual=visual_order(body),
        positive_label="SEND",
        negative_label="CANCEL",
    )


def dispatch(
    profile: DeviceProfile,
    screen: ScreenState,
    content: TagContent | UnknownType,
    policy: DefensePolicy = DefensePolicy.OFF,
    templates: Mapping[str, MessageTemplate] | None = None,
) -> DispatchOutcome:
    """Resolve what a successfully read tag does on this device.

    URL, app, and intent records auto-execute under policy off; Wi-Fi,
    Bluetooth, and email always request approval, using the device's
    own dialog template where one exists.  Approve-all forces every
    variant through an approval dialog.
    """
    if screen.asleep:
        return Ignored(IgnoreReason.ASLEEP)
    if screen.locked:
        return Ignored(IgnoreReason.LOCKED)
    if isinstance(content, UnknownType):
        return Ignored(IgnoreReason.UNKNOWN_TYPE)

    if isinstance(content, WiFiConfig):
        if profile.wifi_msg_type is None:
            raise NoTemplateError(profile.model, "wifi")
        store = templates if templates is not None else load_templates()
        return ApprovalRequested(render_dialog(store[profile.wifi_msg_type], content))
    if isinstance(content, BtSsp):
        if profile.bt_msg_type is None:
            raise NoTemplateError(profile.model, "bluetooth")
        store = templates if templates is not None else load_templates()
        return ApprovalRequested(render_dialog(store[profile.bt_msg_type], content))
    if isinstance(content, Email):
        return ApprovalRequested(_compose_dialog(content))

    if policy is DefensePolicy.APPROVE_ALL:
        return ApprovalRequested(_confirmation_dialog(content))
    if isinstance(content, Uri):
        action = "launch-instant-app" if content.instant else "open-url"
        return AutoExecuted(action, content.url)
    action = _AUTO_ACTIONS[type(content)]
    detail = (
        content.package
        if isinstance(content, AndroidApp)
        else content.target_app
        if isinstance(content, Intent)
        else content.body
    )
    return AutoExecuted(action, detail)


def user_decision(
    render: DialogRender,
    user: UserModel,
    screen: ScreenState,
    rng: np.random.Generator,
    context: DecisionContext = DecisionContext.BASELINE,
) -> Decision:
    """One Bernoulli approval draw.

    A dimmed screen overrides the context: the user cannot read the
    dialog properly, so the dimmed probability applies.
    """
    if screen.dimmed:
        p = user.dimmed
    elif context is DecisionContext.DECEPTIVE:
        p = user.deceptive
    else:
        p = user.baseline
    return Decision.APPROVE if rng.random() < p else Decision.DENY


def fingerprint(
    profile: DeviceProfile, screen: ScreenState | None = None
) -> FingerprintInfo:
    """In-browser fingerprint of the device; pure and repeatable."""
    return FingerprintInfo(
        model=profile.model,
        manufacturer=profile.manufacturer,
        language="en",
        orientation=screen.orientation if screen is not None else Orientation.PORTRAIT,
        controller_side=profile.nfc_controller_side,
    )
