"""Monte Carlo campaign runner, dataset statistics, report export.

A campaign replays one attack scenario against a device population:
every (device, encounter index) pair draws its own counter-based
random stream, so results are independent of execution order and
reproduce byte-for-byte from the scenario seed.  Encounters are
i.i.d. draws of screen state at a fixed obstacle thickness; each
produces exactly one protocol transcript, classified into count
buckets that partition the attempts.

Scenario files are TOML (JSON equivalents accepted).  Reports export
as JSON (schema-versioned) or CSV, with stable field ordering.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .ndef import (
    AndroidApp,
    BtSsp,
    Email,
    Intent,
    NdefError,
    TagContent,
    Text,
    Uri,
    WiFiConfig,
)
from .rng import stream
from .totdevice import (
    AppContextTrap,
    BtPairingTrap,
    DeceptiveMessageTrap,
    EVT_ATTACK_SUCCEEDED,
    PhantomAssist,
    Playbook,
    ScreenDimTrap,
    SingleShot,
    run_protocol,
)
from .touchscreen import NoiseSignal, PhantomOutcome, phantom_attack, standard_dialog
from .victim import (
    DefensePolicy,
    DeviceProfile,
    IgnoreReason,
    ScreenState,
    UnknownDeviceError,
    UserModel,
    load_devices,
    read_gate,
)

__all__ = [
    "TotKind",
    "InvalidConfigError",
    "IoFailureError",
    "UnknownDeviceError",
    "ScreenModel",
    "PhantomConfig",
    "ScenarioConfig",
    "Counts",
    "CampaignResult",
    "PhantomCampaignResult",
    "DatasetStats",
    "wilson_interval",
    "parse_mac",
    "config_from_dict",
    "load_config",
    "run_campaign",
    "run_phantom_campaign",
    "dataset_stats",
    "export_report",
    "write_report",
]

SCHEMA_CAMPAIGN = "tot-campaign/1"
SCHEMA_PHANTOM = "tot-phantom/1"


class TotKind(Enum):
    SIMPLE_TAG = "simple-tag"
    TOT_DEVICE = "tot-device"


class InvalidConfigError(ValueError):
    """Configuration rejected; `field` is the offending key path."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field = field_path


class IoFailureError(RuntimeError):
    """Report could not be written."""


@dataclass(frozen=True)
class ScreenModel:
    """Per-encounter screen state distribution (i.i.d. draws)."""

    locked_prob: float = 0.0
    asleep_prob: float = 0.0

    def __post_init__(self) -> None:
        for name in ("locked_prob", "asleep_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise InvalidConfigError(f"screen.{name}", f"{p} outside [0, 1]")


@dataclass(frozen=True)
class PhantomConfig:
    """Optional touchscreen assist for approval dialogs."""

    enabled: bool = False
    frequency_khz: float | None = None
    amplitude_vpp: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    """One complete campaign description.

    `devices` None selects the whole dataset; otherwise it lists model
    names.  `encounters` counts per device.  The seed is mandatory:
    campaigns never take entropy from the clock.
    """

    kind: TotKind
    thickness_cm: float
    playbook: Playbook
    encounters: int
    seed: int
    devices: tuple[str, ...] | None = None
    policy: DefensePolicy = DefensePolicy.OFF
    user: UserModel = field(default_factory=UserModel)
    screen: ScreenModel = field(default_factory=ScreenModel)
    phantom: PhantomConfig = field(default_factory=PhantomConfig)
    max_rewrites: int = 4

    def __post_init__(self) -> None:
        if self.encounters < 1:
            raise InvalidConfigError("scenario.encounters", "must be at least 1")
        if self.thickness_cm < 0:
            raise InvalidConfigError("scenario.thickness_cm", "cannot be negative")
        if self.kind is TotKind.SIMPLE_TAG and not isinstance(self.playbook, SingleShot):
            raise InvalidConfigError(
                "playbook.type", "a simple tag cannot rewrite itself; use single-shot"
            )


def parse_mac(text: str) -> bytes:
    parts = text.split(":")
    if len(parts) != 6:
        raise ValueError(f"mac needs 6 octets, got {len(parts)}")
    return bytes(int(p, 16) for p in parts)


def _content_from(section: Mapping[str, Any]) -> TagContent:
    kind = section.get("kind")
    try:
        if kind == "uri":
            return Uri(section["url"], instant=bool(section.get("instant", False)))
        if kind == "wifi":
            return WiFiConfig(
                ssid=str(section["ssid"]).encode("utf-8"),
                key=str(section.get("key", "")),
            )
        if kind == "bt":
            return BtSsp(mac=parse_mac(section["mac"]), name=section.get("name", ""))
        if kind == "app":
            return AndroidApp(package=section["package"])
        if kind == "text":
            return Text(lang=section.get("lang", "en"), body=section.get("body", ""))
        if kind == "email":
            return Email(
                to=section["to"],
                subject=section.get("subject", ""),
                body=section.get("body", ""),
            )
        if kind == "intent":
            return Intent(target_app=section["app"], payload=section.get("payload", ""))
    except KeyError as exc:
        raise InvalidConfigError(f"playbook.content.{exc.args[0]}", "missing") from exc
    except (ValueError, NdefError) as exc:
        raise InvalidConfigError("playbook.content", str(exc)) from exc
    raise InvalidConfigError("playbook.content.kind", f"unknown kind {kind!r}")


def _playbook_from(section: Mapping[str, Any]) -> Playbook:
    ptype = section.get("type")
    try:
        if ptype == "single-shot":
            return SingleShot(content=_content_from(section.get("content", {})))
        if ptype == "deceptive-message":
            return DeceptiveMessageTrap(ssid_text=section["ssid"])
        if ptype == "app-context":
            return AppContextTrap(app_package=section["app"], visual_text=section["text"])
        if ptype == "screen-dim":
            return ScreenDimTrap(filter_app=section["filter_app"], ssid_text=section["ssid"])
        if ptype == "bt-pairing":
            return BtPairingTrap(mac=parse_mac(section["mac"]), name=section.get("name", ""))
    except KeyError as exc:
        raise InvalidConfigError(f"playbook.{exc.args[0]}", "missing") from exc
    except ValueError as exc:
        if isinstance(exc, InvalidConfigError):
            raise
        raise InvalidConfigError("playbook", str(exc)) from exc
    raise InvalidConfigError("playbook.type", f"unknown playbook type {ptype!r}")


def config_from_dict(data: Mapping[str, Any]) -> ScenarioConfig:
    """Build a ScenarioConfig from parsed TOML/JSON data."""
    scenario = data.get("scenario")
    if not isinstance(scenario, Mapping):
        raise InvalidConfigError("scenario", "missing [scenario] section")
    try:
        kind = TotKind(scenario.get("kind", "tot-device"))
    except ValueError as exc:
        raise InvalidConfigError("scenario.kind", str(exc)) from exc
    if "seed" not in scenario:
        raise InvalidConfigError("scenario.seed", "a seed is mandatory")
    if "encounters" not in scenario:
        raise InvalidConfigError("scenario.encounters", "missing")
    selector = scenario.get("devices", "all")
    if selector == "all":
        devices: tuple[str, ...] | None = None
    elif isinstance(selector, str):
        devices = (selector,)
    else:
        devices = tuple(str(m) for m in selector)
    try:
        policy = DefensePolicy(scenario.get("defense_policy", "off"))
    except ValueError as exc:
        raise InvalidConfigError("scenario.defense_policy", str(exc)) from exc

    playbook_section = data.get("playbook")
    if not isinstance(playbook_section, Mapping):
        raise InvalidConfigError("playbook", "missing [playbook] section")

    user_section = data.get("user", {})
    try:
        user = UserModel(
            baseline=float(user_section.get("baseline", 0.05)),
            deceptive=float(user_section.get("deceptive", 0.5)),
            dimmed=float(user_section.get("dimmed", 0.5)),
        )
    except ValueError as exc:
        raise InvalidConfigError("user", str(exc)) from exc

    screen_section = data.get("screen", {})
    screen = ScreenModel(
        locked_prob=float(screen_section.get("locked_prob", 0.0)),
        asleep_prob=float(screen_section.get("asleep_prob", 0.0)),
    )

    phantom_section = data.get("phantom", {})
    phantom = PhantomConfig(
        enabled=bool(phantom_section.get("enabled", False)),
        frequency_khz=phantom_section.get("frequency_khz"),
        amplitude_vpp=phantom_section.get("amplitude_vpp"),
    )

    return ScenarioConfig(
        kind=kind,
        thickness_cm=float(scenario.get("thickness_cm", 0.0)),
        playbook=_playbook_from(playbook_section),
        encounters=int(scenario["encounters"]),
        seed=int(scenario["seed"]),
        devices=devices,
        policy=policy,
        user=user,
        screen=screen,
        phantom=phantom,
        max_rewrites=int(scenario.get("max_rewrites", 4)),
    )


def load_config(path: str | Path) -> ScenarioConfig:
    """Load a scenario file; .json parses as JSON, anything else TOML."""
    path = Path(path)
    raw = path.read_bytes()
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(raw.decode("utf-8"))
        else:
            data = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise InvalidConfigError(str(path), f"unparseable scenario file: {exc}") from exc
    return config_from_dict(data)


# --- results -------------------------------------------------------------


@dataclass
class Counts:
    """Outcome buckets; they partition the attempted encounters."""

    attempted: int = 0
    blocked_locked: int = 0
    blocked_range: int = 0
    blocked_nfc_off: int = 0
    auto_executed: int = 0
    approved: int = 0
    denied: int = 0
    phantom_success: int = 0
    no_response: int = 0

    @property
    def successes(self) -> int:
        return self.auto_executed + self.approved + self.phantom_success

    def add(self, other: "Counts") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def partition_holds(self) -> bool:
        parts = (
            self.blocked_locked
            + self.blocked_range
            + self.blocked_nfc_off
            + self.auto_executed
            + self.approved
            + self.denied
            + self.phantom_success
            + self.no_response
        )
        return parts == self.attempted


def wilson_interval(
    successes: int, attempts: int, z: float = 1.96
) -> tuple[float, float]:
    """95% (by default) Wilson score interval for a binomial rate."""
    if attempts <= 0:
        return 0.0, 1.0
    p = successes / attempts
    z2 = z * z
    denom = 1.0 + z2 / attempts
    center = (p + z2 / (2 * attempts)) / denom
    margin = (
        z
        * ((p * (1.0 - p) / attempts + z2 / (4.0 * attempts * attempts)) ** 0.5)
        / denom
    )
    return max(0.0, center - margin), min(1.0, center + margin)


@dataclass
class CampaignResult:
    seed: int
    kind: TotKind
    playbook_type: str
    thickness_cm: float
    encounters: int
    policy: DefensePolicy
    per_device: dict[str, Counts]
    totals: Counts
    success_rate: float
    ci_low: float
    ci_high: float
    schema: str = SCHEMA_CAMPAIGN


@dataclass
class PhantomCampaignResult:
    seed: int
    model: str
    trials: int
    frequency_khz: float
    amplitude_vpp: float
    wrong_button: int
    intended_button: int
    no_response: int
    success_rate: float
    ci_low: float
    ci_high: float
    schema: str = SCHEMA_PHANTOM


@dataclass(frozen=True)
class DatasetStats:
    device_count: int
    mean_distance_cm: float
    max_distance_cm: float
    min_distance_cm: float
    factory_enabled: int


_GATE_BUCKET = {
    IgnoreReason.OUT_OF_RANGE: "blocked_range",
    IgnoreReason.NFC_DISABLED: "blocked_nfc_off",
    IgnoreReason.ASLEEP: "blocked_locked",
    IgnoreReason.LOCKED: "blocked_locked",
}


def _classify(transcript, counts: Counts) -> None:
    terminal = transcript.terminal_event
    assert terminal is not None, "protocol returned without a terminal event"
    if terminal.kind == EVT_ATTACK_SUCCEEDED:
        via = terminal.detail.get("via")
        if via == "auto-execution":
            counts.auto_executed += 1
        elif via == "phantom-touch":
            counts.phantom_success += 1
        else:
            counts.approved += 1
        return
    reason = terminal.detail.get("reason")
    if reason == "user-denied":
        counts.denied += 1
    else:
        # no-response, no-template, rewrite-limit, unknown-type
        counts.no_response += 1


def run_campaign(
    config: ScenarioConfig,
    devices: Mapping[str, DeviceProfile] | None = None,
    transcript_sink: Callable[[str, int, Any], None] | None = None,
) -> CampaignResult:
    """Run every (device, encounter) cell of the scenario.

    Each cell owns random stream (seed, device_index * encounters +
    encounter_index), so shards merge order-independently and a rerun
    reproduces the result exactly.

    `transcript_sink(model, encounter_index, transcript)` is called for
    every encounter that reaches the protocol (gated encounters produce
    no transcript).
    """
    dataset = dict(devices) if devices is not None else load_devices()
    if config.devices is None:
        selected = list(dataset.values())
    else:
        missing = [m for m in config.devices if m not in dataset]
        if missing:
            raise UnknownDeviceError(missing[0])
        selected = [dataset[m] for m in config.devices]

    assist = None
    if config.phantom.enabled:
        signal = None
        if config.phantom.frequency_khz is not None and config.phantom.amplitude_vpp is not None:
            signal = NoiseSignal(config.phantom.frequency_khz, config.phantom.amplitude_vpp)
        assist = PhantomAssist(signal=signal)

    per_device: dict[str, Counts] = {}
    totals = Counts()
    for device_index, device in enumerate(selected):
        counts = Counts()
        for encounter in range(config.encounters):
            rng = stream(config.seed, device_index * config.encounters + encounter)
            # fixed draw order: locked, then asleep
            locked = rng.random() < config.screen.locked_prob
            asleep = rng.random() < config.screen.asleep_prob
            screen = ScreenState(locked=locked, asleep=asleep)
            counts.attempted += 1
            gate = read_gate(
                device, config.thickness_cm, device.nfc_factory_enabled, screen
            )
            if gate is not None:
                bucket = _GATE_BUCKET[gate]
                setattr(counts, bucket, getattr(counts, bucket) + 1)
                continue
            transcript = run_protocol(
                config.playbook,
                device,
                config.user,
                rng,
                screen=screen,
                policy=config.policy,
                phantom=assist,
                max_rewrites=config.max_rewrites,
            )
            if transcript_sink is not None:
                transcript_sink(device.model, encounter, transcript)
            _classify(transcript, counts)
        per_device[device.model] = counts
        totals.add(counts)

    rate = totals.successes / totals.attempted if totals.attempted else 0.0
    lo, hi = wilson_interval(totals.successes, totals.attempted)
    return CampaignResult(
        seed=config.seed,
        kind=config.kind,
        playbook_type=type(config.playbook).__name__,
        thickness_cm=config.thickness_cm,
        encounters=config.encounters,
        policy=config.policy,
        per_device=per_device,
        totals=totals,
        success_rate=rate,
        ci_low=lo,
        ci_high=hi,
    )


def run_phantom_campaign(
    model: str,
    trials: int | None,
    seed: int,
    frequency_khz: float | None = None,
    amplitude_vpp: float | None = None,
    devices: Mapping[str, DeviceProfile] | None = None,
) -> PhantomCampaignResult:
    """Bench-style dialog trials against one device's touchscreen.

    No NFC involved: the dialog is on screen and the noise source is
    driven directly.  Defaults: the profile's characteristic frequency
    and minimum attack voltage, and its published trial count.
    """
    dataset = dict(devices) if devices is not None else load_devices()
    if model not in dataset:
        raise UnknownDeviceError(model)
    profile = dataset[model].touch_profile
    if profile is None:
        raise InvalidConfigError(
            "phantom.device", f"{model} has no touchscreen profile"
        )
    if trials is None:
        trials = profile.trials if profile.trials else 10
    if trials < 1:
        raise InvalidConfigError("phantom.trials", "must be at least 1")
    frequency = (
        frequency_khz
        if frequency_khz is not None
        else profile.char_frequency_khz
        if profile.char_frequency_khz is not None
        else 100.0
    )
    amplitude = (
        amplitude_vpp
        if amplitude_vpp is not None
        else profile.min_voltage_vpp
        if profile.min_voltage_vpp is not None
        else 120.0
    )
    signal = NoiseSignal(frequency, amplitude)
    dialog = standard_dialog(profile.scatter_axis)

    tallies = {outcome: 0 for outcome in PhantomOutcome}
    for trial in range(trials):
        rng = stream(seed, trial)
        tallies[phantom_attack(profile, signal, dialog, rng)] += 1

    wrong = tallies[PhantomOutcome.WRONG_BUTTON]
    lo, hi = wilson_interval(wrong, trials)
    return PhantomCampaignResult(
        seed=seed,
        model=model,
        trials=trials,
        frequency_khz=frequency,
        amplitude_vpp=amplitude,
        wrong_button=wrong,
        intended_button=tallies[PhantomOutcome.INTENDED_BUTTON],
        no_response=tallies[PhantomOutcome.NO_RESPONSE],
        success_rate=wrong / trials,
        ci_low=lo,
        ci_high=hi,
    )


def dataset_stats(
    devices: Mapping[str, DeviceProfile] | None = None,
) -> DatasetStats:
    """Summary statistics computed from the dataset file, not cached."""
    dataset = dict(devices) if devices is not None else load_devices()
    distances = [d.max_read_distance_cm for d in dataset.values()]
    return DatasetStats(
        device_count=len(dataset),
        mean_distance_cm=sum(distances) / len(distances),
        max_distance_cm=max(distances),
        min_distance_cm=min(distances),
        factory_enabled=sum(1 for d in dataset.values() if d.nfc_factory_enabled),
    )


# --- export ---------------------------------------------------------------

_COUNT_FIELDS = [f.name for f in fields(Counts)]


def _counts_dict(counts: Counts) -> dict[str, int]:
    return {name: getattr(counts, name) for name in _COUNT_FIELDS}


def _report_dict(result: CampaignResult | PhantomCampaignResult) -> dict[str, Any]:
    if isinstance(result, PhantomCampaignResult):
        return {
            "schema": result.schema,
            "seed": result.seed,
            "model": result.model,
            "trials": result.trials,
            "frequency_khz": result.frequency_khz,
            "amplitude_vpp": result.amplitude_vpp,
            "wrong_button": result.wrong_button,
            "intended_button": result.intended_button,
            "no_response": result.no_response,
            "success_rate": result.success_rate,
            "ci95": [result.ci_low, result.ci_high],
        }
    return {
        "schema": result.schema,
        "seed": result.seed,
        "kind": result.kind.value,
        "playbook": result.playbook_type,
        "thickness_cm": result.thickness_cm,
        "encounters": result.encounters,
        "defense_policy": result.policy.value,
        "success_rate": result.success_rate,
        "ci95": [result.ci_low, result.ci_high],
        "totals": _counts_dict(result.totals),
        "devices": {
            model: _counts_dict(counts) for model, counts in result.per_device.items()
        },
    }


def export_report(
    result: CampaignResult | PhantomCampaignResult, fmt: str = "json"
) -> str:
    """Serialize a result with stable ordering; idempotent."""
    if fmt == "json":
        return json.dumps(_report_dict(result), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if isinstance(result, PhantomCampaignResult):
            writer.writerow(
                ["model", "trials", "wrong_button", "intended_button", "no_response"]
            )
            writer.writerow(
                [
                    result.model,
                    result.trials,
                    result.wrong_button,
                    result.intended_button,
                    result.no_response,
                ]
            )
        else:
            writer.writerow(["model"] + _COUNT_FIELDS)
            for model, counts in result.per_device.items():
                writer.writerow([model] + [getattr(counts, n) for n in _COUNT_FIELDS])
        return buf.getvalue()
    raise InvalidConfigError("format", f"unknown report format {fmt!r}")


def write_report(
    result: CampaignResult | PhantomCampaignResult,
    fmt: str,
    path: str | Path,
) -> None:
    try:
        Path(path).write_text(export_report(result, fmt), encoding="utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot write report to {path}: {exc}") from exc
