"""Attacker-side orchestration: emulator, playbooks, protocol runner.

A trojanized object carries either a passive tag or a tag emulator.
The emulator version runs a two-phase protocol: present a URL tag,
let the victim's browser fingerprint itself against the attacker's
server, then rewrite the emulated tag with content tailored to the
fingerprinted model.  The victim re-reads only after the emulator
power-cycles (off, then presenting again), because the handset treats
that as a new tag arriving.

Every run yields an `AttackTranscript`: causally ordered events on a
logical clock with exactly one terminal event (attack-succeeded or
attack-failed).  Transcripts serialize to JSON lines for analysis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Union

import numpy as np

from .deception import craft_ssid, rtl_wrap
from .ndef import (
    AndroidApp,
    BtSsp,
    NdefMessage,
    TagContent,
    Uri,
    WiFiConfig,
    content_of,
    message_for,
)
from .touchscreen import (
    NO_RESPONSE_ATTEMPTS,
    NoiseSignal,
    PhantomOutcome,
    phantom_attack,
    standard_dialog,
)
from .victim import (
    ApprovalRequested,
    AutoExecuted,
    Decision,
    DecisionContext,
    DefensePolicy,
    DeviceProfile,
    Ignored,
    MessageTemplate,
    NoTemplateError,
    ScreenState,
    UserModel,
    dispatch,
    fingerprint,
    user_decision,
)

__all__ = [
    "EVT_TAG_PRESENTED",
    "EVT_TAG_READ",
    "EVT_URL_OPENED",
    "EVT_ACTION_EXECUTED",
    "EVT_FINGERPRINT_RECEIVED",
    "EVT_TAG_REWRITTEN",
    "EVT_DIALOG_SHOWN",
    "EVT_USER_APPROVED",
    "EVT_USER_DENIED",
    "EVT_ATTACK_SUCCEEDED",
    "EVT_ATTACK_FAILED",
    "TERMINAL_EVENTS",
    "TranscriptEvent",
    "AttackTranscript",
    "Presenting",
    "Off",
    "Rewriting",
    "EmulatorState",
    "Emulator",
    "SingleShot",
    "DeceptiveMessageTrap",
    "AppContextTrap",
    "ScreenDimTrap",
    "BtPairingTrap",
    "Playbook",
    "PhantomAssist",
    "ProtocolStallError",
    "stage_count",
    "select_tag",
    "run_protocol",
    "DEFAULT_LANDING_URL",
]

EVT_TAG_PRESENTED = "tag-presented"
EVT_TAG_READ = "tag-read"
EVT_URL_OPENED = "url-opened"
EVT_ACTION_EXECUTED = "action-executed"
EVT_FINGERPRINT_RECEIVED = "fingerprint-received"
EVT_TAG_REWRITTEN = "tag-rewritten"
EVT_DIALOG_SHOWN = "dialog-shown"
EVT_USER_APPROVED = "user-approved"
EVT_USER_DENIED = "user-denied"
EVT_ATTACK_SUCCEEDED = "attack-succeeded"
EVT_ATTACK_FAILED = "attack-failed"

TERMINAL_EVENTS = frozenset({EVT_ATTACK_SUCCEEDED, EVT_ATTACK_FAILED})

DEFAULT_LANDING_URL = "http://www.example.com/landing"


@dataclass(frozen=True)
class TranscriptEvent:
    tick: int
    kind: str
    detail: Mapping[str, Any] = field(default_factory=dict)


@dataclass
class AttackTranscript:
    """Ordered protocol events; append-only until the terminal event."""

    events: list[TranscriptEvent] = field(default_factory=list)

    def append(self, tick: int, kind: str, **detail: Any) -> None:
        if self.terminal_event is not None:
            raise ValueError("transcript already has a terminal event")
        self.events.append(TranscriptEvent(tick, kind, detail))

    @property
    def terminal_event(self) -> TranscriptEvent | None:
        if self.events and self.events[-1].kind in TERMINAL_EVENTS:
            return self.events[-1]
        return None

    @property
    def succeeded(self) -> bool:
        terminal = self.terminal_event
        return terminal is not None and terminal.kind == EVT_ATTACK_SUCCEEDED

    def to_json_lines(self) -> str:
        return "".join(
            json.dumps(
                {"tick": e.tick, "kind": e.kind, "detail": dict(e.detail)},
                sort_keys=False,
            )
            + "\n"
            for e in self.events
        )


# --- emulator state machine -------------------------------------------


@dataclass(frozen=True)
class Presenting:
    message: NdefMessage


@dataclass(frozen=True)
class Off:
    pass


@dataclass(frozen=True)
class Rewriting:
    pending: NdefMessage


EmulatorState = Union[Presenting, Off, Rewriting]


class Emulator:
    """NFC tag emulator.

    The handset re-reads only after an Off→Presenting transition, so
    `generation` (the count of those transitions) is what a read step
    keys on, not message identity: cycling with an identical message
    still forces a re-read.
    """

    def __init__(self) -> None:
        self.state: EmulatorState = Off()
        self.generation = 0
        self.history: list[EmulatorState] = [self.state]

    def _transition(self, state: EmulatorState) -> None:
        self.state = state
        self.history.append(state)
        if isinstance(state, Presenting):
            self.generation += 1

    def present(self, message: NdefMessage) -> EmulatorState:
        """Power on, presenting `message`."""
        if not isinstance(self.state, Off):
            self._transition(Off())
        self._transition(Presenting(message))
        return self.state

    def cycle(self, message: NdefMessage) -> EmulatorState:
        """Rewrite and power-cycle: Rewriting → Off → Presenting."""
        self._transition(Rewriting(message))
        self._transition(Off())
        self._transition(Presenting(message))
        return self.state


# --- playbooks ----------------------------------------------------------


@dataclass(frozen=True)
class SingleShot:
    """Present one static tag; no fingerprinting, no rewriting."""

    content: TagContent


@dataclass(frozen=True)
class DeceptiveMessageTrap:
    """Wi-Fi credentials whose ssid reads as part of the dialog text."""

    ssid_text: str


@dataclass(frozen=True)
class AppContextTrap:
    """Launch a well-known app, then show a Wi-Fi dialog whose forged
    wording names that app (the ssid is wrapped right-to-left)."""

    app_package: str
    visual_text: str


@dataclass(frozen=True)
class ScreenDimTrap:
    """Launch a screen-dimming filter app, then raise the Wi-Fi dialog
    on the darkened screen."""

    filter_app: str
    ssid_text: str


@dataclass(frozen=True)
class BtPairingTrap:
    """Request pairing with an attacker peripheral (e.g. a HID mouse)."""

    mac: bytes
    name: str


Playbook = Union[SingleShot, DeceptiveMessageTrap, AppContextTrap, ScreenDimTrap, BtPairingTrap]


@dataclass(frozen=True)
class PhantomAssist:
    """Resolve approval dialogs by injected touchscreen noise instead
    of waiting for the user.  `signal` None means the attacker drives
    the display at its profiled operating point."""

    signal: NoiseSignal | None = None
    max_attempts: int = NO_RESPONSE_ATTEMPTS


class ProtocolStallError(RuntimeError):
    """The victim cannot (re-)read the tag; the protocol cannot advance."""

    def __init__(self, step: int, reason: str):
        super().__init__(f"step {step}: {reason}")
        self.step = step
        self.reason = reason


def stage_count(playbook: Playbook) -> int:
    """Number of post-fingerprint tag stages a playbook rewrites."""
    if isinstance(playbook, (AppContextTrap, ScreenDimTrap)):
        return 2
    return 1


def select_tag(fp, playbook: Playbook, stage: int = 0) -> NdefMessage:
    """Choose the tag message for a rewrite stage.

    The fingerprint is what the selection is keyed on in principle;
    the bundled playbooks vary only by stage, but budget errors from
    ssid crafting propagate to the caller either way.
    """
    if stage >= stage_count(playbook):
        raise ValueError(f"playbook has no stage {stage}")
    if isinstance(playbook, SingleShot):
        return message_for(playbook.content)
    if isinstance(playbook, DeceptiveMessageTrap):
        return message_for(WiFiConfig(ssid=craft_ssid(playbook.ssid_text)))
    if isinstance(playbook, AppContextTrap):
        if stage == 0:
            return message_for(AndroidApp(playbook.app_package))
        return message_for(WiFiConfig(ssid=rtl_wrap(playbook.visual_text)))
    if isinstance(playbook, ScreenDimTrap):
        if stage == 0:
            return message_for(AndroidApp(playbook.filter_app))
        return message_for(WiFiConfig(ssid=craft_ssid(playbook.ssid_text)))
    if isinstance(playbook, BtPairingTrap):
        return message_for(BtSsp(mac=playbook.mac, name=playbook.name))
    raise TypeError(f"unknown playbook {type(playbook).__name__}")


# --- protocol runner -----------------------------------------------------


def _decision_context(playbook: Playbook) -> DecisionContext:
    # forged-wording playbooks get the deceptive approval probability;
    # the dim trap's leverage is the dark screen, handled by ScreenState
    if isinstance(playbook, (DeceptiveMessageTrap, AppContextTrap)):
        return DecisionContext.DECEPTIVE
    return DecisionContext.BASELINE


def _content_summary(content: Any) -> str:
    return type(content).__name__


class _ProtocolRun:
    def __init__(
        self,
        playbook: Playbook,
        profile: DeviceProfile,
        screen: ScreenState,
        user: UserModel,
        rng: np.random.Generator,
        policy: DefensePolicy,
        templates: Mapping[str, MessageTemplate] | None,
        phantom: PhantomAssist | None,
        max_rewrites: int,
        fingerprint_latency: int,
        reread_delay: int,
        landing_url: str,
    ) -> None:
        self.playbook = playbook
        self.profile = profile
        self.screen = screen
        self.user = user
        self.rng = rng
        self.policy = policy
        self.templates = templates
        self.phantom = phantom
        self.max_rewrites = max_rewrites
        self.fingerprint_latency = fingerprint_latency
        self.reread_delay = reread_delay
        self.landing_url = landing_url
        self.tick = 0
        self.transcript = AttackTranscript()
        self.emulator = Emulator()
        self.rewrites = 0

    def emit(self, kind: str, **detail: Any) -> None:
        self.transcript.append(self.tick, kind, **detail)

    def read_tag(self, step: int) -> TagContent:
        if self.screen.asleep or self.screen.locked:
            raise ProtocolStallError(
                step, "screen asleep" if self.screen.asleep else "screen locked"
            )
        assert isinstance(self.emulator.state, Presenting)
        message = self.emulator.state.message
        self.emit(EVT_TAG_READ, generation=self.emulator.generation)
        return content_of(message.records[0])

    def fail(self, reason: str, **detail: Any) -> None:
        self.emit(EVT_ATTACK_FAILED, reason=reason, **detail)

    def succeed(self, via: str, action: str) -> None:
        self.emit(EVT_ATTACK_SUCCEEDED, via=via, action=action)

    def resolve_dialog(self, outcome: ApprovalRequested, action: str) -> None:
        dialog = outcome.dialog
        self.emit(
            EVT_DIALOG_SHOWN,
            template=dialog.template_id,
            title=dialog.title,
            body=dialog.body,
            body_visual=dialog.body_visual,
        )
        touch = self.profile.touch_profile
        if self.phantom is not None and touch is not None:
            signal = self.phantom.signal
            if signal is None:
                if touch.susceptible:
                    signal = NoiseSignal(touch.char_frequency_khz, touch.min_voltage_vpp)
                else:
                    signal = NoiseSignal(100.0, 120.0)
            result = phantom_attack(
                touch,
                signal,
                standard_dialog(touch.scatter_axis),
                self.rng,
                max_attempts=self.phantom.max_attempts,
            )
            if result is PhantomOutcome.WRONG_BUTTON:
                self.emit(EVT_USER_APPROVED, via="phantom-touch")
                self.succeed(via="phantom-touch", action=action)
            elif result is PhantomOutcome.INTENDED_BUTTON:
                self.emit(EVT_USER_DENIED, via="phantom-touch")
                self.fail("user-denied", via="phantom-touch")
            else:
                self.fail("no-response")
            return
        decision = user_decision(
            dialog, self.user, self.screen, self.rng, _decision_context(self.playbook)
        )
        if decision is Decision.APPROVE:
            self.emit(EVT_USER_APPROVED, via="user")
            self.succeed(via="user-approval", action=action)
        else:
            self.emit(EVT_USER_DENIED, via="user")
            self.fail("user-denied")

    def handle_stage_outcome(self, content: Any, last_stage: bool) -> bool:
        """Dispatch one read tag; returns True if the protocol goes on."""
        try:
            outcome = dispatch(
                self.profile, self.screen, content, self.policy, self.templates
            )
        except NoTemplateError as exc:
            self.fail("no-template", family=exc.family)
            return False
        if isinstance(outcome, Ignored):
            self.fail(outcome.reason.value)
            return False
        if isinstance(outcome, AutoExecuted):
            kind = EVT_URL_OPENED if outcome.action in ("open-url", "launch-instant-app") else EVT_ACTION_EXECUTED
            self.emit(kind, action=outcome.action, detail=outcome.detail)
            if outcome.action == "launch-app":
                self.screen.foreground_app = outcome.detail
                if isinstance(self.playbook, ScreenDimTrap) and outcome.detail == self.playbook.filter_app:
                    self.screen.dimmed = True
            if last_stage:
                self.succeed(via="auto-execution", action=outcome.action)
                return False
            return True
        # approval dialog: terminal either way
        action = self._success_action(content)
        self.resolve_dialog(outcome, action)
        return False

    @staticmethod
    def _success_action(content: Any) -> str:
        if isinstance(content, WiFiConfig):
            return "connect-wifi"
        if isinstance(content, BtSsp):
            return "pair-bluetooth"
        if isinstance(content, Uri):
            return "open-url"
        return "execute"

    def run(self) -> AttackTranscript:
        if isinstance(self.playbook, SingleShot):
            message = select_tag(None, self.playbook)
            self.emulator.present(message)
            self.emit(EVT_TAG_PRESENTED, content=_content_summary(self.playbook.content))
            content = self.read_tag(step=2)
            self.handle_stage_outcome(content, last_stage=True)
            return self.transcript

        # combination attack: landing URL first
        self.emulator.present(message_for(Uri(self.landing_url)))
        self.emit(EVT_TAG_PRESENTED, content="Uri")
        content = self.read_tag(step=2)
        try:
            outcome = dispatch(
                self.profile, self.screen, content, self.policy, self.templates
            )
        except NoTemplateError as exc:  # cannot happen for Uri; defensive
            self.fail("no-template", family=exc.family)
            return self.transcript
        if isinstance(outcome, Ignored):
            self.fail(outcome.reason.value)
            return self.transcript
        if isinstance(outcome, ApprovalRequested):
            # approve-all puts even the landing URL behind a dialog
            self.emit(
                EVT_DIALOG_SHOWN,
                template=outcome.dialog.template_id,
                title=outcome.dialog.title,
                body=outcome.dialog.body,
                body_visual=outcome.dialog.body_visual,
            )
            decision = user_decision(
                outcome.dialog, self.user, self.screen, self.rng, DecisionContext.BASELINE
            )
            if decision is Decision.DENY:
                self.emit(EVT_USER_DENIED, via="user")
                self.fail("user-denied", stage="landing")
                return self.transcript
            self.emit(EVT_USER_APPROVED, via="user")
        self.emit(EVT_URL_OPENED, action="open-url", detail=self.landing_url)

        self.tick += self.fingerprint_latency
        fp = fingerprint(self.profile, self.screen)
        self.emit(
            EVT_FINGERPRINT_RECEIVED, model=fp.model, manufacturer=fp.manufacturer
        )

        stages = stage_count(self.playbook)
        for stage in range(stages):
            if self.rewrites >= self.max_rewrites:
                self.fail("rewrite-limit")
                return self.transcript
            message = select_tag(fp, self.playbook, stage)
            self.emulator.cycle(message)
            self.rewrites += 1
            self.emit(EVT_TAG_REWRITTEN, stage=stage)
            self.tick += self.reread_delay
            content = self.read_tag(step=7)
            if not self.handle_stage_outcome(content, last_stage=stage == stages - 1):
                return self.transcript
        return self.transcript


def run_protocol(
    playbook: Playbook,
    profile: DeviceProfile,
    user: UserModel,
    rng: np.random.Generator,
    screen: ScreenState | None = None,
    policy: DefensePolicy = DefensePolicy.OFF,
    templates: Mapping[str, MessageTemplate] | None = None,
    phantom: PhantomAssist | None = None,
    max_rewrites: int = 4,
    fingerprint_latency: int = 1,
    reread_delay: int = 1,
    landing_url: str = DEFAULT_LANDING_URL,
) -> AttackTranscript:
    """Run one encounter end to end and return its transcript.

    The caller is expected to have passed the read gate already; a
    locked or asleep screen raises ProtocolStallError at the first
    read step.  Deterministic given (playbook, profile, user, rng
    state): replaying with an identically seeded generator yields an
    identical transcript.
    """
    run = _ProtocolRun(
        playbook=playbook,
        profile=profile,
        screen=screen if screen is not None else ScreenState(),
        user=user,
        rng=rng,
        policy=policy,
        templates=templates,
        phantom=phantom,
        max_rewrites=max_rewrites,
        fingerprint_latency=fingerprint_latency,
        reread_delay=reread_delay,
        landing_url=landing_url,
    )
    return run.run()
