"""Deceptive dialog crafting.

Android handsets render a confirmation dialog before joining a Wi-Fi
network or pairing a Bluetooth device from a tag, and the dialog
embeds an attacker-controlled string (the ssid or device name).  This
module crafts those strings, including the right-to-left override
trick that makes a dialog's question read as an attacker-chosen
sentence, and renders dialogs from the bundled per-vendor templates.

The visual-order model implemented here is deliberately small: one
U+202E (right-to-left override) starts a reversed run that extends to
the end of the string.  That is exactly the situation the crafted
strings create inside an otherwise left-to-right dialog body, so the
full bidirectional algorithm is not needed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .datafiles import load_json
from .ndef import SSID_MAX_BYTES, BtSsp, WiFiConfig

__all__ = [
    "SLOT",
    "RLO",
    "BudgetExceededError",
    "TemplateMismatchError",
    "MessageTemplate",
    "DialogRender",
    "load_templates",
    "craft_ssid",
    "rtl_wrap",
    "visual_order",
    "render_dialog",
]

SLOT = "{SSID}"
RLO = "‮"

# explicit directional controls; crafted input must not smuggle its own
_BIDI_CONTROLS = frozenset("‪‫‬‭‮⁦⁧⁨⁩")


class BudgetExceededError(ValueError):
    """Crafted ssid does not fit the 32-byte field."""

    def __init__(self, byte_length: int):
        super().__init__(
            f"crafted ssid is {byte_length} bytes, exceeds {SSID_MAX_BYTES}"
        )
        self.byte_length = byte_length


class TemplateMismatchError(ValueError):
    """Content kind does not match the template family."""


@dataclass(frozen=True)
class MessageTemplate:
    """One confirmation dialog template.

    `type_id` is the dataset key (e.g. "WI-EN-1"); the family prefix
    before the first dash tells which content kind it renders.  The
    body and title may contain one `{SSID}` slot.
    """

    type_id: str
    title: str | None
    body: str
    positive_label: str
    negative_label: str

    @property
    def family(self) -> str:
        return self.type_id.split("-", 1)[0]


@dataclass(frozen=True)
class DialogRender:
    """A rendered dialog, in logical and display order."""

    title: str | None
    body: str
    body_visual: str
    positive_label: str
    negative_label: str
    template_id: str | None = None


def load_templates() -> dict[str, MessageTemplate]:
    """Load the dialog template set (templates.json)."""
    raw = load_json("templates.json")
    templates = {}
    for type_id, entry in raw.items():
        templates[type_id] = MessageTemplate(
            type_id=type_id,
            title=entry["title"],
            body=entry["body"],
            positive_label=entry["positive"],
            negative_label=entry["negative"],
        )
    return templates


def craft_ssid(text: str) -> bytes:
    """UTF-8 encode an ssid, enforcing the 32-byte field budget."""
    encoded = text.encode("utf-8")
    if len(encoded) > SSID_MAX_BYTES:
        raise BudgetExceededError(len(encoded))
    return encoded


def rtl_wrap(visual_text: str) -> bytes:
    """Craft an ssid that displays as `visual_text` inside LTR context.

    The ssid is U+202E followed by the codepoints of `visual_text`
    reversed; the display engine reverses them back.  Input containing
    its own directional controls is rejected.
    """
    if any(ch in _BIDI_CONTROLS for ch in visual_text):
        raise ValueError("visual text must not contain directional controls")
    return craft_ssid(RLO + visual_text[::-1])


def visual_order(logical: str) -> str:
    """Display order of a logical string under the small bidi model.

    Text before the first U+202E is unchanged; everything after it is
    emitted reversed, with override characters removed.  A string with
    no override is returned as is.
    """
    idx = logical.find(RLO)
    if idx < 0:
        return logical
    run = logical[idx + 1 :].replace(RLO, "")
    return logical[:idx] + run[::-1]


def render_dialog(
    template: MessageTemplate, content: WiFiConfig | BtSsp
) -> DialogRender:
    """Render a dialog for a Wi-Fi or Bluetooth confirmation.

    Only the slot is substituted; every other template byte passes
    through unchanged.  The template family must match the content
    kind, otherwise TemplateMismatchError is raised.
    """
    if isinstance(content, WiFiConfig):
        if template.family != "WI":
            raise TemplateMismatchError(
                f"{template.type_id} cannot render Wi-Fi credentials"
            )
        value = content.ssid_text
    elif isinstance(content, BtSsp):
        if template.family != "BT":
            raise TemplateMismatchError(
                f"{template.type_id} cannot render a pairing request"
            )
        value = content.name
    else:
        raise TemplateMismatchError(
            f"no dialog family renders {type(content).__name__}"
        )
    title = template.title.replace(SLOT, value) if template.title is not None else None
    body = template.body.replace(SLOT, value)
    return DialogRender(
        title=title,
        body=body,
        body_visual=visual_order(body),
        positive_label=template.positive_label,
        negative_label=template.negative_label,
        template_id=template.type_id,
    )
