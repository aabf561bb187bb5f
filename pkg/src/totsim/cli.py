"""Command line front end.

Exit codes: 0 success, 2 bad input or configuration (unknown device,
invalid scenario, oversized ssid, malformed records), 1 runtime
failure (unwritable report, missing dialog template).  The dataset
location honors the TOT_DATA_DIR environment variable.
"""

from __future__ import annotations

import functools
import json
import sys
from typing import Any

import click

from .campaign import (
    IoFailureError,
    dataset_stats,
    export_report,
    load_config,
    parse_mac,
    run_campaign,
    run_phantom_campaign,
    write_report,
)
from .deception import craft_ssid, load_templates, render_dialog, rtl_wrap
from .ndef import (
    AndroidApp,
    BtSsp,
    Email,
    Intent,
    Text,
    UnknownType,
    Uri,
    WiFiConfig,
    contents_of,
    message_for,
    message_from_hex,
    message_to_hex,
)
from .victim import NoTemplateError, UnknownDeviceError, load_devices


def _guarded(fn):
    """Map domain errors onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any):
        try:
            return fn(*args, **kwargs)
        except (IoFailureError, NoTemplateError) as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(1) from exc
        except (
            ValueError,  # InvalidConfigError, ndef errors, budget, mismatch
            UnknownDeviceError,
            FileNotFoundError,
            IsADirectoryError,
        ) as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(2) from exc

    return wrapper


@click.group()
@click.version_option(package_name="totsim", prog_name="tot")
def main() -> None:
    """Simulation toolkit for NFC tag attack chains."""


# --- ndef -------------------------------------------------------------


@main.group()
def ndef() -> None:
    """Encode and decode tag messages (hex wire format)."""


@ndef.command("encode")
@click.option("--uri", "uri_", help="URL record.")
@click.option("--instant", is_flag=True, help="Mark the URL instant-launch.")
@click.option("--text", "text_", help="Text record body.")
@click.option("--lang", default="en", show_default=True, help="Text language code.")
@click.option("--wifi-ssid", help="Wi-Fi credential record ssid.")
@click.option("--wifi-key", default="", help="Wi-Fi credential record key.")
@click.option("--bt-mac", help="Bluetooth pairing record MAC (aa:bb:cc:dd:ee:ff).")
@click.option("--bt-name", default="", help="Bluetooth pairing record device name.")
@click.option("--app", "app_", help="App launch record package name.")
@click.option("--intent-app", help="App-directed intent record target.")
@click.option("--intent-payload", default="", help="Intent record payload.")
@click.option("--email-to", help="Email compose record recipient.")
@click.option("--email-subject", default="", help="Email record subject.")
@click.option("--email-body", default="", help="Email record body.")
@_guarded
def ndef_encode(
    uri_: str | None,
    instant: bool,
    text_: str | None,
    lang: str,
    wifi_ssid: str | None,
    wifi_key: str,
    bt_mac: str | None,
    bt_name: str,
    app_: str | None,
    intent_app: str | None,
    intent_payload: str,
    email_to: str | None,
    email_subject: str,
    email_body: str,
) -> None:
    """Build one message from the given records and print it as hex."""
    contents: list[Any] = []
    if uri_ is not None:
        contents.append(Uri(uri_, instant=instant))
    if text_ is not None:
        contents.append(Text(lang=lang, body=text_))
    if wifi_ssid is not None:
        contents.append(WiFiConfig(ssid=wifi_ssid.encode("utf-8"), key=wifi_key))
    if bt_mac is not None:
        contents.append(BtSsp(mac=parse_mac(bt_mac), name=bt_name))
    if app_ is not None:
        contents.append(AndroidApp(package=app_))
    if intent_app is not None:
        contents.append(Intent(target_app=intent_app, payload=intent_payload))
    if email_to is not None:
        contents.append(Email(to=email_to, subject=email_subject, body=email_body))
    if not contents:
        raise click.UsageError("give at least one record option (see --help)")
    click.echo(message_to_hex(message_for(*contents)))


def _content_dict(content: Any) -> dict[str, Any]:
    if isinstance(content, Uri):
        return {"kind": "uri", "url": content.url, "instant": content.instant}
    if isinstance(content, Text):
        return {"kind": "text", "lang": content.lang, "body": content.body}
    if isinstance(content, WiFiConfig):
        return {
            "kind": "wifi",
            "ssid": content.ssid_text,
            "auth": content.auth.name.lower(),
            "key": content.key,
        }
    if isinstance(content, BtSsp):
        return {
            "kind": "bt",
            "mac": ":".join(f"{b:02x}" for b in content.mac),
            "name": content.name,
        }
    if isinstance(content, AndroidApp):
        return {"kind": "app", "package": content.package}
    if isinstance(content, Email):
        return {
            "kind": "email",
            "to": content.to,
            "subject": content.subject,
            "body": content.body,
        }
    if isinstance(content, Intent):
        return {
            "kind": "intent",
            "app": content.target_app,
            "payload": content.payload,
        }
    assert isinstance(content, UnknownType)
    return {
        "kind": "unknown",
        "tnf": content.tnf,
        "type": content.type.hex(),
    }


@ndef.command("decode")
@click.argument("hex_text", required=False)
@_guarded
def ndef_decode(hex_text: str | None) -> None:
    """Decode a hex message (argument or stdin) to JSON records."""
    if hex_text is None or hex_text == "-":
        hex_text = sys.stdin.read()
    message = message_from_hex(hex_text)
    records = [_content_dict(c) for c in contents_of(message)]
    click.echo(json.dumps(records, indent=2))


# --- craft ------------------------------------------------------------


@main.group()
def craft() -> None:
    """Craft deceptive ssid strings."""


@craft.command("ssid")
@click.argument("text")
@_guarded
def craft_ssid_cmd(text: str) -> None:
    """Validate TEXT against the 32-byte ssid budget and print it."""
    encoded = craft_ssid(text)
    click.echo(text)
    click.echo(f"{len(encoded)} bytes", err=True)


@craft.command("rtl")
@click.argument("text")
@click.option("--hex", "as_hex", is_flag=True, help="Print UTF-8 bytes as hex.")
@_guarded
def craft_rtl_cmd(text: str, as_hex: bool) -> None:
    """Print an ssid that displays as TEXT via a right-to-left override."""
    encoded = rtl_wrap(text)
    if as_hex:
        click.echo(encoded.hex())
    else:
        click.echo(encoded.decode("utf-8"))
    click.echo(f"{len(encoded)} bytes", err=True)


# --- render -----------------------------------------------------------


@main.command("render")
@click.option("--device", "model", required=True, help="Device model name.")
@click.option(
    "--type",
    "msg_type",
    type=click.Choice(["wifi", "bt"]),
    required=True,
    help="Confirmation dialog family.",
)
@click.option("--ssid", default="again", show_default=True, help="Wi-Fi ssid to splice in.")
@click.option("--name", default="mouse", show_default=True, help="Bluetooth device name.")
@_guarded
def render(model: str, msg_type: str, ssid: str, name: str) -> None:
    """Show the confirmation dialog a device would display."""
    devices = load_devices()
    if model not in devices:
        raise UnknownDeviceError(model)
    profile = devices[model]
    template_id = profile.wifi_msg_type if msg_type == "wifi" else profile.bt_msg_type
    if template_id is None:
        raise NoTemplateError(model, msg_type)
    template = load_templates()[template_id]
    if msg_type == "wifi":
        content: WiFiConfig | BtSsp = WiFiConfig(ssid=craft_ssid(ssid))
    else:
        content = BtSsp(mac=b"\x00\x11\x22\x33\x44\x55", name=name)
    dialog = render_dialog(template, content)
    click.echo(f"template: {template.type_id}")
    if dialog.title is not None:
        click.echo(f"title: {dialog.title}")
    click.echo(f"body: {dialog.body_visual}")
    click.echo(f"buttons: [{dialog.positive_label}] [{dialog.negative_label}]")


# --- campaigns ----------------------------------------------------------


@main.command("run")
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["json", "csv"]),
    default="json",
    show_default=True,
)
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Report file.")
@click.option(
    "--transcripts",
    type=click.Path(dir_okay=False),
    help="Also write per-encounter event transcripts (JSON lines).",
)
@_guarded
def run(scenario: str, fmt: str, output: str | None, transcripts: str | None) -> None:
    """Run the campaign described by a scenario file (TOML or JSON)."""
    config = load_config(scenario)
    sink = None
    lines: list[str] = []
    if transcripts is not None:

        def sink(model: str, encounter: int, transcript: Any) -> None:
            head = json.dumps({"model": model, "encounter": encounter})
            lines.append(head)
            lines.extend(transcript.to_json_lines().splitlines())

    result = run_campaign(config, transcript_sink=sink)
    if transcripts is not None:
        try:
            with open(transcripts, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise IoFailureError(f"cannot write transcripts: {exc}") from exc
    if output is not None:
        write_report(result, fmt, output)
    else:
        click.echo(export_report(result, fmt), nl=False)


@main.command("stats")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of text.")
@_guarded
def stats(as_json: bool) -> None:
    """Summarize the bundled device dataset."""
    summary = dataset_stats()
    if as_json:
        click.echo(
            json.dumps(
                {
                    "device_count": summary.device_count,
                    "mean_distance_cm": summary.mean_distance_cm,
                    "max_distance_cm": summary.max_distance_cm,
                    "min_distance_cm": summary.min_distance_cm,
                    "factory_enabled": summary.factory_enabled,
                },
                indent=2,
            )
        )
        return
    click.echo(f"devices: {summary.device_count}")
    click.echo(f"mean max read distance: {summary.mean_distance_cm:.2f} cm")
    click.echo(f"max read distance: {summary.max_distance_cm:.1f} cm")
    click.echo(f"min read distance: {summary.min_distance_cm:.1f} cm")
    click.echo(
        f"NFC enabled from factory: {summary.factory_enabled}"
        f" of {summary.device_count}"
    )


@main.command("phantom")
@click.option("--device", "model", required=True, help="Device model name.")
@click.option("--trials", type=int, default=None, help="Trial count (default: the device's published count).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--frequency-khz", type=float, default=None, help="Override signal frequency.")
@click.option("--amplitude-vpp", type=float, default=None, help="Override signal amplitude.")
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["json", "csv"]),
    default="json",
    show_default=True,
)
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Report file.")
@_guarded
def phantom(
    model: str,
    trials: int | None,
    seed: int,
    frequency_khz: float | None,
    amplitude_vpp: float | None,
    fmt: str,
    output: str | None,
) -> None:
    """Run noise-injection dialog trials against one device."""
    result = run_phantom_campaign(
        model,
        trials,
        seed,
        frequency_khz=frequency_khz,
        amplitude_vpp=amplitude_vpp,
    )
    if output is not None:
        write_report(result, fmt, output)
    else:
        click.echo(export_report(result, fmt), nl=False)


if __name__ == "__main__":
    main()
