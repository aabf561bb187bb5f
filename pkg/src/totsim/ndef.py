"""NDEF message codec and tag content model.

Implements the NFC Forum NDEF 1.0 wire format: messages are sequences
of records, each with a flag/TNF header byte, type, optional id, and
payload.  Short records (SR) use a 1-byte payload length; long records
use 4 bytes big-endian.  On top of the record layer sits a small
content model (`TagContent`) covering the tag types an NFC-equipped
Android phone acts on: URIs, Wi-Fi credentials, Bluetooth pairing
blobs, app launch records, email, app intents, and plain text.

Encoding notes, where the full standards were simplified on purpose:

* Wi-Fi credentials use the `application/vnd.wfa.wsc` MIME type with a
  minimal TLV payload: tag 0x01 ssid, tag 0x02 auth mode (one byte),
  tag 0x03 key.  Unknown tags are skipped on decode.
* Bluetooth pairing uses `application/vnd.bluetooth.ep.oob`: a 2-byte
  little-endian total length, 6-byte device address, then EIR blocks
  (only 0x09, complete local name, is produced).
* Email is carried as a `mailto:` URI record with percent-encoded
  subject/body query parameters, matching how handsets dispatch it.
* An app intent is carried as a MIME record `application/vnd.<app>`.
* The instant-launch variant of a URI is marked by the record id field
  (`b"instant"`); the URI payload itself is unchanged.
"""

from __future__ import annotations

import binascii
import struct
import urllib.parse
from dataclasses import dataclass
from enum import IntEnum
from typing import Union

__all__ = [
    "Tnf",
    "NdefError",
    "OversizedFieldError",
    "NdefDecodeError",
    "TruncatedError",
    "BadFlagsError",
    "BadTnfError",
    "NdefRecord",
    "NdefMessage",
    "encode_message",
    "decode_message",
    "Uri",
    "WifiAuth",
    "WiFiConfig",
    "BtSsp",
    "AndroidApp",
    "Email",
    "Intent",
    "Text",
    "UnknownType",
    "TagContent",
    "SSID_MAX_BYTES",
    "URI_PREFIXES",
    "record_for",
    "message_for",
    "content_of",
    "contents_of",
    "message_to_hex",
    "message_from_hex",
]


class Tnf(IntEnum):
    """Type Name Format values (header bits 0-2)."""

    EMPTY = 0
    WELL_KNOWN = 1
    MIME = 2
    ABSOLUTE_URI = 3
    EXTERNAL = 4
    UNKNOWN = 5
    UNCHANGED = 6


# header flag bits
_MB = 0x80
_ME = 0x40
_CF = 0x20
_SR = 0x10
_IL = 0x08
_TNF_MASK = 0x07


class NdefError(ValueError):
    """Base class for codec errors."""


class OversizedFieldError(NdefError):
    """A record field exceeds what its length field can express."""


class NdefDecodeError(NdefError):
    """Parse failure; `offset` is the byte position where it was detected."""

    def __init__(self, offset: int, reason: str):
        super().__init__(f"offset {offset}: {reason}")
        self.offset = offset
        self.reason = reason


class TruncatedError(NdefDecodeError):
    """Input ended before the message structure was complete."""


class BadFlagsError(NdefDecodeError):
    """Header flags are inconsistent with the record's position."""


class BadTnfError(NdefDecodeError):
    """Reserved or contextually invalid TNF value."""


@dataclass(frozen=True)
class NdefRecord:
    """One NDEF record.

    MB/ME/SR flags are derived at encode time from record position and
    payload size, so they are not stored.  `chunked` carries the CF
    flag for records decoded from chunked messages; the builders in
    this module never produce chunked records.
    """

    tnf: int
    type: bytes = b""
    payload: bytes = b""
    id: bytes | None = None
    chunked: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.tnf <= 6:
            raise NdefError(f"tnf must be 0..6, got {self.tnf}")
        if len(self.type) > 0xFF:
            raise OversizedFieldError(f"type is {len(self.type)} bytes, max 255")
        if self.id is not None and len(self.id) > 0xFF:
            raise OversizedFieldError(f"id is {len(self.id)} bytes, max 255")
        if len(self.payload) > 0xFFFFFFFF:
            raise OversizedFieldError("payload exceeds 2**32 - 1 bytes")
        if self.tnf == Tnf.EMPTY:
            if self.type or self.payload or self.id is not None:
                raise NdefError("empty-tnf record must have no type, id, or payload")
            if self.chunked:
                raise NdefError("empty-tnf record cannot be chunked")
        if self.tnf == Tnf.UNCHANGED and self.type:
            raise NdefError("unchanged-tnf record must have an empty type")

    @property
    def short_record(self) -> bool:
        return len(self.payload) < 0x100


@dataclass(frozen=True)
class NdefMessage:
    """An ordered, non-empty sequence of records."""

    records: tuple[NdefRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise NdefError("message must contain at least one record")
        for i, rec in enumerate(self.records):
            prev_chunked = i > 0 and self.records[i - 1].chunked
            if rec.tnf == Tnf.UNCHANGED and not prev_chunked:
                raise NdefError(f"record {i}: unchanged tnf without a preceding chunk")
            if prev_chunked and rec.tnf != Tnf.UNCHANGED:
                raise NdefError(f"record {i}: chunk continuation must use unchanged tnf")
        if self.records[-1].chunked:
            raise NdefError("message ends with an unterminated chunk")


def encode_message(message: NdefMessage) -> bytes:
    """Serialize a message to wire bytes.

    SR is chosen per record (payload < 256 bytes), IL iff the record
    has an id, MB on the first record and ME on the last.
    """
    out = bytearray()
    last = len(message.records) - 1
    for i, rec in enumerate(message.records):
        header = rec.tnf
        if i == 0:
            header |= _MB
        if i == last:
            header |= _ME
        if rec.chunked:
            header |= _CF
        if rec.short_record:
            header |= _SR
        if rec.id is not None:
            header |= _IL
        out.append(header)
        out.append(len(rec.type))
        if rec.short_record:
            out.append(len(rec.payload))
        else:
            out += struct.pack(">I", len(rec.payload))
        if rec.id is not None:
            out.append(len(rec.id))
        out += rec.type
        if rec.id is not None:
            out += rec.id
        out += rec.payload
    return bytes(out)


def decode_message(data: bytes) -> NdefMessage:
    """Parse wire bytes into a message.

    Total over arbitrary input: returns a message or raises a
    `NdefDecodeError` subclass carrying the failing byte offset.
    Long-form encodings of small payloads are accepted (and normalize
    to short form on re-encode).
    """
    n = len(data)
    records: list[NdefRecord] = []
    offset = 0
    prev_chunked = False

    def take(count: int, what: str) -> bytes:
        nonlocal offset
        if offset + count > n:
            raise TruncatedError(n, f"input ended while reading {what}")
        chunk = data[offset : offset + count]
        offset += count
        return chunk

    while True:
        if offset >= n:
            raise TruncatedError(n, "input ended before a terminal (ME) record")
        header_at = offset
        header = take(1, "record header")[0]
        tnf = header & _TNF_MASK
        if tnf == 7:
            raise BadTnfError(header_at, "tnf 7 is reserved")
        first = not records
        if first and not header & _MB:
            raise BadFlagsError(header_at, "first record must set MB")
        if not first and header & _MB:
            raise BadFlagsError(header_at, "MB set on a non-first record")
        if header & _CF and header & _ME:
            raise BadFlagsError(header_at, "a chunk cannot be the terminal record")
        if tnf == Tnf.UNCHANGED and not prev_chunked:
            raise BadTnfError(header_at, "unchanged tnf without a preceding chunk")
        if prev_chunked and tnf != Tnf.UNCHANGED:
            raise BadFlagsError(header_at, "chunk continuation must use unchanged tnf")

        type_len = take(1, "type length")[0]
        if header & _SR:
            payload_len = take(1, "payload length")[0]
        else:
            payload_len = struct.unpack(">I", take(4, "payload length"))[0]
        id_len = take(1, "id length")[0] if header & _IL else None
        rec_type = take(type_len, "type")
        rec_id = take(id_len, "id") if id_len is not None else None
        payload = take(payload_len, "payload")

        try:
            records.append(
                NdefRecord(tnf, rec_type, payload, rec_id, chunked=bool(header & _CF))
            )
        except NdefError as exc:
            raise BadFlagsError(header_at, str(exc)) from exc
        prev_chunked = bool(header & _CF)
        if header & _ME:
            break

    if offset != n:
        raise BadFlagsError(offset, "trailing bytes after the terminal record")
    return NdefMessage(tuple(records))


def message_to_hex(message: NdefMessage) -> str:
    return binascii.hexlify(encode_message(message)).decode("ascii")


def message_from_hex(text: str) -> NdefMessage:
    """Decode from hex text; whitespace is ignored."""
    compact = "".join(text.split())
    try:
        raw = binascii.unhexlify(compact)
    except (binascii.Error, ValueError) as exc:
        raise NdefError(f"invalid hex input: {exc}") from exc
    return decode_message(raw)


# --- tag content model ------------------------------------------------

# URI record abbreviation table; payload byte 0 indexes into this.
URI_PREFIXES: tuple[str, ...] = (
    "",
    "http://www.",
    "https://www.",
    "http://",
    "https://",
    "tel:",
    "mailto:",
    "ftp://anonymous:anonymous@",
    "ftp://ftp.",
    "ftps://",
    "sftp://",
    "smb://",
    "nfs://",
    "ftp://",
    "dav://",
    "news:",
    "telnet://",
    "imap:",
    "rtsp://",
    "urn:",
    "pop:",
    "sip:",
    "sips:",
    "tftp:",
    "btspp://",
    "btl2cap://",
    "btgoep://",
    "tcpobex://",
    "irdaobex://",
    "file://",
    "urn:epc:id:",
    "urn:epc:tag:",
    "urn:epc:pat:",
    "urn:epc:raw:",
    "urn:epc:",
    "urn:nfc:",
)

SSID_MAX_BYTES = 32  # IEEE 802.11 SSID length ceiling

_TYPE_URI = b"U"
_TYPE_TEXT = b"T"
_MIME_WIFI = b"application/vnd.wfa.wsc"
_MIME_BT_OOB = b"application/vnd.bluetooth.ep.oob"
_MIME_VND = b"application/vnd."
_EXT_ANDROID_PKG = b"android.com:pkg"
_INSTANT_ID = b"instant"
_RESERVED_APPS = ("wfa.wsc", "bluetooth.ep.oob")


@dataclass(frozen=True)
class Uri:
    """A web or scheme URI; `instant` marks an instant-launch URL."""

    url: str
    instant: bool = False


class WifiAuth(IntEnum):
    OPEN = 0
    WEP = 1
    WPA_PSK = 2
    WPA2_PSK = 3


@dataclass(frozen=True)
class WiFiConfig:
    """Access point credentials; the ssid is raw bytes, at most 32."""

    ssid: bytes
    auth: WifiAuth = WifiAuth.WPA2_PSK
    key: str = ""

    def __post_init__(self) -> None:
        if len(self.ssid) > SSID_MAX_BYTES:
            raise NdefError(
                f"ssid is {len(self.ssid)} bytes, max {SSID_MAX_BYTES}"
            )
        self.ssid.decode("utf-8")  # must be valid UTF-8; raises otherwise
        object.__setattr__(self, "auth", WifiAuth(self.auth))

    @property
    def ssid_text(self) -> str:
        return self.ssid.decode("utf-8")


@dataclass(frozen=True)
class BtSsp:
    """Bluetooth secure simple pairing handover blob."""

    mac: bytes
    name: str

    def __post_init__(self) -> None:
        if len(self.mac) != 6:
            raise NdefError(f"mac must be 6 bytes, got {len(self.mac)}")
        if len(self.name.encode("utf-8")) > 0xF8:
            raise NdefError("device name too long for an EIR block")


@dataclass(frozen=True)
class AndroidApp:
    """App launch record (external type android.com:pkg)."""

    package: str


@dataclass(frozen=True)
class Email:
    to: str
    subject: str = ""
    body: str = ""


@dataclass(frozen=True)
class Intent:
    """App-directed intent, carried as MIME application/vnd.<target_app>."""

    target_app: str
    payload: str = ""

    def __post_init__(self) -> None:
        if self.target_app in _RESERVED_APPS or not self.target_app:
            raise NdefError(f"target_app {self.target_app!r} is reserved or empty")


@dataclass(frozen=True)
class Text:
    lang: str = "en"
    body: str = ""

    def __post_init__(self) -> None:
        if not 0 < len(self.lang.encode("ascii")) <= 0x3F:
            raise NdefError("language code must be 1..63 ASCII bytes")


@dataclass(frozen=True)
class UnknownType:
    """Fallback classification for records this model does not cover."""

    tnf: int
    type: bytes = b""


TagContent = Union[Uri, WiFiConfig, BtSsp, AndroidApp, Email, Intent, Text]


def _encode_uri_payload(url: str) -> bytes:
    code = 0
    rest = url
    best = 0
    for i, prefix in enumerate(URI_PREFIXES):
        if i and url.startswith(prefix) and len(prefix) > best:
            code, rest, best = i, url[len(prefix) :], len(prefix)
    return bytes([code]) + rest.encode("utf-8")


def _decode_uri_payload(payload: bytes) -> str:
    if not payload:
        raise NdefError("uri payload is empty")
    code = payload[0]
    # out-of-range abbreviation codes read as "no prefix"
    prefix = URI_PREFIXES[code] if code < len(URI_PREFIXES) else ""
    return prefix + payload[1:].decode("utf-8")


def _mailto_for(email: Email) -> str:
    params = []
    if email.subject:
        params.append("subject=" + urllib.parse.quote(email.subject, safe=""))
    if email.body:
        params.append("body=" + urllib.parse.quote(email.body, safe=""))
    query = "?" + "&".join(params) if params else ""
    to = urllib.parse.quote(email.to, safe="@.-_+")
    return f"mailto:{to}{query}"


def _email_from_mailto(url: str) -> Email:
    rest = url[len("mailto:") :]
    to, _, query = rest.partition("?")
    fields = urllib.parse.parse_qs(query, keep_blank_values=True)
    return Email(
        to=urllib.parse.unquote(to),
        subject=fields.get("subject", [""])[0],
        body=fields.get("body", [""])[0],
    )


def _encode_wifi_payload(cfg: WiFiConfig) -> bytes:
    out = bytearray()
    out += bytes([0x01, len(cfg.ssid)]) + cfg.ssid
    out += bytes([0x02, 1, int(cfg.auth)])
    key = cfg.key.encode("utf-8")
    if key:
        if len(key) > 0xFF:
            raise NdefError("network key too long")
        out += bytes([0x03, len(key)]) + key
    return bytes(out)


def _decode_wifi_payload(payload: bytes) -> WiFiConfig:
    ssid: bytes | None = None
    auth = WifiAuth.WPA2_PSK
    key = ""
    off = 0
    while off < len(payload):
        if off + 2 > len(payload):
            raise NdefError("truncated credential TLV header")
        tag, length = payload[off], payload[off + 1]
        off += 2
        if off + length > len(payload):
            raise NdefError("truncated credential TLV value")
        value = payload[off : off + length]
        off += length
        if tag == 0x01:
            ssid = value
        elif tag == 0x02:
            if length != 1:
                raise NdefError("auth TLV must be one byte")
            auth = WifiAuth(value[0])
        elif tag == 0x03:
            key = value.decode("utf-8")
        # other tags are skipped
    if ssid is None:
        raise NdefError("credential payload has no ssid")
    return WiFiConfig(ssid=ssid, auth=auth, key=key)


def _encode_bt_payload(ssp: BtSsp) -> bytes:
    name = ssp.name.encode("utf-8")
    eir = bytes([1 + len(name), 0x09]) + name
    total = 2 + 6 + len(eir)
    return struct.pack("<H", total) + ssp.mac + eir


def _decode_bt_payload(payload: bytes) -> BtSsp:
    if len(payload) < 8:
        raise NdefError("pairing payload shorter than length + address")
    (total,) = struct.unpack("<H", payload[:2])
    if total != len(payload):
        raise NdefError("pairing payload length field mismatch")
    mac = payload[2:8]
    name = ""
    off = 8
    while off < len(payload):
        length = payload[off]
        if length == 0 or off + 1 + length > len(payload):
            raise NdefError("truncated EIR block")
        if payload[off + 1] == 0x09:
            name = payload[off + 2 : off + 1 + length].decode("utf-8")
        off += 1 + length
    return BtSsp(mac=mac, name=name)


def record_for(content: TagContent) -> NdefRecord:
    """Build the wire record for one content value."""
    if isinstance(content, Uri):
        return NdefRecord(
            Tnf.WELL_KNOWN,
            _TYPE_URI,
            _encode_uri_payload(content.url),
            id=_INSTANT_ID if content.instant else None,
        )
    if isinstance(content, Email):
        return NdefRecord(Tnf.WELL_KNOWN, _TYPE_URI, _encode_uri_payload(_mailto_for(content)))
    if isinstance(content, Text):
        lang = content.lang.encode("ascii")
        payload = bytes([len(lang)]) + lang + content.body.encode("utf-8")
        return NdefRecord(Tnf.WELL_KNOWN, _TYPE_TEXT, payload)
    if isinstance(content, WiFiConfig):
        return NdefRecord(Tnf.MIME, _MIME_WIFI, _encode_wifi_payload(content))
    if isinstance(content, BtSsp):
        return NdefRecord(Tnf.MIME, _MIME_BT_OOB, _encode_bt_payload(content))
    if isinstance(content, AndroidApp):
        return NdefRecord(Tnf.EXTERNAL, _EXT_ANDROID_PKG, content.package.encode("utf-8"))
    if isinstance(content, Intent):
        mime = _MIME_VND + content.target_app.encode("ascii")
        return NdefRecord(Tnf.MIME, mime, content.payload.encode("utf-8"))
    raise NdefError(f"cannot encode content of type {type(content).__name__}")


def message_for(*contents: TagContent) -> NdefMessage:
    """Build a single message carrying the given contents in order."""
    return NdefMessage(tuple(record_for(c) for c in contents))


def content_of(record: NdefRecord) -> TagContent | UnknownType:
    """Classify one record.

    Total: anything unrecognized, including a recognized type with a
    malformed payload, classifies as `UnknownType` rather than raising.
    """
    fallback = UnknownType(int(record.tnf), bytes(record.type))
    try:
        if record.tnf == Tnf.WELL_KNOWN and record.type == _TYPE_URI:
            url = _decode_uri_payload(record.payload)
            if url.startswith("mailto:"):
                return _email_from_mailto(url)
            return Uri(url, instant=record.id == _INSTANT_ID)
        if record.tnf == Tnf.WELL_KNOWN and record.type == _TYPE_TEXT:
            status = record.payload[0]
            lang_len = status & 0x3F
            lang = record.payload[1 : 1 + lang_len].decode("ascii")
            raw = record.payload[1 + lang_len :]
            body = raw.decode("utf-16" if status & 0x80 else "utf-8")
            return Text(lang=lang, body=body)
        if record.tnf == Tnf.MIME and record.type == _MIME_WIFI:
            return _decode_wifi_payload(record.payload)
        if record.tnf == Tnf.MIME and record.type == _MIME_BT_OOB:
            return _decode_bt_payload(record.payload)
        if record.tnf == Tnf.MIME and record.type.startswith(_MIME_VND):
            app = record.type[len(_MIME_VND) :].decode("ascii")
            return Intent(target_app=app, payload=record.payload.decode("utf-8"))
        if record.tnf == Tnf.EXTERNAL and record.type == _EXT_ANDROID_PKG:
            return AndroidApp(package=record.payload.decode("utf-8"))
        if record.tnf == Tnf.ABSOLUTE_URI:
            return Uri(record.type.decode("utf-8"))
    except (ValueError, IndexError):
        return fallback
    return fallback


def contents_of(message: NdefMessage) -> tuple[TagContent | UnknownType, ...]:
    return tuple(content_of(r) for r in message.records)
