"""Dialog template fidelity and display-order crafting tests.

The template strings below are frozen oracles, spelled out by hand
(including the vendor's "Connct" misspelling and trailing " ?"
spacing), so dataset drift or rendering changes fail loudly.
"""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from totsim.deception import (
    RLO,
    BudgetExceededError,
    TemplateMismatchError,
    craft_ssid,
    load_templates,
    render_dialog,
    rtl_wrap,
    visual_order,
)
from totsim.ndef import BtSsp, WiFiConfig

MAC = bytes.fromhex("001122334455")

# (template id, title, body, positive, negative) rendered for
# ssid "again" / device name "mouse"
EXPECTED_RENDERS = [
    ("WI-EN-1", "Connect to network", "Connect to network again?", "CONNECT", "CANCEL"),
    ("WI-EN-2", "Connect", "Connect to again?", "YES", "NO"),
    ("WI-EN-3", "again", "Connct to this network?", "CONNECT", "CANCEL"),
    ("BT-EN-1", None, "Are you sure you want to pair the Bluetooth device ?", "YES", "NO"),
    ("BT-EN-2", None, "Bluetooth pairing requested. Pair?", "YES", "NO"),
    ("BT-EN-3", None, "Pair with [mouse]?", "YES", "NO"),
    ("BT-EN-4", "NFC pairing request", "Pair with the Bluetooth device ?", "Pair", "Cancel"),
    ("BT-EN-5", None, "Pair the Bluetooth device ?", "YES", "NO"),
]


class TestTemplates:
    def test_exactly_eight_templates(self):
        templates = load_templates()
        assert sorted(templates) == sorted(t[0] for t in EXPECTED_RENDERS)
        assert sum(1 for t in templates.values() if t.family == "WI") == 3
        assert sum(1 for t in templates.values() if t.family == "BT") == 5

    @pytest.mark.parametrize(
        "type_id,title,body,positive,negative",
        EXPECTED_RENDERS,
        ids=[t[0] for t in EXPECTED_RENDERS],
    )
    def test_render_is_byte_identical(self, type_id, title, body, positive, negative):
        template = load_templates()[type_id]
        if type_id.startswith("WI"):
            content: WiFiConfig | BtSsp = WiFiConfig(ssid=b"again")
        else:
            content = BtSsp(mac=MAC, name="mouse")
        dialog = render_dialog(template, content)
        assert dialog.title == title
        assert dialog.body == body
        assert dialog.positive_label == positive
        assert dialog.negative_label == negative
        assert dialog.template_id == type_id

    def test_family_mismatch_rejected(self):
        templates = load_templates()
        with pytest.raises(TemplateMismatchError):
            render_dialog(templates["WI-EN-1"], BtSsp(mac=MAC, name="x"))
        with pytest.raises(TemplateMismatchError):
            render_dialog(templates["BT-EN-3"], WiFiConfig(ssid=b"x"))

    def test_plain_body_has_identity_visual_order(self):
        dialog = render_dialog(load_templates()["WI-EN-1"], WiFiConfig(ssid=b"again"))
        assert dialog.body_visual == dialog.body


class TestCraftSsid:
    def test_fits_budget(self):
        assert craft_ssid("again") == b"again"
        assert craft_ssid("x" * 32) == b"x" * 32

    def test_budget_counts_bytes_not_characters(self):
        craft_ssid("ア" * 10)  # 30 bytes
        with pytest.raises(BudgetExceededError) as err:
            craft_ssid("ア" * 11)  # 33 bytes
        assert err.value.byte_length == 33

    def test_over_budget(self):
        with pytest.raises(BudgetExceededError):
            craft_ssid("x" * 33)


class TestRtlWrap:
    def test_known_sentence_is_30_bytes(self):
        crafted = rtl_wrap("Facebook app is requesting.")
        assert crafted == "‮.gnitseuqer si ppa koobecaF".encode("utf-8")
        assert len(crafted) == 30

    def test_round_trips_through_visual_order(self):
        crafted = rtl_wrap("Free Coffee Here").decode("utf-8")
        assert visual_order(crafted) == "Free Coffee Here"

    def test_rejects_embedded_controls(self):
        with pytest.raises(ValueError):
            rtl_wrap("sneaky‮text")
        with pytest.raises(ValueError):
            rtl_wrap("isolate⁦text")

    def test_budget_still_applies(self):
        with pytest.raises(BudgetExceededError):
            rtl_wrap("a" * 32)  # override adds 3 bytes

    @given(st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=29))
    def test_wrap_then_display_is_identity(self, text):
        # 29 ASCII bytes plus the 3-byte override fills the budget exactly
        assert visual_order(rtl_wrap(text).decode("utf-8")) == text


class TestVisualOrder:
    def test_no_override_is_identity(self):
        assert visual_order("Connect to network again?") == "Connect to network again?"

    def test_prefix_kept_suffix_reversed(self):
        assert visual_order("ab" + RLO + "dc") == "abcd"

    def test_later_overrides_are_stripped(self):
        assert visual_order("x" + RLO + "c" + RLO + "ba") == "xabc"

    def test_override_first_reverses_everything(self):
        assert visual_order(RLO + "cba") == "abc"


class TestForgedDialog:
    def test_wifi_body_displays_attacker_sentence(self):
        ssid = rtl_wrap("Facebook app is requesting.")
        dialog = render_dialog(
            load_templates()["WI-EN-1"], WiFiConfig(ssid=ssid)
        )
        assert dialog.body == (
            "Connect to network ‮.gnitseuqer si ppa koobecaF?"
        )
        assert dialog.body_visual == (
            "Connect to network ?Facebook app is requesting."
        )
        assert "Facebook app is requesting." in dialog.body_visual

    def test_title_slot_renders_crafted_text(self):
        ssid = rtl_wrap("tap CONNECT to continue")
        dialog = render_dialog(load_templates()["WI-EN-3"], WiFiConfig(ssid=ssid))
        assert visual_order(dialog.title) == "tap CONNECT to continue"
        assert dialog.body == "Connct to this network?"

    def test_bt_name_slot(self):
        dialog = render_dialog(
            load_templates()["BT-EN-3"], BtSsp(mac=MAC, name="AirPods")
        )
        assert dialog.body == "Pair with [AirPods]?"
