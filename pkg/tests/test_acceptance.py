"""Acceptance gate: one test per acceptance criterion.

Each test prints a single pass/fail line (visible under the -rA report
flag) and then asserts.  Tolerances are pinned in the constants next to
each criterion.
"""

from __future__ import annotations

import json
import time

import numpy as np

from totsim.campaign import (
    PhantomConfig,
    ScenarioConfig,
    ScreenModel,
    TotKind,
    dataset_stats,
    export_report,
    run_campaign,
    run_phantom_campaign,
)
from totsim.deception import load_templates, render_dialog, rtl_wrap, visual_order
from totsim.ndef import (
    BtSsp,
    NdefDecodeError,
    NdefMessage,
    NdefRecord,
    Tnf,
    Uri,
    WiFiConfig,
    decode_message,
    encode_message,
    message_for,
)
from totsim.rng import stream
from totsim.touchscreen import (
    NoiseSignal,
    PhantomOutcome,
    ScatterAxis,
    TouchProfile,
    delta_metric,
    phantom_attack,
    reference_touch_profile,
    simulate_touch_reports,
    standard_dialog,
)
from totsim.totdevice import (
    AppContextTrap,
    BtPairingTrap,
    DeceptiveMessageTrap,
    ScreenDimTrap,
    SingleShot,
)
from totsim.victim import DefensePolicy, UserModel


def _report(num: int, description: str, ok: bool) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {num}: {description}")
    assert ok, f"criterion {num}: {description}"


# --- criterion 1: wire-format round trip and fuzz robustness ------------

ROUND_TRIP_MESSAGES = 10_000
FUZZ_INPUTS = 100_000
C1_TIME_LIMIT_S = 30.0


def _random_record(rng: np.random.Generator) -> NdefRecord:
    if rng.random() < 0.05:
        return NdefRecord(Tnf.EMPTY)
    tnf = int(rng.choice((1, 2, 4, 5)))
    if tnf == 5:
        type_ = b""
    else:
        type_ = rng.integers(0, 256, int(rng.integers(1, 9)), dtype=np.uint8).tobytes()
    # mostly small payloads, with a slice straddling the short-record
    # boundary so both length encodings round-trip
    if rng.random() < 0.05:
        size = int(rng.integers(250, 261))
    else:
        size = int(rng.integers(0, 41))
    payload = rng.integers(0, 256, size, dtype=np.uint8).tobytes()
    id_ = None
    if rng.random() < 0.2:
        id_ = rng.integers(0, 256, int(rng.integers(0, 9)), dtype=np.uint8).tobytes()
    return NdefRecord(tnf, type_, payload, id_)


def test_criterion_1_round_trip_and_fuzz():
    started = time.perf_counter()
    rng = stream(1001)
    exact = 0
    for _ in range(ROUND_TRIP_MESSAGES):
        records = tuple(
            _random_record(rng) for _ in range(int(rng.integers(1, 4)))
        )
        message = NdefMessage(records)
        if decode_message(encode_message(message)) == message:
            exact += 1

    crash_free = 0
    base = bytearray(
        encode_message(
            message_for(Uri("http://example.com/a"), WiFiConfig(ssid=b"again"))
        )
    )
    lengths = rng.integers(0, 25, FUZZ_INPUTS // 2)
    blob = rng.integers(0, 256, int(lengths.sum()), dtype=np.uint8).tobytes()
    offsets = np.concatenate(([0], np.cumsum(lengths)))
    positions = rng.integers(0, len(base), FUZZ_INPUTS - FUZZ_INPUTS // 2)
    values = rng.integers(0, 256, FUZZ_INPUTS - FUZZ_INPUTS // 2)
    for i in range(FUZZ_INPUTS // 2):
        try:
            decode_message(blob[offsets[i]:offsets[i + 1]])
        except NdefDecodeError:
            pass
        crash_free += 1
    for pos, val in zip(positions, values):
        mutated = bytearray(base)
        mutated[pos] = val
        try:
            decode_message(bytes(mutated))
        except NdefDecodeError:
            pass
        crash_free += 1

    elapsed = time.perf_counter() - started
    _report(
        1,
        f"{exact}/{ROUND_TRIP_MESSAGES} messages round-trip field-exactly, "
        f"{crash_free}/{FUZZ_INPUTS} fuzz inputs decode without crashing "
        f"in {elapsed:.1f}s (limit {C1_TIME_LIMIT_S:.0f}s)",
        exact == ROUND_TRIP_MESSAGES
        and crash_free == FUZZ_INPUTS
        and elapsed < C1_TIME_LIMIT_S,
    )


# --- criterion 2: Δ-metric equals a brute-force scan --------------------

DELTA_VECTORS = 1_000
SENSORS = 264


def test_criterion_2_delta_metric_oracle():
    rng = stream(1002)
    matches = 0
    for _ in range(DELTA_VECTORS):
        frame = rng.integers(0, 4096, SENSORS)
        baseline = rng.integers(0, 4096, SENSORS)
        deviations = [float(f) - float(b) for f, b in zip(frame, baseline)]
        brute = max(deviations) - min(deviations)
        if delta_metric(frame, baseline) == brute:
            matches += 1
    _report(
        2,
        f"delta_metric matched the brute-force max/min scan bitwise on "
        f"{matches}/{DELTA_VECTORS} random {SENSORS}-sensor vectors",
        matches == DELTA_VECTORS,
    )


# --- criterion 3: dialog templates render byte-identically ---------------

EXPECTED_DIALOGS = {
    "WI-EN-1": ("Connect to network", "Connect to network again?", "CONNECT", "CANCEL"),
    "WI-EN-2": ("Connect", "Connect to again?", "YES", "NO"),
    "WI-EN-3": ("again", "Connct to this network?", "CONNECT", "CANCEL"),
    "BT-EN-1": (None, "Are you sure you want to pair the Bluetooth device ?", "YES", "NO"),
    "BT-EN-2": (None, "Bluetooth pairing requested. Pair?", "YES", "NO"),
    "BT-EN-3": (None, "Pair with [mouse]?", "YES", "NO"),
    "BT-EN-4": ("NFC pairing request", "Pair with the Bluetooth device ?", "Pair", "Cancel"),
    "BT-EN-5": (None, "Pair the Bluetooth device ?", "YES", "NO"),
}


def test_criterion_3_template_fidelity():
    templates = load_templates()
    wifi = WiFiConfig(ssid=b"again")
    bt = BtSsp(mac=b"\x00\x11\x22\x33\x44\x55", name="mouse")
    mismatches = []
    for type_id, expected in EXPECTED_DIALOGS.items():
        content = wifi if type_id.startswith("WI") else bt
        d = render_dialog(templates[type_id], content)
        if (d.title, d.body, d.positive_label, d.negative_label) != expected:
            mismatches.append(type_id)
    spelling_ok = (
        "Connct" in render_dialog(templates["WI-EN-3"], wifi).body
        and "[mouse]" in render_dialog(templates["BT-EN-3"], bt).body
    )
    _report(
        3,
        f"all {len(EXPECTED_DIALOGS)} dialog templates rendered byte-identically "
        f"(including the 'Connct' misspelling and bracketed device name)"
        + (f"; mismatches: {mismatches}" if mismatches else ""),
        not mismatches and len(EXPECTED_DIALOGS) == 8 and spelling_ok,
    )


# --- criterion 4: right-to-left override trick ---------------------------

RTL_SENTENCE = "Facebook app is requesting."
RTL_LOGICAL = "‮.gnitseuqer si ppa koobecaF".encode("utf-8")


def test_criterion_4_rtl_wrap():
    wrapped = rtl_wrap(RTL_SENTENCE)
    dialog = render_dialog(
        load_templates()["WI-EN-1"], WiFiConfig(ssid=wrapped)
    )
    visual = visual_order(dialog.body)
    _report(
        4,
        f"rtl_wrap produced the exact {len(RTL_LOGICAL)}-byte logical string and "
        f"the rendered dialog body displays {RTL_SENTENCE!r}",
        wrapped == RTL_LOGICAL
        and len(wrapped) == 30
        and RTL_SENTENCE in visual
        and RTL_SENTENCE in dialog.body_visual,
    )


# --- criterion 5: phantom-touch success rates ----------------------------

PHANTOM_TRIALS = 10_000
PHANTOM_SEED = 2026
RATE_TOLERANCE = 0.02
C5_TIME_LIMIT_S = 60.0
EXPECTED_RATES = {
    "Nexus 7": 18 / 30,
    "Galaxy S4": 13 / 30,
    "Xperia Z4": 20 / 30,
    "Nexus 9": 0.0,
    "AQUOS ZETA SH-04F": 0.0,
}


def test_criterion_5_phantom_rate_reproduction():
    started = time.perf_counter()
    problems = []
    for model, expected in EXPECTED_RATES.items():
        result = run_phantom_campaign(model, PHANTOM_TRIALS, seed=PHANTOM_SEED)
        if expected == 0.0:
            if result.success_rate != 0.0:
                problems.append(f"{model}: {result.success_rate:.4f} != 0")
        elif abs(result.success_rate - expected) > RATE_TOLERANCE:
            problems.append(
                f"{model}: {result.success_rate:.4f} vs {expected:.4f}"
            )
    for model in ("ARROWS NX F-05F", "Galaxy S6 edge"):
        result = run_phantom_campaign(model, PHANTOM_TRIALS, seed=PHANTOM_SEED)
        if result.wrong_button != 0:
            problems.append(f"{model}: {result.wrong_button} phantom presses")
    elapsed = time.perf_counter() - started
    _report(
        5,
        f"10k-trial phantom campaigns reproduced the measured success rates "
        f"within ±{RATE_TOLERANCE} (zero events on the immune models) "
        f"in {elapsed:.1f}s (limit {C5_TIME_LIMIT_S:.0f}s)"
        + (f"; problems: {problems}" if problems else ""),
        not problems and elapsed < C5_TIME_LIMIT_S,
    )


# --- criterion 6: dataset statistics and the range gate ------------------

MEAN_DISTANCE = 3.4
MEAN_TOLERANCE = 0.05


def test_criterion_6_dataset_stats_and_range_gate():
    stats = dataset_stats()
    campaign = run_campaign(
        ScenarioConfig(
            kind=TotKind.TOT_DEVICE,
            thickness_cm=4.0,
            playbook=DeceptiveMessageTrap("again"),
            encounters=1,
            seed=1,
        )
    )
    passed_range = stats.device_count - campaign.totals.blocked_range
    ok = (
        stats.device_count == 24
        and abs(stats.mean_distance_cm - MEAN_DISTANCE) <= MEAN_TOLERANCE
        and stats.max_distance_cm == 5.0
        and stats.min_distance_cm == 2.0
        and stats.factory_enabled == 16
        and passed_range == 7
    )
    _report(
        6,
        f"dataset: {stats.device_count} devices, mean read distance "
        f"{stats.mean_distance_cm:.2f} cm (target {MEAN_DISTANCE}±{MEAN_TOLERANCE}), "
        f"span {stats.min_distance_cm}-{stats.max_distance_cm} cm, "
        f"{stats.factory_enabled} NFC-enabled; {passed_range}/24 pass the "
        f"range gate behind 4.0 cm",
        ok,
    )


# --- criterion 7: scatter geometry ----------------------------------------

GEOMETRY_TRIALS = 10_000
ANALYTIC_WRONG = 0.15  # equal-width buttons each span 15% of the line
THREE_SIGMA = 3 * (ANALYTIC_WRONG * (1 - ANALYTIC_WRONG) / GEOMETRY_TRIALS) ** 0.5


def test_criterion_7_scatter_geometry():
    horizontal = reference_touch_profile()
    touch = (321.0, 217.0)
    reports = simulate_touch_reports(
        horizontal, NoiseSignal(90.0, 20.0), touch, 200, stream(7101)
    )
    h_phantoms = [pt for r in reports for pt in r.points[1:]]
    vertical = TouchProfile(
        susceptible=True,
        char_frequency_khz=128.2,
        min_voltage_vpp=40.0,
        scatter_axis=ScatterAxis.VERTICAL,
    )
    reports = simulate_touch_reports(
        vertical, NoiseSignal(128.2, 40.0), touch, 200, stream(7102)
    )
    v_phantoms = [pt for r in reports for pt in r.points[1:]]
    on_line = (
        bool(h_phantoms)
        and bool(v_phantoms)
        and all(pt.y == touch[1] for pt in h_phantoms)
        and all(pt.x == touch[0] for pt in v_phantoms)
    )

    dialog = standard_dialog(ScatterAxis.HORIZONTAL)
    signal = NoiseSignal(90.0, 20.0)
    wrong = sum(
        phantom_attack(horizontal, signal, dialog, stream(7103, i), max_attempts=1)
        is PhantomOutcome.WRONG_BUTTON
        for i in range(GEOMETRY_TRIALS)
    )
    simulated = wrong / GEOMETRY_TRIALS
    _report(
        7,
        f"{len(h_phantoms) + len(v_phantoms)} phantom points all sat exactly on "
        f"the touch's scatter line; simulated wrong-button rate {simulated:.4f} "
        f"vs analytic {ANALYTIC_WRONG} (3σ = {THREE_SIGMA:.4f})",
        on_line and abs(simulated - ANALYTIC_WRONG) <= THREE_SIGMA,
    )


# --- criterion 8: the approve-all defense stops everything ----------------

DEFENSE_SEED = 777
ALL_PLAYBOOKS = [
    SingleShot(Uri("http://example.com/")),
    DeceptiveMessageTrap("again"),
    AppContextTrap("com.facebook.katana", "Facebook app is requesting."),
    ScreenDimTrap("com.example.filter", "again"),
    BtPairingTrap(mac=b"\x00\x11\x22\x33\x44\x55", name="mouse"),
]


def test_criterion_8_defense_policy():
    denier = UserModel(baseline=0.0, deceptive=0.0, dimmed=0.0)
    leaks = []
    for playbook in ALL_PLAYBOOKS:
        result = run_campaign(
            ScenarioConfig(
                kind=TotKind.TOT_DEVICE,
                thickness_cm=0.0,
                playbook=playbook,
                encounters=4,
                seed=DEFENSE_SEED,
                policy=DefensePolicy.APPROVE_ALL,
                user=denier,
            )
        )
        if result.totals.successes != 0 or result.success_rate != 0.0:
            leaks.append(type(playbook).__name__)
    undefended = run_campaign(
        ScenarioConfig(
            kind=TotKind.TOT_DEVICE,
            thickness_cm=0.0,
            playbook=ALL_PLAYBOOKS[0],
            encounters=4,
            seed=DEFENSE_SEED,
            policy=DefensePolicy.OFF,
            user=denier,
        )
    )
    _report(
        8,
        f"approve-all with a denying user blocked all {len(ALL_PLAYBOOKS)} "
        f"playbooks completely"
        + (f" except {leaks}" if leaks else "")
        + f"; with the policy off the same seed auto-executed "
        f"{undefended.totals.auto_executed} URL opens",
        not leaks and undefended.totals.auto_executed > 0,
    )


# --- criterion 9: campaigns are reproducible ------------------------------


def test_criterion_9_determinism():
    config = ScenarioConfig(
        kind=TotKind.TOT_DEVICE,
        thickness_cm=2.0,
        playbook=DeceptiveMessageTrap("again"),
        encounters=6,
        seed=31337,
        screen=ScreenModel(locked_prob=0.25, asleep_prob=0.1),
        phantom=PhantomConfig(enabled=True),
    )
    first = export_report(run_campaign(config))
    second = export_report(run_campaign(config))
    bench_first = export_report(run_phantom_campaign("Galaxy S4", 500, seed=5))
    bench_second = export_report(run_phantom_campaign("Galaxy S4", 500, seed=5))
    parsed = json.loads(first)
    _report(
        9,
        f"re-running the campaign (seed {config.seed}) and the bench trials "
        f"reproduced byte-identical JSON reports "
        f"({parsed['totals']['attempted']} encounters)",
        first == second and bench_first == bench_second,
    )
