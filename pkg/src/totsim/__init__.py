"""Deterministic simulation toolkit for NFC tag attack chains.

Layers, bottom to top: `ndef` (tag message wire format and content
model), `deception` (confirmation dialog templates and display-order
tricks), `touchscreen` (capacitive grid, injected-noise phantom
touches, plate-electrode touches), `victim` (handset profiles, read
gates, tag dispatch, user model), `totdevice` (the embedded emulator's
state machine and attack playbooks), `campaign` (seeded Monte Carlo
runs and reports), `cli` (the `tot` command).
"""

from .campaign import (
    CampaignResult,
    Counts,
    DatasetStats,
    InvalidConfigError,
    IoFailureError,
    PhantomCampaignResult,
    PhantomConfig,
    ScenarioConfig,
    ScreenModel,
    TotKind,
    config_from_dict,
    dataset_stats,
    export_report,
    load_config,
    run_campaign,
    run_phantom_campaign,
    wilson_interval,
    write_report,
)
from .deception import (
    BudgetExceededError,
    DialogRender,
    MessageTemplate,
    TemplateMismatchError,
    craft_ssid,
    load_templates,
    render_dialog,
    rtl_wrap,
    visual_order,
)
from .ndef import (
    AndroidApp,
    BtSsp,
    Email,
    Intent,
    NdefDecodeError,
    NdefError,
    NdefMessage,
    NdefRecord,
    Text,
    Tnf,
    UnknownType,
    Uri,
    WiFiConfig,
    WifiAuth,
    content_of,
    contents_of,
    decode_message,
    encode_message,
    message_for,
    message_from_hex,
    message_to_hex,
    record_for,
)
from .rng import stream
from .totdevice import (
    AppContextTrap,
    AttackTranscript,
    BtPairingTrap,
    DeceptiveMessageTrap,
    Emulator,
    PhantomAssist,
    Playbook,
    ProtocolStallError,
    ScreenDimTrap,
    SingleShot,
    run_protocol,
)
from .touchscreen import (
    AnomalyMode,
    ButtonPair,
    ElectrodeGrid,
    NoiseSignal,
    PhantomOutcome,
    Relay,
    ScatterAxis,
    SensorGrid,
    TouchProfile,
    delta_metric,
    electrical_touch,
    interference,
    phantom_attack,
    phantoms_active,
    simulate_frame,
    simulate_touch_reports,
    standard_dialog,
)
from .victim import (
    ApprovalRequested,
    AutoExecuted,
    DefensePolicy,
    DeviceProfile,
    FingerprintInfo,
    IgnoreReason,
    Ignored,
    NoTemplateError,
    ScreenState,
    UnknownDeviceError,
    UserModel,
    can_read,
    dispatch,
    fingerprint,
    load_devices,
    read_gate,
    user_decision,
)

__version__ = "0.1.0"
