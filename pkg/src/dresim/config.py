"""Scenario configuration: flat ``key = value`` files and the evaluation presets."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .core import TimingParams
from .geometry import Arena, MobilityConfig
from .metrics import Powers
from .radio import RadioParams

PROTOCOLS = ("ierap", "nfra", "gdra", "frca1", "frca2", "dmrcp")
SINGLE_CHANNEL_ONLY = ("nfra", "dmrcp")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class ScenarioConfig:
    protocol: str
    readers: int = 100
    tags: int = 1000
    channels: int = 4
    rounds: int = 128
    seed: int = 1
    arena: Arena = field(default_factory=Arena)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    timing: TimingParams = field(default_factory=TimingParams)
    radio: RadioParams = field(default_factory=RadioParams)
    powers: Powers = field(default_factory=Powers)
    timing_profile: str = "table1"
    waiting_scope: str = "round"
    isp: bool = True
    sift_m: int = 0           # 0: use MN
    gdra_p: float = 0.5
    cw: int = 5
    share_distance: float = 0.0  # 0: twice the read range
    distance_noise: float = 0.0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.readers < 0 or self.tags < 0:
            raise ConfigError("readers and tags must be >= 0")
        if self.channels < 1:
            raise ConfigError("channels must be >= 1")
        if self.rounds < 0:
            raise ConfigError("rounds must be >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.protocol in SINGLE_CHANNEL_ONLY and self.channels != 1:
            raise ConfigError(f"{self.protocol} runs single-channel only")
        if self.timing_profile not in ("table1", "uniform"):
            raise ConfigError("timing_profile must be table1 or uniform")
        if self.waiting_scope not in ("round", "global"):
            raise ConfigError("waiting_scope must be round or global")
        if self.sift_m < 0 or self.cw < 1:
            raise ConfigError("sift_m must be >= 0 and cw >= 1")
        if not 0 < self.gdra_p <= 1:
            raise ConfigError("gdra_p must lie in (0, 1]")
        if self.share_distance < 0 or self.distance_noise < 0:
            raise ConfigError("share_distance and distance_noise must be >= 0")

    @property
    def slots(self) -> int:
        return self.timing.slots

    @property
    def effective_share_distance(self) -> float:
        return self.share_distance or 2 * self.arena.read_range

    def with_(self, **kw) -> "ScenarioConfig":
        return replace(self, **kw)


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("on", "true", "yes", "1"):
        return True
    if t in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _fmt_bool(v: bool) -> str:
    return "on" if v else "off"


# key -> (section or None, attribute, parser, formatter)
_SECTIONS = {"arena": Arena, "mobility": MobilityConfig, "timing": TimingParams,
             "radio": RadioParams, "powers": Powers}
KEYS: dict[str, tuple] = {
    "protocol": (None, "protocol", str, str),
    "readers": (None, "readers", int, str),
    "tags": (None, "tags", int, str),
    "channels": (None, "channels", int, str),
    "slots": ("timing", "slots", int, str),
    "rounds": (None, "rounds", int, str),
    "seed": (None, "seed", int, str),
    "side_x": ("arena", "side_x", float, repr),
    "side_y": ("arena", "side_y", float, repr),
    "read_range": ("arena", "read_range", float, repr),
    "interference_range": ("arena", "interference_range", float, repr),
    "mobility": ("mobility", "model", str, str),
    "speed_min": ("mobility", "speed_min", float, repr),
    "speed_max": ("mobility", "speed_max", float, repr),
    "pause": ("mobility", "pause", float, repr),
    "slot_duration": ("timing", "slot_duration", float, repr),
    "read_duration": ("timing", "read_duration", float, repr),
    "beacon_duration": ("timing", "beacon_duration", float, repr),
    "msg_a_duration": ("timing", "msg_a_duration", float, repr),
    "msg_c_duration": ("timing", "msg_c_duration", float, repr),
    "msg_sh_duration": ("timing", "msg_sh_duration", float, repr),
    "of_duration": ("timing", "of_duration", float, repr),
    "timing_profile": (None, "timing_profile", str, str),
    "p_reader": ("radio", "p_reader", float, repr),
    "g_reader": ("radio", "g_reader", float, repr),
    "k0": ("radio", "k0", float, repr),
    "path_loss_exponent": ("radio", "path_loss_exponent", float, repr),
    "distance_noise": (None, "distance_noise", float, repr),
    "p_send": ("powers", "p_send", float, repr),
    "p_receive": ("powers", "p_receive", float, repr),
    "p_read": ("powers", "p_read", float, repr),
    "waiting_scope": (None, "waiting_scope", str, str),
    "isp": (None, "isp", _bool, _fmt_bool),
    "sift_m": (None, "sift_m", int, str),
    "gdra_p": (None, "gdra_p", float, repr),
    "cw": (None, "cw", int, str),
    "share_distance": (None, "share_distance", float, repr),
}


def build_config(values: dict) -> ScenarioConfig:
    """Build a validated config from flat key values (already parsed)."""
    if "protocol" not in values:
        raise ConfigError("missing key: protocol")
    top, parts = {}, {name: {} for name in _SECTIONS}
    for key, value in values.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key: {key}")
        section, attr = KEYS[key][:2]
        (parts[section] if section else top)[attr] = value
    try:
        for name, cls in _SECTIONS.items():
            top[name] = cls(**parts[name])
        return ScenarioConfig(**top)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str) -> ScenarioConfig:
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in KEYS:
            raise ConfigError(f"unknown key: {key}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key: {key}", lineno)
        try:
            values[key] = KEYS[key][2](value)
        except ValueError:
            raise ConfigError(f"cannot parse {key} = {value!r}", lineno) from None
        lines[key] = lineno
    try:
        return build_config(values)
    except ConfigError as exc:
        # point at the offending line when the message names a key
        for key, lineno in lines.items():
            if key in str(exc) and exc.line is None:
                raise ConfigError(str(exc), lineno) from None
        raise


def render_config(cfg: ScenarioConfig) -> str:
    out = []
    for key, (section, attr, _, fmt) in KEYS.items():
        obj = getattr(cfg, section) if section else cfg
        out.append(f"{key} = {fmt(getattr(obj, attr))}")
    return "\n".join(out) + "\n"


# --- presets -----------------------------------------------------------------

PRESET_READERS = (100, 200, 300, 400)
FOUR_CHANNEL = ("ierap", "gdra", "frca1", "frca2")
SINGLE_CHANNEL = ("ierap", "nfra", "dmrcp", "frca1", "frca2", "gdra")
MOBILE_SINGLE = ("ierap", "nfra", "dmrcp")
RANDOM_WAYPOINT = MobilityConfig(model="random-waypoint")


def preset(name: str, readers: int, seed: int = 1, **overrides) -> list[ScenarioConfig]:
    """Configs for one evaluation scenario at one reader count, one per compared protocol.

    scenario1: fixed readers, 4 channels. scenario2: fixed, 1 channel.
    scenario3/4/5: mobile readers, 4-channel set plus the single-channel
    NFRA/DMRCP set (they differ only in which metric is read off).
    """
    if readers not in PRESET_READERS:
        raise ConfigError(f"preset reader count must be one of {PRESET_READERS}")
    base = dict(readers=readers, seed=seed, **overrides)
    if name == "scenario1":
        combos = [(p, 4, MobilityConfig()) for p in FOUR_CHANNEL]
    elif name == "scenario2":
        combos = [(p, 1, MobilityConfig()) for p in SINGLE_CHANNEL]
    elif name in ("scenario3", "scenario4", "scenario5"):
        combos = [(p, 4, RANDOM_WAYPOINT) for p in FOUR_CHANNEL]
        combos += [(p, 1, RANDOM_WAYPOINT) for p in MOBILE_SINGLE]
    else:
        raise ConfigError(f"unknown preset {name!r}")
    return [ScenarioConfig(protocol=p, channels=f, mobility=m, **base) for p, f, m in combos]


PRESETS = ("scenario1", "scenario2", "scenario3", "scenario4", "scenario5")
