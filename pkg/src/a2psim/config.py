"""Run configuration: defaults, file/flag parsing, validation, and hashing.

Config files are flat ``key = value`` text. Time-valued keys take an exact
unit suffix (ns, us, ms, s); bare integers are nanoseconds. Values are
parsed with rational arithmetic and must land on whole nanoseconds.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from fractions import Fraction

from .channel import EdcaParams
from .errors import ConfigError
from .kernel import MS, SEC, US
from .mac import FrameSizes, Scheme, SchemeBehavior, configure_scheme
from .phy import PhyProfile
from .traffic import AudioParams

_TIME_SUFFIXES = (("ns", 1), ("us", 1_000), ("µs", 1_000),
                  ("ms", 1_000_000), ("s", 1_000_000_000))


def parse_time_ns(text: str, key: str) -> int:
    raw = text.strip()
    scale = None
    for suffix, s in _TIME_SUFFIXES:
        if raw.endswith(suffix):
            raw = raw[:-len(suffix)].strip()
            scale = s
            break
    if scale is None:
        scale = 1  # bare numbers are nanoseconds
    try:
        value = Fraction(raw) * scale
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: cannot parse duration {text!r}") from None
    if value.denominator != 1:
        raise ConfigError(f"{key}: {text!r} is not a whole nanosecond count")
    if value < 0:
        raise ConfigError(f"{key}: duration must be nonnegative")
    return int(value)


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text.strip(), 10)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _parse_bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def _parse_scheme(text: str, key: str) -> Scheme:
    try:
        return Scheme(text.strip().lower())
    except ValueError:
        valid = ", ".join(s.value for s in Scheme)
        raise ConfigError(f"{key}: unknown scheme {text!r} (valid: {valid})") from None


@dataclass(frozen=True)
class RunConfig:
    scheme: Scheme = Scheme.A2P
    active: int = 8                 # initial + joining STAs
    seed: int = 1
    duration_ns: int = 30 * SEC
    n_initial: int = 8
    n_associated: int = 100

    # PHY
    bandwidth_mhz: int = 40
    mcs: int = 8
    gi_ns: int = 800
    sifs_ns: int = 16 * US
    slot_ns: int = 9 * US

    # MAC
    txop_ns: int = 2_080 * US
    ari_ns: int = 16 * US           # AP access request interval, T
    mu_edca_timer_ns: int = 40 * MS  # contention-suspension timer, Y
    ofdma_timer_ns: int = 2_088_960 * US  # Y for the static poll-all scheme
    aifsn: int = 2                  # EDCA VO access category
    ap_aifsn: int = 3               # AP polls yield one slot to station uplink
    cw_min: int = 3
    cw_max: int = 7
    retry_limit: int = 32           # voice loss is delay-mediated, not drop-mediated
    remove_unpolled_on_expiry: bool = False

    # traffic
    interval_ns: int = 5 * MS       # window/delay budget, X
    gen_window_ns: int = 1 * MS     # generation sub-window, B
    ul_samples: int = 240           # M
    ul_sample_bits: int = 24        # N
    dl_samples: int = 240           # P
    dl_sample_bits: int = 16        # Q
    header_bits: int = 160          # W
    tau_mean_ns: int = 10 * SEC
    tau_max_ns: int = 25 * SEC

    # frame byte counts
    mac_overhead_bytes: int = 30
    ack_bytes: int = 14
    bsr_bytes: int = 34
    ba_base_bytes: int = 32
    ba_per_user_bytes: int = 8
    tf_base_bytes: int = 28
    tf_per_user_bytes: int = 5

    def __post_init__(self):
        if self.active < self.n_initial:
            raise ConfigError(f"active: must be >= n_initial ({self.n_initial})")
        if self.active > self.n_associated:
            raise ConfigError(f"active: must be <= n_associated ({self.n_associated})")
        if self.duration_ns <= 0:
            raise ConfigError("duration: must be positive")
        if self.seed < 0:
            raise ConfigError("seed: must be nonnegative")
        if self.tau_mean_ns <= 0 or self.tau_max_ns <= 0:
            raise ConfigError("tau_mean/tau_max: must be positive")

    @property
    def n_joining(self) -> int:
        return self.active - self.n_initial

    def phy_profile(self) -> PhyProfile:
        return PhyProfile(bandwidth_mhz=self.bandwidth_mhz, mcs_index=self.mcs,
                          guard_interval_ns=self.gi_ns, sifs_ns=self.sifs_ns,
                          slot_ns=self.slot_ns)

    def edca_params(self) -> EdcaParams:
        try:
            return EdcaParams(aifsn=self.aifsn, cw_min=self.cw_min,
                              cw_max=self.cw_max, retry_limit=self.retry_limit)
        except ValueError as exc:
            raise ConfigError(f"edca: {exc}") from None

    def ap_edca_params(self) -> EdcaParams:
        try:
            return EdcaParams(aifsn=self.ap_aifsn, cw_min=self.cw_min,
                              cw_max=self.cw_max, retry_limit=self.retry_limit)
        except ValueError as exc:
            raise ConfigError(f"ap_aifsn: {exc}") from None

    def audio_params(self) -> AudioParams:
        return AudioParams(interval_ns=self.interval_ns,
                           gen_window_ns=self.gen_window_ns,
                           ul_samples=self.ul_samples,
                           ul_sample_bits=self.ul_sample_bits,
                           dl_samples=self.dl_samples,
                           dl_sample_bits=self.dl_sample_bits,
                           header_bits=self.header_bits)

    def frame_sizes(self) -> FrameSizes:
        return FrameSizes(mac_overhead_bytes=self.mac_overhead_bytes,
                          ack_bytes=self.ack_bytes, bsr_bytes=self.bsr_bytes,
                          ba_base_bytes=self.ba_base_bytes,
                          ba_per_user_bytes=self.ba_per_user_bytes,
                          tf_base_bytes=self.tf_base_bytes,
                          tf_per_user_bytes=self.tf_per_user_bytes)

    def behavior(self) -> SchemeBehavior:
        return configure_scheme(self.scheme,
                                mu_edca_timer_ns=self.mu_edca_timer_ns,
                                static_list_timer_ns=self.ofdma_timer_ns)

    def canonical(self) -> str:
        """Stable one-line rendering of every field except the seed."""
        parts = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name == "seed":
                continue
            v = getattr(self, f.name)
            if isinstance(v, Scheme):
                v = v.value
            parts.append(f"{f.name}={v}")
        return " ".join(parts)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]


# key -> (RunConfig field, parser)
_KEYS = {
    "scheme": ("scheme", _parse_scheme),
    "active": ("active", _parse_int),
    "seed": ("seed", _parse_int),
    "duration": ("duration_ns", parse_time_ns),
    "n_initial": ("n_initial", _parse_int),
    "n_associated": ("n_associated", _parse_int),
    "bandwidth": ("bandwidth_mhz", _parse_int),
    "mcs": ("mcs", _parse_int),
    "gi": ("gi_ns", parse_time_ns),
    "sifs": ("sifs_ns", parse_time_ns),
    "slot": ("slot_ns", parse_time_ns),
    "txop": ("txop_ns", parse_time_ns),
    "ari": ("ari_ns", parse_time_ns),
    "mu_edca_timer": ("mu_edca_timer_ns", parse_time_ns),
    "ofdma_timer": ("ofdma_timer_ns", parse_time_ns),
    "aifsn": ("aifsn", _parse_int),
    "ap_aifsn": ("ap_aifsn", _parse_int),
    "cw_min": ("cw_min", _parse_int),
    "cw_max": ("cw_max", _parse_int),
    "retry_limit": ("retry_limit", _parse_int),
    "remove_unpolled_on_expiry": ("remove_unpolled_on_expiry", _parse_bool),
    "interval": ("interval_ns", parse_time_ns),
    "gen_window": ("gen_window_ns", parse_time_ns),
    "ul_samples": ("ul_samples", _parse_int),
    "ul_sample_bits": ("ul_sample_bits", _parse_int),
    "dl_samples": ("dl_samples", _parse_int),
    "dl_sample_bits": ("dl_sample_bits", _parse_int),
    "header_bits": ("header_bits", _parse_int),
    "tau_mean": ("tau_mean_ns", parse_time_ns),
    "tau_max": ("tau_max_ns", parse_time_ns),
    "mac_overhead": ("mac_overhead_bytes", _parse_int),
    "ack_bytes": ("ack_bytes", _parse_int),
    "bsr_bytes": ("bsr_bytes", _parse_int),
    "ba_base_bytes": ("ba_base_bytes", _parse_int),
    "ba_per_user_bytes": ("ba_per_user_bytes", _parse_int),
    "tf_base_bytes": ("tf_base_bytes", _parse_int),
    "tf_per_user_bytes": ("tf_per_user_bytes", _parse_int),
}


def parse_assignments(pairs: dict[str, str]) -> dict[str, object]:
    """Convert raw key/value strings to typed RunConfig field values."""
    out: dict[str, object] = {}
    for key, raw in pairs.items():
        entry = _KEYS.get(key)
        if entry is None:
            raise ConfigError(f"{key}: unknown configuration key")
        field_name, parser = entry
        out[field_name] = parser(raw, key)
    return out


def read_config_file(path: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, value = stripped.partition("=")
            pairs[key.strip()] = value.strip()
    return pairs


def build_config(file_path: str | None = None,
                 overrides: dict[str, str] | None = None) -> RunConfig:
    """Defaults, then the config file, then explicit overrides."""
    pairs: dict[str, str] = {}
    if file_path is not None:
        pairs.update(read_config_file(file_path))
    if overrides:
        pairs.update(overrides)
    cfg = RunConfig(**parse_assignments(pairs))
    cfg.phy_profile()   # surface PHY validation errors at parse time
    cfg.edca_params()
    cfg.ap_edca_params()
    cfg.audio_params()
    return cfg


def with_updates(cfg: RunConfig, **field_values) -> RunConfig:
    return replace(cfg, **field_values)
