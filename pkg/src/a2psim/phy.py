"""HE PHY timing arithmetic: per-RU rates, RU counts, frame airtimes.

Rates are derived from the 11ax MCS ladder (modulation bits x coding rate)
applied to the data-subcarrier count of the resource unit, and airtime is
always a whole number of OFDM symbols on top of the preamble. Only 26-tone
RUs are modelled for multi-user allocation; control frames and single-user
data go over the full channel width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import ConfigError

SYMBOL_BASE_NS = 12_800  # HE data symbol before guard interval

# (modulation bits per subcarrier, coding rate numerator, denominator)
MCS_TABLE: tuple[tuple[int, int, int], ...] = (
    (1, 1, 2),   # 0: BPSK 1/2
    (2, 1, 2),   # 1: QPSK 1/2
    (2, 3, 4),   # 2: QPSK 3/4
    (4, 1, 2),   # 3: 16-QAM 1/2
    (4, 3, 4),   # 4: 16-QAM 3/4
    (6, 2, 3),   # 5: 64-QAM 2/3
    (6, 3, 4),   # 6: 64-QAM 3/4
    (6, 5, 6),   # 7: 64-QAM 5/6
    (8, 3, 4),   # 8: 256-QAM 3/4
    (8, 5, 6),   # 9: 256-QAM 5/6
    (10, 3, 4),  # 10: 1024-QAM 3/4
    (10, 5, 6),  # 11: 1024-QAM 5/6
)

RU26_DATA_SUBCARRIERS = 24  # 26 tones = 24 data + 2 pilot

# data subcarriers of the RU spanning the whole channel (242/484/996/2x996)
FULL_BAND_DATA_SUBCARRIERS = {20: 234, 40: 468, 80: 980, 160: 1960}

# how many 26-tone RUs fit per channel width
MAX_26TONE_RUS = {20: 9, 40: 18, 80: 37, 160: 74}

VALID_BANDWIDTHS = (20, 40, 80, 160)
VALID_GUARD_INTERVALS = (800, 1600, 3200)


class PreambleKind(Enum):
    LEGACY = "legacy"
    HE_SU = "he_su"
    HE_TB = "he_tb"
    HE_MU = "he_mu"


@dataclass(frozen=True)
class PhyProfile:
    bandwidth_mhz: int
    mcs_index: int
    guard_interval_ns: int
    ru_tones: int = 26
    sifs_ns: int = 16_000
    slot_ns: int = 9_000
    legacy_preamble_ns: int = 20_000
    he_su_preamble_ns: int = 32_000
    he_tb_preamble_ns: int = 44_000
    he_mu_preamble_ns: int = 44_000

    def __post_init__(self) -> None:
        if self.bandwidth_mhz not in VALID_BANDWIDTHS:
            raise ConfigError(f"bandwidth: {self.bandwidth_mhz} MHz not in {VALID_BANDWIDTHS}")
        if not 0 <= self.mcs_index < len(MCS_TABLE):
            raise ConfigError(f"mcs: index {self.mcs_index} outside 0..{len(MCS_TABLE) - 1}")
        if self.guard_interval_ns not in VALID_GUARD_INTERVALS:
            raise ConfigError(
                f"guard_interval: {self.guard_interval_ns} ns not in {VALID_GUARD_INTERVALS}")
        if self.ru_tones != 26:
            raise ConfigError(f"ru_tones: only 26-tone RUs supported, got {self.ru_tones}")

    @property
    def symbol_ns(self) -> int:
        return SYMBOL_BASE_NS + self.guard_interval_ns

    def preamble_ns(self, kind: PreambleKind) -> int:
        return {
            PreambleKind.LEGACY: self.legacy_preamble_ns,
            PreambleKind.HE_SU: self.he_su_preamble_ns,
            PreambleKind.HE_TB: self.he_tb_preamble_ns,
            PreambleKind.HE_MU: self.he_mu_preamble_ns,
        }[kind]


@dataclass(frozen=True)
class AirtimeBreakdown:
    preamble_ns: int
    payload_symbols: int
    total_ns: int


def max_rus(bandwidth_mhz: int, ru_tones: int = 26) -> int:
    """Number of 26-tone RUs usable for simultaneous UL allocation."""
    if ru_tones != 26:
        raise ConfigError(f"ru_tones: only 26-tone RUs supported, got {ru_tones}")
    try:
        return MAX_26TONE_RUS[bandwidth_mhz]
    except KeyError:
        raise ConfigError(f"bandwidth: {bandwidth_mhz} MHz not in {VALID_BANDWIDTHS}") from None


def _bits_for(subcarriers: int, mcs_index: int) -> int:
    if not 0 <= mcs_index < len(MCS_TABLE):
        raise ConfigError(f"mcs: index {mcs_index} outside 0..{len(MCS_TABLE) - 1}")
    mod_bits, num, den = MCS_TABLE[mcs_index]
    bits = subcarriers * mod_bits * num
    if bits % den:
        raise ValueError(f"non-integral bits per symbol for mcs {mcs_index}")
    return bits // den


def bits_per_symbol(ru_tones: int, mcs_index: int) -> int:
    """Data bits carried by one OFDM symbol on the given RU size."""
    if ru_tones != 26:
        raise ConfigError(f"ru_tones: only 26-tone RUs supported, got {ru_tones}")
    return _bits_for(RU26_DATA_SUBCARRIERS, mcs_index)


def full_band_bits_per_symbol(bandwidth_mhz: int, mcs_index: int) -> int:
    """Data bits per symbol when a single PPDU spans the whole channel."""
    try:
        subcarriers = FULL_BAND_DATA_SUBCARRIERS[bandwidth_mhz]
    except KeyError:
        raise ConfigError(f"bandwidth: {bandwidth_mhz} MHz not in {VALID_BANDWIDTHS}") from None
    return _bits_for(subcarriers, mcs_index)


def _airtime(frame_bytes: int, per_symbol_bits: int, preamble_ns: int,
             symbol_ns: int) -> AirtimeBreakdown:
    if frame_bytes <= 0:
        raise ValueError(f"frame_bytes must be positive, got {frame_bytes}")
    symbols = math.ceil(frame_bytes * 8 / per_symbol_bits)
    return AirtimeBreakdown(preamble_ns, symbols, preamble_ns + symbols * symbol_ns)


def frame_airtime(frame_bytes: int, ru_tones: int, profile: PhyProfile,
                  preamble: PreambleKind) -> AirtimeBreakdown:
    """Airtime of a frame sent on one RU at the profile's MCS."""
    return _airtime(frame_bytes, bits_per_symbol(ru_tones, profile.mcs_index),
                    profile.preamble_ns(preamble), profile.symbol_ns)


def full_band_airtime(frame_bytes: int, profile: PhyProfile, preamble: PreambleKind,
                      mcs_index: int | None = None) -> AirtimeBreakdown:
    """Airtime of a frame spanning the whole channel; mcs_index=0 gives the basic rate."""
    mcs = profile.mcs_index if mcs_index is None else mcs_index
    return _airtime(frame_bytes, full_band_bits_per_symbol(profile.bandwidth_mhz, mcs),
                    profile.preamble_ns(preamble), profile.symbol_ns)


def stream_bitrate(samples: int, resolution_bits: int, header_bits: int,
                   interval_ms: int):
    """Application bitrate in bit/s of one packet per interval; exact arithmetic."""
    rate = Fraction(1000 * (samples * resolution_bits + header_bits), interval_ms)
    return int(rate) if rate.denominator == 1 else rate
