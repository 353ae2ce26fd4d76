"""Wires one complete run: kernel, channel, MACs, traffic, and the ledger."""

from __future__ import annotations

from .channel import Channel
from .config import RunConfig
from .errors import ConfigError
from .kernel import Simulator, TraceLog, rng_stream
from .mac import AP_ID, ApMac, FrameAirtimes, StaMac
from .metrics import ON_TIME, PacketLedger, RunSummary
from .phy import max_rus
from .traffic import (MixServer, PacketSource, UlPacket, build_gen_map,
                      build_schedules, build_topology, expected_by_window)


class Simulation:
    """One configured BSS run; construct, then call run() exactly once."""

    def __init__(self, cfg: RunConfig, *, trace: TraceLog | None = None):
        self.cfg = cfg
        self.trace = trace
        profile = cfg.phy_profile()
        behavior = cfg.behavior()
        audio = cfg.audio_params()
        self.airtimes = FrameAirtimes(profile, cfg.frame_sizes())
        self.n_rus = max_rus(cfg.bandwidth_mhz, profile.ru_tones)
        self._check_feasibility(audio.ul_bytes, audio.dl_bytes)

        self.sim = Simulator()
        self.channel = Channel(self.sim, sifs_ns=cfg.sifs_ns, slot_ns=cfg.slot_ns,
                               rng=rng_stream(cfg.seed, "backoff"), trace=trace)
        self.ledger = PacketLedger(cfg.interval_ns)

        self.ap = ApMac(self.sim, self.channel, behavior=behavior,
                        airtimes=self.airtimes, edca=cfg.ap_edca_params(),
                        ari_ns=cfg.ari_ns, txop_ns=cfg.txop_ns, max_rus=self.n_rus,
                        deliver_ul=self._deliver_ul,
                        record_dl_sent=self.ledger.record_dl_sent,
                        record_dl_lost=self.ledger.record_dl_lost,
                        remove_unpolled_on_expiry=cfg.remove_unpolled_on_expiry,
                        trace=trace)
        self.stas = {
            sta_id: StaMac(self.sim, self.channel, sta_id, behavior=behavior,
                           airtimes=self.airtimes, edca=cfg.edca_params(),
                           txop_ns=cfg.txop_ns, deliver_ul=self._deliver_ul,
                           drop_ul=self.ledger.drop, trace=trace)
            for sta_id in range(1, cfg.n_associated + 1)
        }
        for sta in self.stas.values():
            sta.ap = self.ap
        self.ap.register_stas(self.stas)
        if behavior.static_list:
            self.ap.preload_polling_list(list(self.stas), now=0)

        initial, joining = build_topology(rng_stream(cfg.seed, "topology"),
                                          cfg.n_associated, cfg.n_initial,
                                          cfg.n_joining)
        traffic_rng = rng_stream(cfg.seed, "traffic")
        self.periods = build_schedules(traffic_rng, initial, joining, audio,
                                       cfg.duration_ns, cfg.tau_mean_ns,
                                       cfg.tau_max_ns)
        gen_map = build_gen_map(traffic_rng, self.periods, audio)
        expected = expected_by_window(gen_map)
        self.server = MixServer(self.sim, expected, cfg.interval_ns,
                                audio.dl_bytes, self.ap.enqueue_dl)
        self.source = PacketSource(self.sim, gen_map, audio,
                                   sink=self._on_generated)

    def _check_feasibility(self, ul_bytes: int, dl_bytes: int) -> None:
        cfg = self.cfg
        a = self.airtimes
        mpdu = ul_bytes + cfg.mac_overhead_bytes
        s = cfg.sifs_ns
        fixed = (a.trigger_ns(self.n_rus) + s + a.bsr_ns + s
                 + a.trigger_ns(self.n_rus) + s + s + a.ba_ns(self.n_rus))
        if a.ru_data_max_bytes(cfg.txop_ns - fixed) < mpdu:
            raise ConfigError(
                "txop: a full-width poll cannot fit one uplink packet per RU")
        if a.su_data_max_bytes(cfg.txop_ns - s - a.ack_ns) < mpdu:
            raise ConfigError("txop: a contended uplink data frame cannot fit")
        if a.su_data_ns(dl_bytes + cfg.mac_overhead_bytes) > cfg.txop_ns:
            raise ConfigError("txop: the downlink broadcast cannot fit")

    def _on_generated(self, pkt: UlPacket) -> None:
        self.ledger.register(pkt)
        self.stas[pkt.sta].on_packet(pkt)

    def _deliver_ul(self, pkt: UlPacket, now: int) -> None:
        self.ledger.deliver(pkt, now)
        if pkt.disposition == ON_TIME:
            # outdated arrivals are dropped by the mixer
            self.server.on_arrival(pkt.sta, pkt.window)

    def run(self) -> RunSummary:
        self.ap.maybe_request()  # static polling lists start with work queued
        self.sim.run_until(self.cfg.duration_ns)
        return self.ledger.finalize(scheme=self.cfg.scheme.value,
                                    active_count=self.cfg.active,
                                    seed=self.cfg.seed,
                                    config_hash=self.cfg.config_hash(),
                                    duration_ns=self.cfg.duration_ns,
                                    max_exchange_ns=self.ap.max_exchange_ns)
