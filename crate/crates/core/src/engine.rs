//! Packet-level simulation and BER sweeps.
//!
//! A buffer-aided packet runs slot by slot: fresh channels are drawn, every
//! link's instantaneous SNR is computed, the strongest eligible link is used,
//! and once the source is exhausted the remaining buffered groups are drained
//! over the best non-empty relay-destination links. The destination collects
//! groups by index, so the sent and received bit sequences always align.
//!
//! Random streams are keyed by `(seed, snr point, packet)` and split by
//! purpose (data, channel, noise, code vector), so results do not depend on
//! scheduling and schemes sharing a seed see the same data.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adapt::{sg_update, AdaptState};
use crate::channel::{draw_awgn, draw_channel, NoiseSpec, RngStream};
use crate::detection::{demodulate, ml_detect, modulate, Constellation};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Scalar};
use crate::relaying::{af_forward, af_receive, BufferEntry, BufferStatus, RelayBuffer};
use crate::selection::{select, snr_rd, snr_sr, Action, LinkKind, LinkSnr};
use crate::stc::{build_equivalent, draw_random_code_vector, CodeVector, ALAMOUTI_SLOTS};

const DATA_STREAM: u64 = 0;
const CHANNEL_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;
const CODE_STREAM: u64 = 3;
// Counter used in place of a packet index for per-point state.
const POINT_STATE: u64 = u64::MAX;

/// Transmit powers and symbol energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig<T> {
    pub p_s: T,
    pub p_r: T,
    pub p_v: T,
    pub sigma2_s: T,
}

impl<T: Scalar> Default for PowerConfig<T> {
    fn default() -> Self {
        Self {
            p_s: T::one(),
            p_r: T::one(),
            p_v: T::one(),
            sigma2_s: T::one(),
        }
    }
}

impl<T: Scalar> PowerConfig<T> {
    pub fn violations(&self) -> Vec<String> {
        [("p_s", self.p_s), ("p_r", self.p_r), ("p_v", self.p_v), ("sigma2_s", self.sigma2_s)]
            .into_iter()
            .filter(|(_, x)| !(*x > T::zero() && x.is_finite()))
            .map(|(name, x)| format!("{name} must be positive, got {x}"))
            .collect()
    }

    /// `sqrt(P_S / N)`, the source-relay amplitude.
    pub fn source_gain(&self, n: usize) -> T {
        (self.p_s / T::of(n as f64)).sqrt()
    }

    /// `sqrt(P_R / N)`, the relay-destination amplitude.
    pub fn relay_gain(&self, n: usize) -> T {
        (self.p_r / T::of(n as f64)).sqrt()
    }

    /// `sqrt(P_R P_S / N)`, the constant of the stacked received model.
    pub fn model_gain(&self, n: usize) -> T {
        (self.p_r * self.p_s / T::of(n as f64)).sqrt()
    }

    pub fn cast<U: Scalar>(&self) -> PowerConfig<U> {
        PowerConfig {
            p_s: U::of(self.p_s.as_f64()),
            p_r: U::of(self.p_r.as_f64()),
            p_v: U::of(self.p_v.as_f64()),
            sigma2_s: U::of(self.sigma2_s.as_f64()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeKind {
    /// Unbuffered best-relay selection, max-min over the two hops.
    #[serde(rename = "brs")]
    NoBufferBrs,
    /// Buffer-aided, Alamouti with a fixed identity code vector.
    #[serde(rename = "stc")]
    BufferStc,
    /// Buffer-aided, random phase code vector drawn per packet.
    #[serde(rename = "rstc")]
    BufferRstc,
    /// Buffer-aided, code vector adapted by stochastic gradient.
    #[serde(rename = "abaro")]
    BufferAbaro,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::NoBufferBrs,
        SchemeKind::BufferStc,
        SchemeKind::BufferRstc,
        SchemeKind::BufferAbaro,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::NoBufferBrs => "brs",
            SchemeKind::BufferStc => "stc",
            SchemeKind::BufferRstc => "rstc",
            SchemeKind::BufferAbaro => "abaro",
        }
    }

    pub fn is_buffered(self) -> bool {
        self != SchemeKind::NoBufferBrs
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| format!("unknown scheme `{s}`"))
    }
}

/// When the adaptive code vector is re-initialised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PersistV {
    /// Once per SNR point; packets of a point run sequentially.
    #[default]
    Point,
    /// Before every packet.
    Packet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n_antennas: usize,
    pub n_relays: usize,
    /// Symbols per packet (`J`).
    pub packet_symbols: usize,
    pub buffer_capacity_groups: usize,
    /// Per-link SNR in dB.
    pub snr_db: f64,
    pub scheme: SchemeKind,
    pub mu: f64,
    pub seed: u64,
    pub powers: PowerConfig<f64>,
    pub consistent_constants: bool,
    pub persist_v: PersistV,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            n_antennas: 2,
            n_relays: 2,
            packet_symbols: 100,
            buffer_capacity_groups: 50,
            snr_db: 10.0,
            scheme: SchemeKind::BufferAbaro,
            mu: 0.01,
            seed: 0,
            powers: PowerConfig::default(),
            consistent_constants: false,
            persist_v: PersistV::Point,
        }
    }
}

impl TrialConfig {
    pub fn groups(&self) -> usize {
        self.packet_symbols / self.n_antennas.max(1)
    }

    /// Every violated constraint, empty when the configuration is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_antennas != 2 {
            out.push(format!(
                "n_antennas must be 2 for the Alamouti code, got {}",
                self.n_antennas
            ));
        }
        if self.n_relays == 0 {
            out.push("n_relays must be at least 1".into());
        }
        if self.packet_symbols == 0 {
            out.push("packet_symbols must be positive".into());
        }
        if self.n_antennas > 0 && self.packet_symbols % self.n_antennas != 0 {
            out.push("packet_symbols must be divisible by n_antennas".into());
        }
        if self.buffer_capacity_groups == 0 {
            out.push("buffer_capacity_groups must be at least 1".into());
        }
        if !self.snr_db.is_finite() {
            out.push(format!("snr_db must be finite, got {}", self.snr_db));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            out.push(format!("mu must be nonnegative, got {}", self.mu));
        }
        out.extend(self.powers.violations());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

/// Symmetric per-link mapping `sigma2_r = sigma2_d = P_S sigma2_s / 10^(snr/10)`.
pub fn noise_variance_from_snr<T: Scalar>(snr_db: f64, powers: &PowerConfig<T>) -> NoiseSpec<T> {
    let signal = (powers.p_s * powers.sigma2_s).as_f64();
    let sigma2 = T::of(signal / 10f64.powf(snr_db / 10.0));
    NoiseSpec {
        sigma2_r: sigma2,
        sigma2_d: sigma2,
    }
}

/// Everything observed while simulating one packet.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketOutcome {
    pub sent: Vec<u8>,
    pub received: Vec<u8>,
    pub slots_used: usize,
    /// Action taken in every slot.
    pub trace: Vec<Action>,
    /// Group indices in the order the destination received them.
    pub delivery_order: Vec<usize>,
    /// Relay that forwarded each delivered group, aligned with `delivery_order`.
    pub delivered_by: Vec<usize>,
    pub pushed: usize,
    pub popped: usize,
    /// Largest occupancy seen per relay.
    pub max_occupancy: Vec<usize>,
    /// Largest `| ||V||_F - P_V |` after any adaptation step.
    pub max_norm_deviation: f64,
    pub adaptation_steps: usize,
}

impl PacketOutcome {
    pub fn bit_errors(&self) -> u64 {
        self.sent
            .iter()
            .zip(&self.received)
            .filter(|(a, b)| a != b)
            .count() as u64
    }
}

/// Per-relay simulation state that may outlive a packet.
#[derive(Clone, Debug)]
pub struct PacketRunner<T> {
    cfg: TrialConfig,
    powers: PowerConfig<T>,
    noise: NoiseSpec<T>,
    constellation: Constellation<T>,
    codes: Vec<AdaptState<T>>,
}

impl<T: Scalar> PacketRunner<T> {
    /// Validates the configuration and initialises code vectors from `code_rng`.
    pub fn new(cfg: &TrialConfig, code_rng: &mut RngStream) -> Result<Self> {
        cfg.validate()?;
        let powers: PowerConfig<T> = cfg.powers.cast();
        let noise = noise_variance_from_snr(cfg.snr_db, &powers);
        NoiseSpec::new(noise.sigma2_r, noise.sigma2_d)?;
        let mut runner = Self {
            cfg: cfg.clone(),
            powers,
            noise,
            constellation: Constellation::bpsk(),
            codes: Vec::new(),
        };
        runner.reset_code_vectors(code_rng)?;
        Ok(runner)
    }

    /// Fresh per-relay code vectors: identity direction for the fixed
    /// schemes, random phases otherwise. All are scaled to `P_V`.
    pub fn reset_code_vectors(&mut self, code_rng: &mut RngStream) -> Result<()> {
        let n = self.cfg.n_antennas;
        let p_v = self.powers.p_v;
        let mu = T::of(self.cfg.mu);
        self.codes = (0..self.cfg.n_relays)
            .map(|_| {
                let v = match self.cfg.scheme {
                    SchemeKind::NoBufferBrs | SchemeKind::BufferStc => CodeVector::identity(n, p_v)?,
                    SchemeKind::BufferRstc | SchemeKind::BufferAbaro => {
                        draw_random_code_vector(n, code_rng, p_v)?
                    }
                };
                AdaptState::new(v, mu, self.cfg.consistent_constants)
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    pub fn config(&self) -> &TrialConfig {
        &self.cfg
    }

    pub fn noise(&self) -> NoiseSpec<T> {
        self.noise
    }

    pub fn code_vectors(&self) -> impl Iterator<Item = &CodeVector<T>> {
        self.codes.iter().map(|s| &s.v)
    }

    /// Simulates one packet with the streams derived from `packet_rng`.
    /// Random code vectors of the fixed-random scheme are redrawn first.
    pub fn run(&mut self, packet_rng: &RngStream) -> Result<PacketOutcome> {
        if self.cfg.scheme == SchemeKind::BufferRstc {
            self.reset_code_vectors(&mut packet_rng.derive(CODE_STREAM))?;
        }
        let mut data_rng = packet_rng.derive(DATA_STREAM);
        let sent: Vec<u8> = (0..self.cfg.packet_symbols).map(|_| data_rng.bit()).collect();
        let mut sim = PacketSim::new(self, sent, packet_rng);
        if self.cfg.scheme.is_buffered() {
            sim.run_buffered(self)?;
        } else {
            sim.run_unbuffered(self)?;
        }
        Ok(sim.finish())
    }

    fn group_symbols(&self, sent: &[u8], group: usize) -> ComplexMatrix<T> {
        let n = self.cfg.n_antennas;
        ComplexMatrix::column(&modulate(&sent[group * n..(group + 1) * n]))
    }

    fn sr_snr(&self, f: &ComplexMatrix<T>) -> Result<T> {
        snr_sr(f, self.noise.sigma2_r)
    }

    fn rd_snr(&self, relay: usize, g: &ComplexMatrix<T>) -> Result<T> {
        snr_rd(&self.codes[relay].v, g, self.noise.sigma2_d, ALAMOUTI_SLOTS)
    }
}

/// Mutable bookkeeping for one packet.
struct PacketSim<T> {
    sent: Vec<u8>,
    received: Vec<Option<Vec<u8>>>,
    channel_rng: RngStream,
    noise_rng: RngStream,
    slot: usize,
    trace: Vec<Action>,
    delivery_order: Vec<usize>,
    delivered_by: Vec<usize>,
    pushed: usize,
    popped: usize,
    max_occupancy: Vec<usize>,
    max_norm_deviation: f64,
    adaptation_steps: usize,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Scalar> PacketSim<T> {
    fn new(runner: &PacketRunner<T>, sent: Vec<u8>, packet_rng: &RngStream) -> Self {
        let groups = runner.cfg.groups();
        Self {
            sent,
            received: vec![None; groups],
            channel_rng: packet_rng.derive(CHANNEL_STREAM),
            noise_rng: packet_rng.derive(NOISE_STREAM),
            slot: 0,
            trace: Vec::new(),
            delivery_order: Vec::new(),
            delivered_by: Vec::new(),
            pushed: 0,
            popped: 0,
            max_occupancy: vec![0; runner.cfg.n_relays],
            max_norm_deviation: 0.0,
            adaptation_steps: 0,
            _marker: std::marker::PhantomData,
        }
    }

    fn relay_receive(
        &mut self,
        runner: &PacketRunner<T>,
        f: &ComplexMatrix<T>,
        group: usize,
    ) -> Result<ComplexMatrix<T>> {
        let n = runner.cfg.n_antennas;
        let noise = draw_awgn(n, 1, runner.noise.sigma2_r, &mut self.noise_rng)?;
        af_receive(f, &runner.group_symbols(&self.sent, group), &noise, &runner.powers)
    }

    /// Relay `relay` forwards `entry` over `g`; the destination detects it
    /// and, for the adaptive scheme, updates that relay's code vector.
    fn deliver(
        &mut self,
        runner: &mut PacketRunner<T>,
        relay: usize,
        g: &ComplexMatrix<T>,
        entry: BufferEntry<T>,
    ) -> Result<()> {
        let n = runner.cfg.n_antennas;
        let code = &runner.codes[relay];
        let noise = draw_awgn(n, ALAMOUTI_SLOTS, runner.noise.sigma2_d, &mut self.noise_rng)?;
        let block = af_forward(&code.v, g, &entry.received, &noise, &runner.powers)?;
        let r = block.vectorize();
        let model = build_equivalent(&code.v, &entry.f_snapshot, g, ALAMOUTI_SLOTS, runner.noise)?;
        let det = ml_detect(&r, &model, &runner.constellation, &runner.powers)?;

        if runner.cfg.scheme == SchemeKind::BufferAbaro {
            let next = sg_update(code, &r, &model, &det.s_hat, &runner.powers)?;
            let deviation = (next.v.frobenius_norm() - next.p_v).abs().as_f64();
            debug_assert!(deviation <= (T::epsilon().as_f64() * 64.0).max(1e-12) * next.p_v.as_f64().max(1.0));
            self.max_norm_deviation = self.max_norm_deviation.max(deviation);
            self.adaptation_steps += 1;
            runner.codes[relay] = next;
        }

        self.received[entry.group_index] = Some(demodulate(det.s_hat.as_slice()));
        self.delivery_order.push(entry.group_index);
        self.delivered_by.push(relay);
        Ok(())
    }

    fn run_buffered(&mut self, runner: &mut PacketRunner<T>) -> Result<()> {
        let cfg = runner.cfg.clone();
        let groups = cfg.groups();
        let mut buffers: Vec<RelayBuffer<T>> = (0..cfg.n_relays)
            .map(|_| RelayBuffer::new(cfg.buffer_capacity_groups))
            .collect();
        let mut next_group = 0;
        // each group costs exactly two slots; anything beyond is a stall
        let slot_limit = 2 * groups + 1;

        while next_group < groups || buffers.iter().any(|b| !b.is_empty()) {
            self.slot += 1;
            if self.slot > slot_limit {
                return Err(Error::Stalled { slot: self.slot });
            }
            let ch = draw_channel::<T>(cfg.n_relays, cfg.n_antennas, self.slot, &mut self.channel_rng);

            let mut snrs = Vec::with_capacity(2 * cfg.n_relays);
            for k in 0..cfg.n_relays {
                snrs.push(LinkSnr {
                    kind: LinkKind::SourceRelay,
                    relay: k,
                    value: runner.sr_snr(&ch.f[k])?,
                });
            }
            if self.slot > 1 {
                for k in 0..cfg.n_relays {
                    snrs.push(LinkSnr {
                        kind: LinkKind::RelayDestination,
                        relay: k,
                        value: runner.rd_snr(k, &ch.g[k])?,
                    });
                }
            }
            let statuses: Vec<BufferStatus> = buffers.iter().map(RelayBuffer::status).collect();
            let decision = select(&snrs, &statuses, next_group >= groups);

            match decision.action {
                Action::SourceToRelay(k) => {
                    let received = self.relay_receive(runner, &ch.f[k], next_group)?;
                    buffers[k].push(BufferEntry {
                        received,
                        f_snapshot: ch.f[k].clone(),
                        group_index: next_group,
                    })?;
                    next_group += 1;
                    self.pushed += 1;
                }
                Action::RelayToDestination(k) => {
                    let entry = buffers[k].pop()?;
                    self.popped += 1;
                    self.deliver(runner, k, &ch.g[k], entry)?;
                }
                Action::Idle => return Err(Error::Stalled { slot: self.slot }),
            }
            self.trace.push(decision.action);
            for (m, b) in self.max_occupancy.iter_mut().zip(&buffers) {
                debug_assert!(b.len() <= b.capacity());
                *m = (*m).max(b.len());
            }
        }
        Ok(())
    }

    /// Best relay by `min(SNR_SR, SNR_RD)` per group, forwarding immediately
    /// in the following slot.
    fn run_unbuffered(&mut self, runner: &mut PacketRunner<T>) -> Result<()> {
        let cfg = runner.cfg.clone();
        for group in 0..cfg.groups() {
            self.slot += 1;
            let sr = draw_channel::<T>(cfg.n_relays, cfg.n_antennas, self.slot, &mut self.channel_rng);
            self.slot += 1;
            let rd = draw_channel::<T>(cfg.n_relays, cfg.n_antennas, self.slot, &mut self.channel_rng);

            let mut best = (0, T::neg_infinity());
            for k in 0..cfg.n_relays {
                let score = runner.sr_snr(&sr.f[k])?.min(runner.rd_snr(k, &rd.g[k])?);
                if score > best.1 {
                    best = (k, score);
                }
            }
            let k = best.0;
            let received = self.relay_receive(runner, &sr.f[k], group)?;
            self.pushed += 1;
            self.popped += 1;
            let entry = BufferEntry {
                received,
                f_snapshot: sr.f[k].clone(),
                group_index: group,
            };
            self.deliver(runner, k, &rd.g[k], entry)?;
            self.trace.push(Action::SourceToRelay(k));
            self.trace.push(Action::RelayToDestination(k));
            self.max_occupancy[k] = self.max_occupancy[k].max(1);
        }
        Ok(())
    }

    fn finish(self) -> PacketOutcome {
        let received: Vec<u8> = self
            .received
            .into_iter()
            .flat_map(|g| g.expect("every group is delivered before the packet ends"))
            .collect();
        PacketOutcome {
            sent: self.sent,
            received,
            slots_used: self.slot,
            trace: self.trace,
            delivery_order: self.delivery_order,
            delivered_by: self.delivered_by,
            pushed: self.pushed,
            popped: self.popped,
            max_occupancy: self.max_occupancy,
            max_norm_deviation: self.max_norm_deviation,
            adaptation_steps: self.adaptation_steps,
        }
    }
}

/// Stream of packet `packet` at SNR point `point`.
pub fn packet_stream(seed: u64, point: usize, packet: usize) -> RngStream {
    RngStream::keyed(seed, &[point as u64, packet as u64])
}

/// Stream that initialises per-point state (the adaptive code vectors).
pub fn point_stream(seed: u64, point: usize) -> RngStream {
    RngStream::keyed(seed, &[point as u64, POINT_STATE])
}

/// Single packet with freshly initialised code vectors, in scalar type `T`.
pub fn run_packet_as<T: Scalar>(cfg: &TrialConfig, rng: &RngStream) -> Result<PacketOutcome> {
    let mut runner = PacketRunner::<T>::new(cfg, &mut rng.derive(CODE_STREAM))?;
    runner.run(rng)
}

/// Single packet with freshly initialised code vectors.
pub fn run_packet(cfg: &TrialConfig, rng: &RngStream) -> Result<PacketOutcome> {
    run_packet_as::<f64>(cfg, rng)
}

/// BER accumulator for one scheme at one SNR point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub scheme: SchemeKind,
    pub snr_db: f64,
    pub packets: u64,
    pub bits: u64,
    pub bit_errors: u64,
}

impl BerRecord {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }
}

/// Per-point result with the diagnostics gathered along the way.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSummary {
    pub record: BerRecord,
    pub max_norm_deviation: f64,
    pub adaptation_steps: u64,
    pub slots: u64,
    pub max_occupancy: usize,
    pub pushed: u64,
    pub popped: u64,
}

impl PointSummary {
    fn empty(scheme: SchemeKind, snr_db: f64) -> Self {
        Self {
            record: BerRecord {
                scheme,
                snr_db,
                packets: 0,
                bits: 0,
                bit_errors: 0,
            },
            max_norm_deviation: 0.0,
            adaptation_steps: 0,
            slots: 0,
            max_occupancy: 0,
            pushed: 0,
            popped: 0,
        }
    }

    fn absorb(&mut self, out: &PacketOutcome) {
        self.record.packets += 1;
        self.record.bits += out.sent.len() as u64;
        self.record.bit_errors += out.bit_errors();
        self.max_norm_deviation = self.max_norm_deviation.max(out.max_norm_deviation);
        self.adaptation_steps += out.adaptation_steps as u64;
        self.slots += out.slots_used as u64;
        self.max_occupancy = self
            .max_occupancy
            .max(out.max_occupancy.iter().copied().max().unwrap_or(0));
        self.pushed += out.pushed as u64;
        self.popped += out.popped as u64;
    }
}

fn run_point<T: Scalar>(
    base: &TrialConfig,
    point: usize,
    snr_db: f64,
    packets: usize,
    parallel_packets: bool,
) -> Result<PointSummary> {
    let cfg = TrialConfig {
        snr_db,
        ..base.clone()
    };
    let mut summary = PointSummary::empty(cfg.scheme, snr_db);
    let sequential_state = cfg.scheme == SchemeKind::BufferAbaro && cfg.persist_v == PersistV::Point;

    if sequential_state {
        let mut runner = PacketRunner::<T>::new(&cfg, &mut point_stream(cfg.seed, point).derive(CODE_STREAM))?;
        for j in 0..packets {
            summary.absorb(&runner.run(&packet_stream(cfg.seed, point, j))?);
        }
        return Ok(summary);
    }

    let one = |j: usize| run_packet_as::<T>(&cfg, &packet_stream(cfg.seed, point, j));
    let outcomes: Vec<PacketOutcome> = if parallel_packets {
        (0..packets).into_par_iter().map(one).collect::<Result<_>>()?
    } else {
        (0..packets).map(one).collect::<Result<_>>()?
    };
    for out in &outcomes {
        summary.absorb(out);
    }
    Ok(summary)
}

/// Sweep with per-point diagnostics, in scalar type `T`. `on_point` is called
/// as each point completes (from worker threads, in completion order).
pub fn run_sweep_detailed<T: Scalar>(
    base: &TrialConfig,
    snr_points_db: &[f64],
    packets_per_point: usize,
    parallelism: usize,
    on_point: &(dyn Fn(&PointSummary) + Sync),
) -> Result<Vec<PointSummary>> {
    base.validate()?;
    if packets_per_point == 0 {
        return Err(Error::Config(vec!["packets_per_point must be at least 1".into()]));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    let sequential_state = base.scheme == SchemeKind::BufferAbaro && base.persist_v == PersistV::Point;

    pool.install(|| {
        let point = |(i, &snr): (usize, &f64)| -> Result<PointSummary> {
            let summary = run_point::<T>(base, i, snr, packets_per_point, !sequential_state)?;
            on_point(&summary);
            Ok(summary)
        };
        if sequential_state {
            snr_points_db.par_iter().enumerate().map(point).collect()
        } else {
            snr_points_db.iter().enumerate().map(point).collect()
        }
    })
}

/// BER of `base.scheme` at every SNR point. Results are identical for any
/// `parallelism`.
pub fn run_sweep(
    base: &TrialConfig,
    snr_points_db: &[f64],
    packets_per_point: usize,
    parallelism: usize,
) -> Result<Vec<BerRecord>> {
    Ok(run_sweep_detailed::<f64>(base, snr_points_db, packets_per_point, parallelism, &|_| {})?
        .into_iter()
        .map(|s| s.record)
        .collect())
}
