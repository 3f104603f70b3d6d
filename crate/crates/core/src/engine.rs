//! Episode and batch execution.
//!
//! An episode is a fixed-step loop over 1 ms TTIs. Within one TTI the order is:
//! source release, near-RT window close (every `near_rt_period_ttis`), dApp
//! decision (every `delta_dapp`), MAC transmission and HARQ, then mobility and
//! channel update. The allocation decided at a dApp boundary is applied on
//! every TTI until the next boundary.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ImageAssignment, ScenarioConfig, Strategy};
use crate::control::{
    self, e2_control_dapp, e2_report_dapp, e2_report_kpm, e3_control, e3_indication, effective_tti, summarize_controls,
    Intent, KpmReport, MessageLedger, UeReport, XappDirective,
};
use crate::error::{Error, Result};
use crate::fidelity::{evaluate_flow, EmbeddingProvider, FidelityParams, FidelityReport, SidecarProvider, SurrogateEmbedding};
use crate::kpi::{self, KpiRecord};
use crate::media::{Dataset, ImageFlow, Packet, PacketStatus};
use crate::radio::channel::compute_link;
use crate::radio::{bits_per_alloc, harq_tick, step_mobility, ChannelState, HarqProcess, LinkAdaptation, LinkState, MobilityParams, UePosition};
use crate::rng::{RngStreams, Stream};
use crate::sched::{AllocationMap, DappScheduler, PfTracker, UeState};
use crate::Direction;

/// Simulated time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimClock {
    pub tti_index: u64,
    pub episode_index: u64,
}

impl SimClock {
    pub fn time_ms(&self) -> u64 {
        self.tti_index
    }
}

/// Where image embeddings come from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum ProviderSpec {
    #[default]
    Surrogate,
    /// Shell command of an external embedding process.
    Command(String),
}

impl ProviderSpec {
    pub fn create(&self) -> Result<Box<dyn EmbeddingProvider>> {
        Ok(match self {
            ProviderSpec::Surrogate => Box::new(SurrogateEmbedding),
            ProviderSpec::Command(cmd) => Box::new(SidecarProvider::spawn(cmd)?),
        })
    }
}

/// Per-flow end-of-episode state.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutcome {
    pub ue: u16,
    pub direction: Direction,
    pub image: String,
    pub relevant: bool,
    pub packets: Vec<Packet>,
    pub fidelity: Option<FidelityReport>,
    /// Set when the embedding provider failed for this flow.
    pub fidelity_error: Option<String>,
}

impl FlowOutcome {
    pub fn count(&self, status: PacketStatus) -> u64 {
        self.packets.iter().filter(|p| p.status == status).count() as u64
    }

    /// Packets handed to the RLC layer so far.
    pub fn sent(&self) -> u64 {
        self.packets.iter().filter(|p| p.status != PacketStatus::Pending).count() as u64
    }
}

/// Packet accounting of one direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
    /// Still in an RLC buffer or awaiting HARQ at episode end.
    pub buffered: u64,
    pub delivered_bytes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionOutcome {
    pub direction: Direction,
    pub counters: Counters,
    /// Unit-TTIs that carried a first transmission or a retransmission.
    pub used_unit_ttis: u64,
    pub capacity: u32,
    pub decisions: u64,
    pub candidate_sizes: Vec<usize>,
    pub decision_times_us: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub seed: u64,
    pub delta_dapp: u32,
    pub strategy: Strategy,
    pub intent_based: bool,
    pub ttis: u64,
    /// Clock after the last TTI.
    pub clock: SimClock,
    pub intent: Intent,
    pub near_rt_windows: u64,
    pub directions: Vec<DirectionOutcome>,
    pub flows: Vec<FlowOutcome>,
    pub records: Vec<KpiRecord>,
    pub ledger: MessageLedger,
}

impl EpisodeResult {
    pub fn direction(&self, dir: Direction) -> &DirectionOutcome {
        self.directions.iter().find(|d| d.direction == dir).expect("both directions simulated")
    }

    pub fn record(&self, dir: Direction) -> &KpiRecord {
        self.records.iter().find(|r| r.direction == dir).expect("both directions reported")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    /// Sorted by (seed, delta, strategy, intent flag).
    pub episodes: Vec<EpisodeResult>,
    pub provider: String,
}

impl BatchResult {
    pub fn records(&self) -> Vec<KpiRecord> {
        self.episodes.iter().flat_map(|e| e.records.iter().cloned()).collect()
    }

    pub fn summary(&self) -> kpi::Summary {
        kpi::summarize(&self.records(), &self.provider)
    }

    /// Write `episodes.csv`, `summary.json` and `messages.csv` into `dir`.
    pub fn write_reports(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        kpi::write_episodes_csv(&dir.join("episodes.csv"), &self.records())?;
        kpi::write_summary_json(&dir.join("summary.json"), &self.summary())?;
        kpi::write_messages_csv(
            &dir.join("messages.csv"),
            self.episodes.iter().map(|e| {
                let key = kpi::EpisodeKey {
                    seed: e.seed,
                    delta_dapp: e.delta_dapp,
                    strategy: e.strategy,
                    intent_based: e.intent_based,
                };
                (key, e.ledger.entries.as_slice())
            }),
        )
    }
}

fn dir_index(dir: Direction) -> usize {
    match dir {
        Direction::Ul => 0,
        Direction::Dl => 1,
    }
}

/// One UE's radio state.
struct Ue {
    pos: UePosition,
    chan: ChannelState,
    link: [LinkState; 2],
    mobility_rng: ChaCha8Rng,
    shadow_rng: ChaCha8Rng,
    fade_rng: ChaCha8Rng,
}

/// Per-direction MAC state.
struct Mac {
    direction: Direction,
    capacity: u32,
    unit_prbs: u32,
    sched: DappScheduler,
    pf: PfTracker,
    current: AllocationMap,
    /// Failed blocks waiting for the next boundary.
    pending_retx: Vec<HarqProcess>,
    harq_rng: ChaCha8Rng,
    used_unit_ttis: u64,
    decisions: u64,
    candidate_sizes: Vec<usize>,
    decision_times_us: Vec<f64>,
    window: Window,
}

/// Accumulators for the open near-RT window.
#[derive(Default)]
struct Window {
    used_units: u64,
    delivered_bits: u64,
    latencies: Vec<f64>,
    controls: Vec<AllocationMap>,
    bytes_served: u64,
}

fn check_dataset(cfg: &ScenarioConfig, dataset: &Dataset) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::Dataset("dataset is empty".into()));
    }
    if dataset.len() < cfg.n_ues as usize {
        return Err(Error::Dataset(format!(
            "dataset has {} images but the scenario needs at least n_ues = {}",
            dataset.len(),
            cfg.n_ues
        )));
    }
    Ok(())
}

/// Run one episode against the dataset named in the config, using the
/// built-in embedding provider.
pub fn run_episode(cfg: &ScenarioConfig, seed: u64) -> Result<EpisodeResult> {
    let dataset = Dataset::load(&cfg.dataset_dir)?;
    simulate(cfg, seed, 0, &dataset, &mut SurrogateEmbedding)
}

/// Run one episode on a preloaded dataset with an explicit provider.
pub fn simulate(
    cfg: &ScenarioConfig,
    seed: u64,
    episode_index: u64,
    dataset: &Dataset,
    provider: &mut dyn EmbeddingProvider,
) -> Result<EpisodeResult> {
    cfg.validate()?;
    check_dataset(cfg, dataset)?;
    let streams = RngStreams::new(seed);
    let la = LinkAdaptation { attenuation: cfg.shannon_attenuation, bler_slope_db: cfg.bler_slope_db };
    let mobility = MobilityParams::from_config(cfg);
    let ttis = cfg.episode_ttis();
    let n_ues = cfg.n_ues as usize;
    let delta = cfg.delta_dapp as u64;
    let period = cfg.near_rt_period_ttis as u64;

    // Intent and image assignment at TTI 0.
    let vocab = dataset.vocabulary();
    let intent = control::producer_activate(&vocab, episode_index, &mut streams.substream(Stream::Intent, 0))?;
    let mut traffic_rng = streams.substream(Stream::Traffic, 0);
    let mut flows: Vec<ImageFlow> = Vec::with_capacity(2 * n_ues);
    for dir in Direction::BOTH {
        for ue in 0..n_ues {
            let idx = match cfg.image_assignment {
                ImageAssignment::Random => traffic_rng.random_range(0..dataset.len()),
                ImageAssignment::Sequential => match dir {
                    Direction::Ul => ue % dataset.len(),
                    Direction::Dl => (ue + n_ues) % dataset.len(),
                },
            };
            let source = Arc::clone(&dataset.images[idx]);
            let relevant = source.labels.contains(&intent.object_id);
            flows.push(ImageFlow::new(
                ue as u16,
                dir,
                source,
                relevant,
                cfg.pkt_bytes(dir) as usize,
                cfg.rate_bps(dir),
            ));
        }
    }
    let flow_index = |dir: Direction, ue: usize| dir_index(dir) * n_ues + ue;

    let mut ues: Vec<Ue> = (0..n_ues)
        .map(|i| {
            let mut mobility_rng = streams.substream(Stream::Mobility, i as u64);
            let mut shadow_rng = streams.substream(Stream::Shadowing, i as u64);
            let mut fade_rng = streams.substream(Stream::Fading, i as u64);
            let pos = UePosition::random(cfg.area_m, &mut mobility_rng);
            let chan = ChannelState::new(cfg, &mut shadow_rng, &mut fade_rng);
            let link = [
                compute_link(&pos, Direction::Ul, cfg, &chan, &la),
                compute_link(&pos, Direction::Dl, cfg, &chan, &la),
            ];
            Ue { pos, chan, link, mobility_rng, shadow_rng, fade_rng }
        })
        .collect();

    let mut macs: Vec<Mac> = Direction::BOTH
        .iter()
        .map(|&dir| Mac {
            direction: dir,
            capacity: cfg.capacity(dir),
            unit_prbs: cfg.unit_prbs(dir),
            sched: DappScheduler::new(
                dir,
                cfg.intent_based,
                cfg.n_ues as u16,
                cfg.unit_prbs(dir),
                cfg.buffer_ref_bytes,
                cfg.measure_decision_time,
            ),
            pf: PfTracker::new(n_ues, cfg.pf_init_bps, cfg.pf_horizon_ttis),
            current: AllocationMap::empty(dir, cfg.capacity(dir)),
            pending_retx: Vec::new(),
            harq_rng: streams.substream(Stream::Harq, dir_index(dir) as u64),
            used_unit_ttis: 0,
            decisions: 0,
            candidate_sizes: Vec::new(),
            decision_times_us: Vec::new(),
            window: Window::default(),
        })
        .collect();

    let mut ledger = MessageLedger::default();
    let mut directive = XappDirective::default();
    let mut pending_directive: Option<(u64, XappDirective)> = None;
    let mut clock = SimClock { tti_index: 0, episode_index };
    let mut near_rt_windows = 0u64;

    let close_window = |tti: u64,
                        macs: &mut [Mac],
                        flows: &[ImageFlow],
                        ues: &[Ue],
                        ledger: &mut MessageLedger,
                        pending: &mut Option<(u64, XappDirective)>| {
        for mac in macs.iter_mut() {
            let w = std::mem::take(&mut mac.window);
            let dir = mac.direction;
            let dflows = flows.iter().filter(|f| f.direction == dir);
            let kpm = KpmReport {
                active_ues: dflows.clone().filter(|f| !f.buffer.is_empty()).count() as u32,
                resource_utilization: w.used_units as f64 / (mac.capacity as f64 * period as f64),
                throughput_bps: w.delivered_bits as f64 * 1000.0 / period as f64,
                latency_ms: kpi::mean(&w.latencies).unwrap_or(0.0),
                buffer_bytes: dflows.map(|f| f.buffer.bytes()).sum(),
                mean_cqi: ues.iter().map(|u| u.link[dir_index(dir)].cqi as f64).sum::<f64>() / ues.len() as f64,
            };
            ledger.record(&e2_report_kpm(tti, dir, kpm));
            let summary = summarize_controls(&w.controls, w.bytes_served);
            ledger.record(&e2_report_dapp(tti, dir, summary));
            let d = control::xapp_step(cfg.xapp_policy, &kpm, cfg);
            ledger.record(&e2_control_dapp(tti, dir, d.clone()));
            // Both directions share one directive; the uplink one wins if they differ.
            if dir == Direction::Ul || pending.is_none() {
                *pending = Some((effective_tti(tti, cfg.delta_dapp), d));
            }
        }
    };

    for tti in 0..ttis {
        clock.tti_index = tti;

        for f in flows.iter_mut() {
            f.release_due(tti);
        }

        if tti > 0 && tti % period == 0 {
            close_window(tti, &mut macs, &flows, &ues, &mut ledger, &mut pending_directive);
            near_rt_windows += 1;
        }

        let boundary = tti % delta == 0;
        if boundary {
            if let Some((at, d)) = &pending_directive {
                if *at <= tti {
                    directive = d.clone();
                    pending_directive = None;
                }
            }
        }

        for mac in macs.iter_mut() {
            let dir = mac.direction;
            let di = dir_index(dir);
            let mut sent: Vec<HarqProcess> = Vec::new();
            let mut served_bits = vec![0u64; n_ues];

            if boundary {
                // Retransmissions take the lowest units, then new data fills the rest.
                let mut occupied = vec![false; mac.capacity as usize];
                let mut next_free = 0usize;
                for p in mac.pending_retx.iter_mut() {
                    let end = (next_free + p.units_reserved as usize).min(occupied.len());
                    occupied[next_free..end].iter_mut().for_each(|o| *o = true);
                    next_free = end;
                    p.attempts += 1;
                }
                let reserved = next_free as u32;
                let cap = (mac.capacity as f64 * directive.budget_fraction).floor() as u32;
                let b_max = cap.saturating_sub(reserved);

                let states: Vec<UeState> = (0..n_ues)
                    .filter(|&i| !directive.skip_rntis.contains(&(i as u16)))
                    .map(|i| {
                        let f = &flows[flow_index(dir, i)];
                        let cqi = ues[i].link[di].cqi;
                        let inst = bits_per_alloc(cqi, mac.capacity * mac.unit_prbs).unwrap_or(0) as f64 * 1000.0;
                        UeState {
                            rnti: i as u16,
                            cqi,
                            qci: cfg.qci,
                            buffer_bytes: f.buffer.bytes(),
                            max_criticality: f.buffer.max_criticality().unwrap_or(0.0),
                            relevant: f.relevant,
                            inst_rate_bps: inst,
                            hist_rate_bps: mac.pf.hist(i as u16),
                        }
                    })
                    .collect();
                let reports: Vec<UeReport> = states
                    .iter()
                    .filter(|s| s.buffer_bytes > 0)
                    .map(|s| UeReport {
                        rnti: s.rnti,
                        cqi: s.cqi,
                        qci: s.qci,
                        buffer_bytes: s.buffer_bytes,
                        criticality: s.max_criticality,
                    })
                    .collect();
                ledger.record(&e3_indication(tti, dir, b_max, reports));

                let strategy = directive.strategy_override.unwrap_or(cfg.strategy);
                let alloc = if directive.skip_subframes.contains(&((tti % 10) as u8)) {
                    AllocationMap::empty(dir, b_max)
                } else {
                    let d = mac.sched.decide(strategy, &states, &occupied, b_max)?;
                    mac.candidate_sizes.push(d.candidates);
                    if let Some(t) = d.decision_time_us {
                        mac.decision_times_us.push(t);
                    }
                    d.alloc
                };
                mac.decisions += 1;
                ledger.record(&e3_control(tti, &alloc));
                mac.window.controls.push(alloc.clone());
                mac.current = alloc;

                for p in mac.pending_retx.drain(..) {
                    mac.used_unit_ttis += p.units_reserved as u64;
                    mac.window.used_units += p.units_reserved as u64;
                    sent.push(p);
                }
            }

            for g in &mac.current.grants {
                let flow = &mut flows[flow_index(dir, g.rnti as usize)];
                if flow.buffer.is_empty() {
                    continue;
                }
                let bits = bits_per_alloc(g.mcs, g.n_units() * mac.unit_prbs)?;
                let segments = flow.buffer.take(bits / 8);
                if segments.is_empty() {
                    continue;
                }
                let bytes: u64 = segments.iter().map(|s| s.bytes as u64).sum();
                served_bits[g.rnti as usize] += bytes * 8;
                mac.window.bytes_served += bytes;
                mac.used_unit_ttis += g.n_units() as u64;
                mac.window.used_units += g.n_units() as u64;
                sent.push(HarqProcess {
                    ue: g.rnti,
                    direction: dir,
                    tb_bits: bytes * 8,
                    cqi: g.mcs,
                    attempts: 1,
                    units_reserved: g.n_units(),
                    segments,
                });
            }

            let outcome = harq_tick(sent, |p| ues[p.ue as usize].link[di].sinr_db, &la, cfg.max_harq_tx, &mut mac.harq_rng);
            for p in outcome.delivered {
                let flow = &mut flows[flow_index(dir, p.ue as usize)];
                for seg in p.segments {
                    let before = flow.packets[seg.seq as usize].status;
                    flow.on_delivered(seg, tti + 1);
                    let pkt = &flow.packets[seg.seq as usize];
                    if before == PacketStatus::InFlight && pkt.status == PacketStatus::Delivered {
                        mac.window.delivered_bits += pkt.len() as u64 * 8;
                        let created = pkt.created_tti.expect("released packet has a creation time");
                        mac.window.latencies.push((tti + 1 - created) as f64 + cfg.backhaul_ms);
                    }
                }
            }
            for p in outcome.dropped {
                let flow = &mut flows[flow_index(dir, p.ue as usize)];
                for seg in p.segments {
                    flow.on_dropped(seg);
                }
            }
            mac.pending_retx.extend(outcome.retx);
            mac.pf.update(&served_bits);
        }

        let dt = 1e-3;
        for ue in ues.iter_mut() {
            let next = step_mobility(ue.pos, dt, &mobility, &mut ue.mobility_rng);
            let walked = mobility.speed_mps * dt;
            ue.pos = next;
            ue.chan.advance(walked, cfg, &mut ue.shadow_rng, &mut ue.fade_rng);
            ue.link = [
                compute_link(&ue.pos, Direction::Ul, cfg, &ue.chan, &la),
                compute_link(&ue.pos, Direction::Dl, cfg, &ue.chan, &la),
            ];
        }
    }
    clock.tti_index = ttis;
    if ttis > 0 && ttis.is_multiple_of(period) {
        close_window(ttis, &mut macs, &flows, &ues, &mut ledger, &mut pending_directive);
        near_rt_windows += 1;
    }

    // Evaluation.
    let params = FidelityParams::from_config(cfg);
    let mut outcomes = Vec::with_capacity(flows.len());
    for f in &flows {
        let (fidelity, fidelity_error) = match evaluate_flow(f, &params, provider) {
            Ok(r) => (Some(r), None),
            Err(e @ Error::Provider(_)) => {
                log::warn!("seed {seed}: fidelity of ue {} {} flow unavailable: {e}", f.ue, f.direction);
                (None, Some(e.to_string()))
            }
            Err(e) => return Err(e),
        };
        outcomes.push(FlowOutcome {
            ue: f.ue,
            direction: f.direction,
            image: f.source.name.clone(),
            relevant: f.relevant,
            packets: f.packets.clone(),
            fidelity,
            fidelity_error,
        });
    }

    let mut directions = Vec::new();
    let mut records = Vec::new();
    for mac in macs {
        let dir = mac.direction;
        let dflows: Vec<&FlowOutcome> = outcomes.iter().filter(|f| f.direction == dir).collect();
        let mut c = Counters::default();
        for f in &dflows {
            c.sent += f.sent();
            c.delivered += f.count(PacketStatus::Delivered);
            c.dropped += f.count(PacketStatus::Dropped);
            c.buffered += f.count(PacketStatus::InFlight);
            c.delivered_bytes +=
                f.packets.iter().filter(|p| p.status == PacketStatus::Delivered).map(|p| p.len() as u64).sum::<u64>();
        }
        if c.sent != c.delivered + c.dropped + c.buffered {
            return Err(Error::Invariant(format!("{dir}: packet conservation violated: {c:?}")));
        }
        let latencies: Vec<Vec<f64>> = dflows.iter().map(|f| flow_latencies(&f.packets, cfg.backhaul_ms)).collect();
        let (latency_ms, jitter_ms) = kpi::latency_and_jitter(&latencies);
        let reports: Vec<&FidelityReport> = dflows.iter().filter_map(|f| f.fidelity.as_ref()).collect();
        let fmean = |sel: fn(&FidelityReport) -> f64| kpi::mean(&reports.iter().map(|r| sel(r)).collect::<Vec<_>>());
        let sizes: Vec<f64> = mac.candidate_sizes.iter().map(|&s| s as f64).collect();
        records.push(KpiRecord {
            seed,
            delta_dapp: cfg.delta_dapp,
            strategy: cfg.strategy,
            intent_based: cfg.intent_based,
            direction: dir,
            pdr: kpi::pdr(c.sent, c.delivered)?,
            throughput_bps: c.delivered_bytes as f64 * 8.0 / cfg.episode_s,
            latency_ms,
            jitter_ms,
            prb_usage_pct: kpi::prb_usage(mac.used_unit_ttis, mac.capacity, ttis),
            decision_time_us: kpi::mean(&mac.decision_times_us),
            candidate_set_mean: kpi::mean(&sizes),
            iss_mean: fmean(|r| r.iss),
            f0_mean: fmean(|r| r.f0),
            f1_mean: fmean(|r| r.f1),
            f2_mean: fmean(|r| r.f2),
        });
        directions.push(DirectionOutcome {
            direction: dir,
            counters: c,
            used_unit_ttis: mac.used_unit_ttis,
            capacity: mac.capacity,
            decisions: mac.decisions,
            candidate_sizes: mac.candidate_sizes,
            decision_times_us: mac.decision_times_us,
        });
    }

    Ok(EpisodeResult {
        seed,
        delta_dapp: cfg.delta_dapp,
        strategy: cfg.strategy,
        intent_based: cfg.intent_based,
        ttis,
        clock,
        intent,
        near_rt_windows,
        directions,
        flows: outcomes,
        records,
        ledger,
    })
}

/// Latencies of a flow's delivered packets in delivery order.
pub fn flow_latencies(packets: &[Packet], backhaul_ms: f64) -> Vec<f64> {
    let mut d: Vec<(u64, u32, f64)> = packets
        .iter()
        .filter(|p| p.status == PacketStatus::Delivered)
        .map(|p| {
            let (c, r) = (p.created_tti.unwrap_or(0), p.delivered_tti.unwrap_or(0));
            (r, p.seq, (r - c) as f64 + backhaul_ms)
        })
        .collect();
    d.sort_by_key(|&(r, s, _)| (r, s));
    d.into_iter().map(|(_, _, l)| l).collect()
}

/// One cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Job {
    pub seed: u64,
    pub delta_dapp: u32,
    pub strategy: Strategy,
    pub intent_based: bool,
}

/// Run every job, in parallel, on a shared dataset. Results come back in job
/// sort order regardless of completion order.
pub fn run_jobs(cfg: &ScenarioConfig, jobs: &[Job], dataset: &Dataset, provider: &ProviderSpec) -> Result<BatchResult> {
    if jobs.is_empty() {
        return Err(Error::EmptyBatch("job list"));
    }
    check_dataset(cfg, dataset)?;
    let mut jobs = jobs.to_vec();
    jobs.sort();
    let provider_name = provider.create()?.name();
    let episodes = jobs
        .par_iter()
        .enumerate()
        .map(|(i, job)| {
            let mut c = cfg.clone();
            c.delta_dapp = job.delta_dapp;
            c.strategy = job.strategy;
            c.intent_based = job.intent_based;
            c.seed = job.seed;
            let tag = |e: Error| Error::Episode { seed: job.seed, delta_dapp: job.delta_dapp, source: Box::new(e) };
            let mut p = provider.create().map_err(tag)?;
            simulate(&c, job.seed, i as u64, dataset, p.as_mut()).map_err(tag)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BatchResult { episodes, provider: provider_name })
}

/// Cross product of seeds and dApp periods for the configured strategy.
pub fn run_batch(cfg: &ScenarioConfig, seeds: &[u64], deltas: &[u32], provider: &ProviderSpec) -> Result<BatchResult> {
    run_sweep(cfg, seeds, deltas, &[cfg.strategy], &[cfg.intent_based], provider)
}

/// Cross product of seeds, periods, strategies and intent modes.
pub fn run_sweep(
    cfg: &ScenarioConfig,
    seeds: &[u64],
    deltas: &[u32],
    strategies: &[Strategy],
    intent_modes: &[bool],
    provider: &ProviderSpec,
) -> Result<BatchResult> {
    if seeds.is_empty() {
        return Err(Error::EmptyBatch("seed list"));
    }
    if deltas.is_empty() {
        return Err(Error::EmptyBatch("delta_dapp list"));
    }
    if strategies.is_empty() || intent_modes.is_empty() {
        return Err(Error::EmptyBatch("strategy list"));
    }
    for &d in deltas {
        let mut c = cfg.clone();
        c.delta_dapp = d;
        c.validate()?;
    }
    let uniq = |v: &[u64]| v.iter().copied().collect::<BTreeSet<_>>();
    let seeds = uniq(seeds);
    let deltas: BTreeSet<u32> = deltas.iter().copied().collect();
    let mut jobs = Vec::new();
    for &seed in &seeds {
        for &delta_dapp in &deltas {
            for &strategy in strategies {
                for &intent_based in intent_modes {
                    jobs.push(Job { seed, delta_dapp, strategy, intent_based });
                }
            }
        }
    }
    let dataset = Dataset::load(&cfg.dataset_dir)?;
    run_jobs(cfg, &jobs, &dataset, provider)
}
