//! The two dumbbell experiments as reusable scenario definitions, and a
//! plain-text scenario file format that reruns bit-identically.
//!
//! Experiment 1: a single greedy flow over an uncongested S1-R1-R2-D1 chain.
//! Experiment 2: four senders sharing one bottleneck, swept over buffer
//! sizes, with homogeneous or heterogeneous access delays.

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::cc::{build_cc, CcParams, ParamError, UnknownVariant, VariantKind};
use crate::event::EngineError;
use crate::metrics::TraceCadence;
use crate::net::Network;
use crate::sim::{FlowSetup, Simulation};
use crate::time::SimTime;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    UnknownVariant(#[from] UnknownVariant),
    #[error("unknown node `{0}` referenced")]
    UnknownNode(String),
    #[error("no route between `{src}` and `{dst}`")]
    NoRoute { src: String, dst: String },
    #[error("buffer size must be at least one packet")]
    InvalidBuffer,
    #[error("duration must be positive")]
    InvalidDuration,
    #[error("scenario file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Access-delay layout of Experiment 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RttProfile {
    /// All senders 1 ms from the bottleneck: base RTT 204 ms.
    Homogeneous,
    /// Sender delays {1, 5, 10, 20} ms: base RTTs {204, 212, 222, 242} ms.
    Heterogeneous,
}

impl RttProfile {
    pub fn name(self) -> &'static str {
        match self {
            RttProfile::Homogeneous => "homogeneous",
            RttProfile::Heterogeneous => "heterogeneous",
        }
    }
}

impl fmt::Display for RttProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Knobs shared by the experiment builders. Defaults match the paper setup;
/// `scaled` gives the bandwidth-reduced CI configuration.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub bandwidth_bps: u64,
    pub duration: Duration,
    pub packet_size: u32,
    /// Experiment-2 start times are jittered uniformly in [0, jitter_max].
    pub jitter_max: Duration,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            bandwidth_bps: 1_000_000_000,
            duration: Duration::from_secs(100),
            packet_size: 1000,
            jitter_max: Duration::from_millis(100),
        }
    }
}

impl ScenarioConfig {
    pub fn scaled(bandwidth_mbps: u64, duration: Duration) -> Self {
        Self { bandwidth_bps: bandwidth_mbps * 1_000_000, duration, ..Self::default() }
    }

    /// One bandwidth-delay product worth of packets (one-way path delay).
    pub fn bdp_pkts(&self, one_way_delay: Duration) -> usize {
        let bits = self.bandwidth_bps as f64 * one_way_delay.as_secs_f64();
        (bits / 8.0 / self.packet_size as f64).round() as usize
    }
}

pub const CORE_DELAY: Duration = Duration::from_millis(100);
pub const ACCESS_DELAY: Duration = Duration::from_millis(1);
const HETERO_ACCESS_MS: [u64; 4] = [1, 5, 10, 20];
pub const EXP2_FLOWS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub from: String,
    pub to: String,
    pub bandwidth_bps: u64,
    pub delay: Duration,
    pub queue_pkts: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub variant: VariantKind,
    pub src: String,
    pub dst: String,
    pub start: SimTime,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub nodes: Vec<String>,
    pub links: Vec<LinkSpec>,
    pub flows: Vec<FlowSpec>,
    pub duration: Duration,
    pub packet_size: u32,
    pub seed: u64,
    pub cadence: TraceCadence,
    pub params: CcParams,
}

impl Scenario {
    /// Experiment 1: one sender, one receiver, no bottleneck. Every queue
    /// defaults to one BDP (12750 packets at full scale) unless overridden.
    pub fn exp1(
        variant: VariantKind,
        config: &ScenarioConfig,
        buffer_override: Option<usize>,
    ) -> Result<Scenario, ScenarioError> {
        let buffer = match buffer_override {
            Some(b) => b,
            None => config.bdp_pkts(CORE_DELAY + 2 * ACCESS_DELAY),
        };
        if buffer == 0 {
            return Err(ScenarioError::InvalidBuffer);
        }
        if config.duration.is_zero() {
            return Err(ScenarioError::InvalidDuration);
        }
        let nodes: Vec<String> = ["S1", "R1", "R2", "D1"].map(String::from).to_vec();
        let mut links = Vec::new();
        for (a, b, delay) in [
            ("S1", "R1", ACCESS_DELAY),
            ("R1", "R2", CORE_DELAY),
            ("R2", "D1", ACCESS_DELAY),
        ] {
            for (from, to) in [(a, b), (b, a)] {
                links.push(LinkSpec {
                    from: from.to_string(),
                    to: to.to_string(),
                    bandwidth_bps: config.bandwidth_bps,
                    delay,
                    queue_pkts: buffer,
                });
            }
        }
        Ok(Scenario {
            name: format!("exp1-{variant}"),
            nodes,
            links,
            flows: vec![FlowSpec {
                variant,
                src: "S1".into(),
                dst: "D1".into(),
                start: SimTime::ZERO,
            }],
            duration: config.duration,
            packet_size: config.packet_size,
            seed: 0,
            cadence: TraceCadence::PerAck,
            params: CcParams::default(),
        })
    }

    /// Experiment 2: four senders into a shared 1 Gbps bottleneck demanded at
    /// 4 Gbps. The bottleneck queue is the single queue with capacity
    /// `buffer_pkts`; access queues are twice that so the bottleneck binds.
    pub fn exp2(
        variant: VariantKind,
        buffer_pkts: usize,
        profile: RttProfile,
        seed: u64,
        config: &ScenarioConfig,
    ) -> Result<Scenario, ScenarioError> {
        if buffer_pkts == 0 {
            return Err(ScenarioError::InvalidBuffer);
        }
        if config.duration.is_zero() {
            return Err(ScenarioError::InvalidDuration);
        }
        let mut nodes = Vec::new();
        for i in 1..=EXP2_FLOWS {
            nodes.push(format!("S{i}"));
        }
        nodes.push("R1".into());
        nodes.push("R2".into());
        for i in 1..=EXP2_FLOWS {
            nodes.push(format!("D{i}"));
        }
        let access_queue = buffer_pkts * 2;
        let mut links = Vec::new();
        let mut push_pair = |a: &str, b: &str, delay: Duration, q: usize| {
            for (from, to) in [(a, b), (b, a)] {
                links.push(LinkSpec {
                    from: from.to_string(),
                    to: to.to_string(),
                    bandwidth_bps: config.bandwidth_bps,
                    delay,
                    queue_pkts: q,
                });
            }
        };
        for i in 1..=EXP2_FLOWS {
            let delay = match profile {
                RttProfile::Homogeneous => ACCESS_DELAY,
                RttProfile::Heterogeneous => Duration::from_millis(HETERO_ACCESS_MS[i - 1]),
            };
            push_pair(&format!("S{i}"), "R1", delay, access_queue);
        }
        for i in 1..=EXP2_FLOWS {
            push_pair("R2", &format!("D{i}"), ACCESS_DELAY, access_queue);
        }
        // The bottleneck proper, forward direction only at `buffer_pkts`.
        links.push(LinkSpec {
            from: "R1".into(),
            to: "R2".into(),
            bandwidth_bps: config.bandwidth_bps,
            delay: CORE_DELAY,
            queue_pkts: buffer_pkts,
        });
        links.push(LinkSpec {
            from: "R2".into(),
            to: "R1".into(),
            bandwidth_bps: config.bandwidth_bps,
            delay: CORE_DELAY,
            queue_pkts: access_queue,
        });
        // Start-time jitter is the run's only stochastic element.
        let mut rng = SplitMix64::new(seed);
        let jitter_ns = config.jitter_max.as_nanos() as u64;
        let flows = (1..=EXP2_FLOWS)
            .map(|i| FlowSpec {
                variant,
                src: format!("S{i}"),
                dst: format!("D{i}"),
                start: SimTime::from_nanos(if jitter_ns == 0 {
                    0
                } else {
                    rng.next_u64() % (jitter_ns + 1)
                }),
            })
            .collect();
        Ok(Scenario {
            name: format!("exp2-{variant}-b{buffer_pkts}-{profile}-s{seed}"),
            nodes,
            links,
            flows,
            duration: config.duration,
            packet_size: config.packet_size,
            seed,
            cadence: TraceCadence::PerAck,
            params: CcParams::default(),
        })
    }

    fn node_id(&self, name: &str) -> Result<usize, ScenarioError> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ScenarioError::UnknownNode(name.to_string()))
    }

    /// Wires the scenario into a runnable engine.
    pub fn build(&self) -> Result<Simulation, ScenarioError> {
        if self.duration.is_zero() {
            return Err(ScenarioError::InvalidDuration);
        }
        let mut net = Network::new(self.nodes.len());
        for l in &self.links {
            if l.queue_pkts == 0 {
                return Err(ScenarioError::InvalidBuffer);
            }
            let from = self.node_id(&l.from)?;
            let to = self.node_id(&l.to)?;
            net.add_link(from, to, l.bandwidth_bps, l.delay, l.queue_pkts);
        }
        net.compute_routes();
        let mut params = self.params.clone();
        params.packet_size = self.packet_size;
        let mut flows = Vec::with_capacity(self.flows.len());
        for f in &self.flows {
            let src = self.node_id(&f.src)?;
            let dst = self.node_id(&f.dst)?;
            if net.route(src, dst).is_none() || net.route(dst, src).is_none() {
                return Err(ScenarioError::NoRoute { src: f.src.clone(), dst: f.dst.clone() });
            }
            flows.push(FlowSetup {
                cc: build_cc(f.variant, &params),
                src,
                dst,
                start: f.start,
                packet_size: self.packet_size,
            });
        }
        Ok(Simulation::new(net, flows, self.duration, self.cadence)?)
    }

    /// Canonical plain-text form; `parse` reads it back bit-identically.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("[topology]\n");
        for n in &self.nodes {
            out.push_str(&format!("node = {n}\n"));
        }
        for l in &self.links {
            out.push_str(&format!(
                "link = {} {} {} {} {}\n",
                l.from,
                l.to,
                l.bandwidth_bps,
                l.delay.as_nanos(),
                l.queue_pkts
            ));
        }
        out.push_str("\n[flows]\n");
        for f in &self.flows {
            out.push_str(&format!(
                "flow = {} {} {} {}\n",
                f.variant,
                f.src,
                f.dst,
                f.start.as_nanos()
            ));
        }
        out.push_str("\n[sim]\n");
        out.push_str(&format!("name = {}\n", self.name));
        out.push_str(&format!("duration_ns = {}\n", self.duration.as_nanos()));
        out.push_str(&format!("packet_size = {}\n", self.packet_size));
        out.push_str(&format!("seed = {}\n", self.seed));
        match self.cadence {
            TraceCadence::PerAck => out.push_str("trace_cadence = per-ack\n"),
            TraceCadence::Interval(iv) => {
                out.push_str(&format!("trace_cadence = interval_ns:{}\n", iv.as_nanos()))
            }
        }
        let overrides = self.params.overrides();
        if !overrides.is_empty() {
            out.push_str("\n[params]\n");
            for (k, v) in overrides {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut sc = Scenario {
            name: String::new(),
            nodes: Vec::new(),
            links: Vec::new(),
            flows: Vec::new(),
            duration: Duration::ZERO,
            packet_size: 1000,
            seed: 0,
            cadence: TraceCadence::PerAck,
            params: CcParams::default(),
        };
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| ScenarioError::Parse { line: lineno, msg: msg.to_string() };
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| err("unterminated section"))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| err("expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match (section.as_str(), key) {
                ("topology", "node") => sc.nodes.push(value.to_string()),
                ("topology", "link") => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 5 {
                        return Err(err("link needs: from to bandwidth_bps delay_ns queue_pkts"));
                    }
                    sc.links.push(LinkSpec {
                        from: parts[0].to_string(),
                        to: parts[1].to_string(),
                        bandwidth_bps: parts[2].parse().map_err(|_| err("bad bandwidth"))?,
                        delay: Duration::from_nanos(
                            parts[3].parse().map_err(|_| err("bad delay"))?,
                        ),
                        queue_pkts: parts[4].parse().map_err(|_| err("bad queue size"))?,
                    });
                }
                ("flows", "flow") => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 4 {
                        return Err(err("flow needs: variant src dst start_ns"));
                    }
                    sc.flows.push(FlowSpec {
                        variant: parts[0].parse()?,
                        src: parts[1].to_string(),
                        dst: parts[2].to_string(),
                        start: SimTime::from_nanos(
                            parts[3].parse().map_err(|_| err("bad start time"))?,
                        ),
                    });
                }
                ("sim", "name") => sc.name = value.to_string(),
                ("sim", "duration_ns") => {
                    sc.duration =
                        Duration::from_nanos(value.parse().map_err(|_| err("bad duration"))?)
                }
                ("sim", "packet_size") => {
                    sc.packet_size = value.parse().map_err(|_| err("bad packet size"))?
                }
                ("sim", "seed") => sc.seed = value.parse().map_err(|_| err("bad seed"))?,
                ("sim", "trace_cadence") => {
                    sc.cadence = if value == "per-ack" {
                        TraceCadence::PerAck
                    } else if let Some(ns) = value.strip_prefix("interval_ns:") {
                        TraceCadence::Interval(Duration::from_nanos(
                            ns.parse().map_err(|_| err("bad trace interval"))?,
                        ))
                    } else {
                        return Err(err("trace_cadence is `per-ack` or `interval_ns:<n>`"));
                    }
                }
                ("params", k) => sc.params.set(k, value)?,
                _ => return Err(err(&format!("unknown key `{key}` in section `[{section}]`"))),
            }
        }
        if sc.duration.is_zero() {
            return Err(ScenarioError::InvalidDuration);
        }
        Ok(sc)
    }
}

/// Seeded generator for start-time jitter; stable across platforms forever.
#[derive(Debug, Clone)]
pub(crate) struct SplitMix64(u64);

impl SplitMix64 {
    pub(crate) fn new(seed: u64) -> Self {
        SplitMix64(seed)
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}
