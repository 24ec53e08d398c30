//! Per-flow counters, cwnd-dynamics traces, and the derived report:
//! throughput, loss ratio, and Jain fairness indices.

use std::io::{self, Write};
use std::time::Duration;

use thiserror::Error;

use crate::net::FlowId;
use crate::tcp::{CongestionState, TcpFlowState};
use crate::time::SimTime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("flow {0} has zero duration; throughput undefined")]
    ZeroDuration(FlowId),
    #[error("flow {0} sent no packets; loss ratio undefined")]
    NoPacketsSent(FlowId),
    #[error("Jain index undefined for empty or all-zero input")]
    DegenerateJainInput,
}

/// Jain's fairness index: (sum x)^2 / (n * sum x^2). One for equal shares,
/// 1/n when a single value is nonzero.
pub fn jain_index(values: &[f64]) -> Result<f64, MetricsError> {
    if values.is_empty() || values.iter().all(|&v| v == 0.0) {
        return Err(MetricsError::DegenerateJainInput);
    }
    debug_assert!(values.iter().all(|&v| v >= 0.0));
    let sum: f64 = values.iter().sum();
    let sum_sq: f64 = values.iter().map(|&v| v * v).sum();
    Ok(sum * sum / (values.len() as f64 * sum_sq))
}

/// Cumulative per-flow counts. Delivered bytes are goodput: first-time
/// deliveries only, excluding retransmitted duplicates.
#[derive(Debug, Clone, Default)]
pub struct FlowCounters {
    pub pkts_sent: u64,
    pub bytes_sent: u64,
    pub pkts_retransmitted: u64,
    pub pkts_lost: u64,
    pub pkts_delivered: u64,
    pub bytes_delivered: u64,
    pub data_arrivals: u64,
    pub acks_sent: u64,
    pub acks_received: u64,
    pub acks_lost: u64,
    pub new_data_acks: u64,
    pub start: SimTime,
    pub end: SimTime,
}

pub fn flow_throughput_mbps(flow: FlowId, c: &FlowCounters) -> Result<f64, MetricsError> {
    let secs = c.end.elapsed_since(c.start).as_secs_f64();
    if secs <= 0.0 {
        return Err(MetricsError::ZeroDuration(flow));
    }
    Ok(c.bytes_delivered as f64 * 8.0 / secs / 1e6)
}

pub fn flow_loss_ratio(flow: FlowId, c: &FlowCounters) -> Result<f64, MetricsError> {
    if c.pkts_sent == 0 {
        return Err(MetricsError::NoPacketsSent(flow));
    }
    Ok(c.pkts_lost as f64 / c.pkts_sent as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwndTracePoint {
    pub time: SimTime,
    pub flow: FlowId,
    pub cwnd: f64,
    pub ssthresh: f64,
    pub state: CongestionState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CongestionSignal {
    DupAck,
    Rto,
}

/// One congestion response, recorded at the instant the window was cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CongestionEvent {
    pub time: SimTime,
    pub flow: FlowId,
    pub cwnd_before: f64,
    pub cwnd_after: f64,
    pub signal: CongestionSignal,
    pub in_slow_start: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceCadence {
    /// One trace point per new-data ACK.
    PerAck,
    /// Engine-scheduled samples at a fixed interval.
    Interval(Duration),
}

/// Collects everything a run emits; one collector per run.
#[derive(Debug)]
pub struct Collector {
    cadence: TraceCadence,
    pub flows: Vec<FlowCounters>,
    pub trace: Vec<CwndTracePoint>,
    pub congestion_events: Vec<CongestionEvent>,
    pub first_drop: Option<(SimTime, FlowId)>,
    /// Per-drop (time, flow, seq) records, for tests that track individual
    /// losses. Off by default: burst losses make this large.
    pub detail_drops: Option<Vec<(SimTime, FlowId, u64)>>,
    pub total_drops: u64,
    pub total_deliveries: u64,
}

impl Collector {
    pub fn new(flow_count: usize, cadence: TraceCadence) -> Self {
        Self {
            cadence,
            flows: vec![FlowCounters::default(); flow_count],
            trace: Vec::new(),
            congestion_events: Vec::new(),
            first_drop: None,
            detail_drops: None,
            total_drops: 0,
            total_deliveries: 0,
        }
    }

    pub fn cadence(&self) -> TraceCadence {
        self.cadence
    }

    pub fn set_flow_start(&mut self, flow: FlowId, t: SimTime) {
        self.flows[flow].start = t;
    }

    pub fn on_data_sent(&mut self, flow: FlowId, bytes: u32, retransmit: bool) {
        let c = &mut self.flows[flow];
        c.pkts_sent += 1;
        c.bytes_sent += bytes as u64;
        if retransmit {
            c.pkts_retransmitted += 1;
        }
    }

    /// Loss is counted at drop time in the queue that discarded the packet.
    pub fn on_drop(&mut self, now: SimTime, flow: FlowId, is_data: bool, seq: Option<u64>) {
        self.total_drops += 1;
        if is_data {
            self.flows[flow].pkts_lost += 1;
            if self.first_drop.is_none() {
                self.first_drop = Some((now, flow));
            }
            if let (Some(log), Some(seq)) = (self.detail_drops.as_mut(), seq) {
                log.push((now, flow, seq));
            }
        } else {
            self.flows[flow].acks_lost += 1;
        }
    }

    pub fn on_data_arrival(&mut self, flow: FlowId) {
        self.flows[flow].data_arrivals += 1;
    }

    /// First-time delivery of a distinct data packet.
    pub fn on_goodput(&mut self, flow: FlowId, bytes: u32) {
        let c = &mut self.flows[flow];
        c.pkts_delivered += 1;
        c.bytes_delivered += bytes as u64;
        self.total_deliveries += 1;
    }

    pub fn on_ack_sent(&mut self, flow: FlowId) {
        self.flows[flow].acks_sent += 1;
    }

    pub fn on_ack_arrival(&mut self, flow: FlowId) {
        self.flows[flow].acks_received += 1;
    }

    pub fn on_new_data_ack(&mut self, flow: FlowId, now: SimTime, state: &TcpFlowState) {
        self.flows[flow].new_data_acks += 1;
        if self.cadence == TraceCadence::PerAck {
            self.record_trace(flow, now, state.cwnd, state.ssthresh, state.state);
        }
    }

    pub fn record_trace(
        &mut self,
        flow: FlowId,
        time: SimTime,
        cwnd: f64,
        ssthresh: f64,
        state: CongestionState,
    ) {
        debug_assert!(
            self.trace.last().map_or(true, |p| p.flow != flow || p.time <= time),
            "trace must be time-ordered per flow"
        );
        self.trace.push(CwndTracePoint { time, flow, cwnd, ssthresh, state });
    }

    pub fn on_congestion_event(&mut self, ev: CongestionEvent) {
        self.congestion_events.push(ev);
    }

    pub fn finalize(&mut self, t_end: SimTime) {
        for c in &mut self.flows {
            c.end = t_end;
        }
    }

    pub fn flow_trace(&self, flow: FlowId) -> impl Iterator<Item = &CwndTracePoint> {
        self.trace.iter().filter(move |p| p.flow == flow)
    }
}

/// Per-flow and aggregate results of one run.
#[derive(Debug, Clone)]
pub struct FlowMetrics {
    pub flow: FlowId,
    pub throughput_mbps: f64,
    pub loss_ratio: f64,
    pub pkts_sent: u64,
    pub pkts_lost: u64,
    pub bytes_delivered: u64,
}

#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub per_flow: Vec<FlowMetrics>,
    pub aggregate_throughput_mbps: f64,
    pub mean_flow_throughput_mbps: f64,
    /// Aggregate lost/sent across flows.
    pub loss_ratio: f64,
    /// Jain index over per-flow throughputs.
    pub fairness: f64,
}

pub fn build_report(collector: &Collector) -> Result<MetricsReport, MetricsError> {
    let mut per_flow = Vec::with_capacity(collector.flows.len());
    let mut sum_tp = 0.0;
    let (mut sent, mut lost) = (0u64, 0u64);
    for (i, c) in collector.flows.iter().enumerate() {
        let tp = flow_throughput_mbps(i, c)?;
        per_flow.push(FlowMetrics {
            flow: i,
            throughput_mbps: tp,
            loss_ratio: flow_loss_ratio(i, c)?,
            pkts_sent: c.pkts_sent,
            pkts_lost: c.pkts_lost,
            bytes_delivered: c.bytes_delivered,
        });
        sum_tp += tp;
        sent += c.pkts_sent;
        lost += c.pkts_lost;
    }
    let n = per_flow.len().max(1) as f64;
    let throughputs: Vec<f64> = per_flow.iter().map(|f| f.throughput_mbps).collect();
    Ok(MetricsReport {
        aggregate_throughput_mbps: sum_tp,
        mean_flow_throughput_mbps: sum_tp / n,
        loss_ratio: if sent > 0 { lost as f64 / sent as f64 } else { 0.0 },
        fairness: jain_index(&throughputs)?,
        per_flow,
    })
}

/// Trace file: one record per line, tab-separated
/// time_s, flow_id, cwnd_pkts, ssthresh_pkts, state; six decimals for time.
pub fn write_trace<W: Write>(w: &mut W, points: &[CwndTracePoint]) -> io::Result<()> {
    for p in points {
        writeln!(
            w,
            "{}\t{}\t{:.3}\t{}\t{}",
            p.time,
            p.flow,
            p.cwnd,
            format_ssthresh(p.ssthresh),
            p.state.label()
        )?;
    }
    Ok(())
}

fn format_ssthresh(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3}")
    } else {
        "inf".to_string()
    }
}
