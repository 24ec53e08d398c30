//! The congestion-control plug-in contract and the eleven variants behind it.
//!
//! Hooks mutate only `cwnd`/`ssthresh` and their own state, never sequencing
//! state. Per-ACK rules apply only outside fast recovery; the endpoint owns
//! recovery inflation and the RTO window reset.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::tcp::TcpFlowState;
use crate::time::SimTime;

pub mod params;

mod africa;
mod bic;
mod compound;
mod cubic;
mod fusion;
mod highspeed;
mod htcp;
mod illinois;
mod newreno;
mod scalable;
mod yeah;

pub use africa::{Africa, AfricaMode};
pub use bic::{per_rtt_step, Bic};
pub use compound::{fast_gain, Compound};
pub use cubic::{cubic_k, cubic_window, reno_friendly_window, Cubic};
pub use fusion::Fusion;
pub use highspeed::{hstcp_lookup, HighSpeed};
pub use htcp::{htcp_alpha, htcp_decrease_factor, Htcp};
pub use illinois::{illinois_coeffs, Illinois};
pub use newreno::NewReno;
pub use params::{CcParams, ParamError};
pub use scalable::Scalable;
pub use yeah::{yeah_loss_reduction, Yeah};

/// Sender-side congestion control hooks.
pub trait CongestionControl {
    fn name(&self) -> &'static str;

    /// New-data cumulative ACK outside fast recovery. `acked` is the number of
    /// newly acknowledged packets; `rtt_sample` is set when the ACK produced a
    /// Karn-valid measurement.
    fn on_ack(
        &mut self,
        flow: &mut TcpFlowState,
        acked: u64,
        rtt_sample: Option<Duration>,
        now: SimTime,
    );

    /// Loss detected by three duplicate ACKs: apply the variant's decrease to
    /// `cwnd` and set `ssthresh`.
    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, now: SimTime);

    /// Retransmission timeout fired; reset variant signal state. The endpoint
    /// itself halves ssthresh and collapses cwnd to one packet.
    fn on_timeout(&mut self, flow: &mut TcpFlowState, now: SimTime);

    /// Karn-valid RTT sample; also fires on duplicate ACKs so delay signals
    /// stay fresh while the receiver drains out-of-order data.
    fn on_rtt_sample(&mut self, flow: &mut TcpFlowState, sample: Duration, now: SimTime) {
        let _ = (flow, sample, now);
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown TCP variant `{0}`")]
pub struct UnknownVariant(pub String);

/// The eleven variants, named by their comparison-table spellings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariantKind {
    Bic,
    Compound,
    Cubic,
    HighSpeed,
    Htcp,
    Illinois,
    Scalable,
    Fusion,
    Yeah,
    Africa,
    NewReno,
}

impl VariantKind {
    pub const ALL: [VariantKind; 11] = [
        VariantKind::Bic,
        VariantKind::Compound,
        VariantKind::Cubic,
        VariantKind::HighSpeed,
        VariantKind::Htcp,
        VariantKind::Illinois,
        VariantKind::Scalable,
        VariantKind::Fusion,
        VariantKind::Yeah,
        VariantKind::Africa,
        VariantKind::NewReno,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VariantKind::Bic => "bic",
            VariantKind::Compound => "compound",
            VariantKind::Cubic => "cubic",
            VariantKind::HighSpeed => "highspeed",
            VariantKind::Htcp => "htcp",
            VariantKind::Illinois => "illinois",
            VariantKind::Scalable => "scalable",
            VariantKind::Fusion => "fusion",
            VariantKind::Yeah => "yeah",
            VariantKind::Africa => "africa",
            VariantKind::NewReno => "newreno",
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantKind {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariantKind::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| UnknownVariant(s.to_string()))
    }
}

/// Instantiates a variant with its parameter block.
pub fn build_cc(kind: VariantKind, params: &CcParams) -> Box<dyn CongestionControl> {
    match kind {
        VariantKind::Bic => Box::new(Bic::new(params.bic)),
        VariantKind::Compound => Box::new(Compound::new(params.compound)),
        VariantKind::Cubic => Box::new(Cubic::new(params.cubic)),
        VariantKind::HighSpeed => Box::new(HighSpeed::new(params.hstcp)),
        VariantKind::Htcp => Box::new(Htcp::new(params.htcp)),
        VariantKind::Illinois => Box::new(Illinois::new(params.illinois)),
        VariantKind::Scalable => Box::new(Scalable::new(params.stcp)),
        VariantKind::Fusion => Box::new(Fusion::new(params.fusion, params.packet_size)),
        VariantKind::Yeah => Box::new(Yeah::new(params.yeah)),
        VariantKind::Africa => Box::new(Africa::new(params.africa, params.hstcp)),
        VariantKind::NewReno => Box::new(NewReno::new()),
    }
}

/// Vegas-style estimate of packets buffered in the network:
/// cwnd * (RTT - RTT_min) / RTT. Zero when the path is queue-free.
pub fn vegas_backlog(cwnd: f64, rtt: f64, rtt_min: f64) -> f64 {
    if rtt <= 0.0 {
        return 0.0;
    }
    (cwnd * (rtt - rtt_min) / rtt).max(0.0)
}

/// Standard slow start: one packet per acked packet until ssthresh. Returns
/// the acked packets left over for the congestion-avoidance rule.
pub(crate) fn slow_start_credit(flow: &mut TcpFlowState, acked: u64) -> u64 {
    let mut remaining = acked;
    while remaining > 0 && flow.cwnd < flow.ssthresh {
        flow.cwnd += 1.0;
        remaining -= 1;
    }
    remaining
}

/// Detects round (one-RTT) boundaries from cumulative ACK progress.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RoundTracker {
    end_seq: u64,
}

impl RoundTracker {
    /// True exactly once per round: when the cumulative ACK passes the
    /// highest sequence outstanding at the previous round boundary.
    pub(crate) fn on_ack(&mut self, flow: &TcpFlowState) -> bool {
        if flow.highest_acked >= self.end_seq {
            self.end_seq = flow.next_seq;
            true
        } else {
            false
        }
    }

    pub(crate) fn reset(&mut self, flow: &TcpFlowState) {
        self.end_seq = flow.next_seq;
    }
}

/// Decrease floors shared by every variant: cwnd never drops below one
/// packet, ssthresh never below two.
pub(crate) fn clamp_after_decrease(flow: &mut TcpFlowState) {
    flow.cwnd = flow.cwnd.max(1.0);
    flow.ssthresh = flow.ssthresh.max(2.0);
}
