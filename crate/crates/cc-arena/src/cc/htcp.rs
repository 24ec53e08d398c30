//! H-TCP: increase coefficient grows with the time elapsed since the last
//! congestion signal; backoff adapts to the RTT spread when throughput is
//! steady, otherwise halves.

use std::time::Duration;

use super::params::HtcpParams;
use super::{clamp_after_decrease, slow_start_credit, CongestionControl};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

/// Increase coefficient as a function of seconds since the last congestion
/// event: 1 below delta_low, then 1 + 10(d) + 0.5 d^2 with d = delta - delta_low.
pub fn htcp_alpha(delta: f64, delta_low: f64) -> f64 {
    if delta < delta_low {
        1.0
    } else {
        let d = delta - delta_low;
        1.0 + 10.0 * d + 0.5 * d * d
    }
}

/// Backoff factor: RTT_min/RTT_max clamped to [floor, ceil] when the
/// throughput estimate moved less than the gamma threshold, 0.5 otherwise.
/// An absent previous estimate (b_prev = 0) halves.
pub fn htcp_decrease_factor(
    b_k: f64,
    b_prev: f64,
    rtt_min: f64,
    rtt_max: f64,
    p: &HtcpParams,
) -> f64 {
    let steady = b_prev > 0.0 && ((b_k - b_prev) / b_prev).abs() < p.gamma_threshold;
    if steady && rtt_max > 0.0 {
        (rtt_min / rtt_max).clamp(p.decrease_floor, p.decrease_ceil)
    } else {
        0.5
    }
}

#[derive(Debug)]
pub struct Htcp {
    params: HtcpParams,
    last_congestion: Option<SimTime>,
    /// B(k-1): packets per second achieved over the previous loss epoch.
    throughput_prev: f64,
    acked_at_last_loss: u64,
    last_loss_time: SimTime,
}

impl Htcp {
    pub fn new(params: HtcpParams) -> Self {
        Self {
            params,
            last_congestion: None,
            throughput_prev: 0.0,
            acked_at_last_loss: 0,
            last_loss_time: SimTime::ZERO,
        }
    }

    /// Delivered packets over the epoch ending now.
    fn epoch_throughput(&self, flow: &TcpFlowState, now: SimTime) -> f64 {
        let elapsed = now.elapsed_since(self.last_loss_time).as_secs_f64();
        if elapsed <= 0.0 {
            return 0.0;
        }
        (flow.total_acked_pkts - self.acked_at_last_loss) as f64 / elapsed
    }

    fn mark_congestion(&mut self, flow: &TcpFlowState, now: SimTime, b_k: f64) {
        self.throughput_prev = b_k;
        self.acked_at_last_loss = flow.total_acked_pkts;
        self.last_loss_time = now;
        self.last_congestion = Some(now);
    }
}

impl CongestionControl for Htcp {
    fn name(&self) -> &'static str {
        "htcp"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, now: SimTime) {
        let ca = slow_start_credit(flow, acked);
        if ca > 0 {
            let delta = self
                .last_congestion
                .map(|t| now.elapsed_since(t).as_secs_f64())
                .unwrap_or(0.0);
            flow.cwnd += htcp_alpha(delta, self.params.delta_low) * ca as f64 / flow.cwnd;
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, now: SimTime) {
        let b_k = self.epoch_throughput(flow, now);
        let factor = htcp_decrease_factor(
            b_k,
            self.throughput_prev,
            flow.rtt.rtt_min(),
            flow.rtt.rtt_max(),
            &self.params,
        );
        flow.cwnd *= factor;
        flow.ssthresh = flow.cwnd;
        clamp_after_decrease(flow);
        self.mark_congestion(flow, now, b_k);
    }

    fn on_timeout(&mut self, flow: &mut TcpFlowState, now: SimTime) {
        // A timeout is a congestion signal too: reset the elapsed-time epoch
        // and invalidate the previous throughput estimate.
        let b_k = self.epoch_throughput(flow, now);
        self.mark_congestion(flow, now, b_k);
        self.throughput_prev = 0.0;
    }
}
