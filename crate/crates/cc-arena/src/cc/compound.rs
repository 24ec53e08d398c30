//! Compound TCP: W = W_reno + W_fast. The loss-based component follows
//! NewReno per ACK; the delay-based component grows binomially per RTT while
//! the path is queue-free and drains proportionally to the backlog otherwise.

use std::time::Duration;

use super::params::CompoundParams;
use super::{clamp_after_decrease, slow_start_credit, vegas_backlog, CongestionControl, RoundTracker};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

/// Per-RTT fast-component gain: max(alpha_inc * W^k - 1, 0).
pub fn fast_gain(w: f64, k_exp: f64, alpha_inc: f64) -> f64 {
    (alpha_inc * w.powf(k_exp) - 1.0).max(0.0)
}

#[derive(Debug)]
pub struct Compound {
    params: CompoundParams,
    w_fast: f64,
    round: RoundTracker,
}

impl Compound {
    pub fn new(params: CompoundParams) -> Self {
        Self { params, w_fast: 0.0, round: RoundTracker::default() }
    }

    pub fn w_fast(&self) -> f64 {
        self.w_fast
    }
}

impl CongestionControl for Compound {
    fn name(&self) -> &'static str {
        "compound"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, _now: SimTime) {
        let ca = slow_start_credit(flow, acked);
        if ca > 0 {
            // W_reno component; the divisor is the full window per the
            // aggregate-window formulation.
            flow.cwnd += ca as f64 / flow.cwnd;
        }
        if self.round.on_ack(flow) && !flow.in_slow_start() && flow.rtt.has_samples() {
            let delta = vegas_backlog(flow.cwnd, flow.rtt.srtt(), flow.rtt.rtt_min());
            if delta < self.params.gamma_pkts {
                let inc = fast_gain(flow.cwnd, self.params.k_exp, self.params.alpha_inc);
                self.w_fast += inc;
                flow.cwnd += inc;
            } else {
                // W_fast = max(0, W_fast - zeta * delta).
                let dec = (self.params.zeta * delta).min(self.w_fast);
                self.w_fast -= dec;
                flow.cwnd -= dec;
            }
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        // Both components halve so the aggregate window halves.
        flow.cwnd *= 0.5;
        self.w_fast *= 0.5;
        flow.ssthresh = flow.cwnd;
        clamp_after_decrease(flow);
    }

    fn on_timeout(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        self.w_fast = 0.0;
        self.round.reset(flow);
    }
}
