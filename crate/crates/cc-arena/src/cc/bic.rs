//! BIC: binary-search increase toward the window where the last loss
//! happened, then max probing beyond it, with per-RTT steps clamped to
//! [s_min, s_max].

use std::time::Duration;

use super::params::BicParams;
use super::{clamp_after_decrease, slow_start_credit, CongestionControl, RoundTracker};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

/// Per-RTT increment. Below w_max: step toward the midpoint of
/// [w_min, w_max]. At or above w_max: max probing, growing with the distance
/// past the old maximum. Both clamped to [s_min, s_max].
pub fn per_rtt_step(cwnd: f64, w_min: f64, w_max: f64, p: &BicParams) -> f64 {
    if w_max > 0.0 && cwnd < w_max {
        let midpoint = (w_min + w_max) / 2.0;
        (midpoint - cwnd).clamp(p.s_min, p.s_max)
    } else {
        (cwnd - w_max).clamp(p.s_min, p.s_max)
    }
}

#[derive(Debug)]
pub struct Bic {
    params: BicParams,
    w_min: f64,
    w_max: f64,
    round: RoundTracker,
}

impl Bic {
    pub fn new(params: BicParams) -> Self {
        Self { params, w_min: 0.0, w_max: 0.0, round: RoundTracker::default() }
    }
}

impl CongestionControl for Bic {
    fn name(&self) -> &'static str {
        "bic"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, _now: SimTime) {
        let ca = slow_start_credit(flow, acked);
        if ca > 0 {
            if flow.cwnd < self.params.low_window {
                flow.cwnd += ca as f64 / flow.cwnd;
            } else {
                let step = per_rtt_step(flow.cwnd, self.w_min, self.w_max, &self.params);
                flow.cwnd += step * ca as f64 / flow.cwnd;
            }
        }
        // The window reached this round without loss, so it is a safe lower
        // bound for the binary search.
        if self.round.on_ack(flow) && self.w_max > 0.0 && flow.cwnd < self.w_max {
            self.w_min = flow.cwnd;
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        let factor = if flow.cwnd < self.params.low_window { 0.5 } else { self.params.beta_factor };
        // Fast convergence: a loss below the previous maximum means another
        // flow is claiming bandwidth; remember a reduced maximum to release
        // share to it.
        self.w_max = if flow.cwnd < self.w_max {
            flow.cwnd * (1.0 + self.params.beta_factor) / 2.0
        } else {
            flow.cwnd
        };
        flow.cwnd *= factor;
        flow.ssthresh = flow.cwnd;
        self.w_min = flow.cwnd;
        clamp_after_decrease(flow);
        self.round.reset(flow);
    }

    fn on_timeout(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        self.w_max = 0.0;
        self.w_min = 0.0;
        self.round.reset(flow);
    }
}
