//! YeAH: STCP-style growth while the queue estimate and delay ratio say the
//! path is empty, NewReno plus precautionary decongestion otherwise, and a
//! backlog-proportional reduction on congestion-avoidance losses.

use std::time::Duration;

use super::params::YeahParams;
use super::{clamp_after_decrease, slow_start_credit, vegas_backlog, CongestionControl, RoundTracker};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

/// Reduction applied on a congestion-avoidance loss: the queue estimate,
/// kept between cwnd/8 and cwnd/2.
pub fn yeah_loss_reduction(cwnd: f64, q: f64) -> f64 {
    q.clamp(cwnd / 8.0, cwnd / 2.0)
}

#[derive(Debug)]
pub struct Yeah {
    params: YeahParams,
    fast: bool,
    slow_rounds: u32,
    round: RoundTracker,
}

impl Yeah {
    pub fn new(params: YeahParams) -> Self {
        Self { params, fast: true, slow_rounds: 0, round: RoundTracker::default() }
    }

    pub fn in_fast_mode(&self) -> bool {
        self.fast
    }

    fn backlog(&self, flow: &TcpFlowState) -> f64 {
        vegas_backlog(flow.cwnd, flow.rtt.srtt(), flow.rtt.rtt_min())
    }
}

impl CongestionControl for Yeah {
    fn name(&self) -> &'static str {
        "yeah"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, _now: SimTime) {
        let ca = slow_start_credit(flow, acked);
        if ca > 0 {
            if self.fast {
                flow.cwnd += self.params.stcp_alpha * ca as f64;
            } else {
                flow.cwnd += ca as f64 / flow.cwnd;
            }
        }
        if self.round.on_ack(flow) && !flow.in_slow_start() && flow.rtt.has_samples() {
            let rtt_min = flow.rtt.rtt_min();
            let q = self.backlog(flow);
            let delay_ratio = if rtt_min > 0.0 { (flow.rtt.srtt() - rtt_min) / rtt_min } else { 0.0 };
            self.fast = q < self.params.alpha_q && delay_ratio < 1.0 / self.params.phi;
            if self.fast {
                self.slow_rounds = 0;
            } else {
                self.slow_rounds += 1;
                if self.slow_rounds >= 2 {
                    // Persistently slow: precautionary decongestion drains the
                    // estimated backlog once per RTT.
                    flow.cwnd = (flow.cwnd - q).max(2.0);
                }
            }
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        if flow.in_slow_start() {
            flow.ssthresh = (flow.cwnd / 2.0).max(2.0);
            flow.cwnd = flow.ssthresh;
        } else {
            let q = self.backlog(flow);
            flow.cwnd -= yeah_loss_reduction(flow.cwnd, q);
            flow.ssthresh = flow.cwnd;
        }
        clamp_after_decrease(flow);
    }

    fn on_timeout(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        self.fast = true;
        self.slow_rounds = 0;
        self.round.reset(flow);
    }
}
