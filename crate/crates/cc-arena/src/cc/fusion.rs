//! TCP Fusion: Westwood-style achievable-rate estimation with three
//! queuing-delay bands. Below the threshold the window climbs by the rate
//! headroom; above three times the threshold it sheds the estimated backlog;
//! in between it holds.

use std::time::Duration;

use super::params::FusionParams;
use super::{clamp_after_decrease, slow_start_credit, vegas_backlog, CongestionControl, RoundTracker};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

#[derive(Debug)]
pub struct Fusion {
    params: FusionParams,
    packet_size: f64,
    /// Achievable-rate EWMA, bytes per second. Zero until the first round
    /// completes.
    rate_est: f64,
    round: RoundTracker,
    round_start: SimTime,
    acked_at_round_start: u64,
}

impl Fusion {
    pub fn new(params: FusionParams, packet_size: u32) -> Self {
        Self {
            params,
            packet_size: packet_size as f64,
            rate_est: 0.0,
            round: RoundTracker::default(),
            round_start: SimTime::ZERO,
            acked_at_round_start: 0,
        }
    }

    pub fn rate_estimate(&self) -> f64 {
        self.rate_est
    }

    /// Per-RTT fast-mode increase in packets: rate * q_th / packet_size.
    pub fn fast_increase(&self) -> f64 {
        self.rate_est * self.params.q_th / self.packet_size
    }
}

impl CongestionControl for Fusion {
    fn name(&self) -> &'static str {
        "fusion"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, now: SimTime) {
        let ca = slow_start_credit(flow, acked);
        if ca > 0 && self.rate_est == 0.0 {
            // No rate samples yet: NewReno increase.
            flow.cwnd += ca as f64 / flow.cwnd;
        }
        if self.round.on_ack(flow) {
            let dt = now.elapsed_since(self.round_start).as_secs_f64();
            if dt > 0.0 && flow.rtt.has_samples() {
                let sample =
                    (flow.total_acked_pkts - self.acked_at_round_start) as f64 * self.packet_size / dt;
                self.rate_est = if self.rate_est == 0.0 {
                    sample
                } else {
                    (1.0 - self.params.rate_gain) * self.rate_est + self.params.rate_gain * sample
                };
                if !flow.in_slow_start() {
                    let q_delay = (flow.rtt.srtt() - flow.rtt.rtt_min()).max(0.0);
                    if q_delay < self.params.q_th {
                        flow.cwnd += self.fast_increase();
                    } else if q_delay > 3.0 * self.params.q_th {
                        let buffered =
                            vegas_backlog(flow.cwnd, flow.rtt.srtt(), flow.rtt.rtt_min());
                        flow.cwnd = (flow.cwnd - buffered).max(1.0);
                    }
                    // Between one and three thresholds the window holds.
                }
            }
            self.round_start = now;
            self.acked_at_round_start = flow.total_acked_pkts;
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        let westwood = self.rate_est * flow.rtt.rtt_min() / self.packet_size;
        flow.ssthresh = westwood.max(flow.cwnd / 2.0).max(2.0);
        flow.cwnd = flow.ssthresh;
        clamp_after_decrease(flow);
    }

    fn on_timeout(&mut self, flow: &mut TcpFlowState, now: SimTime) {
        self.round_start = now;
        self.acked_at_round_start = flow.total_acked_pkts;
        self.round.reset(flow);
    }
}
