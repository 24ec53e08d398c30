//! CUBIC: window follows a cubic of the time since the last loss, anchored so
//! it returns to the pre-loss window w_max exactly at the horizon K, with a
//! TCP-friendly floor so throughput never falls below the NewReno estimate.

use std::time::Duration;

use super::params::CubicParams;
use super::{clamp_after_decrease, slow_start_credit, CongestionControl};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

/// Horizon where the cubic regains w_max: K = (beta * w_max / c)^(1/3).
pub fn cubic_k(c: f64, beta: f64, w_max: f64) -> f64 {
    (beta * w_max / c).cbrt()
}

/// Window t seconds into an epoch: c * (t - K)^3 + w_max.
pub fn cubic_window(c: f64, beta: f64, w_max: f64, t: f64) -> f64 {
    let k = cubic_k(c, beta, w_max);
    c * (t - k).powi(3) + w_max
}

/// The NewReno-equivalent window the epoch would have reached by t.
pub fn reno_friendly_window(beta: f64, w_max: f64, t: f64, rtt: f64) -> f64 {
    w_max * (1.0 - beta) + (3.0 * beta / (2.0 - beta)) * (t / rtt)
}

#[derive(Debug)]
pub struct Cubic {
    params: CubicParams,
    w_max: f64,
    epoch_start: Option<SimTime>,
}

impl Cubic {
    pub fn new(params: CubicParams) -> Self {
        Self { params, w_max: 0.0, epoch_start: None }
    }
}

impl CongestionControl for Cubic {
    fn name(&self) -> &'static str {
        "cubic"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, now: SimTime) {
        let ca = slow_start_credit(flow, acked);
        if ca == 0 {
            return;
        }
        let epoch = match self.epoch_start {
            Some(t) => t,
            None => {
                // Congestion avoidance entered without a loss in this epoch
                // (post-timeout climb): anchor the curve so it passes through
                // the current window at t = 0.
                if self.w_max * (1.0 - self.params.beta) < flow.cwnd {
                    self.w_max = flow.cwnd / (1.0 - self.params.beta);
                }
                self.epoch_start = Some(now);
                now
            }
        };
        let t = now.elapsed_since(epoch).as_secs_f64();
        let mut target = cubic_window(self.params.c, self.params.beta, self.w_max, t);
        if flow.rtt.has_samples() {
            target = target.max(reno_friendly_window(
                self.params.beta,
                self.w_max,
                t,
                flow.rtt.srtt(),
            ));
        }
        if target > flow.cwnd {
            flow.cwnd += (target - flow.cwnd) / flow.cwnd * ca as f64;
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, now: SimTime) {
        // Fast convergence: losing below the previous maximum means a
        // competitor needs the bandwidth; remember less than the full window.
        self.w_max = if flow.cwnd < self.w_max {
            flow.cwnd * (2.0 - self.params.beta) / 2.0
        } else {
            flow.cwnd
        };
        flow.cwnd *= 1.0 - self.params.beta;
        flow.ssthresh = flow.cwnd;
        self.epoch_start = Some(now);
        clamp_after_decrease(flow);
    }

    fn on_timeout(&mut self, _flow: &mut TcpFlowState, _now: SimTime) {
        self.w_max = 0.0;
        self.epoch_start = None;
    }
}
