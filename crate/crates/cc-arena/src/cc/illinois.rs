//! TCP-Illinois: loss sets the direction, delay sets the step. The increase
//! coefficient falls from alpha_max to alpha_min as the average queuing delay
//! grows; the decrease factor rises linearly from beta_min to beta_max.

use std::time::Duration;

use super::params::IllinoisParams;
use super::{clamp_after_decrease, slow_start_credit, CongestionControl};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

/// (alpha, beta) from the average and maximum queuing delays. d_m = 0 (no
/// queuing observed yet) yields the aggressive extreme (alpha_max, beta_min).
pub fn illinois_coeffs(d_a: f64, d_m: f64, p: &IllinoisParams) -> (f64, f64) {
    if d_m <= 0.0 {
        return (p.alpha_max, p.beta_min);
    }
    let d1 = p.d1_frac * d_m;
    let d2 = p.d2_frac * d_m;
    let d3 = p.d3_frac * d_m;
    let alpha = if d_a <= d1 {
        p.alpha_max
    } else {
        // kappa1/(kappa2 + d_a): continuous at d1, reaching alpha_min at d_m.
        let k1 = (d_m - d1) * p.alpha_min * p.alpha_max / (p.alpha_max - p.alpha_min);
        let k2 = (d_m - d1) * p.alpha_min / (p.alpha_max - p.alpha_min) - d1;
        (k1 / (k2 + d_a)).clamp(p.alpha_min, p.alpha_max)
    };
    let beta = if d_a <= d2 {
        p.beta_min
    } else if d_a >= d3 {
        p.beta_max
    } else {
        p.beta_min + (p.beta_max - p.beta_min) * (d_a - d2) / (d3 - d2)
    };
    (alpha, beta)
}

#[derive(Debug)]
pub struct Illinois {
    params: IllinoisParams,
}

impl Illinois {
    pub fn new(params: IllinoisParams) -> Self {
        Self { params }
    }
}

impl CongestionControl for Illinois {
    fn name(&self) -> &'static str {
        "illinois"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, _now: SimTime) {
        let ca = slow_start_credit(flow, acked);
        if ca > 0 {
            let (alpha, _) = illinois_coeffs(
                flow.rtt.queuing_delay_avg(),
                flow.rtt.queuing_delay_max(),
                &self.params,
            );
            flow.cwnd += alpha * ca as f64 / flow.cwnd;
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        let (_, beta) = illinois_coeffs(
            flow.rtt.queuing_delay_avg(),
            flow.rtt.queuing_delay_max(),
            &self.params,
        );
        flow.cwnd -= beta * flow.cwnd;
        flow.ssthresh = flow.cwnd;
        clamp_after_decrease(flow);
    }

    fn on_timeout(&mut self, _flow: &mut TcpFlowState, _now: SimTime) {}
}
