//! TCP Africa: Vegas-style backlog estimate picks between an aggressive fast
//! mode (HS-TCP rules) when the path is queue-free and a conservative slow
//! mode (NewReno rules) once buffering builds up.

use std::time::Duration;

use super::highspeed::hstcp_lookup;
use super::params::{AfricaParams, HstcpParams};
use super::{clamp_after_decrease, slow_start_credit, vegas_backlog, CongestionControl};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfricaMode {
    Fast,
    Slow,
}

#[derive(Debug)]
pub struct Africa {
    params: AfricaParams,
    hstcp: HstcpParams,
    mode: AfricaMode,
}

impl Africa {
    pub fn new(params: AfricaParams, hstcp: HstcpParams) -> Self {
        Self { params, hstcp, mode: AfricaMode::Fast }
    }

    pub fn mode(&self) -> AfricaMode {
        self.mode
    }
}

impl CongestionControl for Africa {
    fn name(&self) -> &'static str {
        "africa"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, _now: SimTime) {
        let ca = slow_start_credit(flow, acked);
        if ca == 0 {
            return;
        }
        match self.mode {
            AfricaMode::Fast => {
                let (a, _) = hstcp_lookup(flow.cwnd, &self.hstcp);
                flow.cwnd += a * ca as f64 / flow.cwnd;
            }
            AfricaMode::Slow => flow.cwnd += ca as f64 / flow.cwnd,
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        match self.mode {
            AfricaMode::Fast => {
                let (_, b) = hstcp_lookup(flow.cwnd, &self.hstcp);
                flow.cwnd *= 1.0 - b;
            }
            AfricaMode::Slow => flow.cwnd /= 2.0,
        }
        flow.ssthresh = flow.cwnd;
        clamp_after_decrease(flow);
    }

    fn on_timeout(&mut self, _flow: &mut TcpFlowState, _now: SimTime) {
        self.mode = AfricaMode::Fast;
    }

    fn on_rtt_sample(&mut self, flow: &mut TcpFlowState, sample: Duration, _now: SimTime) {
        let delta = vegas_backlog(flow.cwnd, sample.as_secs_f64(), flow.rtt.rtt_min());
        // Strictly below the threshold: an estimate exactly at alpha is slow.
        self.mode = if delta < self.params.alpha_thresh { AfricaMode::Fast } else { AfricaMode::Slow };
    }
}
