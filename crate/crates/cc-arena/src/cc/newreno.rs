//! NewReno: the comparison baseline. One packet per ACK in slow start,
//! 1/cwnd per ACK in congestion avoidance, halve on loss.

use std::time::Duration;

use super::{clamp_after_decrease, slow_start_credit, CongestionControl};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

#[derive(Debug, Default)]
pub struct NewReno;

impl NewReno {
    pub fn new() -> Self {
        NewReno
    }
}

impl CongestionControl for NewReno {
    fn name(&self) -> &'static str {
        "newreno"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, _now: SimTime) {
        let ca = slow_start_credit(flow, acked);
        if ca > 0 {
            flow.cwnd += ca as f64 / flow.cwnd;
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        flow.ssthresh = (flow.cwnd / 2.0).max(2.0);
        flow.cwnd = flow.ssthresh;
        clamp_after_decrease(flow);
    }

    fn on_timeout(&mut self, _flow: &mut TcpFlowState, _now: SimTime) {}
}
