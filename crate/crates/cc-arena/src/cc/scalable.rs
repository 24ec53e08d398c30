//! Scalable TCP: fixed per-ACK increase alpha and multiplicative decrease
//! beta, independent of window size. Slow start is unchanged from NewReno.

use std::time::Duration;

use super::params::StcpParams;
use super::{clamp_after_decrease, slow_start_credit, CongestionControl};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

#[derive(Debug)]
pub struct Scalable {
    params: StcpParams,
}

impl Scalable {
    pub fn new(params: StcpParams) -> Self {
        Self { params }
    }
}

impl CongestionControl for Scalable {
    fn name(&self) -> &'static str {
        "scalable"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, _now: SimTime) {
        let ca = slow_start_credit(flow, acked);
        if ca > 0 {
            flow.cwnd += self.params.alpha * ca as f64;
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        flow.cwnd -= self.params.beta * flow.cwnd;
        flow.ssthresh = flow.cwnd;
        clamp_after_decrease(flow);
    }

    fn on_timeout(&mut self, _flow: &mut TcpFlowState, _now: SimTime) {}
}
