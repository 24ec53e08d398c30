//! HS-TCP: window-dependent increase a(w) and decrease b(w), pinned to
//! (1, 0.5) at 38 packets and (70, 0.1) at 83000, interpolated in log space
//! between. Slow start is limited to max_ssthresh-sized growth per RTT.

use std::time::Duration;

use super::params::HstcpParams;
use super::{clamp_after_decrease, CongestionControl};
use crate::tcp::TcpFlowState;
use crate::time::SimTime;

/// The a(w)/b(w) lookup. b(w) is log-linear between the endpoints; a(w)
/// follows the AIMD response-function identity a = w^2 p(w) 2b/(2-b) with
/// p(w) a power law through (low_window, p_low) and (high_window, p_high),
/// capped at a_high so the pinned endpoint holds and a stays non-decreasing.
pub fn hstcp_lookup(w: f64, p: &HstcpParams) -> (f64, f64) {
    if w <= p.low_window {
        return (1.0, p.b_low);
    }
    let wc = w.min(p.high_window);
    let frac = (wc.ln() - p.low_window.ln()) / (p.high_window.ln() - p.low_window.ln());
    let b = p.b_low + (p.b_high - p.b_low) * frac;
    let pw = (p.p_low.ln() + (p.p_high.ln() - p.p_low.ln()) * frac).exp();
    let a = (wc * wc * pw * 2.0 * b / (2.0 - b)).min(p.a_high);
    (a, b)
}

#[derive(Debug)]
pub struct HighSpeed {
    params: HstcpParams,
}

impl HighSpeed {
    pub fn new(params: HstcpParams) -> Self {
        Self { params }
    }
}

impl CongestionControl for HighSpeed {
    fn name(&self) -> &'static str {
        "highspeed"
    }

    fn on_ack(&mut self, flow: &mut TcpFlowState, acked: u64, _rtt: Option<Duration>, _now: SimTime) {
        let mut remaining = acked;
        // Limited slow start: beyond max_ssthresh the per-RTT growth is capped
        // at max_ssthresh/2 packets.
        while remaining > 0 && flow.cwnd < flow.ssthresh {
            if flow.cwnd <= self.params.max_ssthresh {
                flow.cwnd += 1.0;
            } else {
                flow.cwnd += self.params.max_ssthresh / (2.0 * flow.cwnd);
            }
            remaining -= 1;
        }
        if remaining > 0 {
            let (a, _) = hstcp_lookup(flow.cwnd, &self.params);
            flow.cwnd += a * remaining as f64 / flow.cwnd;
        }
    }

    fn on_loss_dupack(&mut self, flow: &mut TcpFlowState, _now: SimTime) {
        let (_, b) = hstcp_lookup(flow.cwnd, &self.params);
        flow.cwnd *= 1.0 - b;
        flow.ssthresh = flow.cwnd;
        clamp_after_decrease(flow);
    }

    fn on_timeout(&mut self, _flow: &mut TcpFlowState, _now: SimTime) {}
}
