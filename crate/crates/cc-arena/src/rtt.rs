//! SRTT/RTTVAR estimation with RTO, path extrema, and a short recent-sample
//! window feeding the delay-average used by the delay-based variants.

use std::time::Duration;

use crate::time::SimTime;

pub const MIN_RTO: Duration = Duration::from_millis(200);
pub const MAX_RTO: Duration = Duration::from_secs(60);
const INITIAL_RTO: Duration = Duration::from_secs(1);

/// Floor on the variance term, as in the Linux estimator (rttvar never falls
/// below the minimum RTO). Per-packet ACKs combined with a deterministic
/// clock drive rttvar to zero on steady paths, which would make rto equal
/// srtt exactly and fire spuriously on every queue-delay uptick.
const VAR_TERM_FLOOR: f64 = 0.200;

/// Recent-sample window backing the delay-average d_a. Small enough that the
/// average tracks the queue state at loss instants.
const AVG_WINDOW: usize = 16;

#[derive(Debug, Clone)]
pub struct RttEstimator {
    srtt: f64,
    rttvar: f64,
    rto: Duration,
    rtt_min: f64,
    rtt_max: f64,
    window: [f64; AVG_WINDOW],
    filled: usize,
    slot: usize,
    samples: u64,
}

impl Default for RttEstimator {
    fn default() -> Self {
        Self::new()
    }
}

impl RttEstimator {
    pub fn new() -> Self {
        Self {
            srtt: 0.0,
            rttvar: 0.0,
            rto: INITIAL_RTO,
            rtt_min: f64::INFINITY,
            rtt_max: 0.0,
            window: [0.0; AVG_WINDOW],
            filled: 0,
            slot: 0,
            samples: 0,
        }
    }

    /// Feeds one sample (seconds). Samples must come from non-retransmitted
    /// segments; the caller enforces Karn's rule.
    pub fn update(&mut self, sample: Duration) {
        let s = sample.as_secs_f64();
        debug_assert!(s > 0.0);
        if self.samples == 0 {
            self.srtt = s;
            self.rttvar = s / 2.0;
        } else {
            self.rttvar = 0.75 * self.rttvar + 0.25 * (self.srtt - s).abs();
            self.srtt = 0.875 * self.srtt + 0.125 * s;
        }
        self.samples += 1;
        self.rtt_min = self.rtt_min.min(s);
        self.rtt_max = self.rtt_max.max(s);
        self.window[self.slot] = s;
        self.slot = (self.slot + 1) % AVG_WINDOW;
        self.filled = self.samples.min(AVG_WINDOW as u64) as usize;
        let rto = self.srtt + (4.0 * self.rttvar).max(VAR_TERM_FLOOR);
        self.rto = Duration::from_secs_f64(rto.clamp(MIN_RTO.as_secs_f64(), MAX_RTO.as_secs_f64()));
    }

    pub fn has_samples(&self) -> bool {
        self.samples > 0
    }

    pub fn srtt(&self) -> f64 {
        self.srtt
    }

    pub fn rttvar(&self) -> f64 {
        self.rttvar
    }

    /// Smallest RTT observed; never increases.
    pub fn rtt_min(&self) -> f64 {
        if self.samples == 0 { 0.0 } else { self.rtt_min }
    }

    /// Largest RTT observed; never decreases.
    pub fn rtt_max(&self) -> f64 {
        self.rtt_max
    }

    pub fn rto(&self) -> Duration {
        self.rto
    }

    /// Exponential backoff on timeout, capped at 60 s.
    pub fn backoff(&mut self) {
        self.rto = (self.rto * 2).min(MAX_RTO);
    }

    /// Mean of the recent-sample window.
    pub fn avg_rtt(&self) -> f64 {
        if self.filled == 0 {
            return 0.0;
        }
        self.window[..self.filled].iter().sum::<f64>() / self.filled as f64
    }

    /// d_a: average queuing delay over the recent window.
    pub fn queuing_delay_avg(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        (self.avg_rtt() - self.rtt_min).max(0.0)
    }

    /// d_m: maximum queuing delay observed.
    pub fn queuing_delay_max(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        self.rtt_max - self.rtt_min
    }
}

/// Echo-based sample: receive time minus the echoed send time.
pub fn rtt_sample(now: SimTime, echo_send_time: SimTime) -> Duration {
    now.elapsed_since(echo_send_time)
}
