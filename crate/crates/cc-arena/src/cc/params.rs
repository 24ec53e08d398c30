//! Tunable constants for every variant, overridable by dotted key
//! (e.g. `cubic.beta`, `yeah.alpha_q`) so defaults can be sensitivity-tested
//! without recompilation. Unknown keys are rejected by name.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("unknown parameter key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    InvalidValue { key: String, value: String },
}

/// Per-ACK additive increase and multiplicative decrease of Scalable TCP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StcpParams {
    pub alpha: f64,
    pub beta: f64,
}

/// HS-TCP response table: pinned endpoints plus the interpolation constants,
/// and the limited-slow-start cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HstcpParams {
    pub low_window: f64,
    pub high_window: f64,
    pub a_high: f64,
    pub b_low: f64,
    pub b_high: f64,
    pub p_low: f64,
    pub p_high: f64,
    pub max_ssthresh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HtcpParams {
    /// Seconds below which the increase coefficient stays 1.
    pub delta_low: f64,
    /// Throughput-change threshold selecting adaptive vs halving backoff.
    pub gamma_threshold: f64,
    pub decrease_floor: f64,
    pub decrease_ceil: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicParams {
    pub s_max: f64,
    pub s_min: f64,
    pub beta_factor: f64,
    pub low_window: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicParams {
    pub c: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfricaParams {
    /// Buffered-packet threshold separating fast from slow mode.
    pub alpha_thresh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IllinoisParams {
    pub alpha_max: f64,
    pub alpha_min: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    /// Delay thresholds as fractions of the max queuing delay d_m.
    pub d1_frac: f64,
    pub d2_frac: f64,
    pub d3_frac: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompoundParams {
    /// Queuing threshold in packets (the paper's predefined constant).
    pub gamma_pkts: f64,
    pub zeta: f64,
    pub k_exp: f64,
    pub alpha_inc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YeahParams {
    pub alpha_q: f64,
    pub phi: f64,
    /// Fast-mode per-ACK increase (the STCP rule).
    pub stcp_alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    /// Queuing-delay threshold, seconds.
    pub q_th: f64,
    /// EWMA gain of the achievable-rate estimate.
    pub rate_gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcParams {
    /// Data segment size in bytes; Fusion converts its rate estimate with it.
    pub packet_size: u32,
    pub stcp: StcpParams,
    pub hstcp: HstcpParams,
    pub htcp: HtcpParams,
    pub bic: BicParams,
    pub cubic: CubicParams,
    pub africa: AfricaParams,
    pub illinois: IllinoisParams,
    pub compound: CompoundParams,
    pub yeah: YeahParams,
    pub fusion: FusionParams,
}

impl Default for CcParams {
    fn default() -> Self {
        Self {
            packet_size: 1000,
            stcp: StcpParams { alpha: 0.01, beta: 0.125 },
            hstcp: HstcpParams {
                low_window: 38.0,
                high_window: 83_000.0,
                a_high: 70.0,
                b_low: 0.5,
                b_high: 0.1,
                p_low: 0.0015,
                p_high: 1e-7,
                max_ssthresh: 100.0,
            },
            htcp: HtcpParams {
                delta_low: 1.0,
                gamma_threshold: 0.2,
                decrease_floor: 0.5,
                decrease_ceil: 0.8,
            },
            bic: BicParams { s_max: 32.0, s_min: 0.01, beta_factor: 0.8, low_window: 14.0 },
            cubic: CubicParams { c: 0.4, beta: 0.2 },
            africa: AfricaParams { alpha_thresh: 1.0 },
            illinois: IllinoisParams {
                alpha_max: 10.0,
                alpha_min: 0.3,
                beta_min: 0.125,
                beta_max: 0.5,
                d1_frac: 0.01,
                d2_frac: 0.1,
                d3_frac: 0.8,
            },
            compound: CompoundParams { gamma_pkts: 30.0, zeta: 1.0, k_exp: 0.75, alpha_inc: 0.125 },
            yeah: YeahParams { alpha_q: 80.0, phi: 8.0, stcp_alpha: 0.01 },
            fusion: FusionParams { q_th: 0.010, rate_gain: 0.125 },
        }
    }
}

macro_rules! param_table {
    ($( $key:literal => $($field:ident).+ ),+ $(,)?) => {
        /// Every overridable key, in registry order.
        pub fn known_keys() -> &'static [&'static str] {
            &[ $( $key ),+ ]
        }

        pub fn get(&self, key: &str) -> Option<f64> {
            match key {
                $( $key => Some(self.$($field).+ as f64), )+
                _ => None,
            }
        }

        /// Sets one parameter from its textual value.
        pub fn set(&mut self, key: &str, value: &str) -> Result<(), ParamError> {
            let parsed: f64 = value.parse().map_err(|_| ParamError::InvalidValue {
                key: key.to_string(),
                value: value.to_string(),
            })?;
            if !parsed.is_finite() {
                return Err(ParamError::InvalidValue {
                    key: key.to_string(),
                    value: value.to_string(),
                });
            }
            match key {
                $( $key => { param_table!(@assign self, parsed, key, value, $($field).+); } )+
                _ => return Err(ParamError::UnknownKey(key.to_string())),
            }
            Ok(())
        }
    };
    (@assign $self:ident, $parsed:ident, $key:ident, $value:ident, $($field:ident).+) => {
        $self.$($field).+ = $parsed;
    };
}

impl CcParams {
    param_table! {
        "scalable.alpha" => stcp.alpha,
        "scalable.beta" => stcp.beta,
        "highspeed.low_window" => hstcp.low_window,
        "highspeed.high_window" => hstcp.high_window,
        "highspeed.a_high" => hstcp.a_high,
        "highspeed.b_low" => hstcp.b_low,
        "highspeed.b_high" => hstcp.b_high,
        "highspeed.p_low" => hstcp.p_low,
        "highspeed.p_high" => hstcp.p_high,
        "highspeed.max_ssthresh" => hstcp.max_ssthresh,
        "htcp.delta_low" => htcp.delta_low,
        "htcp.gamma_threshold" => htcp.gamma_threshold,
        "htcp.decrease_floor" => htcp.decrease_floor,
        "htcp.decrease_ceil" => htcp.decrease_ceil,
        "bic.s_max" => bic.s_max,
        "bic.s_min" => bic.s_min,
        "bic.beta_factor" => bic.beta_factor,
        "bic.low_window" => bic.low_window,
        "cubic.c" => cubic.c,
        "cubic.beta" => cubic.beta,
        "africa.alpha_thresh" => africa.alpha_thresh,
        "illinois.alpha_max" => illinois.alpha_max,
        "illinois.alpha_min" => illinois.alpha_min,
        "illinois.beta_min" => illinois.beta_min,
        "illinois.beta_max" => illinois.beta_max,
        "illinois.d1_frac" => illinois.d1_frac,
        "illinois.d2_frac" => illinois.d2_frac,
        "illinois.d3_frac" => illinois.d3_frac,
        "compound.gamma_pkts" => compound.gamma_pkts,
        "compound.zeta" => compound.zeta,
        "compound.k_exp" => compound.k_exp,
        "compound.alpha_inc" => compound.alpha_inc,
        "yeah.alpha_q" => yeah.alpha_q,
        "yeah.phi" => yeah.phi,
        "yeah.stcp_alpha" => yeah.stcp_alpha,
        "fusion.q_th" => fusion.q_th,
        "fusion.rate_gain" => fusion.rate_gain,
    }

    /// Keys whose value differs from the default, for scenario dumps.
    pub fn overrides(&self) -> Vec<(&'static str, f64)> {
        let defaults = CcParams::default();
        Self::known_keys()
            .iter()
            .filter_map(|&k| {
                let v = self.get(k).expect("registered key");
                (v != defaults.get(k).expect("registered key")).then_some((k, v))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_known_key() {
        let mut p = CcParams::default();
        p.set("cubic.beta", "0.3").unwrap();
        assert_eq!(p.cubic.beta, 0.3);
        assert_eq!(p.get("cubic.beta"), Some(0.3));
    }

    #[test]
    fn unknown_key_rejected_by_name() {
        let mut p = CcParams::default();
        let err = p.set("cubic.gamma", "1").unwrap_err();
        assert_eq!(err, ParamError::UnknownKey("cubic.gamma".into()));
    }

    #[test]
    fn invalid_value_rejected() {
        let mut p = CcParams::default();
        assert!(p.set("cubic.beta", "abc").is_err());
        assert!(p.set("cubic.beta", "inf").is_err());
    }

    #[test]
    fn overrides_lists_only_changes() {
        let mut p = CcParams::default();
        assert!(p.overrides().is_empty());
        p.set("yeah.alpha_q", "100").unwrap();
        assert_eq!(p.overrides(), vec![("yeah.alpha_q", 100.0)]);
    }
}
