//! cc-arena: a deterministic packet-level discrete-event network simulator
//! with a pluggable TCP congestion-control interface.
//!
//! Eleven high-speed TCP variants run over dumbbell topologies with
//! drop-tail queues; runs emit throughput, loss-ratio, Jain-fairness, and
//! congestion-window-dynamics outputs. Identical scenario and seed give
//! byte-identical results.

pub mod cc;
pub mod event;
pub mod metrics;
pub mod net;
pub mod rtt;
pub mod scenario;
pub mod sim;
pub mod sweep;
pub mod tcp;
pub mod time;

pub use cc::{build_cc, CcParams, CongestionControl, VariantKind};
pub use event::{EngineError, EventKind, EventQueue};
pub use metrics::{jain_index, MetricsReport, TraceCadence};
pub use net::{DropTailQueue, Link, Network, Packet, PacketKind};
pub use rtt::RttEstimator;
pub use scenario::{RttProfile, Scenario, ScenarioConfig, ScenarioError};
pub use sim::{EngineStats, RunOutput, Simulation};
pub use sweep::{run_sweep, SweepSpec};
pub use tcp::{CongestionState, TcpFlowState};
pub use time::SimTime;
