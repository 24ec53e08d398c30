//! TCP sender/receiver state machines: sequencing, cumulative ACKs, RTT
//! estimation, RTO with exponential backoff, fast retransmit, and
//! NewReno-style fast recovery with partial-ACK retransmission.
//!
//! Windows are packet-counted and real-valued; floor(cwnd) limits
//! transmission. Receiver window is unbounded and every data packet is ACKed
//! (no delayed ACKs). The congestion-control plug-in owns cwnd/ssthresh.

use std::collections::BTreeSet;

use crate::cc::CongestionControl;
use crate::event::{EventHandle, EventKind};
use crate::metrics::{CongestionEvent, CongestionSignal};
use crate::net::{FlowId, NodeId, Packet, PacketKind, ACK_BYTES};
use crate::rtt::{rtt_sample, RttEstimator};
use crate::sim::Ctx;
use crate::time::SimTime;

pub const INITIAL_CWND: f64 = 2.0;
pub const DUP_ACK_THRESHOLD: u32 = 3;

/// Packets released per ACK-processing event. A cumulative ACK that jumps a
/// hole can open thousands of window slots at once; without this cap the
/// sender dumps the whole window into the first queue in one instant.
const MAX_BURST: u64 = 4;



#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CongestionState {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

impl CongestionState {
    pub fn label(self) -> &'static str {
        match self {
            CongestionState::SlowStart => "slow-start",
            CongestionState::CongestionAvoidance => "congestion-avoidance",
            CongestionState::FastRecovery => "fast-recovery",
        }
    }
}

/// Sender-side per-flow state visible to the congestion-control hooks.
#[derive(Debug)]
pub struct TcpFlowState {
    /// Congestion window in packets, real-valued.
    pub cwnd: f64,
    pub ssthresh: f64,
    pub state: CongestionState,
    /// Next new sequence to send; highest_sent is next_seq - 1.
    pub next_seq: u64,
    /// Cumulative ACK point: first sequence not yet acknowledged.
    pub highest_acked: u64,
    pub dup_ack_count: u32,
    /// Sequence that must be covered to exit fast recovery.
    pub recover: u64,
    pub rtt: RttEstimator,
    pub total_acked_pkts: u64,
}

impl Default for TcpFlowState {
    fn default() -> Self {
        Self::new()
    }
}

impl TcpFlowState {
    pub fn new() -> Self {
        Self {
            cwnd: INITIAL_CWND,
            ssthresh: f64::INFINITY,
            state: CongestionState::SlowStart,
            next_seq: 0,
            highest_acked: 0,
            dup_ack_count: 0,
            recover: 0,
            rtt: RttEstimator::new(),
            total_acked_pkts: 0,
        }
    }

    pub fn in_slow_start(&self) -> bool {
        self.state != CongestionState::FastRecovery && self.cwnd < self.ssthresh
    }

    pub fn highest_sent(&self) -> u64 {
        self.next_seq.saturating_sub(1)
    }

    fn sync_state_tag(&mut self) {
        if self.state != CongestionState::FastRecovery {
            self.state = if self.cwnd < self.ssthresh {
                CongestionState::SlowStart
            } else {
                CongestionState::CongestionAvoidance
            };
        }
    }
}

/// Greedy (FTP-style) sender: always has data to transmit.
pub struct TcpSender {
    pub flow: TcpFlowState,
    cc: Box<dyn CongestionControl>,
    flow_id: FlowId,
    node: NodeId,
    peer: NodeId,
    packet_size: u32,
    /// Go-back-N resend cursor, active after a timeout and during recovery
    /// entered from congestion avoidance; cumulative ACKs advance it past
    /// receiver-buffered survivors.
    resend_next: Option<u64>,
    /// First sequence the cursor must not resend.
    resend_limit: u64,
    /// Extra copies put in flight by in-recovery retransmissions, credited
    /// back as the cumulative point passes repaired positions.
    resend_copies: f64,
    /// Sequences retransmitted and not yet cumulatively acked (Karn's rule).
    retransmitted: BTreeSet<u64>,
    timer: Option<EventHandle>,
    partial_acks_in_recovery: u32,
    /// Recovery entered during the initial slow-start overshoot repairs a
    /// window with thousands of holes; the timeout path handles it faster
    /// than partial ACKs ever could.
    impatient_recovery: bool,
    /// Duplicate ACKs seen since the cumulative point last advanced.
    dups_since_progress: u64,
    /// Recovery entered from congestion avoidance must finish by this time;
    /// past it the timer stops being refreshed and the timeout path takes
    /// over. A healthy repair completes within a round trip or two, so only
    /// stalled or crawling episodes are cut over.
    recovery_deadline: SimTime,
    /// Window inflation during fast recovery: each dup ACK is a departure
    /// and widens the effective window by one; partial ACKs deflate it by
    /// the receiver-buffered survivors they pass, which already inflated it.
    recovery_dups: f64,
    next_packet_id: u64,
    /// Time of the last cumulative-ACK advance, for stall diagnosis.
    pub last_progress: SimTime,
}

impl TcpSender {
    pub fn new(
        flow_id: FlowId,
        node: NodeId,
        peer: NodeId,
        cc: Box<dyn CongestionControl>,
        packet_size: u32,
    ) -> Self {
        Self {
            flow: TcpFlowState::new(),
            cc,
            flow_id,
            node,
            peer,
            packet_size,
            resend_next: None,
            resend_limit: 0,
            resend_copies: 0.0,
            dups_since_progress: 0,
            recovery_dups: 0.0,
            recovery_deadline: SimTime::ZERO,
            retransmitted: BTreeSet::new(),
            timer: None,
            partial_acks_in_recovery: 0,
            impatient_recovery: false,
            next_packet_id: 0,
            last_progress: SimTime::ZERO,
        }
    }

    pub fn cc_name(&self) -> &'static str {
        self.cc.name()
    }

    pub fn start(&mut self, ctx: &mut Ctx<'_>) {
        self.last_progress = ctx.now;
        ctx.metrics.set_flow_start(self.flow_id, ctx.now);
        self.try_send(ctx);
    }

    fn effective_window(&self) -> f64 {
        let inflation = if self.flow.state == CongestionState::FastRecovery {
            self.recovery_dups
        } else {
            0.0
        };
        self.flow.cwnd.floor().max(1.0) + inflation
    }

    /// One step of the in-recovery repair train: resends the cursor
    /// position. The caller paces these below the departure rate so the
    /// full queue drains while the suspect window is walked.
    fn recovery_repair_step(&mut self, ctx: &mut Ctx<'_>) {
        if let Some(r) = self.resend_next {
            if r < self.resend_limit && self.flow.state == CongestionState::FastRecovery {
                self.resend_next = Some(r + 1);
                self.resend_copies += 1.0;
                self.send_segment(r, true, ctx);
            } else if r >= self.resend_limit {
                self.resend_next = None;
            }
        }
    }

    /// Deliberate overestimate of packets in the network: the cumulative
    /// ACK may lag behind data the receiver already buffered, but sends
    /// gated on this can at worst be late, never slam a draining queue.
    fn outstanding_est(&self) -> f64 {
        match self.resend_next {
            // Post-timeout go-back-N: everything past the cursor is treated
            // as lost, so the cursor is the effective send pointer.
            Some(r) if self.flow.state != CongestionState::FastRecovery => {
                (r - self.flow.highest_acked) as f64
            }
            _ => {
                (self.flow.next_seq - self.flow.highest_acked) as f64 + self.resend_copies
            }
        }
    }

    /// Sends while the outstanding estimate is below the window, at most
    /// MAX_BURST per ACK-processing event: the resend cursor's repair train
    /// first, new data once it is done. After a decrease, the estimate
    /// drains by cumulative-ACK credits before anything new goes out, so
    /// repair packets meet a draining queue.
    fn try_send(&mut self, ctx: &mut Ctx<'_>) {
        let mut burst = 0;
        while self.outstanding_est() < self.effective_window() && burst < MAX_BURST {
            burst += 1;
            match self.resend_next {
                Some(r)
                    if self.flow.state != CongestionState::FastRecovery
                        && r < self.resend_limit =>
                {
                    self.resend_next = Some(r + 1);
                    self.send_segment(r, true, ctx);
                }
                Some(_) if self.flow.state == CongestionState::FastRecovery => {
                    // The repair train owns the recovery window budget; new
                    // data waits until the suspect region is walked.
                    break;
                }
                _ => {
                    self.resend_next = None;
                    let seq = self.flow.next_seq;
                    self.flow.next_seq += 1;
                    self.send_segment(seq, false, ctx);
                }
            }
        }
    }

    fn send_segment(&mut self, seq: u64, retransmit: bool, ctx: &mut Ctx<'_>) {
        if retransmit {
            self.retransmitted.insert(seq);
        }
        let pkt = Packet {
            id: self.next_packet_id,
            flow: self.flow_id,
            kind: PacketKind::Data { seq, retransmit },
            size_bytes: self.packet_size,
            send_time: ctx.now,
        };
        self.next_packet_id += 1;
        ctx.metrics.on_data_sent(self.flow_id, self.packet_size, retransmit);
        ctx.send_packet(self.node, self.peer, pkt);
        if self.timer.is_none() {
            self.arm_timer(ctx);
        }
    }

    fn arm_timer(&mut self, ctx: &mut Ctx<'_>) {
        if let Some(h) = self.timer.take() {
            ctx.cancel(h);
        }
        let at = ctx.now + self.flow.rtt.rto();
        self.timer = Some(ctx.schedule(at, EventKind::RtoExpiry { flow: self.flow_id }));
    }

    fn cancel_timer(&mut self, ctx: &mut Ctx<'_>) {
        if let Some(h) = self.timer.take() {
            ctx.cancel(h);
        }
    }

    pub fn on_ack_packet(&mut self, pkt: &Packet, ctx: &mut Ctx<'_>) {
        let PacketKind::Ack { ack_no, for_seq, echo_send_time } = pkt.kind else {
            return;
        };
        #[cfg(feature = "trace-debug")]
        if std::env::var("CC_TRACE_FLOW").ok().as_deref() == Some(&self.flow_id.to_string()) {
            eprintln!(
                "{} ack ack_no={ack_no} for_seq={for_seq} | una={} nxt={} cwnd={:.1} ss={:.1} {:?} dup={} pipe={:.0} resend={:?} win={}",
                ctx.now,
                self.flow.highest_acked,
                self.flow.next_seq,
                self.flow.cwnd,
                self.flow.ssthresh,
                self.flow.state,
                self.flow.dup_ack_count,
                self.outstanding_est(),
                self.resend_next,
                self.effective_window(),
            );
        }
        // Karn's rule: sample only when the echoed segment was never
        // retransmitted. Duplicate ACKs yield samples too, keeping delay
        // signals fresh while the receiver drains out-of-order data.
        let sample = (!self.retransmitted.contains(&for_seq))
            .then(|| rtt_sample(ctx.now, echo_send_time))
            .filter(|s| !s.is_zero());
        if let Some(s) = sample {
            self.flow.rtt.update(s);
            self.cc.on_rtt_sample(&mut self.flow, s, ctx.now);
        }
        if ack_no > self.flow.highest_acked {
            self.handle_new_ack(ack_no, sample, ctx);
        } else if ack_no == self.flow.highest_acked && self.flow.next_seq > ack_no {
            self.handle_dup_ack(ctx);
        }
        // ACKs below the cumulative point are stale and ignored.
        self.try_send(ctx);
    }

    fn handle_new_ack(
        &mut self,
        ack_no: u64,
        sample: Option<std::time::Duration>,
        ctx: &mut Ctx<'_>,
    ) {
        let newly = ack_no - self.flow.highest_acked;
        if self.flow.state == CongestionState::FastRecovery {
            // Credit only the copies this advance can actually have
            // delivered: positions the repair cursor had covered.
            let covered = match self.resend_next {
                Some(r) => r.saturating_sub(self.flow.highest_acked).min(newly),
                None => newly,
            };
            self.resend_copies = (self.resend_copies - covered as f64).max(0.0);
        }
        self.flow.highest_acked = ack_no;
        self.flow.total_acked_pkts += newly;
        self.dups_since_progress = 0;
        self.last_progress = ctx.now;
        self.retransmitted = self.retransmitted.split_off(&ack_no);
        if let Some(r) = self.resend_next {
            if ack_no > r {
                self.resend_next = Some(ack_no);
            }
        }

        if self.flow.state == CongestionState::FastRecovery {
            if ack_no >= self.flow.recover {
                // Full ACK: all data outstanding at loss detection is covered.
                self.flow.state = CongestionState::CongestionAvoidance;
                self.flow.dup_ack_count = 0;
                self.partial_acks_in_recovery = 0;
                self.resend_next = None;
                // resend_copies is deliberately kept: late repair copies are
                // still in flight and drain through their duplicate echoes.
                self.recovery_dups = 0.0;
                self.flow.sync_state_tag();
                if self.flow.highest_acked >= self.flow.next_seq {
                    self.cancel_timer(ctx);
                } else {
                    self.arm_timer(ctx);
                }
            } else {
                // Partial ACK: stay in recovery. A slow-start burst leaves
                // thousands of holes, so its timer is impatient (only the
                // first partial refreshes it) and the flow falls back to
                // slow start; a congestion-avoidance repair keeps the timer
                // alive as long as partials keep arriving, and a repair
                // stall falls back to the timeout.
                self.partial_acks_in_recovery += 1;
                let patient = !self.impatient_recovery && ctx.now <= self.recovery_deadline;
                if patient || self.partial_acks_in_recovery == 1 {
                    self.arm_timer(ctx);
                }
                // The survivors this ACK passed inflated the window when
                // they dup-ACKed; take that inflation back.
                self.recovery_dups = (self.recovery_dups - (newly as f64 - 1.0)).max(0.0);
                // Always retransmit the hole itself: if the cursor already
                // passed it, its copy may be the one that got dropped.
                self.resend_copies += 1.0;
                self.send_segment(self.flow.highest_acked, true, ctx);
                if let Some(r) = self.resend_next {
                    self.resend_next = Some(r.max(self.flow.highest_acked + 1));
                }
            }
        } else {
            self.flow.dup_ack_count = 0;
            self.cc.on_ack(&mut self.flow, newly, sample, ctx.now);
            self.flow.sync_state_tag();
            if self.flow.highest_acked >= self.flow.next_seq {
                self.cancel_timer(ctx);
            } else {
                self.arm_timer(ctx);
            }
        }
        ctx.metrics.on_new_data_ack(self.flow_id, ctx.now, &self.flow);
    }

    fn handle_dup_ack(&mut self, ctx: &mut Ctx<'_>) {
        self.flow.dup_ack_count += 1;
        self.dups_since_progress += 1;
        if self.flow.state == CongestionState::FastRecovery {
            // The timer is deliberately not refreshed by dups in recovery:
            // a stalled repair falls back to the timeout path. Every second
            // dup ACK advances the repair train (once the inflated window
            // opens), so repair arrives at half the departure rate and the
            // congested queue drains underneath it.
            self.recovery_dups += 1.0;
            if self.flow.dup_ack_count % 2 == 0
                && self.outstanding_est() < self.effective_window()
            {
                self.recovery_repair_step(ctx);
            }
        } else if self.resend_copies > 0.0 && self.flow.dup_ack_count < DUP_ACK_THRESHOLD {
            // Outside recovery, dup echoes of late repair copies drain the
            // copy estimate.
            self.resend_copies -= 1.0;
        } else if self.flow.dup_ack_count == DUP_ACK_THRESHOLD
            && self.flow.highest_acked > self.flow.recover
        {
            // The recover guard keeps the stale dup-ACK flood left over from
            // a timeout from re-triggering fast retransmit at cwnd = 1.
            let before = self.flow.cwnd;
            let in_ss = self.flow.in_slow_start();
            self.cc.on_loss_dupack(&mut self.flow, ctx.now);
            ctx.metrics.on_congestion_event(CongestionEvent {
                time: ctx.now,
                flow: self.flow_id,
                cwnd_before: before,
                cwnd_after: self.flow.cwnd,
                signal: CongestionSignal::DupAck,
                in_slow_start: in_ss,
            });
            self.flow.recover = self.flow.next_seq;
            self.flow.state = CongestionState::FastRecovery;
            self.partial_acks_in_recovery = 0;
            self.impatient_recovery = in_ss;
            self.recovery_dups = DUP_ACK_THRESHOLD as f64;
            self.recovery_deadline = ctx.now + 4 * self.flow.rtt.rto();
            if !in_ss {
                // The repair train starts at the hole and walks the suspect
                // window; drop-tail holes are spread out and only the
                // cumulative ACK knows where they are. Even the first
                // retransmission waits for the inflating window to open:
                // sent immediately it would join the very queue whose
                // overflow caused the loss, right behind the backlog that
                // filled it. The slow-start burst gets no train: half its
                // window is gone, repairs would mostly be lost again, and
                // the timeout path rebuilds faster.
                self.resend_next = Some(self.flow.highest_acked);
                self.resend_limit = self.flow.recover;
            } else {
                self.resend_copies += 1.0;
                self.send_segment(self.flow.highest_acked, true, ctx);
            }
            self.arm_timer(ctx);
        } else if (self.dups_since_progress as f64) <= 2.0 * self.effective_window() + 16.0 {
            // Outside recovery a duplicate ACK proves both path directions
            // are moving, so it refreshes the timer: post-timeout go-back-N
            // resends of data the receiver already buffered echo back as a
            // dup train up to a window long, and timing out through it would
            // halve ssthresh again while the pipe is demonstrably alive. A
            // train longer than that is a stuck hole with fast retransmit
            // suppressed, and only the timeout can repair it.
            self.arm_timer(ctx);
        }
    }

    pub fn on_rto(&mut self, ctx: &mut Ctx<'_>) {
        self.timer = None;
        if self.flow.highest_acked >= self.flow.next_seq {
            // All data acked: stale timer race, ignore.
            return;
        }
        let before = self.flow.cwnd;
        let in_ss = self.flow.in_slow_start();
        self.flow.rtt.backoff();
        self.flow.ssthresh = (self.flow.cwnd / 2.0).max(2.0);
        self.flow.cwnd = 1.0;
        self.flow.state = CongestionState::SlowStart;
        self.flow.dup_ack_count = 0;
        self.partial_acks_in_recovery = 0;
        self.flow.recover = self.flow.next_seq;
        self.cc.on_timeout(&mut self.flow, ctx.now);
        ctx.metrics.on_congestion_event(CongestionEvent {
            time: ctx.now,
            flow: self.flow_id,
            cwnd_before: before,
            cwnd_after: self.flow.cwnd,
            signal: CongestionSignal::Rto,
            in_slow_start: in_ss,
        });
        self.resend_next = Some(self.flow.highest_acked);
        self.resend_limit = self.flow.next_seq;
        self.resend_copies = 0.0;
        self.recovery_dups = 0.0;
        self.try_send(ctx);
        self.arm_timer(ctx);
    }
}

/// Receiver: cumulative ACKs with out-of-order buffering, one ACK per data
/// packet.
pub struct TcpReceiver {
    flow_id: FlowId,
    node: NodeId,
    peer: NodeId,
    rcv_nxt: u64,
    out_of_order: BTreeSet<u64>,
    pub dup_pkts: u64,
    next_packet_id: u64,
}

impl TcpReceiver {
    pub fn new(flow_id: FlowId, node: NodeId, peer: NodeId) -> Self {
        Self {
            flow_id,
            node,
            peer,
            rcv_nxt: 0,
            out_of_order: BTreeSet::new(),
            dup_pkts: 0,
            next_packet_id: 0,
        }
    }

    pub fn rcv_nxt(&self) -> u64 {
        self.rcv_nxt
    }

    pub fn buffered(&self) -> usize {
        self.out_of_order.len()
    }

    pub fn on_data_packet(&mut self, pkt: &Packet, ctx: &mut Ctx<'_>) {
        let PacketKind::Data { seq, .. } = pkt.kind else {
            return;
        };
        let first_time = if seq == self.rcv_nxt {
            self.rcv_nxt += 1;
            while self.out_of_order.remove(&self.rcv_nxt) {
                self.rcv_nxt += 1;
            }
            true
        } else if seq > self.rcv_nxt {
            self.out_of_order.insert(seq)
        } else {
            false
        };
        if first_time {
            ctx.metrics.on_goodput(self.flow_id, pkt.size_bytes);
        } else {
            self.dup_pkts += 1;
        }
        let ack = Packet {
            id: self.next_packet_id,
            flow: self.flow_id,
            kind: PacketKind::Ack {
                ack_no: self.rcv_nxt,
                for_seq: seq,
                echo_send_time: pkt.send_time,
            },
            size_bytes: ACK_BYTES,
            send_time: ctx.now,
        };
        self.next_packet_id += 1;
        ctx.metrics.on_ack_sent(self.flow_id);
        ctx.send_packet(self.node, self.peer, ack);
    }
}
