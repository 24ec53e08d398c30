//! The engine: owns the event queue, links, and flows; dispatches events in
//! deterministic (time, insertion) order; audits conservation.
//!
//! Single-threaded per run. An engine instance is never shared; independent
//! runs may execute in parallel with no shared mutable state.

use std::time::Duration;

use crate::cc::CongestionControl;
use crate::event::{EngineError, EventHandle, EventKind, EventQueue};
use crate::metrics::{Collector, TraceCadence};
use crate::net::{Network, NodeId, Packet, PacketKind};
use crate::tcp::{TcpReceiver, TcpSender};
use crate::time::SimTime;

/// Everything flow handlers may touch while processing one event.
pub struct Ctx<'a> {
    pub now: SimTime,
    pub queue: &'a mut EventQueue,
    pub net: &'a mut Network,
    pub metrics: &'a mut Collector,
}

impl Ctx<'_> {
    /// Internal scheduling always moves forward in time.
    pub fn schedule(&mut self, at: SimTime, kind: EventKind) -> EventHandle {
        self.queue.schedule(at, kind).expect("engine scheduled into the past")
    }

    pub fn cancel(&mut self, handle: EventHandle) {
        self.queue.cancel(handle);
    }

    /// Routes a packet out of `from` towards the endpoint `target` and puts
    /// it on the next link: straight onto the wire when the link is idle,
    /// into the drop-tail queue (or the floor) otherwise.
    pub fn send_packet(&mut self, from: NodeId, target: NodeId, pkt: Packet) {
        let link_id = self
            .net
            .route(from, target)
            .unwrap_or_else(|| panic!("no route from node {from} to {target}"));
        let link = &mut self.net.links[link_id];
        if link.busy {
            if let Err(dropped) = link.queue.enqueue(pkt) {
                let seq = match dropped.kind {
                    PacketKind::Data { seq, .. } => Some(seq),
                    PacketKind::Ack { .. } => None,
                };
                self.metrics.on_drop(self.now, dropped.flow, dropped.is_data(), seq);
            }
        } else {
            link.busy = true;
            let ser = link.serialization_delay(pkt.size_bytes);
            let to = link.to;
            let prop = link.prop_delay;
            self.schedule(self.now + ser, EventKind::LinkDequeue { link: link_id });
            self.schedule(self.now + ser + prop, EventKind::PacketArrival { node: to, pkt });
        }
    }
}

/// One flow to wire into the engine.
pub struct FlowSetup {
    pub cc: Box<dyn CongestionControl>,
    pub src: NodeId,
    pub dst: NodeId,
    pub start: SimTime,
    pub packet_size: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub events_dispatched: u64,
    pub drops: u64,
    pub deliveries: u64,
    pub end_time: SimTime,
    /// A flow with outstanding data made no progress for several RTOs.
    /// Diagnostic, not a failure.
    pub stalled: bool,
}

#[derive(Debug)]
pub struct RunOutput {
    pub stats: EngineStats,
    pub collector: Collector,
}

const AUDIT_INTERVAL_EVENTS: u64 = 250_000;

pub struct Simulation {
    queue: EventQueue,
    net: Network,
    senders: Vec<TcpSender>,
    receivers: Vec<TcpReceiver>,
    endpoints: Vec<(NodeId, NodeId)>,
    collector: Collector,
    t_end: SimTime,
    trace_interval: Option<Duration>,
}

impl Simulation {
    pub fn new(
        net: Network,
        flows: Vec<FlowSetup>,
        duration: Duration,
        cadence: TraceCadence,
    ) -> Result<Self, EngineError> {
        let t_end = SimTime::ZERO + duration;
        let mut queue = EventQueue::new();
        let mut senders = Vec::with_capacity(flows.len());
        let mut receivers = Vec::with_capacity(flows.len());
        let mut endpoints = Vec::with_capacity(flows.len());
        let trace_interval = match cadence {
            TraceCadence::Interval(iv) => Some(iv),
            TraceCadence::PerAck => None,
        };
        for (id, f) in flows.into_iter().enumerate() {
            senders.push(TcpSender::new(id, f.src, f.dst, f.cc, f.packet_size));
            receivers.push(TcpReceiver::new(id, f.dst, f.src));
            endpoints.push((f.src, f.dst));
            queue.schedule(f.start, EventKind::FlowStart { flow: id })?;
            if let Some(iv) = trace_interval {
                let first = f.start + iv;
                if first <= t_end {
                    queue.schedule(first, EventKind::TraceSample { flow: id })?;
                }
            }
        }
        queue.schedule(t_end, EventKind::SimEnd)?;
        let collector = Collector::new(senders.len(), cadence);
        Ok(Self { queue, net, senders, receivers, endpoints, collector, t_end, trace_interval })
    }

    /// Test instrumentation: record every individual drop (time, flow, seq).
    pub fn log_detail_drops(&mut self) {
        self.collector.detail_drops = Some(Vec::new());
    }

    pub fn run(mut self) -> RunOutput {
        let mut next_audit = AUDIT_INTERVAL_EVENTS;
        while let Some((now, kind)) = self.queue.pop_until(self.t_end) {
            self.dispatch(now, kind);
            if cfg!(debug_assertions) && self.queue.dispatched() >= next_audit {
                next_audit += AUDIT_INTERVAL_EVENTS;
                self.audit_conservation();
            }
        }
        self.audit_conservation();
        self.finalize()
    }

    fn dispatch(&mut self, now: SimTime, kind: EventKind) {
        let Simulation { queue, net, senders, receivers, endpoints, collector, .. } = self;
        let mut ctx = Ctx { now, queue, net, metrics: collector };
        match kind {
            EventKind::FlowStart { flow } => senders[flow].start(&mut ctx),
            EventKind::LinkDequeue { link } => {
                let l = &mut ctx.net.links[link];
                match l.queue.dequeue() {
                    Some(pkt) => {
                        let ser = l.serialization_delay(pkt.size_bytes);
                        let to = l.to;
                        let prop = l.prop_delay;
                        ctx.schedule(now + ser, EventKind::LinkDequeue { link });
                        ctx.schedule(now + ser + prop, EventKind::PacketArrival { node: to, pkt });
                    }
                    None => l.busy = false,
                }
            }
            EventKind::PacketArrival { node, pkt } => {
                let (src, dst) = endpoints[pkt.flow];
                let target = if pkt.is_data() { dst } else { src };
                if node == target {
                    if pkt.is_data() {
                        ctx.metrics.on_data_arrival(pkt.flow);
                        receivers[pkt.flow].on_data_packet(&pkt, &mut ctx);
                    } else {
                        ctx.metrics.on_ack_arrival(pkt.flow);
                        senders[pkt.flow].on_ack_packet(&pkt, &mut ctx);
                    }
                } else {
                    ctx.send_packet(node, target, pkt);
                }
            }
            EventKind::RtoExpiry { flow } => senders[flow].on_rto(&mut ctx),
            EventKind::TraceSample { flow } => {
                let state = &senders[flow].flow;
                ctx.metrics.record_trace(flow, now, state.cwnd, state.ssthresh, state.state);
                if let Some(iv) = self.trace_interval {
                    let next = now + iv;
                    if next <= self.t_end {
                        ctx.schedule(next, EventKind::TraceSample { flow });
                    }
                }
            }
            EventKind::SimEnd => {}
        }
    }

    /// Conservation: for every flow, packets sent equal packets delivered to
    /// the endpoint plus packets dropped plus packets still in queues or on
    /// links. Exact, both for data and ACK packets.
    fn audit_conservation(&self) {
        let n = self.senders.len();
        let mut in_net_data = vec![0u64; n];
        let mut in_net_ack = vec![0u64; n];
        for link in &self.net.links {
            for pkt in link.queue.iter() {
                if pkt.is_data() {
                    in_net_data[pkt.flow] += 1;
                } else {
                    in_net_ack[pkt.flow] += 1;
                }
            }
            assert!(link.queue.occupancy() <= link.queue.capacity_pkts(), "queue over capacity");
        }
        for ev in self.queue.iter_pending() {
            if let EventKind::PacketArrival { pkt, .. } = ev {
                if pkt.is_data() {
                    in_net_data[pkt.flow] += 1;
                } else {
                    in_net_ack[pkt.flow] += 1;
                }
            }
        }
        for (i, c) in self.collector.flows.iter().enumerate() {
            assert_eq!(
                c.pkts_sent,
                c.data_arrivals + c.pkts_lost + in_net_data[i],
                "data conservation violated for flow {i}"
            );
            assert_eq!(
                c.acks_sent,
                c.acks_received + c.acks_lost + in_net_ack[i],
                "ack conservation violated for flow {i}"
            );
        }
    }

    fn finalize(mut self) -> RunOutput {
        self.collector.finalize(self.t_end);
        let mut stalled = false;
        for s in &self.senders {
            if s.flow.next_seq > s.flow.highest_acked {
                let idle = self.t_end.elapsed_since(s.last_progress);
                let limit = (s.flow.rtt.rto() * 4).max(Duration::from_secs(5));
                if idle > limit {
                    stalled = true;
                }
            }
        }
        let stats = EngineStats {
            events_dispatched: self.queue.dispatched(),
            drops: self.collector.total_drops,
            deliveries: self.collector.flows.iter().map(|c| c.data_arrivals).sum(),
            end_time: self.queue.now(),
            stalled,
        };
        RunOutput { stats, collector: self.collector }
    }
}
