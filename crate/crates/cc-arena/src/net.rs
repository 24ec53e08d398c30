//! Packets, point-to-point links, drop-tail FIFO queues, and static next-hop
//! routing. Links are unidirectional; a physical cable is two links.

use std::collections::VecDeque;
use std::time::Duration;

use crate::time::SimTime;

pub type NodeId = usize;
pub type LinkId = usize;
pub type FlowId = usize;

/// ACK segments are small and never congest the reverse path in the
/// dumbbell scenarios.
pub const ACK_BYTES: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PacketKind {
    Data {
        seq: u64,
        retransmit: bool,
    },
    /// Cumulative ACK. `for_seq` and `echo_send_time` identify the data
    /// packet that triggered it, for Karn-filtered RTT sampling.
    Ack {
        ack_no: u64,
        for_seq: u64,
        echo_send_time: SimTime,
    },
}

#[derive(Debug, Clone)]
pub struct Packet {
    /// Unique within a flow; retransmissions get fresh ids.
    pub id: u64,
    pub flow: FlowId,
    pub kind: PacketKind,
    pub size_bytes: u32,
    pub send_time: SimTime,
}

impl Packet {
    pub fn is_data(&self) -> bool {
        matches!(self.kind, PacketKind::Data { .. })
    }
}

/// FIFO buffer that drops arrivals when full.
#[derive(Debug)]
pub struct DropTailQueue {
    capacity_pkts: usize,
    queue: VecDeque<Packet>,
    drop_count: u64,
}

impl DropTailQueue {
    pub fn new(capacity_pkts: usize) -> Self {
        Self { capacity_pkts, queue: VecDeque::new(), drop_count: 0 }
    }

    pub fn occupancy(&self) -> usize {
        self.queue.len()
    }

    pub fn capacity_pkts(&self) -> usize {
        self.capacity_pkts
    }

    pub fn drop_count(&self) -> u64 {
        self.drop_count
    }

    /// A packet arriving at occupancy == capacity is dropped and counted.
    pub fn enqueue(&mut self, pkt: Packet) -> Result<(), Packet> {
        if self.queue.len() >= self.capacity_pkts {
            self.drop_count += 1;
            return Err(pkt);
        }
        self.queue.push_back(pkt);
        Ok(())
    }

    pub fn dequeue(&mut self) -> Option<Packet> {
        self.queue.pop_front()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Packet> {
        self.queue.iter()
    }
}

#[derive(Debug)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub bandwidth_bps: u64,
    pub prop_delay: Duration,
    pub queue: DropTailQueue,
    /// A packet is currently being serialized onto the wire.
    pub busy: bool,
}

impl Link {
    /// Exact integer-nanosecond serialization time: size_bytes * 8 / bandwidth.
    pub fn serialization_delay(&self, size_bytes: u32) -> Duration {
        let ns = (size_bytes as u128 * 8 * 1_000_000_000) / self.bandwidth_bps as u128;
        Duration::from_nanos(ns as u64)
    }
}

/// Static next-hop tables over the node/link graph, built per scenario.
#[derive(Debug)]
pub struct Network {
    pub links: Vec<Link>,
    /// routes[node][dst] = outgoing link towards dst.
    routes: Vec<Vec<Option<LinkId>>>,
    node_count: usize,
}

impl Network {
    pub fn new(node_count: usize) -> Self {
        Self {
            links: Vec::new(),
            routes: vec![vec![None; node_count]; node_count],
            node_count,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn add_link(
        &mut self,
        from: NodeId,
        to: NodeId,
        bandwidth_bps: u64,
        prop_delay: Duration,
        capacity_pkts: usize,
    ) -> LinkId {
        let id = self.links.len();
        self.links.push(Link {
            from,
            to,
            bandwidth_bps,
            prop_delay,
            queue: DropTailQueue::new(capacity_pkts),
            busy: false,
        });
        id
    }

    pub fn route(&self, node: NodeId, dst: NodeId) -> Option<LinkId> {
        self.routes[node][dst]
    }

    /// Fills the next-hop tables by BFS from every destination. Deterministic:
    /// links are explored in insertion order.
    pub fn compute_routes(&mut self) {
        let n = self.node_count;
        for dst in 0..n {
            // dist[v] = hops from v to dst; next[v] = first-hop link.
            let mut dist = vec![usize::MAX; n];
            let mut next: Vec<Option<LinkId>> = vec![None; n];
            dist[dst] = 0;
            let mut frontier = vec![dst];
            while !frontier.is_empty() {
                let mut nextf = Vec::new();
                for &v in &frontier {
                    for (lid, link) in self.links.iter().enumerate() {
                        if link.to == v && dist[link.from] == usize::MAX {
                            dist[link.from] = dist[v] + 1;
                            next[link.from] = Some(lid);
                            nextf.push(link.from);
                        }
                    }
                }
                frontier = nextf;
            }
            for v in 0..n {
                self.routes[v][dst] = next[v];
            }
        }
    }
}
