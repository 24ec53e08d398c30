//! Event queue: events dispatch in (time, insertion order) so that ties break
//! by insertion and runs are bit-deterministic.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use thiserror::Error;

use crate::net::{FlowId, LinkId, NodeId, Packet};
use crate::time::SimTime;

/// What the engine does when an event fires.
#[derive(Debug, Clone)]
pub enum EventKind {
    /// A flow begins transmitting.
    FlowStart { flow: FlowId },
    /// A link finished serializing its current packet and may start the next.
    LinkDequeue { link: LinkId },
    /// A packet reaches the far end of a link.
    PacketArrival { node: NodeId, pkt: Packet },
    /// Retransmission timer for a flow.
    RtoExpiry { flow: FlowId },
    /// Fixed-interval cwnd trace sample.
    TraceSample { flow: FlowId },
    /// End of the run.
    SimEnd,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("event scheduled in the past: at {at} but simulation time is {now}")]
    ScheduledInPast { at: SimTime, now: SimTime },
}

/// Handle to a scheduled event, allowing cancellation (retransmission timers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

#[derive(Debug)]
struct Scheduled {
    time: SimTime,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Scheduled>>,
    cancelled: HashSet<u64>,
    next_seq: u64,
    now: SimTime,
    dispatched: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Time of the most recently dispatched event.
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    /// Scheduling in the past is a contract violation and a fatal engine error.
    pub fn schedule(&mut self, time: SimTime, kind: EventKind) -> Result<EventHandle, EngineError> {
        if time < self.now {
            return Err(EngineError::ScheduledInPast { at: time, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Scheduled { time, seq, kind }));
        Ok(EventHandle(seq))
    }

    /// Marks an event so it never fires. Cancelling an already-dispatched
    /// event is a no-op.
    pub fn cancel(&mut self, handle: EventHandle) {
        if handle.0 < self.next_seq {
            self.cancelled.insert(handle.0);
        }
    }

    /// Pops the next live event with time <= `limit`, advancing the clock.
    pub fn pop_until(&mut self, limit: SimTime) -> Option<(SimTime, EventKind)> {
        loop {
            let head_time = self.heap.peek()?.0.time;
            if head_time > limit {
                return None;
            }
            let Reverse(ev) = self.heap.pop().expect("peeked");
            if self.cancelled.remove(&ev.seq) {
                continue;
            }
            self.now = ev.time;
            self.dispatched += 1;
            return Some((ev.time, ev.kind));
        }
    }

    /// Live (non-cancelled) pending events, in no particular order.
    pub fn iter_pending(&self) -> impl Iterator<Item = &EventKind> + '_ {
        self.heap
            .iter()
            .filter(move |r| !self.cancelled.contains(&r.0.seq))
            .map(|r| &r.0.kind)
    }

    pub fn live_len(&self) -> usize {
        self.iter_pending().count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marker(n: usize) -> EventKind {
        EventKind::FlowStart { flow: n }
    }

    fn pop_flow(q: &mut EventQueue) -> usize {
        match q.pop_until(SimTime::from_secs(1_000)) {
            Some((_, EventKind::FlowStart { flow })) => flow,
            other => panic!("unexpected event {other:?}"),
        }
    }

    #[test]
    fn ties_break_by_insertion_order() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_secs_f64(1.0), marker(0)).unwrap();
        q.schedule(SimTime::from_secs_f64(1.0), marker(1)).unwrap();
        assert_eq!(pop_flow(&mut q), 0);
        assert_eq!(pop_flow(&mut q), 1);
    }

    #[test]
    fn time_order_wins_over_insertion() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_secs(2), marker(2)).unwrap();
        q.schedule(SimTime::from_secs(1), marker(1)).unwrap();
        assert_eq!(pop_flow(&mut q), 1);
        assert_eq!(pop_flow(&mut q), 2);
    }

    #[test]
    fn cancelled_timer_never_fires() {
        let mut q = EventQueue::new();
        let h = q.schedule(SimTime::from_secs(1), marker(9)).unwrap();
        q.schedule(SimTime::from_secs(2), marker(1)).unwrap();
        q.cancel(h);
        assert_eq!(pop_flow(&mut q), 1);
        assert!(q.pop_until(SimTime::from_secs(100)).is_none());
    }

    #[test]
    fn scheduling_in_the_past_is_fatal() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_secs(5), marker(0)).unwrap();
        q.pop_until(SimTime::from_secs(10)).unwrap();
        let err = q.schedule(SimTime::from_secs(1), marker(1)).unwrap_err();
        assert!(matches!(err, EngineError::ScheduledInPast { .. }));
    }

    #[test]
    fn pop_until_is_inclusive() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::ZERO, marker(0)).unwrap();
        q.schedule(SimTime::from_nanos(1), marker(1)).unwrap();
        assert_eq!(pop_flow(&mut q), 0);
        assert!(q.pop_until(SimTime::ZERO).is_none());
        assert_eq!(q.live_len(), 1);
    }
}
