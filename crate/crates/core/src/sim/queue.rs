use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::geom::{NodeId, SimTime};
use crate::protocol::Message;

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    NodeWake(NodeId),
    Deliver { msg: Message, to: NodeId },
    StimulusArrives(NodeId),
    CollectionWindowEnd(NodeId),
    RecedeTimeout(NodeId),
    Horizon,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::NodeWake(_) => "NodeWake",
            EventKind::Deliver { .. } => "Deliver",
            EventKind::StimulusArrives(_) => "StimulusArrives",
            EventKind::CollectionWindowEnd(_) => "CollectionWindowEnd",
            EventKind::RecedeTimeout(_) => "RecedeTimeout",
            EventKind::Horizon => "Horizon",
        }
    }

    pub fn node(&self) -> Option<NodeId> {
        match *self {
            EventKind::NodeWake(id)
            | EventKind::StimulusArrives(id)
            | EventKind::CollectionWindowEnd(id)
            | EventKind::RecedeTimeout(id) => Some(id),
            EventKind::Deliver { to, .. } => Some(to),
            EventKind::Horizon => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub at: SimTime,
    /// Insertion order; breaks ties between simultaneous events.
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for SimEvent {}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue popping in `(at, seq)` order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<SimEvent>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, at: SimTime, kind: EventKind) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(SimEvent { at, seq, kind }));
        seq
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
