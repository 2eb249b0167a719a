use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::scenario::ClusterIdx;
use crate::workload::ContentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Request { cluster: ClusterIdx },
    Publish { content: ContentId },
    Expire { content: ContentId },
    ReplicationTick,
    ReportTick,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time_s: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    // Reversed: BinaryHeap is a max-heap and we pop the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time_s.total_cmp(&self.time_s).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pending events ordered by `(time_s, seq)`; `seq` is assigned on push and
/// is unique within a queue.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
    now: f64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn push(&mut self, time_s: f64, kind: EventKind) {
        assert!(time_s >= self.now, "event causality violated: scheduling {time_s} at {}", self.now);
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time_s, seq, kind });
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time_s)
    }

    pub fn pop(&mut self) -> Option<Event> {
        let e = self.heap.pop()?;
        assert!(e.time_s >= self.now, "event causality violated: dequeued {} at {}", e.time_s, self.now);
        self.now = e.time_s;
        Some(e)
    }
}
