use std::collections::BTreeMap;

use crate::scenario::CachePolicy;
use crate::workload::ContentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    size_bits: u64,
    last_touch: u64,
    frequency: u64,
    admitted_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admission {
    /// Stored after evicting the listed contents (in eviction order).
    Admitted { evicted: Vec<ContentId> },
    /// Already resident; counted as a touch.
    AlreadyResident,
    /// Larger than the whole cache; served without caching.
    Bypassed,
}

/// Size-aware cache of one surrogate node.
///
/// Recency and admission order come from a logical clock that advances on
/// every admit or touch. Victims are chosen by `(last_touch, admitted_at, id)`
/// under LRU and `(frequency, admitted_at, id)` under LFU, smallest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeCache {
    policy: CachePolicy,
    capacity_bits: u64,
    used_bits: u64,
    clock: u64,
    entries: BTreeMap<ContentId, Entry>,
}

impl NodeCache {
    pub fn new(policy: CachePolicy, capacity_bits: u64) -> Self {
        NodeCache { policy, capacity_bits, used_bits: 0, clock: 0, entries: BTreeMap::new() }
    }

    pub fn capacity_bits(&self) -> u64 {
        self.capacity_bits
    }

    pub fn used_bits(&self) -> u64 {
        self.used_bits
    }

    pub fn free_bits(&self) -> u64 {
        self.capacity_bits - self.used_bits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: ContentId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn resident(&self) -> impl Iterator<Item = ContentId> + '_ {
        self.entries.keys().copied()
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Records a hit. Returns `false` if the content is not resident.
    pub fn touch(&mut self, id: ContentId) -> bool {
        let now = self.tick();
        match self.entries.get_mut(&id) {
            Some(e) => {
                e.last_touch = now;
                e.frequency += 1;
                true
            }
            None => false,
        }
    }

    pub fn admit(&mut self, id: ContentId, size_bits: u64) -> Admission {
        if self.contains(id) {
            self.touch(id);
            return Admission::AlreadyResident;
        }
        if size_bits > self.capacity_bits {
            return Admission::Bypassed;
        }
        let mut evicted = Vec::new();
        while self.capacity_bits - self.used_bits < size_bits {
            let victim = self.victim().expect("non-empty cache when over capacity");
            self.remove(victim);
            evicted.push(victim);
        }
        let now = self.tick();
        self.entries.insert(id, Entry { size_bits, last_touch: now, frequency: 1, admitted_at: now });
        self.used_bits += size_bits;
        assert!(self.used_bits <= self.capacity_bits, "cache capacity invariant violated");
        Admission::Admitted { evicted }
    }

    pub fn remove(&mut self, id: ContentId) -> bool {
        match self.entries.remove(&id) {
            Some(e) => {
                self.used_bits -= e.size_bits;
                true
            }
            None => false,
        }
    }

    fn victim(&self) -> Option<ContentId> {
        let key = |(id, e): (&ContentId, &Entry)| match self.policy {
            CachePolicy::Lru => (e.last_touch, e.admitted_at, *id),
            CachePolicy::Lfu => (e.frequency, e.admitted_at, *id),
        };
        self.entries.iter().map(key).min().map(|k| k.2)
    }
}
