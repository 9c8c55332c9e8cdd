//! Extraction disciplines for the open set of traversal states.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::fmt;
use std::sync::Arc;

/// Ranking function for priority and beam frontiers. Lower keys are
/// extracted first; equal keys fall back to insertion order.
pub type PriorityKey<A> = Arc<dyn Fn(&A) -> f64 + Send + Sync>;

pub enum FrontierPolicy<A> {
    Fifo,
    Lifo,
    Priority(PriorityKey<A>),
    /// Keeps at most `width` states per traversal length, best keys first.
    Beam { width: usize, key: PriorityKey<A> },
}

impl<A> FrontierPolicy<A> {
    pub fn priority(key: impl Fn(&A) -> f64 + Send + Sync + 'static) -> Self {
        FrontierPolicy::Priority(Arc::new(key))
    }

    pub fn beam(width: usize, key: impl Fn(&A) -> f64 + Send + Sync + 'static) -> Self {
        FrontierPolicy::Beam {
            width,
            key: Arc::new(key),
        }
    }

    /// Whether every inserted state is eventually extracted.
    pub fn is_exhaustive(&self) -> bool {
        !matches!(self, FrontierPolicy::Beam { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FrontierPolicy::Fifo => "fifo",
            FrontierPolicy::Lifo => "lifo",
            FrontierPolicy::Priority(_) => "priority",
            FrontierPolicy::Beam { .. } => "beam",
        }
    }
}

impl<A> Clone for FrontierPolicy<A> {
    fn clone(&self) -> Self {
        match self {
            FrontierPolicy::Fifo => FrontierPolicy::Fifo,
            FrontierPolicy::Lifo => FrontierPolicy::Lifo,
            FrontierPolicy::Priority(k) => FrontierPolicy::Priority(k.clone()),
            FrontierPolicy::Beam { width, key } => FrontierPolicy::Beam {
                width: *width,
                key: key.clone(),
            },
        }
    }
}

impl<A> fmt::Debug for FrontierPolicy<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrontierPolicy::Beam { width, .. } => write!(f, "Beam {{ width: {width} }}"),
            other => f.write_str(other.name()),
        }
    }
}

struct Ranked<T> {
    key: f64,
    seq: u64,
    item: T,
}

impl<T> PartialEq for Ranked<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T> Eq for Ranked<T> {}

impl<T> PartialOrd for Ranked<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Ranked<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.seq.cmp(&other.seq))
    }
}

enum Store<T> {
    Queue(VecDeque<T>),
    Stack(Vec<T>),
    Heap(BinaryHeap<Reverse<Ranked<T>>>),
    // depth -> states of that depth, kept sorted best-first and trimmed to width
    Levels(BTreeMap<usize, Vec<Ranked<T>>>),
}

/// Open collection driven by a [`FrontierPolicy`].
pub(crate) struct Frontier<A, T> {
    policy: FrontierPolicy<A>,
    store: Store<T>,
    seq: u64,
    len: usize,
    dropped: usize,
}

impl<A, T> Frontier<A, T> {
    pub(crate) fn new(policy: FrontierPolicy<A>) -> Self {
        let store = match &policy {
            FrontierPolicy::Fifo => Store::Queue(VecDeque::new()),
            FrontierPolicy::Lifo => Store::Stack(Vec::new()),
            FrontierPolicy::Priority(_) => Store::Heap(BinaryHeap::new()),
            FrontierPolicy::Beam { .. } => Store::Levels(BTreeMap::new()),
        };
        Frontier {
            policy,
            store,
            seq: 0,
            len: 0,
            dropped: 0,
        }
    }

    pub(crate) fn insert(&mut self, item: T, acc: &A, depth: usize) {
        let seq = self.seq;
        self.seq += 1;
        match (&mut self.store, &self.policy) {
            (Store::Queue(q), _) => q.push_back(item),
            (Store::Stack(s), _) => s.push(item),
            (Store::Heap(h), FrontierPolicy::Priority(key)) => h.push(Reverse(Ranked {
                key: key(acc),
                seq,
                item,
            })),
            (Store::Levels(levels), FrontierPolicy::Beam { width, key }) => {
                let level = levels.entry(depth).or_default();
                let entry = Ranked {
                    key: key(acc),
                    seq,
                    item,
                };
                let pos = level.partition_point(|e| e < &entry);
                if pos >= *width {
                    self.dropped += 1;
                    return;
                }
                level.insert(pos, entry);
                if level.len() > *width {
                    level.pop();
                    self.dropped += 1;
                    self.len -= 1;
                }
            }
            _ => unreachable!("store matches policy"),
        }
        self.len += 1;
    }

    pub(crate) fn extract(&mut self) -> Option<T> {
        let item = match &mut self.store {
            Store::Queue(q) => q.pop_front(),
            Store::Stack(s) => s.pop(),
            Store::Heap(h) => h.pop().map(|Reverse(r)| r.item),
            Store::Levels(levels) => {
                let mut entry = levels.first_entry()?;
                let level = entry.get_mut();
                let item = level.remove(0).item;
                if level.is_empty() {
                    entry.remove();
                }
                Some(item)
            }
        };
        if item.is_some() {
            self.len -= 1;
        }
        item
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// States discarded by beam trimming.
    pub(crate) fn dropped(&self) -> usize {
        self.dropped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain<A>(mut f: Frontier<A, u32>) -> Vec<u32> {
        std::iter::from_fn(|| f.extract()).collect()
    }

    #[test]
    fn fifo_and_lifo_order() {
        let mut f = Frontier::new(FrontierPolicy::<f64>::Fifo);
        for i in 0..4 {
            f.insert(i, &0.0, 0);
        }
        assert_eq!(drain(f), vec![0, 1, 2, 3]);
        let mut f = Frontier::new(FrontierPolicy::<f64>::Lifo);
        for i in 0..4 {
            f.insert(i, &0.0, 0);
        }
        assert_eq!(drain(f), vec![3, 2, 1, 0]);
    }

    #[test]
    fn priority_ties_break_by_insertion() {
        let mut f = Frontier::new(FrontierPolicy::priority(|k: &f64| *k));
        for (i, k) in [(0, 2.0), (1, 1.0), (2, 2.0), (3, 1.0), (4, 0.5)] {
            f.insert(i, &k, 0);
        }
        assert_eq!(f.len(), 5);
        assert_eq!(drain(f), vec![4, 1, 3, 0, 2]);
    }

    #[test]
    fn beam_trims_per_level() {
        let mut f = Frontier::new(FrontierPolicy::beam(2, |k: &f64| *k));
        f.insert(0, &5.0, 1);
        f.insert(1, &1.0, 1);
        f.insert(2, &3.0, 1);
        f.insert(3, &9.0, 2);
        f.insert(4, &0.0, 1);
        assert_eq!(f.len(), 3);
        assert_eq!(f.dropped(), 2);
        // Level 1 holds keys 0.0 and 1.0; level 2 is extracted afterwards.
        assert_eq!(drain(f), vec![4, 1, 3]);
    }
}
