use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

struct Entry<E> {
    at: f64,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // Reversed so the max-heap pops the earliest (then first-inserted) event.
    fn cmp(&self, other: &Self) -> Ordering {
        other.at.total_cmp(&self.at).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Timestamp-ordered event queue with a monotone clock (ns).
pub struct EventQueue<E> {
    now: f64,
    next_seq: u64,
    pending: BinaryHeap<Entry<E>>,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self { now: 0.0, next_seq: 0, pending: BinaryHeap::new() }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn schedule(&mut self, event: E, at: f64) -> Result<()> {
        if at.is_nan() || at < self.now {
            return Err(Error::Schedule { at, now: self.now });
        }
        self.pending.push(Entry { at, seq: self.next_seq, event });
        self.next_seq += 1;
        Ok(())
    }

    pub fn schedule_in(&mut self, event: E, delay: f64) -> Result<()> {
        self.schedule(event, self.now + delay)
    }

    /// Removes the next event and advances the clock to it.
    pub fn pop(&mut self) -> Option<(f64, E)> {
        let e = self.pending.pop()?;
        self.now = e.at;
        Some((e.at, e.event))
    }

    /// Processes every event with timestamp `<= t_end`. The handler may
    /// schedule further events. Returns the number processed.
    pub fn run_until<F>(&mut self, t_end: f64, mut handler: F) -> Result<usize>
    where
        F: FnMut(&mut Self, E) -> Result<()>,
    {
        let mut count = 0;
        while self.pending.peek().is_some_and(|e| e.at <= t_end) {
            let (_, event) = self.pop().expect("peeked");
            handler(self, event)?;
            count += 1;
        }
        if t_end.is_finite() && t_end > self.now {
            self.now = t_end;
        }
        Ok(count)
    }
}
