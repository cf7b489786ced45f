// SPDX-License-Identifier: Apache-2.0

use super::ClientId;
use crate::param::ParameterUpdate;
use std::collections::{BTreeMap, HashMap};
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Offer {
    Accept,
    /// Held back; the newest held value goes out at the deadline.
    Defer { deadline: Duration },
}

#[derive(Debug, Clone)]
struct Pending {
    update: ParameterUpdate,
    deadline: Duration,
}

/// Per-(client, parameter) rate limiter that defers rather than drops.
#[derive(Debug, Clone)]
pub struct RateLimiter {
    min_interval: Duration,
    last: HashMap<(ClientId, String), Duration>,
    pending: BTreeMap<(ClientId, String), Pending>,
}

impl RateLimiter {
    pub fn new(min_interval: Duration) -> Self {
        RateLimiter {
            min_interval,
            last: HashMap::new(),
            pending: BTreeMap::new(),
        }
    }

    pub fn min_interval(&self) -> Duration {
        self.min_interval
    }

    pub fn offer(&mut self, from: ClientId, update: ParameterUpdate, now: Duration) -> Offer {
        let key = (from, update.guid.clone());
        match self.last.get(&key) {
            Some(&last) if now.saturating_sub(last) < self.min_interval => {
                let deadline = last + self.min_interval;
                self.pending.insert(key, Pending { update, deadline });
                Offer::Defer { deadline }
            }
            _ => {
                self.pending.remove(&key);
                self.last.insert(key, now);
                Offer::Accept
            }
        }
    }

    /// Removes and returns held updates whose deadline has passed, in
    /// deadline order. The caller decides whether each still goes out and
    /// reports it through [`mark_sent`](Self::mark_sent).
    pub fn take_due(&mut self, now: Duration) -> Vec<(ClientId, ParameterUpdate)> {
        let mut due: Vec<((ClientId, String), Pending)> = Vec::new();
        self.pending.retain(|k, p| {
            if p.deadline <= now {
                due.push((k.clone(), p.clone()));
                false
            } else {
                true
            }
        });
        due.sort_by(|a, b| a.1.deadline.cmp(&b.1.deadline).then_with(|| a.0.cmp(&b.0)));
        due.into_iter().map(|((c, _), p)| (c, p.update)).collect()
    }

    pub fn mark_sent(&mut self, from: ClientId, guid: &str, now: Duration) {
        self.last.insert((from, guid.to_string()), now);
    }

    pub fn next_deadline(&self) -> Option<Duration> {
        self.pending.values().map(|p| p.deadline).min()
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn discard(&mut self, from: ClientId, guid: &str) {
        self.pending.remove(&(from, guid.to_string()));
    }

    /// Drops every held value for `guid` except the one from `keep`.
    pub fn discard_others(&mut self, keep: ClientId, guid: &str) {
        self.pending.retain(|(c, g), _| *c == keep || g != guid);
    }

    pub fn forget_client(&mut self, id: ClientId) {
        self.pending.retain(|(c, _), _| *c != id);
        self.last.retain(|(c, _), _| *c != id);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(n: u64) -> Duration {
        Duration::from_millis(n)
    }

    #[test]
    fn burst_becomes_one_accept_and_one_flush() {
        let mut l = RateLimiter::new(ms(100));
        let offers: Vec<Offer> = (0..5)
            .map(|i| l.offer(1, ParameterUpdate::number("g", i as f64), ms(i * 10)))
            .collect();
        assert_eq!(offers[0], Offer::Accept);
        assert!(offers[1..].iter().all(|o| *o == Offer::Defer { deadline: ms(100) }));
        assert!(l.take_due(ms(99)).is_empty());
        let due = l.take_due(ms(100));
        assert_eq!(due, vec![(1, ParameterUpdate::number("g", 4.0))]);
        assert_eq!(l.pending_len(), 0);
    }

    #[test]
    fn late_update_supersedes_pending() {
        let mut l = RateLimiter::new(ms(100));
        l.offer(1, ParameterUpdate::number("g", 0.0), ms(0));
        l.offer(1, ParameterUpdate::number("g", 1.0), ms(50));
        assert_eq!(l.offer(1, ParameterUpdate::number("g", 2.0), ms(150)), Offer::Accept);
        assert!(l.take_due(ms(1000)).is_empty());
    }

    #[test]
    fn discard_others_keeps_own_value() {
        let mut l = RateLimiter::new(ms(100));
        for c in [1, 2] {
            l.offer(c, ParameterUpdate::number("g", 0.0), ms(0));
            l.offer(c, ParameterUpdate::number("g", c as f64), ms(10));
        }
        l.offer(1, ParameterUpdate::number("h", 0.0), ms(0));
        l.offer(1, ParameterUpdate::number("h", 5.0), ms(10));
        l.discard_others(2, "g");
        let due = l.take_due(ms(100));
        assert_eq!(
            due,
            vec![(1, ParameterUpdate::number("h", 5.0)), (2, ParameterUpdate::number("g", 2.0))]
        );
    }
}
