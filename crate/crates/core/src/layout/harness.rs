// SPDX-License-Identifier: Apache-2.0

//! Deterministic in-process message passing between simulated ranks.
//!
//! A phase runs in lockstep: every rank produces its outgoing messages from
//! its current state, the harness checks and routes them, then every rank
//! consumes its inbox ordered by source rank. Results therefore do not depend
//! on whether ranks run on threads or one after another.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::C64;

/// Bytes per transported entry (one double-precision complex number).
pub const ENTRY_BYTES: usize = 16;

/// Rectangle of global indices; its entries travel column-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub rows: Range<usize>,
    pub cols: Range<usize>,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub src: usize,
    pub dst: usize,
    pub phase: String,
    /// Global index ranges of the payload, in payload order.
    pub blocks: Vec<Block>,
    pub payload: Vec<C64>,
}

impl Message {
    pub fn new(src: usize, dst: usize, phase: &str) -> Self {
        Self {
            src,
            dst,
            phase: phase.to_string(),
            blocks: Vec::new(),
            payload: Vec::new(),
        }
    }

    /// Appends a block, reading entry `(i, j)` through `value`.
    pub fn push_block(
        &mut self,
        rows: Range<usize>,
        cols: Range<usize>,
        mut value: impl FnMut(usize, usize) -> C64,
    ) {
        for j in cols.clone() {
            for i in rows.clone() {
                self.payload.push(value(i, j));
            }
        }
        self.blocks.push(Block { rows, cols });
    }

    /// Calls `f(i, j, v)` for every transported entry.
    pub fn for_each(&self, mut f: impl FnMut(usize, usize, C64)) {
        let mut k = 0;
        for b in &self.blocks {
            for j in b.cols.clone() {
                for i in b.rows.clone() {
                    f(i, j, self.payload[k]);
                    k += 1;
                }
            }
        }
    }

    pub fn bytes(&self) -> usize {
        self.payload.len() * ENTRY_BYTES
    }

    fn well_formed(&self) -> bool {
        self.blocks.iter().map(Block::len).sum::<usize>() == self.payload.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhaseTraffic {
    pub phase: String,
    pub messages: usize,
    pub bytes: usize,
    /// Largest number of bytes sent by a single rank.
    pub max_rank_bytes: usize,
    pub received_bytes: usize,
}

/// Traffic per phase. Messages a rank sends to itself are local copies and
/// are not counted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrafficReport {
    pub phases: Vec<PhaseTraffic>,
}

impl TrafficReport {
    pub fn total_bytes(&self) -> usize {
        self.phases.iter().map(|p| p.bytes).sum()
    }

    pub fn total_messages(&self) -> usize {
        self.phases.iter().map(|p| p.messages).sum()
    }

    pub fn phase(&self, name: &str) -> Option<&PhaseTraffic> {
        self.phases.iter().find(|p| p.phase == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Threaded,
}

#[derive(Debug, Default)]
pub struct Harness {
    execution: Execution,
    report: TrafficReport,
    per_rank: Vec<(String, Vec<usize>)>,
}

impl Harness {
    pub fn new(execution: Execution) -> Self {
        Self {
            execution,
            ..Self::default()
        }
    }

    /// One lockstep exchange. `allowed(src, dst)` encodes the communicator
    /// the phase is restricted to; a message outside it is an error.
    /// Repeated calls with the same phase name accumulate into one entry.
    pub fn exchange<S, A, F, G>(
        &mut self,
        phase: &str,
        states: &mut [S],
        allowed: A,
        send: F,
        recv: G,
    ) -> Result<()>
    where
        S: Send + Sync,
        A: Fn(usize, usize) -> bool,
        F: Fn(usize, &S) -> Vec<Message> + Sync,
        G: Fn(usize, &mut S, Vec<Message>) + Sync,
    {
        let nranks = states.len();
        let outgoing: Vec<Vec<Message>> = match self.execution {
            Execution::Sequential => states.iter().enumerate().map(|(r, s)| send(r, s)).collect(),
            Execution::Threaded => states
                .par_iter()
                .enumerate()
                .map(|(r, s)| send(r, s))
                .collect(),
        };

        let mut inbox: Vec<Vec<Message>> = (0..nranks).map(|_| Vec::new()).collect();
        let mut sent = vec![0usize; nranks];
        let mut messages = 0;
        let mut received = 0;
        for (src, msgs) in outgoing.into_iter().enumerate() {
            for m in msgs {
                if m.src != src || m.dst >= nranks || m.phase != phase || !m.well_formed() {
                    return Err(Error::Layout(format!(
                        "malformed message {}->{} in phase {phase}",
                        m.src, m.dst
                    )));
                }
                if !allowed(m.src, m.dst) {
                    return Err(Error::Layout(format!(
                        "message {}->{} leaves the communicator of phase {phase}",
                        m.src, m.dst
                    )));
                }
                if m.dst != src {
                    messages += 1;
                    sent[src] += m.bytes();
                    received += m.bytes();
                }
                inbox[m.dst].push(m);
            }
        }
        for msgs in &mut inbox {
            msgs.sort_by_key(|m| m.src);
        }
        match self.execution {
            Execution::Sequential => {
                for (r, (s, msgs)) in states.iter_mut().zip(inbox).enumerate() {
                    recv(r, s, msgs);
                }
            }
            Execution::Threaded => {
                states
                    .par_iter_mut()
                    .zip(inbox)
                    .enumerate()
                    .for_each(|(r, (s, msgs))| recv(r, s, msgs));
            }
        }

        let idx = match self.report.phases.iter().position(|p| p.phase == phase) {
            Some(i) => i,
            None => {
                self.report.phases.push(PhaseTraffic {
                    phase: phase.to_string(),
                    ..PhaseTraffic::default()
                });
                self.per_rank.push((phase.to_string(), vec![0; nranks]));
                self.report.phases.len() - 1
            }
        };
        let entry = &mut self.report.phases[idx];
        entry.messages += messages;
        entry.bytes += sent.iter().sum::<usize>();
        entry.received_bytes += received;
        let totals = &mut self.per_rank[idx].1;
        for (t, s) in totals.iter_mut().zip(&sent) {
            *t += s;
        }
        entry.max_rank_bytes = totals.iter().copied().max().unwrap_or(0);
        Ok(())
    }

    pub fn finish(self) -> TrafficReport {
        self.report
    }
}

/// Round-robin pairing of `n` members: `2 * ceil(n / 2) - 1` rounds, each a
/// list of disjoint pairs, every pair of members meeting exactly once.
pub fn caterpillar_rounds(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n < 2 {
        return Vec::new();
    }
    let m = n + n % 2;
    let fixed = m - 1;
    (0..m - 1)
        .map(|r| {
            let mut pairs = Vec::with_capacity(m / 2);
            let mut push = |a: usize, b: usize| {
                if a < n && b < n {
                    pairs.push((a.min(b), a.max(b)));
                }
            };
            push(r, fixed);
            for k in 1..m / 2 {
                push((r + k) % (m - 1), (r + m - 1 - k) % (m - 1));
            }
            pairs
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn caterpillar_covers_all_pairs_once() {
        for n in 1..12 {
            let rounds = caterpillar_rounds(n);
            let mut seen = HashSet::new();
            for round in &rounds {
                let mut busy = HashSet::new();
                for &(a, b) in round {
                    assert!(busy.insert(a) && busy.insert(b));
                    assert!(seen.insert((a, b)));
                }
            }
            assert_eq!(seen.len(), n * n.saturating_sub(1) / 2);
            if n > 1 {
                assert_eq!(rounds.len(), 2 * n.div_ceil(2) - 1);
            }
        }
    }

    #[test]
    fn exchange_counts_and_orders() {
        let mut states: Vec<Vec<usize>> = vec![Vec::new(); 3];
        let mut h = Harness::new(Execution::Sequential);
        h.exchange(
            "ring",
            &mut states,
            |_, _| true,
            |r, _| {
                let mut m = Message::new(r, (r + 1) % 3, "ring");
                m.push_block(0..2, r..r + 1, |i, j| C64::new(i as f64, j as f64));
                let mut own = Message::new(r, r, "ring");
                own.push_block(0..1, 0..1, |_, _| C64::new(0.0, 0.0));
                vec![m, own]
            },
            |_, s, msgs| s.extend(msgs.iter().map(|m| m.src)),
        )
        .unwrap();
        assert_eq!(states[0], vec![0, 2]);
        let rep = h.finish();
        let p = rep.phase("ring").unwrap();
        assert_eq!(p.messages, 3);
        assert_eq!(p.bytes, 3 * 2 * ENTRY_BYTES);
        assert_eq!(p.bytes, p.received_bytes);
        assert_eq!(p.max_rank_bytes, 2 * ENTRY_BYTES);
    }

    #[test]
    fn communicator_violation_is_rejected() {
        let mut states = vec![(); 2];
        let mut h = Harness::new(Execution::Sequential);
        let r = h.exchange(
            "x",
            &mut states,
            |s, d| s == d,
            |r, _| vec![Message::new(r, 1 - r, "x")],
            |_, _, _| {},
        );
        assert!(r.is_err());
    }
}
