use std::collections::{BTreeMap, BTreeSet};

use crate::dynamic_graph::NodeId;

use super::engine::{Decision, MsgSize, NodeProgram};
use super::SimError;

/// Counting with known own cover time: flood `(uid, c_uid)` pairs and halt
/// once the round number equals the sum of all cover times heard so far.
#[derive(Clone, Debug)]
pub struct CoverCountNode {
    uid: NodeId,
    known: BTreeMap<NodeId, u32>,
}

impl CoverCountNode {
    pub fn new(uid: NodeId, cover: u32) -> Self {
        CoverCountNode {
            uid,
            known: BTreeMap::from([(uid, cover)]),
        }
    }

    pub fn known(&self) -> &BTreeMap<NodeId, u32> {
        &self.known
    }

    pub fn cover_sum(&self) -> u64 {
        self.known.values().map(|&c| c as u64).sum()
    }
}

impl NodeProgram for CoverCountNode {
    type Msg = Vec<(NodeId, u32)>;

    fn uid(&self) -> NodeId {
        self.uid
    }

    fn send(&self, _round: usize) -> Option<Self::Msg> {
        Some(self.known.iter().map(|(&v, &c)| (v, c)).collect())
    }

    fn size(msg: &Self::Msg) -> MsgSize {
        MsgSize {
            uid_entries: msg.len(),
            value_entries: msg.len(),
        }
    }

    fn receive(&mut self, _round: usize, inbox: &[&Self::Msg]) -> Result<(), SimError> {
        for msg in inbox {
            for &(v, c) in msg.iter() {
                match self.known.get(&v) {
                    Some(&prev) if prev != c => {
                        return Err(SimError::Integrity {
                            uid: self.uid,
                            detail: format!("node {v} reported with cover times {prev} and {c}"),
                        })
                    }
                    Some(_) => {}
                    None => {
                        self.known.insert(v, c);
                    }
                }
            }
        }
        Ok(())
    }

    fn decide(&mut self, round: usize) -> Option<u64> {
        (round as u64 == self.cover_sum()).then_some(self.known.len() as u64)
    }

    fn heard_count(&self) -> usize {
        self.known.len()
    }
}

/// Quiet-period budget for a node that has heard from `heard` initial states
/// under outgoing influence time `k`: `k·l·(l+1)/2 - 1`, except `k` when
/// `l = 1`.
///
/// At `l = 1` the general formula gives `k - 1`, which is too short: with
/// `k = 2` and an empty first round every node would halt at round 1. A node
/// that has heard nobody still has an edge within `k` rounds, because its own
/// future set must grow by then.
pub fn oit_budget(k: usize, heard: usize) -> usize {
    if heard <= 1 {
        return k;
    }
    (k * heard * (heard + 1) / 2).saturating_sub(1)
}

/// Counting with a shared bound `k` on the outgoing influence time: flood the
/// set of UIDs heard so far and halt after [`oit_budget`] rounds without
/// hearing a new one.
#[derive(Clone, Debug)]
pub struct OitCountNode {
    uid: NodeId,
    k: usize,
    known: BTreeSet<NodeId>,
    last_growth: usize,
}

impl OitCountNode {
    pub fn new(uid: NodeId, k: usize) -> Self {
        OitCountNode {
            uid,
            k,
            known: BTreeSet::from([uid]),
            last_growth: 0,
        }
    }

    pub fn known(&self) -> &BTreeSet<NodeId> {
        &self.known
    }

    /// Round in which the known set last grew (0 before any growth).
    pub fn last_growth(&self) -> usize {
        self.last_growth
    }

    /// Whether the halting criterion holds at the end of `round`.
    pub fn criterion(&self, round: usize) -> bool {
        round - self.last_growth >= oit_budget(self.k, self.known.len())
    }
}

impl NodeProgram for OitCountNode {
    type Msg = Vec<NodeId>;

    fn uid(&self) -> NodeId {
        self.uid
    }

    fn send(&self, _round: usize) -> Option<Self::Msg> {
        Some(self.known.iter().copied().collect())
    }

    fn size(msg: &Self::Msg) -> MsgSize {
        MsgSize {
            uid_entries: msg.len(),
            value_entries: 0,
        }
    }

    fn receive(&mut self, round: usize, inbox: &[&Self::Msg]) -> Result<(), SimError> {
        let before = self.known.len();
        for msg in inbox {
            self.known.extend(msg.iter().copied());
        }
        if self.known.len() > before {
            self.last_growth = round;
        }
        Ok(())
    }

    fn decide(&mut self, round: usize) -> Option<u64> {
        self.criterion(round).then_some(self.known.len() as u64)
    }

    fn heard_count(&self) -> usize {
        self.known.len()
    }
}

/// Counting with a shared upper bound `T` on the connectivity time. Each node
/// keeps, per known UID, the latest state time of that node that has reached
/// it, and halts once every known UID has a state time of at least `T`.
#[derive(Clone, Debug)]
pub struct CtCountNode {
    uid: NodeId,
    bound: usize,
    latest: BTreeMap<NodeId, usize>,
}

impl CtCountNode {
    pub fn new(uid: NodeId, bound: usize) -> Self {
        CtCountNode {
            uid,
            bound,
            latest: BTreeMap::from([(uid, 0)]),
        }
    }

    pub fn latest(&self) -> &BTreeMap<NodeId, usize> {
        &self.latest
    }

    /// `past(u, round)(0) = past(u, round)(T)`, evaluated from local state.
    pub fn criterion(&self, round: usize) -> bool {
        round >= self.bound && self.latest.values().all(|&s| s >= self.bound)
    }
}

impl NodeProgram for CtCountNode {
    type Msg = Vec<(NodeId, usize)>;

    fn uid(&self) -> NodeId {
        self.uid
    }

    fn send(&self, _round: usize) -> Option<Self::Msg> {
        Some(self.latest.iter().map(|(&v, &s)| (v, s)).collect())
    }

    fn size(msg: &Self::Msg) -> MsgSize {
        MsgSize {
            uid_entries: msg.len(),
            value_entries: msg.len(),
        }
    }

    fn receive(&mut self, round: usize, inbox: &[&Self::Msg]) -> Result<(), SimError> {
        for msg in inbox {
            for &(v, s) in msg.iter() {
                let slot = self.latest.entry(v).or_insert(s);
                *slot = (*slot).max(s);
            }
        }
        self.latest.insert(self.uid, round);
        Ok(())
    }

    fn decide(&mut self, round: usize) -> Option<u64> {
        self.criterion(round).then_some(self.latest.len() as u64)
    }

    fn heard_count(&self) -> usize {
        self.latest.len()
    }
}

/// Cover-time consistency check: broadcast the claimed bound `C_u` for `C_u`
/// rounds, wait for every underlying neighbour's claim, then accept if some
/// neighbour claims at least as much, otherwise lower `C_u` to the largest
/// neighbouring claim.
#[derive(Clone, Debug)]
pub struct ConsistencyNode {
    uid: NodeId,
    claimed: u32,
    current: u32,
    neighbors: Vec<NodeId>,
    heard: BTreeMap<NodeId, u32>,
    decision: Option<Decision>,
}

impl ConsistencyNode {
    pub fn new(uid: NodeId, claimed: u32, neighbors: Vec<NodeId>) -> Self {
        ConsistencyNode {
            uid,
            claimed,
            current: claimed,
            neighbors,
            heard: BTreeMap::from([(uid, claimed)]),
            decision: None,
        }
    }

    pub fn current(&self) -> u32 {
        self.current
    }

    pub fn heard(&self) -> &BTreeMap<NodeId, u32> {
        &self.heard
    }

    /// Nodes of `N(u)` whose claim has not arrived yet.
    pub fn missing(&self) -> Vec<NodeId> {
        self.neighbors
            .iter()
            .copied()
            .filter(|v| !self.heard.contains_key(v))
            .collect()
    }

    fn evaluate(&mut self) {
        let best = self.neighbors.iter().map(|v| self.heard[v]).max();
        // A node without neighbours has nothing to reconcile.
        self.decision = Some(match best {
            Some(max) if max < self.claimed => {
                self.current = max;
                Decision::Fixed
            }
            _ => Decision::Accept,
        });
    }
}

impl NodeProgram for ConsistencyNode {
    type Msg = (NodeId, u32);

    fn uid(&self) -> NodeId {
        self.uid
    }

    fn send(&self, round: usize) -> Option<Self::Msg> {
        (round <= self.claimed as usize).then_some((self.uid, self.claimed))
    }

    fn size(_msg: &Self::Msg) -> MsgSize {
        MsgSize {
            uid_entries: 1,
            value_entries: 1,
        }
    }

    fn receive(&mut self, _round: usize, inbox: &[&Self::Msg]) -> Result<(), SimError> {
        for &&(v, c) in inbox {
            if self.neighbors.binary_search(&v).is_err() {
                return Err(SimError::ModelViolation {
                    detail: format!("node {} heard from non-neighbour {v}", self.uid),
                    trace: None,
                });
            }
            self.heard.insert(v, c);
        }
        Ok(())
    }

    fn decide(&mut self, round: usize) -> Option<u64> {
        if self.decision.is_none() && self.missing().is_empty() {
            self.evaluate();
        }
        (self.decision.is_some() && round >= self.claimed as usize).then_some(self.current as u64)
    }

    fn heard_count(&self) -> usize {
        self.heard.len()
    }

    fn decision(&self) -> Option<Decision> {
        self.decision
    }
}
