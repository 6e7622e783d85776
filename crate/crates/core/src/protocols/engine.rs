use std::io;

use serde::Serialize;

use crate::dynamic_graph::{DynamicGraph, NodeId};

use super::SimError;

/// Message size in entries (UIDs and attached values), not bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MsgSize {
    pub uid_entries: usize,
    pub value_entries: usize,
}

impl MsgSize {
    pub fn total(self) -> usize {
        self.uid_entries + self.value_entries
    }
}

/// Outcome of the cover-time consistency check at one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Fixed,
}

/// Node-local program run by the synchronous engine.
///
/// Each round, every node may broadcast one message to all of its current
/// neighbours; running nodes then receive, and finally each evaluates its
/// halting predicate. Halted nodes are frozen: they no longer receive or
/// change state, but keep announcing their final state.
pub trait NodeProgram {
    type Msg;

    fn uid(&self) -> NodeId;

    fn send(&self, round: usize) -> Option<Self::Msg>;

    fn size(msg: &Self::Msg) -> MsgSize;

    fn receive(&mut self, round: usize, inbox: &[&Self::Msg]) -> Result<(), SimError>;

    /// Called at the end of each round; `Some(output)` halts the node.
    fn decide(&mut self, round: usize) -> Option<u64>;

    fn heard_count(&self) -> usize;

    fn decision(&self) -> Option<Decision> {
        None
    }
}

/// One node in one round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeRecord {
    pub round: usize,
    pub uid: NodeId,
    pub heard_count: usize,
    pub uid_entries: usize,
    pub value_entries: usize,
    pub halted: bool,
    pub output: Option<u64>,
    pub decision: Option<Decision>,
}

impl NodeRecord {
    pub fn msg_entries(&self) -> usize {
        self.uid_entries + self.value_entries
    }
}

/// Round-by-round record of a run, `n` records per round, rounds from 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub n: usize,
    pub records: Vec<NodeRecord>,
}

impl Trace {
    pub fn rounds(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.records.len() / self.n
        }
    }

    /// Records of one round (1-based).
    pub fn round(&self, r: usize) -> &[NodeRecord] {
        &self.records[(r - 1) * self.n..r * self.n]
    }

    pub fn last_round(&self) -> &[NodeRecord] {
        self.round(self.rounds())
    }

    /// First round at which `uid` is recorded as halted.
    pub fn halt_round(&self, uid: NodeId) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.uid == uid && r.halted)
            .map(|r| r.round)
    }

    pub fn all_halted(&self) -> bool {
        self.rounds() > 0 && self.last_round().iter().all(|r| r.halted)
    }

    /// Final outputs by node, ascending uid.
    pub fn outputs(&self) -> Vec<Option<u64>> {
        if self.rounds() == 0 {
            return vec![None; self.n];
        }
        self.last_round().iter().map(|r| r.output).collect()
    }

    pub fn max_msg_entries(&self) -> usize {
        self.records
            .iter()
            .map(NodeRecord::msg_entries)
            .max()
            .unwrap_or(0)
    }

    pub fn max_halt_round(&self) -> Option<usize> {
        (1..=self.n as NodeId)
            .map(|u| self.halt_round(u))
            .try_fold(0, |acc, r| r.map(|r| acc.max(r)))
    }

    /// Writes the trace as CSV with the columns
    /// `round,uid,heard_count,msg_entries,halted,output`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "round",
            "uid",
            "heard_count",
            "msg_entries",
            "halted",
            "output",
        ])?;
        for r in &self.records {
            w.write_record([
                r.round.to_string(),
                r.uid.to_string(),
                r.heard_count.to_string(),
                r.msg_entries().to_string(),
                r.halted.to_string(),
                r.output.map(|o| o.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Lock-step simulation of one program per node over a dynamic graph.
pub struct Simulation<'g, P: NodeProgram> {
    graph: &'g DynamicGraph,
    nodes: Vec<P>,
    output: Vec<Option<u64>>,
    round: usize,
    trace: Trace,
}

impl<'g, P: NodeProgram> Simulation<'g, P> {
    /// `nodes[i]` runs at node `i + 1`.
    pub fn new(graph: &'g DynamicGraph, nodes: Vec<P>) -> Self {
        assert_eq!(graph.n(), nodes.len(), "one program per node");
        let n = nodes.len();
        Simulation {
            graph,
            nodes,
            output: vec![None; n],
            round: 0,
            trace: Trace {
                n,
                records: Vec::new(),
            },
        }
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn nodes(&self) -> &[P] {
        &self.nodes
    }

    pub fn is_halted(&self, uid: NodeId) -> bool {
        self.output[uid as usize - 1].is_some()
    }

    pub fn all_halted(&self) -> bool {
        self.output.iter().all(Option::is_some)
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    /// Executes the next round.
    pub fn step(&mut self) -> Result<(), SimError> {
        let round = self.round + 1;
        let edges = self.graph.instance(round)?;
        let outbox: Vec<Option<P::Msg>> = self.nodes.iter().map(|node| node.send(round)).collect();

        let mut inboxes: Vec<Vec<&P::Msg>> = (0..self.nodes.len()).map(|_| Vec::new()).collect();
        for e in edges.iter() {
            let (a, b) = e.indices();
            if let Some(m) = &outbox[a] {
                inboxes[b].push(m);
            }
            if let Some(m) = &outbox[b] {
                inboxes[a].push(m);
            }
        }
        for (i, inbox) in inboxes.iter().enumerate() {
            if self.output[i].is_none() {
                self.nodes[i].receive(round, inbox)?;
            }
        }
        for (i, node) in self.nodes.iter_mut().enumerate() {
            if self.output[i].is_none() {
                self.output[i] = node.decide(round);
            }
        }

        self.round = round;
        for (i, node) in self.nodes.iter().enumerate() {
            let size = outbox[i].as_ref().map(P::size).unwrap_or_default();
            self.trace.records.push(NodeRecord {
                round,
                uid: node.uid(),
                heard_count: node.heard_count(),
                uid_entries: size.uid_entries,
                value_entries: size.value_entries,
                halted: self.output[i].is_some(),
                output: self.output[i],
                decision: node.decision(),
            });
        }
        Ok(())
    }

    /// Steps until every node halts or `max_rounds` rounds have run.
    pub fn run(mut self, max_rounds: usize) -> Result<Trace, SimError> {
        let limit = self
            .graph
            .horizon()
            .map_or(max_rounds, |h| h.min(max_rounds));
        while !self.all_halted() && self.round < limit {
            self.step()?;
        }
        if self.all_halted() {
            Ok(self.trace)
        } else {
            Err(SimError::Timeout {
                rounds: self.round,
                trace: Box::new(self.trace),
            })
        }
    }
}
