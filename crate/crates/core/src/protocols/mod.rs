//! Synchronous round simulator and the node-local counting procedures.

mod engine;
mod nodes;

use serde::Serialize;
use thiserror::Error;

use crate::dynamic_graph::{DynamicGraph, GraphError, NodeId};
use crate::influence::{compute_ct, compute_oit};
use crate::local_windows::{respects, CoverNetwork, ModelError};

pub use engine::{Decision, MsgSize, NodeProgram, NodeRecord, Simulation, Trace};
pub use nodes::{oit_budget, ConsistencyNode, CoverCountNode, CtCountNode, OitCountNode};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("model precondition failed: {0}")]
    Precondition(String),
    #[error("{rounds} rounds elapsed with unhalted nodes")]
    Timeout { rounds: usize, trace: Box<Trace> },
    #[error("node {uid}: protocol integrity violated: {detail}")]
    Integrity { uid: NodeId, detail: String },
    #[error("model violation: {detail}")]
    ModelViolation {
        detail: String,
        trace: Option<Box<Trace>>,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl SimError {
    /// Partial trace carried by timeouts and late model violations.
    pub fn trace(&self) -> Option<&Trace> {
        match self {
            SimError::Timeout { trace, .. } => Some(trace),
            SimError::ModelViolation { trace, .. } => trace.as_deref(),
            _ => None,
        }
    }
}

/// A protocol together with the knowledge each node starts with.
#[derive(Clone, Debug)]
pub enum ProtocolInstance {
    /// Each node knows its own cover time.
    CoverCount(CoverNetwork),
    /// All nodes know an upper bound `k` on the outgoing influence time.
    OitCount { k: usize },
    /// All nodes know an upper bound `T` on the connectivity time.
    CtCount { bound: usize },
    /// Each node knows a claimed cover-time bound `C_u` (the network's cover
    /// vector) and its underlying neighbours.
    Consistency(CoverNetwork),
}

impl ProtocolInstance {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolInstance::CoverCount(_) => "cover-count",
            ProtocolInstance::OitCount { .. } => "oit-count",
            ProtocolInstance::CtCount { .. } => "ct-count",
            ProtocolInstance::Consistency(_) => "consistency",
        }
    }

    /// Round limit within which every node halts when the model holds.
    pub fn default_max_rounds(&self, n: usize) -> usize {
        match self {
            ProtocolInstance::CoverCount(net) => 4 * net.total_cover() as usize,
            ProtocolInstance::OitCount { k } => 4 * k * n * n,
            ProtocolInstance::CtCount { bound } => 4 * (bound + n * bound),
            ProtocolInstance::Consistency(net) => net.total_cover() as usize,
        }
    }

    /// Checks the model assumptions that can be checked centrally.
    pub fn check(&self, g: &DynamicGraph) -> Result<(), SimError> {
        match self {
            ProtocolInstance::CoverCount(net) => {
                if !respects(g, net)? {
                    return Err(SimError::Precondition(
                        "schedule does not respect the cover times".into(),
                    ));
                }
            }
            ProtocolInstance::OitCount { k } => {
                if *k == 0 {
                    return Err(SimError::Precondition("k must be at least 1".into()));
                }
                let oit = compute_oit(g, *k);
                if oit.finite().is_none() {
                    return Err(SimError::Precondition(format!(
                        "outgoing influence time exceeds k = {k}"
                    )));
                }
            }
            ProtocolInstance::CtCount { bound } => {
                if *bound == 0 {
                    return Err(SimError::Precondition("T must be at least 1".into()));
                }
                let ct = compute_ct(g, *bound);
                if ct.finite().is_none() {
                    return Err(SimError::Precondition(format!(
                        "connectivity time exceeds T = {bound}"
                    )));
                }
            }
            ProtocolInstance::Consistency(net) => {
                if g.n() != net.n() {
                    return Err(ModelError::NodeCountMismatch {
                        graph: g.n(),
                        network: net.n(),
                    }
                    .into());
                }
                // Only rejects edges outside the underlying graph; the true
                // cover times are not known here.
                respects(g, net)?;
            }
        }
        Ok(())
    }

    /// Correct final output of node `uid`.
    pub fn expected(&self, n: usize, uid: NodeId) -> Expected {
        match self {
            ProtocolInstance::Consistency(net) => {
                let own = net.cover(uid);
                let best = net.neighbors(uid).iter().map(|&v| net.cover(v)).max();
                match best {
                    Some(max) if max < own => Expected {
                        output: max as u64,
                        decision: Some(Decision::Fixed),
                    },
                    _ => Expected {
                        output: own as u64,
                        decision: Some(Decision::Accept),
                    },
                }
            }
            _ => Expected {
                output: n as u64,
                decision: None,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Expected {
    pub output: u64,
    pub decision: Option<Decision>,
}

/// Runs `proto` on `g` after checking its model assumptions.
///
/// `max_rounds` defaults to [`ProtocolInstance::default_max_rounds`].
pub fn run_sync(
    g: &DynamicGraph,
    proto: &ProtocolInstance,
    max_rounds: Option<usize>,
) -> Result<Trace, SimError> {
    proto.check(g)?;
    let n = g.n();
    let limit = max_rounds.unwrap_or_else(|| proto.default_max_rounds(n));
    let uids = 1..=n as NodeId;
    match proto {
        ProtocolInstance::CoverCount(net) => {
            let nodes = uids.map(|u| CoverCountNode::new(u, net.cover(u))).collect();
            Simulation::new(g, nodes).run(limit)
        }
        ProtocolInstance::OitCount { k } => {
            let nodes = uids.map(|u| OitCountNode::new(u, *k)).collect();
            Simulation::new(g, nodes).run(limit)
        }
        ProtocolInstance::CtCount { bound } => {
            let nodes = uids.map(|u| CtCountNode::new(u, *bound)).collect();
            Simulation::new(g, nodes).run(limit)
        }
        ProtocolInstance::Consistency(net) => {
            let nodes = uids
                .map(|u| ConsistencyNode::new(u, net.cover(u), net.neighbors(u).to_vec()))
                .collect();
            let mut sim = Simulation::new(g, nodes);
            let cap = g.horizon().map_or(limit, |h| h.min(limit));
            while !sim.all_halted() && sim.round() < cap {
                sim.step()?;
            }
            if sim.all_halted() {
                return Ok(sim.into_trace());
            }
            let silent: Vec<String> = sim
                .nodes()
                .iter()
                .filter(|node| !node.missing().is_empty())
                .map(|node| format!("{} missing {:?}", node.uid(), node.missing()))
                .collect();
            let detail = if silent.is_empty() {
                format!("nodes unhalted after {} rounds", sim.round())
            } else {
                format!(
                    "neighbour claims never arrived within {} rounds: {}",
                    sim.round(),
                    silent.join("; ")
                )
            };
            Err(SimError::ModelViolation {
                detail,
                trace: Some(Box::new(sim.into_trace())),
            })
        }
    }
}

/// Digest of a finished run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub all_correct: bool,
    pub max_halt_round: usize,
    pub max_msg_entries: usize,
}

pub fn summarize(trace: &Trace, proto: &ProtocolInstance) -> Summary {
    let n = trace.n;
    let all_correct = trace.rounds() > 0
        && trace.last_round().iter().all(|r| {
            let want = proto.expected(n, r.uid);
            r.output == Some(want.output)
                && (want.decision.is_none() || r.decision == want.decision)
        });
    Summary {
        all_correct,
        max_halt_round: trace.max_halt_round().unwrap_or(trace.rounds()),
        max_msg_entries: trace.max_msg_entries(),
    }
}
