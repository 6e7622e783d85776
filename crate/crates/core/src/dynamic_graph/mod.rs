//! Time-varying graphs over a static node set.
//!
//! Rounds are 1-based: `E(1)` is the first edge set a node state at time 0
//! can use. Node ids are 1-based on every public surface; bitsets used by the
//! reachability code index nodes from 0.

mod json;

use std::fmt;

use thiserror::Error;

pub use json::{load_dynamic_graph, save_dynamic_graph};

/// External node label, `1..=n`.
pub type NodeId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("round {round} is outside the schedule horizon 1..={horizon}")]
    RoundOutOfRange { round: usize, horizon: usize },
    #[error("edge rounds are 1-based; round 0 has no edge set")]
    ZeroRound,
    #[error("round {round}: invalid edge [{u}, {v}]: {reason}")]
    InvalidEdge {
        round: usize,
        u: i64,
        v: i64,
        reason: &'static str,
    },
    #[error("invalid schedule: {0}")]
    Schema(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("malformed schedule JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// An undirected edge with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    lo: NodeId,
    hi: NodeId,
}

impl Edge {
    /// Returns `None` for self-loops.
    pub fn new(a: NodeId, b: NodeId) -> Option<Edge> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Edge { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Some(Edge { lo: b, hi: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn lo(self) -> NodeId {
        self.lo
    }

    pub fn hi(self) -> NodeId {
        self.hi
    }

    pub fn endpoints(self) -> (NodeId, NodeId) {
        (self.lo, self.hi)
    }

    /// The endpoint opposite to `u`, if `u` is an endpoint.
    pub fn other(self, u: NodeId) -> Option<NodeId> {
        if u == self.lo {
            Some(self.hi)
        } else if u == self.hi {
            Some(self.lo)
        } else {
            None
        }
    }

    pub(crate) fn indices(self) -> (usize, usize) {
        (self.lo as usize - 1, self.hi as usize - 1)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

/// A canonical (sorted, deduplicated) set of edges.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EdgeSet(Vec<Edge>);

impl EdgeSet {
    pub fn new() -> EdgeSet {
        EdgeSet(Vec::new())
    }

    /// Builds a canonical set from arbitrary edges.
    pub fn from_edges<I: IntoIterator<Item = Edge>>(edges: I) -> EdgeSet {
        let mut v: Vec<Edge> = edges.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        EdgeSet(v)
    }

    /// Builds a set from node pairs, panicking on self-loops. Intended for
    /// constructors whose pairs are correct by construction.
    pub fn from_pairs<I: IntoIterator<Item = (NodeId, NodeId)>>(pairs: I) -> EdgeSet {
        EdgeSet::from_edges(
            pairs
                .into_iter()
                .map(|(a, b)| Edge::new(a, b).expect("self-loop in constructed edge set")),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Edge] {
        &self.0
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet::from_edges(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet(self.iter().filter(|e| other.contains(*e)).collect())
    }

    pub fn insert(&mut self, e: Edge) -> bool {
        match self.0.binary_search(&e) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, e);
                true
            }
        }
    }

    /// Neighbours of `u` within this edge set, ascending.
    pub fn neighbors(&self, u: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self.iter().filter_map(|e| e.other(u)).collect();
        out.sort_unstable();
        out
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.iter().filter(|e| e.other(u).is_some()).count()
    }

    /// True when every node of `1..=n` has exactly one incident edge.
    pub fn is_perfect_matching(&self, n: usize) -> bool {
        let mut deg = vec![0u32; n];
        for e in self.iter() {
            let (a, b) = e.indices();
            deg[a] += 1;
            deg[b] += 1;
        }
        deg.iter().all(|&d| d == 1)
    }
}

impl FromIterator<Edge> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        EdgeSet::from_edges(iter)
    }
}

/// Whether the static graph `(1..=n, edges)` is connected.
pub fn is_connected<'a, I: IntoIterator<Item = &'a Edge>>(n: usize, edges: I) -> bool {
    if n <= 1 {
        return true;
    }
    let mut dsu = DisjointSets::new(n);
    let mut components = n;
    for e in edges {
        let (a, b) = e.indices();
        if dsu.union(a, b) {
            components -= 1;
            if components == 1 {
                return true;
            }
        }
    }
    components == 1
}

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// How the stored rounds extend to all of time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    /// Only rounds `1..=horizon` exist.
    Explicit,
    /// Stored rounds repeat forever.
    Periodic,
    /// The first `prefix` stored rounds occur once; the rest repeat forever.
    EventuallyPeriodic { prefix: usize },
}

/// A dynamic graph: `n` nodes and a round-indexed edge schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicGraph {
    n: usize,
    kind: ScheduleKind,
    rounds: Vec<EdgeSet>,
}

impl DynamicGraph {
    fn build(n: usize, kind: ScheduleKind, rounds: Vec<EdgeSet>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Argument("node count must be at least 1".into()));
        }
        if n > NodeId::MAX as usize {
            return Err(GraphError::Argument(format!("node count {n} is too large")));
        }
        let cycle = match kind {
            ScheduleKind::EventuallyPeriodic { prefix } => {
                if prefix > rounds.len() {
                    return Err(GraphError::Schema(format!(
                        "prefix {prefix} exceeds the {} stored rounds",
                        rounds.len()
                    )));
                }
                rounds.len() - prefix
            }
            _ => rounds.len(),
        };
        if cycle == 0 {
            return Err(GraphError::Schema(
                "a schedule needs at least one (periodic) round".into(),
            ));
        }
        for (i, set) in rounds.iter().enumerate() {
            for e in set.iter() {
                if e.hi() as usize > n {
                    return Err(GraphError::InvalidEdge {
                        round: i + 1,
                        u: e.lo() as i64,
                        v: e.hi() as i64,
                        reason: "endpoint exceeds node count",
                    });
                }
            }
        }
        Ok(DynamicGraph { n, kind, rounds })
    }

    /// Rounds `1..=rounds.len()` and nothing after.
    pub fn explicit(n: usize, rounds: Vec<EdgeSet>) -> Result<Self, GraphError> {
        Self::build(n, ScheduleKind::Explicit, rounds)
    }

    /// `E(t) = rounds[(t - 1) mod p]`.
    pub fn periodic(n: usize, rounds: Vec<EdgeSet>) -> Result<Self, GraphError> {
        Self::build(n, ScheduleKind::Periodic, rounds)
    }

    /// `prefix` one-off rounds followed by `cycle` repeated forever.
    pub fn eventually_periodic(
        n: usize,
        prefix: Vec<EdgeSet>,
        cycle: Vec<EdgeSet>,
    ) -> Result<Self, GraphError> {
        let q = prefix.len();
        let mut rounds = prefix;
        rounds.extend(cycle);
        Self::build(n, ScheduleKind::EventuallyPeriodic { prefix: q }, rounds)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// The stored rounds, prefix first.
    pub fn stored_rounds(&self) -> &[EdgeSet] {
        &self.rounds
    }

    /// Explicit schedules end at their horizon.
    pub fn horizon(&self) -> Option<usize> {
        match self.kind {
            ScheduleKind::Explicit => Some(self.rounds.len()),
            _ => None,
        }
    }

    /// Length of the non-repeating prefix (0 unless eventually periodic).
    pub fn prefix_len(&self) -> usize {
        match self.kind {
            ScheduleKind::EventuallyPeriodic { prefix } => prefix,
            _ => 0,
        }
    }

    /// Length of the repeating cycle, `None` for explicit schedules.
    pub fn period(&self) -> Option<usize> {
        match self.kind {
            ScheduleKind::Explicit => None,
            ScheduleKind::Periodic => Some(self.rounds.len()),
            ScheduleKind::EventuallyPeriodic { prefix } => Some(self.rounds.len() - prefix),
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.horizon().is_none()
    }

    /// Number of start positions that represent every start position:
    /// `prefix + period` for (eventually) periodic schedules, the horizon
    /// for explicit ones.
    pub fn representative_span(&self) -> usize {
        self.rounds.len()
    }

    /// Whether round `t` has a defined edge set.
    pub fn has_round(&self, t: usize) -> bool {
        t >= 1 && self.horizon().is_none_or(|h| t <= h)
    }

    /// The instantaneous edge set `E(t)`.
    pub fn instance(&self, t: usize) -> Result<&EdgeSet, GraphError> {
        if t == 0 {
            return Err(GraphError::ZeroRound);
        }
        let idx = match self.kind {
            ScheduleKind::Explicit => {
                if t > self.rounds.len() {
                    return Err(GraphError::RoundOutOfRange {
                        round: t,
                        horizon: self.rounds.len(),
                    });
                }
                t - 1
            }
            ScheduleKind::Periodic => (t - 1) % self.rounds.len(),
            ScheduleKind::EventuallyPeriodic { prefix } => {
                if t <= prefix {
                    t - 1
                } else {
                    prefix + (t - 1 - prefix) % (self.rounds.len() - prefix)
                }
            }
        };
        Ok(&self.rounds[idx])
    }

    /// Union of `E(i)` for `i` in `t..t+len`.
    pub fn window_union(&self, t: usize, len: usize) -> Result<EdgeSet, GraphError> {
        if len == 0 {
            return Err(GraphError::Argument(
                "window length must be positive".into(),
            ));
        }
        let mut edges = Vec::new();
        for i in t..t + len {
            edges.extend(self.instance(i)?.iter());
        }
        Ok(EdgeSet::from_edges(edges))
    }

    /// Intersection of `E(i)` for `i` in `t..t+len`.
    pub fn window_intersection(&self, t: usize, len: usize) -> Result<EdgeSet, GraphError> {
        if len == 0 {
            return Err(GraphError::Argument(
                "window length must be positive".into(),
            ));
        }
        let mut acc = self.instance(t)?.clone();
        for i in t + 1..t + len {
            acc = acc.intersection(self.instance(i)?);
        }
        Ok(acc)
    }

    /// Minimum `p <= search_bound` with some edge in `E(t) ∩ E(t + p)`.
    pub fn edge_period(&self, search_bound: usize) -> PeriodResult {
        let span = self.rounds.len();
        // Explicit: both rounds must exist. Periodic: starts in one prefix+period
        // and gaps up to prefix+period cover every residue.
        let (max_start, max_gap, complete_gap) = match self.horizon() {
            Some(h) => (h, search_bound.min(h.saturating_sub(1)), false),
            None => (span, search_bound.min(span), search_bound >= span),
        };
        for p in 1..=max_gap {
            for t in 1..=max_start {
                if self.horizon().is_some_and(|h| t + p > h) {
                    break;
                }
                let a = self.instance(t).expect("start round in range");
                let b = self.instance(t + p).expect("gap round in range");
                if a.iter().any(|e| b.contains(e)) {
                    return PeriodResult {
                        value: Bound::Finite(p),
                        exact: self.is_periodic(),
                        witness: Some((t, p)),
                    };
                }
            }
        }
        PeriodResult {
            value: Bound::Unbounded,
            exact: self.is_periodic() && complete_gap,
            witness: None,
        }
    }

    /// T-interval connectivity over start rounds `1..=scan`, capped at the
    /// exhaustive range for periodic schedules and at the last full window
    /// for explicit ones.
    pub fn is_interval_connected(&self, window: usize, scan: usize) -> Result<bool, GraphError> {
        if window == 0 || scan == 0 {
            return Err(GraphError::Argument(
                "window and scan must both be positive".into(),
            ));
        }
        let last = match self.horizon() {
            Some(h) => {
                if window > h {
                    return Err(GraphError::RoundOutOfRange {
                        round: window,
                        horizon: h,
                    });
                }
                scan.min(h + 1 - window)
            }
            None => scan.min(self.rounds.len()),
        };
        for r in 1..=last {
            if !is_connected(self.n, self.window_intersection(r, window)?.as_slice()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Groups every `window` consecutive rounds into one: `E'(t)` is the union
    /// of `E((t-1)·window + 1 ..= t·window)`.
    pub fn interval_compress(&self, window: usize) -> Result<Compressed, GraphError> {
        if window == 0 {
            return Err(GraphError::Argument("window must be positive".into()));
        }
        if window == 1 {
            return Ok(Compressed {
                graph: self.clone(),
                truncated_rounds: 0,
            });
        }
        let block = |t: usize| self.window_union((t - 1) * window + 1, window);
        match self.kind {
            ScheduleKind::Explicit => {
                let h = self.rounds.len();
                let blocks = h / window;
                if blocks == 0 {
                    return Err(GraphError::Argument(format!(
                        "window {window} exceeds the horizon {h}"
                    )));
                }
                let rounds = (1..=blocks).map(block).collect::<Result<Vec<_>, _>>()?;
                Ok(Compressed {
                    graph: DynamicGraph::explicit(self.n, rounds)?,
                    truncated_rounds: h - blocks * window,
                })
            }
            _ => {
                let q = self.prefix_len();
                let p = self.period().expect("periodic schedule");
                let new_prefix = q.div_ceil(window);
                let new_period = lcm(p, window) / window;
                let rounds = (1..=new_prefix + new_period)
                    .map(block)
                    .collect::<Result<Vec<_>, _>>()?;
                let graph = if new_prefix == 0 {
                    DynamicGraph::periodic(self.n, rounds)?
                } else {
                    let mut rounds = rounds;
                    let cycle = rounds.split_off(new_prefix);
                    DynamicGraph::eventually_periodic(self.n, rounds, cycle)?
                };
                Ok(Compressed {
                    graph,
                    truncated_rounds: 0,
                })
            }
        }
    }
}

/// Result of [`DynamicGraph::interval_compress`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compressed {
    pub graph: DynamicGraph,
    /// Trailing explicit rounds dropped because they did not fill a window.
    pub truncated_rounds: usize,
}

/// A positive integer or "no finite value found".
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Finite(usize),
    Unbounded,
}

impl Bound {
    pub fn finite(self) -> Option<usize> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Unbounded => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodResult {
    pub value: Bound,
    pub exact: bool,
    /// `(t, p)` with a shared edge in `E(t)` and `E(t + p)`.
    pub witness: Option<(usize, usize)>,
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
