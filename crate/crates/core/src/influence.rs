//! Causal influence over the time-expanded graph.
//!
//! `(u, t) -> (v, t + 1)` iff `u = v` or `{u, v}` is in `E(t + 1)`; the causal
//! order is its reflexive-transitive closure. Future and past sets always
//! contain their origin node.
//!
//! Metrics are evaluated over an envelope of start times. For (eventually)
//! periodic schedules the envelope is `0 .. prefix + period`, and each run
//! continues until every set equals `V` or the reachability matrix stays
//! unchanged for a whole period after the prefix, which is a fixed point.
//! Such results are exact. Explicit schedules are only known up to their
//! horizon, so their metrics are the smallest values consistent with every
//! in-horizon constraint (`exact = false`).

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::dynamic_graph::{Bound, DisjointSets, DynamicGraph, EdgeSet, GraphError, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TimeNode {
    pub node: NodeId,
    pub time: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Future,
    Past,
}

/// A causal past or future set.
///
/// For `Future`, each member maps to the earliest time it is influenced by the
/// origin. For `Past`, each member maps to its latest state time (not below the
/// queried lower bound) that influences the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachRecord {
    pub origin: TimeNode,
    pub direction: Direction,
    pub members: BTreeMap<NodeId, usize>,
}

impl ReachRecord {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.contains_key(&v)
    }

    pub fn nodes(&self) -> Vec<NodeId> {
        self.members.keys().copied().collect()
    }
}

fn check_node(g: &DynamicGraph, u: NodeId) -> Result<usize, GraphError> {
    if u == 0 || u as usize > g.n() {
        return Err(GraphError::Argument(format!(
            "node {u} outside 1..={}",
            g.n()
        )));
    }
    Ok(u as usize - 1)
}

fn check_times(g: &DynamicGraph, from: usize, to: usize) -> Result<(), GraphError> {
    if from > to {
        return Err(GraphError::Argument(format!(
            "time {from} is later than time {to}"
        )));
    }
    if let Some(h) = g.horizon() {
        if to > h {
            return Err(GraphError::RoundOutOfRange {
                round: to,
                horizon: h,
            });
        }
    }
    Ok(())
}

/// Nodes whose `t_prime`-state is influenced by `(u, t)`.
pub fn future_set(
    g: &DynamicGraph,
    u: NodeId,
    t: usize,
    t_prime: usize,
) -> Result<ReachRecord, GraphError> {
    let src = check_node(g, u)?;
    check_times(g, t, t_prime)?;
    let mut reached = FixedBitSet::with_capacity(g.n());
    reached.insert(src);
    let mut members = BTreeMap::from([(u, t)]);
    for round in t + 1..=t_prime {
        let before = reached.clone();
        for e in g.instance(round)?.iter() {
            let (a, b) = e.indices();
            if before.contains(a) && !reached.contains(b) {
                reached.insert(b);
                members.insert(b as NodeId + 1, round);
            } else if before.contains(b) && !reached.contains(a) {
                reached.insert(a);
                members.insert(a as NodeId + 1, round);
            }
        }
    }
    Ok(ReachRecord {
        origin: TimeNode { node: u, time: t },
        direction: Direction::Future,
        members,
    })
}

/// Nodes whose `t`-state influences `(u, t_prime)`.
pub fn past_set(
    g: &DynamicGraph,
    u: NodeId,
    t_prime: usize,
    t: usize,
) -> Result<ReachRecord, GraphError> {
    let dst = check_node(g, u)?;
    check_times(g, t, t_prime)?;
    let mut reached = FixedBitSet::with_capacity(g.n());
    reached.insert(dst);
    let mut members = BTreeMap::from([(u, t_prime)]);
    // Walk backwards: a node joins at the latest state time that still reaches
    // (u, t_prime).
    for round in (t + 1..=t_prime).rev() {
        let after = reached.clone();
        for e in g.instance(round)?.iter() {
            let (a, b) = e.indices();
            if after.contains(a) && !reached.contains(b) {
                reached.insert(b);
                members.insert(b as NodeId + 1, round - 1);
            } else if after.contains(b) && !reached.contains(a) {
                reached.insert(a);
                members.insert(a as NodeId + 1, round - 1);
            }
        }
    }
    Ok(ReachRecord {
        origin: TimeNode {
            node: u,
            time: t_prime,
        },
        direction: Direction::Past,
        members,
    })
}

/// Time-node attaining or violating a metric bound. For window metrics
/// (`ct`) `node` is `None` and `[t, t_prime]` is the offending window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub node: Option<NodeId>,
    pub t: usize,
    pub t_prime: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MetricResult {
    pub value: Bound,
    pub exact: bool,
    /// For a finite value `k > 1`: where `k - 1` fails. For `Unbounded`: a
    /// time-node that never satisfies the bound (exact) or exceeds the limit.
    pub witness: Option<Witness>,
}

impl MetricResult {
    pub fn finite(&self) -> Option<usize> {
        self.value.finite()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RunEnd {
    /// Every past (and future) set equals V.
    Saturated,
    /// Unchanged for a full period after the prefix: nothing grows again.
    Stuck,
    /// The explicit schedule ran out.
    Horizon,
}

/// Reachability sizes from one start time, recorded for every later time
/// until saturation, a fixed point, or the horizon.
struct Run {
    start: usize,
    n: usize,
    /// `future[i * n + u] = |future(u, start)(start + i)|`
    future: Vec<u32>,
    /// `past[i * n + u] = |past(u, start + i)(start)|`
    past: Vec<u32>,
    end: RunEnd,
}

impl Run {
    fn steps(&self) -> usize {
        self.future.len() / self.n
    }

    fn future_of(&self, u: usize) -> impl Iterator<Item = u32> + '_ {
        self.future.iter().skip(u).step_by(self.n).copied()
    }

    fn past_of(&self, u: usize) -> impl Iterator<Item = u32> + '_ {
        self.past.iter().skip(u).step_by(self.n).copied()
    }
}

/// Past sets of every node from a common start time, advanced round by round.
/// Row `w` holds `past(w, now)(start)`; column counts give the future sizes.
pub(crate) struct Flood {
    n: usize,
    rows: Vec<FixedBitSet>,
}

impl Flood {
    pub(crate) fn new(n: usize) -> Self {
        let rows = (0..n)
            .map(|w| {
                let mut s = FixedBitSet::with_capacity(n);
                s.insert(w);
                s
            })
            .collect();
        Flood { n, rows }
    }

    /// Applies one round; returns whether anything changed.
    pub(crate) fn step(&mut self, edges: &EdgeSet) -> bool {
        let before = self.rows.clone();
        let mut changed = false;
        for e in edges.iter() {
            let (a, b) = e.indices();
            if !before[b].is_subset(&self.rows[a]) {
                self.rows[a].union_with(&before[b]);
                changed = true;
            }
            if !before[a].is_subset(&self.rows[b]) {
                self.rows[b].union_with(&before[a]);
                changed = true;
            }
        }
        changed
    }

    pub(crate) fn row(&self, w: usize) -> &FixedBitSet {
        &self.rows[w]
    }

    fn saturated(&self) -> bool {
        self.rows.iter().all(|r| r.count_ones(..) == self.n)
    }

    fn record(&self, future: &mut Vec<u32>, past: &mut Vec<u32>) {
        let base = future.len();
        future.resize(base + self.n, 0);
        for r in &self.rows {
            past.push(r.count_ones(..) as u32);
            for u in r.ones() {
                future[base + u] += 1;
            }
        }
    }
}

fn run_from(g: &DynamicGraph, start: usize) -> Run {
    let n = g.n();
    let mut flood = Flood::new(n);
    let mut future = Vec::new();
    let mut past = Vec::new();
    flood.record(&mut future, &mut past);
    let q = g.prefix_len();
    let mut quiet = 0;
    let mut time = start;
    let end = loop {
        if flood.saturated() {
            break RunEnd::Saturated;
        }
        if g.horizon() == Some(time) {
            break RunEnd::Horizon;
        }
        if let Some(p) = g.period() {
            if quiet >= p {
                break RunEnd::Stuck;
            }
        }
        time += 1;
        let changed = flood.step(g.instance(time).expect("round inside the envelope"));
        quiet = if changed || time <= q { 0 } else { quiet + 1 };
        flood.record(&mut future, &mut past);
    };
    Run {
        start,
        n,
        future,
        past,
        end,
    }
}

/// Start times whose runs represent every start time.
fn envelope_starts(g: &DynamicGraph) -> std::ops::Range<usize> {
    match g.horizon() {
        Some(h) => 0..h + 1,
        None => 0..g.representative_span(),
    }
}

fn sweep(g: &DynamicGraph) -> Vec<Run> {
    envelope_starts(g).map(|s| run_from(g, s)).collect()
}

/// Longest stretch a size sequence stays on a non-full value.
enum Need {
    Finite { k: usize, at: usize },
    Infinite { at: usize },
}

fn plateau_need(sizes: impl Iterator<Item = u32>, n: usize, end: RunEnd) -> Need {
    let mut need = 0;
    let mut need_at = 0;
    let mut plateau_start = 0;
    let mut plateau_value = 0;
    let mut last = 0;
    for (i, s) in sizes.enumerate() {
        if i == 0 {
            plateau_value = s;
        } else if s != plateau_value {
            if (plateau_value as usize) < n && i - plateau_start > need {
                need = i - plateau_start;
                need_at = plateau_start;
            }
            plateau_start = i;
            plateau_value = s;
        }
        last = i;
    }
    if (plateau_value as usize) < n {
        match end {
            RunEnd::Stuck => return Need::Infinite { at: plateau_start },
            RunEnd::Horizon => {
                let k = last - plateau_start + 1;
                if k > need {
                    need = k;
                    need_at = plateau_start;
                }
            }
            RunEnd::Saturated => unreachable!("saturated runs end on full sets"),
        }
    }
    Need::Finite {
        k: need,
        at: need_at,
    }
}

fn plateau_metric(g: &DynamicGraph, runs: &[Run], k_max: usize, past: bool) -> MetricResult {
    let n = g.n();
    let mut best = 0;
    let mut witness = None;
    for run in runs {
        for u in 0..n {
            let need = if past {
                plateau_need(run.past_of(u), n, run.end)
            } else {
                plateau_need(run.future_of(u), n, run.end)
            };
            let node = Some(u as NodeId + 1);
            match need {
                Need::Infinite { at } => {
                    return MetricResult {
                        value: Bound::Unbounded,
                        exact: true,
                        witness: Some(Witness {
                            node,
                            t: run.start,
                            t_prime: run.start + at,
                        }),
                    }
                }
                Need::Finite { k, at } if k > best => {
                    best = k;
                    witness = Some(Witness {
                        node,
                        t: run.start,
                        t_prime: run.start + at,
                    });
                }
                Need::Finite { .. } => {}
            }
        }
    }
    let value = best.max(1);
    if value > k_max.max(1) {
        return MetricResult {
            value: Bound::Unbounded,
            exact: false,
            witness,
        };
    }
    MetricResult {
        value: Bound::Finite(value),
        exact: g.is_periodic(),
        witness: if best > 1 { witness } else { None },
    }
}

/// Outgoing influence time: the least `k` with
/// `|future(u,t)(t'+k)| >= min(|future(u,t)(t')| + 1, n)` for all `u, t <= t'`.
pub fn compute_oit(g: &DynamicGraph, k_max: usize) -> MetricResult {
    plateau_metric(g, &sweep(g), k_max, false)
}

/// Incoming influence time, the past-set analogue of [`compute_oit`].
pub fn compute_iit(g: &DynamicGraph, k_max: usize) -> MetricResult {
    plateau_metric(g, &sweep(g), k_max, true)
}

fn moi_from_runs(g: &DynamicGraph, runs: &[Run]) -> MetricResult {
    let n = g.n();
    let mut best = 0;
    let mut witness = None;
    for run in runs {
        for u in 0..n {
            let sizes: Vec<u32> = run.future_of(u).collect();
            for (i, w) in sizes.windows(2).enumerate() {
                let jump = (w[1] - w[0]) as usize;
                if jump > best {
                    best = jump;
                    witness = Some(Witness {
                        node: Some(u as NodeId + 1),
                        t: run.start,
                        t_prime: run.start + i,
                    });
                }
            }
        }
    }
    MetricResult {
        value: Bound::Finite(best),
        exact: g.is_periodic(),
        witness,
    }
}

/// Maximum outgoing influence: the largest one-round growth of any future set.
pub fn compute_moi(g: &DynamicGraph) -> MetricResult {
    moi_from_runs(g, &sweep(g))
}

fn diameter_from_runs(g: &DynamicGraph, runs: &[Run], d_max: usize) -> MetricResult {
    let n = g.n();
    let mut best = 0;
    let mut witness = None;
    for run in runs {
        let steps = run.steps();
        for u in 0..n {
            let full_at = run.future_of(u).position(|s| s as usize == n);
            let d = match (full_at, run.end) {
                (Some(i), _) => i,
                (None, RunEnd::Stuck) => {
                    return MetricResult {
                        value: Bound::Unbounded,
                        exact: true,
                        witness: Some(Witness {
                            node: Some(u as NodeId + 1),
                            t: run.start,
                            t_prime: run.start + steps - 1,
                        }),
                    }
                }
                (None, _) => steps,
            };
            if d > best {
                best = d;
                witness = Some(Witness {
                    node: Some(u as NodeId + 1),
                    t: run.start,
                    t_prime: run.start + d - 1,
                });
            }
        }
    }
    let value = best.max(1);
    if value > d_max.max(1) {
        return MetricResult {
            value: Bound::Unbounded,
            exact: false,
            witness,
        };
    }
    MetricResult {
        value: Bound::Finite(value),
        exact: g.is_periodic(),
        witness: if best > 1 { witness } else { None },
    }
}

/// Least `d` with `(u, t) ~> (v, t + d)` for all `u, v, t`.
pub fn dynamic_diameter(g: &DynamicGraph, d_max: usize) -> MetricResult {
    diameter_from_runs(g, &sweep(g), d_max)
}

/// Connectivity time: the least `k` such that every window of `k`
/// consecutive rounds has a connected union.
pub fn compute_ct(g: &DynamicGraph, k_max: usize) -> MetricResult {
    let n = g.n();
    let q = g.prefix_len();
    let last_start = g.representative_span();
    let mut best = 0;
    let mut witness = None;
    for t in 1..=last_start {
        let mut dsu = DisjointSets::new(n);
        let mut components = n;
        let mut len = 0;
        // Every edge that ever appears from t on shows up by this round.
        let last_round = match (g.horizon(), g.period()) {
            (Some(h), _) => h,
            (None, Some(p)) => t.max(q + 1) + p - 1,
            (None, None) => unreachable!(),
        };
        while components > 1 && t + len <= last_round {
            for e in g.instance(t + len).expect("round in range").iter() {
                let (a, b) = e.indices();
                if dsu.union(a, b) {
                    components -= 1;
                }
            }
            len += 1;
        }
        let needed = if components == 1 {
            len.max(1)
        } else if g.is_periodic() {
            return MetricResult {
                value: Bound::Unbounded,
                exact: true,
                witness: Some(Witness {
                    node: None,
                    t,
                    t_prime: last_round,
                }),
            };
        } else {
            // No in-horizon window from t connects, so lengths up to the
            // remaining horizon are all violated.
            len + 1
        };
        if needed > best {
            best = needed;
            witness = Some(Witness {
                node: None,
                t,
                t_prime: t + needed - 2,
            });
        }
    }
    let value = best.max(1);
    if value > k_max.max(1) {
        return MetricResult {
            value: Bound::Unbounded,
            exact: false,
            witness,
        };
    }
    MetricResult {
        value: Bound::Finite(value),
        exact: g.is_periodic(),
        witness: if best > 1 { witness } else { None },
    }
}

/// All metrics of one graph from a single sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Metrics {
    pub oit: MetricResult,
    pub iit: MetricResult,
    pub moi: MetricResult,
    pub ct: MetricResult,
    pub edge_period: MetricResult,
    pub dynamic_diameter: MetricResult,
}

impl MetricResult {
    /// `{"value": <int> | "unbounded", "exact": bool, "witness": {...} | null}`
    pub fn to_json(&self) -> serde_json::Value {
        let value = match self.value {
            Bound::Finite(v) => serde_json::json!(v),
            Bound::Unbounded => serde_json::json!("unbounded"),
        };
        serde_json::json!({
            "value": value,
            "exact": self.exact,
            "witness": self.witness,
        })
    }
}

impl Metrics {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "oit": self.oit.to_json(),
            "iit": self.iit.to_json(),
            "moi": self.moi.to_json(),
            "ct": self.ct.to_json(),
            "edge_period": self.edge_period.to_json(),
            "dynamic_diameter": self.dynamic_diameter.to_json(),
        })
    }
}

pub fn all_metrics(g: &DynamicGraph, k_max: usize) -> Metrics {
    let runs = sweep(g);
    let period = g.edge_period(k_max);
    Metrics {
        oit: plateau_metric(g, &runs, k_max, false),
        iit: plateau_metric(g, &runs, k_max, true),
        moi: moi_from_runs(g, &runs),
        ct: compute_ct(g, k_max),
        edge_period: MetricResult {
            value: period.value,
            exact: period.exact,
            witness: period.witness.map(|(t, p)| Witness {
                node: None,
                t,
                t_prime: t + p,
            }),
        },
        dynamic_diameter: diameter_from_runs(g, &runs, k_max),
    }
}

/// Incremental check that a schedule built round by round keeps outgoing
/// influence time 1: every future set that is not yet `V` must grow in every
/// round. Tracks the future sets of all start times that are not saturated.
#[derive(Clone, Debug)]
pub struct Oit1Tracker {
    n: usize,
    time: usize,
    /// `(start, future sets indexed by source node)`
    active: Vec<(usize, Vec<FixedBitSet>)>,
}

impl Oit1Tracker {
    pub fn new(n: usize) -> Self {
        Oit1Tracker {
            n,
            time: 0,
            active: vec![(0, singletons(n))],
        }
    }

    /// Current time (number of rounds applied).
    pub fn time(&self) -> usize {
        self.time
    }

    /// Unsaturated start times with their future sets, oldest first.
    pub fn active(&self) -> &[(usize, Vec<FixedBitSet>)] {
        &self.active
    }

    /// A non-full future set that `edges` would fail to grow, if any.
    pub fn first_stalled(&self, edges: &EdgeSet) -> Option<&FixedBitSet> {
        self.active
            .iter()
            .flat_map(|(_, sets)| sets.iter())
            .find(|set| set.count_ones(..) < self.n && !crosses(set, edges))
    }

    /// Whether `edges` would grow every non-full tracked future set.
    pub fn accepts(&self, edges: &EdgeSet) -> bool {
        self.first_stalled(edges).is_none()
    }

    /// Applies `edges` as the next round and opens a new start time.
    pub fn advance(&mut self, edges: &EdgeSet) {
        let n = self.n;
        for (_, sets) in &mut self.active {
            for set in sets.iter_mut() {
                let before = set.clone();
                for e in edges.iter() {
                    let (a, b) = e.indices();
                    if before.contains(a) {
                        set.insert(b);
                    }
                    if before.contains(b) {
                        set.insert(a);
                    }
                }
            }
        }
        self.active
            .retain(|(_, sets)| sets.iter().any(|s| s.count_ones(..) < n));
        self.time += 1;
        self.active.push((self.time, singletons(n)));
    }
}

fn singletons(n: usize) -> Vec<FixedBitSet> {
    (0..n)
        .map(|u| {
            let mut s = FixedBitSet::with_capacity(n);
            s.insert(u);
            s
        })
        .collect()
}

fn crosses(set: &FixedBitSet, edges: &EdgeSet) -> bool {
    edges.iter().any(|e| {
        let (a, b) = e.indices();
        set.contains(a) != set.contains(b)
    })
}
