//! Checks of the unit-oit spreading conjecture ("some node reaches everyone
//! within `⌊n/2⌋` rounds") and a batch runner for the structural predicates
//! relating oit, iit, moi and ct.

use std::collections::HashSet;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamic_graph::{
    is_connected, save_dynamic_graph, Bound, DynamicGraph, Edge, EdgeSet, GraphError, NodeId,
};
use crate::generators::random_oit1_graph;
use crate::influence::{all_metrics, compute_oit, Flood, MetricResult};

/// Largest `n` accepted by exhaustive search.
pub const EXHAUSTIVE_MAX_N: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConjectureStatus {
    Holds,
    CounterexampleFound { t: usize, graph: DynamicGraph },
    NotApplicable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjectureVerdict {
    pub status: ConjectureStatus,
    /// Inclusive range of start times examined, if any.
    pub scanned: Option<(usize, usize)>,
    /// True when the schedule is explicit, so the verdict only covers the
    /// scanned start times rather than all of them.
    pub scoped: bool,
}

#[derive(Serialize)]
struct VerdictJson<'a> {
    status: &'static str,
    scanned: Option<[usize; 2]>,
    scoped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessJson>,
}

#[derive(Serialize)]
struct WitnessJson {
    t: usize,
    graph: serde_json::Value,
}

impl ConjectureVerdict {
    pub fn holds(&self) -> bool {
        self.status == ConjectureStatus::Holds
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (status, reason, witness) = match &self.status {
            ConjectureStatus::Holds => ("holds", None, None),
            ConjectureStatus::NotApplicable(r) => ("not_applicable", Some(r.as_str()), None),
            ConjectureStatus::CounterexampleFound { t, graph } => (
                "counterexample_found",
                None,
                Some(WitnessJson {
                    t: *t,
                    graph: serde_json::from_str(&save_dynamic_graph(graph))
                        .expect("saved schedules are valid JSON"),
                }),
            ),
        };
        serde_json::to_value(VerdictJson {
            status,
            scanned: self.scanned.map(|(a, b)| [a, b]),
            scoped: self.scoped,
            reason,
            witness,
        })
        .expect("verdict serialization cannot fail")
    }
}

/// Whether some node's `t`-state reaches every node by `t + ⌊n/2⌋`.
fn someone_spreads(g: &DynamicGraph, t: usize) -> bool {
    let n = g.n();
    let mut flood = Flood::new(n);
    for round in t + 1..=t + n / 2 {
        flood.step(g.instance(round).expect("round inside the scanned range"));
    }
    // Row w is past(w, t + ⌊n/2⌋)(t); u reaches everyone iff it is in every row.
    let mut common = flood.row(0).clone();
    for w in 1..n {
        common.intersect_with(flood.row(w));
    }
    !common.is_clear()
}

/// Checks the conjecture on every representative start time of `g`.
///
/// Not applicable unless the outgoing influence time is 1. Explicit
/// schedules are scanned over `0..=H - ⌊n/2⌋` and their verdicts are scoped
/// to that range.
pub fn check_conjecture1(g: &DynamicGraph) -> ConjectureVerdict {
    let n = g.n();
    let scoped = !g.is_periodic();
    let not_applicable = |reason: String| ConjectureVerdict {
        status: ConjectureStatus::NotApplicable(reason),
        scanned: None,
        scoped,
    };
    if compute_oit(g, 1).value != Bound::Finite(1) {
        let oit = compute_oit(g, 4 * n);
        return not_applicable(format!("oit is {} rather than 1", oit.value));
    }
    let last = match g.horizon() {
        Some(h) if h < n / 2 => {
            return not_applicable(format!("horizon {h} is shorter than ⌊n/2⌋ = {}", n / 2))
        }
        Some(h) => h - n / 2,
        None => g.representative_span() - 1,
    };
    for t in 0..=last {
        if !someone_spreads(g, t) {
            return ConjectureVerdict {
                status: ConjectureStatus::CounterexampleFound {
                    t,
                    graph: g.clone(),
                },
                scanned: Some((0, t)),
                scoped,
            };
        }
    }
    ConjectureVerdict {
        status: ConjectureStatus::Holds,
        scanned: Some((0, last)),
        scoped,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    Randomized { trials: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub n: usize,
    pub horizon: usize,
    pub mode: SearchMode,
    pub prune: bool,
}

/// A schedule with unit oit over its horizon that violates the conjecture,
/// and the first violating start time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub graph: DynamicGraph,
    pub t: usize,
}

/// Searches for a counterexample within `budget`.
///
/// Exhaustive mode walks every explicit schedule over the horizon in
/// lexicographic order of per-round edge masks and returns the first one
/// that keeps unit oit and violates the conjecture. With `prune` set, it
/// cuts prefixes that already break unit oit and remembers subtrees without
/// counterexamples; the answer is the same either way. Randomized mode
/// checks `trials` samples of [`random_oit1_graph`].
pub fn search_counterexample(budget: &SearchBudget) -> Result<Option<Counterexample>, GraphError> {
    if budget.horizon == 0 {
        return Err(GraphError::Argument("horizon must be at least 1".into()));
    }
    match budget.mode {
        SearchMode::Exhaustive => {
            if budget.n < 2 || budget.n > EXHAUSTIVE_MAX_N {
                return Err(GraphError::Argument(format!(
                    "exhaustive search supports 2 <= n <= {EXHAUSTIVE_MAX_N}, got n = {}",
                    budget.n
                )));
            }
            Ok(Exhaustive::new(budget.n, budget.horizon, budget.prune).run())
        }
        SearchMode::Randomized { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..trials {
                let g = random_oit1_graph(budget.n, budget.horizon, rng.next_u64())?;
                if let ConjectureStatus::CounterexampleFound { t, graph } =
                    check_conjecture1(&g).status
                {
                    return Ok(Some(Counterexample { graph, t }));
                }
            }
            Ok(None)
        }
    }
}

/// Future sets as bitmasks, one vector per unsaturated start time.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct MaskState {
    /// `(start, future mask per source node)`
    active: Vec<(usize, Vec<u32>)>,
}

struct Exhaustive {
    n: usize,
    horizon: usize,
    prune: bool,
    full: u32,
    /// `edges[i]` is the edge for mask bit `i`.
    edges: Vec<Edge>,
    /// `adjacency[mask][v]` is the neighbour mask of `v` in round `mask`.
    adjacency: Vec<Vec<u32>>,
    /// Masks that give every node an edge; others cannot keep unit oit.
    covers: Vec<usize>,
    /// `(remaining rounds, state relative to now)` without counterexamples.
    dead: HashSet<(usize, Vec<(usize, Vec<u32>)>)>,
    path: Vec<usize>,
}

impl Exhaustive {
    fn new(n: usize, horizon: usize, prune: bool) -> Self {
        let mut edges = Vec::new();
        for a in 1..=n as NodeId {
            for b in a + 1..=n as NodeId {
                edges.push(Edge::new(a, b).expect("distinct endpoints"));
            }
        }
        let masks = 1usize << edges.len();
        let adjacency: Vec<Vec<u32>> = (0..masks)
            .map(|mask| {
                let mut adj = vec![0u32; n];
                for (i, e) in edges.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        let (a, b) = (e.lo() as usize - 1, e.hi() as usize - 1);
                        adj[a] |= 1 << b;
                        adj[b] |= 1 << a;
                    }
                }
                adj
            })
            .collect();
        let covers = (0..masks)
            .filter(|&m| adjacency[m].iter().all(|&a| a != 0))
            .collect();
        Exhaustive {
            n,
            horizon,
            prune,
            full: (1u32 << n) - 1,
            edges,
            adjacency,
            covers,
            dead: HashSet::new(),
            path: Vec::new(),
        }
    }

    fn singletons(&self, start: usize) -> (usize, Vec<u32>) {
        (start, (0..self.n).map(|u| 1u32 << u).collect())
    }

    fn run(mut self) -> Option<Counterexample> {
        let state = MaskState {
            active: vec![self.singletons(0)],
        };
        let t = self.descend(state, true, None)?;
        let rounds = self
            .path
            .iter()
            .map(|&mask| {
                self.edges
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect::<EdgeSet>()
            })
            .collect();
        let graph = DynamicGraph::explicit(self.n, rounds).expect("valid enumerated schedule");
        Some(Counterexample { graph, t })
    }

    /// Applies round `mask` at time `now + 1`. Returns the next state and
    /// whether every unsaturated future set grew.
    fn apply(&self, state: &MaskState, mask: usize, now: usize) -> (MaskState, bool) {
        let adj = &self.adjacency[mask];
        let mut grew = true;
        let mut active = Vec::with_capacity(state.active.len() + 1);
        for (start, sets) in &state.active {
            let next: Vec<u32> = sets
                .iter()
                .map(|&s| {
                    let mut out = s;
                    let mut rest = s;
                    while rest != 0 {
                        let v = rest.trailing_zeros() as usize;
                        out |= adj[v];
                        rest &= rest - 1;
                    }
                    if out == s && s != self.full {
                        grew = false;
                    }
                    out
                })
                .collect();
            if next.iter().any(|&s| s != self.full) {
                active.push((*start, next));
            }
        }
        active.push(self.singletons(now + 1));
        (MaskState { active }, grew)
    }

    /// First start time that has just completed its `⌊n/2⌋` window with no
    /// node reaching everyone.
    fn violation(&self, state: &MaskState, now: usize) -> Option<usize> {
        let start = now.checked_sub(self.n / 2)?;
        let (_, sets) = state.active.iter().find(|(s, _)| *s == start)?;
        sets.iter().all(|&s| s != self.full).then_some(start)
    }

    fn memo_key(&self, state: &MaskState, now: usize) -> (usize, Vec<(usize, Vec<u32>)>) {
        let relative = state
            .active
            .iter()
            .map(|(s, sets)| (now - s, sets.clone()))
            .collect();
        (self.horizon - now, relative)
    }

    /// Depth-first search from time `now = path.len()`. `valid` says the
    /// prefix keeps unit oit; `found` is the first violating start so far.
    fn descend(&mut self, state: MaskState, valid: bool, found: Option<usize>) -> Option<usize> {
        let now = self.path.len();
        if now == self.horizon {
            return if valid { found } else { None };
        }
        let key = (self.prune && found.is_none()).then(|| self.memo_key(&state, now));
        if let Some(k) = &key {
            if self.dead.contains(k) {
                return None;
            }
        }
        let candidates: Vec<usize> = if self.prune {
            self.covers.clone()
        } else {
            (0..self.adjacency.len()).collect()
        };
        for mask in candidates {
            let (next, grew) = self.apply(&state, mask, now);
            let still_valid = valid && grew;
            if self.prune && !still_valid {
                continue;
            }
            let hit = found.or_else(|| self.violation(&next, now + 1));
            self.path.push(mask);
            if let Some(t) = self.descend(next, still_valid, hit) {
                return Some(t);
            }
            self.path.pop();
        }
        if let Some(k) = key {
            self.dead.insert(k);
        }
        None
    }
}

/// Outcome of one predicate in [`property_suite`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail(String),
    NotApplicable(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckItem {
    pub name: &'static str,
    #[serde(flatten)]
    pub status: CheckStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub items: Vec<CheckItem>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.items
            .iter()
            .all(|i| !matches!(i.status, CheckStatus::Fail(_)))
    }

    pub fn get(&self, name: &str) -> Option<&CheckStatus> {
        self.items
            .iter()
            .find(|i| i.name == name)
            .map(|i| &i.status)
    }
}

pub const WINDOW_EDGE_FLOOR: &str = "window_edge_floor";
pub const MOI_AT_LEAST_TWO: &str = "moi_at_least_two";
pub const WINDOW_CONNECTIVITY: &str = "window_connectivity";
pub const OIT_LE_CT: &str = "oit_le_ct";

/// Window start rounds whose length-`len` windows lie inside the schedule and
/// represent every window.
fn window_starts(g: &DynamicGraph, len: usize) -> std::ops::RangeInclusive<usize> {
    match g.horizon() {
        Some(h) => 1..=(h + 1).saturating_sub(len),
        None => 1..=g.representative_span(),
    }
}

fn influence_time(oit: &MetricResult, iit: &MetricResult) -> Option<usize> {
    [oit, iit].iter().filter_map(|m| m.finite()).min()
}

/// Evaluates the structural predicates that apply to `g`:
///
/// - `window_edge_floor`: with oit or iit `k`, every `k`-round window offers
///   at least `⌈n/2⌉` edges.
/// - `moi_at_least_two`: with `n >= 3` and oit 1, some future set gains two
///   nodes in one round. Explicit schedules need at least two rounds.
/// - `window_connectivity`: with exact oit or iit `k`, every window of
///   `k·⌊n/2⌋` rounds has a connected union.
/// - `oit_le_ct`: with both exact, oit does not exceed ct.
pub fn property_suite(g: &DynamicGraph, k_max: usize) -> Report {
    let n = g.n();
    let m = all_metrics(g, k_max);
    let mut items = Vec::new();

    let floor = n.div_ceil(2);
    items.push(CheckItem {
        name: WINDOW_EDGE_FLOOR,
        status: match influence_time(&m.oit, &m.iit) {
            None => CheckStatus::NotApplicable(format!("oit and iit exceed {k_max}")),
            Some(_) if n < 2 => CheckStatus::NotApplicable("single node".into()),
            Some(k) => window_starts(g, k)
                .find_map(|t| {
                    let u = g.window_union(t, k).ok()?;
                    (u.len() < floor).then(|| {
                        format!(
                            "rounds {t}..={} offer {} edges < {floor}",
                            t + k - 1,
                            u.len()
                        )
                    })
                })
                .map_or(CheckStatus::Pass, CheckStatus::Fail),
        },
    });

    items.push(CheckItem {
        name: MOI_AT_LEAST_TWO,
        status: if n < 3 {
            CheckStatus::NotApplicable("needs n >= 3".into())
        } else if m.oit.value != Bound::Finite(1) {
            CheckStatus::NotApplicable(format!("oit is {}", m.oit.value))
        } else if g.horizon().is_some_and(|h| h < 2) {
            CheckStatus::NotApplicable("needs at least two rounds".into())
        } else if m.moi.value >= Bound::Finite(2) {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail(format!("moi is {}", m.moi.value))
        },
    });

    let exact_k = [m.oit, m.iit]
        .iter()
        .filter(|r| r.exact)
        .filter_map(|r| r.finite())
        .min();
    items.push(CheckItem {
        name: WINDOW_CONNECTIVITY,
        status: match exact_k {
            None => CheckStatus::NotApplicable("no exact finite oit or iit".into()),
            Some(k) => {
                let len = k * (n / 2).max(1);
                window_starts(g, len)
                    .find_map(|t| {
                        let u = g.window_union(t, len).ok()?;
                        (!is_connected(n, u.as_slice())).then(|| {
                            format!("rounds {t}..={} have a disconnected union", t + len - 1)
                        })
                    })
                    .map_or(CheckStatus::Pass, CheckStatus::Fail)
            }
        },
    });

    items.push(CheckItem {
        name: OIT_LE_CT,
        status: if !(m.oit.exact && m.ct.exact) {
            CheckStatus::NotApplicable("oit or ct is not exact".into())
        } else if m.oit.value <= m.ct.value {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail(format!("oit {} exceeds ct {}", m.oit.value, m.ct.value))
        },
    });

    Report { items }
}
