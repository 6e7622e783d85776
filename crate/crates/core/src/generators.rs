//! Constructors for the dynamic graph families used throughout the crate.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamic_graph::{DynamicGraph, Edge, EdgeSet, GraphError, NodeId};
use crate::influence::Oit1Tracker;

fn argument(msg: String) -> GraphError {
    GraphError::Argument(msg)
}

fn require_even(n: usize, family: &str) -> Result<(), GraphError> {
    if n < 4 || n % 2 != 0 {
        return Err(argument(format!("{family} needs an even n >= 4, got {n}")));
    }
    Ok(())
}

/// Rotating 1-factorization of `K_n`: `u_n` sits at the centre of a regular
/// `(n-1)`-gon; round `t` joins the centre to polygon vertex `m(0)` and pairs
/// `m(-i)` with `m(i)`, where `m(j) = ((t - 1 + j) mod (n - 1)) + 1`.
///
/// Every round is a perfect matching, the period is `n - 1`, and each edge
/// recurs exactly every `n - 1` rounds.
pub fn soifer(n: usize) -> Result<DynamicGraph, GraphError> {
    require_even(n, "soifer")?;
    let p = (n - 1) as i64;
    let rounds = (1..n)
        .map(|t| {
            let m = |j: i64| ((t as i64 - 1 + j).rem_euclid(p) + 1) as NodeId;
            let mut pairs = vec![(n as NodeId, m(0))];
            pairs.extend((1..n as i64 / 2).map(|i| (m(-i), m(i))));
            EdgeSet::from_pairs(pairs)
        })
        .collect();
    DynamicGraph::periodic(n, rounds)
}

/// The unique neighbour of polygon vertex `u_k` in round `t` of [`soifer`],
/// derived from its round-1 partner by the "two steps clockwise" recurrence
/// rather than read off the edge sets. Rounds are reduced modulo `n - 1`.
pub fn soifer_neighbor(n: usize, k: NodeId, t: usize) -> Result<NodeId, GraphError> {
    require_even(n, "soifer")?;
    let nn = n as NodeId;
    if k == nn {
        return Err(argument(
            "the centre u_n has no closed-form neighbour; inspect the instance".into(),
        ));
    }
    if k == 0 || k > nn {
        return Err(argument(format!("node {k} outside 1..={n}")));
    }
    if t == 0 {
        return Err(GraphError::ZeroRound);
    }
    let p = nn - 1;
    let wrap = |x: i64| (x.rem_euclid(p as i64) + 1) as NodeId;
    let t = (t - 1) % (n - 1) + 1;
    // Round 1 pairs u_1 with the centre and u_k with u_{n+1-k}.
    let mut cur = if k == 1 { nn } else { nn + 1 - k };
    let before_centre = wrap(k as i64 - 3);
    for _ in 1..t {
        cur = if cur == before_centre {
            nn
        } else if cur == nn {
            wrap(k as i64 + 1)
        } else {
            wrap(cur as i64 + 1)
        };
    }
    Ok(cur)
}

/// Ring `u_1 .. u_n` whose edges split into matchings `A = {2i-1, 2i}` on odd
/// rounds and `B = {2i, 2i+1}` (indices mod n) on even rounds.
pub fn alternating_matchings_ring(n: usize) -> Result<DynamicGraph, GraphError> {
    require_even(n, "alternating ring")?;
    DynamicGraph::periodic(n, ring_matchings(0, n).to_vec())
}

fn ring_matchings(offset: NodeId, size: usize) -> [EdgeSet; 2] {
    let s = size as NodeId;
    let a = (1..=s / 2).map(|i| (offset + 2 * i - 1, offset + 2 * i));
    let b = (1..=s / 2).map(|i| (offset + 2 * i, offset + (2 * i) % s + 1));
    [EdgeSet::from_pairs(a), EdgeSet::from_pairs(b)]
}

/// A graph whose outgoing influence time is `k` but whose incoming influence
/// time grows linearly in `n`. Round `k` offers the shortcuts `{u_2, u_i}` for
/// `i` in `3..n` plus `{u_1,u_2}` and `{u_{n-1},u_n}`; every later multiple of
/// `k` offers the path `u_1 - u_2 - ... - u_n`; all other rounds are empty.
pub fn oit_iit_gap_graph(n: usize, k: usize) -> Result<DynamicGraph, GraphError> {
    if n < 5 || k == 0 {
        return Err(argument(format!(
            "oit/iit gap graph needs n >= 5 and k >= 1, got n={n}, k={k}"
        )));
    }
    let nn = n as NodeId;
    let mut special = vec![(1, 2), (nn - 1, nn)];
    special.extend((3..nn).map(|i| (2, i)));
    let path = EdgeSet::from_pairs((1..nn).map(|i| (i, i + 1)));

    let mut prefix = vec![EdgeSet::new(); k];
    prefix[k - 1] = EdgeSet::from_pairs(special);
    let mut cycle = vec![EdgeSet::new(); k];
    cycle[k - 1] = path;
    DynamicGraph::eventually_periodic(n, prefix, cycle)
}

/// Two alternating-matching rings on `u_1..u_{n/2}` and `u_{n/2+1}..u_n`,
/// kept apart for `n/4` rounds (the explicit horizon).
pub fn split_halves_graph(n: usize) -> Result<DynamicGraph, GraphError> {
    if n < 4 || n % 4 != 0 {
        return Err(argument(format!(
            "split halves needs n divisible by 4, got {n}"
        )));
    }
    let half = n / 2;
    let left = ring_matchings(0, half);
    let right = ring_matchings(half as NodeId, half);
    let rounds = (0..n / 4)
        .map(|r| left[r % 2].union(&right[r % 2]))
        .collect();
    DynamicGraph::explicit(n, rounds)
}

/// Static shapes accepted by [`static_graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StaticShape {
    Complete,
    Path,
    Cycle,
    Star,
    Empty,
}

pub fn static_edges(shape: StaticShape, n: usize) -> EdgeSet {
    let nn = n as NodeId;
    match shape {
        StaticShape::Complete => {
            EdgeSet::from_pairs((1..=nn).flat_map(|a| (a + 1..=nn).map(move |b| (a, b))))
        }
        StaticShape::Path => EdgeSet::from_pairs((1..nn).map(|i| (i, i + 1))),
        StaticShape::Cycle if n >= 3 => EdgeSet::from_pairs((1..=nn).map(|i| (i, i % nn + 1))),
        StaticShape::Cycle => EdgeSet::from_pairs((1..nn).map(|i| (i, i + 1))),
        StaticShape::Star => EdgeSet::from_pairs((2..=nn).map(|i| (1, i))),
        StaticShape::Empty => EdgeSet::new(),
    }
}

/// The dynamic graph that offers the same edge set every round.
pub fn from_static(n: usize, edges: EdgeSet) -> Result<DynamicGraph, GraphError> {
    DynamicGraph::periodic(n, vec![edges])
}

pub fn static_graph(shape: StaticShape, n: usize) -> Result<DynamicGraph, GraphError> {
    from_static(n, static_edges(shape, n))
}

/// Samples an explicit schedule whose outgoing influence time is 1 over the
/// whole horizon: every future set that is not yet `V` grows in every round.
///
/// Each round starts from a random (near-)perfect matching plus a few random
/// edges, then repairs every future set the round fails to grow by adding a
/// random edge across its cut. Deterministic in `seed`.
pub fn random_oit1_graph(n: usize, horizon: usize, seed: u64) -> Result<DynamicGraph, GraphError> {
    if n < 3 {
        return Err(argument(format!(
            "random oit-1 graphs need n >= 3, got {n}"
        )));
    }
    if horizon == 0 {
        return Err(argument("horizon must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracker = Oit1Tracker::new(n);
    let mut nodes: Vec<NodeId> = (1..=n as NodeId).collect();
    let repair_budget = n * (n - 1) / 2;
    let mut rounds = Vec::with_capacity(horizon);

    for round in 1..=horizon {
        nodes.shuffle(&mut rng);
        let mut edges: EdgeSet = nodes
            .chunks_exact(2)
            .map(|p| Edge::new(p[0], p[1]).expect("distinct nodes"))
            .collect();
        for _ in 0..rng.gen_range(0..=n / 2) {
            let a = rng.gen_range(1..=n as NodeId);
            let b = rng.gen_range(1..=n as NodeId);
            if let Some(e) = Edge::new(a, b) {
                edges.insert(e);
            }
        }

        let mut repairs = 0;
        while let Some(set) = tracker.first_stalled(&edges) {
            if repairs == repair_budget {
                return Err(GraphError::Schema(format!(
                    "random oit-1 sampler exhausted its repair budget in round {round}"
                )));
            }
            let inside: Vec<NodeId> = set.ones().map(|i| i as NodeId + 1).collect();
            let outside: Vec<NodeId> = (1..=n as NodeId)
                .filter(|v| !set.contains(*v as usize - 1))
                .collect();
            let a = *inside.choose(&mut rng).expect("future sets are nonempty");
            let b = *outside.choose(&mut rng).expect("stalled sets are not full");
            edges.insert(Edge::new(a, b).expect("a is inside, b outside"));
            repairs += 1;
        }
        tracker.advance(&edges);
        rounds.push(edges);
    }
    DynamicGraph::explicit(n, rounds)
}

/// Named family plus parameters, as accepted by the CLI `generate` command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Soifer,
    AlternatingRing,
    OitIitGap { k: usize },
    SplitHalves,
    Static(StaticShape),
    RandomOit1 { horizon: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<DynamicGraph, GraphError> {
        match self.family {
            Family::Soifer => soifer(self.n),
            Family::AlternatingRing => alternating_matchings_ring(self.n),
            Family::OitIitGap { k } => oit_iit_gap_graph(self.n, k),
            Family::SplitHalves => split_halves_graph(self.n),
            Family::Static(shape) => static_graph(shape, self.n),
            Family::RandomOit1 { horizon, seed } => random_oit1_graph(self.n, horizon, seed),
        }
    }
}
