#![allow(dead_code)]

pub mod oracle;

use dynet::dynamic_graph::{Bound, DynamicGraph, Edge, EdgeSet, NodeId};
use dynet::generators::{
    alternating_matchings_ring, oit_iit_gap_graph, random_oit1_graph, soifer, split_halves_graph,
    static_graph, StaticShape,
};
use dynet::influence::{all_metrics, future_set, past_set, MetricResult};
use dynet::local_windows::{fsum, periodic_respecting_schedule, psum, CoverNetwork};
use dynet::protocols::{oit_budget, Trace};
use oracle::{Oracle, Value};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One labelled instance of every generator family with `n <= max_n`.
pub fn family_catalogue(max_n: usize) -> Vec<(String, DynamicGraph)> {
    let mut out = Vec::new();
    for n in (4..=max_n).step_by(2) {
        out.push((format!("soifer({n})"), soifer(n).unwrap()));
        out.push((format!("ring({n})"), alternating_matchings_ring(n).unwrap()));
    }
    for n in 5..=max_n {
        for k in 1..=2 {
            out.push((format!("gap({n},{k})"), oit_iit_gap_graph(n, k).unwrap()));
        }
    }
    for n in (4..=max_n).step_by(4) {
        out.push((format!("split({n})"), split_halves_graph(n).unwrap()));
    }
    let shapes = [
        StaticShape::Complete,
        StaticShape::Path,
        StaticShape::Cycle,
        StaticShape::Star,
        StaticShape::Empty,
    ];
    for n in 2..=max_n {
        for shape in shapes {
            out.push((format!("{shape:?}({n})"), static_graph(shape, n).unwrap()));
        }
    }
    for n in 3..=max_n {
        for seed in 0..3 {
            out.push((
                format!("random_oit1({n},seed {seed})"),
                random_oit1_graph(n, 2 * n, seed).unwrap(),
            ));
        }
    }
    out
}

/// Connected underlying graph: a random spanning tree plus extra edges.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize, max_cover: u32) -> CoverNetwork {
    let mut order: Vec<NodeId> = (1..=n as NodeId).collect();
    order.shuffle(rng);
    let mut edges = EdgeSet::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        edges.insert(Edge::new(order[i], parent).unwrap());
    }
    for _ in 0..rng.gen_range(0..=n) {
        let a = rng.gen_range(1..=n as NodeId);
        let b = rng.gen_range(1..=n as NodeId);
        if let Some(e) = Edge::new(a, b) {
            edges.insert(e);
        }
    }
    let cover = (0..n).map(|_| rng.gen_range(1..=max_cover)).collect();
    CoverNetwork::new(n, edges, cover).unwrap()
}

pub fn seeded_network(seed: u64, n: usize, max_cover: u32) -> CoverNetwork {
    random_network(&mut ChaCha8Rng::seed_from_u64(seed), n, max_cover)
}

/// Respecting schedule where edge `e` fires at rounds `t ≡ o_e (mod w(e))`
/// for a random offset `o_e`.
pub fn offset_respecting_schedule(net: &CoverNetwork, seed: u64) -> DynamicGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(Edge, usize, usize)> = net
        .edges()
        .iter()
        .map(|e| {
            let w = net.weight(e) as usize;
            (e, w, rng.gen_range(0..w))
        })
        .collect();
    let period = edges.iter().fold(1, |acc, &(_, w, _)| lcm(acc, w));
    let rounds = (1..=period)
        .map(|t| {
            edges
                .iter()
                .filter(|&&(_, w, o)| t % w == o)
                .map(|&(e, _, _)| e)
                .collect()
        })
        .collect();
    DynamicGraph::periodic(net.n(), rounds).unwrap()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Edge set over `1..=n` drawn from a bitmask of all pairs.
pub fn edges_from_mask(n: usize, mask: u64) -> EdgeSet {
    let mut out = EdgeSet::new();
    let mut bit = 0;
    for a in 1..=n as NodeId {
        for b in a + 1..=n as NodeId {
            if mask >> bit & 1 == 1 {
                out.insert(Edge::new(a, b).unwrap());
            }
            bit += 1;
        }
    }
    out
}

fn rounds_strategy(n: usize, len: std::ops::RangeInclusive<usize>) -> BoxedStrategy<Vec<EdgeSet>> {
    let pairs = n * (n - 1) / 2;
    let full = if pairs == 0 { 0 } else { (1u64 << pairs) - 1 };
    prop::collection::vec(0..=full, len)
        .prop_map(move |masks| masks.into_iter().map(|m| edges_from_mask(n, m)).collect())
        .boxed()
}

/// Small periodic, eventually periodic, or explicit schedules.
pub fn arb_graph(max_n: usize, max_len: usize) -> BoxedStrategy<DynamicGraph> {
    (2..=max_n)
        .prop_flat_map(move |n| {
            (
                Just(n),
                0..3u8,
                rounds_strategy(n, 1..=max_len),
                rounds_strategy(n, 0..=2),
            )
        })
        .prop_map(|(n, kind, rounds, prefix)| match kind {
            0 => DynamicGraph::periodic(n, rounds).unwrap(),
            1 => DynamicGraph::eventually_periodic(n, prefix, rounds).unwrap(),
            _ => DynamicGraph::explicit(n, rounds).unwrap(),
        })
        .boxed()
}

/// Dense periodic schedules: every round keeps each pair with probability
/// about 3/4, so most of them have finite metrics.
pub fn arb_dense_periodic(max_n: usize, max_len: usize) -> BoxedStrategy<DynamicGraph> {
    (3..=max_n)
        .prop_flat_map(move |n| {
            let pairs = n * (n - 1) / 2;
            let full = (1u64 << pairs) - 1;
            (
                Just(n),
                prop::collection::vec((0..=full, 0..=full), 1..=max_len),
            )
        })
        .prop_map(|(n, masks)| {
            let rounds = masks
                .into_iter()
                .map(|(a, b)| edges_from_mask(n, a | b))
                .collect();
            DynamicGraph::periodic(n, rounds).unwrap()
        })
        .boxed()
}

/// Unit-oit graphs: soifer and rings for even `n <= 10`, and sampled ones.
pub fn oit1_families() -> Vec<(String, DynamicGraph)> {
    let mut out = Vec::new();
    for n in [4, 6, 8, 10] {
        out.push((format!("soifer({n})"), soifer(n).unwrap()));
        out.push((format!("ring({n})"), alternating_matchings_ring(n).unwrap()));
    }
    for n in 3..=10 {
        for seed in 0..4 {
            let h = 3 * n * n + 4 * n;
            out.push((
                format!("random_oit1({n},{seed})"),
                random_oit1_graph(n, h, seed).unwrap(),
            ));
        }
    }
    out
}

/// Halting round of each node read back from the trace, with the round in
/// which its heard count last grew.
pub fn replay_oit(trace: &Trace, k: usize) -> Result<(), String> {
    for uid in 1..=trace.n as NodeId {
        let halt = trace.halt_round(uid).ok_or(format!("{uid} never halted"))?;
        let mut heard = 1;
        let mut last_growth = 0;
        for r in 1..=halt {
            let rec = &trace.round(r)[uid as usize - 1];
            if rec.heard_count > heard {
                heard = rec.heard_count;
                last_growth = r;
            }
            let holds = r - last_growth >= oit_budget(k, heard);
            if holds != (r == halt) {
                return Err(format!(
                    "{uid}: criterion {holds} at round {r}, halt {halt}"
                ));
            }
        }
    }
    Ok(())
}

/// Respecting schedules for `net`: the canonical one, a random-offset one, and
/// the canonical one padded with extra underlying edges.
pub fn respecting_pairs(net: &CoverNetwork, seed: u64) -> Vec<DynamicGraph> {
    let base = periodic_respecting_schedule(net).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<Edge> = net.edges().iter().collect();
    let padded = base
        .stored_rounds()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            for _ in 0..rng.gen_range(0..=2) {
                r.insert(all[rng.gen_range(0..all.len())]);
            }
            r
        })
        .collect();
    vec![
        base,
        offset_respecting_schedule(net, seed),
        DynamicGraph::periodic(net.n(), padded).unwrap(),
    ]
}

/// Fast-path metrics and edge period against [`oracle::Oracle`].
fn agrees(
    name: &str,
    metric: &str,
    got: &MetricResult,
    want: Value,
    periodic: bool,
) -> Result<(), String> {
    let ok = match want {
        Value::Finite(v) => got.value == Bound::Finite(v),
        Value::Never => got.value == Bound::Unbounded && got.exact == periodic,
    };
    if got.value != Bound::Unbounded && got.exact != periodic {
        return Err(format!(
            "{name}: {metric} exactness {} on periodic={periodic}",
            got.exact
        ));
    }
    if ok {
        Ok(())
    } else {
        Err(format!(
            "{name}: {metric} = {:?}, oracle {want:?}",
            got.value
        ))
    }
}

pub fn oracle_mismatch(name: &str, g: &DynamicGraph) -> Result<(), String> {
    let o = Oracle::new(g);
    let m = all_metrics(g, 100_000);
    let periodic = g.is_periodic();
    agrees(name, "oit", &m.oit, o.oit(), periodic)?;
    agrees(name, "iit", &m.iit, o.iit(), periodic)?;
    agrees(name, "moi", &m.moi, Value::Finite(o.moi()), periodic)?;
    agrees(name, "ct", &m.ct, o.ct(), periodic)?;
    agrees(
        name,
        "dynamic_diameter",
        &m.dynamic_diameter,
        o.diameter(),
        periodic,
    )?;
    let ep = g.edge_period(100_000);
    let want = o.edge_period();
    let ok = match want {
        Value::Finite(p) => ep.value == Bound::Finite(p),
        Value::Never => ep.value == Bound::Unbounded,
    };
    if !ok {
        return Err(format!(
            "{name}: edge_period {:?}, oracle {want:?}",
            ep.value
        ));
    }
    Ok(())
}

/// Containment and growth checks for psum and fsum at every `u` and every
/// `t <= min(3 * sum(c), max_t)`.
pub fn check_sum_lemmas(g: &DynamicGraph, net: &CoverNetwork, max_t: usize) -> Result<(), String> {
    let n = net.n();
    let horizon = 3 * net.total_cover() as usize;
    for u in 1..=n as NodeId {
        for t in 0..=horizon.min(max_t) {
            let past = past_set(g, u, t, 0).unwrap();
            let p = psum(g, net, u, t, 0).unwrap() as usize;
            for &v in past.members.keys() {
                let back = p - net.cover(v) as usize;
                if !past_set(g, u, back, 0).unwrap().contains(v) {
                    return Err(format!("containment for u={u} t={t} v={v}"));
                }
            }
            if past_set(g, u, p, 0).unwrap().len() < (past.len() + 1).min(n) {
                return Err(format!("past growth u={u} t={t}"));
            }
            let fut = future_set(g, u, 0, t).unwrap();
            let f = fsum(g, net, u, 0, t).unwrap() as usize;
            if future_set(g, u, 0, f).unwrap().len() < (fut.len() + 1).min(n) {
                return Err(format!("future growth u={u} t={t}"));
            }
        }
    }
    Ok(())
}

/// soifer(8), rounds 1..=7: the centre edge and its three perpendiculars.
pub const SOIFER8_PANELS: [[(u32, u32); 4]; 7] = [
    [(8, 1), (7, 2), (6, 3), (5, 4)],
    [(8, 2), (1, 3), (7, 4), (6, 5)],
    [(8, 3), (2, 4), (1, 5), (7, 6)],
    [(8, 4), (3, 5), (2, 6), (1, 7)],
    [(8, 5), (4, 6), (3, 7), (2, 1)],
    [(8, 6), (5, 7), (4, 1), (3, 2)],
    [(8, 7), (6, 1), (5, 2), (4, 3)],
];
