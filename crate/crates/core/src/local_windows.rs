//! Local communication windows: a static underlying graph whose nodes each
//! promise to meet every underlying neighbour within their cover time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamic_graph::{is_connected, lcm, DynamicGraph, Edge, EdgeSet, GraphError, NodeId};
use crate::influence::{future_set, past_set};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("underlying graph is disconnected")]
    Disconnected,
    #[error("node {0} has cover time 0; cover times must be at least 1")]
    ZeroCover(NodeId),
    #[error("field `cover` has {got} entries for {n} nodes")]
    CoverLength { got: usize, n: usize },
    #[error("round {round}: edge {edge} is not an edge of the underlying graph")]
    EdgeOutsideNetwork { round: usize, edge: Edge },
    #[error("schedule has {graph} nodes but the network has {network}")]
    NodeCountMismatch { graph: usize, network: usize },
    #[error("nodes {0} and {1} are not adjacent in the underlying graph")]
    NotAdjacent(NodeId, NodeId),
    #[error("path revisits node {0}")]
    NotSimple(NodeId),
    #[error("invalid network edge [{0}, {1}]")]
    InvalidEdge(i64, i64),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("malformed network JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Underlying connected graph `C = (V, A)` plus a cover time per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverNetwork {
    n: usize,
    edges: EdgeSet,
    cover: Vec<u32>,
    neighbors: Vec<Vec<NodeId>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    n: usize,
    edges: Vec<[i64; 2]>,
    cover: Vec<u32>,
}

impl CoverNetwork {
    pub fn new(n: usize, edges: EdgeSet, cover: Vec<u32>) -> Result<Self, ModelError> {
        if cover.len() != n {
            return Err(ModelError::CoverLength {
                got: cover.len(),
                n,
            });
        }
        if let Some(u) = cover.iter().position(|&c| c == 0) {
            return Err(ModelError::ZeroCover(u as NodeId + 1));
        }
        if let Some(e) = edges.iter().find(|e| e.hi() as usize > n) {
            return Err(ModelError::InvalidEdge(e.lo() as i64, e.hi() as i64));
        }
        if !is_connected(n, edges.as_slice()) {
            return Err(ModelError::Disconnected);
        }
        let neighbors = (1..=n as NodeId).map(|u| edges.neighbors(u)).collect();
        Ok(CoverNetwork {
            n,
            edges,
            cover,
            neighbors,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let raw: RawNetwork = serde_json::from_str(text)?;
        let mut edges = Vec::with_capacity(raw.edges.len());
        for [u, v] in raw.edges {
            let in_range = |x: i64| x >= 1 && x as u64 <= raw.n as u64;
            if !in_range(u) || !in_range(v) {
                return Err(ModelError::InvalidEdge(u, v));
            }
            edges.push(Edge::new(u as NodeId, v as NodeId).ok_or(ModelError::InvalidEdge(u, v))?);
        }
        CoverNetwork::new(raw.n, EdgeSet::from_edges(edges), raw.cover)
    }

    pub fn to_json(&self) -> String {
        let raw = RawNetwork {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|e| [e.lo() as i64, e.hi() as i64])
                .collect(),
            cover: self.cover.clone(),
        };
        serde_json::to_string(&raw).expect("network serialization cannot fail")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn cover_times(&self) -> &[u32] {
        &self.cover
    }

    pub fn cover(&self, u: NodeId) -> u32 {
        self.cover[u as usize - 1]
    }

    /// Underlying neighbours `N(u)`, ascending.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.neighbors[u as usize - 1]
    }

    /// `w(e) = min(c_u, c_v)`: every respecting schedule offers `e` at least
    /// once in every window of this length.
    pub fn weight(&self, e: Edge) -> u32 {
        self.cover(e.lo()).min(self.cover(e.hi()))
    }

    pub fn total_cover(&self) -> u64 {
        self.cover.iter().map(|&c| c as u64).sum()
    }
}

/// Whether every window of `c_u` rounds lets each node `u` meet all of `N(u)`.
///
/// Edges outside the underlying graph are a model violation rather than a
/// `false`. Periodic schedules are checked over one prefix plus period of
/// window starts; explicit ones over every window inside the horizon.
pub fn respects(g: &DynamicGraph, net: &CoverNetwork) -> Result<bool, ModelError> {
    if g.n() != net.n() {
        return Err(ModelError::NodeCountMismatch {
            graph: g.n(),
            network: net.n(),
        });
    }
    for (i, set) in g.stored_rounds().iter().enumerate() {
        if let Some(edge) = set.iter().find(|e| !net.edges().contains(*e)) {
            return Err(ModelError::EdgeOutsideNetwork { round: i + 1, edge });
        }
    }
    let starts = g.representative_span();
    for u in 1..=net.n() as NodeId {
        let c = net.cover(u) as usize;
        let need = net.neighbors(u);
        for r in 1..=starts {
            if g.horizon().is_some_and(|h| r + c - 1 > h) {
                break;
            }
            let mut seen = vec![false; need.len()];
            for t in r..r + c {
                for v in g.instance(t)?.neighbors(u) {
                    if let Ok(idx) = need.binary_search(&v) {
                        seen[idx] = true;
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether some dynamic graph respecting `net` can make every node wait its
/// full cover time: each node needs a neighbour with a cover time at least its
/// own.
pub fn admits_worst_case(net: &CoverNetwork) -> bool {
    (1..=net.n() as NodeId).all(|u| {
        let cu = net.cover(u);
        net.neighbors(u).iter().any(|&v| net.cover(v) >= cu)
    })
}

/// Worst-case delay for influence to travel along `path`: the sum of
/// `min(c_a, c_b)` over every consecutive pair.
pub fn path_delay(path: &[NodeId], net: &CoverNetwork) -> Result<u64, ModelError> {
    let mut seen = vec![false; net.n()];
    for &u in path {
        if u == 0 || u as usize > net.n() {
            return Err(ModelError::Graph(GraphError::Argument(format!(
                "node {u} outside 1..={}",
                net.n()
            ))));
        }
        if std::mem::replace(&mut seen[u as usize - 1], true) {
            return Err(ModelError::NotSimple(u));
        }
    }
    path.windows(2)
        .map(|w| {
            let e = Edge::new(w[0], w[1]).ok_or(ModelError::NotSimple(w[0]))?;
            if !net.edges().contains(e) {
                return Err(ModelError::NotAdjacent(w[0], w[1]));
            }
            Ok(net.weight(e) as u64)
        })
        .sum()
}

/// Largest shortest-path delay between any two nodes, with one path that
/// realizes it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedDiameter {
    pub value: u64,
    pub path: Vec<NodeId>,
}

/// All-pairs shortest delays under `w(e)`, indexed from 0.
pub fn delay_matrix(net: &CoverNetwork) -> Vec<Vec<u64>> {
    shortest_paths(net).0
}

fn shortest_paths(net: &CoverNetwork) -> (Vec<Vec<u64>>, Vec<Vec<usize>>) {
    let n = net.n();
    let mut dist = vec![vec![u64::MAX; n]; n];
    let mut next = vec![vec![usize::MAX; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0;
        next[i][i] = i;
    }
    for e in net.edges().iter() {
        let (a, b) = e.indices();
        let w = net.weight(e) as u64;
        dist[a][b] = w;
        dist[b][a] = w;
        next[a][b] = b;
        next[b][a] = a;
    }
    for k in 0..n {
        for i in 0..n {
            if dist[i][k] == u64::MAX {
                continue;
            }
            for j in 0..n {
                let via = dist[i][k].saturating_add(dist[k][j]);
                if via < dist[i][j] {
                    dist[i][j] = via;
                    next[i][j] = next[i][k];
                }
            }
        }
    }
    (dist, next)
}

/// Weighted dynamic diameter `max_{u,v} min_p l(p)`.
pub fn weighted_dynamic_diameter(net: &CoverNetwork) -> WeightedDiameter {
    let (dist, next) = shortest_paths(net);
    let n = net.n();
    let (mut bu, mut bv) = (0, 0);
    for i in 0..n {
        for j in 0..n {
            if dist[i][j] > dist[bu][bv] {
                (bu, bv) = (i, j);
            }
        }
    }
    let mut path = vec![bu as NodeId + 1];
    let mut cur = bu;
    while cur != bv {
        cur = next[cur][bv];
        path.push(cur as NodeId + 1);
    }
    WeightedDiameter {
        value: dist[bu][bv],
        path,
    }
}

/// Sum of cover times over `past(u, t_prime)(t)`.
pub fn psum(
    g: &DynamicGraph,
    net: &CoverNetwork,
    u: NodeId,
    t_prime: usize,
    t: usize,
) -> Result<u64, ModelError> {
    let past = past_set(g, u, t_prime, t)?;
    Ok(past.members.keys().map(|&v| net.cover(v) as u64).sum())
}

/// Sum of cover times over `future(u, t)(t_prime)`.
pub fn fsum(
    g: &DynamicGraph,
    net: &CoverNetwork,
    u: NodeId,
    t: usize,
    t_prime: usize,
) -> Result<u64, ModelError> {
    let fut = future_set(g, u, t, t_prime)?;
    Ok(fut.members.keys().map(|&v| net.cover(v) as u64).sum())
}

/// Canonical respecting adversary: edge `e` is offered exactly in rounds that
/// are multiples of `w(e)`. The period is the lcm of all edge weights.
pub fn periodic_respecting_schedule(net: &CoverNetwork) -> Result<DynamicGraph, ModelError> {
    let period = net
        .edges()
        .iter()
        .fold(1usize, |acc, e| lcm(acc, net.weight(e) as usize));
    let rounds = (1..=period)
        .map(|t| {
            net.edges()
                .iter()
                .filter(|&e| t % net.weight(e) as usize == 0)
                .collect()
        })
        .collect();
    Ok(DynamicGraph::periodic(net.n(), rounds)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{from_static, static_edges, StaticShape};

    fn net(shape: StaticShape, cover: Vec<u32>) -> CoverNetwork {
        let n = cover.len();
        CoverNetwork::new(n, static_edges(shape, n), cover).unwrap()
    }

    #[test]
    fn static_schedule_respects_anything() {
        let c = net(StaticShape::Cycle, vec![1, 3, 2, 5]);
        let g = from_static(4, c.edges().clone()).unwrap();
        assert!(respects(&g, &c).unwrap());
    }

    #[test]
    fn omitted_edge_breaks_respect() {
        let c = net(StaticShape::Path, vec![2, 2, 2]);
        // {2,3} absent in rounds 1 and 2 of the period.
        let g = DynamicGraph::periodic(
            3,
            vec![
                EdgeSet::from_pairs([(1, 2)]),
                EdgeSet::from_pairs([(1, 2)]),
                EdgeSet::from_pairs([(2, 3)]),
            ],
        )
        .unwrap();
        assert!(!respects(&g, &c).unwrap());
    }

    #[test]
    fn foreign_edge_is_a_violation() {
        let c = net(StaticShape::Path, vec![1, 1, 1]);
        let g = from_static(3, EdgeSet::from_pairs([(1, 3)])).unwrap();
        assert!(matches!(
            respects(&g, &c),
            Err(ModelError::EdgeOutsideNetwork { round: 1, .. })
        ));
    }

    #[test]
    fn worst_case_admissibility() {
        assert!(admits_worst_case(&net(StaticShape::Cycle, vec![3, 3, 3])));
        assert!(!admits_worst_case(&net(StaticShape::Path, vec![1, 2])));
        assert!(!admits_worst_case(&net(
            StaticShape::Star,
            vec![5, 1, 1, 1]
        )));
    }

    #[test]
    fn delays() {
        let c = net(StaticShape::Path, vec![1, 4, 2]);
        assert_eq!(path_delay(&[2], &c).unwrap(), 0);
        assert_eq!(path_delay(&[1, 2, 3], &c).unwrap(), 3);
        assert!(matches!(
            path_delay(&[1, 3], &c),
            Err(ModelError::NotAdjacent(1, 3))
        ));
        let k2 = net(StaticShape::Path, vec![2, 3]);
        assert_eq!(path_delay(&[1, 2], &k2).unwrap(), 2);
    }

    #[test]
    fn diameters() {
        let p3 = net(StaticShape::Path, vec![1, 1, 1]);
        let d = weighted_dynamic_diameter(&p3);
        assert_eq!(d.value, 2);
        assert_eq!(path_delay(&d.path, &p3).unwrap(), 2);
        assert_eq!(
            weighted_dynamic_diameter(&net(StaticShape::Path, vec![2, 3])).value,
            2
        );
    }

    #[test]
    fn sums() {
        let k3 = net(StaticShape::Complete, vec![1, 2, 3]);
        let g = from_static(3, k3.edges().clone()).unwrap();
        assert_eq!(psum(&g, &k3, 1, 1, 0).unwrap(), 6);
        assert_eq!(psum(&g, &k3, 2, 4, 4).unwrap(), 2);
        let p3 = net(StaticShape::Path, vec![1, 1, 1]);
        let g = from_static(3, p3.edges().clone()).unwrap();
        assert_eq!(psum(&g, &p3, 1, 1, 0).unwrap(), 2);
        assert_eq!(fsum(&g, &p3, 2, 0, 1).unwrap(), 3);
    }

    #[test]
    fn canonical_schedule() {
        let uniform = net(StaticShape::Cycle, vec![1, 1, 1, 1]);
        let g = periodic_respecting_schedule(&uniform).unwrap();
        assert_eq!(g.period(), Some(1));
        assert_eq!(g.instance(1).unwrap(), uniform.edges());

        let k2 = net(StaticShape::Path, vec![2, 3]);
        let g = periodic_respecting_schedule(&k2).unwrap();
        assert_eq!(g.period(), Some(2));
        assert!(g.instance(1).unwrap().is_empty());
        assert_eq!(g.instance(2).unwrap().len(), 1);
        assert!(respects(&g, &k2).unwrap());
    }

    #[test]
    fn network_validation() {
        assert!(matches!(
            CoverNetwork::new(3, EdgeSet::from_pairs([(1, 2)]), vec![1, 1, 1]),
            Err(ModelError::Disconnected)
        ));
        assert!(matches!(
            CoverNetwork::new(2, EdgeSet::from_pairs([(1, 2)]), vec![1, 0]),
            Err(ModelError::ZeroCover(2))
        ));
        let c = CoverNetwork::from_json(r#"{"n":2,"edges":[[2,1]],"cover":[2,3]}"#).unwrap();
        assert_eq!(CoverNetwork::from_json(&c.to_json()).unwrap(), c);
        let err = CoverNetwork::from_json(r#"{"n":2,"edges":[[1,2]]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("cover"), "{err}");
    }
}
