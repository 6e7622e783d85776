//! Brute-force reference evaluation over the time-expanded graph.
//!
//! The schedule is unrolled into per-round adjacency matrices through
//! `DynamicGraph::instance` only. Reachability is plain BFS over time-nodes and
//! every metric is read off its defining inequality by enumerating all
//! `(u, t, t')` triples. Nothing here calls into the crate's metric code.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use dynet::dynamic_graph::DynamicGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Finite(usize),
    Never,
}

pub struct Oracle {
    pub n: usize,
    /// Last unrolled round.
    pub len: usize,
    /// Start times whose behaviour covers every start time.
    pub starts: Vec<usize>,
    /// Whether the schedule is infinite (then `len` is an extended horizon).
    pub infinite: bool,
    /// `adj[r][a][b]` for round `r` in `1..=len`; index 0 unused.
    adj: Vec<Vec<Vec<bool>>>,
}

impl Oracle {
    pub fn new(g: &DynamicGraph) -> Self {
        let n = g.n();
        let (len, starts, infinite) = match g.horizon() {
            Some(h) => (h, (0..=h).collect(), false),
            None => {
                let q = g.prefix_len();
                let p = g.period().unwrap();
                // A start's whole reachability matrix changes at most n*n times
                // and freezes for good after p quiet rounds past the prefix.
                let span = q + p;
                (
                    (span + q + (n * n + 2) * p).max(16),
                    (0..span).collect(),
                    true,
                )
            }
        };
        let mut adj = vec![vec![vec![false; n]; n]; len + 1];
        for (r, m) in adj.iter_mut().enumerate().skip(1) {
            for e in g.instance(r).unwrap().iter() {
                let (a, b) = (e.lo() as usize - 1, e.hi() as usize - 1);
                m[a][b] = true;
                m[b][a] = true;
            }
        }
        Oracle {
            n,
            len,
            starts,
            infinite,
            adj,
        }
    }

    pub fn edge(&self, round: usize, a: usize, b: usize) -> bool {
        self.adj[round][a][b]
    }

    /// `reach[t'][v]` for `t'` in `t..=len`: whether `(u, t) ~> (v, t')`.
    pub fn future_layers(&self, u: usize, t: usize) -> Vec<Vec<bool>> {
        let n = self.n;
        let mut seen = vec![vec![false; n]; self.len + 1];
        let mut queue = VecDeque::from([(u, t)]);
        seen[t][u] = true;
        while let Some((v, s)) = queue.pop_front() {
            if s == self.len {
                continue;
            }
            for w in 0..n {
                if (w == v || self.adj[s + 1][v][w]) && !seen[s + 1][w] {
                    seen[s + 1][w] = true;
                    queue.push_back((w, s + 1));
                }
            }
        }
        seen
    }

    /// `reach[s][v]` for `s` in `0..=t'`: whether `(v, s) ~> (u, t')`.
    pub fn past_layers(&self, u: usize, t_prime: usize) -> Vec<Vec<bool>> {
        let n = self.n;
        let mut seen = vec![vec![false; n]; t_prime + 1];
        let mut queue = VecDeque::from([(u, t_prime)]);
        seen[t_prime][u] = true;
        while let Some((v, s)) = queue.pop_front() {
            if s == 0 {
                continue;
            }
            for w in 0..n {
                if (w == v || self.adj[s][v][w]) && !seen[s - 1][w] {
                    seen[s - 1][w] = true;
                    queue.push_back((w, s - 1));
                }
            }
        }
        seen
    }

    pub fn future(&self, u: usize, t: usize, t_prime: usize) -> BTreeSet<usize> {
        members(&self.future_layers(u, t)[t_prime])
    }

    pub fn past(&self, u: usize, t_prime: usize, t: usize) -> BTreeSet<usize> {
        members(&self.past_layers(u, t_prime)[t])
    }

    /// `sizes[u][i][t' - t]` = |future(u, t)(t')| for the i-th start `t`.
    fn future_sizes(&self) -> Vec<Vec<Vec<usize>>> {
        (0..self.n)
            .map(|u| {
                self.starts
                    .iter()
                    .map(|&t| {
                        self.future_layers(u, t)[t..]
                            .iter()
                            .map(|row| count(row))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// `sizes[u][i][t' - t]` = |past(u, t')(t)| for the i-th start `t`.
    fn past_sizes(&self) -> Vec<Vec<Vec<usize>>> {
        let mut out = vec![vec![Vec::new(); self.starts.len()]; self.n];
        for (u, per_start) in out.iter_mut().enumerate() {
            for t_prime in 0..=self.len {
                let layers = self.past_layers(u, t_prime);
                for (i, &t) in self.starts.iter().enumerate() {
                    if t <= t_prime {
                        per_start[i].push(count(&layers[t]));
                    }
                }
            }
        }
        out
    }

    fn influence_time(&self, sizes: &[Vec<Vec<usize>>]) -> Value {
        let n = self.n;
        if self.infinite && self.never_fills(sizes) {
            return Value::Never;
        }
        // Least k with every in-range constraint satisfied. For explicit
        // schedules, k = len - t' + 1 makes the constraint at t' vacuous.
        'k: for k in 1..=self.len + 1 {
            for per_start in sizes {
                for seq in per_start {
                    for i in 0..seq.len() {
                        if i + k >= seq.len() {
                            break;
                        }
                        if seq[i + k] < (seq[i] + 1).min(n) {
                            continue 'k;
                        }
                    }
                }
            }
            return Value::Finite(k);
        }
        unreachable!("k = len + 1 is vacuous")
    }

    fn never_fills(&self, sizes: &[Vec<Vec<usize>>]) -> bool {
        sizes
            .iter()
            .flatten()
            .any(|seq| *seq.last().unwrap() < self.n)
    }

    pub fn oit(&self) -> Value {
        self.influence_time(&self.future_sizes())
    }

    pub fn iit(&self) -> Value {
        self.influence_time(&self.past_sizes())
    }

    pub fn moi(&self) -> usize {
        self.future_sizes()
            .iter()
            .flatten()
            .flat_map(|seq| seq.windows(2).map(|w| w[1] - w[0]))
            .max()
            .unwrap_or(0)
    }

    pub fn diameter(&self) -> Value {
        let sizes = self.future_sizes();
        if self.infinite && self.never_fills(&sizes) {
            return Value::Never;
        }
        'd: for d in 1..=self.len + 1 {
            for seq in sizes.iter().flatten() {
                if d < seq.len() && seq[d] < self.n {
                    continue 'd;
                }
            }
            return Value::Finite(d);
        }
        unreachable!()
    }

    fn union_connected(&self, from: usize, to: usize) -> bool {
        let n = self.n;
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if !seen[w] && (from..=to).any(|r| self.adj[r][v][w]) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn ct(&self) -> Value {
        let firsts: Vec<usize> = if self.infinite {
            self.starts.iter().map(|&t| t + 1).collect()
        } else {
            (1..=self.len).collect()
        };
        'k: for k in 1..=self.len + 1 {
            for &t in &firsts {
                if t + k - 1 > self.len {
                    if self.infinite {
                        return Value::Never;
                    }
                    continue;
                }
                if !self.union_connected(t, t + k - 1) {
                    continue 'k;
                }
            }
            return Value::Finite(k);
        }
        unreachable!()
    }

    pub fn edge_period(&self) -> Value {
        let n = self.n;
        let firsts = if self.infinite {
            self.starts.len()
        } else {
            self.len
        };
        for p in 1..self.len {
            for t in 1..=firsts {
                if t + p > self.len {
                    break;
                }
                for a in 0..n {
                    for b in a + 1..n {
                        if self.adj[t][a][b] && self.adj[t + p][a][b] {
                            return Value::Finite(p);
                        }
                    }
                }
            }
        }
        Value::Never
    }

    /// Latest `s <= t'` with `(v, s) ~> (u, t')`, for every `v` that has one.
    pub fn latest_influence(&self, u: usize, t_prime: usize) -> BTreeMap<usize, usize> {
        let layers = self.past_layers(u, t_prime);
        let mut out = BTreeMap::new();
        for s in 0..=t_prime {
            for v in 0..self.n {
                if layers[s][v] {
                    out.insert(v, s);
                }
            }
        }
        out
    }

    /// Least `d` with `(u, t) ~> (v, t + d)`, if within the unrolled range.
    pub fn first_arrival(&self, u: usize, t: usize, v: usize) -> Option<usize> {
        self.future_layers(u, t)[t..].iter().position(|row| row[v])
    }
}

fn count(row: &[bool]) -> usize {
    row.iter().filter(|&&b| b).count()
}

fn members(row: &[bool]) -> BTreeSet<usize> {
    row.iter()
        .enumerate()
        .filter_map(|(v, &b)| b.then_some(v))
        .collect()
}
