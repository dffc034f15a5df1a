//! Chip-firing on a finite multigraph: the subdivision of a metric graph
//! whose edges all have length `1/ell`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use tdw_core::rational::Rational;
use tdw_core::{Divisor, EdgeId, MetrizedComplex, Point};

pub struct FiniteGraph {
    pub adj: Vec<Vec<usize>>,
    /// Lattice position of each subdivision point: `(edge, k)` is at offset `k / ell`.
    lattice: BTreeMap<(EdgeId, i64), usize>,
    ell: i64,
}

impl FiniteGraph {
    /// Subdivides every edge into pieces of length `1/ell`. Requires a metric
    /// graph whose lengths are multiples of `1/ell`.
    pub fn subdivide(cx: &MetrizedComplex, ell: i64) -> Self {
        assert!(cx.is_graph());
        let mut adj = vec![Vec::new(); cx.vertex_count()];
        let mut lattice = BTreeMap::new();
        for e in cx.edge_ids() {
            let steps = cx.length(e) * Rational::from(ell);
            assert!(steps.is_integer(), "length not on the lattice");
            let steps = steps.to_integer();
            let edge = cx.edge(e);
            let mut prev = edge.tail.0;
            for k in 1..steps {
                let id = adj.len();
                adj.push(Vec::new());
                lattice.insert((e, k), id);
                adj[prev].push(id);
                adj[id].push(prev);
                prev = id;
            }
            adj[prev].push(edge.head.0);
            adj[edge.head.0].push(prev);
        }
        FiniteGraph { adj, lattice, ell }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn index(&self, p: &Point) -> Option<usize> {
        match *p {
            Point::Vertex(v) | Point::Component(v, _) => Some(v.0),
            Point::Edge(e, off) => {
                let k = off * Rational::from(self.ell);
                if !k.is_integer() {
                    return None;
                }
                self.lattice.get(&(e, k.to_integer())).copied()
            }
        }
    }

    pub fn vector(&self, d: &Divisor) -> Option<Vec<i64>> {
        let mut out = vec![0; self.len()];
        for (p, c) in d.iter() {
            out[self.index(p)?] += c;
        }
        Some(out)
    }

    fn fire(&self, d: &mut [i64], set: &[bool]) {
        for v in 0..self.len() {
            if !set[v] {
                continue;
            }
            for &w in &self.adj[v] {
                if !set[w] {
                    d[v] -= 1;
                    d[w] += 1;
                }
            }
        }
    }

    /// The `q`-reduced divisor equivalent to `d`.
    pub fn reduce(&self, d: &[i64], q: usize) -> Vec<i64> {
        let mut d = d.to_vec();
        let n = self.len();
        let mut layer = vec![usize::MAX; n];
        layer[q] = 0;
        let mut queue = VecDeque::from([q]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if layer[w] == usize::MAX {
                    layer[w] = layer[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let depth = *layer.iter().max().unwrap();
        for i in (1..=depth).rev() {
            let ball: Vec<bool> = layer.iter().map(|l| *l < i).collect();
            while (0..n).any(|v| layer[v] == i && d[v] < 0) {
                self.fire(&mut d, &ball);
            }
        }
        loop {
            let mut burnt = vec![false; n];
            let mut hits = vec![0i64; n];
            burnt[q] = true;
            let mut stack = vec![q];
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    if burnt[w] {
                        continue;
                    }
                    hits[w] += 1;
                    if hits[w] > d[w] {
                        burnt[w] = true;
                        stack.push(w);
                    }
                }
            }
            if burnt.iter().all(|b| *b) {
                return d;
            }
            let unburnt: Vec<bool> = burnt.iter().map(|b| !b).collect();
            self.fire(&mut d, &unburnt);
        }
    }

    pub fn equivalent(&self, a: &[i64], b: &[i64]) -> bool {
        let diff: Vec<i64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.reduce(&diff, 0).iter().all(|c| *c == 0)
    }

    /// Baker–Norine rank, quantifying over every vertex.
    pub fn rank(&self, d: &[i64]) -> i64 {
        self.rank_memo(&self.reduce(d, 0), &mut HashMap::new())
    }

    fn rank_memo(&self, reduced: &[i64], memo: &mut HashMap<Vec<i64>, i64>) -> i64 {
        if reduced[0] < 0 {
            return -1;
        }
        if let Some(r) = memo.get(reduced) {
            return *r;
        }
        let mut best = i64::MAX;
        for v in 0..self.len() {
            let mut next = reduced.to_vec();
            next[v] -= 1;
            let next = self.reduce(&next, 0);
            best = best.min(self.rank_memo(&next, memo));
            if best == -1 {
                break;
            }
        }
        memo.insert(reduced.to_vec(), best + 1);
        best + 1
    }
}
