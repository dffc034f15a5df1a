//! Class-level chip data and the refined skeleton used by the burning
//! algorithm.
//!
//! A divisor is tracked up to equivalence on each component: interior edge
//! chips are exact, while at every vertex only the degree of the component
//! part and (on genus-1 components) its coordinate sum mod 1 are kept.

use crate::model::{Divisor, EdgeEnd, EdgeId, MetrizedComplex, Point, Side, VertexId};
use crate::rational::{frac, Rational};
use num_traits::Zero;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Chips {
    pub interior: BTreeMap<(EdgeId, Rational), i64>,
    pub degree: Vec<i64>,
    /// Coordinate sum mod 1 of the component part; always 0 at rational components.
    pub class: Vec<Rational>,
}

/// Base point of a reduction, seen from the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Base {
    Vertex(VertexId),
    Interior(EdgeId, Rational),
}

impl Base {
    pub fn of(p: &Point) -> Base {
        match *p {
            Point::Vertex(v) | Point::Component(v, _) => Base::Vertex(v),
            Point::Edge(e, off) => Base::Interior(e, off),
        }
    }
}

impl Chips {
    pub fn zero(cx: &MetrizedComplex) -> Self {
        Chips {
            interior: BTreeMap::new(),
            degree: vec![0; cx.vertex_count()],
            class: vec![Rational::zero(); cx.vertex_count()],
        }
    }

    pub fn from_divisor(cx: &MetrizedComplex, d: &Divisor) -> Self {
        let mut chips = Chips::zero(cx);
        for (p, c) in d.iter() {
            chips.add_point(cx, p, c);
        }
        chips
    }

    pub fn add_point(&mut self, cx: &MetrizedComplex, p: &Point, c: i64) {
        match *p {
            Point::Edge(e, off) => self.add_interior(e, off, c),
            Point::Vertex(v) => self.degree[v.0] += c,
            Point::Component(v, x) => {
                self.degree[v.0] += c;
                if cx.genus_of(v) == 1 {
                    self.class[v.0] = frac(self.class[v.0] + x * Rational::from(c));
                }
            }
        }
    }

    pub fn add_interior(&mut self, e: EdgeId, off: Rational, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.interior.entry((e, off)).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.interior.remove(&(e, off));
        }
    }

    /// `c` chips arriving at (or, if negative, leaving) a vertex through an edge end.
    pub fn add_at_end(&mut self, cx: &MetrizedComplex, end: EdgeEnd, c: i64) {
        let v = cx.end_vertex(end);
        self.degree[v.0] += c;
        if let Some(node) = cx.node(end) {
            self.class[v.0] = frac(self.class[v.0] + node * Rational::from(c));
        }
    }

    pub fn total_degree(&self) -> i64 {
        self.interior.values().sum::<i64>() + self.degree.iter().sum::<i64>()
    }

    /// Whether the component part at `v` is equivalent to an effective divisor.
    pub fn vertex_effective(&self, cx: &MetrizedComplex, v: VertexId) -> bool {
        let d = self.degree[v.0];
        if cx.genus_of(v) == 1 {
            d > 0 || (d == 0 && self.class[v.0].is_zero())
        } else {
            d >= 0
        }
    }

    /// Chips missing at `v` before its component part can be effective.
    pub fn vertex_deficit(&self, cx: &MetrizedComplex, v: VertexId) -> i64 {
        let d = self.degree[v.0];
        if d < 0 {
            -d
        } else if d == 0 && cx.genus_of(v) == 1 && !self.class[v.0].is_zero() {
            1
        } else {
            0
        }
    }

    pub fn is_effective_away(&self, cx: &MetrizedComplex, base: Base) -> bool {
        let interior_ok = self
            .interior
            .iter()
            .all(|(k, c)| *c >= 0 || base == Base::Interior(k.0, k.1));
        interior_ok
            && cx
                .vertex_ids()
                .all(|v| base == Base::Vertex(v) || self.vertex_effective(cx, v))
    }

    /// A concrete divisor in this class. On genus-1 components the chips are
    /// stacked at the anchor coordinate (0 unless `anchor` names that vertex),
    /// with at most one chip elsewhere.
    pub fn to_divisor(&self, cx: &MetrizedComplex, anchor: Option<(VertexId, Rational)>) -> Divisor {
        let mut d = Divisor::new();
        for ((e, off), c) in &self.interior {
            d.add_chips(Point::Edge(*e, *off), *c);
        }
        for v in cx.vertex_ids() {
            let deg = self.degree[v.0];
            if cx.genus_of(v) == 0 {
                d.add_chips(Point::Vertex(v), deg);
                continue;
            }
            let at = match anchor {
                Some((w, c)) if w == v => c,
                _ => Rational::zero(),
            };
            let rest = frac(self.class[v.0] - at * Rational::from(deg));
            if rest.is_zero() {
                d.add_chips(Point::Component(v, at), deg);
            } else {
                d.add_chips(Point::Component(v, at), deg - 1);
                d.add_chips(Point::Component(v, frac(at + rest)), 1);
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NodeKind {
    Vertex(VertexId),
    Interior(EdgeId, Rational),
}

impl NodeKind {
    pub fn point(self) -> Point {
        match self {
            NodeKind::Vertex(v) => Point::Vertex(v),
            NodeKind::Interior(e, off) => Point::Edge(e, off),
        }
    }
}

/// Piece of an edge between consecutive skeleton nodes, oriented along the edge.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub a: usize,
    pub b: usize,
    pub len: Rational,
    pub edge: EdgeId,
    pub start: Rational,
}

/// The complex subdivided at a finite set of interior points. Nodes
/// `0..vertex_count` are the model vertices.
#[derive(Debug, Clone)]
pub(crate) struct Skeleton {
    pub nodes: Vec<NodeKind>,
    pub segments: Vec<Segment>,
    /// `(segment, at_a_end)` for every segment end at the node; self-loop
    /// segments appear twice.
    pub adj: Vec<Vec<(usize, bool)>>,
    index: BTreeMap<(EdgeId, Rational), usize>,
}

impl Skeleton {
    pub fn build(cx: &MetrizedComplex, points: &BTreeSet<(EdgeId, Rational)>) -> Self {
        let mut nodes: Vec<NodeKind> = cx.vertex_ids().map(NodeKind::Vertex).collect();
        let mut index = BTreeMap::new();
        for &(e, off) in points {
            index.insert((e, off), nodes.len());
            nodes.push(NodeKind::Interior(e, off));
        }
        let mut segments = Vec::new();
        for e in cx.edge_ids() {
            let edge = cx.edge(e);
            let mut prev = (edge.tail.0, Rational::zero());
            for (&(_, off), &node) in index.range((e, Rational::zero())..(EdgeId(e.0 + 1), Rational::zero())) {
                segments.push(Segment {
                    a: prev.0,
                    b: node,
                    len: off - prev.1,
                    edge: e,
                    start: prev.1,
                });
                prev = (node, off);
            }
            segments.push(Segment {
                a: prev.0,
                b: edge.head.0,
                len: edge.length - prev.1,
                edge: e,
                start: prev.1,
            });
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        for (i, s) in segments.iter().enumerate() {
            adj[s.a].push((i, true));
            adj[s.b].push((i, false));
        }
        Skeleton {
            nodes,
            segments,
            adj,
            index,
        }
    }

    pub fn for_chips(cx: &MetrizedComplex, chips: &Chips, extra: &[(EdgeId, Rational)]) -> Self {
        let mut points: BTreeSet<_> = chips.interior.keys().copied().collect();
        points.extend(extra.iter().copied());
        Skeleton::build(cx, &points)
    }

    pub fn node_of(&self, base: Base) -> usize {
        match base {
            Base::Vertex(v) => v.0,
            Base::Interior(e, off) => self.index[&(e, off)],
        }
    }

    pub fn other(&self, seg: usize, at_a: bool) -> usize {
        let s = &self.segments[seg];
        if at_a {
            s.b
        } else {
            s.a
        }
    }

    /// Edge end of the model graph at a segment end lying on a vertex.
    pub fn end(&self, seg: usize, at_a: bool) -> EdgeEnd {
        EdgeEnd {
            edge: self.segments[seg].edge,
            side: if at_a { Side::Tail } else { Side::Head },
        }
    }

    /// Edge offset at distance `t` from the given end along the segment.
    pub fn offset_from(&self, seg: usize, at_a: bool, t: Rational) -> Rational {
        let s = &self.segments[seg];
        if at_a {
            s.start + t
        } else {
            s.start + s.len - t
        }
    }

    /// Adds `c` chips at a node.
    pub fn add_at(&self, cx: &MetrizedComplex, chips: &mut Chips, node: usize, seg: usize, at_a: bool, c: i64) {
        match self.nodes[node] {
            NodeKind::Vertex(_) => chips.add_at_end(cx, self.end(seg, at_a), c),
            NodeKind::Interior(e, off) => chips.add_interior(e, off, c),
        }
    }

    /// Shortest-path distances from `from`.
    pub fn distances(&self, from: usize) -> Vec<Rational> {
        let mut dist: Vec<Option<Rational>> = vec![None; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[from] = Some(Rational::zero());
        heap.push(Reverse((Rational::zero(), from)));
        while let Some(Reverse((d, n))) = heap.pop() {
            if dist[n].is_some_and(|best| d > best) {
                continue;
            }
            for &(seg, at_a) in &self.adj[n] {
                let m = self.other(seg, at_a);
                let nd = d + self.segments[seg].len;
                if dist[m].is_none_or(|best| nd < best) {
                    dist[m] = Some(nd);
                    heap.push(Reverse((nd, m)));
                }
            }
        }
        dist.into_iter()
            .map(|d| d.expect("complex is connected"))
            .collect()
    }
}
