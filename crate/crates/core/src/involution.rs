//! Order-two automorphisms of a complex.
//!
//! Rational vertices of valence two are smoothed away first, so an
//! automorphism is a permutation of the remaining vertices together with a
//! permutation of the chains of edges between them.

use crate::model::{EdgeEnd, EdgeId, MetrizedComplex, Point, Side, VertexId};
use crate::rational::{frac, Rational};
use num_traits::Zero;
use std::collections::BTreeMap;

/// A maximal path of edges whose inner vertices are smoothed away.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Chain {
    tail: VertexId,
    head: VertexId,
    length: Rational,
    /// `(edge, reversed, start position along the chain)`.
    pieces: Vec<(EdgeId, bool, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Smoothing {
    kept: Vec<VertexId>,
    chains: Vec<Chain>,
    /// Chain and position of every original edge.
    edge_chain: Vec<(usize, Rational, bool)>,
    /// Chain and position of every smoothed vertex.
    vertex_chain: BTreeMap<VertexId, (usize, Rational)>,
}

impl Smoothing {
    fn new(cx: &MetrizedComplex) -> Self {
        let smooth = |v: VertexId| cx.genus_of(v) == 0 && cx.valence(v) == 2;
        let mut kept: Vec<VertexId> = cx.vertex_ids().filter(|v| !smooth(*v)).collect();
        if kept.is_empty() {
            kept.push(VertexId(0));
        }
        let is_kept = |v: VertexId| kept.contains(&v);
        let mut used = vec![false; cx.edge_count()];
        let mut chains = Vec::new();
        let mut edge_chain = vec![(0, Rational::zero(), false); cx.edge_count()];
        let mut vertex_chain = BTreeMap::new();
        for &start in &kept {
            for &first in cx.ends_at(start) {
                if used[first.edge.0] {
                    continue;
                }
                let index = chains.len();
                let mut pieces = Vec::new();
                let mut pos = Rational::zero();
                let mut end = first;
                loop {
                    let e = end.edge;
                    used[e.0] = true;
                    let reversed = end.side == Side::Head;
                    pieces.push((e, reversed, pos));
                    edge_chain[e.0] = (index, pos, reversed);
                    pos += cx.length(e);
                    let far = cx.far_vertex(end);
                    if is_kept(far) {
                        chains.push(Chain {
                            tail: start,
                            head: far,
                            length: pos,
                            pieces,
                        });
                        break;
                    }
                    vertex_chain.insert(far, (index, pos));
                    let arrived = EdgeEnd {
                        edge: e,
                        side: end.side.opposite(),
                    };
                    end = *cx
                        .ends_at(far)
                        .iter()
                        .find(|x| **x != arrived)
                        .expect("smoothed vertices have valence two");
                }
            }
        }
        Smoothing {
            kept,
            chains,
            edge_chain,
            vertex_chain,
        }
    }

    /// Chain position of a graph point, if it does not lie on a kept vertex.
    fn locate(&self, cx: &MetrizedComplex, p: &Point) -> Option<(usize, Rational)> {
        match *p {
            Point::Edge(e, t) => {
                let (c, start, reversed) = self.edge_chain[e.0];
                Some((c, if reversed { start + cx.length(e) - t } else { start + t }))
            }
            Point::Vertex(v) | Point::Component(v, _) => self.vertex_chain.get(&v).copied(),
        }
    }

    fn point_at(&self, cx: &MetrizedComplex, chain: usize, pos: Rational) -> Point {
        let ch = &self.chains[chain];
        if pos.is_zero() {
            return Point::Vertex(ch.tail);
        }
        if pos == ch.length {
            return Point::Vertex(ch.head);
        }
        let &(e, reversed, start) = ch
            .pieces
            .iter()
            .rev()
            .find(|(_, _, s)| *s < pos)
            .expect("position is inside the chain");
        let t = pos - start;
        let offset = if reversed { cx.length(e) - t } else { t };
        cx.point_on_edge(e, offset)
    }
}

/// An automorphism of order at most two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Involution {
    smoothing: Smoothing,
    /// Image of each kept vertex.
    vertex_map: BTreeMap<VertexId, VertexId>,
    /// Image chain and whether it is traversed backwards.
    chain_map: Vec<(usize, bool)>,
    /// `s_v` for every elliptic component: the reflection `q -> s_v - q`.
    component_sums: BTreeMap<VertexId, Rational>,
}

impl Involution {
    /// Whether the map fixes the graph pointwise.
    pub fn is_identity(&self) -> bool {
        self.vertex_map.iter().all(|(a, b)| a == b)
            && self.chain_map.iter().enumerate().all(|(i, (j, rev))| i == *j && !rev)
    }

    pub fn vertex_image(&self, v: VertexId) -> Option<VertexId> {
        self.vertex_map.get(&v).copied()
    }

    pub fn component_sum(&self, v: VertexId) -> Option<Rational> {
        self.component_sums.get(&v).copied()
    }

    /// Branch vertices (valence other than two, or elliptic) fixed by the map.
    pub fn fixed_vertices(&self) -> Vec<VertexId> {
        self.vertex_map.iter().filter(|(a, b)| a == b).map(|(a, _)| *a).collect()
    }

    /// Midpoints of the chains the map reverses onto themselves.
    pub fn fixed_midpoints(&self, cx: &MetrizedComplex) -> Vec<Point> {
        self.chain_map
            .iter()
            .enumerate()
            .filter(|(i, (j, rev))| i == j && *rev)
            .map(|(i, _)| self.smoothing.point_at(cx, i, self.smoothing.chains[i].length / 2))
            .collect()
    }

    pub fn apply(&self, cx: &MetrizedComplex, p: &Point) -> Point {
        if let Point::Component(v, c) = *p {
            if let Some(s) = self.component_sums.get(&v) {
                return Point::Component(v, frac(*s - c));
            }
        }
        if let Point::Vertex(v) = *p {
            if let Some(s) = self.component_sums.get(&v) {
                return Point::Component(v, frac(*s));
            }
        }
        match self.smoothing.locate(cx, p) {
            Some((chain, pos)) => {
                let (image, rev) = self.chain_map[chain];
                let len = self.smoothing.chains[chain].length;
                self.smoothing.point_at(cx, image, if rev { len - pos } else { pos })
            }
            None => {
                let v = p.vertex().expect("kept points are vertex points");
                let w = self.vertex_map[&v];
                match *p {
                    Point::Component(_, _) if w == v => *p,
                    _ => Point::Vertex(w),
                }
            }
        }
    }

    /// Whether the quotient of the complex's graph by the map is a tree.
    pub fn quotient_is_tree(&self) -> bool {
        // vertices: kept vertices and chain midpoints; edges: half chains
        let vertex_orbits = self.vertex_map.iter().filter(|(a, b)| a <= b).count()
            + self.chain_map.iter().enumerate().filter(|(i, (j, _))| i <= j).count();
        let mut half_orbits = 0;
        for (i, &(j, rev)) in self.chain_map.iter().enumerate() {
            for side in [false, true] {
                let image = (j, side ^ rev);
                if (i, side) <= image {
                    half_orbits += 1;
                }
            }
        }
        half_orbits + 1 == vertex_orbits
    }
}

fn vertex_involutions(
    cx: &MetrizedComplex,
    kept: &[VertexId],
    at: usize,
    map: &mut BTreeMap<VertexId, VertexId>,
    out: &mut Vec<BTreeMap<VertexId, VertexId>>,
) {
    if at == kept.len() {
        out.push(map.clone());
        return;
    }
    let v = kept[at];
    if map.contains_key(&v) {
        return vertex_involutions(cx, kept, at + 1, map, out);
    }
    for &w in &kept[at..] {
        if map.contains_key(&w) || cx.valence(w) != cx.valence(v) || cx.genus_of(w) != cx.genus_of(v) {
            continue;
        }
        if cx.genus_of(v) == 1 && w != v {
            continue;
        }
        map.insert(v, w);
        map.insert(w, v);
        vertex_involutions(cx, kept, at + 1, map, out);
        map.remove(&v);
        map.remove(&w);
    }
}

fn chain_involutions(
    chains: &[Chain],
    vmap: &BTreeMap<VertexId, VertexId>,
    at: usize,
    map: &mut Vec<Option<(usize, bool)>>,
    out: &mut Vec<Vec<(usize, bool)>>,
) {
    if at == chains.len() {
        out.push(map.iter().map(|m| m.expect("assigned")).collect());
        return;
    }
    if map[at].is_some() {
        return chain_involutions(chains, vmap, at + 1, map, out);
    }
    let c = &chains[at];
    for j in at..chains.len() {
        if map[j].is_some() || chains[j].length != c.length {
            continue;
        }
        let d = &chains[j];
        for rev in [false, true] {
            let (t, h) = if rev { (d.head, d.tail) } else { (d.tail, d.head) };
            if vmap[&c.tail] != t || vmap[&c.head] != h {
                continue;
            }
            map[at] = Some((j, rev));
            map[j] = Some((at, rev));
            chain_involutions(chains, vmap, at + 1, map, out);
            map[at] = None;
            map[j] = None;
        }
    }
}

impl Smoothing {
    /// Whether an edge end lies at the start of its chain (else at the end).
    fn at_chain_start(&self, cx: &MetrizedComplex, end: EdgeEnd) -> bool {
        let (_, start, reversed) = self.edge_chain[end.edge.0];
        let at_tail = end.side == Side::Tail;
        let pos = if at_tail != reversed { start } else { start + cx.length(end.edge) };
        pos.is_zero()
    }

    fn chain_end(&self, chain: usize, at_start: bool) -> EdgeEnd {
        let ch = &self.chains[chain];
        let (edge, reversed, _) = if at_start { ch.pieces[0] } else { *ch.pieces.last().expect("chains are nonempty") };
        let side = if at_start != reversed { Side::Tail } else { Side::Head };
        EdgeEnd { edge, side }
    }
}

/// The sum `s_v` making `q -> s_v - q` swap the nodes as the graph map swaps
/// their edges, for every elliptic component; `None` if some component has
/// no such reflection.
fn component_sums(
    cx: &MetrizedComplex,
    sm: &Smoothing,
    chain_map: &[(usize, bool)],
) -> Option<BTreeMap<VertexId, Rational>> {
    let mut sums = BTreeMap::new();
    for v in cx.genus_one_vertices() {
        let mut s: Option<Rational> = None;
        for &end in cx.ends_at(v) {
            let (chain, _, _) = sm.edge_chain[end.edge.0];
            let (image, rev) = chain_map[chain];
            let image_end = sm.chain_end(image, sm.at_chain_start(cx, end) != rev);
            let pair = frac(cx.node_or_zero(end) + cx.node_or_zero(image_end));
            match s {
                None => s = Some(pair),
                Some(prev) if prev != pair => return None,
                _ => {}
            }
        }
        sums.insert(v, s.unwrap_or_else(Rational::zero));
    }
    Some(sums)
}

/// All involutions fixing every elliptic component, in a fixed order with
/// the identity first.
pub fn involutions(cx: &MetrizedComplex) -> Vec<Involution> {
    let sm = Smoothing::new(cx);
    let mut vmaps = Vec::new();
    vertex_involutions(cx, &sm.kept, 0, &mut BTreeMap::new(), &mut vmaps);
    let mut out = Vec::new();
    for vmap in vmaps {
        let mut cmaps = Vec::new();
        chain_involutions(&sm.chains, &vmap, 0, &mut vec![None; sm.chains.len()], &mut cmaps);
        for cmap in cmaps {
            if let Some(sums) = component_sums(cx, &sm, &cmap) {
                out.push(Involution {
                    smoothing: sm.clone(),
                    vertex_map: vmap.clone(),
                    chain_map: cmap,
                    component_sums: sums,
                });
            }
        }
    }
    out
}
