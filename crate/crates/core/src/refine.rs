//! Model refinement: subdividing edges at given interior points.

use crate::model::{
    ComplexSpec, Divisor, EdgeId, EdgeSpec, MetrizedComplex, ModelError, Point, VertexId,
    VertexSpec,
};
use crate::rational::Rational;
use std::collections::{BTreeMap, BTreeSet};

/// A refined complex together with the map from points of the original.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub complex: MetrizedComplex,
    /// For each original edge: `(start offset, piece)` in order along the edge.
    pieces: Vec<Vec<(Rational, EdgeId)>>,
    /// Vertices created at split points, keyed by `(edge, offset)`.
    split_vertices: BTreeMap<(EdgeId, Rational), VertexId>,
}

impl Refinement {
    pub fn map_point(&self, p: &Point) -> Point {
        match *p {
            Point::Vertex(v) => Point::Vertex(v),
            Point::Component(v, c) => Point::Component(v, c),
            Point::Edge(e, off) => {
                if let Some(v) = self.split_vertices.get(&(e, off)) {
                    return Point::Vertex(*v);
                }
                let (start, piece) = self.pieces[e.0]
                    .iter()
                    .rev()
                    .find(|(start, _)| *start < off)
                    .copied()
                    .expect("offset is interior");
                Point::Edge(piece, off - start)
            }
        }
    }

    pub fn map_divisor(&self, d: &Divisor) -> Divisor {
        d.iter().map(|(p, c)| (self.map_point(p), c)).collect()
    }
}

fn fresh_name(taken: &mut BTreeSet<String>, base: String) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('_');
    }
    taken.insert(name.clone());
    name
}

/// Subdivides the complex at the given interior edge points; the new
/// vertices carry rational components. Original vertex ids are preserved.
pub fn refine(cx: &MetrizedComplex, points: &[Point]) -> Result<Refinement, ModelError> {
    let mut cuts: BTreeMap<EdgeId, BTreeSet<Rational>> = BTreeMap::new();
    for p in points {
        match *p {
            Point::Edge(e, off) => {
                cx.validate_point(p)?;
                if !cuts.entry(e).or_default().insert(off) {
                    return Err(ModelError::InvalidPoint(format!(
                        "duplicate refinement point {}",
                        cx.format_point(p)
                    )));
                }
            }
            _ => {
                return Err(ModelError::InvalidPoint(format!(
                    "{} is not an interior edge point",
                    cx.format_point(p)
                )))
            }
        }
    }

    let base = cx.to_spec();
    let mut taken: BTreeSet<String> = base
        .vertices
        .iter()
        .map(|v| v.name.clone())
        .chain(base.edges.iter().map(|e| e.name.clone()))
        .collect();
    let mut spec = ComplexSpec {
        name: base.name.clone(),
        vertices: base.vertices.clone(),
        edges: Vec::new(),
    };
    let mut pieces = Vec::with_capacity(cx.edge_count());
    let mut split_vertices = BTreeMap::new();

    for e in cx.edge_ids() {
        let edge = cx.edge(e);
        let orig = &base.edges[e.0];
        let offsets: Vec<Rational> = cuts.get(&e).map(|s| s.iter().copied().collect()).unwrap_or_default();
        if offsets.is_empty() {
            pieces.push(vec![(Rational::from_integer(0), EdgeId(spec.edges.len()))]);
            spec.edges.push(orig.clone());
            continue;
        }
        let mut names = vec![orig.tail.clone()];
        for (k, off) in offsets.iter().enumerate() {
            let name = fresh_name(&mut taken, format!("{}_v{}", orig.name, k + 1));
            split_vertices.insert((e, *off), VertexId(spec.vertices.len()));
            spec.vertices.push(VertexSpec {
                name: name.clone(),
                genus: 0,
            });
            names.push(name);
        }
        names.push(orig.head.clone());
        let mut bounds = vec![Rational::from_integer(0)];
        bounds.extend(offsets.iter().copied());
        bounds.push(edge.length);

        let mut edge_pieces = Vec::new();
        let count = bounds.len() - 1;
        for k in 0..count {
            let mut nodes = Vec::new();
            if k == 0 {
                if let Some(c) = edge.tail_node {
                    nodes.push((orig.tail.clone(), c));
                }
            }
            if k + 1 == count {
                if let Some(c) = edge.head_node {
                    nodes.push((orig.head.clone(), c));
                }
            }
            edge_pieces.push((bounds[k], EdgeId(spec.edges.len())));
            let name = fresh_name(&mut taken, format!("{}_s{}", orig.name, k + 1));
            spec.edges.push(EdgeSpec {
                name,
                tail: names[k].clone(),
                head: names[k + 1].clone(),
                length: bounds[k + 1] - bounds[k],
                nodes,
            });
        }
        pieces.push(edge_pieces);
    }

    Ok(Refinement {
        complex: MetrizedComplex::build(&spec)?,
        pieces,
        split_vertices,
    })
}
