//! Metrized complexes, points and divisors.
//!
//! A complex is a connected metric graph with rational edge lengths and a
//! component curve of genus 0 or 1 at every vertex. Genus-1 components are
//! modeled by the circle group `R/Z`; each edge end at such a vertex carries
//! a node coordinate on the circle.

use crate::rational::{frac, Rational};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::{Add, AddAssign, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Tail,
    Head,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Tail => Side::Head,
            Side::Head => Side::Tail,
        }
    }
}

/// One end of an edge. A loop contributes two ends at the same vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeEnd {
    pub edge: EdgeId,
    pub side: Side,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("complex has no vertices")]
    Empty,
    #[error("duplicate identifier `{0}`")]
    DuplicateName(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("vertex `{vertex}` has genus {genus}; only genus 0 and 1 are supported")]
    GenusOutOfRange { vertex: String, genus: i64 },
    #[error("edge `{0}` has nonpositive length")]
    NonPositiveLength(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("edge `{edge}` is missing a node coordinate at genus-1 vertex `{vertex}`")]
    MissingNode { edge: String, vertex: String },
    #[error("edge `{edge}` has a node clause for `{vertex}`, which is not one of its endpoints")]
    NodeNotIncident { edge: String, vertex: String },
    #[error("node coordinate {coord} on `{vertex}` is outside [0, 1)")]
    NodeOutOfRange { vertex: String, coord: String },
    #[error("duplicate node coordinate {coord} on `{vertex}`")]
    DuplicateNode { vertex: String, coord: String },
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
}

/// Parsed, unvalidated description of a complex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComplexSpec {
    pub name: String,
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSpec {
    pub name: String,
    pub genus: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub name: String,
    pub tail: String,
    pub head: String,
    pub length: Rational,
    /// `(vertex, coordinate)` node clauses in source order. For a loop the
    /// first clause belongs to the tail end and the second to the head end.
    pub nodes: Vec<(String, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub genus: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub tail: VertexId,
    pub head: VertexId,
    pub length: Rational,
    pub tail_node: Option<Rational>,
    pub head_node: Option<Rational>,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    pub fn endpoint(&self, side: Side) -> VertexId {
        match side {
            Side::Tail => self.tail,
            Side::Head => self.head,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetrizedComplex {
    name: String,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<EdgeEnd>>,
}

impl MetrizedComplex {
    /// Validates a parsed description. Vertex and edge ids follow declaration order.
    pub fn build(spec: &ComplexSpec) -> Result<Self, ModelError> {
        if spec.vertices.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut names = BTreeSet::new();
        let mut index = BTreeMap::new();
        let mut vertices = Vec::with_capacity(spec.vertices.len());
        for (i, v) in spec.vertices.iter().enumerate() {
            if !names.insert(v.name.clone()) {
                return Err(ModelError::DuplicateName(v.name.clone()));
            }
            if !(0..=1).contains(&v.genus) {
                return Err(ModelError::GenusOutOfRange {
                    vertex: v.name.clone(),
                    genus: v.genus,
                });
            }
            index.insert(v.name.clone(), VertexId(i));
            vertices.push(Vertex {
                name: v.name.clone(),
                genus: v.genus as u8,
            });
        }

        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::UnknownVertex(name.to_string()))
        };
        let mut edges = Vec::with_capacity(spec.edges.len());
        for e in &spec.edges {
            if !names.insert(e.name.clone()) {
                return Err(ModelError::DuplicateName(e.name.clone()));
            }
            if !e.length.is_positive() {
                return Err(ModelError::NonPositiveLength(e.name.clone()));
            }
            let tail = lookup(&e.tail)?;
            let head = lookup(&e.head)?;
            let mut tail_node = None;
            let mut head_node = None;
            for (vname, coord) in &e.nodes {
                let v = lookup(vname)?;
                let slot = if v == tail && (v != head || tail_node.is_none()) {
                    &mut tail_node
                } else if v == head {
                    &mut head_node
                } else {
                    return Err(ModelError::NodeNotIncident {
                        edge: e.name.clone(),
                        vertex: vname.clone(),
                    });
                };
                if *coord < Rational::zero() || *coord >= Rational::from_integer(1) {
                    return Err(ModelError::NodeOutOfRange {
                        vertex: vname.clone(),
                        coord: crate::rational::format_rational(coord),
                    });
                }
                *slot = Some(*coord);
            }
            // node coordinates on rational components carry no information
            if vertices[tail.0].genus == 0 {
                tail_node = None;
            }
            if vertices[head.0].genus == 0 {
                head_node = None;
            }
            for (v, node) in [(tail, tail_node), (head, head_node)] {
                if vertices[v.0].genus == 1 && node.is_none() {
                    return Err(ModelError::MissingNode {
                        edge: e.name.clone(),
                        vertex: vertices[v.0].name.clone(),
                    });
                }
            }
            edges.push(Edge {
                name: e.name.clone(),
                tail,
                head,
                length: e.length,
                tail_node,
                head_node,
            });
        }

        let mut incidence = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            incidence[e.tail.0].push(EdgeEnd {
                edge: EdgeId(i),
                side: Side::Tail,
            });
            incidence[e.head.0].push(EdgeEnd {
                edge: EdgeId(i),
                side: Side::Head,
            });
        }

        let complex = MetrizedComplex {
            name: spec.name.clone(),
            vertices,
            edges,
            incidence,
        };
        for v in complex.vertex_ids() {
            let mut seen = BTreeSet::new();
            for end in complex.ends_at(v) {
                if let Some(c) = complex.node(*end) {
                    if !seen.insert(c) {
                        return Err(ModelError::DuplicateNode {
                            vertex: complex.vertex(v).name.clone(),
                            coord: crate::rational::format_rational(&c),
                        });
                    }
                }
            }
        }
        if !complex.is_connected() {
            return Err(ModelError::Disconnected);
        }
        Ok(complex)
    }

    /// Inverse of [`MetrizedComplex::build`].
    pub fn to_spec(&self) -> ComplexSpec {
        ComplexSpec {
            name: self.name.clone(),
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexSpec {
                    name: v.name.clone(),
                    genus: i64::from(v.genus),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| {
                    let mut nodes = Vec::new();
                    if let Some(c) = e.tail_node {
                        nodes.push((self.vertices[e.tail.0].name.clone(), c));
                    }
                    if let Some(c) = e.head_node {
                        nodes.push((self.vertices[e.head.0].name.clone(), c));
                    }
                    EdgeSpec {
                        name: e.name.clone(),
                        tail: self.vertices[e.tail.0].name.clone(),
                        head: self.vertices[e.head.0].name.clone(),
                        length: e.length,
                        nodes,
                    }
                })
                .collect(),
        }
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([VertexId(0)]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for end in &self.incidence[v.0] {
                let w = self.far_vertex(*end);
                if !seen[w.0] {
                    seen[w.0] = true;
                    queue.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v.name == name).map(VertexId)
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name).map(EdgeId)
    }

    pub fn genus_of(&self, v: VertexId) -> u8 {
        self.vertices[v.0].genus
    }

    pub fn length(&self, e: EdgeId) -> Rational {
        self.edges[e.0].length
    }

    /// Edge ends incident to `v`; loops appear twice.
    pub fn ends_at(&self, v: VertexId) -> &[EdgeEnd] {
        &self.incidence[v.0]
    }

    pub fn valence(&self, v: VertexId) -> usize {
        self.incidence[v.0].len()
    }

    pub fn end_vertex(&self, end: EdgeEnd) -> VertexId {
        self.edges[end.edge.0].endpoint(end.side)
    }

    pub fn far_vertex(&self, end: EdgeEnd) -> VertexId {
        self.edges[end.edge.0].endpoint(end.side.opposite())
    }

    /// Node coordinate of an edge end; `None` at rational components.
    pub fn node(&self, end: EdgeEnd) -> Option<Rational> {
        let e = &self.edges[end.edge.0];
        match end.side {
            Side::Tail => e.tail_node,
            Side::Head => e.head_node,
        }
    }

    /// Node coordinate, or 0 when the end sits on a rational component.
    pub fn node_or_zero(&self, end: EdgeEnd) -> Rational {
        self.node(end).unwrap_or_else(Rational::zero)
    }

    /// First Betti number `h` of the underlying graph.
    pub fn first_betti(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    /// `g = h + sum of component genera`.
    pub fn genus(&self) -> usize {
        self.first_betti() + self.vertices.iter().map(|v| v.genus as usize).sum::<usize>()
    }

    pub fn genus_one_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertex_ids().filter(|v| self.genus_of(*v) == 1)
    }

    /// True when every component is rational, i.e. the complex is a metric graph.
    pub fn is_graph(&self) -> bool {
        self.vertices.iter().all(|v| v.genus == 0)
    }

    pub fn validate_point(&self, p: &Point) -> Result<(), ModelError> {
        match *p {
            Point::Vertex(v) if v.0 < self.vertices.len() => Ok(()),
            Point::Edge(e, off) if e.0 < self.edges.len() => {
                if off.is_positive() && off < self.edges[e.0].length {
                    Ok(())
                } else {
                    Err(ModelError::InvalidPoint(format!(
                        "offset {} is not interior to edge `{}`",
                        crate::rational::format_rational(&off),
                        self.edges[e.0].name
                    )))
                }
            }
            Point::Component(v, c) if v.0 < self.vertices.len() => {
                if c >= Rational::zero() && c < Rational::from_integer(1) {
                    Ok(())
                } else {
                    Err(ModelError::InvalidPoint(format!(
                        "component coordinate {} outside [0, 1)",
                        crate::rational::format_rational(&c)
                    )))
                }
            }
            _ => Err(ModelError::InvalidPoint("unknown vertex or edge id".into())),
        }
    }

    pub fn validate_divisor(&self, d: &Divisor) -> Result<(), ModelError> {
        d.support().try_for_each(|p| self.validate_point(p))
    }

    /// Point at distance `offset` from the tail of `e`, with the endpoints
    /// mapped to vertex points.
    pub fn point_on_edge(&self, e: EdgeId, offset: Rational) -> Point {
        let edge = &self.edges[e.0];
        if offset.is_zero() {
            Point::Vertex(edge.tail)
        } else if offset == edge.length {
            Point::Vertex(edge.head)
        } else {
            Point::Edge(e, offset)
        }
    }

    pub fn midpoint(&self, e: EdgeId) -> Point {
        Point::Edge(e, self.edges[e.0].length / 2)
    }

    /// Canonical divisor: `(val(v) - 2) v` at rational components and the sum
    /// of the nodes at genus-1 components.
    pub fn canonical_divisor(&self) -> Divisor {
        let mut k = Divisor::new();
        for v in self.vertex_ids() {
            if self.genus_of(v) == 1 {
                for end in self.ends_at(v) {
                    k.add_chips(Point::Component(v, self.node_or_zero(*end)), 1);
                }
            } else {
                k.add_chips(Point::Vertex(v), self.valence(v) as i64 - 2);
            }
        }
        k
    }

    /// Human-readable location in the `.tdc` location syntax.
    pub fn format_point(&self, p: &Point) -> String {
        use crate::rational::format_rational as f;
        match *p {
            Point::Vertex(v) => self.vertices[v.0].name.clone(),
            Point::Edge(e, off) => format!("{}({})", self.edges[e.0].name, f(&off)),
            Point::Component(v, c) => format!("{}[{}]", self.vertices[v.0].name, f(&c)),
        }
    }

    pub fn format_divisor(&self, d: &Divisor) -> String {
        if d.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (p, c)) in d.iter().enumerate() {
            let term = self.format_point(p);
            if i == 0 {
                match c {
                    1 => out.push_str(&term),
                    -1 => out.push_str(&format!("-{term}")),
                    _ => out.push_str(&format!("{c}*{term}")),
                }
            } else {
                let sign = if c < 0 { '-' } else { '+' };
                match c.abs() {
                    1 => out.push_str(&format!(" {sign} {term}")),
                    a => out.push_str(&format!(" {sign} {a}*{term}")),
                }
            }
        }
        out
    }
}

/// A location on a complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    /// A model vertex. On a genus-1 component this stands for coordinate 0.
    Vertex(VertexId),
    /// Interior edge point, offset measured from the edge's tail.
    Edge(EdgeId, Rational),
    /// A point on the component at a vertex. On rational components the
    /// coordinate is only a label.
    Component(VertexId, Rational),
}

impl Point {
    /// Vertex whose component contains this point, if any.
    pub fn vertex(&self) -> Option<VertexId> {
        match *self {
            Point::Vertex(v) | Point::Component(v, _) => Some(v),
            Point::Edge(..) => None,
        }
    }

    pub fn component(v: VertexId, c: Rational) -> Point {
        Point::Component(v, frac(c))
    }
}

/// Finitely supported integer combination of points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Divisor {
    terms: BTreeMap<Point, i64>,
}

impl Divisor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point(p: Point) -> Self {
        let mut d = Self::new();
        d.add_chips(p, 1);
        d
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Point, i64)>) -> Self {
        let mut d = Self::new();
        for (p, c) in terms {
            d.add_chips(p, c);
        }
        d
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Self {
        Self::from_terms(points.into_iter().map(|p| (*p, 1)))
    }

    pub fn add_chips(&mut self, p: Point, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(p).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.remove(&p);
        }
    }

    pub fn coefficient(&self, p: &Point) -> i64 {
        self.terms.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn is_effective(&self) -> bool {
        self.terms.values().all(|c| *c >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = &Point> {
        self.terms.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, i64)> {
        self.terms.iter().map(|(p, c)| (p, *c))
    }

    /// Points listed with multiplicity; negative coefficients are skipped.
    pub fn points(&self) -> Vec<Point> {
        self.terms
            .iter()
            .flat_map(|(p, c)| std::iter::repeat_n(*p, (*c).max(0) as usize))
            .collect()
    }

    pub fn scaled(&self, k: i64) -> Divisor {
        Divisor::from_terms(self.terms.iter().map(|(p, c)| (*p, c * k)))
    }

    /// `self <= other` coefficientwise.
    pub fn le(&self, other: &Divisor) -> bool {
        (other - self).is_effective()
    }

    /// Coefficientwise minimum.
    pub fn meet(&self, other: &Divisor) -> Divisor {
        let keys: BTreeSet<_> = self.terms.keys().chain(other.terms.keys()).collect();
        Divisor::from_terms(
            keys.into_iter()
                .map(|p| (*p, self.coefficient(p).min(other.coefficient(p)))),
        )
    }

    /// Coefficientwise maximum.
    pub fn join(&self, other: &Divisor) -> Divisor {
        let keys: BTreeSet<_> = self.terms.keys().chain(other.terms.keys()).collect();
        Divisor::from_terms(
            keys.into_iter()
                .map(|p| (*p, self.coefficient(p).max(other.coefficient(p)))),
        )
    }
}

impl AddAssign<&Divisor> for Divisor {
    fn add_assign(&mut self, rhs: &Divisor) {
        for (p, c) in &rhs.terms {
            self.add_chips(*p, *c);
        }
    }
}

impl Add<&Divisor> for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Divisor> for &Divisor {
    type Output = Divisor;
    fn sub(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, c) in &rhs.terms {
            out.add_chips(*p, -c);
        }
        out
    }
}

impl Neg for &Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        self.scaled(-1)
    }
}

impl FromIterator<(Point, i64)> for Divisor {
    fn from_iter<I: IntoIterator<Item = (Point, i64)>>(iter: I) -> Self {
        Divisor::from_terms(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn theta() -> MetrizedComplex {
        let spec = ComplexSpec {
            name: "theta".into(),
            vertices: vec![
                VertexSpec { name: "v1".into(), genus: 0 },
                VertexSpec { name: "v2".into(), genus: 0 },
            ],
            edges: (1..=3)
                .map(|i| EdgeSpec {
                    name: format!("e{i}"),
                    tail: "v1".into(),
                    head: "v2".into(),
                    length: int(1),
                    nodes: vec![],
                })
                .collect(),
        };
        MetrizedComplex::build(&spec).unwrap()
    }

    #[test]
    fn theta_genus_and_canonical() {
        let cx = theta();
        assert_eq!(cx.first_betti(), 2);
        assert_eq!(cx.genus(), 2);
        let k = cx.canonical_divisor();
        assert_eq!(
            k,
            Divisor::from_points(&[Point::Vertex(VertexId(0)), Point::Vertex(VertexId(1))])
        );
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = theta().to_spec();
        spec.vertices[0].genus = 2;
        assert!(matches!(
            MetrizedComplex::build(&spec),
            Err(ModelError::GenusOutOfRange { genus: 2, .. })
        ));

        let mut spec = theta().to_spec();
        spec.edges[1].length = int(0);
        assert_eq!(
            MetrizedComplex::build(&spec),
            Err(ModelError::NonPositiveLength("e2".into()))
        );

        let mut spec = theta().to_spec();
        spec.vertices.push(VertexSpec { name: "lonely".into(), genus: 0 });
        assert_eq!(MetrizedComplex::build(&spec), Err(ModelError::Disconnected));

        let mut spec = theta().to_spec();
        spec.vertices[0].genus = 1;
        assert!(matches!(
            MetrizedComplex::build(&spec),
            Err(ModelError::MissingNode { .. })
        ));
        for e in &mut spec.edges {
            e.nodes.push(("v1".into(), rat(1, 2)));
        }
        assert!(matches!(
            MetrizedComplex::build(&spec),
            Err(ModelError::DuplicateNode { .. })
        ));
    }

    #[test]
    fn divisor_arithmetic() {
        let a = Point::Vertex(VertexId(0));
        let b = Point::Edge(EdgeId(0), rat(1, 2));
        let d = Divisor::from_terms([(a, 2), (b, -1)]);
        assert_eq!(d.degree(), 1);
        assert!(!d.is_effective());
        let e = Divisor::from_terms([(a, 1), (b, 1)]);
        assert_eq!(d.meet(&e), Divisor::from_terms([(a, 1), (b, -1)]));
        assert_eq!(d.join(&e), Divisor::from_terms([(a, 2), (b, 1)]));
        assert!((&d - &d).is_zero());
        assert!(Divisor::point(a).le(&e));
        assert!(!e.le(&Divisor::point(a)));
    }

    #[test]
    fn point_validation() {
        let cx = theta();
        assert!(cx.validate_point(&Point::Edge(EdgeId(0), rat(1, 3))).is_ok());
        assert!(cx.validate_point(&Point::Edge(EdgeId(0), int(1))).is_err());
        assert!(cx.validate_point(&Point::Edge(EdgeId(7), rat(1, 3))).is_err());
        assert!(cx.validate_point(&Point::Component(VertexId(1), int(1))).is_err());
    }
}
