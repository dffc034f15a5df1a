//! Rational functions on a complex and their principal divisors.

use crate::model::{Divisor, EdgeId, MetrizedComplex, ModelError, Point, Side, VertexId};
use crate::rational::{format_rational, frac, is_integer, Rational};
use num_traits::Zero;
use std::collections::BTreeMap;

/// Divisor of a piecewise-linear function restricted to one interval.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct IntervalDivisor {
    pub start: i64,
    pub end: i64,
    pub interior: Vec<(Rational, i64)>,
}

/// `div(f) = -(sum of outgoing slopes)` at each break point of the PL
/// function through `breaks` (sorted by position, first and last at the
/// interval ends). Returns the offending slope if one is not an integer.
pub(crate) fn interval_divisor(
    breaks: &[(Rational, Rational)],
) -> Result<IntervalDivisor, Rational> {
    let slopes: Vec<Rational> = breaks
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    if let Some(bad) = slopes.iter().find(|s| !is_integer(s)) {
        return Err(*bad);
    }
    let slope = |i: usize| slopes[i].to_integer();
    let mut out = IntervalDivisor::default();
    if slopes.is_empty() {
        return Ok(out);
    }
    out.start = -slope(0);
    out.end = slope(slopes.len() - 1);
    for i in 1..slopes.len() {
        let c = slope(i - 1) - slope(i);
        if c != 0 {
            out.interior.push((breaks[i].0, c));
        }
    }
    Ok(out)
}

/// Adds the chips an edge end contributes at its vertex: on a genus-1
/// component they sit at the node, otherwise at the vertex.
pub(crate) fn add_at_end(
    cx: &MetrizedComplex,
    d: &mut Divisor,
    e: EdgeId,
    side: Side,
    c: i64,
) {
    let end = crate::model::EdgeEnd { edge: e, side };
    let v = cx.end_vertex(end);
    match cx.node(end) {
        Some(node) => d.add_chips(Point::Component(v, node), c),
        None => d.add_chips(Point::Vertex(v), c),
    }
}

/// A rational function: a continuous piecewise-linear function with integer
/// slopes on the metric graph, plus a principal divisor on each component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexFunction {
    vertex_values: Vec<Rational>,
    edge_breaks: Vec<Vec<(Rational, Rational)>>,
    components: BTreeMap<VertexId, Vec<(Rational, i64)>>,
}

impl ComplexFunction {
    /// `edge_breaks[e]` lists interior `(offset, value)` break points of edge `e`;
    /// values at the endpoints come from `vertex_values`. `components[v]` is a
    /// degree-0 divisor on `C_v` given as `(coordinate, multiplicity)` pairs;
    /// on a genus-1 component it must have coordinate sum 0 mod 1.
    pub fn new(
        cx: &MetrizedComplex,
        vertex_values: Vec<Rational>,
        edge_breaks: Vec<Vec<(Rational, Rational)>>,
        components: BTreeMap<VertexId, Vec<(Rational, i64)>>,
    ) -> Result<Self, ModelError> {
        if vertex_values.len() != cx.vertex_count() || edge_breaks.len() != cx.edge_count() {
            return Err(ModelError::InvalidFunction(
                "value table does not match the complex".into(),
            ));
        }
        let f = ComplexFunction {
            vertex_values,
            edge_breaks,
            components,
        };
        for e in cx.edge_ids() {
            let breaks = f.edge_profile(cx, e);
            if breaks.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(ModelError::InvalidFunction(format!(
                    "break points on `{}` are not strictly inside and increasing",
                    cx.edge(e).name
                )));
            }
            interval_divisor(&breaks).map_err(|s| {
                ModelError::InvalidFunction(format!(
                    "non-integer slope {} on `{}`",
                    format_rational(&s),
                    cx.edge(e).name
                ))
            })?;
        }
        for (v, terms) in &f.components {
            if v.0 >= cx.vertex_count() {
                return Err(ModelError::InvalidFunction("unknown component".into()));
            }
            let degree: i64 = terms.iter().map(|(_, c)| c).sum();
            let sum = terms
                .iter()
                .fold(Rational::zero(), |acc, (x, c)| acc + *x * Rational::from(*c));
            if degree != 0 || (cx.genus_of(*v) == 1 && !frac(sum).is_zero()) {
                return Err(ModelError::InvalidFunction(format!(
                    "component part at `{}` is not principal",
                    cx.vertex(*v).name
                )));
            }
        }
        Ok(f)
    }

    pub fn constant(cx: &MetrizedComplex, c: Rational) -> Self {
        ComplexFunction {
            vertex_values: vec![c; cx.vertex_count()],
            edge_breaks: vec![Vec::new(); cx.edge_count()],
            components: BTreeMap::new(),
        }
    }

    pub fn negated(&self) -> Self {
        ComplexFunction {
            vertex_values: self.vertex_values.iter().map(|x| -*x).collect(),
            edge_breaks: self
                .edge_breaks
                .iter()
                .map(|bs| bs.iter().map(|(s, x)| (*s, -*x)).collect())
                .collect(),
            components: self
                .components
                .iter()
                .map(|(v, t)| (*v, t.iter().map(|(x, c)| (*x, -c)).collect()))
                .collect(),
        }
    }

    pub fn value_at_vertex(&self, v: VertexId) -> Rational {
        self.vertex_values[v.0]
    }

    fn edge_profile(&self, cx: &MetrizedComplex, e: EdgeId) -> Vec<(Rational, Rational)> {
        let edge = cx.edge(e);
        let mut breaks = Vec::with_capacity(self.edge_breaks[e.0].len() + 2);
        breaks.push((Rational::zero(), self.vertex_values[edge.tail.0]));
        breaks.extend(self.edge_breaks[e.0].iter().copied());
        breaks.push((edge.length, self.vertex_values[edge.head.0]));
        breaks
    }

    /// Principal divisor `div(f)`.
    pub fn divisor(&self, cx: &MetrizedComplex) -> Divisor {
        let mut d = Divisor::new();
        for e in cx.edge_ids() {
            let part = interval_divisor(&self.edge_profile(cx, e))
                .expect("slopes validated at construction");
            add_at_end(cx, &mut d, e, Side::Tail, part.start);
            add_at_end(cx, &mut d, e, Side::Head, part.end);
            for (s, c) in part.interior {
                d.add_chips(Point::Edge(e, s), c);
            }
        }
        for (v, terms) in &self.components {
            for (x, c) in terms {
                d.add_chips(Point::Component(*v, frac(*x)), *c);
            }
        }
        d
    }
}

/// `D + div(f)`.
pub fn apply_function(
    cx: &MetrizedComplex,
    d: &Divisor,
    f: &ComplexFunction,
) -> Result<Divisor, ModelError> {
    cx.validate_divisor(d)?;
    if f.vertex_values.len() != cx.vertex_count() || f.edge_breaks.len() != cx.edge_count() {
        return Err(ModelError::InvalidFunction(
            "function belongs to a different complex".into(),
        ));
    }
    Ok(d + &f.divisor(cx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ComplexSpec, EdgeSpec, VertexSpec};
    use crate::rational::{int, rat};

    fn loop_complex() -> MetrizedComplex {
        MetrizedComplex::build(&ComplexSpec {
            name: "loop".into(),
            vertices: vec![VertexSpec { name: "v".into(), genus: 0 }],
            edges: vec![EdgeSpec {
                name: "e".into(),
                tail: "v".into(),
                head: "v".into(),
                length: int(1),
                nodes: vec![],
            }],
        })
        .unwrap()
    }

    #[test]
    fn tent_function_moves_two_chips_to_the_peak() {
        let cx = loop_complex();
        let f = ComplexFunction::new(
            &cx,
            vec![int(0)],
            vec![vec![(rat(1, 2), rat(1, 2))]],
            BTreeMap::new(),
        )
        .unwrap();
        let v = Point::Vertex(VertexId(0));
        let m = Point::Edge(EdgeId(0), rat(1, 2));
        let d = Divisor::from_terms([(v, 2)]);
        let moved = apply_function(&cx, &d, &f).unwrap();
        assert_eq!(moved, Divisor::from_terms([(m, 2)]));
        let back = apply_function(&cx, &moved, &f.negated()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn constant_function_is_identity() {
        let cx = loop_complex();
        let d = Divisor::point(Point::Edge(EdgeId(0), rat(1, 3)));
        let f = ComplexFunction::constant(&cx, rat(5, 7));
        assert_eq!(apply_function(&cx, &d, &f).unwrap(), d);
    }

    #[test]
    fn rejects_fractional_slopes() {
        let cx = loop_complex();
        let err = ComplexFunction::new(
            &cx,
            vec![int(0)],
            vec![vec![(rat(1, 2), rat(1, 4))]],
            BTreeMap::new(),
        );
        assert!(matches!(err, Err(ModelError::InvalidFunction(_))));
    }

    #[test]
    fn interval_divisor_signs() {
        // slope +1 then -1: two chips at the peak, one lost at each end
        let d = interval_divisor(&[(int(0), int(0)), (int(1), int(1)), (int(2), int(0))]).unwrap();
        assert_eq!(d.start, -1);
        assert_eq!(d.end, -1);
        assert_eq!(d.interior, vec![(int(1), 2)]);
    }
}
