//! Small complexes used throughout the tests and examples.

use crate::model::{ComplexSpec, EdgeSpec, MetrizedComplex, VertexSpec};
use crate::rational::{int, rat, Rational};

fn vertex(name: &str, genus: i64) -> VertexSpec {
    VertexSpec {
        name: name.into(),
        genus,
    }
}

fn edge(name: &str, tail: &str, head: &str, length: Rational) -> EdgeSpec {
    EdgeSpec {
        name: name.into(),
        tail: tail.into(),
        head: head.into(),
        length,
        nodes: vec![],
    }
}

fn build(spec: ComplexSpec) -> MetrizedComplex {
    MetrizedComplex::build(&spec).expect("catalog complexes are valid")
}

/// One rational vertex with a unit loop.
pub fn circle() -> MetrizedComplex {
    build(ComplexSpec {
        name: "loop".into(),
        vertices: vec![vertex("v", 0)],
        edges: vec![edge("e", "v", "v", int(1))],
    })
}

/// `n` unit edges between two rational vertices.
pub fn banana(n: usize) -> MetrizedComplex {
    build(ComplexSpec {
        name: format!("banana{n}"),
        vertices: vec![vertex("v1", 0), vertex("v2", 0)],
        edges: (1..=n)
            .map(|i| edge(&format!("e{i}"), "v1", "v2", int(1)))
            .collect(),
    })
}

pub fn theta() -> MetrizedComplex {
    let mut cx = banana(3).to_spec();
    cx.name = "theta".into();
    build(cx)
}

/// Complete graph on `n` rational vertices with unit edges.
pub fn complete(n: usize) -> MetrizedComplex {
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            edges.push(edge(&format!("e{i}{j}"), &format!("v{i}"), &format!("v{j}"), int(1)));
        }
    }
    build(ComplexSpec {
        name: format!("k{n}"),
        vertices: (1..=n).map(|i| vertex(&format!("v{i}"), 0)).collect(),
        edges,
    })
}

/// A chain of two bananas between elliptic ends:
/// `v1 =(e1,e2)= v2 =(e3,e4)= v3`, with `v1`, `v3` of genus 1 and nodes
/// at 0 and 1/2 on each elliptic component. Genus 4.
pub fn elliptic_chain() -> MetrizedComplex {
    let mut e = vec![
        edge("e1", "v1", "v2", int(1)),
        edge("e2", "v1", "v2", int(1)),
        edge("e3", "v2", "v3", int(1)),
        edge("e4", "v2", "v3", int(1)),
    ];
    e[0].nodes = vec![("v1".into(), int(0))];
    e[1].nodes = vec![("v1".into(), rat(1, 2))];
    e[2].nodes = vec![("v3".into(), int(0))];
    e[3].nodes = vec![("v3".into(), rat(1, 2))];
    build(ComplexSpec {
        name: "chain".into(),
        vertices: vec![vertex("v1", 1), vertex("v2", 0), vertex("v3", 1)],
        edges: e,
    })
}
