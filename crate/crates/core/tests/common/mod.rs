#![allow(dead_code)]

pub mod oracle;

use rand::seq::SliceRandom;
use rand::Rng;
use tdw_core::rational::{int, rat, Rational};
use tdw_core::*;

/// Random connected complex. With `integral`, every edge has integer length
/// and every component is rational.
pub fn random_complex<R: Rng>(rng: &mut R, max_genus: usize, integral: bool) -> MetrizedComplex {
    loop {
        let n = rng.gen_range(1..=4);
        let genus_one: Vec<bool> = (0..n).map(|_| !integral && rng.gen_bool(0.3)).collect();
        let mut edges = Vec::new();
        for v in 1..n {
            edges.push((rng.gen_range(0..v), v));
        }
        for _ in 0..rng.gen_range(0..=3) {
            edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
        }
        let h = edges.len() + 1 - n;
        let g = h + genus_one.iter().filter(|b| **b).count();
        if g == 0 || g > max_genus {
            continue;
        }
        let lengths = if integral {
            vec![int(1), int(1), int(2)]
        } else {
            vec![rat(1, 2), int(1), int(1), rat(3, 2), int(2)]
        };
        let mut node_pool: Vec<Vec<Rational>> = (0..n)
            .map(|_| {
                let mut pool: Vec<Rational> = (0..8).map(|k| rat(k, 8)).collect();
                pool.shuffle(rng);
                pool
            })
            .collect();
        let spec = ComplexSpec {
            name: "random".into(),
            vertices: (0..n)
                .map(|i| VertexSpec {
                    name: format!("v{i}"),
                    genus: genus_one[i] as i64,
                })
                .collect(),
            edges: edges
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let mut nodes = Vec::new();
                    for v in [a, b] {
                        if genus_one[v] {
                            nodes.push((format!("v{v}"), node_pool[v].pop().unwrap()));
                        }
                    }
                    EdgeSpec {
                        name: format!("e{i}"),
                        tail: format!("v{a}"),
                        head: format!("v{b}"),
                        length: *lengths.choose(rng).unwrap(),
                        nodes,
                    }
                })
                .collect(),
        };
        return MetrizedComplex::build(&spec).expect("generated spec is valid");
    }
}

/// Random point whose edge offsets are multiples of `length / steps`.
pub fn random_point<R: Rng>(rng: &mut R, cx: &MetrizedComplex, steps: i64) -> Point {
    loop {
        if rng.gen_bool(0.4) {
            let v = VertexId(rng.gen_range(0..cx.vertex_count()));
            if cx.genus_of(v) == 1 {
                return Point::Component(v, rat(rng.gen_range(0..8), 8));
            }
            return Point::Vertex(v);
        }
        if cx.edge_count() == 0 {
            continue;
        }
        let e = EdgeId(rng.gen_range(0..cx.edge_count()));
        let k = rng.gen_range(0..=steps);
        return cx.point_on_edge(e, cx.length(e) * rat(k, steps));
    }
}

/// Random divisor of the given degree with a few negative chips mixed in.
pub fn random_divisor<R: Rng>(rng: &mut R, cx: &MetrizedComplex, degree: i64, steps: i64) -> Divisor {
    let negatives = rng.gen_range(0..=2).max(-degree);
    let mut d = Divisor::new();
    for _ in 0..negatives {
        d.add_chips(random_point(rng, cx, steps), -1);
    }
    for _ in 0..degree + negatives {
        d.add_chips(random_point(rng, cx, steps), 1);
    }
    d
}
