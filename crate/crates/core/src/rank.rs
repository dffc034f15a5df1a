//! Ranks via rank-determining sets, representatives through prescribed
//! points, and the Riemann–Roch and Clifford checks.

use crate::chips::Chips;
use crate::model::{Divisor, EdgeId, MetrizedComplex, Point, VertexId};
use crate::rational::{rat, Rational};
use crate::reduction::{class_key, effective_key, effective_representative, ReductionError};
use parking_lot::Mutex;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap, VecDeque};

/// Coordinates tried, in order, for points on elliptic components:
/// 1/3, 2/3, 1/5, 2/5, ...
pub(crate) fn free_coordinates() -> impl Iterator<Item = Rational> {
    (1..).flat_map(|k: i64| {
        let q = 2 * k + 1;
        (1..q).map(move |p| rat(p, q))
    })
}

pub(crate) fn avoiding_nodes(cx: &MetrizedComplex, v: VertexId) -> Rational {
    let nodes: Vec<Rational> = cx.ends_at(v).iter().map(|e| cx.node_or_zero(*e)).collect();
    free_coordinates()
        .find(|c| !nodes.contains(c))
        .expect("finitely many nodes")
}

/// Edges outside a breadth-first spanning tree rooted at the first vertex,
/// and the tree edges, both in id order.
pub(crate) fn spanning_tree(cx: &MetrizedComplex) -> (Vec<EdgeId>, Vec<EdgeId>) {
    let mut seen = vec![false; cx.vertex_count()];
    let mut in_tree = vec![false; cx.edge_count()];
    let mut queue = VecDeque::from([VertexId(0)]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for end in cx.ends_at(v) {
            let w = cx.far_vertex(*end);
            if !seen[w.0] {
                seen[w.0] = true;
                in_tree[end.edge.0] = true;
                queue.push_back(w);
            }
        }
    }
    cx.edge_ids().partition(|e| in_tree[e.0])
}

/// `g + 1` points: a point inside each edge off a spanning tree, one more
/// graph point, and a point avoiding the nodes on each elliptic component.
pub fn rank_determining_set(cx: &MetrizedComplex) -> Vec<Point> {
    let (tree, cotree) = spanning_tree(cx);
    let mut out: Vec<Point> = cotree.iter().map(|e| cx.midpoint(*e)).collect();
    let extra = if let Some(e) = tree.first() {
        cx.midpoint(*e)
    } else if let Some(e) = cotree.first() {
        Point::Edge(*e, cx.length(*e) / 4)
    } else if cx.genus_of(VertexId(0)) == 1 {
        Point::Component(VertexId(0), rat(1, 3))
    } else {
        Point::Vertex(VertexId(0))
    };
    out.push(extra);
    for v in cx.genus_one_vertices() {
        let c = avoiding_nodes(cx, v);
        let p = Point::Component(v, c);
        out.push(if p == extra { Point::Component(v, avoiding_after(cx, v, c)) } else { p });
    }
    out
}

fn avoiding_after(cx: &MetrizedComplex, v: VertexId, skip: Rational) -> Rational {
    let nodes: Vec<Rational> = cx.ends_at(v).iter().map(|e| cx.node_or_zero(*e)).collect();
    free_coordinates()
        .find(|c| *c != skip && !nodes.contains(c))
        .expect("finitely many nodes")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankCertificate {
    pub rank: i64,
    /// `r + 1` points whose removal leaves no effective representative.
    pub failing_points: Vec<Point>,
    /// Effective representatives of `D - p_1 - ... - p_k` for `k = 0..=r`
    /// along `failing_points`.
    pub representatives: Vec<Divisor>,
    /// The reduced form of `D` minus all failing points; it is negative at the
    /// first vertex.
    pub obstruction: Divisor,
}

/// Rank computations over a fixed rank-determining set, memoized on classes.
pub struct RankEngine<'a> {
    cx: &'a MetrizedComplex,
    rds: Vec<Point>,
    memo: Mutex<HashMap<Chips, i64>>,
}

impl<'a> RankEngine<'a> {
    pub fn new(cx: &'a MetrizedComplex) -> Self {
        let rds = rank_determining_set(cx);
        Self::with_rds(cx, rds)
    }

    /// Uses the given points as the rank-determining set. Correctness of the
    /// result depends on that choice.
    pub fn with_rds(cx: &'a MetrizedComplex, rds: Vec<Point>) -> Self {
        RankEngine {
            cx,
            rds,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn complex(&self) -> &MetrizedComplex {
        self.cx
    }

    pub fn rds(&self) -> &[Point] {
        &self.rds
    }

    fn minus(&self, key: &Chips, p: &Point) -> Chips {
        let mut next = key.clone();
        next.add_point(self.cx, p, -1);
        class_key(self.cx, next)
    }

    fn rank_of_key(&self, key: &Chips) -> i64 {
        if let Some(r) = self.memo.lock().get(key) {
            return *r;
        }
        let r = if !effective_key(self.cx, key) {
            -1
        } else {
            // Riemann-Roch floor for the subtracted classes
            let floor = (key.total_degree() - 1 - self.cx.genus() as i64).max(-1);
            let mut best = i64::MAX;
            for p in &self.rds {
                best = best.min(self.rank_of_key(&self.minus(key, p)));
                if best <= floor {
                    break;
                }
            }
            1 + best
        };
        *self.memo.lock().entry(key.clone()).or_insert(r)
    }

    pub fn rank_value(&self, d: &Divisor) -> Result<i64, ReductionError> {
        self.cx.validate_divisor(d)?;
        let key = class_key(self.cx, Chips::from_divisor(self.cx, d));
        if !effective_key(self.cx, &key) {
            return Ok(-1);
        }
        let ranks: Vec<i64> = self
            .rds
            .par_iter()
            .map(|p| self.rank_of_key(&self.minus(&key, p)))
            .collect();
        Ok(1 + ranks.into_iter().min().unwrap_or(-1))
    }

    pub fn rank(&self, d: &Divisor) -> Result<RankCertificate, ReductionError> {
        let rank = self.rank_value(d)?;
        let mut key = class_key(self.cx, Chips::from_divisor(self.cx, d));
        let mut failing_points = Vec::new();
        let mut representatives = Vec::new();
        let mut current = rank;
        while current >= 0 {
            representatives.push(key.to_divisor(self.cx, None));
            let (p, next) = self
                .rds
                .iter()
                .map(|p| (*p, self.minus(&key, p)))
                .find(|(_, next)| self.rank_of_key(next) == current - 1)
                .expect("rank drops by one along some point");
            failing_points.push(p);
            key = next;
            current -= 1;
        }
        Ok(RankCertificate {
            rank,
            failing_points,
            representatives,
            obstruction: key.to_divisor(self.cx, None),
        })
    }
}

pub fn rank(cx: &MetrizedComplex, d: &Divisor) -> Result<RankCertificate, ReductionError> {
    RankEngine::new(cx).rank(d)
}

/// An effective divisor equivalent to `d` that contains `e`, if one exists.
pub fn representative_containing(
    cx: &MetrizedComplex,
    d: &Divisor,
    e: &Divisor,
) -> Result<Option<Divisor>, ReductionError> {
    cx.validate_divisor(e)?;
    if !e.is_effective() {
        return Err(ReductionError::NotEffective);
    }
    Ok(effective_representative(cx, &(d - e))?.map(|rest| &rest + e))
}

/// As [`representative_containing`], additionally requiring the result to
/// have degree at least `ranks[v]` on each listed component.
pub fn representative_containing_with_ranks(
    cx: &MetrizedComplex,
    d: &Divisor,
    e: &Divisor,
    ranks: &BTreeMap<VertexId, i64>,
) -> Result<Option<Divisor>, ReductionError> {
    let found = representative_containing(cx, d, e)?;
    Ok(found.filter(|rep| {
        ranks.iter().all(|(v, r)| {
            let on_component: i64 = rep
                .iter()
                .filter(|(p, _)| matches!(p, Point::Vertex(w) | Point::Component(w, _) if w == v))
                .map(|(_, c)| c)
                .sum();
            on_component >= *r
        })
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiemannRochReport {
    pub degree: i64,
    pub genus: i64,
    pub rank: i64,
    pub dual_rank: i64,
    pub holds: bool,
}

pub fn verify_riemann_roch(cx: &MetrizedComplex, d: &Divisor) -> Result<RiemannRochReport, ReductionError> {
    let engine = RankEngine::new(cx);
    verify_riemann_roch_with(&engine, d)
}

pub fn verify_riemann_roch_with(engine: &RankEngine, d: &Divisor) -> Result<RiemannRochReport, ReductionError> {
    let cx = engine.complex();
    let rank = engine.rank_value(d)?;
    let dual_rank = engine.rank_value(&(&cx.canonical_divisor() - d))?;
    let degree = d.degree();
    let genus = cx.genus() as i64;
    Ok(RiemannRochReport {
        degree,
        genus,
        rank,
        dual_rank,
        holds: rank - dual_rank == degree - genus + 1,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliffordReport {
    pub degree: i64,
    pub rank: i64,
    /// Both `D` and `K - D` have effective representatives.
    pub special: bool,
    pub holds: bool,
}

pub fn verify_clifford(cx: &MetrizedComplex, d: &Divisor) -> Result<CliffordReport, ReductionError> {
    verify_clifford_with(&RankEngine::new(cx), d)
}

pub fn verify_clifford_with(engine: &RankEngine, d: &Divisor) -> Result<CliffordReport, ReductionError> {
    let cx = engine.complex();
    let rank = engine.rank_value(d)?;
    let special = rank >= 0 && effective_representative(cx, &(&cx.canonical_divisor() - d))?.is_some();
    let degree = d.degree();
    Ok(CliffordReport {
        degree,
        rank,
        special,
        holds: !special || degree >= 2 * rank,
    })
}
