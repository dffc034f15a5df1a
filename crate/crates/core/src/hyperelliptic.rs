//! Hyperelliptic structure: involutions with tree quotient, the g¹₂, the
//! decomposition `D ~ r·g¹₂ + E`, and the Clifford witness pipeline.

use crate::involution::{involutions, Involution};
use crate::model::{Divisor, EdgeId, MetrizedComplex, Point, VertexId};
use crate::rank::{avoiding_nodes, rank_determining_set, spanning_tree, RankEngine};
use crate::rational::{frac, rat};
use crate::reduction::{effective_representative, is_equivalent, is_rigid, reduce_at, DivisorClass, ReductionError};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use thiserror::Error;

pub const PQ_SEARCH_BUDGET: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HyperellipticError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("genus {genus} is too small")]
    GenusTooSmall { genus: usize },
    #[error("complex is not hyperelliptic")]
    NotHyperelliptic,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no rigid pair found in {trials} trials")]
    SearchExhausted { trials: usize },
    #[error("inconsistent result: {0}")]
    Inconsistent(String),
}

type Result<T> = std::result::Result<T, HyperellipticError>;

#[derive(Debug, Clone)]
pub struct StructureReport {
    pub passed: bool,
    pub involution: Option<Involution>,
    /// `p + ι(p)` for the first vertex point `p`, when the genus is at least 2.
    pub g12: Option<Divisor>,
    pub notes: Vec<String>,
}

fn first_point(cx: &MetrizedComplex) -> Point {
    let v = VertexId(0);
    if cx.genus_of(v) == 1 {
        Point::Component(v, rat(0, 1))
    } else {
        Point::Vertex(v)
    }
}

/// Looks for an involution with tree quotient fixing every elliptic
/// component; for genus at least 2 the resulting `p + ι(p)` must have rank 1.
pub fn structure_check(cx: &MetrizedComplex) -> Result<StructureReport> {
    let mut notes = vec![
        "elliptic components: paired nodes checked through equal coordinate sums".to_string(),
        "components of genus at least 2: none, condition vacuous".to_string(),
    ];
    let candidates: Vec<Involution> = involutions(cx).into_iter().filter(|i| i.quotient_is_tree()).collect();
    if candidates.is_empty() {
        notes.push("no involution has a tree quotient".into());
    }
    let engine = RankEngine::new(cx);
    for inv in candidates {
        if cx.genus() < 2 {
            return Ok(StructureReport {
                passed: true,
                involution: Some(inv),
                g12: None,
                notes,
            });
        }
        let p = first_point(cx);
        let d = Divisor::from_points(&[p, inv.apply(cx, &p)]);
        if engine.rank_value(&d)? == 1 {
            return Ok(StructureReport {
                passed: true,
                involution: Some(inv),
                g12: Some(d),
                notes,
            });
        }
        notes.push("tree-quotient involution whose pair class has rank 0 skipped".into());
    }
    Ok(StructureReport {
        passed: false,
        involution: None,
        g12: None,
        notes,
    })
}

fn hyperelliptic(cx: &MetrizedComplex) -> Result<(Involution, Divisor)> {
    if cx.genus() < 2 {
        return Err(HyperellipticError::GenusTooSmall { genus: cx.genus() });
    }
    let report = structure_check(cx)?;
    match (report.involution, report.g12) {
        (Some(i), Some(d)) => Ok((i, d)),
        _ => Err(HyperellipticError::NotHyperelliptic),
    }
}

/// The unique class of degree 2 and rank 1, if there is one.
pub fn g12(cx: &MetrizedComplex) -> Result<Option<DivisorClass>> {
    match hyperelliptic(cx) {
        Ok((_, d)) => Ok(Some(DivisorClass::of(cx, &d)?)),
        Err(HyperellipticError::NotHyperelliptic) => Ok(None),
        Err(e) => Err(e),
    }
}

/// The hyperelliptic involution. A point on a swapped rational component
/// goes to the vertex point of the image component.
pub fn iota(cx: &MetrizedComplex, p: &Point) -> Result<Point> {
    cx.validate_point(p).map_err(ReductionError::from)?;
    let report = structure_check(cx)?;
    match report.involution {
        Some(inv) if report.passed => Ok(inv.apply(cx, p)),
        _ => Err(HyperellipticError::NotHyperelliptic),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub rank: i64,
    /// A point fixed by the involution; `2·fixed_point` lies in the g¹₂.
    pub fixed_point: Point,
    /// The divisor reduced at the fixed point.
    pub reduced: Divisor,
    /// `reduced - 2r·fixed_point`.
    pub residual: Divisor,
}

fn fixed_point(cx: &MetrizedComplex, inv: &Involution) -> Point {
    if let Some(v) = inv.fixed_vertices().first() {
        return match inv.component_sum(*v) {
            Some(s) => Point::Component(*v, frac(s / 2)),
            None => Point::Vertex(*v),
        };
    }
    *inv
        .fixed_midpoints(cx)
        .first()
        .expect("an involution with tree quotient has a fixed point")
}

/// Writes `D` as `r·g¹₂ + residual` with `r = rank(D)`.
pub fn decompose(cx: &MetrizedComplex, d: &Divisor) -> Result<Decomposition> {
    let (inv, g12) = hyperelliptic(cx)?;
    let g = cx.genus() as i64;
    if d.degree() > g {
        return Err(HyperellipticError::Precondition(format!("degree {} exceeds genus {g}", d.degree())));
    }
    let engine = RankEngine::new(cx);
    let rank = engine.rank_value(d)?;
    if rank < 0 {
        return Err(HyperellipticError::Precondition("divisor has no effective representative".into()));
    }
    let p = fixed_point(cx, &inv);
    let reduced = reduce_at(cx, d, &p)?;
    if reduced.coefficient(&p) < 2 * rank {
        return Err(HyperellipticError::Inconsistent(format!(
            "coefficient {} at the fixed point is below {}",
            reduced.coefficient(&p),
            2 * rank
        )));
    }
    let mut residual = reduced.clone();
    residual.add_chips(p, -2 * rank);
    if !is_equivalent(cx, d, &(&g12.scaled(rank) + &residual))? {
        return Err(HyperellipticError::Inconsistent("decomposition does not reassemble".into()));
    }
    Ok(Decomposition {
        rank,
        fixed_point: p,
        reduced,
        residual,
    })
}

fn node_free(cx: &MetrizedComplex, d: &Divisor) -> bool {
    d.iter().all(|(p, _)| match *p {
        Point::Component(v, c) if cx.genus_of(v) == 1 => cx.ends_at(v).iter().all(|e| cx.node_or_zero(*e) != c),
        Point::Vertex(v) => cx.genus_of(v) == 0,
        _ => true,
    })
}

fn multiplicity_free(d: &Divisor) -> bool {
    d.iter().all(|(_, c)| c == 1)
}

fn elliptic_degrees_at_most_one(cx: &MetrizedComplex, d: &Divisor) -> bool {
    cx.genus_one_vertices()
        .all(|v| d.iter().filter(|(p, _)| p.vertex() == Some(v)).map(|(_, c)| c).sum::<i64>() <= 1)
}

struct PqCandidate {
    p: Divisor,
    q: Divisor,
    extension: Vec<Point>,
}

fn pq_trial(cx: &MetrizedComplex, rng: &mut ChaCha8Rng, cotree: &[EdgeId]) -> Result<Option<PqCandidate>> {
    let h = cotree.len();
    let elliptic: Vec<VertexId> = cx.genus_one_vertices().collect();
    let mut chosen = cotree.to_vec();
    chosen.shuffle(rng);
    let graph_count = if h >= 2 { h - 1 } else { h };
    let mut points: Vec<Point> = chosen[..graph_count]
        .iter()
        .map(|e| Point::Edge(*e, cx.length(*e) * rat(2 * rng.gen_range(0..8) + 1, 16)))
        .collect();
    let skip = if h >= 2 { None } else { elliptic.first().copied() };
    for &v in &elliptic {
        if Some(v) == skip {
            continue;
        }
        let nodes: Vec<_> = cx.ends_at(v).iter().map(|e| cx.node_or_zero(*e)).collect();
        let free: Vec<_> = (0..32).map(|k| rat(k, 32)).filter(|c| !nodes.contains(c)).collect();
        points.push(Point::Component(v, *free.choose(rng).expect("a free coordinate")));
    }
    let p = Divisor::from_points(&points);
    let Some(q) = effective_representative(cx, &(&cx.canonical_divisor() - &p))? else {
        return Ok(None);
    };
    let ok = multiplicity_free(&q)
        && p.support().all(|x| q.coefficient(x) == 0)
        && node_free(cx, &p)
        && node_free(cx, &q)
        && elliptic_degrees_at_most_one(cx, &p)
        && elliptic_degrees_at_most_one(cx, &q)
        && is_rigid(cx, &p)?
        && is_rigid(cx, &q)?;
    if !ok {
        return Ok(None);
    }
    let mut extension = Vec::new();
    if h >= 2 {
        let e = chosen[h - 1];
        extension.push(Point::Edge(e, cx.length(e) / 2));
    } else if let Some(v) = skip {
        extension.push(Point::Component(v, avoiding_nodes(cx, v)));
    }
    extension.push(rank_determining_set(cx)[h]);
    Ok(Some(PqCandidate { p, q, extension }))
}

fn search_pq(cx: &MetrizedComplex, seed: u64) -> Result<PqCandidate> {
    let g = cx.genus();
    if g <= 1 {
        return Err(HyperellipticError::GenusTooSmall { genus: g });
    }
    let (_, cotree) = spanning_tree(cx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..PQ_SEARCH_BUDGET {
        if let Some(c) = pq_trial(cx, &mut rng, &cotree)? {
            return Ok(c);
        }
    }
    Err(HyperellipticError::SearchExhausted { trials: PQ_SEARCH_BUDGET })
}

/// Rigid effective divisors `P`, `Q` of degree `g - 1` with `P + Q ~ K`,
/// disjoint, multiplicity free, and meeting each elliptic component in at
/// most one point away from the nodes.
pub fn construct_pq(cx: &MetrizedComplex, seed: u64) -> Result<(Divisor, Divisor)> {
    let c = search_pq(cx, seed)?;
    Ok((c.p, c.q))
}

#[derive(Debug, Clone)]
pub struct CliffordWitnessContext {
    pub p: Divisor,
    pub q: Divisor,
    pub delta: Divisor,
    pub r: i64,
    /// Points completing `P` to a rank-determining set.
    pub extension: Vec<Point>,
}

impl CliffordWitnessContext {
    /// Checks `deg δ = 2r`, `rank δ = r`, `0 < r < g - 1` and builds `P`, `Q`.
    pub fn new(cx: &MetrizedComplex, delta: &Divisor, r: i64, seed: u64) -> Result<Self> {
        let g = cx.genus() as i64;
        if !(0 < r && r < g - 1) {
            return Err(HyperellipticError::Precondition(format!("need 0 < r < g - 1, got r = {r}, g = {g}")));
        }
        if delta.degree() != 2 * r {
            return Err(HyperellipticError::Precondition(format!("degree {} is not 2r", delta.degree())));
        }
        let actual = RankEngine::new(cx).rank_value(delta)?;
        if actual != r {
            return Err(HyperellipticError::Precondition(format!("rank is {actual}, not {r}")));
        }
        let c = search_pq(cx, seed)?;
        Ok(CliffordWitnessContext {
            p: c.p,
            q: c.q,
            delta: delta.clone(),
            r,
            extension: c.extension,
        })
    }

    pub fn p_points(&self) -> Vec<Point> {
        self.p.support().copied().collect()
    }

    pub fn q_points(&self) -> Vec<Point> {
        self.q.support().copied().collect()
    }

    /// All `r`-subsets of `P` in lexicographic order.
    pub fn subsets(&self) -> Vec<Vec<Point>> {
        self.p_points().into_iter().combinations(self.r as usize).collect()
    }
}

/// The `r` points `B` of `Q` with `A + B` in the class of `δ`.
pub fn phi_map(cx: &MetrizedComplex, ctx: &CliffordWitnessContext, a: &[Point]) -> Result<Vec<Point>> {
    let set: BTreeSet<Point> = a.iter().copied().collect();
    if set.len() != ctx.r as usize || !set.iter().all(|x| ctx.p.coefficient(x) == 1) {
        return Err(HyperellipticError::Precondition("A must be an r-subset of P".into()));
    }
    let rest = &ctx.delta - &Divisor::from_points(a);
    let b = effective_representative(cx, &rest)?
        .ok_or_else(|| HyperellipticError::Inconsistent("no representative through A although rank is r".into()))?;
    if !b.le(&ctx.q) {
        return Err(HyperellipticError::Inconsistent(format!(
            "representative {} is not supported on Q",
            cx.format_divisor(&b)
        )));
    }
    Ok(b.points())
}

#[derive(Debug, Clone)]
pub struct CliffordWitness {
    pub class: DivisorClass,
    /// `p_1 + q_1`.
    pub representative: Divisor,
    pub pairs: Vec<(Point, Point)>,
    /// Rank-determining set used for the rank check.
    pub rds: Vec<Point>,
    pub context: CliffordWitnessContext,
}

/// From a class of degree `2r` and rank `r` with `0 < r < g - 1`, builds a
/// class of degree 2 and rank 1 by pairing each `p_i` in `P` with the point
/// `q_i` of `Q` left over by the representatives avoiding `p_i`.
pub fn clifford_witness(cx: &MetrizedComplex, delta: &Divisor, r: i64, seed: u64) -> Result<CliffordWitness> {
    let ctx = CliffordWitnessContext::new(cx, delta, r, seed)?;
    let subsets = ctx.subsets();
    let images: Vec<Vec<Point>> = subsets
        .par_iter()
        .map(|a| phi_map(cx, &ctx, a))
        .collect::<Result<_>>()?;
    let q_points = ctx.q_points();
    let mut pairs = Vec::new();
    for pi in ctx.p_points() {
        let union: BTreeSet<Point> = subsets
            .iter()
            .zip(&images)
            .filter(|(a, _)| !a.contains(&pi))
            .flat_map(|(_, b)| b.iter().copied())
            .collect();
        let left: Vec<Point> = q_points.iter().filter(|q| !union.contains(q)).copied().collect();
        if left.len() != 1 {
            return Err(HyperellipticError::Inconsistent(format!(
                "{} points of Q are left for {}",
                left.len(),
                cx.format_point(&pi)
            )));
        }
        pairs.push((pi, left[0]));
    }
    let representative = Divisor::from_points(&[pairs[0].0, pairs[0].1]);
    for (a, b) in &pairs[1..] {
        if !is_equivalent(cx, &representative, &Divisor::from_points(&[*a, *b]))? {
            return Err(HyperellipticError::Inconsistent("pairs p_i + q_i are not equivalent".into()));
        }
    }
    let mut rds = ctx.p_points();
    rds.extend(ctx.extension.iter().copied());
    let custom = RankEngine::with_rds(cx, rds.clone()).rank_value(&representative)?;
    let default = RankEngine::new(cx).rank_value(&representative)?;
    if custom != 1 || default != 1 {
        return Err(HyperellipticError::Inconsistent(format!(
            "pair class has rank {custom} on the extended set and {default} on the default set"
        )));
    }
    Ok(CliffordWitness {
        class: DivisorClass::of(cx, &representative)?,
        representative,
        pairs,
        rds,
        context: ctx,
    })
}
