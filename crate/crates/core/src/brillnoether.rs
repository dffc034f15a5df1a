//! Brill–Noether ranks of metric graphs, searched over a rational lattice.

use crate::hyperelliptic::{structure_check, HyperellipticError};
use crate::model::{Divisor, MetrizedComplex, Point};
use crate::rank::RankEngine;
use crate::rational::Rational;
use crate::reduction::ReductionError;
use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

pub const DEFAULT_LATTICE: i64 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BnError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Hyperelliptic(#[from] HyperellipticError),
    #[error("only metric graphs are supported")]
    NotAGraph,
    #[error("invalid parameters: {0}")]
    Range(String),
}

type Result<T> = std::result::Result<T, BnError>;

/// Vertices and the points at `k/ell` of the way along each edge.
pub fn lattice_points(cx: &MetrizedComplex, ell: i64) -> Vec<Point> {
    let mut out: Vec<Point> = cx.vertex_ids().map(Point::Vertex).collect();
    for e in cx.edge_ids() {
        for k in 1..ell {
            out.push(Point::Edge(e, cx.length(e) * Rational::new(k, ell)));
        }
    }
    out
}

fn check_graph(cx: &MetrizedComplex, ell: i64) -> Result<()> {
    if !cx.is_graph() {
        return Err(BnError::NotAGraph);
    }
    if ell < 1 {
        return Err(BnError::Range(format!("lattice refinement {ell} must be positive")));
    }
    Ok(())
}

fn divisors_of_degree(lattice: &[Point], degree: usize) -> impl Iterator<Item = Divisor> + '_ {
    lattice
        .iter()
        .combinations_with_replacement(degree)
        .map(Divisor::from_points)
}

fn contained_with(engine: &RankEngine, lattice: &[Point], e: &Divisor, d: i64, r: i64) -> Result<bool> {
    let missing = (d - e.degree()) as usize;
    for f in divisors_of_degree(lattice, missing) {
        if engine.rank_value(&(e + &f))? >= r {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether `E + F` has rank at least `r` for some effective `F` of degree
/// `d - deg E` supported on the lattice. A negative answer only covers
/// that lattice.
pub fn contained_in_rank_class(cx: &MetrizedComplex, e: &Divisor, d: i64, r: i64, ell: i64) -> Result<bool> {
    check_graph(cx, ell)?;
    cx.validate_divisor(e).map_err(ReductionError::from)?;
    if !e.is_effective() {
        return Err(ReductionError::NotEffective.into());
    }
    if e.degree() > d {
        return Err(BnError::Range(format!("deg E = {} exceeds d = {d}", e.degree())));
    }
    let engine = RankEngine::new(cx);
    contained_with(&engine, &lattice_points(cx, ell), e, d, r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnResult {
    pub rho: i64,
    pub ell: i64,
    /// Backed by the hyperelliptic formula rather than the lattice alone.
    pub exact: bool,
    /// Lattice divisors of degree `r + rho + 1` contained in no divisor of
    /// degree `d` and rank `r`.
    pub failing: Vec<Divisor>,
}

fn rho_search(cx: &MetrizedComplex, d: i64, r: i64, ell: i64) -> Result<(i64, Vec<Divisor>)> {
    let lattice = lattice_points(cx, ell);
    let engine = RankEngine::new(cx);
    let mut rho = -1;
    while r + rho < d {
        let candidates: Vec<Divisor> = divisors_of_degree(&lattice, (r + rho + 1) as usize).collect();
        let verdicts: Vec<bool> = candidates
            .par_iter()
            .map(|e| contained_with(&engine, &lattice, e, d, r))
            .collect::<Result<_>>()?;
        let failing: Vec<Divisor> = candidates
            .into_iter()
            .zip(verdicts)
            .filter(|(_, ok)| !ok)
            .map(|(e, _)| e)
            .collect();
        if !failing.is_empty() {
            return Ok((rho, failing));
        }
        rho += 1;
    }
    Ok((rho, Vec::new()))
}

fn martens_range(cx: &MetrizedComplex, d: i64, r: i64) -> bool {
    0 < 2 * r && 2 * r <= d && d < cx.genus() as i64
}

/// The largest `rho` such that every lattice divisor of degree `r + rho`
/// lies in a divisor of degree `d` and rank `r`.
pub fn bn_rank(cx: &MetrizedComplex, d: i64, r: i64, ell: i64) -> Result<BnResult> {
    check_graph(cx, ell)?;
    if !(0 <= r && r <= d) {
        return Err(BnError::Range(format!("need 0 <= r <= d, got r = {r}, d = {d}")));
    }
    let (rho, failing) = rho_search(cx, d, r, ell)?;
    let exact = martens_range(cx, d, r) && rho == d - 2 * r && cx.genus() >= 2 && structure_check(cx)?.passed;
    Ok(BnResult {
        rho,
        ell,
        exact,
        failing,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MartensReport {
    pub rho: i64,
    pub bound: i64,
    pub hyperelliptic: bool,
    pub within_bound: bool,
    /// `rho = d - 2r`, as forced for hyperelliptic graphs.
    pub tight: bool,
    /// Equality on a graph that is not hyperelliptic.
    pub conjecture_relevant: bool,
    pub holds: bool,
}

pub fn martens_check(cx: &MetrizedComplex, d: i64, r: i64, ell: i64) -> Result<MartensReport> {
    check_graph(cx, ell)?;
    if !martens_range(cx, d, r) {
        return Err(BnError::Range(format!(
            "need 0 < 2r <= d < g, got r = {r}, d = {d}, g = {}",
            cx.genus()
        )));
    }
    let result = bn_rank(cx, d, r, ell)?;
    let bound = d - 2 * r;
    let hyperelliptic = structure_check(cx)?.passed;
    let within_bound = result.rho <= bound;
    let tight = result.rho == bound;
    Ok(MartensReport {
        rho: result.rho,
        bound,
        hyperelliptic,
        within_bound,
        tight,
        conjecture_relevant: tight && !hyperelliptic,
        holds: within_bound && (!hyperelliptic || tight),
    })
}
