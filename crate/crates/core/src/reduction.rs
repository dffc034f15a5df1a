//! Reduced divisors via Dhar's burning algorithm, linear equivalence,
//! effectivity and rigidity.

use crate::chips::{Base, Chips, NodeKind, Skeleton};
use crate::function::interval_divisor;
use crate::model::{Divisor, EdgeId, MetrizedComplex, ModelError, Point, VertexId};
use crate::rational::{frac, Rational};
use num_traits::Zero;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("divisor is negative away from the base point")]
    NegativeAwayFromBase,
    #[error("divisor is not effective")]
    NotEffective,
}

/// Closed piece `[from, to]` of an edge (offsets from the tail).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Region {
    pub edge: EdgeId,
    pub from: Rational,
    pub to: Rational,
}

/// Chips leaving the unburnt set: every boundary point sends one chip a
/// distance `epsilon` along each burnt direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiringMove {
    pub epsilon: Rational,
    pub sources: Vec<(Point, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BurnResult {
    pub burnt_points: Vec<Point>,
    pub burnt_segments: Vec<Region>,
    pub unburnt_points: Vec<Point>,
    pub unburnt_segments: Vec<Region>,
    /// Present iff the unburnt set is nonempty.
    pub firing: Option<FiringMove>,
}

impl BurnResult {
    pub fn is_reduced(&self) -> bool {
        self.firing.is_none()
    }
}

struct Burn {
    skeleton: Skeleton,
    burnt_node: Vec<bool>,
    burnt_seg: Vec<bool>,
    /// Burnt segment ends arriving at each node.
    incoming: Vec<Vec<(usize, bool)>>,
}

impl Burn {
    fn all_burnt(&self) -> bool {
        self.burnt_node.iter().all(|b| *b)
    }
}

fn catches_fire(cx: &MetrizedComplex, chips: &Chips, sk: &Skeleton, node: usize, incoming: &[(usize, bool)]) -> bool {
    let k = incoming.len() as i64;
    match sk.nodes[node] {
        NodeKind::Interior(e, off) => chips.interior.get(&(e, off)).copied().unwrap_or(0) < k,
        NodeKind::Vertex(v) => {
            let d = chips.degree[v.0];
            if d != k || cx.genus_of(v) == 0 {
                return d < k;
            }
            // component part minus the burnt nodes must be principal to hold the fire
            let nodes = incoming
                .iter()
                .fold(Rational::zero(), |acc, &(s, at_a)| acc + cx.node_or_zero(sk.end(s, at_a)));
            frac(nodes) != chips.class[v.0]
        }
    }
}

fn burn(cx: &MetrizedComplex, chips: &Chips, base: Base) -> Burn {
    let extra: Vec<_> = match base {
        Base::Interior(e, off) => vec![(e, off)],
        Base::Vertex(_) => vec![],
    };
    let sk = Skeleton::for_chips(cx, chips, &extra);
    let start = sk.node_of(base);
    let mut burnt_node = vec![false; sk.nodes.len()];
    let mut burnt_seg = vec![false; sk.segments.len()];
    let mut incoming = vec![Vec::new(); sk.nodes.len()];
    burnt_node[start] = true;
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        for i in 0..sk.adj[n].len() {
            let (seg, at_a) = sk.adj[n][i];
            if burnt_seg[seg] {
                continue;
            }
            burnt_seg[seg] = true;
            let m = sk.other(seg, at_a);
            if burnt_node[m] {
                continue;
            }
            incoming[m].push((seg, !at_a));
            if catches_fire(cx, chips, &sk, m, &incoming[m]) {
                burnt_node[m] = true;
                stack.push(m);
            }
        }
    }
    Burn {
        skeleton: sk,
        burnt_node,
        burnt_seg,
        incoming,
    }
}

/// Fires the unburnt set by the largest step that keeps the moving chips
/// inside their burnt segments.
fn fire(cx: &MetrizedComplex, chips: &mut Chips, b: &Burn) -> FiringMove {
    let sk = &b.skeleton;
    let boundary: Vec<usize> = (0..sk.nodes.len())
        .filter(|n| !b.burnt_node[*n] && !b.incoming[*n].is_empty())
        .collect();
    let epsilon = boundary
        .iter()
        .flat_map(|n| b.incoming[*n].iter().map(|(s, _)| sk.segments[*s].len))
        .min()
        .expect("unburnt set of a connected complex has a boundary");
    let mut sources = Vec::new();
    for &n in &boundary {
        sources.push((sk.nodes[n].point(), b.incoming[n].len() as i64));
        for &(seg, at_a) in &b.incoming[n] {
            sk.add_at(cx, chips, n, seg, at_a, -1);
            if epsilon == sk.segments[seg].len {
                let m = sk.other(seg, at_a);
                sk.add_at(cx, chips, m, seg, !at_a, 1);
            } else {
                let off = sk.offset_from(seg, at_a, epsilon);
                chips.add_interior(sk.segments[seg].edge, off, 1);
            }
        }
    }
    FiringMove { epsilon, sources }
}

fn deficit(cx: &MetrizedComplex, chips: &Chips, kind: NodeKind) -> i64 {
    match kind {
        NodeKind::Interior(e, off) => (-chips.interior.get(&(e, off)).copied().unwrap_or(0)).max(0),
        NodeKind::Vertex(v) => chips.vertex_deficit(cx, v),
    }
}

/// Makes the divisor effective away from `base` by firing metric balls
/// around the base, farthest deficits first.
fn make_effective_away(cx: &MetrizedComplex, chips: &mut Chips, base: Base) {
    let extra: Vec<_> = match base {
        Base::Interior(e, off) => vec![(e, off)],
        Base::Vertex(_) => vec![],
    };
    loop {
        let sk = Skeleton::for_chips(cx, chips, &extra);
        let root = sk.node_of(base);
        let needy: Vec<(usize, i64)> = (0..sk.nodes.len())
            .filter(|n| *n != root)
            .map(|n| (n, deficit(cx, chips, sk.nodes[n])))
            .filter(|(_, d)| *d > 0)
            .collect();
        if needy.is_empty() {
            return;
        }
        let dist = sk.distances(root);
        let far = needy.iter().map(|(n, _)| dist[*n]).max().unwrap();

        // critical distances: nodes and the farthest point of every segment
        let mut critical: BTreeSet<Rational> = dist.iter().copied().collect();
        for s in &sk.segments {
            let (da, db) = (dist[s.a], dist[s.b]);
            if crate::rational::abs(da - db) < s.len {
                critical.insert((da + db + s.len) / 2);
            }
        }
        let near = *critical.range(..far).next_back().expect("base is at distance 0");
        let eps = far - near;

        let toward = |n: usize| {
            sk.adj[n]
                .iter()
                .filter(|&&(seg, at_a)| {
                    let m = sk.other(seg, at_a);
                    m != n && dist[m] + sk.segments[seg].len == dist[n]
                })
                .count() as i64
        };
        let times = needy
            .iter()
            .filter(|(n, _)| dist[*n] == far)
            .map(|(n, d)| (d + toward(*n) - 1) / toward(*n))
            .max()
            .unwrap();

        // div of min(max(dist - near, 0), eps), applied `times` times
        let clamp = |x: Rational| {
            let y = x - near;
            if y < Rational::zero() {
                Rational::zero()
            } else if y > eps {
                eps
            } else {
                y
            }
        };
        for (i, s) in sk.segments.iter().enumerate() {
            let (da, db) = (dist[s.a], dist[s.b]);
            let along = |t: Rational| (da + t).min(db + s.len - t);
            let mut cuts = vec![Rational::zero(), s.len, (db + s.len - da) / 2];
            for level in [near, far] {
                cuts.push(level - da);
                cuts.push(db + s.len - level);
            }
            let mut cuts: Vec<Rational> = cuts
                .into_iter()
                .filter(|t| *t >= Rational::zero() && *t <= s.len)
                .collect();
            cuts.sort();
            cuts.dedup();
            let profile: Vec<(Rational, Rational)> = cuts.iter().map(|t| (*t, clamp(along(*t)))).collect();
            let part = interval_divisor(&profile).expect("distance slopes are unit");
            sk.add_at(cx, chips, s.a, i, true, part.start * times);
            sk.add_at(cx, chips, s.b, i, false, part.end * times);
            for (t, c) in part.interior {
                chips.add_interior(s.edge, s.start + t, c * times);
            }
        }
    }
}

pub(crate) fn reduce_chips(cx: &MetrizedComplex, mut chips: Chips, base: Base) -> Chips {
    make_effective_away(cx, &mut chips, base);
    loop {
        let b = burn(cx, &chips, base);
        if b.all_burnt() {
            return chips;
        }
        fire(cx, &mut chips, &b);
    }
}

fn anchor_of(cx: &MetrizedComplex, q: &Point) -> Option<(VertexId, Rational)> {
    match *q {
        Point::Component(v, c) if cx.genus_of(v) == 1 => Some((v, c)),
        _ => None,
    }
}

/// One round of Dhar's burning algorithm from `q`.
pub fn dhar_burn(cx: &MetrizedComplex, d: &Divisor, q: &Point) -> Result<BurnResult, ReductionError> {
    cx.validate_divisor(d)?;
    cx.validate_point(q)?;
    let base = Base::of(q);
    let mut chips = Chips::from_divisor(cx, d);
    if !chips.is_effective_away(cx, base) {
        return Err(ReductionError::NegativeAwayFromBase);
    }
    let b = burn(cx, &chips, base);
    let sk = &b.skeleton;
    let region = |i: usize| {
        let s = &sk.segments[i];
        Region {
            edge: s.edge,
            from: s.start,
            to: s.start + s.len,
        }
    };
    let mut result = BurnResult {
        burnt_points: Vec::new(),
        burnt_segments: Vec::new(),
        unburnt_points: Vec::new(),
        unburnt_segments: Vec::new(),
        firing: None,
    };
    for (n, kind) in sk.nodes.iter().enumerate() {
        if b.burnt_node[n] {
            result.burnt_points.push(kind.point());
        } else {
            result.unburnt_points.push(kind.point());
        }
    }
    for i in 0..sk.segments.len() {
        if b.burnt_seg[i] {
            result.burnt_segments.push(region(i));
        } else {
            result.unburnt_segments.push(region(i));
        }
    }
    result.burnt_points.sort();
    result.unburnt_points.sort();
    if !b.all_burnt() {
        result.firing = Some(fire(cx, &mut chips, &b));
    }
    Ok(result)
}

/// The `q`-reduced divisor equivalent to `d`. On the component containing
/// `q` the chips sit at `q`, except possibly one.
pub fn reduce_at(cx: &MetrizedComplex, d: &Divisor, q: &Point) -> Result<Divisor, ReductionError> {
    cx.validate_divisor(d)?;
    cx.validate_point(q)?;
    let chips = reduce_chips(cx, Chips::from_divisor(cx, d), Base::of(q));
    Ok(chips.to_divisor(cx, anchor_of(cx, q)))
}

/// Reduced class data at the first vertex: equal iff the divisors are equivalent.
pub(crate) fn class_key(cx: &MetrizedComplex, chips: Chips) -> Chips {
    reduce_chips(cx, chips, Base::Vertex(VertexId(0)))
}

pub fn is_equivalent(cx: &MetrizedComplex, d: &Divisor, e: &Divisor) -> Result<bool, ReductionError> {
    cx.validate_divisor(d)?;
    cx.validate_divisor(e)?;
    if d.degree() != e.degree() {
        return Ok(false);
    }
    let diff = Chips::from_divisor(cx, &(d - e));
    Ok(class_key(cx, diff) == Chips::zero(cx))
}

pub(crate) fn effective_key(cx: &MetrizedComplex, key: &Chips) -> bool {
    key.vertex_effective(cx, VertexId(0))
}

/// An effective divisor equivalent to `d`, if one exists.
pub fn effective_representative(cx: &MetrizedComplex, d: &Divisor) -> Result<Option<Divisor>, ReductionError> {
    cx.validate_divisor(d)?;
    if d.is_effective() {
        return Ok(Some(d.clone()));
    }
    let key = class_key(cx, Chips::from_divisor(cx, d));
    Ok(effective_key(cx, &key).then(|| key.to_divisor(cx, None)))
}

/// Whether `d` is the only effective divisor in its class. Points on a
/// rational component are identified with each other.
pub fn is_rigid(cx: &MetrizedComplex, d: &Divisor) -> Result<bool, ReductionError> {
    cx.validate_divisor(d)?;
    if !d.is_effective() {
        return Err(ReductionError::NotEffective);
    }
    let chips = Chips::from_divisor(cx, d);
    if cx.genus_one_vertices().any(|v| chips.degree[v.0] > 1) {
        return Ok(false);
    }
    let sk = Skeleton::for_chips(cx, &chips, &[]);
    let mut bases: Vec<Base> = sk
        .nodes
        .iter()
        .map(|k| match *k {
            NodeKind::Vertex(v) => Base::Vertex(v),
            NodeKind::Interior(e, off) => Base::Interior(e, off),
        })
        .collect();
    bases.extend(
        sk.segments
            .iter()
            .map(|s| Base::Interior(s.edge, s.start + s.len / 2)),
    );
    Ok(bases.into_iter().all(|base| burn(cx, &chips, base).all_burnt()))
}

/// A divisor class, identified by its reduced form at the first vertex.
#[derive(Debug, Clone)]
pub struct DivisorClass {
    representative: Divisor,
    key: Chips,
}

impl DivisorClass {
    pub fn of(cx: &MetrizedComplex, d: &Divisor) -> Result<Self, ReductionError> {
        cx.validate_divisor(d)?;
        Ok(DivisorClass {
            representative: d.clone(),
            key: class_key(cx, Chips::from_divisor(cx, d)),
        })
    }

    /// The divisor the class was formed from.
    pub fn representative(&self) -> &Divisor {
        &self.representative
    }

    /// The reduced divisor at the first vertex.
    pub fn canonical_representative(&self, cx: &MetrizedComplex) -> Divisor {
        self.key.to_divisor(cx, None)
    }

    pub fn degree(&self) -> i64 {
        self.key.total_degree()
    }

    pub fn is_effective(&self, cx: &MetrizedComplex) -> bool {
        effective_key(cx, &self.key)
    }
}

impl PartialEq for DivisorClass {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for DivisorClass {}

impl Hash for DivisorClass {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key.hash(state);
    }
}
