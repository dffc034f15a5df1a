//! Divisors on metric graphs and metrized complexes whose components have
//! genus 0 or 1: reduced divisors, ranks, hyperelliptic structure and
//! Brill–Noether ranks, all in exact rational arithmetic.

pub mod brillnoether;
pub mod catalog;
mod chips;
pub mod dsl;
pub mod function;
pub mod hyperelliptic;
pub mod involution;
pub mod model;
pub mod rank;
pub mod rational;
pub mod reduction;
pub mod refine;

pub use brillnoether::{bn_rank, contained_in_rank_class, martens_check, BnError, BnResult, MartensReport};
pub use function::{apply_function, ComplexFunction};
pub use hyperelliptic::{
    clifford_witness, construct_pq, decompose, g12, iota, phi_map, structure_check, CliffordWitness,
    CliffordWitnessContext, Decomposition, HyperellipticError, StructureReport,
};
pub use involution::{involutions, Involution};
pub use model::{
    ComplexSpec, Divisor, Edge, EdgeEnd, EdgeId, EdgeSpec, MetrizedComplex, ModelError, Point,
    Side, Vertex, VertexId, VertexSpec,
};
pub use rank::{
    rank, rank_determining_set, representative_containing, representative_containing_with_ranks,
    verify_clifford, verify_riemann_roch, CliffordReport, RankCertificate, RankEngine,
    RiemannRochReport,
};
pub use rational::Rational;
pub use reduction::{
    dhar_burn, effective_representative, is_equivalent, is_rigid, reduce_at, BurnResult,
    DivisorClass, FiringMove, ReductionError, Region,
};
pub use refine::{refine, Refinement};
