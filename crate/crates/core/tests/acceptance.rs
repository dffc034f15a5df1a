mod common;

use common::oracle::FiniteGraph;
use common::{random_complex, random_divisor, random_point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};
use tdw_core::brillnoether::{bn_rank, contained_in_rank_class, martens_check};
use tdw_core::catalog::{banana, circle, complete, theta};
use tdw_core::hyperelliptic::{
    clifford_witness, decompose, g12, phi_map, structure_check, CliffordWitnessContext,
};
use tdw_core::rank::{verify_clifford_with, verify_riemann_roch_with};
use tdw_core::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

struct Fig {
    cx: MetrizedComplex,
    doc: dsl::ComplexDocument,
}

impl Fig {
    fn load() -> Self {
        let doc = dsl::parse(include_str!("../fixtures/fig1.tdc")).expect("fixture parses");
        Fig {
            cx: doc.complex.clone(),
            doc,
        }
    }

    fn div(&self, names: &[&str]) -> Divisor {
        let pts: Vec<Point> = names.iter().map(|n| self.doc.point(n).expect("named point")).collect();
        Divisor::from_points(&pts)
    }

    fn four_x(&self) -> Divisor {
        self.div(&["x", "x", "x", "x"])
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Result<(), String>) -> Outcome {
    let start = Instant::now();
    f()?;
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(format!("{:.2}s", took.as_secs_f64()))
}

fn criterion_1() -> Outcome {
    let f = Fig::load();
    timed(Duration::from_secs(30), || {
        let r = rank(&f.cx, &f.four_x()).map_err(err)?.rank;
        ensure(r == 2, || format!("rank {r}"))
    })
}

fn criterion_2() -> Outcome {
    let f = Fig::load();
    let d = f.four_x();
    for (e, want) in [
        (["p1", "p2"], ["p1", "p2", "q1", "q2"]),
        (["p2", "p3"], ["p2", "p3", "q2", "q3"]),
    ] {
        let got = representative_containing(&f.cx, &d, &f.div(&e)).map_err(err)?;
        ensure(got.as_ref() == Some(&f.div(&want)), || {
            format!("through {e:?}: {:?}", got.map(|g| f.cx.format_divisor(&g)))
        })?;
    }
    let chain = [["p1", "q1"], ["p2", "q2"], ["p", "q"], ["p3", "q3"], ["p4", "q4"]];
    for w in chain.windows(2) {
        let eq = is_equivalent(&f.cx, &f.div(&w[0]), &f.div(&w[1])).map_err(err)?;
        ensure(eq, || format!("{:?} !~ {:?}", w[0], w[1]))?;
    }
    Ok("2 representatives, 4 links".into())
}

fn criterion_3() -> Outcome {
    let f = Fig::load();
    timed(Duration::from_secs(60), || {
        let w = clifford_witness(&f.cx, &f.four_x(), 2, 0).map_err(err)?;
        let want = DivisorClass::of(&f.cx, &f.div(&["p1", "q1"])).map_err(err)?;
        ensure(w.class == want, || "class differs from [p1+q1]".into())?;
        ensure(w.representative.degree() == 2, || "degree".into())?;
        let r = rank(&f.cx, &w.representative).map_err(err)?.rank;
        ensure(r == 1, || format!("rank {r}"))
    })
}

fn criteria_4_5() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut rr_cases, mut special) = (0, 0);
    let mut rr_fail = None;
    let mut cl_fail = None;
    for _ in 0..20 {
        let cx = random_complex(&mut rng, 5, false);
        let engine = RankEngine::new(&cx);
        let g = cx.genus() as i64;
        for _ in 0..10 {
            let deg = rng.gen_range(-2..=2 * g);
            let d = random_divisor(&mut rng, &cx, deg, 4);
            match verify_riemann_roch_with(&engine, &d) {
                Ok(rep) if rep.holds => rr_cases += 1,
                other => {
                    rr_fail.get_or_insert(format!("{other:?} for {}", cx.format_divisor(&d)));
                }
            }
            match verify_clifford_with(&engine, &d) {
                Ok(cl) if cl.holds => special += cl.special as usize,
                other => {
                    cl_fail.get_or_insert(format!("{other:?} for {}", cx.format_divisor(&d)));
                }
            }
        }
    }
    let rr = match rr_fail {
        None => Ok(format!("{rr_cases} divisors on 20 complexes")),
        Some(m) => Err(m),
    };
    let cl = match cl_fail {
        None if special > 0 => Ok(format!("{special} special classes")),
        None => Err("no special classes sampled".into()),
        Some(m) => Err(m),
    };
    (rr, cl)
}

fn criterion_6() -> Outcome {
    let f = Fig::load();
    let fixtures = [theta(), banana(4), f.cx];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    let mut by_rank = [0usize; 3];
    for cx in &fixtures {
        let g = cx.genus() as i64;
        let pencil = g12(cx).map_err(err)?.ok_or("no g12")?.representative().clone();
        for i in 0..20 {
            let d_deg = if i % 4 == 0 { g } else { rng.gen_range(0..=g) };
            let r = if i % 2 == 0 { d_deg / 2 } else { rng.gen_range(0..=d_deg / 2) };
            let mut d = pencil.scaled(r);
            for _ in 0..d_deg - 2 * r {
                d.add_chips(random_point(&mut rng, cx, 4), 1);
            }
            let true_rank = rank(cx, &d).map_err(err)?.rank;
            let dec = decompose(cx, &d).map_err(err)?;
            ensure(dec.rank == true_rank, || {
                format!("{}: rank {} vs {}", cx.name(), dec.rank, true_rank)
            })?;
            ensure(dec.reduced.coefficient(&dec.fixed_point) >= 2 * dec.rank, || {
                format!("{}: coefficient at fixed point", cx.name())
            })?;
            let rebuilt = &pencil.scaled(dec.rank) + &dec.residual;
            ensure(is_equivalent(cx, &d, &rebuilt).map_err(err)?, || {
                format!("{}: D !~ r*g12 + residual for {}", cx.name(), cx.format_divisor(&d))
            })?;
            by_rank[dec.rank.min(2) as usize] += 1;
            checked += 1;
        }
    }
    Ok(format!("{checked} classes, ranks 0/1/2: {}/{}/{}", by_rank[0], by_rank[1], by_rank[2]))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut cases = 0;
    for cx in [circle(), theta(), banana(4), complete(4)] {
        let g = FiniteGraph::subdivide(&cx, 2);
        let engine = RankEngine::new(&cx);
        let genus = cx.genus() as i64;
        for _ in 0..50 {
            let deg = rng.gen_range(-1..=genus + 1);
            let d = random_divisor(&mut rng, &cx, deg, 2);
            let e = random_divisor(&mut rng, &cx, deg, 2);
            let dv = g.vector(&d).ok_or("off lattice")?;
            let ev = g.vector(&e).ok_or("off lattice")?;
            let ours = engine.rank_value(&d).map_err(err)?;
            ensure(ours == g.rank(&dv), || format!("{}: rank of {}", cx.name(), cx.format_divisor(&d)))?;
            let eq = is_equivalent(&cx, &d, &e).map_err(err)?;
            ensure(eq == g.equivalent(&dv, &ev), || format!("{}: equivalence", cx.name()))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases agree"))
}

fn criterion_8() -> Outcome {
    let f = Fig::load();
    let ctx = CliffordWitnessContext::new(&f.cx, &f.four_x(), 2, 0).map_err(err)?;
    let subsets = ctx.subsets();
    ensure(ctx.p_points().len() == 3 && subsets.len() == 3, || "|P| != 3".into())?;
    let images: Vec<BTreeSet<Point>> = subsets
        .iter()
        .map(|a| phi_map(&f.cx, &ctx, a).map(|b| b.into_iter().collect()))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let sources: Vec<BTreeSet<Point>> = subsets.iter().map(|a| a.iter().copied().collect()).collect();
    let mut families = 0;
    for mask in 1u32..(1 << subsets.len()) {
        let pick = |sets: &[BTreeSet<Point>]| -> (usize, usize) {
            let chosen: Vec<&BTreeSet<Point>> =
                (0..sets.len()).filter(|i| mask & (1 << i) != 0).map(|i| &sets[i]).collect();
            let union: BTreeSet<Point> = chosen.iter().flat_map(|s| s.iter().copied()).collect();
            let inter = chosen[1..]
                .iter()
                .fold(chosen[0].clone(), |acc, s| acc.intersection(s).copied().collect());
            (inter.len(), union.len())
        };
        ensure(pick(&images) == pick(&sources), || format!("family {mask:03b}"))?;
        families += 1;
    }
    Ok(format!("{families} families"))
}

fn criterion_9() -> Outcome {
    let b4 = bn_rank(&banana(4), 2, 1, 2).map_err(err)?;
    ensure(b4.rho == 0 && b4.exact, || format!("B4 rho {} exact {}", b4.rho, b4.exact))?;
    let k4 = complete(4);
    let m = martens_check(&k4, 2, 1, 2).map_err(err)?;
    ensure(m.within_bound && m.holds, || format!("K4 {m:?}"))?;
    ensure(!structure_check(&k4).map_err(err)?.passed, || "K4 passed structure check".into())?;
    let pencil = contained_in_rank_class(&k4, &Divisor::new(), 2, 1, 2).map_err(err)?;
    ensure(!pencil, || "K4 has a lattice g12".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut graphs = 0;
    while graphs < 10 {
        let cx = random_complex(&mut rng, 4, true);
        let g = cx.genus() as i64;
        if g < 3 {
            continue;
        }
        for d in 2..g {
            for r in 1..=d / 2 {
                let m = martens_check(&cx, d, r, 2).map_err(err)?;
                ensure(m.within_bound, || format!("rho {} > {} on {:?}", m.rho, m.bound, cx.to_spec()))?;
            }
        }
        graphs += 1;
    }
    Ok(format!("B4 rho 0, K4 rho {}, {graphs} random graphs", m.rho))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut cases = 0;
    while cases < 500 {
        let cx = random_complex(&mut rng, 4, false);
        for _ in 0..10 {
            let deg = rng.gen_range(-1..=cx.genus() as i64 + 2);
            let d = random_divisor(&mut rng, &cx, deg, 4);
            let q = random_point(&mut rng, &cx, 4);
            let q2 = random_point(&mut rng, &cx, 4);
            let red = reduce_at(&cx, &d, &q).map_err(err)?;
            ensure(reduce_at(&cx, &red, &q).map_err(err)? == red, || "not idempotent".into())?;
            ensure(is_equivalent(&cx, &d, &red).map_err(err)?, || "class changed".into())?;
            let other = reduce_at(&cx, &d, &q2).map_err(err)?;
            let again = reduce_at(&cx, &other, &q).map_err(err)?;
            let graph_part = |x: &Divisor| -> Vec<(Point, i64)> {
                x.iter()
                    .filter(|(p, _)| !matches!(p, Point::Component(..)))
                    .map(|(p, c)| (*p, c))
                    .collect()
            };
            ensure(graph_part(&again) == graph_part(&red), || {
                format!("graph parts differ: {} vs {}", cx.format_divisor(&again), cx.format_divisor(&red))
            })?;
            cases += 1;
        }
    }
    let th = theta();
    let v1 = Divisor::point(Point::Vertex(VertexId(0)));
    let v12 = &v1 + &Divisor::point(Point::Vertex(VertexId(1)));
    ensure(is_rigid(&th, &v1).map_err(err)?, || "v1 not rigid".into())?;
    ensure(!is_rigid(&th, &v12).map_err(err)?, || "v1+v2 rigid".into())?;
    Ok(format!("{cases} cases"))
}

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    })
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let (c4, c5) = guarded(|| Ok(criteria_4_5())).unwrap_or_else(|e| (Err(e.clone()), Err(e)));
    let results = [
        guarded(criterion_1),
        guarded(criterion_2),
        guarded(criterion_3),
        c4,
        c5,
        guarded(criterion_6),
        guarded(criterion_7),
        guarded(criterion_8),
        guarded(criterion_9),
        guarded(criterion_10),
    ];
    let mut failed = 0;
    for (i, res) in results.iter().enumerate() {
        match res {
            Ok(detail) => println!("criterion {}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL ({why})", i + 1)
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
