//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use common::gen::{
    bockstein, build, check_hermite, check_les, check_minors, check_smith, complex_spec, cone_ses, free_complex,
    matrix, scenario_spec,
};
use common::*;
use lowterm::diagrams::{
    build_main_diagram, build_variant_diagram, chase, nodes_agree, verify, CheckKind, ChaseError, ChasePosition,
    Status, VariantChoice,
};
use lowterm::dsl::{parse, serialize};
use lowterm::fgab::enumerate_elements;
use lowterm::grpmod::{builtin_group, inflation, FiniteGroup};
use lowterm::linalg::IntMatrix;
use lowterm::resolutions::{classical_restriction, ext_groups, group_cohomology, CohomologyMethod};
use lowterm::scenario::{builtin_scenario, builtin_scenarios, Scenario, BUILTIN_NAMES};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fresh(name: &str) -> Scenario {
    builtin_scenario(name).expect("builtin")
}

fn s_err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn low_term_exactness() -> Outcome {
    let mut worst = Duration::ZERO;
    for name in BUILTIN_NAMES {
        let start = Instant::now();
        let s = fresh(name);
        let st = s.setup().map_err(s_err)?;
        for t in 1..=3 {
            let seq = st.low_term_sequence(t).map_err(s_err)?;
            let ex = seq.exactness();
            ensure(ex.len() == 5 && ex.iter().all(|b| *b), format!("{name} t={t}: {ex:?}"))?;
            ensure(seq.maps[0].is_injective(), format!("{name} t={t}: first map not injective"))?;
        }
        let el = start.elapsed();
        ensure(el <= Duration::from_secs(60), format!("{name} took {el:.1?}"))?;
        worst = worst.max(el);
    }
    Ok(format!("4 scenarios × 3 sequences, slowest scenario {worst:.2?}"))
}

fn main_diagram() -> Outcome {
    let mut checks = 0;
    for s in builtin_scenarios() {
        let d = build_main_diagram(&s).map_err(s_err)?;
        let r = verify(&d);
        let failed: Vec<_> = r.failures().collect();
        ensure(r.pass, format!("{}: {failed:?}", s.name))?;
        let squares: Vec<_> = r.checks.iter().filter(|c| c.kind == CheckKind::Square).collect();
        ensure(squares.len() == 12, format!("{}: {} squares", s.name, squares.len()))?;
        ensure(squares.iter().all(|c| c.sign.is_some()), format!("{}: unrecorded sign", s.name))?;
        let app = r.checks.iter().filter(|c| c.pos[0] == 5).count();
        ensure(app == 4 && d.appendage.is_some(), format!("{}: appendage has {app} checks", s.name))?;
        checks += r.checks.len();
    }
    Ok(format!("LIB-0..3 main diagrams, {checks} checks including the appendage"))
}

fn long_rows() -> Outcome {
    let mut n = 0;
    for name in ["LIB-1", "LIB-2"] {
        let s = fresh(name);
        let st = s.setup().map_err(s_err)?;
        for t in 1..=3 {
            for ge1 in [false, true] {
                let seq = st.long_exact_row(t, 3, ge1).map_err(s_err)?;
                ensure(seq.maps[0].is_injective(), format!("{name} t={t} ge1={ge1}: not injective"))?;
                let ex = seq.exactness();
                ensure(ex.iter().all(|b| *b), format!("{name} t={t} ge1={ge1}: {ex:?}"))?;
                n += ex.len();
            }
        }
    }
    Ok(format!("LIB-1, LIB-2, t = 1..3, both rows through i = 3: {n} interior nodes exact"))
}

fn chases() -> Outcome {
    let s = fresh("LIB-1");
    let d = build_main_diagram(&s).map_err(s_err)?;
    let mut summary = Vec::new();
    for pos in [ChasePosition::Left, ChasePosition::Right] {
        let [nb, ng, _] = pos.nodes();
        let k = pos_col(pos);
        let betas = enumerate_elements(d.node(nb.0, nb.1)).map_err(s_err)?;
        let gammas = enumerate_elements(d.node(ng.0, ng.1)).map_err(s_err)?;
        let (mut solved, mut rejected) = (0, 0);
        for b in &betas {
            for g in &gammas {
                // compatibility computed here, independently of the chase
                let hb = d.h[2][k].apply(b).map_err(s_err)?;
                let vg = d.v[1][k + 1].apply(g).map_err(s_err)?;
                let compatible = hb.sub(&vg).map_err(s_err)?.is_zero();
                match chase(&d, pos, b, g) {
                    Ok(c) if compatible => {
                        ensure(c.validate(&d), format!("{pos:?}: certificate fails substitution"))?;
                        solved += 1;
                    }
                    Err(ChaseError::CompatibilityError(_)) if !compatible => rejected += 1,
                    other => return Err(format!("{pos:?}: compatible={compatible} gave {other:?}")),
                }
            }
        }
        ensure(solved > 0, format!("{pos:?}: no compatible pairs"))?;
        summary.push(format!("{pos:?} {solved}/{solved} solved, {rejected} rejected"));
    }
    Ok(format!("LIB-1 {}", summary.join("; ")))
}

fn pos_col(p: ChasePosition) -> usize {
    match p {
        ChasePosition::Left => 1,
        ChasePosition::Right => 2,
    }
}

fn variants() -> Outcome {
    let s = fresh("LIB-1");
    let st = s.setup().map_err(s_err)?;
    let main = build_main_diagram(&s).map_err(s_err)?;
    for ch in VariantChoice::ALL {
        let d = build_variant_diagram(&s, &ch.map(st)).map_err(s_err)?;
        let r = verify(&d);
        ensure(r.pass, format!("{}: {:?}", ch.name(), r.failures().collect::<Vec<_>>()))?;
        match ch {
            VariantChoice::Identity => {
                ensure((0..4).all(|r| d.node(r, 2).is_trivial()), "identity: a G-node is nonzero")?;
            }
            VariantChoice::Stalk0 => ensure(nodes_agree(&main, &d), "stalk0 differs from the main diagram")?,
            VariantChoice::Zero => {
                ensure((0..3).all(|r| d.node(r, 2).is_isomorphic(d.node(r, 1))), "zero: G^p ≇ E^{p+1}_{≤1}")?;
            }
        }
    }
    Ok("LIB-1 identity (G = 0), stalk0 (agrees with main), zero complex".into())
}

fn oracles() -> Outcome {
    let lib = builtin_scenarios();
    for s in &lib {
        let st = s.setup().map_err(s_err)?;
        let ts = [&s.coefficients.c, &s.coefficients.b, &s.coefficients.a];
        for (k, tm) in ts.into_iter().enumerate() {
            let infl = inflation(tm, &s.quotient).map_err(s_err)?;
            let ext = ext_groups(&infl, &s.module, 2).map_err(s_err)?;
            for (i, e) in ext.iter().enumerate() {
                let h = st.e(k + 1, i as i64).map_err(s_err)?;
                ensure(h.is_isomorphic(e), format!("(a) {} t={} i={i}: {} vs {}", s.name, k + 1, h.shape(), e.shape()))?;
            }
            ensure(st.tau_ge2_comparison(k + 1).map_err(s_err)?.is_isomorphism(), format!("(d) {} t={}", s.name, k + 1))?;
        }
        let bar = group_cohomology(&s.module, 3, CohomologyMethod::Bar).map_err(s_err)?;
        let gen = group_cohomology(&s.module, 3, CohomologyMethod::Generic).map_err(s_err)?;
        for i in 0..=3 {
            ensure(bar[i].is_isomorphic(&gen[i]), format!("(b) {} H^{i}", s.name))?;
        }
        ensure(edge_matches_restriction(st)?, format!("(c) {}", s.name))?;
    }
    let mut nonzero = 0;
    for (name, text) in NONZERO_RESTRICTION {
        let s = Scenario::parse(name, text).map_err(s_err)?;
        let res = classical_restriction(&s.module, &s.normal, 1).map_err(s_err)?;
        ensure(!res.is_zero(), format!("(c) {name}: restriction is zero"))?;
        ensure(edge_matches_restriction(s.setup().map_err(s_err)?)?, format!("(c) {name}"))?;
        nonzero += 1;
    }
    Ok(format!(
        "(a) Ext ≅ ℍ for i ≤ 2, (b) bar = generic for i ≤ 3, (c) edge = restriction on {} scenarios ({nonzero} with nonzero restriction), (d) iso",
        lib.len() + nonzero
    ))
}

fn small_values() -> Outcome {
    let c = |n| builtin_group("cyclic", Some(n)).map_err(s_err);
    let c2 = c(2)?;
    // H^1(C2, Z/2) = Z/2
    ensure(h1_by_cocycles(&c2, 2, &[1, 1]) == 2, "H1(C2,Z/2) oracle")?;
    let h = group_cohomology(&trivial_module(&c2, 2), 1, CohomologyMethod::Bar).map_err(s_err)?;
    ensure(shape(&h[1]) == (0, ints(&[2])), format!("H1(C2,Z/2) = {}", h[1].shape()))?;
    // H^2(C2, Z) = Z/2
    ensure(cyclic_integral_cohomology(2, 2) == (0, ints(&[2])), "H2(C2,Z) oracle")?;
    let h = group_cohomology(&trivial_module(&c2, 0), 2, CohomologyMethod::Bar).map_err(s_err)?;
    ensure(shape(&h[2]) == (0, ints(&[2])), format!("H2(C2,Z) = {}", h[2].shape()))?;
    // H^1(C_n, Z) = 0
    for n in 1..=4 {
        let g = c(n)?;
        ensure(z_valued_homs_in_box(&g, 3) == 1, format!("H1(C{n},Z) oracle"))?;
        ensure(cyclic_integral_cohomology(n, 1) == (0, vec![]), format!("H1(C{n},Z) periodic oracle"))?;
        let h = group_cohomology(&trivial_module(&g, 0), 1, CohomologyMethod::Bar).map_err(s_err)?;
        ensure(h[1].is_trivial(), format!("H1(C{n},Z) = {}", h[1].shape()))?;
    }
    // Ext^1_Z(Z/2, Z) = Z/2
    let oracle = homology_by_snf(&IntMatrix::from_rows(&[[2]]), &IntMatrix::zeros(0, 1));
    ensure(oracle == (0, ints(&[2])), "Ext oracle")?;
    let e = FiniteGroup::trivial();
    let ext = ext_groups(&trivial_module(&e, 2), &trivial_module(&e, 0), 1).map_err(s_err)?;
    ensure(shape(&ext[1]) == (0, ints(&[2])), format!("Ext1(Z/2,Z) = {}", ext[1].shape()))?;
    Ok("H1(C2,Z/2)=Z/2, H2(C2,Z)=Z/2, H1(Cn,Z)=0 for n≤4, Ext1(Z/2,Z)=Z/2".into())
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn infrastructure() -> Outcome {
    let mut r = runner(300);
    r.run(&matrix(5, 9), |m| {
        check_smith(&m).and(check_hermite(&m)).map_err(proptest::test_runner::TestCaseError::fail)
    })
    .map_err(|e| format!("SNF/HNF: {e}"))?;
    let mut r = runner(200);
    r.run(&matrix(4, 6), |m| check_minors(&m).map_err(proptest::test_runner::TestCaseError::fail))
        .map_err(|e| format!("determinant divisors: {e}"))?;
    let mut r = runner(120);
    r.run(&(complex_spec(), 2i64..=4, -3i64..=3), |((pieces, ops), m, c)| {
        let (ranks, d) = build(&pieces, &ops);
        let a = free_complex(&ranks, &d, None);
        check_les(&bockstein(&a, &ranks, &d, m))
            .and(check_les(&cone_ses(&a, c)))
            .map_err(proptest::test_runner::TestCaseError::fail)
    })
    .map_err(|e| format!("snake: {e}"))?;
    let mut r = runner(200);
    r.run(&scenario_spec(), |s| {
        let back = parse(&serialize(&s)).map_err(|e| proptest::test_runner::TestCaseError::fail(e.to_string()))?;
        proptest::prop_assert_eq!(back, s);
        Ok(())
    })
    .map_err(|e| format!("DSL: {e}"))?;
    for name in BUILTIN_NAMES {
        let s = fresh(name);
        let again = Scenario::parse(name, &s.to_text()).map_err(s_err)?;
        ensure(again.spec == s.spec, format!("{name} does not round-trip"))?;
    }
    let start = Instant::now();
    for name in BUILTIN_NAMES {
        let s = fresh(name);
        let st = s.setup().map_err(s_err)?;
        let main = verify(&build_main_diagram(&s).map_err(s_err)?);
        ensure(main.pass, format!("{name} main"))?;
        ensure(
            main.checks.iter().filter(|c| c.kind == CheckKind::Chase).all(|c| c.status != Status::Skipped),
            format!("{name}: chase skipped"),
        )?;
        for ch in VariantChoice::ALL {
            let v = verify(&build_variant_diagram(&s, &ch.map(st)).map_err(s_err)?);
            ensure(v.pass, format!("{name} variant {}", ch.name()))?;
        }
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(600), format!("library verify took {el:.1?}"))?;
    Ok(format!(
        "SNF/HNF 300 + minors 200 matrices, 240 snake LES cases, 200 DSL round trips, library verify in {el:.2?}"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("low-term exactness", low_term_exactness),
        ("main diagram", main_diagram),
        ("long exact rows", long_rows),
        ("zig-zag chases", chases),
        ("cone variant", variants),
        ("oracle equivalences", oracles),
        ("known small values", small_values),
        ("infrastructure", infrastructure),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let el = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{el:.2?}]", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{el:.2?}]", k + 1);
            }
        }
    }
    println!("{}/8 criteria pass", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
