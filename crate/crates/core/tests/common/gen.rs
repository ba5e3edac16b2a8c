//! Generators and property checks shared by the proptest suites and the
//! acceptance harness.

use lowterm::complexes::{cone, les_of_ses, shift, ChainMap, CochainComplex, SESOfComplexes};
use lowterm::dsl::{GroupSpec, ModuleSpec, ScenarioSpec, SesSpec, SourceMap};
use lowterm::fgab::{FgAbGroup, FgAbMorphism};
use lowterm::linalg::{hermite_normal_form, int, smith_normal_form, Int, IntMatrix};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use super::determinant_divisors;

pub fn matrix(max_dim: usize, range: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(move |(r, c)| {
        proptest::collection::vec(-range..=range, r * c)
            .prop_map(move |v| IntMatrix::from_fn(r, c, |i, j| int(v[i * c + j])))
    })
}

pub fn is_unimodular(m: &IntMatrix) -> bool {
    m.determinant().map(|d| d.abs().is_one()).unwrap_or(false)
}

fn ensure(ok: bool, what: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

/// Unimodular transforms, `U M V = D`, positive divisors each dividing the
/// next.
pub fn check_smith(m: &IntMatrix) -> Result<(), String> {
    let s = smith_normal_form(m);
    ensure(is_unimodular(&s.u) && is_unimodular(&s.v), "transforms not unimodular")?;
    ensure(s.u.mul(m).mul(&s.v) == s.d_mat, "U M V != D")?;
    ensure(s.u.mul(&s.u_inv).is_identity() && s.v.mul(&s.v_inv).is_identity(), "bad inverses")?;
    ensure(s.d_mat.is_diagonal(), "D not diagonal")?;
    for (i, d) in s.divisors.iter().enumerate() {
        ensure(d.is_positive() && &s.d_mat[(i, i)] == d, "divisor mismatch")?;
    }
    ensure(s.divisors.windows(2).all(|w| w[1].is_multiple_of(&w[0])), "divisibility chain broken")?;
    ensure((s.rank()..m.rows().min(m.cols())).all(|i| s.d_mat[(i, i)].is_zero()), "trailing entries")
}

/// `d_1 ⋯ d_k` equals the gcd of the `k × k` minors.
pub fn check_minors(m: &IntMatrix) -> Result<(), String> {
    let s = smith_normal_form(m);
    let dd = determinant_divisors(m);
    ensure(dd.len() == s.rank(), "rank differs from minors")?;
    let mut prod = Int::one();
    for (k, d) in s.divisors.iter().enumerate() {
        prod *= d;
        ensure(prod == dd[k], "determinant divisor mismatch")?;
    }
    Ok(())
}

/// Row echelon, positive pivots, entries above a pivot reduced into
/// `[0, pivot)`, zero rows last, `U M = H`.
pub fn check_hermite(m: &IntMatrix) -> Result<(), String> {
    let (h, u) = hermite_normal_form(m);
    ensure(is_unimodular(&u), "U not unimodular")?;
    ensure(u.mul(m) == h, "U M != H")?;
    let mut last: Option<usize> = None;
    let mut seen_zero = false;
    for i in 0..h.rows() {
        match (0..h.cols()).find(|&j| !h[(i, j)].is_zero()) {
            None => seen_zero = true,
            Some(j) => {
                ensure(!seen_zero, "zero row above a nonzero row")?;
                ensure(last.is_none_or(|l| j > l), "pivots not increasing")?;
                ensure(h[(i, j)].is_positive(), "negative pivot")?;
                for a in 0..i {
                    ensure(!h[(a, j)].is_negative() && h[(a, j)] < h[(i, j)], "entry above pivot not reduced")?;
                }
                last = Some(j);
            }
        }
    }
    Ok(())
}

pub const DEGREES: usize = 3;

/// A summand `Z` in degree `deg`, or `Z --k--> Z` from `deg` to `deg + 1`.
#[derive(Debug, Clone)]
pub struct Piece {
    deg: usize,
    k: Option<i64>,
}

/// `row i += c row j` on the basis in degree `deg`.
pub type Op = (usize, usize, usize, i64);

fn piece() -> impl Strategy<Value = Piece> {
    (0..DEGREES, prop_oneof![Just(None), (-4i64..=4).prop_map(Some)]).prop_map(|(deg, k)| Piece {
        k: if deg + 1 < DEGREES { k } else { None },
        deg,
    })
}

pub fn complex_spec() -> impl Strategy<Value = (Vec<Piece>, Vec<Op>)> {
    (
        proptest::collection::vec(piece(), 1..5),
        proptest::collection::vec((0..DEGREES, 0..6usize, 0..6usize, -2i64..=2), 0..8),
    )
}

/// Elementary pieces glued, then conjugated degreewise by unimodular
/// matrices.
pub fn build(pieces: &[Piece], ops: &[Op]) -> (Vec<usize>, Vec<IntMatrix>) {
    let mut ranks = vec![0usize; DEGREES];
    let mut at = Vec::new();
    for p in pieces {
        let lo = ranks[p.deg];
        ranks[p.deg] += 1;
        let hi = p.k.map(|_| {
            ranks[p.deg + 1] += 1;
            ranks[p.deg + 1] - 1
        });
        at.push((lo, hi));
    }
    let mut d: Vec<IntMatrix> = (0..DEGREES - 1).map(|n| IntMatrix::zeros(ranks[n + 1], ranks[n])).collect();
    for (p, (lo, hi)) in pieces.iter().zip(&at) {
        if let (Some(k), Some(hi)) = (p.k, hi) {
            d[p.deg][(*hi, *lo)] = int(k);
        }
    }
    // d_n ↦ U_{n+1} d_n U_n^{-1}
    for &(deg, i, j, c) in ops {
        let r = ranks[deg];
        if r < 2 || i % r == j % r {
            continue;
        }
        let (i, j) = (i % r, j % r);
        if deg > 0 {
            d[deg - 1].add_row_multiple(i, j, &int(c));
        }
        if deg + 1 < DEGREES {
            d[deg].add_col_multiple(j, i, &int(-c));
        }
    }
    (ranks, d)
}

pub fn free_complex(ranks: &[usize], d: &[IntMatrix], modulus: Option<i64>) -> CochainComplex {
    let obj = |r: usize| match modulus {
        None => FgAbGroup::free(r),
        Some(m) => FgAbGroup::from_diagonal(&vec![int(m); r]),
    };
    let objects: Vec<FgAbGroup> = ranks.iter().map(|&r| obj(r)).collect();
    let diffs = d
        .iter()
        .enumerate()
        .map(|(n, m)| FgAbMorphism::new(&objects[n], &objects[n + 1], m.clone()).unwrap())
        .collect();
    CochainComplex::plain(0, objects, diffs).unwrap()
}

/// `0 → A --m--> A → A/m → 0`
pub fn bockstein(a: &CochainComplex, ranks: &[usize], d: &[IntMatrix], m: i64) -> SESOfComplexes {
    let q = free_complex(ranks, d, Some(m));
    let times = ChainMap::new(a, a, |n| Some(FgAbMorphism::identity(&a.object(n)).scale(&int(m)))).unwrap();
    let reduce = ChainMap::new(a, &q, |n| {
        let r = a.object(n).ambient_rank();
        Some(FgAbMorphism::new(&a.object(n), &q.object(n), IntMatrix::identity(r)).unwrap())
    })
    .unwrap();
    SESOfComplexes::new(times, reduce).unwrap()
}

/// `0 → X → cone(c·id) → X[1] → 0`
pub fn cone_ses(x: &CochainComplex, c: i64) -> SESOfComplexes {
    let f = ChainMap::new(x, x, |n| Some(FgAbMorphism::identity(&x.object(n)).scale(&int(c)))).unwrap();
    let k = cone(&f).unwrap();
    assert!(k.proj.target == shift(x, 1));
    SESOfComplexes::new(k.incl, k.proj).unwrap()
}

pub fn check_les(ses: &SESOfComplexes) -> Result<(), String> {
    let les = les_of_ses(ses, -1, DEGREES as i64).map_err(|e| e.to_string())?;
    ensure(les.is_exact(), &format!("long sequence not exact: {:?}", les.exactness()))
}

fn int_rows(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    proptest::collection::vec(proptest::collection::vec(-20i64..=20, cols), rows)
}

fn group_spec() -> impl Strategy<Value = GroupSpec> {
    prop_oneof![
        (1i64..=12).prop_map(|n| GroupSpec::Family { name: "cyclic".into(), param: Some(n) }),
        Just(GroupSpec::Family { name: "klein4".into(), param: None }),
        Just(GroupSpec::Family { name: "symmetric3".into(), param: None }),
        (1usize..4)
            .prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(0i64..4, n), n))
            .prop_map(GroupSpec::Cayley),
    ]
}

fn module_spec(name: &'static str) -> impl Strategy<Value = ModuleSpec> {
    (1usize..=3).prop_flat_map(move |rank| {
        (
            (0usize..3).prop_flat_map(move |k| int_rows(k, rank)),
            proptest::collection::vec((1usize..6, int_rows(rank, rank)), 0..3),
        )
            .prop_map(move |(relations, actions)| ModuleSpec {
                name: name.into(),
                rank,
                relations,
                actions,
            })
    })
}

fn ses_spec() -> impl Strategy<Value = SesSpec> {
    prop_oneof![
        (1usize..5, 1usize..3).prop_flat_map(|(r, c)| int_rows(r, c)).prop_map(SesSpec::Cocycle),
        (int_rows(2, 1), int_rows(1, 2)).prop_map(|(i, j)| SesSpec::Explicit {
            modules: ["A".into(), "B".into(), "C".into()],
            i,
            j,
        }),
    ]
}

/// Syntactically valid scenario specs; semantics are not checked.
pub fn scenario_spec() -> impl Strategy<Value = ScenarioSpec> {
    (
        group_spec(),
        proptest::collection::vec(0usize..8, 1..4),
        module_spec("M"),
        proptest::collection::vec(module_spec("A"), 0..2),
        ses_spec(),
        proptest::option::of(2usize..6),
    )
        .prop_map(|(group, normal, m, extra, ses, max_degree)| {
            let mut modules = vec![m];
            modules.extend(extra);
            ScenarioSpec {
                group,
                normal,
                modules,
                ses,
                max_degree,
                source: SourceMap::default(),
            }
        })
}
