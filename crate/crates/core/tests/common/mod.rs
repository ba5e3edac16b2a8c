//! Independent oracles shared by the integration tests and the acceptance
//! harness.
#![allow(dead_code)]

pub mod gen;

use lowterm::fgab::{FgAbGroup, FgAbMorphism};
use lowterm::grpmod::{FiniteGroup, GModule};
use lowterm::linalg::{int, smith_normal_form, Int, IntMatrix};
use lowterm::resolutions::{bar_cochains, classical_restriction, model_to_classical};
use lowterm::spectral::LhsSetup;
use num_traits::{One, Signed, Zero};

/// Order of `H^1(G, M)` for a finite cyclic `M = Z/m` with `G` acting by
/// `signs[g] ∈ {1, -1}`: crossed homomorphisms counted by brute force,
/// divided by the principal ones.
pub fn h1_by_cocycles(g: &FiniteGroup, m: i64, signs: &[i64]) -> u64 {
    let n = g.order();
    let act = |x: usize, v: i64| (signs[x] * v).rem_euclid(m);
    let mut count = 0u64;
    let mut f = vec![0i64; n];
    let total = (m as u64).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for v in f.iter_mut() {
            *v = (c % m as u64) as i64;
            c /= m as u64;
        }
        let ok = g
            .elements()
            .all(|x| g.elements().all(|y| f[g.mul(x, y)] == (f[x] + act(x, f[y])).rem_euclid(m)));
        if ok {
            count += 1;
        }
    }
    let mut principal = std::collections::BTreeSet::new();
    for a in 0..m {
        let b: Vec<i64> = g.elements().map(|x| (act(x, a) - a).rem_euclid(m)).collect();
        principal.insert(b);
    }
    count / principal.len() as u64
}

/// Number of crossed homomorphisms `G → Z` (trivial action) with values in
/// `[-bound, bound]`.
pub fn z_valued_homs_in_box(g: &FiniteGroup, bound: i64) -> usize {
    let n = g.order() as u32;
    let width = (2 * bound + 1) as u64;
    let mut found = 0;
    for code in 0..width.pow(n) {
        let mut c = code;
        let f: Vec<i64> = (0..n)
            .map(|_| {
                let v = (c % width) as i64 - bound;
                c /= width;
                v
            })
            .collect();
        if g.elements().all(|x| g.elements().all(|y| f[g.mul(x, y)] == f[x] + f[y])) {
            found += 1;
        }
    }
    found
}

/// Invariants of `ker(b) / im(a)` for integer matrices, via SNF only.
pub fn homology_by_snf(a: &IntMatrix, b: &IntMatrix) -> (usize, Vec<Int>) {
    let n = b.cols();
    let rb = smith_normal_form(b).rank();
    let sa = smith_normal_form(a);
    let free = n - rb - sa.rank();
    let torsion = sa.divisors.into_iter().filter(|d| !d.is_one()).collect();
    (free, torsion)
}

/// `H^i(C_n, Z)` from the periodic resolution `… → Z[C_n] --N--> Z[C_n] --(g-1)--> Z[C_n] → Z`:
/// the cochain complex is `Z --0--> Z --n--> Z --0--> …`.
pub fn cyclic_integral_cohomology(n: i64, i: usize) -> (usize, Vec<Int>) {
    let map = |k: usize| IntMatrix::from_rows(&[[if k % 2 == 1 { n } else { 0 }]]);
    let into = if i == 0 { IntMatrix::zeros(1, 0) } else { map(i - 1) };
    homology_by_snf(&into, &map(i))
}

/// Determinant divisors: `d_k` is the gcd of all `k × k` minors.
pub fn determinant_divisors(m: &IntMatrix) -> Vec<Int> {
    use num_integer::Integer;
    let (r, c) = (m.rows(), m.cols());
    let mut out = Vec::new();
    for k in 1..=r.min(c) {
        let mut g = Int::zero();
        for rows in subsets(r, k) {
            for cols in subsets(c, k) {
                let det = m.select_rows(&rows).select_cols(&cols).determinant().unwrap();
                g = g.gcd(&det);
            }
        }
        if g.is_zero() {
            break;
        }
        out.push(g);
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|s| s.count_ones() as usize == k)
        .map(|s| (0..n).filter(|i| s >> i & 1 == 1).collect())
        .collect()
}

/// Compares `E^1 → E_2^{0,1}` (for `T = Z`) with classical restriction
/// `H^1(G, M) → H^1(N, M)`. A bar 1-cocycle `c` goes to the total cocycle
/// `e ↦ ε(e) c` in `Hom(P_0, D^1)`, through the edge map, is read off on a
/// generator with augmentation 1 and carried to `H^1(N, M)`.
pub fn edge_matches_restriction(st: &LhsSetup) -> Result<bool, String> {
    let m = &st.module;
    let q = &st.quotient;
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let res_c = st.psi.resolution(1).map_err(|e| err(&e))?;
    if res_c.module.underlying().ambient_rank() != 1 || !res_c.module.is_trivial_action() {
        return Err("T_1 is not Z".into());
    }
    let k = m.underlying().ambient_rank();
    let idx = q.reps.len();
    let bar = bar_cochains(m, 1).map_err(|e| err(&e))?;
    let hb = bar.cohomology(1);
    let col_d = st.psi.hx(1, &st.d).map_err(|e| err(&e))?;
    let hx_d = &col_d.hx[0];
    let e1 = hx_d.cohomology(1).map_err(|e| err(&e))?;
    let comp = hx_d.total.component(1, 0).ok_or("no (0, 1) summand")?;
    let d1 = st.d.object(1).ambient_rank();
    let edge = st.row_maps(1, 0).map_err(|e| err(&e))?[1].clone();
    let col_s = st.psi.hx(1, &st.s1).map_err(|e| err(&e))?;
    let hs = col_s.hx[0].cohomology(1).map_err(|e| err(&e))?;
    // absent when H^1(D) = 0
    let comp_s = col_s.hx[0].total.component(1, 0);
    let s_width = st.s1.object(1).ambient_rank();
    let b0 = res_c
        .augmentation
        .iter()
        .position(|v| v[0] == Int::one())
        .ok_or("no generator with augmentation 1")?;
    let j1 = st.j.on_cohomology(1).map_err(|e| err(&e))?;
    let to_n = model_to_classical(&st.model, m, q, 1).map_err(|e| err(&e))?;
    let restr = classical_restriction(m, &q.normal, 1).map_err(|e| err(&e))?;
    let gens = hb.group().canonical_rank();
    let mut phi_cols = Vec::new();
    for g in 0..gens {
        let mut unit = vec![Int::zero(); gens];
        unit[g] = Int::one();
        let c = hb.cocycle_lift(&unit);
        // G-equivariant cochain seen in Hom_{Z[N]}: block (b, i) is x_i · c(e_b)
        let mut ct = vec![Int::zero(); d1];
        for b in 0..c.len() / k {
            for (i, &x) in q.reps.iter().enumerate() {
                let v = m.action(x).apply_vec(&c[b * k..(b + 1) * k]);
                ct[(b * idx + i) * k..(b * idx + i + 1) * k].clone_from_slice(&v);
            }
        }
        let mut z = vec![Int::zero(); hx_d.total.complex.object(1).ambient_rank()];
        for (b, eps) in res_c.augmentation.iter().enumerate() {
            for (s, v) in ct.iter().enumerate() {
                z[comp.offset + b * d1 + s] = &eps[0] * v;
            }
        }
        let class = e1.class_of(&z).ok_or("not a total cocycle")?;
        phi_cols.push(class.clone());
        let y = edge.apply_vec(&e1.group().from_canonical(&class));
        let lift = hs.cocycle_lift(&hs.group().canonical(&y));
        let h = match comp_s {
            Some(c) => lift[c.offset + b0 * s_width..c.offset + (b0 + 1) * s_width].to_vec(),
            None => vec![Int::zero(); s_width],
        };
        let via_edge = to_n.apply_vec(&j1.apply_vec(&h));
        let direct = restr.apply_vec(&hb.group().from_canonical(&unit));
        let target = restr.target();
        let diff: Vec<Int> = via_edge.iter().zip(&direct).map(|(a, b)| a - b).collect();
        if !target.canonical(&diff).iter().all(Zero::is_zero) {
            return Ok(false);
        }
    }
    let phi = FgAbMorphism::from_canonical(hb.group(), e1.group(), &phi_cols).map_err(|e| err(&e))?;
    Ok(phi.is_isomorphism())
}

/// `Z/n` over the trivial group.
pub fn cyclic(n: i64) -> FgAbGroup {
    if n == 0 {
        FgAbGroup::free(1)
    } else {
        FgAbGroup::cyclic(n)
    }
}

pub fn trivial_module(g: &FiniteGroup, n: i64) -> GModule {
    GModule::trivial(g, &cyclic(n))
}

pub fn shape(g: &FgAbGroup) -> (usize, Vec<Int>) {
    (g.free_rank(), g.torsion().to_vec())
}

pub fn is_positive(x: &Int) -> bool {
    x.is_positive()
}

pub fn ints(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| int(x)).collect()
}

/// Scenarios with `T_1 = Z` whose restriction `H^1(G, M) → H^1(N, M)` is
/// nonzero.
pub const NONZERO_RESTRICTION: [(&str, &str); 2] = [
    (
        "V4-Z2",
        "group { family: klein4; }\nnormal { elements: [0, 1]; }\n\
         module M { rank: 1; relations: [[2]]; }\nmodule A { rank: 1; relations: [[2]]; }\n\
         ses { cocycle: [[0], [1]]; }\n",
    ),
    (
        "C4-Z4",
        "group { family: cyclic; param: 4; }\nnormal { elements: [0, 2]; }\n\
         module M { rank: 1; relations: [[4]]; }\nmodule A { rank: 1; relations: [[2]]; }\n\
         ses { cocycle: [[0], [1]]; }\n",
    ),
];
