//! Free resolutions over group rings: the normalized bar resolution,
//! resolutions by successive free covers, the horseshoe construction, Ext
//! and group cohomology, and the complex `Hom_{Z[N]}(Bar(G), M)`.

use std::sync::OnceLock;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::complexes::{CochainComplex, ComplexError};
use crate::fgab::{self, FgAbError, FgAbGroup, FgAbMorphism};
use crate::grpmod::{
    hom_over_subgroup, FiniteGroup, GModule, GroupError, ModuleSES, QuotientData, Subgroup,
};
use crate::linalg::{Int, IntMatrix};

pub const DEFAULT_MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolutionError {
    #[error("degree {requested} lies outside the computed window (limit {limit})")]
    WindowExceeded { requested: i64, limit: i64 },
    #[error("lifting failed while building the resolution at degree {0}")]
    LiftFailure(usize),
    #[error(transparent)]
    Module(#[from] GroupError),
    #[error(transparent)]
    Group(#[from] FgAbError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A matrix over `Z[G]` describing a map of free left modules:
/// `φ(e_j) = Σ_i a_ij e_i`. Column `j` lists the terms `(i, g, c)` of the
/// entries `a_ij = Σ c g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRingMatrix {
    pub rows: usize,
    pub cols: usize,
    pub columns: Vec<Vec<(usize, usize, Int)>>,
}

impl GroupRingMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        GroupRingMatrix {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    /// Reads column `j` from a vector in `Z`-coordinates of the target
    /// (index `i·|G| + g` for `g e_i`).
    fn set_column_from_z(&mut self, j: usize, order: usize, v: &[Int]) {
        self.columns[j] = v
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k / order, k % order, c.clone()))
            .collect();
    }

    /// The underlying `Z`-linear map on `Z^{cols·|G|} → Z^{rows·|G|}`.
    pub fn z_expand(&self, group: &FiniteGroup) -> IntMatrix {
        let n = group.order();
        let mut m = IntMatrix::zeros(self.rows * n, self.cols * n);
        for (j, col) in self.columns.iter().enumerate() {
            for h in group.elements() {
                for (i, g, c) in col {
                    m[(i * n + group.mul(h, *g), j * n + h)] += c;
                }
            }
        }
        m
    }

    /// `φ^*: Hom_G(F_rows, M) → Hom_G(F_cols, M)` with `Hom_G(F_r, M) = M^r`.
    pub fn pullback(&self, m: &GModule) -> IntMatrix {
        let k = m.underlying().ambient_rank();
        let mut out = IntMatrix::zeros(self.cols * k, self.rows * k);
        for (j, col) in self.columns.iter().enumerate() {
            for (i, g, c) in col {
                let a = m.action(*g).matrix();
                for r in 0..k {
                    for s in 0..k {
                        let v = &a[(r, s)];
                        if !v.is_zero() {
                            out[(j * k + r, i * k + s)] += c * v;
                        }
                    }
                }
            }
        }
        out
    }

    /// `φ^*` on `Hom_{Z[N]}(F, M)` in the coordinates of
    /// [`hom_over_subgroup`].
    pub fn pullback_over_subgroup(&self, m: &GModule, q: &QuotientData) -> IntMatrix {
        let k = m.underlying().ambient_rank();
        let idx = q.reps.len();
        let g = &q.group;
        let mut out = IntMatrix::zeros(self.cols * idx * k, self.rows * idx * k);
        for (j, col) in self.columns.iter().enumerate() {
            for l in 0..idx {
                for (i, h, c) in col {
                    // f(x_l h e_i) = n f(x_m e_i) with x_l h = n x_m
                    let (n, mm) = q.split_right(g.mul(q.reps[l], *h));
                    let a = m.action(n).matrix();
                    let (r0, c0) = ((j * idx + l) * k, (i * idx + mm) * k);
                    for r in 0..k {
                        for s in 0..k {
                            let v = &a[(r, s)];
                            if !v.is_zero() {
                                out[(r0 + r, c0 + s)] += c * v;
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// `… → P_1 → P_0 → T → 0` with `P_p = Z[G]^{ranks[p]}`, kept up to
/// `P_L`.
#[derive(Debug)]
pub struct FreeResolution {
    pub group: FiniteGroup,
    pub module: GModule,
    pub ranks: Vec<usize>,
    /// `diffs[p - 1]` is `∂_p: P_p → P_{p-1}`
    pub diffs: Vec<GroupRingMatrix>,
    /// images of the generators of `P_0` in ambient coordinates of `T`
    pub augmentation: Vec<Vec<Int>>,
    z_diffs: Vec<OnceLock<FgAbMorphism>>,
    z_aug: OnceLock<FgAbMorphism>,
}

impl FreeResolution {
    fn new(
        module: &GModule,
        ranks: Vec<usize>,
        diffs: Vec<GroupRingMatrix>,
        augmentation: Vec<Vec<Int>>,
    ) -> Self {
        let n = diffs.len();
        FreeResolution {
            group: module.group().clone(),
            module: module.clone(),
            ranks,
            diffs,
            augmentation,
            z_diffs: (0..n).map(|_| OnceLock::new()).collect(),
            z_aug: OnceLock::new(),
        }
    }

    pub fn length(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn rank(&self, p: usize) -> usize {
        self.ranks[p]
    }

    /// `∂_p` for `p ≥ 1`.
    pub fn d(&self, p: usize) -> &GroupRingMatrix {
        &self.diffs[p - 1]
    }

    pub fn z_module(&self, p: usize) -> FgAbGroup {
        FgAbGroup::free(self.ranks[p] * self.group.order())
    }

    /// `∂_p` as a map of free abelian groups.
    pub fn z_d(&self, p: usize) -> &FgAbMorphism {
        self.z_diffs[p - 1].get_or_init(|| {
            FgAbMorphism::new_unchecked(
                &self.z_module(p),
                &self.z_module(p - 1),
                self.diffs[p - 1].z_expand(&self.group),
            )
        })
    }

    /// `P_0 → T` as a map of abelian groups.
    pub fn z_augmentation(&self) -> &FgAbMorphism {
        self.z_aug.get_or_init(|| {
            let t = self.module.underlying();
            let n = self.group.order();
            let cols: Vec<Vec<Int>> = self
                .augmentation
                .iter()
                .flat_map(|v| {
                    self.group
                        .elements()
                        .map(|h| self.module.action(h).apply_vec(v))
                        .collect::<Vec<_>>()
                })
                .collect();
            let m = IntMatrix::from_columns(t.ambient_rank(), &cols);
            debug_assert_eq!(m.cols(), self.ranks[0] * n);
            FgAbMorphism::new_unchecked(&self.z_module(0), t, m)
        })
    }

    /// `Hom_G(P_•, M)` as a cochain complex in degrees `0..=L`.
    pub fn hom_complex(&self, m: &GModule) -> Result<CochainComplex, ResolutionError> {
        if m.group() != &self.group {
            return Err(GroupError::GroupMismatch.into());
        }
        let k = m.underlying().ambient_rank();
        let objects: Vec<FgAbGroup> = self
            .ranks
            .iter()
            .map(|&r| fgab::direct_sum(&vec![m.underlying().clone(); r]).group)
            .collect();
        let diffs = (1..=self.length())
            .map(|p| {
                let a = self.d(p).pullback(m);
                debug_assert_eq!(a.rows(), self.ranks[p] * k);
                FgAbMorphism::new_unchecked(&objects[p - 1], &objects[p], a)
            })
            .collect();
        let c = CochainComplex::plain(0, objects, diffs)?;
        Ok(c.with_valid_through(Some(self.length() as i64 - 1)))
    }
}

/// Resolution by free covers on the given generators of `T`, out to `P_L`.
pub fn projective_resolution(t: &GModule, length: usize) -> Result<FreeResolution, ResolutionError> {
    let g = t.group();
    let order = g.order();
    let n = t.underlying().ambient_rank();
    let augmentation: Vec<Vec<Int>> = (0..n)
        .map(|i| {
            let mut e = vec![Int::zero(); n];
            e[i] = Int::one();
            e
        })
        .collect();
    let mut res = FreeResolution::new(t, vec![n], Vec::new(), augmentation);
    let mut current = res.z_augmentation().clone();
    for p in 1..=length {
        let (_, incl) = fgab::kernel(&current);
        let basis = incl.matrix().columns();
        let r = basis.len();
        let mut d = GroupRingMatrix::zero(res.ranks[p - 1], r);
        for (j, v) in basis.iter().enumerate() {
            d.set_column_from_z(j, order, v);
        }
        res.ranks.push(r);
        res.diffs.push(d);
        res.z_diffs.push(OnceLock::new());
        current = res.z_d(p).clone();
    }
    Ok(res)
}

/// Tuples of non-identity elements, lexicographic in element index.
fn bar_tuples(g: &FiniteGroup, q: usize) -> Vec<Vec<usize>> {
    let non = g.non_identity();
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..q {
        out = out
            .into_iter()
            .flat_map(|t| {
                non.iter().map(move |&x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

fn bar_index(g: &FiniteGroup, t: &[usize]) -> Option<usize> {
    let e = g.identity();
    let base = g.order() - 1;
    let mut idx = 0;
    for &x in t {
        if x == e {
            return None;
        }
        let digit = if x > e { x - 1 } else { x };
        idx = idx * base + digit;
    }
    Some(idx)
}

/// The normalized bar resolution of `Z` out to `B_L`; `B_q` has rank
/// `(|G|-1)^q`.
pub fn bar_resolution(g: &FiniteGroup, length: usize) -> FreeResolution {
    let z = GModule::trivial(g, &FgAbGroup::free(1));
    let mut ranks = vec![1];
    let mut diffs = Vec::new();
    for q in 1..=length {
        let tuples = bar_tuples(g, q);
        let rows = bar_tuples(g, q - 1).len();
        let mut d = GroupRingMatrix::zero(rows, tuples.len());
        for (j, t) in tuples.iter().enumerate() {
            let mut terms: Vec<(usize, usize, Int)> = Vec::new();
            let mut push = |tuple: &[usize], elt: usize, sign: i64| {
                if let Some(i) = bar_index(g, tuple) {
                    terms.push((i, elt, Int::from(sign)));
                }
            };
            push(&t[1..], t[0], 1);
            for i in 0..q - 1 {
                let mut m: Vec<usize> = t[..i].to_vec();
                m.push(g.mul(t[i], t[i + 1]));
                m.extend_from_slice(&t[i + 2..]);
                push(&m, g.identity(), if (i + 1) % 2 == 0 { 1 } else { -1 });
            }
            push(&t[..q - 1], g.identity(), if q % 2 == 0 { 1 } else { -1 });
            d.columns[j] = terms;
        }
        ranks.push(tuples.len());
        diffs.push(d);
    }
    FreeResolution::new(&z, ranks, diffs, vec![vec![Int::one()]])
}

/// Resolutions of `A`, `B`, `C` with `P(B)_p = P(A)_p ⊕ P(C)_p`.
#[derive(Debug)]
pub struct Horseshoe {
    pub a: FreeResolution,
    pub b: FreeResolution,
    pub c: FreeResolution,
}

pub fn horseshoe(ses: &ModuleSES, length: usize) -> Result<Horseshoe, ResolutionError> {
    let g = ses.group().clone();
    let order = g.order();
    let ra = projective_resolution(&ses.a, length)?;
    let rc = projective_resolution(&ses.c, length)?;
    // σ: generators of P(C)_0 lifted through j
    let sigma: Vec<Vec<Int>> = rc
        .augmentation
        .iter()
        .map(|c| ses.j.map.preimage_vec(c).ok_or(ResolutionError::LiftFailure(0)))
        .collect::<Result<_, _>>()?;
    let mut augmentation: Vec<Vec<Int>> = ra
        .augmentation
        .iter()
        .map(|a| ses.i.map.apply_vec(a))
        .collect();
    augmentation.extend(sigma.iter().cloned());
    // σ on Z-coordinates of P(C)_0
    let sigma_cols: Vec<Vec<Int>> = sigma
        .iter()
        .flat_map(|v| g.elements().map(|h| ses.b.action(h).apply_vec(v)).collect::<Vec<_>>())
        .collect();
    let sigma_z = IntMatrix::from_columns(ses.b.underlying().ambient_rank(), &sigma_cols);

    let mut lambdas: Vec<GroupRingMatrix> = Vec::new();
    let mut diffs = Vec::new();
    for p in 1..=length {
        let (ra0, ra1) = (ra.rank(p - 1), ra.rank(p));
        let (rc0, rc1) = (rc.rank(p - 1), rc.rank(p));
        let dc_z = rc.z_d(p).matrix();
        let mut lambda = GroupRingMatrix::zero(ra0, rc1);
        for k in 0..rc1 {
            let x = dc_z.col(k * order + g.identity());
            let w = if p == 1 {
                let y = sigma_z.mul_vec(&x);
                let a = ses.i.map.preimage_vec(&y).ok_or(ResolutionError::LiftFailure(p))?;
                ra.z_augmentation()
                    .preimage_vec(&a)
                    .ok_or(ResolutionError::LiftFailure(p))?
            } else {
                let prev = lambdas[p - 2].z_expand(&g);
                let y = prev.mul_vec(&x);
                ra.z_d(p - 1).preimage_vec(&y).ok_or(ResolutionError::LiftFailure(p))?
            };
            let neg: Vec<Int> = w.into_iter().map(|v| -v).collect();
            lambda.set_column_from_z(k, order, &neg);
        }
        let mut d = GroupRingMatrix::zero(ra0 + rc0, ra1 + rc1);
        for j in 0..ra1 {
            d.columns[j] = ra.d(p).columns[j].clone();
        }
        for k in 0..rc1 {
            let mut col = lambda.columns[k].clone();
            col.extend(rc.d(p).columns[k].iter().map(|(i, h, c)| (i + ra0, *h, c.clone())));
            d.columns[ra1 + k] = col;
        }
        diffs.push(d);
        lambdas.push(lambda);
    }
    let ranks = (0..=length).map(|p| ra.rank(p) + rc.rank(p)).collect();
    let rb = FreeResolution::new(&ses.b, ranks, diffs, augmentation);
    Ok(Horseshoe { a: ra, b: rb, c: rc })
}

/// `Ext^i_{Z[G]}(T, M)` for `i ≤ max`.
pub fn ext_groups(t: &GModule, m: &GModule, max: usize) -> Result<Vec<FgAbGroup>, ResolutionError> {
    let res = projective_resolution(t, max + 1)?;
    let c = res.hom_complex(m)?;
    Ok((0..=max as i64).map(|i| c.cohomology(i).group().clone()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CohomologyMethod {
    Bar,
    Generic,
}

/// `H^i(G, M)` for `i ≤ max`.
pub fn group_cohomology(
    m: &GModule,
    max: usize,
    method: CohomologyMethod,
) -> Result<Vec<FgAbGroup>, ResolutionError> {
    let g = m.group();
    let res = match method {
        CohomologyMethod::Bar => bar_resolution(g, max + 1),
        CohomologyMethod::Generic => {
            projective_resolution(&GModule::trivial(g, &FgAbGroup::free(1)), max + 1)?
        }
    };
    let c = res.hom_complex(m)?;
    Ok((0..=max as i64).map(|i| c.cohomology(i).group().clone()).collect())
}

/// Normalized bar cochains `C^q(G, M) = Hom_G(B_q, M)` for `q ≤ max + 1`.
pub fn bar_cochains(m: &GModule, max: usize) -> Result<CochainComplex, ResolutionError> {
    bar_resolution(m.group(), max + 1).hom_complex(m)
}

/// The model of `R(-)^N M` as a complex of `G/N`-modules.
#[derive(Debug, Clone)]
pub struct LhsModel {
    /// `D^q = Hom_{Z[N]}(Bar_q(G), M)` for `q ≤ d - 1`, with `Z^{d-1}` on top
    pub complex: CochainComplex,
    pub max_degree: usize,
    /// `Z^{d-1} → D^{d-1}`
    pub top_inclusion: Option<FgAbMorphism>,
    raw_top: FgAbGroup,
}

impl LhsModel {
    /// `D^q` before truncation.
    pub fn raw_object(&self, q: i64) -> FgAbGroup {
        if q == self.max_degree as i64 - 1 {
            self.raw_top.clone()
        } else {
            self.complex.object(q)
        }
    }
}

/// `Hom_{Z[N]}(Bar(G), M)` truncated as `τ≤(d-1)`; valid through `d - 1`.
pub fn lhs_complex(m: &GModule, q: &QuotientData, d: usize) -> Result<LhsModel, ResolutionError> {
    if m.group() != &q.group {
        return Err(GroupError::GroupMismatch.into());
    }
    let bar = bar_resolution(&q.group, d);
    let mods: Vec<GModule> = (0..d)
        .map(|p| hom_over_subgroup(bar.rank(p), m, q))
        .collect::<Result<_, _>>()?;
    let k = m.underlying().ambient_rank() * q.reps.len();
    let top = fgab::direct_sum(&vec![m.underlying().clone(); bar.rank(d) * q.reps.len()]).group;
    let mut diffs = Vec::new();
    for p in 1..d {
        let a = bar.d(p).pullback_over_subgroup(m, q);
        diffs.push(FgAbMorphism::new_unchecked(mods[p - 1].underlying(), mods[p].underlying(), a));
    }
    let last = bar.d(d).pullback_over_subgroup(m, q);
    debug_assert_eq!(last.rows(), bar.rank(d) * k);
    let last = FgAbMorphism::new_unchecked(mods[d - 1].underlying(), &top, last);
    // τ≤(d-1): replace the top object by the cocycles of `last`
    let (z, zincl) = fgab::kernel(&last);
    let g = &q.quotient;
    let top_mod = &mods[d - 1];
    let maps = g
        .elements()
        .map(|e| {
            fgab::factor_through(&top_mod.action(e).compose(&zincl).expect("composable"), &zincl)
                .expect("cocycles are stable")
        })
        .collect();
    let zmod = GModule::from_maps_unchecked(g, &z, maps);
    let raw_top = top_mod.underlying().clone();
    let mut objects = mods;
    objects[d - 1] = zmod;
    if d >= 2 {
        let dl = diffs.pop().expect("differential");
        diffs.push(fgab::factor_through(&dl, &zincl).expect("boundaries are cocycles"));
    }
    let complex = CochainComplex::build(g, 0, objects, diffs, Some(d as i64 - 1));
    Ok(LhsModel {
        complex,
        max_degree: d,
        top_inclusion: Some(zincl),
        raw_top,
    })
}

/// Classical inflation `H^q(G/N, M^N) → H^q(G, M)` on bar cochains, with
/// `incl: M^N → M`.
pub fn classical_inflation(
    q: &QuotientData,
    fixed: &GModule,
    incl: &FgAbMorphism,
    m: &GModule,
    degree: usize,
) -> Result<FgAbMorphism, ResolutionError> {
    let src = bar_cochains(fixed, degree)?;
    let tgt = bar_cochains(m, degree)?;
    let (kf, km) = (fixed.underlying().ambient_rank(), m.underlying().ambient_rank());
    let gt = bar_tuples(&q.group, degree);
    let mut a = IntMatrix::zeros(gt.len() * km, bar_tuples(&q.quotient, degree).len() * kf);
    for (row, t) in gt.iter().enumerate() {
        let image: Vec<usize> = t.iter().map(|&x| q.projection[x]).collect();
        if let Some(col) = bar_index(&q.quotient, &image) {
            a.set_block(row * km, col * kf, incl.matrix());
        }
    }
    let d = degree as i64;
    let f = FgAbMorphism::new_unchecked(&src.object(d), &tgt.object(d), a);
    Ok(src.cohomology(d).induced(&f, &tgt.cohomology(d))?)
}

/// Classical restriction `H^q(G, M) → H^q(N, M)` on bar cochains; the
/// target uses [`Subgroup::as_group`].
pub fn classical_restriction(m: &GModule, n: &Subgroup, degree: usize) -> Result<FgAbMorphism, ResolutionError> {
    let res = crate::grpmod::restriction(m, n)?;
    let src = bar_cochains(m, degree)?;
    let tgt = bar_cochains(&res, degree)?;
    let k = m.underlying().ambient_rank();
    let nt = bar_tuples(res.group(), degree);
    let mut a = IntMatrix::zeros(nt.len() * k, bar_tuples(m.group(), degree).len() * k);
    for (row, t) in nt.iter().enumerate() {
        let image: Vec<usize> = t.iter().map(|&x| n.elements()[x]).collect();
        let col = bar_index(m.group(), &image).expect("non-identity");
        a.set_block(row * k, col * k, &IntMatrix::identity(k));
    }
    let d = degree as i64;
    let f = FgAbMorphism::new_unchecked(&src.object(d), &tgt.object(d), a);
    Ok(src.cohomology(d).induced(&f, &tgt.cohomology(d))?)
}

/// `τ≤q` of `Hom_{Z[N]}(Bar(G), M)` restricted to `Hom_{Z[N]}(Bar(N), M)`:
/// identifies `H^q` of the model with classical `H^q(N, M)`.
pub fn model_to_classical(
    model: &LhsModel,
    m: &GModule,
    q: &QuotientData,
    degree: usize,
) -> Result<FgAbMorphism, ResolutionError> {
    let n = &q.normal;
    let res = crate::grpmod::restriction(m, n)?;
    let tgt = bar_cochains(&res, degree)?;
    let k = m.underlying().ambient_rank();
    let idx = q.reps.len();
    let g = &q.group;
    let nt = bar_tuples(res.group(), degree);
    let gt_len = bar_tuples(g, degree).len();
    // f ↦ ([n_1|…|n_q] ↦ f(e · [n_1|…|n_q])); the identity lies in coset 0
    let coset_e = q.projection[g.identity()];
    let (ne, _) = q.split_right(g.identity());
    let mut a = IntMatrix::zeros(nt.len() * k, gt_len * idx * k);
    for (row, t) in nt.iter().enumerate() {
        let image: Vec<usize> = t.iter().map(|&x| n.elements()[x]).collect();
        let b = bar_index(g, &image).expect("non-identity");
        a.set_block(row * k, (b * idx + coset_e) * k, m.action(ne).matrix());
    }
    let d = degree as i64;
    let mut f = FgAbMorphism::new_unchecked(&model.raw_object(d), &tgt.object(d), a);
    if let Some(incl) = model.top_inclusion.as_ref().filter(|_| d == model.max_degree as i64 - 1) {
        f = f.compose(incl)?;
    }
    Ok(model.complex.cohomology(d).induced(&f, &tgt.cohomology(d))?)
}
