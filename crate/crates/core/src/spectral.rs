//! Hyper-Ext through total complexes, the functors `Ψ_t = Hom(T_t, -)` on
//! a horseshoe, and the low-degree terms of the Grothendieck spectral
//! sequence for `Ψ_t ∘ (-)^N`.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use thiserror::Error;

use crate::complexes::{
    cone, shift, stalk, stalk_to_truncation, truncate_ge, truncate_le, ChainMap, CochainComplex,
    CohomologyDatum, ComplexError, Cone, ExactSequence, SESOfComplexes,
};
use crate::fgab::{self, FgAbError, FgAbGroup, FgAbMorphism};
use crate::grpmod::{inverse, FiniteGroup, GModule, GroupError, ModuleSES, QuotientData};
use crate::linalg::IntMatrix;
use crate::resolutions::{horseshoe, lhs_complex, FreeResolution, Horseshoe, LhsModel, ResolutionError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("degree {requested} lies outside the computed window (limit {limit})")]
    WindowExceeded { requested: i64, limit: i64 },
    #[error("expected an isomorphism: {0}")]
    NotIsomorphism(&'static str),
    #[error("functor index must be 1, 2 or 3, got {0}")]
    BadIndex(usize),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Resolution(#[from] ResolutionError),
    #[error(transparent)]
    Module(#[from] GroupError),
    #[error(transparent)]
    Group(#[from] FgAbError),
}

/// One summand `(p, q)` of a total degree, at ambient offset `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub p: i64,
    pub q: i64,
    pub offset: usize,
    pub width: usize,
}

/// A first-quadrant style double complex with commuting differentials
/// `d_h: (p, q) → (p+1, q)` and `d_v: (p, q) → (p, q+1)`.
#[derive(Debug, Clone, Default)]
pub struct DoubleComplex {
    pub objects: BTreeMap<(i64, i64), FgAbGroup>,
    pub dh: BTreeMap<(i64, i64), FgAbMorphism>,
    pub dv: BTreeMap<(i64, i64), FgAbMorphism>,
}

/// `Tot` with its layout per degree.
#[derive(Debug, Clone)]
pub struct Total {
    pub complex: CochainComplex,
    pub layout: BTreeMap<i64, Vec<Component>>,
}

impl Total {
    pub fn component(&self, n: i64, p: i64) -> Option<Component> {
        self.layout.get(&n)?.iter().find(|c| c.p == p).copied()
    }
}

impl DoubleComplex {
    /// Total complex in degrees `lo..=hi` with `d = d_h + (-1)^p d_v`.
    pub fn total(&self, lo: i64, hi: i64) -> Total {
        let mut layout = BTreeMap::new();
        let mut objects = Vec::new();
        for n in lo..=hi {
            let mut comps = Vec::new();
            let mut groups = Vec::new();
            let mut off = 0;
            for (&(p, q), g) in &self.objects {
                if p + q == n && g.ambient_rank() > 0 {
                    comps.push(Component {
                        p,
                        q,
                        offset: off,
                        width: g.ambient_rank(),
                    });
                    off += g.ambient_rank();
                    groups.push(g.clone());
                }
            }
            objects.push(fgab::direct_sum(&groups).group);
            layout.insert(n, comps);
        }
        let mut diffs = Vec::new();
        for n in lo..hi {
            let (src, tgt) = (&layout[&n], &layout[&(n + 1)]);
            let s = &objects[(n - lo) as usize];
            let t = &objects[(n + 1 - lo) as usize];
            let mut m = IntMatrix::zeros(t.ambient_rank(), s.ambient_rank());
            for c in src {
                let find = |p: i64, q: i64| tgt.iter().find(|d| d.p == p && d.q == q);
                if let (Some(d), Some(h)) = (find(c.p + 1, c.q), self.dh.get(&(c.p, c.q))) {
                    m.set_block(d.offset, c.offset, h.matrix());
                }
                if let (Some(d), Some(v)) = (find(c.p, c.q + 1), self.dv.get(&(c.p, c.q))) {
                    let block = if c.p.rem_euclid(2) == 1 {
                        v.matrix().neg()
                    } else {
                        v.matrix().clone()
                    };
                    m.set_block(d.offset, c.offset, &block);
                }
            }
            diffs.push(FgAbMorphism::new_unchecked(s, t, m));
        }
        let g = FiniteGroup::trivial();
        let mods = objects.iter().map(|o| GModule::trivial(&g, o)).collect();
        Total {
            complex: CochainComplex::build(&g, lo, mods, diffs, None),
            layout,
        }
    }
}

/// `ℍ^*(Hom_Q(P_•, F))` for a truncated free resolution `P` of `T`.
#[derive(Debug)]
pub struct HyperExt {
    pub complex: CochainComplex,
    pub total: Total,
    ranks: Vec<usize>,
    /// highest degree computed correctly
    pub top: i64,
}

impl HyperExt {
    pub fn new(res: &FreeResolution, f: &CochainComplex) -> Self {
        let l = res.length() as i64;
        let lo = f.lo();
        let mut top = l - 1 + lo;
        if let Some(v) = f.valid_through() {
            top = top.min(v);
        }
        let mut dc = DoubleComplex::default();
        for p in 0..=l {
            let r = res.rank(p as usize);
            for q in f.lo()..=f.hi() {
                let m = f.module(q);
                if p + q > top + 1 {
                    continue;
                }
                let k = m.underlying().ambient_rank();
                if k == 0 || r == 0 {
                    continue;
                }
                let g = fgab::direct_sum(&vec![m.underlying().clone(); r]).group;
                dc.objects.insert((p, q), g);
            }
        }
        for (&(p, q), g) in &dc.objects {
            if let Some(t) = dc.objects.get(&(p + 1, q)) {
                let m = res.d(p as usize + 1).pullback(&f.module(q));
                dc.dh.insert((p, q), FgAbMorphism::new_unchecked(g, t, m));
            }
            if let Some(t) = dc.objects.get(&(p, q + 1)) {
                let d = f.d(q);
                let r = res.rank(p as usize);
                let blocks = vec![d.matrix(); r];
                let m = IntMatrix::block_diag(&blocks);
                dc.dv.insert((p, q), FgAbMorphism::new_unchecked(g, t, m));
            }
        }
        let total = dc.total(lo, top + 1);
        HyperExt {
            complex: f.clone(),
            total,
            ranks: res.ranks.clone(),
            top,
        }
    }

    pub fn cohomology(&self, i: i64) -> Result<Arc<CohomologyDatum>, SpectralError> {
        if i > self.top {
            return Err(SpectralError::WindowExceeded {
                requested: i,
                limit: self.top,
            });
        }
        Ok(self.total.complex.cohomology(i))
    }

    pub fn group(&self, i: i64) -> Result<FgAbGroup, SpectralError> {
        Ok(self.cohomology(i)?.group().clone())
    }

    /// A map `Tot^n(self) → Tot^m(target)` assembled from blocks
    /// `(p, q) ↦ (p', q')`.
    fn assemble(
        &self,
        n: i64,
        target: &HyperExt,
        m: i64,
        block: impl Fn(&Component) -> Option<(i64, i64, IntMatrix)>,
    ) -> FgAbMorphism {
        let s = self.total.complex.object(n);
        let t = target.total.complex.object(m);
        let mut a = IntMatrix::zeros(t.ambient_rank(), s.ambient_rank());
        if let (Some(src), Some(tgt)) = (self.total.layout.get(&n), target.total.layout.get(&m)) {
            for c in src {
                if let Some((p, q, b)) = block(c) {
                    if let Some(d) = tgt.iter().find(|d| d.p == p && d.q == q) {
                        a.set_block(d.offset, c.offset, &b);
                    }
                }
            }
        }
        FgAbMorphism::new_unchecked(&s, &t, a)
    }

    /// `Tot^n` of a chain map `F → F'` (same resolution).
    pub fn tot_of_chain_map(&self, phi: &ChainMap, target: &HyperExt, n: i64) -> FgAbMorphism {
        self.assemble(n, target, n, |c| {
            let r = self.ranks[c.p as usize];
            let f = phi.at(c.q);
            let blocks = vec![f.matrix(); r];
            Some((c.p, c.q, IntMatrix::block_diag(&blocks)))
        })
    }

    /// `ℍ^i(φ)`.
    pub fn induced(&self, phi: &ChainMap, target: &HyperExt, i: i64) -> Result<FgAbMorphism, SpectralError> {
        let f = self.tot_of_chain_map(phi, target, i);
        Ok(self.cohomology(i)?.induced(&f, &*target.cohomology(i)?)?)
    }

    /// `θ: ℍ^n(F[1]) → ℍ^{n+1}(F)`, the sign `(-1)^p` on each summand;
    /// `self` is the hyper-Ext of `F[1]`.
    pub fn theta(&self, target: &HyperExt, n: i64) -> Result<FgAbMorphism, SpectralError> {
        let f = self.assemble(n, target, n + 1, |c| {
            let id = IntMatrix::identity(c.width);
            let b = if c.p.rem_euclid(2) == 1 { id.neg() } else { id };
            Some((c.p, c.q + 1, b))
        });
        Ok(self.cohomology(n)?.induced(&f, &*target.cohomology(n + 1)?)?)
    }
}

/// `Ψ_t(F)` for `t = 1, 2, 3` with the column triangle
/// `Tot_C(F) → Tot_B(F) → Tot_A(F)`.
#[derive(Debug)]
pub struct PsiColumn {
    pub hx: [HyperExt; 3],
    pub ses: SESOfComplexes,
}

/// Resolutions of the coefficient sequence `0 → A → B → C → 0` with
/// `T_1 = C`, `T_2 = B`, `T_3 = A`, and a cache of hyper-Ext columns.
#[derive(Debug)]
pub struct PsiContext {
    pub horseshoe: Horseshoe,
    pub coefficients: ModuleSES,
    cache: Mutex<Vec<(CochainComplex, Arc<PsiColumn>)>>,
}

impl PsiContext {
    pub fn new(coefficients: &ModuleSES, length: usize) -> Result<Self, SpectralError> {
        Ok(PsiContext {
            horseshoe: horseshoe(coefficients, length)?,
            coefficients: coefficients.clone(),
            cache: Mutex::new(Vec::new()),
        })
    }

    pub fn resolution(&self, t: usize) -> Result<&FreeResolution, SpectralError> {
        match t {
            1 => Ok(&self.horseshoe.c),
            2 => Ok(&self.horseshoe.b),
            3 => Ok(&self.horseshoe.a),
            other => Err(SpectralError::BadIndex(other)),
        }
    }

    pub fn length(&self) -> usize {
        self.horseshoe.b.length()
    }

    pub fn column(&self, f: &CochainComplex) -> Arc<PsiColumn> {
        {
            let cache = self.cache.lock().expect("cache");
            if let Some((_, col)) = cache.iter().find(|(c, _)| c == f) {
                return col.clone();
            }
        }
        let hx = [
            HyperExt::new(&self.horseshoe.c, f),
            HyperExt::new(&self.horseshoe.b, f),
            HyperExt::new(&self.horseshoe.a, f),
        ];
        let ra = &self.horseshoe.a.ranks;
        let rc = &self.horseshoe.c.ranks;
        // u = π^*: (f_C) ↦ (0, f_C); v = ι^*: (f_A, f_C) ↦ f_A
        let u_at = |n: i64| {
            hx[0].assemble(n, &hx[1], n, |c| {
                let k = c.width / rc[c.p as usize];
                let a = ra[c.p as usize] * k;
                let mut b = IntMatrix::zeros(a + c.width, c.width);
                b.set_block(a, 0, &IntMatrix::identity(c.width));
                Some((c.p, c.q, b))
            })
        };
        let v_at = |n: i64| {
            hx[1].assemble(n, &hx[2], n, |c| {
                let k = c.width / (ra[c.p as usize] + rc[c.p as usize]);
                let a = ra[c.p as usize] * k;
                let mut b = IntMatrix::zeros(a, c.width);
                b.set_block(0, 0, &IntMatrix::identity(a));
                Some((c.p, c.q, b))
            })
        };
        let u = ChainMap::unchecked(&hx[0].total.complex, &hx[1].total.complex, |n| Some(u_at(n)));
        let v = ChainMap::unchecked(&hx[1].total.complex, &hx[2].total.complex, |n| Some(v_at(n)));
        let col = Arc::new(PsiColumn {
            hx,
            ses: SESOfComplexes { i: u, p: v },
        });
        self.cache.lock().expect("cache").push((f.clone(), col.clone()));
        col
    }

    pub fn hx(&self, t: usize, f: &CochainComplex) -> Result<Arc<PsiColumn>, SpectralError> {
        if !(1..=3).contains(&t) {
            return Err(SpectralError::BadIndex(t));
        }
        Ok(self.column(f))
    }

    /// `ℍ^iΨ_t(F)`.
    pub fn h(&self, t: usize, f: &CochainComplex, i: i64) -> Result<Arc<CohomologyDatum>, SpectralError> {
        self.hx(t, f)?.hx[t - 1].cohomology(i)
    }

    /// `ℍ^iΨ_t(φ)`.
    pub fn map(&self, t: usize, phi: &ChainMap, i: i64) -> Result<FgAbMorphism, SpectralError> {
        let s = self.hx(t, &phi.source)?;
        let tg = self.hx(t, &phi.target)?;
        s.hx[t - 1].induced(phi, &tg.hx[t - 1], i)
    }

    /// `θ: ℍ^nΨ_t(F[1]) → ℍ^{n+1}Ψ_t(F)` where `f1 = F[1]`.
    pub fn theta(&self, t: usize, f: &CochainComplex, f1: &CochainComplex, n: i64) -> Result<FgAbMorphism, SpectralError> {
        let s = self.hx(t, f1)?;
        let tg = self.hx(t, f)?;
        s.hx[t - 1].theta(&tg.hx[t - 1], n)
    }

    pub fn theta_inv(&self, t: usize, f: &CochainComplex, f1: &CochainComplex, n: i64) -> Result<FgAbMorphism, SpectralError> {
        inverse(&self.theta(t, f, f1, n)?).ok_or(SpectralError::NotIsomorphism("theta"))
    }

    /// `u: ℍ^iΨ_1(F) → ℍ^iΨ_2(F)`.
    pub fn u(&self, f: &CochainComplex, i: i64) -> Result<FgAbMorphism, SpectralError> {
        let col = self.column(f);
        let (a, b) = (col.hx[0].cohomology(i)?, col.hx[1].cohomology(i)?);
        Ok(a.induced(&col.ses.i.at(i), &b)?)
    }

    /// `v: ℍ^iΨ_2(F) → ℍ^iΨ_3(F)`.
    pub fn v(&self, f: &CochainComplex, i: i64) -> Result<FgAbMorphism, SpectralError> {
        let col = self.column(f);
        let (a, b) = (col.hx[1].cohomology(i)?, col.hx[2].cohomology(i)?);
        Ok(a.induced(&col.ses.p.at(i), &b)?)
    }

    /// `δ: ℍ^iΨ_3(F) → ℍ^{i+1}Ψ_1(F)`.
    pub fn delta(&self, f: &CochainComplex, i: i64) -> Result<FgAbMorphism, SpectralError> {
        let col = self.column(f);
        col.hx[2].cohomology(i)?;
        col.hx[0].cohomology(i + 1)?;
        Ok(col.ses.connecting(i)?)
    }

    /// `θ^{-1} ∘ δ: ℍ^iΨ_3(F) → ℍ^iΨ_1(F[1])`.
    pub fn rotated_delta(&self, f: &CochainComplex, f1: &CochainComplex, i: i64) -> Result<FgAbMorphism, SpectralError> {
        Ok(self.theta_inv(1, f, f1, i)?.compose(&self.delta(f, i)?)?)
    }

    /// `… → ℍ^iΨ_1 → ℍ^iΨ_2 → ℍ^iΨ_3 → ℍ^{i+1}Ψ_1 → …` for `i` in
    /// `from..=to`.
    pub fn column_triangle(&self, f: &CochainComplex, from: i64, to: i64) -> Result<ExactSequence, SpectralError> {
        let mut seq = ExactSequence {
            labels: Vec::new(),
            terms: Vec::new(),
            maps: Vec::new(),
        };
        for i in from..=to {
            for t in 1..=3 {
                seq.labels.push(format!("H^{i}Psi_{t}"));
                seq.terms.push(self.h(t, f, i)?.group().clone());
            }
            seq.maps.push(self.u(f, i)?);
            seq.maps.push(self.v(f, i)?);
            seq.maps.push(self.delta(f, i)?);
        }
        seq.labels.push(format!("H^{}Psi_1", to + 1));
        seq.terms.push(self.h(1, f, to + 1)?.group().clone());
        Ok(seq)
    }
}

/// `ℍ^i` of `Hom_G(P_•, F)` for a single resolution.
pub fn hyper_ext(res: &FreeResolution, f: &CochainComplex, i: i64) -> Result<FgAbGroup, SpectralError> {
    HyperExt::new(res, f).group(i)
}

fn compose_all(maps: &[&FgAbMorphism]) -> Result<FgAbMorphism, SpectralError> {
    // maps listed in order of application
    let mut acc = maps[0].clone();
    for m in &maps[1..] {
        acc = m.compose(&acc)?;
    }
    Ok(acc)
}

fn inv(f: &FgAbMorphism, what: &'static str) -> Result<FgAbMorphism, SpectralError> {
    inverse(f).ok_or(SpectralError::NotIsomorphism(what))
}

/// Everything attached to one choice of `(G, N, M, 0 → A → B → C → 0)`:
/// the model `D` of `R(-)^N M`, its truncations and the comparison maps.
#[derive(Debug)]
pub struct LhsSetup {
    pub quotient: QuotientData,
    pub module: GModule,
    pub model: LhsModel,
    pub psi: PsiContext,
    pub d: CochainComplex,
    /// `τ≤1 D` and its inclusion `j`
    pub y: CochainComplex,
    pub j: ChainMap,
    /// `τ≤0 D` and `ι: X → Y`
    pub x: CochainComplex,
    pub iota: ChainMap,
    pub cone_iota: Cone,
    /// `H^1(D)` in degree 1 and `π: cone(ι) → S1`
    pub s1: CochainComplex,
    pub pi: ChainMap,
    pub cone_j: Cone,
    pub dge2: CochainComplex,
    /// `H^2(D)` in degree 2 and `σ: S2 → τ≥2 D`
    pub s2: CochainComplex,
    pub sigma2: ChainMap,
    /// `ρ: cone(j) → τ≥2 D`
    pub rho: ChainMap,
    pub dge1: CochainComplex,
    pub iota_d: ChainMap,
    pub cone_xd: Cone,
    /// `ρ': cone(X → D) → τ≥1 D`
    pub rho1: ChainMap,
    shifts: Mutex<Vec<(CochainComplex, i64, CochainComplex)>>,
}

/// `cone(f) → τ≥k T` through the second summand.
fn cone_to_truncation(c: &Cone, target: &CochainComplex, proj: &ChainMap) -> Result<ChainMap, SpectralError> {
    let y = &proj.source;
    let k = &c.complex;
    let maps: Vec<(i64, FgAbMorphism)> = (k.lo()..=k.hi())
        .map(|n| {
            let xw = k.object(n).ambient_rank() - y.object(n).ambient_rank();
            let mut m = IntMatrix::zeros(y.object(n).ambient_rank(), k.object(n).ambient_rank());
            m.set_block(0, xw, &IntMatrix::identity(y.object(n).ambient_rank()));
            let second = FgAbMorphism::new_unchecked(&k.object(n), &y.object(n), m);
            Ok((n, proj.at(n).compose(&second)?))
        })
        .collect::<Result<_, SpectralError>>()?;
    Ok(ChainMap::new(k, target, |n| {
        maps.iter().find(|(d, _)| *d == n).map(|(_, f)| f.clone())
    })?)
}

impl LhsSetup {
    /// `d` is the top degree of the bar complex; `ℍ` is reliable through
    /// degree `d - 1` and the coefficient resolutions have length `d + 1`.
    pub fn new(m: &GModule, q: &QuotientData, coefficients: &ModuleSES, d: usize) -> Result<Self, SpectralError> {
        if coefficients.group() != &q.quotient {
            return Err(GroupError::GroupMismatch.into());
        }
        let model = lhs_complex(m, q, d)?;
        let dc = model.complex.clone();
        let psi = PsiContext::new(coefficients, d + 1)?;
        let (y, j) = truncate_le(&dc, 1);
        let (x, iota) = truncate_le(&y, 0);
        let cone_iota = cone(&iota)?;
        let (s1, h1) = stalk(&y, 1);
        let c1 = &cone_iota.complex;
        let to_y = inv(&cone_iota.incl.at(1), "cone(ι)^1 ≅ Y^1")?;
        let cls = h1.class_map(&FgAbMorphism::identity(&y.object(1)))?;
        let pi1 = cls.compose(&to_y)?;
        let pi = ChainMap::new(c1, &s1, |n| (n == 1).then(|| pi1.clone()))?;
        let cone_j = cone(&j)?;
        let (dge2, p2) = truncate_ge(&dc, 2);
        let (s2, dge2b, sigma2) = stalk_to_truncation(&dc, 2)?;
        debug_assert!(dge2b == dge2);
        let sigma2 = crate::complexes::retarget(&sigma2, &s2, &dge2)?;
        let rho = cone_to_truncation(&cone_j, &dge2, &p2)?;
        let (dge1, p1) = truncate_ge(&dc, 1);
        let iota_d = j.compose(&iota)?;
        let cone_xd = cone(&iota_d)?;
        let rho1 = cone_to_truncation(&cone_xd, &dge1, &p1)?;
        Ok(LhsSetup {
            quotient: q.clone(),
            module: m.clone(),
            model,
            psi,
            d: dc,
            y,
            j,
            x,
            iota,
            cone_iota,
            s1,
            pi,
            cone_j,
            dge2,
            s2,
            sigma2,
            rho,
            dge1,
            iota_d,
            cone_xd,
            rho1,
            shifts: Mutex::new(Vec::new()),
        })
    }

    /// `C[k]`, memoized so repeated shifts share cached hyper-Ext.
    pub fn sh(&self, c: &CochainComplex, k: i64) -> CochainComplex {
        if k == 0 {
            return c.clone();
        }
        let mut memo = self.shifts.lock().expect("memo");
        if let Some((_, _, s)) = memo.iter().find(|(a, kk, _)| *kk == k && a == c) {
            return s.clone();
        }
        let s = shift(c, k);
        memo.push((c.clone(), k, s.clone()));
        s
    }

    pub fn sh_map(&self, f: &ChainMap, k: i64) -> ChainMap {
        let s = self.sh(&f.source, k);
        let t = self.sh(&f.target, k);
        ChainMap::unchecked(&s, &t, |n| Some(f.at(n + k)))
    }

    pub fn max_degree(&self) -> usize {
        self.model.max_degree
    }

    /// `ℍ^iΨ_t(F)` as a group.
    pub fn h(&self, t: usize, f: &CochainComplex, i: i64) -> Result<FgAbGroup, SpectralError> {
        Ok(self.psi.h(t, f, i)?.group().clone())
    }

    /// `^tE_2^{p,q} = Ext^p(T_t, H^q(D))`.
    pub fn grothendieck_e2(&self, t: usize, p: i64, q: i64) -> Result<FgAbGroup, SpectralError> {
        if let Some(v) = self.d.valid_through() {
            if q > v {
                return Err(SpectralError::WindowExceeded { requested: q, limit: v });
            }
        }
        let hq = self.d.cohomology(q);
        let st = CochainComplex::stalk_of(&hq.module, 0);
        self.h(t, &st, p)
    }

    /// `E^i = ℍ^iΨ_t(D)`.
    pub fn e(&self, t: usize, i: i64) -> Result<FgAbGroup, SpectralError> {
        self.h(t, &self.d, i)
    }

    pub fn e_le1(&self, t: usize, i: i64) -> Result<FgAbGroup, SpectralError> {
        self.h(t, &self.y, i)
    }

    pub fn e_ge1(&self, t: usize, i: i64) -> Result<FgAbGroup, SpectralError> {
        self.h(t, &self.dge1, i)
    }

    fn m(&self, t: usize, f: &ChainMap, i: i64) -> Result<FgAbMorphism, SpectralError> {
        self.psi.map(t, f, i)
    }

    /// Maps of the row `ℍ^1Ψ_t` of `X → Y → cone(ι) → X[1] → Y[1]` shifted
    /// by `k`, transported to `E` (col 2) and `E_2^{·,1}` (col 3).
    pub fn row_maps(&self, t: usize, k: i64) -> Result<[FgAbMorphism; 4], SpectralError> {
        let iota = self.sh_map(&self.iota, k);
        let incl = self.sh_map(&self.cone_iota.incl, k);
        let proj = self.sh_map(&self.cone_iota.proj, k);
        let pi = self.sh_map(&self.pi, k);
        let iota1 = self.sh_map(&self.iota, k + 1);
        let pi_inv = inv(&self.m(t, &pi, 1)?, "π")?;
        let (a, b) = if k == 0 {
            let j = self.m(t, &self.j, 1)?;
            let j_inv = inv(&j, "j")?;
            (
                compose_all(&[&self.m(t, &iota, 1)?, &j])?,
                compose_all(&[&j_inv, &self.m(t, &incl, 1)?, &self.m(t, &pi, 1)?])?,
            )
        } else {
            (
                self.m(t, &iota, 1)?,
                compose_all(&[&self.m(t, &incl, 1)?, &self.m(t, &pi, 1)?])?,
            )
        };
        // proj lands in X[k+1] which must be the memoized shift
        let proj = ChainMap::unchecked(&proj.source, &self.sh(&self.x, k + 1), |n| Some(proj.at(n)));
        let c = compose_all(&[&pi_inv, &self.m(t, &proj, 1)?])?;
        let dd = self.m(t, &iota1, 1)?;
        Ok([a, b, c, dd])
    }

    /// `0 → E_2^{1,0} → E^1 → E_2^{0,1} → E_2^{2,0} → E_1^2 → E_2^{1,1} → E_2^{3,0}`.
    pub fn low_term_sequence(&self, t: usize) -> Result<ExactSequence, SpectralError> {
        let r0 = self.row_maps(t, 0)?;
        let r1 = self.row_maps(t, 1)?;
        let labels = ["E2^{1,0}", "E^1", "E2^{0,1}", "E2^{2,0}", "E1^2", "E2^{1,1}", "E2^{3,0}"];
        let terms = vec![
            self.h(t, &self.x, 1)?,
            self.h(t, &self.d, 1)?,
            self.h(t, &self.s1, 1)?,
            self.h(t, &self.sh(&self.x, 1), 1)?,
            self.h(t, &self.sh(&self.y, 1), 1)?,
            self.h(t, &self.sh(&self.s1, 1), 1)?,
            self.h(t, &self.sh(&self.x, 2), 1)?,
        ];
        let [a, b, c, d] = r0;
        let [_, e, f, _] = r1;
        Ok(ExactSequence {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            terms,
            maps: vec![a, b, c, d, e, f],
        })
    }

    /// `… → E_2^{i,0} → E^i_{≤1} → E_2^{i-1,1} → E_2^{i+1,0} → …` for
    /// `i ≤ imax`; with `ge1` the row `E_2^{i,0} → E^i → E^i_{≥1} → …`.
    pub fn long_exact_row(&self, t: usize, imax: i64, ge1: bool) -> Result<ExactSequence, SpectralError> {
        let x1 = self.sh(&self.x, 1);
        let (mid, third, to_mid, cone_c, to_third): (&CochainComplex, &CochainComplex, &ChainMap, &Cone, &ChainMap) =
            if ge1 {
                (&self.d, &self.dge1, &self.iota_d, &self.cone_xd, &self.rho1)
            } else {
                (&self.y, &self.s1, &self.iota, &self.cone_iota, &self.pi)
            };
        let proj = ChainMap::unchecked(&cone_c.proj.source, &x1, |n| Some(cone_c.proj.at(n)));
        let mut seq = ExactSequence {
            labels: Vec::new(),
            terms: Vec::new(),
            maps: Vec::new(),
        };
        for i in 0..=imax {
            seq.labels.extend([
                format!("E2^{{{i},0}}"),
                if ge1 { format!("E^{i}") } else { format!("E^{i}_(<=1)") },
                if ge1 { format!("E^{i}_(>=1)") } else { format!("E2^{{{},1}}", i - 1) },
            ]);
            seq.terms.push(self.h(t, &self.x, i)?);
            seq.terms.push(self.h(t, mid, i)?);
            seq.terms.push(self.h(t, third, i)?);
            seq.maps.push(self.m(t, to_mid, i)?);
            seq.maps.push(compose_all(&[&self.m(t, &cone_c.incl, i)?, &self.m(t, to_third, i)?])?);
            let back = inv(&self.m(t, to_third, i)?, "cone comparison")?;
            let theta = self.psi.theta(t, &self.x, &x1, i)?;
            seq.maps.push(compose_all(&[&back, &self.m(t, &proj, i)?, &theta])?);
        }
        seq.labels.push(format!("E2^{{{},0}}", imax + 1));
        seq.terms.push(self.h(t, &self.x, imax + 1)?);
        Ok(seq)
    }

    /// `0 → E_1^2 → E^2 → E_2^{0,2} → E^3_{≤1} → E^3`.
    pub fn e3_sequence(&self, t: usize) -> Result<ExactSequence, SpectralError> {
        let y1 = self.sh(&self.y, 1);
        let d1 = self.sh(&self.d, 1);
        let s21 = self.sh(&self.s2, 1);
        let y2 = self.sh(&self.y, 2);
        let d2 = self.sh(&self.d, 2);
        let j1 = self.sh_map(&self.j, 1);
        let incl1 = self.sh_map(&self.cone_j.incl, 1);
        let rho1 = self.sh_map(&self.rho, 1);
        let sigma1 = self.sh_map(&self.sigma2, 1);
        let proj1 = self.sh_map(&self.cone_j.proj, 1);
        let proj1 = ChainMap::unchecked(&proj1.source, &y2, |n| Some(proj1.at(n)));
        let j2 = self.sh_map(&self.j, 2);
        let sigma_inv = inv(&self.m(t, &sigma1, 1)?, "σ")?;
        let rho_inv = inv(&self.m(t, &rho1, 1)?, "ρ")?;
        let maps = vec![
            self.m(t, &j1, 1)?,
            compose_all(&[&self.m(t, &incl1, 1)?, &self.m(t, &rho1, 1)?, &sigma_inv])?,
            compose_all(&[&self.m(t, &sigma1, 1)?, &rho_inv, &self.m(t, &proj1, 1)?])?,
            self.m(t, &j2, 1)?,
        ];
        let terms = vec![
            self.h(t, &y1, 1)?,
            self.h(t, &d1, 1)?,
            self.h(t, &s21, 1)?,
            self.h(t, &y2, 1)?,
            self.h(t, &d2, 1)?,
        ];
        Ok(ExactSequence {
            labels: ["E1^2", "E^2", "E2^{0,2}", "E^3_(<=1)", "E^3"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            terms,
            maps,
        })
    }

    /// `E_1^2` two ways: `ℍ^2Ψ_t(τ≤1 D)` and `ker(E^2 → E_2^{0,2})`; the flag
    /// says whether `ℍ^2(j)` identifies the first with the second.
    pub fn e1_squared(&self, t: usize) -> Result<(FgAbGroup, FgAbGroup, bool), SpectralError> {
        let seq = self.e3_sequence(t)?;
        let (k, _) = fgab::kernel(&seq.maps[1]);
        let direct = self.h(t, &self.y, 2)?;
        let ok = seq.maps[0].is_injective() && fgab::is_exact_at(&seq.maps[0], &seq.maps[1]);
        Ok((direct, k, ok))
    }

    /// `ℍ^2Ψ_t(σ): Hom(T_t, H^2(D)) → ℍ^2Ψ_t(τ≥2 D)`.
    pub fn tau_ge2_comparison(&self, t: usize) -> Result<FgAbMorphism, SpectralError> {
        self.m(t, &self.sigma2, 2)
    }
}

/// Element-level test that two maps agree.
pub fn maps_agree(f: &FgAbMorphism, g: &FgAbMorphism) -> bool {
    f.source() == g.source() && f.target() == g.target() && f.sub_is_zero(g)
}

trait SubZero {
    fn sub_is_zero(&self, g: &FgAbMorphism) -> bool;
}

impl SubZero for FgAbMorphism {
    fn sub_is_zero(&self, g: &FgAbMorphism) -> bool {
        self.canonical_matrix()
            .checked_sub(&g.canonical_matrix())
            .map(|d| {
                let t = self.target().canonical_moduli();
                (0..d.rows()).all(|i| {
                    d.row(i).iter().all(|x| {
                        if t[i].is_zero() {
                            x.is_zero()
                        } else {
                            (x % &t[i]).is_zero()
                        }
                    })
                })
            })
            .unwrap_or(false)
    }
}
