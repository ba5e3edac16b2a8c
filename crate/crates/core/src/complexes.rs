//! Bounded cochain complexes of modules over a finite group: cohomology,
//! truncations, shifts, cones and long exact sequences.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::fgab::{self, FgAbError, FgAbGroup, FgAbMorphism};
use crate::grpmod::{module_sum, FiniteGroup, GModule, GroupError};
use crate::lattice::{Lattice, Subquotient};
use crate::linalg::{Int, IntMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("d∘d ≠ 0 at degree {0}")]
    NotAComplex(i64),
    #[error("differential at degree {0} does not match its objects")]
    ObjectMismatch(i64),
    #[error("differential at degree {0} is not equivariant")]
    NotEquivariant(i64),
    #[error("chain map does not commute with differentials at degree {0}")]
    NotAChainMap(i64),
    #[error("sequence is not exact at degree {0}")]
    NotExact(i64),
    #[error("lifting failed in the connecting map at degree {degree}")]
    LiftFailure { degree: i64 },
    #[error("element is not a cocycle in degree {0}")]
    NotACocycle(i64),
    #[error("complexes live over different groups")]
    GroupMismatch,
    #[error(transparent)]
    Module(#[from] GroupError),
    #[error(transparent)]
    Group(#[from] FgAbError),
}

struct ComplexData {
    group: FiniteGroup,
    lo: i64,
    objects: Vec<GModule>,
    diffs: Vec<FgAbMorphism>,
    valid_through: Option<i64>,
    cache: Mutex<HashMap<i64, Arc<CohomologyDatum>>>,
}

/// A bounded cochain complex; objects outside `lo..=hi` are zero.
/// `valid_through` records the top degree through which a truncated model
/// computes the intended object (`None` means exact).
#[derive(Clone)]
pub struct CochainComplex(Arc<ComplexData>);

impl fmt::Debug for CochainComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shapes: Vec<String> = self
            .0
            .objects
            .iter()
            .map(|m| m.underlying().shape().to_string())
            .collect();
        write!(f, "Complex[lo {}: {}]", self.0.lo, shapes.join(" → "))
    }
}

impl PartialEq for CochainComplex {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.group == other.0.group
                && self.0.lo == other.0.lo
                && self.0.objects == other.0.objects
                && self
                    .0
                    .diffs
                    .iter()
                    .zip(&other.0.diffs)
                    .all(|(a, b)| a.matrix() == b.matrix()))
    }
}

impl CochainComplex {
    /// `diffs[k]` is the differential out of `objects[k]`; there is one
    /// fewer differential than objects.
    pub fn new(
        group: &FiniteGroup,
        lo: i64,
        objects: Vec<GModule>,
        diffs: Vec<FgAbMorphism>,
    ) -> Result<Self, ComplexError> {
        if diffs.len() + 1 != objects.len().max(1) && !(objects.is_empty() && diffs.is_empty()) {
            return Err(ComplexError::ObjectMismatch(lo));
        }
        if objects.iter().any(|m| m.group() != group) {
            return Err(ComplexError::GroupMismatch);
        }
        for (k, d) in diffs.iter().enumerate() {
            let n = lo + k as i64;
            if d.source() != objects[k].underlying() || d.target() != objects[k + 1].underlying() {
                return Err(ComplexError::ObjectMismatch(n));
            }
            for g in group.elements() {
                let l = d.compose(objects[k].action(g))?;
                let r = objects[k + 1].action(g).compose(d)?;
                if !l.equals(&r) {
                    return Err(ComplexError::NotEquivariant(n));
                }
            }
            if k + 1 < diffs.len() && !diffs[k + 1].compose(d)?.is_zero() {
                return Err(ComplexError::NotAComplex(n));
            }
        }
        Ok(Self::build(group, lo, objects, diffs, None))
    }

    /// A complex of abelian groups (trivial group acting).
    pub fn plain(lo: i64, objects: Vec<FgAbGroup>, diffs: Vec<FgAbMorphism>) -> Result<Self, ComplexError> {
        let g = FiniteGroup::trivial();
        let mods = objects.iter().map(|o| GModule::trivial(&g, o)).collect();
        Self::new(&g, lo, mods, diffs)
    }

    pub(crate) fn build(
        group: &FiniteGroup,
        lo: i64,
        objects: Vec<GModule>,
        diffs: Vec<FgAbMorphism>,
        valid_through: Option<i64>,
    ) -> Self {
        CochainComplex(Arc::new(ComplexData {
            group: group.clone(),
            lo,
            objects,
            diffs,
            valid_through,
            cache: Mutex::new(HashMap::new()),
        }))
    }

    pub fn zero(group: &FiniteGroup) -> Self {
        Self::build(group, 0, Vec::new(), Vec::new(), None)
    }

    /// One module in degree `n`.
    pub fn stalk_of(m: &GModule, n: i64) -> Self {
        Self::build(m.group(), n, vec![m.clone()], Vec::new(), None)
    }

    pub fn with_valid_through(&self, v: Option<i64>) -> Self {
        Self::build(&self.0.group, self.0.lo, self.0.objects.clone(), self.0.diffs.clone(), v)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.0.group
    }

    pub fn lo(&self) -> i64 {
        self.0.lo
    }

    /// Last degree carrying an object (`lo - 1` for the zero complex).
    pub fn hi(&self) -> i64 {
        self.0.lo + self.0.objects.len() as i64 - 1
    }

    pub fn is_zero_complex(&self) -> bool {
        self.0.objects.iter().all(|m| m.underlying().ambient_rank() == 0)
    }

    pub fn valid_through(&self) -> Option<i64> {
        self.0.valid_through
    }

    /// The lowest degree whose object is nonzero, if any.
    pub fn support_lo(&self) -> Option<i64> {
        (self.lo()..=self.hi()).find(|&n| !self.module(n).underlying().is_trivial())
    }

    pub fn module(&self, n: i64) -> GModule {
        match self.index(n) {
            Some(k) => self.0.objects[k].clone(),
            None => GModule::trivial(&self.0.group, &FgAbGroup::zero()),
        }
    }

    pub fn object(&self, n: i64) -> FgAbGroup {
        match self.index(n) {
            Some(k) => self.0.objects[k].underlying().clone(),
            None => FgAbGroup::zero(),
        }
    }

    /// `d^n: C^n → C^{n+1}`.
    pub fn d(&self, n: i64) -> FgAbMorphism {
        if n >= self.lo() && n < self.hi() {
            self.0.diffs[(n - self.lo()) as usize].clone()
        } else {
            FgAbMorphism::zero(&self.object(n), &self.object(n + 1))
        }
    }

    fn index(&self, n: i64) -> Option<usize> {
        if n >= self.lo() && n <= self.hi() {
            Some((n - self.lo()) as usize)
        } else {
            None
        }
    }

    /// `H^n` with its induced action, cached per degree.
    pub fn cohomology(&self, n: i64) -> Arc<CohomologyDatum> {
        if let Some(h) = self.0.cache.lock().expect("cache").get(&n) {
            return h.clone();
        }
        let h = Arc::new(CohomologyDatum::compute(self, n));
        self.0.cache.lock().expect("cache").insert(n, h.clone());
        h
    }
}

/// `H^n(C) = Z^n / B^n` together with lifting and class maps.
pub struct CohomologyDatum {
    pub degree: i64,
    pub module: GModule,
    cochains: FgAbGroup,
    sq: Subquotient,
}

impl fmt::Debug for CohomologyDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H^{} = {}", self.degree, self.group().shape())
    }
}

impl CohomologyDatum {
    fn compute(c: &CochainComplex, n: i64) -> Self {
        let cn = c.object(n);
        let z = Lattice::new(cn.canonical_moduli(), c.d(n).solver().kernel_gens().to_vec());
        let b = c.d(n - 1).solver().image_gens();
        let sq = Subquotient::new(z, &b);
        let h = FgAbGroup::from_diagonal(sq.quotient_moduli());
        let mut datum = CohomologyDatum {
            degree: n,
            module: GModule::trivial(c.group(), &h),
            cochains: cn,
            sq,
        };
        let cm = c.module(n);
        let maps = c
            .group()
            .elements()
            .map(|g| datum.induced(cm.action(g), &datum).expect("action preserves cocycles"))
            .collect();
        datum.module = GModule::from_maps_unchecked(c.group(), &h, maps);
        datum
    }

    pub fn group(&self) -> &FgAbGroup {
        self.module.underlying()
    }

    pub fn cochains(&self) -> &FgAbGroup {
        &self.cochains
    }

    /// A cocycle (ambient coordinates) representing the class with the given
    /// canonical coordinates.
    pub fn cocycle_lift(&self, h: &[Int]) -> Vec<Int> {
        let mut acc = vec![Int::zero(); self.cochains.canonical_rank()];
        for (c, l) in h.iter().zip(self.sq.lifts()) {
            if !c.is_zero() {
                crate::lattice::axpy(&mut acc, c, l);
            }
        }
        self.cochains.from_canonical(&acc)
    }

    /// Canonical coordinates of the class of a cochain, `None` if it is not
    /// a cocycle.
    pub fn class_of(&self, x: &[Int]) -> Option<Vec<Int>> {
        self.sq.class_of(&self.cochains.canonical(x))
    }

    pub fn is_cocycle(&self, x: &[Int]) -> bool {
        self.class_of(x).is_some()
    }

    pub fn is_coboundary(&self, x: &[Int]) -> bool {
        self.class_of(x).is_some_and(|c| self.group().canonical(&c).iter().all(Zero::is_zero))
    }

    /// Map on cohomology induced by a cochain-level map that sends cocycles
    /// to cocycles and coboundaries to coboundaries.
    pub fn induced(&self, f: &FgAbMorphism, target: &CohomologyDatum) -> Result<FgAbMorphism, ComplexError> {
        let k = self.group().canonical_rank();
        let mut cols = Vec::with_capacity(k);
        for j in 0..k {
            let mut e = vec![Int::zero(); k];
            e[j] = Int::one();
            let y = f.apply_vec(&self.cocycle_lift(&e));
            cols.push(target.class_of(&y).ok_or(ComplexError::NotACocycle(target.degree))?);
        }
        Ok(FgAbMorphism::from_canonical(self.group(), target.group(), &cols)?)
    }

    /// `A → H^n` for a map `A → C^n` landing in cocycles.
    pub fn class_map(&self, f: &FgAbMorphism) -> Result<FgAbMorphism, ComplexError> {
        let a = f.source();
        let k = a.canonical_rank();
        let mut cols = Vec::with_capacity(k);
        for j in 0..k {
            let mut e = vec![Int::zero(); k];
            e[j] = Int::one();
            let y = f.apply_vec(&a.from_canonical(&e));
            cols.push(self.class_of(&y).ok_or(ComplexError::NotACocycle(self.degree))?);
        }
        Ok(FgAbMorphism::from_canonical(a, self.group(), &cols)?)
    }
}

/// A morphism of complexes, given degreewise.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub source: CochainComplex,
    pub target: CochainComplex,
    lo: i64,
    maps: Vec<FgAbMorphism>,
}

impl ChainMap {
    /// `f(n)` supplies the component in degree `n`; `None` means zero.
    pub fn new(
        source: &CochainComplex,
        target: &CochainComplex,
        f: impl Fn(i64) -> Option<FgAbMorphism>,
    ) -> Result<Self, ComplexError> {
        let m = Self::unchecked(source, target, f);
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn unchecked(
        source: &CochainComplex,
        target: &CochainComplex,
        f: impl Fn(i64) -> Option<FgAbMorphism>,
    ) -> Self {
        let lo = source.lo();
        let hi = source.hi();
        let maps = (lo..=hi)
            .map(|n| f(n).unwrap_or_else(|| FgAbMorphism::zero(&source.object(n), &target.object(n))))
            .collect();
        ChainMap {
            source: source.clone(),
            target: target.clone(),
            lo,
            maps,
        }
    }

    fn validate(&self) -> Result<(), ComplexError> {
        if self.source.group() != self.target.group() {
            return Err(ComplexError::GroupMismatch);
        }
        let g = self.source.group();
        let lo = self.source.lo().min(self.target.lo()) - 1;
        let hi = self.source.hi().max(self.target.hi()) + 1;
        for n in lo..=hi {
            let f = self.at(n);
            if f.source() != &self.source.object(n) || f.target() != &self.target.object(n) {
                return Err(ComplexError::ObjectMismatch(n));
            }
            let l = self.target.d(n).compose(&f)?;
            let r = self.at(n + 1).compose(&self.source.d(n))?;
            if !l.equals(&r) {
                return Err(ComplexError::NotAChainMap(n));
            }
            let (sm, tm) = (self.source.module(n), self.target.module(n));
            for e in g.elements() {
                if !f.compose(sm.action(e))?.equals(&tm.action(e).compose(&f)?) {
                    return Err(ComplexError::NotEquivariant(n));
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, n: i64) -> FgAbMorphism {
        if n >= self.lo && n < self.lo + self.maps.len() as i64 {
            self.maps[(n - self.lo) as usize].clone()
        } else {
            FgAbMorphism::zero(&self.source.object(n), &self.target.object(n))
        }
    }

    pub fn identity(c: &CochainComplex) -> Self {
        Self::unchecked(c, c, |n| Some(FgAbMorphism::identity(&c.object(n))))
    }

    pub fn zero(source: &CochainComplex, target: &CochainComplex) -> Self {
        Self::unchecked(source, target, |_| None)
    }

    pub fn neg(&self) -> Self {
        Self::unchecked(&self.source, &self.target, |n| Some(self.at(n).neg()))
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &ChainMap) -> Result<Self, ComplexError> {
        if g.target != self.source {
            return Err(ComplexError::ObjectMismatch(self.source.lo()));
        }
        let maps: Vec<(i64, FgAbMorphism)> = (g.source.lo()..=g.source.hi())
            .map(|n| Ok((n, self.at(n).compose(&g.at(n))?)))
            .collect::<Result<_, ComplexError>>()?;
        Ok(Self::unchecked(&g.source, &self.target, |n| {
            maps.iter().find(|(k, _)| *k == n).map(|(_, f)| f.clone())
        }))
    }

    /// Induced map `H^n(source) → H^n(target)`.
    pub fn on_cohomology(&self, n: i64) -> Result<FgAbMorphism, ComplexError> {
        let hs = self.source.cohomology(n);
        let ht = self.target.cohomology(n);
        hs.induced(&self.at(n), &ht)
    }
}

/// `τ≤n C` with its inclusion into `C`.
pub fn truncate_le(c: &CochainComplex, n: i64) -> (CochainComplex, ChainMap) {
    let valid = match c.valid_through() {
        Some(v) if n > v => Some(v),
        _ => None,
    };
    if n >= c.hi() {
        let t = c.with_valid_through(valid);
        let incl = ChainMap::unchecked(&t, c, |k| Some(FgAbMorphism::identity(&c.object(k))));
        return (t, incl);
    }
    let g = c.group();
    if n < c.lo() {
        let z = CochainComplex::build(g, c.lo(), Vec::new(), Vec::new(), valid);
        return (z.clone(), ChainMap::zero(&z, c));
    }
    let (zn, zincl) = fgab::kernel(&c.d(n));
    let cm = c.module(n);
    let maps = g
        .elements()
        .map(|e| {
            fgab::factor_through(&cm.action(e).compose(&zincl).expect("composable"), &zincl)
                .expect("cocycles are stable")
        })
        .collect();
    let zmod = GModule::from_maps_unchecked(g, &zn, maps);
    let mut objects: Vec<GModule> = (c.lo()..n).map(|k| c.module(k)).collect();
    objects.push(zmod);
    let mut diffs: Vec<FgAbMorphism> = (c.lo()..n - 1).map(|k| c.d(k)).collect();
    if n > c.lo() {
        diffs.push(fgab::factor_through(&c.d(n - 1), &zincl).expect("boundaries are cocycles"));
    }
    let t = CochainComplex::build(g, c.lo(), objects, diffs, valid);
    let incl = ChainMap::unchecked(&t, c, |k| {
        if k < n {
            Some(FgAbMorphism::identity(&c.object(k)))
        } else if k == n {
            Some(zincl.clone())
        } else {
            None
        }
    });
    (t, incl)
}

/// `τ≥n C` with the projection from `C`.
pub fn truncate_ge(c: &CochainComplex, n: i64) -> (CochainComplex, ChainMap) {
    let g = c.group();
    if n <= c.lo() {
        return (c.clone(), ChainMap::identity(c));
    }
    if n > c.hi() {
        let z = CochainComplex::build(g, n, Vec::new(), Vec::new(), c.valid_through());
        return (z.clone(), ChainMap::zero(c, &z));
    }
    let (q, proj) = fgab::cokernel(&c.d(n - 1));
    let cm = c.module(n);
    let maps = g
        .elements()
        .map(|e| {
            fgab::induced_on_quotients(cm.action(e), &proj, &proj).expect("boundaries are stable")
        })
        .collect();
    let qmod = GModule::from_maps_unchecked(g, &q, maps);
    let mut objects = vec![qmod];
    objects.extend((n + 1..=c.hi()).map(|k| c.module(k)));
    let mut diffs = Vec::new();
    if n < c.hi() {
        diffs.push(
            fgab::induced_on_quotients(&c.d(n), &proj, &FgAbMorphism::identity(&c.object(n + 1)))
                .expect("d kills boundaries"),
        );
    }
    diffs.extend((n + 1..c.hi()).map(|k| c.d(k)));
    let t = CochainComplex::build(g, n, objects, diffs, c.valid_through());
    let p = ChainMap::unchecked(c, &t, |k| {
        if k == n {
            Some(proj.clone())
        } else if k > n {
            Some(FgAbMorphism::identity(&c.object(k)))
        } else {
            None
        }
    });
    (t, p)
}

/// `H^n(C)` placed in degree `n`.
pub fn stalk(c: &CochainComplex, n: i64) -> (CochainComplex, Arc<CohomologyDatum>) {
    let h = c.cohomology(n);
    let valid = match c.valid_through() {
        Some(v) if n > v => Some(v),
        _ => None,
    };
    (
        CochainComplex::build(c.group(), n, vec![h.module.clone()], Vec::new(), valid),
        h,
    )
}

/// `τ≤n C → stalk(C, n)`, the class map in degree `n`.
pub fn truncation_to_stalk(c: &CochainComplex, n: i64) -> Result<(CochainComplex, CochainComplex, ChainMap), ComplexError> {
    let (t, incl) = truncate_le(c, n);
    let (s, h) = stalk(c, n);
    let cls = h.class_map(&incl.at(n))?;
    let m = ChainMap::new(&t, &s, |k| (k == n).then(|| cls.clone()))?;
    Ok((t, s, m))
}

/// `stalk(C, n) → τ≥n C`, the inclusion of `H^n` into `C^n / B^n`.
pub fn stalk_to_truncation(c: &CochainComplex, n: i64) -> Result<(CochainComplex, CochainComplex, ChainMap), ComplexError> {
    let (t, proj) = truncate_ge(c, n);
    let (s, h) = stalk(c, n);
    let k = h.group().canonical_rank();
    let cols: Vec<Vec<Int>> = (0..k)
        .map(|j| {
            let mut e = vec![Int::zero(); k];
            e[j] = Int::one();
            let z = h.cocycle_lift(&e);
            t.object(n).canonical(&proj.at(n).apply_vec(&z))
        })
        .collect();
    let f = FgAbMorphism::from_canonical(h.group(), &t.object(n), &cols)?;
    let m = ChainMap::new(&s, &t, |k| (k == n).then(|| f.clone()))?;
    Ok((s, t, m))
}

/// `C[k]`: `C[k]^n = C^{n+k}` with differential `(-1)^k d`.
pub fn shift(c: &CochainComplex, k: i64) -> CochainComplex {
    let diffs = c
        .0
        .diffs
        .iter()
        .map(|d| if k.rem_euclid(2) == 1 { d.neg() } else { d.clone() })
        .collect();
    CochainComplex::build(
        c.group(),
        c.lo() - k,
        c.0.objects.clone(),
        diffs,
        c.valid_through().map(|v| v - k),
    )
}

/// `f[k]` between shifted complexes.
pub fn shift_map(f: &ChainMap, k: i64) -> ChainMap {
    let s = shift(&f.source, k);
    let t = shift(&f.target, k);
    ChainMap::unchecked(&s, &t, |n| Some(f.at(n + k)))
}

/// The same map with source and target replaced by equal complexes.
pub fn retarget(f: &ChainMap, source: &CochainComplex, target: &CochainComplex) -> Result<ChainMap, ComplexError> {
    if *source != f.source || *target != f.target {
        return Err(ComplexError::ObjectMismatch(source.lo()));
    }
    Ok(ChainMap::unchecked(source, target, |n| Some(f.at(n))))
}

/// Mapping cone with its structure maps `Y → cone(f) → X[1]`.
#[derive(Clone, Debug)]
pub struct Cone {
    pub complex: CochainComplex,
    pub incl: ChainMap,
    pub proj: ChainMap,
}

/// `cone(f)^n = X^{n+1} ⊕ Y^n`, `d = [[-d_X, 0], [f, d_Y]]`.
pub fn cone(f: &ChainMap) -> Result<Cone, ComplexError> {
    let x = &f.source;
    let y = &f.target;
    let g = x.group();
    let (lo, hi) = if x.hi() < x.lo() {
        (y.lo(), y.hi())
    } else if y.hi() < y.lo() {
        (x.lo() - 1, x.hi() - 1)
    } else {
        ((x.lo() - 1).min(y.lo()), (x.hi() - 1).max(y.hi()))
    };
    let sums: Vec<_> = (lo..=hi)
        .map(|n| module_sum(g, &[x.module(n + 1), y.module(n)]))
        .collect();
    let objects: Vec<GModule> = sums.iter().map(|(m, _)| m.clone()).collect();
    let mut diffs = Vec::new();
    for n in lo..hi {
        let (_, s) = &sums[(n - lo) as usize];
        let (_, t) = &sums[(n + 1 - lo) as usize];
        let dx = x.d(n + 1).neg().matrix().clone();
        let fx = f.at(n + 1).matrix().clone();
        let dy = y.d(n).matrix().clone();
        let top = dx.hstack(&IntMatrix::zeros(dx.rows(), dy.cols())).expect("block");
        let bottom = fx.hstack(&dy).expect("block");
        let m = top.vstack(&bottom).expect("block");
        debug_assert_eq!(m.rows(), t.group.ambient_rank());
        debug_assert_eq!(m.cols(), s.group.ambient_rank());
        diffs.push(FgAbMorphism::new_unchecked(&s.group, &t.group, m));
    }
    let valid = match (x.valid_through(), y.valid_through()) {
        (None, None) => None,
        (a, b) => Some(a.map(|v| v - 1).unwrap_or(i64::MAX).min(b.unwrap_or(i64::MAX))),
    };
    let complex = CochainComplex::build(g, lo, objects, diffs, valid);
    let x1 = shift(x, 1);
    let incl = ChainMap::unchecked(y, &complex, |n| {
        (n >= lo && n <= hi).then(|| sums[(n - lo) as usize].1.injections[1].clone())
    });
    let proj = ChainMap::unchecked(&complex, &x1, |n| Some(sums[(n - lo) as usize].1.projections[0].clone()));
    Ok(Cone { complex, incl, proj })
}

/// A degreewise short exact sequence of complexes.
#[derive(Clone, Debug)]
pub struct SESOfComplexes {
    pub i: ChainMap,
    pub p: ChainMap,
}

impl SESOfComplexes {
    pub fn new(i: ChainMap, p: ChainMap) -> Result<Self, ComplexError> {
        if i.target != p.source {
            return Err(ComplexError::ObjectMismatch(i.target.lo()));
        }
        let b = &i.target;
        let lo = i.source.lo().min(b.lo()).min(p.target.lo());
        let hi = i.source.hi().max(b.hi()).max(p.target.hi());
        for n in lo..=hi {
            let (f, g) = (i.at(n), p.at(n));
            if !f.is_injective() || !g.is_surjective() || !fgab::is_exact_at(&f, &g) {
                return Err(ComplexError::NotExact(n));
            }
        }
        Ok(SESOfComplexes { i, p })
    }

    pub fn a(&self) -> &CochainComplex {
        &self.i.source
    }

    pub fn b(&self) -> &CochainComplex {
        &self.i.target
    }

    pub fn c(&self) -> &CochainComplex {
        &self.p.target
    }

    /// `δ: H^n(C) → H^{n+1}(A)` by lifting, differentiating and pulling back.
    pub fn connecting(&self, n: i64) -> Result<FgAbMorphism, ComplexError> {
        let hc = self.c().cohomology(n);
        let ha = self.a().cohomology(n + 1);
        let k = hc.group().canonical_rank();
        let pn = self.p.at(n);
        let db = self.b().d(n);
        let inext = self.i.at(n + 1);
        let mut cols = Vec::with_capacity(k);
        for j in 0..k {
            let mut e = vec![Int::zero(); k];
            e[j] = Int::one();
            let z = hc.cocycle_lift(&e);
            let lift = pn.preimage_vec(&z).ok_or(ComplexError::LiftFailure { degree: n })?;
            let dl = db.apply_vec(&lift);
            let a = inext
                .preimage_vec(&dl)
                .ok_or(ComplexError::LiftFailure { degree: n })?;
            cols.push(ha.class_of(&a).ok_or(ComplexError::LiftFailure { degree: n })?);
        }
        Ok(FgAbMorphism::from_canonical(hc.group(), ha.group(), &cols)?)
    }
}

/// A finite piece of a long exact sequence: `terms[k] --maps[k]--> terms[k+1]`.
#[derive(Clone, Debug)]
pub struct ExactSequence {
    pub labels: Vec<String>,
    pub terms: Vec<FgAbGroup>,
    pub maps: Vec<FgAbMorphism>,
}

impl ExactSequence {
    /// Exactness at each interior term.
    pub fn exactness(&self) -> Vec<bool> {
        (1..self.terms.len().saturating_sub(1))
            .map(|k| fgab::is_exact_at(&self.maps[k - 1], &self.maps[k]))
            .collect()
    }

    pub fn is_exact(&self) -> bool {
        self.exactness().into_iter().all(|b| b)
    }
}

/// `H^n(A) → H^n(B) → H^n(C) → H^{n+1}(A) → …` for `n` in `from..=to`.
pub fn les_of_ses(ses: &SESOfComplexes, from: i64, to: i64) -> Result<ExactSequence, ComplexError> {
    let mut labels = Vec::new();
    let mut terms = Vec::new();
    let mut maps = Vec::new();
    for n in from..=to {
        labels.extend([format!("H^{n}(A)"), format!("H^{n}(B)"), format!("H^{n}(C)")]);
        terms.push(ses.a().cohomology(n).group().clone());
        terms.push(ses.b().cohomology(n).group().clone());
        terms.push(ses.c().cohomology(n).group().clone());
        maps.push(ses.i.on_cohomology(n)?);
        maps.push(ses.p.on_cohomology(n)?);
        maps.push(ses.connecting(n)?);
    }
    labels.push(format!("H^{}(A)", to + 1));
    terms.push(ses.a().cohomology(to + 1).group().clone());
    Ok(ExactSequence { labels, terms, maps })
}

/// True when `f` induces isomorphisms on `H^n` for `n` in `from..=to`.
pub fn quasi_iso_check(f: &ChainMap, from: i64, to: i64) -> Result<bool, ComplexError> {
    for n in from..=to {
        if !f.on_cohomology(n)?.is_isomorphism() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    /// `Z --2--> Z` in degrees 0, 1.
    fn two() -> CochainComplex {
        let z = FgAbGroup::free(1);
        let d = FgAbMorphism::new(&z, &z, m(&[&[2]])).unwrap();
        CochainComplex::plain(0, vec![z.clone(), z], vec![d]).unwrap()
    }

    #[test]
    fn cohomology_of_multiplication_by_two() {
        let c = two();
        assert!(c.cohomology(0).group().is_trivial());
        assert_eq!(c.cohomology(1).group().torsion(), &[int(2)]);
        assert!(c.cohomology(2).group().is_trivial());
        assert!(c.cohomology(-1).group().is_trivial());
        let h = c.cohomology(1);
        let lift = h.cocycle_lift(&[int(1)]);
        assert_eq!(h.class_of(&lift), Some(vec![int(1)]));
        assert!(h.is_coboundary(&[int(4)]));
    }

    #[test]
    fn rejects_non_complex() {
        let z = FgAbGroup::free(1);
        let one = FgAbMorphism::identity(&z);
        let r = CochainComplex::plain(0, vec![z.clone(), z.clone(), z], vec![one.clone(), one]);
        assert_eq!(r.unwrap_err(), ComplexError::NotAComplex(0));
    }

    #[test]
    fn truncations() {
        let c = two();
        let (le, incl) = truncate_le(&c, 0);
        assert!(le.object(0).is_trivial());
        assert!(incl.validate().is_ok());
        let (ge, p) = truncate_ge(&c, 1);
        assert_eq!(ge.lo(), 1);
        assert_eq!(ge.object(1).torsion(), &[int(2)]);
        assert!(p.validate().is_ok());
        let (s, h) = stalk(&c, 1);
        assert_eq!(s.object(1).shape(), h.group().shape());
        let (_, _, m) = stalk_to_truncation(&c, 1).unwrap();
        assert!(quasi_iso_check(&m, 0, 2).unwrap());
        let (_, _, m) = truncation_to_stalk(&c, 1).unwrap();
        assert!(m.validate().is_ok());
    }

    #[test]
    fn shift_and_cone() {
        let c = two();
        let s = shift(&c, 1);
        assert_eq!(s.lo(), -1);
        assert_eq!(s.d(-1).matrix()[(0, 0)], int(-2));
        assert_eq!(shift(&s, -1), c);
        assert_eq!(s.cohomology(0).group().torsion(), &[int(2)]);
        // cone of the identity is acyclic
        let id = ChainMap::identity(&c);
        let k = cone(&id).unwrap();
        for n in -2..=2 {
            assert!(k.complex.cohomology(n).group().is_trivial(), "degree {n}");
        }
        assert!(k.incl.validate().is_ok());
        assert!(k.proj.validate().is_ok());
        let ses = SESOfComplexes::new(k.incl.clone(), k.proj.clone()).unwrap();
        // the connecting map of Y → cone → X[1] is H(f)
        let delta = ses.connecting(0).unwrap();
        let hf = id.on_cohomology(1).unwrap();
        assert_eq!(delta.canonical_matrix(), hf.canonical_matrix());
    }

    #[test]
    fn snake_on_two() {
        // 0 → Z --2--> Z → Z/2 → 0 as stalks in degree 0
        let z = FgAbGroup::free(1);
        let z2 = FgAbGroup::cyclic(2);
        let a = CochainComplex::plain(0, vec![z.clone()], vec![]).unwrap();
        let b = CochainComplex::plain(0, vec![z.clone()], vec![]).unwrap();
        let c = CochainComplex::plain(0, vec![z2.clone()], vec![]).unwrap();
        let i = ChainMap::new(&a, &b, |n| (n == 0).then(|| FgAbMorphism::new(&z, &z, m(&[&[2]])).unwrap())).unwrap();
        let p = ChainMap::new(&b, &c, |n| (n == 0).then(|| FgAbMorphism::new(&z, &z2, m(&[&[1]])).unwrap())).unwrap();
        let ses = SESOfComplexes::new(i, p).unwrap();
        let les = les_of_ses(&ses, -1, 1).unwrap();
        assert!(les.is_exact());
    }
}
