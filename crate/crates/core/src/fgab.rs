//! Finitely presented abelian groups, their elements and morphisms.
//!
//! A group is `Z^n / R Z^m` for a relation matrix `R`. Internally every group
//! also carries canonical coordinates: a unimodular change of basis in which
//! the relations become diagonal, with trivial factors dropped. Groups built
//! by the calculus (kernels, images, cokernels, sums) are born diagonal.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lattice::{reduce_vec, Lattice, MapSolver, SparseRows, Subquotient};
use crate::linalg::{int, smith_normal_form, Int, IntMatrix, SmithForm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FgAbError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not well defined on relation column {column}")]
    NotWellDefined { column: usize },
    #[error("group is infinite")]
    InfiniteGroup,
    #[error("element does not belong to the expected group")]
    ParentMismatch,
}

/// Isomorphism type: free rank and invariant factors different from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    pub free_rank: usize,
    pub torsion: Vec<Int>,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.torsion.iter().map(|d| format!("Z/{d}")).collect();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[derive(Debug)]
enum Relations {
    Dense(IntMatrix),
    Diagonal(Vec<Int>),
}

#[derive(Debug)]
struct GroupData {
    ambient: usize,
    relations: Relations,
    /// canonical coords = coord * ambient; `None` means identity
    coord: Option<IntMatrix>,
    /// ambient representative of canonical basis vector j = column j
    gens: Option<IntMatrix>,
    moduli: Vec<Int>,
    shape: OnceLock<Shape>,
    smith: OnceLock<SmithForm>,
}

/// A finitely presented abelian group. Cloning is cheap.
#[derive(Clone)]
pub struct FgAbGroup(Arc<GroupData>);

impl fmt::Debug for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FgAbGroup({}; ambient {})", self.shape(), self.ambient_rank())
    }
}

impl PartialEq for FgAbGroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.ambient == other.0.ambient
                && self.0.moduli == other.0.moduli
                && self.0.coord == other.0.coord
                && self.0.gens == other.0.gens)
    }
}

impl Eq for FgAbGroup {}

impl FgAbGroup {
    /// `Z^n` modulo the column lattice of `r`.
    pub fn from_relations(n: usize, r: &IntMatrix) -> Result<Self, FgAbError> {
        if r.rows() != n {
            return Err(FgAbError::DimensionMismatch {
                expected: n,
                found: r.rows(),
            });
        }
        if let Some(d) = diagonal_like(r) {
            return Ok(Self::build_diagonal(d, Relations::Dense(r.clone())));
        }
        let snf = smith_normal_form(r);
        let mut keep = Vec::new();
        let mut moduli = Vec::new();
        for i in 0..n {
            let d = snf.divisors.get(i).cloned().unwrap_or_else(Int::zero);
            if !d.is_one() {
                keep.push(i);
                moduli.push(d);
            }
        }
        let coord = snf.u.select_rows(&keep);
        let gens = snf.u_inv.select_cols(&keep);
        let data = GroupData {
            ambient: n,
            relations: Relations::Dense(r.clone()),
            coord: Some(coord),
            gens: Some(gens),
            moduli,
            shape: OnceLock::new(),
            smith: OnceLock::new(),
        };
        let _ = data.smith.set(snf);
        Ok(FgAbGroup(Arc::new(data)))
    }

    /// `⊕ Z/d_i` (a zero entry gives a copy of `Z`, a unit a trivial factor).
    pub fn from_diagonal(moduli: &[Int]) -> Self {
        let d: Vec<Int> = moduli.iter().map(|m| m.abs()).collect();
        Self::build_diagonal(d.clone(), Relations::Diagonal(d))
    }

    fn build_diagonal(d: Vec<Int>, relations: Relations) -> Self {
        let n = d.len();
        let keep: Vec<usize> = (0..n).filter(|&i| !d[i].is_one()).collect();
        let (coord, gens) = if keep.len() == n {
            (None, None)
        } else {
            let id = IntMatrix::identity(n);
            (Some(id.select_rows(&keep)), Some(id.select_cols(&keep)))
        };
        let moduli = keep.iter().map(|&i| d[i].clone()).collect();
        FgAbGroup(Arc::new(GroupData {
            ambient: n,
            relations,
            coord,
            gens,
            moduli,
            shape: OnceLock::new(),
            smith: OnceLock::new(),
        }))
    }

    pub fn cyclic(n: i64) -> Self {
        Self::from_diagonal(&[int(n)])
    }

    pub fn free(rank: usize) -> Self {
        Self::from_diagonal(&vec![Int::zero(); rank])
    }

    pub fn zero() -> Self {
        Self::from_diagonal(&[])
    }

    pub fn ambient_rank(&self) -> usize {
        self.0.ambient
    }

    /// Relation matrix (columns are relations).
    pub fn relations(&self) -> IntMatrix {
        match &self.0.relations {
            Relations::Dense(r) => r.clone(),
            Relations::Diagonal(d) => {
                let cols: Vec<usize> = (0..d.len()).filter(|&i| !d[i].is_zero()).collect();
                IntMatrix::diagonal(d).select_cols(&cols)
            }
        }
    }

    pub fn smith_form(&self) -> &SmithForm {
        self.0.smith.get_or_init(|| smith_normal_form(&self.relations()))
    }

    pub fn shape(&self) -> &Shape {
        self.0.shape.get_or_init(|| shape_of_diagonal(&self.0.moduli))
    }

    pub fn free_rank(&self) -> usize {
        self.shape().free_rank
    }

    pub fn torsion(&self) -> &[Int] {
        &self.shape().torsion
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank() == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.moduli.is_empty()
    }

    /// Order, when finite.
    pub fn order(&self) -> Option<Int> {
        if !self.is_finite() {
            return None;
        }
        Some(self.0.moduli.iter().fold(Int::one(), |acc, m| acc * m))
    }

    pub fn is_isomorphic(&self, other: &FgAbGroup) -> bool {
        self.shape() == other.shape()
    }

    /// Moduli of the canonical coordinates (0 for free ones, never 1).
    pub fn canonical_moduli(&self) -> &[Int] {
        &self.0.moduli
    }

    pub fn canonical_rank(&self) -> usize {
        self.0.moduli.len()
    }

    /// Canonical coordinates of an ambient vector, reduced.
    pub fn canonical(&self, x: &[Int]) -> Vec<Int> {
        let mut c = match &self.0.coord {
            None => x.to_vec(),
            Some(m) => m.mul_vec(x),
        };
        reduce_vec(&mut c, &self.0.moduli);
        c
    }

    /// Ambient representative of a canonical coordinate vector.
    pub fn from_canonical(&self, c: &[Int]) -> Vec<Int> {
        match &self.0.gens {
            None => c.to_vec(),
            Some(m) => m.mul_vec(c),
        }
    }

    pub(crate) fn coord_matrix(&self) -> IntMatrix {
        self.0
            .coord
            .clone()
            .unwrap_or_else(|| IntMatrix::identity(self.0.ambient))
    }

    pub(crate) fn gens_matrix(&self) -> IntMatrix {
        self.0
            .gens
            .clone()
            .unwrap_or_else(|| IntMatrix::identity(self.0.ambient))
    }

    pub fn element(&self, coords: Vec<Int>) -> Result<FgAbElement, FgAbError> {
        if coords.len() != self.ambient_rank() {
            return Err(FgAbError::DimensionMismatch {
                expected: self.ambient_rank(),
                found: coords.len(),
            });
        }
        Ok(FgAbElement {
            parent: self.clone(),
            coords,
        })
    }

    pub fn element_i64(&self, coords: &[i64]) -> Result<FgAbElement, FgAbError> {
        self.element(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn zero_element(&self) -> FgAbElement {
        FgAbElement {
            parent: self.clone(),
            coords: vec![Int::zero(); self.ambient_rank()],
        }
    }

    /// Element with canonical coordinates `c`.
    pub fn element_from_canonical(&self, c: &[Int]) -> FgAbElement {
        FgAbElement {
            parent: self.clone(),
            coords: self.from_canonical(c),
        }
    }

    /// The canonical generators as elements.
    pub fn generators(&self) -> Vec<FgAbElement> {
        (0..self.canonical_rank())
            .map(|j| {
                let mut e = vec![Int::zero(); self.canonical_rank()];
                e[j] = Int::one();
                self.element_from_canonical(&e)
            })
            .collect()
    }

    pub fn contains(&self, x: &FgAbElement) -> bool {
        x.parent == *self
    }

    /// True when `x` lies in the relation lattice, decided by solving.
    pub fn is_relation(&self, x: &[Int]) -> bool {
        self.canonical(x).iter().all(Zero::is_zero)
    }
}

fn diagonal_like(r: &IntMatrix) -> Option<Vec<Int>> {
    let mut d = vec![Int::zero(); r.rows()];
    for j in 0..r.cols() {
        let mut hit = None;
        for i in 0..r.rows() {
            if !r[(i, j)].is_zero() {
                if hit.is_some() {
                    return None;
                }
                hit = Some(i);
            }
        }
        if let Some(i) = hit {
            d[i] = d[i].gcd(&r[(i, j)]);
        }
    }
    Some(d)
}

/// Invariant factors of `⊕ Z/m_i`.
fn shape_of_diagonal(moduli: &[Int]) -> Shape {
    let free_rank = moduli.iter().filter(|m| m.is_zero()).count();
    let mut t: Vec<Int> = moduli.iter().filter(|m| !m.is_zero()).cloned().collect();
    t.sort();
    // pairwise gcd/lcm sweep leaves a divisibility chain
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            if t[j].is_multiple_of(&t[i]) {
                continue;
            }
            let g = t[i].gcd(&t[j]);
            let l = t[i].lcm(&t[j]);
            t[i] = g;
            t[j] = l;
        }
    }
    t.retain(|d| !d.is_one());
    Shape {
        free_rank,
        torsion: t,
    }
}

/// An element of a presented group, stored by ambient coordinates.
#[derive(Clone)]
pub struct FgAbElement {
    parent: FgAbGroup,
    coords: Vec<Int>,
}

impl fmt::Debug for FgAbElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.canonical().iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", c.join(","))
    }
}

impl PartialEq for FgAbElement {
    fn eq(&self, other: &Self) -> bool {
        self.parent == other.parent && self.canonical() == other.canonical()
    }
}

impl Eq for FgAbElement {}

impl Hash for FgAbElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical().hash(state);
    }
}

impl FgAbElement {
    pub fn parent(&self) -> &FgAbGroup {
        &self.parent
    }

    pub fn coords(&self) -> &[Int] {
        &self.coords
    }

    /// Canonical representative: canonical coordinates reduced modulo the
    /// divisors, free coordinates unchanged.
    pub fn canonical(&self) -> Vec<Int> {
        self.parent.canonical(&self.coords)
    }

    pub fn is_zero(&self) -> bool {
        self.canonical().iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &FgAbElement) -> Result<FgAbElement, FgAbError> {
        if self.parent != other.parent {
            return Err(FgAbError::ParentMismatch);
        }
        Ok(FgAbElement {
            parent: self.parent.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn neg(&self) -> FgAbElement {
        FgAbElement {
            parent: self.parent.clone(),
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn sub(&self, other: &FgAbElement) -> Result<FgAbElement, FgAbError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Int) -> FgAbElement {
        FgAbElement {
            parent: self.parent.clone(),
            coords: self.coords.iter().map(|a| a * c).collect(),
        }
    }

    /// Equality decided through the generic modular solver rather than
    /// canonical coordinates; used to cross-check the fast path.
    pub fn equals_by_solving(&self, other: &FgAbElement) -> bool {
        if self.parent != other.parent {
            return false;
        }
        let diff: Vec<Int> = self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect();
        let n = self.parent.ambient_rank();
        crate::linalg::solve_mod(&IntMatrix::zeros(n, 0), &diff, &self.parent.relations())
            .expect("shapes agree")
            .is_some()
    }
}

/// All elements of a finite group, in canonical-coordinate order.
pub fn enumerate_elements(g: &FgAbGroup) -> Result<Vec<FgAbElement>, FgAbError> {
    if !g.is_finite() {
        return Err(FgAbError::InfiniteGroup);
    }
    let moduli = g.canonical_moduli();
    let mut out = Vec::new();
    let mut c = vec![Int::zero(); moduli.len()];
    loop {
        out.push(g.element_from_canonical(&c));
        let mut i = 0;
        loop {
            if i == moduli.len() {
                return Ok(out);
            }
            c[i] += 1;
            if c[i] < moduli[i] {
                break;
            }
            c[i] = Int::zero();
            i += 1;
        }
    }
}

struct MorphData {
    source: FgAbGroup,
    target: FgAbGroup,
    matrix: IntMatrix,
    solver: OnceLock<MapSolver>,
}

/// A well-defined homomorphism given by an integer matrix on ambient
/// coordinates. Cloning is cheap.
#[derive(Clone)]
pub struct FgAbMorphism(Arc<MorphData>);

impl fmt::Debug for FgAbMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FgAbMorphism({:?} -> {:?}, {:?})",
            self.0.source, self.0.target, self.0.matrix
        )
    }
}

impl FgAbMorphism {
    /// Checks that `a` maps every source relation into the target relations.
    pub fn new(source: &FgAbGroup, target: &FgAbGroup, a: IntMatrix) -> Result<Self, FgAbError> {
        if a.rows() != target.ambient_rank() {
            return Err(FgAbError::DimensionMismatch {
                expected: target.ambient_rank(),
                found: a.rows(),
            });
        }
        if a.cols() != source.ambient_rank() {
            return Err(FgAbError::DimensionMismatch {
                expected: source.ambient_rank(),
                found: a.cols(),
            });
        }
        let rel = source.relations();
        for j in 0..rel.cols() {
            let img = a.mul_vec(&rel.col(j));
            if !target.is_relation(&img) {
                return Err(FgAbError::NotWellDefined { column: j });
            }
        }
        Ok(Self::new_unchecked(source, target, a))
    }

    /// Skips the well-definedness check; for maps correct by construction.
    pub(crate) fn new_unchecked(source: &FgAbGroup, target: &FgAbGroup, a: IntMatrix) -> Self {
        debug_assert_eq!(a.rows(), target.ambient_rank());
        debug_assert_eq!(a.cols(), source.ambient_rank());
        FgAbMorphism(Arc::new(MorphData {
            source: source.clone(),
            target: target.clone(),
            matrix: a,
            solver: OnceLock::new(),
        }))
    }

    pub fn zero(source: &FgAbGroup, target: &FgAbGroup) -> Self {
        Self::new_unchecked(
            source,
            target,
            IntMatrix::zeros(target.ambient_rank(), source.ambient_rank()),
        )
    }

    pub fn identity(g: &FgAbGroup) -> Self {
        Self::new_unchecked(g, g, IntMatrix::identity(g.ambient_rank()))
    }

    /// Map given by its values on the canonical generators (canonical
    /// target coordinates, one column per source canonical generator).
    pub fn from_canonical(
        source: &FgAbGroup,
        target: &FgAbGroup,
        columns: &[Vec<Int>],
    ) -> Result<Self, FgAbError> {
        if columns.len() != source.canonical_rank() {
            return Err(FgAbError::DimensionMismatch {
                expected: source.canonical_rank(),
                found: columns.len(),
            });
        }
        let tm = target.canonical_moduli();
        for (j, c) in columns.iter().enumerate() {
            let m = &source.canonical_moduli()[j];
            let img: Vec<Int> = c.iter().map(|v| v * m).collect();
            let mut r = img;
            reduce_vec(&mut r, tm);
            if r.iter().any(|x| !x.is_zero()) {
                return Err(FgAbError::NotWellDefined { column: j });
            }
        }
        let canon = IntMatrix::from_columns(target.canonical_rank(), columns);
        let a = target
            .gens_matrix()
            .mul(&canon)
            .mul(&source.coord_matrix());
        Ok(Self::new_unchecked(source, target, a))
    }

    pub fn source(&self) -> &FgAbGroup {
        &self.0.source
    }

    pub fn target(&self) -> &FgAbGroup {
        &self.0.target
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0.matrix
    }

    /// Matrix in canonical coordinates, rows reduced modulo the target moduli.
    pub fn canonical_matrix(&self) -> IntMatrix {
        let src = self.source();
        let tgt = self.target();
        let mut m = match (&tgt.0.coord, &src.0.gens) {
            (None, None) => self.0.matrix.clone(),
            (Some(c), None) => c.mul(&self.0.matrix),
            (None, Some(g)) => self.0.matrix.mul(g),
            (Some(c), Some(g)) => c.mul(&self.0.matrix).mul(g),
        };
        let tm = tgt.canonical_moduli();
        for (i, t) in tm.iter().enumerate() {
            if !t.is_zero() {
                for x in m.row_mut(i) {
                    *x = x.mod_floor(t);
                }
            }
        }
        m
    }

    pub(crate) fn solver(&self) -> &MapSolver {
        self.0.solver.get_or_init(|| {
            let m = self.canonical_matrix();
            MapSolver::new(
                SparseRows::from_dense(&m),
                self.source().canonical_moduli(),
                self.target().canonical_moduli(),
            )
        })
    }

    pub fn apply(&self, x: &FgAbElement) -> Result<FgAbElement, FgAbError> {
        if x.parent != *self.source() {
            return Err(FgAbError::ParentMismatch);
        }
        Ok(FgAbElement {
            parent: self.target().clone(),
            coords: self.0.matrix.mul_vec(&x.coords),
        })
    }

    /// Image of an ambient coordinate vector.
    pub fn apply_vec(&self, x: &[Int]) -> Vec<Int> {
        self.0.matrix.mul_vec(x)
    }

    /// `self ∘ g`
    pub fn compose(&self, g: &FgAbMorphism) -> Result<FgAbMorphism, FgAbError> {
        if g.target() != self.source() {
            return Err(FgAbError::ParentMismatch);
        }
        Ok(Self::new_unchecked(
            g.source(),
            self.target(),
            self.0.matrix.mul(&g.0.matrix),
        ))
    }

    pub fn add(&self, other: &FgAbMorphism) -> Result<FgAbMorphism, FgAbError> {
        if self.source() != other.source() || self.target() != other.target() {
            return Err(FgAbError::ParentMismatch);
        }
        Ok(Self::new_unchecked(
            self.source(),
            self.target(),
            self.0.matrix.checked_add(&other.0.matrix).expect("same shape"),
        ))
    }

    pub fn neg(&self) -> FgAbMorphism {
        Self::new_unchecked(self.source(), self.target(), self.0.matrix.neg())
    }

    pub fn scale(&self, c: &Int) -> FgAbMorphism {
        Self::new_unchecked(self.source(), self.target(), self.0.matrix.scale(c))
    }

    pub fn is_zero(&self) -> bool {
        let src = self.source();
        (0..src.canonical_rank()).all(|j| {
            let mut e = vec![Int::zero(); src.canonical_rank()];
            e[j] = Int::one();
            let x = src.from_canonical(&e);
            self.target().is_relation(&self.apply_vec(&x))
        })
    }

    /// Equality as homomorphisms (agreement on generators).
    pub fn equals(&self, other: &FgAbMorphism) -> bool {
        self.source() == other.source()
            && self.target() == other.target()
            && self.add(&other.neg()).map(|d| d.is_zero()).unwrap_or(false)
    }

    pub fn is_injective(&self) -> bool {
        kernel(self).0.is_trivial()
    }

    pub fn is_surjective(&self) -> bool {
        cokernel(self).0.is_trivial()
    }

    pub fn is_isomorphism(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    /// Some canonical-coordinate preimage of canonical coordinates `y`.
    pub(crate) fn preimage_canonical(&self, y: &[Int]) -> Option<Vec<Int>> {
        self.solver().preimage(y)
    }

    /// Some ambient preimage of the ambient vector `y`.
    pub fn preimage_vec(&self, y: &[Int]) -> Option<Vec<Int>> {
        let c = self.target().canonical(y);
        self.preimage_canonical(&c)
            .map(|x| self.source().from_canonical(&x))
    }
}

/// Kernel with its inclusion.
pub fn kernel(f: &FgAbMorphism) -> (FgAbGroup, FgAbMorphism) {
    let src = f.source();
    let lat = Lattice::new(src.canonical_moduli(), f.solver().kernel_gens().to_vec());
    subgroup_from_lattice(src, lat)
}

/// Image as a subgroup of the target, with inclusion and the factorization
/// `f = inclusion ∘ factor`.
pub fn image(f: &FgAbMorphism) -> (FgAbGroup, FgAbMorphism, FgAbMorphism) {
    let tgt = f.target();
    let lat = Lattice::new(tgt.canonical_moduli(), f.solver().image_gens());
    let (g, incl) = subgroup_from_lattice(tgt, lat);
    let factor = factor_through(f, &incl).expect("image contains every value");
    (g, incl, factor)
}

/// Cokernel with its projection.
pub fn cokernel(f: &FgAbMorphism) -> (FgAbGroup, FgAbMorphism) {
    quotient_by_columns(f.target(), &f.solver().image_gens())
}

/// Quotient of `g` by the subgroup generated by canonical vectors `gens`.
pub(crate) fn quotient_by_columns(g: &FgAbGroup, gens: &[Vec<Int>]) -> (FgAbGroup, FgAbMorphism) {
    let sq = Subquotient::new(Lattice::full(g.canonical_moduli()), gens);
    let q = FgAbGroup::from_diagonal(sq.quotient_moduli());
    let cols: Vec<Vec<Int>> = (0..g.canonical_rank())
        .map(|j| {
            let mut e = vec![Int::zero(); g.canonical_rank()];
            e[j] = Int::one();
            sq.class_of(&e).expect("full lattice")
        })
        .collect();
    let proj = FgAbMorphism::from_canonical(g, &q, &cols).expect("projection is well defined");
    (q, proj)
}

fn subgroup_from_lattice(g: &FgAbGroup, lat: Lattice) -> (FgAbGroup, FgAbMorphism) {
    let sq = Subquotient::new(lat, &[]);
    let sub = FgAbGroup::from_diagonal(sq.quotient_moduli());
    let cols: Vec<Vec<Int>> = sq.lifts().iter().map(|l| g.from_canonical(l)).collect();
    let m = IntMatrix::from_columns(g.ambient_rank(), &cols);
    (sub.clone(), FgAbMorphism::new_unchecked(&sub, g, m))
}

/// Some `x` with `f(x) = y`, or `None`.
pub fn preimage(f: &FgAbMorphism, y: &FgAbElement) -> Result<Option<FgAbElement>, FgAbError> {
    if y.parent != *f.target() {
        return Err(FgAbError::ParentMismatch);
    }
    Ok(f.preimage_vec(&y.coords).map(|coords| FgAbElement {
        parent: f.source().clone(),
        coords,
    }))
}

/// The unique-up-to-kernel `h` with `g ∘ h = f`, when every value of `f`
/// lies in the image of `g`.
pub fn factor_through(f: &FgAbMorphism, g: &FgAbMorphism) -> Option<FgAbMorphism> {
    if f.target() != g.target() {
        return None;
    }
    let src = f.source();
    let mut cols = Vec::with_capacity(src.canonical_rank());
    for j in 0..src.canonical_rank() {
        let mut e = vec![Int::zero(); src.canonical_rank()];
        e[j] = Int::one();
        let y = f.target().canonical(&f.apply_vec(&src.from_canonical(&e)));
        cols.push(g.preimage_canonical(&y)?);
    }
    FgAbMorphism::from_canonical(src, g.source(), &cols).ok()
}

/// Map induced on cokernels: given `h: Y → Y'` and projections `p: Y → C`,
/// `p': Y' → C'` with `h(ker p) ⊆ ker p'`, the map `C → C'`.
pub fn induced_on_quotients(
    h: &FgAbMorphism,
    p: &FgAbMorphism,
    p2: &FgAbMorphism,
) -> Option<FgAbMorphism> {
    // lift generators of C through p, push through p2 ∘ h
    let c = p.target();
    let mut cols = Vec::with_capacity(c.canonical_rank());
    let ph = p2.compose(h).ok()?;
    for j in 0..c.canonical_rank() {
        let mut e = vec![Int::zero(); c.canonical_rank()];
        e[j] = Int::one();
        let lift = p.preimage_canonical(&e)?;
        let y = ph.apply_vec(&p.source().from_canonical(&lift));
        cols.push(ph.target().canonical(&y));
    }
    FgAbMorphism::from_canonical(c, ph.target(), &cols).ok()
}

/// True when `im f = ker g` (requires `g ∘ f = 0`).
pub fn is_exact_at(f: &FgAbMorphism, g: &FgAbMorphism) -> bool {
    if f.target() != g.source() {
        return false;
    }
    let Ok(gf) = g.compose(f) else { return false };
    if !gf.is_zero() {
        return false;
    }
    let (_, kincl) = kernel(g);
    // every kernel generator must come from f
    kincl
        .source()
        .generators()
        .iter()
        .all(|k| f.preimage_vec(&kincl.apply_vec(k.coords())).is_some())
}

/// Biproduct with structure maps.
#[derive(Debug, Clone)]
pub struct DirectSum {
    pub group: FgAbGroup,
    pub injections: Vec<FgAbMorphism>,
    pub projections: Vec<FgAbMorphism>,
}

/// Direct sum keeping each summand's ambient coordinates in consecutive blocks.
pub fn direct_sum(groups: &[FgAbGroup]) -> DirectSum {
    let all_diag = groups
        .iter()
        .all(|g| g.0.coord.is_none() && matches!(g.0.relations, Relations::Diagonal(_)));
    let group = if all_diag {
        let moduli: Vec<Int> = groups
            .iter()
            .flat_map(|g| g.canonical_moduli().iter().cloned())
            .collect();
        FgAbGroup::from_diagonal(&moduli)
    } else {
        let rels: Vec<IntMatrix> = groups.iter().map(|g| g.relations()).collect();
        let refs: Vec<&IntMatrix> = rels.iter().collect();
        let r = IntMatrix::block_diag(&refs);
        FgAbGroup::from_relations(r.rows(), &r).expect("block relations")
    };
    let n = group.ambient_rank();
    let mut injections = Vec::new();
    let mut projections = Vec::new();
    let mut off = 0;
    for g in groups {
        let k = g.ambient_rank();
        let mut inj = IntMatrix::zeros(n, k);
        let mut proj = IntMatrix::zeros(k, n);
        for i in 0..k {
            inj[(off + i, i)] = Int::one();
            proj[(i, off + i)] = Int::one();
        }
        injections.push(FgAbMorphism::new_unchecked(g, &group, inj));
        projections.push(FgAbMorphism::new_unchecked(&group, g, proj));
        off += k;
    }
    DirectSum {
        group,
        injections,
        projections,
    }
}
