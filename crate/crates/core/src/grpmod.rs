//! Finite groups given by Cayley tables, subgroups and quotients, and
//! finitely generated modules with a group action.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::fgab::{self, direct_sum, FgAbError, FgAbGroup, FgAbMorphism};
use crate::linalg::{Int, IntMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("unknown group family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameter {param} for family `{family}`")]
    BadParameter { family: String, param: i64 },
    #[error("invalid Cayley table: {0}")]
    InvalidTable(String),
    #[error("subset is not closed: {a} * {b} = {product} is missing")]
    NotClosed { a: usize, b: usize, product: usize },
    #[error("subset does not contain the identity")]
    MissingIdentity,
    #[error("element index {0} out of range")]
    BadElement(usize),
    #[error("subgroup is not normal: conjugating {n} by {g} leaves it")]
    NotNormal { g: usize, n: usize },
    #[error("action is not a homomorphism at ({g}, {h})")]
    NotAnAction { g: usize, h: usize },
    #[error("identity does not act trivially")]
    IdentityNotTrivial,
    #[error("action of element {0} is not well defined")]
    ActionNotWellDefined(usize),
    #[error("action of element {0} is missing and not generated")]
    MissingAction(usize),
    #[error("map does not commute with the action of element {0}")]
    NotEquivariant(usize),
    #[error("modules live over different groups")]
    GroupMismatch,
    #[error("not a cocycle at ({s}, {t})")]
    NotACocycle { s: usize, t: usize },
    #[error("sequence is not short exact: {0}")]
    NotExact(&'static str),
    #[error(transparent)]
    Group(#[from] FgAbError),
}

#[derive(PartialEq, Eq)]
struct GroupData {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

/// A finite group stored by its multiplication table. Cloning is cheap.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup(Arc<GroupData>);

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup(order {})", self.order())
    }
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses.
    pub fn from_table(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::InvalidTable("empty table".into()));
        }
        for row in &table {
            if row.len() != n {
                return Err(GroupError::InvalidTable("table is not square".into()));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(GroupError::BadElement(bad));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| GroupError::InvalidTable("no identity element".into()))?;
        let mut inverse = vec![0; n];
        for x in 0..n {
            inverse[x] = (0..n)
                .find(|&y| table[x][y] == identity && table[y][x] == identity)
                .ok_or_else(|| GroupError::InvalidTable(format!("element {x} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(GroupError::InvalidTable(format!(
                            "associativity fails at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| format!("g{i}")).collect());
        if labels.len() != n {
            return Err(GroupError::InvalidTable("label count".into()));
        }
        Ok(FiniteGroup(Arc::new(GroupData {
            labels,
            table,
            identity,
            inverse,
        })))
    }

    pub fn trivial() -> Self {
        Self::from_table(vec![vec![0]], Some(vec!["e".into()])).expect("trivial group")
    }

    pub fn order(&self) -> usize {
        self.0.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.0.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.0.inverse[a]
    }

    pub fn identity(&self) -> usize {
        self.0.identity
    }

    pub fn label(&self, a: usize) -> &str {
        &self.0.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.0.labels
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.0.table
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    /// Non-identity elements in index order.
    pub fn non_identity(&self) -> Vec<usize> {
        self.elements().filter(|&g| g != self.identity()).collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.elements()
            .all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn conj(&self, g: usize, n: usize) -> usize {
        self.mul(self.mul(g, n), self.inv(g))
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup {
            group: self.clone(),
            elements: self.elements().collect(),
        }
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup {
            group: self.clone(),
            elements: vec![self.identity()],
        }
    }
}

/// Built-in families. Element numbering:
/// cyclic `n`: `g^i` is `i`; dihedral `n` (order `2n`): `r^i` is `i` and
/// `s r^i` is `n + i`; symmetric3: permutations of `{0,1,2}` in
/// lexicographic order of their images; klein4: bit vectors; quaternion8:
/// `1, -1, i, -i, j, -j, k, -k`.
pub fn builtin_group(family: &str, param: Option<i64>) -> Result<FiniteGroup, GroupError> {
    let need = |lo: i64| -> Result<usize, GroupError> {
        match param {
            Some(p) if p >= lo => Ok(p as usize),
            Some(p) => Err(GroupError::BadParameter {
                family: family.into(),
                param: p,
            }),
            None => Err(GroupError::BadParameter {
                family: family.into(),
                param: 0,
            }),
        }
    };
    let (table, labels): (Vec<Vec<usize>>, Vec<String>) = match family {
        "cyclic" => {
            let n = need(1)?;
            (
                (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect(),
                (0..n).map(|i| if i == 0 { "e".into() } else { format!("g^{i}") }).collect(),
            )
        }
        "dihedral" => {
            let n = need(1)?;
            let m = 2 * n;
            let mul = |a: usize, b: usize| -> usize {
                let (sa, ia) = (a >= n, a % n);
                let (sb, ib) = (b >= n, b % n);
                match (sa, sb) {
                    (false, false) => (ia + ib) % n,
                    (false, true) => n + (ib + n - ia) % n,
                    (true, false) => n + (ia + ib) % n,
                    (true, true) => (ib + n - ia) % n,
                }
            };
            (
                (0..m).map(|a| (0..m).map(|b| mul(a, b)).collect()).collect(),
                (0..m)
                    .map(|a| if a < n { format!("r^{a}") } else { format!("s r^{}", a - n) })
                    .collect(),
            )
        }
        "symmetric3" => {
            let perms: Vec<[usize; 3]> = vec![
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("perm");
            let table = (0..6)
                .map(|a| {
                    (0..6)
                        .map(|b| {
                            // (ab)(x) = a(b(x))
                            let pa = perms[a];
                            let pb = perms[b];
                            idx([pa[pb[0]], pa[pb[1]], pa[pb[2]]])
                        })
                        .collect()
                })
                .collect();
            (
                table,
                perms
                    .iter()
                    .map(|p| format!("[{}{}{}]", p[0], p[1], p[2]))
                    .collect(),
            )
        }
        "klein4" => (
            (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect(),
            vec!["e".into(), "a".into(), "b".into(), "ab".into()],
        ),
        "quaternion8" => {
            // unit quaternions encoded as (sign, axis) with axis 0 = 1, 1 = i, 2 = j, 3 = k
            let enc = |sign: bool, axis: usize| 2 * axis + usize::from(sign);
            let dec = |x: usize| (x % 2 == 1, x / 2);
            let axis_mul = |a: usize, b: usize| -> (bool, usize) {
                match (a, b) {
                    (0, x) | (x, 0) => (false, x),
                    (x, y) if x == y => (true, 0),
                    (1, 2) => (false, 3),
                    (2, 3) => (false, 1),
                    (3, 1) => (false, 2),
                    (2, 1) => (true, 3),
                    (3, 2) => (true, 1),
                    (1, 3) => (true, 2),
                    _ => unreachable!(),
                }
            };
            let table = (0..8)
                .map(|a| {
                    (0..8)
                        .map(|b| {
                            let (sa, xa) = dec(a);
                            let (sb, xb) = dec(b);
                            let (s, x) = axis_mul(xa, xb);
                            enc(s ^ sa ^ sb, x)
                        })
                        .collect()
                })
                .collect();
            (
                table,
                ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect(),
            )
        }
        other => return Err(GroupError::UnknownFamily(other.into())),
    };
    FiniteGroup::from_table(table, Some(labels))
}

/// A subgroup, stored as a sorted list of element indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    group: FiniteGroup,
    elements: Vec<usize>,
}

impl Subgroup {
    /// Validates that the subset contains the identity and is closed.
    pub fn new(group: &FiniteGroup, elements: &[usize]) -> Result<Self, GroupError> {
        let set: BTreeSet<usize> = elements.iter().copied().collect();
        if let Some(&bad) = set.iter().find(|&&x| x >= group.order()) {
            return Err(GroupError::BadElement(bad));
        }
        if !set.contains(&group.identity()) {
            return Err(GroupError::MissingIdentity);
        }
        for &a in &set {
            for &b in &set {
                let p = group.mul(a, b);
                if !set.contains(&p) {
                    return Err(GroupError::NotClosed { a, b, product: p });
                }
            }
        }
        Ok(Subgroup {
            group: group.clone(),
            elements: set.into_iter().collect(),
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.elements.binary_search(&g).is_ok()
    }

    pub fn is_normal(&self) -> bool {
        self.normality_witness().is_none()
    }

    fn normality_witness(&self) -> Option<(usize, usize)> {
        for g in self.group.elements() {
            for &n in &self.elements {
                if !self.contains(self.group.conj(g, n)) {
                    return Some((g, n));
                }
            }
        }
        None
    }

    /// The subgroup as a group in its own right; element `i` of the result
    /// is `self.elements()[i]`.
    pub fn as_group(&self) -> FiniteGroup {
        let pos = |g: usize| self.elements.binary_search(&g).expect("closed");
        let table = self
            .elements
            .iter()
            .map(|&a| self.elements.iter().map(|&b| pos(self.group.mul(a, b))).collect())
            .collect();
        let labels = self.elements.iter().map(|&g| self.group.label(g).to_string()).collect();
        FiniteGroup::from_table(table, Some(labels)).expect("subgroup table")
    }
}

/// `G/N` with coset representatives (least element of each coset), the
/// projection and the section.
#[derive(Debug, Clone)]
pub struct QuotientData {
    pub group: FiniteGroup,
    pub normal: Subgroup,
    pub quotient: FiniteGroup,
    /// representative of each coset, increasing
    pub reps: Vec<usize>,
    /// coset index of each element of `G`
    pub projection: Vec<usize>,
}

impl QuotientData {
    pub fn section(&self, q: usize) -> usize {
        self.reps[q]
    }

    /// For `g ∈ G` returns `(n, i)` with `g = n · reps[i]`, `n ∈ N`.
    pub fn split_right(&self, g: usize) -> (usize, usize) {
        let i = self.projection[g];
        let x = self.reps[i];
        (self.group.mul(g, self.group.inv(x)), i)
    }
}

pub fn quotient_group(group: &FiniteGroup, normal: &Subgroup) -> Result<QuotientData, GroupError> {
    if let Some((g, n)) = normal.normality_witness() {
        return Err(GroupError::NotNormal { g, n });
    }
    let mut projection = vec![usize::MAX; group.order()];
    let mut reps = Vec::new();
    for g in group.elements() {
        if projection[g] != usize::MAX {
            continue;
        }
        let idx = reps.len();
        reps.push(g);
        for &n in normal.elements() {
            projection[group.mul(n, g)] = idx;
        }
    }
    let k = reps.len();
    let table = (0..k)
        .map(|a| (0..k).map(|b| projection[group.mul(reps[a], reps[b])]).collect())
        .collect();
    let labels = reps
        .iter()
        .map(|&r| format!("{}N", group.label(r)))
        .collect();
    let quotient = FiniteGroup::from_table(table, Some(labels))?;
    Ok(QuotientData {
        group: group.clone(),
        normal: normal.clone(),
        quotient,
        reps,
        projection,
    })
}

/// A module over `Z[G]`: an abelian group with one automorphism per element.
#[derive(Clone)]
pub struct GModule {
    group: FiniteGroup,
    underlying: FgAbGroup,
    action: Arc<Vec<FgAbMorphism>>,
}

impl fmt::Debug for GModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GModule({:?} over group of order {})",
            self.underlying,
            self.group.order()
        )
    }
}

impl PartialEq for GModule {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group
            && self.underlying == other.underlying
            && (Arc::ptr_eq(&self.action, &other.action)
                || self
                    .action
                    .iter()
                    .zip(other.action.iter())
                    .all(|(a, b)| a.matrix() == b.matrix()))
    }
}

impl GModule {
    /// Action given for every element; validated against the Cayley table.
    pub fn new(group: &FiniteGroup, underlying: &FgAbGroup, action: Vec<IntMatrix>) -> Result<Self, GroupError> {
        if action.len() != group.order() {
            return Err(GroupError::MissingAction(action.len()));
        }
        let maps = action
            .into_iter()
            .enumerate()
            .map(|(g, m)| {
                FgAbMorphism::new(underlying, underlying, m).map_err(|e| match e {
                    FgAbError::NotWellDefined { .. } => GroupError::ActionNotWellDefined(g),
                    other => GroupError::Group(other),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let m = GModule {
            group: group.clone(),
            underlying: underlying.clone(),
            action: Arc::new(maps),
        };
        m.validate()?;
        Ok(m)
    }

    /// Action given on some elements (typically generators) and extended
    /// multiplicatively over the Cayley table, then validated in full.
    pub fn from_generators(
        group: &FiniteGroup,
        underlying: &FgAbGroup,
        gens: &[(usize, IntMatrix)],
    ) -> Result<Self, GroupError> {
        let n = underlying.ambient_rank();
        let mut known: Vec<Option<IntMatrix>> = vec![None; group.order()];
        known[group.identity()] = Some(IntMatrix::identity(n));
        for (g, m) in gens {
            if *g >= group.order() {
                return Err(GroupError::BadElement(*g));
            }
            if m.rows() != n || m.cols() != n {
                return Err(GroupError::Group(FgAbError::DimensionMismatch {
                    expected: n,
                    found: m.rows(),
                }));
            }
            known[*g] = Some(m.clone());
        }
        // close under products with the given generators
        let mut frontier: Vec<usize> = group.elements().filter(|&g| known[g].is_some()).collect();
        while let Some(a) = frontier.pop() {
            for (g, m) in gens {
                let p = group.mul(*g, a);
                if known[p].is_none() {
                    known[p] = Some(m.mul(known[a].as_ref().expect("known")));
                    frontier.push(p);
                }
            }
        }
        let action = known
            .into_iter()
            .enumerate()
            .map(|(g, m)| m.ok_or(GroupError::MissingAction(g)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(group, underlying, action)
    }

    /// Trivial action.
    pub fn trivial(group: &FiniteGroup, underlying: &FgAbGroup) -> Self {
        let id = FgAbMorphism::identity(underlying);
        GModule {
            group: group.clone(),
            underlying: underlying.clone(),
            action: Arc::new(vec![id; group.order()]),
        }
    }

    /// Skips validation; for modules correct by construction.
    pub(crate) fn from_maps_unchecked(group: &FiniteGroup, underlying: &FgAbGroup, maps: Vec<FgAbMorphism>) -> Self {
        debug_assert_eq!(maps.len(), group.order());
        GModule {
            group: group.clone(),
            underlying: underlying.clone(),
            action: Arc::new(maps),
        }
    }

    fn validate(&self) -> Result<(), GroupError> {
        let g = &self.group;
        if !self.action[g.identity()].equals(&FgAbMorphism::identity(&self.underlying)) {
            return Err(GroupError::IdentityNotTrivial);
        }
        for a in g.elements() {
            for b in g.elements() {
                let ab = &self.action[g.mul(a, b)];
                let comp = self.action[a].compose(&self.action[b])?;
                if !ab.equals(&comp) {
                    return Err(GroupError::NotAnAction { g: a, h: b });
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn underlying(&self) -> &FgAbGroup {
        &self.underlying
    }

    pub fn action(&self, g: usize) -> &FgAbMorphism {
        &self.action[g]
    }

    pub fn actions(&self) -> &[FgAbMorphism] {
        &self.action
    }

    pub fn is_trivial_action(&self) -> bool {
        let id = FgAbMorphism::identity(&self.underlying);
        self.action.iter().all(|a| a.equals(&id))
    }

    /// An isomorphic module presented on its canonical coordinates, with the
    /// isomorphism from `self`.
    pub fn diagonalized(&self) -> (GModule, FgAbMorphism) {
        let u = &self.underlying;
        let d = FgAbGroup::from_diagonal(u.canonical_moduli());
        let k = u.canonical_rank();
        let unit = |j: usize| {
            let mut e = vec![Int::zero(); k];
            e[j] = Int::one();
            e
        };
        let iso_cols: Vec<Vec<Int>> = (0..k).map(unit).collect();
        let iso = FgAbMorphism::from_canonical(u, &d, &iso_cols).expect("canonical iso");
        let maps = self
            .action
            .iter()
            .map(|a| {
                let cols: Vec<Vec<Int>> = (0..k)
                    .map(|j| u.canonical(&a.apply_vec(&u.from_canonical(&unit(j)))))
                    .collect();
                FgAbMorphism::from_canonical(&d, &d, &cols).expect("action in canonical coordinates")
            })
            .collect();
        (GModule::from_maps_unchecked(&self.group, &d, maps), iso)
    }

    /// `Σ c_g g` acting on the module, as an endomorphism matrix.
    pub fn ring_element_matrix(&self, elt: &[(usize, Int)]) -> IntMatrix {
        let n = self.underlying.ambient_rank();
        let mut m = IntMatrix::zeros(n, n);
        for (g, c) in elt {
            let a = self.action[*g].matrix();
            for i in 0..n {
                for j in 0..n {
                    let v = &a[(i, j)];
                    if !v.is_zero() {
                        m[(i, j)] += c * v;
                    }
                }
            }
        }
        m
    }
}

/// An equivariant homomorphism of modules over the same group.
#[derive(Debug, Clone)]
pub struct GModuleMorphism {
    pub source: GModule,
    pub target: GModule,
    pub map: FgAbMorphism,
}

impl GModuleMorphism {
    pub fn new(source: &GModule, target: &GModule, map: FgAbMorphism) -> Result<Self, GroupError> {
        if source.group != target.group {
            return Err(GroupError::GroupMismatch);
        }
        if map.source() != source.underlying() || map.target() != target.underlying() {
            return Err(GroupError::Group(FgAbError::ParentMismatch));
        }
        for g in source.group.elements() {
            let l = map.compose(source.action(g))?;
            let r = target.action(g).compose(&map)?;
            if !l.equals(&r) {
                return Err(GroupError::NotEquivariant(g));
            }
        }
        Ok(GModuleMorphism {
            source: source.clone(),
            target: target.clone(),
            map,
        })
    }

    pub fn from_matrix(source: &GModule, target: &GModule, m: IntMatrix) -> Result<Self, GroupError> {
        let f = FgAbMorphism::new(source.underlying(), target.underlying(), m)?;
        Self::new(source, target, f)
    }
}

/// `0 → A --i--> B --j--> C → 0`, verified exact.
#[derive(Debug, Clone)]
pub struct ModuleSES {
    pub a: GModule,
    pub b: GModule,
    pub c: GModule,
    pub i: GModuleMorphism,
    pub j: GModuleMorphism,
}

impl ModuleSES {
    pub fn new(i: GModuleMorphism, j: GModuleMorphism) -> Result<Self, GroupError> {
        if i.target != j.source {
            return Err(GroupError::NotExact("middle terms differ"));
        }
        if !i.map.is_injective() {
            return Err(GroupError::NotExact("first map is not injective"));
        }
        if !j.map.is_surjective() {
            return Err(GroupError::NotExact("second map is not surjective"));
        }
        if !fgab::is_exact_at(&i.map, &j.map) {
            return Err(GroupError::NotExact("image differs from kernel"));
        }
        Ok(ModuleSES {
            a: i.source.clone(),
            b: i.target.clone(),
            c: j.target.clone(),
            i,
            j,
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        self.a.group()
    }
}

/// `M^N` as a `G/N`-module with its inclusion into `M`.
#[derive(Debug, Clone)]
pub struct FixedPoints {
    pub quotient: QuotientData,
    pub module: GModule,
    pub inclusion: FgAbMorphism,
}

pub fn fixed_points(m: &GModule, normal: &Subgroup) -> Result<FixedPoints, GroupError> {
    let q = quotient_group(m.group(), normal)?;
    let u = m.underlying();
    let n = u.ambient_rank();
    // x ↦ (h x − x)_{h ∈ N}
    let others: Vec<usize> = normal.elements().iter().copied().filter(|&h| h != m.group().identity()).collect();
    let sum = direct_sum(&vec![u.clone(); others.len()]);
    let mut stacked = IntMatrix::zeros(n * others.len(), n);
    for (k, &h) in others.iter().enumerate() {
        let a = m.action(h).matrix();
        for i in 0..n {
            for j in 0..n {
                let mut v = a[(i, j)].clone();
                if i == j {
                    v -= Int::one();
                }
                stacked[(k * n + i, j)] = v;
            }
        }
    }
    let diff = FgAbMorphism::new(u, &sum.group, stacked)?;
    let (fixed, inclusion) = fgab::kernel(&diff);
    let maps = q
        .reps
        .iter()
        .map(|&g| {
            let moved = m.action(g).compose(&inclusion).expect("composable");
            fgab::factor_through(&moved, &inclusion).expect("fixed points are stable under G")
        })
        .collect();
    let module = GModule::from_maps_unchecked(&q.quotient, &fixed, maps);
    module.validate()?;
    Ok(FixedPoints {
        quotient: q,
        module,
        inclusion,
    })
}

/// `T` viewed as a `G`-module through `G → G/N`.
pub fn inflation(t: &GModule, q: &QuotientData) -> Result<GModule, GroupError> {
    if *t.group() != q.quotient {
        return Err(GroupError::GroupMismatch);
    }
    let maps = q
        .group
        .elements()
        .map(|g| t.action(q.projection[g]).clone())
        .collect();
    Ok(GModule::from_maps_unchecked(&q.group, t.underlying(), maps))
}

/// `M` as a module over `H`, whose elements are numbered as in
/// [`Subgroup::as_group`].
pub fn restriction(m: &GModule, h: &Subgroup) -> Result<GModule, GroupError> {
    if h.group() != m.group() {
        return Err(GroupError::GroupMismatch);
    }
    let hg = h.as_group();
    let maps = h.elements().iter().map(|&g| m.action(g).clone()).collect();
    Ok(GModule::from_maps_unchecked(&hg, m.underlying(), maps))
}

/// Extension `0 → M → M ⊕ Z → Z → 0` with `s·(m, a) = (s·m + a u(s), a)`.
/// `u[s]` is given in ambient coordinates of `M`.
pub fn extension_from_cocycle(m: &GModule, u: &[Vec<Int>]) -> Result<ModuleSES, GroupError> {
    let g = m.group();
    let um = m.underlying();
    let n = um.ambient_rank();
    if u.len() != g.order() {
        return Err(GroupError::MissingAction(u.len()));
    }
    for (s, v) in u.iter().enumerate() {
        if v.len() != n {
            return Err(GroupError::Group(FgAbError::DimensionMismatch {
                expected: n,
                found: v.len(),
            }));
        }
        let _ = s;
    }
    for s in g.elements() {
        for t in g.elements() {
            // u(st) = u(s) + s·u(t)
            let lhs = &u[g.mul(s, t)];
            let su_t = m.action(s).apply_vec(&u[t]);
            let diff: Vec<Int> = lhs
                .iter()
                .zip(&u[s])
                .zip(&su_t)
                .map(|((l, a), b)| l - a - b)
                .collect();
            if !um.is_relation(&diff) {
                return Err(GroupError::NotACocycle { s, t });
            }
        }
    }
    let z = FgAbGroup::free(1);
    let sum = direct_sum(&[um.clone(), z.clone()]);
    let action: Vec<IntMatrix> = g
        .elements()
        .map(|s| {
            let mut a = IntMatrix::zeros(n + 1, n + 1);
            a.set_block(0, 0, m.action(s).matrix());
            for i in 0..n {
                a[(i, n)] = u[s][i].clone();
            }
            a[(n, n)] = Int::one();
            a
        })
        .collect();
    let b = GModule::new(g, &sum.group, action)?;
    let c = GModule::trivial(g, &z);
    let i = GModuleMorphism::new(m, &b, sum.injections[0].clone())?;
    let j = GModuleMorphism::new(&b, &c, sum.projections[1].clone())?;
    ModuleSES::new(i, j)
}

/// `Hom_{Z[N]}(Z[G]^r, M)` as a `G/N`-module, coordinates ordered by basis
/// element then coset representative: block `(b, i)` holds `f(x_i e_b)`.
pub fn hom_over_subgroup(r: usize, m: &GModule, q: &QuotientData) -> Result<GModule, GroupError> {
    if m.group() != &q.group {
        return Err(GroupError::GroupMismatch);
    }
    let k = q.reps.len();
    let base = m.underlying();
    let n = base.ambient_rank();
    let sum = direct_sum(&vec![base.clone(); r * k]);
    let g = &q.group;
    let mats: Vec<IntMatrix> = q
        .reps
        .iter()
        .map(|&gr| {
            // (g·f)(x_i) = g · f(g⁻¹ x_i) with g⁻¹ x_i = n x_j, f(n x_j) = n f(x_j)
            let mut blk = IntMatrix::zeros(n * k, n * k);
            for i in 0..k {
                let y = g.mul(g.inv(gr), q.reps[i]);
                let (nn, j) = q.split_right(y);
                let a = m.action(g.mul(gr, nn)).matrix();
                blk.set_block(i * n, j * n, a);
            }
            let refs = vec![&blk; r];
            IntMatrix::block_diag(&refs)
        })
        .collect();
    let maps = mats
        .into_iter()
        .map(|a| FgAbMorphism::new_unchecked(&sum.group, &sum.group, a))
        .collect();
    Ok(GModule::from_maps_unchecked(&q.quotient, &sum.group, maps))
}

/// Direct sum of modules over one group, action block diagonal.
pub fn module_sum(group: &FiniteGroup, mods: &[GModule]) -> (GModule, fgab::DirectSum) {
    let groups: Vec<FgAbGroup> = mods.iter().map(|m| m.underlying().clone()).collect();
    let sum = direct_sum(&groups);
    let maps = group
        .elements()
        .map(|g| {
            let mats: Vec<&IntMatrix> = mods.iter().map(|m| m.action(g).matrix()).collect();
            FgAbMorphism::new_unchecked(&sum.group, &sum.group, IntMatrix::block_diag(&mats))
        })
        .collect();
    (GModule::from_maps_unchecked(group, &sum.group, maps), sum)
}

/// Inverse of an isomorphism.
pub fn inverse(f: &FgAbMorphism) -> Option<FgAbMorphism> {
    if !f.is_isomorphism() {
        return None;
    }
    fgab::factor_through(&FgAbMorphism::identity(f.target()), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;

    #[test]
    fn builtin_groups() {
        assert_eq!(builtin_group("cyclic", Some(1)).unwrap().order(), 1);
        assert_eq!(builtin_group("cyclic", Some(4)).unwrap().order(), 4);
        let s3 = builtin_group("symmetric3", None).unwrap();
        assert_eq!(s3.order(), 6);
        assert!(!s3.is_abelian());
        assert_eq!(builtin_group("dihedral", Some(4)).unwrap().order(), 8);
        let q8 = builtin_group("quaternion8", None).unwrap();
        assert!(!q8.is_abelian());
        assert!(builtin_group("klein4", None).unwrap().is_abelian());
        assert!(matches!(
            builtin_group("monster", None),
            Err(GroupError::UnknownFamily(_))
        ));
    }

    #[test]
    fn quotients() {
        let c4 = builtin_group("cyclic", Some(4)).unwrap();
        let q = quotient_group(&c4, &c4.trivial_subgroup()).unwrap();
        assert_eq!(q.quotient.order(), 4);
        let q = quotient_group(&c4, &c4.whole()).unwrap();
        assert_eq!(q.quotient.order(), 1);
        let n = Subgroup::new(&c4, &[0, 2]).unwrap();
        let q = quotient_group(&c4, &n).unwrap();
        assert_eq!(q.quotient.order(), 2);
        assert_eq!(q.reps, vec![0, 1]);
        assert_eq!(q.projection, vec![0, 1, 0, 1]);
        let s3 = builtin_group("symmetric3", None).unwrap();
        let h = Subgroup::new(&s3, &[0, 1]).unwrap();
        assert!(matches!(quotient_group(&s3, &h), Err(GroupError::NotNormal { .. })));
        assert!(matches!(
            Subgroup::new(&c4, &[0, 1]),
            Err(GroupError::NotClosed { a: 1, b: 1, product: 2 })
        ));
    }

    fn c2() -> FiniteGroup {
        builtin_group("cyclic", Some(2)).unwrap()
    }

    #[test]
    fn fixed_points_examples() {
        let g = c2();
        let z2 = FgAbGroup::cyclic(2);
        let m = GModule::trivial(&g, &z2);
        let fp = fixed_points(&m, &g.whole()).unwrap();
        assert_eq!(fp.module.underlying().shape(), z2.shape());
        // regular representation Z[C2]
        let reg = GModule::new(
            &g,
            &FgAbGroup::free(2),
            vec![IntMatrix::identity(2), IntMatrix::from_rows(&[[0, 1], [1, 0]])],
        )
        .unwrap();
        let fp = fixed_points(&reg, &g.whole()).unwrap();
        assert_eq!(fp.module.underlying().free_rank(), 1);
        let gen = &fp.module.underlying().generators()[0];
        let img = fp.inclusion.apply(gen).unwrap();
        let c = img.coords();
        assert_eq!(c[0], c[1]);
        assert!(c[0] == int(1) || c[0] == int(-1));
        // sign action
        let sign = GModule::new(
            &g,
            &FgAbGroup::free(1),
            vec![IntMatrix::identity(1), IntMatrix::from_rows(&[[-1]])],
        )
        .unwrap();
        assert!(fixed_points(&sign, &g.whole()).unwrap().module.underlying().is_trivial());
    }

    #[test]
    fn inflation_and_restriction() {
        let c4 = builtin_group("cyclic", Some(4)).unwrap();
        let n = Subgroup::new(&c4, &[0, 2]).unwrap();
        let q = quotient_group(&c4, &n).unwrap();
        let t = GModule::trivial(&q.quotient, &FgAbGroup::cyclic(2));
        let inf = inflation(&t, &q).unwrap();
        assert!(inf.is_trivial_action());
        assert_eq!(inf.group().order(), 4);
        let reg4 = GModule::from_generators(
            &c4,
            &FgAbGroup::free(4),
            &[(1, IntMatrix::from_fn(4, 4, |i, j| int(((j + 1) % 4 == i) as i64)))],
        )
        .unwrap();
        let res = restriction(&reg4, &n).unwrap();
        assert_eq!(res.group().order(), 2);
        // Z[C4] restricted to C2 is free of rank 2: fixed points have rank 2
        let fp = fixed_points(&res, &res.group().whole()).unwrap();
        assert_eq!(fp.module.underlying().free_rank(), 2);
    }

    #[test]
    fn cocycle_extension() {
        let g = c2();
        let m = GModule::trivial(&g, &FgAbGroup::cyclic(2));
        let ses = extension_from_cocycle(&m, &[vec![int(0)], vec![int(1)]]).unwrap();
        assert_eq!(
            *ses.b.action(1).matrix(),
            IntMatrix::from_rows(&[[1, 1], [0, 1]])
        );
        let split = extension_from_cocycle(&m, &[vec![int(0)], vec![int(0)]]).unwrap();
        assert!(split.b.is_trivial_action());
        let bad = extension_from_cocycle(&m, &[vec![int(1)], vec![int(0)]]);
        assert!(matches!(bad, Err(GroupError::NotACocycle { .. })));
    }

    #[test]
    fn hom_over_subgroup_examples() {
        let c4 = builtin_group("cyclic", Some(4)).unwrap();
        let m = GModule::trivial(&c4, &FgAbGroup::cyclic(2));
        let n = Subgroup::new(&c4, &[0, 2]).unwrap();
        let q = quotient_group(&c4, &n).unwrap();
        let h = hom_over_subgroup(1, &m, &q).unwrap();
        assert_eq!(h.underlying().order(), Some(int(4)));
        let mats = h.actions().iter().map(|a| a.matrix().clone()).collect();
        assert!(GModule::new(h.group(), h.underlying(), mats).is_ok());
        let s3 = builtin_group("symmetric3", None).unwrap();
        let a3 = Subgroup::new(&s3, &[0, 3, 4]).unwrap();
        let q3 = quotient_group(&s3, &a3).unwrap();
        let sign = GModule::from_generators(
            &s3,
            &FgAbGroup::free(1),
            &[(1, IntMatrix::from_rows(&[[-1]])), (3, IntMatrix::identity(1))],
        )
        .unwrap();
        let h3 = hom_over_subgroup(2, &sign, &q3).unwrap();
        let mats = h3.actions().iter().map(|a| a.matrix().clone()).collect();
        assert!(GModule::new(h3.group(), h3.underlying(), mats).is_ok());
        let h0 = hom_over_subgroup(0, &m, &q).unwrap();
        assert!(h0.underlying().is_trivial());
        let qg = quotient_group(&c4, &c4.whole()).unwrap();
        let hg = hom_over_subgroup(1, &m, &qg).unwrap();
        assert_eq!(hg.underlying().shape(), m.underlying().shape());
    }
}
