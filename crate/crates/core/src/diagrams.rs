//! The 4×5 grid of low-degree terms for `t = 1, 2, 3, 1` and its cone
//! variant, with verification reports and zig-zag chases.
//!
//! Positions are `(row, col)` from zero. Rows 0..=2 hold `ℍ^1Ψ_t(F_c)` for
//! `t = 1, 2, 3`, row 3 holds `ℍ^1Ψ_1(F_c[1])`; node `(3, 0)` is node
//! `(0, 3)` and node `(3, 1)` is node `(0, 4)`.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::complexes::{cone, shift, ChainMap, CochainComplex, ExactSequence};
use crate::fgab::{self, enumerate_elements, FgAbElement, FgAbGroup, FgAbMorphism};
use crate::grpmod::inverse;
use crate::linalg::{solve_mod, Int, IntMatrix};
use crate::scenario::Scenario;
use crate::spectral::{LhsSetup, SpectralError};

pub const ROWS: usize = 4;
pub const COLS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("the map must land in the truncation τ≤1 D of the scenario")]
    InvalidTarget,
    #[error("B starts in degree {0}; the window needs degree ≥ -1")]
    WindowExceeded(i64),
    #[error("not a chain map: {0}")]
    InvalidMap(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChaseError {
    #[error("β and γ have different images in node {0:?}")]
    CompatibilityError((usize, usize)),
    #[error("no α exists; the diagram violates the zig-zag property")]
    NoSolution,
    #[error("node {0:?} is infinite")]
    InfiniteNode((usize, usize)),
    #[error("input element does not belong to node {0:?}")]
    WrongNode((usize, usize)),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramKind {
    Main,
    Variant,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub label: String,
    pub group: FgAbGroup,
}

#[derive(Debug, Clone)]
pub struct Diagram {
    pub scenario: String,
    pub kind: DiagramKind,
    pub nodes: Vec<Vec<Node>>,
    /// `h[r][c]: (r, c) → (r, c+1)`
    pub h: Vec<Vec<FgAbMorphism>>,
    /// `v[r][c]: (r, c) → (r+1, c)`
    pub v: Vec<Vec<FgAbMorphism>>,
    /// `v[r][c+1] ∘ h[r][c] = signs[r][c] · h[r+1][c] ∘ v[r][c]`
    pub signs: Vec<Vec<i32>>,
    /// sequence attached below the grid, reported as row 5
    pub appendage: Option<ExactSequence>,
}

impl Diagram {
    pub fn node(&self, r: usize, c: usize) -> &FgAbGroup {
        &self.nodes[r][c].group
    }

    pub fn square(&self, r: usize, c: usize) -> Result<(FgAbMorphism, FgAbMorphism), fgab::FgAbError> {
        let top = self.v[r][c + 1].compose(&self.h[r][c])?;
        let bottom = self.h[r + 1][c].compose(&self.v[r][c])?;
        Ok((top, bottom))
    }
}

fn inv(f: &FgAbMorphism, what: &'static str) -> Result<FgAbMorphism, DiagramError> {
    inverse(f).ok_or(SpectralError::NotIsomorphism(what).into())
}

fn then(f: &FgAbMorphism, g: &FgAbMorphism) -> Result<FgAbMorphism, DiagramError> {
    Ok(g.compose(f).map_err(SpectralError::from)?)
}

fn grid_nodes(st: &LhsSetup, cols: &[CochainComplex; 5], row4: &[CochainComplex; 5], deg3: i64) -> Result<Vec<Vec<Node>>, DiagramError> {
    let mut nodes = Vec::new();
    for (r, t) in [1usize, 2, 3].into_iter().enumerate() {
        let row = cols
            .iter()
            .enumerate()
            .map(|(c, f)| {
                let i = if c == 2 { deg3 } else { 1 };
                Ok(Node {
                    label: format!("{t}:H^{i}({c})"),
                    group: st.psi.h(t, f, i)?.group().clone(),
                })
            })
            .collect::<Result<Vec<_>, SpectralError>>()?;
        let _ = r;
        nodes.push(row);
    }
    let row = row4
        .iter()
        .enumerate()
        .map(|(c, f)| {
            Ok(Node {
                label: format!("1:H^1({c}[1])"),
                group: st.psi.h(1, f, 1)?.group().clone(),
            })
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    nodes.push(row);
    Ok(nodes)
}

const MAIN_LABELS: [[&str; 5]; 4] = [
    ["1E2^{1,0}", "1E^1", "1E2^{0,1}", "1E2^{2,0}", "1E1^2"],
    ["2E2^{1,0}", "2E^1", "2E2^{0,1}", "2E2^{2,0}", "2E1^2"],
    ["3E2^{1,0}", "3E^1", "3E2^{0,1}", "3E2^{2,0}", "3E1^2"],
    ["1E2^{2,0}", "1E1^2", "1E2^{1,1}", "1E2^{3,0}", "1E^3_(<=1)"],
];

pub fn build_main_diagram(s: &Scenario) -> Result<Diagram, DiagramError> {
    main_diagram(s.setup()?, &s.name)
}

/// Rows are low-term sequences; columns come from `Ψ_1 → Ψ_2 → Ψ_3 → Ψ_1[1]`.
pub fn main_diagram(st: &LhsSetup, name: &str) -> Result<Diagram, DiagramError> {
    let psi = &st.psi;
    let x1 = st.sh(&st.x, 1);
    let y1 = st.sh(&st.y, 1);
    let s11 = st.sh(&st.s1, 1);
    let x2 = st.sh(&st.x, 2);
    let y2 = st.sh(&st.y, 2);
    let cols = [st.x.clone(), st.d.clone(), st.s1.clone(), x1.clone(), y1.clone()];
    let row4 = [x1.clone(), y1.clone(), s11.clone(), x2.clone(), y2.clone()];
    let mut nodes = grid_nodes(st, &cols, &row4, 1)?;
    for (r, row) in nodes.iter_mut().enumerate() {
        for (c, n) in row.iter_mut().enumerate() {
            n.label = MAIN_LABELS[r][c].to_string();
        }
    }
    let mut h = Vec::new();
    for t in 1..=3 {
        h.push(st.row_maps(t, 0)?.to_vec());
    }
    h.push(st.row_maps(1, 1)?.to_vec());
    let mut v = vec![Vec::new(), Vec::new(), Vec::new()];
    for f in &cols {
        v[0].push(psi.u(f, 1)?);
        v[1].push(psi.v(f, 1)?);
    }
    let j3 = inv(&psi.map(3, &st.j, 1)?, "j")?;
    v[2].push(psi.rotated_delta(&st.x, &x1, 1)?);
    v[2].push(then(&j3, &psi.rotated_delta(&st.y, &y1, 1)?)?);
    v[2].push(psi.rotated_delta(&st.s1, &s11, 1)?);
    v[2].push(psi.rotated_delta(&x1, &x2, 1)?);
    v[2].push(psi.rotated_delta(&y1, &y2, 1)?);
    Ok(Diagram {
        scenario: name.to_string(),
        kind: DiagramKind::Main,
        nodes,
        h,
        v,
        signs: vec![vec![1; COLS - 1]; ROWS - 1],
        appendage: Some(st.e3_sequence(1)?),
    })
}

/// The three choices of `(B, f: B → τ≤1 D)` used for the variant diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantChoice {
    Identity,
    Stalk0,
    Zero,
}

impl VariantChoice {
    pub const ALL: [VariantChoice; 3] = [VariantChoice::Identity, VariantChoice::Stalk0, VariantChoice::Zero];

    pub fn name(self) -> &'static str {
        match self {
            VariantChoice::Identity => "identity",
            VariantChoice::Stalk0 => "stalk0",
            VariantChoice::Zero => "zero",
        }
    }

    pub fn map(self, st: &LhsSetup) -> ChainMap {
        match self {
            VariantChoice::Identity => ChainMap::identity(&st.y),
            VariantChoice::Stalk0 => st.iota.clone(),
            VariantChoice::Zero => ChainMap::zero(&CochainComplex::zero(st.y.group()), &st.y),
        }
    }
}

pub fn build_variant_diagram(s: &Scenario, f: &ChainMap) -> Result<Diagram, DiagramError> {
    variant_diagram(s.setup()?, &s.name, f)
}

/// `F^p = ℍ^pΨ_t(B)`, `E^p_{≤1}` and `G^p = ℍ^pΨ_t(Δ)` with
/// `Δ = cone(-f[1])`; the middle column shows `G^0` (`G^1` in the last row)
/// and the appendage is the row `F^i → E^i_{≤1} → G^{i-1} → F^{i+1}` for
/// `t = 1`, `i ≤ 2`.
pub fn variant_diagram(st: &LhsSetup, name: &str, f: &ChainMap) -> Result<Diagram, DiagramError> {
    if f.target != st.y {
        return Err(DiagramError::InvalidTarget);
    }
    let b = &f.source;
    if b.lo() < -1 && !b.is_zero_complex() {
        return Err(DiagramError::WindowExceeded(b.lo()));
    }
    let f = ChainMap::new(b, &st.y, |n| Some(f.at(n))).map_err(|e| DiagramError::InvalidMap(e.to_string()))?;
    let psi = &st.psi;
    let y = &st.y;
    let y1 = st.sh(y, 1);
    let y2 = st.sh(y, 2);
    let b1 = st.sh(b, 1);
    let b2 = st.sh(b, 2);
    let f1 = st.sh_map(&f, 1);
    let f2 = st.sh_map(&f, 2);
    let delta_c = cone(&f1.neg()).map_err(SpectralError::from)?;
    let delta = delta_c.complex.clone();
    // cone(f) equals Δ[-1] on the nose; F3 is that complex
    let f3 = shift(&delta, -1);
    let cf = cone(&f).map_err(SpectralError::from)?;
    if cf.complex != f3 {
        return Err(DiagramError::InvalidMap("cone comparison".into()));
    }
    let incl = ChainMap::new(y, &f3, |n| Some(cf.incl.at(n))).map_err(SpectralError::from)?;
    let proj = ChainMap::new(&f3, &b1, |n| Some(cf.proj.at(n))).map_err(SpectralError::from)?;
    let incl1 = ChainMap::new(&y1, &delta, |n| Some(cf.incl.at(n + 1))).map_err(SpectralError::from)?;
    let proj1 = ChainMap::new(&delta, &b2, |n| Some(cf.proj.at(n + 1))).map_err(SpectralError::from)?;

    let cols = [b.clone(), y.clone(), delta.clone(), b1.clone(), y1.clone()];
    let row4 = [b1.clone(), y1.clone(), delta.clone(), b2.clone(), y2.clone()];
    let mut nodes = grid_nodes(st, &cols, &row4, 0)?;
    let names = ["F^1", "E^1_(<=1)", "G^0", "F^2", "E^2_(<=1)"];
    let names4 = ["F^2", "E^2_(<=1)", "G^1", "F^3", "E^3_(<=1)"];
    for (r, row) in nodes.iter_mut().enumerate() {
        for (c, n) in row.iter_mut().enumerate() {
            let t = if r == 3 { 1 } else { r + 1 };
            let base = if r == 3 { names4[c] } else { names[c] };
            n.label = format!("{t}{base}");
        }
    }
    let mut h = Vec::new();
    for t in 1..=3 {
        let th = psi.theta(t, &f3, &delta, 0)?;
        let th_inv = inv(&th, "θ")?;
        h.push(vec![
            psi.map(t, &f, 1)?,
            then(&psi.map(t, &incl, 1)?, &th_inv)?,
            then(&th, &psi.map(t, &proj, 1)?)?,
            psi.map(t, &f1, 1)?,
        ]);
    }
    h.push(vec![
        psi.map(1, &f1, 1)?,
        psi.map(1, &incl1, 1)?,
        psi.map(1, &proj1, 1)?,
        psi.map(1, &f2, 1)?,
    ]);
    let mut v = vec![Vec::new(), Vec::new(), Vec::new()];
    for (c, g) in cols.iter().enumerate() {
        let i = if c == 2 { 0 } else { 1 };
        v[0].push(psi.u(g, i)?);
        v[1].push(psi.v(g, i)?);
    }
    v[2].push(psi.rotated_delta(b, &b1, 1)?);
    v[2].push(psi.rotated_delta(y, &y1, 1)?);
    v[2].push(psi.delta(&delta, 0)?);
    v[2].push(psi.rotated_delta(&b1, &b2, 1)?);
    v[2].push(psi.rotated_delta(&y1, &y2, 1)?);
    let mut signs = vec![vec![1; COLS - 1]; ROWS - 1];
    signs[2][1] = -1;
    signs[2][2] = -1;
    Ok(Diagram {
        scenario: name.to_string(),
        kind: DiagramKind::Variant,
        nodes,
        h,
        v,
        signs,
        appendage: Some(variant_row(st, &f, &delta, &f3, &incl, &proj)?),
    })
}

fn variant_row(
    st: &LhsSetup,
    f: &ChainMap,
    delta: &CochainComplex,
    f3: &CochainComplex,
    incl: &ChainMap,
    proj: &ChainMap,
) -> Result<ExactSequence, DiagramError> {
    let psi = &st.psi;
    let b = &f.source;
    let b1 = st.sh(b, 1);
    let mut seq = ExactSequence {
        labels: Vec::new(),
        terms: Vec::new(),
        maps: Vec::new(),
    };
    for i in 0..=2 {
        seq.labels.extend([format!("F^{i}"), format!("E^{i}_(<=1)"), format!("G^{}", i - 1)]);
        seq.terms.push(psi.h(1, b, i)?.group().clone());
        seq.terms.push(psi.h(1, &st.y, i)?.group().clone());
        seq.terms.push(psi.h(1, delta, i - 1)?.group().clone());
        let th = psi.theta(1, f3, delta, i - 1)?;
        seq.maps.push(psi.map(1, f, i)?);
        seq.maps.push(then(&psi.map(1, incl, i)?, &inv(&th, "θ")?)?);
        let back = psi.theta(1, b, &b1, i)?;
        seq.maps.push(then(&then(&th, &psi.map(1, proj, i)?)?, &back)?);
    }
    seq.labels.push("F^3".into());
    seq.terms.push(psi.h(1, b, 3)?.group().clone());
    Ok(seq)
}

/// The two zig-zag positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChasePosition {
    Left,
    Right,
}

impl ChasePosition {
    /// `(β node, γ node, α node)`
    pub fn nodes(self) -> [(usize, usize); 3] {
        match self {
            ChasePosition::Left => [(2, 1), (1, 2), (3, 0)],
            ChasePosition::Right => [(2, 2), (1, 3), (3, 1)],
        }
    }

    fn col(self) -> usize {
        match self {
            ChasePosition::Left => 1,
            ChasePosition::Right => 2,
        }
    }
}

/// `α` with `h(α) = v(β)` and `v'(α) = -h'(γ)`; `a`, `b`, `c` are the
/// images in the three target nodes.
#[derive(Debug, Clone)]
pub struct ChaseCertificate {
    pub position: ChasePosition,
    pub beta: FgAbElement,
    pub gamma: FgAbElement,
    pub alpha: FgAbElement,
    /// common image of `β` and `γ`
    pub c: FgAbElement,
    /// common image of `α` and `β`
    pub a: FgAbElement,
    /// image of `α` down the first column, equal to minus that of `γ`
    pub b: FgAbElement,
}

struct ChaseMaps<'a> {
    beta_row: &'a FgAbMorphism,
    gamma_col: &'a FgAbMorphism,
    alpha_row: &'a FgAbMorphism,
    beta_col: &'a FgAbMorphism,
    alpha_col: &'a FgAbMorphism,
    gamma_row: &'a FgAbMorphism,
}

fn chase_maps(d: &Diagram, pos: ChasePosition) -> ChaseMaps<'_> {
    let k = pos.col();
    ChaseMaps {
        beta_row: &d.h[2][k],
        gamma_col: &d.v[1][k + 1],
        alpha_row: &d.h[3][k - 1],
        beta_col: &d.v[2][k],
        alpha_col: &d.v[0][k + 2],
        gamma_row: &d.h[1][k + 1],
    }
}

fn same(x: &FgAbElement, y: &FgAbElement) -> bool {
    x.sub(y).map(|z| z.is_zero()).unwrap_or(false)
}

pub fn chase(d: &Diagram, pos: ChasePosition, beta: &FgAbElement, gamma: &FgAbElement) -> Result<ChaseCertificate, ChaseError> {
    let [nb, ng, na] = pos.nodes();
    let m = chase_maps(d, pos);
    if beta.parent() != m.beta_row.source() {
        return Err(ChaseError::WrongNode(nb));
    }
    if gamma.parent() != m.gamma_col.source() {
        return Err(ChaseError::WrongNode(ng));
    }
    let c1 = m.beta_row.apply(beta).map_err(|_| ChaseError::WrongNode(nb))?;
    let c2 = m.gamma_col.apply(gamma).map_err(|_| ChaseError::WrongNode(ng))?;
    if !same(&c1, &c2) {
        return Err(ChaseError::CompatibilityError((nb.0, nb.1 + 1)));
    }
    let a_target = m.beta_col.apply(beta).map_err(|_| ChaseError::WrongNode(nb))?;
    let b_target = m.gamma_row.apply(gamma).map_err(|_| ChaseError::WrongNode(ng))?.neg();
    // one stacked system in canonical coordinates, modulo the target orders
    let t1 = m.alpha_row.target();
    let t2 = m.alpha_col.target();
    let a = m
        .alpha_row
        .canonical_matrix()
        .vstack(&m.alpha_col.canonical_matrix())
        .expect("same source");
    let rhs: Vec<Int> = a_target.canonical().into_iter().chain(b_target.canonical()).collect();
    let moduli: Vec<Int> = t1.canonical_moduli().iter().chain(t2.canonical_moduli()).cloned().collect();
    let r = IntMatrix::diagonal(&moduli);
    let x = solve_mod(&a, &rhs, &r).ok().flatten().ok_or(ChaseError::NoSolution)?;
    let alpha = m.alpha_row.source().element_from_canonical(&x);
    let a_img = m.alpha_row.apply(&alpha).map_err(|_| ChaseError::WrongNode(na))?;
    let b_img = m.alpha_col.apply(&alpha).map_err(|_| ChaseError::WrongNode(na))?;
    if !same(&a_img, &a_target) || !same(&b_img, &b_target) {
        return Err(ChaseError::NoSolution);
    }
    Ok(ChaseCertificate {
        position: pos,
        beta: beta.clone(),
        gamma: gamma.clone(),
        alpha,
        c: c1,
        a: a_img,
        b: b_img,
    })
}

/// `β ∈ ³E^1`, `γ ∈ ²E_2^{0,1}`, `α ∈ ¹E_2^{2,0}`.
pub fn chase_left(d: &Diagram, beta: &FgAbElement, gamma: &FgAbElement) -> Result<ChaseCertificate, ChaseError> {
    chase(d, ChasePosition::Left, beta, gamma)
}

/// `β ∈ ³E_2^{0,1}`, `γ ∈ ²E_2^{2,0}`, `α ∈ ¹E_1^2`.
pub fn chase_right(d: &Diagram, beta: &FgAbElement, gamma: &FgAbElement) -> Result<ChaseCertificate, ChaseError> {
    chase(d, ChasePosition::Right, beta, gamma)
}

impl ChaseCertificate {
    /// Re-checks the defining equalities by substitution.
    pub fn validate(&self, d: &Diagram) -> bool {
        let m = chase_maps(d, self.position);
        let ok = |f: &FgAbMorphism, x: &FgAbElement, y: &FgAbElement| f.apply(x).map(|z| same(&z, y)).unwrap_or(false);
        ok(m.beta_row, &self.beta, &self.c)
            && ok(m.gamma_col, &self.gamma, &self.c)
            && ok(m.alpha_row, &self.alpha, &self.a)
            && ok(m.beta_col, &self.beta, &self.a)
            && ok(m.alpha_col, &self.alpha, &self.b)
            && ok(m.gamma_row, &self.gamma, &self.b.neg())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ChaseSummary {
    pub pairs: usize,
    pub compatible: usize,
    pub successes: usize,
    pub failures: usize,
    pub rejected: usize,
}

/// Runs the chase on every `(β, γ)` pair; incompatible pairs must be
/// rejected and compatible pairs must produce a valid certificate.
pub fn enumerate_position(d: &Diagram, pos: ChasePosition) -> Result<ChaseSummary, ChaseError> {
    let [nb, ng, _] = pos.nodes();
    let elems = |n: (usize, usize)| enumerate_elements(d.node(n.0, n.1)).map_err(|_| ChaseError::InfiniteNode(n));
    for n in pos.nodes() {
        elems(n)?;
    }
    let betas = elems(nb)?;
    let gammas = elems(ng)?;
    let results: Vec<ChaseSummary> = betas
        .par_iter()
        .map(|b| {
            let mut s = ChaseSummary::default();
            for g in &gammas {
                s.pairs += 1;
                match chase(d, pos, b, g) {
                    Ok(cert) => {
                        s.compatible += 1;
                        if cert.validate(d) {
                            s.successes += 1;
                        } else {
                            s.failures += 1;
                        }
                    }
                    Err(ChaseError::CompatibilityError(_)) => s.rejected += 1,
                    Err(_) => {
                        s.compatible += 1;
                        s.failures += 1;
                    }
                }
            }
            s
        })
        .collect();
    Ok(results.into_iter().fold(ChaseSummary::default(), |a, b| ChaseSummary {
        pairs: a.pairs + b.pairs,
        compatible: a.compatible + b.compatible,
        successes: a.successes + b.successes,
        failures: a.failures + b.failures,
        rejected: a.rejected + b.rejected,
    }))
}

pub fn enumerate_chases(d: &Diagram) -> Result<[ChaseSummary; 2], ChaseError> {
    Ok([
        enumerate_position(d, ChasePosition::Left)?,
        enumerate_position(d, ChasePosition::Right)?,
    ])
}

/// A divisor as a JSON number when it fits, otherwise as a string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Divisor {
    Small(i64),
    Big(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeReport {
    pub pos: [usize; 2],
    pub rank: usize,
    pub divisors: Vec<Divisor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Exactness,
    Square,
    Chase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub kind: CheckKind,
    /// 1-based `[row, col]`; row 5 is the appendage
    pub pos: [usize; 2],
    pub status: Status,
    /// observed sign of a square, if it commutes up to sign
    pub sign: Option<i32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub nodes: Vec<NodeReport>,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| c.status != Status::Pass && c.status != Status::Skipped)
    }
}

fn divisor(d: &Int) -> Divisor {
    i64::try_from(d).map(Divisor::Small).unwrap_or_else(|_| Divisor::Big(d.to_string()))
}

#[derive(Debug, Clone, Copy)]
enum Check {
    RowExact(usize, usize),
    ColExact(usize, usize),
    Square(usize, usize),
    AppInjective,
    AppExact(usize),
    Chase(ChasePosition),
}

/// Chase checks run only when the number of pairs stays below this.
pub const CHASE_PAIR_LIMIT: usize = 1 << 12;

fn run_check(d: &Diagram, c: Check) -> CheckReport {
    let exact = |f: &FgAbMorphism, g: &FgAbMorphism| {
        if g.compose(f).is_err() {
            Status::Error
        } else if fgab::is_exact_at(f, g) {
            Status::Pass
        } else {
            Status::Fail
        }
    };
    let (kind, pos, status, sign) = match c {
        Check::RowExact(r, k) => (CheckKind::Exactness, [r + 1, k + 1], exact(&d.h[r][k - 1], &d.h[r][k]), None),
        Check::ColExact(r, k) => (CheckKind::Exactness, [r + 1, k + 1], exact(&d.v[r - 1][k], &d.v[r][k]), None),
        Check::Square(r, k) => match d.square(r, k) {
            Err(_) => (CheckKind::Square, [r + 1, k + 1], Status::Error, None),
            Ok((top, bottom)) => {
                let expected = d.signs[r][k];
                let plus = top.equals(&bottom);
                let minus = top.equals(&bottom.neg());
                let observed = match (plus, minus) {
                    (true, true) => Some(expected),
                    (true, false) => Some(1),
                    (false, true) => Some(-1),
                    _ => None,
                };
                let status = if observed == Some(expected) { Status::Pass } else { Status::Fail };
                (CheckKind::Square, [r + 1, k + 1], status, observed)
            }
        },
        Check::AppInjective => {
            let app = d.appendage.as_ref().expect("appendage");
            let s = if app.maps[0].is_injective() { Status::Pass } else { Status::Fail };
            (CheckKind::Exactness, [5, 1], s, None)
        }
        Check::AppExact(k) => {
            let app = d.appendage.as_ref().expect("appendage");
            (CheckKind::Exactness, [5, k + 1], exact(&app.maps[k - 1], &app.maps[k]), None)
        }
        Check::Chase(p) => {
            let [nb, ng, _] = p.nodes();
            let size = |n: (usize, usize)| d.node(n.0, n.1).order().and_then(|o| usize::try_from(&o).ok());
            let pos = [4, p.col()];
            match (size(nb), size(ng)) {
                (Some(a), Some(b)) if a.saturating_mul(b) <= CHASE_PAIR_LIMIT => match enumerate_position(d, p) {
                    Ok(s) if s.failures == 0 => (CheckKind::Chase, pos, Status::Pass, None),
                    Ok(_) => (CheckKind::Chase, pos, Status::Fail, None),
                    Err(_) => (CheckKind::Chase, pos, Status::Error, None),
                },
                _ => (CheckKind::Chase, pos, Status::Skipped, None),
            }
        }
    };
    CheckReport { kind, pos, status, sign }
}

/// Checks every interior node of rows, columns and the appendage, every
/// square against its expected sign, and (for the main diagram) both chase
/// positions when the nodes are small. Failures become report entries.
pub fn verify(d: &Diagram) -> VerificationReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    for r in 0..ROWS {
        for k in 1..COLS - 1 {
            checks.push(Check::RowExact(r, k));
        }
    }
    for r in 1..ROWS - 1 {
        for k in 0..COLS {
            checks.push(Check::ColExact(r, k));
        }
    }
    for r in 0..ROWS - 1 {
        for k in 0..COLS - 1 {
            checks.push(Check::Square(r, k));
        }
    }
    if let Some(app) = &d.appendage {
        if d.kind == DiagramKind::Main {
            checks.push(Check::AppInjective);
        }
        for k in 1..app.maps.len() {
            checks.push(Check::AppExact(k));
        }
    }
    if d.kind == DiagramKind::Main {
        checks.push(Check::Chase(ChasePosition::Left));
        checks.push(Check::Chase(ChasePosition::Right));
    }
    let reports: Vec<CheckReport> = checks.par_iter().map(|&c| run_check(d, c)).collect();
    let mut nodes = Vec::new();
    for (r, row) in d.nodes.iter().enumerate() {
        for (c, n) in row.iter().enumerate() {
            nodes.push(NodeReport {
                pos: [r + 1, c + 1],
                rank: n.group.free_rank(),
                divisors: n.group.torsion().iter().map(divisor).collect(),
            });
        }
    }
    if let Some(app) = &d.appendage {
        for (k, g) in app.terms.iter().enumerate() {
            nodes.push(NodeReport {
                pos: [5, k + 1],
                rank: g.free_rank(),
                divisors: g.torsion().iter().map(divisor).collect(),
            });
        }
    }
    let pass = reports.iter().all(|c| matches!(c.status, Status::Pass | Status::Skipped));
    VerificationReport {
        scenario: d.scenario.clone(),
        nodes,
        checks: reports,
        pass,
        elapsed: start.elapsed(),
    }
}

/// Node-by-node isomorphism of two diagrams.
pub fn nodes_agree(a: &Diagram, b: &Diagram) -> bool {
    a.nodes
        .iter()
        .flatten()
        .zip(b.nodes.iter().flatten())
        .all(|(x, y)| x.group.is_isomorphic(&y.group))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int;
    use crate::scenario::builtin_scenario;

    /// adds 1 to the first canonical entry, if that stays well defined
    fn bump(f: &FgAbMorphism) -> Option<FgAbMorphism> {
        let mut m = f.canonical_matrix();
        m.row_mut(0)[0] += int(1);
        FgAbMorphism::from_canonical(f.source(), f.target(), &m.columns()).ok()
    }

    fn lib(name: &str) -> (Scenario, Diagram) {
        let s = builtin_scenario(name).unwrap();
        let d = build_main_diagram(&s).unwrap();
        (s, d)
    }

    #[test]
    fn lib1_nodes_are_finite_two_groups() {
        let (_, d) = lib("LIB-1");
        for n in d.nodes.iter().flatten() {
            let o = n.group.order().unwrap();
            assert!(n.group.torsion().iter().all(|m| *m == int(2)), "{} has order {o}", n.label);
        }
        assert!(verify(&d).pass);
    }

    #[test]
    fn wrap_nodes_are_shared() {
        let (_, d) = lib("LIB-1");
        assert_eq!(d.node(3, 0), d.node(0, 3));
        assert_eq!(d.node(3, 1), d.node(0, 4));
    }

    #[test]
    fn degenerate_scenario_columns() {
        let (_, d) = lib("LIB-0");
        for r in 0..3 {
            assert!(d.h[r][0].is_isomorphism());
            assert!(d.node(r, 2).is_trivial());
        }
    }

    #[test]
    fn corrupted_arrow_fails_at_its_square() {
        let (_, mut d) = lib("LIB-1");
        let g = bump(&d.h[1][0]).unwrap();
        d.h[1][0] = g;
        let r = verify(&d);
        assert!(!r.pass);
        assert!(r
            .failures()
            .any(|c| c.kind == CheckKind::Square && (c.pos == [1, 1] || c.pos == [2, 1])));
    }

    #[test]
    fn corrupted_column_arrow_is_located() {
        let (_, mut d) = lib("LIB-1");
        let g = bump(&d.v[0][1]).unwrap();
        d.v[0][1] = g;
        let r = verify(&d);
        assert!(r
            .failures()
            .all(|c| c.kind != CheckKind::Square || c.pos == [1, 1] || c.pos == [1, 2]));
        assert!(r.failures().any(|c| c.kind == CheckKind::Square));
    }

    #[test]
    fn zero_pair_gives_zero_alpha() {
        let (_, d) = lib("LIB-1");
        for pos in [ChasePosition::Left, ChasePosition::Right] {
            let [nb, ng, _] = pos.nodes();
            let b = d.node(nb.0, nb.1).zero_element();
            let g = d.node(ng.0, ng.1).zero_element();
            let c = chase(&d, pos, &b, &g).unwrap();
            assert!(c.alpha.is_zero());
            assert!(c.validate(&d));
        }
    }

    #[test]
    fn incompatible_pair_rejected() {
        let (_, d) = lib("LIB-1");
        let [nb, ng, _] = ChasePosition::Right.nodes();
        let gens = d.node(nb.0, nb.1).generators();
        let g = d.node(ng.0, ng.1).zero_element();
        let bad = gens.iter().find(|b| !d.h[2][2].apply(b).unwrap().is_zero()).unwrap();
        assert!(matches!(chase_right(&d, bad, &g), Err(ChaseError::CompatibilityError((2, 3)))));
    }

    #[test]
    fn lib1_exhaustive_chases() {
        let (_, d) = lib("LIB-1");
        let [left, right] = enumerate_chases(&d).unwrap();
        for s in [&left, &right] {
            assert_eq!(s.failures, 0);
            assert_eq!(s.successes, s.compatible);
            assert_eq!(s.compatible + s.rejected, s.pairs);
        }
        assert!(right.rejected > 0);
    }

    #[test]
    fn infinite_node_refused() {
        let (_, mut d) = lib("LIB-0");
        d.nodes[2][1].group = FgAbGroup::free(1);
        assert!(matches!(enumerate_chases(&d), Err(ChaseError::InfiniteNode((2, 1)))));
    }

    #[test]
    fn variant_choices() {
        let s = builtin_scenario("LIB-1").unwrap();
        let st = s.setup().unwrap();
        let main = main_diagram(st, "LIB-1").unwrap();
        let id = build_variant_diagram(&s, &VariantChoice::Identity.map(st)).unwrap();
        assert!(verify(&id).pass);
        for r in 0..ROWS {
            assert!(id.node(r, 2).is_trivial());
            assert!(id.h[r][0].is_isomorphism());
        }
        let st0 = build_variant_diagram(&s, &VariantChoice::Stalk0.map(st)).unwrap();
        assert!(verify(&st0).pass);
        assert!(nodes_agree(&main, &st0));
        let zero = build_variant_diagram(&s, &VariantChoice::Zero.map(st)).unwrap();
        assert!(verify(&zero).pass);
        // G^p = E^{p+1}_{≤1} when B = 0
        for r in 0..3 {
            assert!(zero.node(r, 2).is_isomorphic(zero.node(r, 1)));
        }
    }

    #[test]
    fn variant_rejects_foreign_target() {
        let s = builtin_scenario("LIB-1").unwrap();
        let st = s.setup().unwrap();
        let f = ChainMap::identity(&st.d);
        assert_eq!(build_variant_diagram(&s, &f).unwrap_err(), DiagramError::InvalidTarget);
    }

    #[test]
    fn report_json_shape() {
        let (_, d) = lib("LIB-0");
        let r = verify(&d);
        let text = r.to_json();
        let at = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        let checks = &text[at("checks")..];
        let cat = |k: &str| checks.find(&format!("\"{k}\"")).unwrap();
        assert!(at("scenario") < at("nodes") && at("nodes") < at("checks") && at("checks") < at("pass"));
        assert!(cat("kind") < cat("pos") && cat("pos") < cat("status") && cat("status") < cat("sign"));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let c = &v["checks"][0];
        assert_eq!(c["sign"], serde_json::Value::Null);
        assert_eq!(v["nodes"][0]["divisors"][0], 2);
        assert_eq!(r.to_json(), verify(&d).to_json());
    }
}
