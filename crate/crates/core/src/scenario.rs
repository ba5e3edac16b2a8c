//! Scenarios `(G, N, M, 0 → A → B → C → 0)` and the builtin library.

use std::sync::OnceLock;

use thiserror::Error;

use crate::dsl::{self, GroupSpec, ModuleSpec, ParseError, Pos, ScenarioSpec, SesSpec};
use crate::fgab::{FgAbGroup, FgAbMorphism};
use crate::grpmod::{
    builtin_group, extension_from_cocycle, inverse, quotient_group, FiniteGroup, GModule, GModuleMorphism,
    GroupError, ModuleSES, QuotientData, Subgroup,
};
use crate::linalg::{int, Int, IntMatrix};
use crate::resolutions::DEFAULT_MAX_DEGREE;
use crate::spectral::{LhsSetup, SpectralError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SemanticError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid scenario at {0}")]
    Semantic(#[from] SemanticError),
}

fn sem(pos: Pos, message: impl Into<String>) -> SemanticError {
    SemanticError {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

#[derive(Debug)]
pub struct Scenario {
    pub name: String,
    pub spec: ScenarioSpec,
    pub group: FiniteGroup,
    pub normal: Subgroup,
    pub quotient: QuotientData,
    /// `M` over `G`, presented on diagonal relations
    pub module: GModule,
    /// `0 → A → B → C → 0` over `G/N`
    pub coefficients: ModuleSES,
    pub max_degree: usize,
    setup: OnceLock<Result<LhsSetup, SpectralError>>,
}

fn to_matrix(rows: &[Vec<i64>], ncols: usize) -> IntMatrix {
    IntMatrix::from_fn(rows.len(), ncols, |i, j| int(rows[i][j]))
}

fn build_module(group: &FiniteGroup, m: &ModuleSpec, pos: Pos) -> Result<GModule, SemanticError> {
    if let Some(r) = m.relations.iter().find(|r| r.len() != m.rank) {
        return Err(sem(pos, format!("module {}: relation {r:?} has the wrong length", m.name)));
    }
    // relations are rows in the file, columns for from_relations
    let rel = to_matrix(&m.relations, m.rank).transpose();
    let rel = if m.relations.is_empty() {
        IntMatrix::zeros(m.rank, 0)
    } else {
        rel
    };
    let underlying =
        FgAbGroup::from_relations(m.rank, &rel).map_err(|e| sem(pos, format!("module {}: {e}", m.name)))?;
    let mut gens = Vec::new();
    for (g, a) in &m.actions {
        if a.len() != m.rank || a.iter().any(|r| r.len() != m.rank) {
            return Err(sem(pos, format!("module {}: action of g{g} is not {}×{}", m.name, m.rank, m.rank)));
        }
        gens.push((*g, to_matrix(a, m.rank)));
    }
    if gens.is_empty() {
        return Ok(GModule::trivial(group, &underlying));
    }
    GModule::from_generators(group, &underlying, &gens).map_err(|e| sem(pos, format!("module {}: {e}", m.name)))
}

/// Transports a morphism along the diagonalizing isomorphisms.
fn transport(f: &FgAbMorphism, src: &FgAbMorphism, tgt: &FgAbMorphism) -> Result<FgAbMorphism, GroupError> {
    let back = inverse(src).ok_or(GroupError::NotExact("diagonalization"))?;
    Ok(tgt.compose(&f.compose(&back)?)?)
}

impl Scenario {
    pub fn from_spec(name: &str, spec: ScenarioSpec) -> Result<Self, SemanticError> {
        let src = &spec.source;
        let group = match &spec.group {
            GroupSpec::Family { name, param } => builtin_group(name, *param),
            GroupSpec::Cayley(t) => {
                let table = t
                    .iter()
                    .map(|r| r.iter().map(|&x| usize::try_from(x).unwrap_or(usize::MAX)).collect())
                    .collect();
                FiniteGroup::from_table(table, None)
            }
        }
        .map_err(|e| sem(src.group, e.to_string()))?;
        let normal = Subgroup::new(&group, &spec.normal).map_err(|e| sem(src.normal, e.to_string()))?;
        let quotient = quotient_group(&group, &normal).map_err(|e| sem(src.normal, e.to_string()))?;
        let q = &quotient.quotient;
        let (mi, mspec) = spec.module("M").ok_or_else(|| sem(src.end, "missing module M"))?;
        let module = build_module(&group, mspec, src.modules[mi])?.diagonalized().0;
        let coefficients = match &spec.ses {
            SesSpec::Cocycle(u) => {
                let (ai, aspec) = spec
                    .module("A")
                    .ok_or_else(|| sem(src.ses, "the cocycle form needs a module A over G/N"))?;
                let (a, iso) = build_module(q, aspec, src.modules[ai])?.diagonalized();
                if u.len() != q.order() || u.iter().any(|r| r.len() != aspec.rank) {
                    return Err(sem(
                        src.ses,
                        format!("cocycle needs {} rows of length {}", q.order(), aspec.rank),
                    ));
                }
                let u: Vec<Vec<Int>> = u
                    .iter()
                    .map(|r| iso.apply_vec(&r.iter().map(|&x| int(x)).collect::<Vec<_>>()))
                    .collect();
                extension_from_cocycle(&a, &u).map_err(|e| sem(src.ses, e.to_string()))?
            }
            SesSpec::Explicit { modules, i, j } => {
                let mut built = Vec::new();
                for name in modules {
                    let (k, ms) = spec
                        .module(name)
                        .ok_or_else(|| sem(src.ses, format!("unknown module {name}")))?;
                    built.push((build_module(q, ms, src.modules[k])?, ms.rank));
                }
                let dims = |m: &[Vec<i64>], r: usize, c: usize| m.len() == r && m.iter().all(|row| row.len() == c);
                let (ra, rb, rc) = (built[0].1, built[1].1, built[2].1);
                if !dims(i, rb, ra) || !dims(j, rc, rb) {
                    return Err(sem(src.ses, "maps i and j have the wrong shape"));
                }
                let make = || -> Result<ModuleSES, GroupError> {
                    let fi = FgAbMorphism::new(built[0].0.underlying(), built[1].0.underlying(), to_matrix(i, ra))?;
                    let fj = FgAbMorphism::new(built[1].0.underlying(), built[2].0.underlying(), to_matrix(j, rb))?;
                    let d: Vec<(GModule, FgAbMorphism)> = built.iter().map(|(m, _)| m.diagonalized()).collect();
                    let ti = transport(&fi, &d[0].1, &d[1].1)?;
                    let tj = transport(&fj, &d[1].1, &d[2].1)?;
                    // equivariance is checked on the file's presentation
                    GModuleMorphism::new(&built[0].0, &built[1].0, fi)?;
                    GModuleMorphism::new(&built[1].0, &built[2].0, fj)?;
                    ModuleSES::new(
                        GModuleMorphism::new(&d[0].0, &d[1].0, ti)?,
                        GModuleMorphism::new(&d[1].0, &d[2].0, tj)?,
                    )
                };
                make().map_err(|e| sem(src.ses, e.to_string()))?
            }
        };
        let max_degree = spec.max_degree.unwrap_or(DEFAULT_MAX_DEGREE);
        if max_degree < 2 {
            return Err(sem(src.end, "max_degree must be at least 2"));
        }
        Ok(Scenario {
            name: name.to_string(),
            spec,
            group,
            normal,
            quotient,
            module,
            coefficients,
            max_degree,
            setup: OnceLock::new(),
        })
    }

    pub fn parse(name: &str, text: &str) -> Result<Self, ScenarioError> {
        Ok(Self::from_spec(name, dsl::parse(text)?)?)
    }

    pub fn to_text(&self) -> String {
        dsl::serialize(&self.spec)
    }

    /// The model complex and its truncations, built on first use.
    pub fn setup(&self) -> Result<&LhsSetup, SpectralError> {
        self.setup
            .get_or_init(|| LhsSetup::new(&self.module, &self.quotient, &self.coefficients, self.max_degree))
            .as_ref()
            .map_err(Clone::clone)
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["LIB-0", "LIB-1", "LIB-2", "LIB-3"];

/// Scenario text for a builtin name.
pub fn builtin_text(name: &str) -> Option<&'static str> {
    Some(match name {
        // N trivial
        "LIB-0" => {
            "group { family: cyclic; param: 2; }\n\
             normal { elements: [0]; }\n\
             module M { rank: 1; relations: [[2]]; }\n\
             module A { rank: 1; relations: [[2]]; }\n\
             ses { cocycle: [[0], [1]]; }\n"
        }
        "LIB-1" => {
            "group { family: cyclic; param: 4; }\n\
             normal { elements: [0, 2]; }\n\
             module M { rank: 1; relations: [[2]]; }\n\
             module A { rank: 1; relations: [[2]]; }\n\
             ses { cocycle: [[0], [1]]; }\n"
        }
        "LIB-2" => {
            "group { family: symmetric3; }\n\
             normal { elements: [0, 3, 4]; }\n\
             module M { rank: 1; relations: [[3]]; }\n\
             module A { rank: 1; action g1: [[-1]]; }\n\
             ses { cocycle: [[0], [1]]; }\n"
        }
        "LIB-3" => {
            "group { family: klein4; }\n\
             normal { elements: [0, 1]; }\n\
             module M { rank: 1; action g2: [[-1]]; action g1: [[1]]; }\n\
             module A { rank: 1; relations: [[2]]; }\n\
             ses { cocycle: [[0], [1]]; }\n"
        }
        _ => return None,
    })
}

pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    builtin_text(name).map(|t| Scenario::parse(name, t).expect("builtin scenarios are valid"))
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    BUILTIN_NAMES.iter().filter_map(|n| builtin_scenario(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_loads() {
        let lib = builtin_scenarios();
        assert_eq!(lib.len(), 4);
        assert_eq!(lib[1].module.underlying().order(), Some(int(2)));
        assert!(!lib[2].group.is_abelian());
        assert_eq!(lib[0].quotient.quotient.order(), 2);
        assert_eq!(lib[3].coefficients.b.underlying().ambient_rank(), 2);
    }

    #[test]
    fn normal_not_closed_names_pair() {
        let text = "group { family: cyclic; param: 4; }\nnormal { elements: [0, 1]; }\n\
            module M { rank: 1; }\nmodule A { rank: 1; }\nses { cocycle: [[0],[0],[0],[0]]; }\n";
        let e = Scenario::parse("x", text).unwrap_err();
        match e {
            ScenarioError::Semantic(s) => {
                assert_eq!(s.line, 2);
                assert!(s.message.contains('1'), "{}", s.message);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_cocycle_rejected() {
        // u(1)·2 = u(2) fails for u = (0, 1, 0, 0) over C4 acting trivially on Z
        let text = "group { family: cyclic; param: 4; }\nnormal { elements: [0]; }\n\
            module M { rank: 1; }\nmodule A { rank: 1; }\nses { cocycle: [[0],[1],[0],[0]]; }\n";
        assert!(matches!(Scenario::parse("x", text), Err(ScenarioError::Semantic(_))));
    }

    #[test]
    fn builtins_round_trip() {
        for s in builtin_scenarios() {
            let again = Scenario::parse(&s.name, &s.to_text()).unwrap();
            assert_eq!(again.spec, s.spec);
            assert_eq!(again.module.underlying(), s.module.underlying());
        }
    }
}
