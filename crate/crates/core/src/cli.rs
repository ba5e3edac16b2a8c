//! Command-line driver. Exit codes: 0 all checks pass, 1 a verification
//! failed, 2 bad input.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};

use crate::complexes::ExactSequence;
use crate::diagrams::{
    build_main_diagram, build_variant_diagram, chase, enumerate_position, verify, ChaseError, ChasePosition,
    Diagram, VariantChoice, VerificationReport,
};
use crate::fgab::FgAbGroup;
use crate::grpmod::inflation;
use crate::linalg::Int;
use crate::resolutions::{ext_groups, group_cohomology, CohomologyMethod};
use crate::scenario::{builtin_scenario, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lowterm", version, about = "Low-term sequences and diagram checks over finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Position {
    Left,
    Right,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and verify the main diagram (and the cone variants)
    Verify {
        scenario: String,
        #[arg(long)]
        variant: bool,
        #[arg(long)]
        json: Option<std::path::PathBuf>,
    },
    /// Run the zig-zag chase
    Chase {
        scenario: String,
        #[arg(long, value_enum)]
        position: Position,
        #[arg(long)]
        enumerate: bool,
        /// canonical coordinates of β, comma separated
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        /// canonical coordinates of γ, comma separated
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
    },
    /// H^q(G, M) and H^q(N, M)
    Cohomology {
        scenario: String,
        #[arg(long)]
        degree: usize,
    },
    /// Ext^i over Z[G] of the inflated T_t against M, next to the hyper-Ext
    Ext {
        scenario: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        t: u8,
        #[arg(long)]
        degree: usize,
    },
    /// The seven-term sequence for one t
    Lowterm {
        scenario: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        t: u8,
    },
    /// The JSON verification report of the main diagram
    Report { scenario: String },
}

/// A builtin name or a path to a scenario file.
pub fn load_scenario(arg: &str) -> Result<Scenario, String> {
    if let Some(s) = builtin_scenario(arg) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
    let name = Path::new(arg)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| arg.to_string());
    Scenario::parse(&name, &text).map_err(|e| format!("{arg}: {e}"))
}

fn shape(g: &FgAbGroup) -> String {
    g.shape().to_string()
}

/// The diagram as a text grid.
pub fn render_grid(d: &Diagram) -> String {
    let cells: Vec<Vec<String>> = d
        .nodes
        .iter()
        .map(|row| row.iter().map(|n| format!("{} = {}", n.label, shape(&n.group))).collect())
        .collect();
    let width = cells.iter().flatten().map(|c| c.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:<width$}")).collect();
        let _ = writeln!(out, "{}", line.join(" → ").trim_end());
    }
    if let Some(app) = &d.appendage {
        let line: Vec<String> = app
            .labels
            .iter()
            .zip(&app.terms)
            .map(|(l, g)| format!("{l} = {}", shape(g)))
            .collect();
        let _ = writeln!(out, "appendage: {}", line.join(" → "));
    }
    out
}

fn render_sequence(seq: &ExactSequence) -> String {
    let mut out = String::new();
    for (k, (l, g)) in seq.labels.iter().zip(&seq.terms).enumerate() {
        let _ = write!(out, "{l} = {}", shape(g));
        if k + 1 < seq.terms.len() {
            out.push_str(" → ");
        }
    }
    out
}

fn summarize(out: &mut dyn Write, label: &str, r: &VerificationReport) {
    let failed: Vec<_> = r.failures().collect();
    let _ = writeln!(
        out,
        "{label}: {} ({} checks, {} failed, {:.2?})",
        if r.pass { "pass" } else { "FAIL" },
        r.checks.len(),
        failed.len(),
        r.elapsed
    );
    for c in failed {
        let _ = writeln!(out, "  {:?} at {:?}: {:?} (sign {:?})", c.kind, c.pos, c.status, c.sign);
    }
}

fn parse_coords(s: &str) -> Result<Vec<Int>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<Int>().map_err(|e| format!("bad coordinate `{p}`: {e}")))
        .collect()
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, String> {
    let text = |e: &dyn std::fmt::Display| e.to_string();
    match cmd {
        Command::Verify { scenario, variant, json } => {
            let s = load_scenario(&scenario)?;
            let d = build_main_diagram(&s).map_err(|e| text(&e))?;
            let _ = write!(out, "{}", render_grid(&d));
            let main = verify(&d);
            summarize(out, &format!("{} main", s.name), &main);
            let mut reports = vec![main];
            if variant {
                let st = s.setup().map_err(|e| text(&e))?;
                for ch in VariantChoice::ALL {
                    let v = build_variant_diagram(&s, &ch.map(st)).map_err(|e| text(&e))?;
                    let mut r = verify(&v);
                    r.scenario = format!("{} variant {}", s.name, ch.name());
                    summarize(out, &r.scenario, &r);
                    reports.push(r);
                }
            }
            if let Some(path) = json {
                let body = if reports.len() == 1 {
                    reports[0].to_json()
                } else {
                    serde_json::to_string_pretty(&reports).expect("reports serialize")
                };
                std::fs::write(&path, body + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Chase {
            scenario,
            position,
            enumerate,
            beta,
            gamma,
        } => {
            let s = load_scenario(&scenario)?;
            let d = build_main_diagram(&s).map_err(|e| text(&e))?;
            let pos = match position {
                Position::Left => ChasePosition::Left,
                Position::Right => ChasePosition::Right,
            };
            let [nb, ng, na] = pos.nodes();
            let _ = writeln!(
                out,
                "β ∈ {} = {}, γ ∈ {} = {}, α ∈ {} = {}",
                d.nodes[nb.0][nb.1].label,
                shape(d.node(nb.0, nb.1)),
                d.nodes[ng.0][ng.1].label,
                shape(d.node(ng.0, ng.1)),
                d.nodes[na.0][na.1].label,
                shape(d.node(na.0, na.1)),
            );
            if let (Some(b), Some(g)) = (&beta, &gamma) {
                let gb = d.node(nb.0, nb.1);
                let gg = d.node(ng.0, ng.1);
                let (cb, cg) = (parse_coords(b)?, parse_coords(g)?);
                if cb.len() != gb.canonical_rank() || cg.len() != gg.canonical_rank() {
                    return Err(format!(
                        "β needs {} and γ needs {} coordinates",
                        gb.canonical_rank(),
                        gg.canonical_rank()
                    ));
                }
                let x = gb.element_from_canonical(&cb);
                let y = gg.element_from_canonical(&cg);
                return match chase(&d, pos, &x, &y) {
                    Ok(c) => {
                        let ok = c.validate(&d);
                        let _ = writeln!(out, "α = {:?} (certificate {})", c.alpha.canonical(), if ok { "valid" } else { "INVALID" });
                        Ok(if ok { EXIT_OK } else { EXIT_FAIL })
                    }
                    Err(e @ ChaseError::CompatibilityError(_)) => Err(e.to_string()),
                    Err(e) => {
                        let _ = writeln!(out, "chase failed: {e}");
                        Ok(EXIT_FAIL)
                    }
                };
            }
            if beta.is_some() || gamma.is_some() {
                return Err("give both --beta and --gamma".into());
            }
            if !enumerate {
                let _ = writeln!(out, "pass --enumerate or --beta/--gamma");
                return Err("nothing to chase".into());
            }
            let summary = enumerate_position(&d, pos).map_err(|e| text(&e))?;
            let _ = writeln!(
                out,
                "{} pairs, {} compatible, {} solved, {} failed, {} rejected",
                summary.pairs, summary.compatible, summary.successes, summary.failures, summary.rejected
            );
            Ok(if summary.failures == 0 { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Cohomology { scenario, degree } => {
            let s = load_scenario(&scenario)?;
            let hg = group_cohomology(&s.module, degree, CohomologyMethod::Bar).map_err(|e| text(&e))?;
            let _ = writeln!(out, "H^{degree}(G, M) = {}", shape(&hg[degree]));
            let st = s.setup().map_err(|e| text(&e))?;
            match st.d.valid_through() {
                Some(v) if degree as i64 > v => {
                    let _ = writeln!(out, "H^{degree}(N, M) is outside the window (max_degree {})", s.max_degree);
                }
                _ => {
                    let _ = writeln!(out, "H^{degree}(N, M) = {}", shape(st.d.cohomology(degree as i64).group()));
                }
            }
            Ok(EXIT_OK)
        }
        Command::Ext { scenario, t, degree } => {
            let s = load_scenario(&scenario)?;
            let st = s.setup().map_err(|e| text(&e))?;
            let tt = match t {
                1 => &s.coefficients.c,
                2 => &s.coefficients.b,
                _ => &s.coefficients.a,
            };
            let inf = inflation(tt, &s.quotient).map_err(|e| text(&e))?;
            let ext = ext_groups(&inf, &s.module, degree).map_err(|e| text(&e))?;
            let hyper = st.e(t as usize, degree as i64).map_err(|e| text(&e))?;
            let _ = writeln!(out, "Ext^{degree}_G(Inf T_{t}, M) = {}", shape(&ext[degree]));
            let _ = writeln!(out, "H^{degree} Psi_{t}(D) = {}", shape(&hyper));
            Ok(if ext[degree].is_isomorphic(&hyper) { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Lowterm { scenario, t } => {
            let s = load_scenario(&scenario)?;
            let st = s.setup().map_err(|e| text(&e))?;
            let seq = st.low_term_sequence(t as usize).map_err(|e| text(&e))?;
            let _ = writeln!(out, "0 → {}", render_sequence(&seq));
            let exact = seq.exactness();
            let injective = seq.maps[0].is_injective();
            let _ = writeln!(out, "injective at start: {injective}; exact at interior nodes: {exact:?}");
            Ok(if injective && exact.iter().all(|x| *x) { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Report { scenario } => {
            let s = load_scenario(&scenario)?;
            let d = build_main_diagram(&s).map_err(|e| text(&e))?;
            let r = verify(&d);
            let _ = writeln!(out, "{}", r.to_json());
            Ok(if r.pass { EXIT_OK } else { EXIT_FAIL })
        }
    }
}
