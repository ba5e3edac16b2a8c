//! Scenario file syntax: a tokenizer, a recursive-descent parser into
//! [`ScenarioSpec`], and the inverse serializer.
//!
//! ```text
//! group { family: cyclic; param: 4; }
//! normal { elements: [0, 2]; }
//! module M { rank: 1; relations: [[2]]; }
//! module A { rank: 1; relations: [[2]]; }
//! ses { cocycle: [[0], [1]]; }
//! options { max_degree: 4; }
//! ```

use std::fmt::{self, Write as _};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message} (at `{token}`)")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub token: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Family { name: String, param: Option<i64> },
    Cayley(Vec<Vec<i64>>),
}

/// A module: `Z^rank` modulo `relations` (one relation per row), with the
/// action given on selected elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleSpec {
    pub name: String,
    pub rank: usize,
    pub relations: Vec<Vec<i64>>,
    pub actions: Vec<(usize, Vec<Vec<i64>>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SesSpec {
    /// `0 → A → A ⊕ Z → Z → 0`; one row per element of `G/N`
    Cocycle(Vec<Vec<i64>>),
    Explicit {
        modules: [String; 3],
        i: Vec<Vec<i64>>,
        j: Vec<Vec<i64>>,
    },
}

/// Source positions of each section, for semantic error reports.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    pub group: Pos,
    pub normal: Pos,
    pub ses: Pos,
    pub modules: Vec<Pos>,
    pub end: Pos,
}

impl PartialEq for SourceMap {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub group: GroupSpec,
    pub normal: Vec<usize>,
    pub modules: Vec<ModuleSpec>,
    pub ses: SesSpec,
    pub max_degree: Option<usize>,
    pub source: SourceMap,
}

impl ScenarioSpec {
    pub fn module(&self, name: &str) -> Option<(usize, &ModuleSpec)> {
        self.modules.iter().enumerate().find(|(_, m)| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Punct(c) => write!(f, "{c}"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
        } else if c.is_whitespace() {
            col += 1;
            i += 1;
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if "{}[]:;,".contains(c) {
            out.push((Tok::Punct(c), pos));
            col += 1;
            i += 1;
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse::<i64>().map_err(|_| ParseError {
                line,
                column: col,
                message: "integer out of range".into(),
                token: s.clone(),
            })?;
            col += i - start;
            out.push((Tok::Int(n), pos));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else {
            return Err(ParseError {
                line,
                column: col,
                message: "unexpected character".into(),
                token: c.to_string(),
            });
        }
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, Pos) {
        &self.toks[self.at]
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (t, p) = self.peek();
        Err(ParseError {
            line: p.line,
            column: p.column,
            message: message.into(),
            token: t.to_string(),
        })
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek().0 == Tok::Punct(c) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match &self.peek().0 {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        match self.peek().0 {
            Tok::Int(n) => {
                self.next();
                Ok(n)
            }
            _ => self.err("expected an integer"),
        }
    }

    fn nonneg(&mut self) -> Result<usize, ParseError> {
        let n = self.int()?;
        if n < 0 {
            self.at -= 1;
            return self.err("expected a non-negative integer");
        }
        Ok(n as usize)
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        self.punct('[')?;
        let mut v = Vec::new();
        if self.peek().0 == Tok::Punct(']') {
            self.next();
            return Ok(v);
        }
        loop {
            v.push(item(self)?);
            match self.peek().0 {
                Tok::Punct(',') => {
                    self.next();
                }
                Tok::Punct(']') => {
                    self.next();
                    return Ok(v);
                }
                _ => return self.err("expected `,` or `]`"),
            }
        }
    }

    fn matrix(&mut self) -> Result<Vec<Vec<i64>>, ParseError> {
        let m = self.list(|p| p.list(|p| p.int()))?;
        if m.windows(2).any(|w| w[0].len() != w[1].len()) {
            self.at -= 1;
            return self.err("matrix rows have different lengths");
        }
        Ok(m)
    }

    /// `key :` with the key returned.
    fn key(&mut self) -> Result<(String, Pos), ParseError> {
        let p = self.peek().1;
        let k = self.ident()?;
        Ok((k, p))
    }

    fn end_entry(&mut self) -> Result<(), ParseError> {
        self.punct(';')
    }

    fn unknown<T>(&mut self, key: &str, p: Pos) -> Result<T, ParseError> {
        Err(ParseError {
            line: p.line,
            column: p.column,
            message: "unknown key".into(),
            token: key.into(),
        })
    }
}

fn missing(what: &str, p: Pos) -> ParseError {
    ParseError {
        line: p.line,
        column: p.column,
        message: format!("missing {what}"),
        token: "end of input".into(),
    }
}

pub fn parse(text: &str) -> Result<ScenarioSpec, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let mut group = None;
    let mut normal = None;
    let mut modules: Vec<ModuleSpec> = Vec::new();
    let mut ses = None;
    let mut max_degree = None;
    let mut source = SourceMap::default();
    loop {
        let (tok, pos) = p.peek().clone();
        let section = match tok {
            Tok::Eof => {
                source.end = pos;
                break;
            }
            Tok::Ident(s) => s,
            _ => return p.err("expected a section name"),
        };
        p.next();
        match section.as_str() {
            "group" => {
                if group.is_some() {
                    p.at -= 1;
                    return p.err("duplicate section");
                }
                source.group = pos;
                p.punct('{')?;
                let (mut family, mut param, mut cayley) = (None, None, None);
                while p.peek().0 != Tok::Punct('}') {
                    let (k, kp) = p.key()?;
                    p.punct(':')?;
                    match k.as_str() {
                        "family" => family = Some(p.ident()?),
                        "param" => param = Some(p.int()?),
                        "cayley" => cayley = Some(p.matrix()?),
                        _ => return p.unknown(&k, kp),
                    }
                    p.end_entry()?;
                }
                p.punct('}')?;
                group = Some(match (family, cayley) {
                    (Some(name), None) => GroupSpec::Family { name, param },
                    (None, Some(t)) if param.is_none() => GroupSpec::Cayley(t),
                    (None, None) => return Err(missing("`family` or `cayley`", pos)),
                    _ => {
                        return Err(ParseError {
                            line: pos.line,
                            column: pos.column,
                            message: "give either `family` or `cayley`".into(),
                            token: "group".into(),
                        })
                    }
                });
            }
            "normal" => {
                source.normal = pos;
                p.punct('{')?;
                while p.peek().0 != Tok::Punct('}') {
                    let (k, kp) = p.key()?;
                    p.punct(':')?;
                    match k.as_str() {
                        "elements" => normal = Some(p.list(|p| p.nonneg())?),
                        _ => return p.unknown(&k, kp),
                    }
                    p.end_entry()?;
                }
                p.punct('}')?;
            }
            "module" => {
                let name = p.ident()?;
                if modules.iter().any(|m| m.name == name) {
                    p.at -= 1;
                    return p.err("duplicate module");
                }
                p.punct('{')?;
                let (mut rank, mut relations, mut actions) = (None, Vec::new(), Vec::new());
                while p.peek().0 != Tok::Punct('}') {
                    let (k, kp) = p.key()?;
                    match k.as_str() {
                        "rank" => {
                            p.punct(':')?;
                            rank = Some(p.nonneg()?);
                        }
                        "relations" => {
                            p.punct(':')?;
                            relations = p.matrix()?;
                        }
                        "action" => {
                            let (g, gp) = p.key()?;
                            let idx = g
                                .strip_prefix('g')
                                .and_then(|s| s.parse::<usize>().ok())
                                .ok_or(ParseError {
                                    line: gp.line,
                                    column: gp.column,
                                    message: "expected an element name g<index>".into(),
                                    token: g.clone(),
                                })?;
                            p.punct(':')?;
                            actions.push((idx, p.matrix()?));
                        }
                        _ => return p.unknown(&k, kp),
                    }
                    p.end_entry()?;
                }
                p.punct('}')?;
                let rank = rank.ok_or_else(|| missing("`rank`", pos))?;
                source.modules.push(pos);
                modules.push(ModuleSpec {
                    name,
                    rank,
                    relations,
                    actions,
                });
            }
            "ses" => {
                source.ses = pos;
                p.punct('{')?;
                let (mut cocycle, mut mods, mut i, mut j) = (None, None, None, None);
                while p.peek().0 != Tok::Punct('}') {
                    let (k, kp) = p.key()?;
                    p.punct(':')?;
                    match k.as_str() {
                        "cocycle" => cocycle = Some(p.matrix()?),
                        "modules" => {
                            let lp = p.peek().1;
                            let names = p.list(|p| p.ident())?;
                            let arr: [String; 3] = names.try_into().map_err(|_| ParseError {
                                line: lp.line,
                                column: lp.column,
                                message: "expected three module names".into(),
                                token: "[".into(),
                            })?;
                            mods = Some(arr);
                        }
                        "i" => i = Some(p.matrix()?),
                        "j" => j = Some(p.matrix()?),
                        _ => return p.unknown(&k, kp),
                    }
                    p.end_entry()?;
                }
                p.punct('}')?;
                ses = Some(match (cocycle, mods, i, j) {
                    (Some(u), None, None, None) => SesSpec::Cocycle(u),
                    (None, Some(modules), Some(i), Some(j)) => SesSpec::Explicit { modules, i, j },
                    _ => {
                        return Err(ParseError {
                            line: pos.line,
                            column: pos.column,
                            message: "give either `cocycle` or `modules`, `i` and `j`".into(),
                            token: "ses".into(),
                        })
                    }
                });
            }
            "options" => {
                p.punct('{')?;
                while p.peek().0 != Tok::Punct('}') {
                    let (k, kp) = p.key()?;
                    p.punct(':')?;
                    match k.as_str() {
                        "max_degree" => max_degree = Some(p.nonneg()?),
                        _ => return p.unknown(&k, kp),
                    }
                    p.end_entry()?;
                }
                p.punct('}')?;
            }
            _ => {
                p.at -= 1;
                return p.err("unknown section");
            }
        }
    }
    let end = source.end;
    Ok(ScenarioSpec {
        group: group.ok_or_else(|| missing("`group` section", end))?,
        normal: normal.ok_or_else(|| missing("`normal` section", end))?,
        modules,
        ses: ses.ok_or_else(|| missing("`ses` section", end))?,
        max_degree,
        source,
    })
}

fn write_matrix(out: &mut String, m: &[Vec<i64>]) {
    let rows: Vec<String> = m
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
        .collect();
    let _ = write!(out, "[{}]", rows.join(", "));
}

pub fn serialize(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    match &spec.group {
        GroupSpec::Family { name, param } => {
            let _ = write!(out, "group {{ family: {name};");
            if let Some(n) = param {
                let _ = write!(out, " param: {n};");
            }
            out.push_str(" }\n");
        }
        GroupSpec::Cayley(t) => {
            out.push_str("group { cayley: ");
            write_matrix(&mut out, t);
            out.push_str("; }\n");
        }
    }
    let els: Vec<String> = spec.normal.iter().map(|e| e.to_string()).collect();
    let _ = writeln!(out, "normal {{ elements: [{}]; }}", els.join(", "));
    for m in &spec.modules {
        let _ = write!(out, "module {} {{ rank: {};", m.name, m.rank);
        if !m.relations.is_empty() {
            out.push_str(" relations: ");
            write_matrix(&mut out, &m.relations);
            out.push(';');
        }
        for (g, a) in &m.actions {
            let _ = write!(out, " action g{g}: ");
            write_matrix(&mut out, a);
            out.push(';');
        }
        out.push_str(" }\n");
    }
    match &spec.ses {
        SesSpec::Cocycle(u) => {
            out.push_str("ses { cocycle: ");
            write_matrix(&mut out, u);
            out.push_str("; }\n");
        }
        SesSpec::Explicit { modules, i, j } => {
            let _ = write!(out, "ses {{ modules: [{}]; i: ", modules.join(", "));
            write_matrix(&mut out, i);
            out.push_str("; j: ");
            write_matrix(&mut out, j);
            out.push_str("; }\n");
        }
    }
    if let Some(d) = spec.max_degree {
        let _ = writeln!(out, "options {{ max_degree: {d}; }}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "group { family: cyclic; param: 2; }\n\
        normal { elements: [0]; }\n\
        module M { rank: 1; relations: [[2]]; }\n\
        module A { rank: 1; relations: [[2]]; }\n\
        ses { cocycle: [[0], [0]]; }\n";

    #[test]
    fn parses_minimal() {
        let s = parse(MINIMAL).unwrap();
        assert_eq!(
            s.group,
            GroupSpec::Family {
                name: "cyclic".into(),
                param: Some(2)
            }
        );
        assert_eq!(s.normal, vec![0]);
        assert_eq!(s.modules.len(), 2);
        assert_eq!(s.ses, SesSpec::Cocycle(vec![vec![0], vec![0]]));
    }

    #[test]
    fn missing_group_reports_end_of_input() {
        let text = "normal { elements: [0]; }\nses { cocycle: [[0]]; }\n";
        let e = parse(text).unwrap_err();
        assert_eq!((e.line, e.column), (3, 1));
        assert!(e.message.contains("group"));
        assert_eq!(e.token, "end of input");
    }

    #[test]
    fn syntax_error_points_at_token() {
        let e = parse("group { family cyclic; }").unwrap_err();
        assert_eq!((e.line, e.column), (1, 16));
        assert_eq!(e.token, "cyclic");
    }

    #[test]
    fn round_trip_explicit_form() {
        let text = "# comment\ngroup { cayley: [[0, 1], [1, 0]]; }\nnormal { elements: [0, 1]; }\n\
            module M { rank: 1; action g1: [[-1]]; }\n\
            module A { rank: 1; relations: [[2]]; }\nmodule B { rank: 1; relations: [[4]]; }\n\
            module C { rank: 1; relations: [[2]]; }\n\
            ses { modules: [A, B, C]; i: [[2]]; j: [[1]]; }\noptions { max_degree: 3; }\n";
        let s = parse(text).unwrap();
        let again = parse(&serialize(&s)).unwrap();
        assert_eq!(s, again);
        assert_eq!(serialize(&s), serialize(&again));
    }
}
