//! CPLEX LP text format: a writer for [`MilpModel`] and a parser for the
//! subset it emits.
//!
//! The writer lists every variable in the `Bounds` section in declaration
//! order, which lets the parser restore that order exactly. Coefficients that
//! are integral print as integers, everything else with 17 significant digits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use crate::milp::{MilpModel, Sense, VarId, VarKind};

const TERMS_PER_LINE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v == (v as i64) as f64 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{:.16e}", v)
    }
}

fn write_terms<'a>(out: &mut String, terms: impl Iterator<Item = (&'a str, f64)>) -> usize {
    let mut count = 0;
    for (name, c) in terms {
        if count > 0 && count % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
        if count == 0 {
            if sign == "-" {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        if mag != 1.0 {
            let _ = write!(out, "{} ", fmt_num(mag));
        }
        out.push_str(name);
        count += 1;
    }
    count
}

/// Renders a model as CPLEX LP text.
pub fn export_lp(model: &MilpModel) -> String {
    let vars = model.variables();
    let mut out = String::new();
    out.push_str("\\ mixed-binary model\nMinimize\n obj: ");
    let objective = vars.iter().filter(|v| v.objective != 0.0).map(|v| (v.name.as_str(), v.objective));
    if write_terms(&mut out, objective) == 0 {
        out.push('0');
    }
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let _ = write!(out, " {}: ", c.name);
        let terms = c.terms.iter().map(|&(v, k)| (vars[v.0].name.as_str(), k));
        if write_terms(&mut out, terms) == 0 {
            match vars.first() {
                Some(v) => {
                    let _ = write!(out, "0 {}", v.name);
                }
                None => out.push('0'),
            }
        }
        let _ = writeln!(out, " {} {}", c.sense, fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for v in vars {
        let (lo, hi) = (v.lower, v.upper);
        let _ = if lo == hi {
            writeln!(out, " {} = {}", v.name, fmt_num(lo))
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            writeln!(out, " {} free", v.name)
        } else if hi == f64::INFINITY {
            writeln!(out, " {} >= {}", v.name, fmt_num(lo))
        } else {
            writeln!(out, " {} <= {} <= {}", fmt_num(lo), v.name, fmt_num(hi))
        };
    }
    out.push_str("Binary\n");
    for v in vars.iter().filter(|v| v.kind == VarKind::Binary) {
        let _ = writeln!(out, " {}", v.name);
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Cmp(Sense),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binary,
    End,
}

fn section_header(line: &str) -> Option<Section> {
    let lower = line.trim().to_ascii_lowercase();
    let compact: String = lower.split_whitespace().collect::<Vec<_>>().join(" ");
    match compact.as_str() {
        "minimize" | "minimise" | "minimum" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, column, message: message.into() }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || "_!\"#$%&()/,;?@'`{}|~".contains(c)
}

fn is_ident_char(c: char) -> bool {
    is_ident_start(c) || c.is_ascii_digit() || c == '.' || c == '[' || c == ']'
}

fn tokenize_line(text: &str, line: usize, out: &mut Vec<Token>) -> Result<(), ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, column });
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '+' => {
                push(out, Tok::Plus);
                i += 1;
            }
            '-' => {
                push(out, Tok::Minus);
                i += 1;
            }
            ':' => {
                push(out, Tok::Colon);
                i += 1;
            }
            '<' | '>' | '=' => {
                let mut sense = match c {
                    '<' => Sense::Le,
                    '>' => Sense::Ge,
                    _ => Sense::Eq,
                };
                i += 1;
                if i < chars.len() && (chars[i] == '=' || chars[i] == '<' || chars[i] == '>') {
                    if c == '=' {
                        sense = match chars[i] {
                            '<' => Sense::Le,
                            '>' => Sense::Ge,
                            _ => Sense::Eq,
                        };
                    }
                    i += 1;
                }
                push(out, Tok::Cmp(sense));
            }
            d if d.is_ascii_digit() || d == '.' => {
                let start = i;
                while i < chars.len() {
                    let ch = chars[i];
                    let exp_sign = (ch == '+' || ch == '-') && matches!(chars[i - 1], 'e' | 'E');
                    if ch.is_ascii_digit() || ch == '.' || ch == 'e' || ch == 'E' || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s.parse().map_err(|_| err(line, column, format!("bad number `{s}`")))?;
                push(out, Tok::Num(v));
            }
            c if is_ident_start(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let lower = s.to_ascii_lowercase();
                if lower == "inf" || lower == "infinity" {
                    push(out, Tok::Num(f64::INFINITY));
                } else {
                    push(out, Tok::Ident(s));
                }
            }
            other => return Err(err(line, column, format!("unexpected character `{other}`"))),
        }
    }
    Ok(())
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    eof: (usize, usize),
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + k)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.column)).unwrap_or(self.eof)
    }

    fn fail(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        err(line, column, message)
    }

    /// `name :` prefix, if present.
    fn label(&mut self) -> Option<String> {
        if let (Some(Token { tok: Tok::Ident(name), .. }), Some(Token { tok: Tok::Colon, .. })) =
            (self.peek(), self.peek_at(1))
        {
            self.pos += 2;
            Some(name.clone())
        } else {
            None
        }
    }

    /// Linear expression up to a comparison or the end of input. Bare
    /// constants must be zero.
    fn expression(&mut self) -> Result<Vec<(String, f64)>, ParseError> {
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let mut sign = 1.0;
            let mut saw_sign = false;
            while let Some(Token { tok: Tok::Plus | Tok::Minus, .. }) = self.peek() {
                if let Some(Token { tok: Tok::Minus, .. }) = self.next() {
                    sign = -sign;
                }
                saw_sign = true;
            }
            match self.peek().map(|t| &t.tok) {
                None | Some(Tok::Cmp(_)) if !saw_sign => return Ok(terms),
                _ if !first && !saw_sign => return Err(self.fail("expected `+` or `-` between terms")),
                _ => {}
            }
            let mut coef = 1.0;
            if let Some(Token { tok: Tok::Num(v), .. }) = self.peek() {
                coef = *v;
                self.pos += 1;
            }
            match self.peek() {
                Some(Token { tok: Tok::Ident(name), .. }) => {
                    self.pos += 1;
                    terms.push((name.clone(), sign * coef));
                }
                _ if coef == 0.0 => {}
                _ => return Err(self.fail("constant terms are not supported")),
            }
            first = false;
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let mut sign = 1.0;
        while let Some(Token { tok: Tok::Plus | Tok::Minus, .. }) = self.peek() {
            if let Some(Token { tok: Tok::Minus, .. }) = self.next() {
                sign = -sign;
            }
        }
        match self.next() {
            Some(Token { tok: Tok::Num(v), .. }) => Ok(sign * v),
            _ => {
                self.pos -= 1;
                Err(self.fail("expected a number"))
            }
        }
    }
}

#[derive(Default)]
struct Draft {
    order: Vec<String>,
    known: BTreeMap<String, usize>,
    bounds: BTreeMap<String, (f64, f64)>,
    binary: BTreeMap<String, ()>,
}

impl Draft {
    fn touch(&mut self, name: &str) {
        if !self.known.contains_key(name) {
            self.known.insert(name.to_string(), self.order.len());
            self.order.push(name.to_string());
        }
    }
}

/// Parses LP text produced by [`export_lp`] (and simple hand-written files in
/// the same subset) back into a model.
pub fn parse_lp(text: &str) -> Result<MilpModel, ParseError> {
    let mut section = Section::Preamble;
    let mut per_section: BTreeMap<u8, Vec<Token>> = BTreeMap::new();
    let mut bound_lines: Vec<Vec<Token>> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('\\').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        if let Some(next) = section_header(content) {
            if section == Section::End {
                return Err(err(line, 1, "content after End"));
            }
            section = next;
            continue;
        }
        let mut toks = Vec::new();
        tokenize_line(content, line, &mut toks)?;
        match section {
            Section::Preamble => return Err(err(line, 1, "expected `Minimize`")),
            Section::End => return Err(err(line, 1, "content after End")),
            Section::Bounds => bound_lines.push(toks),
            s => per_section.entry(s as u8).or_default().extend(toks),
        }
    }
    if section != Section::End {
        return Err(err(last_line + 1, 1, "missing `End`"));
    }
    let eof = (last_line, 1);
    let mut draft = Draft::default();

    // Bounds first so declaration order follows the Bounds listing.
    for toks in &bound_lines {
        let mut cur = Cursor { toks, pos: 0, eof };
        let (name, lo, hi) = parse_bound(&mut cur)?;
        if cur.peek().is_some() {
            return Err(cur.fail("unexpected token after bound"));
        }
        draft.touch(&name);
        let entry = draft.bounds.entry(name).or_insert((0.0, f64::INFINITY));
        if let Some(lo) = lo {
            entry.0 = lo;
        }
        if let Some(hi) = hi {
            entry.1 = hi;
        }
    }

    let empty = Vec::new();
    let objective_toks = per_section.get(&(Section::Objective as u8)).unwrap_or(&empty);
    let mut cur = Cursor { toks: objective_toks, pos: 0, eof };
    cur.label();
    let objective = cur.expression()?;
    if cur.peek().is_some() {
        return Err(cur.fail("unexpected token in objective"));
    }
    for (name, _) in &objective {
        draft.touch(name);
    }

    let con_toks = per_section.get(&(Section::Constraints as u8)).unwrap_or(&empty);
    let mut cur = Cursor { toks: con_toks, pos: 0, eof };
    let mut rows = Vec::new();
    while cur.peek().is_some() {
        let (line, column) = cur.here();
        let name = cur.label().unwrap_or_else(|| format!("R{}", rows.len() + 1));
        let terms = cur.expression()?;
        let sense = match cur.next() {
            Some(Token { tok: Tok::Cmp(s), .. }) => *s,
            _ => {
                cur.pos -= 1;
                return Err(cur.fail("expected a comparison operator"));
            }
        };
        let rhs = cur.number()?;
        for (n, _) in &terms {
            draft.touch(n);
        }
        rows.push((name, terms, sense, rhs, line, column));
    }

    let bin_toks = per_section.get(&(Section::Binary as u8)).unwrap_or(&empty);
    for t in bin_toks {
        match &t.tok {
            Tok::Ident(name) => {
                draft.touch(name);
                draft.binary.insert(name.clone(), ());
            }
            _ => return Err(err(t.line, t.column, "expected a variable name")),
        }
    }

    let mut model = MilpModel::new();
    let mut obj: BTreeMap<&str, f64> = BTreeMap::new();
    for (name, c) in &objective {
        *obj.entry(name.as_str()).or_insert(0.0) += c;
    }
    for name in &draft.order {
        let binary = draft.binary.contains_key(name);
        let default = if binary { (0.0, 1.0) } else { (0.0, f64::INFINITY) };
        let (lo, hi) = draft.bounds.get(name).copied().unwrap_or(default);
        let kind = if binary { VarKind::Binary } else { VarKind::Continuous };
        let c = obj.get(name.as_str()).copied().unwrap_or(0.0);
        model.add_variable(name.clone(), kind, lo, hi, c).map_err(|e| err(eof.0, 1, e.to_string()))?;
    }
    for (name, terms, sense, rhs, line, column) in rows {
        let terms: Vec<(VarId, f64)> = terms.iter().map(|(n, c)| (VarId(draft.known[n.as_str()]), *c)).collect();
        model.add_constraint(name, terms, sense, rhs).map_err(|e| err(line, column, e.to_string()))?;
    }
    Ok(model)
}

/// One bound line: `name` with optional new lower and upper bounds.
fn parse_bound(cur: &mut Cursor<'_>) -> Result<(String, Option<f64>, Option<f64>), ParseError> {
    let ident = |cur: &mut Cursor<'_>| match cur.next() {
        Some(Token { tok: Tok::Ident(n), .. }) => Ok(n.clone()),
        _ => {
            cur.pos -= 1;
            Err(cur.fail("expected a variable name"))
        }
    };
    match cur.peek().map(|t| &t.tok) {
        Some(Tok::Ident(_)) => {
            let name = ident(cur)?;
            match cur.next().map(|t| &t.tok) {
                Some(Tok::Ident(w)) if w.eq_ignore_ascii_case("free") => {
                    Ok((name, Some(f64::NEG_INFINITY), Some(f64::INFINITY)))
                }
                Some(Tok::Cmp(Sense::Ge)) => Ok((name, Some(cur.number()?), None)),
                Some(Tok::Cmp(Sense::Le)) => Ok((name, None, Some(cur.number()?))),
                Some(Tok::Cmp(Sense::Eq)) => {
                    let v = cur.number()?;
                    Ok((name, Some(v), Some(v)))
                }
                _ => {
                    cur.pos -= 1;
                    Err(cur.fail("expected a bound"))
                }
            }
        }
        _ => {
            let lo = cur.number()?;
            match cur.next().map(|t| &t.tok) {
                Some(Tok::Cmp(Sense::Le)) => {}
                _ => {
                    cur.pos -= 1;
                    return Err(cur.fail("expected `<=`"));
                }
            }
            let name = ident(cur)?;
            if cur.peek().is_none() {
                return Ok((name, Some(lo), None));
            }
            match cur.next().map(|t| &t.tok) {
                Some(Tok::Cmp(Sense::Le)) => Ok((name, Some(lo), Some(cur.number()?))),
                _ => {
                    cur.pos -= 1;
                    Err(cur.fail("expected `<=`"))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_model_round_trips() {
        let m = MilpModel::new();
        let text = export_lp(&m);
        assert!(text.contains("Minimize") && text.contains("Subject To") && text.contains("End"));
        assert_eq!(parse_lp(&text).unwrap(), m);
    }

    #[test]
    fn simple_row_exports_verbatim() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY, 1.0).unwrap();
        let y = m.add_binary("y", 0.5).unwrap();
        m.add_constraint("c1", [(x, 1.0), (y, 2.0)], Sense::Le, 3.0).unwrap();
        let text = export_lp(&m);
        assert!(text.contains(" c1: x + 2 y <= 3\n"), "{text}");
        assert!(text.contains(" obj: x + 5.0000000000000000e-1 y\n"), "{text}");
        assert_eq!(parse_lp(&text).unwrap(), m);
    }

    #[test]
    fn parses_hand_written_text() {
        let text =
            "Minimize\n obj: 2 a - b\nSubject To\n r: a + b >= 1\n -a +\n b <= 4\nBounds\n b <= 10\nBinary\n a\nEnd\n";
        let m = parse_lp(text).unwrap();
        assert_eq!(m.num_variables(), 2);
        assert_eq!(m.variables()[0].name, "b");
        assert_eq!(m.variables()[1].kind, VarKind::Binary);
        assert_eq!(m.constraints()[1].name, "R2");
        assert_eq!(m.constraints()[1].sense, Sense::Le);
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse_lp("Minimize\n obj: x\nSubject To\n c: x + <= 3\nEnd\n").unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse_lp("Minimize\n obj: x\nSubject To\n c: x 3\nEnd\n").unwrap_err();
        assert_eq!((e.line, e.column), (4, 7));
        assert!(parse_lp("Minimize\n obj: x\n").unwrap_err().message.contains("End"));
        assert!(parse_lp("Minimize\n obj: x \\ trailing comment\nEnd\n").is_ok());
        assert!(parse_lp("Minimize\n obj: x ^\nEnd\n").is_err());
    }

    #[test]
    fn empty_rows_survive() {
        let mut m = MilpModel::new();
        m.add_binary("z", 0.0).unwrap();
        m.add_constraint("empty", [], Sense::Le, 1.0).unwrap();
        let text = export_lp(&m);
        assert!(text.contains(" empty: 0 z <= 1"));
        assert_eq!(parse_lp(&text).unwrap(), m);
    }

    fn arb_model() -> impl Strategy<Value = MilpModel> {
        let var = (
            any::<bool>(),
            -1e6f64..1e6,
            prop_oneof![Just(0.0), -5.0f64..5.0, Just(f64::NEG_INFINITY)],
            prop_oneof![Just(5.0), 5.0f64..10.0, Just(f64::INFINITY)],
        );
        let row = (proptest::collection::vec((0usize..6, -100.0f64..100.0), 0..6), 0u8..3, -1e3f64..1e3);
        (proptest::collection::vec(var, 1..6), proptest::collection::vec(row, 0..5)).prop_map(|(vars, rows)| {
            let mut m = MilpModel::new();
            let n = vars.len();
            for (i, (bin, obj, lo, hi)) in vars.into_iter().enumerate() {
                if bin {
                    m.add_binary(format!("b{i}"), obj).unwrap();
                } else {
                    m.add_continuous(format!("c{i}"), lo, hi, obj).unwrap();
                }
            }
            for (r, (terms, sense, rhs)) in rows.into_iter().enumerate() {
                let sense = [Sense::Le, Sense::Eq, Sense::Ge][sense as usize];
                let terms = terms.into_iter().map(|(v, c)| (VarId(v % n), c));
                m.add_constraint(format!("r{r}"), terms, sense, rhs).unwrap();
            }
            m
        })
    }

    proptest! {
        #[test]
        fn export_parse_round_trip(m in arb_model()) {
            let text = export_lp(&m);
            prop_assert_eq!(parse_lp(&text).unwrap(), m);
        }
    }
}
