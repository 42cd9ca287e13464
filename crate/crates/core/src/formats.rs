//! Plain-text formats: `.rel` relation blocks, `.csp` instances and `.hg`
//! hypergraphs. Everything external is 1-based; parse errors carry the line
//! and column (both 1-based) of the offending token.
//!
//! ```text
//! # R_imp
//! relation imp 2
//! 00
//! 01
//! 11
//! ```
//!
//! ```text
//! p csp 3 2
//! imp 1 2
//! nand3 2 T 3
//! ```
//!
//! ```text
//! p hg 4 2
//! 1 2
//! 2 3 4
//! ```

use std::fmt::Write as _;

use crate::error::{ParseError, Result};
use crate::instance::{Constraint, CspInstance, Hypergraph, Term};
use crate::language::ConstraintLanguage;
use crate::relation::{BitTuple, BooleanRelation, MAX_ARITY};

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(before, _)| before)
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

fn number(line: usize, (col, tok): (usize, &str), what: &str) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| ParseError::new(line, col, format!("expected {what}, found `{tok}`")))
}

struct Block {
    name: String,
    arity: usize,
    line: usize,
    name_column: usize,
    tuples: Vec<BitTuple>,
}

fn close(lang: &mut ConstraintLanguage, block: Block) -> Result<()> {
    let rel = BooleanRelation::from_tuples(block.arity, block.tuples)?;
    if lang.get(&block.name).is_some() {
        return Err(ParseError::new(
            block.line,
            block.name_column,
            format!("relation `{}` defined twice", block.name),
        )
        .into());
    }
    lang.push(block.name, rel)
}

/// Parses one or more `relation <name> <arity>` blocks.
pub fn parse_rel(text: &str) -> Result<ConstraintLanguage> {
    let mut lang = ConstraintLanguage::new();
    let mut block: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            if let Some(b) = block.take() {
                close(&mut lang, b)?;
            }
            continue;
        }
        let toks = tokens(strip_comment(raw));
        if toks.is_empty() {
            continue;
        }
        if toks[0].1 == "relation" {
            if let Some(b) = block.take() {
                close(&mut lang, b)?;
            }
            if toks.len() != 3 {
                let col = toks
                    .get(3)
                    .map_or(raw.trim_end().chars().count() + 1, |t| t.0);
                return Err(
                    ParseError::new(line, col, "expected `relation <name> <arity>`").into(),
                );
            }
            let arity = number(line, toks[2], "an arity")?;
            if arity > MAX_ARITY {
                return Err(ParseError::new(
                    line,
                    toks[2].0,
                    format!("arity {arity} exceeds the maximum {MAX_ARITY}"),
                )
                .into());
            }
            block = Some(Block {
                name: toks[1].1.to_string(),
                arity,
                line,
                name_column: toks[1].0,
                tuples: Vec::new(),
            });
            continue;
        }
        let Some(b) = block.as_mut() else {
            return Err(
                ParseError::new(line, toks[0].0, "tuple outside a `relation` block").into(),
            );
        };
        if toks.len() > 1 {
            return Err(ParseError::new(line, toks[1].0, "one tuple per line").into());
        }
        let (col, tok) = toks[0];
        let tuple = if tok == "-" {
            BitTuple::new(0, 0)
        } else {
            let mut bits = Vec::with_capacity(tok.len());
            for (j, ch) in tok.chars().enumerate() {
                match ch {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    _ => {
                        return Err(ParseError::new(
                            line,
                            col + j,
                            format!("unexpected `{ch}` in tuple"),
                        )
                        .into())
                    }
                }
            }
            BitTuple::from_bits(&bits)?
        };
        if tuple.arity() != b.arity {
            return Err(ParseError::new(
                line,
                col,
                format!(
                    "tuple has length {}, relation `{}` has arity {}",
                    tuple.arity(),
                    b.name,
                    b.arity
                ),
            )
            .into());
        }
        b.tuples.push(tuple);
    }
    if let Some(b) = block.take() {
        close(&mut lang, b)?;
    }
    Ok(lang)
}

/// Canonical form: tuples in ascending order, blocks separated by blank
/// lines.
pub fn write_rel(lang: &ConstraintLanguage) -> String {
    let mut out = String::new();
    for (i, (name, rel)) in lang.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "relation {name} {}", rel.arity());
        for t in rel.members() {
            let _ = writeln!(out, "{t}");
        }
    }
    out
}

/// Meaningful lines with their numbers, comments removed.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<(usize, &str)>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, tokens(strip_comment(l))))
        .filter(|(_, t)| !t.is_empty())
}

fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, Vec<(usize, &'a str)>)>,
    kind: &str,
) -> Result<(usize, usize, usize), ParseError> {
    let Some((line, toks)) = lines.next() else {
        return Err(ParseError::new(1, 1, format!("missing `p {kind}` header")));
    };
    if toks.len() != 4 || toks[0].1 != "p" || toks[1].1 != kind {
        return Err(ParseError::new(
            line,
            toks[0].0,
            format!("expected `p {kind} <count> <count>`"),
        ));
    }
    Ok((
        line,
        number(line, toks[2], "a count")?,
        number(line, toks[3], "a count")?,
    ))
}

fn index(line: usize, tok: (usize, &str), count: usize) -> Result<usize, ParseError> {
    let v = number(line, tok, "a 1-based index")?;
    if v == 0 || v > count {
        return Err(ParseError::new(
            line,
            tok.0,
            format!("index {v} is outside 1..={count}"),
        ));
    }
    Ok(v - 1)
}

pub fn parse_csp(text: &str) -> Result<CspInstance> {
    let mut lines = content_lines(text);
    let (head, vars, expected) = header(&mut lines, "csp")?;
    let mut inst = CspInstance::new(vars);
    let mut last = head;
    for (line, toks) in lines {
        last = line;
        if inst.constraints().len() == expected {
            return Err(ParseError::new(
                line,
                toks[0].0,
                format!("more than {expected} constraints"),
            )
            .into());
        }
        let scope = toks[1..]
            .iter()
            .map(|&tok| match tok.1 {
                "T" => Ok(Term::Const(true)),
                "F" => Ok(Term::Const(false)),
                _ => index(line, tok, vars).map(Term::Var),
            })
            .collect::<Result<Vec<_>, _>>()?;
        inst.push(Constraint::new(toks[0].1, scope))?;
    }
    if inst.constraints().len() != expected {
        return Err(ParseError::new(
            last,
            1,
            format!(
                "header announces {expected} constraints, found {}",
                inst.constraints().len()
            ),
        )
        .into());
    }
    Ok(inst)
}

pub fn write_csp(inst: &CspInstance) -> String {
    let mut out = format!(
        "p csp {} {}\n",
        inst.variable_count(),
        inst.constraints().len()
    );
    for c in inst.constraints() {
        out.push_str(&c.relation);
        for t in &c.scope {
            match t {
                Term::Var(v) => {
                    let _ = write!(out, " {}", v + 1);
                }
                Term::Const(b) => out.push_str(if *b { " T" } else { " F" }),
            }
        }
        out.push('\n');
    }
    out
}

pub fn parse_hg(text: &str) -> Result<Hypergraph> {
    let mut lines = content_lines(text);
    let (head, vertices, expected) = header(&mut lines, "hg")?;
    let mut h = Hypergraph::new(vertices, Vec::new())?;
    let mut last = head;
    for (line, toks) in lines {
        last = line;
        if h.edges().len() == expected {
            return Err(ParseError::new(
                line,
                toks[0].0,
                format!("more than {expected} hyperedges"),
            )
            .into());
        }
        let edge = toks
            .iter()
            .map(|&tok| index(line, tok, vertices))
            .collect::<Result<Vec<_>, _>>()?;
        h.push_edge(edge)?;
    }
    if h.edges().len() != expected {
        return Err(ParseError::new(
            last,
            1,
            format!(
                "header announces {expected} hyperedges, found {}",
                h.edges().len()
            ),
        )
        .into());
    }
    Ok(h)
}

pub fn write_hg(h: &Hypergraph) -> String {
    let mut out = format!("p hg {} {}\n", h.vertex_count(), h.edges().len());
    for e in h.edges() {
        let line: Vec<String> = e.iter().map(|v| (v + 1).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
