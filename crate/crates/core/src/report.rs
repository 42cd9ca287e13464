//! Complexity verdicts for a constraint language under a degree bound.

use std::fmt;

use serde::Serialize;

use crate::classify::{class_flags, normalized_formula, ClassFlags, Flavor, NormalizedFormula};
use crate::error::{Error, Result};
use crate::gadgets::{synthesize_equality, GadgetCertificate};
use crate::language::ConstraintLanguage;

pub const SCHEMA_VERSION: u32 = 1;

/// Degree bound from which approximation is hard outside affine and
/// IM-conj languages.
pub const NO_FPRAS_DEGREE: usize = 25;

/// Bundled reference table: anchor and the claim it stands for.
pub const REFERENCES: &[(&str, &str)] = &[
    (
        "degree-one",
        "Every constraint language is tractable on instances of degree 1: each variable sits in at most one constraint, so the count factorizes.",
    ),
    (
        "bounded/affine",
        "For d >= 3, affine languages (with pins) are counted exactly in polynomial time.",
    ),
    (
        "bounded/im-conj",
        "For d >= 3, a non-affine language inside IM-conj is AP-interreducible with #BIS.",
    ),
    (
        "bounded/his",
        "For d >= 3, a language inside OR-conj or inside NAND-conj sits between #w-HIS of degree d and #w-HIS of degree kd, with w the largest width and k the largest occurrence count of a normalized formula.",
    ),
    (
        "bounded/sat",
        "For d >= 3, every other language 3-simulates equality and is AP-interreducible with #SAT.",
    ),
    (
        "degree-25",
        "From degree 25 upwards, languages that are neither affine nor inside IM-conj have no FPRAS unless NP = RP.",
    ),
    (
        "degree-two/open",
        "Degree 2 is not classified: 3-simulation of equality does not carry over to 2-simulation.",
    ),
    (
        "degree-two/sat-fpras",
        "Degree-2 #SAT has an FPRAS even though exact counting is #P-complete.",
    ),
    (
        "pins-invariance",
        "Adding the pin relations does not change whether a language is affine, OR-conj or NAND-conj.",
    ),
];

pub fn reference(anchor: &str) -> Option<&'static str> {
    REFERENCES
        .iter()
        .find(|(a, _)| *a == anchor)
        .map(|(_, s)| *s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Citation {
    pub anchor: &'static str,
    pub statement: &'static str,
}

fn cite(anchor: &'static str) -> Citation {
    Citation {
        anchor,
        statement: reference(anchor).expect("anchor is in the reference table"),
    }
}

/// Inclusive range with an optional upper end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Range {
    pub low: usize,
    pub high: Option<usize>,
}

impl Range {
    const fn new(low: usize, high: Option<usize>) -> Self {
        Range { low, high }
    }

    pub fn contains(&self, x: usize) -> bool {
        x >= self.low && self.high.is_none_or(|h| x <= h)
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.high {
            None => write!(f, "≥ {}", self.low),
            Some(h) if h == self.low => write!(f, "{h}"),
            Some(h) if h - self.low <= 2 => {
                let parts: Vec<String> = (self.low..=h).map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
            Some(h) => write!(f, "{},...,{}", self.low, h),
        }
    }
}

/// One row of the known approximability of `#w-HIS_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HisStatusRow {
    pub degree: Range,
    pub width: Range,
    pub status: &'static str,
    pub source: &'static str,
}

impl fmt::Display for HisStatusRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {} / {}", self.degree, self.width, self.status)
    }
}

pub const HIS_TABLE: [HisStatusRow; 7] = [
    HisStatusRow {
        degree: Range::new(1, Some(1)),
        width: Range::new(2, None),
        status: "FP",
        source: "degree one",
    },
    HisStatusRow {
        degree: Range::new(2, Some(2)),
        width: Range::new(2, Some(2)),
        status: "FP",
        source: "graphs of degree two",
    },
    HisStatusRow {
        degree: Range::new(2, Some(2)),
        width: Range::new(3, None),
        status: "FPRAS",
        source: "Dyer-Greenhill",
    },
    HisStatusRow {
        degree: Range::new(3, Some(3)),
        width: Range::new(2, Some(3)),
        status: "FPRAS",
        source: "Dyer-Greenhill",
    },
    HisStatusRow {
        degree: Range::new(3, Some(5)),
        width: Range::new(2, Some(2)),
        status: "PTAS",
        source: "Weitz",
    },
    HisStatusRow {
        degree: Range::new(6, Some(24)),
        width: Range::new(2, None),
        status: "The MCMC method is likely to fail",
        source: "Dyer-Frieze-Jerrum",
    },
    HisStatusRow {
        degree: Range::new(25, None),
        width: Range::new(2, None),
        status: "No FPRAS unless NP=RP",
        source: "Dyer-Frieze-Jerrum",
    },
];

/// The first table row covering `(w, d)`, or an explicit open row.
pub fn his_status(w: usize, d: usize) -> HisStatusRow {
    HIS_TABLE
        .iter()
        .find(|row| row.degree.contains(d) && row.width.contains(w))
        .copied()
        .unwrap_or(HisStatusRow {
            degree: Range::new(d, Some(d)),
            width: Range::new(w, Some(w)),
            status: "open",
            source: "none",
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    TrivialFp,
    OpenD2,
    FpAffine,
    BisEquivalent,
    HisSandwich {
        w: usize,
        k: usize,
        lower_degree: usize,
        upper_degree: usize,
    },
    SatEquivalent {
        no_fpras: bool,
    },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::TrivialFp => "Trivial_FP",
            Verdict::OpenD2 => "Open_d2",
            Verdict::FpAffine => "FP_affine",
            Verdict::BisEquivalent => "BIS_equivalent",
            Verdict::HisSandwich { .. } => "HIS_sandwich",
            Verdict::SatEquivalent { .. } => "SAT_equivalent",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::TrivialFp => f.write_str("FP (degree 1 is trivial)"),
            Verdict::OpenD2 => f.write_str("open (degree 2)"),
            Verdict::FpAffine => f.write_str("FP (affine)"),
            Verdict::BisEquivalent => f.write_str("BIS-equivalent"),
            Verdict::HisSandwich {
                w,
                k,
                lower_degree,
                upper_degree,
            } => write!(
                f,
                "HIS-sandwich: #{w}-HIS_{lower_degree} <= #CSP <= #{w}-HIS_{upper_degree} (w = {w}, k = {k})"
            ),
            Verdict::SatEquivalent { no_fpras } => {
                f.write_str("SAT-equivalent")?;
                if *no_fpras {
                    f.write_str(" (no FPRAS unless NP=RP)")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationSummary {
    pub name: String,
    pub arity: usize,
    /// `OR-conj`, `NAND-conj` or `simulates-equality`.
    pub tag: &'static str,
    pub width: Option<usize>,
    pub max_occurrences: Option<usize>,
    pub formula: Option<String>,
    pub flags: ClassFlags,
}

fn summarize(
    name: &str,
    rel: &crate::relation::BooleanRelation,
) -> (
    RelationSummary,
    Option<NormalizedFormula>,
    Option<NormalizedFormula>,
) {
    let or = normalized_formula(rel, Flavor::OrConj);
    let nand = normalized_formula(rel, Flavor::NandConj);
    let (tag, chosen) = match (&or, &nand) {
        (Some(f), _) => ("OR-conj", Some(f)),
        (None, Some(f)) => ("NAND-conj", Some(f)),
        (None, None) => ("simulates-equality", None),
    };
    let summary = RelationSummary {
        name: name.to_string(),
        arity: rel.arity(),
        tag,
        width: chosen.map(NormalizedFormula::width),
        max_occurrences: chosen.map(NormalizedFormula::max_occurrences),
        formula: chosen.map(|f| f.to_string()),
        flags: class_flags(rel),
    };
    (summary, or, nand)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub mechanism: String,
    pub k: usize,
    pub m: String,
    pub variables: usize,
    pub constraints: usize,
}

impl From<&GadgetCertificate> for CertificateSummary {
    fn from(c: &GadgetCertificate) -> Self {
        CertificateSummary {
            mechanism: c.mechanism.to_string(),
            k: c.k,
            m: c.m.to_string(),
            variables: c.instance.variable_count(),
            constraints: c.instance.constraints().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub schema: u32,
    pub degree_bound: usize,
    pub relations: Vec<RelationSummary>,
    pub verdict: Verdict,
    pub citations: Vec<Citation>,
    pub notes: Vec<String>,
    /// Table rows for the lower and upper end of a HIS sandwich.
    pub his_status: Option<(HisStatusRow, HisStatusRow)>,
    #[serde(skip)]
    pub certificate: Option<GadgetCertificate>,
    #[serde(rename = "certificate")]
    pub certificate_summary: Option<CertificateSummary>,
    /// The SAT case was reached but no equality gadget could be built.
    pub witness_missing: bool,
}

/// Ordered case analysis on `(language, d)`; pins are implicitly available.
pub fn classify_language(language: &ConstraintLanguage, d: usize) -> Result<ComplexityReport> {
    if d == 0 {
        return Err(Error::DegreeTooSmall(0));
    }
    let mut relations = Vec::with_capacity(language.len());
    let mut or_formulas = Vec::new();
    let mut nand_formulas = Vec::new();
    let mut all_or = true;
    let mut all_nand = true;
    for (name, rel) in language.iter() {
        let (summary, or, nand) = summarize(name, rel);
        relations.push(summary);
        all_or &= or.is_some();
        all_nand &= nand.is_some();
        or_formulas.extend(or);
        nand_formulas.extend(nand);
    }

    let mut report = ComplexityReport {
        schema: SCHEMA_VERSION,
        degree_bound: d,
        relations,
        verdict: Verdict::TrivialFp,
        citations: Vec::new(),
        notes: Vec::new(),
        his_status: None,
        certificate: None,
        certificate_summary: None,
        witness_missing: false,
    };
    for name in language.degenerate() {
        report.notes.push(format!("{name} is nullary"));
    }

    if d == 1 {
        report.citations.push(cite("degree-one"));
        return Ok(report);
    }
    if d == 2 {
        report.verdict = Verdict::OpenD2;
        report.citations.push(cite("degree-two/open"));
        report.citations.push(cite("degree-two/sat-fpras"));
        report
            .notes
            .push("degree 2 is outside the classification; no verdict is claimed".into());
        return Ok(report);
    }

    if report.relations.iter().all(|r| r.flags.affine) {
        report.verdict = Verdict::FpAffine;
        report.citations.push(cite("bounded/affine"));
    } else if report.relations.iter().all(|r| r.flags.im_conj) {
        report.verdict = Verdict::BisEquivalent;
        report.citations.push(cite("bounded/im-conj"));
    } else if all_or || all_nand {
        let formulas = if all_or { &or_formulas } else { &nand_formulas };
        let w = formulas
            .iter()
            .map(NormalizedFormula::width)
            .max()
            .unwrap_or(0);
        let k = formulas
            .iter()
            .map(NormalizedFormula::max_occurrences)
            .max()
            .unwrap_or(0);
        report.verdict = Verdict::HisSandwich {
            w,
            k,
            lower_degree: d,
            upper_degree: k * d,
        };
        report.his_status = Some((his_status(w, d), his_status(w, k * d)));
        report.citations.push(cite("bounded/his"));
        report.notes.push(format!(
            "all relations are {}",
            if all_or {
                Flavor::OrConj
            } else {
                Flavor::NandConj
            }
        ));
    } else {
        let no_fpras = d >= NO_FPRAS_DEGREE;
        report.verdict = Verdict::SatEquivalent { no_fpras };
        report.citations.push(cite("bounded/sat"));
        if no_fpras {
            report.citations.push(cite("degree-25"));
        }
        match synthesize_equality(language, 2, d) {
            Ok(cert) => {
                report.certificate_summary = Some(CertificateSummary::from(&cert));
                report.certificate = Some(cert);
            }
            Err(e) => {
                report.witness_missing = true;
                report.notes.push(format!("no equality gadget: {e}"));
            }
        }
    }
    report.citations.push(cite("pins-invariance"));
    Ok(report)
}
