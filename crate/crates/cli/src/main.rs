use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use bdcsp::classify::{class_flags, trichotomy, TrichotomyTag};
use bdcsp::counting::{count_csp_with_budget, count_his_with_budget, DEFAULT_BUDGET};
use bdcsp::formats::{parse_csp, parse_hg, parse_rel, write_csp, write_hg};
use bdcsp::gadgets::{synthesize_equality, verify_simulation};
use bdcsp::reductions::{csp_to_his, expand_degree, his_to_csp, ReductionReceipt};
use bdcsp::report::classify_language;
use bdcsp::{ConstraintLanguage, CspInstance, Hypergraph};

#[derive(Parser)]
#[command(name = "bdcsp", version, about = "Bounded-degree Boolean #CSP toolkit")]
struct Cli {
    /// Seed for randomized generation; echoed in JSON output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest connected component the exact counter will enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Class flags, normalized formula, width and trichotomy tag per relation.
    Classify { lang: PathBuf },
    /// Build and verify an Eq_k gadget over a language.
    Gadget {
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        /// Write the gadget instance here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Check that an instance d-simulates equality on the given terminals.
    Verify {
        #[arg(long)]
        csp: PathBuf,
        #[arg(long)]
        lang: PathBuf,
        /// 1-based, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        terminals: Vec<usize>,
        #[arg(long)]
        d: usize,
    },
    /// Exact number of solutions or independent sets.
    Count(CountArgs),
    #[command(subcommand)]
    Reduce(Reduce),
    /// Complexity verdict for a language under a degree bound.
    Report {
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        d: usize,
    },
}

#[derive(Args)]
struct CountArgs {
    #[arg(long, conflicts_with = "hg", requires = "lang")]
    csp: Option<PathBuf>,
    #[arg(long)]
    lang: Option<PathBuf>,
    #[arg(long, required_unless_present = "csp")]
    hg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Reduce {
    /// OR-conj/NAND-conj instance to hypergraph.
    Csp2his {
        #[arg(long)]
        csp: PathBuf,
        #[arg(long)]
        lang: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Hypergraph to an instance over one OR-conj/NAND-conj relation.
    His2csp {
        #[arg(long)]
        hg: PathBuf,
        /// Relation to build the instance from.
        #[arg(long)]
        rel: String,
        #[arg(long)]
        lang: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Bring an instance down to degree d with equality gadgets.
    Expand {
        #[arg(long)]
        csp: PathBuf,
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_lang(path: &Path) -> Result<ConstraintLanguage> {
    parse_rel(&read(path)?).with_context(|| path.display().to_string())
}

fn load_csp(path: &Path, lang: &ConstraintLanguage) -> Result<CspInstance> {
    let inst = parse_csp(&read(path)?).with_context(|| path.display().to_string())?;
    inst.validate(lang)
        .with_context(|| path.display().to_string())?;
    Ok(inst)
}

fn load_hg(path: &Path) -> Result<Hypergraph> {
    parse_hg(&read(path)?).with_context(|| path.display().to_string())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn print_json(seed: u64, value: impl Serialize) -> Result<()> {
    let mut v = serde_json::to_value(value)?;
    if let Some(obj) = v.as_object_mut() {
        obj.insert("seed".into(), json!(seed));
    }
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let json = cli.format == Format::Json;
    match cli.command {
        Command::Classify { lang } => {
            let lang = load_lang(&lang)?;
            let mut rows = Vec::new();
            let mut failed = Vec::new();
            for (name, rel) in lang.iter() {
                let flags = class_flags(rel);
                let (tag, width, formula, mechanism) = match trichotomy(rel) {
                    Ok(out) => match &out.tag {
                        TrichotomyTag::SimulatesEquality(cert) => {
                            (out.tag.name(), None, None, Some(cert.mechanism.to_string()))
                        }
                        t => {
                            let f = t.formula().expect("conj tags carry a formula");
                            (t.name(), Some(f.width()), Some(f.to_string()), None)
                        }
                    },
                    Err(e) => {
                        failed.push(format!("{name}: {e}"));
                        ("unresolved", None, None, None)
                    }
                };
                let mut names = Vec::new();
                for (on, n) in [
                    (flags.affine, "affine"),
                    (flags.im_conj, "im-conj"),
                    (flags.pseudo_monotone, "pseudo-monotone"),
                    (flags.pseudo_antitone, "pseudo-antitone"),
                ] {
                    if on {
                        names.push(n);
                    }
                }
                if json {
                    rows.push(json!({
                        "name": name,
                        "tag": tag,
                        "width": width,
                        "flags": flags,
                        "formula": formula,
                        "mechanism": mechanism,
                    }));
                } else {
                    println!(
                        "{name}\t{tag}\t{}\t{}\t{}",
                        width.map_or("-".into(), |w| w.to_string()),
                        if names.is_empty() {
                            "-".into()
                        } else {
                            names.join(",")
                        },
                        formula.or(mechanism).unwrap_or_else(|| "-".into()),
                    );
                }
            }
            if json {
                print_json(cli.seed, json!({ "schema": 1, "relations": rows }))?;
            }
            if !failed.is_empty() {
                bail!("no certificate for {}", failed.join("; "));
            }
        }
        Command::Gadget { lang, k, d, emit } => {
            let lang = load_lang(&lang)?;
            let cert = synthesize_equality(&lang, k, d)?;
            if let Some(path) = &emit {
                write(path, &write_csp(&cert.instance))?;
            }
            if json {
                print_json(cli.seed, &cert)?;
            } else {
                println!("mechanism\t{}", cert.mechanism);
                println!("m\t{}", cert.m);
                println!("variables\t{}", cert.instance.variable_count());
                println!("constraints\t{}", cert.instance.constraints().len());
                let terminals: Vec<String> =
                    cert.terminals.iter().map(|t| (t + 1).to_string()).collect();
                println!("terminals\t{}", terminals.join(","));
                for line in &cert.transcript {
                    println!("# {line}");
                }
            }
        }
        Command::Verify {
            csp,
            lang,
            terminals,
            d,
        } => {
            let lang = load_lang(&lang)?;
            let inst = load_csp(&csp, &lang)?;
            if terminals.contains(&0) {
                bail!("terminals are 1-based");
            }
            let terminals: Vec<usize> = terminals.iter().map(|t| t - 1).collect();
            let m = verify_simulation(&inst, &lang, &terminals, d)?;
            if json {
                print_json(cli.seed, json!({ "schema": 1, "m": m.to_string(), "d": d }))?;
            } else {
                println!("m\t{m}");
            }
        }
        Command::Count(args) => {
            let result = match (&args.csp, &args.hg) {
                (Some(csp), _) => {
                    let lang = load_lang(args.lang.as_deref().expect("clap enforces --lang"))?;
                    let inst = load_csp(csp, &lang)?;
                    count_csp_with_budget(&inst, &lang, cli.budget)?
                }
                (None, Some(hg)) => count_his_with_budget(&load_hg(hg)?, cli.budget)?,
                (None, None) => unreachable!("clap requires --csp or --hg"),
            };
            if json {
                print_json(
                    cli.seed,
                    json!({ "schema": 1, "count": result.value.to_string() }),
                )?;
            } else {
                println!("{}", result.value);
            }
        }
        Command::Reduce(r) => {
            let receipt = match r {
                Reduce::Csp2his { csp, lang, output } => {
                    let lang = load_lang(&lang)?;
                    let receipt = csp_to_his(&load_csp(&csp, &lang)?, &lang)?;
                    write(
                        &output,
                        &write_hg(receipt.hypergraph().expect("hypergraph output")),
                    )?;
                    receipt
                }
                Reduce::His2csp {
                    hg,
                    rel,
                    lang,
                    output,
                } => {
                    let lang = load_lang(&lang)?;
                    let relation = lang
                        .get(&rel)
                        .with_context(|| format!("relation `{rel}` is not in the language"))?;
                    let receipt = his_to_csp(&load_hg(&hg)?, &rel, relation)?;
                    write(
                        &output,
                        &write_csp(receipt.csp().expect("instance output").0),
                    )?;
                    receipt
                }
                Reduce::Expand {
                    csp,
                    lang,
                    d,
                    output,
                } => {
                    let lang = load_lang(&lang)?;
                    let receipt = expand_degree(&load_csp(&csp, &lang)?, &lang, d)?;
                    write(
                        &output,
                        &write_csp(receipt.csp().expect("instance output").0),
                    )?;
                    receipt
                }
            };
            print_receipt(&receipt, json, cli.seed)?;
        }
        Command::Report { lang, d } => {
            let lang = load_lang(&lang)?;
            let report = classify_language(&lang, d)?;
            if json {
                print_json(cli.seed, &report)?;
            } else {
                println!("verdict\t{}", report.verdict);
                for r in &report.relations {
                    println!(
                        "relation\t{}\t{}\t{}",
                        r.name,
                        r.tag,
                        r.formula.as_deref().unwrap_or("-")
                    );
                }
                if let Some((lo, hi)) = &report.his_status {
                    println!("his-status\tlower\t{lo}");
                    println!("his-status\tupper\t{hi}");
                }
                if let Some(c) = &report.certificate_summary {
                    println!(
                        "certificate\t{} k={} m={} variables={} constraints={}",
                        c.mechanism, c.k, c.m, c.variables, c.constraints
                    );
                }
                if report.witness_missing {
                    println!("certificate\tmissing");
                }
                for c in &report.citations {
                    println!("cite\t{}\t{}", c.anchor, c.statement);
                }
                for n in &report.notes {
                    println!("note\t{n}");
                }
            }
        }
    }
    Ok(())
}

fn print_receipt(receipt: &ReductionReceipt, json: bool, seed: u64) -> Result<()> {
    if json {
        return print_json(
            seed,
            json!({
                "schema": 1,
                "multiplier": receipt.multiplier.to_string(),
                "annihilated": receipt.annihilated,
                "direction": receipt.direction,
                "bounds": receipt.bounds,
                "provenance": receipt.provenance,
            }),
        );
    }
    println!("M\t{}", receipt.multiplier);
    println!("annihilated\t{}", receipt.annihilated);
    for b in &receipt.bounds {
        println!("bound\t{b}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
