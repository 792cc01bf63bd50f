//! Command-line surface: classification, comparison, condition checks,
//! closures, polymorphisms, the verification suite, lattice export, and
//! instance reduction. All subcommands print line-oriented text by default
//! and machine-readable JSON with `--json`.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use crate::clones::{catalog_entry, GeneratorSet};
use crate::conditions::{
    builtin, parse_condition, satisfies_structure, CloneSat, CloneSolver, H1Condition, StructSat,
    Witness,
};
use crate::poset::{
    classify_generators, classify_structure, complexity_of, export_dot, leq, separating_condition,
    Classification, PosetClass,
};
use crate::ppcon::{parse_certificate, stcon_to_b2, PpCertificate};
use crate::reduction::{random_instance, reduce_instance, solve_bruteforce, CspInstance};
use crate::structures::{canonical, Structure};
use crate::suite;

#[derive(Parser)]
#[command(
    name = "ppboole",
    about = "Boolean clones, height-1 conditions, and CSP classification"
)]
struct Cli {
    /// Emit machine-readable JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a structure or a generated clone in the lattice.
    Classify {
        /// Structure: a JSON file or a canonical name.
        #[arg(long, conflicts_with = "generators")]
        structure: Option<String>,
        /// Generators: comma-separated named operations or raw tables.
        #[arg(long)]
        generators: Option<String>,
        /// Highest quasi-near-unanimity arity probed for generator input.
        #[arg(long, default_value_t = 8)]
        chain_bound: usize,
    },
    /// Compare two inputs (structures or generator specs) in the order.
    Compare { a: String, b: String },
    /// Decide a height-1 condition against a structure or clone.
    Check {
        /// A builtin name (qnu:K, qj:N, hm:N, comm, const, qminor, qmajor)
        /// or a file holding condition syntax.
        #[arg(long)]
        condition: String,
        #[arg(long, conflicts_with = "generators")]
        structure: Option<String>,
        #[arg(long)]
        generators: Option<String>,
    },
    /// List the members of a generated clone at one arity.
    Closure {
        #[arg(long)]
        generators: String,
        #[arg(long)]
        arity: usize,
    },
    /// List the polymorphisms of a structure at one arity (at most 4).
    Polymorphisms {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        arity: usize,
    },
    /// Run the full verification suite and print a pass/fail ledger.
    VerifyPaper,
    /// Export the Hasse diagram truncated at a chain depth.
    ExportLattice {
        #[arg(long, default_value_t = 6)]
        chain_depth: usize,
        #[arg(long, default_value = "dot")]
        format: String,
    },
    /// Reduce a CSP instance along a pp-construction certificate.
    Reduce {
        /// Certificate file, or the builtin name `stcon_to_b2`.
        #[arg(long)]
        certificate: String,
        /// Instance JSON file.
        #[arg(long)]
        instance: String,
        /// Additionally validate equisatisfiability on N random instances.
        #[arg(long)]
        validate: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Parses argv and dispatches; returns the process exit code
/// (0 success, 1 verification failure, 2 usage or input error).
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

enum Input {
    Structure(Structure),
    Generators(GeneratorSet),
}

impl Input {
    fn describe(&self) -> String {
        match self {
            Input::Structure(a) => a.name().to_string(),
            Input::Generators(g) => g.render(),
        }
    }
}

fn resolve_input(spec: &str) -> Result<Input> {
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
        return Ok(Input::Structure(Structure::from_json(&text)?));
    }
    if let Some(entry) = catalog_entry(spec) {
        return Ok(Input::Generators(entry.generators));
    }
    if let Ok(a) = canonical(spec) {
        return Ok(Input::Structure(a));
    }
    Ok(Input::Generators(GeneratorSet::parse(spec)?))
}

fn load_structure(spec: &str) -> Result<Structure> {
    match resolve_input(spec)? {
        Input::Structure(a) => Ok(a),
        Input::Generators(_) => bail!("`{spec}` is not a structure file or canonical name"),
    }
}

fn load_condition(spec: &str) -> Result<H1Condition> {
    if let Ok(cond) = builtin(spec) {
        return Ok(cond);
    }
    if Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
        return Ok(parse_condition(&text)?);
    }
    Ok(parse_condition(spec)?)
}

fn load_certificate(spec: &str) -> Result<PpCertificate> {
    if spec == "stcon_to_b2" {
        return Ok(stcon_to_b2());
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading {spec}"))?;
    let name = Path::new(spec)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(spec);
    Ok(parse_certificate(name, &text)?)
}

fn classify_input(input: &Input, chain_bound: usize) -> Result<Classification> {
    Ok(match input {
        Input::Structure(a) => classify_structure(a)?,
        Input::Generators(g) => classify_generators(g, chain_bound)?,
    })
}

fn classification_json(c: &Classification) -> serde_json::Value {
    json!({
        "class": c.class.to_string(),
        "chain_index": c.class.chain_index(),
        "complexity": complexity_of(c.class),
        "chain_bound": c.chain_bound,
        "cutoff_bound": c.cutoff_bound,
        "battery": c.battery.iter().map(|cell| json!({
            "condition": cell.condition,
            "satisfied": cell.satisfied,
            "witness": cell.witness,
        })).collect::<Vec<_>>(),
    })
}

fn render_witness(w: &Witness) -> String {
    w.iter()
        .map(|(name, f)| format!("{name} = {f}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn witness_json(w: &Witness) -> serde_json::Value {
    w.iter()
        .map(|(name, f)| json!({"symbol": name, "table": f.to_string()}))
        .collect()
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Classify {
            structure,
            generators,
            chain_bound,
        } => {
            let input = pick_input(structure, generators)?;
            let c = classify_input(&input, *chain_bound)?;
            if cli.json {
                println!("{}", classification_json(&c));
            } else {
                print!("{}", c.report());
            }
            Ok(0)
        }
        Command::Compare { a, b } => {
            let (ia, ib) = (resolve_input(a)?, resolve_input(b)?);
            let (ca, cb) = (classify_input(&ia, 8)?, classify_input(&ib, 8)?);
            compare_report(cli.json, &ia, &ib, ca.class, cb.class)
        }
        Command::Check {
            condition,
            structure,
            generators,
        } => {
            let cond = load_condition(condition)?;
            let input = pick_input(structure, generators)?;
            check_report(cli.json, &input, &cond)
        }
        Command::Closure { generators, arity } => {
            let g = GeneratorSet::parse(generators)?;
            let slice = g.closure_at_arity(*arity);
            let members: Vec<String> = slice.iter().map(|f| f.to_string()).collect();
            if cli.json {
                println!("{}", json!({"arity": arity, "members": members}));
            } else {
                for m in &members {
                    println!("{m}");
                }
            }
            Ok(0)
        }
        Command::Polymorphisms { structure, arity } => {
            let a = load_structure(structure)?;
            let slice = a.polymorphisms_at_arity(*arity)?;
            let members: Vec<String> = slice.iter().map(|f| f.to_string()).collect();
            if cli.json {
                println!("{}", json!({"arity": arity, "members": members}));
            } else {
                for m in &members {
                    println!("{m}");
                }
            }
            Ok(0)
        }
        Command::VerifyPaper => {
            let results = suite::run_all();
            let failed = results.iter().filter(|r| !r.passed).count();
            if cli.json {
                let rows: Vec<_> = results
                    .iter()
                    .map(|r| {
                        json!({
                            "name": r.name,
                            "passed": r.passed,
                            "detail": r.detail,
                            "seconds": r.elapsed.as_secs_f64(),
                        })
                    })
                    .collect();
                println!("{}", json!({"checks": rows, "failed": failed}));
            } else {
                for r in &results {
                    let tag = if r.passed { "PASS" } else { "FAIL" };
                    println!("{tag} {} ({:.2?}): {}", r.name, r.elapsed, r.detail);
                }
                println!(
                    "{} checks, {} failed",
                    results.len(),
                    failed
                );
            }
            Ok(if failed == 0 { 0 } else { 1 })
        }
        Command::ExportLattice {
            chain_depth,
            format,
        } => {
            if format != "dot" {
                bail!("unsupported format `{format}`");
            }
            let dot = export_dot(*chain_depth);
            if cli.json {
                println!("{}", json!({"format": "dot", "chain_depth": chain_depth, "text": dot}));
            } else {
                print!("{dot}");
            }
            Ok(0)
        }
        Command::Reduce {
            certificate,
            instance,
            validate,
            seed,
        } => {
            let cert = load_certificate(certificate)?;
            let text = std::fs::read_to_string(instance)
                .with_context(|| format!("reading {instance}"))?;
            let inst = CspInstance::from_json(&text)?;
            let (reduced, map) = reduce_instance(&inst, &cert)?;
            if cli.json {
                println!(
                    "{}",
                    json!({"reduced": reduced, "variable_map": map})
                );
            } else {
                println!("{}", reduced.to_json());
                for (v, block) in map.iter().enumerate() {
                    println!("# variable {} -> {:?}", v + 1, block);
                }
            }
            if let Some(n) = validate {
                let failures = validate_reduction(&cert, *n, *seed)?;
                if failures > 0 {
                    eprintln!("{failures} of {n} validation instances disagreed");
                    return Ok(1);
                }
                eprintln!("{n} validation instances agreed");
            }
            Ok(0)
        }
    }
}

fn pick_input(structure: &Option<String>, generators: &Option<String>) -> Result<Input> {
    match (structure, generators) {
        (Some(s), None) => Ok(Input::Structure(load_structure(s)?)),
        (None, Some(g)) => {
            if let Some(entry) = catalog_entry(g) {
                Ok(Input::Generators(entry.generators))
            } else {
                Ok(Input::Generators(GeneratorSet::parse(g)?))
            }
        }
        _ => Err(anyhow!("pass exactly one of --structure or --generators")),
    }
}

fn compare_report(
    as_json: bool,
    ia: &Input,
    ib: &Input,
    ca: PosetClass,
    cb: PosetClass,
) -> Result<i32> {
    let below = leq(ca, cb);
    let above = leq(cb, ca);
    let relation = match (below, above) {
        (true, true) => "equivalent",
        (true, false) => "strictly below",
        (false, true) => "strictly above",
        (false, false) => "incomparable",
    };
    let mut witnesses: Vec<(String, String)> = Vec::new();
    if !above {
        let cond = separating_condition(cb, ca)?;
        witnesses.push(("<-".into(), cond.to_string()));
    }
    if !below {
        let cond = separating_condition(ca, cb)?;
        witnesses.push(("->".into(), cond.to_string()));
    }
    if as_json {
        println!(
            "{}",
            json!({
                "a": {"input": ia.describe(), "class": ca.to_string()},
                "b": {"input": ib.describe(), "class": cb.to_string()},
                "relation": relation,
                "witnesses": witnesses.iter().map(|(d, c)| json!({"direction": d, "condition": c})).collect::<Vec<_>>(),
            })
        );
    } else {
        println!(
            "{} ({}) {} {} ({})",
            ia.describe(),
            ca,
            relation,
            ib.describe(),
            cb
        );
        for (dir, cond) in &witnesses {
            println!("  witness ({dir}): {cond}");
        }
    }
    Ok(0)
}

fn check_report(as_json: bool, input: &Input, cond: &H1Condition) -> Result<i32> {
    let (sat, witness, nodes, exhaustive) = match input {
        Input::Structure(a) => match satisfies_structure(a, cond) {
            StructSat::Witness { assignment, nodes } => (true, Some(assignment), nodes, true),
            StructSat::Refuted { nodes } => (false, None, nodes, true),
        },
        Input::Generators(g) => match CloneSolver::new(g.clone()).satisfies(cond) {
            CloneSat::Witness { assignment, nodes } => (true, Some(assignment), nodes, true),
            CloneSat::Refuted { nodes } => (false, None, nodes, true),
            CloneSat::Unresolved => {
                if as_json {
                    println!("{}", json!({"satisfied": null}));
                } else {
                    println!("unresolved: search budgets exhausted without a decision");
                }
                return Ok(1);
            }
        },
    };
    if as_json {
        println!(
            "{}",
            json!({
                "condition": cond.to_string(),
                "satisfied": sat,
                "witness": witness.as_ref().map(witness_json),
                "nodes": nodes,
                "exhaustive": exhaustive,
            })
        );
    } else if let Some(w) = witness {
        println!("satisfied ({nodes} nodes): {}", render_witness(&w));
    } else {
        println!("refuted by exhaustive search ({nodes} nodes)");
    }
    Ok(0)
}

fn validate_reduction(cert: &PpCertificate, n: usize, seed_base: u64) -> Result<usize> {
    let mut failures = 0;
    for k in 0..n as u64 {
        let seed = seed_base.wrapping_add(k);
        let vars = 3 + (seed % 6) as usize;
        let constraints = 2 + (seed % 9) as usize;
        let instance = random_instance(&cert.target, vars, constraints, seed);
        let (reduced, _) = reduce_instance(&instance, cert)?;
        let direct = solve_bruteforce(&instance, &cert.target)?;
        let through = solve_bruteforce(&reduced, &cert.source)?;
        if direct.is_some() != through.is_some() {
            failures += 1;
        }
    }
    Ok(failures)
}
