//! Command-line front end: consistency, entailment, answering, stage dumps,
//! translation and DOT rendering of rewriting candidates.
//!
//! Exit codes: 0 positive verdict, 1 negative verdict, 2 usage or parse
//! error, 3 resource limit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use shiq_core::dl::Kb;
use shiq_core::entail::{self, EntailConfig, Verdict};
use shiq_core::query::{Query, Ucq};
use shiq_core::rewrite::{rewrite, Candidate};
use shiq_core::rollup::rollup_query;
use shiq_core::syntax::{
    check_query_individuals, parse_kb, parse_query, print_concept, print_query, print_term,
    ParsedQuery,
};
use shiq_core::tableau::{check, TableauConfig};
use shiq_core::translate::{print_alcqib, AlcqibKb, TrMode};
use shiq_core::Error;

#[derive(Parser)]
#[command(name = "shiq", version, about = "Conjunctive query entailment over SHIQ knowledge bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Per-stage candidate budget of the query rewriting.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Directory receiving rewriting dumps, translated KBs and tableau traces.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide consistency of a knowledge base.
    Consistent {
        #[arg(long)]
        kb: PathBuf,
    },
    /// Decide entailment of a Boolean (union of) conjunctive queries.
    Entails {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: PathBuf,
        /// Assume distinct individual names denote distinct elements.
        #[arg(long)]
        una: bool,
    },
    /// Certain answers of a query with answer variables.
    Answer {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        una: bool,
    },
    /// Dump the output of one rewriting stage.
    Rewrite {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum)]
        stage: Stage,
    },
    /// Print the ALCQIb translation of a KB, or of its extension by a query.
    Translate {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "definitional")]
        mode: Translation,
    },
    /// Render rewriting candidates as DOT graphs.
    Dot {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum, default_value = "forest")]
        stage: Stage,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stage {
    Collapse,
    Split,
    Loop,
    Forest,
    Ground,
    Tree,
}

#[derive(Clone, Copy, ValueEnum)]
enum Translation {
    Definitional,
    Universal,
}

impl From<Translation> for TrMode {
    fn from(t: Translation) -> TrMode {
        match t {
            Translation::Definitional => TrMode::Definitional,
            Translation::Universal => TrMode::Universal,
        }
    }
}

/// Failures, each mapped to an exit code.
enum Failure {
    Usage(String),
    Limit(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::BudgetExceeded { .. } | Error::ResourceLimit(_) => Failure::Limit(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(positive) => ExitCode::from(if positive { 0 } else { 1 }),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Limit(msg)) => {
            println!("RESOURCE-LIMIT");
            eprintln!("{msg}");
            ExitCode::from(3)
        }
    }
}

fn load_kb(path: &Path) -> Result<Kb, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(parse_kb(&text, &path.display().to_string())?)
}

fn load_query(path: &Path, kb: &Kb) -> Result<ParsedQuery, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let q = parse_query(&text, &path.display().to_string())?;
    let inds = match &q {
        ParsedQuery::Boolean(u) => u.individuals(),
        ParsedQuery::Answer(aq) => aq.query().inds().map(|t| t.name().clone()).collect(),
    };
    check_query_individuals(kb, &inds)?;
    Ok(q)
}

fn load_ucq(path: &Path, kb: &Kb) -> Result<Ucq, Failure> {
    match load_query(path, kb)? {
        ParsedQuery::Boolean(u) => Ok(u),
        ParsedQuery::Answer(aq) if aq.answer_vars().is_empty() => Ok(Ucq::single(aq.query().clone())),
        ParsedQuery::Answer(_) => Err(Failure::Usage("expected a Boolean query".into())),
    }
}

fn write_trace(dir: &Path, file: &str, contents: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(file), contents)?;
    Ok(())
}

fn config(cli: &Cli) -> EntailConfig {
    let mut cfg = EntailConfig::default();
    if let Some(b) = cli.budget {
        cfg.budget = b;
    }
    cfg
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let cfg = config(cli);
    match &cli.command {
        Command::Consistent { kb } => {
            let kb = load_kb(kb)?;
            let translated = entail::translate(&kb, &[], &[], &[], cfg.translation);
            let tcfg = TableauConfig { trace: cli.trace.is_some(), ..cfg.tableau.clone() };
            let result = check(&translated, &tcfg)?;
            if let Some(dir) = &cli.trace {
                write_trace(dir, "translated.kb", &print_alcqib(&translated))?;
                write_trace(dir, "tableau.trace", &result.trace.join("\n"))?;
            }
            println!("{}", if result.consistent { "CONSISTENT" } else { "INCONSISTENT" });
            Ok(result.consistent)
        }
        Command::Entails { kb, query, una } => {
            let kb = load_kb(kb)?;
            let u = load_ucq(query, &kb)?;
            if let Some(dir) = &cli.trace {
                trace_entailment(dir, &kb, &u, &cfg)?;
            }
            let v = entail::entails(&kb, &u, *una, &cfg)?;
            println!("{v}");
            Ok(v.is_entailed())
        }
        Command::Answer { kb, query, una } => {
            let kb = load_kb(kb)?;
            let aq = match load_query(query, &kb)? {
                ParsedQuery::Answer(aq) => aq,
                ParsedQuery::Boolean(u) => {
                    let v = entail::entails(&kb, &u, *una, &cfg)?;
                    println!("{v}");
                    return Ok(v.is_entailed());
                }
            };
            let answers = entail::answer(&kb, &aq, *una, &cfg)?;
            if aq.answer_vars().is_empty() {
                let v = Verdict::from_bool(!answers.is_empty());
                println!("{v}");
                return Ok(v.is_entailed());
            }
            for tuple in &answers {
                println!("({})", tuple.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "));
            }
            Ok(!answers.is_empty())
        }
        Command::Rewrite { kb, query, stage } => {
            let kb = load_kb(kb)?;
            let u = load_ucq(query, &kb)?;
            print!("{}", dump_stage(&kb, &u, *stage, &cfg)?);
            Ok(true)
        }
        Command::Translate { kb, query, mode } => {
            let kb = load_kb(kb)?;
            let Some(query) = query else {
                println!("{}", print_alcqib(&entail::translate(&kb, &[], &[], &[], (*mode).into())));
                return Ok(true);
            };
            let u = load_ucq(query, &kb)?;
            for conjunct in u.to_cnf() {
                println!("{}", print_alcqib(&extended_translation(&kb, &conjunct, &cfg, (*mode).into())?));
            }
            Ok(true)
        }
        Command::Dot { kb, query, stage } => {
            let kb = load_kb(kb)?;
            let u = load_ucq(query, &kb)?;
            let rcfg = cfg.rewrite_config(&kb);
            let mut n = 0;
            for q in u.disjuncts() {
                let stages = rewrite(q, &kb, &rcfg)?;
                let cands: Vec<Candidate> = match stage {
                    Stage::Collapse => stages.collapsings.into_iter().map(|q| Candidate::new(q, Default::default())).collect(),
                    Stage::Split => stages.split,
                    Stage::Loop => stages.loops,
                    Stage::Forest | Stage::Ground | Stage::Tree => stages.forest,
                };
                for c in &cands {
                    print!("{}", dot(c, n));
                    n += 1;
                }
            }
            Ok(true)
        }
    }
}

/// The extended KB under UNA for one connected CNF conjunct, translated.
fn extended_translation(kb: &Kb, u: &Ucq, cfg: &EntailConfig, mode: TrMode) -> Result<AlcqibKb, Failure> {
    let rollup = entail::rollup_ucq(kb, u, cfg)?;
    let tree_tbox = entail::extended_tbox(&rollup.trees);
    let clauses = entail::spoiler_clauses(&rollup.groundings);
    Ok(entail::translate(kb, &tree_tbox, &[], &clauses, mode))
}

/// Writes the rewriting stages, the extended KB translations and their
/// tableau traces for every CNF conjunct.
fn trace_entailment(dir: &Path, kb: &Kb, u: &Ucq, cfg: &EntailConfig) -> Result<(), Failure> {
    for stage in [Stage::Collapse, Stage::Split, Stage::Loop, Stage::Forest, Stage::Tree, Stage::Ground] {
        let name = format!("{}.txt", stage.to_possible_value().expect("named stage").get_name());
        write_trace(dir, &name, &dump_stage(kb, u, stage, cfg)?)?;
    }
    for (i, conjunct) in u.to_cnf().iter().enumerate() {
        let translated = extended_translation(kb, conjunct, cfg, cfg.translation)?;
        write_trace(dir, &format!("extended-{i}.kb"), &print_alcqib(&translated))?;
        let tcfg = TableauConfig { trace: true, ..cfg.tableau.clone() };
        let result = check(&translated, &tcfg)?;
        write_trace(dir, &format!("extended-{i}.trace"), &result.trace.join("\n"))?;
    }
    Ok(())
}

fn print_candidate(c: &Candidate) -> String {
    let roots: Vec<String> = c.roots.iter().map(print_term).collect();
    format!("(candidate (roots{}{})\n  {})\n", if roots.is_empty() { "" } else { " " }, roots.join(" "), print_query(&c.query))
}

fn dump_stage(kb: &Kb, u: &Ucq, stage: Stage, cfg: &EntailConfig) -> Result<String, Failure> {
    let rcfg = cfg.rewrite_config(kb);
    let mut out = String::new();
    for q in u.disjuncts() {
        match stage {
            Stage::Tree | Stage::Ground => {
                if !q.is_connected() {
                    return Err(Failure::Usage("tree and ground queries need connected disjuncts".into()));
                }
                let r = rollup_query(q, kb, &rcfg)?;
                if stage == Stage::Tree {
                    for c in &r.trees {
                        let _ = writeln!(out, "{}", print_concept(c));
                    }
                } else {
                    for g in &r.groundings {
                        let _ = writeln!(out, "{}", print_query(g));
                    }
                }
            }
            _ => {
                let stages = rewrite(q, kb, &rcfg)?;
                match stage {
                    Stage::Collapse => stages.collapsings.iter().for_each(|c| {
                        let _ = writeln!(out, "{}", print_query(c));
                    }),
                    Stage::Split => stages.split.iter().for_each(|c| out.push_str(&print_candidate(c))),
                    Stage::Loop => stages.loops.iter().for_each(|c| out.push_str(&print_candidate(c))),
                    _ => stages.forest.iter().for_each(|c| out.push_str(&print_candidate(c))),
                }
            }
        }
    }
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// One graph: nodes are `≈`-classes (roots drawn doubled), edges role atoms,
/// concept atoms are listed under the class label.
fn dot(c: &Candidate, n: usize) -> String {
    let q: &Query = &c.query;
    let mut out = format!("digraph candidate{n} {{\n  node [shape=circle];\n");
    for (i, class) in q.classes().iter().enumerate() {
        let mut label = class.iter().map(print_term).collect::<Vec<_>>().join(" ≈ ");
        for a in q.atoms() {
            if let shiq_core::query::Atom::Concept(con, t) = a {
                if q.class_id(t) == i {
                    label.push_str(&format!("\\n{}", print_concept(con)));
                }
            }
        }
        let shape = if class.iter().any(|t| c.roots.contains(t)) { "doublecircle" } else { "circle" };
        let _ = writeln!(out, "  c{i} [label=\"{}\", shape={shape}];", escape(&label).replace("\\\\n", "\\n"));
    }
    for (r, t, u) in q.role_atoms() {
        let _ = writeln!(out, "  c{} -> c{} [label=\"{}\"];", q.class_id(t), q.class_id(u), escape(&r.to_string()));
    }
    out.push_str("}\n");
    out
}
