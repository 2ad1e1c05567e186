use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use verigen::prover::{external, parse_cnf, prove, saturate, Budget, Clause, Status};
use verigen_cli::{gen_batch, read_answers, read_instances, score_all, serve, summary, task_table, write_jsonl, CliError};

#[derive(Parser)]
#[command(name = "verigen", version, about = "Generate and score verifiable symbolic reasoning tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a batch of instances as JSONL.
    Gen {
        #[arg(long)]
        task: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        difficulty: f64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Worker threads; output does not depend on this.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score an answer file against an instance file.
    Score {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long)]
        answers: PathBuf,
        /// Rewards file; standard output when absent. The summary goes to stderr.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer line-delimited JSON requests on stdin until it closes.
    Serve,
    /// List tasks and their parameters at difficulty 0 and 5.
    List {
        /// Print the table as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the built-in prover on a CNF file.
    Prove {
        file: PathBuf,
        #[arg(long, default_value_t = 3000)]
        max_clauses: usize,
        #[arg(long, default_value_t = 400)]
        max_given: usize,
        /// Use the command in VERIGEN_EXTERNAL_PROVER instead.
        #[arg(long)]
        external: bool,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn szs(status: Status) -> &'static str {
    match status {
        Status::Proved => "Unsatisfiable",
        Status::Saturated => "Satisfiable",
        Status::BudgetExhausted => "GaveUp",
    }
}

fn run_prove(file: &PathBuf, budget: Budget, use_external: bool) -> Result<(), CliError> {
    let problem = parse_cnf(&read(file)?).map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
    let (conjectures, axioms): (Vec<_>, Vec<_>) = problem.into_iter().partition(|c| c.role == "conjecture");
    let axioms: Vec<Clause> = axioms.into_iter().map(|c| c.clause).collect();
    if conjectures.len() > 1 {
        return Err(CliError::Usage("at most one clause may have role `conjecture`".into()));
    }
    let conjecture = conjectures.into_iter().next().map(|c| c.clause);
    if use_external {
        let Some(conj) = conjecture else {
            return Err(CliError::Usage("--external needs a `conjecture` clause".into()));
        };
        let status = external::run(&axioms, &conj)
            .ok_or_else(|| anyhow::anyhow!("external prover unavailable; set {}", external::ENV_VAR))?;
        println!("% SZS status {}", szs(status));
        return Ok(());
    }
    let result = match &conjecture {
        Some(c) => prove(&axioms, c, &budget),
        None => saturate(&axioms, &budget),
    };
    println!("% SZS status {}", szs(result.status));
    if let Some(ids) = result.proof() {
        for id in ids {
            let n = &result.graph.nodes[id];
            match n.parents {
                Some((a, b)) => println!("{id}. {} [{:?} {a},{b}]", n.clause, n.rule),
                None => println!("{id}. {} [{:?}]", n.clause, n.rule),
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { task, seed, difficulty, count, jobs, out } => {
            let batch = gen_batch(&task, seed, difficulty, count, usize::from(jobs))?;
            write_jsonl(&batch, output(&out)?)?;
        }
        Command::Score { instances, answers, out } => {
            let instances = read_instances(&read(&instances)?)?;
            let answers = read_answers(&read(&answers)?);
            let scored = score_all(&instances, &answers)?;
            let mut w = output(&out)?;
            for s in &scored {
                writeln!(w, "{}", s.to_json_line()).map_err(anyhow::Error::from)?;
            }
            w.flush().map_err(anyhow::Error::from)?;
            eprint!("{}", summary(&scored));
        }
        Command::Serve => serve(io::stdin().lock(), io::stdout().lock())?,
        Command::List { json } => {
            let table = task_table();
            let mut w = output(&None)?;
            let mut text = String::new();
            if json {
                text = format!("{table}\n");
            } else {
                for row in table.as_array().expect("array") {
                    text.push_str(&format!("{}\n", row["name"].as_str().unwrap_or_default()));
                    for (k, v0) in row["params_d0"].as_object().expect("object") {
                        text.push_str(&format!("    {k:20} d=0: {:<8} d=5: {}\n", v0.to_string(), row["params_d5"][k]));
                    }
                }
            }
            w.write_all(text.as_bytes()).and_then(|()| w.flush()).map_err(anyhow::Error::from)?;
        }
        Command::Prove { file, max_clauses, max_given, external } => {
            let budget = Budget { max_clauses, max_given, ..Budget::default() };
            run_prove(&file, budget, external)?;
        }
    }
    Ok(())
}

/// A closed downstream pipe (`verigen list | head`) is not an error.
fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
