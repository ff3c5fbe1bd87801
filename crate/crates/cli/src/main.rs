use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mstc::bench::{self, Family, GLOBAL_LIMIT_ENV};
use mstc::bnb::{export_milp, SubproblemSpec};
use mstc::io::{parse_instance, write_native_file, Format};
use mstc::kernel::{run, KsParams, RunStatus};
use mstc::lp::{solve_lp, LpOptions};
use mstc::{Error, Instance};

const EXIT_NO_SOLUTION: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "mstc",
    version,
    about = "Minimum spanning tree with conflicts solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with kernel search.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "native")]
        format: Format,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write one JSON record per subproblem to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run every instance of a directory with several seeds.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value = "native")]
        format: Format,
        #[command(flatten)]
        params: ParamArgs,
        /// Runs seeds 1..=k.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// CSV with `id,ub` reference values.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        /// Write the per-run CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the summary table here instead of stderr.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Rewrite an instance in the native format.
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value = "native")]
        format: Format,
    },
    /// Solve the LP relaxation and print it, cuts included, in LP format.
    LpDump {
        file: PathBuf,
        #[arg(long, default_value = "native")]
        format: Format,
        #[arg(long)]
        no_subtours: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the full integer model in LP format.
    MilpExport {
        file: PathBuf,
        #[arg(long, default_value = "native")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, value_parser = ["zkp", "ccpr"])]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Number of passes over the buckets.
    #[arg(long = "P")]
    passes: Option<usize>,
    /// Seconds per restricted problem.
    #[arg(long)]
    inner_tl: Option<f64>,
    /// Seconds for the whole run.
    #[arg(long, env = GLOBAL_LIMIT_ENV)]
    global_tl: Option<f64>,
}

impl ParamArgs {
    fn build(&self) -> Result<KsParams, Error> {
        let mut p = match &self.family {
            Some(f) => bench::default_params(f.parse::<Family>()?),
            None => KsParams::default(),
        };
        if let Some(v) = self.alpha {
            p.alpha = v;
        }
        if let Some(v) = self.beta {
            p.beta = v;
        }
        if let Some(v) = self.delta {
            p.delta = v;
        }
        if let Some(v) = self.passes {
            p.outer_iterations = v;
        }
        if let Some(v) = self.inner_tl {
            p.inner_time_limit = v;
        }
        if let Some(v) = self.global_tl {
            p.global_time_limit = v;
            p.inner_time_limit = p.inner_time_limit.min(v);
        }
        p.validate()?;
        Ok(p)
    }
}

fn output(path: Option<&Path>) -> std::io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn load(file: &Path, format: Format) -> Result<Instance, Error> {
    parse_instance(file, format).map_err(|e| match e {
        Error::Io(io) => Error::InvalidInput(format!("{}: {io}", file.display())),
        other => other,
    })
}

fn solve(file: &Path, format: Format, params: KsParams, trace: Option<&Path>) -> Result<u8, Error> {
    let inst = load(file, format)?;
    let out = run(&inst, &params)?;
    if let Some(path) = trace {
        let mut w = BufWriter::new(File::create(path)?);
        for rec in &out.trace {
            serde_json::to_writer(&mut w, rec)?;
            writeln!(w)?;
        }
        w.flush()?;
    }
    let edges: Vec<usize> = out
        .solution
        .as_ref()
        .map(|s| s.edges.iter().map(|&i| i + 1).collect())
        .unwrap_or_default();
    let report = serde_json::json!({
        "status": out.status,
        "weight": out.weight(),
        "initial_weight": out.initial_weight.is_finite().then_some(out.initial_weight),
        "ub_time_s": out.time_to_best,
        "total_time_s": out.total_time,
        "edges": edges,
    });
    println!("{report}");
    Ok(match out.status {
        RunStatus::Feasible => 0,
        RunStatus::NoSolution => EXIT_NO_SOLUTION,
        RunStatus::Infeasible => EXIT_INFEASIBLE,
    })
}

fn execute(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Solve {
            file,
            format,
            params,
            seed,
            trace,
        } => {
            let params = KsParams {
                rng_seed: seed,
                ..params.build()?
            };
            solve(&file, format, params, trace.as_deref())
        }
        Command::Bench {
            dir,
            format,
            params,
            seeds,
            reference,
            csv,
            table,
        } => {
            let params = params.build()?;
            let refs = match reference {
                Some(p) => bench::read_reference(&p)?,
                None => HashMap::new(),
            };
            let instances = bench::load_dir(&dir, format)?;
            let seeds: Vec<u64> = (1..=seeds).collect();
            let records = bench::run_benchmark(&instances, &params, &seeds, &refs);
            bench::write_csv(&records, output(csv.as_deref())?)?;
            let text = bench::format_table(&bench::summarize(&records, &refs));
            match table {
                Some(p) => std::fs::write(p, text)?,
                None => eprint!("{text}"),
            }
            Ok(0)
        }
        Command::Convert {
            input,
            output,
            format,
        } => {
            let inst = load(&input, format)?;
            write_native_file(&output, &inst)?;
            Ok(0)
        }
        Command::LpDump {
            file,
            format,
            no_subtours,
            out,
        } => {
            let inst = load(&file, format)?;
            let lp = solve_lp(
                &inst,
                &LpOptions {
                    include_subtours: !no_subtours,
                    ..LpOptions::default()
                },
            );
            log::info!("LP {:?}, objective {}", lp.status, lp.objective);
            output(out.as_deref())?.write_all(lp.to_lp_format(&inst).as_bytes())?;
            Ok(0)
        }
        Command::MilpExport { file, format, out } => {
            let inst = load(&file, format)?;
            let text = export_milp(&inst, &SubproblemSpec::unrestricted(&inst))?;
            output(out.as_deref())?.write_all(text.as_bytes())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
