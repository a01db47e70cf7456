//! `emitforge`: generate benchmark graphs, compile them to emitter circuits,
//! verify and measure circuits, and run comparison sweeps.

mod report;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emitforge::bench::{BenchmarkSpec, WAXMAN_ALPHA, WAXMAN_BETA};
use emitforge::circuit::{Circuit, Outcomes};
use emitforge::graph::GraphState;
use emitforge::hardware::{self, HardwareModel};
use emitforge::tableau::Tableau;

#[derive(Parser)]
#[command(name = "emitforge", version, about = "Compile photonic graph states into emitter circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a benchmark graph as JSON.
    GenGraph {
        #[command(subcommand)]
        family: Family,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Partition, compile and schedule a graph.
    Compile(run::CompileArgs),
    /// Check a circuit against the graph state it should prepare.
    Verify {
        graph: PathBuf,
        circuit: PathBuf,
        #[arg(long, default_value = "qd-default")]
        hw: String,
    },
    /// Report CNOT count, duration, photon loss and survival of a circuit.
    Metrics {
        circuit: PathBuf,
        #[arg(long, default_value = "qd-default")]
        hw: String,
    },
    /// Compile a family of graphs with the pipeline and the naive baseline.
    Sweep(run::SweepArgs),
}

#[derive(Subcommand, Clone)]
enum Family {
    Lattice {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
    },
    Tree {
        #[arg(long)]
        branching: usize,
        #[arg(long)]
        depth: usize,
    },
    Waxman {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = WAXMAN_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = WAXMAN_BETA)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl From<Family> for BenchmarkSpec {
    fn from(f: Family) -> Self {
        match f {
            Family::Lattice { width, height } => BenchmarkSpec::Lattice { width, height },
            Family::Tree { branching, depth } => BenchmarkSpec::Tree { branching, depth },
            Family::Waxman { n, alpha, beta, seed } => BenchmarkSpec::Waxman { n, alpha, beta, seed },
        }
    }
}

/// Process exit status with a machine-readable reason.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub reason: &'static str,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl ToString) -> Self {
        Failure { code: 2, reason: "usage", message: message.to_string() }
    }
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure { code: 2, reason: "io", message: format!("{}: {e}", path.display()) }
    }
    pub fn verify(message: impl ToString) -> Self {
        Failure { code: 1, reason: "verify", message: message.to_string() }
    }
    pub fn infeasible(message: impl ToString) -> Self {
        Failure { code: 3, reason: "infeasible", message: message.to_string() }
    }
    pub fn timeout(message: impl ToString) -> Self {
        Failure { code: 4, reason: "timeout", message: message.to_string() }
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

pub fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn load_graph(path: &Path) -> Result<GraphState, Failure> {
    GraphState::from_json(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    Circuit::from_json(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn load_hw(spec: &str) -> Result<HardwareModel, Failure> {
    if let Ok(hw) = HardwareModel::preset(spec) {
        return Ok(hw);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Failure::usage(format!("unknown hardware preset or file {spec:?}")));
    }
    HardwareModel::parse_profile(&read(path)?).map_err(|e| Failure::usage(format!("{spec}: {e}")))
}

fn verify(graph: &Path, circuit: &Path, hw: &str) -> Result<(), Failure> {
    let (g, c, hw) = (load_graph(graph)?, load_circuit(circuit)?, load_hw(hw)?);
    if c.photons != g.len() {
        return Err(Failure::verify(format!("circuit has {} photons, graph has {} vertices", c.photons, g.len())));
    }
    if let Some(v) = c.validate(&hw).first() {
        return Err(Failure::verify(v));
    }
    let want = Tableau::from_graph(&g);
    for outcomes in [Outcomes::AllZero, Outcomes::AllOne, Outcomes::Seeded(1)] {
        let got = c.replay(&hw, outcomes).map_err(Failure::verify)?;
        if !got.states_equal(&want).map_err(Failure::verify)? {
            return Err(Failure::verify(format!("replayed state differs from the graph state ({outcomes:?} outcomes)")));
        }
    }
    println!("PASS {} photons, {} emitters, {} gates", c.photons, c.emitters, c.ops.len());
    Ok(())
}

fn metrics(circuit: &Path, hw: &str) -> Result<(), Failure> {
    let (c, hw) = (load_circuit(circuit)?, load_hw(hw)?);
    let c = if c.is_timed() { c } else { hardware::time_circuit(&c, &hw) };
    let m = hardware::metrics(&c, &hw).map_err(Failure::usage)?;
    let report = serde_json::json!({
        "n_ee_cnot": m.n_ee_cnot,
        "duration": hardware::to_f64(m.duration),
        "avg_t_loss": hardware::to_f64(m.avg_t_loss),
        "survival": m.survival,
        "photon_survival": m.photon_survival,
        "peak_emitters": m.peak_emitters,
        "hardware": hw.to_profile(),
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("json"));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::GenGraph { family, out } => {
            let g = BenchmarkSpec::from(family).generate().map_err(Failure::usage)?;
            write_out(out.as_deref(), &(g.to_json() + "\n"))
        }
        Command::Compile(args) => run::compile(&args),
        Command::Verify { graph, circuit, hw } => verify(&graph, &circuit, &hw),
        Command::Metrics { circuit, hw } => metrics(&circuit, &hw),
        Command::Sweep(args) => run::sweep(&args),
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
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("emitforge: {}: {}", f.reason, f.message);
            ExitCode::from(f.code)
        }
    }
}
