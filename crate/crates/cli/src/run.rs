//! The `compile` and `sweep` commands.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, ValueEnum};
use emitforge::bench::BenchmarkSpec;
use emitforge::graph::GraphState;
use emitforge::hardware::{self, HardwareModel, Metrics};
use emitforge::partition::Budget;
use emitforge::pipeline::{self, PipelineConfig, PipelineError, PipelineResult, Session};
use emitforge::schedule;
use rayon::prelude::*;

use crate::report::{self, Row};
use crate::{load_graph, load_hw, write_out, Failure};

#[derive(Args, Clone, Debug)]
pub struct PipelineFlags {
    /// Largest subgraph size.
    #[arg(long, default_value_t = 7)]
    pub g_max: usize,
    /// Longest local-complementation sequence the partitioner may use.
    #[arg(long, default_value_t = 15)]
    pub lc_depth: usize,
    /// Emitter cap as a multiple of the minimum emitter count.
    #[arg(long, default_value_t = 1.5, value_parser = positive)]
    pub ne_factor: f64,
    /// Wall-clock limit for the partitioner.
    #[arg(long, default_value_t = 1200)]
    pub budget_secs: u64,
    /// Annealing iterations for the partitioner.
    #[arg(long, default_value_t = 20_000)]
    pub budget_iters: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Preset name (`qd-default`) or a key=value profile file.
    #[arg(long, default_value = "qd-default")]
    pub hw: String,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

impl PipelineFlags {
    fn config(&self) -> PipelineConfig {
        PipelineConfig {
            g_max: self.g_max,
            lc_depth: self.lc_depth,
            ne_factor: self.ne_factor,
            partition_budget: Budget {
                iterations: self.budget_iters,
                time: Some(Duration::from_secs(self.budget_secs)),
            },
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct CompileArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub flags: PipelineFlags,
    /// Circuit JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Append a results row to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the emitter usage curve as CSV.
    #[arg(long)]
    pub usage: Option<PathBuf>,
    /// Write the partitioner's incumbent trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

fn pipeline_failure(e: PipelineError) -> Failure {
    match e {
        PipelineError::Infeasible(_) | PipelineError::Subgraph(_) => Failure::infeasible(e),
        PipelineError::Internal(_) => Failure::verify(e),
        PipelineError::Partition(_) | PipelineError::Graph(_) => Failure::usage(e),
    }
}

fn fill(row: &mut Row, m: &Metrics) {
    row.n_ee_cnot = Some(m.n_ee_cnot);
    row.duration = Some(hardware::to_f64(m.duration));
    row.avg_t_loss = Some(hardware::to_f64(m.avg_t_loss));
    row.survival = Some(m.survival);
    row.peak_emitters = Some(m.peak_emitters);
}

fn pipeline_row(id: &str, family: &str, g: &GraphState, factor: f64, s: &Session, r: &PipelineResult) -> Row {
    let mut row = Row {
        graph_id: id.into(),
        n: g.len(),
        family: family.into(),
        method: "pipeline".into(),
        ne_factor: factor,
        ne_min_total: Some(r.ne_min_total),
        ne_limit: Some(r.ne_limit),
        k: Some(s.prep.partition.k),
        lc_len: Some(s.prep.partition.lc_sequence.len()),
        source: r.source.name().into(),
        status: if s.prep.partition.timed_out { "timeout".into() } else { "ok".into() },
        ..Default::default()
    };
    fill(&mut row, &r.metrics);
    row
}

fn baseline_row(id: &str, family: &str, g: &GraphState, factor: f64, ne_min: usize, ne_limit: usize, hw: &HardwareModel) -> Row {
    let mut row = Row {
        graph_id: id.into(),
        n: g.len(),
        family: family.into(),
        method: "baseline".into(),
        ne_factor: factor,
        ne_min_total: Some(ne_min),
        ne_limit: Some(ne_limit),
        source: "greedy-asap".into(),
        ..Default::default()
    };
    match pipeline::baseline(g, ne_limit, hw).and_then(|c| {
        hardware::metrics(&c, hw).map_err(|e| PipelineError::Internal(e.to_string()))
    }) {
        Ok(m) => {
            fill(&mut row, &m);
            row.status = "ok".into();
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

fn graph_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn compile(args: &CompileArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let g = load_graph(&args.graph)?;
    let hw = load_hw(&args.flags.hw)?;
    let cfg = args.flags.config();
    let mut session = Session::new(&g, &hw, &cfg).map_err(pipeline_failure)?;
    let r = session.at_factor(cfg.ne_factor).map_err(pipeline_failure)?;
    write_out(args.out.as_deref(), &(r.circuit.to_json() + "\n"))?;

    if let Some(path) = &args.usage {
        let mut buf = Vec::new();
        schedule::usage_curve(&r.circuit, &hw).write_csv(&mut buf).map_err(|e| Failure::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Failure::io(path, e))?;
    }
    if let Some(path) = &args.trace {
        let mut buf = Vec::new();
        emitforge::partition::write_trace(&session.prep.partition.trace, &mut buf).map_err(|e| Failure::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Failure::io(path, e))?;
    }
    let mut row = pipeline_row(&graph_id(&args.graph), "file", &g, cfg.ne_factor, &session, &r);
    row.wall_ms = started.elapsed().as_millis();
    if let Some(path) = &args.csv {
        report::append(path, std::slice::from_ref(&row))?;
    }

    let lines = [
        format!("ne_min_total={} ne_factor={} ne_limit={}", r.ne_min_total, cfg.ne_factor, r.ne_limit),
        format!("k={} lc_sequence={:?} source={}", row.k.unwrap_or(0), session.prep.partition.lc_sequence, row.source),
        format!(
            "n_ee_cnot={} duration={} avg_t_loss={} survival={:.6} peak_emitters={}",
            r.metrics.n_ee_cnot,
            hardware::to_f64(r.metrics.duration),
            hardware::to_f64(r.metrics.avg_t_loss),
            r.metrics.survival,
            r.metrics.peak_emitters
        ),
    ];
    for l in lines {
        // keep stdout clean when the circuit itself goes there
        if args.out.is_some() {
            println!("{l}");
        } else {
            eprintln!("{l}");
        }
    }
    if session.prep.partition.timed_out {
        return Err(Failure::timeout("partitioner hit its time budget; the result uses its best partition so far"));
    }
    Ok(())
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SweepFamily {
    Waxman,
    Lattice,
    Tree,
}

#[derive(Args, Clone, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "waxman")]
    pub family: SweepFamily,
    /// Comma-separated sizes: vertex count for waxman, side length for
    /// lattice, depth for tree.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    /// Emitter cap factors to run; defaults to --ne-factor.
    #[arg(long, value_delimiter = ',', value_parser = positive)]
    pub factors: Vec<f64>,
    /// Tree branching factor.
    #[arg(long, default_value_t = 2)]
    pub branching: usize,
    /// Also partition every instance with no local complementation.
    #[arg(long)]
    pub ablation: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub flags: PipelineFlags,
    /// Results CSV (rows are appended).
    #[arg(long)]
    pub out: PathBuf,
}

struct Instance {
    id: String,
    family: &'static str,
    spec: BenchmarkSpec,
}

fn instances(args: &SweepArgs) -> Vec<Instance> {
    let mut out = Vec::new();
    for &size in &args.sizes {
        for rep in 0..args.reps {
            let spec = match args.family {
                SweepFamily::Waxman => BenchmarkSpec::waxman(size, args.flags.seed + rep),
                SweepFamily::Lattice => BenchmarkSpec::Lattice { width: size, height: size },
                SweepFamily::Tree => BenchmarkSpec::Tree { branching: args.branching, depth: size },
            };
            let family = spec.family();
            out.push(Instance { id: format!("{family}-{size}-r{rep}"), family, spec });
        }
    }
    out
}

fn run_instance(inst: &Instance, args: &SweepArgs, factors: &[f64], hw: &HardwareModel) -> Vec<Row> {
    let started = Instant::now();
    let error_row = |method: &str, msg: String| Row {
        graph_id: inst.id.clone(),
        family: inst.family.into(),
        method: method.into(),
        status: format!("error: {msg}"),
        ..Default::default()
    };
    let g = match inst.spec.generate() {
        Ok(g) => g,
        Err(e) => return vec![error_row("pipeline", e.to_string())],
    };
    let cfg = args.flags.config();
    let mut rows = Vec::new();
    let mut session = match Session::new(&g, hw, &cfg) {
        Ok(s) => s,
        Err(e) => return vec![error_row("pipeline", e.to_string())],
    };
    for &f in factors {
        let ne_limit = pipeline::ne_limit_for(session.prep.ne_min_total, f);
        let mut row = match session.at_factor(f) {
            Ok(r) => pipeline_row(&inst.id, inst.family, &g, f, &session, &r),
            Err(e) => Row { n: g.len(), ne_factor: f, ..error_row("pipeline", e.to_string()) },
        };
        row.wall_ms = started.elapsed().as_millis();
        rows.push(row);
        rows.push(baseline_row(&inst.id, inst.family, &g, f, session.prep.ne_min_total, ne_limit, hw));
    }
    if args.ablation {
        let cfg0 = PipelineConfig { lc_depth: 0, ..cfg };
        let mut row = Row {
            graph_id: inst.id.clone(),
            n: g.len(),
            family: inst.family.into(),
            method: "partition-l0".into(),
            ..Default::default()
        };
        match pipeline::solve_partition(&g, &cfg0) {
            Ok(p) => {
                row.k = Some(p.k);
                row.lc_len = Some(0);
                row.status = "ok".into();
            }
            Err(e) => row.status = format!("error: {e}"),
        }
        rows.push(row);
    }
    rows
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn summarize(rows: &[Row], sizes: &[usize], factors: &[f64]) {
    println!("reductions vs internal baseline (mean over instances)");
    for &size in sizes {
        for &f in factors {
            let pairs: Vec<(&Row, &Row)> = rows
                .iter()
                .filter(|r| r.method == "pipeline" && r.ne_factor == f && r.graph_id.contains(&format!("-{size}-")))
                .filter_map(|p| {
                    rows.iter()
                        .find(|b| b.method == "baseline" && b.graph_id == p.graph_id && b.ne_factor == f)
                        .map(|b| (p, b))
                })
                .filter(|(p, b)| p.duration.is_some() && b.duration.is_some())
                .collect();
            let pct = |a: f64, b: f64| if b > 0.0 { 100.0 * (1.0 - a / b) } else { 0.0 };
            let cnot = mean(pairs.iter().map(|(p, b)| pct(p.n_ee_cnot.unwrap() as f64, b.n_ee_cnot.unwrap() as f64)));
            let dur = mean(pairs.iter().map(|(p, b)| pct(p.duration.unwrap(), b.duration.unwrap())));
            let surv = mean(pairs.iter().map(|(p, b)| p.survival.unwrap() / b.survival.unwrap()));
            if let (Some(c), Some(d), Some(s)) = (cnot, dur, surv) {
                println!(
                    "size={size} factor={f} instances={} cnot_reduction={c:.1}% duration_reduction={d:.1}% survival_ratio={s:.3}",
                    pairs.len()
                );
            }
        }
        let ks = |method: &str| {
            mean(rows.iter()
                .filter(|r| r.method == method && r.graph_id.contains(&format!("-{size}-")))
                .filter_map(|r| r.k)
                .map(|k| k as f64))
        };
        if let (Some(k), Some(k0)) = (ks("pipeline"), ks("partition-l0")) {
            println!("size={size} mean_k_lc={k:.2} mean_k_no_lc={k0:.2}");
        }
    }
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let hw = load_hw(&args.flags.hw)?;
    let factors = if args.factors.is_empty() { vec![args.flags.ne_factor] } else { args.factors.clone() };
    let work = instances(args);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build().map_err(Failure::usage)?;
    let rows: Vec<Row> = pool.install(|| {
        work.par_iter().map(|inst| run_instance(inst, args, &factors, &hw)).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    // one writer, in instance order
    report::append(&args.out, &rows)?;
    summarize(&rows, &args.sizes, &factors);
    Ok(())
}
