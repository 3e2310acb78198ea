use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hmsched_core::fixed_dim::FixedDimConfig;
use hmsched_core::graver::{default_radius, graver_basis_box_with_budget, DEFAULT_NODE_BUDGET};
use hmsched_core::nfold::{solve_nfold, AugmentationConfig, NFoldOutcome, SolveStats};
use hmsched_core::oracles::{
    brute_min_makespan, brute_min_weighted_completion, brute_solve_nfold, DEFAULT_BUDGET,
};
use hmsched_core::scheduling::{
    minimize_makespan, reduce_binpacking, solve_rwc_fixeddim, solve_rwc_nfold, Assignment,
    ProblemKind, SchedulingInstance,
};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use crate::document::{
    format_rational, parse_json, parse_matrix, problem_tag, BinPackingDoc, Dec, InstanceDoc,
    NFoldDoc, Ratio, SchedulingDoc, SolutionDoc, StatsDoc,
};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hmsched",
    version,
    about = "Exact high-multiplicity scheduling via n-fold integer programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance document to optimality.
    Solve(SolveArgs),
    /// List the Graver basis of a small matrix.
    Graver(GraverArgs),
    /// Reduce a tight bin packing document to a weighted completion instance.
    ReduceBinpacking(ReduceArgs),
    /// Check a solution document against its instance.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Nfold,
    Fixdim,
    Brute,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Self::Nfold => "nfold",
            Self::Fixdim => "fixdim",
            Self::Brute => "brute",
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "nfold")]
    pub method: Method,
    /// Per-coordinate radius of brick moves (default t·a^(r+s)).
    #[arg(long)]
    pub brick_radius: Option<u64>,
    /// Bound on partial sums of the linking rows (default r·a·t·ρ).
    #[arg(long)]
    pub sigma_radius: Option<u64>,
    /// Node budget of the chosen method.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GraverArgs {
    /// File holding the matrix, one row per line.
    #[arg(required_unless_present = "matrix", conflicts_with = "matrix")]
    pub file: Option<PathBuf>,
    /// Inline matrix, rows separated by ';'.
    #[arg(long)]
    pub matrix: Option<String>,
    /// Box radius (default t·a^rows).
    #[arg(long)]
    pub radius: Option<u64>,
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    pub file: PathBuf,
    /// Write the reduced document here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    pub solution: PathBuf,
}

/// Text for standard output and the process exit code.
#[derive(Debug)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self { stdout, code: 0 }
    }
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Solve(args) => solve(&args),
        Command::Graver(args) => graver(&args),
        Command::ReduceBinpacking(args) => reduce(&args),
        Command::Verify(args) => verify(&args),
    }
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn stats_doc(stats: &SolveStats) -> StatsDoc {
    StatsDoc {
        phase1_steps: stats.phase1_steps,
        steps: stats.steps,
        searches: stats.searches,
        max_brick_radius: stats.max_radii.map(|r| r.brick),
        max_sigma_radius: stats.max_radii.map(|r| r.sigma),
    }
}

fn counts_doc(counts: &[Vec<BigUint>]) -> Vec<Vec<Dec<BigUint>>> {
    counts
        .iter()
        .map(|row| row.iter().map(|c| Dec(c.clone())).collect())
        .collect()
}

fn solution(problem: &str, method: Method) -> SolutionDoc {
    SolutionDoc {
        problem: problem.into(),
        method: method.name().into(),
        status: "optimal".into(),
        objective: None,
        counts: None,
        x: None,
        probes: None,
        threshold: None,
        packable: None,
        stats: None,
    }
}

fn augmentation_config(args: &SolveArgs) -> AugmentationConfig {
    let mut cfg = AugmentationConfig {
        brick_radius: args.brick_radius,
        sigma_radius: args.sigma_radius,
        ..AugmentationConfig::default()
    };
    if let Some(b) = args.budget {
        cfg.node_budget = b;
    }
    cfg
}

fn fixdim_config(args: &SolveArgs) -> FixedDimConfig {
    let mut cfg = FixedDimConfig::default();
    if let Some(b) = args.budget {
        cfg.node_budget = b;
    }
    cfg
}

fn solve_scheduling(inst: &SchedulingInstance, args: &SolveArgs) -> Result<SolutionDoc, CliError> {
    let tag = problem_tag(inst.problem());
    let mut doc = solution(tag, args.method);
    let budget = args.budget.unwrap_or(DEFAULT_BUDGET);
    let found: Option<(BigRational, Vec<Vec<BigUint>>)> = match (inst.problem(), args.method) {
        (ProblemKind::RWc, Method::Nfold) => {
            let (a, stats) = solve_rwc_nfold(inst, &augmentation_config(args))?;
            doc.stats = Some(stats_doc(&stats));
            Some((a.objective, a.counts))
        }
        (ProblemKind::RWc, Method::Fixdim) => {
            let a = solve_rwc_fixeddim(inst, &fixdim_config(args))?;
            Some((a.objective, a.counts))
        }
        (ProblemKind::RWc, Method::Brute) => brute_min_weighted_completion(inst, budget)?,
        (_, Method::Nfold) => {
            let r = minimize_makespan(inst, &augmentation_config(args))?;
            r.map(|r| {
                doc.probes = Some(r.probes);
                doc.stats = Some(stats_doc(&r.stats));
                (r.makespan, r.assignment.counts)
            })
        }
        (_, Method::Brute) => brute_min_makespan(inst, budget)?,
        (_, Method::Fixdim) => {
            return Err(CliError::Input(
                "the fixed-dimension method applies to r-wc instances only".into(),
            ))
        }
    };
    match found {
        Some((objective, counts)) => {
            doc.objective = Some(Ratio(objective));
            doc.counts = Some(counts_doc(&counts));
        }
        None => doc.status = "infeasible".into(),
    }
    Ok(doc)
}

fn solve_program(doc_in: &NFoldDoc, args: &SolveArgs) -> Result<SolutionDoc, CliError> {
    let inst = doc_in.to_instance()?;
    let mut doc = solution("nfold", args.method);
    let found = match args.method {
        Method::Nfold => {
            let sol = solve_nfold(&inst, &augmentation_config(args))?;
            doc.stats = Some(stats_doc(&sol.stats));
            match sol.outcome {
                NFoldOutcome::Optimal { x, value } => Some((x, value)),
                NFoldOutcome::Infeasible { .. } => None,
            }
        }
        Method::Brute => brute_solve_nfold(&inst, args.budget.unwrap_or(DEFAULT_BUDGET))?,
        Method::Fixdim => {
            return Err(CliError::Input(
                "the fixed-dimension method applies to r-wc instances only".into(),
            ))
        }
    };
    match found {
        Some((x, value)) => {
            doc.objective = Some(Ratio(value));
            doc.x = Some(x.into_iter().map(Dec).collect());
        }
        None => doc.status = "infeasible".into(),
    }
    Ok(doc)
}

fn solve_binpacking(doc_in: &BinPackingDoc, args: &SolveArgs) -> Result<SolutionDoc, CliError> {
    let bp = doc_in.to_instance()?;
    let (inst, threshold) = reduce_binpacking(&bp)?;
    let mut doc = solve_scheduling(&inst, args)?;
    doc.problem = "binpacking".into();
    doc.packable = doc.objective.as_ref().map(|o| o.0 == threshold);
    doc.threshold = Some(Ratio(threshold));
    Ok(doc)
}

fn render(doc: &SolutionDoc) -> String {
    let mut out = format!(
        "problem: {}\nmethod: {}\nstatus: {}\n",
        doc.problem, doc.method, doc.status
    );
    if let Some(o) = &doc.objective {
        out += &format!("objective: {}\n", format_rational(&o.0));
    }
    if let Some(t) = &doc.threshold {
        out += &format!("threshold: {}\n", format_rational(&t.0));
    }
    if let Some(p) = doc.packable {
        out += &format!("packable: {}\n", if p { "yes" } else { "no" });
    }
    if let Some(counts) = &doc.counts {
        out += "assignment (rows: job types, columns: machines):\n";
        for (j, row) in counts.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|c| c.0.to_string()).collect();
            out += &format!("  type {j}: {}\n", cells.join(" "));
        }
    }
    if let Some(x) = &doc.x {
        let cells: Vec<String> = x.iter().map(|c| c.0.to_string()).collect();
        out += &format!("x: {}\n", cells.join(" "));
    }
    if let Some(p) = doc.probes {
        out += &format!("probes: {p}\n");
    }
    if let Some(s) = &doc.stats {
        out += &format!(
            "augmentation: {} phase-1 steps, {} steps, {} searches",
            s.phase1_steps, s.steps, s.searches
        );
        if let (Some(b), Some(g)) = (s.max_brick_radius, s.max_sigma_radius) {
            out += &format!(", largest radii {b} (brick) and {g} (sigma)");
        }
        out += "\n";
    }
    out
}

fn solve(args: &SolveArgs) -> Result<Output, CliError> {
    let doc = match InstanceDoc::parse(&read(&args.file)?)? {
        InstanceDoc::Scheduling(d) => solve_scheduling(&d.to_instance()?, args)?,
        InstanceDoc::NFold(d) => solve_program(&d, args)?,
        InstanceDoc::BinPacking(d) => solve_binpacking(&d, args)?,
    };
    let code = if doc.status == "optimal" { 0 } else { 2 };
    let stdout = if args.json {
        serde_json::to_string_pretty(&doc).expect("documents always serialize") + "\n"
    } else {
        render(&doc)
    };
    Ok(Output { stdout, code })
}

fn graver(args: &GraverArgs) -> Result<Output, CliError> {
    let text = match (&args.matrix, &args.file) {
        (Some(m), _) => m.clone(),
        (None, Some(path)) => read(path)?,
        (None, None) => return Err(CliError::Input("no matrix given".into())),
    };
    let a = parse_matrix(&text)?;
    let radius = args.radius.unwrap_or_else(|| default_radius(&a));
    let basis =
        graver_basis_box_with_budget(&a, radius, args.budget.unwrap_or(DEFAULT_NODE_BUDGET))?;
    let mut out = String::new();
    for g in basis.elements() {
        let cells: Vec<String> = g.iter().map(|e| e.to_string()).collect();
        out += &format!("({})\n", cells.join(","));
    }
    out += &format!("count: {}\n", basis.len());
    Ok(Output::ok(out))
}

fn reduce(args: &ReduceArgs) -> Result<Output, CliError> {
    let bp = match InstanceDoc::parse(&read(&args.file)?)? {
        InstanceDoc::BinPacking(d) => d.to_instance()?,
        _ => return Err(CliError::Input("expected a binpacking document".into())),
    };
    let (inst, threshold) = reduce_binpacking(&bp)?;
    let reduced = InstanceDoc::Scheduling(SchedulingDoc::from_instance(&inst)).to_json();
    if let Some(path) = &args.output {
        fs::write(path, format!("{reduced}\n"))?;
    }
    let stdout = if args.json {
        let value = serde_json::json!({
            "threshold": format_rational(&threshold),
            "instance": serde_json::from_str::<serde_json::Value>(&reduced).expect("valid JSON"),
        });
        serde_json::to_string_pretty(&value).expect("valid JSON") + "\n"
    } else if args.output.is_some() {
        format!("threshold: {}\n", format_rational(&threshold))
    } else {
        format!("threshold: {}\n{reduced}\n", format_rational(&threshold))
    };
    Ok(Output::ok(stdout))
}

fn claimed(sol: &SolutionDoc) -> Result<BigRational, CliError> {
    sol.objective
        .as_ref()
        .map(|o| o.0.clone())
        .ok_or_else(|| CliError::Input("solution has no objective to verify".into()))
}

fn compare(claim: BigRational, actual: BigRational) -> Result<Output, CliError> {
    if claim == actual {
        Ok(Output::ok(format!(
            "verified: objective {}\n",
            format_rational(&actual)
        )))
    } else {
        Err(CliError::Mismatch(format!(
            "claimed objective {}, recomputed {} (difference {})",
            format_rational(&claim),
            format_rational(&actual),
            format_rational(&(&claim - &actual))
        )))
    }
}

fn scheduling_objective(
    inst: &SchedulingInstance,
    sol: &SolutionDoc,
) -> Result<BigRational, CliError> {
    let counts: Vec<Vec<BigUint>> = sol
        .counts
        .as_ref()
        .ok_or_else(|| CliError::Input("solution has no counts to verify".into()))?
        .iter()
        .map(|row| row.iter().map(|c| c.0.clone()).collect())
        .collect();
    Assignment::evaluate(inst, counts)
        .map(|a| a.objective)
        .map_err(|e| CliError::Mismatch(format!("assignment is not a valid schedule: {e}")))
}

fn verify(args: &VerifyArgs) -> Result<Output, CliError> {
    let inst = InstanceDoc::parse(&read(&args.instance)?)?;
    let sol: SolutionDoc = parse_json(&read(&args.solution)?)?;
    let claim = claimed(&sol)?;
    let actual = match &inst {
        InstanceDoc::Scheduling(d) => {
            if sol.problem != d.problem {
                return Err(CliError::Input(format!(
                    "solution is for {}, instance is {}",
                    sol.problem, d.problem
                )));
            }
            scheduling_objective(&d.to_instance()?, &sol)?
        }
        InstanceDoc::BinPacking(d) => {
            let (reduced, _) = reduce_binpacking(&d.to_instance()?)?;
            scheduling_objective(&reduced, &sol)?
        }
        InstanceDoc::NFold(d) => {
            let program = d.to_instance()?;
            let x: Vec<BigInt> = sol
                .x
                .as_ref()
                .ok_or_else(|| CliError::Input("solution has no point to verify".into()))?
                .iter()
                .map(|v| v.0.clone())
                .collect();
            let report = program.check_feasible(&x)?;
            if !report.is_feasible() {
                return Err(CliError::Mismatch(format!(
                    "point violates {} rows and {} bounds",
                    report.rows.len(),
                    report.bounds.len()
                )));
            }
            program.eval_objective(&x)?
        }
    };
    compare(claim, actual)
}
