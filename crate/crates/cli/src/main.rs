//! `tcp-lab`: solve tensor complementarity problems, check tensor
//! properties and run perturbation experiments.
//!
//! Exit codes: 0 success or property holds, 1 property fails or a violation
//! was found, 2 error or inconclusive.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use tcp_core::catalog::{builtin_tensor, golden_suite, Expected};
use tcp_core::io;
use tcp_core::lab::{self, ExperimentReport, FitStatus, LabConfig};
use tcp_core::properties::{self, PropertyReport};
use tcp_core::solver::{self, DEFAULT_SEED};
use tcp_core::{Result, TcpError, TcpInstance, Tensor};

#[derive(Parser, Debug)]
#[command(name = "tcp-lab", version, about = "Tensor complementarity solver and perturbation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the solution set of TCP(A, a).
    Solve(Common),
    /// Check whether TCP(A, 0) has only the zero solution.
    CheckR0(Common),
    /// Check copositivity of A over the simplex.
    CheckCopositive(Common),
    /// Check monotonicity of x -> A x^(m-1) + a.
    CheckMonotone(Common),
    /// Search for a constant vector breaking unique solvability.
    ProbeGus(Common),
    /// Print the component-count bound for order m and dimension n.
    Chi(Common),
    /// Local boundedness of solution sets under (eps, delta) perturbations.
    Boundedness(Common),
    /// Fraction of perturbations of A (at each radius) that stay R0.
    Openness(Common),
    /// Fraction of Gaussian tensors that are R0.
    Genericity(Common),
    /// Upper-semicontinuity probe within radius --eps of (A, a).
    Usc(Common),
    /// Fit of the upper-Hoelder exponent of b -> Sol(A, b) at a.
    Hoelder(Common),
    /// Stability under copositive joint perturbations within --eps.
    Stability(Common),
    /// Print a built-in instance as JSON.
    Example(Common),
    /// Run the closed-form golden cases.
    Golden(Common),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Instance JSON file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Tensor JSON file.
    #[arg(long)]
    tensor: Option<PathBuf>,
    /// Built-in example: ex1, gus, monotone, zero.
    #[arg(long)]
    example: Option<String>,
    /// Constant vector, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV file for experiment rows.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Radii, comma separated.
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
}

fn parse_list(text: &str, flag: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, s)| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| TcpError::Argument(format!("--{flag}: entry {} ('{s}') is not a finite number", i + 1)))
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| TcpError::Load(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        TcpError::Load(msg) => TcpError::Load(format!("{}: {msg}", path.display())),
        other => other,
    })
}

impl Common {
    fn lab_config(&self) -> Result<LabConfig> {
        let mut cfg = LabConfig::default().with_seed(self.seed);
        if let Some(tol) = self.tol {
            cfg.props.solver.tol = tol;
        }
        cfg.props.solver.validate()?;
        Ok(cfg)
    }

    fn a_vector(&self) -> Result<Option<Vec<f64>>> {
        self.a.as_deref().map(|s| parse_list(s, "a")).transpose()
    }

    fn tensor(&self) -> Result<Tensor> {
        if let Some(p) = &self.tensor {
            return with_path(p, io::parse_tensor(&read(p)?));
        }
        if let Some(p) = &self.instance {
            return with_path(p, io::parse_instance(&read(p)?)).map(|i| i.tensor);
        }
        if let Some(name) = &self.example {
            let n = self.n.or_else(|| self.a_vector().ok().flatten().map(|a| a.len())).unwrap_or(2);
            return builtin_tensor(name, self.m.unwrap_or(3), n);
        }
        Err(TcpError::Argument("a tensor is required (--tensor, --instance or --example)".into()))
    }

    fn instance(&self) -> Result<TcpInstance> {
        if let Some(p) = &self.instance {
            let mut inst = with_path(p, io::parse_instance(&read(p)?))?;
            if let Some(a) = self.a_vector()? {
                inst = TcpInstance::new(inst.tensor, a)?;
            }
            return Ok(inst);
        }
        let a = self.a_vector()?.ok_or_else(|| TcpError::Argument("--a is required unless --instance is given".into()))?;
        TcpInstance::new(self.tensor()?, a)
    }

    fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
        v.ok_or_else(|| TcpError::Argument(format!("--{flag} is required")))
    }

    fn emit(&self, value: &Value) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| TcpError::Argument(e.to_string()))? + "\n";
        match &self.out {
            Some(p) => fs::write(p, text).map_err(|e| TcpError::Load(format!("{}: {e}", p.display()))),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| TcpError::Load(e.to_string())),
        }
    }

    fn emit_report(&self, rep: &ExperimentReport) -> Result<()> {
        if let Some(p) = &self.csv {
            let f = fs::File::create(p).map_err(|e| TcpError::Load(format!("{}: {e}", p.display())))?;
            io::write_report_csv(rep, f)?;
        }
        self.emit(&io::experiment_report_to_json(rep)?)
    }
}

fn property_exit(c: &Common, rep: &PropertyReport) -> Result<u8> {
    c.emit(&io::property_report_to_json(rep)?)?;
    Ok(rep.verdict.exit_code() as u8)
}

fn experiment_exit(rep: &ExperimentReport) -> u8 {
    let s = &rep.summary;
    if s.vacuous || s.inconclusive {
        2
    } else if s.violations.unwrap_or(0) > 0 || s.unbounded_count.unwrap_or(0) > 0 {
        1
    } else if s.fit_status == Some(FitStatus::Undefined) {
        2
    } else {
        0
    }
}

fn golden(c: &Common) -> Result<u8> {
    let cfg = c.lab_config()?.props.solver;
    let outcomes = golden_suite(&cfg);
    let mut rows = Vec::new();
    for o in &outcomes {
        let expected = match &o.case.expected {
            Expected::Points(p) => json!({"points": p}),
            Expected::PointsAndContinuum(p) => json!({"points": p, "continuum": true}),
            Expected::PointsAndRays(p, r) => json!({"points": p, "rays": r}),
        };
        let computed = o.computed.as_ref().map(io::solution_set_to_json).unwrap_or(Value::Null);
        eprintln!("{} {:<24} {}", if o.passed { "PASS" } else { "FAIL" }, o.case.name, o.detail);
        rows.push(json!({"name": o.case.name, "example": o.case.example, "a": o.case.a, "passed": o.passed, "detail": o.detail, "expected": expected, "computed": computed}));
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    c.emit(&json!({"cases": rows, "failed": failed}))?;
    Ok(u8::from(failed > 0))
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Solve(c) => {
            let sol = solver::solve(&c.instance()?, &c.lab_config()?.props.solver)?;
            c.emit(&io::solution_set_to_json(&sol))?;
            Ok(0)
        }
        Command::CheckR0(c) => property_exit(&c, &properties::check_r0(&c.tensor()?, &c.lab_config()?.props.solver)?),
        Command::CheckCopositive(c) => property_exit(&c, &properties::check_copositive(&c.tensor()?, &c.lab_config()?.props)?),
        Command::CheckMonotone(c) => {
            let t = c.tensor()?;
            let a = c.a_vector()?.unwrap_or_else(|| vec![0.0; t.dim()]);
            property_exit(&c, &properties::check_monotone(&t, &a, &c.lab_config()?.props)?)
        }
        Command::ProbeGus(c) => property_exit(&c, &properties::probe_gus(&c.tensor()?, &c.lab_config()?.props)?),
        Command::Chi(c) => {
            let chi = solver::chi_bound(Common::need(c.m, "m")?, Common::need(c.n, "n")?)?;
            c.emit(&json!(chi))?;
            Ok(0)
        }
        Command::Boundedness(c) => {
            let inst = c.instance()?;
            let rep = lab::local_boundedness_probe(&inst.tensor, &inst.a, c.eps.unwrap_or(0.0), c.delta.unwrap_or(0.0), c.samples.unwrap_or(100), &c.lab_config()?)?;
            c.emit_report(&rep)?;
            Ok(experiment_exit(&rep))
        }
        Command::Openness(c) => {
            let radii = parse_list(c.radii.as_deref().unwrap_or("0.01,0.02,0.05,0.1"), "radii")?;
            let rep = lab::r0_openness_probe(&c.tensor()?, &radii, c.samples.unwrap_or(50), &c.lab_config()?)?;
            c.emit_report(&rep)?;
            Ok(experiment_exit(&rep))
        }
        Command::Genericity(c) => {
            let rep = lab::genericity_sample(c.m.unwrap_or(3), c.n.unwrap_or(2), c.samples.unwrap_or(200), &c.lab_config()?)?;
            c.emit_report(&rep)?;
            Ok(if rep.summary.fraction.is_none() { 2 } else { 0 })
        }
        Command::Usc(c) => {
            let rep = lab::usc_probe(&c.instance()?, Common::need(c.eps, "eps")?, c.samples.unwrap_or(100), &c.lab_config()?)?;
            c.emit_report(&rep)?;
            Ok(experiment_exit(&rep))
        }
        Command::Hoelder(c) => {
            let inst = c.instance()?;
            let radii = parse_list(c.radii.as_deref().unwrap_or("0.2,0.1,0.05,0.02,0.01"), "radii")?;
            let rep = lab::hoelder_fit(&inst.tensor, &inst.a, &radii, c.samples.unwrap_or(20), &c.lab_config()?)?;
            c.emit_report(&rep)?;
            Ok(experiment_exit(&rep))
        }
        Command::Stability(c) => {
            let inst = c.instance()?;
            let rep = lab::stability_inclusion_check(&inst.tensor, &inst.a, Common::need(c.eps, "eps")?, c.samples.unwrap_or(50), &c.lab_config()?)?;
            c.emit_report(&rep)?;
            Ok(experiment_exit(&rep))
        }
        Command::Example(c) => {
            if c.example.is_none() {
                return Err(TcpError::Argument("--example is required".into()));
            }
            let inst = match c.a_vector()? {
                Some(a) => TcpInstance::new(c.tensor()?, a)?,
                None => TcpInstance::homogeneous(c.tensor()?),
            };
            c.emit(&io::instance_to_json(&inst))?;
            Ok(0)
        }
        Command::Golden(c) => golden(&c),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("TCP_LAB_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| TcpError::Argument(format!("TCP_LAB_THREADS: expected a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| TcpError::Resource(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
