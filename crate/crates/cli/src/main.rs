use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nbody4d::integrator::Outcome;
use nbody4d::output::{to_json, write_atomic};
use nbody4d::potentials::Potential;
use nbody4d::scenario::{run, NGonAction, Problem, RunOutput, ScenarioConfig};
use nbody4d::threebody::{distances, find_reduced_equilibrium, re_branch, ReBranch, ReducedState, ThreeBodyMasses};
use nbody4d::{Error, ErrorKind, Momentum, PairPotential};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Dynamics of point masses in R^4 with the double planar rotation symmetry.
#[derive(Parser)]
#[command(name = "nbody4d", version, about)]
struct Cli {
    /// Scenario file (JSON); required by the simulate and find-re commands
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the result here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for commands that draw random data
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Residual tolerance for searches
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run any scenario file
    Run,
    /// The one-body central force problem
    #[command(name = "central-force")]
    CentralForce {
        #[command(subcommand)]
        action: SimulateOnly,
    },
    /// The n-body problem
    Nbody {
        #[command(subcommand)]
        action: SimulateOnly,
    },
    /// Test a configuration for a relative equilibrium
    #[command(name = "find-re")]
    FindRe {
        /// Check these rates instead of solving for them
        #[arg(long, num_args = 2, value_names = ["W1", "W2"], allow_negative_numbers = true)]
        omega: Option<Vec<f64>>,
    },
    /// Regular polygons in R^4
    Ngon {
        #[command(subcommand)]
        action: NGonCommand,
    },
    /// The reduced three-body problem
    #[command(name = "three-body")]
    ThreeBody {
        #[command(subcommand)]
        action: ThreeBodyCommand,
    },
    /// Linear analysis of the equilateral relative equilibrium
    Stability(StabilityArgs),
}

#[derive(Subcommand)]
enum SimulateOnly {
    /// Integrate the scenario given by --config
    Simulate,
}

#[derive(Args, Clone)]
struct NGonArgs {
    #[arg(long)]
    a1: u32,
    #[arg(long)]
    b1: u32,
    #[arg(long)]
    a2: u32,
    #[arg(long)]
    b2: u32,
    #[arg(long, default_value_t = 1.0)]
    r1: f64,
    #[arg(long, default_value_t = 1.0)]
    r2: f64,
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c2: Option<f64>,
    #[arg(long, default_value = "newtonian", value_parser = parse_potential)]
    potential: Potential,
}

#[derive(Subcommand)]
enum NGonCommand {
    Build(NGonArgs),
    Classify(NGonArgs),
    SolveRe(NGonArgs),
}

#[derive(Args)]
struct MuArgs {
    #[arg(long, allow_negative_numbers = true)]
    mu1: f64,
    #[arg(long, allow_negative_numbers = true)]
    mu2: f64,
    #[arg(long, default_value = "newtonian", value_parser = parse_potential)]
    potential: Potential,
}

#[derive(Subcommand)]
enum ThreeBodyCommand {
    /// Reduce the three-body state in --config
    Reduce,
    /// Integrate the reduced state in --config
    Simulate,
    /// Equal-mass equilateral equilibrium for the given momenta
    Equilibrium(MuArgs),
    /// Newton searches for equilibria from random seeds
    Search {
        /// Number of non-collinear equilibria to collect
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 1000)]
        max_attempts: usize,
        #[arg(long, default_value = "newtonian", value_parser = parse_potential)]
        potential: Potential,
    },
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct StabilityArgs {
    #[command(subcommand)]
    sweep: Option<SweepCommand>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value = "newtonian", value_parser = parse_potential)]
    potential: Potential,
}

#[derive(Subcommand)]
enum SweepCommand {
    /// Grid over (μ, γ), written as CSV
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2")]
        mus: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2")]
        gammas: Vec<f64>,
        #[arg(long, default_value = "newtonian", value_parser = parse_potential)]
        potential: Potential,
    },
}

/// `newtonian[:k]`, `jacobi[:k]`, `harmonic[:k]`, `homogeneous:k:alpha`, or
/// a JSON object.
fn parse_potential(s: &str) -> Result<Potential, String> {
    let s = s.trim();
    let v = if s.starts_with('{') {
        serde_json_potential(s)?
    } else {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize, default: Option<f64>| -> Result<f64, String> {
            match parts.get(i) {
                Some(t) => t.parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}")),
                None => default.ok_or_else(|| format!("{s:?} is missing a parameter")),
            }
        };
        let expect = |n: usize| {
            if parts.len() > n {
                Err(format!("{s:?} has too many parameters"))
            } else {
                Ok(())
            }
        };
        match parts[0] {
            "newtonian" => {
                expect(2)?;
                Potential::newtonian(num(1, Some(1.0))?)
            }
            "jacobi" => {
                expect(2)?;
                Potential::jacobi(num(1, Some(1.0))?)
            }
            "harmonic" => {
                expect(2)?;
                Potential::harmonic(num(1, Some(1.0))?)
            }
            "homogeneous" => {
                expect(3)?;
                Potential::homogeneous(num(1, None)?, num(2, None)?)
            }
            other => return Err(format!("unknown potential {other:?}")),
        }
    };
    v.validate().map_err(|e| e.to_string())?;
    Ok(v)
}

fn serde_json_potential(s: &str) -> Result<Potential, String> {
    // reuse the scenario parser so both forms accept the same schema
    let doc = format!(r#"{{"potential": {s}, "problem": {{"kind": "stability", "mu": 1, "gamma": 1}}}}"#);
    ScenarioConfig::from_json(&doc).map(|c| c.potential).map_err(|e| e.to_string())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Validation => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Domain => 4,
    }
}

fn load_config(path: Option<&Path>) -> nbody4d::Result<ScenarioConfig> {
    let path = path.ok_or_else(|| Error::InvalidInput("this command needs --config".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

fn emit(body: &str, out: Option<&Path>) -> nbody4d::Result<()> {
    match out {
        Some(p) => write_atomic(p, body.as_bytes())
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct CollisionStop {
    status: &'static str,
    time: f64,
    step: usize,
    min_distance: f64,
}

/// Writes the result; a trajectory stopped by a collision also prints a
/// record on standard error and exits with the numerical-failure code.
fn finish(result: RunOutput, out: Option<&Path>) -> nbody4d::Result<ExitCode> {
    emit(&result.body, out)?;
    if let Some(Outcome::Collision { time, step, min_distance }) = result.outcome {
        let record = CollisionStop { status: "collision", time, step, min_distance };
        eprint!("{}", to_json(&record)?);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_config(cli: &Cli, want: Option<fn(&Problem) -> bool>) -> nbody4d::Result<ExitCode> {
    let cfg = load_config(cli.config.as_deref())?;
    if let Some(check) = want {
        if !check(&cfg.problem) {
            return Err(Error::InvalidInput("the scenario's problem does not match this command".into()));
        }
    }
    let out = cli.out.clone().or_else(|| cfg.output.as_ref().map(|o| o.path.clone()));
    finish(run(&cfg)?, out.as_deref())
}

fn inline(potential: Potential, problem: Problem) -> ScenarioConfig {
    ScenarioConfig { potential, mass_weighted: false, problem, integrator: None, output: None }
}

#[derive(Serialize)]
struct SearchHit {
    mu: Momentum,
    state: ReducedState,
    distances: [f64; 3],
    isosceles_defect: f64,
}

#[derive(Serialize)]
struct SearchReport {
    attempts: usize,
    found: usize,
    max_isosceles_defect: f64,
    solutions: Vec<SearchHit>,
}

/// A random non-collinear seed near the scale of the equilibria.
fn random_seed<R: Rng>(rng: &mut R) -> ReducedState {
    let mu = Momentum::new(rng.random_range(0.5..3.0), rng.random_range(0.5..3.0));
    let mut z = [0.0; 12];
    for v in z.iter_mut().take(4) {
        *v = rng.random_range(0.5..3.0);
    }
    z[4] = rng.random_range(0.3..2.8);
    z[5] = -rng.random_range(0.3..2.8);
    z[10] = mu.mu1 * rng.random_range(0.2..0.8);
    z[11] = mu.mu2 * rng.random_range(0.2..0.8);
    ReducedState::from_array(&z, mu)
}

fn search(potential: Potential, count: usize, max_attempts: usize, seed: u64, tol: f64) -> nbody4d::Result<SearchReport> {
    let m = ThreeBodyMasses::equal();
    let pp = PairPotential::from(potential);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut solutions = Vec::new();
    let mut attempts = 0;
    while solutions.len() < count && attempts < max_attempts {
        attempts += 1;
        let Ok(eq) = find_reduced_equilibrium(&random_seed(&mut rng), &m, &pp, tol, 300) else {
            continue;
        };
        if re_branch(&eq, &m, &pp, 1e-8)? == ReBranch::Collinear {
            continue;
        }
        let d = distances(&eq, &m)?;
        solutions.push(SearchHit { mu: eq.mu, state: eq, distances: d, isosceles_defect: (d[1] - d[2]).abs() });
    }
    let max_isosceles_defect = solutions.iter().map(|s| s.isosceles_defect).fold(0.0, f64::max);
    Ok(SearchReport { attempts, found: solutions.len(), max_isosceles_defect, solutions })
}

fn dispatch(cli: &Cli) -> nbody4d::Result<ExitCode> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Run => run_config(cli, None),
        Command::CentralForce { action: SimulateOnly::Simulate } => {
            run_config(cli, Some(|p| matches!(p, Problem::Central { .. })))
        }
        Command::Nbody { action: SimulateOnly::Simulate } => run_config(cli, Some(|p| matches!(p, Problem::Nbody { .. }))),
        Command::FindRe { omega } => {
            let mut cfg = load_config(cli.config.as_deref())?;
            let (masses, positions) = match &cfg.problem {
                Problem::FindRe { masses, positions, .. } | Problem::Nbody { masses, positions, .. } => {
                    (masses.clone(), positions.clone())
                }
                _ => return Err(Error::InvalidInput("find-re needs a find_re or nbody scenario".into())),
            };
            let omega = match omega {
                Some(w) => Some([w[0], w[1]]),
                None => match &cfg.problem {
                    Problem::FindRe { omega, .. } => *omega,
                    _ => None,
                },
            };
            cfg.problem = Problem::FindRe { masses, positions, omega };
            cfg.integrator = None;
            cfg.output = None;
            finish(run(&cfg)?, out)
        }
        Command::Ngon { action } => {
            let (kind, a) = match action {
                NGonCommand::Build(a) => (NGonAction::Build, a),
                NGonCommand::Classify(a) => (NGonAction::Classify, a),
                NGonCommand::SolveRe(a) => (NGonAction::SolveRe, a),
            };
            let problem = Problem::Ngon {
                action: kind,
                a1: a.a1,
                b1: a.b1,
                a2: a.a2,
                b2: a.b2,
                r1: a.r1,
                r2: a.r2,
                c1: a.c1,
                c2: a.c2,
            };
            finish(run(&inline(a.potential, problem))?, out)
        }
        Command::ThreeBody { action } => match action {
            ThreeBodyCommand::Reduce => run_config(cli, Some(|p| matches!(p, Problem::ThreebodyReduce { .. }))),
            ThreeBodyCommand::Simulate => run_config(cli, Some(|p| matches!(p, Problem::ThreebodySimulate { .. }))),
            ThreeBodyCommand::Equilibrium(a) => {
                let problem = Problem::ThreebodyEquilibrium { mu1: a.mu1, mu2: a.mu2 };
                finish(run(&inline(a.potential, problem))?, out)
            }
            ThreeBodyCommand::Search { count, max_attempts, potential } => {
                let report = search(*potential, *count, *max_attempts, cli.seed, cli.tol.unwrap_or(1e-11))?;
                emit(&to_json(&report)?, out)?;
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Stability(args) => match &args.sweep {
            Some(SweepCommand::Sweep { mus, gammas, potential }) => {
                let problem = Problem::StabilitySweep { mus: mus.clone(), gammas: gammas.clone() };
                finish(run(&inline(*potential, problem))?, out)
            }
            None => {
                let (Some(mu), Some(gamma)) = (args.mu, args.gamma) else {
                    return Err(Error::InvalidInput("stability needs --mu and --gamma".into()));
                };
                finish(run(&inline(args.potential, Problem::Stability { mu, gamma }))?, out)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
