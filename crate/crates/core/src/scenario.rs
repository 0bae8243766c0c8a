//! Scenario files: one JSON document naming a potential, a problem and how
//! to integrate and write it.
//!
//! ```json
//! {
//!   "potential": {"kind": "newtonian", "k": 1.0},
//!   "problem": {"kind": "central", "q": [1, 0, 0, 0], "p": [0, 1, 0, 0.5]},
//!   "integrator": {"dt": 0.001, "steps": 10000},
//!   "output": {"path": "orbit.csv", "format": "csv"}
//! }
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::central_force::integrate_central;
use crate::error::{Error, Result};
use crate::geom4::{GroupVelocity, Vec4};
use crate::integrator::{IntegratorSettings, Outcome};
use crate::nbody::{integrate, Configuration, PhaseState};
use crate::ngons::{build, classify, solve_re_radii, NGonSpec};
use crate::output::{to_csv, to_json};
use crate::potentials::{PairPotential, Potential};
use crate::rel_equilibria::{re_residual, re_tolerance, solve_balanced_omega};
use crate::stability::{analyse_equilateral, sweep};
use crate::threebody::{equilateral_equilibrium, integrate_reduced, reduce, ReducedState, ThreeBodyMasses};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NGonAction {
    Build,
    Classify,
    SolveRe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bodies {
    pub masses: Vec<f64>,
    pub positions: Vec<[f64; 4]>,
    #[serde(default)]
    pub momenta: Option<Vec<[f64; 4]>>,
}

impl Bodies {
    pub fn configuration(&self) -> Result<Configuration> {
        Configuration::new(self.masses.clone(), self.positions.iter().map(|q| Vec4::from(*q)).collect())
    }

    pub fn state(&self) -> Result<PhaseState> {
        let config = self.configuration()?;
        let momenta = match &self.momenta {
            Some(p) => p.iter().map(|x| Vec4::from(*x)).collect(),
            None => vec![Vec4::zeros(); config.len()],
        };
        PhaseState::new(config, momenta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Problem {
    Central {
        q: [f64; 4],
        p: [f64; 4],
    },
    Nbody {
        masses: Vec<f64>,
        positions: Vec<[f64; 4]>,
        momenta: Vec<[f64; 4]>,
    },
    FindRe {
        masses: Vec<f64>,
        positions: Vec<[f64; 4]>,
        #[serde(default)]
        omega: Option<[f64; 2]>,
    },
    Ngon {
        action: NGonAction,
        a1: u32,
        b1: u32,
        a2: u32,
        b2: u32,
        r1: f64,
        r2: f64,
        #[serde(default)]
        c1: Option<f64>,
        #[serde(default)]
        c2: Option<f64>,
    },
    ThreebodyEquilibrium {
        mu1: f64,
        mu2: f64,
    },
    ThreebodyReduce {
        masses: Vec<f64>,
        positions: Vec<[f64; 4]>,
        momenta: Vec<[f64; 4]>,
    },
    ThreebodySimulate {
        #[serde(default)]
        masses: Option<[f64; 3]>,
        state: ReducedState,
    },
    Stability {
        mu: f64,
        gamma: f64,
    },
    StabilitySweep {
        mus: Vec<f64>,
        gammas: Vec<f64>,
    },
}

impl Problem {
    fn needs_integrator(&self) -> bool {
        matches!(self, Problem::Central { .. } | Problem::Nbody { .. } | Problem::ThreebodySimulate { .. })
    }

    fn default_format(&self) -> Format {
        match self {
            Problem::Central { .. } | Problem::Nbody { .. } | Problem::ThreebodySimulate { .. } => Format::Csv,
            Problem::StabilitySweep { .. } => Format::Csv,
            _ => Format::Json,
        }
    }
}

fn default_mass_weighted() -> bool {
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub potential: Potential,
    /// Scale each pair interaction by `m_j m_k`.
    #[serde(default = "default_mass_weighted")]
    pub mass_weighted: bool,
    pub problem: Problem,
    #[serde(default)]
    pub integrator: Option<IntegratorSettings>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn pair_potential(&self) -> PairPotential {
        PairPotential::new(self.potential, self.mass_weighted)
    }

    pub fn format(&self) -> Format {
        self.output.as_ref().and_then(|o| o.format).unwrap_or_else(|| self.problem.default_format())
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        if let Some(i) = &self.integrator {
            i.validate()?;
        } else if self.problem.needs_integrator() {
            return Err(Error::InvalidInput("this problem needs an \"integrator\" section".into()));
        }
        match &self.problem {
            Problem::Nbody { masses, positions, momenta } | Problem::ThreebodyReduce { masses, positions, momenta } => {
                Bodies { masses: masses.clone(), positions: positions.clone(), momenta: Some(momenta.clone()) }
                    .state()?;
            }
            Problem::FindRe { masses, positions, .. } => {
                Bodies { masses: masses.clone(), positions: positions.clone(), momenta: None }.configuration()?;
            }
            Problem::Ngon { a1, b1, a2, b2, r1, r2, .. } => NGonSpec::new(*a1, *b1, *a2, *b2, *r1, *r2).validate()?,
            Problem::ThreebodySimulate { masses: Some(m), .. } => {
                ThreeBodyMasses::new(m[0], m[1], m[2])?;
            }
            Problem::StabilitySweep { mus, gammas } if mus.is_empty() || gammas.is_empty() => {
                return Err(Error::InvalidInput("sweep grid is empty".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

/// A completed run: the document to write and, for trajectories cut short,
/// where they stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub format: Format,
    pub body: String,
    pub outcome: Option<Outcome>,
}

impl RunOutput {
    pub fn collided(&self) -> bool {
        self.outcome.is_some_and(|o| o.is_collision())
    }
}

const CENTRAL_HEADER: [&str; 14] =
    ["t", "x", "y", "z", "w", "px", "py", "pz", "pw", "energy", "mu1", "mu2", "A_xy", "A_zw"];
const NBODY_HEADER: [&str; 13] = ["t", "body", "x", "y", "z", "w", "px", "py", "pz", "pw", "energy", "mu1", "mu2"];
const REDUCED_HEADER: [&str; 16] = [
    "t", "R1", "R2", "S1", "S2", "Phi1", "Phi2", "P_R1", "P_R2", "P_S1", "P_S2", "P_Phi1", "P_Phi2", "mu1", "mu2",
    "energy",
];

fn json_or<T: Serialize>(format: Format, value: &T, csv: impl FnOnce() -> String) -> Result<String> {
    match format {
        Format::Json => to_json(value),
        Format::Csv => Ok(csv()),
    }
}

fn require_json(format: Format, what: &str) -> Result<()> {
    if format == Format::Csv {
        return Err(Error::InvalidInput(format!("{what} has no CSV form")));
    }
    Ok(())
}

/// Run a validated scenario.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let format = cfg.format();
    let pp = cfg.pair_potential();
    let settings = cfg.integrator.unwrap_or(IntegratorSettings::new(1e-3, 0));
    let mut outcome = None;
    let body = match &cfg.problem {
        Problem::Central { q, p } => {
            let traj = integrate_central(Vec4::from(*q), Vec4::from(*p), &cfg.potential, &settings)?;
            outcome = Some(traj.outcome);
            json_or(format, &traj, || {
                to_csv(
                    &CENTRAL_HEADER,
                    traj.samples.iter().map(|s| {
                        let mut row = vec![s.t];
                        row.extend_from_slice(&s.q);
                        row.extend_from_slice(&s.p);
                        row.extend_from_slice(&[s.energy, s.mu.mu1, s.mu.mu2, s.a_xy, s.a_zw]);
                        row
                    }),
                )
            })?
        }
        Problem::Nbody { masses, positions, momenta } => {
            let s0 = Bodies { masses: masses.clone(), positions: positions.clone(), momenta: Some(momenta.clone()) }
                .state()?;
            let traj = integrate(&s0, &pp, &settings)?;
            outcome = Some(traj.outcome);
            json_or(format, &traj, || {
                to_csv(
                    &NBODY_HEADER,
                    traj.samples.iter().flat_map(|s| {
                        (0..s.positions.len()).map(move |b| {
                            let mut row = vec![s.t, b as f64];
                            row.extend_from_slice(&s.positions[b]);
                            row.extend_from_slice(&s.momenta[b]);
                            row.extend_from_slice(&[s.energy, s.mu.mu1, s.mu.mu2]);
                            row
                        })
                    }),
                )
            })?
        }
        Problem::FindRe { masses, positions, omega } => {
            require_json(format, "a relative equilibrium")?;
            let c = Bodies { masses: masses.clone(), positions: positions.clone(), momenta: None }.configuration()?;
            match omega {
                None => to_json(&solve_balanced_omega(&c, &pp)?)?,
                Some([w1, w2]) => {
                    let r = re_residual(&c, GroupVelocity::new(*w1, *w2), &pp)?;
                    let residual_norm = r.iter().map(|x| x.norm()).fold(0.0, f64::max);
                    let is_re = residual_norm < re_tolerance(&c);
                    to_json(&serde_json::json!({ "omega": [w1, w2], "residual_norm": residual_norm, "is_re": is_re }))?
                }
            }
        }
        Problem::Ngon { action, a1, b1, a2, b2, r1, r2, c1, c2 } => {
            require_json(format, "a polygon")?;
            let spec = NGonSpec::new(*a1, *b1, *a2, *b2, *r1, *r2);
            match action {
                NGonAction::Build => {
                    let c = build(&spec)?;
                    let pos: Vec<[f64; 4]> = c.positions.iter().map(|q| (*q).into()).collect();
                    to_json(&serde_json::json!({ "masses": c.masses, "positions": pos }))?
                }
                NGonAction::Classify => to_json(&classify(&spec)?)?,
                NGonAction::SolveRe => {
                    let (c1, c2) = match (c1, c2) {
                        (Some(a), Some(b)) => (*a, *b),
                        _ => return Err(Error::InvalidInput("solve_re needs c1 and c2".into())),
                    };
                    to_json(&solve_re_radii(&spec, c1, c2, &cfg.potential)?)?
                }
            }
        }
        Problem::ThreebodyEquilibrium { mu1, mu2 } => {
            require_json(format, "an equilibrium")?;
            to_json(&equilateral_equilibrium(*mu1, *mu2, &cfg.potential)?)?
        }
        Problem::ThreebodyReduce { masses, positions, momenta } => {
            require_json(format, "a reduced state")?;
            let s = Bodies { masses: masses.clone(), positions: positions.clone(), momenta: Some(momenta.clone()) }
                .state()?;
            let (rs, psi) = reduce(&s)?;
            to_json(&serde_json::json!({ "state": rs, "psi": psi }))?
        }
        Problem::ThreebodySimulate { masses, state } => {
            let m = match masses {
                Some(m) => ThreeBodyMasses::new(m[0], m[1], m[2])?,
                None => ThreeBodyMasses::equal(),
            };
            let traj = integrate_reduced(state, &m, &pp, &settings)?;
            outcome = Some(traj.outcome);
            json_or(format, &traj, || {
                to_csv(
                    &REDUCED_HEADER,
                    traj.samples.iter().map(|s| {
                        let mut row = vec![s.t];
                        row.extend_from_slice(&s.state.to_array());
                        row.extend_from_slice(&[s.state.mu.mu1, s.state.mu.mu2, s.energy]);
                        row
                    }),
                )
            })?
        }
        Problem::Stability { mu, gamma } => {
            require_json(format, "a spectral report")?;
            let (an, _, _) = analyse_equilateral(*mu, *gamma, &cfg.potential)?;
            to_json(&an)?
        }
        Problem::StabilitySweep { mus, gammas } => {
            let rows = sweep(mus, gammas, &cfg.potential)?;
            match format {
                Format::Json => to_json(&rows)?,
                Format::Csv => sweep_csv(&rows),
            }
        }
    };
    Ok(RunOutput { format, body, outcome })
}

pub fn sweep_csv(rows: &[crate::stability::SweepRow]) -> String {
    let mut out = String::from("mu,gamma,det_f,dim_ker,dim_ker2,verdict\n");
    for r in rows {
        let verdict = match r.verdict {
            crate::stability::Verdict::Unstable => "unstable",
            crate::stability::Verdict::Indeterminate => "indeterminate",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            crate::output::format_float(r.mu),
            crate::output::format_float(r.gamma),
            crate::output::format_float(r.det_f),
            r.dim_ker,
            r.dim_ker2,
            verdict
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_keys() {
        let text = r#"{"potential": {"kind": "newtonian", "k": 1}, "problem": {"kind": "stability", "mu": 3, "gamma": 1}, "extra": 1}"#;
        assert!(matches!(ScenarioConfig::from_json(text), Err(Error::InvalidInput(_))));
        let text = r#"{"potential": {"kind": "newtonian", "k": 1, "alpha": 2}, "problem": {"kind": "stability", "mu": 3, "gamma": 1}}"#;
        assert!(ScenarioConfig::from_json(text).is_err());
    }

    #[test]
    fn rejects_negative_mass() {
        let text = r#"{"potential": {"kind": "newtonian", "k": 1},
            "problem": {"kind": "nbody", "masses": [1, -1], "positions": [[0,0,0,0],[1,0,0,0]], "momenta": [[0,0,0,0],[0,0,0,0]]},
            "integrator": {"dt": 0.01, "steps": 10}}"#;
        let e = ScenarioConfig::from_json(text).unwrap_err();
        assert_eq!(e.kind(), crate::error::ErrorKind::Validation);
    }

    #[test]
    fn trajectory_needs_integrator() {
        let text = r#"{"potential": {"kind": "newtonian", "k": 1}, "problem": {"kind": "central", "q": [1,0,0,0], "p": [0,1,0,0]}}"#;
        assert!(ScenarioConfig::from_json(text).is_err());
    }

    #[test]
    fn equilibrium_runs() {
        let text = r#"{"potential": {"kind": "newtonian", "k": 1}, "problem": {"kind": "threebody_equilibrium", "mu1": 3, "mu2": 3}}"#;
        let out = run(&ScenarioConfig::from_json(text).unwrap()).unwrap();
        assert_eq!(out.format, Format::Json);
        let v: serde_json::Value = serde_json::from_str(&out.body).unwrap();
        assert!(v["r0"].as_f64().unwrap() > 0.0);
        assert!(!out.collided());
    }

    #[test]
    fn radial_infall_reports_collision() {
        let text = r#"{"potential": {"kind": "newtonian", "k": 1}, "problem": {"kind": "central", "q": [1,0,0,0], "p": [0,0,0,0]},
            "integrator": {"dt": 0.001, "steps": 5000}}"#;
        let out = run(&ScenarioConfig::from_json(text).unwrap()).unwrap();
        assert!(out.collided());
    }
}
