use std::f64::consts::TAU;
use std::time::Instant;

use qdcert_core::{
    certify, certify_action, permutation_group, ActionConfig, Band, BandFunction, CertifyConfig, CompactGroupModel,
    Complex64, IsometricAction, KernelChoice, PipelineOptions, SpaceFunction, UcpCertificate,
};
use sha2::{Digest, Sha256};

use crate::files::{load_group_table, load_metric_space};
use crate::report::{Report, ReportError, SweepRow};
use crate::scenario::{ActionSpec, ActionTarget, FunctionSpec, GroupSpec, Scenario, ScenarioError, Target};

pub const DEFAULT_MAX_DIM: usize = 512;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Overrides the scenario's `max_dim`.
    pub max_dim: Option<usize>,
    /// Record wall time in sweep rows. Off by default so reports stay
    /// byte-identical across runs.
    pub timing: bool,
}

#[derive(Debug)]
enum RunError {
    Scenario(ScenarioError),
    Core(qdcert_core::Error),
}

impl RunError {
    fn entry(&self, id: &str) -> ReportError {
        let (code, message) = match self {
            RunError::Scenario(e) => (e.code(), e.to_string()),
            RunError::Core(e) => (e.code(), e.to_string()),
        };
        ReportError { id: id.into(), code: code.into(), message }
    }
}

impl From<ScenarioError> for RunError {
    fn from(e: ScenarioError) -> Self {
        RunError::Scenario(e)
    }
}

impl From<qdcert_core::Error> for RunError {
    fn from(e: qdcert_core::Error) -> Self {
        RunError::Core(e)
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> RunError {
    RunError::Scenario(ScenarioError::Validation { field, message: message.into() })
}

/// A scenario with its files read and its functions built.
enum Prepared {
    Translation { group: CompactGroupModel, family: Vec<BandFunction> },
    Action { action: IsometricAction, family: Vec<SpaceFunction>, delta: f64, probe: usize },
}

fn build_group(spec: &GroupSpec) -> Result<CompactGroupModel, RunError> {
    Ok(match spec {
        GroupSpec::Torus(d) => CompactGroupModel::torus(*d)?,
        GroupSpec::Cyclic(n) => CompactGroupModel::cyclic(*n)?,
        GroupSpec::Symmetric(n) => {
            if *n == 0 || *n > 6 {
                return Err(invalid("group", "symmetric(n) is supported for 1 ≤ n ≤ 6"));
            }
            let swap: Vec<usize> = (0..*n).map(|i| if *n > 1 && i < 2 { 1 - i } else { i }).collect();
            let cycle: Vec<usize> = (0..*n).map(|i| (i + 1) % n).collect();
            permutation_group(&[swap, cycle])?.0
        }
        GroupSpec::Table(path) => CompactGroupModel::finite(&load_group_table(path)?)?,
    })
}

fn torus_function(dim: usize, spec: &FunctionSpec) -> Result<BandFunction, RunError> {
    match spec {
        FunctionSpec::Exp(j) => {
            if dim == 1 && j[1] != 0 {
                return Err(invalid("functions", "exp takes one frequency on a one-dimensional torus"));
            }
            Ok(BandFunction::exponential(dim, *j))
        }
        FunctionSpec::Const(c) => Ok(BandFunction::constant(Band::torus(dim, 0), *c)),
        FunctionSpec::Coeffs(v) => {
            let side = (1..=v.len()).find(|s| s.pow(dim as u32) >= v.len()).unwrap_or(1);
            if side.pow(dim as u32) != v.len() || side % 2 == 0 {
                return Err(invalid("functions", format!("{} coefficients do not fill a symmetric box on T^{dim}", v.len())));
            }
            Ok(BandFunction::from_data(Band::torus(dim, side / 2), v.clone())?)
        }
        FunctionSpec::Values(_) => Err(invalid("functions", "values(...) needs a finite group or space")),
    }
}

fn finite_values(order: usize, cyclic: bool, spec: &FunctionSpec) -> Result<Vec<Complex64>, RunError> {
    match spec {
        FunctionSpec::Exp(j) if cyclic && j[1] == 0 => {
            Ok((0..order).map(|g| Complex64::from_polar(1.0, TAU * (j[0] * g as i64) as f64 / order as f64)).collect())
        }
        FunctionSpec::Exp(_) => Err(invalid("functions", "exp(j) on a finite domain needs a cyclic group")),
        FunctionSpec::Const(c) => Ok(vec![*c; order]),
        FunctionSpec::Values(v) if v.len() == order => Ok(v.clone()),
        FunctionSpec::Values(v) => Err(invalid("functions", format!("{} values given for {order} points", v.len()))),
        FunctionSpec::Coeffs(_) => Err(invalid("functions", "coeffs(...) needs a torus")),
    }
}

fn prepare(scenario: &Scenario) -> Result<Prepared, RunError> {
    match &scenario.target {
        Target::Translation(spec) => {
            let group = build_group(spec)?;
            let family = scenario
                .functions
                .iter()
                .map(|(_, f)| match group.order() {
                    Some(order) => {
                        Ok(BandFunction::from_values(finite_values(order, matches!(spec, GroupSpec::Cyclic(_)), f)?))
                    }
                    None => torus_function(group.torus_dim().unwrap_or(1), f),
                })
                .collect::<Result<_, _>>()?;
            Ok(Prepared::Translation { group, family })
        }
        Target::Action(ActionTarget { spec, delta, probe }) => {
            let (action, family) = match spec {
                ActionSpec::Rotation { dim, generators, irrational } => {
                    let action = IsometricAction::rotation(*dim, generators.clone(), *irrational)?;
                    let family = scenario
                        .functions
                        .iter()
                        .map(|(_, f)| torus_function(*dim, f).map(SpaceFunction::Torus))
                        .collect::<Result<_, _>>()?;
                    (action, family)
                }
                ActionSpec::FiniteSpace { file } => {
                    let (metric, generators) = load_metric_space(file)?;
                    let n = metric.len();
                    let action = IsometricAction::finite_space(metric, generators)?;
                    let family = scenario
                        .functions
                        .iter()
                        .map(|(_, f)| finite_values(n, false, f).map(SpaceFunction::Finite))
                        .collect::<Result<_, _>>()?;
                    (action, family)
                }
            };
            Ok(Prepared::Action { action, family, delta: *delta, probe: *probe })
        }
    }
}

fn with_degree(kernel: KernelChoice, degree: usize) -> KernelChoice {
    match kernel {
        KernelChoice::Delta => KernelChoice::Delta,
        KernelChoice::Fejer { .. } => KernelChoice::Fejer { degree },
        KernelChoice::Built { radius, target, .. } => KernelChoice::Built { radius, band_degree: degree, target },
    }
}

fn certify_prepared(prepared: &Prepared, config: CertifyConfig) -> Result<UcpCertificate, RunError> {
    Ok(match prepared {
        Prepared::Translation { group, family } => certify(group, family, &config)?,
        Prepared::Action { action, family, delta, probe } => {
            certify_action(action, family, &ActionConfig { certify: config, delta: *delta, probe_resolution: *probe })?
                .certificate
        }
    })
}

pub fn input_hash(source: &str) -> String {
    format!("{:x}", Sha256::digest(source.as_bytes()))
}

/// Certify the scenario and every point of its sweep. Failures are recorded
/// in the report, never raised.
pub fn run(scenario: &Scenario, source: &str, options: &RunOptions) -> Report {
    let mut report = Report::new(input_hash(source));
    let prepared = match prepare(scenario) {
        Ok(p) => p,
        Err(e) => {
            report.errors.push(e.entry(&scenario.id));
            return report;
        }
    };
    let base = CertifyConfig {
        id: scenario.id.clone(),
        epsilon: scenario.epsilon,
        kernel: scenario.kernel,
        options: PipelineOptions {
            grid_size: scenario.grid.size,
            profile: scenario.grid.profile,
            strategy: scenario.strategy,
            max_dim: options.max_dim.or(scenario.max_dim).unwrap_or(DEFAULT_MAX_DIM),
            seed: scenario.seed,
        },
    };

    match certify_prepared(&prepared, base.clone()) {
        Ok(cert) => report.certificates.push(cert),
        Err(e) => report.errors.push(e.entry(&base.id)),
    }

    let configs: Vec<CertifyConfig> = scenario
        .sweep
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut c = base.clone();
            c.id = format!("{}/n={n}", scenario.id);
            c.kernel = with_degree(scenario.kernel, n);
            c.options.grid_size = scenario.sweep_grid.get(i).copied().unwrap_or(4 * n).max(1);
            c
        })
        .collect();
    // Sweep points are independent; results are collected in sweep order.
    let results: Vec<(String, Result<UcpCertificate, RunError>, u64)> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .into_iter()
            .map(|c| {
                let prepared = &prepared;
                s.spawn(move || {
                    let id = c.id.clone();
                    let start = Instant::now();
                    let result = certify_prepared(prepared, c);
                    let ms = if options.timing { start.elapsed().as_millis() as u64 } else { 0 };
                    (id, result, ms)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    for (id, result, ms) in results {
        match result {
            Ok(cert) => {
                report.sweep.push(SweepRow::of(&cert, ms));
                report.certificates.push(cert);
            }
            Err(e) => report.errors.push(e.entry(&id)),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn symmetric_group_has_factorial_order() {
        for (n, order) in [(1, 1), (2, 2), (3, 6), (4, 24)] {
            assert_eq!(build_group(&GroupSpec::Symmetric(n)).unwrap().order(), Some(order));
        }
    }

    #[test]
    fn coefficient_boxes() {
        let f = torus_function(1, &FunctionSpec::Coeffs(vec![Complex64::new(1.0, 0.0); 5])).unwrap();
        assert_eq!(f.degree(), 2);
        let g = torus_function(2, &FunctionSpec::Coeffs(vec![Complex64::new(1.0, 0.0); 9])).unwrap();
        assert_eq!(g.degree(), 1);
        assert!(torus_function(1, &FunctionSpec::Coeffs(vec![Complex64::new(1.0, 0.0); 4])).is_err());
    }

    #[test]
    fn mismatched_values_are_reported() {
        let text = "[scenario]\nid = bad\ngroup = cyclic(4)\nepsilon = 0.5\n[kernel]\nkernel = delta\n[functions]\nf = values(1, 2)\n";
        let s = parse_scenario(text).unwrap();
        let report = run(&s, text, &RunOptions::default());
        assert_eq!(report.errors[0].code, "validation_error");
        assert_eq!(report.exit_code(), 2);
    }
}
