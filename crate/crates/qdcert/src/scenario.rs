//! Scenario files: `key = value` lines grouped under `[section]` headers,
//! `#` to end of line is a comment.
//!
//! ```text
//! [scenario]
//! id = torus-fejer
//! target = translation        # or: action
//! group = torus               # torus(2), cyclic(6), symmetric(3), table(s3.table)
//! epsilon = 0.5
//! strategy = sqrt             # or: cholesky
//! seed = 42
//! sweep = 4, 8, 16, 32        # kernel degrees; grid sizes default to 4·degree
//! sweep_grid = 16, 32, 64, 128
//! max_dim = 512
//!
//! [kernel]
//! kernel = fejer(8)           # built(pi, 16, 0.1), delta
//!
//! [grid]
//! grid = uniform(32)          # perturbed(32, 7, 0.1): size, seed, amplitude
//!
//! [functions]
//! one = const
//! z = exp(1)                  # exp(1, -2) on T², e^{2πijg/n} on cyclic(n)
//! bump = coeffs(0.5, 1, 0.5)  # torus coefficients for -n..n, row-major on T²
//! table = values(1, 0:1, -1)  # values on a finite group or space; re:im
//!
//! [action]
//! kind = rotation             # or: finite_space (with file = space.txt)
//! dimension = 1
//! turns = 1/5                 # generators split by ';', angles by ','
//! irrational = false          # declares the generated rotations dense
//! delta = 0.5
//! probe = 64
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use qdcert_core::{Complex64, GridProfile, KernelChoice, RotationAngle, Strategy};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid {field}: {message}")]
    Validation { field: &'static str, message: String },
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl ScenarioError {
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::Parse { .. } => "parse_error",
            ScenarioError::Validation { .. } => "validation_error",
            ScenarioError::Io { .. } => "io_error",
        }
    }

    fn parse(line: usize, message: impl Into<String>) -> Self {
        ScenarioError::Parse { line, message: message.into() }
    }

    fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        ScenarioError::Validation { field, message: message.into() }
    }
}

type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, PartialEq)]
pub enum GroupSpec {
    Torus(usize),
    Cyclic(usize),
    Symmetric(usize),
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionSpec {
    Rotation { dim: usize, generators: Vec<Vec<RotationAngle>>, irrational: bool },
    FiniteSpace { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionTarget {
    pub spec: ActionSpec,
    pub delta: f64,
    pub probe: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Translation(GroupSpec),
    Action(ActionTarget),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Exp([i64; 2]),
    Const(Complex64),
    Coeffs(Vec<Complex64>),
    Values(Vec<Complex64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub size: usize,
    pub profile: GridProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub target: Target,
    pub functions: Vec<(String, FunctionSpec)>,
    pub epsilon: f64,
    pub kernel: KernelChoice,
    pub grid: GridSpec,
    pub strategy: Strategy,
    pub seed: u64,
    pub sweep: Vec<usize>,
    pub sweep_grid: Vec<usize>,
    pub max_dim: Option<usize>,
}

impl Scenario {
    /// Make relative file references relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.target {
            Target::Translation(GroupSpec::Table(p)) => fix(p),
            Target::Action(ActionTarget { spec: ActionSpec::FiniteSpace { file }, .. }) => fix(file),
            _ => {}
        }
    }
}

const SECTIONS: [&str; 5] = ["scenario", "kernel", "grid", "functions", "action"];

struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Sections(Vec<(String, Vec<Entry>)>);

impl Sections {
    fn section(&self, name: &str) -> &[Entry] {
        self.0.iter().find(|(n, _)| n == name).map_or(&[], |(_, e)| e.as_slice())
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.section(section).iter().find(|e| e.key == key)
    }

    fn check_keys(&self, section: &str, allowed: &[&str]) -> Result<()> {
        match self.section(section).iter().find(|e| !allowed.contains(&e.key.as_str())) {
            Some(e) => Err(ScenarioError::parse(e.line, format!("unknown key `{}` in [{section}]", e.key))),
            None => Ok(()),
        }
    }
}

fn split_sections(text: &str) -> Result<Sections> {
    let mut sections: Vec<(String, Vec<Entry>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ScenarioError::parse(line, format!("unknown section [{name}]")));
            }
            if sections.iter().any(|(n, _)| n == name) {
                return Err(ScenarioError::parse(line, format!("section [{name}] appears twice")));
            }
            sections.push((name.to_string(), Vec::new()));
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ScenarioError::parse(line, "expected `key = value`"));
        };
        let Some((_, entries)) = sections.last_mut() else {
            return Err(ScenarioError::parse(line, "entry before any section header"));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(ScenarioError::parse(line, "empty key"));
        }
        if entries.iter().any(|e| e.key == key) {
            return Err(ScenarioError::parse(line, format!("duplicate key `{key}`")));
        }
        entries.push(Entry { key: key.to_string(), value: value.trim().to_string(), line });
    }
    Ok(Sections(sections))
}

/// `name` or `name(a, b, ...)`.
fn parse_call(text: &str, line: usize) -> Result<(String, Vec<String>)> {
    match text.split_once('(') {
        None => Ok((text.trim().to_string(), Vec::new())),
        Some((name, rest)) => {
            let inner = rest
                .trim_end()
                .strip_suffix(')')
                .ok_or_else(|| ScenarioError::parse(line, format!("missing `)` in `{text}`")))?;
            let args = if inner.trim().is_empty() { Vec::new() } else { inner.split(',').map(|a| a.trim().to_string()).collect() };
            Ok((name.trim().to_string(), args))
        }
    }
}

fn number(text: &str, line: usize) -> Result<f64> {
    match text.trim() {
        "pi" => Ok(std::f64::consts::PI),
        t => t.parse::<f64>().map_err(|_| ScenarioError::parse(line, format!("`{t}` is not a number"))),
    }
}

fn integer<T: std::str::FromStr>(text: &str, line: usize) -> Result<T> {
    text.trim().parse::<T>().map_err(|_| ScenarioError::parse(line, format!("`{}` is not a valid integer", text.trim())))
}

fn boolean(text: &str, line: usize) -> Result<bool> {
    match text.trim() {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        t => Err(ScenarioError::parse(line, format!("`{t}` is not true or false"))),
    }
}

fn complex(text: &str, line: usize) -> Result<Complex64> {
    match text.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(number(re, line)?, number(im, line)?)),
        None => Ok(Complex64::new(number(text, line)?, 0.0)),
    }
}

fn arity(name: &str, args: &[String], n: usize, line: usize) -> Result<()> {
    if args.len() != n {
        return Err(ScenarioError::parse(line, format!("`{name}` takes {n} argument(s), found {}", args.len())));
    }
    Ok(())
}

fn parse_group(e: &Entry) -> Result<GroupSpec> {
    let (name, args) = parse_call(&e.value, e.line)?;
    match name.as_str() {
        "torus" if args.len() <= 1 => {
            let dim = args.first().map_or(Ok(1), |a| integer(a, e.line))?;
            if !(1..=2).contains(&dim) {
                return Err(ScenarioError::invalid("group", "torus dimension must be 1 or 2"));
            }
            Ok(GroupSpec::Torus(dim))
        }
        "cyclic" => {
            arity("cyclic", &args, 1, e.line)?;
            Ok(GroupSpec::Cyclic(integer(&args[0], e.line)?))
        }
        "symmetric" => {
            arity("symmetric", &args, 1, e.line)?;
            Ok(GroupSpec::Symmetric(integer(&args[0], e.line)?))
        }
        "table" => {
            arity("table", &args, 1, e.line)?;
            Ok(GroupSpec::Table(PathBuf::from(&args[0])))
        }
        _ => Err(ScenarioError::parse(e.line, format!("unknown group `{}`", e.value))),
    }
}

fn parse_kernel(e: &Entry) -> Result<KernelChoice> {
    let (name, args) = parse_call(&e.value, e.line)?;
    match name.as_str() {
        "delta" => {
            arity("delta", &args, 0, e.line)?;
            Ok(KernelChoice::Delta)
        }
        "fejer" => {
            arity("fejer", &args, 1, e.line)?;
            Ok(KernelChoice::Fejer { degree: integer(&args[0], e.line)? })
        }
        "built" => {
            arity("built", &args, 3, e.line)?;
            Ok(KernelChoice::Built {
                radius: number(&args[0], e.line)?,
                band_degree: integer(&args[1], e.line)?,
                target: number(&args[2], e.line)?,
            })
        }
        _ => Err(ScenarioError::parse(e.line, format!("unknown kernel `{name}`"))),
    }
}

fn parse_grid(e: &Entry) -> Result<GridSpec> {
    let (name, args) = parse_call(&e.value, e.line)?;
    match name.as_str() {
        "uniform" => {
            arity("uniform", &args, 1, e.line)?;
            Ok(GridSpec { size: integer(&args[0], e.line)?, profile: GridProfile::Uniform })
        }
        "perturbed" => {
            arity("perturbed", &args, 3, e.line)?;
            Ok(GridSpec {
                size: integer(&args[0], e.line)?,
                profile: GridProfile::Perturbed { seed: integer(&args[1], e.line)?, amplitude: number(&args[2], e.line)? },
            })
        }
        _ => Err(ScenarioError::parse(e.line, format!("unknown grid `{name}`"))),
    }
}

fn parse_function(e: &Entry) -> Result<FunctionSpec> {
    let (name, args) = parse_call(&e.value, e.line)?;
    match name.as_str() {
        "exp" => match args.len() {
            1 => Ok(FunctionSpec::Exp([integer(&args[0], e.line)?, 0])),
            2 => Ok(FunctionSpec::Exp([integer(&args[0], e.line)?, integer(&args[1], e.line)?])),
            _ => Err(ScenarioError::parse(e.line, "`exp` takes one frequency per torus dimension")),
        },
        "const" => match args.len() {
            0 => Ok(FunctionSpec::Const(Complex64::new(1.0, 0.0))),
            1 => Ok(FunctionSpec::Const(complex(&args[0], e.line)?)),
            _ => Err(ScenarioError::parse(e.line, "`const` takes at most one value")),
        },
        "coeffs" | "values" => {
            if args.is_empty() {
                return Err(ScenarioError::parse(e.line, format!("`{name}` needs at least one entry")));
            }
            let v = args.iter().map(|a| complex(a, e.line)).collect::<Result<Vec<_>>>()?;
            Ok(if name == "coeffs" { FunctionSpec::Coeffs(v) } else { FunctionSpec::Values(v) })
        }
        _ => Err(ScenarioError::parse(e.line, format!("unknown function `{name}`"))),
    }
}

fn parse_list(e: &Entry) -> Result<Vec<usize>> {
    e.value.split(',').map(|v| integer(v, e.line)).collect()
}

fn parse_turns(e: &Entry) -> Result<Vec<Vec<RotationAngle>>> {
    e.value
        .split(';')
        .map(|generator| {
            generator
                .split(',')
                .map(|a| match a.split_once('/') {
                    Some((p, q)) => {
                        let den: u64 = integer(q, e.line)?;
                        if den == 0 {
                            return Err(ScenarioError::parse(e.line, "zero denominator"));
                        }
                        Ok(RotationAngle::Turns { num: integer(p, e.line)?, den })
                    }
                    None => Ok(RotationAngle::Radians(std::f64::consts::TAU * number(a, e.line)?)),
                })
                .collect()
        })
        .collect()
}

fn parse_action(s: &Sections) -> Result<ActionTarget> {
    s.check_keys("action", &["kind", "dimension", "turns", "irrational", "delta", "probe", "file"])?;
    let kind = s.get("action", "kind").ok_or_else(|| ScenarioError::invalid("kind", "action scenarios need [action] kind"))?;
    let spec = match kind.value.as_str() {
        "rotation" => {
            let dim = s.get("action", "dimension").map_or(Ok(1), |e| integer(&e.value, e.line))?;
            let turns = s.get("action", "turns").ok_or_else(|| ScenarioError::invalid("turns", "rotation needs turns"))?;
            let generators = parse_turns(turns)?;
            if generators.iter().any(|g| g.len() != dim) {
                return Err(ScenarioError::invalid("turns", format!("every generator needs {dim} angle(s)")));
            }
            let irrational = s.get("action", "irrational").map_or(Ok(false), |e| boolean(&e.value, e.line))?;
            ActionSpec::Rotation { dim, generators, irrational }
        }
        "finite_space" => {
            let file = s.get("action", "file").ok_or_else(|| ScenarioError::invalid("file", "finite_space needs a file"))?;
            ActionSpec::FiniteSpace { file: PathBuf::from(&file.value) }
        }
        other => return Err(ScenarioError::parse(kind.line, format!("unknown action kind `{other}`"))),
    };
    let delta = match s.get("action", "delta") {
        Some(e) => number(&e.value, e.line)?,
        None => return Err(ScenarioError::invalid("delta", "action scenarios need a density delta")),
    };
    if !(delta > 0.0) {
        return Err(ScenarioError::invalid("delta", "must be positive"));
    }
    let probe = s.get("action", "probe").map_or(Ok(64), |e| integer(&e.value, e.line))?;
    if probe == 0 {
        return Err(ScenarioError::invalid("probe", "must be at least 1"));
    }
    Ok(ActionTarget { spec, delta, probe })
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let s = split_sections(text)?;
    s.check_keys("scenario", &["id", "target", "group", "epsilon", "strategy", "seed", "sweep", "sweep_grid", "max_dim"])?;
    s.check_keys("kernel", &["kernel"])?;
    s.check_keys("grid", &["grid"])?;

    let id = s.get("scenario", "id").map(|e| e.value.clone()).unwrap_or_default();
    if id.is_empty() {
        return Err(ScenarioError::invalid("id", "missing scenario id"));
    }
    let target = match s.get("scenario", "target").map(|e| (e.value.as_str(), e.line)) {
        None | Some(("translation", _)) => {
            let group = s.get("scenario", "group").ok_or_else(|| ScenarioError::invalid("group", "missing group"))?;
            Target::Translation(parse_group(group)?)
        }
        Some(("action", _)) => Target::Action(parse_action(&s)?),
        Some((other, line)) => return Err(ScenarioError::parse(line, format!("unknown target `{other}`"))),
    };
    let epsilon = match s.get("scenario", "epsilon") {
        Some(e) => number(&e.value, e.line)?,
        None => return Err(ScenarioError::invalid("epsilon", "missing epsilon")),
    };
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(ScenarioError::invalid("epsilon", format!("{epsilon} is not in (0, 1)")));
    }
    let strategy = match s.get("scenario", "strategy") {
        None => Strategy::Sqrt,
        Some(e) => match e.value.as_str() {
            "sqrt" => Strategy::Sqrt,
            "cholesky" => Strategy::Cholesky,
            other => return Err(ScenarioError::parse(e.line, format!("unknown strategy `{other}`"))),
        },
    };
    let seed = s.get("scenario", "seed").map_or(Ok(0), |e| integer(&e.value, e.line))?;
    let sweep = s.get("scenario", "sweep").map_or(Ok(Vec::new()), parse_list)?;
    let sweep_grid = s.get("scenario", "sweep_grid").map_or(Ok(Vec::new()), parse_list)?;
    if !sweep_grid.is_empty() && sweep_grid.len() != sweep.len() {
        return Err(ScenarioError::invalid("sweep_grid", "needs one grid size per sweep degree"));
    }
    let max_dim = s.get("scenario", "max_dim").map(|e| integer(&e.value, e.line)).transpose()?;

    let kernel = match s.get("kernel", "kernel") {
        Some(e) => parse_kernel(e)?,
        None => return Err(ScenarioError::invalid("kernel", "missing [kernel] kernel")),
    };
    let grid = match s.get("grid", "grid") {
        Some(e) => parse_grid(e)?,
        None => GridSpec { size: 16, profile: GridProfile::Uniform },
    };
    if grid.size == 0 {
        return Err(ScenarioError::invalid("grid", "size must be at least 1"));
    }
    if let GridProfile::Perturbed { amplitude, .. } = grid.profile {
        if !(0.0..=0.25).contains(&amplitude) {
            return Err(ScenarioError::invalid("grid", "perturbation amplitude must lie in [0, 0.25]"));
        }
    }
    let functions = s
        .section("functions")
        .iter()
        .map(|e| Ok((e.key.clone(), parse_function(e)?)))
        .collect::<Result<Vec<_>>>()?;
    if functions.is_empty() {
        return Err(ScenarioError::invalid("functions", "at least one test function is required"));
    }
    Ok(Scenario { id, target, functions, epsilon, kernel, grid, strategy, seed, sweep, sweep_grid, max_dim })
}

/// Read and parse a scenario file; returns it with its source text.
pub fn load_scenario(path: &Path) -> Result<(Scenario, String)> {
    let text = read(path)?;
    let mut scenario = parse_scenario(&text)?;
    scenario.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    Ok((scenario, text))
}

pub(crate) fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| ScenarioError::Io { path: path.to_path_buf(), message: e.to_string() })
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Torus(d) => write!(f, "torus({d})"),
            GroupSpec::Cyclic(n) => write!(f, "cyclic({n})"),
            GroupSpec::Symmetric(n) => write!(f, "symmetric({n})"),
            GroupSpec::Table(p) => write!(f, "table({})", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[scenario]
id = minimal
group = torus
epsilon = 0.5

[kernel]
kernel = fejer(8)

[grid]
grid = uniform(32)

[functions]
f = exp(1)
";

    #[test]
    fn minimal_file() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.id, "minimal");
        assert_eq!(s.target, Target::Translation(GroupSpec::Torus(1)));
        assert_eq!(s.kernel, KernelChoice::Fejer { degree: 8 });
        assert_eq!(s.grid, GridSpec { size: 32, profile: GridProfile::Uniform });
        assert_eq!(s.functions, vec![("f".to_string(), FunctionSpec::Exp([1, 0]))]);
        assert_eq!(s.strategy, Strategy::Sqrt);
    }

    #[test]
    fn epsilon_out_of_range() {
        let text = MINIMAL.replace("epsilon = 0.5", "epsilon = 1.5");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Validation { field: "epsilon", .. })));
    }

    #[test]
    fn unknown_kernel() {
        let text = MINIMAL.replace("fejer(8)", "gauss(2)");
        assert_eq!(parse_scenario(&text), Err(ScenarioError::parse(8, "unknown kernel `gauss`")));
    }

    #[test]
    fn comments_lists_and_values() {
        let text = "# header
[scenario]
id = z6   # trailing
group = cyclic(6)
epsilon = 0.1
sweep = 4, 8
[kernel]
kernel = built(pi, 16, 0.1)
[functions]
v = values(1, 0:1, -0.5:2)
c = const(2:-1)
";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.sweep, vec![4, 8]);
        assert!(matches!(s.kernel, KernelChoice::Built { band_degree: 16, .. }));
        assert_eq!(
            s.functions[0].1,
            FunctionSpec::Values(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-0.5, 2.0)])
        );
        assert_eq!(s.functions[1].1, FunctionSpec::Const(Complex64::new(2.0, -1.0)));
    }

    #[test]
    fn action_sections() {
        let text = "
[scenario]
id = rot
target = action
epsilon = 0.5
[kernel]
kernel = delta
[functions]
f = exp(1)
[action]
kind = rotation
turns = 1/5; 0.25
delta = 0.5
";
        let s = parse_scenario(text).unwrap();
        let Target::Action(a) = s.target else { panic!() };
        let ActionSpec::Rotation { generators, irrational, .. } = a.spec else { panic!() };
        assert!(!irrational);
        assert_eq!(generators[0], vec![RotationAngle::Turns { num: 1, den: 5 }]);
        assert_eq!(generators[1], vec![RotationAngle::Radians(std::f64::consts::FRAC_PI_2)]);
        assert_eq!(a.probe, 64);
    }

    #[test]
    fn structural_errors_carry_lines() {
        assert!(matches!(parse_scenario("id = x"), Err(ScenarioError::Parse { line: 1, .. })));
        assert!(matches!(parse_scenario("[bogus]"), Err(ScenarioError::Parse { line: 1, .. })));
        let dup = MINIMAL.replace("f = exp(1)", "f = exp(1)\nf = const");
        assert!(matches!(parse_scenario(&dup), Err(ScenarioError::Parse { line: 15, .. })));
        let missing = MINIMAL.replace("[functions]\nf = exp(1)\n", "");
        assert!(matches!(parse_scenario(&missing), Err(ScenarioError::Validation { field: "functions", .. })));
    }
}
