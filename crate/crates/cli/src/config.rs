//! Experiment configuration files.
//!
//! A flat `key = value` format with optional `[section]` headers. `#` starts
//! a comment. Values may be double-quoted. `edge` and `dissipator` may be
//! repeated.
//!
//! ```text
//! n = 3
//! tau = 1.0                    # measurement period, time units of the model
//!
//! [model]
//! kind = consensus             # consensus | amplitude_damping | depolarizing | dense
//! edge = "1-2: 1.0"            # nodes j-k, weight (rate, 1/time)
//! edge = "2-3: 1.0"
//! gamma = 1.0                  # presets: rate per qubit (1/time)
//! hamiltonian = "h.json"       # dense: JSON {"re": [[..]], "im": [[..]]}
//! dissipator = "v1.json"       # dense: repeatable
//!
//! [measurement]
//! theta = 0.0                  # polar angle of the |0>-outcome vector, radians
//! phi = 0.0                    # azimuth, radians
//!
//! [analysis]
//! epsilon = 1e-10              # positivity threshold for accessibility
//! tau_grid = "0.1, 1, 10"      # scan-tau grid
//!
//! [simulation]
//! steps = 100
//! trajectories = 10
//! seed = 42
//! initial = "001"              # bit string, or "mixed" to measure I/N first
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use mibn_core::consensus::Edge;
use mibn_core::{BooleanState, ComplexMatrix, InteractionGraph, LindbladModel, ModelSpec, QubitMeasurement, MAX_QUBITS};
use num_complex::Complex64;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}, field `{}`: {}", self.field, self.message),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { line, field: field.to_string(), message: message.into() }
}

#[derive(Debug, Clone)]
pub enum ModelConfig {
    Consensus(InteractionGraph),
    AmplitudeDamping { gamma: f64 },
    Depolarizing { gamma: f64 },
    Dense { hamiltonian: ComplexMatrix, dissipators: Vec<ComplexMatrix> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Bits(BooleanState),
    Mixed,
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub steps: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub initial: Option<InitialSpec>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    tau: Option<(f64, usize)>,
    pub model: ModelConfig,
    pub theta: f64,
    pub phi: f64,
    pub epsilon: Option<f64>,
    tau_grid: Option<(Vec<f64>, usize)>,
    pub simulation: SimulationConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(None, "config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn tau(&self) -> Result<f64, ConfigError> {
        self.tau.map(|t| t.0).ok_or_else(|| err(None, "tau", "required for this command"))
    }

    pub fn tau_grid(&self) -> Result<&[f64], ConfigError> {
        self.tau_grid.as_ref().map(|g| g.0.as_slice()).ok_or_else(|| err(None, "tau_grid", "required for scan-tau"))
    }

    pub fn measurement(&self) -> QubitMeasurement {
        QubitMeasurement::from_angles(self.theta, self.phi)
    }

    pub fn model_spec(&self) -> Result<ModelSpec, mibn_core::Error> {
        Ok(match &self.model {
            ModelConfig::Consensus(g) => ModelSpec::Consensus(g.clone()),
            ModelConfig::AmplitudeDamping { gamma } => ModelSpec::Lindblad(LindbladModel::amplitude_damping(self.n, *gamma)?),
            ModelConfig::Depolarizing { gamma } => ModelSpec::Lindblad(LindbladModel::depolarizing(self.n, *gamma)?),
            ModelConfig::Dense { hamiltonian, dissipators } => {
                ModelSpec::Lindblad(LindbladModel::new(hamiltonian.clone(), dissipators.clone())?)
            }
        })
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let entries = tokenize(text)?;
        let mut raw = Raw::default();
        for e in entries {
            raw.accept(e)?;
        }
        raw.finish(base)
    }
}

struct Entry {
    line: usize,
    section: String,
    key: String,
    value: String,
}

fn tokenize(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (k, raw_line) in text.lines().enumerate() {
        let line = k + 1;
        let content = strip_comment(raw_line).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(Some(line), "section", format!("unterminated header `{content}`")))?;
            section = name.trim().to_string();
            if !["model", "measurement", "analysis", "simulation"].contains(&section.as_str()) {
                return Err(err(Some(line), &section, "unknown section"));
            }
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(Some(line), content, "expected `key = value`"))?;
        let key = key.trim().to_string();
        let mut value = value.trim().to_string();
        if value.starts_with('"') {
            if value.len() < 2 || !value.ends_with('"') {
                return Err(err(Some(line), &key, "unterminated string"));
            }
            value = value[1..value.len() - 1].to_string();
        }
        out.push(Entry { line, section: section.clone(), key, value });
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

#[derive(Default)]
struct Raw {
    n: Option<(usize, usize)>,
    tau: Option<(f64, usize)>,
    kind: Option<(String, usize)>,
    edges: Vec<(Edge, usize)>,
    gamma: Option<(f64, usize)>,
    hamiltonian: Option<(String, usize)>,
    dissipators: Vec<(String, usize)>,
    theta: Option<f64>,
    phi: Option<f64>,
    epsilon: Option<f64>,
    tau_grid: Option<(Vec<f64>, usize)>,
    steps: Option<usize>,
    trajectories: Option<usize>,
    seed: Option<u64>,
    initial: Option<(String, usize)>,
}

fn number<T: std::str::FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value
        .parse()
        .map_err(|_| err(Some(e.line), &e.key, format!("cannot parse `{}` as a number", e.value)))
}

fn finite(e: &Entry) -> Result<f64, ConfigError> {
    let x: f64 = number(e)?;
    if !x.is_finite() {
        return Err(err(Some(e.line), &e.key, "must be finite"));
    }
    Ok(x)
}

fn once<T>(slot: &mut Option<T>, value: T, e: &Entry) -> Result<(), ConfigError> {
    if slot.is_some() {
        return Err(err(Some(e.line), &e.key, "given more than once"));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_edge(e: &Entry) -> Result<Edge, ConfigError> {
    let bad = || err(Some(e.line), "edge", format!("expected \"j-k: weight\", got `{}`", e.value));
    let (pair, weight) = e.value.split_once(':').ok_or_else(bad)?;
    let (j, k) = pair.split_once('-').ok_or_else(bad)?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    let w: f64 = weight.trim().parse().map_err(|_| bad())?;
    Ok(Edge::new(j, k, w))
}

impl Raw {
    fn accept(&mut self, e: Entry) -> Result<(), ConfigError> {
        let line = e.line;
        match (e.section.as_str(), e.key.as_str()) {
            ("", "n") => once(&mut self.n, (number(&e)?, line), &e),
            ("", "tau") => once(&mut self.tau, (finite(&e)?, line), &e),
            ("model", "kind") => once(&mut self.kind, (e.value.clone(), line), &e),
            ("model", "edge") => {
                self.edges.push((parse_edge(&e)?, line));
                Ok(())
            }
            ("model", "gamma") => once(&mut self.gamma, (finite(&e)?, line), &e),
            ("model", "hamiltonian") => once(&mut self.hamiltonian, (e.value.clone(), line), &e),
            ("model", "dissipator") => {
                self.dissipators.push((e.value.clone(), line));
                Ok(())
            }
            ("measurement", "theta") => once(&mut self.theta, finite(&e)?, &e),
            ("measurement", "phi") => once(&mut self.phi, finite(&e)?, &e),
            ("analysis", "epsilon") => once(&mut self.epsilon, finite(&e)?, &e),
            ("analysis", "tau_grid") => {
                let grid = e
                    .value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err(Some(line), "tau_grid", "expected comma-separated numbers"))?;
                once(&mut self.tau_grid, (grid, line), &e)
            }
            ("simulation", "steps") => once(&mut self.steps, number(&e)?, &e),
            ("simulation", "trajectories") => once(&mut self.trajectories, number(&e)?, &e),
            ("simulation", "seed") => once(&mut self.seed, number(&e)?, &e),
            ("simulation", "initial") => once(&mut self.initial, (e.value.clone(), line), &e),
            (section, key) => {
                let place = if section.is_empty() { "top level".to_string() } else { format!("section [{section}]") };
                Err(err(Some(line), key, format!("unknown key in {place}")))
            }
        }
    }

    fn finish(self, base: &Path) -> Result<ExperimentConfig, ConfigError> {
        let (n, n_line) = self.n.ok_or_else(|| err(None, "n", "required"))?;
        if n == 0 || n > MAX_QUBITS {
            return Err(err(Some(n_line), "n", format!("must lie in 1..={MAX_QUBITS}")));
        }
        if let Some((t, line)) = self.tau {
            if t < 0.0 {
                return Err(err(Some(line), "tau", "must be nonnegative"));
            }
        }
        if let Some((grid, line)) = &self.tau_grid {
            if grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) || grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(err(Some(*line), "tau_grid", "must be strictly increasing and positive"));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(err(None, "epsilon", "must lie in (0, 1)"));
            }
        }
        let (kind, kind_line) = self.kind.clone().ok_or_else(|| err(None, "kind", "required in section [model]"))?;
        let stray = |field: &str, present: bool| -> Result<(), ConfigError> {
            if present {
                Err(err(None, field, format!("not used by model kind `{kind}`")))
            } else {
                Ok(())
            }
        };
        let model = match kind.as_str() {
            "consensus" => {
                stray("gamma", self.gamma.is_some())?;
                stray("hamiltonian", self.hamiltonian.is_some() || !self.dissipators.is_empty())?;
                for (e, line) in &self.edges {
                    if !(e.weight > 0.0 && e.weight.is_finite()) {
                        return Err(err(Some(*line), "edge", "weight must be positive"));
                    }
                }
                let graph = InteractionGraph::new(n, self.edges.iter().map(|e| e.0).collect()).map_err(|e| {
                    err(self.edges.first().map(|x| x.1), "edge", e.to_string())
                })?;
                ModelConfig::Consensus(graph)
            }
            "amplitude_damping" | "depolarizing" => {
                stray("edge", !self.edges.is_empty())?;
                stray("hamiltonian", self.hamiltonian.is_some() || !self.dissipators.is_empty())?;
                let (gamma, line) = self.gamma.ok_or_else(|| err(None, "gamma", format!("required by `{kind}`")))?;
                if gamma < 0.0 {
                    return Err(err(Some(line), "gamma", "must be nonnegative"));
                }
                if kind == "amplitude_damping" {
                    ModelConfig::AmplitudeDamping { gamma }
                } else {
                    ModelConfig::Depolarizing { gamma }
                }
            }
            "dense" => {
                stray("edge", !self.edges.is_empty())?;
                stray("gamma", self.gamma.is_some())?;
                let (h, line) = self.hamiltonian.clone().ok_or_else(|| err(None, "hamiltonian", "required by `dense`"))?;
                let dim = 1usize << n;
                let hamiltonian = read_matrix(&base.join(h), dim, "hamiltonian", line)?;
                let dissipators = self
                    .dissipators
                    .iter()
                    .map(|(p, line)| read_matrix(&base.join(p), dim, "dissipator", *line))
                    .collect::<Result<Vec<_>, _>>()?;
                ModelConfig::Dense { hamiltonian, dissipators }
            }
            other => return Err(err(Some(kind_line), "kind", format!("unknown model kind `{other}`"))),
        };
        let initial = match self.initial {
            None => None,
            Some((s, _)) if s == "mixed" => Some(InitialSpec::Mixed),
            Some((s, line)) => {
                let b: BooleanState = s.parse().map_err(|e: mibn_core::Error| err(Some(line), "initial", e.to_string()))?;
                if b.len() != n {
                    return Err(err(Some(line), "initial", format!("{} bits given for n = {n}", b.len())));
                }
                Some(InitialSpec::Bits(b))
            }
        };
        let steps = self.steps.unwrap_or(100);
        let trajectories = self.trajectories.unwrap_or(1);
        if steps == 0 {
            return Err(err(None, "steps", "must be at least 1"));
        }
        if trajectories == 0 {
            return Err(err(None, "trajectories", "must be at least 1"));
        }
        Ok(ExperimentConfig {
            n,
            tau: self.tau.map(|(t, l)| (t, l)),
            model,
            theta: self.theta.unwrap_or(0.0),
            phi: self.phi.unwrap_or(0.0),
            epsilon: self.epsilon,
            tau_grid: self.tau_grid,
            simulation: SimulationConfig { steps, trajectories, seed: self.seed.unwrap_or(0), initial },
        })
    }
}

#[derive(Deserialize)]
struct JsonMatrix {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

/// Reads a dense complex matrix stored as `{"re": [[..]], "im": [[..]]}`
/// (rows; `im` optional).
pub fn read_matrix(path: &PathBuf, dim: usize, field: &str, line: usize) -> Result<ComplexMatrix, ConfigError> {
    let fail = |m: String| err(Some(line), field, m);
    let text = std::fs::read_to_string(path).map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
    let m: JsonMatrix = serde_json::from_str(&text).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == dim && rows.iter().all(|r| r.len() == dim);
    if !shape_ok(&m.re) || m.im.as_ref().is_some_and(|im| !shape_ok(im)) {
        return Err(fail(format!("{} must hold {dim}x{dim} matrices", path.display())));
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| {
        Complex64::new(m.re[r][c], m.im.as_ref().map_or(0.0, |im| im[r][c]))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(text, Path::new("."))
    }

    #[test]
    fn consensus_config() {
        let c = parse(
            "n = 3\ntau = 1 # period\n[model]\nkind = consensus\nedge = \"1-2: 1.0\"\nedge = \"2-3: 0.5\"\n[simulation]\ninitial = \"001\"\n",
        )
        .unwrap();
        assert_eq!(c.tau().unwrap(), 1.0);
        match &c.model {
            ModelConfig::Consensus(g) => assert_eq!(g.edges().len(), 2),
            _ => panic!(),
        }
        assert_eq!(c.simulation.initial, Some(InitialSpec::Bits("001".parse().unwrap())));
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let e = parse("n = 2\ntau = x\n").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(2), "tau"));
        let e = parse("n = 2\n[model]\nkind = consensus\nedge = \"1-2 1.0\"\n").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(4), "edge"));
        let e = parse("n = 2\n[model]\nkind = consensus\nedge = \"1-2: -1\"\n").unwrap_err();
        assert_eq!(e.field, "edge");
        let e = parse("n = 2\nfoo = 1\n").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(2), "foo"));
        let e = parse("n = 9\n[model]\nkind = consensus\n").unwrap_err();
        assert_eq!(e.field, "n");
        let e = parse("n = 2\n[model]\nkind = depolarizing\n").unwrap_err();
        assert_eq!(e.field, "gamma");
        let e = parse("n = 2\ntau = 1\ntau = 2\n[model]\nkind = consensus\n").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(3), "tau"));
        let e = parse("n = 2\n[model]\nkind = consensus\n").unwrap().tau().unwrap_err();
        assert_eq!(e.field, "tau");
    }
}
