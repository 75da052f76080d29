//! Experiment configuration: a line-oriented key/value format with
//! `[sections]`, chosen to stay diffable and dependency-free.
//!
//! ```text
//! [experiment]
//! kind = steer            # simulate | steer | diagnose | identities
//! seed = 42
//!
//! [domain]
//! kind = interval         # interval | rectangle
//! length = 3.141592653589793
//! n_max = 32
//! gamma = both            # left | right | both
//! # rectangle instead: a = , b = , cutoff = , edges = left,bottom
//!
//! [grid]
//! t_end = 6.283185307179586
//! n_steps = 6284
//!
//! [kernel]                # the memory kernel N (closed form)
//! kind = exponential      # zero | constant | exponential | polynomial
//! amplitude = 1.0
//! rate = 1.0
//! # constant: value = ; polynomial: coeffs = c0, c1, ...
//!
//! [problem]
//! alpha = 0.1
//! source = maccamy        # maccamy: reduce (alpha, N); direct: b + N as K
//! b = 0.0                 # used by source = direct
//!
//! [steer]
//! initial = 1.0, 0, 0.5   # modal coefficients of w0
//! target = 0, 1.0
//! n_modes = 16
//! regularization = auto   # auto | a number >= 0
//!
//! [simulate]
//! initial = 1.0
//! field_points = 41
//! time_stride = 100
//!
//! [diagnose]
//! mode_sweep = 8, 16, 32
//! samples = 5
//!
//! [identities]
//! lambdas = 1, 5, 20
//!
//! [output]
//! dir = out
//! tolerance = 1e-6
//! ```
//!
//! Unknown sections or keys are rejected, with the offending location in
//! the message. Validation (including the `dt·λ_max < 2` stability bound)
//! happens entirely before any output is produced.

use crate::error::{Error, Result};
use crate::grid::{ClosedForm, TimeGrid};
use crate::spectral::{
    interval_domain, rectangle_domain, Edge, GammaSelect, SpectralDomain,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Simulate,
    Steer,
    Diagnose,
    Identities,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Steer => "steer",
            ExperimentKind::Diagnose => "diagnose",
            ExperimentKind::Identities => "identities",
        }
    }
}

#[derive(Debug, Clone)]
pub enum DomainSpec {
    Interval {
        length: f64,
        n_max: usize,
        gamma: GammaSelect,
    },
    Rectangle {
        a: f64,
        b: f64,
        cutoff: f64,
        edges: Vec<Edge>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemSource {
    /// Reduce the first-order problem `(α, N)`.
    MacCamy,
    /// Take `b` and the configured kernel directly as the second-order
    /// system.
    Direct { b: f64 },
    /// Re-run against a previously derived system (a directory written by
    /// `SecondOrderSystem::write_to_dir`, e.g. by a simulate run).
    System { path: PathBuf },
}

#[derive(Debug, Clone)]
pub struct SteerSpec {
    pub initial: Vec<f64>,
    pub target: Vec<f64>,
    pub n_modes: usize,
    /// `None`: try unregularized, sweep on failure.
    pub regularization: Option<f64>,
    pub basis: crate::control::ControlBasis,
}

#[derive(Debug, Clone)]
pub struct SimulateSpec {
    pub initial: Vec<f64>,
    pub initial_velocity: Option<Vec<f64>>,
    pub field_points: usize,
    pub time_stride: usize,
}

#[derive(Debug, Clone)]
pub struct DiagnoseSpec {
    pub mode_sweep: Vec<usize>,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct IdentitiesSpec {
    pub lambdas: Vec<f64>,
}

/// Where the memory kernel comes from.
#[derive(Debug, Clone)]
pub enum KernelSpec {
    /// Closed form declared by name and parameters.
    ClosedForm(ClosedForm),
    /// Two-column `t,value` CSV on the solve grid (only usable with
    /// `source = direct`: the reduction needs closed-form derivatives).
    Csv { path: PathBuf },
}

impl KernelSpec {
    /// Sample the kernel on the configured grid.
    pub fn build(&self, grid: TimeGrid) -> Result<crate::grid::SampledKernel> {
        match self {
            KernelSpec::ClosedForm(form) => Ok(crate::grid::SampledKernel::from_closed_form(
                grid,
                form.clone(),
            )),
            KernelSpec::Csv { path } => {
                let k = crate::grid::SampledKernel::read_csv(path)?;
                if k.grid() != &grid {
                    return Err(Error::Config(format!(
                        "[kernel] path {}: sampled on t_end={}, n_steps={}, but the [grid] section says t_end={}, n_steps={}",
                        path.display(),
                        k.grid().t_end(),
                        k.grid().n_steps(),
                        grid.t_end(),
                        grid.n_steps()
                    )));
                }
                Ok(k)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub domain: DomainSpec,
    pub grid: TimeGrid,
    pub kernel: KernelSpec,
    pub alpha: f64,
    pub source: SystemSource,
    pub steer: SteerSpec,
    pub simulate: SimulateSpec,
    pub diagnose: DiagnoseSpec,
    pub identities: IdentitiesSpec,
    pub output_dir: PathBuf,
    pub tolerance: f64,
}

/// Raw parsed sections.
struct Sections {
    map: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl Sections {
    fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
        let mut current = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {}: unclosed section", idx + 1)))?
                    .trim()
                    .to_string();
                map.entry(name.clone()).or_default();
                current = name;
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", idx + 1))
            })?;
            if current.is_empty() {
                return Err(Error::Config(format!(
                    "line {}: key outside any [section]",
                    idx + 1
                )));
            }
            map.get_mut(&current).unwrap().insert(
                key.trim().to_string(),
                (value.trim().to_string(), idx + 1),
            );
        }
        Ok(Self { map })
    }

    fn section(&self, name: &str) -> Option<&BTreeMap<String, (String, usize)>> {
        self.map.get(name)
    }

    fn known_sections(&self, allowed: &[&str]) -> Result<()> {
        for name in self.map.keys() {
            if !allowed.contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown section [{name}]")));
            }
        }
        Ok(())
    }
}

fn field_err(section: &str, key: &str, line: usize, what: &str) -> Error {
    Error::Config(format!("[{section}] {key} (line {line}): {what}"))
}

struct SectionView<'a> {
    name: &'a str,
    entries: Option<&'a BTreeMap<String, (String, usize)>>,
}

impl<'a> SectionView<'a> {
    fn raw(&self, key: &str) -> Option<(&'a str, usize)> {
        self.entries
            .and_then(|m| m.get(key))
            .map(|(v, l)| (v.as_str(), *l))
    }

    fn require(&self, key: &str) -> Result<(&'a str, usize)> {
        self.raw(key).ok_or_else(|| {
            Error::Config(format!("[{}] missing required key '{key}'", self.name))
        })
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let (v, line) = self.require(key)?;
        v.parse()
            .map_err(|_| field_err(self.name, key, line, &format!("expected a number, got '{v}'")))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(_) => self.f64(key),
        }
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let (v, line) = self.require(key)?;
        v.parse().map_err(|_| {
            field_err(
                self.name,
                key,
                line,
                &format!("expected a nonnegative integer, got '{v}'"),
            )
        })
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(_) => self.usize(key),
        }
    }

    fn string_or(&self, key: &str, default: &str) -> String {
        self.raw(key)
            .map(|(v, _)| v.to_string())
            .unwrap_or_else(|| default.to_string())
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let (v, line) = self.require(key)?;
        v.split(',')
            .map(|p| {
                p.trim().parse().map_err(|_| {
                    field_err(
                        self.name,
                        key,
                        line,
                        &format!("expected comma-separated numbers, got '{p}'"),
                    )
                })
            })
            .collect()
    }

    fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(_) => self.f64_list(key),
        }
    }

    fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some((v, line)) => v
                .split(',')
                .map(|p| {
                    p.trim().parse().map_err(|_| {
                        field_err(
                            self.name,
                            key,
                            line,
                            &format!("expected comma-separated integers, got '{p}'"),
                        )
                    })
                })
                .collect(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sections = Sections::parse(text)?;
        sections.known_sections(&[
            "experiment",
            "domain",
            "grid",
            "kernel",
            "problem",
            "steer",
            "simulate",
            "diagnose",
            "identities",
            "output",
        ])?;
        let view = |name: &'static str| SectionView {
            name,
            entries: sections.section(name),
        };

        let experiment = view("experiment");
        let kind = match experiment.string_or("kind", "simulate").as_str() {
            "simulate" => ExperimentKind::Simulate,
            "steer" => ExperimentKind::Steer,
            "diagnose" => ExperimentKind::Diagnose,
            "identities" => ExperimentKind::Identities,
            other => {
                return Err(Error::Config(format!(
                    "[experiment] kind: unknown experiment kind '{other}'"
                )))
            }
        };
        let seed = experiment.usize_or("seed", 0)? as u64;

        let domain_view = view("domain");
        let domain = match domain_view.string_or("kind", "interval").as_str() {
            "interval" => {
                let length = domain_view.f64_or("length", std::f64::consts::PI)?;
                if length <= 0.0 {
                    return Err(Error::Config(format!(
                        "[domain] length must be positive, got {length}"
                    )));
                }
                let n_max = domain_view.usize_or("n_max", 16)?;
                if n_max == 0 {
                    return Err(Error::Config("[domain] n_max must be at least 1".into()));
                }
                let gamma = match domain_view.string_or("gamma", "both").as_str() {
                    "left" => GammaSelect::Left,
                    "right" => GammaSelect::Right,
                    "both" => GammaSelect::Both,
                    other => {
                        return Err(Error::Config(format!(
                            "[domain] gamma: expected left|right|both, got '{other}'"
                        )))
                    }
                };
                DomainSpec::Interval {
                    length,
                    n_max,
                    gamma,
                }
            }
            "rectangle" => {
                let a = domain_view.f64("a")?;
                let b = domain_view.f64("b")?;
                let cutoff = domain_view.f64("cutoff")?;
                let (edges_raw, line) = domain_view.require("edges")?;
                let mut edges = Vec::new();
                for tok in edges_raw.split(',') {
                    edges.push(match tok.trim() {
                        "left" => Edge::Left,
                        "right" => Edge::Right,
                        "bottom" => Edge::Bottom,
                        "top" => Edge::Top,
                        other => {
                            return Err(field_err(
                                "domain",
                                "edges",
                                line,
                                &format!("unknown edge '{other}'"),
                            ))
                        }
                    });
                }
                DomainSpec::Rectangle { a, b, cutoff, edges }
            }
            other => {
                return Err(Error::Config(format!(
                    "[domain] kind: expected interval|rectangle, got '{other}'"
                )))
            }
        };

        let grid_view = view("grid");
        let t_end = grid_view.f64_or("t_end", 2.0)?;
        let n_steps = grid_view.usize_or("n_steps", 2000)?;
        if t_end <= 0.0 {
            return Err(Error::Config(format!(
                "[grid] t_end must be positive, got {t_end}"
            )));
        }
        if n_steps < 2 {
            return Err(Error::Config(format!(
                "[grid] n_steps must be at least 2, got {n_steps}"
            )));
        }
        let grid = TimeGrid::new(t_end, n_steps);

        let kernel_view = view("kernel");
        let kernel = match kernel_view.string_or("kind", "zero").as_str() {
            "zero" => KernelSpec::ClosedForm(ClosedForm::zero()),
            "constant" => KernelSpec::ClosedForm(ClosedForm::Constant {
                value: kernel_view.f64("value")?,
            }),
            "exponential" => KernelSpec::ClosedForm(ClosedForm::Exponential {
                amplitude: kernel_view.f64_or("amplitude", 1.0)?,
                rate: kernel_view.f64_or("rate", 1.0)?,
            }),
            "polynomial" => KernelSpec::ClosedForm(ClosedForm::Polynomial {
                coeffs: kernel_view.f64_list("coeffs")?,
            }),
            "csv" => {
                let (path, line) = kernel_view.require("path")?;
                let path = PathBuf::from(path);
                if !path.exists() {
                    return Err(field_err(
                        "kernel",
                        "path",
                        line,
                        &format!("file {} does not exist", path.display()),
                    ));
                }
                KernelSpec::Csv { path }
            }
            other => {
                return Err(Error::Config(format!(
                    "[kernel] kind: expected zero|constant|exponential|polynomial|csv, got '{other}'"
                )))
            }
        };

        let problem = view("problem");
        let alpha = problem.f64_or("alpha", 0.0)?;
        let source = match problem.string_or("source", "maccamy").as_str() {
            "maccamy" => SystemSource::MacCamy,
            "direct" => SystemSource::Direct {
                b: problem.f64_or("b", 0.0)?,
            },
            "system" => {
                let (path, line) = problem.require("path")?;
                let path = PathBuf::from(path);
                if !path.join("system.txt").exists() {
                    return Err(field_err(
                        "problem",
                        "path",
                        line,
                        &format!("{} does not contain system.txt", path.display()),
                    ));
                }
                SystemSource::System { path }
            }
            other => {
                return Err(Error::Config(format!(
                    "[problem] source: expected maccamy|direct|system, got '{other}'"
                )))
            }
        };

        let steer_view = view("steer");
        let steer = SteerSpec {
            initial: steer_view.f64_list_or("initial", &[1.0])?,
            target: steer_view.f64_list_or("target", &[0.0, 1.0])?,
            n_modes: steer_view.usize_or("n_modes", 8)?,
            basis: match steer_view.string_or("basis", "hats").as_str() {
                "hats" => crate::control::ControlBasis::Hats,
                "trig" => crate::control::ControlBasis::Trig {
                    max_frequency: steer_view.usize_or("max_frequency", 8)?,
                },
                "sine" => crate::control::ControlBasis::Sine {
                    max_frequency: steer_view.usize_or("max_frequency", 16)?,
                },
                other => {
                    return Err(Error::Config(format!(
                        "[steer] basis: expected hats|trig|sine, got '{other}'"
                    )))
                }
            },
            regularization: match steer_view.raw("regularization") {
                None => None,
                Some(("auto", _)) => None,
                Some((v, line)) => {
                    let eps: f64 = v.parse().map_err(|_| {
                        field_err(
                            "steer",
                            "regularization",
                            line,
                            &format!("expected 'auto' or a number, got '{v}'"),
                        )
                    })?;
                    if eps < 0.0 {
                        return Err(field_err(
                            "steer",
                            "regularization",
                            line,
                            "must be nonnegative",
                        ));
                    }
                    Some(eps)
                }
            },
        };
        if steer.n_modes == 0 {
            return Err(Error::Config("[steer] n_modes must be at least 1".into()));
        }

        let sim_view = view("simulate");
        let simulate = SimulateSpec {
            initial: sim_view.f64_list_or("initial", &[1.0])?,
            initial_velocity: match sim_view.raw("initial_velocity") {
                None => None,
                Some(_) => Some(sim_view.f64_list("initial_velocity")?),
            },
            field_points: sim_view.usize_or("field_points", 41)?,
            time_stride: sim_view.usize_or("time_stride", 100)?,
        };

        let diag_view = view("diagnose");
        let diagnose = DiagnoseSpec {
            mode_sweep: diag_view.usize_list_or("mode_sweep", &[8, 16, 32])?,
            samples: diag_view.usize_or("samples", 5)?,
        };

        let id_view = view("identities");
        let identities = IdentitiesSpec {
            lambdas: id_view.f64_list_or("lambdas", &[1.0, 5.0, 20.0])?,
        };

        let out_view = view("output");
        let output_dir = PathBuf::from(out_view.string_or("dir", "out"));
        let tolerance = out_view.f64_or("tolerance", 1e-6)?;
        if tolerance <= 0.0 {
            return Err(Error::Config(
                "[output] tolerance must be positive".into(),
            ));
        }

        let config = Self {
            kind,
            seed,
            domain,
            grid,
            kernel,
            alpha,
            source,
            steer,
            simulate,
            diagnose,
            identities,
            output_dir,
            tolerance,
        };
        config.validate()?;
        Ok(config)
    }

    /// Build the spectral domain this config describes.
    pub fn build_domain(&self) -> Result<SpectralDomain> {
        match &self.domain {
            DomainSpec::Interval {
                length,
                n_max,
                gamma,
            } => interval_domain(*length, *n_max, *gamma),
            DomainSpec::Rectangle { a, b, cutoff, edges } => {
                rectangle_domain(*a, *b, *cutoff, edges)
            }
        }
    }

    /// Cross-field checks that need the assembled pieces, including the
    /// `dt·ω < 2` stability bound at the largest configured mode.
    fn validate(&self) -> Result<()> {
        if matches!(self.kernel, KernelSpec::Csv { .. })
            && matches!(self.source, SystemSource::MacCamy)
        {
            return Err(Error::Config(
                "[kernel] kind = csv requires [problem] source = direct; the reduction needs closed-form derivatives".into(),
            ));
        }
        let domain = self.build_domain()?;
        let lambda_max = domain.lambda(domain.n_modes() - 1);
        let dt = self.grid.dt();
        if dt * lambda_max >= 2.0 {
            return Err(Error::CflViolation {
                dt,
                omega: lambda_max,
                suggested: 1.8 / lambda_max,
            });
        }
        if self.kind == ExperimentKind::Steer && 2 * self.steer.n_modes > domain.n_modes() {
            return Err(Error::Config(format!(
                "[steer] n_modes = {} needs a domain with at least {} modes for verification (n_max = {})",
                self.steer.n_modes,
                2 * self.steer.n_modes,
                domain.n_modes()
            )));
        }
        if self.kind == ExperimentKind::Diagnose {
            if let Some(long) = self
                .diagnose
                .mode_sweep
                .iter()
                .find(|&&m| m == 0 || m > domain.n_modes())
            {
                return Err(Error::Config(format!(
                    "[diagnose] mode_sweep entry {long} outside 1..={}",
                    domain.n_modes()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[experiment]
kind = simulate

[domain]
kind = interval
length = 3.141592653589793
n_max = 4
gamma = both

[grid]
t_end = 1.0
n_steps = 200

[kernel]
kind = exponential
amplitude = 1.0
rate = 1.0

[problem]
alpha = 0.1

[output]
dir = out
";

    #[test]
    fn minimal_config_parses() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.kind, ExperimentKind::Simulate);
        assert_eq!(c.grid.n_steps(), 200);
        assert!(matches!(
            c.kernel,
            KernelSpec::ClosedForm(ClosedForm::Exponential { .. })
        ));
        assert_eq!(c.build_domain().unwrap().n_modes(), 4);
    }

    #[test]
    fn negative_horizon_is_rejected() {
        let bad = MINIMAL.replace("t_end = 1.0", "t_end = -1.0");
        match ExperimentConfig::parse(&bad) {
            Err(Error::Config(msg)) => assert!(msg.contains("t_end"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_section_is_rejected() {
        let bad = format!("{MINIMAL}\n[extra]\nx = 1\n");
        assert!(matches!(
            ExperimentConfig::parse(&bad),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn field_level_message_names_the_key() {
        let bad = MINIMAL.replace("n_steps = 200", "n_steps = many");
        match ExperimentConfig::parse(&bad) {
            Err(Error::Config(msg)) => {
                assert!(msg.contains("n_steps") && msg.contains("many"), "{msg}")
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn cfl_is_checked_at_load() {
        let bad = MINIMAL
            .replace("n_steps = 200", "n_steps = 2")
            .replace("n_max = 4", "n_max = 16");
        assert!(matches!(
            ExperimentConfig::parse(&bad),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn steer_requires_verification_headroom() {
        let bad = MINIMAL
            .replace("kind = simulate", "kind = steer")
            .replace("n_max = 4", "n_max = 8")
            + "\n[steer]\nn_modes = 8\n";
        match ExperimentConfig::parse(&bad) {
            Err(Error::Config(msg)) => assert!(msg.contains("verification"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn csv_kernel_loads_and_checks_the_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kernel.csv");
        let g = crate::grid::TimeGrid::new(1.0, 200);
        crate::grid::SampledKernel::from_fn(g, |t| (-t).exp())
            .write_csv(&path)
            .unwrap();

        let base = MINIMAL
            .replace(
                "kind = exponential\namplitude = 1.0\nrate = 1.0",
                &format!("kind = csv\npath = {}", path.display()),
            )
            .replace("alpha = 0.1", "alpha = 0.0\nsource = direct");
        let c = ExperimentConfig::parse(&base).unwrap();
        let k = c.kernel.build(c.grid).unwrap();
        assert_eq!(k.len(), 201);

        // Grid mismatch is caught when the kernel is built.
        let mismatched = base.replace("n_steps = 200", "n_steps = 300");
        let c = ExperimentConfig::parse(&mismatched).unwrap();
        assert!(matches!(c.kernel.build(c.grid), Err(Error::Config(_))));

        // The reduction path refuses sampled kernels up front.
        let maccamy = base.replace("source = direct", "source = maccamy");
        match ExperimentConfig::parse(&maccamy) {
            Err(Error::Config(msg)) => assert!(msg.contains("closed-form"), "{msg}"),
            other => panic!("expected rejection, got {other:?}"),
        }

        // Missing files are named in the error.
        let missing = base.replace(&path.display().to_string(), "/nonexistent/k.csv");
        assert!(matches!(
            ExperimentConfig::parse(&missing),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rectangle_domain_spec_parses() {
        let text = MINIMAL.replace(
            "kind = interval\nlength = 3.141592653589793\nn_max = 4\ngamma = both",
            "kind = rectangle\na = 3.141592653589793\nb = 3.141592653589793\ncutoff = 10.0\nedges = left, bottom",
        );
        let c = ExperimentConfig::parse(&text).unwrap();
        let d = c.build_domain().unwrap();
        assert_eq!(d.dimension(), 2);
        assert!(d.n_modes() >= 3);
    }
}
