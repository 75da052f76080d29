//! Uniform time grids and sampled kernels.
//!
//! Every time-dependent quantity in this crate lives on a [`TimeGrid`]:
//! `n_steps + 1` equally spaced nodes covering `[0, t_end]`. A
//! [`SampledKernel`] is a scalar function sampled on such a grid, optionally
//! tagged with the closed form it was sampled from so that exact values and
//! derivatives stay available.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Uniform partition of `[0, t_end]` into `n_steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// A grid needs at least two intervals and positive extent.
    pub fn new(t_end: f64, n_steps: usize) -> Self {
        assert!(t_end > 0.0, "t_end must be positive, got {t_end}");
        assert!(n_steps >= 2, "need at least 2 steps, got {n_steps}");
        Self { t_end, n_steps }
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    /// Node `t_j = j * dt`.
    pub fn node(&self, j: usize) -> f64 {
        debug_assert!(j <= self.n_steps);
        self.t_end * j as f64 / self.n_steps as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|j| self.node(j))
    }

    /// Same extent, twice the resolution.
    pub fn refined(&self) -> Self {
        Self::new(self.t_end, self.n_steps * 2)
    }

    /// Error when two kernels do not share a grid.
    pub(crate) fn mismatch(&self, other: &TimeGrid) -> Error {
        Error::GridMismatch {
            left_t_end: self.t_end,
            left_n: self.n_steps,
            right_t_end: other.t_end,
            right_n: other.n_steps,
        }
    }
}

/// Closed forms a kernel can be sampled from. Carrying the closed form keeps
/// exact evaluation and exact derivatives of any order available, which the
/// second-order reduction needs.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    Constant {
        value: f64,
    },
    /// `amplitude * exp(-rate * t)`
    Exponential {
        amplitude: f64,
        rate: f64,
    },
    /// `coeffs[0] + coeffs[1] t + coeffs[2] t^2 + ...`
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `amplitude * sin(frequency * t)`
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    /// `amplitude * cos(frequency * t)`
    Cosine {
        amplitude: f64,
        frequency: f64,
    },
}

impl ClosedForm {
    pub fn zero() -> Self {
        ClosedForm::Constant { value: 0.0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.deriv(0, t)
    }

    /// Exact derivative of the given order.
    pub fn deriv(&self, order: usize, t: f64) -> f64 {
        match self {
            ClosedForm::Constant { value } => {
                if order == 0 {
                    *value
                } else {
                    0.0
                }
            }
            ClosedForm::Exponential { amplitude, rate } => {
                amplitude * (-rate).powi(order as i32) * (-rate * t).exp()
            }
            ClosedForm::Polynomial { coeffs } => {
                let mut acc = 0.0;
                for (k, &c) in coeffs.iter().enumerate().skip(order) {
                    // d^m/dt^m t^k = k!/(k-m)! t^(k-m)
                    let mut factor = c;
                    for i in (k - order + 1)..=k {
                        factor *= i as f64;
                    }
                    acc += factor * t.powi((k - order) as i32);
                }
                acc
            }
            ClosedForm::Sine {
                amplitude,
                frequency,
            } => {
                let a = amplitude * frequency.powi(order as i32);
                match order % 4 {
                    0 => a * (frequency * t).sin(),
                    1 => a * (frequency * t).cos(),
                    2 => -a * (frequency * t).sin(),
                    _ => -a * (frequency * t).cos(),
                }
            }
            ClosedForm::Cosine {
                amplitude,
                frequency,
            } => {
                let a = amplitude * frequency.powi(order as i32);
                match order % 4 {
                    0 => a * (frequency * t).cos(),
                    1 => -a * (frequency * t).sin(),
                    2 => -a * (frequency * t).cos(),
                    _ => a * (frequency * t).sin(),
                }
            }
        }
    }

    /// Short name used in diagnostics and config files.
    pub fn name(&self) -> &'static str {
        match self {
            ClosedForm::Constant { .. } => "constant",
            ClosedForm::Exponential { .. } => "exponential",
            ClosedForm::Polynomial { .. } => "polynomial",
            ClosedForm::Sine { .. } => "sine",
            ClosedForm::Cosine { .. } => "cosine",
        }
    }
}

/// Scalar function of time sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKernel {
    grid: TimeGrid,
    values: Vec<f64>,
    closed_form: Option<ClosedForm>,
}

impl SampledKernel {
    /// Wrap raw samples; `values` must hold one entry per node.
    pub fn from_values(grid: TimeGrid, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            grid.len(),
            "sample count {} does not match node count {}",
            values.len(),
            grid.len()
        );
        Self {
            grid,
            values,
            closed_form: None,
        }
    }

    /// Sample a closed form exactly at the nodes and remember where the
    /// samples came from.
    pub fn from_closed_form(grid: TimeGrid, form: ClosedForm) -> Self {
        let values = grid.nodes().map(|t| form.eval(t)).collect();
        Self {
            grid,
            values,
            closed_form: Some(form),
        }
    }

    /// Sample an arbitrary function; no closed-form tag.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self {
            grid,
            values,
            closed_form: None,
        }
    }

    pub fn zero(grid: TimeGrid) -> Self {
        Self::from_closed_form(grid, ClosedForm::zero())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed_form.as_ref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest absolute sample.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute difference of samples; errors if grids differ.
    pub fn sup_distance(&self, other: &SampledKernel) -> Result<f64> {
        if self.grid != other.grid {
            return Err(self.grid.mismatch(&other.grid));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// True when every sample is exactly zero.
    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Pointwise negation. The closed-form tag is dropped.
    pub fn negated(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| -v).collect(),
            closed_form: None,
        }
    }

    /// Pointwise linear combination `self + c * other` on a shared grid.
    pub fn add_scaled(&self, c: f64, other: &SampledKernel) -> Result<Self> {
        if self.grid != other.grid {
            return Err(self.grid.mismatch(&other.grid));
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
            closed_form: None,
        })
    }

    /// Write as two-column CSV `t,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("t,value\n");
        for (t, v) in self.grid.nodes().zip(&self.values) {
            let _ = writeln!(out, "{t},{v}");
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Read a two-column CSV written by [`write_csv`](Self::write_csv).
    /// The grid is reconstructed from the node column.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('t')) {
                continue;
            }
            let mut parts = line.split(',');
            let (Some(t), Some(v)) = (parts.next(), parts.next()) else {
                return Err(Error::Config(format!(
                    "{}:{}: expected `t,value`",
                    path.display(),
                    lineno + 1
                )));
            };
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1))
                })
            };
            ts.push(parse(t)?);
            vs.push(parse(v)?);
        }
        if ts.len() < 3 {
            return Err(Error::Config(format!(
                "{}: need at least 3 sample rows",
                path.display()
            )));
        }
        let t_end = *ts.last().unwrap();
        if t_end <= 0.0 {
            return Err(Error::Config(format!(
                "{}: final node must be positive",
                path.display()
            )));
        }
        Ok(Self::from_values(
            TimeGrid::new(t_end, ts.len() - 1),
            vs,
        ))
    }
}
