//! Boundary-control synthesis.
//!
//! Builds the control-to-state map on a truncated mode set, solves the
//! minimum-norm steering problem (the finite rendering of the moment
//! problem), assembles the Gram matrix of the exponential moment family
//! with its Riesz-bound estimates, probes the annihilator of the reachable
//! set through the adjoint trace, and implements eigenvalue deflation.

use crate::error::{Error, Result};
use crate::field::{controlled_evolution, free_evolution, trace_norm, WaveSystem};
use crate::grid::{SampledKernel, TimeGrid};
use crate::modal::solve_mode_timestep;
use crate::spectral::{SpectralDomain, SpectralVector};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;

/// Relative `σ_min/σ_max` below which an unregularized solve is refused.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Time basis of a boundary control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlBasis {
    /// Piecewise-linear hats on the grid nodes `0..n_steps-1`. The hat at
    /// the terminal node is excluded: it cannot influence the terminal
    /// state.
    Hats,
    /// `1, cos(2πmt/T), sin(2πmt/T)` for `m = 1..=max_frequency`.
    Trig { max_frequency: usize },
    /// `sin(πmt/T)` for `m = 1..=max_frequency`: vanishes at both ends,
    /// so its coupling to mode frequencies beyond the basis band decays
    /// quadratically. The low-leakage choice for steering.
    Sine { max_frequency: usize },
}

impl ControlBasis {
    pub fn len(&self, grid: &TimeGrid) -> usize {
        match self {
            ControlBasis::Hats => grid.n_steps(),
            ControlBasis::Trig { max_frequency } => 2 * max_frequency + 1,
            ControlBasis::Sine { max_frequency } => *max_frequency,
        }
    }

    /// Value of basis element `k` at grid node `j`.
    pub fn eval_node(&self, grid: &TimeGrid, k: usize, j: usize) -> f64 {
        match self {
            ControlBasis::Hats => {
                if j == k {
                    1.0
                } else {
                    0.0
                }
            }
            ControlBasis::Trig { .. } => {
                if k == 0 {
                    1.0
                } else {
                    let m = k.div_ceil(2) as f64;
                    let arg = 2.0 * std::f64::consts::PI * m * grid.node(j) / grid.t_end();
                    if k % 2 == 1 {
                        arg.cos()
                    } else {
                        arg.sin()
                    }
                }
            }
            ControlBasis::Sine { .. } => {
                let m = (k + 1) as f64;
                (std::f64::consts::PI * m * grid.node(j) / grid.t_end()).sin()
            }
        }
    }
}

/// A boundary control on `Γ × (0,T)`: coefficients over a declared time
/// basis per boundary node, plus the induced grid samples.
#[derive(Debug, Clone)]
pub struct ControlSignal {
    grid: TimeGrid,
    basis: ControlBasis,
    /// `coefficients[p][k]` for boundary node `p`, basis element `k`.
    coefficients: Vec<Vec<f64>>,
    /// `samples[p][j]` on the grid nodes.
    samples: Vec<Vec<f64>>,
}

impl ControlSignal {
    pub fn zero(grid: TimeGrid, n_boundary: usize, basis: ControlBasis) -> Self {
        Self::from_coefficients(grid, basis, vec![vec![0.0; basis.len(&grid)]; n_boundary])
    }

    /// Build from basis coefficients; samples follow.
    pub fn from_coefficients(
        grid: TimeGrid,
        basis: ControlBasis,
        coefficients: Vec<Vec<f64>>,
    ) -> Self {
        let blen = basis.len(&grid);
        let samples = coefficients
            .iter()
            .map(|row| {
                assert_eq!(row.len(), blen, "coefficient row length");
                match basis {
                    ControlBasis::Hats => {
                        let mut s = vec![0.0; grid.len()];
                        s[..blen].copy_from_slice(row);
                        s
                    }
                    _ => (0..grid.len())
                        .map(|j| {
                            row.iter()
                                .enumerate()
                                .map(|(k, c)| c * basis.eval_node(&grid, k, j))
                                .sum()
                        })
                        .collect(),
                }
            })
            .collect();
        Self {
            grid,
            basis,
            coefficients,
            samples,
        }
    }

    /// Wrap raw node samples as a hat-basis signal. The sample at the
    /// terminal node is kept for export and quadrature but never
    /// influences the terminal state.
    pub fn from_node_samples(grid: TimeGrid, samples: Vec<Vec<f64>>) -> Self {
        let coefficients = samples
            .iter()
            .map(|row| {
                assert_eq!(row.len(), grid.len(), "sample row length");
                row[..grid.n_steps()].to_vec()
            })
            .collect();
        Self {
            grid,
            basis: ControlBasis::Hats,
            coefficients,
            samples,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn basis(&self) -> ControlBasis {
        self.basis
    }

    pub fn n_boundary(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self, p: usize) -> &[f64] {
        &self.samples[p]
    }

    pub fn coefficients(&self, p: usize) -> &[f64] {
        &self.coefficients[p]
    }

    /// Largest discrepancy between stored samples and re-evaluated basis
    /// combination (zero for consistent signals).
    pub fn consistency_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, s) in self.coefficients.iter().zip(&self.samples) {
            #[allow(clippy::needless_range_loop)]
            for j in 0..self.grid.n_steps() {
                let v: f64 = match self.basis {
                    ControlBasis::Hats => row.get(j).copied().unwrap_or(0.0),
                    _ => row
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c * self.basis.eval_node(&self.grid, k, j))
                        .sum(),
                };
                worst = worst.max((v - s[j]).abs());
            }
        }
        worst
    }

    /// Discrete `L²(Γ×(0,T))` norm against the domain's boundary weights.
    pub fn norm(&self, domain: &SpectralDomain) -> f64 {
        let values: Vec<Vec<f64>> = self.samples.clone();
        trace_norm(domain, &self.grid, &values)
    }

    /// The same control on the once-refined grid. Hat signals interpolate
    /// linearly (exact for piecewise-linear data); trig signals re-evaluate
    /// their basis.
    pub fn refined(&self) -> Self {
        let fine = self.grid.refined();
        match self.basis {
            ControlBasis::Hats => {
                let samples = self
                    .samples
                    .iter()
                    .map(|row| {
                        let mut out = Vec::with_capacity(fine.len());
                        for j in 0..row.len() - 1 {
                            out.push(row[j]);
                            out.push(0.5 * (row[j] + row[j + 1]));
                        }
                        out.push(*row.last().unwrap());
                        out
                    })
                    .collect();
                Self::from_node_samples(fine, samples)
            }
            _ => Self::from_coefficients(fine, self.basis, self.coefficients.clone()),
        }
    }

    /// Export as CSV `t,node_0,node_1,...`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("t");
        for p in 0..self.n_boundary() {
            let _ = write!(out, ",node_{p}");
        }
        out.push('\n');
        for (j, t) in self.grid.nodes().enumerate() {
            let _ = write!(out, "{t}");
            for row in &self.samples {
                let _ = write!(out, ",{}", row[j]);
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Discrete Duhamel weight of grid node `j` (the first step of the march
/// carries half weight).
fn duhamel_weight(j: usize) -> f64 {
    if j == 0 {
        0.5
    } else {
        1.0
    }
}

/// The control-to-state map on a truncated mode set: column `(p, k)` holds
/// the modal terminal state produced by basis element `k` acting on
/// boundary node `p`.
#[derive(Debug, Clone)]
pub struct InputMap {
    pub matrix: DMatrix<f64>,
    /// Lumped control-space mass of each column (hat basis); ones for the
    /// trig basis.
    pub column_weights: Vec<f64>,
    grid: TimeGrid,
    basis: ControlBasis,
    n_boundary: usize,
}

/// Assemble the input map for the first `n_modes` modes.
///
/// Internally each mode's fundamental solution `ψ_n` (data `(0,1)`) is
/// computed once; the column for a basis element is its discrete Duhamel
/// pairing with `ψ_n`, which reproduces the forward solve of that element
/// exactly (the march is linear and shift-invariant).
fn mode_fundamentals(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    n_modes: usize,
) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    (0..n_modes)
        .into_par_iter()
        .map(|n| Ok(solve_mode_timestep(&sys.modal_system(domain.lambda(n)), 0.0, 1.0, None)?.psi))
        .collect()
}

/// Displacement responses `w_n(t_m)` per basis column, one row block per
/// mode, built from the fundamental solutions via the discrete Duhamel
/// pairing.
fn response_rows(
    domain: &SpectralDomain,
    fundamentals: &[Vec<f64>],
    basis: ControlBasis,
    grid: &TimeGrid,
    at: usize,
) -> DMatrix<f64> {
    let dt = grid.dt();
    let blen = basis.len(grid);
    let n_boundary = domain.boundary().len();
    let mut matrix = DMatrix::zeros(fundamentals.len(), n_boundary * blen);
    for (n, psi) in fundamentals.iter().enumerate() {
        for (p, node) in domain.boundary().iter().enumerate() {
            let scale = -node.weight * domain.trace(n)[p] * dt;
            for k in 0..blen {
                let col = p * blen + k;
                let v = match basis {
                    ControlBasis::Hats => {
                        if k <= at {
                            duhamel_weight(k) * psi[at - k]
                        } else {
                            0.0
                        }
                    }
                    _ => {
                        let mut acc = 0.0;
                        for j in 0..=at {
                            acc += duhamel_weight(j) * basis.eval_node(grid, k, j) * psi[at - j];
                        }
                        acc
                    }
                };
                matrix[(n, col)] = scale * v;
            }
        }
    }
    matrix
}

pub fn input_map(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    n_modes: usize,
    basis: ControlBasis,
) -> Result<InputMap> {
    assert!(n_modes <= domain.n_modes());
    let grid = *sys.grid();
    let n_s = grid.n_steps();
    let dt = grid.dt();
    let blen = basis.len(&grid);
    let n_boundary = domain.boundary().len();

    sys.check_cfl(domain.lambda(n_modes - 1))?;
    let fundamentals = mode_fundamentals(domain, sys, n_modes)?;
    let matrix = response_rows(domain, &fundamentals, basis, &grid, n_s);

    let column_weights = (0..n_boundary * blen)
        .map(|col| match basis {
            ControlBasis::Hats => {
                let p = col / blen;
                let k = col % blen;
                domain.boundary()[p].weight * dt * duhamel_weight(k)
            }
            ControlBasis::Trig { .. } => 1.0,
            // The sine family is orthogonal over (0,T) with mass T/2, so
            // the weighted coefficient norm is the control L2 norm.
            ControlBasis::Sine { .. } => {
                let p = col / blen;
                domain.boundary()[p].weight * grid.t_end() / 2.0
            }
        })
        .collect();

    Ok(InputMap {
        matrix,
        column_weights,
        grid,
        basis,
        n_boundary,
    })
}

/// Terminal-velocity responses `w_n'(T)` per basis column for the first
/// `n_modes` modes, using the same one-sided difference the solver reports
/// (so the rows match `terminal_velocity` of a forward solve exactly, by
/// linearity).
pub fn velocity_input_map(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    n_modes: usize,
    basis: ControlBasis,
) -> Result<DMatrix<f64>> {
    let grid = *sys.grid();
    let n_s = grid.n_steps();
    sys.check_cfl(domain.lambda(n_modes - 1))?;
    let fundamentals = mode_fundamentals(domain, sys, n_modes)?;
    let r0 = response_rows(domain, &fundamentals, basis, &grid, n_s);
    let r1 = response_rows(domain, &fundamentals, basis, &grid, n_s - 1);
    let r2 = response_rows(domain, &fundamentals, basis, &grid, n_s - 2);
    Ok((r0 * 3.0 - r1 * 4.0 + r2) / (2.0 * grid.dt()))
}

impl InputMap {
    /// The map expressed on an orthonormal control basis: `G W^{-1/2}`.
    /// Its singular values are the square roots of the controllability
    /// Gramian eigenvalues.
    pub fn weighted_matrix(&self) -> DMatrix<f64> {
        let mut m = self.matrix.clone();
        for (c, w) in self.column_weights.iter().enumerate() {
            let s = 1.0 / w.sqrt();
            for r in 0..m.nrows() {
                m[(r, c)] *= s;
            }
        }
        m
    }

    /// Coefficients in the orthonormal basis back to raw basis
    /// coefficients.
    pub fn unweight_coefficients(&self, d: &[f64]) -> Vec<f64> {
        d.iter()
            .zip(&self.column_weights)
            .map(|(v, w)| v / w.sqrt())
            .collect()
    }

    /// Wrap raw coefficients as a control signal.
    pub fn signal_from_coefficients(&self, c: &[f64]) -> ControlSignal {
        let blen = self.basis.len(&self.grid);
        let rows = (0..self.n_boundary)
            .map(|p| c[p * blen..(p + 1) * blen].to_vec())
            .collect();
        ControlSignal::from_coefficients(self.grid, self.basis, rows)
    }
}

/// Minimum-norm least-squares solution and its conditioning data.
#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub coefficients: Vec<f64>,
    pub residual: f64,
    pub coefficient_norm: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Minimize `‖G c - ξ‖² + ε ‖c‖²` through the singular value
/// decomposition. With `ε = 0` the matrix must be numerically full rank
/// (`σ_min/σ_max >= RANK_THRESHOLD`), otherwise the solve is refused with
/// a suggestion to regularize or enlarge the horizon.
pub fn min_norm_control(
    g: &DMatrix<f64>,
    target: &[f64],
    regularization: f64,
) -> Result<MinNormSolution> {
    assert_eq!(g.nrows(), target.len(), "target length");
    let svd = g.clone().svd(true, true);
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().cloned().fold(0.0f64, f64::max);
    let sigma_min = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
    if regularization == 0.0 && (sigma_max == 0.0 || sigma_min / sigma_max < RANK_THRESHOLD) {
        return Err(Error::IllConditioned {
            ratio: if sigma_max == 0.0 {
                0.0
            } else {
                sigma_min / sigma_max
            },
            threshold: RANK_THRESHOLD,
        });
    }

    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let xi = DVector::from_column_slice(target);
    let ut_xi = u.transpose() * &xi;
    let mut c = DVector::zeros(g.ncols());
    for i in 0..sigma.len() {
        let s = sigma[i];
        let gain = s / (s * s + regularization);
        c += v_t.row(i).transpose() * (gain * ut_xi[i]);
    }
    let residual = (g * &c - xi).norm();
    Ok(MinNormSolution {
        coefficient_norm: c.norm(),
        coefficients: c.as_slice().to_vec(),
        residual,
        sigma_min,
        sigma_max,
    })
}

/// Outcome of a steering run, with the verification data that backs it.
#[derive(Debug, Clone)]
pub struct SteeringReport {
    pub control: ControlSignal,
    pub target: SpectralVector,
    /// Terminal modal state of the verification solve (doubled modes,
    /// halved step), truncated to the design modes.
    pub achieved: SpectralVector,
    /// Relative least-squares residual on the design grid and modes.
    pub in_sample_residual: f64,
    /// Relative terminal error of the independent verification solve.
    pub verification_residual: f64,
    /// Absolute per-mode terminal error of the verification solve (design
    /// modes).
    pub residual_per_mode: Vec<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub condition: f64,
    /// Singular values of the weighted input map.
    pub gram_spectrum: Vec<f64>,
    pub regularization: f64,
    /// `(ε, residual, coefficient norm)` trail when the regularization
    /// policy had to sweep.
    pub lcurve: Vec<(f64, f64, f64)>,
    /// Control `L²(Γ×(0,T))` norm.
    pub control_norm: f64,
    /// Set when the verification residual exceeds ten times the in-sample
    /// residual: the synthesis leaked outside the design modes.
    pub truncation_leakage: bool,
    /// `s = 0` and `s = -1` norms of the verification terminal error.
    pub residual_l2: f64,
    pub residual_h_minus_one: f64,
    /// Relative terminal-velocity error of the verification solve in the
    /// `1/λ`-weighted norm; set only for pair-steering runs.
    pub velocity_residual: Option<f64>,
}

impl SteeringReport {
    /// Human-readable summary plus CSV attachments.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.control.write_csv(&dir.join("control.csv"))?;

        let mut csv = String::from("mode,target,achieved,abs_error\n");
        for n in 0..self.target.len() {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                n + 1,
                self.target.coeffs[n],
                self.achieved.coeffs[n],
                self.residual_per_mode[n]
            );
        }
        std::fs::write(dir.join("residual_per_mode.csv"), csv)?;

        let mut csv = String::from("index,sigma\n");
        for (i, s) in self.gram_spectrum.iter().enumerate() {
            let _ = writeln!(csv, "{},{}", i + 1, s);
        }
        std::fs::write(dir.join("gram_spectrum.csv"), csv)?;

        let mut out = String::new();
        let _ = writeln!(out, "steering report");
        let _ = writeln!(out, "in_sample_residual = {}", self.in_sample_residual);
        let _ = writeln!(
            out,
            "verification_residual = {}",
            self.verification_residual
        );
        let _ = writeln!(out, "residual_l2 = {}", self.residual_l2);
        let _ = writeln!(out, "residual_h_minus_one = {}", self.residual_h_minus_one);
        let _ = writeln!(out, "sigma_min = {}", self.sigma_min);
        let _ = writeln!(out, "sigma_max = {}", self.sigma_max);
        let _ = writeln!(out, "condition = {}", self.condition);
        let _ = writeln!(out, "regularization = {}", self.regularization);
        let _ = writeln!(out, "control_norm = {}", self.control_norm);
        let _ = writeln!(out, "truncation_leakage = {}", self.truncation_leakage);
        if let Some(v) = self.velocity_residual {
            let _ = writeln!(out, "velocity_residual = {v}");
        }
        for (e, r, n) in &self.lcurve {
            let _ = writeln!(out, "lcurve {e} {r} {n}");
        }
        std::fs::write(dir.join("steering.txt"), out)?;
        Ok(())
    }
}

/// Refine a system to the half-step grid (closed-form kernels resample
/// exactly; sampled kernels interpolate linearly).
fn refined_system(sys: &WaveSystem) -> WaveSystem {
    let fine = sys.grid().refined();
    let kernel = match sys.kernel().closed_form() {
        Some(form) => SampledKernel::from_closed_form(fine, form.clone()),
        None => {
            let v = sys.kernel().values();
            let mut out = Vec::with_capacity(fine.len());
            for j in 0..v.len() - 1 {
                out.push(v[j]);
                out.push(0.5 * (v[j] + v[j + 1]));
            }
            out.push(*v.last().unwrap());
            SampledKernel::from_values(fine, out)
        }
    };
    let mut refined = WaveSystem::new(sys.b(), kernel);
    if sys.laplacian_coeff() != 1.0 {
        refined = refined.with_laplacian_coeff(sys.laplacian_coeff());
    }
    refined
}

/// Options for a steering run.
#[derive(Debug, Clone)]
pub struct SteerOptions {
    pub n_modes: usize,
    /// `Some(ε)` forces one Tikhonov parameter; `None` tries the
    /// unregularized solve first and sweeps `ε` through `1e-12..=1e-4` on
    /// rank failure, picking the L-curve corner.
    pub regularization: Option<f64>,
    /// Time basis of the synthesized control. Hats reach everything the
    /// grid resolves; a trig basis capped below the first untargeted mode
    /// frequency suppresses truncation leakage.
    pub basis: ControlBasis,
    /// Pair steering: also constrain the terminal velocity of the design
    /// modes to these coefficients (rows weighted by `1/λ_n`). The default
    /// leaves the velocity free.
    pub velocity_target: Option<SpectralVector>,
}

impl SteerOptions {
    pub fn new(n_modes: usize) -> Self {
        Self {
            n_modes,
            regularization: None,
            basis: ControlBasis::Hats,
            velocity_target: None,
        }
    }

    pub fn with_regularization(mut self, eps: Option<f64>) -> Self {
        self.regularization = eps;
        self
    }

    pub fn with_basis(mut self, basis: ControlBasis) -> Self {
        self.basis = basis;
        self
    }

    pub fn with_velocity_target(mut self, target: SpectralVector) -> Self {
        self.velocity_target = Some(target);
        self
    }
}

/// Steer `w0` (at rest) to the truncated target over the first `n_modes`
/// modes, then verify against an independent forward solve with twice the
/// modes and half the step.
///
/// The synthesis works on the whole verification band: the moment system
/// carries the `n_modes` design targets plus zero net terminal state for
/// the guard modes up to `2 n_modes`. Without the guard rows the
/// minimum-norm control excites the untargeted band at a level the
/// verification solve then reports as leakage.
///
/// Whether the horizon actually controls the chosen boundary is the
/// caller's responsibility; it is not enforced here. On horizons that do
/// not, the unregularized solve is refused (or, under the automatic
/// policy, swept through Tikhonov parameters with the L-curve corner
/// recorded), and the annihilator probe is the diagnostic to consult.
///
/// The domain must carry at least `2 n_modes` modes for the verification
/// stage.
pub fn steer(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    w0: &SpectralVector,
    target: &SpectralVector,
    options: &SteerOptions,
) -> Result<SteeringReport> {
    let n_modes = options.n_modes;
    let regularization = options.regularization;
    if domain.n_modes() < 2 * n_modes {
        return Err(Error::Config(format!(
            "domain carries {} modes; verification needs {}",
            domain.n_modes(),
            2 * n_modes
        )));
    }
    assert!(target.len() >= n_modes, "target shorter than design modes");
    let n_band = 2 * n_modes;

    // Free drift of the initial state on the design grid.
    let w1 = SpectralVector::zeros(domain.n_modes());
    let drift = free_evolution(domain, sys, w0, &w1, None)?;
    let drift_terminal = drift.terminal_state();
    // Design targets, then guard targets holding the band at zero.
    let effective: Vec<f64> = (0..n_band)
        .map(|n| {
            let want = if n < n_modes { target.coeffs[n] } else { 0.0 };
            want - drift_terminal.coeffs[n]
        })
        .collect();
    let design_norm = effective[..n_modes]
        .iter()
        .map(|c| c * c)
        .sum::<f64>()
        .sqrt();

    let map = input_map(domain, sys, n_band, options.basis)?;
    let mut weighted = map.weighted_matrix();
    let mut effective = effective;
    if let Some(eta) = &options.velocity_target {
        // Pair steering: append velocity rows for the design modes,
        // balanced into the H^{-1}-like scale by 1/λ_n, with the free
        // drift's terminal velocity subtracted from the targets.
        assert!(eta.len() >= n_modes, "velocity target shorter than design modes");
        let velocity = velocity_input_map(domain, sys, n_modes, options.basis)?;
        let drift_velocity = drift.terminal_velocity();
        let old_rows = weighted.nrows();
        let mut grown = weighted.insert_rows(old_rows, n_modes, 0.0);
        for n in 0..n_modes {
            let scale = 1.0 / domain.lambda(n);
            for c in 0..grown.ncols() {
                grown[(old_rows + n, c)] =
                    scale * velocity[(n, c)] / map.column_weights[c].sqrt();
            }
            effective.push(scale * (eta.coeffs[n] - drift_velocity.coeffs[n]));
        }
        weighted = grown;
    }
    let effective = effective;
    let weighted = weighted;
    let effective_norm = effective.iter().map(|c| c * c).sum::<f64>().sqrt();
    // Conditioning reported for the design-mode moment problem (the first
    // block of rows).
    let gram_spectrum = {
        let design_block = weighted.rows(0, n_modes).into_owned();
        let svd = design_block.svd(false, false);
        let mut s: Vec<f64> = svd.singular_values.iter().cloned().collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    };
    let sigma_max = gram_spectrum[0];
    let sigma_min = *gram_spectrum.last().unwrap();

    let (solution, eps_used, lcurve) = if effective_norm < 1e-14 {
        // Nothing to do: the drift already reaches the target.
        (
            MinNormSolution {
                coefficients: vec![0.0; weighted.ncols()],
                residual: 0.0,
                coefficient_norm: 0.0,
                sigma_min,
                sigma_max,
            },
            0.0,
            Vec::new(),
        )
    } else {
        match regularization {
            Some(eps) => (min_norm_control(&weighted, &effective, eps)?, eps, Vec::new()),
            None => match min_norm_control(&weighted, &effective, 0.0) {
                Ok(s) => (s, 0.0, Vec::new()),
                Err(Error::IllConditioned { .. }) => sweep_regularization(&weighted, &effective)?,
                Err(e) => return Err(e),
            },
        }
    };

    let raw = map.unweight_coefficients(&solution.coefficients);
    let control = map.signal_from_coefficients(&raw);
    let in_sample = if effective_norm < 1e-14 || design_norm < 1e-14 {
        0.0
    } else {
        // Residual over the design block only.
        let c = DVector::from_column_slice(&solution.coefficients);
        let got = weighted.rows(0, n_modes) * &c;
        let mut acc = 0.0;
        for n in 0..n_modes {
            acc += (got[n] - effective[n]).powi(2);
        }
        acc.sqrt() / design_norm
    };

    // Independent verification: half step, doubled modes.
    let fine_sys = refined_system(sys);
    let fine_control = control.refined();
    let controlled = controlled_evolution(domain, &fine_sys, &fine_control)?;
    let fine_drift = free_evolution(domain, &fine_sys, w0, &w1, None)?;
    let n_verify = (2 * n_modes).min(domain.n_modes());
    let mut err = Vec::with_capacity(n_verify);
    let mut achieved = Vec::with_capacity(n_modes);
    for n in 0..n_verify {
        let total = controlled.terminal_state().coeffs[n] + fine_drift.terminal_state().coeffs[n];
        let want = if n < n_modes { target.coeffs[n] } else { 0.0 };
        if n < n_modes {
            achieved.push(total);
        }
        err.push(total - want);
    }
    let target_norm = (0..n_modes)
        .map(|n| target.coeffs[n] * target.coeffs[n])
        .sum::<f64>()
        .sqrt()
        .max(1e-30);
    let err_vec = SpectralVector::new(err.clone());
    let residual_l2 = domain.sobolev_norm(&err_vec, 0)?;
    let residual_h_minus_one = domain.sobolev_norm(&err_vec, -1)?;
    let verification = residual_l2 / target_norm;

    let velocity_residual = match &options.velocity_target {
        None => None,
        Some(eta) => {
            let total_v = controlled.terminal_velocity();
            let drift_v = fine_drift.terminal_velocity();
            let mut num = 0.0;
            let mut den = 0.0;
            for n in 0..n_modes {
                let scale = 1.0 / domain.lambda(n);
                let got = total_v.coeffs[n] + drift_v.coeffs[n];
                num += (scale * (got - eta.coeffs[n])).powi(2);
                den += (scale * eta.coeffs[n]).powi(2);
            }
            Some(num.sqrt() / den.sqrt().max(target_norm))
        }
    };

    Ok(SteeringReport {
        control_norm: control.norm(domain),
        control,
        target: SpectralVector::new(target.coeffs[..n_modes].to_vec()),
        achieved: SpectralVector::new(achieved),
        in_sample_residual: in_sample,
        verification_residual: verification,
        residual_per_mode: err[..n_modes].iter().map(|e| e.abs()).collect(),
        sigma_min,
        sigma_max,
        condition: if sigma_min > 0.0 {
            sigma_max / sigma_min
        } else {
            f64::INFINITY
        },
        gram_spectrum,
        regularization: eps_used,
        lcurve,
        truncation_leakage: verification > 10.0 * in_sample.max(1e-12),
        residual_l2,
        residual_h_minus_one,
        velocity_residual,
    })
}

/// `(ε, residual, coefficient norm)` triples recorded by a sweep.
type RegularizationTrail = Vec<(f64, f64, f64)>;

/// Logarithmic ε sweep with L-curve corner selection.
fn sweep_regularization(
    g: &DMatrix<f64>,
    target: &[f64],
) -> Result<(MinNormSolution, f64, RegularizationTrail)> {
    let mut trail = Vec::new();
    let mut solutions = Vec::new();
    let mut eps = 1e-12;
    while eps <= 1.0001e-4 {
        let s = min_norm_control(g, target, eps)?;
        trail.push((eps, s.residual, s.coefficient_norm));
        solutions.push((eps, s));
        eps *= 10.0f64.sqrt();
    }
    // Corner: farthest point from the chord between the endpoints of the
    // (log residual, log norm) curve.
    let pts: Vec<(f64, f64)> = trail
        .iter()
        .map(|(_, r, n)| (r.max(1e-300).ln(), n.max(1e-300).ln()))
        .collect();
    let (x0, y0) = pts[0];
    let (x1, y1) = *pts.last().unwrap();
    let (dx, dy) = (x1 - x0, y1 - y0);
    let len = (dx * dx + dy * dy).sqrt().max(1e-300);
    let mut best = 0usize;
    let mut best_d = -1.0;
    for (i, (x, y)) in pts.iter().enumerate() {
        let d = ((x - x0) * dy - (y - y0) * dx).abs() / len;
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    let (eps, sol) = solutions.swap_remove(best);
    Ok((sol, eps, trail))
}

/// Gram matrix of the moment family `Ψ_n e^{iλ_n t}` over
/// `L²(0,T; L²(Γ))`, with mirrored indices `λ_{-n} = -λ_n`,
/// `Ψ_{-n} = -Ψ_n`. Time integrals are closed-form.
#[derive(Debug, Clone)]
pub struct MomentGram {
    pub matrix: DMatrix<Complex64>,
    /// Smallest eigenvalue: lower Riesz-bound estimate.
    pub lower: f64,
    /// Largest eigenvalue: upper Riesz-bound estimate.
    pub upper: f64,
    /// Largest deviation from Hermitian symmetry (construction check).
    pub asymmetry: f64,
}

/// Assemble the moment Gram matrix for modes `1..=n_modes` and their
/// mirrors on the horizon `(0, t_end)`.
pub fn moment_gram(domain: &SpectralDomain, t_end: f64, n_modes: usize) -> MomentGram {
    assert!(n_modes <= domain.n_modes());
    // Signed index list: -n_modes..-1, 1..n_modes (rows in that order).
    let mut rows: Vec<(usize, f64)> = Vec::with_capacity(2 * n_modes);
    for n in (0..n_modes).rev() {
        rows.push((n, -domain.lambda(n)));
    }
    for n in 0..n_modes {
        rows.push((n, domain.lambda(n)));
    }

    let time_factor = |mu: f64| -> Complex64 {
        if mu.abs() < 1e-14 {
            Complex64::new(t_end, 0.0)
        } else {
            (Complex64::new(0.0, mu * t_end).exp() - Complex64::new(1.0, 0.0))
                / Complex64::new(0.0, mu)
        }
    };

    let dim = rows.len();
    let mut matrix = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for r in 0..dim {
        for c in 0..dim {
            let (nr, lr) = rows[r];
            let (nc, lc) = rows[c];
            // Ψ with the sign of its λ.
            let mut gamma = 0.0;
            for (p, node) in domain.boundary().iter().enumerate() {
                let pr = domain.trace(nr)[p] / lr;
                let pc = domain.trace(nc)[p] / lc;
                gamma += node.weight * pr * pc;
            }
            matrix[(r, c)] = gamma * time_factor(lr - lc);
        }
    }

    let mut asymmetry: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            asymmetry = asymmetry.max((matrix[(r, c)] - matrix[(c, r)].conj()).norm());
        }
    }

    // Hermitian eigenvalues through the real symmetric embedding
    // [[Re, -Im], [Im, Re]].
    let mut real = DMatrix::zeros(2 * dim, 2 * dim);
    for r in 0..dim {
        for c in 0..dim {
            let z = matrix[(r, c)];
            real[(r, c)] = z.re;
            real[(r + dim, c + dim)] = z.re;
            real[(r, c + dim)] = -z.im;
            real[(r + dim, c)] = z.im;
        }
    }
    let eigen = real.symmetric_eigen();
    let lower = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let upper = eigen.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    MomentGram {
        matrix,
        lower,
        upper,
        asymmetry,
    }
}

/// Outcome of the annihilator probe: the smallest singular value of the
/// map from truncated terminal-state annihilators `ξ0` to the boundary
/// trace of the adjoint run, and the annihilator candidate realizing it.
#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub sigma_min: f64,
    /// Coefficients of the minimizing `ξ0` (unit `L²` norm). When the
    /// probe collapses, the decay profile of these coefficients is the
    /// diagnostic counterpart of the regularity a genuine annihilator
    /// would need.
    pub minimizer: Vec<f64>,
}

/// Smallest singular value of the map from truncated terminal-state
/// annihilators `ξ0` to the boundary trace of the adjoint run on `(0,T)`.
/// Values bounded away from zero (and stable in the truncation) evidence
/// controllability; decay under truncation growth exposes its failure.
pub fn perp_probe(domain: &SpectralDomain, sys: &WaveSystem, n_modes: usize) -> Result<f64> {
    Ok(perp_probe_full(domain, sys, n_modes)?.sigma_min)
}

/// The probe together with its minimizing annihilator candidate.
pub fn perp_probe_full(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    n_modes: usize,
) -> Result<ProbeResult> {
    assert!(n_modes <= domain.n_modes());
    let grid = *sys.grid();
    let dt = grid.dt();
    let len = grid.len();
    sys.check_cfl(domain.lambda(n_modes - 1))?;

    let fundamentals = mode_fundamentals(domain, sys, n_modes)?;

    let n_boundary = domain.boundary().len();
    let mut probe = DMatrix::zeros(n_boundary * len, n_modes);
    for (p, node) in domain.boundary().iter().enumerate() {
        for j in 0..len {
            let w = if j == 0 || j == len - 1 { 0.5 } else { 1.0 };
            let row_weight = (node.weight * dt * w).sqrt();
            for n in 0..n_modes {
                probe[(p * len + j, n)] = row_weight * domain.trace(n)[p] * fundamentals[n][j];
            }
        }
    }
    let svd = probe.svd(false, true);
    let sigma = &svd.singular_values;
    let mut idx = 0;
    for i in 0..sigma.len() {
        if sigma[i] < sigma[idx] {
            idx = i;
        }
    }
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    Ok(ProbeResult {
        sigma_min: sigma[idx],
        minimizer: v_t.row(idx).iter().cloned().collect(),
    })
}

/// Deflate one eigenvalue group: `ξ_n ↦ (λ_n² - λ_ref²) ξ_n`. Entries whose
/// eigenvalue equals the reference eigenvalue bit-exactly are zeroed
/// exactly.
pub fn deflate(xi: &[f64], lambda_sq: &[f64], reference: usize) -> Vec<f64> {
    assert_eq!(xi.len(), lambda_sq.len());
    assert!(reference < xi.len(), "reference index within the active set");
    let lref = lambda_sq[reference];
    xi.iter()
        .zip(lambda_sq)
        .map(|(x, l)| (l - lref) * x)
        .collect()
}
