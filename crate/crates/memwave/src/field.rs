//! Space-time assembly over the Dirichlet spectrum.
//!
//! Free, forced, controlled and adjoint evolutions of the second-order
//! family `w'' = Δw + b w + K*w + F` realized mode by mode, boundary traces
//! with truncation diagnostics, the convolution kernel that reconstructs
//! memory solutions from wave solutions, and the direct-inequality ratio.

use crate::control::ControlSignal;
use crate::conv::{convolve, convolve_samples_complex, cosine_kernel, sine_kernel};
use crate::error::{Error, Result};
use crate::grid::{SampledKernel, TimeGrid};
use crate::modal::{solve_mode_timestep, ModalSystem, ModalTrajectory};
use crate::spectral::{SpectralDomain, SpectralVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;

/// The second-order system the field runs solve: zeroth-order coefficient
/// `b`, memory kernel `K` on the solve grid, and the Laplacian coefficient
/// `ν` (1 for the plain family; `N(0)` for systems produced by the
/// memory reduction, which may degenerate to 0).
#[derive(Debug, Clone)]
pub struct WaveSystem {
    b: f64,
    kernel: SampledKernel,
    laplacian_coeff: f64,
}

impl WaveSystem {
    pub fn new(b: f64, kernel: SampledKernel) -> Self {
        Self {
            b,
            kernel,
            laplacian_coeff: 1.0,
        }
    }

    /// Plain wave equation: `b = 0`, no memory.
    pub fn memoryless(grid: TimeGrid) -> Self {
        Self::new(0.0, SampledKernel::zero(grid))
    }

    /// The post-scaling system a memory reduction produced.
    pub fn from_second_order(s: &crate::maccamy::SecondOrderSystem) -> Self {
        Self {
            b: s.b_post(),
            kernel: s.kernel().clone(),
            laplacian_coeff: s.laplacian_coeff(),
        }
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn kernel(&self) -> &SampledKernel {
        &self.kernel
    }

    pub fn laplacian_coeff(&self) -> f64 {
        self.laplacian_coeff
    }

    pub fn grid(&self) -> &TimeGrid {
        self.kernel.grid()
    }

    /// Modal oscillator for eigenvalue `λ²`:
    /// `v'' = (b - ν λ²) v + K*v + g`, encoded with a positive effective
    /// frequency even when `ν = 0`.
    pub fn modal_system(&self, lambda: f64) -> ModalSystem {
        if self.laplacian_coeff > 0.0 {
            ModalSystem::new(
                self.laplacian_coeff.sqrt() * lambda,
                self.b,
                self.kernel.clone(),
            )
        } else {
            ModalSystem::new(1.0, self.b + 1.0, self.kernel.clone())
        }
    }

    /// Largest mode frequency the grid can march stably.
    pub fn check_cfl(&self, lambda_max: f64) -> Result<()> {
        self.modal_system(lambda_max).check_cfl()
    }

    /// Same system with a different Laplacian coefficient.
    pub fn with_laplacian_coeff(mut self, nu: f64) -> Self {
        assert!(nu >= 0.0);
        self.laplacian_coeff = nu;
        self
    }
}

/// Modal trajectories for modes `1..n_max` plus evaluators.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    grid: TimeGrid,
    trajectories: Vec<ModalTrajectory>,
}

impl FieldSolution {
    /// Assemble from per-mode trajectories (used when trajectories are
    /// post-processed, e.g. unscaled after a memory reduction).
    pub fn from_trajectories(grid: TimeGrid, trajectories: Vec<ModalTrajectory>) -> Self {
        Self { grid, trajectories }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.trajectories.len()
    }

    pub fn mode(&self, n: usize) -> &ModalTrajectory {
        &self.trajectories[n]
    }

    /// Modal coefficients of `w(T)`.
    pub fn terminal_state(&self) -> SpectralVector {
        SpectralVector::new(
            self.trajectories
                .iter()
                .map(|tr| *tr.psi.last().unwrap())
                .collect(),
        )
    }

    /// Modal coefficients of `w'(T)`.
    pub fn terminal_velocity(&self) -> SpectralVector {
        SpectralVector::new(
            self.trajectories
                .iter()
                .map(|tr| *tr.psi_prime.last().unwrap())
                .collect(),
        )
    }

    /// Point value `w(x, t_j) = Σ φ_n(x) w_n(t_j)`.
    pub fn evaluate(&self, domain: &SpectralDomain, point: [f64; 2], j: usize) -> f64 {
        self.trajectories
            .iter()
            .enumerate()
            .map(|(n, tr)| domain.eval_mode(n, point) * tr.psi[j])
            .sum()
    }

    /// Export `x(,y),t,w` on an evaluation lattice, skipping all but every
    /// `time_stride`-th node.
    pub fn write_field_csv(
        &self,
        domain: &SpectralDomain,
        per_side: usize,
        time_stride: usize,
        path: &Path,
    ) -> Result<()> {
        let stride = time_stride.max(1);
        let lattice = domain.evaluation_lattice(per_side);
        let mut out = String::from(if domain.dimension() == 1 {
            "x,t,w\n"
        } else {
            "x,y,t,w\n"
        });
        for point in lattice {
            for j in (0..self.grid.len()).step_by(stride) {
                let w = self.evaluate(domain, point, j);
                if domain.dimension() == 1 {
                    let _ = writeln!(out, "{},{},{w}", point[0], self.grid.node(j));
                } else {
                    let _ = writeln!(out, "{},{},{},{w}", point[0], point[1], self.grid.node(j));
                }
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

fn solve_modes(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    data: impl Fn(usize) -> (f64, f64) + Sync,
    forcing: Option<&[Vec<f64>]>,
) -> Result<FieldSolution> {
    let n = domain.n_modes();
    if let Some(f) = forcing {
        assert_eq!(f.len(), n, "need one forcing row per mode");
    }
    let trajectories: Result<Vec<_>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (w0, w1) = data(i);
            let g = forcing.map(|f| f[i].as_slice());
            solve_mode_timestep(&sys.modal_system(domain.lambda(i)), w0, w1, g)
        })
        .collect();
    Ok(FieldSolution {
        grid: *sys.grid(),
        trajectories: trajectories?,
    })
}

fn coeff(v: &SpectralVector, i: usize) -> f64 {
    v.coeffs.get(i).copied().unwrap_or(0.0)
}

/// Evolve initial data `(w0, w1)` with optional per-mode forcing samples.
/// Each mode solves `w_n'' = (b - λ_n²) w_n + K*w_n + F_n`.
pub fn free_evolution(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    w0: &SpectralVector,
    w1: &SpectralVector,
    forcing: Option<&[Vec<f64>]>,
) -> Result<FieldSolution> {
    solve_modes(domain, sys, |i| (coeff(w0, i), coeff(w1, i)), forcing)
}

/// Adjoint run: zero displacement, velocity data `ξ0`. Identical solver
/// path to [`free_evolution`]; named separately because its boundary trace
/// is the controllability functional.
pub fn adjoint_evolution(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    xi0: &SpectralVector,
) -> Result<FieldSolution> {
    solve_modes(domain, sys, |i| (0.0, coeff(xi0, i)), None)
}

/// Boundary-driven run from rest: each mode solves
/// `w_n'' = (b - λ_n²) w_n + K*w_n - q_n`,
/// `q_n(t) = ∫_Γ (γ₁φ_n) f(·,t) dΓ`, which realizes the Dirichlet lift in
/// weak modal form.
pub fn controlled_evolution(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    f: &ControlSignal,
) -> Result<FieldSolution> {
    if f.grid() != sys.grid() {
        return Err(sys.grid().mismatch(f.grid()));
    }
    assert_eq!(f.n_boundary(), domain.boundary().len());
    let n = domain.n_modes();
    let len = sys.grid().len();
    let forcing: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let trace = domain.trace(i);
            let mut q = vec![0.0; len];
            for (p, node) in domain.boundary().iter().enumerate() {
                let scale = node.weight * trace[p];
                for (j, v) in f.samples(p).iter().enumerate() {
                    q[j] -= scale * v;
                }
            }
            q
        })
        .collect();
    solve_modes(domain, sys, |_| (0.0, 0.0), Some(&forcing))
}

/// Boundary trace of a field, truncated to the first `n_trunc` modes,
/// together with the tail estimate against half the truncation.
#[derive(Debug, Clone)]
pub struct TraceSeries {
    /// `values[p][j]`: trace at boundary node `p`, time node `j`.
    pub values: Vec<Vec<f64>>,
    pub truncation: usize,
    /// `‖trace(N) - trace(N/2)‖` in discrete `L²(Γ×(0,T))`.
    pub tail_estimate: f64,
}

fn trace_values(fs: &FieldSolution, domain: &SpectralDomain, n_trunc: usize) -> Vec<Vec<f64>> {
    let len = fs.grid.len();
    let mut values = vec![vec![0.0; len]; domain.boundary().len()];
    for n in 0..n_trunc {
        let tr = &fs.trajectories[n];
        for (p, row) in values.iter_mut().enumerate() {
            let g = domain.trace(n)[p];
            for (j, slot) in row.iter_mut().enumerate() {
                *slot += g * tr.psi[j];
            }
        }
    }
    values
}

/// Discrete `L²(Γ×(0,T))` norm of boundary samples (trapezoid in time,
/// boundary quadrature in space).
pub fn trace_norm(domain: &SpectralDomain, grid: &TimeGrid, values: &[Vec<f64>]) -> f64 {
    let dt = grid.dt();
    let n = grid.len();
    let mut acc = 0.0;
    for (p, node) in domain.boundary().iter().enumerate() {
        for (j, v) in values[p].iter().enumerate() {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            acc += node.weight * dt * w * v * v;
        }
    }
    acc.sqrt()
}

/// Partial-sum boundary trace `Σ_{n<=N} (γ₁φ_n) w_n(t)` with its tail
/// estimate.
pub fn boundary_trace(
    fs: &FieldSolution,
    domain: &SpectralDomain,
    n_trunc: usize,
) -> Result<TraceSeries> {
    if n_trunc > fs.n_modes() {
        return Err(Error::Config(format!(
            "trace truncation {n_trunc} exceeds available modes {}",
            fs.n_modes()
        )));
    }
    let values = trace_values(fs, domain, n_trunc);
    let half = trace_values(fs, domain, n_trunc / 2);
    let diff: Vec<Vec<f64>> = values
        .iter()
        .zip(&half)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    Ok(TraceSeries {
        tail_estimate: trace_norm(domain, &fs.grid, &diff),
        values,
        truncation: n_trunc,
    })
}

/// Export a trace series as CSV, one column per boundary node.
pub fn write_trace_csv(
    trace: &TraceSeries,
    grid: &TimeGrid,
    path: &Path,
) -> Result<()> {
    let mut out = String::from("t");
    for p in 0..trace.values.len() {
        let _ = write!(out, ",node_{p}");
    }
    out.push('\n');
    for (j, t) in grid.nodes().enumerate() {
        let _ = write!(out, "{t}");
        for row in &trace.values {
            let _ = write!(out, ",{}", row[j]);
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Mode-diagonal reconstruction kernel: the convolution series turning the
/// memoryless wave mode `u_n` into the memory mode `w_n = u_n + H_n * u_n`.
#[derive(Debug, Clone)]
pub struct HKernel {
    /// Complex samples of the series `Σ_k (iλ)^{-k} (i l_n)^{*k}`; the
    /// imaginary parts cancel and are asserted tiny.
    pub complex: Vec<Complex64>,
    /// Real part, as a kernel on the solve grid.
    pub kernel: SampledKernel,
    /// Terms the series needed to fall below the tolerance.
    pub series_terms: usize,
    /// Sup distance between the series and the resolvent route.
    pub path_agreement: f64,
    /// Largest absolute imaginary part of the series samples.
    pub max_imag: f64,
}

/// Compute the reconstruction kernel for one mode both as a truncated
/// convolution series and as a Volterra resolvent; the two must agree
/// within `tolerance` and the imaginary part must vanish to rounding.
pub fn picard_h_kernel(sys: &WaveSystem, lambda: f64, tolerance: f64) -> Result<HKernel> {
    let grid = *sys.grid();
    let dt = grid.dt();
    let modal = sys.modal_system(lambda);

    // l_n(t) = b sin(λt) + (K * sin(λ·))(t), stored as i·l_n.
    let kappa = crate::modal::modal_convolution_kernel(&modal)?;
    let l_complex: Vec<Complex64> = kappa
        .values()
        .iter()
        .map(|&v| Complex64::new(0.0, lambda * v))
        .collect();

    let inv_il = Complex64::new(0.0, lambda).inv();
    let mut h: Vec<Complex64> = l_complex.iter().map(|&z| inv_il * z).collect();
    let mut term: Vec<Complex64> = h.clone();
    let mut terms = 1usize;
    let k_max = 120;
    loop {
        let sup = term.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if sup < tolerance / 8.0 {
            break;
        }
        if terms >= k_max {
            return Err(Error::SeriesDiverged {
                k_max,
                tolerance,
                last: sup,
            });
        }
        term = convolve_samples_complex(&l_complex, &term, dt)
            .into_iter()
            .map(|z| inv_il * z)
            .collect();
        for (slot, z) in h.iter_mut().zip(&term) {
            *slot += z;
        }
        terms += 1;
    }

    let max_imag = h.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    assert!(
        max_imag <= 1e-8,
        "reconstruction kernel picked up an imaginary part: {max_imag:.3e}"
    );

    // Independent route: H_n = -L_n with L_n the mode's resolvent kernel.
    let resolvent = crate::modal::resolvent_ln(&modal)?.kernel.negated();
    let mut agreement: f64 = 0.0;
    for (z, r) in h.iter().zip(resolvent.values()) {
        agreement = agreement.max((z.re - r).abs());
    }
    if agreement > tolerance {
        return Err(Error::SeriesDiverged {
            k_max: terms,
            tolerance,
            last: agreement,
        });
    }

    let real = SampledKernel::from_values(grid, h.iter().map(|z| z.re).collect());
    Ok(HKernel {
        complex: h,
        kernel: real,
        series_terms: terms,
        path_agreement: agreement,
        max_imag,
    })
}

/// Closed-form memoryless wave mode with Duhamel forcing:
/// `u(t) = w0 cos(λt) + (w1/λ) sin(λt) + (1/λ)(sin(λ·) * g)(t)`.
pub fn wave_mode_reference(
    lambda: f64,
    grid: &TimeGrid,
    w0: f64,
    w1: f64,
    forcing: Option<&[f64]>,
) -> Vec<f64> {
    let s = sine_kernel(lambda, grid);
    let c = cosine_kernel(lambda, grid);
    let mut u: Vec<f64> = c
        .values()
        .iter()
        .zip(s.values())
        .map(|(cv, sv)| w0 * cv + w1 / lambda * sv)
        .collect();
    if let Some(g) = forcing {
        let gk = SampledKernel::from_values(*grid, g.to_vec());
        let duhamel = convolve(&s, &gk).expect("same grid");
        for (slot, d) in u.iter_mut().zip(duhamel.values()) {
            *slot += d / lambda;
        }
    }
    u
}

/// Reconstruct a memory mode from its wave reference: `u + H*u`, asserting
/// the imaginary part stays at rounding level.
pub fn reconstruct_mode(h: &HKernel, u: &[f64], dt: f64) -> Vec<f64> {
    let u_complex: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let hu = convolve_samples_complex(&h.complex, &u_complex, dt);
    let mut out = Vec::with_capacity(u.len());
    let mut max_imag: f64 = 0.0;
    for (uv, z) in u.iter().zip(&hu) {
        max_imag = max_imag.max(z.im.abs());
        out.push(uv + z.re);
    }
    assert!(
        max_imag <= 1e-8,
        "reconstructed mode has imaginary part {max_imag:.3e}"
    );
    out
}

/// Largest trace-to-data ratio
/// `‖γ₁w‖²_{L²(Γ×(0,T))} / (‖w0‖²_{s=1} + ‖w1‖²_{s=0})`
/// over a batch of initial data (`f = 0`, `F = 0`).
pub fn direct_inequality_ratio(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    samples: &[(SpectralVector, SpectralVector)],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (w0, w1) in samples {
        let denom = {
            let a = domain.sobolev_norm(w0, 1)?;
            let b = domain.sobolev_norm(w1, 0)?;
            a * a + b * b
        };
        if denom == 0.0 {
            return Err(Error::Config(
                "direct-inequality sample has zero data".into(),
            ));
        }
        let fs = free_evolution(domain, sys, w0, w1, None)?;
        let trace = boundary_trace(&fs, domain, domain.n_modes())?;
        let num = trace_norm(domain, &fs.grid, &trace.values);
        worst = worst.max(num * num / denom);
    }
    Ok(worst)
}

/// Relative defect of the duality identity
/// `⟨ξ0, w(T)⟩ = -∫_0^T ∫_Γ f(t) γ₁ψ(T-t) dΓ dt`,
/// with `w` the controlled run driven by `f` and `ψ` the adjoint run with
/// velocity data `ξ0`. Time reversal is exact grid-index reflection.
pub fn duality_residual(
    domain: &SpectralDomain,
    sys: &WaveSystem,
    f: &ControlSignal,
    xi0: &SpectralVector,
) -> Result<f64> {
    let controlled = controlled_evolution(domain, sys, f)?;
    let lhs = controlled.terminal_state().dot(xi0);

    let adjoint = adjoint_evolution(domain, sys, xi0)?;
    let trace = boundary_trace(&adjoint, domain, domain.n_modes())?;
    let grid = sys.grid();
    let n = grid.len();
    let dt = grid.dt();
    let mut rhs = 0.0;
    for (p, node) in domain.boundary().iter().enumerate() {
        let fp = f.samples(p);
        let tp = &trace.values[p];
        for j in 0..n {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            rhs += node.weight * dt * w * fp[j] * tp[n - 1 - j];
        }
    }
    rhs = -rhs;

    let scale = lhs.abs().max(rhs.abs()).max(1e-30);
    Ok((lhs - rhs).abs() / scale)
}
