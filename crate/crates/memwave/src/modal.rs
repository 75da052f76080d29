//! The scalar memory oscillator for one eigenmode:
//! `ψ'' = -λ²ψ + bψ + (K*ψ)(t) + g(t)`.
//!
//! Two independent solution routes are provided. The time-stepping route
//! marches a central-difference scheme with a trapezoidal memory sum; the
//! Volterra route evaluates the representation
//! `ψ = S/λ - (L*S)/λ` with `S(t) = sin(λt)` and `L` the resolvent kernel
//! of the mode's convolution kernel. Their agreement is the cross-method
//! oracle used throughout the higher-level assemblies.

use crate::conv::{convolve, resolvent_defect, resolvent_kernel, sine_kernel};
use crate::error::{Error, Result};
use crate::grid::{SampledKernel, TimeGrid};
use std::fmt::Write as _;
use std::path::Path;

/// One mode of the transformed system: frequency `λ`, zeroth-order
/// coefficient `b`, memory kernel `K` sampled on the solve grid.
#[derive(Debug, Clone)]
pub struct ModalSystem {
    lambda: f64,
    b: f64,
    kernel: SampledKernel,
}

impl ModalSystem {
    pub fn new(lambda: f64, b: f64, kernel: SampledKernel) -> Self {
        assert!(lambda > 0.0, "lambda must be positive, got {lambda}");
        Self { lambda, b, kernel }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn kernel(&self) -> &SampledKernel {
        &self.kernel
    }

    pub fn grid(&self) -> &TimeGrid {
        self.kernel.grid()
    }

    /// Oscillation frequency of the memoryless part, `sqrt(max(λ²-b, 0))`.
    pub fn effective_omega(&self) -> f64 {
        (self.lambda * self.lambda - self.b).max(0.0).sqrt()
    }

    /// The explicit central scheme needs `dt * ω < 2`.
    pub fn check_cfl(&self) -> Result<()> {
        let dt = self.grid().dt();
        let omega = self.effective_omega();
        if dt * omega >= 2.0 {
            return Err(Error::CflViolation {
                dt,
                omega,
                suggested: 1.8 / omega,
            });
        }
        Ok(())
    }
}

/// How a trajectory was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Timestep,
    Volterra,
}

/// Per-mode time series of `ψ` and `ψ'`.
#[derive(Debug, Clone)]
pub struct ModalTrajectory {
    pub psi: Vec<f64>,
    pub psi_prime: Vec<f64>,
    pub method: SolveMethod,
}

impl ModalTrajectory {
    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn sup_distance(&self, other: &ModalTrajectory) -> f64 {
        self.psi
            .iter()
            .zip(&other.psi)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Export as CSV `t,psi,psi_prime`.
    pub fn write_csv(&self, grid: &TimeGrid, path: &Path) -> Result<()> {
        let mut out = String::from("t,psi,psi_prime\n");
        for (j, t) in grid.nodes().enumerate() {
            let _ = writeln!(out, "{t},{},{}", self.psi[j], self.psi_prime[j]);
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Central-difference march with explicit (lagged) trapezoidal memory.
///
/// `ψ(0) = psi0`, `ψ'(0) = psi1` via a Taylor-consistent first step;
/// `g` is optional forcing sampled on the grid. Rejects grids violating
/// `dt * ω < 2`.
pub fn solve_mode_timestep(
    sys: &ModalSystem,
    psi0: f64,
    psi1: f64,
    g: Option<&[f64]>,
) -> Result<ModalTrajectory> {
    sys.check_cfl()?;
    let grid = *sys.grid();
    let n = grid.len();
    if let Some(g) = g {
        assert_eq!(g.len(), n, "forcing must be sampled on the solve grid");
    }
    let dt = grid.dt();
    let c = sys.b - sys.lambda * sys.lambda;
    let kv = sys.kernel.values();
    let memoryless = sys.kernel.is_identically_zero();
    let force = |j: usize| g.map_or(0.0, |g| g[j]);

    let mut psi = vec![0.0; n];
    psi[0] = psi0;
    psi[1] = psi0 + dt * psi1 + 0.5 * dt * dt * (c * psi0 + force(0));
    for m in 1..n - 1 {
        let conv = if memoryless {
            0.0
        } else {
            // Trapezoid over [0, t_m]; the endpoint at t_m is known, so the
            // scheme stays explicit.
            let mut acc = 0.5 * (kv[m] * psi[0] + kv[0] * psi[m]);
            for i in 1..m {
                acc += kv[m - i] * psi[i];
            }
            dt * acc
        };
        psi[m + 1] = 2.0 * psi[m] - psi[m - 1] + dt * dt * (c * psi[m] + conv + force(m));
    }

    let mut psi_prime = vec![0.0; n];
    psi_prime[0] = psi1;
    for m in 1..n - 1 {
        psi_prime[m] = (psi[m + 1] - psi[m - 1]) / (2.0 * dt);
    }
    psi_prime[n - 1] = (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / (2.0 * dt);

    Ok(ModalTrajectory {
        psi,
        psi_prime,
        method: SolveMethod::Timestep,
    })
}

/// The mode's convolution kernel
/// `κ(t) = (1/λ) [ b sin(λt) + ∫_0^t K(r) sin(λ(t-r)) dr ]`,
/// the scalar symbol through which the memory acts on this mode.
pub fn modal_convolution_kernel(sys: &ModalSystem) -> Result<SampledKernel> {
    let grid = *sys.grid();
    let s = sine_kernel(sys.lambda, &grid);
    let mut kappa = if sys.kernel.is_identically_zero() {
        SampledKernel::zero(grid)
    } else {
        convolve(&sys.kernel, &s)?
    };
    if sys.b != 0.0 {
        kappa = kappa.add_scaled(sys.b, &s)?;
    }
    Ok(SampledKernel::from_values(
        grid,
        kappa.values().iter().map(|v| v / sys.lambda).collect(),
    ))
}

/// Resolvent kernel of the mode and the scaled sup bound `λ·sup|L(t)|`.
#[derive(Debug, Clone)]
pub struct LnResolvent {
    pub kernel: SampledKernel,
    /// `sup_t λ |L(t)|`; bounded uniformly in `λ` for smooth memory.
    pub bound_estimate: f64,
}

/// Resolvent kernel `L` of the mode's convolution kernel, satisfying
/// `L = -κ + κ*L`, together with its scaled sup bound.
///
/// The solver asserts the resolvent defect at solve time.
pub fn resolvent_ln(sys: &ModalSystem) -> Result<LnResolvent> {
    let kappa = modal_convolution_kernel(sys)?;
    let l = resolvent_kernel(&kappa.negated())?;
    let defect = resolvent_defect(&kappa.negated(), &l)?;
    assert!(
        defect <= 1e-8 * kappa.sup_norm().max(1.0),
        "resolvent defect {defect:.3e} out of tolerance"
    );
    Ok(LnResolvent {
        bound_estimate: sys.lambda * l.sup_norm(),
        kernel: l,
    })
}

/// Volterra-representation solve for initial data `(0, 1)`:
/// `ψ = S/λ - (L*S)/λ`, `ψ' = C - (C*L)` with `C(t) = cos(λt)`.
///
/// The derivative comes from differentiating the representation, not from
/// differencing `ψ`.
pub fn solve_mode_volterra(sys: &ModalSystem) -> Result<ModalTrajectory> {
    let grid = *sys.grid();
    let lambda = sys.lambda;
    let s = sine_kernel(lambda, &grid);
    let c = crate::conv::cosine_kernel(lambda, &grid);
    let l = resolvent_ln(sys)?.kernel;
    let ls = convolve(&l, &s)?;
    let cl = convolve(&c, &l)?;
    let psi = s
        .values()
        .iter()
        .zip(ls.values())
        .map(|(sv, lv)| (sv - lv) / lambda)
        .collect();
    let psi_prime = c
        .values()
        .iter()
        .zip(cl.values())
        .map(|(cv, clv)| cv - clv)
        .collect();
    Ok(ModalTrajectory {
        psi,
        psi_prime,
        method: SolveMethod::Volterra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ClosedForm;

    fn grid(t_end: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t_end, n)
    }

    fn exp_kernel(g: TimeGrid) -> SampledKernel {
        SampledKernel::from_closed_form(
            g,
            ClosedForm::Exponential {
                amplitude: 1.0,
                rate: 1.0,
            },
        )
    }

    #[test]
    fn memoryless_oscillator_matches_sine() {
        let g = grid(2.0 * std::f64::consts::PI, 6284);
        let sys = ModalSystem::new(2.0, 0.0, SampledKernel::zero(g));
        let tr = solve_mode_timestep(&sys, 0.0, 1.0, None).unwrap();
        let mut err: f64 = 0.0;
        let mut errp: f64 = 0.0;
        for (j, t) in g.nodes().enumerate() {
            err = err.max((tr.psi[j] - (2.0 * t).sin() / 2.0).abs());
            errp = errp.max((tr.psi_prime[j] - (2.0 * t).cos()).abs());
        }
        assert!(err < 1e-4, "psi error {err:.3e}");
        assert!(errp < 1e-3, "psi' error {errp:.3e}");
    }

    #[test]
    fn zeroth_order_term_shifts_the_frequency() {
        // With K = 0 and b != 0 the solution is sin(βt)/β, β = sqrt(λ²-b).
        let g = grid(2.0 * std::f64::consts::PI, 6284);
        let sys = ModalSystem::new(2.0, 1.0, SampledKernel::zero(g));
        let beta = 3.0f64.sqrt();
        let tr = solve_mode_timestep(&sys, 0.0, 1.0, None).unwrap();
        let mut err: f64 = 0.0;
        for (j, t) in g.nodes().enumerate() {
            err = err.max((tr.psi[j] - (beta * t).sin() / beta).abs());
        }
        assert!(err < 1e-4, "error {err:.3e}");
    }

    #[test]
    fn cross_method_agreement_with_memory() {
        let g = grid(2.0, 2000);
        let sys = ModalSystem::new(3.0, 0.0, exp_kernel(g));
        let a = solve_mode_timestep(&sys, 0.0, 1.0, None).unwrap();
        let b = solve_mode_volterra(&sys).unwrap();
        let d = a.sup_distance(&b);
        assert!(d < 5e-4, "cross-method distance {d:.3e}");
    }

    #[test]
    fn modal_kernel_of_a_quiet_mode_is_zero() {
        let g = grid(1.0, 100);
        let sys = ModalSystem::new(2.0, 0.0, SampledKernel::zero(g));
        assert!(modal_convolution_kernel(&sys)
            .unwrap()
            .is_identically_zero());
    }

    #[test]
    fn modal_kernel_constant_memory() {
        // K = 1, b = 0, λ = 1: κ(t) = ∫ sin(t-r) dr = 1 - cos t.
        let g = grid(2.0 * std::f64::consts::PI, 3142);
        let sys = ModalSystem::new(
            1.0,
            0.0,
            SampledKernel::from_closed_form(g, ClosedForm::Constant { value: 1.0 }),
        );
        let kappa = modal_convolution_kernel(&sys).unwrap();
        let exact = SampledKernel::from_fn(g, |t| 1.0 - t.cos());
        assert!(kappa.sup_distance(&exact).unwrap() < 1e-9);
    }

    #[test]
    fn modal_kernel_pure_frequency_shift() {
        // b = 1, K = 0, λ = 2: κ(t) = (1/2) sin 2t, sampled exactly.
        let g = grid(3.0, 300);
        let sys = ModalSystem::new(2.0, 1.0, SampledKernel::zero(g));
        let kappa = modal_convolution_kernel(&sys).unwrap();
        for (j, t) in g.nodes().enumerate() {
            assert!((kappa.values()[j] - 0.5 * (2.0 * t).sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn resolvent_of_quiet_mode_vanishes() {
        let g = grid(1.0, 100);
        let sys = ModalSystem::new(4.0, 0.0, SampledKernel::zero(g));
        let ln = resolvent_ln(&sys).unwrap();
        assert!(ln.kernel.is_identically_zero());
        assert_eq!(ln.bound_estimate, 0.0);
    }

    #[test]
    fn scaled_resolvent_bound_is_uniform_in_lambda() {
        // λ|L| stays bounded as λ grows: the estimates must not trend up.
        let g = grid(2.0 * std::f64::consts::PI, 3142);
        let bounds: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&l| {
                resolvent_ln(&ModalSystem::new(l, 0.0, exp_kernel(g)))
                    .unwrap()
                    .bound_estimate
            })
            .collect();
        for w in bounds.windows(2) {
            assert!(w[1] <= 1.05 * w[0], "bounds not non-increasing: {bounds:?}");
        }
        assert!(bounds[0].is_finite());
    }

    #[test]
    fn resolvent_leading_term_is_the_modal_kernel() {
        // L + (1/λ) K*S = κ*L = O(1/λ²): the scaled residual stays bounded.
        let g = grid(2.0 * std::f64::consts::PI, 3142);
        for &l in &[4.0f64, 8.0, 16.0] {
            let sys = ModalSystem::new(l, 0.0, exp_kernel(g));
            let ln = resolvent_ln(&sys).unwrap();
            let kappa = modal_convolution_kernel(&sys).unwrap();
            let residual = ln.kernel.add_scaled(1.0, &kappa).unwrap().sup_norm();
            // Measured λ²·residual ≈ 2.6 on this grid; 10 gives margin.
            assert!(
                residual * l * l < 10.0,
                "λ={l}: scaled residual {:.3}",
                residual * l * l
            );
        }
    }

    #[test]
    fn volterra_route_is_exact_without_memory() {
        let g = grid(2.0 * std::f64::consts::PI, 1000);
        let sys = ModalSystem::new(3.0, 0.0, SampledKernel::zero(g));
        let tr = solve_mode_volterra(&sys).unwrap();
        for (j, t) in g.nodes().enumerate() {
            assert!((tr.psi[j] - (3.0 * t).sin() / 3.0).abs() < 1e-14);
            assert!((tr.psi_prime[j] - (3.0 * t).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn memory_correction_decays_quadratically_in_lambda() {
        let g = grid(2.0, 2000);
        for &l in &[10.0f64, 20.0] {
            let sys = ModalSystem::new(l, 0.0, exp_kernel(g));
            let tr = solve_mode_volterra(&sys).unwrap();
            let mut dev: f64 = 0.0;
            for (j, t) in g.nodes().enumerate() {
                dev = dev.max((tr.psi[j] - (l * t).sin() / l).abs());
            }
            // |ψ - S/λ| = |L*S|/λ <= C/λ²; measured C ≈ 1.1 here.
            assert!(dev * l * l < 5.0, "λ={l}: scaled deviation {}", dev * l * l);
        }
    }

    #[test]
    fn unstable_grid_is_rejected_with_a_suggestion() {
        let g = grid(1.0, 100);
        let sys = ModalSystem::new(250.0, 0.0, SampledKernel::zero(g));
        match solve_mode_timestep(&sys, 0.0, 1.0, None) {
            Err(Error::CflViolation { suggested, .. }) => {
                assert!(suggested * 250.0 < 2.0);
            }
            other => panic!("expected CFL rejection, got {other:?}"),
        }
    }

    #[test]
    fn energy_is_conserved_to_second_order() {
        let g = grid(2.0 * std::f64::consts::PI, 6284);
        let sys = ModalSystem::new(1.0, 0.0, SampledKernel::zero(g));
        let tr = solve_mode_timestep(&sys, 0.0, 1.0, None).unwrap();
        let e0 = 1.0; // ψ'(0)²
        let mut drift: f64 = 0.0;
        for j in 0..g.len() {
            let e = tr.psi[j] * tr.psi[j] + tr.psi_prime[j] * tr.psi_prime[j];
            drift = drift.max((e - e0).abs());
        }
        let dt = g.dt();
        // Measured drift ≈ 3e-7 at dt = 1e-3; 2.0·dt² bounds it.
        assert!(drift < 2.0 * dt * dt, "energy drift {drift:.3e}");
    }

    #[test]
    fn cross_method_distance_shrinks_at_second_order() {
        for kernel_kind in 0..3 {
            for &l in &[1.0f64, 4.0, 32.0] {
                let make = |n: usize| -> f64 {
                    let g = grid(2.0, n);
                    let k = match kernel_kind {
                        0 => SampledKernel::zero(g),
                        1 => exp_kernel(g),
                        _ => {
                            SampledKernel::from_closed_form(g, ClosedForm::Constant { value: 1.0 })
                        }
                    };
                    let sys = ModalSystem::new(l, 0.0, k);
                    let a = solve_mode_timestep(&sys, 0.0, 1.0, None).unwrap();
                    let b = solve_mode_volterra(&sys).unwrap();
                    a.sup_distance(&b) / g.dt().powi(2)
                };
                let coarse = make(1000);
                let fine = make(2000);
                // d/dt² stays bounded by one constant across the sweep;
                // the scheme's phase error gives C ≈ λ²t/24 (≈ 84 at
                // λ = 32, T = 2), so 120 covers the whole sweep.
                let cap = 120.0;
                assert!(
                    coarse < cap && fine < cap,
                    "kernel {kernel_kind}, λ={l}: scaled distances {coarse:.2}, {fine:.2}"
                );
                // Refinement must not inflate the scaled distance.
                assert!(
                    fine < 1.2 * coarse + 1.0,
                    "kernel {kernel_kind}, λ={l}: {coarse:.2} -> {fine:.2}"
                );
            }
        }
    }

    #[test]
    fn trajectory_csv_export() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mode.csv");
        let g = grid(1.0, 10);
        let sys = ModalSystem::new(1.0, 0.0, SampledKernel::zero(g));
        let tr = solve_mode_timestep(&sys, 0.0, 1.0, None).unwrap();
        tr.write_csv(&g, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 12);
    }
}
