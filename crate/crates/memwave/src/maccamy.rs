//! Reduction of the first-order memory equation to a second-order system.
//!
//! The forward model is `w' = 2αw + ∫_0^t N(t-s) Δw(s) ds` with Dirichlet
//! boundary data. Differentiating once and inverting the Volterra structure
//! in `Δw` (the MacCamy trick) produces
//!
//! `w'' = ν Δw + a w' + b w + (M̃₁ * w)(t) + F₁(t)`, `ν = N(0)`,
//!
//! and the substitution `v = e^{-at/2} w` removes the velocity term. The
//! constants come out of the integration by parts as
//!
//! - `a = 2α + M̃(0)`, `b = M̃'(0) - 2α M̃(0)`, `M̃₁ = M̃'' - 2α M̃'`,
//! - `F₁ = F - M̃*F - M̃(t) w₁ + (2α M̃(t) - M̃'(t)) w₀`,
//!
//! where `M̃` is the resolvent kernel of `N'/ν` and `w₁ = w'(0)`. The
//! `2α M̃ w₀` cross term matters: dropping it breaks the equivalence check
//! below, which is the oracle that pins this whole derivation.
//!
//! The derivatives `M̃'`, `M̃''` are evaluated from differentiated resolvent
//! identities using the closed-form derivatives of `N`, never by
//! differencing samples. The reduction requires `N(0) > 0` unless `N`
//! vanishes identically (then every memory quantity is zero and the system
//! degenerates to `w'' = 2α w'`, carried with `ν = 0`).

use crate::conv::{convolve, resolvent_kernel};
use crate::error::{Error, Result};
use crate::grid::{SampledKernel, TimeGrid};
use crate::modal::{ModalSystem, ModalTrajectory};
use std::fmt::Write as _;
use std::path::Path;

/// The first-order memory problem: coefficient `2α` and kernel `N` on the
/// solve grid. The transform needs three closed-form derivatives of `N`.
#[derive(Debug, Clone)]
pub struct FirstOrderProblem {
    pub alpha: f64,
    pub kernel: SampledKernel,
}

impl FirstOrderProblem {
    pub fn new(alpha: f64, kernel: SampledKernel) -> Self {
        Self { alpha, kernel }
    }

    pub fn grid(&self) -> &TimeGrid {
        self.kernel.grid()
    }

    fn derivative_samples(&self, order: usize) -> Result<Vec<f64>> {
        let form = self
            .kernel
            .closed_form()
            .ok_or_else(|| Error::DerivativeUnavailable {
                kernel: "N".into(),
                order,
            })?;
        Ok(self.grid().nodes().map(|t| form.deriv(order, t)).collect())
    }
}

/// `M = N'` and its resolvent kernel `M̃ = M - M*M̃`.
#[derive(Debug, Clone)]
pub struct DifferentiatedMemory {
    pub m: SampledKernel,
    pub m_tilde: SampledKernel,
}

/// Differentiate the memory equation: return `M = N'` sampled from the
/// closed form and the resolvent kernel of `M`.
pub fn differentiate_memory_equation(p: &FirstOrderProblem) -> Result<DifferentiatedMemory> {
    let m = SampledKernel::from_values(*p.grid(), p.derivative_samples(1)?);
    let m_tilde = resolvent_kernel(&m)?;
    Ok(DifferentiatedMemory { m, m_tilde })
}

/// The transformed second-order system, after the exponential scaling
/// `v = e^{-at/2} w`:
///
/// `v'' = ν Δv + b_post v + (K*v)(t) + e^{-at/2} F₁(t)`.
#[derive(Debug, Clone)]
pub struct SecondOrderSystem {
    alpha: f64,
    a: f64,
    b: f64,
    b_post: f64,
    scale_rate: f64,
    laplacian_coeff: f64,
    kernel: SampledKernel,
    m_tilde: SampledKernel,
    m_tilde_prime: SampledKernel,
    m_tilde_one: SampledKernel,
    grid: TimeGrid,
}

/// Run the reduction. Requires `N(0) > 0` or `N ≡ 0`.
pub fn maccamy_transform(p: &FirstOrderProblem) -> Result<SecondOrderSystem> {
    let grid = *p.grid();
    let alpha = p.alpha;

    if p.kernel.is_identically_zero() {
        // No memory at all: w'' = 2α w', no Laplacian is generated.
        let zero = SampledKernel::zero(grid);
        let a = 2.0 * alpha;
        return Ok(SecondOrderSystem {
            alpha,
            a,
            b: 0.0,
            b_post: a * a / 4.0,
            scale_rate: a / 2.0,
            laplacian_coeff: 0.0,
            kernel: zero.clone(),
            m_tilde: zero.clone(),
            m_tilde_prime: zero.clone(),
            m_tilde_one: zero,
            grid,
        });
    }

    let nu = p.kernel.values()[0];
    if nu <= 0.0 {
        return Err(Error::DegenerateKernel { n0: nu });
    }

    let scale = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| x / nu).collect() };
    let m = SampledKernel::from_values(grid, scale(p.derivative_samples(1)?));
    let m1 = SampledKernel::from_values(grid, scale(p.derivative_samples(2)?));
    let m2 = SampledKernel::from_values(grid, scale(p.derivative_samples(3)?));
    let m0_at0 = m.values()[0];
    let m1_at0 = m1.values()[0];

    let m_tilde = resolvent_kernel(&m)?;
    // M̃' = M' - M(0) M̃ - M'*M̃
    let m_tilde_prime = m1
        .add_scaled(-m0_at0, &m_tilde)?
        .add_scaled(-1.0, &convolve(&m1, &m_tilde)?)?;
    // M̃'' = M'' - M(0) M̃' - M'(0) M̃ - M''*M̃
    let m_tilde_second = m2
        .add_scaled(-m0_at0, &m_tilde_prime)?
        .add_scaled(-m1_at0, &m_tilde)?
        .add_scaled(-1.0, &convolve(&m2, &m_tilde)?)?;

    let mt0 = m_tilde.values()[0];
    let mtp0 = m_tilde_prime.values()[0];
    let a = 2.0 * alpha + mt0;
    let b = mtp0 - 2.0 * alpha * mt0;
    let m_tilde_one = m_tilde_second.add_scaled(-2.0 * alpha, &m_tilde_prime)?;

    let half_a = a / 2.0;
    let kernel = SampledKernel::from_values(
        grid,
        grid.nodes()
            .zip(m_tilde_one.values())
            .map(|(t, v)| (-half_a * t).exp() * v)
            .collect(),
    );

    Ok(SecondOrderSystem {
        alpha,
        a,
        b,
        b_post: b + a * a / 4.0,
        scale_rate: half_a,
        laplacian_coeff: nu,
        kernel,
        m_tilde,
        m_tilde_prime,
        m_tilde_one,
        grid,
    })
}

impl SecondOrderSystem {
    /// Drift coefficient `α` of the first-order problem this system came
    /// from.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Velocity coefficient of the pre-scaling form.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Zeroth-order coefficient of the pre-scaling form.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Zeroth-order coefficient after the exponential scaling,
    /// `b + a²/4`.
    pub fn b_post(&self) -> f64 {
        self.b_post
    }

    /// Undo the scaling with `w(t) = e^{scale_rate t} v(t)`.
    pub fn scale_rate(&self) -> f64 {
        self.scale_rate
    }

    /// Coefficient `ν = N(0)` multiplying the Laplacian.
    pub fn laplacian_coeff(&self) -> f64 {
        self.laplacian_coeff
    }

    /// Post-scaling memory kernel `K(t) = e^{-at/2} M̃₁(t)`.
    pub fn kernel(&self) -> &SampledKernel {
        &self.kernel
    }

    pub fn m_tilde(&self) -> &SampledKernel {
        &self.m_tilde
    }

    pub fn m_tilde_prime(&self) -> &SampledKernel {
        &self.m_tilde_prime
    }

    /// Pre-scaling memory kernel `M̃₁ = M̃'' - 2α M̃'`.
    pub fn m_tilde_one(&self) -> &SampledKernel {
        &self.m_tilde_one
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Modal realization for eigenvalue `λ²`: the oscillator
    /// `v'' = (b_post - ν λ²) v + K*v + g`, encoded so its stiffness matches
    /// even when `ν = 0`.
    pub fn modal_system(&self, lambda: f64) -> ModalSystem {
        if self.laplacian_coeff > 0.0 {
            ModalSystem::new(
                self.laplacian_coeff.sqrt() * lambda,
                self.b_post,
                self.kernel.clone(),
            )
        } else {
            ModalSystem::new(1.0, self.b_post + 1.0, self.kernel.clone())
        }
    }

    /// Post-scaling initial data `(v(0), v'(0))` from `(w(0), w'(0))`.
    pub fn initial_data(&self, w0: f64, w1: f64) -> (f64, f64) {
        (w0, w1 - self.scale_rate * w0)
    }

    /// Per-mode affine forcing of the post-scaling system:
    /// `e^{-at/2} [ F - M̃*F - M̃(t) w₁ + (2α M̃ - M̃')(t) w₀ ]`.
    ///
    /// Linear-affine in `(w₀, w₁, F)` by construction.
    pub fn affine_map(&self, w0: f64, w1: f64, forcing: Option<&[f64]>) -> Result<Vec<f64>> {
        let n = self.grid.len();
        let mut base = vec![0.0; n];
        if let Some(f) = forcing {
            assert_eq!(f.len(), n, "forcing must be sampled on the grid");
            let fk = SampledKernel::from_values(self.grid, f.to_vec());
            let mf = convolve(&self.m_tilde, &fk)?;
            for j in 0..n {
                base[j] = f[j] - mf.values()[j];
            }
        }
        let mt = self.m_tilde.values();
        let mtp = self.m_tilde_prime.values();
        let two_alpha = 2.0 * self.alpha;
        Ok(self
            .grid
            .nodes()
            .enumerate()
            .map(|(j, t)| {
                (-self.scale_rate * t).exp()
                    * (base[j] - mt[j] * w1 + (two_alpha * mt[j] - mtp[j]) * w0)
            })
            .collect())
    }

    /// Map a post-scaling trajectory back to the original unknown:
    /// `w = e^{rt} v`, `w' = e^{rt} (v' + r v)`.
    pub fn undo_scaling(&self, v: &ModalTrajectory) -> (Vec<f64>, Vec<f64>) {
        let r = self.scale_rate;
        let mut w = Vec::with_capacity(v.len());
        let mut wp = Vec::with_capacity(v.len());
        for (j, t) in self.grid.nodes().enumerate() {
            let e = (r * t).exp();
            w.push(e * v.psi[j]);
            wp.push(e * (v.psi_prime[j] + r * v.psi[j]));
        }
        (w, wp)
    }

    /// Write the constants and the kernels to `dir` so control experiments
    /// can be re-run without re-deriving. Produces `system.txt`,
    /// `kernel.csv`, `m_tilde.csv`, `m_tilde_prime.csv`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.kernel.write_csv(&dir.join("kernel.csv"))?;
        self.m_tilde.write_csv(&dir.join("m_tilde.csv"))?;
        self.m_tilde_prime.write_csv(&dir.join("m_tilde_prime.csv"))?;
        let mut out = String::new();
        let _ = writeln!(out, "alpha = {}", self.alpha);
        let _ = writeln!(out, "a = {}", self.a);
        let _ = writeln!(out, "b = {}", self.b);
        let _ = writeln!(out, "b_post = {}", self.b_post);
        let _ = writeln!(out, "scale_rate = {}", self.scale_rate);
        let _ = writeln!(out, "laplacian_coeff = {}", self.laplacian_coeff);
        let _ = writeln!(out, "kernel_csv = kernel.csv");
        let _ = writeln!(out, "m_tilde_csv = m_tilde.csv");
        let _ = writeln!(out, "m_tilde_prime_csv = m_tilde_prime.csv");
        std::fs::write(dir.join("system.txt"), out)?;
        Ok(())
    }

    /// Read back a system written by [`write_to_dir`](Self::write_to_dir).
    pub fn read_from_dir(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join("system.txt"))?;
        let mut fields = std::collections::BTreeMap::new();
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                fields.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |k: &str| -> Result<f64> {
            fields
                .get(k)
                .ok_or_else(|| Error::Config(format!("system.txt: missing field '{k}'")))?
                .parse()
                .map_err(|e| Error::Config(format!("system.txt: field '{k}': {e}")))
        };
        let kernel = SampledKernel::read_csv(&dir.join("kernel.csv"))?;
        let m_tilde = SampledKernel::read_csv(&dir.join("m_tilde.csv"))?;
        let m_tilde_prime = SampledKernel::read_csv(&dir.join("m_tilde_prime.csv"))?;
        let grid = *kernel.grid();
        let a = get("a")?;
        let b = get("b")?;
        // M̃₁ is recovered pointwise from K = e^{-at/2} M̃₁.
        let m_tilde_one = SampledKernel::from_values(
            grid,
            grid.nodes()
                .zip(kernel.values())
                .map(|(t, v)| (a / 2.0 * t).exp() * v)
                .collect(),
        );
        Ok(SecondOrderSystem {
            alpha: get("alpha")?,
            a,
            b,
            b_post: get("b_post")?,
            scale_rate: get("scale_rate")?,
            laplacian_coeff: get("laplacian_coeff")?,
            kernel,
            m_tilde,
            m_tilde_prime,
            m_tilde_one,
            grid,
        })
    }
}

/// March the first-order equation directly for one mode:
/// `w' = 2α w - λ² ∫_0^t N(t-s) w(s) ds`, trapezoidal rule in the memory
/// integral and the trapezoidal (implicit, scalar-linear) step in time.
pub fn solve_first_order_mode(p: &FirstOrderProblem, lambda: f64, w0: f64) -> Vec<f64> {
    let grid = *p.grid();
    let n = grid.len();
    let dt = grid.dt();
    let nv = p.kernel.values();
    let lsq = lambda * lambda;
    let alpha = p.alpha;

    // Memory integral over [0, t_m] given samples up to w_m.
    let memory = |w: &[f64], m: usize| -> f64 {
        if m == 0 {
            return 0.0;
        }
        let mut acc = 0.5 * (nv[m] * w[0] + nv[0] * w[m]);
        for i in 1..m {
            acc += nv[m - i] * w[i];
        }
        dt * acc
    };

    let mut w = vec![0.0; n];
    w[0] = w0;
    for m in 0..n - 1 {
        let g_m = 2.0 * alpha * w[m] - lsq * memory(&w, m);
        // Known part of the memory integral at t_{m+1} (all samples but the
        // new endpoint, which carries weight dt N(0)/2).
        let mut known = 0.5 * nv[m + 1] * w[0];
        for i in 1..=m {
            known += nv[m + 1 - i] * w[i];
        }
        known *= dt;
        let rhs = w[m] + 0.5 * dt * (g_m - lsq * known);
        let diag = 1.0 - dt * alpha + 0.25 * dt * dt * lsq * nv[0];
        w[m + 1] = rhs / diag;
    }
    w
}

/// Solve the problem both ways and report the largest deviation over the
/// given modes and all nodes.
///
/// The direct path marches the first-order equation; the transformed path
/// solves the post-scaling modal oscillator (with the affine forcing the
/// transform generates from the initial data) and undoes the scaling. The
/// first-order equation forces `w'(0) = 2α w(0)`, which is the `w₁` the
/// transform is fed.
pub fn equivalence_check(
    p: &FirstOrderProblem,
    s: &SecondOrderSystem,
    lambdas: &[f64],
    w0: &[f64],
) -> Result<f64> {
    assert_eq!(lambdas.len(), w0.len());
    let mut worst: f64 = 0.0;
    for (&lambda, &c0) in lambdas.iter().zip(w0) {
        let direct = solve_first_order_mode(p, lambda, c0);

        let w1 = 2.0 * p.alpha * c0;
        let (v0, v1) = s.initial_data(c0, w1);
        let g = s.affine_map(c0, w1, None)?;
        let sys = s.modal_system(lambda);
        let v = crate::modal::solve_mode_timestep(&sys, v0, v1, Some(&g))?;
        let (w, _) = s.undo_scaling(&v);

        for j in 0..direct.len() {
            worst = worst.max((direct[j] - w[j]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::resolvent_defect;
    use crate::grid::ClosedForm;

    fn grid(t_end: f64, n: usize) -> TimeGrid {
        TimeGrid::new(t_end, n)
    }

    fn problem(alpha: f64, form: ClosedForm, g: TimeGrid) -> FirstOrderProblem {
        FirstOrderProblem::new(alpha, SampledKernel::from_closed_form(g, form))
    }

    #[test]
    fn linear_kernel_gives_exponential_resolvent() {
        // N = t has N' = 1; the resolvent of a constant c is c e^{-ct}.
        let g = grid(2.0, 2000);
        let p = problem(
            0.0,
            ClosedForm::Polynomial {
                coeffs: vec![0.0, 1.0],
            },
            g,
        );
        let d = differentiate_memory_equation(&p).unwrap();
        let exact = SampledKernel::from_fn(g, |t| (-t).exp());
        assert!(d.m_tilde.sup_distance(&exact).unwrap() < 1e-6);
    }

    #[test]
    fn zero_kernel_has_zero_resolvent() {
        let g = grid(1.0, 100);
        let p = problem(0.2, ClosedForm::zero(), g);
        let d = differentiate_memory_equation(&p).unwrap();
        assert!(d.m.is_identically_zero());
        assert!(d.m_tilde.is_identically_zero());
    }

    #[test]
    fn quadratic_kernel_resolvent_defect() {
        // N = t²/2 gives M = t; the march satisfies r = t - t*r to
        // rounding.
        let g = grid(2.0, 2000);
        let p = problem(
            0.0,
            ClosedForm::Polynomial {
                coeffs: vec![0.0, 0.0, 0.5],
            },
            g,
        );
        let d = differentiate_memory_equation(&p).unwrap();
        let defect = resolvent_defect(&d.m, &d.m_tilde).unwrap();
        assert!(defect <= 1e-8, "defect {defect:.3e}");
    }

    #[test]
    fn sampled_kernel_without_closed_form_is_rejected() {
        let g = grid(1.0, 50);
        let p = FirstOrderProblem::new(0.1, SampledKernel::from_fn(g, |t| (-t).exp()));
        assert!(matches!(
            differentiate_memory_equation(&p),
            Err(Error::DerivativeUnavailable { .. })
        ));
    }

    #[test]
    fn transform_without_memory_shifts_the_zeroth_order_term() {
        let g = grid(1.0, 100);
        for &alpha in &[0.0, 0.45, -0.3] {
            let s = maccamy_transform(&problem(alpha, ClosedForm::zero(), g)).unwrap();
            assert_eq!(s.a(), 2.0 * alpha);
            assert!(s.kernel().is_identically_zero());
            assert!((s.b_post() - alpha * alpha).abs() < 1e-15);
            assert_eq!(s.laplacian_coeff(), 0.0);
        }
    }

    #[test]
    fn constant_kernel_keeps_only_the_wave_part() {
        let g = grid(1.0, 100);
        let s = maccamy_transform(&problem(0.3, ClosedForm::Constant { value: 1.0 }, g)).unwrap();
        assert!(s.m_tilde().is_identically_zero());
        assert!((s.a() - 0.6).abs() < 1e-15);
        assert_eq!(s.b(), 0.0);
        assert!(s.kernel().is_identically_zero());
        assert_eq!(s.laplacian_coeff(), 1.0);
    }

    #[test]
    fn transform_is_the_identity_without_memory_and_drift() {
        let g = grid(1.0, 100);
        let s = maccamy_transform(&problem(0.0, ClosedForm::zero(), g)).unwrap();
        assert_eq!(s.a(), 0.0);
        assert_eq!(s.b(), 0.0);
        assert_eq!(s.scale_rate(), 0.0);
        assert!(s.kernel().is_identically_zero());
        let forcing = s.affine_map(1.0, 0.0, None).unwrap();
        assert!(forcing.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn kernel_vanishing_at_zero_is_rejected() {
        let g = grid(1.0, 100);
        let p = problem(
            0.0,
            ClosedForm::Polynomial {
                coeffs: vec![0.0, 1.0],
            },
            g,
        );
        assert!(matches!(
            maccamy_transform(&p),
            Err(Error::DegenerateKernel { .. })
        ));
    }

    #[test]
    fn equivalence_trivial_for_the_frozen_equation() {
        // α = 0, N = 0: the equation reads w' = 0.
        let g = grid(2.0, 2000);
        let p = problem(0.0, ClosedForm::zero(), g);
        let s = maccamy_transform(&p).unwrap();
        let dev = equivalence_check(&p, &s, &[1.0], &[1.0]).unwrap();
        assert!(dev <= 1e-10, "deviation {dev:.3e}");
    }

    #[test]
    fn equivalence_for_pure_exponential_growth() {
        // α = 0.3, N = 0: w(t) = e^{0.6 t} w0 on both paths.
        let g = grid(2.0, 2000);
        let p = problem(0.3, ClosedForm::zero(), g);
        let s = maccamy_transform(&p).unwrap();
        let dev = equivalence_check(&p, &s, &[1.0, 2.0], &[1.0, 0.5]).unwrap();
        assert!(dev <= 1e-6, "deviation {dev:.3e}");
        // And the paths really produce exponential growth.
        let direct = solve_first_order_mode(&p, 1.0, 1.0);
        let tail = direct.last().unwrap();
        assert!((tail - (0.6f64 * 2.0).exp()).abs() < 1e-5);
    }

    #[test]
    fn equivalence_for_exponential_memory() {
        let p_of = |n: usize| {
            problem(
                0.1,
                ClosedForm::Exponential {
                    amplitude: 1.0,
                    rate: 1.0,
                },
                grid(2.0, n),
            )
        };
        let dev_of = |n: usize| {
            let p = p_of(n);
            let s = maccamy_transform(&p).unwrap();
            equivalence_check(&p, &s, &[1.0, 2.0], &[1.0, 1.0]).unwrap()
        };
        let dev = dev_of(2000);
        assert!(dev <= 5e-4, "deviation {dev:.3e}");
        let ratio = dev / dev_of(4000);
        assert!(
            (3.0..=5.0).contains(&ratio),
            "expected second-order refinement, ratio {ratio:.2}"
        );
    }

    #[test]
    fn exponential_memory_collapses_to_a_shifted_wave() {
        // For N = e^{-t}: M̃ ≡ -1, so a = 2α - 1, b = 2α, and the memory
        // kernel of the transformed system vanishes.
        let g = grid(2.0, 500);
        let s = maccamy_transform(&problem(
            0.1,
            ClosedForm::Exponential {
                amplitude: 1.0,
                rate: 1.0,
            },
            g,
        ))
        .unwrap();
        assert!((s.a() + 0.8).abs() < 1e-9);
        assert!((s.b() - 0.2).abs() < 1e-9);
        assert!(s.kernel().sup_norm() < 1e-9);
        assert!((s.b_post() - 0.36).abs() < 1e-9);
    }

    #[test]
    fn affine_map_is_linear() {
        let g = grid(1.5, 300);
        let p = problem(
            0.2,
            ClosedForm::Exponential {
                amplitude: 2.0,
                rate: 0.5,
            },
            g,
        );
        let s = maccamy_transform(&p).unwrap();
        let f: Vec<f64> = g.nodes().map(|t| (0.9 * t).cos()).collect();
        let base = s.affine_map(0.7, -0.3, Some(&f)).unwrap();

        // Power-of-two scalings commute with rounding, so equality is
        // exact.
        let fx4: Vec<f64> = f.iter().map(|x| 4.0 * x).collect();
        let scaled = s.affine_map(4.0 * 0.7, 4.0 * -0.3, Some(&fx4)).unwrap();
        for (x, y) in base.iter().zip(&scaled) {
            assert_eq!(4.0 * x, *y);
        }

        // General scalars to rounding.
        let c = 1.7;
        let fxc: Vec<f64> = f.iter().map(|x| c * x).collect();
        let scaled = s.affine_map(c * 0.7, c * -0.3, Some(&fxc)).unwrap();
        for (x, y) in base.iter().zip(&scaled) {
            assert!((c * x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    /// Pre-scaling marching scheme used only to pin the scaling step:
    /// `w'' = ν(-λ²)w + a w' + b w + M̃₁*w + F₁`.
    fn solve_prescaled_mode(
        s: &SecondOrderSystem,
        lambda: f64,
        w0: f64,
        w1: f64,
    ) -> Vec<f64> {
        let g = *s.grid();
        let (n, dt) = (g.len(), g.dt());
        let c = -s.laplacian_coeff() * lambda * lambda + s.b();
        let a = s.a();
        let k = s.m_tilde_one().values();
        let mt = s.m_tilde().values();
        let mtp = s.m_tilde_prime().values();
        let two_alpha = 2.0 * s.alpha;
        let f1 = |j: usize| -mt[j] * w1 + (two_alpha * mt[j] - mtp[j]) * w0;

        let mut w = vec![0.0; n];
        w[0] = w0;
        w[1] = w0 + dt * w1 + 0.5 * dt * dt * (c * w0 + a * w1 + f1(0));
        for m in 1..n - 1 {
            let mut conv = 0.5 * (k[m] * w[0] + k[0] * w[m]);
            for i in 1..m {
                conv += k[m - i] * w[i];
            }
            conv *= dt;
            let rhs = 2.0 * w[m] - (1.0 + 0.5 * a * dt) * w[m - 1]
                + dt * dt * (c * w[m] + conv + f1(m));
            w[m + 1] = rhs / (1.0 - 0.5 * a * dt);
        }
        w
    }

    #[test]
    fn scaling_step_is_consistent() {
        // Solving before the scaling and after it (then multiplying by
        // e^{scale_rate t}) must agree to second order.
        let g = grid(2.0, 2000);
        let p = problem(
            0.15,
            ClosedForm::Exponential {
                amplitude: 1.0,
                rate: 2.0,
            },
            g,
        );
        let s = maccamy_transform(&p).unwrap();
        let (lambda, w0, w1) = (2.0, 1.0, 0.3);

        let pre = solve_prescaled_mode(&s, lambda, w0, w1);
        let (v0, v1) = s.initial_data(w0, w1);
        let gmod = s.affine_map(w0, w1, None).unwrap();
        let v = crate::modal::solve_mode_timestep(&s.modal_system(lambda), v0, v1, Some(&gmod))
            .unwrap();
        let (post, _) = s.undo_scaling(&v);

        let mut dev: f64 = 0.0;
        for j in 0..pre.len() {
            dev = dev.max((pre[j] - post[j]).abs());
        }
        assert!(dev < 50.0 * g.dt() * g.dt(), "deviation {dev:.3e}");
    }

    #[test]
    fn system_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let g = grid(1.0, 200);
        let p = problem(
            0.1,
            ClosedForm::Exponential {
                amplitude: 1.5,
                rate: 0.8,
            },
            g,
        );
        let s = maccamy_transform(&p).unwrap();
        s.write_to_dir(dir.path()).unwrap();
        let back = SecondOrderSystem::read_from_dir(dir.path()).unwrap();
        assert_eq!(back.a(), s.a());
        assert_eq!(back.b_post(), s.b_post());
        assert_eq!(back.laplacian_coeff(), s.laplacian_coeff());
        assert_eq!(back.kernel().values(), s.kernel().values());
        assert_eq!(back.m_tilde().values(), s.m_tilde().values());
    }
}
