//! Built-in named experiments (the acceptance suite) and the config-driven
//! experiment runner.
//!
//! Every built-in experiment pins its own grid, horizon and tolerances and
//! reports one pass/fail line per assertion; `run --check` and the `check`
//! subcommand turn any failed line into a nonzero exit.

use crate::config::{ExperimentConfig, ExperimentKind, SystemSource};
use crate::control::{
    deflate, input_map, min_norm_control, moment_gram, perp_probe, steer, ControlBasis,
    ControlSignal, SteerOptions,
};
use crate::conv::{
    resolvent_defect, resolvent_kernel, trig_identity_oracle, TrigIdentity,
};
use crate::error::{Error, Result};
use crate::field::{
    adjoint_evolution, boundary_trace, direct_inequality_ratio, duality_residual, free_evolution,
    picard_h_kernel, reconstruct_mode, wave_mode_reference, write_trace_csv, FieldSolution,
    WaveSystem,
};
use crate::grid::{ClosedForm, SampledKernel, TimeGrid};
use crate::maccamy::{equivalence_check, maccamy_transform, FirstOrderProblem};
use crate::modal::{resolvent_ln, ModalTrajectory};
use crate::report::ExperimentReport;
use crate::spectral::{interval_domain, rectangle_domain, Edge, GammaSelect, SpectralVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

/// Execution options shared by all experiments.
#[derive(Debug, Clone, Default)]
pub struct RunContext {
    pub seed: u64,
    /// When set, reports and attachments land in `out_dir/<name>/`.
    pub out_dir: Option<PathBuf>,
}

impl RunContext {
    fn dir_for(&self, name: &str) -> Option<PathBuf> {
        self.out_dir.as_ref().map(|d| d.join(name))
    }
}

type Runner = fn(&RunContext) -> Result<ExperimentReport>;

/// One entry of the built-in catalog.
pub struct BuiltinExperiment {
    pub name: &'static str,
    pub description: &'static str,
    runner: Runner,
}

/// The built-in experiments, in the order `check` runs them.
pub fn catalog() -> &'static [BuiltinExperiment] {
    &[
        BuiltinExperiment {
            name: "appendix-identities",
            description: "trigonometric convolution identities reproduced numerically (sup <= 1e-6, lambda in {1,5,20})",
            runner: run_appendix_identities,
        },
        BuiltinExperiment {
            name: "resolvent-correctness",
            description: "resolvent defect <= 1e-8 for constant, exponential and linear kernels; constant case matches c*exp(-ct)",
            runner: run_resolvent_correctness,
        },
        BuiltinExperiment {
            name: "maccamy-equivalence",
            description: "first-order memory solve vs transformed second-order solve, three (alpha, N) pairs, second-order refinement",
            runner: run_maccamy_equivalence,
        },
        BuiltinExperiment {
            name: "picard-reconstruction",
            description: "w_n = u_n + H_n*u_n per mode, free and controlled; series vs resolvent routes agree to 1e-8",
            runner: run_picard_reconstruction,
        },
        BuiltinExperiment {
            name: "resolvent-bound",
            description: "lambda*sup|L_n| bounded by one constant over lambda in {1..32} for exponential memory",
            runner: run_resolvent_bound,
        },
        BuiltinExperiment {
            name: "duality-adjoint",
            description: "terminal pairing equals the time-reversed adjoint-trace pairing for 20 seeded (f, xi0) pairs",
            runner: run_duality_adjoint,
        },
        BuiltinExperiment {
            name: "direct-inequality-memory",
            description: "trace-to-data ratio finite and stable within 10% across n_max in {16,32,64} (exponential memory)",
            runner: run_direct_inequality,
        },
        BuiltinExperiment {
            name: "steering-wave",
            description: "memoryless steering phi_1 -> phi_2 at T = 2*pi, both ends: in-sample <= 1e-6, verification <= 1e-3",
            runner: run_steering_wave,
        },
        BuiltinExperiment {
            name: "steering-memory",
            description: "exponential-memory steering at T = pi + 0.2: verification <= 1e-2, Gramian sigma_min stable within 2x",
            runner: run_steering_memory,
        },
        BuiltinExperiment {
            name: "perp-probe-sweep",
            description: "adjoint-trace probe: stable when controllable, collapsing (with solver rejection) on a sub-critical horizon",
            runner: run_perp_probe_sweep,
        },
        BuiltinExperiment {
            name: "deflation-identity",
            description: "second-derivative modal identity to 5e-3 and exact eigenvalue-group deflation",
            runner: run_deflation_identity,
        },
        BuiltinExperiment {
            name: "horizon-sweep",
            description: "Gramian conditioning as the horizon shrinks toward the wave controllability time (reported, no rate asserted)",
            runner: run_horizon_sweep,
        },
    ]
}

/// Look up one experiment by name.
pub fn find(name: &str) -> Result<&'static BuiltinExperiment> {
    catalog()
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownExperiment(name.to_string()))
}

/// Run a built-in experiment; write its report when the context has an
/// output directory.
pub fn run_builtin(name: &str, ctx: &RunContext) -> Result<ExperimentReport> {
    let exp = find(name)?;
    let report = (exp.runner)(ctx)?;
    if let Some(dir) = ctx.dir_for(name) {
        report.write_to_dir(&dir)?;
    }
    Ok(report)
}

fn pi_interval(n: usize, gamma: GammaSelect) -> crate::spectral::SpectralDomain {
    interval_domain(std::f64::consts::PI, n, gamma).expect("interval domain")
}

fn exp_kernel(grid: TimeGrid) -> SampledKernel {
    SampledKernel::from_closed_form(
        grid,
        ClosedForm::Exponential {
            amplitude: 1.0,
            rate: 1.0,
        },
    )
}

fn desk_grid_2pi() -> TimeGrid {
    TimeGrid::new(2.0 * std::f64::consts::PI, 6284)
}

// --- criterion 1 ---------------------------------------------------------

fn run_appendix_identities(_ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "appendix-identities",
        "numeric convolution engine vs the four closed-form identities",
    );
    let grid = desk_grid_2pi();
    for id in TrigIdentity::ALL {
        for &lambda in &[1.0, 5.0, 20.0] {
            let numeric = id.numeric(lambda, &grid)?;
            let exact = trig_identity_oracle(id, lambda, &grid);
            let err = numeric.sup_distance(&exact)?;
            report.check_le(&format!("{} lambda={lambda}", id.name()), err, 1e-6);
            report.metric(&format!("sup_error_{}_{lambda}", id.name()), err);
        }
    }
    Ok(report)
}

// --- criterion 2 ---------------------------------------------------------

fn run_resolvent_correctness(_ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "resolvent-correctness",
        "resolvent march defect and the constant-kernel closed form",
    );
    let grid = desk_grid_2pi();
    let mut kernels: Vec<(String, SampledKernel)> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&c| {
            (
                format!("constant c={c}"),
                SampledKernel::from_closed_form(grid, ClosedForm::Constant { value: c }),
            )
        })
        .collect();
    kernels.push(("exponential".into(), exp_kernel(grid)));
    kernels.push((
        "linear".into(),
        SampledKernel::from_closed_form(
            grid,
            ClosedForm::Polynomial {
                coeffs: vec![0.0, 1.0],
            },
        ),
    ));
    for (name, k) in &kernels {
        let r = resolvent_kernel(k)?;
        let defect = resolvent_defect(k, &r)?;
        report.check_le(&format!("defect {name}"), defect, 1e-8);
    }
    for &c in &[0.5, 1.0, 2.0] {
        let k = SampledKernel::from_closed_form(grid, ClosedForm::Constant { value: c });
        let r = resolvent_kernel(&k)?;
        let exact = SampledKernel::from_fn(grid, |t| c * (-c * t).exp());
        let err = r.sup_distance(&exact)?;
        report.check_le(&format!("constant c={c} vs c*exp(-ct)"), err, 1e-6);
    }
    Ok(report)
}

// --- criterion 3 ---------------------------------------------------------

fn run_maccamy_equivalence(ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "maccamy-equivalence",
        "direct first-order march vs transformed second-order march",
    );
    let lambdas = [1.0, 2.0];
    let w0 = [1.0, 1.0];
    let cases: Vec<(&str, f64, ClosedForm)> = vec![
        (
            "alpha=0.1 N=exp(-t)",
            0.1,
            ClosedForm::Exponential {
                amplitude: 1.0,
                rate: 1.0,
            },
        ),
        ("alpha=0.3 N=0", 0.3, ClosedForm::zero()),
        (
            "alpha=0 N=t",
            0.0,
            ClosedForm::Polynomial {
                coeffs: vec![0.0, 1.0],
            },
        ),
    ];
    for (label, alpha, form) in &cases {
        let run = |n: usize| -> Result<f64> {
            let grid = TimeGrid::new(2.0, n);
            let p = FirstOrderProblem::new(*alpha, SampledKernel::from_closed_form(grid, form.clone()));
            let s = maccamy_transform(&p)?;
            equivalence_check(&p, &s, &lambdas, &w0)
        };
        match run(2000) {
            Ok(dev) => {
                report.check_le(&format!("equivalence {label}"), dev, 5e-4);
                report.metric(&format!("deviation {label}"), dev);
            }
            Err(e) => {
                report.check(
                    &format!("equivalence {label}"),
                    false,
                    format!("transform unavailable: {e}"),
                );
            }
        }
    }
    // Refinement order on the exponential-memory case.
    let dev_of = |n: usize| -> Result<f64> {
        let grid = TimeGrid::new(2.0, n);
        let p = FirstOrderProblem::new(
            0.1,
            SampledKernel::from_closed_form(
                grid,
                ClosedForm::Exponential {
                    amplitude: 1.0,
                    rate: 1.0,
                },
            ),
        );
        let s = maccamy_transform(&p)?;
        equivalence_check(&p, &s, &lambdas, &w0)
    };
    let ratio = dev_of(2000)? / dev_of(4000)?;
    report.check(
        "refinement ratio in [3, 5]",
        (3.0..=5.0).contains(&ratio),
        format!("{ratio:.3}"),
    );
    report.metric("refinement_ratio", ratio);
    if let Some(dir) = ctx.dir_for("maccamy-equivalence") {
        std::fs::create_dir_all(&dir)?;
        let grid = TimeGrid::new(2.0, 2000);
        let p = FirstOrderProblem::new(
            0.1,
            SampledKernel::from_closed_form(
                grid,
                ClosedForm::Exponential {
                    amplitude: 1.0,
                    rate: 1.0,
                },
            ),
        );
        maccamy_transform(&p)?.write_to_dir(&dir.join("system"))?;
        report.artifact("system/system.txt");
    }
    Ok(report)
}

// --- criterion 4 ---------------------------------------------------------

fn run_picard_reconstruction(_ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "picard-reconstruction",
        "memory modes rebuilt from wave references through the reconstruction kernel",
    );
    let grid = TimeGrid::new(2.0, 2000);
    let domain = pi_interval(8, GammaSelect::Left);
    let sys = WaveSystem::new(0.0, exp_kernel(grid));
    let modes = [0usize, 1, 2, 7];

    // Free runs with mixed data.
    let w0 = SpectralVector::new(vec![0.7, -0.3, 0.2, 0.0, 0.0, 0.0, 0.0, 0.5]);
    let w1 = SpectralVector::new(vec![-0.4, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.2]);
    let fs = free_evolution(&domain, &sys, &w0, &w1, None)?;
    for &n in &modes {
        let lambda = domain.lambda(n);
        let h = picard_h_kernel(&sys, lambda, 1e-8)?;
        report.check_le(
            &format!("series vs resolvent mode {}", n + 1),
            h.path_agreement,
            1e-8,
        );
        let u = wave_mode_reference(lambda, &grid, w0.coeffs[n], w1.coeffs[n], None);
        let rec = reconstruct_mode(&h, &u, grid.dt());
        let err = fs
            .mode(n)
            .psi
            .iter()
            .zip(&rec)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        report.check_le(&format!("free reconstruction mode {}", n + 1), err, 5e-4);
        report.check_le(
            &format!("imaginary part mode {}", n + 1),
            h.max_imag,
            1e-8,
        );
    }

    // Controlled run driven from the left end.
    let f = ControlSignal::from_node_samples(
        grid,
        vec![grid.nodes().map(|t| (1.3 * t).sin()).collect()],
    );
    let controlled = crate::field::controlled_evolution(&domain, &sys, &f)?;
    for &n in &modes {
        let lambda = domain.lambda(n);
        let h = picard_h_kernel(&sys, lambda, 1e-8)?;
        let q: Vec<f64> = f
            .samples(0)
            .iter()
            .map(|v| -domain.boundary()[0].weight * domain.trace(n)[0] * v)
            .collect();
        let u = wave_mode_reference(lambda, &grid, 0.0, 0.0, Some(&q));
        let rec = reconstruct_mode(&h, &u, grid.dt());
        let err = controlled
            .mode(n)
            .psi
            .iter()
            .zip(&rec)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        report.check_le(
            &format!("controlled reconstruction mode {}", n + 1),
            err,
            5e-4,
        );
    }

    // Two-path agreement with a pure zeroth-order term.
    let sys_b = WaveSystem::new(1.0, SampledKernel::zero(grid));
    let h = picard_h_kernel(&sys_b, 2.0, 1e-8)?;
    report.check_le("series vs resolvent (b=1, K=0)", h.path_agreement, 1e-8);
    Ok(report)
}

// --- criterion 5 ---------------------------------------------------------

fn run_resolvent_bound(_ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "resolvent-bound",
        "scaled sup bound of the per-mode resolvent kernel over a frequency sweep",
    );
    let grid = desk_grid_2pi();
    let lambdas = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let mut bounds = Vec::new();
    for &l in &lambdas {
        let modal = crate::modal::ModalSystem::new(l, 0.0, exp_kernel(grid));
        let ln = resolvent_ln(&modal)?;
        report.metric(&format!("lambda_sup_L_{l}"), ln.bound_estimate);
        bounds.push(ln.bound_estimate);
    }
    let cap = bounds.iter().cloned().fold(0.0f64, f64::max);
    report.metric("uniform_bound", cap);
    report.check("all bounds finite", cap.is_finite(), format!("max {cap:.6}"));
    let mut monotone = true;
    for w in bounds.windows(2) {
        if w[1] > 1.05 * w[0] {
            monotone = false;
        }
    }
    report.check(
        "non-increasing in lambda (5% slack)",
        monotone,
        format!("{bounds:?}"),
    );
    Ok(report)
}

// --- criterion 6 ---------------------------------------------------------

fn smooth_random_samples(rng: &mut ChaCha8Rng, grid: &TimeGrid) -> Vec<f64> {
    let t_end = grid.t_end();
    let coeffs: Vec<(f64, f64)> = (1..=4)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    grid.nodes()
        .map(|t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(m, (a, b))| {
                    let arg = std::f64::consts::PI * (m + 1) as f64 * t / t_end;
                    a * arg.cos() + b * arg.sin()
                })
                .sum()
        })
        .collect()
}

fn run_duality_adjoint(ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "duality-adjoint",
        "terminal pairing vs time-reversed adjoint-trace pairing",
    )
    .with_seed(ctx.seed);
    let grid = TimeGrid::new(2.0, 2000);
    let domain = pi_interval(16, GammaSelect::Both);
    let systems = [
        ("memoryless", WaveSystem::memoryless(grid)),
        ("exponential memory", WaveSystem::new(0.0, exp_kernel(grid))),
    ];
    for (label, sys) in &systems {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x6475616c);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let f = ControlSignal::from_node_samples(
                grid,
                vec![
                    smooth_random_samples(&mut rng, &grid),
                    smooth_random_samples(&mut rng, &grid),
                ],
            );
            let xi0 = SpectralVector::new(
                (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            );
            worst = worst.max(duality_residual(&domain, sys, &f, &xi0)?);
        }
        report.check_le(&format!("duality {label} (20 pairs)"), worst, 5e-4);
        report.metric(&format!("worst_residual_{label}"), worst);
    }
    Ok(report)
}

// --- criterion 7 ---------------------------------------------------------

fn run_direct_inequality(ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "direct-inequality-memory",
        "trace-to-data ratio stability under truncation growth",
    )
    .with_seed(ctx.seed);
    let grid = TimeGrid::new(2.0, 2000);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x64697265);
    // Five draws over 64 modes, truncated per sweep level.
    let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..5)
        .map(|_| {
            let z0: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let z1: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (z0, z1)
        })
        .collect();

    let mut ratios = Vec::new();
    for &n_max in &[16usize, 32, 64] {
        let domain = pi_interval(n_max, GammaSelect::Both);
        let sys = WaveSystem::new(0.0, exp_kernel(grid));
        let samples: Vec<(SpectralVector, SpectralVector)> = draws
            .iter()
            .map(|(z0, z1)| {
                let w0 = SpectralVector::new(
                    (0..n_max)
                        .map(|n| z0[n] / domain.lambda_sq(n))
                        .collect(),
                );
                let w1 = SpectralVector::new(
                    (0..n_max).map(|n| z1[n] / domain.lambda(n)).collect(),
                );
                (w0, w1)
            })
            .collect();
        let ratio = direct_inequality_ratio(&domain, &sys, &samples)?;
        report.metric(&format!("ratio_nmax_{n_max}"), ratio);
        ratios.push(ratio);
    }
    report.check(
        "ratios finite",
        ratios.iter().all(|r| r.is_finite()),
        format!("{ratios:?}"),
    );
    for w in ratios.windows(2) {
        let rel = (w[1] - w[0]).abs() / w[1].abs().max(1e-30);
        report.check_le("stable within 10% under doubling", rel, 0.10);
    }
    Ok(report)
}

// --- criterion 8 ---------------------------------------------------------

fn run_steering_wave(ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "steering-wave",
        "memoryless steering phi_1 -> phi_2, both ends, T = 2*pi",
    );
    let grid = desk_grid_2pi();
    let domain = pi_interval(32, GammaSelect::Both);
    let sys = WaveSystem::memoryless(grid);
    let w0 = SpectralVector::unit(0, 32);
    let target = SpectralVector::unit(1, 16);
    let outcome = steer(&domain, &sys, &w0, &target, &SteerOptions::new(16))?;
    report.check_le("in-sample relative residual", outcome.in_sample_residual, 1e-6);
    report.check_le(
        "verification relative residual",
        outcome.verification_residual,
        1e-3,
    );
    report.metric("in_sample_residual", outcome.in_sample_residual);
    report.metric("verification_residual", outcome.verification_residual);
    report.metric("sigma_min", outcome.sigma_min);
    report.metric("condition", outcome.condition);
    report.metric("control_norm", outcome.control_norm);
    if let Some(dir) = ctx.dir_for("steering-wave") {
        outcome.write_to_dir(&dir)?;
        report.artifact("control.csv");
        report.artifact("steering.txt");
    }
    Ok(report)
}

// --- criterion 9 ---------------------------------------------------------

fn run_steering_memory(ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "steering-memory",
        "exponential-memory steering to a truncated exponential profile at T = pi + 0.2",
    );
    let grid = TimeGrid::new(std::f64::consts::PI + 0.2, 3342);
    let domain = pi_interval(32, GammaSelect::Both);
    let sys = WaveSystem::new(0.0, exp_kernel(grid));

    let mut w0 = SpectralVector::zeros(32);
    w0.coeffs[0] = 1.0;
    w0.coeffs[2] = 0.5;
    // Modal coefficients of x -> exp(-x) on (0, pi), truncated.
    let target = SpectralVector::new(
        (1..=16)
            .map(|n| {
                let nf = n as f64;
                let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
                (2.0 / std::f64::consts::PI).sqrt() * nf
                    * (1.0 - parity * (-std::f64::consts::PI).exp())
                    / (1.0 + nf * nf)
            })
            .collect(),
    );
    // A hat-basis control is temporally broadband and excites the far
    // tail almost uniformly (measured ~2e-2 relative beyond the guard
    // band on this horizon). The endpoint-vanishing sine basis couples to
    // out-of-band modes only quadratically, and together with the guard
    // rows inside `steer` keeps the measured leakage near 1e-4.
    let options = SteerOptions::new(16).with_basis(ControlBasis::Sine { max_frequency: 24 });
    let outcome = steer(&domain, &sys, &w0, &target, &options)?;
    report.check_le(
        "verification relative residual",
        outcome.verification_residual,
        1e-2,
    );
    report.metric("in_sample_residual", outcome.in_sample_residual);
    report.metric("verification_residual", outcome.verification_residual);

    // Gramian conditioning in the L²-orthonormalized (hat) basis, where
    // singular values are basis-independent square roots of Gramian
    // eigenvalues.
    let gramian_sigma_min = |n: usize| -> Result<f64> {
        let map = input_map(&domain, &sys, n, ControlBasis::Hats)?;
        let svd = map.weighted_matrix().svd(false, false);
        Ok(svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min))
    };
    let sigma8 = gramian_sigma_min(8)?;
    let sigma16 = gramian_sigma_min(16)?;
    report.metric("sigma_min_8", sigma8);
    report.metric("sigma_min_16", sigma16);
    let spread = (sigma16 / sigma8).max(sigma8 / sigma16);
    report.check_le("sigma_min stable within 2x (N=8 vs 16)", spread, 2.0);
    if let Some(dir) = ctx.dir_for("steering-memory") {
        outcome.write_to_dir(&dir)?;
        report.artifact("control.csv");
        report.artifact("steering.txt");
    }
    Ok(report)
}

// --- criterion 10 --------------------------------------------------------

fn run_perp_probe_sweep(_ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "perp-probe-sweep",
        "adjoint-trace probe: stability when controllable, collapse on a sub-critical horizon",
    );

    // Controllable setup: both ends, full period.
    let grid = TimeGrid::new(2.0 * std::f64::consts::PI, 3142);
    let domain = pi_interval(32, GammaSelect::Both);
    let sys = WaveSystem::memoryless(grid);
    let mut sigmas = Vec::new();
    for &n in &[8usize, 16, 32] {
        let s = perp_probe(&domain, &sys, n)?;
        report.metric(&format!("sigma_controllable_{n}"), s);
        sigmas.push(s);
    }
    let lo = sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sigmas.iter().cloned().fold(0.0f64, f64::max);
    report.check(
        "probe positive and stable within 20%",
        lo > 0.0 && hi / lo <= 1.2,
        format!("{sigmas:?}"),
    );

    // Sub-critical horizon: single end, T = 0.5.
    let short = TimeGrid::new(0.5, 500);
    let left = pi_interval(32, GammaSelect::Left);
    let sys_short = WaveSystem::memoryless(short);
    let s8 = perp_probe(&left, &sys_short, 8)?;
    let probe32 = crate::control::perp_probe_full(&left, &sys_short, 32)?;
    let s32 = probe32.sigma_min;
    report.metric("sigma_short_8", s8);
    report.metric("sigma_short_32", s32);
    report.check(
        "probe decays at least 10x from N=8 to N=32",
        s32 <= s8 / 10.0,
        format!("{s8:.3e} -> {s32:.3e}"),
    );
    // Diagnostic only: log the coefficient-decay profile of the
    // minimizing annihilator candidate (no assertion; a genuine
    // annihilator would need eigenvalue-squared decay).
    for (block, label) in [(0..8, "head"), (24..32, "tail")] {
        let mass: f64 = probe32.minimizer[block]
            .iter()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt();
        report.metric(&format!("minimizer_mass_{label}"), mass);
    }

    // The unregularized moment solve must refuse this configuration.
    let map = input_map(&left, &sys_short, 32, ControlBasis::Hats)?;
    let weighted = map.weighted_matrix();
    let mut target = vec![0.0; 32];
    target[0] = 1.0;
    let rejected = matches!(
        min_norm_control(&weighted, &target, 0.0),
        Err(Error::IllConditioned { .. })
    );
    report.check(
        "unregularized solve rejected on the sub-critical horizon",
        rejected,
        "min_norm_control(eps = 0)".into(),
    );
    Ok(report)
}

// --- criterion 11 --------------------------------------------------------

fn run_deflation_identity(ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "deflation-identity",
        "second-derivative modal identity and exact eigenvalue-group deflation",
    )
    .with_seed(ctx.seed);
    let grid = TimeGrid::new(2.0, 2000);
    let domain = pi_interval(8, GammaSelect::Left);
    let sys = WaveSystem::memoryless(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x6465666c);
    let xi: Vec<f64> = (1..=8)
        .map(|n| rng.gen_range(0.5..1.5) / (n * n) as f64)
        .collect();

    let fs = adjoint_evolution(&domain, &sys, &SpectralVector::new(xi.clone()))?;
    let n = grid.len();
    let dt = grid.dt();
    // Combined trace and the lambda^2-weighted combination.
    let mut tau = vec![0.0; n];
    let mut weighted = vec![0.0; n];
    for (m, &coeff) in xi.iter().enumerate() {
        let g = domain.trace(m)[0];
        for j in 0..n {
            tau[j] += coeff * g * fs.mode(m).psi[j];
            weighted[j] += domain.lambda_sq(m) * coeff * g * fs.mode(m).psi[j];
        }
    }
    // -tau'' == weighted, in the interior, in discrete L².
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 1..n - 1 {
        let second = (tau[j + 1] - 2.0 * tau[j] + tau[j - 1]) / (dt * dt);
        num += (-second - weighted[j]).powi(2);
        den += weighted[j].powi(2);
    }
    let rel = (num / den.max(1e-300)).sqrt();
    report.check_le("second-derivative identity (relative L2)", rel, 5e-3);
    report.metric("identity_relative_error", rel);

    // Exact deflation arithmetic.
    let simple = deflate(&[1.0, 1.0], &[1.0, 4.0], 1);
    report.check(
        "two-mode deflation",
        simple == vec![-3.0, 0.0],
        format!("{simple:?}"),
    );
    let pi = std::f64::consts::PI;
    let square = rectangle_domain(pi, pi, 10.0, &[Edge::Left])?;
    let lambda_sq: Vec<f64> = (0..square.n_modes()).map(|i| square.lambda_sq(i)).collect();
    let group = square
        .eigenvalue_groups()
        .iter()
        .find(|g| g.len() == 2)
        .expect("square has a multiplicity-two eigenvalue")
        .clone();
    let deflated = deflate(&vec![1.0; lambda_sq.len()], &lambda_sq, group[0]);
    report.check(
        "multiplicity group zeroed exactly",
        group.iter().all(|&i| deflated[i] == 0.0),
        format!("group {group:?}"),
    );
    Ok(report)
}

// --- informative: conditioning vs horizon margin --------------------------

fn run_horizon_sweep(_ctx: &RunContext) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "horizon-sweep",
        "input-map conditioning at T = pi + eps for shrinking eps (exponential memory, both ends, 8 modes)",
    );
    let domain = pi_interval(8, GammaSelect::Both);
    let mut conditions = Vec::new();
    for &eps in &[0.8, 0.4, 0.2, 0.1, 0.05] {
        let t_end = std::f64::consts::PI + eps;
        let n_steps = (t_end / 1e-3).round() as usize;
        let grid = TimeGrid::new(t_end, n_steps);
        let sys = WaveSystem::new(0.0, exp_kernel(grid));
        let map = input_map(&domain, &sys, 8, ControlBasis::Hats)?;
        let svd = map.weighted_matrix().svd(false, false);
        let smin = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        report.metric(&format!("sigma_min_eps_{eps}"), smin);
        report.metric(&format!("condition_eps_{eps}"), smax / smin);
        conditions.push(smax / smin);
    }
    // No degradation rate is asserted; the sweep is informative.
    report.check(
        "conditioning finite across the sweep",
        conditions.iter().all(|c| c.is_finite()),
        format!("{conditions:?}"),
    );
    Ok(report)
}

// --- config-driven experiments -------------------------------------------

/// Build the second-order system a config describes, plus the reduction
/// when the source is the memory problem.
fn build_system(
    config: &ExperimentConfig,
) -> Result<(WaveSystem, Option<crate::maccamy::SecondOrderSystem>)> {
    match &config.source {
        SystemSource::Direct { b } => {
            Ok((WaveSystem::new(*b, config.kernel.build(config.grid)?), None))
        }
        SystemSource::MacCamy => {
            let p = FirstOrderProblem::new(config.alpha, config.kernel.build(config.grid)?);
            let s = maccamy_transform(&p)?;
            Ok((WaveSystem::from_second_order(&s), Some(s)))
        }
        SystemSource::System { path } => {
            let s = crate::maccamy::SecondOrderSystem::read_from_dir(path)?;
            if s.grid() != &config.grid {
                return Err(Error::Config(format!(
                    "[problem] path {}: system derived on t_end={}, n_steps={}, but the [grid] section says t_end={}, n_steps={}",
                    path.display(),
                    s.grid().t_end(),
                    s.grid().n_steps(),
                    config.grid.t_end(),
                    config.grid.n_steps()
                )));
            }
            Ok((WaveSystem::from_second_order(&s), Some(s)))
        }
    }
}

fn pad(v: &[f64], len: usize) -> SpectralVector {
    let mut c = vec![0.0; len];
    c[..v.len().min(len)].copy_from_slice(&v[..v.len().min(len)]);
    SpectralVector::new(c)
}

/// Run a configured experiment, writing artifacts under the resolved
/// output directory.
pub fn run_config(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
    out_override: Option<&Path>,
) -> Result<ExperimentReport> {
    let seed = seed_override.unwrap_or(config.seed);
    let out = out_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config.output_dir.clone());
    let report = match config.kind {
        ExperimentKind::Identities => config_identities(config),
        ExperimentKind::Simulate => config_simulate(config, &out),
        ExperimentKind::Steer => config_steer(config, &out),
        ExperimentKind::Diagnose => config_diagnose(config, seed),
    }?;
    report.write_to_dir(&out)?;
    Ok(report)
}

fn config_identities(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("identities", "configured identity checks");
    for id in TrigIdentity::ALL {
        for &lambda in &config.identities.lambdas {
            let numeric = id.numeric(lambda, &config.grid)?;
            let exact = trig_identity_oracle(id, lambda, &config.grid);
            let err = numeric.sup_distance(&exact)?;
            report.check_le(
                &format!("{} lambda={lambda}", id.name()),
                err,
                config.tolerance,
            );
        }
    }
    Ok(report)
}

fn config_simulate(config: &ExperimentConfig, out: &Path) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("simulate", "forward evolution with exports");
    let domain = config.build_domain()?;
    let (sys, reduction) = build_system(config)?;
    sys.check_cfl(domain.lambda(domain.n_modes() - 1))?;
    let n_modes = domain.n_modes();
    let w0 = pad(&config.simulate.initial, n_modes);
    let w1 = match (&config.simulate.initial_velocity, &reduction) {
        (Some(v), _) => pad(v, n_modes),
        // The first-order equation forces w'(0) = 2 alpha w0.
        (None, Some(s)) => SpectralVector::new(
            w0.coeffs.iter().map(|c| 2.0 * s.alpha() * c).collect(),
        ),
        (None, None) => SpectralVector::zeros(n_modes),
    };

    let physical = match &reduction {
        None => free_evolution(&domain, &sys, &w0, &w1, None)?,
        Some(s) => {
            let forcing: Vec<Vec<f64>> = (0..n_modes)
                .map(|i| s.affine_map(w0.coeffs[i], w1.coeffs[i], None))
                .collect::<Result<_>>()?;
            let v0 = SpectralVector::new(
                (0..n_modes)
                    .map(|i| s.initial_data(w0.coeffs[i], w1.coeffs[i]).0)
                    .collect(),
            );
            let v1 = SpectralVector::new(
                (0..n_modes)
                    .map(|i| s.initial_data(w0.coeffs[i], w1.coeffs[i]).1)
                    .collect(),
            );
            let scaled = free_evolution(&domain, &sys, &v0, &v1, Some(&forcing))?;
            let trajectories: Vec<ModalTrajectory> = (0..n_modes)
                .map(|i| {
                    let (psi, psi_prime) = s.undo_scaling(scaled.mode(i));
                    ModalTrajectory {
                        psi,
                        psi_prime,
                        method: scaled.mode(i).method,
                    }
                })
                .collect();
            FieldSolution::from_trajectories(config.grid, trajectories)
        }
    };

    std::fs::create_dir_all(out)?;
    physical.write_field_csv(
        &domain,
        config.simulate.field_points,
        config.simulate.time_stride,
        &out.join("field.csv"),
    )?;
    report.artifact("field.csv");
    let trace = boundary_trace(&physical, &domain, n_modes)?;
    write_trace_csv(&trace, &config.grid, &out.join("trace.csv"))?;
    report.artifact("trace.csv");
    domain.write_eigen_csv(&out.join("eigen.csv"))?;
    report.artifact("eigen.csv");
    config
        .kernel
        .build(config.grid)?
        .write_csv(&out.join("kernel.csv"))?;
    report.artifact("kernel.csv");
    for i in 0..n_modes.min(4) {
        let name = format!("mode_{}.csv", i + 1);
        physical.mode(i).write_csv(&config.grid, &out.join(&name))?;
        report.artifact(&name);
    }
    if let Some(s) = &reduction {
        s.write_to_dir(&out.join("system"))?;
        report.artifact("system/system.txt");
        // The cross-check against the first-order march needs the kernel's
        // closed form, which a reloaded system no longer carries.
        if matches!(config.source, SystemSource::MacCamy) {
            let p = FirstOrderProblem::new(config.alpha, config.kernel.build(config.grid)?);
            let lambdas: Vec<f64> = (0..n_modes).map(|i| domain.lambda(i)).collect();
            let dev = equivalence_check(&p, s, &lambdas, &w0.coeffs)?;
            report.metric("equivalence_deviation", dev);
            report.check_le("reduction equivalence", dev, 5e-4);
        }
    }
    report.metric("trace_tail_estimate", trace.tail_estimate);
    report.check(
        "trace finite",
        trace.values.iter().flatten().all(|v| v.is_finite()),
        "all samples finite".into(),
    );
    Ok(report)
}

fn config_steer(config: &ExperimentConfig, out: &Path) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("steer", "boundary-control synthesis with verification");
    let domain = config.build_domain()?;
    let (sys, _) = build_system(config)?;
    let w0 = pad(&config.steer.initial, domain.n_modes());
    let target = pad(&config.steer.target, config.steer.n_modes);
    let options = SteerOptions::new(config.steer.n_modes)
        .with_regularization(config.steer.regularization)
        .with_basis(config.steer.basis);
    let outcome = steer(&domain, &sys, &w0, &target, &options)?;
    std::fs::create_dir_all(out)?;
    outcome.write_to_dir(out)?;
    report.artifact("control.csv");
    report.artifact("residual_per_mode.csv");
    report.artifact("gram_spectrum.csv");
    report.artifact("steering.txt");
    report.metric("in_sample_residual", outcome.in_sample_residual);
    report.metric("verification_residual", outcome.verification_residual);
    report.metric("sigma_min", outcome.sigma_min);
    report.metric("sigma_max", outcome.sigma_max);
    report.metric("condition", outcome.condition);
    report.metric("regularization", outcome.regularization);
    report.metric("control_norm", outcome.control_norm);
    // Bookkeeping consistency: the reported residual re-derives from the
    // achieved state.
    let mut err = 0.0;
    for n in 0..config.steer.n_modes {
        err += (outcome.achieved.coeffs[n] - outcome.target.coeffs[n]).powi(2);
    }
    let target_norm = outcome
        .target
        .coeffs
        .iter()
        .map(|c| c * c)
        .sum::<f64>()
        .sqrt()
        .max(1e-30);
    // The verification residual also counts leakage beyond the design
    // modes, so re-derivation bounds it from below.
    let recomputed = err.sqrt() / target_norm;
    report.check(
        "reported residual consistent with achieved state",
        recomputed <= outcome.verification_residual + 1e-10,
        format!(
            "recomputed {recomputed:.6e} vs reported {:.6e}",
            outcome.verification_residual
        ),
    );
    report.check(
        "synthesis finite",
        outcome.control_norm.is_finite(),
        format!("control norm {:.6e}", outcome.control_norm),
    );
    Ok(report)
}

fn config_diagnose(config: &ExperimentConfig, seed: u64) -> Result<ExperimentReport> {
    let mut report =
        ExperimentReport::new("diagnose", "probe sweep, Riesz bounds, direct inequality")
            .with_seed(seed);
    let domain = config.build_domain()?;
    let (sys, _) = build_system(config)?;

    for &n in &config.diagnose.mode_sweep {
        let sigma = perp_probe(&domain, &sys, n)?;
        report.metric(&format!("probe_sigma_{n}"), sigma);
        report.check(
            &format!("probe finite at {n} modes"),
            sigma.is_finite(),
            format!("{sigma:.6e}"),
        );
    }

    let n_gram = *config.diagnose.mode_sweep.iter().max().unwrap_or(&8);
    let gram = moment_gram(&domain, config.grid.t_end(), n_gram);
    report.metric("riesz_lower", gram.lower);
    report.metric("riesz_upper", gram.upper);
    report.check(
        "gram positive semidefinite",
        gram.lower >= -1e-10 * gram.upper.abs().max(1.0),
        format!("lower {:.6e}", gram.lower),
    );
    report.check_le("gram hermitian asymmetry", gram.asymmetry, 1e-10);

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x64696167);
    let samples: Vec<(SpectralVector, SpectralVector)> = (0..config.diagnose.samples)
        .map(|_| {
            let w0 = SpectralVector::new(
                (0..domain.n_modes())
                    .map(|n| rng.gen_range(-1.0..1.0) / domain.lambda_sq(n))
                    .collect(),
            );
            let w1 = SpectralVector::new(
                (0..domain.n_modes())
                    .map(|n| rng.gen_range(-1.0..1.0) / domain.lambda(n))
                    .collect(),
            );
            (w0, w1)
        })
        .collect();
    let ratio = direct_inequality_ratio(&domain, &sys, &samples)?;
    report.metric("direct_inequality_ratio", ratio);
    report.check(
        "direct-inequality ratio finite",
        ratio.is_finite(),
        format!("{ratio:.6e}"),
    );
    Ok(report)
}
