//! Steer the memory system to a truncated exponential profile just above
//! the wave controllability time, and measure truncation leakage well
//! beyond the verification band.
//!
//! ```text
//! cargo run --release --example steering_memory
//! ```

use memwave::control::{steer, ControlBasis, SteerOptions};
use memwave::field::{controlled_evolution, free_evolution, WaveSystem};
use memwave::spectral::{interval_domain, GammaSelect, SpectralVector};
use memwave::{ClosedForm, SampledKernel, TimeGrid};

fn main() {
    let grid = TimeGrid::new(std::f64::consts::PI + 0.2, 3342);
    // 64 modes so the far tail (modes 33..64) is observable.
    let domain = interval_domain(std::f64::consts::PI, 64, GammaSelect::Both).unwrap();
    let kernel = ClosedForm::Exponential {
        amplitude: 1.0,
        rate: 1.0,
    };
    let sys = WaveSystem::new(0.0, SampledKernel::from_closed_form(grid, kernel.clone()));

    let mut w0 = SpectralVector::zeros(64);
    w0.coeffs[0] = 1.0;
    w0.coeffs[2] = 0.5;
    // Modal coefficients of x -> exp(-x), truncated to 16 modes.
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
    let target_norm = target.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();

    println!("steering 16 design modes at T = pi + 0.2 with K = exp(-t)\n");
    println!(
        "{:<12} {:>11} {:>13} {:>13} {:>9}",
        "basis", "in-sample", "verification", "far tail", "|f|_L2"
    );
    for (label, basis) in [
        ("hats", ControlBasis::Hats),
        ("sine(24)", ControlBasis::Sine { max_frequency: 24 }),
    ] {
        let options = SteerOptions::new(16).with_basis(basis);
        let report = steer(&domain, &sys, &w0, &target, &options).unwrap();

        // Independent fine resolve across all 64 modes: how much landed
        // beyond the 32-mode band the synthesis controls?
        let fine_sys = WaveSystem::new(
            0.0,
            SampledKernel::from_closed_form(grid.refined(), kernel.clone()),
        );
        let fine_control = report.control.refined();
        let controlled = controlled_evolution(&domain, &fine_sys, &fine_control).unwrap();
        let drift =
            free_evolution(&domain, &fine_sys, &w0, &SpectralVector::zeros(64), None).unwrap();
        let mut far = 0.0;
        for n in 32..64 {
            let total =
                controlled.terminal_state().coeffs[n] + drift.terminal_state().coeffs[n];
            far += total * total;
        }
        println!(
            "{:<12} {:>11.2e} {:>13.2e} {:>13.2e} {:>9.3}",
            label,
            report.in_sample_residual,
            report.verification_residual,
            far.sqrt() / target_norm,
            report.control_norm,
        );
    }
    println!("\nboth syntheses hold the 32-mode band (design targets plus");
    println!("guard rows), but the broadband hat control still spills into");
    println!("the far tail; the endpoint-vanishing sine basis does not.");
}
