//! Boundary traces of a free run and the direct-inequality ratio.
//!
//! ```text
//! cargo run --release --example trace_and_direct_inequality
//! ```

use memwave::field::{boundary_trace, direct_inequality_ratio, free_evolution, WaveSystem};
use memwave::spectral::{interval_domain, GammaSelect, SpectralVector};
use memwave::{ClosedForm, SampledKernel, TimeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let grid = TimeGrid::new(2.0, 2000);
    let domain = interval_domain(std::f64::consts::PI, 48, GammaSelect::Both).unwrap();
    let sys = WaveSystem::new(
        0.0,
        SampledKernel::from_closed_form(
            grid,
            ClosedForm::Exponential {
                amplitude: 1.0,
                rate: 1.0,
            },
        ),
    );

    // Finite-energy data with decaying coefficients.
    let w0 = SpectralVector::new((1..=48).map(|n| 1.0 / (n * n) as f64).collect());
    let w1 = SpectralVector::zeros(48);
    let field = free_evolution(&domain, &sys, &w0, &w1, None).unwrap();
    println!("trace partial sums, tail estimate against half the truncation:");
    for n in [12usize, 24, 48] {
        let trace = boundary_trace(&field, &domain, n).unwrap();
        println!("  N = {n:2}: tail {:.3e}", trace.tail_estimate);
    }

    // Seeded batch of energy-space data for the trace-to-data ratio.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let samples: Vec<(SpectralVector, SpectralVector)> = (0..5)
        .map(|_| {
            let w0 = SpectralVector::new(
                (0..48)
                    .map(|n| rng.gen_range(-1.0..1.0) / domain.lambda_sq(n))
                    .collect(),
            );
            let w1 = SpectralVector::new(
                (0..48)
                    .map(|n| rng.gen_range(-1.0..1.0) / domain.lambda(n))
                    .collect(),
            );
            (w0, w1)
        })
        .collect();
    let ratio = direct_inequality_ratio(&domain, &sys, &samples).unwrap();
    println!("\ndirect-inequality ratio over 5 seeded samples: {ratio:.6}");
    println!("(boundary trace energy controlled by the data energy)");
}
