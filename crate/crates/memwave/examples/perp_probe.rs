//! The annihilator probe: smallest singular value of the map from
//! terminal-state annihilators to the adjoint boundary trace, plus the
//! eigenvalue deflation that backs its independence argument.
//!
//! ```text
//! cargo run --release --example perp_probe
//! ```

use memwave::control::{deflate, perp_probe};
use memwave::field::WaveSystem;
use memwave::spectral::{interval_domain, rectangle_domain, Edge, GammaSelect};
use memwave::TimeGrid;

fn main() {
    // Controllable: both ends, full period. The probe stays put as the
    // truncation grows.
    let grid = TimeGrid::new(2.0 * std::f64::consts::PI, 3142);
    let both = interval_domain(std::f64::consts::PI, 32, GammaSelect::Both).unwrap();
    let sys = WaveSystem::memoryless(grid);
    println!("both ends, T = 2*pi:");
    for n in [8usize, 16, 32] {
        println!("  sigma_min({n:2} modes) = {:.6}", perp_probe(&both, &sys, n).unwrap());
    }

    // Sub-critical: one end, T = 0.5. The probe collapses.
    let short = TimeGrid::new(0.5, 500);
    let left = interval_domain(std::f64::consts::PI, 32, GammaSelect::Left).unwrap();
    let sys_short = WaveSystem::memoryless(short);
    println!("\nleft end only, T = 0.5:");
    for n in [8usize, 16, 32] {
        println!(
            "  sigma_min({n:2} modes) = {:.3e}",
            perp_probe(&left, &sys_short, n).unwrap()
        );
    }

    // Deflation removes one eigenvalue group exactly; on a square the
    // group can have multiplicity two.
    let pi = std::f64::consts::PI;
    let square = rectangle_domain(pi, pi, 10.0, &[Edge::Left]).unwrap();
    let lambda_sq: Vec<f64> = (0..square.n_modes()).map(|n| square.lambda_sq(n)).collect();
    let group = square
        .eigenvalue_groups()
        .iter()
        .find(|g| g.len() == 2)
        .unwrap();
    let xi = vec![1.0; lambda_sq.len()];
    let deflated = deflate(&xi, &lambda_sq, group[0]);
    println!("\nsquare eigenvalue group {:?} (lambda^2 = {}):", group, lambda_sq[group[0]]);
    println!("  deflated entries at the group: {:?}", group.iter().map(|&i| deflated[i]).collect::<Vec<_>>());
}
