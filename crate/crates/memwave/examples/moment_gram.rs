//! Riesz-bound estimates for the exponential moment family: clean on a
//! full period, collapsing on a short single-end horizon.
//!
//! ```text
//! cargo run --release --example moment_gram
//! ```

use memwave::control::moment_gram;
use memwave::spectral::{interval_domain, GammaSelect};

fn main() {
    let both = interval_domain(std::f64::consts::PI, 16, GammaSelect::Both).unwrap();
    let gram = moment_gram(&both, 2.0 * std::f64::consts::PI, 16);
    println!("both ends, T = 2*pi, 16 modes and their mirrors:");
    println!("  lower Riesz bound {:.6}", gram.lower);
    println!("  upper Riesz bound {:.6}", gram.upper);
    println!("  (integer frequencies over a full period: the Gram is 8*I)\n");

    let left = interval_domain(std::f64::consts::PI, 32, GammaSelect::Left).unwrap();
    for n in [8usize, 16, 32] {
        let gram = moment_gram(&left, 2.0, n);
        println!(
            "single end, T = 2, {n:2} modes: lower {:.3e}, upper {:.3e}, ratio {:.1e}",
            gram.lower,
            gram.upper,
            gram.lower / gram.upper
        );
    }
    println!("\non the short horizon the family loses its lower frame bound");
    println!("as the truncation grows: the moment problem degenerates.");
}
