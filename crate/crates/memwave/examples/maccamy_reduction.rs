//! Reduce the memory equation `w' = 2αw + N*Δw` to its second-order form
//! and check the two solution paths against each other.
//!
//! ```text
//! cargo run --release --example maccamy_reduction
//! ```

use memwave::maccamy::{equivalence_check, maccamy_transform, FirstOrderProblem};
use memwave::{ClosedForm, SampledKernel, TimeGrid};

fn main() {
    let grid = TimeGrid::new(2.0, 2000);
    let problem = FirstOrderProblem::new(
        0.1,
        SampledKernel::from_closed_form(
            grid,
            ClosedForm::Exponential {
                amplitude: 1.0,
                rate: 1.0,
            },
        ),
    );
    let system = maccamy_transform(&problem).unwrap();

    println!("alpha = 0.1, N(t) = exp(-t), T = 2");
    println!("  a (velocity coefficient)   = {:+.6}", system.a());
    println!("  b (zeroth order, prescale) = {:+.6}", system.b());
    println!("  b_post (after scaling)     = {:+.6}", system.b_post());
    println!("  scale rate                 = {:+.6}", system.scale_rate());
    println!("  laplacian coefficient      = {:+.6}", system.laplacian_coeff());
    println!("  |K|_sup (post-scaling)     = {:.3e}", system.kernel().sup_norm());
    println!();

    // Exponential memory collapses to a shifted wave equation: the memory
    // kernel of the reduced system vanishes and everything sits in the
    // constants.
    let lambdas = [1.0, 2.0, 3.0];
    let w0 = [1.0, 0.6, -0.4];
    let dev = equivalence_check(&problem, &system, &lambdas, &w0).unwrap();
    println!("equivalence deviation over modes 1..3: {dev:.3e}");

    let fine_grid = TimeGrid::new(2.0, 4000);
    let fine_problem = FirstOrderProblem::new(
        0.1,
        SampledKernel::from_closed_form(
            fine_grid,
            ClosedForm::Exponential {
                amplitude: 1.0,
                rate: 1.0,
            },
        ),
    );
    let fine_system = maccamy_transform(&fine_problem).unwrap();
    let fine = equivalence_check(&fine_problem, &fine_system, &lambdas, &w0).unwrap();
    println!("after halving dt:                      {fine:.3e} (ratio {:.2})", dev / fine);
}
