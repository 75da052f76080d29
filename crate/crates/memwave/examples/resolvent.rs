//! Volterra resolvent kernels: the defining defect, the constant-kernel
//! closed form, and the inversion back to the original kernel.
//!
//! ```text
//! cargo run --release --example resolvent
//! ```

use memwave::conv::{resolvent_defect, resolvent_kernel};
use memwave::{ClosedForm, SampledKernel, TimeGrid};

fn main() {
    let grid = TimeGrid::new(2.0 * std::f64::consts::PI, 6284);

    for (name, form) in [
        ("k = 1", ClosedForm::Constant { value: 1.0 }),
        (
            "k = exp(-t)",
            ClosedForm::Exponential {
                amplitude: 1.0,
                rate: 1.0,
            },
        ),
        (
            "k = t",
            ClosedForm::Polynomial {
                coeffs: vec![0.0, 1.0],
            },
        ),
    ] {
        let k = SampledKernel::from_closed_form(grid, form);
        let r = resolvent_kernel(&k).unwrap();
        let defect = resolvent_defect(&k, &r).unwrap();
        println!("{name:<12} defect |r - k + k*r| = {defect:.3e}");
    }

    // Constant kernel c has resolvent c*exp(-ct).
    for c in [0.5, 1.0, 2.0] {
        let k = SampledKernel::from_closed_form(grid, ClosedForm::Constant { value: c });
        let r = resolvent_kernel(&k).unwrap();
        let exact = SampledKernel::from_fn(grid, |t| c * (-c * t).exp());
        println!(
            "c = {c}: |r - c*exp(-ct)|_sup = {:.3e}",
            r.sup_distance(&exact).unwrap()
        );
    }

    // r = k - k*r pairs with k = -resolvent(-r).
    let k = SampledKernel::from_fn(grid, |t| 0.8 * (-0.5 * t).exp() + 0.1 * t);
    let r = resolvent_kernel(&k).unwrap();
    let back = resolvent_kernel(&r.negated()).unwrap().negated();
    println!(
        "round trip k -> r -> k: sup distance {:.3e}",
        back.sup_distance(&k).unwrap()
    );
}
