//! The four two-time quantities K₃₁ … K₃₄ against the preparation angle θ.
//!
//! Run with `cargo run --example closed_form_lgi`.

use macrorealism::lgi::{k3_closed_form, minimize_closed_form, KQuadruple};

fn main() {
    println!(
        "{:>6} {:>9} {:>9} {:>9} {:>9}",
        "θ°", "K31", "K32", "K33", "K34"
    );
    for deg in (0..=90).step_by(5) {
        let k = k3_closed_form((deg as f64).to_radians());
        let [a, b, c, d] = k.as_array();
        let flag = if k.violations(1e-12).is_empty() {
            ""
        } else {
            "  violated"
        };
        println!("{deg:>6} {a:>9.5} {b:>9.5} {c:>9.5} {d:>9.5}{flag}");
    }
    println!();
    for (i, name) in KQuadruple::NAMES.iter().enumerate() {
        let (theta, k) = minimize_closed_form(i);
        println!("min {name} = {k:+.6} at θ = {:.3}°", theta.to_degrees());
    }
}
