//! Classical and quantum bounds on the n-time quantity Kₙ.
//!
//! The classical range comes from enumerating every ±1 assignment; the
//! quantum column maximizes Kₙ for a precessing qubit measured with the
//! Lüders rule and compares it with n·cos(π/n).

use macrorealism::lgi::{classical_bounds, luders_bound, maximize_precession};

fn main() -> macrorealism::Result<()> {
    println!(
        "{:>3} {:>10} {:>10} {:>10} {:>10} {:>8}",
        "n", "min", "max", "Lüders", "max Kₙ", "φ*"
    );
    for n in 3..=10 {
        let b = classical_bounds(n)?;
        let (phi, k) = maximize_precession(n)?;
        println!(
            "{n:>3} {:>10} {:>10} {:>10.5} {:>10.5} {:>7.2}°",
            b.lower,
            b.upper,
            luders_bound(n),
            k,
            phi.to_degrees()
        );
    }
    Ok(())
}
