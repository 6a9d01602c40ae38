//! Pointer readouts for a given weak value and their inversion.
//!
//! The readout is exact for any coupling γ; inverting it gives two roots,
//! one on each side of |cot γ|.

use macrorealism::algebra::Complex;
use macrorealism::weakmeas::{invert_pointer, pointer_expectations, Branch, Coupling, WeakValue};

fn main() -> macrorealism::Result<()> {
    for (w, gamma_deg) in [(0.577, 12.0), (3.0, 12.0), (3.0, 24.0), (-1.7, 4.0)] {
        let c = Coupling::degrees(gamma_deg)?;
        let w = WeakValue::new(Complex::new(w, 0.25))?;
        let r = pointer_expectations(w, c);
        let roots = invert_pointer(r, c, Branch::Both)?;
        println!(
            "w = {:.3}{:+.3}i  γ = {gamma_deg:>4}°  ⟨σx⟩ = {:+.6}  ⟨σy⟩ = {:+.6}  weak root {:.6}  strong root {:.6}  cot γ = {:.4}",
            w.re(),
            w.im(),
            r.sx,
            r.sy,
            roots.weak().value(),
            roots.strong().value(),
            1.0 / gamma_deg.to_radians().tan()
        );
    }
    Ok(())
}
