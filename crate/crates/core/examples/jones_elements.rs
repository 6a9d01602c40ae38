//! Wave plates, beam displacer and the pointer analyzer on basis states.

use macrorealism::algebra::{Basis, StateVector};
use macrorealism::optics::{beam_displacer, hwp, pbs_split, qwp, PointerOutcome};

fn show(label: &str, s: &StateVector) {
    let amps: Vec<String> = s
        .amplitudes()
        .iter()
        .map(|a| format!("{:+.3}{:+.3}i", a.re, a.im))
        .collect();
    println!("{label:<28} [{}]", amps.join(", "));
}

fn main() -> macrorealism::Result<()> {
    let h = StateVector::basis_state(Basis::polarization(), "H")?;
    let v = StateVector::basis_state(Basis::polarization(), "V")?;
    for deg in [0.0, 22.5, 45.0] {
        show(
            &format!("HWP({deg}°)|H⟩"),
            &hwp(f64::to_radians(deg)).apply(&h)?,
        );
    }
    show("QWP(45°)|H⟩", &qwp(f64::to_radians(45.0)).apply(&h)?);
    show("QWP(45°)|V⟩", &qwp(f64::to_radians(45.0)).apply(&v)?);

    println!();
    let bd = beam_displacer();
    for (p, q) in [("D", "H"), ("D", "V"), ("U", "H")] {
        let s = StateVector::basis_state(Basis::path(), p)?
            .tensor(&StateVector::basis_state(Basis::polarization(), q)?);
        show(&format!("BD|{p},{q}⟩ (U,H U,V D,H D,V)"), &bd.apply(&s)?);
    }

    println!();
    for o in PointerOutcome::ALL {
        let (q1, h5) = o.analyzer_plates();
        let (t, _) = pbs_split(&o.analyzer_operator().apply(&o.state())?)?;
        println!(
            "{o:?}: Q1 {:>5.1}°, H5 {:>6.2}°, transmitted {:.3}",
            q1.axis_angle().to_degrees(),
            h5.axis_angle().to_degrees(),
            t.norm_sqr()
        );
    }
    Ok(())
}
