//! Weak values of the path observable for the two post-selections |±m₃⟩.
//!
//! A weak value outside [−1, 1] appears exactly on the port whose
//! post-selection probability is below one half.

use macrorealism::optics::path_observable;
use macrorealism::weakmeas::{postselect_prob, weak_value, PostPort, TwoStateVector};

fn main() {
    let m2 = path_observable();
    println!(
        "{:>5} {:>8} {:>10} {:>8} {:>10}",
        "θ°", "p+", "w+", "p−", "w−"
    );
    for deg in (0..=90).step_by(10) {
        let theta = (deg as f64).to_radians();
        let mut cells = Vec::new();
        for port in PostPort::BOTH {
            let ctx = TwoStateVector::bench(theta, port);
            let w = match weak_value(&m2, &ctx) {
                Ok(w) if w.is_anomalous() => format!("{:+.4}*", w.re()),
                Ok(w) => format!("{:+.4}", w.re()),
                Err(_) => "undefined".into(),
            };
            cells.push(format!("{:>8.4} {w:>10}", postselect_prob(&ctx)));
        }
        println!("{deg:>5} {}", cells.join(" "));
    }
    println!("* anomalous");
}
