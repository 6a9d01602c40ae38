//! Sweep of the preparation angle with both post-selection ports: the data
//! behind the probability, weak-value and K₃ᵢ curves.

use macrorealism::expsim::{sweep_theta, BenchConfig};

fn main() -> macrorealism::Result<()> {
    let template = BenchConfig {
        seed: 7,
        amplification_n: 3,
        ..BenchConfig::default()
    };
    let thetas: Vec<f64> = (0..=18).map(|k| (5.0 * k as f64).to_radians()).collect();
    println!(
        "{:>4} {:>8} {:>8} {:>9} {:>10} {:>17} {:>8}",
        "θ°", "p+", "p−", "Re w+", "Re w−", "K33", "3·p+"
    );
    for r in sweep_theta(&template, &thetas)? {
        println!(
            "{:>4.0} {:>8.4} {:>8.4} {:>9.4} {:>10.4} {:>+8.4} ± {:.4} {:>8.4}",
            r.theta_deg,
            r.plus.p_post.value,
            r.minus.p_post.value,
            r.plus.re.value,
            r.minus.re.value,
            r.k[2].value,
            r.k[2].sigma,
            r.p_plus_amp
        );
    }
    Ok(())
}
