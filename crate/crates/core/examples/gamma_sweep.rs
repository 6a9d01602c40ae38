//! The recovered weak value does not depend on the coupling strength.

use macrorealism::expsim::{sweep_gamma, BenchConfig};

fn main() -> macrorealism::Result<()> {
    let gammas: Vec<f64> = (-6..=6)
        .filter(|&k| k != 0)
        .map(|k| (4.0 * k as f64).to_radians())
        .collect();
    for noise in [0.0, 0.01] {
        let template = BenchConfig {
            noise_rel: noise,
            seed: 4,
            ..BenchConfig::default()
        };
        println!("noise {noise}");
        for r in sweep_gamma(&template, &gammas)? {
            println!(
                "  γ = {:>4.0}°  Re w = {:.5} ± {:.5}  |w|² = {:.5} ± {:.5}  (exact {:.5})",
                r.gamma_deg,
                r.estimate.re.value,
                r.estimate.re.sigma,
                r.norm_w_sq.value,
                r.norm_w_sq.sigma,
                r.theory.re_w()
            );
        }
    }
    Ok(())
}
