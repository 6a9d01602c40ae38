//! One noisy run of the bench at θ = 15°, γ = 12°: weak values and the K
//! quadruple with error bars.
//!
//! Usage: `cargo run --example noisy_estimate -- [noise] [shots] [seed]`.

use macrorealism::expsim::{estimate_port, k_quadruple, run_noisy, BenchConfig};
use macrorealism::lgi::{k3_closed_form, KQuadruple};
use macrorealism::weakmeas::PostPort;

fn main() -> macrorealism::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut next = |d: &str| args.next().unwrap_or_else(|| d.into());
    let cfg = BenchConfig {
        noise_rel: next("0.01").parse().expect("noise"),
        shots: next("100").parse().expect("shots"),
        seed: next("1").parse().expect("seed"),
        ..BenchConfig::default()
    };
    let c = cfg.coupling()?;
    let mut est = Vec::new();
    for port in PostPort::BOTH {
        let records = run_noisy(&BenchConfig {
            post_port: port,
            ..cfg
        })?;
        let e = estimate_port(&records, c)?;
        println!(
            "{} port: p = {:.5} ± {:.5}, Re w = {:.5} ± {:.5}, Im w = {:+.5} ± {:.5}, rejected {}, clamped {}",
            port.short_name(),
            e.p_post.value,
            e.p_post.sigma,
            e.re.value,
            e.re.sigma,
            e.im.value,
            e.im.sigma,
            e.rejected,
            e.clamped
        );
        est.push(e);
    }
    let exact = k3_closed_form(cfg.theta).as_array();
    for ((name, k), want) in KQuadruple::NAMES
        .iter()
        .zip(k_quadruple(&est[0], &est[1]))
        .zip(exact)
    {
        let verdict = if k.value + k.sigma < 0.0 {
            "violated beyond 1σ"
        } else {
            ""
        };
        println!(
            "{name} = {:+.5} ± {:.5}  (exact {want:+.5}) {verdict}",
            k.value, k.sigma
        );
    }
    Ok(())
}
