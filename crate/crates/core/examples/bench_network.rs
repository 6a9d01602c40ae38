//! The interference network as a bench description, evaluated element by
//! element, and the same network read back from its text form.
//!
//! `cargo run --example bench_network -- path/to/bench.txt` evaluates a file.

use macrorealism::expsim::{build_network, detect_all, BenchConfig};
use macrorealism::optics::{BenchLayout, PointerOutcome};
use macrorealism::weakmeas::{
    expectations_from_intensities, postselect_from_intensities, Coupling,
};

fn main() -> macrorealism::Result<()> {
    let cfg = BenchConfig::default();
    let layout = match std::env::args().nth(1) {
        Some(path) => {
            BenchLayout::parse(&std::fs::read_to_string(path).expect("readable bench file"))?
        }
        None => build_network(&cfg),
    };
    print!("{}", layout.to_text());
    println!();

    // intensities in (U,H) (U,V) (D,H) (D,V), analyzer set to +, splitters transmitting
    let text = layout.to_text();
    for (i, line) in text.lines().skip(1).enumerate() {
        if line.starts_with("DETECTOR") {
            continue;
        }
        let s = layout.state_after(i + 1, PointerOutcome::Plus);
        let probs: Vec<String> = s
            .amplitudes()
            .iter()
            .map(|a| format!("{:.4}", a.norm_sqr()))
            .collect();
        println!("{line:<16} {}", probs.join(" "));
    }
    println!();

    let c = Coupling::new(cfg.gamma)?;
    for (name, rec) in detect_all(&layout)? {
        let r = expectations_from_intensities(&rec)?;
        println!(
            "{name}: I+ {:.5} I− {:.5} IR {:.5} IL {:.5} IH {:.5} IV {:.5}  ⟨σx⟩ {:+.6} ⟨σy⟩ {:+.6}  p {:.6}",
            rec.i_plus,
            rec.i_minus,
            rec.i_r,
            rec.i_l,
            rec.i_h,
            rec.i_v,
            r.sx,
            r.sy,
            postselect_from_intensities(&rec, c)?
        );
    }

    assert_eq!(BenchLayout::parse(&text)?.to_text(), text);
    Ok(())
}
