//! Limiting spectral density for Student(3) volatility at a few aspect ratios.

use evsce::spectral::{closed_form_density, spectral_edge, tail_asymptote, AspectRatio};

fn main() -> evsce::Result<()> {
    for y in [1.5, 2.0, 4.0, 8.0] {
        let ratio = AspectRatio::new(y)?;
        let edge = spectral_edge(ratio);
        println!(
            "y = {y}: support starts at {edge:.6}, tail constant {:.6}",
            tail_asymptote(ratio)
        );
        for x in [edge * 0.5, edge * 1.01, 0.5, 1.0, 2.0, 5.0, 20.0] {
            println!("  rho({x:>9.5}) = {:.8}", closed_form_density(x, ratio)?);
        }
    }
    Ok(())
}
