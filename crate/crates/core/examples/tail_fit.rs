//! Tail exponents by Hill and log-log regression.

use evsce::distributions::{sample, VolatilityModel};
use evsce::market::{pareto_grid, tail_exponent, TailMethod};

fn main() -> evsce::Result<()> {
    let pareto = pareto_grid(3.0, 50_000);
    let student: Vec<f64> = sample(VolatilityModel::student(3.0)?, 200_000, 1)?
        .iter()
        .map(|v| v.abs())
        .collect();
    for (name, data) in [("Pareto(3) grid", &pareto), ("|Student(3)|", &student)] {
        for method in [TailMethod::Hill, TailMethod::LogLogRegression] {
            let fit = tail_exponent(data, method, None)?;
            println!(
                "{name:>15} {method:?}: {:.3} ± {:.3} (k = {})",
                fit.exponent, fit.stderr, fit.k_used
            );
        }
    }
    Ok(())
}
