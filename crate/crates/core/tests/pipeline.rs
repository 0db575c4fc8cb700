use evsce::distributions::{NoiseModel, VolatilityModel};
use evsce::market::{
    clear_market_mode, joint_exceedance, renormalise, row_volatility, spillover_pairs, ReturnsPanel, Stage,
};
use evsce::simulator::{generate_evm, EVMConfig};
use nalgebra::DMatrix;

fn student_sample(t: usize, s: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let config = EVMConfig::new(t, s, VolatilityModel::student(3.0).unwrap(), NoiseModel::Gaussian, seed).unwrap();
    let sample = generate_evm(&config).unwrap();
    (sample.x, sample.sigma.expect("random volatility"))
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn row_volatility_tracks_sigma() {
    let (x, sigma) = student_sample(300, 400, 21);
    let panel = ReturnsPanel::from_matrix(x, Stage::Raw).unwrap();
    let vol = row_volatility(&panel).unwrap();
    let abs: Vec<f64> = sigma.iter().map(|v| v.abs()).collect();
    assert!(correlation(&vol, &abs) > 0.99);
    let worst = vol
        .iter()
        .zip(&abs)
        .map(|(v, a)| (v - a).abs() / (a + 0.05))
        .fold(0.0, f64::max);
    assert!(worst < 0.3, "{worst}");
}

#[test]
fn shared_volatility_produces_joint_extremes() {
    // Columns of one EVM share σ_t; two separate EVMs do not.
    let (shared, _) = student_sample(20_000, 2, 3);
    let (a, _) = student_sample(20_000, 1, 4);
    let (b, _) = student_sample(20_000, 1, 5);
    let mut indep = DMatrix::zeros(20_000, 2);
    indep.set_column(0, &a.column(0));
    indep.set_column(1, &b.column(0));
    let rate = |m: DMatrix<f64>| {
        let panel = renormalise(&ReturnsPanel::from_matrix(m, Stage::Raw).unwrap()).unwrap();
        joint_exceedance(&spillover_pairs(&panel, "s0", "s1").unwrap(), 3.0)
    };
    let (together, apart) = (rate(shared), rate(indep));
    assert!(together > 5.0 * apart, "{together} vs {apart}");
}

#[test]
fn clearing_removes_a_planted_factor() {
    let (x, _) = student_sample(400, 50, 8);
    let f: Vec<f64> = (0..400).map(|t| ((t * 37 % 101) as f64 - 50.0) / 30.0).collect();
    let with_factor = DMatrix::from_fn(400, 50, |t, s| x[(t, s)] + 2.0 * f[t]);
    let panel = renormalise(&ReturnsPanel::from_matrix(with_factor, Stage::Raw).unwrap()).unwrap();
    let cleared = clear_market_mode(&panel).unwrap();
    assert_eq!(cleared.stage, Stage::Cleared);
    let mean_corr: f64 = (0..50)
        .map(|s| correlation(cleared.values.column(s).as_slice(), &f).abs())
        .sum::<f64>()
        / 50.0;
    assert!(mean_corr < 0.1, "{mean_corr}");
}
