//! Dense symmetric eigenvalues: Householder reduction to tridiagonal form
//! followed by the implicitly shifted QL iteration.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative asymmetry tolerated by [`symmetric_eigenvalues`].
pub const SYMMETRY_TOL: f64 = 1e-12;

const MAX_QL_SWEEPS: usize = 60;

/// Largest `|M_ij|`.
pub fn max_abs_entry(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Checks `|M_ij − M_ji| ≤ tol·max|M|`.
pub fn check_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::domain(format!(
            "matrix is {}×{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    let scale = max_abs_entry(m);
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return Err(Error::domain(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// All eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m, SYMMETRY_TOL)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    // symmetrise so that round-off asymmetry cannot leak into the reduction
    let mut a: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            0.5 * (m[(i, j)] + m[(j, i)])
        })
        .collect();
    let (mut d, mut e) = tridiagonalize(&mut a, n);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Reduces the row-major symmetric `a` in place; returns the diagonal and
/// the subdiagonal (`e[k]` couples `k` and `k+1`, `e[n−1] = 0`).
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        d[k] = a[k * n + k];
        let m = n - k - 1;
        let col = |i: usize| a[(k + 1 + i) * n + k];
        let norm = (0..m).map(|i| col(i) * col(i)).sum::<f64>().sqrt();
        if norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let x0 = col(0);
        let alpha = if x0 > 0.0 { -norm } else { norm };
        for i in 0..m {
            v[i] = col(i);
        }
        v[0] -= alpha;
        let vnorm = v[..m].iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            e[k] = x0;
            continue;
        }
        for vi in v[..m].iter_mut() {
            *vi /= vnorm;
        }
        // B ← (I − 2vvᵀ) B (I − 2vvᵀ) on the trailing block
        let off = k + 1;
        for i in 0..m {
            let row = &a[(off + i) * n + off..(off + i) * n + off + m];
            p[i] = row.iter().zip(&v[..m]).map(|(r, vj)| r * vj).sum();
        }
        let kappa: f64 = p[..m].iter().zip(&v[..m]).map(|(pi, vi)| pi * vi).sum();
        for i in 0..m {
            p[i] -= kappa * v[i];
        }
        for i in 0..m {
            let (vi, qi) = (v[i], p[i]);
            let row = &mut a[(off + i) * n + off..(off + i) * n + off + m];
            for j in 0..m {
                row[j] -= 2.0 * (vi * p[j] + qi * v[j]);
            }
        }
        e[k] = alpha;
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        e[n - 2] = a[(n - 1) * n + n - 2];
    }
    d[n - 1] = a[(n - 1) * n + n - 1];
    (d, e)
}

/// Eigenvalues of the symmetric tridiagonal `(d, e)` left in `d`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::NonConvergence {
                    routine: "tridiagonal QL",
                    iterations: sweeps,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("tridiagonal QL", "non-finite eigenvalue"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::spectral::polynomial_roots;
    use rand::Rng;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = stream_rng(seed, 0);
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Characteristic polynomial coefficients (constant term first) by
    /// Faddeev–LeVerrier.
    fn char_poly(m: &DMatrix<f64>) -> Vec<f64> {
        let n = m.nrows();
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        let mut mk = DMatrix::<f64>::zeros(n, n);
        let id = DMatrix::<f64>::identity(n, n);
        for k in 1..=n {
            mk = m * &mk + &id * c[n - k + 1];
            c[n - k] = -(m * &mk).trace() / k as f64;
        }
        c
    }

    #[test]
    fn trivial_spectra() {
        assert_eq!(symmetric_eigenvalues(&DMatrix::identity(5, 5)).unwrap(), vec![1.0; 5]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        assert_eq!(symmetric_eigenvalues(&d).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(
            symmetric_eigenvalues(&DMatrix::from_element(1, 1, -4.0)).unwrap(),
            vec![-4.0]
        );
        assert!(symmetric_eigenvalues(&DMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn rejects_asymmetric() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 2)] = 0.5;
        assert!(matches!(symmetric_eigenvalues(&m), Err(Error::Domain(_))));
        assert!(matches!(
            symmetric_eigenvalues(&DMatrix::zeros(2, 3)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn matches_characteristic_polynomial_roots() {
        for seed in 0..5 {
            let m = random_symmetric(8, seed);
            let ours = symmetric_eigenvalues(&m).unwrap();
            let mut roots: Vec<f64> = polynomial_roots(&char_poly(&m)).unwrap().iter().map(|z| z.re).collect();
            roots.sort_by(f64::total_cmp);
            for (a, b) in ours.iter().zip(&roots) {
                assert!((a - b).abs() < 1e-8, "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn matches_reference_solver() {
        let m = random_symmetric(60, 11);
        let ours = symmetric_eigenvalues(&m).unwrap();
        let mut theirs: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn degenerate_and_rank_one() {
        let ones = DMatrix::from_element(6, 6, 1.0);
        let ev = symmetric_eigenvalues(&ones).unwrap();
        assert!((ev[5] - 6.0).abs() < 1e-13);
        assert!(ev[..5].iter().all(|v| v.abs() < 1e-13));
        // already tridiagonal, with a zero off-diagonal
        let mut t = DMatrix::zeros(4, 4);
        t[(0, 0)] = 2.0;
        t[(1, 1)] = 2.0;
        t[(0, 1)] = 1.0;
        t[(1, 0)] = 1.0;
        t[(3, 3)] = -1.0;
        let ev = symmetric_eigenvalues(&t).unwrap();
        let want = [-1.0, 0.0, 1.0, 3.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    proptest::proptest! {
        #[test]
        fn trace_and_frobenius_are_preserved(n in 1usize..24, seed in 0u64..1000) {
            let m = random_symmetric(n, seed);
            let ev = symmetric_eigenvalues(&m).unwrap();
            let trace = m.trace();
            let frob2 = m.iter().map(|v| v * v).sum::<f64>();
            let scale = m.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            proptest::prop_assert!((ev.iter().sum::<f64>() - trace).abs() <= 1e-10 * scale);
            proptest::prop_assert!((ev.iter().map(|v| v * v).sum::<f64>() - frob2).abs() <= 1e-10 * frob2.max(1.0));
            proptest::prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
