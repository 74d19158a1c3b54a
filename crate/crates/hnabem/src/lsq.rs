//! Truncated-SVD least-squares solve of the weighted collocation system.
//!
//! The overlapping meshes make the basis nearly redundant, so the system is
//! rank-deficient in floating point; the regularized pseudo-inverse
//! `a = V (Sigma^eps)^dagger U* b` keeps only singular values with
//! `sigma_n / sigma_1 > eps` (strictly).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LsqError {
    #[error("system must be overdetermined or square: M = {m} < N = {n}")]
    Underdetermined { m: usize, n: usize },
    #[error("threshold must lie in (0, 1), got {0}")]
    BadThreshold(f64),
    #[error("non-finite entry in the {0}")]
    NonFinite(&'static str),
    #[error("SVD iteration failed to converge")]
    SvdFailure,
}

/// The solve result with its diagnostics.
#[derive(Debug, Clone)]
pub struct SvdSolution {
    /// Coefficients `a`, in the span of the retained right singular vectors.
    pub coefficients: DVector<Complex64>,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
    /// Retained rank `r = #{n : sigma_n / sigma_1 > eps}`.
    pub rank: usize,
    /// Residual `||A a - b||_2`.
    pub residual: f64,
    /// Threshold used.
    pub epsilon: f64,
}

impl SvdSolution {
    /// Diagnostics table: one `n sigma_n` line per singular value, then a
    /// retained-rank summary line.
    pub fn diagnostics(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for (n, s) in self.singular_values.iter().enumerate() {
            writeln!(out, "{n} {s:.16e}").unwrap();
        }
        writeln!(
            out,
            "# retained rank {} of {} at epsilon {:.16e}",
            self.rank,
            self.singular_values.len(),
            self.epsilon
        )
        .unwrap();
        out
    }
}

/// Solves `min ||A a - b||` by the truncated pseudo-inverse with relative
/// threshold `eps`: `a = V (Sigma^eps)^dagger U* b` where
/// `1/sigma_n` is kept iff `sigma_n / sigma_1 > eps` (ties excluded).
pub fn truncated_svd_solve(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    eps: f64,
) -> Result<SvdSolution, LsqError> {
    let (m, n) = a.shape();
    if m < n {
        return Err(LsqError::Underdetermined { m, n });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LsqError::BadThreshold(eps));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LsqError::NonFinite("matrix"));
    }
    if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LsqError::NonFinite("right-hand side"));
    }
    let svd = a.clone().try_svd(true, true, f64::EPSILON, 0).ok_or(LsqError::SvdFailure)?;
    let u = svd.u.as_ref().ok_or(LsqError::SvdFailure)?;
    let v_t = svd.v_t.as_ref().ok_or(LsqError::SvdFailure)?;
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    // nalgebra returns them unsorted in rare cases; the truncation rule and
    // the diagnostics both assume descending order.
    let mut order: Vec<usize> = (0..singular_values.len()).collect();
    order.sort_by(|&i, &j| singular_values[j].total_cmp(&singular_values[i]));
    let sorted: Vec<f64> = order.iter().map(|&i| singular_values[i]).collect();
    singular_values = sorted;

    let sigma1 = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values
        .iter()
        .take_while(|&&s| sigma1 > 0.0 && s / sigma1 > eps)
        .count();

    // a = sum over retained n of (u_n* b / sigma_n) v_n.
    let mut coeff = DVector::<Complex64>::zeros(n);
    for &idx in order.iter().take(rank) {
        let sigma = svd.singular_values[idx];
        let un_b: Complex64 = (0..m).map(|i| u[(i, idx)].conj() * b[i]).sum();
        let scale = un_b / sigma;
        for jx in 0..n {
            coeff[jx] += scale * v_t[(idx, jx)].conj();
        }
    }
    let residual = (a * &coeff - b).norm();
    Ok(SvdSolution {
        coefficients: coeff,
        singular_values,
        rank,
        residual,
        epsilon: eps,
    })
}

/// Singular-value profile of a matrix: `sigma_1`, `sigma_min`, and the
/// retained rank over a grid of thresholds, for diagnostics output.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub singular_values: Vec<f64>,
    /// `(epsilon, retained rank)` pairs, epsilon ascending.
    pub rank_profile: Vec<(f64, usize)>,
}

pub fn condition_report(a: &DMatrix<Complex64>) -> Result<ConditionReport, LsqError> {
    let svd = a.clone().try_svd(false, false, f64::EPSILON, 0).ok_or(LsqError::SvdFailure)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let sigma_min = s.last().copied().unwrap_or(0.0);
    let rank_profile = (-14..0)
        .map(|e| {
            let eps = 10f64.powi(e);
            let r = s
                .iter()
                .take_while(|&&x| sigma_max > 0.0 && x / sigma_max > eps)
                .count();
            (eps, r)
        })
        .collect();
    Ok(ConditionReport {
        sigma_max,
        sigma_min,
        singular_values: s,
        rank_profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(m, n, |_, _| {
            cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn identity_recovers_rhs() {
        let a = DMatrix::<Complex64>::identity(5, 5);
        let b = DVector::from_fn(5, |i, _| cx(i as f64, -(i as f64)));
        for eps in [1e-14, 1e-8, 0.5] {
            let sol = truncated_svd_solve(&a, &b, eps).unwrap();
            assert!((&sol.coefficients - &b).norm() < 1e-14);
            assert_eq!(sol.rank, 5);
            assert!(sol.residual < 1e-14);
        }
    }

    #[test]
    fn small_singular_value_truncated() {
        let mut a = DMatrix::<Complex64>::zeros(2, 2);
        a[(0, 0)] = cx(1.0, 0.0);
        a[(1, 1)] = cx(1e-9, 0.0);
        let b = DVector::from_vec(vec![cx(1.0, 0.0), cx(1.0, 0.0)]);
        let sol = truncated_svd_solve(&a, &b, 1e-8).unwrap();
        assert_eq!(sol.rank, 1);
        assert!((sol.coefficients[0] - cx(1.0, 0.0)).norm() < 1e-14);
        assert!(sol.coefficients[1].norm() < 1e-14);
        // Strict threshold: sigma_2/sigma_1 == eps exactly is excluded.
        a[(1, 1)] = cx(1e-8, 0.0);
        let sol = truncated_svd_solve(&a, &b, 1e-8).unwrap();
        assert_eq!(sol.rank, 1);
    }

    #[test]
    fn shape_and_input_validation() {
        let a = random_matrix(&mut ChaCha8Rng::seed_from_u64(1), 3, 5);
        let b = DVector::zeros(3);
        assert!(matches!(
            truncated_svd_solve(&a, &b, 1e-8),
            Err(LsqError::Underdetermined { m: 3, n: 5 })
        ));
        let a = random_matrix(&mut ChaCha8Rng::seed_from_u64(1), 5, 3);
        let b = DVector::zeros(5);
        assert!(truncated_svd_solve(&a, &b, 0.0).is_err());
        assert!(truncated_svd_solve(&a, &b, 1.0).is_err());
        let mut bad = a.clone();
        bad[(0, 0)] = cx(f64::NAN, 0.0);
        assert!(truncated_svd_solve(&bad, &b, 1e-8).is_err());
    }

    #[test]
    fn backward_error_and_lemma_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = random_matrix(&mut rng, 40, 20);
        let b = DVector::from_fn(40, |_, _| {
            cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let eps = 1e-8;
        let sol = truncated_svd_solve(&a, &b, eps).unwrap();
        let norm_a = sol.singular_values[0];
        // Backward error of the factorization, via reconstruction from a
        // full-threshold solve of each unit vector (cheap proxy: residual of
        // the normal equations for the computed solution).
        let svd = a.clone().try_svd(true, true, f64::EPSILON, 0).unwrap();
        let recon = svd.recompose().unwrap();
        assert!((&recon - &a).norm() <= 1e-13 * norm_a);
        // Lemma bound ||b - A a|| <= ||b - A v|| + eps ||A|| ||v|| for any v.
        for _ in 0..100 {
            let v = DVector::from_fn(20, |_, _| {
                cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let lhs = (&b - &a * &sol.coefficients).norm();
            let rhs = (&b - &a * &v).norm() + eps * norm_a * v.norm();
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rank_monotone_in_epsilon() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // Mix of scales so the rank actually varies over the grid.
        let mut a = random_matrix(&mut rng, 30, 12);
        for j in 0..12 {
            let scale = 10f64.powi(-(j as i32));
            for i in 0..30 {
                a[(i, j)] *= cx(scale, 0.0);
            }
        }
        let b = DVector::from_fn(30, |_, _| {
            cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let mut prev = usize::MAX;
        for e in [1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2] {
            let sol = truncated_svd_solve(&a, &b, e).unwrap();
            assert!(sol.rank <= prev);
            prev = sol.rank;
        }
    }

    #[test]
    fn row_permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(&mut rng, 25, 10);
        let b = DVector::from_fn(25, |_, _| {
            cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let sol = truncated_svd_solve(&a, &b, 1e-8).unwrap();
        // Reverse the row order of (A, b) together.
        let ap = DMatrix::from_fn(25, 10, |i, j| a[(24 - i, j)]);
        let bp = DVector::from_fn(25, |i, _| b[24 - i]);
        let solp = truncated_svd_solve(&ap, &bp, 1e-8).unwrap();
        let rel = (&sol.coefficients - &solp.coefficients).norm() / sol.coefficients.norm();
        assert!(rel <= 1e-12, "rel = {rel:.3e}");
    }

    #[test]
    fn condition_report_cases() {
        let id = DMatrix::<Complex64>::identity(4, 4);
        let r = condition_report(&id).unwrap();
        assert_eq!(r.sigma_max, 1.0);
        assert_eq!(r.sigma_min, 1.0);
        assert!(r.rank_profile.iter().all(|&(_, rank)| rank == 4));
        // Rank-1 outer product.
        let u = DVector::from_fn(6, |i, _| cx(1.0 + i as f64, -0.5));
        let v = DVector::from_fn(4, |i, _| cx(0.3 * i as f64 + 1.0, 0.2));
        let a = &u * v.transpose();
        let r = condition_report(&a).unwrap();
        assert!(r.singular_values[0] > 0.0);
        assert!(r.singular_values[1] <= 1e-13 * r.singular_values[0]);
    }
}
