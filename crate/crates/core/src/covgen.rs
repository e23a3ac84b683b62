//! Correlated binary covariates with prescribed marginals and pairwise
//! Pearson correlations.
//!
//! Each covariate is a thresholded standard normal: `z_k = 1` iff
//! `X_k < quantile(p_k)`. Pairwise latent correlations are solved so that the
//! thresholded pair has the requested binary correlation, assembled into a
//! latent correlation matrix (repaired to the nearest positive definite
//! correlation matrix if needed), and sampled through its Cholesky factor.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::graph::{AttributeVector, CovariateMatrix};
use crate::normal;

const EIGEN_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CovariateSpec {
    pub names: Vec<String>,
    pub marginals: Vec<f64>,
    /// Symmetric, unit diagonal, `marginals.len()` square.
    pub correlations: Vec<Vec<f64>>,
}

impl CovariateSpec {
    pub fn independent(names: Vec<String>, marginals: Vec<f64>) -> Self {
        let k = marginals.len();
        let correlations = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        CovariateSpec {
            names,
            marginals,
            correlations,
        }
    }

    pub fn len(&self) -> usize {
        self.marginals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marginals.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.marginals.len();
        if k == 0 {
            return Err(Error::Domain("covariate spec has no covariates".into()));
        }
        if self.names.len() != k {
            return Err(Error::Domain(format!(
                "{} names for {k} covariates",
                self.names.len()
            )));
        }
        for (name, &p) in self.names.iter().zip(&self.marginals) {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::Domain(format!("{name}: marginal {p} not in (0, 1)")));
            }
        }
        if self.correlations.len() != k || self.correlations.iter().any(|r| r.len() != k) {
            return Err(Error::Domain(format!("correlation matrix must be {k}x{k}")));
        }
        for i in 0..k {
            if self.correlations[i][i] != 1.0 {
                return Err(Error::Domain(format!(
                    "correlation diagonal entry {i} is {}, expected 1",
                    self.correlations[i][i]
                )));
            }
            for j in i + 1..k {
                let (a, b) = (self.correlations[i][j], self.correlations[j][i]);
                if (a - b).abs() > 1e-12 {
                    return Err(Error::Domain(format!(
                        "correlation matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let (lo, hi) = binary_correlation_bounds(self.marginals[i], self.marginals[j]);
                if a < lo || a > hi {
                    return Err(Error::Domain(format!(
                        "correlation {a} between {} and {} outside feasible [{lo:.6}, {hi:.6}]",
                        self.names[i], self.names[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn binary_sd_product(p1: f64, p2: f64) -> f64 {
    (p1 * (1.0 - p1) * p2 * (1.0 - p2)).sqrt()
}

/// Range of Pearson correlations attainable by two binaries with these
/// marginals (the Frechet bounds on the joint `P(1, 1)`).
pub fn binary_correlation_bounds(p1: f64, p2: f64) -> (f64, f64) {
    let sd = binary_sd_product(p1, p2);
    let lo = ((p1 + p2 - 1.0).max(0.0) - p1 * p2) / sd;
    let hi = (p1.min(p2) - p1 * p2) / sd;
    (lo, hi)
}

/// Pearson correlation of the two binaries obtained by thresholding a
/// standard bivariate normal with latent correlation `rho`.
pub fn binary_correlation(p1: f64, p2: f64, rho: f64) -> f64 {
    let joint = normal::bivariate_cdf(normal::quantile(p1), normal::quantile(p2), rho);
    (joint - p1 * p2) / binary_sd_product(p1, p2)
}

/// Latent normal correlation whose thresholded binaries have Pearson
/// correlation `target`.
pub fn solve_latent_correlation(p1: f64, p2: f64, target: f64) -> Result<f64> {
    for p in [p1, p2] {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("marginal {p} not in (0, 1)")));
        }
    }
    let (lo_r, hi_r) = binary_correlation_bounds(p1, p2);
    if !(target >= lo_r - 1e-12 && target <= hi_r + 1e-12) {
        return Err(Error::Domain(format!(
            "binary correlation {target} infeasible for marginals ({p1}, {p2}); feasible interval [{lo_r:.6}, {hi_r:.6}]"
        )));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    // binary correlation is increasing in rho
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if binary_correlation(p1, p2, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Latent correlation matrix for a spec: pairwise solves, then eigenvalue
/// clipping if the assembled matrix is not positive definite.
pub fn latent_correlation_matrix(spec: &CovariateSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let k = spec.len();
    let mut latent = DMatrix::<f64>::identity(k, k);
    for i in 0..k {
        for j in i + 1..k {
            let rho =
                solve_latent_correlation(spec.marginals[i], spec.marginals[j], spec.correlations[i][j])?;
            latent[(i, j)] = rho;
            latent[(j, i)] = rho;
        }
    }
    let eigen = SymmetricEigen::new(latent.clone());
    if eigen.eigenvalues.min() > EIGEN_FLOOR {
        return Ok(latent);
    }
    log::warn!(
        "latent correlation matrix not positive definite (min eigenvalue {:.3e}); projecting",
        eigen.eigenvalues.min()
    );
    nearest_correlation(&latent)
}

fn nearest_correlation(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eigen = SymmetricEigen::new(m.clone());
    let clipped = eigen.eigenvalues.map(|v| v.max(EIGEN_FLOOR));
    let rebuilt = &eigen.eigenvectors
        * DMatrix::from_diagonal(&clipped)
        * eigen.eigenvectors.transpose();
    let scale = rebuilt.diagonal().map(|d| 1.0 / d.sqrt());
    let k = m.nrows();
    let mut out = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            out[(i, j)] = rebuilt[(i, j)] * scale[i] * scale[j];
        }
        out[(i, i)] = 1.0;
    }
    if out.iter().any(|v| !v.is_finite()) || out.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite(format!("{m}")));
    }
    Ok(out)
}

/// Draws `n` rows of correlated binary covariates.
pub fn generate_binary_covariates<R: Rng + ?Sized>(
    spec: &CovariateSpec,
    n: usize,
    rng: &mut R,
) -> Result<CovariateMatrix> {
    let latent = latent_correlation_matrix(spec)?;
    let chol = latent
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorisation failed".into()))?;
    let lower = chol.l();
    let k = spec.len();
    let thresholds: Vec<f64> = spec.marginals.iter().map(|&p| normal::quantile(p)).collect();
    let mut columns = vec![Vec::with_capacity(n); k];
    let mut normals = vec![0.0f64; k];
    for _ in 0..n {
        for v in normals.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for (row, column) in columns.iter_mut().enumerate() {
            let x: f64 = (0..=row).map(|c| lower[(row, c)] * normals[c]).sum();
            column.push(u8::from(x < thresholds[row]));
        }
    }
    let columns = spec
        .names
        .iter()
        .zip(columns)
        .map(|(name, values)| AttributeVector::new(name.clone(), values))
        .collect::<Result<Vec<_>>>()?;
    CovariateMatrix::new(columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pearson(a: &[u8], b: &[u8]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().map(|&v| v as f64).sum::<f64>() / n;
        let mb = b.iter().map(|&v| v as f64).sum::<f64>() / n;
        let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
        for (&x, &y) in a.iter().zip(b) {
            let (dx, dy) = (x as f64 - ma, y as f64 - mb);
            cov += dx * dy;
            va += dx * dx;
            vb += dy * dy;
        }
        cov / (va * vb).sqrt()
    }

    fn table4_spec() -> CovariateSpec {
        CovariateSpec {
            names: vec!["CAS".into(), "CIR".into(), "HIV+".into()],
            marginals: vec![0.645, 0.431, 0.169],
            correlations: vec![
                vec![1.0, 0.104, 0.023],
                vec![0.104, 1.0, 0.046],
                vec![0.023, 0.046, 1.0],
            ],
        }
    }

    #[test]
    fn independence_maps_to_zero() {
        assert_eq!(solve_latent_correlation(0.5, 0.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn balanced_margins_follow_sine_identity() {
        for i in -9..=9 {
            let r = i as f64 / 10.0;
            let rho = solve_latent_correlation(0.5, 0.5, r).unwrap();
            assert_abs_diff_eq!(rho, (std::f64::consts::PI * r / 2.0).sin(), epsilon = 1e-3);
        }
    }

    #[test]
    fn engage_pair_round_trips() {
        let rho = solve_latent_correlation(0.645, 0.431, 0.104).unwrap();
        assert_abs_diff_eq!(binary_correlation(0.645, 0.431, rho), 0.104, epsilon = 1e-4);
        assert!(rho > 0.104);
    }

    #[test]
    fn infeasible_correlation_names_interval() {
        let err = solve_latent_correlation(0.1, 0.9, 0.5).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("feasible interval"), "{msg}");
    }

    #[test]
    fn round_trip_over_feasible_grid() {
        let margins = [0.1, 0.5, 0.9];
        for &p1 in &margins {
            for &p2 in &margins {
                let (lo, hi) = binary_correlation_bounds(p1, p2);
                for step in 1..10 {
                    let r = lo + (hi - lo) * step as f64 / 10.0;
                    let rho = solve_latent_correlation(p1, p2, r).unwrap();
                    assert_abs_diff_eq!(binary_correlation(p1, p2, rho), r, epsilon = 1e-4);
                }
            }
        }
    }

    #[test]
    fn single_covariate_prevalence() {
        let spec = CovariateSpec::independent(vec!["z".into()], vec![0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = generate_binary_covariates(&spec, 100_000, &mut rng).unwrap();
        let p = m.column(0).count_ones() as f64 / 100_000.0;
        assert_abs_diff_eq!(p, 0.5, epsilon = 0.01);
    }

    #[test]
    fn independent_pair_is_uncorrelated() {
        let spec = CovariateSpec::independent(vec!["a".into(), "b".into()], vec![0.3, 0.6]);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = generate_binary_covariates(&spec, 100_000, &mut rng).unwrap();
        assert_abs_diff_eq!(
            pearson(m.column(0).values(), m.column(1).values()),
            0.0,
            epsilon = 0.02
        );
    }

    #[test]
    fn engage_correlations_recovered() {
        let spec = table4_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = generate_binary_covariates(&spec, 100_000, &mut rng).unwrap();
        assert_eq!(m.column_count(), 3);
        assert_eq!(m.column(2).name(), "HIV+");
        for i in 0..3 {
            let p = m.column(i).count_ones() as f64 / 100_000.0;
            assert_abs_diff_eq!(p, spec.marginals[i], epsilon = 0.01);
            for j in i + 1..3 {
                let r = pearson(m.column(i).values(), m.column(j).values());
                assert_abs_diff_eq!(r, spec.correlations[i][j], epsilon = 0.02);
            }
        }
    }

    #[test]
    fn non_pd_latent_matrix_is_repaired() {
        // pairwise feasible, jointly impossible for Gaussians
        let spec = CovariateSpec {
            names: vec!["a".into(), "b".into(), "c".into()],
            marginals: vec![0.5, 0.5, 0.5],
            correlations: vec![
                vec![1.0, 0.9, -0.9],
                vec![0.9, 1.0, 0.9],
                vec![-0.9, 0.9, 1.0],
            ],
        };
        let latent = latent_correlation_matrix(&spec).unwrap();
        assert!(latent.clone().cholesky().is_some());
        for i in 0..3 {
            assert_abs_diff_eq!(latent[(i, i)], 1.0, epsilon = 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let m = generate_binary_covariates(&spec, 1_000, &mut rng).unwrap();
        assert!(m.columns().iter().all(|c| c.values().iter().all(|&v| v <= 1)));
    }

    #[test]
    fn spec_validation() {
        let mut spec = table4_spec();
        spec.correlations[0][1] = 0.2;
        assert!(spec.validate().is_err());
        let mut spec = table4_spec();
        spec.marginals[0] = 1.0;
        assert!(spec.validate().is_err());
        let spec = CovariateSpec {
            names: vec!["a".into(), "b".into()],
            marginals: vec![0.1, 0.1],
            correlations: vec![vec![1.0, -0.5], vec![-0.5, 1.0]],
        };
        assert!(spec.validate().is_err());
    }
}
