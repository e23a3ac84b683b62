//! Dyad-independent network model over several binary covariates.
//!
//! The log-odds of a tie between `i` and `j` is
//!
//! ```text
//! theta_0 + sum_k match_k * [z_ik == z_jk] + sum_k activity_k * (z_ik + z_jk)
//! ```
//!
//! i.e. an edges term plus per-covariate `nodematch` and `nodecov` terms. The
//! sufficient statistics are the edge count, the per-covariate count of
//! same-value edges and the per-covariate count of edge ends on `z = 1`
//! nodes. Because every dyad with the same pair of joint covariate patterns
//! shares a tie probability, expectations and the Jacobian are sums over
//! pattern pairs rather than over all dyads.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::dyads;
use crate::error::{Error, Result};
use crate::graph::{CovariateMatrix, Graph, NodeId};
use crate::netgen::solve_dyad_classes;
use crate::stats::r_from_h;

pub const FIT_TOLERANCE: f64 = 1e-6;
const MAX_ITERATIONS: usize = 100;
const MAX_HALVINGS: usize = 20;

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Coefficients laid out as `[edges, match_1..match_K, activity_1..activity_K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadModel {
    covariates: usize,
    theta: Vec<f64>,
}

impl DyadModel {
    pub fn new(covariates: usize, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != 1 + 2 * covariates {
            return Err(Error::Domain(format!(
                "{} coefficients for {covariates} covariates (expected {})",
                theta.len(),
                1 + 2 * covariates
            )));
        }
        if let Some(bad) = theta.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite coefficient {bad}")));
        }
        Ok(DyadModel { covariates, theta })
    }

    /// Homogeneous Bernoulli model: only the edges term is non-zero.
    pub fn homogeneous(covariates: usize, edges: f64) -> Self {
        let mut theta = vec![0.0; 1 + 2 * covariates];
        theta[0] = edges;
        DyadModel { covariates, theta }
    }

    pub fn covariates(&self) -> usize {
        self.covariates
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn edges_coef(&self) -> f64 {
        self.theta[0]
    }

    pub fn match_coef(&self, k: usize) -> f64 {
        self.theta[1 + k]
    }

    pub fn activity_coef(&self, k: usize) -> f64 {
        self.theta[1 + self.covariates + k]
    }

    pub fn log_odds(&self, a: u16, b: u16) -> f64 {
        change_statistics(self.covariates, a, b)
            .iter()
            .zip(&self.theta)
            .map(|(x, t)| x * t)
            .sum()
    }

    pub fn tie_probability(&self, a: u16, b: u16) -> f64 {
        logistic(self.log_odds(a, b))
    }
}

/// Statistic increments from adding one edge between patterns `a` and `b`.
pub fn change_statistics(covariates: usize, a: u16, b: u16) -> Vec<f64> {
    let mut x = vec![0.0; 1 + 2 * covariates];
    x[0] = 1.0;
    for k in 0..covariates {
        let (za, zb) = ((a >> k) & 1, (b >> k) & 1);
        x[1 + k] = f64::from(u8::from(za == zb));
        x[1 + covariates + k] = f64::from(za + zb);
    }
    x
}

/// Realised statistic vector of a graph (same layout as the model).
pub fn observed_statistics(g: &Graph, z: &CovariateMatrix) -> Vec<f64> {
    let k = z.column_count();
    let mut s = vec![0.0; 1 + 2 * k];
    for &(a, b) in g.edges() {
        let x = change_statistics(k, z.pattern(a), z.pattern(b));
        for (acc, v) in s.iter_mut().zip(x) {
            *acc += v;
        }
    }
    s
}

/// Dyads grouped by the unordered pair of joint covariate patterns.
struct DyadClasses {
    /// `(pattern_a, pattern_b, dyad count)`, `a <= b`.
    classes: Vec<(u16, u16, u64)>,
}

impl DyadClasses {
    fn new(z: &CovariateMatrix) -> Self {
        let mut sizes: BTreeMap<u16, usize> = BTreeMap::new();
        for node in 0..z.rows() {
            *sizes.entry(z.pattern(node)).or_insert(0) += 1;
        }
        let sizes: Vec<(u16, usize)> = sizes.into_iter().collect();
        let mut classes = Vec::new();
        for (i, &(a, na)) in sizes.iter().enumerate() {
            for &(b, nb) in &sizes[i..] {
                let count = if a == b {
                    dyads::within_count(na)
                } else {
                    dyads::between_count(na, nb)
                };
                if count > 0 {
                    classes.push((a, b, count));
                }
            }
        }
        DyadClasses { classes }
    }

    fn expectations(&self, model: &DyadModel) -> (DVector<f64>, DMatrix<f64>) {
        let dim = model.theta.len();
        let mut mean = DVector::zeros(dim);
        let mut info = DMatrix::zeros(dim, dim);
        for &(a, b, count) in &self.classes {
            let x = change_statistics(model.covariates, a, b);
            let q = logistic(x.iter().zip(&model.theta).map(|(x, t)| x * t).sum());
            let weight = count as f64 * q;
            let var = count as f64 * q * (1.0 - q);
            for i in 0..dim {
                mean[i] += weight * x[i];
                for j in 0..dim {
                    info[(i, j)] += var * x[i] * x[j];
                }
            }
        }
        (mean, info)
    }
}

/// Exact expected statistics of the model on these covariates.
pub fn expected_statistics(model: &DyadModel, z: &CovariateMatrix) -> Vec<f64> {
    DyadClasses::new(z).expectations(model).0.iter().copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HomophilyTarget {
    /// Ratio of within-1 to cross edges.
    R(f64),
    /// Newman assortativity, converted to `R` through the `h(R)` relation.
    H(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariateTarget {
    pub p: f64,
    pub diff_activity: f64,
    pub homophily: HomophilyTarget,
}

impl CovariateTarget {
    pub fn homophily_r(&self) -> Result<f64> {
        match self.homophily {
            HomophilyTarget::R(r) => Ok(r),
            HomophilyTarget::H(h) => r_from_h(h, self.p, self.diff_activity),
        }
    }
}

/// Target statistic vector: per covariate, the dyad-class solution for the
/// realised group sizes gives match edges `e11 + e00` and group-1 edge ends
/// `2 e11 + e10`.
pub fn target_statistics(
    targets: &[CovariateTarget],
    mean_degree: f64,
    z: &CovariateMatrix,
) -> Result<Vec<f64>> {
    if targets.len() != z.column_count() {
        return Err(Error::Domain(format!(
            "{} targets for {} covariates",
            targets.len(),
            z.column_count()
        )));
    }
    let n = z.rows();
    let k = targets.len();
    let mut stats = vec![0.0; 1 + 2 * k];
    stats[0] = n as f64 * mean_degree / 2.0;
    for (i, t) in targets.iter().enumerate() {
        let column = z.column(i);
        let n1 = column.count_ones();
        let solution = solve_dyad_classes(n, n1, mean_degree, t.diff_activity, t.homophily_r()?)
            .map_err(|e| match e {
                Error::Infeasible(msg) => Error::Infeasible(format!("{}: {msg}", column.name())),
                other => other,
            })?;
        stats[1 + i] = solution.e11 + solution.e00;
        stats[1 + k + i] = solution.group_one_edge_ends();
    }
    Ok(stats)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadFit {
    pub model: DyadModel,
    pub iterations: usize,
    pub max_relative_residual: f64,
}

fn relative_residuals(target: &DVector<f64>, mean: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        target.len(),
        target
            .iter()
            .zip(mean.iter())
            .map(|(t, m)| (t - m) / t.abs().max(1.0)),
    )
}

/// Newton moment matching from an explicit target statistic vector.
pub fn fit_to_statistics(
    target: &[f64],
    mean_degree: f64,
    z: &CovariateMatrix,
) -> Result<DyadFit> {
    let k = z.column_count();
    if target.len() != 1 + 2 * k {
        return Err(Error::Domain(format!(
            "{} target statistics for {k} covariates",
            target.len()
        )));
    }
    let n = z.rows();
    let density = mean_degree / (n as f64 - 1.0);
    if !(density > 0.0 && density < 1.0) {
        return Err(Error::Infeasible(format!(
            "density {density} leaves no interior log-odds"
        )));
    }
    let classes = DyadClasses::new(z);
    let target = DVector::from_column_slice(target);
    let mut model = DyadModel::homogeneous(k, (density / (1.0 - density)).ln());

    let (mut mean, mut info) = classes.expectations(&model);
    let mut residual = relative_residuals(&target, &mean);
    let mut converged_at = None;
    for iteration in 1..=MAX_ITERATIONS {
        let direction = info
            .clone()
            .lu()
            .solve(&(&target - &mean))
            .ok_or_else(|| Error::Infeasible("singular information matrix".into()))?;
        let norm = residual.norm();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let theta: Vec<f64> = model
                .theta
                .iter()
                .zip(direction.iter())
                .map(|(t, d)| t + step * d)
                .collect();
            if theta.iter().all(|v| v.is_finite()) {
                let candidate = DyadModel { covariates: k, theta };
                let (m, i) = classes.expectations(&candidate);
                let r = relative_residuals(&target, &m);
                if r.norm() < norm {
                    accepted = Some((candidate, m, i, r));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((candidate, m, i, r)) = accepted else {
            break;
        };
        model = candidate;
        mean = m;
        info = i;
        residual = r;
        let max = residual.amax();
        if converged_at.is_none() && max <= FIT_TOLERANCE {
            converged_at = Some(iteration);
        }
        // a few extra quadratic steps make the fit a numerical fixed point
        if max <= 1e-14 || converged_at.is_some_and(|at| iteration >= at + 4) {
            break;
        }
    }
    let max_relative_residual = residual.amax();
    if max_relative_residual > FIT_TOLERANCE {
        return Err(Error::NotConverged {
            iterations: MAX_ITERATIONS,
            max_residual: max_relative_residual,
            residuals: residual.iter().copied().collect(),
        });
    }
    Ok(DyadFit {
        model,
        iterations: converged_at.unwrap_or(0),
        max_relative_residual,
    })
}

/// Fits the model so that expected statistics match the per-covariate
/// prevalence, differential activity and homophily targets at the given
/// mean degree.
pub fn fit_theta(
    targets: &[CovariateTarget],
    mean_degree: f64,
    z: &CovariateMatrix,
) -> Result<DyadFit> {
    let stats = target_statistics(targets, mean_degree, z)?;
    fit_to_statistics(&stats, mean_degree, z)
}

/// Independent Bernoulli draw per dyad from the model's tie probabilities.
pub fn generate_from_model<R: Rng + ?Sized>(
    model: &DyadModel,
    z: &CovariateMatrix,
    rng: &mut R,
) -> Graph {
    let mut groups: BTreeMap<u16, Vec<NodeId>> = BTreeMap::new();
    for node in 0..z.rows() {
        groups.entry(z.pattern(node)).or_default().push(node);
    }
    let groups: Vec<(u16, Vec<NodeId>)> = groups.into_iter().collect();
    let mut edges = Vec::new();
    for (i, (a, left)) in groups.iter().enumerate() {
        for (b, right) in &groups[i..] {
            let q = model.tie_probability(*a, *b);
            if a == b {
                dyads::bernoulli_within(left, q, rng, &mut edges);
            } else {
                dyads::bernoulli_between(left, right, q, rng, &mut edges);
            }
        }
    }
    Graph::from_normalized_unchecked(z.rows(), edges)
}
