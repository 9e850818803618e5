//! Linear-Gaussian estimation, the D-optimality criterion, and sensor selection.
//!
//! Observations follow `z = H x + eps` with `eps ~ N(0, Sigma)`. Everything
//! downstream works with the whitened matrix `H̄ = L⁻¹ H` where
//! `Sigma = L Lᵀ`, so that the Fisher information is `H̄ᵀ H̄`.
//!
//! If sensor `i` survives with probability `p_i`, the expected D-optimality
//! criterion is `det(sum_i p_i h̄_i h̄_iᵀ)` ([`expected_doptimality`]).
//! [`select_sensors`] maximizes its logarithm over the box-capped simplex
//! `{0 <= p <= 1, sum p = k}` and rounds the result to a `k`-subset.

use serde::Serialize;

use crate::ensemble::{check_probabilities, expected_det_closed_form, RankOneEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, forward_substitute, log_det_spd, matmul, solve_spd, spd_inverse, Matrix, Vector,
};

/// Measurement noise covariance.
#[derive(Debug, Clone, PartialEq)]
pub enum Noise {
    /// Independent noise with the given variances.
    Diagonal(Vec<f64>),
    /// Full symmetric positive definite covariance.
    Full(Matrix),
}

/// Noise whitening operator.
#[derive(Debug, Clone, PartialEq)]
enum Whitener {
    InvStd(Vec<f64>),
    /// Lower Cholesky factor of the covariance.
    Cholesky(Matrix),
}

impl Whitener {
    fn apply(&self, b: &Matrix) -> Result<Matrix> {
        match self {
            Whitener::InvStd(s) => b.scale_rows(s),
            Whitener::Cholesky(l) => forward_substitute(l, b),
        }
    }
}

/// `z = H x + eps`, `eps ~ N(0, Sigma)`, sensor `i` surviving with
/// probability `survival[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSensorModel {
    h: Matrix,
    noise: Noise,
    survival: Vec<f64>,
    whitener: Whitener,
    whitened: Matrix,
}

impl LinearSensorModel {
    pub fn new(h: Matrix, noise: Noise, survival: Vec<f64>) -> Result<Self> {
        let m = h.rows();
        if m < h.cols() {
            return Err(Error::dim(format!(
                "{m} sensors cannot identify {} parameters",
                h.cols()
            )));
        }
        let whitener = match &noise {
            Noise::Diagonal(var) => {
                if var.len() != m {
                    return Err(Error::dim(format!(
                        "{} variances for {m} sensors",
                        var.len()
                    )));
                }
                if let Some(i) = var.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
                    return Err(Error::domain(format!(
                        "noise variance {i} is {}, must be positive",
                        var[i]
                    )));
                }
                Whitener::InvStd(var.iter().map(|v| 1.0 / v.sqrt()).collect())
            }
            Noise::Full(sigma) => {
                if sigma.rows() != m || sigma.cols() != m {
                    return Err(Error::dim(format!(
                        "noise covariance is {}x{}, expected {m}x{m}",
                        sigma.rows(),
                        sigma.cols()
                    )));
                }
                if sigma.asymmetry() > crate::linalg::SYMMETRY_TOL * sigma.max_abs() {
                    return Err(Error::domain("noise covariance is not symmetric"));
                }
                Whitener::Cholesky(cholesky(sigma)?)
            }
        };
        if survival.len() != m {
            return Err(Error::dim(format!(
                "{} survival probabilities for {m} sensors",
                survival.len()
            )));
        }
        check_probabilities(&survival)?;
        let whitened = whitener.apply(&h)?;
        Ok(LinearSensorModel {
            h,
            noise,
            survival,
            whitener,
            whitened,
        })
    }

    /// Model with unit-variance independent noise and certain survival.
    pub fn isotropic(h: Matrix) -> Result<Self> {
        let m = h.rows();
        LinearSensorModel::new(h, Noise::Diagonal(vec![1.0; m]), vec![1.0; m])
    }

    pub fn sensors(&self) -> usize {
        self.h.rows()
    }

    pub fn dim(&self) -> usize {
        self.h.cols()
    }

    pub fn observation(&self) -> &Matrix {
        &self.h
    }

    pub fn noise(&self) -> &Noise {
        &self.noise
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    /// `H̄ = Sigma^{-1/2} H` (Cholesky variant), `m x n`.
    pub fn whitened(&self) -> &Matrix {
        &self.whitened
    }

    /// `sum_i weights_i h̄_i h̄_iᵀ`.
    pub fn weighted_information(&self, weights: &[f64]) -> Result<Matrix> {
        let scaled = self.whitened.scale_rows(weights)?;
        matmul(&self.whitened.transpose(), &scaled)
    }
}

/// Fisher information `H̄ᵀ H̄`.
pub fn fisher_information(model: &LinearSensorModel) -> Matrix {
    let hb = model.whitened();
    matmul(&hb.transpose(), hb).expect("conformant")
}

/// Generalized least-squares estimate `(H̄ᵀH̄)⁻¹ H̄ᵀ z̄` with `z̄` the whitened
/// observations.
pub fn mle_estimate(model: &LinearSensorModel, z: &[f64]) -> Result<Vector> {
    if z.len() != model.sensors() {
        return Err(Error::dim(format!(
            "{} observations for {} sensors",
            z.len(),
            model.sensors()
        )));
    }
    let z_bar = model
        .whitener
        .apply(&Matrix::new(z.len(), 1, z.to_vec())?)?;
    let rhs = model.whitened.transpose().mul_vec(z_bar.as_slice())?;
    solve_spd(&fisher_information(model), &rhs)
}

/// Estimator covariance at the Cramér-Rao bound, `(H̄ᵀH̄)⁻¹`.
pub fn crlb_covariance(model: &LinearSensorModel) -> Result<Matrix> {
    spd_inverse(&fisher_information(model))
}

/// Expected D-optimality criterion `det(sum_i p_i h̄_i h̄_iᵀ)` under independent
/// sensor survival with probabilities `p`.
pub fn expected_doptimality(model: &LinearSensorModel, p: &[f64]) -> Result<f64> {
    let hb_t = model.whitened.transpose();
    let e = RankOneEnsemble::new(hb_t.clone(), hb_t, p.to_vec())?;
    Ok(expected_det_closed_form(&e))
}

/// `log det(sum_i p_i h̄_i h̄_iᵀ)`, `-inf` when the information is singular.
pub fn log_det_objective(model: &LinearSensorModel, p: &[f64]) -> Result<f64> {
    Ok(log_det_spd(&model.weighted_information(p)?))
}

/// Gradient of [`log_det_objective`]: `g_i = h̄_iᵀ M(p)⁻¹ h̄_i`.
pub fn log_det_gradient(model: &LinearSensorModel, p: &[f64]) -> Result<Vec<f64>> {
    let inv = spd_inverse(&model.weighted_information(p)?)?;
    let hb = &model.whitened;
    Ok((0..hb.rows())
        .map(|i| {
            let row = hb.row(i);
            let mv = inv.mul_vec(row).expect("n");
            row.iter().zip(&mv).map(|(a, b)| a * b).sum()
        })
        .collect())
}

/// Euclidean projection of `y` onto `{0 <= p <= 1, sum p = k}`.
///
/// Finds the shift `tau` with `sum clamp(y - tau, 0, 1) = k` by bisection.
pub fn project_capped_simplex(y: &[f64], k: f64) -> Vec<f64> {
    let m = y.len();
    assert!(k >= 0.0 && k <= m as f64, "k = {k} outside [0, {m}]");
    if k == m as f64 {
        return vec![1.0; m];
    }
    if k == 0.0 {
        return vec![0.0; m];
    }
    let mass = |tau: f64| -> f64 { y.iter().map(|&v| (v - tau).clamp(0.0, 1.0)).sum() };
    let mut lo = y.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // mass is non-increasing in tau: mass(lo) = m >= k >= 0 = mass(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p_lo: Vec<f64> = y.iter().map(|&v| (v - lo).clamp(0.0, 1.0)).collect();
    let p_hi: Vec<f64> = y.iter().map(|&v| (v - hi).clamp(0.0, 1.0)).collect();
    let (s_lo, s_hi) = (p_lo.iter().sum::<f64>(), p_hi.iter().sum::<f64>());
    // interpolate between the bracketing solutions; mass is piecewise linear in tau
    if s_lo - s_hi <= 0.0 {
        return p_hi;
    }
    let t = ((k - s_hi) / (s_lo - s_hi)).clamp(0.0, 1.0);
    p_lo.iter()
        .zip(&p_hi)
        .map(|(a, b)| (b + t * (a - b)).clamp(0.0, 1.0))
        .collect()
}

/// Solver settings for [`select_sensors`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectOptions {
    pub max_iters: usize,
    /// Initial trial step of each backtracking line search.
    pub step: f64,
    /// Tolerance on the projected-gradient norm `|P(p + g) - p|`.
    pub tol: f64,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            max_iters: 2000,
            step: 1.0,
            tol: 1e-9,
        }
    }
}

/// Output of [`select_sensors`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    /// Relaxed selection probabilities, summing to `k`.
    pub probs: Vec<f64>,
    /// The `k` sensors with the largest probabilities, ascending.
    pub selected: Vec<usize>,
    /// `(iteration, log det)` after every accepted step, starting at iteration 0.
    pub objective_trace: Vec<(usize, f64)>,
    pub converged: bool,
}

impl SelectionResult {
    pub fn objective(&self) -> f64 {
        self.objective_trace
            .last()
            .map_or(f64::NEG_INFINITY, |t| t.1)
    }
}

const MAX_HALVINGS: usize = 60;

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn ascent_point(p: &[f64], g: &[f64], step: f64, k: f64) -> Vec<f64> {
    let y: Vec<f64> = p.iter().zip(g).map(|(a, b)| a + step * b).collect();
    project_capped_simplex(&y, k)
}

/// Relaxed D-optimal selection of `k` sensors by projected gradient ascent on
/// `log det(sum_i p_i h̄_i h̄_iᵀ)`, followed by top-`k` rounding.
pub fn select_sensors(
    model: &LinearSensorModel,
    k: usize,
    opts: SelectOptions,
) -> Result<SelectionResult> {
    let (m, n) = (model.sensors(), model.dim());
    if k < n || k > m {
        return Err(Error::domain(format!(
            "cannot select k = {k} sensors: need {n} <= k <= {m}"
        )));
    }
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(Error::domain(format!(
            "step must be positive, got {}",
            opts.step
        )));
    }
    let kf = k as f64;
    let mut p = vec![kf / m as f64; m];
    let mut f = log_det_objective(model, &p)?;
    if f == f64::NEG_INFINITY {
        return Err(Error::Singular { pivot: 0 });
    }
    let mut trace = vec![(0, f)];
    let mut converged = false;
    for iter in 1..=opts.max_iters {
        let g = log_det_gradient(model, &p)?;
        if distance(&ascent_point(&p, &g, 1.0, kf), &p) <= opts.tol {
            converged = true;
            break;
        }
        let mut step = opts.step;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = ascent_point(&p, &g, step, kf);
            let fc = log_det_objective(model, &cand)?;
            if fc > f {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((cand, fc)) => {
                p = cand;
                f = fc;
                trace.push((iter, f));
            }
            None => {
                // no ascent at any step: stationary up to round-off
                converged = true;
                break;
            }
        }
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    let mut selected = order[..k].to_vec();
    selected.sort_unstable();
    Ok(SelectionResult {
        probs: p,
        selected,
        objective_trace: trace,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn random_model(seed: u64, m: usize, n: usize) -> LinearSensorModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Matrix::new(
            m,
            n,
            (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let var = (0..m).map(|_| rng.random_range(0.2..2.0)).collect();
        LinearSensorModel::new(h, Noise::Diagonal(var), vec![1.0; m]).unwrap()
    }

    fn assert_identity(m: &Matrix, tol: f64) {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((m[(i, j)] - e).abs() <= tol, "({i},{j}) = {}", m[(i, j)]);
            }
        }
    }

    #[test]
    fn model_validation() {
        let h = mat(&[&[1.0, 0.0]]);
        assert!(LinearSensorModel::isotropic(h).is_err());
        let h = Matrix::identity(2);
        assert!(
            LinearSensorModel::new(h.clone(), Noise::Diagonal(vec![1.0, 0.0]), vec![1.0; 2])
                .is_err()
        );
        assert!(
            LinearSensorModel::new(h.clone(), Noise::Diagonal(vec![1.0]), vec![1.0; 2]).is_err()
        );
        assert!(
            LinearSensorModel::new(h.clone(), Noise::Diagonal(vec![1.0; 2]), vec![1.0, 2.0])
                .is_err()
        );
        let not_pd = mat(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            LinearSensorModel::new(h, Noise::Full(not_pd), vec![1.0; 2]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn fisher_examples() {
        let model = LinearSensorModel::isotropic(Matrix::identity(2)).unwrap();
        assert_eq!(fisher_information(&model), Matrix::identity(2));
        let model = LinearSensorModel::new(
            Matrix::identity(2),
            Noise::Diagonal(vec![4.0, 4.0]),
            vec![1.0; 2],
        )
        .unwrap();
        assert_eq!(
            fisher_information(&model),
            Matrix::diagonal(&[0.25, 0.25]).unwrap()
        );

        let model = random_model(5, 5, 2);
        let hb = model.whitened();
        let mut acc = Matrix::zeros(2, 2);
        for i in 0..5 {
            let r = hb.row(i);
            for a in 0..2 {
                for b in 0..2 {
                    acc[(a, b)] += r[a] * r[b];
                }
            }
        }
        let f = fisher_information(&model);
        for a in 0..2 {
            for b in 0..2 {
                assert!((f[(a, b)] - acc[(a, b)]).abs() <= 1e-12);
            }
        }
        assert!(f.asymmetry() <= 1e-10);
    }

    #[test]
    fn full_covariance_matches_diagonal() {
        let h = mat(&[&[1.0, 0.5], &[0.0, 2.0], &[-1.0, 1.0]]);
        let var = vec![0.5, 2.0, 3.0];
        let diag =
            LinearSensorModel::new(h.clone(), Noise::Diagonal(var.clone()), vec![1.0; 3]).unwrap();
        let full = LinearSensorModel::new(
            h,
            Noise::Full(Matrix::diagonal(&var).unwrap()),
            vec![1.0; 3],
        )
        .unwrap();
        let (a, b) = (fisher_information(&diag), fisher_information(&full));
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(a[(i, j)], b[(i, j)], max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn mle_examples() {
        let model = LinearSensorModel::isotropic(Matrix::identity(2)).unwrap();
        assert_eq!(&*mle_estimate(&model, &[3.0, -1.0]).unwrap(), &[3.0, -1.0]);
        let model = LinearSensorModel::isotropic(mat(&[&[1.0], &[1.0]])).unwrap();
        assert_relative_eq!(
            mle_estimate(&model, &[1.0, 3.0]).unwrap()[0],
            2.0,
            max_relative = 1e-15
        );

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = Matrix::new(6, 3, (0..18).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let x_true = [0.7, -1.3, 2.1];
        let z = h.mul_vec(&x_true).unwrap();
        let model = LinearSensorModel::isotropic(h).unwrap();
        let x = mle_estimate(&model, &z).unwrap();
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() <= 1e-9);
        }

        let degenerate = LinearSensorModel::isotropic(mat(&[&[1.0, 1.0], &[2.0, 2.0]])).unwrap();
        assert!(matches!(
            mle_estimate(&degenerate, &[1.0, 2.0]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn gls_with_correlated_noise_is_unbiased_on_noiseless_data() {
        let h = mat(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let sigma = mat(&[&[2.0, 0.5, 0.0], &[0.5, 1.0, 0.3], &[0.0, 0.3, 1.5]]);
        let model = LinearSensorModel::new(h.clone(), Noise::Full(sigma), vec![1.0; 3]).unwrap();
        let z = h.mul_vec(&[4.0, -2.0]).unwrap();
        let x = mle_estimate(&model, &z).unwrap();
        assert_relative_eq!(x[0], 4.0, max_relative = 1e-12);
        assert_relative_eq!(x[1], -2.0, max_relative = 1e-12);
    }

    #[test]
    fn crlb_examples() {
        let model = LinearSensorModel::isotropic(Matrix::identity(2)).unwrap();
        assert_eq!(crlb_covariance(&model).unwrap(), Matrix::identity(2));
        let model = LinearSensorModel::new(
            Matrix::identity(2),
            Noise::Diagonal(vec![4.0, 9.0]),
            vec![1.0; 2],
        )
        .unwrap();
        let c = crlb_covariance(&model).unwrap();
        assert_relative_eq!(c[(0, 0)], 4.0, max_relative = 1e-14);
        assert_relative_eq!(c[(1, 1)], 9.0, max_relative = 1e-14);
        assert_eq!(c[(0, 1)], 0.0);

        let model = random_model(8, 7, 3);
        let prod = matmul(
            &crlb_covariance(&model).unwrap(),
            &fisher_information(&model),
        )
        .unwrap();
        assert_identity(&prod, 1e-8);
    }

    #[test]
    fn expected_doptimality_examples() {
        let model = LinearSensorModel::isotropic(Matrix::identity(2)).unwrap();
        assert_relative_eq!(
            expected_doptimality(&model, &[0.5, 0.5]).unwrap(),
            0.25,
            max_relative = 1e-15
        );
        let model = random_model(2, 4, 2);
        let det_f = crate::linalg::det(&fisher_information(&model)).unwrap();
        assert_relative_eq!(
            expected_doptimality(&model, &[1.0; 4]).unwrap(),
            det_f,
            max_relative = 1e-12
        );
        assert!(expected_doptimality(&model, &[0.5; 3]).is_err());
    }

    #[test]
    fn projection_is_feasible_and_fixed_on_feasible_points() {
        let p = project_capped_simplex(&[0.3, 0.9, -0.4, 2.0], 2.0);
        assert!((p.iter().sum::<f64>() - 2.0).abs() <= 1e-12);
        assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let feasible = [0.5, 0.25, 0.75, 0.5];
        let q = project_capped_simplex(&feasible, 2.0);
        for (a, b) in q.iter().zip(&feasible) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert_eq!(
            project_capped_simplex(&[3.0, -1.0, 0.2], 3.0),
            vec![1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn projection_beats_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let y: Vec<f64> = (0..6).map(|_| rng.random_range(-1.5..2.0)).collect();
            let p = project_capped_simplex(&y, 2.0);
            let d = distance(&p, &y);
            for _ in 0..50 {
                let raw: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..3.0)).collect();
                let q = project_capped_simplex(&raw, 2.0);
                assert!(distance(&q, &y) >= d - 1e-10);
            }
        }
    }

    #[test]
    fn select_all_sensors() {
        let model = random_model(3, 5, 2);
        let res = select_sensors(&model, 5, SelectOptions::default()).unwrap();
        assert!(res.probs.iter().all(|&p| p == 1.0));
        assert_eq!(res.selected, vec![0, 1, 2, 3, 4]);
        let log_det_f = log_det_spd(&fisher_information(&model));
        assert_relative_eq!(res.objective(), log_det_f, max_relative = 1e-12);
    }

    #[test]
    fn select_duplicated_axes() {
        let h = mat(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]]);
        let model = LinearSensorModel::isotropic(h).unwrap();
        let res = select_sensors(&model, 2, SelectOptions::default()).unwrap();
        let det = expected_doptimality(&model, &res.probs).unwrap();
        assert!(det >= 1.0 - 1e-6, "{det}");
        // grid oracle: det = (p1 + p2)(p3 + p4) on the feasible set, max 1
        let mut best: f64 = 0.0;
        for i in 0..=20 {
            let s = i as f64 / 10.0;
            if s <= 2.0 {
                best = best.max(s * (2.0 - s));
            }
        }
        assert_eq!(best, 1.0);
    }

    #[test]
    fn select_rejects_infeasible_and_singular() {
        let model = random_model(1, 4, 2);
        assert!(matches!(
            select_sensors(&model, 1, SelectOptions::default()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            select_sensors(&model, 5, SelectOptions::default()),
            Err(Error::Domain(_))
        ));
        let rank_one =
            LinearSensorModel::isotropic(mat(&[&[1.0, 2.0], &[2.0, 4.0], &[-1.0, -2.0]])).unwrap();
        assert!(matches!(
            select_sensors(&rank_one, 2, SelectOptions::default()),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn rounding_breaks_ties_by_lower_index() {
        // four identical sensors: the relaxation stays uniform
        let h = mat(&[&[1.0], &[1.0], &[1.0], &[1.0]]);
        let model = LinearSensorModel::isotropic(h).unwrap();
        let res = select_sensors(&model, 2, SelectOptions::default()).unwrap();
        assert_eq!(res.selected, vec![0, 1]);
    }
}
