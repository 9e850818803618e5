//! Expected determinant of a random sum of rank-one matrices.
//!
//! Given column families `u_1..u_m`, `v_1..v_m` in `R^n` and independent
//! indicators `pi_i ~ Bernoulli(p_i)`, the quantity of interest is
//!
//! ```text
//! e(U, V, p) = E[ det( sum_i pi_i u_i v_iᵀ ) ] = E[ det(U Π Vᵀ) ]
//! ```
//!
//! and it equals `det(U diag(p) Vᵀ)`. [`expected_det_closed_form`] evaluates
//! that single determinant. The other entry points compute the same number
//! the slow way, for cross-checking:
//!
//! * [`expected_det_bruteforce`] sums over all `2^m` indicator outcomes,
//! * [`expected_det_cauchy_binet`] sums `det(sum_{k in Q} p_k u_k v_kᵀ)` over
//!   all `n`-subsets `Q`,
//! * [`expected_det_monte_carlo`] samples indicator vectors.
//!
//! For blocks of rank `r_i` ([`BlockEnsemble`]) no closed form is offered;
//! [`block_lower_bound`] gives `det(sum_i p_i U_i V_iᵀ)`, which lower-bounds
//! the expectation when `V_i = U_i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{det, matmul, KahanSum, Matrix};
use crate::subsets::{binomial, ColexSubsets};

/// Default cap on the exponent of `2^m` enumerations.
pub const DEFAULT_MAX_TERMS: usize = 20;

/// Cap on the number of `n`-subsets visited by [`expected_det_cauchy_binet`].
pub const MAX_SUBSETS: u128 = 1_000_000;

pub(crate) fn check_probabilities(p: &[f64]) -> Result<()> {
    for (i, &pi) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::domain(format!(
                "probability {i} is {pi}, outside [0, 1]"
            )));
        }
    }
    Ok(())
}

/// Determinant of a matrix known to be square.
fn det_sq(m: &Matrix) -> f64 {
    det(m).expect("square by construction")
}

/// Paired columns `u_i`, `v_i` with success probabilities `p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneEnsemble {
    u: Matrix,
    v: Matrix,
    p: Vec<f64>,
}

impl RankOneEnsemble {
    /// `u` and `v` are `n x m` with columns `u_i`, `v_i`; `p` has length `m`.
    pub fn new(u: Matrix, v: Matrix, p: Vec<f64>) -> Result<Self> {
        if u.rows() != v.rows() || u.cols() != v.cols() {
            return Err(Error::dim(format!(
                "U is {}x{} but V is {}x{}",
                u.rows(),
                u.cols(),
                v.rows(),
                v.cols()
            )));
        }
        if p.len() != u.cols() {
            return Err(Error::dim(format!(
                "{} probabilities for {} terms",
                p.len(),
                u.cols()
            )));
        }
        check_probabilities(&p)?;
        Ok(RankOneEnsemble { u, v, p })
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn m(&self) -> usize {
        self.u.cols()
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Fewer terms than dimensions: every realization is singular.
    pub fn underdetermined(&self) -> bool {
        self.m() < self.n()
    }

    /// Same columns, different probabilities.
    pub fn with_probabilities(&self, p: Vec<f64>) -> Result<Self> {
        RankOneEnsemble::new(self.u.clone(), self.v.clone(), p)
    }

    /// `U diag(weights) Vᵀ`.
    fn weighted_sum(&self, v_t: &Matrix, weights: &[f64]) -> Matrix {
        let scaled = self.u.scale_columns(weights).expect("length m");
        matmul(&scaled, v_t).expect("conformant")
    }
}

/// `det(U diag(p) Vᵀ)`, the exact expectation of `det(U Π Vᵀ)`.
pub fn expected_det_closed_form(e: &RankOneEnsemble) -> f64 {
    det_sq(&e.weighted_sum(&e.v.transpose(), &e.p))
}

fn enumeration_cap(what: &'static str, exponent: usize, max_exponent: usize) -> Result<()> {
    if exponent > max_exponent {
        return Err(Error::Capacity {
            what,
            required: 1u128 << exponent.min(127),
            limit: 1u128 << max_exponent.min(127),
        });
    }
    Ok(())
}

/// Probability of one on/off outcome encoded by the low bits of `mask`.
fn outcome_probability(p: &[f64], mask: u64) -> f64 {
    p.iter()
        .enumerate()
        .map(|(i, &pi)| if mask >> i & 1 == 1 { pi } else { 1.0 - pi })
        .product()
}

/// Exact expectation by summing over all `2^m` indicator outcomes.
///
/// Fails with [`Error::Capacity`] when `m > max_m`.
pub fn expected_det_bruteforce(e: &RankOneEnsemble, max_m: usize) -> Result<f64> {
    let m = e.m();
    enumeration_cap("indicator outcomes", m, max_m.min(63))?;
    let v_t = e.v.transpose();
    let mut indicator = vec![0.0; m];
    let mut acc = KahanSum::new();
    for mask in 0..(1u64 << m) {
        for (i, s) in indicator.iter_mut().enumerate() {
            *s = (mask >> i & 1) as f64;
        }
        let weight = outcome_probability(&e.p, mask);
        acc.add(weight * det_sq(&e.weighted_sum(&v_t, &indicator)));
    }
    Ok(acc.value())
}

/// Sum over `n`-subsets `Q` of `det(sum_{k in Q} p_k u_k v_kᵀ)`, visited in
/// colexicographic order.
pub fn expected_det_cauchy_binet(e: &RankOneEnsemble) -> Result<f64> {
    let (n, m) = (e.n(), e.m());
    if m < n {
        return Err(Error::domain(format!(
            "subset expansion needs m >= n, got m = {m}, n = {n}"
        )));
    }
    let count = binomial(m, n);
    if count > MAX_SUBSETS {
        return Err(Error::Capacity {
            what: "n-subsets",
            required: count,
            limit: MAX_SUBSETS,
        });
    }
    let mut acc = KahanSum::new();
    for q in ColexSubsets::new(m, n) {
        let p_q: Vec<f64> = q.iter().map(|&k| e.p[k]).collect();
        let u_q = e.u.select_columns(&q).scale_columns(&p_q)?;
        let v_q = e.v.select_columns(&q);
        acc.add(det_sq(&matmul(&u_q, &v_q.transpose())?));
    }
    Ok(acc.value())
}

/// Sample mean of `det(U Π Vᵀ)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Monte Carlo estimate of the expectation. The ChaCha8 stream seeded by
/// `seed` fully determines the result.
pub fn expected_det_monte_carlo(
    e: &RankOneEnsemble,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples < 2 {
        return Err(Error::domain(format!(
            "Monte Carlo needs at least 2 samples, got {samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v_t = e.v.transpose();
    let mut indicator = vec![0.0; e.m()];
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for count in 1..=samples {
        for (s, &pi) in indicator.iter_mut().zip(&e.p) {
            *s = if rng.random::<f64>() < pi { 1.0 } else { 0.0 };
        }
        let x = det_sq(&e.weighted_sum(&v_t, &indicator));
        let delta = x - mean;
        mean += delta / count as f64;
        m2 += delta * (x - mean);
    }
    let variance = (m2 / (samples - 1) as f64).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (variance / samples as f64).sqrt(),
        samples,
        seed,
    })
}

/// Blocks `(U_i, V_i)` of shape `n x r_i`, each switched on with probability `p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEnsemble {
    n: usize,
    blocks: Vec<(Matrix, Matrix)>,
    p: Vec<f64>,
}

impl BlockEnsemble {
    pub fn new(blocks: Vec<(Matrix, Matrix)>, p: Vec<f64>) -> Result<Self> {
        let n = blocks
            .first()
            .map(|(u, _)| u.rows())
            .ok_or_else(|| Error::dim("block ensemble has no blocks"))?;
        for (i, (u, v)) in blocks.iter().enumerate() {
            if u.rows() != n || v.rows() != n || u.cols() != v.cols() {
                return Err(Error::dim(format!(
                    "block {i}: U is {}x{}, V is {}x{}, state dimension {n}",
                    u.rows(),
                    u.cols(),
                    v.rows(),
                    v.cols()
                )));
            }
        }
        if p.len() != blocks.len() {
            return Err(Error::dim(format!(
                "{} probabilities for {} blocks",
                p.len(),
                blocks.len()
            )));
        }
        check_probabilities(&p)?;
        Ok(BlockEnsemble { n, blocks, p })
    }

    /// One rank-one block per term.
    pub fn from_rank_one(e: &RankOneEnsemble) -> Self {
        let blocks = (0..e.m())
            .map(|i| (e.u.select_columns(&[i]), e.v.select_columns(&[i])))
            .collect();
        BlockEnsemble {
            n: e.n(),
            blocks,
            p: e.p.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[(Matrix, Matrix)] {
        &self.blocks
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    fn products(&self) -> Vec<Matrix> {
        self.blocks
            .iter()
            .map(|(u, v)| matmul(u, &v.transpose()).expect("conformant"))
            .collect()
    }
}

/// Exact `E[det(sum_i pi_i U_i V_iᵀ)]` over all `2^k` block states.
pub fn block_expected_det_bruteforce(b: &BlockEnsemble, max_k: usize) -> Result<f64> {
    let k = b.k();
    enumeration_cap("block states", k, max_k.min(63))?;
    let products = b.products();
    let mut acc = KahanSum::new();
    for mask in 0..(1u64 << k) {
        let mut sum = Matrix::zeros(b.n, b.n);
        for (i, prod) in products.iter().enumerate() {
            if mask >> i & 1 == 1 {
                sum.add_scaled(1.0, prod)?;
            }
        }
        acc.add(outcome_probability(&b.p, mask) * det_sq(&sum));
    }
    Ok(acc.value())
}

/// `det(sum_i p_i U_i V_iᵀ)`.
pub fn block_lower_bound(b: &BlockEnsemble) -> f64 {
    let mut sum = Matrix::zeros(b.n, b.n);
    for (prod, &pi) in b.products().iter().zip(&b.p) {
        sum.add_scaled(pi, prod).expect("n x n");
    }
    det_sq(&sum)
}
