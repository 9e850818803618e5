//! Expected determinant of a random rank-one sum, three ways.
//!
//! Each column pair `(u_i, v_i)` survives independently with probability
//! `p_i`. The expectation collapses to a single determinant with the
//! probabilities on the diagonal.

use expdet::ensemble::{
    expected_det_bruteforce, expected_det_cauchy_binet, expected_det_closed_form, RankOneEnsemble,
    DEFAULT_MAX_TERMS,
};
use expdet::linalg::Matrix;

fn main() -> expdet::Result<()> {
    let u = Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]])?;
    let e = RankOneEnsemble::new(u.clone(), u, vec![0.5, 0.5, 0.5])?;

    let closed = expected_det_closed_form(&e);
    let brute = expected_det_bruteforce(&e, DEFAULT_MAX_TERMS)?;
    let subsets = expected_det_cauchy_binet(&e)?;

    println!("closed form    {closed}");
    println!("2^m outcomes   {brute}");
    println!("n-subsets      {subsets}");

    // raising one probability moves the expectation linearly
    for p0 in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let f = expected_det_closed_form(&e.with_probabilities(vec![p0, 0.5, 0.5])?);
        println!("p_0 = {p0:<4}  E[det] = {f}");
    }
    Ok(())
}
