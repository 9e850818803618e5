//! A linear sensor network where each sensor may drop out. Shows the
//! estimator, its covariance bound, and the expected information
//! determinant under random failure.

use expdet::doptimal::{
    crlb_covariance, expected_doptimality, fisher_information, mle_estimate, LinearSensorModel,
    Noise,
};
use expdet::linalg::{det, Matrix};

fn main() -> expdet::Result<()> {
    let h = Matrix::from_rows(&[
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 1.0],
        vec![1.0, -1.0],
    ])?;
    let model = LinearSensorModel::new(
        h.clone(),
        Noise::Diagonal(vec![0.5, 0.5, 1.0, 2.0]),
        vec![0.9, 0.6, 0.8, 0.95],
    )?;

    let x_true = [2.0, -1.0];
    let z = h.mul_vec(&x_true)?;
    println!(
        "noise-free estimate  {:?}",
        mle_estimate(&model, &z)?.to_vec()
    );

    let info = fisher_information(&model);
    println!("det(Fisher)          {}", det(&info)?);
    let cov = crlb_covariance(&model)?;
    println!("CRLB diagonal        [{}, {}]", cov[(0, 0)], cov[(1, 1)]);

    let expected = expected_doptimality(&model, model.survival())?;
    println!("E[det] under failure {expected}");
    println!(
        "all sensors alive    {}",
        expected_doptimality(&model, &[1.0; 4])?
    );
    Ok(())
}
