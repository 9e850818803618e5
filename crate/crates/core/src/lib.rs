//! Expected determinants of Bernoulli-weighted sums of rank-one matrices.
//!
//! If `pi_1..pi_m` are independent Bernoulli indicators with success
//! probabilities `p_i`, then
//!
//! ```text
//! E[ det( sum_i pi_i u_i v_iᵀ ) ] = det( sum_i p_i u_i v_iᵀ )
//! ```
//!
//! so an expectation over `2^m` outcomes costs one `n x n` determinant. The
//! crate evaluates this identity ([`ensemble`]), checks it against
//! enumeration and sampling oracles, and applies it to
//!
//! * expected weighted spanning-tree counts of random graphs ([`graphs`]),
//! * expected D-optimality under sensor failure and relaxed D-optimal sensor
//!   selection ([`doptimal`]).
//!
//! ```
//! use expdet::ensemble::{expected_det_bruteforce, expected_det_closed_form, RankOneEnsemble};
//! use expdet::linalg::Matrix;
//!
//! let u = Matrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]).unwrap();
//! let e = RankOneEnsemble::new(u.clone(), u, vec![0.5; 3]).unwrap();
//! let closed = expected_det_closed_form(&e);
//! let exact = expected_det_bruteforce(&e, 20).unwrap();
//! assert!((closed - 0.75).abs() < 1e-12 && (exact - 0.75).abs() < 1e-12);
//! ```

pub mod cli;
pub mod doptimal;
pub mod ensemble;
pub mod error;
pub mod graphs;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod report;
pub mod subsets;
pub mod verify;

pub use error::{Error, Result};
