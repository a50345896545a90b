//! Deterministic random streams and the two dense linear-algebra kernels the
//! rest of the crate is built on: spectral radius and the regularized
//! normal-equation solve.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, Schur};
use rand::distr::{Bernoulli, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// A labelled, reproducible random stream.
///
/// The generator seed is a hash of `(seed, label)`, so a stream is fully
/// described by its two fields and child streams with distinct labels never
/// share state. `rng()` always starts from the beginning of the sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    label: String,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        Self {
            seed,
            label: label.into(),
        }
    }

    pub fn root(seed: u64) -> Self {
        Self::new(seed, "")
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Derives `label/part`.
    pub fn child(&self, part: impl fmt::Display) -> Self {
        let label = if self.label.is_empty() {
            part.to_string()
        } else {
            format!("{}/{}", self.label, part)
        };
        Self {
            seed: self.seed,
            label,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(self.label.as_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest[..]);
        ChaCha8Rng::from_seed(key)
    }

    pub fn draw(&self, dist: Dist, n: usize) -> Result<Vec<f64>> {
        let mut rng = self.rng();
        dist.sample_n(&mut rng, n)
    }

    /// `rows x cols` matrix of i.i.d. samples, filled in row-major order.
    pub fn matrix(&self, dist: Dist, rows: usize, cols: usize) -> Result<Matrix> {
        let values = self.draw(dist, rows * cols)?;
        Ok(Matrix::from_row_slice(rows, cols, &values))
    }
}

impl fmt::Display for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.seed, self.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Uniform { lo: f64, hi: f64 },
    Normal { mu: f64, sigma: f64 },
    Bernoulli { p: f64 },
}

impl Dist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Dist::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => Err(
                Error::Parameter(format!("uniform requires lo < hi, got [{lo}, {hi})")),
            ),
            Dist::Normal { mu, sigma } if !(mu.is_finite() && sigma.is_finite() && sigma >= 0.0) => {
                Err(Error::Parameter(format!(
                    "normal requires finite mu and sigma >= 0, got ({mu}, {sigma})"
                )))
            }
            Dist::Bernoulli { p } if !(0.0..=1.0).contains(&p) => Err(Error::Parameter(format!(
                "bernoulli requires 0 <= p <= 1, got {p}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let out = match *self {
            Dist::Uniform { lo, hi } => {
                let d = Uniform::new(lo, hi).map_err(|e| Error::Parameter(e.to_string()))?;
                (0..n).map(|_| rng.sample(d)).collect()
            }
            Dist::Normal { mu, sigma } => {
                let d = Normal::new(mu, sigma).map_err(|e| Error::Parameter(e.to_string()))?;
                (0..n).map(|_| rng.sample(d)).collect()
            }
            Dist::Bernoulli { p } => {
                let d = Bernoulli::new(p).map_err(|e| Error::Parameter(e.to_string()))?;
                (0..n).map(|_| if rng.sample(d) { 1.0 } else { 0.0 }).collect()
            }
        };
        Ok(out)
    }
}

fn ensure_square(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// All eigenvalues of a real square matrix as `(re, im)` pairs, via a real
/// Schur decomposition.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<(f64, f64)>> {
    ensure_square(m, "eigenvalue input")?;
    ensure_finite(m, "eigenvalue input")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect())
}

/// Largest eigenvalue magnitude.
pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigenvalues(m)?
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .fold(0.0, f64::max))
}

/// Largest singular value.
pub fn norm2(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let top = gram
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0, f64::max);
    top.max(0.0).sqrt()
}

/// Solves `(a + beta*I) * x^T = b^T` for `x`, with `a` symmetric positive
/// semidefinite (`n x n`) and `b` of shape `m x n`. Returns `x` (`m x n`).
///
/// Factorizes with Cholesky and falls back to pivoted LU when the shifted
/// matrix is not numerically definite.
pub fn solve_regularized(a: &Matrix, beta: f64, b: &Matrix) -> Result<Matrix> {
    ensure_square(a, "system matrix")?;
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Parameter(format!("beta must be >= 0, got {beta}")));
    }
    let n = a.nrows();
    if b.ncols() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has {} columns, system is {n}x{n}",
            b.ncols()
        )));
    }
    ensure_finite(a, "system matrix")?;
    ensure_finite(b, "right-hand side")?;

    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] += beta;
    }
    let scale = (0..n).map(|i| shifted[(i, i)].abs()).fold(0.0, f64::max);
    let tiny = (n.max(1) as f64) * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let rhs = b.transpose();

    if let Some(chol) = Cholesky::new(shifted.clone()) {
        let l = chol.l_dirty();
        let min_pivot = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if beta > 0.0 || min_pivot > tiny {
            return Ok(chol.solve(&rhs).transpose());
        }
    }

    let lu = shifted.lu();
    let u = lu.u();
    let min_pivot = (0..n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if n > 0 && min_pivot <= tiny {
        return Err(Error::Singular(format!(
            "pivot {min_pivot:e} below tolerance {tiny:e} (beta = {beta})"
        )));
    }
    lu.solve(&rhs)
        .map(|x| x.transpose())
        .ok_or_else(|| Error::Singular(format!("LU solve failed (beta = {beta})")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, v)
    }

    #[test]
    fn radius_of_simple_matrices() {
        assert!((spectral_radius(&Matrix::identity(2, 2)).unwrap() - 1.0).abs() < 1e-12);
        assert!((spectral_radius(&m(2, 2, &[2.0, 0.0, 0.0, 0.5])).unwrap() - 2.0).abs() < 1e-12);
        // eigenvalues +-i
        assert!((spectral_radius(&m(2, 2, &[0.0, 1.0, -1.0, 0.0])).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radius_rejects_non_square() {
        assert!(matches!(
            spectral_radius(&Matrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn radius_of_rotation_scaled() {
        // 3x3 block: rotation by 60 degrees scaled by 0.8, plus a real 0.3.
        let (s, c) = (60f64.to_radians().sin(), 60f64.to_radians().cos());
        let a = m(3, 3, &[0.8 * c, -0.8 * s, 0.0, 0.8 * s, 0.8 * c, 0.0, 0.0, 0.0, 0.3]);
        assert!((spectral_radius(&a).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn regularized_solve_examples() {
        let x = solve_regularized(&m(1, 1, &[4.0]), 0.0, &m(1, 1, &[8.0])).unwrap();
        assert!((x[(0, 0)] - 2.0).abs() < 1e-14);
        let x = solve_regularized(&m(1, 1, &[4.0]), 4.0, &m(1, 1, &[8.0])).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-14);
        let i2 = Matrix::identity(2, 2);
        let x = solve_regularized(&i2, 0.0, &i2).unwrap();
        assert!((x - i2).amax() < 1e-14);
    }

    #[test]
    fn regularized_solve_singular_without_ridge() {
        let a = m(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = m(1, 2, &[1.0, 2.0]);
        assert!(matches!(solve_regularized(&a, 0.0, &b), Err(Error::Singular(_))));
        // ridge makes it solvable
        let x = solve_regularized(&a, 0.5, &b).unwrap();
        let shifted = &a + Matrix::identity(2, 2) * 0.5;
        assert!((shifted * x.transpose() - b.transpose()).norm() < 1e-12);
    }

    #[test]
    fn regularized_solve_exact_2x2() {
        // [[2,1],[1,3]] x = [3,5] -> x = [4/5, 7/5]
        let a = m(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let x = solve_regularized(&a, 0.0, &m(1, 2, &[3.0, 5.0])).unwrap();
        assert!((x[(0, 0)] - 0.8).abs() < 1e-14);
        assert!((x[(0, 1)] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn regularized_solve_indefinite_falls_back_to_lu() {
        let a = m(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let b = m(1, 2, &[2.0, 3.0]);
        let x = solve_regularized(&a, 0.0, &b).unwrap();
        assert!((&a * x.transpose() - b.transpose()).norm() < 1e-12);
    }

    #[test]
    fn draw_degenerate_distributions() {
        let s = RngStream::new(7, "t");
        assert_eq!(s.draw(Dist::Bernoulli { p: 0.0 }, 5).unwrap(), vec![0.0; 5]);
        assert_eq!(s.draw(Dist::Normal { mu: 0.0, sigma: 0.0 }, 3).unwrap(), vec![0.0; 3]);
        assert_eq!(s.draw(Dist::Bernoulli { p: 1.0 }, 4).unwrap(), vec![1.0; 4]);
    }

    #[test]
    fn draw_uniform_mean() {
        let v = RngStream::new(1, "u").draw(Dist::Uniform { lo: -1.0, hi: 1.0 }, 100_000).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!(v.iter().all(|x| (-1.0..1.0).contains(x)));
    }

    #[test]
    fn draw_rejects_bad_parameters() {
        let s = RngStream::root(0);
        assert!(s.draw(Dist::Uniform { lo: 1.0, hi: 1.0 }, 1).is_err());
        assert!(s.draw(Dist::Normal { mu: 0.0, sigma: -1.0 }, 1).is_err());
        assert!(s.draw(Dist::Bernoulli { p: 1.5 }, 1).is_err());
    }

    #[test]
    fn child_streams_are_distinct_and_stable() {
        let root = RngStream::root(42);
        let d = Dist::Uniform { lo: 0.0, hi: 1.0 };
        let a = root.child("run").child(0).draw(d, 8).unwrap();
        let b = root.child("run").child(1).draw(d, 8).unwrap();
        assert_ne!(a, b);
        assert_eq!(root.child("run").child(0).label(), "run/0");
        assert_eq!(a, RngStream::new(42, "run/0").draw(d, 8).unwrap());
        assert_ne!(a, RngStream::new(43, "run/0").draw(d, 8).unwrap());
    }

    #[test]
    fn norm2_matches_singular_values() {
        let a = m(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0]);
        let svd_top = a.singular_values().max();
        assert!((norm2(&a) - svd_top).abs() < 1e-12);
        assert!((norm2(&m(2, 2, &[3.0, 0.0, 0.0, 4.0])) - 4.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn draw_is_deterministic(seed in any::<u64>(), label in "[a-z/0-9]{0,12}", n in 0usize..64) {
            let s = RngStream::new(seed, label);
            let d = Dist::Normal { mu: 0.5, sigma: 2.0 };
            let a = s.draw(d, n).unwrap();
            let b = s.clone().draw(d, n).unwrap();
            prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }

        #[test]
        fn radius_is_absolutely_homogeneous(seed in any::<u64>(), c in -5.0f64..5.0, n in 1usize..12) {
            let a = RngStream::new(seed, "h").matrix(Dist::Uniform { lo: -1.0, hi: 1.0 }, n, n).unwrap();
            let r = spectral_radius(&a).unwrap();
            let rc = spectral_radius(&(&a * c)).unwrap();
            prop_assert!((rc - c.abs() * r).abs() <= 1e-8 * (1.0 + c.abs() * r));
        }
    }
}
