//! Integer-order real polynomials: evaluation, products, deflation and roots.
//!
//! Coefficients are stored in ascending powers; the `*_descending` helpers
//! convert from and to the conventional listing.

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// From ascending coefficients `c0 + c1 x + ...`. Trailing zeros are trimmed.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_descending(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().rev().copied().collect())
    }

    pub fn to_descending(&self) -> Vec<f64> {
        self.coeffs.iter().rev().copied().collect()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative by a joint Horner pass.
    fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        self.coeffs.iter().rev().fold((zero, zero), |(p, dp), &c| (p * x + c, dp * x + p))
    }

    /// `sum |c_k| |x|^k`, the natural scale for residuals at `x`.
    pub fn abs_eval(&self, x: f64) -> f64 {
        let x = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c.abs())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::default();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let out = (0..n)
            .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + other.coeffs.get(k).unwrap_or(&0.0))
            .collect();
        Poly::new(out)
    }

    /// Synthetic division by `(x - r)`: returns quotient and remainder.
    pub fn deflate(&self, r: f64) -> (Poly, f64) {
        if self.coeffs.len() < 2 {
            return (Poly::default(), self.leading());
        }
        let n = self.coeffs.len();
        let mut q = vec![0.0; n - 1];
        let mut acc = self.coeffs[n - 1];
        for k in (0..n - 1).rev() {
            q[k] = acc;
            acc = self.coeffs[k] + acc * r;
        }
        (Poly::new(q), acc)
    }

    /// Newton iteration on a real root starting from `x0`.
    pub fn polish_real_root(&self, x0: f64, iterations: usize) -> f64 {
        let mut x = x0;
        for _ in 0..iterations {
            let (p, dp) = self.eval_with_derivative(Complex64::new(x, 0.0));
            if dp.re == 0.0 {
                break;
            }
            let step = p.re / dp.re;
            let next = x - step;
            if !next.is_finite() || self.eval_real(next).abs() >= self.eval_real(x).abs() {
                break;
            }
            x = next;
        }
        x
    }

    /// All complex roots.
    ///
    /// Exact zeros at the origin are split off and reported exactly. The rest
    /// come from the eigenvalues of the balanced companion matrix, each
    /// followed by one Newton correction kept only when it lowers the residual.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::invalid("polynomial", "zero polynomial has no finite root set"));
        }
        let origin = self.coeffs.iter().take_while(|&&c| c == 0.0).count();
        let reduced = Poly::new(self.coeffs[origin..].to_vec());
        let mut roots = vec![Complex64::new(0.0, 0.0); origin];
        let n = reduced.degree();
        if n == 0 {
            return Ok(roots);
        }
        let lead = reduced.leading();
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            companion[(0, j)] = -reduced.coeffs[n - 1 - j] / lead;
        }
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        balance_parlett_reinsch(&mut companion);
        let schur = Schur::try_new(companion, f64::EPSILON, 100 * n.max(10)).ok_or(
            Error::RootConvergence {
                degree: n,
                max_residual: f64::NAN,
            },
        )?;
        let eig = schur.complex_eigenvalues();
        let mut max_residual = 0.0f64;
        for &z in eig.iter() {
            let polished = reduced.newton_once(z);
            max_residual = max_residual.max(reduced.backward_error(polished));
            roots.push(polished);
        }
        if !(max_residual < 1e-8) {
            return Err(Error::RootConvergence {
                degree: n,
                max_residual,
            });
        }
        Ok(roots)
    }

    fn newton_once(&self, z: Complex64) -> Complex64 {
        let (p, dp) = self.eval_with_derivative(z);
        if dp.norm() == 0.0 {
            return z;
        }
        let cand = z - p / dp;
        if cand.is_finite() && self.eval(cand).norm() < p.norm() {
            cand
        } else {
            z
        }
    }

    /// Relative backward error `|p(z)| / sum |c_k| |z|^k`.
    pub fn backward_error(&self, z: Complex64) -> f64 {
        let scale = self.abs_eval(z.norm());
        if scale == 0.0 {
            return 0.0;
        }
        self.eval(z).norm() / scale
    }
}

/// Real roots in the open right half-plane, ascending.
///
/// A root counts as real when `|Im| < 1e-6 (1 + |Re|)`.
pub fn real_unstable_zeros(p: &Poly) -> Result<Vec<f64>> {
    if p.degree() < 1 {
        return Err(Error::invalid("polynomial", "degree must be at least 1"));
    }
    let mut out: Vec<f64> = p
        .roots()?
        .into_iter()
        .filter(|r| r.re > 0.0 && r.im.abs() < 1e-6 * (1.0 + r.re.abs()))
        .map(|r| p.polish_real_root(r.re, 3))
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn descending_round_trip() {
        let p = Poly::from_descending(&[1.0, -3.0, 2.0]);
        assert_eq!(p.coeffs(), &[2.0, -3.0, 1.0]);
        assert_eq!(p.to_descending(), vec![1.0, -3.0, 2.0]);
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn deflation_by_known_root() {
        let p = Poly::from_descending(&[1.0, -3.0, 2.0]);
        let (q, r) = p.deflate(2.0);
        assert_eq!(q.to_descending(), vec![1.0, -1.0]);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn roots_of_quadratic_and_origin_multiplicity() {
        let p = Poly::from_descending(&[1.0, 0.0, 1.0, 0.0, 0.0]);
        let mut r = p.roots().unwrap();
        r.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert_eq!(r.len(), 4);
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
        assert_relative_eq!(r[0].im, -1.0, epsilon = 1e-12);
        assert_relative_eq!(r[3].im, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn roots_of_wilkinson_like_product() {
        let mut p = Poly::new(vec![1.0]);
        for k in 1..=10 {
            p = p.mul(&Poly::new(vec![-(k as f64), 1.0]));
        }
        let mut r: Vec<f64> = p.roots().unwrap().iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        for (k, x) in r.iter().enumerate() {
            assert!((x - (k + 1) as f64).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn high_degree_cyclotomic_roots() {
        // w^99 + ... + 1 has the nontrivial 100th roots of unity as zeros
        let p = Poly::new(vec![1.0; 100]);
        let r = p.roots().unwrap();
        assert_eq!(r.len(), 99);
        for z in r {
            assert!((z.norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn unstable_real_zeros_are_filtered() {
        assert!(real_unstable_zeros(&Poly::from_descending(&[1.0, 1.0])).unwrap().is_empty());
        let p = Poly::from_descending(&[1.0, -1.0, -6.0]); // (s-3)(s+2)
        let z = real_unstable_zeros(&p).unwrap();
        assert_eq!(z.len(), 1);
        assert_relative_eq!(z[0], 3.0, epsilon = 1e-12);
        assert!(real_unstable_zeros(&Poly::new(vec![2.0])).is_err());
    }
}
