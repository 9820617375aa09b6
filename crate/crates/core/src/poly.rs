//! Dense univariate polynomials with complex coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg::{self, CMatrix};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Coefficients are stored from low to high degree.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// `c·u^degree`.
    pub fn monomial(degree: usize, c: C64) -> Self {
        let mut coeffs = vec![ZERO; degree + 1];
        coeffs[degree] = c;
        Self::from_coeffs(coeffs)
    }

    /// `u − root`.
    pub fn linear(root: C64) -> Self {
        Self::from_coeffs(vec![-root, ONE])
    }

    pub fn from_coeffs(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// Degree of the highest exactly nonzero coefficient; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree ignoring coefficients below `tol` in absolute value.
    pub fn effective_degree(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.norm() > tol)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        linalg::max_abs(&self.coeffs)
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Truncates to the coefficients of degree `< len`.
    pub fn truncate(&self, len: usize) -> Self {
        Self::from_coeffs(self.coeffs.iter().take(len).copied().collect())
    }

    /// Roots of the polynomial from the companion matrix, each refined by a
    /// few guarded Newton steps.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let n = match self.degree() {
            None => return Err(Error::InvalidInput("roots of the zero polynomial".into())),
            Some(n) => n,
        };
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.leading();
        let mut companion = CMatrix::zeros(n, n);
        for k in 0..n {
            companion[(0, k)] = -self.coeffs[n - 1 - k] / lead;
            if k + 1 < n {
                companion[(k + 1, k)] = ONE;
            }
        }
        let mut roots = linalg::eigenvalues(&companion)?;
        let deriv = self.derivative();
        for r in roots.iter_mut() {
            for _ in 0..4 {
                let f = self.eval(*r);
                let df = deriv.eval(*r);
                if df == ZERO {
                    break;
                }
                let candidate = *r - f / df;
                if self.eval(candidate).norm() < f.norm() {
                    *r = candidate;
                } else {
                    break;
                }
            }
        }
        Ok(roots)
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::from_coeffs(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        self.scale(-ONE)
    }
}

/// `Π (u − r)` over the given roots.
pub fn from_roots(roots: &[C64]) -> Poly {
    roots.iter().fold(Poly::one(), |acc, &r| &acc * &Poly::linear(r))
}

/// Determinant of a square matrix of polynomials by the Leibniz expansion.
pub fn leibniz_det(rows: &[Vec<Poly>]) -> Poly {
    let n = rows.len();
    let mut total = Poly::zero();
    for_each_permutation(n, |perm, sign| {
        let mut term = Poly::constant(C64::new(sign, 0.0));
        for (r, &c) in perm.iter().enumerate() {
            term = &term * &rows[r][c];
            if term.is_zero() {
                return;
            }
        }
        total = &total + &term;
    });
    total
}

/// Visits every permutation of `0..n` with its sign (Heap's algorithm).
pub fn for_each_permutation<F: FnMut(&[usize], f64)>(n: usize, mut visit: F) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let mut sign = 1.0;
    visit(&perm, sign);
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            visit(&perm, sign);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn arithmetic_and_derivative() {
        let p = Poly::from_coeffs(vec![c(1.0), c(2.0), c(3.0)]);
        let q = Poly::linear(c(1.0));
        let prod = &p * &q;
        assert_eq!(prod.coeffs(), &[c(-1.0), c(-1.0), c(-1.0), c(3.0)]);
        assert_eq!(p.derivative().coeffs(), &[c(2.0), c(6.0)]);
        assert_eq!((&p - &p).degree(), None);
        assert_eq!(p.eval(c(2.0)), c(17.0));
    }

    #[test]
    fn permutation_signs() {
        let mut seen = Vec::new();
        for_each_permutation(3, |p, s| seen.push((p.to_vec(), s)));
        assert_eq!(seen.len(), 6);
        let total: f64 = seen.iter().map(|(_, s)| s).sum();
        assert_eq!(total, 0.0);
        for (p, s) in seen {
            let inversions = (0..3)
                .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            assert_eq!(s, if inversions % 2 == 0 { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn leibniz_matches_numeric_determinant() {
        let rows: Vec<Vec<Poly>> = (0..3)
            .map(|i| (0..3).map(|j| Poly::constant(c((i * 3 + j * j + 1) as f64))).collect())
            .collect();
        let d = leibniz_det(&rows);
        let m = CMatrix::from_fn(3, 3, |i, j| rows[i][j].coeff(0));
        assert!((d.coeff(0) - linalg::determinant(&m)).norm() < 1e-12);
    }

    #[test]
    fn roots_recover_factors() {
        let roots = [C64::new(0.3, -1.0), C64::new(-0.7, 0.2), C64::new(1.1, 0.5)];
        let p = from_roots(&roots);
        let found = p.roots().unwrap();
        for r in roots {
            assert!(found.iter().any(|f| (f - r).norm() < 1e-12));
        }
    }
}
