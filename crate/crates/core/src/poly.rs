//! User-supplied dressing polynomials: homogeneous, translation-invariant,
//! symmetric polynomials in N variables, stored as monomial terms.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

#[derive(Debug, Clone)]
pub struct SymmetricPolynomial {
    terms: Vec<Term>,
    nvars: usize,
    degree: u32,
}

impl SymmetricPolynomial {
    /// Builds the polynomial and checks the structural invariants numerically
    /// at deterministic sample points: permutation symmetry (1e-12),
    /// translation invariance (1e-10 relative) and homogeneity of the common
    /// degree (1e-10 relative).
    pub fn new(terms: Vec<Term>, nvars: usize) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Domain("polynomial needs at least one term".into()));
        }
        let mut degree = None;
        for t in &terms {
            if t.exponents.len() != nvars {
                return Err(Error::Domain(format!(
                    "term exponent list has length {}, expected {nvars}",
                    t.exponents.len()
                )));
            }
            let d: u32 = t.exponents.iter().sum();
            match degree {
                None => degree = Some(d),
                Some(d0) if d0 != d => {
                    return Err(Error::Domain(format!(
                        "terms of mixed total degree {d0} and {d}: not homogeneous"
                    )))
                }
                _ => {}
            }
        }
        let poly = SymmetricPolynomial {
            terms,
            nvars,
            degree: degree.unwrap(),
        };
        poly.check_invariants()?;
        Ok(poly)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.exponents
                        .iter()
                        .zip(x)
                        .map(|(e, xi)| xi.powi(*e as i32))
                        .product::<f64>()
            })
            .sum()
    }

    fn check_invariants(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5f3759df);
        for _ in 0..8 {
            let x: Vec<f64> = (0..self.nvars).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let base = self.eval(&x);
            let scale = base.abs().max(1.0);

            let mut perm = x.clone();
            let i = rng.gen_range(0..self.nvars);
            let j = rng.gen_range(0..self.nvars);
            perm.swap(i, j);
            if (self.eval(&perm) - base).abs() > 1e-12 * scale {
                return Err(Error::Domain("polynomial is not symmetric".into()));
            }

            let c: f64 = rng.gen_range(-1.5..1.5);
            let shifted: Vec<f64> = x.iter().map(|xi| xi + c).collect();
            if (self.eval(&shifted) - base).abs() > 1e-10 * scale {
                return Err(Error::Domain(
                    "polynomial is not translation invariant".into(),
                ));
            }

            let s: f64 = rng.gen_range(0.5..2.0);
            let scaled: Vec<f64> = x.iter().map(|xi| s * xi).collect();
            let expected = s.powi(self.degree as i32) * base;
            if (self.eval(&scaled) - expected).abs() > 1e-10 * expected.abs().max(1.0) {
                return Err(Error::Domain(format!(
                    "polynomial is not homogeneous of degree {}",
                    self.degree
                )));
            }
        }
        Ok(())
    }
}

/// Expands sum_i (x_i - xbar)^p into monomial terms. The p = 3 case is the
/// smallest nontrivial exact dressing of the A-variant eigenstates.
pub fn centered_power_sum(nvars: usize, p: u32) -> Result<SymmetricPolynomial> {
    if p == 0 {
        return Err(Error::Domain("power must be positive".into()));
    }
    // linear form x_i - xbar as a coefficient vector over x_1..x_N
    let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    let n = nvars as f64;
    for i in 0..nvars {
        // multiply out (x_i - xbar)^p term by term
        let mut cur: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        cur.insert(vec![0; nvars], 1.0);
        for _ in 0..p {
            let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
            for (mono, coeff) in &cur {
                for j in 0..nvars {
                    let lin = if j == i { 1.0 - 1.0 / n } else { -1.0 / n };
                    if lin == 0.0 {
                        continue;
                    }
                    let mut m = mono.clone();
                    m[j] += 1;
                    *next.entry(m).or_insert(0.0) += coeff * lin;
                }
            }
            cur = next;
        }
        for (m, c) in cur {
            *acc.entry(m).or_insert(0.0) += c;
        }
    }
    let terms: Vec<Term> = acc
        .into_iter()
        .filter(|(_, c)| c.abs() > 1e-14)
        .map(|(exponents, coeff)| Term { exponents, coeff })
        .collect();
    SymmetricPolynomial::new(terms, nvars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pair_difference_squares() {
        // sum_{i<j}(x_i - x_j)² for N = 2
        let p = SymmetricPolynomial::new(
            vec![
                Term { exponents: vec![2, 0], coeff: 1.0 },
                Term { exponents: vec![1, 1], coeff: -2.0 },
                Term { exponents: vec![0, 2], coeff: 1.0 },
            ],
            2,
        )
        .unwrap();
        assert_eq!(p.degree(), 2);
        assert_relative_eq!(p.eval(&[1.0, 4.0]), 9.0);
    }

    #[test]
    fn centered_cubic_matches_direct_sum() {
        let p = centered_power_sum(3, 3).unwrap();
        assert_eq!(p.degree(), 3);
        for x in [[0.3, -1.2, 2.0], [1.0, 1.0, 1.0], [-0.5, 0.0, 0.5]] {
            let mean = x.iter().sum::<f64>() / 3.0;
            let direct: f64 = x.iter().map(|xi| (xi - mean).powi(3)).sum();
            assert_relative_eq!(p.eval(&x), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let r = SymmetricPolynomial::new(
            vec![Term { exponents: vec![2, 0], coeff: 1.0 }],
            2,
        );
        assert!(r.is_err());
    }

    #[test]
    fn rejects_non_translation_invariant() {
        // sum x_i² is symmetric and homogeneous but not translation invariant
        let r = SymmetricPolynomial::new(
            vec![
                Term { exponents: vec![2, 0], coeff: 1.0 },
                Term { exponents: vec![0, 2], coeff: 1.0 },
            ],
            2,
        );
        assert!(r.is_err());
    }

    #[test]
    fn rejects_mixed_degree() {
        let r = SymmetricPolynomial::new(
            vec![
                Term { exponents: vec![2, 0], coeff: 1.0 },
                Term { exponents: vec![1, 0], coeff: 1.0 },
            ],
            2,
        );
        assert!(r.is_err());
    }
}
