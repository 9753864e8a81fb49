//! Multivariate polynomials in the components of a population distribution.

use serde::{Deserialize, Serialize};

/// `coef · Π_k m_k^{powers[k]}`. An empty `powers` vector denotes a constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub powers: Vec<u32>,
}

impl Monomial {
    pub fn constant(coef: f64) -> Self {
        Monomial { coef, powers: Vec::new() }
    }

    pub fn new(coef: f64, powers: Vec<u32>) -> Self {
        Monomial { coef, powers }
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    pub fn eval(&self, m: &[f64]) -> f64 {
        self.powers.iter().zip(m).fold(self.coef, |acc, (&p, &x)| acc * x.powi(p as i32))
    }

    /// Exponent vector padded with zeros to `n` variables.
    fn padded_powers(&self, n: usize) -> Vec<u32> {
        let mut p = self.powers.clone();
        p.resize(n.max(p.len()), 0);
        p
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            Self::zero()
        } else {
            Polynomial { terms: vec![Monomial::constant(c)] }
        }
    }

    /// `coef · m_k` for a 0-based state index `k` among `n` states.
    pub fn linear(coef: f64, k: usize, n: usize) -> Self {
        let mut powers = vec![0; n];
        powers[k] = 1;
        Polynomial { terms: vec![Monomial::new(coef, powers)] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().filter(|t| t.coef != 0.0).map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest variable index referenced with a non-zero exponent, plus one.
    pub fn num_vars_referenced(&self) -> usize {
        self.terms.iter().filter_map(|t| t.powers.iter().rposition(|&p| p > 0).map(|i| i + 1)).max().unwrap_or(0)
    }

    pub fn eval(&self, m: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(m)).sum()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Polynomial { terms }
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial { terms: self.terms.iter().map(|t| Monomial::new(t.coef * s, t.powers.clone())).collect() }
    }

    /// Merges monomials with identical exponents and drops zero coefficients.
    /// Exponent vectors are normalised to length `n`.
    pub fn canonical(&self, n: usize) -> Polynomial {
        let mut merged: Vec<(Vec<u32>, f64)> = Vec::new();
        for t in &self.terms {
            let p = t.padded_powers(n);
            match merged.iter_mut().find(|(q, _)| *q == p) {
                Some((_, c)) => *c += t.coef,
                None => merged.push((p, t.coef)),
            }
        }
        merged.sort_by(|a, b| a.0.cmp(&b.0));
        Polynomial { terms: merged.into_iter().filter(|(_, c)| *c != 0.0).map(|(p, c)| Monomial::new(c, p)).collect() }
    }
}
