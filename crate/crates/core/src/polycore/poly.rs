//! Dense multi-index real polynomials with exact differentiation.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::PolyError;

/// Exponent vector `α ∈ N₀^n`.
pub type MultiIndex = Vec<u32>;

/// A real polynomial in `dim` variables.
///
/// Terms are keyed by multi-index; zero coefficients are never stored, so two
/// polynomials are equal iff their term maps are equal.
#[derive(Clone, PartialEq, Default)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::monomial(vec![0; dim], c)
    }

    /// `c · x^α`; the dimension is `alpha.len()`.
    pub fn monomial(alpha: MultiIndex, c: f64) -> Self {
        let mut p = Polynomial::zero(alpha.len());
        p.add_term(alpha, c);
        p
    }

    /// Single variable `x_i` in `dim` variables.
    pub fn var(dim: usize, i: usize) -> Self {
        let mut alpha = vec![0; dim];
        alpha[i] = 1;
        Self::monomial(alpha, 1.0)
    }

    /// Collects terms, summing repeated multi-indices.
    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut p = Polynomial::zero(dim);
        for (alpha, c) in terms {
            assert_eq!(alpha.len(), dim, "multi-index length must equal dim");
            p.add_term(alpha, c);
        }
        p
    }

    /// `Σ_i x_i^{2k}` in `dim` variables.
    pub fn sum_of_powers(dim: usize, power: u32, coefficient: f64) -> Self {
        Polynomial::from_terms(
            dim,
            (0..dim).map(|i| {
                let mut alpha = vec![0; dim];
                alpha[i] = power;
                (alpha, coefficient)
            }),
        )
    }

    /// `|x|^{2k} = (Σ x_i²)^k`.
    pub fn norm_power(dim: usize, k: u32) -> Self {
        Polynomial::sum_of_powers(dim, 2, 1.0).pow(k)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(alpha) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(a, c)| (a, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &[u32]) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Largest exponent of variable `i` over all terms.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|a| a[i]).max().unwrap_or(0)
    }

    /// Constant term, if the polynomial has degree 0 (or is zero).
    pub fn as_constant(&self) -> Option<f64> {
        if self.degree() == 0 {
            Some(self.coeff(&vec![0; self.dim]))
        } else {
            None
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(alpha, c)| {
                alpha
                    .iter()
                    .zip(x)
                    .fold(*c, |acc, (&a, &xi)| if a == 0 { acc } else { acc * xi.powi(a as i32) })
            })
            .sum()
    }

    /// Exact `∂^times / ∂x_direction^times`.
    pub fn partial(&self, direction: usize, times: u32) -> Result<Polynomial, PolyError> {
        if direction >= self.dim {
            return Err(PolyError::DirectionOutOfRange {
                direction,
                dim: self.dim,
            });
        }
        let mut out = Polynomial::zero(self.dim);
        for (alpha, c) in &self.terms {
            let e = alpha[direction];
            if e < times {
                continue;
            }
            let falling: f64 = (0..times).map(|j| (e - j) as f64).product();
            let mut beta = alpha.clone();
            beta[direction] -= times;
            out.add_term(beta, c * falling);
        }
        Ok(out)
    }

    /// Mixed partial `∂^α`.
    pub fn partial_multi(&self, alpha: &[u32]) -> Result<Polynomial, PolyError> {
        if alpha.len() != self.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                got: alpha.len(),
            });
        }
        let mut p = self.clone();
        for (i, &t) in alpha.iter().enumerate() {
            if t > 0 {
                p = p.partial(i, t)?;
            }
        }
        Ok(p)
    }

    /// Homogeneous part of degree exactly `d`.
    pub fn leading_form(&self, d: u32) -> Polynomial {
        Polynomial::from_terms(
            self.dim,
            self.terms
                .iter()
                .filter(|(a, _)| a.iter().sum::<u32>() == d)
                .map(|(a, c)| (a.clone(), *c)),
        )
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::from_terms(self.dim, self.terms.iter().map(|(a, c)| (a.clone(), c * s)))
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.dim, 1.0);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Re-embeds into `new_dim` variables, mapping variable `i` to `i + offset`.
    pub fn embed(&self, new_dim: usize, offset: usize) -> Polynomial {
        assert!(offset + self.dim <= new_dim);
        Polynomial::from_terms(
            new_dim,
            self.terms.iter().map(|(a, c)| {
                let mut b = vec![0; new_dim];
                b[offset..offset + self.dim].copy_from_slice(a);
                (b, *c)
            }),
        )
    }

    /// Substitutes `x_i → s_i x_i`.
    pub fn rescale_vars(&self, s: &[f64]) -> Polynomial {
        Polynomial::from_terms(
            self.dim,
            self.terms.iter().map(|(a, c)| {
                let f: f64 = a.iter().zip(s).map(|(&e, &si)| si.powi(e as i32)).product();
                (a.clone(), c * f)
            }),
        )
    }

    /// Exact gradient polynomials.
    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.dim)
            .map(|i| self.partial(i, 1).expect("direction in range"))
            .collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// True when the polynomial contains only even powers of every variable
    /// in the index range `vars`.
    pub fn is_even_in(&self, vars: std::ops::Range<usize>) -> bool {
        self.terms
            .keys()
            .all(|a| a[vars.clone()].iter().all(|e| e % 2 == 0))
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial(dim={}, {:?})", self.dim, self.terms)
    }
}

fn check_dims(a: &Polynomial, b: &Polynomial) {
    assert_eq!(a.dim, b.dim, "polynomial dimension mismatch");
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        check_dims(self, rhs);
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), *c);
        }
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        check_dims(self, rhs);
        let mut out = Polynomial::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let ab: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(ab, ca * cb);
            }
        }
        out
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x4() -> Polynomial {
        Polynomial::monomial(vec![4], 1.0)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(x4().eval(&[2.0]).unwrap(), 16.0);
        assert_eq!(Polynomial::zero(2).eval(&[1.5, -3.0]).unwrap(), 0.0);
        let r2 = Polynomial::sum_of_powers(2, 2, 1.0);
        assert_eq!(r2.eval(&[3.0, 4.0]).unwrap(), 25.0);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let err = x4().eval(&[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, PolyError::DimensionMismatch { expected: 1, got: 2 }));
    }

    #[test]
    fn partial_examples() {
        let d2 = x4().partial(0, 2).unwrap();
        assert_eq!(d2, Polynomial::monomial(vec![2], 12.0));
        assert_eq!(d2.eval(&[1.0]).unwrap(), 12.0);
        assert!(x4().partial(0, 5).unwrap().is_zero());
        let p = Polynomial::monomial(vec![2, 2], 1.0);
        let mixed = p.partial(0, 1).unwrap().partial(1, 1).unwrap();
        assert_eq!(mixed, Polynomial::monomial(vec![1, 1], 4.0));
        assert!(p.partial(2, 1).is_err());
    }

    #[test]
    fn leading_form_examples() {
        let p = Polynomial::from_terms(1, [(vec![4], 1.0), (vec![3], -1.0), (vec![0], 7.0)]);
        assert_eq!(p.leading_form(4), x4());
        let q = Polynomial::monomial(vec![2, 2], 1.0);
        assert_eq!(q.leading_form(4), q);
        let r = Polynomial::from_terms(1, [(vec![2], 1.0), (vec![0], 1.0)]);
        assert!(r.leading_form(4).is_zero());
    }

    #[test]
    fn cancellation_drops_terms() {
        let a = Polynomial::from_terms(1, [(vec![2], 1.0), (vec![0], 1.0)]);
        let b = Polynomial::monomial(vec![2], 1.0);
        let d = &a - &b;
        assert_eq!(d.num_terms(), 1);
        assert_eq!(d.degree(), 0);
    }

    #[test]
    fn norm_power_expands() {
        let p = Polynomial::norm_power(2, 2);
        assert_eq!(p.coeff(&[2, 2]), 2.0);
        assert_eq!(p.eval(&[1.0, 1.0]).unwrap(), 4.0);
    }
}
