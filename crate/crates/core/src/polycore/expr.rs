//! Phase-space symbol expressions closed under differentiation.
//!
//! A [`SymbolExpr`] lives on `R^n × R^n` with variables ordered
//! `(x_1..x_n, ξ_1..ξ_n)`. Leaves are polynomials; interior nodes are sums,
//! products, and real powers of certified strictly positive bases.

use super::positivity::{is_strictly_positive, DEFAULT_PROBE_BUDGET};
use super::{PolyError, Polynomial, VarLayout};

/// Largest `|α| + |β|` accepted by [`SymbolExpr::partial_at`].
pub const DEFAULT_MAX_DERIVATIVE_ORDER: u32 = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Poly(Polynomial),
    Sum(Vec<Node>),
    Product(Vec<Node>),
    Power {
        base: Box<Node>,
        exponent: f64,
        certified: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolExpr {
    n: usize,
    node: Node,
}

impl SymbolExpr {
    /// Wraps a joint polynomial in `2n` variables.
    pub fn poly(n: usize, p: Polynomial) -> Result<Self, PolyError> {
        if p.dim() != 2 * n {
            return Err(PolyError::DimensionMismatch {
                expected: 2 * n,
                got: p.dim(),
            });
        }
        Ok(SymbolExpr {
            n,
            node: Node::Poly(p),
        })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        SymbolExpr {
            n,
            node: Node::Poly(Polynomial::constant(2 * n, c)),
        }
    }

    /// Parses a joint polynomial in `x1..xn, xi1..xin`.
    pub fn parse_poly(text: &str, n: usize) -> Result<Self, PolyError> {
        Self::poly(n, Polynomial::parse(text, VarLayout::Joint(n))?)
    }

    /// `p(x) + q(ξ) + c` from an x-polynomial and a ξ-polynomial.
    pub fn separable(p: &Polynomial, q: &Polynomial, c: f64) -> Result<Self, PolyError> {
        if p.dim() != q.dim() {
            return Err(PolyError::DimensionMismatch {
                expected: p.dim(),
                got: q.dim(),
            });
        }
        let n = p.dim();
        let joint = &(&p.embed(2 * n, 0) + &q.embed(2 * n, n)) + &Polynomial::constant(2 * n, c);
        Self::poly(n, joint)
    }

    pub fn sum(terms: Vec<SymbolExpr>) -> Result<Self, PolyError> {
        let n = common_dim(&terms)?;
        Ok(SymbolExpr {
            n,
            node: simplify_sum(terms.into_iter().map(|t| t.node).collect(), n),
        })
    }

    pub fn product(factors: Vec<SymbolExpr>) -> Result<Self, PolyError> {
        let n = common_dim(&factors)?;
        Ok(SymbolExpr {
            n,
            node: simplify_product(factors.into_iter().map(|t| t.node).collect(), n),
        })
    }

    /// `base^exponent`, certifying the base strictly positive.
    ///
    /// Polynomial bases go through [`is_strictly_positive`]; a base that is
    /// itself a certified power is folded into a single power.
    pub fn power(base: SymbolExpr, exponent: f64) -> Result<Self, PolyError> {
        let n = base.n;
        let node = match base.node {
            Node::Poly(p) => {
                if let Some(c) = p.as_constant() {
                    if c > 0.0 {
                        Node::Poly(Polynomial::constant(2 * n, c.powf(exponent)))
                    } else {
                        return Err(PolyError::UncertifiedPower);
                    }
                } else if exponent == 0.0 {
                    Node::Poly(Polynomial::constant(2 * n, 1.0))
                } else if exponent == 1.0 {
                    Node::Poly(p)
                } else {
                    let cert = is_strictly_positive(&p, DEFAULT_PROBE_BUDGET);
                    if !cert.certified {
                        return Err(PolyError::UncertifiedPower);
                    }
                    Node::Power {
                        base: Box::new(Node::Poly(p)),
                        exponent,
                        certified: true,
                    }
                }
            }
            Node::Power {
                base,
                exponent: e,
                certified: true,
            } => Node::Power {
                base,
                exponent: e * exponent,
                certified: true,
            },
            _ => return Err(PolyError::UncertifiedPower),
        };
        Ok(SymbolExpr { n, node })
    }

    /// Power node without a positivity certificate; evaluation fails.
    pub fn power_uncertified(base: SymbolExpr, exponent: f64) -> Self {
        SymbolExpr {
            n: base.n,
            node: Node::Power {
                base: Box::new(base.node),
                exponent,
                certified: false,
            },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn as_poly(&self) -> Option<&Polynomial> {
        match &self.node {
            Node::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.node, Node::Poly(p) if p.is_zero())
    }

    /// Evaluates at a phase-space point `(x, ξ)` of length `2n`.
    pub fn eval(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != 2 * self.n {
            return Err(PolyError::DimensionMismatch {
                expected: 2 * self.n,
                got: point.len(),
            });
        }
        eval_node(&self.node, point)
    }

    /// Evaluates at `(x, ξ)` for `n = 1` without allocation checks.
    pub fn eval2(&self, x: f64, xi: f64) -> Result<f64, PolyError> {
        self.eval(&[x, xi])
    }

    /// Exact first partial derivative in joint variable `var`.
    pub fn derivative(&self, var: usize) -> Result<SymbolExpr, PolyError> {
        if var >= 2 * self.n {
            return Err(PolyError::DirectionOutOfRange {
                direction: var,
                dim: 2 * self.n,
            });
        }
        Ok(SymbolExpr {
            n: self.n,
            node: diff_node(&self.node, var, self.n),
        })
    }

    /// `∂_x^β ∂_ξ^α` as a new expression, built from repeated first-order
    /// derivatives.
    pub fn partial(&self, alpha_xi: &[u32], beta_x: &[u32]) -> Result<SymbolExpr, PolyError> {
        self.partial_with_max(alpha_xi, beta_x, DEFAULT_MAX_DERIVATIVE_ORDER)
    }

    pub fn partial_with_max(
        &self,
        alpha_xi: &[u32],
        beta_x: &[u32],
        max_order: u32,
    ) -> Result<SymbolExpr, PolyError> {
        if alpha_xi.len() != self.n || beta_x.len() != self.n {
            return Err(PolyError::DimensionMismatch {
                expected: self.n,
                got: alpha_xi.len().max(beta_x.len()),
            });
        }
        let order: u32 = alpha_xi.iter().chain(beta_x).sum();
        if order > max_order {
            return Err(PolyError::DerivativeOrder {
                order,
                max: max_order,
            });
        }
        let mut e = self.clone();
        for (i, &b) in beta_x.iter().enumerate() {
            for _ in 0..b {
                e = e.derivative(i)?;
            }
        }
        for (i, &a) in alpha_xi.iter().enumerate() {
            for _ in 0..a {
                e = e.derivative(self.n + i)?;
            }
        }
        Ok(e)
    }

    /// `∂_x^β ∂_ξ^α a` evaluated at `point`.
    pub fn partial_at(
        &self,
        point: &[f64],
        alpha_xi: &[u32],
        beta_x: &[u32],
    ) -> Result<f64, PolyError> {
        self.partial(alpha_xi, beta_x)?.eval(point)
    }
}

fn common_dim(items: &[SymbolExpr]) -> Result<usize, PolyError> {
    let n = items
        .first()
        .map(|e| e.n)
        .ok_or_else(|| PolyError::InvalidArgument("empty sum or product".into()))?;
    if let Some(bad) = items.iter().find(|e| e.n != n) {
        return Err(PolyError::DimensionMismatch {
            expected: n,
            got: bad.n,
        });
    }
    Ok(n)
}

fn eval_node(node: &Node, pt: &[f64]) -> Result<f64, PolyError> {
    match node {
        Node::Poly(p) => Ok(p.eval_unchecked(pt)),
        Node::Sum(ts) => ts.iter().map(|t| eval_node(t, pt)).sum(),
        Node::Product(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_node(f, pt)?;
                if acc == 0.0 {
                    break;
                }
            }
            Ok(acc)
        }
        Node::Power {
            base,
            exponent,
            certified,
        } => {
            if !certified {
                return Err(PolyError::UncertifiedPower);
            }
            Ok(eval_node(base, pt)?.powf(*exponent))
        }
    }
}

fn zero(n: usize) -> Node {
    Node::Poly(Polynomial::zero(2 * n))
}

fn is_zero_node(node: &Node) -> bool {
    matches!(node, Node::Poly(p) if p.is_zero())
}

fn simplify_sum(terms: Vec<Node>, n: usize) -> Node {
    let mut poly = Polynomial::zero(2 * n);
    let mut rest = Vec::new();
    let mut stack = terms;
    while let Some(t) = stack.pop() {
        match t {
            Node::Poly(p) => poly = &poly + &p,
            Node::Sum(inner) => stack.extend(inner),
            other => rest.push(other),
        }
    }
    rest.reverse();
    if !poly.is_zero() {
        rest.insert(0, Node::Poly(poly));
    }
    match rest.len() {
        0 => zero(n),
        1 => rest.pop().unwrap(),
        _ => Node::Sum(rest),
    }
}

fn simplify_product(factors: Vec<Node>, n: usize) -> Node {
    let mut poly = Polynomial::constant(2 * n, 1.0);
    let mut rest = Vec::new();
    let mut stack = factors;
    while let Some(f) = stack.pop() {
        match f {
            Node::Poly(p) => {
                if p.is_zero() {
                    return zero(n);
                }
                poly = &poly * &p;
            }
            Node::Product(inner) => stack.extend(inner),
            other => rest.push(other),
        }
    }
    rest.reverse();
    if poly.as_constant() != Some(1.0) || rest.is_empty() {
        rest.insert(0, Node::Poly(poly));
    }
    match rest.len() {
        1 => rest.pop().unwrap(),
        _ => Node::Product(rest),
    }
}

fn diff_node(node: &Node, var: usize, n: usize) -> Node {
    match node {
        Node::Poly(p) => Node::Poly(p.partial(var, 1).expect("var checked by caller")),
        Node::Sum(ts) => simplify_sum(ts.iter().map(|t| diff_node(t, var, n)).collect(), n),
        Node::Product(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for i in 0..fs.len() {
                let d = diff_node(&fs[i], var, n);
                if is_zero_node(&d) {
                    continue;
                }
                let mut factors = fs.clone();
                factors[i] = d;
                terms.push(simplify_product(factors, n));
            }
            simplify_sum(terms, n)
        }
        Node::Power {
            base,
            exponent,
            certified,
        } => {
            let db = diff_node(base, var, n);
            if is_zero_node(&db) {
                return zero(n);
            }
            let lowered = if *exponent - 1.0 == 0.0 {
                Node::Poly(Polynomial::constant(2 * n, 1.0))
            } else {
                Node::Power {
                    base: base.clone(),
                    exponent: exponent - 1.0,
                    certified: *certified,
                }
            };
            simplify_product(
                vec![
                    Node::Poly(Polynomial::constant(2 * n, *exponent)),
                    db,
                    lowered,
                ],
                n,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(text: &str) -> SymbolExpr {
        SymbolExpr::parse_poly(text, 1).unwrap()
    }

    #[test]
    fn chain_rule_example() {
        let a = SymbolExpr::power(w("1 + x1^2 + xi1^2"), -1.0).unwrap();
        let v = a.partial_at(&[0.0, 1.0], &[1], &[0]).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
    }

    #[test]
    fn polynomial_fourth_derivative() {
        let a = w("x1^4 + xi1^2");
        for pt in [[0.0, 0.0], [1.3, -2.0], [10.0, 5.0]] {
            assert_eq!(a.partial_at(&pt, &[0], &[4]).unwrap(), 24.0);
        }
    }

    #[test]
    fn half_power_identity_at_origin() {
        let a = SymbolExpr::power(w("1 + x1^4 + xi1^2"), 0.5).unwrap();
        assert_eq!(a.eval(&[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn uncertified_power_is_rejected() {
        assert!(matches!(
            SymbolExpr::power(w("x1^2 - 1"), -1.0),
            Err(PolyError::UncertifiedPower)
        ));
        let bad = SymbolExpr::power_uncertified(w("x1^2 - 1"), -1.0);
        assert!(matches!(bad.eval(&[0.0, 0.0]), Err(PolyError::UncertifiedPower)));
    }

    #[test]
    fn derivative_order_cap() {
        let a = w("x1^4");
        assert!(matches!(
            a.partial_with_max(&[0], &[5], 4),
            Err(PolyError::DerivativeOrder { order: 5, max: 4 })
        ));
    }

    #[test]
    fn nested_power_folds() {
        let base = SymbolExpr::power(w("1 + x1^2 + xi1^2"), 2.0).unwrap();
        let a = SymbolExpr::power(base, -1.0).unwrap();
        let v = a.eval(&[1.0, 1.0]).unwrap();
        assert!((v - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn product_rule_matches_expanded_polynomial() {
        let a = SymbolExpr::product(vec![w("x1^2 + xi1"), w("x1 * xi1^3")]).unwrap();
        let expanded = w("x1^3 * xi1^3 + x1 * xi1^4");
        for (alpha, beta) in [([1], [1]), ([2], [0]), ([0], [3]), ([3], [2])] {
            for pt in [[0.3, -1.2], [2.0, 0.5]] {
                let u = a.partial_at(&pt, &alpha, &beta).unwrap();
                let v = expanded.partial_at(&pt, &alpha, &beta).unwrap();
                assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }
}
