use serde::{Deserialize, Serialize};

use super::GroupError;
use crate::hmetric::OscillatorSpec;
use crate::polycore::Polynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Group {
    Engel,
    Cartan,
    Heisenberg,
}

/// Representation parameters of one model operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "group", rename_all = "kebab-case")]
pub enum GroupParams {
    Engel { lambda: f64, mu: f64 },
    Cartan { kappa: f64, nu: f64 },
    Heisenberg { nu: f64, k: u32, l: u32, n: usize },
}

impl GroupParams {
    pub fn group(&self) -> Group {
        match self {
            GroupParams::Engel { .. } => Group::Engel,
            GroupParams::Cartan { .. } => Group::Cartan,
            GroupParams::Heisenberg { .. } => Group::Heisenberg,
        }
    }

    pub fn realize(&self) -> Result<GroupSymbolFamily, GroupError> {
        match *self {
            GroupParams::Engel { lambda, mu } => engel_spec(lambda, mu),
            GroupParams::Cartan { kappa, nu } => cartan_spec(kappa, nu),
            GroupParams::Heisenberg { nu, k, l, n } => heisenberg_spec(nu, k, l, n),
        }
    }
}

/// A positive model operator `H = q(D) + p(x)` from a group representation,
/// realized as an [`OscillatorSpec`] with `p0 = q0 = 1/2`, so the spec's
/// shift is the identity in `(I + H)^{−γ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSymbolFamily {
    pub params: GroupParams,
    pub spec: OscillatorSpec,
    /// Coefficient scale entering the symbol seminorm bounds.
    pub normalizer: f64,
}

impl GroupSymbolFamily {
    pub fn group(&self) -> Group {
        self.params.group()
    }

    /// `q(ξ) + p(x)`, without the shift.
    pub fn symbol(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.spec.p().eval_unchecked(x) + self.spec.q().eval_unchecked(xi)
    }
}

fn quartic(c4: f64, c2: f64, c0: f64) -> Polynomial {
    Polynomial::from_terms(1, [(vec![4], c4), (vec![2], c2), (vec![0], c0)])
}

/// `H = ξ² + ¼(λx² − μ/λ)²`, the negative of the sub-Laplacian symbol in the
/// representation `π_{λ,μ}`.
pub fn engel_spec(lambda: f64, mu: f64) -> Result<GroupSymbolFamily, GroupError> {
    if lambda == 0.0 || !lambda.is_finite() || !mu.is_finite() {
        return Err(GroupError::InvalidParameter("engel needs finite λ ≠ 0".into()));
    }
    let shift = mu / lambda;
    let p = quartic(0.25 * lambda * lambda, -0.5 * mu, 0.25 * shift * shift);
    let q = Polynomial::sum_of_powers(1, 2, 1.0);
    let spec = OscillatorSpec::new(1, 2, 1, p, q, 0.5, 0.5)?;
    let normalizer = 1f64.max(lambda * lambda).max(mu).max(shift * shift);
    Ok(GroupSymbolFamily {
        params: GroupParams::Engel { lambda, mu },
        spec,
        normalizer,
    })
}

/// `H = ξ²/κ + (κ²x² + ν²)²/(4κ)`.
///
/// The normalizer is the largest coefficient magnitude, floored at 1.
pub fn cartan_spec(kappa: f64, nu: f64) -> Result<GroupSymbolFamily, GroupError> {
    if !(kappa > 0.0 && kappa.is_finite() && nu.is_finite()) {
        return Err(GroupError::InvalidParameter("cartan needs finite κ > 0".into()));
    }
    let nu2 = nu * nu;
    let p = quartic(0.25 * kappa.powi(3), 0.5 * kappa * nu2, 0.25 * nu2 * nu2 / kappa);
    let q = Polynomial::sum_of_powers(1, 2, 1.0 / kappa);
    let normalizer = p
        .terms()
        .chain(q.terms())
        .map(|(_, c)| c.abs())
        .fold(1.0, f64::max);
    let spec = OscillatorSpec::new(1, 2, 1, p, q, 0.5, 0.5)?;
    Ok(GroupSymbolFamily {
        params: GroupParams::Cartan { kappa, nu },
        spec,
        normalizer,
    })
}

/// `H = ν^k Σ ξ_j^{2k} + ν^ℓ Σ x_j^{2ℓ}` on `R^n`.
///
/// Here `k` is the order in `ξ` and `ℓ` the order in `x`, so the realized
/// spec has its `x`-order `ℓ` and `ξ`-order `k`.
pub fn heisenberg_spec(nu: f64, k: u32, l: u32, n: usize) -> Result<GroupSymbolFamily, GroupError> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(GroupError::InvalidParameter("heisenberg needs finite ν > 0".into()));
    }
    if k == 0 || l == 0 || n == 0 {
        return Err(GroupError::InvalidParameter("k, ℓ, n ≥ 1".into()));
    }
    let p = Polynomial::sum_of_powers(n, 2 * l, nu.powi(l as i32));
    let q = Polynomial::sum_of_powers(n, 2 * k, nu.powi(k as i32));
    let spec = OscillatorSpec::new(n, l, k, p, q, 0.5, 0.5)?;
    Ok(GroupSymbolFamily {
        params: GroupParams::Heisenberg { nu, k, l, n },
        spec,
        normalizer: 1f64.max(nu.powi(k.max(l) as i32)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::is_in_p2k;

    #[test]
    fn engel_values() {
        let f = engel_spec(1.0, 0.0).unwrap();
        assert!((f.symbol(&[1.0], &[1.0]) - 1.25).abs() < 1e-15);
        let g = engel_spec(1.0, 4.0).unwrap();
        assert!(g.symbol(&[2.0], &[0.0]).abs() < 1e-14);
        assert!(g.symbol(&[-2.0], &[0.0]).abs() < 1e-14);
        assert!((g.symbol(&[0.0], &[0.0]) - 4.0).abs() < 1e-14);
        assert!(matches!(engel_spec(0.0, 1.0), Err(GroupError::InvalidParameter(_))));
    }

    #[test]
    fn cartan_values() {
        let f = cartan_spec(1.0, 0.0).unwrap();
        assert!((f.symbol(&[1.0], &[1.0]) - 1.25).abs() < 1e-15);
        assert!(cartan_spec(0.0, 1.0).is_err());
        assert!(cartan_spec(-1.0, 1.0).is_err());
    }

    #[test]
    fn realized_potentials_are_coercive() {
        for (l, m) in [(1.0, 0.0), (1.0, 4.0), (-2.0, 3.0), (0.5, -1.0)] {
            let f = engel_spec(l, m).unwrap();
            assert!(is_in_p2k(f.spec.p(), 2, 64).unwrap().member);
        }
        for (k, n) in [(1.0, 0.0), (2.0, 1.0), (0.5, 3.0)] {
            let f = cartan_spec(k, n).unwrap();
            assert!(is_in_p2k(f.spec.p(), 2, 64).unwrap().member);
        }
    }

    #[test]
    fn heisenberg_orders() {
        let f = heisenberg_spec(2.0, 2, 1, 1).unwrap();
        assert_eq!((f.spec.k(), f.spec.l()), (1, 2));
        assert!((f.symbol(&[1.0], &[1.0]) - 6.0).abs() < 1e-15);
        assert_eq!(f.normalizer, 4.0);
        assert!(heisenberg_spec(0.0, 1, 1, 1).is_err());
    }
}
