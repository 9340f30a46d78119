use serde::{Deserialize, Serialize};

use crate::polycore::{
    is_in_p2k, is_strictly_positive, PolyError, Polynomial, SymbolExpr, VarLayout,
    DEFAULT_PROBE_BUDGET, DEFAULT_SPHERE_SAMPLES,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("{which} is not coercive of order {order} (sphere minimum {min_on_sphere:e})")]
    NotCoercive {
        which: &'static str,
        order: u32,
        min_on_sphere: f64,
    },
    #[error("{which} + shift is not certified positive (minimum found {min:e})")]
    NotPositive { which: &'static str, min: f64 },
    #[error("weight infimum {min} is below 1")]
    Normalization { min: f64 },
    #[error("k, l and n must be at least 1")]
    BadIndices,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The pair `(p, q)` defining `T = q(D) + p(x)` and the metric built from
/// `W = p0 + q0 + p(x) + q(ξ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorSpec {
    n: usize,
    k: u32,
    l: u32,
    p: Polynomial,
    q: Polynomial,
    p0: f64,
    q0: f64,
}

/// Serializable description of a spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecSummary {
    pub n: usize,
    pub k: u32,
    pub l: u32,
    pub p: String,
    pub q: String,
    pub p0: f64,
    pub q0: f64,
    pub hash: String,
}

impl OscillatorSpec {
    /// Validated constructor.
    ///
    /// Requires `p ∈ P_{2k}`, `q ∈ P_{2ℓ}`, certified positivity of `p + p0`
    /// and `q + q0`, and `inf W ≥ 1` so that `λ_g ≥ 1`.
    pub fn new(
        n: usize,
        k: u32,
        l: u32,
        p: Polynomial,
        q: Polynomial,
        p0: f64,
        q0: f64,
    ) -> Result<Self, SpecError> {
        let spec = Self::new_unchecked(n, k, l, p, q, p0, q0)?;
        for (which, poly, order) in [("p", &spec.p, k), ("q", &spec.q, l)] {
            let d = is_in_p2k(poly, order, DEFAULT_SPHERE_SAMPLES)?;
            if !d.member {
                return Err(SpecError::NotCoercive {
                    which,
                    order: 2 * order,
                    min_on_sphere: d.min_on_sphere,
                });
            }
        }
        let mp = shifted_min(&spec.p, p0, "p")?;
        let mq = shifted_min(&spec.q, q0, "q")?;
        // the minima are found by search, so allow for rounding in the sum
        if mp + mq < 1.0 - 1e-9 {
            return Err(SpecError::Normalization { min: mp + mq });
        }
        Ok(spec)
    }

    /// Structural checks only; used for deliberately invalid fixtures.
    pub fn new_unchecked(
        n: usize,
        k: u32,
        l: u32,
        p: Polynomial,
        q: Polynomial,
        p0: f64,
        q0: f64,
    ) -> Result<Self, SpecError> {
        if n == 0 || k == 0 || l == 0 {
            return Err(SpecError::BadIndices);
        }
        for poly in [&p, &q] {
            if poly.dim() != n {
                return Err(PolyError::DimensionMismatch {
                    expected: n,
                    got: poly.dim(),
                }
                .into());
            }
        }
        Ok(OscillatorSpec {
            n,
            k,
            l,
            p,
            q,
            p0,
            q0,
        })
    }

    /// `(−Δ)^ℓ + |x|^{2k}` with `p0 = q0 = 1/2`, so `W = 1 + |x|^{2k} + |ξ|^{2ℓ}`.
    pub fn prototype(n: usize, k: u32, l: u32) -> Result<Self, SpecError> {
        Self::new(
            n,
            k,
            l,
            Polynomial::norm_power(n, k),
            Polynomial::norm_power(n, l),
            0.5,
            0.5,
        )
    }

    pub fn harmonic(n: usize) -> Result<Self, SpecError> {
        Self::prototype(n, 1, 1)
    }

    /// Parses `p` (in `x1..xn`) and `q` (in `xi1..xin`); `k` and `ℓ` are
    /// half the degrees.
    pub fn parse(n: usize, p: &str, q: &str, p0: f64, q0: f64) -> Result<Self, SpecError> {
        let p = Polynomial::parse(p, VarLayout::X(n))?;
        let q = Polynomial::parse(q, VarLayout::Xi(n))?;
        let k = half_degree(&p, "p")?;
        let l = half_degree(&q, "q")?;
        Self::new(n, k, l, p, q, p0, q0)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn l(&self) -> u32 {
        self.l
    }
    pub fn p(&self) -> &Polynomial {
        &self.p
    }
    pub fn q(&self) -> &Polynomial {
        &self.q
    }
    pub fn p0(&self) -> f64 {
        self.p0
    }
    pub fn q0(&self) -> f64 {
        self.q0
    }
    pub fn shift(&self) -> f64 {
        self.p0 + self.q0
    }

    /// `W(x, ξ)` at a phase-space point of length `2n`.
    pub fn weight(&self, pt: &[f64]) -> f64 {
        let (x, xi) = pt.split_at(self.n);
        self.p0 + self.q0 + self.p.eval_unchecked(x) + self.q.eval_unchecked(xi)
    }

    /// `W` as a symbol expression.
    pub fn weight_expr(&self) -> SymbolExpr {
        SymbolExpr::separable(&self.p, &self.q, self.shift()).expect("dimensions checked")
    }

    /// `q(ξ) + p(x)` without shifts.
    pub fn symbol_expr(&self) -> SymbolExpr {
        SymbolExpr::separable(&self.p, &self.q, 0.0).expect("dimensions checked")
    }

    /// Exponent `(k+ℓ)/(2kℓ)` with `λ_g = W^{exponent}`.
    pub fn lambda_exponent(&self) -> f64 {
        (self.k + self.l) as f64 / (2.0 * (self.k * self.l) as f64)
    }

    pub fn summary(&self) -> SpecSummary {
        let p = self.p.to_text(VarLayout::X(self.n), true);
        let q = self.q.to_text(VarLayout::Xi(self.n), true);
        let key = format!(
            "{};{};{};{};{};{:016x};{:016x}",
            self.n,
            self.k,
            self.l,
            p,
            q,
            self.p0.to_bits(),
            self.q0.to_bits()
        );
        SpecSummary {
            n: self.n,
            k: self.k,
            l: self.l,
            p: self.p.to_text(VarLayout::X(self.n), false),
            q: self.q.to_text(VarLayout::Xi(self.n), false),
            p0: self.p0,
            q0: self.q0,
            hash: format!("{:016x}", fnv1a(key.as_bytes())),
        }
    }
}

fn half_degree(p: &Polynomial, which: &'static str) -> Result<u32, SpecError> {
    let d = p.degree();
    if d == 0 || d % 2 == 1 {
        return Err(SpecError::NotCoercive {
            which,
            order: d,
            min_on_sphere: f64::NAN,
        });
    }
    Ok(d / 2)
}

fn shifted_min(p: &Polynomial, shift: f64, which: &'static str) -> Result<f64, SpecError> {
    let shifted = p + &Polynomial::constant(p.dim(), shift);
    let cert = is_strictly_positive(&shifted, DEFAULT_PROBE_BUDGET);
    if !cert.certified {
        return Err(SpecError::NotPositive {
            which,
            min: cert.witness_min,
        });
    }
    Ok(cert.witness_min)
}

/// 64-bit FNV-1a, used for stable content hashes in output headers.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Denominators of a split metric `g_X = |dx|²/a + |dξ|²/b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricAt {
    pub a: f64,
    pub b: f64,
}

impl MetricAt {
    pub fn lambda_g(&self) -> f64 {
        (self.a * self.b).sqrt()
    }

    pub fn h_g(&self) -> f64 {
        1.0 / self.lambda_g()
    }

    /// `g_X(t, τ)`.
    pub fn g(&self, t: &[f64], tau: &[f64]) -> f64 {
        norm2(t) / self.a + norm2(tau) / self.b
    }

    /// Symplectic dual `g^σ_X(t, τ) = b|t|² + a|τ|²`.
    pub fn g_sigma(&self, t: &[f64], tau: &[f64]) -> f64 {
        self.b * norm2(t) + self.a * norm2(tau)
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// A metric of the form `|dx|²/a(X) + |dξ|²/b(X)` on `R^n × R^n`.
pub trait SplitMetric: Sync {
    fn n(&self) -> usize;
    fn at(&self, pt: &[f64]) -> MetricAt;
    fn lambda_g(&self, pt: &[f64]) -> f64 {
        self.at(pt).lambda_g()
    }
}

impl OscillatorSpec {
    /// `a = W^{1/k}`, `b = W^{1/ℓ}`.
    pub fn metric_at(&self, pt: &[f64]) -> MetricAt {
        let w = self.weight(pt);
        MetricAt {
            a: w.powf(1.0 / self.k as f64),
            b: w.powf(1.0 / self.l as f64),
        }
    }
}

impl SplitMetric for OscillatorSpec {
    fn n(&self) -> usize {
        self.n
    }
    fn at(&self, pt: &[f64]) -> MetricAt {
        self.metric_at(pt)
    }
    fn lambda_g(&self, pt: &[f64]) -> f64 {
        self.weight(pt).powf(self.lambda_exponent())
    }
}

/// Test fixture: the spec's metric with the x-exponent `1/k` replaced.
#[derive(Clone, Debug)]
pub struct DistortedMetric {
    pub spec: OscillatorSpec,
    pub x_exponent: f64,
}

impl SplitMetric for DistortedMetric {
    fn n(&self) -> usize {
        self.spec.n
    }
    fn at(&self, pt: &[f64]) -> MetricAt {
        let w = self.spec.weight(pt);
        MetricAt {
            a: w.powf(self.x_exponent),
            b: w.powf(1.0 / self.spec.l as f64),
        }
    }
}

/// `⟨ξ⟩^{2δ}|dx|² + ⟨ξ⟩^{−2ρ}|dξ|²`.
#[derive(Clone, Copy, Debug)]
pub struct RhoDeltaMetric {
    pub n: usize,
    pub rho: f64,
    pub delta: f64,
}

impl SplitMetric for RhoDeltaMetric {
    fn n(&self) -> usize {
        self.n
    }
    fn at(&self, pt: &[f64]) -> MetricAt {
        let jb = 1.0 + norm2(&pt[self.n..]);
        MetricAt {
            a: jb.powf(-self.delta),
            b: jb.powf(self.rho),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_metric_at_origin() {
        let s = OscillatorSpec::harmonic(1).unwrap();
        let m = s.metric_at(&[0.0, 0.0]);
        assert_eq!((m.a, m.b, m.lambda_g()), (1.0, 1.0, 1.0));
    }

    #[test]
    fn quartic_metric_at_weight_sixteen() {
        let s = OscillatorSpec::prototype(1, 2, 1).unwrap();
        // W = 1 + x^4 + ξ^2 = 16 at x = 0, ξ = sqrt(15)
        let pt = [0.0, 15f64.sqrt()];
        let m = s.metric_at(&pt);
        assert!((m.a - 4.0).abs() < 1e-14);
        assert!((m.b - 16.0).abs() < 1e-13);
        assert!((s.lambda_g(&pt) - 8.0).abs() < 1e-13);
        assert_eq!(m.g(&[1.0], &[0.0]), 0.25);
    }

    #[test]
    fn quartic_lambda_at_one_one() {
        let s = OscillatorSpec::prototype(1, 2, 1).unwrap();
        let v = s.lambda_g(&[1.0, 1.0]);
        assert!((v - 3f64.powf(0.75)).abs() < 1e-14);
        assert!((v - 2.2795).abs() < 1e-4);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            OscillatorSpec::parse(1, "x1^3", "xi1^2", 0.5, 0.5),
            Err(SpecError::NotCoercive { .. })
        ));
        assert!(matches!(
            OscillatorSpec::parse(1, "x1^2", "xi1^2", 0.1, 0.1),
            Err(SpecError::Normalization { .. })
        ));
        assert!(matches!(
            OscillatorSpec::parse(1, "x1^2 - 3", "xi1^2", 0.5, 0.5),
            Err(SpecError::NotPositive { .. })
        ));
        let s = OscillatorSpec::parse(1, "x1^4 - x1^2 + 1", "xi1^2", 0.5, 0.5);
        assert!(s.is_ok(), "{s:?}");
    }

    #[test]
    fn summary_hash_is_stable() {
        let a = OscillatorSpec::harmonic(1).unwrap().summary();
        let b = OscillatorSpec::harmonic(1).unwrap().summary();
        assert_eq!(a.hash, b.hash);
        assert_eq!(a.p, "x1^2");
    }
}
