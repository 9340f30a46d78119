use serde::{Deserialize, Serialize};

use super::QuantizeError;

/// Midpoint grids `x_i = −L_x + (i + ½)Δx` and `ξ_m = −L_ξ + (m + ½)Δξ`,
/// both symmetric about zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub lx: f64,
    pub mx: usize,
    pub lxi: f64,
    pub mxi: usize,
}

impl Default for PhaseGrid {
    /// Large enough in `ξ` that the box truncation of `(1+x²+ξ²)^{−2}` costs
    /// under 1% of its trace; `Δξ = 1/32` keeps the kernel period at `4L_x`.
    fn default() -> Self {
        PhaseGrid {
            lx: 8.0,
            mx: 256,
            lxi: 64.0,
            mxi: 4096,
        }
    }
}

impl PhaseGrid {
    pub fn new(lx: f64, mx: usize, lxi: f64, mxi: usize) -> Result<Self, QuantizeError> {
        let g = PhaseGrid { lx, mx, lxi, mxi };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), QuantizeError> {
        if !(self.lx > 0.0 && self.lxi > 0.0 && self.lx.is_finite() && self.lxi.is_finite()) {
            return Err(QuantizeError::InvalidGrid("half-widths must be positive".into()));
        }
        if self.mx < 2 || self.mxi < 2 {
            return Err(QuantizeError::InvalidGrid("need at least two points per axis".into()));
        }
        Ok(())
    }

    /// Grid for spectral work: `L_ξ = 1/(2Δx)` so grid frequencies do not
    /// alias, and `M_ξ = 2M_x` so the kernel's period `1/Δξ = 4L_x` keeps the
    /// two ends of the box from wrapping onto each other.
    pub fn spectral(lx: f64, mx: usize) -> Result<Self, QuantizeError> {
        let dx = 2.0 * lx / mx as f64;
        Self::new(lx, mx, 0.5 / dx, 2 * mx)
    }

    /// All four of `L_x, M_x, L_ξ, M_ξ` doubled; spacings are unchanged.
    pub fn refined(&self) -> Self {
        PhaseGrid {
            lx: 2.0 * self.lx,
            mx: 2 * self.mx,
            lxi: 2.0 * self.lxi,
            mxi: 2 * self.mxi,
        }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.lx / self.mx as f64
    }

    pub fn dxi(&self) -> f64 {
        2.0 * self.lxi / self.mxi as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        let h = self.dx();
        (0..self.mx).map(|i| -self.lx + (i as f64 + 0.5) * h).collect()
    }

    pub fn xis(&self) -> Vec<f64> {
        let h = self.dxi();
        (0..self.mxi).map(|m| -self.lxi + (m as f64 + 0.5) * h).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_consistent() {
        let g = PhaseGrid::default();
        let xs = g.xs();
        assert!((xs[0] + xs[g.mx - 1]).abs() < 1e-14);
        let area = g.dx() * g.dxi() * (g.mx * g.mxi) as f64;
        assert!((area - 4.0 * g.lx * g.lxi).abs() < 1e-9);
        assert!(PhaseGrid::new(0.0, 10, 1.0, 10).is_err());
    }
}
