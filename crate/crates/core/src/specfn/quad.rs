//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals and on the
//! half line via dyadic panels.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for the odd-indexed Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive bisection until each panel's Kronrod–Gauss gap is below
/// `max(abs_tol, rel_tol·|panel|)`. Returns `(value, error_estimate)`.
pub fn integrate<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    fn rec<F: FnMut(f64) -> f64>(
        f: &mut F,
        a: f64,
        b: f64,
        whole: (f64, f64),
        abs_tol: f64,
        rel_tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let (v, e) = whole;
        if e <= abs_tol.max(rel_tol * v.abs()) || depth >= MAX_DEPTH {
            return (v, e);
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        let l = rec(f, a, m, left, 0.5 * abs_tol, rel_tol, depth + 1);
        let r = rec(f, m, b, right, 0.5 * abs_tol, rel_tol, depth + 1);
        (l.0 + r.0, l.1 + r.1)
    }
    let whole = gk15(f, a, b);
    rec(f, a, b, whole, abs_tol, rel_tol, 0)
}

/// Result of a half-line integration over dyadic panels
/// `[0, 1], [1, 2], [2, 4], …`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfLine {
    pub value: f64,
    pub error: f64,
    /// Contribution of each panel, starting with `[0, 1]`.
    pub panels: Vec<f64>,
    /// Geometric extrapolation of the panels not computed.
    pub tail: f64,
}

/// `∫_0^∞ f`, stopping once the geometric tail estimate of the remaining
/// panels drops below `rel_tol` of the running total.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(f: &mut F, rel_tol: f64, max_panels: usize) -> HalfLine {
    let mut panels = Vec::new();
    let mut total = 0.0;
    let mut error = 0.0;
    let mut tail = f64::INFINITY;
    let mut lo = 0.0;
    for j in 0..max_panels {
        let hi = 2f64.powi(j as i32);
        let (v, e) = integrate(f, lo, hi, 1e-300, 0.1 * rel_tol);
        panels.push(v);
        total += v;
        error += e;
        lo = hi;
        if j >= 3 {
            let (p, q) = (panels[j - 1].abs(), panels[j].abs());
            if q == 0.0 {
                tail = 0.0;
                break;
            }
            let ratio = q / p;
            if ratio < 0.9 {
                let t = panels[j] * ratio / (1.0 - ratio);
                if t.abs() <= rel_tol * total.abs() {
                    tail = t;
                    break;
                }
            }
        }
    }
    if tail.is_finite() {
        error += tail.abs();
        total += tail;
    } else {
        error = f64::INFINITY;
    }
    HalfLine {
        value: total,
        error,
        panels,
        tail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let (v, e) = gk15(&mut |x: f64| x.powi(10), 0.0, 1.0);
        assert!((v - 1.0 / 11.0).abs() < 1e-15);
        assert!(e < 1e-12);
    }

    #[test]
    fn adaptive_peak() {
        let (v, _) = integrate(&mut |x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12);
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn half_line_rational() {
        let r = integrate_half_line(&mut |x: f64| 1.0 / (1.0 + x * x).powi(2), 1e-12, 60);
        assert!((r.value - std::f64::consts::FRAC_PI_4).abs() < 1e-11);
    }
}
