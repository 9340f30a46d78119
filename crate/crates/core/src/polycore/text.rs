//! Text form of polynomials: `3 * x1^2 * xi1^2 - 0.5 * x2 + 7`.
//!
//! Coefficients print with the shortest round-trip decimal form, so
//! `parse(print(p)) == p` bit-for-bit. Hex floats (`0x1.8p+3`) are accepted
//! on input and emitted when requested.

use super::{PolyError, Polynomial};

/// Which variables a polynomial text refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarLayout {
    /// `x1..xn`, dimension n.
    X(usize),
    /// `xi1..xin`, dimension n.
    Xi(usize),
    /// `x1..xn, xi1..xin`, dimension 2n with ξ variables after x.
    Joint(usize),
}

impl VarLayout {
    pub fn dim(self) -> usize {
        match self {
            VarLayout::X(n) | VarLayout::Xi(n) => n,
            VarLayout::Joint(n) => 2 * n,
        }
    }

    fn index_of(self, is_xi: bool, one_based: usize) -> Option<usize> {
        if one_based == 0 {
            return None;
        }
        let i = one_based - 1;
        match (self, is_xi) {
            (VarLayout::X(n), false) | (VarLayout::Xi(n), true) if i < n => Some(i),
            (VarLayout::Joint(n), false) if i < n => Some(i),
            (VarLayout::Joint(n), true) if i < n => Some(n + i),
            _ => None,
        }
    }

    fn name_of(self, var: usize) -> String {
        match self {
            VarLayout::X(_) => format!("x{}", var + 1),
            VarLayout::Xi(_) => format!("xi{}", var + 1),
            VarLayout::Joint(n) if var < n => format!("x{}", var + 1),
            VarLayout::Joint(n) => format!("xi{}", var - n + 1),
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn err(&self, msg: impl Into<String>) -> PolyError {
        PolyError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if f(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<f64, PolyError> {
        let rest = &self.src[self.pos..];
        if rest.starts_with("0x") || rest.starts_with("0X") {
            self.pos += 2;
            let body = self.take_while(|c| c.is_ascii_hexdigit() || c == '.');
            let mut exp_txt = "";
            if matches!(self.peek(), Some('p') | Some('P')) {
                self.pos += 1;
                let start = self.pos;
                if matches!(self.peek(), Some('+') | Some('-')) {
                    self.pos += 1;
                }
                self.take_while(|c| c.is_ascii_digit());
                exp_txt = &self.src[start..self.pos];
            }
            return parse_hex_float(body, exp_txt).ok_or_else(|| self.err("bad hex float"));
        }
        let start = self.pos;
        self.take_while(|c| c.is_ascii_digit() || c == '.');
        if matches!(self.peek(), Some('e') | Some('E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            self.take_while(|c| c.is_ascii_digit());
        }
        let txt = &self.src[start..self.pos];
        txt.parse::<f64>()
            .map_err(|_| PolyError::Parse {
                pos: start,
                msg: format!("bad number '{txt}'"),
            })
    }
}

fn parse_hex_float(body: &str, exp: &str) -> Option<f64> {
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    if digits.len() > 15 {
        return None;
    }
    let mantissa = if digits.is_empty() {
        0
    } else {
        u64::from_str_radix(digits, 16).ok()?
    };
    let e: i32 = if exp.is_empty() { 0 } else { exp.parse().ok()? };
    let shift = e - 4 * frac_part.len() as i32;
    Some(ldexp(mantissa as f64, shift))
}

fn ldexp(mut x: f64, mut e: i32) -> f64 {
    // exact while no underflow happens in intermediate steps
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

/// Hex-float form of a finite f64, e.g. `0x1.8p+3`.
pub fn format_hex_float(v: f64) -> String {
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 && frac == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut hex = format!("{frac:013x}");
    while hex.ends_with('0') {
        hex.pop();
    }
    if hex.is_empty() {
        format!("{sign}0x{lead}p{e:+}")
    } else {
        format!("{sign}0x{lead}.{hex}p{e:+}")
    }
}

impl Polynomial {
    /// Parses the text format for the given variable layout.
    pub fn parse(text: &str, layout: VarLayout) -> Result<Polynomial, PolyError> {
        let dim = layout.dim();
        let mut cur = Cursor { src: text, pos: 0 };
        let mut terms = Vec::new();
        cur.skip_ws();
        if cur.peek().is_none() {
            return Err(cur.err("empty polynomial"));
        }
        let mut first = true;
        loop {
            cur.skip_ws();
            let mut sign = 1.0;
            match cur.peek() {
                Some('+') => {
                    cur.pos += 1;
                }
                Some('-') => {
                    cur.pos += 1;
                    sign = -1.0;
                }
                Some(_) if first => {}
                Some(c) => return Err(cur.err(format!("expected '+' or '-', found '{c}'"))),
                None => break,
            }
            first = false;
            let (c, alpha) = parse_term(&mut cur, layout)?;
            terms.push((alpha, sign * c));
            cur.skip_ws();
            if cur.peek().is_none() {
                break;
            }
        }
        Ok(Polynomial::from_terms(dim, terms))
    }

    /// Text form; `hex` switches coefficients to hex floats.
    pub fn to_text(&self, layout: VarLayout, hex: bool) -> String {
        assert_eq!(layout.dim(), self.dim(), "layout does not match dimension");
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms: Vec<_> = self.terms().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let fmt_num = |v: f64| {
            if hex {
                format_hex_float(v)
            } else {
                format!("{v:?}")
            }
        };
        let mut out = String::new();
        for (idx, (alpha, c)) in terms.iter().enumerate() {
            let mag = if idx == 0 { *c } else { c.abs() };
            if idx > 0 {
                out.push_str(if *c < 0.0 { " - " } else { " + " });
            }
            let vars: Vec<String> = alpha
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(i, e)| {
                    let name = layout.name_of(i);
                    if *e == 1 {
                        name
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            if vars.is_empty() {
                out.push_str(&fmt_num(mag));
            } else if mag == 1.0 {
                out.push_str(&vars.join(" * "));
            } else if mag == -1.0 {
                out.push('-');
                out.push_str(&vars.join(" * "));
            } else {
                out.push_str(&fmt_num(mag));
                out.push_str(" * ");
                out.push_str(&vars.join(" * "));
            }
        }
        out
    }
}

fn parse_term(cur: &mut Cursor<'_>, layout: VarLayout) -> Result<(f64, Vec<u32>), PolyError> {
    let dim = layout.dim();
    let mut coeff = 1.0;
    let mut alpha = vec![0u32; dim];
    let mut nfactors = 0;
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                coeff *= cur.number()?;
            }
            Some('x') => {
                cur.pos += 1;
                let is_xi = cur.src[cur.pos..].starts_with('i');
                if is_xi {
                    cur.pos += 1;
                }
                let idx_txt = cur.take_while(|c| c.is_ascii_digit());
                let one_based: usize = idx_txt
                    .parse()
                    .map_err(|_| cur.err("variable needs an index, e.g. x1 or xi1"))?;
                let var = layout.index_of(is_xi, one_based).ok_or_else(|| {
                    cur.err(format!(
                        "variable {}{} not available in this layout",
                        if is_xi { "xi" } else { "x" },
                        one_based
                    ))
                })?;
                cur.skip_ws();
                let mut e = 1u32;
                if cur.peek() == Some('^') {
                    cur.pos += 1;
                    cur.skip_ws();
                    let txt = cur.take_while(|c| c.is_ascii_digit());
                    e = txt.parse().map_err(|_| cur.err("bad exponent"))?;
                }
                alpha[var] += e;
            }
            Some(c) => return Err(cur.err(format!("unexpected '{c}'"))),
            None => return Err(cur.err("unexpected end of input")),
        }
        nfactors += 1;
        cur.skip_ws();
        match cur.peek() {
            Some('*') => {
                cur.pos += 1;
            }
            Some('x') => {}
            Some(c) if c.is_ascii_digit() => {}
            _ => break,
        }
    }
    debug_assert!(nfactors > 0);
    Ok((coeff, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_mixed_terms() {
        let p = Polynomial::parse("3 * x1^2 * xi1^2 - 0.5*x1 + 7", VarLayout::Joint(1)).unwrap();
        assert_eq!(p.coeff(&[2, 2]), 3.0);
        assert_eq!(p.coeff(&[1, 0]), -0.5);
        assert_eq!(p.coeff(&[0, 0]), 7.0);
    }

    #[test]
    fn rejects_wrong_layout_variable() {
        assert!(Polynomial::parse("xi1^2", VarLayout::X(1)).is_err());
        assert!(Polynomial::parse("x2", VarLayout::X(1)).is_err());
        assert!(Polynomial::parse("x1 +", VarLayout::X(1)).is_err());
        assert!(Polynomial::parse("", VarLayout::X(1)).is_err());
    }

    #[test]
    fn leading_minus_and_implicit_coefficient() {
        let p = Polynomial::parse("-x1^4 + x1 x2", VarLayout::X(2)).unwrap();
        assert_eq!(p.coeff(&[4, 0]), -1.0);
        assert_eq!(p.coeff(&[1, 1]), 1.0);
    }

    #[test]
    fn hex_floats() {
        let p = Polynomial::parse("0x1.8p+1 * x1", VarLayout::X(1)).unwrap();
        assert_eq!(p.coeff(&[1]), 3.0);
        assert_eq!(format_hex_float(3.0), "0x1.8p+1");
        assert_eq!(format_hex_float(-0.1), "-0x1.999999999999ap-4");
        let q = Polynomial::parse(&format_hex_float(0.1), VarLayout::X(1)).unwrap();
        assert_eq!(q.coeff(&[0]).to_bits(), 0.1f64.to_bits());
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        proptest::collection::vec(
            ((0u32..5, 0u32..5), prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL),
            0..6,
        )
        .prop_map(|ts| {
            Polynomial::from_terms(2, ts.into_iter().map(|((a, b), c)| (vec![a, b], c)))
        })
    }

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(p in arb_poly(), hex in any::<bool>()) {
            let txt = p.to_text(VarLayout::Joint(1), hex);
            let back = Polynomial::parse(&txt, VarLayout::Joint(1)).unwrap();
            prop_assert_eq!(back.num_terms(), p.num_terms());
            for (alpha, c) in p.terms() {
                prop_assert_eq!(back.coeff(alpha).to_bits(), c.to_bits(), "{}", txt);
            }
        }
    }
}
