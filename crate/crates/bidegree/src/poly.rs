//! Dense integer-coefficient polynomials in the formal tuple-length symbol
//! `r`. Coefficient arithmetic stays exact so expansions can be compared
//! symbolically against hand-derived results.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg};

/// Polynomial in `r`, coefficients in ascending power order with no
/// trailing zeros; the zero polynomial has an empty coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<i128>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: i128) -> Self {
        Poly {
            coeffs: if c == 0 { Vec::new() } else { vec![c] },
        }
    }

    /// Builds from ascending-power coefficients: `[-10, 4]` is `4r - 10`.
    pub fn from_coeffs(coeffs: Vec<i128>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    /// The monomial `r`.
    pub fn r() -> Self {
        Poly { coeffs: vec![0, 1] }
    }

    /// `r + c`.
    pub fn r_plus(c: i128) -> Self {
        Poly::from_coeffs(vec![c, 1])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn eval(&self, r: i128) -> i128 {
        self.coeffs.iter().rev().fold(0i128, |acc, &c| acc * r + c)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        let mut coeffs = vec![0i128; self.coeffs.len().max(rhs.coeffs.len())];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, &c) in rhs.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        Poly::from_coeffs(coeffs)
    }
}

impl AddAssign for Poly {
    fn add_assign(&mut self, rhs: Poly) {
        *self = self.clone() + rhs;
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![0i128; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::from_coeffs(coeffs)
    }
}

/// Prints in conventional descending-power form, factoring a leading minus
/// sign out of the whole polynomial: `-(4r-10)`, `(2r^2-15r+21)`, `1`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let negate = *self.coeffs.last().expect("nonzero") < 0;
        let p = if negate { -self.clone() } else { self.clone() };
        let body = render_descending(&p.coeffs);
        if negate {
            write!(f, "-({body})")
        } else if p.coeffs.len() > 1 {
            write!(f, "({body})")
        } else {
            write!(f, "{body}")
        }
    }
}

fn render_descending(coeffs: &[i128]) -> String {
    let mut out = String::new();
    for (power, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        if !out.is_empty() {
            out.push(if c > 0 { '+' } else { '-' });
        } else if c < 0 {
            out.push('-');
        }
        let mag = c.unsigned_abs();
        match power {
            0 => out.push_str(&mag.to_string()),
            _ => {
                if mag != 1 {
                    out.push_str(&mag.to_string());
                }
                out.push('r');
                if power > 1 {
                    out.push_str(&format!("^{power}"));
                }
            }
        }
    }
    out
}
