//! Polynomials over GF(2), coefficient `i` stored at bit `i`.

use crate::bits::BitWord;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinPoly {
    coeffs: BitWord,
}

impl BinPoly {
    pub fn zero() -> Self {
        BinPoly {
            coeffs: BitWord::zeros(0),
        }
    }

    pub fn one() -> Self {
        Self::from_exponents(&[0])
    }

    pub fn from_exponents(exps: &[usize]) -> Self {
        let len = exps.iter().max().map_or(0, |&e| e + 1);
        let mut c = BitWord::zeros(len);
        for &e in exps {
            c.flip(e);
        }
        BinPoly { coeffs: c }.normalized()
    }

    /// From a bit mask, bit `i` = coefficient of x^i.
    pub fn from_mask(mask: u64) -> Self {
        let exps: Vec<usize> = (0..64).filter(|i| (mask >> i) & 1 == 1).collect();
        Self::from_exponents(&exps)
    }

    fn normalized(mut self) -> Self {
        let mut len = self.coeffs.len();
        while len > 0 && !self.coeffs.get(len - 1) {
            len -= 1;
        }
        if len != self.coeffs.len() {
            self.coeffs = self.coeffs.prefix(len);
        }
        self
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize) -> bool {
        i < self.coeffs.len() && self.coeffs.get(i)
    }

    pub fn exponents(&self) -> Vec<usize> {
        self.coeffs.support()
    }

    pub fn mul(&self, other: &BinPoly) -> BinPoly {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return BinPoly::zero();
        };
        let mut out = BitWord::zeros(da + db + 1);
        for i in self.coeffs.support() {
            for j in other.coeffs.support() {
                out.flip(i + j);
            }
        }
        BinPoly { coeffs: out }.normalized()
    }

    /// Remainder of `self` modulo `divisor`. Panics on a zero divisor.
    pub fn rem(&self, divisor: &BinPoly) -> BinPoly {
        let dd = divisor.degree().expect("division by zero polynomial");
        let mut r = self.coeffs.clone();
        let dsup = divisor.coeffs.support();
        for top in (dd..r.len()).rev() {
            if r.get(top) {
                let shift = top - dd;
                for &e in &dsup {
                    r.flip(e + shift);
                }
            }
        }
        BinPoly { coeffs: r }.normalized()
    }

    pub fn add(&self, other: &BinPoly) -> BinPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let a = self.coeffs.zero_extended(len - self.coeffs.len());
        let b = other.coeffs.zero_extended(len - other.coeffs.len());
        BinPoly { coeffs: &a ^ &b }.normalized()
    }
}

impl std::fmt::Debug for BinPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .exponents()
            .into_iter()
            .rev()
            .map(|e| match e {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{e}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}
