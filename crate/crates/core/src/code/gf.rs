//! Arithmetic in GF(2^m) through exponent/logarithm tables.

use crate::error::{Error, Result};

/// The field GF(2^m) for a fixed primitive polynomial.
#[derive(Debug, Clone)]
pub struct GaloisField {
    m: u32,
    primitive_poly: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GaloisField {
    /// Builds the tables by repeated multiplication by `alpha`.
    ///
    /// `primitive_poly` includes the `x^m` term, e.g. `0b1011` for x^3 + x + 1.
    /// Fails when the polynomial has the wrong degree or `alpha` does not have
    /// order `2^m - 1`.
    pub fn new(m: u32, primitive_poly: u32) -> Result<Self> {
        if !(2..=12).contains(&m) {
            return Err(Error::FieldDegree(m));
        }
        if primitive_poly >> m != 1 {
            return Err(Error::NotPrimitive {
                m,
                poly: primitive_poly,
            });
        }
        let order = (1usize << m) - 1;
        let mut exp = vec![0u16; order];
        let mut log = vec![0u16; order + 1];
        let mut x: u32 = 1;
        for (i, slot) in exp.iter_mut().enumerate() {
            if i > 0 && x == 1 {
                // alpha has order i < 2^m - 1
                return Err(Error::NotPrimitive {
                    m,
                    poly: primitive_poly,
                });
            }
            *slot = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x >> m != 0 {
                x ^= primitive_poly;
            }
        }
        if x != 1 {
            return Err(Error::NotPrimitive {
                m,
                poly: primitive_poly,
            });
        }
        Ok(GaloisField {
            m,
            primitive_poly,
            exp,
            log,
        })
    }

    /// Default primitive polynomial per degree, from the standard tables.
    pub fn default_poly(m: u32) -> Option<u32> {
        Some(match m {
            2 => 0b111,
            3 => 0b1011,
            4 => 0b10011,
            5 => 0b100101,
            6 => 0b1000011,
            7 => 0b10001001, // x^7 + x^3 + 1
            8 => 0b100011101,
            9 => 0b1000010001,
            10 => 0b10000001001,
            11 => 0b100000000101,
            12 => 0b1000001010011,
            _ => return None,
        })
    }

    pub fn with_default_poly(m: u32) -> Result<Self> {
        let poly = Self::default_poly(m).ok_or(Error::FieldDegree(m))?;
        Self::new(m, poly)
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.primitive_poly
    }

    /// Multiplicative group order, 2^m - 1.
    pub fn order(&self) -> usize {
        self.exp.len()
    }

    /// alpha^i for any integer exponent.
    pub fn alpha_pow(&self, i: i64) -> u16 {
        let o = self.order() as i64;
        self.exp[i.rem_euclid(o) as usize]
    }

    /// Discrete log of a nonzero element.
    pub fn log(&self, a: u16) -> Option<usize> {
        (a != 0).then(|| self.log[a as usize] as usize)
    }

    pub fn exp_table(&self) -> &[u16] {
        &self.exp
    }

    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] as usize + self.log[b as usize] as usize;
        self.exp[s % self.order()]
    }

    pub fn inv(&self, a: u16) -> Option<u16> {
        let l = self.log(a)?;
        Some(self.exp[(self.order() - l) % self.order()])
    }
}
