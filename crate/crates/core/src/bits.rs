//! Fixed-length packed binary words.

use std::fmt;
use std::ops::BitXor;

use rand::Rng;

use crate::error::{Error, Result};

/// A binary vector of fixed length, packed 64 bits per limb.
///
/// Bits past `len` in the last limb are always zero, so derived equality and
/// hashing are exact.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitWord {
    limbs: Vec<u64>,
    len: usize,
}

fn limbs_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitWord {
    pub fn zeros(len: usize) -> Self {
        BitWord {
            limbs: vec![0; limbs_for(len)],
            len,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut w = BitWord::zeros(0);
        for b in bits {
            w.push(b);
        }
        w
    }

    /// Builds a word with ones exactly at `positions`.
    pub fn from_support(len: usize, positions: &[usize]) -> Self {
        let mut w = BitWord::zeros(len);
        for &p in positions {
            w.set(p, true);
        }
        w
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitWord::from_bits)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut w = BitWord::zeros(len);
        for limb in w.limbs.iter_mut() {
            *limb = rng.random();
        }
        w.clear_tail();
        w
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.limbs.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.limbs[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i & 63);
        if value {
            self.limbs[i >> 6] |= mask;
        } else {
            self.limbs[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.limbs[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(64) {
            self.limbs.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn weight(&self) -> usize {
        self.limbs.iter().map(|l| l.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of the set bits, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (li, &limb) in self.limbs.iter().enumerate() {
            let mut l = limb;
            while l != 0 {
                let b = l.trailing_zeros() as usize;
                out.push(li * 64 + b);
                l &= l - 1;
            }
        }
        out
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    /// XOR in place. Panics on length mismatch.
    pub fn xor_assign(&mut self, other: &BitWord) {
        assert_eq!(self.len, other.len, "xor of words with different lengths");
        for (a, b) in self.limbs.iter_mut().zip(&other.limbs) {
            *a ^= b;
        }
    }

    pub fn hamming_distance(&self, other: &BitWord) -> usize {
        assert_eq!(self.len, other.len);
        self.limbs
            .iter()
            .zip(&other.limbs)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// The first `n` bits as a new word.
    pub fn prefix(&self, n: usize) -> BitWord {
        assert!(n <= self.len);
        let mut w = BitWord {
            limbs: self.limbs[..limbs_for(n)].to_vec(),
            len: n,
        };
        w.clear_tail();
        w
    }

    /// Bits at the given positions, in order.
    pub fn select(&self, positions: &[usize]) -> BitWord {
        BitWord::from_bits(positions.iter().map(|&p| self.get(p)))
    }

    /// Copy extended with `extra` zero bits.
    pub fn zero_extended(&self, extra: usize) -> BitWord {
        let mut w = self.clone();
        w.len += extra;
        w.limbs.resize(limbs_for(w.len), 0);
        w
    }

    /// Parity of the AND with `mask` (inner product over GF(2)).
    pub fn dot(&self, mask: &BitWord) -> bool {
        assert_eq!(self.len, mask.len);
        self.limbs
            .iter()
            .zip(&mask.limbs)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }
}

impl BitXor for &BitWord {
    type Output = BitWord;

    fn bitxor(self, rhs: &BitWord) -> BitWord {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_and_display() {
        let w = BitWord::parse("1011001").unwrap();
        assert_eq!(w.len(), 7);
        assert_eq!(w.to_string(), "1011001");
        assert_eq!(w.support(), vec![0, 2, 3, 6]);
        assert!(BitWord::parse("10x").is_err());
    }

    #[test]
    fn tail_bits_stay_clear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = BitWord::random(70, &mut rng);
        assert_eq!(w.limbs()[1] >> 6, 0);
        let p = w.prefix(65);
        assert_eq!(p.limbs()[1] >> 1, 0);
        assert_eq!(p, BitWord::from_bits(w.iter().take(65)));
    }

    #[test]
    fn xor_is_closed_and_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = BitWord::random(130, &mut rng);
        let b = BitWord::random(130, &mut rng);
        let c = &a ^ &b;
        assert_eq!(c.len(), 130);
        assert_eq!(&c ^ &b, a);
        assert_eq!(a.hamming_distance(&b), c.weight());
    }

    #[test]
    #[should_panic]
    fn xor_length_mismatch_panics() {
        let _ = &BitWord::zeros(3) ^ &BitWord::zeros(4);
    }
}
