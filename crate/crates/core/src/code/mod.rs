//! Binary linear block codes: BCH construction, systematic encoding and
//! syndrome-based membership.

mod gf;
mod poly;

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use gf::GaloisField;
pub use poly::BinPoly;

use crate::bits::BitWord;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum Structure {
    /// Cyclic code; bit `b` of a word is the coefficient of x^(n-1-b).
    Cyclic {
        generator: BinPoly,
    },
    Generic,
}

/// An [n, k] binary linear code with a systematic encoder.
///
/// Membership uses per-position syndrome columns packed into `u64` limbs, so
/// decoders can update a syndrome incrementally by XOR-ing columns.
#[derive(Debug, Clone)]
pub struct LinearCode {
    n: usize,
    k: usize,
    structure: Structure,
    /// Systematic generator rows; row `j` has a one at `info_positions[j]`.
    generator: Vec<BitWord>,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// Parity-check rows derived from the systematic generator.
    checks: Vec<BitWord>,
    syn_limbs: usize,
    columns: Vec<u64>,
}

impl LinearCode {
    /// Binary primitive BCH code of length `n = 2^m - 1` correcting `t` errors.
    ///
    /// The generator is the lcm of the minimal polynomials of
    /// alpha, alpha^3, ..., alpha^(2t-1).
    pub fn bch(n: usize, t: usize, field: &GaloisField) -> Result<Self> {
        if n != field.order() {
            return Err(Error::InvalidCode(format!(
                "BCH length {n} must equal 2^m - 1 = {}",
                field.order()
            )));
        }
        if t == 0 {
            return Err(Error::InvalidCode("t must be at least 1".into()));
        }
        let mut seen = BTreeSet::new();
        let mut g = BinPoly::one();
        for i in (1..2 * t).step_by(2) {
            let coset = cyclotomic_coset(i % n, n);
            if seen.contains(&coset[0]) {
                continue;
            }
            seen.insert(coset[0]);
            g = g.mul(&minimal_polynomial(field, &coset));
        }
        let deg = g.degree().unwrap_or(0);
        if deg >= n {
            return Err(Error::InvalidCode(format!(
                "t = {t} too large for n = {n}: generator degree {deg}"
            )));
        }
        Self::cyclic(n, g)
    }

    /// The [127, 113] double-error-correcting BCH code over x^7 + x^3 + 1.
    pub fn bch_127_113() -> Self {
        let field = GaloisField::with_default_poly(7).expect("default GF(128)");
        Self::bch(127, 2, &field).expect("BCH(127,113)")
    }

    /// Cyclic code from a generator polynomial dividing x^n + 1.
    pub fn cyclic(n: usize, generator: BinPoly) -> Result<Self> {
        let deg = generator
            .degree()
            .ok_or_else(|| Error::InvalidCode("zero generator polynomial".into()))?;
        if deg >= n {
            return Err(Error::InvalidCode(format!(
                "generator degree {deg} leaves no message bits for n = {n}"
            )));
        }
        if !BinPoly::from_exponents(&[n, 0]).rem(&generator).is_zero() {
            return Err(Error::InvalidCode(format!(
                "generator {generator:?} does not divide x^{n} + 1"
            )));
        }
        let k = n - deg;
        let r = n - k;
        // column for bit b is x^(n-1-b) mod g, computed from the last bit upwards
        let syn_limbs = r.div_ceil(64).max(1);
        let mut columns = vec![0u64; n * syn_limbs];
        let mut cur = BinPoly::one();
        let x = BinPoly::from_exponents(&[1]);
        for b in (0..n).rev() {
            for e in cur.exponents() {
                columns[b * syn_limbs + e / 64] |= 1 << (e % 64);
            }
            cur = cur.mul(&x).rem(&generator);
        }
        let info_positions: Vec<usize> = (0..k).collect();
        let parity_positions: Vec<usize> = (k..n).collect();
        let mut code = LinearCode {
            n,
            k,
            structure: Structure::Cyclic { generator },
            generator: Vec::new(),
            info_positions,
            parity_positions,
            checks: Vec::new(),
            syn_limbs,
            columns,
        };
        code.generator = (0..k)
            .map(|j| code.encode_cyclic(&BitWord::from_support(k, &[j])))
            .collect();
        code.checks = checks_from_systematic(
            &code.generator,
            &code.info_positions,
            &code.parity_positions,
            n,
        );
        Ok(code)
    }

    /// Code spanned by the given generator rows (all of length n, linearly
    /// independent). The rows are reduced to systematic form; message bits sit
    /// at the pivot columns.
    pub fn from_generator_rows(rows: &[BitWord]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::InvalidCode("empty generator matrix".into()));
        }
        let n = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        if k > n {
            return Err(Error::InvalidCode(format!("k = {k} exceeds n = {n}")));
        }
        let mut m: Vec<BitWord> = rows.to_vec();
        let mut pivots = Vec::with_capacity(k);
        let mut row = 0;
        for col in 0..n {
            if row == k {
                break;
            }
            let Some(p) = (row..k).find(|&r| m[r].get(col)) else {
                continue;
            };
            m.swap(row, p);
            let pivot_row = m[row].clone();
            for (r, other) in m.iter_mut().enumerate() {
                if r != row && other.get(col) {
                    other.xor_assign(&pivot_row);
                }
            }
            pivots.push(col);
            row += 1;
        }
        if pivots.len() < k {
            return Err(Error::InvalidCode(format!(
                "generator rows are dependent: rank {} < {k}",
                pivots.len()
            )));
        }
        let parity_positions: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let checks = checks_from_systematic(&m, &pivots, &parity_positions, n);
        let r = n - k;
        let syn_limbs = r.div_ceil(64).max(1);
        let mut columns = vec![0u64; n * syn_limbs];
        for (l, check) in checks.iter().enumerate() {
            for b in check.support() {
                columns[b * syn_limbs + l / 64] |= 1 << (l % 64);
            }
        }
        Ok(LinearCode {
            n,
            k,
            structure: Structure::Generic,
            generator: m,
            info_positions: pivots,
            parity_positions,
            checks,
            syn_limbs,
            columns,
        })
    }

    /// Random systematic [n, k] code `[I_k | P]` with uniformly drawn `P`.
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidCode(format!(
                "need 0 < k <= n, got [{n},{k}]"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<BitWord> = (0..k)
            .map(|j| BitWord::from_bits((0..n).map(|c| if c < k { c == j } else { rng.random() })))
            .collect();
        Self::from_generator_rows(&rows)
    }

    /// The rate-1 code where every word is a codeword.
    pub fn uncoded(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCode("n must be positive".into()));
        }
        let rows: Vec<BitWord> = (0..n).map(|j| BitWord::from_support(n, &[j])).collect();
        Self::from_generator_rows(&rows)
    }

    /// Loads generator rows from text: one row of `0`/`1` characters per
    /// line. Blank lines and lines starting with `#` are skipped.
    pub fn load_generator(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_generator(&text)
    }

    pub fn parse_generator(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(BitWord::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::from_generator_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Generator polynomial for cyclic codes.
    pub fn generator_poly(&self) -> Option<&BinPoly> {
        match &self.structure {
            Structure::Cyclic { generator } => Some(generator),
            Structure::Generic => None,
        }
    }

    pub fn generator_rows(&self) -> &[BitWord] {
        &self.generator
    }

    pub fn parity_check_rows(&self) -> &[BitWord] {
        &self.checks
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, message: &BitWord) -> Result<BitWord> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: message.len(),
            });
        }
        Ok(match self.structure {
            Structure::Cyclic { .. } => self.encode_cyclic(message),
            Structure::Generic => {
                let mut c = BitWord::zeros(self.n);
                for j in message.support() {
                    c.xor_assign(&self.generator[j]);
                }
                c
            }
        })
    }

    /// Message bits first, then the remainder of x^(n-k) m(x) mod g(x).
    fn encode_cyclic(&self, message: &BitWord) -> BitWord {
        let Structure::Cyclic { generator } = &self.structure else {
            unreachable!()
        };
        let (n, k) = (self.n, self.k);
        let shifted: Vec<usize> = message.support().iter().map(|&j| n - 1 - j).collect();
        let rem = BinPoly::from_exponents(&shifted).rem(generator);
        let mut c = message.zero_extended(n - k);
        for e in rem.exponents() {
            c.set(n - 1 - e, true);
        }
        c
    }

    /// Recovers the message from a word (systematic positions).
    pub fn message_bits(&self, word: &BitWord) -> Result<BitWord> {
        self.check_len(word)?;
        Ok(word.select(&self.info_positions))
    }

    fn check_len(&self, word: &BitWord) -> Result<()> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: word.len(),
            });
        }
        Ok(())
    }

    pub fn is_codeword(&self, word: &BitWord) -> Result<bool> {
        self.check_len(word)?;
        Ok(self.syndrome(word).iter().all(|&s| s == 0))
    }

    /// Syndrome as packed limbs (the remainder modulo g for cyclic codes).
    pub fn syndrome(&self, word: &BitWord) -> Vec<u64> {
        let mut s = vec![0u64; self.syn_limbs];
        for b in word.support() {
            if b < self.n {
                self.xor_column(&mut s, b);
            }
        }
        s
    }

    pub fn syndrome_limbs(&self) -> usize {
        self.syn_limbs
    }

    #[inline]
    pub fn column(&self, position: usize) -> &[u64] {
        &self.columns[position * self.syn_limbs..(position + 1) * self.syn_limbs]
    }

    #[inline]
    pub fn xor_column(&self, syndrome: &mut [u64], position: usize) {
        for (s, c) in syndrome.iter_mut().zip(self.column(position)) {
            *s ^= c;
        }
    }
}

/// Parity-check rows for a systematic generator: one row per parity position.
fn checks_from_systematic(
    generator: &[BitWord],
    info: &[usize],
    parity: &[usize],
    n: usize,
) -> Vec<BitWord> {
    parity
        .iter()
        .map(|&p| {
            let mut h = BitWord::zeros(n);
            h.set(p, true);
            for (row, &i) in generator.iter().zip(info) {
                if row.get(p) {
                    h.set(i, true);
                }
            }
            h
        })
        .collect()
}

/// Cyclotomic coset of `i` modulo `n` under doubling, sorted.
fn cyclotomic_coset(i: usize, n: usize) -> Vec<usize> {
    let mut out = vec![i];
    let mut j = (2 * i) % n;
    while j != i {
        out.push(j);
        j = (2 * j) % n;
    }
    out.sort_unstable();
    out
}

/// Product of (x - alpha^j) over a cyclotomic coset; binary coefficients.
fn minimal_polynomial(field: &GaloisField, coset: &[usize]) -> BinPoly {
    // coefficients in GF(2^m), lowest degree first
    let mut p: Vec<u16> = vec![1];
    for &j in coset {
        let root = field.alpha_pow(j as i64);
        let mut next = vec![0u16; p.len() + 1];
        for (d, &c) in p.iter().enumerate() {
            next[d + 1] ^= c;
            next[d] ^= field.mul(c, root);
        }
        p = next;
    }
    let exps: Vec<usize> = p
        .iter()
        .enumerate()
        .filter_map(|(d, &c)| {
            debug_assert!(c <= 1, "minimal polynomial coefficient outside GF(2)");
            (c == 1).then_some(d)
        })
        .collect();
    BinPoly::from_exponents(&exps)
}
