//! Bit to symbol mapping for BPSK and Gray-labelled 16-QAM.
//!
//! Symbol `i` carries bits `i*q .. i*q + q` of the (padded) frame, the first
//! of them in the most significant position of the point's label. When `q`
//! does not divide the word length, zero filler bits complete the last symbol.

use std::str::FromStr;

use num_complex::Complex;

use crate::bits::BitWord;
use crate::error::Error;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Bpsk,
    Qam16,
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "bpsk" => Ok(Modulation::Bpsk),
            "qam16" => Ok(Modulation::Qam16),
            other => Err(Error::Config(format!("unknown modulation {other:?}"))),
        }
    }
}

impl Modulation {
    pub fn name(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qam16 => "qam16",
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qam16 => 4,
        }
    }
}

/// A unit-energy constellation; `points[label]` is the point with that label.
#[derive(Debug, Clone)]
pub struct Constellation<T> {
    kind: Modulation,
    points: Vec<Complex<T>>,
    q: usize,
}

/// Reflected Gray code for one 16-QAM rail: 00, 01, 11, 10 -> -3, -1, +1, +3.
fn qam16_rail(bits: usize) -> f64 {
    match bits {
        0b00 => -3.0,
        0b01 => -1.0,
        0b11 => 1.0,
        0b10 => 3.0,
        _ => unreachable!(),
    }
}

impl<T: Real> Constellation<T> {
    pub fn new(kind: Modulation) -> Self {
        let points = match kind {
            // 0 -> +1, 1 -> -1
            Modulation::Bpsk => vec![
                Complex::new(T::one(), T::zero()),
                Complex::new(-T::one(), T::zero()),
            ],
            Modulation::Qam16 => {
                let scale = 1.0 / 10f64.sqrt();
                (0..16usize)
                    .map(|label| {
                        let i = qam16_rail(label >> 2) * scale;
                        let q = qam16_rail(label & 0b11) * scale;
                        Complex::new(T::lit(i), T::lit(q))
                    })
                    .collect()
            }
        };
        Constellation {
            kind,
            points,
            q: kind.bits_per_symbol(),
        }
    }

    pub fn bpsk() -> Self {
        Self::new(Modulation::Bpsk)
    }

    pub fn qam16() -> Self {
        Self::new(Modulation::Qam16)
    }

    pub fn kind(&self) -> Modulation {
        self.kind
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.q
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn point(&self, label: usize) -> Complex<T> {
        self.points[label]
    }

    /// Bit `j` (0 = first transmitted) of a label.
    #[inline]
    pub fn label_bit(&self, label: usize, j: usize) -> bool {
        (label >> (self.q - 1 - j)) & 1 == 1
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn slice(&self, y: Complex<T>) -> usize {
        let mut best = 0;
        let mut best_d = (y - self.points[0]).norm_sqr();
        for (i, p) in self.points.iter().enumerate().skip(1) {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn mean_energy(&self) -> T {
        let total: T = self.points.iter().map(|p| p.norm_sqr()).sum();
        total / T::lit(self.points.len() as f64)
    }
}

/// Bookkeeping for words whose length is not a multiple of `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLayout {
    pub n_bits: usize,
    pub q: usize,
    pub n_symbols: usize,
    pub pad_positions: Vec<usize>,
}

impl FrameLayout {
    pub fn new(n_bits: usize, q: usize) -> Self {
        let n_symbols = n_bits.div_ceil(q);
        FrameLayout {
            n_bits,
            q,
            n_symbols,
            pad_positions: (n_bits..n_symbols * q).collect(),
        }
    }

    /// Length of the padded frame, `n_symbols * q`.
    pub fn frame_bits(&self) -> usize {
        self.n_symbols * self.q
    }

    /// The word extended with zero filler bits.
    pub fn pad(&self, word: &BitWord) -> BitWord {
        word.zero_extended(self.frame_bits() - word.len())
    }

    #[inline]
    pub fn symbol_of(&self, bit: usize) -> usize {
        bit / self.q
    }
}

/// Label of symbol `i` read from a padded frame word.
#[inline]
pub fn symbol_label(frame: &BitWord, q: usize, i: usize) -> usize {
    (0..q).fold(0, |acc, j| (acc << 1) | frame.get(i * q + j) as usize)
}

/// Maps a word (padded with zeros as needed) to constellation points.
pub fn map_word<T: Real>(word: &BitWord, cst: &Constellation<T>) -> (Vec<Complex<T>>, FrameLayout) {
    let layout = FrameLayout::new(word.len(), cst.bits_per_symbol());
    let frame = layout.pad(word);
    let symbols = map_frame(&frame, cst);
    (symbols, layout)
}

/// Maps an already padded frame.
pub fn map_frame<T: Real>(frame: &BitWord, cst: &Constellation<T>) -> Vec<Complex<T>> {
    let q = cst.bits_per_symbol();
    debug_assert_eq!(frame.len() % q, 0);
    (0..frame.len() / q)
        .map(|i| cst.point(symbol_label(frame, q, i)))
        .collect()
}

/// Slices each symbol and returns the padded frame of labels.
pub fn hard_demap_frame<T: Real>(symbols: &[Complex<T>], cst: &Constellation<T>) -> BitWord {
    let q = cst.bits_per_symbol();
    let mut out = BitWord::zeros(symbols.len() * q);
    for (i, &y) in symbols.iter().enumerate() {
        let label = cst.slice(y);
        for j in 0..q {
            if cst.label_bit(label, j) {
                out.set(i * q + j, true);
            }
        }
    }
    out
}

/// Slices and demaps, dropping filler bits.
pub fn hard_demap<T: Real>(
    symbols: &[Complex<T>],
    cst: &Constellation<T>,
    layout: &FrameLayout,
) -> BitWord {
    hard_demap_frame(symbols, cst).prefix(layout.n_bits)
}
