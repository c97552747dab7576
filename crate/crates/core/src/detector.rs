//! Soft and hard detection: zero-forcing with per-symbol max-log LLRs,
//! exhaustive max-log ML over the symbol lattice, and the turbo-MAP metric.
//!
//! LLRs follow `lambda = log(P(bit = 1) / P(bit = 0))`: a positive value
//! favours 1. Every detector output is clipped to the per-bit cap
//! `n / v_b`, and filler bits are pinned at `-cap` (known zeros).

use std::str::FromStr;

use num_complex::Complex;

use crate::bits::BitWord;
use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::modem::{Constellation, FrameLayout};
use crate::scalar::Real;

/// Largest lattice the exhaustive detectors will scan.
pub const MAX_LATTICE: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    Zf,
    Ml,
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zf" => Ok(DetectorKind::Zf),
            "ml" => Ok(DetectorKind::Ml),
            other => Err(Error::Config(format!("unknown detector {other:?}"))),
        }
    }
}

impl DetectorKind {
    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Zf => "zf",
            DetectorKind::Ml => "ml",
        }
    }
}

/// Per-bit log-likelihood ratios with their saturation caps.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector<T> {
    values: Vec<T>,
    saturation: Vec<T>,
}

impl<T: Real> LlrVector<T> {
    /// Clips each value into `[-cap, cap]`; NaN becomes 0.
    pub fn new(values: Vec<T>, saturation: Vec<T>) -> Self {
        assert_eq!(values.len(), saturation.len());
        let values = values
            .into_iter()
            .zip(&saturation)
            .map(|(v, &cap)| {
                if v.is_nan() {
                    T::zero()
                } else {
                    v.max(-cap).min(cap)
                }
            })
            .collect();
        LlrVector { values, saturation }
    }

    pub fn zeros(saturation: Vec<T>) -> Self {
        LlrVector {
            values: vec![T::zero(); saturation.len()],
            saturation,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn saturation(&self) -> &[T] {
        &self.saturation
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<T> {
        self.values.iter().map(|v| v.abs()).collect()
    }

    /// Hard decisions from the signs; zero maps to bit 0.
    pub fn hard_bits(&self) -> BitWord {
        BitWord::from_bits(self.values.iter().map(|&v| v > T::zero()))
    }

    /// Forces filler bits to a known zero at full reliability.
    pub fn pin_pads(&mut self, layout: &FrameLayout) {
        for &p in &layout.pad_positions {
            self.values[p] = -self.saturation[p];
        }
    }
}

/// Per-bit caps `n / v_b`.
pub fn saturation_caps<T: Real>(v: &[T], n_code: usize) -> Vec<T> {
    let n = T::lit(n_code as f64);
    v.iter().map(|&s| n / s).collect()
}

#[derive(Debug, Clone)]
pub struct DetectionResult<T> {
    /// Padded frame word (filler bits zero).
    pub hard_word: BitWord,
    pub llrs: LlrVector<T>,
    /// Weighted distance of the hard decision.
    pub d_ml: T,
}

fn check_variances<T: Real>(sym_var: &[T]) -> Result<()> {
    match sym_var.iter().position(|&s| s.is_nan() || s <= T::zero()) {
        Some(i) => Err(Error::NonPositiveVariance(i)),
        None => Ok(()),
    }
}

/// `(y - H x)^* diag(v)^-1 (y - H x)` with one variance per symbol.
pub fn weighted_distance<T: Real>(
    y: &[Complex<T>],
    h: &ChannelMatrix<T>,
    x: &[Complex<T>],
    sym_var: &[T],
) -> Result<T> {
    if y.len() != h.dim() || sym_var.len() != h.dim() {
        return Err(Error::Dimension(format!(
            "y has {} entries, v has {}, channel is {}x{}",
            y.len(),
            sym_var.len(),
            h.dim(),
            h.dim()
        )));
    }
    check_variances(sym_var)?;
    let hx = h.mul_vec(x)?;
    Ok(y.iter()
        .zip(&hx)
        .zip(sym_var)
        .map(|((y, hx), &s)| (y - hx).norm_sqr() / s)
        .sum())
}

/// Zero-forcing equalization; returns `(y_hat, post-equalization variances)`.
pub fn zf_equalize<T: Real>(
    y: &[Complex<T>],
    h: &ChannelMatrix<T>,
    sym_var: &[T],
) -> Result<(Vec<Complex<T>>, Vec<T>)> {
    if y.len() != h.dim() || sym_var.len() != h.dim() {
        return Err(Error::Dimension("zf_equalize operands disagree".into()));
    }
    check_variances(sym_var)?;
    let inv = h.inverse()?;
    let y_hat = inv.mul_vec(y)?;
    let var = match &inv {
        ChannelMatrix::Full { m, entries } => entries
            .chunks(*m)
            .map(|row| {
                row.iter()
                    .zip(sym_var)
                    .map(|(g, &s)| g.norm_sqr() * s)
                    .sum()
            })
            .collect(),
        _ => (0..h.dim())
            .map(|i| sym_var[i] * inv.diag(i).norm_sqr())
            .collect(),
    };
    Ok((y_hat, var))
}

/// Label bits of symbol `i` that are filler, as a mask over the label.
pub fn pad_mask(layout: &FrameLayout, i: usize) -> usize {
    let q = layout.q;
    (0..q)
        .filter(|&j| i * q + j >= layout.n_bits)
        .fold(0, |acc, j| acc | (1 << (q - 1 - j)))
}

/// Per-symbol max-log LLRs from zero-forced observations.
pub fn zf_llrs<T: Real>(
    y_hat: &[Complex<T>],
    zf_var: &[T],
    cst: &Constellation<T>,
    layout: &FrameLayout,
    caps: &[T],
) -> LlrVector<T> {
    let q = cst.bits_per_symbol();
    let mut values = vec![T::zero(); y_hat.len() * q];
    for (i, (&yi, &var)) in y_hat.iter().zip(zf_var).enumerate() {
        let mask = pad_mask(layout, i);
        let mut min0 = vec![T::infinity(); q];
        let mut min1 = vec![T::infinity(); q];
        for (label, &p) in cst.points().iter().enumerate() {
            if label & mask != 0 {
                continue;
            }
            let d = (yi - p).norm_sqr();
            for j in 0..q {
                let slot = if cst.label_bit(label, j) {
                    &mut min1[j]
                } else {
                    &mut min0[j]
                };
                if d < *slot {
                    *slot = d;
                }
            }
        }
        for j in 0..q {
            values[i * q + j] = (min0[j] - min1[j]) / var;
        }
    }
    let mut llrs = LlrVector::new(values, caps.to_vec());
    llrs.pin_pads(layout);
    llrs
}

/// ZF detection: slice the equalized symbols (respecting filler bits) and
/// attach per-symbol LLRs.
pub fn zf_detect<T: Real>(
    y: &[Complex<T>],
    h: &ChannelMatrix<T>,
    sym_var: &[T],
    cst: &Constellation<T>,
    layout: &FrameLayout,
    caps: &[T],
) -> Result<DetectionResult<T>> {
    let (y_hat, zf_var) = zf_equalize(y, h, sym_var)?;
    let q = cst.bits_per_symbol();
    let mut hard = BitWord::zeros(layout.frame_bits());
    let mut x = Vec::with_capacity(y_hat.len());
    for (i, &yi) in y_hat.iter().enumerate() {
        let mask = pad_mask(layout, i);
        let label = if mask == 0 {
            cst.slice(yi)
        } else {
            slice_allowed(cst, yi, mask)
        };
        for j in 0..q {
            if cst.label_bit(label, j) {
                hard.set(i * q + j, true);
            }
        }
        x.push(cst.point(label));
    }
    let d_ml = weighted_distance(y, h, &x, sym_var)?;
    let llrs = zf_llrs(&y_hat, &zf_var, cst, layout, caps);
    Ok(DetectionResult {
        hard_word: hard,
        llrs,
        d_ml,
    })
}

fn slice_allowed<T: Real>(cst: &Constellation<T>, y: Complex<T>, mask: usize) -> usize {
    let mut best = usize::MAX;
    let mut best_d = T::infinity();
    for (label, &p) in cst.points().iter().enumerate() {
        if label & mask != 0 {
            continue;
        }
        let d = (y - p).norm_sqr();
        if d < best_d {
            best = label;
            best_d = d;
        }
    }
    best
}

/// Enumerates the lattice of symbol vectors consistent with the filler bits.
///
/// Lattice index order is lexicographic in the symbol labels (symbol 0 most
/// significant), which is also the tie-break order.
pub struct Lattice<'a, T> {
    cst: &'a Constellation<T>,
    layout: &'a FrameLayout,
    allowed: Vec<Vec<usize>>,
}

impl<'a, T: Real> Lattice<'a, T> {
    pub fn new(cst: &'a Constellation<T>, layout: &'a FrameLayout) -> Result<Self> {
        let allowed: Vec<Vec<usize>> = (0..layout.n_symbols)
            .map(|i| {
                let mask = pad_mask(layout, i);
                (0..cst.len()).filter(|l| l & mask == 0).collect()
            })
            .collect();
        let size: f64 = allowed.iter().map(|a| a.len() as f64).product();
        if size > MAX_LATTICE as f64 {
            return Err(Error::LatticeTooLarge {
                size,
                bound: MAX_LATTICE,
            });
        }
        Ok(Lattice {
            cst,
            layout,
            allowed,
        })
    }

    pub fn size(&self) -> usize {
        self.allowed.iter().map(Vec::len).product()
    }

    /// Labels of lattice point `index`.
    pub fn labels(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.allowed.len()];
        for (slot, a) in out.iter_mut().zip(&self.allowed).rev() {
            *slot = a[index % a.len()];
            index /= a.len();
        }
        out
    }

    pub fn point(&self, labels: &[usize]) -> Vec<Complex<T>> {
        labels.iter().map(|&l| self.cst.point(l)).collect()
    }

    pub fn bits(&self, labels: &[usize]) -> BitWord {
        let q = self.cst.bits_per_symbol();
        let mut w = BitWord::zeros(self.layout.frame_bits());
        for (i, &l) in labels.iter().enumerate() {
            for j in 0..q {
                if self.cst.label_bit(l, j) {
                    w.set(i * q + j, true);
                }
            }
        }
        w
    }
}

/// Scans the lattice once, returning per-point `(bits, score)` to `visit`.
fn scan<T: Real>(
    lattice: &Lattice<'_, T>,
    mut score: impl FnMut(&[Complex<T>], &BitWord) -> Result<T>,
    mut visit: impl FnMut(&BitWord, T),
) -> Result<()> {
    for index in 0..lattice.size() {
        let labels = lattice.labels(index);
        let x = lattice.point(&labels);
        let bits = lattice.bits(&labels);
        let s = score(&x, &bits)?;
        visit(&bits, s);
    }
    Ok(())
}

/// Exhaustive ML detection with max-log LLRs.
///
/// `|lambda_b| = d_cml[b] - d_ml` where `d_cml[b]` is the smallest distance
/// among lattice points whose bit `b` differs from the ML decision.
pub fn ml_detect<T: Real>(
    y: &[Complex<T>],
    h: &ChannelMatrix<T>,
    sym_var: &[T],
    cst: &Constellation<T>,
    layout: &FrameLayout,
    caps: &[T],
) -> Result<DetectionResult<T>> {
    let lattice = Lattice::new(cst, layout)?;
    check_variances(sym_var)?;
    let n = layout.frame_bits();
    let mut d_ml = T::infinity();
    let mut best = BitWord::zeros(n);
    // per bit: min distance with bit = 0 and with bit = 1
    let mut min0 = vec![T::infinity(); n];
    let mut min1 = vec![T::infinity(); n];
    scan(
        &lattice,
        |x, _| weighted_distance(y, h, x, sym_var),
        |bits, d| {
            if d < d_ml {
                d_ml = d;
                best = bits.clone();
            }
            for b in 0..n {
                let slot = if bits.get(b) {
                    &mut min1[b]
                } else {
                    &mut min0[b]
                };
                if d < *slot {
                    *slot = d;
                }
            }
        },
    )?;
    let values: Vec<T> = (0..n)
        .map(|b| {
            let hard = best.get(b);
            let d_cml = if hard { min0[b] } else { min1[b] };
            let mag = d_cml - d_ml;
            if hard {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let mut llrs = LlrVector::new(values, caps.to_vec());
    llrs.pin_pads(layout);
    Ok(DetectionResult {
        hard_word: best,
        llrs,
        d_ml,
    })
}

pub fn ml_llrs<T: Real>(
    y: &[Complex<T>],
    h: &ChannelMatrix<T>,
    sym_var: &[T],
    cst: &Constellation<T>,
    layout: &FrameLayout,
    caps: &[T],
) -> Result<LlrVector<T>> {
    ml_detect(y, h, sym_var, cst, layout, caps).map(|r| r.llrs)
}

/// Turbo-MAP metric `-d(x) + sum_b (2 c_x[b] - 1) prior[b]`.
pub fn map_metric<T: Real>(
    x: &[Complex<T>],
    bits: &BitWord,
    y: &[Complex<T>],
    h: &ChannelMatrix<T>,
    sym_var: &[T],
    prior: &[T],
) -> Result<T> {
    if bits.len() != prior.len() {
        return Err(Error::LengthMismatch {
            expected: bits.len(),
            got: prior.len(),
        });
    }
    let d = weighted_distance(y, h, x, sym_var)?;
    let p: T = prior
        .iter()
        .enumerate()
        .map(|(b, &l)| if bits.get(b) { l } else { -l })
        .sum();
    Ok(p - d)
}

/// A-posteriori LLRs: `max phi` over bit = 1 minus `max phi` over bit = 0.
pub fn map_llrs<T: Real>(
    y: &[Complex<T>],
    h: &ChannelMatrix<T>,
    sym_var: &[T],
    prior: &[T],
    cst: &Constellation<T>,
    layout: &FrameLayout,
    caps: &[T],
) -> Result<LlrVector<T>> {
    let lattice = Lattice::new(cst, layout)?;
    let n = layout.frame_bits();
    let mut max0 = vec![T::neg_infinity(); n];
    let mut max1 = vec![T::neg_infinity(); n];
    scan(
        &lattice,
        |x, bits| map_metric(x, bits, y, h, sym_var, prior),
        |bits, phi| {
            for b in 0..n {
                let slot = if bits.get(b) {
                    &mut max1[b]
                } else {
                    &mut max0[b]
                };
                if phi > *slot {
                    *slot = phi;
                }
            }
        },
    )?;
    let values = (0..n)
        .map(|b| {
            if max1[b] == T::neg_infinity() || max0[b] == T::neg_infinity() {
                // filler bits are never 1 in the lattice
                -caps[b]
            } else {
                max1[b] - max0[b]
            }
        })
        .collect();
    let mut llrs = LlrVector::new(values, caps.to_vec());
    llrs.pin_pads(layout);
    Ok(llrs)
}

/// Runs the configured detector on one frame.
pub fn detect<T: Real>(
    kind: DetectorKind,
    y: &[Complex<T>],
    h: &ChannelMatrix<T>,
    sym_var: &[T],
    cst: &Constellation<T>,
    layout: &FrameLayout,
    caps: &[T],
) -> Result<DetectionResult<T>> {
    match kind {
        DetectorKind::Zf => zf_detect(y, h, sym_var, cst, layout, caps),
        DetectorKind::Ml => ml_detect(y, h, sym_var, cst, layout, caps),
    }
}
