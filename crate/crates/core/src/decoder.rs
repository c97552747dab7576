//! Hard GRAND and soft-output turbo-GRAND.
//!
//! Decoders work on padded frame words: positions `>= code.n()` are filler
//! bits that pattern sources must leave untouched. Decoded and detected words
//! are reported at code length.

use std::collections::HashMap;
use std::str::FromStr;

use num_complex::Complex;

use crate::bits::BitWord;
use crate::channel::ChannelMatrix;
use crate::code::LinearCode;
use crate::detector::{weighted_distance, LlrVector};
use crate::error::{Error, Result};
use crate::guesswork::{masked, AnySource, PatternSource, SourceKind};
use crate::modem::{map_frame, symbol_label, Constellation, FrameLayout};
use crate::scalar::Real;

/// Incremental syndrome of `base ^ flips`.
#[derive(Debug, Clone)]
struct SyndromeTracker<'c> {
    code: &'c LinearCode,
    base: Vec<u64>,
    scratch: Vec<u64>,
}

impl<'c> SyndromeTracker<'c> {
    fn new(code: &'c LinearCode, base_word: &BitWord) -> Self {
        SyndromeTracker {
            code,
            base: code.syndrome(base_word),
            scratch: vec![0; code.syndrome_limbs()],
        }
    }

    #[inline]
    fn is_codeword_with(&mut self, flips: &[usize]) -> bool {
        let n = self.code.n();
        if self.base.len() == 1 {
            let mut s = self.base[0];
            for &p in flips {
                if p < n {
                    s ^= self.code.column(p)[0];
                }
            }
            return s == 0;
        }
        self.scratch.copy_from_slice(&self.base);
        for &p in flips {
            if p < n {
                self.code.xor_column(&mut self.scratch, p);
            }
        }
        self.scratch.iter().all(|&s| s == 0)
    }

    fn commit(&mut self, flips: &[usize]) {
        for &p in flips {
            if p < self.code.n() {
                self.code.xor_column(&mut self.base, p);
            }
        }
    }
}

/// Outcome of one decode.
#[derive(Debug, Clone)]
pub struct DecodeOutcome<T> {
    /// Decoded word at code length (a codeword unless `abandoned`).
    pub decoded: BitWord,
    /// Detected (demapped) word at code length.
    pub detected: BitWord,
    /// Soft output over the padded frame, when the decoder produces one.
    pub llrs: Option<LlrVector<T>>,
    pub queries_per_iteration: Vec<usize>,
    pub hit: Vec<bool>,
    pub abandoned: bool,
    /// Candidate distance evaluations actually performed.
    pub distance_evals: usize,
    /// Per-symbol distance terms touched by those evaluations.
    pub symbol_updates: usize,
}

impl<T> DecodeOutcome<T> {
    pub fn total_queries(&self) -> usize {
        self.queries_per_iteration.iter().sum()
    }

    pub fn iterations(&self) -> usize {
        self.queries_per_iteration.len()
    }
}

/// Hard GRAND: query `base ^ w` in source order until a codeword appears or
/// the `budget`-th query, which is returned flagged as abandoned.
pub fn hard_grand<T, S: PatternSource>(
    base: &BitWord,
    code: &LinearCode,
    source: &mut S,
    budget: usize,
) -> DecodeOutcome<T> {
    assert!(budget >= 1, "budget must be positive");
    assert!(base.len() >= code.n() && source.len() == base.len());
    let mut syn = SyndromeTracker::new(code, base);
    let mut k = 0;
    let mut decoded = base.clone();
    let mut hit = false;
    while k < budget && source.advance() {
        k += 1;
        let w = source.current();
        debug_assert!(w.iter().all(|&p| p < code.n()), "filler bit flipped");
        let cw = syn.is_codeword_with(w);
        if cw || k == budget {
            for &p in w {
                decoded.flip(p);
            }
            hit = cw;
            break;
        }
    }
    DecodeOutcome {
        decoded: decoded.prefix(code.n()),
        detected: base.prefix(code.n()),
        llrs: None,
        queries_per_iteration: vec![k],
        hit: vec![hit],
        abandoned: !hit,
        distance_evals: 0,
        symbol_updates: 0,
    }
}

/// Weighted distance of candidate words relative to a moving base word.
///
/// Diagonal channels use a per-symbol term table so a candidate costs one
/// lookup per changed symbol; general channels recompute the full distance.
#[derive(Debug, Clone)]
pub struct DistanceEvaluator<'a, T> {
    y: &'a [Complex<T>],
    h: &'a ChannelMatrix<T>,
    sym_var: &'a [T],
    cst: &'a Constellation<T>,
    q: usize,
    n_labels: usize,
    /// `terms[i * n_labels + label]` for diagonal channels
    terms: Vec<T>,
    base: BitWord,
    base_labels: Vec<usize>,
    base_distance: T,
    pub evaluations: usize,
    pub symbol_updates: usize,
}

impl<'a, T: Real> DistanceEvaluator<'a, T> {
    pub fn new(
        y: &'a [Complex<T>],
        h: &'a ChannelMatrix<T>,
        sym_var: &'a [T],
        cst: &'a Constellation<T>,
        base: &BitWord,
    ) -> Result<Self> {
        let m = h.dim();
        let q = cst.bits_per_symbol();
        if y.len() != m || sym_var.len() != m || base.len() != m * q {
            return Err(Error::Dimension(format!(
                "y: {}, v: {}, frame: {} bits, channel {m}x{m}, q = {q}",
                y.len(),
                sym_var.len(),
                base.len()
            )));
        }
        if let Some(i) = sym_var.iter().position(|&s| s.is_nan() || s <= T::zero()) {
            return Err(Error::NonPositiveVariance(i));
        }
        let n_labels = cst.len();
        let terms = if h.is_diagonal() {
            let mut t = Vec::with_capacity(m * n_labels);
            for i in 0..m {
                let hi = h.diag(i);
                for p in cst.points() {
                    t.push((y[i] - hi * p).norm_sqr() / sym_var[i]);
                }
            }
            t
        } else {
            Vec::new()
        };
        let mut ev = DistanceEvaluator {
            y,
            h,
            sym_var,
            cst,
            q,
            n_labels,
            terms,
            base: base.clone(),
            base_labels: Vec::new(),
            base_distance: T::zero(),
            evaluations: 0,
            symbol_updates: 0,
        };
        ev.rebase(base);
        Ok(ev)
    }

    fn rebase(&mut self, base: &BitWord) {
        self.base = base.clone();
        let m = self.h.dim();
        self.base_labels = (0..m).map(|i| symbol_label(base, self.q, i)).collect();
        self.base_distance = self.full_distance(base);
    }

    /// Distance of an arbitrary frame word, from scratch.
    pub fn full_distance(&self, frame: &BitWord) -> T {
        let m = self.h.dim();
        if self.h.is_diagonal() {
            (0..m)
                .map(|i| self.terms[i * self.n_labels + symbol_label(frame, self.q, i)])
                .sum()
        } else {
            let x = map_frame(frame, self.cst);
            weighted_distance(self.y, self.h, &x, self.sym_var).expect("validated dimensions")
        }
    }

    pub fn base_distance(&self) -> T {
        self.base_distance
    }

    /// Distance of `base ^ flips`; `flips` ascending.
    #[inline]
    pub fn eval(&mut self, flips: &[usize]) -> T {
        self.evaluations += 1;
        if !self.h.is_diagonal() {
            self.symbol_updates += self.h.dim();
            let mut w = self.base.clone();
            for &p in flips {
                w.flip(p);
            }
            return self.full_distance(&w);
        }
        let q = self.q;
        let l = self.n_labels;
        let mut delta = T::zero();
        let mut idx = 0;
        while idx < flips.len() {
            let sym = flips[idx] / q;
            let mut mask = 0usize;
            while idx < flips.len() && flips[idx] / q == sym {
                mask |= 1 << (q - 1 - flips[idx] % q);
                idx += 1;
            }
            let old = self.base_labels[sym];
            delta += self.terms[sym * l + (old ^ mask)] - self.terms[sym * l + old];
            self.symbol_updates += 1;
        }
        self.base_distance + delta
    }

    /// Moves the base to `base ^ flips`, whose distance is `d`.
    fn commit(&mut self, flips: &[usize], d: T) {
        for &p in flips {
            self.base.flip(p);
            let sym = p / self.q;
            self.base_labels[sym] ^= 1 << (self.q - 1 - p % self.q);
        }
        self.base_distance = d;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Abandonment {
    /// The budget-th query exits like a hit and may replace the decoded word.
    #[default]
    Literal,
    /// Only true codeword hits update the decoded word, except that the
    /// final iteration's last query is kept when no hit ever occurred.
    Conservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LlrSign {
    /// `log P(1)/P(0)`: positive when the detected bit is 1.
    #[default]
    LogP1OverP0,
    /// Opposite sign, as the synthesis rule `(2c - 1)(d_ml - d_cml)` reads.
    Inverted,
}

/// Knobs for [`turbo_grand`].
#[derive(Debug, Clone)]
pub struct TurboConfig {
    pub budget: usize,
    pub iterations: usize,
    pub source: SourceKind,
    pub abandonment: Abandonment,
    pub sign: LlrSign,
    /// Cache distances of words already queried in this frame.
    pub dedup: bool,
    /// Keep every queried word and its distance.
    pub record_queries: bool,
    /// Recompute the final selection over per-iteration hits and assert it
    /// agrees with the running minimum.
    pub verify_selection: bool,
}

impl Default for TurboConfig {
    fn default() -> Self {
        TurboConfig {
            budget: 100_000,
            iterations: 2,
            source: SourceKind::Sgrand,
            abandonment: Abandonment::Literal,
            sign: LlrSign::LogP1OverP0,
            dedup: false,
            record_queries: false,
            verify_selection: false,
        }
    }
}

/// Running detection and decoding state.
#[derive(Debug, Clone)]
pub struct TurboState<T> {
    /// Smallest distance among all queried words.
    pub d_ml: T,
    /// Smallest distance among decoded (hit) words.
    pub d_ml_dec: T,
    /// Per bit: smallest distance among queried words whose bit opposes
    /// `c_hat`, capped at the saturation value.
    pub d_cml: Vec<T>,
    pub c_hat: BitWord,
    pub c_bar: BitWord,
    pub llrs_out: LlrVector<T>,
}

/// Per-bit LLRs from the running distances: magnitude `d_cml - d_ml`, sign
/// from the detected word.
pub fn synthesize_llrs<T: Real>(
    state: &TurboState<T>,
    caps: &[T],
    layout: &FrameLayout,
    sign: LlrSign,
) -> LlrVector<T> {
    let values = state
        .d_cml
        .iter()
        .enumerate()
        .map(|(b, &dc)| {
            let mag = (dc - state.d_ml).max(T::zero());
            let one = state.c_hat.get(b) ^ (sign == LlrSign::Inverted);
            if one {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let mut llrs = LlrVector::new(values, caps.to_vec());
    llrs.pin_pads(layout);
    llrs
}

#[derive(Debug, Clone)]
pub struct TurboResult<T> {
    pub outcome: DecodeOutcome<T>,
    pub state: TurboState<T>,
    /// Every queried frame word with its distance, in query order.
    pub recorded: Option<Vec<(BitWord, T)>>,
    /// Hit word and distance of each iteration that ended on a hit.
    pub iteration_hits: Vec<Option<(BitWord, T)>>,
}

/// Joint detection and decoding by guesswork.
///
/// Each iteration orders patterns by the current LLR magnitudes, guesses
/// around the current detected word `c_hat` (which moves whenever a closer
/// word is found), maintains the ML and counter-ML distances, and ends on a
/// codeword hit or the budget-th query by re-synthesizing the LLRs.
#[allow(clippy::too_many_arguments)]
pub fn turbo_grand<T: Real>(
    detected: &BitWord,
    y: &[Complex<T>],
    h_reported: &ChannelMatrix<T>,
    v: &[T],
    llr_in: &LlrVector<T>,
    code: &LinearCode,
    cst: &Constellation<T>,
    layout: &FrameLayout,
    cfg: &TurboConfig,
) -> Result<TurboResult<T>> {
    if cfg.budget == 0 || cfg.iterations == 0 {
        return Err(Error::Config(
            "budget and iterations must be positive".into(),
        ));
    }
    let nf = layout.frame_bits();
    if detected.len() != nf || llr_in.len() != nf || v.len() != nf {
        return Err(Error::LengthMismatch {
            expected: nf,
            got: detected.len().min(llr_in.len()).min(v.len()),
        });
    }
    if layout.n_bits != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            got: layout.n_bits,
        });
    }
    let sym_var: Vec<T> = v.iter().step_by(layout.q).copied().collect();
    let caps: Vec<T> = llr_in.saturation().to_vec();
    let mut eval = DistanceEvaluator::new(y, h_reported, &sym_var, cst, detected)?;
    let mut syn = SyndromeTracker::new(code, detected);

    let mut state = TurboState {
        d_ml: T::infinity(),
        d_ml_dec: T::infinity(),
        d_cml: caps.clone(),
        c_hat: detected.clone(),
        c_bar: detected.clone(),
        llrs_out: llr_in.clone(),
    };
    let mut queries = Vec::with_capacity(cfg.iterations);
    let mut hits = Vec::with_capacity(cfg.iterations);
    let mut iteration_hits = Vec::with_capacity(cfg.iterations);
    let mut recorded = cfg.record_queries.then(Vec::new);
    let mut cache: HashMap<BitWord, T> = HashMap::new();

    for t in 0..cfg.iterations {
        let mags = state.llrs_out.magnitudes();
        let mut source = masked(
            AnySource::build(cfg.source, &mags, cfg.budget.saturating_mul(2).min(1 << 20)),
            &layout.pad_positions,
        );
        let mut k = 0;
        let mut hit = false;
        let mut iter_hit = None;
        while k < cfg.budget && source.advance() {
            k += 1;
            let w = source.current();
            let d = if cfg.dedup {
                let mut cand = state.c_hat.clone();
                for &p in w {
                    cand.flip(p);
                }
                match cache.get(&cand) {
                    Some(&d) => d,
                    None => {
                        let d = eval.eval(w);
                        cache.insert(cand, d);
                        d
                    }
                }
            } else {
                eval.eval(w)
            };
            if let Some(rec) = recorded.as_mut() {
                let mut cand = state.c_hat.clone();
                for &p in w {
                    cand.flip(p);
                }
                rec.push((cand, d));
            }
            // complementary bits of the candidate are exactly the flips
            let closer = d < state.d_ml;
            if closer {
                for &b in w {
                    state.d_cml[b] = state.d_ml.min(caps[b]);
                }
            } else {
                for &b in w {
                    if d < state.d_cml[b] {
                        state.d_cml[b] = d;
                    }
                }
            }
            let is_cw = syn.is_codeword_with(w);
            let candidate = if closer || is_cw || k == cfg.budget {
                let mut c = state.c_hat.clone();
                for &p in w {
                    c.flip(p);
                }
                Some(c)
            } else {
                None
            };
            if closer {
                state.c_hat = candidate.clone().expect("built above");
                state.d_ml = d;
                eval.commit(w, d);
                syn.commit(w);
            }
            if is_cw || k == cfg.budget {
                let last_resort = t + 1 == cfg.iterations && !state.d_ml_dec.is_finite();
                let accept = is_cw || cfg.abandonment == Abandonment::Literal || last_resort;
                let cand = candidate.expect("built above");
                if accept && d < state.d_ml_dec {
                    state.c_bar = cand.clone();
                    state.d_ml_dec = d;
                }
                if is_cw {
                    iter_hit = Some((cand, d));
                }
                hit = is_cw;
                break;
            }
        }
        state.llrs_out = synthesize_llrs(&state, &caps, layout, cfg.sign);
        queries.push(k);
        hits.push(hit);
        iteration_hits.push(iter_hit);
    }

    if cfg.verify_selection {
        let best = iteration_hits
            .iter()
            .flatten()
            .map(|(w, _)| (w, eval.full_distance(w)))
            .fold(None::<(&BitWord, T)>, |acc, (w, d)| match acc {
                Some((_, bd)) if bd <= d => acc,
                _ => Some((w, d)),
            });
        if let Some((w, _)) = best {
            if state.d_ml_dec.is_finite() && code.is_codeword(&state.c_bar.prefix(code.n()))? {
                assert_eq!(
                    w, &state.c_bar,
                    "running decoded minimum disagrees with post-hoc selection"
                );
            }
        }
    }

    let decoded = state.c_bar.prefix(code.n());
    let abandoned = !code.is_codeword(&decoded)?;
    let outcome = DecodeOutcome {
        decoded,
        detected: state.c_hat.prefix(code.n()),
        llrs: Some(state.llrs_out.clone()),
        queries_per_iteration: queries,
        hit: hits,
        abandoned,
        distance_evals: eval.evaluations,
        symbol_updates: eval.symbol_updates,
    };
    Ok(TurboResult {
        outcome,
        state,
        recorded,
        iteration_hits,
    })
}

/// Message bits of a decoded word, flagged when the word is not a codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedMessage {
    pub bits: BitWord,
    pub abandoned: bool,
}

pub fn message_bits<T>(outcome: &DecodeOutcome<T>, code: &LinearCode) -> Result<DecodedMessage> {
    Ok(DecodedMessage {
        bits: code.message_bits(&outcome.decoded)?,
        abandoned: outcome.abandoned,
    })
}

/// Which decoder a simulation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    /// Hamming-order GRAND on hard decisions.
    Hard,
    /// Single-pass ORBGRAND on detector LLRs.
    Orbgrand,
    /// Single-pass SGRAND on detector LLRs.
    Sgrand,
    Turbo,
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(DecoderKind::Hard),
            "orbgrand" => Ok(DecoderKind::Orbgrand),
            "sgrand" => Ok(DecoderKind::Sgrand),
            "turbo" => Ok(DecoderKind::Turbo),
            other => Err(Error::Config(format!("unknown decoder {other:?}"))),
        }
    }
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Hard => "hard",
            DecoderKind::Orbgrand => "orbgrand",
            DecoderKind::Sgrand => "sgrand",
            DecoderKind::Turbo => "turbo",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{rayleigh_diag, ChannelRealization, RngStream};
    use crate::detector::{saturation_caps, zf_detect};
    use crate::guesswork::hamming_source;
    use crate::modem::map_word;

    #[test]
    fn hard_grand_hits_codeword_on_first_query() {
        let code = LinearCode::bch_127_113();
        let mut rng = RngStream::new(1, 0);
        let c = code.encode(&BitWord::random(113, &mut rng)).unwrap();
        let out: DecodeOutcome<f64> = hard_grand(&c, &code, &mut hamming_source(127), 10);
        assert_eq!(out.total_queries(), 1);
        assert_eq!(out.decoded, c);
        assert!(!out.abandoned);
    }

    #[test]
    fn hard_grand_abandons_at_budget() {
        let code = LinearCode::bch_127_113();
        let mut r = BitWord::zeros(127);
        for p in [3, 40, 90] {
            r.flip(p);
        }
        let out: DecodeOutcome<f64> = hard_grand(&r, &code, &mut hamming_source(127), 50);
        assert!(out.abandoned);
        assert_eq!(out.total_queries(), 50);
        // the 50th pattern is the single flip of bit 48
        assert_eq!(out.decoded.hamming_distance(&r), 1);
        assert!(out.decoded.get(48) != r.get(48));
    }

    fn bpsk_frame(
        seed: u64,
        snr: f64,
    ) -> (
        LinearCode,
        BitWord,
        Vec<Complex<f64>>,
        ChannelRealization<f64>,
    ) {
        let code = LinearCode::bch_127_113();
        let mut rng = RngStream::new(seed, 0);
        let c = code.encode(&BitWord::random(113, &mut rng)).unwrap();
        let cst = Constellation::bpsk();
        let (x, _) = map_word(&c, &cst);
        let h = rayleigh_diag(127, &mut rng);
        let ch = ChannelRealization::new(h, 1, 1.0 / snr);
        let y = ch.apply(&x, &mut rng).unwrap();
        (code, c, y, ch)
    }

    #[test]
    fn incremental_distance_matches_full() {
        let (_, c, y, ch) = bpsk_frame(3, 4.0);
        let cst = Constellation::bpsk();
        let sv = ch.symbol_variances();
        let mut ev = DistanceEvaluator::new(&y, &ch.h, &sv, &cst, &c).unwrap();
        let flips = [2usize, 17, 100];
        let d = ev.eval(&flips);
        let mut w = c.clone();
        for p in flips {
            w.flip(p);
        }
        let x = map_frame(&w, &cst);
        let full = weighted_distance(&y, &ch.h, &x, &sv).unwrap();
        assert!((d - full).abs() <= 1e-9 * full);
        assert_eq!(ev.symbol_updates, 3);
    }

    #[test]
    fn codeword_base_hits_at_one_with_saturated_llrs() {
        let (code, c, y, ch) = bpsk_frame(5, 1e6);
        let cst = Constellation::bpsk();
        let layout = FrameLayout::new(127, 1);
        let caps = saturation_caps(&ch.v, 127);
        let llr_in = LlrVector::zeros(caps.clone());
        let cfg = TurboConfig {
            iterations: 1,
            ..TurboConfig::default()
        };
        let r = turbo_grand(
            &c,
            &y,
            &ch.h_reported,
            &ch.v,
            &llr_in,
            &code,
            &cst,
            &layout,
            &cfg,
        )
        .unwrap();
        assert_eq!(r.outcome.queries_per_iteration, vec![1]);
        assert_eq!(r.outcome.decoded, c);
        let d_ml = r.state.d_ml;
        for (b, l) in r.outcome.llrs.unwrap().values().iter().enumerate() {
            assert!((l.abs() - (caps[b] - d_ml)).abs() < 1e-9 * caps[b]);
        }
    }

    #[test]
    fn zero_llr_single_iteration_equals_hard_grand() {
        for seed in 0..20 {
            let (code, _, y, ch) = bpsk_frame(100 + seed, 6.0);
            let cst = Constellation::bpsk();
            let layout = FrameLayout::new(127, 1);
            let caps = saturation_caps(&ch.v, 127);
            let sv = ch.symbol_variances();
            let det = zf_detect(&y, &ch.h, &sv, &cst, &layout, &caps).unwrap();
            let cfg = TurboConfig {
                iterations: 1,
                budget: 20_000,
                ..TurboConfig::default()
            };
            let r = turbo_grand(
                &det.hard_word,
                &y,
                &ch.h,
                &ch.v,
                &LlrVector::zeros(caps),
                &code,
                &cst,
                &layout,
                &cfg,
            )
            .unwrap();
            let hard: DecodeOutcome<f64> =
                hard_grand(&det.hard_word, &code, &mut hamming_source(127), 20_000);
            assert_eq!(r.outcome.decoded, hard.decoded, "seed {seed}");
        }
    }
}
