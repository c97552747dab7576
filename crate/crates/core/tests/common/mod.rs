#![allow(dead_code)]

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use turbogrand::bits::BitWord;
use turbogrand::channel::ChannelMatrix;
use turbogrand::code::LinearCode;
use turbogrand::detector::weighted_distance;
use turbogrand::guesswork::reliability_order;
use turbogrand::modem::{map_frame, Constellation};

/// Every codeword, by encoding all `2^k` messages.
pub fn codebook(code: &LinearCode) -> Vec<BitWord> {
    let k = code.k();
    assert!(k <= 20);
    (0u64..1 << k)
        .map(|m| {
            let msg = BitWord::from_bits((0..k).map(|i| (m >> i) & 1 == 1));
            code.encode(&msg).unwrap()
        })
        .collect()
}

/// BPSK over AWGN: returns (sent codeword, hard decisions, |LLR|).
pub fn genie_frame<R: Rng>(
    code: &LinearCode,
    snr: f64,
    rng: &mut R,
) -> (BitWord, BitWord, Vec<f64>) {
    let msg = BitWord::random(code.k(), rng);
    let c = code.encode(&msg).unwrap();
    let sigma = (1.0 / (2.0 * snr)).sqrt();
    let mut hard = BitWord::zeros(code.n());
    let mut mags = Vec::with_capacity(code.n());
    for i in 0..code.n() {
        let x = if c.get(i) { -1.0 } else { 1.0 };
        let n: f64 = rng.sample(StandardNormal);
        let y = x + sigma * n;
        // log P(1)/P(0)
        let llr = -2.0 * y / (sigma * sigma);
        hard.set(i, llr > 0.0);
        mags.push(llr.abs());
    }
    (c, hard, mags)
}

/// Soft ML by exhaustive codebook search: minimizes the summed reliability of
/// the bits a codeword flips relative to `hard`. Costs are summed in
/// ascending-reliability order; ties fall to fewer flips, then to the
/// lexicographically smaller flip-position list.
pub fn soft_ml(book: &[BitWord], hard: &BitWord, mags: &[f64]) -> BitWord {
    let order = reliability_order(mags);
    let mut rank = vec![0; mags.len()];
    for (r, &p) in order.iter().enumerate() {
        rank[p] = r;
    }
    let key = |c: &BitWord| {
        let flips = (c ^ hard).support();
        let mut ranks: Vec<usize> = flips.iter().map(|&p| rank[p]).collect();
        ranks.sort_unstable();
        let cost: f64 = ranks.iter().map(|&r| mags[order[r]]).sum();
        (cost, flips.len(), flips)
    };
    book.iter()
        .map(|c| (key(c), c))
        .min_by(|a, b| {
            a.0 .0
                .partial_cmp(&b.0 .0)
                .unwrap()
                .then(a.0 .1.cmp(&b.0 .1))
                .then(a.0 .2.cmp(&b.0 .2))
        })
        .unwrap()
        .1
        .clone()
}

/// Minimum Hamming distance from `hard` to the codebook.
pub fn min_hamming(book: &[BitWord], hard: &BitWord) -> usize {
    book.iter().map(|c| c.hamming_distance(hard)).min().unwrap()
}

/// Counter-ML reference computed from scratch over a recorded query set.
pub struct CounterMl {
    pub c_hat: BitWord,
    pub d_ml: f64,
    pub llrs: Vec<f64>,
}

/// Recomputes every recorded word's distance, takes the first minimizer as
/// the detected word, and builds each bit's LLR from the closest recorded
/// word disagreeing with it there (capped at the saturation value). Filler
/// bits are pinned to `-cap`.
#[allow(clippy::too_many_arguments)]
pub fn counter_ml(
    words: &[BitWord],
    y: &[Complex<f64>],
    h: &ChannelMatrix<f64>,
    sym_var: &[f64],
    cst: &Constellation<f64>,
    caps: &[f64],
    n_code: usize,
) -> CounterMl {
    let d: Vec<f64> = words
        .iter()
        .map(|w| weighted_distance(y, h, &map_frame(w, cst), sym_var).unwrap())
        .collect();
    let mut best = 0;
    for i in 1..d.len() {
        if d[i] < d[best] {
            best = i;
        }
    }
    let c_hat = words[best].clone();
    let d_ml = d[best];
    let llrs = (0..caps.len())
        .map(|b| {
            if b >= n_code {
                return -caps[b];
            }
            let dc = words
                .iter()
                .zip(&d)
                .filter(|(w, _)| w.get(b) != c_hat.get(b))
                .map(|(_, &dw)| dw)
                .fold(caps[b], f64::min);
            let mag = (dc - d_ml).max(0.0);
            if c_hat.get(b) {
                mag
            } else {
                -mag
            }
        })
        .collect();
    CounterMl { c_hat, d_ml, llrs }
}
