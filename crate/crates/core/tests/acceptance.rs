//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance`.

mod common;

use std::collections::HashSet;
use std::io::Write;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

use turbogrand::bits::BitWord;
use turbogrand::channel::{
    sigma2_from_snr_db, ChannelProfile, ChannelRealization, Fading, RngStream,
};
use turbogrand::code::LinearCode;
use turbogrand::config::{CodeSpec, ExperimentConfig, LlrIn};
use turbogrand::decoder::{hard_grand, turbo_grand, DecodeOutcome, DecoderKind, TurboConfig};
use turbogrand::detector::{saturation_caps, zf_detect, LlrVector};
use turbogrand::guesswork::{
    distinct_partitions, hamming_source, orb_source, sgrand_source, PatternSource, SourceKind,
};
use turbogrand::modem::{map_frame, Constellation, FrameLayout, Modulation};
use turbogrand::sim::{snr_at_bler, Simulator, SweepRecord};

const TARGET_BLER: f64 = 1e-2;
const ORACLE_TRIALS: usize = 10_000;
const ORACLE_RUNTIME: Duration = Duration::from_secs(60);
const COUNTER_ML_FRAMES: u64 = 1_000;
const COUNTER_ML_TOL: f64 = 1e-9;
const COUNTER_ML_RUNTIME: Duration = Duration::from_secs(120);
const SOURCE_MAX_N: usize = 14;
const ORB_CLASS_MAX_WEIGHT: usize = 12;
const SOURCE_RUNTIME: Duration = Duration::from_secs(60);
const BER_REL_TOL: f64 = 0.05;
const BER_MIN_BITS: usize = 1_000_000;
const BER_RUNTIME: Duration = Duration::from_secs(60);
const FADING_GAIN_DB: f64 = 6.0 - 1.0;
const MATCH_TOL_DB: f64 = 0.75;
const THIRD_ITER_MAX_DB: f64 = 0.25;
const SWEEP_RUNTIME: Duration = Duration::from_secs(30 * 60);
const HIGH_SNR_QUERIES_PER_ITER: f64 = 1.05;
const CSI_GAIN_DB: f64 = 0.5;
const FRAME_ERRORS: usize = 100;
const MAX_FRAMES: usize = 100_000;
const BUDGET: usize = 100_000;
const SEED: u64 = 2024;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

fn small_codes() -> Vec<LinearCode> {
    (0..20)
        .map(|s| LinearCode::random(16, 8, 100 + s).unwrap())
        .collect()
}

/// 1: SGRAND-ordered hard GRAND equals exhaustive soft ML.
fn soft_ml_oracle() -> Verdict {
    let start = Instant::now();
    let codes = small_codes();
    let books: Vec<_> = codes.iter().map(common::codebook).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut agree = 0;
    for t in 0..ORACLE_TRIALS {
        let i = t % codes.len();
        let snr = [0.5, 1.0, 2.0, 4.0][t % 4];
        let (_, hard, mags) = common::genie_frame(&codes[i], snr, &mut rng);
        let out: DecodeOutcome<f64> =
            hard_grand(&hard, &codes[i], &mut sgrand_source(&mags), 1 << 16);
        if !out.abandoned && out.decoded == common::soft_ml(&books[i], &hard, &mags) {
            agree += 1;
        }
    }
    let el = start.elapsed();
    verdict(
        agree == ORACLE_TRIALS && el < ORACLE_RUNTIME,
        format!(
            "{agree}/{ORACLE_TRIALS} trials agree with codebook soft ML ({})",
            secs(el)
        ),
    )
}

/// 2: Hamming-ordered hard GRAND returns a nearest codeword.
fn hamming_oracle() -> Verdict {
    let start = Instant::now();
    let codes = small_codes();
    let books: Vec<_> = codes.iter().map(common::codebook).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut agree = 0;
    for t in 0..ORACLE_TRIALS {
        let i = t % codes.len();
        let (_, hard, _) = common::genie_frame(&codes[i], [0.5, 1.0, 2.0][t % 3], &mut rng);
        let out: DecodeOutcome<f64> =
            hard_grand(&hard, &codes[i], &mut hamming_source(16), 1 << 16);
        let ok = !out.abandoned
            && codes[i].is_codeword(&out.decoded).unwrap()
            && out.decoded.hamming_distance(&hard) == common::min_hamming(&books[i], &hard);
        agree += ok as usize;
    }
    let el = start.elapsed();
    verdict(
        agree == ORACLE_TRIALS && el < ORACLE_RUNTIME,
        format!(
            "{agree}/{ORACLE_TRIALS} trials return a minimum-distance codeword ({})",
            secs(el)
        ),
    )
}

/// 3: on-the-fly LLRs equal a from-scratch recomputation over recorded queries.
fn counter_ml_exactness() -> Verdict {
    let start = Instant::now();
    let code = LinearCode::bch_127_113();
    let cst = Constellation::<f64>::bpsk();
    let layout = FrameLayout::new(127, 1);
    let cfg = TurboConfig {
        budget: 1_000,
        iterations: 2,
        record_queries: true,
        verify_selection: true,
        ..TurboConfig::default()
    };
    let mut exact = 0;
    let mut worst: f64 = 0.0;
    let mut queries = 0usize;
    for f in 0..COUNTER_ML_FRAMES {
        let mut rng = RngStream::new(SEED, f);
        let snr_db = [6.0, 9.0, 12.0][f as usize % 3];
        let c = code.encode(&BitWord::random(113, &mut rng)).unwrap();
        let ch = ChannelRealization::draw(
            ChannelProfile::Rayleigh,
            127,
            1,
            sigma2_from_snr_db(snr_db),
            0.0,
            Fading::PerSymbol,
            &mut rng,
        )
        .unwrap();
        let y = ch.apply(&map_frame(&c, &cst), &mut rng).unwrap();
        let sv = ch.symbol_variances();
        let caps = saturation_caps(&ch.v, 127);
        let det = zf_detect(&y, &ch.h_reported, &sv, &cst, &layout, &caps).unwrap();
        let r = turbo_grand(
            &det.hard_word,
            &y,
            &ch.h_reported,
            &ch.v,
            &LlrVector::zeros(caps.clone()),
            &code,
            &cst,
            &layout,
            &cfg,
        )
        .unwrap();
        let rec = r.recorded.unwrap();
        queries += rec.len();
        let words: Vec<BitWord> = rec.into_iter().map(|(w, _)| w).collect();
        let oracle = common::counter_ml(&words, &y, &ch.h_reported, &sv, &cst, &caps, 127);
        let got = r.outcome.llrs.unwrap();
        let mut frame_ok = oracle.c_hat == r.state.c_hat;
        for (&g, &o) in got.values().iter().zip(&oracle.llrs) {
            let rel = (g - o).abs() / (o.abs() + oracle.d_ml).max(1.0);
            worst = worst.max(rel);
            frame_ok &= rel <= COUNTER_ML_TOL && (g == 0.0 || o == 0.0 || g.signum() == o.signum());
        }
        exact += frame_ok as usize;
    }
    let el = start.elapsed();
    verdict(
        exact as u64 == COUNTER_ML_FRAMES && el < COUNTER_ML_RUNTIME,
        format!(
            "{exact}/{COUNTER_ML_FRAMES} frames match, {queries} recorded queries, worst relative gap {worst:.1e} ({})",
            secs(el)
        ),
    )
}

fn exhausts_once(src: &mut impl PatternSource, n: usize) -> bool {
    let mut seen = HashSet::new();
    while let Some(p) = src.next_pattern() {
        let mask: u32 = p.iter().map(|&i| 1u32 << i).sum();
        if !seen.insert(mask) {
            return false;
        }
    }
    seen.len() == 1 << n
}

/// 4: pattern sources are complete, duplicate-free and correctly ordered.
fn source_properties() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut failures = Vec::new();
    for n in 1..=SOURCE_MAX_N {
        let mags: Vec<f64> = (0..n)
            .map(|_| rand::Rng::random_range(&mut rng, 0.0..4.0))
            .collect();
        if !exhausts_once(&mut hamming_source(n), n) {
            failures.push(format!("hamming n={n}"));
        }
        if !exhausts_once(&mut orb_source(&mags), n) {
            failures.push(format!("orbgrand n={n}"));
        }
        if !exhausts_once(&mut sgrand_source(&mags), n) {
            failures.push(format!("sgrand n={n}"));
        }
        let mut s = sgrand_source(&mags);
        let mut last = f64::NEG_INFINITY;
        while let Some(p) = s.next_pattern() {
            let mut m: Vec<f64> = p.iter().map(|&i| mags[i]).collect();
            m.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let w: f64 = m.iter().sum();
            if w < last {
                failures.push(format!("sgrand weight decreased n={n}"));
                break;
            }
            last = w;
        }
        let order = turbogrand::guesswork::reliability_order(&mags);
        let mut rank = vec![0; n];
        for (r, &p) in order.iter().enumerate() {
            rank[p] = r + 1;
        }
        let mut o = orb_source(&mags);
        let mut last = 0;
        let mut class_sizes = vec![0usize; n * (n + 1) / 2 + 1];
        while let Some(p) = o.next_pattern() {
            let w: usize = p.iter().map(|&i| rank[i]).sum();
            if w < last {
                failures.push(format!("orbgrand weight decreased n={n}"));
                break;
            }
            last = w;
            class_sizes[w] += 1;
        }
        #[allow(clippy::needless_range_loop)]
        for w in 0..=ORB_CLASS_MAX_WEIGHT.min(n * (n + 1) / 2) {
            let brute = (0u32..1 << n)
                .filter(|m| {
                    (0..n)
                        .filter(|i| m >> i & 1 == 1)
                        .map(|i| i + 1)
                        .sum::<usize>()
                        == w
                })
                .count();
            let mut parts = 0;
            distinct_partitions(w, n, &mut |_| parts += 1);
            if class_sizes[w] != brute || parts != brute {
                failures.push(format!(
                    "orbgrand class {w} n={n}: {} vs {brute}",
                    class_sizes[w]
                ));
            }
        }
    }
    let el = start.elapsed();
    verdict(
        failures.is_empty() && el < SOURCE_RUNTIME,
        if failures.is_empty() {
            format!(
                "all sources for n <= {SOURCE_MAX_N} exhaust exactly once in order ({})",
                secs(el)
            )
        } else {
            format!("failures: {} ({})", failures.join("; "), secs(el))
        },
    )
}

/// 5: uncoded BPSK over AWGN matches the Gaussian tail.
fn awgn_sanity() -> Verdict {
    let start = Instant::now();
    let snr_db = 4.32;
    let snr = 10f64.powf(snr_db / 10.0);
    let theory = 0.5 * erfc(snr.sqrt());
    let mut cfg = ExperimentConfig {
        code: CodeSpec::Uncoded(1000),
        channel: ChannelProfile::Awgn,
        max_frames: 2 * BER_MIN_BITS / 1000,
        max_frame_errors: usize::MAX,
        seed: SEED,
        ..ExperimentConfig::default()
    };
    cfg.decoder.kind = DecoderKind::Hard;
    cfg.decoder.budget = 1;
    let r = Simulator::new(cfg).unwrap().run_point(snr_db).unwrap();
    let bits = r.frames * 1000;
    let rel = (r.ber - theory).abs() / theory;
    let el = start.elapsed();
    verdict(
        rel <= BER_REL_TOL && bits >= BER_MIN_BITS && el < BER_RUNTIME,
        format!(
            "BER {:.4e} vs Q(sqrt(2 SNR)) = {theory:.4e} at {snr_db} dB, {:.1}% off over {bits} bits ({})",
            r.ber,
            100.0 * rel,
            secs(el)
        ),
    )
}

fn rayleigh_config(kind: DecoderKind, iterations: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        channel: ChannelProfile::Rayleigh,
        modulation: Modulation::Bpsk,
        max_frames: MAX_FRAMES,
        max_frame_errors: FRAME_ERRORS,
        seed: SEED,
        ..ExperimentConfig::default()
    };
    cfg.decoder.kind = kind;
    cfg.decoder.iterations = iterations;
    cfg.decoder.budget = BUDGET;
    cfg
}

struct Curve {
    records: Vec<SweepRecord>,
    wall: Duration,
}

impl Curve {
    fn snr(&self) -> Option<f64> {
        snr_at_bler(&self.records, TARGET_BLER)
    }

    fn describe(&self) -> String {
        match self.snr() {
            Some(s) => format!("{s:.2} dB"),
            None => "no crossing".into(),
        }
    }
}

/// Sweeps upward and stops after the first point below the target BLER.
fn sweep(cfg: ExperimentConfig, start: f64, step: f64, stop: f64) -> Curve {
    let t0 = Instant::now();
    let sim = Simulator::new(cfg).unwrap();
    let mut records = Vec::new();
    let mut snr = start;
    while snr <= stop + 1e-9 {
        let r = sim.run_point(snr).unwrap();
        let done = r.bler < TARGET_BLER;
        records.push(r);
        if done {
            break;
        }
        snr += step;
    }
    Curve {
        records,
        wall: t0.elapsed(),
    }
}

fn hard_curve() -> &'static Curve {
    static C: OnceLock<Curve> = OnceLock::new();
    C.get_or_init(|| sweep(rayleigh_config(DecoderKind::Hard, 1), 14.0, 1.0, 24.0))
}

fn turbo_curve(iterations: usize) -> &'static Curve {
    static T2: OnceLock<Curve> = OnceLock::new();
    static T3: OnceLock<Curve> = OnceLock::new();
    let cell = if iterations == 2 { &T2 } else { &T3 };
    cell.get_or_init(|| {
        sweep(
            rayleigh_config(DecoderKind::Turbo, iterations),
            8.0,
            0.5,
            16.0,
        )
    })
}

fn sgrand_curve() -> &'static Curve {
    static C: OnceLock<Curve> = OnceLock::new();
    C.get_or_init(|| sweep(rayleigh_config(DecoderKind::Sgrand, 1), 8.0, 0.5, 16.0))
}

/// 6: turbo-GRAND gains over hard GRAND on Rayleigh fading.
fn fading_gain() -> Verdict {
    let (h, t) = (hard_curve(), turbo_curve(2));
    let wall = h.wall + t.wall;
    let pass = match (h.snr(), t.snr()) {
        (Some(a), Some(b)) => a - b >= FADING_GAIN_DB && wall < SWEEP_RUNTIME,
        _ => false,
    };
    let gain = h.snr().zip(t.snr()).map(|(a, b)| a - b).unwrap_or(f64::NAN);
    verdict(
        pass,
        format!(
            "hard {} vs turbo T=2 {}: gain {gain:.2} dB, need >= {FADING_GAIN_DB} ({})",
            h.describe(),
            t.describe(),
            secs(wall)
        ),
    )
}

/// 7: turbo-GRAND matches SGRAND with exact LLRs.
fn matches_exact_llrs() -> Verdict {
    let (s, t) = (sgrand_curve(), turbo_curve(2));
    let gap = s
        .snr()
        .zip(t.snr())
        .map(|(a, b)| (b - a).abs())
        .unwrap_or(f64::NAN);
    verdict(
        gap <= MATCH_TOL_DB && s.wall < SWEEP_RUNTIME,
        format!(
            "sgrand with exact LLRs {} vs turbo T=2 {}: gap {gap:.2} dB, need <= {MATCH_TOL_DB} ({})",
            s.describe(),
            t.describe(),
            secs(s.wall)
        ),
    )
}

/// 8: a third iteration adds little.
fn two_iterations_suffice() -> Verdict {
    let (t2, t3) = (turbo_curve(2), turbo_curve(3));
    let gain = t2
        .snr()
        .zip(t3.snr())
        .map(|(a, b)| a - b)
        .unwrap_or(f64::NAN);
    verdict(
        gain < THIRD_ITER_MAX_DB,
        format!(
            "T=2 {} vs T=3 {}: third iteration gains {gain:.2} dB, need < {THIRD_ITER_MAX_DB} ({})",
            t2.describe(),
            t3.describe(),
            secs(t3.wall)
        ),
    )
}

/// 9: distance evaluations bounded by T*B; about one query per iteration at
/// high SNR on AWGN.
fn complexity_accounting() -> Verdict {
    let mut worst_ratio: f64 = 0.0;
    for (curve, t) in [(turbo_curve(2), 2), (turbo_curve(3), 3)] {
        for r in &curve.records {
            worst_ratio = worst_ratio.max(r.max_distance_evals as f64 / (t * BUDGET) as f64);
        }
    }
    let mut cfg = rayleigh_config(DecoderKind::Turbo, 2);
    cfg.channel = ChannelProfile::Awgn;
    cfg.max_frames = 2_000;
    let sim = Simulator::new(cfg).unwrap();
    let records: Vec<SweepRecord> = [4.0, 6.0, 8.0, 10.0]
        .iter()
        .map(|&s| sim.run_point(s).unwrap())
        .collect();
    for r in &records {
        worst_ratio = worst_ratio.max(r.max_distance_evals as f64 / (2 * BUDGET) as f64);
    }
    let top = records.last().unwrap();
    let qpi = top.queries_per_iteration();
    verdict(
        worst_ratio <= 1.0 && qpi <= HIGH_SNR_QUERIES_PER_ITER,
        format!(
            "max distance evaluations {:.3} of T*B; {qpi:.3} queries per iteration at {} dB on AWGN, need <= {HIGH_SNR_QUERIES_PER_ITER}",
            worst_ratio, top.snr_db
        ),
    )
}

/// 10: with a mismatched channel estimate, turbo ORBGRAND from ZF input
/// beats single-pass ZF ORBGRAND.
fn csi_error_ordering() -> Verdict {
    let base = |kind| {
        let mut cfg = rayleigh_config(kind, 2);
        cfg.channel = ChannelProfile::RayleighCsiErr;
        cfg.csi_mix = 0.1;
        cfg.decoder.core = SourceKind::Orbgrand;
        cfg.decoder.llr_in = LlrIn::Zf;
        cfg
    };
    let orb = sweep(base(DecoderKind::Orbgrand), 9.0, 0.5, 18.0);
    let turbo = sweep(base(DecoderKind::Turbo), 9.0, 0.5, 18.0);
    let gain = orb
        .snr()
        .zip(turbo.snr())
        .map(|(a, b)| a - b)
        .unwrap_or(f64::NAN);
    verdict(
        gain >= CSI_GAIN_DB,
        format!(
            "ZF ORBGRAND {} vs turbo ORBGRAND (ZF input, T=2) {}: gain {gain:.2} dB, need >= {CSI_GAIN_DB} ({})",
            orb.describe(),
            turbo.describe(),
            secs(orb.wall + turbo.wall)
        ),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Verdict;
    let criteria: [(&str, Check); 10] = [
        ("soft-ML oracle equivalence", soft_ml_oracle),
        ("Hamming-order oracle", hamming_oracle),
        ("counter-ML exactness", counter_ml_exactness),
        ("pattern-source properties", source_properties),
        ("AWGN sanity", awgn_sanity),
        ("fading gain over hard GRAND", fading_gain),
        ("match with exact-LLR SGRAND", matches_exact_llrs),
        ("two-iteration convergence", two_iterations_suffice),
        ("complexity accounting", complexity_accounting),
        ("CSI-error ordering", csi_error_ordering),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        failed += !v.pass as usize;
        let _ = writeln!(
            out,
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        let _ = out.flush();
    }
    let _ = writeln!(
        out,
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
