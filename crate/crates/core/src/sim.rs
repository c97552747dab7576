//! Monte Carlo link simulation: encode, pad, map, channel, detect, decode.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::bits::BitWord;
use crate::channel::{sigma2_from_snr_db, ChannelRealization, RngStream};
use crate::code::LinearCode;
use crate::config::{ExperimentConfig, LlrIn};
use crate::decoder::{
    hard_grand, message_bits, turbo_grand, DecodeOutcome, DecoderKind, TurboConfig,
};
use crate::detector::{detect, saturation_caps, DetectorKind, Lattice, LlrVector};
use crate::error::{Error, Result};
use crate::guesswork::{hamming_source, masked, AnySource, SourceKind};
use crate::modem::{map_frame, Constellation, FrameLayout};

pub const CSV_HEADER: [&str; 9] = [
    "snr_db",
    "frames",
    "frame_errors",
    "bit_errors",
    "bler",
    "ber",
    "mean_queries",
    "mean_iters",
    "wall_s",
];

/// Statistics for one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub snr_db: f64,
    pub frames: usize,
    pub frame_errors: usize,
    pub bit_errors: usize,
    pub bler: f64,
    pub ber: f64,
    /// Mean guesswork queries per frame, summed over iterations.
    pub mean_queries: f64,
    pub mean_iters: f64,
    pub wall_s: f64,
    /// Largest per-frame distance evaluation count (not written to CSV).
    pub max_distance_evals: usize,
}

impl SweepRecord {
    /// Mean queries per frame and iteration.
    pub fn queries_per_iteration(&self) -> f64 {
        if self.mean_iters > 0.0 {
            self.mean_queries / self.mean_iters
        } else {
            0.0
        }
    }

    /// Equality of every field except wall-clock time.
    pub fn same_statistics(&self, other: &SweepRecord) -> bool {
        SweepRecord {
            wall_s: 0.0,
            ..self.clone()
        } == SweepRecord {
            wall_s: 0.0,
            ..other.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct FrameStats {
    frame_error: bool,
    bit_errors: usize,
    queries: usize,
    iterations: usize,
    distance_evals: usize,
}

/// A validated experiment, ready to run points.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ExperimentConfig,
    code: LinearCode,
    cst: Constellation<f64>,
    layout: FrameLayout,
}

/// Frames simulated per parallel batch before checking the stopping rule.
const BATCH: usize = 32;

impl Simulator {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let code = cfg.code.build()?;
        let cst = Constellation::new(cfg.modulation);
        let layout = FrameLayout::new(code.n(), cst.bits_per_symbol());
        if cfg.detector == DetectorKind::Ml {
            Lattice::new(&cst, &layout)?;
        }
        Ok(Simulator {
            cfg,
            code,
            cst,
            layout,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    fn turbo_config(&self) -> TurboConfig {
        let d = &self.cfg.decoder;
        TurboConfig {
            budget: d.budget,
            iterations: d.iterations,
            source: d.core,
            abandonment: d.abandonment,
            sign: d.sign,
            dedup: d.dedup,
            ..TurboConfig::default()
        }
    }

    fn run_frame(&self, sigma2: f64, index: u64) -> Result<FrameStats> {
        let cfg = &self.cfg;
        let mut rng = RngStream::new(cfg.seed, index);
        let msg = BitWord::random(self.code.k(), &mut rng);
        let frame = self.layout.pad(&self.code.encode(&msg)?);
        let x = map_frame(&frame, &self.cst);
        let ch = ChannelRealization::draw(
            cfg.channel,
            self.layout.n_symbols,
            self.layout.q,
            sigma2,
            cfg.csi_mix,
            cfg.fading,
            &mut rng,
        )?;
        let y = ch.apply(&x, &mut rng)?;
        let sym_var = ch.symbol_variances();
        let caps = saturation_caps(&ch.v, self.code.n());
        let det = detect(
            cfg.detector,
            &y,
            &ch.h_reported,
            &sym_var,
            &self.cst,
            &self.layout,
            &caps,
        )?;
        let nf = self.layout.frame_bits();
        let pads = &self.layout.pad_positions;
        let budget = cfg.decoder.budget;

        let outcome: DecodeOutcome<f64> = match cfg.decoder.kind {
            DecoderKind::Hard => hard_grand(
                &det.hard_word,
                &self.code,
                &mut masked(hamming_source(nf), pads),
                budget,
            ),
            DecoderKind::Orbgrand | DecoderKind::Sgrand => {
                let kind = if cfg.decoder.kind == DecoderKind::Orbgrand {
                    SourceKind::Orbgrand
                } else {
                    SourceKind::Sgrand
                };
                let src = AnySource::build(
                    kind,
                    &det.llrs.magnitudes(),
                    budget.saturating_mul(2).min(1 << 20),
                );
                hard_grand(&det.hard_word, &self.code, &mut masked(src, pads), budget)
            }
            DecoderKind::Turbo => {
                let llr_in = match cfg.decoder.llr_in {
                    LlrIn::Zero => LlrVector::zeros(caps.clone()),
                    LlrIn::Zf => det.llrs.clone(),
                };
                turbo_grand(
                    &det.hard_word,
                    &y,
                    &ch.h_reported,
                    &ch.v,
                    &llr_in,
                    &self.code,
                    &self.cst,
                    &self.layout,
                    &self.turbo_config(),
                )?
                .outcome
            }
        };
        let decoded = message_bits(&outcome, &self.code)?;
        let bit_errors = decoded.bits.hamming_distance(&msg);
        Ok(FrameStats {
            frame_error: bit_errors > 0,
            bit_errors,
            queries: outcome.total_queries(),
            iterations: outcome.iterations(),
            distance_evals: outcome.distance_evals,
        })
    }

    /// Runs frames until the frame or frame-error budget is reached.
    pub fn run_point(&self, snr_db: f64) -> Result<SweepRecord> {
        let start = Instant::now();
        let sigma2 = sigma2_from_snr_db(snr_db);
        let cfg = &self.cfg;
        let mut frames = 0usize;
        let mut frame_errors = 0usize;
        let mut bit_errors = 0usize;
        let mut queries = 0usize;
        let mut iterations = 0usize;
        let mut max_evals = 0usize;
        'outer: while frames < cfg.max_frames && frame_errors < cfg.max_frame_errors {
            let batch = BATCH.min(cfg.max_frames - frames);
            let first = frames as u64;
            let stats: Vec<FrameStats> = (0..batch as u64)
                .into_par_iter()
                .map(|i| self.run_frame(sigma2, first + i))
                .collect::<Result<_>>()?;
            // accumulate in frame order so the stopping point is schedule-independent
            for s in stats {
                frames += 1;
                frame_errors += s.frame_error as usize;
                bit_errors += s.bit_errors;
                queries += s.queries;
                iterations += s.iterations;
                max_evals = max_evals.max(s.distance_evals);
                if frame_errors >= cfg.max_frame_errors {
                    break 'outer;
                }
            }
        }
        let f = frames.max(1) as f64;
        Ok(SweepRecord {
            snr_db,
            frames,
            frame_errors,
            bit_errors,
            bler: frame_errors as f64 / f,
            ber: bit_errors as f64 / (f * self.code.k() as f64),
            mean_queries: queries as f64 / f,
            mean_iters: iterations as f64 / f,
            wall_s: start.elapsed().as_secs_f64(),
            max_distance_evals: max_evals,
        })
    }
}

fn record_row(r: &SweepRecord) -> [String; 9] {
    [
        r.snr_db.to_string(),
        r.frames.to_string(),
        r.frame_errors.to_string(),
        r.bit_errors.to_string(),
        r.bler.to_string(),
        r.ber.to_string(),
        r.mean_queries.to_string(),
        r.mean_iters.to_string(),
        format!("{:.3}", r.wall_s),
    ]
}

/// Runs every SNR point in order, appending a CSV row after each one when an
/// output path is configured. A zero frame budget yields a header-only file.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    let sim = Simulator::new(cfg.clone())?;
    let mut writer = match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(file);
            w.write_record(CSV_HEADER)
                .map_err(|e| write_error(path, e))?;
            w.flush().map_err(|e| Error::io(path, e))?;
            Some((path.clone(), w))
        }
        None => None,
    };
    let mut records = Vec::new();
    if cfg.max_frames == 0 {
        return Ok(records);
    }
    for &snr in &cfg.snr_db {
        let rec = sim.run_point(snr)?;
        if let Some((path, w)) = writer.as_mut() {
            w.write_record(record_row(&rec))
                .map_err(|e| write_error(path.as_path(), e))?;
            w.flush().map_err(|e| Error::io(path.as_path(), e))?;
        }
        records.push(rec);
    }
    Ok(records)
}

fn write_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

/// Reads a sweep CSV back into records.
pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            row: 1,
            column: String::new(),
            reason: e.to_string(),
        })?
        .clone();
    for (i, want) in CSV_HEADER.iter().enumerate() {
        if headers.get(i) != Some(want) {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                row: 1,
                column: want.to_string(),
                reason: format!("header column {} should be {want:?}", i + 1),
            });
        }
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        // header is row 1
        let row_no = i + 2;
        let row = row.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            row: row_no,
            column: String::new(),
            reason: e.to_string(),
        })?;
        let field = |c: usize| -> Result<f64> {
            let raw = row.get(c).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| Error::Csv {
                path: path.to_path_buf(),
                row: row_no,
                column: CSV_HEADER[c].to_string(),
                reason: format!("not a number: {raw:?}"),
            })
        };
        out.push(SweepRecord {
            snr_db: field(0)?,
            frames: field(1)? as usize,
            frame_errors: field(2)? as usize,
            bit_errors: field(3)? as usize,
            bler: field(4)?,
            ber: field(5)?,
            mean_queries: field(6)?,
            mean_iters: field(7)?,
            wall_s: field(8)?,
            max_distance_evals: 0,
        });
    }
    Ok(out)
}

/// SNR where the BLER curve crosses `target`, interpolating linearly in
/// `log10(BLER)` between the bracketing points. Records must be in
/// increasing SNR order.
pub fn snr_at_bler(records: &[SweepRecord], target: f64) -> Option<f64> {
    let floor = 1e-9;
    let lg = |b: f64| b.max(floor).log10();
    if let Some(first) = records.first() {
        if first.bler <= target {
            return (first.bler == target).then_some(first.snr_db);
        }
    }
    records.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.bler > target && b.bler <= target {
            let t = (lg(a.bler) - lg(target)) / (lg(a.bler) - lg(b.bler));
            Some(a.snr_db + t * (b.snr_db - a.snr_db))
        } else {
            None
        }
    })
}

/// Writes one `key=value` config line per field, suitable for `--config`.
pub fn write_config(cfg: &ExperimentConfig, mut w: impl Write) -> std::io::Result<()> {
    let d = &cfg.decoder;
    writeln!(w, "code={}", cfg.code)?;
    writeln!(w, "mod={}", cfg.modulation.name())?;
    writeln!(w, "channel={}", cfg.channel.name())?;
    writeln!(w, "csi-mix={}", cfg.csi_mix)?;
    writeln!(w, "fading={}", cfg.fading.name())?;
    writeln!(w, "detector={}", cfg.detector.name())?;
    writeln!(w, "decoder={}", d.kind.name())?;
    writeln!(w, "core={}", d.core.name())?;
    writeln!(w, "budget={}", d.budget)?;
    writeln!(w, "iters={}", d.iterations)?;
    writeln!(w, "frames={}", cfg.max_frames)?;
    writeln!(w, "errors={}", cfg.max_frame_errors)?;
    writeln!(w, "seed={}", cfg.seed)
}
