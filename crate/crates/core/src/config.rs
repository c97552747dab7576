//! Experiment configuration: flat `key=value` files and flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::{ChannelProfile, Fading};
use crate::code::LinearCode;
use crate::decoder::{Abandonment, DecoderKind, LlrSign};
use crate::detector::DetectorKind;
use crate::error::{Error, Result};
use crate::guesswork::SourceKind;
use crate::modem::Modulation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeSpec {
    /// The binary BCH [127,113] code.
    Bch127,
    /// Generator matrix rows read from a text file.
    File(PathBuf),
    /// Random systematic code.
    Random { n: usize, k: usize, seed: u64 },
    /// No coding: every word of length `n` is a codeword.
    Uncoded(usize),
}

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad code spec {s:?}"));
        if s == "bch127" {
            return Ok(CodeSpec::Bch127);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(CodeSpec::File(PathBuf::from(path)));
        }
        if let Some(n) = s.strip_prefix("uncoded:") {
            return n.trim().parse().map(CodeSpec::Uncoded).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            return Ok(CodeSpec::Random {
                n: parts[0].parse().map_err(|_| bad())?,
                k: parts[1].parse().map_err(|_| bad())?,
                seed: parts[2].parse().map_err(|_| bad())?,
            });
        }
        Err(bad())
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Bch127 => write!(f, "bch127"),
            CodeSpec::File(p) => write!(f, "file:{}", p.display()),
            CodeSpec::Random { n, k, seed } => write!(f, "random:{n},{k},{seed}"),
            CodeSpec::Uncoded(n) => write!(f, "uncoded:{n}"),
        }
    }
}

impl CodeSpec {
    pub fn build(&self) -> Result<LinearCode> {
        match self {
            CodeSpec::Bch127 => Ok(LinearCode::bch_127_113()),
            CodeSpec::File(p) => LinearCode::load_generator(p),
            CodeSpec::Random { n, k, seed } => LinearCode::random(*n, *k, *seed),
            CodeSpec::Uncoded(n) => LinearCode::uncoded(*n),
        }
    }
}

/// Input LLRs for the first turbo iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LlrIn {
    #[default]
    Zero,
    Zf,
}

impl FromStr for LlrIn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(LlrIn::Zero),
            "zf" => Ok(LlrIn::Zf),
            other => Err(Error::Config(format!("unknown llr-in mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderSpec {
    pub kind: DecoderKind,
    /// Pattern source inside turbo iterations.
    pub core: SourceKind,
    pub budget: usize,
    pub iterations: usize,
    pub llr_in: LlrIn,
    pub abandonment: Abandonment,
    pub sign: LlrSign,
    pub dedup: bool,
}

impl Default for DecoderSpec {
    fn default() -> Self {
        DecoderSpec {
            kind: DecoderKind::Turbo,
            core: SourceKind::Sgrand,
            budget: 100_000,
            iterations: 2,
            llr_in: LlrIn::Zero,
            abandonment: Abandonment::Literal,
            sign: LlrSign::LogP1OverP0,
            dedup: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub code: CodeSpec,
    pub modulation: Modulation,
    pub channel: ChannelProfile,
    pub csi_mix: f64,
    pub fading: Fading,
    pub detector: DetectorKind,
    pub decoder: DecoderSpec,
    pub snr_db: Vec<f64>,
    pub max_frames: usize,
    pub max_frame_errors: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            code: CodeSpec::Bch127,
            modulation: Modulation::Bpsk,
            channel: ChannelProfile::Rayleigh,
            csi_mix: 0.1,
            fading: Fading::PerSymbol,
            detector: DetectorKind::Zf,
            decoder: DecoderSpec::default(),
            snr_db: vec![10.0],
            max_frames: 100_000,
            max_frame_errors: 100,
            seed: 1,
            out: None,
        }
    }
}

/// Parses `start:step:stop` (inclusive) or a single value.
pub fn parse_snr_range(s: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::Config(format!("bad snr range {s:?}: {why}"));
    let nums: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad("not a number")))
        .collect::<Result<_>>()?;
    match nums[..] {
        [x] => Ok(vec![x]),
        [start, step, stop] => {
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(bad("need step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + step * i as f64).collect())
        }
        _ => Err(bad("expected start:step:stop")),
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("bad value {value:?} for {key}"))),
    }
}

impl ExperimentConfig {
    /// Sets one field by its flag name (without leading dashes).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "code" => self.code = value.parse()?,
            "mod" => self.modulation = value.parse()?,
            "channel" => self.channel = value.parse()?,
            "csi-mix" => self.csi_mix = parse_num(key, value)?,
            "fading" => self.fading = value.parse()?,
            "detector" => self.detector = value.parse()?,
            "decoder" => self.decoder.kind = value.parse()?,
            "core" => self.decoder.core = value.parse()?,
            "budget" => self.decoder.budget = parse_num::<f64>(key, value)? as usize,
            "iters" => self.decoder.iterations = parse_num(key, value)?,
            "llr-in" => self.decoder.llr_in = value.parse()?,
            "abandonment" => {
                self.decoder.abandonment = match value {
                    "literal" => Abandonment::Literal,
                    "conservative" => Abandonment::Conservative,
                    _ => return Err(Error::Config(format!("bad value {value:?} for {key}"))),
                }
            }
            "llr-sign" => {
                self.decoder.sign = match value {
                    "p1-over-p0" => LlrSign::LogP1OverP0,
                    "inverted" => LlrSign::Inverted,
                    _ => return Err(Error::Config(format!("bad value {value:?} for {key}"))),
                }
            }
            "dedup" => self.decoder.dedup = parse_bool(key, value)?,
            "snr" => self.snr_db = parse_snr_range(value)?,
            "frames" => self.max_frames = parse_num::<f64>(key, value)? as usize,
            "errors" => self.max_frame_errors = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.max_frame_errors < 1 {
            return fail("errors must be at least 1".into());
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return fail("snr list must be nonempty and finite".into());
        }
        if self.decoder.budget < 1 {
            return fail("budget must be at least 1".into());
        }
        if self.decoder.iterations < 1 {
            return fail("iters must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.csi_mix) {
            return fail(format!("csi-mix {} outside [0, 1]", self.csi_mix));
        }
        Ok(())
    }
}
