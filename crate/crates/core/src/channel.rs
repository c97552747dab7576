//! Channel realizations: AWGN, Rayleigh flat fading and mismatched CSI.

use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Reproducible random stream keyed by `(seed, stream)`.
///
/// Simulation trials use the frame index as stream id, so serial and parallel
/// runs draw identical samples.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Circularly symmetric complex Gaussian sample with `E|z|^2 = variance`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(variance: T, rng: &mut R) -> Complex<T>
where
    StandardNormal: Distribution<T>,
{
    let s = (variance / T::lit(2.0)).sqrt();
    let re: T = StandardNormal.sample(rng);
    let im: T = StandardNormal.sample(rng);
    Complex::new(re * s, im * s)
}

/// Square channel matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelMatrix<T> {
    Identity(usize),
    Diagonal(Vec<Complex<T>>),
    /// Row-major `m x m` entries.
    Full {
        m: usize,
        entries: Vec<Complex<T>>,
    },
}

impl<T: Real> ChannelMatrix<T> {
    pub fn dim(&self) -> usize {
        match self {
            ChannelMatrix::Identity(m) => *m,
            ChannelMatrix::Diagonal(d) => d.len(),
            ChannelMatrix::Full { m, .. } => *m,
        }
    }

    pub fn full(m: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::Dimension(format!(
                "{} entries for a {m}x{m} matrix",
                entries.len()
            )));
        }
        Ok(ChannelMatrix::Full { m, entries })
    }

    pub fn is_diagonal(&self) -> bool {
        !matches!(self, ChannelMatrix::Full { .. })
    }

    /// Entry `(r, c)`.
    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        match self {
            ChannelMatrix::Identity(_) => {
                if r == c {
                    Complex::new(T::one(), T::zero())
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            }
            ChannelMatrix::Diagonal(d) => {
                if r == c {
                    d[r]
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            }
            ChannelMatrix::Full { m, entries } => entries[r * m + c],
        }
    }

    /// Diagonal entry `i` (the whole gain for diagonal matrices).
    #[inline]
    pub fn diag(&self, i: usize) -> Complex<T> {
        match self {
            ChannelMatrix::Identity(_) => Complex::new(T::one(), T::zero()),
            ChannelMatrix::Diagonal(d) => d[i],
            ChannelMatrix::Full { m, entries } => entries[i * m + i],
        }
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let m = self.dim();
        if x.len() != m {
            return Err(Error::Dimension(format!(
                "vector of length {} for a {m}x{m} channel",
                x.len()
            )));
        }
        Ok(match self {
            ChannelMatrix::Identity(_) => x.to_vec(),
            ChannelMatrix::Diagonal(d) => d.iter().zip(x).map(|(h, x)| h * x).collect(),
            ChannelMatrix::Full { entries, .. } => entries
                .chunks(m)
                .map(|row| row.iter().zip(x).map(|(h, x)| h * x).sum())
                .collect(),
        })
    }

    /// `a * self + b * other`, keeping the diagonal structure when both are.
    pub fn combine(&self, a: T, other: &ChannelMatrix<T>, b: T) -> Result<Self> {
        let m = self.dim();
        if other.dim() != m {
            return Err(Error::Dimension(format!(
                "cannot mix {m}x{m} with {0}x{0}",
                other.dim()
            )));
        }
        if self.is_diagonal() && other.is_diagonal() {
            Ok(ChannelMatrix::Diagonal(
                (0..m)
                    .map(|i| self.diag(i) * a + other.diag(i) * b)
                    .collect(),
            ))
        } else {
            let entries = (0..m * m)
                .map(|idx| self.get(idx / m, idx % m) * a + other.get(idx / m, idx % m) * b)
                .collect();
            Ok(ChannelMatrix::Full { m, entries })
        }
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        let m = self.dim();
        let tiny = T::epsilon() * T::lit(16.0);
        match self {
            ChannelMatrix::Identity(_) => Ok(self.clone()),
            ChannelMatrix::Diagonal(d) => d
                .iter()
                .map(|h| {
                    if h.norm_sqr() <= tiny * tiny {
                        Err(Error::SingularChannel)
                    } else {
                        Ok(h.inv())
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map(ChannelMatrix::Diagonal),
            ChannelMatrix::Full { entries, .. } => {
                let zero = Complex::new(T::zero(), T::zero());
                let one = Complex::new(T::one(), T::zero());
                let mut a = entries.clone();
                let mut inv: Vec<Complex<T>> = (0..m * m)
                    .map(|i| if i / m == i % m { one } else { zero })
                    .collect();
                for col in 0..m {
                    let (p, best) = (col..m)
                        .map(|r| (r, a[r * m + col].norm()))
                        .fold((col, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
                    if best <= tiny {
                        return Err(Error::SingularChannel);
                    }
                    if p != col {
                        for c in 0..m {
                            a.swap(p * m + c, col * m + c);
                            inv.swap(p * m + c, col * m + c);
                        }
                    }
                    let piv = a[col * m + col].inv();
                    for c in 0..m {
                        a[col * m + c] *= piv;
                        inv[col * m + c] *= piv;
                    }
                    for r in 0..m {
                        if r == col {
                            continue;
                        }
                        let f = a[r * m + col];
                        if f == zero {
                            continue;
                        }
                        for c in 0..m {
                            a[r * m + c] = a[r * m + c] - f * a[col * m + c];
                            inv[r * m + c] = inv[r * m + c] - f * inv[col * m + c];
                        }
                    }
                }
                Ok(ChannelMatrix::Full { m, entries: inv })
            }
        }
    }
}

/// How fading gains vary over the symbols of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    /// Independent gain per symbol.
    #[default]
    PerSymbol,
    /// One gain for the whole frame.
    Block,
}

impl FromStr for Fading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-symbol" => Ok(Fading::PerSymbol),
            "block" => Ok(Fading::Block),
            other => Err(Error::Config(format!("unknown fading mode {other:?}"))),
        }
    }
}

impl Fading {
    pub fn name(self) -> &'static str {
        match self {
            Fading::PerSymbol => "per-symbol",
            Fading::Block => "block",
        }
    }
}

/// Diagonal `M x M` channel with i.i.d. unit-variance complex Gaussian gains.
pub fn rayleigh_diag<T: Real, R: Rng + ?Sized>(m: usize, rng: &mut R) -> ChannelMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    ChannelMatrix::Diagonal((0..m).map(|_| complex_gaussian(T::one(), rng)).collect())
}

pub fn rayleigh<T: Real, R: Rng + ?Sized>(m: usize, fading: Fading, rng: &mut R) -> ChannelMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    match fading {
        Fading::PerSymbol => rayleigh_diag(m, rng),
        Fading::Block => ChannelMatrix::Diagonal(vec![complex_gaussian(T::one(), rng); m]),
    }
}

/// `(1 - mix) H + mix * H_tilde`.
pub fn csi_mix<T: Real>(
    h: &ChannelMatrix<T>,
    tilde: &ChannelMatrix<T>,
    mix: T,
) -> Result<ChannelMatrix<T>> {
    h.combine(T::one() - mix, tilde, mix)
}

/// Mismatched channel report with an independent draw of the same law.
pub fn csi_error<T: Real, R: Rng + ?Sized>(
    h: &ChannelMatrix<T>,
    mix: T,
    fading: Fading,
    rng: &mut R,
) -> Result<ChannelMatrix<T>>
where
    StandardNormal: Distribution<T>,
{
    let tilde = rayleigh(h.dim(), fading, rng);
    csi_mix(h, &tilde, mix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelProfile {
    Awgn,
    Rayleigh,
    RayleighCsiErr,
}

impl FromStr for ChannelProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "awgn" => Ok(ChannelProfile::Awgn),
            "rayleigh" => Ok(ChannelProfile::Rayleigh),
            "rayleigh-csi-err" => Ok(ChannelProfile::RayleighCsiErr),
            other => Err(Error::Config(format!("unknown channel profile {other:?}"))),
        }
    }
}

impl ChannelProfile {
    pub fn name(self) -> &'static str {
        match self {
            ChannelProfile::Awgn => "awgn",
            ChannelProfile::Rayleigh => "rayleigh",
            ChannelProfile::RayleighCsiErr => "rayleigh-csi-err",
        }
    }
}

/// One frame's channel: the true matrix, the receiver's view of it and
/// per-bit noise variances `v` (length `M * q`).
#[derive(Debug, Clone)]
pub struct ChannelRealization<T> {
    pub h: ChannelMatrix<T>,
    pub h_reported: ChannelMatrix<T>,
    pub v: Vec<T>,
    pub q: usize,
}

impl<T: Real> ChannelRealization<T> {
    /// Perfect CSI with white noise of variance `sigma2`.
    pub fn new(h: ChannelMatrix<T>, q: usize, sigma2: T) -> Self {
        let n = h.dim() * q;
        ChannelRealization {
            h_reported: h.clone(),
            h,
            v: vec![sigma2; n],
            q,
        }
    }

    /// Per-bit variances; every bit of a symbol must share its variance.
    pub fn with_bit_variances(h: ChannelMatrix<T>, q: usize, v: Vec<T>) -> Result<Self> {
        if v.len() != h.dim() * q {
            return Err(Error::LengthMismatch {
                expected: h.dim() * q,
                got: v.len(),
            });
        }
        if let Some(i) = v
            .iter()
            .position(|&s| s.is_nan() || s <= T::zero() || !s.is_finite())
        {
            return Err(Error::NonPositiveVariance(i));
        }
        Ok(ChannelRealization {
            h_reported: h.clone(),
            h,
            v,
            q,
        })
    }

    /// Draws a realization for the named profile.
    pub fn draw<R: Rng + ?Sized>(
        profile: ChannelProfile,
        m: usize,
        q: usize,
        sigma2: T,
        csi_mix: T,
        fading: Fading,
        rng: &mut R,
    ) -> Result<Self>
    where
        StandardNormal: Distribution<T>,
    {
        let h = match profile {
            ChannelProfile::Awgn => ChannelMatrix::Identity(m),
            _ => rayleigh(m, fading, rng),
        };
        let mut ch = Self::new(h, q, sigma2);
        if profile == ChannelProfile::RayleighCsiErr {
            ch.h_reported = csi_error(&ch.h, csi_mix, fading, rng)?;
        }
        Ok(ch)
    }

    pub fn symbol_variance(&self, i: usize) -> T {
        self.v[i * self.q]
    }

    pub fn symbol_variances(&self) -> Vec<T> {
        symbol_variances(&self.v, self.q)
    }

    /// `y = H x + n` with `E|n_i|^2` the variance of symbol `i`.
    pub fn apply<R: Rng + ?Sized>(&self, x: &[Complex<T>], rng: &mut R) -> Result<Vec<Complex<T>>>
    where
        StandardNormal: Distribution<T>,
    {
        let mut y = self.h.mul_vec(x)?;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += complex_gaussian(self.symbol_variance(i), rng);
        }
        Ok(y)
    }
}

/// Collapses per-bit variances to one per symbol (first bit of each symbol).
pub fn symbol_variances<T: Real>(v: &[T], q: usize) -> Vec<T> {
    v.iter().step_by(q).copied().collect()
}

/// Noise variance `1/SNR` for an SNR in dB.
pub fn sigma2_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}
