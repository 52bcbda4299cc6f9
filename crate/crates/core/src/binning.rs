//! Random binning codes for distributed lossless compression.
//!
//! Two encoders each hash their symbol into `2^ℓ` bins; the decoder looks for the unique
//! pair of a truncated support inside the received bin product. Errors of a realized code
//! are computed exactly by enumerating the source alphabet, so the only randomness left in
//! a sweep is the draw of the bin tables themselves.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::prob::{log2, JointDist, MassFunction, DERIVED_TOL};
use crate::smooth::{smooth_h0, smooth_h0_cond, sw_truncation, SubWeighting, Truncation};

/// Largest supported bin exponent; bin indices are stored as `u64`.
pub const MAX_ELL: u32 = 63;

/// A map from symbols to bin indices in `0..2^ℓ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinAssignment {
    bins: Vec<u64>,
    ell: u32,
}

impl BinAssignment {
    pub fn new(bins: Vec<u64>, ell: u32) -> Result<Self> {
        if ell > MAX_ELL {
            return Err(Error::param(format!("bin exponent {ell} exceeds {MAX_ELL}")));
        }
        if let Some(&b) = bins.iter().find(|&&b| b >> ell != 0) {
            return Err(Error::param(format!("bin index {b} does not fit in {ell} bits")));
        }
        Ok(Self { bins, ell })
    }

    /// Independent uniform bins for `n` symbols.
    pub fn random<R: Rng + ?Sized>(n: usize, ell: u32, rng: &mut R) -> Result<Self> {
        if ell > MAX_ELL {
            return Err(Error::param(format!("bin exponent {ell} exceeds {MAX_ELL}")));
        }
        let bins = if ell == 0 {
            vec![0; n]
        } else {
            let mask = u64::MAX >> (64 - ell);
            (0..n).map(|_| rng.gen::<u64>() & mask).collect()
        };
        Ok(Self { bins, ell })
    }

    /// Every symbol in its own bin, using the smallest exponent that allows it.
    pub fn singletons(n: usize) -> Self {
        let ell = (n.max(1) as u64).next_power_of_two().trailing_zeros();
        Self {
            bins: (0..n as u64).collect(),
            ell,
        }
    }

    #[inline]
    pub fn bin(&self, symbol: usize) -> u64 {
        self.bins[symbol]
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// An error probability with the way it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub error_prob: f64,
    pub method: Method,
    pub trials: u64,
    /// Three standard errors for Monte-Carlo estimates, zero for exact values.
    pub confidence_radius: f64,
}

impl ErrorReport {
    pub fn exact(error_prob: f64) -> Self {
        Self {
            error_prob: error_prob.clamp(0.0, 1.0),
            method: Method::Exact,
            trials: 1,
            confidence_radius: 0.0,
        }
    }

    /// Mean of per-trial values in `[0, 1]` with a 3σ radius from the sample variance.
    pub fn monte_carlo(samples: &[f64]) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            error_prob: mean.clamp(0.0, 1.0),
            method: Method::MonteCarlo,
            trials: samples.len() as u64,
            confidence_radius: 3.0 * (var / n).sqrt(),
        }
    }
}

/// What the decoder found in a bin product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell<T> {
    Unique(T),
    Ambiguous,
}

fn insert<K: std::hash::Hash + Eq, T>(map: &mut HashMap<K, Cell<T>>, key: K, value: T) {
    map.entry(key)
        .and_modify(|c| *c = Cell::Ambiguous)
        .or_insert(Cell::Unique(value));
}

/// Any realized two-encoder code that tries to recover both sources.
pub trait DistributedCode {
    fn ell_a(&self) -> u32;
    fn ell_b(&self) -> u32;
    /// The decoder's output on the messages produced by `(x, y)`.
    fn reconstruct(&self, x: usize, y: usize) -> Option<(usize, usize)>;
}

/// A random binning code with the truncated-support joint decoder.
#[derive(Debug, Clone)]
pub struct SWCode {
    pub bin_a: BinAssignment,
    pub bin_b: BinAssignment,
    pub q: SubWeighting,
    lookup: HashMap<(u64, u64), Cell<(usize, usize)>>,
}

impl SWCode {
    pub fn from_parts(bin_a: BinAssignment, bin_b: BinAssignment, q: SubWeighting) -> Self {
        let cols = bin_b.len();
        let mut lookup = HashMap::new();
        for (i, &w) in q.weights().iter().enumerate() {
            if w > 0.0 {
                let (x, y) = (i / cols, i % cols);
                insert(&mut lookup, (bin_a.bin(x), bin_b.bin(y)), (x, y));
            }
        }
        Self {
            bin_a,
            bin_b,
            q,
            lookup,
        }
    }

    /// The unique truncated-support pair in bin product `(i, k)`, if there is exactly one.
    pub fn sw_decode(&self, i: u64, k: u64) -> Option<(usize, usize)> {
        match self.lookup.get(&(i, k)) {
            Some(Cell::Unique(pair)) => Some(*pair),
            _ => None,
        }
    }
}

impl DistributedCode for SWCode {
    fn ell_a(&self) -> u32 {
        self.bin_a.ell()
    }

    fn ell_b(&self) -> u32 {
        self.bin_b.ell()
    }

    fn reconstruct(&self, x: usize, y: usize) -> Option<(usize, usize)> {
        self.sw_decode(self.bin_a.bin(x), self.bin_b.bin(y))
    }
}

pub fn build_sw_code<R: Rng + ?Sized>(
    j: &JointDist,
    ell_a: u32,
    ell_b: u32,
    eps: f64,
    rng: &mut R,
) -> Result<SWCode> {
    let t = sw_truncation(j, eps)?;
    build_sw_code_with(j, &t, ell_a, ell_b, rng)
}

/// Same as [`build_sw_code`] with a truncation computed once and reused across draws.
pub fn build_sw_code_with<R: Rng + ?Sized>(
    j: &JointDist,
    t: &Truncation,
    ell_a: u32,
    ell_b: u32,
    rng: &mut R,
) -> Result<SWCode> {
    let bin_a = BinAssignment::random(j.rows(), ell_a, rng)?;
    let bin_b = BinAssignment::random(j.cols(), ell_b, rng)?;
    Ok(SWCode::from_parts(bin_a, bin_b, t.q.clone()))
}

/// Exact error of a binning code plus the probabilities of the four proof events:
/// the pair falls outside the truncated support (`e1`), another support pair shares the
/// row bin and column symbol (`e2`), the column bin and row symbol (`e3`), or both bins
/// with both symbols different (`e4`). The events overlap; `report` is their union.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwErrorBreakdown {
    pub report: ErrorReport,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
}

fn count<K: std::hash::Hash + Eq>(map: &HashMap<K, i64>, key: &K) -> i64 {
    map.get(key).copied().unwrap_or(0)
}

pub fn sw_exact_error(code: &SWCode, j: &JointDist) -> Result<SwErrorBreakdown> {
    let (rows, cols) = (j.rows(), j.cols());
    if (code.bin_a.len(), code.bin_b.len()) != (rows, cols) {
        return Err(Error::AlphabetMismatch {
            expected: (rows, cols),
            found: (code.bin_a.len(), code.bin_b.len()),
        });
    }
    let (a, b) = (&code.bin_a, &code.bin_b);
    let mut by_ay: HashMap<(u64, usize), i64> = HashMap::new();
    let mut by_xb: HashMap<(usize, u64), i64> = HashMap::new();
    let mut by_ab: HashMap<(u64, u64), i64> = HashMap::new();
    for x in 0..rows {
        for y in 0..cols {
            if code.q.positive(x, y) {
                *by_ay.entry((a.bin(x), y)).or_default() += 1;
                *by_xb.entry((x, b.bin(y))).or_default() += 1;
                *by_ab.entry((a.bin(x), b.bin(y))).or_default() += 1;
            }
        }
    }
    let (mut err, mut e1, mut e2, mut e3, mut e4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for x in 0..rows {
        for y in 0..cols {
            let p = j.get(x, y);
            if p <= 0.0 {
                continue;
            }
            let own = i64::from(code.q.positive(x, y));
            let same_y = count(&by_ay, &(a.bin(x), y)) - own;
            let same_x = count(&by_xb, &(x, b.bin(y))) - own;
            let both = count(&by_ab, &(a.bin(x), b.bin(y)));
            let neither = both - (same_y + own) - (same_x + own) + own;
            if own == 0 {
                e1 += p;
            }
            if same_y > 0 {
                e2 += p;
            }
            if same_x > 0 {
                e3 += p;
            }
            if neither > 0 {
                e4 += p;
            }
            if code.reconstruct(x, y) != Some((x, y)) {
                err += p;
            }
        }
    }
    Ok(SwErrorBreakdown {
        report: ErrorReport::exact(err),
        e1,
        e2,
        e3,
        e4,
    })
}

/// Exact error of any distributed code.
pub fn distributed_error<C: DistributedCode + ?Sized>(code: &C, j: &JointDist) -> f64 {
    let mut err = 0.0;
    for x in 0..j.rows() {
        for y in 0..j.cols() {
            let p = j.get(x, y);
            if p > 0.0 && code.reconstruct(x, y) != Some((x, y)) {
                err += p;
            }
        }
    }
    err.min(1.0)
}

/// Integer rate thresholds for random binning at target error `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwRates {
    pub ell_a_min: u32,
    pub ell_b_min: u32,
    pub sum_min: u32,
}

impl SwRates {
    /// The corner point `(ell_a_min, max(ell_b_min, sum_min − ell_a_min))`.
    pub fn operating_point(&self) -> (u32, u32) {
        let b = self.ell_b_min.max(self.sum_min.saturating_sub(self.ell_a_min));
        (self.ell_a_min, b)
    }
}

pub(crate) fn ceil_bits(v: f64) -> Result<u32> {
    let c = v.ceil().max(0.0);
    if !c.is_finite() || c > f64::from(MAX_ELL) {
        return Err(Error::param(format!("rate {v} bits is beyond the supported range")));
    }
    Ok(c as u32)
}

pub fn sw_rate_bounds(j: &JointDist, eps: f64) -> Result<SwRates> {
    let t = sw_truncation(j, eps)?;
    sw_rate_bounds_from(&t, eps)
}

pub fn sw_rate_bounds_from(t: &Truncation, eps: f64) -> Result<SwRates> {
    let slack = -log2(eps / 6.0);
    Ok(SwRates {
        ell_a_min: ceil_bits(t.h_row_given_col + slack)?,
        ell_b_min: ceil_bits(t.h_col_given_row + slack)?,
        sum_min: ceil_bits(t.h_joint + slack)?,
    })
}

/// Codebook-averaged upper bounds on the probabilities of `e2`, `e3`, `e4`.
pub fn sw_event_bounds(t: &Truncation, ell_a: u32, ell_b: u32) -> [f64; 3] {
    let (a, b) = (f64::from(ell_a), f64::from(ell_b));
    [
        (t.h_row_given_col - a).exp2(),
        (t.h_col_given_row - b).exp2(),
        (t.h_joint - a - b).exp2(),
    ]
}

/// Rate margins of a realized code against the lower bounds at its own exact error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseAudit {
    pub error: f64,
    /// Bounds are only asserted for errors below 1.
    pub vacuous: bool,
    pub margins: [f64; 3],
}

impl ConverseAudit {
    pub fn passed(&self) -> bool {
        self.vacuous || self.margins.iter().all(|&m| m >= -DERIVED_TOL)
    }
}

pub fn sw_converse_audit<C: DistributedCode + ?Sized>(code: &C, j: &JointDist) -> Result<ConverseAudit> {
    let error = distributed_error(code, j);
    if error >= 1.0 {
        return Ok(ConverseAudit {
            error,
            vacuous: true,
            margins: [f64::INFINITY; 3],
        });
    }
    let (a, b) = (f64::from(code.ell_a()), f64::from(code.ell_b()));
    let h_xy = smooth_h0(&j.flatten(), error)?.value;
    let h_x_y = smooth_h0_cond(j, error)?.value;
    let h_y_x = smooth_h0_cond(&j.transpose(), error)?.value;
    Ok(ConverseAudit {
        error,
        vacuous: false,
        margins: [a - h_x_y, b - h_y_x, a + b - h_xy],
    })
}

/// A binning code whose decoder picks the most likely pair in each bin product.
/// This is the error-minimizing decoder for fixed bins, used to stress the converse.
#[derive(Debug, Clone)]
pub struct MapCode {
    pub bin_a: BinAssignment,
    pub bin_b: BinAssignment,
    table: HashMap<(u64, u64), (usize, usize)>,
}

impl MapCode {
    pub fn new(j: &JointDist, bin_a: BinAssignment, bin_b: BinAssignment) -> Self {
        let mut best: HashMap<(u64, u64), ((usize, usize), f64)> = HashMap::new();
        for x in 0..j.rows() {
            for y in 0..j.cols() {
                let p = j.get(x, y);
                let key = (bin_a.bin(x), bin_b.bin(y));
                let e = best.entry(key).or_insert(((x, y), p));
                if p > e.1 {
                    *e = ((x, y), p);
                }
            }
        }
        Self {
            bin_a,
            bin_b,
            table: best.into_iter().map(|(k, v)| (k, v.0)).collect(),
        }
    }
}

impl DistributedCode for MapCode {
    fn ell_a(&self) -> u32 {
        self.bin_a.ell()
    }

    fn ell_b(&self) -> u32 {
        self.bin_b.ell()
    }

    fn reconstruct(&self, x: usize, y: usize) -> Option<(usize, usize)> {
        self.table
            .get(&(self.bin_a.bin(x), self.bin_b.bin(y)))
            .copied()
    }
}

/// Decoder for one source with side information: the unique candidate in the received bin
/// that is compatible with the side symbol under a truncated joint `q` (source on rows,
/// side information on columns).
#[derive(Debug, Clone)]
pub struct SideInfoDecoder {
    pub bins: BinAssignment,
    pub q: SubWeighting,
    lookup: HashMap<(u64, usize), Cell<usize>>,
}

impl SideInfoDecoder {
    pub fn new(bins: BinAssignment, q: SubWeighting) -> Self {
        let (rows, cols) = q.shape();
        let mut lookup = HashMap::new();
        for x in 0..rows {
            for u in 0..cols {
                if q.positive(x, u) {
                    insert(&mut lookup, (bins.bin(x), u), x);
                }
            }
        }
        Self { bins, q, lookup }
    }

    pub fn encode(&self, x: usize) -> u64 {
        self.bins.bin(x)
    }

    pub fn decode(&self, bin: u64, u: usize) -> Option<usize> {
        match self.lookup.get(&(bin, u)) {
            Some(Cell::Unique(x)) => Some(*x),
            _ => None,
        }
    }

    /// Exact error when the decoder sees side information distributed as `j` (rows source).
    pub fn exact_error(&self, j: &JointDist) -> f64 {
        let mut err = 0.0;
        for x in 0..j.rows() {
            for u in 0..j.cols() {
                let p = j.get(x, u);
                if p > 0.0 && self.decode(self.encode(x), u) != Some(x) {
                    err += p;
                }
            }
        }
        err.min(1.0)
    }
}

/// `⌈H_0^{ε}[X|U] + log2(1/ε)⌉` for a joint with `X` on rows and `U` on columns.
pub fn rw_rate_bound(j_xu: &JointDist, eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("side-information parameter {eps} is outside (0, 1)")));
    }
    ceil_bits(smooth_h0_cond(j_xu, eps)?.value - log2(eps))
}

/// Bins `X` at rate `ell_a` and decodes against the `ε`-optimal conditional truncation.
/// At rates above [`rw_rate_bound`] the codebook-averaged error is at most `2ε`.
pub fn rw_side_info_code<R: Rng + ?Sized>(
    j_xu: &JointDist,
    ell_a: u32,
    eps: f64,
    rng: &mut R,
) -> Result<(SideInfoDecoder, ErrorReport)> {
    let q = smooth_h0_cond(j_xu, eps)?.witness;
    let bins = BinAssignment::random(j_xu.rows(), ell_a, rng)?;
    let dec = SideInfoDecoder::new(bins, q);
    let err = dec.exact_error(j_xu);
    Ok((dec, ErrorReport::exact(err)))
}
