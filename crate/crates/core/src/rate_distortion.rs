//! Lossy one-shot coding under the maximum-distortion criterion.
//!
//! A random codebook of `2^ℓ` reproduction symbols is drawn from the output marginal of a
//! user-chosen test channel; the encoder sends the index of the closest codeword. Quality
//! is measured by the probability that the distortion exceeds the test channel's own
//! distortion quantile `γ`.

use rand::Rng;

use crate::binning::ceil_bits;
use crate::error::{Error, Result};
use crate::prob::{ln, log2, CdfSampler, FiniteDist, JointDist, DERIVED_TOL};
use crate::smooth::{max_distortion_quantile, smooth_i_inf};

/// Largest codebook exponent that will be materialized.
pub const MAX_CODEBOOK_ELL: u32 = 24;

/// A bounded nonnegative distortion `d(x, y)`, source on rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionTable {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DistortionTable {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows * cols != values.len() {
            return Err(Error::AlphabetMismatch {
                expected: (rows, cols),
                found: (values.len(), 1),
            });
        }
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidMass { index, value });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn hamming(n: usize) -> Self {
        let values = (0..n * n)
            .map(|i| if i / n == i % n { 0.0 } else { 1.0 })
            .collect();
        Self { rows: n, cols: n, values }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.cols + y]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn bound(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Anything that maps a source symbol to a reproduction through `ℓ` bits.
pub trait LossyCode {
    fn ell(&self) -> u32;
    fn reproduce(&self, x: usize) -> usize;
}

/// A realized random codebook with the minimum-distortion encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct RDCode {
    pub codebook: Vec<usize>,
    pub ell: u32,
    /// Encoder table, one codeword index per source symbol.
    index: Vec<usize>,
}

impl RDCode {
    pub fn new(codebook: Vec<usize>, ell: u32, dt: &DistortionTable) -> Result<Self> {
        if codebook.len() as u64 != 1u64 << ell {
            return Err(Error::param(format!(
                "codebook has {} entries, expected 2^{ell}",
                codebook.len()
            )));
        }
        if let Some(&y) = codebook.iter().find(|&&y| y >= dt.cols) {
            return Err(Error::param(format!("codeword {y} is outside the reproduction alphabet")));
        }
        let index = (0..dt.rows).map(|x| argmin(&codebook, x, dt)).collect();
        Ok(Self {
            codebook,
            ell,
            index,
        })
    }

    /// `2^ℓ` iid draws from `p_y`.
    pub fn random<R: Rng + ?Sized>(p_y: &FiniteDist, ell: u32, dt: &DistortionTable, rng: &mut R) -> Result<Self> {
        if ell > MAX_CODEBOOK_ELL {
            return Err(Error::Resource {
                atoms: 1u128 << ell,
                limit: 1 << MAX_CODEBOOK_ELL,
            });
        }
        if p_y.len() != dt.cols {
            return Err(Error::AlphabetMismatch {
                expected: dt.shape(),
                found: (dt.rows, p_y.len()),
            });
        }
        let s = CdfSampler::new(p_y);
        let codebook = (0..1usize << ell).map(|_| s.sample(rng)).collect();
        Self::new(codebook, ell, dt)
    }

    pub fn encode(&self, x: usize) -> usize {
        self.index[x]
    }

    pub fn decode(&self, i: usize) -> usize {
        self.codebook[i]
    }
}

impl LossyCode for RDCode {
    fn ell(&self) -> u32 {
        self.ell
    }

    fn reproduce(&self, x: usize) -> usize {
        self.decode(self.encode(x))
    }
}

/// First index of minimal distortion.
fn argmin(codebook: &[usize], x: usize, dt: &DistortionTable) -> usize {
    let mut best = 0;
    for (i, &y) in codebook.iter().enumerate().skip(1) {
        if dt.get(x, y) < dt.get(x, codebook[best]) {
            best = i;
        }
    }
    best
}

pub fn rd_encode_decode(code: &RDCode, x: usize) -> usize {
    code.reproduce(x)
}

/// The rate prescribed for a test channel at target `ε` and smoothing `ε1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdRate {
    pub ell: u32,
    pub i_inf: f64,
    /// The smoothed information density is negative and a single codeword suffices.
    pub zero_rate_branch: bool,
}

fn check_rd_params(eps: f64, eps1: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("target {eps} is outside (0, 1)")));
    }
    if !(eps1 > 0.0) || 2.0 * eps1 >= eps {
        return Err(Error::param(format!("need 0 < 2·eps1 < eps, got eps1 = {eps1}, eps = {eps}")));
    }
    Ok(())
}

/// `⌈max{0, I_∞^{ε1}[X;Y]} + log2(−ln(ε − 2ε1))⌉`, or 0 when `I_∞^{ε1}` is negative.
pub fn rd_rate_bound(j: &JointDist, eps: f64, eps1: f64) -> Result<RdRate> {
    check_rd_params(eps, eps1)?;
    let i_inf = smooth_i_inf(j, eps1)?.value;
    if i_inf < 0.0 {
        return Ok(RdRate {
            ell: 0,
            i_inf,
            zero_rate_branch: true,
        });
    }
    Ok(RdRate {
        ell: ceil_bits(i_inf + log2(-ln(eps - 2.0 * eps1)))?,
        i_inf,
        zero_rate_branch: false,
    })
}

/// `Σ_x p_X(x)·1[d(x, reproduction(x)) > γ]` for a fixed code.
pub fn rd_exact_excess_prob<C: LossyCode + ?Sized>(code: &C, j: &JointDist, dt: &DistortionTable, gamma: f64) -> f64 {
    let p_x = j.row_marginal();
    p_x.support()
        .filter(|&x| dt.get(x, code.reproduce(x)) > gamma)
        .map(|x| p_x.mass(x))
        .sum::<f64>()
        .min(1.0)
}

/// Exact average of the excess probability over iid codebooks of size `2^ℓ`:
/// `Σ_x p_X(x)·Pr_{Y∼p_Y}{d(x,Y) > γ}^{2^ℓ}`.
pub fn rd_average_excess(j: &JointDist, dt: &DistortionTable, gamma: f64, ell: u32) -> f64 {
    let (p_x, p_y) = (j.row_marginal(), j.col_marginal());
    let m = 2f64.powi(ell as i32);
    p_x.support()
        .map(|x| {
            let miss: f64 = p_y.support().filter(|&y| dt.get(x, y) > gamma).map(|y| p_y.mass(y)).sum();
            p_x.mass(x) * miss.min(1.0).powf(m)
        })
        .sum()
}

/// The codebook-averaged bound `2ε1 + exp(−2^ℓ·2^{−I})`.
pub fn rd_averaged_bound(eps1: f64, ell: u32, i_inf: f64) -> f64 {
    2.0 * eps1 + (-(f64::from(ell) - i_inf).exp2()).exp()
}

/// Probability under `p_X × p_Y` that the distortion exceeds the `ε1`-quantile.
/// Only defined on the negative-information branch.
pub fn rd_zero_rate_check(j: &JointDist, dt: &DistortionTable, eps: f64, eps1: f64) -> Result<f64> {
    check_rd_params(eps, eps1)?;
    let i_inf = smooth_i_inf(j, eps1)?.value;
    if i_inf >= 0.0 {
        return Err(Error::param(format!(
            "zero-rate check needs a negative smoothed information, got {i_inf}"
        )));
    }
    let gamma = max_distortion_quantile(j, dt, eps1)?;
    let (p_x, p_y) = (j.row_marginal(), j.col_marginal());
    let mut v = 0.0;
    for x in p_x.support() {
        for y in p_y.support() {
            if dt.get(x, y) > gamma {
                v += p_x.mass(x) * p_y.mass(y);
            }
        }
    }
    Ok(v)
}

/// The joint of `X` and its reproduction `f(e(X))`.
pub fn induced_joint<C: LossyCode + ?Sized>(code: &C, p_x: &FiniteDist, n_y: usize) -> JointDist {
    let mut masses = vec![0.0; p_x.len() * n_y];
    for x in p_x.support() {
        masses[x * n_y + code.reproduce(x)] = p_x.mass(x);
    }
    JointDist::from_raw(p_x.len(), n_y, masses)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdConverseAudit {
    pub i_inf: f64,
    /// `ℓ − (I_∞^ε + log2 ε)` on the induced joint.
    pub margin: f64,
}

impl RdConverseAudit {
    pub fn passed(&self) -> bool {
        self.margin >= -DERIVED_TOL
    }
}

/// Checks `ℓ ≥ I_∞^ε[X; f(e(X))] + log2 ε` for a code meeting the distortion target at `ε`.
pub fn rd_converse_audit<C: LossyCode + ?Sized>(code: &C, p_x: &FiniteDist, n_y: usize, eps: f64) -> Result<RdConverseAudit> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("target {eps} is outside (0, 1)")));
    }
    let j = induced_joint(code, p_x, n_y);
    let i_inf = smooth_i_inf(&j, eps)?.value;
    Ok(RdConverseAudit {
        i_inf,
        margin: f64::from(code.ell()) - (i_inf + log2(eps)),
    })
}
