//! Lossless compression of `X` with a rate-limited helper that observes `Y`.
//!
//! The helper's description is built around an auxiliary `U` drawn through a user-chosen
//! channel `p_{U|Y}`. Two constructions are provided: a covering scheme, where the helper
//! sends the index of a codeword compatible with its observation, and a channel-simulation
//! scheme, where the helper steers a shared list of `p_U` samples by rejection sampling so
//! that the decoder obtains a variable close in law to a smoothed `U′`.
//!
//! Joint tables keep the decoded variable on rows: `p_{XU}` has `X` on rows and `U` on
//! columns, `p_{UY}` has `U` on rows and `Y` on columns.

use std::collections::HashMap;

use rand::Rng;

use crate::binning::{ceil_bits, BinAssignment, ErrorReport, SideInfoDecoder};
use crate::error::{Error, Result};
use crate::prob::{
    l1_distance, ln, log2, CdfSampler, FiniteDist, JointDist, Kernel, MassFunction, DERIVED_TOL, NORM_TOL,
};
use crate::smooth::{d_inf, smooth_h0_cond, smooth_i_inf, SubWeighting};

/// Largest helper exponent for which codebooks or shared sample lists are materialized.
pub const MAX_HELPER_ELL: u32 = 24;

/// A source pair with an auxiliary channel, forming the chain `X - Y - U`.
#[derive(Debug, Clone)]
pub struct HelperInstance {
    pub joint_xy: JointDist,
    pub kernel: Kernel,
    pub p_xu: JointDist,
    pub p_uy: JointDist,
    pub p_u: FiniteDist,
    pub p_y: FiniteDist,
    /// `p_{X|Y}`, one row per `y`.
    pub x_given_y: Kernel,
}

impl HelperInstance {
    pub fn new(joint_xy: JointDist, kernel: Kernel) -> Result<Self> {
        if kernel.len() != joint_xy.cols() {
            return Err(Error::AlphabetMismatch {
                expected: (joint_xy.cols(), kernel.out_size()),
                found: (kernel.len(), kernel.out_size()),
            });
        }
        let p_y = joint_xy.col_marginal();
        let p_uy = JointDist::compose(&p_y, &kernel)?.transpose();
        let p_xu = markov_compose(&joint_xy, &kernel);
        Ok(Self {
            p_u: p_uy.row_marginal(),
            x_given_y: joint_xy.transpose().conditional(),
            joint_xy,
            kernel,
            p_xu,
            p_uy,
            p_y,
        })
    }

    pub fn nx(&self) -> usize {
        self.joint_xy.rows()
    }

    pub fn ny(&self) -> usize {
        self.joint_xy.cols()
    }

    pub fn nu(&self) -> usize {
        self.kernel.out_size()
    }

    pub fn p_x_given_y(&self, x: usize, y: usize) -> f64 {
        self.x_given_y.row(y).map_or(0.0, |r| r.mass(x))
    }
}

/// `Σ_y p_{XY}(x,y)·k(u|y)` with `X` on rows and `U` on columns.
pub fn markov_compose(joint_xy: &JointDist, kernel: &Kernel) -> JointDist {
    let nu = kernel.out_size();
    let mut masses = vec![0.0; joint_xy.rows() * nu];
    for x in 0..joint_xy.rows() {
        for y in 0..joint_xy.cols() {
            let p = joint_xy.get(x, y);
            if p == 0.0 {
                continue;
            }
            if let Some(row) = kernel.row(y) {
                for (u, &k) in row.masses().iter().enumerate() {
                    masses[x * nu + u] += p * k;
                }
            }
        }
    }
    JointDist::from_raw(joint_xy.rows(), nu, masses)
}

/// The covering set `{(u,y) : g(u,y) ≤ √ε_A}` where `g(u,y)` is the conditional mass of the
/// `x` that `q` rules out next to `u`. Stored as `u * |Y| + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringSet {
    pub g: Vec<f64>,
    pub member: Vec<bool>,
    ny: usize,
}

impl CoveringSet {
    pub fn contains(&self, u: usize, y: usize) -> bool {
        self.member[u * self.ny + y]
    }

    pub fn g(&self, u: usize, y: usize) -> f64 {
        self.g[u * self.ny + y]
    }
}

pub fn build_f_set(inst: &HelperInstance, q_xu: &SubWeighting, eps_a: f64) -> Result<CoveringSet> {
    if !(eps_a > 0.0 && eps_a < 1.0) {
        return Err(Error::param(format!("eps_a = {eps_a} is outside (0, 1)")));
    }
    let (nx, ny, nu) = (inst.nx(), inst.ny(), inst.nu());
    let threshold = eps_a.sqrt();
    let mut g = vec![0.0; nu * ny];
    for u in 0..nu {
        for y in 0..ny {
            g[u * ny + y] = (0..nx)
                .filter(|&x| !q_xu.positive(x, u))
                .map(|x| inst.p_x_given_y(x, y))
                .sum();
        }
    }
    let member = g.iter().map(|&v| v <= threshold).collect();
    Ok(CoveringSet { g, member, ny })
}

/// Any realized helper code: two encoders and a decoder for `X`.
pub trait HelperCode {
    fn ell_a(&self) -> u32;
    fn ell_b(&self) -> u32;
    fn encode_a(&self, x: usize) -> u64;
    fn encode_b(&self, y: usize) -> u64;
    fn decode(&self, i: u64, k: u64) -> Option<usize>;
}

/// Exact `Pr{X ≠ decode(e_A(X), e_B(Y))}`.
pub fn helper_error<C: HelperCode + ?Sized>(code: &C, joint_xy: &JointDist) -> f64 {
    let mut err = 0.0;
    for y in 0..joint_xy.cols() {
        let k = code.encode_b(y);
        for x in 0..joint_xy.rows() {
            let p = joint_xy.get(x, y);
            if p > 0.0 && code.decode(code.encode_a(x), k) != Some(x) {
                err += p;
            }
        }
    }
    err.min(1.0)
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} = {v} is outside (0, 1)")))
    }
}

/// Parameters of the covering scheme; `eps` is the target error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringParams {
    pub eps: f64,
    pub eps_a: f64,
    pub eps_b: f64,
    pub eps_b_bar: f64,
}

impl CoveringParams {
    pub fn validate(&self) -> Result<()> {
        check_unit("eps", self.eps)?;
        check_unit("eps_a", self.eps_a)?;
        check_unit("eps_b", self.eps_b)?;
        if !(0.0..1.0).contains(&self.eps_b_bar) {
            return Err(Error::param(format!("eps_b_bar = {} is outside [0, 1)", self.eps_b_bar)));
        }
        if self.eps_a + self.eps_b > self.eps + NORM_TOL {
            return Err(Error::param("need eps_a + eps_b <= eps"));
        }
        if self.eps_b_bar + 2.0 * self.eps_a.sqrt() >= self.eps_b {
            return Err(Error::param("need eps_b_bar + 2·sqrt(eps_a) < eps_b"));
        }
        Ok(())
    }
}

/// Everything about the covering scheme that does not depend on the random codebook.
#[derive(Debug, Clone)]
pub struct CoveringPlan {
    pub params: CoveringParams,
    pub q: SubWeighting,
    pub f: CoveringSet,
    pub h0: f64,
    pub i_inf: f64,
    pub ell_a_min: u32,
    pub ell_b_min: u32,
}

impl CoveringPlan {
    pub fn new(inst: &HelperInstance, params: CoveringParams) -> Result<Self> {
        params.validate()?;
        let h = smooth_h0_cond(&inst.p_xu, params.eps_a)?;
        let f = build_f_set(inst, &h.witness, params.eps_a)?;
        let i_inf = smooth_i_inf(&inst.p_uy, params.eps_b_bar)?.value;
        let inner = params.eps_b - params.eps_b_bar - 2.0 * params.eps_a.sqrt();
        Ok(Self {
            ell_a_min: ceil_bits(h.value - log2(params.eps - params.eps_b))?,
            ell_b_min: ceil_bits(i_inf.max(0.0) + log2(-ln(inner)))?,
            params,
            q: h.witness,
            f,
            h0: h.value,
            i_inf,
        })
    }

    /// The smoothed information was negative, so the rate formula used its positive part.
    pub fn negative_information(&self) -> bool {
        self.i_inf < 0.0
    }

    pub fn realize<R: Rng + ?Sized>(&self, inst: &HelperInstance, ell_a: u32, ell_b: u32, rng: &mut R) -> Result<CoveringCode> {
        check_helper_ell(ell_b)?;
        let bins = BinAssignment::random(inst.nx(), ell_a, rng)?;
        let sampler = CdfSampler::new(&inst.p_u);
        let codebook: Vec<usize> = (0..1usize << ell_b).map(|_| sampler.sample(rng)).collect();
        let mut index = Vec::with_capacity(inst.ny());
        let mut covered = Vec::with_capacity(inst.ny());
        for y in 0..inst.ny() {
            let k = codebook.iter().position(|&u| self.f.contains(u, y));
            covered.push(k.is_some());
            index.push(k.unwrap_or(0));
        }
        Ok(CoveringCode {
            decoder: SideInfoDecoder::new(bins, self.q.clone()),
            codebook,
            ell_b,
            index,
            covered,
        })
    }

    /// Exact error of one realized code and the three terms of its union bound.
    pub fn evaluate(&self, inst: &HelperInstance, code: &CoveringCode) -> CoveringReport {
        let mut per_bin: HashMap<(u64, usize), u32> = HashMap::new();
        for x in 0..inst.nx() {
            for u in 0..inst.nu() {
                if self.q.positive(x, u) {
                    *per_bin.entry((code.encode_a(x), u)).or_default() += 1;
                }
            }
        }
        let mut r = CoveringReport::default();
        for y in 0..inst.ny() {
            let u = code.codebook[code.index[y]];
            for x in 0..inst.nx() {
                let p = inst.joint_xy.get(x, y);
                if p <= 0.0 {
                    continue;
                }
                let own = self.q.positive(x, u);
                if !code.covered[y] {
                    r.pr_e1 += p;
                } else if !own {
                    r.pr_e1c_e2 += p;
                }
                let others = per_bin.get(&(code.encode_a(x), u)).copied().unwrap_or(0) - u32::from(own);
                if others > 0 {
                    r.pr_e3 += p;
                }
                if code.decode(code.encode_a(x), code.index[y] as u64) != Some(x) {
                    r.error += p;
                }
            }
        }
        r
    }
}

fn check_helper_ell(ell_b: u32) -> Result<()> {
    if ell_b > MAX_HELPER_ELL {
        return Err(Error::Resource {
            atoms: 1u128 << ell_b,
            limit: 1 << MAX_HELPER_ELL,
        });
    }
    Ok(())
}

/// A realized covering code: bins for `X`, a codebook of `U` samples, and the helper's
/// choice of codeword for each `y`.
#[derive(Debug, Clone)]
pub struct CoveringCode {
    pub decoder: SideInfoDecoder,
    pub codebook: Vec<usize>,
    ell_b: u32,
    index: Vec<usize>,
    covered: Vec<bool>,
}

impl HelperCode for CoveringCode {
    fn ell_a(&self) -> u32 {
        self.decoder.bins.ell()
    }

    fn ell_b(&self) -> u32 {
        self.ell_b
    }

    fn encode_a(&self, x: usize) -> u64 {
        self.decoder.encode(x)
    }

    fn encode_b(&self, y: usize) -> u64 {
        self.index[y] as u64
    }

    fn decode(&self, i: u64, k: u64) -> Option<usize> {
        self.decoder.decode(i, self.codebook[k as usize])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoveringReport {
    pub error: f64,
    /// No codeword is compatible with `y`.
    pub pr_e1: f64,
    /// A codeword was found but `(x, u)` lies outside the truncated support.
    pub pr_e1c_e2: f64,
    /// Another candidate in `x`'s bin is compatible with the chosen codeword.
    pub pr_e3: f64,
}

/// Builds the covering plan and draws one code at the given rates.
pub fn helper_scheme_a<R: Rng + ?Sized>(
    inst: &HelperInstance,
    ell_a: u32,
    ell_b: u32,
    params: CoveringParams,
    rng: &mut R,
) -> Result<(CoveringCode, CoveringReport)> {
    let plan = CoveringPlan::new(inst, params)?;
    let code = plan.realize(inst, ell_a, ell_b, rng)?;
    let report = plan.evaluate(inst, &code);
    Ok((code, report))
}

/// The smoothed auxiliary channel `p_{U′|Y}` and how far it moved from `p_{U|Y}`.
#[derive(Debug, Clone)]
pub struct UPrime {
    /// One row per `y`; rows of zero `p_Y` are absent.
    pub kernel: Kernel,
    /// `p_{U′Y}` with `U′` on rows.
    pub joint: JointDist,
    /// `1 − Σ_u φ(u,y)/p_Y(y)`, `None` where `p_Y(y) = 0`.
    pub alpha: Vec<Option<f64>>,
    pub l1: f64,
    /// `D_∞(p_{U′Y} ‖ p_U × p_Y)`.
    pub d_inf: f64,
    /// `I_∞^ε[U;Y]` of the original pair.
    pub i_inf: f64,
}

/// Renormalizes the smooth-information witness `φ` column by column, falling back to `p_U`
/// wherever more than half of a column was smoothed away.
pub fn build_u_prime_from_joint(p_uy: &JointDist, eps: f64) -> Result<UPrime> {
    let res = smooth_i_inf(p_uy, eps)?;
    let phi = &res.witness;
    let (nu, ny) = (p_uy.rows(), p_uy.cols());
    let p_u = p_uy.row_marginal();
    let p_y = p_uy.col_marginal();
    let mut rows = Vec::with_capacity(ny);
    let mut alpha = Vec::with_capacity(ny);
    let mut masses = vec![0.0; nu * ny];
    for y in 0..ny {
        let py = p_y.mass(y);
        if py <= 0.0 {
            rows.push(None);
            alpha.push(None);
            continue;
        }
        let untouched = (0..nu).all(|u| phi.get(u, y) == p_uy.get(u, y));
        let kept: f64 = (0..nu).map(|u| phi.get(u, y)).sum();
        let a = if untouched { 0.0 } else { 1.0 - kept / py };
        alpha.push(Some(a));
        let row: Vec<f64> = if untouched {
            (0..nu).map(|u| p_uy.get(u, y) / py).collect()
        } else if a <= 0.5 {
            (0..nu).map(|u| phi.get(u, y) / kept).collect()
        } else {
            p_u.masses().to_vec()
        };
        for u in 0..nu {
            masses[u * ny + y] = if untouched {
                p_uy.get(u, y)
            } else if a <= 0.5 {
                phi.get(u, y) * (py / kept)
            } else {
                py * row[u]
            };
        }
        rows.push(Some(FiniteDist::from_raw(row)));
    }
    let joint = JointDist::from_raw(nu, ny, masses);
    Ok(UPrime {
        kernel: Kernel::new(rows, nu)?,
        l1: l1_distance(p_uy, &joint)?,
        d_inf: d_inf(&joint, &p_u.product(&p_y))?,
        i_inf: res.value,
        joint,
        alpha,
    })
}

pub fn build_u_prime(inst: &HelperInstance, eps: f64) -> Result<UPrime> {
    build_u_prime_from_joint(&inst.p_uy, eps)
}

/// Rejection sampling of a target law `q` from i.i.d. draws of a base law.
///
/// A draw `u` is accepted when an independent uniform `z` satisfies
/// `z ≤ q(u) / (p(u)·max_ratio)`, so each trial accepts with probability `1/max_ratio`
/// and accepted draws are exactly `q`-distributed. The message is the first accepting
/// index among `L` trials.
#[derive(Debug, Clone)]
pub struct RejectionSampler {
    pub base: FiniteDist,
    pub target: FiniteDist,
    pub l: u64,
    /// `D_∞(target ‖ base)`.
    pub dinf_value: f64,
    max_ratio: f64,
    base_sampler: CdfSampler,
}

impl RejectionSampler {
    pub fn new(base: &FiniteDist, target: &FiniteDist, l: u64) -> Result<Self> {
        if l == 0 {
            return Err(Error::param("rejection sampler needs at least one trial"));
        }
        let dinf_value = d_inf(target, base)?;
        let max_ratio = target
            .support()
            .map(|u| target.mass(u) / base.mass(u))
            .fold(0.0, f64::max);
        Ok(Self {
            base: base.clone(),
            target: target.clone(),
            l,
            dinf_value,
            max_ratio,
            base_sampler: CdfSampler::new(base),
        })
    }

    /// `2^{−D_∞(q‖p)}`.
    pub fn acceptance(&self) -> f64 {
        (1.0 / self.max_ratio).min(1.0)
    }

    /// `Pr[accept | U = u]`.
    pub fn threshold(&self, u: usize) -> f64 {
        let p = self.base.mass(u);
        if p <= 0.0 {
            return 0.0;
        }
        (self.target.mass(u) / (p * self.max_ratio)).min(1.0)
    }

    /// One `(U, Z)` draw and its acceptance bit.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, bool) {
        let u = self.base_sampler.sample(rng);
        let z: f64 = rng.gen();
        (u, z < self.threshold(u))
    }

    /// Runs up to `L` trials; returns the output symbol and the accepting index
    /// (`None` when every trial rejected, in which case the first draw is output).
    pub fn encode_decode<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, Option<u64>) {
        let mut first = None;
        for j in 0..self.l {
            let (u, accept) = self.trial(rng);
            first.get_or_insert(u);
            if accept {
                return (u, Some(j));
            }
        }
        (first.unwrap_or(0), None)
    }

    /// Index of the first accepting entry of a shared list of `(u, z)` draws.
    pub fn first_accept(&self, shared: &[(usize, f64)]) -> Option<usize> {
        shared.iter().position(|&(u, z)| z < self.threshold(u))
    }

    /// Exact output law `p_V` and the probability `ρ` that all `L` trials reject.
    pub fn exact_law(&self) -> (FiniteDist, f64) {
        let a = self.acceptance();
        if a >= 1.0 {
            return (self.target.clone(), 0.0);
        }
        let rho = (1.0 - a).powf(self.l as f64);
        let masses = (0..self.base.len())
            .map(|u| {
                let r = ((self.base.mass(u) - a * self.target.mass(u)) / (1.0 - a)).max(0.0);
                (1.0 - rho) * self.target.mass(u) + rho * r
            })
            .collect();
        (FiniteDist::from_raw(masses), rho)
    }

    /// `2·exp(−L·2^{−D_∞})`.
    pub fn l1_bound(&self) -> f64 {
        2.0 * (-(self.l as f64) * self.acceptance()).exp()
    }
}

pub fn rejection_encode_decode<R: Rng + ?Sized>(s: &RejectionSampler, rng: &mut R) -> usize {
    s.encode_decode(rng).0
}

pub fn rejection_exact_law(s: &RejectionSampler) -> (FiniteDist, f64) {
    s.exact_law()
}

/// Parameters of the channel-simulation scheme; `eps` is the target error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationParams {
    pub eps: f64,
    pub eps_a: f64,
    pub eps_b: f64,
}

impl SimulationParams {
    pub fn validate(&self) -> Result<()> {
        check_unit("eps", self.eps)?;
        check_unit("eps_a", self.eps_a)?;
        check_unit("eps_b", self.eps_b)?;
        if 2.0 * self.eps_a + 4.0 * self.eps_b > self.eps + NORM_TOL {
            return Err(Error::param("need 2·eps_a + 4·eps_b <= eps"));
        }
        Ok(())
    }
}

/// The channel-simulation scheme with everything that does not depend on randomness.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    pub params: SimulationParams,
    pub q: SubWeighting,
    pub h0: f64,
    pub u_prime: UPrime,
    pub ell_a_min: u32,
    pub ell_b_min: u32,
}

impl SimulationPlan {
    pub fn new(inst: &HelperInstance, params: SimulationParams) -> Result<Self> {
        params.validate()?;
        let h = smooth_h0_cond(&inst.p_xu, params.eps_a)?;
        let u_prime = build_u_prime(inst, params.eps_b)?;
        let eb = params.eps_b;
        Ok(Self {
            ell_a_min: ceil_bits(h.value - log2(params.eps_a))?,
            ell_b_min: ceil_bits((u_prime.i_inf + 1.0).max(0.0) + log2(ln(1.0 / eb)))?,
            params,
            q: h.witness,
            h0: h.value,
            u_prime,
        })
    }

    fn samplers(&self, inst: &HelperInstance, l: u64) -> Result<Vec<Option<RejectionSampler>>> {
        (0..inst.ny())
            .map(|y| {
                self.u_prime
                    .kernel
                    .row(y)
                    .map(|t| RejectionSampler::new(&inst.p_u, t, l))
                    .transpose()
            })
            .collect()
    }

    /// Draws bins for `X` and one realization of the shared list of `2^{ℓ_B}` `(U, Z)` pairs.
    pub fn realize<R: Rng + ?Sized>(&self, inst: &HelperInstance, ell_a: u32, ell_b: u32, rng: &mut R) -> Result<SimulationCode> {
        check_helper_ell(ell_b)?;
        let bins = BinAssignment::random(inst.nx(), ell_a, rng)?;
        let l = 1usize << ell_b;
        let sampler = CdfSampler::new(&inst.p_u);
        let shared: Vec<(usize, f64)> = (0..l).map(|_| (sampler.sample(rng), rng.gen::<f64>())).collect();
        let index = self
            .samplers(inst, l as u64)?
            .iter()
            .map(|s| s.as_ref().and_then(|s| s.first_accept(&shared)).unwrap_or(0))
            .collect();
        Ok(SimulationCode {
            decoder: SideInfoDecoder::new(bins, self.q.clone()),
            shared: shared.into_iter().map(|(u, _)| u).collect(),
            ell_b,
            index,
        })
    }

    /// Exact error of a code averaged over the shared randomness, with the bins held fixed.
    pub fn shared_average_error(&self, inst: &HelperInstance, code: &SimulationCode) -> Result<f64> {
        let laws = self.samplers(inst, 1u64 << code.ell_b)?;
        let mut err = 0.0;
        for (y, law) in laws.iter().enumerate() {
            let Some(s) = law else { continue };
            let (p_v, _) = s.exact_law();
            for x in 0..inst.nx() {
                let p = inst.joint_xy.get(x, y);
                if p <= 0.0 {
                    continue;
                }
                let i = code.encode_a(x);
                for v in p_v.support() {
                    if code.decoder.decode(i, v) != Some(x) {
                        err += p * p_v.mass(v);
                    }
                }
            }
        }
        Ok(err.min(1.0))
    }

    /// `Σ_y p_Y(y)·‖p_{V|Y=y} − p_{U′|Y=y}‖` under the exact sampler law at rate `ℓ_B`.
    pub fn simulation_l1(&self, inst: &HelperInstance, ell_b: u32) -> Result<f64> {
        let mut total = 0.0;
        for (y, s) in self.samplers(inst, 1u64 << ell_b)?.iter().enumerate() {
            if let Some(s) = s {
                let (p_v, _) = s.exact_law();
                total += inst.p_y.mass(y) * l1_distance(&p_v, &s.target)?;
            }
        }
        Ok(total)
    }

    /// `2ε_A + 4ε_B`.
    pub fn budget(&self) -> f64 {
        2.0 * self.params.eps_a + 4.0 * self.params.eps_b
    }
}

/// A channel-simulation code with its shared randomness fixed.
#[derive(Debug, Clone)]
pub struct SimulationCode {
    pub decoder: SideInfoDecoder,
    /// The `U` half of the shared list; the decoder never needs the uniforms.
    pub shared: Vec<usize>,
    ell_b: u32,
    index: Vec<usize>,
}

impl HelperCode for SimulationCode {
    fn ell_a(&self) -> u32 {
        self.decoder.bins.ell()
    }

    fn ell_b(&self) -> u32 {
        self.ell_b
    }

    fn encode_a(&self, x: usize) -> u64 {
        self.decoder.encode(x)
    }

    fn encode_b(&self, y: usize) -> u64 {
        self.index[y] as u64
    }

    fn decode(&self, i: u64, k: u64) -> Option<usize> {
        self.decoder.decode(i, self.shared[k as usize])
    }
}

/// Builds the simulation plan, draws one code, and reports its exact error for that draw.
pub fn helper_scheme_b<R: Rng + ?Sized>(
    inst: &HelperInstance,
    ell_a: u32,
    ell_b: u32,
    params: SimulationParams,
    rng: &mut R,
) -> Result<(SimulationCode, ErrorReport)> {
    let plan = SimulationPlan::new(inst, params)?;
    let code = plan.realize(inst, ell_a, ell_b, rng)?;
    let err = helper_error(&code, &inst.joint_xy);
    Ok((code, ErrorReport::exact(err)))
}

/// A helper code whose decoder outputs the most likely `x` in the received bin given the
/// helper's message. Used to probe the converse with the best decoder for given encoders.
#[derive(Debug, Clone)]
pub struct MapHelperCode {
    pub bins: BinAssignment,
    pub helper: BinAssignment,
    table: HashMap<(u64, u64), usize>,
}

impl MapHelperCode {
    pub fn new(joint_xy: &JointDist, bins: BinAssignment, helper: BinAssignment) -> Self {
        let mut weight: HashMap<(u64, u64, usize), f64> = HashMap::new();
        for x in 0..joint_xy.rows() {
            for y in 0..joint_xy.cols() {
                *weight.entry((bins.bin(x), helper.bin(y), x)).or_default() += joint_xy.get(x, y);
            }
        }
        let mut best: HashMap<(u64, u64), (usize, f64)> = HashMap::new();
        let mut keys: Vec<_> = weight.into_iter().collect();
        keys.sort_by_key(|e| e.0);
        for ((i, k, x), w) in keys {
            let e = best.entry((i, k)).or_insert((x, w));
            if w > e.1 {
                *e = (x, w);
            }
        }
        Self {
            bins,
            helper,
            table: best.into_iter().map(|(k, v)| (k, v.0)).collect(),
        }
    }
}

impl HelperCode for MapHelperCode {
    fn ell_a(&self) -> u32 {
        self.bins.ell()
    }

    fn ell_b(&self) -> u32 {
        self.helper.ell()
    }

    fn encode_a(&self, x: usize) -> u64 {
        self.bins.bin(x)
    }

    fn encode_b(&self, y: usize) -> u64 {
        self.helper.bin(y)
    }

    fn decode(&self, i: u64, k: u64) -> Option<usize> {
        self.table.get(&(i, k)).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelperAudit {
    pub error: f64,
    pub vacuous: bool,
    /// `ℓ_A − H_0^ε̂[X|U]`.
    pub margin_a: f64,
    /// `ℓ_B − (I_∞^ε̂[U;Y] + log2 ε̂)`.
    pub margin_b: f64,
}

impl HelperAudit {
    pub fn passed(&self) -> bool {
        self.vacuous || (self.margin_a >= -DERIVED_TOL && self.margin_b >= -DERIVED_TOL)
    }
}

/// Checks a realized code's rates against the lower bounds at its own exact error, with the
/// auxiliary taken to be the helper's message `U = e_B(Y)`.
pub fn helper_converse_audit<C: HelperCode + ?Sized>(code: &C, joint_xy: &JointDist) -> Result<HelperAudit> {
    let error = helper_error(code, joint_xy);
    if error >= 1.0 {
        return Ok(HelperAudit {
            error,
            vacuous: true,
            margin_a: f64::INFINITY,
            margin_b: f64::INFINITY,
        });
    }
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let msg: Vec<usize> = (0..joint_xy.cols())
        .map(|y| {
            let next = ids.len();
            *ids.entry(code.encode_b(y)).or_insert(next)
        })
        .collect();
    let nu = ids.len();
    let rows = (0..joint_xy.cols())
        .map(|y| Some(FiniteDist::point(nu, msg[y])))
        .collect();
    let kernel = Kernel::new(rows, nu)?;
    let inst = HelperInstance::new(joint_xy.clone(), kernel)?;
    let h0 = smooth_h0_cond(&inst.p_xu, error)?.value;
    let i_inf = smooth_i_inf(&inst.p_uy, error)?.value;
    Ok(HelperAudit {
        error,
        vacuous: false,
        margin_a: f64::from(code.ell_a()) - h0,
        margin_b: f64::from(code.ell_b()) - (i_inf + log2(error)),
    })
}
