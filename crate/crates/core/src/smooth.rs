//! Exact smooth zeroth-order entropies and smooth max divergences, with optimizing witnesses.
//!
//! All optimizations run over the ball `B^ε(p)` of sub-weightings `0 ≤ q ≤ p` with total
//! mass at least `1 − ε`. Joint quantities condition on the column symbol: for `p_{XY}`
//! stored with `X` on rows, [`smooth_h0_cond`] computes `H_0^ε[X|Y]`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::prob::{log2, FiniteDist, JointDist, MassFunction, NORM_TOL};
use crate::rate_distortion::DistortionTable;

/// Slack on the removal budget so that sums landing on `ε` up to rounding count as feasible.
pub const FEAS_TOL: f64 = 1e-12;

/// A nonnegative table dominated by a reference distribution of the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct SubWeighting {
    weights: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl SubWeighting {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>) -> Self {
        assert_eq!(rows * cols, weights.len());
        Self {
            weights,
            rows,
            cols,
        }
    }

    /// `p` restricted to the atoms where `keep` holds.
    pub fn restrict<M: MassFunction + ?Sized>(p: &M, mut keep: impl FnMut(usize) -> bool) -> Self {
        let (rows, cols) = p.shape();
        let weights = p
            .masses()
            .iter()
            .enumerate()
            .map(|(i, &m)| if keep(i) { m } else { 0.0 })
            .collect();
        Self::new(rows, cols, weights)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }

    #[inline]
    pub fn positive(&self, r: usize, c: usize) -> bool {
        self.get(r, c) > 0.0
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn support_size(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    /// Largest number of positive entries in any column.
    pub fn max_col_support(&self) -> usize {
        (0..self.cols)
            .map(|c| (0..self.rows).filter(|&r| self.positive(r, c)).count())
            .max()
            .unwrap_or(0)
    }

    /// Largest number of positive entries in any row.
    pub fn max_row_support(&self) -> usize {
        (0..self.rows)
            .map(|r| (0..self.cols).filter(|&c| self.positive(r, c)).count())
            .max()
            .unwrap_or(0)
    }

    pub fn transpose(&self) -> SubWeighting {
        let mut w = vec![0.0; self.weights.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                w[c * self.rows + r] = self.get(r, c);
            }
        }
        SubWeighting::new(self.cols, self.rows, w)
    }

    /// Membership in `B^ε(p)`: pointwise domination and total at least `1 − ε`.
    pub fn in_ball<M: MassFunction + ?Sized>(&self, p: &M, eps: f64) -> bool {
        p.shape() == self.shape()
            && self
                .weights
                .iter()
                .zip(p.masses())
                .all(|(&w, &m)| w >= 0.0 && w <= m)
            && self.total() >= p.masses().iter().sum::<f64>() - eps - NORM_TOL
    }
}

impl MassFunction for SubWeighting {
    fn masses(&self) -> &[f64] {
        &self.weights
    }

    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// An optimal value in bits together with the sub-weighting that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothResult {
    pub value: f64,
    pub witness: SubWeighting,
    pub eps: f64,
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if (0.0..1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::param(format!("smoothing parameter {eps} is outside [0, 1)")))
    }
}

fn count_log(k: usize) -> f64 {
    log2(k as f64)
}

pub fn h0(d: &FiniteDist) -> f64 {
    count_log(d.support_size())
}

/// `log2` of the largest column support among columns of positive mass.
pub fn h0_cond(j: &JointDist) -> f64 {
    let widest = (0..j.cols())
        .map(|c| (0..j.rows()).filter(|&r| j.get(r, c) > 0.0).count())
        .max()
        .unwrap_or(0);
    count_log(widest)
}

/// Ascending by mass; among equal masses the larger index comes first so it is dropped first.
fn removal_order(masses: &[f64], ids: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut order: Vec<usize> = ids.filter(|&i| masses[i] > 0.0).collect();
    order.sort_by(|&a, &b| masses[a].total_cmp(&masses[b]).then(b.cmp(&a)));
    order
}

pub fn smooth_h0(d: &FiniteDist, eps: f64) -> Result<SmoothResult> {
    check_eps(eps)?;
    let m = d.masses();
    let order = removal_order(m, 0..m.len());
    let mut removed = 0.0;
    let mut dropped = vec![false; m.len()];
    // the heaviest atom always survives
    for &i in &order[..order.len().saturating_sub(1)] {
        if removed + m[i] > eps + FEAS_TOL {
            break;
        }
        removed += m[i];
        dropped[i] = true;
    }
    let witness = SubWeighting::restrict(d, |i| !dropped[i]);
    Ok(SmoothResult {
        value: count_log(witness.support_size()),
        witness,
        eps,
    })
}

/// Per-column ascending removal orders and prefix sums of removed mass.
struct ColumnProfile {
    orders: Vec<Vec<usize>>,
    prefix: Vec<Vec<f64>>,
}

impl ColumnProfile {
    fn new(j: &JointDist) -> Self {
        let (rows, cols) = (j.rows(), j.cols());
        let m = j.masses();
        let mut orders = Vec::with_capacity(cols);
        let mut prefix = Vec::with_capacity(cols);
        for c in 0..cols {
            let order = removal_order(m, (0..rows).map(|r| r * cols + c));
            let mut acc = 0.0;
            let mut p = Vec::with_capacity(order.len() + 1);
            p.push(0.0);
            for &i in &order {
                acc += m[i];
                p.push(acc);
            }
            orders.push(order);
            prefix.push(p);
        }
        Self { orders, prefix }
    }

    fn widest(&self) -> usize {
        self.orders.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Minimal mass that must be removed so that no column keeps more than `k` atoms.
    fn cost(&self, k: usize) -> f64 {
        self.prefix
            .iter()
            .map(|p| p[(p.len() - 1).saturating_sub(k)])
            .sum()
    }
}

pub fn smooth_h0_cond(j: &JointDist, eps: f64) -> Result<SmoothResult> {
    check_eps(eps)?;
    let prof = ColumnProfile::new(j);
    let (mut lo, mut hi) = (1, prof.widest().max(1));
    while lo < hi {
        let mid = (lo + hi) / 2;
        if prof.cost(mid) <= eps + FEAS_TOL {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let k = lo;
    let mut dropped = vec![false; j.masses().len()];
    for order in &prof.orders {
        for &i in &order[..order.len().saturating_sub(k)] {
            dropped[i] = true;
        }
    }
    let witness = SubWeighting::restrict(j, |i| !dropped[i]);
    Ok(SmoothResult {
        value: count_log(witness.max_col_support()),
        witness,
        eps,
    })
}

fn shapes_match<M: MassFunction + ?Sized>(p: &M, q: &M) -> Result<()> {
    if p.shape() != q.shape() {
        return Err(Error::AlphabetMismatch {
            expected: p.shape(),
            found: q.shape(),
        });
    }
    Ok(())
}

pub fn d_inf<M: MassFunction + ?Sized>(p: &M, q: &M) -> Result<f64> {
    shapes_match(p, q)?;
    let mut best = 0.0f64;
    for (index, (&a, &b)) in p.masses().iter().zip(q.masses()).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::Support { index });
            }
            best = best.max(a / b);
        }
    }
    Ok(log2(best))
}

/// Smallest `λ` with `Σ_x (p(x) − λ q(x))^+ ≤ ε`, by walking the breakpoints `p/q` downward.
fn waterfill(p: &[f64], q: &[f64], eps: f64) -> Result<f64> {
    let mut atoms = Vec::new();
    for (index, (&a, &b)) in p.iter().zip(q).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::Support { index });
            }
            atoms.push((a / b, index));
        }
    }
    if atoms.is_empty() {
        return Err(Error::param("reference distribution has empty support"));
    }
    atoms.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let (mut ps, mut qs) = (0.0, 0.0);
    for k in 0..atoms.len() {
        let (ratio, i) = atoms[k];
        ps += p[i];
        qs += q[i];
        let lower = atoms.get(k + 1).map_or(0.0, |a| a.0);
        let lam = (ps - eps) / qs;
        if lam >= lower {
            return Ok(lam.min(ratio));
        }
    }
    // unreachable for eps below the total mass; the last segment extends to zero
    Err(Error::param(format!("smoothing parameter {eps} removes all mass")))
}

/// Smooth max divergence `D_∞^ε(p‖q)`. The witness is `min(p, λ*·q)`; the value can be negative.
pub fn smooth_d_inf<M: MassFunction + ?Sized>(p: &M, q: &M, eps: f64) -> Result<SmoothResult> {
    check_eps(eps)?;
    shapes_match(p, q)?;
    let lam = waterfill(p.masses(), q.masses(), eps)?;
    let (rows, cols) = p.shape();
    let weights = p
        .masses()
        .iter()
        .zip(q.masses())
        .map(|(&a, &b)| if a == 0.0 || a / b <= lam { a } else { lam * b })
        .collect();
    Ok(SmoothResult {
        value: log2(lam),
        witness: SubWeighting::new(rows, cols, weights),
        eps,
    })
}

/// `D_∞^ε(p_{UY} ‖ p_U × p_Y)` using the joint's own marginals.
pub fn smooth_i_inf(j: &JointDist, eps: f64) -> Result<SmoothResult> {
    smooth_d_inf(j, &j.marginal_product(), eps)
}

/// The truncated joint used by the distributed binning decoder, with the three smooth
/// quantities it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub q: SubWeighting,
    /// `H_0^{ε/6}` of the joint.
    pub h_joint: f64,
    /// `H_0^{ε/6}[row | col]`.
    pub h_row_given_col: f64,
    /// `H_0^{ε/6}[col | row]`.
    pub h_col_given_row: f64,
}

/// Intersects the supports of the three `ε/6`-optimal witnesses (joint, row-given-column,
/// column-given-row) and restricts `j` to it. The result lies in `B^{ε/2}(j)`.
pub fn sw_truncation(j: &JointDist, eps: f64) -> Result<Truncation> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("truncation parameter {eps} is outside (0, 1)")));
    }
    let e6 = eps / 6.0;
    let joint = smooth_h0(&j.flatten(), e6)?;
    let rgc = smooth_h0_cond(j, e6)?;
    let cgr = smooth_h0_cond(&j.transpose(), e6)?;
    let cgr_w = cgr.witness.transpose();
    let cols = j.cols();
    let q = SubWeighting::restrict(j, |i| {
        let (r, c) = (i / cols, i % cols);
        joint.witness.weights()[i] > 0.0 && rgc.witness.positive(r, c) && cgr_w.positive(r, c)
    });
    Ok(Truncation {
        q,
        h_joint: joint.value,
        h_row_given_col: rgc.value,
        h_col_given_row: cgr.value,
    })
}

/// Smallest distortion level `v` with `Pr{d(X,Y) ≤ v} > 1 − ε` (strict).
pub fn max_distortion_quantile(j: &JointDist, dt: &DistortionTable, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("quantile level {eps} is outside (0, 1)")));
    }
    if dt.shape() != (j.rows(), j.cols()) {
        return Err(Error::AlphabetMismatch {
            expected: (j.rows(), j.cols()),
            found: dt.shape(),
        });
    }
    let mut atoms: Vec<(f64, f64)> = dt
        .values()
        .iter()
        .zip(j.masses())
        .filter(|(_, &m)| m > 0.0)
        .map(|(&d, &m)| (d, m))
        .collect();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut cum = 0.0;
    let mut k = 0;
    while k < atoms.len() {
        let v = atoms[k].0;
        while k < atoms.len() && atoms[k].0 == v {
            cum += atoms[k].1;
            k += 1;
        }
        if cum > 1.0 - eps {
            return Ok(v);
        }
    }
    Ok(atoms.last().map_or(0.0, |a| a.0))
}
