//! Finite-blocklength experiments on i.i.d. products: normalized smooth quantities as `n`
//! grows, and quantiles of the normalized log-likelihood-ratio spectrum.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prob::{kl_divergence, log2, shannon_summary, FiniteDist, JointDist, MassFunction};
use crate::smooth::{smooth_d_inf, smooth_h0_cond};

/// Most atoms an expanded distribution may have.
pub const MAX_ATOMS: usize = 1 << 22;

fn check_atoms(base: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("block length must be at least 1"));
    }
    let mut atoms: u128 = 1;
    for _ in 0..n {
        atoms = atoms.saturating_mul(base as u128);
        if atoms > MAX_ATOMS as u128 {
            let full = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            return Err(Error::Resource {
                atoms: full,
                limit: MAX_ATOMS,
            });
        }
    }
    Ok(())
}

fn tensor(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// `P^{×n}`; sequence `(x_1, .., x_n)` has index `Σ x_i·|X|^{n−i}`.
pub fn product_expand(base: &FiniteDist, n: usize) -> Result<FiniteDist> {
    check_atoms(base.len(), n)?;
    let mut out = base.masses().to_vec();
    for _ in 1..n {
        out = tensor(&out, base.masses());
    }
    Ok(FiniteDist::from_raw(out))
}

/// `p_{XY}^{×n}` as a joint of `X^n` (rows) and `Y^n` (columns).
pub fn product_expand_joint(base: &JointDist, n: usize) -> Result<JointDist> {
    check_atoms(base.rows() * base.cols(), n)?;
    let (r, c) = (base.rows(), base.cols());
    let mut out = base.clone();
    for _ in 1..n {
        let (or, oc) = (out.rows(), out.cols());
        let mut masses = vec![0.0; or * r * oc * c];
        let width = oc * c;
        for r1 in 0..or {
            for r2 in 0..r {
                let row = (r1 * r + r2) * width;
                for c1 in 0..oc {
                    let a = out.get(r1, c1);
                    if a == 0.0 {
                        continue;
                    }
                    for c2 in 0..c {
                        masses[row + c1 * c + c2] = a * base.get(r2, c2);
                    }
                }
            }
        }
        out = JointDist::from_raw(or * r, oc * c, masses);
    }
    Ok(out)
}

/// One entry of a convergence sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub n: usize,
    pub value: f64,
    pub reference: f64,
    pub gap: f64,
}

impl ConvergencePoint {
    fn new(n: usize, value: f64, reference: f64) -> Self {
        Self {
            n,
            value,
            reference,
            gap: (value - reference).abs(),
        }
    }
}

/// `H_0^ε[X^n|Y^n]/n` for `n = 1..=n_max`, against `H[X|Y]`.
pub fn convergence_h0_cond(base: &JointDist, eps: f64, n_max: usize) -> Result<Vec<ConvergencePoint>> {
    check_atoms(base.rows() * base.cols(), n_max)?;
    let reference = shannon_summary(base).h_x_given_y;
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let j = product_expand_joint(base, n)?;
            let v = smooth_h0_cond(&j, eps)?.value / n as f64;
            Ok(ConvergencePoint::new(n, v, reference))
        })
        .collect()
}

/// `D_∞^ε(P^{×n}‖Q^{×n})/n` for `n = 1..=n_max`, against `D(P‖Q)`.
pub fn convergence_d_inf(p: &FiniteDist, q: &FiniteDist, eps: f64, n_max: usize) -> Result<Vec<ConvergencePoint>> {
    check_atoms(p.len(), n_max)?;
    let reference = kl_divergence(p, q)?;
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let (pn, qn) = (product_expand(p, n)?, product_expand(q, n)?);
            let v = smooth_d_inf(&pn, &qn, eps)?.value / n as f64;
            Ok(ConvergencePoint::new(n, v, reference))
        })
        .collect()
}

/// Per-atom normalized log-likelihood ratios `(1/n)·log(P/Q)` over the support of `P`,
/// paired with their `P` mass, sorted ascending.
fn spectrum<M: MassFunction + ?Sized>(p: &M, q: &M, n: usize) -> Result<Vec<(f64, f64)>> {
    if p.shape() != q.shape() {
        return Err(Error::AlphabetMismatch {
            expected: p.shape(),
            found: q.shape(),
        });
    }
    let mut out = Vec::new();
    for (index, (&a, &b)) in p.masses().iter().zip(q.masses()).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::Support { index });
            }
            out.push((log2(a / b) / n as f64, a));
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(out)
}

/// Smallest `t` with `P{(1/n)·log(P/Q) ≤ t} ≥ 1 − α`, for `P`, `Q` already expanded to
/// block length `n`.
pub fn info_spectrum_quantile<M: MassFunction + ?Sized>(p: &M, q: &M, n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha = {alpha} is outside (0, 1)")));
    }
    let levels = spectrum(p, q, n)?;
    let target = 1.0 - alpha;
    let mut acc = 0.0;
    for (i, &(t, m)) in levels.iter().enumerate() {
        acc += m;
        let tied = levels.get(i + 1).is_some_and(|next| next.0 == t);
        if !tied && acc >= target - 1e-15 {
            return Ok(t);
        }
    }
    Ok(levels.last().map_or(0.0, |s| s.0))
}

/// `P{(1/n)·log(P/Q) > threshold}`.
pub fn spectrum_tail<M: MassFunction + ?Sized>(p: &M, q: &M, n: usize, threshold: f64) -> Result<f64> {
    Ok(spectrum(p, q, n)?
        .iter()
        .filter(|s| s.0 > threshold)
        .map(|s| s.1)
        .sum())
}

/// `P` restricted to the atoms whose normalized log-likelihood ratio is at most `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalTruncation {
    /// `P{(1/n)·log(P/Q) ≤ λ}`.
    pub mass: f64,
    /// `(1/n)·log max φ/Q` over the retained atoms.
    pub value: f64,
}

pub fn typical_truncation<M: MassFunction + ?Sized>(p: &M, q: &M, n: usize, lambda: f64) -> Result<TypicalTruncation> {
    let levels = spectrum(p, q, n)?;
    let kept = levels.iter().filter(|s| s.0 <= lambda);
    let (mut mass, mut value) = (0.0, f64::NEG_INFINITY);
    for s in kept {
        mass += s.1;
        value = value.max(s.0);
    }
    Ok(TypicalTruncation { mass, value })
}

/// The tail inequality behind the converse for the smooth max divergence rate at block
/// length `n`: the mass above `D_∞^ε/n + δ` is at most `ε + 2^{−nδ/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    pub n: usize,
    pub normalized: f64,
    pub tail_mass: f64,
    pub bound: f64,
}

impl TailCheck {
    pub fn holds(&self) -> bool {
        self.tail_mass <= self.bound + crate::prob::DERIVED_TOL
    }
}

pub fn tail_check(p: &FiniteDist, q: &FiniteDist, eps: f64, delta: f64, n: usize) -> Result<TailCheck> {
    let (pn, qn) = (product_expand(p, n)?, product_expand(q, n)?);
    let normalized = smooth_d_inf(&pn, &qn, eps)?.value / n as f64;
    let tail_mass = spectrum_tail(&pn, &qn, n, normalized + delta)?;
    Ok(TailCheck {
        n,
        normalized,
        tail_mass,
        bound: eps + (-(n as f64) * delta / 2.0).exp2(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::DERIVED_TOL;

    fn dist(v: &[f64]) -> FiniteDist {
        FiniteDist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn expand_examples() {
        let p = dist(&[0.3, 0.7]);
        assert_eq!(product_expand(&p, 1).unwrap(), p);
        let p2 = product_expand(&p, 2).unwrap();
        let want = [0.09, 0.21, 0.21, 0.49];
        for (a, b) in p2.masses().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let coin = product_expand(&FiniteDist::uniform(2), 3).unwrap();
        assert_eq!(coin, FiniteDist::uniform(8));
    }

    #[test]
    fn expand_guard() {
        assert!(product_expand(&FiniteDist::uniform(2), 22).is_ok());
        assert!(matches!(product_expand(&FiniteDist::uniform(2), 23), Err(Error::Resource { .. })));
        assert!(matches!(product_expand(&FiniteDist::uniform(4), 12), Err(Error::Resource { .. })));
        assert!(product_expand(&FiniteDist::uniform(2), 0).is_err());
    }

    #[test]
    fn expand_joint_layout() {
        let j = JointDist::from_rows(&[vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
        let j2 = product_expand_joint(&j, 2).unwrap();
        assert_eq!((j2.rows(), j2.cols()), (4, 4));
        // x = (1, 0), y = (0, 1)
        assert!((j2.get(2, 1) - 0.2 * 0.1).abs() < 1e-15);
        let want = product_expand(&j.row_marginal(), 2).unwrap();
        for (a, b) in j2.row_marginal().masses().iter().zip(want.masses()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn independent_joint_gives_marginal_support() {
        let j = dist(&[0.5, 0.5]).product(&dist(&[0.3, 0.7]));
        for pt in convergence_h0_cond(&j, 0.0, 4).unwrap() {
            assert!((pt.value - 1.0).abs() < DERIVED_TOL);
        }
    }

    #[test]
    fn equal_pair_is_flat() {
        let p = dist(&[0.2, 0.8]);
        for pt in convergence_d_inf(&p, &p, 0.0, 5).unwrap() {
            assert!(pt.value.abs() < DERIVED_TOL);
        }
        let pn = product_expand(&p, 3).unwrap();
        assert_eq!(info_spectrum_quantile(&pn, &pn, 3, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn quantile_is_monotone_in_alpha() {
        let (p, q) = (dist(&[0.5, 0.5]), dist(&[0.25, 0.75]));
        let (pn, qn) = (product_expand(&p, 8).unwrap(), product_expand(&q, 8).unwrap());
        let mut last = f64::INFINITY;
        for a in [0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let t = info_spectrum_quantile(&pn, &qn, 8, a).unwrap();
            assert!(t <= last);
            last = t;
        }
    }

    #[test]
    fn single_letter_quantile_by_hand() {
        // LLRs: 1 with mass 0.5, log2(2/3) with mass 0.5
        let (p, q) = (dist(&[0.5, 0.5]), dist(&[0.25, 0.75]));
        assert!((info_spectrum_quantile(&p, &q, 1, 0.6).unwrap() - log2(2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(info_spectrum_quantile(&p, &q, 1, 0.4).unwrap(), 1.0);
        assert_eq!(info_spectrum_quantile(&p, &q, 1, 0.5).unwrap(), log2(2.0 / 3.0));
    }

    #[test]
    fn truncation_mass_grows() {
        let (p, q) = (dist(&[0.5, 0.5]), dist(&[0.25, 0.75]));
        let lambda = kl_divergence(&p, &q).unwrap() + 0.2;
        let m = |n| {
            let (pn, qn) = (product_expand(&p, n).unwrap(), product_expand(&q, n).unwrap());
            typical_truncation(&pn, &qn, n, lambda).unwrap()
        };
        let (a, b) = (m(4), m(16));
        assert!(b.mass > a.mass);
        assert!(b.value <= lambda);
    }

    #[test]
    fn tail_inequality_small_n() {
        let (p, q) = (dist(&[0.5, 0.5]), dist(&[0.25, 0.75]));
        for n in 1..=8 {
            assert!(tail_check(&p, &q, 0.01, 0.1, n).unwrap().holds());
        }
    }
}
