//! Brute-force reference computations and instance generators shared by the integration
//! tests and the acceptance run. Everything here enumerates instead of optimizing, so it
//! only scales to tiny alphabets.

#![allow(dead_code)]

use std::collections::HashMap;

use oneshot_core::binning::BinAssignment;
use oneshot_core::prob::{FiniteDist, JointDist, MassFunction};
use oneshot_core::smooth::{SubWeighting, FEAS_TOL};
use rand::Rng;

pub fn dist(v: &[f64]) -> FiniteDist {
    FiniteDist::new(v.to_vec()).unwrap()
}

pub fn joint(rows: &[&[f64]]) -> JointDist {
    JointDist::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Random weights where roughly a quarter of the atoms are zero, with at least one positive.
pub fn sparse_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.25) { 0.0 } else { rng.gen::<f64>() })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.gen_range(0..n)] = 1.0;
    }
    w
}

pub fn random_dist<R: Rng>(rng: &mut R, max_atoms: usize) -> FiniteDist {
    let n = rng.gen_range(1..=max_atoms);
    FiniteDist::from_weights(sparse_weights(rng, n)).unwrap()
}

pub fn random_full_dist<R: Rng>(rng: &mut R, n: usize) -> FiniteDist {
    FiniteDist::from_weights((0..n).map(|_| rng.gen::<f64>() + 0.01).collect()).unwrap()
}

pub fn random_joint<R: Rng>(rng: &mut R, max_side: usize) -> JointDist {
    let (r, c) = (rng.gen_range(1..=max_side), rng.gen_range(1..=max_side));
    JointDist::from_weights(r, c, sparse_weights(rng, r * c)).unwrap()
}

pub fn random_joint_shape<R: Rng>(rng: &mut R, r: usize, c: usize) -> JointDist {
    JointDist::from_weights(r, c, sparse_weights(rng, r * c)).unwrap()
}

/// A pair `(p, q)` of equal length with `Supp(p) ⊆ Supp(q)`.
pub fn random_pair<R: Rng>(rng: &mut R, max_atoms: usize) -> (FiniteDist, FiniteDist) {
    let n = rng.gen_range(1..=max_atoms);
    let p = FiniteDist::from_weights(sparse_weights(rng, n)).unwrap();
    let q = FiniteDist::from_weights(
        (0..n)
            .map(|i| if p.mass(i) > 0.0 || rng.gen_bool(0.5) { rng.gen::<f64>() + 0.01 } else { 0.0 })
            .collect(),
    )
    .unwrap();
    (p, q)
}

fn subsets(items: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (1u32..1 << items.len()).map(move |mask| {
        items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &x)| x)
            .collect()
    })
}

fn support<M: MassFunction + ?Sized>(p: &M) -> Vec<usize> {
    (0..p.masses().len()).filter(|&i| p.masses()[i] > 0.0).collect()
}

/// `H_0^ε(p)` by trying every kept set.
pub fn oracle_h0(p: &FiniteDist, eps: f64) -> f64 {
    let sup = support(p);
    let best = subsets(&sup)
        .filter(|s| 1.0 - s.iter().map(|&i| p.mass(i)).sum::<f64>() <= eps + FEAS_TOL)
        .map(|s| s.len())
        .min()
        .unwrap();
    (best as f64).log2()
}

/// `H_0^ε[row|col]` by enumerating, per column, every kept set and then every cap `k`
/// on the number of atoms kept in a column.
pub fn oracle_h0_cond(j: &JointDist, eps: f64) -> f64 {
    let mut best_by_size: Vec<Vec<f64>> = Vec::new();
    let mut col_mass = Vec::new();
    for c in 0..j.cols() {
        let sup: Vec<usize> = (0..j.rows()).filter(|&r| j.get(r, c) > 0.0).collect();
        if sup.is_empty() {
            continue;
        }
        let mut best = vec![0.0; sup.len() + 1];
        for s in subsets(&sup) {
            let m: f64 = s.iter().map(|&r| j.get(r, c)).sum();
            best[s.len()] = f64::max(best[s.len()], m);
        }
        for k in 1..best.len() {
            best[k] = best[k].max(best[k - 1]);
        }
        col_mass.push(sup.iter().map(|&r| j.get(r, c)).sum::<f64>());
        best_by_size.push(best);
    }
    let widest = best_by_size.iter().map(|b| b.len() - 1).max().unwrap();
    for k in 1..=widest {
        let removed: f64 = best_by_size
            .iter()
            .zip(&col_mass)
            .map(|(b, m)| m - b[k.min(b.len() - 1)])
            .sum();
        if removed <= eps + FEAS_TOL {
            return (k as f64).log2();
        }
    }
    (widest as f64).log2()
}

/// `D_∞^ε(p‖q) = log2 max_S (p(S) − ε)/q(S)` over nonempty subsets of `Supp(p)`.
pub fn oracle_d_inf<M: MassFunction + ?Sized>(p: &M, q: &M, eps: f64) -> f64 {
    let sup = support(p);
    let best = subsets(&sup)
        .map(|s| {
            let ps: f64 = s.iter().map(|&i| p.masses()[i]).sum();
            let qs: f64 = s.iter().map(|&i| q.masses()[i]).sum();
            (ps - eps) / qs
        })
        .fold(f64::NEG_INFINITY, f64::max);
    best.log2()
}

/// Decoder that scans every pair of the truncated support in the received bin product.
pub fn oracle_sw_error(bin_a: &BinAssignment, bin_b: &BinAssignment, q: &SubWeighting, j: &JointDist) -> f64 {
    let mut err = 0.0;
    for x in 0..j.rows() {
        for y in 0..j.cols() {
            let p = j.get(x, y);
            if p <= 0.0 {
                continue;
            }
            let mut found = Vec::new();
            for x2 in 0..j.rows() {
                for y2 in 0..j.cols() {
                    if q.get(x2, y2) > 0.0 && bin_a.bin(x2) == bin_a.bin(x) && bin_b.bin(y2) == bin_b.bin(y) {
                        found.push((x2, y2));
                    }
                }
            }
            if found != [(x, y)] {
                err += p;
            }
        }
    }
    err
}

/// Exact error of bin-plus-side-information decoding when the decoder sees `u = side(y)`.
pub fn oracle_side_error(bins: &BinAssignment, q: &SubWeighting, j_xy: &JointDist, side: impl Fn(usize) -> usize) -> f64 {
    let mut err = 0.0;
    for x in 0..j_xy.rows() {
        for y in 0..j_xy.cols() {
            let p = j_xy.get(x, y);
            if p <= 0.0 {
                continue;
            }
            let u = side(y);
            let cands: Vec<usize> = (0..j_xy.rows())
                .filter(|&x2| bins.bin(x2) == bins.bin(x) && q.get(x2, u) > 0.0)
                .collect();
            if cands != [x] {
                err += p;
            }
        }
    }
    err
}

/// Output law of rejection sampling summed trial by trial: acceptance at trial `j` after
/// `j − 1` rejections, or the first draw conditioned on rejection when all `L` reject.
pub fn oracle_rejection_law(base: &FiniteDist, target: &FiniteDist, l: u64) -> Vec<f64> {
    let ratio = (0..base.len())
        .filter(|&u| target.mass(u) > 0.0)
        .map(|u| target.mass(u) / base.mass(u))
        .fold(0.0, f64::max);
    let thr: Vec<f64> = (0..base.len())
        .map(|u| if base.mass(u) > 0.0 { (target.mass(u) / base.mass(u) / ratio).min(1.0) } else { 0.0 })
        .collect();
    let accept: f64 = (0..base.len()).map(|u| base.mass(u) * thr[u]).sum();
    let mut law = vec![0.0; base.len()];
    let mut alive = 1.0;
    for _ in 0..l {
        for u in 0..base.len() {
            law[u] += alive * base.mass(u) * thr[u];
        }
        alive *= 1.0 - accept;
    }
    if accept < 1.0 {
        for u in 0..base.len() {
            law[u] += alive * base.mass(u) * (1.0 - thr[u]) / (1.0 - accept);
        }
    }
    law
}

/// Counts of each value in a sample, as frequencies.
pub fn frequencies(samples: &[usize], n: usize) -> Vec<f64> {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &s in samples {
        *counts.entry(s).or_default() += 1;
    }
    (0..n)
        .map(|i| counts.get(&i).copied().unwrap_or(0) as f64 / samples.len() as f64)
        .collect()
}

/// Whether an observed frequency is within three binomial standard errors of `p`.
pub fn within_3_sigma(freq: f64, p: f64, trials: usize) -> bool {
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    (freq - p).abs() <= 3.0 * se + 1e-12
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
