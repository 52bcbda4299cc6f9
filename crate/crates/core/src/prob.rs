//! Finite probability substrate: distributions, joints, kernels, distances and sampling.
//!
//! Symbols are dense ids `0..n`. A [`JointDist`] is stored row-major; by convention the
//! row symbol is the first variable of the pair (the `X` of `p_{XY}`) and the column symbol
//! the second.

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance for normalization checks and ball-membership tests.
pub const NORM_TOL: f64 = 1e-12;

/// Tolerance for equalities between derived quantities (entropies, chain rules, bounds).
pub const DERIVED_TOL: f64 = 1e-9;

/// Base-2 logarithm. Every information quantity in this crate is in bits.
#[inline]
pub fn log2(x: f64) -> f64 {
    x.log2()
}

/// Natural logarithm, only for the `ln` terms that appear inside rate bounds.
#[inline]
pub fn ln(x: f64) -> f64 {
    x.ln()
}

fn validate_masses(masses: &[f64]) -> Result<f64> {
    if masses.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let mut sum = 0.0;
    for (index, &value) in masses.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::InvalidMass { index, value });
        }
        sum += value;
    }
    Ok(sum)
}

/// Anything that is a table of masses with a (rows, cols) shape.
pub trait MassFunction {
    fn masses(&self) -> &[f64];

    fn shape(&self) -> (usize, usize);
}

/// A probability mass function on `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist {
    masses: Vec<f64>,
}

impl FiniteDist {
    /// Validates nonnegativity and normalization (within [`NORM_TOL`]).
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        let sum = validate_masses(&masses)?;
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { masses })
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum = validate_masses(&weights)?;
        if !(sum > 0.0) {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            masses: weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    /// Skips the normalization check; used for exact products whose total drifts by
    /// accumulated rounding only.
    pub(crate) fn from_raw(masses: Vec<f64>) -> Self {
        Self { masses }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs at least one atom");
        Self {
            masses: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(n: usize, at: usize) -> Self {
        assert!(at < n);
        let mut masses = vec![0.0; n];
        masses[at] = 1.0;
        Self { masses }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, _)| i)
    }

    pub fn support_size(&self) -> usize {
        self.masses.iter().filter(|&&m| m > 0.0).count()
    }

    /// Inverse-CDF draw. Zero-mass atoms are never returned.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        inverse_cdf(&self.masses, rng.gen::<f64>())
    }

    /// The independent product `self × other` as a joint with `self` on the rows.
    pub fn product(&self, other: &FiniteDist) -> JointDist {
        let mut masses = Vec::with_capacity(self.len() * other.len());
        for &a in &self.masses {
            masses.extend(other.masses.iter().map(|&b| a * b));
        }
        JointDist {
            rows: self.len(),
            cols: other.len(),
            masses,
        }
    }
}

impl MassFunction for FiniteDist {
    fn masses(&self) -> &[f64] {
        &self.masses
    }

    fn shape(&self) -> (usize, usize) {
        (self.masses.len(), 1)
    }
}

fn inverse_cdf(masses: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &m) in masses.iter().enumerate() {
        if m > 0.0 {
            acc += m;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    // u landed in the rounding gap above the accumulated total
    last_positive
}

/// Precomputed cumulative table for repeated draws from one distribution.
#[derive(Debug, Clone)]
pub struct CdfSampler {
    cdf: Vec<f64>,
    symbols: Vec<usize>,
}

impl CdfSampler {
    pub fn new(dist: &FiniteDist) -> Self {
        let mut cdf = Vec::new();
        let mut symbols = Vec::new();
        let mut acc = 0.0;
        for i in dist.support() {
            acc += dist.mass(i);
            cdf.push(acc);
            symbols.push(i);
        }
        Self { cdf, symbols }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.gen::<f64>();
        let k = self.cdf.partition_point(|&c| c <= u);
        self.symbols[k.min(self.symbols.len() - 1)]
    }
}

/// A joint mass function on `rows × cols`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    rows: usize,
    cols: usize,
    masses: Vec<f64>,
}

impl JointDist {
    pub fn new(rows: usize, cols: usize, masses: Vec<f64>) -> Result<Self> {
        if rows * cols != masses.len() {
            return Err(Error::AlphabetMismatch {
                expected: (rows, cols),
                found: (masses.len(), 1),
            });
        }
        let sum = validate_masses(&masses)?;
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { rows, cols, masses })
    }

    pub fn from_rows(table: &[Vec<f64>]) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if table.iter().any(|r| r.len() != cols) {
            return Err(Error::Format("ragged joint table".into()));
        }
        Self::new(rows, cols, table.concat())
    }

    pub fn from_weights(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self> {
        if rows * cols != weights.len() {
            return Err(Error::AlphabetMismatch {
                expected: (rows, cols),
                found: (weights.len(), 1),
            });
        }
        let flat = FiniteDist::from_weights(weights)?;
        Ok(Self {
            rows,
            cols,
            masses: flat.masses,
        })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, masses: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, masses.len());
        Self { rows, cols, masses }
    }

    /// `p(r, c) = marginal(r) · kernel(r)(c)`. Absent kernel rows must carry zero marginal mass.
    pub fn compose(marginal: &FiniteDist, kernel: &Kernel) -> Result<Self> {
        if marginal.len() != kernel.len() {
            return Err(Error::AlphabetMismatch {
                expected: (marginal.len(), kernel.out_size()),
                found: (kernel.len(), kernel.out_size()),
            });
        }
        let cols = kernel.out_size();
        let mut masses = Vec::with_capacity(marginal.len() * cols);
        for (r, &m) in marginal.masses().iter().enumerate() {
            match kernel.row(r) {
                Some(row) => masses.extend(row.masses().iter().map(|&k| m * k)),
                None if m == 0.0 => masses.extend(std::iter::repeat_n(0.0, cols)),
                None => {
                    return Err(Error::param(format!(
                        "kernel row {r} is absent but has marginal mass {m}"
                    )))
                }
            }
        }
        Ok(Self::from_raw(marginal.len(), cols, masses))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.masses[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.masses[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_marginal(&self) -> FiniteDist {
        FiniteDist::from_raw((0..self.rows).map(|r| self.row(r).iter().sum()).collect())
    }

    pub fn col_marginal(&self) -> FiniteDist {
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (acc, &m) in out.iter_mut().zip(self.row(r)) {
                *acc += m;
            }
        }
        FiniteDist::from_raw(out)
    }

    /// The column-given-row kernel. Rows of zero marginal mass are absent.
    pub fn conditional(&self) -> Kernel {
        let marg = self.row_marginal();
        let rows = (0..self.rows)
            .map(|r| {
                let m = marg.mass(r);
                (m > 0.0).then(|| FiniteDist::from_raw(self.row(r).iter().map(|&v| v / m).collect()))
            })
            .collect();
        Kernel {
            rows,
            out: self.cols,
        }
    }

    pub fn transpose(&self) -> JointDist {
        let mut masses = vec![0.0; self.masses.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                masses[c * self.rows + r] = self.get(r, c);
            }
        }
        JointDist::from_raw(self.cols, self.rows, masses)
    }

    pub fn flatten(&self) -> FiniteDist {
        FiniteDist::from_raw(self.masses.clone())
    }

    /// Product of this joint's own marginals, `p_row × p_col`.
    pub fn marginal_product(&self) -> JointDist {
        self.row_marginal().product(&self.col_marginal())
    }

    /// Draws a `(row, col)` pair.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let k = inverse_cdf(&self.masses, rng.gen::<f64>());
        (k / self.cols, k % self.cols)
    }
}

impl MassFunction for JointDist {
    fn masses(&self) -> &[f64] {
        &self.masses
    }

    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// A stochastic matrix: one output distribution per conditioning symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rows: Vec<Option<FiniteDist>>,
    out: usize,
}

impl Kernel {
    pub fn new(rows: Vec<Option<FiniteDist>>, out: usize) -> Result<Self> {
        for row in rows.iter().flatten() {
            if row.len() != out {
                return Err(Error::AlphabetMismatch {
                    expected: (1, out),
                    found: (1, row.len()),
                });
            }
        }
        Ok(Self { rows, out })
    }

    /// Every row present and normalized.
    pub fn from_rows(table: &[Vec<f64>]) -> Result<Self> {
        let out = table.first().map_or(0, Vec::len);
        let rows = table
            .iter()
            .map(|r| FiniteDist::new(r.clone()).map(Some))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows, out)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|i| Some(FiniteDist::point(n, i))).collect(),
            out: n,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn out_size(&self) -> usize {
        self.out
    }

    pub fn row(&self, i: usize) -> Option<&FiniteDist> {
        self.rows[i].as_ref()
    }
}

/// `Σ_i |a(i) − b(i)|`.
pub fn l1_distance<M: MassFunction + ?Sized>(a: &M, b: &M) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::AlphabetMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    Ok(a
        .masses()
        .iter()
        .zip(b.masses())
        .map(|(x, y)| (x - y).abs())
        .sum())
}

/// Shannon entropy in bits.
pub fn entropy(p: &FiniteDist) -> f64 {
    entropy_of(p.masses())
}

fn entropy_of(masses: &[f64]) -> f64 {
    -masses
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| m * log2(m))
        .sum::<f64>()
}

/// Relative entropy `D(P‖Q)` in bits. Requires `Supp(P) ⊆ Supp(Q)`.
pub fn kl_divergence(p: &FiniteDist, q: &FiniteDist) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::AlphabetMismatch {
            expected: p.shape(),
            found: q.shape(),
        });
    }
    let mut d = 0.0;
    for (index, (&a, &b)) in p.masses().iter().zip(q.masses()).enumerate() {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::Support { index });
            }
            d += a * log2(a / b);
        }
    }
    Ok(d)
}

/// Shannon reference values for a joint `p_{XY}` (X on rows, Y on columns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShannonSummary {
    pub h_x: f64,
    pub h_y: f64,
    pub h_xy: f64,
    pub h_x_given_y: f64,
    pub h_y_given_x: f64,
    pub i_xy: f64,
}

pub fn shannon_summary(j: &JointDist) -> ShannonSummary {
    let h_x = entropy(&j.row_marginal());
    let h_y = entropy(&j.col_marginal());
    let h_xy = entropy_of(j.masses());
    ShannonSummary {
        h_x,
        h_y,
        h_xy,
        h_x_given_y: h_xy - h_y,
        h_y_given_x: h_xy - h_x,
        i_xy: h_x + h_y - h_xy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dist(v: &[f64]) -> FiniteDist {
        FiniteDist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn l1_examples() {
        let u = FiniteDist::uniform(4);
        assert_eq!(l1_distance(&u, &u).unwrap(), 0.0);
        assert_eq!(l1_distance(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(), 2.0);
        let d = l1_distance(&dist(&[0.7, 0.3]), &dist(&[0.5, 0.5])).unwrap();
        assert!((d - 0.4).abs() < 1e-15);
    }

    #[test]
    fn l1_shape_mismatch() {
        let err = l1_distance(&FiniteDist::uniform(2), &FiniteDist::uniform(3)).unwrap_err();
        assert!(matches!(err, Error::AlphabetMismatch { .. }));
    }

    #[test]
    fn rejects_bad_masses() {
        assert!(matches!(FiniteDist::new(vec![0.5, 0.4]), Err(Error::NotNormalized { .. })));
        assert!(matches!(FiniteDist::new(vec![1.5, -0.5]), Err(Error::InvalidMass { index: 1, .. })));
        assert!(matches!(FiniteDist::new(vec![]), Err(Error::EmptyAlphabet)));
        assert!(FiniteDist::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn product_conditional_is_constant() {
        let p = dist(&[0.2, 0.8]);
        let q = dist(&[0.1, 0.6, 0.3]);
        let k = p.product(&q).conditional();
        for r in 0..2 {
            let row = k.row(r).unwrap();
            for c in 0..3 {
                assert!((row.mass(c) - q.mass(c)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_row_is_absent() {
        let j = JointDist::from_rows(&[vec![0.5, 0.5], vec![0.0, 0.0]]).unwrap();
        let k = j.conditional();
        assert!(k.row(0).is_some());
        assert!(k.row(1).is_none());
        let back = JointDist::compose(&j.row_marginal(), &k).unwrap();
        assert_eq!(back, j);
    }

    #[test]
    fn reconstruction_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let w: Vec<f64> = (0..9).map(|_| rng.gen::<f64>()).collect();
            let j = JointDist::from_weights(3, 3, w).unwrap();
            let back = JointDist::compose(&j.row_marginal(), &j.conditional()).unwrap();
            let residual = l1_distance(&j, &back).unwrap();
            assert!(residual < 1e-12, "residual {residual}");
        }
    }

    #[test]
    fn sampling_point_mass_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = FiniteDist::point(4, 2);
        assert!((0..1000).all(|_| p.sample(&mut rng) == 2));

        let u = FiniteDist::uniform(5);
        let a: Vec<usize> = {
            let mut r = ChaCha8Rng::seed_from_u64(17);
            (0..64).map(|_| u.sample(&mut r)).collect()
        };
        let b: Vec<usize> = {
            let mut r = ChaCha8Rng::seed_from_u64(17);
            (0..64).map(|_| u.sample(&mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_fair_coin_frequency() {
        // 3σ of Binomial(1e5, 1/2)/1e5 is about 0.0047
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = FiniteDist::uniform(2);
        let n = 100_000;
        let ones = (0..n).filter(|_| u.sample(&mut rng) == 1).count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn cdf_sampler_matches_inverse_cdf() {
        let p = dist(&[0.0, 0.25, 0.0, 0.75]);
        let s = CdfSampler::new(&p);
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            assert_eq!(s.sample(&mut r1), p.sample(&mut r2));
        }
    }

    #[test]
    fn shannon_examples() {
        let indep = FiniteDist::uniform(2).product(&FiniteDist::uniform(2));
        let s = shannon_summary(&indep);
        assert!((s.h_xy - 2.0).abs() < 1e-12);
        assert!(s.i_xy.abs() < 1e-12);

        let corr = JointDist::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let s = shannon_summary(&corr);
        assert!(s.h_x_given_y.abs() < 1e-12);
        assert!((s.i_xy - 1.0).abs() < 1e-12);

        let d = kl_divergence(&dist(&[0.5, 0.5]), &dist(&[0.25, 0.75])).unwrap();
        let expected = 0.5 * 2f64.log2() + 0.5 * (2.0f64 / 3.0).log2();
        assert!((d - expected).abs() < 1e-12);
        assert!((d - 0.2075).abs() < 1e-4);
    }

    #[test]
    fn kl_support_violation() {
        let err = kl_divergence(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::Support { index: 1 }));
    }

    fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![Just(0.0), 0.001f64..1.0], n)
            .prop_filter("nonzero total", |w| w.iter().sum::<f64>() > 0.0)
    }

    proptest! {
        #[test]
        fn l1_triangle_inequality(a in weights(5), b in weights(5), c in weights(5)) {
            let (a, b, c) = (
                FiniteDist::from_weights(a).unwrap(),
                FiniteDist::from_weights(b).unwrap(),
                FiniteDist::from_weights(c).unwrap(),
            );
            let ab = l1_distance(&a, &b).unwrap();
            let bc = l1_distance(&b, &c).unwrap();
            let ac = l1_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!((ab - l1_distance(&b, &a).unwrap()).abs() == 0.0);
        }

        #[test]
        fn chain_rule_holds(w in weights(12)) {
            let j = JointDist::from_weights(3, 4, w).unwrap();
            let s = shannon_summary(&j);
            prop_assert!((s.h_xy - (s.h_y + s.h_x_given_y)).abs() < DERIVED_TOL);
            prop_assert!(s.i_xy > -DERIVED_TOL);
        }

        #[test]
        fn transpose_is_involution(w in weights(6)) {
            let j = JointDist::from_weights(2, 3, w).unwrap();
            prop_assert_eq!(j.transpose().transpose(), j.clone());
            prop_assert_eq!(j.transpose().row_marginal(), j.col_marginal());
        }
    }
}
