//! Relative gain arrays, the inverse RGA of a PD matrix, and the
//! counterexample search for larger sizes.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::Rational;
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Numeric};

/// Float-mode nonnegativity slack.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Sampled Cholesky entries are multiples of `2^-SAMPLE_BITS`.
pub const SAMPLE_BITS: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    Exact,
}

impl Mode {
    pub fn of<T: Numeric>() -> Mode {
        if T::EXACT {
            Mode::Exact
        } else {
            Mode::Float
        }
    }
}

/// `M ∘ (M⁻¹)ᵀ`.
pub fn rga<T: Numeric>(m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    m.hadamard(&m.inverse()?.transpose())
}

/// `(P ∘ P⁻¹)⁻¹`.
pub fn irga<T: Numeric>(p: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    p.hadamard(&p.inverse()?)?.inverse()
}

#[derive(Clone, Debug, Serialize)]
pub struct IrgaReport {
    pub mode: Mode,
    pub n: usize,
    pub s: DenseMatrix<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_exact: Option<DenseMatrix<String>>,
    pub max_row_sum_dev: f64,
    pub max_col_sum_dev: f64,
    pub min_entry: f64,
    pub min_entry_at: (usize, usize),
    pub pd: bool,
    pub nonnegative: bool,
    pub doubly_stochastic: bool,
    pub tol: f64,
}

/// Membership checks on an already computed `S`.
pub fn assess<T: Numeric>(s: &DenseMatrix<T>, tol: f64) -> Result<IrgaReport> {
    let n = s.require_square()?;
    let one = T::one();
    let dev = |v: Vec<T>| v.iter().map(|x| x.sub(&one).abs_val().to_f64()).fold(0.0, f64::max);
    let max_row_sum_dev = dev(s.row_sums());
    let max_col_sum_dev = dev(s.col_sums());

    let mut at = (0, 0);
    for i in 0..n {
        for j in 0..n {
            if s[(i, j)] < s[at] {
                at = (i, j);
            }
        }
    }
    let min = &s[at];
    let nonnegative = if T::EXACT { !(*min < T::zero()) } else { min.to_f64() >= -tol };
    let sum_tol = if T::EXACT { 0.0 } else { tol };
    let doubly_stochastic =
        nonnegative && max_row_sum_dev <= sum_tol && max_col_sum_dev <= sum_tol;

    let half = T::from_rational(&Rational::new(1.into(), 2.into()));
    let sym = DenseMatrix::from_fn(n, n, |i, j| s[(i, j)].add(&s[(j, i)]).mul(&half));
    let pd = sym.is_positive_definite().unwrap_or(false);

    Ok(IrgaReport {
        mode: Mode::of::<T>(),
        n,
        s: s.to_f64(),
        s_exact: T::EXACT.then(|| s.map(Numeric::render)),
        max_row_sum_dev,
        max_col_sum_dev,
        min_entry: min.to_f64(),
        min_entry_at: at,
        pd,
        nonnegative,
        doubly_stochastic,
        tol,
    })
}

/// Computes `S = irga(P)` for a symmetric PD `P` and checks that it is
/// nonnegative, PD and doubly stochastic.
pub fn check_conjecture<T: Numeric>(p: &DenseMatrix<T>, tol: f64) -> Result<IrgaReport> {
    p.require_symmetric()?;
    if !p.is_positive_definite()? {
        return Err(Error::NotPositiveDefinite);
    }
    assess(&irga(p)?, tol)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `t` in a run seeded with `seed`.
pub fn mix(seed: u64, t: u64) -> u64 {
    splitmix64(seed ^ splitmix64(t))
}

/// A PD matrix `P = L Lᵀ` with unit-diagonal lower-triangular `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct PdSample {
    pub seed: u64,
    pub n: usize,
    pub l: DenseMatrix<Rational>,
    pub p: DenseMatrix<Rational>,
}

impl PdSample {
    /// Builds the sample from the strict lower part of `L` in row-major order.
    pub fn from_lower(seed: u64, n: usize, lower: &[Rational]) -> Result<PdSample> {
        if lower.len() != n * (n - 1) / 2 {
            return Err(Error::DimensionMismatch(format!(
                "{} strict-lower entries for n = {n}",
                lower.len()
            )));
        }
        let mut l = DenseMatrix::<Rational>::identity(n);
        let mut it = lower.iter();
        for i in 1..n {
            for j in 0..i {
                l[(i, j)] = it.next().expect("length checked").clone();
            }
        }
        let p = l.matmul(&l.transpose())?;
        Ok(PdSample { seed, n, l, p })
    }

    pub fn lower(&self) -> Vec<Rational> {
        (1..self.n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|ij| self.l[ij].clone()).collect()
    }

    pub fn p_as<T: Numeric>(&self) -> DenseMatrix<T> {
        DenseMatrix::from_rationals(&self.p)
    }
}

impl Serialize for PdSample {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PdSample", 4)?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("l", &self.l.map(Numeric::render))?;
        st.serialize_field("p", &self.p.map(Numeric::render))?;
        st.end()
    }
}

fn sample_lower(n: usize, seed: u64, range: f64) -> Result<Vec<Rational>> {
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::Precondition(format!("sampling range must be positive, got {range}")));
    }
    let scale = (1u64 << SAMPLE_BITS) as f64;
    let k = (range * scale).round().max(1.0);
    if k > i64::MAX as f64 / 2.0 {
        return Err(Error::Precondition(format!("sampling range {range} too large")));
    }
    let k = k as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let denom = BigInt::from(1u64 << SAMPLE_BITS);
    Ok((0..n * n.saturating_sub(1) / 2)
        .map(|_| Rational::new(BigInt::from(rng.random_range(-k..=k)), denom.clone()))
        .collect())
}

/// Deterministic sample whose strict-lower `L` entries are uniform on the
/// grid `k / 2^16` within `[-range, range]`.
pub fn random_pd(n: usize, seed: u64, range: f64) -> Result<PdSample> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    PdSample::from_lower(seed, n, &sample_lower(n, seed, range)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleSearch {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub range: f64,
    pub tol: f64,
    /// Objective evaluations spent refining each sample by coordinate
    /// descent on the smallest IRGA entry; zero means plain sampling.
    pub refine_evals: usize,
    pub chunk: u64,
}

impl Default for CounterexampleSearch {
    fn default() -> Self {
        CounterexampleSearch {
            n: 7,
            trials: 100_000,
            seed: 0,
            range: 2.0,
            tol: DEFAULT_TOL,
            refine_evals: 4000,
            chunk: 256,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub trial: u64,
    pub float_min_entry: f64,
    pub sample: PdSample,
    pub report: IrgaReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub counterexample: Option<Counterexample>,
    pub trials_evaluated: u64,
    pub float_hits: u64,
    pub certified_hits: u64,
    pub hit_rate: f64,
}

/// Smallest IRGA entry of `L Lᵀ` in floating point, `+inf` if singular.
fn float_objective(n: usize, lower: &[f64]) -> f64 {
    let mut l = DenseMatrix::<f64>::identity(n);
    let mut k = 0;
    for i in 1..n {
        for j in 0..i {
            l[(i, j)] = lower[k];
            k += 1;
        }
    }
    let p = l.matmul(&l.transpose()).expect("square");
    match irga(&p) {
        Ok(s) => s.as_slice().iter().copied().fold(f64::INFINITY, f64::min),
        Err(_) => f64::INFINITY,
    }
}

const MIN_STEP: f64 = 1.0 / (1u64 << 20) as f64;

/// Compass search with dyadic steps, so every iterate stays exactly
/// representable as a rational with a power-of-two denominator.
fn descend(n: usize, x: &mut [f64], budget: usize, target: f64) -> f64 {
    let mut fx = float_objective(n, x);
    let mut evals = 0;
    let mut step = 0.5;
    while evals < budget && fx >= target {
        let mut improved = false;
        'coords: for k in 0..x.len() {
            for dir in [step, -step] {
                if evals >= budget {
                    break 'coords;
                }
                x[k] += dir;
                let fy = float_objective(n, x);
                evals += 1;
                if fy < fx {
                    fx = fy;
                    improved = true;
                    if fx < target {
                        break 'coords;
                    }
                    break;
                }
                x[k] -= dir;
            }
        }
        if !improved {
            step /= 2.0;
            if step < MIN_STEP {
                break;
            }
        }
    }
    fx
}

enum TrialResult {
    Miss,
    Spurious,
    Certified(Box<Counterexample>),
}

fn run_trial(cfg: &CounterexampleSearch, t: u64) -> Result<TrialResult> {
    let seed = mix(cfg.seed, t);
    let lower = sample_lower(cfg.n, seed, cfg.range)?;
    let mut x: Vec<f64> = lower.iter().map(Numeric::to_f64).collect();
    let fmin = descend(cfg.n, &mut x, cfg.refine_evals, -cfg.tol);
    if !(fmin < -cfg.tol) {
        return Ok(TrialResult::Miss);
    }
    let exact_lower: Vec<Rational> =
        x.iter().map(|&v| Rational::from_float(v).expect("finite iterate")).collect();
    let sample = PdSample::from_lower(seed, cfg.n, &exact_lower)?;
    let report = match irga(&sample.p).and_then(|s| assess(&s, 0.0)) {
        Ok(r) => r,
        Err(_) => return Ok(TrialResult::Spurious),
    };
    if report.nonnegative {
        return Ok(TrialResult::Spurious);
    }
    Ok(TrialResult::Certified(Box::new(Counterexample {
        trial: t,
        float_min_entry: fmin,
        sample,
        report,
    })))
}

/// Looks for a PD matrix whose IRGA has a negative entry. Trials run in
/// fixed-size chunks in parallel; the search stops after the first chunk
/// that contains an exactly certified hit and reports the lowest trial index
/// from it, so the result does not depend on the thread count.
pub fn search_counterexample(cfg: &CounterexampleSearch) -> Result<SearchOutcome> {
    if cfg.n < 2 {
        return Err(Error::Precondition("counterexample search needs n >= 2".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let chunk = cfg.chunk.max(1);
    let (mut evaluated, mut float_hits, mut certified) = (0u64, 0u64, 0u64);
    let mut found: Option<Counterexample> = None;
    let mut start = 0;
    while start < cfg.trials && found.is_none() {
        let end = (start + chunk).min(cfg.trials);
        let results: Vec<TrialResult> =
            (start..end).into_par_iter().map(|t| run_trial(cfg, t)).collect::<Result<_>>()?;
        evaluated += end - start;
        for r in results {
            match r {
                TrialResult::Miss => {}
                TrialResult::Spurious => float_hits += 1,
                TrialResult::Certified(c) => {
                    float_hits += 1;
                    certified += 1;
                    if found.is_none() {
                        found = Some(*c);
                    }
                }
            }
        }
        start = end;
    }
    Ok(SearchOutcome {
        counterexample: found,
        trials_evaluated: evaluated,
        float_hits,
        certified_hits: certified,
        hit_rate: certified as f64 / evaluated as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat};

    fn ri(rows: &[&[i64]]) -> DenseMatrix<Rational> {
        DenseMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn two_by_two_closed_forms() {
        let p = ri(&[&[2, 1], &[1, 1]]);
        assert_eq!(rga(&p).unwrap(), ri(&[&[2, -1], &[-1, 2]]));
        let s = irga(&p).unwrap();
        let expect = DenseMatrix::from_rows(vec![
            vec![rat(2, 3), rat(1, 3)],
            vec![rat(1, 3), rat(2, 3)],
        ])
        .unwrap();
        assert_eq!(s, expect);
        let i = DenseMatrix::<Rational>::identity(3);
        assert_eq!(rga(&i).unwrap(), i);
        assert_eq!(irga(&i).unwrap(), i);
    }

    #[test]
    fn identity_report() {
        let r = check_conjecture(&DenseMatrix::<f64>::identity(4), DEFAULT_TOL).unwrap();
        assert!(r.pd && r.nonnegative && r.doubly_stochastic);
        assert_eq!(r.min_entry, 0.0);
        assert_eq!(r.mode, Mode::Float);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = ri(&[&[1, 2], &[2, 1]]);
        assert!(matches!(check_conjecture(&p, 0.0), Err(Error::NotPositiveDefinite)));
        let p = ri(&[&[2, 1], &[0, 1]]);
        assert!(matches!(check_conjecture(&p, 0.0), Err(Error::NotSymmetric(_))));
        let cfg = CounterexampleSearch { trials: 0, ..Default::default() };
        assert!(matches!(search_counterexample(&cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = random_pd(3, 17, 2.0).unwrap();
        assert_eq!(a, random_pd(3, 17, 2.0).unwrap());
        assert_ne!(a, random_pd(3, 18, 2.0).unwrap());
        assert_eq!(random_pd(1, 5, 2.0).unwrap().p, DenseMatrix::identity(1));
        let lim = int(2);
        assert!(a.lower().iter().all(|x| *x >= -lim.clone() && *x <= lim));
    }

    #[test]
    fn samples_are_positive_definite() {
        for seed in 0..1000 {
            let s = random_pd(6, seed, 2.0).unwrap();
            assert!(s.p.is_positive_definite().unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn exact_rows_sum_to_one() {
        for seed in 0..20 {
            let s = random_pd(4, seed, 2.0).unwrap();
            let r = check_conjecture(&s.p, 0.0).unwrap();
            assert_eq!((r.max_row_sum_dev, r.max_col_sum_dev), (0.0, 0.0));
            assert!(r.doubly_stochastic && r.pd);
        }
    }

    #[test]
    fn mix_separates_streams() {
        assert_ne!(mix(0, 0), mix(0, 1));
        assert_ne!(mix(0, 1), mix(1, 0));
        assert_eq!(mix(42, 7), mix(42, 7));
    }
}
