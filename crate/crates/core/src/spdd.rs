//! Matrices `M = P diag(e) P⁻¹` with symmetric PD `P` whose IRGA is doubly
//! stochastic, their diagonal/spectrum mapping, and closure under Kronecker
//! and block-diagonal composition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::irga::{assess, irga, mix, random_pd, rga, IrgaReport};
use crate::majorization::{majorizes, MajorizationVerdict};
use crate::matrix::{block_diagonal, DenseMatrix, Numeric};

/// Tolerance for the structural identities checked at construction.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Which sizes an atomic gauge may have: the conjecture is proven up to 4
/// and conjectured up to 6. Composed gauges come only from [`kron_gauge`]
/// and [`block_gauge`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeMode {
    Proven,
    Conjectured,
    Composed,
}

impl GaugeMode {
    pub fn max_atomic(self) -> Option<usize> {
        match self {
            GaugeMode::Proven => Some(4),
            GaugeMode::Conjectured => Some(6),
            GaugeMode::Composed => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Provenance<T: Numeric> {
    Atomic(GaugeMode),
    Kron(Vec<Gauge<T>>),
    Block(Vec<Gauge<T>>),
}

/// A symmetric PD `P` with `S = irga(P)` doubly stochastic.
#[derive(Clone, Debug)]
pub struct Gauge<T: Numeric> {
    pub p: DenseMatrix<T>,
    pub s: DenseMatrix<T>,
    /// `P ∘ P⁻ᵀ`, the inverse of `S`.
    pub rga: DenseMatrix<T>,
    pub report: IrgaReport,
    pub provenance: Provenance<T>,
}

pub(crate) fn render_matrix<T: Numeric>(m: &DenseMatrix<T>) -> Value {
    json!(m.to_rows().iter().map(|r| r.iter().map(render).collect::<Vec<_>>()).collect::<Vec<_>>())
}

pub(crate) fn render<T: Numeric>(x: &T) -> Value {
    if T::EXACT {
        Value::String(x.render())
    } else {
        json!(x.to_f64())
    }
}

pub(crate) fn render_vec<T: Numeric>(v: &[T]) -> Value {
    Value::Array(v.iter().map(render).collect())
}

impl<T: Numeric> Provenance<T> {
    pub fn to_json(&self) -> Value {
        match self {
            Provenance::Atomic(mode) => json!({ "kind": "atomic", "mode": mode }),
            Provenance::Kron(c) => json!({ "kind": "kron", "children": c.iter().map(Gauge::to_json).collect::<Vec<_>>() }),
            Provenance::Block(c) => json!({ "kind": "block", "children": c.iter().map(Gauge::to_json).collect::<Vec<_>>() }),
        }
    }
}

impl<T: Numeric> Gauge<T> {
    pub fn n(&self) -> usize {
        self.p.rows()
    }

    /// Exact entries are rendered as strings, float entries as numbers.
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n(),
            "p": render_matrix(&self.p),
            "s": render_matrix(&self.s),
            "rga": render_matrix(&self.rga),
            "report": self.report,
            "provenance": self.provenance.to_json(),
        })
    }
}

fn close<T: Numeric>(a: &DenseMatrix<T>, b: &DenseMatrix<T>, tol: f64) -> Result<bool> {
    if T::EXACT {
        return Ok(a == b);
    }
    let scale = a.to_f64().max_abs().max(1.0);
    Ok(a.to_f64().max_abs_diff(&b.to_f64())? <= tol * scale)
}

fn require_valid(report: &IrgaReport) -> Result<()> {
    if report.doubly_stochastic {
        Ok(())
    } else {
        Err(Error::InvalidGauge(format!(
            "IRGA is not doubly stochastic (min entry {:e}, row dev {:e}, col dev {:e})",
            report.min_entry, report.max_row_sum_dev, report.max_col_sum_dev
        )))
    }
}

/// Atomic gauge from a symmetric PD matrix within the mode's size bound.
pub fn make_gauge<T: Numeric>(p: &DenseMatrix<T>, mode: GaugeMode, tol: f64) -> Result<Gauge<T>> {
    let n = p.require_square()?;
    match mode.max_atomic() {
        None => {
            return Err(Error::Precondition(
                "composed gauges are built from children by Kronecker or block composition".into(),
            ))
        }
        Some(max) if n > max => {
            return Err(Error::Precondition(format!(
                "{mode:?} gauges are limited to n <= {max}, got {n}"
            )))
        }
        _ => {}
    }
    p.require_symmetric()?;
    if !p.is_positive_definite()? {
        return Err(Error::NotPositiveDefinite);
    }
    let r = rga(p)?;
    let s = r.inverse()?;
    let report = assess(&s, tol)?;
    require_valid(&report)?;
    Ok(Gauge { p: p.clone(), s, rga: r, report, provenance: Provenance::Atomic(mode) })
}

/// `P = P_A ⊗ P_B`, `S = S_A ⊗ S_B`; the latter is checked against a
/// direct IRGA of `P`.
pub fn kron_gauge<T: Numeric>(a: &Gauge<T>, b: &Gauge<T>, tol: f64) -> Result<Gauge<T>> {
    let p = a.p.kron(&b.p);
    let s = a.s.kron(&b.s);
    let direct = irga(&p)?;
    if !close(&direct, &s, IDENTITY_TOL)? {
        return Err(Error::InvalidGauge("irga(P_A ⊗ P_B) differs from S_A ⊗ S_B".into()));
    }
    let report = assess(&s, tol)?;
    require_valid(&report)?;
    Ok(Gauge {
        p,
        s,
        rga: a.rga.kron(&b.rga),
        report,
        provenance: Provenance::Kron(vec![a.clone(), b.clone()]),
    })
}

/// Block-diagonal composition of gauges.
pub fn block_gauge<T: Numeric>(children: Vec<Gauge<T>>, tol: f64) -> Result<Gauge<T>> {
    let p = block_diagonal(&children.iter().map(|g| g.p.clone()).collect::<Vec<_>>())?;
    let s = block_diagonal(&children.iter().map(|g| g.s.clone()).collect::<Vec<_>>())?;
    let r = block_diagonal(&children.iter().map(|g| g.rga.clone()).collect::<Vec<_>>())?;
    let report = assess(&s, tol)?;
    require_valid(&report)?;
    Ok(Gauge { p, s, rga: r, report, provenance: Provenance::Block(children) })
}

/// `M = P diag(e) P⁻¹` with its known spectrum and observed diagonal.
#[derive(Clone, Debug)]
pub struct SpddMatrix<T: Numeric> {
    pub gauge: Gauge<T>,
    pub spectrum: Vec<T>,
    pub m: DenseMatrix<T>,
    pub diagonal: Vec<T>,
}

fn max_dev<T: Numeric>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.sub(y).abs_val().to_f64()).fold(0.0, f64::max)
}

pub fn make_spdd<T: Numeric>(gauge: &Gauge<T>, e: &[T]) -> Result<SpddMatrix<T>> {
    let n = gauge.n();
    if e.len() != n {
        return Err(Error::DimensionMismatch(format!("spectrum of length {} for an {n}x{n} gauge", e.len())));
    }
    let m = gauge.p.matmul(&DenseMatrix::from_diagonal(e))?.matmul(&gauge.p.inverse()?)?;
    let diagonal = m.diagonal();
    let mapped = gauge.rga.mul_vec(e)?;
    let scale = e.iter().map(|x| x.abs_val().to_f64()).fold(1.0, f64::max);
    let dev = max_dev(&diagonal, &mapped);
    if dev > IDENTITY_TOL * scale && !(T::EXACT && dev == 0.0) {
        return Err(Error::Domain(format!("diag(M) departs from RGA(P)·e by {dev:e}")));
    }
    Ok(SpddMatrix { gauge: gauge.clone(), spectrum: e.to_vec(), m, diagonal })
}

impl<T: Numeric> SpddMatrix<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "gauge": self.gauge.to_json(),
            "spectrum": render_vec(&self.spectrum),
            "m": render_matrix(&self.m),
            "diagonal": render_vec(&self.diagonal),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MappingCheck {
    pub holds: bool,
    /// `max |RGA(P)·λ − diag(M)|`.
    pub diag_from_spectrum_dev: f64,
    /// `max |S·diag(M) − λ|`.
    pub spectrum_from_diag_dev: f64,
}

/// Checks `diag(M) = RGA(P)·λ(M)` and `λ(M) = S·diag(M)`.
pub fn verify_mapping<T: Numeric>(m: &SpddMatrix<T>, tol: f64) -> Result<MappingCheck> {
    let d = max_dev(&m.gauge.rga.mul_vec(&m.spectrum)?, &m.diagonal);
    let l = max_dev(&m.gauge.s.mul_vec(&m.diagonal)?, &m.spectrum);
    Ok(MappingCheck { holds: d <= tol && l <= tol, diag_from_spectrum_dev: d, spectrum_from_diag_dev: l })
}

/// Does the diagonal of `M` majorize its spectrum?
pub fn verify_majorization_theorem<T: Numeric>(m: &SpddMatrix<T>, tol: f64) -> Result<MajorizationVerdict> {
    require_valid(&m.gauge.report)?;
    majorizes(&m.diagonal, &m.spectrum, tol)
}

pub fn kron_vec<T: Numeric>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().flat_map(|x| b.iter().map(move |y| x.mul(y))).collect()
}

pub fn kron_spdd<T: Numeric>(a: &SpddMatrix<T>, b: &SpddMatrix<T>, tol: f64) -> Result<SpddMatrix<T>> {
    let gauge = kron_gauge(&a.gauge, &b.gauge, tol)?;
    Ok(SpddMatrix {
        gauge,
        spectrum: kron_vec(&a.spectrum, &b.spectrum),
        m: a.m.kron(&b.m),
        diagonal: kron_vec(&a.diagonal, &b.diagonal),
    })
}

/// Block sizes for a block-diagonal composition of size `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockPlan {
    pub sizes: Vec<usize>,
}

/// All 4s, with the remainder 2 → one 2, 3 → one 3, 1 → one 4 traded
/// for a 2 and a 3.
pub fn block_plan(n: usize) -> Result<BlockPlan> {
    if n < 2 {
        return Err(Error::Precondition(format!("block plans need n > 1, got {n}")));
    }
    let (q, r) = (n / 4, n % 4);
    let mut sizes = match r {
        1 => vec![4; q - 1],
        _ => vec![4; q],
    };
    match r {
        1 => sizes.extend([2, 3]),
        2 => sizes.push(2),
        3 => sizes.push(3),
        _ => {}
    }
    Ok(BlockPlan { sizes })
}

/// Block-diagonal gauge with independent random PD blocks; block `k` is
/// sampled from seed `mix(seed, k)`.
pub fn assemble_gpdd<T: Numeric>(plan: &BlockPlan, seed: u64, range: f64, tol: f64) -> Result<Gauge<T>> {
    if plan.sizes.is_empty() || plan.sizes.iter().any(|s| !(2..=4).contains(s)) {
        return Err(Error::Precondition(format!("invalid block plan {:?}", plan.sizes)));
    }
    let children = plan
        .sizes
        .iter()
        .enumerate()
        .map(|(k, &size)| {
            let sample = random_pd(size, mix(seed, k as u64), range)?;
            make_gauge(&sample.p_as::<T>(), GaugeMode::Proven, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    if children.len() == 1 {
        return Ok(children.into_iter().next().expect("one child"));
    }
    block_gauge(children, tol)
}

/// Orthogonal `Q` from modified Gram-Schmidt on a Gaussian matrix. The
/// triangular factor has a positive diagonal, which fixes `Q` uniquely.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<DenseMatrix<f64>> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut cols: Vec<Vec<f64>> =
            (0..n).map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
        let mut ok = true;
        for j in 0..n {
            for i in 0..j {
                let d: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                let ci = cols[i].clone();
                for (x, q) in cols[j].iter_mut().zip(&ci) {
                    *x -= d * q;
                }
            }
            let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        if ok {
            return Ok(DenseMatrix::from_fn(n, n, |i, j| cols[j][i]));
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitaryCheck {
    pub diagonal: Vec<f64>,
    pub verdict: MajorizationVerdict,
}

/// For `M = Q diag(e) Qᵀ` with orthogonal `Q`: does the spectrum majorize
/// the diagonal?
pub fn unitary_check_with(q: &DenseMatrix<f64>, e: &[f64], tol: f64) -> Result<UnitaryCheck> {
    let n = q.require_square()?;
    if e.len() != n {
        return Err(Error::DimensionMismatch(format!("spectrum of length {} for n = {n}", e.len())));
    }
    let m = q.matmul(&DenseMatrix::from_diagonal(e))?.matmul(&q.transpose())?;
    let diagonal = m.diagonal();
    let verdict = majorizes(e, &diagonal, tol)?;
    Ok(UnitaryCheck { diagonal, verdict })
}

pub fn unitary_class_check(n: usize, seed: u64, e: &[f64], tol: f64) -> Result<UnitaryCheck> {
    unitary_check_with(&random_orthogonal(n, seed)?, e, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat, Rational};
    use crate::matrix::DenseMatrix;

    fn ri(rows: &[&[i64]]) -> DenseMatrix<Rational> {
        DenseMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
            .unwrap()
    }

    fn worked() -> Gauge<Rational> {
        make_gauge(&ri(&[&[2, 1], &[1, 1]]), GaugeMode::Proven, 0.0).unwrap()
    }

    #[test]
    fn gauges() {
        let g = make_gauge(&DenseMatrix::<Rational>::identity(3), GaugeMode::Proven, 0.0).unwrap();
        assert_eq!(g.s, DenseMatrix::identity(3));
        let g = worked();
        let expect = DenseMatrix::from_rows(vec![vec![rat(2, 3), rat(1, 3)], vec![rat(1, 3), rat(2, 3)]]).unwrap();
        assert_eq!(g.s, expect);
        let big = DenseMatrix::<Rational>::identity(5);
        assert!(matches!(make_gauge(&big, GaugeMode::Proven, 0.0), Err(Error::Precondition(_))));
        assert!(make_gauge(&big, GaugeMode::Conjectured, 0.0).is_ok());
        assert!(make_gauge(&big, GaugeMode::Composed, 0.0).is_err());
    }

    #[test]
    fn worked_spdd() {
        let g = worked();
        let m = make_spdd(&g, &[int(3), int(1)]).unwrap();
        assert_eq!(m.m, ri(&[&[5, -4], &[2, -1]]));
        assert_eq!(m.diagonal, vec![int(5), int(-1)]);
        let c = verify_mapping(&m, 0.0).unwrap();
        assert!(c.holds);
        assert_eq!(g.s.mul_vec(&m.diagonal).unwrap(), vec![int(3), int(1)]);
        let v = verify_majorization_theorem(&m, 0.0).unwrap();
        assert!(v.holds);
        assert_eq!(v.prefix_deficits, vec![2.0, 0.0]);
        assert!(make_spdd(&g, &[int(1)]).is_err());

        let id = make_gauge(&DenseMatrix::<Rational>::identity(2), GaugeMode::Proven, 0.0).unwrap();
        let m = make_spdd(&id, &[int(5), int(1)]).unwrap();
        assert_eq!(m.m, DenseMatrix::from_diagonal(&[int(5), int(1)]));
        assert!(verify_majorization_theorem(&m, 0.0).unwrap().permutation_equal);
    }

    #[test]
    fn kron_of_identities() {
        let i2 = make_gauge(&DenseMatrix::<Rational>::identity(2), GaugeMode::Proven, 0.0).unwrap();
        let i3 = make_gauge(&DenseMatrix::<Rational>::identity(3), GaugeMode::Proven, 0.0).unwrap();
        let a = make_spdd(&i2, &[int(1), int(2)]).unwrap();
        let b = make_spdd(&i3, &[int(3), int(4), int(5)]).unwrap();
        let k = kron_spdd(&a, &b, 0.0).unwrap();
        let spec: Vec<Rational> = [3, 4, 5, 6, 8, 10].iter().map(|&x| int(x)).collect();
        assert_eq!(k.spectrum, spec);
        assert_eq!(k.m, DenseMatrix::from_diagonal(&spec));
        assert_eq!(k.diagonal, spec);
    }

    #[test]
    fn plans() {
        assert_eq!(block_plan(5).unwrap().sizes, vec![2, 3]);
        assert_eq!(block_plan(6).unwrap().sizes, vec![4, 2]);
        assert_eq!(block_plan(9).unwrap().sizes, vec![4, 2, 3]);
        assert_eq!(block_plan(2).unwrap().sizes, vec![2]);
        assert!(block_plan(1).is_err());
        for n in 2..=64 {
            let p = block_plan(n).unwrap();
            assert_eq!(p.sizes.iter().sum::<usize>(), n);
            assert!(p.sizes.iter().all(|s| (2..=4).contains(s)));
        }
    }

    #[test]
    fn gpdd_exact_sums() {
        let g: Gauge<Rational> = assemble_gpdd(&BlockPlan { sizes: vec![2, 3] }, 3, 2.0, 0.0).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!((g.report.max_row_sum_dev, g.report.max_col_sum_dev), (0.0, 0.0));
        let single: Gauge<f64> = assemble_gpdd(&BlockPlan { sizes: vec![4] }, 3, 2.0, 1e-10).unwrap();
        assert!(matches!(single.provenance, Provenance::Atomic(GaugeMode::Proven)));
    }

    #[test]
    fn unitary_examples() {
        let c = unitary_check_with(&DenseMatrix::identity(3), &[3.0, 1.0, 2.0], 1e-12).unwrap();
        assert!(c.verdict.holds && c.verdict.permutation_equal);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let q = DenseMatrix::from_rows(vec![vec![h, -h], vec![h, h]]).unwrap();
        let c = unitary_check_with(&q, &[1.0, 0.0], 1e-12).unwrap();
        assert!((c.diagonal[0] - 0.5).abs() < 1e-15 && (c.diagonal[1] - 0.5).abs() < 1e-15);
        assert!(c.verdict.holds);
        let q = random_orthogonal(5, 9).unwrap();
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(qtq.max_abs_diff(&DenseMatrix::identity(5)).unwrap() < 1e-12);
        assert_eq!(q, random_orthogonal(5, 9).unwrap());
    }
}
