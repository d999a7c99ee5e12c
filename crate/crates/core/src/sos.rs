//! Entry polynomials of the IRGA under the unit-diagonal Cholesky
//! parameterization, sum-of-squares certificate checking, and randomized
//! identity testing for polynomials too large to derive symbolically.

use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{QuadExt3, Rational, Ring};
use crate::error::{Error, Result};
use crate::io::parse_number;
use crate::irga::mix;
use crate::matrix::{bareiss_determinant, DenseMatrix};
use crate::parse::{parse_expr, parse_polynomial, ParsedExpr};
use crate::poly::{Polynomial, VariableSet};

/// Names for the strict lower part of `L`, row by row. `l` and `o` are skipped.
pub const CHOLESKY_LETTERS: &str = "abcdefghijkmnpq";

pub const MAX_SYMBOLIC_N: usize = 4;

pub fn cholesky_variables(n: usize) -> Result<VariableSet> {
    if !(2..=6).contains(&n) {
        return Err(Error::Precondition(format!("Cholesky parameterization supports 2 <= n <= 6, got {n}")));
    }
    VariableSet::new(CHOLESKY_LETTERS.chars().take(n * (n - 1) / 2))
}

/// Unit-diagonal lower-triangular `L` with symbolic strict-lower entries.
pub fn symbolic_lower(n: usize) -> Result<DenseMatrix<Polynomial<Rational>>> {
    let vars = cholesky_variables(n)?;
    let mut l = DenseMatrix::from_fn(n, n, |i, j| {
        Polynomial::constant(vars.clone(), if i == j { Rational::one() } else { Rational::zero() })
    });
    let mut k = 0;
    for i in 1..n {
        for j in 0..i {
            l[(i, j)] = Polynomial::variable(vars.clone(), k);
            k += 1;
        }
    }
    Ok(l)
}

/// `R = L Lᵀ`; `det R = 1` identically.
pub fn symbolic_gram(n: usize) -> Result<DenseMatrix<Polynomial<Rational>>> {
    let l = symbolic_lower(n)?;
    l.matmul(&l.transpose())
}

fn check_entry(n: usize, i: usize, j: usize) -> Result<()> {
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { row: i, col: j, n });
    }
    if i == j {
        return Err(Error::Precondition("entry polynomials are defined off the diagonal".into()));
    }
    Ok(())
}

/// Adjugate entry `(i, j)` (0-based) of `T = R ∘ R⁻¹`. This is
/// `det(T) · S_ij` with `det(T) > 0`, so its sign is the sign of `S_ij`.
pub fn entry_polynomial(n: usize, i: usize, j: usize) -> Result<Polynomial<Rational>> {
    if n > MAX_SYMBOLIC_N {
        return Err(Error::Unsupported(format!(
            "symbolic entry polynomials are limited to n <= {MAX_SYMBOLIC_N}; use identity testing for n = {n}"
        )));
    }
    check_entry(n, i, j)?;
    let r = symbolic_gram(n)?;
    // det R = 1, so the adjugate is the inverse.
    let r_inv = r.adjugate_cofactor()?;
    let t = r.hadamard(&r_inv)?;
    t.adjugate_entry(i, j)
}

/// Value of the adjugate entry `(i, j)` of `T` at a rational point, computed
/// with exact numeric linear algebra.
pub fn entry_value(n: usize, i: usize, j: usize, point: &[Rational]) -> Result<Rational> {
    check_entry(n, i, j)?;
    let sample = crate::irga::PdSample::from_lower(0, n, point)?;
    let r = sample.p;
    let t = r.hadamard(&r.inverse()?)?;
    let d = bareiss_determinant(&t.minor(j, i))?;
    Ok(if (i + j) % 2 == 0 { d } else { -d })
}

#[derive(Clone, Debug)]
pub struct SosTerm {
    pub multiplier: Rational,
    pub body: Polynomial<QuadExt3>,
}

/// Nonnegative combination of squares `Σ mᵢ · bodyᵢ²`.
#[derive(Clone, Debug)]
pub struct SoSCertificate {
    pub variables: VariableSet,
    pub terms: Vec<SosTerm>,
}

#[derive(Deserialize, Serialize)]
struct RawCertificate {
    variables: Vec<String>,
    terms: Vec<RawTerm>,
}

#[derive(Deserialize, Serialize)]
struct RawTerm {
    multiplier: String,
    body: String,
}

impl SoSCertificate {
    pub fn new(variables: VariableSet, terms: Vec<SosTerm>) -> Result<Self> {
        for (k, t) in terms.iter().enumerate() {
            if t.multiplier.is_negative() {
                return Err(Error::InvalidCertificate(format!(
                    "term {} has negative multiplier {}",
                    k + 1,
                    t.multiplier
                )));
            }
            if t.body.variables() != &variables && !t.body.is_constant() {
                return Err(Error::IncompatibleVariables {
                    left: variables.to_string(),
                    right: t.body.variables().to_string(),
                });
            }
        }
        Ok(SoSCertificate { variables, terms })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawCertificate =
            serde_json::from_str(text).map_err(|e| Error::InvalidCertificate(e.to_string()))?;
        let mut names = Vec::new();
        for v in &raw.variables {
            let mut cs = v.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) => names.push(c),
                _ => return Err(Error::InvalidCertificate(format!("variable name '{v}' is not a single letter"))),
            }
        }
        let vars = VariableSet::new(names)?;
        let terms = raw
            .terms
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let multiplier = parse_number(t.multiplier.trim()).map_err(|m| {
                    Error::InvalidCertificate(format!("term {}: {m}", k + 1))
                })?;
                let body = parse_polynomial::<QuadExt3>(&t.body, Some(&vars))?;
                Ok(SosTerm { multiplier, body })
            })
            .collect::<Result<Vec<_>>>()?;
        SoSCertificate::new(vars, terms)
    }

    pub fn to_json(&self) -> String {
        let raw = RawCertificate {
            variables: self.variables.names().iter().map(|c| c.to_string()).collect(),
            terms: self
                .terms
                .iter()
                .map(|t| RawTerm { multiplier: t.multiplier.to_string(), body: t.body.render() })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data")
    }

    /// `Σ mᵢ · bodyᵢ²` in Q(sqrt 3).
    pub fn expand(&self) -> Polynomial<QuadExt3> {
        self.terms
            .par_iter()
            .map(|t| {
                let sq = t.body.checked_mul(&t.body).expect("checked at construction");
                sq.scale(&QuadExt3::rational(t.multiplier.clone()))
            })
            .reduce(
                || Polynomial::zero(self.variables.clone()),
                |a, b| a.checked_add(&b).expect("checked at construction"),
            )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateCheck {
    pub holds: bool,
    /// Whether every sqrt3 component cancelled in the expansion.
    pub rational_expansion: bool,
    pub terms: usize,
    pub expansion_terms: usize,
    pub target_terms: usize,
    /// Disagreeing monomials as `monomial: (expansion, target)`.
    pub difference: Vec<String>,
}

pub fn verify_certificate(cert: &SoSCertificate, target: &Polynomial<Rational>) -> Result<CertificateCheck> {
    if target.variables() != &cert.variables && !target.is_constant() {
        return Err(Error::IncompatibleVariables {
            left: cert.variables.to_string(),
            right: target.variables().to_string(),
        });
    }
    let expansion = cert.expand();
    let diff = expansion.diff(&target.to_quad())?;
    Ok(CertificateCheck {
        holds: diff.is_empty(),
        rational_expansion: expansion.to_rational().is_some(),
        terms: cert.terms.len(),
        expansion_terms: expansion.num_terms(),
        target_terms: target.num_terms(),
        difference: diff.describe(),
    })
}

/// Something that can be evaluated exactly at a rational point given in
/// variable-set order.
pub trait Evaluate: Sync {
    fn variables(&self) -> &VariableSet;
    fn evaluate(&self, point: &[Rational]) -> Result<Rational>;
}

impl Evaluate for Polynomial<Rational> {
    fn variables(&self) -> &VariableSet {
        Polynomial::variables(self)
    }
    fn evaluate(&self, point: &[Rational]) -> Result<Rational> {
        self.eval_slice(point)
    }
}

impl Evaluate for ParsedExpr {
    fn variables(&self) -> &VariableSet {
        &self.vars
    }
    fn evaluate(&self, point: &[Rational]) -> Result<Rational> {
        self.eval(point)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityTestConfig {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub trials: usize,
    pub seed: u64,
    /// Numerators are drawn from `[-range, range]`, denominators from `1..=max_denominator`.
    pub range: i64,
    pub max_denominator: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Disagreement {
    pub trial: usize,
    pub point: Vec<String>,
    pub reference: String,
    pub oracle: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityTestReport {
    pub trials: usize,
    pub agreements: usize,
    pub points: Vec<Vec<String>>,
    pub first_disagreement: Option<Disagreement>,
}

impl IdentityTestReport {
    pub fn all_agree(&self) -> bool {
        self.agreements == self.trials
    }
}

fn random_point(len: usize, seed: u64, range: i64, max_den: i64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let num = rng.random_range(-range..=range);
            let den = rng.random_range(1..=max_den);
            Rational::new(BigInt::from(num), BigInt::from(den))
        })
        .collect()
}

/// Compares `reference` with the exact adjugate-entry oracle at random
/// rational points. Disagreement is a result, not an error.
pub fn identity_test(reference: &dyn Evaluate, cfg: &IdentityTestConfig) -> Result<IdentityTestReport> {
    if cfg.trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    if cfg.range < 1 || cfg.max_denominator < 1 {
        return Err(Error::Precondition("coordinate range and denominator bound must be positive".into()));
    }
    let vars = cholesky_variables(cfg.n)?;
    if reference.variables() != &vars {
        return Err(Error::IncompatibleVariables {
            left: vars.to_string(),
            right: reference.variables().to_string(),
        });
    }
    check_entry(cfg.n, cfg.i, cfg.j)?;
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let point = random_point(vars.len(), mix(cfg.seed, t as u64), cfg.range, cfg.max_denominator);
            let want = entry_value(cfg.n, cfg.i, cfg.j, &point)?;
            let got = reference.evaluate(&point)?;
            Ok((point, got, want))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut agreements = 0;
    let mut first = None;
    let mut points = Vec::with_capacity(outcomes.len());
    for (t, (point, got, want)) in outcomes.into_iter().enumerate() {
        let shown: Vec<String> = point.iter().map(|x| x.to_string()).collect();
        if got == want {
            agreements += 1;
        } else if first.is_none() {
            first = Some(Disagreement {
                trial: t,
                point: shown.clone(),
                reference: got.to_string(),
                oracle: want.to_string(),
            });
        }
        points.push(shown);
    }
    Ok(IdentityTestReport { trials: cfg.trials, agreements, points, first_disagreement: first })
}

/// Bundled data files.
pub mod builtin {
    use super::*;

    pub const PN3: &str = include_str!("../assets/pn3.poly");
    pub const PN4: &str = include_str!("../assets/pn4.poly");
    pub const S4_ENTRY12: &str = include_str!("../assets/s4-entry12.poly");
    pub const S6_ENTRY12: &str = include_str!("../assets/s6-entry12.poly");
    pub const N3_CERT: &str = include_str!("../assets/n3.cert.json");
    pub const N4_CERT: &str = include_str!("../assets/n4.cert.json");

    pub const POLYNOMIALS: [&str; 4] = ["pn3", "pn4", "s4-entry12", "s6-entry12"];
    pub const CERTIFICATES: [&str; 2] = ["n3", "n4"];

    /// Source text and matrix size of a bundled polynomial.
    pub fn polynomial_source(name: &str) -> Option<(&'static str, usize)> {
        Some(match name {
            "pn3" => (PN3, 3),
            "pn4" => (PN4, 4),
            "s4-entry12" => (S4_ENTRY12, 4),
            "s6-entry12" => (S6_ENTRY12, 6),
            _ => return None,
        })
    }

    pub fn certificate_source(name: &str) -> Option<&'static str> {
        match name {
            "n3" => Some(N3_CERT),
            "n4" => Some(N4_CERT),
            _ => None,
        }
    }

    fn unknown(name: &str) -> Error {
        Error::Precondition(format!("no builtin asset named '{name}'"))
    }

    pub fn expression(name: &str) -> Result<ParsedExpr> {
        let (text, n) = polynomial_source(name).ok_or_else(|| unknown(name))?;
        Ok(parse_expr(text, Some(&cholesky_variables(n)?))?)
    }

    pub fn polynomial(name: &str) -> Result<Polynomial<Rational>> {
        expression(name)?.expand()
    }

    pub fn certificate(name: &str) -> Result<SoSCertificate> {
        SoSCertificate::from_json(certificate_source(name).ok_or_else(|| unknown(name))?)
    }
}
