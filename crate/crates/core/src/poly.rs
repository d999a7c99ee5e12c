//! Sparse multivariate polynomials over an exact coefficient field.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::algebra::{Coefficient, Rational, Ring};
use crate::error::{Error, Result};

/// Ordered list of distinct single-letter variable names.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VariableSet(Arc<[char]>);

impl VariableSet {
    pub fn new<I: IntoIterator<Item = char>>(names: I) -> Result<Self> {
        let names: Vec<char> = names.into_iter().collect();
        for (i, c) in names.iter().enumerate() {
            if !c.is_ascii_alphabetic() {
                return Err(Error::Precondition(format!("variable '{c}' is not a single letter")));
            }
            if names[..i].contains(c) {
                return Err(Error::Precondition(format!("variable '{c}' listed twice")));
            }
        }
        Ok(VariableSet(names.into()))
    }

    pub fn empty() -> Self {
        VariableSet(Arc::from(Vec::new()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[char] {
        &self.0
    }

    pub fn index_of(&self, name: char) -> Option<usize> {
        self.0.iter().position(|&c| c == name)
    }
}

impl fmt::Debug for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().collect::<String>())
    }
}

impl fmt::Display for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Exponent vector, one entry per variable of the owning set.
///
/// `Ord` sorts in *descending* graded-lexicographic order so that a
/// `BTreeMap<Monomial, _>` iterates in canonical rendering order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut e = vec![0; nvars];
        e[idx] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn grlex(&self, other: &Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }

    pub fn render(&self, vars: &VariableSet) -> String {
        let mut parts = Vec::new();
        for (&e, &name) in self.0.iter().zip(vars.names()) {
            match e {
                0 => {}
                1 => parts.push(name.to_string()),
                _ => parts.push(format!("{name}^{e}")),
            }
        }
        parts.join(" ")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.grlex(self)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial: no stored zero coefficients, canonical graded-lex order.
#[derive(Clone)]
pub struct Polynomial<C> {
    vars: VariableSet,
    terms: BTreeMap<Monomial, C>,
}

/// Monomials on which two polynomials disagree, with both coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDiff<C> {
    pub vars: VariableSet,
    pub entries: Vec<(Monomial, C, C)>,
}

impl<C: Coefficient> PolyDiff<C> {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn describe(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|(m, l, r)| {
                let name = if m.is_one() { "1".to_string() } else { m.render(&self.vars) };
                format!("{name}: ({}, {})", render_coeff(l), render_coeff(r))
            })
            .collect()
    }
}

fn render_coeff<C: Coefficient>(c: &C) -> String {
    let (neg, mag) = c.render_parts();
    let mag = mag.unwrap_or_else(|| "1".into());
    let mag = if neg { format!("-{mag}") } else { mag };
    if c.is_zero() {
        "0".into()
    } else {
        mag
    }
}

impl<C: Coefficient> Polynomial<C> {
    pub fn zero(vars: VariableSet) -> Self {
        Polynomial { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: VariableSet, c: C) -> Self {
        let mut p = Polynomial::zero(vars);
        if !c.is_zero() {
            let n = p.vars.len();
            p.terms.insert(Monomial::one(n), c);
        }
        p
    }

    pub fn variable(vars: VariableSet, idx: usize) -> Self {
        let n = vars.len();
        let mut p = Polynomial::zero(vars);
        p.terms.insert(Monomial::var(n, idx), C::one());
        p
    }

    /// Builds from (monomial, coefficient) pairs in any order, merging duplicates.
    pub fn from_terms<I>(vars: VariableSet, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, C)>,
    {
        let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
        for (m, c) in terms {
            if m.0.len() != vars.len() {
                return Err(Error::DimensionMismatch(format!(
                    "monomial has {} exponents, variable set has {}",
                    m.0.len(),
                    vars.len()
                )));
            }
            accumulate(&mut acc, m, c);
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Polynomial { vars, terms: acc })
    }

    pub fn variables(&self) -> &VariableSet {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_value(&self) -> Option<C> {
        if self.is_constant() {
            Some(self.terms.values().next().cloned().unwrap_or_else(C::zero))
        } else {
            None
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Re-expresses a constant polynomial over another variable set.
    fn lifted(&self, vars: &VariableSet) -> Option<Self> {
        let c = self.constant_value()?;
        Some(Polynomial::constant(vars.clone(), c))
    }

    /// Brings two operands onto one variable set, lifting constants if needed.
    fn align(&self, other: &Self) -> Result<(std::borrow::Cow<'_, Self>, Self)> {
        use std::borrow::Cow;
        if self.vars == other.vars {
            return Ok((Cow::Borrowed(self), other.clone()));
        }
        if let Some(o) = other.lifted(&self.vars) {
            return Ok((Cow::Borrowed(self), o));
        }
        if let Some(s) = self.lifted(&other.vars) {
            return Ok((Cow::Owned(s), other.clone()));
        }
        Err(Error::IncompatibleVariables {
            left: self.vars.to_string(),
            right: other.vars.to_string(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let (lhs, rhs) = self.align(other)?;
        let mut terms = lhs.terms.clone();
        for (m, c) in rhs.terms {
            accumulate(&mut terms, m, c);
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(Polynomial { vars: lhs.vars.clone(), terms })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.negate())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let (lhs, rhs) = self.align(other)?;
        let mut acc: HashMap<Monomial, C> = HashMap::with_capacity(lhs.terms.len() * rhs.terms.len());
        for (ma, ca) in &lhs.terms {
            for (mb, cb) in &rhs.terms {
                let m = ma.mul(mb);
                let c = ca.mul(cb);
                match acc.get_mut(&m) {
                    Some(slot) => *slot = slot.add(&c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Polynomial { vars: lhs.vars.clone(), terms })
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Polynomial::constant(self.vars.clone(), C::one());
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base).expect("same variable set");
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base).expect("same variable set");
            }
        }
        acc
    }

    pub fn negate(&self) -> Self {
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, k: &C) -> Self {
        if k.is_zero() {
            return Polynomial::zero(self.vars.clone());
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.mul(k))).collect(),
        }
    }

    /// Maps every coefficient into another field.
    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), f(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Polynomial { vars: self.vars.clone(), terms }
    }

    /// Evaluates with values listed in variable-set order.
    pub fn eval_slice(&self, values: &[C]) -> Result<C> {
        if values.len() != self.vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} variables",
                values.len(),
                self.vars.len()
            )));
        }
        let mut powers: Vec<Vec<C>> = values.iter().map(|v| vec![C::one(), v.clone()]).collect();
        let mut total = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (k, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut powers[k];
                while cache.len() <= e as usize {
                    let next = cache[cache.len() - 1].mul(&cache[1]);
                    cache.push(next);
                }
                t = t.mul(&cache[e as usize]);
            }
            total = total.add(&t);
        }
        Ok(total)
    }

    /// Evaluates at a named assignment; every variable must be covered.
    pub fn eval(&self, point: &BTreeMap<char, C>) -> Result<C> {
        let values = self
            .vars
            .names()
            .iter()
            .map(|name| point.get(name).cloned().ok_or(Error::IncompleteAssignment(*name)))
            .collect::<Result<Vec<_>>>()?;
        self.eval_slice(&values)
    }

    /// Monomial-level comparison; empty difference iff equal.
    pub fn diff(&self, other: &Self) -> Result<PolyDiff<C>> {
        let (lhs, rhs) = self.align(other)?;
        let mut entries = Vec::new();
        let mut keys: Vec<&Monomial> = lhs.terms.keys().chain(rhs.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        for m in keys {
            let a = lhs.coefficient(m);
            let b = rhs.coefficient(m);
            if a != b {
                entries.push((m.clone(), a, b));
            }
        }
        Ok(PolyDiff { vars: lhs.vars.clone(), entries })
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = c.render_parts();
            let mono = m.render(&self.vars);
            let body = match (mag, mono.is_empty()) {
                (None, true) => "1".to_string(),
                (None, false) => mono,
                (Some(k), true) => k,
                (Some(k), false) => format!("{k} {mono}"),
            };
            match (idx, neg) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
            }
        }
        out
    }
}

impl Polynomial<crate::algebra::QuadExt3> {
    /// Drops to rational coefficients if every sqrt3 component vanished.
    pub fn to_rational(&self) -> Option<Polynomial<Rational>> {
        if self.terms.values().all(|c| c.is_rational()) {
            Some(self.map_coefficients(|c| c.rat_part.clone()))
        } else {
            None
        }
    }
}

impl Polynomial<Rational> {
    pub fn to_quad(&self) -> Polynomial<crate::algebra::QuadExt3> {
        self.map_coefficients(|c| crate::algebra::QuadExt3::rational(c.clone()))
    }
}

fn accumulate<C: Coefficient>(map: &mut BTreeMap<Monomial, C>, m: Monomial, c: C) {
    match map.get_mut(&m) {
        Some(slot) => *slot = slot.add(&c),
        None => {
            map.insert(m, c);
        }
    }
}

impl<C: Coefficient> PartialEq for Polynomial<C> {
    fn eq(&self, other: &Self) -> bool {
        if self.vars == other.vars {
            return self.terms == other.terms;
        }
        match (self.constant_value(), other.constant_value()) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }
}

impl<C: Coefficient> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial{:?}[{}]", self.vars, self.render())
    }
}

impl<C: Coefficient> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Polynomials form a ring; constants over the empty variable set act as
/// scalars. Mixing two distinct non-constant variable sets panics here, use
/// the `checked_*` methods where that can happen.
impl<C: Coefficient> Ring for Polynomial<C> {
    fn zero() -> Self {
        Polynomial::zero(VariableSet::empty())
    }
    fn one() -> Self {
        Polynomial::constant(VariableSet::empty(), C::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("incompatible variable sets")
    }
    fn sub(&self, other: &Self) -> Self {
        self.checked_sub(other).expect("incompatible variable sets")
    }
    fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("incompatible variable sets")
    }
    fn neg(&self) -> Self {
        self.negate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat, QuadExt3};
    use proptest::prelude::*;

    fn vars(s: &str) -> VariableSet {
        VariableSet::new(s.chars()).unwrap()
    }

    fn x(v: &VariableSet, i: usize) -> Polynomial<Rational> {
        Polynomial::variable(v.clone(), i)
    }

    #[test]
    fn difference_of_squares() {
        let v = vars("ab");
        let p = x(&v, 0).add(&x(&v, 1)).mul(&x(&v, 0).sub(&x(&v, 1)));
        assert_eq!(p.render(), "a^2 - b^2");
        let zero = p.checked_mul(&Polynomial::zero(v.clone())).unwrap();
        assert!(zero.is_zero());
        assert_eq!(zero.render(), "0");
    }

    #[test]
    fn quadratic_extension_square_expansion() {
        // (ab(r - 1) + c(r + 1))^2 with r = sqrt3
        let v = vars("abc");
        let r = QuadExt3::root3();
        let one = QuadExt3::one();
        let a = Polynomial::<QuadExt3>::variable(v.clone(), 0);
        let b = Polynomial::<QuadExt3>::variable(v.clone(), 1);
        let c = Polynomial::<QuadExt3>::variable(v.clone(), 2);
        let base = a.mul(&b).scale(&r.sub(&one)).add(&c.scale(&r.add(&one)));
        let sq = base.pow(2);
        let expected = Polynomial::from_terms(
            v.clone(),
            [
                (Monomial(vec![2, 2, 0]), QuadExt3::new(int(4), int(-2))),
                (Monomial(vec![1, 1, 1]), QuadExt3::new(int(4), int(0))),
                (Monomial(vec![0, 0, 2]), QuadExt3::new(int(4), int(2))),
            ],
        )
        .unwrap();
        assert_eq!(sq, expected);
    }

    #[test]
    fn evaluation_and_missing_variables() {
        let v = vars("ab");
        let p = x(&v, 0).pow(2).sub(&x(&v, 1).pow(2));
        let mut pt = BTreeMap::new();
        pt.insert('a', int(2));
        assert!(matches!(p.eval(&pt), Err(Error::IncompleteAssignment('b'))));
        pt.insert('b', int(1));
        assert_eq!(p.eval(&pt).unwrap(), int(3));
        let one = Polynomial::constant(v, int(1));
        assert_eq!(one.eval(&pt).unwrap(), int(1));
    }

    #[test]
    fn diff_reports_both_coefficients() {
        let v = vars("abc");
        let abc = x(&v, 0).mul(&x(&v, 1)).mul(&x(&v, 2));
        let p = abc.add(&x(&v, 2).pow(2));
        let q = p.add(&abc);
        let d = p.diff(&q).unwrap();
        assert_eq!(d.entries, vec![(Monomial(vec![1, 1, 1]), int(1), int(2))]);
        assert!(p.diff(&p).unwrap().is_empty());
    }

    #[test]
    fn mismatched_sets_are_rejected_unless_constant() {
        let p = x(&vars("ab"), 0);
        let q = x(&vars("abc"), 0);
        assert!(matches!(p.checked_add(&q), Err(Error::IncompatibleVariables { .. })));
        let k = Polynomial::constant(vars("z"), rat(1, 2));
        assert_eq!(p.checked_mul(&k).unwrap().render(), "1/2 a");
    }

    #[test]
    fn canonical_order_is_graded_lex() {
        let v = vars("abc");
        let p = Polynomial::from_terms(
            v,
            [(Monomial(vec![1, 1, 1]), int(1)), (Monomial(vec![2, 2, 0]), int(1))],
        )
        .unwrap();
        assert_eq!(p.render(), "a^2 b^2 + a b c");
    }

    fn small_poly() -> impl Strategy<Value = Polynomial<Rational>> {
        prop::collection::vec((prop::collection::vec(0u32..3, 3), -5i64..5, 1i64..4), 0..6).prop_map(
            |ts| {
                Polynomial::from_terms(
                    vars("abc"),
                    ts.into_iter().map(|(e, n, d)| (Monomial(e), rat(n, d))),
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn insertion_order_is_irrelevant(p in small_poly()) {
            let mut ts: Vec<_> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
            ts.reverse();
            let q = Polynomial::from_terms(p.variables().clone(), ts).unwrap();
            prop_assert_eq!(p, q);
        }

        #[test]
        fn distributive(p in small_poly(), q in small_poly(), r in small_poly()) {
            prop_assert_eq!(p.add(&q).mul(&r), p.mul(&r).add(&q.mul(&r)));
        }

        #[test]
        fn evaluation_is_multiplicative(p in small_poly(), q in small_poly(),
                                        pt in prop::collection::vec((-9i64..9, 1i64..5), 3)) {
            let vals: Vec<Rational> = pt.into_iter().map(|(n, d)| rat(n, d)).collect();
            let lhs = p.mul(&q).eval_slice(&vals).unwrap();
            let rhs = p.eval_slice(&vals).unwrap() * q.eval_slice(&vals).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
