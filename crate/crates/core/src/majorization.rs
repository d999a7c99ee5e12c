//! Majorization tests and witnesses: prefix-sum verdicts, T-transform
//! chains, Birkhoff decompositions and Shannon entropy.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Numeric};

/// Outcome of testing whether `y` majorizes `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorizationVerdict {
    pub holds: bool,
    /// `Σ_{i≤k} y↓ᵢ − Σ_{i≤k} x↓ᵢ` for `k = 1..n`.
    pub prefix_deficits: Vec<f64>,
    /// `Σ x − Σ y`.
    pub sum_gap: f64,
    /// Whether the sorted vectors coincide, i.e. `x` is a rearrangement of `y`.
    pub permutation_equal: bool,
}

fn sorted_desc<T: Numeric>(v: &[T]) -> Vec<T> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    s
}

/// Does `y` majorize `x` (`x ≺ y`)? Prefix sums are compared in the
/// scalar's own arithmetic, so the rational case is exact.
pub fn majorizes<T: Numeric>(y: &[T], x: &[T], tol: f64) -> Result<MajorizationVerdict> {
    if y.len() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "majorization of vectors of lengths {} and {}",
            y.len(),
            x.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::DimensionMismatch("empty vectors".into()));
    }
    let (ys, xs) = (sorted_desc(y), sorted_desc(x));
    let (mut py, mut px) = (T::zero(), T::zero());
    let mut deficits = Vec::with_capacity(y.len());
    for (a, b) in ys.iter().zip(&xs) {
        py = py.add(a);
        px = px.add(b);
        deficits.push(py.sub(&px).to_f64());
    }
    let sum_gap = px.sub(&py).to_f64();
    let n = deficits.len();
    let holds = deficits[..n - 1].iter().all(|&d| d >= -tol) && sum_gap.abs() <= tol;
    let permutation_equal = ys.iter().zip(&xs).all(|(a, b)| a.sub(b).abs_val().to_f64() <= tol);
    Ok(MajorizationVerdict { holds, prefix_deficits: deficits, sum_gap, permutation_equal })
}

/// `x ↦ λ x + (1 − λ) Q x` where `Q` swaps coordinates `j` and `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TTransform {
    pub lambda: f64,
    pub j: usize,
    pub k: usize,
}

impl TTransform {
    pub fn apply(&self, v: &mut [f64]) {
        let (a, b) = (v[self.j], v[self.k]);
        v[self.j] = self.lambda * a + (1.0 - self.lambda) * b;
        v[self.k] = self.lambda * b + (1.0 - self.lambda) * a;
    }

    pub fn to_matrix(&self, n: usize) -> DenseMatrix<f64> {
        let mut m = DenseMatrix::identity(n);
        m[(self.j, self.j)] = self.lambda;
        m[(self.k, self.k)] = self.lambda;
        m[(self.j, self.k)] = 1.0 - self.lambda;
        m[(self.k, self.j)] = 1.0 - self.lambda;
        m
    }
}

/// T-transforms applied first to last.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TransferChain {
    pub transforms: Vec<TTransform>,
}

impl TransferChain {
    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let mut v = y.to_vec();
        for t in &self.transforms {
            t.apply(&mut v);
        }
        v
    }

    /// The doubly stochastic `S` with `S y = x`.
    pub fn to_matrix(&self, n: usize) -> DenseMatrix<f64> {
        self.transforms
            .iter()
            .fold(DenseMatrix::identity(n), |acc, t| t.to_matrix(n).matmul(&acc).expect("square"))
    }
}

fn ranks_desc(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    idx
}

/// Constructs T-transforms taking `y` to `x` when `x ≺ y`.
///
/// First the entries of `y` are rearranged by pure swaps so that the r-th
/// largest entry of `y` sits where `x` has its r-th largest entry. Then, in
/// that rank order, the last position with a surplus gives to the first later
/// position with a deficit until one of them is matched. Each such transfer
/// settles at least one coordinate, so there are at most `n − 1` of them.
pub fn transfer_chain(y: &[f64], x: &[f64], tol: f64) -> Result<TransferChain> {
    let verdict = majorizes(y, x, tol)?;
    if !verdict.holds {
        return Err(Error::Precondition("y does not majorize x".into()));
    }
    let n = y.len();
    let mut chain = TransferChain::default();
    let mut z = y.to_vec();

    let rx = ranks_desc(x);
    let ry = ranks_desc(y);
    // want z[rx[r]] = y[ry[r]]; realise the permutation with swaps
    let mut target = vec![0.0; n];
    for r in 0..n {
        target[rx[r]] = y[ry[r]];
    }
    for p in 0..n {
        if z[p] == target[p] {
            continue;
        }
        if let Some(q) = (p + 1..n).find(|&q| z[q] == target[p] && z[q] != target[q]) {
            let t = TTransform { lambda: 0.0, j: p, k: q };
            t.apply(&mut z);
            chain.transforms.push(t);
        }
    }

    // rank-ordered view of positions
    let pos = rx;
    let eq = |a: f64, b: f64| (a - b).abs() <= tol;
    for _ in 0..n {
        let Some(jr) = (0..n).rev().find(|&r| z[pos[r]] > x[pos[r]] && !eq(z[pos[r]], x[pos[r]]))
        else {
            break;
        };
        let Some(kr) = (jr + 1..n).find(|&r| z[pos[r]] < x[pos[r]] && !eq(z[pos[r]], x[pos[r]]))
        else {
            break;
        };
        let (j, k) = (pos[jr], pos[kr]);
        let delta = (z[j] - x[j]).min(x[k] - z[k]);
        let gap = z[j] - z[k];
        let lambda = (1.0 - delta / gap).clamp(0.0, 1.0);
        let t = TTransform { lambda, j, k };
        t.apply(&mut z);
        chain.transforms.push(t);
    }
    Ok(chain)
}

/// Convex combination of permutation matrices; `perm[i]` is the column
/// selected in row `i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BirkhoffDecomposition {
    pub terms: Vec<(f64, Vec<usize>)>,
}

impl BirkhoffDecomposition {
    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.0).sum()
    }

    pub fn reconstruct(&self, n: usize) -> DenseMatrix<f64> {
        let mut m = DenseMatrix::zeros(n, n);
        for (w, perm) in &self.terms {
            for (i, &j) in perm.iter().enumerate() {
                m[(i, j)] += w;
            }
        }
        m
    }
}

fn augment(
    row: usize,
    allowed: &dyn Fn(usize, usize) -> bool,
    seen: &mut [bool],
    match_col: &mut [Option<usize>],
    n: usize,
) -> bool {
    for c in 0..n {
        if !allowed(row, c) || seen[c] {
            continue;
        }
        seen[c] = true;
        if match_col[c].is_none_or(|r| augment(r, allowed, seen, match_col, n)) {
            match_col[c] = Some(row);
            return true;
        }
    }
    false
}

/// Perfect matching in the bipartite graph `allowed(row, col)` by
/// augmenting paths, as `perm[row] = col`.
fn perfect_matching(n: usize, allowed: &dyn Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let mut match_col = vec![None; n];
    for r in 0..n {
        let mut seen = vec![false; n];
        if !augment(r, allowed, &mut seen, &mut match_col, n) {
            return None;
        }
    }
    let mut perm = vec![0; n];
    for (c, r) in match_col.iter().enumerate() {
        perm[r.expect("perfect")] = c;
    }
    Some(perm)
}

/// Perfect matching inside the entries above `tol` whose smallest covered
/// entry is as large as possible.
fn bottleneck_matching(m: &DenseMatrix<f64>, tol: f64) -> Option<Vec<usize>> {
    let n = m.rows();
    let mut levels: Vec<f64> = m.as_slice().iter().copied().filter(|&x| x > tol).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    levels.dedup();
    let feasible = |t: f64| perfect_matching(n, &|i, j| m[(i, j)] >= t);
    let mut best = feasible(*levels.first()?)?;
    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        match feasible(levels[mid]) {
            Some(p) => {
                best = p;
                lo = mid;
            }
            None => hi = mid - 1,
        }
    }
    Some(best)
}

pub fn check_doubly_stochastic(s: &DenseMatrix<f64>, tol: f64) -> Result<()> {
    let n = s.require_square()?;
    if let Some(&x) = s.as_slice().iter().find(|&&x| x < -tol || !x.is_finite()) {
        return Err(Error::NotDoublyStochastic(format!("entry {x} is negative")));
    }
    for (kind, sums) in [("row", s.row_sums()), ("column", s.col_sums())] {
        if let Some((i, v)) = sums.iter().enumerate().find(|(_, v)| (*v - 1.0).abs() > tol) {
            return Err(Error::NotDoublyStochastic(format!("{kind} {} sums to {v}", i + 1)));
        }
    }
    debug_assert!(n > 0);
    Ok(())
}

/// Greedy Birkhoff-von Neumann decomposition. Repeatedly takes the
/// permutation in the support of the residual whose smallest entry is
/// largest and removes it with that weight. If more than `(n−1)² + 1` terms result, they are
/// pruned by Carathéodory reduction.
pub fn birkhoff(s: &DenseMatrix<f64>, tol: f64) -> Result<BirkhoffDecomposition> {
    check_doubly_stochastic(s, tol)?;
    let n = s.rows();
    let mut residual = s.clone();
    let mut terms = Vec::new();
    let max_terms = n * n + 1;
    while residual.max_abs() > tol {
        if terms.len() >= max_terms {
            return Err(Error::NotDoublyStochastic("decomposition did not terminate".into()));
        }
        let Some(perm) = bottleneck_matching(&residual, tol) else {
            return Err(Error::NotDoublyStochastic(
                "support of the residual has no perfect matching".into(),
            ));
        };
        let (wi, w) = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| (i, residual[(i, j)]))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        for (i, &j) in perm.iter().enumerate() {
            residual[(i, j)] -= w;
        }
        residual[(wi, perm[wi])] = 0.0;
        terms.push((w, perm));
    }
    let bound = (n - 1) * (n - 1) + 1;
    if terms.len() > bound {
        terms = caratheodory(n, terms, bound);
    }
    Ok(BirkhoffDecomposition { terms })
}

/// Removes affinely dependent permutations until at most `bound` remain,
/// keeping the weighted sum fixed.
fn caratheodory(n: usize, mut terms: Vec<(f64, Vec<usize>)>, bound: usize) -> Vec<(f64, Vec<usize>)> {
    while terms.len() > bound {
        let m = terms.len();
        // Columns are permutation matrices flattened; find c ≠ 0 with A c = 0.
        let mut a = vec![vec![0.0; m]; n * n];
        for (k, (_, perm)) in terms.iter().enumerate() {
            for (i, &j) in perm.iter().enumerate() {
                a[i * n + j][k] = 1.0;
            }
        }
        let Some(c) = null_vector(&mut a, m) else { break };
        let Some((k, alpha)) = terms
            .iter()
            .zip(&c)
            .enumerate()
            .filter(|(_, (_, &ci))| ci > 1e-12)
            .map(|(k, ((w, _), &ci))| (k, w / ci))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal))
        else {
            break;
        };
        for ((w, _), ci) in terms.iter_mut().zip(&c) {
            *w = (*w - alpha * ci).max(0.0);
        }
        terms.remove(k);
        terms.retain(|(w, _)| *w > 1e-15);
    }
    terms
}

/// Reduces `a` (rows × m) to echelon form and returns a nonzero kernel vector.
fn null_vector(a: &mut [Vec<f64>], m: usize) -> Option<Vec<f64>> {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..m {
        if r == rows {
            break;
        }
        let (p, v) = (r..rows).map(|i| (i, a[i][c].abs())).fold((r, 0.0), |b, x| if x.1 > b.1 { x } else { b });
        if v < 1e-9 {
            continue;
        }
        a.swap(r, p);
        let pr = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c] / pr[c];
                for (x, y) in row.iter_mut().zip(&pr) {
                    *x -= f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free = (0..m).find(|c| !pivots.contains(c))?;
    let mut v = vec![0.0; m];
    v[free] = 1.0;
    for (i, &pc) in pivots.iter().enumerate() {
        v[pc] = -a[i][free] / a[i][pc];
    }
    Some(v)
}

/// Entries below this are treated as rounding noise around zero.
pub const ENTROPY_SLACK: f64 = 1e-12;

/// `−Σ zᵢ ln zᵢ` of `v` normalized to sum 1, with `0 ln 0 = 0`.
pub fn shannon_entropy(v: &[f64]) -> Result<f64> {
    if let Some(&x) = v.iter().find(|&&x| x < -ENTROPY_SLACK || !x.is_finite()) {
        return Err(Error::Domain(format!("entropy of a vector with entry {x}")));
    }
    let total: f64 = v.iter().map(|x| x.max(0.0)).sum();
    if !(total > 0.0) {
        return Err(Error::Domain("entropy of a vector with zero sum".into()));
    }
    Ok(-v
        .iter()
        .map(|&x| x.max(0.0) / total)
        .filter(|&z| z > 0.0)
        .map(|z| z * z.ln())
        .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat, Rational};

    #[test]
    fn verdict_examples() {
        assert!(majorizes(&[1.0, 0.0], &[0.5, 0.5], 1e-12).unwrap().holds);
        let v = majorizes(&[3.0, 2.0, 1.0], &[2.0, 2.0, 2.0], 0.0).unwrap();
        assert!(v.holds);
        assert_eq!(v.prefix_deficits, vec![1.0, 1.0, 0.0]);
        let v = majorizes(&[1.0, 0.0], &[0.6, 0.6], 1e-12).unwrap();
        assert!(!v.holds);
        assert!((v.sum_gap - 0.2).abs() < 1e-12);
        assert!(majorizes(&[1.0], &[1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn exact_verdicts() {
        let y = [int(5), int(-1)];
        let x = [int(3), int(1)];
        assert!(majorizes(&y, &x, 0.0).unwrap().holds);
        assert!(!majorizes(&x, &y, 0.0).unwrap().holds);
        let p = [rat(1, 3), rat(2, 3)];
        let q = [rat(2, 3), rat(1, 3)];
        assert!(majorizes::<Rational>(&p, &q, 0.0).unwrap().permutation_equal);
    }

    #[test]
    fn chain_examples() {
        let c = transfer_chain(&[1.0, 0.0], &[0.5, 0.5], 1e-12).unwrap();
        assert_eq!(c.transforms, vec![TTransform { lambda: 0.5, j: 0, k: 1 }]);
        assert!(transfer_chain(&[2.0, 1.0], &[2.0, 1.0], 1e-12).unwrap().is_empty());
        let c = transfer_chain(&[3.0, 2.0, 1.0], &[2.0, 2.0, 2.0], 1e-12).unwrap();
        assert_eq!(c.apply(&[3.0, 2.0, 1.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(c.len(), 1);
        assert!(matches!(
            transfer_chain(&[0.5, 0.5], &[1.0, 0.0], 1e-12),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn chain_handles_unsorted_inputs() {
        let y = [0.0, 5.0, 1.0, 2.0];
        let x = [2.0, 1.0, 3.0, 2.0];
        let c = transfer_chain(&y, &x, 1e-12).unwrap();
        let out = c.apply(&y);
        for (a, b) in out.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
        let s = c.to_matrix(4);
        check_doubly_stochastic(&s, 1e-12).unwrap();
        let sy = s.mul_vec(&y).unwrap();
        for (a, b) in sy.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn birkhoff_examples() {
        let s = DenseMatrix::from_rows(vec![vec![2.0 / 3.0, 1.0 / 3.0], vec![1.0 / 3.0, 2.0 / 3.0]])
            .unwrap();
        let d = birkhoff(&s, 1e-12).unwrap();
        assert_eq!(d.terms.len(), 2);
        assert!((d.terms[0].0 - 2.0 / 3.0).abs() < 1e-15 && d.terms[0].1 == vec![0, 1]);
        assert!((d.terms[1].0 - 1.0 / 3.0).abs() < 1e-15 && d.terms[1].1 == vec![1, 0]);
        let d = birkhoff(&DenseMatrix::identity(3), 1e-12).unwrap();
        assert_eq!(d.terms, vec![(1.0, vec![0, 1, 2])]);
        let bad = DenseMatrix::from_rows(vec![vec![0.9, 0.2], vec![0.1, 0.8]]).unwrap();
        assert!(matches!(birkhoff(&bad, 1e-10), Err(Error::NotDoublyStochastic(_))));
    }

    #[test]
    fn caratheodory_bound_on_full_support() {
        // uniform 4x4 matrix decomposes greedily into up to 16 terms
        let s = DenseMatrix::from_fn(4, 4, |_, _| 0.25);
        let d = birkhoff(&s, 1e-12).unwrap();
        assert!(d.terms.len() <= 10);
        assert!(d.reconstruct(4).max_abs_diff(&s).unwrap() < 1e-12);
        assert!((d.weight_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert!((shannon_entropy(&[1.0; 5]).unwrap() - 5f64.ln()).abs() < 1e-15);
        assert_eq!(shannon_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        let h = shannon_entropy(&[0.5, 0.25, 0.25]).unwrap();
        assert!((h - 1.5 * 2f64.ln()).abs() < 1e-15);
        assert!(matches!(shannon_entropy(&[1.0, -0.1]), Err(Error::Domain(_))));
        assert!(shannon_entropy(&[0.0, 0.0]).is_err());
    }
}
