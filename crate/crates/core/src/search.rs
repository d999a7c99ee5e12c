//! Local search over spectra under a fixed gauge. Moves are pairwise
//! transfers of size δ between spectrum entries; a move is accepted when
//! the induced diagonal is strictly majorization-comparable in the chosen
//! direction and the spectral entropy strictly improves.

use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::Rational;
use crate::error::{Error, Result};
use crate::majorization::{majorizes, shannon_entropy};
use crate::matrix::Numeric;
use crate::spdd::{render_vec, Gauge};

/// Entropy differences at or below this are treated as ties.
pub const ENTROPY_TIE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    MaxEntropy,
    MinEntropy,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub delta: Rational,
    pub direction: Direction,
    pub max_iters: usize,
    pub tol: f64,
}

impl SearchConfig {
    pub fn new(delta: Rational, direction: Direction, max_iters: usize, tol: f64) -> Result<Self> {
        if delta <= Rational::from_integer(0.into()) {
            return Err(Error::Precondition(format!("step must be positive, got {delta}")));
        }
        Ok(SearchConfig { delta, direction, max_iters, tol })
    }
}

#[derive(Clone, Debug)]
pub struct SearchState<T: Numeric> {
    pub spectrum: Vec<T>,
    pub diagonal: Vec<T>,
    pub spectral_entropy: f64,
    /// Present only when the diagonal is nonnegative.
    pub diagonal_entropy: Option<f64>,
}

impl<T: Numeric> SearchState<T> {
    pub fn new(gauge: &Gauge<T>, spectrum: Vec<T>) -> Result<Self> {
        let diagonal = gauge.rga.mul_vec(&spectrum)?;
        let spectral_entropy = entropy(&spectrum)?;
        let diagonal_entropy =
            if diagonal.iter().all(|d| *d >= T::zero()) { Some(entropy(&diagonal)?) } else { None };
        Ok(SearchState { spectrum, diagonal, spectral_entropy, diagonal_entropy })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "spectrum": render_vec(&self.spectrum),
            "diagonal": render_vec(&self.diagonal),
            "spectral_entropy": self.spectral_entropy,
            "diagonal_entropy": self.diagonal_entropy,
        })
    }
}

fn entropy<T: Numeric>(v: &[T]) -> Result<f64> {
    shannon_entropy(&v.iter().map(Numeric::to_f64).collect::<Vec<_>>())
}

/// `e + δ(uᵢ − uⱼ)`: entry `i` gains δ and entry `j` loses it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Move {
    pub i: usize,
    pub j: usize,
    pub entropy_gain: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    LocalOptimum,
    IterBudget,
}

#[derive(Clone, Debug)]
pub struct SearchTrace<T: Numeric> {
    pub states: Vec<SearchState<T>>,
    pub moves: Vec<Move>,
    pub termination: Termination,
}

impl<T: Numeric> SearchTrace<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "states": self.states.iter().map(SearchState::to_json).collect::<Vec<_>>(),
            "moves": self.moves,
            "termination": self.termination,
        })
    }
}

/// Neighbors with all entries positive, as `(i, j, vector)` in order of
/// `i` then `j`.
pub fn neighbor_moves<T: Numeric>(e: &[T], delta: &T) -> Vec<(usize, usize, Vec<T>)> {
    let n = e.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let lowered = e[j].sub(delta);
            if lowered <= T::zero() {
                continue;
            }
            let mut v = e.to_vec();
            v[i] = v[i].add(delta);
            v[j] = lowered;
            out.push((i, j, v));
        }
    }
    out
}

pub fn neighbors<T: Numeric>(e: &[T], delta: &T) -> Vec<Vec<T>> {
    neighbor_moves(e, delta).into_iter().map(|(_, _, v)| v).collect()
}

fn require_positive<T: Numeric>(gauge: &Gauge<T>, e: &[T]) -> Result<()> {
    if e.len() != gauge.n() {
        return Err(Error::DimensionMismatch(format!("spectrum of length {} for n = {}", e.len(), gauge.n())));
    }
    if let Some(x) = e.iter().find(|x| **x <= T::zero()) {
        return Err(Error::Domain(format!("spectrum entries must be positive, got {}", x.render())));
    }
    Ok(())
}

/// One search step from `current`; `None` means no admissible move.
pub fn step<T: Numeric>(
    gauge: &Gauge<T>,
    current: &SearchState<T>,
    cfg: &SearchConfig,
) -> Result<Option<(Move, SearchState<T>)>> {
    if !gauge.report.doubly_stochastic {
        return Err(Error::InvalidGauge("IRGA is not doubly stochastic".into()));
    }
    require_positive(gauge, &current.spectrum)?;
    let delta = T::from_rational(&cfg.delta);
    let mut best: Option<(Move, SearchState<T>)> = None;
    for (i, j, e) in neighbor_moves(&current.spectrum, &delta) {
        let cand = SearchState::new(gauge, e)?;
        let verdict = match cfg.direction {
            Direction::MaxEntropy => majorizes(&current.diagonal, &cand.diagonal, cfg.tol)?,
            Direction::MinEntropy => majorizes(&cand.diagonal, &current.diagonal, cfg.tol)?,
        };
        if !verdict.holds || verdict.permutation_equal {
            continue;
        }
        let gain = match cfg.direction {
            Direction::MaxEntropy => cand.spectral_entropy - current.spectral_entropy,
            Direction::MinEntropy => current.spectral_entropy - cand.spectral_entropy,
        };
        if gain <= ENTROPY_TIE {
            continue;
        }
        if best.as_ref().is_none_or(|(m, _)| gain > m.entropy_gain + ENTROPY_TIE) {
            best = Some((Move { i, j, entropy_gain: gain }, cand));
        }
    }
    Ok(best)
}

pub fn run<T: Numeric>(gauge: &Gauge<T>, e0: &[T], cfg: &SearchConfig) -> Result<SearchTrace<T>> {
    require_positive(gauge, e0)?;
    let mut states = vec![SearchState::new(gauge, e0.to_vec())?];
    let mut moves = Vec::new();
    for _ in 0..cfg.max_iters {
        let current = states.last().expect("nonempty trace");
        match step(gauge, current, cfg)? {
            Some((m, next)) => {
                moves.push(m);
                states.push(next);
            }
            None => return Ok(SearchTrace { states, moves, termination: Termination::LocalOptimum }),
        }
    }
    Ok(SearchTrace { states, moves, termination: Termination::IterBudget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{int, rat};
    use crate::matrix::DenseMatrix;
    use crate::spdd::{make_gauge, GaugeMode};

    fn worked() -> Gauge<Rational> {
        let p = DenseMatrix::from_rows(vec![vec![int(2), int(1)], vec![int(1), int(1)]]).unwrap();
        make_gauge(&p, GaugeMode::Proven, 0.0).unwrap()
    }

    fn cfg(direction: Direction, max_iters: usize) -> SearchConfig {
        SearchConfig::new(int(1), direction, max_iters, 0.0).unwrap()
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(neighbors(&[int(2), int(2)], &int(1)), vec![vec![int(3), int(1)], vec![int(1), int(3)]]);
        assert!(neighbors(&[int(1), int(1)], &int(1)).is_empty());
        let n = neighbors(&[int(3), int(1), int(1)], &rat(1, 2));
        assert_eq!(n.len(), 6);
        assert!(n.iter().all(|v| v.iter().sum::<Rational>() == int(5)));
        assert!(SearchConfig::new(int(0), Direction::MaxEntropy, 1, 0.0).is_err());
    }

    #[test]
    fn worked_trace() {
        let g = worked();
        let t = run(&g, &[int(3), int(1)], &cfg(Direction::MaxEntropy, 10)).unwrap();
        let spectra: Vec<_> = t.states.iter().map(|s| s.spectrum.clone()).collect();
        assert_eq!(spectra, vec![vec![int(3), int(1)], vec![int(2), int(2)]]);
        assert_eq!(t.states[0].diagonal, vec![int(5), int(-1)]);
        assert_eq!(t.states[0].diagonal_entropy, None);
        assert_eq!(t.termination, Termination::LocalOptimum);
        assert_eq!((t.moves[0].i, t.moves[0].j), (1, 0));

        let start = SearchState::new(&g, vec![int(2), int(2)]).unwrap();
        assert!(step(&g, &start, &cfg(Direction::MaxEntropy, 1)).unwrap().is_none());
        let (_, next) = step(&g, &start, &cfg(Direction::MinEntropy, 1)).unwrap().unwrap();
        assert_eq!(next.spectrum, vec![int(3), int(1)]);
    }

    #[test]
    fn zero_budget() {
        let t = run(&worked(), &[int(3), int(1)], &cfg(Direction::MaxEntropy, 0)).unwrap();
        assert_eq!(t.states.len(), 1);
        assert_eq!(t.termination, Termination::IterBudget);
        assert!(run(&worked(), &[int(3), int(0)], &cfg(Direction::MaxEntropy, 3)).is_err());
    }

    #[test]
    fn identity_gauge_flattens() {
        let g = make_gauge(&DenseMatrix::<Rational>::identity(3), GaugeMode::Proven, 0.0).unwrap();
        let t = run(&g, &[int(7), int(1), int(1)], &cfg(Direction::MaxEntropy, 50)).unwrap();
        assert_eq!(t.termination, Termination::LocalOptimum);
        let last = &t.states.last().unwrap().spectrum;
        let (hi, lo) = (last.iter().max().unwrap(), last.iter().min().unwrap());
        assert!(hi - lo <= int(1), "{last:?}");
    }
}
