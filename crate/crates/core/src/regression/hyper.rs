use nalgebra::{DMatrix, DVector};

use super::{default_patience, lar_select_with, DesignMatrix, SparseSolution};
use crate::basis::MultiIndexSet;
use crate::error::{Error, Result};

const TIE_TOL: f64 = 1e-12;

/// One evaluated (p, r) pair; `loo` is the corrected LOO, `None` when the fit failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub p: u32,
    pub r: usize,
    pub n_terms: usize,
    pub loo: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct HyperSearch {
    pub p: u32,
    pub r: usize,
    pub index_set: MultiIndexSet,
    pub solution: SparseSolution,
    pub trace: Vec<Candidate>,
}

/// Upper end of the default degree search. LAR keeps at most n − 1 terms, so
/// the full-basis size is not tied to n; early stopping ends the scan sooner.
pub const DEFAULT_P_MAX: u32 = 10;

pub fn default_r_max(d: usize) -> usize {
    d.clamp(1, 4)
}

/// Outer loop over r, inner loop over p, each stopped after two consecutive
/// candidates fail to improve on the best LOO seen in that loop. Each LAR path
/// stops early once its corrected LOO stalls (see [`default_patience`]).
pub fn select_hyperparams<F>(
    d: usize,
    y: &DVector<f64>,
    p_range: &[u32],
    r_range: &[usize],
    q: f64,
    mut design: F,
) -> Result<HyperSearch>
where
    F: FnMut(&MultiIndexSet) -> Result<DMatrix<f64>>,
{
    if p_range.is_empty() || r_range.is_empty() {
        return Err(Error::InvalidInput("empty hyperparameter range".into()));
    }
    let mut trace = Vec::new();
    let mut best: Option<HyperSearch> = None;
    let mut best_r_loo = f64::INFINITY;
    let mut r_misses = 0;
    for &r in r_range {
        let mut best_p_loo = f64::INFINITY;
        let mut p_misses = 0;
        let mut r_best_here = f64::INFINITY;
        for &p in p_range {
            let outcome = MultiIndexSet::truncated(d, p, q, r).and_then(|set| {
                let a = design(&set)?;
                let dm = DesignMatrix::new(a, y.clone())?;
                let max_steps = dm.n_terms().min(dm.n().saturating_sub(1));
                let sol = lar_select_with(&dm, max_steps, Some(default_patience(max_steps)))?;
                Ok((set, sol))
            });
            let loo = match &outcome {
                Ok((_, s)) if s.loo_corrected.is_finite() => Some(s.loo_corrected),
                _ => None,
            };
            let n_terms = outcome.as_ref().map(|(s, _)| s.len()).unwrap_or(0);
            trace.push(Candidate { p, r, n_terms, loo });
            match (loo, outcome) {
                (Some(v), Ok((set, sol))) => {
                    let better = best.as_ref().is_none_or(|b| v < b.solution.loo_corrected - TIE_TOL);
                    if better {
                        best = Some(HyperSearch { p, r, index_set: set, solution: sol, trace: Vec::new() });
                    }
                    r_best_here = r_best_here.min(v);
                    if v < best_p_loo - TIE_TOL {
                        best_p_loo = v;
                        p_misses = 0;
                    } else {
                        p_misses += 1;
                    }
                }
                _ => p_misses += 1,
            }
            if p_misses >= 2 {
                break;
            }
        }
        if r_best_here < best_r_loo - TIE_TOL {
            best_r_loo = r_best_here;
            r_misses = 0;
        } else {
            r_misses += 1;
        }
        if r_misses >= 2 {
            break;
        }
    }
    let mut out = best.ok_or(Error::NoFeasibleModel)?;
    out.trace = trace;
    Ok(out)
}
