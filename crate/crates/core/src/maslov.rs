//! Maslov index of loops and of pairs of Lagrangian paths.
//!
//! The pair index is read off the relative unitary
//! `C(lambda) = W_1(lambda) conj(W_2(lambda))`, whose eigenvalue 1 has
//! multiplicity `dim(L_1 ∩ L_2)`. A crossing counts `+1` when an eigenphase
//! of `C` increases through `0 mod 2 pi`. On each grid interval the net
//! count is the change in the number of eigenphases in `[0, w)` for an arc
//! half-width `w` that no eigenphase can reach during the interval.

use crate::error::{Error, Result};
use crate::crossing::{self, PhaseFamily, PhaseSample};
use crate::path::{LagrangianPath, PathDescriptor, MAX_REFINEMENT_DEPTH};
use crate::symplectic::{gap_distance, intersection_dimension, LagrangianFrame};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Singular-value threshold deciding endpoint transversality.
pub const ADMISSIBLE_TOL: f64 = 1e-8;
pub const MAX_THETA: f64 = 0.1;
pub const MIN_THETA: f64 = 1e-6;
/// Width below which a crossing counts as localized.
pub const DEFAULT_CROSSING_TOL: f64 = 1e-10;
pub const LOOP_CLOSURE_TOL: f64 = 1e-9;
/// Endpoint eigenphases smaller than this are treated as intersections.
const ZERO_PHASE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub lambda_star: f64,
    pub sign: i32,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaslovOutcome {
    pub value: i64,
    pub admissible: bool,
    /// Rotation angle used on the second path, if the pair needed one.
    pub theta: Option<f64>,
    /// Number of counting intervals after refinement.
    pub intervals: usize,
}

pub fn gamma_nor(n: usize) -> Result<LagrangianPath> {
    LagrangianPath::new(PathDescriptor::GammaNor { n })
}

pub fn gamma_nor_prime(n: usize) -> Result<LagrangianPath> {
    LagrangianPath::new(PathDescriptor::GammaNorPrime { n })
}

struct Pair<'a> {
    g1: &'a LagrangianPath,
    g2: &'a LagrangianPath,
    theta: f64,
}

impl PhaseFamily for Pair<'_> {
    fn sample(&self, lambda: f64) -> Result<PhaseSample> {
        let (l1, l2) = self.frames(lambda)?;
        Ok(PhaseSample::new(lambda, l1.souriau().relative(&l2.souriau())))
    }
}

impl Pair<'_> {
    fn frames(&self, lambda: f64) -> Result<(LagrangianFrame, LagrangianFrame)> {
        let l1 = self.g1.at(lambda)?;
        let l2 = self.g2.at(lambda)?.rotate(-self.theta);
        Ok((l1, l2))
    }

    fn grid(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self.g1.grid().iter().chain(self.g2.grid()).copied().collect();
        g.sort_by(f64::total_cmp);
        g.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        g
    }

    fn intervals(&self) -> Result<Vec<(f64, f64, i64)>> {
        crossing::count_grid(self, &self.grid())
    }

    fn endpoints_transversal(&self) -> Result<bool> {
        for lambda in [0.0, 1.0] {
            let (l1, l2) = self.frames(lambda)?;
            if intersection_dimension(&l1, &l2, ADMISSIBLE_TOL)? != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn check_pair(g1: &LagrangianPath, g2: &LagrangianPath) -> Result<()> {
    if g1.n() != g2.n() {
        return Err(Error::DimensionMismatch { expected: g1.n(), found: g2.n() });
    }
    Ok(())
}

/// Whether both endpoint pairs intersect trivially.
pub fn is_admissible(g1: &LagrangianPath, g2: &LagrangianPath) -> Result<bool> {
    check_pair(g1, g2)?;
    Pair { g1, g2, theta: 0.0 }.endpoints_transversal()
}

/// Index of `(g1, e^{-theta J} g2)` counted directly, with no admissibility
/// check.
pub fn maslov_pair_rotated(g1: &LagrangianPath, g2: &LagrangianPath, theta: f64) -> Result<i64> {
    check_pair(g1, g2)?;
    Ok(Pair { g1, g2, theta }.intervals()?.iter().map(|x| x.2).sum())
}

/// A rotation angle that makes both endpoint pairs transversal for every
/// angle on the ladder `theta, theta/2, theta/4, theta/8`, and for which the
/// index does not change when the angle is halved.
pub fn perturbation_theta(g1: &LagrangianPath, g2: &LagrangianPath) -> Result<f64> {
    check_pair(g1, g2)?;
    let mut smallest = PI;
    for lambda in [0.0, 1.0] {
        let s = PhaseFamily::sample(&Pair { g1, g2, theta: 0.0 }, lambda)?;
        for p in s.phases {
            if p.abs() > ZERO_PHASE {
                smallest = smallest.min(p.abs());
            }
        }
    }
    // rotating g2 by -theta moves every eigenphase by +2 theta
    let mut theta = MAX_THETA.min(smallest / 4.0);
    let mut previous: Option<i64> = None;
    while theta >= MIN_THETA {
        let ladder_ok = (0..4).try_fold(true, |ok, k| {
            Ok::<_, Error>(ok && Pair { g1, g2, theta: theta / f64::from(1 << k) }.endpoints_transversal()?)
        })?;
        if ladder_ok {
            let here = match previous {
                Some(v) => v,
                None => maslov_pair_rotated(g1, g2, theta)?,
            };
            let half = maslov_pair_rotated(g1, g2, 0.5 * theta)?;
            if here == half {
                return Ok(theta);
            }
            previous = Some(half);
        } else {
            previous = None;
        }
        theta *= 0.5;
    }
    Err(Error::NoStableTheta { min_theta: MIN_THETA })
}

pub fn maslov_pair_detailed(g1: &LagrangianPath, g2: &LagrangianPath) -> Result<MaslovOutcome> {
    check_pair(g1, g2)?;
    let admissible = is_admissible(g1, g2)?;
    let theta = if admissible { 0.0 } else { perturbation_theta(g1, g2)? };
    let intervals = Pair { g1, g2, theta }.intervals()?;
    Ok(MaslovOutcome {
        value: intervals.iter().map(|x| x.2).sum(),
        admissible,
        theta: (!admissible).then_some(theta),
        intervals: intervals.len(),
    })
}

/// Maslov index of a pair of paths; non-admissible pairs are regularized by
/// rotating the second path by `e^{-theta J}`.
pub fn maslov_pair(g1: &LagrangianPath, g2: &LagrangianPath) -> Result<i64> {
    Ok(maslov_pair_detailed(g1, g2)?.value)
}

/// Index of a path relative to a fixed Lagrangian.
pub fn maslov_rel(g: &LagrangianPath, l0: &LagrangianFrame) -> Result<i64> {
    maslov_pair(g, &LagrangianPath::constant(l0))
}

/// Localized crossings whose signed multiplicities add up to
/// [`maslov_pair`].
pub fn crossing_list(g1: &LagrangianPath, g2: &LagrangianPath, tol: f64) -> Result<Vec<CrossingRecord>> {
    check_pair(g1, g2)?;
    let theta = if is_admissible(g1, g2)? { 0.0 } else { perturbation_theta(g1, g2)? };
    let pair = Pair { g1, g2, theta };
    let mut hits = Vec::new();
    for (a, b, net) in pair.intervals()? {
        if net != 0 {
            crossing::localize(&pair, &pair.sample(a)?, &pair.sample(b)?, net, tol.max(1e-15), &mut hits)?;
        }
    }
    Ok(hits
        .into_iter()
        .map(|(x, net)| CrossingRecord { lambda_star: x, sign: net.signum() as i32, multiplicity: net.unsigned_abs() as usize })
        .collect())
}

/// Winding number of `lambda -> det W(gamma(lambda))` for a closed path.
pub fn maslov_loop(g: &LagrangianPath) -> Result<i64> {
    let gap = gap_distance(&g.start()?, &g.end()?)?;
    if gap > LOOP_CLOSURE_TOL {
        return Err(Error::NotClosed { gap });
    }
    let det = |l: f64| -> Result<Complex64> { Ok(g.at(l)?.souriau().det()) };
    let grid = g.grid();
    let mut total = 0.0;
    let mut prev = (grid[0], det(grid[0])?);
    for &l in &grid[1..] {
        let mut stack = vec![(l, det(l)?, 0usize)];
        while let Some(&(b, db, depth)) = stack.last() {
            let inc = (db / prev.1).arg();
            if inc.abs() < PI / 2.0 {
                total += inc;
                prev = (b, db);
                stack.pop();
            } else if depth >= MAX_REFINEMENT_DEPTH {
                return Err(Error::RefinementFailed { lambda: prev.0, depth });
            } else {
                let m = 0.5 * (prev.0 + b);
                stack.push((m, det(m)?, depth + 1));
            }
        }
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        for n in 1..=3 {
            let v = LagrangianFrame::vertical(n);
            let h = LagrangianFrame::horizontal(n);
            assert_eq!(maslov_pair(&gamma_nor(n).unwrap(), &LagrangianPath::constant(&v)).unwrap(), 1);
            assert_eq!(maslov_pair(&LagrangianPath::constant(&h), &gamma_nor_prime(n).unwrap()).unwrap(), -1);
        }
    }

    #[test]
    fn gamma_nor_loop_winds_once() {
        for n in 1..=3 {
            let g = gamma_nor(n).unwrap();
            assert_eq!(maslov_loop(&g).unwrap(), 1);
            let twice = g.concat(&g).unwrap().concat(&g).unwrap();
            assert_eq!(maslov_loop(&twice).unwrap(), 3);
            assert_eq!(maslov_loop(&g.reversed().unwrap()).unwrap(), -1);
        }
        let c = LagrangianPath::constant(&LagrangianFrame::horizontal(2));
        assert_eq!(maslov_loop(&c).unwrap(), 0);
        assert!(matches!(maslov_loop(&gamma_nor_prime(1).unwrap().concat(&gamma_nor_prime(1).unwrap()).unwrap()), Ok(2)));
    }

    #[test]
    fn open_path_is_not_a_loop() {
        let half = gamma_nor(1).unwrap().reparametrized(crate::path::PiecewiseLinear::linear(0.0, 0.5)).unwrap();
        assert!(matches!(maslov_loop(&half), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn crossing_of_gamma_nor_is_at_half() {
        let l1 = LagrangianPath::constant(&LagrangianFrame::vertical(2));
        let rec = crossing_list(&gamma_nor(2).unwrap(), &l1, DEFAULT_CROSSING_TOL).unwrap();
        assert_eq!(rec.len(), 1);
        assert!((rec[0].lambda_star - 0.5).abs() < 1e-9);
        assert_eq!((rec[0].sign, rec[0].multiplicity), (1, 1));
    }

    #[test]
    fn rel_and_reversal() {
        let v = LagrangianFrame::vertical(1);
        let g = gamma_nor(1).unwrap();
        assert_eq!(maslov_rel(&g, &v).unwrap(), 1);
        assert_eq!(maslov_rel(&g.reversed().unwrap(), &v).unwrap(), -1);
        let t = LagrangianFrame::horizontal(1).rotate(0.3);
        assert_eq!(maslov_rel(&LagrangianPath::constant(&t), &v).unwrap(), 0);
    }

    #[test]
    fn identical_constant_pair_is_regularized() {
        let l = LagrangianFrame::horizontal(2).rotate(0.4);
        let c = LagrangianPath::constant(&l);
        let out = maslov_pair_detailed(&c, &c).unwrap();
        assert!(!out.admissible);
        let theta = out.theta.unwrap();
        assert!(theta > 0.0 && theta <= MAX_THETA);
        assert_eq!(out.value, 0);
        for k in 0..4 {
            let r = l.rotate(-theta / f64::from(1 << k));
            assert_eq!(intersection_dimension(&l, &r, ADMISSIBLE_TOL).unwrap(), 0);
        }
    }

    #[test]
    fn gamma_nor_against_horizontal_is_regularized() {
        // every gamma_nor(lambda) meets R^n x {0} in dimension >= n - 1
        let h = LagrangianPath::constant(&LagrangianFrame::horizontal(2));
        let g = gamma_nor(2).unwrap();
        let out = maslov_pair_detailed(&g, &h).unwrap();
        assert!(!out.admissible);
        // C = diag(e^{2 pi i lambda}, 1) shifted by +2 theta: the first phase
        // sweeps once through 0 upward
        assert_eq!(out.value, 1);
    }
}
