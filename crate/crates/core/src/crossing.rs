//! Signed counting of eigenphases of a unitary family `x -> C(x)` passing
//! through `0 mod 2 pi`, shared by the Maslov index (over `lambda`) and the
//! shooting spectra (over `mu`).

use crate::error::{Error, Result};
use crate::linalg;
use crate::path::MAX_REFINEMENT_DEPTH;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest `‖C(b) - C(a)‖` accepted on a counting interval.
const MAX_STEP_DISTANCE: f64 = 0.25;
/// Safety factor on the eigenphase displacement bound.
const DISPLACEMENT_SAFETY: f64 = 1.5;
/// Bracket width below which an isolated simple crossing is located by
/// regula falsi instead of bisection.
const FALSI_SWITCH: f64 = 1e-2;
const NEAR_PHASE: f64 = 0.1;
const FAR_PHASE: f64 = 0.3;
const FALSI_ITERATIONS: usize = 60;

pub(crate) struct PhaseSample {
    pub x: f64,
    pub c: DMatrix<Complex64>,
    pub phases: Vec<f64>,
}

impl PhaseSample {
    pub fn new(x: f64, c: DMatrix<Complex64>) -> Self {
        let phases = linalg::eigenphases(&c);
        Self { x, c, phases }
    }
}

pub(crate) trait PhaseFamily {
    fn sample(&self, x: f64) -> Result<PhaseSample>;
}

fn complex_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Midpoint of the widest gap among `{0, |phases|, pi}`, provided the gap
/// clears the displacement bound `d` on both sides.
pub(crate) fn arc_half_width(pa: &[f64], pb: &[f64], d: f64) -> Option<f64> {
    let mut v: Vec<f64> = pa.iter().chain(pb).map(|p| p.abs()).collect();
    v.push(0.0);
    v.push(PI);
    v.sort_by(f64::total_cmp);
    let (gap, lo) = v.windows(2).map(|w| (w[1] - w[0], w[0])).max_by(|x, y| x.0.total_cmp(&y.0))?;
    (0.5 * gap > d).then_some(lo + 0.5 * gap)
}

fn count_arc(phases: &[f64], w: f64) -> i64 {
    phases.iter().filter(|&&p| (0.0..w).contains(&p)).count() as i64
}

/// Net count of upward passages through 0 on `[a.x, b.x]`, appended as
/// elementary intervals `(a, b, net)`.
pub(crate) fn count_interval<F: PhaseFamily + ?Sized>(
    fam: &F,
    a: &PhaseSample,
    b: &PhaseSample,
    depth: usize,
    out: &mut Vec<(f64, f64, i64)>,
) -> Result<()> {
    let dc = complex_norm(&(&b.c - &a.c));
    if dc <= MAX_STEP_DISTANCE {
        let d = DISPLACEMENT_SAFETY * 2.0 * (0.5 * dc).min(1.0).asin();
        if let Some(w) = arc_half_width(&a.phases, &b.phases, d) {
            out.push((a.x, b.x, count_arc(&b.phases, w) - count_arc(&a.phases, w)));
            return Ok(());
        }
    }
    if depth >= MAX_REFINEMENT_DEPTH {
        return Err(Error::RefinementFailed { lambda: a.x, depth });
    }
    let mid = fam.sample(0.5 * (a.x + b.x))?;
    count_interval(fam, a, &mid, depth + 1, out)?;
    count_interval(fam, &mid, b, depth + 1, out)
}

/// Elementary intervals covering a sorted grid.
pub(crate) fn count_grid<F: PhaseFamily + ?Sized>(fam: &F, grid: &[f64]) -> Result<Vec<(f64, f64, i64)>> {
    let mut out = Vec::new();
    let mut prev = fam.sample(grid[0])?;
    for &x in &grid[1..] {
        let next = fam.sample(x)?;
        count_interval(fam, &prev, &next, 0, &mut out)?;
        prev = next;
    }
    Ok(out)
}

fn net(intervals: &[(f64, f64, i64)]) -> i64 {
    intervals.iter().map(|x| x.2).sum()
}

/// Bisects `[a, b]` (net count `total`) down to width `width`, returning
/// `(x, net)` for each localized cluster.
pub(crate) fn localize<F: PhaseFamily + ?Sized>(
    fam: &F,
    a: &PhaseSample,
    b: &PhaseSample,
    total: i64,
    width: f64,
    out: &mut Vec<(f64, i64)>,
) -> Result<()> {
    localize_rec(fam, a, b, total, width, 0, out)
}

fn localize_rec<F: PhaseFamily + ?Sized>(
    fam: &F,
    a: &PhaseSample,
    b: &PhaseSample,
    total: i64,
    width: f64,
    depth: usize,
    out: &mut Vec<(f64, i64)>,
) -> Result<()> {
    if b.x - a.x > width && b.x - a.x <= FALSI_SWITCH && total.abs() == 1 {
        if let Some(x) = simple_root(fam, a, b, width)? {
            out.push((x, total));
            return Ok(());
        }
    }
    if b.x - a.x > width && depth < 2 * MAX_REFINEMENT_DEPTH {
        let m = fam.sample(0.5 * (a.x + b.x))?;
        let (mut left, mut right) = (Vec::new(), Vec::new());
        count_interval(fam, a, &m, 0, &mut left)?;
        count_interval(fam, &m, b, 0, &mut right)?;
        let (l, r) = (net(&left), net(&right));
        if l + r == total {
            if l != 0 {
                localize_rec(fam, a, &m, l, width, depth + 1, out)?;
            }
            if r != 0 {
                localize_rec(fam, &m, b, r, width, depth + 1, out)?;
            }
            return Ok(());
        }
    }
    out.push((0.5 * (a.x + b.x), total));
    Ok(())
}

/// The phase nearest 0, if it is the only one within `NEAR_PHASE` and all
/// others are beyond `FAR_PHASE`.
fn isolated_phase(p: &PhaseSample) -> Option<f64> {
    let mut near = p.phases.iter().filter(|q| q.abs() < NEAR_PHASE);
    let first = *near.next()?;
    let clear = near.next().is_none() && p.phases.iter().all(|q| q.abs() < NEAR_PHASE || q.abs() > FAR_PHASE);
    clear.then_some(first)
}

/// Illinois regula falsi on the single phase crossing 0 in `[a, b]`. `None`
/// when the crossing is not isolated, so the caller keeps bisecting.
fn simple_root<F: PhaseFamily + ?Sized>(fam: &F, a: &PhaseSample, b: &PhaseSample, width: f64) -> Result<Option<f64>> {
    let (Some(mut fa), Some(mut fb)) = (isolated_phase(a), isolated_phase(b)) else {
        return Ok(None);
    };
    if fa * fb > 0.0 {
        return Ok(None);
    }
    let (mut xa, mut xb) = (a.x, b.x);
    let mut side = 0;
    for _ in 0..FALSI_ITERATIONS {
        if xb - xa <= width {
            break;
        }
        let x = if fa == fb { 0.5 * (xa + xb) } else { (xa * fb - xb * fa) / (fb - fa) };
        let x = x.clamp(xa + 0.01 * (xb - xa), xb - 0.01 * (xb - xa));
        let Some(fx) = isolated_phase(&fam.sample(x)?) else {
            return Ok(None);
        };
        if fx == 0.0 {
            return Ok(Some(x));
        }
        if fx * fa > 0.0 {
            (xa, fa) = (x, fx);
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            (xb, fb) = (x, fx);
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(Some(if fa == fb { 0.5 * (xa + xb) } else { (xa * fb - xb * fa) / (fb - fa) }.clamp(xa, xb)))
}
