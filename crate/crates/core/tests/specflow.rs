use maslovflow::maslov::{gamma_nor, gamma_nor_prime, maslov_pair};
use maslovflow::path::LagrangianPath;
use maslovflow::random;
use maslovflow::specflow::{
    conjugation_spectrum_check, detector_multiplicity, discretized_gap_diagnostic, spectral_flow, spectral_flow_shifted,
    spectral_flow_with, spectrum_window, BoundaryValueFamily, SpectralFlowOptions, DEFAULT_TOL,
};
use maslovflow::symplectic::{intersection_dimension, LagrangianFrame};
use maslovflow::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Eigenvalues in `(lo, hi)` of the branches `sign * pi * lambda + pi/2 + k pi`
/// (multiplicity 1) and `pi/2 + k pi` (multiplicity n - 1).
fn closed_form(n: usize, lambda: f64, sign: f64, lo: f64, hi: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut add = |mu: f64, m: usize| {
        if m == 0 || mu <= lo || mu >= hi {
            return;
        }
        match out.iter_mut().find(|e| (e.0 - mu).abs() < 1e-9) {
            Some(e) => e.1 += m,
            None => out.push((mu, m)),
        }
    };
    for k in -4..=4 {
        add(sign * PI * lambda + PI / 2.0 + k as f64 * PI, 1);
        add(PI / 2.0 + k as f64 * PI, n - 1);
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn nor(n: usize) -> BoundaryValueFamily {
    BoundaryValueFamily::unperturbed(gamma_nor(n).unwrap(), LagrangianPath::constant(&LagrangianFrame::vertical(n))).unwrap()
}

fn nor_prime(n: usize) -> BoundaryValueFamily {
    BoundaryValueFamily::unperturbed(LagrangianPath::constant(&LagrangianFrame::horizontal(n)), gamma_nor_prime(n).unwrap()).unwrap()
}

#[test]
fn closed_form_spectra() {
    let (lo, hi) = (-PI + 0.1, PI - 0.1);
    for n in 1..=3 {
        for (fam, sign) in [(nor(n), 1.0), (nor_prime(n), -1.0)] {
            for k in 0..=10 {
                let lambda = k as f64 / 10.0;
                let w = spectrum_window(&fam, lambda, lo, hi, DEFAULT_TOL).unwrap();
                // (gamma_nor): pi lambda - pi/2 + k pi, written as pi lambda + pi/2 + (k-1) pi
                let expect = closed_form(n, lambda, sign, lo, hi);
                let got: Vec<(f64, usize)> = w.eigenvalues.iter().map(|e| (e.mu, e.multiplicity)).collect();
                assert_eq!(got.len(), expect.len(), "n={n} lambda={lambda} got {got:?} expected {expect:?}");
                for (g, e) in got.iter().zip(&expect) {
                    assert!((g.0 - e.0).abs() < 1e-7 && g.1 == e.1, "n={n} lambda={lambda} got {got:?} expected {expect:?}");
                }
            }
        }
    }
}

#[test]
fn kernel_dimension_is_intersection_dimension() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = r.random_range(1..=3);
        let l1 = random::lagrangian_frame(&mut r, n);
        let k = r.random_range(0..=n);
        let l2 = random::lagrangian_with_intersection(&mut r, &l1, k);
        let fam = BoundaryValueFamily::unperturbed(LagrangianPath::constant(&l1), LagrangianPath::constant(&l2)).unwrap();
        let w = spectrum_window(&fam, 0.5, -0.25, 0.25, DEFAULT_TOL).unwrap();
        let at_zero: usize = w.eigenvalues.iter().filter(|e| e.mu == 0.0).map(|e| e.multiplicity).sum();
        assert_eq!(at_zero, intersection_dimension(&l1, &l2, 1e-8).unwrap());
        if k > 0 {
            assert_eq!(detector_multiplicity(&fam, 0.5, 0.0).unwrap(), k);
        }
    }
}

fn random_pair(r: &mut ChaCha8Rng) -> (LagrangianPath, LagrangianPath) {
    let n = r.random_range(1..=2);
    let g1 = LagrangianPath::new(random::path(r, n)).unwrap();
    let g2 = if r.random_bool(0.3) {
        let k = r.random_range(1..=n);
        LagrangianPath::new(random::path_meeting(r, &g1.start().unwrap(), k)).unwrap()
    } else {
        LagrangianPath::new(random::path(r, n)).unwrap()
    };
    (g1, g2)
}

#[test]
fn spectral_flow_equals_maslov_index() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..12 {
        let (g1, g2) = random_pair(&mut r);
        let m = maslov_pair(&g1, &g2).unwrap();
        let fam = BoundaryValueFamily::unperturbed(g1, g2).unwrap();
        assert_eq!(spectral_flow(&fam, &fam.default_grid()).unwrap().value, m);
    }
}

#[test]
fn partition_independence() {
    let mut r = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..5 {
        let (g1, g2) = random_pair(&mut r);
        let fam = BoundaryValueFamily::unperturbed(g1, g2).unwrap();
        let grid = fam.default_grid();
        let base = spectral_flow(&fam, &grid).unwrap().value;
        let mut fine: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        fine.extend(&grid);
        let opts = SpectralFlowOptions { epsilon_scale: 0.5, ..Default::default() };
        assert_eq!(spectral_flow_with(&fam, &fine, &opts).unwrap().value, base);
    }
}

#[test]
fn shift_ladder() {
    let mut r = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..5 {
        let (g1, g2) = random_pair(&mut r);
        let fam = BoundaryValueFamily::unperturbed(g1, g2).unwrap();
        let grid = fam.default_grid();
        let base = spectral_flow(&fam, &grid).unwrap().value;
        for delta in [1e-1, 1e-2, 1e-3] {
            match spectral_flow_shifted(&fam, delta, &grid) {
                Ok(v) => assert_eq!(v, base),
                Err(Error::ShiftTooLarge { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn shift_moves_spectrum() {
    let fam = nor(2);
    for lambda in [0.0, 0.3, 0.8] {
        let a = spectrum_window(&fam, lambda, -2.5, 2.5, DEFAULT_TOL).unwrap();
        let b = spectrum_window(&fam.shifted(0.1), lambda, -2.4, 2.6, DEFAULT_TOL).unwrap();
        assert_eq!(a.eigenvalues.len(), b.eigenvalues.len());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x.mu + 0.1 - y.mu).abs() < 1e-7);
            assert_eq!(x.multiplicity, y.multiplicity);
        }
    }
}

#[test]
fn conjugation_examples() {
    let l0 = LagrangianPath::constant(&LagrangianFrame::horizontal(1));
    let l1 = LagrangianPath::constant(&LagrangianFrame::vertical(1));
    for delta0 in [0.0, 0.05, 0.1] {
        let rep = conjugation_spectrum_check(&gamma_nor(1).unwrap(), &l1, delta0).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.sfl_shifted_potential, 1);
    }
    let rep = conjugation_spectrum_check(&l0, &l1, 0.1).unwrap();
    assert!(rep.passed);
    let mus: Vec<f64> = rep.shifted_potential[0].eigenvalues.iter().map(|e| e.mu).collect();
    assert!((mus[0] - (-PI / 2.0 + 0.1)).abs() < 1e-7 && (mus[1] - (PI / 2.0 + 0.1)).abs() < 1e-7);
}

#[test]
fn gap_diagnostic_ladders() {
    let rep = discretized_gap_diagnostic(&nor(1), 0.0, &[0.02, 0.01, 0.005], 64).unwrap();
    assert!(rep.passed, "{rep:?}");
    // fixed conditions, moving potential: the bound is uninformative but the gap still shrinks
    let s = maslovflow::hamiltonian::SymmetricFamily::new(
        1,
        vec![maslovflow::hamiltonian::SymmetricTerm { lambda_power: 1, t_power: 0, matrix: nalgebra::DMatrix::identity(2, 2) }],
    )
    .unwrap();
    let fam = BoundaryValueFamily::new(
        LagrangianPath::constant(&LagrangianFrame::horizontal(1)),
        LagrangianPath::constant(&LagrangianFrame::vertical(1)),
        s,
    )
    .unwrap();
    let rep = discretized_gap_diagnostic(&fam, 0.0, &[0.02, 0.01, 0.005], 32).unwrap();
    assert!(rep.entries.iter().all(|e| e.ratio.is_none()));
    assert!(rep.monotone);
}
