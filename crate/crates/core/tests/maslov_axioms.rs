use maslovflow::maslov::{
    gamma_nor, gamma_nor_prime, is_admissible, maslov_pair, maslov_pair_rotated, perturbation_theta,
    crossing_list, DEFAULT_CROSSING_TOL,
};
use maslovflow::path::{LagrangianPath, PathDescriptor};
use maslovflow::random;
use maslovflow::symplectic::{intersection_dimension, LagrangianFrame};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: u64 = 50;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn path(d: PathDescriptor) -> LagrangianPath {
    LagrangianPath::new(d).unwrap()
}

fn admissible_pair(r: &mut ChaCha8Rng) -> (LagrangianPath, LagrangianPath) {
    loop {
        let n = r.random_range(1..=2);
        let (a, b) = (path(random::path(r, n)), path(random::path(r, n)));
        if is_admissible(&a, &b).unwrap() {
            return (a, b);
        }
    }
}

#[test]
fn transversal_pairs_have_index_zero() {
    let mut r = rng(1);
    for _ in 0..CASES {
        let n = r.random_range(1..=2);
        let (l0, l1) = (random::lagrangian_frame(&mut r, n), random::lagrangian_frame(&mut r, n));
        assert_eq!(intersection_dimension(&l0, &l1, 1e-6).unwrap(), 0);
        // a common symplectic path keeps the pair transversal throughout
        let g = random::generator(&mut r, n, 0.7);
        let a = LagrangianPath::constant(&l0).acted_on(g.clone()).unwrap();
        let b = LagrangianPath::constant(&l1).acted_on(g).unwrap();
        assert_eq!(maslov_pair(&a, &b).unwrap(), 0);
        assert!(crossing_list(&a, &b, DEFAULT_CROSSING_TOL).unwrap().is_empty());
    }
}

#[test]
fn concatenation_is_additive() {
    let mut r = rng(2);
    for _ in 0..CASES {
        let (g1, g2) = admissible_pair(&mut r);
        let n = g1.n();
        let continue_from = |r: &mut ChaCha8Rng, p: &LagrangianPath| {
            let mut g = random::generator(r, n, 0.7);
            g[0].fill(0.0);
            LagrangianPath::constant(&p.end().unwrap()).acted_on(g).unwrap()
        };
        let g3 = continue_from(&mut r, &g1);
        let g4 = continue_from(&mut r, &g2);
        if !is_admissible(&g3, &g4).unwrap() {
            continue;
        }
        let joined = maslov_pair(&g1.concat(&g3).unwrap(), &g2.concat(&g4).unwrap()).unwrap();
        assert_eq!(joined, maslov_pair(&g1, &g2).unwrap() + maslov_pair(&g3, &g4).unwrap());
    }
}

#[test]
fn antisymmetry_and_reversal() {
    let mut r = rng(3);
    for _ in 0..CASES {
        let (g1, g2) = admissible_pair(&mut r);
        let m = maslov_pair(&g1, &g2).unwrap();
        assert_eq!(maslov_pair(&g2, &g1).unwrap(), -m);
        assert_eq!(maslov_pair(&g1.reversed().unwrap(), &g2.reversed().unwrap()).unwrap(), -m);
    }
}

#[test]
fn symplectic_path_invariance() {
    let mut r = rng(4);
    for _ in 0..CASES {
        let (g1, g2) = admissible_pair(&mut r);
        let g = random::generator(&mut r, g1.n(), 0.7);
        let moved = maslov_pair(&g1.acted_on(g.clone()).unwrap(), &g2.acted_on(g).unwrap()).unwrap();
        assert_eq!(moved, maslov_pair(&g1, &g2).unwrap());
    }
}

#[test]
fn reparametrization_invariance() {
    let mut r = rng(5);
    for _ in 0..CASES {
        let (g1, g2) = admissible_pair(&mut r);
        let map = random::monotone_map(&mut r, 3);
        let re = maslov_pair(&g1.reparametrized(map.clone()).unwrap(), &g2.reparametrized(map).unwrap()).unwrap();
        assert_eq!(re, maslov_pair(&g1, &g2).unwrap());
    }
}

#[test]
fn regularization_agrees_on_admissible_pairs() {
    let mut r = rng(6);
    for _ in 0..CASES {
        let (g1, g2) = admissible_pair(&mut r);
        let m = maslov_pair(&g1, &g2).unwrap();
        let theta = perturbation_theta(&g1, &g2).unwrap();
        assert_eq!(maslov_pair_rotated(&g1, &g2, theta).unwrap(), m);
        assert_eq!(maslov_pair_rotated(&g1, &g2, 0.5 * theta).unwrap(), m);
    }
}

#[test]
fn non_admissible_pairs_are_theta_stable() {
    let mut r = rng(7);
    for _ in 0..20 {
        let n = r.random_range(1..=2);
        let g1 = path(random::path(&mut r, n));
        let k = r.random_range(1..=n);
        let g2 = path(random::path_meeting(&mut r, &g1.start().unwrap(), k));
        assert!(!is_admissible(&g1, &g2).unwrap());
        let theta = perturbation_theta(&g1, &g2).unwrap();
        let m = maslov_pair(&g1, &g2).unwrap();
        assert_eq!(maslov_pair_rotated(&g1, &g2, theta / 4.0).unwrap(), m);
    }
}

#[test]
fn crossing_records_sum_to_index() {
    let mut r = rng(8);
    for _ in 0..20 {
        let (g1, g2) = admissible_pair(&mut r);
        let recs = crossing_list(&g1, &g2, DEFAULT_CROSSING_TOL).unwrap();
        let total: i64 = recs.iter().map(|c| i64::from(c.sign) * c.multiplicity as i64).sum();
        assert_eq!(total, maslov_pair(&g1, &g2).unwrap());
        for c in &recs {
            assert!(c.multiplicity <= g1.n());
            let l1 = g1.at(c.lambda_star).unwrap();
            let l2 = g2.at(c.lambda_star).unwrap();
            assert!(intersection_dimension(&l1, &l2, 1e-6).unwrap() >= 1);
        }
    }
}

/// Coordinates `(x1, y1, x2, y2) -> (x1, x2, -y1, y2)` standardize the form
/// `(-omega) ⊕ omega`; the diagonal then has Souriau matrix `[[0, I], [I, 0]]`.
fn standardized_diagonal(n: usize) -> LagrangianFrame {
    let mut f = DMatrix::zeros(4 * n, 2 * n);
    for j in 0..n {
        // (e_j, e_j) in positions, (-e_j, e_j) in momenta
        f[(j, j)] = 1.0;
        f[(n + j, j)] = 1.0;
        f[(2 * n + j, n + j)] = -1.0;
        f[(3 * n + j, n + j)] = 1.0;
    }
    LagrangianFrame::from_basis(&f).unwrap()
}

#[test]
fn product_form_agrees_with_relative_unitary() {
    let mut r = rng(9);
    for _ in 0..CASES {
        let (g1, g2) = admissible_pair(&mut r);
        let product = g1.conjugated().unwrap().direct_sum(&g2).unwrap();
        let delta = LagrangianPath::constant(&standardized_diagonal(g1.n()));
        assert_eq!(maslov_pair(&delta, &product).unwrap(), maslov_pair(&g1, &g2).unwrap());
    }
}

#[test]
fn normalization_paths() {
    for n in 1..=3 {
        let h = LagrangianFrame::horizontal(n);
        let v = LagrangianFrame::vertical(n);
        let g = gamma_nor(n).unwrap();
        let gp = gamma_nor_prime(n).unwrap();
        assert_eq!(intersection_dimension(&g.at(0.5).unwrap(), &h, 1e-8).unwrap(), n - 1);
        assert_eq!(intersection_dimension(&g.at(0.37).unwrap(), &h, 1e-8).unwrap(), n - 1);
        assert!(maslovflow::symplectic::gap_distance(&gp.at(0.0).unwrap(), &v).unwrap() < 1e-15);
        assert_eq!(maslov_pair(&g, &LagrangianPath::constant(&v)).unwrap(), 1);
        assert_eq!(maslov_pair(&LagrangianPath::constant(&h), &gp).unwrap(), -1);
        let s = h.souriau();
        assert!((s.matrix() - DMatrix::identity(n, n)).norm() < 1e-15);
    }
}
