use nonlocal_robin::energy::energy_j;
use nonlocal_robin::mesh::{build_mesh, pair_quadrature};
use nonlocal_robin::operators::form_a_s;
use nonlocal_robin::space::{modular_norm, modular_rho_s};
use nonlocal_robin::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn problem(h: f64, collar: f64, p: f64) -> ProblemSpec {
    ProblemSpec::new(
        &DomainSpec::interval(0.0, 1.0, h, collar),
        0.3,
        0.0,
        MusielakFamily::power(p),
        SymmetricField::Constant(1.0),
        ReactionFamily::pure_power(2.0),
    )
    .unwrap()
}

fn random(prob: &ProblemSpec, seed: u64) -> DiscreteFunction {
    DiscreteFunction::random(prob.mesh.clone(), &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn modular_norm_is_a_norm(seed in 0u64..10_000, a in -5.0f64..5.0) {
        let prob = problem(0.125, 0.5, 3.0);
        let tol = 1e-10;
        let u = random(&prob, seed);
        let v = random(&prob, seed + 1);
        let nu = modular_norm(&u, &prob, tol).unwrap();
        let nv = modular_norm(&v, &prob, tol).unwrap();
        let nau = modular_norm(&u.scaled(a), &prob, tol).unwrap();
        prop_assert!((nau - a.abs() * nu).abs() <= 2.0 * tol * nau.max(nu));
        let nsum = modular_norm(&u.combine(1.0, &v, 1.0), &prob, tol).unwrap();
        prop_assert!(nsum <= (nu + nv) * (1.0 + 2.0 * tol));
        // bisection certificate
        let r = modular_rho_s(&u.scaled(1.0 / nu), &prob).unwrap();
        prop_assert!((r - 1.0).abs() <= 10.0 * tol * 3.0);
    }

    #[test]
    fn form_is_nonnegative_on_the_diagonal(seed in 0u64..10_000, scale in 0.01f64..10.0) {
        let prob = problem(0.125, 0.5, 2.5);
        let u = random(&prob, seed).scaled(scale);
        prop_assert!(form_a_s(&u, &u, &prob).unwrap() >= 0.0);
        prop_assert!(energy_j(&u, &prob).unwrap() > 0.0);
    }

    #[test]
    fn pair_weights_are_symmetric_and_skip_the_exterior(h_inv in 2usize..9) {
        let h = 1.0 / h_inv as f64;
        let mesh = build_mesh(&DomainSpec::interval(0.0, 1.0, h, 0.5)).unwrap();
        let q = pair_quadrature(&mesh, 0.4).unwrap();
        for p in &q.pairs {
            prop_assert!(mesh.cells[p.i].region == Region::Omega || mesh.cells[p.j].region == Region::Omega);
            prop_assert_eq!(q.weight(p.i, p.j), q.weight(p.j, p.i));
        }
        let m = mesh.len();
        let c = mesh.count(Region::Collar);
        prop_assert_eq!(q.len(), m * (m - 1) / 2 - c * (c - 1) / 2);
    }
}

/// Seminorm part of ρ_s for the smooth function cos(πx) on a given grid.
fn smooth_seminorm(h: f64, collar: f64) -> f64 {
    let prob = problem(h, collar, 3.0);
    let u = DiscreteFunction::from_fn(prob.mesh.clone(), |x, _| (std::f64::consts::PI * x[0]).cos());
    2.0 * prob.pair_modular(&u.values, 1.0)
}

#[test]
fn seminorm_is_stable_under_refinement() {
    let coarse = smooth_seminorm(1.0 / 32.0, 0.5);
    let fine = smooth_seminorm(1.0 / 64.0, 0.5);
    let change = (fine - coarse).abs() / fine;
    assert!(change <= 0.05, "relative change {change}");
}

#[test]
fn wider_collar_never_decreases_the_seminorm() {
    let mut last = 0.0;
    for collar in [0.125, 0.25, 0.5, 1.0] {
        let v = smooth_seminorm(0.125, collar);
        assert!(v >= last, "{collar}: {v} < {last}");
        last = v;
    }
}

#[test]
fn mesh_counts_for_the_reference_grids() {
    let m1 = build_mesh(&DomainSpec::interval(0.0, 1.0, 0.125, 0.5)).unwrap();
    assert_eq!((m1.count(Region::Omega), m1.count(Region::Collar)), (8, 8));
    let m2 = build_mesh(&DomainSpec::rectangle([0.0, 1.0], [0.0, 1.0], 0.25, 0.25)).unwrap();
    assert_eq!((m2.count(Region::Omega), m2.count(Region::Collar)), (16, 20));
}

#[test]
fn zero_modular_only_for_zero() {
    let prob = problem(0.125, 0.5, 3.0);
    let z = DiscreteFunction::zeros(prob.mesh.clone());
    assert_eq!(modular_rho_s(&z, &prob).unwrap(), 0.0);
    let mut u = z.clone();
    u.values[3] = 1e-3;
    assert!(modular_rho_s(&u, &prob).unwrap() > 0.0);
}
