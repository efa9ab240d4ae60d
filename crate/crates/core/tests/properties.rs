use std::f64::consts::PI;

use proptest::prelude::*;
use weylspec::asymptotics::sweep;
use weylspec::boundstates::default_z_window;
use weylspec::{
    c_function, default_bound_states, find_bound_states, green_kernel, BoundState, BoundStateOptions, Complex64, Execution, Numerics, Potential,
};

fn num() -> Numerics {
    Numerics::default()
}

// -F'' + qF - λF with a five-point stencil, skipping points whose stencil
// touches a coefficient breakpoint or the truncated end.
fn fd_residual(pot: &Potential, s: &BoundState, skip: &[f64]) -> f64 {
    let f = &s.eigenfunction;
    let h = f.grid.step;
    let peak = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for i in 2..f.values.len() - 2 {
        let x = f.grid.x(i);
        if skip.iter().any(|b| (x - b).abs() <= 2.5 * h) {
            continue;
        }
        let v = &f.values;
        let d2 = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2]) / (12.0 * h * h);
        let r = -d2 + (pot.q(x) - s.eigenvalue) * v[i];
        worst = worst.max(r.abs());
    }
    worst / (peak * (1.0 + s.eigenvalue.abs()))
}

fn sign_changes(s: &BoundState) -> usize {
    let peak = s.eigenfunction.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut last = 0.0f64;
    let mut n = 0;
    for &v in &s.eigenfunction.values {
        if v.abs() < 1e-8 * peak {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            n += 1;
        }
        last = v.signum();
    }
    n
}

fn check_states(pot: &Potential, skip: &[f64]) -> Vec<BoundState> {
    let states = default_bound_states(pot, &num()).unwrap();
    for (n, s) in states.iter().enumerate() {
        assert!(s.eigenvalue < 0.0);
        let r = fd_residual(pot, s, skip);
        assert!(r < 1e-5, "state {n}: residual {r:e}");
        assert!((s.eigenfunction.inner(&s.eigenfunction).unwrap() - 1.0).abs() < 1e-8);
        // ordered by increasing energy, state n has n interior nodes
        assert_eq!(sign_changes(s), n, "state {n}");
        for t in &states[..n] {
            assert!(t.eigenvalue < s.eigenvalue);
            assert!(s.eigenfunction.inner(&t.eigenfunction).unwrap().abs() < 1e-6);
        }
    }
    states
}

#[test]
fn capped_well_states_solve_the_equation() {
    let pot = Potential::capped_well(1.0, 5.0, 0.1).unwrap();
    let states = check_states(&pot, &[4.95, 5.05]);
    assert_eq!(states.len(), 2);
}

#[test]
fn exponential_well_matches_bessel_root() {
    // with s = (2√g/α) e^{-αx/2} the solutions are J_{2κ/α}(s); the
    // Dirichlet condition at s = π is met by J_{1/2}(s) ∝ sin(s)/√s
    let alpha = 3.0;
    let g = (PI * alpha / 2.0).powi(2);
    let pot = Potential::exp_decay(g, alpha).unwrap();
    let states = check_states(&pot, &[]);
    assert_eq!(states.len(), 1);
    let kappa = alpha / 4.0;
    assert!((states[0].eigenvalue + kappa * kappa).abs() < 1e-6, "{}", states[0].eigenvalue);
}

#[test]
fn states_beyond_the_admissible_window_are_flagged() {
    // the Bessel condition puts this state near z = 0.9, above 0.45 α
    let pot = Potential::exp_decay(6.0, 1.0).unwrap();
    let (lo, hi) = default_z_window(&pot, &num()).unwrap();
    let opts = BoundStateOptions { z_range: (lo, hi), ..BoundStateOptions::default() };
    let search = find_bound_states(&pot, &opts, &num()).unwrap();
    assert!(search.window_clipped);
    assert!(search.states.is_empty());
}

#[test]
fn repulsive_potential_has_no_states() {
    let pot = Potential::exp_decay(-2.0, 1.0).unwrap();
    assert!(default_bound_states(&pot, &num()).unwrap().is_empty());
}

#[test]
fn execution_modes_agree_bitwise() {
    let pot = Potential::capped_well(1.0, 5.0, 0.1).unwrap();
    let lambdas: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
    let par = sweep(&pot, &lambdas, &num()).unwrap();
    let seq = sweep(&pot, &lambdas, &num().sequential()).unwrap();
    assert_eq!(num().exec, Execution::Parallel);
    for (a, b) in par.iter().zip(&seq) {
        assert_eq!(a.density.to_bits(), b.density.to_bits());
        assert_eq!(a.c, b.c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn density_is_positive_and_consistent(strength in -3.0f64..3.0, rate in 0.5f64..3.0, lambda in 0.01f64..50.0) {
        let pot = Potential::exp_decay(strength, rate).unwrap();
        let p = c_function(&pot, lambda, &num()).unwrap();
        let k = lambda.sqrt();
        prop_assert!(p.density > 0.0);
        prop_assert!((p.density * 4.0 * PI * k * p.c.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((p.c - Complex64::new(p.a / 2.0, -p.b / (2.0 * k))).norm() < 1e-12 * p.c.norm());
    }

    #[test]
    fn weak_potentials_stay_near_free(strength in -0.01f64..0.01, lambda in 0.5f64..20.0) {
        let pot = Potential::exp_decay(strength, 1.0).unwrap();
        let rho = c_function(&pot, lambda, &num()).unwrap().density;
        let free = lambda.sqrt() / PI;
        // first-order Born estimate: |c - 1| is at most ∫|q| / k
        let slack = 4.0 * strength.abs() / lambda.sqrt();
        prop_assert!((rho / free - 1.0).abs() <= slack + 1e-9);
    }

    #[test]
    fn green_kernel_symmetries(re in -2.0f64..12.0, im in 0.05f64..3.0, x in 0.0f64..9.0, y in 0.0f64..9.0) {
        let pot = Potential::capped_well(1.0, 5.0, 0.1).unwrap();
        let nu = Complex64::new(re, im);
        let a = green_kernel(&pot, nu, x, y, &num()).unwrap().value;
        let b = green_kernel(&pot, nu, y, x, &num()).unwrap().value;
        let c = green_kernel(&pot, nu.conj(), x, y, &num()).unwrap().value;
        prop_assert_eq!(a, b);
        prop_assert!((a - c.conj()).norm() <= 1e-12 * a.norm());
        if x == 0.0 || y == 0.0 {
            prop_assert!(a.norm() < 1e-12);
        }
    }
}
