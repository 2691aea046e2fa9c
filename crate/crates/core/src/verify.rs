//! Self-contained runtime verification suites. Each check compares a closed
//! form against an independent oracle (a hand-rolled Jacobi eigensolver,
//! brute-force minimization, or high-resolution quadrature) and reports the
//! observed discrepancy against a fixed tolerance.

use crate::analysis::{director_kappa, eigenvalues, reduced_energy_f, reduced_map_u_from_v, Field2};
use crate::fields::{
    augment_l, compute_d_a, h_plus, normalize3, potential_p, potential_s, q_from_u, Field3,
};
use crate::mesh::build_mesh;
use crate::tangent::{
    first_integral_deviation, hessian_radial, lambda_pm, ode_residual, profile, profile_energy,
    HarmonicClass, SignVariant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Eigenvalues of a symmetric 3×3 matrix by cyclic Jacobi rotations,
/// ascending. Independent of the closed forms it is used to check.
pub fn symmetric_eigenvalues_3x3(m: &[[f64; 3]; 3]) -> [f64; 3] {
    let mut a = *m;
    for _ in 0..100 {
        // largest off-diagonal element
        let (mut p, mut q, mut big) = (0usize, 1usize, 0.0f64);
        for i in 0..3 {
            for j in i + 1..3 {
                if a[i][j].abs() > big {
                    big = a[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if big < 1e-15 {
            break;
        }
        let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        let mut b = a;
        for k in 0..3 {
            b[p][k] = c * a[p][k] - s * a[q][k];
            b[q][k] = s * a[p][k] + c * a[q][k];
        }
        let mut a2 = b;
        for k in 0..3 {
            a2[k][p] = c * b[k][p] - s * b[k][q];
            a2[k][q] = s * b[k][p] + c * b[k][q];
        }
        a = a2;
    }
    let mut ev = [a[0][0], a[1][1], a[2][2]];
    ev.sort_by(f64::total_cmp);
    ev
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub tolerance: f64,
    pub observed: f64,
    pub passed: bool,
}

fn check(name: &'static str, observed: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name,
        tolerance,
        observed,
        passed: observed.is_finite() && observed <= tolerance,
    }
}

/// Targets for intentional fault injection, used to demonstrate that the
/// checks actually bite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    None,
    /// Perturbs the closed-form eigenvalues before comparison.
    EigenvalueFormula,
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_cafe)
}

fn random_unit(r: &mut impl Rng) -> [f64; 3] {
    normalize3(&[
        r.gen_range(-1.0..1.0),
        r.gen_range(-1.0..1.0),
        r.gen_range(-1.0..1.0),
    ])
}

pub fn check_eigen_oracle(mutation: Mutation) -> CheckResult {
    let mut r = rng();
    let bias = if mutation == Mutation::EigenvalueFormula {
        1e-6
    } else {
        0.0
    };
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let u = random_unit(&mut r);
        let e = eigenvalues(&u);
        let mut closed = [e.l1 + bias, e.l2, e.l3];
        closed.sort_by(f64::total_cmp);
        let numeric = symmetric_eigenvalues_3x3(&q_from_u(&u, 0.4, 0.3, 0.7).unwrap().0);
        for k in 0..3 {
            worst = worst.max((closed[k] - numeric[k]).abs());
        }
    }
    check("eigenvalue closed form vs matrix oracle", worst, 1e-10)
}

pub fn check_s_composition() -> CheckResult {
    let mut r = rng();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let u = random_unit(&mut r);
        let theta = r.gen_range(0.0..std::f64::consts::TAU);
        worst = worst.max((potential_s(&augment_l(&u, theta)) - potential_p(&u)).abs());
    }
    check("S composed with the augment operator equals P", worst, 1e-12)
}

pub fn check_ode_suite() -> Vec<CheckResult> {
    let mut worst_res = 0.0f64;
    let mut worst_fi = 0.0f64;
    for class in [HarmonicClass::II, HarmonicClass::III] {
        for beta in [0.3, 1.0, 2.0] {
            for variant in [SignVariant::Plus, SignVariant::Minus] {
                let p = profile(class, beta, variant, 10_001).unwrap();
                worst_res = worst_res.max(ode_residual(&p));
                worst_fi = worst_fi.max(first_integral_deviation(&p));
            }
        }
    }
    for variant in [SignVariant::Plus, SignVariant::Minus] {
        let p = lambda_pm(variant, 10_001);
        worst_res = worst_res.max(ode_residual(&p));
        worst_fi = worst_fi.max(first_integral_deviation(&p));
    }
    vec![
        check("profile ODE residual of closed forms", worst_res, 1e-7),
        check("first integral deviation of closed forms", worst_fi, 1e-8),
    ]
}

pub fn check_quadratures() -> Vec<CheckResult> {
    let exact = 24.0 * std::f64::consts::PI;
    let u = Field3::hedgehog(Arc::new(build_mesh(128).unwrap()));
    let total = crate::energy::energy(&u, 10.0).total;
    let rel = (total - exact).abs() / exact;
    let (_, ball) = profile_energy(&lambda_pm(SignVariant::Plus, 10_001));
    vec![
        check("hedgehog energy vs 24*pi (n = 128)", rel, 0.015),
        check(
            "axis tangent-map ball energy vs 8*pi",
            (ball - 8.0 * std::f64::consts::PI).abs(),
            1e-6,
        ),
    ]
}

pub fn check_hessian_signs() -> Vec<CheckResult> {
    let n = 10_001;
    let mu = 10.0f64;
    let lambda = (0.8 * mu.sqrt()).ceil();
    let tent: Vec<f64> = (0..n)
        .map(|i| (1.0 - lambda * i as f64 / (n - 1) as f64).max(0.0))
        .collect();
    let neg = hessian_radial(&tent, mu).unwrap();
    let bump: Vec<f64> = (0..n)
        .map(|i| {
            let r = i as f64 / (n - 1) as f64;
            r * (1.0 - r)
        })
        .collect();
    let pos = hessian_radial(&bump, 0.0).unwrap();
    vec![
        check("concentrated tent direction is unstable", neg, -1e-10),
        check("generic bump direction is stable", -pos, -1e-10),
    ]
}

pub fn check_reduced_identity() -> CheckResult {
    let mesh = Arc::new(build_mesh(32).unwrap());
    let mut r = rng();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let a: [f64; 4] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let v = Field2::from_fn(Arc::clone(&mesh), |rho, z| {
            let angle = 2.0 * rho.atan2(z)
                + (1.0 - rho * rho - z * z) * (a[0] + a[1] * rho + a[2] * z + a[3] * rho * z);
            [angle.cos(), angle.sin()]
        });
        let values: Vec<[f64; 3]> = v.values.iter().map(reduced_map_u_from_v).collect();
        let u = Field3 {
            mesh: Arc::clone(&mesh),
            values,
        };
        let e = crate::energy::energy(&u, 0.0).total;
        let f = reduced_energy_f(&v);
        worst = worst.max((e - 1.5 * f).abs() / f.abs().max(1.0));
    }
    check("lifted energy equals 1.5x reduced functional", worst, 1e-10)
}

pub fn check_director() -> CheckResult {
    let mut r = rng();
    let mut worst = 0.0f64;
    let mut tested = 0;
    while tested < 2000 {
        let u = random_unit(&mut r);
        let e = eigenvalues(&u);
        if e.l3 - e.l2 < 1e-6 {
            continue;
        }
        let k = director_kappa(&u).unwrap();
        worst = worst.max((k[0] * k[0] + k[1] * k[1] - 1.0).abs());
        let q = q_from_u(&u, 0.5, 0.2, 0.0).unwrap();
        let kv = [k[0], 0.0, k[1]];
        let qk = q.apply(&kv);
        for c in 0..3 {
            worst = worst.max((qk[c] - e.l3 * kv[c]).abs());
        }
        tested += 1;
    }
    check("director is the unit top eigenvector", worst, 1e-10)
}

pub fn check_potential_floor() -> CheckResult {
    // closed-form minimizing radius of the finite-a potential vs the
    // numerically computed additive constant
    let mut worst = 0.0f64;
    for a in [0.5, 1.0, std::f64::consts::SQRT_2, 4.0, 10.0] {
        let t = std::f64::consts::SQRT_2 * h_plus(a) / a;
        let analytic = std::f64::consts::SQRT_2 * a * t * t * t
            - 0.5 * a * a * (t * t - 1.0) * (t * t - 1.0);
        worst = worst.max((compute_d_a(a).unwrap() - analytic).abs());
    }
    check("finite-a potential floor vs closed form", worst, 1e-9)
}

/// Runs every suite; all checks passing means the implemented formulas agree
/// with their independent oracles.
pub fn run_suite(mutation: Mutation) -> Vec<CheckResult> {
    let mut out = vec![check_eigen_oracle(mutation), check_s_composition()];
    out.extend(check_ode_suite());
    out.extend(check_quadratures());
    out.extend(check_hessian_signs());
    out.push(check_reduced_identity());
    out.push(check_director());
    out.push(check_potential_floor());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_solver_on_known_matrix() {
        // eigenvalues of diag(1,2,3) under an orthogonal conjugation
        let c = 0.6f64;
        let s = 0.8f64;
        // R diag(1,2,3) R^T with R a rotation in the (0,1) plane
        let m = [
            [c * c + 2.0 * s * s, c * s - 2.0 * s * c, 0.0],
            [c * s - 2.0 * s * c, s * s + 2.0 * c * c, 0.0],
            [0.0, 0.0, 3.0],
        ];
        let ev = symmetric_eigenvalues_3x3(&m);
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!((ev[1] - 2.0).abs() < 1e-12);
        assert!((ev[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn full_suite_passes() {
        for c in run_suite(Mutation::None) {
            assert!(
                c.passed,
                "{}: observed {} vs tolerance {}",
                c.name, c.observed, c.tolerance
            );
        }
    }

    #[test]
    fn mutation_is_caught() {
        let r = check_eigen_oracle(Mutation::EigenvalueFormula);
        assert!(!r.passed);
    }
}
