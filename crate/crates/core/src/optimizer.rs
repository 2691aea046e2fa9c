//! Projected-gradient minimization over unit fields with hedgehog boundary
//! data and a one-sided obstacle on the equatorial disk.
//!
//! The tangential gradient vanishes identically at axis nodes (u there is a
//! pole of the sphere), so gradient steps alone can never change the axis
//! signs. An explicit per-node sign-flip move, accepted only when it lowers
//! the energy of the two adjacent cells, supplies that degree of
//! of freedom while keeping the energy trace monotone.

use crate::energy::{energy, energy_gradient, EnergyReport};
use crate::fields::{dot3, hedgehog_u_star, norm3, Field3, Vec3};
use crate::mesh::{Mesh, NodeClass};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("bound {0} outside the admissible interval for this branch")]
    InvalidBound(f64),
    #[error("seed amplitude must satisfy |sigma| < 1 (got {0})")]
    BadSeedAmplitude(f64),
    #[error("energy became non-finite at iteration {0}")]
    NonFiniteEnergy(usize),
    #[error("sweep values must be non-empty and monotone")]
    BadSweepValues,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
    None,
}

/// One-sided constraint on u₂ over the equatorial disk: u₂ ≥ bound (Plus,
/// bound ∈ (−1, −1/2]) or u₂ ≤ bound (Minus, bound ∈ [−1/2, 1)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub branch: Branch,
    pub bound: f64,
}

impl ObstacleSpec {
    pub fn new(branch: Branch, bound: f64) -> Result<Self, OptimError> {
        let ok = match branch {
            Branch::Plus => bound > -1.0 && bound <= -0.5,
            Branch::Minus => bound >= -0.5 && bound < 1.0,
            Branch::None => true,
        };
        if ok {
            Ok(ObstacleSpec { branch, bound })
        } else {
            Err(OptimError::InvalidBound(bound))
        }
    }

    pub fn unconstrained() -> Self {
        ObstacleSpec {
            branch: Branch::None,
            bound: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Sup-norm threshold on the projected (tangential) gradient.
    pub grad_tol: f64,
    pub armijo_c1: f64,
    pub armijo_shrink: f64,
    pub initial_step: f64,
    /// Enforce u₁, u₃ ≥ 0 after each step.
    pub sector_projection: bool,
    pub seed_amplitude: f64,
}

impl SolverConfig {
    pub fn for_grid(n: usize) -> Self {
        SolverConfig {
            max_iters: 200_000,
            grad_tol: 1e-5 * n as f64,
            armijo_c1: 1e-4,
            armijo_shrink: 0.5,
            initial_step: 1.0,
            sector_projection: true,
            seed_amplitude: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    LineSearchStalled,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub field: Field3,
    pub report: EnergyReport,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// Seed field: normalize(U* + σ·Π_tan(0, g, 0)) with g(r) = max(1 − λr, 0),
/// λ = ceil(0.8√μ). Choose σ > 0 for the Plus branch and σ < 0 for Minus.
/// Arc and outside nodes keep the exact hedgehog values.
pub fn initial_guess(
    mesh: Arc<Mesh>,
    sigma: f64,
    mu: f64,
) -> Result<Field3, OptimError> {
    if sigma.abs() >= 1.0 {
        return Err(OptimError::BadSeedAmplitude(sigma));
    }
    let lambda = (0.8 * mu.max(0.0).sqrt()).ceil().max(1.0);
    let mut u = Field3::from_fn(mesh, |rho, z| {
        let us = hedgehog_u_star(rho, z);
        let r = (rho * rho + z * z).sqrt();
        let g = (1.0 - lambda * r).max(0.0);
        // Π_tan(0, g, 0) at U* = (0,g,0) − g·U*₂·U*
        let c = g * us[1];
        let v = [
            us[0] - sigma * c * us[0],
            us[1] + sigma * (g - c * us[1]),
            us[2] - sigma * c * us[2],
        ];
        let n = norm3(&v);
        [v[0] / n, v[1] / n, v[2] / n]
    });
    let n = u.mesh.n;
    for j in 0..=n {
        for i in 0..=n {
            if u.mesh.is_fixed(i, j) {
                *u.at_mut(i, j) = hedgehog_u_star(u.mesh.rho(i), u.mesh.z(j));
            }
        }
    }
    Ok(u)
}

/// Feasibility projection. Equator: u₃ := 0, clamp u₂ into the obstacle
/// interval, u₁ := nonnegative root. Axis: u₁ = u₃ := 0, u₂ := ±1 by sign
/// (+1 on ties). Optional sector map (u₁,u₃) → (|u₁|,|u₃|). All free nodes
/// renormalized.
pub fn project_constraints(u: &Field3, obs: &ObstacleSpec, sector: bool) -> Field3 {
    let mut out = u.clone();
    project_in_place(&mut out, obs, sector);
    out
}

pub(crate) fn project_in_place(u: &mut Field3, obs: &ObstacleSpec, sector: bool) {
    let mesh = Arc::clone(&u.mesh);
    let n = mesh.n;
    let (lo, hi) = match obs.branch {
        Branch::Plus => (obs.bound, 1.0),
        Branch::Minus => (-1.0, obs.bound),
        Branch::None => (-1.0, 1.0),
    };
    for j in 0..=n {
        for i in 0..=n {
            let class = mesh.class(i, j);
            let v = u.at_mut(i, j);
            match class {
                NodeClass::Arc | NodeClass::Outside => {}
                NodeClass::Axis => {
                    v[0] = 0.0;
                    v[2] = 0.0;
                    v[1] = if v[1] < 0.0 { -1.0 } else { 1.0 };
                }
                NodeClass::Equator => {
                    v[2] = 0.0;
                    v[1] = v[1].clamp(lo, hi);
                    v[0] = (1.0 - v[1] * v[1]).max(0.0).sqrt();
                }
                NodeClass::Interior => {
                    if sector {
                        v[0] = v[0].abs();
                        v[2] = v[2].abs();
                    }
                    let nn = norm3(v);
                    if nn > 0.0 {
                        for k in 0..3 {
                            v[k] /= nn;
                        }
                    } else {
                        *v = [0.0, 1.0, 0.0];
                    }
                }
            }
        }
    }
}

/// Energy (up to the global 4π factor) of the cells in column i = 0 touching
/// axis node (0, j); used by the sign-flip move.
fn axis_column_energy(u: &Field3, mu: f64, j: usize) -> f64 {
    let mesh = &u.mesh;
    let h = mesh.h;
    let mut sum = 0.0;
    let jlo = j.saturating_sub(1);
    let jhi = (j + 1).min(mesh.n);
    for jj in jlo..jhi {
        let w = mesh.cell_weight(0, jj);
        if w == 0.0 {
            continue;
        }
        let rho_c = 0.5 * h;
        let d = crate::energy::cell_densities(u, 0, jj, h, rho_c);
        sum += w * (d.grad2 + d.singular + std::f64::consts::SQRT_2 * mu * d.one_minus_3p);
    }
    sum
}

/// Tries flipping the sign of u₂ at each non-fixed axis node, keeping flips
/// that strictly lower the energy. Returns whether anything changed.
fn axis_flip_pass(u: &mut Field3, mu: f64) -> bool {
    let mesh = Arc::clone(&u.mesh);
    let n = mesh.n;
    let mut changed = false;
    for j in 0..=n {
        if mesh.class(0, j) != NodeClass::Axis || mesh.is_fixed(0, j) {
            continue;
        }
        let before = axis_column_energy(u, mu, j);
        let old = u.at(0, j)[1];
        u.at_mut(0, j)[1] = -old;
        let after = axis_column_energy(u, mu, j);
        if after < before - 1e-14 {
            changed = true;
        } else {
            u.at_mut(0, j)[1] = old;
        }
    }
    changed
}

/// Step direction: tangential gradient at free nodes, with the raw u₂
/// derivative retained at axis nodes so large steps can push the sign
/// through zero. Returns (direction, sup-norm of the tangential gradient).
fn step_direction(u: &Field3, grad: &[Vec3]) -> (Vec<Vec3>, f64) {
    let mesh = &u.mesh;
    let n = mesh.n;
    let mut dir = vec![[0.0f64; 3]; grad.len()];
    let mut sup = 0.0f64;
    for j in 0..=n {
        for i in 0..=n {
            let idx = mesh.node_index(i, j);
            match mesh.class(i, j) {
                NodeClass::Arc | NodeClass::Outside => {}
                NodeClass::Axis => {
                    // tangential part is identically zero at a pole, and the
                    // feasibility projection snaps u2 back to +/-1, so any
                    // nominal step here only distorts the Armijo prediction;
                    // sign changes at the axis come from the flip pass
                }
                _ => {
                    let uv = u.at(i, j);
                    let g = &grad[idx];
                    let c = dot3(g, uv);
                    for k in 0..3 {
                        dir[idx][k] = g[k] - c * uv[k];
                        sup = sup.max(dir[idx][k].abs());
                    }
                }
            }
        }
    }
    (dir, sup)
}

fn apply_step(u: &Field3, dir: &[Vec3], tau: f64, obs: &ObstacleSpec, sector: bool) -> Field3 {
    let mesh = Arc::clone(&u.mesh);
    let n = mesh.n;
    let mut out = u.clone();
    for j in 0..=n {
        for i in 0..=n {
            if mesh.is_fixed(i, j) {
                continue;
            }
            let idx = mesh.node_index(i, j);
            let v = out.at_mut(i, j);
            for k in 0..3 {
                v[k] -= tau * dir[idx][k];
            }
            let nn = norm3(v);
            if nn > 0.0 {
                for k in 0..3 {
                    v[k] /= nn;
                }
            }
        }
    }
    project_in_place(&mut out, obs, sector);
    out
}

pub fn minimize(
    u0: &Field3,
    mu: f64,
    obs: &ObstacleSpec,
    cfg: &SolverConfig,
) -> Result<MinimizeResult, OptimError> {
    let mut u = project_constraints(u0, obs, cfg.sector_projection);
    let mut e = energy(&u, mu);
    if !e.total.is_finite() {
        return Err(OptimError::NonFiniteEnergy(0));
    }
    let mut trace = vec![e.total];
    let mut status = SolveStatus::IterationLimit;
    let mut tau = cfg.initial_step;
    let mut prev: Option<(Vec<Vec3>, Vec<Vec3>)> = None; // (values, direction)
    let mut iterations = 0usize;

    for iter in 0..cfg.max_iters {
        let grad = energy_gradient(&u, mu);
        let (dir, _) = step_direction(&u, &grad);
        // stationarity of the constrained problem: u is a fixed point of the
        // projected step; the raw tangential gradient need not vanish where
        // the obstacle is active
        let probe = apply_step(&u, &dir, 1.0, obs, cfg.sector_projection);
        let dsup = u
            .values
            .iter()
            .zip(&probe.values)
            .flat_map(|(a, b)| (0..3).map(move |k| (a[k] - b[k]).abs()))
            .fold(0.0f64, f64::max);
        if dsup < cfg.grad_tol {
            status = SolveStatus::Converged;
            break;
        }
        // Barzilai-Borwein guess for the initial trial step
        if let Some((pu, pd)) = &prev {
            let (mut ss, mut sy) = (0.0f64, 0.0f64);
            for idx in 0..dir.len() {
                for k in 0..3 {
                    let s = u.values[idx][k] - pu[idx][k];
                    let y = dir[idx][k] - pd[idx][k];
                    ss += s * s;
                    sy += s * y;
                }
            }
            if sy > 1e-300 {
                tau = (ss / sy).clamp(1e-8, 1e4);
            } else {
                tau = (tau * 2.0).min(1e4);
            }
        }
        let mut t = tau;
        let mut accepted = None;
        while t >= 1e-14 {
            let trial = apply_step(&u, &dir, t, obs, cfg.sector_projection);
            let et = energy(&trial, mu);
            if !et.total.is_finite() {
                return Err(OptimError::NonFiniteEnergy(iter));
            }
            // sufficient decrease against the realized displacement, so that
            // components erased by the projection are not counted as promise
            let disp2: f64 = u
                .values
                .iter()
                .zip(&trial.values)
                .map(|(a, b)| {
                    (0..3).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum::<f64>()
                })
                .sum();
            if et.total <= e.total - cfg.armijo_c1 * disp2 / t {
                accepted = Some((trial, et));
                break;
            }
            t *= cfg.armijo_shrink;
        }
        iterations = iter + 1;
        match accepted {
            Some((trial, et)) => {
                prev = Some((u.values.clone(), dir));
                u = trial;
                e = et;
            }
            None => {
                status = SolveStatus::LineSearchStalled;
                break;
            }
        }
        if axis_flip_pass(&mut u, mu) {
            e = energy(&u, mu);
            prev = None;
        }
        trace.push(e.total);
        debug_assert!(
            trace[trace.len() - 2] + 1e-9 >= e.total,
            "energy trace must be non-increasing"
        );
    }

    Ok(MinimizeResult {
        report: e,
        field: u,
        trace,
        iterations,
        status,
    })
}

/// Transfers a field to a finer mesh by bilinear interpolation and
/// renormalization; Dirichlet nodes take the exact hedgehog data.
pub fn prolong(coarse: &Field3, fine: Arc<Mesh>) -> Field3 {
    let mesh = Arc::clone(&fine);
    Field3::from_fn(fine, |rho, z| {
        let idx_fixed = rho * rho + z * z >= (1.0 - mesh.h) * (1.0 - mesh.h) - 1e-12;
        if idx_fixed {
            hedgehog_u_star(rho, z)
        } else {
            let v = coarse.sample(rho, z);
            let n = norm3(&v);
            if n > 0.0 {
                [v[0] / n, v[1] / n, v[2] / n]
            } else {
                [0.0, 1.0, 0.0]
            }
        }
    })
}

/// Coarse-to-fine continuation solve for one branch: starts from the seeded
/// hedgehog on an n = 32 grid and doubles up to the requested resolution.
pub fn solve_branch(
    n: usize,
    mu: f64,
    obs: &ObstacleSpec,
    cfg: &SolverConfig,
) -> Result<MinimizeResult, OptimError> {
    let sigma = match obs.branch {
        Branch::Minus => -cfg.seed_amplitude.abs(),
        _ => cfg.seed_amplitude.abs(),
    };
    let mut levels = vec![n];
    let mut m = n;
    while m > 32 && m % 2 == 0 {
        m /= 2;
        levels.push(m);
    }
    levels.reverse();
    let mesh0 = Arc::new(crate::mesh::build_mesh(levels[0]).unwrap());
    let mut field = initial_guess(mesh0, sigma, mu)?;
    let mut result = None;
    for &lvl in &levels {
        if field.mesh.n != lvl {
            let fine = Arc::new(crate::mesh::build_mesh(lvl).unwrap());
            field = prolong(&field, fine);
        }
        let mut level_cfg = *cfg;
        level_cfg.grad_tol = cfg.grad_tol * lvl as f64 / n as f64;
        let r = minimize(&field, mu, obs, &level_cfg)?;
        field = r.field.clone();
        result = Some(r);
    }
    Ok(result.unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    LowerBound,
    UpperBound,
    Mu,
}

#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub value: f64,
    pub report: EnergyReport,
    pub defects: crate::analysis::DefectReport,
    pub status: SolveStatus,
    pub field: Field3,
}

/// Warm-started continuation over a monotone list of parameter values.
pub fn sweep(
    mesh: Arc<Mesh>,
    param: SweepParameter,
    values: &[f64],
    base_mu: f64,
    base_obs: &ObstacleSpec,
    cfg: &SolverConfig,
) -> Result<Vec<SweepRecord>, OptimError> {
    if values.is_empty() {
        return Err(OptimError::BadSweepValues);
    }
    let monotone = values.windows(2).all(|w| w[1] >= w[0])
        || values.windows(2).all(|w| w[1] <= w[0]);
    if !monotone {
        return Err(OptimError::BadSweepValues);
    }
    let mut records = Vec::new();
    let mut warm: Option<Field3> = None;
    for &v in values {
        let (mu, obs) = match param {
            SweepParameter::LowerBound => (base_mu, ObstacleSpec::new(Branch::Plus, v)?),
            SweepParameter::UpperBound => (base_mu, ObstacleSpec::new(Branch::Minus, v)?),
            SweepParameter::Mu => (v, *base_obs),
        };
        let start = match &warm {
            Some(f) => project_constraints(f, &obs, cfg.sector_projection),
            None => {
                let sigma = match obs.branch {
                    Branch::Minus => -cfg.seed_amplitude.abs(),
                    _ => cfg.seed_amplitude.abs(),
                };
                initial_guess(Arc::clone(&mesh), sigma, mu)?
            }
        };
        let r = minimize(&start, mu, &obs, cfg)?;
        warm = Some(r.field.clone());
        let defects = crate::analysis::analyze_field(&r.field, obs.branch);
        records.push(SweepRecord {
            value: v,
            report: r.report,
            defects,
            status: r.status,
            field: r.field,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy;
    use crate::fields::hedgehog_u_star;
    use crate::mesh::build_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mesh(n: usize) -> Arc<Mesh> {
        Arc::new(build_mesh(n).unwrap())
    }

    #[test]
    fn obstacle_bounds_validated() {
        assert!(ObstacleSpec::new(Branch::Plus, -0.5).is_ok());
        assert!(ObstacleSpec::new(Branch::Plus, -0.4).is_err());
        assert!(ObstacleSpec::new(Branch::Plus, -1.0).is_err());
        assert!(ObstacleSpec::new(Branch::Minus, 0.5).is_ok());
        assert!(ObstacleSpec::new(Branch::Minus, 1.0).is_err());
        assert!(ObstacleSpec::new(Branch::Minus, -0.6).is_err());
    }

    #[test]
    fn zero_sigma_seed_is_hedgehog() {
        let m = mesh(16);
        let u = initial_guess(Arc::clone(&m), 0.0, 10.0).unwrap();
        for j in 0..=16 {
            for i in 0..=16 {
                let exact = hedgehog_u_star(m.rho(i), m.z(j));
                let got = u.at(i, j);
                for k in 0..3 {
                    assert!((got[k] - exact[k]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn positive_sigma_raises_u2_inside_bump() {
        let m = mesh(32);
        let mu = 10.0f64;
        let lambda = (0.8 * mu.sqrt()).ceil();
        let u = initial_guess(Arc::clone(&m), 0.2, mu).unwrap();
        for j in 0..=32 {
            for i in 0..=32 {
                let (rho, z) = (m.rho(i), m.z(j));
                if m.is_fixed(i, j) {
                    continue;
                }
                let r = (rho * rho + z * z).sqrt();
                if 1.0 - lambda * r > 0.0 {
                    assert!(u.at(i, j)[1] >= hedgehog_u_star(rho, z)[1] - 1e-12);
                }
                assert!((crate::fields::norm3(u.at(i, j)) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn seed_amplitude_validated() {
        assert!(initial_guess(mesh(16), 1.0, 10.0).is_err());
    }

    #[test]
    fn equator_projection_clamps_and_resets() {
        let m = mesh(16);
        let obs = ObstacleSpec::new(Branch::Plus, -0.5).unwrap();
        let mut u = Field3::hedgehog(Arc::clone(&m));
        let v = crate::fields::normalize3(&[0.6, -0.9, 0.1]);
        *u.at_mut(4, 0) = v;
        let p = project_constraints(&u, &obs, true);
        let w = p.at(4, 0);
        assert!((w[1] + 0.5).abs() < 1e-15);
        assert_eq!(w[2], 0.0);
        assert!((w[0] - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn projection_idempotent_on_feasible_field() {
        let m = mesh(24);
        let obs = ObstacleSpec::new(Branch::Plus, -0.5).unwrap();
        let u = Field3::hedgehog(m);
        let p = project_constraints(&u, &obs, true);
        for (a, b) in u.values.iter().zip(p.values.iter()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-15);
            }
        }
        p.check_invariants(1e-12).unwrap();
    }

    #[test]
    fn sector_projection_does_not_raise_energy() {
        // smooth sign-coherent perturbations of the hedgehog
        let m = mesh(24);
        let mu = 10.0;
        let obs = ObstacleSpec::unconstrained();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-0.15..0.15));
            let base = Field3::from_fn(Arc::clone(&m), |rho, z| {
                let mut v = hedgehog_u_star(rho, z);
                let bump = (std::f64::consts::PI * rho).sin() * (std::f64::consts::PI * z).sin();
                v[0] += bump * (a[0] + a[1] * rho + a[2] * z);
                v[2] += bump * (a[3] + a[4] * rho + a[5] * z);
                crate::fields::normalize3(&v)
            });
            let plain = project_constraints(&base, &obs, false);
            let sect = project_constraints(&base, &obs, true);
            let e0 = energy(&plain, mu).total;
            let e1 = energy(&sect, mu).total;
            assert!(e1 <= e0 + 1e-10, "sector projection raised energy: {e0} -> {e1}");
        }
    }

    #[test]
    fn minimize_decreases_energy_and_stays_feasible() {
        let m = mesh(32);
        let mu = 10.0;
        let obs = ObstacleSpec::new(Branch::Plus, -0.5).unwrap();
        let mut cfg = SolverConfig::for_grid(32);
        cfg.max_iters = 300;
        let u0 = initial_guess(Arc::clone(&m), 0.2, mu).unwrap();
        let e0 = energy(&project_constraints(&u0, &obs, true), mu).total;
        let r = minimize(&u0, mu, &obs, &cfg).unwrap();
        assert!(r.report.total < e0);
        r.field.check_invariants(1e-12).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn restart_from_minimizer_is_a_fixed_point() {
        let m = mesh(16);
        let mu = 5.0;
        let obs = ObstacleSpec::new(Branch::Plus, -0.5).unwrap();
        let mut cfg = SolverConfig::for_grid(16);
        cfg.max_iters = 50_000;
        let u0 = initial_guess(Arc::clone(&m), 0.2, mu).unwrap();
        let r = minimize(&u0, mu, &obs, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        let r2 = minimize(&r.field, mu, &obs, &cfg).unwrap();
        assert!(r2.iterations <= 1);
        assert!((r2.report.total - r.report.total).abs() < 1e-12);
    }

    #[test]
    fn sweep_rejects_bad_value_lists() {
        let m = mesh(16);
        let cfg = SolverConfig::for_grid(16);
        let obs = ObstacleSpec::unconstrained();
        assert!(sweep(Arc::clone(&m), SweepParameter::Mu, &[], 1.0, &obs, &cfg).is_err());
        assert!(sweep(m, SweepParameter::Mu, &[1.0, 3.0, 2.0], 1.0, &obs, &cfg).is_err());
    }
}
