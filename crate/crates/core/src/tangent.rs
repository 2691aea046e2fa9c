//! The equivariant profile ODE on [0, π]: closed-form solution classes,
//! residual and first-integral checks, profile energies, the radial Hessian
//! quadratic form, and the limiting director formulas at defects.

use crate::fields::{Vec3, SQRT3};
use thiserror::Error;

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum TangentError {
    #[error("beta = {0} outside (0, pi)")]
    BadBeta(f64),
    #[error("angle {0} outside the admissible range")]
    BadAngle(f64),
    #[error("need at least {1} samples (got {0})")]
    TooFewSamples(usize, usize),
    #[error("radial function must vanish at r = 1 (got {0})")]
    NonzeroAtOne(f64),
    #[error("quadrature needs an odd sample count (got {0})")]
    EvenSampleCount(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicClass {
    I,
    II,
    III,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignVariant {
    Plus,
    Minus,
}

#[derive(Debug, Clone)]
pub struct TangentProfile {
    pub class: HarmonicClass,
    pub beta: Option<f64>,
    pub variant: SignVariant,
    pub phi: Vec<f64>,
    pub v: Vec<Vec3>,
}

/// J(φ) = arccos(2cosφ / (1 + cos²φ)), the reparametrization of Class III.
pub fn j_map(phi: f64) -> f64 {
    // equivalent to arccos(2cos(phi)/(1+cos^2(phi))) via tan(J/2) = tan^2(phi/2),
    // but stays fully accurate where arccos loses half its digits near the poles
    let s = (0.5 * phi).sin();
    let c = (0.5 * phi).cos();
    2.0 * (s * s).atan2(c * c)
}

fn grid(samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|k| PI * k as f64 / (samples - 1) as f64)
        .collect()
}

/// Closed-form solution classes of the profile ODE. Class I is the constant
/// (0, ±1, 0); Class II rotates in the (v₂, v₃) components; Class III in
/// (v₁, v₂) through J(φ). The sign variant picks the ± choice.
pub fn profile(
    class: HarmonicClass,
    beta: f64,
    variant: SignVariant,
    samples: usize,
) -> Result<TangentProfile, TangentError> {
    if samples < 1000 {
        return Err(TangentError::TooFewSamples(samples, 1000));
    }
    if matches!(class, HarmonicClass::II | HarmonicClass::III) && !(beta > 0.0 && beta < PI) {
        return Err(TangentError::BadBeta(beta));
    }
    let s = match variant {
        SignVariant::Plus => 1.0,
        SignVariant::Minus => -1.0,
    };
    let phi = grid(samples);
    let v: Vec<Vec3> = phi
        .iter()
        .map(|&p| match class {
            HarmonicClass::I => [0.0, s, 0.0],
            HarmonicClass::II => {
                let (cb, sb) = (beta.cos(), beta.sin());
                let den = 1.0 + s * cb * p.cos();
                [0.0, (cb + s * p.cos()) / den, sb * p.sin() / den]
            }
            HarmonicClass::III => {
                let (cb, sb) = (beta.cos(), beta.sin());
                let jj = j_map(p);
                let den = 1.0 + s * cb * jj.cos();
                [sb * jj.sin() / den, (cb + s * jj.cos()) / den, 0.0]
            }
            HarmonicClass::Numeric => unreachable!("closed forms only"),
        })
        .collect();
    Ok(TangentProfile {
        class,
        beta: matches!(class, HarmonicClass::II | HarmonicClass::III).then_some(beta),
        variant,
        phi,
        v,
    })
}

/// The β = π/2 Class II pair: v = (0, ±cosφ, sinφ), whose augmented maps are
/// the two tangent maps carried by axis singularities.
pub fn lambda_pm(variant: SignVariant, samples: usize) -> TangentProfile {
    let s = match variant {
        SignVariant::Plus => 1.0,
        SignVariant::Minus => -1.0,
    };
    let phi = grid(samples.max(2));
    let v = phi.iter().map(|&p| [0.0, s * p.cos(), p.sin()]).collect();
    TangentProfile {
        class: HarmonicClass::II,
        beta: Some(PI / 2.0),
        variant,
        phi,
        v,
    }
}

/// 4th-order central first derivative of the sample sequence; second-order
/// one-sided near the ends.
fn derivative(phi: &[f64], v: &[Vec3]) -> Vec<Vec3> {
    let n = v.len();
    let h = phi[1] - phi[0];
    let mut d = vec![[0.0f64; 3]; n];
    for k in 0..3 {
        d[0][k] = (-3.0 * v[0][k] + 4.0 * v[1][k] - v[2][k]) / (2.0 * h);
        d[1][k] = (v[2][k] - v[0][k]) / (2.0 * h);
        d[n - 2][k] = (v[n - 1][k] - v[n - 3][k]) / (2.0 * h);
        d[n - 1][k] = (3.0 * v[n - 1][k] - 4.0 * v[n - 2][k] + v[n - 3][k]) / (2.0 * h);
        for i in 2..n - 2 {
            d[i][k] =
                (-v[i + 2][k] + 8.0 * v[i + 1][k] - 8.0 * v[i - 1][k] + v[i - 2][k]) / (12.0 * h);
        }
    }
    d
}

/// Max componentwise residual of the profile ODE
/// −(sinφ·v′)′ + (1/sinφ)(4v₁, 0, v₃) = {|v′|²sinφ + (4v₁²+v₃²)/sinφ}·v
/// over interior samples, excluding 10⁻³ neighborhoods of the endpoints
/// where the stencil degenerates.
pub fn ode_residual(p: &TangentProfile) -> f64 {
    let n = p.v.len();
    let h = p.phi[1] - p.phi[0];
    let d1 = derivative(&p.phi, &p.v);
    let mut max = 0.0f64;
    for i in 2..n - 2 {
        let phi = p.phi[i];
        if phi < 1e-3 || PI - phi < 1e-3 {
            continue;
        }
        let v = &p.v[i];
        let dv = &d1[i];
        let (sp, cp) = (phi.sin(), phi.cos());
        let mut d2 = [0.0f64; 3];
        for k in 0..3 {
            d2[k] = (-p.v[i + 2][k] + 16.0 * p.v[i + 1][k] - 30.0 * v[k] + 16.0 * p.v[i - 1][k]
                - p.v[i - 2][k])
                / (12.0 * h * h);
        }
        let speed2 = dv.iter().map(|x| x * x).sum::<f64>();
        let lam = speed2 * sp + (4.0 * v[0] * v[0] + v[2] * v[2]) / sp;
        let w = [4.0 * v[0], 0.0, v[2]];
        for k in 0..3 {
            let r = -(cp * dv[k] + sp * d2[k]) + w[k] / sp - lam * v[k];
            max = max.max(r.abs());
        }
    }
    max
}

/// Max deviation of the first integral |v′|²sin²φ = 4v₁² + v₃².
pub fn first_integral_deviation(p: &TangentProfile) -> f64 {
    let n = p.v.len();
    let d1 = derivative(&p.phi, &p.v);
    let mut max = 0.0f64;
    for i in 2..n - 2 {
        let phi = p.phi[i];
        if phi < 1e-3 || PI - phi < 1e-3 {
            continue;
        }
        let v = &p.v[i];
        let speed2 = d1[i].iter().map(|x| x * x).sum::<f64>();
        let lhs = speed2 * phi.sin() * phi.sin();
        let rhs = 4.0 * v[0] * v[0] + v[2] * v[2];
        max = max.max((lhs - rhs).abs());
    }
    max
}

fn simpson(values: &[f64], h: f64) -> f64 {
    debug_assert!(values.len() % 2 == 1);
    let mut sum = values[0] + values[values.len() - 1];
    for (i, v) in values.iter().enumerate().skip(1).take(values.len() - 2) {
        sum += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    sum * h / 3.0
}

/// (E₂, 2π·E₂): the 1-D profile energy and the Dirichlet energy of its
/// 0-homogeneous augmentation on the unit ball. The density vanishes at the
/// endpoints for admissible profiles and is set to 0 there.
pub fn profile_energy(p: &TangentProfile) -> (f64, f64) {
    let n = p.v.len();
    let h = p.phi[1] - p.phi[0];
    let d1 = derivative(&p.phi, &p.v);
    let mut density = vec![0.0f64; n];
    for i in 1..n - 1 {
        let phi = p.phi[i];
        let v = &p.v[i];
        let speed2 = d1[i].iter().map(|x| x * x).sum::<f64>();
        density[i] = speed2 * phi.sin() + (4.0 * v[0] * v[0] + v[2] * v[2]) / phi.sin();
    }
    let e2 = if n % 2 == 1 {
        simpson(&density, h)
    } else {
        // trapezoid fallback for even sample counts
        density.iter().sum::<f64>() * h - 0.5 * (density[0] + density[n - 1]) * h
    };
    (e2, 2.0 * PI * e2)
}

/// Second variation of the full energy at the hedgehog along the radial
/// perturbation family indexed by f (f(1) = 0):
/// (32π/5)[∫(f′)²r² − 3∫f²] + (72√2/5)πμ∫f²r², all integrals over [0, 1].
pub fn hessian_radial(f: &[f64], mu: f64) -> Result<f64, TangentError> {
    let n = f.len();
    if n < 3 {
        return Err(TangentError::TooFewSamples(n, 3));
    }
    if n % 2 == 0 {
        return Err(TangentError::EvenSampleCount(n));
    }
    if f[n - 1].abs() > 1e-12 {
        return Err(TangentError::NonzeroAtOne(f[n - 1]));
    }
    let h = 1.0 / (n - 1) as f64;
    let mut df = vec![0.0f64; n];
    df[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    df[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        df[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    let r = |i: usize| i as f64 * h;
    let a: Vec<f64> = (0..n).map(|i| df[i] * df[i] * r(i) * r(i)).collect();
    let b: Vec<f64> = f.iter().map(|x| x * x).collect();
    let c: Vec<f64> = (0..n).map(|i| b[i] * r(i) * r(i)).collect();
    let (ia, ib, ic) = (simpson(&a, h), simpson(&b, h), simpson(&c, h));
    Ok(32.0 * PI / 5.0 * (ia - 3.0 * ib) + 72.0 * std::f64::consts::SQRT_2 / 5.0 * PI * mu * ic)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaFormula {
    /// Director around the equatorial ring; the parameter is the non-negative
    /// slope constant ϰ of the branch-cut expansion. Angle range [−π, π].
    Ring(f64),
    /// Director at the upper endpoint of the split segment. Angle range [0, π].
    SplitPlus,
    /// Director at the lower endpoint. Angle range [0, π].
    SplitMinus,
}

/// Closed-form limiting directors at the defect set, as (e_ρ, e_z)
/// coefficients. Endpoint values are exact.
pub fn kappa_tangent_formulas(phi: f64, which: KappaFormula) -> Result<[f64; 2], TangentError> {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    match which {
        KappaFormula::Ring(vk) => {
            if !(-PI..=PI).contains(&phi) {
                return Err(TangentError::BadAngle(phi));
            }
            if phi == -PI {
                return Ok([0.0, -1.0]);
            }
            if phi == PI {
                return Ok([0.0, 1.0]);
            }
            if phi == 0.0 {
                return Ok([1.0, 0.0]);
            }
            // upper half-plane takes the plus signs, lower the minus signs
            let t = vk * (phi.cos() / phi.sin());
            let root = (4.0 + t * t).sqrt();
            let sign = phi.signum();
            let b = 1.0 + sign * t / root;
            let kr = half * b.sqrt();
            let kz = sign * (2.0 / (4.0 + t * t)).sqrt() / b.sqrt();
            Ok([kr, kz])
        }
        KappaFormula::SplitPlus => {
            if !(0.0..=PI).contains(&phi) {
                return Err(TangentError::BadAngle(phi));
            }
            if phi == 0.0 {
                return Ok([0.0, 1.0]);
            }
            let root = (3.0 + phi.sin().powi(2)).sqrt();
            let b = 1.0 - SQRT3 * phi.cos() / root;
            let kr = half * b.sqrt();
            let kz = (2.0 * phi.sin().powi(2) / (3.0 + phi.sin().powi(2))).sqrt() / b.sqrt();
            Ok([kr, kz])
        }
        KappaFormula::SplitMinus => {
            if !(0.0..=PI).contains(&phi) {
                return Err(TangentError::BadAngle(phi));
            }
            if phi == PI {
                return Ok([0.0, -1.0]);
            }
            let root = (3.0 + phi.sin().powi(2)).sqrt();
            let b = 1.0 + SQRT3 * phi.cos() / root;
            let kr = half * b.sqrt();
            let kz = -(2.0 * phi.sin().powi(2) / (3.0 + phi.sin().powi(2))).sqrt() / b.sqrt();
            Ok([kr, kz])
        }
    }
}

/// RK4 integration of the profile ODE as a first-order system in (v, v′),
/// used to cross-check the closed forms by endpoint matching.
pub fn ode_flow(
    v0: Vec3,
    dv0: Vec3,
    phi0: f64,
    phi1: f64,
    steps: usize,
) -> (Vec3, Vec3) {
    let h = (phi1 - phi0) / steps as f64;
    let rhs = |phi: f64, v: &Vec3, dv: &Vec3| -> Vec3 {
        let (sp, cp) = (phi.sin(), phi.cos());
        let speed2 = dv.iter().map(|x| x * x).sum::<f64>();
        let lam = speed2 + (4.0 * v[0] * v[0] + v[2] * v[2]) / (sp * sp);
        let w = [4.0 * v[0], 0.0, v[2]];
        std::array::from_fn(|k| (-cp * dv[k] + w[k] / sp - lam * sp * v[k]) / sp)
    };
    let mut v = v0;
    let mut dv = dv0;
    let mut phi = phi0;
    for _ in 0..steps {
        let k1v = dv;
        let k1a = rhs(phi, &v, &dv);
        let v2: Vec3 = std::array::from_fn(|k| v[k] + 0.5 * h * k1v[k]);
        let a2: Vec3 = std::array::from_fn(|k| dv[k] + 0.5 * h * k1a[k]);
        let k2v = a2;
        let k2a = rhs(phi + 0.5 * h, &v2, &a2);
        let v3: Vec3 = std::array::from_fn(|k| v[k] + 0.5 * h * k2v[k]);
        let a3: Vec3 = std::array::from_fn(|k| dv[k] + 0.5 * h * k2a[k]);
        let k3v = a3;
        let k3a = rhs(phi + 0.5 * h, &v3, &a3);
        let v4: Vec3 = std::array::from_fn(|k| v[k] + h * k3v[k]);
        let a4: Vec3 = std::array::from_fn(|k| dv[k] + h * k3a[k]);
        let k4v = a4;
        let k4a = rhs(phi + h, &v4, &a4);
        for k in 0..3 {
            v[k] += h / 6.0 * (k1v[k] + 2.0 * k2v[k] + 2.0 * k3v[k] + k4v[k]);
            dv[k] += h / 6.0 * (k1a[k] + 2.0 * k2a[k] + 2.0 * k3a[k] + k4a[k]);
        }
        phi += h;
    }
    (v, dv)
}

/// CSV dump of a profile: phi,v1,v2,v3 per line.
pub fn profile_to_csv(p: &TangentProfile) -> String {
    let mut out = String::from("phi,v1,v2,v3\n");
    for (phi, v) in p.phi.iter().zip(p.v.iter()) {
        out.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e}\n", phi, v[0], v[1], v[2]));
    }
    out
}
