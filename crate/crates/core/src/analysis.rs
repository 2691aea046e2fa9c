//! Pointwise phase analysis (eigenvalues, biaxiality, director), defect
//! detection on converged fields, and the reduced 2-vector functional.

use crate::fields::{hedgehog_u_star, Field3, Vec3, SQRT3};
use crate::optimizer::Branch;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("director undefined: discriminant vanishes (u1 = sqrt(3) u2, u3 = 0)")]
    DegenerateDirector,
    #[error("analysis loop of radius {0} around rho = {1} leaves the domain")]
    LoopOutsideDomain(f64, f64),
    #[error("no axis singularity available for dumbbell construction")]
    NoAxisSingularity,
}

/// Closed-form eigenvalues of the reconstructed Q-tensor. λ₂ carries the
/// minus root and λ₃ the plus root, so λ₃ ≥ λ₂ always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenTriple {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub delta: f64,
}

pub fn eigenvalues(u: &Vec3) -> EigenTriple {
    let t = u[0] + u[1] / SQRT3;
    let s = u[0] - SQRT3 * u[1];
    let delta = s * s + 4.0 * u[2] * u[2];
    let root = delta.sqrt();
    EigenTriple {
        l1: -0.5 * t,
        l2: 0.25 * (t - root),
        l3: 0.25 * (t + root),
        delta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenOrdering {
    /// λ₃ > λ₂ > λ₁ (ring neighborhood pattern)
    L3L2L1,
    /// λ₃ > λ₁ > λ₂ (dumbbell pattern)
    L3L1L2,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Uniaxial,
    Biaxial(EigenOrdering),
}

/// Uniaxial when the smallest pairwise eigenvalue gap is within tol.
pub fn classify_phase(u: &Vec3, tol: f64) -> Phase {
    let e = eigenvalues(u);
    let gaps = [
        (e.l1 - e.l2).abs(),
        (e.l1 - e.l3).abs(),
        (e.l2 - e.l3).abs(),
    ];
    if gaps.iter().any(|g| *g <= tol) {
        return Phase::Uniaxial;
    }
    let ordering = if e.l3 > e.l2 && e.l2 > e.l1 {
        EigenOrdering::L3L2L1
    } else if e.l3 > e.l1 && e.l1 > e.l2 {
        EigenOrdering::L3L1L2
    } else {
        EigenOrdering::Other
    };
    Phase::Biaxial(ordering)
}

/// Unit eigenvector of the largest eigenvalue, as coefficients on (e_ρ, e_z).
/// The u₃ → 0 limit on the branch u₁ − √3u₂ < 0 is ±e_z by the sign of u₃
/// (+e_z at u₃ = 0 exactly).
pub fn director_kappa(u: &Vec3) -> Result<[f64; 2], AnalysisError> {
    let s = u[0] - SQRT3 * u[1];
    let delta = s * s + 4.0 * u[2] * u[2];
    if delta <= 0.0 {
        return Err(AnalysisError::DegenerateDirector);
    }
    let sd = delta.sqrt();
    // 1 + s/sd cancels catastrophically for s < 0; use (sd+s)(sd-s) = 4u3^2
    let one_plus = if s >= 0.0 {
        1.0 + s / sd
    } else {
        4.0 * u[2] * u[2] / (sd * (sd - s))
    };
    if one_plus < 1e-14 {
        return Ok([0.0, if u[2] < 0.0 { -1.0 } else { 1.0 }]);
    }
    let kr = std::f64::consts::FRAC_1_SQRT_2 * one_plus.sqrt();
    let kz = std::f64::consts::SQRT_2 * u[2] / (sd * one_plus.sqrt());
    Ok([kr, kz])
}

/// Angle 2α of the director in the meridian plane: κ = (cos α, sin α) with
/// 2α = atan2(2u₃, u₁ − √3u₂).
#[inline]
fn director_double_angle(u: &Vec3) -> f64 {
    (2.0 * u[2]).atan2(u[0] - SQRT3 * u[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TangentLabel {
    #[serde(rename = "plus")]
    LambdaPlus,
    #[serde(rename = "minus")]
    LambdaMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisCrossing {
    pub z_lo: f64,
    pub z_hi: f64,
    pub label: TangentLabel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisScan {
    pub crossings: Vec<AxisCrossing>,
    /// Number of sign changes on the open upper axis.
    pub parity: usize,
    pub alternating: bool,
    /// Set when |u₂| < 0.5 persists over more than 3 consecutive axis nodes.
    pub resolution_warning: bool,
}

/// Scans the upper axis (z > 0) for sign changes of u₂ between adjacent axis
/// nodes. A change from −1 below to +1 above is labelled Λ⁺, the reverse Λ⁻.
pub fn detect_axis_singularities(u: &Field3) -> AxisScan {
    let mesh = &u.mesh;
    let n = mesh.n;
    let mut crossings = Vec::new();
    let mut resolution_warning = false;
    let mut low_run = 0usize;
    let mut prev: Option<(usize, f64)> = None; // (j, sign)
    for j in 1..=n {
        if mesh.class(0, j) != crate::mesh::NodeClass::Axis {
            continue;
        }
        let v2 = u.at(0, j)[1];
        if v2.abs() < 0.5 {
            low_run += 1;
            if low_run > 3 {
                resolution_warning = true;
            }
            continue;
        }
        low_run = 0;
        let sign = v2.signum();
        if let Some((pj, ps)) = prev {
            if ps != sign {
                crossings.push(AxisCrossing {
                    z_lo: mesh.z(pj),
                    z_hi: mesh.z(j),
                    label: if sign > 0.0 {
                        TangentLabel::LambdaPlus
                    } else {
                        TangentLabel::LambdaMinus
                    },
                });
            }
        }
        prev = Some((j, sign));
    }
    let alternating = crossings
        .windows(2)
        .all(|w| w[0].label != w[1].label);
    AxisScan {
        parity: crossings.len(),
        crossings,
        alternating,
        resolution_warning,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingReport {
    pub rho0: f64,
    /// λ₃ > λ₂ > λ₁ holds on the punctured disk of radius 4h around the ring.
    pub ordering_ok: bool,
    pub ordering_violation_fraction: f64,
    pub winding_half_turns: f64,
}

/// Line-field winding of the director around a circle in the meridian plane.
/// Angle increments are taken mod π so the half-integer index of the line
/// field is well-defined; the return value is total/(2π).
pub fn director_winding(
    u: &Field3,
    center_rho: f64,
    radius: f64,
    samples: usize,
) -> Result<f64, AnalysisError> {
    let h = u.mesh.h;
    let outer = ((center_rho + radius).powi(2)).sqrt();
    if center_rho - radius < 0.0 || outer > 1.0 - 2.0 * h {
        return Err(AnalysisError::LoopOutsideDomain(radius, center_rho));
    }
    let mut total = 0.0;
    let mut prev_alpha = None;
    for k in 0..=samples {
        let t = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let rho = center_rho + radius * t.cos();
        let z = radius * t.sin();
        let v = u.sample(rho, z);
        let alpha = 0.5 * director_double_angle(&v);
        if let Some(p) = prev_alpha {
            let mut d: f64 = alpha - p;
            while d > std::f64::consts::FRAC_PI_2 {
                d -= std::f64::consts::PI;
            }
            while d < -std::f64::consts::FRAC_PI_2 {
                d += std::f64::consts::PI;
            }
            total += d;
        }
        prev_alpha = Some(alpha);
    }
    Ok(total / (2.0 * std::f64::consts::PI))
}

/// Ring detection on the equator: the rightmost downward crossing of u₂
/// through 1/2 (u₂ > 1/2 just left of ρ₀, < 1/2 just right).
pub fn detect_ring(u: &Field3) -> Result<Option<RingReport>, AnalysisError> {
    let mesh = &u.mesh;
    let (n, h) = (mesh.n, mesh.h);
    let mut rho0 = None;
    for i in (1..n).rev() {
        if mesh.is_fixed(i + 1, 0) {
            continue;
        }
        let a = u.at(i, 0)[1];
        let b = u.at(i + 1, 0)[1];
        if a > 0.5 && b < 0.5 {
            let frac = (a - 0.5) / (a - b);
            rho0 = Some(mesh.rho(i) + frac * h);
            break;
        }
    }
    let rho0 = match rho0 {
        Some(r) => r,
        None => return Ok(None),
    };

    // eigenvalue ordering on the punctured 4h disk around (ρ₀, 0)
    let mut checked = 0usize;
    let mut violations = 0usize;
    for j in 0..=n {
        for i in 0..=n {
            let (rho, z) = (mesh.rho(i), mesh.z(j));
            let d2 = (rho - rho0).powi(2) + z * z;
            if d2 > (4.0 * h).powi(2) || d2 < (0.5 * h).powi(2) {
                continue;
            }
            if mesh.class(i, j) == crate::mesh::NodeClass::Outside {
                continue;
            }
            checked += 1;
            if classify_phase(u.at(i, j), 1e-9) != Phase::Biaxial(EigenOrdering::L3L2L1) {
                violations += 1;
            }
        }
    }
    let frac = if checked > 0 {
        violations as f64 / checked as f64
    } else {
        1.0
    };
    let winding = director_winding(u, rho0, 8.0 * h, 256)?;
    Ok(Some(RingReport {
        rho0,
        ordering_ok: frac < 0.05,
        ordering_violation_fraction: frac,
        winding_half_turns: winding,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DumbbellReport {
    /// Midpoint of the lowest axis crossing, the upper endpoint singularity.
    pub z0: f64,
    pub ordering_ok: bool,
    pub ordering_violation_fraction: f64,
    /// The e_z-component of κ along the right contour goes from negative to
    /// positive with a single sign change.
    pub kappa_contour_ok: bool,
}

/// Dumbbell region: disks of radius δ = 6h about (0, ±z₀) joined by the
/// rectangle of half-width √(ε₁(2δ−ε₁)) with ε₁ = 2h. Checks λ₃ > λ₁ > λ₂
/// at region nodes off the axis (ρ > h/2).
pub fn classify_dumbbell(u: &Field3, scan: &AxisScan) -> Result<DumbbellReport, AnalysisError> {
    let mesh = &u.mesh;
    let (n, h) = (mesh.n, mesh.h);
    let lowest = scan
        .crossings
        .first()
        .ok_or(AnalysisError::NoAxisSingularity)?;
    let z0 = 0.5 * (lowest.z_lo + lowest.z_hi);
    let delta = 6.0 * h;
    let eps1 = 2.0 * h;
    let half_width = (eps1 * (2.0 * delta - eps1)).sqrt();
    let z_rect = (z0 - delta + eps1).max(0.0);

    let inside = |rho: f64, z: f64| {
        let za = z.abs();
        rho * rho + (za - z0).powi(2) <= delta * delta || (rho <= half_width && za <= z_rect)
    };

    let mut checked = 0usize;
    let mut violations = 0usize;
    for j in 0..=n {
        for i in 0..=n {
            let (rho, z) = (mesh.rho(i), mesh.z(j));
            if rho <= 0.5 * h || !inside(rho, z) {
                continue;
            }
            if mesh.class(i, j) == crate::mesh::NodeClass::Outside {
                continue;
            }
            checked += 1;
            if classify_phase(u.at(i, j), 1e-9) != Phase::Biaxial(EigenOrdering::L3L1L2) {
                violations += 1;
            }
        }
    }
    let frac = if checked > 0 {
        violations as f64 / checked as f64
    } else {
        1.0
    };

    // right contour, traversed bottom to top
    let mut kz_samples = Vec::new();
    let m = 400;
    for k in 0..=m {
        let z = -(z0 + delta) + 2.0 * (z0 + delta) * k as f64 / m as f64;
        let za = z.abs();
        let rho = if za >= z_rect {
            let d2 = delta * delta - (za - z0).powi(2);
            if d2 <= 0.0 {
                continue;
            }
            d2.sqrt()
        } else {
            half_width
        };
        if rho * rho + z * z >= (1.0 - 2.0 * h).powi(2) {
            continue;
        }
        let v = u.sample(rho, z);
        if let Ok(kappa) = director_kappa(&v) {
            kz_samples.push(kappa[1]);
        }
    }
    let kappa_contour_ok = {
        let strong: Vec<f64> = kz_samples
            .iter()
            .copied()
            .filter(|k| k.abs() > 0.1)
            .collect();
        let changes = strong.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        !strong.is_empty()
            && strong.first().copied().unwrap_or(0.0) < 0.0
            && strong.last().copied().unwrap_or(0.0) > 0.0
            && changes == 1
    };

    Ok(DumbbellReport {
        z0,
        ordering_ok: frac < 0.05,
        ordering_violation_fraction: frac,
        kappa_contour_ok,
    })
}

/// Full-ball L² distance between the augmented field and the augmented
/// hedgehog (the azimuthal integral is carried out analytically).
pub fn l2_distance_to_hedgehog(u: &Field3) -> f64 {
    let mesh = &u.mesh;
    let (n, h) = (mesh.n, mesh.h);
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            let w = mesh.cell_weight(i, j);
            if w == 0.0 {
                continue;
            }
            let mut avg = 0.0;
            for &(a, b) in &[(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                let v = u.at(a, b);
                let r = hedgehog_u_star(mesh.rho(a), mesh.z(b));
                avg += (0..3).map(|k| (v[k] - r[k]).powi(2)).sum::<f64>();
            }
            sum += w * avg / 4.0;
        }
        let _ = h;
    }
    (4.0 * std::f64::consts::PI * sum).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DefectReport {
    pub schema_version: u32,
    pub axis_crossings: Vec<AxisCrossing>,
    pub parity: usize,
    pub alternation_ok: bool,
    pub resolution_warning: bool,
    pub ring_radius: Option<f64>,
    pub winding_half_turns: Option<f64>,
    pub orderings: Orderings,
    pub dumbbell: Option<DumbbellReport>,
    pub l2_distance_to_reference: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Orderings {
    pub ring_ok: Option<bool>,
    pub dumbbell_ok: Option<bool>,
}

pub const DEFECT_SCHEMA_VERSION: u32 = 1;

/// Runs the branch-appropriate detectors and assembles the report.
pub fn analyze_field(u: &Field3, branch: Branch) -> DefectReport {
    let scan = detect_axis_singularities(u);
    let ring = if branch != Branch::Minus {
        detect_ring(u).ok().flatten()
    } else {
        None
    };
    let dumbbell = if branch == Branch::Minus {
        classify_dumbbell(u, &scan).ok()
    } else {
        None
    };
    DefectReport {
        schema_version: DEFECT_SCHEMA_VERSION,
        axis_crossings: scan.crossings.clone(),
        parity: scan.parity,
        alternation_ok: scan.alternating,
        resolution_warning: scan.resolution_warning,
        ring_radius: ring.map(|r| r.rho0),
        winding_half_turns: ring.map(|r| r.winding_half_turns),
        orderings: Orderings {
            ring_ok: ring.map(|r| r.ordering_ok),
            dumbbell_ok: dumbbell.as_ref().map(|d| d.ordering_ok),
        },
        dumbbell,
        l2_distance_to_reference: l2_distance_to_hedgehog(u),
    }
}

/// Lift of the reduced 2-vector to the 3-component field.
pub fn reduced_map_u_from_v(v: &[f64; 2]) -> Vec3 {
    [
        SQRT3 * (1.0 - v[0]) / 4.0,
        (1.0 + 3.0 * v[0]) / 4.0,
        SQRT3 * v[1] / 2.0,
    ]
}

/// 2-vector field on the quarter-disk grid (same node layout as Field3).
#[derive(Debug, Clone)]
pub struct Field2 {
    pub mesh: std::sync::Arc<crate::mesh::Mesh>,
    pub values: Vec<[f64; 2]>,
}

impl Field2 {
    pub fn from_fn(
        mesh: std::sync::Arc<crate::mesh::Mesh>,
        f: impl Fn(f64, f64) -> [f64; 2],
    ) -> Self {
        let n = mesh.n;
        let mut values = Vec::with_capacity(mesh.node_count());
        for j in 0..=n {
            for i in 0..=n {
                values.push(f(mesh.rho(i), mesh.z(j)));
            }
        }
        Field2 { mesh, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &[f64; 2] {
        &self.values[self.mesh.node_index(i, j)]
    }
}

/// Reduced functional, full-ball scaled like the main energy:
/// 4π Σ cells w·(|∇v|² + 2(1−v₁)/ρ_c²), zeroth-order part corner-averaged.
pub fn reduced_energy_f(v: &Field2) -> f64 {
    let mesh = &v.mesh;
    let (n, h) = (mesh.n, mesh.h);
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            let w = mesh.cell_weight(i, j);
            if w == 0.0 {
                continue;
            }
            let rho_c = (i as f64 + 0.5) * h;
            let c00 = v.at(i, j);
            let c10 = v.at(i + 1, j);
            let c01 = v.at(i, j + 1);
            let c11 = v.at(i + 1, j + 1);
            let mut grad2 = 0.0;
            for k in 0..2 {
                let dr = (c10[k] + c11[k] - c00[k] - c01[k]) / (2.0 * h);
                let dz = (c01[k] + c11[k] - c00[k] - c10[k]) / (2.0 * h);
                grad2 += dr * dr + dz * dz;
            }
            let avg = 1.0 - 0.25 * (c00[0] + c10[0] + c01[0] + c11[0]);
            sum += w * (grad2 + 2.0 * avg / (rho_c * rho_c));
        }
    }
    // the 2-vector functional lives on the upper half ball only, so the
    // azimuthal factor is 2pi rather than the 4pi of the full-ball energy
    2.0 * std::f64::consts::PI * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{normalize3, q_from_u};
    use crate::mesh::build_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0xa11a)
    }

    fn random_unit(r: &mut impl Rng) -> Vec3 {
        normalize3(&[
            r.gen_range(-1.0..1.0),
            r.gen_range(-1.0..1.0),
            r.gen_range(-1.0..1.0),
        ])
    }

    #[test]
    fn eigenvalues_at_poles_and_equator_value() {
        let e = eigenvalues(&[0.0, 1.0, 0.0]);
        assert!((e.l1 + SQRT3 / 6.0).abs() < 1e-14);
        assert!((e.l2 + SQRT3 / 6.0).abs() < 1e-14);
        assert!((e.l3 - SQRT3 / 3.0).abs() < 1e-14);
        let e = eigenvalues(&[0.0, -1.0, 0.0]);
        assert!((e.l1 - SQRT3 / 6.0).abs() < 1e-14);
        assert!((e.l2 + SQRT3 / 3.0).abs() < 1e-14);
        assert!((e.l3 - SQRT3 / 6.0).abs() < 1e-14);
        let e = eigenvalues(&[SQRT3 / 2.0, 0.5, 0.0]);
        assert!((e.l1 + SQRT3 / 3.0).abs() < 1e-14);
        assert!((e.l2 - SQRT3 / 6.0).abs() < 1e-14);
        assert!((e.l3 - SQRT3 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_traceless_and_ordered() {
        let mut r = rng();
        for _ in 0..10_000 {
            let u = random_unit(&mut r);
            let e = eigenvalues(&u);
            assert!((e.l1 + e.l2 + e.l3).abs() < 1e-12);
            assert!(e.l3 >= e.l2);
            let mut flipped = u;
            flipped[2] = -flipped[2];
            let ef = eigenvalues(&flipped);
            assert!((e.l1 - ef.l1).abs() < 1e-15);
            assert!((e.l3 - ef.l3).abs() < 1e-15);
        }
    }

    #[test]
    fn phase_classification_examples() {
        assert_eq!(
            classify_phase(&[SQRT3 / 2.0, 0.5, 0.0], 1e-9),
            Phase::Uniaxial
        );
        assert_eq!(
            classify_phase(&[SQRT3 / 2.0, -0.5, 0.0], 1e-9),
            Phase::Uniaxial
        );
        let u = normalize3(&[0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2]);
        assert!(matches!(classify_phase(&u, 1e-9), Phase::Biaxial(_)));
    }

    #[test]
    fn director_examples_and_unit_norm() {
        let k = director_kappa(&[0.0, 0.0, 1.0]).unwrap();
        assert!((k[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((k[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        let k = director_kappa(&[1.0, 0.0, 0.0]).unwrap();
        assert!((k[0] - 1.0).abs() < 1e-14 && k[1].abs() < 1e-14);
        // u₃ = 0 with u₁ − √3u₂ < 0: ±e_z limit
        let k = director_kappa(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(k, [0.0, 1.0]);
        assert!(director_kappa(&[SQRT3 / 2.0, 0.5, 0.0]).is_err());
        let mut r = rng();
        for _ in 0..10_000 {
            let u = random_unit(&mut r);
            if let Ok(k) = director_kappa(&u) {
                assert!((k[0] * k[0] + k[1] * k[1] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn director_is_top_eigenvector() {
        let mut r = rng();
        let mut tested = 0;
        while tested < 1000 {
            let u = random_unit(&mut r);
            let e = eigenvalues(&u);
            if e.l3 - e.l2 < 1e-6 || e.l3 - e.l1 < 1e-6 {
                continue;
            }
            let k = director_kappa(&u).unwrap();
            let q = q_from_u(&u, 0.5, 0.2, 0.0).unwrap();
            let kv = [k[0], 0.0, k[1]];
            let qk = q.apply(&kv);
            for c in 0..3 {
                assert!(
                    (qk[c] - e.l3 * kv[c]).abs() < 1e-10,
                    "Q kappa != l3 kappa for u = {u:?}"
                );
            }
            tested += 1;
        }
    }

    #[test]
    fn unit_p_max_set_satisfies_linear_relation() {
        // unit u with P(u) = 1/3 and u₁ ≥ 0 satisfies √3u₁ + u₂ = 1:
        // sample the set via the known parametrization of the maximizer orbit
        let mut r = rng();
        for _ in 0..1000 {
            let t: f64 = r.gen_range(0.0..std::f64::consts::PI);
            let u = [
                SQRT3 / 2.0 * t.sin() * t.sin(),
                1.0 - 1.5 * t.sin() * t.sin(),
                SQRT3 * t.sin() * t.cos(),
            ];
            assert!((crate::fields::norm3(&u) - 1.0).abs() < 1e-12);
            assert!((crate::fields::potential_p(&u) - 1.0 / 3.0).abs() < 1e-12);
            assert!((SQRT3 * u[0] + u[1] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn axis_scan_synthetic_two_singularities() {
        let mesh = Arc::new(build_mesh(64).unwrap());
        let u = Field3::from_fn(mesh, |rho, z| {
            let sign = if z < 0.3 || z > 0.6 { 1.0 } else { -1.0 };
            if rho == 0.0 {
                [0.0, sign, 0.0]
            } else {
                crate::fields::hedgehog_u_star(rho, z)
            }
        });
        let scan = detect_axis_singularities(&u);
        assert_eq!(scan.parity, 2);
        assert_eq!(scan.crossings[0].label, TangentLabel::LambdaMinus);
        assert_eq!(scan.crossings[1].label, TangentLabel::LambdaPlus);
        assert!(scan.crossings[0].z_lo < 0.3 && scan.crossings[0].z_hi > 0.3);
        assert!(scan.alternating);
        assert!(!scan.resolution_warning);
    }

    #[test]
    fn axis_scan_hedgehog_is_clean() {
        let u = Field3::hedgehog(Arc::new(build_mesh(64).unwrap()));
        let scan = detect_axis_singularities(&u);
        assert_eq!(scan.parity, 0);
    }

    /// Test field whose director double-angle equals the polar angle around
    /// (rc, 0), so the line field winds by exactly 1/2.
    fn winding_field(mesh: Arc<crate::mesh::Mesh>, rc: f64, c: f64) -> Field3 {
        Field3::from_fn(mesh, |rho, z| {
            let t = z.atan2(rho - rc);
            let s = c * t.cos();
            let u3 = 0.5 * c * t.sin();
            let q = 0.5 * s;
            let p = (1.0 - u3 * u3 - q * q).sqrt();
            [(q + SQRT3 * p) / 2.0, (p - SQRT3 * q) / 2.0, u3]
        })
    }

    #[test]
    fn winding_of_synthetic_ring_is_half() {
        let mesh = Arc::new(build_mesh(96).unwrap());
        let u = winding_field(Arc::clone(&mesh), 0.5, 0.3);
        let w = director_winding(&u, 0.5, 8.0 * mesh.h, 512).unwrap();
        assert!((w - 0.5).abs() < 1e-3, "winding = {w}");
        let ring = detect_ring(&u).unwrap().expect("ring expected");
        assert!((ring.rho0 - 0.5).abs() < 2.0 * mesh.h);
        assert!(ring.ordering_ok, "violations: {}", ring.ordering_violation_fraction);
        assert!((ring.winding_half_turns - 0.5).abs() < 0.05);
    }

    #[test]
    fn winding_of_constant_director_is_zero() {
        let mesh = Arc::new(build_mesh(48).unwrap());
        let u = Field3::from_fn(Arc::clone(&mesh), |_, _| [1.0, 0.0, 0.0]);
        let w = director_winding(&u, 0.5, 8.0 * mesh.h, 256).unwrap();
        assert!(w.abs() < 1e-12);
    }

    #[test]
    fn winding_loop_must_stay_inside() {
        let mesh = Arc::new(build_mesh(48).unwrap());
        let u = Field3::hedgehog(Arc::clone(&mesh));
        assert!(director_winding(&u, 0.99, 8.0 * mesh.h, 64).is_err());
    }

    #[test]
    fn dumbbell_ordering_of_meridian_profile() {
        // u = (0, cos ψ, sin ψ): (√3u₁+u₂)² < 1 away from the poles forces
        // λ₃ > λ₁ > λ₂
        for k in 1..100 {
            let psi = std::f64::consts::PI * k as f64 / 100.0;
            let u = [0.0, psi.cos(), psi.sin()];
            assert!((SQRT3 * u[0] + u[1]).powi(2) < 1.0);
            assert_eq!(
                classify_phase(&u, 1e-9),
                Phase::Biaxial(EigenOrdering::L3L1L2),
                "psi = {psi}"
            );
        }
    }

    #[test]
    fn dumbbell_requires_a_singularity() {
        let u = Field3::hedgehog(Arc::new(build_mesh(32).unwrap()));
        let scan = detect_axis_singularities(&u);
        assert!(classify_dumbbell(&u, &scan).is_err());
    }

    #[test]
    fn reduced_map_examples() {
        let u = reduced_map_u_from_v(&[1.0, 0.0]);
        assert_eq!(u, [0.0, 1.0, 0.0]);
        // v = (cos 2φ, sin 2φ) lifts to the hedgehog on the unit circle
        for k in 0..50 {
            let phi = std::f64::consts::PI / 2.0 * k as f64 / 49.0;
            let v = [(2.0 * phi).cos(), (2.0 * phi).sin()];
            let u = reduced_map_u_from_v(&v);
            let exact = crate::fields::hedgehog_u_star(phi.sin(), phi.cos());
            for c in 0..3 {
                assert!((u[c] - exact[c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reduced_functional_identity() {
        let mesh = Arc::new(build_mesh(48).unwrap());
        let mut r = rng();
        for _ in 0..20 {
            let a: [f64; 4] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
            let v = Field2::from_fn(Arc::clone(&mesh), |rho, z| {
                let base = 2.0 * rho.atan2(z);
                let r2 = rho * rho + z * z;
                let angle = base
                    + (1.0 - r2) * (a[0] + a[1] * rho + a[2] * z + a[3] * rho * z);
                [angle.cos(), angle.sin()]
            });
            let u = Field3::from_fn(Arc::clone(&mesh), |rho, z| {
                let idx = mesh.node_index(
                    (rho / mesh.h).round() as usize,
                    (z / mesh.h).round() as usize,
                );
                reduced_map_u_from_v(&v.values[idx])
            });
            let e = crate::energy::energy(&u, 0.0).total;
            let f = reduced_energy_f(&v);
            assert!(
                (e - 1.5 * f).abs() < 1e-10 * f.abs().max(1.0),
                "E = {e}, 1.5 F = {}",
                1.5 * f
            );
        }
    }

    #[test]
    fn l2_distance_zero_at_reference() {
        let u = Field3::hedgehog(Arc::new(build_mesh(32).unwrap()));
        assert!(l2_distance_to_hedgehog(&u) < 1e-14);
        let mut v = u.clone();
        for w in v.values.iter_mut() {
            w[1] = -w[1];
        }
        assert!(l2_distance_to_hedgehog(&v) > 0.5);
    }

    #[test]
    fn defect_report_serializes_with_stable_names() {
        let u = Field3::hedgehog(Arc::new(build_mesh(32).unwrap()));
        let rep = analyze_field(&u, Branch::None);
        let json = serde_json::to_string(&rep).unwrap();
        for key in [
            "schema_version",
            "axis_crossings",
            "parity",
            "ring_radius",
            "winding_half_turns",
            "orderings",
        ] {
            assert!(json.contains(key), "missing key {key}");
        }
        let back: DefectReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.parity, rep.parity);
    }

    #[test]
    fn biaxial_check_via_matrix_oracle() {
        let u = normalize3(&[0.5, 0.5, std::f64::consts::FRAC_1_SQRT_2]);
        let e = eigenvalues(&u);
        let evs = crate::verify::symmetric_eigenvalues_3x3(
            &q_from_u(&u, 0.3, 0.4, 0.0).unwrap().0,
        );
        let mut closed = [e.l1, e.l2, e.l3];
        closed.sort_by(f64::total_cmp);
        for k in 0..3 {
            assert!((closed[k] - evs[k]).abs() < 1e-10);
        }
        assert!(evs[1] - evs[0] > 1e-3 && evs[2] - evs[1] > 1e-3);
    }
}
