//! Field storage, the analytic hedgehog map, the augment operator, the
//! Q-tensor reconstruction and the scalar potentials.

use crate::mesh::{Mesh, NodeClass};
use std::sync::Arc;
use thiserror::Error;

pub type Vec3 = [f64; 3];
pub type Vec5 = [f64; 5];

pub const SQRT3: f64 = 1.732050807568877293527446341505872367_f64;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("field is attached to a different mesh (n = {0} vs {1})")]
    MeshMismatch(usize, usize),
    #[error("axis point requires u1 = u3 = 0 (got u1 = {0}, u3 = {1})")]
    AxisComponents(f64, f64),
    #[error("argument a must be positive (got {0})")]
    NonPositiveA(f64),
    #[error("radius {0} out of range (must lie in ({1}, 1])")]
    BadRadius(f64, f64),
}

#[inline]
pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

#[inline]
pub fn normalize3(a: &Vec3) -> Vec3 {
    let n = norm3(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// The hedgehog reference map `U*(ρ, z)`. On the axis (ρ = 0, z ≠ 0) the
/// formula reduces to `(0, 1, 0)`, which is also the value assigned at the
/// origin (the limit along the axis from either side, since only z² enters).
pub fn hedgehog_u_star(rho: f64, z: f64) -> Vec3 {
    let r2 = rho * rho + z * z;
    if r2 == 0.0 {
        return [0.0, 1.0, 0.0];
    }
    [
        SQRT3 / 2.0 * rho * rho / r2,
        1.5 * (z * z / r2 - 1.0 / 3.0),
        SQRT3 * rho * z / r2,
    ]
}

/// Augment operator: lifts a 3-vector profile to the 5-component equivariant map.
pub fn augment_l(u: &Vec3, theta: f64) -> Vec5 {
    let (s2, c2) = (2.0 * theta).sin_cos();
    let (s1, c1) = theta.sin_cos();
    [u[0] * c2, u[0] * s2, u[1], u[2] * c1, u[2] * s1]
}

/// Cubic potential `P(v) = -v₂v₁² + (√3/2)v₁v₃² + v₂³/3 + v₂v₃²/2`.
#[inline]
pub fn potential_p(v: &Vec3) -> f64 {
    -v[1] * v[0] * v[0]
        + SQRT3 / 2.0 * v[0] * v[2] * v[2]
        + v[1] * v[1] * v[1] / 3.0
        + 0.5 * v[1] * v[2] * v[2]
}

/// Gradient of P.
#[inline]
pub fn grad_p(v: &Vec3) -> Vec3 {
    [
        -2.0 * v[0] * v[1] + SQRT3 / 2.0 * v[2] * v[2],
        -v[0] * v[0] + v[1] * v[1] + 0.5 * v[2] * v[2],
        SQRT3 * v[0] * v[2] + v[1] * v[2],
    ]
}

/// Five-component potential `S[w]`; satisfies `S[L[u](θ)] = P(u)` for all θ.
pub fn potential_s(w: &Vec5) -> f64 {
    -w[2] * (w[0] * w[0] + w[1] * w[1])
        + SQRT3 * w[1] * w[3] * w[4]
        + 0.5 * w[2] * (w[3] * w[3] + w[4] * w[4])
        + w[2] * w[2] * w[2] / 3.0
        + SQRT3 / 2.0 * w[0] * (w[3] * w[3] - w[4] * w[4])
}

/// 3×3 symmetric traceless order-parameter matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QTensor(pub [[f64; 3]; 3]);

impl QTensor {
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2],
            m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2],
            m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2],
        ]
    }
}

/// Reconstructs the Q-tensor from the reduced variables at a spatial point:
/// `Q̄[u] = u₁(e_ρ⊗e_ρ − I₂/2) + (√3/2)u₂(e_z⊗e_z − I/3) + (u₃/2)(e_ρ⊗e_z + e_z⊗e_ρ)`.
///
/// On the axis the frame `e_ρ` is undefined; the θ-independent limit exists
/// only when u₁ = u₃ = 0, which is enforced.
pub fn q_from_u(u: &Vec3, rho: f64, z: f64, theta: f64) -> Result<QTensor, FieldError> {
    let on_axis = rho == 0.0 && z != 0.0 || (rho == 0.0 && z == 0.0);
    let e_rho: Vec3 = if on_axis {
        if u[0].abs() > 1e-14 || u[2].abs() > 1e-14 {
            return Err(FieldError::AxisComponents(u[0], u[2]));
        }
        [1.0, 0.0, 0.0] // arbitrary: the contributing terms vanish
    } else {
        [theta.cos(), theta.sin(), 0.0]
    };
    let e_z: Vec3 = [0.0, 0.0, 1.0];

    let mut m = [[0.0f64; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let i2 = if a == b && a < 2 { 1.0 } else { 0.0 };
            let id = if a == b { 1.0 } else { 0.0 };
            m[a][b] = u[0] * (e_rho[a] * e_rho[b] - 0.5 * i2)
                + SQRT3 / 2.0 * u[1] * (e_z[a] * e_z[b] - id / 3.0)
                + 0.5 * u[2] * (e_rho[a] * e_z[b] + e_z[a] * e_rho[b]);
        }
    }
    Ok(QTensor(m))
}

/// `H₊ = (3 + √(9 + 8a²))/4`, the boundary amplitude factor of the finite-a model.
pub fn h_plus(a: f64) -> f64 {
    (3.0 + (9.0 + 8.0 * a * a).sqrt()) / 4.0
}

/// Additive constant making 0 the absolute minimum of `F_a`. Found by 1-D
/// minimization along the ray `v = t(0,1,0)`, which maximizes P at fixed |v|;
/// the minimizing radius is `√2 H₊/a` (checked against grid search in tests).
pub fn compute_d_a(a: f64) -> Result<f64, FieldError> {
    if a <= 0.0 {
        return Err(FieldError::NonPositiveA(a));
    }
    let g = |t: f64| {
        let v = [0.0, t, 0.0];
        -3.0 * std::f64::consts::SQRT_2 * a * potential_p(&v)
            + 0.5 * a * a * (t * t - 1.0) * (t * t - 1.0)
    };
    // widen the bracket until the minimizer is interior (it scales like 1/a
    // for small a), then golden-section
    let mut hi = 4.0f64;
    while g(hi) < g(0.5 * hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0f64;
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if g(x1) < g(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok(-g(t))
}

/// `F_a(v) = D_a − 3√2·a·P(v) + (a²/2)(|v|²−1)²`.
pub fn potential_f_a(v: &Vec3, a: f64) -> Result<f64, FieldError> {
    let d_a = compute_d_a(a)?;
    let n2 = dot3(v, v);
    Ok(d_a - 3.0 * std::f64::consts::SQRT_2 * a * potential_p(v)
        + 0.5 * a * a * (n2 - 1.0) * (n2 - 1.0))
}

/// S²-valued 3-vector field on the quarter-disk grid.
#[derive(Debug, Clone)]
pub struct Field3 {
    pub mesh: Arc<Mesh>,
    pub values: Vec<Vec3>,
}

impl Field3 {
    pub fn from_fn(mesh: Arc<Mesh>, mut f: impl FnMut(f64, f64) -> Vec3) -> Self {
        let n = mesh.n;
        let mut values = Vec::with_capacity(mesh.node_count());
        for j in 0..=n {
            for i in 0..=n {
                values.push(f(mesh.rho(i), mesh.z(j)));
            }
        }
        Field3 { mesh, values }
    }

    /// The hedgehog map sampled at every node (including the analytic
    /// extension past the arc, used as Dirichlet data by straddling cells).
    pub fn hedgehog(mesh: Arc<Mesh>) -> Self {
        Self::from_fn(mesh, hedgehog_u_star)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &Vec3 {
        &self.values[self.mesh.node_index(i, j)]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Vec3 {
        let idx = self.mesh.node_index(i, j);
        &mut self.values[idx]
    }

    /// Bilinear interpolation at an arbitrary (ρ, z); z < 0 is handled through
    /// the mirror parities (even, even, odd).
    pub fn sample(&self, rho: f64, z: f64) -> Vec3 {
        let flip = z < 0.0;
        let z = z.abs();
        let n = self.mesh.n;
        let h = self.mesh.h;
        let fi = (rho / h).clamp(0.0, (n - 1) as f64 + 0.999_999);
        let fj = (z / h).clamp(0.0, (n - 1) as f64 + 0.999_999);
        let i = fi.floor() as usize;
        let j = fj.floor() as usize;
        let (s, t) = (fi - i as f64, fj - j as f64);
        let mut out = [0.0; 3];
        for c in 0..3 {
            let v00 = self.at(i, j)[c];
            let v10 = self.at(i + 1, j)[c];
            let v01 = self.at(i, j + 1)[c];
            let v11 = self.at(i + 1, j + 1)[c];
            out[c] = v00 * (1.0 - s) * (1.0 - t)
                + v10 * s * (1.0 - t)
                + v01 * (1.0 - s) * t
                + v11 * s * t;
        }
        if flip {
            out[2] = -out[2];
        }
        out
    }

    /// Checks the representation invariants: unit length everywhere in the
    /// domain, u₁ = u₃ = 0 on the axis, u₃ = 0 on the equator.
    pub fn check_invariants(&self, tol: f64) -> Result<(), String> {
        let n = self.mesh.n;
        for j in 0..=n {
            for i in 0..=n {
                let class = self.mesh.class(i, j);
                if class == NodeClass::Outside {
                    continue;
                }
                let u = self.at(i, j);
                if (norm3(u) - 1.0).abs() > tol {
                    return Err(format!("|u| = {} at node ({i}, {j})", norm3(u)));
                }
                if class == NodeClass::Axis && (u[0].abs() > tol || u[2].abs() > tol) {
                    return Err(format!("axis components nonzero at ({i}, {j})"));
                }
                if class == NodeClass::Equator && u[2].abs() > tol {
                    return Err(format!("u3 = {} on equator at ({i}, {j})", u[2]));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0x1d_5eed)
    }

    fn random_unit(r: &mut impl Rng) -> Vec3 {
        loop {
            let v = [
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
            ];
            let n = norm3(&v);
            if n > 1e-3 && n < 1.0 {
                return normalize3(&v);
            }
        }
    }

    #[test]
    fn hedgehog_axis_and_equator() {
        assert_eq!(hedgehog_u_star(0.0, 1.0), [0.0, 1.0, 0.0]);
        let u = hedgehog_u_star(1.0, 0.0);
        assert!((u[0] - SQRT3 / 2.0).abs() < 1e-15);
        assert!((u[1] + 0.5).abs() < 1e-15);
        assert!(u[2].abs() < 1e-15);
    }

    #[test]
    fn hedgehog_unit_norm_on_circle() {
        let mut r = rng();
        for _ in 0..10_000 {
            let phi: f64 = r.gen_range(0.0..std::f64::consts::PI);
            let u = hedgehog_u_star(phi.sin(), phi.cos());
            assert!((norm3(&u) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn augment_examples() {
        let w = augment_l(&[0.0, 1.0, 0.0], 0.37);
        assert_eq!(w, [0.0, 0.0, 1.0, 0.0, 0.0]);
        let w = augment_l(&[1.0, 0.0, 0.0], 0.0);
        assert_eq!(w, [1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn augment_is_isometric() {
        let mut r = rng();
        for _ in 0..10_000 {
            let u = [
                r.gen_range(-2.0..2.0),
                r.gen_range(-2.0..2.0),
                r.gen_range(-2.0..2.0),
            ];
            let theta = r.gen_range(0.0..std::f64::consts::TAU);
            let w = augment_l(&u, theta);
            let nw: f64 = w.iter().map(|x| x * x).sum();
            assert!((nw - dot3(&u, &u)).abs() < 1e-12);
        }
    }

    #[test]
    fn p_examples() {
        assert!((potential_p(&[0.0, 1.0, 0.0]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((potential_p(&[0.0, -1.0, 0.0]) + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn p_of_hedgehog_is_third() {
        let mut r = rng();
        for _ in 0..1000 {
            let phi: f64 = r.gen_range(0.0..std::f64::consts::PI);
            let u = hedgehog_u_star(phi.sin(), phi.cos());
            assert!((potential_p(&u) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn s_composed_with_l_is_p() {
        let mut r = rng();
        for _ in 0..10_000 {
            let u = random_unit(&mut r);
            let theta = r.gen_range(0.0..std::f64::consts::TAU);
            let w = augment_l(&u, theta);
            assert!((potential_s(&w) - potential_p(&u)).abs() < 1e-12);
        }
        assert!((potential_s(&[0.0, 0.0, 1.0, 0.0, 0.0]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(potential_s(&[1.0, 0.0, 0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn p_rearrangement_inequality() {
        let mut r = rng();
        for _ in 0..10_000 {
            let v = [
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
                r.gen_range(-1.0..1.0),
            ];
            let p = potential_p(&v);
            let q = potential_p(&[v[0].abs(), v[1], v[2].abs()]);
            assert!(p <= q + 1e-15);
        }
    }

    #[test]
    fn max_p_on_sphere_is_third() {
        // brute-force sweep; max attained at (0, 1, 0)
        let mut r = rng();
        let mut max = f64::NEG_INFINITY;
        for _ in 0..1_000_000 {
            let u = random_unit(&mut r);
            max = max.max(potential_p(&u));
        }
        assert!(max <= 1.0 / 3.0 + 1e-9);
        assert!(max > 0.33); // the sweep actually approaches the max
    }

    #[test]
    fn q_tensor_construction() {
        let mut r = rng();
        for _ in 0..1000 {
            let u = random_unit(&mut r);
            let q = q_from_u(&u, 0.4, 0.3, r.gen_range(0.0..6.28)).unwrap();
            assert!(q.trace().abs() < 1e-14);
            for a in 0..3 {
                for b in 0..3 {
                    assert!((q.0[a][b] - q.0[b][a]).abs() < 1e-14);
                }
            }
        }
        let z = q_from_u(&[0.0, 0.0, 0.0], 0.4, 0.3, 0.0).unwrap();
        assert_eq!(z.0, [[0.0; 3]; 3]);
        assert!(q_from_u(&[0.5, 0.5, 0.0], 0.0, 0.3, 0.0).is_err());
    }

    #[test]
    fn d_a_and_f_a() {
        // a = √2 ⇒ H₊ = 2
        let a = std::f64::consts::SQRT_2;
        assert!((h_plus(a) - 2.0).abs() < 1e-14);
        // F_a vanishes at the minimizing radius √2·H₊/a along (0,1,0)
        let t = std::f64::consts::SQRT_2 * h_plus(a) / a;
        let f = potential_f_a(&[0.0, t, 0.0], a).unwrap();
        assert!(f.abs() < 1e-8, "F_a at minimizer = {f}");
        assert!(potential_f_a(&[0.0, 0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn f_a_minimum_is_zero_by_grid_search() {
        // coarse 3-D grid + local descent oracle for a ∈ {1, √2, 10}
        for a in [1.0, std::f64::consts::SQRT_2, 10.0] {
            let mut best = f64::INFINITY;
            let mut best_v = [0.0; 3];
            let lim = 4.0 / a.sqrt().max(1.0) + 1.5;
            let steps = 24;
            for i in 0..=steps {
                for j in 0..=steps {
                    for k in 0..=steps {
                        let v = [
                            -lim + 2.0 * lim * i as f64 / steps as f64,
                            -lim + 2.0 * lim * j as f64 / steps as f64,
                            -lim + 2.0 * lim * k as f64 / steps as f64,
                        ];
                        let f = potential_f_a(&v, a).unwrap();
                        if f < best {
                            best = f;
                            best_v = v;
                        }
                    }
                }
            }
            // local descent from the best grid point
            let mut v = best_v;
            let mut step = 0.1;
            while step > 1e-9 {
                let mut improved = false;
                for c in 0..3 {
                    for s in [-1.0, 1.0] {
                        let mut w = v;
                        w[c] += s * step;
                        if potential_f_a(&w, a).unwrap() < potential_f_a(&v, a).unwrap() {
                            v = w;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            let min = potential_f_a(&v, a).unwrap();
            assert!(min.abs() < 1e-8, "a={a}: min F_a = {min}");
        }
    }

    #[test]
    fn field_sample_reflects_odd_component() {
        let mesh = Arc::new(crate::mesh::build_mesh(16).unwrap());
        let f = Field3::hedgehog(mesh);
        let up = f.sample(0.3, 0.2);
        let dn = f.sample(0.3, -0.2);
        assert!((up[0] - dn[0]).abs() < 1e-15);
        assert!((up[1] - dn[1]).abs() < 1e-15);
        assert!((up[2] + dn[2]).abs() < 1e-15);
    }
}
