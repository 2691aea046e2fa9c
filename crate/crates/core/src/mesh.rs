//! Quarter-disk grid: node classification, cut-cell quadrature weights and
//! finite-difference stencils.
//!
//! Nodes live at `(i·h, j·h)` for `0 ≤ i, j ≤ n`, `h = 1/n`. Cells are indexed
//! by their lower-left corner, `0 ≤ i, j < n`. Cell weights carry the
//! cylindrical measure `ρ dρ dz`; cells straddling the unit circle are clipped
//! by fractional area (midpoint subsampling), so `Σ weights → 1/3` as `h → 0`.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("grid resolution n = {0} too small (need n >= 8)")]
    TooCoarse(usize),
    #[error("node ({0}, {1}) lies outside the quarter disk")]
    OutsideNode(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NodeClass {
    Interior,
    /// ρ = 0 (the rotation axis); field components 1 and 3 vanish here.
    Axis,
    /// z = 0, ρ > 0 (the equatorial disk T); obstacle constraints act here.
    Equator,
    /// In-disk nodes within distance h of the unit circle; Dirichlet layer.
    Arc,
    Outside,
}

/// Per-node side information for a first-derivative stencil. A ghost value
/// below the equator (or left of the axis) is folded in through the parity of
/// each component, so coefficients can differ per component.
#[derive(Debug, Clone)]
pub struct Stencil {
    /// ∂ρ coefficients per component: list of (i, j, coeff).
    pub d_rho: [Vec<(usize, usize, f64)>; 3],
    /// ∂z coefficients per component.
    pub d_z: [Vec<(usize, usize, f64)>; 3],
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub n: usize,
    pub h: f64,
    classes: Vec<NodeClass>,
    /// `n × n` cut-cell weights, row-major in (i, j); zero outside the disk.
    cell_weights: Vec<f64>,
}

const SUBSAMPLE: usize = 8;

pub fn build_mesh(n: usize) -> Result<Mesh, MeshError> {
    if n < 8 {
        return Err(MeshError::TooCoarse(n));
    }
    let h = 1.0 / n as f64;
    let m = n + 1;
    let mut classes = vec![NodeClass::Outside; m * m];
    for j in 0..m {
        for i in 0..m {
            let r2 = ((i * i + j * j) as f64) * h * h;
            let class = if r2 > 1.0 + 1e-12 {
                NodeClass::Outside
            } else if r2 >= (1.0 - h) * (1.0 - h) - 1e-12 {
                NodeClass::Arc
            } else if i == 0 {
                NodeClass::Axis
            } else if j == 0 {
                NodeClass::Equator
            } else {
                NodeClass::Interior
            };
            classes[j * m + i] = class;
        }
    }

    let mut cell_weights = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let corners_in = |di: usize, dj: usize| {
                let x = (i + di) as f64 * h;
                let y = (j + dj) as f64 * h;
                x * x + y * y <= 1.0 + 1e-12
            };
            let all_in = corners_in(0, 0) && corners_in(1, 0) && corners_in(0, 1) && corners_in(1, 1);
            let any_in = corners_in(0, 0) || corners_in(1, 0) || corners_in(0, 1) || corners_in(1, 1);
            let frac = if all_in {
                1.0
            } else if !any_in {
                0.0
            } else {
                // clip by subsampled area fraction
                let mut inside = 0usize;
                for sj in 0..SUBSAMPLE {
                    for si in 0..SUBSAMPLE {
                        let x = (i as f64 + (si as f64 + 0.5) / SUBSAMPLE as f64) * h;
                        let y = (j as f64 + (sj as f64 + 0.5) / SUBSAMPLE as f64) * h;
                        if x * x + y * y <= 1.0 {
                            inside += 1;
                        }
                    }
                }
                inside as f64 / (SUBSAMPLE * SUBSAMPLE) as f64
            };
            let rho_c = (i as f64 + 0.5) * h;
            cell_weights[j * n + i] = frac * rho_c * h * h;
        }
    }

    Ok(Mesh { n, h, classes, cell_weights })
}

impl Mesh {
    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    #[inline]
    pub fn class(&self, i: usize, j: usize) -> NodeClass {
        self.classes[self.node_index(i, j)]
    }

    #[inline]
    pub fn class_at(&self, idx: usize) -> NodeClass {
        self.classes[idx]
    }

    /// True for nodes whose values are held fixed (Dirichlet layer and the
    /// analytic extension beyond it).
    #[inline]
    pub fn is_fixed(&self, i: usize, j: usize) -> bool {
        matches!(self.class(i, j), NodeClass::Arc | NodeClass::Outside)
    }

    #[inline]
    pub fn cell_weight(&self, i: usize, j: usize) -> f64 {
        self.cell_weights[j * self.n + i]
    }

    #[inline]
    pub fn rho(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    pub fn total_weight(&self) -> f64 {
        self.cell_weights.iter().sum()
    }

    /// One-sided/central first-derivative coefficients at a node, honoring the
    /// reflection parities of the axisymmetric representation: components
    /// (1, 2) are even and component 3 is odd across both the axis and the
    /// equator.
    pub fn gradient_stencil(&self, i: usize, j: usize) -> Result<Stencil, MeshError> {
        if self.class(i, j) == NodeClass::Outside {
            return Err(MeshError::OutsideNode(i, j));
        }
        let h = self.h;
        let in_disk = |i2: usize, j2: usize| self.class(i2, j2) != NodeClass::Outside;

        let mut d_rho: [Vec<(usize, usize, f64)>; 3] = Default::default();
        let mut d_z: [Vec<(usize, usize, f64)>; 3] = Default::default();

        for comp in 0..3 {
            let odd = comp == 2;
            // ∂ρ
            if i == 0 {
                // ghost at ρ = -h by parity
                if odd {
                    d_rho[comp].push((1, j, 1.0 / h));
                }
                // even components: derivative vanishes on the axis
            } else if i + 1 <= self.n && in_disk(i + 1, j) && in_disk(i - 1, j) {
                d_rho[comp].push((i + 1, j, 0.5 / h));
                d_rho[comp].push((i - 1, j, -0.5 / h));
            } else {
                // one-sided, first order, pointing into the domain
                d_rho[comp].push((i, j, 1.0 / h));
                d_rho[comp].push((i - 1, j, -1.0 / h));
            }
            // ∂z
            if j == 0 {
                if odd {
                    d_z[comp].push((i, 1, 1.0 / h));
                }
            } else if j + 1 <= self.n && in_disk(i, j + 1) && in_disk(i, j - 1) {
                d_z[comp].push((i, j + 1, 0.5 / h));
                d_z[comp].push((i, j - 1, -0.5 / h));
            } else {
                d_z[comp].push((i, j, 1.0 / h));
                d_z[comp].push((i, j - 1, -1.0 / h));
            }
        }
        Ok(Stencil { d_rho, d_z })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_n() {
        assert!(build_mesh(4).is_err());
    }

    #[test]
    fn classification_n8() {
        let m = build_mesh(8).unwrap();
        assert_eq!(m.class(0, 2), NodeClass::Axis);
        assert_eq!(m.class(8, 0), NodeClass::Arc); // on ρ²+z²=1
        assert_eq!(m.class(3, 0), NodeClass::Equator);
        assert_eq!(m.class(2, 2), NodeClass::Interior);
        assert_eq!(m.class(8, 8), NodeClass::Outside);
    }

    #[test]
    fn interior_nodes_have_in_domain_neighbors() {
        let m = build_mesh(16).unwrap();
        for j in 0..=16 {
            for i in 0..=16 {
                if m.class(i, j) == NodeClass::Interior {
                    assert_ne!(m.class(i + 1, j), NodeClass::Outside);
                    assert_ne!(m.class(i - 1, j), NodeClass::Outside);
                    assert_ne!(m.class(i, j + 1), NodeClass::Outside);
                    assert_ne!(m.class(i, j - 1), NodeClass::Outside);
                }
            }
        }
    }

    #[test]
    fn quadrature_converges_to_third() {
        // ∫₀¹ ∫₀^√(1-z²) ρ dρ dz = 1/3
        let mut prev_err = f64::INFINITY;
        for n in [16, 32, 64, 128] {
            let m = build_mesh(n).unwrap();
            let err = (m.total_weight() - 1.0 / 3.0).abs();
            assert!(err < 2.0 * m.h, "n={n}: err={err}");
            assert!(err < prev_err);
            prev_err = err;
        }
    }

    #[test]
    fn equator_stencil_parity() {
        let m = build_mesh(16).unwrap();
        let s = m.gradient_stencil(4, 0).unwrap();
        // even components: ∂z = 0 at z = 0
        assert!(s.d_z[0].is_empty());
        assert!(s.d_z[1].is_empty());
        // odd component: ghost = -(value one row above) ⇒ coeff 1/h on (i, 1)
        assert_eq!(s.d_z[2].len(), 1);
        let (i2, j2, c) = s.d_z[2][0];
        assert_eq!((i2, j2), (4, 1));
        assert!((c - 16.0).abs() < 1e-14);
    }

    #[test]
    fn interior_stencil_is_central() {
        let m = build_mesh(16).unwrap();
        let s = m.gradient_stencil(4, 4).unwrap();
        for comp in 0..3 {
            assert_eq!(s.d_rho[comp].len(), 2);
            assert_eq!(s.d_z[comp].len(), 2);
        }
    }

    #[test]
    fn outside_node_rejected() {
        let m = build_mesh(8).unwrap();
        assert!(m.gradient_stencil(8, 8).is_err());
    }

    #[test]
    fn discrete_dz_of_even_extension_vanishes_at_equator() {
        // Reflection consistency: for a field even in z, the parity stencil
        // gives ∂z = 0 exactly for components 1, 2.
        let m = build_mesh(16).unwrap();
        let s = m.gradient_stencil(5, 0).unwrap();
        assert!(s.d_z[0].is_empty() && s.d_z[1].is_empty());
    }
}
