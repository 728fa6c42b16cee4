//! Sampled lower bound for the thin-slab Korn-type inequality
//!
//! ```text
//! eps ∫ D_eps e^eps(v) : e^eps(v)  ≥  c ∫ |∇v3|²
//! ```
//!
//! over fields vanishing on the clamped faces.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::assembly::{assemble_slab_forms, slab_component_gradient_form, ModelVariant};
use crate::kl::kl_lift;
use crate::mesh::{build_plate_mesh, SlabMesh, PLATE_NODE_DOFS};
use crate::tensor::SymTensor4;
use crate::Result;

/// Outcome of [`korn_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KornSample {
    /// Smallest observed ratio; `f64::INFINITY` if every sample was skipped.
    pub min_ratio: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Ratio `vᵀ A v / vᵀ G v` for every sample `v`, where `A` is the weighted
/// viscous form of `d_eps` and `G` the gradient form of the third component.
///
/// Even-numbered samples are independent uniform nodal values on the free
/// dofs; odd-numbered ones are Kirchhoff-Love lifts of random plate fields,
/// for which the transverse strains vanish and the ratio is smallest.
/// Samples with `∫|∇v3|² = 0` are skipped.
pub fn korn_check<R: Rng + ?Sized>(
    mesh: &SlabMesh,
    d_eps: &SymTensor4,
    eps: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<KornSample> {
    let forms = assemble_slab_forms(mesh, d_eps, d_eps, 1.0, eps, ModelVariant::Rescaled3D { eps })?;
    let grad3 = slab_component_gradient_form(mesh, 2);
    let plate = build_plate_mesh(mesh.nx, mesh.ny)?;
    let plate_free = plate.free_mask();
    let mut out = KornSample { min_ratio: f64::INFINITY, evaluated: 0, skipped: 0 };
    for s in 0..n_samples {
        let v: Vec<f64> = if s % 2 == 0 {
            forms
                .free
                .iter()
                .map(|&f| if f { rng.random_range(-1.0..1.0) } else { 0.0 })
                .collect()
        } else {
            let mut p = vec![0.0; plate.ndof()];
            for (i, value) in p.iter_mut().enumerate() {
                if plate_free[i] {
                    // Slopes are scaled so all dof kinds contribute comparably.
                    let scale = if i % PLATE_NODE_DOFS < 3 { 1.0 } else { 2.0 };
                    *value = scale * rng.random_range(-1.0..1.0);
                }
            }
            kl_lift(&plate, &p, mesh)?
        };
        let denominator = grad3.quadratic(&v);
        if !(denominator > 0.0) {
            out.skipped += 1;
            continue;
        }
        out.evaluated += 1;
        out.min_ratio = out.min_ratio.min(forms.damping.quadratic(&v) / denominator);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_slab_mesh;
    use crate::tensor::make_isotropic;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ratio_is_positive_on_small_slab() {
        let mesh = build_slab_mesh(4, 2, 2).unwrap();
        let d = make_isotropic(0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = korn_check(&mesh, &d, 0.5, 20, &mut rng).unwrap();
        assert_eq!(r.evaluated + r.skipped, 20);
        assert!(r.min_ratio > 0.0 && r.min_ratio.is_finite());
    }

    #[test]
    fn no_samples_gives_infinite_ratio() {
        let mesh = build_slab_mesh(2, 1, 1).unwrap();
        let d = SymTensor4::identity();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = korn_check(&mesh, &d, 1.0, 0, &mut rng).unwrap();
        assert_eq!(r.min_ratio, f64::INFINITY);
    }
}
