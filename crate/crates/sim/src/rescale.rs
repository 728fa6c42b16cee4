//! Maps between physical thin-slab solutions and their rescaled form on the
//! reference slab.
//!
//! The physical slab of thickness `eps` is the image of the reference slab
//! under `r_eps(x) = (x1, x2, eps x3)`, and both share the node numbering of
//! the reference mesh. Nodal samples therefore transform pointwise:
//!
//! ```text
//! t_resc = eps t_phys,   u_resc = (u1, u2, eps u3),   z_resc = z
//! ```

use adhesive_plate_core::energetics::AdhesionField;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Time samples of a nodal displacement and an adhesion field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSamples {
    pub times: Vec<f64>,
    /// Nodal displacement, three components per node.
    pub u: Vec<Vec<f64>>,
    pub z: Vec<AdhesionField>,
}

impl FieldSamples {
    fn check(&self) -> Result<(), SimError> {
        let n = self.times.len();
        if self.u.len() != n || self.z.len() != n {
            return Err(SimError::Format(
                "field samples".into(),
                format!("{n} times but {} displacements and {} adhesion fields", self.u.len(), self.z.len()),
            ));
        }
        let Some(first) = self.u.first() else { return Ok(()) };
        if first.len() % 3 != 0 {
            return Err(SimError::Format("field samples".into(), "displacement length is not a multiple of 3".into()));
        }
        if self.u.iter().any(|u| u.len() != first.len()) {
            return Err(SimError::Format("field samples".into(), "displacements differ in length".into()));
        }
        if self.z.iter().any(|z| !z.same_grid(&self.z[0])) {
            return Err(SimError::Format("field samples".into(), "adhesion fields live on different grids".into()));
        }
        Ok(())
    }
}

fn transform(samples: &FieldSamples, time_factor: f64, normal_factor: f64) -> Result<FieldSamples, SimError> {
    samples.check()?;
    let u = samples
        .u
        .iter()
        .map(|u| {
            let mut out = u.clone();
            out.iter_mut().skip(2).step_by(3).for_each(|v| *v *= normal_factor);
            out
        })
        .collect();
    Ok(FieldSamples {
        times: samples.times.iter().map(|t| t * time_factor).collect(),
        u,
        z: samples.z.clone(),
    })
}

fn check_eps(eps: f64) -> Result<(), SimError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(SimError::Config(crate::ConfigError::field("eps", format!("must be positive, got {eps}"))))
    }
}

/// Physical samples to rescaled samples.
pub fn rescale_solution(physical: &FieldSamples, eps: f64) -> Result<FieldSamples, SimError> {
    check_eps(eps)?;
    transform(physical, eps, eps)
}

/// Inverse of [`rescale_solution`].
pub fn unscale_solution(rescaled: &FieldSamples, eps: f64) -> Result<FieldSamples, SimError> {
    check_eps(eps)?;
    transform(rescaled, 1.0 / eps, 1.0 / eps)
}
