//! Kirchhoff-Love displacements `u = (ū − x3 ∇w, w)` built from plate
//! fields, and least-squares projection of slab fields onto them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::{plate_field, slab_field, slab_point};
use crate::mesh::{PlateMesh, SlabMesh, PLATE_NODE_DOFS};
use crate::quadrature::{GAUSS2, GAUSS4};
use crate::sparse::{BandedCholesky, CooBuilder, DofSubset};
use crate::tensor::Strain3;
use crate::{Error, Result};

/// The 3D displacement generated by plate dofs, evaluated exactly from the
/// plate bases rather than through a slab interpolant.
#[derive(Debug, Clone, Copy)]
pub struct KlDisplacement<'a> {
    pub plate: &'a PlateMesh,
    pub dofs: &'a [f64],
}

impl<'a> KlDisplacement<'a> {
    /// Displacement and gradient `G_ij = ∂_j u_i` at thickness `x3` above
    /// local point `s` of plate cell `cell`.
    pub fn eval(&self, cell: usize, s: &[f64; 2], x3: f64) -> ([f64; 3], [[f64; 3]; 3]) {
        let (ub, gb, w, gw, hw) = plate_field(self.plate, self.dofs, cell, s);
        let u = [ub[0] - x3 * gw[0], ub[1] - x3 * gw[1], w];
        let mut g = [[0.0; 3]; 3];
        for a in 0..2 {
            for d in 0..2 {
                g[a][d] = gb[a][d] - x3 * hw[a][d];
            }
            g[a][2] = -gw[a];
            g[2][a] = gw[a];
        }
        (u, g)
    }

    pub fn strain(&self, cell: usize, s: &[f64; 2], x3: f64) -> Strain3 {
        Strain3::sym(&self.eval(cell, s, x3).1)
    }
}

/// Samples the Kirchhoff-Love field of plate dofs `p` at the slab nodes and
/// returns slab dofs; the slab and plate must share the in-plane grid.
pub fn kl_lift(plate: &PlateMesh, p: &[f64], slab: &SlabMesh) -> Result<Vec<f64>> {
    check_grids(plate, slab)?;
    if p.len() != plate.ndof() {
        return Err(Error::GridMismatch(format!(
            "{} plate dofs given, mesh has {}",
            p.len(),
            plate.ndof()
        )));
    }
    let half = slab.nx / 2;
    let mut u = vec![0.0; slab.ndof()];
    for i in 0..=slab.nx {
        for j in 0..=slab.ny {
            for side in [false, true] {
                if i != half && side {
                    continue;
                }
                let plus = side || i > half;
                let pn = plate.node_index(i, j, plus);
                let base = PLATE_NODE_DOFS * pn;
                for k in 0..=slab.nz {
                    let sn = slab.node_index(i, j, k, plus);
                    let x3 = slab.nodes[sn][2];
                    u[3 * sn] = p[base] - x3 * p[base + 3];
                    u[3 * sn + 1] = p[base + 1] - x3 * p[base + 4];
                    u[3 * sn + 2] = p[base + 2];
                }
            }
        }
    }
    Ok(u)
}

fn check_grids(plate: &PlateMesh, slab: &SlabMesh) -> Result<()> {
    if plate.nx != slab.nx || plate.ny != slab.ny {
        return Err(Error::GridMismatch(format!(
            "plate grid {}x{} differs from slab grid {}x{}",
            plate.nx, plate.ny, slab.nx, slab.ny
        )));
    }
    Ok(())
}

/// Plate cell underneath slab cell `cell`.
fn plate_cell_of(slab: &SlabMesh, cell: usize) -> usize {
    cell / slab.nz
}

/// Quadrature on the slab adapted to Kirchhoff-Love fields: 4×4 in-plane,
/// 2 points per slab layer in thickness.
fn kl_points(slab: &SlabMesh) -> Vec<([f64; 3], f64)> {
    let vol = slab.cell_volume();
    let mut pts = Vec::with_capacity(32);
    for &(x, wx) in &GAUSS4 {
        for &(y, wy) in &GAUSS4 {
            for &(z, wz) in &GAUSS2 {
                pts.push(([x, y, z], wx * wy * wz * vol));
            }
        }
    }
    pts
}

/// Least-squares projection of slab fields onto the discrete Kirchhoff-Love
/// space, minimizing `∫ |u − L p|² + |∇u − ∇L p|²` over admissible plate dofs
/// `p` (zero on the clamped edges).
#[derive(Debug, Clone)]
pub struct KlProjector {
    plate: PlateMesh,
    slab: SlabMesh,
    free: DofSubset,
    factor: BandedCholesky,
}

impl KlProjector {
    pub fn new(plate: &PlateMesh, slab: &SlabMesh) -> Result<Self> {
        check_grids(plate, slab)?;
        let free = DofSubset::from_mask(&plate.free_mask());
        let mut gram = CooBuilder::new(free.len(), free.len());
        let pts = kl_points(slab);
        for cell in 0..slab.cells.len() {
            let pc = plate_cell_of(slab, cell);
            for (s, w) in &pts {
                let x3 = slab_point(slab, cell, s)[2];
                let basis = kl_basis(plate, pc, &[s[0], s[1]], x3);
                for (gp, up, gradp) in &basis {
                    let Some(p) = free.sub_index(*gp) else { continue };
                    for (gq, uq, gradq) in &basis {
                        let Some(q) = free.sub_index(*gq) else { continue };
                        gram.push(p, q, w * inner(up, gradp, uq, gradq));
                    }
                }
            }
        }
        let factor = BandedCholesky::factor(&gram.build())?;
        Ok(KlProjector { plate: plate.clone(), slab: slab.clone(), free, factor })
    }

    /// Plate dofs of the projection of slab field `u`.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        let mut rhs = vec![0.0; self.free.len()];
        let pts = kl_points(&self.slab);
        for cell in 0..self.slab.cells.len() {
            let pc = plate_cell_of(&self.slab, cell);
            for (s, w) in &pts {
                let x3 = slab_point(&self.slab, cell, s)[2];
                let (val, grad) = slab_field(&self.slab, u, cell, s);
                for (gp, up, gradp) in kl_basis(&self.plate, pc, &[s[0], s[1]], x3) {
                    if let Some(p) = self.free.sub_index(gp) {
                        rhs[p] += w * inner(&up, &gradp, &val, &grad);
                    }
                }
            }
        }
        self.free.extend(&self.factor.solve(&rhs))
    }

    /// `(∫ |u − L p|²)^{1/2}` for slab field `u` and plate dofs `p`.
    pub fn l2_distance(&self, u: &[f64], p: &[f64]) -> f64 {
        let lift = KlDisplacement { plate: &self.plate, dofs: p };
        let pts = kl_points(&self.slab);
        let mut s2 = 0.0;
        for cell in 0..self.slab.cells.len() {
            let pc = plate_cell_of(&self.slab, cell);
            for (s, w) in &pts {
                let x3 = slab_point(&self.slab, cell, s)[2];
                let (val, _) = slab_field(&self.slab, u, cell, s);
                let (kl, _) = lift.eval(pc, &[s[0], s[1]], x3);
                s2 += w * (0..3).map(|i| { let d = val[i] - kl[i]; d * d }).sum::<f64>();
            }
        }
        libm::sqrt(s2)
    }

    /// `(∫ |L p − L q|²)^{1/2}` between two plate fields.
    pub fn plate_l2_distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
        let lift = KlDisplacement { plate: &self.plate, dofs: &diff };
        let pts = kl_points(&self.slab);
        let mut s2 = 0.0;
        for cell in 0..self.slab.cells.len() {
            let pc = plate_cell_of(&self.slab, cell);
            for (s, w) in &pts {
                let x3 = slab_point(&self.slab, cell, s)[2];
                let (kl, _) = lift.eval(pc, &[s[0], s[1]], x3);
                s2 += w * kl.iter().map(|v| v * v).sum::<f64>();
            }
        }
        libm::sqrt(s2)
    }
}

fn inner(u: &[f64; 3], gu: &[[f64; 3]; 3], v: &[f64; 3], gv: &[[f64; 3]; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        s += u[i] * v[i];
        for d in 0..3 {
            s += gu[i][d] * gv[i][d];
        }
    }
    s
}

/// Lifted basis functions of one plate cell at a slab point: global plate
/// dof, displacement and gradient.
fn kl_basis(plate: &PlateMesh, cell: usize, s: &[f64; 2], x3: f64) -> Vec<(usize, [f64; 3], [[f64; 3]; 3])> {
    let mut out = Vec::with_capacity(4 * PLATE_NODE_DOFS);
    let mut unit = vec![0.0; plate.ndof()];
    for &node in &plate.cells[cell] {
        for k in 0..PLATE_NODE_DOFS {
            let g = PLATE_NODE_DOFS * node + k;
            unit[g] = 1.0;
            let lift = KlDisplacement { plate, dofs: &unit };
            let (u, grad) = lift.eval(cell, s, x3);
            unit[g] = 0.0;
            out.push((g, u, grad));
        }
    }
    out
}
