//! Symmetric fourth-order tensors on 3x3 strains and the out-of-plane
//! reduction operators built from them.
//!
//! Strains are packed in Mandel form with component order
//! `(11, 22, 33, 23, 13, 12)` and a `sqrt(2)` weight on shear entries, so the
//! packed 6x6 matrix of a tensor is symmetric and its eigenvalues are the
//! definiteness constants of the tensor. Planar strains use the order
//! `(11, 22, 12)` with the same convention.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dense::{solve3, symmetric_eigenvalues};
use crate::{Error, Result};

/// Largest symmetry defect accepted for a valid tensor.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Smallest Mandel eigenvalue accepted for a valid tensor.
pub const DEFINITENESS_TOLERANCE: f64 = 1e-10;
/// Entry threshold used by [`check_planar_condition`].
pub const PLANAR_TOLERANCE: f64 = 1e-14;

const SQRT2: f64 = core::f64::consts::SQRT_2;

/// Index pairs of the six Mandel components.
pub const MANDEL_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
/// Index pairs of the three planar Mandel components.
pub const PLANAR_PAIRS: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

fn mandel_weight(index: usize) -> f64 {
    if index < 3 {
        1.0
    } else {
        SQRT2
    }
}

/// Symmetric 3x3 strain or stress.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Strain3 {
    pub m: [[f64; 3]; 3],
}

/// Symmetric 2x2 planar strain or stress.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Strain2 {
    pub m: [[f64; 2]; 2],
}

impl Strain3 {
    pub const ZERO: Strain3 = Strain3 { m: [[0.0; 3]; 3] };

    pub fn identity() -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Strain3 { m }
    }

    /// Symmetric part of an arbitrary 3x3 matrix, e.g. a displacement gradient.
    pub fn sym(g: &[[f64; 3]; 3]) -> Self {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = 0.5 * (g[i][j] + g[j][i]);
            }
        }
        Strain3 { m }
    }

    /// Builds a strain from its Mandel vector.
    pub fn from_mandel(v: &[f64; 6]) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (idx, &(i, j)) in MANDEL_PAIRS.iter().enumerate() {
            let value = v[idx] / mandel_weight(idx);
            m[i][j] = value;
            m[j][i] = value;
        }
        Strain3 { m }
    }

    pub fn mandel(&self) -> [f64; 6] {
        let mut v = [0.0; 6];
        for (idx, &(i, j)) in MANDEL_PAIRS.iter().enumerate() {
            v[idx] = mandel_weight(idx) * self.m[i][j];
        }
        v
    }

    /// Frobenius inner product `A : B`.
    pub fn ddot(&self, other: &Strain3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.m[i][j] * other.m[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.ddot(self))
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn scaled(&self, factor: f64) -> Strain3 {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|v| *v *= factor);
        out
    }

    pub fn add(&self, other: &Strain3) -> Strain3 {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] += other.m[i][j];
            }
        }
        out
    }

    /// Upper-left 2x2 block.
    pub fn planar(&self) -> Strain2 {
        Strain2 {
            m: [[self.m[0][0], self.m[0][1]], [self.m[1][0], self.m[1][1]]],
        }
    }

    /// Out-of-plane components `(e13, e23, e33)`, matching the argument order
    /// of [`mix`].
    pub fn out_of_plane(&self) -> [f64; 3] {
        [self.m[0][2], self.m[1][2], self.m[2][2]]
    }
}

impl Strain2 {
    pub const ZERO: Strain2 = Strain2 { m: [[0.0; 2]; 2] };

    pub fn new(e11: f64, e22: f64, e12: f64) -> Self {
        Strain2 { m: [[e11, e12], [e12, e22]] }
    }

    pub fn identity() -> Self {
        Strain2::new(1.0, 1.0, 0.0)
    }

    pub fn from_mandel(v: &[f64; 3]) -> Self {
        Strain2::new(v[0], v[1], v[2] / SQRT2)
    }

    pub fn mandel(&self) -> [f64; 3] {
        [self.m[0][0], self.m[1][1], SQRT2 * self.m[0][1]]
    }

    pub fn ddot(&self, other: &Strain2) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += self.m[i][j] * other.m[i][j];
            }
        }
        s
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn scaled(&self, factor: f64) -> Strain2 {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|v| *v *= factor);
        out
    }

    pub fn add(&self, other: &Strain2) -> Strain2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] += other.m[i][j];
            }
        }
        out
    }
}

/// Embeds a planar strain and three out-of-plane components into a 3x3
/// strain: `[[x11, x12, o1], [x12, x22, o2], [o1, o2, o3]]`.
pub fn mix(planar: &Strain2, out_of_plane: &[f64; 3]) -> Strain3 {
    let p = &planar.m;
    let o = out_of_plane;
    Strain3 {
        m: [[p[0][0], p[0][1], o[0]], [p[1][0], p[1][1], o[1]], [o[0], o[1], o[2]]],
    }
}

/// Fourth-order tensor acting on symmetric 3x3 matrices.
///
/// The full `3x3x3x3` array is kept so that symmetry defects of user input can
/// be measured; construction does not symmetrize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor4 {
    pub entries: [[[[f64; 3]; 3]; 3]; 3],
}

/// Outcome of [`validate_tensor`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorReport {
    /// Largest violation of `T_ijkl = T_klij`.
    pub major_defect: f64,
    /// Largest violation of `T_ijkl = T_jikl` or `T_ijkl = T_ijlk`.
    pub minor_defect: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl TensorReport {
    pub fn symmetry_defect(&self) -> f64 {
        self.major_defect.max(self.minor_defect)
    }

    pub fn is_valid(&self) -> bool {
        self.symmetry_defect() <= SYMMETRY_TOLERANCE && self.min_eigenvalue >= DEFINITENESS_TOLERANCE
    }
}

impl SymTensor4 {
    pub fn zero() -> Self {
        SymTensor4 { entries: [[[[0.0; 3]; 3]; 3]; 3] }
    }

    /// `T_ijkl = (d_ik d_jl + d_il d_jk) / 2`, the identity on symmetric matrices.
    pub fn identity() -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let a = if i == k && j == l { 0.5 } else { 0.0 };
                        let b = if i == l && j == k { 0.5 } else { 0.0 };
                        t.entries[i][j][k][l] = a + b;
                    }
                }
            }
        }
        t
    }

    /// Expands a 6x6 Mandel matrix into a tensor with all symmetries.
    pub fn from_mandel(v: &[[f64; 6]; 6]) -> Self {
        let mut t = Self::zero();
        for (a, &(i, j)) in MANDEL_PAIRS.iter().enumerate() {
            for (b, &(k, l)) in MANDEL_PAIRS.iter().enumerate() {
                let value = v[a][b] / (mandel_weight(a) * mandel_weight(b));
                for (p, q) in [(i, j), (j, i)] {
                    for (r, s) in [(k, l), (l, k)] {
                        t.entries[p][q][r][s] = value;
                    }
                }
            }
        }
        t
    }

    /// The 6x6 Mandel matrix read from the canonical index pairs.
    pub fn mandel(&self) -> [[f64; 6]; 6] {
        let mut v = [[0.0; 6]; 6];
        for (a, &(i, j)) in MANDEL_PAIRS.iter().enumerate() {
            for (b, &(k, l)) in MANDEL_PAIRS.iter().enumerate() {
                v[a][b] = mandel_weight(a) * mandel_weight(b) * self.entries[i][j][k][l];
            }
        }
        v
    }

    /// Contraction `(T A)_ij = T_ijkl A_kl`.
    pub fn apply(&self, a: &Strain3) -> Strain3 {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        s += self.entries[i][j][k][l] * a.m[k][l];
                    }
                }
                out[i][j] = s;
            }
        }
        Strain3 { m: out }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = *self;
        t.entries.iter_mut().flatten().flatten().flatten().for_each(|v| *v *= factor);
        t
    }

    /// Rejects tensors that fail symmetry or positive definiteness.
    pub fn validated(self) -> Result<Self> {
        let report = validate_tensor(&self);
        if report.symmetry_defect() > SYMMETRY_TOLERANCE {
            return Err(Error::InvalidTensor(format!(
                "symmetry defect {:e} exceeds {SYMMETRY_TOLERANCE:e}",
                report.symmetry_defect()
            )));
        }
        if report.min_eigenvalue < DEFINITENESS_TOLERANCE {
            return Err(Error::InvalidTensor(format!(
                "minimum Mandel eigenvalue {:e} is below {DEFINITENESS_TOLERANCE:e}",
                report.min_eigenvalue
            )));
        }
        Ok(self)
    }
}

/// Measures symmetry defects and the Mandel eigenvalue range of `t`.
pub fn validate_tensor(t: &SymTensor4) -> TensorReport {
    let e = &t.entries;
    let mut major = 0.0_f64;
    let mut minor = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    major = major.max((e[i][j][k][l] - e[k][l][i][j]).abs());
                    minor = minor.max((e[i][j][k][l] - e[j][i][k][l]).abs());
                    minor = minor.max((e[i][j][k][l] - e[i][j][l][k]).abs());
                }
            }
        }
    }
    // Eigenvalues of the symmetrized Mandel matrix; the defect is reported
    // separately so a slightly asymmetric input still gets a spectrum.
    let m = t.mandel();
    let mut flat = [0.0; 36];
    for a in 0..6 {
        for b in 0..6 {
            flat[6 * a + b] = 0.5 * (m[a][b] + m[b][a]);
        }
    }
    let eig = symmetric_eigenvalues(&flat, 6);
    TensorReport {
        major_defect: major,
        minor_defect: minor,
        min_eigenvalue: eig[0],
        max_eigenvalue: eig[5],
    }
}

/// Isotropic tensor `lambda_lame d_ij d_kl + mu (d_ik d_jl + d_il d_jk)`.
pub fn make_isotropic(lambda_lame: f64, mu: f64) -> Result<SymTensor4> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("shear modulus mu = {mu} must be positive")));
    }
    if !(3.0 * lambda_lame + 2.0 * mu > 0.0) {
        return Err(Error::Domain(format!(
            "bulk condition 3*lambda + 2*mu > 0 fails for lambda = {lambda_lame}, mu = {mu}"
        )));
    }
    let mut t = SymTensor4::zero();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    t.entries[i][j][k][l] =
                        lambda_lame * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                }
            }
        }
    }
    Ok(t)
}

/// `Λ_T(A) = ½ T A : A`.
pub fn quadratic_form(t: &SymTensor4, a: &Strain3) -> f64 {
    0.5 * t.apply(a).ddot(a)
}

/// Weighted 3x3 system governing the out-of-plane components.
///
/// Row `k` tests the stress against `mix(0, e_k)`, which makes the matrix the
/// symmetric Gram matrix `mix(0, e_k) : T mix(0, e_j)`.
fn out_of_plane_block(t: &SymTensor4) -> [[f64; 3]; 3] {
    let mut a = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut ej = [0.0; 3];
        ej[j] = 1.0;
        let stress = t.apply(&mix(&Strain2::ZERO, &ej));
        let tested = stress_tested_out_of_plane(&stress);
        for k in 0..3 {
            a[k][j] = tested[k];
        }
    }
    a
}

/// `S : mix(0, e_k)` for `k = 1, 2, 3`, i.e. `(2 S13, 2 S23, S33)`.
fn stress_tested_out_of_plane(s: &Strain3) -> [f64; 3] {
    [2.0 * s.m[0][2], 2.0 * s.m[1][2], s.m[2][2]]
}

/// Out-of-plane components `λ` minimizing `Λ_C(mix(Ξ, λ))`.
pub fn out_of_plane_minimizer(c: &SymTensor4, xi: &Strain2) -> Result<[f64; 3]> {
    let a = out_of_plane_block(c);
    let rhs = stress_tested_out_of_plane(&c.apply(&mix(xi, &[0.0; 3])));
    let x = solve3(&a, &[-rhs[0], -rhs[1], -rhs[2]])?;
    Ok(x)
}

/// The reduction operator: `mix(Ξ, λ)` with `λ` the out-of-plane minimizer, so
/// that the stress `C · apply_m(C, Ξ)` has vanishing `(i, 3)` entries.
pub fn apply_m(c: &SymTensor4, xi: &Strain2) -> Result<Strain3> {
    Ok(mix(xi, &out_of_plane_minimizer(c, xi)?))
}

/// Symmetric linear map on planar strains in Mandel form `(11, 22, 12)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedTensor {
    pub voigt3: [[f64; 3]; 3],
}

impl ReducedTensor {
    pub fn apply(&self, xi: &Strain2) -> Strain2 {
        let v = xi.mandel();
        let mut out = [0.0; 3];
        for a in 0..3 {
            out[a] = (0..3).map(|b| self.voigt3[a][b] * v[b]).sum();
        }
        Strain2::from_mandel(&out)
    }

    /// `R Ξ : Ξ`.
    pub fn energy_density2(&self, xi: &Strain2) -> f64 {
        self.apply(xi).ddot(xi)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut flat = [0.0; 9];
        for a in 0..3 {
            flat[3 * a..3 * a + 3].copy_from_slice(&self.voigt3[a]);
        }
        symmetric_eigenvalues(&flat, 3)
    }
}

fn planar_mandel_basis(index: usize) -> Strain2 {
    let mut v = [0.0; 3];
    v[index] = 1.0;
    Strain2::from_mandel(&v)
}

/// The reduced (plane-stress type) tensor `Ξ ↦ planar block of C M Ξ`.
pub fn reduced_tensor(c: &SymTensor4) -> Result<ReducedTensor> {
    let mut voigt3 = [[0.0; 3]; 3];
    for b in 0..3 {
        let stress = c.apply(&apply_m(c, &planar_mandel_basis(b))?).planar();
        let col = stress.mandel();
        for a in 0..3 {
            voigt3[a][b] = col[a];
        }
    }
    symmetrize3(&mut voigt3);
    Ok(ReducedTensor { voigt3 })
}

/// `Ξ ↦ planar block of T mix(Ξ, 0)`, without out-of-plane relaxation.
pub fn planar_restriction(t: &SymTensor4) -> ReducedTensor {
    let mut voigt3 = [[0.0; 3]; 3];
    for b in 0..3 {
        let stress = t.apply(&mix(&planar_mandel_basis(b), &[0.0; 3])).planar();
        let col = stress.mandel();
        for a in 0..3 {
            voigt3[a][b] = col[a];
        }
    }
    symmetrize3(&mut voigt3);
    ReducedTensor { voigt3 }
}

fn symmetrize3(m: &mut [[f64; 3]; 3]) {
    for a in 0..3 {
        for b in a + 1..3 {
            let avg = 0.5 * (m[a][b] + m[b][a]);
            m[a][b] = avg;
            m[b][a] = avg;
        }
    }
}

/// True iff `|T_i3kl| ≤ 1e-14` for every `i` and planar `k, l`.
pub fn check_planar_condition(t: &SymTensor4) -> bool {
    for i in 0..3 {
        for k in 0..2 {
            for l in 0..2 {
                if t.entries[i][2][k][l].abs() > PLANAR_TOLERANCE
                    || t.entries[2][i][k][l].abs() > PLANAR_TOLERANCE
                {
                    return false;
                }
            }
        }
    }
    true
}

/// Thickness rescaling of a strain: `(i, 3)` entries divided by `eps`, the
/// `(3, 3)` entry by `eps²`, planar block unchanged.
pub fn rescale_strain(e: &Strain3, eps: f64) -> Result<Strain3> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("thickness parameter eps = {eps} must be positive")));
    }
    Ok(rescale_strain_unchecked(e, eps))
}

/// [`rescale_strain`] for callers that validated `eps` once up front.
pub fn rescale_strain_unchecked(e: &Strain3, eps: f64) -> Strain3 {
    let mut out = *e;
    for i in 0..2 {
        out.m[i][2] /= eps;
        out.m[2][i] /= eps;
    }
    out.m[2][2] /= eps * eps;
    out
}

/// Time samples of a strain-valued path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrainTrajectory<S> {
    times: Vec<f64>,
    values: Vec<S>,
}

impl<S> StrainTrajectory<S> {
    pub fn new(times: Vec<f64>, values: Vec<S>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} time stamps but {} strain samples",
                times.len(),
                values.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::Domain("empty strain trajectory".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("time stamps must be strictly increasing".into()));
        }
        Ok(StrainTrajectory { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Output of [`mve_evolve`]: the 3x3 strain path and, per step, the
/// out-of-plane stress residual re-evaluated at the step midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscoelasticReduction {
    pub strains: StrainTrajectory<Strain3>,
    pub midpoint_residuals: Vec<f64>,
}

/// Largest midpoint residual accepted by [`mve_evolve`], relative to the
/// stress magnitude of the step.
pub const MVE_RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Visco-elastic reduction of a planar strain path.
///
/// Returns `Υ(t) = mix(Ξ(t), λ(t))` where the out-of-plane components follow
/// the linear ODE `(C Υ + D Υ')_{i3} = 0`, integrated by the implicit
/// midpoint rule on the time grid of `xi`. `lambda0 = None` starts from the
/// elastic minimizer at `Ξ(0)`.
pub fn mve_evolve(
    c: &SymTensor4,
    d: &SymTensor4,
    xi: &StrainTrajectory<Strain2>,
    lambda0: Option<[f64; 3]>,
) -> Result<ViscoelasticReduction> {
    let a_c = out_of_plane_block(c);
    let a_d = out_of_plane_block(d);
    let forcing = |t: &SymTensor4, x: &Strain2| stress_tested_out_of_plane(&t.apply(&mix(x, &[0.0; 3])));

    let mut lambda = match lambda0 {
        Some(l) => l,
        None => out_of_plane_minimizer(c, &xi.values[0])?,
    };
    let mut out = Vec::with_capacity(xi.len());
    let mut residuals = Vec::with_capacity(xi.len().saturating_sub(1));
    out.push(mix(&xi.values[0], &lambda));

    for n in 0..xi.len() - 1 {
        let dt = xi.times[n + 1] - xi.times[n];
        let x0 = &xi.values[n];
        let x1 = &xi.values[n + 1];
        let x_mid = x0.add(x1).scaled(0.5);
        let x_rate = x1.add(&x0.scaled(-1.0)).scaled(1.0 / dt);
        let b_c = forcing(c, &x_mid);
        let b_d = forcing(d, &x_rate);

        // (A_D/dt + A_C/2) λ1 = (A_D/dt - A_C/2) λ0 - b_C(Ξ_mid) - b_D(Ξ')
        let mut lhs = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for k in 0..3 {
            for j in 0..3 {
                lhs[k][j] = a_d[k][j] / dt + 0.5 * a_c[k][j];
                rhs[k] += (a_d[k][j] / dt - 0.5 * a_c[k][j]) * lambda[j];
            }
            rhs[k] -= b_c[k] + b_d[k];
        }
        let next = solve3(&lhs, &rhs)
            .map_err(|e| Error::Singular(format!("viscous out-of-plane block: {e}")))?;

        let lambda_mid = [
            0.5 * (lambda[0] + next[0]),
            0.5 * (lambda[1] + next[1]),
            0.5 * (lambda[2] + next[2]),
        ];
        let lambda_rate = [
            (next[0] - lambda[0]) / dt,
            (next[1] - lambda[1]) / dt,
            (next[2] - lambda[2]) / dt,
        ];
        let stress = c
            .apply(&mix(&x_mid, &lambda_mid))
            .add(&d.apply(&mix(&x_rate, &lambda_rate)));
        let r = stress_tested_out_of_plane(&stress);
        let scale = c.apply(&mix(&x_mid, &lambda_mid)).norm()
            + d.apply(&mix(&x_rate, &lambda_rate)).norm()
            + f64::MIN_POSITIVE;
        let residual = libm::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
        if residual > MVE_RESIDUAL_TOLERANCE * scale.max(1.0) {
            return Err(Error::Singular(format!(
                "midpoint residual {residual:e} at step {n} exceeds tolerance"
            )));
        }
        residuals.push(residual);
        lambda = next;
        out.push(mix(x1, &lambda));
    }
    Ok(ViscoelasticReduction {
        strains: StrainTrajectory::new(xi.times.clone(), out)?,
        midpoint_residuals: residuals,
    })
}
