//! Run configuration, read from TOML or JSON.

use std::fs;
use std::path::Path;

use adhesive_plate_core::assembly::ModelVariant;
use adhesive_plate_core::energetics::{ModelParams, Profile};
use adhesive_plate_core::stepper::{Newmark, SchemeConfig};
use adhesive_plate_core::tensor::{make_isotropic, SymTensor4};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub material: MaterialConfig,
    pub params: ModelParams,
    #[serde(default)]
    pub loads: LoadsConfig,
    pub scheme: SchemeSection,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub nu_study: Option<NuStudyConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub elasticity: TensorSpec,
    pub viscosity: TensorSpec,
}

/// A fourth-order tensor given by Lamé constants or by a 6×6 Voigt matrix
/// in the order (11, 22, 33, 23, 13, 12) acting on engineering strains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TensorSpec {
    Isotropic { lambda: f64, mu: f64 },
    Voigt { matrix: [[f64; 6]; 6] },
}

impl TensorSpec {
    pub fn tensor(&self) -> Result<SymTensor4, ConfigError> {
        let t = match self {
            TensorSpec::Isotropic { lambda, mu } => make_isotropic(*lambda, *mu)?,
            TensorSpec::Voigt { matrix } => {
                let mut mandel = [[0.0; 6]; 6];
                let w = |i: usize| if i < 3 { 1.0 } else { std::f64::consts::SQRT_2 };
                for i in 0..6 {
                    for j in 0..6 {
                        mandel[i][j] = matrix[i][j] * w(i) * w(j);
                    }
                }
                SymTensor4::from_mandel(&mandel)
            }
        };
        Ok(t.validated()?)
    }
}

/// Loading: a uniform volume force with time profile `force_profile` and a
/// Dirichlet pull `s(t) W` on the faces `x1 = ±1`, where
///
/// ```text
/// W = a · ((x1/2)(1 + g (x2 − ½)) − h x1 x3,  0,  h x1²/2)
/// ```
///
/// with `a = pull_amplitude`, `g = pull_gradient`, `h = pull_rotation`. The
/// field is of Kirchhoff-Love form and continuous across the interface.
/// Profiles are polynomial coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadsConfig {
    #[serde(default)]
    pub force: [f64; 3],
    #[serde(default)]
    pub force_profile: Vec<f64>,
    #[serde(default)]
    pub pull_amplitude: f64,
    #[serde(default)]
    pub pull_gradient: f64,
    #[serde(default)]
    pub pull_rotation: f64,
    #[serde(default)]
    pub pull_profile: Vec<f64>,
}

impl Default for LoadsConfig {
    fn default() -> Self {
        LoadsConfig {
            force: [0.0; 3],
            force_profile: Vec::new(),
            pull_amplitude: 0.0,
            pull_gradient: 0.0,
            pull_rotation: 0.0,
            pull_profile: Vec::new(),
        }
    }
}

impl LoadsConfig {
    pub fn force_profile(&self) -> Profile {
        Profile::new(self.force_profile.clone())
    }

    pub fn pull_profile(&self) -> Profile {
        Profile::new(self.pull_profile.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Physical3d,
    Rescaled3d,
    LimitUndamped,
    LimitDamped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub variant: VariantName,
    /// Thickness parameter of the rescaled variant.
    #[serde(default)]
    pub eps: Option<f64>,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default = "default_competitors")]
    pub competitor_count: usize,
    #[serde(default = "default_newton")]
    pub max_newton_iterations: usize,
    /// Number of trajectory points at which the semistability audit runs.
    #[serde(default = "default_audit_points")]
    pub audit_points: usize,
}

fn default_solver_tol() -> f64 {
    1e-10
}

fn default_competitors() -> usize {
    100
}

fn default_newton() -> usize {
    50
}

fn default_audit_points() -> usize {
    10
}

impl SchemeSection {
    pub fn variant(&self) -> Result<ModelVariant, ConfigError> {
        Ok(match self.variant {
            VariantName::Physical3d => ModelVariant::Physical3D,
            VariantName::Rescaled3d => {
                let eps = self.eps.ok_or_else(|| ConfigError::field("scheme.eps", "required for rescaled3d"))?;
                if !(eps > 0.0) {
                    return Err(ConfigError::field("scheme.eps", format!("must be positive, got {eps}")));
                }
                ModelVariant::Rescaled3D { eps }
            }
            VariantName::LimitUndamped => ModelVariant::LimitUndamped,
            VariantName::LimitDamped => ModelVariant::LimitDamped,
        })
    }

    pub fn scheme(&self, variant: ModelVariant) -> SchemeConfig {
        SchemeConfig {
            dt: self.dt,
            t_final: self.t_final,
            variant,
            newmark: Newmark::AVERAGE_ACCELERATION,
            solver_tol: self.solver_tol,
            competitor_count: self.competitor_count,
            max_newton_iterations: self.max_newton_iterations,
        }
    }
}

/// `value(ε) = limit + coeff · ε^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingRule {
    pub limit: f64,
    #[serde(default)]
    pub coeff: f64,
    #[serde(default = "one")]
    pub power: f64,
}

fn one() -> f64 {
    1.0
}

impl ScalingRule {
    pub fn constant(limit: f64) -> Self {
        ScalingRule { limit, coeff: 0.0, power: 1.0 }
    }

    pub fn at(&self, eps: f64) -> f64 {
        self.limit + self.coeff * eps.powf(self.power)
    }
}

/// How the viscosity of the rescaled slab depends on the thickness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViscosityRule {
    /// `D_eps = eps^delta · D*`, which vanishes in the limit.
    Vanishing,
    /// `D_eps = D / eps`, which leaves the damped plate in the limit.
    InverseThickness,
}

/// Thickness family for the dimension-reduction studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub eps_list: Vec<f64>,
    #[serde(default = "one")]
    pub delta: f64,
    pub viscosity_rule: ViscosityRule,
    pub rho: ScalingRule,
    pub a0: ScalingRule,
    pub a1: ScalingRule,
    pub b: ScalingRule,
    pub nu: ScalingRule,
}

impl FamilyConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.eps_list.is_empty() {
            return Err(ConfigError::field("family.eps_list", "must not be empty"));
        }
        if self.eps_list.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(ConfigError::field("family.eps_list", "entries must be positive"));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ConfigError::field("family.eps_list", "must be strictly decreasing"));
        }
        if !(0.0..=3.0).contains(&self.delta) {
            return Err(ConfigError::field("family.delta", format!("must lie in [0, 3], got {}", self.delta)));
        }
        for (name, rule) in [("rho", self.rho), ("a0", self.a0), ("a1", self.a1), ("b", self.b), ("nu", self.nu)] {
            if !rule.limit.is_finite() || !rule.coeff.is_finite() || !rule.power.is_finite() {
                return Err(ConfigError::field(format!("family.{name}"), "limit, coeff and power must be finite"));
            }
        }
        Ok(())
    }

    /// Parameters of the slab at thickness `eps`.
    pub fn params_at(&self, base: &ModelParams, eps: f64) -> ModelParams {
        ModelParams {
            rho: self.rho.at(eps),
            a0: self.a0.at(eps),
            a1: self.a1.at(eps),
            b: self.b.at(eps),
            nu: self.nu.at(eps),
            ..*base
        }
    }

    pub fn limit_params(&self, base: &ModelParams) -> ModelParams {
        ModelParams {
            rho: self.rho.limit,
            a0: self.a0.limit,
            a1: self.a1.limit,
            b: self.b.limit,
            nu: self.nu.limit,
            ..*base
        }
    }
}

/// Viscosity levels of the vanishing-viscosity study; the damping tensor of
/// each run is `value · material.viscosity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuStudyConfig {
    pub values: Vec<f64>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if is_json { Self::from_json(&text)? } else { Self::from_toml(&text)? };
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let MeshConfig { nx, ny, nz } = self.mesh;
        if nx < 2 || nx % 2 != 0 {
            return Err(ConfigError::field("mesh.nx", format!("must be even and at least 2, got {nx}")));
        }
        if ny == 0 {
            return Err(ConfigError::field("mesh.ny", "must be at least 1"));
        }
        if nz == 0 {
            return Err(ConfigError::field("mesh.nz", "must be at least 1"));
        }
        self.params.validate().map_err(|e| ConfigError::field("params", e.to_string()))?;
        self.material.elasticity.tensor().map_err(|e| ConfigError::field("material.elasticity", e.to_string()))?;
        self.material.viscosity.tensor().map_err(|e| ConfigError::field("material.viscosity", e.to_string()))?;
        let variant = self.scheme.variant()?;
        self.scheme
            .scheme(variant)
            .validate()
            .map_err(|e| ConfigError::field("scheme", e.to_string()))?;
        if let Some(f) = &self.family {
            f.validate()?;
        }
        if let Some(n) = &self.nu_study {
            if n.values.is_empty() || n.values.iter().any(|&v| !(v > 0.0)) {
                return Err(ConfigError::field("nu_study.values", "must be a non-empty list of positive numbers"));
            }
        }
        Ok(())
    }
}
