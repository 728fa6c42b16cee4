//! The `simulate` pipeline: run, certify, write artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use adhesive_plate_core::stepper::{
    adhesion_violations, verify_energy_balance, verify_semistability, Trajectory, SEMISTABILITY_TOLERANCE,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::SimError;
use crate::problem::{Problem, RunSpec};
use crate::report::{write_checkpoints, write_trajectory_csv, BalanceSummary, Certification, SemistabilitySummary};

pub struct SimulationOutcome {
    pub trajectory: Trajectory,
    pub certification: Certification,
    pub files: Vec<PathBuf>,
}

/// `count` state indices spread evenly over `0..=last`, both ends included.
pub fn audit_indices(last: usize, count: usize) -> Vec<usize> {
    match count {
        0 => Vec::new(),
        1 => vec![last],
        _ => {
            let mut idx: Vec<usize> =
                (0..count).map(|k| ((k * last) as f64 / (count - 1) as f64).round() as usize).collect();
            idx.dedup();
            idx
        }
    }
}

/// Runs the configured system from rest and certifies the trajectory: the
/// energy-dissipation balance, the semistability audit at
/// `scheme.audit_points` states, and admissibility of the adhesion history.
pub fn simulate(cfg: &RunConfig, seed: u64) -> Result<(Problem, Trajectory, Certification), SimError> {
    let spec = RunSpec::from_config(cfg)?;
    let problem = Problem::build(cfg, &spec)?;
    let trajectory = problem.run()?;

    let balance = verify_energy_balance(&trajectory);
    let scale = balance.scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = audit_indices(trajectory.states.len() - 1, cfg.scheme.audit_points);
    let mut min_margin = f64::INFINITY;
    for &i in &indices {
        let m = verify_semistability(
            &problem.forms,
            &problem.params,
            &trajectory.states[i],
            cfg.scheme.competitor_count,
            &mut rng,
        )?;
        min_margin = min_margin.min(m);
    }
    let semistability = SemistabilitySummary {
        audit_times: indices.iter().map(|&i| trajectory.states[i].t).collect(),
        competitors: cfg.scheme.competitor_count,
        min_margin,
        tolerance: SEMISTABILITY_TOLERANCE,
        passed: indices.is_empty() || min_margin >= -SEMISTABILITY_TOLERANCE * scale,
    };
    let violations = adhesion_violations(&trajectory.states);
    let certification = Certification::new(BalanceSummary::from(&balance), Some(semistability), Some(violations));
    Ok((problem, trajectory, certification))
}

/// [`simulate`] followed by writing `trajectory.csv`, checkpoint JSONs at
/// the audited states and `certification.json` into `out_dir`.
pub fn run_simulation(cfg: &RunConfig, seed: u64, out_dir: &Path) -> Result<SimulationOutcome, SimError> {
    let (_, trajectory, certification) = simulate(cfg, seed)?;
    fs::create_dir_all(out_dir).map_err(|e| SimError::Io(out_dir.display().to_string(), e))?;
    let csv_path = out_dir.join("trajectory.csv");
    let file = fs::File::create(&csv_path).map_err(|e| SimError::Io(csv_path.display().to_string(), e))?;
    write_trajectory_csv(&trajectory.records, file)?;
    let indices = audit_indices(trajectory.states.len() - 1, cfg.scheme.audit_points);
    let states: Vec<_> = indices.iter().map(|&i| (i, &trajectory.states[i])).collect();
    let mut files = vec![csv_path];
    files.extend(write_checkpoints(&states, out_dir)?);
    let cert_path = out_dir.join("certification.json");
    fs::write(&cert_path, certification.to_json()).map_err(|e| SimError::Io(cert_path.display().to_string(), e))?;
    files.push(cert_path);
    Ok(SimulationOutcome { trajectory, certification, files })
}

#[cfg(test)]
mod tests {
    use super::audit_indices;

    #[test]
    fn audit_indices_cover_both_ends() {
        assert_eq!(audit_indices(100, 3), vec![0, 50, 100]);
        assert_eq!(audit_indices(100, 10).len(), 10);
        assert_eq!(audit_indices(2, 10), vec![0, 1, 2]);
        assert!(audit_indices(5, 0).is_empty());
    }
}
