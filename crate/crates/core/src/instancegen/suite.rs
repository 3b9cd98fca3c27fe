use serde::{Deserialize, Serialize};

use super::{
    generate_terrain, place_endpoints, place_threats, DensityClass, EndpointConfig, Instance,
    InstanceError, TerrainParams, ThreatSampling,
};
use crate::seeding::derive_seed;

/// Cost parameters and sampling rules stamped into every generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub cell_length: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub uav_diameter: f64,
    /// Danger margin as a fraction of the terrain extent.
    pub danger_margin_fraction: f64,
    pub j_pen: f64,
    pub weights: [f64; 4],
    pub beta_turn: f64,
    pub beta_climb: f64,
    /// Threat radius range as fractions of the terrain extent.
    pub radius_fraction: [f64; 2],
    /// Threat height range; `None` means `[h_min, 3 * h_max]`.
    pub height_range: Option<[f64; 2]>,
    pub corner_fraction: f64,
    pub max_attempts: usize,
    pub endpoint_candidates: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            cell_length: 1.0,
            h_min: 20.0,
            h_max: 120.0,
            uav_diameter: 1.0,
            danger_margin_fraction: 0.05,
            j_pen: 1e4,
            weights: [5.0, 1.0, 10.0, 1.0],
            beta_turn: 1.0,
            beta_climb: 1.0,
            radius_fraction: [0.03, 0.08],
            height_range: None,
            corner_fraction: 0.1,
            max_attempts: 10_000,
            endpoint_candidates: 1024,
        }
    }
}

/// (initial_roughness, roughness_variation, seed) for the shipped terrains.
/// The first four reproduce the parameter combinations of the reference
/// figure of the benchmark.
const CURATED: [(f64, f64, u64); 28] = [
    (-60.0, 300.0, 13),
    (-20.0, 300.0, 3),
    (-60.0, 60.0, 18),
    (60.0, -60.0, 18),
    (-40.0, 300.0, 5),
    (-40.0, 150.0, 21),
    (-20.0, 60.0, 7),
    (-20.0, -60.0, 11),
    (20.0, 300.0, 2),
    (20.0, 150.0, 9),
    (20.0, 60.0, 14),
    (20.0, -60.0, 27),
    (40.0, 300.0, 31),
    (40.0, 150.0, 4),
    (40.0, 60.0, 16),
    (40.0, -60.0, 22),
    (60.0, 300.0, 8),
    (60.0, 150.0, 12),
    (60.0, 60.0, 25),
    (-60.0, 150.0, 6),
    (-60.0, -60.0, 19),
    (-40.0, 60.0, 1),
    (-40.0, -60.0, 29),
    (-20.0, 150.0, 17),
    (30.0, 0.0, 10),
    (-30.0, 0.0, 23),
    (50.0, 200.0, 15),
    (-50.0, -150.0, 26),
];

/// The shipped list of 28 terrain parameter sets.
pub fn default_terrain_params() -> Vec<TerrainParams> {
    CURATED
        .iter()
        .map(|&(r, rr, seed)| TerrainParams {
            iterations: 9,
            mesh_size: 900,
            initial_elevation: 100.0,
            initial_roughness: r,
            roughness_variation: rr,
            seed,
        })
        .collect()
}

pub fn build_suite(
    terrain_params: &[TerrainParams],
    densities: &[usize],
    seed: u64,
) -> Result<Vec<Instance<f64>>, InstanceError> {
    build_suite_with(terrain_params, densities, seed, &SuiteConfig::default())
}

/// Generates one instance per (terrain, threat count), terrain-major.
/// Instance ids read `t<terrain index, 1-based>-n<threat count>`.
pub fn build_suite_with(
    terrain_params: &[TerrainParams],
    densities: &[usize],
    seed: u64,
    cfg: &SuiteConfig,
) -> Result<Vec<Instance<f64>>, InstanceError> {
    if terrain_params.is_empty() {
        return Err(InstanceError::InvalidParams("terrain parameter list is empty".into()));
    }
    if !(cfg.h_min < cfg.h_max) {
        return Err(InstanceError::InvalidParams("h_min must be below h_max".into()));
    }
    let mut out = Vec::with_capacity(terrain_params.len() * densities.len());
    for (t_idx, params) in terrain_params.iter().enumerate() {
        let mut terrain = generate_terrain(params)
            .map_err(|e| e.with_id(&format!("t{:02}", t_idx + 1)))?;
        terrain.cell_length = cfg.cell_length;
        let extent = terrain.extent();
        let danger_margin = cfg.danger_margin_fraction * extent;
        let clearance = cfg.uav_diameter + danger_margin;
        let sampling = ThreatSampling {
            radius_range: [cfg.radius_fraction[0] * extent, cfg.radius_fraction[1] * extent],
            height_range: cfg.height_range.unwrap_or([cfg.h_min, 3.0 * cfg.h_max]),
            clearance,
            corner_fraction: cfg.corner_fraction,
            max_attempts: cfg.max_attempts,
        };
        let endpoint_cfg = EndpointConfig {
            corner_fraction: cfg.corner_fraction,
            clearance,
            altitude: 0.5 * (cfg.h_min + cfg.h_max),
            random_candidates: cfg.endpoint_candidates,
        };
        for &count in densities {
            let id = format!("t{:02}-n{}", t_idx + 1, count);
            let labels = [t_idx as u64, count as u64];
            let threats = place_threats(&terrain, count, &sampling, derive_seed(seed, &[1, labels[0], labels[1]]))
                .map_err(|e| e.with_id(&id))?;
            let (start, goal) = place_endpoints(
                &terrain,
                &threats,
                &endpoint_cfg,
                derive_seed(seed, &[2, labels[0], labels[1]]),
            )
            .map_err(|e| e.with_id(&id))?;
            let inst = Instance {
                id,
                terrain: terrain.clone(),
                threats,
                start,
                goal,
                h_min: cfg.h_min,
                h_max: cfg.h_max,
                uav_diameter: cfg.uav_diameter,
                danger_margin,
                j_pen: cfg.j_pen,
                weights: cfg.weights,
                beta_turn: cfg.beta_turn,
                beta_climb: cfg.beta_climb,
                density_class: DensityClass::for_threat_count(count),
            };
            inst.validate().map_err(|e| e.with_id(&inst.id))?;
            out.push(inst);
        }
    }
    Ok(out)
}
