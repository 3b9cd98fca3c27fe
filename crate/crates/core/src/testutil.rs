use crate::geometry::Point3;
use crate::instancegen::{DensityClass, Instance, TerrainGrid};

/// Threat-free flat instance with start and goal at opposite corners,
/// 70 units above the ground.
pub(crate) fn flat_instance(size: usize, ground: f64) -> Instance<f64> {
    let extent = (size - 1) as f64;
    Instance {
        id: "flat".into(),
        terrain: TerrainGrid::flat(size, 1.0, ground),
        threats: vec![],
        start: Point3::new(0.0, 0.0, ground + 70.0),
        goal: Point3::new(extent, extent, ground + 70.0),
        h_min: 20.0,
        h_max: 120.0,
        uav_diameter: 1.0,
        danger_margin: 5.0,
        j_pen: 1e4,
        weights: [5.0, 1.0, 10.0, 1.0],
        beta_turn: 1.0,
        beta_climb: 1.0,
        density_class: DensityClass::Low,
    }
}
