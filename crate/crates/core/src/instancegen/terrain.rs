use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::InstanceError;
use crate::scalar::Scalar;
use crate::seeding::{derive_seed, rng_from_seed, Rng};

/// Refinement steps beyond this produce lattices over 16k nodes per side.
pub const MAX_ITERATIONS: u32 = 14;

/// Side of the coarse lattice used for the roughness modulation field.
const MODULATION_LATTICE: usize = 5;

/// Inputs of the midpoint-displacement terrain generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainParams {
    /// Number of diamond-square refinement steps.
    pub iterations: u32,
    /// Grid nodes per side of the output mesh.
    #[serde(default = "default_mesh_size")]
    pub mesh_size: usize,
    pub initial_elevation: f64,
    /// Displacement amplitude of the first refinement step; its sign flips
    /// the displacement pattern, its magnitude sets the relief.
    pub initial_roughness: f64,
    /// Strength of the spatial modulation of the roughness. Zero gives
    /// uniform roughness; the sign selects which regions get rougher.
    pub roughness_variation: f64,
    pub seed: u64,
}

fn default_mesh_size() -> usize {
    900
}

impl TerrainParams {
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.mesh_size < 2 {
            return Err(InstanceError::InvalidParams(format!(
                "mesh_size must be at least 2, got {}",
                self.mesh_size
            )));
        }
        if self.iterations > MAX_ITERATIONS {
            return Err(InstanceError::InvalidParams(format!(
                "iterations must be at most {MAX_ITERATIONS}, got {}",
                self.iterations
            )));
        }
        for (name, v) in [
            ("initial_elevation", self.initial_elevation),
            ("initial_roughness", self.initial_roughness),
            ("roughness_variation", self.roughness_variation),
        ] {
            if !v.is_finite() {
                return Err(InstanceError::InvalidParams(format!("{name} is not finite")));
            }
        }
        Ok(())
    }
}

/// Square elevation map. Node `(i, j)` sits at world position
/// `(i * cell_length, j * cell_length)` and its height is stored at
/// `heights[i * size + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct TerrainGrid<T> {
    pub size: usize,
    pub cell_length: T,
    pub heights: Vec<T>,
}

impl<T: Scalar> TerrainGrid<T> {
    pub fn flat(size: usize, cell_length: T, height: T) -> Self {
        Self {
            size,
            cell_length,
            heights: vec![height; size * size],
        }
    }

    /// Side length of the square world covered by the grid.
    pub fn extent(&self) -> T {
        T::lit((self.size.max(1) - 1) as f64) * self.cell_length
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> T {
        self.heights[i * self.size + j]
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        let e = self.extent();
        x >= T::zero() && x <= e && y >= T::zero() && y <= e
    }

    /// Bilinear interpolation of the terrain elevation; exact at grid nodes.
    pub fn height_at(&self, x: T, y: T) -> Result<T, InstanceError> {
        if !self.contains(x, y) {
            return Err(InstanceError::OutOfBounds {
                x: x.as_f64(),
                y: y.as_f64(),
                extent: self.extent().as_f64(),
            });
        }
        Ok(self.height_at_clamped(x, y))
    }

    /// Same as [`height_at`](Self::height_at) but clamps the query into the
    /// terrain instead of failing.
    pub fn height_at_clamped(&self, x: T, y: T) -> T {
        let last = self.size - 1;
        let locate = |v: T| -> (usize, usize, T) {
            let g = (v / self.cell_length).max(T::zero());
            let i0 = g.floor().to_usize().unwrap_or(0).min(last);
            let i1 = (i0 + 1).min(last);
            let t = (g - T::lit(i0 as f64)).min(T::one());
            (i0, i1, t)
        };
        let (i0, i1, tx) = locate(x);
        let (j0, j1, ty) = locate(y);
        let (h00, h01, h10, h11) = (
            self.node(i0, j0),
            self.node(i0, j1),
            self.node(i1, j0),
            self.node(i1, j1),
        );
        let v = lerp(lerp(h00, h01, ty), lerp(h10, h11, ty), tx);
        let lo = h00.min(h01).min(h10).min(h11);
        let hi = h00.max(h01).max(h10).max(h11);
        v.max(lo).min(hi)
    }

    pub fn min_max(&self) -> (T, T) {
        self.heights.iter().fold(
            (T::infinity(), T::neg_infinity()),
            |(lo, hi), &h| (lo.min(h), hi.max(h)),
        )
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.size < 2 {
            return Err(InstanceError::Invalid {
                field: "terrain.size",
                reason: format!("must be at least 2, got {}", self.size),
            });
        }
        if !(self.cell_length > T::zero()) || !self.cell_length.is_finite() {
            return Err(InstanceError::Invalid {
                field: "terrain.cell_length",
                reason: "must be positive and finite".into(),
            });
        }
        if self.heights.len() != self.size * self.size {
            return Err(InstanceError::Invalid {
                field: "terrain.heights",
                reason: format!(
                    "expected {} values for a {}x{} grid, got {}",
                    self.size * self.size,
                    self.size,
                    self.size,
                    self.heights.len()
                ),
            });
        }
        if self.heights.iter().any(|h| !h.is_finite()) {
            return Err(InstanceError::Invalid {
                field: "terrain.heights",
                reason: "contains non-finite values".into(),
            });
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> TerrainGrid<U> {
        TerrainGrid {
            size: self.size,
            cell_length: U::lit(self.cell_length.as_f64()),
            heights: self.heights.iter().map(|h| U::lit(h.as_f64())).collect(),
        }
    }
}

#[inline]
fn lerp<T: Scalar>(a: T, b: T, t: T) -> T {
    a + (b - a) * t
}

/// Low-frequency field in (0, 2) scaling the displacement amplitude.
struct RoughnessField {
    lattice: Vec<f64>,
    strength: f64,
}

impl RoughnessField {
    fn new(strength: f64, rng: &mut Rng) -> Self {
        let n = MODULATION_LATTICE;
        let lattice = (0..n * n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Self {
            lattice,
            strength: strength / 100.0,
        }
    }

    /// `u`, `v` in the unit square.
    fn at(&self, u: f64, v: f64) -> f64 {
        if self.strength == 0.0 {
            return 1.0;
        }
        let n = MODULATION_LATTICE;
        let scale = (n - 1) as f64;
        let (gu, gv) = (u * scale, v * scale);
        let i0 = (gu.floor() as usize).min(n - 2);
        let j0 = (gv.floor() as usize).min(n - 2);
        let (tu, tv) = (gu - i0 as f64, gv - j0 as f64);
        let l = |i: usize, j: usize| self.lattice[i * n + j];
        let a = lerp(l(i0, j0), l(i0, j0 + 1), tv);
        let b = lerp(l(i0 + 1, j0), l(i0 + 1, j0 + 1), tv);
        1.0 + (self.strength * lerp(a, b, tu)).tanh()
    }
}

/// Random midpoint displacement (diamond-square) on a `2^n + 1` lattice,
/// resampled bilinearly onto the requested mesh.
pub fn generate_terrain(params: &TerrainParams) -> Result<TerrainGrid<f64>, InstanceError> {
    params.validate()?;
    let mut rng = rng_from_seed(derive_seed(params.seed, &[0x7e22a1]));
    let mut mod_rng = rng_from_seed(derive_seed(params.seed, &[0x40d]));
    let field = RoughnessField::new(params.roughness_variation, &mut mod_rng);

    let n = (1usize << params.iterations) + 1;
    let mut lattice = vec![params.initial_elevation; n * n];
    let inv = 1.0 / (n - 1) as f64;
    let mut step = n - 1;
    let mut amp = params.initial_roughness;
    let displace = |i: usize, j: usize, amp: f64, rng: &mut Rng| -> f64 {
        let m = field.at(i as f64 * inv, j as f64 * inv);
        amp * m * rng.random_range(-1.0..=1.0)
    };
    for _ in 0..params.iterations {
        let half = step / 2;
        // diamond step: square centers
        for i in (half..n).step_by(step) {
            for j in (half..n).step_by(step) {
                let avg = (lattice[(i - half) * n + (j - half)]
                    + lattice[(i - half) * n + (j + half)]
                    + lattice[(i + half) * n + (j - half)]
                    + lattice[(i + half) * n + (j + half)])
                    * 0.25;
                lattice[i * n + j] = avg + displace(i, j, amp, &mut rng);
            }
        }
        // square step: edge midpoints
        for i in (0..n).step_by(half) {
            let start = if (i / half).is_multiple_of(2) { half } else { 0 };
            for j in (start..n).step_by(step) {
                let mut sum = 0.0;
                let mut count = 0.0;
                if i >= half {
                    sum += lattice[(i - half) * n + j];
                    count += 1.0;
                }
                if i + half < n {
                    sum += lattice[(i + half) * n + j];
                    count += 1.0;
                }
                if j >= half {
                    sum += lattice[i * n + j - half];
                    count += 1.0;
                }
                if j + half < n {
                    sum += lattice[i * n + j + half];
                    count += 1.0;
                }
                lattice[i * n + j] = sum / count + displace(i, j, amp, &mut rng);
            }
        }
        step = half;
        amp *= 0.5;
    }

    let coarse = TerrainGrid {
        size: n,
        cell_length: 1.0,
        heights: lattice,
    };
    let size = params.mesh_size;
    let scale = (n - 1) as f64 / (size - 1) as f64;
    let mut heights = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            heights.push(coarse.height_at_clamped(i as f64 * scale, j as f64 * scale));
        }
    }
    Ok(TerrainGrid {
        size,
        cell_length: 1.0,
        heights,
    })
}
