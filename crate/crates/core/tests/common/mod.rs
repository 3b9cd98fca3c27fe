#![allow(dead_code)]

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavbench::instancegen::{build_suite, default_terrain_params};
use uavbench::objective::search_bounds;
use uavbench::Instance;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The 56 shipped instances, generated once per test binary.
pub fn suite() -> &'static [Instance] {
    static SUITE: OnceLock<Vec<Instance>> = OnceLock::new();
    SUITE.get_or_init(|| build_suite(&default_terrain_params(), &[15, 30], 0).expect("shipped suite builds"))
}

pub fn random_vector(inst: &Instance, dv: usize, rng: &mut impl Rng) -> Vec<f64> {
    search_bounds(inst, dv)
        .into_iter()
        .map(|(lo, hi)| rng.random_range(lo..=hi))
        .collect()
}

/// A jittered version of the straight start->goal line, mostly in bounds.
pub fn near_straight_vector(inst: &Instance, dv: usize, rng: &mut impl Rng) -> Vec<f64> {
    let (s, g) = (inst.start, inst.goal);
    let n = (dv + 1) as f64;
    let (dx, dy, dz) = ((g.x - s.x) / n, (g.y - s.y) / n, (g.z - s.z) / n);
    let r = (dx * dx + dy * dy + dz * dz).sqrt();
    let psi = (dz / (dx * dx + dy * dy).sqrt()).atan();
    let phi = dy.atan2(dx);
    let bounds = search_bounds(inst, dv);
    let mut x = Vec::with_capacity(3 * dv);
    for k in 0..dv {
        let jitter = [r * 0.3, 0.3, 0.6];
        for (c, base) in [r, psi, phi].into_iter().enumerate() {
            let (lo, hi) = bounds[3 * k + c];
            let v = base + jitter[c] * rng.random_range(-1.0..1.0);
            x.push(v.clamp(lo, hi));
        }
    }
    x
}

// ---- clean-room path cost -------------------------------------------------

fn ground(inst: &Instance, x: f64, y: f64) -> f64 {
    let t = &inst.terrain;
    let n = t.size;
    let e = t.extent();
    let gx = x.clamp(0.0, e) / t.cell_length;
    let gy = y.clamp(0.0, e) / t.cell_length;
    let i = (gx.floor() as usize).min(n - 2);
    let j = (gy.floor() as usize).min(n - 2);
    let (u, v) = (gx - i as f64, gy - j as f64);
    let h = |a: usize, b: usize| t.heights[a * n + b];
    h(i, j) * (1.0 - u) * (1.0 - v) + h(i + 1, j) * u * (1.0 - v) + h(i, j + 1) * (1.0 - u) * v + h(i + 1, j + 1) * u * v
}

/// Horizontal distance from `(cx, cy)` to segment `a b`: perpendicular
/// distance when the foot lies on the segment, else the nearer endpoint.
fn seg_dist(a: [f64; 3], b: [f64; 3], cx: f64, cy: f64) -> f64 {
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let len = ex.hypot(ey);
    let da = (cx - a[0]).hypot(cy - a[1]);
    let db = (cx - b[0]).hypot(cy - b[1]);
    if len == 0.0 {
        return da;
    }
    let along = ((cx - a[0]) * ex + (cy - a[1]) * ey) / len;
    if along <= 0.0 || along >= len {
        return da.min(db);
    }
    ((cx - a[0]) * ey - (cy - a[1]) * ex).abs() / len
}

pub struct OracleCost {
    pub f: [f64; 4],
    pub total: f64,
}

/// Path cost computed directly from the model definition, default cost
/// options: clamped decoding, endpoint legs checked for threats, endpoints
/// included in the angle terms, finite sentinel altitude penalty.
pub fn oracle_cost(inst: &Instance, x: &[f64]) -> OracleCost {
    let e = inst.terrain.extent();
    let mut nodes = vec![[inst.start.x, inst.start.y, inst.start.z]];
    let mut prev = nodes[0];
    for t in x.chunks(3) {
        let (r, psi, phi) = (t[0], t[1], t[2]);
        let px = (prev[0] + r * psi.cos() * phi.cos()).clamp(0.0, e);
        let py = (prev[1] + r * psi.cos() * phi.sin()).clamp(0.0, e);
        let g = ground(inst, px, py);
        let pz = (prev[2] + r * psi.sin()).clamp(g, g + 2.0 * inst.h_max);
        prev = [px, py, pz];
        nodes.push(prev);
    }
    nodes.push([inst.goal.x, inst.goal.y, inst.goal.z]);

    let f1: f64 = nodes
        .windows(2)
        .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2) + (w[1][2] - w[0][2]).powi(2)).sqrt())
        .sum();

    let mut f2 = 0.0;
    for w in nodes.windows(2) {
        for c in &inst.threats {
            let d = seg_dist(w[0], w[1], c.center_x, c.center_y);
            let collide = inst.uav_diameter + c.radius;
            if d <= collide {
                f2 += inst.j_pen;
            } else if d <= collide + inst.danger_margin {
                f2 += collide + inst.danger_margin - d;
            }
        }
    }

    let mut f3 = 0.0;
    for p in &nodes[1..nodes.len() - 1] {
        let h = p[2] - ground(inst, p[0], p[1]);
        if h < inst.h_min || h > inst.h_max {
            f3 += inst.j_pen;
        } else {
            f3 += (h - 0.5 * (inst.h_min + inst.h_max)).abs();
        }
    }

    let climb: Vec<f64> = nodes
        .windows(2)
        .map(|w| (w[1][2] - w[0][2]).atan2((w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])))
        .collect();
    let mut turn = 0.0;
    let mut climb_change = 0.0;
    for j in 1..nodes.len() - 1 {
        let u = (nodes[j][0] - nodes[j - 1][0], nodes[j][1] - nodes[j - 1][1]);
        let v = (nodes[j + 1][0] - nodes[j][0], nodes[j + 1][1] - nodes[j][1]);
        let (nu, nv) = (u.0.hypot(u.1), v.0.hypot(v.1));
        if nu > 1e-12 && nv > 1e-12 {
            // half-angle form between the unit directions, stable near 0 and pi
            let (a, b) = ((u.0 / nu, u.1 / nu), (v.0 / nv, v.1 / nv));
            turn += 2.0 * (a.0 - b.0).hypot(a.1 - b.1).atan2((a.0 + b.0).hypot(a.1 + b.1));
        }
        climb_change += (climb[j] - climb[j - 1]).abs();
    }
    let f4 = inst.beta_turn * turn + inst.beta_climb * climb_change;

    let f = [f1, f2, f3, f4];
    let total = f.iter().zip(&inst.weights).map(|(v, w)| if *w == 0.0 { 0.0 } else { v * w }).sum();
    OracleCost { f, total }
}

/// Minimum horizontal distance over `n` evenly spaced points of the
/// segment, then over `n` more points spanning the neighbours of the best
/// one.
pub fn sampled_distance(a: (f64, f64), b: (f64, f64), c: (f64, f64), n: usize) -> f64 {
    let at = |t: f64| (a.0 + t * (b.0 - a.0) - c.0).hypot(a.1 + t * (b.1 - a.1) - c.1);
    let scan = |lo: f64, hi: f64| {
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .map(|t| (t, at(t)))
            .fold((0.0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    };
    let step = 1.0 / (n - 1) as f64;
    let (t, coarse) = scan(0.0, 1.0);
    let (_, fine) = scan((t - step).max(0.0), (t + step).min(1.0));
    coarse.min(fine)
}

// ---- brute-force statistics ----------------------------------------------

/// Rank by counting: 1 + (number smaller) + half the number of other ties.
pub fn counting_ranks(row: &[f64]) -> Vec<f64> {
    row.iter()
        .enumerate()
        .map(|(j, &v)| {
            let below = row.iter().filter(|&&w| w < v).count() as f64;
            let tied = row.iter().enumerate().filter(|&(k, &w)| k != j && w == v).count() as f64;
            1.0 + below + 0.5 * tied
        })
        .collect()
}

pub fn brute_friedman(values: &[Vec<f64>]) -> Vec<f64> {
    let k = values[0].len();
    let mut sums = vec![0.0; k];
    for row in values {
        for (s, r) in sums.iter_mut().zip(counting_ranks(row)) {
            *s += r;
        }
    }
    sums.into_iter().map(|s| s / values.len() as f64).collect()
}

/// Two-sided exact signed-rank p-value by enumerating every sign pattern.
pub fn brute_wilcoxon(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|v| *v != 0.0).collect();
    let ranks = counting_ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let total: f64 = ranks.iter().sum();
    let observed: f64 = ranks.iter().zip(&d).filter(|(_, v)| **v > 0.0).map(|(r, _)| r).sum();
    let dev = (2.0 * observed - total).abs();
    let n = d.len();
    let mut extreme = 0u64;
    for mask in 0u32..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (2.0 * w - total).abs() >= dev {
            extreme += 1;
        }
    }
    (extreme as f64 / (1u64 << n) as f64).min(1.0)
}

/// Holm adjustment without sorting: the largest scaled p-value among all
/// hypotheses not rejected later than this one.
pub fn brute_holm(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    p.iter()
        .map(|&pi| {
            p.iter()
                .filter(|&&pj| pj <= pi)
                .map(|&pj| {
                    let position = p.iter().filter(|&&q| q < pj).count();
                    ((m - position) as f64 * pj).min(1.0)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}
