//! `S` on a uniform grid: exact convolution of the kernels with the tensor cubic
//! Lagrange interpolant of cone-masked grid sources.
//!
//! In index units the table entries are
//! `T_K(j) = ∫ K(j - z) B(z) dz` and `T_L(j) = ∫ L(j - z) B(z) dz`,
//! so `(K ∗ f)(x_n) = h² Σ_m f_m T_K(n - m)` and `(L ∗ F)(x_n) = h Σ_m F_m T_L(n - m)`.
//! Tables depend only on the cone and the grid size, not on the spacing.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::Result;
use crate::grid::{dot, norm, ConeSpec, GridSpec, ScalarField, SymTensorField, SYM_PAIRS};
use crate::constraints::{HPiData, VectorField};
use crate::kernels::{cone_exit, KernelProfile, MomentCoefficients};
use crate::quadrature::{gauss_interval, gauss_legendre, CapRule};

/// Entries per offset: six `K` components, then six per `L_{e_k}`.
const W: usize = 24;

/// Offsets with `|j|∞` up to this use the ray form.
const NEAR: i64 = 4;

/// 1D cubic Lagrange cardinal function on the integers.
#[inline]
pub fn cardinal(x: f64) -> f64 {
    let s = x.abs();
    if s <= 1.0 {
        (1.0 - s * s) * (2.0 - s) / 2.0
    } else if s <= 2.0 {
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0
    } else {
        0.0
    }
}

/// Euclidean distance from `p` to the closed cone.
pub fn cone_distance(cone: &ConeSpec, p: [f64; 3]) -> f64 {
    let r = norm(p);
    if r == 0.0 {
        return 0.0;
    }
    let along = dot(p, cone.axis);
    let perp = (r * r - along * along).max(0.0).sqrt();
    let psi = perp.atan2(along);
    if psi <= cone.theta {
        0.0
    } else if psi >= cone.theta + std::f64::consts::FRAC_PI_2 {
        r
    } else {
        r * (psi - cone.theta).sin()
    }
}

/// Settings for building a table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableConfig {
    /// Polar × azimuth rule for the ray form.
    pub near_polar: usize,
    pub near_azimuth: usize,
    /// Gauss points per unit cell and dimension for mid-range offsets.
    pub mid_points: usize,
    /// Same, beyond `mid_range`.
    pub far_points: usize,
    pub mid_range: i64,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig { near_polar: 64, near_azimuth: 128, mid_points: 6, far_points: 4, mid_range: 12 }
    }
}

/// One row of nonzero table entries at fixed `(j2, j3)`.
#[derive(Clone, Copy, Debug)]
struct Row {
    lo: i64,
    hi: i64,
    start: usize,
}

pub struct KernelTable {
    pub cone: ConeSpec,
    pub n: usize,
    /// Grid points (in index triples) lying in the closed cone.
    pub cone_points: Vec<[i64; 3]>,
    jmin: [i64; 3],
    jdim: [usize; 2],
    rows: Vec<Option<Row>>,
    values: Vec<[f64; W]>,
}

struct Evaluator {
    profile: KernelProfile,
    coeffs: MomentCoefficients,
}

impl Evaluator {
    /// `(K, L_{e1}, L_{e2}, L_{e3})` at `y ≠ 0`, scaled by `weight`, added into `acc`.
    #[inline]
    fn add_kernels(&self, y: [f64; 3], weight: f64, acc: &mut [f64; W]) {
        let r2 = dot(y, y);
        if r2 == 0.0 {
            return;
        }
        let r = r2.sqrt();
        let d = y.map(|v| v / r);
        let chi = self.profile.chi(d);
        if chi == 0.0 {
            return;
        }
        let kf = weight * chi / (r2 * r);
        let lf = weight * chi / (r2 * r2);
        let fac = [self.coeffs.factor(0, d), self.coeffs.factor(1, d), self.coeffs.factor(2, d)];
        for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            let yy = y[i] * y[j];
            acc[c] += kf * yy;
            for k in 0..3 {
                acc[6 + 6 * k + c] += lf * fac[k] * yy;
            }
        }
    }

    /// Tensor Gauss cubature over the 64 unit cells of the cardinal support.
    fn cubature(&self, j: [i64; 3], points: usize) -> [f64; W] {
        let (x, w) = gauss_legendre(points);
        let mut nodes = Vec::with_capacity(4 * points);
        for cell in -2..2 {
            for (xi, wi) in x.iter().zip(&w) {
                let z = cell as f64 + 0.5 + 0.5 * xi;
                nodes.push((z, 0.5 * wi * cardinal(z)));
            }
        }
        let jf = j.map(|v| v as f64);
        let mut acc = [0.0; W];
        for &(z3, w3) in &nodes {
            for &(z2, w2) in &nodes {
                let w23 = w2 * w3;
                for &(z1, w1) in &nodes {
                    self.add_kernels([jf[0] - z1, jf[1] - z2, jf[2] - z3], w1 * w23, &mut acc);
                }
            }
        }
        acc
    }

    /// Ray form `∫ χ ω⊗ω ∫ t B(j - tω) dt dσ`, exact in `t` between cell crossings.
    fn rays(&self, j: [i64; 3], rule: &CapRule) -> [f64; W] {
        let jf = j.map(|v| v as f64);
        let mut acc = [0.0; W];
        for node in &rule.nodes {
            let chi = self.profile.chi_u(node.u);
            if chi == 0.0 {
                continue;
            }
            let w = node.dir;
            // t-range where j - tω lies in [-2, 2]³
            let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
            for a in 0..3 {
                if w[a].abs() < 1e-300 {
                    if jf[a].abs() >= 2.0 {
                        t1 = -1.0;
                    }
                    continue;
                }
                let (p, q) = ((jf[a] - 2.0) / w[a], (jf[a] + 2.0) / w[a]);
                t0 = t0.max(p.min(q));
                t1 = t1.min(p.max(q));
            }
            if t1 <= t0 {
                continue;
            }
            let mut cuts = vec![t0, t1];
            for a in 0..3 {
                if w[a].abs() < 1e-300 {
                    continue;
                }
                for m in -1..=1 {
                    let t = (jf[a] - m as f64) / w[a];
                    if t > t0 && t < t1 {
                        cuts.push(t);
                    }
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (mut sk, mut sl) = (0.0, 0.0);
            for s in cuts.windows(2) {
                if s[1] - s[0] <= 0.0 {
                    continue;
                }
                for (t, wt) in gauss_interval(6, s[0], s[1]) {
                    let b = cardinal(jf[0] - t * w[0]) * cardinal(jf[1] - t * w[1]) * cardinal(jf[2] - t * w[2]);
                    sk += wt * t * b;
                    sl += wt * b;
                }
            }
            let fac = [self.coeffs.factor(0, w), self.coeffs.factor(1, w), self.coeffs.factor(2, w)];
            let ww = node.weight * chi;
            for (c, &(i, jj)) in SYM_PAIRS.iter().enumerate() {
                let o = ww * w[i] * w[jj];
                acc[c] += o * sk;
                for k in 0..3 {
                    acc[6 + 6 * k + c] += o * fac[k] * sl;
                }
            }
        }
        acc
    }
}

impl KernelTable {
    pub fn build(cone: &ConeSpec, n: usize, cfg: &TableConfig) -> Result<Self> {
        // fine polar rule: the normalization and moments are those of the continuum
        let profile = KernelProfile::new(*cone, 256, 8);
        let coeffs = MomentCoefficients::solve(&profile)?;
        let ev = Evaluator { profile, coeffs };
        let near_rule = CapRule::new(cone, cfg.near_polar, cfg.near_azimuth);

        // grid points of the cone in index coordinates; the vertex sits at the box center
        let center = (n as f64 - 1.0) / 2.0;
        let mut cone_points = Vec::new();
        for c in 0..n as i64 {
            for b in 0..n as i64 {
                for a in 0..n as i64 {
                    let x = [a as f64 - center, b as f64 - center, c as f64 - center];
                    if cone.contains(x) {
                        cone_points.push([a, b, c]);
                    }
                }
            }
        }
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for p in &cone_points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let jmin = std::array::from_fn(|a| lo[a] - hi[a]);
        let jmax: [i64; 3] = std::array::from_fn(|a| hi[a] - lo[a]);
        let jdim = [(jmax[1] - jmin[1] + 1) as usize, (jmax[2] - jmin[2] + 1) as usize];
        let reach = 2.0 * 3f64.sqrt() + 1e-9;

        // rows of the dilated cone
        let mut rows = vec![None; jdim[0] * jdim[1]];
        let mut offsets = Vec::new();
        for j3 in jmin[2]..=jmax[2] {
            for j2 in jmin[1]..=jmax[1] {
                let inside: Vec<i64> = (jmin[0]..=jmax[0])
                    .filter(|&j1| cone_distance(cone, [j1 as f64, j2 as f64, j3 as f64]) <= reach)
                    .collect();
                if let (Some(&a), Some(&b)) = (inside.first(), inside.last()) {
                    let r = (j2 - jmin[1]) as usize + jdim[0] * (j3 - jmin[2]) as usize;
                    rows[r] = Some(Row { lo: a, hi: b, start: offsets.len() });
                    offsets.extend((a..=b).map(|j1| [j1, j2, j3]));
                }
            }
        }
        let values: Vec<[f64; W]> = offsets
            .par_iter()
            .map(|&j| {
                let m = j.iter().map(|v| v.abs()).max().unwrap();
                if m <= NEAR {
                    ev.rays(j, &near_rule)
                } else if m <= cfg.mid_range {
                    ev.cubature(j, cfg.mid_points)
                } else {
                    ev.cubature(j, cfg.far_points)
                }
            })
            .collect();
        Ok(KernelTable { cone: *cone, n, cone_points, jmin, jdim, rows, values })
    }

    fn row(&self, j2: i64, j3: i64) -> Option<Row> {
        let a = j2 - self.jmin[1];
        let b = j3 - self.jmin[2];
        if a < 0 || b < 0 || a as usize >= self.jdim[0] || b as usize >= self.jdim[1] {
            return None;
        }
        self.rows[a as usize + self.jdim[0] * b as usize]
    }

    /// Table entry at an offset, zero outside the stored region.
    pub fn entry(&self, j: [i64; 3]) -> [f64; W] {
        match self.row(j[1], j[2]) {
            Some(r) if j[0] >= r.lo && j[0] <= r.hi => self.values[r.start + (j[0] - r.lo) as usize],
            _ => [0.0; W],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

type TableKey = (usize, [u64; 5], [usize; 2], [usize; 2], i64);

fn cache() -> &'static Mutex<HashMap<TableKey, Arc<KernelTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<KernelTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Table for `(cone, n)`, built once per process.
pub fn shared_table(cone: &ConeSpec, n: usize, cfg: &TableConfig) -> Result<Arc<KernelTable>> {
    let key = (
        n,
        [cone.axis[0].to_bits(), cone.axis[1].to_bits(), cone.axis[2].to_bits(), cone.theta.to_bits(), cone.theta_inner.to_bits()],
        [cfg.near_polar, cfg.near_azimuth],
        [cfg.mid_points, cfg.far_points],
        cfg.mid_range,
    );
    if let Some(t) = cache().lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let t = Arc::new(KernelTable::build(cone, n, cfg)?);
    cache().lock().unwrap().insert(key, t.clone());
    Ok(t)
}

/// `S` acting on grid sources.
#[derive(Clone)]
pub struct GridSolutionOperator {
    pub grid: GridSpec,
    pub table: Arc<KernelTable>,
    /// For each source row `(b, c)`: `[a_lo, a_hi]` of cone points.
    src_rows: Vec<(i64, i64, i64, i64)>,
}

impl GridSolutionOperator {
    pub fn new(cone: &ConeSpec, grid: GridSpec, cfg: &TableConfig) -> Result<Self> {
        let table = shared_table(cone, grid.n, cfg)?;
        let mut src_rows: Vec<(i64, i64, i64, i64)> = Vec::new();
        for p in &table.cone_points {
            match src_rows.last_mut() {
                Some(r) if r.0 == p[1] && r.1 == p[2] && r.3 + 1 == p[0] => r.3 = p[0],
                _ => src_rows.push((p[1], p[2], p[0], p[0])),
            }
        }
        Ok(GridSolutionOperator { grid, table, src_rows })
    }

    pub fn in_cone(&self) -> Vec<bool> {
        let mut mask = vec![false; self.grid.len()];
        for p in &self.table.cone_points {
            mask[self.grid.index(p[0] as usize, p[1] as usize, p[2] as usize)] = true;
        }
        mask
    }

    /// `(K ∗ f, L_{e_k} ∗ F^k)` at the cone points; exact zero elsewhere.
    pub fn apply(&self, f: &ScalarField, fv: &VectorField) -> HPiData {
        let grid = self.grid;
        let h = grid.spacing();
        let t = &self.table;
        let out: Vec<([f64; 6], [f64; 6])> = t
            .cone_points
            .par_iter()
            .map(|&n| {
                let mut acc = [0.0; W];
                for &(b, c, alo, ahi) in &self.src_rows {
                    let Some(row) = t.row(n[1] - b, n[2] - c) else { continue };
                    // a = n0 - j1 with j1 in [row.lo, row.hi]
                    let a0 = alo.max(n[0] - row.hi);
                    let a1 = ahi.min(n[0] - row.lo);
                    for a in a0..=a1 {
                        let idx = grid.index(a as usize, b as usize, c as usize);
                        let e = &t.values[row.start + (n[0] - a - row.lo) as usize];
                        let s = f.values[idx];
                        let v = fv.values[idx];
                        for k in 0..6 {
                            acc[k] += s * e[k];
                        }
                        for k in 0..3 {
                            for c6 in 0..6 {
                                acc[6 + 6 * k + c6] += v[k] * e[6 + 6 * k + c6];
                            }
                        }
                    }
                }
                let hk: [f64; 6] = std::array::from_fn(|c| h * h * acc[c]);
                let pk: [f64; 6] = std::array::from_fn(|c| h * (acc[6 + c] + acc[12 + c] + acc[18 + c]));
                (hk, pk)
            })
            .collect();
        let mut res = HPiData::zeros(grid);
        for (p, (hk, pk)) in t.cone_points.iter().zip(out) {
            let i = grid.index(p[0] as usize, p[1] as usize, p[2] as usize);
            res.h.values[i] = hk;
            res.p.values[i] = pk;
        }
        res
    }

    /// Fraction of cone points whose backward region `Ω ∩ (x - Ω)` leaves the box, where
    /// sources beyond the box are treated as zero.
    pub fn truncated_fraction(&self, cone: &ConeSpec) -> f64 {
        let rule = CapRule::new(cone, 6, 12);
        let hw = self.grid.half_width * (1.0 + 1e-9);
        let pts = &self.table.cone_points;
        let bad = pts
            .par_iter()
            .filter(|p| {
                let x = self.grid.point(self.grid.index(p[0] as usize, p[1] as usize, p[2] as usize));
                rule.nodes.iter().any(|nd| {
                    let t = cone_exit(cone, x, nd.dir);
                    (0..3).any(|a| (x[a] - t * nd.dir[a]).abs() > hw)
                })
            })
            .count();
        bad as f64 / pts.len().max(1) as f64
    }
}

/// Zero a tensor field outside the cone points.
pub fn mask_tensor(f: &mut SymTensorField, mask: &[bool]) {
    for (v, &m) in f.values.iter_mut().zip(mask) {
        if !m {
            *v = [0.0; 6];
        }
    }
}
