//! Vacuum constraints, the variables `(h, π)`, the linear operator `P` and `Φ = P - C`.
//!
//! With `h = g - δ - δ tr(g - δ)` the linearized scalar curvature
//! `∂ᵢ∂ⱼ(g-δ)ᵢⱼ - Δ tr(g-δ)` equals `∂ᵢ∂ⱼhᵢⱼ` exactly, and the linearized momentum
//! constraint equals `∂ᵢπᵢⱼ`. Hence `Φ` has no linear part.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{fd_apply, fd_second, pairwise_sum, sym_index, GridSpec, ScalarField, SymTensorField, SYM_PAIRS};

/// Pointwise values and derivatives of `(h, π)`.
///
/// `dh[a]` is `∂_a h`, `ddh[ab]` is `∂_a∂_b h` with `ab` in storage order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointData {
    pub h: [f64; 6],
    pub dh: [[f64; 6]; 3],
    pub ddh: [[f64; 6]; 6],
    pub p: [f64; 6],
    pub dp: [[f64; 6]; 3],
}

fn add6(a: &mut [f64; 6], b: &[f64; 6]) {
    for k in 0..6 {
        a[k] += b[k];
    }
}

impl PointData {
    pub fn add(&self, o: &PointData) -> PointData {
        let mut r = *self;
        add6(&mut r.h, &o.h);
        add6(&mut r.p, &o.p);
        for a in 0..3 {
            add6(&mut r.dh[a], &o.dh[a]);
            add6(&mut r.dp[a], &o.dp[a]);
        }
        for ab in 0..6 {
            add6(&mut r.ddh[ab], &o.ddh[ab]);
        }
        r
    }

    pub fn scale(&self, t: f64) -> PointData {
        let f = |v: [f64; 6]| v.map(|x| x * t);
        PointData {
            h: f(self.h),
            dh: self.dh.map(f),
            ddh: self.ddh.map(f),
            p: f(self.p),
            dp: self.dp.map(f),
        }
    }

    /// `P(h, π) = (∂ᵢ∂ⱼhᵢⱼ, ∂ᵢπᵢⱼ)`.
    pub fn linear(&self) -> (f64, [f64; 3]) {
        let mut ph = 0.0;
        let mut pm = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                ph += self.ddh[sym_index(i, j)][sym_index(i, j)];
                pm[j] += self.dp[i][sym_index(i, j)];
            }
        }
        (ph, pm)
    }

    /// `(g, k)` with derivatives.
    pub fn metric(&self) -> MetricPoint {
        let untrace = |v: &[f64; 6]| {
            let t = v[0] + v[3] + v[5];
            let mut m = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = v[sym_index(i, j)] - if i == j { 0.5 * t } else { 0.0 };
                }
            }
            m
        };
        let mut g = untrace(&self.h);
        for i in 0..3 {
            g[i][i] += 1.0;
        }
        let mut ddg = [[[[0.0; 3]; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                ddg[a][b] = untrace(&self.ddh[sym_index(a, b)]);
            }
        }
        MetricPoint {
            g,
            dg: std::array::from_fn(|a| untrace(&self.dh[a])),
            ddg,
            k: untrace(&self.p),
            dk: std::array::from_fn(|a| untrace(&self.dp[a])),
        }
    }

    /// `(H, M)` of the reconstructed data.
    pub fn constraints(&self) -> std::result::Result<(f64, [f64; 3]), f64> {
        self.metric().constraints()
    }

    /// `Φ = P - C`.
    pub fn phi(&self) -> std::result::Result<(f64, [f64; 3]), f64> {
        let (ph, pm) = self.linear();
        let (ch, cm) = self.constraints()?;
        Ok((ph - ch, [pm[0] - cm[0], pm[1] - cm[1], pm[2] - cm[2]]))
    }
}

/// Full metric, second fundamental form and their derivatives at a point.
/// Derivative index first: `dg[a][i][j] = ∂_a g_ij`, `ddg[a][b][i][j] = ∂_a∂_b g_ij`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricPoint {
    pub g: [[f64; 3]; 3],
    pub dg: [[[f64; 3]; 3]; 3],
    pub ddg: [[[[f64; 3]; 3]; 3]; 3],
    pub k: [[f64; 3]; 3],
    pub dk: [[[f64; 3]; 3]; 3],
}

/// Smallest leading principal minor; positive iff the matrix is positive definite.
pub fn sylvester_min(g: &[[f64; 3]; 3]) -> f64 {
    let m1 = g[0][0];
    let m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    m1.min(m2).min(det3(g))
}

pub fn det3(g: &[[f64; 3]; 3]) -> f64 {
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

/// Inverse through the adjugate.
pub fn inv3(g: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let d = det3(g);
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, e) = ((i + 1) % 3, (i + 2) % 3);
            r[i][j] = (g[a][c] * g[b][e] - g[a][e] * g[b][c]) / d;
        }
    }
    r
}

impl MetricPoint {
    /// Hamiltonian and momentum constraints; `Err(minor)` if `g` is not positive definite.
    pub fn constraints(&self) -> std::result::Result<(f64, [f64; 3]), f64> {
        let minor = sylvester_min(&self.g);
        if !(minor > 0.0) {
            return Err(minor);
        }
        let gi = inv3(&self.g);
        let (g, dg, ddg, k, dk) = (&self.g, &self.dg, &self.ddg, &self.k, &self.dk);
        // Γ_{dab} and Γ^c_{ab}
        let mut gam_low = [[[0.0; 3]; 3]; 3];
        for d in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    gam_low[d][a][b] = 0.5 * (dg[a][d][b] + dg[b][d][a] - dg[d][a][b]);
                }
            }
        }
        let mut gam = [[[0.0; 3]; 3]; 3];
        for c in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    gam[c][a][b] = (0..3).map(|d| gi[c][d] * gam_low[d][a][b]).sum();
                }
            }
        }
        // ∂_e g^{cd} = -g^{cf} ∂_e g_{fh} g^{hd}
        let mut dgi = [[[0.0; 3]; 3]; 3];
        for e in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let mut s = 0.0;
                    for f in 0..3 {
                        for h in 0..3 {
                            s += gi[c][f] * dg[e][f][h] * gi[h][d];
                        }
                    }
                    dgi[e][c][d] = -s;
                }
            }
        }
        // ∂_e Γ^c_{ab}
        let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
        for e in 0..3 {
            for c in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        let mut s = 0.0;
                        for d in 0..3 {
                            let dlow = 0.5 * (ddg[e][a][d][b] + ddg[e][b][d][a] - ddg[e][d][a][b]);
                            s += dgi[e][c][d] * gam_low[d][a][b] + gi[c][d] * dlow;
                        }
                        dgam[e][c][a][b] = s;
                    }
                }
            }
        }
        // Ricci contraction R = g^{ab}(∂_cΓ^c_ab − ∂_aΓ^c_cb + Γ^c_cd Γ^d_ab − Γ^c_ad Γ^d_cb)
        let mut scal = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let mut ric = 0.0;
                for c in 0..3 {
                    ric += dgam[c][c][a][b] - dgam[a][c][c][b];
                    for d in 0..3 {
                        ric += gam[c][c][d] * gam[d][a][b] - gam[c][a][d] * gam[d][c][b];
                    }
                }
                scal += gi[a][b] * ric;
            }
        }
        let mut trk = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                trk += gi[i][j] * k[i][j];
            }
        }
        let mut k2 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        k2 += gi[i][a] * gi[j][b] * k[i][j] * k[a][b];
                    }
                }
            }
        }
        let ham = scal + trk * trk - k2;
        // T = k - (tr k) g and its derivative
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = k[i][j] - trk * g[i][j];
            }
        }
        let mut dtrk = [0.0; 3];
        for a in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    dtrk[a] += dgi[a][i][j] * k[i][j] + gi[i][j] * dk[a][i][j];
                }
            }
        }
        let mut mom = [0.0; 3];
        for j in 0..3 {
            let mut s = 0.0;
            for i in 0..3 {
                for a in 0..3 {
                    let mut cov = dk[a][i][j] - dtrk[a] * g[i][j] - trk * dg[a][i][j];
                    for b in 0..3 {
                        cov -= gam[b][a][i] * t[b][j] + gam[b][a][j] * t[i][b];
                    }
                    s += gi[i][a] * cov;
                }
            }
            mom[j] = s;
        }
        Ok((ham, mom))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub grid: GridSpec,
    pub values: Vec<[f64; 3]>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        VectorField { grid, values: vec![[0.0; 3]; grid.len()] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricData {
    pub g: SymTensorField,
    pub k: SymTensorField,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HPiData {
    pub h: SymTensorField,
    pub p: SymTensorField,
}

impl HPiData {
    pub fn zeros(grid: GridSpec) -> Self {
        HPiData { h: SymTensorField::zeros(grid), p: SymTensorField::zeros(grid) }
    }

    pub fn grid(&self) -> GridSpec {
        self.h.grid
    }

    pub fn add(&self, o: &HPiData) -> HPiData {
        HPiData { h: self.h.add(&o.h), p: self.p.add(&o.p) }
    }

    pub fn sub(&self, o: &HPiData) -> HPiData {
        HPiData { h: self.h.sub(&o.h), p: self.p.sub(&o.p) }
    }

    pub fn scale(&self, t: f64) -> HPiData {
        HPiData { h: self.h.scale(t), p: self.p.scale(t) }
    }
}

fn detrace(v: &[f64; 6], factor: f64) -> [f64; 6] {
    let t = v[0] + v[3] + v[5];
    let mut r = *v;
    for k in [0, 3, 5] {
        r[k] += factor * t;
    }
    r
}

/// `h = g - δ - δ tr(g - δ)`, `π = k - δ tr k`.
pub fn to_hpi(md: &MetricData) -> HPiData {
    let h = md
        .g
        .values
        .iter()
        .map(|g| {
            let mut d = *g;
            for k in [0, 3, 5] {
                d[k] -= 1.0;
            }
            detrace(&d, -1.0)
        })
        .collect();
    let p = md.k.values.iter().map(|k| detrace(k, -1.0)).collect();
    HPiData { h: SymTensorField { grid: md.g.grid, values: h }, p: SymTensorField { grid: md.k.grid, values: p } }
}

/// `g = δ + h - ½ tr h δ`, `k = π - ½ tr π δ`, with a positivity guard.
pub fn reconstruct_gk(hp: &HPiData) -> Result<MetricData> {
    let grid = hp.grid();
    let g: Vec<[f64; 6]> = hp
        .h
        .values
        .iter()
        .map(|h| {
            let mut g = detrace(h, -0.5);
            for k in [0, 3, 5] {
                g[k] += 1.0;
            }
            g
        })
        .collect();
    let mut worst: Option<(usize, f64)> = None;
    for (i, v) in g.iter().enumerate() {
        let m = sylvester_min(&crate::grid::sym_to_mat(v));
        if !(m > 0.0) && worst.map_or(true, |(_, w)| m < w || m.is_nan()) {
            worst = Some((i, m));
        }
    }
    if let Some((index, minor)) = worst {
        return Err(Error::NotPositive { index, point: grid.point(index), minor });
    }
    let k = hp.p.values.iter().map(|p| detrace(p, -0.5)).collect();
    Ok(MetricData { g: SymTensorField { grid, values: g }, k: SymTensorField { grid, values: k } })
}

/// Finite-difference `PointData` for every grid point.
pub fn point_data_fd(hp: &HPiData, order: usize) -> Result<Vec<PointData>> {
    let grid = hp.grid();
    let dh: Vec<Vec<[f64; 6]>> = (0..3).map(|a| fd_apply(&grid, &hp.h.values, a, order, 1)).collect::<Result<_>>()?;
    let dp: Vec<Vec<[f64; 6]>> = (0..3).map(|a| fd_apply(&grid, &hp.p.values, a, order, 1)).collect::<Result<_>>()?;
    let ddh: Vec<Vec<[f64; 6]>> =
        SYM_PAIRS.iter().map(|&(a, b)| fd_second(&grid, &hp.h.values, a, b, order)).collect::<Result<_>>()?;
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| PointData {
            h: hp.h.values[i],
            dh: [dh[0][i], dh[1][i], dh[2][i]],
            ddh: std::array::from_fn(|ab| ddh[ab][i]),
            p: hp.p.values[i],
            dp: [dp[0][i], dp[1][i], dp[2][i]],
        })
        .collect())
}

/// Finite-difference `P(h, π)`.
pub fn apply_p(hp: &HPiData, order: usize) -> Result<(ScalarField, VectorField)> {
    let grid = hp.grid();
    let pd = point_data_fd(hp, order)?;
    let lin: Vec<(f64, [f64; 3])> = pd.par_iter().map(|d| d.linear()).collect();
    Ok((
        ScalarField { grid, values: lin.iter().map(|v| v.0).collect() },
        VectorField { grid, values: lin.iter().map(|v| v.1).collect() },
    ))
}

fn metric_point_data(md: &MetricData, order: usize) -> Result<Vec<MetricPoint>> {
    let grid = md.g.grid;
    let dg: Vec<Vec<[f64; 6]>> = (0..3).map(|a| fd_apply(&grid, &md.g.values, a, order, 1)).collect::<Result<_>>()?;
    let dk: Vec<Vec<[f64; 6]>> = (0..3).map(|a| fd_apply(&grid, &md.k.values, a, order, 1)).collect::<Result<_>>()?;
    let ddg: Vec<Vec<[f64; 6]>> =
        SYM_PAIRS.iter().map(|&(a, b)| fd_second(&grid, &md.g.values, a, b, order)).collect::<Result<_>>()?;
    let m = crate::grid::sym_to_mat;
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut dd = [[[[0.0; 3]; 3]; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    dd[a][b] = m(&ddg[sym_index(a, b)][i]);
                }
            }
            MetricPoint {
                g: m(&md.g.values[i]),
                dg: std::array::from_fn(|a| m(&dg[a][i])),
                ddg: dd,
                k: m(&md.k.values[i]),
                dk: std::array::from_fn(|a| m(&dk[a][i])),
            }
        })
        .collect())
}

fn constraint_fields(grid: GridSpec, pts: &[MetricPoint]) -> Result<(ScalarField, VectorField)> {
    let out: Vec<std::result::Result<(f64, [f64; 3]), f64>> = pts.par_iter().map(|p| p.constraints()).collect();
    let mut hv = Vec::with_capacity(out.len());
    let mut mv = Vec::with_capacity(out.len());
    for (i, o) in out.into_iter().enumerate() {
        match o {
            Ok((h, m)) => {
                hv.push(h);
                mv.push(m);
            }
            Err(minor) => return Err(Error::NotPositive { index: i, point: grid.point(i), minor }),
        }
    }
    Ok((ScalarField { grid, values: hv }, VectorField { grid, values: mv }))
}

/// `R + (tr k)² - |k|²` by finite differences.
pub fn hamiltonian_constraint(md: &MetricData, order: usize) -> Result<ScalarField> {
    Ok(constraint_fields(md.g.grid, &metric_point_data(md, order)?)?.0)
}

/// `div_g(k - tr_g k g)` by finite differences.
pub fn momentum_constraint(md: &MetricData, order: usize) -> Result<VectorField> {
    Ok(constraint_fields(md.g.grid, &metric_point_data(md, order)?)?.1)
}

pub fn constraints(md: &MetricData, order: usize) -> Result<(ScalarField, VectorField)> {
    constraint_fields(md.g.grid, &metric_point_data(md, order)?)
}

/// `Φ` at every point of pre-computed derivative data.
pub fn phi_from_points(grid: GridSpec, pts: &[PointData]) -> Result<(ScalarField, VectorField)> {
    let out: Vec<std::result::Result<(f64, [f64; 3]), f64>> = pts.par_iter().map(|p| p.phi()).collect();
    let mut hv = Vec::with_capacity(out.len());
    let mut mv = Vec::with_capacity(out.len());
    for (i, o) in out.into_iter().enumerate() {
        match o {
            Ok((h, m)) => {
                hv.push(h);
                mv.push(m);
            }
            Err(minor) => return Err(Error::NotPositive { index: i, point: grid.point(i), minor }),
        }
    }
    Ok((ScalarField { grid, values: hv }, VectorField { grid, values: mv }))
}

/// `Φ(h, π) = P(h, π) - C(reconstruct_gk(h, π))` by finite differences.
pub fn apply_phi(hp: &HPiData, order: usize) -> Result<(ScalarField, VectorField)> {
    reconstruct_gk(hp)?;
    phi_from_points(hp.grid(), &point_data_fd(hp, order)?)
}

/// Discrete L² norms (cell volume included) of a scalar and vector field over the selected points.
pub fn residual_norms(h: &ScalarField, m: &VectorField, select: impl Fn(usize) -> bool) -> (f64, f64) {
    let vol = h.grid.spacing().powi(3);
    let idx: Vec<usize> = (0..h.grid.len()).filter(|&i| select(i)).collect();
    let nh = (vol * pairwise_sum(&idx.iter().map(|&i| h.values[i].powi(2)).collect::<Vec<_>>())).sqrt();
    let nm = (vol * pairwise_sum(&idx.iter().map(|&i| m.values[i].iter().map(|v| v * v).sum()).collect::<Vec<_>>())).sqrt();
    (nh, nm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_data_has_no_constraints() {
        let pd = PointData::default();
        let (h, m) = pd.constraints().unwrap();
        assert_eq!(h, 0.0);
        assert_eq!(m, [0.0; 3]);
    }

    #[test]
    fn inverse_via_adjugate() {
        let g = [[2.0, 0.3, -0.1], [0.3, 1.5, 0.2], [-0.1, 0.2, 1.1]];
        let gi = inv3(&g);
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| g[i][k] * gi[k][j]).sum();
                assert_relative_eq!(v, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
    }
}
