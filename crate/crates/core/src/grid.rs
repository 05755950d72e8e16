//! Uniform Cartesian grids, sampled fields, finite differences and cone geometry.

use std::io::{self, BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Component order of stored symmetric tensors.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Storage slot of the (i, j) entry of a symmetric tensor.
#[inline]
pub const fn sym_index(i: usize, j: usize) -> usize {
    const T: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
    T[i][j]
}

pub fn sym_to_mat(s: &[f64; 6]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = s[sym_index(i, j)];
        }
    }
    m
}

pub fn mat_to_sym(m: &[[f64; 3]; 3]) -> [f64; 6] {
    let mut s = [0.0; 6];
    for (k, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        s[k] = m[i][j];
    }
    s
}

/// Frobenius norm of a stored symmetric tensor.
pub fn sym_norm(s: &[f64; 6]) -> f64 {
    let mut acc = 0.0;
    for (k, &(i, j)) in SYM_PAIRS.iter().enumerate() {
        let w = if i == j { 1.0 } else { 2.0 };
        acc += w * s[k] * s[k];
    }
    acc.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::Invalid(format!("grid.n must be at least 8, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Invalid(format!("grid.half_width must be positive, got {half_width}")));
        }
        Ok(GridSpec { n, half_width })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, a: usize) -> f64 {
        -self.half_width + a as f64 * self.spacing()
    }

    /// Linear index with the first axis fastest.
    #[inline]
    pub fn index(&self, a: usize, b: usize, c: usize) -> usize {
        a + self.n * (b + self.n * c)
    }

    #[inline]
    pub fn unindex(&self, i: usize) -> [usize; 3] {
        [i % self.n, (i / self.n) % self.n, i / (self.n * self.n)]
    }

    #[inline]
    pub fn point(&self, i: usize) -> [f64; 3] {
        let [a, b, c] = self.unindex(i);
        [self.coord(a), self.coord(b), self.coord(c)]
    }

    /// Whether every index lies at least `margin` points from each face.
    pub fn is_interior(&self, i: usize, margin: usize) -> bool {
        self.unindex(i).iter().all(|&a| a >= margin && a + margin < self.n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        use rayon::prelude::*;
        let values = (0..grid.len()).into_par_iter().map(|i| f(grid.point(i))).collect();
        ScalarField { grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField {
    pub grid: GridSpec,
    pub values: Vec<[f64; 6]>,
}

impl SymTensorField {
    pub fn zeros(grid: GridSpec) -> Self {
        SymTensorField { grid, values: vec![[0.0; 6]; grid.len()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> [f64; 6] + Sync) -> Self {
        use rayon::prelude::*;
        let values = (0..grid.len()).into_par_iter().map(|i| f(grid.point(i))).collect();
        SymTensorField { grid, values }
    }

    pub fn matrix(&self, i: usize) -> [[f64; 3]; 3] {
        sym_to_mat(&self.values[i])
    }

    pub fn component(&self, k: usize) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| v[k]).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let values = self.values.iter().zip(&o.values).map(|(a, b)| std::array::from_fn(|k| a[k] + b[k])).collect();
        SymTensorField { grid: self.grid, values }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let values = self.values.iter().zip(&o.values).map(|(a, b)| std::array::from_fn(|k| a[k] - b[k])).collect();
        SymTensorField { grid: self.grid, values }
    }

    pub fn scale(&self, s: f64) -> Self {
        let values = self.values.iter().map(|a| a.map(|v| v * s)).collect();
        SymTensorField { grid: self.grid, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeSpec {
    pub axis: [f64; 3],
    pub theta: f64,
    pub theta_inner: f64,
}

/// Minimum distance of the opening angle from a right angle.
pub const CONE_MARGIN: f64 = 1e-3;

impl ConeSpec {
    pub fn new(axis: [f64; 3], theta: f64, theta_inner: f64) -> Result<Self> {
        let norm = dot(axis, axis).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("cone.axis must be a unit vector, |axis| = {norm}")));
        }
        if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2 - CONE_MARGIN) {
            return Err(Error::Invalid(format!("cone.theta must lie in (0, pi/2 - {CONE_MARGIN}), got {theta}")));
        }
        if !(theta_inner > 0.0 && theta_inner < theta) {
            return Err(Error::Invalid(format!("cone.theta_inner must lie in (0, theta), got {theta_inner}")));
        }
        Ok(ConeSpec { axis, theta, theta_inner })
    }

    /// Cone around `axis` with the default inner angle `theta / 2`.
    pub fn with_axis(axis: [f64; 3], theta: f64) -> Result<Self> {
        let n = dot(axis, axis).sqrt();
        Self::new(axis.map(|a| a / n), theta, theta / 2.0)
    }

    /// Closed cone with vertex included.
    #[inline]
    pub fn contains(&self, x: [f64; 3]) -> bool {
        dot(x, self.axis) >= norm(x) * self.theta.cos()
    }

    /// The inner cone on which the seed profile is identically one.
    pub fn inner(&self) -> ConeSpec {
        ConeSpec { axis: self.axis, theta: self.theta_inner, theta_inner: self.theta_inner / 2.0 }
    }

    /// Orthonormal frame `(axis, u1, u2)`.
    pub fn frame(&self) -> [[f64; 3]; 3] {
        let a = self.axis;
        let pick = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let p = dot(pick, a);
        let mut u1 = [pick[0] - p * a[0], pick[1] - p * a[1], pick[2] - p * a[2]];
        let n1 = norm(u1);
        u1 = u1.map(|v| v / n1);
        let u2 = cross(a, u1);
        [a, u1, u2]
    }
}

#[inline]
pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
pub fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

// Stencil weights. Rows are offsets from the evaluated point.
const D1_O2_IN: [f64; 3] = [-0.5, 0.0, 0.5];
const D1_O2_EDGE: [f64; 3] = [-1.5, 2.0, -0.5];
const D2_O2_IN: [f64; 3] = [1.0, -2.0, 1.0];
const D2_O2_EDGE: [f64; 4] = [2.0, -5.0, 4.0, -1.0];
const D1_O4_IN: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D1_O4_EDGE0: [f64; 5] = [-25.0 / 12.0, 48.0 / 12.0, -36.0 / 12.0, 16.0 / 12.0, -3.0 / 12.0];
const D1_O4_EDGE1: [f64; 5] = [-3.0 / 12.0, -10.0 / 12.0, 18.0 / 12.0, -6.0 / 12.0, 1.0 / 12.0];
const D2_O4_IN: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
const D2_O4_EDGE0: [f64; 6] =
    [45.0 / 12.0, -154.0 / 12.0, 214.0 / 12.0, -156.0 / 12.0, 61.0 / 12.0, -10.0 / 12.0];
const D2_O4_EDGE1: [f64; 6] = [10.0 / 12.0, -15.0 / 12.0, -4.0 / 12.0, 14.0 / 12.0, -6.0 / 12.0, 1.0 / 12.0];

/// One-dimensional stencil at position `i` of `n`.
enum Stencil {
    /// `Σ w[t] v[start + t]`
    Forward(usize, &'static [f64]),
    /// `sign · Σ w[t] v[n - 1 - t]`, the mirrored edge rows.
    Mirrored(&'static [f64], f64),
}

fn stencil(n: usize, i: usize, order: usize, deriv: usize) -> Stencil {
    let (half, inner, edges): (usize, &'static [f64], [&'static [f64]; 2]) = match (order, deriv) {
        (2, 1) => (1, &D1_O2_IN, [&D1_O2_EDGE, &D1_O2_EDGE]),
        (2, _) => (1, &D2_O2_IN, [&D2_O2_EDGE, &D2_O2_EDGE]),
        (_, 1) => (2, &D1_O4_IN, [&D1_O4_EDGE0, &D1_O4_EDGE1]),
        _ => (2, &D2_O4_IN, [&D2_O4_EDGE0, &D2_O4_EDGE1]),
    };
    if i >= half && i + half < n {
        Stencil::Forward(i - half, inner)
    } else if i < half {
        Stencil::Forward(0, edges[i])
    } else {
        let odd = if deriv == 1 { -1.0 } else { 1.0 };
        Stencil::Mirrored(edges[n - 1 - i], odd)
    }
}

/// Apply a derivative stencil along one axis of multi-lane samples.
pub fn fd_apply<const L: usize>(
    grid: &GridSpec,
    v: &[[f64; L]],
    axis: usize,
    order: usize,
    deriv: usize,
) -> Result<Vec<[f64; L]>> {
    if order != 2 && order != 4 {
        return Err(Error::Invalid(format!("finite-difference order must be 2 or 4, got {order}")));
    }
    let need = if order == 4 { 6 } else { 4 };
    if grid.n < need {
        return Err(Error::Invalid(format!("grid too small for order-{order} stencil")));
    }
    let n = grid.n;
    let h = grid.spacing();
    let scale = if deriv == 1 { 1.0 / h } else { 1.0 / (h * h) };
    let stride = [1, n, n * n][axis];
    let mut out = vec![[0.0; L]; grid.len()];
    use rayon::prelude::*;
    out.par_chunks_mut(n * n).enumerate().for_each(|(c, slab)| {
        for b in 0..n {
            for a in 0..n {
                let i = [a, b, c][axis];
                let base = grid.index(a, b, c) - i * stride;
                let mut acc = [0.0; L];
                let f = match stencil(n, i, order, deriv) {
                    Stencil::Forward(start, w) => {
                        for (t, &wt) in w.iter().enumerate() {
                            let s = &v[base + (start + t) * stride];
                            for l in 0..L {
                                acc[l] += wt * s[l];
                            }
                        }
                        1.0
                    }
                    Stencil::Mirrored(w, sgn) => {
                        for (t, &wt) in w.iter().enumerate() {
                            let s = &v[base + (n - 1 - t) * stride];
                            for l in 0..L {
                                acc[l] += wt * s[l];
                            }
                        }
                        sgn
                    }
                };
                slab[a + n * b] = acc.map(|x| x * f * scale);
            }
        }
    });
    Ok(out)
}

fn scalar_lanes(f: &ScalarField) -> Vec<[f64; 1]> {
    f.values.iter().map(|&v| [v]).collect()
}

/// First derivative along axis 0..2.
pub fn fd_partial_scalar(f: &ScalarField, axis: usize, order: usize) -> Result<ScalarField> {
    let d = fd_apply(&f.grid, &scalar_lanes(f), axis, order, 1)?;
    Ok(ScalarField { grid: f.grid, values: d.into_iter().map(|v| v[0]).collect() })
}

pub fn fd_partial_tensor(f: &SymTensorField, axis: usize, order: usize) -> Result<SymTensorField> {
    Ok(SymTensorField { grid: f.grid, values: fd_apply(&f.grid, &f.values, axis, order, 1)? })
}

/// Second derivative `∂_i ∂_j`: dedicated stencil on the diagonal, composition otherwise.
pub fn fd_second<const L: usize>(grid: &GridSpec, v: &[[f64; L]], i: usize, j: usize, order: usize) -> Result<Vec<[f64; L]>> {
    if i == j {
        fd_apply(grid, v, i, order, 2)
    } else {
        let t = fd_apply(grid, v, j, order, 1)?;
        fd_apply(grid, &t, i, order, 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutOfDomain(pub [f64; 3]);

fn locate(grid: &GridSpec, x: f64) -> Option<(usize, f64)> {
    let h = grid.spacing();
    let s = (x + grid.half_width) / h;
    let last = (grid.n - 1) as f64;
    if !(s >= -1e-12 && s <= last + 1e-12) {
        return None;
    }
    let s = s.clamp(0.0, last);
    let a = (s.floor() as usize).min(grid.n - 2);
    Some((a, s - a as f64))
}

/// Trilinear interpolation of multi-lane samples.
pub fn sample_lanes<const L: usize>(grid: &GridSpec, v: &[[f64; L]], x: [f64; 3]) -> std::result::Result<[f64; L], OutOfDomain> {
    let mut cell = [(0usize, 0.0f64); 3];
    for k in 0..3 {
        cell[k] = locate(grid, x[k]).ok_or(OutOfDomain(x))?;
    }
    let mut out = [0.0; L];
    for corner in 0..8 {
        let mut w = 1.0;
        let mut id = [0usize; 3];
        for k in 0..3 {
            let up = (corner >> k) & 1;
            id[k] = cell[k].0 + up;
            w *= if up == 1 { cell[k].1 } else { 1.0 - cell[k].1 };
        }
        if w == 0.0 {
            continue;
        }
        let s = &v[grid.index(id[0], id[1], id[2])];
        for l in 0..L {
            out[l] += w * s[l];
        }
    }
    Ok(out)
}

pub fn sample_scalar(f: &ScalarField, x: [f64; 3]) -> std::result::Result<f64, OutOfDomain> {
    let mut cell = [(0usize, 0.0f64); 3];
    for k in 0..3 {
        cell[k] = locate(&f.grid, x[k]).ok_or(OutOfDomain(x))?;
    }
    let mut out = 0.0;
    for corner in 0..8 {
        let mut w = 1.0;
        let mut id = [0usize; 3];
        for k in 0..3 {
            let up = (corner >> k) & 1;
            id[k] = cell[k].0 + up;
            w *= if up == 1 { cell[k].1 } else { 1.0 - cell[k].1 };
        }
        if w != 0.0 {
            out += w * f.values[f.grid.index(id[0], id[1], id[2])];
        }
    }
    Ok(out)
}

pub fn sample_tensor(f: &SymTensorField, x: [f64; 3]) -> std::result::Result<[f64; 6], OutOfDomain> {
    sample_lanes(&f.grid, &f.values, x)
}

/// Deterministic pairwise sum.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub enum FieldData<'a> {
    Scalar(&'a ScalarField),
    Tensor(&'a SymTensorField),
}

/// Write a field in the CIDF1 binary format.
pub fn write_cidf1(w: &mut impl Write, field: FieldData<'_>) -> io::Result<()> {
    let (kind, grid) = match &field {
        FieldData::Scalar(f) => ("scalar", f.grid),
        FieldData::Tensor(f) => ("symtensor", f.grid),
    };
    writeln!(w, "CIDF1 {} {} {}", kind, grid.n, fmt_f64(grid.half_width))?;
    let mut buf = Vec::new();
    match field {
        FieldData::Scalar(f) => {
            buf.reserve(8 * f.values.len());
            for v in &f.values {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        FieldData::Tensor(f) => {
            buf.reserve(48 * f.values.len());
            for v in f.values.iter().flatten() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    w.write_all(&buf)
}

/// Shortest decimal text that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub enum LoadedField {
    Scalar(ScalarField),
    Tensor(SymTensorField),
}

pub fn read_cidf1(r: &mut impl BufRead) -> Result<LoadedField> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "CIDF1" {
        return Err(Error::Format(format!("bad CIDF1 header {:?}", header.trim_end())));
    }
    let n: usize = parts[2].parse().map_err(|_| Error::Format(format!("bad grid size {:?}", parts[2])))?;
    let hw: f64 = parts[3].parse().map_err(|_| Error::Format(format!("bad half width {:?}", parts[3])))?;
    let grid = GridSpec::new(n, hw)?;
    let lanes = match parts[1] {
        "scalar" => 1,
        "symtensor" => 6,
        k => return Err(Error::Format(format!("unknown field kind {k:?}"))),
    };
    let mut bytes = vec![0u8; 8 * lanes * grid.len()];
    r.read_exact(&mut bytes)?;
    let vals: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("non-finite value in field dump".into()));
    }
    Ok(if lanes == 1 {
        LoadedField::Scalar(ScalarField { grid, values: vals })
    } else {
        LoadedField::Tensor(SymTensorField {
            grid,
            values: vals.chunks_exact(6).map(|c| c.try_into().unwrap()).collect(),
        })
    })
}

pub fn save_tensor(path: &Path, f: &SymTensorField) -> Result<()> {
    let mut w = io::BufWriter::new(std::fs::File::create(path)?);
    write_cidf1(&mut w, FieldData::Tensor(f))?;
    w.flush()?;
    Ok(())
}

pub fn load_tensor(path: &Path) -> Result<SymTensorField> {
    let mut r = io::BufReader::new(std::fs::File::open(path)?);
    match read_cidf1(&mut r)? {
        LoadedField::Tensor(t) => Ok(t),
        LoadedField::Scalar(_) => Err(Error::Format(format!("{} holds a scalar field, expected symtensor", path.display()))),
    }
}
