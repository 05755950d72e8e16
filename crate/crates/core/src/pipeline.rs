//! Subcommand bodies: each reads a resolved config, writes its artifacts into one output
//! directory and returns the lines worth printing.
//!
//! Every run also writes `effective-config.toml`, which reproduces the run when fed back.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::checks::{self, Check};
use crate::config::RunConfig;
use crate::constraints::{constraints, reconstruct_gk, residual_norms, HPiData, MetricData};
use crate::diagnostics::{b_norm_lanes, decay_fit, sharpness_scan, BNormSpec};
use crate::error::{Error, Result};
use crate::grid::{fmt_f64, load_tensor, save_tensor, GridSpec};
use crate::seed::log_radii;
use crate::solver::{FixedPointProblem, IterRecord, SolveState};

/// Output directory plus the list of files written so far.
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
        let p = self.path(name);
        let mut w = std::io::BufWriter::new(fs::File::create(&p)?);
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        Ok(p)
    }

    pub fn tensor(&mut self, name: &str, f: &crate::grid::SymTensorField) -> Result<PathBuf> {
        let p = self.path(name);
        save_tensor(&p, f)?;
        Ok(p)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let p = self.path(name);
        fs::write(&p, body)?;
        Ok(p)
    }

    pub fn config(&mut self, cfg: &RunConfig) -> Result<PathBuf> {
        self.text("effective-config.toml", &cfg.to_toml())
    }
}

fn num(v: f64) -> String {
    fmt_f64(v)
}

/// `h₀, π₀` dumps and axis decay samples.
pub fn run_seed(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<String>> {
    out.config(cfg)?;
    let seed = cfg.seed_spec()?;
    let grid = cfg.grid_spec()?;
    let (h, p) = seed.to_grid(grid);
    out.tensor("h0.cidf", &h)?;
    out.tensor("pi0.cidf", &p)?;
    let rows = seed.decay_samples(&log_radii(1.0, 1e6, 4));
    out.csv("decay_seed.csv", &["r", "|h0|", "|dh0|", "|pi0|", "L(r)"], rows.iter().map(|r| r.iter().map(|&v| num(v)).collect()))?;
    Ok(vec![
        format!("seed on n={} half_width={}: max |h0| {:.4e}, max |pi0| {:.4e}", grid.n, grid.half_width, h.max_abs(), p.max_abs()),
        format!("decay onset radius {:.3e}", seed.onset_radius()),
    ])
}

/// Delta identities and the outgoing property of the kernels.
pub fn run_kernels_verify(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    out.config(cfg)?;
    let list = vec![checks::kernel_deltas(cfg)?, checks::outgoing(cfg)?];
    write_checks(out, "kernels", &list)?;
    Ok(list)
}

/// Constraint residuals of `(g, k)` read from CIDF1 dumps.
pub fn run_constraints(cfg: &RunConfig, g_path: &Path, k_path: &Path, out: &mut Artifacts) -> Result<(f64, f64)> {
    out.config(cfg)?;
    let md = MetricData { g: load_tensor(g_path)?, k: load_tensor(k_path)? };
    if md.g.grid != md.k.grid {
        return Err(Error::Format("g and k dumps use different grids".into()));
    }
    let grid = md.g.grid;
    let order = cfg.grid.fd_order;
    let (h, m) = constraints(&md, order)?;
    let margin = 2 * (order / 2);
    let r = residual_norms(&h, &m, |i| grid.is_interior(i, margin));
    out.csv("residual.csv", &["norm_H", "norm_M", "grid_n"], [vec![num(r.0), num(r.1), grid.n.to_string()]])?;
    Ok(r)
}

/// Picard solve with all field dumps, the iteration log and residual tables.
pub fn run_solve(cfg: &RunConfig, out: &mut Artifacts, mut on_iter: impl FnMut(&IterRecord)) -> Result<SolveState> {
    out.config(cfg)?;
    let seed = cfg.seed_spec()?;
    let grid = cfg.grid_spec()?;
    let prob = FixedPointProblem::new(&seed, grid, &cfg.table_config())?;
    let order = cfg.grid.fd_order;
    let mut log = Vec::new();
    let solved = prob.solve_with(&cfg.solve_config(), |r| {
        log.push(*r);
        on_iter(r)
    });
    // the log is kept on divergence too
    out.csv(
        "iterations.csv",
        &["iter", "update_norm", "phi_norm", "ratio"],
        log.iter().map(|r| vec![r.iter.to_string(), num(r.update_norm), num(r.phi_norm), num(r.ratio)]),
    )?;
    let st = solved?;
    out.text(
        "solve.txt",
        &format!(
            "converged = {}\niterations = {}\nball_radius = {}\n",
            st.converged,
            st.history.len(),
            num(st.ball_radius)
        ),
    )?;
    let total = prob.seed_fields.add(&st.correction);
    let md = reconstruct_gk(&total)?;
    out.tensor("h.cidf", &total.h)?;
    out.tensor("pi.cidf", &total.p)?;
    out.tensor("g.cidf", &md.g)?;
    out.tensor("k.cidf", &md.k)?;
    out.tensor("h1.cidf", &st.correction.h)?;
    out.tensor("pi1.cidf", &st.correction.p)?;
    let margin = 2 * (order / 2);
    let r0 = prob.residual(&HPiData::zeros(grid), order, margin)?;
    let r1 = prob.residual(&st.correction, order, margin)?;
    out.csv("residual_seed.csv", &["norm_H", "norm_M", "grid_n"], [vec![num(r0.0), num(r0.1), grid.n.to_string()]])?;
    out.csv("residual.csv", &["norm_H", "norm_M", "grid_n"], [vec![num(r1.0), num(r1.1), grid.n.to_string()]])?;
    let q = seed.q;
    for (name, hp) in [("seed", &prob.seed_fields), ("correction", &st.correction)] {
        let mut rows = Vec::new();
        for (k, delta, lanes) in [(q + 1, (seed.s - 4.0) / 2.0, &hp.h.values), (q, (seed.s - 2.0) / 2.0, &hp.p.values)] {
            let v = b_norm_lanes(&grid, lanes, &BNormSpec { order, ..BNormSpec::new(k, delta) })?;
            rows.push(vec![k.to_string(), num(delta), num(v)]);
        }
        out.csv(&format!("norms_{name}.csv"), &["k", "delta", "value"], rows)?;
    }
    Ok(st)
}

/// Fitted slope and samples of one decay profile.
pub struct DecayProfile {
    pub name: &'static str,
    pub slope: f64,
    pub expected: f64,
}

/// Axis decay of `h₀`, `π₀` and the first correction, one CSV each.
pub fn run_decay(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<DecayProfile>> {
    out.config(cfg)?;
    let seed = cfg.seed_spec()?;
    let s = seed.s;
    let radii = log_radii(1e2, 1e6, 4);
    let rows = seed.decay_samples(&radii);
    let h1 = checks::first_correction_on_axis(cfg, &seed, &radii)?;
    let cols: [(&'static str, Vec<f64>, f64); 3] = [
        ("h0", rows.iter().map(|r| r[1]).collect(), -(s - 1.0) / 2.0),
        ("pi0", rows.iter().map(|r| r[3]).collect(), -(s + 1.0) / 2.0),
        ("h1", h1, f64::NAN),
    ];
    let mut res = Vec::new();
    for (name, vals, expected) in cols {
        out.csv(
            &format!("decay_{name}.csv"),
            &["r", "value", "L"],
            radii.iter().zip(&vals).map(|(&r, &v)| vec![num(r), num(v), num(seed.weight.value(r))]),
        )?;
        let slope = decay_fit(|r| vals[radii.iter().position(|&x| x == r).unwrap()], &radii, Some(&seed.weight))?;
        res.push(DecayProfile { name, slope, expected });
    }
    Ok(res)
}

/// Shell increments for `s′ = s` and `s′ = s + 1` with the configured weight.
pub fn run_sharpness(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<(f64, f64, bool)>> {
    out.config(cfg)?;
    let seed = cfg.seed_spec()?;
    let radii = log_radii(1e3, 1e6, 4);
    let mut res = Vec::new();
    for (tag, sp) in [("s", seed.s), ("s_plus_1", seed.s + 1.0)] {
        let scan = sharpness_scan(&seed, sp, &radii)?;
        out.csv(
            &format!("sharpness_{tag}.csv"),
            &["R_lo", "R_hi", "increment"],
            scan.radii.windows(2).zip(&scan.increments).map(|(w, &v)| vec![num(w[0]), num(w[1]), num(v)]),
        )?;
        res.push((sp, scan.growth(), scan.strictly_decreasing()));
    }
    Ok(res)
}

fn write_checks(out: &mut Artifacts, stem: &str, list: &[Check]) -> Result<()> {
    let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
    out.csv(
        &format!("{stem}.csv"),
        &["name", "pass", "value", "criterion", "detail", "seconds"],
        list.iter().map(|c| {
            vec![c.name.to_string(), c.pass.to_string(), num(c.value), quote(&c.criterion), quote(&c.detail), format!("{:.3}", c.seconds)]
        }),
    )?;
    let body: String = list.iter().map(|c| c.line() + "\n").collect();
    out.text(&format!("{stem}.txt"), &body)?;
    Ok(())
}

/// Every check, plus the decay and sharpness tables of the configured seed.
pub fn run_verify(cfg: &RunConfig, out: &mut Artifacts, on_check: impl FnMut(&Check)) -> Result<Vec<Check>> {
    out.config(cfg)?;
    let list = checks::run_all(cfg, on_check)?;
    write_checks(out, "verify", &list)?;
    if cfg.seed.eps0 > 0.0 {
        run_decay(cfg, out)?;
    }
    run_sharpness(cfg, out)?;
    let grid = GridSpec::new(32, cfg.grid.half_width)?;
    let (h, _) = cfg.seed_spec()?.to_grid(grid);
    let mut rows = Vec::new();
    for k in 0..=cfg.seed.q + 1 {
        for delta in [-1.5, (cfg.seed.s - 4.0) / 2.0] {
            let v = b_norm_lanes(&grid, &h.values, &BNormSpec { order: cfg.grid.fd_order, ..BNormSpec::new(k, delta) })?;
            rows.push(vec![k.to_string(), num(delta), num(v)]);
        }
    }
    out.csv("norms_seed_ladder.csv", &["k", "delta", "value"], rows)?;
    Ok(list)
}
