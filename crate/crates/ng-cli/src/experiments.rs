//! Experiment implementations: each produces one or more output files from a
//! resolved configuration. Rows are computed in parallel and assembled in
//! configuration order, so identical configurations give identical bytes.

use crate::config::{parse_gamma, Experiment, ResolvedConfig};
use crate::pgm;
use crate::table::Table;
use ng_core::{
    coherent_ket, delta_vn, delta_vn_constellation, density_from_pure_ensemble, epsilon_g_bound,
    gauss_hermite_1d, map_regions, mixture_cutoff, phase_diffusion, qam_product,
    random_walk_1d, tau_from_distance, thermal_loss_output, AxisShape, ChannelParams,
    Constellation, Distribution1D, PhaseDiffusionParams,
};
use ng_core::skr::EpsilonGOptions;
use rayon::prelude::*;
use std::path::{Path, PathBuf};

pub struct OutputFile {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

pub struct RunResult {
    pub files: Vec<OutputFile>,
    /// Number of rows carrying a non-empty warnings field.
    pub warning_rows: usize,
}

fn err(e: ng_core::Error) -> String {
    e.to_string()
}

/// Shortest round-trip decimal form; the single float formatter for CSV.
fn f(x: f64) -> String {
    format!("{x}")
}

fn axis_for(shape: AxisShape, m: usize) -> Result<Distribution1D, String> {
    if m == 1 {
        // A lone symbol must sit at the origin to stay symmetric; both
        // shapings degenerate to the same single point.
        return Ok(Distribution1D {
            points: vec![0.0],
            weights: vec![1.0],
        });
    }
    match shape {
        AxisShape::GaussHermite => gauss_hermite_1d(m),
        AxisShape::RandomWalk => random_walk_1d(m),
    }
    .map_err(err)
}

fn build(shape: AxisShape, m: usize, vm: f64) -> Result<Constellation, String> {
    let axis = axis_for(shape, m)?;
    qam_product(&axis, vm, shape).map_err(err)
}

fn meta_line(cfg: &ResolvedConfig, extra: &[(&str, String)]) -> String {
    let mut s = format!(
        "# ng {} experiment={} config_hash={} tail_tol={} log_base=2",
        env!("CARGO_PKG_VERSION"),
        cfg.experiment.name(),
        cfg.hash(),
        cfg.tail_tol
    );
    for (k, v) in extra {
        s.push(' ');
        s.push_str(k);
        s.push('=');
        s.push_str(v);
    }
    s
}

fn single_shape(cfg: &ResolvedConfig) -> Result<AxisShape, String> {
    let shapes = cfg.shape.shapes();
    if shapes.len() != 1 {
        return Err(format!(
            "{} uses a single shape; pass --shape gh or --shape rw",
            cfg.experiment.name()
        ));
    }
    Ok(shapes[0])
}

fn single_tau(cfg: &ResolvedConfig) -> Result<f64, String> {
    if let Some(t) = cfg.tau {
        return Ok(t);
    }
    match cfg.dist_km.first() {
        Some(&d) => tau_from_distance(d, cfg.db_per_km).map_err(err),
        None => Err("a transmittance (or distance) is required".to_owned()),
    }
}

fn eps_options(cfg: &ResolvedConfig) -> EpsilonGOptions {
    EpsilonGOptions {
        tail_tol: cfg.tail_tol,
        quadrature_nodes: cfg.quadrature_nodes,
        complex_channel: true,
    }
}

/// Fock cutoff for the thermal-loss output of a constellation.
fn loss_cutoff(c: &Constellation, p: &ChannelParams, tail_tol: f64) -> Result<usize, String> {
    let st = p.tau().sqrt();
    let comps: Vec<(f64, f64)> = c
        .amplitudes()
        .iter()
        .zip(c.probs())
        .map(|(&a, &prob)| ((st * a).norm(), prob))
        .collect();
    mixture_cutoff(&comps, p.nbar() * (1.0 - p.tau()), tail_tol).map_err(err)
}

/// Fock cutoff for the constellation itself (no channel).
fn input_cutoff(c: &Constellation, tail_tol: f64) -> Result<usize, String> {
    let comps: Vec<(f64, f64)> = c
        .amplitudes()
        .iter()
        .zip(c.probs())
        .map(|(&a, &prob)| (a.norm(), prob))
        .collect();
    mixture_cutoff(&comps, 0.0, tail_tol).map_err(err)
}

pub fn run(cfg: &ResolvedConfig, output: &Path) -> Result<RunResult, String> {
    match cfg.experiment {
        Experiment::Fig2a => fig2a(cfg, output),
        Experiment::Fig2b => fig2b(cfg, output),
        Experiment::Fig3a => fig3(cfg, output, true),
        Experiment::Fig3b => fig3(cfg, output, false),
        Experiment::Fig5 => fig5(cfg, output),
        Experiment::Regions => regions(cfg, output),
        Experiment::Sweep => sweep(cfg, output),
    }
}

fn finish(
    meta: String,
    header: &[&str],
    rows: Vec<Vec<String>>,
    output: &Path,
) -> Result<RunResult, String> {
    let warning_rows = rows.iter().filter(|r| !r.last().unwrap().is_empty()).count();
    let mut t = Table::new(meta, header);
    t.extend(rows);
    Ok(RunResult {
        files: vec![OutputFile {
            path: output.to_path_buf(),
            bytes: t.to_bytes(),
        }],
        warning_rows,
    })
}

/// Input non-Gaussianity of the constellation family versus size N = m^2.
fn fig2a(cfg: &ResolvedConfig, output: &Path) -> Result<RunResult, String> {
    let vm = cfg.vm_list[0];
    let mut jobs = Vec::new();
    for shape in cfg.shape.shapes() {
        for &m in &cfg.m_list {
            jobs.push((shape, m));
        }
    }
    let rows: Result<Vec<Vec<String>>, String> = jobs
        .par_iter()
        .map(|&(shape, m)| {
            let c = build(shape, m, vm)?;
            let d = delta_vn_constellation(&c).map_err(err)?;
            Ok(vec![
                shape.to_string(),
                (m * m).to_string(),
                f(d),
                String::new(),
                String::new(),
            ])
        })
        .collect();
    finish(
        meta_line(cfg, &[]),
        &["shape", "N", "delta_vn", "n_max", "warnings"],
        rows?,
        output,
    )
}

/// Output non-Gaussianity after thermal loss at fixed transmittance, for
/// several thermal occupations, against the input line.
fn fig2b(cfg: &ResolvedConfig, output: &Path) -> Result<RunResult, String> {
    let vm = cfg.vm_list[0];
    let shape = single_shape(cfg)?;
    let tau = single_tau(cfg)?;
    let groups: Result<Vec<Vec<Vec<String>>>, String> = cfg
        .m_list
        .par_iter()
        .map(|&m| {
            let c = build(shape, m, vm)?;
            let n = (m * m).to_string();
            let mut rows = Vec::new();
            let d_in = delta_vn_constellation(&c).map_err(err)?;
            rows.push(vec![
                n.clone(),
                "input".to_owned(),
                f(d_in),
                String::new(),
                String::new(),
            ]);
            for &nbar in &cfg.nbar_list {
                let p = ChannelParams::new(tau, nbar).map_err(err)?;
                let n_max = loss_cutoff(&c, &p, cfg.tail_tol)?;
                let rho = thermal_loss_output(&c, &p, n_max).map_err(err)?;
                let d = delta_vn(&rho).map_err(err)?;
                rows.push(vec![
                    n.clone(),
                    f(nbar),
                    f(d),
                    n_max.to_string(),
                    String::new(),
                ]);
            }
            Ok(rows)
        })
        .collect();
    let rows: Vec<Vec<String>> = groups?.into_iter().flatten().collect();
    finish(
        meta_line(cfg, &[("tau", f(tau))]),
        &["N", "nbar_label", "delta_vn", "n_max", "warnings"],
        rows,
        output,
    )
}

/// Distance sweep (fig3a) or modulation-variance sweep (fig3b) of output
/// non-Gaussianity, capacity gap, and the epsilon_G bound.
fn fig3(cfg: &ResolvedConfig, output: &Path, distance_sweep: bool) -> Result<RunResult, String> {
    let nbar = cfg.nbar_list[0];
    let opts = eps_options(cfg);
    // Each job carries (shape, m, vm, tau, x-column value).
    let mut jobs = Vec::new();
    if distance_sweep {
        let vm = cfg.vm_list[0];
        for shape in cfg.shape.shapes() {
            for &m in &cfg.m_list {
                for &d in &cfg.dist_km {
                    let tau = tau_from_distance(d, cfg.db_per_km).map_err(err)?;
                    jobs.push((shape, m, vm, tau, d));
                }
            }
        }
    } else {
        let tau = single_tau(cfg)?;
        for shape in cfg.shape.shapes() {
            for &m in &cfg.m_list {
                for &vm in &cfg.vm_list {
                    jobs.push((shape, m, vm, tau, vm));
                }
            }
        }
    }
    let rows: Result<Vec<Vec<String>>, String> = jobs
        .par_iter()
        .map(|&(shape, m, vm, tau, x)| {
            let p = ChannelParams::new(tau, nbar).map_err(err)?;
            let c = build(shape, m, vm)?;
            let r = epsilon_g_bound(&c, &p, &opts).map_err(err)?;
            Ok(vec![
                shape.to_string(),
                (m * m).to_string(),
                f(x),
                f(r.delta_vn_out),
                f(r.capacity_gap),
                f(r.epsilon_g_upper),
                r.n_max.to_string(),
                r.warnings.join("; "),
            ])
        })
        .collect();
    let x_col = if distance_sweep { "d_km" } else { "V_m" };
    finish(
        meta_line(
            cfg,
            &[
                ("db_per_km", f(cfg.db_per_km)),
                ("nbar", f(nbar)),
                ("dxn_channel", "complex".to_owned()),
            ],
        ),
        &[
            "shape",
            "N",
            x_col,
            "delta_vn",
            "capacity_gap",
            "epsilon_g_upper",
            "n_max",
            "warnings",
        ],
        rows?,
        output,
    )
}

/// Phase-diffusion sweep: input line plus one line per gamma.
fn fig5(cfg: &ResolvedConfig, output: &Path) -> Result<RunResult, String> {
    let vm = cfg.vm_list[0];
    let shape = single_shape(cfg)?;
    let gammas: Result<Vec<(f64, String)>, String> = cfg
        .gamma_list
        .iter()
        .map(|label| parse_gamma(label))
        .collect();
    let gammas = gammas?;
    let groups: Result<Vec<Vec<Vec<String>>>, String> = cfg
        .m_list
        .par_iter()
        .map(|&m| {
            let c = build(shape, m, vm)?;
            let n = (m * m).to_string();
            let mut rows = Vec::new();
            let d_in = delta_vn_constellation(&c).map_err(err)?;
            rows.push(vec![
                n.clone(),
                "input".to_owned(),
                f(d_in),
                String::new(),
                String::new(),
            ]);
            let n_max = input_cutoff(&c, cfg.tail_tol)?;
            let kets: Vec<_> = c
                .amplitudes()
                .iter()
                .map(|&a| coherent_ket(a, n_max))
                .collect();
            let rho_in = density_from_pure_ensemble(&kets, c.probs()).map_err(err)?;
            for (gval, glabel) in &gammas {
                let pd = PhaseDiffusionParams::new(*gval).map_err(err)?;
                let rho = phase_diffusion(&rho_in, &pd);
                let d = delta_vn(&rho).map_err(err)?;
                rows.push(vec![
                    n.clone(),
                    glabel.clone(),
                    f(d),
                    n_max.to_string(),
                    String::new(),
                ]);
            }
            Ok(rows)
        })
        .collect();
    let rows: Vec<Vec<String>> = groups?.into_iter().flatten().collect();
    finish(
        meta_line(cfg, &[("gamma_is_delta", "true".to_owned())]),
        &["N", "gamma_label", "delta_vn", "n_max", "warnings"],
        rows,
        output,
    )
}

/// MAP decision regions for the shaped 16-QAM and its uniform-prior twin:
/// one CSV and one PGM per variant.
fn regions(cfg: &ResolvedConfig, output: &Path) -> Result<RunResult, String> {
    let vm = cfg.vm_list[0];
    let shape = single_shape(cfg)?;
    let m = cfg.m_list[0];
    let shaped = build(shape, m, vm)?;
    let n = shaped.len();
    let uniform = Constellation::new(
        shaped.amplitudes().to_vec(),
        vec![1.0 / n as f64; n],
    )
    .map_err(err)?;
    let extent = if cfg.extent > 0.0 {
        cfg.extent
    } else {
        1.5 * shaped.max_abs()
    };
    let stem = output.with_extension("");
    let stem = stem.to_string_lossy();
    let mut files = Vec::new();
    for (tag, c) in [("uniform", &uniform), ("shaped", &shaped)] {
        let grid = map_regions(c, cfg.noise_var, extent, cfg.resolution).map_err(err)?;
        let mut t = Table::new(
            meta_line(
                cfg,
                &[
                    ("variant", (*tag).to_owned()),
                    ("noise_var", f(cfg.noise_var)),
                    ("extent", f(extent)),
                ],
            ),
            &["x", "y", "label"],
        );
        for iy in 0..cfg.resolution {
            let y = grid.coordinate(iy);
            for ix in 0..cfg.resolution {
                let x = grid.coordinate(ix);
                t.push(vec![f(x), f(y), grid.labels[[iy, ix]].to_string()]);
            }
        }
        files.push(OutputFile {
            path: PathBuf::from(format!("{stem}_{tag}.csv")),
            bytes: t.to_bytes(),
        });
        files.push(OutputFile {
            path: PathBuf::from(format!("{stem}_{tag}.pgm")),
            bytes: pgm::render(&grid, n as u32),
        });
    }
    Ok(RunResult {
        files,
        warning_rows: 0,
    })
}

/// Full epsilon_G report grid over shapes, sizes, variances, channels.
fn sweep(cfg: &ResolvedConfig, output: &Path) -> Result<RunResult, String> {
    let opts = eps_options(cfg);
    let taus: Vec<f64> = if let Some(t) = cfg.tau {
        vec![t]
    } else {
        cfg.dist_km
            .iter()
            .map(|&d| tau_from_distance(d, cfg.db_per_km).map_err(err))
            .collect::<Result<Vec<f64>, String>>()?
    };
    let mut jobs = Vec::new();
    for shape in cfg.shape.shapes() {
        for &m in &cfg.m_list {
            for &vm in &cfg.vm_list {
                for &tau in &taus {
                    for &nbar in &cfg.nbar_list {
                        jobs.push((shape, m, vm, tau, nbar));
                    }
                }
            }
        }
    }
    let rows: Result<Vec<Vec<String>>, String> = jobs
        .par_iter()
        .map(|&(shape, m, vm, tau, nbar)| {
            let p = ChannelParams::new(tau, nbar).map_err(err)?;
            let c = build(shape, m, vm)?;
            let r = epsilon_g_bound(&c, &p, &opts).map_err(err)?;
            Ok(vec![
                shape.to_string(),
                (m * m).to_string(),
                f(vm),
                f(tau),
                f(nbar),
                f(r.snr),
                f(r.delta_vn_in),
                f(r.delta_vn_out),
                f(r.capacity_gap),
                f(r.epsilon_g_upper),
                r.n_max.to_string(),
                r.warnings.join("; "),
            ])
        })
        .collect();
    finish(
        meta_line(cfg, &[("dxn_channel", "complex".to_owned())]),
        &[
            "constellation",
            "N",
            "V_m",
            "tau",
            "nbar",
            "snr",
            "delta_vn_in",
            "delta_vn_out",
            "capacity_gap",
            "epsilon_g_upper",
            "n_max",
            "warnings",
        ],
        rows?,
        output,
    )
}
