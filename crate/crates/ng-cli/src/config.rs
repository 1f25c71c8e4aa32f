//! Experiment configuration: per-experiment defaults, JSON file loading,
//! flag overrides, validation, and the canonical hash stamped into outputs.

use ng_core::{AxisShape, DEFAULT_DB_PER_KM, MAX_AXIS_POINTS};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig5,
    Regions,
    Sweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2a => "fig2a",
            Experiment::Fig2b => "fig2b",
            Experiment::Fig3a => "fig3a",
            Experiment::Fig3b => "fig3b",
            Experiment::Fig5 => "fig5",
            Experiment::Regions => "regions",
            Experiment::Sweep => "sweep",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig2a" => Ok(Experiment::Fig2a),
            "fig2b" => Ok(Experiment::Fig2b),
            "fig3a" => Ok(Experiment::Fig3a),
            "fig3b" => Ok(Experiment::Fig3b),
            "fig5" => Ok(Experiment::Fig5),
            "regions" => Ok(Experiment::Regions),
            "sweep" => Ok(Experiment::Sweep),
            other => Err(format!(
                "unknown experiment {other:?} (expected fig2a, fig2b, fig3a, fig3b, fig5, \
                 regions, or sweep)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeSel {
    Gh,
    Rw,
    Both,
}

impl ShapeSel {
    pub fn shapes(self) -> Vec<AxisShape> {
        match self {
            ShapeSel::Gh => vec![AxisShape::GaussHermite],
            ShapeSel::Rw => vec![AxisShape::RandomWalk],
            ShapeSel::Both => vec![AxisShape::GaussHermite, AxisShape::RandomWalk],
        }
    }
}

impl FromStr for ShapeSel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gh" => Ok(ShapeSel::Gh),
            "rw" => Ok(ShapeSel::Rw),
            "both" => Ok(ShapeSel::Both),
            other => Err(format!("unknown shape {other:?} (expected gh, rw, or both)")),
        }
    }
}

/// A gamma entry in a JSON config: a number or the string `"inf"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GammaIn {
    Num(f64),
    Label(String),
}

/// Parses a phase-diffusion strength and returns its canonical label.
pub fn parse_gamma(s: &str) -> Result<(f64, String), String> {
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        return Ok((f64::INFINITY, "inf".to_owned()));
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("invalid gamma value {s:?} (expected a number or \"inf\")"))?;
    if !(v >= 0.0) {
        return Err(format!("gamma must be nonnegative (got {v})"));
    }
    if v.is_infinite() {
        return Ok((v, "inf".to_owned()));
    }
    Ok((v, format!("{v}")))
}

/// Partial configuration from a JSON file or command-line flags; `None`
/// fields fall back to the experiment defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub experiment: Option<String>,
    pub shape: Option<String>,
    pub m_list: Option<Vec<usize>>,
    pub vm_list: Option<Vec<f64>>,
    pub tau: Option<f64>,
    pub dist_km: Option<Vec<f64>>,
    pub nbar_list: Option<Vec<f64>>,
    pub gamma_list: Option<Vec<GammaIn>>,
    pub tail_tol: Option<f64>,
    pub quadrature_nodes: Option<usize>,
    pub db_per_km: Option<f64>,
    pub noise_var: Option<f64>,
    pub extent: Option<f64>,
    pub resolution: Option<usize>,
    pub output: Option<PathBuf>,
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config file: {e}"))
    }

    /// Later partials override earlier ones field-by-field.
    fn overlay(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            experiment: over.experiment.or(self.experiment),
            shape: over.shape.or(self.shape),
            m_list: over.m_list.or(self.m_list),
            vm_list: over.vm_list.or(self.vm_list),
            tau: over.tau.or(self.tau),
            dist_km: over.dist_km.or(self.dist_km),
            nbar_list: over.nbar_list.or(self.nbar_list),
            gamma_list: over.gamma_list.or(self.gamma_list),
            tail_tol: over.tail_tol.or(self.tail_tol),
            quadrature_nodes: over.quadrature_nodes.or(self.quadrature_nodes),
            db_per_km: over.db_per_km.or(self.db_per_km),
            noise_var: over.noise_var.or(self.noise_var),
            extent: over.extent.or(self.extent),
            resolution: over.resolution.or(self.resolution),
            output: over.output.or(self.output),
        }
    }
}

/// Fully resolved, validated experiment parameters. This struct (serialized
/// as canonical JSON) is what the config hash covers; the output path is
/// deliberately excluded so identical parameters give identical file bytes.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub experiment: Experiment,
    pub shape: ShapeSel,
    pub m_list: Vec<usize>,
    pub vm_list: Vec<f64>,
    /// Fixed transmittance; mutually exclusive with `dist_km`.
    pub tau: Option<f64>,
    /// Distance sweep converted to transmittance via `db_per_km`.
    pub dist_km: Vec<f64>,
    pub nbar_list: Vec<f64>,
    /// Canonical labels; parse with [`parse_gamma`].
    pub gamma_list: Vec<String>,
    pub tail_tol: f64,
    pub quadrature_nodes: usize,
    pub db_per_km: f64,
    pub noise_var: f64,
    /// Decision-grid half-width; 0 means auto (1.5x the largest amplitude).
    pub extent: f64,
    pub resolution: usize,
}

impl ResolvedConfig {
    /// First 16 hex characters of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialization cannot fail");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn defaults_for(experiment: Experiment) -> PartialConfig {
    let all_m: Vec<usize> = (1..=32).collect();
    let fig3_m = vec![4usize, 8, 16, 32];
    let mut d = PartialConfig {
        shape: Some("both".to_owned()),
        m_list: Some(all_m),
        vm_list: Some(vec![2.5]),
        tau: None,
        dist_km: None,
        nbar_list: Some(vec![0.0]),
        gamma_list: Some(vec![GammaIn::Num(0.15), GammaIn::Label("inf".to_owned())]),
        tail_tol: Some(1e-10),
        quadrature_nodes: Some(96),
        db_per_km: Some(DEFAULT_DB_PER_KM),
        noise_var: Some(1.0),
        extent: Some(0.0),
        resolution: Some(257),
        ..PartialConfig::default()
    };
    match experiment {
        Experiment::Fig2a => {}
        Experiment::Fig2b => {
            d.shape = Some("gh".to_owned());
            d.tau = Some(0.5);
            d.nbar_list = Some(vec![0.0, 0.2, 0.4]);
        }
        Experiment::Fig3a => {
            d.m_list = Some(fig3_m);
            d.nbar_list = Some(vec![0.1]);
            d.dist_km = Some((0..=15).map(|k| 10.0 * k as f64).collect());
        }
        Experiment::Fig3b => {
            d.m_list = Some(fig3_m);
            d.nbar_list = Some(vec![0.1]);
            d.dist_km = Some(vec![50.0]);
            d.vm_list = Some((1..=10).map(|k| 0.5 * k as f64).collect());
        }
        Experiment::Fig5 => {
            d.shape = Some("gh".to_owned());
        }
        Experiment::Regions => {
            d.shape = Some("gh".to_owned());
            d.m_list = Some(vec![4]);
        }
        Experiment::Sweep => {
            d.m_list = Some(vec![4, 8, 16]);
            d.tau = Some(0.5);
            d.nbar_list = Some(vec![0.1]);
        }
    }
    d
}

/// Merges defaults, optional config file, and flag overrides into a
/// validated configuration plus the output path.
pub fn resolve(
    experiment: Experiment,
    file: Option<PartialConfig>,
    flags: PartialConfig,
) -> Result<(ResolvedConfig, PathBuf), String> {
    if let Some(f) = &file {
        if let Some(e) = &f.experiment {
            let from_file: Experiment = e.parse()?;
            if from_file != experiment {
                return Err(format!(
                    "config file is for experiment {:?} but {:?} was requested",
                    from_file.name(),
                    experiment.name()
                ));
            }
        }
    }
    let mut merged = defaults_for(experiment);
    if let Some(f) = file {
        merged = merged.overlay(f);
    }
    let tau_flag = flags.tau.is_some();
    let dist_flag = flags.dist_km.is_some();
    if tau_flag && dist_flag {
        return Err("--tau and --dist-km are mutually exclusive".to_owned());
    }
    // A fixed tau from the flags replaces any default distance sweep (and
    // vice versa); within one source the two remain exclusive.
    if tau_flag {
        merged.dist_km = None;
    }
    if dist_flag {
        merged.tau = None;
    }
    merged = merged.overlay(flags);

    let shape: ShapeSel = merged
        .shape
        .as_deref()
        .unwrap_or("both")
        .parse()
        .map_err(|e: String| e)?;
    let m_list = merged.m_list.unwrap_or_default();
    if m_list.is_empty() {
        return Err("m_list must not be empty".to_owned());
    }
    for &m in &m_list {
        if m == 0 || m > MAX_AXIS_POINTS {
            return Err(format!(
                "m = {m} out of range (1..={MAX_AXIS_POINTS})"
            ));
        }
    }
    let vm_list = merged.vm_list.unwrap_or_default();
    if vm_list.is_empty() {
        return Err("vm_list must not be empty".to_owned());
    }
    for &vm in &vm_list {
        if !(vm >= 0.0) || !vm.is_finite() {
            return Err(format!("V_m = {vm} out of range (must be >= 0)"));
        }
    }
    if merged.tau.is_some() && merged.dist_km.as_ref().is_some_and(|d| !d.is_empty()) {
        return Err("tau and dist_km are mutually exclusive in the config".to_owned());
    }
    if let Some(t) = merged.tau {
        if !(t > 0.0 && t <= 1.0) {
            return Err(format!("tau = {t} out of range (0, 1]"));
        }
    }
    let dist_km = merged.dist_km.unwrap_or_default();
    for &d in &dist_km {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(format!("distance {d} km out of range (must be >= 0)"));
        }
    }
    let nbar_list = merged.nbar_list.unwrap_or_default();
    if nbar_list.is_empty() {
        return Err("nbar_list must not be empty".to_owned());
    }
    for &n in &nbar_list {
        if !(n >= 0.0) || !n.is_finite() {
            return Err(format!("nbar = {n} out of range (must be >= 0)"));
        }
    }
    let mut gamma_list = Vec::new();
    for g in merged.gamma_list.unwrap_or_default() {
        let label = match g {
            GammaIn::Num(v) => parse_gamma(&format!("{v}"))?.1,
            GammaIn::Label(s) => parse_gamma(&s)?.1,
        };
        gamma_list.push(label);
    }
    if gamma_list.is_empty() {
        return Err("gamma_list must not be empty".to_owned());
    }
    let tail_tol = merged.tail_tol.unwrap_or(1e-10);
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(format!("tail_tol = {tail_tol} out of range (0, 1)"));
    }
    let quadrature_nodes = merged.quadrature_nodes.unwrap_or(96);
    if !(2..=256).contains(&quadrature_nodes) {
        return Err(format!(
            "quadrature_nodes = {quadrature_nodes} out of range (2..=256; convergence \
             checking doubles it)"
        ));
    }
    let db_per_km = merged.db_per_km.unwrap_or(DEFAULT_DB_PER_KM);
    if !(db_per_km > 0.0) || !db_per_km.is_finite() {
        return Err(format!("db_per_km = {db_per_km} out of range (must be > 0)"));
    }
    let noise_var = merged.noise_var.unwrap_or(1.0);
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(format!("noise_var = {noise_var} out of range (must be > 0)"));
    }
    let extent = merged.extent.unwrap_or(0.0);
    if !(extent >= 0.0) || !extent.is_finite() {
        return Err(format!("extent = {extent} out of range (must be >= 0)"));
    }
    let resolution = merged.resolution.unwrap_or(257);
    if resolution < 2 {
        return Err(format!("resolution = {resolution} out of range (must be >= 2)"));
    }

    if experiment == Experiment::Fig3a && dist_km.is_empty() {
        return Err("fig3a sweeps distance; provide --dist-km (not --tau)".to_owned());
    }
    let needs_tau = matches!(
        experiment,
        Experiment::Fig2b | Experiment::Fig3b | Experiment::Sweep
    );
    if needs_tau && merged.tau.is_none() && dist_km.is_empty() {
        return Err("this experiment needs --tau or --dist-km".to_owned());
    }

    let cfg = ResolvedConfig {
        experiment,
        shape,
        m_list,
        vm_list,
        tau: merged.tau,
        dist_km,
        nbar_list,
        gamma_list,
        tail_tol,
        quadrature_nodes,
        db_per_km,
        noise_var,
        extent,
        resolution,
    };
    let output = merged
        .output
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.name())));
    Ok((cfg, output))
}
