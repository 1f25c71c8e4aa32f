use clap::Parser;
use ng_cli::config::{self, Experiment, GammaIn, PartialConfig};
use ng_cli::experiments;
use std::path::PathBuf;
use std::process::ExitCode;

/// Non-Gaussianity experiments for discrete coherent-state constellations.
///
/// Computes delta_vn of QAM constellations and their thermal-loss /
/// phase-diffusion outputs, the classical capacity gap, and the epsilon_G
/// secret-key-rate bound, and writes the sweeps as CSV (plus PGM decision
/// region maps). All entropies are in bits.
#[derive(Parser)]
#[command(name = "ng", version, about, max_term_width = 100)]
struct Cli {
    /// Experiment: fig2a, fig2b, fig3a, fig3b, fig5, regions, or sweep
    experiment: Experiment,

    /// Constellation shaping: gh, rw, or both
    #[arg(long)]
    shape: Option<String>,

    /// Points per quadrature axis (N = m^2), comma-separated
    #[arg(long, value_delimiter = ',', value_name = "M,...")]
    m: Option<Vec<usize>>,

    /// Modulation variance(s) V_m (mean photon number), comma-separated
    #[arg(long, value_delimiter = ',', value_name = "F,...")]
    vm: Option<Vec<f64>>,

    /// Fixed channel transmittance in (0, 1]
    #[arg(long, value_name = "F", conflicts_with = "dist_km")]
    tau: Option<f64>,

    /// Channel distance(s) in km, comma-separated (tau = 10^(-db_per_km/20 d))
    #[arg(long = "dist-km", value_delimiter = ',', value_name = "F,...")]
    dist_km: Option<Vec<f64>>,

    /// Thermal occupation(s) of the loss channel environment
    #[arg(long, value_delimiter = ',', value_name = "F,...")]
    nbar: Option<Vec<f64>>,

    /// Phase-diffusion strength(s); accepts numbers or "inf"
    #[arg(long, value_delimiter = ',', value_name = "F|inf,...")]
    gamma: Option<Vec<String>>,

    /// Photon-number tail mass allowed outside the Fock truncation
    #[arg(long = "tail-tol", value_name = "F")]
    tail_tol: Option<f64>,

    /// Gauss-Hermite nodes for mutual-information quadrature
    #[arg(long, value_name = "K")]
    nodes: Option<usize>,

    /// Output path (default <experiment>.csv; regions derives per-variant names)
    #[arg(short = 'o', long = "output", value_name = "PATH")]
    output: Option<PathBuf>,

    /// JSON config file; explicit flags override its fields
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Exit with code 3 if any row carries a numerical warning
    #[arg(long)]
    strict: bool,

    /// Fiber attenuation in amplitude-dB per km for distance conversion
    #[arg(long = "db-per-km", value_name = "F")]
    db_per_km: Option<f64>,

    /// AWGN noise variance for MAP decision regions
    #[arg(long = "noise-var", value_name = "F")]
    noise_var: Option<f64>,

    /// Decision-grid half-width (0 = auto from the constellation)
    #[arg(long, value_name = "F")]
    extent: Option<f64>,

    /// Decision-grid points per side
    #[arg(long, value_name = "I")]
    resolution: Option<usize>,
}

fn execute(cli: Cli) -> Result<usize, String> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            Some(PartialConfig::from_json(&text)?)
        }
        None => None,
    };
    let flags = PartialConfig {
        experiment: None,
        shape: cli.shape,
        m_list: cli.m,
        vm_list: cli.vm,
        tau: cli.tau,
        dist_km: cli.dist_km,
        nbar_list: cli.nbar,
        gamma_list: cli
            .gamma
            .map(|v| v.into_iter().map(GammaIn::Label).collect()),
        tail_tol: cli.tail_tol,
        quadrature_nodes: cli.nodes,
        db_per_km: cli.db_per_km,
        noise_var: cli.noise_var,
        extent: cli.extent,
        resolution: cli.resolution,
        output: cli.output,
    };
    let (cfg, output) = config::resolve(cli.experiment, file, flags)?;
    let result = experiments::run(&cfg, &output)?;
    for file in &result.files {
        if let Some(dir) = file.path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)
                    .map_err(|e| format!("{}: {e}", dir.display()))?;
            }
        }
        std::fs::write(&file.path, &file.bytes)
            .map_err(|e| format!("{}: {e}", file.path.display()))?;
        println!("wrote {}", file.path.display());
    }
    Ok(result.warning_rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let strict = cli.strict;
    match execute(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} row(s) carry numerical warnings");
            if strict {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
