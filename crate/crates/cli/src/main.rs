//! `rydlat`: command-line front end for the lattice, ramp, gate, budget and
//! cluster simulations.
//!
//! Exit codes: 0 success, 2 parameter error, 3 numerical-domain error,
//! 64 usage error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rydlat::budget::{Dimension, Scheme};
use rydlat::Error;

use config::{ClusterGate, Format, RunConfig};

const EXIT_PARAMETER: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "rydlat",
    version,
    about = "Rydberg phase gates and cluster states in optical superlattices"
)]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (default: $RYDLAT_OUT_DIR/<command>.<ext>, else stdout).
    #[arg(long, short = 'o', global = true)]
    out: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit without running.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Omit the wall-clock timestamp so identical runs give identical files.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Band energies E_n(q) of the superlattice.
    Bands(LatticeArgs),
    /// Wannier functions and left/right well states of one double well.
    Wannier(LatticeArgs),
    /// Ground-band retention through the double-well merge ramp.
    Ramp(RampArgs),
    /// Ground-band retention through a lattice-spacing stretch.
    Stretch(StretchArgs),
    /// Phase gate without Rydberg blockade.
    GateNoblockade(GateArgs),
    /// Phase gate with Rydberg blockade and in-pair addressing.
    GateBlockade(BlockadeArgs),
    /// Error budget of a reference setup.
    ErrorBudget(BudgetArgs),
    /// Duration of a cluster-generation sequence.
    Timing(TimingArgs),
    /// Cluster-state protocol on a chain or grid.
    Cluster(ClusterArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bands(_) => "bands",
            Command::Wannier(_) => "wannier",
            Command::Ramp(_) => "ramp",
            Command::Stretch(_) => "stretch",
            Command::GateNoblockade(_) => "gate-noblockade",
            Command::GateBlockade(_) => "gate-blockade",
            Command::ErrorBudget(_) => "error-budget",
            Command::Timing(_) => "timing",
            Command::Cluster(_) => "cluster",
        }
    }
}

/// Copies every flag that was given into the block field of the same name.
macro_rules! overlay {
    ($block:expr, $args:expr, { $($field:ident),* $(,)? }) => {
        $(if let Some(v) = $args.$field.clone() { $block.$field = v; })*
    };
}

#[derive(Debug, Args)]
struct LatticeArgs {
    /// Long-lattice depth (E_R).
    #[arg(long = "V0", visible_alias = "v0")]
    v0: Option<f64>,
    /// Short-lattice depth (E_R).
    #[arg(long = "V1", visible_alias = "v1")]
    v1: Option<f64>,
    /// Relative phase φ (rad).
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    /// Long-lattice wavevector (units of k_ref).
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    recoil_khz: Option<f64>,
    /// Plane-wave cutoff N_max.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    q_points: Option<usize>,
    #[arg(long)]
    n_bands: Option<usize>,
    /// Double-well cell index (wannier).
    #[arg(long, allow_hyphen_values = true)]
    cell: Option<i64>,
}

#[derive(Debug, Args)]
struct RampArgs {
    /// Segment durations in μs: V0 down, φ ramp, V0 up.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    split_us: Option<Vec<f64>>,
    #[arg(long)]
    v_high: Option<f64>,
    #[arg(long = "V1", visible_alias = "v1")]
    v1: Option<f64>,
    #[arg(long)]
    recoil_khz: Option<f64>,
    #[arg(long)]
    n_tracked: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Duration scale factors for an adiabaticity scan, comma separated.
    #[arg(long, value_delimiter = ',')]
    scan: Option<Vec<f64>>,
    /// Worker threads for the scan.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct StretchArgs {
    /// Ramp duration (1/E_R).
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    k_start: Option<f64>,
    #[arg(long)]
    k_end: Option<f64>,
    #[arg(long = "V1", visible_alias = "v1")]
    v1: Option<f64>,
    #[arg(long)]
    recoil_khz: Option<f64>,
    #[arg(long)]
    n_tracked: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct PulseArgs {
    /// Two-photon light shift Ω²/Δ (MHz).
    #[arg(long)]
    light_shift_mhz: Option<f64>,
    /// Intermediate-state detuning Δ (MHz).
    #[arg(long)]
    delta_mhz: Option<f64>,
    /// Ground hyperfine splitting (MHz).
    #[arg(long)]
    hf_mhz: Option<f64>,
    #[arg(long)]
    photon_order: Option<u32>,
    /// Fractional Rabi-frequency offset.
    #[arg(long, allow_hyphen_values = true)]
    rabi_offset: Option<f64>,
    /// Drive factor (Ω̃/Ω)^order; below 1 simulates an inactive pair.
    #[arg(long)]
    effective_drive: Option<f64>,
}

#[derive(Debug, Args)]
struct InteractionArgs {
    /// Rydberg interaction V_int (MHz).
    #[arg(long = "v-int-mhz")]
    v_mhz: Option<f64>,
    /// 6 (van der Waals) or 3 (dipolar).
    #[arg(long)]
    power: Option<u32>,
    /// Rydberg decay rate (1/s).
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Debug, Args)]
struct GateArgs {
    #[command(flatten)]
    pulse: PulseArgs,
    #[command(flatten)]
    interaction: InteractionArgs,
    /// Compare with the analytic oracles and print the ratio table.
    #[arg(long)]
    verify: bool,
}

#[derive(Debug, Args)]
struct BlockadeArgs {
    #[command(flatten)]
    gate: GateArgs,
    /// Relative left-right qubit shift Δ_vec (MHz).
    #[arg(long, allow_hyphen_values = true)]
    delta_vec_mhz: Option<f64>,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// rb_noblockade_2ph, rb_noblockade_4ph, rb_blockade_2ph, csho_blockade_1ph,
    /// co_molecule_2ph or co_molecule_4ph.
    #[arg(long)]
    preset: Option<String>,
    /// Compare analytic terms with gate simulations and print the ratio table.
    #[arg(long)]
    verify: bool,
}

#[derive(Debug, Args)]
struct TimingArgs {
    /// no_blockade or blockade.
    #[arg(long, value_parser = parse_with::<Scheme>)]
    scheme: Option<Scheme>,
    /// 1d or 2d.
    #[arg(long, value_parser = parse_with::<Dimension>)]
    dimension: Option<Dimension>,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// 1d:N or 2d:RxC.
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long, value_enum)]
    gate: Option<ClusterGate>,
    #[command(flatten)]
    pulse: PulseArgs,
    #[command(flatten)]
    interaction: InteractionArgs,
    #[arg(long, allow_hyphen_values = true)]
    delta_vec_mhz: Option<f64>,
}

fn parse_with<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse::<T>().map_err(|e| e.to_string())
}

fn overlay_pulse(c: &mut RunConfig, a: &PulseArgs) {
    if let Some(p) = c.pulse.as_mut() {
        overlay!(p, a, { light_shift_mhz, delta_mhz, hf_mhz, photon_order, rabi_offset, effective_drive });
    }
}

fn overlay_interaction(c: &mut RunConfig, a: &InteractionArgs) {
    if let Some(i) = c.interaction.as_mut() {
        overlay!(i, a, { v_mhz, power, gamma });
    }
}

fn overlay_delta_vec(c: &mut RunConfig, v: Option<f64>) {
    if let (Some(b), Some(v)) = (c.blockade.as_mut(), v) {
        b.delta_vec_mhz = v;
    }
}

/// Applies the subcommand flags on top of `c`.
fn apply_flags(c: &mut RunConfig, cmd: &Command) {
    match cmd {
        Command::Bands(a) | Command::Wannier(a) => {
            let l = c.lattice.get_or_insert_with(Default::default);
            overlay!(l, a, { v0, v1, phi, k, recoil_khz, n_max, q_points, n_bands, cell });
        }
        Command::Ramp(a) => {
            let r = c.ramp.get_or_insert_with(Default::default);
            overlay!(r, a, { v_high, v1, recoil_khz, n_tracked, samples, scan });
            if let Some(s) = &a.split_us {
                r.split_us = [s[0], s[1], s[2]];
            }
        }
        Command::Stretch(a) => {
            let s = c.stretch.get_or_insert_with(Default::default);
            overlay!(s, a, { duration, k_start, k_end, v1, recoil_khz, n_tracked, samples });
        }
        Command::GateNoblockade(a) => {
            overlay_pulse(c, &a.pulse);
            overlay_interaction(c, &a.interaction);
            c.verify |= a.verify;
        }
        Command::GateBlockade(a) => {
            overlay_pulse(c, &a.gate.pulse);
            overlay_interaction(c, &a.gate.interaction);
            overlay_delta_vec(c, a.delta_vec_mhz);
            c.verify |= a.gate.verify;
        }
        Command::ErrorBudget(a) => {
            let b = c.budget.get_or_insert_with(Default::default);
            overlay!(b, a, { preset });
            c.verify |= a.verify;
        }
        Command::Timing(a) => {
            let t = c.timing.get_or_insert_with(Default::default);
            overlay!(t, a, { scheme, dimension });
        }
        Command::Cluster(a) => {
            let k = c.cluster.get_or_insert_with(Default::default);
            overlay!(k, a, { geometry, gate });
            overlay_pulse(c, &a.pulse);
            overlay_interaction(c, &a.interaction);
            overlay_delta_vec(c, a.delta_vec_mhz);
        }
    }
}

fn run(cli: Cli) -> rydlat::Result<()> {
    let name = cli.command.name();
    let mut config = RunConfig::resolve(name, cli.config.as_deref())?;
    apply_flags(&mut config, &cli.command);
    if let Some(f) = cli.format {
        config.output.format = f;
    }
    if let Some(p) = cli.out {
        config.output.path = Some(p);
    }
    config.validate()?;
    if cli.dump_config {
        let text =
            serde_json::to_string_pretty(&config).map_err(|e| Error::Domain(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    let jobs = match &cli.command {
        Command::Ramp(a) => a.jobs,
        _ => None,
    };
    let text = commands::execute(&config, jobs, !cli.no_timestamp)?;
    output::emit(&config, &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rydlat: {e}");
            ExitCode::from(match e {
                Error::Parameter(_) => EXIT_PARAMETER,
                Error::Domain(_) | Error::Contract(_) => EXIT_DOMAIN,
            })
        }
    }
}
