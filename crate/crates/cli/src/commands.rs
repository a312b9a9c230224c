//! One runner per subcommand. Each returns the text to write.

use rydlat::budget::{self, Preset};
use rydlat::cluster::{self, GateSource, Geometry};
use rydlat::gate_blockade::{self, BlockadePulse, ThetaCondition};
use rydlat::gate_noblockade;
use rydlat::lattice::{self, LatticeParams};
use rydlat::ramps::{self, RampOptions, RampSchedule};
use rydlat::{Error, GateOutcome, InteractionParams, PulseParams, Result};
use serde::Serialize;

use crate::config::{
    BlockadeBlock, ClusterGate, Format, InteractionBlock, LatticeBlock, PulseBlock, RunConfig,
};
use crate::output::{json_document, verify_table, Csv, VerifyRow};

fn block<'a, T>(b: &'a Option<T>, name: &str) -> Result<&'a T> {
    b.as_ref()
        .ok_or_else(|| Error::Parameter(format!("configuration lacks the {name} block")))
}

pub fn execute(config: &RunConfig, jobs: Option<usize>, timestamp: bool) -> Result<String> {
    let json = |payload: &dyn erased::Payload| payload.document(config, timestamp);
    let csv = config.output.format == Format::Csv;
    match config.command.as_str() {
        "bands" => {
            let (payload, text) = bands(block(&config.lattice, "lattice")?)?;
            if csv {
                Ok(text)
            } else {
                json(&payload)
            }
        }
        "wannier" => {
            let (payload, text) = wannier(block(&config.lattice, "lattice")?)?;
            if csv {
                Ok(text)
            } else {
                json(&payload)
            }
        }
        "ramp" => {
            let (payload, text) = ramp(config, jobs)?;
            if csv {
                Ok(text)
            } else {
                json(&payload)
            }
        }
        "stretch" => {
            let s = block(&config.stretch, "stretch")?;
            let opts = RampOptions {
                samples: s.samples,
                ..Default::default()
            };
            let r = ramps::evolve_stretch_with(
                s.duration,
                s.k_start,
                s.k_end,
                s.v1,
                s.recoil_khz,
                s.n_tracked,
                &opts,
            )?;
            eprintln!("retention {:.6} over {:.1} us", r.retention, r.total_time);
            if csv {
                Ok(r.to_csv())
            } else {
                json(&r)
            }
        }
        "gate-noblockade" => {
            let payload = gate_noblockade_run(config)?;
            if csv {
                Ok(gate_csv(&payload.outcome))
            } else {
                json(&payload)
            }
        }
        "gate-blockade" => {
            let payload = gate_blockade_run(config)?;
            if csv {
                Ok(gate_csv(&payload.outcome))
            } else {
                json(&payload)
            }
        }
        "error-budget" => {
            let payload = error_budget(config)?;
            if csv {
                let mut c = Csv::new(&["term", "value"]);
                for (k, v) in &payload.budget.terms {
                    c.labeled(k, &[*v]);
                }
                c.labeled("total", &[payload.budget.total]);
                c.labeled("eps_inact_exc", &[payload.budget.eps_inact_exc]);
                c.labeled("inactive_p", &[payload.budget.inactive_p]);
                Ok(c.finish())
            } else {
                json(&payload)
            }
        }
        "timing" => {
            let t = block(&config.timing, "timing")?;
            let b = budget::timing(t.scheme, t.dimension);
            eprintln!("{} {}: {} us", b.scheme, b.dimension, b.total);
            if csv {
                let mut c = Csv::new(&["step", "duration_us"]);
                for (label, d) in &b.steps {
                    c.labeled(label, &[*d]);
                }
                c.labeled("total", &[b.total]);
                Ok(c.finish())
            } else {
                json(&b)
            }
        }
        "cluster" => {
            let payload = cluster_run(config)?;
            if csv {
                let mut c = Csv::new(&["site", "stabilizer"]);
                for (i, k) in payload.stabilizers.iter().enumerate() {
                    c.row(&[(i + 1) as f64, *k]);
                }
                Ok(c.finish())
            } else {
                json(&payload)
            }
        }
        other => Err(Error::Parameter(format!("unknown command '{other}'"))),
    }
}

/// Object-safe wrapper so `execute` can serialize any payload.
mod erased {
    use super::*;

    pub trait Payload {
        fn document(&self, config: &RunConfig, timestamp: bool) -> Result<String>;
    }

    impl<T: Serialize> Payload for T {
        fn document(&self, config: &RunConfig, timestamp: bool) -> Result<String> {
            json_document(config, self, timestamp)
        }
    }
}

fn lattice_params(l: &LatticeBlock) -> LatticeParams {
    LatticeParams {
        v0: l.v0,
        v1: l.v1,
        phi: l.phi,
        k: l.k,
        recoil_khz: l.recoil_khz,
    }
}

#[derive(Debug, Serialize)]
struct BandsPayload {
    params: LatticeParams,
    n_max: usize,
    q_grid: Vec<f64>,
    /// `energies[band][q]` (E_R).
    energies: Vec<Vec<f64>>,
    /// Band 2 minus band 1 over q (E_R).
    lowest_splitting_min: Option<f64>,
    lowest_splitting_max: Option<f64>,
}

fn bands(l: &LatticeBlock) -> Result<(BandsPayload, String)> {
    let bs = lattice::solve_bands(&lattice_params(l), l.n_bands, l.q_points, l.n_max)?;
    let (lo, hi) = if bs.n_bands() >= 2 {
        let g = bs.gap(0);
        (
            Some(g.iter().copied().fold(f64::INFINITY, f64::min)),
            Some(g.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        )
    } else {
        (None, None)
    };
    if let (Some(lo), Some(hi)) = (lo, hi) {
        eprintln!("lowest-two-band splitting {lo:.6} to {hi:.6} E_R");
    }
    let text = bs.energies_csv();
    Ok((
        BandsPayload {
            params: bs.params,
            n_max: bs.n_max,
            q_grid: bs.q_grid,
            energies: bs.energies,
            lowest_splitting_min: lo,
            lowest_splitting_max: hi,
        },
        text,
    ))
}

#[derive(Debug, Serialize)]
struct WannierPayload {
    params: LatticeParams,
    cell: i64,
    cell_center: f64,
    period: f64,
    left_weight: f64,
    right_weight: f64,
    /// Mean and RMS width of `|w1|²` (1/k).
    w1_moments: (f64, f64),
    w2_moments: (f64, f64),
    /// Double-well minima (1/k), reported for φ = 0 in the double-well regime.
    #[serde(skip_serializing_if = "Option::is_none")]
    minima: Option<(f64, f64)>,
    functions: lattice::WannierSet,
}

fn wannier(l: &LatticeBlock) -> Result<(WannierPayload, String)> {
    let p = lattice_params(l);
    let bs = lattice::solve_bands(&p, l.n_bands.max(2), l.q_points, l.n_max)?;
    let w = lattice::wannier(&bs, l.cell)?;
    eprintln!(
        "left-well weight {:.6}, right-well weight {:.6}",
        w.left_weight(),
        w.right_weight()
    );
    let text = w.to_csv();
    Ok((
        WannierPayload {
            params: p,
            cell: l.cell,
            cell_center: w.cell_center,
            period: w.period,
            left_weight: w.left_weight(),
            right_weight: w.right_weight(),
            w1_moments: w.moments(&w.w1),
            w2_moments: w.moments(&w.w2),
            minima: (p.phi == 0.0 && p.v1 > 0.0)
                .then(|| lattice::double_well_minima(&p).ok())
                .flatten(),
            functions: w,
        },
        text,
    ))
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum RampPayload {
    Single(ramps::RetentionReport),
    Scan { scan: Vec<ScanPoint> },
}

#[derive(Debug, Serialize)]
struct ScanPoint {
    scale: f64,
    duration_us: f64,
    retention: f64,
}

fn ramp(config: &RunConfig, jobs: Option<usize>) -> Result<(RampPayload, String)> {
    let r = block(&config.ramp, "ramp")?;
    let schedule = RampSchedule::merge_with_split(r.split_us, r.v_high, r.v1, r.recoil_khz)?;
    let mut p0 = LatticeParams::new(r.v_high, r.v1, 0.0);
    p0.recoil_khz = r.recoil_khz;
    if r.scan.is_empty() {
        let opts = RampOptions {
            samples: r.samples,
            ..Default::default()
        };
        let report = ramps::evolve_bands_with(&schedule, &p0, r.n_tracked, &opts)?;
        eprintln!(
            "retention {:.6} over {:.1} us",
            report.retention, report.total_time
        );
        let text = report.to_csv();
        return Ok((RampPayload::Single(report), text));
    }
    let scan = || ramps::adiabaticity_scan(&schedule, &p0, &r.scan);
    let points = match jobs {
        Some(0) => return Err(Error::Parameter("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Domain(format!("cannot start {n} workers: {e}")))?
            .install(scan)?,
        None => scan()?,
    };
    let total: f64 = r.split_us.iter().sum();
    let mut c = Csv::new(&["scale", "duration_us", "retention"]);
    let scan: Vec<ScanPoint> = points
        .into_iter()
        .map(|(scale, retention)| {
            c.row(&[scale, scale * total, retention]);
            eprintln!("scale {scale}: retention {retention:.6}");
            ScanPoint {
                scale,
                duration_us: scale * total,
                retention,
            }
        })
        .collect();
    Ok((RampPayload::Scan { scan }, c.finish()))
}

fn pulse_params(p: &PulseBlock) -> Result<PulseParams> {
    let mut pulse = PulseParams::from_light_shift(p.light_shift_mhz, p.delta_mhz, p.hf_mhz);
    pulse.photon_order = p.photon_order;
    pulse.rabi_offset = p.rabi_offset;
    if !(0.0..=1.0).contains(&p.effective_drive) {
        return Err(Error::Parameter(format!(
            "effective drive must lie in [0, 1], got {}",
            p.effective_drive
        )));
    }
    Ok(pulse.with_effective_drive(p.effective_drive))
}

fn interaction_params(i: &InteractionBlock) -> InteractionParams {
    InteractionParams::new(i.v_mhz, i.power).with_gamma(i.gamma)
}

fn gate_csv(out: &GateOutcome) -> String {
    let mut c = Csv::new(&[
        "branch",
        "overlap_re",
        "overlap_im",
        "population",
        "norm",
        "leakage",
    ]);
    for b in &out.branches {
        c.labeled(
            &b.label,
            &[
                b.overlap.re,
                b.overlap.im,
                b.overlap.norm_sqr(),
                b.norm,
                b.leakage,
            ],
        );
    }
    c.finish()
}

fn report_gate(out: &GateOutcome) {
    eprintln!(
        "infidelity {:.4e}, conditional phase {:.6} rad (error {:.3e})",
        out.infidelity(),
        out.phase,
        out.phase_error()
    );
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
}

#[derive(Debug, Serialize)]
struct GatePayload {
    outcome: GateOutcome,
    infidelity: f64,
    phase_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<ThetaCondition>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    verify: Vec<VerifyRow>,
}

fn gate_noblockade_run(config: &RunConfig) -> Result<GatePayload> {
    let p = pulse_params(block(&config.pulse, "pulse")?)?;
    let i = interaction_params(block(&config.interaction, "interaction")?);
    let outcome = gate_noblockade::run_gate(&p, &i)?;
    report_gate(&outcome);
    let mut verify = Vec::new();
    if config.verify {
        let g = p.light_shift();
        let lossless = gate_noblockade::run_gate(&p, &InteractionParams { gamma: 0.0, ..i })?;
        verify.push(VerifyRow::new(
            "imperfect excitation",
            i.v_int * i.v_int / (8.0 * g * g),
            lossless.infidelity(),
        ));
        if i.gamma > 0.0 {
            verify.push(VerifyRow::new(
                "survival |11>",
                gate_noblockade::decay_survival_estimate(&p, &i),
                gate_noblockade::survival(outcome.branch("11").expect("11 branch")),
            ));
        }
        let r = budget::noblockade_site_ratio().powi(p.photon_order as i32);
        verify.push(VerifyRow::new(
            "inactive <P>",
            gate_noblockade::inactive_probability_closed_form(r)?,
            gate_noblockade::run_inactive(&p.with_effective_drive(r))?,
        ));
        eprint!("{}", verify_table(&verify));
    }
    Ok(GatePayload {
        infidelity: outcome.infidelity(),
        phase_error: outcome.phase_error(),
        outcome,
        theta: None,
        verify,
    })
}

fn blockade_pulse(config: &RunConfig) -> Result<BlockadePulse> {
    let p = pulse_params(block(&config.pulse, "pulse")?)?;
    let b: &BlockadeBlock = block(&config.blockade, "blockade")?;
    Ok(BlockadePulse::new(p, b.delta_vec_mhz))
}

fn gate_blockade_run(config: &RunConfig) -> Result<GatePayload> {
    let bp = blockade_pulse(config)?;
    let i = interaction_params(block(&config.interaction, "interaction")?);
    let outcome = gate_blockade::run_blockade_gate(&bp, &i)?;
    report_gate(&outcome);
    let g = bp.pulse.light_shift();
    let theta = gate_blockade::theta_check(g, bp.delta_vec);
    let mut verify = Vec::new();
    if config.verify {
        let lossless =
            gate_blockade::run_blockade_gate(&bp, &InteractionParams { gamma: 0.0, ..i })?;
        verify.push(VerifyRow::new(
            "imperfect blockade",
            gate_blockade::imperfect_blockade_oracle(g, bp.delta_vec),
            lossless.infidelity(),
        ));
        if i.gamma > 0.0 {
            // γ in 1/s against Ω²/Δ in MHz: πγ/(2π·g·1e6).
            let x = i.gamma / (2.0 * g * 1e6);
            verify.push(VerifyRow::new(
                "survival |11>",
                (-4.0 * x).exp(),
                outcome.branch("11").expect("11 branch").norm,
            ));
            verify.push(VerifyRow::new(
                "survival |10>",
                (-3.0 * x).exp(),
                outcome.branch("10").expect("10 branch").norm,
            ));
        }
        let ratio = gate_blockade::inactive_drive_ratio(100.0, 100.0)?;
        let mut inactive = bp;
        inactive.pulse = inactive
            .pulse
            .with_effective_drive(ratio.powi(bp.pulse.photon_order as i32));
        verify.push(VerifyRow::new(
            "inactive <P> (100/100 E_R)",
            gate_blockade::run_blockade_inactive(ratio, bp.pulse.photon_order)?.average,
            gate_blockade::run_blockade_inactive_numeric(
                &inactive,
                &InteractionParams { gamma: 0.0, ..i },
            )?
            .average,
        ));
        eprint!("{}", verify_table(&verify));
    }
    Ok(GatePayload {
        infidelity: outcome.infidelity(),
        phase_error: outcome.phase_error(),
        outcome,
        theta: Some(theta),
        verify,
    })
}

#[derive(Debug, Serialize)]
struct BudgetPayload {
    budget: budget::ErrorBudget,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    verify: Vec<VerifyRow>,
}

fn error_budget(config: &RunConfig) -> Result<BudgetPayload> {
    let preset: Preset = block(&config.budget, "budget")?.preset.parse()?;
    let b = budget::assemble_table(preset.name())?;
    eprint!("{}", b.to_text_table());
    let mut verify = Vec::new();
    if config.verify {
        verify = budget::oracle_checks()?
            .into_iter()
            .map(|c| VerifyRow::new(c.name, c.analytic, c.numeric))
            .collect();
        eprint!("{}", verify_table(&verify));
    }
    Ok(BudgetPayload { budget: b, verify })
}

#[derive(Debug, Serialize)]
struct ClusterPayload {
    geometry: String,
    gate: ClusterGate,
    rounds: Vec<Vec<(usize, usize)>>,
    fidelity: f64,
    success_probability: f64,
    conditional_fidelity: f64,
    stabilizers: Vec<f64>,
}

fn cluster_run(config: &RunConfig) -> Result<ClusterPayload> {
    let c = block(&config.cluster, "cluster")?;
    let geometry: Geometry = c.geometry.parse()?;
    let schedule = cluster::make_schedule(geometry)?;
    schedule.validate().map_err(Error::Contract)?;
    let source = match c.gate {
        ClusterGate::Ideal => GateSource::Ideal,
        ClusterGate::Realized => GateSource::Realized,
        ClusterGate::Noblockade => {
            let p = pulse_params(block(&config.pulse, "pulse")?)?;
            let i = interaction_params(block(&config.interaction, "interaction")?);
            GateSource::from_outcome(&gate_noblockade::run_gate(&p, &i)?)
        }
        ClusterGate::Blockade => {
            let i = interaction_params(block(&config.interaction, "interaction")?);
            GateSource::from_outcome(&gate_blockade::run_blockade_gate(
                &blockade_pulse(config)?,
                &i,
            )?)
        }
    };
    let r = cluster::run_protocol(geometry, &source)?;
    eprintln!(
        "{geometry}: {} rounds, {} gates, fidelity {:.6}",
        r.rounds, r.gates, r.fidelity
    );
    Ok(ClusterPayload {
        geometry: geometry.to_string(),
        gate: c.gate,
        rounds: schedule.rounds,
        fidelity: r.fidelity,
        success_probability: r.success_probability,
        conditional_fidelity: r.conditional_fidelity,
        stabilizers: r.stabilizers,
    })
}
