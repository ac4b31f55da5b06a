use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use snz_core::config::DeviceConfig;
use snz_core::device::PairSpec;
use snz_core::landscape::*;
use snz_core::noise::{error_budget, Allocation, NoiseConfig, NoiseLevel};
use snz_core::pulse::{choose_tp_samples, make_nz, make_snz, NzParams, SnzParams};
use snz_core::rb::*;
use snz_core::Error;
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "snz", version, about = "Simulate and calibrate flux-pulsed CZ gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Device description (JSON).
    #[arg(long)]
    device: PathBuf,
    /// Pair name as listed in the device file.
    #[arg(long)]
    pair: String,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of landscape evaluations.
    #[arg(long, default_value_t = 600)]
    budget: usize,
    #[arg(long, value_enum, default_value_t = Model::Full)]
    model: Model,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Reduced,
    Full,
}

impl From<Model> for GateModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Reduced => GateModel::Reduced,
            Model::Full => GateModel::Full,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Scheme {
    Snz,
    Nz,
}

#[derive(Args)]
struct PulseArgs {
    #[arg(long, value_enum, default_value_t = Scheme::Snz)]
    scheme: Scheme,
    /// Strong-pulse duration in samples relative to the grid rule.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    tp_offset: i64,
    /// Idle between the SNZ halves in ns (default: device file, else 0).
    #[arg(long)]
    t_mid_ns: Option<f64>,
    /// NZ pulse duration in samples.
    #[arg(long, default_value_t = 110)]
    nz_samples: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Square-pulse chevron and fitted resonance amplitude and speed limit.
    Chevron {
        #[command(flatten)]
        common: Common,
        /// Regular AMPxDUR grid instead of adaptive sampling.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        #[arg(long, default_value_t = 0.95)]
        amp_min: f64,
        #[arg(long, default_value_t = 1.05)]
        amp_max: f64,
        /// Longest pulse in ns (default: three speed limits).
        #[arg(long)]
        max_duration_ns: Option<f64>,
        /// Grid the adaptive samples are resampled onto for the fit.
        #[arg(long, value_parser = parse_grid, default_value = "41x241")]
        resample: (usize, usize),
    },
    /// Conditional-phase and leakage landscapes with the 180° contour.
    Landscape {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pulse: PulseArgs,
    },
    /// Valley-crossing calibration along the 180° contour.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pulse: PulseArgs,
    },
    /// Error budget of SNZ and NZ gates at cumulative noise levels.
    Budget {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pulse: PulseArgs,
        /// Ignore coherence and distortion data in the device file.
        #[arg(long)]
        noiseless: bool,
        /// Quasistatic flux-noise amplitude in flux quanta.
        #[arg(long)]
        flux_sigma: Option<f64>,
        /// Number of quasistatic flux samples.
        #[arg(long)]
        quasistatic: Option<usize>,
        /// Keep single-qubit phases in the target instead of nulling them.
        #[arg(long)]
        keep_phases: bool,
    },
    /// Leakage-aware interleaved RB fit.
    Rbfit {
        /// Synthesize the decay curves instead of reading them.
        #[arg(long)]
        synth: bool,
        /// Reference decay CSV (n_cliffords,m0,chi1,shots).
        #[arg(long, required_unless_present = "synth")]
        reference: Option<PathBuf>,
        /// Interleaved decay CSV.
        #[arg(long, required_unless_present = "synth")]
        interleaved: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = FitModel::Constrained)]
        fit: FitModel,
        /// Gate fidelity used for synthesis.
        #[arg(long, default_value_t = 0.9993)]
        fidelity: f64,
        /// Gate leakage used for synthesis.
        #[arg(long, default_value_t = 0.001)]
        leakage: f64,
        /// Reference-Clifford error relative to the gate error.
        #[arg(long, default_value_t = DEFAULT_CLIFFORD_RATIO)]
        ratio: f64,
        #[arg(long, default_value_t = 2000)]
        shots: u32,
        /// Longest sequence in Cliffords.
        #[arg(long, default_value_t = 60)]
        max_cliffords: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FitModel {
    Constrained,
    Free,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').ok_or("expected AxB, e.g. 32x32")?;
    let a: usize = a.parse().map_err(|e| format!("{e}"))?;
    let b: usize = b.parse().map_err(|e| format!("{e}"))?;
    if a < 2 || b < 2 {
        return Err("both grid sizes must be at least 2".into());
    }
    Ok((a, b))
}

// ------------------------------------------------------------------ plumbing

fn create(dir: &Path, name: &str) -> snz_core::Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> snz_core::Result<()> {
    let mut f = create(dir, name)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    use std::io::Write;
    writeln!(f)?;
    Ok(())
}

struct Loaded {
    cfg: DeviceConfig,
    pair: PairSpec,
    ts: f64,
}

fn load(c: &Common) -> snz_core::Result<Loaded> {
    let cfg = DeviceConfig::load(&c.device)?;
    let pair = cfg.pair(&c.pair)?;
    let ts = cfg.ts();
    Ok(Loaded { cfg, pair, ts })
}

struct Pulse {
    tp: f64,
    t_mid: f64,
    nz_tp: f64,
}

fn pulse_durations(l: &Loaded, name: &str, p: &PulseArgs) -> snz_core::Result<Pulse> {
    let n = choose_tp_samples(l.pair.t_lim(), l.ts)? as i64 + p.tp_offset;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("tp of {n} samples")));
    }
    let t_mid = match p.t_mid_ns {
        Some(t) => t * 1e-9,
        None => l.cfg.t_mid(name)?.unwrap_or(0.0),
    };
    Ok(Pulse {
        tp: n as f64 * l.ts,
        t_mid,
        nz_tp: p.nz_samples as f64 * l.ts,
    })
}

// ------------------------------------------------------------------ commands

#[derive(Serialize)]
struct ChevronOut<'a> {
    pair: &'a str,
    sampling: String,
    evaluations: usize,
    fit: ChevronFit,
}

fn chevron(
    c: &Common,
    grid: Option<(usize, usize)>,
    amp: (f64, f64),
    max_duration_ns: Option<f64>,
    resample: (usize, usize),
) -> snz_core::Result<()> {
    let l = load(c)?;
    let model = GateModel::from(c.model);
    let t_max = max_duration_ns.map_or(3.0 * l.pair.t_lim(), |t| t * 1e-9);
    let (map, sampling, evaluations) = match grid {
        Some((na, nt)) => {
            let bounds = Bounds::new(amp.0, amp.1, 0.0, t_max)?;
            let s = grid_sample(
                |a, t| square_transfer(&l.pair, model, a, t).map(|p| vec![p]),
                &[FieldKind::Linear],
                bounds,
                na,
                nt,
            )?;
            (ChevronMap::from_landscape(&s, na, nt)?, format!("grid {na}x{nt}"), s.len())
        }
        None => {
            let s = adaptive_chevron(&l.pair, model, amp, t_max, c.budget)?;
            s.write_csv(0, create(&c.out, "chevron_samples.csv")?)?;
            (
                ChevronMap::from_landscape(&s, resample.0, resample.1)?,
                format!("adaptive, resampled {}x{}", resample.0, resample.1),
                s.len(),
            )
        }
    };
    map.write_csv(create(&c.out, "chevron.csv")?)?;
    let fit = chevron_fit(&map)?;
    write_json(
        &c.out,
        "chevron_fit.json",
        &ChevronOut {
            pair: &c.pair,
            sampling,
            evaluations,
            fit,
        },
    )?;
    println!(
        "a_res = {:.6}, t_lim = {:.3} ns",
        fit.a_res,
        fit.t_lim_fit * 1e9
    );
    Ok(())
}

fn pulse_eval<'a>(
    l: &'a Loaded,
    model: GateModel,
    scheme: Scheme,
    p: &'a Pulse,
) -> impl Fn(f64, f64) -> snz_core::Result<(f64, f64)> + Sync + 'a {
    move |x, y| {
        let w = match scheme {
            Scheme::Snz => make_snz(&SnzParams::new(x, y * x, p.tp, p.t_mid), l.ts)?,
            Scheme::Nz => make_nz(&NzParams { a: x, a_curve: y, tp: p.nz_tp }, l.ts)?,
        };
        gate_metrics(&l.pair, model, &w)
    }
}

fn window(scheme: Scheme) -> Bounds {
    match scheme {
        Scheme::Snz => snz_window(),
        Scheme::Nz => nz_window(),
    }
}

fn landscape(c: &Common, pa: &PulseArgs) -> snz_core::Result<()> {
    let l = load(c)?;
    let p = pulse_durations(&l, &c.pair, pa)?;
    let eval = pulse_eval(&l, c.model.into(), pa.scheme, &p);
    let samples = adaptive_sample_fields(
        |x, y| eval(x, y).map(|(phi, leak)| vec![phi, leak]),
        &[FieldKind::Phase, FieldKind::Linear],
        window(pa.scheme),
        c.budget,
    )?;
    samples.write_csv(0, create(&c.out, "landscape_phi2q.csv")?)?;
    samples.write_csv(1, create(&c.out, "landscape_leakage.csv")?)?;
    let contour = extract_contour_field(&samples, 0, PI, 0)?;
    contour.write_csv(create(&c.out, "contour.csv")?)?;
    println!("{} samples, {} contour polylines", samples.len(), contour.polylines.len());
    Ok(())
}

#[derive(Serialize)]
struct CalibrationOut<'a> {
    pair: &'a str,
    scheme: Scheme,
    tp_ns: f64,
    t_mid_ns: Option<f64>,
    /// Strong-pulse parameters at the optimum: `(A, B)` for SNZ, `(a, a_curve)`
    /// for NZ.
    optimum: (f64, f64),
    phi2q_deg: f64,
    leakage: f64,
    minima: &'a [ContourPoint],
    speed_limit_threshold: Option<f64>,
    speed_limit_violation: bool,
}

fn write_trace(dir: &Path, report: &CalibrationReport) -> snz_core::Result<()> {
    use std::io::Write;
    let mut f = create(dir, "trace.csv")?;
    writeln!(f, "polyline,x,y,phi2q,leakage")?;
    for (k, line) in report.trace.iter().enumerate() {
        for p in line {
            writeln!(f, "{k},{:.12e},{:.12e},{:.12e},{:.12e}", p.x, p.y, p.phi2q, p.leakage)?;
        }
    }
    Ok(())
}

fn calibrate(c: &Common, pa: &PulseArgs) -> snz_core::Result<()> {
    let l = load(c)?;
    let p = pulse_durations(&l, &c.pair, pa)?;
    let model = c.model.into();
    let (report, optimum, tp, t_mid) = match pa.scheme {
        Scheme::Snz => {
            let threshold = if pa.tp_offset == 0 {
                None
            } else {
                Some(matched_speed_limit_threshold(&l.pair, model, p.t_mid, l.ts, c.budget)?)
            };
            let cal = calibrate_snz(&l.pair, model, p.tp, p.t_mid, l.ts, c.budget, threshold)?;
            (cal.report, (cal.a_star, cal.b_star), p.tp, Some(p.t_mid))
        }
        Scheme::Nz => {
            let cal = calibrate_nz(&l.pair, model, p.nz_tp, l.ts, c.budget)?;
            (cal.report, (cal.params.a, cal.params.a_curve), p.nz_tp, None)
        }
    };
    report.contour.write_csv(create(&c.out, "contour.csv")?)?;
    write_trace(&c.out, &report)?;
    write_json(
        &c.out,
        "calibration.json",
        &CalibrationOut {
            pair: &c.pair,
            scheme: pa.scheme,
            tp_ns: tp * 1e9,
            t_mid_ns: t_mid.map(|t| t * 1e9),
            optimum,
            phi2q_deg: report.best.phi2q.to_degrees(),
            leakage: report.best.leakage,
            minima: &report.minima,
            speed_limit_threshold: report.speed_limit_threshold,
            speed_limit_violation: report.speed_limit_violation,
        },
    )?;
    println!(
        "optimum ({:.6}, {:.6}), L1 = {:.3e}, {} minima{}",
        optimum.0,
        optimum.1,
        report.best.leakage,
        report.minima.len(),
        if report.speed_limit_violation { ", speed limit violated" } else { "" }
    );
    Ok(())
}

#[derive(Serialize)]
struct BudgetOut<'a> {
    pair: &'a str,
    snz: SnzParams,
    nz: NzParams,
    budgets: [&'a snz_core::noise::ErrorBudget; 2],
    monotone: bool,
}

fn budget(
    c: &Common,
    pa: &PulseArgs,
    noiseless: bool,
    flux_sigma: Option<f64>,
    quasistatic: Option<usize>,
    keep_phases: bool,
) -> snz_core::Result<()> {
    let l = load(c)?;
    let p = pulse_durations(&l, &c.pair, pa)?;
    let mut noise = if noiseless {
        NoiseConfig::noiseless()
    } else {
        l.cfg.noise(&c.pair)?
    };
    noise.seed = c.seed;
    if let Some(s) = flux_sigma {
        noise.flux_noise_sigma = Some(s);
    }
    if let Some(n) = quasistatic {
        noise.n_quasistatic = n;
    }
    let alloc = Allocation::default();
    let model = c.model.into();
    let snz = calibrate_snz_in_slot(&l.pair, model, p.tp, p.t_mid, l.ts, c.budget, alloc.total)?;
    let nz = calibrate_nz_in_slot(&l.pair, model, p.nz_tp, l.ts, c.budget, alloc.total)?;
    let (a, b) = error_budget(&l.pair, &snz.params, &nz.params, &noise, l.ts, &alloc, !keep_phases)?;
    snz_core::noise::ErrorBudget::write_csv(&[a.clone(), b.clone()], create(&c.out, "budget.csv")?)?;
    let monotone = a.dissipative_levels_monotone(0.0) && b.dissipative_levels_monotone(0.0);
    write_json(
        &c.out,
        "budget.json",
        &BudgetOut {
            pair: &c.pair,
            snz: snz.params,
            nz: nz.params,
            budgets: [&a, &b],
            monotone,
        },
    )?;
    for bud in [&a, &b] {
        if let Some(e) = bud.entry(NoiseLevel::E) {
            println!(
                "{}: level E infidelity {:.4}%, leakage {:.4}%",
                bud.scheme,
                100.0 * e.infidelity,
                100.0 * e.leakage
            );
        }
    }
    if !monotone {
        return Err(Error::InvalidChannel("infidelity decreases from level A to C".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct RbOut {
    reference: RBFit,
    interleaved: RBFit,
    gate: IRBResult,
}

#[allow(clippy::too_many_arguments)]
fn rbfit(
    synth: bool,
    reference: Option<&Path>,
    interleaved: Option<&Path>,
    out: &Path,
    seed: u64,
    fit: FitModel,
    gate: CliffordError,
    ratio: f64,
    shots: u32,
    max_cliffords: u32,
) -> snz_core::Result<()> {
    let (r, i) = if synth {
        let n: Vec<u32> = (1..=max_cliffords).collect();
        let (r, i) = synth_decays(gate, gate.scaled(ratio), &n, shots, seed)?;
        r.write_csv(create(out, "reference.csv")?)?;
        i.write_csv(create(out, "interleaved.csv")?)?;
        (r, i)
    } else {
        let read = |p: Option<&Path>| -> snz_core::Result<DecayCurve> {
            let p = p.ok_or_else(|| Error::Config("missing decay curve".into()))?;
            let f = File::open(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            DecayCurve::read_csv(f)
        };
        (read(reference)?, read(interleaved)?)
    };
    let model = match fit {
        FitModel::Constrained => DecayModel::Constrained,
        FitModel::Free => DecayModel::Free,
    };
    let fr = fit_decay(&r, model)?;
    let fi = fit_decay(&i, model)?;
    let res = interleaved_extract(&fr, &fi);
    write_json(
        out,
        "rb_fit.json",
        &RbOut {
            reference: fr,
            interleaved: fi,
            gate: res,
        },
    )?;
    println!(
        "F = {:.4} ± {:.4}%, L1 = {:.4} ± {:.4}%",
        100.0 * res.fidelity.value,
        100.0 * res.fidelity.stderr,
        100.0 * res.leakage.value,
        100.0 * res.leakage.stderr
    );
    Ok(())
}

fn run(cli: Cli) -> snz_core::Result<()> {
    match cli.command {
        Command::Chevron {
            common,
            grid,
            amp_min,
            amp_max,
            max_duration_ns,
            resample,
        } => chevron(&common, grid, (amp_min, amp_max), max_duration_ns, resample),
        Command::Landscape { common, pulse } => landscape(&common, &pulse),
        Command::Calibrate { common, pulse } => calibrate(&common, &pulse),
        Command::Budget {
            common,
            pulse,
            noiseless,
            flux_sigma,
            quasistatic,
            keep_phases,
        } => budget(&common, &pulse, noiseless, flux_sigma, quasistatic, keep_phases),
        Command::Rbfit {
            synth,
            reference,
            interleaved,
            out,
            seed,
            fit,
            fidelity,
            leakage,
            ratio,
            shots,
            max_cliffords,
        } => rbfit(
            synth,
            reference.as_deref(),
            interleaved.as_deref(),
            &out,
            seed,
            fit,
            CliffordError { fidelity, leakage },
            ratio,
            shots,
            max_cliffords,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_computational() { 2 } else { 1 })
        }
    }
}
