use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use cslab_core::closed_form::{
    blowup_time, hs_norm_closed, hs_rate_constant, initial_mass, limit_mass, limit_profile, pole_asymptotics,
    pole_constant, solution_coeffs, theta_star,
};
use cslab_core::explicit::ExplicitSolver;
use cslab_core::finite_gap::synthesize_coeffs;
use cslab_core::lax::conserved_quantities;
use cslab_core::oracle::{self, MASS_DRIFT_LIMIT};
use cslab_core::resonance::{
    assess_dichotomy, classify, sigma_block, spectral_radius, unimodular_times_tau, DichotomyAssessment,
};
use cslab_core::verify::{self, dichotomy_samples, CheckRecord, VerifyOptions};
use cslab_core::{Classification, FiniteGapData, HardyCoeffs, LabError, LimitProfile, SpectralData};
use serde::Serialize;

use crate::config::{Engine, ExperimentConfig};
use crate::error::CliError;

const DEFAULT_OUTPUT_DIR: &str = "cslab_output";
const SCAN_SAMPLES: usize = 4096;
const STABILITY_ITERATIONS: usize = 200;

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

struct EngineRun {
    engine: Engine,
    states: Vec<HardyCoeffs>,
}

fn run_engine(
    engine: Engine,
    data: &FiniteGapData,
    cfg: &ExperimentConfig,
    times: &[f64],
) -> Result<EngineRun, CliError> {
    let n = cfg.truncation;
    let states = match engine {
        Engine::ClosedForm => times
            .iter()
            .map(|&t| solution_coeffs(data, t, n))
            .collect::<Result<Vec<_>, _>>()?,
        Engine::Explicit => {
            if classify(data) == Classification::Resonant {
                let big_t = blowup_time(data.p())?;
                if let Some(&t) = times.iter().find(|&&t| t >= big_t) {
                    return Err(LabError::BlowupSuspected {
                        t,
                        reason: format!("resonant datum; the solution ceases to exist at T = {big_t}"),
                    }
                    .into());
                }
            }
            ExplicitSolver::new(synthesize_coeffs(data, n))?.coeffs_at(times)
        }
        Engine::Oracle => oracle_states(data, cfg, times)?,
        Engine::All => unreachable!("expanded by the caller"),
    };
    Ok(EngineRun { engine, states })
}

/// Chains oracle runs between consecutive output times, watching the mass.
fn oracle_states(data: &FiniteGapData, cfg: &ExperimentConfig, times: &[f64]) -> Result<Vec<HardyCoeffs>, CliError> {
    let mut u = synthesize_coeffs(data, cfg.truncation);
    let mass0 = u.norm_sqr();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t > now {
            let traj = oracle::evolve_with_stride(&u, t - now, cfg.dt, usize::MAX)?;
            u = traj.last().1.clone();
            let drift = (u.norm_sqr() - mass0).abs() / mass0;
            if drift > MASS_DRIFT_LIMIT {
                return Err(LabError::BlowupSuspected {
                    t,
                    reason: format!("relative mass drift {drift:e}"),
                }
                .into());
            }
            now = t;
        }
        out.push(u.clone());
    }
    Ok(out)
}

fn trajectory_csv(run: &EngineRun, times: &[f64], s_list: &[f64]) -> Result<String, CliError> {
    let n = run.states.first().map_or(0, |u| u.truncation());
    let mut out = String::from("t,i0,i1,i2");
    for s in s_list {
        write!(out, ",hs_norm_{s}").unwrap();
    }
    for k in 0..=n {
        write!(out, ",re_{k},im_{k}").unwrap();
    }
    out.push('\n');
    for (t, u) in times.iter().zip(&run.states) {
        write!(out, "{t:.16e}").unwrap();
        for i in conserved_quantities(u, 2)? {
            write!(out, ",{i:.16e}").unwrap();
        }
        for &s in s_list {
            write!(out, ",{:.16e}", u.hs_norm(s)?).unwrap();
        }
        for z in u.as_slice() {
            write!(out, ",{:.16e},{:.16e}", z.re, z.im).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct PairDiff {
    left: &'static str,
    right: &'static str,
    max_relative_l2: f64,
    max_abs_coeff: f64,
    worst_time: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct DiffSummary {
    truncation: usize,
    dt: f64,
    times: usize,
    pairs: Vec<PairDiff>,
}

fn diff_summary(runs: &[EngineRun], times: &[f64], cfg: &ExperimentConfig) -> DiffSummary {
    let mut pairs = Vec::new();
    for (i, a) in runs.iter().enumerate() {
        for b in &runs[i + 1..] {
            let mut worst = (0.0f64, 0.0f64, 0.0f64);
            for ((t, u), v) in times.iter().zip(&a.states).zip(&b.states) {
                let rel = u.l2_distance(v) / v.l2_norm().max(f64::MIN_POSITIVE);
                if rel >= worst.0 {
                    worst.0 = rel;
                    worst.2 = *t;
                }
                worst.1 = worst.1.max(u.max_abs_diff(v));
            }
            pairs.push(PairDiff {
                left: a.engine.name(),
                right: b.engine.name(),
                max_relative_l2: worst.0,
                max_abs_coeff: worst.1,
                worst_time: worst.2,
                tolerance: cfg.tolerances.cross_engine,
                pass: worst.0 <= cfg.tolerances.cross_engine,
            });
        }
    }
    DiffSummary {
        truncation: cfg.truncation,
        dt: cfg.dt,
        times: times.len(),
        pairs,
    }
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let data = cfg.datum()?;
    let times = cfg.times()?;
    let engines = match cfg.engine {
        Engine::All if classify(&data) == Classification::Resonant => {
            vec![Engine::ClosedForm, Engine::Explicit, Engine::Oracle]
        }
        Engine::All => {
            eprintln!("closed_form skipped: datum is non-resonant");
            vec![Engine::Explicit, Engine::Oracle]
        }
        e => vec![e],
    };
    let dir = cfg
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.json"), cfg.to_json() + "\n")?;
    let mut runs = Vec::new();
    for engine in engines {
        let run = run_engine(engine, &data, cfg, &times)?;
        let path = dir.join(format!("{}.csv", engine.name()));
        fs::write(&path, trajectory_csv(&run, &times, &cfg.s_list)?)?;
        println!("wrote {}", path.display());
        runs.push(run);
    }
    if runs.len() > 1 {
        let summary = diff_summary(&runs, &times, cfg);
        for p in &summary.pairs {
            println!(
                "{} vs {}: max relative L2 {:.3e} (t = {:.6}), max coefficient difference {:.3e}",
                p.left, p.right, p.max_relative_l2, p.worst_time, p.max_abs_coeff
            );
        }
        write_json(&summary, Some(&dir.join("diff_summary.json")))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct AsymptoticSample {
    h: f64,
    alpha_ratio: f64,
    residue_ratio: f64,
}

#[derive(Debug, Serialize)]
struct RateFit {
    s: f64,
    constant: f64,
    /// `(T - t, ||u||_{H^s} (T - t)^{2s})`
    samples: Vec<(f64, f64)>,
    /// Log-log slope of `||u||_{H^s}` against `T - t` over the last two samples.
    fitted_exponent: f64,
}

#[derive(Debug, Serialize)]
struct BlowupReport {
    datum: FiniteGapData,
    r: f64,
    rho: f64,
    blowup_time: f64,
    c0: f64,
    initial_mass: f64,
    limit_mass: f64,
    mass_defect: f64,
    measured_mass_defect: f64,
    theta_star: f64,
    limit_profile: LimitProfile,
    pole_asymptotics: Vec<AsymptoticSample>,
    rate_fits: Vec<RateFit>,
    checks: Vec<CheckRecord>,
    pass: bool,
}

/// `T - t` from `1e-1` down to `1e-3` in half-decades.
fn approach_grid() -> Vec<f64> {
    (0..5).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect()
}

pub fn blowup(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let data = cfg.datum()?;
    if classify(&data) != Classification::Resonant {
        return Err(LabError::NotResonant(data.resonance_defect()).into());
    }
    let tol = cfg.tolerances;
    let big_t = blowup_time(data.p())?;
    let c0 = pole_constant(data.r());
    let grid = approach_grid();
    let mut checks = Vec::new();

    let mut pole = Vec::new();
    for &h in &grid {
        let (x, y) = pole_asymptotics(&data, big_t - h)?;
        pole.push(AsymptoticSample {
            h,
            alpha_ratio: x,
            residue_ratio: y,
        });
    }
    let last = pole.last().unwrap();
    checks.push(CheckRecord::relative(
        format!("(1-|alpha1|^2)/(T-t)^2 at T-t = {:e}", last.h),
        c0,
        last.alpha_ratio,
        tol.pole_asymptotic,
    ));
    checks.push(CheckRecord::relative(
        format!("|B1|^2/(T-t)^2 at T-t = {:e}", last.h),
        c0,
        last.residue_ratio,
        tol.pole_asymptotic,
    ));

    let mut rate_fits = Vec::new();
    for &s in &cfg.s_list {
        let constant = hs_rate_constant(data.r(), s);
        let samples = grid
            .iter()
            .map(|&h| Ok((h, hs_norm_closed(&data, big_t - h, s)? * h.powf(2.0 * s))))
            .collect::<Result<Vec<_>, LabError>>()?;
        let [.., (h1, v1), (h2, v2)] = samples[..] else {
            unreachable!()
        };
        let fitted_exponent = ((v2 / h2.powf(2.0 * s)).ln() - (v1 / h1.powf(2.0 * s)).ln()) / (h2.ln() - h1.ln());
        if s > 0.0 {
            checks.push(CheckRecord::relative(
                format!("||u||_H^{s} (T-t)^{} at T-t = {h2:e}", 2.0 * s),
                constant,
                v2,
                tol.hs_rate,
            ));
        }
        rate_fits.push(RateFit {
            s,
            constant,
            samples,
            fitted_exponent,
        });
    }

    let measured_mass_defect = verify::mass_defect(&data)?;
    checks.push(CheckRecord::new(
        "mass defect",
        1.0,
        measured_mass_defect,
        tol.mass_defect,
    ));
    let r = data.r();
    let report = BlowupReport {
        datum: data,
        r,
        rho: data.rho(),
        blowup_time: big_t,
        c0,
        initial_mass: initial_mass(r),
        limit_mass: limit_mass(r),
        mass_defect: initial_mass(r) - limit_mass(r),
        measured_mass_defect,
        theta_star: theta_star(&data),
        limit_profile: limit_profile(&data)?,
        pole_asymptotics: pole,
        rate_fits,
        pass: checks.iter().all(|c| c.pass),
        checks,
    };
    write_json(&report, cfg.output.report.as_deref())
}

#[derive(Debug, Serialize)]
struct ResonanceTime {
    ell: u32,
    t: f64,
    spectral_radius: f64,
}

#[derive(Debug, Serialize)]
struct StabilityReport {
    datum: FiniteGapData,
    classification: Classification,
    spectral: SpectralData,
    tau_min: f64,
    min_abs_x: f64,
    scan_period: f64,
    t_peak: f64,
    peak_radius: f64,
    /// Measured contraction bound for non-resonant data.
    q0: Option<f64>,
    resonance_times: Vec<ResonanceTime>,
    truncation: usize,
    /// `s_n` at `t_peak`.
    decay_curve: Vec<f64>,
    consistent: bool,
}

fn stability_report(
    data: FiniteGapData,
    a: DichotomyAssessment,
    truncation: usize,
) -> Result<StabilityReport, CliError> {
    let resonance_times = if a.classification == Classification::Resonant {
        (0..4)
            .map(|ell| {
                let t = unimodular_times_tau(&data, ell)? / 2.0;
                Ok(ResonanceTime {
                    ell,
                    t,
                    spectral_radius: spectral_radius(&sigma_block(&data, t)),
                })
            })
            .collect::<Result<Vec<_>, LabError>>()?
    } else {
        Vec::new()
    };
    Ok(StabilityReport {
        datum: data,
        classification: a.classification,
        spectral: a.spectral,
        tau_min: a.tau_min,
        min_abs_x: a.min_abs_x,
        scan_period: a.scan.period,
        t_peak: a.scan.t_peak,
        peak_radius: a.scan.peak,
        q0: (a.classification == Classification::NonResonant).then_some(a.scan.peak),
        resonance_times,
        truncation,
        decay_curve: a.iterates,
        consistent: a.consistent,
    })
}

pub fn stability(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let data = cfg.datum()?;
    let a = assess_dichotomy(&data, SCAN_SAMPLES, cfg.truncation, STABILITY_ITERATIONS)?;
    write_json(
        &stability_report(data, a, cfg.truncation)?,
        cfg.output.report.as_deref(),
    )
}

#[derive(Debug, Serialize)]
struct SweepRow {
    index: usize,
    datum: FiniteGapData,
    classification: Classification,
    peak_radius: f64,
    min_abs_x: f64,
    final_iterate: f64,
    consistent: bool,
}

#[derive(Debug, Serialize)]
struct SweepReport {
    seed: u64,
    truncation: usize,
    misclassifications: usize,
    max_nonresonant_q0: f64,
    rows: Vec<SweepRow>,
}

/// Dichotomy table over `count` random data; fails if any row is inconsistent.
pub fn stability_sweep(count: usize, seed: u64, truncation: usize, report: Option<&Path>) -> Result<(), CliError> {
    use rayon::prelude::*;
    let samples = dichotomy_samples(seed, count);
    let rows = samples
        .par_iter()
        .enumerate()
        .map(|(index, d)| {
            let a = assess_dichotomy(d, SCAN_SAMPLES, truncation, STABILITY_ITERATIONS)?;
            Ok(SweepRow {
                index,
                datum: *d,
                classification: a.classification,
                peak_radius: a.scan.peak,
                min_abs_x: a.min_abs_x,
                final_iterate: *a.iterates.last().unwrap(),
                consistent: a.consistent,
            })
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    let misclassifications = rows.iter().filter(|r| !r.consistent).count();
    let max_nonresonant_q0 = rows
        .iter()
        .filter(|r| r.classification == Classification::NonResonant)
        .map(|r| r.peak_radius)
        .fold(0.0, f64::max);
    eprintln!("{count} samples, {misclassifications} misclassified, measured q0 = {max_nonresonant_q0:.6}");
    write_json(
        &SweepReport {
            seed,
            truncation,
            misclassifications,
            max_nonresonant_q0,
            rows,
        },
        report,
    )?;
    if misclassifications > 0 {
        return Err(CliError::Verification(format!(
            "{misclassifications} inconsistent samples"
        )));
    }
    Ok(())
}

pub fn verify(opts: &VerifyOptions, report: Option<&Path>) -> Result<(), CliError> {
    let mut criteria = Vec::new();
    for (id, _) in verify::CRITERIA {
        let rep = verify::run_criterion(id, opts);
        eprintln!(
            "criterion {:>2} {:<45} {} ({:.1}s)",
            rep.id,
            rep.title,
            if rep.pass { "PASS" } else { "FAIL" },
            rep.seconds
        );
        for c in rep.checks.iter().filter(|c| !c.pass && !c.informational) {
            eprintln!("    {} {}", c.summary(), c.detail);
        }
        criteria.push(rep);
    }
    let full = verify::VerificationReport {
        metadata: verify::metadata(opts),
        pass: criteria.iter().all(|c| c.pass),
        criteria,
    };
    if let Some(p) = report {
        write_json(&full, Some(p))?;
    }
    let failed: Vec<String> = full
        .criteria
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.id.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("criteria {} failed", failed.join(", "))))
    }
}
