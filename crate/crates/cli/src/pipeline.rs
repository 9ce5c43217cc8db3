//! One function per subcommand. Each returns the report body and the data
//! files that go beside it; nothing here touches the output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use homfit_core::analysis::{
    cw_corrected_central_area, g2_from_fit, invert_jitter, visibility_b3, visibility_cluster, visibility_from_fit,
    visibility_period, visibility_profile_interval, visibility_theory, RateModel, VisibilityResult,
};
use homfit_core::estimation::{
    compare_fitters, confidence_intervals, fit, fit_cw, fit_irf, CwFitSpec, FitResult, ModelSpec, PeakLayout,
};
use homfit_core::model::{CwTroughModel, InterferometerMode};
use homfit_core::simulator::{simulate_cw_hom, simulate_hbt, simulate_hom, Blinking, SimulationConfig};
use homfit_core::{BeamSplitter, Histogram, TimeGrid, VoigtIrf};
use homfit_photonics::{
    generate_taper, loss_budget, mode_overlap, read_neff_table, solve_scalar_mode, sweep_neff, write_neff_table,
    write_taper, ModeGrid, NeffSource, PhotonicsError, WaveguideGeometry,
};
use serde::Serialize;
use serde_json::Value;

use crate::config::*;
use crate::histogram_io::{load_histogram, write_histogram};
use crate::report::{compact_fit, objective_record, parameter_records, read_result, Provenance, Report, TOOL};
use crate::CliError;

/// A finished pipeline: the report plus `(file name, contents)` artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<(String, String)>,
}

#[derive(Default)]
struct Draft {
    report_parts: Parts,
    files: Vec<(String, String, String)>,
}

#[derive(Default)]
struct Parts {
    parameters: BTreeMap<String, crate::report::ParameterRecord>,
    objectives: BTreeMap<String, crate::report::ObjectiveRecord>,
    derived: BTreeMap<String, Value>,
    details: BTreeMap<String, Value>,
}

impl Draft {
    fn derive(&mut self, k: &str, v: impl Serialize) {
        self.report_parts.derived.insert(k.into(), to_value(v));
    }

    fn detail(&mut self, k: &str, v: impl Serialize) {
        self.report_parts.details.insert(k.into(), to_value(v));
    }

    fn fit(&mut self, name: &str, prefix: &str, f: &FitResult) {
        self.report_parts.parameters.extend(parameter_records(f, prefix));
        self.report_parts.objectives.insert(name.into(), objective_record(f));
    }

    fn file(&mut self, role: &str, name: &str, contents: String) {
        self.files.push((role.into(), name.into(), contents));
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("result values serialize")
}

/// Runs the configured subcommand.
pub fn run_pipeline(cfg: &AnalysisConfig) -> Result<Outcome, CliError> {
    let mut d = Draft::default();
    match &cfg.task {
        Task::Simulate(a) => simulate(cfg, a, &mut d)?,
        Task::FitIrf(a) => run_fit_irf(cfg, a, &mut d)?,
        Task::FitHom(a) => run_fit_hom(cfg, a, &mut d)?,
        Task::FitHbt(a) => run_fit_hbt(cfg, a, &mut d)?,
        Task::FitCw(a) => run_fit_cw(cfg, a, &mut d)?,
        Task::Visibility(a) => visibility(a, &mut d)?,
        Task::Theory(a) => theory(a, &mut d)?,
        Task::CompareFitters(a) => compare(cfg, a, &mut d)?,
        Task::Taper(a) => taper(a, &mut d)?,
        Task::ModeSolve(a) => mode_solve(a, &mut d)?,
        Task::Overlap(a) => run_overlap(a, &mut d)?,
        Task::LossBudget(a) => budget(a, &mut d)?,
    }
    let p = d.report_parts;
    let report = Report {
        pipeline: cfg.task.name().into(),
        parameters: p.parameters,
        objectives: p.objectives,
        derived: p.derived,
        details: p.details,
        artifacts: d.files.iter().map(|f| (f.0.clone(), f.1.clone())).collect(),
        provenance: Provenance {
            tool: TOOL.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.seed,
            config_sha256: cfg.hash(),
            config: cfg.clone(),
        },
    };
    Ok(Outcome {
        report,
        files: d.files.into_iter().map(|f| (f.1, f.2)).collect(),
    })
}

/// Writes `config.json`, `result.json`, `report.txt` and the artifacts.
pub fn write_outcome(dir: &Path, cfg: &AnalysisConfig, out: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let json = out.report.to_json();
    let value: Value = serde_json::from_str(&json).expect("report round-trips");
    let mut files = vec![
        ("config.json".to_string(), cfg.to_json()),
        ("result.json".to_string(), json),
        ("report.txt".to_string(), crate::report::render_text(&value)),
    ];
    files.extend(out.files.iter().cloned());
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

fn model_csv(h: &Histogram, columns: &[(&str, &[f64])]) -> String {
    let mut s = String::from("time_ns,counts");
    for (name, _) in columns {
        let _ = write!(s, ",{name}");
    }
    s.push('\n');
    for (i, (t, c)) in h.bin_centers().iter().zip(h.counts()).enumerate() {
        let _ = write!(s, "{t},{c}");
        for (_, col) in columns {
            let _ = write!(s, ",{}", col[i]);
        }
        s.push('\n');
    }
    s
}

fn simulate(cfg: &AnalysisConfig, a: &SimulateArgs, d: &mut Draft) -> Result<(), CliError> {
    let s = &a.setup;
    let sim_cfg = SimulationConfig {
        mode: s.mode.into(),
        visibility: a.visibility,
        bs: s.beam_splitter()?,
        first_split: s.first_split,
        decay_rate: s.decay_rate_per_ns,
        irf: VoigtIrf::kernel(a.irf_sigma_ns, a.irf_gamma_ns)?,
        laser_period: s.laser_period_ns,
        mz_delay: s.mz_delay_ns,
        integration_scale: a.total_counts,
        cw_fraction: a.cw_fraction,
        cw_rate: a.cw_rate_per_ns,
        blinking: a.on_fraction.zip(a.blink_time_ns).map(|(on_fraction, correlation_time)| Blinking {
            on_fraction,
            correlation_time,
        }),
        g2_zero: a.g2,
        flat_background: a.background_counts_per_bin,
        time_shift: a.time_shift_ns,
        grid: TimeGrid::spanning(a.t_min_ns, a.t_max_ns, a.bin_width_ns)?,
        seed: cfg.seed,
    };
    let sim = match a.kind {
        SimKind::Hom => simulate_hom(&sim_cfg),
        SimKind::Cw => simulate_cw_hom(&sim_cfg),
        SimKind::Hbt => simulate_hbt(&sim_cfg),
    }?;
    d.derive("total_counts", sim.histogram.total());
    d.derive("expected_total_counts", sim.expected.iter().sum::<f64>());
    d.derive("n_bins", sim.histogram.len());
    d.derive("bin_width_ns", sim.histogram.bin_width());
    d.detail("truth", &sim.truth);
    d.file("histogram", "histogram.csv", write_histogram(&sim.histogram));
    d.file(
        "expected",
        "expected.csv",
        model_csv(&sim.histogram, &[("expected_counts", &sim.expected)]),
    );
    Ok(())
}

fn run_fit_irf(cfg: &AnalysisConfig, a: &FitIrfArgs, d: &mut Draft) -> Result<(), CliError> {
    let h = load_histogram(&a.input)?;
    let f = fit_irf(&h, &cfg.fit_options(&a.fit))?;
    d.fit("voigt", "", &f.voigt);
    d.fit("gaussian", "gaussian_", &f.gaussian);
    d.derive("chi2_voigt_normalized", f.chi2_voigt());
    d.derive("chi2_gaussian_normalized", f.chi2_gaussian());
    d.derive("irf_fwhm_ns", f.irf.fwhm());
    d.detail("irf", f.irf);
    d.detail("irf_kernel", f.kernel);
    d.file(
        "model",
        "model.csv",
        model_csv(&h, &[("voigt_counts", &f.voigt.fitted), ("gaussian_counts", &f.gaussian.fitted)]),
    );
    Ok(())
}

fn peak_fit(
    cfg: &AnalysisConfig,
    input: &Path,
    setup: &SetupArgs,
    model: &ModelArgs,
    irf: &IrfArgs,
    fit_args: &FitArgs,
    layout: PeakLayout,
) -> Result<(Histogram, ModelSpec, FitResult), CliError> {
    let h = load_histogram(input)?;
    let spec = model_spec(setup, model, irf.kernel()?, layout)?;
    let f = fit(&spec, &h, &cfg.fit_options(fit_args))?;
    Ok((h, spec, f))
}

fn record_peak_fit(d: &mut Draft, h: &Histogram, spec: &ModelSpec, f: &FitResult) {
    d.fit("fit", "", f);
    d.detail("model_spec", spec);
    d.detail("grid", h.grid());
    d.detail("fit", compact_fit(f));
    d.file("model", "model.csv", model_csv(h, &[("model_counts", &f.fitted)]));
}

fn record_visibility(d: &mut Draft, v: &VisibilityResult) {
    d.derive("visibility", v.v);
    d.derive("visibility_ci95_halfwidth", v.uncertainty);
    d.derive("visibility_method", v.method);
    d.derive("visibility_out_of_range", v.out_of_range);
    d.derive("a0", v.a0);
    d.derive("a_reference", v.reference);
    if let Some(g) = v.g2_zero {
        d.derive("g2_zero_applied", g);
    }
}

fn run_fit_hom(cfg: &AnalysisConfig, a: &FitHomArgs, d: &mut Draft) -> Result<(), CliError> {
    let (h, spec, mut f) = peak_fit(cfg, &a.input, &a.setup, &a.model, &a.irf, &a.fit, PeakLayout::Interference)?;
    let opts = cfg.fit_options(&a.fit);
    if a.intervals == IntervalKind::Profile {
        confidence_intervals(&spec, &h, &opts, &mut f, &[], 0.95)?;
    }
    let model = spec.bind(h.grid())?;
    let v = visibility_from_fit(&model, &f)?;
    record_visibility(d, &v);
    if a.intervals == IntervalKind::Profile {
        let iv = visibility_profile_interval(&spec, &h, &opts, &f, 0.95)?;
        d.derive("visibility_ci95_lower", iv.lower);
        d.derive("visibility_ci95_upper", iv.upper);
    }
    record_peak_fit(d, &h, &spec, &f);
    Ok(())
}

fn run_fit_hbt(cfg: &AnalysisConfig, a: &FitHbtArgs, d: &mut Draft) -> Result<(), CliError> {
    let (h, spec, f) = peak_fit(cfg, &a.input, &a.setup, &a.model, &a.irf, &a.fit, PeakLayout::Autocorrelation)?;
    let model = spec.bind(h.grid())?;
    let g = g2_from_fit(&model, &f, a.normalization.into(), &cfg.fit_options(&a.fit))?;
    d.derive("g2_zero", g.g2_zero);
    d.derive("g2_zero_sigma", g.sigma);
    d.derive("g2_normalization", g.normalization);
    d.derive("g2_plateau_fallback", g.fallback);
    d.derive("central_area_counts", g.central_area);
    d.derive("reference_area_counts", g.reference_area);
    if let Some(p) = g.plateau {
        d.derive("plateau_a_counts", p.a);
        d.derive("plateau_b_counts", p.b);
        d.derive("plateau_tau_ns", p.tau_ns);
    }
    record_peak_fit(d, &h, &spec, &f);
    Ok(())
}

fn run_fit_cw(cfg: &AnalysisConfig, a: &FitCwArgs, d: &mut Draft) -> Result<(), CliError> {
    let h = load_histogram(&a.input)?;
    let spec = CwFitSpec {
        irf: a.irf.kernel()?,
        rate_bounds: (a.rate_min_per_ns, a.rate_max_per_ns),
        shift_bounds: (-a.shift_range_ns, a.shift_range_ns),
    };
    let f = fit_cw(&spec, &h, &cfg.fit_options(&a.fit))?;
    d.fit("fit", "", &f.result);
    d.derive("cw_rate_per_ns", f.model.rate);
    d.derive("cw_amplitude_counts_per_bin", f.model.amplitude);
    d.detail("cw_model", f.model);
    d.file("model", "model.csv", model_csv(&h, &[("model_counts", &f.result.fitted)]));
    Ok(())
}

fn visibility(a: &VisibilityArgs, d: &mut Draft) -> Result<(), CliError> {
    let g2 = match (&a.g2, &a.g2_result) {
        (Some(g), _) => Some(*g),
        (None, Some(p)) => Some(read_result(p)?.derived_f64("g2_zero", p)?),
        (None, None) => None,
    };
    let v = if let Some(path) = &a.fit_result {
        let r = read_result(path)?;
        let spec: ModelSpec = r.detail("model_spec", path)?;
        let grid: TimeGrid = r.detail("grid", path)?;
        let f: FitResult = r.detail("fit", path)?;
        let model = spec.bind(&grid)?;
        let base = visibility_from_fit(&model, &f)?;
        if let Some(cw_path) = &a.cw_fit {
            if spec.mode != InterferometerMode::Period {
                return Err(CliError::Input("the CW correction needs a whole-period delay fit".into()));
            }
            let cw: CwTroughModel = read_result(cw_path)?.detail("cw_model", cw_path)?;
            let (a0, far) = cw_corrected_central_area(&model, &f, &cw)?;
            d.derive("a0_cw_corrected", a0);
            match g2 {
                Some(g) => visibility_b3(a0, far, spec.bs, g)?,
                None => visibility_period(a0, far, spec.bs)?,
            }
        } else if let Some(g) = g2 {
            if spec.mode != InterferometerMode::Period {
                return Err(CliError::Input("the g2(0) correction needs a whole-period delay fit".into()));
            }
            let mut out = visibility_b3(base.a0, base.reference, spec.bs, g)?;
            // the correction is an affine shift of V
            out.uncertainty = base.uncertainty;
            out
        } else {
            base
        }
    } else {
        let bs = BeamSplitter::new(a.r, a.t)?;
        let a0 = a.a0.ok_or_else(|| CliError::Input("give --fit-result or --a0 with the side areas".into()))?;
        match (a.a_plus.zip(a.a_minus), a.a_far) {
            (Some((p, m)), None) => {
                if g2.is_some() {
                    return Err(CliError::Input("the g2(0) correction needs --a-far".into()));
                }
                visibility_cluster(a0, p, m, bs)?
            }
            (None, Some(far)) => match g2 {
                Some(g) => visibility_b3(a0, far, bs, g)?,
                None => visibility_period(a0, far, bs)?,
            },
            _ => return Err(CliError::Input("give either --a-plus and --a-minus or --a-far".into())),
        }
    };
    record_visibility(d, &v);
    Ok(())
}

fn theory(a: &TheoryArgs, d: &mut Draft) -> Result<(), CliError> {
    if let Some(v) = a.invert {
        let j = invert_jitter(v, a.gamma_rad_per_ns, a.gamma_ph_per_ns)?;
        d.derive("visibility", v);
        d.derive("gamma_jitter_per_ns", j.gamma_jitter);
        d.derive("gamma_jitter_unbounded", j.unbounded);
    } else {
        let j = a.gamma_jitter_per_ns.unwrap_or(f64::INFINITY);
        let v = visibility_theory(&RateModel::new(a.gamma_rad_per_ns, a.gamma_ph_per_ns, j)?)?;
        d.derive("visibility", v);
        d.derive("gamma_jitter_per_ns", j);
    }
    d.derive("gamma_rad_per_ns", a.gamma_rad_per_ns);
    d.derive("gamma_ph_per_ns", a.gamma_ph_per_ns);
    Ok(())
}

fn compare(cfg: &AnalysisConfig, a: &CompareArgs, d: &mut Draft) -> Result<(), CliError> {
    let h = load_histogram(&a.input)?;
    let spec = model_spec(&a.setup, &a.model, a.irf.kernel()?, PeakLayout::Interference)?;
    let rep = compare_fitters(&h, &spec, &cfg.fit_options(&a.fit))?;
    for row in &rep.rows {
        let tag = serde_json::to_value(row.pipeline).expect("pipeline serializes");
        let tag = tag.as_str().expect("pipeline tag").replace('-', "_");
        d.fit(&tag, &format!("{tag}_"), &row.fit);
        d.derive(&format!("visibility_{tag}"), row.visibility);
        d.derive(&format!("visibility_ci95_halfwidth_{tag}"), row.visibility_uncertainty);
        d.derive(&format!("chi2_normalized_{tag}"), row.chi2);
    }
    d.file("table", "comparison.txt", rep.render());
    Ok(())
}

fn solver_grid(g: &WaveguideGeometry, a: &GridArgs) -> ModeGrid {
    ModeGrid {
        dx_nm: a.dx_nm,
        dy_nm: a.dy_nm,
        ..ModeGrid::auto(g, a.dx_nm)
    }
}

fn taper(a: &TaperArgs, d: &mut Draft) -> Result<(), CliError> {
    let source = if let Some(n) = a.neff {
        NeffSource::Constant(n)
    } else if let Some(path) = &a.neff_table {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        NeffSource::Table(read_neff_table(&text).map_err(|e| match e {
            PhotonicsError::Parse { line, msg } => CliError::Parse {
                path: path.clone(),
                line,
                msg,
            },
            e => e.into(),
        })?)
    } else {
        if !(a.knot_step_nm > 0.0) {
            return Err(CliError::Input("knot step must be positive".into()));
        }
        let n = ((a.w_start_nm - a.w_end_nm) / a.knot_step_nm).ceil().max(1.0) as usize;
        let mut knots: Vec<f64> = (0..n).map(|k| a.w_end_nm + k as f64 * a.knot_step_nm).collect();
        knots.push(a.w_start_nm);
        let base = a.geometry.geometry(a.w_start_nm);
        let table = sweep_neff(&base, &knots, &solver_grid(&base, &a.grid))?;
        d.file("neff_table", "neff.csv", write_neff_table(&table));
        NeffSource::Table(table)
    };
    let p = generate_taper(a.w_start_nm, a.w_end_nm, a.dw_nm, a.alpha, &source)?;
    d.derive("taper_length_um", p.total_length_um);
    d.derive("alpha", p.alpha);
    d.derive("n_steps", p.step_n_eff.len());
    d.derive(
        "max_step_residual",
        p.residuals().into_iter().fold(0.0, f64::max),
    );
    d.file("taper", "taper.csv", write_taper(&p));
    Ok(())
}

fn mode_solve(a: &ModeSolveArgs, d: &mut Draft) -> Result<(), CliError> {
    let mut table = String::from("width_nm,n_eff\n");
    let mut rows = Vec::new();
    for &w in &a.widths_nm {
        let g = a.geometry.geometry(w);
        let m = solve_scalar_mode(&g, &solver_grid(&g, &a.grid))?;
        let _ = writeln!(table, "{w},{}", m.n_eff);
        rows.push(serde_json::json!({"width_nm": w, "n_eff": m.n_eff, "iterations": m.iterations}));
        if a.widths_nm.len() == 1 {
            d.derive("n_eff", m.n_eff);
            let f = &m.field;
            let mut s = String::from("x_nm,y_nm,amplitude\n");
            for i in 0..f.nx {
                for j in 0..f.ny {
                    let _ = writeln!(s, "{},{},{}", f.x(i), f.y(j), f.at(i, j));
                }
            }
            d.file("field", "field.csv", s);
        }
    }
    d.detail("solutions", rows);
    d.file("neff", "neff.csv", table);
    Ok(())
}

fn run_overlap(a: &OverlapArgs, d: &mut Draft) -> Result<(), CliError> {
    let mut csv = String::from("width_nm,overlap\n");
    let mut best = (f64::NAN, -1.0);
    let mut values = Vec::new();
    for &w in &a.widths_nm {
        let g = a.geometry.geometry(w);
        let m = solve_scalar_mode(&g, &solver_grid(&g, &a.grid))?;
        let eta = mode_overlap(&m, a.mfd_um)?;
        let _ = writeln!(csv, "{w},{eta}");
        if eta > best.1 {
            best = (w, eta);
        }
        values.push((w, eta));
    }
    d.derive("best_width_nm", best.0);
    d.derive("best_overlap", best.1);
    let lo = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    d.derive("interior_maximum", values.len() >= 3 && best.0 > lo && best.0 < hi);
    d.detail(
        "overlaps",
        values.iter().map(|v| serde_json::json!({"width_nm": v.0, "overlap": v.1})).collect::<Vec<_>>(),
    );
    d.file("overlap", "overlap.csv", csv);
    Ok(())
}

fn budget(a: &LossBudgetArgs, d: &mut Draft) -> Result<(), CliError> {
    let losses: Vec<(String, f64)> = a.losses.iter().map(|l| (l.name.clone(), l.transmission)).collect();
    let b = loss_budget(a.detected_rate_hz, a.repetition_rate_hz, &losses)?;
    d.derive("eta_sp", b.eta_sp);
    d.derive("raw_probability", b.raw_probability());
    d.detail("budget", &b);
    d.file("budget", "budget.txt", b.render());
    Ok(())
}
