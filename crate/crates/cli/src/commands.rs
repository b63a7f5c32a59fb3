use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hcv_dynamics::equilibria::Regime;
use hcv_dynamics::reproduction::r0_spectral;
use hcv_dynamics::simulate::ViolationKind;
use hcv_dynamics::stability::LocalClass;
use hcv_dynamics::tolerances::R0_SPECTRAL_AGREEMENT;
use hcv_dynamics::{
    certify_global, existence_regime, integrate, run_sweep, stability_report, uninfected_equilibrium, Error, GridSpec,
    SweepSpec, Target, Trajectory,
};

use crate::output::{render_svg, write_sweep_csv, write_trajectory_csv};
use crate::{fmt_f64, parse_scenario, parse_sweep_spec, CliError, MethodKind, ScenarioFile, Status};

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(CliError::io(path))
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile> {
    parse_scenario(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_sweep(path: &Path) -> Result<SweepSpec> {
    parse_sweep_spec(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn looks_like_sweep(text: &str) -> bool {
    text.lines().any(|l| l.trim_start().starts_with('['))
}

/// Ordered `key = value` pairs, printed as-is for `--machine`.
#[derive(Default)]
struct Machine(Vec<(String, String)>);

impl Machine {
    fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    fn num(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, fmt_f64(value));
    }

    fn write(&self, out: &mut dyn Write) -> std::io::Result<()> {
        for (k, v) in &self.0 {
            writeln!(out, "{k} = {v}")?;
        }
        Ok(())
    }
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

pub fn validate(path: &Path, out: &mut dyn Write) -> Result<Status> {
    let text = read(path)?;
    let warnings = if looks_like_sweep(&text) {
        let spec = parse_sweep_spec(&text).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        spec.validate()?;
        let warnings = spec.base.validate()?;
        let points = spec.axis1.n * spec.axis2.as_ref().map_or(1, |a| a.n);
        writeln!(out, "ok: sweep spec, {points} grid points").map_err(stdout_err)?;
        warnings
    } else {
        let sc = parse_scenario(&text).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        let warnings = sc.params.validate()?;
        sc.integrator.resolve(None, None).validate()?;
        writeln!(out, "ok: scenario {}", sc.name.as_deref().unwrap_or("(unnamed)")).map_err(stdout_err)?;
        warnings
    };
    for w in warnings {
        writeln!(out, "warning: {w}").map_err(stdout_err)?;
    }
    Ok(Status::Ok)
}

fn relation_to_one(r0: f64) -> &'static str {
    if r0 < 1.0 {
        "r0 < 1"
    } else if r0 > 1.0 {
        "r0 > 1"
    } else {
        "r0 = 1"
    }
}

pub fn analyze(sc: &ScenarioFile, machine: bool, out: &mut dyn Write) -> Result<Status> {
    let p = &sc.params;
    let warnings = p.validate()?;
    let e0 = uninfected_equilibrium(p)?;
    let ngm = r0_spectral(p)?;
    let report = stability_report(p)?;
    let regime = existence_regime(p)?;
    let r0 = report.r0;
    let r0_delta = (r0 - ngm.rho).abs();
    let cure_level = 1.0 - p.q / p.delta();

    let mut m = Machine::default();
    let mut flags: Vec<String> = Vec::new();
    m.put("name", sc.name.as_deref().unwrap_or(""));
    m.num("t0", e0.state.t);
    m.num("r0", r0);
    m.num("r0_spectral", ngm.rho);
    m.num("r0_delta", r0_delta);
    m.put("r0_relation", relation_to_one(r0));
    m.num("one_minus_q_over_delta", cure_level);
    m.put("r0_below_cure_level", r0 < cure_level);
    m.put("splitting_valid", ngm.splitting_valid());
    m.put("e0_class", report.e0.class);
    m.num("e0_j1_det", report.e0.j1_det);
    if r0_delta > R0_SPECTRAL_AGREEMENT * r0.abs().max(1.0) {
        flags.push("r0_spectral_mismatch".into());
    }
    if !ngm.splitting_valid() {
        flags.push("next_generation_splitting_invalid".into());
    }

    let ex = &report.existence;
    m.put("regime", ex.regime);
    m.num("lemma_condition", ex.lemma_condition);
    if let Some(t) = ex.threshold_t {
        m.num("threshold_t", t);
    }
    m.put("infected_candidates", ex.candidates.len());
    if let Some(t) = ex.radical_t_star {
        m.num("radical_t_star", t);
    }
    if ex.radical_agrees == Some(false) {
        flags.push("radical_t_star_disagrees".into());
    }
    if ex.regime == Regime::MultipleCandidates {
        flags.push("multiple_infected_candidates".into());
    }
    for v in &regime.verdicts {
        let verdict = match (v.predicts_infected, v.disagrees) {
            (None, _) => "not_applicable",
            (Some(_), false) => "agrees",
            (Some(_), true) => "disagrees",
        };
        m.put(format!("criterion_{}", v.criterion.as_str()), verdict);
        if v.disagrees {
            flags.push(format!("{}_disagrees", v.criterion.as_str()));
        }
    }

    if let Some(es) = &report.estar {
        let st = es.state;
        let residual = ex.unique().map_or(f64::NAN, |e| e.residual_norm);
        m.num("estar_T", st.t);
        m.num("estar_I", st.i);
        m.num("estar_V", st.v);
        m.num("estar_residual", residual);
        m.num("jacobian_closed_form_deviation", es.closed_form_deviation);
        let c = &es.coefficients;
        m.num("a1", c.a1);
        m.num("a2", c.a2);
        m.num("a3", c.a3);
        m.num("coefficient_deviation", c.max_deviation);
        let rh = &es.routh_hurwitz;
        m.num("delta2", rh.delta2);
        m.put("estar_class", rh.class);
        m.num("max_real_part", rh.max_real_part);
        if !c.agrees() {
            flags.push("characteristic_coefficients_disagree".into());
        }
        if !rh.roots_agree {
            flags.push("routh_hurwitz_roots_disagree".into());
        }
        if rh.class == LocalClass::Marginal {
            flags.push("estar_marginal".into());
        }
    }
    m.put(
        "flags",
        if flags.is_empty() {
            "none".to_string()
        } else {
            flags.join(";")
        },
    );
    for (k, w) in warnings.iter().enumerate() {
        m.put(format!("warning_{}", k + 1), w);
    }

    if machine {
        m.write(out).map_err(stdout_err)?;
        return Ok(Status::Ok);
    }

    let mut h = String::new();
    let mut line = |s: String| {
        h.push_str(&s);
        h.push('\n');
    };
    line(format!("scenario: {}", sc.name.as_deref().unwrap_or("(unnamed)")));
    line(format!("uninfected equilibrium T0 = {}", fmt_f64(e0.state.t)));
    line(format!(
        "R0 = {} (closed form), {} (spectral radius), |difference| = {:e}",
        fmt_f64(r0),
        fmt_f64(ngm.rho),
        r0_delta
    ));
    line(format!("  {}", relation_to_one(r0)));
    line(format!(
        "  1 - q/delta = {}; R0 {} that level",
        fmt_f64(cure_level),
        if r0 < cure_level { "is below" } else { "is not below" }
    ));
    line(format!("E0 local stability: {}", report.e0.class));
    line(format!("existence regime: {}", ex.regime));
    line(format!(
        "  lemma condition s + q(T_max/r_I)(r_I - delta) = {}",
        fmt_f64(ex.lemma_condition)
    ));
    for v in &regime.verdicts {
        let verdict = match (v.predicts_infected, v.disagrees) {
            (None, _) => "not applicable",
            (Some(_), false) => "agrees",
            (Some(_), true) => "DISAGREES with the computed equilibria",
        };
        line(format!("  criterion {}: {}", v.criterion.as_str(), verdict));
    }
    match &report.estar {
        Some(es) => {
            let st = es.state;
            line(format!(
                "infected equilibrium E*: T = {}, I = {}, V = {}",
                fmt_f64(st.t),
                fmt_f64(st.i),
                fmt_f64(st.v)
            ));
            let c = &es.coefficients;
            line(format!(
                "  A1 = {}, A2 = {}, A3 = {}, Delta2 = {}",
                fmt_f64(c.a1),
                fmt_f64(c.a2),
                fmt_f64(c.a3),
                fmt_f64(es.routh_hurwitz.delta2)
            ));
            line(format!(
                "  Routh-Hurwitz: {} (largest eigenvalue real part {:e})",
                es.routh_hurwitz.class, es.routh_hurwitz.max_real_part
            ));
        }
        None => line("infected equilibrium E*: none".to_string()),
    }
    if flags.is_empty() {
        line("flags: none".to_string());
    } else {
        line("flags:".to_string());
        for f in &flags {
            line(format!("  {f}"));
        }
    }
    for w in &warnings {
        line(format!("warning: {w}"));
    }
    out.write_all(h.as_bytes()).map_err(stdout_err)?;
    Ok(Status::Ok)
}

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub t_end: Option<f64>,
    pub method: Option<MethodKind>,
    pub width: Option<u32>,
    pub height: Option<u32>,
}

fn write_csv_to(traj: &Trajectory, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(CliError::io(path))?;
            let mut w = BufWriter::new(file);
            write_trajectory_csv(traj, &mut w)
                .and_then(|_| w.flush())
                .map_err(CliError::io(path))
        }
        None => write_trajectory_csv(traj, out).map_err(stdout_err),
    }
}

/// `<stem>.<var>.svg` next to the CSV.
pub fn svg_paths(csv: &Path) -> [(String, PathBuf); 3] {
    let stem = csv
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trajectory")
        .to_string();
    ["T", "I", "V"].map(|v| (v.to_string(), csv.with_file_name(format!("{stem}.{v}.svg"))))
}

pub fn simulate(
    sc: &ScenarioFile,
    opts: &SimulateOptions,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<Status> {
    if opts.svg && opts.out.is_none() {
        return Err(CliError::Usage("--svg needs --out to place the image files".into()));
    }
    sc.params.validate()?;
    let config = sc.integrator.resolve(opts.t_end, opts.method);
    let traj = match integrate(&sc.params, &sc.initial, &config) {
        Ok(t) => t,
        Err(Error::Integration { time, reason, partial }) => {
            write_csv_to(&partial, opts.out.as_deref(), out)?;
            return Err(Error::Integration { time, reason, partial }.into());
        }
        Err(e) => return Err(e.into()),
    };
    write_csv_to(&traj, opts.out.as_deref(), out)?;

    if let (true, Some(csv)) = (opts.svg, &opts.out) {
        let w = opts.width.unwrap_or(crate::output::DEFAULT_WIDTH);
        let h = opts.height.unwrap_or(crate::output::DEFAULT_HEIGHT);
        for (k, (var, path)) in svg_paths(csv).into_iter().enumerate() {
            let ys: Vec<f64> = traj.states.iter().map(|s| s.to_array()[k]).collect();
            fs::write(&path, render_svg(&var, &traj.times, &ys, w, h)).map_err(CliError::io(&path))?;
        }
    }

    let serious: Vec<_> = traj
        .violation_log
        .iter()
        .filter(|v| !matches!(v.kind, ViolationKind::Negativity { benign: true }))
        .collect();
    let _ = writeln!(
        diag,
        "{} samples, {} steps ({} rejected), bounds checked: {}, violations: {}",
        traj.len(),
        traj.steps_taken,
        traj.steps_rejected,
        traj.bounds_checked,
        serious.len()
    );
    for v in serious.iter().take(5) {
        let _ = writeln!(diag, "  t = {}: {} by {:e}", fmt_f64(v.time), v.kind, v.magnitude);
    }
    Ok(if serious.is_empty() {
        Status::Ok
    } else {
        Status::Violation
    })
}

pub fn certify(sc: &ScenarioFile, target: Target, grid: usize, machine: bool, out: &mut dyn Write) -> Result<Status> {
    sc.params.validate()?;
    if grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let rep = certify_global(&sc.params, target, &GridSpec::log_uniform(grid))?;
    let status = if !rep.violations.is_empty() {
        Status::Violation
    } else if !rep.preconditions_met {
        Status::Advisory
    } else {
        Status::Ok
    };
    let verdict = match status {
        Status::Ok => "certified on the sampled grid",
        Status::Violation => "sign condition violated",
        Status::Advisory => "no violations, but the hypotheses do not hold",
    };

    let mut m = Machine::default();
    m.put("target", target);
    let eq = rep.equilibrium;
    m.num("equilibrium_T", eq.t);
    m.num("equilibrium_I", eq.i);
    m.num("equilibrium_V", eq.v);
    m.put("grid_size", rep.grid_size);
    for hy in rep.hypotheses.iter().chain(&rep.implicit_assumptions) {
        m.put(format!("hypothesis[{}]", hy.name), hy.holds);
    }
    m.put("preconditions_met", rep.preconditions_met);
    m.num("max_dl_dt", rep.min_margin);
    m.num("worst_relative", rep.worst_relative);
    m.put("violations", rep.violations.len());
    m.put("verdict", verdict);
    if machine {
        m.write(out).map_err(stdout_err)?;
        return Ok(status);
    }

    let mut h = String::new();
    let mut line = |s: String| {
        h.push_str(&s);
        h.push('\n');
    };
    line(format!("target: {target}"));
    line(format!(
        "equilibrium: T = {}, I = {}, V = {}",
        fmt_f64(eq.t),
        fmt_f64(eq.i),
        fmt_f64(eq.v)
    ));
    line(format!("grid: {} points", rep.grid_size));
    for (kind, list) in [
        ("hypothesis", &rep.hypotheses),
        ("implicit assumption", &rep.implicit_assumptions),
    ] {
        for hy in list.iter() {
            line(format!(
                "{kind} {}: {} vs {} -> {}",
                hy.name,
                fmt_f64(hy.lhs),
                fmt_f64(hy.rhs),
                if hy.holds { "holds" } else { "fails" }
            ));
        }
    }
    line(format!(
        "max dL/dt on grid: {:e} (relative {:e})",
        rep.min_margin, rep.worst_relative
    ));
    line(format!("violations: {}", rep.violations.len()));
    for v in rep.violations.iter().take(5) {
        line(format!(
            "  T = {}, I = {}, V = {}: dL/dt = {:e}",
            fmt_f64(v.state.t),
            fmt_f64(v.state.i),
            fmt_f64(v.state.v),
            v.dl_dt
        ));
    }
    line(format!("verdict: {verdict}"));
    out.write_all(h.as_bytes()).map_err(stdout_err)?;
    Ok(status)
}

pub fn sweep(spec: &SweepSpec, path: Option<&Path>, out: &mut dyn Write) -> Result<Status> {
    let grid = run_sweep(spec)?;
    match path {
        Some(path) => {
            let file = File::create(path).map_err(CliError::io(path))?;
            let mut w = BufWriter::new(file);
            write_sweep_csv(spec, &grid, &mut w)
                .and_then(|_| w.flush())
                .map_err(CliError::io(path))?;
        }
        None => write_sweep_csv(spec, &grid, out).map_err(stdout_err)?,
    }
    Ok(Status::Ok)
}
