//! Command bodies. Each returns tables or reports; writing happens in the caller.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use super::config::{ConfigError, ScenarioConfig};
use super::output::{format_number, Table};
use super::scenario::Scenario;
use super::CliError;
use crate::dsl::format_polynomial;
use crate::grid::{
    build_block_hamiltonian, propagate, purity, reduced_density, spectrum, susy_algebra_report, SpatialGrid,
    SpinorState, SpinorTrajectory, EXACT_FLOOR,
};
use crate::harmonic::{coherent_wavepacket, frequencies_match, gaussian_oracle, series_equal_freq, series_paper};
use crate::potential::{effective_potential, resolve_channel, Channel, HarmonicChannel};
use crate::series::{DecoherenceSeries, Method};

pub const RUN_REPORT_SCHEMA: &str = "susy-decoherence/run-report/1";
pub const SUSY_REPORT_SCHEMA: &str = "susy-decoherence/susy-report/1";
/// Largest grid for dense spinor algebra checks (matrices of dimension 2n).
pub const MAX_ALGEBRA_N: usize = 1024;
/// Largest grid for dense block eigensolves.
pub const MAX_SPECTRUM_N: usize = 4096;
/// Accepted window for fitted convergence orders.
pub const ORDER_WINDOW: [f64; 2] = [1.5, 2.5];

/// Box for commands that may run without resolved channels.
fn grid_for(config: &ScenarioConfig, channels: Option<&(HarmonicChannel, HarmonicChannel)>) -> Result<SpatialGrid, CliError> {
    let l = match (config.grid.half_width, channels) {
        (Some(l), _) => l,
        (None, Some((p, m))) => SpatialGrid::for_channels(p, m).half_width(),
        (None, None) => {
            return Err(CliError::Config(ConfigError::Invalid {
                key: "[grid].L",
                message: "required when the model has no stable equilibrium".into(),
            }))
        }
    };
    SpatialGrid::new(config.grid.n, l).map_err(|e| CliError::Config(ConfigError::Invalid { key: "[grid]", message: e.to_string() }))
}

fn try_channels(config: &ScenarioConfig) -> Option<(HarmonicChannel, HarmonicChannel)> {
    let m = &config.model.model;
    Some((resolve_channel(m, Channel::Plus).ok()?, resolve_channel(m, Channel::Minus).ok()?))
}

/// Partner potentials and their quadratic models over the grid.
pub fn cmd_potentials(config: &ScenarioConfig) -> Result<Table, CliError> {
    let model = &config.model.model;
    let vp = effective_potential(model, Channel::Plus);
    let vm = effective_potential(model, Channel::Minus);
    let channels = try_channels(config);
    let flat = vp.is_zero() && vm.is_zero();
    if channels.is_none() && !flat {
        resolve_channel(model, Channel::Plus).and_then(|_| resolve_channel(model, Channel::Minus))?;
    }
    let grid = grid_for(config, channels.as_ref())?;
    let mut table = Table::new(
        ["x", "V_plus", "V_minus", "V_plus_harmonic", "V_minus_harmonic"].map(String::from).to_vec(),
    );
    for x in grid.points() {
        let (hp, hm) = channels.as_ref().map_or((0.0, 0.0), |(p, m)| (p.potential(x), m.potential(x)));
        table.push([x, vp.evaluate(x), vm.evaluate(x), hp, hm]);
    }
    Ok(table)
}

fn time_label(t: f64) -> String {
    format!("t={t}")
}

/// Channel densities at the requested times, from grid propagation when the
/// scenario requests the grid method and from the oscillator dynamics otherwise.
pub fn cmd_wavepackets(scenario: &Scenario, times: &[f64]) -> Result<Table, CliError> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(CliError::Usage("--times must be finite and non-negative".into()));
    }
    let grid = scenario.grid;
    let xs = grid.points();
    let mut header = vec!["x".to_string()];
    for t in times {
        header.push(format!("density_plus({})", time_label(*t)));
        header.push(format!("density_minus({})", time_label(*t)));
    }
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let use_grid = scenario.config.output.methods.contains(&Method::Grid);
    let packet = scenario.packet()?;
    for &t in times {
        for ch in Channel::BOTH {
            let hc = scenario.channel(ch);
            let density: Vec<f64> = if use_grid {
                if t == 0.0 {
                    packet.density()
                } else {
                    let steps = (t / scenario.dt).ceil().max(1.0) as usize;
                    let clamp = scenario.clamps()[if ch == Channel::Plus { 0 } else { 1 }];
                    let traj = propagate(scenario.model(), &grid, &packet, ch, t / steps as f64, steps, clamp, steps)?;
                    traj.snapshots.last().expect("final snapshot").density()
                }
            } else if scenario.is_vacuum_at_origin() && frequencies_match(&scenario.plus, &scenario.minus) {
                coherent_wavepacket(hc, t, &xs).iter().map(|a| a.norm_sqr()).collect()
            } else {
                scenario.gaussian().evolve(hc, t).sample(&xs).iter().map(|a| a.norm_sqr()).collect()
            };
            columns.push(density);
        }
    }
    let mut table = Table::new(header);
    for (j, x) in xs.iter().enumerate() {
        table.push(std::iter::once(*x).chain(columns.iter().map(|c| c[j])));
    }
    Ok(table)
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelSummary {
    #[serde(rename = "W")]
    pub expression: String,
    pub polynomial: String,
    pub mass: f64,
    pub hbar: f64,
}

impl ModelSummary {
    fn from_config(config: &ScenarioConfig) -> Self {
        let m = &config.model.model;
        ModelSummary {
            expression: config.model.expression.clone(),
            polynomial: format_polynomial(m.w()),
            mass: m.mass(),
            hbar: m.hbar(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelPair {
    pub plus: HarmonicChannel,
    pub minus: HarmonicChannel,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridSummary {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub dx: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionSummary {
    pub dt: f64,
    pub steps: usize,
    pub sample_every: usize,
    pub clamp_harmonic: bool,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct InitialSummary {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
    pub c_plus: [f64; 2],
    pub c_minus: [f64; 2],
    pub vacuum_at_origin: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub min_abs: f64,
    pub t_min: f64,
    pub omega0_t_min: f64,
    pub max_abs: f64,
    pub revival_times: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Deviation {
    pub a: Method,
    pub b: Method,
    pub max_abs_deviation: f64,
    pub max_complex_deviation: f64,
    /// Whether this pair is held to the configured tolerance.
    pub gated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridDiagnostics {
    pub max_norm_drift_plus: f64,
    pub max_norm_drift_minus: f64,
    pub max_diagonal_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub model: ModelSummary,
    pub channels: ChannelPair,
    #[serde(rename = "delta_E0")]
    pub delta_e0: f64,
    /// `2(g₊ - g₋)²/ω₀²`, the exponent of the deepest equal-frequency dip.
    pub depth_exponent: Option<f64>,
    pub grid: GridSummary,
    pub evolution: EvolutionSummary,
    pub initial: InitialSummary,
    pub methods: Vec<MethodSummary>,
    pub deviations: Vec<Deviation>,
    pub tolerance: f64,
    pub within_tolerance: bool,
    pub grid_diagnostics: Option<GridDiagnostics>,
    pub warnings: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

/// Every configured method on the scenario's common time grid.
pub struct Computed {
    pub series: Vec<DecoherenceSeries>,
    pub spinor: Option<SpinorTrajectory>,
    pub report: RunReport,
}

fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn compute(scenario: &Scenario) -> Result<Computed, CliError> {
    let cfg = &scenario.config;
    let (plus, minus) = (&scenario.plus, &scenario.minus);
    let equal = frequencies_match(plus, minus);
    let vacuum = scenario.is_vacuum_at_origin();
    let mut warnings = Vec::new();
    let mut timings = BTreeMap::new();
    let mut series = Vec::new();
    let mut spinor = None;

    let closed_form = cfg.output.methods.iter().any(|m| matches!(m, Method::EqualFreqEq34 | Method::PaperEq30));
    if closed_form && !vacuum {
        warnings.push("closed forms assume the oscillator vacuum at x = 0; the configured packet differs".to_string());
    }
    if !cfg.evolution.clamp_harmonic && cfg.output.methods.contains(&Method::Grid) {
        warnings.push("grid runs the full potentials; its deviation from the quadratic-model methods is not gated".to_string());
    }

    for &method in &cfg.output.methods {
        let start = Instant::now();
        let s = match method {
            Method::EqualFreqEq34 => {
                if !equal {
                    return Err(CliError::Config(ConfigError::Invalid {
                        key: "[output].methods",
                        message: format!(
                            "equal_freq_eq34 needs equal channel frequencies (omega_plus = {}, omega_minus = {})",
                            plus.omega0, minus.omega0
                        ),
                    }));
                }
                series_equal_freq(plus, minus, &scenario.times)?
            }
            Method::PaperEq30 => series_paper(plus, minus, &scenario.times)?,
            Method::GaussianOracle => gaussian_oracle(plus, minus, &scenario.gaussian(), &scenario.times)?,
            Method::Grid => {
                let state = SpinorState::factorized(scenario.c_plus(), scenario.c_minus(), &scenario.packet()?)?;
                let traj = state.evolve(
                    scenario.model(),
                    &scenario.grid,
                    scenario.dt,
                    cfg.evolution.steps,
                    scenario.clamps(),
                    cfg.evolution.sample_every,
                )?;
                warnings.extend(traj.warnings().cloned());
                let s = traj.decoherence()?;
                spinor = Some(traj);
                s
            }
        };
        timings.insert(method.name().to_string(), start.elapsed().as_secs_f64() * 1e3);
        series.push(s);
    }

    let omega = plus.omega0;
    let methods = series
        .iter()
        .map(|s| {
            let (min_abs, t_min) = s.min_abs().expect("at least one sample");
            MethodSummary {
                method: s.method(),
                min_abs,
                t_min,
                omega0_t_min: omega * t_min,
                max_abs: s.max_abs(),
                revival_times: s.revival_times(),
            }
        })
        .collect();

    let trusted = |m: Method| match m {
        Method::GaussianOracle => true,
        Method::EqualFreqEq34 => vacuum,
        Method::Grid => cfg.evolution.clamp_harmonic,
        Method::PaperEq30 => false,
    };
    let mut deviations = Vec::new();
    for (i, a) in series.iter().enumerate() {
        for b in &series[i + 1..] {
            deviations.push(Deviation {
                a: a.method(),
                b: b.method(),
                max_abs_deviation: a.max_abs_deviation(b).expect("shared time grid"),
                max_complex_deviation: a.max_complex_deviation(b).expect("shared time grid"),
                gated: trusted(a.method()) && trusted(b.method()),
            });
        }
    }
    let within_tolerance = deviations.iter().filter(|d| d.gated).all(|d| d.max_abs_deviation <= cfg.output.tolerance);

    let grid_diagnostics = match &spinor {
        Some(traj) => {
            let rhos = traj.reduced_densities()?;
            let first = rhos[0];
            let drift = rhos
                .iter()
                .map(|r| (r.rho[0][0] - first.rho[0][0]).norm().max((r.rho[1][1] - first.rho[1][1]).norm()))
                .fold(0.0, f64::max);
            Some(GridDiagnostics {
                max_norm_drift_plus: traj.plus.max_norm_drift,
                max_norm_drift_minus: traj.minus.max_norm_drift,
                max_diagonal_drift: drift,
            })
        }
        None => None,
    };

    let report = RunReport {
        schema: RUN_REPORT_SCHEMA,
        model: ModelSummary::from_config(cfg),
        channels: ChannelPair { plus: *plus, minus: *minus },
        delta_e0: plus.e0 - minus.e0,
        depth_exponent: equal.then(|| 2.0 * (plus.g - minus.g).powi(2) / (omega * omega)),
        grid: GridSummary { n: scenario.grid.n(), half_width: scenario.grid.half_width(), dx: scenario.grid.dx() },
        evolution: EvolutionSummary {
            dt: scenario.dt,
            steps: cfg.evolution.steps,
            sample_every: cfg.evolution.sample_every,
            clamp_harmonic: cfg.evolution.clamp_harmonic,
            samples: scenario.times.len(),
        },
        initial: InitialSummary {
            center: cfg.initial.center,
            width: scenario.width,
            momentum: cfg.initial.momentum,
            c_plus: complex_pair(scenario.c_plus()),
            c_minus: complex_pair(scenario.c_minus()),
            vacuum_at_origin: vacuum,
        },
        methods,
        deviations,
        tolerance: cfg.output.tolerance,
        within_tolerance,
        grid_diagnostics,
        warnings,
        timings_ms: timings,
    };
    Ok(Computed { series, spinor, report })
}

/// The series used for purity: grid, then oracle, then the closed forms.
fn reference(series: &[DecoherenceSeries]) -> &DecoherenceSeries {
    [Method::Grid, Method::GaussianOracle, Method::EqualFreqEq34, Method::PaperEq30]
        .iter()
        .find_map(|m| series.iter().find(|s| s.method() == *m))
        .expect("at least one method")
}

/// CSV of every method's `D(t)` with purity, plus the run report.
pub fn cmd_decoherence(scenario: &Scenario) -> Result<(Table, RunReport), CliError> {
    let computed = compute(scenario)?;
    let omega = scenario.plus.omega0;
    let mut header = vec!["t".to_string(), "omega0_t".to_string()];
    for s in &computed.series {
        let sfx = s.method().suffix();
        header.extend([format!("re_D_{sfx}"), format!("im_D_{sfx}"), format!("abs_D_{sfx}")]);
    }
    header.push("purity".into());
    if computed.spinor.is_some() {
        header.extend(["norm_plus".to_string(), "norm_minus".to_string()]);
    }
    let refs = reference(&computed.series);
    let mut table = Table::new(header);
    for (k, t) in scenario.times.iter().enumerate() {
        let mut row = vec![*t, omega * t];
        for s in &computed.series {
            let d = s.values()[k];
            row.extend([d.re, d.im, d.norm()]);
        }
        row.push(purity(&reduced_density(scenario.c_plus(), scenario.c_minus(), refs.values()[k])));
        if let Some(traj) = &computed.spinor {
            row.push(traj.plus.snapshots[k].norm_sqr());
            row.push(traj.minus.snapshots[k].norm_sqr());
        }
        table.push(row);
    }
    Ok((table, computed.report))
}

/// Run every configured method and report cross-method deviations.
pub fn cmd_compare(scenario: &Scenario) -> Result<RunReport, CliError> {
    Ok(compute(scenario)?.report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub name: &'static str,
    pub values: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Fitted order, or `"exact"` when every value is at the floor.
    pub order: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SusyCheckReport {
    pub schema: &'static str,
    pub model: ModelSummary,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: Vec<usize>,
    pub dx: Vec<f64>,
    pub floor: f64,
    pub residuals: Vec<ResidualRow>,
    pub order_window: [f64; 2],
    pub pass: bool,
}

/// Algebra residuals over `halvings` refinements of the configured grid.
pub fn cmd_susy_check(config: &ScenarioConfig, halvings: usize) -> Result<SusyCheckReport, CliError> {
    if halvings == 0 {
        return Err(CliError::Usage("--halvings must be at least 1".into()));
    }
    let finest = config.grid.n.checked_shl(halvings as u32).filter(|n| *n <= MAX_ALGEBRA_N);
    if finest.is_none() {
        return Err(CliError::Config(ConfigError::Invalid {
            key: "[grid].n",
            message: format!(
                "n·2^halvings = {}·2^{halvings} exceeds the dense-matrix budget of {MAX_ALGEBRA_N}",
                config.grid.n
            ),
        }));
    }
    let grid = grid_for(config, try_channels(config).as_ref())?;
    let report = susy_algebra_report(&config.model.model, &grid, halvings);
    let mut pass = true;
    let residuals = report
        .entries
        .iter()
        .map(|e| {
            let order = match e.order {
                Some(p) => {
                    pass &= (ORDER_WINDOW[0]..=ORDER_WINDOW[1]).contains(&p);
                    serde_json::json!(p)
                }
                None if e.is_exact() => serde_json::json!("exact"),
                None => {
                    // mixed floor and non-floor values: no order can be fitted
                    pass = false;
                    serde_json::Value::Null
                }
            };
            ResidualRow { name: e.kind.name(), values: e.values.clone(), ratios: e.ratios(), order }
        })
        .collect();
    Ok(SusyCheckReport {
        schema: SUSY_REPORT_SCHEMA,
        model: ModelSummary::from_config(config),
        half_width: grid.half_width(),
        n: report.n,
        dx: report.dx,
        floor: EXACT_FLOOR,
        residuals,
        order_window: ORDER_WINDOW,
        pass,
    })
}

/// Lowest `k` eigenvalues of `H₊` and `H₋` with their gaps.
pub fn cmd_spectrum(config: &ScenarioConfig, k: usize) -> Result<Table, CliError> {
    if k == 0 || k > config.grid.n {
        return Err(CliError::Usage(format!("--k must lie in 1..={}", config.grid.n)));
    }
    if config.grid.n > MAX_SPECTRUM_N {
        return Err(CliError::Config(ConfigError::Invalid {
            key: "[grid].n",
            message: format!("{} exceeds the dense eigensolver budget of {MAX_SPECTRUM_N}", config.grid.n),
        }));
    }
    let channels = try_channels(config);
    let clamp = config.evolution.clamp_harmonic;
    if clamp && channels.is_none() {
        resolve_channel(&config.model.model, Channel::Plus)
            .and_then(|_| resolve_channel(&config.model.model, Channel::Minus))?;
    }
    let grid = grid_for(config, channels.as_ref())?;
    let model = &config.model.model;
    let (cp, cm) = match (&channels, clamp) {
        (Some((p, m)), true) => (Some(p), Some(m)),
        _ => (None, None),
    };
    let (ep, em) = std::thread::scope(|s| {
        let ep = s.spawn(|| spectrum(&build_block_hamiltonian(model, &grid, Channel::Plus, cp), k));
        let em = spectrum(&build_block_hamiltonian(model, &grid, Channel::Minus, cm), k);
        (ep.join().expect("eigensolver thread panicked"), em)
    });
    let (ep, em) = (ep?, em?);
    let mut table = Table::new(["index", "E_plus", "E_minus", "gap"].map(String::from).to_vec());
    for (j, (a, b)) in ep.iter().zip(&em).enumerate() {
        table.push_cells(vec![j.to_string(), format_number(*a), format_number(*b), format_number((a - b).abs())]);
    }
    Ok(table)
}
