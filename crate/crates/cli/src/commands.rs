//! Scenario commands: each turns a resolved configuration into result tables.

use liability_core::equilibrium::{
    exclusive_lanes_equilibrium, grid_oracle_equilibrium, nash_hh, pure_av_optimum, stackelberg_ah,
    check_sse_conditions, OracleGame,
};
use liability_core::hierarchy::{k_sweep, optimize_k_frank_wolfe};
use liability_core::model::{Encounter, EquilibriumReport};
use liability_core::scenarios::{
    default_p_grid, detect_moral_hazard, endogenous_fixed_points, exclusive_lane_sweep,
    heterogeneous_mc, penetration_sweep_into, pure_av_baseline, solve_market, step_grid, KPolicy,
    LawmakerSummary, PureAvBaseline, SweepRecord,
};
use liability_core::Error as CoreError;

use crate::config::{Lanes, RatioChoice, RunConfig};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Sensitivity,
    Lawmaker,
    Endogenous,
    Montecarlo,
    Check,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Sensitivity => "sensitivity",
            Command::Lawmaker => "lawmaker",
            Command::Endogenous => "endogenous",
            Command::Montecarlo => "montecarlo",
            Command::Check => "check",
            Command::Oracle => "oracle",
        }
    }

    /// p grid used when the configuration leaves it unset.
    pub fn default_p_grid(self) -> Vec<f64> {
        match self {
            Command::Montecarlo | Command::Check => {
                step_grid(0.1, 0.9, 0.1).expect("static grid")
            }
            _ => default_p_grid(),
        }
    }
}

/// Tables produced by a command, the human-readable summary for stdout and
/// the error that cut the run short, if any.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: Vec<String>,
    pub error: Option<CoreError>,
}

impl Outcome {
    fn failed(mut self, e: CoreError) -> Self {
        let msg = e.to_string();
        match self.tables.last_mut() {
            Some(t) => t.fail(&msg),
            None => {
                let mut t = Table::new("failure", &["status", "message"]);
                t.fail(&msg);
                self.tables.push(t);
            }
        }
        self.error = Some(e);
        self
    }
}

fn policy(k: RatioChoice, k0: f64) -> KPolicy<f64> {
    match k {
        RatioChoice::Fixed(k) => KPolicy::Fixed(k),
        RatioChoice::Strategic => KPolicy::Strategic { k0 },
    }
}

const REPORT_COLUMNS: &[&str] = &[
    "p",
    "k",
    "k_policy",
    "c_a",
    "c_h_ah",
    "c_h_hh_1",
    "c_h_hh_2",
    "tl",
    "tc",
    "sc",
    "tr",
    "r_hh",
    "r_ah",
    "r_aa",
    "p_hh",
    "p_ah",
    "p_aa",
    "l_hh",
    "l_ah",
    "l_aa",
    "moral_hazard",
    "moral_hazard_margin",
    "boundary",
    "severity_clamped",
    "fw_iterations",
    "fw_converged",
];

const BASELINE_COLUMNS: &[&str] = &["pure_av_c_a", "pure_av_sc", "pure_av_tr"];

fn report_header(baseline: bool) -> Vec<&'static str> {
    let mut h = REPORT_COLUMNS.to_vec();
    if baseline {
        h.extend_from_slice(BASELINE_COLUMNS);
    }
    h
}

fn report_cells(
    r: &EquilibriumReport<f64>,
    k_policy: &str,
    tolerance: f64,
    lawmaker: Option<&LawmakerSummary<f64>>,
    baseline: Option<&PureAvBaseline<f64>>,
) -> Vec<Cell> {
    let mh = detect_moral_hazard(r, tolerance);
    let d = &r.diagnostics;
    let sc = |e| r.scenario(e);
    let mut row: Vec<Cell> = vec![
        r.p.into(),
        r.profile.k.into(),
        k_policy.into(),
        r.profile.c_a.into(),
        r.profile.c_h_ah.into(),
        r.profile.c_h1_hh.into(),
        r.profile.c_h2_hh.into(),
        r.total_loss.into(),
        r.total_cost.into(),
        r.social_cost.into(),
        r.total_rate.into(),
        sc(Encounter::HvHv).crash_rate.into(),
        sc(Encounter::AvHv).crash_rate.into(),
        sc(Encounter::AvAv).crash_rate.into(),
        sc(Encounter::HvHv).crash_probability.into(),
        sc(Encounter::AvHv).crash_probability.into(),
        sc(Encounter::AvAv).crash_probability.into(),
        sc(Encounter::HvHv).loss.into(),
        sc(Encounter::AvHv).loss.into(),
        sc(Encounter::AvAv).loss.into(),
        mh.flag.into(),
        mh.margin.into(),
        (d.boundary.hv_hh || d.boundary.hv_ah || d.boundary.av).into(),
        d.severity_clamped.into(),
    ];
    match lawmaker {
        Some(l) => {
            row.push(l.iterations.into());
            row.push(l.converged.into());
        }
        None => {
            row.push(Cell::Empty);
            row.push(Cell::Empty);
        }
    }
    if let Some(b) = baseline {
        row.push(b.c_a.into());
        row.push(b.social_cost.into());
        row.push(b.total_rate.into());
    }
    row
}

fn record_cells(rec: &SweepRecord<f64>, k_policy: &str, tolerance: f64, baseline: bool) -> Vec<Cell> {
    report_cells(
        &rec.report,
        k_policy,
        tolerance,
        rec.lawmaker.as_ref(),
        baseline.then_some(&rec.pure_av),
    )
}

/// Runs `cmd`; `progress` receives diagnostic messages.
pub fn run_command(cmd: Command, cfg: &RunConfig, progress: &mut dyn FnMut(&str)) -> Outcome {
    let mut out = Outcome::default();
    let result = match cmd {
        Command::Solve => solve(cfg, &mut out),
        Command::Sweep => sweep(cfg, &mut out, progress),
        Command::Sensitivity => sensitivity(cfg, &mut out, progress),
        Command::Lawmaker => lawmaker(cfg, &mut out, progress),
        Command::Endogenous => endogenous(cfg, &mut out, progress),
        Command::Montecarlo => montecarlo(cfg, &mut out, progress),
        Command::Check => check(cfg, &mut out, progress),
        Command::Oracle => oracle(cfg, &mut out, progress),
    };
    match result {
        Ok(()) => out,
        Err(e) => out.failed(e),
    }
}

type Res = Result<(), CoreError>;

fn solve(cfg: &RunConfig, out: &mut Outcome) -> Res {
    let sc = &cfg.scenario;
    out.tables.push(Table::new("equilibrium", &report_header(sc.pure_av_baseline)));
    let hh = nash_hh(&cfg.model, &cfg.solver)?;
    let (report, lawmaker) = solve_market(&hh, sc.p, policy(sc.k, sc.k0), &cfg.model, &cfg.solver)?;
    let baseline = if sc.pure_av_baseline {
        Some(pure_av_baseline(&cfg.model, &cfg.solver)?)
    } else {
        None
    };
    let row = report_cells(&report, sc.k.label(), cfg.solver.care_tolerance, lawmaker.as_ref(), baseline.as_ref());
    out.tables[0].push(row);
    out.summary.push(format!(
        "p = {} k = {}: c_A = {:.6} c_H^AH = {:.6} c_H^HH = {:.6} SC = {:.6} TR = {:.6}",
        report.p, report.profile.k, report.profile.c_a, report.profile.c_h_ah, report.profile.c_h1_hh,
        report.social_cost, report.total_rate
    ));
    Ok(())
}

fn p_grid(cfg: &RunConfig, cmd: Command) -> Vec<f64> {
    cfg.scenario.p_grid.clone().unwrap_or_else(|| cmd.default_p_grid())
}

fn sweep(cfg: &RunConfig, out: &mut Outcome, progress: &mut dyn FnMut(&str)) -> Res {
    let sc = &cfg.scenario;
    let grid = p_grid(cfg, Command::Sweep);
    let baseline = sc.pure_av_baseline;
    let mut table = Table::new("sweep", &report_header(baseline));
    progress(&format!("sweep over {} penetration rates", grid.len()));
    let result = match sc.lanes {
        Lanes::Mixed => {
            let mut records = Vec::new();
            let r = penetration_sweep_into(&grid, policy(sc.k, sc.k0), &cfg.model, &cfg.solver, &mut records);
            for rec in &records {
                table.push(record_cells(rec, sc.k.label(), cfg.solver.care_tolerance, baseline));
            }
            r
        }
        Lanes::Exclusive => exclusive_lane_sweep(&grid, &cfg.model, &cfg.solver).map(|records| {
            for rec in &records {
                table.push(record_cells(rec, "exclusive", cfg.solver.care_tolerance, baseline));
            }
        }),
    };
    out.summary.push(format!("{} rows", table.rows.len()));
    out.tables.push(table);
    result
}

fn sensitivity(cfg: &RunConfig, out: &mut Outcome, progress: &mut dyn FnMut(&str)) -> Res {
    let sc = &cfg.scenario;
    let grid = p_grid(cfg, Command::Sensitivity);
    let mut header = vec!["parameter", "value"];
    header.extend(report_header(sc.pure_av_baseline));
    out.tables.push(Table::new("sensitivity", &header));
    for &v in &sc.values {
        progress(&format!("{} = {v}", sc.parameter.name()));
        let params = sc.parameter.apply(&cfg.model, v);
        let mut records = Vec::new();
        let r = penetration_sweep_into(&grid, policy(sc.k, sc.k0), &params, &cfg.solver, &mut records);
        for rec in &records {
            let mut row: Vec<Cell> = vec![sc.parameter.name().into(), v.into()];
            row.extend(record_cells(rec, sc.k.label(), cfg.solver.care_tolerance, sc.pure_av_baseline));
            out.tables[0].push(row);
        }
        r?;
    }
    out.summary.push(format!("{} rows", out.tables[0].rows.len()));
    Ok(())
}

fn lawmaker(cfg: &RunConfig, out: &mut Outcome, progress: &mut dyn FnMut(&str)) -> Res {
    let sc = &cfg.scenario;
    progress(&format!("k sweep over {} ratios at p = {}", sc.k_grid.len(), sc.p));
    let sweep = k_sweep(sc.p, &cfg.model, &cfg.solver, &sc.k_grid)?;
    let mut ks = Table::new("k_sweep", &["k", "sc", "tl", "tc", "tr", "c_a", "c_h_ah"]);
    for r in &sweep.reports {
        ks.push(vec![
            r.profile.k.into(),
            r.social_cost.into(),
            r.total_loss.into(),
            r.total_cost.into(),
            r.total_rate.into(),
            r.profile.c_a.into(),
            r.profile.c_h_ah.into(),
        ]);
    }
    out.tables.push(ks);
    progress("descent on k");
    let trace = optimize_k_frank_wolfe(sc.p, &cfg.model, &cfg.solver, sc.k0)?;
    let mut tr = Table::new("lawmaker_trace", &["iteration", "k", "sc", "gradient"]);
    for s in &trace.steps {
        tr.push(vec![s.iteration.into(), s.k.into(), s.social_cost.into(), s.gradient.into()]);
    }
    out.tables.push(tr);
    let best = &sweep.reports[sweep.argmin];
    let mut summary = Table::new(
        "lawmaker",
        &["p", "k0", "k_star", "sc_star", "iterations", "converged", "boundary", "sweep_k_star", "sweep_sc"],
    );
    summary.push(vec![
        sc.p.into(),
        sc.k0.into(),
        trace.k_star.into(),
        trace.social_cost.into(),
        trace.iterations().into(),
        trace.converged.into(),
        trace.boundary.into(),
        best.profile.k.into(),
        best.social_cost.into(),
    ]);
    out.tables.push(summary);
    out.summary.push(format!(
        "descent: k* = {:.6} after {} iterations (converged {}); sweep argmin k = {}",
        trace.k_star,
        trace.iterations(),
        trace.converged,
        best.profile.k
    ));
    Ok(())
}

fn endogenous(cfg: &RunConfig, out: &mut Outcome, progress: &mut dyn FnMut(&str)) -> Res {
    let sc = &cfg.scenario;
    out.tables.push(Table::new(
        "endogenous",
        &[
            "eta", "k_policy", "k", "root", "p_star", "residual", "bracket_lo", "bracket_hi", "slope", "stable",
            "l_av", "c_a", "c_h_ah", "sc", "tr",
        ],
    ));
    out.tables.push(Table::new("endogenous_scan", &["eta", "k_policy", "k_setting", "p", "g"]));
    let mut ratios = vec![sc.k];
    ratios.extend(sc.k_compare.iter().copied());
    for &eta in &sc.eta {
        for &k in &ratios {
            let setting = match k {
                RatioChoice::Fixed(k) => k,
                RatioChoice::Strategic => sc.k0,
            };
            progress(&format!("eta = {eta}, k = {}", match k {
                RatioChoice::Fixed(k) => k.to_string(),
                RatioChoice::Strategic => "strategic".into(),
            }));
            let res = endogenous_fixed_points(eta, policy(k, sc.k0), &cfg.model, &cfg.solver, sc.scan_resolution)?;
            for (p, g) in &res.scan {
                out.tables[1].push(vec![eta.into(), k.label().into(), setting.into(), (*p).into(), (*g).into()]);
            }
            for (i, root) in res.roots.iter().enumerate() {
                let r = &root.report;
                out.tables[0].push(vec![
                    eta.into(),
                    k.label().into(),
                    r.profile.k.into(),
                    i.into(),
                    root.p.into(),
                    root.residual.into(),
                    root.bracket.0.into(),
                    root.bracket.1.into(),
                    root.slope.into(),
                    root.stable.into(),
                    r.av_related_loss().into(),
                    r.profile.c_a.into(),
                    r.profile.c_h_ah.into(),
                    r.social_cost.into(),
                    r.total_rate.into(),
                ]);
                out.summary.push(format!(
                    "eta = {eta} k = {} ({}): p* = {:.4} ({})",
                    r.profile.k,
                    k.label(),
                    root.p,
                    if root.stable { "stable" } else { "unstable" }
                ));
            }
        }
    }
    Ok(())
}

fn montecarlo(cfg: &RunConfig, out: &mut Outcome, progress: &mut dyn FnMut(&str)) -> Res {
    let sc = &cfg.scenario;
    let RatioChoice::Fixed(k) = sc.k else {
        return Err(CoreError::Config("montecarlo needs a fixed scenario.k".into()));
    };
    let grid = p_grid(cfg, Command::Montecarlo);
    let h = liability_core::scenarios::HeterogeneityConfig { k, ..sc.heterogeneity };
    progress(&format!("{} sampled drivers over {} penetration rates", h.samples, grid.len()));
    let res = heterogeneous_mc(&h, &grid, &cfg.model, &cfg.solver)?;
    let mut t = Table::new(
        "montecarlo",
        &[
            "p", "c_a", "c_a_homogeneous", "relative_deviation", "c_h_mean", "c_h_std", "c_h_homogeneous",
            "share_loss_mean", "share_loss_se",
        ],
    );
    for pt in &res.points {
        t.push(vec![
            pt.p.into(),
            pt.c_a.into(),
            pt.c_a_homogeneous.into(),
            pt.relative_deviation().into(),
            pt.c_h_mean.into(),
            pt.c_h_std.into(),
            pt.c_h_homogeneous.into(),
            pt.share_loss_mean.into(),
            pt.share_loss_se.into(),
        ]);
    }
    out.tables.push(t);
    let mut hist = Table::new("montecarlo_weights", &["bin_lower", "bin_upper", "count"]);
    for b in &res.histogram {
        hist.push(vec![b.lower.into(), b.upper.into(), b.count.into()]);
    }
    out.tables.push(hist);
    let worst = res.points.iter().map(|p| p.relative_deviation()).fold(0.0, f64::max);
    out.summary.push(format!("largest relative deviation of c_A: {worst:.3e}"));
    Ok(())
}

fn check(cfg: &RunConfig, out: &mut Outcome, progress: &mut dyn FnMut(&str)) -> Res {
    let sc = &cfg.scenario;
    let grid = p_grid(cfg, Command::Check);
    out.tables.push(Table::new(
        "sse",
        &["p", "k", "condition", "name", "passed", "min_value", "samples", "failures"],
    ));
    let mut overall: [(bool, f64, usize, &'static str); 4] = [(true, f64::INFINITY, 0, ""); 4];
    for &p in &grid {
        let k = match sc.k {
            RatioChoice::Fixed(k) => k,
            RatioChoice::Strategic => optimize_k_frank_wolfe(p, &cfg.model, &cfg.solver, sc.k0)?.k_star,
        };
        progress(&format!("conditions at p = {p}, k = {k}"));
        let rep = check_sse_conditions(k, p, &cfg.model, &cfg.solver)?;
        for (i, c) in rep.conditions.iter().enumerate() {
            out.tables[0].push(vec![
                p.into(),
                k.into(),
                (i + 1).into(),
                c.name.into(),
                c.passed.into(),
                c.min_value.into(),
                c.samples.into(),
                c.failures.len().into(),
            ]);
            let o = &mut overall[i];
            o.0 &= c.passed;
            o.1 = o.1.min(c.min_value);
            o.2 += c.samples;
            o.3 = c.name;
        }
    }
    for (i, (passed, min, n, name)) in overall.iter().enumerate() {
        out.summary.push(format!(
            "condition {}: {} (min {:.4e} over {} samples; {})",
            i + 1,
            if *passed { "PASS" } else { "FAIL" },
            min,
            n,
            name
        ));
    }
    // a failed condition is a result, not a solver failure
    Ok(())
}

fn oracle(cfg: &RunConfig, out: &mut Outcome, progress: &mut dyn FnMut(&str)) -> Res {
    let sc = &cfg.scenario;
    let (m, s) = (&cfg.model, &cfg.solver);
    let RatioChoice::Fixed(k) = sc.k else {
        return Err(CoreError::Config("oracle needs a fixed scenario.k".into()));
    };
    let res = sc.oracle_resolution;
    out.tables.push(Table::new(
        "oracle",
        &[
            "game", "p", "k", "solver_c_a", "oracle_c_a", "solver_c_h", "oracle_c_h", "cell_a", "cell_h",
            "within_one_cell",
        ],
    ));
    let nan = f64::NAN;
    let mut rows = Vec::new();

    progress("HV-HV game");
    let hh = nash_hh(m, s)?;
    let o = grid_oracle_equilibrium(OracleGame::HvHv, m, res)?;
    rows.push(OracleRow::new("hv_hv", nan, nan, (nan, nan), (hh.c1, o.c_h.unwrap_or(nan)), o.cell));

    progress("AV-HV game");
    let st = stackelberg_ah(k, sc.p, m, s)?;
    let o = grid_oracle_equilibrium(OracleGame::AvHv { k, p: sc.p }, m, res)?;
    rows.push(OracleRow::new(
        "av_hv",
        sc.p,
        k,
        (st.c_a, o.c_a.unwrap_or(nan)),
        (st.c_h, o.c_h.unwrap_or(nan)),
        o.cell,
    ));

    progress("pure AV market");
    let av = pure_av_optimum(m, s)?;
    let o = grid_oracle_equilibrium(OracleGame::PureAv, m, res)?;
    rows.push(OracleRow::new("pure_av", 1.0, nan, (av.x, o.c_a.unwrap_or(nan)), (nan, nan), o.cell));

    progress("exclusive lanes");
    let ex = exclusive_lanes_equilibrium(sc.p, m, s)?;
    let o = grid_oracle_equilibrium(OracleGame::ExclusiveLanes { p: sc.p }, m, res)?;
    rows.push(OracleRow::new("exclusive_lanes", sc.p, nan, (ex.av.x, o.c_a.unwrap_or(nan)), (nan, nan), o.cell));

    for r in rows {
        let ok = r.agrees();
        // blank where the game has no such quantity
        let v = |x: f64| if x.is_nan() { Cell::Empty } else { x.into() };
        out.tables[0].push(vec![
            r.game.into(),
            v(r.p),
            v(r.k),
            v(r.c_a.0),
            v(r.c_a.1),
            v(r.c_h.0),
            v(r.c_h.1),
            r.cell.0.into(),
            r.cell.1.into(),
            ok.into(),
        ]);
        out.summary.push(format!("{}: {}", r.game, if ok { "within one cell" } else { "MISMATCH" }));
    }
    Ok(())
}

/// Solver and oracle care of one game; NaN marks an axis the game lacks.
struct OracleRow {
    game: &'static str,
    p: f64,
    k: f64,
    c_a: (f64, f64),
    c_h: (f64, f64),
    cell: (f64, f64),
}

impl OracleRow {
    fn new(game: &'static str, p: f64, k: f64, c_a: (f64, f64), c_h: (f64, f64), cell: (f64, f64)) -> Self {
        Self { game, p, k, c_a, c_h, cell }
    }

    fn agrees(&self) -> bool {
        let within = |(a, b): (f64, f64), cell: f64| (a.is_nan() && b.is_nan()) || (a - b).abs() <= cell;
        within(self.c_a, self.cell.0) && within(self.c_h, self.cell.1)
    }
}
