use std::path::PathBuf;

use contraction_core::contraction::cone_violations;
use contraction_core::experiment::{ContractionRun, Experiment};
use contraction_core::fv::{entropy_residual, ReferenceKind};
use contraction_core::shift::ContractionWeights;
use contraction_core::shock::hypotheses::centered_derivative;
use contraction_core::shock::{check_liu_strength, check_admissibility, fit_diperna_bounds, trace_locus, uniform_nodes, verify_diperna, ContinuationOptions};

use crate::output::{num, write_atomic, Report, Table};
use crate::{CliError, Command, Context, Outcome};

/// Pointwise dissipation must hold on at least this fraction of steps.
const PASS_FRACTION: f64 = 0.99;
/// Largest Rankine-Hugoniot residual accepted on a traced locus.
const RH_TOL: f64 = 1e-8;
/// Relative change of the fitted `mu1` allowed between consecutive grids.
const MU_STABILITY: f64 = 0.5;

pub fn dispatch(cmd: &Command, ctx: &Context) -> Result<Outcome, CliError> {
    match cmd {
        Command::Hugoniot => hugoniot(ctx),
        Command::CheckHypotheses => check_hypotheses(ctx),
        Command::Simulate { stride } => simulate(ctx, *stride),
        Command::FitConstants => fit_constants(ctx),
        Command::Shift => shift(ctx),
        Command::VerifyContraction => verify_contraction(ctx),
        Command::AuditDissipation => audit_dissipation(ctx),
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// One experiment per refinement level, each writing to its own directory.
fn levels(ctx: &Context) -> Result<Vec<(Experiment, PathBuf)>, CliError> {
    (0..ctx.levels)
        .map(|l| {
            let exp = Experiment::new(ctx.config.refined(1 << l))?;
            let dir = if ctx.levels == 1 { ctx.out.clone() } else { ctx.out.join(format!("level{l}")) };
            Ok((exp, dir))
        })
        .collect()
}

fn finish(ctx: &Context, dir: &std::path::Path, mut report: Report) -> Result<(), CliError> {
    report.section("config");
    report.raw(&ctx.config.to_toml());
    write_atomic(dir, "report.txt", report.render())?;
    Ok(())
}

fn state_header(prefix: &str, dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("{prefix}_{i}")).collect()
}

fn hugoniot(ctx: &Context) -> Result<Outcome, CliError> {
    let exp = Experiment::new(ctx.config.clone())?;
    let sys = exp.sys();
    let h = &ctx.config.hugoniot;
    let base = exp.hugoniot_base()?;
    let nodes = uniform_nodes(h.s_max, h.n);
    let pts = trace_locus(sys, &base, h.family, &nodes, ContinuationOptions::with_step(h.step))?;
    let speeds: Vec<f64> = pts.iter().map(|p| p.speed).collect();
    let ds = h.s_max / h.n as f64;
    let dsigma = centered_derivative(&speeds, ds);
    let strength: Vec<f64> = pts.iter().map(|p| (p.locus - base).norm()).collect();
    let dstrength = centered_derivative(&strength, ds);
    let mut header = vec!["s".to_string()];
    header.extend(state_header("S", sys.dim()));
    header.extend(["sigma", "rh_residual", "dsigma_ds", "strength_derivative"].map(String::from));
    let mut t = Table::new(&header);
    let mut worst = 0.0f64;
    for (k, p) in pts.iter().enumerate() {
        let rh = p.rh_residual(sys);
        worst = worst.max(rh);
        let mut row = vec![num(p.s)];
        row.extend(p.locus.as_slice().iter().map(|&x| num(x)));
        row.extend([num(p.speed), num(rh), num(dsigma[k]), num(dstrength[k])]);
        t.row(&row);
    }
    let pass = worst <= RH_TOL;
    write_atomic(&ctx.out, "hugoniot.csv", &t.render())?;
    let mut r = Report::default();
    r.section("hugoniot");
    r.kv("system", sys.name());
    r.kv("base", base);
    r.kv("family", format!("{:?}", h.family).to_lowercase());
    r.kv("points", pts.len());
    r.kv("max_rh_residual", num(worst));
    r.check("rh_residual", pass, format!("max {worst:.3e} <= {RH_TOL:e}"));
    finish(ctx, &ctx.out, r)?;
    Ok(Outcome { pass, summary: format!("hugoniot: {} ({} points, max RH residual {worst:.2e}) -> {}", verdict(pass), pts.len(), ctx.out.display()) })
}

fn check_hypotheses(ctx: &Context) -> Result<Outcome, CliError> {
    let exp = Experiment::new(ctx.config.clone())?;
    let sys = exp.sys();
    let hy = &ctx.config.hypotheses;
    let bases = exp.sample_bases(hy.n_bases);
    let liu = check_liu_strength(sys, &bases, hy.s_max, hy.rho, hy.n_s)?;
    let sweep = check_admissibility(sys, &bases, hy.n_probe, hy.b)?;
    let fit = fit_diperna_bounds(sys, &bases, hy.s_max, hy.rho, hy.fit_grid)?;
    let refit = verify_diperna(sys, &bases, &fit, 2 * hy.fit_grid)?;

    let mut t = Table::new(&["kind", "family", "speed", "left", "right"]);
    for v in &sweep.violations {
        t.row(&[v.kind.to_string(), v.family.to_string(), num(v.speed), v.left.to_string().replace(',', ";"), v.right.to_string().replace(',', ";")]);
    }
    write_atomic(&ctx.out, "violations.csv", &t.render())?;

    let mut r = Report::default();
    r.section("hypotheses");
    r.kv("system", sys.name());
    r.kv("bases", bases.len());
    r.kv("s_max", hy.s_max);
    r.kv("rho", hy.rho);
    r.kv("liu_margin_M", num(liu.m));
    r.kv("strength_margin_P", num(liu.p));
    r.kv("start_speed_error", num(liu.start_speed_error));
    r.kv("entropic_samples", sweep.entropic_samples);
    r.kv("rejected_samples", sweep.rejected_samples);
    r.kv("truncated_branches", sweep.truncated.len());
    r.kv("k", num(fit.k));
    r.kv("delta0", num(fit.delta0));
    r.check("liu", liu.liu_ok, format!("M = {:.4e} < 0", liu.m));
    r.check("strength", liu.strength_ok, format!("P = {:.4e} > 0", liu.p));
    r.check("start_speed", liu.start_ok, format!("{:.3e}", liu.start_speed_error));
    r.check("admissibility_sweep", sweep.pass(), format!("{} violations", sweep.violations.len()));
    r.check("dissipation_bounds_refit", refit, format!("k = {:.4e}, delta0 = {:.4e} on a {}-point grid", fit.k, fit.delta0, 2 * hy.fit_grid));
    let pass = liu.pass() && sweep.pass() && refit;
    finish(ctx, &ctx.out, r)?;
    Ok(Outcome {
        pass,
        summary: format!("check-hypotheses: {} (M = {:.3e}, P = {:.3e}, {} violations) -> {}", verdict(pass), liu.m, liu.p, sweep.violations.len(), ctx.out.display()),
    })
}

fn simulate(ctx: &Context, stride: usize) -> Result<Outcome, CliError> {
    if stride == 0 {
        return Err(CliError::Usage("--stride must be at least 1".into()));
    }
    let mut lines = vec![];
    for (exp, dir) in levels(ctx)? {
        let sys = exp.sys();
        let field = exp.simulate()?;
        let scheme = exp.scheme()?;
        let res = entropy_residual(&scheme, &field);
        let mut header = vec!["t".to_string(), "x".to_string()];
        header.extend(state_header("u", sys.dim()));
        let mut t = Table::new(&header);
        for (k, snap) in field.iter().enumerate() {
            if k % stride != 0 && k + 1 != field.len() {
                continue;
            }
            for (j, u) in snap.cells.iter().enumerate() {
                let mut row = vec![num(snap.t), num(snap.grid.center(j))];
                row.extend(u.as_slice().iter().map(|&x| num(x)));
                t.row(&row);
            }
        }
        write_atomic(&dir, "simulate.csv", &t.render())?;
        let mut r = Report::default();
        r.section("simulate");
        r.kv("system", sys.name());
        r.kv("n_cells", exp.grid.n_cells);
        r.kv("steps", field.len() - 1);
        r.kv("t_end", num(field.last().map_or(0.0, |s| s.t)));
        r.kv("sup_norm", num(field.iter().map(|s| s.sup_norm()).fold(0.0, f64::max)));
        r.kv("max_entropy_production", num(res.max_positive));
        finish(ctx, &dir, r)?;
        lines.push(format!("{} cells, {} steps", exp.grid.n_cells, field.len() - 1));
    }
    Ok(Outcome { pass: true, summary: format!("simulate: done ({}) -> {}", lines.join("; "), ctx.out.display()) })
}

fn weights_report(r: &mut Report, w: &ContractionWeights) {
    r.section("constants");
    r.kv("a", num(w.a));
    r.kv("halvings", w.halvings);
    r.kv("alpha", num(w.alpha));
    r.kv("c_geom", num(w.c_geom));
    r.kv("theta", num(w.theta));
    r.kv("b", num(w.b));
    r.kv("rho", num(w.rho));
    r.kv("c1", num(w.c1));
    r.kv("c1_raw", num(w.c1_fit.c1_raw));
    r.kv("c1_samples", w.c1_fit.samples);
    r.kv("lipschitz_l_star", num(w.lipschitz_l_star));
    r.kv("gamma0", num(w.gamma0));
    r.kv("c4", num(w.c4));
    r.kv("c4_samples", w.c4_fit.samples);
    r.kv("c_star", num(w.c_star));
    r.kv("c_star_overridden", w.c_star_overridden);
    r.kv("sup_lambda", num(w.drift.sup_lambda));
    r.kv("sup_q", num(w.drift.sup_q));
    r.kv("c", num(w.c));
}

fn fit_constants(ctx: &Context) -> Result<Outcome, CliError> {
    let exp = Experiment::new(ctx.config.clone())?;
    let w = exp.weights()?;
    let mut r = Report::default();
    r.kv("system", exp.sys().name());
    r.kv("u_l", exp.shock.u_l);
    r.kv("u_r", exp.shock.u_r);
    weights_report(&mut r, &w);
    let pass = w.c > 0.0 && w.a < w.alpha;
    r.check("weights", pass, format!("a = {:.3e} < alpha = {:.3e}, c = {:.3e} > 0", w.a, w.alpha, w.c));
    finish(ctx, &ctx.out, r)?;
    Ok(Outcome {
        pass,
        summary: format!("fit-constants: {} (a = {:.3e}, C* = {:.3e}, c = {:.3e}) -> {}", verdict(pass), w.a, w.c_star, w.c, ctx.out.display()),
    })
}

fn shift(ctx: &Context) -> Result<Outcome, CliError> {
    let all = levels(ctx)?;
    let w = all[0].0.weights()?;
    let mut pass = true;
    let mut fractions = vec![];
    for (exp, dir) in &all {
        let sys = exp.sys();
        let field = exp.simulate()?;
        let reference = exp.reference(&w)?;
        let traj = exp.shift(&w, &field, &reference)?;
        let diss = contraction_core::shift::verify_dissipation(sys, &traj, &field, &reference, w.a, w.c, exp.dissipation_tolerance())?;
        let mut t = Table::new(&["t", "h", "hdot", "X", "Xdot", "indicator_state", "LHS_4_1", "bound_4_1"]);
        for k in 0..traj.times.len() {
            let (case, lhs, bound) = diss.samples.get(k).map_or(("0".to_string(), f64::NAN, f64::NAN), |s| (s.case.to_string(), s.lhs, s.bound));
            t.row(&[
                num(traj.times[k]),
                num(traj.h[k]),
                num(traj.hdot[k]),
                num(traj.x_shift[k]),
                num(traj.xdot[k]),
                case,
                num(lhs),
                num(bound),
            ]);
        }
        write_atomic(dir, "shift.csv", &t.render())?;
        let lip_ok = traj.lipschitz() <= traj.v_sup * (1.0 + 1e-12);
        let hull = traj.hull_fraction();
        let diss_ok = diss.pass_fraction >= PASS_FRACTION;
        let mut r = Report::default();
        r.kv("system", sys.name());
        r.kv("n_cells", exp.grid.n_cells);
        weights_report(&mut r, &w);
        r.section("shift");
        r.kv("mollification_n", traj.mollification_n);
        r.kv("lipschitz_h", num(traj.lipschitz()));
        r.kv("v_sup", num(traj.v_sup));
        r.kv("hull_fraction", num(hull));
        r.kv("pass_fraction", num(diss.pass_fraction));
        r.kv("worst_margin", num(diss.worst_margin));
        r.kv("tolerance", num(diss.tolerance));
        r.kv("c_fit", diss.c_fit.map_or("none".into(), num));
        r.kv("x_end", num(*traj.x_shift.last().unwrap_or(&0.0)));
        r.check("lipschitz", lip_ok, format!("{:.4e} <= {:.4e}", traj.lipschitz(), traj.v_sup));
        r.check("filippov_hull", hull >= PASS_FRACTION, format!("{hull:.4} >= {PASS_FRACTION}"));
        r.check("dissipation", diss_ok, format!("{:.4} >= {PASS_FRACTION}", diss.pass_fraction));
        if let Some(&prev) = fractions.last() {
            let ok = diss.pass_fraction >= prev - 1e-12;
            r.check("refinement", ok, format!("{:.4} after {prev:.4}", diss.pass_fraction));
            pass &= ok;
        }
        finish(ctx, dir, r)?;
        pass &= lip_ok && hull >= PASS_FRACTION && diss_ok;
        fractions.push(diss.pass_fraction);
    }
    let fr: Vec<String> = fractions.iter().map(|f| format!("{f:.4}")).collect();
    Ok(Outcome { pass, summary: format!("shift: {} (pass fraction {}) -> {}", verdict(pass), fr.join(", "), ctx.out.display()) })
}

struct Checked {
    lines: Vec<(String, bool, String)>,
}

impl Checked {
    fn add(&mut self, name: &str, ok: bool, detail: String) {
        self.lines.push((name.into(), ok, detail));
    }

    fn pass(&self) -> bool {
        self.lines.iter().all(|l| l.1)
    }
}

/// Criteria of a single contraction run.
fn contraction_checks(exp: &Experiment, run: &ContractionRun) -> Checked {
    let mut c = Checked { lines: vec![] };
    let g = &run.gronwall;
    let d = &run.dissipation;
    c.add("dissipation", d.pass_fraction >= PASS_FRACTION, format!("{:.4} >= {PASS_FRACTION}", d.pass_fraction));
    if g.uniqueness {
        c.add("uniqueness", g.ok(), format!("max E = {:.3e} <= {:.3e}", g.max_e, g.uniqueness_tol));
    } else {
        c.add("envelope", g.envelope_ok, format!("mu1 = {:.6e}, mu2 = {:.6e}", g.mu1, g.mu2));
        c.add("shift_control", g.shift_control_ok, format!("{:.4e} <= {:.4e}", g.shift_integral, g.shift_bound));
    }
    c.add("audit", run.audit.pass, format!("cumulative {:.3e} >= -{:.3e}", run.audit.worst_cumulative, run.audit.tolerance));
    let lip_x = run
        .traj
        .x_shift
        .windows(2)
        .zip(run.traj.times.windows(2))
        .map(|(x, t)| (x[1] - x[0]).abs() / (t[1] - t[0]))
        .fold(0.0, f64::max);
    let lip_s = run.traj.times.iter().map(|&t| run.reference.sdot(t).abs()).fold(0.0, f64::max);
    c.add("lipschitz_x", lip_x <= (lip_s + run.traj.v_sup) * (1.0 + 1e-9), format!("{lip_x:.4e} <= {:.4e}", lip_s + run.traj.v_sup));
    let cone = cone_violations(exp.sys(), &run.field, &run.reference, &run.traj, run.r.r);
    c.add("cone", cone == 0, format!("{cone} pairs with |q| > r eta at r = {:.4e}", run.r.r));
    let x0 = run.traj.x_shift[0].abs();
    c.add("x_starts_at_zero", x0 <= 1e-12, format!("|X(0)| = {x0:.3e}"));
    let constant_sides = exp.config.reference.kind == ReferenceKind::Exact && exp.source.is_zero();
    if constant_sides && !g.uniqueness {
        let rise = run.max_rise();
        c.add("monotone", rise <= exp.monotone_tolerance(), format!("rise {rise:.3e} <= {:.3e}", exp.monotone_tolerance()));
    }
    c
}

fn contraction_levels(ctx: &Context) -> Result<Vec<(Experiment, PathBuf, ContractionRun)>, CliError> {
    let all = levels(ctx)?;
    let w = all[0].0.weights()?;
    let mut out = vec![];
    for (exp, dir) in all {
        let run = exp.contraction_with(w.clone())?;
        out.push((exp, dir, run));
    }
    Ok(out)
}

fn run_report(exp: &Experiment, run: &ContractionRun, checked: &Checked) -> Report {
    let sys = exp.sys();
    let mut r = Report::default();
    r.kv("system", sys.name());
    r.kv("n_cells", exp.grid.n_cells);
    r.kv("dx", num(exp.grid.dx));
    r.kv("reference", format!("{:?}", exp.config.reference.kind).to_lowercase());
    weights_report(&mut r, &run.weights);
    r.section("cone");
    r.kv("radius", num(run.cone.radius));
    r.kv("t0", num(run.cone.t0));
    r.kv("r", num(run.r.r));
    r.kv("r_pairs", run.r.pairs);
    r.kv("r_fallback", run.r.fallback);
    r.kv("s0", num(run.cone.s0));
    r.section("contraction");
    let g = &run.gronwall;
    r.kv("e0_window", num(g.e0_window));
    r.kv("e_initial", num(run.series.e[0]));
    r.kv("e_final", num(*run.series.e.last().unwrap()));
    r.kv("max_e", num(g.max_e));
    r.kv("max_rise", num(run.max_rise()));
    r.kv("mu1", num(g.mu1));
    r.kv("mu2", num(g.mu2));
    r.kv("shift_integral", num(g.shift_integral));
    r.kv("shift_bound", num(g.shift_bound));
    r.kv("uniqueness_branch", g.uniqueness);
    r.kv("dissipation_pass_fraction", num(run.dissipation.pass_fraction));
    r.kv("audit_worst_step", num(run.audit.worst_step));
    r.kv("audit_worst_cumulative", num(run.audit.worst_cumulative));
    r.kv("audit_tolerance", num(run.audit.tolerance));
    r.kv("audit_excluded", run.audit.excluded);
    r.section("checks");
    for (name, ok, detail) in &checked.lines {
        r.check(name, *ok, detail);
    }
    r
}

/// Consecutive fitted `mu1` must agree within `MU_STABILITY` relative.
fn mu_stable(a: f64, b: f64) -> bool {
    (a - b).abs() <= MU_STABILITY * a.max(b)
}

fn verify_contraction(ctx: &Context) -> Result<Outcome, CliError> {
    let runs = contraction_levels(ctx)?;
    let mut pass = true;
    let mut mus = vec![];
    for (exp, dir, run) in &runs {
        let mut checked = contraction_checks(exp, run);
        if let Some(&prev) = mus.last() {
            let mu = run.gronwall.mu1;
            checked.add("mu1_refinement", mu_stable(prev, mu), format!("{mu:.4e} after {prev:.4e}"));
        }
        let g = &run.gronwall;
        let mut t = Table::new(&["t", "E", "envelope_value", "margin", "X", "Xdot", "h1", "h2", "h"]);
        for k in 0..run.series.times.len() {
            t.row(&[
                num(run.series.times[k]),
                num(run.series.e[k]),
                num(g.envelope[k]),
                num(g.margins[k]),
                num(run.traj.x_shift[k]),
                num(run.traj.xdot[k]),
                num(run.series.h1[k]),
                num(run.series.h2[k]),
                num(run.traj.h[k]),
            ]);
        }
        write_atomic(dir, "contraction.csv", &t.render())?;
        pass &= checked.pass();
        finish(ctx, dir, run_report(exp, run, &checked))?;
        mus.push(g.mu1);
    }
    let last = &runs.last().unwrap().2.gronwall;
    let mu: Vec<String> = mus.iter().map(|m| format!("{m:.3e}")).collect();
    Ok(Outcome {
        pass,
        summary: format!(
            "verify-contraction: {} (mu1 {}, mu2 {:.3e}, max E {:.3e}, E0 {:.3e}) -> {}",
            verdict(pass),
            mu.join(", "),
            last.mu2,
            last.max_e,
            last.e0_window,
            ctx.out.display()
        ),
    })
}

fn audit_dissipation(ctx: &Context) -> Result<Outcome, CliError> {
    let runs = contraction_levels(ctx)?;
    let mut pass = true;
    let mut worst = vec![];
    for (exp, dir, run) in &runs {
        let mut t = Table::new(&["t", "boundary", "dE", "interior", "margin", "cumulative"]);
        for s in &run.audit.steps {
            t.row(&[num(s.t), num(s.boundary), num(s.de), num(s.interior), num(s.margin), num(s.cumulative)]);
        }
        write_atomic(dir, "audit.csv", &t.render())?;
        let mut checked = Checked { lines: vec![] };
        checked.add("audit", run.audit.pass, format!("cumulative {:.3e} >= -{:.3e}", run.audit.worst_cumulative, run.audit.tolerance));
        pass &= run.audit.pass;
        finish(ctx, dir, run_report(exp, run, &checked))?;
        worst.push(format!("{:.3e}", run.audit.worst_cumulative));
    }
    Ok(Outcome { pass, summary: format!("audit-dissipation: {} (worst cumulative margin {}) -> {}", verdict(pass), worst.join(", "), ctx.out.display()) })
}
