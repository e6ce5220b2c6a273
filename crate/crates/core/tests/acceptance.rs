//! Acceptance suite: one PASS/FAIL line per criterion, with the measured numbers.
//! Run with `cargo test -p contraction-core --test acceptance`.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use contraction_core::config::ExperimentConfig;
use contraction_core::experiment::{ContractionRun, Experiment};
use contraction_core::fv::{certify_source, FieldSnapshot, Grid1D, SourceOperator, SourceSpec};
use contraction_core::shift::{advance_frozen, default_mollification, FrozenVelocity};
use contraction_core::shock::{
    check_liu_strength, check_admissibility, dissipation, fit_diperna_bounds, hugoniot_locus, r_a_geometry, scan_containment, trace_locus,
    uniform_nodes, verify_diperna, ContinuationOptions, Family,
};
use contraction_core::system::check_compatibility;
use contraction_core::{Burgers, Result, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SYSTEMS: [&str; 3] = ["burgers", "isentropic_euler", "full_euler"];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

struct Suite {
    failed: Vec<&'static str>,
}

impl Suite {
    fn run(&mut self, name: &'static str, budget: Duration, f: impl FnOnce() -> Result<Outcome>) {
        let t0 = Instant::now();
        let res = f();
        let dt = t0.elapsed();
        let (pass, detail) = match res {
            Ok(o) => (o.pass && dt <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!("{} {name}: {detail} [{:.2}s of {}s]", if pass { "PASS" } else { "FAIL" }, dt.as_secs_f64(), budget.as_secs());
        if !pass {
            self.failed.push(name);
        }
    }
}

fn experiment(text: &str) -> Result<Experiment> {
    Experiment::new(ExperimentConfig::from_toml(text)?)
}

fn system_block(name: &str) -> String {
    format!("seed = 3\n[system]\nname = \"{name}\"\n")
}

/// Perturbed shock, `eps = 0.01`, on the default 400-cell grid.
fn shock_run(system: &str, reference: &str) -> String {
    let radius = if system == "burgers" { 0.5 } else { 1.0 };
    format!(
        "{}[perturbation]\namplitude = 0.01\nwidth = 0.1\nseed = 3\n[cone]\nradius = {radius}\n[reference]\n{reference}\n",
        system_block(system)
    )
}

/// The run at 400 cells and its 2x refinement, sharing one fit.
fn pair(text: &str) -> Result<(Experiment, ContractionRun, Experiment, ContractionRun)> {
    let coarse = experiment(text)?;
    let w = coarse.weights()?;
    let fine = coarse.refined(2)?;
    let rc = coarse.contraction_with(w.clone())?;
    let rf = fine.contraction_with(w)?;
    Ok((coarse, rc, fine, rf))
}

fn compatibility() -> Result<Outcome> {
    let mut d = String::new();
    let mut pass = true;
    for name in SYSTEMS {
        let exp = experiment(&system_block(name))?;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let states: Vec<State> = (0..1000).map(|_| exp.region.sample(exp.sys(), &mut rng)).collect();
        let rep = check_compatibility(exp.sys(), &states, 1e-6)?;
        pass &= rep.pass;
        let _ = write!(d, "{name} {:.1e}; ", rep.max_residual);
    }
    outcome(pass, format!("max residual over 1000 states: {d}"))
}

fn hugoniot() -> Result<Outcome> {
    let exp = experiment(&system_block("burgers"))?;
    let nodes = uniform_nodes(2.0, 200);
    let base = State::scalar(1.0);
    let pts = trace_locus(exp.sys(), &base, Family::First, &nodes, ContinuationOptions::with_step(1e-2))?;
    let burgers = pts.iter().map(|p| (p.speed - (1.0 - p.s / 2.0)).abs().max((p.locus[0] - (1.0 - p.s)).abs())).fold(0.0, f64::max);
    let mut rh = 0.0f64;
    for name in ["isentropic_euler", "full_euler"] {
        let exp = experiment(&system_block(name))?;
        for base in exp.sample_bases(5) {
            let pts = trace_locus(exp.sys(), &base, Family::First, &uniform_nodes(1.0, 100), ContinuationOptions::with_step(1e-2))?;
            rh = pts.iter().map(|p| p.rh_residual(exp.sys())).fold(rh, f64::max);
        }
    }
    outcome(burgers <= 1e-8 && rh <= 1e-8, format!("Burgers closed-form error {burgers:.1e}, Euler max RH residual {rh:.1e}"))
}

fn hypotheses() -> Result<Outcome> {
    let mut d = String::new();
    let mut pass = true;
    for name in ["isentropic_euler", "full_euler"] {
        let exp = experiment(&system_block(name))?;
        let bases = exp.sample_bases(20);
        let liu = check_liu_strength(exp.sys(), &bases, 1.0, 0.1, 50)?;
        let sweep = check_admissibility(exp.sys(), &bases, 10, 1.0)?;
        pass &= liu.m < 0.0 && liu.p > 0.0 && sweep.pass();
        let _ = write!(d, "{name} M = {:.3e}, P = {:.3e}, {} violations; ", liu.m, liu.p, sweep.violations.len());
    }
    outcome(pass, d)
}

fn dissipation_identity() -> Result<Outcome> {
    let (direct, integral) = dissipation(&Burgers, &State::scalar(1.0), 1.0, 0.5, 1e-2)?;
    let closed = (direct + 1.0 / 24.0).abs().max((integral + 1.0 / 24.0).abs());
    let mut worst = 0.0f64;
    for name in SYSTEMS {
        let exp = experiment(&system_block(name))?;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for base in exp.sample_bases(100) {
            let s: f64 = rng.gen_range(0.01..=1.0);
            let s0: f64 = rng.gen_range(0.0..=1.0);
            let (direct, integral) = dissipation(exp.sys(), &base, s, s0, 1e-2)?;
            worst = worst.max((direct - integral).abs() / direct.abs().max(1.0));
        }
    }
    outcome(closed <= 1e-10 && worst <= 1e-6, format!("(1, 1, 0.5) off -1/24 by {closed:.1e}; worst relative gap {worst:.1e} over 300 triples"))
}

fn dissipation_bounds_fit() -> Result<Outcome> {
    let mut d = String::new();
    let mut pass = true;
    for name in SYSTEMS {
        let exp = experiment(&system_block(name))?;
        let bases = exp.sample_bases(5);
        let fit = fit_diperna_bounds(exp.sys(), &bases, 1.0, 0.1, 50)?;
        let again = verify_diperna(exp.sys(), &bases, &fit, 100)?;
        pass &= fit.k > 0.0 && fit.delta0 > 0.0 && again;
        let _ = write!(d, "{name} k = {:.3e}, delta0 = {:.3e}, refit {}; ", fit.k, fit.delta0, if again { "ok" } else { "fails" });
    }
    outcome(pass, d)
}

fn geometry() -> Result<Outcome> {
    let (mut escapes, mut inside, mut triples) = (0usize, 0usize, 0usize);
    for name in SYSTEMS {
        let exp = experiment(&system_block(name))?;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for u_l in exp.sample_bases(20) {
            let s: f64 = rng.gen_range(0.1..0.5);
            let theta: f64 = rng.gen_range(0.2..0.6);
            let u_r = hugoniot_locus(exp.sys(), &u_l, Family::First, s, 1e-2)?.locus;
            let g = r_a_geometry(exp.sys(), &u_l, &u_r, theta, rng.gen())?;
            let a = rng.gen_range(0.1..0.99) * g.alpha;
            let scan = scan_containment(exp.sys(), &u_l, &u_r, a, theta, 1.5 * theta, 40_000);
            escapes += scan.escapes;
            inside += scan.inside;
            triples += 1;
        }
    }
    outcome(escapes == 0, format!("{escapes} escapes, {inside} grid points of R_a over {triples} triples"))
}

fn filippov(runs: &[(&str, &ContractionRun)]) -> Result<Outcome> {
    let mut d = String::new();
    let mut pass = true;
    for (label, run) in runs {
        let lip = run.traj.lipschitz();
        let hull = run.traj.hull_fraction();
        pass &= lip <= run.traj.v_sup && hull >= 0.99;
        let _ = write!(d, "{label} Lip {lip:.3e} <= {:.3e}, hull {hull:.4}; ", run.traj.v_sup);
    }
    // sharp standing shock, shift started half a unit away: it must end in the shock's cell
    for n in [200, 400] {
        let g = Grid1D::new(-1.0, 1.0, n)?;
        let f = FieldSnapshot::from_fn(&Burgers, g, |x| State::scalar(if x < 0.0 { 1.0 } else { -1.0 }))?;
        let vel = FrozenVelocity::new(&Burgers, &f, State::scalar(1.0), State::scalar(-1.0), 0.01, 1e4, default_mollification(g.dx));
        let (mut h, mut in_hull) = (-0.5, true);
        for k in 0..200 {
            let st = advance_frozen(&vel, h, 0.01, k as f64 * 0.01)?;
            in_hull &= st.hdot >= st.hull.0 - 1e-9 && st.hdot <= st.hull.1 + 1e-9;
            h = st.h;
        }
        pass &= h.abs() <= g.dx && in_hull;
        let _ = write!(d, "sharp standing shock, {n} cells: |h(2)| = {:.2} dx; ", h.abs() / g.dx);
    }
    // simulated standing shock: h settles inside the smeared layer and stays put
    for n in [400, 800] {
        let exp = experiment(&format!("[shock]\nu_l = [1.0]\ns_r = 2.0\n[grid]\nn_cells = {n}\n"))?;
        let w = exp.weights()?;
        let field = exp.simulate()?;
        let reference = exp.reference(&w)?;
        let traj = exp.shift(&w, &field, &reference)?;
        let dx = exp.grid.dx;
        let late: Vec<f64> = traj.times.iter().zip(&traj.h).filter(|(t, _)| **t >= 0.1).map(|(_, h)| *h).collect();
        let spread = late.iter().fold(f64::NEG_INFINITY, |m, h| m.max(*h)) - late.iter().fold(f64::INFINITY, |m, h| m.min(*h));
        let offset = traj.h.iter().fold(0.0f64, |m, h| m.max(h.abs()));
        pass &= spread <= dx && offset <= 2.0 * dx;
        let _ = write!(d, "simulated standing shock, {n} cells: spread {:.2} dx, offset {:.2} dx; ", spread / dx, offset / dx);
    }
    outcome(pass, d)
}

fn pointwise_dissipation(runs: &[(&str, &ContractionRun, &ContractionRun)]) -> Result<Outcome> {
    let mut d = String::new();
    let mut pass = true;
    for (label, c, f) in runs {
        let (pc, pf) = (c.dissipation.pass_fraction, f.dissipation.pass_fraction);
        pass &= pc >= 0.99 && pf >= pc - 1e-12;
        let _ = write!(d, "{label} {pc:.4} -> {pf:.4}; ");
    }
    outcome(pass, format!("pass fraction 400 -> 800 cells: {d}"))
}

fn uniqueness() -> Result<Outcome> {
    let exp = experiment("[reference]\nkind = \"simulated\"\nrefine = 1\n")?;
    let run = exp.contraction()?;
    let g = &run.gronwall;
    let bound = 1e-8 * exp.domain_scale();
    outcome(g.uniqueness && g.max_e <= bound, format!("max E = {:.2e} <= {bound:.1e}", g.max_e))
}

fn envelope(runs: &[(&str, &ContractionRun, &ContractionRun)]) -> Result<Outcome> {
    let mut d = String::new();
    let mut pass = true;
    for (label, c, f) in runs {
        let (gc, gf) = (&c.gronwall, &f.gronwall);
        let stable = (gc.mu1 - gf.mu1).abs() <= 0.5 * gc.mu1.max(gf.mu1);
        pass &= gc.ok() && gf.ok() && !gc.uniqueness && gc.mu1 <= 1e3 && gf.mu1 <= 1e3 && stable;
        let _ = write!(d, "{label} mu1 {:.3e} -> {:.3e}, mu2 {:.3e} -> {:.3e}; ", gc.mu1, gf.mu1, gc.mu2, gf.mu2);
    }
    outcome(pass, d)
}

fn monotone(runs: &[(&str, &Experiment, &ContractionRun)]) -> Result<Outcome> {
    let mut d = String::new();
    let mut pass = true;
    for (label, exp, run) in runs {
        let rise = run.max_rise();
        let tol = exp.monotone_tolerance();
        pass &= rise <= tol;
        let _ = write!(d, "{label} rise {rise:.2e} <= {tol:.2e}; ");
    }
    outcome(pass, d)
}

fn sources() -> Result<Outcome> {
    let specs = [SourceSpec::Zero, SourceSpec::Linear { c: -0.3 }, SourceSpec::Convolution { scale: 0.5, width: 0.05 }];
    let mut d = String::new();
    let mut pass = true;
    for (i, spec) in specs.iter().enumerate() {
        let op = SourceOperator::new(spec, 0.01)?;
        for dim in 1..=3 {
            let cert = certify_source(&op, 128, dim, 0.01, 100, 17 + i as u64);
            pass &= cert.pass;
            if dim == 3 {
                let _ = write!(
                    d,
                    "{spec:?}: shift err {:.1e}, L2 ratio {:.3} / Linf ratio {:.3} vs L {:.3}; ",
                    cert.translation_error, cert.l2_ratio, cert.linf_ratio, cert.lipschitz
                );
            }
        }
    }
    outcome(pass, d)
}

/// The contraction CSV and headline numbers, formatted the way the CLI writes them.
fn fingerprint(run: &ContractionRun) -> String {
    let mut s = String::new();
    for k in 0..run.series.times.len() {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            run.series.times[k], run.series.e[k], run.gronwall.envelope[k], run.traj.x_shift[k], run.traj.xdot[k], run.traj.h[k]
        );
    }
    let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", run.gronwall.mu1, run.gronwall.mu2, run.weights.c, run.audit.worst_cumulative);
    s
}

fn determinism(text: &str) -> Result<Outcome> {
    let a = fingerprint(&experiment(text)?.contraction()?);
    let b = fingerprint(&experiment(text)?.contraction()?);
    outcome(a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

fn main() {
    let mut suite = Suite { failed: vec![] };
    let secs = Duration::from_secs;
    suite.run("compatibility", secs(5), compatibility);
    suite.run("hugoniot", secs(10), hugoniot);
    suite.run("hypotheses", secs(60), hypotheses);
    suite.run("dissipation_identity", secs(60), dissipation_identity);
    suite.run("dissipation_bounds_fit", secs(60), dissipation_bounds_fit);
    suite.run("geometry", secs(60), geometry);
    suite.run("source_certification", secs(10), sources);

    // shock-perturbation runs, 400 and 800 cells
    let t0 = Instant::now();
    let mut runs = vec![];
    for (label, text) in [
        ("burgers/exact", shock_run("burgers", "kind = \"exact\"")),
        ("isentropic/exact", shock_run("isentropic_euler", "kind = \"exact\"")),
        ("burgers/simulated", shock_run("burgers", "kind = \"simulated\"\nrefine = 1")),
        ("isentropic/simulated", shock_run("isentropic_euler", "kind = \"simulated\"\nrefine = 1")),
    ] {
        match pair(&text) {
            Ok(p) => runs.push((label, text, p)),
            Err(e) => {
                println!("FAIL runs: {label}: {e}");
                suite.failed.push("runs");
            }
        }
    }
    let per_run = t0.elapsed() / (2 * runs.len().max(1)) as u32;
    let by = |kind: &'static str| runs.iter().filter(move |r| r.0.ends_with(kind));

    let shift_runs: Vec<(&str, &ContractionRun)> = runs.iter().flat_map(|(l, _, p)| [(*l, &p.1), (*l, &p.3)]).collect();
    suite.run("filippov", secs(30), || filippov(&shift_runs));
    let exact: Vec<_> = by("exact").map(|(l, _, p)| (*l, &p.1, &p.3)).collect();
    suite.run("pointwise_dissipation", secs(1), || pointwise_dissipation(&exact));
    suite.run("envelope_uniqueness", secs(120), uniqueness);
    let sim: Vec<_> = by("simulated").map(|(l, _, p)| (*l, &p.1, &p.3)).collect();
    suite.run("envelope_perturbed", secs(1), || envelope(&sim));
    let mono: Vec<_> = by("exact").flat_map(|(l, _, p)| [(*l, &p.0, &p.1), (*l, &p.2, &p.3)]).collect();
    suite.run("envelope_monotone", secs(1), || monotone(&mono));
    suite.run("runtime", secs(1), || outcome(per_run <= secs(120), format!("{:.2}s per run at 400/800 cells", per_run.as_secs_f64())));
    let det = runs.first().map(|r| r.1.clone()).unwrap_or_default();
    suite.run("determinism", secs(60), || determinism(&det));

    if suite.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: {} failing: {}", suite.failed.len(), suite.failed.join(", "));
        std::process::exit(1);
    }
}
