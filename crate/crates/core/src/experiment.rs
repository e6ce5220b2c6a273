//! A validated experiment: system, grid, shock, perturbation, reference and constants,
//! with the stages the CLI runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::contraction::{
    compute_r, dissipation_audit, entropy_series, max_rise, verify_gronwall, AuditReport, ConeSpec, EntropySeries,
    GronwallReport, InformationSpeed,
};
use crate::error::{Error, Result};
use crate::fv::reference::SimulationSetup;
use crate::fv::initial::BumpField;
use crate::fv::{FieldSnapshot, Grid1D, ReferenceKind, ReferenceSolution, Scheme, ShockData, SourceOperator};
use crate::shift::{
    build_weights, default_mollification, integrate_filippov, verify_dissipation, ContractionWeights, DissipationReport,
    ShiftTrajectory,
};
use crate::relative::eta_rel;
use crate::shock::{hugoniot_locus, Family};
use crate::state::State;
use crate::system::{Region, System};

pub struct Experiment {
    pub config: ExperimentConfig,
    pub sys: Box<dyn System>,
    pub grid: Grid1D,
    pub shock: ShockData,
    /// Strength of the reference shock along the first-family locus of `u_l`, when known.
    pub s_r: Option<f64>,
    pub region: Region,
    pub b: f64,
    pub rho: f64,
    pub source: SourceOperator,
}

/// Everything produced by a full contraction run.
pub struct ContractionRun {
    pub weights: ContractionWeights,
    pub field: Vec<FieldSnapshot>,
    pub reference: ReferenceSolution,
    pub traj: ShiftTrajectory,
    pub dissipation: DissipationReport,
    pub r: InformationSpeed,
    pub cone: ConeSpec,
    pub series: EntropySeries,
    pub audit: AuditReport,
    pub gronwall: GronwallReport,
}

impl ContractionRun {
    /// Largest increase of `E` between any two stored times.
    pub fn max_rise(&self) -> f64 {
        max_rise(&self.series.e)
    }
}

fn primitive_state(sys: &dyn System, v: &[f64], param: &'static str) -> Result<State> {
    if v.len() != sys.dim() {
        return Err(Error::param("cli", param, format!("expected {} components, got {}", sys.dim(), v.len())));
    }
    let u = sys.from_primitive(&State::new(v));
    sys.check(&u).map_err(|e| Error::param("cli", param, e.to_string()))?;
    Ok(u)
}

fn default_left(sys: &dyn System) -> Vec<f64> {
    match sys.dim() {
        1 => vec![1.0],
        2 => vec![1.0, 0.0],
        _ => vec![1.0, 0.0, 1.0],
    }
}

impl Experiment {
    /// Validates every block before anything is computed.
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let sys = config.system.build()?;
        let sys_ref: &dyn System = sys.as_ref();
        let g = &config.grid;
        if !(g.x_min < g.x_max) || !g.x_min.is_finite() || !g.x_max.is_finite() || g.n_cells < 16 {
            return Err(Error::param("fv_solver", "grid", "need finite x_min < x_max and n_cells >= 16"));
        }
        let grid = Grid1D::new(g.x_min, g.x_max, g.n_cells)?;
        if !(config.run.cfl > 0.0 && config.run.cfl < 1.0) {
            return Err(Error::param("fv_solver", "run.cfl", "must lie in (0, 1)"));
        }
        if !(config.run.t_end > 0.0 && config.run.t_end.is_finite()) {
            return Err(Error::param("fv_solver", "run.t_end", "must be positive"));
        }
        config.perturbation.validate()?;
        config.constants.fit.validate()?;
        // TOML integers are i64; larger seeds could not be written back into reports
        for (key, seed) in [("seed", config.seed), ("perturbation.seed", config.perturbation.seed), ("constants.fit.seed", config.constants.fit.seed)] {
            if seed > i64::MAX as u64 {
                return Err(Error::param("config", key, format!("must be at most {}", i64::MAX)));
            }
        }

        let sh = &config.shock;
        if !(sh.x0 > g.x_min && sh.x0 < g.x_max) {
            return Err(Error::param("fv_solver", "shock.x0", "must lie inside the grid"));
        }
        let u_l = primitive_state(sys_ref, sh.u_l.as_deref().unwrap_or(&default_left(sys_ref)), "shock.u_l")?;
        let (u_r, s_r) = match (&sh.u_r, sh.s_r) {
            (Some(_), Some(_)) => return Err(Error::param("cli", "shock.u_r", "give either u_r or s_r, not both")),
            (Some(v), None) => (primitive_state(sys_ref, v, "shock.u_r")?, None),
            (None, s) => {
                let s = s.unwrap_or(if sys_ref.dim() == 1 { 1.0 } else { 0.5 });
                if !(s > 0.0) {
                    return Err(Error::param("shock_curves", "shock.s_r", "must be positive"));
                }
                let p = hugoniot_locus(sys_ref, &u_l, Family::First, s, config.hugoniot.step)?;
                (p.locus, Some(s))
            }
        };
        let shock = ShockData { u_l, u_r, x0: sh.x0 };

        let c = &config.constants;
        let s_ref = s_r.unwrap_or_else(|| (u_r - u_l).norm());
        let b = c.b.unwrap_or(2.0 * s_ref);
        let rho = c.rho.unwrap_or(0.5 * s_ref);
        if !(rho > 0.0 && rho <= b) {
            return Err(Error::param("shift_filippov", "constants.rho", "need 0 < rho <= b"));
        }
        if !(c.dissipation_factor > 0.0 && c.audit_factor > 0.0) {
            return Err(Error::param("contraction_harness", "constants.audit_factor", "tolerance factors must be positive"));
        }
        if c.mollification_n == Some(0) {
            return Err(Error::param("shift_filippov", "constants.mollification_n", "must be at least 1"));
        }
        let region = c.region.clone().unwrap_or_else(|| sys_ref.default_region());
        region.validate(sys_ref)?;

        let source = SourceOperator::new(&config.source, grid.dx)?;
        let rc = &config.reference;
        if rc.kind == ReferenceKind::Exact && !source.is_zero() {
            return Err(Error::param("fv_solver", "reference.kind", "the exact reference needs a zero source; use `simulated`"));
        }
        if rc.refine == 0 || rc.store_stride == 0 {
            return Err(Error::param("fv_solver", "reference.refine", "refine and store_stride must be at least 1"));
        }
        if !(rc.modulation_amplitude >= 0.0 && rc.modulation_width > 0.0) {
            return Err(Error::param("fv_solver", "reference.modulation_width", "need amplitude >= 0 and width > 0"));
        }
        if !(config.cone.radius > 0.0) {
            return Err(Error::param("contraction_harness", "cone.radius", "must be positive"));
        }
        if let Some(r) = config.cone.r {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::param("contraction_harness", "cone.r", "must be positive and finite"));
            }
        }
        let h = &config.hugoniot;
        if !(h.s_max > 0.0) || h.n == 0 || !(h.step > 0.0) {
            return Err(Error::param("shock_curves", "hugoniot.s_max", "need s_max > 0, n >= 1, step > 0"));
        }
        if let Some(bv) = &h.base {
            primitive_state(sys_ref, bv, "hugoniot.base")?;
        }
        let hy = &config.hypotheses;
        if hy.n_bases == 0 || !(hy.rho > 0.0 && hy.rho < hy.s_max) || hy.n_s < 4 || hy.fit_grid < 4 {
            return Err(Error::param("shock_curves", "hypotheses", "need n_bases >= 1, 0 < rho < s_max, n_s >= 4, fit_grid >= 4"));
        }
        Ok(Experiment { config, sys, grid, shock, s_r, region, b, rho, source })
    }

    pub fn sys(&self) -> &dyn System {
        self.sys.as_ref()
    }

    /// The same experiment on a grid `factor` times finer.
    pub fn refined(&self, factor: usize) -> Result<Experiment> {
        Experiment::new(self.config.refined(factor))
    }

    pub fn t_end(&self) -> f64 {
        self.config.run.t_end
    }

    pub fn hugoniot_base(&self) -> Result<State> {
        match &self.config.hugoniot.base {
            Some(v) => primitive_state(self.sys(), v, "hugoniot.base"),
            None => Ok(self.shock.u_l),
        }
    }

    /// `n` base states drawn from the region.
    pub fn sample_bases(&self, n: usize) -> Vec<State> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        (0..n).map(|_| self.region.sample(self.sys(), &mut rng)).collect()
    }

    pub fn weights(&self) -> Result<ContractionWeights> {
        let mut opts = self.config.constants.fit.clone();
        opts.seed = opts.seed.wrapping_add(self.config.seed);
        build_weights(self.sys(), &self.region, &[self.shock.u_l], self.b, self.rho, &opts)
    }

    pub fn perturbation(&self) -> BumpField {
        let mut p = self.config.perturbation.clone();
        p.seed = p.seed.wrapping_add(self.config.seed);
        p.place(self.shock.x0, self.sys().dim())
    }

    pub fn initial(&self) -> Result<FieldSnapshot> {
        let bumps = self.perturbation();
        let dim = self.sys().dim();
        FieldSnapshot::from_fn(self.sys(), self.grid, |x| self.shock.eval(x) + bumps.eval(x, dim))
    }

    pub fn scheme(&self) -> Result<Scheme<'_>> {
        Scheme::new(self.sys(), &self.source, self.config.run.cfl, self.config.run.boundary)
    }

    /// Every solver step up to `t_end`.
    pub fn simulate(&self) -> Result<Vec<FieldSnapshot>> {
        self.scheme()?.simulate(&self.initial()?, self.t_end(), 1)
    }

    pub fn mollification(&self) -> usize {
        self.config.constants.mollification_n.unwrap_or_else(|| default_mollification(self.grid.dx))
    }

    pub fn extra_cells(&self) -> usize {
        self.config.reference.extra_cells.unwrap_or_else(|| (0.25 * self.grid.n_cells as f64).ceil() as usize)
    }

    pub fn reference(&self, w: &ContractionWeights) -> Result<ReferenceSolution> {
        let rc = &self.config.reference;
        match rc.kind {
            ReferenceKind::Exact => ReferenceSolution::exact(self.sys(), self.shock, self.t_end()),
            ReferenceKind::Simulated => {
                let fine_dx = self.grid.dx / rc.refine as f64;
                let source = SourceOperator::new(&self.config.source, fine_dx)?;
                let modulation = BumpField::side_modulation(rc.modulation_amplitude, rc.modulation_width, self.shock.x0, self.sys().dim());
                ReferenceSolution::simulate(&SimulationSetup {
                    sys: self.sys(),
                    source: &source,
                    cfl: self.config.run.cfl,
                    grid: self.grid,
                    extra_cells: self.extra_cells(),
                    refine: rc.refine,
                    shock: self.shock,
                    modulation,
                    t_end: self.t_end(),
                    a: w.a,
                    c_star: w.c_star,
                    mollification: self.mollification() * rc.refine,
                    trace_offset: rc.trace_offset,
                    store_stride: rc.store_stride,
                })
            }
        }
    }

    pub fn shift(&self, w: &ContractionWeights, field: &[FieldSnapshot], reference: &ReferenceSolution) -> Result<ShiftTrajectory> {
        integrate_filippov(self.sys(), field, reference, w.a, w.c_star, self.shock.x0, self.mollification())
    }

    pub fn dissipation_tolerance(&self) -> f64 {
        self.config.constants.dissipation_factor * self.grid.dx
    }

    /// `eta(u_l | u_r)`, the energy scale of a mis-resolved cell at the shock.
    pub fn jump_entropy(&self) -> f64 {
        eta_rel(self.sys(), &self.shock.u_l, &self.shock.u_r)
    }

    /// `C dx` with `C = audit_factor * eta(u_l | u_r)`.
    pub fn audit_tolerance(&self) -> f64 {
        self.config.constants.audit_factor * self.grid.dx * self.jump_entropy()
    }

    /// Allowed rise of `E` for the constant-sides case, `dx * eta(u_l | u_r)`.
    pub fn monotone_tolerance(&self) -> f64 {
        self.grid.dx * self.jump_entropy()
    }

    /// Domain length, the scale of the zero-mass check.
    pub fn domain_scale(&self) -> f64 {
        self.grid.x_max() - self.grid.x_min
    }

    pub fn contraction(&self) -> Result<ContractionRun> {
        let weights = self.weights()?;
        self.contraction_with(weights)
    }

    /// Full run with given weights, so refinement studies can share one fit.
    pub fn contraction_with(&self, weights: ContractionWeights) -> Result<ContractionRun> {
        let sys = self.sys();
        let field = self.simulate()?;
        let reference = self.reference(&weights)?;
        let traj = self.shift(&weights, &field, &reference)?;
        let dissipation = verify_dissipation(sys, &traj, &field, &reference, weights.a, weights.c, self.dissipation_tolerance())?;
        let r = match self.config.cone.r {
            Some(r) => InformationSpeed { r, raw: r, pairs: 0, fallback: false },
            None => compute_r(sys, &field, &reference, &traj)?,
        };
        let cone = ConeSpec::new(self.config.cone.radius, self.t_end(), r.r, reference.s(0.0))?;
        let series = entropy_series(sys, &field, &reference, &traj, &cone, weights.a)?;
        let audit = dissipation_audit(sys, &field, &reference, &self.source, &traj, &series, &cone, weights.a, self.audit_tolerance())?;
        let gronwall = verify_gronwall(&series, &traj, self.domain_scale())?;
        Ok(ContractionRun { weights, field, reference, traj, dissipation, r, cone, series, audit, gronwall })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_build_a_burgers_shock() {
        let e = Experiment::new(ExperimentConfig::default()).unwrap();
        assert_eq!(e.shock.u_l, State::scalar(1.0));
        assert!(e.shock.u_r[0].abs() < 1e-10);
        assert_eq!((e.b, e.rho), (2.0, 0.5));
    }

    #[test]
    fn invalid_blocks_are_usage_errors() {
        for text in [
            "[grid]\nx_min = 1.0\nx_max = 0.0",
            "[run]\ncfl = 1.5",
            "[shock]\nu_l = [1.0, 2.0]",
            "[source]\nkind = \"linear\"\nc = -0.1",
            "[cone]\nradius = 0.0",
            "[system]\nname = \"mhd\"",
        ] {
            let c = ExperimentConfig::from_toml(text).unwrap();
            let err = Experiment::new(c).err().expect(text);
            assert!(err.is_usage(), "{text}: {err}");
        }
    }
}
