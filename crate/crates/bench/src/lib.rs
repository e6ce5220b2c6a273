//! Fixtures shared by the benches.

use contraction_core::config::ExperimentConfig;
use contraction_core::experiment::Experiment;

/// Perturbed first-family shock for `system` on `n_cells` cells.
pub fn experiment(system: &str, n_cells: usize) -> Experiment {
    let radius = if system == "burgers" { 0.5 } else { 1.0 };
    let text = format!(
        "[system]\nname = \"{system}\"\n[grid]\nn_cells = {n_cells}\n[perturbation]\namplitude = 0.01\nwidth = 0.1\nseed = 3\n\
         [reference]\nkind = \"simulated\"\nrefine = 1\n[cone]\nradius = {radius}\n"
    );
    Experiment::new(ExperimentConfig::from_toml(&text).expect("fixture config")).expect("fixture experiment")
}
