//! Synthetic updating fixtures built around an H-shaped frame of three beam runs.
//!
//! Layout in the plane, bending out of plane (grillage DOFs):
//!
//! ```text
//!   left flange        right flange
//!   (x = 0)            (x = crossbar)
//!      |                   |
//!      +------ crossbar ---+
//!      |                   |
//! ```
//!
//! Each run is split into `elements_per_run` equal elements, and the crossbar
//! joins the mid-points of the two flanges. Elements are numbered left flange
//! first (bottom to top), then the crossbar (left to right), then the right
//! flange (bottom to top). With the default 4 elements per run that is 13 nodes,
//! 12 elements and 39 DOFs, and indices 2, 3, 4 are the upper half of the left
//! flange plus the first crossbar element.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::model::{
    assemble, solve_modes, BeamElement, BeamStructure, Boundary, CostWeights, DofLayout, ModalData, ModelError,
};
use crate::optim::Bounds;
use crate::updating::{compute_gamma_weights_with, GammaMode, UpdateError, UpdatingProblem};

/// Dimensions and material of the H frame. SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HGeometry {
    /// m
    pub left_flange_length: f64,
    /// m
    pub right_flange_length: f64,
    /// m
    pub crossbar_length: f64,
    pub elements_per_run: usize,
    /// In-plane section width, m.
    pub width: f64,
    /// Out-of-plane section depth, m. Bending is about the wide axis.
    pub thickness: f64,
    /// kg·m⁻³
    pub density: f64,
    pub poisson_ratio: f64,
}

impl Default for HGeometry {
    fn default() -> Self {
        Self {
            left_flange_length: 0.4,
            right_flange_length: 0.5,
            crossbar_length: 0.6,
            elements_per_run: 4,
            width: 0.05,
            thickness: 0.01,
            density: 2700.0,
            poisson_ratio: 0.33,
        }
    }
}

impl HGeometry {
    pub fn build(&self, modulus: f64) -> Result<BeamStructure, ModelError> {
        let n = self.elements_per_run;
        if n < 2 || !n.is_multiple_of(2) {
            return Err(ModelError::InvalidStructure(
                "elements_per_run must be even so the crossbar meets the flange mid-points".into(),
            ));
        }
        let (b, h) = (self.width, self.thickness);
        let (long, short) = (b.max(h), b.min(h));
        let r = short / long;
        let template = BeamElement {
            node_a: 0,
            node_b: 0,
            area: b * h,
            second_moment: b * h.powi(3) / 12.0,
            density: self.density,
            modulus,
            // Rectangular-section torsion constant, series approximation.
            torsion_constant: long * short.powi(3) * (1.0 / 3.0 - 0.21 * r * (1.0 - r.powi(4) / 12.0)),
            polar_moment: b * h * (b * b + h * h) / 12.0,
            poisson_ratio: self.poisson_ratio,
        };

        let mut nodes = Vec::new();
        for k in 0..=n {
            nodes.push([0.0, self.left_flange_length * (k as f64 / n as f64 - 0.5)]);
        }
        let left: Vec<usize> = (0..=n).collect();
        // Crossbar interior nodes follow the left flange; the right flange comes last.
        let right: Vec<usize> = (2 * n..=3 * n).collect();
        let mut cross = vec![left[n / 2]];
        for k in 1..n {
            cross.push(nodes.len());
            nodes.push([self.crossbar_length * k as f64 / n as f64, 0.0]);
        }
        cross.push(right[n / 2]);
        for k in 0..=n {
            nodes.push([
                self.crossbar_length,
                self.right_flange_length * (k as f64 / n as f64 - 0.5),
            ]);
        }
        let elements = [left, cross, right]
            .iter()
            .flat_map(|run| run.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>())
            .map(|(node_a, node_b)| BeamElement {
                node_a,
                node_b,
                ..template
            })
            .collect();
        BeamStructure::new(nodes, elements, Boundary::FreeFree, DofLayout::Grillage)
    }
}

/// Where the structure comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructureSource {
    /// A TOML file holding a serialized [`BeamStructure`].
    File {
        path: PathBuf,
    },
    H(HGeometry),
}

impl Default for StructureSource {
    fn default() -> Self {
        StructureSource::H(HGeometry::default())
    }
}

/// One element whose ground-truth modulus differs from nominal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    /// Zero-based element index.
    pub element: usize,
    /// N·m⁻²
    pub modulus: f64,
}

/// Independent Gaussian relative noise on the synthetic measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Relative standard deviation of each frequency.
    pub frequency_std: f64,
    /// Relative standard deviation of each mode-shape entry.
    pub shape_std: f64,
}

impl NoiseSpec {
    pub fn is_off(&self) -> bool {
        self.frequency_std == 0.0 && self.shape_std == 0.0
    }
}

/// Cost settings shared by every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSpec {
    /// Weight of the mode-shape term.
    pub beta: f64,
    /// How the per-mode frequency weights are derived from the initial mismatch.
    /// Absolute (Hz²) by default: the relative reading gives weights of order
    /// 1e-4 and leaves the frequency term too small to steer the search.
    pub gamma_mode: GammaMode,
    /// Response-surface stopping threshold; 0 runs every iteration.
    pub target_cost: f64,
}

impl Default for CostSpec {
    fn default() -> Self {
        Self {
            beta: 0.75,
            gamma_mode: GammaMode::Absolute,
            target_cost: 0.0,
        }
    }
}

/// Fixture settings other than the structure and the cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSettings {
    /// Modulus of the initial model, N·m⁻².
    pub nominal_modulus: f64,
    pub perturbations: Vec<Perturbation>,
    /// Updating bounds applied to every element, N·m⁻².
    pub lower_modulus: f64,
    pub upper_modulus: f64,
    /// Measured DOFs; all transverse displacements when unset.
    pub observed: Option<Vec<usize>>,
    /// Elastic modes compared.
    pub n_modes: usize,
    pub noise: NoiseSpec,
    /// Seed of the measurement noise.
    pub seed: u64,
}

impl Default for ScenarioSettings {
    fn default() -> Self {
        Self {
            nominal_modulus: 7.0e10,
            perturbations: [2, 3, 4]
                .into_iter()
                .map(|element| Perturbation {
                    element,
                    modulus: 6.3e10,
                })
                .collect(),
            lower_modulus: 6.0e10,
            upper_modulus: 8.0e10,
            observed: None,
            n_modes: 5,
            noise: NoiseSpec::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub structure: StructureSource,
    pub settings: ScenarioSettings,
    pub cost: CostSpec,
}

/// The fixture produced by [`build_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub problem: UpdatingProblem,
    pub ground_truth: Vec<f64>,
    /// Ground-truth elastic modes at the observed coordinates, before noise.
    pub exact: ModalData,
}

fn invalid(msg: String) -> UpdateError {
    UpdateError::InvalidConfig(msg)
}

pub fn load_structure(source: &StructureSource, modulus: f64) -> Result<BeamStructure, UpdateError> {
    match source {
        StructureSource::H(g) => Ok(g.build(modulus)?),
        StructureSource::File { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| invalid(format!("cannot read structure file {}: {e}", path.display())))?;
            let s: BeamStructure =
                toml::from_str(&text).map_err(|e| invalid(format!("structure file {}: {e}", path.display())))?;
            s.validate()?;
            Ok(s)
        }
    }
}

/// Builds the updating problem: synthetic measurements from the ground-truth
/// model, a uniform-modulus initial model, and γ from the initial mismatch.
pub fn build_scenario(spec: &ScenarioSpec) -> Result<Scenario, UpdateError> {
    let s = &spec.settings;
    let structure = load_structure(&spec.structure, s.nominal_modulus)?;
    let n_el = structure.elements.len();
    let bounds = Bounds::uniform(n_el, s.lower_modulus, s.upper_modulus)?;
    if s.n_modes == 0 {
        return Err(invalid("n_modes must be at least 1".into()));
    }

    let initial = vec![s.nominal_modulus; n_el];
    let mut ground_truth = initial.clone();
    for p in &s.perturbations {
        if p.element >= n_el {
            return Err(invalid(format!(
                "perturbed element {} out of range (0..{n_el})",
                p.element
            )));
        }
        ground_truth[p.element] = p.modulus;
    }
    if !bounds.contains(&ground_truth) || !bounds.contains(&initial) {
        return Err(invalid(
            "nominal and perturbed moduli must lie within the updating bounds".into(),
        ));
    }

    let observed = s.observed.clone().unwrap_or_else(|| structure.transverse_dofs());
    let matrices = assemble(&structure, &ground_truth)?;
    let rigid = structure.layout.rigid_body_modes();
    let truth_modes = solve_modes(&matrices, s.n_modes + rigid)?.elastic();
    if truth_modes.n_modes() < s.n_modes {
        return Err(invalid(format!(
            "model yields only {} elastic modes, {} requested",
            truth_modes.n_modes(),
            s.n_modes
        )));
    }
    let head: Vec<usize> = (0..s.n_modes).collect();
    let exact = truth_modes.select_modes(&head).restrict(&observed)?;
    let measured = add_noise(&exact, &s.noise, s.seed)?;

    // γ needs the initial model paired against the measurements, which in turn
    // needs a problem; build one with unit weights first.
    let unit = CostWeights::new(vec![1.0; s.n_modes], spec.cost.beta)?;
    let mut problem = UpdatingProblem::new(
        structure,
        bounds,
        initial.clone(),
        measured,
        unit,
        spec.cost.target_cost,
    )?;
    let initial_modes = problem.paired_modes(&initial)?;
    let gamma = compute_gamma_weights_with(&initial_modes, &problem.measured, spec.cost.gamma_mode)?;
    problem.weights = CostWeights::new(gamma, spec.cost.beta)?;

    Ok(Scenario {
        problem,
        ground_truth,
        exact,
    })
}

fn add_noise(exact: &ModalData, noise: &NoiseSpec, seed: u64) -> Result<ModalData, UpdateError> {
    if noise.is_off() {
        return Ok(exact.clone());
    }
    let bad = |_| invalid("noise standard deviations must be finite and non-negative".into());
    let fnoise = Normal::new(0.0, noise.frequency_std).map_err(bad)?;
    let snoise = Normal::new(0.0, noise.shape_std).map_err(bad)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = exact.clone();
    for w in &mut out.frequencies {
        *w *= 1.0 + fnoise.sample(&mut rng);
    }
    for v in out.shapes.iter_mut() {
        *v *= 1.0 + snoise.sample(&mut rng);
    }
    if out.frequencies.windows(2).any(|w| w[1] < w[0]) || out.frequencies.iter().any(|w| *w <= 0.0) {
        return Err(invalid(
            "frequency noise reordered the measured modes; reduce frequency_std".into(),
        ));
    }
    Ok(out)
}
