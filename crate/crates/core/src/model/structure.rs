//! Beam structure definition: nodes, elements, degree-of-freedom layout and supports.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Which nodal degrees of freedom the model carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DofLayout {
    /// Transverse displacement and slope per node. Every element must lie on one line.
    Bending,
    /// Out-of-plane frame: transverse displacement plus rotations about the global
    /// X and Y axes per node. Elements carry bending and Saint-Venant torsion.
    Grillage,
}

impl DofLayout {
    pub fn dofs_per_node(self) -> usize {
        match self {
            DofLayout::Bending => 2,
            DofLayout::Grillage => 3,
        }
    }

    /// Upper bound on the number of rigid-body modes of an unsupported structure.
    pub fn rigid_body_modes(self) -> usize {
        self.dofs_per_node()
    }
}

/// Cross-section and material of one element. SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamElement {
    pub node_a: usize,
    pub node_b: usize,
    /// m²
    pub area: f64,
    /// Bending second moment of area, m⁴.
    pub second_moment: f64,
    /// kg·m⁻³
    pub density: f64,
    /// Nominal elastic modulus, N·m⁻². Assembly takes moduli explicitly; this is
    /// the value used when none are supplied.
    pub modulus: f64,
    /// Saint-Venant torsion constant, m⁴. Only used by [`DofLayout::Grillage`].
    #[serde(default)]
    pub torsion_constant: f64,
    /// Polar moment of area for rotary inertia in torsion, m⁴. Grillage only.
    #[serde(default)]
    pub polar_moment: f64,
    /// Grillage only; shear modulus is `E / (2 (1 + ν))` so stiffness stays linear in E.
    #[serde(default)]
    pub poisson_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    FreeFree,
    /// Global DOF indices held at zero.
    Constrained(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamStructure {
    /// Planar node positions, m.
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<BeamElement>,
    pub boundary: Boundary,
    pub layout: DofLayout,
}

impl BeamStructure {
    /// Validates the structure and returns it.
    pub fn new(
        nodes: Vec<[f64; 2]>,
        elements: Vec<BeamElement>,
        boundary: Boundary,
        layout: DofLayout,
    ) -> Result<Self, ModelError> {
        let s = Self {
            nodes,
            elements,
            boundary,
            layout,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.elements.is_empty() {
            return Err(ModelError::InvalidStructure("no elements".into()));
        }
        for (i, e) in self.elements.iter().enumerate() {
            let n = self.nodes.len();
            if e.node_a >= n || e.node_b >= n {
                return Err(ModelError::InvalidStructure(format!(
                    "element {i} references a missing node"
                )));
            }
            if e.node_a == e.node_b {
                return Err(ModelError::InvalidStructure(format!(
                    "element {i} connects node {} to itself",
                    e.node_a
                )));
            }
            let props = [e.area, e.second_moment, e.density, e.modulus];
            if props.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
                return Err(ModelError::InvalidStructure(format!(
                    "element {i} has a non-positive physical property"
                )));
            }
            if self.layout == DofLayout::Grillage {
                if !(e.torsion_constant > 0.0 && e.polar_moment > 0.0) {
                    return Err(ModelError::InvalidStructure(format!(
                        "element {i} needs positive torsion constant and polar moment"
                    )));
                }
                if !(0.0..0.5).contains(&e.poisson_ratio) {
                    return Err(ModelError::InvalidStructure(format!(
                        "element {i} Poisson ratio outside [0, 0.5)"
                    )));
                }
            }
            if !(self.element_length(i) > 0.0) {
                return Err(ModelError::InvalidStructure(format!("element {i} has zero length")));
            }
        }
        if self.layout == DofLayout::Bending {
            let axis = self.element_direction(0);
            for i in 1..self.elements.len() {
                let d = self.element_direction(i);
                if (axis[0] * d[1] - axis[1] * d[0]).abs() > 1e-9 {
                    return Err(ModelError::InvalidStructure(format!(
                        "element {i} is not collinear with element 0; use the grillage layout"
                    )));
                }
            }
        }
        if let Boundary::Constrained(dofs) = &self.boundary {
            if let Some(&d) = dofs.iter().find(|&&d| d >= self.dof_count()) {
                return Err(ModelError::InvalidStructure(format!(
                    "constrained DOF {d} out of range"
                )));
            }
        }
        Ok(())
    }

    pub fn dof_count(&self) -> usize {
        self.nodes.len() * self.layout.dofs_per_node()
    }

    /// Global index of `local` (0 = transverse displacement) at `node`.
    pub fn dof(&self, node: usize, local: usize) -> usize {
        node * self.layout.dofs_per_node() + local
    }

    /// Global indices of every transverse-displacement DOF, in node order.
    pub fn transverse_dofs(&self) -> Vec<usize> {
        (0..self.nodes.len()).map(|n| self.dof(n, 0)).collect()
    }

    pub fn element_length(&self, i: usize) -> f64 {
        let e = &self.elements[i];
        let (a, b) = (self.nodes[e.node_a], self.nodes[e.node_b]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    /// Unit vector from node_a to node_b.
    pub fn element_direction(&self, i: usize) -> [f64; 2] {
        let e = &self.elements[i];
        let (a, b) = (self.nodes[e.node_a], self.nodes[e.node_b]);
        let l = self.element_length(i);
        [(b[0] - a[0]) / l, (b[1] - a[1]) / l]
    }

    pub fn nominal_moduli(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.modulus).collect()
    }

    /// Uniform straight beam along X with `n_elements` equal elements.
    pub fn uniform_beam(
        length: f64,
        n_elements: usize,
        template: BeamElement,
        boundary: Boundary,
        layout: DofLayout,
    ) -> Result<Self, ModelError> {
        let le = length / n_elements as f64;
        let nodes = (0..=n_elements).map(|i| [i as f64 * le, 0.0]).collect();
        let elements = (0..n_elements)
            .map(|i| BeamElement {
                node_a: i,
                node_b: i + 1,
                ..template
            })
            .collect();
        Self::new(nodes, elements, boundary, layout)
    }
}
