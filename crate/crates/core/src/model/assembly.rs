//! Element matrices and global assembly.
//!
//! The bending element is the standard cubic-Hermite Euler-Bernoulli element with
//! consistent mass, written in terms of (w₁, w₁′, w₂, w₂′) where w′ is the slope
//! along the element axis. Grillage elements add linear torsion on the twist DOFs.

use nalgebra::{DMatrix, SMatrix};

use super::structure::{BeamStructure, Boundary, DofLayout};
use super::ModelError;

type Mat4 = SMatrix<f64, 4, 4>;
type Mat6 = SMatrix<f64, 6, 6>;

/// Mass and stiffness matrices after supports have been applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    /// Retained DOF count (rows of `mass`).
    pub dof_count: usize,
    /// Global DOF index of each retained row.
    pub free_dofs: Vec<usize>,
}

impl SystemMatrices {
    /// Largest relative asymmetry of either matrix.
    pub fn asymmetry(&self) -> f64 {
        fn rel(m: &DMatrix<f64>) -> f64 {
            let scale = m.amax().max(f64::MIN_POSITIVE);
            (m - m.transpose()).amax() / scale
        }
        rel(&self.mass).max(rel(&self.stiffness))
    }

    pub fn check_symmetry(&self, tol: f64) -> Result<(), ModelError> {
        let a = self.asymmetry();
        if a > tol {
            return Err(ModelError::Asymmetric(a));
        }
        Ok(())
    }
}

/// Bending stiffness in (w₁, w₁′, w₂, w₂′).
pub fn bending_stiffness(ei: f64, l: f64) -> Mat4 {
    let c = ei / (l * l * l);
    let (l2, l1) = (l * l, l);
    Mat4::new(
        12.0,
        6.0 * l1,
        -12.0,
        6.0 * l1, //
        6.0 * l1,
        4.0 * l2,
        -6.0 * l1,
        2.0 * l2, //
        -12.0,
        -6.0 * l1,
        12.0,
        -6.0 * l1, //
        6.0 * l1,
        2.0 * l2,
        -6.0 * l1,
        4.0 * l2,
    ) * c
}

/// Consistent bending mass in (w₁, w₁′, w₂, w₂′).
pub fn bending_mass(rho_a: f64, l: f64) -> Mat4 {
    let c = rho_a * l / 420.0;
    let (l2, l1) = (l * l, l);
    Mat4::new(
        156.0,
        22.0 * l1,
        54.0,
        -13.0 * l1, //
        22.0 * l1,
        4.0 * l2,
        13.0 * l1,
        -3.0 * l2, //
        54.0,
        13.0 * l1,
        156.0,
        -22.0 * l1, //
        -13.0 * l1,
        -3.0 * l2,
        -22.0 * l1,
        4.0 * l2,
    ) * c
}

/// Element stiffness and mass in global nodal DOFs (node_a block, then node_b block).
pub fn element_matrices(structure: &BeamStructure, index: usize, modulus: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let e = &structure.elements[index];
    let l = structure.element_length(index);
    let kb = bending_stiffness(modulus * e.second_moment, l);
    let mb = bending_mass(e.density * e.area, l);
    let [c, s] = structure.element_direction(index);

    match structure.layout {
        DofLayout::Bending => {
            // Slope DOFs are measured along the structure's axis (element 0 direction).
            let axis = structure.element_direction(0);
            let sign = if c * axis[0] + s * axis[1] >= 0.0 { 1.0 } else { -1.0 };
            let t = Mat4::from_diagonal(&nalgebra::Vector4::new(1.0, sign, 1.0, sign));
            let k = t.transpose() * kb * t;
            let m = t.transpose() * mb * t;
            (to_dynamic(&k), to_dynamic(&m))
        }
        DofLayout::Grillage => {
            let g = modulus / (2.0 * (1.0 + e.poisson_ratio));
            let kt = g * e.torsion_constant / l;
            let mt = e.density * e.polar_moment * l / 6.0;
            // Local order: (w₁, twist₁, slope₁, w₂, twist₂, slope₂).
            let mut kl = Mat6::zeros();
            let mut ml = Mat6::zeros();
            let bend = [0, 2, 3, 5];
            for (i, &gi) in bend.iter().enumerate() {
                for (j, &gj) in bend.iter().enumerate() {
                    kl[(gi, gj)] = kb[(i, j)];
                    ml[(gi, gj)] = mb[(i, j)];
                }
            }
            kl[(1, 1)] = kt;
            kl[(4, 4)] = kt;
            kl[(1, 4)] = -kt;
            kl[(4, 1)] = -kt;
            ml[(1, 1)] = 2.0 * mt;
            ml[(4, 4)] = 2.0 * mt;
            ml[(1, 4)] = mt;
            ml[(4, 1)] = mt;
            // Global nodal DOFs (w, θx, θy): twist = c·θx + s·θy, slope = s·θx − c·θy.
            let mut t = Mat6::zeros();
            for n in 0..2 {
                let o = 3 * n;
                t[(o, o)] = 1.0;
                t[(o + 1, o + 1)] = c;
                t[(o + 1, o + 2)] = s;
                t[(o + 2, o + 1)] = s;
                t[(o + 2, o + 2)] = -c;
            }
            let k = t.transpose() * kl * t;
            let m = t.transpose() * ml * t;
            (to_dynamic(&k), to_dynamic(&m))
        }
    }
}

fn to_dynamic<const N: usize>(m: &SMatrix<f64, N, N>) -> DMatrix<f64> {
    let mut d = DMatrix::from_iterator(N, N, m.iter().copied());
    symmetrize(&mut d);
    d
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Assembles global mass and stiffness for the given per-element moduli and removes
/// constrained DOFs.
pub fn assemble(structure: &BeamStructure, moduli: &[f64]) -> Result<SystemMatrices, ModelError> {
    if moduli.len() != structure.elements.len() {
        return Err(ModelError::DimensionMismatch {
            expected: structure.elements.len(),
            found: moduli.len(),
        });
    }
    if let Some((i, &e)) = moduli.iter().enumerate().find(|(_, e)| !(e.is_finite() && **e > 0.0)) {
        return Err(ModelError::NonPositiveModulus { element: i, value: e });
    }

    let n = structure.dof_count();
    let dpn = structure.layout.dofs_per_node();
    let mut k = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    let mut map = Vec::with_capacity(2 * dpn);
    for (i, el) in structure.elements.iter().enumerate() {
        let (ke, me) = element_matrices(structure, i, moduli[i]);
        map.clear();
        map.extend((0..dpn).map(|d| structure.dof(el.node_a, d)));
        map.extend((0..dpn).map(|d| structure.dof(el.node_b, d)));
        for (a, &ga) in map.iter().enumerate() {
            for (b, &gb) in map.iter().enumerate() {
                k[(ga, gb)] += ke[(a, b)];
                m[(ga, gb)] += me[(a, b)];
            }
        }
    }

    let free_dofs: Vec<usize> = match &structure.boundary {
        Boundary::FreeFree => (0..n).collect(),
        Boundary::Constrained(fixed) => (0..n).filter(|d| !fixed.contains(d)).collect(),
    };
    if free_dofs.len() < n {
        k = k.select_rows(&free_dofs).select_columns(&free_dofs);
        m = m.select_rows(&free_dofs).select_columns(&free_dofs);
    }
    Ok(SystemMatrices {
        dof_count: free_dofs.len(),
        mass: m,
        stiffness: k,
        free_dofs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::structure::BeamElement;

    fn template() -> BeamElement {
        BeamElement {
            node_a: 0,
            node_b: 1,
            area: 5e-4,
            second_moment: 4e-9,
            density: 2700.0,
            modulus: 7e10,
            torsion_constant: 1.5e-8,
            polar_moment: 1.1e-7,
            poisson_ratio: 0.33,
        }
    }

    #[test]
    fn doubling_modulus_doubles_stiffness_only() {
        for layout in [DofLayout::Bending, DofLayout::Grillage] {
            let s = BeamStructure::uniform_beam(0.4, 1, template(), Boundary::FreeFree, layout).unwrap();
            let a = assemble(&s, &[7e10]).unwrap();
            let b = assemble(&s, &[14e10]).unwrap();
            assert_eq!(a.mass, b.mass);
            let diff = (&b.stiffness - &a.stiffness * 2.0).amax();
            assert!(diff <= 1e-12 * b.stiffness.amax(), "{diff}");
        }
    }

    #[test]
    fn collinear_elements_are_banded() {
        let s = BeamStructure::uniform_beam(1.0, 2, template(), Boundary::FreeFree, DofLayout::Bending).unwrap();
        let sys = assemble(&s, &[7e10, 7e10]).unwrap();
        assert!(sys.asymmetry() < 1e-10);
        let bw = 2 * s.layout.dofs_per_node();
        for i in 0..sys.dof_count {
            for j in 0..sys.dof_count {
                if i.abs_diff(j) > bw {
                    assert_eq!(sys.stiffness[(i, j)], 0.0);
                    assert_eq!(sys.mass[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn element_mass_sums_to_element_mass() {
        // Rigid translation picks out total mass: uᵀ M u = ρ A L.
        let s = BeamStructure::uniform_beam(0.7, 1, template(), Boundary::FreeFree, DofLayout::Bending).unwrap();
        let sys = assemble(&s, &[7e10]).unwrap();
        let u = nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
        let total = (u.transpose() * &sys.mass * &u)[0];
        let expected = 2700.0 * 5e-4 * 0.7;
        assert!((total - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn grillage_rigid_motions_have_no_strain_energy() {
        // An L-shaped frame: rigid rotation about any in-plane axis must be stress free.
        let nodes = vec![[0.0, 0.0], [0.3, 0.0], [0.3, 0.4]];
        let mut e0 = template();
        let mut e1 = template();
        e0.node_a = 0;
        e0.node_b = 1;
        e1.node_a = 1;
        e1.node_b = 2;
        let s = BeamStructure::new(nodes.clone(), vec![e0, e1], Boundary::FreeFree, DofLayout::Grillage).unwrap();
        let sys = assemble(&s, &[7e10, 7e10]).unwrap();
        let (rx, ry) = (0.3, -0.7);
        let mut u = nalgebra::DVector::zeros(9);
        for (n, p) in nodes.iter().enumerate() {
            u[3 * n] = rx * p[1] - ry * p[0];
            u[3 * n + 1] = rx;
            u[3 * n + 2] = ry;
        }
        let f = &sys.stiffness * &u;
        assert!(f.amax() < 1e-9 * sys.stiffness.amax(), "{}", f.amax());
    }

    #[test]
    fn rejects_wrong_moduli() {
        let s = BeamStructure::uniform_beam(1.0, 2, template(), Boundary::FreeFree, DofLayout::Bending).unwrap();
        assert!(matches!(
            assemble(&s, &[7e10]),
            Err(ModelError::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(matches!(
            assemble(&s, &[7e10, -1.0]),
            Err(ModelError::NonPositiveModulus { element: 1, .. })
        ));
    }

    #[test]
    fn constrained_dofs_are_removed() {
        let s = BeamStructure::uniform_beam(
            1.0,
            2,
            template(),
            Boundary::Constrained(vec![0, 1]),
            DofLayout::Bending,
        )
        .unwrap();
        let sys = assemble(&s, &[7e10, 7e10]).unwrap();
        assert_eq!(sys.dof_count, 4);
        assert_eq!(sys.free_dofs, vec![2, 3, 4, 5]);
    }
}
