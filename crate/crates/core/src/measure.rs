//! Finitely supported measures on square matrices and the measures derived
//! from them.

use crate::error::{invalid, Error, Result};
use crate::linalg::{lift, lift_dimension, singular_values, validate_lift_params, Matrix};

/// Default cap on the dimension of a lifted measure.
pub const DEFAULT_LIFT_DIM_CAP: usize = 256;

/// Relative determinant threshold below which an atom counts as singular in
/// [`restrict_invertible`]: `|det A| ≤ τ · σ₁(A)^d`.
pub const SINGULAR_RTOL: f64 = 1e-13;

/// One weighted point mass `w · δ_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub matrix: Matrix,
}

impl Atom {
    pub fn new(weight: f64, matrix: Matrix) -> Self {
        Self { weight, matrix }
    }
}

/// `μ = Σᵢ wᵢ δ_{Aᵢ}` with at least one atom, positive weights and a shared
/// dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMatrixMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl FiniteMatrixMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let Some(first) = atoms.first() else {
            return invalid("a measure needs at least one atom");
        };
        let dim = first.matrix.dim();
        for (i, atom) in atoms.iter().enumerate() {
            if !(atom.weight > 0.0) || !atom.weight.is_finite() {
                return invalid(format!(
                    "atom {i}: weight must be positive and finite, got {}",
                    atom.weight
                ));
            }
            if atom.matrix.dim() != dim {
                return invalid(format!(
                    "atom {i}: dimension {} does not match {dim}",
                    atom.matrix.dim()
                ));
            }
            if !atom.matrix.is_finite() {
                return invalid(format!("atom {i}: matrix has non-finite entries"));
            }
        }
        Ok(Self { dim, atoms })
    }

    /// Unit weight on every matrix, i.e. `Σ δ_{Aᵢ}`.
    pub fn counting(matrices: impl IntoIterator<Item = Matrix>) -> Result<Self> {
        Self::new(matrices.into_iter().map(|m| Atom::new(1.0, m)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn matrices(&self) -> impl Iterator<Item = &Matrix> {
        self.atoms.iter().map(|a| &a.matrix)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn has_unit_weights(&self) -> bool {
        self.atoms.iter().all(|a| a.weight == 1.0)
    }

    /// `max ‖Aᵢ‖` over the support.
    pub fn max_operator_norm(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| singular_values(&a.matrix).map(|s| s.largest()).unwrap_or(f64::NAN))
            .fold(0.0, f64::max)
    }
}

/// Multiplies every matrix by `c`. Norm pressure shifts by `s·ln c`.
pub fn scale_measure(mu: &FiniteMatrixMeasure, c: f64) -> Result<FiniteMatrixMeasure> {
    if !(c > 0.0) || !c.is_finite() {
        return invalid(format!("scale factor must be positive and finite, got {c}"));
    }
    FiniteMatrixMeasure::new(
        mu.atoms
            .iter()
            .map(|a| Atom::new(a.weight, a.matrix.scaled(c)))
            .collect(),
    )
}

/// Reweights a 2×2 measure by `|det A|^{s-1}` for `1 < s < 2`, so that
/// `∫ ‖A‖^{2-s} dμ̂ₙ = ∫ φ^s dμₙ`. Atoms with zero determinant are dropped;
/// `None` means nothing survives.
pub fn hat_measure_2d(mu: &FiniteMatrixMeasure, s: f64) -> Result<Option<FiniteMatrixMeasure>> {
    if mu.dim != 2 {
        return invalid(format!("hat measure needs d = 2, got d = {}", mu.dim));
    }
    if !(s > 1.0 && s < 2.0) {
        return invalid(format!("hat measure needs 1 < s < 2, got {s}"));
    }
    let atoms: Vec<Atom> = mu
        .atoms
        .iter()
        .filter_map(|a| {
            let det = a.matrix.determinant().abs();
            (det > 0.0).then(|| Atom::new(a.weight * det.powf(s - 1.0), a.matrix.clone()))
        })
        .filter(|a| a.weight > 0.0)
        .collect();
    if atoms.is_empty() {
        return Ok(None);
    }
    FiniteMatrixMeasure::new(atoms).map(Some)
}

/// Pushes `μ` forward under `A ↦ (A^∧k)^{⊗(q-p)} ⊗ (A^∧(k+1))^{⊗p}`.
pub fn lifted_measure(
    mu: &FiniteMatrixMeasure,
    k: usize,
    p: u64,
    q: u64,
    dim_cap: usize,
) -> Result<FiniteMatrixMeasure> {
    validate_lift_params(mu.dim, k, p, q)?;
    let dim = lift_dimension(mu.dim, k, p, q);
    if dim > dim_cap as u128 {
        return Err(Error::DimensionCapExceeded {
            dimension: dim,
            cap: dim_cap,
        });
    }
    let atoms = mu
        .atoms
        .iter()
        .map(|a| Ok(Atom::new(a.weight, lift(&a.matrix, k, p, q)?)))
        .collect::<Result<Vec<_>>>()?;
    FiniteMatrixMeasure::new(atoms)
}

/// `μ⁰`: the restriction of `μ` to invertible matrices. `None` when every
/// atom is singular.
pub fn restrict_invertible(mu: &FiniteMatrixMeasure) -> Option<FiniteMatrixMeasure> {
    let atoms: Vec<Atom> = mu.atoms.iter().filter(|a| !is_singular(&a.matrix)).cloned().collect();
    if atoms.is_empty() {
        None
    } else {
        Some(FiniteMatrixMeasure { dim: mu.dim, atoms })
    }
}

pub(crate) fn is_singular(a: &Matrix) -> bool {
    let top = match singular_values(a) {
        Ok(s) => s.largest(),
        Err(_) => return false,
    };
    if top == 0.0 {
        return true;
    }
    a.determinant().abs() <= SINGULAR_RTOL * top.powi(a.dim() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag_pair() -> FiniteMatrixMeasure {
        FiniteMatrixMeasure::counting([Matrix::diag(&[0.5, 1.0 / 3.0]), Matrix::diag(&[0.25, 0.5])]).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(FiniteMatrixMeasure::new(vec![]).is_err());
        assert!(FiniteMatrixMeasure::new(vec![Atom::new(0.0, Matrix::identity(2))]).is_err());
        assert!(FiniteMatrixMeasure::new(vec![Atom::new(-1.0, Matrix::identity(2))]).is_err());
        assert!(FiniteMatrixMeasure::new(vec![
            Atom::new(1.0, Matrix::identity(2)),
            Atom::new(1.0, Matrix::identity(3)),
        ])
        .is_err());
        let mu = diag_pair();
        assert_eq!(mu.dim(), 2);
        assert_eq!(mu.len(), 2);
        assert!(mu.has_unit_weights());
        assert_eq!(mu.total_mass(), 2.0);
    }

    #[test]
    fn hat_measure_reweights_by_determinant() {
        let hat = hat_measure_2d(&diag_pair(), 1.5).unwrap().unwrap();
        assert_relative_eq!(hat.atoms()[0].weight, (1.0f64 / 6.0).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(hat.atoms()[1].weight, (1.0f64 / 8.0).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(hat.atoms()[0].weight, 0.40825, max_relative = 1e-5);
        assert_relative_eq!(hat.atoms()[1].weight, 0.35355, max_relative = 1e-5);
    }

    #[test]
    fn hat_measure_drops_singular_and_tends_to_original() {
        let mu = FiniteMatrixMeasure::counting([Matrix::identity(2), Matrix::diag(&[1.0, 0.0])]).unwrap();
        let hat = hat_measure_2d(&mu, 1.3).unwrap().unwrap();
        assert_eq!(hat.len(), 1);
        let only_singular = FiniteMatrixMeasure::counting([Matrix::diag(&[1.0, 0.0])]).unwrap();
        assert!(hat_measure_2d(&only_singular, 1.3).unwrap().is_none());
        let near = hat_measure_2d(&diag_pair(), 1.0 + 1e-12).unwrap().unwrap();
        for (a, b) in near.atoms().iter().zip(diag_pair().atoms()) {
            assert_relative_eq!(a.weight, b.weight, max_relative = 1e-10);
        }
        assert!(hat_measure_2d(&diag_pair(), 2.0).is_err());
    }

    #[test]
    fn lifted_measure_examples() {
        let mu = diag_pair();
        let lifted = lifted_measure(&mu, 1, 1, 2, DEFAULT_LIFT_DIM_CAP).unwrap();
        assert_eq!(lifted.dim(), 2);
        for (l, a) in lifted.atoms().iter().zip(mu.atoms()) {
            assert_eq!(l.weight, a.weight);
            assert_eq!(l.matrix, a.matrix.scaled(a.matrix.determinant()));
        }
        assert_eq!(lifted_measure(&mu, 1, 0, 1, DEFAULT_LIFT_DIM_CAP).unwrap(), mu);
        let three = FiniteMatrixMeasure::counting([Matrix::identity(3)]).unwrap();
        assert_eq!(lifted_measure(&three, 1, 1, 2, DEFAULT_LIFT_DIM_CAP).unwrap().dim(), 9);
        assert!(matches!(
            lifted_measure(&three, 1, 1, 2, 8),
            Err(Error::DimensionCapExceeded { dimension: 9, cap: 8 })
        ));
    }

    #[test]
    fn restriction_to_invertible_atoms() {
        let mu = diag_pair();
        assert_eq!(restrict_invertible(&mu).unwrap(), mu);
        let mixed = FiniteMatrixMeasure::counting([Matrix::identity(2), Matrix::diag(&[1.0, 0.0])]).unwrap();
        let r = restrict_invertible(&mixed).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.atoms()[0].matrix, Matrix::identity(2));
        let singular = FiniteMatrixMeasure::counting([
            Matrix::diag(&[1.0, 0.0]),
            Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap(),
        ])
        .unwrap();
        assert!(restrict_invertible(&singular).is_none());
    }

    #[test]
    fn scaling() {
        let mu = diag_pair();
        assert_eq!(scale_measure(&mu, 1.0).unwrap(), mu);
        let a = Matrix::from_rows(&[[3.0, 0.0], [4.0, 5.0]]).unwrap();
        let single = FiniteMatrixMeasure::counting([a]).unwrap();
        let unit = scale_measure(&single, 1.0 / 45f64.sqrt()).unwrap();
        assert_relative_eq!(unit.max_operator_norm(), 1.0, max_relative = 1e-14);
        assert!(scale_measure(&mu, 0.0).is_err());
    }
}
