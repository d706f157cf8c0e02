//! Composite Hilbert space of one three-level atom and two truncated
//! bosonic modes, with the operators and states that live on it.
//!
//! Tensor factors are ordered atom ⊗ mode 1 ⊗ mode 2 with the atom index
//! slowest and the mode-2 photon number fastest:
//!
//! ```text
//! index(level, n1, n2) = ((level - 1) * (n1_max + 1) + n1) * (n2_max + 1) + n2
//! ```
//!
//! which is the ordering produced by `kron(atom, kron(mode1, mode2))`. Atomic
//! levels are labelled 1, 2, 3 with |3⟩ the common excited state.

pub(crate) mod operator;
mod sparse;
mod state;

pub use operator::{annihilation, atomic_op, creation, number, Operator, Representation};
pub use sparse::CsrMatrix;
pub use state::{expectation, partial_trace_atom, partial_trace_cavity, DensityMatrix, StateVector};

use crate::error::{Error, Result};

/// Number of atomic levels.
pub const ATOM_DIM: usize = 3;

/// Spaces up to this dimension default to dense operator storage.
pub const DENSE_DIM_LIMIT: usize = 1500;

/// Cavity mode selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    One,
    Two,
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    fn try_from(mode: usize) -> Result<Self> {
        match mode {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            other => Err(Error::invalid(format!("cavity mode must be 1 or 2, got {other}"))),
        }
    }
}

/// Label of one product basis state |level⟩|n1⟩|n2⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    /// Atomic level, 1-based.
    pub level: usize,
    pub n1: usize,
    pub n2: usize,
}

/// Atom ⊗ Fock(n1_max) ⊗ Fock(n2_max).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpaceDescriptor {
    n1_max: usize,
    n2_max: usize,
    representation: Representation,
}

/// Builds a space with Fock states `0..=n1_max` and `0..=n2_max`.
pub fn make_space(n1_max: usize, n2_max: usize) -> Result<SpaceDescriptor> {
    SpaceDescriptor::new(n1_max, n2_max)
}

impl SpaceDescriptor {
    pub fn new(n1_max: usize, n2_max: usize) -> Result<Self> {
        if n1_max < 1 || n2_max < 1 {
            return Err(Error::invalid(format!(
                "Fock cutoffs must be at least 1, got ({n1_max}, {n2_max})"
            )));
        }
        let total = ATOM_DIM * (n1_max + 1) * (n2_max + 1);
        let representation = if total <= DENSE_DIM_LIMIT {
            Representation::Dense
        } else {
            Representation::Sparse
        };
        Ok(Self {
            n1_max,
            n2_max,
            representation,
        })
    }

    /// Overrides the storage used by operator builders on this space.
    pub fn with_representation(mut self, representation: Representation) -> Self {
        self.representation = representation;
        self
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn n1_max(&self) -> usize {
        self.n1_max
    }

    pub fn n2_max(&self) -> usize {
        self.n2_max
    }

    pub fn n_max(&self, mode: Mode) -> usize {
        match mode {
            Mode::One => self.n1_max,
            Mode::Two => self.n2_max,
        }
    }

    /// Dimension of the two-mode cavity factor.
    pub fn cavity_dim(&self) -> usize {
        (self.n1_max + 1) * (self.n2_max + 1)
    }

    pub fn total_dim(&self) -> usize {
        ATOM_DIM * self.cavity_dim()
    }

    pub fn index(&self, label: BasisLabel) -> usize {
        debug_assert!((1..=ATOM_DIM).contains(&label.level));
        debug_assert!(label.n1 <= self.n1_max && label.n2 <= self.n2_max);
        (label.level - 1) * self.cavity_dim() + self.cavity_index(label.n1, label.n2)
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        debug_assert!(index < self.total_dim());
        let (n1, n2) = self.cavity_label(index % self.cavity_dim());
        BasisLabel {
            level: index / self.cavity_dim() + 1,
            n1,
            n2,
        }
    }

    pub fn cavity_index(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.n2_max + 1) + n2
    }

    pub fn cavity_label(&self, index: usize) -> (usize, usize) {
        (index / (self.n2_max + 1), index % (self.n2_max + 1))
    }

    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        (0..self.total_dim()).map(|i| self.label(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dimensions() {
        assert_eq!(make_space(4, 4).unwrap().total_dim(), 75);
        assert_eq!(make_space(1, 1).unwrap().total_dim(), 12);
        assert_eq!(make_space(10, 10).unwrap().total_dim(), 363);
        assert_eq!(make_space(2, 5).unwrap().cavity_dim(), 18);
    }

    #[test]
    fn zero_cutoff_rejected() {
        assert!(matches!(make_space(0, 3), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_space(3, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn large_spaces_default_to_sparse() {
        assert_eq!(make_space(10, 10).unwrap().representation(), Representation::Dense);
        assert_eq!(make_space(40, 40).unwrap().representation(), Representation::Sparse);
    }

    #[test]
    fn mode_validation() {
        assert_eq!(Mode::try_from(2).unwrap(), Mode::Two);
        assert!(Mode::try_from(0).is_err());
        assert!(Mode::try_from(3).is_err());
    }

    proptest! {
        #[test]
        fn index_map_is_a_bijection(n1_max in 1usize..7, n2_max in 1usize..7) {
            let space = make_space(n1_max, n2_max).unwrap();
            let mut seen = vec![false; space.total_dim()];
            for level in 1..=ATOM_DIM {
                for n1 in 0..=n1_max {
                    for n2 in 0..=n2_max {
                        let label = BasisLabel { level, n1, n2 };
                        let i = space.index(label);
                        prop_assert!(!seen[i]);
                        seen[i] = true;
                        prop_assert_eq!(space.label(i), label);
                    }
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }
}
