use nalgebra::{DMatrix, DVector};

use super::sparse::CsrMatrix;
use super::{Mode, SpaceDescriptor, ATOM_DIM};
use crate::error::{Error, Result};
use crate::C64;

/// Relative tolerance used when an operator is declared Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Storage backing an [`Operator`]. Results never depend on the choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Representation {
    Dense,
    Sparse,
}

#[derive(Clone, Debug)]
enum Repr {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix),
}

/// Complex square matrix on a composite (or cavity-only) space.
#[derive(Clone, Debug)]
pub struct Operator {
    repr: Repr,
    hermitian: bool,
}

impl Operator {
    pub fn from_dense(matrix: DMatrix<C64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "operators are square");
        Self {
            repr: Repr::Dense(matrix),
            hermitian: false,
        }
    }

    pub fn from_sparse(matrix: CsrMatrix) -> Self {
        Self {
            repr: Repr::Sparse(matrix),
            hermitian: false,
        }
    }

    /// Stores `matrix` in the requested representation.
    pub fn from_csr_as(matrix: CsrMatrix, representation: Representation) -> Self {
        match representation {
            Representation::Dense => Self::from_dense(matrix.to_dense()),
            Representation::Sparse => Self::from_sparse(matrix),
        }
    }

    pub fn zero(space: &SpaceDescriptor) -> Self {
        Self::from_csr_as(CsrMatrix::zeros(space.total_dim()), space.representation()).with_hermitian_unchecked()
    }

    pub fn identity(space: &SpaceDescriptor) -> Self {
        Self::from_csr_as(CsrMatrix::identity(space.total_dim()), space.representation()).with_hermitian_unchecked()
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Dense(m) => m.nrows(),
            Repr::Sparse(m) => m.dim(),
        }
    }

    pub fn representation(&self) -> Representation {
        match self.repr {
            Repr::Dense(_) => Representation::Dense,
            Repr::Sparse(_) => Representation::Sparse,
        }
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        match &self.repr {
            Repr::Dense(m) => m[(row, col)],
            Repr::Sparse(m) => m.get(row, col),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.repr {
            Repr::Dense(m) => CsrMatrix::from_dense(m),
            Repr::Sparse(m) => m.clone(),
        }
    }

    /// Converts storage, keeping the Hermitian flag.
    pub fn into_representation(self, representation: Representation) -> Self {
        let hermitian = self.hermitian;
        let repr = match (self.repr, representation) {
            (Repr::Sparse(m), Representation::Dense) => Repr::Dense(m.to_dense()),
            (Repr::Dense(m), Representation::Sparse) => Repr::Sparse(CsrMatrix::from_dense(&m)),
            (repr, _) => repr,
        };
        Self { repr, hermitian }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => m.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Repr::Sparse(m) => m.max_abs(),
        }
    }

    /// max|A − A†| relative to max|A| (0 for the zero matrix).
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let diff = match &self.repr {
            Repr::Dense(m) => (m - m.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max),
            Repr::Sparse(m) => m.add(&m.adjoint().scale(C64::new(-1.0, 0.0))).max_abs(),
        };
        diff / scale
    }

    /// Declares the operator Hermitian after checking it.
    pub fn mark_hermitian(mut self) -> Result<Self> {
        let err = self.hermiticity_error();
        if err > HERMITIAN_TOL {
            return Err(Error::invalid(format!(
                "operator is not Hermitian: max|A - A†| / max|A| = {err:e}"
            )));
        }
        self.hermitian = true;
        Ok(self)
    }

    fn with_hermitian_unchecked(mut self) -> Self {
        self.hermitian = true;
        self
    }

    fn check_dim(&self, other: &Operator, what: &str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::invalid(format!(
                "{what}: dimension mismatch {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    fn binary(
        &self,
        other: &Operator,
        dense: impl Fn(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64>,
        sparse: impl Fn(&CsrMatrix, &CsrMatrix) -> CsrMatrix,
    ) -> Repr {
        match (&self.repr, &other.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(dense(a, b)),
            (Repr::Sparse(a), Repr::Sparse(b)) => Repr::Sparse(sparse(a, b)),
            _ => Repr::Sparse(sparse(&self.to_csr(), &other.to_csr())),
        }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_dim(other, "add")?;
        Ok(Operator {
            repr: self.binary(other, |a, b| a + b, |a, b| a.add(b)),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: C64) -> Operator {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m * factor),
            Repr::Sparse(m) => Repr::Sparse(m.scale(factor)),
        };
        Operator {
            repr,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        self.check_dim(other, "multiply")?;
        Ok(Operator {
            repr: self.binary(other, |a, b| a * b, |a, b| a.mul(b)),
            hermitian: false,
        })
    }

    pub fn dagger(&self) -> Operator {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
            Repr::Sparse(m) => Repr::Sparse(m.adjoint()),
        };
        Operator {
            repr,
            hermitian: self.hermitian,
        }
    }

    /// AB − BA
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Raw matrix-vector product `A x`; the result is not normalized.
    pub fn apply(&self, x: &DVector<C64>) -> Result<DVector<C64>> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "apply: operator dim {} vs vector length {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(match &self.repr {
            Repr::Dense(m) => m * x,
            Repr::Sparse(m) => {
                let mut y = DVector::zeros(x.len());
                m.gemv_acc(C64::new(1.0, 0.0), x.as_slice(), y.as_mut_slice());
                y
            }
        })
    }

    /// `y += alpha A x` on raw slices.
    pub fn apply_acc(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        match &self.repr {
            Repr::Dense(m) => {
                let xv = nalgebra::DVectorView::from_slice(x, x.len());
                let mut yv = nalgebra::DVectorViewMut::from_slice(y, x.len());
                yv.gemv(alpha, m, &xv, C64::new(1.0, 0.0));
            }
            Repr::Sparse(m) => m.gemv_acc(alpha, x, y),
        }
    }
}

fn ladder_matrix(n_max: usize) -> CsrMatrix {
    let triplets = (1..=n_max)
        .map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0)))
        .collect();
    CsrMatrix::from_triplets(n_max + 1, triplets)
}

/// Embeds single-factor matrices as atom ⊗ mode 1 ⊗ mode 2.
pub(crate) fn embed(
    space: &SpaceDescriptor,
    atom: Option<CsrMatrix>,
    mode1: Option<CsrMatrix>,
    mode2: Option<CsrMatrix>,
) -> CsrMatrix {
    let atom = atom.unwrap_or_else(|| CsrMatrix::identity(ATOM_DIM));
    let mode1 = mode1.unwrap_or_else(|| CsrMatrix::identity(space.n1_max() + 1));
    let mode2 = mode2.unwrap_or_else(|| CsrMatrix::identity(space.n2_max() + 1));
    atom.kron(&mode1.kron(&mode2))
}

fn mode_embed(space: &SpaceDescriptor, mode: Mode, local: CsrMatrix) -> CsrMatrix {
    match mode {
        Mode::One => embed(space, None, Some(local), None),
        Mode::Two => embed(space, None, None, Some(local)),
    }
}

/// Annihilation operator of cavity `mode` (1 or 2). Amplitude above the
/// cutoff is dropped: a†|n_max⟩ = 0.
pub fn annihilation(space: &SpaceDescriptor, mode: usize) -> Result<Operator> {
    let mode = Mode::try_from(mode)?;
    let local = ladder_matrix(space.n_max(mode));
    Ok(Operator::from_csr_as(
        mode_embed(space, mode, local),
        space.representation(),
    ))
}

pub fn creation(space: &SpaceDescriptor, mode: usize) -> Result<Operator> {
    Ok(annihilation(space, mode)?.dagger())
}

/// a†a for one mode; diagonal with entries 0..=n_max.
pub fn number(space: &SpaceDescriptor, mode: usize) -> Result<Operator> {
    let mode = Mode::try_from(mode)?;
    let n_max = space.n_max(mode);
    let local = CsrMatrix::from_triplets(
        n_max + 1,
        (0..=n_max).map(|n| (n, n, C64::new(n as f64, 0.0))).collect(),
    );
    Operator::from_csr_as(mode_embed(space, mode, local), space.representation()).mark_hermitian()
}

/// Bare atomic flip/projector |j⟩⟨k| (levels 1..=3), identity on both modes.
pub fn atomic_op(space: &SpaceDescriptor, j: usize, k: usize) -> Result<Operator> {
    let valid = 1..=ATOM_DIM;
    if !valid.contains(&j) || !valid.contains(&k) {
        return Err(Error::invalid(format!(
            "atomic levels must lie in 1..=3, got ({j}, {k})"
        )));
    }
    let local = CsrMatrix::from_triplets(ATOM_DIM, vec![(j - 1, k - 1, C64::new(1.0, 0.0))]);
    let op = Operator::from_csr_as(embed(space, Some(local), None, None), space.representation());
    Ok(if j == k { op.with_hermitian_unchecked() } else { op })
}

/// Embeds an arbitrary 3×3 atomic matrix, identity on both modes.
pub(crate) fn atomic_matrix(space: &SpaceDescriptor, m: &nalgebra::Matrix3<C64>) -> Operator {
    let triplets = (0..ATOM_DIM)
        .flat_map(|r| (0..ATOM_DIM).map(move |c| (r, c)))
        .map(|(r, c)| (r, c, m[(r, c)]))
        .collect();
    let local = CsrMatrix::from_triplets(ATOM_DIM, triplets);
    Operator::from_csr_as(embed(space, Some(local), None, None), space.representation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{make_space, BasisLabel, StateVector};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ladder_matrix_elements() {
        let space = make_space(4, 4).unwrap();
        let a = annihilation(&space, 1).unwrap();
        let idx = |n1| space.index(BasisLabel { level: 2, n1, n2: 3 });
        assert_eq!(a.get(idx(0), idx(1)), c(1.0));
        assert!((a.get(idx(2), idx(3)).re - 3f64.sqrt()).abs() < 1e-15);
        assert!((a.get(idx(2), idx(3)).re - 1.7320508).abs() < 1e-7);
        assert_eq!(a.get(idx(1), idx(1)), c(0.0));
    }

    #[test]
    fn annihilation_kills_vacuum() {
        let space = make_space(3, 3).unwrap();
        let vac = StateVector::basis(&space, BasisLabel { level: 1, n1: 0, n2: 0 });
        for mode in [1, 2] {
            let out = annihilation(&space, mode).unwrap().apply(vac.amplitudes()).unwrap();
            assert!(out.iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn invalid_indices() {
        let space = make_space(2, 2).unwrap();
        assert!(annihilation(&space, 3).is_err());
        assert!(atomic_op(&space, 0, 1).is_err());
        assert!(atomic_op(&space, 1, 4).is_err());
    }

    #[test]
    fn atomic_flips_act_on_atom_only() {
        let space = make_space(2, 2).unwrap();
        let ket = |level| StateVector::basis(&space, BasisLabel { level, n1: 0, n2: 0 });
        let s33 = atomic_op(&space, 3, 3).unwrap();
        assert_eq!(s33.apply(ket(3).amplitudes()).unwrap(), *ket(3).amplitudes());
        let s23 = atomic_op(&space, 2, 3).unwrap();
        assert_eq!(s23.apply(ket(3).amplitudes()).unwrap(), *ket(2).amplitudes());
        assert!(s23.apply(ket(1).amplitudes()).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn number_operator_is_diagonal_ladder() {
        let space = make_space(3, 5).unwrap();
        for mode in [1, 2] {
            let n = number(&space, mode).unwrap();
            let a = annihilation(&space, mode).unwrap();
            let ad = creation(&space, mode).unwrap();
            let prod = ad.mul(&a).unwrap();
            assert!((n.to_dense() - prod.to_dense()).iter().all(|v| v.norm() < 1e-14));
            for label in space.labels() {
                let i = space.index(label);
                let expect = if mode == 1 { label.n1 } else { label.n2 };
                assert_eq!(n.get(i, i), c(expect as f64));
            }
        }
    }

    #[test]
    fn canonical_commutator_on_safe_block() {
        let space = make_space(4, 3).unwrap();
        let a = annihilation(&space, 1).unwrap();
        let comm = a.commutator(&a.dagger()).unwrap();
        for r in space.labels() {
            for col in space.labels() {
                let v = comm.get(space.index(r), space.index(col));
                if r.n1 < 4 {
                    let expect = if r == col { c(1.0) } else { c(0.0) };
                    assert!((v - expect).norm() < 1e-14, "{r:?} {col:?}");
                }
            }
        }
    }

    #[test]
    fn algebra_identities() {
        let space = make_space(2, 3).unwrap();
        let a1 = annihilation(&space, 1).unwrap();
        let a2 = annihilation(&space, 2).unwrap();
        let s32 = atomic_op(&space, 3, 2).unwrap();
        let x = a1.mul(&s32).unwrap().scale(C64::new(0.3, -0.7)).add(&a2).unwrap();
        assert_eq!(x.dagger().dagger().to_dense(), x.to_dense());
        let h = x.add(&x.dagger()).unwrap();
        assert!(h.hermiticity_error() < 1e-15);
        let h = h.mark_hermitian().unwrap();
        assert!(h.commutator(&h).unwrap().max_abs() < 1e-15);
        assert!(x.mark_hermitian().is_err());
        let other = annihilation(&make_space(1, 1).unwrap(), 1).unwrap();
        assert!(a1.add(&other).is_err());
        assert!(a1.mul(&other).is_err());
        assert!(a1.commutator(&other).is_err());
    }

    #[test]
    fn representation_is_not_semantic() {
        let dense = make_space(3, 2).unwrap();
        let sparse = dense.with_representation(Representation::Sparse);
        let build = |space: &SpaceDescriptor| {
            let a1 = annihilation(space, 1).unwrap();
            let a2 = annihilation(space, 2).unwrap();
            let s = atomic_op(space, 3, 2).unwrap();
            let t = a1.mul(&a2).unwrap().mul(&s).unwrap();
            t.add(&t.dagger()).unwrap().commutator(&a1).unwrap()
        };
        let d = build(&dense);
        let s = build(&sparse);
        assert_eq!(d.representation(), Representation::Dense);
        assert_eq!(s.representation(), Representation::Sparse);
        assert!((d.to_dense() - s.to_dense()).iter().all(|v| v.norm() < 1e-15));
        let mixed = d.add(&s).unwrap();
        assert!((mixed.to_dense() - d.to_dense() * c(2.0))
            .iter()
            .all(|v| v.norm() < 1e-14));
    }
}
