//! Dense states, spectra and time evolution.
//!
//! Composite system-fridge spaces put the fridge qubit last: the composite
//! index of `|s> ⊗ |f>` is `2 * s + f`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SectorSpec;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type RMatrix = DMatrix<f64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance for accepting a matrix as Hermitian, relative to its scale.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues closer than this (relative to the spectral scale) are treated
/// as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-9;

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut err = 0.0f64;
    for i in 0..n {
        for j in i..n {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn real_part(m: &CMatrix) -> RMatrix {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMatrix) -> RMatrix {
    m.map(|z| z.im)
}

pub fn complexify(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

fn combine(re: &RMatrix, im: &RMatrix) -> CMatrix {
    re.zip_map(im, Complex64::new)
}

/// Outer product `|a><b|`.
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Space a state lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Sector { n_sites: usize, sector: SectorSpec },
    Full { n_qubits: usize },
    Generic { dim: usize },
}

impl Space {
    pub fn dim(&self) -> usize {
        match *self {
            Space::Sector { n_sites, sector } => {
                crate::lattice::binomial(n_sites, sector.n_up)
                    * crate::lattice::binomial(n_sites, sector.n_down)
            }
            Space::Full { n_qubits } => 1 << n_qubits,
            Space::Generic { dim } => dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisTag {
    pub space: Space,
    pub fridge: bool,
}

impl BasisTag {
    pub fn new(space: Space) -> Self {
        BasisTag {
            space,
            fridge: false,
        }
    }

    pub fn generic(dim: usize) -> Self {
        BasisTag::new(Space::Generic { dim })
    }

    pub fn with_fridge(self) -> Self {
        BasisTag {
            fridge: true,
            ..self
        }
    }

    pub fn without_fridge(self) -> Self {
        BasisTag {
            fridge: false,
            ..self
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim() * if self.fridge { 2 } else { 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Pure(CVector),
    Density(CMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub data: StateData,
    pub tag: BasisTag,
}

impl QuantumState {
    pub fn pure(v: CVector, tag: BasisTag) -> Result<Self> {
        check_dim(tag.dim(), v.len())?;
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("vector norm {norm}")));
        }
        Ok(QuantumState {
            data: StateData::Pure(v),
            tag,
        })
    }

    /// Pure state after rescaling to unit norm.
    pub fn pure_normalized(v: CVector, tag: BasisTag) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::ZeroOperator);
        }
        QuantumState::pure(v / Complex64::new(norm, 0.0), tag)
    }

    pub fn density(rho: CMatrix, tag: BasisTag) -> Result<Self> {
        check_dim(tag.dim(), rho.nrows())?;
        check_dim(rho.nrows(), rho.ncols())?;
        let herm = hermiticity_error(&rho);
        if herm > 1e-10 {
            return Err(Error::NotHermitian(herm));
        }
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        Ok(QuantumState {
            data: StateData::Density(rho),
            tag,
        })
    }

    /// Density state without validation; for internal use on outputs of
    /// trace-preserving maps.
    pub fn density_unchecked(rho: CMatrix, tag: BasisTag) -> Self {
        QuantumState {
            data: StateData::Density(rho),
            tag,
        }
    }

    pub fn basis_state(index: usize, tag: BasisTag) -> Result<Self> {
        let dim = tag.dim();
        if index >= dim {
            return Err(Error::InvalidIndex(format!("basis index {index} >= {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        QuantumState::pure(v, tag)
    }

    pub fn dim(&self) -> usize {
        match &self.data {
            StateData::Pure(v) => v.len(),
            StateData::Density(m) => m.nrows(),
        }
    }

    pub fn is_pure_repr(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn to_density_matrix(&self) -> CMatrix {
        match &self.data {
            StateData::Pure(v) => outer(v, v),
            StateData::Density(m) => m.clone(),
        }
    }

    pub fn into_density(self) -> QuantumState {
        let rho = self.to_density_matrix();
        QuantumState::density_unchecked(rho, self.tag)
    }

    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared(),
            StateData::Density(m) => m.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared().powi(2),
            StateData::Density(m) => m.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// `Tr(rho O)` (real part; `O` assumed Hermitian).
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        match &self.data {
            StateData::Pure(v) => (v.adjoint() * op * v)[(0, 0)].re,
            StateData::Density(m) => trace_product(m, op).re,
        }
    }

    /// Populations in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        match &self.data {
            StateData::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            StateData::Density(m) => m.diagonal().iter().map(|z| z.re).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.data {
            StateData::Pure(v) => {
                let n = v.norm();
                if (n - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidState(format!("vector norm {n}")));
                }
            }
            StateData::Density(m) => {
                let herm = hermiticity_error(m);
                if herm > 1e-10 {
                    return Err(Error::NotHermitian(herm));
                }
                let tr = m.trace().re;
                if (tr - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidState(format!("trace {tr}")));
                }
                let spec = eigh(m)?;
                if spec.eigenvalues[0] < -1e-10 {
                    return Err(Error::InvalidState(format!(
                        "negative eigenvalue {}",
                        spec.eigenvalues[0]
                    )));
                }
            }
        }
        Ok(())
    }

    /// `self ⊗ fridge`, always as a density matrix.
    pub fn tensor_fridge(&self, rho_f: &CMatrix) -> Result<QuantumState> {
        if self.tag.fridge {
            return Err(Error::BasisMismatch(
                "state already has a fridge factor".into(),
            ));
        }
        check_dim(2, rho_f.nrows())?;
        Ok(QuantumState::density_unchecked(
            kron(&self.to_density_matrix(), rho_f),
            self.tag.with_fridge(),
        ))
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_energy(&self) -> f64 {
        *self.eigenvalues.last().expect("empty spectrum")
    }

    /// Number of levels degenerate with the ground state.
    pub fn ground_degeneracy(&self) -> usize {
        let tol = degeneracy_tol(&self.eigenvalues);
        self.eigenvalues
            .iter()
            .take_while(|&&e| e - self.eigenvalues[0] <= tol)
            .count()
    }

    /// Smallest strictly positive gap above the ground energy.
    pub fn first_gap(&self) -> Option<f64> {
        let tol = degeneracy_tol(&self.eigenvalues);
        self.eigenvalues
            .iter()
            .map(|e| e - self.eigenvalues[0])
            .find(|&g| g > tol)
    }

    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&e| Complex64::new(e, 0.0)),
        ));
        v * d * v.adjoint()
    }

    /// Ground-state projector, uniform over an exactly degenerate ground manifold.
    pub fn ground_projector(&self) -> CMatrix {
        let g = self.ground_degeneracy();
        let cols = self.eigenvectors.columns(0, g);
        let p = cols * cols.adjoint();
        p / Complex64::new(g as f64, 0.0)
    }
}

fn degeneracy_tol(values: &[f64]) -> f64 {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    DEGENERACY_TOL * scale
}

/// Full Hermitian eigendecomposition, eigenvalues ascending.
///
/// Vectors inside a degenerate cluster are replaced by a canonical basis of
/// the cluster's eigenspace: columns of the cluster projector are picked by
/// largest residual norm (lowest index on ties) and orthonormalized in that
/// order, so the result does not depend on the solver's internal choices.
/// Every vector is phased so its largest-magnitude entry is real and positive.
pub fn eigh(h: &CMatrix) -> Result<Spectrum> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            got: h.ncols(),
        });
    }
    let n = h.nrows();
    let scale = max_abs(h).max(1.0);
    let herm = hermiticity_error(h);
    if herm > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(herm));
    }
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let (values, vectors) = if is_real(h) {
        let sym = real_part(h);
        let sym = (&sym + sym.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
            complexify(&eig.eigenvectors),
        )
    } else {
        let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect::<Vec<_>>(),
            eig.eigenvectors,
        )
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &vectors.column(src));
    }
    canonicalize_clusters(&eigenvalues, &mut eigenvectors);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

fn canonicalize_clusters(values: &[f64], vectors: &mut CMatrix) {
    let tol = degeneracy_tol(values);
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let canon = canonical_basis(&block);
            for (k, col) in canon.into_iter().enumerate() {
                vectors.set_column(start + k, &col);
            }
        } else {
            let mut col = vectors.column(start).into_owned();
            fix_phase(&mut col);
            vectors.set_column(start, &col);
        }
        start = end;
    }
}

/// Deterministic orthonormal basis of the column span of `block`.
pub fn canonical_basis(block: &CMatrix) -> Vec<CVector> {
    let rank = block.ncols();
    let projector = block * block.adjoint();
    let mut residual: Vec<CVector> = (0..projector.ncols())
        .map(|c| projector.column(c).into_owned())
        .collect();
    let mut basis: Vec<CVector> = Vec::with_capacity(rank);
    for _ in 0..rank {
        let mut best = 0;
        let mut best_norm = -1.0;
        for (c, r) in residual.iter().enumerate() {
            let norm = r.norm();
            if norm > best_norm * (1.0 + 1e-9) + 1e-14 {
                best = c;
                best_norm = norm;
            }
        }
        let mut v = residual[best].clone() / Complex64::new(best_norm, 0.0);
        // one reorthogonalization pass for stability
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        v /= Complex64::new(v.norm(), 0.0);
        fix_phase(&mut v);
        for r in residual.iter_mut() {
            let overlap = v.dotc(r);
            *r -= &v * overlap;
        }
        basis.push(v);
    }
    basis
}

/// Rotates `v` so that its largest-magnitude entry (lowest index on ties) is
/// real and positive.
pub fn fix_phase(v: &mut CVector) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs * (1.0 + 1e-9) + 1e-14 {
            best = i;
            best_abs = a;
        }
    }
    if best_abs <= 0.0 {
        return;
    }
    let phase = v[best].conj() / Complex64::new(best_abs, 0.0);
    *v *= phase;
    v[best] = Complex64::new(v[best].re, 0.0);
}

/// `exp(-i H t)` factored through a spectral decomposition, with a purely real
/// path when `H` is real symmetric.
#[derive(Debug, Clone)]
pub enum Propagator {
    Real {
        energies: Vec<f64>,
        vectors: RMatrix,
    },
    Complex {
        energies: Vec<f64>,
        vectors: CMatrix,
    },
}

impl Propagator {
    pub fn new(h: &CMatrix) -> Result<Self> {
        let spec = eigh(h)?;
        if is_real(&spec.eigenvectors) {
            Ok(Propagator::Real {
                energies: spec.eigenvalues,
                vectors: real_part(&spec.eigenvectors),
            })
        } else {
            Ok(Propagator::Complex {
                energies: spec.eigenvalues,
                vectors: spec.eigenvectors,
            })
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Propagator::Real { energies, .. } | Propagator::Complex { energies, .. } => {
                energies.len()
            }
        }
    }

    fn phases(energies: &[f64], t: f64) -> Vec<Complex64> {
        energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .collect()
    }

    /// Dense unitary `exp(-iHt)`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        match self {
            Propagator::Real { energies, vectors } => {
                let v = complexify(vectors);
                let d = CMatrix::from_diagonal(&CVector::from_vec(Self::phases(energies, t)));
                &v * d * v.transpose()
            }
            Propagator::Complex { energies, vectors } => {
                let d = CMatrix::from_diagonal(&CVector::from_vec(Self::phases(energies, t)));
                vectors * d * vectors.adjoint()
            }
        }
    }

    pub fn apply_vector(&self, psi: &CVector, t: f64) -> CVector {
        match self {
            Propagator::Real { energies, vectors } => {
                let re = psi.map(|z| z.re);
                let im = psi.map(|z| z.im);
                let cr = vectors.tr_mul(&re);
                let ci = vectors.tr_mul(&im);
                let ph = Self::phases(energies, t);
                let mut out_re = DVector::zeros(psi.len());
                let mut out_im = DVector::zeros(psi.len());
                let mut rot_re = DVector::zeros(psi.len());
                let mut rot_im = DVector::zeros(psi.len());
                for k in 0..psi.len() {
                    let z = Complex64::new(cr[k], ci[k]) * ph[k];
                    rot_re[k] = z.re;
                    rot_im[k] = z.im;
                }
                out_re.gemv(1.0, vectors, &rot_re, 0.0);
                out_im.gemv(1.0, vectors, &rot_im, 0.0);
                out_re.zip_map(&out_im, Complex64::new)
            }
            Propagator::Complex { energies, vectors } => {
                let mut c = vectors.adjoint() * psi;
                for (k, p) in Self::phases(energies, t).into_iter().enumerate() {
                    c[k] *= p;
                }
                vectors * c
            }
        }
    }

    pub fn apply_density(&self, rho: &CMatrix, t: f64) -> CMatrix {
        match self {
            Propagator::Real { energies, vectors } => {
                // rotate into the eigenbasis with real products on each part
                let vt = vectors.transpose();
                let re = real_part(rho);
                let im = imag_part(rho);
                let sr = &vt * re * vectors;
                let si = &vt * im * vectors;
                let ph = Self::phases(energies, t);
                let n = energies.len();
                let mut rr = RMatrix::zeros(n, n);
                let mut ri = RMatrix::zeros(n, n);
                for b in 0..n {
                    for a in 0..n {
                        let z = Complex64::new(sr[(a, b)], si[(a, b)]) * ph[a] * ph[b].conj();
                        rr[(a, b)] = z.re;
                        ri[(a, b)] = z.im;
                    }
                }
                let out_re = vectors * rr * &vt;
                let out_im = vectors * ri * &vt;
                combine(&out_re, &out_im)
            }
            Propagator::Complex { energies, vectors } => {
                let mut s = vectors.adjoint() * rho * vectors;
                let ph = Self::phases(energies, t);
                for b in 0..s.ncols() {
                    for a in 0..s.nrows() {
                        s[(a, b)] *= ph[a] * ph[b].conj();
                    }
                }
                vectors * s * vectors.adjoint()
            }
        }
    }

    pub fn apply(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        check_dim(self.dim(), state.dim())?;
        let data = match &state.data {
            StateData::Pure(v) => StateData::Pure(self.apply_vector(v, t)),
            StateData::Density(m) => StateData::Density(self.apply_density(m, t)),
        };
        Ok(QuantumState {
            data,
            tag: state.tag,
        })
    }
}

/// Applies `exp(-iHt)` to a state.
pub fn evolve_exact(h: &CMatrix, state: &QuantumState, t: f64) -> Result<QuantumState> {
    check_dim(h.nrows(), state.dim())?;
    if t == 0.0 {
        return Ok(state.clone());
    }
    Propagator::new(h)?.apply(state, t)
}

/// First-order product formula `(prod_k exp(-i H_k t/n))^n`; the first part
/// acts first within each step.
pub fn evolve_trotter(
    parts: &[CMatrix],
    state: &QuantumState,
    t: f64,
    n_steps: usize,
) -> Result<QuantumState> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    for p in parts {
        check_dim(p.nrows(), state.dim())?;
    }
    let dt = t / n_steps as f64;
    let props = parts
        .iter()
        .map(Propagator::new)
        .collect::<Result<Vec<_>>>()?;
    let mut out = state.clone();
    for _ in 0..n_steps {
        for p in &props {
            out = p.apply(&out, dt)?;
        }
    }
    Ok(out)
}

/// Traces out the fridge qubit (last tensor factor).
pub fn partial_trace_fridge(state: &QuantumState) -> Result<QuantumState> {
    if !state.tag.fridge {
        return Err(Error::NoFridgeFactor);
    }
    let rho = state.to_density_matrix();
    Ok(QuantumState::density_unchecked(
        partial_trace_last_qubit(&rho)?,
        state.tag.without_fridge(),
    ))
}

pub fn partial_trace_last_qubit(rho: &CMatrix) -> Result<CMatrix> {
    let n = rho.nrows();
    if !n.is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: n,
        });
    }
    let d = n / 2;
    Ok(CMatrix::from_fn(d, d, |i, j| {
        rho[(2 * i, 2 * j)] + rho[(2 * i + 1, 2 * j + 1)]
    }))
}

/// Reduced fridge density matrix.
pub fn fridge_reduced(rho: &CMatrix) -> CMatrix {
    let d = rho.nrows() / 2;
    let mut out = CMatrix::zeros(2, 2);
    for s in 0..d {
        for a in 0..2 {
            for b in 0..2 {
                out[(a, b)] += rho[(2 * s + a, 2 * s + b)];
            }
        }
    }
    out
}

/// Square root of a positive semidefinite Hermitian matrix, negative
/// eigenvalues clamped to zero.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let spec = eigh(m)?;
    let v = &spec.eigenvectors;
    let d = CMatrix::from_diagonal(&DVector::from_iterator(
        spec.dim(),
        spec.eigenvalues
            .iter()
            .map(|&e| Complex64::new(e.max(0.0).sqrt(), 0.0)),
    ));
    Ok(v * d * v.adjoint())
}

/// Squared fidelity: `|<a|b>|^2` for pure pairs, Uhlmann
/// `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2` otherwise. Clamped to [0, 1].
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.tag != b.tag {
        return Err(Error::BasisMismatch(format!("{:?} vs {:?}", a.tag, b.tag)));
    }
    check_dim(a.dim(), b.dim())?;
    let f = match (&a.data, &b.data) {
        (StateData::Pure(x), StateData::Pure(y)) => x.dotc(y).norm_sqr(),
        (StateData::Pure(x), StateData::Density(m))
        | (StateData::Density(m), StateData::Pure(x)) => (x.adjoint() * m * x)[(0, 0)].re,
        (StateData::Density(r), StateData::Density(s)) => {
            let sr = psd_sqrt(r)?;
            let inner = &sr * s * &sr;
            let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
            let spec = eigh(&inner)?;
            let tr: f64 = spec.eigenvalues.iter().map(|&e| e.max(0.0).sqrt()).sum();
            tr * tr
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Trace distance `||a - b||_1 / 2`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    let spec = eigh(&(a - b))?;
    Ok(0.5 * spec.eigenvalues.iter().map(|e| e.abs()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Beta::Infinite)
    }
}

/// Boltzmann weights `e^{-beta E_j} / Z`, uniform over the ground manifold at
/// infinite beta.
pub fn gibbs_populations(energies: &[f64], beta: Beta) -> Vec<f64> {
    if energies.is_empty() {
        return Vec::new();
    }
    let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
    match beta {
        Beta::Finite(b) => {
            let w: Vec<f64> = energies.iter().map(|&e| (-b * (e - e0)).exp()).collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|x| x / z).collect()
        }
        Beta::Infinite => {
            let tol = degeneracy_tol(energies);
            let ground: Vec<bool> = energies.iter().map(|&e| e - e0 <= tol).collect();
            let g = ground.iter().filter(|&&x| x).count() as f64;
            ground
                .into_iter()
                .map(|x| if x { 1.0 / g } else { 0.0 })
                .collect()
        }
    }
}

pub fn gibbs_state(spec: &Spectrum, beta: Beta) -> CMatrix {
    let pops = gibbs_populations(&spec.eigenvalues, beta);
    let v = &spec.eigenvectors;
    let d = CMatrix::from_diagonal(&DVector::from_iterator(
        spec.dim(),
        pops.iter().map(|&p| Complex64::new(p, 0.0)),
    ));
    v * d * v.adjoint()
}
