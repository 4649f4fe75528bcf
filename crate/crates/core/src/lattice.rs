//! Rectangular Hubbard lattices and fermionic operators in the occupation basis.
//!
//! Spin-orbitals are interleaved: mode `p = 2 * site + spin` with spin 0 for up
//! and 1 for down, sites in row-major order. A Fock basis state is a bit-mask
//! over modes, and `|mask>` is defined as `a†_{p1} a†_{p2} ... |vac>` with
//! `p1 < p2 < ...`, so applying `a_p` or `a†_p` picks up the sign
//! `(-1)^(number of occupied modes below p)`.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::CMatrix;

/// Largest mode count for which full Fock-space matrices are built.
pub const MAX_FULL_SPACE_MODES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Spin-orbital index of `site` with `spin`.
pub fn mode(site: usize, spin: Spin) -> usize {
    2 * site + spin.index()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    pub hopping_t: f64,
    #[serde(rename = "coulomb_U")]
    pub coulomb_u: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(rows: usize, cols: usize, hopping_t: f64, coulomb_u: f64) -> Self {
        LatticeSpec {
            rows,
            cols,
            hopping_t,
            coulomb_u,
            boundary: Boundary::Open,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidLattice(format!(
                "{}x{} grid has no sites",
                self.rows, self.cols
            )));
        }
        if !self.hopping_t.is_finite() || !self.coulomb_u.is_finite() {
            return Err(Error::InvalidLattice("t and U must be finite".into()));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites()
    }

    /// Nearest-neighbour bonds `(i, j)` with `i < j`, deduplicated.
    ///
    /// Periodic wrapping is skipped along a dimension of length 1 (self bond)
    /// and collapses onto the open bond along a dimension of length 2.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = BTreeSet::new();
        let site = |r: usize, c: usize| r * self.cols + c;
        let periodic = self.boundary == Boundary::Periodic;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let here = site(r, c);
                let right = if c + 1 < self.cols {
                    Some(site(r, c + 1))
                } else if periodic {
                    Some(site(r, 0))
                } else {
                    None
                };
                let down = if r + 1 < self.rows {
                    Some(site(r + 1, c))
                } else if periodic {
                    Some(site(0, c))
                } else {
                    None
                };
                for other in [right, down].into_iter().flatten() {
                    if other != here {
                        edges.insert((here.min(other), here.max(other)));
                    }
                }
            }
        }
        edges.into_iter().collect()
    }

    /// Same lattice with the given couplings.
    pub fn with_couplings(&self, hopping_t: f64, coulomb_u: f64) -> Self {
        LatticeSpec {
            hopping_t,
            coulomb_u,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSpec {
    pub n_up: usize,
    pub n_down: usize,
}

impl SectorSpec {
    pub fn new(n_up: usize, n_down: usize) -> Self {
        SectorSpec { n_up, n_down }
    }

    pub fn n_particles(&self) -> usize {
        self.n_up + self.n_down
    }
}

impl fmt::Display for SectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n_up, self.n_down)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder {
            mode,
            dagger: false,
        }
    }

    pub fn adjoint(self) -> Self {
        Ladder {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }

    /// Acts on a basis mask; `None` when the state is annihilated.
    #[inline]
    pub fn apply(self, mask: u64) -> Option<(u64, f64)> {
        let bit = 1u64 << self.mode;
        let occupied = mask & bit != 0;
        if occupied == self.dagger {
            return None;
        }
        let sign = if (mask & (bit - 1)).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        Some((mask ^ bit, sign))
    }
}

/// Coefficient times an ordered product of ladder operators (leftmost acts last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderTerm {
    pub coefficient: Complex64,
    pub factors: Vec<Ladder>,
}

impl LadderTerm {
    pub fn new(coefficient: Complex64, factors: Vec<Ladder>) -> Self {
        LadderTerm {
            coefficient,
            factors,
        }
    }

    pub fn identity(coefficient: Complex64) -> Self {
        LadderTerm {
            coefficient,
            factors: Vec::new(),
        }
    }

    /// `a†_p a_q` with the given coefficient.
    pub fn hop(coefficient: f64, p: usize, q: usize) -> Self {
        LadderTerm::new(
            Complex64::new(coefficient, 0.0),
            vec![Ladder::create(p), Ladder::annihilate(q)],
        )
    }

    pub fn number(coefficient: f64, p: usize) -> Self {
        LadderTerm::hop(coefficient, p, p)
    }

    pub fn adjoint(&self) -> Self {
        LadderTerm {
            coefficient: self.coefficient.conj(),
            factors: self.factors.iter().rev().map(|f| f.adjoint()).collect(),
        }
    }

    #[inline]
    pub fn apply(&self, mask: u64) -> Option<(u64, f64)> {
        let mut state = mask;
        let mut sign = 1.0;
        for factor in self.factors.iter().rev() {
            let (next, s) = factor.apply(state)?;
            state = next;
            sign *= s;
        }
        Some((state, sign))
    }
}

/// Weighted sum of ladder-operator products on `n_modes` spin-orbitals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockSum {
    pub n_modes: usize,
    pub terms: Vec<LadderTerm>,
}

impl FockSum {
    pub fn zero(n_modes: usize) -> Self {
        FockSum {
            n_modes,
            terms: Vec::new(),
        }
    }

    pub fn from_terms(n_modes: usize, terms: Vec<LadderTerm>) -> Self {
        FockSum { n_modes, terms }
    }

    pub fn identity(n_modes: usize) -> Self {
        FockSum::from_terms(
            n_modes,
            vec![LadderTerm::identity(Complex64::new(1.0, 0.0))],
        )
    }

    /// Linear combination `sum_p c_p a_p` (or `a†_p` when `dagger`).
    pub fn linear(n_modes: usize, coefficients: &[(usize, Complex64)], dagger: bool) -> Self {
        let terms = coefficients
            .iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|&(p, c)| LadderTerm::new(c, vec![Ladder { mode: p, dagger }]))
            .collect();
        FockSum::from_terms(n_modes, terms)
    }

    pub fn push(&mut self, term: LadderTerm) {
        self.terms.push(term);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        FockSum {
            n_modes: self.n_modes,
            terms: self
                .terms
                .iter()
                .map(|t| LadderTerm::new(t.coefficient * factor, t.factors.clone()))
                .collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        FockSum {
            n_modes: self.n_modes,
            terms: self.terms.iter().map(LadderTerm::adjoint).collect(),
        }
    }

    /// Expanded product; the term count is the product of the input counts.
    pub fn product(&self, other: &FockSum) -> Self {
        let n_modes = self.n_modes.max(other.n_modes);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let coefficient = a.coefficient * b.coefficient;
                if coefficient.norm() == 0.0 {
                    continue;
                }
                let mut factors = Vec::with_capacity(a.factors.len() + b.factors.len());
                factors.extend_from_slice(&a.factors);
                factors.extend_from_slice(&b.factors);
                terms.push(LadderTerm::new(coefficient, factors));
            }
        }
        FockSum { n_modes, terms }
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|t| t.factors.iter().map(|f| f.mode))
            .max()
    }

    pub fn is_quartic_free(&self) -> bool {
        self.terms.iter().all(|t| t.factors.len() <= 2)
    }

    /// Sum of absolute coefficients, an upper bound on the operator norm.
    pub fn coefficient_one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.norm()).sum()
    }

    /// Image of a basis state as `(mask, amplitude)` pairs, unmerged.
    pub fn apply_to_mask(&self, mask: u64) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.terms
            .iter()
            .filter_map(move |t| t.apply(mask).map(|(out, sign)| (out, t.coefficient * sign)))
    }
}

impl Add for FockSum {
    type Output = FockSum;

    fn add(mut self, rhs: FockSum) -> FockSum {
        self.n_modes = self.n_modes.max(rhs.n_modes);
        self.terms.extend(rhs.terms);
        self
    }
}

impl Mul<Complex64> for FockSum {
    type Output = FockSum;

    fn mul(self, rhs: Complex64) -> FockSum {
        self.scale(rhs)
    }
}

impl Mul<f64> for FockSum {
    type Output = FockSum;

    fn mul(self, rhs: f64) -> FockSum {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

/// `-t sum_<ij>,s (a†_is a_js + h.c.) + U sum_i n_i,up n_i,down`.
pub fn build_hubbard(spec: &LatticeSpec) -> FockSum {
    let mut op = hopping_part(spec);
    op.terms.extend(coulomb_part(spec).terms);
    op
}

/// Hubbard model with `U` forced to zero.
pub fn build_free(spec: &LatticeSpec) -> FockSum {
    hopping_part(spec)
}

/// Hubbard model with `t` forced to zero (the atomic limit).
pub fn build_coulomb(spec: &LatticeSpec) -> FockSum {
    coulomb_part(spec)
}

fn hopping_part(spec: &LatticeSpec) -> FockSum {
    let mut op = FockSum::zero(spec.n_modes());
    if spec.hopping_t == 0.0 {
        return op;
    }
    for (i, j) in spec.edges() {
        for spin in [Spin::Up, Spin::Down] {
            let (p, q) = (mode(i, spin), mode(j, spin));
            op.push(LadderTerm::hop(-spec.hopping_t, p, q));
            op.push(LadderTerm::hop(-spec.hopping_t, q, p));
        }
    }
    op
}

fn coulomb_part(spec: &LatticeSpec) -> FockSum {
    let mut op = FockSum::zero(spec.n_modes());
    if spec.coulomb_u == 0.0 {
        return op;
    }
    for site in 0..spec.n_sites() {
        op.push(double_occupancy_term(spec.coulomb_u, site));
    }
    op
}

/// `coefficient * n_i,up n_i,down`.
pub fn double_occupancy_term(coefficient: f64, site: usize) -> LadderTerm {
    let (up, down) = (mode(site, Spin::Up), mode(site, Spin::Down));
    LadderTerm::new(
        Complex64::new(coefficient, 0.0),
        vec![
            Ladder::create(up),
            Ladder::annihilate(up),
            Ladder::create(down),
            Ladder::annihilate(down),
        ],
    )
}

/// Total number operator of one spin species.
pub fn spin_number_operator(n_sites: usize, spin: Spin) -> FockSum {
    let terms = (0..n_sites)
        .map(|site| LadderTerm::number(1.0, mode(site, spin)))
        .collect();
    FockSum::from_terms(2 * n_sites, terms)
}

const UP_MASK: u64 = 0x5555_5555_5555_5555;

/// Number of up and down particles in a mask.
pub fn mask_occupations(mask: u64) -> (usize, usize) {
    (
        (mask & UP_MASK).count_ones() as usize,
        (mask & !UP_MASK).count_ones() as usize,
    )
}

/// Fixed-particle-number basis, masks in ascending numeric order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorBasis {
    pub n_sites: usize,
    pub sector: SectorSpec,
    pub states: Vec<u64>,
}

impl SectorBasis {
    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.states.binary_search(&mask).ok()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn sector_basis(n_sites: usize, sector: SectorSpec) -> Result<SectorBasis> {
    if sector.n_up > n_sites || sector.n_down > n_sites {
        return Err(Error::SectorOutOfRange { sector, n_sites });
    }
    if 2 * n_sites > 63 {
        return Err(Error::InvalidLattice(format!(
            "{n_sites} sites exceed the 31-site mask limit"
        )));
    }
    let ups = spin_masks(n_sites, sector.n_up, Spin::Up);
    let downs = spin_masks(n_sites, sector.n_down, Spin::Down);
    let mut states: Vec<u64> = ups
        .iter()
        .flat_map(|&u| downs.iter().map(move |&d| u | d))
        .collect();
    states.sort_unstable();
    Ok(SectorBasis {
        n_sites,
        sector,
        states,
    })
}

fn spin_masks(n_sites: usize, count: usize, spin: Spin) -> Vec<u64> {
    let mut out = Vec::with_capacity(binomial(n_sites, count));
    for site_mask in 0u64..(1u64 << n_sites) {
        if site_mask.count_ones() as usize != count {
            continue;
        }
        let mut mask = 0u64;
        for site in 0..n_sites {
            if site_mask & (1 << site) != 0 {
                mask |= 1 << mode(site, spin);
            }
        }
        out.push(mask);
    }
    out
}

/// Matrix of `op` in a sector basis.
///
/// Fails with [`Error::LeavesSector`] if any term maps a sector state outside
/// the sector with nonzero amplitude.
pub fn fock_matrix(op: &FockSum, basis: &SectorBasis) -> Result<CMatrix> {
    check_modes(op, basis.n_modes())?;
    let dim = basis.dimension();
    let mut m = CMatrix::zeros(dim, dim);
    for (col, &mask) in basis.states.iter().enumerate() {
        for (out, amp) in op.apply_to_mask(mask) {
            if amp.norm() == 0.0 {
                continue;
            }
            let row = basis.index_of(out).ok_or(Error::LeavesSector {
                from: mask,
                to: out,
            })?;
            m[(row, col)] += amp;
        }
    }
    Ok(m)
}

/// Matrix of `op` on the full `2^n_modes` Fock space, indexed by mask.
pub fn fock_matrix_full(op: &FockSum, n_modes: usize) -> Result<CMatrix> {
    check_modes(op, n_modes)?;
    if n_modes > MAX_FULL_SPACE_MODES {
        return Err(Error::QubitBudget {
            requested: n_modes,
            budget: MAX_FULL_SPACE_MODES,
        });
    }
    let dim = 1usize << n_modes;
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        for (out, amp) in op.apply_to_mask(col as u64) {
            m[(out as usize, col)] += amp;
        }
    }
    Ok(m)
}

fn check_modes(op: &FockSum, n_modes: usize) -> Result<()> {
    match op.max_mode() {
        Some(max) if max >= n_modes => Err(Error::ModeMismatch {
            operator: max + 1,
            basis: n_modes,
        }),
        _ if op.n_modes > n_modes => Err(Error::ModeMismatch {
            operator: op.n_modes,
            basis: n_modes,
        }),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{eigh, max_abs_diff};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hubbard_2x2_term_count() {
        let spec = LatticeSpec::new(2, 2, 1.0, 2.0);
        assert_eq!(spec.edges(), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        let h = build_hubbard(&spec);
        let hops = h.terms.iter().filter(|t| t.factors.len() == 2).count();
        let onsite = h.terms.iter().filter(|t| t.factors.len() == 4).count();
        assert_eq!((hops, onsite), (16, 4));
    }

    #[test]
    fn single_site_has_only_onsite_term() {
        let h = build_hubbard(&LatticeSpec::new(1, 1, 1.0, 2.0));
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms[0].factors.len(), 4);
    }

    #[test]
    fn two_site_free_ground_energy() {
        let spec = LatticeSpec::new(1, 2, 1.0, 0.0);
        let basis = sector_basis(2, SectorSpec::new(1, 1)).unwrap();
        let m = fock_matrix(&build_hubbard(&spec), &basis).unwrap();
        assert_eq!(m.nrows(), 4);
        let spectrum = eigh(&m).unwrap();
        assert!((spectrum.eigenvalues[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn free_model_is_quadratic() {
        let spec = LatticeSpec::new(2, 3, 0.7, 5.0);
        assert!(build_free(&spec).is_quartic_free());
        assert!(build_free(&spec.with_couplings(0.0, 1.0)).is_empty());
    }

    #[test]
    fn periodic_edges_deduplicate() {
        let mut spec = LatticeSpec::new(2, 2, 1.0, 0.0);
        spec.boundary = Boundary::Periodic;
        assert_eq!(spec.edges().len(), 4);
        let mut ring = LatticeSpec::new(1, 4, 1.0, 0.0);
        ring.boundary = Boundary::Periodic;
        assert_eq!(ring.edges(), vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
    }

    #[test]
    fn sector_dimensions() {
        assert_eq!(
            sector_basis(4, SectorSpec::new(2, 2)).unwrap().dimension(),
            36
        );
        assert_eq!(
            sector_basis(4, SectorSpec::new(0, 0)).unwrap().dimension(),
            1
        );
        assert_eq!(
            sector_basis(4, SectorSpec::new(4, 4)).unwrap().dimension(),
            1
        );
        assert!(matches!(
            sector_basis(4, SectorSpec::new(5, 0)),
            Err(Error::SectorOutOfRange { .. })
        ));
    }

    #[test]
    fn sector_masks_have_right_occupations() {
        let basis = sector_basis(3, SectorSpec::new(2, 1)).unwrap();
        assert_eq!(basis.dimension(), binomial(3, 2) * binomial(3, 1));
        assert!(basis.states.windows(2).all(|w| w[0] < w[1]));
        for &m in &basis.states {
            assert_eq!(mask_occupations(m), (2, 1));
        }
    }

    #[test]
    fn number_operator_on_one_mode() {
        let op = FockSum::from_terms(1, vec![LadderTerm::number(1.0, 0)]);
        let m = fock_matrix_full(&op, 1).unwrap();
        assert_eq!(m[(0, 0)], c(0.0));
        assert_eq!(m[(1, 1)], c(1.0));
    }

    #[test]
    fn single_hop_in_one_particle_sector() {
        // modes 0 and 1 are (site 0, up) and (site 0, down); use two up modes instead
        let op = FockSum::from_terms(4, vec![LadderTerm::hop(1.0, 0, 2)]);
        let basis = sector_basis(2, SectorSpec::new(1, 0)).unwrap();
        let m = fock_matrix(&op, &basis).unwrap();
        assert_eq!(m.nrows(), 2);
        let nonzero: Vec<_> = m.iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(*nonzero[0], c(1.0));
        assert_eq!(m[(0, 1)], c(1.0));
    }

    #[test]
    fn spin_flip_leaves_sector() {
        let op = FockSum::from_terms(4, vec![LadderTerm::hop(1.0, 1, 0)]);
        let basis = sector_basis(2, SectorSpec::new(1, 0)).unwrap();
        assert!(matches!(
            fock_matrix(&op, &basis),
            Err(Error::LeavesSector { .. })
        ));
    }

    #[test]
    fn sector_matrix_is_restriction_of_full() {
        let spec = LatticeSpec::new(1, 3, 0.8, 1.7);
        let h = build_hubbard(&spec);
        let full = fock_matrix_full(&h, 6).unwrap();
        let basis = sector_basis(3, SectorSpec::new(2, 1)).unwrap();
        let sector = fock_matrix(&h, &basis).unwrap();
        for (i, &a) in basis.states.iter().enumerate() {
            for (j, &b) in basis.states.iter().enumerate() {
                assert_eq!(sector[(i, j)], full[(a as usize, b as usize)]);
            }
        }
    }

    #[test]
    fn anticommutation_relations() {
        let n = 6;
        for p in 0..n {
            for q in 0..n {
                let ap = FockSum::from_terms(
                    n,
                    vec![LadderTerm::new(c(1.0), vec![Ladder::annihilate(p)])],
                );
                let aq_dag =
                    FockSum::from_terms(n, vec![LadderTerm::new(c(1.0), vec![Ladder::create(q)])]);
                let anti = ap.product(&aq_dag) + aq_dag.product(&ap);
                let m = fock_matrix_full(&anti, n).unwrap();
                let expected = if p == q {
                    CMatrix::identity(1 << n, 1 << n)
                } else {
                    CMatrix::zeros(1 << n, 1 << n)
                };
                assert!(max_abs_diff(&m, &expected) < 1e-12, "p={p} q={q}");
            }
        }
    }

    #[test]
    fn hubbard_conserves_spin_numbers() {
        let spec = LatticeSpec::new(2, 2, 1.0, 2.0);
        let h = fock_matrix_full(&build_hubbard(&spec), 8).unwrap();
        for spin in [Spin::Up, Spin::Down] {
            let n = fock_matrix_full(&spin_number_operator(4, spin), 8).unwrap();
            let comm = &h * &n - &n * &h;
            assert!(comm.iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn hubbard_matrices_are_hermitian() {
        for (rows, cols, t, u) in [(1, 2, 1.0, 2.0), (2, 2, 0.5, 4.0), (1, 4, 1.3, -1.0)] {
            let spec = LatticeSpec::new(rows, cols, t, u);
            let h = fock_matrix_full(&build_hubbard(&spec), spec.n_modes()).unwrap();
            assert!(max_abs_diff(&h, &h.adjoint()) < 1e-14);
        }
    }

    #[test]
    fn mode_count_is_checked() {
        let op = FockSum::from_terms(10, vec![LadderTerm::number(1.0, 9)]);
        let basis = sector_basis(2, SectorSpec::new(1, 1)).unwrap();
        assert!(matches!(
            fock_matrix(&op, &basis),
            Err(Error::ModeMismatch { .. })
        ));
    }
}
