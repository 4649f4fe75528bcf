//! Bogoliubov diagonalization of the free model, Slater determinants and the
//! coupler families acting on a particle-number sector.
//!
//! A coupler is stored through its system part `A`; the full interaction is
//! `A ⊗ |1><0| + A† ⊗ |0><1|` with the fridge as the last factor.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    build_coulomb, mode, sector_basis, FockSum, Ladder, LadderTerm, LatticeSpec, SectorBasis,
    SectorSpec, Spin,
};
use crate::pauli::{jordan_wigner, jordan_wigner_product, PauliSum};
use crate::quantum::{eigh, outer, CMatrix, CVector, Spectrum};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Free energies closer than this are one degenerate level.
pub const FREE_TIE_TOL: f64 = 1e-9;

/// Single-particle eigenmodes of a quadratic number-conserving Hamiltonian,
/// one block per spin. `b†_n = sum_i U[(i, n)] a†_i` within each spin.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovBasis {
    pub n_sites: usize,
    pub energies: [Vec<f64>; 2],
    pub transforms: [CMatrix; 2],
}

impl BogoliubovBasis {
    pub fn energy(&self, spin: Spin, n: usize) -> f64 {
        self.energies[spin.index()][n]
    }

    /// `b†_n` (or `b_n`) of one spin as a linear Fock sum.
    pub fn mode_operator(&self, spin: Spin, n: usize, dagger: bool) -> FockSum {
        let u = &self.transforms[spin.index()];
        let coefficients: Vec<(usize, Complex64)> = (0..self.n_sites)
            .map(|i| {
                let c = u[(i, n)];
                (mode(i, spin), if dagger { c } else { c.conj() })
            })
            .collect();
        FockSum::linear(2 * self.n_sites, &coefficients, dagger)
    }

    /// Quadratic form `sum_n eps_n b†_n b_n` rebuilt in the original modes.
    pub fn hopping_matrix(&self, spin: Spin) -> CMatrix {
        let s = spin.index();
        let u = &self.transforms[s];
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            self.n_sites,
            self.energies[s].iter().map(|&e| Complex64::new(e, 0.0)),
        ));
        u * d * u.adjoint()
    }
}

/// Extracts the per-spin coefficient matrices `M` of `sum c_pq a†_p a_q` and
/// diagonalizes them.
pub fn diagonalize_quadratic(free: &FockSum) -> Result<BogoliubovBasis> {
    if !free.n_modes.is_multiple_of(2) {
        return Err(Error::NotQuadratic(format!(
            "odd mode count {}",
            free.n_modes
        )));
    }
    let n_sites = free.n_modes / 2;
    let mut m = [
        CMatrix::zeros(n_sites, n_sites),
        CMatrix::zeros(n_sites, n_sites),
    ];
    for term in &free.terms {
        match term.factors.as_slice() {
            [Ladder {
                mode: p,
                dagger: true,
            }, Ladder {
                mode: q,
                dagger: false,
            }] => {
                if p % 2 != q % 2 {
                    return Err(Error::NotQuadratic(format!("term a†_{p} a_{q} flips spin")));
                }
                m[p % 2][(p / 2, q / 2)] += term.coefficient;
            }
            _ => {
                return Err(Error::NotQuadratic(format!(
                    "term with {} factors is not of the form a†_p a_q",
                    term.factors.len()
                )))
            }
        }
    }
    let [m_up, m_down] = m;
    let s_up = eigh(&m_up)?;
    let s_down = eigh(&m_down)?;
    Ok(BogoliubovBasis {
        n_sites,
        energies: [s_up.eigenvalues, s_down.eigenvalues],
        transforms: [s_up.eigenvectors, s_down.eigenvectors],
    })
}

/// Occupied Bogoliubov modes per spin, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Occupation {
    pub up: Vec<usize>,
    pub down: Vec<usize>,
}

impl Occupation {
    /// Bit-mask over combined indices `2n + spin`; used for tie-breaking.
    pub fn mask(&self) -> u64 {
        let up = self.up.iter().map(|&n| 1u64 << (2 * n));
        let down = self.down.iter().map(|&n| 1u64 << (2 * n + 1));
        up.chain(down).fold(0, |a, b| a | b)
    }

    /// `(mode index, spin)` in ascending combined order.
    fn ordered_modes(&self) -> Vec<(usize, Spin)> {
        let mut out: Vec<(usize, Spin)> = self
            .up
            .iter()
            .map(|&n| (n, Spin::Up))
            .chain(self.down.iter().map(|&n| (n, Spin::Down)))
            .collect();
        out.sort_by_key(|&(n, s)| 2 * n + s.index());
        out
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "up{:?} down{:?}", self.up, self.down)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlaterState {
    pub occupation: Occupation,
    pub energy: f64,
    pub vector: CVector,
}

fn check_occupied(list: &[usize], n_sites: usize) -> Result<Vec<usize>> {
    let mut sorted = list.to_vec();
    sorted.sort_unstable();
    if let Some(&bad) = sorted.iter().find(|&&n| n >= n_sites) {
        return Err(Error::InvalidIndex(format!("mode {bad} >= {n_sites}")));
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidIndex(format!("duplicate mode in {list:?}")));
    }
    Ok(sorted)
}

/// Applies a linear combination of creation operators to a sparse state.
fn apply_creation(state: &BTreeMap<u64, Complex64>, op: &FockSum) -> BTreeMap<u64, Complex64> {
    let mut out = BTreeMap::new();
    for (&mask, &amp) in state {
        for (m, c) in op.apply_to_mask(mask) {
            *out.entry(m).or_insert(ZERO) += amp * c;
        }
    }
    out.retain(|_, c: &mut Complex64| c.norm() > 1e-15);
    out
}

/// `b†_{k1} b†_{k2} ... |vac>` with `k1 < k2 < ...` in combined order,
/// realized in the sector basis.
pub fn slater_state(
    bogo: &BogoliubovBasis,
    basis: &SectorBasis,
    up: &[usize],
    down: &[usize],
) -> Result<SlaterState> {
    let up = check_occupied(up, bogo.n_sites)?;
    let down = check_occupied(down, bogo.n_sites)?;
    if up.len() != basis.sector.n_up || down.len() != basis.sector.n_down {
        return Err(Error::InvalidOccupation(format!(
            "{} up / {} down particles for sector {}",
            up.len(),
            down.len(),
            basis.sector
        )));
    }
    let occupation = Occupation { up, down };
    let mut state = BTreeMap::from([(0u64, ONE)]);
    // rightmost operator acts first
    for &(n, spin) in occupation.ordered_modes().iter().rev() {
        state = apply_creation(&state, &bogo.mode_operator(spin, n, true));
    }
    let mut vector = CVector::zeros(basis.dimension());
    for (mask, amp) in state {
        let idx = basis
            .index_of(mask)
            .ok_or(Error::LeavesSector { from: 0, to: mask })?;
        vector[idx] = amp;
    }
    let energy = occupation
        .up
        .iter()
        .map(|&n| bogo.energy(Spin::Up, n))
        .sum::<f64>()
        + occupation
            .down
            .iter()
            .map(|&n| bogo.energy(Spin::Down, n))
            .sum::<f64>();
    Ok(SlaterState {
        occupation,
        energy,
        vector,
    })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// All Slater configurations of a sector sorted by ascending energy; levels
/// within [`FREE_TIE_TOL`] are ordered by occupation mask.
pub fn enumerate_slater(bogo: &BogoliubovBasis, sector: SectorSpec) -> Vec<(Occupation, f64)> {
    let ups = combinations(bogo.n_sites, sector.n_up);
    let downs = combinations(bogo.n_sites, sector.n_down);
    let mut all: Vec<(Occupation, f64)> = Vec::with_capacity(ups.len() * downs.len());
    for u in &ups {
        for d in &downs {
            let e = u.iter().map(|&n| bogo.energy(Spin::Up, n)).sum::<f64>()
                + d.iter().map(|&n| bogo.energy(Spin::Down, n)).sum::<f64>();
            all.push((
                Occupation {
                    up: u.clone(),
                    down: d.clone(),
                },
                e,
            ));
        }
    }
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.mask().cmp(&b.0.mask())));
    // re-sort near-equal clusters purely by mask
    let mut start = 0;
    while start < all.len() {
        let mut end = start + 1;
        while end < all.len() && all[end].1 - all[end - 1].1 <= FREE_TIE_TOL {
            end += 1;
        }
        all[start..end].sort_by_key(|(o, _)| o.mask());
        start = end;
    }
    all
}

/// One free eigenstate: a fixed combination of Slater determinants.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeLevel {
    pub energy: f64,
    pub components: Vec<(Complex64, Occupation)>,
    pub vector: CVector,
}

impl FreeLevel {
    pub fn is_single_determinant(&self) -> bool {
        self.components.len() == 1
    }
}

/// Outcome of lifting the free ground degeneracy with a weak Coulomb term.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundResolution {
    pub epsilon_u: f64,
    pub manifold_size: usize,
    /// Splittings of the perturbation inside the manifold, ascending.
    pub perturbation_energies: Vec<f64>,
    /// True when the lowest perturbed level is still degenerate.
    pub residual_degeneracy: bool,
}

/// How the degenerate free ground manifold is turned into a reference state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GroundChoice {
    /// Diagonalize `epsilon_u * (Coulomb term)` on the manifold; `None` uses
    /// `1e-3 * max(1, U)`.
    #[default]
    CoulombPerturbation,
    CoulombPerturbationWith {
        epsilon_u: f64,
    },
    /// Keep the Slater determinants as they are and use the given one (index
    /// into the mask-ordered manifold) as reference.
    Determinant {
        index: usize,
    },
}

/// Free eigenbasis of a sector in coupler order.
#[derive(Debug, Clone)]
pub struct FreeEigenbasis {
    pub spec: LatticeSpec,
    pub basis: SectorBasis,
    pub bogoliubov: BogoliubovBasis,
    pub levels: Vec<FreeLevel>,
    pub resolution: Option<GroundResolution>,
}

impl FreeEigenbasis {
    pub fn new(spec: &LatticeSpec, sector: SectorSpec, choice: GroundChoice) -> Result<Self> {
        spec.validate()?;
        let basis = sector_basis(spec.n_sites(), sector)?;
        let bogoliubov = diagonalize_quadratic(&crate::lattice::build_free(spec))?;
        let configs = enumerate_slater(&bogoliubov, sector);
        let mut levels = Vec::with_capacity(configs.len());
        for (occ, _) in &configs {
            let s = slater_state(&bogoliubov, &basis, &occ.up, &occ.down)?;
            levels.push(FreeLevel {
                energy: s.energy,
                components: vec![(ONE, s.occupation)],
                vector: s.vector,
            });
        }
        let g = levels
            .iter()
            .take_while(|l| l.energy - levels[0].energy <= FREE_TIE_TOL)
            .count();
        let mut resolution = None;
        if g > 1 {
            match choice {
                GroundChoice::CoulombPerturbation
                | GroundChoice::CoulombPerturbationWith { .. } => {
                    let epsilon_u = match choice {
                        GroundChoice::CoulombPerturbationWith { epsilon_u } => epsilon_u,
                        _ => 1e-3 * spec.coulomb_u.abs().max(1.0),
                    };
                    let (resolved, res) = resolve_degenerate_ground(
                        &levels[..g],
                        &levels[g..],
                        &basis,
                        spec,
                        epsilon_u,
                    )?;
                    levels.splice(0..g, resolved);
                    resolution = Some(res);
                }
                GroundChoice::Determinant { index } => {
                    if index >= g {
                        return Err(Error::InvalidIndex(format!(
                            "ground determinant {index} outside manifold of size {g}"
                        )));
                    }
                    let chosen = levels.remove(index);
                    levels.insert(0, chosen);
                }
            }
        }
        Ok(FreeEigenbasis {
            spec: *spec,
            basis,
            bogoliubov,
            levels,
            resolution,
        })
    }

    pub fn dimension(&self) -> usize {
        self.levels.len()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn ground(&self) -> &CVector {
        &self.levels[0].vector
    }

    /// Size of the degenerate free ground manifold.
    pub fn ground_degeneracy(&self) -> usize {
        self.levels
            .iter()
            .take_while(|l| l.energy - self.levels[0].energy <= FREE_TIE_TOL)
            .count()
    }

    /// Fock-space form of `|E~_k><E~_j|` as a sum of products of linear
    /// Bogoliubov factors (exact inside the sector).
    pub fn transition_fock_form(&self, k: usize, j: usize) -> FockForm {
        let mut products = Vec::new();
        for (ck, ok) in &self.levels[k].components {
            for (cj, oj) in &self.levels[j].components {
                let mut factors = Vec::new();
                for &(n, spin) in ok.ordered_modes().iter() {
                    factors.push(self.bogoliubov.mode_operator(spin, n, true));
                }
                for &(n, spin) in oj.ordered_modes().iter().rev() {
                    factors.push(self.bogoliubov.mode_operator(spin, n, false));
                }
                products.push((ck * cj.conj(), factors));
            }
        }
        FockForm::Products(products)
    }
}

/// Splits the degenerate ground manifold with a weak Coulomb term
/// `epsilon_u * C` using degenerate perturbation theory.
///
/// First order diagonalizes `P C P` on the manifold. On the 2x2 half-filled
/// grid that leaves pairs degenerate, so each remaining cluster is split by the
/// second-order term `P C Q (E~_0 - H~)^{-1} Q C P`, built from the other free
/// levels. The resulting basis does not depend on the magnitude of
/// `epsilon_u`, only on its sign; the returned levels keep the unperturbed
/// free energy and are ordered by their perturbative shift.
pub fn resolve_degenerate_ground(
    manifold: &[FreeLevel],
    rest: &[FreeLevel],
    basis: &SectorBasis,
    spec: &LatticeSpec,
    epsilon_u: f64,
) -> Result<(Vec<FreeLevel>, GroundResolution)> {
    let g = manifold.len();
    let e0 = manifold[0].energy;
    let coulomb =
        crate::lattice::fock_matrix(&build_coulomb(&spec.with_couplings(0.0, 1.0)), basis)?;
    let c_on: Vec<CVector> = manifold.iter().map(|l| &coulomb * &l.vector).collect();
    let mut first = CMatrix::zeros(g, g);
    let mut second = CMatrix::zeros(g, g);
    for a in 0..g {
        for b in 0..g {
            first[(a, b)] = manifold[a].vector.dotc(&c_on[b]);
        }
    }
    for level in rest {
        let denom = e0 - level.energy;
        if denom.abs() <= FREE_TIE_TOL {
            continue;
        }
        let amps: Vec<Complex64> = c_on.iter().map(|cv| level.vector.dotc(cv)).collect();
        for a in 0..g {
            for b in 0..g {
                second[(a, b)] += amps[a].conj() * amps[b] / denom;
            }
        }
    }
    let sign = if epsilon_u < 0.0 { -1.0 } else { 1.0 };
    let first_spec = eigh(&(first * Complex64::new(sign, 0.0)))?;
    // columns: coefficients over the manifold; shifts in units of (|eps|, eps^2)
    let mut columns: Vec<(f64, f64, CVector)> = Vec::with_capacity(g);
    let mut start = 0;
    while start < g {
        let mut end = start + 1;
        while end < g && first_spec.eigenvalues[end] - first_spec.eigenvalues[end - 1] <= 1e-9 {
            end += 1;
        }
        let block = first_spec
            .eigenvectors
            .columns(start, end - start)
            .into_owned();
        let restricted = block.adjoint() * &second * &block;
        let inner = eigh(&restricted)?;
        for k in 0..end - start {
            let mut c = &block * inner.vector(k);
            crate::quantum::fix_phase(&mut c);
            columns.push((first_spec.eigenvalues[start + k], inner.eigenvalues[k], c));
        }
        start = end;
    }
    let lowest_tied = g > 1
        && (columns[1].0 - columns[0].0).abs() <= 1e-9
        && (columns[1].1 - columns[0].1).abs() <= 1e-9;
    let residual_degeneracy = epsilon_u == 0.0 || lowest_tied;
    let eps = epsilon_u.abs();
    let perturbation_energies = columns
        .iter()
        .map(|(l1, l2, _)| eps * l1 + eps * eps * l2)
        .collect();
    let mut out = Vec::with_capacity(g);
    for (_, _, c) in columns {
        let mut vector = CVector::zeros(basis.dimension());
        let mut components = Vec::new();
        for (a, level) in manifold.iter().enumerate() {
            if c[a].norm() > 1e-12 {
                vector += &level.vector * c[a];
                components.push((c[a], level.components[0].1.clone()));
            }
        }
        vector /= Complex64::new(vector.norm(), 0.0);
        out.push(FreeLevel {
            energy: e0,
            components,
            vector,
        });
    }
    Ok((
        out,
        GroundResolution {
            epsilon_u,
            manifold_size: g,
            perturbation_energies,
            residual_degeneracy,
        },
    ))
}

/// Fock-space description of a coupler system part.
#[derive(Debug, Clone, PartialEq)]
pub enum FockForm {
    Sum(FockSum),
    /// `sum_r c_r * F_r1 F_r2 ...` with every `F` a Fock sum.
    Products(Vec<(Complex64, Vec<FockSum>)>),
}

impl FockForm {
    pub fn to_pauli(&self) -> PauliSum {
        match self {
            FockForm::Sum(op) => jordan_wigner(op),
            FockForm::Products(products) => {
                let n = products
                    .iter()
                    .flat_map(|(_, fs)| fs.iter().map(|f| f.n_modes))
                    .max()
                    .unwrap_or(0);
                let mut acc = PauliSum::zero(n);
                for (c, factors) in products {
                    acc = acc.add(&jordan_wigner_product(factors).scale(*c));
                }
                acc
            }
        }
    }

    /// Expanded single Fock sum (can be large for product forms).
    pub fn expand(&self) -> FockSum {
        match self {
            FockForm::Sum(op) => op.clone(),
            FockForm::Products(products) => {
                let n = products
                    .iter()
                    .flat_map(|(_, fs)| fs.iter().map(|f| f.n_modes))
                    .max()
                    .unwrap_or(0);
                let mut out = FockSum::zero(n);
                for (c, factors) in products {
                    let mut acc = FockSum::identity(n).scale(*c);
                    for f in factors {
                        acc = acc.product(f);
                    }
                    out = out + acc;
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplerFamily {
    Free,
    Ideal,
    Symmetry,
    Coulomb,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CouplerId {
    /// `|E_k><E_j|` in the free or exact eigenbasis.
    Transition {
        family: CouplerFamily,
        j: usize,
        k: usize,
    },
    Hopping {
        i: usize,
        j: usize,
        spin: usize,
    },
    Number {
        mode: usize,
    },
    Onsite {
        site: usize,
    },
    CoulombMove {
        from: usize,
        to: usize,
        spin: usize,
    },
}

impl fmt::Display for CouplerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplerId::Transition { family, j, k } => {
                let prefix = match family {
                    CouplerFamily::Ideal => "ideal_",
                    _ => "",
                };
                write!(f, "{prefix}V_({j},{k})")
            }
            CouplerId::Hopping { i, j, spin } => write!(f, "hop_{i}_{j}_{spin}"),
            CouplerId::Number { mode } => write!(f, "Z_{mode}"),
            CouplerId::Onsite { site } => write!(f, "ZZ_{site}"),
            CouplerId::CoulombMove { from, to, spin } => write!(f, "move_{from}_{to}_{spin}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Coupler {
    pub id: CouplerId,
    /// System operator `A` in the sector basis.
    pub system_part: CMatrix,
    /// Gap the coupler is designed for, if any.
    pub free_gap: Option<f64>,
    pub fock: Option<FockForm>,
}

impl Coupler {
    pub fn label(&self) -> String {
        self.id.to_string()
    }

    pub fn dimension(&self) -> usize {
        self.system_part.nrows()
    }

    /// `A ⊗ |1><0| + A† ⊗ |0><1|` on the composite space.
    pub fn interaction(&self) -> CMatrix {
        let d = self.dimension();
        let a = &self.system_part;
        let mut out = CMatrix::zeros(2 * d, 2 * d);
        for c in 0..d {
            for r in 0..d {
                let v = a[(r, c)];
                if v != ZERO {
                    out[(2 * r + 1, 2 * c)] += v;
                    out[(2 * c, 2 * r + 1)] += v.conj();
                }
            }
        }
        out
    }

    pub fn pauli_form(&self) -> Option<PauliSum> {
        self.fock.as_ref().map(FockForm::to_pauli)
    }
}

/// `|E~_0><E~_j|` for `j = 1 .. d_c - 1` from the free eigenbasis.
pub fn free_couplers(free: &FreeEigenbasis, d_c: usize) -> Result<Vec<Coupler>> {
    if d_c > free.dimension() {
        return Err(Error::InvalidParameter(format!(
            "d_c = {d_c} exceeds sector dimension {}",
            free.dimension()
        )));
    }
    (1..d_c).map(|j| free_transition(free, j, 0)).collect()
}

/// `|E~_k><E~_j|` tagged with the free gap `E~_j - E~_k`.
pub fn free_transition(free: &FreeEigenbasis, j: usize, k: usize) -> Result<Coupler> {
    let n = free.dimension();
    if j >= n || k >= n || j == k {
        return Err(Error::InvalidIndex(format!(
            "free pair ({j},{k}) with dimension {n}"
        )));
    }
    Ok(Coupler {
        id: CouplerId::Transition {
            family: CouplerFamily::Free,
            j,
            k,
        },
        system_part: outer(&free.levels[k].vector, &free.levels[j].vector),
        free_gap: Some(free.levels[j].energy - free.levels[k].energy),
        fock: Some(free.transition_fock_form(k, j)),
    })
}

/// `|E_k><E_j|` from an exact spectrum.
pub fn ideal_coupler(spectrum: &Spectrum, j: usize, k: usize) -> Result<Coupler> {
    let n = spectrum.dim();
    if j >= n || k >= n || j == k {
        return Err(Error::InvalidIndex(format!(
            "ideal pair ({j},{k}) with dimension {n}"
        )));
    }
    Ok(Coupler {
        id: CouplerId::Transition {
            family: CouplerFamily::Ideal,
            j,
            k,
        },
        system_part: outer(&spectrum.vector(k), &spectrum.vector(j)),
        free_gap: Some(spectrum.eigenvalues[j] - spectrum.eigenvalues[k]),
        fock: None,
    })
}

pub fn ideal_couplers(spectrum: &Spectrum, d_c: usize) -> Result<Vec<Coupler>> {
    (1..d_c.min(spectrum.dim()))
        .map(|j| ideal_coupler(spectrum, j, 0))
        .collect()
}

fn sector_coupler(
    id: CouplerId,
    op: FockSum,
    basis: &SectorBasis,
    gap: Option<f64>,
) -> Result<Coupler> {
    Ok(Coupler {
        id,
        system_part: crate::lattice::fock_matrix(&op, basis)?,
        free_gap: gap,
        fock: Some(FockForm::Sum(op)),
    })
}

/// Hopping `a†_p a_q + h.c.` per bond and spin (the fermionic form of
/// `(X X + Y Y) / 2`), `Z_p = 1 - 2 n_p` per mode and `Z_{i↑} Z_{i↓}` per site.
pub fn symmetry_couplers(spec: &LatticeSpec, sector: SectorSpec) -> Result<Vec<Coupler>> {
    let basis = sector_basis(spec.n_sites(), sector)?;
    let n_modes = spec.n_modes();
    let mut out = Vec::new();
    for (i, j) in spec.edges() {
        for spin in [Spin::Up, Spin::Down] {
            let (p, q) = (mode(i, spin), mode(j, spin));
            let op = FockSum::from_terms(
                n_modes,
                vec![LadderTerm::hop(1.0, p, q), LadderTerm::hop(1.0, q, p)],
            );
            out.push(sector_coupler(
                CouplerId::Hopping {
                    i,
                    j,
                    spin: spin.index(),
                },
                op,
                &basis,
                None,
            )?);
        }
    }
    let z = |p: usize| {
        FockSum::from_terms(
            n_modes,
            vec![LadderTerm::identity(ONE), LadderTerm::number(-2.0, p)],
        )
    };
    for p in 0..n_modes {
        out.push(sector_coupler(
            CouplerId::Number { mode: p },
            z(p),
            &basis,
            None,
        )?);
    }
    for site in 0..spec.n_sites() {
        let op = z(mode(site, Spin::Up)).product(&z(mode(site, Spin::Down)));
        out.push(sector_coupler(
            CouplerId::Onsite { site },
            op,
            &basis,
            None,
        )?);
    }
    Ok(out)
}

/// `a†_{jσ} a_{iσ} n_{iσ̄} (1 - n_{jσ̄})`: splits a doublon on `i` by moving
/// its `σ` fermion to an empty-of-`σ̄` neighbour `j`, lowering the `t = 0`
/// energy by `U`.
pub fn coulomb_couplers(spec: &LatticeSpec, sector: SectorSpec) -> Result<Vec<Coupler>> {
    if spec.coulomb_u == 0.0 {
        return Err(Error::InvalidParameter(
            "Coulomb couplers need U != 0".into(),
        ));
    }
    let basis = sector_basis(spec.n_sites(), sector)?;
    let n_modes = spec.n_modes();
    let mut out = Vec::new();
    for (a, b) in spec.edges() {
        for (from, to) in [(a, b), (b, a)] {
            for spin in [Spin::Up, Spin::Down] {
                let other = spin.flip();
                let hop = FockSum::from_terms(
                    n_modes,
                    vec![LadderTerm::hop(1.0, mode(to, spin), mode(from, spin))],
                );
                let n_from =
                    FockSum::from_terms(n_modes, vec![LadderTerm::number(1.0, mode(from, other))]);
                let empty_to = FockSum::from_terms(
                    n_modes,
                    vec![
                        LadderTerm::identity(ONE),
                        LadderTerm::number(-1.0, mode(to, other)),
                    ],
                );
                let op = hop.product(&n_from).product(&empty_to);
                out.push(sector_coupler(
                    CouplerId::CoulombMove {
                        from,
                        to,
                        spin: spin.index(),
                    },
                    op,
                    &basis,
                    Some(spec.coulomb_u),
                )?);
            }
        }
    }
    Ok(out)
}
