//! Pauli strings, Jordan-Wigner encoding and coupler decomposition reports.
//!
//! Strings are stored as `(x, z)` bit-masks with qubit `q` at bit `q`:
//! `P = i^{|x & z|} X^x Z^z`, so a set bit in both masks is a `Y`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{FockSum, Ladder, LadderTerm, MAX_FULL_SPACE_MODES};
use crate::quantum::CMatrix;

pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn x(q: usize) -> Self {
        PauliString { x: 1 << q, z: 0 }
    }

    pub fn y(q: usize) -> Self {
        PauliString {
            x: 1 << q,
            z: 1 << q,
        }
    }

    pub fn z(q: usize) -> Self {
        PauliString { x: 0, z: 1 << q }
    }

    /// Parses letters with qubit 0 first, e.g. `"XIZY"`.
    pub fn parse(letters: &str) -> Result<Self> {
        let mut p = PauliString::IDENTITY;
        for (q, ch) in letters.chars().enumerate() {
            match ch {
                'I' => {}
                'X' => p.x |= 1 << q,
                'Y' => {
                    p.x |= 1 << q;
                    p.z |= 1 << q;
                }
                'Z' => p.z |= 1 << q,
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "bad Pauli letter {other:?}"
                    )))
                }
            }
        }
        Ok(p)
    }

    pub fn letter(&self, q: usize) -> char {
        match ((self.x >> q) & 1, (self.z >> q) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (1, 1) => 'Y',
            _ => 'Z',
        }
    }

    pub fn letters(&self, n_qubits: usize) -> String {
        (0..n_qubits).map(|q| self.letter(q)).collect()
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// `self * other = i^k * result`, returning `(k mod 4, result)`.
    pub fn multiply(&self, other: &PauliString) -> (u32, PauliString) {
        let result = PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        // X^x1 Z^z1 X^x2 Z^z2 = (-1)^{|z1 & x2|} X^{x1^x2} Z^{z1^z2}
        let k = self.y_count() + other.y_count() + 2 * (self.z & other.x).count_ones() + 4 * 64
            - result.y_count();
        (k % 4, result)
    }

    /// Image of computational basis state `|i>` as `(phase, |j>)`.
    #[inline]
    pub fn apply(&self, i: u64) -> (Complex64, u64) {
        let mut phase = i_pow(self.y_count());
        if (i & self.z).count_ones() % 2 == 1 {
            phase = -phase;
        }
        (phase, i ^ self.x)
    }

    /// Compact form listing only non-identity letters, e.g. `X5 Z6 X7`.
    pub fn sparse_label(&self, n_qubits: usize) -> String {
        let parts: Vec<String> = (0..n_qubits)
            .filter(|&q| self.letter(q) != 'I')
            .map(|q| format!("{}{}", self.letter(q), q))
            .collect();
        if parts.is_empty() {
            "I".to_string()
        } else {
            parts.join(" ")
        }
    }
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Sum of Pauli strings with merged coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    pub n_qubits: usize,
    pub strings: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            strings: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliSum::single(n_qubits, PauliString::IDENTITY, Complex64::new(1.0, 0.0))
    }

    pub fn single(n_qubits: usize, p: PauliString, c: Complex64) -> Self {
        let mut s = PauliSum::zero(n_qubits);
        s.add_term(p, c);
        s
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        *self.strings.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.strings.get(p).copied().unwrap_or_default()
    }

    pub fn prune(&mut self) {
        self.strings.retain(|_, c| c.norm() >= PRUNE_TOL);
    }

    pub fn pruned(mut self) -> Self {
        self.prune();
        self
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        out.n_qubits = out.n_qubits.max(other.n_qubits);
        for (p, c) in &other.strings {
            out.add_term(*p, *c);
        }
        out.pruned()
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            strings: self.strings.iter().map(|(p, c)| (*p, c * factor)).collect(),
        }
        .pruned()
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::zero(self.n_qubits.max(other.n_qubits));
        for (p, a) in &self.strings {
            for (q, b) in &other.strings {
                let (k, r) = p.multiply(q);
                out.add_term(r, a * b * i_pow(k));
            }
        }
        out.pruned()
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            strings: self.strings.iter().map(|(p, c)| (*p, c.conj())).collect(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.strings.values().all(|c| c.im.abs() <= tol)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> f64 {
        self.strings
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_difference(&self, other: &PauliSum) -> f64 {
        let mut keys: Vec<&PauliString> = self.strings.keys().chain(other.strings.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|p| (self.coefficient(p) - other.coefficient(p)).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, c)) in self.strings.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(
                f,
                "({:.6}{:+.6}i) {}",
                c.re,
                c.im,
                p.sparse_label(self.n_qubits)
            )?;
        }
        Ok(())
    }
}

/// Jordan-Wigner image of one ladder operator.
pub fn jw_ladder(l: Ladder, n_qubits: usize) -> PauliSum {
    let string_mask = (1u64 << l.mode) - 1;
    let x = PauliString {
        x: 1 << l.mode,
        z: string_mask,
    };
    // Z_{<p} Y_p keeps the Z string; Y's own z-bit sits at p
    let y = PauliString {
        x: 1 << l.mode,
        z: string_mask | (1 << l.mode),
    };
    let y_sign = if l.dagger { -0.5 } else { 0.5 };
    let mut s = PauliSum::zero(n_qubits);
    s.add_term(x, Complex64::new(0.5, 0.0));
    // Z_{<p} and Y_p act on disjoint qubits so the ordered product is the plain string
    s.add_term(y, Complex64::new(0.0, y_sign));
    s
}

pub fn jw_term(term: &LadderTerm, n_qubits: usize) -> PauliSum {
    let mut acc = PauliSum::single(n_qubits, PauliString::IDENTITY, term.coefficient);
    for f in &term.factors {
        acc = acc.mul(&jw_ladder(*f, n_qubits));
    }
    acc
}

/// `a_p -> Z_0 ... Z_{p-1} (X_p + i Y_p) / 2`.
pub fn jordan_wigner(op: &FockSum) -> PauliSum {
    let mut out = PauliSum::zero(op.n_modes);
    for term in &op.terms {
        for (p, c) in jw_term(term, op.n_modes).strings {
            out.add_term(p, c);
        }
    }
    out.pruned()
}

/// Encodes a product of Fock sums factor by factor, merging after each step.
/// Much cheaper than expanding the product in Fock form first when the
/// factors are linear combinations of ladder operators.
pub fn jordan_wigner_product(factors: &[FockSum]) -> PauliSum {
    let n = factors.iter().map(|f| f.n_modes).max().unwrap_or(0);
    let mut acc = PauliSum::identity(n);
    for f in factors {
        let mut fs = jordan_wigner(f);
        fs.n_qubits = n;
        acc = acc.mul(&fs);
    }
    acc
}

/// Dense `2^n x 2^n` matrix, basis index bit `q` = qubit `q`.
pub fn pauli_to_matrix(ps: &PauliSum) -> Result<CMatrix> {
    if ps.n_qubits > MAX_FULL_SPACE_MODES {
        return Err(Error::QubitBudget {
            requested: ps.n_qubits,
            budget: MAX_FULL_SPACE_MODES,
        });
    }
    let dim = 1usize << ps.n_qubits;
    let mut m = CMatrix::zeros(dim, dim);
    for (p, c) in &ps.strings {
        for col in 0..dim {
            let (phase, row) = p.apply(col as u64);
            m[(row as usize, col)] += c * phase;
        }
    }
    Ok(m)
}

/// Pauli coefficients of a dense matrix, `c_P = Tr(P M) / 2^n`.
pub fn matrix_to_pauli(m: &CMatrix, n_qubits: usize) -> Result<PauliSum> {
    let dim = 1usize << n_qubits;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.nrows(),
        });
    }
    let mut out = PauliSum::zero(n_qubits);
    let scale = 1.0 / dim as f64;
    for x in 0..dim as u64 {
        for z in 0..dim as u64 {
            let p = PauliString { x, z };
            // P is Hermitian, so Tr(P M) = sum_col <col|P M|col> = sum_col conj(P[row,col]) M[row,col]
            let mut acc = Complex64::new(0.0, 0.0);
            for col in 0..dim as u64 {
                let (phase, row) = p.apply(col);
                acc += phase.conj() * m[(row as usize, col as usize)];
            }
            if acc.norm() * scale >= PRUNE_TOL {
                out.add_term(p, acc * scale);
            }
        }
    }
    Ok(out)
}

/// One row of a coupler decomposition report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionEntry {
    pub pauli: String,
    pub abs_coefficient: f64,
}

/// Normalized Pauli amplitudes sorted by descending magnitude (ties by
/// string order, for determinism).
pub fn decompose_pauli(ps: &PauliSum) -> Result<Vec<DecompositionEntry>> {
    let norm = ps.coefficient_norm();
    if norm == 0.0 {
        return Err(Error::ZeroOperator);
    }
    let mut rows: Vec<(PauliString, f64)> = ps
        .strings
        .iter()
        .map(|(p, c)| (*p, c.norm() / norm))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(rows
        .into_iter()
        .map(|(p, a)| DecompositionEntry {
            pauli: p.letters(ps.n_qubits),
            abs_coefficient: a,
        })
        .collect())
}

pub fn decompose_coupler(system_part: &FockSum) -> Result<Vec<DecompositionEntry>> {
    decompose_pauli(&jordan_wigner(system_part))
}

/// Ratio between the largest and smallest nonzero amplitude.
pub fn coefficient_spread(entries: &[DecompositionEntry]) -> f64 {
    let max = entries.first().map(|e| e.abs_coefficient).unwrap_or(0.0);
    let min = entries
        .iter()
        .map(|e| e.abs_coefficient)
        .filter(|&a| a > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min.is_finite() && min > 0.0 {
        max / min
    } else {
        1.0
    }
}

/// Writes `coupler_id,rank,pauli_string,abs_coefficient` rows.
pub fn write_decomposition_csv<W: Write>(
    out: &mut W,
    reports: &[(String, Vec<DecompositionEntry>)],
) -> std::io::Result<()> {
    writeln!(out, "coupler_id,rank,pauli_string,abs_coefficient")?;
    for (id, entries) in reports {
        for (rank, e) in entries.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{:.12e}",
                id,
                rank + 1,
                e.pauli,
                e.abs_coefficient
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_hubbard, fock_matrix_full, LatticeSpec};
    use crate::quantum::max_abs_diff;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn number_operator_encoding() {
        let n0 = FockSum::from_terms(1, vec![LadderTerm::number(1.0, 0)]);
        let ps = jordan_wigner(&n0);
        let mut expected = PauliSum::zero(1);
        expected.add_term(PauliString::IDENTITY, c(0.5, 0.0));
        expected.add_term(PauliString::z(0), c(-0.5, 0.0));
        assert!(ps.max_abs_difference(&expected) < 1e-15);
    }

    #[test]
    fn hopping_encoding() {
        let op = FockSum::from_terms(
            2,
            vec![LadderTerm::hop(1.0, 0, 1), LadderTerm::hop(1.0, 1, 0)],
        );
        let ps = jordan_wigner(&op);
        let mut expected = PauliSum::zero(2);
        expected.add_term(PauliString::parse("XX").unwrap(), c(0.5, 0.0));
        expected.add_term(PauliString::parse("YY").unwrap(), c(0.5, 0.0));
        assert!(ps.max_abs_difference(&expected) < 1e-15, "{ps}");
    }

    #[test]
    fn single_qubit_matrices() {
        let z = pauli_to_matrix(&PauliSum::single(1, PauliString::z(0), c(1.0, 0.0))).unwrap();
        assert_eq!(z[(0, 0)], c(1.0, 0.0));
        assert_eq!(z[(1, 1)], c(-1.0, 0.0));
        let y = pauli_to_matrix(&PauliSum::single(1, PauliString::y(0), c(1.0, 0.0))).unwrap();
        assert_eq!(y[(0, 1)], c(0.0, -1.0));
        assert_eq!(y[(1, 0)], c(0.0, 1.0));
        let xx = pauli_to_matrix(&PauliSum::single(
            2,
            PauliString::parse("XX").unwrap(),
            c(1.0, 0.0),
        ))
        .unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i + j == 3 { 1.0 } else { 0.0 };
                assert_eq!(xx[(i, j)], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn string_product_table() {
        // XY = iZ, YZ = iX, ZX = iY
        let cases = [
            ("X", "Y", 1, "Z"),
            ("Y", "Z", 1, "X"),
            ("Z", "X", 1, "Y"),
            ("Y", "X", 3, "Z"),
        ];
        for (a, b, k, r) in cases {
            let (kk, rr) = PauliString::parse(a)
                .unwrap()
                .multiply(&PauliString::parse(b).unwrap());
            assert_eq!((kk, rr), (k, PauliString::parse(r).unwrap()), "{a}{b}");
        }
    }

    #[test]
    fn double_occupancy_is_projector() {
        let n0n1 = FockSum::from_terms(2, vec![crate::lattice::double_occupancy_term(1.0, 0)]);
        let m = pauli_to_matrix(&jordan_wigner(&n0n1)).unwrap();
        assert!(max_abs_diff(&(&m * &m), &m) < 1e-14);
    }

    #[test]
    fn hubbard_encodings_agree() {
        for (rows, cols) in [(1, 2), (2, 2), (1, 3)] {
            let spec = LatticeSpec::new(rows, cols, 1.0, 2.0);
            let h = build_hubbard(&spec);
            let a = fock_matrix_full(&h, spec.n_modes()).unwrap();
            let ps = jordan_wigner(&h);
            assert!(ps.is_hermitian(1e-14));
            let b = pauli_to_matrix(&ps).unwrap();
            assert!(max_abs_diff(&a, &b) < 1e-10);
        }
    }

    #[test]
    fn matrix_round_trip() {
        let spec = LatticeSpec::new(1, 2, 0.7, 1.3);
        let ps = jordan_wigner(&build_hubbard(&spec));
        let m = pauli_to_matrix(&ps).unwrap();
        let back = matrix_to_pauli(&m, 4).unwrap();
        assert!(ps.max_abs_difference(&back) < 1e-14);
    }

    #[test]
    fn decomposition_basics() {
        let single = FockSum::from_terms(
            2,
            vec![LadderTerm::hop(3.0, 0, 1), LadderTerm::hop(3.0, 1, 0)],
        );
        let d = decompose_coupler(&single).unwrap();
        let total: f64 = d.iter().map(|e| e.abs_coefficient.powi(2)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(matches!(
            decompose_coupler(&FockSum::zero(2)),
            Err(Error::ZeroOperator)
        ));
        let one = PauliSum::single(3, PauliString::parse("XIZ").unwrap(), c(0.0, -2.0));
        let d = decompose_pauli(&one).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].pauli, "XIZ");
        assert!((d[0].abs_coefficient - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        let rows = vec![(
            "V_(1,0)".to_string(),
            vec![DecompositionEntry {
                pauli: "XZ".into(),
                abs_coefficient: 1.0,
            }],
        )];
        write_decomposition_csv(&mut buf, &rows).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("coupler_id,rank,pauli_string,abs_coefficient\nV_(1,0),1,XZ,"));
    }

    fn arb_fock(n_modes: usize) -> impl Strategy<Value = FockSum> {
        let ladder = (0..n_modes, any::<bool>()).prop_map(|(mode, dagger)| Ladder { mode, dagger });
        let term = (
            -1.0f64..1.0,
            -1.0f64..1.0,
            prop::collection::vec(ladder, 0..4),
        )
            .prop_map(|(re, im, factors)| LadderTerm::new(Complex64::new(re, im), factors));
        prop::collection::vec(term, 1..4).prop_map(move |terms| FockSum::from_terms(n_modes, terms))
    }

    proptest! {
        #[test]
        fn encoding_is_linear(a in arb_fock(4), b in arb_fock(4), x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let combined = a.clone().scale(c(x, 0.0)) + b.clone().scale(c(0.0, y));
            let lhs = jordan_wigner(&combined);
            let rhs = jordan_wigner(&a).scale(c(x, 0.0)).add(&jordan_wigner(&b).scale(c(0.0, y)));
            prop_assert!(lhs.max_abs_difference(&rhs) < 1e-12);
        }

        #[test]
        fn encoding_matches_fock_action(a in arb_fock(5)) {
            let direct = fock_matrix_full(&a, 5).unwrap();
            let encoded = pauli_to_matrix(&jordan_wigner(&a)).unwrap();
            prop_assert!(max_abs_diff(&direct, &encoded) < 1e-10);
        }

        #[test]
        fn realization_is_multiplicative(a in arb_fock(4), b in arb_fock(4)) {
            let ma = pauli_to_matrix(&jordan_wigner(&a)).unwrap();
            let mb = pauli_to_matrix(&jordan_wigner(&b)).unwrap();
            let mab = pauli_to_matrix(&jordan_wigner(&a.product(&b))).unwrap();
            prop_assert!(max_abs_diff(&(&ma * &mb), &mab) < 1e-10);
            let prod = pauli_to_matrix(&jordan_wigner(&a).mul(&jordan_wigner(&b))).unwrap();
            prop_assert!(max_abs_diff(&prod, &mab) < 1e-10);
        }

        #[test]
        fn decomposition_phase_invariant(a in arb_fock(4), phase in 0.0f64..std::f64::consts::TAU) {
            let ps = jordan_wigner(&a);
            prop_assume!(ps.coefficient_norm() > 1e-6);
            let d1 = decompose_pauli(&ps).unwrap();
            let d2 = decompose_pauli(&ps.scale(Complex64::from_polar(1.0, phase))).unwrap();
            prop_assert_eq!(d1.len(), d2.len());
            for (x, y) in d1.iter().zip(&d2) {
                prop_assert!((x.abs_coefficient - y.abs_coefficient).abs() < 1e-12);
            }
        }
    }
}
