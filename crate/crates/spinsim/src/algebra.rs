//! Product-operator algebra: Pauli strings, dense operators, density
//! matrices, basis expansions, coherence orders and fidelities.
//!
//! Conventions fixed project-wide:
//! - spin 1 occupies the leftmost (most significant) tensor slot;
//! - raising/lowering operators carry no 1/2: `σ± = σx ± i σy`;
//! - dense matrices only, at most 8 spins.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

pub type CMat = DMatrix<C64>;

pub const MAX_SPINS: usize = 8;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("pauli string has {got} factors but the system has {want} spins")]
    LengthMismatch { got: usize, want: usize },
    #[error("operator dimension {0} is not a power of two")]
    BadDimension(usize),
    #[error("operator dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("coherence order is defined only over {{1, Z, +, -}} factors, found {0:?}")]
    TransverseFactor(Factor),
    #[error("spin count {0} exceeds the supported maximum of {MAX_SPINS}")]
    TooManySpins(usize),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not a valid density matrix: {0}")]
    NotDensity(String),
}

/// A single-spin factor of a product operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    I,
    X,
    Y,
    Z,
    /// σ+ = σx + iσy
    Plus,
    /// σ- = σx - iσy
    Minus,
}

impl Factor {
    /// The 2x2 matrix realization.
    pub fn matrix(self) -> CMat {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        match self {
            Factor::I => CMat::from_row_slice(2, 2, &[l, o, o, l]),
            Factor::X => CMat::from_row_slice(2, 2, &[o, l, l, o]),
            Factor::Y => CMat::from_row_slice(
                2,
                2,
                &[o, C64::new(0.0, -1.0), C64::new(0.0, 1.0), o],
            ),
            Factor::Z => CMat::from_row_slice(2, 2, &[l, o, o, -l]),
            Factor::Plus => CMat::from_row_slice(2, 2, &[o, C64::new(2.0, 0.0), o, o]),
            Factor::Minus => CMat::from_row_slice(2, 2, &[o, o, C64::new(2.0, 0.0), o]),
        }
    }

    /// Squared Frobenius norm of the factor, used for expansion inner products.
    fn norm_sq(self) -> f64 {
        match self {
            Factor::I | Factor::X | Factor::Y | Factor::Z => 2.0,
            Factor::Plus | Factor::Minus => 4.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Factor::I => "1",
            Factor::X => "x",
            Factor::Y => "y",
            Factor::Z => "z",
            Factor::Plus => "+",
            Factor::Minus => "-",
        }
    }
}

/// A tensor product of single-spin factors with a complex coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub factors: Vec<Factor>,
    pub coefficient: C64,
}

impl PauliString {
    pub fn new(factors: Vec<Factor>, coefficient: C64) -> Self {
        Self { factors, coefficient }
    }

    pub fn unit(factors: Vec<Factor>) -> Self {
        Self::new(factors, C64::new(1.0, 0.0))
    }

    /// String with `factor` on spin `index` (0-based) and identity elsewhere.
    pub fn single(n: usize, index: usize, factor: Factor) -> Self {
        let mut factors = vec![Factor::I; n];
        factors[index] = factor;
        Self::unit(factors)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Net raising-minus-lowering index. Only defined over {1, Z, +, -}.
    pub fn coherence_order(&self) -> Result<i32, AlgebraError> {
        let mut m = 0;
        for &f in &self.factors {
            match f {
                Factor::Plus => m += 1,
                Factor::Minus => m -= 1,
                Factor::I | Factor::Z => {}
                Factor::X | Factor::Y => return Err(AlgebraError::TransverseFactor(f)),
            }
        }
        Ok(m)
    }

    /// Dense matrix realization: coefficient times the Kronecker product of
    /// the factor matrices, spin 1 leftmost.
    pub fn matrix(&self, n: usize) -> Result<CMat, AlgebraError> {
        if self.factors.len() != n {
            return Err(AlgebraError::LengthMismatch { got: self.factors.len(), want: n });
        }
        if n > MAX_SPINS {
            return Err(AlgebraError::TooManySpins(n));
        }
        let mut m = CMat::from_element(1, 1, self.coefficient);
        for &f in &self.factors {
            m = m.kronecker(&f.matrix());
        }
        Ok(m)
    }

    pub fn render(&self) -> String {
        self.factors.iter().map(|f| f.symbol()).collect()
    }
}

/// Spin count for a 2^n-dimensional operator.
pub fn spin_count(dim: usize) -> Result<usize, AlgebraError> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(AlgebraError::BadDimension(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_SPINS {
        return Err(AlgebraError::TooManySpins(n));
    }
    Ok(n)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(1 << n, 1 << n)
}

pub fn max_norm(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_norm(&(m - m.adjoint()))
}

pub fn unitarity_defect(m: &CMat) -> f64 {
    let d = m.nrows();
    max_norm(&(m.adjoint() * m - CMat::identity(d, d)))
}

pub fn assert_hermitian(m: &CMat) -> Result<(), AlgebraError> {
    let d = hermiticity_defect(m);
    if d > HERMITIAN_TOL {
        return Err(AlgebraError::NotHermitian(d));
    }
    Ok(())
}

/// Expand an operator over the Hermitian product basis {1, X, Y, Z}^n.
///
/// Coefficients are `Tr[P† op] / 2^n`; the expansion reconstructs the
/// operator exactly.
pub fn expand_product_basis(op: &CMat) -> Result<Vec<(PauliString, C64)>, AlgebraError> {
    let n = spin_count(op.nrows())?;
    if op.nrows() != op.ncols() {
        return Err(AlgebraError::DimMismatch(op.nrows(), op.ncols()));
    }
    let basis = [Factor::I, Factor::X, Factor::Y, Factor::Z];
    let mut out = Vec::new();
    let norm = (1 << n) as f64;
    for idx in 0..4usize.pow(n as u32) {
        let factors: Vec<Factor> =
            (0..n).map(|k| basis[(idx >> (2 * (n - 1 - k))) & 3]).collect();
        let ps = PauliString::unit(factors);
        let c = sparse_trace_with(&ps, op) / norm;
        if c.norm() > 0.0 {
            out.push((ps, c));
        }
    }
    Ok(out)
}

/// Expand an operator over the (non-Hermitian) product basis {1, Z, +, -}^n.
///
/// Basis strings are orthogonal under `Tr[A† B]`; per-factor norms are 2 for
/// {1, Z} and 4 for {+, -}.
pub fn expand_ladder_basis(op: &CMat) -> Result<Vec<(PauliString, C64)>, AlgebraError> {
    let n = spin_count(op.nrows())?;
    let basis = [Factor::I, Factor::Z, Factor::Plus, Factor::Minus];
    let mut out = Vec::new();
    for idx in 0..4usize.pow(n as u32) {
        let factors: Vec<Factor> =
            (0..n).map(|k| basis[(idx >> (2 * (n - 1 - k))) & 3]).collect();
        let norm: f64 = factors.iter().map(|f| f.norm_sq()).product();
        let ps = PauliString::unit(factors);
        let c = sparse_adjoint_trace_with(&ps, op) / norm;
        if c.norm() > 0.0 {
            out.push((ps, c));
        }
    }
    Ok(out)
}

/// Re-sum an expansion into a dense operator.
pub fn assemble(terms: &[(PauliString, C64)], n: usize) -> Result<CMat, AlgebraError> {
    let dim = 1 << n;
    let mut acc = CMat::zeros(dim, dim);
    for (ps, c) in terms {
        acc += ps.matrix(n)? * *c;
    }
    Ok(acc)
}

/// Look up the coefficient of a factor pattern in an expansion (0 if absent).
pub fn coefficient_of(terms: &[(PauliString, C64)], factors: &[Factor]) -> C64 {
    terms
        .iter()
        .find(|(ps, _)| ps.factors == factors)
        .map(|(_, c)| *c)
        .unwrap_or_else(|| C64::new(0.0, 0.0))
}

/// Tr[P op] for a unit-coefficient string P over {1, X, Y, Z}.
///
/// Pauli strings have one nonzero entry per column, so the trace costs
/// O(2^n) instead of a dense product. Hermitian factors, no adjoint needed.
fn sparse_trace_with(ps: &PauliString, op: &CMat) -> C64 {
    string_column_trace(ps, op, false)
}

/// Tr[P† op] for a unit-coefficient string over {1, Z, +, -}.
fn sparse_adjoint_trace_with(ps: &PauliString, op: &CMat) -> C64 {
    string_column_trace(ps, op, true)
}

fn string_column_trace(ps: &PauliString, op: &CMat, adjoint: bool) -> C64 {
    let n = ps.factors.len();
    let dim = 1usize << n;
    let mut acc = C64::new(0.0, 0.0);
    // The string's only nonzero entries are P[r(c)][c] = amp(c), so
    //   Tr[P op]  = sum_c amp(c) op[c][r(c)]
    //   Tr[P† op] = sum_c conj(amp(c)) op[r(c)][c]
    'col: for c in 0..dim {
        let mut r = 0usize;
        let mut amp = C64::new(1.0, 0.0);
        for (k, &f) in ps.factors.iter().enumerate() {
            let bit = (c >> (n - 1 - k)) & 1;
            let (out_bit, a) = match factor_action(f, bit) {
                Some(v) => v,
                None => continue 'col,
            };
            r |= out_bit << (n - 1 - k);
            amp *= a;
        }
        if adjoint {
            acc += amp.conj() * op[(r, c)];
        } else {
            acc += amp * op[(c, r)];
        }
    }
    acc
}

/// Action of a factor on basis column `bit`: row index and amplitude,
/// or None when the column is zero.
fn factor_action(f: Factor, bit: usize) -> Option<(usize, C64)> {
    match f {
        Factor::I => Some((bit, C64::new(1.0, 0.0))),
        Factor::X => Some((1 - bit, C64::new(1.0, 0.0))),
        Factor::Y => Some((
            1 - bit,
            if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) },
        )),
        Factor::Z => Some((bit, C64::new(if bit == 0 { 1.0 } else { -1.0 }, 0.0))),
        // σ+ = 2|0><1|, σ- = 2|1><0|
        Factor::Plus => (bit == 1).then(|| (0, C64::new(2.0, 0.0))),
        Factor::Minus => (bit == 0).then(|| (1, C64::new(2.0, 0.0))),
    }
}

/// A validated density matrix over `n` spins.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    entries: CMat,
    n: usize,
}

impl DensityMatrix {
    pub fn new(entries: CMat) -> Result<Self, AlgebraError> {
        let n = spin_count(entries.nrows())?;
        let h = hermiticity_defect(&entries);
        if h > HERMITIAN_TOL {
            return Err(AlgebraError::NotDensity(format!(
                "Hermiticity defect {h:.3e}"
            )));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(AlgebraError::NotDensity(format!("trace {tr}")));
        }
        let eigs = entries.clone().symmetric_eigen().eigenvalues;
        if let Some(min) = eigs.iter().cloned().reduce(f64::min) {
            if min < -1e-10 {
                return Err(AlgebraError::NotDensity(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { entries, n })
    }

    /// Build without validation; for intermediate states inside the engine.
    pub(crate) fn from_raw(entries: CMat, n: usize) -> Self {
        Self { entries, n }
    }

    /// Maximally mixed state I / 2^n.
    pub fn mixed(n: usize) -> Self {
        let dim = 1 << n;
        Self::from_raw(identity(n) / C64::new(dim as f64, 0.0), n)
    }

    /// Pure computational-basis state |bits> with spin 1 as the leading bit.
    pub fn basis_state(n: usize, bits: usize) -> Self {
        let dim = 1 << n;
        let mut m = CMat::zeros(dim, dim);
        m[(bits, bits)] = C64::new(1.0, 0.0);
        Self::from_raw(m, n)
    }

    /// High-temperature thermal state `I/2^n + eps * sum_i σz^i`.
    pub fn thermal(n: usize, eps: f64) -> Self {
        let mut m = identity(n) / C64::new((1 << n) as f64, 0.0);
        for i in 0..n {
            m += PauliString::single(n, i, Factor::Z).matrix(n).unwrap()
                * C64::new(eps, 0.0);
        }
        Self::from_raw(m, n)
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn into_matrix(self) -> CMat {
        self.entries
    }

    pub fn spins(&self) -> usize {
        self.n
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Traceless part ρ - Tr[ρ] I / 2^n.
    pub fn traceless(&self) -> CMat {
        let dim = self.entries.nrows();
        &self.entries - CMat::identity(dim, dim) * (self.entries.trace() / C64::new(dim as f64, 0.0))
    }
}

/// Global-phase-invariant gate fidelity |Tr[U† V]| / 2^n.
pub fn gate_fidelity(u: &CMat, v: &CMat) -> Result<f64, AlgebraError> {
    if u.nrows() != v.nrows() {
        return Err(AlgebraError::DimMismatch(u.nrows(), v.nrows()));
    }
    Ok((u.adjoint() * v).trace().norm() / u.nrows() as f64)
}

/// Normalized Hilbert-Schmidt overlap Tr[AB] / sqrt(Tr[A²] Tr[B²]).
///
/// Intended for Hermitian inputs, in particular traceless parts of
/// pseudo-pure states; both arguments are used as given.
pub fn normalized_overlap(a: &CMat, b: &CMat) -> Result<f64, AlgebraError> {
    if a.nrows() != b.nrows() {
        return Err(AlgebraError::DimMismatch(a.nrows(), b.nrows()));
    }
    let ab = (a * b).trace().re;
    let aa = (a * a).trace().re;
    let bb = (b * b).trace().re;
    Ok(ab / (aa * bb).sqrt())
}

/// Normalized overlap of two density matrices, Tr[ab]/sqrt(Tr[a²]Tr[b²]).
pub fn state_fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, AlgebraError> {
    normalized_overlap(a.matrix(), b.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn z1_matrix_is_diag() {
        let ps = PauliString::unit(vec![Factor::Z, Factor::I]);
        let m = ps.matrix(2).unwrap();
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (i, e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(m[(i, i)].re, e, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(max_norm(&(m.clone() - CMat::from_diagonal(&m.diagonal()))), 0.0);
    }

    #[test]
    fn identity_string_scales() {
        let ps = PauliString::new(vec![Factor::I, Factor::I], c(0.25, -0.5));
        let m = ps.matrix(2).unwrap();
        assert_abs_diff_eq!(max_norm(&(m - identity(2) * c(0.25, -0.5))), 0.0);
    }

    #[test]
    fn plus_minus_matrix_from_2x2_arithmetic() {
        // brute-force oracle: kron of explicit 2x2 matrices
        let plus = Factor::X.matrix() + Factor::Y.matrix() * c(0.0, 1.0);
        let minus = Factor::X.matrix() - Factor::Y.matrix() * c(0.0, 1.0);
        let expect = plus.kronecker(&minus);
        let got = PauliString::unit(vec![Factor::Plus, Factor::Minus]).matrix(2).unwrap();
        assert_abs_diff_eq!(max_norm(&(got.clone() - expect)), 0.0);
        // single nonzero entry 4 at row |01>, col |10>
        assert_abs_diff_eq!(got[(1, 2)].re, 4.0, epsilon = 1e-15);
        assert_eq!(got.iter().filter(|v| v.norm() > 0.0).count(), 1);
    }

    #[test]
    fn length_mismatch_rejected() {
        let ps = PauliString::unit(vec![Factor::X]);
        assert!(ps.matrix(2).is_err());
    }

    #[test]
    fn expand_identity() {
        let terms = expand_product_basis(&identity(2)).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].0.factors, vec![Factor::I, Factor::I]);
        assert_abs_diff_eq!(terms[0].1.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn expand_cnot() {
        let mut u = CMat::zeros(4, 4);
        u[(0, 0)] = c(1.0, 0.0);
        u[(1, 1)] = c(1.0, 0.0);
        u[(2, 3)] = c(1.0, 0.0);
        u[(3, 2)] = c(1.0, 0.0);
        let terms = expand_product_basis(&u).unwrap();
        let get = |f: &[Factor]| coefficient_of(&terms, f);
        assert_abs_diff_eq!(get(&[Factor::I, Factor::I]).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(get(&[Factor::Z, Factor::I]).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(get(&[Factor::I, Factor::X]).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(get(&[Factor::Z, Factor::X]).re, -0.5, epsilon = 1e-14);
        assert_eq!(terms.len(), 4);
    }

    #[test]
    fn expand_zz_scaled() {
        let j = 7.3;
        let h = PauliString::new(vec![Factor::Z, Factor::Z], c(j, 0.0)).matrix(2).unwrap();
        let terms = expand_product_basis(&h).unwrap();
        assert_eq!(terms.len(), 1);
        assert_abs_diff_eq!(terms[0].1.re, j, epsilon = 1e-13);
    }

    #[test]
    fn coherence_orders() {
        let order = |f: Vec<Factor>| PauliString::unit(f).coherence_order().unwrap();
        assert_eq!(order(vec![Factor::Plus, Factor::Z, Factor::I]), 1);
        assert_eq!(order(vec![Factor::Plus, Factor::Minus, Factor::Z]), 0);
        assert_eq!(order(vec![Factor::Plus, Factor::Plus, Factor::Plus]), 3);
        assert!(PauliString::unit(vec![Factor::X]).coherence_order().is_err());
    }

    #[test]
    fn coherence_order_additive_under_concatenation() {
        let a = PauliString::unit(vec![Factor::Plus, Factor::Z]);
        let b = PauliString::unit(vec![Factor::Minus, Factor::Plus, Factor::I]);
        let mut joined = a.factors.clone();
        joined.extend_from_slice(&b.factors);
        let j = PauliString::unit(joined);
        assert_eq!(
            j.coherence_order().unwrap(),
            a.coherence_order().unwrap() + b.coherence_order().unwrap()
        );
    }

    #[test]
    fn product_basis_round_trip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4usize {
            for _ in 0..50 {
                let dim = 1 << n;
                let raw = CMat::from_fn(dim, dim, |_, _| {
                    c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
                });
                let herm = (&raw + raw.adjoint()) * c(0.5, 0.0);
                let terms = expand_product_basis(&herm).unwrap();
                let back = assemble(&terms, n).unwrap();
                assert!(max_norm(&(back - herm)) < 1e-12);
            }
        }
    }

    #[test]
    fn ladder_basis_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3usize {
            let dim = 1 << n;
            let raw = CMat::from_fn(dim, dim, |_, _| {
                c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let terms = expand_ladder_basis(&raw).unwrap();
            let back = assemble(&terms, n).unwrap();
            assert!(max_norm(&(back - raw)) < 1e-12);
        }
    }

    #[test]
    fn single_factor_products_match_matrices() {
        // symbolic product XZ on one slot equals matrix(X) * matrix(Z)
        let xz = Factor::X.matrix() * Factor::Z.matrix();
        // X*Z = -iY
        let expect = Factor::Y.matrix() * c(0.0, -1.0);
        assert_abs_diff_eq!(max_norm(&(xz - expect)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn fidelities() {
        let phi = c(0.0, 1.3).exp();
        let i2 = identity(1);
        assert_abs_diff_eq!(gate_fidelity(&i2, &(i2.clone() * phi)).unwrap(), 1.0, epsilon = 1e-14);
        let x = Factor::X.matrix();
        assert_abs_diff_eq!(gate_fidelity(&i2, &x).unwrap(), 0.0, epsilon = 1e-14);
        let rho = DensityMatrix::basis_state(2, 1);
        assert_abs_diff_eq!(state_fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(identity(1)).is_err()); // trace 2
        assert!(DensityMatrix::new(identity(1) * c(0.5, 0.0)).is_ok());
        let mut bad = identity(1) * c(0.5, 0.0);
        bad[(0, 1)] = c(0.1, 0.0); // non-Hermitian
        assert!(DensityMatrix::new(bad).is_err());
    }

    #[test]
    fn thermal_state_structure() {
        let rho = DensityMatrix::thermal(2, 0.01);
        let terms = expand_product_basis(rho.matrix()).unwrap();
        assert_abs_diff_eq!(
            coefficient_of(&terms, &[Factor::Z, Factor::I]).re,
            0.01,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            coefficient_of(&terms, &[Factor::I, Factor::Z]).re,
            0.01,
            epsilon = 1e-14
        );
    }
}
