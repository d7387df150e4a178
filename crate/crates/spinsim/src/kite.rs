//! Sparse relaxation structure in the raising/lowering product basis.
//!
//! In the {1, σz, σ+, σ−} product basis the relaxation superoperator is
//! block-sparse: the {1, σz}-only strings form one fully coupled block, and
//! every string containing a σ± couples only to itself. Strings related by
//! spin permutation or global ± exchange share a decay rate, which groups
//! the basis into a small set of symmetry classes (13 classes at three
//! spins). [`KiteModel`] assigns one decay rate per class and is applied as
//! pure coefficient decay — no cross-relaxation between classes.

use std::collections::BTreeMap;

use crate::algebra::Factor;

/// Canonical symmetry-class label for a ladder-basis string: `±` symbols
/// first (majority sign, then minority), then `Z`, then `1`, e.g. `±∓Z` or
/// `ZZ1`.
pub fn group_label(factors: &[Factor]) -> String {
    let mut np = 0usize;
    let mut nm = 0usize;
    let mut nz = 0usize;
    let mut n1 = 0usize;
    for f in factors {
        match f {
            Factor::Plus => np += 1,
            Factor::Minus => nm += 1,
            Factor::Z => nz += 1,
            Factor::I => n1 += 1,
            Factor::X | Factor::Y => panic!("group_label is defined on ladder-basis strings"),
        }
    }
    let major = np.max(nm);
    let minor = np.min(nm);
    let mut s = String::new();
    s.push_str(&"±".repeat(major));
    s.push_str(&"∓".repeat(minor));
    s.push_str(&"Z".repeat(nz));
    s.push_str(&"1".repeat(n1));
    s
}

/// Number of ladder-basis strings in each symmetry class at `n` spins.
pub fn group_multiplicities(n: usize) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    let basis = [Factor::I, Factor::Z, Factor::Plus, Factor::Minus];
    for code in 0..(1usize << (2 * n)) {
        let factors: Vec<Factor> = (0..n).map(|k| basis[(code >> (2 * k)) & 3]).collect();
        *out.entry(group_label(&factors)).or_insert(0) += 1;
    }
    out
}

/// Allowed (row-string, col-string) positions of the relaxation
/// superoperator: every pair within the {1, Z}-only block, plus the
/// diagonal position of every string containing a σ±. Strings are encoded
/// base-4 (two bits per spin: 0=1, 1=Z, 2=+, 3=−), least-significant pair =
/// rightmost spin.
pub fn kite_mask(n: usize) -> Vec<(usize, usize)> {
    assert!(n >= 1);
    let total = 1usize << (2 * n);
    let is_zz = |code: usize| (0..n).all(|k| ((code >> (2 * k)) & 3) < 2);
    let mut out = Vec::new();
    let block: Vec<usize> = (0..total).filter(|&c| is_zz(c)).collect();
    for &r in &block {
        for &c in &block {
            out.push((r, c));
        }
    }
    for c in 0..total {
        if !is_zz(c) {
            out.push((c, c));
        }
    }
    out
}

/// Diagonal relaxation model: one decay rate (1/s) per symmetry class.
#[derive(Debug, Clone, Default)]
pub struct KiteModel {
    rates: BTreeMap<String, f64>,
}

impl KiteModel {
    /// Build from explicit per-class rates. The identity class decays at 0
    /// regardless of the map (trace preservation); negative rates are
    /// rejected.
    pub fn from_rates(rates: BTreeMap<String, f64>) -> Result<Self, String> {
        for (k, &r) in &rates {
            if r < 0.0 || !r.is_finite() {
                return Err(format!("rate for class {k} must be finite and >= 0, got {r}"));
            }
        }
        Ok(Self { rates })
    }

    /// Uniform-field limit: every non-identity class decays at `rate`.
    pub fn uniform(rate: f64) -> Self {
        assert!(rate >= 0.0 && rate.is_finite());
        let mut rates = BTreeMap::new();
        rates.insert("*".to_string(), rate);
        Self { rates }
    }

    /// Decay rate for a ladder-basis string.
    pub fn rate(&self, factors: &[Factor]) -> f64 {
        if factors.iter().all(|f| matches!(f, Factor::I)) {
            return 0.0;
        }
        let label = group_label(factors);
        if let Some(&r) = self.rates.get(&label) {
            return r;
        }
        self.rates.get("*").copied().unwrap_or(0.0)
    }

    pub fn is_trivial(&self) -> bool {
        self.rates.values().all(|&r| r == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_spin_mask_has_120_positions() {
        assert_eq!(kite_mask(3).len(), 120);
    }

    #[test]
    fn three_spin_class_multiplicities() {
        let m = group_multiplicities(3);
        let expect: &[(&str, usize)] = &[
            ("111", 1),
            ("Z11", 3),
            ("ZZ1", 3),
            ("ZZZ", 1),
            ("±11", 6),
            ("±Z1", 12),
            ("±ZZ", 6),
            ("±∓1", 6),
            ("±∓Z", 6),
            ("±±1", 6),
            ("±±Z", 6),
            ("±±∓", 6),
            ("±±±", 2),
        ];
        assert_eq!(m.len(), 13);
        for (label, count) in expect {
            assert_eq!(m.get(*label), Some(count), "class {label}");
        }
        assert_eq!(m.values().sum::<usize>(), 64);
    }

    #[test]
    fn single_spin_mask() {
        // {1,Z} block (4 pairs) plus the two ± self-couplings
        let mask = kite_mask(1);
        assert_eq!(mask.len(), 6);
        assert!(mask.contains(&(2, 2)) && mask.contains(&(3, 3)));
    }

    #[test]
    fn mask_count_scales_as_blocks() {
        for n in 1..=4 {
            let expect = (1usize << n) * (1 << n) + ((1usize << (2 * n)) - (1 << n));
            assert_eq!(kite_mask(n).len(), expect, "n = {n}");
        }
    }

    #[test]
    fn identity_class_rate_is_zero() {
        let k = KiteModel::uniform(7.0);
        assert_eq!(k.rate(&[Factor::I, Factor::I]), 0.0);
        assert_eq!(k.rate(&[Factor::Plus, Factor::Z]), 7.0);
    }

    #[test]
    fn class_lookup_beats_wildcard() {
        let mut rates = BTreeMap::new();
        rates.insert("±1".to_string(), 2.5);
        rates.insert("*".to_string(), 1.0);
        let k = KiteModel::from_rates(rates).unwrap();
        assert_eq!(k.rate(&[Factor::Plus, Factor::I]), 2.5);
        assert_eq!(k.rate(&[Factor::Minus, Factor::I]), 2.5);
        assert_eq!(k.rate(&[Factor::Z, Factor::Z]), 1.0);
    }

    #[test]
    fn negative_rate_rejected() {
        let mut rates = BTreeMap::new();
        rates.insert("Z1".to_string(), -1.0);
        assert!(KiteModel::from_rates(rates).is_err());
    }
}
