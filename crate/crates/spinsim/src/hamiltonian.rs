//! Internal (liquid and solid), RF and gradient Hamiltonians.
//!
//! All Hamiltonians are built in the multi-channel rotating frame and stored
//! in rad/s; offsets and J values enter in Hz and are converted here, once.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::algebra::{identity, CMat, Factor, PauliString};
use crate::system::{SpinSystem, SystemError};

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("rotation axis must be a unit vector (|v| = {0})")]
    NonUnitAxis(f64),
    #[error("no dipolar parameters for pair ({0}, {1})")]
    MissingDipolar(String, String),
    #[error(transparent)]
    Algebra(#[from] crate::algebra::AlgebraError),
}

/// Weak-coupling liquid-state internal Hamiltonian,
/// `H = 1/2 Σ ω_i σz^i + (π/2) Σ_{i<j} J_ij σz^i σz^j` with ω = 2π·offset.
pub fn liquid_hamiltonian(sys: &SpinSystem) -> Result<CMat, HamiltonianError> {
    let n = sys.len();
    let dim = 1usize << n;
    let mut h = CMat::zeros(dim, dim);
    for i in 0..n {
        let w = 2.0 * PI * sys.spin(i).larmor_offset_hz;
        h += PauliString::single(n, i, Factor::Z).matrix(n)? * C64::new(0.5 * w, 0.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let jij = sys.j_hz(i, j);
            if jij == 0.0 {
                continue;
            }
            let mut f = vec![Factor::I; n];
            f[i] = Factor::Z;
            f[j] = Factor::Z;
            h += PauliString::unit(f).matrix(n)? * C64::new(0.5 * PI * jij, 0.0);
        }
    }
    Ok(h)
}

/// Liquid Hamiltonian with all couplings involving `decoupled` spins zeroed.
/// Used for acquisition under decoupling.
pub fn liquid_hamiltonian_decoupled(
    sys: &SpinSystem,
    decoupled: &[usize],
) -> Result<CMat, HamiltonianError> {
    let n = sys.len();
    let dim = 1usize << n;
    let mut h = CMat::zeros(dim, dim);
    for i in 0..n {
        let w = 2.0 * PI * sys.spin(i).larmor_offset_hz;
        h += PauliString::single(n, i, Factor::Z).matrix(n)? * C64::new(0.5 * w, 0.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if decoupled.contains(&i) || decoupled.contains(&j) {
                continue;
            }
            let jij = sys.j_hz(i, j);
            if jij == 0.0 {
                continue;
            }
            let mut f = vec![Factor::I; n];
            f[i] = Factor::Z;
            f[j] = Factor::Z;
            h += PauliString::unit(f).matrix(n)? * C64::new(0.5 * PI * jij, 0.0);
        }
    }
    Ok(h)
}

/// Solid-state internal Hamiltonian: Zeeman offsets plus, per dipolar pair,
/// `b(3cos²θ-1) σz σz - (b/4)(3cos²θ-1)(σ+σ- + σ-σ+)` with b = γγ'/4r³.
///
/// With `heteronuclear_secular` set, the flip-flop term is dropped for pairs
/// on different channels.
pub fn solid_hamiltonian(
    sys: &SpinSystem,
    heteronuclear_secular: bool,
) -> Result<CMat, HamiltonianError> {
    let n = sys.len();
    let dim = 1usize << n;
    let mut h = CMat::zeros(dim, dim);
    for i in 0..n {
        let w = 2.0 * PI * sys.spin(i).larmor_offset_hz;
        h += PauliString::single(n, i, Factor::Z).matrix(n)? * C64::new(0.5 * w, 0.0);
    }
    for ((i, j), d) in sys.dipolar_pairs() {
        let ang = 3.0 * d.theta_rad.cos().powi(2) - 1.0;
        let zz_coeff = d.b_rad_per_s * ang;
        let mut zz = vec![Factor::I; n];
        zz[i] = Factor::Z;
        zz[j] = Factor::Z;
        h += PauliString::unit(zz).matrix(n)? * C64::new(zz_coeff, 0.0);

        let drop_flip_flop = heteronuclear_secular && !sys.same_channel(i, j);
        if !drop_flip_flop {
            let ff_coeff = -d.b_rad_per_s * ang / 4.0;
            let mut pm = vec![Factor::I; n];
            pm[i] = Factor::Plus;
            pm[j] = Factor::Minus;
            let mut mp = vec![Factor::I; n];
            mp[i] = Factor::Minus;
            mp[j] = Factor::Plus;
            h += (PauliString::unit(pm).matrix(n)? + PauliString::unit(mp).matrix(n)?)
                * C64::new(ff_coeff, 0.0);
        }
    }
    Ok(h)
}

/// Ideal (delta-pulse) RF rotation: product over `targets` of
/// `exp(-i (v·σ) φ / 2)`.
pub fn rf_rotation(
    n: usize,
    targets: &[usize],
    axis: [f64; 3],
    angle_rad: f64,
) -> Result<CMat, HamiltonianError> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(HamiltonianError::NonUnitAxis(norm));
    }
    let half = angle_rad / 2.0;
    // exp(-i (v·σ) φ/2) = cos(φ/2) I - i sin(φ/2) (v·σ)
    let vsigma = Factor::X.matrix() * C64::new(axis[0], 0.0)
        + Factor::Y.matrix() * C64::new(axis[1], 0.0)
        + Factor::Z.matrix() * C64::new(axis[2], 0.0);
    let single = Factor::I.matrix() * C64::new(half.cos(), 0.0)
        + vsigma * C64::new(0.0, -half.sin());
    let mut u = CMat::from_element(1, 1, C64::new(1.0, 0.0));
    for k in 0..n {
        if targets.contains(&k) {
            u = u.kronecker(&single);
        } else {
            u = u.kronecker(&Factor::I.matrix());
        }
    }
    Ok(u)
}

/// Gradient-phase propagator at position `z`:
/// `exp(-i g z Σ (γ_j/2) σz^j · duration)`. Diagonal.
pub fn gradient_phase(
    sys: &SpinSystem,
    strength_t_per_m: f64,
    duration_s: f64,
    z_m: f64,
) -> Result<CMat, HamiltonianError> {
    let n = sys.len();
    let dim = 1usize << n;
    let mut h = CMat::zeros(dim, dim);
    for i in 0..n {
        let gamma = sys.gamma(i)?;
        h += PauliString::single(n, i, Factor::Z).matrix(n)?
            * C64::new(strength_t_per_m * z_m * gamma / 2.0, 0.0);
    }
    let mut u = identity(n);
    for k in 0..dim {
        u[(k, k)] = (C64::new(0.0, -duration_s) * h[(k, k)]).exp();
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{coefficient_of, expand_product_basis, gate_fidelity, max_norm};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn two_spin_j(j: f64) -> SpinSystem {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "13C", 0.0).unwrap();
        sys.add_spin("b", "13C", 0.0).unwrap();
        sys.set_j("a", "b", j).unwrap();
        sys
    }

    #[test]
    fn two_spin_zz_diagonal() {
        let h = liquid_hamiltonian(&two_spin_j(1.0)).unwrap();
        let expect = [PI / 2.0, -PI / 2.0, -PI / 2.0, PI / 2.0];
        for (i, e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(h[(i, i)].re, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_spin_offset() {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "1H", 7.0).unwrap();
        let h = liquid_hamiltonian(&sys).unwrap();
        assert_abs_diff_eq!(h[(0, 0)].re, PI * 7.0, epsilon = 1e-10);
        assert_abs_diff_eq!(h[(1, 1)].re, -PI * 7.0, epsilon = 1e-10);
    }

    #[test]
    fn alanine_coefficients() {
        let sys = SpinSystem::alanine();
        let h = liquid_hamiltonian(&sys).unwrap();
        let terms = expand_product_basis(&h).unwrap();
        use Factor::{I, Z};
        // rotating frame: Zeeman 10^8-scale terms absorbed; shift terms are
        // ω/2 = π·offset
        assert_abs_diff_eq!(coefficient_of(&terms, &[Z, I, I]).re, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(
            coefficient_of(&terms, &[I, Z, I]).re,
            -PI * 12580.0,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(
            coefficient_of(&terms, &[I, I, Z]).re,
            PI * 3440.0,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(coefficient_of(&terms, &[Z, Z, I]).re, PI / 2.0 * 53.0, epsilon = 1e-9);
        assert_abs_diff_eq!(coefficient_of(&terms, &[Z, I, Z]).re, PI / 2.0 * 38.0, epsilon = 1e-9);
        assert_abs_diff_eq!(coefficient_of(&terms, &[I, Z, Z]).re, PI / 2.0 * 1.2, epsilon = 1e-9);
        // only Z and ZZ strings appear
        for (ps, _) in &terms {
            assert!(ps.factors.iter().all(|f| matches!(f, Factor::I | Factor::Z)));
        }
    }

    #[test]
    fn rf_90x_matrix() {
        let u = rf_rotation(1, &[0], [1.0, 0.0, 0.0], PI / 2.0).unwrap();
        assert_abs_diff_eq!(u[(0, 0)].re, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(u[(0, 1)].im, -FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(u[(1, 0)].im, -FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(u[(1, 1)].re, FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn rf_hadamard_up_to_phase() {
        let s = FRAC_1_SQRT_2;
        let u = rf_rotation(1, &[0], [s, 0.0, s], PI).unwrap();
        let had = CMat::from_row_slice(
            2,
            2,
            &[
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(s, 0.0),
                C64::new(-s, 0.0),
            ],
        );
        assert_abs_diff_eq!(gate_fidelity(&u, &had).unwrap(), 1.0, epsilon = 1e-12);
        // global phase is -i
        assert!(max_norm(&(u - had * C64::new(0.0, -1.0))) < 1e-12);
    }

    #[test]
    fn rf_zero_angle_and_inverse() {
        let u = rf_rotation(3, &[0, 2], [0.0, 1.0, 0.0], 0.0).unwrap();
        assert!(max_norm(&(u - identity(3))) < 1e-15);
        let a = rf_rotation(2, &[1], [0.0, 1.0, 0.0], 1.23).unwrap();
        let b = rf_rotation(2, &[1], [0.0, 1.0, 0.0], -1.23).unwrap();
        assert!(max_norm(&(a * b - identity(2))) < 1e-12);
    }

    #[test]
    fn rf_rejects_non_unit_axis() {
        assert!(rf_rotation(1, &[0], [1.0, 1.0, 0.0], 0.3).is_err());
    }

    #[test]
    fn solid_magic_angle_kills_dipolar() {
        let magic = (1.0f64 / 3.0f64.sqrt()).acos();
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "1H", 0.0).unwrap();
        sys.add_spin("b", "1H", 0.0).unwrap();
        sys.set_dipolar("a", "b", crate::system::DipolarCoupling { b_rad_per_s: 1.0e4, theta_rad: magic })
            .unwrap();
        let h = solid_hamiltonian(&sys, false).unwrap();
        assert!(max_norm(&h) < 1e-9);
    }

    #[test]
    fn solid_flip_flop_ratio() {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "1H", 0.0).unwrap();
        sys.add_spin("b", "1H", 0.0).unwrap();
        sys.set_dipolar("a", "b", crate::system::DipolarCoupling { b_rad_per_s: 1.0, theta_rad: 0.0 })
            .unwrap();
        let h = solid_hamiltonian(&sys, false).unwrap();
        // project out coefficients of σzσz and (σ+σ- + σ-σ+)
        use Factor::{Minus, Plus, Z};
        let zz = PauliString::unit(vec![Z, Z]).matrix(2).unwrap();
        let pm = PauliString::unit(vec![Plus, Minus]).matrix(2).unwrap()
            + PauliString::unit(vec![Minus, Plus]).matrix(2).unwrap();
        let czz = (zz.adjoint() * &h).trace().re / (zz.adjoint() * &zz).trace().re;
        let cff = (pm.adjoint() * &h).trace().re / (pm.adjoint() * &pm).trace().re;
        assert_abs_diff_eq!(cff / czz, -0.25, epsilon = 1e-12);
    }

    #[test]
    fn solid_heteronuclear_secular_drops_flip_flop() {
        let mut sys = SpinSystem::new();
        sys.add_spin("h", "1H", 0.0).unwrap();
        sys.add_spin("c", "13C", 0.0).unwrap();
        sys.set_dipolar("h", "c", crate::system::DipolarCoupling { b_rad_per_s: 5.0e3, theta_rad: 0.3 })
            .unwrap();
        let h = solid_hamiltonian(&sys, true).unwrap();
        let terms = expand_product_basis(&h).unwrap();
        use Factor::{X, Y};
        assert_abs_diff_eq!(coefficient_of(&terms, &[X, X]).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(coefficient_of(&terms, &[Y, Y]).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn solid_conserves_total_z_for_like_spins() {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "1H", 11.0).unwrap();
        sys.add_spin("b", "1H", -4.0).unwrap();
        sys.set_dipolar("a", "b", crate::system::DipolarCoupling { b_rad_per_s: 3.0e3, theta_rad: 0.7 })
            .unwrap();
        let h = solid_hamiltonian(&sys, false).unwrap();
        let total_z = PauliString::single(2, 0, Factor::Z).matrix(2).unwrap()
            + PauliString::single(2, 1, Factor::Z).matrix(2).unwrap();
        assert!(max_norm(&(&h * &total_z - &total_z * &h)) < 1e-9);
    }

    #[test]
    fn gradient_phase_cases() {
        let mut sys = SpinSystem::new();
        sys.add_spin("a", "1H", 0.0).unwrap();
        assert!(max_norm(&(gradient_phase(&sys, 0.1, 1e-3, 0.0).unwrap() - identity(1))) < 1e-15);
        assert!(max_norm(&(gradient_phase(&sys, 0.0, 1e-3, 0.01).unwrap() - identity(1))) < 1e-15);
        // choose γ g z δ = π
        let gamma = crate::system::channel_gamma("1H").unwrap();
        let g = 0.05;
        let delta = 1e-3;
        let z = PI / (gamma * g * delta);
        let u = gradient_phase(&sys, g, delta, z).unwrap();
        assert_abs_diff_eq!(u[(0, 0)].im, -1.0, epsilon = 1e-10); // e^{-iπ/2}
        assert_abs_diff_eq!(u[(1, 1)].im, 1.0, epsilon = 1e-10); // e^{+iπ/2}
    }
}
