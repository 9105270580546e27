//! Shared helpers for the integration suites: seeded random systems and the
//! standard network fixtures.

#![allow(dead_code)]

use qmemnet::linsys::PassiveLinearSystem;
use qmemnet::presets::{self, AtomicNetworkParams};
use qmemnet::{C64, CMatrix, CVector, linalg};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random passive system with the given mode count; unconditioned.
pub fn random_passive(rng: &mut ChaCha8Rng, n: usize) -> PassiveLinearSystem {
    let raw = CMatrix::from_fn(n, n, |_, _| random_c64(rng));
    let omega = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let coupling = CVector::from_fn(n, |_, _| random_c64(rng));
    PassiveLinearSystem::new(omega, coupling).expect("hermitized omega is valid")
}

/// Random passive Hurwitz system with a decay margin that keeps pulse
/// supports and integration grids small: |abscissa| ≥ 0.1·ρ(A), ρ(A) ≤ 6.
pub fn random_passive_hurwitz(rng: &mut ChaCha8Rng, n: usize) -> PassiveLinearSystem {
    loop {
        let sys = random_passive(rng, n);
        let abscissa = sys.spectral_abscissa().unwrap();
        let radius = linalg::spectral_radius(sys.drift()).unwrap();
        if radius <= 6.0 && abscissa < -0.1 * radius.max(0.5) {
            return sys;
        }
    }
}

/// Random unitary from the QR factorization of a random complex matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let raw = CMatrix::from_fn(n, n, |_, _| random_c64(rng));
    raw.qr().q()
}

/// Random complex vector with entries uniform in the unit square.
pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| random_c64(rng))
}

/// Random unit-norm complex coefficient vector.
pub fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| random_c64(rng));
        let norm = v.norm();
        if norm > 1e-3 {
            return v / C64::new(norm, 0.0);
        }
    }
}

/// A passive system with a guaranteed decoupled block: a random Hurwitz
/// buffer of size `m` embedded in `n` modes and rotated by a random
/// unitary, so the memory structure is hidden from plain inspection.
pub fn random_with_memory(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
) -> (PassiveLinearSystem, CMatrix) {
    assert!(m < n);
    let inner = random_passive_hurwitz(rng, m);
    let mut omega = CMatrix::zeros(n, n);
    omega.view_mut((0, 0), (m, m)).copy_from(inner.omega());
    let mut coupling = CVector::zeros(n);
    for k in 0..m {
        coupling[k] = inner.coupling()[k];
    }
    let u = random_unitary(rng, n);
    let omega_rot = &u * omega * u.adjoint();
    let coupling_rot = (coupling.transpose() * u.adjoint()).transpose();
    (
        PassiveLinearSystem::new(omega_rot, coupling_rot).unwrap(),
        u,
    )
}

/// The four-node network in the memory frame at detuning `delta`.
pub fn primed_network(delta: f64) -> PassiveLinearSystem {
    presets::atomic_network_primed(&AtomicNetworkParams {
        kappa: 2.0,
        g: 1.0,
        delta,
    })
    .unwrap()
}

/// Coefficients (0, 0, 1/√2, 1/√2) on the memory pair.
pub fn memory_pair_coefficients() -> CVector {
    let inv = 1.0 / 2f64.sqrt();
    CVector::from_vec(vec![
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(inv, 0.0),
        C64::new(inv, 0.0),
    ])
}
