//! Singular values checked against an independent Hermitian eigensolver.

use nalgebra::{Complex, Matrix4 as NaMatrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swsc_core::channel::{svd, svd_subchannels, Matrix4};
use swsc_core::Complex64;

fn random_matrix(rng: &mut impl Rng, scale: f64) -> Matrix4 {
    let mut h = [[Complex64::new(0.0, 0.0); 4]; 4];
    for row in &mut h {
        for z in row.iter_mut() {
            *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
        }
    }
    h
}

/// Eigenvalues of `H^H H`, non-increasing.
fn gram_eigenvalues(h: &Matrix4) -> [f64; 4] {
    let m = NaMatrix4::from_fn(|r, c| Complex::new(h[r][c].re, h[r][c].im));
    let gram = m.adjoint() * m;
    let mut ev: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    [ev[0], ev[1], ev[2], ev[3]]
}

#[test]
fn squared_singular_values_match_gram_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..200 {
        let h = random_matrix(&mut rng, if i % 2 == 0 { 1.0 } else { 3.0 });
        let sigma = svd_subchannels(&h).unwrap();
        let ev = gram_eigenvalues(&h);
        for (s, e) in sigma.iter().zip(ev) {
            assert!((s * s - e).abs() <= 1e-9, "sigma^2 {} vs eigenvalue {e}", s * s);
        }
        assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn factors_are_unitary_and_reconstruct() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..100 {
        let h = random_matrix(&mut rng, 1.0);
        let d = svd(&h).unwrap();
        let r = d.reconstruct();
        let mut frob = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                frob += (r[i][j] - h[i][j]).norm_sqr();
            }
        }
        assert!(frob.sqrt() <= 1e-9);
        for m in [&d.u, &d.v] {
            let na = NaMatrix4::from_fn(|r, c| Complex::new(m[r][c].re, m[r][c].im));
            let eye = na.adjoint() * na;
            assert!((eye - NaMatrix4::identity()).norm() <= 1e-9);
        }
    }
}

#[test]
fn rank_one_matrix() {
    // outer product u v^H has one non-zero singular value |u| |v|
    let u = [1.0, 2.0, -1.0, 0.5];
    let v = [0.5, -0.5, 1.0, 2.0];
    let mut h = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            h[i][j] = Complex64::new(u[i] * v[j], 0.0);
        }
    }
    let norm = |x: &[f64; 4]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let sigma = svd_subchannels(&h).unwrap();
    assert!((sigma[0] - norm(&u) * norm(&v)).abs() < 1e-12);
    assert!(sigma[1..].iter().all(|&s| s.abs() < 1e-9));
}
