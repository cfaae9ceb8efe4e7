mod common;

use common::uniform;
use sff_core::analytics::{scba_closed_form, scba_solve, sff2_exact};
use sff_core::ensembles::EnsembleKind;
use sff_core::rng::RngStream;
use sff_core::saddle::{f_closed, f_numeric, sff2_timedomain, SaddleConfig};
use sff_core::sine_kernel::{assemble_sff2, four_type_identities, three_type_identity};

/// Phases in [-0.5, 0.5] with every pairwise separation in [0.05, 1].
fn random_phases(rng: &mut RngStream) -> [f64; 4] {
    loop {
        let phi = [0; 4].map(|_| uniform(rng) - 0.5);
        let ok = (0..4).all(|i| (i + 1..4).all(|j| (phi[i] - phi[j]).abs() >= 0.05));
        if ok {
            return phi;
        }
    }
}

#[test]
fn every_saddle_matches_its_numerical_derivative() {
    let mut rng = RngStream::new(41, 0);
    for c in &SaddleConfig::ALL {
        for dim in [4, 10] {
            for _ in 0..20 {
                let phi = random_phases(&mut rng);
                let exact = f_closed(c, phi, dim).unwrap();
                let num = f_numeric(c, phi, dim).unwrap();
                let rel = (num - exact).norm() / exact.norm();
                assert!(rel <= 1e-5, "{c} D = {dim} phi = {phi:?}: {rel:e}");
            }
        }
    }
}

#[test]
fn replica_symmetry_of_single_transpositions() {
    let mut rng = RngStream::new(42, 0);
    for _ in 0..100 {
        let p = random_phases(&mut rng);
        let swapped = [p[1], p[0], p[3], p[2]];
        let a = f_closed(&SaddleConfig::T24, p, 10).unwrap();
        let b = f_closed(&SaddleConfig::T13, swapped, 10).unwrap();
        assert!((a - b).norm() <= 1e-12 * a.norm());
    }
}

#[test]
fn three_formalisms_agree_on_the_second_moment() {
    for dim in [2usize, 3, 4, 5, 10] {
        let d = dim as f64;
        for t in 0..=3 * dim {
            let t = t as f64;
            let exact = sff2_exact(EnsembleKind::Cue, t, dim, false).unwrap();
            let kernel = assemble_sff2(t, dim, false).unwrap();
            let td = sff2_timedomain(t / d, dim).unwrap().total();
            let scale = exact.abs().max(1.0);
            assert!((kernel - exact).abs() <= 1e-12 * scale, "D = {dim} t = {t}");
            assert!((td - exact).abs() <= 1e-12 * scale, "D = {dim} t = {t}");
            if t >= 1.0 {
                let full = sff2_exact(EnsembleKind::Cue, t, dim, true).unwrap();
                let full_kernel = assemble_sff2(t, dim, true).unwrap();
                assert!((full - td).abs() <= 1e-12 * full.abs());
                assert!((full_kernel - td).abs() <= 1e-12 * full.abs());
            }
        }
    }
}

#[test]
fn box_identities() {
    for dim in [2usize, 5, 8, 13] {
        for t in 0..=2 * dim {
            let (lhs, rhs) = three_type_identity(t as f64, dim).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10);
            let four = four_type_identities(t as f64, dim).unwrap();
            for k in 0..3 {
                assert!((four.boxes[k] - four.closed[k]).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn scba_matches_closed_form_and_semicircle() {
    let dim = 50;
    for k in 0..100 {
        let lambda = -2.0 + (k as f64 + 0.5) * 0.04;
        let s = scba_solve(lambda, dim).unwrap();
        let g = scba_closed_form(lambda).unwrap();
        assert!((s.green - g).norm() <= 1e-10, "lambda = {lambda}");
        let rho = dim as f64 / (2.0 * std::f64::consts::PI) * (4.0 - lambda * lambda).sqrt();
        assert!((s.density - rho).abs() <= 1e-9 * rho);
    }
}
