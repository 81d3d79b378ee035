use pceuq::marginals::{fit_kde, KdeMarginal};
use pceuq::metrics::{kde_kl_divergence, kl_divergence, kl_divergence_fn, mae, rel_moment_errors, rmae, uniform_grid};
use pceuq::special::norm_pdf;
use pceuq::Error;
use proptest::prelude::*;

#[test]
fn examples() {
    assert_eq!(mae(&[1.5, 2.5], &[1.0, 2.0]).unwrap(), 0.5);
    assert!((rmae(&[1.1, 2.2], &[1.0, 2.0]).unwrap() - 0.1).abs() < 1e-15);
    assert!(matches!(rmae(&[1.0, 1.0], &[1.0, 0.0]), Err(Error::ZeroReference)));
    assert!(matches!(mae(&[], &[]), Err(Error::InsufficientData { .. })));
    let (em, es) = rel_moment_errors(1.0, 0.5, 2.0, 1.0).unwrap();
    assert_eq!((em, es), (0.5, 0.5));
}

#[test]
fn kl_of_identical_densities_is_zero() {
    let k = fit_kde(&[0.0, 0.4, 1.0, 3.0]).unwrap();
    assert!(kde_kl_divergence(&k, &k).unwrap() < 1e-12);
    let grid = uniform_grid(-4.0, 4.0, 256).unwrap();
    let f: Vec<f64> = grid.iter().map(|&x| norm_pdf(x)).collect();
    assert_eq!(kl_divergence(&f, &f, &grid).unwrap(), 0.0);
}

#[test]
fn kl_shifted_gaussians() {
    // KL(N(0,1) ‖ N(μ,1)) = μ²/2.
    for mu in [0.1, 0.5, 1.0] {
        let kl = kl_divergence_fn(|x| norm_pdf(x - mu), norm_pdf, -10.0, 10.0, 4096).unwrap();
        assert!((kl - 0.5 * mu * mu).abs() < 1e-6, "mu={mu} kl={kl}");
    }
}

#[test]
fn kde_kl_close_to_closed_form() {
    // Both single-kernel KDEs: exact Gaussians with σ = 1 and 1.5.
    let a = KdeMarginal::with_bandwidth(vec![0.0], 1.0).unwrap();
    let b = KdeMarginal::with_bandwidth(vec![0.0], 1.5).unwrap();
    let want = (1.5f64).ln() + 1.0 / (2.0 * 2.25) - 0.5;
    let kl = kde_kl_divergence(&b, &a).unwrap();
    assert!((kl - want).abs() < 1e-5, "{kl} vs {want}");
}

#[test]
fn grid_checks() {
    assert!(matches!(uniform_grid(0.0, 1.0, 10), Err(Error::GridTooCoarse(10, 128))));
    assert!(matches!(uniform_grid(1.0, 0.0, 200), Err(Error::InvalidInterval { .. })));
    let g = uniform_grid(0.0, 1.0, 128).unwrap();
    assert!(matches!(kl_divergence(&g[..5], &g, &g), Err(Error::LengthMismatch(5, 128))));
}

proptest! {
    #[test]
    fn permutation_invariant(pairs in prop::collection::vec((-10.0f64..10.0, 0.5f64..10.0), 1..40), seed in 0u64..1000) {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.iter().cloned().unzip();
        let mut idx: Vec<usize> = (0..p.len()).collect();
        let n = idx.len();
        for i in 0..n {
            idx.swap(i, (seed as usize * 31 + i * 17) % n);
        }
        let pp: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
        let tt: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
        prop_assert!((mae(&p, &t).unwrap() - mae(&pp, &tt).unwrap()).abs() < 1e-12);
        prop_assert!((rmae(&p, &t).unwrap() - rmae(&pp, &tt).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rmae_scale_invariant(pairs in prop::collection::vec((-10.0f64..10.0, 0.5f64..10.0), 1..40), c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]) {
        let (p, t): (Vec<f64>, Vec<f64>) = pairs.iter().cloned().unzip();
        let ps: Vec<f64> = p.iter().map(|x| c * x).collect();
        let ts: Vec<f64> = t.iter().map(|x| c * x).collect();
        let a = rmae(&p, &t).unwrap();
        prop_assert!((a - rmae(&ps, &ts).unwrap()).abs() < 1e-12 * (1.0 + a));
    }

    #[test]
    fn kl_nonnegative(m1 in -2.0f64..2.0, s1 in 0.3f64..3.0, m2 in -2.0f64..2.0, s2 in 0.3f64..3.0) {
        let kl = kl_divergence_fn(|x| norm_pdf((x - m1) / s1) / s1, |x| norm_pdf((x - m2) / s2) / s2, -25.0, 25.0, 4096).unwrap();
        prop_assert!(kl >= -1e-6);
    }
}
