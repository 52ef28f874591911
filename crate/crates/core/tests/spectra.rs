//! End-to-end spectral checks: reconstruction, tails and decay rates.

use ntk_spectra::kernels::{DotProductKernel, KernelFamily};
use ntk_spectra::spectral::{
    eigendecay_fit, mercer_spectrum, reconstruct, GegenbauerBasis, Parity, TailEstimator,
};

fn sup_error(kernel: &DotProductKernel<f64>, m: usize) -> f64 {
    let basis = GegenbauerBasis::<f64>::new(3, m).unwrap();
    let table = mercer_spectrum(kernel, 3, m, &basis).unwrap();
    (0..=200)
        .map(|k| -1.0 + k as f64 / 100.0)
        .map(|u| (reconstruct(&table, u) - kernel.eval(u).unwrap()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn reconstruction_converges_at_the_tail_rate() {
    for s in 1..=2u32 {
        let kernel = DotProductKernel::two_layer(KernelFamily::Nt, s, 3).unwrap();
        let ms = [10usize, 20, 40];
        let errs: Vec<f64> = ms.iter().map(|&m| sup_error(&kernel, m)).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "s={s}: {errs:?}");
        let slope = (errs[2] / errs[0]).ln() / 4f64.ln();
        assert!(slope <= -(2.0 * s as f64 - 1.0) + 0.5, "s={s}: slope {slope}");
    }
}

#[test]
fn truncation_error_sits_below_the_tail_estimate() {
    for family in [KernelFamily::Nt, KernelFamily::Rf] {
        let kernel = DotProductKernel::two_layer(family, 1, 3).unwrap();
        let tail = TailEstimator::new(family, 1, 3).unwrap().tail_sum(30).unwrap();
        let err = sup_error(&kernel, 30);
        assert!(err <= tail, "{family}: {err} > {tail}");
    }
}

#[test]
fn rf_two_decays_at_seven() {
    // RF with s = 2 on S^2: dominant parity decays like i^{-(d + 2s)} = i^{-7}.
    let kernel = DotProductKernel::two_layer(KernelFamily::Rf, 2, 3).unwrap();
    let basis = GegenbauerBasis::<f64>::new(3, 60).unwrap();
    let table = mercer_spectrum(&kernel, 3, 60, &basis).unwrap();
    let fit = eigendecay_fit(&table, Parity::Odd, (9, 59)).unwrap();
    assert!((fit.slope + 7.0).abs() < 0.7, "slope {}", fit.slope);
}
