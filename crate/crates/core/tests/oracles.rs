//! Oracle procedures against values computed independently (high-precision
//! summation and adaptive quadrature outside this crate).

use semichan::scenarios::{
    bpsk_awgn_mi, gauss_hermite, gaussian_mi_closed_form, gaussian_mi_quadrature, poisson_count_mi,
    preset_by_name, Oracle,
};
use semichan::verify::Fixtures;

#[test]
fn gaussian_closed_form_and_quadrature() {
    let pinned = 0.346_573_590_279_972_64;
    assert!((gaussian_mi_closed_form(1.0, 1.0, 1.0) - pinned).abs() < 1e-15);
    assert!((gaussian_mi_quadrature(1.0, 1.0, 1.0, 4000) - pinned).abs() < 1e-13);
}

#[test]
fn bpsk_quadrature_values() {
    for (s, pinned) in [
        (0.25, 0.111_421_482_184_736_02),
        (1.0, 0.336_830_820_020_683_76),
        (4.0, 0.632_719_758_543_877_6),
    ] {
        let v = bpsk_awgn_mi(s);
        assert!((v - pinned).abs() < 1e-12, "s = {s}: {v} vs {pinned}");
    }
    // Adaptive quadrature agrees to ~1e-10.
    assert!((bpsk_awgn_mi(1.0) - 0.336_830_820_346_831_6).abs() < 1e-9);
}

#[test]
fn poisson_exact_sums() {
    let v = poisson_count_mi(&[1.0, 2.0], &[0.5, 0.5]);
    assert!((v - 0.078_709_199_794_526_69).abs() < 1e-15, "{v}");
    let v = poisson_count_mi(&[2.0, 6.0], &[0.5, 0.5]);
    assert!((v - 0.352_215_516_943_091_8).abs() < 1e-14, "{v}");
}

#[test]
fn hermite_nodes_are_symmetric() {
    let (x, w) = gauss_hermite(40);
    for i in 0..20 {
        assert_eq!(x[i], -x[39 - i]);
        assert_eq!(w[i], w[39 - i]);
        assert!(w[i] > 0.0);
    }
}

#[test]
fn bundled_fixtures_equal_pinned_values() {
    let f = Fixtures::pinned();
    assert_eq!(f.gaussian_conjugate_mi, 0.346_573_590_279_972_64);
    assert_eq!(f.bpsk_gaussian_mi, 0.336_830_820_020_683_76);
    assert_eq!(f.poisson_binary_mi, 0.078_709_199_794_526_69);
}

#[test]
fn presets_carry_their_oracles() {
    let g = preset_by_name("gaussian-conjugate", None).unwrap();
    assert!(matches!(g.oracle, Oracle::ClosedForm(v) if (v - 0.346_573_590_279_972_64).abs() < 1e-15));
    let b = preset_by_name("bpsk-gaussian", None).unwrap();
    assert!(matches!(b.oracle, Oracle::Quadrature(v) if (v - 0.336_830_820_020_683_76).abs() < 1e-12));
    let p = preset_by_name("poisson-binary", None).unwrap();
    assert!(matches!(p.oracle, Oracle::ExactSum(v) if (v - 0.078_709_199_794_526_69).abs() < 1e-15));
    let j = preset_by_name("jump-diffusion-feedback", None).unwrap();
    assert_eq!(j.oracle, Oracle::CrossRoute);
}
