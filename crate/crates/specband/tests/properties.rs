//! Randomized invariants, complementing the pinned-value acceptance gate.

use std::f64::consts::PI;

use proptest::prelude::*;
use specband::ebbm::{self, Reservoirs};
use specband::floquet;
use specband::numerics::Interval;
use specband::potential::PotentialSpec;
use specband::transfer;

fn arb_potential() -> impl Strategy<Value = PotentialSpec> {
    prop_oneof![
        Just(PotentialSpec::zero()),
        (-2.0..2.0f64).prop_map(PotentialSpec::constant),
        prop::collection::vec(-2.0..2.0f64, 1..8).prop_map(PotentialSpec::periodic),
        (0.0..4.0f64, any::<u64>()).prop_map(|(w, s)| PotentialSpec::anderson(w, s)),
        (0.0..3.0f64, 2..5u64).prop_map(|(b, base)| PotentialSpec::sparse(b, base)),
        (0.0..3.0f64, 0.0..1.0f64).prop_map(|(lam, th)| {
            PotentialSpec::almost_mathieu(lam, (5.0f64.sqrt() - 1.0) / 2.0, th)
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// One-step factors have unit determinant, so the whole chain does.
    #[test]
    fn transfer_determinant_is_one(
        v in arb_potential(),
        l in 1u32..800,
        e in -3.0..3.0f64,
    ) {
        let det_log = transfer::det_log(&v, l, e).unwrap();
        prop_assert!((det_log.exp() - 1.0).abs() <= 1e-9);
    }

    /// A determinant-one matrix has reciprocal singular values, so the
    /// largest one never drops below 1.
    #[test]
    fn transfer_norm_at_least_one(
        v in arb_potential(),
        l in 1u32..400,
        e in -3.0..3.0f64,
    ) {
        let t = transfer::transfer_matrix(&v, l, e).unwrap();
        prop_assert!(t.norm_log >= -1e-12);
    }

    /// Free discriminant closed form: plane waves satisfy 2 cos q = -E, so
    /// D(E) = 2 cos(L arccos(-E/2)).
    #[test]
    fn free_discriminant_chebyshev(l in 1u32..60, e in -1.99..1.99f64) {
        let d = floquet::discriminant(&PotentialSpec::zero(), l, e).unwrap().d();
        let expect = 2.0 * (l as f64 * (-e / 2.0).acos()).cos();
        prop_assert!((d - expect).abs() <= 1e-8 * l as f64);
    }

    /// Every band obeys the 2 pi / L width cap; the total spectrum fits in
    /// [-2 + min v, 2 + max v].
    #[test]
    fn band_structure_measure_caps(
        vals in prop::collection::vec(-2.0..2.0f64, 1..6),
        l in 2u32..40,
    ) {
        let v = PotentialSpec::periodic(vals.clone());
        let bands = floquet::band_edges(&v, l).unwrap();
        let cap = 2.0 * PI / l as f64 + 1e-9;
        for b in &bands.bands {
            prop_assert!(b.width() <= cap);
        }
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0;
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0;
        prop_assert!(bands.total_measure() <= hi - lo + 1e-9);
        prop_assert!(bands.bands.first().unwrap().lo >= lo - 1e-9);
        prop_assert!(bands.bands.last().unwrap().hi <= hi + 1e-9);
    }

    /// Transmission never exceeds the single-channel quantum 1/(2 pi).
    #[test]
    fn transmission_density_unitary(
        v in arb_potential(),
        l in 1u32..80,
        e in -2.5..2.5f64,
    ) {
        let d = ebbm::lb_density(&v, l, 1.0, &Reservoirs::default(), e)
            .unwrap()
            .density;
        prop_assert!((-1e-12..=1.0 / (2.0 * PI) + 1e-9).contains(&d));
    }

    /// Spectral-overlap conductance is monotone in the window and bounded
    /// by the perfect-lead value.
    #[test]
    fn thouless_window_monotone(
        vals in prop::collection::vec(-1.0..1.0f64, 1..4),
        l in 2u32..24,
        lo in -1.5..-0.1f64,
        hi in 0.1..1.5f64,
    ) {
        let v = PotentialSpec::periodic(vals);
        let bands = floquet::band_edges(&v, l).unwrap();
        let inner = Interval::new(lo, hi).unwrap();
        let outer = Interval::new(lo - 0.3, hi + 0.3).unwrap();
        let g_inner = floquet::thouless_conductance(&bands, inner);
        // Widening the window can only add spectrum overlap.
        let measure_inner = bands.spectrum_measure(inner);
        let measure_outer = bands.spectrum_measure(outer);
        prop_assert!(measure_outer >= measure_inner - 1e-12);
        prop_assert!((0.0..=1.0 / (2.0 * PI) + 1e-12).contains(&g_inner));
    }
}
