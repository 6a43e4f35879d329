//! Property tests for the emission invariants that hold over whole
//! parameter families rather than at anchor points.

use proptest::prelude::*;

use braggem::quad::QuadSettings;
use braggem::{build_bragg, permittivity, total_rate, DispersionModel, EmitterConfig, Orientation};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Free-space limit: every orientation split, position and frequency
    /// gives unit total and radiative rates in an all-vacuum stack.
    #[test]
    fn vacuum_rates_are_unity_for_any_configuration(
        w_z in 0.0f64..=1.0,
        z_frac in 0.05f64..0.95,
        omega_a in 0.5f64..2.0,
    ) {
        let vac = DispersionModel::vacuum();
        let stack = build_bragg(1, 1, false, vac, vac, vac).unwrap();
        let emitter = EmitterConfig {
            omega_a,
            z_a: z_frac * stack.emitter_thickness(),
            orientation: Orientation { w_z, w_par: 1.0 - w_z },
        };
        let rates = total_rate(&stack, &emitter, &QuadSettings::default()).unwrap();
        prop_assert!((rates.gamma_total - 1.0).abs() < 1e-6);
        prop_assert!((rates.gamma_rad - 1.0).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Passivity of the resonant permittivity: Im eps > 0 wherever the
    /// linewidth is positive, on both sides of the resonance.
    #[test]
    fn drude_lorentz_is_passive(
        omega in 1e-3f64..100.0,
        omega_p in 0.1f64..50.0,
        omega_t in 0.5f64..50.0,
        gamma in 1e-12f64..1.0,
    ) {
        let model = DispersionModel::drude_lorentz(omega_p, omega_t, gamma);
        let eps = permittivity(&model, omega).unwrap();
        prop_assert!(eps.im > 0.0, "Im eps = {} at omega = {omega}", eps.im);
    }

    /// Monotone channel split holds across gap, edge and pass band for the
    /// canonical defect device.
    #[test]
    fn radiative_rate_never_exceeds_total(omega_a in 0.92f64..1.28) {
        let stack = build_bragg(
            2,
            2,
            true,
            DispersionModel::vacuum(),
            DispersionModel::drude_lorentz(34.598, 20.0, 1e-4),
            DispersionModel::vacuum(),
        )
        .unwrap();
        let emitter = EmitterConfig::centered(&stack, omega_a, Orientation::parallel());
        let rates = total_rate(&stack, &emitter, &QuadSettings::default()).unwrap();
        prop_assert!(rates.gamma_rad >= 0.0);
        prop_assert!(rates.gamma_total >= rates.gamma_rad - 1e-9);
    }
}
