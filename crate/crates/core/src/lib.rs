//! Spin and optical physics of Kramers rare-earth ions in uniaxial crystals.
//!
//! The crate models an effective spin-1/2 ion (optionally with nuclear spin)
//! in an axially symmetric site: Zeeman and hyperfine level structure,
//! polarized optical transition patterns and transmission spectra, oscillator
//! strengths and radiative rates from integrated absorption, dispersive
//! coupling of a microwave resonator to the spin ensemble, nonlinear
//! least-squares parameter estimation, and microwave-to-optical transduction
//! figures of merit.

pub mod cavity;
pub mod constants;

/// Finite and strictly positive; NaN and infinities fail.
pub(crate) fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}
pub mod fit;
pub mod io;
pub mod math;
pub mod optical;
pub mod photophysics;
pub mod profile;
pub mod spin;
pub mod transduction;

#[cfg(test)]
mod thread_safety {
    // domain values are immutable data: sharing them across threads is part
    // of the contract
    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn domain_types_are_send_sync() {
        assert_send_sync::<crate::spin::SpinSystem>();
        assert_send_sync::<crate::spin::EigenSystem>();
        assert_send_sync::<crate::optical::OpticalLevel>();
        assert_send_sync::<crate::optical::SelectionRuleTable>();
        assert_send_sync::<crate::optical::spectrum::Spectrum>();
        assert_send_sync::<crate::cavity::EnsembleParams>();
        assert_send_sync::<crate::fit::FitResult>();
        assert_send_sync::<crate::transduction::ThreeLevelConfig>();
        assert_send_sync::<crate::profile::MaterialProfile>();
    }
}
