//! Fixtures shared by the criterion benches.

use specshare::channel::{FadingSpec, SystemConfig};

/// The K=5 configuration used for the transmit-power sweeps.
pub fn sweep_config(l: u32, m: f64) -> SystemConfig {
    let fading = FadingSpec::with_shape(m).expect("valid shape");
    SystemConfig::new(5, l, 1.0, fading, fading).expect("valid config")
}
