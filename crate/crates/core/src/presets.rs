//! Reference configurations used throughout the tests and the CLI docs.

use crate::model::SystemConfig;

/// Inverse moments `(1, 2, 3)` with unit controls `(1, 1, 1)`.
pub fn standard(epsilon: f64) -> SystemConfig {
    SystemConfig::new([1.0, 2.0, 3.0], [1.0, 1.0, 1.0], epsilon).expect("valid preset")
}

/// Inverse moments `(1, 2, 3)` with all controls off (free rigid body).
pub fn standard_free(epsilon: f64) -> SystemConfig {
    SystemConfig::new([1.0, 2.0, 3.0], [0.0, 0.0, 0.0], epsilon).expect("valid preset")
}
