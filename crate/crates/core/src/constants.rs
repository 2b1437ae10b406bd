//! Physical constants (CODATA 2018 exact / recommended values) and the
//! default experimental configuration.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Pump wavelength of the reference converter, nm.
pub const DEFAULT_PUMP_NM: f64 = 1064.5;

/// Telecom wavelength the reference crystal is phase matched for, nm.
pub const DEFAULT_TARGET_NM: f64 = 1589.0;

/// Crystal length of the reference converter, mm.
pub const DEFAULT_LENGTH_MM: f64 = 20.0;

/// Quoted domain length of the reference crystal, µm.
pub const DEFAULT_DOMAIN_UM: f64 = 7.85;

/// Quoted number of domains of the reference crystal.
pub const DEFAULT_NUM_DOMAINS: u64 = 2550;

/// Scan grid of the reference measurement, nm.
pub const DEFAULT_SCAN_START_NM: f64 = 1600.0;
pub const DEFAULT_SCAN_STOP_NM: f64 = 1370.0;
pub const DEFAULT_SCAN_STEP_NM: f64 = 0.1;

/// Moving-average width in normalized detuning units.
pub const DEFAULT_DETUNING_WINDOW: f64 = 80.0;

/// Far-detuning window used to bound the pedestal.
pub const DEFAULT_FAR_WINDOW: (f64, f64) = (300.0, 440.0);

/// Log-log fit window in normalized detuning.
pub const DEFAULT_FIT_WINDOW: (f64, f64) = (50.0, 400.0);

/// Effective nonlinear coefficient of first-order QPM KTP, pm/V.
pub const DEFAULT_D_EFF_PM_V: f64 = 10.0;

/// RDC levels compared against a measured moving average.
pub const COMPARED_SIGMAS: [f64; 4] = [0.0, 0.02, 0.04, 0.08];
