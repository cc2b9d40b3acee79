//! Unit conventions.
//!
//! Time is in nanoseconds everywhere. All frequencies are stored internally
//! as angular frequencies in rad/ns. External inputs are ordinary
//! frequencies; the 2π is applied on load:
//! a value labelled "MHz" converts as ω = 2π·ν·10⁻³ rad/ns,
//! a value labelled "GHz" as ω = 2π·ν rad/ns.

use std::f64::consts::TAU;

/// One MHz (ordinary frequency) as an angular frequency in rad/ns.
pub const MHZ: f64 = TAU * 1e-3;

/// One GHz (ordinary frequency) as an angular frequency in rad/ns.
pub const GHZ: f64 = TAU;

/// Ordinary MHz to rad/ns.
pub fn mhz(v: f64) -> f64 {
    v * MHZ
}

/// Ordinary GHz to rad/ns.
pub fn ghz(v: f64) -> f64 {
    v * GHZ
}

/// rad/ns back to ordinary MHz.
pub fn to_mhz(w: f64) -> f64 {
    w / MHZ
}
