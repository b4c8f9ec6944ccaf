//! The record of every implicit constant used by the increment machinery.
//!
//! Defaults come from calibration sweeps; they are artifact-local choices,
//! not mathematical claims.

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Constants {
    /// Regularity constant: `(1 - R d |κ|)|B| ≤ |B_{1+κ}| ≤ (1 + R d |κ|)|B|`.
    pub reg_const: f64,
    /// Required increment: new density at least `(1 + ε / c_inc) α`.
    pub c_inc: f64,
    /// Hölder lifting searches even `p ≤ 2⌈k_hold · ln(2/γ)⌉`.
    pub k_hold: f64,
    /// Unbalancing bound `p' ≤ ⌈k_unb · ε⁻¹ ln(e/ε) · p⌉`.
    pub k_unb: f64,
    /// Narrowing dilation `ρ = c_narrow · α ε / d` for nested Bohr sets.
    pub c_narrow: f64,
    /// Dilation `ρ = c_ap · α / d` for the final Bohr set of the sumset pipeline.
    pub c_ap: f64,
    /// Ledger threshold for `‖μ_B * μ - μ_B‖_1 / (ρ d)`.
    pub k_regconv: f64,
    /// Covering hypothesis `ρ ≤ c_cover / (L d)`.
    pub c_cover: f64,
    /// Largest `k` accepted by the dual-side moment computation.
    pub moment_k_cap: u32,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            reg_const: 100.0,
            c_inc: 100.0,
            k_hold: 1.25,
            k_unb: 2.0,
            c_narrow: 0.1,
            c_ap: 0.1,
            k_regconv: 0.74,
            c_cover: 0.18,
            moment_k_cap: 8,
        }
    }
}
