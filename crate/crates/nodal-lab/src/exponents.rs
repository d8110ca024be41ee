//! Exact rational exponent tables for the three nodal lower-bound routes
//! and the auxiliary scaling laws they compose from.
//!
//! Every entry is a `Rational64`; the chain identities that tie the final
//! exponents to their ingredients are checked as exact rational equalities,
//! so the table doubles as an arithmetic verification of the derivations:
//!
//! * growth-volume route: local density `-(n-1)^2/(2n)` plus the sphere
//!   area scaling `(1-n)/2` times the ball count `n/2`,
//! * L^2-concentration route: ball count `(n+1)/4` plus `(1-n)/2`,
//! * integral-identity route: `1 - (n-1)/8 - (n+1)/4`.

use num_rational::Rational64;

use crate::norms::sogge_kink;
use crate::{Error, Result};

fn ratio(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// Exact exponents for dimension `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentTable {
    pub n: i64,
    /// Conjectured two-sided scaling of the nodal measure.
    pub yau_target: Rational64,
    /// Growth of eigenfunctions over balls, relative to `sqrt(lambda)`.
    pub growth_bound: Rational64,
    /// Local nodal density in a wavelength ball: `-(n-1)^2/(2n)`.
    pub local_density: Rational64,
    /// Growth-volume route total: `(3-n)/2 - 1/(2n)`.
    pub growth_volume: Rational64,
    /// L^2-concentration route total: `(3-n)/4`.
    pub l2_concentration: Rational64,
    /// Integral-identity route total: `(7-3n)/8`.
    pub integral_identity: Rational64,
    /// Wavelength balls carrying most of the L^2 mass: `(n+1)/4`.
    pub ball_count: Rational64,
    /// L^1 floor for unit-L^2 eigenfunctions: `-(n-1)/8`.
    pub l1_floor: Rational64,
    /// Pointwise gradient bound: `(n+1)/4`.
    pub grad_sup: Rational64,
    /// Kink of the spectral-cluster exponent: `2(n+1)/(n-1)`.
    pub sogge_kink_p: Rational64,
}

/// Build the table for `2 <= n <= 8`.
pub fn exponent_table(n: i64) -> Result<ExponentTable> {
    if !(2..=8).contains(&n) {
        return Err(Error::DimensionOutOfRange(n.max(0) as usize));
    }
    let table = ExponentTable {
        n,
        yau_target: ratio(1, 2),
        growth_bound: ratio(1, 2),
        local_density: -ratio((n - 1) * (n - 1), 2 * n),
        growth_volume: ratio(3 - n, 2) - ratio(1, 2 * n),
        l2_concentration: ratio(3 - n, 4),
        integral_identity: ratio(7 - 3 * n, 8),
        ball_count: ratio(n + 1, 4),
        l1_floor: -ratio(n - 1, 8),
        grad_sup: ratio(n + 1, 4),
        sogge_kink_p: sogge_kink(n),
    };
    debug_assert!(table.chain_identities_hold());
    Ok(table)
}

impl ExponentTable {
    /// The three route identities plus the local-density composition, all
    /// as exact rational equalities.
    pub fn chain_identities_hold(&self) -> bool {
        let n = self.n;
        let growth_chain =
            self.growth_volume == self.local_density + ratio(1 - n, 2) + ratio(n, 2);
        let concentration_chain = self.l2_concentration == self.ball_count + ratio(1 - n, 2);
        let identity_chain =
            self.integral_identity == ratio(1, 1) - ratio(n - 1, 8) - ratio(n + 1, 4);
        // density = exponent of (beta^-(n-1))^((n-1)/n) with beta ~ sqrt(lambda)
        let density_composition =
            self.local_density == -ratio(n - 1, 1) * ratio(1, 2) * ratio(n - 1, n);
        growth_chain && concentration_chain && identity_chain && density_composition
    }

    /// Rows as (label, value) pairs for rendering.
    pub fn rows(&self) -> Vec<(&'static str, Rational64)> {
        vec![
            ("yau_target", self.yau_target),
            ("growth_bound", self.growth_bound),
            ("local_density", self.local_density),
            ("growth_volume", self.growth_volume),
            ("l2_concentration", self.l2_concentration),
            ("integral_identity", self.integral_identity),
            ("ball_count", self.ball_count),
            ("l1_floor", self.l1_floor),
            ("grad_sup", self.grad_sup),
            ("sogge_kink_p", self.sogge_kink_p),
        ]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("n".into(), serde_json::json!(self.n));
        for (label, value) in self.rows() {
            map.insert(label.into(), serde_json::json!(value.to_string()));
        }
        serde_json::Value::Object(map)
    }
}

impl std::fmt::Display for ExponentTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "exponent table, n = {}", self.n)?;
        for (label, value) in self.rows() {
            writeln!(f, "  {label:<18} {value}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_two_values() {
        let t = exponent_table(2).unwrap();
        assert_eq!(t.growth_volume, ratio(1, 4));
        assert_eq!(t.l2_concentration, ratio(1, 4));
        assert_eq!(t.integral_identity, ratio(1, 8));
        assert_eq!(t.local_density, ratio(-1, 4));
        assert!(t.growth_volume > ratio(0, 1));
        assert!(t.l2_concentration > ratio(0, 1));
        assert!(t.integral_identity > ratio(0, 1));
    }

    #[test]
    fn dimension_three_and_four_values() {
        let t3 = exponent_table(3).unwrap();
        assert_eq!(t3.growth_volume, ratio(-1, 6));
        assert_eq!(t3.l2_concentration, ratio(0, 1));
        assert_eq!(t3.integral_identity, ratio(-1, 4));
        let t4 = exponent_table(4).unwrap();
        assert_eq!(t4.growth_volume, ratio(-5, 8));
        assert_eq!(t4.l2_concentration, ratio(-1, 4));
        assert_eq!(t4.integral_identity, ratio(-5, 8));
    }

    #[test]
    fn chain_identities_hold_for_all_supported_dimensions() {
        for n in 2..=8 {
            assert!(exponent_table(n).unwrap().chain_identities_hold(), "n = {n}");
        }
    }

    #[test]
    fn out_of_range_dimension_rejected() {
        assert!(exponent_table(1).is_err());
        assert!(exponent_table(9).is_err());
    }

    #[test]
    fn display_renders_rationals() {
        let text = exponent_table(2).unwrap().to_string();
        assert!(text.contains("growth_volume"));
        assert!(text.contains("1/4"));
        assert!(text.contains("1/8"));
    }
}
