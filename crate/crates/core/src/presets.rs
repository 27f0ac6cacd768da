//! Parameter sets from the published figure captions.
//!
//! Each set records the field and bath parameters plus the hierarchy depth at
//! which the excited-state population on `t ≤ 50` changes by at most `1e-4`
//! when the depth is raised by two (dt = 0.02).

use crate::model::{BathParams, FieldParams, SimConfig};
use crate::operators::CouplingMode;

/// Field parameters `(γ_F, Δ_F²)` shared by all three processes.
pub type FieldSpec = (f64, f64);
/// Bath parameters `(γ_B, Δ_B², β)`.
pub type BathSpec = (f64, f64, f64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptionSet {
    pub label: &'static str,
    pub figure: u8,
    pub field: Option<FieldSpec>,
    pub bath: Option<BathSpec>,
    /// Converged depth for RWA bath coupling, or for the field alone.
    pub depth_rwa: usize,
    /// Converged depth for full dipole coupling; unused without a bath.
    pub depth_full: usize,
}

impl CaptionSet {
    pub fn depth(&self, mode: CouplingMode) -> usize {
        match mode {
            CouplingMode::Rwa => self.depth_rwa,
            CouplingMode::Full => self.depth_full,
        }
    }

    /// Coupling modes that give distinct dynamics for this set.
    pub fn modes(&self) -> &'static [CouplingMode] {
        if self.bath.is_some() {
            &[CouplingMode::Rwa, CouplingMode::Full]
        } else {
            &[CouplingMode::Rwa]
        }
    }

    pub fn channel_count(&self) -> usize {
        3 * self.field.is_some() as usize + 2 * self.bath.is_some() as usize
    }

    /// Simulation config at the converged depth for `mode`.
    pub fn sim(&self, mode: CouplingMode) -> SimConfig {
        let mut sim = SimConfig::default().with_depth(self.depth(mode)).with_dt(0.02);
        if let Some((g, d)) = self.field {
            sim = sim.with_field(FieldParams::uniform(g, d));
        }
        if let Some((g, d, b)) = self.bath {
            sim = sim.with_bath(BathParams::new(g, d, b, mode));
        }
        sim
    }
}

const fn field(label: &'static str, figure: u8, f: FieldSpec, depth: usize) -> CaptionSet {
    CaptionSet { label, figure, field: Some(f), bath: None, depth_rwa: depth, depth_full: depth }
}

const fn bath(label: &'static str, figure: u8, b: BathSpec, rwa: usize, full: usize) -> CaptionSet {
    CaptionSet { label, figure, field: None, bath: Some(b), depth_rwa: rwa, depth_full: full }
}

const fn both(
    label: &'static str,
    figure: u8,
    f: FieldSpec,
    b: BathSpec,
    rwa: usize,
    full: usize,
) -> CaptionSet {
    CaptionSet { label, figure, field: Some(f), bath: Some(b), depth_rwa: rwa, depth_full: full }
}

/// Every distinct parameter set named in a figure caption.
///
/// Steady-state scans (figure 1) contribute their fixed points: the bath at
/// the three temperatures of panel (c), the field alone, and the composite at
/// `γ_F = 0.2`, which lies on both the (a) and (b) curves.
pub const CAPTION_SETS: &[CaptionSet] = &[
    bath("fig1c-beta0.1", 1, (0.2, 0.4, 0.1), 10, 16),
    bath("fig1c-beta0.2", 1, (0.2, 0.4, 0.2), 10, 16),
    bath("fig1c-beta0.32", 1, (0.2, 0.4, 0.32), 10, 16),
    field("fig1c-field", 1, (0.2, 0.4), 16),
    both("fig1ab-composite", 1, (0.2, 0.4), (0.2, 0.4, 0.32), 18, 20),
    field("fig2-g0.2-d1.6", 2, (0.2, 1.6), 26),
    field("fig2-g0.4-d1.6", 2, (0.4, 1.6), 18),
    field("fig2-g0.8-d1.6", 2, (0.8, 1.6), 12),
    field("fig2-g0.4-d0.4", 2, (0.4, 0.4), 12),
    field("fig2-g0.4-d0.8", 2, (0.4, 0.8), 14),
    bath("fig3-g0.2-d1.6", 3, (0.2, 1.6, 0.1), 18, 28),
    bath("fig3-g0.4-d1.6", 3, (0.4, 1.6, 0.1), 12, 18),
    bath("fig3-g0.8-d1.6", 3, (0.8, 1.6, 0.1), 8, 12),
    bath("fig3-g0.4-d0.4", 3, (0.4, 0.4, 0.1), 8, 12),
    bath("fig3-g0.4-d0.8", 3, (0.4, 0.8, 0.1), 10, 14),
    both("fig4-composite", 4, (0.4, 0.8), (0.4, 1.6, 0.1), 16, 20),
    field("fig5-g0.1-d0.6", 5, (0.1, 0.6), 28),
    field("fig5-g0.2-d0.6", 5, (0.2, 0.6), 20),
    field("fig5-g0.4-d0.6", 5, (0.4, 0.6), 12),
    field("fig5-g0.2-d0.4", 5, (0.2, 0.4), 16),
    field("fig5-g0.2-d0.8", 5, (0.2, 0.8), 22),
    bath("fig6-g0.1-d0.6", 6, (0.1, 0.6, 0.1), 18, 28),
    bath("fig6-g0.2-d0.6", 6, (0.2, 0.6, 0.1), 12, 20),
    bath("fig6-g0.4-d0.6", 6, (0.4, 0.6, 0.1), 8, 14),
    bath("fig6-g0.2-d0.4", 6, (0.2, 0.4, 0.1), 10, 16),
    bath("fig6-g0.2-d0.8", 6, (0.2, 0.8, 0.1), 14, 22),
    both("fig7-composite", 7, (0.2, 0.4), (0.2, 0.6, 0.1), 18, 22),
];

pub fn caption_set(label: &str) -> Option<&'static CaptionSet> {
    CAPTION_SETS.iter().find(|s| s.label == label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_are_unique_and_configs_validate() {
        for (i, a) in CAPTION_SETS.iter().enumerate() {
            assert!(CAPTION_SETS[i + 1..].iter().all(|b| b.label != a.label), "{}", a.label);
            for &mode in a.modes() {
                a.sim(mode).validate().unwrap();
            }
        }
        assert_eq!(caption_set("fig4-composite").unwrap().channel_count(), 5);
        assert!(caption_set("nope").is_none());
    }
}
