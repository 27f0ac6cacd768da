//! Per-channel hierarchy coefficients: decay constant plus raising and
//! lowering superoperators.

use std::fmt;

use num_complex::Complex64;

use crate::error::{HeomError, Result};
use crate::model::{BathParams, NoiseLabel, OuProcess};
use crate::operators::{coupling_ops, SuperOperator, I};

/// Which environment degree of freedom a hierarchy index belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Field(NoiseLabel),
    /// Bath branch 1 (memory of `c1 = a`) or 2 (memory of `c2 = a†`).
    Bath(u8),
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelKind::Field(label) => write!(f, "field.{}", label.name()),
            ChannelKind::Bath(branch) => write!(f, "bath.{branch}"),
        }
    }
}

/// One decoherence channel of the hierarchy.
///
/// The auxiliary matrix with count `m_k` on this channel decays with
/// `m_k * alpha`, couples to the next depth through `phi0`, and back to the
/// previous depth through `m_k * phi1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCoeffs {
    pub kind: ChannelKind,
    pub alpha: f64,
    pub phi0: SuperOperator,
    pub phi1: SuperOperator,
}

impl ChannelCoeffs {
    /// Scale factor `s` that balances raising and lowering couplings under
    /// `ρ_m → ∏ √(m_k!) s_k^{m_k} ρ̃_m`. Falls back to 1 for a decoupled channel.
    pub fn balance_factor(&self) -> f64 {
        let (up, down) = (self.phi0.norm(), self.phi1.norm());
        if up > 0.0 && down > 0.0 {
            (down / up).sqrt()
        } else {
            1.0
        }
    }
}

/// Coefficients for one OU process: `α = -γ`, `Φ0 = Φ1 = -iΔ V^x`.
pub fn field_channel_coeffs(proc: &OuProcess) -> Result<ChannelCoeffs> {
    if !proc.enabled {
        return Err(HeomError::DisabledChannel(proc.label.name()));
    }
    proc.validate()?;
    let v = proc.label.coupling_operator();
    let phi = SuperOperator::commutator(&v).scale(-I * proc.delta);
    Ok(ChannelCoeffs {
        kind: ChannelKind::Field(proc.label),
        alpha: -proc.gamma,
        phi0: phi,
        phi1: phi,
    })
}

/// Coefficients for the two branches of the high-temperature Drude bath,
/// with the auxiliary matrices renormalized by `Δ_B`.
///
/// `Φ0_k = -Δ_B c_k^x`, `Φ1_1 = (Δ_B/2)(c2^x - iβγ_B c2^L)`,
/// `Φ1_2 = (Δ_B/2)(c1^x - iβγ_B c1^R)`.
pub fn bath_channel_coeffs(bath: &BathParams) -> Result<(ChannelCoeffs, ChannelCoeffs)> {
    if !bath.enabled {
        return Err(HeomError::DisabledChannel("bath"));
    }
    bath.validate()?;
    let (c1, c2) = coupling_ops(bath.mode);
    let d = bath.delta();
    let bg = Complex64::new(0.0, -bath.beta * bath.gamma);
    let half = Complex64::from(0.5 * d);

    let branch1 = ChannelCoeffs {
        kind: ChannelKind::Bath(1),
        alpha: -bath.gamma,
        phi0: SuperOperator::commutator(&c1).scale((-d).into()),
        phi1: (SuperOperator::commutator(&c2) + SuperOperator::left(&c2).scale(bg)).scale(half),
    };
    let branch2 = ChannelCoeffs {
        kind: ChannelKind::Bath(2),
        alpha: -bath.gamma,
        phi0: SuperOperator::commutator(&c2).scale((-d).into()),
        phi1: (SuperOperator::commutator(&c1) + SuperOperator::right(&c1).scale(bg)).scale(half),
    };
    Ok((branch1, branch2))
}

/// All enabled channels in canonical order: Ω, ξ1, ξ2, bath branch 1, bath branch 2.
pub fn collect_channels(
    field: &crate::model::FieldParams,
    bath: &BathParams,
) -> Result<Vec<ChannelCoeffs>> {
    let mut out = Vec::with_capacity(5);
    for p in field.processes() {
        if p.enabled {
            out.push(field_channel_coeffs(&p)?);
        }
    }
    if bath.enabled {
        let (b1, b2) = bath_channel_coeffs(bath)?;
        out.push(b1);
        out.push(b2);
    }
    Ok(out)
}
