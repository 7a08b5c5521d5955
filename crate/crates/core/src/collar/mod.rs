//! Chord actions, the small/long classification, and the Liouville
//! deformation `lambda + d(rho(t) h(x))` that makes the cylinder over an
//! exact slice tangent to the Liouville field.
//!
//! Two sign conventions are shipped for the collar inequality:
//!
//! * [`Convention::PaperEq2`]: a pure chord is long iff `length > action`.
//! * [`Convention::DerivedFeasibility`]: long iff `length > -action`. This
//!   is what integrating `dh(R) > -1` along a chord with `h = -f` on the
//!   slice gives: `h(end) - h(start) = f(start) - f(end) = action > -length`.
//!
//! With `action = f(start) - f(end)` and `start` the flow source, the two
//! disagree whenever `|action| >= length`; reports flag every disagreement.

mod deform;
mod extend;
mod report;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chords::ChordRecord;
use crate::contact::{directional_fd, CollarProfile, ContactModel};
use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::slice::{ParamSlice, PrimitiveField};

pub use deform::{check_deformation, reeb_reparam_check, DeformationCheck, ReparamCheck, ReparamChord};
pub use extend::{extend_h, ExtendOptions, ExtendedH, Extension};
pub use report::{
    collar_report, ChordEntry, CollarReport, ConventionSummary, HDiagnostics, ReportOptions, SliceChecks, Verdict,
    OBSTRUCTED_WORDING,
};

/// Default quantitative gap for the strict transversality inequality.
pub const DEFAULT_MARGIN: f64 = 0.05;

pub type ScalarField = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

/// `H(t, x) = rho(t) h(x)` together with the margin used when checking
/// `dh(R) > -1`.
#[derive(Clone)]
pub struct DeformationSpec {
    pub h: ScalarField,
    pub profile: CollarProfile,
    pub margin: f64,
}

impl fmt::Debug for DeformationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeformationSpec")
            .field("profile", &self.profile)
            .field("margin", &self.margin)
            .finish_non_exhaustive()
    }
}

impl DeformationSpec {
    pub fn new(h: ScalarField, margin: f64) -> Self {
        assert!(margin > 0.0, "margin must be positive");
        Self {
            h,
            profile: CollarProfile::default(),
            margin,
        }
    }

    pub fn zero(margin: f64) -> Self {
        Self::new(Arc::new(|_| 0.0), margin)
    }

    pub fn h(&self, p: &Vector) -> f64 {
        (self.h)(p)
    }

    /// `dh(dir)` at `p` by central differences.
    pub fn dh(&self, p: &Vector, dir: &Vector) -> f64 {
        directional_fd(|q| (self.h)(q), p, dir)
    }

    /// `dh(R)` at `p`.
    pub fn dh_reeb(&self, model: &ContactModel, p: &Vector) -> f64 {
        self.dh(p, &model.reeb_field(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    #[default]
    PaperEq2,
    DerivedFeasibility,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PaperEq2 => "paper-eq2",
            Self::DerivedFeasibility => "derived-feasibility",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChordClassification {
    Small,
    Long,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChordClass {
    pub chord: ChordRecord,
    pub action: f64,
    pub classification: ChordClassification,
    pub convention: Convention,
}

/// `a = f(start) - f(end)` for a pure chord.
pub fn chord_action(
    model: &ContactModel,
    slice: &ParamSlice,
    f: &PrimitiveField,
    chord: &ChordRecord,
) -> Result<f64> {
    if !chord.pure {
        return Err(Error::MixedChord);
    }
    if !f.covers(slice, chord.start_component) {
        return Err(Error::MissingPrimitive(chord.start_component));
    }
    Ok(f.value_at(model, slice, &chord.start_param)? - f.value_at(model, slice, &chord.end_param)?)
}

pub fn is_long(length: f64, action: f64, convention: Convention) -> bool {
    match convention {
        Convention::PaperEq2 => length > action,
        Convention::DerivedFeasibility => length > -action,
    }
}

pub fn classify_chord(chord: &ChordRecord, action: f64, convention: Convention) -> Result<ChordClass> {
    if !chord.pure {
        return Err(Error::MixedChord);
    }
    let classification = if is_long(chord.length, action, convention) {
        ChordClassification::Long
    } else {
        ChordClassification::Small
    };
    Ok(ChordClass {
        chord: chord.clone(),
        action,
        classification,
        convention,
    })
}

/// Whether some smooth `phi` on `[0, length]` runs from `h_start` to
/// `h_end` with `phi' > -1 + margin` everywhere. The mean value theorem
/// rules out anything steeper on average, and the straight line attains the
/// mean, so this holds iff `h_end - h_start > (-1 + margin) * length`.
pub fn feasibility_oracle_1d(length: f64, h_start: f64, h_end: f64, margin: f64) -> bool {
    assert!(length > 0.0, "chord length must be positive");
    h_end - h_start > (-1.0 + margin) * length
}
