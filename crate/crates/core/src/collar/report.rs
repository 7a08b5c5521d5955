//! The end-to-end collarability report.

use serde::Serialize;

use crate::chords::{chords_projection, chords_shooting, ChordRecord, ChordSearch};
use crate::contact::{ContactModel, SymplectizationModel};
use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::slice::{
    check_closed, check_transverse, max_manifold_defect, periods, primitive, pullback_alpha,
    ClosedCheck, ParamPoint, ParamSlice, Period, PrimitiveField, TransverseCheck, DEFAULT_TOL_CLOSED,
    DEFAULT_TOL_TRANSVERSE,
};

use super::{
    chord_action, check_deformation, classify_chord, extend_h, reeb_reparam_check, ChordClassification,
    Convention, DeformationCheck, DeformationSpec, ExtendOptions, Extension, ReparamCheck, DEFAULT_MARGIN,
};

/// Below this, `|i*alpha|` at every node marks the slice as Legendrian.
const LEGENDRIAN_TOL: f64 = 1e-9;
/// Slices further than this from the model manifold are rejected.
const DEFECT_TOL: f64 = 1e-8;

pub const OBSTRUCTED_WORDING: &str = "this deformation scheme is infeasible; non-collarability is NOT concluded";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportOptions {
    pub convention: Convention,
    pub tol_closed: f64,
    pub tol_transverse: f64,
    pub margin: f64,
    /// Verification grid resolution.
    pub grid: usize,
    pub search: ChordSearch,
    pub runway: f64,
    pub tube_factor: f64,
    /// Collar width of the symplectization.
    pub epsilon: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        let ext = ExtendOptions::default();
        Self {
            convention: Convention::default(),
            tol_closed: DEFAULT_TOL_CLOSED,
            tol_transverse: DEFAULT_TOL_TRANSVERSE,
            margin: DEFAULT_MARGIN,
            grid: 24,
            search: ChordSearch::default(),
            runway: ext.runway,
            tube_factor: ext.tube_factor,
            epsilon: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceChecks {
    pub closed: Option<ClosedCheck>,
    pub transverse: Option<TransverseCheck>,
    pub max_manifold_defect: f64,
    pub embedding_violations: usize,
    /// Largest `|i*alpha|` over the mesh nodes.
    pub max_pullback: f64,
    pub legendrian: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordEntry {
    pub start_param: ParamPoint,
    pub end_param: ParamPoint,
    pub start_point: Vec<f64>,
    pub end_point: Vec<f64>,
    pub length: f64,
    pub pure: bool,
    pub start_component: usize,
    pub end_component: usize,
    pub isolated: bool,
    pub residual: f64,
    /// `None` for mixed chords.
    pub action: Option<f64>,
    pub paper_eq2: Option<ChordClassification>,
    pub derived_feasibility: Option<ChordClassification>,
    /// The two conventions classify this chord differently.
    pub conventions_disagree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConventionSummary {
    pub active: Convention,
    /// Indices into `chords` where the conventions disagree.
    pub disagreements: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// `extend_h` succeeded and the deformation checks passed.
    Collarable,
    /// Indices of the small pure chords, or of the chords `extend_h`
    /// could not accommodate.
    SchemeObstructed { chords: Vec<usize>, message: String },
    NonExact,
    NotASlice { reason: String },
    /// The pipeline could not reach a verdict (numerical failure, or an
    /// exact non-Legendrian slice outside `StandardR`).
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Collarable => 0,
            Self::SchemeObstructed { .. } => 3,
            Self::NonExact => 4,
            Self::NotASlice { .. } => 5,
            Self::Inconclusive { .. } => 6,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Collarable => "collarable",
            Self::SchemeObstructed { .. } => "scheme-obstructed",
            Self::NonExact => "non-exact",
            Self::NotASlice { .. } => "not-a-slice",
            Self::Inconclusive { .. } => "inconclusive",
        }
    }

    fn obstructed(chords: Vec<usize>) -> Self {
        Self::SchemeObstructed {
            chords,
            message: OBSTRUCTED_WORDING.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HDiagnostics {
    /// `"extended"` for the fiberwise construction, `"zero"` for Legendrian slices.
    pub construction: &'static str,
    pub min_dh_reeb: f64,
    pub max_h_plus_f: f64,
    pub component_shifts: Vec<f64>,
    pub deformation: DeformationCheck,
    pub reparametrization: Option<ReparamCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollarReport {
    pub model: String,
    pub slice: String,
    pub checks: SliceChecks,
    pub periods: Vec<Period>,
    pub primitive_path_residual: Option<f64>,
    pub chords: Vec<ChordEntry>,
    pub conventions: ConventionSummary,
    pub verdict: Verdict,
    pub h_diagnostics: Option<HDiagnostics>,
    pub notes: Vec<String>,
}

impl CollarReport {
    fn new(model: &ContactModel, slice: &ParamSlice, opts: &ReportOptions, checks: SliceChecks) -> Self {
        Self {
            model: model.name(),
            slice: slice.name().to_string(),
            checks,
            periods: Vec::new(),
            primitive_path_residual: None,
            chords: Vec::new(),
            conventions: ConventionSummary {
                active: opts.convention,
                disagreements: Vec::new(),
            },
            verdict: Verdict::Inconclusive {
                reason: "not evaluated".into(),
            },
            h_diagnostics: None,
            notes: Vec::new(),
        }
    }

    fn inconclusive(mut self, err: &Error) -> Self {
        self.verdict = Verdict::Inconclusive {
            reason: err.to_string(),
        };
        self
    }
}

/// Runs slice checks, exactness, chord search, classification under both
/// conventions and the construction of `h`, and reduces them to a verdict.
/// Failures become verdicts.
pub fn collar_report(model: &ContactModel, slice: &ParamSlice, opts: &ReportOptions) -> CollarReport {
    let empty_checks = SliceChecks {
        closed: None,
        transverse: None,
        max_manifold_defect: max_manifold_defect(model, slice),
        embedding_violations: 0,
        max_pullback: f64::NAN,
        legendrian: false,
        pass: false,
    };
    if slice.param_dim() != model.slice_dim() {
        let mut r = CollarReport::new(model, slice, opts, empty_checks);
        r.verdict = Verdict::NotASlice {
            reason: format!(
                "parameter dimension {} but slices of {model} have dimension {}",
                slice.param_dim(),
                model.slice_dim()
            ),
        };
        return r;
    }
    let checks = match slice_checks(model, slice, opts) {
        Ok(c) => c,
        Err(e) => return CollarReport::new(model, slice, opts, empty_checks).inconclusive(&e),
    };
    let mut report = CollarReport::new(model, slice, opts, checks.clone());
    if !checks.pass {
        let mut reasons = Vec::new();
        if checks.closed.is_some_and(|c| !c.pass) {
            reasons.push("pullback of the contact form is not closed");
        }
        if checks.transverse.is_some_and(|c| !c.pass) {
            reasons.push("tangent space meets the Reeb direction");
        }
        if checks.max_manifold_defect > DEFECT_TOL {
            reasons.push("points lie off the model manifold");
        }
        report.verdict = Verdict::NotASlice {
            reason: reasons.join("; "),
        };
        return report;
    }
    let closed = checks.closed.expect("checked above");

    match periods(model, slice, &closed) {
        Ok(p) => report.periods = p,
        Err(e) => return report.inconclusive(&e),
    }
    if report.periods.iter().any(|p| p.value != 0.0) {
        report.verdict = Verdict::NonExact;
        return report;
    }
    let f = match primitive(model, slice, &report.periods) {
        Ok(f) => f,
        Err(e) => return report.inconclusive(&e),
    };
    report.primitive_path_residual = Some(f.path_residual);

    let found = if model.is_standard_r() {
        chords_projection(model, slice, &opts.search)
    } else {
        chords_shooting(model, slice, &opts.search)
    };
    let chords = match found {
        Ok(c) => c,
        Err(e) => return report.inconclusive(&e),
    };
    match classify_all(model, slice, &f, &chords) {
        Ok((entries, disagreements)) => {
            report.chords = entries;
            report.conventions.disagreements = disagreements;
        }
        Err(e) => return report.inconclusive(&e),
    }
    if chords.iter().any(|c| !c.isolated) {
        report.notes.push("some chords belong to non-isolated families".into());
    }
    if !report.conventions.disagreements.is_empty() {
        report.notes.push(format!(
            "conventions disagree on chords {:?}; verdict uses {}",
            report.conventions.disagreements, opts.convention
        ));
    }

    let small: Vec<usize> = report
        .chords
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let class = match opts.convention {
                Convention::PaperEq2 => c.paper_eq2,
                Convention::DerivedFeasibility => c.derived_feasibility,
            };
            class == Some(ChordClassification::Small)
        })
        .map(|(i, _)| i)
        .collect();

    let construction = construct_h(model, slice, &f, &chords, &checks, opts);
    match construction {
        Err(e) => {
            if small.is_empty() {
                return report.inconclusive(&e);
            }
            report.notes.push(format!("construction of h failed: {e}"));
        }
        Ok(Construction::Obstructed(bad)) => {
            let idx: Vec<usize> = bad
                .iter()
                .filter_map(|b| chords.iter().position(|c| c == b))
                .collect();
            if small.is_empty() && bad.iter().all(|c| c.pure) {
                report.notes.push(format!(
                    "chords {idx:?} are long under {} but fail the interpolation bound",
                    opts.convention
                ));
                report.verdict = Verdict::obstructed(idx);
                return report;
            }
            if small.is_empty() {
                report.verdict = Verdict::Inconclusive {
                    reason: format!("no per-component constants accommodate mixed chords {idx:?}"),
                };
                return report;
            }
        }
        Ok(Construction::Unsupported) => {
            if small.is_empty() {
                report.verdict = Verdict::Inconclusive {
                    reason: format!("h is only constructed in StandardR or for Legendrian slices; model is {model}"),
                };
                return report;
            }
        }
        Ok(Construction::Built(diag)) => {
            let pass = diag.deformation.pass;
            report.h_diagnostics = Some(*diag);
            if small.is_empty() {
                report.verdict = if pass {
                    Verdict::Collarable
                } else {
                    Verdict::Inconclusive {
                        reason: "constructed h failed the deformation check".into(),
                    }
                };
                return report;
            }
        }
    }
    report.verdict = Verdict::obstructed(small);
    report
}

fn slice_checks(model: &ContactModel, slice: &ParamSlice, opts: &ReportOptions) -> Result<SliceChecks> {
    let closed = check_closed(model, slice, opts.tol_closed)?;
    let transverse = check_transverse(model, slice, opts.tol_transverse)?;
    let defect = max_manifold_defect(model, slice);
    let mut max_pullback: f64 = 0.0;
    for id in 0..slice.node_count() {
        max_pullback = max_pullback.max(pullback_alpha(model, slice, &slice.node_param(id))?.amax());
    }
    let embedding_violations = slice.embedding_violations(5.0 * slice.param_spacing(), 1e-7);
    Ok(SliceChecks {
        closed: Some(closed),
        transverse: Some(transverse),
        max_manifold_defect: defect,
        embedding_violations,
        max_pullback,
        legendrian: max_pullback < LEGENDRIAN_TOL,
        pass: closed.pass && transverse.pass && defect <= DEFECT_TOL,
    })
}

fn classify_all(
    model: &ContactModel,
    slice: &ParamSlice,
    f: &PrimitiveField,
    chords: &[ChordRecord],
) -> Result<(Vec<ChordEntry>, Vec<usize>)> {
    let mut entries = Vec::with_capacity(chords.len());
    let mut disagreements = Vec::new();
    for (i, c) in chords.iter().enumerate() {
        let (action, paper, derived) = if c.pure {
            let a = chord_action(model, slice, f, c)?;
            (
                Some(a),
                Some(classify_chord(c, a, Convention::PaperEq2)?.classification),
                Some(classify_chord(c, a, Convention::DerivedFeasibility)?.classification),
            )
        } else {
            (None, None, None)
        };
        let disagree = paper != derived;
        if disagree {
            disagreements.push(i);
        }
        entries.push(ChordEntry {
            start_param: c.start_param.clone(),
            end_param: c.end_param.clone(),
            start_point: c.start_point.iter().copied().collect(),
            end_point: c.end_point.iter().copied().collect(),
            length: c.length,
            pure: c.pure,
            start_component: c.start_component,
            end_component: c.end_component,
            isolated: c.isolated,
            residual: c.residual,
            action,
            paper_eq2: paper,
            derived_feasibility: derived,
            conventions_disagree: disagree,
        });
    }
    Ok((entries, disagreements))
}

enum Construction {
    Built(Box<HDiagnostics>),
    Obstructed(Vec<ChordRecord>),
    Unsupported,
}

fn construct_h(
    model: &ContactModel,
    slice: &ParamSlice,
    f: &PrimitiveField,
    chords: &[ChordRecord],
    checks: &SliceChecks,
    opts: &ReportOptions,
) -> Result<Construction> {
    let sym = SymplectizationModel::new(*model, opts.epsilon);
    if model.is_standard_r() {
        let ext_opts = ExtendOptions {
            margin: opts.margin,
            runway: opts.runway,
            tube_factor: opts.tube_factor,
        };
        let h = match extend_h(model, slice, f, chords, &ext_opts)? {
            Extension::Obstructed { chords } => return Ok(Construction::Obstructed(chords)),
            Extension::Built(h) => h,
        };
        let grid = h.verification_grid(chords, opts.grid);
        let max_h_plus_f = h.max_h_plus_f(4 * opts.grid)?;
        let shifts = h.shifts().to_vec();
        let spec = h.into_spec();
        let deformation = check_deformation(&sym, &spec, &grid)?;
        let reparametrization = if deformation.pass {
            Some(reeb_reparam_check(model, &spec, chords)?)
        } else {
            None
        };
        return Ok(Construction::Built(Box::new(HDiagnostics {
            construction: "extended",
            min_dh_reeb: deformation.min_dh_reeb,
            max_h_plus_f,
            component_shifts: shifts,
            deformation,
            reparametrization,
        })));
    }
    if !checks.legendrian {
        return Ok(Construction::Unsupported);
    }
    // f vanishes up to the quadrature error and h = 0 extends it exactly
    let spec = DeformationSpec::zero(opts.margin);
    let mut grid: Vec<Vector> = slice.node_points();
    for c in chords {
        grid.push(c.start_point.clone());
        grid.push(c.end_point.clone());
    }
    let deformation = check_deformation(&sym, &spec, &grid)?;
    let reparametrization = Some(reeb_reparam_check(model, &spec, chords)?);
    let max_h_plus_f = f.node_values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Construction::Built(Box::new(HDiagnostics {
        construction: "zero",
        min_dh_reeb: deformation.min_dh_reeb,
        max_h_plus_f,
        component_shifts: vec![0.0; slice.component_count()],
        deformation,
        reparametrization,
    })))
}
