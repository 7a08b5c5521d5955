//! Built-in slices with closed-form geometry.
//!
//! Each entry documents the facts a correct toolkit must reproduce and how
//! they were derived by hand.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use serde::Serialize;

use crate::contact::ContactModel;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};
use crate::slice::{Factor, ParamSlice};

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    Slice,
    NonSlice,
    Legendrian,
    Exact,
    NonExact,
}

/// Facts about an entry, each with a one-line derivation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected {
    /// Periods of `i*alpha` around each circle factor of component 0.
    pub periods: Vec<f64>,
    /// Total chord count, when chords are isolated and the count is known.
    pub chord_count: Option<usize>,
    /// Lengths of the pure chords, ascending.
    pub pure_chord_lengths: Vec<f64>,
    /// Actions of the pure chords, in the same order.
    pub actions: Vec<f64>,
    /// Start and end parameters of the pure chords, same order.
    pub chord_params: Vec<(f64, f64)>,
    pub derivations: Vec<&'static str>,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub model: ContactModel,
    pub slice: ParamSlice,
    pub params: Params,
    pub tags: Vec<Tag>,
    pub expected: Expected,
}

impl CatalogEntry {
    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }
}

/// Name, model, parameter names with defaults, one-line summary.
pub struct EntryInfo {
    pub name: &'static str,
    pub model: &'static str,
    pub params: &'static [(&'static str, f64)],
    pub summary: &'static str,
}

pub const ENTRIES: &[EntryInfo] = &[
    EntryInfo {
        name: "unknot",
        model: "r3",
        params: &[],
        summary: "Legendrian unknot (cos t, -sin 2t, 2/3 sin^3 t); one chord of length 4/3",
    },
    EntryInfo {
        name: "sheared_unknot",
        model: "r3",
        params: &[("c", -0.5)],
        summary: "unknot with z + c sin t; exact, f = c sin t, chord length 4/3 + 2c (c > -2/3)",
    },
    EntryInfo {
        name: "circle",
        model: "r3",
        params: &[],
        summary: "(cos t, sin t, 0); non-exact with period pi, no chords",
    },
    EntryInfo {
        name: "torus_r5",
        model: "r5",
        params: &[],
        summary: "(cos a, sin a, cos b, sin b, 0); non-exact with periods (pi, pi), no chords",
    },
    EntryInfo {
        name: "vertical_segment",
        model: "r3",
        params: &[],
        summary: "(0, 0, s), s in [0, 1]; tangent to the Reeb field, not a slice",
    },
    EntryInfo {
        name: "hopf_circle",
        model: "s3",
        params: &[],
        summary: "(cos t, 0, sin t, 0) in S^3; Legendrian, chords of length pi/2 to the antipode",
    },
    EntryInfo {
        name: "twisted_torus",
        model: "r5",
        params: &[],
        summary: "(cos a, sin a + sin b, cos b, sin b, 0); transverse but i*alpha not closed",
    },
    EntryInfo {
        name: "unknot_pair",
        model: "r3",
        params: &[("dx", 0.5), ("dz", 0.3)],
        summary: "two unknots, the second translated by (dx, 0, dz); pure and mixed chords",
    },
];

pub fn catalog_list() -> &'static [EntryInfo] {
    ENTRIES
}

pub fn catalog_get(name: &str, params: &Params) -> Result<CatalogEntry> {
    let info = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownEntry(name.to_string()))?;
    for key in params.keys() {
        if !info.params.iter().any(|(k, _)| k == key) {
            return Err(Error::ParamOutOfRange(format!("{name} takes no parameter `{key}`")));
        }
    }
    let mut full = Params::new();
    for (k, default) in info.params {
        let v = params.get(*k).copied().unwrap_or(*default);
        if !v.is_finite() {
            return Err(Error::ParamOutOfRange(format!("{k} = {v}")));
        }
        full.insert(k.to_string(), v);
    }
    let model = ContactModel::from_name(info.model)?;
    let (slice, tags, expected) = match name {
        "unknot" => unknot(),
        "sheared_unknot" => sheared_unknot(full["c"])?,
        "circle" => circle(),
        "torus_r5" => torus_r5(),
        "vertical_segment" => vertical_segment(),
        "hopf_circle" => hopf_circle(),
        "twisted_torus" => twisted_torus(),
        "unknot_pair" => unknot_pair(full["dx"], full["dz"]),
        _ => unreachable!("registered entry without constructor"),
    };
    Ok(CatalogEntry {
        name: info.name,
        model,
        slice,
        params: full,
        tags,
        expected,
    })
}

type Built = (ParamSlice, Vec<Tag>, Expected);

fn curve(
    name: &str,
    factor: Factor,
    sheets: usize,
    map: impl Fn(usize, f64) -> Vec<f64> + Send + Sync + 'static,
    tangent: impl Fn(usize, f64) -> Vec<f64> + Send + Sync + 'static,
) -> ParamSlice {
    let immersion = Arc::new(move |s: usize, u: &Vector| Vector::from_vec(map(s, u[0])));
    let jacobian = Arc::new(move |s: usize, u: &Vector| {
        let d = tangent(s, u[0]);
        Matrix::from_column_slice(d.len(), 1, &d)
    });
    ParamSlice::new(name, vec![factor], sheets, immersion, Some(jacobian)).expect("valid catalog factor")
}

fn unknot_point(t: f64, shear: f64) -> Vec<f64> {
    vec![t.cos(), -(2.0 * t).sin(), 2.0 / 3.0 * t.sin().powi(3) + shear * t.sin()]
}

fn unknot_tangent(t: f64, shear: f64) -> Vec<f64> {
    vec![
        -t.sin(),
        -2.0 * (2.0 * t).cos(),
        2.0 * t.sin().powi(2) * t.cos() + shear * t.cos(),
    ]
}

fn unknot() -> Built {
    let slice = curve(
        "unknot",
        Factor::circle(0.0, TAU),
        1,
        |_, t| unknot_point(t, 0.0),
        |_, t| unknot_tangent(t, 0.0),
    );
    let expected = Expected {
        periods: vec![0.0],
        chord_count: Some(1),
        pure_chord_lengths: vec![4.0 / 3.0],
        actions: vec![0.0],
        chord_params: vec![(3.0 * FRAC_PI_2, FRAC_PI_2)],
        derivations: vec![
            "z' - y x' = 2 sin^2 t cos t - sin 2t sin t = 0, so i*alpha = 0 and f = 0",
            "double points need cos t = cos s and sin 2t = sin 2s with t != s: {pi/2, 3pi/2}",
            "z(pi/2) - z(3pi/2) = 2/3 + 2/3 = 4/3; the flow runs up from 3pi/2",
        ],
    };
    (slice, vec![Tag::Slice, Tag::Legendrian, Tag::Exact], expected)
}

fn sheared_unknot(c: f64) -> Result<Built> {
    if c <= -2.0 / 3.0 {
        return Err(Error::ParamOutOfRange(format!(
            "sheared_unknot needs c > -2/3 for a positive-length chord, got c = {c}"
        )));
    }
    let slice = curve(
        "sheared_unknot",
        Factor::circle(0.0, TAU),
        1,
        move |_, t| unknot_point(t, c),
        move |_, t| unknot_tangent(t, c),
    );
    let expected = Expected {
        periods: vec![0.0],
        chord_count: Some(1),
        pure_chord_lengths: vec![4.0 / 3.0 + 2.0 * c],
        actions: vec![-2.0 * c],
        chord_params: vec![(3.0 * FRAC_PI_2, FRAC_PI_2)],
        derivations: vec![
            "the shear adds c cos t dt = d(c sin t) to i*alpha, so f = c sin t",
            "the projection is the unknot's, so the double point is still {pi/2, 3pi/2}",
            "length (2/3 + c) - (-2/3 - c) = 4/3 + 2c, positive iff c > -2/3",
            "action f(3pi/2) - f(pi/2) = -c - c = -2c",
        ],
    };
    let mut tags = vec![Tag::Slice, Tag::Exact];
    if c == 0.0 {
        tags.push(Tag::Legendrian);
    }
    Ok((slice, tags, expected))
}

fn circle() -> Built {
    let slice = curve(
        "circle",
        Factor::circle(0.0, TAU),
        1,
        |_, t| vec![t.cos(), t.sin(), 0.0],
        |_, t| vec![-t.sin(), t.cos(), 0.0],
    );
    let expected = Expected {
        periods: vec![PI],
        chord_count: Some(0),
        pure_chord_lengths: vec![],
        actions: vec![],
        chord_params: vec![],
        derivations: vec![
            "i*alpha = -y dx = sin^2 t dt, which integrates to pi over the circle",
            "the projection is an embedded circle, so there are no double points",
        ],
    };
    (slice, vec![Tag::Slice, Tag::NonExact], expected)
}

fn torus_r5() -> Built {
    let factor = Factor {
        nodes: 64,
        ..Factor::circle(0.0, TAU)
    };
    let immersion = Arc::new(|_: usize, u: &Vector| {
        Vector::from_vec(vec![u[0].cos(), u[0].sin(), u[1].cos(), u[1].sin(), 0.0])
    });
    let jacobian = Arc::new(|_: usize, u: &Vector| {
        let mut j = Matrix::zeros(5, 2);
        j[(0, 0)] = -u[0].sin();
        j[(1, 0)] = u[0].cos();
        j[(2, 1)] = -u[1].sin();
        j[(3, 1)] = u[1].cos();
        j
    });
    let slice = ParamSlice::new("torus_r5", vec![factor, factor], 1, immersion, Some(jacobian))
        .expect("valid catalog factor");
    let expected = Expected {
        periods: vec![PI, PI],
        chord_count: Some(0),
        pure_chord_lengths: vec![],
        actions: vec![],
        chord_params: vec![],
        derivations: vec![
            "i*alpha = sin^2 a da + sin^2 b db, closed, with period pi around each circle",
            "the projection is the embedded Clifford-type torus, so there are no double points",
        ],
    };
    (slice, vec![Tag::Slice, Tag::NonExact], expected)
}

fn vertical_segment() -> Built {
    let slice = curve(
        "vertical_segment",
        Factor::interval(0.0, 1.0),
        1,
        |_, s| vec![0.0, 0.0, s],
        |_, _| vec![0.0, 0.0, 1.0],
    );
    let expected = Expected {
        periods: vec![],
        chord_count: None,
        pure_chord_lengths: vec![],
        actions: vec![],
        chord_params: vec![],
        derivations: vec!["the tangent (0, 0, 1) is the Reeb field, so [J | R] has rank 1"],
    };
    (slice, vec![Tag::NonSlice], expected)
}

fn hopf_circle() -> Built {
    let slice = curve(
        "hopf_circle",
        Factor::circle(0.0, TAU),
        1,
        |_, t| vec![t.cos(), 0.0, t.sin(), 0.0],
        |_, t| vec![-t.sin(), 0.0, t.cos(), 0.0],
    );
    let expected = Expected {
        periods: vec![0.0],
        chord_count: None,
        pure_chord_lengths: vec![FRAC_PI_2],
        actions: vec![0.0],
        chord_params: vec![],
        derivations: vec![
            "y = 0 on the curve, so alpha = (x dy - y dx)/2 pulls back to 0",
            "the flow multiplies (cos t, sin t) by e^{2is}, real again at s = pi/2 with value -(cos t, sin t)",
            "so every point has a chord of length pi/2 to the parameter t + pi: a non-isolated family",
        ],
    };
    (slice, vec![Tag::Slice, Tag::Legendrian, Tag::Exact], expected)
}

fn twisted_torus() -> Built {
    let factor = Factor {
        nodes: 64,
        ..Factor::circle(0.0, TAU)
    };
    let immersion = Arc::new(|_: usize, u: &Vector| {
        Vector::from_vec(vec![u[0].cos(), u[0].sin() + u[1].sin(), u[1].cos(), u[1].sin(), 0.0])
    });
    let jacobian = Arc::new(|_: usize, u: &Vector| {
        let mut j = Matrix::zeros(5, 2);
        j[(0, 0)] = -u[0].sin();
        j[(1, 0)] = u[0].cos();
        j[(1, 1)] = u[1].cos();
        j[(2, 1)] = -u[1].sin();
        j[(3, 1)] = u[1].cos();
        j
    });
    let slice = ParamSlice::new("twisted_torus", vec![factor, factor], 1, immersion, Some(jacobian))
        .expect("valid catalog factor");
    let expected = Expected {
        periods: vec![],
        chord_count: None,
        pure_chord_lengths: vec![],
        actions: vec![],
        chord_params: vec![],
        derivations: vec![
            "i*alpha = (sin a + sin b) sin a da + sin^2 b db",
            "d(i*alpha) = -sin a cos b da ^ db, of size up to 1",
        ],
    };
    (slice, vec![Tag::NonSlice], expected)
}

fn unknot_pair(dx: f64, dz: f64) -> Built {
    let slice = curve(
        "unknot_pair",
        Factor::circle(0.0, TAU),
        2,
        move |s, t| {
            let mut p = unknot_point(t, 0.0);
            if s == 1 {
                p[0] += dx;
                p[2] += dz;
            }
            p
        },
        |_, t| unknot_tangent(t, 0.0),
    );
    let expected = Expected {
        periods: vec![0.0],
        chord_count: None,
        pure_chord_lengths: vec![4.0 / 3.0, 4.0 / 3.0],
        actions: vec![0.0, 0.0],
        chord_params: vec![(3.0 * FRAC_PI_2, FRAC_PI_2), (3.0 * FRAC_PI_2, FRAC_PI_2)],
        derivations: vec![
            "translation in x and z preserves alpha = dz - y dx, so both copies are Legendrian",
            "each copy keeps its own chord of length 4/3; crossings of the two projections are mixed chords",
        ],
    };
    (slice, vec![Tag::Slice, Tag::Legendrian, Tag::Exact], expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::jacobian_fd;

    #[test]
    fn every_entry_builds_with_defaults() {
        for info in catalog_list() {
            let e = catalog_get(info.name, &Params::new()).unwrap();
            assert_eq!(e.model.name(), info.model);
            assert!(!e.expected.derivations.is_empty());
        }
    }

    #[test]
    fn analytic_jacobians_match_differences() {
        for info in catalog_list() {
            let e = catalog_get(info.name, &Params::new()).unwrap();
            for id in (0..e.slice.node_count()).step_by(37) {
                let p = e.slice.node_param(id);
                let u = p.vector();
                let a = e.slice.jacobian(&p).unwrap();
                let n = jacobian_fd(|v| e.slice.point_at(p.sheet, v), &u, 1e-6).unwrap();
                assert!((a - n).amax() < 1e-7, "{} at {u}", info.name);
            }
        }
    }

    #[test]
    fn bad_lookups() {
        assert_eq!(
            catalog_get("trefoil", &Params::new()).unwrap_err(),
            Error::UnknownEntry("trefoil".into())
        );
        let mut p = Params::new();
        p.insert("c".into(), -0.7);
        assert!(matches!(catalog_get("sheared_unknot", &p), Err(Error::ParamOutOfRange(_))));
        let mut q = Params::new();
        q.insert("k".into(), 1.0);
        assert!(matches!(catalog_get("unknot", &q), Err(Error::ParamOutOfRange(_))));
    }
}
