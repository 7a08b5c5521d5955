//! Standard contact manifolds with closed-form contact form, differential
//! and Reeb field, plus the symplectization collar `(1 - eps, 1 + eps) x Y`
//! with Liouville form `t * alpha`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::collar::DeformationSpec;
use crate::error::{Error, Result};
use crate::numerics::{default_fd_step, Matrix, Vector};

/// Points within this distance of the unit sphere count as on it.
pub const SPHERE_MEMBERSHIP_TOL: f64 = 1e-9;
/// Points within this distance of the unit sphere are radially projected
/// before evaluation.
pub const SPHERE_SNAP_TOL: f64 = 1e-6;

/// A contact manifold with explicit global coordinates.
///
/// * `StandardR { n }`: `R^{2n-1}` with coordinates `(x1, y1, .., x_{n-1}, y_{n-1}, z)`,
///   `alpha = dz - sum y_i dx_i`, Reeb field `d/dz`.
/// * `StandardSphere { n }`: the unit sphere in `R^{2n}` with coordinates
///   `(x1, y1, .., xn, yn)` and `alpha = 1/2 sum (x_i dy_i - y_i dx_i)`. The
///   Reeb field is the Hopf field `2 (-y1, x1, .., -yn, xn)`, whose flow
///   `z_k -> e^{2it} z_k` has period pi.
///
/// In both models `d alpha = sum dx_i ^ dy_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContactModel {
    StandardR { n: usize },
    StandardSphere { n: usize },
}

impl fmt::Display for ContactModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl ContactModel {
    /// Parses the manifest names `r3`, `r5`, `r7`, `s3`, `s5` (and any other
    /// odd dimension of the same two families).
    pub fn from_name(name: &str) -> Result<Self> {
        let bad = || Error::UnknownModel(name.to_string());
        let (family, dim) = name.split_at(name.len().min(1));
        let dim: usize = dim.parse().map_err(|_| bad())?;
        if dim < 3 || dim % 2 == 0 {
            return Err(bad());
        }
        let n = (dim + 1) / 2;
        match family {
            "r" => Ok(Self::StandardR { n }),
            "s" => Ok(Self::StandardSphere { n }),
            _ => Err(bad()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::StandardR { .. } => format!("r{}", self.contact_dim()),
            Self::StandardSphere { .. } => format!("s{}", self.contact_dim()),
        }
    }

    fn half_dim(&self) -> usize {
        match *self {
            Self::StandardR { n } | Self::StandardSphere { n } => n,
        }
    }

    /// Dimension `2n - 1` of the contact manifold.
    pub fn contact_dim(&self) -> usize {
        2 * self.half_dim() - 1
    }

    /// Number of ambient coordinates.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::StandardR { .. } => self.contact_dim(),
            Self::StandardSphere { n } => 2 * n,
        }
    }

    /// Dimension `n - 1` of a Lagrangian slice.
    pub fn slice_dim(&self) -> usize {
        self.half_dim() - 1
    }

    pub fn is_standard_r(&self) -> bool {
        matches!(self, Self::StandardR { .. })
    }

    /// Distance from the constraint surface (0 for `StandardR`).
    pub fn defect(&self, p: &Vector) -> f64 {
        match self {
            Self::StandardR { .. } => 0.0,
            Self::StandardSphere { .. } => (p.norm() - 1.0).abs(),
        }
    }

    pub fn on_manifold(&self, p: &Vector, tol: f64) -> bool {
        p.len() == self.ambient_dim() && self.defect(p) <= tol
    }

    /// Validates `p` and snaps it onto the manifold when it has drifted by
    /// less than [`SPHERE_SNAP_TOL`].
    pub fn normalize(&self, p: &Vector) -> Result<Vector> {
        if p.len() != self.ambient_dim() {
            return Err(Error::Dimension(format!(
                "{} expects {} coordinates, got {}",
                self,
                self.ambient_dim(),
                p.len()
            )));
        }
        let defect = self.defect(p);
        if defect <= SPHERE_MEMBERSHIP_TOL {
            Ok(p.clone())
        } else if defect <= SPHERE_SNAP_TOL {
            Ok(p / p.norm())
        } else {
            Err(Error::OffManifold { defect })
        }
    }

    /// Ambient components of the contact form at `p` (no membership check).
    pub fn alpha_covector(&self, p: &Vector) -> Vector {
        let mut c = Vector::zeros(self.ambient_dim());
        match self {
            Self::StandardR { n } => {
                for i in 0..n - 1 {
                    c[2 * i] = -p[2 * i + 1];
                }
                c[2 * n - 2] = 1.0;
            }
            Self::StandardSphere { n } => {
                for i in 0..*n {
                    c[2 * i] = -0.5 * p[2 * i + 1];
                    c[2 * i + 1] = 0.5 * p[2 * i];
                }
            }
        }
        c
    }

    pub fn alpha(&self, p: &Vector, v: &Vector) -> Result<f64> {
        let p = self.normalize(p)?;
        Ok(self.alpha_covector(&p).dot(v))
    }

    /// `d alpha(u, v) = sum (u_{x_i} v_{y_i} - u_{y_i} v_{x_i})`, the same
    /// constant 2-form in both families.
    pub fn d_alpha(&self, p: &Vector, u: &Vector, v: &Vector) -> Result<f64> {
        self.normalize(p)?;
        Ok(symplectic_pairs(self.pair_count(), u, v))
    }

    fn pair_count(&self) -> usize {
        match *self {
            Self::StandardR { n } => n - 1,
            Self::StandardSphere { n } => n,
        }
    }

    /// Reeb field on the ambient space. Total, so it can drive the flow
    /// integrator without membership checks; the sphere extension is a
    /// rotation and preserves every sphere about the origin.
    pub fn reeb_field(&self, p: &Vector) -> Vector {
        match self {
            Self::StandardR { n } => {
                let mut r = Vector::zeros(2 * n - 1);
                r[2 * n - 2] = 1.0;
                r
            }
            Self::StandardSphere { n } => {
                let mut r = Vector::zeros(2 * n);
                for i in 0..*n {
                    r[2 * i] = -2.0 * p[2 * i + 1];
                    r[2 * i + 1] = 2.0 * p[2 * i];
                }
                r
            }
        }
    }

    /// Reeb vector at an on-manifold point.
    pub fn reeb_at(&self, p: &Vector) -> Result<Vector> {
        let p = self.normalize(p)?;
        Ok(self.reeb_field(&p))
    }

    /// Closed-form Reeb flow: translation in `z`, or the Hopf rotation.
    pub fn exact_reeb_flow(&self, p: &Vector, t: f64) -> Vector {
        match self {
            Self::StandardR { n } => {
                let mut q = p.clone();
                q[2 * n - 2] += t;
                q
            }
            Self::StandardSphere { n } => {
                let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
                let mut q = p.clone();
                for i in 0..*n {
                    let (x, y) = (p[2 * i], p[2 * i + 1]);
                    q[2 * i] = c * x - s * y;
                    q[2 * i + 1] = s * x + c * y;
                }
                q
            }
        }
    }

    /// Orthonormal basis of the tangent space at `p`, as columns of an
    /// `ambient_dim x contact_dim` matrix.
    pub fn tangent_frame(&self, p: &Vector) -> Matrix {
        match self {
            Self::StandardR { .. } => Matrix::identity(self.ambient_dim(), self.ambient_dim()),
            Self::StandardSphere { .. } => {
                let dim = self.ambient_dim();
                let normal = p / p.norm();
                // drop the coordinate axis most aligned with the normal
                let skip = normal.iamax();
                let mut cols: Vec<Vector> = Vec::with_capacity(dim - 1);
                for k in (0..dim).filter(|&k| k != skip) {
                    let mut v = Vector::zeros(dim);
                    v[k] = 1.0;
                    v -= &normal * normal[k];
                    for c in &cols {
                        let proj = c.dot(&v);
                        v -= c * proj;
                    }
                    cols.push(v.normalize());
                }
                Matrix::from_columns(&cols)
            }
        }
    }

    /// Projection forgetting `z` in `StandardR`.
    pub fn lagrangian_projection(&self, p: &Vector) -> Result<Vector> {
        match self {
            Self::StandardR { n } => Ok(p.rows(0, 2 * n - 2).into_owned()),
            other => Err(Error::WrongModel(other.name())),
        }
    }

    /// The `z` coordinate in `StandardR`.
    pub fn height(&self, p: &Vector) -> Result<f64> {
        match self {
            Self::StandardR { n } => Ok(p[2 * n - 2]),
            other => Err(Error::WrongModel(other.name())),
        }
    }
}

pub(crate) fn symplectic_pairs(pairs: usize, u: &Vector, v: &Vector) -> f64 {
    (0..pairs)
        .map(|i| u[2 * i] * v[2 * i + 1] - u[2 * i + 1] * v[2 * i])
        .sum()
}

/// The collar cut-off `rho`: 0 below `1 - epsilon`, a quintic smoothstep on
/// `[1 - epsilon, 1]`, and 1 from `t = 1` on. `rho(1) = 1` and `rho'(1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarProfile {
    pub epsilon: f64,
}

impl Default for CollarProfile {
    fn default() -> Self {
        Self { epsilon: 0.2 }
    }
}

impl CollarProfile {
    pub fn rho(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 1.0;
        }
        smoothstep((t - (1.0 - self.epsilon)) / self.epsilon)
    }

    pub fn rho_prime(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        smoothstep_prime((t - (1.0 - self.epsilon)) / self.epsilon) / self.epsilon
    }
}

/// `6s^5 - 15s^4 + 10s^3` clamped to `[0, 1]`.
pub fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (s * (6.0 * s - 15.0) + 10.0)
}

pub fn smoothstep_prime(s: f64) -> f64 {
    if !(0.0..=1.0).contains(&s) {
        return 0.0;
    }
    30.0 * s * s * (s - 1.0) * (s - 1.0)
}

/// The symplectization `((1 - eps, 1 + eps) x Y, d(t alpha))`. Tangent
/// vectors are written `(dt, ambient..)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplectizationModel {
    pub base: ContactModel,
    pub epsilon: f64,
}

impl SymplectizationModel {
    pub fn new(base: ContactModel, epsilon: f64) -> Self {
        assert!(epsilon > 0.0 && epsilon < 1.0);
        Self { base, epsilon }
    }

    pub fn t_range(&self) -> (f64, f64) {
        (1.0 - self.epsilon, 1.0 + self.epsilon)
    }

    fn check_t(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.t_range();
        if t > lo && t < hi {
            Ok(())
        } else {
            Err(Error::ParamOutOfRange(format!("t = {t} outside ({lo}, {hi})")))
        }
    }

    /// `lambda = t alpha` as a covector `(dt, ambient..)`.
    pub fn liouville_form(&self, t: f64, p: &Vector) -> Result<Vector> {
        self.check_t(t)?;
        let p = self.base.normalize(p)?;
        let mut out = Vector::zeros(1 + self.base.ambient_dim());
        out.rows_mut(1, self.base.ambient_dim())
            .copy_from(&(self.base.alpha_covector(&p) * t));
        Ok(out)
    }

    /// `V_lambda = t d/dt`.
    pub fn liouville_field(&self, t: f64, p: &Vector) -> Result<Vector> {
        self.check_t(t)?;
        self.base.normalize(p)?;
        let mut out = Vector::zeros(1 + self.base.ambient_dim());
        out[0] = t;
        Ok(out)
    }

    /// `omega = dt ^ alpha + t d alpha` on `(dt, ambient..)` vectors.
    pub fn omega(&self, t: f64, p: &Vector, u: &Vector, w: &Vector) -> Result<f64> {
        let p = self.base.normalize(p)?;
        let a = self.base.alpha_covector(&p);
        let m = self.base.ambient_dim();
        let (us, ws) = (u.rows(1, m).into_owned(), w.rows(1, m).into_owned());
        Ok(u[0] * a.dot(&ws) - w[0] * a.dot(&us) + t * symplectic_pairs(self.base.pair_count(), &us, &ws))
    }

    /// `V_lambda + X_H` for `H(t, x) = rho(t) h(x)`, where `X_H` solves
    /// `omega(X_H, .) = dH` on the tangent space of the collar. Derivatives
    /// of `h` are central differences along an orthonormal tangent frame.
    pub fn liouville_deformed(&self, spec: &DeformationSpec, t: f64, p: &Vector) -> Result<Vector> {
        self.check_t(t)?;
        let p = self.base.normalize(p)?;
        let m = self.base.ambient_dim();
        let frame = self.base.tangent_frame(&p);
        let k = frame.ncols();

        // basis e_0 = d/dt, e_i = frame column i
        let basis: Vec<Vector> = (0..=k)
            .map(|a| {
                let mut e = Vector::zeros(1 + m);
                if a == 0 {
                    e[0] = 1.0;
                } else {
                    e.rows_mut(1, m).copy_from(&frame.column(a - 1));
                }
                e
            })
            .collect();
        let mut gram = Matrix::zeros(k + 1, k + 1);
        for a in 0..=k {
            for b in 0..=k {
                gram[(a, b)] = self.omega(t, &p, &basis[a], &basis[b])?;
            }
        }
        let rho = spec.profile.rho(t);
        let mut dh = Vector::zeros(k + 1);
        dh[0] = spec.profile.rho_prime(t) * spec.h(&p);
        for a in 1..=k {
            dh[a] = rho * spec.dh(&p, &frame.column(a - 1).into_owned());
        }
        let coeffs = gram
            .transpose()
            .lu()
            .solve(&dh)
            .ok_or(Error::SingularJacobian {
                iterations: 0,
                residual: f64::NAN,
            })?;
        let mut field = Vector::zeros(1 + m);
        for a in 0..=k {
            field += &basis[a] * coeffs[a];
        }
        field[0] += t;
        Ok(field)
    }
}

/// Directional derivative of a scalar function by central differences with
/// the kernel's default step.
pub(crate) fn directional_fd<F: Fn(&Vector) -> f64>(f: F, p: &Vector, dir: &Vector) -> f64 {
    let h = default_fd_step(p.amax());
    (f(&(p + dir * h)) - f(&(p - dir * h))) / (2.0 * h)
}
