//! Finite-difference spot checks of closed-form derivatives.
//!
//! Each identity pairs a function with a claimed closed form of one of its
//! partial derivatives. A check computes central differences `D(h)` and
//! `D(h/2)`, the Richardson value `R = (4 D(h/2) - D(h)) / 3` and the error
//! estimate `E = |D(h/2) - D(h)| / 3`, and passes when
//! `|closed - R| <= 10 E + floor`, where `floor` accounts for cancellation
//! in double precision.

use serde::{Deserialize, Serialize};

use super::critical::{psi, y_mu_f64, zeta};
use super::d23::{xi3_f64, xi3_second_f64, xi3_slope_at_one};
use super::{f_l_f64, f_u_f64, BoundsError};
use crate::numeric::{from_f64, to_f64};

type Fun = fn(&[f64]) -> f64;

/// Derivative identity `d^order f / d vars[wrt]^order = closed`.
#[derive(Clone, Copy)]
pub struct Identity {
    pub id: &'static str,
    pub vars: &'static [&'static str],
    pub wrt: usize,
    pub order: u32,
    pub f: Fun,
    pub closed: Fun,
    pub samples: &'static [&'static [f64]],
}

impl std::fmt::Debug for Identity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Identity").field("id", &self.id).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub id: String,
    pub vars: Vec<String>,
    pub point: Vec<f64>,
    pub step: f64,
    pub closed: f64,
    pub richardson: f64,
    pub error_estimate: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn parts(beta: f64, x: f64, y: f64) -> (f64, f64, f64, f64) {
    let bh = 1.0 - beta;
    (bh, 1.0 - bh * x, 1.0 - bh * y, 1.0 - bh * (1.0 - x - y))
}

fn fu_beta(p: &[f64]) -> f64 {
    f_u_f64(p[0], p[1], p[2], p[3])
}

fn fu_beta_closed(p: &[f64]) -> f64 {
    let (d, beta, x, y) = (p[0], p[1], p[2], p[3]);
    let (bh, a, yy, c) = parts(beta, x, y);
    let f = f_u_f64(d, beta, x, y);
    let w = 1.0 - 3.0 * y + bh * ((3.0 * y - 1.0) + (1.0 - x - 2.0 * y) + x * (2.0 * x + y - 1.0) + y * (x - y));
    -f * f * d * a.powf(d / 2.0) * c.powf(d / 2.0) * w / (yy.powf(d + 1.0) * a * c)
}

fn fl_beta(p: &[f64]) -> f64 {
    f_l_f64(p[0], p[1], p[2], p[3])
}

fn fl_beta_closed(p: &[f64]) -> f64 {
    let (d, beta, x, y) = (p[0], p[1], p[2], p[3]);
    let (_, a, yy, c) = parts(beta, x, y);
    let f = f_l_f64(d, beta, x, y);
    f * f * d * ((2.0 * x + y - 1.0) * c.powf(d - 1.0) + (x - y) * yy.powf(d - 1.0)) / a.powf(d + 1.0)
}

fn fu_r(d: f64, beta: f64, x: f64, y: f64) -> f64 {
    let (_, a, yy, c) = parts(beta, x, y);
    a.powf(d / 2.0) * c.powf(d / 2.0) / yy.powf(d)
}

fn fu_x(p: &[f64]) -> f64 {
    f_u_f64(p[0], p[1], p[2], p[3])
}

fn fu_x_closed(p: &[f64]) -> f64 {
    let (d, beta, x, y) = (p[0], p[1], p[2], p[3]);
    let (bh, a, _, c) = parts(beta, x, y);
    let f = f_u_f64(d, beta, x, y);
    f * f * fu_r(d, beta, x, y) * d * bh * bh * (2.0 * x + y - 1.0) / (c * a)
}

fn fu_y_closed(p: &[f64]) -> f64 {
    let (d, beta, x, y) = (p[0], p[1], p[2], p[3]);
    let (bh, _, yy, c) = parts(beta, x, y);
    let f = f_u_f64(d, beta, x, y);
    -f * f * fu_r(d, beta, x, y) * d * bh * (3.0 + bh * (2.0 * x + y - 2.0)) / (c * yy)
}

fn beta_star_f64(d: f64) -> f64 {
    1.0 - 3.0 / (d + 1.0)
}

fn gu(p: &[f64]) -> f64 {
    let (d, mu, y) = (p[0], p[1], p[2]);
    f_u_f64(d, beta_star_f64(d), mu * y, y) - mu * y
}

fn gu_closed(p: &[f64]) -> f64 {
    let (d, mu, y) = (p[0], p[1], p[2]);
    let a = (1.0 - 3.0 * y / (d + 1.0)).powf(d);
    let b = (1.0 - 3.0 * (1.0 - y * (mu + 1.0)) / (d + 1.0)).powf(d / 2.0) * (1.0 - 3.0 * mu * y / (d + 1.0)).powf(d / 2.0);
    let w = a * b / (a + 2.0 * b).powi(2);
    -mu + (9.0 * d * w / (3.0 * y * (mu + 1.0) + d - 2.0))
        * (mu * (2.0 * mu * y + y - 1.0) / (1.0 + d - 3.0 * mu * y) - (2.0 * mu * y + y + d - 1.0) / (1.0 + d - 3.0 * y))
}

fn gl(p: &[f64]) -> f64 {
    let (d, mu, y) = (p[0], p[1], p[2]);
    f_l_f64(d, beta_star_f64(d), mu * y, y) - y
}

fn gl_closed(p: &[f64]) -> f64 {
    let (d, mu, y) = (p[0], p[1], p[2]);
    let cpow = ((3.0 * y * (mu + 1.0) + d - 2.0) / (d + 1.0)).powf(d);
    let apow = (1.0 - 3.0 * mu * y / (d + 1.0)).powf(d);
    let bpow = (1.0 - 3.0 * y / (d + 1.0)).powf(d);
    let w = (mu * (2.0 * d - 1.0) + d + 1.0) * cpow / ((1.0 + d - 3.0 * mu * y) * (d - 2.0 + 3.0 * y * (1.0 + mu)))
        + (mu - 1.0) * (d + 1.0) * bpow / ((1.0 + d - 3.0 * y) * (1.0 + d - 3.0 * mu * y));
    -3.0 * d * apow * w / (cpow + apow + bpow).powi(2) - 1.0
}

fn xy_of_mu(mu: f64) -> (f64, f64) {
    let y = y_mu_f64(mu);
    (mu * y, y)
}

fn hu_d(p: &[f64]) -> f64 {
    let (d, mu) = (p[0], p[1]);
    let (x, y) = xy_of_mu(mu);
    f_u_f64(d, beta_star_f64(d), x, y) - x
}

fn hu_d_closed(p: &[f64]) -> f64 {
    let (d, mu) = (p[0], p[1]);
    let (x, y) = xy_of_mu(mu);
    let a = (1.0 - 3.0 * x / (d + 1.0)).powf(d / 2.0);
    let b = (1.0 - 3.0 * y / (d + 1.0)).powf(d);
    let c = (1.0 - 3.0 * (1.0 - x - y) / (d + 1.0)).powf(d / 2.0);
    a * b * c * zeta(d, x, y) / (b + 2.0 * a * c).powi(2)
}

fn hl_d(p: &[f64]) -> f64 {
    let (d, mu) = (p[0], p[1]);
    let (x, y) = xy_of_mu(mu);
    f_l_f64(d, beta_star_f64(d), x, y) - y
}

fn hl_d_closed(p: &[f64]) -> f64 {
    let (d, mu) = (p[0], p[1]);
    let (x, y) = xy_of_mu(mu);
    let a = (1.0 - 3.0 * x / (d + 1.0)).powf(d);
    let b = (1.0 - 3.0 * y / (d + 1.0)).powf(d);
    let c = (1.0 - 3.0 * (1.0 - x - y) / (d + 1.0)).powf(d);
    (a * c * (psi(d, x) - psi(d, 1.0 - x - y)) + a * b * (psi(d, x) - psi(d, y))) / (a + b + c).powi(2)
}

fn big_xy(d: f64, alpha: f64) -> (f64, f64, f64) {
    let b = beta_star_f64(d);
    let x = 1.0 - (1.0 - b) * (alpha - 1.0) / (b + 2.0 * alpha);
    let y = 1.0 - (1.0 - b) * (alpha - 1.0) / (b + alpha + 1.0);
    (b, x, y)
}

/// `phi~(d, d0, alpha)`, the AM-GM relaxation of `phi_* - alpha^(1/d)`.
fn phi_tilde(p: &[f64]) -> f64 {
    let (d, d0, alpha) = (p[0], p[1], p[2]);
    let (b, x, y) = big_xy(d, alpha);
    let e = 2.0 + b;
    1.0 + (x.powf(-2.0 * d0 / e) * y.powf(-(d - d0) / e) - x.powf(d0 * b / e) * y.powf((d - d0) * (1.0 + b) / e)) / d
        - alpha.powf(1.0 / d)
}

fn phi_tilde_closed(p: &[f64]) -> f64 {
    let (d, d0, a) = (p[0], p[1], p[2]);
    let (b, x, y) = big_xy(d, a);
    let e = 2.0 + b;
    let gx = (2.0 * a + b) * (a * b + a + 1.0);
    let gy = (a + b + 1.0) * (a * b + 2.0);
    let s = x.powf(2.0 * d0 / e) * y.powf((d - d0) / e) * (a + b + 1.0) * (a * b + 2.0) / (1.0 - b);
    let pre = (1.0 - b) * x.powf(-2.0 * d0 / e) * y.powf(-(d - d0) / e) / (d * a * gy);
    pre * (2.0 * d0 * a * gy / gx
        + (d - d0) * a
        + x.powf(d0) * y.powf(d - d0) * (d0 * b * a * gy / gx + (d - d0) * (1.0 + b) * a)
        - a.powf(1.0 / d) * s)
}

fn psi_plus(p: &[f64]) -> f64 {
    psi(p[0], 1.0 / 3.0 + p[1])
}

fn psi_plus_closed(p: &[f64]) -> f64 {
    let (d, t) = (p[0], p[1]);
    9.0 * t / (d - 3.0 * t).powi(2)
}

fn psi_minus(p: &[f64]) -> f64 {
    psi(p[0], 1.0 / 3.0 - p[1])
}

fn psi_minus_closed(p: &[f64]) -> f64 {
    let (d, t) = (p[0], p[1]);
    9.0 * t / (d + 3.0 * t).powi(2)
}

fn ymu(p: &[f64]) -> f64 {
    y_mu_f64(p[0])
}

fn ymu_closed(p: &[f64]) -> f64 {
    -35.0 / (2.0 * (5.0 * p[0] + 6.0).powi(2))
}

fn xmu(p: &[f64]) -> f64 {
    p[0] * y_mu_f64(p[0])
}

fn xmu_closed(p: &[f64]) -> f64 {
    let base = 21.0 / (5.0 * p[0] + 6.0).powi(2);
    if p[0] < 32.0 {
        base + 0.006
    } else {
        base
    }
}

fn xi3(p: &[f64]) -> f64 {
    xi3_f64(p[0], p[1], p[2])
}

fn xi3_slope_closed(p: &[f64]) -> f64 {
    to_f64(&xi3_slope_at_one(p[0] as u32, &from_f64(p[1])))
}

fn xi3_second_closed(p: &[f64]) -> f64 {
    xi3_second_f64(p[0] as u32, &from_f64(p[1]), &from_f64(p[2])).expect("sample inside domain")
}

const FU_BETA_SAMPLES: &[&[f64]] = &[
    &[4.0, 1.0 / 3.0, 0.5, 0.2],
    &[2.0, 0.3, 0.5, 0.2],
    &[7.0, 0.6, 0.45, 0.25],
    &[23.0, 0.87, 0.4, 0.28],
    &[10.0, 0.5, 0.6, 0.1],
    &[3.0, 0.25, 0.34, 0.33],
];

const GUY_SAMPLES: &[&[f64]] = &[
    &[5.0, 1.0, 0.3],
    &[6.0, 2.0, 0.22],
    &[10.0, 3.0, 0.17],
    &[23.0, 1.5, 0.27],
    &[40.0, 5.0, 0.1],
    &[8.0, 1.2, 0.3],
];

const GLY_SAMPLES: &[&[f64]] = &[
    &[3.0, 1.0, 0.32],
    &[4.0, 2.0, 0.22],
    &[9.0, 3.0, 0.17],
    &[23.0, 1.5, 0.27],
    &[40.0, 5.0, 0.1],
    &[3.0, 1.3, 0.3],
];

const MU_D_SAMPLES: &[&[f64]] = &[
    &[30.0, 2.0],
    &[23.0, 157.0 / 80.0],
    &[23.0, 10.0],
    &[50.0, 40.0],
    &[100.0, 5.0],
    &[60.0, 300.0],
];

const PHI_SAMPLES: &[&[f64]] = &[
    &[23.0, 0.0, 1.5],
    &[23.0, 23.0, 1.2],
    &[30.0, 7.0, 1.9],
    &[50.0, 25.0, 1.05],
    &[24.0, 12.0, 53.0 / 27.0],
    &[10.0, 3.0, 1.7],
];

const PSI_SAMPLES: &[&[f64]] = &[
    &[23.0, 0.0],
    &[23.0, 0.1],
    &[30.0, 0.2],
    &[5.0, 0.3],
    &[100.0, 0.05],
];

const MU_SAMPLES: &[&[f64]] = &[&[1.5], &[157.0 / 80.0], &[10.0], &[31.0], &[40.0], &[900.0]];

const XI3_SLOPE_SAMPLES: &[&[f64]] = &[
    &[23.0, 0.0, 1.0],
    &[23.0, 1.0, 1.0],
    &[30.0, 0.5, 1.0],
    &[40.0, 0.25, 1.0],
    &[100.0, 0.75, 1.0],
];

const XI3_SECOND_SAMPLES: &[&[f64]] = &[
    &[23.0, 0.0, 1.5],
    &[23.0, 1.0, 53.0 / 27.0],
    &[30.0, 0.5, 1.2],
    &[40.0, 0.25, 1.7],
    &[100.0, 0.75, 1.05],
];

const FBX: &[&str] = &["d", "beta", "x", "y"];

/// Every identity with its default interior sample points.
pub fn identities() -> Vec<Identity> {
    vec![
        Identity { id: "fbetamono-fu", vars: FBX, wrt: 1, order: 1, f: fu_beta, closed: fu_beta_closed, samples: FU_BETA_SAMPLES },
        Identity { id: "fbetamono-fl", vars: FBX, wrt: 1, order: 1, f: fl_beta, closed: fl_beta_closed, samples: FU_BETA_SAMPLES },
        Identity { id: "fu-partial-x", vars: FBX, wrt: 2, order: 1, f: fu_x, closed: fu_x_closed, samples: FU_BETA_SAMPLES },
        Identity { id: "fu-partial-y", vars: FBX, wrt: 3, order: 1, f: fu_x, closed: fu_y_closed, samples: FU_BETA_SAMPLES },
        Identity { id: "guymono", vars: &["d", "mu", "y"], wrt: 2, order: 1, f: gu, closed: gu_closed, samples: GUY_SAMPLES },
        Identity { id: "glymono", vars: &["d", "mu", "y"], wrt: 2, order: 1, f: gl, closed: gl_closed, samples: GLY_SAMPLES },
        Identity { id: "Dhud", vars: &["d", "mu"], wrt: 0, order: 1, f: hu_d, closed: hu_d_closed, samples: MU_D_SAMPLES },
        Identity { id: "Dhld", vars: &["d", "mu"], wrt: 0, order: 1, f: hl_d, closed: hl_d_closed, samples: MU_D_SAMPLES },
        Identity { id: "phi-tilde-alpha", vars: &["d", "d0", "alpha"], wrt: 2, order: 1, f: phi_tilde, closed: phi_tilde_closed, samples: PHI_SAMPLES },
        Identity { id: "psi-deriv", vars: &["d", "t"], wrt: 1, order: 1, f: psi_plus, closed: psi_plus_closed, samples: PSI_SAMPLES },
        Identity { id: "psi-deriv-minus", vars: &["d", "t"], wrt: 1, order: 1, f: psi_minus, closed: psi_minus_closed, samples: PSI_SAMPLES },
        Identity { id: "ymu-deriv", vars: &["mu"], wrt: 0, order: 1, f: ymu, closed: ymu_closed, samples: MU_SAMPLES },
        Identity { id: "xmu-deriv", vars: &["mu"], wrt: 0, order: 1, f: xmu, closed: xmu_closed, samples: MU_SAMPLES },
        Identity { id: "xi3-slope-at-1", vars: &["d", "kappa", "alpha"], wrt: 2, order: 1, f: xi3, closed: xi3_slope_closed, samples: XI3_SLOPE_SAMPLES },
        Identity { id: "xi3-second", vars: &["d", "kappa", "alpha"], wrt: 2, order: 2, f: xi3, closed: xi3_second_closed, samples: XI3_SECOND_SAMPLES },
    ]
}

pub fn identity(id: &str) -> Option<Identity> {
    identities().into_iter().find(|i| i.id == id)
}

/// Default step for an identity: `1e-4` for first derivatives, `1e-3` for
/// second derivatives (relative to `max(1, |coordinate|)`).
pub fn default_step(order: u32) -> f64 {
    if order == 1 {
        1e-4
    } else {
        1e-3
    }
}

fn difference(id: &Identity, point: &[f64], h: f64) -> f64 {
    let at = |delta: f64| {
        let mut p = point.to_vec();
        p[id.wrt] += delta;
        (id.f)(&p)
    };
    match id.order {
        1 => (at(h) - at(-h)) / (2.0 * h),
        _ => (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h),
    }
}

pub fn derivative_spotcheck(id: &Identity, point: &[f64], step: f64) -> Result<SpotCheck, BoundsError> {
    if point.len() != id.vars.len() {
        return Err(BoundsError::Invalid(format!(
            "{} takes {} coordinates, got {}",
            id.id,
            id.vars.len(),
            point.len()
        )));
    }
    if step.is_nan() || step <= 0.0 {
        return Err(BoundsError::Invalid("step must be positive".into()));
    }
    let h = step * point[id.wrt].abs().max(1.0);
    let closed = (id.closed)(point);
    let value = (id.f)(point);
    if !closed.is_finite() || !value.is_finite() {
        return Err(BoundsError::Invalid(format!("{} is singular at {point:?}", id.id)));
    }
    let d1 = difference(id, point, h);
    let d2 = difference(id, point, h / 2.0);
    let richardson = (4.0 * d2 - d1) / 3.0;
    let error_estimate = (d2 - d1).abs() / 3.0;
    let floor = 64.0 * f64::EPSILON * (value.abs() + 1.0) / h.powi(id.order as i32);
    let tolerance = 10.0 * error_estimate + floor;
    let residual = (closed - richardson).abs();
    Ok(SpotCheck {
        id: id.id.to_string(),
        vars: id.vars.iter().map(|s| s.to_string()).collect(),
        point: point.to_vec(),
        step: h,
        closed,
        richardson,
        error_estimate,
        residual,
        tolerance,
        pass: residual <= tolerance,
    })
}

/// Every identity at every default sample.
pub fn spotcheck_all() -> Vec<SpotCheck> {
    identities()
        .iter()
        .flat_map(|id| {
            id.samples
                .iter()
                .map(move |p| derivative_spotcheck(id, p, default_step(id.order)).expect("default samples are interior"))
        })
        .collect()
}
