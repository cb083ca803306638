//! Positive radial ground state of `ΔQ − Q + Q³ = 0` by shooting on `Q(0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STEP: f64 = 1e-3;
const R_MAX: f64 = 60.0;
const UNDERSHOOT: f64 = 1.5;
const OVERSHOOT: f64 = 3.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r_nodes: Vec<f64>,
    pub q_values: Vec<f64>,
    pub mass: f64,
    /// Shooting parameter `Q(0)`.
    pub q0: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// Crossed zero: `Q(0)` too large.
    Over,
    /// Turned back up while positive: `Q(0)` too small.
    Under,
    /// Neither happened before `R_MAX`.
    Undecided,
}

fn rhs(r: f64, q: f64, p: f64) -> (f64, f64) {
    (p, -p / r + q - q * q * q)
}

/// Integrate from the series start until the trajectory is classified.
/// Returns the classification and, when `record` is set, the samples up to
/// the point where the solution was closest to zero before leaving.
fn shoot(q0: f64, record: bool) -> (Shot, Vec<f64>, Vec<f64>) {
    let h = STEP;
    // Q = Q0 + c r² + e r⁴ + O(r⁶)
    let c = (q0 - q0 * q0 * q0) / 4.0;
    let e = (1.0 - 3.0 * q0 * q0) * c / 16.0;
    let mut r = h;
    let mut q = q0 + c * h * h + e * h.powi(4);
    let mut p = 2.0 * c * h + 4.0 * e * h.powi(3);
    let mut rs = Vec::new();
    let mut qs = Vec::new();
    if record {
        rs.push(r);
        qs.push(q);
    }
    let mut best = (q.abs(), 1usize);
    let outcome = loop {
        let (k1q, k1p) = rhs(r, q, p);
        let (k2q, k2p) = rhs(r + 0.5 * h, q + 0.5 * h * k1q, p + 0.5 * h * k1p);
        let (k3q, k3p) = rhs(r + 0.5 * h, q + 0.5 * h * k2q, p + 0.5 * h * k2p);
        let (k4q, k4p) = rhs(r + h, q + h * k3q, p + h * k3p);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r += h;
        if q < 0.0 {
            break Shot::Over;
        }
        if p > 0.0 {
            break Shot::Under;
        }
        if record {
            rs.push(r);
            qs.push(q);
            if q < best.0 {
                best = (q, rs.len());
            }
        }
        if r > R_MAX {
            break Shot::Undecided;
        }
    };
    if record {
        rs.truncate(best.1);
        qs.truncate(best.1);
    }
    (outcome, rs, qs)
}

/// `2π∫Q² r dr` by the end-corrected trapezoid rule from `r = 0` on the
/// uniform nodes, plus the exponential tail `Q(r_c)² r_c / 2` beyond the
/// last node.
fn radial_mass(rs: &[f64], qs: &[f64], q0: f64) -> f64 {
    let h = rs[0];
    // d/dr (r Q²) = Q(0)² at the origin
    let mut acc = 0.5 * h * (rs[0] * qs[0] * qs[0]) + h * h / 12.0 * q0 * q0;
    for i in 1..rs.len() {
        let a = rs[i - 1] * qs[i - 1] * qs[i - 1];
        let b = rs[i] * qs[i] * qs[i];
        acc += 0.5 * (rs[i] - rs[i - 1]) * (a + b);
    }
    let last = rs.len() - 1;
    acc += 0.5 * qs[last] * qs[last] * rs[last];
    2.0 * std::f64::consts::PI * acc
}

/// Bisect on `Q(0)` until the bracket is narrower than `tolerance`.
pub fn townes_profile(tolerance: f64) -> Result<RadialProfile> {
    if !(tolerance >= 1e-12) {
        return Err(Error::InvalidParameter(format!("tolerance must be at least 1e-12, got {tolerance}")));
    }
    let (mut lo, mut hi) = (UNDERSHOOT, OVERSHOOT);
    if shoot(lo, false).0 != Shot::Under || shoot(hi, false).0 != Shot::Over {
        return Err(Error::ShootingBracket(format!("[{lo}, {hi}] does not separate under- and overshoot")));
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        match shoot(mid, false).0 {
            Shot::Over => hi = mid,
            Shot::Under => lo = mid,
            Shot::Undecided => {
                lo = mid;
                hi = mid;
            }
        }
    }
    let q0 = 0.5 * (lo + hi);
    let (_, r_nodes, q_values) = shoot(q0, true);
    let mass = radial_mass(&r_nodes, &q_values, q0);
    Ok(RadialProfile { r_nodes, q_values, mass, q0, step: STEP })
}

impl RadialProfile {
    /// Max-norm residual of `Q'' + Q'/r − Q + Q³` from fourth-order central
    /// differences, over nodes with `r ≤ r_max`.
    pub fn residual(&self, r_max: f64) -> f64 {
        let h = self.step;
        let q = &self.q_values;
        let mut worst = 0.0f64;
        for i in 2..q.len().saturating_sub(2) {
            let r = self.r_nodes[i];
            if r > r_max {
                break;
            }
            let d1 = (q[i - 2] - 8.0 * q[i - 1] + 8.0 * q[i + 1] - q[i + 2]) / (12.0 * h);
            let d2 = (-q[i - 2] + 16.0 * q[i - 1] - 30.0 * q[i] + 16.0 * q[i + 1] - q[i + 2]) / (12.0 * h * h);
            let res = d2 + d1 / r - q[i] + q[i].powi(3);
            worst = worst.max(res.abs());
        }
        worst
    }

    /// Linear interpolation of `Q`, zero beyond the last node.
    pub fn eval(&self, r: f64) -> f64 {
        let h = self.step;
        if r <= self.r_nodes[0] {
            return self.q0 + (self.q_values[0] - self.q0) * (r / self.r_nodes[0]).powi(2);
        }
        let x = (r - self.r_nodes[0]) / h;
        let i = x.floor() as usize;
        if i + 1 >= self.q_values.len() {
            return 0.0;
        }
        let t = x - i as f64;
        (1.0 - t) * self.q_values[i] + t * self.q_values[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_endpoints_classify() {
        assert_eq!(shoot(1.5, false).0, Shot::Under);
        assert_eq!(shoot(3.0, false).0, Shot::Over);
        // Q ≡ 1 is an equilibrium, so it cannot bracket from below
        assert_ne!(shoot(1.0, false).0, Shot::Over);
    }

    #[test]
    fn profile_is_positive_and_decaying() {
        let p = townes_profile(1e-12).unwrap();
        assert!(p.q_values.iter().all(|&q| q > 0.0));
        assert!(p.q_values.windows(2).all(|w| w[1] <= w[0]));
        assert!(p.r_nodes.windows(2).all(|w| w[1] > w[0]));
        assert!(*p.q_values.last().unwrap() < 1e-5);
    }

    #[test]
    fn residual_is_small() {
        let p = townes_profile(1e-12).unwrap();
        let res = p.residual(10.0);
        assert!(res < 1e-8, "residual {res:e}");
    }

    #[test]
    fn tolerance_is_validated() {
        assert!(townes_profile(1e-13).is_err());
    }
}
