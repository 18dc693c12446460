//! Crack geometry: an open polyline from a boundary mouth to the tip,
//! the jump sign function, the tip coordinate frame with the four
//! near-tip branch functions, and the kink-angle criterion.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Crack {
    /// Vertices from the mouth (on the domain boundary) to the tip.
    pub points: Vec<[f64; 2]>,
}

impl Crack {
    /// Straight edge crack from (0, y) to (length, y).
    pub fn edge(length: f64, y: f64) -> Self {
        Crack {
            points: vec![[0.0, y], [length, y]],
        }
    }

    pub fn tip(&self) -> [f64; 2] {
        *self.points.last().expect("crack has at least two points")
    }

    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
            .sum()
    }

    /// Unit tangent of the last segment, pointing out of the tip.
    pub fn tip_tangent(&self) -> [f64; 2] {
        let n = self.points.len();
        let a = self.points[n - 2];
        let b = self.points[n - 1];
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [d[0] / len, d[1] / len]
    }

    /// Extend the crack by `da` at `kink` radians off the current tip
    /// tangent.
    pub fn grow(&mut self, da: f64, kink: f64) {
        let t = self.tip_tangent();
        let (s, c) = kink.sin_cos();
        let dir = [c * t[0] - s * t[1], s * t[0] + c * t[1]];
        let tip = self.tip();
        self.points.push([tip[0] + da * dir[0], tip[1] + da * dir[1]]);
    }

    /// Jump sign at p: +1 on the side the crack normal points to, −1 on
    /// the other. The normal is the tangent rotated +90°.
    pub fn heaviside(&self, p: [f64; 2]) -> f64 {
        let mut best_d2 = f64::INFINITY;
        let mut sign = 1.0;
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let ab = [b[0] - a[0], b[1] - a[1]];
            let len2 = ab[0] * ab[0] + ab[1] * ab[1];
            if len2 == 0.0 {
                continue;
            }
            let ap = [p[0] - a[0], p[1] - a[1]];
            let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
            let proj = [a[0] + t * ab[0], a[1] + t * ab[1]];
            let d = [p[0] - proj[0], p[1] - proj[1]];
            let d2 = d[0] * d[0] + d[1] * d[1];
            if d2 < best_d2 {
                best_d2 = d2;
                let cross = ab[0] * (p[1] - a[1]) - ab[1] * (p[0] - a[0]);
                sign = if cross >= 0.0 { 1.0 } else { -1.0 };
            }
        }
        sign
    }

    pub fn tip_frame(&self) -> TipFrame {
        let t = self.tip_tangent();
        TipFrame {
            origin: self.tip(),
            t,
            n: [-t[1], t[0]],
        }
    }
}

/// Local frame at the crack tip: x1 along the crack extension, x2 along
/// the crack normal.
#[derive(Debug, Clone, Copy)]
pub struct TipFrame {
    pub origin: [f64; 2],
    pub t: [f64; 2],
    pub n: [f64; 2],
}

impl TipFrame {
    pub fn local(&self, p: [f64; 2]) -> [f64; 2] {
        let d = [p[0] - self.origin[0], p[1] - self.origin[1]];
        [
            d[0] * self.t[0] + d[1] * self.t[1],
            d[0] * self.n[0] + d[1] * self.n[1],
        ]
    }

    pub fn polar(&self, p: [f64; 2]) -> (f64, f64) {
        let l = self.local(p);
        ((l[0] * l[0] + l[1] * l[1]).sqrt(), l[1].atan2(l[0]))
    }

    /// The four branch functions √r·{sin θ/2, cos θ/2, sin θ/2 sin θ,
    /// cos θ/2 sin θ}.
    pub fn branch(r: f64, theta: f64) -> [f64; 4] {
        let sr = r.sqrt();
        let (s2, c2) = (0.5 * theta).sin_cos();
        let s = theta.sin();
        [sr * s2, sr * c2, sr * s2 * s, sr * c2 * s]
    }

    /// Global-frame gradients of the branch functions at p.
    pub fn branch_grad(&self, p: [f64; 2]) -> [[f64; 2]; 4] {
        let (r, theta) = self.polar(p);
        let sr = r.sqrt();
        let inv2sr = 0.5 / sr;
        let (s2, c2) = (0.5 * theta).sin_cos();
        let (s, c) = theta.sin_cos();
        // (∂/∂r, ∂/∂θ) per function
        let dr = [
            inv2sr * s2,
            inv2sr * c2,
            inv2sr * s2 * s,
            inv2sr * c2 * s,
        ];
        let dth = [
            0.5 * sr * c2,
            -0.5 * sr * s2,
            sr * (0.5 * c2 * s + s2 * c),
            sr * (-0.5 * s2 * s + c2 * c),
        ];
        let mut out = [[0.0; 2]; 4];
        for k in 0..4 {
            // local Cartesian via the polar chain rule
            let d1 = dr[k] * c - dth[k] * s / r;
            let d2 = dr[k] * s + dth[k] * c / r;
            out[k] = [
                d1 * self.t[0] + d2 * self.n[0],
                d1 * self.t[1] + d2 * self.n[1],
            ];
        }
        out
    }
}

/// Maximum-hoop-stress kink angle (radians) for a mixed-mode tip state.
pub fn kink_angle(k1: f64, k2: f64) -> f64 {
    if k2 == 0.0 {
        return 0.0;
    }
    2.0 * ((k1 - (k1 * k1 + 8.0 * k2 * k2).sqrt()) / (4.0 * k2)).atan()
}

/// Derivative of the normalized hoop stress with respect to the kink
/// angle; the criterion's stationarity residual.
pub fn hoop_stress_derivative(k1: f64, k2: f64, theta: f64) -> f64 {
    k1 * theta.sin() + k2 * (3.0 * theta.cos() - 1.0)
}
