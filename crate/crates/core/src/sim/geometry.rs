//! Swept-segment tests against a gate modelled as a planar annulus: the
//! aperture has radius `diameter / 2` and the frame extends `frame_width`
//! beyond it.

use crate::course::GateSpec;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Vec3,
    pub end: Vec3,
}

impl Segment {
    pub fn new(start: Vec3, end: Vec3) -> Self {
        Self { start, end }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.start + (self.end - self.start) * t
    }
}

/// Where a segment pierces a gate plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneCrossing {
    /// Parametric position along the segment, in `[0, 1]`.
    pub t: f64,
    /// In-plane distance of the piercing point from the gate centre.
    pub radial: f64,
    /// True when crossing from behind the gate (negative signed distance
    /// along the normal) to in front of it.
    pub forward: bool,
}

/// Signed distance of `p` from the gate plane along the gate normal.
pub fn signed_distance(gate: &GateSpec, p: &Vec3) -> f64 {
    (p - gate.center).dot(&gate.normal())
}

/// In-plane distance of `p`'s projection from the gate centre.
pub fn radial_distance(gate: &GateSpec, p: &Vec3) -> f64 {
    let n = gate.normal();
    let r = p - gate.center;
    (r - n * r.dot(&n)).norm()
}

/// Distance from `p` to the annulus `radius ≤ ρ ≤ radius + frame_width`
/// lying in the gate plane.
pub fn distance_to_frame(gate: &GateSpec, frame_width: f64, p: &Vec3) -> f64 {
    let h = signed_distance(gate, p);
    let rho = radial_distance(gate, p);
    let inner = gate.radius();
    let d_rho = (inner - rho).max(rho - (inner + frame_width)).max(0.0);
    h.hypot(d_rho)
}

/// The plane crossing of `seg`, if its endpoints lie on opposite sides
/// (a point exactly on the plane counts as the positive side).
pub fn plane_crossing(seg: &Segment, gate: &GateSpec) -> Option<PlaneCrossing> {
    let s0 = signed_distance(gate, &seg.start);
    let s1 = signed_distance(gate, &seg.end);
    if (s0 < 0.0) == (s1 < 0.0) {
        return None;
    }
    let t = s0 / (s0 - s1);
    Some(PlaneCrossing { t, radial: radial_distance(gate, &seg.at(t)), forward: s0 < 0.0 })
}

/// True iff the segment crosses the gate front-to-back with the crossing
/// point more than `drone_radius` inside the aperture rim.
pub fn gate_pass_check(seg: &Segment, gate: &GateSpec, drone_radius: f64) -> bool {
    gate_pass_time(seg, gate, drone_radius).is_some()
}

pub fn gate_pass_time(seg: &Segment, gate: &GateSpec, drone_radius: f64) -> Option<f64> {
    plane_crossing(seg, gate)
        .filter(|c| c.forward && c.radial < gate.radius() - drone_radius)
        .map(|c| c.t)
}

pub fn collision_check(seg: &Segment, gate: &GateSpec, drone_radius: f64, frame_width: f64) -> bool {
    collision_time(seg, gate, drone_radius, frame_width).is_some()
}

/// Parametric instant of contact with the gate frame.
///
/// A segment that crosses the plane collides when the crossing point lies in
/// the frame annulus inflated by `drone_radius`. A segment that stays on one
/// side collides when its closest approach to the annulus is below
/// `drone_radius`; the instant reported is that of the closest approach.
pub fn collision_time(seg: &Segment, gate: &GateSpec, drone_radius: f64, frame_width: f64) -> Option<f64> {
    if let Some(c) = plane_crossing(seg, gate) {
        let lo = gate.radius() - drone_radius;
        let hi = gate.radius() + frame_width + drone_radius;
        return (c.radial >= lo && c.radial <= hi).then_some(c.t);
    }
    // no crossing: |h| is linear with constant sign, bounded below by the
    // nearer endpoint
    let h0 = signed_distance(gate, &seg.start).abs();
    let h1 = signed_distance(gate, &seg.end).abs();
    if h0.min(h1) >= drone_radius {
        return None;
    }
    let (t, d) = closest_approach(seg, |p| distance_to_frame(gate, frame_width, p));
    (d < drone_radius).then_some(t)
}

const COARSE_SAMPLES: usize = 32;

/// Minimizes `dist` along the segment: a coarse scan brackets every local
/// minimum, each bracket is refined by golden-section search.
fn closest_approach(seg: &Segment, dist: impl Fn(&Vec3) -> f64) -> (f64, f64) {
    let f = |t: f64| dist(&seg.at(t));
    let ts: Vec<f64> = (0..=COARSE_SAMPLES).map(|k| k as f64 / COARSE_SAMPLES as f64).collect();
    let fs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let mut best = (0.0, f64::INFINITY);
    for k in 0..=COARSE_SAMPLES {
        let left = if k == 0 { f64::INFINITY } else { fs[k - 1] };
        let right = if k == COARSE_SAMPLES { f64::INFINITY } else { fs[k + 1] };
        if fs[k] > left || fs[k] > right {
            continue;
        }
        let a = ts[k.saturating_sub(1)];
        let b = ts[(k + 1).min(COARSE_SAMPLES)];
        let (t, v) = golden_section(&f, a, b);
        let (t, v) = if fs[k] < v { (ts[k], fs[k]) } else { (t, v) };
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gate(diameter: f64) -> GateSpec {
        GateSpec { center: Vec3::new(2.0, 0.0, 1.0), yaw: 0.0, diameter, height: 1.0, index: 0 }
    }

    const R: f64 = 0.1625;
    const W: f64 = 0.05;

    #[test]
    fn straight_through_centre_passes() {
        let g = gate(0.6);
        let seg = Segment::new(Vec3::new(1.96, 0.0, 1.0), Vec3::new(2.04, 0.0, 1.0));
        assert!(gate_pass_check(&seg, &g, R));
        assert!(!collision_check(&seg, &g, R, W));
        // clearance to the rim is 0.3 - 0.1625 = 0.1375 m
        assert!((g.radius() - R - 0.1375).abs() < 1e-12);
    }

    #[test]
    fn backwards_crossing_does_not_pass() {
        let g = gate(0.6);
        let seg = Segment::new(Vec3::new(2.04, 0.0, 1.0), Vec3::new(1.96, 0.0, 1.0));
        assert!(!gate_pass_check(&seg, &g, R));
    }

    #[test]
    fn parallel_segment_never_crosses() {
        let g = gate(0.6);
        let seg = Segment::new(Vec3::new(1.9, -1.0, 1.0), Vec3::new(1.9, 1.0, 1.0));
        assert!(plane_crossing(&seg, &g).is_none());
        assert!(!gate_pass_check(&seg, &g, R));
    }

    #[test]
    fn crossing_at_rim_radius_collides() {
        let g = gate(0.6);
        for radial in [0.3 - R, 0.3, 0.3 + W + R] {
            let seg = Segment::new(Vec3::new(1.95, radial, 1.0), Vec3::new(2.05, radial, 1.0));
            let c = plane_crossing(&seg, &g).unwrap();
            assert_eq!(c.radial, radial);
            assert!(collision_check(&seg, &g, R, W), "radial {radial}");
            assert!(!gate_pass_check(&seg, &g, R));
        }
        let seg = Segment::new(Vec3::new(1.95, 0.6, 1.0), Vec3::new(2.05, 0.6, 1.0));
        assert!(!collision_check(&seg, &g, R, W), "outside the frame is a clean miss");
    }

    #[test]
    fn approaching_the_frame_collides_before_the_plane() {
        let g = gate(0.6);
        let seg = Segment::new(Vec3::new(1.70, 0.32, 1.0), Vec3::new(1.90, 0.32, 1.0));
        assert!(collision_check(&seg, &g, R, W));
        let t = collision_time(&seg, &g, R, W).unwrap();
        assert!((t - 1.0).abs() < 1e-6, "closest approach is the endpoint, got {t}");
        let far = Segment::new(Vec3::new(1.5, 0.32, 1.0), Vec3::new(1.8, 0.32, 1.0));
        assert!(!collision_check(&far, &g, R, W));
    }
}
