//! Dense sub-stepping reference for the swept gate tests: the segment is
//! replaced by 1000 interpolation points, each tested for plane side and
//! distance to the frame annulus.

use rand::Rng;

pub const SAMPLES: usize = 1000;

/// Gate described by raw numbers only.
#[derive(Debug, Clone, Copy)]
pub struct RawGate {
    pub center: [f64; 3],
    pub yaw: f64,
    pub diameter: f64,
}

impl RawGate {
    pub fn normal(&self) -> [f64; 3] {
        [self.yaw.cos(), self.yaw.sin(), 0.0]
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t]
}

fn side(g: &RawGate, q: [f64; 3]) -> f64 {
    dot(sub(q, g.center), g.normal())
}

fn in_plane_radius(g: &RawGate, q: [f64; 3]) -> f64 {
    let r = sub(q, g.center);
    let n = g.normal();
    let h = dot(r, n);
    let ip = [r[0] - h * n[0], r[1] - h * n[1], r[2] - h * n[2]];
    dot(ip, ip).sqrt()
}

fn frame_distance(g: &RawGate, frame_width: f64, q: [f64; 3]) -> f64 {
    let h = side(g, q);
    let rho = in_plane_radius(g, q);
    let inner = g.diameter / 2.0;
    let radial_gap = if rho < inner {
        inner - rho
    } else if rho > inner + frame_width {
        rho - inner - frame_width
    } else {
        0.0
    };
    (h * h + radial_gap * radial_gap).sqrt()
}

fn samples(p0: [f64; 3], p1: [f64; 3]) -> Vec<[f64; 3]> {
    (0..SAMPLES).map(|k| lerp(p0, p1, k as f64 / (SAMPLES - 1) as f64)).collect()
}

/// Radius at which the sampled path changes side, with the direction of the
/// change (`true` = negative to non-negative).
fn sampled_crossing(g: &RawGate, pts: &[[f64; 3]]) -> Option<(f64, bool)> {
    let sides: Vec<f64> = pts.iter().map(|&q| side(g, q)).collect();
    (0..pts.len() - 1).find(|&k| (sides[k] < 0.0) != (sides[k + 1] < 0.0)).map(|k| {
        let t = sides[k] / (sides[k] - sides[k + 1]);
        (in_plane_radius(g, lerp(pts[k], pts[k + 1], t)), sides[k] < 0.0)
    })
}

pub fn oracle_pass(g: &RawGate, p0: [f64; 3], p1: [f64; 3], drone_radius: f64) -> bool {
    let pts = samples(p0, p1);
    matches!(sampled_crossing(g, &pts), Some((rho, true)) if rho < g.diameter / 2.0 - drone_radius)
}

pub fn oracle_collision(g: &RawGate, p0: [f64; 3], p1: [f64; 3], drone_radius: f64, frame_width: f64) -> bool {
    let pts = samples(p0, p1);
    let inner = g.diameter / 2.0;
    match sampled_crossing(g, &pts) {
        Some((rho, _)) => rho >= inner - drone_radius && rho <= inner + frame_width + drone_radius,
        None => pts.iter().map(|&q| frame_distance(g, frame_width, q)).fold(f64::INFINITY, f64::min) < drone_radius,
    }
}

/// A random gate and a short segment near it. A fifth of the segments are
/// aimed so that their plane crossing sits within 1 mm of a decision
/// boundary (aperture clearance or outer frame contact).
pub fn random_case(rng: &mut impl Rng, drone_radius: f64, frame_width: f64) -> (RawGate, [f64; 3], [f64; 3]) {
    let g = RawGate {
        center: [rng.gen_range(-5.0..5.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.5..2.0)],
        yaw: rng.gen_range(-60f64.to_radians()..60f64.to_radians()),
        diameter: if rng.gen_bool(0.5) { 0.60 } else { 0.45 },
    };
    let n = g.normal();
    let u = [-n[1], n[0], 0.0];
    let w = [0.0, 0.0, 1.0];
    let at = |h: f64, a: f64, b: f64| {
        [
            g.center[0] + h * n[0] + a * u[0] + b * w[0],
            g.center[1] + h * n[1] + a * u[1] + b * w[1],
            g.center[2] + h * n[2] + a * u[2] + b * w[2],
        ]
    };
    if rng.gen_bool(0.2) {
        let inner = g.diameter / 2.0;
        let boundary = if rng.gen_bool(0.5) { inner - drone_radius } else { inner + frame_width + drone_radius };
        let rho = boundary + rng.gen_range(-1e-3..1e-3);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let (a, b) = (rho * phi.cos(), rho * phi.sin());
        let h0 = rng.gen_range(0.005..0.1);
        let h1 = rng.gen_range(0.005..0.1);
        let (da, db) = (rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02));
        let s = h0 / (h0 + h1);
        let start = at(-h0, a - da * s, b - db * s);
        let end = at(h1, a + da * (1.0 - s), b + db * (1.0 - s));
        return if rng.gen_bool(0.8) { (g, start, end) } else { (g, end, start) };
    }
    let start = at(rng.gen_range(-0.4..0.4), rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
    let (theta, z): (f64, f64) = (rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-1.0..1.0));
    let r = (1.0 - z * z).sqrt();
    let len = rng.gen_range(0.01..0.4);
    let end = [start[0] + len * r * theta.cos(), start[1] + len * r * theta.sin(), start[2] + len * z];
    (g, start, end)
}
