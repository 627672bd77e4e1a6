//! Brute-force re-derivations of the default velocity–distance rule base.

/// Hand-written triangle `(a, b, c)` with shoulder handling; does not use the
/// library's membership code.
pub fn tri(x: f64, a: f64, b: f64, c: f64) -> f64 {
    if x < a || x > c {
        return 0.0;
    }
    if x == b {
        return 1.0;
    }
    if x < b {
        (x - a) / (b - a)
    } else {
        (c - x) / (c - b)
    }
}

pub fn three_terms(x: f64) -> [f64; 3] {
    [tri(x, 0.0, 0.0, 0.5), tri(x, 0.0, 0.5, 1.0), tri(x, 0.5, 1.0, 1.0)]
}

pub const OUT_TERMS: [(f64, f64, f64); 5] =
    [(0.0, 0.0, 0.25), (0.0, 0.25, 0.5), (0.25, 0.5, 0.75), (0.5, 0.75, 1.0), (0.75, 1.0, 1.0)];
// consequent index per (distance row, velocity column) of the default table
pub const CONSEQUENTS: [[usize; 3]; 3] = [[4, 3, 3], [2, 2, 2], [0, 1, 1]];
pub const CONSTANTS: [[f64; 3]; 3] = [[1.0, 0.8, 0.6], [0.6, 0.6, 0.6], [0.2, 0.4, 0.5]];

pub fn centroid_oracle(v: f64, d: f64, samples: usize) -> f64 {
    let (v, d) = (v.clamp(0.0, 1.0), d.clamp(0.0, 1.0));
    let (mv, md) = (three_terms(v), three_terms(d));
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..samples {
        let z = k as f64 / (samples - 1) as f64;
        let mut agg = 0.0f64;
        for di in 0..3 {
            for vi in 0..3 {
                let s = mv[vi].min(md[di]);
                let (a, b, c) = OUT_TERMS[CONSEQUENTS[di][vi]];
                agg = agg.max(s.min(tri(z, a, b, c)));
            }
        }
        num += agg * z;
        den += agg;
    }
    num / den
}

pub fn sugeno_oracle(v: f64, d: f64) -> f64 {
    let (v, d) = (v.clamp(0.0, 1.0), d.clamp(0.0, 1.0));
    let (mv, md) = (three_terms(v), three_terms(d));
    let (mut num, mut den) = (0.0, 0.0);
    for di in 0..3 {
        for vi in 0..3 {
            let w = mv[vi] * md[di];
            num += w * CONSTANTS[di][vi];
            den += w;
        }
    }
    num / den
}
