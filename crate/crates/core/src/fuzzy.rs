//! Mamdani fuzzy inference over normalized universes.
//!
//! Both inputs (error, error delta) and the output share the universe
//! [-1, 1] with five evenly spaced triangular sets NL, NS, ZE, PS, PL
//! peaking at -1, -0.5, 0, 0.5, 1. Adjacent triangles overlap at half
//! height, so memberships form a partition of unity: at any point of the
//! universe they sum to exactly 1.
//!
//! Inference is min for rule firing, max for aggregation and centroid
//! defuzzification. The rule base is the classic PI-like diagonal table
//! `out(i, j) = clamp(i + j - 2, 0, 4)` over label indices 0..=4, which
//! is odd-symmetric and monotone in both inputs.
//!
//! The centroid is computed exactly: the aggregated membership is a
//! piecewise-linear curve, so integrating between consecutive
//! breakpoints (segment endpoints and pairwise segment intersections)
//! in closed form introduces no discretization error.

use alloc::vec::Vec;

pub const LABELS: usize = 5;

/// Peak positions of NL, NS, ZE, PS, PL.
pub const CENTERS: [f64; LABELS] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Triangle half-width: each set spans `center ± HALF_WIDTH`.
const HALF_WIDTH: f64 = 0.5;

fn fabs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

fn fmin(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}

fn fmax(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

/// Membership of `x` in set `label`.
pub fn membership(label: usize, x: f64) -> f64 {
    fmax(0.0, 1.0 - fabs(x - CENTERS[label]) / HALF_WIDTH)
}

/// Memberships of `x` in all five sets.
pub fn memberships(x: f64) -> [f64; LABELS] {
    let mut m = [0.0; LABELS];
    for (label, slot) in m.iter_mut().enumerate() {
        *slot = membership(label, x);
    }
    m
}

/// Output label index for input labels `(i, j)`.
pub fn rule(i: usize, j: usize) -> usize {
    (i + j).saturating_sub(2).min(LABELS - 1)
}

/// Mamdani inference: min firing over the 5x5 rule table, max
/// aggregation per output label, exact centroid defuzzification.
/// Inputs are clamped to [-1, 1]; the output lies in [-1, 1].
pub fn infer(e: f64, de: f64) -> f64 {
    let me = memberships(e.clamp(-1.0, 1.0));
    let md = memberships(de.clamp(-1.0, 1.0));
    let mut strength = [0.0f64; LABELS];
    for (i, &wi) in me.iter().enumerate() {
        if wi == 0.0 {
            continue;
        }
        for (j, &wj) in md.iter().enumerate() {
            if wj == 0.0 {
                continue;
            }
            let k = rule(i, j);
            strength[k] = fmax(strength[k], fmin(wi, wj));
        }
    }
    centroid(&strength)
}

/// Aggregated output membership at `y`: max over labels of the
/// strength-clipped triangles.
pub fn aggregated(strength: &[f64; LABELS], y: f64) -> f64 {
    let mut acc = 0.0;
    for (label, &s) in strength.iter().enumerate() {
        if s > 0.0 {
            acc = fmax(acc, fmin(s, membership(label, y)));
        }
    }
    acc
}

/// Center of mass of the aggregated membership over [-1, 1].
///
/// Panics if the aggregate has zero area, which cannot occur for clamped
/// inputs: partition of unity guarantees some rule fires at >= 0.25.
pub fn centroid(strength: &[f64; LABELS]) -> f64 {
    // Linear segments composing each clipped triangle, restricted to the
    // universe: rise to the clip level, plateau, fall from it. Endpoint
    // values come from the segment's own triangle, so each Seg is an
    // exact line piece.
    #[derive(Clone, Copy)]
    struct Seg {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
    }
    let mut segs: Vec<Seg> = Vec::new();
    let mut cuts: Vec<f64> = Vec::with_capacity(32);
    cuts.push(-1.0);
    cuts.push(1.0);
    for (label, &s) in strength.iter().enumerate() {
        if s <= 0.0 {
            continue;
        }
        let c = CENTERS[label];
        // tri(y) = s at y = c ± (1 - s) * HALF_WIDTH
        let clip_lo = c - (1.0 - s) * HALF_WIDTH;
        let clip_hi = c + (1.0 - s) * HALF_WIDTH;
        for &(a, b) in &[(c - HALF_WIDTH, clip_lo), (clip_lo, clip_hi), (clip_hi, c + HALF_WIDTH)] {
            let (a, b) = (fmax(a, -1.0), fmin(b, 1.0));
            if a < b {
                segs.push(Seg {
                    x0: a,
                    x1: b,
                    y0: fmin(s, membership(label, a)),
                    y1: fmin(s, membership(label, b)),
                });
                cuts.push(a);
                cuts.push(b);
            }
        }
    }
    // Pairwise intersections of segment lines: between two consecutive
    // breakpoints the aggregate max is then a single linear piece.
    let eval = |y: f64| aggregated(strength, y);
    for i in 0..segs.len() {
        for j in (i + 1)..segs.len() {
            let (p, q) = (segs[i], segs[j]);
            let lo = fmax(p.x0, q.x0);
            let hi = fmin(p.x1, q.x1);
            if lo >= hi {
                continue;
            }
            let line = |s: Seg, y: f64| s.y0 + (s.y1 - s.y0) * (y - s.x0) / (s.x1 - s.x0);
            let f_lo = line(p, lo) - line(q, lo);
            let f_hi = line(p, hi) - line(q, hi);
            if f_lo * f_hi < 0.0 {
                let y = lo + (hi - lo) * f_lo / (f_lo - f_hi);
                cuts.push(y);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    let mut area = 0.0;
    let mut moment = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (ua, ub) = (eval(a), eval(b));
        // mu(y) = c0 + c1*y on [a, b]
        let c1 = (ub - ua) / (b - a);
        let c0 = ua - c1 * a;
        area += (ua + ub) * (b - a) / 2.0;
        moment += c0 * (b * b - a * a) / 2.0 + c1 * (b * b * b - a * a * a) / 3.0;
    }
    assert!(area > 1e-12, "aggregated membership has zero area");
    moment / area
}
