//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;

/// `√((m-1)(m-2) / (f(f+1)))`.
fn radical(m: f64, f: f64) -> f64 {
    ((m - 1.0) * (m - 2.0) / (f * (f + 1.0))).sqrt()
}

/// Triangle vertices from the published closed forms, transcribed case by
/// case. `None` when `M - j - k < 3`.
pub fn closed_form_vertices(j: u64, k: u64, seats: u64) -> Option<[(f64, f64); 3]> {
    if seats < j + k + 3 {
        return None;
    }
    let m = (seats - j - k) as f64;
    let (jf, kf) = (j as f64, k as f64);
    // x of line 1 meeting y = 1 - x
    let a = |r1: f64| (1.0 - (m - jf * r1)) / ((-1.0 - r1) + 1.0);
    // x of line 2 meeting y = 1 - x
    let b = |r2: f64| (1.0 + (m - kf * r2) / (-1.0 - r2)) / (1.0 / (-1.0 - r2) + 1.0);

    let (x1, x2, x3, y3);
    match (j > 0, k > 0) {
        (true, true) => {
            let (r1, r2) = (radical(m, jf), radical(m, kf));
            x1 = a(r1).max(b(r2));
            x2 = a(r1).min(b(r2));
            x3 = (-(m - kf * r2) / (-1.0 - r2) - m + jf * r1) / (-1.0 - r1 + 1.0 / (1.0 + r2));
            y3 = (-(m - jf * r1) / (-1.0 - r1) - m + kf * r2) / (-1.0 - r2 + 1.0 / (1.0 + r1));
        }
        (false, true) => {
            let r2 = radical(m, kf);
            x1 = b(r2);
            x2 = 0.0;
            x3 = 0.0;
            y3 = -(m - kf * r2) / (-1.0 - r2);
        }
        (true, false) => {
            let r1 = radical(m, jf);
            x1 = 1.0;
            x2 = a(r1);
            x3 = -(m - jf * r1) / (-1.0 - r1);
            y3 = 0.0;
        }
        (false, false) => {
            x1 = 1.0;
            x2 = 0.0;
            x3 = 0.0;
            y3 = 0.0;
        }
    }
    Some([(x1, 1.0 - x1), (x2, 1.0 - x2), (x3, y3)])
}

/// `max(0, det / 2)` on the closed-form vertices.
pub fn closed_form_area(j: u64, k: u64, seats: u64) -> f64 {
    let Some([(x1, y1), (x2, y2), (x3, y3)]) = closed_form_vertices(j, k, seats) else {
        return 0.0;
    };
    let det = x1 * (y2 - y3) - x2 * (y1 - y3) + x3 * (y1 - y2);
    (0.5 * det).max(0.0)
}

/// Every vertex of `a` has a partner in `b` within `rel * max(1, |v|)`.
pub fn same_vertex_set(a: &[(f64, f64)], b: &[(f64, f64)], rel: f64) -> bool {
    let close = |p: &(f64, f64), q: &(f64, f64)| {
        (p.0 - q.0).abs() <= rel * p.0.abs().max(1.0) && (p.1 - q.1).abs() <= rel * p.1.abs().max(1.0)
    };
    a.len() == b.len() && a.iter().all(|p| b.iter().any(|q| close(p, q))) && b.iter().all(|q| a.iter().any(|p| close(p, q)))
}

/// Keeps the part of a convex polygon with `a x + b y >= c`.
fn clip(poly: &[(f64, f64)], a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let fp = a * p.0 + b * p.1 - c;
        let fq = a * q.0 + b * q.1 - c;
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp > 0.0 && fq < 0.0) || (fp < 0.0 && fq > 0.0) {
            let t = fp / (fp - fq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let mut s = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        s += p.0 * q.1 - q.0 * p.1;
    }
    0.5 * s.abs()
}

/// Area of `{(x, y) ∈ [0,1]² | x + y < 1}` where both criteria hold for the
/// quotas `(j + x, k + y, M - j - k - x - y)`. With `x + y < 1` the largest
/// quota has floor `m - 1`, so criterion `s` reads
/// `(m - x - y) √(f(f+1)) < (f + d) √((m-1)(m-2))`, a half-plane.
pub fn clipped_region_area(j: u64, k: u64, seats: u64) -> f64 {
    if seats < j + k + 3 {
        return 0.0;
    }
    let m = (seats - j - k) as f64;
    let t = ((m - 1.0) * (m - 2.0)).sqrt();
    let sj = (j as f64 * (j as f64 + 1.0)).sqrt();
    let sk = (k as f64 * (k as f64 + 1.0)).sqrt();
    let tri = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
    // (sj + t) x + sj y >= m sj - j t, and symmetrically for y
    let poly = clip(&tri, sj + t, sj, m * sj - j as f64 * t);
    let poly = clip(&poly, sk, sk + t, m * sk - k as f64 * t);
    if poly.len() < 3 {
        0.0
    } else {
        shoelace(&poly)
    }
}

/// `n` distinct populations in `1..=max`.
pub fn distinct_pops<G: Rng>(rng: &mut G, n: usize, max: u64) -> Vec<u64> {
    loop {
        let pops: Vec<u64> = (0..n).map(|_| rng.random_range(1..=max)).collect();
        let mut sorted = pops.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() == n {
            return pops;
        }
    }
}

/// Uniform point in the triangle `v`, kept at least `margin` (in barycentric
/// weight) away from each edge.
pub fn point_in_triangle<G: Rng>(rng: &mut G, v: &[(f64, f64); 3], margin: f64) -> (f64, f64) {
    loop {
        let (mut u, mut w) = (rng.random::<f64>(), rng.random::<f64>());
        if u + w > 1.0 {
            u = 1.0 - u;
            w = 1.0 - w;
        }
        let l0 = 1.0 - u - w;
        if l0 < margin || u < margin || w < margin {
            continue;
        }
        return (
            l0 * v[0].0 + u * v[1].0 + w * v[2].0,
            l0 * v[0].1 + u * v[1].1 + w * v[2].1,
        );
    }
}
