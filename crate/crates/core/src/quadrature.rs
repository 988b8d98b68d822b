//! Gauss-Legendre nodes and adaptive integration over triangles.

use crate::geometry::Point;
use crate::real::CompensatedSum;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "a Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Collapsed-square (conical product) rule on the reference triangle
/// `{(s, t) | s, t >= 0, s + t <= 1}`: Gauss-Legendre in both directions
/// with the Duffy map `s = u`, `t = (1 - u) v`. Exact for polynomials of
/// total degree `2n - 2` with `n` points per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    points: Vec<(f64, f64)>,
    /// Weights summing to the reference area 1/2.
    weights: Vec<f64>,
    degree: usize,
}

impl TriangleRule {
    /// Smallest rule exact for polynomials of total degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        let n = (degree + 2).div_ceil(2).max(1);
        let gl = GaussLegendre::new(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (xu, wu) in gl.nodes().iter().zip(gl.weights()) {
            let u = 0.5 * (xu + 1.0);
            for (xv, wv) in gl.nodes().iter().zip(gl.weights()) {
                let v = 0.5 * (xv + 1.0);
                points.push((u, (1.0 - u) * v));
                weights.push(0.25 * wu * wv * (1.0 - u));
            }
        }
        Self {
            points,
            weights,
            degree: 2 * n - 2,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `∫∫` of `f` over the triangle `abc`.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(
        &self,
        tri: &[Point<f64>; 3],
        f: &mut F,
    ) -> f64 {
        let [a, b, c] = *tri;
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let (fx, fy) = (c.x - a.x, c.y - a.y);
        let jac = (ex * fy - fx * ey).abs();
        let mut acc = 0.0;
        for (&(s, t), w) in self.points.iter().zip(&self.weights) {
            acc += w * f(a.x + s * ex + t * fx, a.y + s * ey + t * fy);
        }
        acc * jac
    }
}

/// Controls for [`adaptive_triangle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSpec {
    pub max_depth: u32,
    pub relative_tolerance: f64,
    /// Changes below this are accepted regardless of the relative test.
    pub absolute_floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOutcome {
    pub value: f64,
    pub converged: bool,
    /// Largest accepted `|children - parent|` on an unconverged leaf, or on
    /// any leaf when everything converged.
    pub worst_change: f64,
    pub evaluations: usize,
}

fn midpoint(p: Point<f64>, q: Point<f64>) -> Point<f64> {
    Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y))
}

fn split(tri: &[Point<f64>; 3]) -> [[Point<f64>; 3]; 4] {
    let [a, b, c] = *tri;
    let (ab, bc, ca) = (midpoint(a, b), midpoint(b, c), midpoint(c, a));
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

/// Integrates `f` over a triangle, splitting into four congruent children
/// until the refined estimate moves by less than the tolerance. A leaf at
/// depth `d` is accepted when its change is within `tol * |leaf|`, within
/// `tol * |root| / 2^d`, or below the absolute floor. The second budget
/// bounds the total error along a kink line, which about `2^d` leaves cross.
pub fn adaptive_triangle<F: FnMut(f64, f64) -> f64>(
    rule: &TriangleRule,
    tri: &[Point<f64>; 3],
    spec: &AdaptiveSpec,
    f: &mut F,
) -> AdaptiveOutcome {
    let mut outcome = AdaptiveOutcome {
        value: 0.0,
        converged: true,
        worst_change: 0.0,
        evaluations: rule.len(),
    };
    let whole = rule.integrate(tri, f);
    let mut sum = CompensatedSum::default();
    let root = whole.abs();
    refine(rule, tri, whole, root, 0, spec, f, &mut sum, &mut outcome);
    outcome.value = sum.total();
    outcome
}

#[allow(clippy::too_many_arguments)]
fn refine<F: FnMut(f64, f64) -> f64>(
    rule: &TriangleRule,
    tri: &[Point<f64>; 3],
    parent: f64,
    root: f64,
    depth: u32,
    spec: &AdaptiveSpec,
    f: &mut F,
    sum: &mut CompensatedSum<f64>,
    outcome: &mut AdaptiveOutcome,
) {
    let children = split(tri);
    let parts: Vec<f64> = children.iter().map(|c| rule.integrate(c, f)).collect();
    outcome.evaluations += 4 * rule.len();
    let refined: f64 = parts.iter().sum();
    let change = (refined - parent).abs();
    let tol = spec.relative_tolerance;
    let accepted = change <= tol * refined.abs()
        || change <= tol * root * 0.5f64.powi(depth as i32)
        || change <= spec.absolute_floor;
    if accepted || depth >= spec.max_depth {
        if !accepted {
            outcome.converged = false;
        }
        if !accepted || outcome.converged {
            outcome.worst_change = outcome.worst_change.max(change);
        }
        for p in parts {
            sum.add(p);
        }
        return;
    }
    for (child, value) in children.iter().zip(parts) {
        refine(rule, child, value, root, depth + 1, spec, f, sum, outcome);
    }
}
