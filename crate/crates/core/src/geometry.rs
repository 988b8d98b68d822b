//! Feasible regions of the violation criteria in decimal-part space.
//!
//! For three uniform quotas `(q1, q2, M - q1 - q2)` with `q1, q2` in the
//! quota simplex `S = {(x, y) | 0 <= x, y < M - x - y}`, fix the floors
//! `j = ⌊q1⌋`, `k = ⌊q2⌋` and write `q1 = j + d1`, `q2 = k + d2`. The set of
//! decimal parts `(d1, d2)` that produce a lower quota violation is a
//! triangle bounded by two lines derived from the criteria and the
//! antidiagonal `d1 + d2 = 1`. With `m = M - j - k` and
//! `R(f) = sqrt((m - 1)(m - 2) / (f (f + 1)))`:
//!
//! * line 1: `y = (-1 - R(j)) x + m - j R(j)`, or `x = 0` when `j = 0`;
//! * line 2: `y = (m - k R(k) - x) / (1 + R(k))`, or `y = 0` when `k = 0`;
//! * line 3: `y = 1 - x`.
//!
//! The region lies above lines 1 and 2 and below line 3. Regions with
//! `m < 3` are empty: the largest state would need at least two seats.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{CompensatedSum, Real};
use crate::scalar::rational_sqrt;

/// Floors `(j, k)` of the two smaller quotas for a house of `seats` seats.
/// Valid pairs are exactly those whose unit cell meets `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FloorPair {
    pub j: u64,
    pub k: u64,
    pub seats: u64,
}

impl FloorPair {
    pub fn new(j: u64, k: u64, seats: u64) -> Result<Self> {
        let (j2, k2, m) = (u128::from(j), u128::from(k), u128::from(seats));
        if 2 * j2 + k2 < m && j2 + 2 * k2 < m {
            Ok(Self { j, k, seats })
        } else {
            Err(Error::FloorPairOutsideSimplex { j, k, seats })
        }
    }

    /// `M - j - k`, the floor of the largest quota plus one on a violation.
    pub fn residual(&self) -> u64 {
        self.seats - self.j - self.k
    }

    /// All valid pairs for `seats`, `j` outer and `k` inner.
    pub fn all(seats: u64) -> impl Iterator<Item = FloorPair> {
        (0..seats).flat_map(move |j| {
            (0..seats)
                .map_while(move |k| FloorPair::new(j, k, seats).ok())
        })
    }

    /// Whether the pair also satisfies the tighter `j + k < M - j - k`.
    pub fn in_sum_domain(&self) -> bool {
        2 * (u128::from(self.j) + u128::from(self.k)) < u128::from(self.seats)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<R> {
    pub x: R,
    pub y: R,
}

impl<R: Real> Point<R> {
    pub fn new(x: R, y: R) -> Self {
        Self { x, y }
    }

    pub fn to_f64(self) -> Point<f64> {
        Point::new(self.x.to_f64(), self.y.to_f64())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryLine<R> {
    SlopeIntercept { slope: R, intercept: R },
    /// `x = 0`
    AxisX0,
    /// `y = 0`
    AxisY0,
    /// `y = 1 - x`
    Antidiagonal,
}

impl<R: Real> BoundaryLine<R> {
    /// Coefficients `(a, b, c)` of `a x + b y = c`.
    pub fn coefficients(&self) -> (R, R, R) {
        let (zero, one) = (R::zero(), R::one());
        match *self {
            BoundaryLine::SlopeIntercept { slope, intercept } => (-slope, one, intercept),
            BoundaryLine::AxisX0 => (one, zero, zero),
            BoundaryLine::AxisY0 => (zero, one, zero),
            BoundaryLine::Antidiagonal => (one, one, one),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BoundaryLine::SlopeIntercept { .. } => "slope_intercept",
            BoundaryLine::AxisX0 => "axis_x0",
            BoundaryLine::AxisY0 => "axis_y0",
            BoundaryLine::Antidiagonal => "antidiagonal",
        }
    }
}

/// `sqrt((m - 1)(m - 2) / (f (f + 1)))` for `f > 0`.
fn radical<R: Real>(m: u64, f: u64) -> R {
    let num = R::from_u64((m - 1) * (m - 2));
    let den = R::from_u64(f * (f + 1));
    (num / den).sqrt()
}

/// The three boundary lines of the feasible region, or `None` when
/// `M - j - k < 3` and the region is empty by construction.
pub fn boundary_lines<R: Real>(fp: &FloorPair) -> Option<[BoundaryLine<R>; 3]> {
    let m = fp.residual();
    if m < 3 {
        return None;
    }
    let mr = R::from_u64(m);
    let line1 = if fp.j == 0 {
        BoundaryLine::AxisX0
    } else {
        let r = radical::<R>(m, fp.j);
        BoundaryLine::SlopeIntercept {
            slope: -R::one() - r,
            intercept: mr - R::from_u64(fp.j) * r,
        }
    };
    let line2 = if fp.k == 0 {
        BoundaryLine::AxisY0
    } else {
        let r = radical::<R>(m, fp.k);
        let denom = R::one() + r;
        BoundaryLine::SlopeIntercept {
            slope: -R::one() / denom,
            intercept: (mr - R::from_u64(fp.k) * r) / denom,
        }
    };
    Some([line1, line2, BoundaryLine::Antidiagonal])
}

pub fn intersect<R: Real>(a: &BoundaryLine<R>, b: &BoundaryLine<R>) -> Result<Point<R>> {
    let (a1, b1, c1) = a.coefficients();
    let (a2, b2, c2) = b.coefficients();
    let det = a1 * b2 - a2 * b1;
    if det == R::zero() {
        return Err(Error::ParallelLines);
    }
    Ok(Point::new((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det))
}

/// Half the determinant of `[[x1, y1, 1], [x2, y2, 1], [x3, y3, 1]]`.
pub fn signed_area<R: Real>(v: &[Point<R>; 3]) -> R {
    let [p1, p2, p3] = *v;
    ((p2.x - p1.x) * (p3.y - p1.y) - (p3.x - p1.x) * (p2.y - p1.y)) / R::from_f64(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleTriangle<R> {
    /// The two antidiagonal vertices (larger `x` first) and the crossing of
    /// lines 1 and 2. `None` when the region is empty by construction.
    pub vertices: Option<[Point<R>; 3]>,
    pub area: R,
    pub empty: bool,
}

pub fn triangle<R: Real>(fp: &FloorPair) -> Result<FeasibleTriangle<R>> {
    let Some([line1, line2, line3]) = boundary_lines::<R>(fp) else {
        return Ok(FeasibleTriangle {
            vertices: None,
            area: R::zero(),
            empty: true,
        });
    };
    let a = intersect(&line1, &line3)?;
    let b = intersect(&line2, &line3)?;
    let (v1, v2) = if a.x >= b.x { (a, b) } else { (b, a) };
    let v3 = intersect(&line1, &line2)?;
    let vertices = [v1, v2, v3];
    let area = signed_area(&vertices).max(R::zero());
    let empty = !(area > R::zero());
    if !empty {
        let lo = R::from_f64(-1e-9);
        let hi = R::from_f64(1.0 + 1e-9);
        debug_assert!(
            vertices
                .iter()
                .all(|p| p.x >= lo && p.x <= hi && p.y >= lo && p.y <= hi),
            "nonempty feasible triangle leaves the unit cell: {fp:?} {vertices:?}"
        );
    }
    Ok(FeasibleTriangle {
        vertices: Some(vertices),
        area,
        empty,
    })
}

/// Clips a convex polygon to the half-plane `a x + b y <= c`.
pub fn clip_half_plane<R: Real>(poly: &[Point<R>], a: R, b: R, c: R) -> Vec<Point<R>> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for (i, &p) in poly.iter().enumerate() {
        let q = poly[(i + 1) % poly.len()];
        let fp = a * p.x + b * p.y - c;
        let fq = a * q.x + b * q.y - c;
        let zero = R::zero();
        if fp <= zero {
            out.push(p);
        }
        if (fp < zero && fq > zero) || (fp > zero && fq < zero) {
            let t = fp / (fp - fq);
            out.push(Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)));
        }
    }
    out
}

/// Shoelace area of a simple polygon.
pub fn polygon_area<R: Real>(poly: &[Point<R>]) -> R {
    if poly.len() < 3 {
        return R::zero();
    }
    let mut acc = CompensatedSum::default();
    for (i, p) in poly.iter().enumerate() {
        let q = poly[(i + 1) % poly.len()];
        acc.add(p.x * q.y - q.x * p.y);
    }
    (acc.total() / R::from_f64(2.0)).abs()
}

/// The unit cell of `fp` clipped to `S`, in coordinates local to the cell.
pub fn cell_polygon<R: Real>(fp: &FloorPair) -> Vec<Point<R>> {
    let (zero, one) = (R::zero(), R::one());
    let square = [
        Point::new(zero, zero),
        Point::new(one, zero),
        Point::new(one, one),
        Point::new(zero, one),
    ];
    let (j, k, m) = (fp.j as i64, fp.k as i64, fp.seats as i64);
    let two = R::from_f64(2.0);
    // 2x + y < M and x + 2y < M, shifted by (j, k)
    let c1 = R::from_f64((m - 2 * j - k) as f64);
    let c2 = R::from_f64((m - j - 2 * k) as f64);
    let poly = clip_half_plane(&square, two, one, c1);
    clip_half_plane(&poly, one, two, c2)
}

/// Area of `([j, j+1) × [k, k+1)) ∩ S`.
pub fn cell_overlap_area<R: Real>(fp: &FloorPair) -> R {
    polygon_area(&cell_polygon::<R>(fp))
}

/// Probability of a violation given the floors, for uniform quotas.
pub fn conditional_violation_probability<R: Real>(fp: &FloorPair) -> Result<R> {
    let cell = cell_overlap_area::<R>(fp);
    if !(cell > R::zero()) {
        return Err(Error::FloorPairOutsideSimplex {
            j: fp.j,
            k: fp.k,
            seats: fp.seats,
        });
    }
    Ok(triangle::<R>(fp)?.area / cell)
}

/// Feasible-triangle areas of every floor pair with a nonempty region.
pub fn feasible_cells<R: Real>(seats: u64) -> Result<Vec<(FloorPair, FeasibleTriangle<R>)>> {
    let mut cells = Vec::new();
    for fp in FloorPair::all(seats) {
        let tri = triangle::<R>(&fp)?;
        if !tri.empty {
            cells.push((fp, tri));
        }
    }
    Ok(cells)
}

fn check_three_state_seats(seats: u64) -> Result<()> {
    if seats < 3 {
        Err(Error::TooFewSeats { seats, states: 3 })
    } else {
        Ok(())
    }
}

/// Violation probability when `(q1, q2)` is uniform on `S`:
/// `6 / M² · Σ Area(Δ(j, k))`.
pub fn exact_uniform_probability<R: Real>(seats: u64) -> Result<R> {
    check_three_state_seats(seats)?;
    let mut total = CompensatedSum::default();
    for fp in FloorPair::all(seats) {
        total.add(triangle::<R>(&fp)?.area);
    }
    let m = R::from_u64(seats);
    Ok(R::from_f64(6.0) * total.total() / (m * m))
}

type RationalLine = (BigRational, BigRational, BigRational);

fn rational_lines(fp: &FloorPair) -> Result<Option<[RationalLine; 3]>> {
    let m = fp.residual();
    if m < 3 {
        return Ok(None);
    }
    let int = |v: u64| BigRational::from_integer(BigInt::from(v));
    let radical = |f: u64| {
        rational_sqrt(&BigRational::new(
            BigInt::from((m - 1) * (m - 2)),
            BigInt::from(f * (f + 1)),
        ))
        .ok_or(Error::NotRational {
            j: fp.j,
            k: fp.k,
            seats: fp.seats,
        })
    };
    let (zero, one) = (BigRational::zero(), BigRational::one());
    let line1 = if fp.j == 0 {
        (one.clone(), zero.clone(), zero.clone())
    } else {
        let r = radical(fp.j)?;
        // y = (-1 - r) x + m - j r  =>  (1 + r) x + y = m - j r
        (&one + &r, one.clone(), int(m) - int(fp.j) * &r)
    };
    let line2 = if fp.k == 0 {
        (zero.clone(), one.clone(), zero.clone())
    } else {
        let r = radical(fp.k)?;
        // (1 + r) y = m - k r - x  =>  x + (1 + r) y = m - k r
        (one.clone(), &one + &r, int(m) - int(fp.k) * &r)
    };
    Ok(Some([line1, line2, (one.clone(), one.clone(), one)]))
}

fn rational_intersect(l1: &RationalLine, l2: &RationalLine) -> Result<(BigRational, BigRational)> {
    let det = &l1.0 * &l2.1 - &l2.0 * &l1.1;
    if det.is_zero() {
        return Err(Error::ParallelLines);
    }
    Ok((
        (&l1.2 * &l2.1 - &l2.2 * &l1.1) / &det,
        (&l1.0 * &l2.2 - &l2.0 * &l1.2) / &det,
    ))
}

/// Exact area of `Δ(j, k)` when every boundary line has rational coefficients.
pub fn triangle_area_rational(fp: &FloorPair) -> Result<BigRational> {
    let Some([l1, l2, l3]) = rational_lines(fp)? else {
        return Ok(BigRational::zero());
    };
    let a = rational_intersect(&l1, &l3)?;
    let b = rational_intersect(&l2, &l3)?;
    let (p1, p2) = if a.0 >= b.0 { (a, b) } else { (b, a) };
    let p3 = rational_intersect(&l1, &l2)?;
    let det = (&p2.0 - &p1.0) * (&p3.1 - &p1.1) - (&p3.0 - &p1.0) * (&p2.1 - &p1.1);
    let area = det / BigRational::from_integer(BigInt::from(2));
    Ok(if area.is_positive() {
        area
    } else {
        BigRational::zero()
    })
}

/// [`exact_uniform_probability`] in exact rational arithmetic. Fails with
/// [`Error::NotRational`] when some contributing boundary is irrational.
pub fn exact_uniform_probability_rational(seats: u64) -> Result<BigRational> {
    check_three_state_seats(seats)?;
    let mut total = BigRational::zero();
    for fp in FloorPair::all(seats) {
        total += triangle_area_rational(&fp)?;
    }
    let m = BigInt::from(seats);
    Ok(total * BigRational::new(BigInt::from(6), &m * &m))
}

/// Sampled boundary data of one feasible region, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionData {
    pub seats: u64,
    pub floor1: u64,
    pub floor2: u64,
    pub lines: Vec<Polyline>,
    /// Triangle vertices, empty when the region is empty.
    pub vertices: Vec<Point<f64>>,
    pub area: f64,
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub id: String,
    pub kind: String,
    pub points: Vec<Point<f64>>,
}

/// The part of a line inside the unit square, as a parameter range in `x`
/// (or `y` for vertical lines).
fn unit_square_span(line: &BoundaryLine<f64>) -> Option<(Point<f64>, Point<f64>)> {
    match *line {
        BoundaryLine::AxisX0 => Some((Point::new(0.0, 0.0), Point::new(0.0, 1.0))),
        BoundaryLine::AxisY0 => Some((Point::new(0.0, 0.0), Point::new(1.0, 0.0))),
        BoundaryLine::Antidiagonal => Some((Point::new(0.0, 1.0), Point::new(1.0, 0.0))),
        BoundaryLine::SlopeIntercept { slope, intercept } => {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            if slope == 0.0 {
                if !(0.0..=1.0).contains(&intercept) {
                    return None;
                }
            } else {
                let x_at_0 = -intercept / slope;
                let x_at_1 = (1.0 - intercept) / slope;
                lo = lo.max(x_at_0.min(x_at_1));
                hi = hi.min(x_at_0.max(x_at_1));
            }
            if lo > hi {
                return None;
            }
            let y = |x: f64| slope * x + intercept;
            Some((Point::new(lo, y(lo)), Point::new(hi, y(hi))))
        }
    }
}

/// Samples each boundary line inside the unit cell at `resolution` points
/// and collects the triangle vertices.
pub fn region_points(fp: &FloorPair, resolution: usize) -> Result<RegionData> {
    let resolution = resolution.max(2);
    let tri = triangle::<f64>(fp)?;
    let mut lines = Vec::new();
    if let Some(boundary) = boundary_lines::<f64>(fp) {
        for (i, line) in boundary.iter().enumerate() {
            let points = match unit_square_span(line) {
                Some((a, b)) => (0..resolution)
                    .map(|s| {
                        let t = s as f64 / (resolution - 1) as f64;
                        Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
                    })
                    .collect(),
                None => Vec::new(),
            };
            lines.push(Polyline {
                id: format!("line{}", i + 1),
                kind: line.kind().to_string(),
                points,
            });
        }
    }
    let vertices = match (tri.empty, tri.vertices) {
        (false, Some(v)) => v.to_vec(),
        _ => Vec::new(),
    };
    Ok(RegionData {
        seats: fp.seats,
        floor1: fp.j,
        floor2: fp.k,
        lines,
        vertices,
        area: tri.area,
        empty: tri.empty,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::DoubleDouble;

    fn fp(j: u64, k: u64, m: u64) -> FloorPair {
        FloorPair::new(j, k, m).unwrap()
    }

    #[test]
    fn floor_pair_domain() {
        assert!(FloorPair::new(0, 0, 3).is_ok());
        assert!(FloorPair::new(1, 0, 3).is_ok());
        assert!(FloorPair::new(1, 1, 3).is_err());
        assert!(FloorPair::new(2, 1, 6).is_ok());
        assert!(!fp(2, 1, 6).in_sum_domain());
        assert_eq!(FloorPair::all(3).count(), 3);
    }

    #[test]
    fn degenerate_lines_for_three_seats() {
        let lines = boundary_lines::<f64>(&fp(0, 0, 3)).unwrap();
        assert_eq!(
            lines,
            [
                BoundaryLine::AxisX0,
                BoundaryLine::AxisY0,
                BoundaryLine::Antidiagonal
            ]
        );
        assert!(boundary_lines::<f64>(&fp(1, 0, 3)).is_none());
    }

    #[test]
    fn slope_of_first_line() {
        let lines = boundary_lines::<f64>(&fp(1, 2, 100)).unwrap();
        let BoundaryLine::SlopeIntercept { slope, .. } = lines[0] else {
            panic!("expected a sloped line");
        };
        // m = 97, so the radicand is 96 * 95 / 2
        let expected = -1.0 - (96.0f64 * 95.0 / 2.0).sqrt();
        assert!((slope - expected).abs() < 1e-12);
        assert!((slope + 68.5286).abs() < 1e-3);
    }

    #[test]
    fn unit_right_triangle_for_three_seats() {
        let tri = triangle::<f64>(&fp(0, 0, 3)).unwrap();
        let v = tri.vertices.unwrap();
        assert_eq!(v[0], Point::new(1.0, 0.0));
        assert_eq!(v[1], Point::new(0.0, 1.0));
        assert_eq!(v[2], Point::new(0.0, 0.0));
        assert_eq!(tri.area, 0.5);
        assert!(!tri.empty);
    }

    #[test]
    fn published_empty_and_nonempty_regions() {
        let empty = triangle::<f64>(&fp(20, 27, 100)).unwrap();
        assert!(empty.empty);
        assert_eq!(empty.area, 0.0);
        assert!(signed_area(&empty.vertices.unwrap()) <= 0.0);
        let full = triangle::<f64>(&fp(1, 2, 100)).unwrap();
        assert!(!full.empty);
        assert!(full.area > 0.0);
    }

    #[test]
    fn cell_areas() {
        assert_eq!(cell_overlap_area::<f64>(&fp(0, 0, 3)), 1.0);
        assert_eq!(cell_overlap_area::<f64>(&fp(0, 0, 100)), 1.0);
        // corner cell cut by 2x + y < 3: x in [1, 1.5)
        let a = cell_overlap_area::<f64>(&fp(1, 0, 3));
        assert!((a - 0.25).abs() < 1e-15, "{a}");
        for m in [3u64, 4, 7, 10, 50] {
            let total: f64 = FloorPair::all(m).map(|p| cell_overlap_area::<f64>(&p)).sum();
            let expected = (m * m) as f64 / 6.0;
            assert!((total - expected).abs() < 1e-9 * expected, "{m}: {total}");
        }
    }

    #[test]
    fn conditional_probabilities() {
        assert_eq!(conditional_violation_probability::<f64>(&fp(0, 0, 3)).unwrap(), 0.5);
        assert_eq!(conditional_violation_probability::<f64>(&fp(20, 27, 100)).unwrap(), 0.0);
        assert_eq!(conditional_violation_probability::<f64>(&fp(1, 0, 3)).unwrap(), 0.0);
    }

    #[test]
    fn three_seat_probability_is_a_third() {
        let p = exact_uniform_probability::<f64>(3).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
        let exact = exact_uniform_probability_rational(3).unwrap();
        assert_eq!(exact, BigRational::new(BigInt::from(1), BigInt::from(3)));
        assert!(exact_uniform_probability::<f64>(2).is_err());
    }

    #[test]
    fn rational_mode_matches_floats_when_boundaries_are_rational() {
        let exact = exact_uniform_probability_rational(4).unwrap();
        let float = exact_uniform_probability::<f64>(4).unwrap();
        let exact_f = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        assert!((exact_f - float).abs() < 1e-14, "{exact} vs {float}");
        assert!(matches!(
            exact_uniform_probability_rational(5),
            Err(Error::NotRational { .. })
        ));
    }

    #[test]
    fn published_uniform_table() {
        for (m, expected) in [
            (5u64, 0.13092),
            (10, 0.04904),
            (16, 0.02691),
            (20, 0.02047),
            (100, 0.00328),
        ] {
            let p = exact_uniform_probability::<f64>(m).unwrap();
            assert!((p - expected).abs() < 5e-6, "{m}: {p}");
        }
    }

    #[test]
    fn double_double_agrees_with_f64() {
        for m in [5u64, 10, 100] {
            let a = exact_uniform_probability::<f64>(m).unwrap();
            let b = exact_uniform_probability::<DoubleDouble>(m).unwrap().to_f64();
            assert!((a - b).abs() < 1e-12, "{m}: {a} {b}");
        }
    }

    #[test]
    fn extra_cells_outside_sum_domain_are_empty() {
        for m in 3..60 {
            for p in FloorPair::all(m).filter(|p| !p.in_sum_domain()) {
                assert!(triangle::<f64>(&p).unwrap().empty, "{p:?}");
            }
        }
    }

    #[test]
    fn region_export_shapes() {
        let data = region_points(&fp(1, 2, 100), 100).unwrap();
        assert_eq!(data.lines.len(), 3);
        assert_eq!(data.vertices.len(), 3);
        assert!(!data.empty);
        assert!(data.lines.iter().all(|l| l.points.len() == 100 || l.points.is_empty()));

        let data = region_points(&fp(20, 27, 100), 50).unwrap();
        assert_eq!(data.lines.len(), 3);
        assert!(data.vertices.is_empty());
        assert!(data.empty);

        let data = region_points(&fp(0, 0, 3), 10).unwrap();
        let kinds: Vec<&str> = data.lines.iter().map(|l| l.kind.as_str()).collect();
        assert_eq!(kinds, vec!["axis_x0", "axis_y0", "antidiagonal"]);
    }
}
