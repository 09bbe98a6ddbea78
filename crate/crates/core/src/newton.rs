//! Taylor supports, Newton polyhedra and (reduced) Newton diagrams, and the
//! vertical distance machinery on them. Everything here is exact rational
//! geometry on exponent pairs.

use crate::expr::Germ;
use crate::puiseux::{ExpPair, PuiseuxPoly};
use crate::rat::{rat_i, ExtRat, Rat};
use num::traits::Zero;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NewtonError {
    #[error("reduced support is empty")]
    EmptyReducedSupport,
    #[error("vertex-tangent distance is unbounded (vertex p exceeds p0 with no left constraint)")]
    UnboundedDistance,
    #[error("truncation order too small: a dropped monomial could reach below the stored diagram")]
    TruncationInsufficient,
}

/// A line `a x + b y = c` with positive rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Line {
    #[serde(serialize_with = "crate::report::ser_rat")]
    pub a: Rat,
    #[serde(serialize_with = "crate::report::ser_rat")]
    pub b: Rat,
    #[serde(serialize_with = "crate::report::ser_rat")]
    pub c: Rat,
}

impl Line {
    /// Line through two diagram vertices with `p_l < p_r`, `q_l > q_r`.
    pub fn through(left: &ExpPair, right: &ExpPair) -> Self {
        let a = rat_i(left.q as i64) - rat_i(right.q as i64);
        let b = &right.p - &left.p;
        let c = &a * &left.p + &b * rat_i(left.q as i64);
        debug_assert!(a > Rat::zero() && b > Rat::zero() && c > Rat::zero());
        Line { a, b, c }
    }

    /// `sigma = a/b`, the decay rate of the line.
    pub fn sigma(&self) -> Rat {
        &self.a / &self.b
    }

    pub fn contains(&self, pt: &ExpPair) -> bool {
        &self.a * &pt.p + &self.b * rat_i(pt.q as i64) == self.c
    }

    /// Signed excess `a p + b q - c`; nonnegative means on or above.
    pub fn excess(&self, pt: &ExpPair) -> Rat {
        &self.a * &pt.p + &self.b * rat_i(pt.q as i64) - &self.c
    }
}

/// A compact edge of the diagram, anchored at its left vertex.
#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub left: ExpPair,
    pub right: ExpPair,
    pub line: Line,
    /// `m = (p_r - p_l) / (q_l - q_r) = b/a > 0`.
    #[serde(serialize_with = "crate::report::ser_rat")]
    pub slope: Rat,
}

/// Vertices and compact edges of a (possibly reduced) Newton diagram.
#[derive(Clone, Debug, Serialize)]
pub struct NewtonDiagram {
    pub vertices: Vec<ExpPair>,
    pub edges: Vec<Edge>,
    pub reduced: bool,
}

pub fn taylor_support(poly: &PuiseuxPoly) -> Vec<ExpPair> {
    poly.support()
}

/// Lower-left convex hull of the union of quadrants `(p,q) + R^2_+`.
pub fn diagram(support: &[ExpPair], reduced: bool) -> Result<NewtonDiagram, NewtonError> {
    let mut pts: Vec<ExpPair> =
        support.iter().filter(|e| !reduced || e.q >= 1).cloned().collect();
    if pts.is_empty() {
        return Err(NewtonError::EmptyReducedSupport);
    }
    pts.sort();

    // Pareto staircase: for each p keep the least q, then drop dominated
    // points (some earlier point has both coordinates <=).
    let mut staircase: Vec<ExpPair> = Vec::new();
    for pt in pts {
        if let Some(last) = staircase.last() {
            if last.p == pt.p {
                continue; // sorted by (p, q): first entry had the least q
            }
            if pt.q >= last.q {
                continue;
            }
        }
        while staircase.last().map_or(false, |l| l.q <= pt.q && l.p >= pt.p) {
            staircase.pop();
        }
        staircase.push(pt);
    }

    // Lower convex hull (monotone chain); collinear interior points are not
    // vertices.
    let mut hull: Vec<ExpPair> = Vec::new();
    for pt in staircase {
        while hull.len() >= 2 {
            let o = &hull[hull.len() - 2];
            let a = &hull[hull.len() - 1];
            let cross = (&a.p - &o.p) * (rat_i(pt.q as i64) - rat_i(o.q as i64))
                - (rat_i(a.q as i64) - rat_i(o.q as i64)) * (&pt.p - &o.p);
            if cross <= Rat::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }

    let edges: Vec<Edge> = hull
        .windows(2)
        .map(|w| {
            let line = Line::through(&w[0], &w[1]);
            let slope = line.sigma();
            let slope = Rat::from_integer(1.into()) / slope; // m = b/a
            Edge { left: w[0].clone(), right: w[1].clone(), line, slope }
        })
        .collect();

    // Hull separation and slope monotonicity.
    debug_assert!(edges.iter().all(|e| {
        support
            .iter()
            .filter(|p| !reduced || p.q >= 1)
            .all(|p| e.line.excess(p) >= Rat::zero())
    }));
    debug_assert!(edges.windows(2).all(|w| w[0].slope < w[1].slope));

    Ok(NewtonDiagram { vertices: hull, edges, reduced })
}

impl NewtonDiagram {
    pub fn is_vertex(&self, pt: &ExpPair) -> bool {
        self.vertices.contains(pt)
    }

    fn vertex_index(&self, pt: &ExpPair) -> Option<usize> {
        self.vertices.iter().position(|v| v == pt)
    }

    /// Open sigma-interval of vertex-tangent lines at a vertex:
    /// `(sigma_min, sigma_max)` with `None` meaning unbounded above.
    pub fn tangent_sigma_range(&self, vertex: &ExpPair) -> Option<(Rat, Option<Rat>)> {
        let i = self.vertex_index(vertex)?;
        let sigma_min = if i + 1 < self.vertices.len() {
            self.edges[i].line.sigma()
        } else {
            Rat::zero()
        };
        let sigma_max = if i > 0 { Some(self.edges[i - 1].line.sigma()) } else { None };
        Some((sigma_min, sigma_max))
    }
}

/// Vertical distance from a line to the axis point `(p, 0)`; zero when the
/// point sits on or to the right of the line's axis intercept, and zero by
/// convention for `p = inf`.
pub fn vertical_distance(line: &Line, p: &ExtRat) -> Rat {
    match p {
        ExtRat::Infinity => Rat::zero(),
        ExtRat::Finite(p) => {
            let ap = &line.a * p;
            if ap >= line.c {
                Rat::zero()
            } else {
                (&line.c - ap) / &line.b
            }
        }
    }
}

/// Smallest pure-`v` exponent of the germ, `inf` if none.
pub fn p0_of(poly: &PuiseuxPoly) -> ExtRat {
    match poly.pure_v_order() {
        Some(p) => ExtRat::finite(p),
        None => ExtRat::Infinity,
    }
}

/// `sup` of the vertical distance to `(p0, 0)` over all tangent lines at one
/// diagram vertex. The sup over the open sigma-interval is the limit value at
/// the favorable endpoint.
pub fn vertex_sup_distance(
    diagram: &NewtonDiagram,
    vertex: &ExpPair,
    p0: &ExtRat,
) -> Result<Rat, NewtonError> {
    let (sigma_min, sigma_max) = diagram
        .tangent_sigma_range(vertex)
        .expect("vertex must belong to the diagram");
    let qv = rat_i(vertex.q as i64);
    let p0 = match p0 {
        ExtRat::Infinity => return Ok(Rat::zero()),
        ExtRat::Finite(p) => p,
    };
    let dp = &vertex.p - p0;
    let value_at = |sigma: &Rat| -> Rat {
        let d = &qv + sigma * &dp;
        if d < Rat::zero() {
            Rat::zero()
        } else {
            d
        }
    };
    if dp.is_zero() {
        return Ok(qv);
    }
    if dp > Rat::zero() {
        // increasing in sigma
        match sigma_max {
            Some(s) => Ok(value_at(&s)),
            None => Err(NewtonError::UnboundedDistance),
        }
    } else {
        // decreasing in sigma; at sigma -> 0+ the limit is q_v
        Ok(value_at(&sigma_min))
    }
}

/// The vertical Newton distance `d(gamma)` of a reduced diagram.
pub fn d_gamma(diagram: &NewtonDiagram, p0: &ExtRat) -> Result<Rat, NewtonError> {
    let mut best = Rat::zero();
    for v in &diagram.vertices {
        let d = vertex_sup_distance(diagram, v, p0)?;
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

/// The truncated distance `d_{>(p,q)}(gamma)`: the same sup restricted to
/// vertices strictly to the right of the anchor, with the empty-set
/// convention (anchor's own `q` when `p0` is finite, else zero).
pub fn d_gt(diagram: &NewtonDiagram, anchor: &ExpPair, p0: &ExtRat) -> Result<Rat, NewtonError> {
    let mut best: Option<Rat> = None;
    for v in &diagram.vertices {
        if v.p <= anchor.p {
            continue;
        }
        let d = vertex_sup_distance(diagram, v, p0)?;
        if best.as_ref().map_or(true, |b| &d > b) {
            best = Some(d);
        }
    }
    match best {
        Some(d) => Ok(d),
        None => Ok(match p0 {
            ExtRat::Finite(_) => rat_i(anchor.q as i64),
            ExtRat::Infinity => Rat::zero(),
        }),
    }
}

/// Dual route for `d(gamma)`: the height at which the vertical line `x = p0`
/// enters the reduced Newton polyhedron. `None` when `p0` is finite but lies
/// strictly left of the diagram (the sup route diverges there too).
pub fn entry_height(diagram: &NewtonDiagram, p0: &ExtRat) -> Option<Rat> {
    let p0 = match p0 {
        ExtRat::Infinity => return Some(Rat::zero()),
        ExtRat::Finite(p) => p,
    };
    let first = diagram.vertices.first()?;
    if p0 < &first.p {
        return None;
    }
    let last = diagram.vertices.last().unwrap();
    if p0 >= &last.p {
        return Some(rat_i(last.q as i64));
    }
    for e in &diagram.edges {
        if &e.left.p <= p0 && p0 < &e.right.p {
            return Some((&e.line.c - &e.line.a * p0) / &e.line.b);
        }
    }
    unreachable!("p0 inside the vertex span must meet an edge")
}

/// Build a diagram from a germ, honoring its trust window: with a finite
/// trust `W`, a dropped monomial lives in `{P+Q > W, Q >= 1}`, and the stored
/// hull is only certain when no such monomial could undercut an edge line.
pub fn diagram_from_germ(germ: &Germ, reduced: bool) -> Result<NewtonDiagram, NewtonError> {
    let d = diagram(&germ.poly.support(), reduced)?;
    if let ExtRat::Finite(w) = &germ.trust {
        for e in &d.edges {
            let corner1 = &e.line.a * (w - rat_i(1)) + &e.line.b;
            let corner2 = &e.line.b * w;
            if corner1.min(corner2) < e.line.c {
                return Err(NewtonError::TruncationInsufficient);
            }
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{expand, parse};
    use crate::rat::rat;

    fn support_of(text: &str) -> Vec<ExpPair> {
        expand(&parse(text).unwrap(), 12).unwrap().poly.support()
    }

    #[test]
    fn support_golden() {
        let s = support_of("(theta - v)^3 * v + v^3");
        let expect = [(1, 3), (2, 2), (3, 1), (4, 0), (3, 0)];
        assert_eq!(s.len(), 5);
        for (p, q) in expect {
            assert!(s.contains(&ExpPair::int(p, q)));
        }
        assert_eq!(support_of("v*theta"), vec![ExpPair::int(1, 1)]);
        let s = support_of("v + v*theta^2");
        assert_eq!(s, vec![ExpPair::int(1, 0), ExpPair::int(1, 2)]);
    }

    #[test]
    fn diagram_golden() {
        // reduced diagram of (theta-v)^3 v + v^3: vertices (1,3),(3,1), one edge
        let d = diagram(&support_of("(theta - v)^3 * v + v^3"), true).unwrap();
        assert_eq!(d.vertices, vec![ExpPair::int(1, 3), ExpPair::int(3, 1)]);
        assert_eq!(d.edges.len(), 1);
        assert_eq!(d.edges[0].slope, rat_i(1));
        assert_eq!(d.edges[0].line, Line { a: rat_i(2), b: rat_i(2), c: rat_i(8) });

        // v(1+theta^2): single reduced vertex (1,2)
        let d = diagram(&support_of("v*(1+theta^2)"), true).unwrap();
        assert_eq!(d.vertices, vec![ExpPair::int(1, 2)]);
        assert!(d.edges.is_empty());

        // theta^2 + v theta^5: (1,5) absorbed by the quadrant of (0,2)
        let d = diagram(&support_of("theta^2 + v*theta^5"), true).unwrap();
        assert_eq!(d.vertices, vec![ExpPair::int(0, 2)]);

        // empty reduced support
        assert!(matches!(
            diagram(&[ExpPair::int(2, 0)], true),
            Err(NewtonError::EmptyReducedSupport)
        ));
    }

    #[test]
    fn p0_examples() {
        let poly = expand(&parse("(theta - v)^3 * v + v^3").unwrap(), 12).unwrap().poly;
        assert_eq!(p0_of(&poly), ExtRat::finite(rat_i(3)));
        let poly = expand(&parse("theta^2 + v*theta^3").unwrap(), 12).unwrap().poly;
        assert_eq!(p0_of(&poly), ExtRat::Infinity);
        let poly = expand(&parse("v*(exp(theta)-1) + v^2").unwrap(), 12).unwrap().poly;
        assert_eq!(p0_of(&poly), ExtRat::finite(rat_i(2)));
    }

    #[test]
    fn vertical_distance_examples() {
        let l = Line { a: rat_i(1), b: rat_i(1), c: rat_i(2) };
        assert_eq!(vertical_distance(&l, &ExtRat::finite(rat_i(3))), rat_i(0));
        let l = Line { a: rat_i(2), b: rat_i(1), c: rat_i(4) };
        assert_eq!(vertical_distance(&l, &ExtRat::finite(rat_i(1))), rat_i(2));
        assert_eq!(vertical_distance(&l, &ExtRat::Infinity), rat_i(0));
    }

    #[test]
    fn vertex_sup_examples() {
        // example 1: vertices (1,3),(3,1); p0 = 3; vertex (3,1) gives 1
        let d = diagram(&support_of("(theta - v)^3 * v + v^3"), true).unwrap();
        let p0 = ExtRat::finite(rat_i(3));
        assert_eq!(vertex_sup_distance(&d, &ExpPair::int(3, 1), &p0).unwrap(), rat_i(1));
        assert_eq!(d_gamma(&d, &p0).unwrap(), rat_i(1));

        // example 2 diagram with p0 = 2: vertex (3,1) gives sup 2 as sigma -> 1-
        let p0 = ExtRat::finite(rat_i(2));
        assert_eq!(vertex_sup_distance(&d, &ExpPair::int(3, 1), &p0).unwrap(), rat_i(2));
        assert_eq!(d_gamma(&d, &p0).unwrap(), rat_i(2));

        // single vertex (1,k): every tangent line gives k
        for k in 2..=6 {
            let d = diagram(&[ExpPair::int(1, 0), ExpPair::int(1, k)], true).unwrap();
            let p0 = ExtRat::finite(rat_i(1));
            assert_eq!(
                vertex_sup_distance(&d, &ExpPair::int(1, k), &p0).unwrap(),
                rat_i(k as i64)
            );
        }
    }

    #[test]
    fn unbounded_distance() {
        // v + v^3 theta: single reduced vertex (3,1) with p0 = 1 < 3
        let d = diagram(&support_of("v + v^3*theta"), true).unwrap();
        let p0 = ExtRat::finite(rat_i(1));
        assert!(matches!(
            vertex_sup_distance(&d, &ExpPair::int(3, 1), &p0),
            Err(NewtonError::UnboundedDistance)
        ));
    }

    #[test]
    fn d_gt_examples() {
        // gamma_* = theta^3 v + v^3: single reduced vertex (1,3), p0 = 3
        let poly = expand(&parse("theta^3*v + v^3").unwrap(), 12).unwrap().poly;
        let d = diagram(&poly.support(), true).unwrap();
        assert_eq!(d_gt(&d, &ExpPair::int(1, 3), &p0_of(&poly)).unwrap(), rat_i(3));

        // second worked germ after one substitution: vertices (1,3),(5,1), p0=2
        let d = diagram(
            &[ExpPair::int(1, 3), ExpPair::int(3, 2), ExpPair::int(5, 1)],
            true,
        )
        .unwrap();
        assert_eq!(d.vertices, vec![ExpPair::int(1, 3), ExpPair::int(5, 1)]);
        assert_eq!(
            d_gt(&d, &ExpPair::int(1, 3), &ExtRat::finite(rat_i(2))).unwrap(),
            rat(5, 2)
        );

        // p0 = inf convention gives 0
        let poly = expand(&parse("theta^2 + v^5*theta").unwrap(), 12).unwrap().poly;
        let d = diagram(&poly.support(), true).unwrap();
        assert_eq!(d_gt(&d, &ExpPair::int(5, 1), &p0_of(&poly)).unwrap(), rat_i(0));
    }

    #[test]
    fn dual_entry_height() {
        let d = diagram(&support_of("(theta - v)^3 * v + v^3"), true).unwrap();
        for p0 in [rat_i(3), rat_i(2), rat(5, 2), rat_i(7)] {
            let p0 = ExtRat::finite(p0);
            assert_eq!(Some(d_gamma(&d, &p0).unwrap()), entry_height(&d, &p0));
        }
        assert_eq!(entry_height(&d, &ExtRat::Infinity), Some(rat_i(0)));
    }

    #[test]
    fn rescale_invariance() {
        let poly = expand(&parse("(theta - v)^3 * v + v^3").unwrap(), 12).unwrap().poly;
        let p0 = p0_of(&poly);
        let d = diagram(&poly.support(), true).unwrap();
        let base = d_gamma(&d, &p0).unwrap();
        for m in 2..=4 {
            let r = poly.rescale_v(m);
            let dr = diagram(&r.support(), true).unwrap();
            assert_eq!(d_gamma(&dr, &p0_of(&r)).unwrap(), base);
        }
    }
}
