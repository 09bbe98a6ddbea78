//! Cinematic curvature and the strong-degeneracy classification: an
//! identically flat curvature, a single reduced vertex `(p, 1)` whose column
//! has flat curvature, or a dominant pure-`v` monomial.

use crate::expr::Germ;
use crate::newton::{self, NewtonError};
use crate::puiseux::{Coefficient, ExpPair, PuiseuxPoly};
use crate::rat::{rat_i, ExtRat, Rat};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DegeneracyError {
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error("geometric sequence test requires a single reduced vertex (p, 1)")]
    NotSingleVertexColumn,
}

/// How certain a zero verdict is, given the input's provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Certainty {
    Exact,
    UpToOrder(u32),
}

/// Outcome of the three-way degeneracy test.
#[derive(Clone, Debug, Serialize)]
pub enum Verdict {
    NotStronglyDegenerate,
    /// Case 1: the cinematic curvature vanishes identically.
    FlatCurvature,
    /// Case 2: the reduced diagram is a single vertex `(p, 1)` and the
    /// curvature of its column germ vanishes identically.
    SingleVertexColumn {
        vertex: ExpPair,
        #[serde(serialize_with = "crate::report::ser_poly")]
        column_germ: PuiseuxPoly,
    },
    /// Case 3: `gamma = c v^p + O(v^{p+1})` with every other monomial above.
    PureVDominant {
        #[serde(serialize_with = "crate::report::ser_rat")]
        p: Rat,
    },
}

impl Verdict {
    pub fn case_number(&self) -> Option<u8> {
        match self {
            Verdict::NotStronglyDegenerate => None,
            Verdict::FlatCurvature => Some(1),
            Verdict::SingleVertexColumn { .. } => Some(2),
            Verdict::PureVDominant { .. } => Some(3),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.case_number().is_some()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub certification: Certainty,
}

/// The cinematic curvature determinant
/// `gamma_tt * gamma_vtt - gamma_ttt * gamma_vt`, with trust tracking.
pub fn cinematic_curvature(germ: &Germ) -> Germ {
    let g_tt = germ.nth_d_theta(2);
    let g_ttt = germ.nth_d_theta(3);
    let g_vt = germ.d_v().d_theta();
    let g_vtt = germ.d_v().nth_d_theta(2);
    g_tt.mul(&g_vtt).unwrap().sub(&g_ttt.mul(&g_vt).unwrap()).unwrap()
}

/// Is the germ identically zero on its stored (trusted) coefficients?
pub fn is_identically_zero(germ: &Germ) -> (bool, Certainty) {
    let zero = germ.poly.is_zero();
    let certainty = certainty_of(germ);
    (zero, certainty)
}

fn certainty_of(germ: &Germ) -> Certainty {
    match &germ.exactness {
        crate::expr::Exactness::Exact => Certainty::Exact,
        crate::expr::Exactness::TruncatedAtOrder(t) => Certainty::UpToOrder(*t),
    }
}

/// Classify a normalized germ against the three strong-degeneracy cases.
/// Checks the pure-`v` dominance first (it is decidable from the support
/// alone), then flat curvature, then the single-vertex column case.
pub fn classify(germ: &Germ) -> Result<Classification, DegeneracyError> {
    let certification = certainty_of(germ);
    let reduced = newton::diagram_from_germ(germ, true)?;
    let p0 = newton::p0_of(&germ.poly);

    // Case 3: every theta-carrying monomial sits strictly above v^{p0}.
    if let ExtRat::Finite(p0v) = &p0 {
        let min_reduced_p = &reduced.vertices.first().unwrap().p;
        if p0v < min_reduced_p {
            return Ok(Classification {
                verdict: Verdict::PureVDominant { p: p0v.clone() },
                certification,
            });
        }
    }

    // Case 1: flat cinematic curvature.
    let cine = cinematic_curvature(germ);
    if cine.poly.is_zero() {
        return Ok(Classification { verdict: Verdict::FlatCurvature, certification });
    }

    // Case 2: single reduced vertex (p, 1) whose column germ is flat.
    if reduced.vertices.len() == 1 {
        let v = &reduced.vertices[0];
        if v.q == 1 && v.p >= rat_i(1) {
            let column = column_germ(germ, &v.p);
            let cine_col = cinematic_curvature(&column);
            if cine_col.poly.is_zero() {
                return Ok(Classification {
                    verdict: Verdict::SingleVertexColumn {
                        vertex: v.clone(),
                        column_germ: column.poly,
                    },
                    certification,
                });
            }
        }
    }

    Ok(Classification { verdict: Verdict::NotStronglyDegenerate, certification })
}

/// The column germ `sum_{q >= 1} c_{p*,q} v^{p*} theta^q`.
fn column_germ(germ: &Germ, p_star: &Rat) -> Germ {
    let mut poly = PuiseuxPoly::zero();
    for (q, c) in germ.poly.column(p_star) {
        if q >= 1 {
            poly.add_term(ExpPair::new(p_star.clone(), q), c).unwrap();
        }
    }
    Germ { poly, exactness: germ.exactness.clone(), trust: germ.trust.clone() }
}

/// For a germ whose reduced diagram is the single vertex `(p*, 1)`: is the
/// normalized coefficient sequence `a_k := k! c_{p*,k}` geometric
/// (`a_k a_{k+2} = a_{k+1}^2` with `a_1 != 0`)? Equivalently, the column is
/// `c v^a theta` or `c v^a (e^{c' theta} - 1)` up to truncation.
pub fn geometric_sequence_test(germ: &Germ) -> Result<bool, DegeneracyError> {
    let reduced = newton::diagram_from_germ(germ, true)?;
    if reduced.vertices.len() != 1 || reduced.vertices[0].q != 1 {
        return Err(DegeneracyError::NotSingleVertexColumn);
    }
    let p_star = reduced.vertices[0].p.clone();
    let column = germ.poly.column(&p_star);
    let max_q = column.keys().copied().filter(|q| *q >= 1).max().unwrap_or(0);
    // For an exact germ, coefficients past max_q are known to vanish and the
    // boundary conditions apply; for a truncated germ only fully stored
    // triples are decidable.
    let pad = if germ.is_exact() { 2 } else { 0 };
    let top = max_q + pad;
    let mut a: Vec<Coefficient> = Vec::with_capacity(top as usize + 1);
    let mut factorial = Rat::from_integer(1.into());
    a.push(Coefficient::zero()); // a_0 unused
    for k in 1..=top {
        factorial = factorial * rat_i(k as i64);
        let c = column.get(&k).cloned().unwrap_or_else(Coefficient::zero);
        a.push(c.scale(&factorial));
    }
    if max_q == 0 || a[1].is_zero() {
        return Ok(false);
    }
    for k in 1..=top.saturating_sub(2) {
        let lhs = a[k as usize].mul(&a[k as usize + 2]).map_err(|_| {
            DegeneracyError::NotSingleVertexColumn
        })?;
        let rhs = a[k as usize + 1].mul(&a[k as usize + 1]).unwrap();
        if !lhs.equals(&rhs) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{expand, germ_from_text, parse};

    fn germ(text: &str) -> Germ {
        germ_from_text(text, 12).unwrap()
    }

    #[test]
    fn curvature_examples() {
        assert!(cinematic_curvature(&germ("v*theta")).poly.is_zero());

        // cine(v + v theta^2) = 4v
        let c = cinematic_curvature(&germ("v + v*theta^2"));
        assert_eq!(c.poly.num_terms(), 1);
        assert!(c.poly.coeff(&ExpPair::int(1, 0)).equals(&Coefficient::from_i64(4)));

        // cine(theta^2 + v theta^3) = 12 theta + 18 v theta^2
        let c = cinematic_curvature(&germ("theta^2 + v*theta^3"));
        assert_eq!(c.poly.num_terms(), 2);
        assert!(c.poly.coeff(&ExpPair::int(0, 1)).equals(&Coefficient::from_i64(12)));
        assert!(c.poly.coeff(&ExpPair::int(1, 2)).equals(&Coefficient::from_i64(18)));
    }

    #[test]
    fn classify_cases() {
        assert_eq!(classify(&germ("v*theta")).unwrap().verdict.case_number(), Some(1));
        assert_eq!(
            classify(&germ("v*(exp(theta)-1)")).unwrap().verdict.case_number(),
            Some(1)
        );
        assert_eq!(
            classify(&germ("v*theta + v^2*theta^2")).unwrap().verdict.case_number(),
            Some(2)
        );
        assert_eq!(
            classify(&germ("v*(exp(theta)-1) + v^2*theta")).unwrap().verdict.case_number(),
            Some(2)
        );
        assert_eq!(classify(&germ("v + v^3*theta")).unwrap().verdict.case_number(), Some(3));
        assert!(matches!(
            classify(&germ("v*(1+theta^2)")).unwrap().verdict,
            Verdict::NotStronglyDegenerate
        ));
        assert!(matches!(
            classify(&germ("theta^2 + v*theta^3")).unwrap().verdict,
            Verdict::NotStronglyDegenerate
        ));
    }

    #[test]
    fn certification_flags() {
        let c = classify(&germ("v*theta")).unwrap();
        assert_eq!(c.certification, Certainty::Exact);
        let c = classify(&germ("v*(exp(theta)-1)")).unwrap();
        assert_eq!(c.certification, Certainty::UpToOrder(12));
    }

    #[test]
    fn classify_scale_invariant() {
        for text in ["v*theta + v^2*theta^2", "v + v^3*theta", "v*(1+theta^2)"] {
            let g = germ(text);
            let scaled = Germ {
                poly: g.poly.scale(&crate::rat::rat(7, 3)),
                exactness: g.exactness.clone(),
                trust: g.trust.clone(),
            };
            assert_eq!(
                classify(&g).unwrap().verdict.case_number(),
                classify(&scaled).unwrap().verdict.case_number()
            );
        }
    }

    #[test]
    fn geometric_sequence_examples() {
        assert!(geometric_sequence_test(&germ("v*(exp(theta)-1)")).unwrap());
        assert!(geometric_sequence_test(&germ("v*theta")).unwrap());
        assert!(!geometric_sequence_test(&germ("v*theta + v*theta^3")).unwrap());
        assert!(geometric_sequence_test(&germ("v*(1+theta^2)")).is_err());
    }

    #[test]
    fn geometric_matches_flat_column_curvature() {
        // Two independent characterizations of case 2 agree.
        for text in [
            "v*theta",
            "v*(exp(theta)-1)",
            "v*theta + v*theta^3",
            "v*theta + v*theta^2",
            "v^2*theta + v^2*theta^2 + v^2*theta^3",
        ] {
            let g = germ(text);
            let reduced = newton::diagram_from_germ(&g, true).unwrap();
            if reduced.vertices.len() != 1 || reduced.vertices[0].q != 1 {
                continue;
            }
            let p_star = reduced.vertices[0].p.clone();
            let col = column_germ(&g, &p_star);
            let flat = cinematic_curvature(&col).poly.is_zero();
            assert_eq!(geometric_sequence_test(&g).unwrap(), flat, "{text}");
        }
    }

    #[test]
    fn curvature_matches_finite_differences() {
        // Exact rational central differences against the symbolic determinant.
        use crate::rat::{rat, Rat};
        let texts = ["v + v*theta^2", "theta^2 + v*theta^3", "(theta - v)^3 * v + v^3"];
        let h = rat(1, 1 << 20);
        for text in texts {
            let g = expand(&parse(text).unwrap(), 12).unwrap();
            let cine = cinematic_curvature(&g);
            let f = |v: &Rat, t: &Rat| g.poly.evaluate_exact(v, t).unwrap();
            let mut seed = 0x9e37u64;
            for _ in 0..20 {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let v = rat(1 + (seed >> 33) as i64 % 50, 1000); // in (0, 0.05]
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let t = rat(1 + (seed >> 33) as i64 % 50, 1000);
                let d_tt = |v: &Rat, t: &Rat| {
                    (f(v, &(t + &h)) - f(v, t).clone() * rat_i(2) + f(v, &(t - &h)))
                        / (&h * &h)
                };
                let d_ttt = |v: &Rat, t: &Rat| {
                    (d_tt(v, &(t + &h)) - d_tt(v, &(t - &h))) / (&h * rat_i(2))
                };
                let d_vt = |v: &Rat, t: &Rat| {
                    (f(&(v + &h), &(t + &h)) - f(&(v + &h), &(t - &h))
                        - f(&(v - &h), &(t + &h))
                        + f(&(v - &h), &(t - &h)))
                        / (&h * &h * rat_i(4))
                };
                let d_vtt = |v: &Rat, t: &Rat| {
                    (d_tt(&(v + &h), t) - d_tt(&(v - &h), t)) / (&h * rat_i(2))
                };
                let approx = d_tt(&v, &t) * d_vtt(&v, &t) - d_ttt(&v, &t) * d_vt(&v, &t);
                let exact = cine.poly.evaluate_exact(&v, &t).unwrap();
                let approx = crate::rat::rat_to_f64(&approx);
                let exact = crate::rat::rat_to_f64(&exact);
                let denom = exact.abs().max(1e-6);
                assert!(
                    ((approx - exact) / denom).abs() < 1e-4,
                    "{text} at ({v},{t}): fd {approx} vs exact {exact}"
                );
            }
        }
    }
}
