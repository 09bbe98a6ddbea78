//! Root dispatch for univariate polynomials assembled from Puiseux
//! coefficients: exact isolation over Q, exact isolation over the single
//! working extension Q(alpha), and a numeric fallback for interval branches.

use crate::algebraic::{real_roots, real_roots_over_field, FieldElem, FieldPoly, FieldRoot,
    NumberField, RootValue, UniPoly};
use crate::puiseux::{approx_precision, Coefficient};
use crate::rat::{Rat, RatInterval};
use num::traits::Zero;
use std::sync::Arc;

/// A located nonzero real root, ready to be used as a substitution value.
pub struct CoeffRoot {
    pub value: Coefficient,
    pub display: String,
    pub approx: f64,
    pub multiplicity: u32,
    /// The root does not live in the ambient exact coefficient world (second
    /// extension or numeric fallback); taking it forces interval arithmetic.
    pub leaves_exact_world: bool,
}

/// Distinct real roots (with multiplicity, ascending) of
/// `sum terms[k].1 * r^terms[k].0`. `ambient_field` is the extension already
/// used by the surrounding computation, if any.
pub fn coeff_poly_roots(
    terms: &[(u32, Coefficient)],
    ambient_field: Option<Arc<NumberField>>,
) -> Result<Vec<CoeffRoot>, String> {
    let deg = terms.iter().map(|(k, _)| *k).max().unwrap_or(0) as usize;
    let all_rational = terms.iter().all(|(_, c)| matches!(c, Coefficient::Rat(_)));
    let any_approx = terms.iter().any(|(_, c)| matches!(c, Coefficient::Approx(_)));

    let mut out = Vec::new();
    if all_rational {
        let mut coeffs = vec![Rat::zero(); deg + 1];
        for (k, c) in terms {
            if let Coefficient::Rat(r) = c {
                coeffs[*k as usize] = r.clone();
            }
        }
        let poly = UniPoly::new(coeffs);
        let roots = real_roots(&poly).map_err(|e| e.to_string())?;
        for (root, mult) in roots {
            if root.is_zero() {
                continue;
            }
            let approx = root.to_f64();
            match root {
                RootValue::Rational(r) => out.push(CoeffRoot {
                    display: crate::rat::rat_string(&r),
                    value: Coefficient::Rat(r),
                    approx,
                    multiplicity: mult,
                    leaves_exact_world: false,
                }),
                RootValue::Algebraic(a) => {
                    if ambient_field.is_some() {
                        // A second independent extension: certified intervals.
                        let mut alg = a.clone();
                        alg.refine_below(&approx_precision());
                        out.push(CoeffRoot {
                            display: format!("alg({approx:.6})"),
                            value: Coefficient::Approx(alg.interval.clone()),
                            approx,
                            multiplicity: mult,
                            leaves_exact_world: true,
                        });
                    } else {
                        let field = NumberField::new(&a);
                        out.push(CoeffRoot {
                            display: format!("alg({approx:.6})"),
                            value: Coefficient::Alg(FieldElem::generator(field)),
                            approx,
                            multiplicity: mult,
                            leaves_exact_world: false,
                        });
                    }
                }
            }
        }
    } else if !any_approx {
        let field = terms
            .iter()
            .find_map(|(_, c)| match c {
                Coefficient::Alg(e) => Some(e.field.clone()),
                _ => None,
            })
            .expect("non-rational exact polynomial has a field");
        let zero = FieldElem::from_rat(field.clone(), Rat::zero());
        let mut coeffs = vec![zero; deg + 1];
        for (k, c) in terms {
            coeffs[*k as usize] = match c {
                Coefficient::Rat(r) => FieldElem::from_rat(field.clone(), r.clone()),
                Coefficient::Alg(e) => {
                    if !Arc::ptr_eq(&e.field, &field) {
                        return Err("mixed extension fields in one polynomial".into());
                    }
                    e.clone()
                }
                Coefficient::Approx(_) => unreachable!(),
            };
        }
        let poly = FieldPoly::new(field, coeffs);
        let roots = real_roots_over_field(&poly).map_err(|e| e.to_string())?;
        for (root, mult) in roots {
            if root.is_zero() {
                continue;
            }
            let approx = root.to_f64();
            match root {
                FieldRoot::Rational(r) => out.push(CoeffRoot {
                    display: crate::rat::rat_string(&r),
                    value: Coefficient::Rat(r),
                    approx,
                    multiplicity: mult,
                    leaves_exact_world: false,
                }),
                FieldRoot::InField(e) => out.push(CoeffRoot {
                    display: format!("alg({approx:.6})"),
                    value: Coefficient::Alg(e),
                    approx,
                    multiplicity: mult,
                    leaves_exact_world: false,
                }),
                FieldRoot::Tower { .. } => {
                    let iv = root.enclosure_below(&approx_precision());
                    out.push(CoeffRoot {
                        display: format!("tower({approx:.6})"),
                        value: Coefficient::Approx(iv),
                        approx,
                        multiplicity: mult,
                        leaves_exact_world: true,
                    });
                }
            }
        }
    } else {
        let mut coeffs = vec![0.0f64; deg + 1];
        for (k, c) in terms {
            coeffs[*k as usize] = c.to_f64();
        }
        for (r, mult) in f64_real_roots(&coeffs) {
            if r.abs() < 1e-9 {
                continue;
            }
            let mid = Rat::from_float(r).unwrap_or_else(Rat::zero);
            let eps = Rat::new(1.into(), num::BigInt::from(1u128 << 90));
            out.push(CoeffRoot {
                display: format!("num({r:.6})"),
                value: Coefficient::Approx(RatInterval::new(&mid - &eps, &mid + &eps)),
                approx: r,
                multiplicity: mult,
                leaves_exact_world: true,
            });
        }
    }
    out.sort_by(|a, b| a.approx.partial_cmp(&b.approx).unwrap());
    Ok(out)
}

/// Real roots of an f64 polynomial by the Weierstrass simultaneous iteration,
/// clustered into multiplicities. Numeric fallback path only.
pub fn f64_real_roots(coeffs: &[f64]) -> Vec<(f64, u32)> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return vec![];
    }
    let lead = coeffs[deg];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |re: f64, im: f64| -> (f64, f64) {
        let mut ar = 0.0;
        let mut ai = 0.0;
        for c in monic.iter().rev() {
            let nr = ar * re - ai * im + c;
            let ni = ar * im + ai * re;
            ar = nr;
            ai = ni;
        }
        (ar, ai)
    };
    let mut zs: Vec<(f64, f64)> = (0..deg)
        .map(|k| {
            let ang = 0.7 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64;
            (0.9 * ang.cos(), 0.9 * ang.sin())
        })
        .collect();
    for _ in 0..300 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (pr, pi) = eval(zs[i].0, zs[i].1);
            let mut dr = 1.0;
            let mut di = 0.0;
            for j in 0..deg {
                if j == i {
                    continue;
                }
                let (er, ei) = (zs[i].0 - zs[j].0, zs[i].1 - zs[j].1);
                let nr = dr * er - di * ei;
                let ni = dr * ei + di * er;
                dr = nr;
                di = ni;
            }
            let denom = dr * dr + di * di;
            if denom < 1e-300 {
                continue;
            }
            let sr = (pr * dr + pi * di) / denom;
            let si = (pi * dr - pr * di) / denom;
            zs[i].0 -= sr;
            zs[i].1 -= si;
            moved = moved.max(sr.hypot(si));
        }
        if moved < 1e-14 {
            break;
        }
    }
    let mut reals: Vec<f64> = zs
        .iter()
        .filter(|(_, im)| im.abs() < 1e-7)
        .map(|(re, _)| *re)
        .collect();
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<(f64, u32)> = Vec::new();
    for r in reals {
        match out.last_mut() {
            Some((prev, m)) if (r - *prev).abs() < 1e-6 * (1.0 + prev.abs()) => {
                *m += 1;
            }
            _ => out.push((r, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_i;

    #[test]
    fn rational_dispatch() {
        // 6(r-1): one root, multiplicity 1
        let terms = vec![(0u32, Coefficient::from_i64(-6)), (1, Coefficient::from_i64(6))];
        let roots = coeff_poly_roots(&terms, None).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].value.equals(&Coefficient::Rat(rat_i(1))));
        assert!(!roots[0].leaves_exact_world);
    }

    #[test]
    fn f64_roots_multiplicity() {
        // (x-1)^2 (x+2) = x^3 - 3x + 2
        let roots = f64_real_roots(&[2.0, -3.0, 0.0, 1.0]);
        assert_eq!(roots.len(), 2);
        assert!((roots[0].0 + 2.0).abs() < 1e-6);
        assert_eq!(roots[0].1, 1);
        assert!((roots[1].0 - 1.0).abs() < 1e-4);
        assert_eq!(roots[1].1, 2);
    }
}
