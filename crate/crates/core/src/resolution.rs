//! Resolution of singularities for a bivariate analytic germ on the first
//! quadrant: decompose a small quarter-ball into vertex-dominated regions,
//! good edge regions, and translated bad strips on which
//! `|P(v, theta)| ~ v^a |theta - center(v)|^b` with an explicit constant.
//!
//! The construction follows the Newton-diagram shape of `P`: between the
//! dominance cones of consecutive diagram vertices sit strips
//! `theta ~ r v^m` around the positive roots of each edge polynomial; simple
//! roots give comparable strips directly, multiple roots are translated by
//! the Puiseux branch killing `d^(s-1)P/dtheta^(s-1)` and resolved
//! recursively with strictly smaller multiplicity.

use crate::newton::{self, Edge};
use crate::puiseux::{Coefficient, ExpPair, PuiseuxPoly, PuiseuxError};
use crate::rat::{rat_i, rat_to_f64, Rat};
use crate::roots::{coeff_poly_roots, CoeffRoot};
use num::traits::{One, Signed, ToPrimitive};
use rand::Rng;
use rand::SeedableRng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ResolutionError {
    #[error("cannot resolve the zero polynomial")]
    ZeroPolynomial,
    #[error("root branch is not simple; the Puiseux iteration cannot continue")]
    BranchNotSimple,
    #[error("multiplicity bound violated: {0}")]
    MultiplicityBound(String),
    #[error("child strip multiplicity {child} did not decrease below {parent}")]
    MultiplicityNotDecreasing { parent: u32, child: u32 },
    #[error("structural constant exhausted: {0}")]
    StructureFailure(String),
    #[error("truncation order too small: {0}")]
    TruncationInsufficient(String),
    #[error(transparent)]
    Coefficients(#[from] PuiseuxError),
}

// ---------------------------------------------------------------------------
// Newton-Puiseux root branches
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct NewtonPuiseuxRoot {
    /// theta-free Puiseux polynomial `h(v)`.
    pub series: PuiseuxPoly,
    /// The residual vanished identically (an exact algebraic branch).
    pub exact: bool,
}

fn leading_term(theta_free: &PuiseuxPoly) -> Option<(Rat, Coefficient)> {
    theta_free
        .terms()
        .next()
        .map(|(e, c)| (e.p.clone(), c.clone()))
}

/// Solve `Q(v, h(v)) = 0` for the branch with leading term
/// `seed_coeff * v^seed_exp`, iterating the simple-root Newton step until the
/// residual vanishes or the next exponent exceeds `cap`.
pub fn newton_puiseux_root(
    q: &PuiseuxPoly,
    seed_coeff: &Coefficient,
    seed_exp: &Rat,
    cap: &Rat,
) -> Result<NewtonPuiseuxRoot, ResolutionError> {
    if q.is_zero() {
        return Err(ResolutionError::ZeroPolynomial);
    }
    let mut series = PuiseuxPoly::monomial(seed_coeff.clone(), ExpPair::new(seed_exp.clone(), 0));
    let mut last_exp = seed_exp.clone();
    loop {
        let shifted = q.substitute_theta_series(&series)?;
        let residual = shifted.theta_slice(0);
        if residual.is_zero() {
            return Ok(NewtonPuiseuxRoot { series, exact: true });
        }
        let linear = shifted.theta_slice(1);
        if linear.is_zero() {
            return Err(ResolutionError::BranchNotSimple);
        }
        let (ord0, lead0) = leading_term(&residual).unwrap();
        let (ord1, lead1) = leading_term(&linear).unwrap();
        let next_exp = &ord0 - &ord1;
        if next_exp <= last_exp {
            return Err(ResolutionError::BranchNotSimple);
        }
        if &next_exp > cap {
            return Ok(NewtonPuiseuxRoot { series, exact: false });
        }
        let coeff = lead0.div(&lead1)?.neg();
        series.add_term(ExpPair::new(next_exp.clone(), 0), coeff)?;
        last_exp = next_exp;
    }
}

// ---------------------------------------------------------------------------
// Region tree
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegionKind {
    VertexDominant,
    EdgeGood,
    BadTranslated,
}

/// One region of the decomposition. Bounds are kept relative to `center`:
/// the region is `center(v) + [lo_local(v), hi_local(v))`, with `hi_local`
/// absent on the topmost region (clipped by the ball). `eval_poly` is `P`
/// rewritten in local coordinates `theta = center + t`, which keeps the
/// comparability check for thin strips numerically well conditioned.
#[derive(Clone, Debug, Serialize)]
pub struct RegionNode {
    pub kind: RegionKind,
    #[serde(serialize_with = "crate::report::ser_poly")]
    pub center: PuiseuxPoly,
    #[serde(serialize_with = "crate::report::ser_poly")]
    pub lo_local: PuiseuxPoly,
    #[serde(serialize_with = "crate::report::ser_poly_opt")]
    pub hi_local: Option<PuiseuxPoly>,
    #[serde(serialize_with = "crate::report::ser_rat")]
    pub a: Rat,
    #[serde(serialize_with = "crate::report::ser_rat")]
    pub b: Rat,
    /// Comparability constant recorded for this node (leaves only).
    pub comparability_c: f64,
    /// Residual multiplicity of the translated root (bad nodes).
    pub multiplicity: Option<u32>,
    /// Center series was cut at the truncation cap.
    pub center_truncated: bool,
    #[serde(skip)]
    pub eval_poly: PuiseuxPoly,
    pub children: Vec<RegionNode>,
}

impl RegionNode {
    fn leaf(
        kind: RegionKind,
        center: PuiseuxPoly,
        lo_local: PuiseuxPoly,
        hi_local: Option<PuiseuxPoly>,
        a: Rat,
        b: Rat,
        eval_poly: PuiseuxPoly,
    ) -> Self {
        RegionNode {
            kind,
            center,
            lo_local,
            hi_local,
            a,
            b,
            comparability_c: 0.0,
            multiplicity: None,
            center_truncated: false,
            eval_poly,
            children: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Absolute bounds at a numeric `v > 0`.
    pub fn bounds_at(&self, v: f64) -> (f64, Option<f64>) {
        let c = self.center.evaluate_f64(v, 0.0).unwrap_or(f64::NAN);
        let lo = c + self.lo_local.evaluate_f64(v, 0.0).unwrap_or(f64::NAN);
        let hi = self
            .hi_local
            .as_ref()
            .map(|h| c + h.evaluate_f64(v, 0.0).unwrap_or(f64::NAN));
        (lo, hi)
    }

    pub fn contains(&self, v: f64, theta: f64) -> bool {
        let (lo, hi) = self.bounds_at(v);
        theta >= lo && hi.map_or(true, |h| theta < h)
    }

    /// `|P| / (v^a |theta - center|^b)` evaluated in local coordinates.
    pub fn comparability_ratio(&self, v: f64, theta: f64) -> f64 {
        let c = self.center.evaluate_f64(v, 0.0).unwrap_or(f64::NAN);
        let t = theta - c;
        let p = self.eval_poly.evaluate_f64(v, t).unwrap_or(f64::NAN).abs();
        let a = rat_to_f64(&self.a);
        let b = rat_to_f64(&self.b);
        let denom = v.powf(a) * t.abs().powf(b);
        p / denom
    }

    fn shift_center(&mut self, h: &PuiseuxPoly) {
        self.center = self.center.add(h).expect("center shift");
        for child in &mut self.children {
            child.shift_center(h);
        }
    }

    /// Reflect `theta -> -theta` (used for the lower half of a translated
    /// strip); bounds swap and every series flips sign.
    fn mirrored(&self) -> RegionNode {
        let lo_local = match &self.hi_local {
            Some(h) => h.neg(),
            None => unreachable!("mirrored regions are always bounded"),
        };
        let hi_local = Some(self.lo_local.neg());
        RegionNode {
            kind: self.kind,
            center: self.center.neg(),
            lo_local,
            hi_local,
            a: self.a.clone(),
            b: self.b.clone(),
            comparability_c: self.comparability_c,
            multiplicity: self.multiplicity,
            center_truncated: self.center_truncated,
            eval_poly: self.eval_poly.map_theta_negated(),
            children: self.children.iter().rev().map(|c| c.mirrored()).collect(),
        }
    }

    /// In-order leaves, bottom of the quadrant first.
    pub fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a RegionNode>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for c in &self.children {
                c.collect_leaves(out);
            }
        }
    }

    fn leaves_mut<'a>(&'a mut self, out: &mut Vec<&'a mut RegionNode>) {
        if self.children.is_empty() {
            out.push(self);
        } else {
            for c in &mut self.children {
                c.leaves_mut(out);
            }
        }
    }

    fn max_bad_depth(&self) -> u32 {
        let own = u32::from(self.kind == RegionKind::BadTranslated && !self.is_leaf());
        own + self.children.iter().map(|c| c.max_bad_depth()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionTree {
    pub epsilon: f64,
    /// Common denominator of the Puiseux exponents appearing in the tree.
    pub puiseux_denominator: u64,
    /// Structural constant the fence was built with.
    pub c_structural: u64,
    pub roots: Vec<RegionNode>,
}

impl RegionTree {
    pub fn leaves(&self) -> Vec<&RegionNode> {
        let mut out = Vec::new();
        for r in &self.roots {
            r.collect_leaves(&mut out);
        }
        out
    }

    pub fn max_bad_depth(&self) -> u32 {
        self.roots.iter().map(|r| r.max_bad_depth()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct ResolveConfig {
    pub order: u32,
    pub max_multiplicity_rounds: u32,
    pub eps_hint: f64,
    pub c_start: u64,
    pub c_cap: u64,
    pub calibration_samples: usize,
    pub seed: u64,
}

impl Default for ResolveConfig {
    fn default() -> Self {
        ResolveConfig {
            order: 12,
            max_multiplicity_rounds: 8,
            eps_hint: 0.25,
            c_start: 4,
            c_cap: 1 << 16,
            calibration_samples: 500,
            seed: 0,
        }
    }
}

/// Lemma-level data for one edge root: its multiplicity, the degree-drop
/// bound `q_l - q_r`, and the weighted exponent `e - s m` (both must hold).
#[derive(Clone, Debug, Serialize)]
pub struct MultiplicityData {
    pub s: u32,
    pub bound: u32,
    #[serde(serialize_with = "crate::report::ser_rat")]
    pub weighted_exponent: Rat,
}

pub fn multiplicity_data(edge: &Edge, s: u32) -> Result<MultiplicityData, ResolutionError> {
    let bound = edge.left.q - edge.right.q;
    if s > bound {
        return Err(ResolutionError::MultiplicityBound(format!(
            "multiplicity {s} exceeds q-drop {bound}"
        )));
    }
    let e = &edge.left.p + rat_i(edge.left.q as i64) * &edge.slope;
    let weighted = &e - rat_i(s as i64) * &edge.slope;
    if weighted.is_negative() {
        return Err(ResolutionError::MultiplicityBound(format!(
            "weighted exponent e - s m = {weighted} is negative"
        )));
    }
    Ok(MultiplicityData { s, bound, weighted_exponent: weighted })
}

// ---------------------------------------------------------------------------
// Fence construction
// ---------------------------------------------------------------------------

/// Sign of `a - b` for theta-free Puiseux polynomials as `v -> 0+`.
fn compare_near_zero(a: &PuiseuxPoly, b: &PuiseuxPoly) -> i8 {
    let diff = a.sub(b).expect("comparable bounds");
    match leading_term(&diff) {
        None => 0,
        Some((_, c)) => c.sign().unwrap_or(0),
    }
}

struct Builder {
    config: ResolveConfig,
    c_struct: Rat,
}

impl Builder {
    /// Decompose the first quadrant for `p`, bottom-up in `theta`, stopping
    /// at the optional `ceiling` curve. Bounds in the produced nodes are in
    /// the caller's `theta` coordinates (center zero unless translated).
    fn build(
        &self,
        p: &PuiseuxPoly,
        ceiling: Option<&PuiseuxPoly>,
        rounds_left: u32,
        parent_mult: Option<u32>,
    ) -> Result<Vec<RegionNode>, ResolutionError> {
        if p.is_zero() {
            return Err(ResolutionError::ZeroPolynomial);
        }
        let diagram = newton::diagram(&p.support(), false)
            .map_err(|e| ResolutionError::StructureFailure(e.to_string()))?;

        let zero_poly = PuiseuxPoly::zero();
        let mut fence: Vec<RegionNode> = Vec::new();
        let mut floor: PuiseuxPoly = zero_poly.clone();

        // A closure pushing a leaf clipped against the ceiling; returns false
        // once the fence is complete.
        let push = |node: RegionNode, fence: &mut Vec<RegionNode>, floor: &mut PuiseuxPoly| -> bool {
            let mut node = node;
            if let Some(ceil) = ceiling {
                let lo_abs = node.center.add(&node.lo_local).unwrap();
                if compare_near_zero(&lo_abs, ceil) >= 0 {
                    return false;
                }
                let clip = match &node.hi_local {
                    None => true,
                    Some(h) => {
                        let hi_abs = node.center.add(h).unwrap();
                        compare_near_zero(&hi_abs, ceil) > 0
                    }
                };
                if clip {
                    let local_ceil = ceil.sub(&node.center).unwrap();
                    node.hi_local = Some(local_ceil);
                    if !node.children.is_empty() {
                        // Internal node got clipped: clip its child fence too.
                        clip_children(&mut node, ceil);
                    }
                    *floor = ceil.clone();
                    fence.push(node);
                    return false;
                }
            }
            if let Some(h) = &node.hi_local {
                *floor = node.center.add(h).unwrap();
            }
            fence.push(node);
            true
        };

        if diagram.vertices.len() == 1 {
            let vtx = &diagram.vertices[0];
            let node = RegionNode::leaf(
                RegionKind::VertexDominant,
                zero_poly.clone(),
                zero_poly.clone(),
                None,
                vtx.p.clone(),
                rat_i(vtx.q as i64),
                p.clone(),
            );
            push(node, &mut fence, &mut floor);
            return Ok(fence);
        }

        let c_inv = Rat::one() / &self.c_struct;
        let c_sq_inv = &c_inv * &c_inv;

        // Bottom vertex region: [0, C^-1 v^{m_last}).
        let last_edge = diagram.edges.last().unwrap();
        let last_vertex = diagram.vertices.last().unwrap();
        let bottom_hi = PuiseuxPoly::monomial(
            Coefficient::Rat(c_inv.clone()),
            ExpPair::new(last_edge.slope.clone(), 0),
        );
        let node = RegionNode::leaf(
            RegionKind::VertexDominant,
            zero_poly.clone(),
            zero_poly.clone(),
            Some(bottom_hi),
            last_vertex.p.clone(),
            rat_i(last_vertex.q as i64),
            p.clone(),
        );
        if !push(node, &mut fence, &mut floor) {
            return Ok(fence);
        }

        // Edges from the steepest (lowest strip) to the flattest (highest).
        for (idx, edge) in diagram.edges.iter().enumerate().rev() {
            let m = &edge.slope;
            let v_m = |c: Rat| PuiseuxPoly::monomial(Coefficient::Rat(c), ExpPair::new(m.clone(), 0));

            // Positive roots of the edge polynomial P_E(r) = sum c_pq r^q.
            let mut terms: Vec<(u32, Coefficient)> = Vec::new();
            for (e, c) in p.terms() {
                if e.p >= edge.left.p && e.p <= edge.right.p && edge.line.contains(e) {
                    terms.push((e.q, c.clone()));
                }
            }
            terms.sort_by_key(|(k, _)| *k);
            let roots = coeff_poly_roots(&terms, p.coefficient_field())
                .map_err(ResolutionError::StructureFailure)?;
            let pos_roots: Vec<&CoeffRoot> =
                roots.iter().filter(|r| r.approx > 0.0).collect();

            // Structural margin: every positive root comfortably inside
            // (C^-1, C) and pairwise gaps wider than the two strip radii.
            let c_f64 = rat_to_f64(&self.c_struct);
            for r in &pos_roots {
                if r.approx <= 2.0 / c_f64 || r.approx >= c_f64 / 2.0 {
                    return Err(ResolutionError::StructureFailure(format!(
                        "edge root {} outside the structural window",
                        r.approx
                    )));
                }
            }
            for w in pos_roots.windows(2) {
                if w[1].approx - w[0].approx <= 2.0 * rat_to_f64(&c_sq_inv) {
                    return Err(ResolutionError::StructureFailure(
                        "adjacent root strips overlap".into(),
                    ));
                }
            }

            // Weighted degree of the edge.
            let e_weight = &edge.left.p + rat_i(edge.left.q as i64) * m;

            // Walk the strip [C^-1 v^m, C v^m) from below.
            let mut cursor: Rat = c_inv.clone();
            for root in &pos_roots {
                let data = multiplicity_data(edge, root.multiplicity)?;
                if let Some(pm) = parent_mult {
                    if root.multiplicity >= pm {
                        return Err(ResolutionError::MultiplicityNotDecreasing {
                            parent: pm,
                            child: root.multiplicity,
                        });
                    }
                }
                // good gap below the strip
                let strip_lo = root_offset(root, &-c_sq_inv.clone())?;
                let strip_hi = root_offset(root, &c_sq_inv)?;
                let good = RegionNode::leaf(
                    RegionKind::EdgeGood,
                    zero_poly.clone(),
                    v_m(cursor.clone()),
                    Some(strip_lo_poly(&strip_lo, m)?),
                    edge.left.p.clone(),
                    rat_i(edge.left.q as i64),
                    p.clone(),
                );
                if !push(good, &mut fence, &mut floor) {
                    return Ok(fence);
                }

                // the bad strip itself
                let s = data.s;
                let order_cap = rat_i(self.config.order as i64);
                let q_s = p.nth_d_theta(s - 1);
                let branch = newton_puiseux_root(&q_s, &root.value, m, &order_cap)?;
                // Lemma check: computed branch leads with r v^m.
                let (lead_p, lead_c) = leading_term(&branch.series).unwrap();
                if &lead_p != m || !lead_c.equals(&root.value) {
                    return Err(ResolutionError::StructureFailure(
                        "branch leading term disagrees with the edge root".into(),
                    ));
                }
                let a_exp = &data.weighted_exponent;
                let node = if s == 1 {
                    let eval = p.substitute_theta_series(&branch.series)?;
                    let mut leaf = RegionNode::leaf(
                        RegionKind::BadTranslated,
                        branch.series.clone(),
                        strip_side_local(&branch.series, &strip_lo, m)?,
                        Some(strip_side_local(&branch.series, &strip_hi, m)?),
                        a_exp.clone(),
                        Rat::one(),
                        eval,
                    );
                    leaf.multiplicity = Some(1);
                    leaf.center_truncated = !branch.exact;
                    leaf
                } else {
                    if rounds_left == 0 {
                        return Err(ResolutionError::StructureFailure(
                            "multiplicity rounds exhausted".into(),
                        ));
                    }
                    let translated = p.substitute_theta_series(&branch.series)?;
                    // local strip bounds around the translated center
                    let lo1 = strip_side_local(&branch.series, &strip_lo, m)?;
                    let hi1 = strip_side_local(&branch.series, &strip_hi, m)?;
                    // positive side of theta1
                    let upper_children =
                        self.build(&translated, Some(&hi1), rounds_left - 1, Some(s))?;
                    // negative side, mirrored
                    let reflected = translated.map_theta_negated();
                    let neg_ceiling = lo1.neg();
                    let lower_children_raw =
                        self.build(&reflected, Some(&neg_ceiling), rounds_left - 1, Some(s))?;
                    let mut children: Vec<RegionNode> = lower_children_raw
                        .iter()
                        .rev()
                        .map(|c| c.mirrored())
                        .collect();
                    children.extend(upper_children);
                    for child in &mut children {
                        child.shift_center(&branch.series);
                    }
                    let mut node = RegionNode {
                        kind: RegionKind::BadTranslated,
                        center: branch.series.clone(),
                        lo_local: lo1,
                        hi_local: Some(hi1),
                        a: a_exp.clone(),
                        b: rat_i(s as i64),
                        comparability_c: 0.0,
                        multiplicity: Some(s),
                        center_truncated: !branch.exact,
                        eval_poly: translated,
                        children,
                    };
                    debug_assert!(!node.children.is_empty());
                    node.comparability_c = 0.0;
                    node
                };
                if !push(node, &mut fence, &mut floor) {
                    return Ok(fence);
                }
                cursor = strip_hi.clone();
                let _ = &e_weight;
            }

            // remaining good part of the strip up to C v^m
            let good = RegionNode::leaf(
                RegionKind::EdgeGood,
                zero_poly.clone(),
                v_m(cursor.clone()),
                Some(v_m(self.c_struct.clone())),
                edge.left.p.clone(),
                rat_i(edge.left.q as i64),
                p.clone(),
            );
            if !push(good, &mut fence, &mut floor) {
                return Ok(fence);
            }

            // vertex region above this strip: up to C^-1 v^{m_{prev}} for an
            // inner vertex, unbounded for the leftmost vertex.
            let vtx = &edge.left;
            let hi = if idx > 0 {
                let prev = &diagram.edges[idx - 1];
                Some(PuiseuxPoly::monomial(
                    Coefficient::Rat(c_inv.clone()),
                    ExpPair::new(prev.slope.clone(), 0),
                ))
            } else {
                None
            };
            let node = RegionNode::leaf(
                RegionKind::VertexDominant,
                zero_poly.clone(),
                v_m(self.c_struct.clone()),
                hi,
                vtx.p.clone(),
                rat_i(vtx.q as i64),
                p.clone(),
            );
            if !push(node, &mut fence, &mut floor) {
                return Ok(fence);
            }
        }
        Ok(fence)
    }
}

/// `r + delta` as an exact coefficient (delta rational).
fn root_offset(root: &CoeffRoot, delta: &Rat) -> Result<Rat, ResolutionError> {
    // Strip boundaries are rational curves: use a certified enclosure of the
    // root and a rational nudge; exactness of the boundary is not required
    // for comparability, only consistency, so the midpoint rounding is fixed.
    match &root.value {
        Coefficient::Rat(r) => Ok(r + delta),
        other => {
            let width = Rat::new(1.into(), num::BigInt::from(1u128 << 80));
            let iv = other.enclosure(&width);
            Ok(iv.midpoint() + delta)
        }
    }
}

fn strip_lo_poly(bound: &Rat, m: &Rat) -> Result<PuiseuxPoly, ResolutionError> {
    Ok(PuiseuxPoly::monomial(
        Coefficient::Rat(bound.clone()),
        ExpPair::new(m.clone(), 0),
    ))
}

/// Strip boundary `bound * v^m` expressed relative to the center series.
fn strip_side_local(
    center: &PuiseuxPoly,
    bound: &Rat,
    m: &Rat,
) -> Result<PuiseuxPoly, ResolutionError> {
    let abs = PuiseuxPoly::monomial(Coefficient::Rat(bound.clone()), ExpPair::new(m.clone(), 0));
    Ok(abs.sub(center)?)
}

fn clip_children(node: &mut RegionNode, ceil_abs: &PuiseuxPoly) {
    let mut kept = Vec::new();
    for mut child in std::mem::take(&mut node.children) {
        let lo_abs = child.center.add(&child.lo_local).unwrap();
        if compare_near_zero(&lo_abs, ceil_abs) >= 0 {
            continue;
        }
        let clip = match &child.hi_local {
            None => true,
            Some(h) => {
                let hi_abs = child.center.add(h).unwrap();
                compare_near_zero(&hi_abs, ceil_abs) > 0
            }
        };
        if clip {
            child.hi_local = Some(ceil_abs.sub(&child.center).unwrap());
            if !child.children.is_empty() {
                clip_children(&mut child, ceil_abs);
            }
            kept.push(child);
            break;
        }
        kept.push(child);
    }
    node.children = kept;
}

// ---------------------------------------------------------------------------
// resolve + verification
// ---------------------------------------------------------------------------

/// Largest `v` (capped at 1) below which the theta-free Puiseux polynomial is
/// certainly positive: the leading coefficient must be positive, and the tail
/// is dominated once `sum |c_i| v^(m_i - m_0) <= c_0 / 2`.
fn positivity_bound(diff: &PuiseuxPoly) -> f64 {
    let mut terms = diff.terms();
    let Some((lead_e, lead_c)) = terms.next().map(|(e, c)| (e.p.clone(), c.clone())) else {
        return 0.0;
    };
    let c0 = lead_c.to_f64();
    if c0 <= 0.0 {
        return 0.0;
    }
    let mut sum_abs = 0.0f64;
    let mut min_gap = f64::INFINITY;
    for (e, c) in terms {
        sum_abs += c.to_f64().abs();
        min_gap = min_gap.min(rat_to_f64(&(&e.p - &lead_e)));
    }
    if sum_abs == 0.0 {
        return 1.0;
    }
    let base = c0 / (2.0 * sum_abs);
    if base >= 1.0 {
        1.0
    } else {
        base.powf(1.0 / min_gap)
    }
}

/// The fence is a genuine partition only while every leaf keeps
/// `lower < upper`; intersect the per-leaf positivity bounds.
fn structural_epsilon(roots: &[RegionNode]) -> f64 {
    let mut leaves = Vec::new();
    for r in roots {
        r.collect_leaves(&mut leaves);
    }
    let mut eps = 1.0f64;
    for leaf in leaves {
        if let Some(hi) = &leaf.hi_local {
            let diff = hi.sub(&leaf.lo_local).expect("bound difference");
            eps = eps.min(positivity_bound(&diff));
        }
    }
    eps
}

/// Halton low-discrepancy point in `[0,1)^2`.
fn halton(index: usize) -> (f64, f64) {
    fn radical_inverse(mut i: usize, base: usize) -> f64 {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    (radical_inverse(index, 2), radical_inverse(index, 3))
}

pub fn resolve(p: &PuiseuxPoly, config: &ResolveConfig) -> Result<RegionTree, ResolutionError> {
    if p.is_zero() {
        return Err(ResolutionError::ZeroPolynomial);
    }
    let mut last_err: Option<ResolutionError> = None;
    let mut c_struct = config.c_start;
    while c_struct <= config.c_cap.min(64) {
        let builder = Builder {
            config: config.clone(),
            c_struct: rat_i(c_struct as i64),
        };
        match builder.build(p, None, config.max_multiplicity_rounds, None) {
            Ok(roots) => {
                let eps = config.eps_hint.min(0.9 * structural_epsilon(&roots));
                if eps <= 0.0 {
                    return Err(ResolutionError::StructureFailure(
                        "fence ordering failed near the origin".into(),
                    ));
                }
                let mut tree = RegionTree {
                    epsilon: eps,
                    puiseux_denominator: 1,
                    c_structural: c_struct,
                    roots,
                };
                let denom = tree
                    .leaves()
                    .iter()
                    .map(|l| {
                        l.center
                            .common_denominator()
                            .to_u64()
                            .unwrap_or(1)
                            .max(l.lo_local.common_denominator().to_u64().unwrap_or(1))
                    })
                    .max()
                    .unwrap_or(1);
                tree.puiseux_denominator = denom;
                match calibrate(&mut tree, config) {
                    Ok(()) => return Ok(tree),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(ResolutionError::StructureFailure(msg)) => {
                last_err = Some(ResolutionError::StructureFailure(msg));
            }
            Err(e) => return Err(e),
        }
        c_struct *= 2;
    }
    Err(last_err.unwrap_or_else(|| {
        ResolutionError::StructureFailure("no structural constant worked".into())
    }))
}

/// Sample each leaf, record the observed comparability constant (rounded up
/// to a power of two, floor `c_start`), shrinking epsilon if the cap is
/// exceeded. Deterministic for a fixed seed.
fn calibrate(tree: &mut RegionTree, config: &ResolveConfig) -> Result<(), ResolutionError> {
    let cap = config.c_cap as f64;
    let mut eps = tree.epsilon;
    'outer: for _ in 0..6 {
        let mut leaves = Vec::new();
        for r in &mut tree.roots {
            r.leaves_mut(&mut leaves);
        }
        for leaf in leaves {
            let mut worst: f64 = config.c_start as f64;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
            let mut used = 0usize;
            let mut tries = 0usize;
            while used < config.calibration_samples && tries < config.calibration_samples * 20 {
                tries += 1;
                let u: f64 = rng.random();
                let w: f64 = rng.random();
                let v = eps * (0.02 + 0.98 * u);
                let (lo, hi) = leaf.bounds_at(v);
                let hi = match hi {
                    Some(h) => h,
                    None => (eps * eps - v * v).max(0.0).sqrt(),
                };
                if !(hi > lo) {
                    continue;
                }
                // keep away from the exact center and the boundary so the
                // ratio is finite and representative
                let t = lo + (hi - lo) * (0.02 + 0.96 * w);
                if v * v + t * t >= eps * eps {
                    continue;
                }
                let c = leaf.center.evaluate_f64(v, 0.0).unwrap_or(0.0);
                if (t - c).abs() < 1e-12 {
                    continue;
                }
                let ratio = leaf.comparability_ratio(v, t);
                if !ratio.is_finite() || ratio <= 0.0 {
                    continue;
                }
                worst = worst.max(ratio).max(1.0 / ratio);
                used += 1;
            }
            if used == 0 {
                return Err(ResolutionError::StructureFailure(
                    "leaf received no calibration samples".into(),
                ));
            }
            if worst > cap {
                eps *= 0.5;
                if eps < 1e-9 {
                    return Err(ResolutionError::StructureFailure(format!(
                        "comparability constant exceeded the cap ({worst:.3e}) on a {:?} leaf",
                        leaf.kind
                    )));
                }
                continue 'outer;
            }
            let rounded = worst.log2().ceil().exp2().max(config.c_start as f64);
            leaf.comparability_c = rounded;
        }
        tree.epsilon = eps;
        return Ok(());
    }
    Err(ResolutionError::StructureFailure("epsilon selection failed".into()))
}

/// Resolve all four sign-reflected quadrants (`theta -> +-theta`,
/// `v -> +-v`); the input must have integer exponents for the `v`
/// reflections.
pub fn resolve_quadrants(
    p: &PuiseuxPoly,
    config: &ResolveConfig,
) -> Result<Vec<((i8, i8), RegionTree)>, ResolutionError> {
    let reflect_v = |poly: &PuiseuxPoly| -> PuiseuxPoly {
        let mut out = PuiseuxPoly::zero();
        for (e, c) in poly.terms() {
            let odd = e.p.is_integer() && e.p.numer().bit(0);
            let c = if odd { c.neg() } else { c.clone() };
            out.add_term(e.clone(), c).unwrap();
        }
        out
    };
    let mut out = Vec::new();
    for (sv, st) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
        let mut q = p.clone();
        if sv < 0 {
            q = reflect_v(&q);
        }
        if st < 0 {
            q = q.map_theta_negated();
        }
        out.push(((sv, st), resolve(&q, config)?));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct LeafCheck {
    pub kind: RegionKind,
    #[serde(serialize_with = "crate::report::ser_rat")]
    pub a: Rat,
    #[serde(serialize_with = "crate::report::ser_rat")]
    pub b: Rat,
    pub recorded_c: f64,
    pub samples: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub within_c: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub samples: usize,
    pub leaves: usize,
    pub coverage_exact: bool,
    pub multi_hits: usize,
    pub zero_hits: usize,
    pub comparability_ok: bool,
    pub max_depth: u32,
    pub per_leaf: Vec<LeafCheck>,
}

/// Coverage (every sample in exactly one leaf) and per-leaf comparability
/// against the recorded constants.
pub fn verify(tree: &RegionTree, samples: usize, per_leaf_samples: usize, seed: u64) -> VerifyReport {
    let leaves = tree.leaves();
    let eps = tree.epsilon;
    let offset = (seed % 9973) as usize + 1;

    let mut multi_hits = 0usize;
    let mut zero_hits = 0usize;
    let mut used = 0usize;
    let mut idx = offset;
    while used < samples {
        let (u1, u2) = halton(idx);
        idx += 1;
        let r = eps * u1.sqrt();
        let phi = u2 * std::f64::consts::FRAC_PI_2;
        let (v, theta) = (r * phi.cos(), r * phi.sin());
        if v <= 1e-9 {
            continue;
        }
        used += 1;
        let hits = leaves.iter().filter(|l| l.contains(v, theta)).count();
        match hits {
            0 => zero_hits += 1,
            1 => {}
            _ => multi_hits += 1,
        }
    }

    let mut per_leaf = Vec::new();
    let mut comparability_ok = true;
    for leaf in &leaves {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xa11ce);
        let mut max_ratio = f64::MIN;
        let mut min_ratio = f64::MAX;
        let mut got = 0usize;
        let mut tries = 0usize;
        while got < per_leaf_samples && tries < per_leaf_samples * 40 {
            tries += 1;
            let u: f64 = rng.random();
            let w: f64 = rng.random();
            let v = eps * (0.02 + 0.98 * u);
            let (lo, hi) = leaf.bounds_at(v);
            let hi = match hi {
                Some(h) => h,
                None => (eps * eps - v * v).max(0.0).sqrt(),
            };
            if !(hi > lo) {
                continue;
            }
            let t = lo + (hi - lo) * (0.02 + 0.96 * w);
            if v * v + t * t >= eps * eps {
                continue;
            }
            let c = leaf.center.evaluate_f64(v, 0.0).unwrap_or(0.0);
            if (t - c).abs() < 1e-12 {
                continue;
            }
            let ratio = leaf.comparability_ratio(v, t);
            if !ratio.is_finite() || ratio <= 0.0 {
                continue;
            }
            max_ratio = max_ratio.max(ratio);
            min_ratio = min_ratio.min(ratio);
            got += 1;
        }
        let cee = leaf.comparability_c.max(1.0);
        let within = got > 0 && max_ratio <= cee && min_ratio >= 1.0 / cee;
        comparability_ok &= within;
        per_leaf.push(LeafCheck {
            kind: leaf.kind,
            a: leaf.a.clone(),
            b: leaf.b.clone(),
            recorded_c: leaf.comparability_c,
            samples: got,
            max_ratio,
            min_ratio,
            within_c: within,
        });
    }

    VerifyReport {
        samples: used,
        leaves: leaves.len(),
        coverage_exact: multi_hits == 0 && zero_hits == 0,
        multi_hits,
        zero_hits,
        comparability_ok,
        max_depth: tree.max_bad_depth(),
        per_leaf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{expand, parse};

    fn poly(text: &str) -> PuiseuxPoly {
        expand(&parse(text).unwrap(), 14).unwrap().poly
    }

    fn resolve_text(text: &str) -> RegionTree {
        resolve(&poly(text), &ResolveConfig::default()).unwrap()
    }

    #[test]
    fn newton_puiseux_examples() {
        // 2(theta - v): exact branch h = v
        let q = poly("2*theta - 2*v");
        let h = newton_puiseux_root(&q, &Coefficient::one(), &rat_i(1), &rat_i(12)).unwrap();
        assert!(h.exact);
        assert_eq!(h.series.num_terms(), 1);
        assert!(h.series.coeff(&ExpPair::int(1, 0)).equals(&Coefficient::one()));

        // theta^2 - v^3: branch v^{3/2}, exact
        let q = poly("theta^2 - v^3");
        let h = newton_puiseux_root(
            &q,
            &Coefficient::one(),
            &crate::rat::rat(3, 2),
            &rat_i(12),
        )
        .unwrap();
        assert!(h.exact);
        assert_eq!(h.series.num_terms(), 1);

        // theta - v - v^2 theta: h = v + v^3 + v^5 + ... up to the cap
        let q = poly("theta - v - v^2*theta");
        let h = newton_puiseux_root(&q, &Coefficient::one(), &rat_i(1), &rat_i(9)).unwrap();
        assert!(!h.exact);
        for k in [1i64, 3, 5, 7, 9] {
            assert!(
                h.series.coeff(&ExpPair::int(k, 0)).equals(&Coefficient::one()),
                "missing v^{k}"
            );
        }
        assert_eq!(h.series.num_terms(), 5);
    }

    #[test]
    fn monomial_single_region() {
        let tree = resolve_text("v^2*theta^3");
        let leaves = tree.leaves();
        assert_eq!(leaves.len(), 1);
        assert_eq!(leaves[0].kind, RegionKind::VertexDominant);
        assert_eq!(leaves[0].a, rat_i(2));
        assert_eq!(leaves[0].b, rat_i(3));
    }

    #[test]
    fn hyperbola_regions() {
        // theta^2 - v^2: good regions above and below, one simple strip at
        // theta = v.
        let tree = resolve_text("theta^2 - v^2");
        let leaves = tree.leaves();
        let bad: Vec<_> =
            leaves.iter().filter(|l| l.kind == RegionKind::BadTranslated).collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].multiplicity, Some(1));
        assert_eq!(bad[0].a, rat_i(1));
        assert_eq!(bad[0].b, rat_i(1));
        // center is exactly v
        assert!(bad[0].center.coeff(&ExpPair::int(1, 0)).equals(&Coefficient::one()));
        assert_eq!(bad[0].center.num_terms(), 1);
        let verify_report = verify(&tree, 2000, 200, 7);
        assert!(verify_report.coverage_exact);
        assert!(verify_report.comparability_ok);
    }

    #[test]
    fn double_root_translation() {
        // (theta - v)^2 - v^3: one double root at r = 1, translated by v,
        // then the residual theta1^2 - v^3 resolves into strips around
        // +-v^{3/2}.
        let tree = resolve_text("(theta - v)^2 - v^3");
        let internal: Vec<_> = tree
            .roots
            .iter()
            .filter(|n| n.kind == RegionKind::BadTranslated && !n.is_leaf())
            .collect();
        assert_eq!(internal.len(), 1);
        let node = internal[0];
        assert_eq!(node.multiplicity, Some(2));
        assert!(node.center.coeff(&ExpPair::int(1, 0)).equals(&Coefficient::one()));
        // children include strips centered at v +- v^{3/2}
        let mut leaf_nodes = Vec::new();
        node.collect_leaves(&mut leaf_nodes);
        let centers: Vec<f64> = leaf_nodes
            .iter()
            .filter(|l| l.kind == RegionKind::BadTranslated)
            .map(|l| l.center.evaluate_f64(0.01, 0.0).unwrap())
            .collect();
        assert_eq!(centers.len(), 2);
        let expect_lo = 0.01 - 0.001; // v - v^{3/2}
        let expect_hi = 0.01 + 0.001;
        assert!(centers.iter().any(|c| (c - expect_lo).abs() < 1e-9));
        assert!(centers.iter().any(|c| (c - expect_hi).abs() < 1e-9));
        // multiplicity dropped 2 -> 1 and the chain depth obeys S + 1
        assert!(tree.max_bad_depth() <= 2);
    }

    #[test]
    fn multiplicity_data_examples() {
        let d = newton::diagram(&poly("(theta - v)^2").support(), false).unwrap();
        let m = multiplicity_data(&d.edges[0], 2).unwrap();
        assert_eq!(m.bound, 2);

        let d = newton::diagram(&poly("theta^2 - v^2").support(), false).unwrap();
        let m = multiplicity_data(&d.edges[0], 1).unwrap();
        assert_eq!(m.s, 1);
        assert!(multiplicity_data(&d.edges[0], 3).is_err());
    }

    #[test]
    fn suite_coverage_and_comparability() {
        for text in [
            "theta^2 - v^2",
            "(theta - v)^2 - v^3",
            "theta^3 - 3*v^2*theta + 2*v^3",
            "v*theta^3 - v^4",
            "(theta - v)^2*(theta + v) - v^5",
        ] {
            let tree = resolve_text(text);
            let report = verify(&tree, 2000, 200, 42);
            assert!(report.coverage_exact, "{text}: {report:?}");
            assert!(report.comparability_ok, "{text}");
            assert!(tree.leaves().iter().all(|l| l.comparability_c <= 65536.0), "{text}");
        }
    }
}
