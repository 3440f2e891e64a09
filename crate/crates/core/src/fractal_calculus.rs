//! Mass function, staircase function, F^α integral and derivative, and the
//! conjugacy between functions on the curve and functions of the mass
//! coordinate `s = S(u) = J(θ)`.
//!
//! Masses are evaluated on construction-aligned partitions. For the
//! quaternary parametrisation of [`FractalCurve`] every deepest-level segment
//! carries mass `S(1) / 4^depth`, so the staircase is `u * S(1)` on aligned
//! parameters. Inside a deepest segment the chord to the partial point is used,
//! which makes the staircase `(i + r^α) / 4^depth * S(1)` with `r` the
//! fractional position in segment `i`.
//!
//! The unit curve is continued to the infinite curve `C(-∞, ∞)` by its own
//! self-similarity: the first quarter of the curve is the whole curve shrunk
//! by the contraction ratio, so `w(4u) = w(u) / r` and `S(4u) = 4 S(u)`.
//! Negative masses are the point reflection `w(-u) = -w(u)`.

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::koch_curve::{FractalCurve, PlanePoint};
use crate::numeric::pairwise_sum;

/// Relative slack when testing whether a mass lies inside `[0, S(1)]`.
const MASS_SLACK: f64 = 1e-12;

/// `1 / Γ(α + 1)`, the normalisation of the mass function.
pub fn gamma_norm(alpha: f64) -> f64 {
    1.0 / gamma(alpha + 1.0)
}

/// `S(1)`, the mass of the unit curve.
pub fn total_mass(curve: &FractalCurve) -> f64 {
    gamma_norm(curve.alpha())
}

/// A point θ of the (possibly extended) curve together with its parameter
/// and its mass coordinate `J(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub u: f64,
    pub position: PlanePoint,
    pub mass: f64,
}

impl CurvePoint {
    /// Euclidean distance `L(θ) = |w(u)|` from the start point.
    pub fn distance(&self) -> f64 {
        self.position.norm()
    }
}

/// Mass function γ^α(F, a, b) on the construction-aligned partition of
/// `[a, b]` at depth `subdiv_depth`; `a` and `b` are always partition points.
pub fn mass_function(curve: &FractalCurve, a: f64, b: f64, subdiv_depth: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return domain(format!(
            "mass function interval [{a}, {b}] not inside [0, 1]"
        ));
    }
    if a > b {
        return domain(format!("mass function needs a <= b, got a = {a}, b = {b}"));
    }
    if subdiv_depth > curve.depth() {
        return Err(Error::Capacity(format!(
            "subdivision depth {subdiv_depth} exceeds curve depth {}",
            curve.depth()
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let cells = (1u64 << (2 * subdiv_depth)) as f64;
    let first = (a * cells).floor() as u64 + 1;
    let last = (b * cells).ceil() as u64;
    let mut nodes = Vec::with_capacity((last.saturating_sub(first) + 2) as usize);
    nodes.push(a);
    nodes.extend((first..last).map(|i| i as f64 / cells));
    nodes.push(b);

    let alpha = curve.alpha();
    let points: Vec<PlanePoint> = nodes.iter().map(|&t| curve.descend(t)).collect();
    let chords: Vec<f64> = points
        .windows(2)
        .map(|w| w[0].distance_to(&w[1]).powf(alpha))
        .collect();
    Ok(pairwise_sum(&chords) * gamma_norm(alpha))
}

/// Staircase `S(u) = γ^α(F, 0, u)` on the unit curve (anchor `p₀ = 0`).
pub fn staircase(curve: &FractalCurve, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return domain(format!("staircase parameter u = {u} outside [0, 1]"));
    }
    Ok(unit_staircase(curve, u))
}

/// `J⁻¹`: the parameter whose staircase value is `s`, for `s` in `[0, S(1)]`.
pub fn inverse_staircase(curve: &FractalCurve, s: f64) -> Result<f64> {
    let total = total_mass(curve);
    if !(s >= -MASS_SLACK * total && s <= total * (1.0 + MASS_SLACK)) {
        return domain(format!("mass s = {s} outside [0, S(1) = {total}]"));
    }
    Ok(unit_inverse(curve, s.clamp(0.0, total)))
}

fn unit_staircase(curve: &FractalCurve, u: f64) -> f64 {
    let cells = curve.segment_count() as f64;
    let scaled = u * cells;
    let cell = scaled.floor().min(cells - 1.0);
    let frac = scaled - cell;
    let partial = if frac == 0.0 {
        0.0
    } else {
        frac.powf(curve.alpha())
    };
    (cell + partial) / cells * total_mass(curve)
}

fn unit_inverse(curve: &FractalCurve, s: f64) -> f64 {
    let cells = curve.segment_count() as f64;
    let mut scaled = s / total_mass(curve) * cells;
    // Snap masses that are aligned up to rounding: r^(1/α) would amplify the
    // rounding near the start of a segment.
    let nearest = scaled.round();
    if (scaled - nearest).abs() <= 8.0 * f64::EPSILON * nearest.max(1.0) {
        scaled = nearest;
    }
    let cell = scaled.floor().clamp(0.0, cells - 1.0);
    let frac = (scaled - cell).clamp(0.0, 1.0);
    let partial = if frac == 0.0 {
        0.0
    } else {
        frac.powf(1.0 / curve.alpha())
    };
    ((cell + partial) / cells).min(1.0)
}

/// Number of self-similar blow-ups needed so that `|s| / 4^n <= S(1)`.
fn blowup_level(magnitude: f64, unit: f64) -> i32 {
    let mut level = 0;
    let mut reach = unit;
    while magnitude > reach * (1.0 + MASS_SLACK) {
        level += 1;
        reach *= 4.0;
    }
    level
}

/// θ with `J(θ) = s` on the infinite curve; any finite `s` is accepted.
pub fn point_at_mass(curve: &FractalCurve, s: f64) -> CurvePoint {
    let total = total_mass(curve);
    let level = blowup_level(s.abs(), total);
    let base_mass = (s.abs() / 4f64.powi(level)).min(total);
    let base_u = unit_inverse(curve, base_mass);
    let sign = if s < 0.0 { -1.0 } else { 1.0 };
    let position = curve
        .descend(base_u)
        .scaled(sign * curve.contraction().powi(-level));
    CurvePoint {
        u: sign * base_u * 4f64.powi(level),
        position,
        mass: s,
    }
}

/// θ at an extended parameter `u` (any finite real) on the infinite curve.
pub fn point_at_parameter(curve: &FractalCurve, u: f64) -> Result<CurvePoint> {
    if !u.is_finite() {
        return domain(format!("curve parameter u = {u} is not finite"));
    }
    let level = blowup_level(u.abs(), 1.0);
    let base_u = (u.abs() / 4f64.powi(level)).min(1.0);
    let sign = if u < 0.0 { -1.0 } else { 1.0 };
    Ok(CurvePoint {
        u,
        position: curve
            .descend(base_u)
            .scaled(sign * curve.contraction().powi(-level)),
        mass: sign * unit_staircase(curve, base_u) * 4f64.powi(level),
    })
}

/// `S(u)` on the infinite curve.
pub fn extended_staircase(curve: &FractalCurve, u: f64) -> Result<f64> {
    Ok(point_at_parameter(curve, u)?.mass)
}

/// Tabulated staircase on the aligned grid `u_i = i / 4^grid_depth`, bound to
/// a covered mass range for conjugacy lookups.
#[derive(Debug, Clone)]
pub struct StaircaseTable {
    curve: FractalCurve,
    grid_depth: u32,
    u_grid: Vec<f64>,
    s_values: Vec<f64>,
    gamma_alpha_norm: f64,
    mass_range: (f64, f64),
}

impl StaircaseTable {
    pub fn new(curve: &FractalCurve, grid_depth: u32) -> Result<Self> {
        if grid_depth > curve.depth() {
            return Err(Error::Capacity(format!(
                "staircase grid depth {grid_depth} exceeds curve depth {}",
                curve.depth()
            )));
        }
        let cells = 1u64 << (2 * grid_depth);
        let u_grid: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
        let s_values = u_grid.iter().map(|&u| unit_staircase(curve, u)).collect();
        Ok(Self {
            curve: *curve,
            grid_depth,
            u_grid,
            s_values,
            gamma_alpha_norm: gamma_norm(curve.alpha()),
            mass_range: (0.0, total_mass(curve)),
        })
    }

    /// Widen (or narrow) the mass range served by conjugacy lookups, e.g. to
    /// cover part of the infinite curve.
    pub fn with_mass_range(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return domain(format!("invalid mass range [{lo}, {hi}]"));
        }
        self.mass_range = (lo, hi);
        Ok(self)
    }

    pub fn curve(&self) -> &FractalCurve {
        &self.curve
    }

    pub fn grid_depth(&self) -> u32 {
        self.grid_depth
    }

    pub fn u_grid(&self) -> &[f64] {
        &self.u_grid
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s_values
    }

    pub fn gamma_alpha_norm(&self) -> f64 {
        self.gamma_alpha_norm
    }

    pub fn total_mass(&self) -> f64 {
        self.gamma_alpha_norm
    }

    /// Mass of one grid cell, `S(1) / 4^grid_depth`.
    pub fn cell_mass(&self) -> f64 {
        self.total_mass() / (self.u_grid.len() - 1) as f64
    }

    pub fn mass_range(&self) -> (f64, f64) {
        self.mass_range
    }

    pub fn covers(&self, s: f64) -> bool {
        let (lo, hi) = self.mass_range;
        let slack = MASS_SLACK * (hi - lo).abs().max(1.0);
        s >= lo - slack && s <= hi + slack
    }

    /// θ with `J(θ) = s`, restricted to the covered range.
    pub fn point_at_mass(&self, s: f64) -> Result<CurvePoint> {
        if !self.covers(s) {
            let (lo, hi) = self.mass_range;
            return domain(format!("mass s = {s} outside covered range [{lo}, {hi}]"));
        }
        Ok(point_at_mass(&self.curve, s))
    }

    /// θ at the `i`-th grid parameter, with the tabulated mass.
    pub fn grid_point(&self, i: usize) -> CurvePoint {
        let u = self.u_grid[i];
        CurvePoint {
            u,
            position: self.curve.descend(u),
            mass: self.s_values[i],
        }
    }
}

/// Riemann–Stieltjes samples of an F^α integral: integrand values at panel
/// midpoints and the mass increments `S(u_{i+1}) - S(u_i)` of each panel.
#[derive(Debug, Clone)]
pub struct StieltjesSamples {
    pub midpoints: Vec<CurvePoint>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl StieltjesSamples {
    pub fn integral(&self) -> f64 {
        let terms: Vec<f64> = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(f, w)| f * w)
            .collect();
        pairwise_sum(&terms)
    }
}

/// Samples `f` for an F^α integral over the mass interval `[s_lo, s_hi]` of
/// the infinite curve. The partition is `u_i = J⁻¹(s_lo + i h)` and the
/// integrand is read at `J⁻¹` of each panel's mass midpoint.
pub fn falpha_samples<F>(
    f: F,
    curve: &FractalCurve,
    s_lo: f64,
    s_hi: f64,
    n_panels: usize,
) -> Result<StieltjesSamples>
where
    F: Fn(&CurvePoint) -> f64 + Sync,
{
    if !(s_lo <= s_hi) || !s_lo.is_finite() || !s_hi.is_finite() {
        return domain(format!(
            "F^α integral needs finite lo <= hi, got [{s_lo}, {s_hi}]"
        ));
    }
    if n_panels == 0 {
        return domain("F^α integral needs at least one panel");
    }
    let h = (s_hi - s_lo) / n_panels as f64;
    let edge_u = |i: usize| point_at_mass(curve, s_lo + h * i as f64).u;
    let rows: Vec<(CurvePoint, f64, f64)> = (0..n_panels)
        .into_par_iter()
        .map(|i| {
            let mid = point_at_mass(curve, s_lo + h * (i as f64 + 0.5));
            let lower = point_at_parameter(curve, edge_u(i)).map(|p| p.mass);
            let upper = point_at_parameter(curve, edge_u(i + 1)).map(|p| p.mass);
            let weight = match (lower, upper) {
                (Ok(a), Ok(b)) => b - a,
                _ => f64::NAN,
            };
            (mid, f(&mid), weight)
        })
        .collect();
    let mut samples = StieltjesSamples {
        midpoints: Vec::with_capacity(n_panels),
        values: Vec::with_capacity(n_panels),
        weights: Vec::with_capacity(n_panels),
    };
    for (mid, value, weight) in rows {
        if !value.is_finite() {
            return Err(Error::NonFinite { u: mid.u, value });
        }
        samples.midpoints.push(mid);
        samples.values.push(value);
        samples.weights.push(weight);
    }
    Ok(samples)
}

/// F^α integral over the mass interval `[s_lo, s_hi]`.
pub fn falpha_integral_mass<F>(
    f: F,
    curve: &FractalCurve,
    s_lo: f64,
    s_hi: f64,
    n_panels: usize,
) -> Result<f64>
where
    F: Fn(&CurvePoint) -> f64 + Sync,
{
    Ok(falpha_samples(f, curve, s_lo, s_hi, n_panels)?.integral())
}

/// `∫_{C(a,b)} f(θ) d_F^α θ` by the midpoint Riemann–Stieltjes sum with
/// `n_panels` equal-mass panels. `a` and `b` are parameters of the infinite
/// curve (the unit curve is `[0, 1]`).
pub fn falpha_integral<F>(
    f: F,
    curve: &FractalCurve,
    a: f64,
    b: f64,
    n_panels: usize,
) -> Result<f64>
where
    F: Fn(&CurvePoint) -> f64 + Sync,
{
    if a > b {
        return domain(format!("F^α integral needs a <= b, got a = {a}, b = {b}"));
    }
    let s_lo = extended_staircase(curve, a)?;
    let s_hi = extended_staircase(curve, b)?;
    falpha_integral_mass(f, curve, s_lo, s_hi, n_panels)
}

/// Central F^α difference quotient `[f(θ(s+h)) - f(θ(s-h))] / 2h` at `s = S(u)`.
pub fn falpha_derivative<F>(f: F, curve: &FractalCurve, u: f64, h_mass: f64) -> Result<f64>
where
    F: Fn(&CurvePoint) -> f64,
{
    let total = total_mass(curve);
    if !(h_mass > 0.0 && h_mass <= total / 4.0) {
        return domain(format!("mass step {h_mass} outside (0, S(1)/4]"));
    }
    let s = staircase(curve, u)?;
    if s - h_mass < 0.0 || s + h_mass > total {
        return domain(format!(
            "derivative stencil [{}, {}] leaves [0, S(1)]",
            s - h_mass,
            s + h_mass
        ));
    }
    let forward = point_at_mass(curve, s + h_mass);
    let backward = point_at_mass(curve, s - h_mass);
    let value = (f(&forward) - f(&backward)) / (2.0 * h_mass);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { u, value })
    }
}

/// `φ[f]`: a function of the mass coordinate bound to a staircase table.
pub struct ConjugateFunction<'t> {
    table: &'t StaircaseTable,
    g: Box<dyn Fn(f64) -> f64 + Send + Sync + 't>,
}

impl<'t> ConjugateFunction<'t> {
    /// Wrap a function that is already expressed in the mass coordinate.
    pub fn from_mass_fn<G>(table: &'t StaircaseTable, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 't,
    {
        Self {
            table,
            g: Box::new(g),
        }
    }

    pub fn table(&self) -> &'t StaircaseTable {
        self.table
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if !self.table.covers(s) {
            let (lo, hi) = self.table.mass_range();
            return domain(format!(
                "conjugate evaluated at s = {s} outside [{lo}, {hi}]"
            ));
        }
        Ok((self.g)(s))
    }
}

/// `lift(f)(S(u)) = f(w(u))`.
pub fn lift<'t, F>(f: F, table: &'t StaircaseTable) -> ConjugateFunction<'t>
where
    F: Fn(&CurvePoint) -> f64 + Send + Sync + 't,
{
    let curve = *table.curve();
    ConjugateFunction::from_mass_fn(table, move |s| f(&point_at_mass(&curve, s)))
}

/// `lower(g)(θ) = g(J(θ))`.
pub fn lower<'a>(g: &'a ConjugateFunction<'_>) -> impl Fn(&CurvePoint) -> Result<f64> + 'a {
    move |theta| g.eval(theta.mass)
}

/// Ordinary midpoint rule for `∫ g(s) ds` over `[lo, hi]`, the mass-axis
/// counterpart of [`falpha_integral_mass`].
pub fn midpoint_integral<G>(g: G, lo: f64, hi: f64, n_panels: usize) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if n_panels == 0 {
        return domain("midpoint rule needs at least one panel");
    }
    let h = (hi - lo) / n_panels as f64;
    let terms: Vec<f64> = (0..n_panels)
        .map(|i| g(lo + h * (i as f64 + 0.5)) * h)
        .collect();
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::koch_curve::build_curve;

    const S1: f64 = 0.876_603_109_987_812_2;

    #[test]
    fn total_mass_reference_value() {
        let c = build_curve(4).unwrap();
        assert!((total_mass(&c) - S1).abs() < 1e-14);
    }

    #[test]
    fn explicit_chord_sums_are_depth_independent() {
        // oracle: 4^m chords of length 3^-m, each raised to α
        let c = build_curve(6).unwrap();
        for m in 1..=4u32 {
            let n = 4f64.powi(m as i32);
            let chord = 3f64.powi(-(m as i32)).powf(c.alpha());
            let oracle = n * chord * gamma_norm(c.alpha());
            let got = mass_function(&c, 0.0, 1.0, m).unwrap();
            assert!((got - oracle).abs() < 1e-13, "depth {m}");
            assert!((got - S1).abs() < 1e-12, "depth {m}");
        }
    }

    #[test]
    fn mass_function_errors_and_degenerate_cases() {
        let c = build_curve(3).unwrap();
        assert_eq!(mass_function(&c, 0.3, 0.3, 3).unwrap(), 0.0);
        assert!(matches!(
            mass_function(&c, 0.6, 0.2, 2),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            mass_function(&c, 0.0, 1.0, 4),
            Err(Error::Capacity(_))
        ));
        let line = FractalCurve::straight_line(0).unwrap();
        assert!((mass_function(&line, 0.0, 1.0, 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn staircase_values() {
        let c = build_curve(5).unwrap();
        assert_eq!(staircase(&c, 0.0).unwrap(), 0.0);
        assert!((staircase(&c, 1.0).unwrap() - S1).abs() < 1e-14);
        assert!((staircase(&c, 0.25).unwrap() - S1 / 4.0).abs() < 1e-15);
        assert!(staircase(&c, 1.01).is_err());
    }

    #[test]
    fn staircase_matches_full_depth_mass_function_off_grid() {
        let c = build_curve(4).unwrap();
        for u in [0.013, 0.2718, 0.5001, 0.77, 0.999] {
            let direct = mass_function(&c, 0.0, u, c.depth()).unwrap();
            assert!(
                (staircase(&c, u).unwrap() - direct).abs() < 1e-12,
                "u = {u}"
            );
        }
    }

    #[test]
    fn inverse_staircase_values() {
        let c = build_curve(6).unwrap();
        assert_eq!(inverse_staircase(&c, 0.0).unwrap(), 0.0);
        assert!((inverse_staircase(&c, S1).unwrap() - 1.0).abs() < 1e-14);
        assert!((inverse_staircase(&c, S1 / 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(inverse_staircase(&c, -0.1).is_err());
        assert!(inverse_staircase(&c, 1.0).is_err());
    }

    #[test]
    fn falpha_integral_examples() {
        let c = build_curve(6).unwrap();
        let one = falpha_integral(|_| 1.0, &c, 0.0, 1.0, 1000).unwrap();
        assert!((one - S1).abs() < 1e-13);
        let half = falpha_integral(|_| 1.0, &c, 0.0, 0.5, 1000).unwrap();
        assert!((half - S1 / 2.0).abs() < 1e-13);
        let linear = falpha_integral(|p| p.mass, &c, 0.0, 1.0, 1000).unwrap();
        assert!((linear - S1 * S1 / 2.0).abs() < 1e-13);
    }

    #[test]
    fn falpha_integral_reports_non_finite_samples() {
        let c = build_curve(3).unwrap();
        let err = falpha_integral(
            |p| if p.mass > S1 / 2.0 { f64::NAN } else { 1.0 },
            &c,
            0.0,
            1.0,
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }), "{err:?}");
        assert!(falpha_integral(|_| 1.0, &c, 0.5, 0.2, 4).is_err());
        assert!(falpha_integral(|_| 1.0, &c, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn derivative_examples() {
        let c = build_curve(6).unwrap();
        let h = 1e-3;
        for u in [0.2, 0.5, 0.731] {
            let d_id = falpha_derivative(|p| p.mass, &c, u, h).unwrap();
            assert!((d_id - 1.0).abs() < 1e-9);
            assert_eq!(falpha_derivative(|_| 4.2, &c, u, h).unwrap(), 0.0);
            let s = staircase(&c, u).unwrap();
            let d_sq = falpha_derivative(|p| p.mass * p.mass, &c, u, h).unwrap();
            assert!((d_sq - 2.0 * s).abs() < 1e-9);
        }
        assert!(falpha_derivative(|p| p.mass, &c, 0.0, h).is_err());
        assert!(falpha_derivative(|p| p.mass, &c, 0.5, 0.0).is_err());
        assert!(falpha_derivative(|p| p.mass, &c, 0.5, S1).is_err());
    }

    #[test]
    fn lift_and_lower_round_trip() {
        let c = build_curve(5).unwrap();
        let table = StaircaseTable::new(&c, 3).unwrap();
        let one = lift(|_| 1.0, &table);
        assert_eq!(one.eval(0.3).unwrap(), 1.0);
        let dist = lift(|p: &CurvePoint| p.distance(), &table);
        assert!((dist.eval(S1).unwrap() - 1.0).abs() < 1e-14);
        assert!(dist.eval(S1 * 1.5).is_err());
        let back = lower(&dist);
        for i in 0..table.u_grid().len() {
            let theta = table.grid_point(i);
            assert!((back(&theta).unwrap() - theta.distance()).abs() < 1e-13);
        }
    }

    #[test]
    fn blowup_matches_first_quarter() {
        let c = build_curve(6).unwrap();
        // aligned at depth 5 so both sides resolve the same segments
        for u in [3.0 / 1024.0, 0.3125, 0.5546875, 0.90625] {
            let inner = point_at_parameter(&c, u / 4.0).unwrap();
            let outer = point_at_parameter(&c, u).unwrap();
            assert!(outer.position.distance_to(&inner.position.scaled(3.0)) < 1e-13);
            assert!((outer.mass - 4.0 * inner.mass).abs() < 1e-14);
        }
        let far = point_at_mass(&c, 16.0 * S1);
        assert!((far.position.x - 9.0).abs() < 1e-12 && far.position.y.abs() < 1e-12);
        assert!((far.u - 16.0).abs() < 1e-12);
        let neg = point_at_mass(&c, -0.5 * S1);
        assert!((neg.position.x + 0.5).abs() < 1e-14);
    }
}
