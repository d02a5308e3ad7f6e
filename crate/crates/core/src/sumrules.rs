//! Sum rules for Laplacian eigenvalues on compact two-point homogeneous spaces.
//!
//! With `lambda = lambda_(1)` and eigenvalues counted with multiplicity, the quadratic
//! polynomials
//!
//! ```text
//! P_N(z) = sum_{j<=N} (z - lambda_j)(z - lambda - (d+4)/d lambda_j)
//! Q_N(z) = N (z - lambda_N)(z - lambda_{N+1})
//! ```
//!
//! coincide whenever `N` sits at the top of an energy level. The identity checks below run in
//! exact rational arithmetic.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, ScanReport, VerifyOptions};
use crate::error::{Error, Result};
use crate::exact::{format_rational, rat_from_uint, rat_int, rat_to_f64, uint_to_f64};
use crate::riesz::{Spectrum, SpectrumQuery, DEFAULT_LEVEL_CAP};
use crate::spaces::Space;
use crate::weyl::weyl_mass;

/// `c2 z^2 + c1 z + c0` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadPoly {
    pub c2: BigRational,
    pub c1: BigRational,
    pub c0: BigRational,
}

impl QuadPoly {
    pub fn eval(&self, z: &BigRational) -> BigRational {
        (&self.c2 * z + &self.c1) * z + &self.c0
    }

    pub fn eval_f64(&self, z: f64) -> f64 {
        (rat_to_f64(&self.c2) * z + rat_to_f64(&self.c1)) * z + rat_to_f64(&self.c0)
    }
}

impl fmt::Display for QuadPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}) z^2 + ({}) z + ({})",
            format_rational(&self.c2),
            format_rational(&self.c1),
            format_rational(&self.c0)
        )
    }
}

fn require_closed(space: &Space) -> Result<()> {
    if !space.is_closed() {
        return Err(Error::Unsupported(format!(
            "sum rules are available on closed spaces only, not on {space}"
        )));
    }
    Ok(())
}

fn count_table(space: &Space, n: &BigUint) -> Result<Spectrum> {
    require_closed(space)?;
    if n.is_zero() {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    Spectrum::until_count(SpectrumQuery::laplacian(*space), &(n + 1u32), DEFAULT_LEVEL_CAP)
}

fn p_from_sums(space: &Space, n: &BigRational, s1: &BigRational, s2: &BigRational) -> QuadPoly {
    let d = rat_int(space.dim());
    let lambda = rat_int(space.lambda_one());
    QuadPoly {
        c2: n.clone(),
        c1: -(rat_int(2) * (&d + rat_int(2)) / &d) * s1 - &lambda * n,
        c0: (&d + rat_int(4)) / &d * s2 + &lambda * s1,
    }
}

fn q_from(n: &BigRational, lo: &BigRational, hi: &BigRational) -> QuadPoly {
    QuadPoly {
        c2: n.clone(),
        c1: -(n * (lo + hi)),
        c0: n * lo * hi,
    }
}

/// `P_N` built from the exact prefix sums of the first `N` eigenvalues.
pub fn pn(space: &Space, n: &BigUint) -> Result<QuadPoly> {
    let table = count_table(space, n)?;
    let ps = table.prefix_sums(n).expect("table reaches N");
    Ok(p_from_sums(
        space,
        &rat_from_uint(n),
        &rat_from_uint(&ps.sum1),
        &rat_from_uint(&ps.sum2),
    ))
}

/// `Q_N(z) = N (z - lambda_N)(z - lambda_{N+1})`.
pub fn qn(space: &Space, n: &BigUint) -> Result<QuadPoly> {
    let table = count_table(space, n)?;
    let lo = table.eigenvalue_at(n).expect("table reaches N");
    let hi = table.eigenvalue_at(&(n + 1u32)).expect("table reaches N+1");
    Ok(q_from(&rat_from_uint(n), &rat_from_uint(&lo), &rat_from_uint(&hi)))
}

/// One gap index checked by [`check_pq_identity`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PqGap {
    pub level: u64,
    /// Decimal gap index `N`.
    pub n: String,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PqReport {
    pub space: String,
    pub l_max: u64,
    pub gaps: Vec<PqGap>,
    pub mismatches: Vec<u64>,
    pub passed: bool,
}

/// Compares `P_N` and `Q_N` coefficient by coefficient at every gap index
/// `N = m_0 + ... + m_L`, `L <= l_max`, with no tolerance.
pub fn check_pq_identity(space: &Space, l_max: u64) -> Result<PqReport> {
    require_closed(space)?;
    if l_max == 0 {
        return Err(Error::Domain("l_max must be at least 1".into()));
    }
    let table = Spectrum::up_to_level(SpectrumQuery::laplacian(*space), l_max + 1)?;
    let gaps: Vec<PqGap> = (0..=l_max)
        .into_par_iter()
        .map(|l| {
            let (n, s1, s2) = table.cumulative_at_level(l).expect("level in table");
            let nr = rat_from_uint(&n);
            let p = p_from_sums(space, &nr, &rat_from_uint(&s1), &rat_from_uint(&s2));
            let q = q_from(&nr, &rat_int(space.lambda(l)), &rat_int(space.lambda(l + 1)));
            PqGap {
                level: l,
                n: n.to_string(),
                equal: p == q,
            }
        })
        .collect();
    let mismatches: Vec<u64> = gaps.iter().filter(|g| !g.equal).map(|g| g.level).collect();
    Ok(PqReport {
        space: space.descriptor(),
        l_max,
        passed: mismatches.is_empty(),
        gaps,
        mismatches,
    })
}

/// The shift `d lambda_(1)/4` (equal to `d^2/4` on spheres).
pub fn default_r2_shift(space: &Space) -> f64 {
    f64::from(space.dim()) * space.lambda_one() as f64 / 4.0
}

/// `R_2(z) / (z+b)^{2+d/2}`; zero when `R_2(z)` vanishes.
pub fn r2_shifted_ratio(space: &Space, z: f64, b: f64) -> Result<f64> {
    if !(z >= 0.0 && b >= 0.0 && z.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("need finite z >= 0 and b >= 0, got z = {z}, b = {b}")));
    }
    let r2 = crate::riesz::riesz_mean(&SpectrumQuery::laplacian(*space), 2, z)?;
    if r2 == 0.0 {
        return Ok(0.0);
    }
    Ok(r2 / (z + b).powf(2.0 + f64::from(space.dim()) / 2.0))
}

/// Truncation of the trace series whose sum is `L_{0,d}|M|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub space: String,
    pub l_max: u64,
    pub partial_sum: f64,
    pub last_term: f64,
    /// `|last term| * l_max`; the terms decay like `l^{-3}`.
    pub tail_estimate: f64,
    pub target: f64,
}

/// Partial sum over `l = 0..=l_max` of
/// `N_l (t_{l+1}^{-d/2} - t_l^{-d/2} + d/4 (t_{l+1}^{-1-d/2} + t_l^{-1-d/2})(lambda_(l+1) - lambda_(l)))`
/// where `N_l` counts eigenvalues through level `l` and `t_l = lambda_(l) + d lambda_(1)/4`.
pub fn trace_identity_partial(space: &Space, l_max: u64) -> Result<TraceSeries> {
    require_closed(space)?;
    let d = f64::from(space.dim());
    let shift = default_r2_shift(space);
    let mut count = BigUint::zero();
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut last = 0.0;
    for l in 0..=l_max {
        count += space.multiplicity(l);
        let (a, b) = (space.lambda(l) as f64, space.lambda(l + 1) as f64);
        let (ta, tb) = (a + shift, b + shift);
        let term = uint_to_f64(&count)
            * (tb.powf(-d / 2.0) - ta.powf(-d / 2.0) + d / 4.0 * (tb.powf(-1.0 - d / 2.0) + ta.powf(-1.0 - d / 2.0)) * (b - a));
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        last = term;
    }
    Ok(TraceSeries {
        space: space.descriptor(),
        l_max,
        partial_sum: sum,
        last_term: last,
        tail_estimate: last.abs() * l_max.max(1) as f64,
        target: rat_to_f64(&weyl_mass(space)),
    })
}

/// The two-sided `R_2` Weyl bounds on a closed space.
pub fn r2_bounds_check(space: &Space, opts: &VerifyOptions) -> Result<ScanReport> {
    require_closed(space)?;
    let spec = bounds::lookup("sd.r2.twosided")?;
    let params = spec.params(Some(*space), None, None)?;
    bounds::verify(spec.id, &params, opts)
}

/// Outcome of a pointwise inequality check `lhs <= rhs` (or `>=`) on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub label: String,
    pub points: usize,
    /// Smallest normalized margin; negative means the inequality failed somewhere.
    pub worst_margin: f64,
    pub worst_z: f64,
    pub holds: bool,
}

fn margin_check(label: String, zs: &[f64], tol: f64, f: impl Fn(f64) -> (f64, f64) + Sync) -> InequalityCheck {
    let margins: Vec<(f64, f64)> = zs
        .par_iter()
        .map(|&z| {
            let (small, big) = f(z);
            (z, (big - small) / small.abs().max(big.abs()).max(1.0))
        })
        .collect();
    let (worst_z, worst_margin) = margins
        .iter()
        .cloned()
        .fold((0.0, f64::INFINITY), |acc, m| if m.1 < acc.1 { m } else { acc });
    InequalityCheck {
        label,
        points: zs.len(),
        worst_margin,
        worst_z,
        holds: worst_margin >= -tol,
    }
}

fn sphere_table(d: u32, z_max: f64, p: u32) -> Result<Spectrum> {
    let q = SpectrumQuery::polyharmonic(Space::sphere(d)?, p)?;
    Spectrum::covering(q, z_max, DEFAULT_LEVEL_CAP)
}

/// `(d+4)/4 R_2(z) <= (z + d^2/4) R_1(z)` on `S^d`.
pub fn r2_r1_inequality(d: u32, zs: &[f64]) -> Result<InequalityCheck> {
    let z_max = zs.iter().cloned().fold(0.0, f64::max);
    let t = sphere_table(d, z_max, 1)?;
    let df = f64::from(d);
    Ok(margin_check(format!("(d+4)/4 R2 <= (z+d^2/4) R1 on S^{d}"), zs, 1e-12, |z| {
        ((df + 4.0) / 4.0 * t.riesz(2, z), (z + df * df / 4.0) * t.riesz(1, z))
    }))
}

/// `sum_j (z^2 - lambda_j^2)_+ >= (2d+4)/(d+4) z R_1(z) - d^2/(d+4) R_1(z)` on `S^d`.
pub fn biharmonic_corollary(d: u32, zs: &[f64]) -> Result<InequalityCheck> {
    let z_max = zs.iter().cloned().fold(0.0, f64::max);
    let t1 = sphere_table(d, z_max, 1)?;
    let t2 = sphere_table(d, z_max * z_max, 2)?;
    let df = f64::from(d);
    Ok(margin_check(format!("biharmonic R1 lower bound on S^{d}"), zs, 1e-12, |z| {
        let r1 = t1.riesz(1, z);
        (
            (2.0 * df + 4.0) / (df + 4.0) * z * r1 - df * df / (df + 4.0) * r1,
            t2.riesz(1, z * z),
        )
    }))
}

/// Value of `Q_N + d R_1` at its critical point in the gap above level `L` of `S^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Z0Check {
    pub d: u32,
    pub level: u64,
    pub n: String,
    /// `z_0 = (lambda_N + lambda_{N+1} - d)/2`.
    pub z0: String,
    pub value: String,
    /// `N (d-2)/(d+2) L(L+d)`.
    pub expected: String,
    pub matches: bool,
    pub nonnegative: bool,
}

/// Exact evaluation of `Q_N(z_0) + d (N z_0 - sum_{j<=N} lambda_j)` at the gap above level `L`.
pub fn z0_identity(d: u32, level: u64) -> Result<Z0Check> {
    let space = Space::sphere(d)?;
    let table = Spectrum::up_to_level(SpectrumQuery::laplacian(space), level + 1)?;
    let (n, s1, _) = table.cumulative_at_level(level).expect("level in table");
    let nr = rat_from_uint(&n);
    let (lo, hi) = (rat_int(space.lambda(level)), rat_int(space.lambda(level + 1)));
    let dr = rat_int(d);
    let z0 = (&lo + &hi - &dr) / rat_int(2);
    let q = q_from(&nr, &lo, &hi).eval(&z0);
    let value = q + &dr * (&nr * &z0 - rat_from_uint(&s1));
    let lr = rat_int(level);
    let expected = &nr * (&dr - rat_int(2)) / (&dr + rat_int(2)) * &lr * (&lr + &dr);
    Ok(Z0Check {
        d,
        level,
        n: n.to_string(),
        z0: format_rational(&z0),
        matches: value == expected,
        nonnegative: !value.is_negative(),
        value: format_rational(&value),
        expected: format_rational(&expected),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn polynomial_examples() {
        for d in 1..=5 {
            let s = Space::sphere(d).unwrap();
            let one = BigUint::from(1u32);
            let p = pn(&s, &one).unwrap();
            assert_eq!(
                p,
                QuadPoly {
                    c2: rat_int(1),
                    c1: rat_int(-(d as i64)),
                    c0: rat_int(0)
                }
            );
            assert_eq!(p, qn(&s, &one).unwrap());
        }
        let four = BigUint::from(4u32);
        let s2 = Space::sphere(2).unwrap();
        let expect = QuadPoly {
            c2: rat_int(4),
            c1: rat_int(-32),
            c0: rat_int(48),
        };
        assert_eq!(pn(&s2, &four).unwrap(), expect);
        assert_eq!(qn(&s2, &four).unwrap(), expect);
        let rp2 = Space::real_projective(2).unwrap();
        assert_eq!(pn(&rp2, &BigUint::from(1u32)).unwrap().c1, rat_int(-6));
        assert!(pn(&Space::hemisphere_dirichlet(2).unwrap(), &four).is_err());
        assert!(pn(&s2, &BigUint::zero()).is_err());
    }

    #[test]
    fn identity_small() {
        assert!(check_pq_identity(&Space::sphere(3).unwrap(), 30).unwrap().passed);
        assert!(check_pq_identity(&Space::cayley_plane(), 10).unwrap().passed);
        assert!(check_pq_identity(&Space::sphere(1).unwrap(), 5).unwrap().passed);
        // P_N and Q_N differ inside a degenerate level
        let s2 = Space::sphere(2).unwrap();
        assert_ne!(pn(&s2, &BigUint::from(2u32)).unwrap(), qn(&s2, &BigUint::from(2u32)).unwrap());
    }

    #[test]
    fn trace_series() {
        let s2 = Space::sphere(2).unwrap();
        assert!((trace_identity_partial(&s2, 0).unwrap().partial_sum - 4.0 / 9.0).abs() < 1e-15);
        let t = trace_identity_partial(&s2, 1000).unwrap();
        assert!((t.partial_sum - 1.0).abs() < 1e-5 && (t.partial_sum - t.target).abs() <= t.tail_estimate);
    }

    #[test]
    fn shifted_ratio() {
        let s2 = Space::sphere(2).unwrap();
        assert_eq!(r2_shifted_ratio(&s2, 0.0, 1.0).unwrap(), 0.0);
        let seq: Vec<f64> = (1..30u64)
            .map(|l| r2_shifted_ratio(&s2, (l * (l + 1)) as f64, 1.0).unwrap())
            .collect();
        assert!(seq.windows(2).all(|w| w[1] >= w[0]));
        let dec: Vec<f64> = (1..3000).map(|i| r2_shifted_ratio(&s2, 0.01 * i as f64, 0.0).unwrap()).collect();
        assert!(dec.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        assert!(r2_shifted_ratio(&s2, -1.0, 0.0).is_err());
    }

    #[test]
    fn z0_values() {
        for d in 2..=6 {
            for l in 0..20 {
                let c = z0_identity(d, l).unwrap();
                assert!(c.matches && c.nonnegative, "{c:?}");
            }
        }
        assert_eq!(z0_identity(2, 3).unwrap().value, "0");
        assert_eq!(rat(0, 1), rat_int(0));
    }
}
