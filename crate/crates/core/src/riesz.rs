//! Counting functions and Riesz means, by brute force over energy levels and through the
//! closed forms available on spheres and hemispheres.
//!
//! Every quantity has two evaluation paths. The exact path takes a rational `z` and returns a
//! rational; the floating path takes an `f64`. Level membership (`lambda^p <= z`) is decided
//! exactly on both paths, so the two only differ by rounding in the final sums.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{binom, rat_from_f64, rat_from_uint, rat_int, rat_pow, rat_to_f64, uint_le_f64, uint_le_rat, uint_to_f64};
use crate::spaces::{max_level_index, max_level_index_exact, Family, Space, MAX_LEVEL_INDEX};

/// Default number of energy levels brute force may enumerate.
pub const DEFAULT_LEVEL_CAP: u64 = 10_000;

/// Spectral quantity targeted by an expansion or a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    /// Counting function `N(z)`.
    N,
    /// First Riesz mean.
    R1,
    /// Second Riesz mean.
    R2,
    /// Average of the first `k` eigenvalues.
    Average,
}

impl Quantity {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantity::N => "N",
            Quantity::R1 => "R1",
            Quantity::R2 => "R2",
            Quantity::Average => "average",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Quantity> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "counting" | "r0" => Some(Quantity::N),
            "r1" => Some(Quantity::R1),
            "r2" => Some(Quantity::R2),
            "average" | "avg" => Some(Quantity::Average),
            _ => None,
        }
    }

    /// Riesz order `gamma` of the quantity, if it is a Riesz mean.
    pub fn gamma(self) -> Option<u32> {
        match self {
            Quantity::N => Some(0),
            Quantity::R1 => Some(1),
            Quantity::R2 => Some(2),
            Quantity::Average => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Standard,
    /// Buckling problem on the whole sphere: the Laplacian spectrum without the zero level.
    Buckling,
}

/// Spectrum of `(-Delta)^p` (or of the buckling problem) on a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpectrumQuery {
    space: Space,
    power: u32,
    variant: Variant,
}

impl SpectrumQuery {
    pub fn new(space: Space, power: u32, variant: Variant) -> Result<SpectrumQuery> {
        if power == 0 {
            return Err(Error::Domain("operator power must be at least 1".into()));
        }
        if variant == Variant::Buckling && !matches!(space.family(), Family::Sphere | Family::Circle) {
            return Err(Error::Domain(format!(
                "the buckling spectrum is only available on spheres, not {space}"
            )));
        }
        Ok(SpectrumQuery { space, power, variant })
    }

    pub fn laplacian(space: Space) -> SpectrumQuery {
        SpectrumQuery {
            space,
            power: 1,
            variant: Variant::Standard,
        }
    }

    pub fn polyharmonic(space: Space, power: u32) -> Result<SpectrumQuery> {
        SpectrumQuery::new(space, power, Variant::Standard)
    }

    pub fn buckling(space: Space) -> Result<SpectrumQuery> {
        SpectrumQuery::new(space, 1, Variant::Buckling)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn first_level(&self) -> u64 {
        match self.variant {
            Variant::Buckling => 1,
            Variant::Standard => self.space.first_level(),
        }
    }

    /// Eigenvalue `lambda_(l)^p` of level `l`.
    pub fn eigenvalue(&self, l: u64) -> BigUint {
        BigUint::from(self.space.lambda(l)).pow(self.power)
    }

    /// Largest level index whose eigenvalue is `<= z`.
    pub fn max_level(&self, z: f64) -> Option<u64> {
        let idx = if self.power == 1 {
            max_level_index(&self.space, z)
        } else {
            if z < 0.0 || z.is_nan() {
                return None;
            }
            // lambda^p <= z  iff  lambda <= floor(z^(1/p)); fix the root exactly afterwards.
            let mut r = z.powf(1.0 / f64::from(self.power)).floor().min(u64::MAX as f64 / 2.0) as u64;
            while r > 0 && !uint_le_f64(&BigUint::from(r).pow(self.power), z) {
                r -= 1;
            }
            while uint_le_f64(&BigUint::from(r + 1).pow(self.power), z) {
                r += 1;
            }
            max_level_index(&self.space, r as f64)
        }?;
        (idx >= self.first_level()).then_some(idx)
    }

    /// Exact-rational counterpart of [`SpectrumQuery::max_level`].
    pub fn max_level_exact(&self, z: &BigRational) -> Option<u64> {
        let idx = if self.power == 1 {
            max_level_index_exact(&self.space, z)
        } else {
            if z < &BigRational::zero() {
                return None;
            }
            let approx = rat_to_f64(z).max(0.0);
            let mut r = approx.powf(1.0 / f64::from(self.power)).floor() as u64;
            while r > 0 && !uint_le_rat(&BigUint::from(r).pow(self.power), z) {
                r -= 1;
            }
            while uint_le_rat(&BigUint::from(r + 1).pow(self.power), z) {
                r += 1;
            }
            max_level_index(&self.space, r as f64)
        }?;
        (idx >= self.first_level()).then_some(idx)
    }
}

/// Exact prefix sums over the flattened (multiplicity-expanded) spectrum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixSums {
    pub k: BigUint,
    pub sum1: BigUint,
    pub sum2: BigUint,
}

#[derive(Debug, Clone)]
struct Row {
    l: u64,
    value: BigUint,
    value_f64: f64,
    mult: BigUint,
    mult_f64: f64,
    count: BigUint,
    sum1: BigUint,
    sum2: BigUint,
}

/// Immutable table of the first levels of a spectrum with cumulative counts and sums.
/// Built once and then shared freely between threads.
#[derive(Debug, Clone)]
pub struct Spectrum {
    query: SpectrumQuery,
    rows: Vec<Row>,
}

impl Spectrum {
    /// Levels `first_level ..= l_max`.
    pub fn up_to_level(query: SpectrumQuery, l_max: u64) -> Result<Spectrum> {
        let first = query.first_level();
        if l_max > MAX_LEVEL_INDEX {
            return Err(Error::LevelCap {
                needed: l_max,
                cap: MAX_LEVEL_INDEX,
            });
        }
        let mut rows: Vec<Row> = Vec::with_capacity((l_max.saturating_sub(first) + 1) as usize);
        let mut count = BigUint::zero();
        let mut sum1 = BigUint::zero();
        let mut sum2 = BigUint::zero();
        for l in first..=l_max.max(first) {
            let value = query.eigenvalue(l);
            let mult = query.space.multiplicity(l);
            count += &mult;
            sum1 += &mult * &value;
            sum2 += &mult * &value * &value;
            rows.push(Row {
                l,
                value_f64: uint_to_f64(&value),
                mult_f64: uint_to_f64(&mult),
                value,
                mult,
                count: count.clone(),
                sum1: sum1.clone(),
                sum2: sum2.clone(),
            });
        }
        Ok(Spectrum { query, rows })
    }

    /// Enough levels to evaluate anything up to `z_max`, plus the next level above it.
    pub fn covering(query: SpectrumQuery, z_max: f64, cap: u64) -> Result<Spectrum> {
        let top = query.max_level(z_max).unwrap_or(query.first_level()) + 1;
        if top - query.first_level() > cap {
            return Err(Error::LevelCap {
                needed: top - query.first_level(),
                cap,
            });
        }
        Spectrum::up_to_level(query, top)
    }

    pub fn covering_exact(query: SpectrumQuery, z_max: &BigRational, cap: u64) -> Result<Spectrum> {
        let top = query.max_level_exact(z_max).unwrap_or(query.first_level()) + 1;
        if top - query.first_level() > cap {
            return Err(Error::LevelCap {
                needed: top - query.first_level(),
                cap,
            });
        }
        Spectrum::up_to_level(query, top)
    }

    /// Levels until the cumulative count reaches at least `k`.
    pub fn until_count(query: SpectrumQuery, k: &BigUint, cap: u64) -> Result<Spectrum> {
        let first = query.first_level();
        let mut l_max = first + 4;
        loop {
            let s = Spectrum::up_to_level(query, l_max)?;
            if s.rows.last().map(|r| &r.count >= k).unwrap_or(false) {
                return Ok(s);
            }
            if l_max - first > cap {
                return Err(Error::LevelCap {
                    needed: l_max - first,
                    cap,
                });
            }
            l_max = first + 2 * (l_max - first + 1);
        }
    }

    pub fn query(&self) -> &SpectrumQuery {
        &self.query
    }

    pub fn top_level(&self) -> u64 {
        self.rows.last().map(|r| r.l).unwrap_or(0)
    }

    /// Eigenvalue of the largest level held by the table.
    pub fn top_value_f64(&self) -> f64 {
        self.rows.last().map(|r| r.value_f64).unwrap_or(0.0)
    }

    /// `(l, lambda^p, mult)` for every level held.
    pub fn levels(&self) -> impl Iterator<Item = (u64, &BigUint, &BigUint)> {
        self.rows.iter().map(|r| (r.l, &r.value, &r.mult))
    }

    pub fn level_values_f64(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value_f64).collect()
    }

    /// Number of rows with value `<= z`; panics if `z` lies beyond the table.
    fn rows_below_f64(&self, z: f64) -> usize {
        let n = self.rows.partition_point(|r| uint_le_f64(&r.value, z));
        assert!(n < self.rows.len(), "z = {z} lies beyond the tabulated levels");
        n
    }

    fn rows_below_exact(&self, z: &BigRational) -> usize {
        let n = self.rows.partition_point(|r| uint_le_rat(&r.value, z));
        assert!(n < self.rows.len(), "z lies beyond the tabulated levels");
        n
    }

    /// `true` when `z` can be evaluated from this table.
    pub fn covers(&self, z: f64) -> bool {
        self.rows.last().map(|r| !uint_le_f64(&r.value, z)).unwrap_or(false)
    }

    pub fn counting(&self, z: f64) -> BigUint {
        match self.rows_below_f64(z) {
            0 => BigUint::zero(),
            n => self.rows[n - 1].count.clone(),
        }
    }

    pub fn counting_exact(&self, z: &BigRational) -> BigUint {
        match self.rows_below_exact(z) {
            0 => BigUint::zero(),
            n => self.rows[n - 1].count.clone(),
        }
    }

    /// `R_gamma(z) = sum_j (z - lambda_j)_+^gamma` for `gamma` in `{0, 1, 2}`, summed term by term.
    pub fn riesz(&self, gamma: u32, z: f64) -> f64 {
        let n = self.rows_below_f64(z);
        self.rows[..n]
            .iter()
            .map(|r| r.mult_f64 * (z - r.value_f64).powi(gamma as i32))
            .sum()
    }

    /// Exact Riesz mean from the cumulative sums.
    pub fn riesz_exact(&self, gamma: u32, z: &BigRational) -> BigRational {
        let n = self.rows_below_exact(z);
        if n == 0 {
            return BigRational::zero();
        }
        let r = &self.rows[n - 1];
        let count = rat_from_uint(&r.count);
        let s1 = rat_from_uint(&r.sum1);
        match gamma {
            0 => count,
            1 => count * z - s1,
            _ => count * z * z - rat_int(2) * s1 * z + rat_from_uint(&r.sum2),
        }
    }

    /// Exact prefix sums over the first `k` eigenvalues, multiplicities expanded.
    pub fn prefix_sums(&self, k: &BigUint) -> Option<PrefixSums> {
        let idx = self.rows.partition_point(|r| &r.count < k);
        let row = self.rows.get(idx)?;
        let (c0, s1, s2) = match idx {
            0 => (BigUint::zero(), BigUint::zero(), BigUint::zero()),
            i => {
                let p = &self.rows[i - 1];
                (p.count.clone(), p.sum1.clone(), p.sum2.clone())
            }
        };
        let extra = k - &c0;
        Some(PrefixSums {
            k: k.clone(),
            sum1: s1 + &extra * &row.value,
            sum2: s2 + &extra * &row.value * &row.value,
        })
    }

    /// The `j`-th eigenvalue (1-based) of the flattened spectrum.
    pub fn eigenvalue_at(&self, j: &BigUint) -> Option<BigUint> {
        let idx = self.rows.partition_point(|r| &r.count < j);
        self.rows.get(idx).map(|r| r.value.clone())
    }

    /// `(count, sum1, sum2)` accumulated through level index `l`.
    pub fn cumulative_at_level(&self, l: u64) -> Option<(BigUint, BigUint, BigUint)> {
        let i = l.checked_sub(self.query.first_level())? as usize;
        self.rows.get(i).map(|r| (r.count.clone(), r.sum1.clone(), r.sum2.clone()))
    }
}

fn check_gamma(gamma: u32) -> Result<()> {
    if gamma > 2 {
        return Err(Error::Unsupported(format!(
            "Riesz means of order {gamma}; only 0, 1 and 2 are available"
        )));
    }
    Ok(())
}

/// Counting function `N(z) = #{lambda_j <= z}` with multiplicities, inclusive at levels.
pub fn counting(q: &SpectrumQuery, z: f64) -> Result<BigUint> {
    if q.max_level(z).is_none() {
        return Ok(BigUint::zero());
    }
    Ok(Spectrum::covering(*q, z, DEFAULT_LEVEL_CAP)?.counting(z))
}

pub fn counting_exact(q: &SpectrumQuery, z: &BigRational) -> Result<BigUint> {
    if q.max_level_exact(z).is_none() {
        return Ok(BigUint::zero());
    }
    Ok(Spectrum::covering_exact(*q, z, DEFAULT_LEVEL_CAP)?.counting_exact(z))
}

/// Riesz mean `R_gamma(z)` on the floating path.
pub fn riesz_mean(q: &SpectrumQuery, gamma: u32, z: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if z < 0.0 {
        return Err(Error::Domain("Riesz means are evaluated for z >= 0".into()));
    }
    if q.max_level(z).is_none() {
        return Ok(0.0);
    }
    Ok(Spectrum::covering(*q, z, DEFAULT_LEVEL_CAP)?.riesz(gamma, z))
}

/// Riesz mean `R_gamma(z)` on the exact path.
pub fn riesz_mean_exact(q: &SpectrumQuery, gamma: u32, z: &BigRational) -> Result<BigRational> {
    check_gamma(gamma)?;
    if z < &BigRational::zero() {
        return Err(Error::Domain("Riesz means are evaluated for z >= 0".into()));
    }
    if q.max_level_exact(z).is_none() {
        return Ok(BigRational::zero());
    }
    Ok(Spectrum::covering_exact(*q, z, DEFAULT_LEVEL_CAP)?.riesz_exact(gamma, z))
}

/// Prefactor `(2L+d) Gamma(L+d) / ((d+2) Gamma(L+1) Gamma(d+1))` of the sphere closed form.
fn sphere_r1_prefactor(d: u64, big_l: u64) -> BigRational {
    // Gamma(L+d) / (Gamma(L+1) Gamma(d+1)) = C(L+d-1, L) / d
    let num = BigUint::from(2 * big_l + d) * binom(big_l + d - 1, big_l);
    BigRational::new(BigInt::from(num), BigInt::from(d * (d + 2)))
}

/// Closed form of `R_1` on `S^d`:
/// `(2L+d)Gamma(L+d)/((d+2)Gamma(L+1)Gamma(d+1)) * (-d L (L+d) + (d+2) z)` with `L` the top level below `z`.
pub fn riesz1_closed_sphere(d: u32, z: f64) -> Result<f64> {
    let s = Space::sphere(d)?;
    let Some(big_l) = max_level_index(&s, z) else { return Ok(0.0) };
    let d64 = u64::from(d);
    let pre = rat_to_f64(&sphere_r1_prefactor(d64, big_l));
    let df = f64::from(d);
    let lf = big_l as f64;
    Ok(pre * ((df + 2.0) * z - df * lf * (lf + df)))
}

pub fn riesz1_closed_sphere_exact(d: u32, z: &BigRational) -> Result<BigRational> {
    let s = Space::sphere(d)?;
    let Some(big_l) = max_level_index_exact(&s, z) else {
        return Ok(BigRational::zero());
    };
    let d64 = u64::from(d);
    let inner = rat_int(d64 + 2) * z - rat_int(d64 * big_l * (big_l + d64));
    Ok(sphere_r1_prefactor(d64, big_l) * inner)
}

/// Closed forms of the hemisphere counting functions:
/// `N^D = Gamma(d+L)/(Gamma(L)Gamma(d+1)) = C(L+d-1, d)` and `N^N = C(L+d, d)`.
pub fn counting_closed_hemisphere(space: &Space, z: f64) -> Result<BigUint> {
    let d = u64::from(space.dim());
    let level = max_level_index(&Space::hemisphere_neumann(space.dim())?, z);
    hemisphere_count_from_level(space, d, level)
}

pub fn counting_closed_hemisphere_exact(space: &Space, z: &BigRational) -> Result<BigUint> {
    let d = u64::from(space.dim());
    let level = max_level_index_exact(&Space::hemisphere_neumann(space.dim())?, z);
    hemisphere_count_from_level(space, d, level)
}

fn hemisphere_count_from_level(space: &Space, d: u64, level: Option<u64>) -> Result<BigUint> {
    let Some(big_l) = level else { return Ok(BigUint::zero()) };
    match space.family() {
        Family::HemisphereDirichlet => Ok(binom(big_l + d - 1, d)),
        Family::HemisphereNeumann => Ok(binom(big_l + d, d)),
        _ => Err(Error::Unsupported(format!("hemisphere closed form requested for {space}"))),
    }
}

/// Closed form of `R_1^D` on `S^d_+`: `C(L+d-1, d) (z - d(L+d)(L(d+1)+1)/((d+1)(d+2)))`.
pub fn riesz1_closed_hemisphere_dirichlet_exact(d: u32, z: &BigRational) -> Result<BigRational> {
    let s = Space::hemisphere_dirichlet(d)?;
    let Some(big_l) = max_level_index_exact(&s, z) else {
        return Ok(BigRational::zero());
    };
    let d = u64::from(d);
    let shift = BigRational::new(
        BigInt::from(d * (big_l + d) * (big_l * (d + 1) + 1)),
        BigInt::from((d + 1) * (d + 2)),
    );
    Ok(rat_from_uint(&binom(big_l + d - 1, d)) * (z - shift))
}

/// `sum_{l>=1} (2l+1)(z - l^p (l+1)^p)_+`, the `S^2` sum without its `l = 0` term.
pub fn lemma_sum(p: u32, z: f64) -> Result<f64> {
    let q = SpectrumQuery::new(Space::sphere(2)?, p, Variant::Buckling)?;
    riesz_mean(&q, 1, z)
}

pub fn lemma_sum_exact(p: u32, z: &BigRational) -> Result<BigRational> {
    let q = SpectrumQuery::new(Space::sphere(2)?, p, Variant::Buckling)?;
    riesz_mean_exact(&q, 1, z)
}

/// Both sides of the polyharmonic integral transforms at one point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformCheck {
    pub d: u32,
    pub p: u32,
    pub z: f64,
    /// `sum_j (z^p - lambda_j^p)_+`.
    pub lhs: f64,
    /// `-p(p-1) int_0^z s^(p-2) R_1(s) ds + p z^(p-1) R_1(z)`.
    pub by_parts: f64,
    /// `p int_0^z s^(p-1) N(s) ds`.
    pub by_counting: f64,
    /// Largest difference between the floating evaluations of the three expressions, relative
    /// to `max(1, |lhs|)`.
    pub residual: f64,
    /// Whether the exact rational evaluations of the three expressions coincide.
    pub exact_agree: bool,
    /// The exact common value when they agree.
    pub exact_lhs: BigRational,
}

/// Evaluates the integral transforms on `S^d` by exact piecewise integration.
/// On each `[lambda_l, lambda_{l+1}]` the counting function is constant and `R_1` is linear,
/// so every integral is a polynomial in the breakpoints.
pub fn poly_transform_check(d: u32, p: u32, z: f64) -> Result<TransformCheck> {
    if p < 2 {
        return Err(Error::Domain("the transforms are stated for p >= 2".into()));
    }
    if z < 0.0 {
        return Err(Error::Domain("z must be nonnegative".into()));
    }
    let zq = rat_from_f64(z)?;
    let space = Space::sphere(d)?;
    let lap = SpectrumQuery::laplacian(space);
    let spec = Spectrum::covering(lap, z, DEFAULT_LEVEL_CAP)?;
    let top = spec.rows_below_f64(z);
    let pp = i64::from(p);

    // exact path
    let zp = rat_pow(&zq, p);
    let mut lhs = BigRational::zero();
    let mut int_r1 = BigRational::zero(); // int_0^z s^(p-2) R_1(s) ds
    let mut int_n = BigRational::zero(); // int_0^z s^(p-1) N(s) ds
                                         // floating path
    let mut lhs_f = 0.0;
    let mut int_r1_f = 0.0;
    let mut int_n_f = 0.0;
    let pf = f64::from(p);
    for i in 0..top {
        let r = &spec.rows[i];
        let a = rat_from_uint(&r.value);
        let b = if i + 1 < top {
            rat_from_uint(&spec.rows[i + 1].value)
        } else {
            zq.clone()
        };
        let count = rat_from_uint(&r.count);
        let s1 = rat_from_uint(&r.sum1);
        let mult = rat_from_uint(&r.mult);
        lhs += &mult * (&zp - rat_pow(&a, p));
        let dp = rat_pow(&b, p) - rat_pow(&a, p);
        let dpm1 = rat_pow(&b, p - 1) - rat_pow(&a, p - 1);
        int_r1 += &count * &dp / rat_int(pp) - &s1 * &dpm1 / rat_int(pp - 1);
        int_n += &count * &dp / rat_int(pp);

        let af = r.value_f64;
        let bf = if i + 1 < top { spec.rows[i + 1].value_f64 } else { z };
        let cf = uint_to_f64(&r.count);
        let s1f = uint_to_f64(&r.sum1);
        lhs_f += r.mult_f64 * (z.powi(p as i32) - af.powi(p as i32));
        let dpf = bf.powi(p as i32) - af.powi(p as i32);
        let dpm1f = bf.powi(p as i32 - 1) - af.powi(p as i32 - 1);
        int_r1_f += cf * dpf / pf - s1f * dpm1f / (pf - 1.0);
        int_n_f += cf * dpf / pf;
    }
    let r1z = spec.riesz_exact(1, &zq);
    let by_parts = -rat_int(pp * (pp - 1)) * int_r1 + rat_int(pp) * rat_pow(&zq, p - 1) * r1z;
    let by_counting = rat_int(pp) * int_n;
    let exact_agree = by_parts == lhs && by_counting == lhs;

    let r1z_f = spec.riesz(1, z);
    let by_parts_f = -pf * (pf - 1.0) * int_r1_f + pf * z.powi(p as i32 - 1) * r1z_f;
    let by_counting_f = pf * int_n_f;
    let residual = (by_parts_f - lhs_f).abs().max((by_counting_f - lhs_f).abs()) / lhs_f.abs().max(1.0);
    Ok(TransformCheck {
        d,
        p,
        z,
        lhs: lhs_f,
        by_parts: by_parts_f,
        by_counting: by_counting_f,
        residual,
        exact_agree,
        exact_lhs: lhs,
    })
}

/// Exact prefix sums `sum_{j<=k} lambda_j` and `sum_{j<=k} lambda_j^2`.
pub fn prefix_sums(q: &SpectrumQuery, k: &BigUint) -> Result<PrefixSums> {
    if k.is_zero() {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let spec = Spectrum::until_count(*q, k, DEFAULT_LEVEL_CAP)?;
    Ok(spec.prefix_sums(k).expect("table reaches k"))
}

/// Average of the first `k` eigenvalues, `(1/k) sum_{j<=k} lambda_j`, exactly.
pub fn eigenvalue_average(q: &SpectrumQuery, k: u64) -> Result<BigRational> {
    let kb = BigUint::from(k);
    let ps = prefix_sums(q, &kb)?;
    Ok(BigRational::new(BigInt::from(ps.sum1), BigInt::from(kb)))
}

/// The flattened spectrum as a tiny helper for tests and small tables.
pub fn flattened(q: &SpectrumQuery, n: usize) -> Result<Vec<BigUint>> {
    let spec = Spectrum::until_count(*q, &BigUint::from(n), DEFAULT_LEVEL_CAP)?;
    let mut out = Vec::with_capacity(n);
    for (_, value, mult) in spec.levels() {
        let mut m = mult.clone();
        while !m.is_zero() && out.len() < n {
            out.push(value.clone());
            m -= BigUint::one();
        }
        if out.len() == n {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};

    fn s(d: u32) -> Space {
        Space::sphere(d).unwrap()
    }

    #[test]
    fn counting_examples() {
        let q = SpectrumQuery::laplacian(s(2));
        assert_eq!(counting(&q, 6.0).unwrap(), BigUint::from(9u32));
        assert_eq!(counting(&q, -1.0).unwrap(), BigUint::zero());
        let hd = SpectrumQuery::laplacian(Space::hemisphere_dirichlet(2).unwrap());
        assert_eq!(counting(&hd, 2.0).unwrap(), BigUint::one());
        let hn = SpectrumQuery::laplacian(Space::hemisphere_neumann(2).unwrap());
        assert_eq!(counting(&hn, 2.0).unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn riesz_examples() {
        let q2 = SpectrumQuery::laplacian(s(2));
        assert_eq!(riesz_mean_exact(&q2, 1, &rat_int(2)).unwrap(), rat_int(2));
        assert_eq!(riesz_mean(&q2, 1, 2.0).unwrap(), 2.0);
        let q3 = SpectrumQuery::laplacian(s(3));
        assert_eq!(riesz_mean(&q3, 1, 3.0).unwrap(), 3.0);
        let q1 = SpectrumQuery::laplacian(s(1));
        assert_eq!(riesz_mean(&q1, 1, 1.0).unwrap(), 1.0);
        let q4 = SpectrumQuery::polyharmonic(s(2), 4).unwrap();
        assert_eq!(riesz_mean_exact(&q4, 1, &rat_int(81)).unwrap(), rat_int(276));
        assert!(riesz_mean(&q2, 3, 1.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(riesz1_closed_sphere(2, 3.75).unwrap(), 9.0);
        assert_eq!(riesz1_closed_sphere_exact(2, &rat(15, 4)).unwrap(), rat_int(9));
        assert_eq!(riesz1_closed_sphere(3, 3.0).unwrap(), 3.0);
        assert_eq!(riesz1_closed_sphere(2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn lemma_sum_examples() {
        assert_eq!(lemma_sum(1, 2.0).unwrap(), 0.0);
        assert_eq!(lemma_sum(1, 6.0).unwrap(), 12.0);
        assert_eq!(lemma_sum_exact(4, &rat_int(81)).unwrap(), rat_int(195));
    }

    #[test]
    fn transform_examples() {
        let t = poly_transform_check(2, 2, 2.0).unwrap();
        assert!(t.exact_agree);
        assert_eq!(t.exact_lhs, rat_int(4));
        let t = poly_transform_check(3, 2, 0.0).unwrap();
        assert!(t.exact_agree && t.exact_lhs.is_zero());
        let t = poly_transform_check(2, 3, 6.0).unwrap();
        assert!(t.exact_agree);
        assert!(t.residual <= 1e-10 * (1.0 + t.lhs.abs()));
        // Sigma (216 - lambda^3)_+ on S^2: 216 + 3 (216 - 8) + 5 (216 - 216)
        assert_eq!(t.exact_lhs, rat_int(216 + 3 * 208));
    }

    #[test]
    fn average_examples() {
        let q2 = SpectrumQuery::laplacian(s(2));
        assert_eq!(eigenvalue_average(&q2, 1).unwrap(), rat_int(0));
        assert_eq!(eigenvalue_average(&q2, 4).unwrap(), rat(6, 4));
        let q3 = SpectrumQuery::laplacian(s(3));
        assert_eq!(eigenvalue_average(&q3, 5).unwrap(), rat(12, 5));
        assert!(eigenvalue_average(&q2, 0).is_err());
    }

    #[test]
    fn buckling_drops_the_zero_level() {
        let std = SpectrumQuery::laplacian(s(2));
        let buck = SpectrumQuery::buckling(s(2)).unwrap();
        for z in [0.0, 1.0, 2.0, 7.5, 30.0] {
            assert_eq!(counting(&buck, z).unwrap() + BigUint::one(), counting(&std, z).unwrap());
        }
        assert!(SpectrumQuery::buckling(Space::real_projective(2).unwrap()).is_err());
    }

    #[test]
    fn flattened_sphere() {
        let q1 = SpectrumQuery::laplacian(s(1));
        let v: Vec<u64> = flattened(&q1, 7).unwrap().iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(v, vec![0, 1, 1, 4, 4, 9, 9]);
    }
}
