//! Figure data and structural scans.
//!
//! Every figure series is a ratio minus one, `Q(z)/B(z) - 1`, of a spectral quantity `Q` and a
//! reference `B` (a bound, a Weyl term or a truncated expansion). Points where `B(z) <= 0` are
//! dropped.

use std::fmt::Write as _;
use std::io;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, Side};
use crate::error::{Error, Result};
use crate::riesz::{lemma_sum, Quantity, Spectrum, SpectrumQuery, DEFAULT_LEVEL_CAP};
use crate::spaces::Space;
use crate::weyl::{expansion, weyl_coefficient, weyl_term};

/// Default number of grid points per level interval.
pub const DEFAULT_RESOLUTION: usize = 40;
/// Figures cover `[0, lambda_(FIGURE_LEVEL)]` (raised to the power `p` where relevant).
pub const FIGURE_LEVEL: u64 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridPolicy {
    UniformInZ,
    /// Uniform in the real level index `t`, with `z = lambda(t)^p`.
    UniformInW,
    LevelsPlusMidpoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub grid_policy: GridPolicy,
}

/// Grid over `(0, lambda(l_max)^p]` for the spectrum of `query`.
pub fn grid(query: &SpectrumQuery, policy: GridPolicy, l_max: u64, resolution: usize) -> Vec<f64> {
    let space = query.space();
    let p = query.power() as i32;
    let lam = |t: f64| space.lambda_real(t).powi(p);
    let res = resolution.max(1);
    let mut zs: Vec<f64> = match policy {
        GridPolicy::UniformInW => (0..=(l_max as usize * res)).map(|i| lam(i as f64 / res as f64)).collect(),
        GridPolicy::UniformInZ => {
            let top = lam(l_max as f64);
            let n = l_max as usize * res;
            (0..=n).map(|i| top * i as f64 / n as f64).collect()
        }
        GridPolicy::LevelsPlusMidpoints => (0..=l_max)
            .flat_map(|l| {
                let a = lam(l as f64);
                let b = lam(l as f64 + 1.0);
                [a, 0.5 * (a + b)]
            })
            .filter(|&z| z <= lam(l_max as f64))
            .collect(),
    };
    zs.retain(|&z| z > 0.0);
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    zs
}

fn ratio_series(label: impl Into<String>, zs: &[f64], policy: GridPolicy, f: impl Fn(f64) -> (f64, f64) + Sync) -> Series {
    let points: Vec<(f64, f64)> = zs
        .par_iter()
        .filter_map(|&z| {
            let (q, b) = f(z);
            let v = q / b - 1.0;
            (b > 0.0 && v.is_finite()).then_some((z, v))
        })
        .collect();
    Series {
        label: label.into(),
        points,
        grid_policy: policy,
    }
}

/// Identifiers of the reproducible figures.
pub const FIGURES: [&str; 10] = ["f1", "f2", "f34", "f4", "f5", "f6", "f7", "f8", "f9", "f10"];

fn bound_fn(id: &'static str, space: Space, p: u32) -> Result<impl Fn(Side, f64) -> f64 + Sync> {
    let spec = bounds::lookup(id)?;
    let params = spec.params(Some(space), Some(p), None)?;
    Ok(move |side: Side, z: f64| bounds::bound_value(id, &params, Some(side), z).unwrap_or(f64::NAN))
}

/// Series of one figure; `resolution` is the number of points per level interval.
pub fn figure(fig_id: &str, resolution: usize) -> Result<Vec<Series>> {
    let pol = GridPolicy::UniformInW;
    let table = |q: SpectrumQuery, zs: &[f64]| Spectrum::covering(q, zs.last().copied().unwrap_or(0.0), DEFAULT_LEVEL_CAP);
    let s2 = Space::sphere(2)?;
    let s3 = Space::sphere(3)?;
    let series = match fig_id {
        "f1" => {
            let q = SpectrumQuery::laplacian(s2);
            let zs = grid(&q, pol, FIGURE_LEVEL, resolution);
            let t = table(q, &zs)?;
            let mut out = Vec::new();
            for (label, id, side) in [
                ("upper", "s2.r1.upper", Side::Upper),
                ("lower", "s2.r1.lower", Side::Lower),
                ("upper.imp", "s2.r1.upper.imp", Side::Upper),
                ("lower.imp", "s2.r1.lower.imp", Side::Lower),
            ] {
                let b = bound_fn(id, s2, 1)?;
                out.push(ratio_series(label, &zs, pol, |z| (t.riesz(1, z), b(side, z))));
            }
            out
        }
        "f2" => {
            let hd = Space::hemisphere_dirichlet(2)?;
            let q = SpectrumQuery::laplacian(hd);
            let zs = grid(&q, pol, FIGURE_LEVEL, resolution);
            let t = table(q, &zs)?;
            let b = bound_fn("hemi2.nd.twosided", hd, 1)?;
            let full = [
                ratio_series("weyl", &zs, pol, |z| (t.riesz(0, z), z / 2.0)),
                ratio_series("upper.imp", &zs, pol, |z| (t.riesz(0, z), b(Side::Upper, z))),
                ratio_series("lower.imp", &zs, pol, |z| (t.riesz(0, z), b(Side::Lower, z))),
            ];
            let top = zs.last().copied().unwrap_or(0.0);
            let mut out = Vec::new();
            for panel in 0..4 {
                let cut = top / 4f64.powi(panel);
                for s in &full {
                    out.push(Series {
                        label: format!("{}/panel{}", s.label, panel + 1),
                        points: s.points.iter().copied().filter(|&(z, _)| z <= cut).collect(),
                        grid_policy: pol,
                    });
                }
            }
            out
        }
        "f34" => {
            let mut out = Vec::new();
            for (name, space, up, lo) in [
                ("dirichlet", Space::hemisphere_dirichlet(2)?, "hemi2.r1d.upper", "hemi2.r1d.lower"),
                ("neumann", Space::hemisphere_neumann(2)?, "hemi2.r1n.upper", "hemi2.r1n.lower"),
            ] {
                let q = SpectrumQuery::laplacian(space);
                let zs = grid(&q, pol, FIGURE_LEVEL, resolution);
                let t = table(q, &zs)?;
                let bu = bound_fn(up, space, 1)?;
                let bl = bound_fn(lo, space, 1)?;
                out.push(ratio_series(format!("{name}.weyl"), &zs, pol, |z| (t.riesz(1, z), z * z / 4.0)));
                out.push(ratio_series(format!("{name}.upper"), &zs, pol, |z| {
                    (t.riesz(1, z), bu(Side::Upper, z))
                }));
                out.push(ratio_series(format!("{name}.lower"), &zs, pol, |z| {
                    (t.riesz(1, z), bl(Side::Lower, z))
                }));
            }
            out
        }
        "f4" | "f6" => {
            let (quantity, gamma, terms, label) = if fig_id == "f4" {
                (Quantity::R1, 1, 2, "two-term")
            } else {
                (Quantity::N, 0, 3, "three-term")
            };
            let q = SpectrumQuery::laplacian(s3);
            let zs = grid(&q, pol, FIGURE_LEVEL, resolution);
            let t = table(q, &zs)?;
            let mut out = Vec::new();
            if fig_id == "f4" {
                out.push(ratio_series("weyl", &zs, pol, |z| {
                    (t.riesz(1, z), weyl_term(&s3, 1, 1, z).unwrap_or(f64::NAN))
                }));
            }
            out.push(ratio_series(label, &zs, pol, |z| {
                (
                    t.riesz(gamma, z),
                    expansion(&s3, quantity, z, terms).map(|e| e.value).unwrap_or(f64::NAN),
                )
            }));
            out
        }
        "f5" => {
            let q = SpectrumQuery::laplacian(s3);
            let zs = grid(&q, pol, FIGURE_LEVEL, resolution);
            let t = table(q, &zs)?;
            let bu = bound_fn("sd.r1.upper.shift", s3, 1)?;
            let bl = bound_fn("sd.r1.lower.shift", s3, 1)?;
            vec![
                ratio_series("weyl", &zs, pol, |z| (t.riesz(1, z), weyl_term(&s3, 1, 1, z).unwrap_or(f64::NAN))),
                ratio_series("upper", &zs, pol, |z| (t.riesz(1, z), bu(Side::Upper, z))),
                ratio_series("lower", &zs, pol, |z| (t.riesz(1, z), bl(Side::Lower, z))),
            ]
        }
        "f7" | "f8" => {
            let space = if fig_id == "f7" {
                Space::hemisphere_dirichlet(3)?
            } else {
                Space::hemisphere_neumann(3)?
            };
            let q = SpectrumQuery::laplacian(space);
            let zs = grid(&q, pol, FIGURE_LEVEL, resolution);
            let t = table(q, &zs)?;
            let exp = |quantity, z| expansion(&space, quantity, z, 3).map(|e| e.value).unwrap_or(f64::NAN);
            vec![
                ratio_series("n.three-term", &zs, pol, |z| (t.riesz(0, z), exp(Quantity::N, z))),
                ratio_series("r1.weyl", &zs, pol, |z| {
                    (t.riesz(1, z), weyl_term(&space, 1, 1, z).unwrap_or(f64::NAN))
                }),
                ratio_series("r1.three-term", &zs, pol, |z| (t.riesz(1, z), exp(Quantity::R1, z))),
            ]
        }
        "f9" => {
            let mut out = Vec::new();
            for d in 2..=5 {
                let space = Space::sphere(d)?;
                let q = SpectrumQuery::polyharmonic(space, 2)?;
                let zs = grid(&q, pol, FIGURE_LEVEL, resolution);
                let t = table(q, &zs)?;
                out.push(ratio_series(format!("d={d}"), &zs, pol, |z| {
                    (t.riesz(1, z), weyl_term(&space, 1, 2, z).unwrap_or(f64::NAN))
                }));
            }
            out
        }
        "f10" => {
            let mut out = Vec::new();
            for p in 2..=5 {
                let q = SpectrumQuery::polyharmonic(s2, p)?;
                let zs = grid(&q, pol, FIGURE_LEVEL, resolution);
                out.push(ratio_series(format!("p={p}"), &zs, pol, |z| {
                    (lemma_sum(p, z).unwrap_or(f64::NAN), weyl_term(&s2, 1, p, z).unwrap_or(f64::NAN))
                }));
            }
            out
        }
        other => {
            return Err(Error::Domain(format!(
                "unknown figure {other}; known figures: {}",
                FIGURES.join(", ")
            )))
        }
    };
    Ok(series)
}

/// Reference `coeff (z + shift)^exponent` for gap scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub coeff: f64,
    pub shift: f64,
    pub exponent: f64,
}

impl Reference {
    /// Leading Weyl term of `R_gamma` on `space`, shifted by `shift`.
    pub fn weyl(space: &Space, gamma: u32, shift: f64) -> Result<Reference> {
        Ok(Reference {
            coeff: weyl_coefficient(space, gamma, 1)?,
            shift,
            exponent: f64::from(gamma) + f64::from(space.dim()) / 2.0,
        })
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeff * (z + self.shift).powf(self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapExtremum {
    pub level: u64,
    pub z_star: f64,
    pub ratio_star: f64,
    /// The discrete derivative changes sign exactly once, from increasing to decreasing.
    pub is_unique: bool,
}

/// Maximum of `Q(z)/reference(z)` on each open gap `(lambda_(l), lambda_(l+1))`, `l` in `levels`.
pub fn gap_extrema(space: &Space, quantity: Quantity, reference: Reference, levels: Range<u64>) -> Result<Vec<GapExtremum>> {
    if !space.family().is_spherical() || !space.is_closed() {
        return Err(Error::Unsupported(format!("gap scans are implemented for spheres, not {space}")));
    }
    let gamma = match quantity {
        Quantity::R1 => 1,
        Quantity::R2 => 2,
        _ => return Err(Error::Unsupported(format!("{} is not smooth inside gaps", quantity.keyword()))),
    };
    if levels.is_empty() {
        return Ok(Vec::new());
    }
    let q = SpectrumQuery::laplacian(*space);
    let t = Spectrum::up_to_level(q, levels.end + 1)?;
    let out = levels
        .into_par_iter()
        .map(|l| {
            let (a, b) = (space.lambda(l) as f64, space.lambda(l + 1) as f64);
            let f = |z: f64| t.riesz(gamma, z) / reference.eval(z);
            let (mut lo, mut hi) = (a, b);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let mut c = hi - g * (hi - lo);
            let mut e = lo + g * (hi - lo);
            let (mut fc, mut fe) = (f(c), f(e));
            while hi - lo > 1e-10 * b {
                if fc > fe {
                    hi = e;
                    e = c;
                    fe = fc;
                    c = hi - g * (hi - lo);
                    fc = f(c);
                } else {
                    lo = c;
                    c = e;
                    fc = fe;
                    e = lo + g * (hi - lo);
                    fe = f(e);
                }
            }
            let z_star = 0.5 * (lo + hi);
            let n = 256;
            let vals: Vec<f64> = (0..n).map(|i| f(a + (b - a) * (i as f64 + 0.5) / n as f64)).collect();
            let signs: Vec<bool> = vals.windows(2).map(|w| w[1] > w[0]).collect();
            let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
            let is_unique = changes == 1 && signs[0] && !signs[signs.len() - 1];
            GapExtremum {
                level: l,
                z_star,
                ratio_star: f(z_star),
                is_unique,
            }
        })
        .collect();
    Ok(out)
}

/// CSV with header `z,series_label,value`, series in order, points in increasing `z`.
pub fn write_csv<W: io::Write>(series: &[Series], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["z", "series_label", "value"]).map_err(io_err)?;
    for s in series {
        for &(z, v) in &s.points {
            w.write_record([z.to_string(), s.label.clone(), v.to_string()]).map_err(io_err)?;
        }
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

/// Self-contained SVG with one polyline per series; the view box spans the data extents.
pub fn render_svg(series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (w, h) = ((x1 - x0).max(f64::MIN_POSITIVE), (y1 - y0).max(f64::MIN_POSITIVE));
    let palette = ["#1f77b4", "#d62728", "#9467bd", "#ff7f0e", "#2ca02c", "#8c564b"];
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 1000 600" preserveAspectRatio="none">"#
    );
    for (i, s) in series.iter().enumerate() {
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", (x - x0) / w * 1000.0, 600.0 - (y - y0) / h * 600.0))
            .collect();
        let _ = writeln!(
            svg,
            r#"  <polyline fill="none" stroke="{}" stroke-width="1" vector-effect="non-scaling-stroke" points="{}"><title>{}</title></polyline>"#,
            palette[i % palette.len()],
            coords.join(" "),
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get<'a>(s: &'a [Series], label: &str) -> &'a Series {
        s.iter().find(|x| x.label == label).unwrap()
    }

    #[test]
    fn f1_lower_touches_zero_at_levels() {
        let f = figure("f1", DEFAULT_RESOLUTION).unwrap();
        let lower = get(&f, "lower");
        for z in [2.0, 6.0, 12.0] {
            let v = lower.points.iter().find(|p| p.0 == z).unwrap().1;
            assert_eq!(v, 0.0);
        }
        assert!(lower.points.iter().all(|p| p.1 >= -1e-12));
        assert!(lower.points.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn f5_upper_nonpositive() {
        let f = figure("f5", DEFAULT_RESOLUTION).unwrap();
        let up = get(&f, "upper");
        assert!(up.points.iter().all(|p| p.1 <= 1e-12));
    }

    #[test]
    fn f10_p4_crosses_zero_near_81() {
        let f = figure("f10", DEFAULT_RESOLUTION).unwrap();
        let s = get(&f, "p=4");
        assert!(s.points.iter().any(|p| p.1 > 0.0 && p.0 > 70.0 && p.0 < 100.0));
        let s2 = get(&f, "p=2");
        assert!(s2.points.iter().all(|p| p.1 <= 1e-12));
    }

    #[test]
    fn f2_panels_nested() {
        let f = figure("f2", 10).unwrap();
        let p1 = get(&f, "weyl/panel1");
        let p3 = get(&f, "weyl/panel3");
        assert!(p3.points.len() < p1.points.len());
        assert_eq!(&p1.points[..p3.points.len()], &p3.points[..]);
    }

    #[test]
    fn unknown_figure() {
        assert!(figure("f11", 10).is_err());
    }

    #[test]
    fn gap_scan() {
        let s3 = Space::sphere(3).unwrap();
        let r = Reference::weyl(&s3, 1, 0.0).unwrap();
        let g = gap_extrema(&s3, Quantity::R1, r, 1..2).unwrap();
        assert!(g[0].is_unique && g[0].z_star > 3.0 && g[0].z_star < 8.0);
        assert!(gap_extrema(&s3, Quantity::R1, r, 3..3).unwrap().is_empty());
        let zd = bounds::shift_zd(3);
        let g = gap_extrema(&s3, Quantity::R1, Reference::weyl(&s3, 1, zd).unwrap(), 5..6).unwrap();
        let rho = 5.0 * 8.0 + 5.0 / 3.0 * zd;
        assert!((g[0].z_star - (rho - zd)).abs() < 1e-6);
    }

    #[test]
    fn csv_and_svg() {
        let s = vec![Series {
            label: "a".into(),
            points: vec![(1.0, 0.5), (2.0, -0.5)],
            grid_policy: GridPolicy::UniformInZ,
        }];
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "z,series_label,value\n1,a,0.5\n2,a,-0.5\n");
        assert_eq!(render_svg(&s).matches("<polyline").count(), 1);
    }
}
