use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use super::eigen::Eigensystem;
use super::projection::Projection;
use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::operator_lab::TruncatedOperator;

/// Minimum distance between an eigenvalue and the contour.
pub const CONTOUR_CLEARANCE: f64 = 1e-8;

/// Upper limit for the pole-adapted trapezoidal rule on circles.
pub const MAX_CIRCLE_NODES: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Contour {
    Circle {
        center: Complex64,
        radius: f64,
    },
    /// Boundary of `[re_lo, re_hi] x [im_lo, im_hi]`.
    Rect {
        re_lo: f64,
        re_hi: f64,
        im_lo: f64,
        im_hi: f64,
    },
}

impl Contour {
    fn distance(&self, z: Complex64) -> f64 {
        match *self {
            Contour::Circle { center, radius } => ((z - center).norm() - radius).abs(),
            Contour::Rect {
                re_lo,
                re_hi,
                im_lo,
                im_hi,
            } => {
                let inside = z.re >= re_lo && z.re <= re_hi && z.im >= im_lo && z.im <= im_hi;
                if inside {
                    (z.re - re_lo)
                        .min(re_hi - z.re)
                        .min(z.im - im_lo)
                        .min(im_hi - z.im)
                } else {
                    let ex = (re_lo - z.re).max(z.re - re_hi).max(0.0);
                    let ey = (im_lo - z.im).max(z.im - im_hi).max(0.0);
                    ex.hypot(ey)
                }
            }
        }
    }

    pub fn encloses(&self, z: Complex64) -> bool {
        match *self {
            Contour::Circle { center, radius } => (z - center).norm() < radius,
            Contour::Rect {
                re_lo,
                re_hi,
                im_lo,
                im_hi,
            } => z.re > re_lo && z.re < re_hi && z.im > im_lo && z.im < im_hi,
        }
    }

    /// Nodes `z_k` and weights `w_k` with `(2 pi i)^{-1} \oint f dz ~ sum w_k f(z_k)`.
    /// Circles use the trapezoidal rule with `nodes` points, rectangles
    /// Gauss-Legendre with `nodes` points per side.
    pub fn rule(&self, nodes: usize) -> Result<Vec<(Complex64, Complex64)>> {
        self.rule_near(nodes, &[])
    }

    /// As [`Contour::rule`], but adapted to the poles. Circles raise the
    /// trapezoidal node count until `rho^n <= 1e-17`, where `rho < 1` is the
    /// worst ratio `|p - c| / r` (inside) or `r / |p - c|` (outside), capped
    /// at [`MAX_CIRCLE_NODES`]. Rectangle sides are Gauss-Legendre panels of
    /// `nodes / 4` points, bisected until no pole in `poles` is closer to a
    /// panel than its half-length. A single rule per side converges like
    /// `(1 + d/L)^{-2n}` for a pole at distance `d` from a side of half-length
    /// `L`, which is useless for long sides next to an eigenvalue.
    pub fn rule_near(
        &self,
        nodes: usize,
        poles: &[Complex64],
    ) -> Result<Vec<(Complex64, Complex64)>> {
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        match *self {
            Contour::Circle { center, radius } => {
                if !(radius > 0.0) {
                    return Err(invalid("circle radius must be positive"));
                }
                let rho = poles
                    .iter()
                    .map(|p| {
                        let d = (p - center).norm();
                        if d < radius {
                            d / radius
                        } else {
                            radius / d
                        }
                    })
                    .fold(0.0, f64::max);
                let nodes = if rho > 0.0 && rho < 1.0 {
                    let need = (17.0 * std::f64::consts::LN_10 / -rho.ln()).ceil();
                    nodes.max(need.min(MAX_CIRCLE_NODES as f64) as usize)
                } else {
                    nodes
                };
                let n = nodes as f64;
                Ok((0..nodes)
                    .map(|k| {
                        let e = Complex64::from_polar(
                            radius,
                            2.0 * std::f64::consts::PI * k as f64 / n,
                        );
                        (center + e, e / n)
                    })
                    .collect())
            }
            Contour::Rect {
                re_lo,
                re_hi,
                im_lo,
                im_hi,
            } => {
                if !(re_hi > re_lo && im_hi > im_lo) {
                    return Err(invalid("degenerate rectangle"));
                }
                let per_panel = (nodes / 4).max(4);
                let gl = GaussLegendre::new(per_panel)
                    .map_err(|e| invalid(format!("Gauss-Legendre rule: {e}")))?;
                let corners = [
                    Complex64::new(re_lo, im_lo),
                    Complex64::new(re_hi, im_lo),
                    Complex64::new(re_hi, im_hi),
                    Complex64::new(re_lo, im_hi),
                ];
                let mut panels = Vec::new();
                for s in 0..4 {
                    let (a, b) = (corners[s], corners[(s + 1) % 4]);
                    for q in 0..4 {
                        split_panel(
                            a + (b - a) * (q as f64 / 4.0),
                            a + (b - a) * ((q + 1) as f64 / 4.0),
                            poles,
                            0,
                            &mut panels,
                        );
                    }
                }
                let mut out = Vec::with_capacity(panels.len() * per_panel);
                for (a, b) in panels {
                    let half = (b - a) / 2.0;
                    for (x, w) in gl.iter() {
                        out.push((a + half * (x + 1.0), half * *w / two_pi_i));
                    }
                }
                Ok(out)
            }
        }
    }
}

const MAX_PANEL_DEPTH: usize = 40;

fn segment_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let d = b - a;
    let t = (((z - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    (a + d * t - z).norm()
}

fn split_panel(
    a: Complex64,
    b: Complex64,
    poles: &[Complex64],
    depth: usize,
    out: &mut Vec<(Complex64, Complex64)>,
) {
    let half = (b - a).norm() / 2.0;
    let close = poles.iter().any(|&z| segment_distance(a, b, z) < half);
    if close && depth < MAX_PANEL_DEPTH {
        let m = (a + b) / 2.0;
        split_panel(a, m, poles, depth + 1, out);
        split_panel(m, b, poles, depth + 1, out);
    } else {
        out.push((a, b));
    }
}

/// Fails if some eigenvalue sits within [`CONTOUR_CLEARANCE`] of the contour.
pub fn check_clearance(eigs: &Eigensystem, contour: &Contour) -> Result<()> {
    for p in eigs.pairs() {
        let d = contour.distance(p.lambda);
        if d < CONTOUR_CLEARANCE {
            return Err(Error::NearContour {
                lambda: p.lambda,
                distance: d,
            });
        }
    }
    Ok(())
}

/// `acc += w (z - U)^{-1}` for upper triangular `U`, by column
/// back-substitution.
fn add_triangular_resolvent(
    acc: &mut CMatrix,
    u: &CMatrix,
    z: Complex64,
    w: Complex64,
) -> Result<()> {
    let n = u.nrows();
    let diag: Vec<Complex64> = (0..n).map(|i| z - u[(i, i)]).collect();
    if let Some(i) = diag.iter().position(|d| d.norm() == 0.0) {
        return Err(Error::Singular(format!(
            "z - T at z = {z} (eigenvalue {})",
            u[(i, i)]
        )));
    }
    let us = u.as_slice();
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        b[..=j].fill(Complex64::new(0.0, 0.0));
        b[j] = Complex64::new(1.0, 0.0);
        // column-oriented back-substitution; (z - U)_{il} = -U_{il} for l > i
        for l in (0..=j).rev() {
            let yl = b[l] / diag[l];
            b[l] = yl;
            let col = &us[l * n..l * n + l];
            for (bi, ui) in b[..l].iter_mut().zip(col) {
                *bi += ui * yl;
            }
        }
        for i in 0..=j {
            acc[(i, j)] += w * b[i];
        }
    }
    Ok(())
}

/// Quadrature of `(2 pi i)^{-1} \oint (z - T)^{-1} dz`, evaluated only on the
/// components of `T` that have eigenvalues inside (the others contribute
/// exactly zero). Each node costs one triangular inverse in the Schur
/// basis, `(z - T)^{-1} = Q (z - U)^{-1} Q^H`.
pub fn contour_projection(
    eigs: &Eigensystem,
    contour: &Contour,
    nodes: usize,
) -> Result<Projection> {
    if nodes < 16 {
        return Err(invalid(format!(
            "at least 16 quadrature nodes required, got {nodes}"
        )));
    }
    check_clearance(eigs, contour)?;
    let mut comps: Vec<usize> = eigs
        .pairs()
        .iter()
        .filter(|p| contour.encloses(p.lambda))
        .map(|p| p.component)
        .collect();
    comps.sort_unstable();
    comps.dedup();
    if comps.is_empty() {
        return Ok(Projection::zero());
    }
    let mut support: Vec<usize> = comps
        .iter()
        .flat_map(|&c| eigs.components()[c].iter().copied())
        .collect();
    support.sort_unstable();
    let mut matrix = CMatrix::zeros(support.len(), support.len());
    for &c in &comps {
        let idx = &eigs.components()[c];
        let (q, u) = eigs.schur(c);
        let n = u.nrows();
        let poles: Vec<Complex64> = (0..n).map(|i| u[(i, i)]).collect();
        let rule = contour.rule_near(nodes, &poles)?;
        let mut acc = CMatrix::zeros(n, n);
        for &(z, w) in &rule {
            add_triangular_resolvent(&mut acc, u, z, w)?;
        }
        let acc = q * acc * q.adjoint();
        let pos: Vec<usize> = idx
            .iter()
            .map(|i| support.binary_search(i).unwrap())
            .collect();
        for (a, &i) in pos.iter().enumerate() {
            for (b, &j) in pos.iter().enumerate() {
                matrix[(i, j)] = acc[(a, b)];
            }
        }
    }
    Ok(Projection::Block { support, matrix })
}

/// Dense Riesz projection for the circle `|z - center| = radius` by the
/// trapezoidal rule.
pub fn riesz_projection_contour(
    t: &TruncatedOperator,
    center: Complex64,
    radius: f64,
    quad_nodes: usize,
) -> Result<CMatrix> {
    let eigs = Eigensystem::new(t.matrix())?;
    let p = contour_projection(&eigs, &Contour::Circle { center, radius }, quad_nodes)?;
    Ok(p.to_dense(t.size()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn circle_rule_adapts_to_a_pole_near_the_boundary() {
        let circle = Contour::Circle {
            center: c(0.0, 0.0),
            radius: 0.5,
        };
        let pole = c(0.43, 0.0);
        let sum = |rule: Vec<(Complex64, Complex64)>| -> Complex64 {
            rule.iter().map(|&(z, w)| w / (z - pole)).sum()
        };
        // 64 plain nodes leave rho^64 ~ 6e-5
        assert!((sum(circle.rule(64).unwrap()) - 1.0).norm() > 1e-6);
        let adapted = circle.rule_near(64, &[pole]).unwrap();
        assert!(adapted.len() > 64 && adapted.len() <= MAX_CIRCLE_NODES);
        assert!((sum(adapted) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn rules_integrate_one_over_z() {
        for contour in [
            Contour::Circle {
                center: c(0.3, 0.1),
                radius: 1.0,
            },
            Contour::Rect {
                re_lo: -1.0,
                re_hi: 2.0,
                im_lo: -0.5,
                im_hi: 3.0,
            },
        ] {
            let s: Complex64 = contour.rule(64).unwrap().iter().map(|(z, w)| w / z).sum();
            assert!((s - c(1.0, 0.0)).norm() < 1e-12, "{contour:?} {s}");
        }
    }

    #[test]
    fn panels_resolve_pole_near_long_side() {
        let r = Contour::Rect {
            re_lo: -19.0,
            re_hi: 54.5,
            im_lo: -21.0,
            im_hi: 21.0,
        };
        for p in [c(54.0, 0.0), c(55.0, 0.0), c(0.0, 20.9)] {
            let inside = if r.encloses(p) { 1.0 } else { 0.0 };
            let plain: Complex64 = r.rule(64).unwrap().iter().map(|(z, w)| w / (z - p)).sum();
            let adapted: Complex64 = r
                .rule_near(64, &[p])
                .unwrap()
                .iter()
                .map(|(z, w)| w / (z - p))
                .sum();
            assert!((adapted - inside).norm() < 1e-12, "{p} {adapted}");
            assert!((plain - inside).norm() > 1e-6, "{p} {plain}");
        }
    }

    #[test]
    fn rect_distance() {
        let r = Contour::Rect {
            re_lo: 0.0,
            re_hi: 2.0,
            im_lo: -1.0,
            im_hi: 1.0,
        };
        assert!((r.distance(c(1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((r.distance(c(3.0, 2.0)) - 2f64.sqrt()).abs() < 1e-15);
    }
}
