//! Electronic black-box model with free half-line leads: reservoir
//! self-energies, the coupled sample Green's function, and the
//! Landauer-Buttiker transmission density, current, and conductance.

use crate::floquet::BandStructure;
use crate::numerics::{self, Interval, Quadrature};
use crate::potential::PotentialSpec;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Semi-infinite discrete Laplacian lead with Dirichlet condition, coupled
/// through its boundary site. The only reservoir kind in use; its ac
/// spectrum is (-2, 2).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ReservoirSpec {
    pub side: Side,
}

impl ReservoirSpec {
    /// dnu_ac/dE = sqrt(4 - E^2)/(2 pi) on (-2, 2), zero outside.
    pub fn spectral_density(&self, e: f64) -> f64 {
        if e.abs() < 2.0 {
            (4.0 - e * e).sqrt() / (2.0 * PI)
        } else {
            0.0
        }
    }

    pub fn self_energy(&self, e: f64) -> Complex64 {
        lead_self_energy(e)
    }

    /// Open interval of nonzero lead density.
    pub fn ac_support(&self) -> (f64, f64) {
        (-2.0, 2.0)
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Reservoirs {
    pub left: ReservoirSpec,
    pub right: ReservoirSpec,
}

impl Default for Reservoirs {
    fn default() -> Self {
        Reservoirs {
            left: ReservoirSpec { side: Side::Left },
            right: ReservoirSpec { side: Side::Right },
        }
    }
}

/// Boundary value of the lead resolvent at its coupling site,
/// Sigma(E) = (-E + i sqrt(4-E^2))/2 inside the band and the real branch of
/// modulus <= 1 outside; Im Sigma = pi * (lead spectral density).
pub fn lead_self_energy(e: f64) -> Complex64 {
    if e.abs() < 2.0 {
        Complex64::new(-e / 2.0, (4.0 - e * e).sqrt() / 2.0)
    } else {
        Complex64::new((-e + e.signum() * (e * e - 4.0).sqrt()) / 2.0, 0.0)
    }
}

/// One point of the transmission density.
#[derive(Debug, Clone, Copy)]
pub struct LBPoint {
    pub e: f64,
    pub green_1l: Complex64,
    pub density: f64,
}

/// The matrix element <delta_1, (h_kappa,L - E - i0)^-1 delta_L> by Schur
/// complement onto the sample: the leads enter as kappa^2 Sigma corrections
/// on the endpoint diagonal entries (both on the single site when L = 1).
pub fn coupled_green_1l(v: &PotentialSpec, l: u32, kappa: f64, e: f64) -> Result<Complex64> {
    if l < 1 {
        return Err(Error::InvalidInput("coupled Green needs L >= 1".into()));
    }
    if kappa == 0.0 {
        return Err(Error::InvalidInput("coupling kappa must be nonzero".into()));
    }
    let n = l as usize;
    let k2 = kappa * kappa;
    let sigma = lead_self_energy(e);
    let mut diag: Vec<Complex64> = Vec::with_capacity(n);
    for i in 0..n {
        diag.push(Complex64::new(v.eval(i as i64 + 1)? - e, 0.0));
    }
    diag[0] -= k2 * sigma;
    diag[n - 1] -= k2 * sigma;
    let off = vec![-1.0; n.saturating_sub(1)];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    rhs[n - 1] = Complex64::new(1.0, 0.0);
    match numerics::tridiag_solve_complex(&diag, &off, &rhs) {
        Ok(x) => Ok(x[0]),
        // A singular coupled system is only possible when the self-energies
        // are real, i.e. the sample has decoupled from the lead continuum.
        Err(Error::NearSingular(p)) => Err(Error::DecoupledResonance(p)),
        Err(err) => Err(err),
    }
}

/// D_LB(L,E) = 2 pi kappa^4 |G(1,L;E)|^2 nu'_l(E) nu'_r(E); exactly zero
/// outside the common lead band, negative round-off clamped to zero.
pub fn lb_density(
    v: &PotentialSpec,
    l: u32,
    kappa: f64,
    reservoirs: &Reservoirs,
    e: f64,
) -> Result<LBPoint> {
    let nu_l = reservoirs.left.spectral_density(e);
    let nu_r = reservoirs.right.spectral_density(e);
    if nu_l == 0.0 || nu_r == 0.0 {
        let green = match coupled_green_1l(v, l, kappa, e) {
            Ok(g) => g,
            // Resonances outside the lead band carry zero density anyway.
            Err(Error::DecoupledResonance(_)) => Complex64::new(f64::INFINITY, 0.0),
            Err(err) => return Err(err),
        };
        return Ok(LBPoint {
            e,
            green_1l: green,
            density: 0.0,
        });
    }
    let green = coupled_green_1l(v, l, kappa, e)?;
    let density = 2.0 * PI * kappa.powi(4) * green.norm_sqr() * nu_l * nu_r;
    Ok(LBPoint {
        e,
        green_1l: green,
        density: density.max(0.0),
    })
}

/// J_LB = integral of D_LB over (mu_l, mu_r).
pub fn lb_current(
    v: &PotentialSpec,
    l: u32,
    kappa: f64,
    reservoirs: &Reservoirs,
    window: Interval,
    tol: f64,
) -> Result<Quadrature> {
    // Split at the lead band edges so the quadrature never straddles the
    // square-root vanishing of the density.
    let pieces = [
        (window.lo(), window.lo().max(-2.0).min(window.hi())),
        (
            window.lo().max(-2.0).min(window.hi()),
            window.hi().min(2.0).max(window.lo()),
        ),
        (window.hi().min(2.0).max(window.lo()), window.hi()),
    ];
    let mut value = 0.0;
    let mut converged = true;
    for (a, b) in pieces {
        if b - a <= 0.0 {
            continue;
        }
        if b <= -2.0 || a >= 2.0 {
            continue; // zero density outside the lead band
        }
        let q = numerics::integrate_res(
            |e| lb_density(v, l, kappa, reservoirs, e).map(|p| p.density),
            Interval::new(a, b)?,
            tol,
        )?;
        value += q.value;
        converged &= q.converged;
    }
    Ok(Quadrature { value, converged })
}

/// G_LB = J_LB / (mu_r - mu_l), in [0, 1/(2 pi)].
pub fn lb_conductance(
    v: &PotentialSpec,
    l: u32,
    kappa: f64,
    reservoirs: &Reservoirs,
    window: Interval,
    tol: f64,
) -> Result<f64> {
    Ok(lb_current(v, l, kappa, reservoirs, window, tol)?.value / window.len())
}

/// Transparent reservoirs: the open window must lie strictly inside the
/// common lead band (-2, 2); boundary-touching windows are rejected.
pub fn transparency_check(reservoirs: &Reservoirs, window: Interval) -> bool {
    let (ll, lh) = reservoirs.left.ac_support();
    let (rl, rh) = reservoirs.right.ac_support();
    window.lo() > ll.max(rl) && window.hi() < lh.min(rh)
}

/// Crystalline limit of the transmission density: 1/(2 pi) on the spectrum
/// of the periodized operator, 0 elsewhere.
pub fn crystalline_lb_density(bands: &BandStructure, e: f64) -> f64 {
    if bands.band_containing(e).is_some() {
        1.0 / (2.0 * PI)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet;

    #[test]
    fn self_energy_values() {
        assert!((lead_self_energy(0.0) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((lead_self_energy(2.0) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((lead_self_energy(-2.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let s3 = lead_self_energy(3.0);
        assert!((s3.re - (-3.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-15 && s3.im == 0.0);
        for e in [-1.9, -0.3, 0.0, 1.4, 2.5, -3.0] {
            assert!(lead_self_energy(e).norm() <= 1.0 + 1e-12);
        }
    }

    // Truncated-lead oracle: <delta_1, (h_N - E - i eta)^-1 delta_1> of an
    // N-site Dirichlet chain approaches Sigma(E) as N grows, eta -> 0.
    #[test]
    fn self_energy_truncated_lead_oracle() {
        let n = 10_000;
        for &e in &[0.0f64, 0.7, -1.3, 3.0] {
            let eta = if e.abs() < 2.0 { 1e-3 } else { 1e-9 };
            let diag: Vec<Complex64> = (0..n).map(|_| Complex64::new(-e, -eta)).collect();
            let off = vec![-1.0; n - 1];
            let mut rhs = vec![Complex64::new(0.0, 0.0); n];
            rhs[0] = Complex64::new(1.0, 0.0);
            let g = numerics::tridiag_solve_complex(&diag, &off, &rhs).unwrap()[0];
            let tol = if e.abs() < 2.0 { 2e-3 } else { 1e-6 };
            assert!((g - lead_self_energy(e)).norm() < tol, "E={e}: {g}");
        }
    }

    #[test]
    fn self_energy_density_consistency() {
        let r = ReservoirSpec { side: Side::Left };
        for e in [-1.99, -1.0, 0.0, 0.5, 1.9, 2.0, 2.7] {
            assert!((lead_self_energy(e).im - PI * r.spectral_density(e)).abs() < 1e-12);
        }
    }

    #[test]
    fn free_green_modulus() {
        let v = PotentialSpec::zero();
        for l in [1u32, 2, 7, 40] {
            for e in [0.0, 0.9, -1.5] {
                let g = coupled_green_1l(&v, l, 1.0, e).unwrap();
                let expect = 1.0 / (4.0 - e * e).sqrt();
                assert!((g.norm() - expect).abs() < 1e-12, "L={l} E={e}");
            }
        }
    }

    #[test]
    fn green_reflection_symmetry() {
        let v = PotentialSpec::anderson(3.0, 9);
        let l = 25u32;
        let rev_values: Vec<f64> = (1..=l as i64).rev().map(|n| v.eval(n).unwrap()).collect();
        let rev = PotentialSpec::periodic(rev_values);
        for e in [0.3, -1.1, 1.8] {
            let a = coupled_green_1l(&v, l, 0.8, e).unwrap().norm();
            let b = coupled_green_1l(&rev, l, 0.8, e).unwrap().norm();
            assert!((a - b).abs() < 1e-12 * a.max(1.0), "E={e}: {a} vs {b}");
        }
    }

    #[test]
    fn free_density_is_perfect_transmission() {
        let v = PotentialSpec::zero();
        let res = Reservoirs::default();
        for l in [1u32, 8, 100] {
            for i in 0..20 {
                let e = -1.9 + 3.8 * i as f64 / 19.0;
                let d = lb_density(&v, l, 1.0, &res, e).unwrap().density;
                assert!((d - 1.0 / (2.0 * PI)).abs() < 1e-8, "L={l} E={e}: {d}");
            }
        }
    }

    #[test]
    fn density_outside_lead_band_is_zero() {
        let res = Reservoirs::default();
        let v = PotentialSpec::constant(5.0);
        for e in [2.0, 2.5, -2.0, -10.0] {
            assert_eq!(lb_density(&v, 6, 1.0, &res, e).unwrap().density, 0.0);
        }
    }

    #[test]
    fn weak_coupling_suppression() {
        let v = PotentialSpec::zero();
        let res = Reservoirs::default();
        let mut prev = 1.0 / (2.0 * PI);
        for kappa in [0.5, 0.1, 0.01] {
            let d = lb_density(&v, 4, kappa, &res, 0.0).unwrap().density;
            assert!(d > 0.0 && d < prev, "kappa={kappa}: {d}");
            prev = d;
        }
    }

    #[test]
    fn unitarity_bound_sampled() {
        let res = Reservoirs::default();
        for (v, l) in [
            (PotentialSpec::zero(), 50u32),
            (PotentialSpec::anderson(2.0, 1), 64),
            (PotentialSpec::periodic(vec![0.0, 2.0]), 40),
        ] {
            for i in 0..60 {
                let e = -2.2 + 4.4 * i as f64 / 59.0;
                let d = lb_density(&v, l, 1.0, &res, e).unwrap().density;
                assert!(
                    (-1e-12..=1.0 / (2.0 * PI) + 1e-9).contains(&d),
                    "E={e}: {d}"
                );
            }
        }
    }

    #[test]
    fn free_current_and_conductance() {
        let v = PotentialSpec::zero();
        let res = Reservoirs::default();
        let w = Interval::new(-1.0, 1.0).unwrap();
        let j = lb_current(&v, 12, 1.0, &res, w, 1e-10).unwrap();
        assert!(j.converged && (j.value - 1.0 / PI).abs() < 1e-7);
        let g = lb_conductance(&v, 12, 1.0, &res, w, 1e-10).unwrap();
        assert!((g - 1.0 / (2.0 * PI)).abs() < 1e-7);
    }

    #[test]
    fn current_outside_band_and_additivity() {
        let res = Reservoirs::default();
        let v = PotentialSpec::anderson(1.0, 2);
        let out = lb_current(&v, 8, 1.0, &res, Interval::new(-3.0, -2.5).unwrap(), 1e-9).unwrap();
        assert_eq!(out.value, 0.0);
        let tol = 1e-9;
        let full = lb_current(&v, 8, 1.0, &res, Interval::new(-1.2, 1.4).unwrap(), tol).unwrap();
        let a = lb_current(&v, 8, 1.0, &res, Interval::new(-1.2, 0.3).unwrap(), tol).unwrap();
        let b = lb_current(&v, 8, 1.0, &res, Interval::new(0.3, 1.4).unwrap(), tol).unwrap();
        assert!((full.value - a.value - b.value).abs() < 3.0 * tol);
        assert!(full.value <= 2.6 / (2.0 * PI) + 1e-9);
    }

    #[test]
    fn transparency_boundary_convention() {
        let res = Reservoirs::default();
        assert!(transparency_check(&res, Interval::new(-1.0, 1.0).unwrap()));
        assert!(!transparency_check(&res, Interval::new(-3.0, 1.0).unwrap()));
        assert!(!transparency_check(&res, Interval::new(-2.0, 2.0).unwrap()));
    }

    #[test]
    fn crystalline_density_cases() {
        let free = floquet::band_edges(&PotentialSpec::zero(), 8).unwrap();
        assert!((crystalline_lb_density(&free, 1.0) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let gapped = floquet::band_edges(&PotentialSpec::periodic(vec![0.0, 2.0]), 2).unwrap();
        assert_eq!(crystalline_lb_density(&gapped, 1.0), 0.0);
        // Integral over (-1,1) for the free chain equals 1/pi.
        let q = numerics::integrate(
            |e| crystalline_lb_density(&free, e),
            Interval::new(-1.0, 1.0).unwrap(),
            1e-12,
        )
        .unwrap();
        assert!((q.value - 1.0 / PI).abs() < 1e-10);
    }
}
