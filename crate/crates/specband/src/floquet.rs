//! The periodized operator h_per,L: discriminant, spectral bands, Bloch
//! waves, rotation number, Thouless conductance, and the audits of the
//! band-width, transfer-bound and Deift-Simon inequalities.

use crate::numerics::{self, Interval, ScaledMatrix};
use crate::potential::PotentialSpec;
use crate::transfer::{self, step_factor};
use crate::{Error, Result};
use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Discriminant
// ---------------------------------------------------------------------------

/// D(E) = tr T(L,E) and its energy derivative, carried in a joint scaled
/// representation so that gap energies at large L do not overflow before the
/// trace is taken.
#[derive(Debug, Clone, Copy)]
pub struct DiscriminantPoint {
    /// Trace of the unit-scale product.
    pub d_unit: f64,
    /// Trace of the unit-scale derivative product.
    pub dp_unit: f64,
    /// Shared log magnitude removed from both traces.
    pub log_scale: f64,
}

impl DiscriminantPoint {
    /// D(E). May overflow to infinity deep in a gap at very large L; the
    /// sign of `d_unit` is always usable for bracketing.
    pub fn d(&self) -> f64 {
        self.d_unit * self.log_scale.exp()
    }

    /// D'(E), same caveat as [`Self::d`].
    pub fn d_prime(&self) -> f64 {
        self.dp_unit * self.log_scale.exp()
    }
}

/// Product-rule recursion for (T, dT/dE): the per-site factor derivative is
/// [[-1,0],[0,0]], and both running products share one renormalization.
pub fn discriminant(v: &PotentialSpec, l: u32, e: f64) -> Result<DiscriminantPoint> {
    if l < 1 {
        return Err(Error::InvalidInput("discriminant needs L >= 1".into()));
    }
    let mut p = [[1.0f64, 0.0], [0.0, 1.0]];
    let mut q = [[0.0f64, 0.0], [0.0, 0.0]];
    let mut log_scale = 0.0;
    for n in 1..=l as i64 {
        let a = step_factor(v.eval(n)?, e);
        let mul = |x: &[[f64; 2]; 2], y: &[[f64; 2]; 2]| {
            [
                [
                    x[0][0] * y[0][0] + x[0][1] * y[1][0],
                    x[0][0] * y[0][1] + x[0][1] * y[1][1],
                ],
                [
                    x[1][0] * y[0][0] + x[1][1] * y[1][0],
                    x[1][0] * y[0][1] + x[1][1] * y[1][1],
                ],
            ]
        };
        // dA/dE = [[-1,0],[0,0]] picks out the first row of p.
        let ap = mul(&a, &p);
        let mut aq = mul(&a, &q);
        aq[0][0] -= p[0][0];
        aq[0][1] -= p[0][1];
        p = ap;
        q = aq;
        let f =
            (p[0][0] * p[0][0] + p[0][1] * p[0][1] + p[1][0] * p[1][0] + p[1][1] * p[1][1]).sqrt();
        if !(0.5..=2.0).contains(&f) && f > 0.0 && f.is_finite() {
            for row in p.iter_mut().chain(q.iter_mut()) {
                row[0] /= f;
                row[1] /= f;
            }
            log_scale += f.ln();
        }
    }
    Ok(DiscriminantPoint {
        d_unit: p[0][0] + p[1][1],
        dp_unit: q[0][0] + q[1][1],
        log_scale,
    })
}

// ---------------------------------------------------------------------------
// Band structure
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// D goes from +2 to -2 across the band (odd bands).
    Decreasing,
    /// D goes from -2 to +2 (even bands).
    Increasing,
}

#[derive(Debug, Clone, Copy)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    /// The unique zero of D inside the band.
    pub zero: f64,
    pub orientation: Orientation,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone)]
pub struct BandStructure {
    pub l: u32,
    pub bands: Vec<Band>,
    /// Gap extrema E_{m,ell} of D for ell = 0..=L, with -inf and +inf at the
    /// extremal positions. Zero-width gaps carry the touching point.
    pub gap_extrema: Vec<f64>,
}

impl BandStructure {
    /// |sp(h_per,L) ∩ I|.
    pub fn spectrum_measure(&self, window: Interval) -> f64 {
        self.bands.iter().map(|b| window.overlap(b.lo, b.hi)).sum()
    }

    /// Total band measure |sp(h_per,L)|.
    pub fn total_measure(&self) -> f64 {
        self.bands.iter().map(|b| b.width()).sum()
    }

    /// Index of the band whose closure contains `e`, if any.
    pub fn band_containing(&self, e: f64) -> Option<usize> {
        self.bands.iter().position(|b| b.lo <= e && e <= b.hi)
    }
}

/// Periodic (corner -1) or antiperiodic (corner +1) restriction of h_per,L
/// as a dense symmetric matrix, handling the L = 1, 2 corner collisions.
fn floquet_matrix(v: &PotentialSpec, l: u32, antiperiodic: bool) -> Result<Vec<f64>> {
    let n = l as usize;
    let corner = if antiperiodic { 1.0 } else { -1.0 };
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = v.eval(i as i64 + 1)?;
    }
    match n {
        1 => a[0] += 2.0 * corner,
        2 => {
            // Hopping and Bloch corner land on the same entry.
            let x = -1.0 + corner;
            a[1] = x;
            a[2] = x;
        }
        _ => {
            for i in 0..n - 1 {
                a[i * n + i + 1] = -1.0;
                a[(i + 1) * n + i] = -1.0;
            }
            a[n - 1] = corner;
            a[(n - 1) * n] = corner;
        }
    }
    Ok(a)
}

/// Band edges from the periodic and antiperiodic eigensolves, discriminant
/// zeros per band, and gap extrema of D between consecutive bands.
pub fn band_edges(v: &PotentialSpec, l: u32) -> Result<BandStructure> {
    if l < 1 {
        return Err(Error::InvalidInput("band structure needs L >= 1".into()));
    }
    let n = l as usize;
    let per = numerics::sym_eig(&floquet_matrix(v, l, false)?, n)?;
    let anti = numerics::sym_eig(&floquet_matrix(v, l, true)?, n)?;

    let scale = per
        .iter()
        .chain(anti.iter())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-8 * scale;

    let mut bands: Vec<Band> = Vec::with_capacity(n);
    for ell in 0..n {
        let (lo, hi, orientation) = if ell % 2 == 0 {
            (per[ell], anti[ell], Orientation::Decreasing)
        } else {
            (anti[ell], per[ell], Orientation::Increasing)
        };
        if lo > hi + tol {
            return Err(Error::InternalConsistency(format!(
                "edge interlacing violated in band {}: {lo} > {hi}",
                ell + 1
            )));
        }
        if ell > 0 && bands[ell - 1].hi > lo + tol {
            return Err(Error::InternalConsistency(format!(
                "bands {} and {} overlap beyond tolerance",
                ell,
                ell + 1
            )));
        }
        bands.push(Band {
            lo: lo.min(hi),
            hi: hi.max(lo),
            zero: 0.0,
            orientation,
        });
    }

    // Discriminant zeros: D is +-2 at the edges with opposite signs, so the
    // band itself brackets the unique zero.
    for band in bands.iter_mut() {
        if band.width() < 1e-12 {
            band.zero = 0.5 * (band.lo + band.hi);
            continue;
        }
        let bracket = Interval::new(band.lo, band.hi)?;
        let root_tol = (band.width() * 1e-12).max(1e-14);
        band.zero = match numerics::find_root(
            |e| discriminant(v, l, e).map(|p| p.d()).unwrap_or(f64::NAN),
            bracket,
            root_tol,
        ) {
            Ok(r) => r,
            Err(Error::InvalidBracket) => 0.5 * (band.lo + band.hi),
            Err(e) => return Err(e),
        };
    }

    // Gap extrema of D; the sign of the unit-scale trace derivative is used
    // so that deep gaps at large L cannot overflow the bracketing function.
    let mut gap_extrema = Vec::with_capacity(n + 1);
    gap_extrema.push(f64::NEG_INFINITY);
    for ell in 1..n {
        let (glo, ghi) = (bands[ell - 1].hi, bands[ell].lo);
        if ghi - glo < 1e-12 {
            gap_extrema.push(0.5 * (glo + ghi));
            continue;
        }
        let extremum = match numerics::find_root(
            |e| discriminant(v, l, e).map(|p| p.dp_unit).unwrap_or(f64::NAN),
            Interval::new(glo, ghi)?,
            ((ghi - glo) * 1e-12).max(1e-14),
        ) {
            Ok(r) => r,
            // Tangent or rounding case: fall back to a scan for the extremum
            // of |D| over the gap.
            Err(Error::InvalidBracket) => {
                let mut best = (glo, 0.0f64);
                for i in 0..=64 {
                    let e = glo + (ghi - glo) * i as f64 / 64.0;
                    let p = discriminant(v, l, e)?;
                    let mag = p.d_unit.abs().ln() + p.log_scale;
                    if mag > best.1 || i == 0 {
                        best = (e, mag);
                    }
                }
                best.0
            }
            Err(e) => return Err(e),
        };
        gap_extrema.push(extremum);
    }
    gap_extrema.push(f64::INFINITY);

    Ok(BandStructure {
        l,
        bands,
        gap_extrema,
    })
}

/// G_Th = |sp(h_per,L) ∩ (mu_l, mu_r)| / (2π(mu_r - mu_l)).
pub fn thouless_conductance(bands: &BandStructure, window: Interval) -> f64 {
    bands.spectrum_measure(window) / (2.0 * PI * window.len())
}

// ---------------------------------------------------------------------------
// Bloch states
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct BlochState {
    /// Quasi-momentum label arccos(D/2)/L in (0, π/L).
    pub k: f64,
    /// Period amplitudes u(1..L) as (re, im) pairs, normalized to unit l2
    /// norm over one period with u(1) real and positive.
    pub u: Vec<(f64, f64)>,
    /// Transfer eigenvalue e^{±ikL} used for periodic continuation
    /// u(L+1) = wrap · u(1).
    pub wrap: (f64, f64),
    /// E'(k) from the Feynman-Hellmann route 2L Im(conj(u(1)) u(2)).
    pub de_dk: f64,
    /// Set when |u(1)| fell below threshold and the phase was fixed on the
    /// first above-threshold component instead.
    pub phase_fallback: bool,
}

impl BlochState {
    pub fn site_abs(&self, m: usize) -> f64 {
        let (re, im) = self.u[m];
        re.hypot(im)
    }

    /// 2L Im(conj(u(m)) u(m+1)) with Bloch continuation; m in 1..=L.
    pub fn fh_at(&self, m: usize) -> f64 {
        let l = self.u.len();
        let (ar, ai) = self.u[m - 1];
        let (br, bi) = if m < l {
            self.u[m]
        } else {
            let (r, i) = self.u[0];
            let (c, s) = self.wrap;
            (r * c - i * s, r * s + i * c)
        };
        2.0 * l as f64 * (ar * bi - ai * br)
    }
}

/// Bloch wave at an energy strictly inside a band: the transfer matrix
/// eigenvector (u(1), u(0)) for the e^{+ikL} eigenvalue, propagated over one
/// period by the three-term recursion. The branch is cross-checked against
/// the sign -sign(D') that the band orientation demands.
// `!(x < y)` deliberately routes NaN discriminants into the error arm.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn bloch_state(v: &PotentialSpec, l: u32, e: f64) -> Result<BlochState> {
    let disc = discriminant(v, l, e)?;
    let d = disc.d();
    if !(d.abs() < 2.0 - 1e-9) {
        return Err(Error::BandEdge(d.abs()));
    }
    let kl = (d / 2.0).acos(); // in (0, π)
    let k = kl / l as f64;
    let t = transfer_matrix_plain(v, l, e)?;
    let (a, b, c, dd) = (t[0][0], t[0][1], t[1][0], t[1][1]);
    let s = (1.0 - (d / 2.0) * (d / 2.0)).sqrt(); // Im of e^{ikL}
                                                  // Eigenvector (x1, x2) = (u(1), u(0)) of [[a,b],[c,d]] for
                                                  // lambda = d/2 + i s; two algebraic candidates, take the better
                                                  // conditioned one.
    let lam = (d / 2.0, s);
    let cand1 = ((b, 0.0), (lam.0 - a, lam.1));
    let cand2 = ((lam.0 - dd, lam.1), (c, 0.0));
    let n1 = cand1
        .0
         .0
        .hypot(cand1.0 .1)
        .hypot(cand1.1 .0.hypot(cand1.1 .1));
    let n2 = cand2
        .0
         .0
        .hypot(cand2.0 .1)
        .hypot(cand2.1 .0.hypot(cand2.1 .1));
    let (x1, x2) = if n1 >= n2 { cand1 } else { cand2 };

    // u(1) = x1, u(0) = x2; propagate u(n+1) = (v(n)-E)u(n) - u(n-1).
    let mut u: Vec<(f64, f64)> = Vec::with_capacity(l as usize);
    u.push(x1);
    if l >= 2 {
        let w = v.eval(1)? - e;
        u.push((w * x1.0 - x2.0, w * x1.1 - x2.1));
        for i in 2..l as usize {
            let w = v.eval(i as i64)? - e;
            let prev = u[i - 2];
            let cur = u[i - 1];
            u.push((w * cur.0 - prev.0, w * cur.1 - prev.1));
        }
    }

    // Normalize over one period.
    let norm: f64 = u.iter().map(|(r, i)| r * r + i * i).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::NumericalFailure("degenerate Bloch amplitude".into()));
    }
    for x in u.iter_mut() {
        x.0 /= norm;
        x.1 /= norm;
    }
    let mut wrap = (kl.cos(), kl.sin());

    // Branch cross-check: dE/dk = -2L sin(kL)/D', so the Feynman-Hellmann
    // value must carry the sign -sign(D'). The e^{+ikL} eigenvector already
    // does; conjugating (vector and wrap phase) repairs a rounding flip.
    let fh = fh_value(&u, wrap, l);
    if fh != 0.0 && fh.signum() != -disc.d_prime().signum() {
        for x in u.iter_mut() {
            x.1 = -x.1;
        }
        wrap.1 = -wrap.1;
    }

    // Global phase: u(1) real and positive, with a flagged fallback when
    // u(1) is numerically zero.
    let max_abs = u.iter().map(|(r, i)| r.hypot(*i)).fold(0.0f64, f64::max);
    let (pivot, phase_fallback) = {
        let first = u[0];
        if first.0.hypot(first.1) >= 1e-10 * max_abs {
            (first, false)
        } else {
            let p = *u
                .iter()
                .find(|(r, i)| r.hypot(*i) >= 1e-10 * max_abs)
                .unwrap_or(&first);
            (p, true)
        }
    };
    let pn = pivot.0.hypot(pivot.1);
    let (pc, ps) = (pivot.0 / pn, -pivot.1 / pn);
    for x in u.iter_mut() {
        let (r, i) = *x;
        *x = (r * pc - i * ps, r * ps + i * pc);
    }

    let de_dk = fh_value(&u, wrap, l);
    Ok(BlochState {
        k,
        u,
        wrap,
        de_dk,
        phase_fallback,
    })
}

/// 2L Im(conj(u(1)) u(2)) with Bloch continuation for L = 1.
fn fh_value(u: &[(f64, f64)], wrap: (f64, f64), l: u32) -> f64 {
    let (ar, ai) = u[0];
    let (br, bi) = if l >= 2 {
        u[1]
    } else {
        (ar * wrap.0 - ai * wrap.1, ar * wrap.1 + ai * wrap.0)
    };
    2.0 * l as f64 * (ar * bi - ai * br)
}

/// Plain 2x2 reconstruction of T(L,E); valid while ln‖T‖ stays well under
/// the overflow threshold (always true strictly inside a band).
fn transfer_matrix_plain(v: &PotentialSpec, l: u32, e: f64) -> Result<[[f64; 2]; 2]> {
    let t: &ScaledMatrix = &transfer::transfer_matrix(v, l, e)?.matrix;
    if t.log_scale.abs() > 300.0 {
        return Err(Error::NumericalFailure(
            "transfer matrix too large to reconstruct".into(),
        ));
    }
    Ok(t.reconstruct())
}

// ---------------------------------------------------------------------------
// Rotation number
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct RotationPoint {
    /// α(E) in [0, π].
    pub alpha: f64,
    /// α'(E); 0 outside the spectrum, +inf flagged at band edges.
    pub alpha_prime: f64,
    pub at_edge: bool,
}

/// α(E) = accumulated quasi-momentum: 0 below the spectrum, π above,
/// (ℓ-1)π/L + k(E) or ℓπ/L - k(E) inside band ℓ by orientation, constant
/// ℓπ/L across the gap after band ℓ.
pub fn rotation_number(v: &PotentialSpec, bands: &BandStructure, e: f64) -> Result<RotationPoint> {
    let l = bands.l as f64;
    for (idx, band) in bands.bands.iter().enumerate() {
        if e < band.lo {
            return Ok(RotationPoint {
                alpha: idx as f64 * PI / l,
                alpha_prime: 0.0,
                at_edge: false,
            });
        }
        if e <= band.hi {
            if e == band.lo || e == band.hi {
                // α grows by π/L across each band; k' diverges at the edges.
                let alpha = if e == band.lo {
                    idx as f64 * PI / l
                } else {
                    (idx as f64 + 1.0) * PI / l
                };
                return Ok(RotationPoint {
                    alpha,
                    alpha_prime: f64::INFINITY,
                    at_edge: true,
                });
            }
            let disc = discriminant(v, bands.l, e)?;
            let d = disc.d().clamp(-2.0, 2.0);
            let k = (d / 2.0).acos() / l;
            let alpha = match band.orientation {
                Orientation::Decreasing => idx as f64 * PI / l + k,
                Orientation::Increasing => (idx as f64 + 1.0) * PI / l - k,
            };
            let denom = l * (4.0 - d * d).sqrt();
            let alpha_prime = if denom > 0.0 {
                disc.d_prime().abs() / denom
            } else {
                f64::INFINITY
            };
            return Ok(RotationPoint {
                alpha,
                alpha_prime,
                at_edge: !alpha_prime.is_finite(),
            });
        }
    }
    Ok(RotationPoint {
        alpha: PI,
        alpha_prime: 0.0,
        at_edge: false,
    })
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

/// Relative band-edge exclusion margin for interior sampling; α' and k'
/// diverge at the edges and the audited statements hold on the open band.
pub const EDGE_MARGIN: f64 = 1e-6;

/// Bands narrower than this cannot be resolved in energy by f64 edge
/// eigenvalues (absolute solver noise ~1e-13); in-band sampling is skipped
/// or replaced by the periodic-eigenvector surrogate below this width.
pub const NARROW_BAND_FLOOR: f64 = 1e-8;

/// Chebyshev-spaced interior samples of a band.
fn interior_grid(band: &Band, samples: usize) -> Vec<f64> {
    let margin = EDGE_MARGIN * band.width();
    let (a, b) = (band.lo + margin, band.hi - margin);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    (0..samples)
        .map(|j| mid + half * (PI * (2.0 * j as f64 + 1.0) / (2.0 * samples as f64)).cos())
        .collect()
}

/// Minimum of 2 sin(α(E)) α'(E) over interior grids of every band.
pub fn deift_simon_audit(
    v: &PotentialSpec,
    bands: &BandStructure,
    samples_per_band: usize,
) -> Result<f64> {
    let mut min = f64::INFINITY;
    for band in &bands.bands {
        if band.width() < 1e-12 {
            continue;
        }
        for e in interior_grid(band, samples_per_band) {
            let r = rotation_number(v, bands, e)?;
            let val = 2.0 * r.alpha.sin() * r.alpha_prime;
            if val < min {
                min = val;
            }
        }
    }
    Ok(min)
}

/// Σ_ℓ ∫_0^{π/L} (|u_ℓ(k,1)|² + |u_ℓ(k,2)|²) dk by per-band Gauss-Legendre
/// in k; the lemma value is 2π/L for every potential.
pub fn bloch_moment_integral(
    v: &PotentialSpec,
    bands: &BandStructure,
    k_points: usize,
) -> Result<f64> {
    if k_points < 16 {
        return Err(Error::InvalidInput(
            "bloch moment needs k_points >= 16".into(),
        ));
    }
    let l = bands.l;
    let (nodes, weights) = numerics::gauss_legendre(k_points);
    let kmax = PI / l as f64;
    // Bands narrower than the dispersion-resolvability floor cannot be
    // sampled in k: the discriminant jumps across [-2, 2] between adjacent
    // floats. There the amplitudes are k-independent up to tunneling
    // corrections of the order of the band width, so the periodic
    // eigenvector stands in for the Bloch wave at every node.
    let narrow = l >= 2 && bands.bands.iter().any(|b| b.width() < NARROW_BAND_FLOOR);
    let periodic_vecs = if narrow {
        let a = floquet_matrix(v, l, false)?;
        Some(numerics::sym_eig_vectors(&a, l as usize)?)
    } else {
        None
    };
    let per_band = crate::parallel::map_collect(&bands.bands, |band| -> Result<f64> {
        if let (true, Some((evals, vecs))) =
            (band.width() < NARROW_BAND_FLOOR, periodic_vecs.as_ref())
        {
            let mid = 0.5 * (band.lo + band.hi);
            let idx = evals
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - mid).abs().partial_cmp(&(b.1 - mid).abs()).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            let psi = &vecs[idx];
            return Ok(kmax * (psi[0] * psi[0] + psi[1] * psi[1]));
        }
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let k = 0.5 * kmax * (x + 1.0);
            let target = 2.0 * (k * l as f64).cos();
            let e = energy_at_k(v, l, band, target)?;
            let state = bloch_state(v, l, e)?;
            let u1 = state.site_abs(0);
            let u2 = if l >= 2 {
                state.site_abs(1)
            } else {
                state.site_abs(0)
            };
            acc += w * (u1 * u1 + u2 * u2);
        }
        Ok(acc * 0.5 * kmax)
    });
    let mut total = 0.0;
    for r in per_band {
        total += r?;
    }
    Ok(total)
}

/// Solve D(E) = target inside a band (D is strictly monotone there).
fn energy_at_k(v: &PotentialSpec, l: u32, band: &Band, target: f64) -> Result<f64> {
    let tol = (band.width() * 1e-13).max(1e-15);
    numerics::find_root(
        |e| {
            discriminant(v, l, e)
                .map(|p| p.d() - target)
                .unwrap_or(f64::NAN)
        },
        Interval::new(band.lo, band.hi)?,
        tol,
    )
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BoundAuditReport {
    /// Max over in-band samples of (‖T‖ - bound)/bound; <= 0 when the
    /// in-band upper bound ‖T‖ ≤ ‖x₊‖²/|Im(x1 conj(x2))| holds everywhere,
    /// with x₊ = (u(1), u(0)) the transfer eigenvector. Since |u(0)| = |u(L)|
    /// and Im(conj(u(m))u(m+1)) = E'(k)/2L for every m, this reads
    /// 2L(|u(1)|² + |u(L)|²)/|E'(k)|.
    pub max_in_band_violation: f64,
    /// Max over gap samples of (lower bound - ‖T‖)/‖T‖; <= 0 when the gap
    /// lower bound ‖T‖ ≥ (E-E0)/(e(E2-E0)) holds everywhere.
    pub max_gap_violation: f64,
}

/// Evaluates both transfer-matrix bounds at interior band samples and at
/// samples across every open gap.
pub fn transfer_bound_audit(
    v: &PotentialSpec,
    bands: &BandStructure,
    samples: usize,
) -> Result<BoundAuditReport> {
    let l = bands.l;
    let mut in_band: f64 = f64::NEG_INFINITY;
    for band in &bands.bands {
        if band.width() < NARROW_BAND_FLOOR {
            continue;
        }
        for e in interior_grid(band, samples) {
            let state = bloch_state(v, l, e)?;
            let u1 = state.site_abs(0);
            let u0 = state.site_abs(l as usize - 1);
            let bound = 2.0 * l as f64 * (u1 * u1 + u0 * u0) / state.de_dk.abs();
            let norm = transfer::transfer_matrix(v, l, e)?.norm_log.exp();
            in_band = in_band.max((norm - bound) / bound);
        }
    }

    let mut gap: f64 = f64::NEG_INFINITY;
    for ell in 1..bands.bands.len() {
        let below = &bands.bands[ell - 1];
        let above = &bands.bands[ell];
        let em = bands.gap_extrema[ell];
        if above.lo - below.hi < 1e-12 || !em.is_finite() {
            continue;
        }
        // The zero-to-edge denominators are eigenvalue differences; below
        // the resolvability floor they are pure solver noise and the bound
        // is not evaluable.
        // [E2, Em]: lower bound (E - E0)/(e (E2 - E0)).
        if below.hi - below.zero >= NARROW_BAND_FLOOR {
            for j in 1..=samples {
                let e = below.hi + (em - below.hi) * j as f64 / samples as f64;
                let rhs = (e - below.zero) / (std::f64::consts::E * (below.hi - below.zero));
                gap = gap.max(violation_log(v, l, e, rhs)?);
            }
        }
        // [Em, E1']: mirrored bound (E0' - E)/(e (E0' - E1')).
        if above.zero - above.lo >= NARROW_BAND_FLOOR {
            for j in 1..=samples {
                let e = em + (above.lo - em) * (j - 1) as f64 / samples as f64;
                let rhs = (above.zero - e) / (std::f64::consts::E * (above.zero - above.lo));
                gap = gap.max(violation_log(v, l, e, rhs)?);
            }
        }
    }
    Ok(BoundAuditReport {
        max_in_band_violation: in_band,
        max_gap_violation: gap,
    })
}

/// (rhs - ‖T‖)/‖T‖ computed through logs so deep-gap norms cannot overflow.
fn violation_log(v: &PotentialSpec, l: u32, e: f64, rhs: f64) -> Result<f64> {
    if rhs <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let norm_log = transfer::transfer_matrix(v, l, e)?.norm_log;
    let ratio_log = rhs.ln() - norm_log;
    Ok(if ratio_log > 30.0 {
        f64::INFINITY
    } else {
        ratio_log.exp() - 1.0
    })
}

// ---------------------------------------------------------------------------
// Enlarged spectrum
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeCertificate {
    pub e: f64,
    pub norm_log: f64,
    /// ‖T(L,E)‖ ≥ c/e holds at this probe.
    pub certified: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EnlargedSpectrum {
    /// Disjoint intervals of the enlarged spectrum S_L.
    pub intervals: Vec<(f64, f64)>,
    /// |S_L ∩ I|.
    pub overlap: f64,
    pub probes: Vec<ProbeCertificate>,
}

impl EnlargedSpectrum {
    pub fn contains(&self, e: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= e && e <= b)
    }
}

/// Widen the bands whose discriminant zeros bracket the window by a factor
/// c about the zero, take the union, and certify ‖T(L,E)‖ ≥ c/e at the
/// supplied probe energies in I∖S_L.
pub fn enlarged_spectrum(
    v: &PotentialSpec,
    bands: &BandStructure,
    window: Interval,
    c: f64,
    probe_energies: &[f64],
) -> Result<EnlargedSpectrum> {
    if c < 1.0 {
        return Err(Error::InvalidInput(
            "enlargement factor c must be >= 1".into(),
        ));
    }
    let zeros: Vec<f64> = bands.bands.iter().map(|b| b.zero).collect();
    let ell_minus = zeros.iter().rposition(|&z| z < window.lo()).unwrap_or(0);
    let ell_plus = zeros
        .iter()
        .position(|&z| z > window.hi())
        .unwrap_or(zeros.len() - 1);

    let mut widened: Vec<(f64, f64)> = Vec::with_capacity(bands.bands.len());
    for (idx, band) in bands.bands.iter().enumerate() {
        if idx >= ell_minus && idx <= ell_plus {
            widened.push((
                band.zero - c * (band.zero - band.lo),
                band.zero + c * (band.hi - band.zero),
            ));
        } else {
            widened.push((band.lo, band.hi));
        }
    }
    widened.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in widened {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    let overlap = merged.iter().map(|&(a, b)| window.overlap(a, b)).sum();

    let threshold = c.ln() - 1.0; // ln(c/e)
    let result = EnlargedSpectrum {
        intervals: merged,
        overlap,
        probes: Vec::new(),
    };
    let probes = probe_energies
        .iter()
        .filter(|&&e| window.contains(e) && !result.contains(e))
        .map(|&e| -> Result<ProbeCertificate> {
            let norm_log = transfer::transfer_matrix(v, bands.l, e)?.norm_log;
            Ok(ProbeCertificate {
                e,
                norm_log,
                certified: norm_log >= threshold - 1e-6,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnlargedSpectrum { probes, ..result })
}
