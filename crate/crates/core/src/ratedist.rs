//! Rate-distortion: Blahut–Arimoto with dual certificates, block sources over
//! shift systems, additive (product) sources, and the two lower bounds.
//!
//! All slopes `a` use the kernel `2^{-a·d}`, so a BA run at slope `a` hands
//! back a feasible `λ` for [`duality_lower_bound`] at the same `a`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, precondition, Error, Result};
use crate::info::{mi_of, DiscreteDistribution, JointDistribution};
use crate::measure::MeasureOnSystem;
use crate::systems::{weight, SystemSpec};

pub const BA_GAP: f64 = 1e-8;
pub const BA_MAX_ITER: usize = 10_000;
const SLOPE_CAP: f64 = 1e15;
const WARM_MIX: f64 = 1e-9;
const GAMMA_CAP: f64 = 64.0;
const BISECT_ITER: usize = 2000;
const TARGET_ITER: usize = 3 * BA_MAX_ITER;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Distortion(f64),
    Slope(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaOutcome {
    /// `I(X;Y)` of the returned channel, bits.
    pub rate: f64,
    /// `E d(X,Y)` of the returned channel.
    pub distortion: f64,
    /// Slope used; `f64::INFINITY` for the minimum-distortion limit.
    pub slope: f64,
    /// Certified lower bound on `R` at the target distortion.
    pub lower: f64,
    /// Dual weights `λ(x)` behind `lower` (feasible at `slope`).
    pub lambda: Vec<f64>,
    pub joint: JointDistribution,
    pub iterations: usize,
    pub converged: bool,
}

struct Fixed {
    rate: f64,
    distortion: f64,
    /// `-Σ p log₂ Z - log₂ max c`, so the lower bound at ε is `base - a·ε`.
    dual_base: f64,
    log_lambda: Vec<f64>,
    channel: Vec<Vec<f64>>,
    q: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// BA iterations at fixed slope `a`. `a = ∞` restricts every row to its
/// minimum-distortion columns.
fn ba_fixed(p: &[f64], d: &[Vec<f64>], a: f64, q0: Option<&[f64]>) -> Fixed {
    ba_capped(p, d, a, q0, BA_MAX_ITER)
}

fn ba_capped(p: &[f64], d: &[Vec<f64>], a: f64, q0: Option<&[f64]>, max_iter: usize) -> Fixed {
    let nx = p.len();
    let ny = d[0].len();
    let dmin: Vec<f64> = d.iter().map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    // Row-shifted kernel; the shift cancels in the channel and is restored in log Z.
    let kernel: Vec<Vec<f64>> = d
        .iter()
        .zip(&dmin)
        .map(|(r, &m)| {
            r.iter()
                .map(|&v| {
                    if a.is_infinite() {
                        if v <= m + 1e-12 { 1.0 } else { 0.0 }
                    } else {
                        (-a * (v - m)).exp2()
                    }
                })
                .collect()
        })
        .collect();
    let mut q: Vec<f64> = match q0 {
        // Uniform admixture: BA cannot revive columns a warm start zeroed out.
        Some(q) => q.iter().map(|v| (1.0 - WARM_MIX) * v + WARM_MIX / ny as f64).collect(),
        None => vec![1.0 / ny as f64; ny],
    };
    let mut z = vec![0.0; nx];
    let mut c = vec![0.0; ny];
    let mut iterations = 0;
    let mut log_lambda = vec![0.0; nx];
    let mut gamma: f64 = 1.0;
    loop {
        for x in 0..nx {
            z[x] = kernel[x].iter().zip(&q).map(|(k, qy)| k * qy).sum();
        }
        c.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..nx {
            if p[x] > 0.0 {
                let f = p[x] / z[x];
                for y in 0..ny {
                    c[y] += f * kernel[x][y];
                }
            }
        }
        let cmax = c.iter().copied().fold(0.0, f64::max);
        let shift = |x: usize| if a.is_infinite() { 0.0 } else { a * dmin[x] };
        // Channel and upper value at the current q.
        let channel: Vec<Vec<f64>> = (0..nx)
            .map(|x| (0..ny).map(|y| q[y] * kernel[x][y] / z[x]).collect())
            .collect();
        let rate = mi_of(p, &channel);
        let distortion: f64 = (0..nx)
            .map(|x| p[x] * channel[x].iter().zip(&d[x]).map(|(w, dv)| w * dv).sum::<f64>())
            .sum();
        let mut base = -cmax.log2();
        for x in 0..nx {
            log_lambda[x] = -(z[x].log2() - shift(x)) - cmax.log2();
            if p[x] > 0.0 {
                base -= p[x] * (z[x].log2() - shift(x));
            }
        }
        let dual_base = base;
        let a_fin = if a.is_infinite() { 0.0 } else { a };
        let lower = base - a_fin * distortion;
        iterations += 1;
        if rate - lower < BA_GAP || iterations >= max_iter {
            let converged = rate - lower < BA_GAP;
            return Fixed { rate, distortion, dual_base, log_lambda, channel, q, iterations, converged };
        }
        // Over-relaxed step `q·c^γ`, kept only when it beats the plain step on
        // `Σ p log z`, which BA increases monotonically.
        let plain = relaxed(&q, &c, cmax, 1.0);
        let g = gamma.max(2.0);
        let fast = relaxed(&q, &c, cmax, g);
        if dual_objective(p, &kernel, &fast) >= dual_objective(p, &kernel, &plain) {
            q = fast;
            gamma = (2.0 * g).min(GAMMA_CAP);
        } else {
            q = plain;
            gamma = (0.5 * g).max(1.0);
        }
    }
}

fn relaxed(q: &[f64], c: &[f64], cmax: f64, gamma: f64) -> Vec<f64> {
    let mut out: Vec<f64> = q.iter().zip(c).map(|(qy, cy)| qy * (cy / cmax).powf(gamma)).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= s);
    out
}

fn dual_objective(p: &[f64], kernel: &[Vec<f64>], q: &[f64]) -> f64 {
    p.iter()
        .zip(kernel)
        .filter(|(px, _)| **px > 0.0)
        .map(|(px, k)| px * k.iter().zip(q).map(|(a, b)| a * b).sum::<f64>().ln())
        .sum()
}

fn check_problem(p: &[f64], d: &[Vec<f64>]) -> Result<()> {
    DiscreteDistribution { mass: p.to_vec() }.validate()?;
    if d.len() != p.len() {
        return invalid(format!("distortion has {} rows for {} source points", d.len(), p.len()));
    }
    let ny = d.first().map_or(0, |r| r.len());
    if ny == 0 || d.iter().any(|r| r.len() != ny) {
        return invalid("distortion matrix rows must be nonempty and equal length");
    }
    if d.iter().flatten().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return invalid("distortion entries must be finite and nonnegative");
    }
    Ok(())
}

/// `Σ p(x) min_y d(x,y)`: the least achievable distortion.
pub fn min_distortion(p: &[f64], d: &[Vec<f64>]) -> f64 {
    p.iter()
        .zip(d)
        .map(|(px, r)| px * r.iter().copied().fold(f64::INFINITY, f64::min))
        .sum()
}

/// `min_y Σ p(x) d(x,y)`: distortion of the best constant reproduction.
pub fn max_distortion(p: &[f64], d: &[Vec<f64>]) -> (f64, usize) {
    let ny = d[0].len();
    (0..ny)
        .map(|y| (p.iter().zip(d).map(|(px, r)| px * r[y]).sum::<f64>(), y))
        .fold((f64::INFINITY, 0), |acc, v| if v.0 < acc.0 { v } else { acc })
}

fn outcome(p: &[f64], f: Fixed, a: f64, eps: f64) -> BaOutcome {
    let a_fin = if a.is_infinite() { 0.0 } else { a };
    let lower = if a.is_infinite() { f.dual_base } else { f.dual_base - a_fin * eps };
    BaOutcome {
        rate: f.rate,
        distortion: f.distortion,
        slope: a,
        lower: lower.min(f.rate),
        lambda: f.log_lambda.iter().map(|l| l.exp2()).collect(),
        joint: JointDistribution::from_channel(p, &f.channel),
        iterations: f.iterations,
        converged: f.converged,
    }
}

/// Rate-distortion point of a finite source by Blahut–Arimoto.
///
/// In distortion mode the slope is bisected until the channel meets the
/// target; the reported `rate` is that channel's information (an upper value)
/// and `lower` a dual certificate at the target.
pub fn blahut_arimoto(source: &DiscreteDistribution, d: &[Vec<f64>], target: Target) -> Result<BaOutcome> {
    let p = &source.mass;
    check_problem(p, d)?;
    match target {
        Target::Slope(a) => {
            if !(a >= 0.0) {
                return invalid(format!("slope must be nonnegative, got {a}"));
            }
            let f = ba_fixed(p, d, a, None);
            let eps = f.distortion;
            Ok(outcome(p, f, a, eps))
        }
        Target::Distortion(eps) => {
            let dmin = min_distortion(p, d);
            let (dmax, ystar) = max_distortion(p, d);
            if eps < dmin - 1e-12 {
                return precondition(format!("target distortion {eps} is below the achievable minimum {dmin}"));
            }
            if eps >= dmax {
                let ny = d[0].len();
                let channel: Vec<Vec<f64>> = p
                    .iter()
                    .map(|_| (0..ny).map(|y| if y == ystar { 1.0 } else { 0.0 }).collect())
                    .collect();
                return Ok(BaOutcome {
                    rate: 0.0,
                    distortion: dmax,
                    slope: 0.0,
                    lower: 0.0,
                    lambda: vec![1.0; p.len()],
                    joint: JointDistribution::from_channel(p, &channel),
                    iterations: 0,
                    converged: true,
                });
            }
            if eps <= dmin + 1e-12 {
                let f = ba_fixed(p, d, f64::INFINITY, None);
                return Ok(outcome(p, f, f64::INFINITY, eps));
            }
            distortion_target(p, d, eps)
        }
    }
}

/// Distortion-target BA. Slopes are bisected, but the stopping rule is the
/// certified gap at `eps`: the upper value is the better of the bracketing
/// feasible channel and its time-sharing mix with the infeasible one (which
/// closes kinks of `R(D)`), the lower value the best dual line over all runs.
fn distortion_target(p: &[f64], d: &[Vec<f64>], eps: f64) -> Result<BaOutcome> {
    struct Best {
        lower: f64,
        slope: f64,
        log_lambda: Vec<f64>,
        iterations: usize,
    }
    let mut best = Best { lower: f64::NEG_INFINITY, slope: 0.0, log_lambda: vec![0.0; p.len()], iterations: 0 };
    let record = |f: &Fixed, a: f64, best: &mut Best| {
        best.iterations += f.iterations;
        let l = f.dual_base - a * eps;
        if l > best.lower {
            best.lower = l;
            best.slope = a;
            best.log_lambda = f.log_lambda.clone();
        }
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut lo_run: Option<Fixed> = None;
    let mut hi_run = ba_capped(p, d, hi, None, BISECT_ITER);
    record(&hi_run, hi, &mut best);
    while hi_run.distortion > eps {
        lo = hi;
        hi *= 2.0;
        if hi > SLOPE_CAP {
            return Err(Error::Numeric(format!("no slope below {SLOPE_CAP} reaches distortion {eps}")));
        }
        let r = ba_capped(p, d, hi, Some(&hi_run.q), BISECT_ITER);
        record(&r, hi, &mut best);
        lo_run = Some(std::mem::replace(&mut hi_run, r));
    }
    let upper = |lo_run: &Option<Fixed>, hi_run: &Fixed| -> (f64, f64, Vec<Vec<f64>>) {
        let mut up = (hi_run.rate, hi_run.distortion, hi_run.channel.clone());
        if let Some(l) = lo_run {
            if l.distortion > hi_run.distortion {
                let t = (eps - hi_run.distortion) / (l.distortion - hi_run.distortion);
                let mix: Vec<Vec<f64>> = l
                    .channel
                    .iter()
                    .zip(&hi_run.channel)
                    .map(|(a, b)| a.iter().zip(b).map(|(u, v)| t * u + (1.0 - t) * v).collect())
                    .collect();
                let r = mi_of(p, &mix);
                if r < up.0 {
                    up = (r, t * l.distortion + (1.0 - t) * hi_run.distortion, mix);
                }
            }
        }
        up
    };
    let mut up = upper(&lo_run, &hi_run);
    for round in 0..200 {
        if up.0 - best.lower < BA_GAP || hi - lo <= 1e-10 * hi || best.iterations >= TARGET_ITER {
            break;
        }
        let mid = if round % 2 == 0 || lo_run.is_none() {
            0.5 * (lo + hi)
        } else {
            // Refine the bracket endpoints in place on alternate rounds.
            hi
        };
        let q0 = hi_run.q.clone();
        let r = ba_capped(p, d, mid, Some(&q0), BISECT_ITER);
        record(&r, mid, &mut best);
        if r.distortion > eps {
            if mid < hi {
                lo = mid;
            }
            lo_run = Some(r);
        } else {
            hi = mid;
            hi_run = r;
        }
        up = upper(&lo_run, &hi_run);
    }
    let lower = best.lower.min(up.0);
    Ok(BaOutcome {
        rate: up.0,
        distortion: up.1,
        slope: best.slope,
        lower,
        lambda: best.log_lambda.iter().map(|l| l.exp2()).collect(),
        joint: JointDistribution::from_channel(p, &up.2),
        iterations: best.iterations,
        converged: up.0 - best.lower < BA_GAP,
    })
}

/// Finds the smallest slope (to relative precision) whose distortion is at
/// most `eps`, returning that run.
fn bisect_slope<F, T>(mut run: F, eps: f64) -> Result<(f64, T)>
where
    F: FnMut(f64, Option<&[f64]>) -> (f64, Vec<f64>, T),
{
    let mut lo = 0.0;
    let mut hi = 1.0;
    let (mut dh, mut qh, mut best) = run(hi, None);
    while dh > eps {
        lo = hi;
        hi *= 2.0;
        if hi > SLOPE_CAP {
            return Err(Error::Numeric(format!("no slope below {SLOPE_CAP} reaches distortion {eps}")));
        }
        let r = run(hi, Some(&qh));
        dh = r.0;
        qh = r.1;
        best = r.2;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-10 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let r = run(mid, Some(&qh));
        if r.0 > eps {
            lo = mid;
        } else {
            hi = mid;
            qh = r.1;
            best = r.2;
        }
    }
    Ok((hi, best))
}

/// One `(ε, R)` sample; `rate` is per symbol (divided by `N`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub rate: f64,
    pub lower: f64,
    pub distortion: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdCurve {
    pub source: String,
    pub points: Vec<RdPoint>,
}

impl RdCurve {
    /// Per-ε infimum over the block lengths present (`R = inf_N R_N`).
    pub fn infimum(&self) -> Vec<(f64, f64)> {
        let mut eps: Vec<f64> = self.points.iter().map(|p| p.epsilon).collect();
        eps.sort_by(|a, b| b.total_cmp(a));
        eps.dedup();
        eps.into_iter()
            .map(|e| {
                let r = self
                    .points
                    .iter()
                    .filter(|p| p.epsilon == e)
                    .map(|p| p.rate)
                    .fold(f64::INFINITY, f64::min);
                (e, r)
            })
            .collect()
    }

    pub fn at_n(&self, n: usize) -> Vec<(f64, f64)> {
        self.points.iter().filter(|p| p.n == n).map(|p| (p.epsilon, p.rate)).collect()
    }
}

/// Block distortion `d̄_N` between words.
pub fn block_distortion(sys: &SystemSpec, rho: &[Vec<f64>], x: &[u32], y: &[u32], n: usize) -> f64 {
    (0..n).map(|off| sys.window_distance(rho, x, y, off)).sum::<f64>() / n as f64
}

/// `R_N(ε)` of a measure on words of length `≥ 2W+N` with block distortion
/// `d̄_N` against a finite codebook (the support by default).
pub fn dynamical_rd(
    sys: &SystemSpec,
    measure: &MeasureOnSystem,
    n: usize,
    eps: f64,
    codebook: Option<&[Vec<u32>]>,
) -> Result<RdPoint> {
    if n == 0 {
        return precondition("block length N must be >= 1");
    }
    measure.validate()?;
    let need = sys.depth_len(n);
    if measure.words.iter().any(|w| w.len() < need) {
        return precondition(format!("measure words shorter than 2W+N = {need}"));
    }
    let support: Vec<usize> = (0..measure.words.len()).filter(|&i| measure.mass[i] > 0.0).collect();
    let p: Vec<f64> = support.iter().map(|&i| measure.mass[i]).collect();
    let sum: f64 = p.iter().sum();
    let p: Vec<f64> = p.iter().map(|v| v / sum).collect();
    let default_book: Vec<Vec<u32>>;
    let book: &[Vec<u32>] = match codebook {
        Some(b) => b,
        None => {
            default_book = support.iter().map(|&i| measure.words[i].clone()).collect();
            &default_book
        }
    };
    let rho = sys.alphabet.rho_table();
    let d: Vec<Vec<f64>> = support
        .iter()
        .map(|&i| book.iter().map(|y| block_distortion(sys, &rho, &measure.words[i], y, n)).collect())
        .collect();
    let out = blahut_arimoto(&DiscreteDistribution { mass: p }, &d, Target::Distortion(eps))?;
    Ok(RdPoint {
        epsilon: eps,
        n,
        rate: out.rate / n as f64,
        lower: out.lower / n as f64,
        distortion: out.distortion,
        converged: out.converged,
        iterations: out.iterations,
    })
}

/// A letter problem: source masses and a symbol distortion table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Letter {
    pub source: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
}

/// Independent coordinates with block distortion `Σ_i w_i ρ_{ℓ(i)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveSource {
    pub letters: Vec<Letter>,
    /// `(letter index, weight)` per coordinate.
    pub coords: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivePoint {
    pub rate: f64,
    pub lower: f64,
    pub distortion: f64,
    pub slope: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl AdditiveSource {
    /// Product source of `letter` on a full-shift block: coordinate `i` of a
    /// word of length `2W+N` carries `(1/N)Σ_n 2^{-|i-n-W|}`.
    pub fn shift_block(letter: Letter, window: usize, n: usize) -> Self {
        let coords = shift_block_weights(window, n).into_iter().map(|w| (0, w)).collect();
        AdditiveSource { letters: vec![letter], coords }
    }

    fn grouped(&self) -> Vec<(usize, f64, usize)> {
        let mut g: Vec<(usize, f64, usize)> = Vec::new();
        for &(l, w) in &self.coords {
            if w <= 0.0 {
                continue;
            }
            match g.iter_mut().find(|e| e.0 == l && (e.1 - w).abs() <= 1e-15 * w) {
                Some(e) => e.2 += 1,
                None => g.push((l, w, 1)),
            }
        }
        g
    }

    fn at_slope(&self, groups: &[(usize, f64, usize)], a: f64, warm: Option<&[f64]>) -> (AdditivePoint, f64, Vec<f64>) {
        let mut rate = 0.0;
        let mut dist = 0.0;
        let mut base = 0.0;
        let mut iterations = 0;
        let mut converged = true;
        let mut qs = Vec::new();
        let mut off = 0;
        for &(l, w, mult) in groups {
            let letter = &self.letters[l];
            let ny = letter.rho[0].len();
            let d: Vec<Vec<f64>> = letter.rho.iter().map(|r| r.iter().map(|v| w * v).collect()).collect();
            let q0 = warm.map(|q| &q[off..off + ny]);
            let f = ba_fixed(&letter.source, &d, a, q0);
            off += ny;
            rate += mult as f64 * f.rate;
            dist += mult as f64 * f.distortion;
            base += mult as f64 * f.dual_base;
            iterations = iterations.max(f.iterations);
            converged &= f.converged;
            qs.extend_from_slice(&f.q);
        }
        (
            AdditivePoint { rate, lower: 0.0, distortion: dist, slope: a, converged, iterations },
            base,
            qs,
        )
    }

    /// Block rate at total distortion `≤ eps`, shared slope across coordinates.
    pub fn rate_at(&self, eps: f64) -> Result<AdditivePoint> {
        for l in &self.letters {
            check_problem(&l.source, &l.rho)?;
        }
        let groups = self.grouped();
        let dmax: f64 = groups
            .iter()
            .map(|&(l, w, m)| m as f64 * w * max_distortion(&self.letters[l].source, &self.letters[l].rho).0)
            .sum();
        let dmin: f64 = groups
            .iter()
            .map(|&(l, w, m)| m as f64 * w * min_distortion(&self.letters[l].source, &self.letters[l].rho))
            .sum();
        if eps < dmin - 1e-12 {
            return precondition(format!("target distortion {eps} is below the achievable minimum {dmin}"));
        }
        if eps >= dmax {
            return Ok(AdditivePoint { rate: 0.0, lower: 0.0, distortion: dmax, slope: 0.0, converged: true, iterations: 0 });
        }
        if eps <= dmin + 1e-12 {
            let (mut pt, base, _) = self.at_slope(&groups, f64::INFINITY, None);
            pt.lower = base.min(pt.rate);
            return Ok(pt);
        }
        let (a, (mut pt, base)) = bisect_slope(
            |a, q| {
                let (pt, base, qs) = self.at_slope(&groups, a, q);
                (pt.distortion, qs, (pt, base))
            },
            eps,
        )?;
        pt.lower = (base - a * eps).min(pt.rate);
        Ok(pt)
    }
}

/// Per-coordinate weights of `d̄_N` on words of length `2W+N`.
pub fn shift_block_weights(window: usize, n: usize) -> Vec<f64> {
    let len = 2 * window + n;
    let w = window as i64;
    (0..len as i64)
        .map(|i| {
            (0..n as i64)
                .filter(|&off| (i - off - w).abs() <= w)
                .map(|off| weight(i - off - w))
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// `R_N(ε)` for an i.i.d. product measure `letter_mass` on a full shift,
/// solved coordinatewise.
pub fn product_rd(sys: &SystemSpec, letter_mass: &[f64], n: usize, eps: f64) -> Result<RdPoint> {
    if n == 0 {
        return precondition("block length N must be >= 1");
    }
    if sys.constraint.is_some() {
        return invalid("product_rd needs an unconstrained full shift");
    }
    if letter_mass.len() != sys.alphabet.size() {
        return invalid("letter mass length differs from the alphabet size");
    }
    let letter = Letter { source: letter_mass.to_vec(), rho: sys.alphabet.rho_table() };
    let src = AdditiveSource::shift_block(letter, sys.window, n);
    let pt = src.rate_at(eps)?;
    Ok(RdPoint {
        epsilon: eps,
        n,
        rate: pt.rate / n as f64,
        lower: pt.lower / n as f64,
        distortion: pt.distortion,
        converged: pt.converged,
        iterations: pt.iterations,
    })
}

/// `-aε + Σ μ(x) log₂ λ(x)`, refused unless `Σ_x λ(x) 2^{-a d(x,y)} μ(x) ≤ 1`
/// for every reproduction `y`.
pub fn duality_lower_bound(
    source: &DiscreteDistribution,
    d: &[Vec<f64>],
    lambda: &[f64],
    a: f64,
    eps: f64,
) -> Result<f64> {
    let p = &source.mass;
    check_problem(p, d)?;
    if lambda.len() != p.len() || lambda.iter().any(|l| !(*l > 0.0)) {
        return invalid("λ must be positive with one entry per source point");
    }
    if !(a >= 0.0) {
        return invalid("a must be nonnegative");
    }
    let ny = d[0].len();
    for y in 0..ny {
        let s: f64 = (0..p.len()).map(|x| lambda[x] * (-a * d[x][y]).exp2() * p[x]).sum();
        if s > 1.0 + 1e-12 {
            return Err(Error::Rejected(format!(
                "feasibility fails at reproduction {y}: Σ λ 2^(-a d) μ = {s} exceeds 1 by {:.3e}",
                s - 1.0
            )));
        }
    }
    let avg: f64 = p.iter().zip(lambda).filter(|(m, _)| **m > 0.0).map(|(m, l)| m * l.log2()).sum();
    Ok(-a * eps + avg)
}

/// The lower bound `s log₂(1/ε) − s − log₂{2 + (3 log₂e)^s s^{-s} Γ(s+1)}`
/// for measures with `μ(E) ≤ (τ + diam E)^s` below scale `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmtBound {
    pub bound: f64,
    /// Constant dual weight `λ = ε^{-s} / {...}`.
    pub lambda: f64,
    /// Slope `a = s/ε`.
    pub a: f64,
    /// `(s + log₂{...}) / (s + 1)` at this `s`.
    pub c_at_s: f64,
    /// Supremum of `c_at_s` over `s ≥ 0`: one `C` valid for every `s`.
    pub c_universal: f64,
}

fn gmt_bracket_log2(s: f64) -> f64 {
    // log₂{2 + (3 log₂ e)^s s^{-s} Γ(s+1)}, with 0^0 = 1.
    let t = if s == 0.0 {
        0.0
    } else {
        s * (3.0 * std::f64::consts::LOG2_E).ln() - s * s.ln() + ln_gamma(s + 1.0)
    };
    // log₂(2 + e^t) computed stably.
    if t > 700.0 {
        t * std::f64::consts::LOG2_E + (1.0 + 2.0 * (-t).exp()).log2()
    } else {
        (2.0 + t.exp()).log2()
    }
}

fn gmt_c(s: f64) -> f64 {
    (s + gmt_bracket_log2(s)) / (s + 1.0)
}

/// `sup_{s≥0} (s + log₂{...})/(s+1)`, by a dense scan (the ratio tends to
/// `1 + log₂(3 log₂e / e)` from below).
pub fn gmt_universal_constant() -> f64 {
    let mut best = gmt_c(0.0);
    let mut s = 1e-4;
    while s < 1e4 {
        best = best.max(gmt_c(s));
        s *= 1.01;
    }
    best
}

pub fn gmt_lower_bound(s: f64, eps: f64, delta: f64, tau: f64) -> Result<GmtBound> {
    if !(s >= 0.0) {
        return precondition(format!("s = {s} must be >= 0"));
    }
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0) {
        return precondition("ε must lie in (0,1) and δ must be positive");
    }
    if 2.0 * eps * (1.0 / eps).log2() > delta {
        return precondition(format!(
            "2ε·log₂(1/ε) = {} exceeds δ = {delta}",
            2.0 * eps * (1.0 / eps).log2()
        ));
    }
    if !(tau >= 0.0) || tau > (eps / 3.0).min(delta / 2.0) {
        return precondition(format!("τ = {tau} violates 0 ≤ τ ≤ min(ε/3, δ/2)"));
    }
    let br = gmt_bracket_log2(s);
    Ok(GmtBound {
        bound: s * (1.0 / eps).log2() - s - br,
        lambda: (-s * eps.log2() - br).exp2(),
        a: if s == 0.0 { 0.0 } else { s / eps },
        c_at_s: gmt_c(s),
        c_universal: gmt_universal_constant(),
    })
}
