//! End-to-end simulation of the interference bench.
//!
//! [`build_network`] lays out the optics, [`run_noiseless`] evaluates exact
//! port intensities for the four pointer-analysis settings, [`run_noisy`]
//! adds laser and detector noise shot by shot, and [`estimate_weak_value`]
//! turns records back into weak values with error bars. The sweeps assemble
//! those pieces over a grid of preparation angles θ or couplings γ.
//!
//! Noise model: every shot multiplies the source intensity by a common-mode
//! factor `1 + ξ` shared by all ports, and each port reading by its own
//! `1 + η`, with ξ and η zero-mean Gaussians of standard deviation
//! `noise_rel`. The reference detector records the common-mode factor.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Complex;
use crate::lgi::{k3_from_weak, KQuadruple};
use crate::optics::{
    path_observable, Arm, BenchElement, BenchLayout, ElementPlacement, PointerOutcome, WavePlate,
    DEFAULT_DISPLACEMENT_MM,
};
use crate::weakmeas::{
    amplified_prob, branch_from_intensities, expectations_from_intensities, invert_pointer,
    postselect_prob, weak_value, Branch, Coupling, PointerReadout, PostPort, TwoStateVector,
    WeakValue,
};
use crate::{Error, Result};

/// Elements of [`build_network`] that prepare |H⟩⊗(cos θ|U⟩ + sin θ|D⟩).
pub const PREPARE_STAGE: Range<usize> = 0..4;
/// Elements of [`build_network`] realizing the coupling (H3, H4).
pub const COUPLING_STAGE: Range<usize> = 4..6;

/// Port sums below this (in units of the source intensity) count as dark.
pub const DARK_INTENSITY: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Preparation angle θ (radians); H1 sits at θ/2.
    pub theta: f64,
    /// Coupling γ (radians); H3 at γ/2 on the upper arm, H4 at −γ/2 on the lower.
    pub gamma: f64,
    pub post_port: PostPort,
    /// Relative standard deviation of the intensity noise.
    pub noise_rel: f64,
    pub shots: usize,
    pub seed: u64,
    /// Magnification N for the amplified post-selection column.
    pub amplification_n: u32,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            theta: 15f64.to_radians(),
            gamma: 12f64.to_radians(),
            post_port: PostPort::PlusM3,
            noise_rel: 0.01,
            shots: 100,
            seed: 0,
            amplification_n: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.theta.is_finite() {
            return bad("θ must be finite".into());
        }
        if self.gamma.is_nan() || self.gamma.abs() >= FRAC_PI_2 {
            return bad(format!(
                "|γ| must be below 90°, got {}°",
                self.gamma.to_degrees()
            ));
        }
        if !(0.0..0.5).contains(&self.noise_rel) {
            return bad(format!("noise must be in [0, 0.5), got {}", self.noise_rel));
        }
        if self.shots == 0 {
            return bad("shots must be positive".into());
        }
        if self.amplification_n == 0 {
            return bad("amplification factor must be positive".into());
        }
        Ok(())
    }

    pub fn coupling(&self) -> Result<Coupling> {
        Coupling::new(self.gamma)
    }

    pub fn context(&self) -> TwoStateVector {
        TwoStateVector::bench(self.theta, self.post_port)
    }
}

/// Intensities at one post-selection detector for the six analyzer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorRecord {
    pub i_plus: f64,
    pub i_minus: f64,
    pub i_r: f64,
    pub i_l: f64,
    pub i_h: f64,
    pub i_v: f64,
    /// Reference-port intensity (source fluctuation monitor).
    pub reference: f64,
    /// Set when a noisy reading went negative and was clipped to 0.
    pub clamped: bool,
}

impl DetectorRecord {
    /// Intensities in [`PointerOutcome::ALL`] order.
    pub fn new(i: [f64; 6], reference: f64) -> Self {
        let [i_plus, i_minus, i_r, i_l, i_h, i_v] = i;
        DetectorRecord {
            i_plus,
            i_minus,
            i_r,
            i_l,
            i_h,
            i_v,
            reference,
            clamped: false,
        }
    }

    /// Intensities in [`PointerOutcome::ALL`] order.
    pub fn intensities(&self) -> [f64; 6] {
        [
            self.i_plus,
            self.i_minus,
            self.i_r,
            self.i_l,
            self.i_h,
            self.i_v,
        ]
    }

    /// Port intensity averaged over the three pointer bases.
    pub fn total(&self) -> f64 {
        self.intensities().iter().sum::<f64>() / 3.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub sigma: f64,
}

impl EstimateWithError {
    pub fn new(value: f64, sigma: f64) -> Self {
        EstimateWithError { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        EstimateWithError { value, sigma: 0.0 }
    }

    pub fn undefined() -> Self {
        EstimateWithError {
            value: f64::NAN,
            sigma: f64::NAN,
        }
    }

    /// |value − target| ≤ k·σ.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.sigma
    }
}

/// The bench: PBS → H1(θ/2) → BD1 → H2(π/4, lower) → H3(γ/2, upper) →
/// H4(−γ/2, lower) → analyzer (Q1, H5, PBS) → H6(π/4, upper) → BD2 →
/// H8(π/8) → PBS → D2 (|+m₃⟩), D3 (|−m₃⟩).
///
/// H2 sits in the lower arm: the displacer leaves V there, and H2 turns it
/// into H so that both arms carry the pointer state |H⟩. Likewise H6 turns
/// the upper arm to V before BD2 so that the displacer can merge the arms.
pub fn build_network(cfg: &BenchConfig) -> BenchLayout {
    let plate = |angle: f64, arm: Arm| {
        BenchElement::Plate(ElementPlacement::new(WavePlate::half(angle), arm))
    };
    let elements = vec![
        BenchElement::Pbs,
        plate(cfg.theta / 2.0, Arm::Both),
        BenchElement::Bd,
        plate(FRAC_PI_4, Arm::Lower),
        plate(cfg.gamma / 2.0, Arm::Upper),
        plate(-cfg.gamma / 2.0, Arm::Lower),
        BenchElement::Analyzer,
        plate(FRAC_PI_4, Arm::Upper),
        BenchElement::Bd,
        plate(FRAC_PI_8, Arm::Both),
        BenchElement::Pbs,
        BenchElement::Detector(PostPort::PlusM3.detector().into()),
        BenchElement::Detector(PostPort::MinusM3.detector().into()),
    ];
    BenchLayout::new(elements, DEFAULT_DISPLACEMENT_MM).expect("non-empty layout")
}

/// Noiseless records for every detector of a layout, in detector order.
pub fn detect_all(layout: &BenchLayout) -> Result<Vec<(String, DetectorRecord)>> {
    let readings = PointerOutcome::ALL
        .iter()
        .map(|&o| layout.detect(o))
        .collect::<Result<Vec<_>>>()?;
    Ok(readings[0]
        .ports
        .iter()
        .enumerate()
        .map(|(k, (name, _))| {
            let i: [f64; 6] = std::array::from_fn(|o| readings[o].ports[k].1);
            (name.clone(), DetectorRecord::new(i, 1.0))
        })
        .collect())
}

/// Exact intensities at the configured post-selection port.
pub fn run_noiseless(cfg: &BenchConfig) -> Result<DetectorRecord> {
    cfg.validate()?;
    let name = cfg.post_port.detector();
    detect_all(&build_network(cfg))?
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, r)| r)
        .ok_or_else(|| Error::InvalidConfig(format!("no detector {name}")))
}

/// Deterministic generator for one (seed, detector index) pair.
fn shot_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn port_stream(port: PostPort) -> u64 {
    match port {
        PostPort::PlusM3 => 0,
        PostPort::MinusM3 => 1,
    }
}

/// Applies the shot-noise model to exact intensities.
pub fn add_noise(
    exact: &DetectorRecord,
    noise_rel: f64,
    shots: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<DetectorRecord>> {
    if noise_rel == 0.0 {
        return Ok(vec![*exact; shots]);
    }
    let normal = Normal::new(0.0, noise_rel)
        .map_err(|e| Error::InvalidConfig(format!("noise level: {e}")))?;
    Ok((0..shots)
        .map(|_| {
            let common = 1.0 + normal.sample(rng);
            let mut clamped = false;
            let mut port = |i: f64| {
                let v = i * common * (1.0 + normal.sample(rng));
                if v < 0.0 {
                    clamped = true;
                    0.0
                } else {
                    v
                }
            };
            let mut rec =
                DetectorRecord::new(exact.intensities().map(&mut port), exact.reference * common);
            rec.clamped = clamped;
            rec
        })
        .collect())
}

/// `shots` noisy records at the configured port, reproducible from `cfg.seed`.
pub fn run_noisy(cfg: &BenchConfig) -> Result<Vec<DetectorRecord>> {
    let exact = run_noiseless(cfg)?;
    let mut rng = shot_rng(cfg.seed, port_stream(cfg.post_port));
    add_noise(&exact, cfg.noise_rel, cfg.shots, &mut rng)
}

/// Noisy records for every detector of an arbitrary layout. Detector `k`
/// draws from stream `k` of `cfg.seed`, matching [`run_noisy`] on the
/// default network.
pub fn run_layout(
    layout: &BenchLayout,
    cfg: &BenchConfig,
) -> Result<Vec<(String, Vec<DetectorRecord>)>> {
    cfg.validate()?;
    detect_all(layout)?
        .into_iter()
        .enumerate()
        .map(|(k, (name, exact))| {
            let mut rng = shot_rng(cfg.seed, k as u64);
            Ok((name, add_noise(&exact, cfg.noise_rel, cfg.shots, &mut rng)?))
        })
        .collect()
}

fn mean_and_sem(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    (mean, sd, sd / n.sqrt())
}

/// Two estimates of the same standard error (sample scatter and first-order
/// propagation from per-port scatter) pooled by averaging their variances.
fn pooled(sem: f64, propagated: f64) -> f64 {
    ((sem * sem + propagated * propagated) / 2.0).sqrt()
}

/// Weak value and post-selection probability estimated from one port's records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortEstimate {
    pub p_post: EstimateWithError,
    pub re: EstimateWithError,
    pub im: EstimateWithError,
    /// Shots whose readout could not be inverted.
    pub rejected: usize,
    /// Shots with a clamped ratio or intensity.
    pub clamped: usize,
}

impl PortEstimate {
    pub fn weak_value(&self) -> Option<WeakValue> {
        WeakValue::new(Complex::new(self.re.value, self.im.value)).ok()
    }

    pub fn norm(&self) -> EstimateWithError {
        let n = self.re.value.hypot(self.im.value);
        if n == 0.0 {
            return EstimateWithError::new(0.0, self.re.sigma.hypot(self.im.sigma));
        }
        let s = (self.re.value * self.re.sigma).hypot(self.im.value * self.im.sigma) / n;
        EstimateWithError::new(n, s)
    }

    pub fn norm_sqr(&self) -> EstimateWithError {
        let n = self.norm();
        EstimateWithError::new(n.value * n.value, 2.0 * n.value * n.sigma)
    }
}

fn readout_of(rec: &DetectorRecord) -> Result<PointerReadout> {
    if rec.i_plus + rec.i_minus <= DARK_INTENSITY * rec.reference.abs() {
        return Err(Error::ZeroIntensity("σ_x"));
    }
    if rec.i_r + rec.i_l <= DARK_INTENSITY * rec.reference.abs() {
        return Err(Error::ZeroIntensity("σ_y"));
    }
    let mut r = expectations_from_intensities(rec)?;
    // noise can push the readout just outside the unit disc
    let radius = r.radius();
    if radius > 1.0 {
        r.sx /= radius;
        r.sy /= radius;
        r.clamped = true;
    }
    Ok(r)
}

/// Re and Im of the weak value with error bars.
///
/// Each shot is converted to a readout and inverted on the branch picked by
/// its H/V intensities; the estimate is the mean over accepted shots. The
/// error bar pools the standard error of that mean with first-order
/// propagation of the per-port scatter of reference-normalized intensities
/// through (I₊ − I₋)/(I₊ + I₋) and the inversion Jacobian at the mean readout.
pub fn estimate_weak_value(
    records: &[DetectorRecord],
    c: Coupling,
) -> Result<(EstimateWithError, EstimateWithError, usize)> {
    let est = estimate_port(records, c)?;
    if est.re.value.is_nan() {
        return Err(Error::AllShotsRejected(records.len()));
    }
    Ok((est.re, est.im, est.rejected))
}

/// Like [`estimate_weak_value`], also estimating the post-selection
/// probability from the H-analyzer intensity. Shots whose H intensity is
/// dark (post-selection orthogonal to the preparation) are rejected; when
/// every shot is, the weak-value fields are NaN and only `p_post` is
/// meaningful.
pub fn estimate_port(records: &[DetectorRecord], c: Coupling) -> Result<PortEstimate> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no detector records".into()));
    }
    if c.gamma() == 0.0 {
        return Err(Error::ZeroCoupling);
    }

    let cos2 = c.gamma().cos().powi(2);
    let normalized: Vec<[f64; 6]> = records
        .iter()
        .map(|r| r.intensities().map(|i| i / r.reference))
        .collect();
    let p_shots: Vec<f64> = normalized.iter().map(|x| x[4] / cos2).collect();
    let (p_mean, p_sd, p_sem) = mean_and_sem(&p_shots);
    // the H reading is the only input, so propagation reduces to its scatter
    let p_post =
        EstimateWithError::new(p_mean, pooled(p_sem, p_sd / (records.len() as f64).sqrt()));

    let mut accepted = Vec::with_capacity(records.len());
    let mut rejected = 0;
    let mut clamped = 0;
    for (rec, norm) in records.iter().zip(&normalized) {
        if norm[4] <= DARK_INTENSITY {
            rejected += 1;
            continue;
        }
        let w = readout_of(rec).and_then(|r| {
            if r.clamped || rec.clamped {
                clamped += 1;
            }
            let branch = branch_from_intensities(rec);
            invert_pointer(r, c, branch).map(|inv| match branch {
                Branch::Strong => inv.strong(),
                _ => inv.weak(),
            })
        });
        match w {
            Ok(w) => accepted.push((w, *norm)),
            Err(_) => rejected += 1,
        }
    }
    if accepted.is_empty() {
        return Ok(PortEstimate {
            p_post,
            re: EstimateWithError::undefined(),
            im: EstimateWithError::undefined(),
            rejected,
            clamped,
        });
    }

    let n = accepted.len() as f64;
    let (re_mean, _, re_sem) =
        mean_and_sem(&accepted.iter().map(|(w, _)| w.re()).collect::<Vec<_>>());
    let (im_mean, _, im_sem) =
        mean_and_sem(&accepted.iter().map(|(w, _)| w.im()).collect::<Vec<_>>());

    // per-port scatter and means over accepted shots
    let mut mu = [0.0; 6];
    let mut sd = [0.0; 6];
    for k in 0..6 {
        let xs: Vec<f64> = accepted.iter().map(|(_, x)| x[k]).collect();
        let (m, s, _) = mean_and_sem(&xs);
        mu[k] = m;
        sd[k] = s;
    }
    let ratio_sigma = |a: usize, b: usize| {
        let s = mu[a] + mu[b];
        let da = 2.0 * mu[b] / (s * s);
        let db = 2.0 * mu[a] / (s * s);
        ((da * sd[a]).powi(2) + (db * sd[b]).powi(2)).sqrt()
    };
    let (sig_x, sig_y) = (ratio_sigma(0, 1), ratio_sigma(2, 3));
    let mean_readout = PointerReadout::new(
        (mu[0] - mu[1]) / (mu[0] + mu[1]),
        (mu[2] - mu[3]) / (mu[2] + mu[3]),
    );
    let branch = if mu[4] >= mu[5] {
        Branch::Weak
    } else {
        Branch::Strong
    };
    let jac = inversion_jacobian(mean_readout, c, branch);
    let per_shot = |row: [f64; 2]| ((row[0] * sig_x).powi(2) + (row[1] * sig_y).powi(2)).sqrt();
    let (re_prop, im_prop) = match jac {
        Some([jr, ji]) => (per_shot(jr) / n.sqrt(), per_shot(ji) / n.sqrt()),
        None => (re_sem, im_sem),
    };

    Ok(PortEstimate {
        p_post,
        re: EstimateWithError::new(re_mean, pooled(re_sem, re_prop)),
        im: EstimateWithError::new(im_mean, pooled(im_sem, im_prop)),
        rejected,
        clamped,
    })
}

/// ∂(Re w, Im w)/∂(sx, sy) of the inversion on one branch, by central
/// differences. `None` when the stencil leaves the unit disc or hits r = 0
/// on the strong branch.
fn inversion_jacobian(r: PointerReadout, c: Coupling, branch: Branch) -> Option<[[f64; 2]; 2]> {
    let h = 1e-6;
    if r.radius() + h >= 1.0 {
        return None;
    }
    let at = |sx: f64, sy: f64| {
        invert_pointer(PointerReadout::new(sx, sy), c, branch)
            .ok()
            .map(|i| match branch {
                Branch::Strong => i.strong(),
                _ => i.weak(),
            })
    };
    let dx_hi = at(r.sx + h, r.sy)?;
    let dx_lo = at(r.sx - h, r.sy)?;
    let dy_hi = at(r.sx, r.sy + h)?;
    let dy_lo = at(r.sx, r.sy - h)?;
    Some([
        [
            (dx_hi.re() - dx_lo.re()) / (2.0 * h),
            (dy_hi.re() - dy_lo.re()) / (2.0 * h),
        ],
        [
            (dx_hi.im() - dx_lo.im()) / (2.0 * h),
            (dy_hi.im() - dy_lo.im()) / (2.0 * h),
        ],
    ])
}

/// K = 2p(1 ∓ Re w) for one branch, with first-order error propagation.
pub fn k_branch(p: EstimateWithError, re_w: EstimateWithError) -> [EstimateWithError; 2] {
    if re_w.value.is_nan() {
        // dark port: the product vanishes with p
        let k = EstimateWithError::new(2.0 * p.value, 2.0 * p.sigma);
        return [k, k];
    }
    [-1.0, 1.0].map(|sign| {
        let factor = 1.0 + sign * re_w.value;
        let value = 2.0 * p.value * factor;
        let sigma =
            ((2.0 * factor * p.sigma).powi(2) + (2.0 * p.value * re_w.sigma).powi(2)).sqrt();
        EstimateWithError::new(value, sigma)
    })
}

/// K₃₁ … K₃₄ from the two post-selection branches.
pub fn k_quadruple(plus: &PortEstimate, minus: &PortEstimate) -> [EstimateWithError; 4] {
    let [k31, k32] = k_branch(plus.p_post, plus.re);
    let [k33, k34] = k_branch(minus.p_post, minus.re);
    [k31, k32, k33, k34]
}

/// Exact values for one post-selection branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortTheory {
    pub p_post: f64,
    /// `None` when the post-selection is orthogonal to the preparation.
    pub weak: Option<WeakValue>,
}

impl PortTheory {
    pub fn new(theta: f64, port: PostPort) -> Self {
        let ctx = TwoStateVector::bench(theta, port);
        PortTheory {
            p_post: postselect_prob(&ctx),
            weak: weak_value(&path_observable(), &ctx).ok(),
        }
    }

    pub fn re_w(&self) -> f64 {
        self.weak.map_or(f64::NAN, |w| w.re())
    }

    pub fn im_w(&self) -> f64 {
        self.weak.map_or(f64::NAN, |w| w.im())
    }
}

/// Theory quadruple at θ, built from post-selection probabilities and weak values.
pub fn theory_quadruple(theta: f64) -> Result<KQuadruple> {
    let plus = PortTheory::new(theta, PostPort::PlusM3);
    let minus = PortTheory::new(theta, PostPort::MinusM3);
    let w = |t: PortTheory| t.weak.unwrap_or(WeakValue::real(0.0));
    // a dark branch contributes exactly zero and the other carries everything
    let (p_plus, p_minus) = match (plus.weak, minus.weak) {
        (_, None) => (1.0, 0.0),
        (None, _) => (0.0, 1.0),
        _ => (plus.p_post, minus.p_post),
    };
    k3_from_weak(p_plus, p_minus, w(plus), w(minus))
}

/// One θ value of the θ-sweep: both post-selection branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub theta_deg: f64,
    pub plus: PortEstimate,
    pub minus: PortEstimate,
    /// Amplified p₊ for N = 2, 3 and the configured N.
    pub p_plus_n2: f64,
    pub p_plus_n3: f64,
    pub p_plus_amp: f64,
    pub k: [EstimateWithError; 4],
    pub plus_theory: PortTheory,
    pub minus_theory: PortTheory,
    pub k_theory: KQuadruple,
}

/// One γ value of the γ-sweep at the configured post-selection port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub gamma_deg: f64,
    pub estimate: PortEstimate,
    pub norm_w: EstimateWithError,
    pub norm_w_sq: EstimateWithError,
    pub theory: PortTheory,
}

fn row_config(template: &BenchConfig, index: usize) -> BenchConfig {
    BenchConfig {
        seed: template.seed.wrapping_add(index as u64),
        ..*template
    }
}

fn simulate_port(cfg: &BenchConfig, port: PostPort) -> Result<PortEstimate> {
    let cfg = BenchConfig {
        post_port: port,
        ..*cfg
    };
    estimate_port(&run_noisy(&cfg)?, cfg.coupling()?)
}

/// θ-sweep. Row `i` draws its noise from seed `template.seed + i`, so the
/// output does not depend on execution order.
pub fn sweep_theta(template: &BenchConfig, thetas: &[f64]) -> Result<Vec<ThetaRow>> {
    template.validate()?;
    if template.gamma == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    thetas
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let cfg = BenchConfig {
                theta,
                ..row_config(template, i)
            };
            let plus = simulate_port(&cfg, PostPort::PlusM3)?;
            let minus = simulate_port(&cfg, PostPort::MinusM3)?;
            let k = k_quadruple(&plus, &minus);
            Ok(ThetaRow {
                theta_deg: theta.to_degrees(),
                p_plus_n2: amplified_prob(plus.p_post.value, 2),
                p_plus_n3: amplified_prob(plus.p_post.value, 3),
                p_plus_amp: amplified_prob(plus.p_post.value, template.amplification_n),
                plus,
                minus,
                k,
                plus_theory: PortTheory::new(theta, PostPort::PlusM3),
                minus_theory: PortTheory::new(theta, PostPort::MinusM3),
                k_theory: theory_quadruple(theta)?,
            })
        })
        .collect()
}

/// γ-sweep at fixed θ and post-selection port. γ = 0 is rejected.
pub fn sweep_gamma(template: &BenchConfig, gammas: &[f64]) -> Result<Vec<GammaRow>> {
    template.validate()?;
    if gammas.contains(&0.0) {
        return Err(Error::ZeroCoupling);
    }
    gammas
        .par_iter()
        .enumerate()
        .map(|(i, &gamma)| {
            let cfg = BenchConfig {
                gamma,
                ..row_config(template, i)
            };
            cfg.validate()?;
            let estimate = simulate_port(&cfg, cfg.post_port)?;
            Ok(GammaRow {
                gamma_deg: gamma.to_degrees(),
                norm_w: estimate.norm(),
                norm_w_sq: estimate.norm_sqr(),
                estimate,
                theory: PortTheory::new(cfg.theta, cfg.post_port),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Basis, LinearOp, StateVector};
    use crate::lgi::k3_closed_form;
    use crate::optics::{polarization_filter, weak_interaction};
    use crate::weakmeas::pointer_expectations;

    const TAN30: f64 = 0.577_350_269_189_625_8;

    fn cfg(theta_deg: f64, gamma_deg: f64, port: PostPort) -> BenchConfig {
        BenchConfig {
            theta: theta_deg.to_radians(),
            gamma: gamma_deg.to_radians(),
            post_port: port,
            noise_rel: 0.0,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn prepare_stage_outputs_pointer_h_and_path_state() {
        let c = cfg(15.0, 12.0, PostPort::PlusM3);
        let layout = build_network(&c);
        let out = layout.state_after(PREPARE_STAGE.end, PointerOutcome::Plus);
        let h = StateVector::basis_state(Basis::polarization(), "H").unwrap();
        let want = StateVector::from_real(Basis::path(), &[0.966, 0.259])
            .unwrap()
            .tensor(&h);
        assert!(out.distance(&want) < 1e-3);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_stage_is_identity_on_pointer_h() {
        let layout = build_network(&cfg(30.0, 0.0, PostPort::PlusM3));
        let stage = layout.elements()[COUPLING_STAGE]
            .iter()
            .filter_map(|e| BenchLayout::element_operator(e, PointerOutcome::Plus))
            .fold(LinearOp::identity(Basis::path_polarization()), |acc, op| {
                op.compose(&acc).unwrap()
            });
        let keep_h = polarization_filter("H").unwrap();
        let restricted = stage.compose(&keep_h).unwrap();
        assert!(restricted.distance(&keep_h) < 1e-15);
        assert!(
            weak_interaction(0.0).distance(&LinearOp::identity(Basis::path_polarization())) < 1e-15
        );
    }

    #[test]
    fn network_elements_are_unitary_or_projective() {
        let layout = build_network(&cfg(33.0, -17.0, PostPort::MinusM3));
        for e in layout.elements() {
            if let Some(op) = BenchLayout::element_operator(e, PointerOutcome::R) {
                match e {
                    BenchElement::Pbs | BenchElement::Analyzer => {
                        // partial isometry: O†O is a projector
                        let m = op.adjoint().compose(&op).unwrap();
                        assert!(m.compose(&m).unwrap().distance(&m) < 1e-12, "{e:?}");
                    }
                    _ => assert!(op.is_unitary(), "{e:?}"),
                }
            }
        }
    }

    #[test]
    fn noiseless_readout_matches_pointer_relation() {
        let rec = run_noiseless(&cfg(15.0, 12.0, PostPort::PlusM3)).unwrap();
        let r = expectations_from_intensities(&rec).unwrap();
        let want = pointer_expectations(WeakValue::real(TAN30), Coupling::degrees(12.0).unwrap());
        assert!((r.sx - want.sx).abs() < 1e-10 && r.sy.abs() < 1e-10);
        assert!((rec.i_plus + rec.i_minus - (rec.i_r + rec.i_l)).abs() < 1e-10);
        assert_eq!(rec.reference, 1.0);
    }

    #[test]
    fn orthogonal_port_is_dark_only_without_coupling() {
        let rec = run_noiseless(&cfg(45.0, 0.0, PostPort::MinusM3)).unwrap();
        assert!(rec.total() < 1e-30);
        // the coupling scatters sin γ M₂|i⟩ into the port, all of it in V
        let rec = run_noiseless(&cfg(45.0, 12.0, PostPort::MinusM3)).unwrap();
        let s2 = 12f64.to_radians().sin().powi(2);
        assert!(rec.i_h < 1e-30);
        assert!((rec.i_v - s2).abs() < 1e-15);
        assert!((rec.i_plus + rec.i_minus - s2).abs() < 1e-15);
    }

    #[test]
    fn port_total_carries_the_coupling_factor() {
        for (theta, port) in [
            (15.0, PostPort::PlusM3),
            (15.0, PostPort::MinusM3),
            (70.0, PostPort::MinusM3),
        ] {
            let c = cfg(theta, 12.0, port);
            let rec = run_noiseless(&c).unwrap();
            let th = PortTheory::new(c.theta, port);
            let (s, co) = c.gamma.sin_cos();
            let factor = co * co + s * s * th.weak.unwrap().value().norm_sqr();
            assert!((rec.i_plus + rec.i_minus - th.p_post * factor).abs() < 1e-14);
            let est = estimate_port(&[rec], c.coupling().unwrap()).unwrap();
            assert!((est.p_post.value - th.p_post).abs() < 1e-14);
        }
    }

    #[test]
    fn large_weak_values_use_the_strong_branch() {
        // w₋ = tan 85° exceeds cot 12°
        let c = cfg(40.0, 12.0, PostPort::MinusM3);
        let rec = run_noiseless(&c).unwrap();
        assert!(rec.i_h < rec.i_v);
        let (re, _, _) = estimate_weak_value(&[rec], c.coupling().unwrap()).unwrap();
        assert!((re.value - 85f64.to_radians().tan()).abs() < 1e-9, "{re:?}");
    }

    #[test]
    fn zero_coupling_leaves_pointer_unpolarized_in_x() {
        let rec = run_noiseless(&cfg(20.0, 0.0, PostPort::PlusM3)).unwrap();
        assert!((rec.i_plus - rec.i_minus).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_reproduces_noiseless_records() {
        let c = BenchConfig {
            shots: 5,
            ..cfg(15.0, 12.0, PostPort::PlusM3)
        };
        let exact = run_noiseless(&c).unwrap();
        assert!(run_noisy(&c).unwrap().iter().all(|r| *r == exact));
    }

    #[test]
    fn noisy_runs_are_seed_deterministic() {
        let c = BenchConfig {
            noise_rel: 0.01,
            shots: 50,
            seed: 99,
            ..cfg(15.0, 12.0, PostPort::PlusM3)
        };
        assert_eq!(run_noisy(&c).unwrap(), run_noisy(&c).unwrap());
        let other = BenchConfig { seed: 100, ..c };
        assert_ne!(run_noisy(&c).unwrap(), run_noisy(&other).unwrap());
    }

    #[test]
    fn noisy_ratio_converges() {
        let c = BenchConfig {
            noise_rel: 0.01,
            shots: 10_000,
            seed: 3,
            ..cfg(15.0, 12.0, PostPort::PlusM3)
        };
        let exact = expectations_from_intensities(&run_noiseless(&c).unwrap())
            .unwrap()
            .sx;
        let xs: Vec<f64> = run_noisy(&c)
            .unwrap()
            .iter()
            .map(|r| (r.i_plus - r.i_minus) / (r.i_plus + r.i_minus))
            .collect();
        let (mean, _, sem) = mean_and_sem(&xs);
        assert!(
            (mean - exact).abs() < 3.0 * sem,
            "{mean} vs {exact} ± {sem}"
        );
    }

    #[test]
    fn estimate_single_noiseless_record() {
        let c = cfg(15.0, 12.0, PostPort::PlusM3);
        let rec = run_noiseless(&c).unwrap();
        let (re, im, rejected) = estimate_weak_value(&[rec], c.coupling().unwrap()).unwrap();
        assert!((re.value - TAN30).abs() < 1e-9 && re.sigma == 0.0);
        assert!(im.value.abs() < 1e-9 && im.sigma == 0.0);
        assert_eq!(rejected, 0);
    }

    #[test]
    fn estimate_noisy_within_three_sigma() {
        let c = BenchConfig {
            noise_rel: 0.01,
            shots: 1000,
            seed: 11,
            ..cfg(15.0, 12.0, PostPort::PlusM3)
        };
        let (re, _, _) =
            estimate_weak_value(&run_noisy(&c).unwrap(), c.coupling().unwrap()).unwrap();
        assert!(re.sigma > 0.0);
        assert!(re.covers(TAN30, 3.0), "{re:?}");
    }

    #[test]
    fn estimate_errors() {
        let c = Coupling::degrees(12.0).unwrap();
        assert!(estimate_weak_value(&[], c).is_err());
        let dark = DetectorRecord::new([0.0; 6], 1.0);
        assert_eq!(
            estimate_weak_value(&[dark, dark], c),
            Err(Error::AllShotsRejected(2))
        );
        let rec = DetectorRecord::new([0.5, 0.4, 0.45, 0.45, 0.8, 0.1], 1.0);
        assert_eq!(
            estimate_weak_value(&[rec], Coupling::new(0.0).unwrap()),
            Err(Error::ZeroCoupling)
        );
    }

    #[test]
    fn rejected_shots_are_counted() {
        let c = Coupling::degrees(12.0).unwrap();
        let good = run_noiseless(&cfg(15.0, 12.0, PostPort::PlusM3)).unwrap();
        let dark = DetectorRecord::new([0.0; 6], 1.0);
        let (re, _, rejected) = estimate_weak_value(&[good, dark, good], c).unwrap();
        assert_eq!(rejected, 1);
        assert!((re.value - TAN30).abs() < 1e-9);
    }

    #[test]
    fn theta_sweep_examples() {
        let template = cfg(0.0, 12.0, PostPort::PlusM3);
        let thetas = [0.0, 15.0, 45.0].map(f64::to_radians);
        let rows = sweep_theta(&template, &thetas).unwrap();
        let k33: Vec<f64> = rows.iter().map(|r| r.k[2].value).collect();
        assert!(k33[0].abs() < 1e-9);
        assert!((k33[1] + 0.366_025_403_784_438_65).abs() < 1e-9);
        assert!(k33[2].abs() < 1e-12);
        for (row, t) in rows.iter().zip(thetas) {
            assert!((row.plus_theory.p_post - (1.0 + (2.0 * t).sin()) / 2.0).abs() < 1e-15);
            assert!(row.k_theory.max_abs_diff(&k3_closed_form(t)) < 1e-12);
            if !row.plus.im.value.is_nan() {
                assert!(row.plus.im.value.abs() < 1e-9);
            }
        }
        assert!(rows[2].minus.re.value.is_nan());
        assert!(rows[2].minus_theory.weak.is_none());
    }

    #[test]
    fn gamma_sweep_examples() {
        let template = cfg(15.0, 12.0, PostPort::PlusM3);
        let gammas = [-12.0, 4.0, 12.0, 24.0].map(f64::to_radians);
        let rows = sweep_gamma(&template, &gammas).unwrap();
        for r in &rows {
            assert!((r.theory.re_w() - TAN30).abs() < 1e-12);
            assert!((r.estimate.re.value - TAN30).abs() < 1e-9);
            assert!((r.norm_w_sq.value - 1.0 / 3.0).abs() < 1e-9);
        }
        assert!(sweep_gamma(&template, &[0.0]).is_err());
    }

    #[test]
    fn sweep_rows_are_order_independent() {
        let template = BenchConfig {
            noise_rel: 0.01,
            shots: 20,
            seed: 5,
            ..cfg(0.0, 12.0, PostPort::PlusM3)
        };
        let thetas: Vec<f64> = (0..10).map(|k| (k as f64 * 9.0).to_radians()).collect();
        let all = sweep_theta(&template, &thetas).unwrap();
        let third = sweep_theta(
            &BenchConfig {
                seed: template.seed + 3,
                ..template
            },
            &thetas[3..4],
        )
        .unwrap();
        assert_eq!(all[3], third[0]);
    }

    #[test]
    fn config_validation() {
        let base = BenchConfig::default();
        assert!(base.validate().is_ok());
        for bad in [
            BenchConfig {
                gamma: FRAC_PI_2,
                ..base
            },
            BenchConfig {
                noise_rel: 0.5,
                ..base
            },
            BenchConfig {
                noise_rel: -0.1,
                ..base
            },
            BenchConfig { shots: 0, ..base },
            BenchConfig {
                amplification_n: 0,
                ..base
            },
            BenchConfig {
                theta: f64::NAN,
                ..base
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn layout_run_matches_port_runs() {
        let c = BenchConfig {
            noise_rel: 0.01,
            shots: 10,
            seed: 21,
            ..cfg(15.0, 12.0, PostPort::PlusM3)
        };
        let all = run_layout(&build_network(&c), &c).unwrap();
        assert_eq!(all[0].0, "D2");
        assert_eq!(all[0].1, run_noisy(&c).unwrap());
        let minus = BenchConfig {
            post_port: PostPort::MinusM3,
            ..c
        };
        assert_eq!(all[1].1, run_noisy(&minus).unwrap());
    }
}
