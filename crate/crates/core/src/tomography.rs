//! Canonical projective measurement, frame-dependent marginals and their
//! expressions through the bilinear covariants.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clifford::{canonical_projector, make_representation, GammaRep, RepKind};
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, CMat4};
use crate::lorentz::{spinor_lift, transform_bilinears, DirectionChannel, LorentzFrame, SpinorLift};
use crate::quadrature::SphereQuadrature;
use crate::spinor::{bilinears, BilinearSet, DiracSpinor};

/// The four rank-one projectors `P_k = diag(δ_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorSet {
    pub p: [CMat4; 4],
}

impl ProjectorSet {
    /// Largest deviation from idempotence, hermiticity, orthogonality and
    /// completeness.
    pub fn invariant_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut sum = CMat4::zeros();
        for j in 0..4 {
            let pj = &self.p[j];
            worst = worst.max(max_abs_diff(&(pj * pj), pj));
            worst = worst.max(max_abs_diff(&pj.adjoint(), pj));
            for k in 0..4 {
                if j != k {
                    worst = worst.max(crate::linalg::max_abs(&(pj * self.p[k])));
                }
            }
            sum += pj;
        }
        worst.max(max_abs_diff(&sum, &CMat4::identity()))
    }
}

pub fn projectors() -> ProjectorSet {
    ProjectorSet { p: std::array::from_fn(canonical_projector) }
}

/// The four outcome weights in one frame. `shots` is `None` for exact
/// probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalRecord {
    pub frame: String,
    pub w: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
}

impl MarginalRecord {
    pub fn exact(frame: impl Into<String>, w: [f64; 4]) -> Self {
        MarginalRecord { frame: frame.into(), w, shots: None }
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }
}

/// `w_k = |(Lψ)_k|²` and `⟨ψ̄|L⁻¹γ⁰P_kL|ψ⟩`.
pub fn marginal_paths(psi: &DiracSpinor, lift: &SpinorLift, rep: &GammaRep) -> Result<([f64; 4], [f64; 4])> {
    let moved = lift.apply(psi);
    let component = std::array::from_fn(|k| moved.component(k).norm_sqr());
    let inv = lift.l.try_inverse().ok_or(Error::Singular)?;
    let g0 = rep.gamma(0);
    let proj = projectors();
    let projector = std::array::from_fn(|k| psi.expectation(&(inv * g0 * proj.p[k] * lift.l), rep).re);
    Ok((component, projector))
}

pub fn marginals_with_lift(psi: &DiracSpinor, lift: &SpinorLift) -> MarginalRecord {
    let moved = lift.apply(psi);
    MarginalRecord::exact(lift.frame.label.clone(), std::array::from_fn(|k| moved.component(k).norm_sqr()))
}

/// Exact marginals of `ψ` in `frame`.
pub fn marginals(psi: &DiracSpinor, frame: &LorentzFrame, rep: &GammaRep) -> Result<MarginalRecord> {
    Ok(marginals_with_lift(psi, &spinor_lift(frame, rep)?))
}

/// A lower-index covariant component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Omega1,
    J(usize),
    S(usize, usize),
    K(usize),
    Omega2,
}

impl Slot {
    pub fn value(self, b: &BilinearSet) -> f64 {
        match self {
            Slot::Omega1 => b.omega1,
            Slot::J(mu) => b.j_lower()[mu],
            Slot::S(mu, nu) => b.s_lower(mu, nu),
            Slot::K(mu) => b.k_lower()[mu],
            Slot::Omega2 => b.omega2,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Omega1 => write!(f, "Ω₁"),
            Slot::J(mu) => write!(f, "J_{mu}"),
            Slot::S(mu, nu) => write!(f, "S_{mu}{nu}"),
            Slot::K(mu) => write!(f, "K_{mu}"),
            Slot::Omega2 => write!(f, "Ω₂"),
        }
    }
}

/// `w_k = ¼ Σ_i c_{ki} · slot_i` for the built-in representations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginalFormula {
    pub slots: [Slot; 4],
    pub coefficients: [[f64; 4]; 4],
}

impl MarginalFormula {
    pub fn evaluate(&self, b: &BilinearSet) -> [f64; 4] {
        let v = self.slots.map(|s| s.value(b));
        self.coefficients.map(|row| 0.25 * (0..4).map(|i| row[i] * v[i]).sum::<f64>())
    }
}

pub fn marginal_formula(kind: RepKind) -> Result<MarginalFormula> {
    match kind {
        RepKind::Majorana => Ok(MarginalFormula {
            slots: [Slot::J(0), Slot::J(2), Slot::S(0, 1), Slot::S(1, 2)],
            coefficients: [
                [1.0, -1.0, 1.0, 1.0],
                [1.0, -1.0, -1.0, -1.0],
                [1.0, 1.0, 1.0, -1.0],
                [1.0, 1.0, -1.0, 1.0],
            ],
        }),
        RepKind::Standard => Ok(MarginalFormula {
            slots: [Slot::Omega1, Slot::J(0), Slot::S(1, 2), Slot::K(3)],
            coefficients: [
                [1.0, 1.0, 1.0, -1.0],
                [1.0, 1.0, -1.0, 1.0],
                [-1.0, 1.0, -1.0, -1.0],
                [-1.0, 1.0, 1.0, 1.0],
            ],
        }),
        RepKind::Chiral => Ok(MarginalFormula {
            slots: [Slot::J(0), Slot::J(3), Slot::K(0), Slot::K(3)],
            coefficients: [
                [1.0, 1.0, -1.0, -1.0],
                [1.0, -1.0, -1.0, 1.0],
                [1.0, -1.0, 1.0, -1.0],
                [1.0, 1.0, 1.0, 1.0],
            ],
        }),
        RepKind::Custom => Err(Error::UnsupportedRep("custom".into())),
    }
}

/// Max difference between the covariant formula for `w_k` (evaluated on the
/// transformed covariants) and the directly computed marginals.
pub fn marginal_formula_check(psi: &DiracSpinor, frame: &LorentzFrame, kind: RepKind) -> Result<f64> {
    let formula = marginal_formula(kind)?;
    let rep = make_representation(kind)?;
    let direct = marginals(psi, frame, &rep)?;
    let b = transform_bilinears(&bilinears(psi, &rep)?, frame);
    let predicted = formula.evaluate(&b);
    Ok((0..4).map(|k| (predicted[k] - direct.w[k]).abs()).fold(0.0, f64::max))
}

/// Generator for one sampling stream, keyed by `SHA-256(seed, key, trial)`.
pub fn stream_rng(seed: u64, key: &str, trial: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((key.len() as u64).to_le_bytes());
    h.update(key.as_bytes());
    h.update(trial.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Draws `n` shots from the normalized distribution `w / Σw`; the stream is
/// keyed by the frame label.
pub fn sample_shots(record: &MarginalRecord, n: u64, seed: u64, trial: u64) -> Result<MarginalRecord> {
    sample_shots_keyed(record, n, seed, &record.frame, trial)
}

/// As [`sample_shots`], with an explicit stream key (used when the same frame
/// label occurs under several representations).
pub fn sample_shots_keyed(record: &MarginalRecord, n: u64, seed: u64, key: &str, trial: u64) -> Result<MarginalRecord> {
    if n == 0 {
        return Err(Error::InvalidInput("shot count must be at least 1".into()));
    }
    if let Some(&bad) = record.w.iter().find(|&&w| w < -1e-12 || !w.is_finite()) {
        return Err(Error::NegativeWeight(bad));
    }
    let p = record.w.map(|w| w.max(0.0));
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput(format!("marginals of `{}` sum to zero", record.frame)));
    }
    let mut rng = stream_rng(seed, key, trial);
    // multinomial as a chain of conditional binomials
    let mut counts = [0u64; 4];
    let mut left = n;
    let mut mass = total;
    for k in 0..3 {
        if left == 0 {
            break;
        }
        let q = if mass > 0.0 { (p[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = Binomial::new(left, q).map_err(|e| Error::InvalidInput(e.to_string()))?.sample(&mut rng);
        counts[k] = c;
        left -= c;
        mass -= p[k];
    }
    counts[3] = left;
    Ok(MarginalRecord {
        frame: record.frame.clone(),
        w: counts.map(|c| c as f64 / n as f64),
        shots: Some(n),
    })
}

/// Measurement protocol: which frames are visited under which representations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Majorana rep, frames `I, Rx, Ry, Rz`.
    DiscreteMajorana,
    /// Standard and chiral reps, frames `I, Rx, Ry, Rz`.
    CombinedStChiral,
    /// Majorana rep, direction frames on a product quadrature grid.
    ContinuousGrid { n_theta: usize, n_phi: usize },
}

impl Protocol {
    pub const DEFAULT_GRID: Protocol = Protocol::ContinuousGrid { n_theta: 32, n_phi: 64 };

    pub fn rep_kinds(&self) -> &'static [RepKind] {
        match self {
            Protocol::DiscreteMajorana | Protocol::ContinuousGrid { .. } => &[RepKind::Majorana],
            Protocol::CombinedStChiral => &[RepKind::Standard, RepKind::Chiral],
        }
    }

    /// Representation in which the spinor under test is expressed.
    pub fn primary_rep(&self) -> RepKind {
        self.rep_kinds()[0]
    }

    pub fn quadrature(&self) -> Option<Result<SphereQuadrature>> {
        match *self {
            Protocol::ContinuousGrid { n_theta, n_phi } => Some(SphereQuadrature::gauss_trapezoid(n_theta, n_phi)),
            _ => None,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::DiscreteMajorana => write!(f, "discrete_majorana"),
            Protocol::CombinedStChiral => write!(f, "combined_st_chiral"),
            Protocol::ContinuousGrid { n_theta, n_phi } => write!(f, "continuous_grid({n_theta},{n_phi})"),
        }
    }
}

impl FromStr for Protocol {
    type Err = Error;

    /// Accepts `discrete_majorana`, `combined_st_chiral`, `continuous_grid`
    /// (32×64) and `continuous_grid(nθ,nφ)`; `-` may replace `_`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_").to_ascii_lowercase();
        match norm.as_str() {
            "discrete_majorana" | "discrete" | "majorana" => return Ok(Protocol::DiscreteMajorana),
            "combined_st_chiral" | "combined" => return Ok(Protocol::CombinedStChiral),
            "continuous_grid" | "continuous" => return Ok(Protocol::DEFAULT_GRID),
            _ => {}
        }
        let bad = || Error::InvalidInput(format!("unknown protocol `{s}`"));
        let body = norm
            .strip_prefix("continuous_grid(")
            .or_else(|| norm.strip_prefix("continuous("))
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (a, b) = body.split_once(',').ok_or_else(bad)?;
        let n_theta: usize = a.trim().parse().map_err(|_| bad())?;
        let n_phi: usize = b.trim().parse().map_err(|_| bad())?;
        if n_theta < 2 || n_phi < 2 {
            return Err(Error::InvalidInput(format!("grid {n_theta}×{n_phi}: dimensions must be ≥ 2")));
        }
        Ok(Protocol::ContinuousGrid { n_theta, n_phi })
    }
}

/// Frames visited by a protocol. The continuous grid yields, for every
/// quadrature node, the three frames whose `e₃′`, `e₁′` and `e₂′` axis points
/// along the node (in that order of blocks).
pub fn frame_set(protocol: Protocol) -> Result<Vec<LorentzFrame>> {
    match protocol {
        Protocol::DiscreteMajorana | Protocol::CombinedStChiral => {
            Ok(vec![LorentzFrame::identity(), LorentzFrame::rx(), LorentzFrame::ry(), LorentzFrame::rz()])
        }
        Protocol::ContinuousGrid { n_theta, n_phi } => {
            let q = SphereQuadrature::gauss_trapezoid(n_theta, n_phi)?;
            Ok(DirectionChannel::ALL
                .iter()
                .flat_map(|&ch| q.nodes().map(move |n| LorentzFrame::direction(n.theta, n.phi, ch)))
                .collect())
        }
    }
}

/// Writes records as CSV with columns `frame,k,w,N` (one row per outcome,
/// `N` empty for exact data).
pub fn write_marginal_csv<W: Write>(records: &[MarginalRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(e.to_string());
    w.write_record(["frame", "k", "w", "N"]).map_err(io)?;
    for r in records {
        for k in 0..4 {
            let n = r.shots.map(|n| n.to_string()).unwrap_or_default();
            w.write_record([r.frame.as_str(), &(k + 1).to_string(), &format!("{:.16e}", r.w[k]), &n])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidInput(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::make_representation;
    use crate::linalg::c;
    use rand::SeedableRng;

    fn reps() -> Vec<GammaRep> {
        RepKind::BUILT_IN.iter().map(|&k| make_representation(k).unwrap()).collect()
    }

    #[test]
    fn projector_examples() {
        let p = projectors();
        assert_eq!(p.p[0][(0, 0)], c(1.0, 0.0));
        assert_eq!(crate::linalg::max_abs(&p.p[0]), 1.0);
        assert_eq!(p.p[1] * p.p[2], CMat4::zeros());
        assert!(p.invariant_residual() < 1e-13);
    }

    #[test]
    fn marginal_examples() {
        let st = make_representation(RepKind::Standard).unwrap();
        let r = marginals(&DiracSpinor::basis(0), &LorentzFrame::identity(), &st).unwrap();
        assert_eq!(r.w, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.frame, "I");
        let b = bilinears(&DiracSpinor::basis(0), &st).unwrap();
        assert_eq!(marginal_formula(RepKind::Standard).unwrap().evaluate(&b), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn paths_and_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for rep in reps() {
            for _ in 0..50 {
                let psi = DiracSpinor::random_normalized(&mut rng);
                let f = LorentzFrame::random_rotation(&mut rng);
                let lift = spinor_lift(&f, &rep).unwrap();
                let (a, b) = marginal_paths(&psi, &lift, &rep).unwrap();
                assert!((0..4).all(|k| (a[k] - b[k]).abs() < 1e-12));
                assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);

                let boost = spinor_lift(&LorentzFrame::random_boost(&mut rng, 1.0), &rep).unwrap();
                let (a, b) = marginal_paths(&psi, &boost, &rep).unwrap();
                assert!((0..4).all(|k| (a[k] - b[k]).abs() < 1e-12));
            }
            let psi = DiracSpinor::random_normalized(&mut rng);
            let boosted = marginals(&psi, &LorentzFrame::boost([0.0, 0.0, 1.0], 1.0).unwrap(), &rep).unwrap();
            assert!((boosted.total() - 1.0).abs() > 1e-3);
        }
    }

    #[test]
    fn formulas_match_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in RepKind::BUILT_IN {
            for _ in 0..30 {
                let psi = DiracSpinor::random_normalized(&mut rng);
                let frames = [
                    LorentzFrame::identity(),
                    LorentzFrame::random_rotation(&mut rng),
                    LorentzFrame::random_boost(&mut rng, 1.0),
                ];
                for f in &frames {
                    assert!(marginal_formula_check(&psi, f, kind).unwrap() < 1e-11);
                }
            }
        }
        let psi = DiracSpinor::basis(0);
        assert!(matches!(
            marginal_formula_check(&psi, &LorentzFrame::identity(), RepKind::Custom),
            Err(Error::UnsupportedRep(_))
        ));
    }

    #[test]
    fn shots_examples() {
        let r = MarginalRecord::exact("I", [1.0, 0.0, 0.0, 0.0]);
        let s = sample_shots(&r, 1000, 1, 0).unwrap();
        assert_eq!(s.w, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.shots, Some(1000));

        let r = MarginalRecord::exact("Rx", [0.1, 0.2, 0.3, 0.4]);
        let a = sample_shots(&r, 5000, 9, 2).unwrap();
        assert_eq!(a, sample_shots(&r, 5000, 9, 2).unwrap());
        assert_ne!(a, sample_shots(&r, 5000, 9, 3).unwrap());
        let counts: f64 = a.w.iter().map(|w| w * 5000.0).sum();
        assert_eq!(counts, 5000.0);

        let neg = MarginalRecord::exact("I", [1.1, -0.1, 0.0, 0.0]);
        assert!(matches!(sample_shots(&neg, 10, 0, 0), Err(Error::NegativeWeight(_))));
    }

    #[test]
    fn shot_error_scales_as_inverse_sqrt() {
        let r = MarginalRecord::exact("Ry", [0.15, 0.35, 0.2, 0.3]);
        let ns = [100u64, 1_000, 10_000, 100_000, 1_000_000];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &n in &ns {
            let mut errs: Vec<f64> = (0..200)
                .map(|t| {
                    let s = sample_shots(&r, n, 77, t).unwrap();
                    (0..4).map(|k| (s.w[k] - r.w[k]).abs()).fold(0.0, f64::max)
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            xs.push((n as f64).ln());
            ys.push(errs[errs.len() / 2].ln());
        }
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn frame_sets() {
        let d = frame_set(Protocol::DiscreteMajorana).unwrap();
        let labels: Vec<_> = d.iter().map(|f| f.label.as_str()).collect();
        assert_eq!(labels, ["I", "Rx", "Ry", "Rz"]);
        let g = frame_set(Protocol::ContinuousGrid { n_theta: 4, n_phi: 6 }).unwrap();
        assert_eq!(g.len(), 3 * 24);
        for f in d.iter().chain(&g) {
            f.validate().unwrap();
        }
        assert!(g[0].label.starts_with("dir("));
        assert!(g[24].label.starts_with("dir1("));
        assert!(g[48].label.starts_with("dir2("));
    }

    #[test]
    fn protocol_names() {
        for p in [Protocol::DiscreteMajorana, Protocol::CombinedStChiral, Protocol::ContinuousGrid { n_theta: 8, n_phi: 16 }] {
            assert_eq!(p.to_string().parse::<Protocol>().unwrap(), p);
        }
        assert_eq!("continuous".parse::<Protocol>().unwrap(), Protocol::DEFAULT_GRID);
        assert!("continuous_grid(1,4)".parse::<Protocol>().is_err());
        assert!("tomography".parse::<Protocol>().is_err());
        let json = serde_json::to_string(&Protocol::ContinuousGrid { n_theta: 2, n_phi: 3 }).unwrap();
        assert_eq!(json, r#"{"continuous_grid":{"n_theta":2,"n_phi":3}}"#);
    }

    #[test]
    fn csv_layout() {
        let recs = [MarginalRecord::exact("I", [1.0, 0.0, 0.0, 0.0]), MarginalRecord { frame: "Rx".into(), w: [0.5, 0.5, 0.0, 0.0], shots: Some(2) }];
        let mut buf = Vec::new();
        write_marginal_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "frame,k,w,N");
        assert_eq!(lines[1], "I,1,1.0000000000000000e0,");
        assert_eq!(lines[5], "Rx,1,5.0000000000000000e-1,2");
        assert_eq!(lines.len(), 9);
        let json = serde_json::to_string(&recs[0]).unwrap();
        assert_eq!(json, r#"{"frame":"I","w":[1.0,0.0,0.0,0.0]}"#);
    }
}
