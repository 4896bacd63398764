//! Transmit-signal assembly, power constraints, QPSK mapping, radar
//! echoes, and RF impairments (Wiener phase noise, I/Q imbalance).
//!
//! Powers are linear-scale throughout; dB conversion happens at the
//! config boundary.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{CMat, RMat};
use crate::rng::SeedStream;

pub const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Linear power from dB.
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// dB from linear power.
pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[derive(Debug, Error)]
pub enum WaveformError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Power-budget interpretation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerMode {
    /// Average over subcarriers bounded by `p_max` (each subcarrier may
    /// exceed it as long as the mean does not).
    #[default]
    Average,
    /// Every subcarrier bounded by `p_max / N`.
    PerSubcarrier,
}

/// Per-user, per-subcarrier communication powers plus per-subcarrier
/// jamming powers, against a total linear budget `p_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// K x N communication power coefficients.
    pub comm_power: RMat,
    /// Jamming power per subcarrier.
    pub jam_power: Vec<f64>,
    /// Total budget, linear scale.
    pub p_max: f64,
}

impl PowerAllocation {
    /// Uniform split: fraction `jam_frac` of each subcarrier budget goes
    /// to jamming, the rest evenly across users.
    pub fn uniform(k: usize, n_sub: usize, p_max: f64, jam_frac: f64, mode: PowerMode) -> Self {
        assert!((0.0..=1.0).contains(&jam_frac));
        let per_sub = match mode {
            PowerMode::Average => p_max,
            PowerMode::PerSubcarrier => p_max / n_sub as f64,
        };
        PowerAllocation {
            comm_power: RMat::from_element(k, n_sub, per_sub * (1.0 - jam_frac) / k as f64),
            jam_power: vec![per_sub * jam_frac; n_sub],
            p_max,
        }
    }

    pub fn n_users(&self) -> usize {
        self.comm_power.nrows()
    }

    pub fn n_sub(&self) -> usize {
        self.comm_power.ncols()
    }
}

/// Messages, mapped symbols, jamming samples, and the assembled transmit
/// matrix for one frame.
#[derive(Debug, Clone)]
pub struct TransmitFrame {
    /// N_t x N transmit matrix (columns are subcarriers).
    pub x: CMat,
    /// K x N message indices.
    pub messages: Vec<Vec<usize>>,
    /// K x N mapped unit-energy symbols.
    pub symbols: CMat,
    /// CN(0, 1) jamming samples, one per subcarrier.
    pub jam_samples: Vec<Complex64>,
    /// Probing time slots for covariance-form sensing.
    pub time_slots: usize,
}

impl TransmitFrame {
    /// Draw uniform messages and CN(0,1) jamming samples; `x` starts
    /// empty until [`assemble_tx`] fills it.
    pub fn random(
        k: usize,
        n_sub: usize,
        n_tx: usize,
        time_slots: usize,
        rng: &mut SeedStream,
    ) -> Self {
        let messages: Vec<Vec<usize>> = (0..k)
            .map(|_| (0..n_sub).map(|_| rng.below(4)).collect())
            .collect();
        let symbols = CMat::from_fn(k, n_sub, |i, n| qpsk_map(messages[i][n]));
        let jam_samples = (0..n_sub).map(|_| rng.cn(1.0)).collect();
        TransmitFrame {
            x: CMat::zeros(n_tx, n_sub),
            messages,
            symbols,
            jam_samples,
            time_slots,
        }
    }
}

/// Transmit-side impairment parameters.
///
/// `mu` and `nu` are the widely-linear coefficients derived from the
/// amplitude mismatch `eps_iq` and phase mismatch `dtheta_iq`:
/// `mu = cos(dt/2) + j*eps*sin(dt/2)`, `nu = eps*cos(dt/2) - j*sin(dt/2)`.
#[derive(Debug, Clone, Copy)]
pub struct ImpairmentParams {
    /// Phase-noise increment variance (rad^2).
    pub sigma_pn2: f64,
    /// Amplitude mismatch.
    pub eps_iq: f64,
    /// Phase mismatch (rad).
    pub dtheta_iq: f64,
    pub mu: Complex64,
    pub nu: Complex64,
}

impl ImpairmentParams {
    pub fn new(sigma_pn2: f64, eps_iq: f64, dtheta_iq: f64) -> Self {
        assert!(sigma_pn2 >= 0.0);
        let (s, c) = (dtheta_iq / 2.0).sin_cos();
        ImpairmentParams {
            sigma_pn2,
            eps_iq,
            dtheta_iq,
            mu: Complex64::new(c, eps_iq * s),
            nu: Complex64::new(eps_iq * c, -s),
        }
    }

    /// Ideal hardware.
    pub fn none() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn is_ideal(&self) -> bool {
        self.sigma_pn2 == 0.0 && self.eps_iq == 0.0 && self.dtheta_iq == 0.0
    }
}

/// Beam inputs for [`assemble_tx`] and [`enforce_power`]: unit-norm user
/// beams (`user_beams[n]` is N_t x K) and one FJ column per subcarrier.
pub struct BeamSet<'a> {
    pub user_beams: &'a [CMat],
    pub fj_beam: &'a [CMat],
}

/// Assemble the transmit matrix column by column:
/// `x^(n) = sum_k sqrt(gamma_k^(n)) f_k^(n) s_k^(n) + sqrt(zeta^(n)) v^(n) eta^(n)`.
pub fn assemble_tx(
    beams: &BeamSet,
    pa: &PowerAllocation,
    frame: &TransmitFrame,
) -> Result<TransmitFrame, WaveformError> {
    let n_sub = pa.n_sub();
    let k = pa.n_users();
    if beams.user_beams.len() != n_sub || beams.fj_beam.len() != n_sub {
        return Err(WaveformError::DimensionMismatch(format!(
            "beam lists must have one entry per subcarrier ({n_sub})"
        )));
    }
    let n_tx = beams.user_beams[0].nrows();
    if beams.user_beams[0].ncols() != k || frame.symbols.shape() != (k, n_sub) {
        return Err(WaveformError::DimensionMismatch(
            "user beam / symbol shapes do not match the allocation".into(),
        ));
    }
    let mut out = frame.clone();
    out.x = CMat::zeros(n_tx, n_sub);
    for n in 0..n_sub {
        let mut col = nalgebra::DVector::<Complex64>::zeros(n_tx);
        for kk in 0..k {
            let w = Complex64::new(pa.comm_power[(kk, n)].sqrt(), 0.0) * frame.symbols[(kk, n)];
            col += beams.user_beams[n].column(kk) * w;
        }
        let wj = Complex64::new(pa.jam_power[n].sqrt(), 0.0) * frame.jam_samples[n];
        col += beams.fj_beam[n].column(0) * wj;
        out.x.set_column(n, &col);
    }
    Ok(out)
}

/// Subcarrier power usage `sum_k gamma_k ||f_k||^2 + zeta ||v||^2`.
fn subcarrier_power(beams: &BeamSet, pa: &PowerAllocation, n: usize) -> f64 {
    let mut p = 0.0;
    for k in 0..pa.n_users() {
        p += pa.comm_power[(k, n)] * beams.user_beams[n].column(k).norm_squared();
    }
    p + pa.jam_power[n] * beams.fj_beam[n].column(0).norm_squared()
}

/// Scale the allocation down (never up) until the selected constraint
/// holds; ratios between entries in each scaled set are preserved.
pub fn enforce_power(pa: &PowerAllocation, beams: &BeamSet, mode: PowerMode) -> PowerAllocation {
    let n_sub = pa.n_sub();
    let mut out = pa.clone();
    match mode {
        PowerMode::Average => {
            let total: f64 = (0..n_sub).map(|n| subcarrier_power(beams, pa, n)).sum();
            let avg = total / n_sub as f64;
            if avg > pa.p_max {
                let s = pa.p_max / avg;
                out.comm_power *= s;
                out.jam_power.iter_mut().for_each(|z| *z *= s);
            }
        }
        PowerMode::PerSubcarrier => {
            let budget = pa.p_max / n_sub as f64;
            for n in 0..n_sub {
                let p = subcarrier_power(beams, pa, n);
                if p > budget {
                    let s = budget / p;
                    for k in 0..pa.n_users() {
                        out.comm_power[(k, n)] *= s;
                    }
                    out.jam_power[n] *= s;
                }
            }
        }
    }
    out
}

/// Gray-coded unit-energy QPSK: bit 0 selects the I sign, bit 1 the Q sign.
pub fn qpsk_map(msg: usize) -> Complex64 {
    assert!(msg < 4, "QPSK message index out of range");
    let re = if msg & 1 == 0 { SQRT_HALF } else { -SQRT_HALF };
    let im = if msg & 2 == 0 { SQRT_HALF } else { -SQRT_HALF };
    Complex64::new(re, im)
}

/// Nearest-neighbor QPSK decision.
pub fn qpsk_demap(y: Complex64) -> usize {
    (usize::from(y.re < 0.0)) | (usize::from(y.im < 0.0) << 1)
}

/// Radar echo `Y_s = alpha * G * X + N_s` with CN(0, sigma_s2) noise.
pub fn radar_echo(
    alpha: Complex64,
    sigma_s2: f64,
    g: &CMat,
    x: &CMat,
    rng: &mut SeedStream,
) -> CMat {
    let mut y = g * x * alpha;
    for z in y.iter_mut() {
        *z += rng.cn(sigma_s2);
    }
    y
}

/// Multiplicative Wiener phase noise across columns (time samples):
/// `out[:, t] = exp(j*phi_t) * in[:, t]` with
/// `phi_t = sum_{i<=t} w_i`, `w_i ~ N(0, sigma_pn2)`.
pub fn apply_phase_noise(signal: &CMat, imp: &ImpairmentParams, rng: &mut SeedStream) -> CMat {
    let mut out = signal.clone();
    if imp.sigma_pn2 == 0.0 {
        return out;
    }
    let std = imp.sigma_pn2.sqrt();
    let mut phi = 0.0;
    for t in 0..signal.ncols() {
        phi += std * rng.normal();
        let rot = Complex64::from_polar(1.0, phi);
        for r in 0..signal.nrows() {
            out[(r, t)] *= rot;
        }
    }
    out
}

/// Widely-linear I/Q imbalance `x -> mu*x + nu*conj(x)` elementwise.
pub fn apply_iq_imbalance(x: &CMat, imp: &ImpairmentParams) -> CMat {
    x.map(|z| imp.mu * z + imp.nu * z.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_abs;
    use approx::assert_relative_eq;

    fn unit_beams(n_tx: usize, k: usize, n_sub: usize, rng: &mut SeedStream) -> (Vec<CMat>, Vec<CMat>) {
        let user: Vec<CMat> = (0..n_sub)
            .map(|_| {
                let mut m = CMat::from_fn(n_tx, k, |_, _| rng.cn(1.0));
                for j in 0..k {
                    let c = m.column(j) / Complex64::new(m.column(j).norm(), 0.0);
                    m.set_column(j, &c);
                }
                m
            })
            .collect();
        let fj: Vec<CMat> = (0..n_sub)
            .map(|_| {
                let v = CMat::from_fn(n_tx, 1, |_, _| rng.cn(1.0));
                let nrm = v.norm();
                v / Complex64::new(nrm, 0.0)
            })
            .collect();
        (user, fj)
    }

    #[test]
    fn assemble_without_jamming_is_pure_comm() {
        let mut rng = SeedStream::new(1);
        let (user, fj) = unit_beams(4, 2, 3, &mut rng);
        let beams = BeamSet { user_beams: &user, fj_beam: &fj };
        let mut pa = PowerAllocation::uniform(2, 3, 4.0, 0.5, PowerMode::Average);
        pa.jam_power = vec![0.0; 3];
        let frame = TransmitFrame::random(2, 3, 4, 8, &mut rng);
        let out = assemble_tx(&beams, &pa, &frame).unwrap();
        for n in 0..3 {
            let mut expect = nalgebra::DVector::<Complex64>::zeros(4);
            for k in 0..2 {
                expect += user[n].column(k)
                    * (Complex64::new(pa.comm_power[(k, n)].sqrt(), 0.0) * frame.symbols[(k, n)]);
            }
            assert!((out.x.column(n) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn assemble_unit_case() {
        // K=1, gamma=1, f=e_1, s=1, zeta=0 -> x = e_1.
        let mut user = vec![CMat::zeros(4, 1)];
        user[0][(0, 0)] = Complex64::new(1.0, 0.0);
        let fj = vec![CMat::from_element(4, 1, Complex64::new(0.5, 0.0))];
        let beams = BeamSet { user_beams: &user, fj_beam: &fj };
        let pa = PowerAllocation {
            comm_power: RMat::from_element(1, 1, 1.0),
            jam_power: vec![0.0],
            p_max: 1.0,
        };
        let mut frame = TransmitFrame::random(1, 1, 4, 1, &mut SeedStream::new(2));
        frame.symbols[(0, 0)] = Complex64::new(1.0, 0.0);
        let out = assemble_tx(&beams, &pa, &frame).unwrap();
        assert!((out.x[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(out.x.column(0).rows_range(1..).norm() < 1e-15);
    }

    #[test]
    fn assemble_matches_elementwise_oracle() {
        let mut rng = SeedStream::new(3);
        let (user, fj) = unit_beams(5, 3, 4, &mut rng);
        let beams = BeamSet { user_beams: &user, fj_beam: &fj };
        let pa = PowerAllocation::uniform(3, 4, 9.0, 0.3, PowerMode::Average);
        let frame = TransmitFrame::random(3, 4, 5, 8, &mut rng);
        let out = assemble_tx(&beams, &pa, &frame).unwrap();
        for n in 0..4 {
            for r in 0..5 {
                let mut z = Complex64::new(0.0, 0.0);
                for k in 0..3 {
                    z += Complex64::new(pa.comm_power[(k, n)].sqrt(), 0.0)
                        * user[n][(r, k)]
                        * frame.symbols[(k, n)];
                }
                z += Complex64::new(pa.jam_power[n].sqrt(), 0.0) * fj[n][(r, 0)] * frame.jam_samples[n];
                assert!((out.x[(r, n)] - z).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn assemble_is_linear_in_symbols_and_jamming() {
        let mut rng = SeedStream::new(4);
        let (user, fj) = unit_beams(4, 2, 2, &mut rng);
        let beams = BeamSet { user_beams: &user, fj_beam: &fj };
        let pa = PowerAllocation::uniform(2, 2, 4.0, 0.5, PowerMode::Average);
        let mut f1 = TransmitFrame::random(2, 2, 4, 1, &mut rng);
        let mut f2 = f1.clone();
        let c = Complex64::new(0.7, -1.1);
        for z in f2.symbols.iter_mut() {
            *z *= c;
        }
        for z in f2.jam_samples.iter_mut() {
            *z *= c;
        }
        let o1 = assemble_tx(&beams, &pa, &f1).unwrap();
        let o2 = assemble_tx(&beams, &pa, &f2).unwrap();
        assert!(max_abs(&(o1.x.map(|z| z * c) - o2.x)) < 1e-12);
        f1.symbols.fill(Complex64::new(0.0, 0.0));
        f1.jam_samples.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        let o0 = assemble_tx(&beams, &pa, &f1).unwrap();
        assert!(max_abs(&o0.x) < 1e-15);
    }

    #[test]
    fn enforce_power_leaves_feasible_unchanged() {
        let mut rng = SeedStream::new(5);
        let (user, fj) = unit_beams(4, 2, 3, &mut rng);
        let beams = BeamSet { user_beams: &user, fj_beam: &fj };
        let pa = PowerAllocation::uniform(2, 3, 10.0, 0.2, PowerMode::Average);
        let out = enforce_power(&pa, &beams, PowerMode::Average);
        assert_eq!(out, pa);
    }

    #[test]
    fn enforce_power_scales_double_budget_by_half() {
        let mut rng = SeedStream::new(6);
        let (user, fj) = unit_beams(4, 2, 3, &mut rng);
        let beams = BeamSet { user_beams: &user, fj_beam: &fj };
        let mut pa = PowerAllocation::uniform(2, 3, 10.0, 0.2, PowerMode::Average);
        pa.comm_power *= 2.0;
        pa.jam_power.iter_mut().for_each(|z| *z *= 2.0);
        let out = enforce_power(&pa, &beams, PowerMode::Average);
        assert!((out.comm_power[(0, 0)] / pa.comm_power[(0, 0)] - 0.5).abs() < 1e-12);
        let total: f64 = (0..3)
            .map(|n| subcarrier_power(&BeamSet { user_beams: &user, fj_beam: &fj }, &out, n))
            .sum();
        assert_relative_eq!(total / 3.0, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn enforce_power_per_subcarrier_exhaustive() {
        let mut rng = SeedStream::new(7);
        let n_sub = 64;
        let p_max = db_to_lin(30.0);
        let (user, fj) = unit_beams(8, 2, n_sub, &mut rng);
        let beams = BeamSet { user_beams: &user, fj_beam: &fj };
        let mut pa = PowerAllocation::uniform(2, n_sub, p_max, 0.3, PowerMode::PerSubcarrier);
        // Inflate random subcarriers beyond budget.
        for n in 0..n_sub {
            let s = 1.0 + 3.0 * rng.uniform();
            for k in 0..2 {
                pa.comm_power[(k, n)] *= s;
            }
            pa.jam_power[n] *= s;
        }
        let out = enforce_power(&pa, &beams, PowerMode::PerSubcarrier);
        for n in 0..n_sub {
            let p = subcarrier_power(&beams, &out, n);
            assert!(
                p <= p_max / n_sub as f64 * (1.0 + 1e-12),
                "subcarrier {n} uses {p}"
            );
            // Ratios preserved within the subcarrier.
            let r_in = pa.comm_power[(0, n)] / pa.jam_power[n];
            let r_out = out.comm_power[(0, n)] / out.jam_power[n];
            assert_relative_eq!(r_in, r_out, max_relative = 1e-12);
            // Never increases.
            assert!(out.jam_power[n] <= pa.jam_power[n] * (1.0 + 1e-15));
        }
    }

    #[test]
    fn qpsk_round_trips_and_has_unit_energy() {
        for m in 0..4 {
            let s = qpsk_map(m);
            assert_relative_eq!(s.norm_sqr(), 1.0, max_relative = 1e-15);
            assert_eq!(qpsk_demap(s), m);
        }
    }

    #[test]
    fn qpsk_awgn_ser_matches_q_function() {
        // SER = 2Q(sqrt(EsN0)) - Q(sqrt(EsN0))^2 for Gray QPSK.
        let esn0 = db_to_lin(10.0);
        let n0 = 1.0 / esn0;
        let q = 0.5 * libm::erfc((esn0.sqrt()) / std::f64::consts::SQRT_2);
        let ser_expect = 2.0 * q - q * q;
        let mut rng = SeedStream::new(8);
        let n = 1_000_000usize;
        let mut errs = 0usize;
        for _ in 0..n {
            let m = rng.below(4);
            let y = qpsk_map(m) + rng.cn(n0);
            if qpsk_demap(y) != m {
                errs += 1;
            }
        }
        let ser = errs as f64 / n as f64;
        let sigma = (ser_expect * (1.0 - ser_expect) / n as f64).sqrt();
        assert!(
            (ser - ser_expect).abs() < 3.0 * sigma,
            "ser {ser} expect {ser_expect} (3 sigma {})",
            3.0 * sigma
        );
    }

    #[test]
    fn radar_echo_noiseless_identity() {
        let mut rng = SeedStream::new(9);
        let x = CMat::from_fn(4, 3, |_, _| rng.cn(1.0));
        let g = CMat::identity(4, 4);
        let y = radar_echo(Complex64::new(1.0, 0.0), 0.0, &g, &x, &mut rng);
        assert!(max_abs(&(y - x)) < 1e-15);
    }

    #[test]
    fn radar_echo_mean_is_alpha_g_x() {
        let mut rng = SeedStream::new(10);
        let x = CMat::from_fn(3, 2, |_, _| rng.cn(1.0));
        let g = CMat::from_fn(2, 3, |_, _| rng.cn(1.0));
        let alpha = Complex64::new(0.8, -0.3);
        let expect = &g * &x * alpha;
        let mut acc = CMat::zeros(2, 2);
        let trials = 10_000;
        for _ in 0..trials {
            acc += radar_echo(alpha, 1.0, &g, &x, &mut rng);
        }
        let mean = acc / Complex64::new(trials as f64, 0.0);
        // Entry std of the mean is 1/sqrt(trials) = 0.01.
        assert!(max_abs(&(mean - expect)) < 0.05);
    }

    #[test]
    fn radar_echo_columns_match_per_subcarrier_model() {
        let mut rng = SeedStream::new(11);
        let x = CMat::from_fn(4, 5, |_, _| rng.cn(1.0));
        let g = CMat::from_fn(3, 4, |_, _| rng.cn(1.0));
        let alpha = Complex64::new(0.5, 0.2);
        let y = radar_echo(alpha, 0.0, &g, &x, &mut rng);
        for n in 0..5 {
            let col = &g * x.column(n) * alpha;
            assert!((y.column(n) - col).norm() < 1e-13);
        }
    }

    #[test]
    fn phase_noise_zero_variance_is_identity() {
        let mut rng = SeedStream::new(12);
        let x = CMat::from_fn(2, 16, |_, _| rng.cn(1.0));
        let out = apply_phase_noise(&x, &ImpairmentParams::none(), &mut rng);
        assert_eq!(out, x);
    }

    #[test]
    fn phase_noise_preserves_magnitudes() {
        let mut rng = SeedStream::new(13);
        let x = CMat::from_fn(2, 64, |_, _| rng.cn(1.0));
        let imp = ImpairmentParams::new(0.05, 0.0, 0.0);
        let out = apply_phase_noise(&x, &imp, &mut rng);
        for (a, b) in x.iter().zip(out.iter()) {
            assert_relative_eq!(a.norm(), b.norm(), max_relative = 1e-12);
        }
    }

    #[test]
    fn phase_noise_variance_follows_wiener_law() {
        let sigma2 = 1e-4;
        let imp = ImpairmentParams::new(sigma2, 0.0, 0.0);
        let t_len = 64usize;
        let x = CMat::from_element(1, t_len, Complex64::new(1.0, 0.0));
        let mut rng = SeedStream::new(14);
        let walks = 10_000;
        let mut acc = vec![0.0f64; t_len];
        for _ in 0..walks {
            let out = apply_phase_noise(&x, &imp, &mut rng);
            for t in 0..t_len {
                acc[t] += out[(0, t)].arg().powi(2);
            }
        }
        for (t, sum) in acc.iter().enumerate().skip(9).step_by(16) {
            let var = sum / walks as f64;
            let expect = (t as f64 + 1.0) * sigma2;
            assert!(
                (var - expect).abs() < 0.05 * expect,
                "t={t} var {var} expect {expect}"
            );
        }
    }

    #[test]
    fn iq_ideal_is_identity() {
        let imp = ImpairmentParams::new(0.0, 0.0, 0.0);
        assert_eq!(imp.mu, Complex64::new(1.0, 0.0));
        assert_eq!(imp.nu, Complex64::new(0.0, 0.0));
        let mut rng = SeedStream::new(15);
        let x = CMat::from_fn(3, 3, |_, _| rng.cn(1.0));
        assert_eq!(apply_iq_imbalance(&x, &imp), x);
    }

    #[test]
    fn iq_amplitude_only_reduces_to_x_plus_eps_conj() {
        let imp = ImpairmentParams::new(0.0, 0.07, 0.0);
        assert_relative_eq!(imp.mu.re, 1.0, max_relative = 1e-15);
        assert!(imp.mu.im.abs() < 1e-15);
        assert_relative_eq!(imp.nu.re, 0.07, max_relative = 1e-15);
        let mut rng = SeedStream::new(16);
        let x = CMat::from_fn(2, 2, |_, _| rng.cn(1.0));
        let out = apply_iq_imbalance(&x, &imp);
        let expect = x.map(|z| z + z.conj() * 0.07);
        assert!(max_abs(&(out - expect)) < 1e-15);
    }

    #[test]
    fn iq_fig12_setting_matches_independent_evaluation() {
        // eps = 0.02, dtheta = 1 degree; check |mu|^2 and |nu|^2 against
        // the half-angle expansion evaluated separately.
        let eps = 0.02;
        let dt = 1f64.to_radians();
        let imp = ImpairmentParams::new(0.0, eps, dt);
        let c2 = (dt / 2.0).cos().powi(2);
        let s2 = (dt / 2.0).sin().powi(2);
        assert_relative_eq!(imp.mu.norm_sqr(), c2 + eps * eps * s2, max_relative = 1e-14);
        assert_relative_eq!(imp.nu.norm_sqr(), eps * eps * c2 + s2, max_relative = 1e-14);
    }

    #[test]
    fn iq_image_rejection_ratio() {
        // Pure tone: image power over direct power equals |nu|^2/|mu|^2.
        let imp = ImpairmentParams::new(0.0, 0.05, 0.03);
        let t_len = 256usize;
        let w = 2.0 * std::f64::consts::PI * 5.0 / t_len as f64;
        let x = CMat::from_fn(1, t_len, |_, t| Complex64::from_polar(1.0, w * t as f64));
        let out = apply_iq_imbalance(&x, &imp);
        // Correlate against the direct and image tones.
        let mut direct = Complex64::new(0.0, 0.0);
        let mut image = Complex64::new(0.0, 0.0);
        for t in 0..t_len {
            let tone = Complex64::from_polar(1.0, w * t as f64);
            direct += out[(0, t)] * tone.conj();
            image += out[(0, t)] * tone;
        }
        direct /= Complex64::new(t_len as f64, 0.0);
        image /= Complex64::new(t_len as f64, 0.0);
        let ratio = image.norm_sqr() / direct.norm_sqr();
        let expect = imp.nu.norm_sqr() / imp.mu.norm_sqr();
        assert_relative_eq!(ratio, expect, max_relative = 1e-10);
    }
}
