//! Fading channels, CSI estimates with controlled error, and array
//! steering models with analytic angle derivatives.
//!
//! Two steering modes sit behind one interface:
//!
//! * planar Kronecker — the transmit-array response column
//!   `a_x(theta, phi) ⊗ a_y(theta, phi)` for an `N_x x N_y` grid, with
//!   per-element phases `2*pi*d*m*sin(theta)*cos(phi)` along x and
//!   `2*pi*d*n*sin(phi)` along y (`d` = spacing in wavelengths);
//! * bistatic outer product — `b(theta, phi) * a(theta, phi)^H`, a rank-1
//!   `N_r x N_t` echo response with a receive ULA parallel to the transmit
//!   x-axis.
//!
//! The phase reference defaults to the first element; a centered reference
//! is available for symmetric-aperture studies.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::CMat;
use crate::rng::SeedStream;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("CSI error variance must be nonnegative, got {0}")]
    NegativeCsiVariance(f64),

    #[error("invalid array geometry: {0}")]
    BadGeometry(String),
}

/// Where the zero-phase element sits in the array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseReference {
    /// Phase zero at the first element (index 0).
    #[default]
    FirstElement,
    /// Phase zero at the array centroid; element offsets are symmetric.
    Centered,
}

/// Which steering construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SteeringMode {
    /// Transmit-array response column `a_x ⊗ a_y` (N_t x 1).
    PlanarKronecker,
    /// Rank-1 bistatic echo response `b a^H` (N_r x N_t).
    #[default]
    BistaticOuterProduct,
}

/// Angular parameter selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Angle {
    Theta,
    Phi,
}

/// Antenna array description.
#[derive(Debug, Clone, Copy)]
pub struct ArrayGeometry {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_eve: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
    /// Planar factorization (N_x, N_y) with N_x * N_y = N_t.
    pub tx_grid: (usize, usize),
    pub phase_ref: PhaseReference,
}

impl ArrayGeometry {
    pub fn new(
        n_tx: usize,
        n_rx: usize,
        n_eve: usize,
        tx_grid: (usize, usize),
    ) -> Result<Self, ChannelError> {
        let geom = Self {
            n_tx,
            n_rx,
            n_eve,
            spacing: 0.5,
            tx_grid,
            phase_ref: PhaseReference::default(),
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.n_tx < 1 || self.n_rx < 1 || self.n_eve < 1 {
            return Err(ChannelError::BadGeometry(
                "antenna counts must be at least 1".into(),
            ));
        }
        if self.spacing <= 0.0 {
            return Err(ChannelError::BadGeometry("spacing must be positive".into()));
        }
        if self.tx_grid.0 * self.tx_grid.1 != self.n_tx {
            return Err(ChannelError::BadGeometry(format!(
                "tx_grid {}x{} does not factor n_tx = {}",
                self.tx_grid.0, self.tx_grid.1, self.n_tx
            )));
        }
        Ok(())
    }
}

/// Per-subcarrier channel realization.
///
/// `h_b[n]` is the aggregated downlink matrix on subcarrier `n`: row `k`
/// holds `h_k^H`, so `h_b[n] * x` stacks the users' received samples.
/// `h_eve[n]` is the `N_t x N_e` Eve channel.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h_b: Vec<CMat>,
    pub h_eve: Vec<CMat>,
    pub sigma_c2: f64,
    pub sigma_e2: f64,
    pub sigma_s2: f64,
    /// Frequency-flat reflection coefficient.
    pub alpha: Complex64,
    pub n_sub: usize,
}

impl ChannelRealization {
    pub fn n_users(&self) -> usize {
        self.h_b[0].nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.h_b[0].ncols()
    }
}

/// CSI estimate `h_hat = h_b + delta_h` with per-entry error variance
/// `rho_csi`.
#[derive(Debug, Clone)]
pub struct CsiEstimate {
    pub h_hat: Vec<CMat>,
    pub delta_h: Vec<CMat>,
    pub rho_csi: f64,
}

/// True and estimated sensing angles (radians).
#[derive(Debug, Clone, Copy)]
pub struct AngleState {
    pub theta: f64,
    pub phi: f64,
    pub theta_hat: f64,
    pub phi_hat: f64,
    pub sigma_theta2: f64,
    pub sigma_phi2: f64,
}

impl AngleState {
    /// Exact angles with the given estimation-error variances; estimates
    /// start equal to the true values until [`perturb_angles`] is applied.
    pub fn new(theta: f64, phi: f64, sigma_theta2: f64, sigma_phi2: f64) -> Self {
        assert!(
            theta.abs() < std::f64::consts::FRAC_PI_2 && phi.abs() < std::f64::consts::FRAC_PI_2,
            "angles must lie in (-pi/2, pi/2)"
        );
        assert!(sigma_theta2 >= 0.0 && sigma_phi2 >= 0.0);
        Self {
            theta,
            phi,
            theta_hat: theta,
            phi_hat: phi,
            sigma_theta2,
            sigma_phi2,
        }
    }
}

/// I.i.d. Rayleigh fading: every channel entry is CN(0, 1).
///
/// Noise powers default to 1 (normalized) and the reflection coefficient
/// to 1; both are plain fields and can be overridden by the caller.
pub fn gen_rayleigh(
    geom: &ArrayGeometry,
    n_users: usize,
    n_sub: usize,
    rng: &mut SeedStream,
) -> ChannelRealization {
    assert!(n_users >= 1 && n_sub >= 1);
    let h_b = (0..n_sub)
        .map(|_| CMat::from_fn(n_users, geom.n_tx, |_, _| rng.cn(1.0)))
        .collect();
    let h_eve = (0..n_sub)
        .map(|_| CMat::from_fn(geom.n_tx, geom.n_eve, |_, _| rng.cn(1.0)))
        .collect();
    ChannelRealization {
        h_b,
        h_eve,
        sigma_c2: 1.0,
        sigma_e2: 1.0,
        sigma_s2: 1.0,
        alpha: Complex64::new(1.0, 0.0),
        n_sub,
    }
}

/// Add CN(0, rho) estimation noise to the legitimate channels,
/// independently per subcarrier. `rho = 0` returns the channel unchanged.
pub fn apply_csi_error(
    ch: &ChannelRealization,
    rho: f64,
    rng: &mut SeedStream,
) -> Result<CsiEstimate, ChannelError> {
    if rho < 0.0 {
        return Err(ChannelError::NegativeCsiVariance(rho));
    }
    let mut h_hat = Vec::with_capacity(ch.n_sub);
    let mut delta_h = Vec::with_capacity(ch.n_sub);
    for h in &ch.h_b {
        let d = if rho == 0.0 {
            CMat::zeros(h.nrows(), h.ncols())
        } else {
            CMat::from_fn(h.nrows(), h.ncols(), |_, _| rng.cn(rho))
        };
        h_hat.push(h + &d);
        delta_h.push(d);
    }
    Ok(CsiEstimate {
        h_hat,
        delta_h,
        rho_csi: rho,
    })
}

/// Element offset along one axis, honoring the phase reference.
fn offset(idx: usize, len: usize, phase_ref: PhaseReference) -> f64 {
    match phase_ref {
        PhaseReference::FirstElement => idx as f64,
        PhaseReference::Centered => idx as f64 - (len as f64 - 1.0) / 2.0,
    }
}

/// Spatial frequencies of the two grid axes: x follows
/// `sin(theta) * cos(phi)`, y follows `sin(phi)`.
fn spatial_freqs(theta: f64, phi: f64) -> (f64, f64) {
    (theta.sin() * phi.cos(), phi.sin())
}

fn steering_axis(len: usize, spacing: f64, freq: f64, phase_ref: PhaseReference) -> CMat {
    CMat::from_fn(len, 1, |m, _| {
        let phase = 2.0 * std::f64::consts::PI * spacing * offset(m, len, phase_ref) * freq;
        Complex64::from_polar(1.0, phase)
    })
}

/// d/d(freq) of a steering axis, times the chain factor `dfreq`.
fn steering_axis_deriv(
    len: usize,
    spacing: f64,
    freq: f64,
    dfreq: f64,
    phase_ref: PhaseReference,
) -> CMat {
    CMat::from_fn(len, 1, |m, _| {
        let pos = 2.0 * std::f64::consts::PI * spacing * offset(m, len, phase_ref);
        Complex64::from_polar(1.0, pos * freq) * Complex64::new(0.0, pos * dfreq)
    })
}

/// Transmit planar response column `a_x ⊗ a_y` of length `N_t`.
fn tx_response(geom: &ArrayGeometry, theta: f64, phi: f64) -> CMat {
    let (fx, fy) = spatial_freqs(theta, phi);
    let ax = steering_axis(geom.tx_grid.0, geom.spacing, fx, geom.phase_ref);
    let ay = steering_axis(geom.tx_grid.1, geom.spacing, fy, geom.phase_ref);
    ax.kronecker(&ay)
}

fn tx_response_deriv(geom: &ArrayGeometry, theta: f64, phi: f64, which: Angle) -> CMat {
    let (fx, fy) = spatial_freqs(theta, phi);
    let (dfx, dfy) = match which {
        Angle::Theta => (theta.cos() * phi.cos(), 0.0),
        Angle::Phi => (-theta.sin() * phi.sin(), phi.cos()),
    };
    let ax = steering_axis(geom.tx_grid.0, geom.spacing, fx, geom.phase_ref);
    let ay = steering_axis(geom.tx_grid.1, geom.spacing, fy, geom.phase_ref);
    let dax = steering_axis_deriv(geom.tx_grid.0, geom.spacing, fx, dfx, geom.phase_ref);
    let day = steering_axis_deriv(geom.tx_grid.1, geom.spacing, fy, dfy, geom.phase_ref);
    dax.kronecker(&ay) + ax.kronecker(&day)
}

/// Receive ULA response column of length `N_r` (array parallel to the
/// transmit x-axis).
fn rx_response(geom: &ArrayGeometry, theta: f64, phi: f64) -> CMat {
    let (fx, _) = spatial_freqs(theta, phi);
    steering_axis(geom.n_rx, geom.spacing, fx, geom.phase_ref)
}

fn rx_response_deriv(geom: &ArrayGeometry, theta: f64, phi: f64, which: Angle) -> CMat {
    let (fx, _) = spatial_freqs(theta, phi);
    let dfx = match which {
        Angle::Theta => theta.cos() * phi.cos(),
        Angle::Phi => -theta.sin() * phi.sin(),
    };
    steering_axis_deriv(geom.n_rx, geom.spacing, fx, dfx, geom.phase_ref)
}

/// Steering response for the selected mode.
///
/// Planar Kronecker returns the `N_t x 1` transmit response column with
/// unit-modulus entries; bistatic returns the rank-1 `N_r x N_t` echo
/// matrix `b a^H`.
pub fn steering_matrix(geom: &ArrayGeometry, mode: SteeringMode, theta: f64, phi: f64) -> CMat {
    match mode {
        SteeringMode::PlanarKronecker => tx_response(geom, theta, phi),
        SteeringMode::BistaticOuterProduct => {
            let a = tx_response(geom, theta, phi);
            let b = rx_response(geom, theta, phi);
            b * a.adjoint()
        }
    }
}

/// Analytic derivative of [`steering_matrix`] with respect to one angle.
pub fn steering_derivative(
    geom: &ArrayGeometry,
    mode: SteeringMode,
    theta: f64,
    phi: f64,
    which: Angle,
) -> CMat {
    match mode {
        SteeringMode::PlanarKronecker => tx_response_deriv(geom, theta, phi, which),
        SteeringMode::BistaticOuterProduct => {
            let a = tx_response(geom, theta, phi);
            let b = rx_response(geom, theta, phi);
            let da = tx_response_deriv(geom, theta, phi, which);
            let db = rx_response_deriv(geom, theta, phi, which);
            db * a.adjoint() + b * da.adjoint()
        }
    }
}

/// Draw noisy angle estimates: `theta_hat = theta + N(0, sigma_theta2)`,
/// independently for the two angles.
pub fn perturb_angles(ang: &AngleState, rng: &mut SeedStream) -> AngleState {
    let mut out = *ang;
    out.theta_hat = ang.theta + ang.sigma_theta2.sqrt() * rng.normal();
    out.phi_hat = ang.phi + ang.sigma_phi2.sqrt() * rng.normal();
    out
}
