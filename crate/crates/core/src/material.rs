//! Prolate ellipsoidal particles: mass, inertia, depolarization and the
//! anisotropic polarizability tensor.
//!
//! Geometry convention: the particle is a symmetric top with two short
//! half-axes `a` (body x and y) and one long half-axis `b` (body z).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::VACUUM_PERMITTIVITY;
use crate::error::{invalid, require_positive, Result};

/// Below this ellipticity the depolarization factor is evaluated from its
/// Taylor series; the closed form loses digits to cancellation there.
pub const SERIES_ELLIPTICITY_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub label: String,
    /// Relative dielectric constant.
    pub permittivity: f64,
    /// Mass density [kg/m³].
    pub density: f64,
}

impl Material {
    pub fn new(label: impl Into<String>, permittivity: f64, density: f64) -> Result<Self> {
        if !(permittivity.is_finite() && permittivity > 1.0) {
            return Err(invalid(
                "permittivity",
                format!("must be > 1, got {permittivity}"),
            ));
        }
        require_positive("density", density)?;
        Ok(Self {
            label: label.into(),
            permittivity,
            density,
        })
    }

    /// ε = 5.7, ρ = 3500 kg/m³.
    pub fn diamond() -> Self {
        Self {
            label: "diamond".into(),
            permittivity: 5.7,
            density: 3500.0,
        }
    }

    /// Fused silica: ε = 2.1, ρ = 2200 kg/m³.
    pub fn silica() -> Self {
        Self {
            label: "silica".into(),
            permittivity: 2.1,
            density: 2200.0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "diamond" => Some(Self::diamond()),
            "silica" => Some(Self::silica()),
            _ => None,
        }
    }
}

/// Mass of an ellipsoid with half-axes (a, a, b): ρ·(4/3)π·a²·b.
///
/// Accepts degenerate (zero) axes, unlike [`Ellipsoid::new`].
pub fn ellipsoid_mass(short: f64, long: f64, density: f64) -> f64 {
    density * ellipsoid_volume(short, long)
}

pub fn ellipsoid_volume(short: f64, long: f64) -> f64 {
    4.0 / 3.0 * PI * short * short * long
}

/// Depolarization factors (Lx, Ly, Lz) of a prolate spheroid with
/// ellipticity `e`; the long axis is z.
///
/// Lz = (1−e²)/e² · (artanh(e)/e − 1) and Lx = Ly = (1 − Lz)/2, so the
/// three always sum to one. The closed form is replaced by its series
/// below [`SERIES_ELLIPTICITY_THRESHOLD`].
pub fn depolarization_factors(e: f64) -> Result<[f64; 3]> {
    if !(0.0..1.0).contains(&e) {
        return Err(invalid("ellipticity", format!("must lie in [0, 1), got {e}")));
    }
    if e == 0.0 {
        return Ok([1.0 / 3.0; 3]);
    }
    let lz = if e < SERIES_ELLIPTICITY_THRESHOLD {
        axial_depolarization_series(e)
    } else {
        let e2 = e * e;
        (1.0 - e2) / e2 * (e.atanh() / e - 1.0)
    };
    let lx = 0.5 * (1.0 - lz);
    Ok([lx, lx, lz])
}

// 1/3 - sum_k 2 e^{2k} / ((2k+1)(2k+3))
fn axial_depolarization_series(e: f64) -> f64 {
    let e2 = e * e;
    let mut power = 1.0;
    let mut sum = 1.0 / 3.0;
    for k in 1..=6 {
        power *= e2;
        let k = k as f64;
        sum -= 2.0 * power / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
    }
    sum
}

/// Euler angles (α, β, γ) in the z-y-z convention [rad].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    /// Active rotation R = Rz(α)·Ry(β)·Rz(γ), taking body-frame vectors to
    /// the lab frame. The body long axis ends up along
    /// (sinβ·cosα, sinβ·sinα, cosβ).
    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        matmul(
            &matmul(&rot_z(self.alpha), &rot_y(self.beta)),
            &rot_z(self.gamma),
        )
    }
}

fn rot_z(t: f64) -> [[f64; 3]; 3] {
    let (s, c) = t.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn rot_y(t: f64) -> [[f64; 3]; 3] {
    let (s, c) = t.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

pub(crate) fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub(crate) fn transpose(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = *v;
        }
    }
    out
}

/// Body-frame polarizability of a symmetric top, diag(αx, αx, αz) [C·m²/V].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizabilityTensor {
    transverse: f64,
    axial: f64,
}

impl PolarizabilityTensor {
    /// Both components must be positive. An oblate-like tensor (axial <
    /// transverse) is representable; the trap-frequency code rejects it.
    pub fn new(transverse: f64, axial: f64) -> Result<Self> {
        require_positive("alpha_x", transverse)?;
        require_positive("alpha_z", axial)?;
        Ok(Self { transverse, axial })
    }

    pub fn alpha_x(&self) -> f64 {
        self.transverse
    }

    pub fn alpha_y(&self) -> f64 {
        self.transverse
    }

    pub fn alpha_z(&self) -> f64 {
        self.axial
    }

    /// αz − αx.
    pub fn difference(&self) -> f64 {
        self.axial - self.transverse
    }

    /// (αz − αx)/αz.
    pub fn anisotropy(&self) -> f64 {
        self.difference() / self.axial
    }

    pub fn body_matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.transverse, 0.0, 0.0],
            [0.0, self.transverse, 0.0],
            [0.0, 0.0, self.axial],
        ]
    }

    /// Lab-frame tensor R·α₀·Rᵀ for the orientation `euler`.
    pub fn rotated(&self, euler: EulerAngles) -> [[f64; 3]; 3] {
        let r = euler.rotation_matrix();
        matmul(&matmul(&r, &self.body_matrix()), &transpose(&r))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    short: f64,
    long: f64,
    material: Material,
}

impl Ellipsoid {
    /// Half-axes in metres; requires 0 < short ≤ long.
    pub fn new(short: f64, long: f64, material: Material) -> Result<Self> {
        require_positive("a", short)?;
        require_positive("b", long)?;
        if short > long {
            return Err(invalid(
                "a",
                format!("short half-axis {short:e} exceeds long half-axis {long:e}"),
            ));
        }
        Ok(Self {
            short,
            long,
            material,
        })
    }

    pub fn sphere(radius: f64, material: Material) -> Result<Self> {
        Self::new(radius, radius, material)
    }

    pub fn short_axis(&self) -> f64 {
        self.short
    }

    pub fn long_axis(&self) -> f64 {
        self.long
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    /// √(a² + b²), the size measure used to group geometries.
    pub fn size(&self) -> f64 {
        self.short.hypot(self.long)
    }

    pub fn volume(&self) -> f64 {
        ellipsoid_volume(self.short, self.long)
    }

    pub fn mass(&self) -> f64 {
        ellipsoid_mass(self.short, self.long, self.material.density)
    }

    /// (I1, I3): about a short axis m(a²+b²)/5, about the long axis 2ma²/5.
    pub fn moments_of_inertia(&self) -> (f64, f64) {
        let m = self.mass();
        let a2 = self.short * self.short;
        let b2 = self.long * self.long;
        (m * (a2 + b2) / 5.0, 2.0 * m * a2 / 5.0)
    }

    /// e = √(1 − a²/b²).
    pub fn ellipticity(&self) -> f64 {
        let ratio = self.short / self.long;
        (1.0 - ratio * ratio).max(0.0).sqrt()
    }

    pub fn depolarization_factors(&self) -> [f64; 3] {
        depolarization_factors(self.ellipticity())
            .expect("ellipticity of a valid ellipsoid lies in [0, 1)")
    }

    /// αi = ε₀·V·(ε−1)/(1 + Li(ε−1)).
    pub fn polarizability(&self) -> PolarizabilityTensor {
        let [lx, _, lz] = self.depolarization_factors();
        let chi = self.material.permittivity - 1.0;
        let scale = VACUUM_PERMITTIVITY * self.volume() * chi;
        PolarizabilityTensor {
            transverse: scale / (1.0 + lx * chi),
            axial: scale / (1.0 + lz * chi),
        }
    }
}

/// Clausius–Mossotti polarizability of a sphere, 4πε₀·(ε−1)/(ε+2)·r³.
pub fn sphere_polarizability(radius: f64, permittivity: f64) -> f64 {
    4.0 * PI * VACUUM_PERMITTIVITY * (permittivity - 1.0) / (permittivity + 2.0) * radius.powi(3)
}
