//! Exchange + in-plane Zeeman Hamiltonian of the neutral exciton.
//!
//! Basis order is `[X_H, D_H, X_V, D_V]`: the H- and V-polarized bright states
//! and their dark partners. An in-plane field couples each bright state to
//! exactly one dark state, so the 4×4 matrix is block diagonal with two 2×2
//! blocks and every quantity here has a closed form.
//!
//! Energies are µeV measured from the midpoint between the bright and dark
//! manifolds (the matrix is traceless). Fields are in tesla.

use serde::Serialize;
use thiserror::Error;

use crate::params::{DotParameters, Polarization, MU_B};

/// Bright fractions closer than this to one half make the labels ambiguous.
pub const DEGENERATE_MIXING_TOL: f64 = 1e-9;

pub type Matrix4 = [[f64; 4]; 4];

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum ModelError {
    #[error("degenerate bright/dark mixing in the {polarization} block at b_x = {b_x} T")]
    DegenerateMixing {
        b_x: f64,
        polarization: Polarization,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Brightness {
    Brighter,
    Darker,
}

/// One eigenstate of the exciton manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcitonState {
    pub energy: f64,
    pub polarization: Polarization,
    pub bright_fraction: f64,
    pub label: Brightness,
    /// Eigenvector in the `[X_H, D_H, X_V, D_V]` basis.
    pub vector: [f64; 4],
}

/// The four exciton eigenstates at one field.
///
/// `states` is ordered `[H brighter, V brighter, H darker, V darker]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FineStructure {
    pub b_x: f64,
    pub states: [ExcitonState; 4],
    /// E(H brighter) − E(V brighter).
    pub s: f64,
    pub d_h: f64,
    pub d_v: f64,
}

impl FineStructure {
    pub fn brighter(&self, pol: Polarization) -> &ExcitonState {
        match pol {
            Polarization::H => &self.states[0],
            Polarization::V => &self.states[1],
        }
    }

    pub fn darker(&self, pol: Polarization) -> &ExcitonState {
        match pol {
            Polarization::H => &self.states[2],
            Polarization::V => &self.states[3],
        }
    }

    pub fn energies(&self) -> [f64; 4] {
        self.states.map(|st| st.energy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbativeCoefficients {
    /// µeV·T⁻²
    pub k: f64,
    /// µeV·T⁻⁴
    pub k_prime: f64,
}

/// A 2×2 block `[[bright, c], [c, dark]]` with `c = coupling/2`.
#[derive(Debug, Clone, Copy)]
struct Block {
    bright: f64,
    dark: f64,
    /// Full Zeeman energy g·µ_B·b, twice the off-diagonal element.
    zeeman: f64,
}

struct BlockEigen {
    brighter_energy: f64,
    darker_energy: f64,
    brighter_fraction: f64,
    /// (bright, dark) amplitudes of the brighter state.
    brighter_vec: [f64; 2],
    darker_vec: [f64; 2],
    separation: f64,
}

impl Block {
    fn solve(&self) -> BlockEigen {
        let gap = self.bright - self.dark;
        let mean = 0.5 * (self.bright + self.dark);
        let separation = gap.hypot(self.zeeman);
        // Upper eigenvector is (cos φ, sin φ).
        let phi = 0.5 * self.zeeman.atan2(gap);
        let (sin, cos) = phi.sin_cos();
        let upper = [cos, sin];
        let lower = [-sin, cos];
        let (brighter_energy, darker_energy, brighter_vec, darker_vec) = if gap >= 0.0 {
            (
                mean + 0.5 * separation,
                mean - 0.5 * separation,
                upper,
                lower,
            )
        } else {
            (
                mean - 0.5 * separation,
                mean + 0.5 * separation,
                lower,
                upper,
            )
        };
        let brighter_fraction = if separation == 0.0 {
            1.0
        } else {
            0.5 * (1.0 + gap.abs() / separation)
        };
        BlockEigen {
            brighter_energy,
            darker_energy,
            brighter_fraction,
            brighter_vec,
            darker_vec,
            separation,
        }
    }
}

fn blocks(params: &DotParameters, b_x: f64) -> (Block, Block) {
    let half_d0 = 0.5 * params.d0();
    let half_s0 = 0.5 * params.s0();
    let half_sigma0 = 0.5 * params.sigma0();
    let h = Block {
        bright: half_d0 + half_s0,
        dark: -half_d0 + half_sigma0,
        zeeman: params.g_hpol() * MU_B * b_x,
    };
    let v = Block {
        bright: half_d0 - half_s0,
        dark: -half_d0 - half_sigma0,
        zeeman: params.g_vpol() * MU_B * b_x,
    };
    (h, v)
}

/// The 4×4 Hamiltonian in the `[X_H, D_H, X_V, D_V]` basis, µeV.
pub fn build_hamiltonian(params: &DotParameters, b_x: f64) -> Matrix4 {
    let (h, v) = blocks(params, b_x);
    let mut m = [[0.0; 4]; 4];
    m[0][0] = h.bright;
    m[1][1] = h.dark;
    m[0][1] = 0.5 * h.zeeman;
    m[1][0] = 0.5 * h.zeeman;
    m[2][2] = v.bright;
    m[3][3] = v.dark;
    m[2][3] = 0.5 * v.zeeman;
    m[3][2] = 0.5 * v.zeeman;
    m
}

/// Closed-form diagonalization of both blocks.
///
/// Brighter/darker labels follow the branch that is fully bright at zero
/// field, so they stay attached to the same level through any field.
pub fn fine_structure(params: &DotParameters, b_x: f64) -> Result<FineStructure, ModelError> {
    let (h, v) = blocks(params, b_x);
    let eh = h.solve();
    let ev = v.solve();
    for (eig, pol) in [(&eh, Polarization::H), (&ev, Polarization::V)] {
        if (eig.brighter_fraction - 0.5).abs() < DEGENERATE_MIXING_TOL {
            return Err(ModelError::DegenerateMixing {
                b_x,
                polarization: pol,
            });
        }
    }
    let embed = |v2: [f64; 2], pol: Polarization| match pol {
        Polarization::H => [v2[0], v2[1], 0.0, 0.0],
        Polarization::V => [0.0, 0.0, v2[0], v2[1]],
    };
    let state = |eig: &BlockEigen, pol: Polarization, label: Brightness| {
        let (energy, vec, frac) = match label {
            Brightness::Brighter => (eig.brighter_energy, eig.brighter_vec, eig.brighter_fraction),
            Brightness::Darker => (
                eig.darker_energy,
                eig.darker_vec,
                1.0 - eig.brighter_fraction,
            ),
        };
        ExcitonState {
            energy,
            polarization: pol,
            bright_fraction: frac,
            label,
            vector: embed(vec, pol),
        }
    };
    let states = [
        state(&eh, Polarization::H, Brightness::Brighter),
        state(&ev, Polarization::V, Brightness::Brighter),
        state(&eh, Polarization::H, Brightness::Darker),
        state(&ev, Polarization::V, Brightness::Darker),
    ];
    Ok(FineStructure {
        b_x,
        s: eh.brighter_energy - ev.brighter_energy,
        d_h: eh.separation,
        d_v: ev.separation,
        states,
    })
}

/// Bright-exciton polarization splitting S(b_x), µeV.
pub fn bright_splitting(params: &DotParameters, b_x: f64) -> Result<f64, ModelError> {
    fine_structure(params, b_x).map(|fs| fs.s)
}

/// Brighter–darker separations `(d_h, d_v)` from the quadrature law.
pub fn dark_bright_splittings(params: &DotParameters, b_x: f64) -> (f64, f64) {
    let d_h = params.d_h0().hypot(params.g_hpol() * MU_B * b_x);
    let d_v = params.d_v0().hypot(params.g_vpol() * MU_B * b_x);
    (d_h, d_v)
}

/// Curvature coefficient K of S(b) from the closed-form expression in
/// (S₀, D₀, g_e, g_h). Ignores σ₀.
pub fn k_eq2(params: &DotParameters) -> Result<f64, ModelError> {
    let s0 = params.s0();
    let d0 = params.d0();
    let denom = d0 * (1.0 - s0 * s0 / (4.0 * d0 * d0));
    if denom <= 0.0 {
        return Err(ModelError::Domain(format!(
            "K denominator D0(1 - S0^2/4D0^2) = {denom} is not positive"
        )));
    }
    let (ge, gh) = (params.g_e(), params.g_h());
    Ok(MU_B * MU_B / denom * (ge * gh - s0 / (4.0 * d0) * (ge * ge + gh * gh)))
}

/// Series coefficients of S(b) = s0 + K b² + K′ b⁴ + O(b⁶) from the
/// quadrature form of each block.
pub fn perturbative_coefficients(
    params: &DotParameters,
) -> Result<PerturbativeCoefficients, ModelError> {
    let dh0 = params.d_h0();
    let dv0 = params.d_v0();
    if dh0 <= 0.0 || dv0 <= 0.0 {
        return Err(ModelError::Domain(format!(
            "zero-field block gaps must be positive, got D_H0 = {dh0}, D_V0 = {dv0}"
        )));
    }
    let gh2 = params.g_hpol().powi(2);
    let gv2 = params.g_vpol().powi(2);
    let mu2 = MU_B * MU_B;
    let k = 0.25 * mu2 * (gh2 / dh0 - gv2 / dv0);
    let k_prime = -(mu2 * mu2 / 16.0) * (gh2 * gh2 / dh0.powi(3) - gv2 * gv2 / dv0.powi(3));
    Ok(PerturbativeCoefficients { k, k_prime })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub b_x: f64,
    pub fine_structure: Result<FineStructure, ModelError>,
}

/// Uniform field grid from `b_start` to `b_end` inclusive, `n` points.
pub fn field_grid(b_start: f64, b_end: f64, n: usize) -> Result<Vec<f64>, ModelError> {
    if !(b_start.is_finite() && b_end.is_finite()) {
        return Err(ModelError::InvalidSweep(
            "field bounds must be finite".into(),
        ));
    }
    if b_start > b_end {
        return Err(ModelError::InvalidSweep(format!(
            "b_start {b_start} > b_end {b_end}"
        )));
    }
    if n < 2 {
        return Err(ModelError::InvalidSweep(format!("need n >= 2, got {n}")));
    }
    let step = (b_end - b_start) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                b_end
            } else {
                b_start + step * i as f64
            }
        })
        .collect())
}

/// Fine structure on a uniform field grid. Per-point failures are kept as
/// error rows; the sweep itself only fails on a bad grid.
pub fn sweep_field(
    params: &DotParameters,
    b_start: f64,
    b_end: f64,
    n: usize,
) -> Result<Vec<SweepRow>, ModelError> {
    Ok(field_grid(b_start, b_end, n)?
        .into_iter()
        .map(|b_x| SweepRow {
            b_x,
            fine_structure: fine_structure(params, b_x),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dot_a() -> DotParameters {
        DotParameters::new(22.0, 215.0, 0.395, 0.395).unwrap()
    }

    fn dot_c() -> DotParameters {
        DotParameters::new(-16.0, 215.0, 0.4, 0.4).unwrap()
    }

    #[test]
    fn zero_field_hamiltonian_is_diagonal() {
        let m = build_hamiltonian(&dot_a(), 0.0);
        let diag = [118.5, -107.5, 96.5, -107.5];
        for (i, row) in m.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let want = if i == j { diag[i] } else { 0.0 };
                assert_eq!(x, want, "m[{i}][{j}]");
            }
        }
    }

    #[test]
    fn zeeman_couplings_at_5t() {
        let m = build_hamiltonian(&dot_a(), 5.0);
        assert!((m[0][1] - 0.79 * 57.8838 * 5.0 / 2.0).abs() < 1e-12);
        assert!((m[0][1] - 114.32).abs() < 5e-3);
        assert_eq!(m[2][3], 0.0);
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert_eq!(m[i][j], 0.0);
            assert_eq!(m[j][i], 0.0);
        }
        let trace: f64 = (0..4).map(|i| m[i][i]).sum();
        assert!(trace.abs() < 1e-12);
    }

    #[test]
    fn zero_field_fine_structure() {
        let fs = fine_structure(&dot_a(), 0.0).unwrap();
        let e = fs.energies();
        assert_eq!(e, [118.5, 96.5, -107.5, -107.5]);
        let fr = fs.states.map(|s| s.bright_fraction);
        assert_eq!(fr, [1.0, 1.0, 0.0, 0.0]);
        assert_eq!(fs.s, 22.0);
        assert_eq!(fs.states[0].polarization, Polarization::H);
        assert_eq!(fs.states[3].label, Brightness::Darker);
    }

    #[test]
    fn dot_a_at_5t() {
        let fs = fine_structure(&dot_a(), 5.0).unwrap();
        // Frozen from the quadrature closed form (python oracle).
        assert!((fs.d_h - 321.485_165_215_784).abs() < 1e-9);
        assert!(
            (fs.brighter(Polarization::H).bright_fraction - 0.851_493_668_219_973).abs() < 1e-12
        );
        assert!((fs.s - 69.742_582_607_892).abs() < 1e-9);
        assert_eq!(fs.brighter(Polarization::V).bright_fraction, 1.0);
    }

    #[test]
    fn dot_c_sign_flips_by_5t() {
        assert!(bright_splitting(&dot_c(), 0.0).unwrap() < 0.0);
        assert!(bright_splitting(&dot_c(), 5.0).unwrap() > 0.0);
        // sqrt(207^2 + (0.8 µB B)^2) = 239
        let b_star = (239.0f64.powi(2) - 207.0f64.powi(2)).sqrt() / (0.8 * MU_B);
        assert!(bright_splitting(&dot_c(), b_star).unwrap().abs() < 1e-9);
        assert!((b_star - 2.58).abs() < 5e-3);
    }

    #[test]
    fn no_zeeman_means_constant_splitting() {
        let p = DotParameters::new(37.0, 300.0, 0.0, 0.0).unwrap();
        for b in [0.0, 1.0, 7.5, -3.0] {
            assert_eq!(bright_splitting(&p, b).unwrap(), 37.0);
        }
    }

    #[test]
    fn quadrature_splittings() {
        assert_eq!(dark_bright_splittings(&dot_a(), 0.0), (226.0, 204.0));
        let (dh, _) = dark_bright_splittings(&dot_a(), 5.0);
        assert!((dh - 321.485_165_215_784).abs() < 1e-9);
        let (dh, dv) = dark_bright_splittings(&dot_a(), 100.0);
        assert!((dh / 100.0 / (0.79 * MU_B) - 1.0).abs() < 0.01);
        assert_eq!(dv, 204.0);
    }

    #[test]
    fn k_eq2_values() {
        let zero = DotParameters::new(22.0, 215.0, 0.0, 0.0).unwrap();
        assert_eq!(k_eq2(&zero).unwrap(), 0.0);
        let gaas = DotParameters::new(0.0, 215.0, 0.4, 0.4).unwrap();
        assert!((k_eq2(&gaas).unwrap() - 2.493).abs() < 5e-4);
        let algaas = DotParameters::new(284.0, 473.0, 1.21, 0.13).unwrap();
        assert!((k_eq2(&algaas).unwrap() - (-0.506_091_733_77)).abs() < 1e-9);
    }

    #[test]
    fn perturbative_values() {
        let zero = DotParameters::new(22.0, 215.0, 0.0, 0.0).unwrap();
        let c = perturbative_coefficients(&zero).unwrap();
        assert_eq!((c.k, c.k_prime), (0.0, 0.0));
        let c = perturbative_coefficients(&dot_a()).unwrap();
        assert!((c.k - 2.313_128_825_39).abs() < 1e-9);
        assert!((c.k - k_eq2(&dot_a()).unwrap()).abs() < 1e-12 * c.k.abs());
    }

    #[test]
    fn perturbative_domain_error() {
        let p = DotParameters::builder(-400.0, 215.0, 0.4, 0.4)
            .sigma0(400.0)
            .build()
            .unwrap();
        assert!(p.d_h0() < 0.0);
        assert!(matches!(
            perturbative_coefficients(&p),
            Err(ModelError::Domain(_))
        ));
        // Labels still defined: the bright state now sits below its dark partner.
        let fs = fine_structure(&p, 1.0).unwrap();
        let hb = fs.brighter(Polarization::H);
        assert!(hb.bright_fraction > 0.5);
        assert!(hb.energy < fs.darker(Polarization::H).energy);
    }

    #[test]
    fn degenerate_mixing_is_an_error() {
        // D_H0 = d0 + (s0 - sigma0)/2 = 0 with nonzero coupling.
        let p = DotParameters::builder(-200.0, 200.0, 0.4, 0.4)
            .sigma0(200.0)
            .build()
            .unwrap();
        assert_eq!(p.d_h0(), 0.0);
        assert!(matches!(
            fine_structure(&p, 1.0),
            Err(ModelError::DegenerateMixing {
                polarization: Polarization::H,
                ..
            })
        ));
        assert!(fine_structure(&p, 0.0).is_ok());
    }

    #[test]
    fn sweep_endpoints_and_errors() {
        let rows = sweep_field(&dot_a(), 0.0, 5.0, 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].fine_structure, fine_structure(&dot_a(), 0.0));
        assert_eq!(rows[1].fine_structure, fine_structure(&dot_a(), 5.0));
        assert!(sweep_field(&dot_a(), 1.0, 0.0, 5).is_err());
        assert!(sweep_field(&dot_a(), 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn sweep_keeps_failing_rows() {
        let p = DotParameters::builder(-200.0, 200.0, 0.4, 0.4)
            .sigma0(200.0)
            .build()
            .unwrap();
        let rows = sweep_field(&p, 0.0, 1.0, 3).unwrap();
        assert!(rows[0].fine_structure.is_ok());
        assert!(rows[1].fine_structure.is_err());
        assert!(rows[2].fine_structure.is_err());
    }

    #[test]
    fn dot_c_sweep_has_one_sign_change() {
        let rows = sweep_field(&dot_c(), 0.0, 5.0, 26).unwrap();
        let s: Vec<f64> = rows
            .iter()
            .map(|r| r.fine_structure.as_ref().unwrap().s)
            .collect();
        let changes: Vec<usize> = (1..s.len()).filter(|&i| s[i - 1] * s[i] < 0.0).collect();
        assert_eq!(changes, vec![13]);
        assert!((rows[12].b_x - 2.4).abs() < 1e-12);
    }

    #[test]
    fn zero_g_sweep_is_constant() {
        let p = DotParameters::new(10.0, 150.0, 0.0, 0.0).unwrap();
        let rows = sweep_field(&p, 0.0, 10.0, 11).unwrap();
        let first = rows[0].fine_structure.as_ref().unwrap().energies();
        for r in &rows {
            let fs = r.fine_structure.as_ref().unwrap();
            assert_eq!(fs.energies(), first);
            assert_eq!(fs.s, 10.0);
        }
    }
}
