//! Run configuration as a TOML document. Unknown keys are rejected; missing keys take
//! the desk-scale defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::NoiseScale;
use crate::grid::{make_grid, Grid3D, Volume3D};
use crate::linalg::{Mat3, Vec3};
use crate::model::{uniform_angles, ScanGeometry, MU0};
use crate::phantom::{ball_phantom, cone_phantom, rasterize, Ball, Cone};
use crate::recon::ReconConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub extents: [[f64; 2]; 3],
    pub dims: [usize; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomKind {
    Ball,
    Cone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhantomConfig {
    pub kind: PhantomKind,
    /// Ball centre.
    pub center: [f64; 3],
    /// Ball radius.
    pub radius: f64,
    pub apex: [f64; 3],
    pub base_center: [f64; 3],
    pub base_radius: f64,
    /// Points per axis and cell used for the indicator; 1 samples centres only.
    pub supersample: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Number of uniformly spaced angles `l·π/n`, ignored when `angles` is given.
    pub angle_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    pub gradient: f64,
    pub amplitudes: [f64; 2],
    pub frequencies: [u32; 2],
    pub phases: [f64; 2],
    pub period: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_periods: Option<Vec<f64>>,
    pub samples_per_angle: usize,
    pub h: f64,
    pub mu0: f64,
    pub moment: f64,
    /// Row-major receive-coil sensitivity matrix.
    pub coil: [[f64; 3]; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForwardConfig {
    /// Use the direct 3D integral instead of the projection route.
    pub oracle: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub level: f64,
    pub scale: NoiseScale,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phantom: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signals: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridConfig,
    pub phantom: PhantomConfig,
    pub scan: ScanConfig,
    pub forward: ForwardConfig,
    pub noise: NoiseConfig,
    pub recon: ReconConfig<f64>,
    pub paths: PathsConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            extents: [[-1.0, 1.0]; 3],
            dims: [DESK_N; 3],
        }
    }
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self {
            kind: PhantomKind::Ball,
            center: [0.15, -0.1, 0.05],
            radius: 0.6,
            apex: [0.6, 0.0, 0.0],
            base_center: [-0.6, 0.0, 0.0],
            base_radius: 0.45,
            supersample: 1,
        }
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            angle_count: 40,
            samples_per_angle: 40_000,
            h: 2.0 / DESK_N as f64,
            ..ScanConfig::reference()
        }
    }
}

const DESK_N: usize = 64;

impl Default for RunConfig {
    /// Desk-scale setup: 64³ grid, 40 angles, 40 000 samples, `h` one grid spacing.
    fn default() -> Self {
        Self {
            seed: 1,
            grid: GridConfig::default(),
            phantom: PhantomConfig::default(),
            scan: ScanConfig::default(),
            forward: ForwardConfig::default(),
            noise: NoiseConfig::default(),
            recon: ReconConfig::default(),
            paths: PathsConfig::default(),
        }
    }
}

impl ScanConfig {
    fn reference() -> Self {
        let g = ScanGeometry::<f64>::reference();
        Self {
            angle_count: g.angles.len(),
            angles: None,
            gradient: g.gradient,
            amplitudes: g.amplitudes,
            frequencies: g.frequencies,
            phases: g.phases,
            period: g.period,
            angle_periods: None,
            samples_per_angle: g.samples_per_angle,
            h: g.h,
            mu0: MU0,
            moment: g.moment,
            coil: g.coil.0,
        }
    }
}

impl RunConfig {
    /// The reference experiment: 200³ grid on `[-1,1]³`, 200 angles, `L = 400 000`,
    /// `h = 0.01`, `λ = 5·10⁻⁴`, CG tolerance `10⁻¹⁰` with at most 1000 iterations,
    /// the default cone and 10 % noise.
    pub fn reference() -> Self {
        Self {
            seed: 1,
            grid: GridConfig {
                extents: [[-1.0, 1.0]; 3],
                dims: [200; 3],
            },
            phantom: PhantomConfig {
                kind: PhantomKind::Cone,
                ..PhantomConfig::default()
            },
            scan: ScanConfig::reference(),
            forward: ForwardConfig::default(),
            noise: NoiseConfig {
                level: 0.1,
                scale: NoiseScale::JointMax,
            },
            recon: ReconConfig::default(),
            paths: PathsConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        let text = fs::read_to_string(p)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", p.display())),
            other => other,
        })
    }

    /// TOML text; scalar floats below `1e-3` are written in exponent form
    /// (`1.25663706212e-6` rather than `0.00000125663706212`).
    pub fn to_toml_string(&self) -> Result<String> {
        let text = toml::to_string(self).map_err(|e| Error::Config(e.to_string()))?;
        Ok(text.lines().map(exponent_form).collect::<Vec<_>>().join("\n") + "\n")
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.geometry()?.validate()?;
        self.recon.validate(self.angles().len())?;
        if !(self.noise.level >= 0.0) {
            return Err(Error::validation("noise level must be >= 0"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid3D<f64>> {
        make_grid(self.grid.extents, self.grid.dims)
    }

    pub fn angles(&self) -> Vec<f64> {
        self.scan
            .angles
            .clone()
            .unwrap_or_else(|| uniform_angles(self.scan.angle_count))
    }

    pub fn geometry(&self) -> Result<ScanGeometry<f64>> {
        let s = &self.scan;
        let geom = ScanGeometry {
            angles: self.angles(),
            gradient: s.gradient,
            amplitudes: s.amplitudes,
            frequencies: s.frequencies,
            phases: s.phases,
            period: s.period,
            angle_periods: s.angle_periods.clone(),
            samples_per_angle: s.samples_per_angle,
            h: s.h,
            mu0: s.mu0,
            moment: s.moment,
            coil: Mat3(s.coil),
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn phantom(&self) -> Result<Volume3D<f64>> {
        let grid = self.grid()?;
        let p = &self.phantom;
        let v = |a: [f64; 3]| Vec3::new(a[0], a[1], a[2]);
        match (p.kind, p.supersample) {
            (PhantomKind::Ball, 0 | 1) => ball_phantom(grid, v(p.center), p.radius),
            (PhantomKind::Cone, 0 | 1) => cone_phantom(grid, v(p.apex), v(p.base_center), p.base_radius),
            (PhantomKind::Ball, n) => {
                if !(p.radius > 0.0) {
                    return Err(Error::validation("ball radius must be > 0"));
                }
                Ok(rasterize(
                    grid,
                    &Ball {
                        center: v(p.center),
                        radius: p.radius,
                    },
                    n,
                ))
            }
            (PhantomKind::Cone, n) => Ok(rasterize(
                grid,
                &Cone::new(v(p.apex), v(p.base_center), p.base_radius)?,
                n,
            )),
        }
    }
}

fn exponent_form(line: &str) -> String {
    if let Some((key, value)) = line.split_once(" = ") {
        if let Ok(x) = value.parse::<f64>() {
            if value.contains('.') && x != 0.0 && x.abs() < 1e-3 {
                return format!("{key} = {x:e}");
            }
        }
    }
    line.to_string()
}
