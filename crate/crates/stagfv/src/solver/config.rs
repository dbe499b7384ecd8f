//! Run configuration: the flat `key = value` text format, time-step policy
//! and boundary-condition table.

use std::path::Path;

use thiserror::Error;

use crate::geom::Vec3;
use crate::operators::FaceScheme;

/// Everything a run needs besides the mesh, the initial data and the
/// boundary conditions.
#[derive(Clone, Debug)]
pub struct Config {
    /// Ratio of specific heats γ of the ideal-gas law `p = (γ−1) ρ e`.
    pub gamma: f64,
    /// Final physical time.
    pub t_end: f64,
    /// Fixed time step or CFL-driven adaptive step.
    pub time_step: TimeStep,
    /// Face interpolation for the primal mass fluxes.
    pub scheme_mass: FaceScheme,
    /// Face interpolation for the convected internal energy.
    pub scheme_energy: FaceScheme,
    /// Dual-edge interpolation for the convected velocity.
    pub scheme_momentum: FaceScheme,
    /// Stabilization viscosity ν of the momentum jump term (0 disables it).
    pub nu: f64,
    /// Whether the corrective source term enters the internal-energy balance.
    pub s_term: bool,
    /// Snapshot cadence in steps (0 = only the final state).
    pub output_every: usize,
}

/// Time-step policy of [`Config`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep {
    /// Constant step (truncated on the last step to land on `t_end`).
    Fixed(f64),
    /// Step chosen each cycle from the CFL bound with this Courant number.
    Cfl(f64),
}

impl Config {
    /// A configuration with the documented defaults: upwind interpolation
    /// everywhere, no stabilization, corrective term on, no intermediate
    /// snapshots.
    pub fn new(gamma: f64, t_end: f64, time_step: TimeStep) -> Config {
        Config {
            gamma,
            t_end,
            time_step,
            scheme_mass: FaceScheme::Upwind,
            scheme_energy: FaceScheme::Upwind,
            scheme_momentum: FaceScheme::Upwind,
            nu: 0.0,
            s_term: true,
            output_every: 0,
        }
    }

    /// Returns `self` with all three face schemes replaced.
    pub fn with_schemes(mut self, scheme: FaceScheme) -> Config {
        self.scheme_mass = scheme;
        self.scheme_energy = scheme;
        self.scheme_momentum = scheme;
        self
    }
}

/// Boundary condition attached to one boundary tag.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryCondition {
    /// Imposed face velocity and upstream state (supersonic inflow).
    Dirichlet { rho: f64, u: Vec3, p: f64 },
    /// Zero-gradient outflow: ghost scalars copy the adjacent cell, the
    /// face pressure gradient vanishes and the face velocity evolves.
    Outlet,
    /// Impermeable wall: `u_σ·n = 0`, zero mass and energy flux, mirrored
    /// pressure; tangential velocity evolves freely.
    SlipWall,
    /// Mirror wall: the ghost state reflects the normal velocity
    /// (`u_ghost·n = −u·n`), again giving zero flux through the face.
    ReflexiveWall,
}

/// Boundary conditions keyed by mesh tag name.
#[derive(Clone, Debug, Default)]
pub struct BoundarySet {
    entries: Vec<(String, BoundaryCondition)>,
}

impl BoundarySet {
    pub fn new() -> BoundarySet {
        BoundarySet::default()
    }

    /// Sets (or replaces) the condition for `tag`.
    pub fn set(&mut self, tag: &str, bc: BoundaryCondition) -> &mut Self {
        match self.entries.iter_mut().find(|(t, _)| t == tag) {
            Some(entry) => entry.1 = bc,
            None => self.entries.push((tag.to_string(), bc)),
        }
        self
    }

    pub fn get(&self, tag: &str) -> Option<&BoundaryCondition> {
        self.entries.iter().find(|(t, _)| t == tag).map(|(_, bc)| bc)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BoundaryCondition)> {
        self.entries.iter().map(|(t, bc)| (t.as_str(), bc))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Errors of the configuration text format.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("exactly one of `dt` and `cfl` must be set (found {0})")]
    TimeStepChoice(&'static str),
    #[error("config line {line}: {msg}")]
    Value { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parses a configuration file. See [`parse_config_str`] for the format.
pub fn parse_config(path: &Path) -> Result<(Config, BoundarySet), ConfigError> {
    parse_config_str(&std::fs::read_to_string(path)?)
}

/// Parses the flat `key = value` configuration text.
///
/// Recognized keys (one per line, `#` starts a comment):
///
/// | key | value | default |
/// |---|---|---|
/// | `gamma` | ratio of specific heats | required |
/// | `t_end` | final time | required |
/// | `dt` / `cfl` | fixed step / Courant number | exactly one required |
/// | `scheme.mass` | `upwind` \| `centered` \| `muscl` | `upwind` |
/// | `scheme.energy` | likewise | `upwind` |
/// | `scheme.momentum` | likewise | `upwind` |
/// | `nu` | stabilization viscosity ≥ 0 | `0` |
/// | `s_term` | `on` \| `off` | `on` |
/// | `output.every` | snapshot cadence in steps | `0` |
/// | `bc.<tag>` | `reflexive` \| `slip` \| `outlet` \| `dirichlet ρ u v w p` | — |
///
/// Unknown or duplicate keys are errors, as is providing both `dt` and
/// `cfl` or neither.
pub fn parse_config_str(text: &str) -> Result<(Config, BoundarySet), ConfigError> {
    let mut gamma = None;
    let mut t_end = None;
    let mut dt = None;
    let mut cfl = None;
    let mut schemes = [None; 3];
    let mut nu = None;
    let mut s_term = None;
    let mut output_every = None;
    let mut bcs = BoundarySet::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Value {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());

        let dup = |key: &str| ConfigError::DuplicateKey { line, key: key.to_string() };
        let f64_value = || -> Result<f64, ConfigError> {
            value.parse().map_err(|_| ConfigError::Value {
                line,
                msg: format!("`{key}` expects a number, got `{value}`"),
            })
        };
        let scheme_value = || -> Result<FaceScheme, ConfigError> {
            FaceScheme::parse(value).ok_or_else(|| ConfigError::Value {
                line,
                msg: format!("`{key}` expects upwind|centered|muscl, got `{value}`"),
            })
        };

        match key {
            "gamma" => set_once(&mut gamma, f64_value()?).map_err(|_| dup(key))?,
            "t_end" => set_once(&mut t_end, f64_value()?).map_err(|_| dup(key))?,
            "dt" => set_once(&mut dt, f64_value()?).map_err(|_| dup(key))?,
            "cfl" => set_once(&mut cfl, f64_value()?).map_err(|_| dup(key))?,
            "scheme.mass" => set_once(&mut schemes[0], scheme_value()?).map_err(|_| dup(key))?,
            "scheme.energy" => set_once(&mut schemes[1], scheme_value()?).map_err(|_| dup(key))?,
            "scheme.momentum" => {
                set_once(&mut schemes[2], scheme_value()?).map_err(|_| dup(key))?
            }
            "nu" => set_once(&mut nu, f64_value()?).map_err(|_| dup(key))?,
            "s_term" => {
                let v = match value {
                    "on" => true,
                    "off" => false,
                    _ => {
                        return Err(ConfigError::Value {
                            line,
                            msg: format!("`s_term` expects on|off, got `{value}`"),
                        })
                    }
                };
                set_once(&mut s_term, v).map_err(|_| dup(key))?;
            }
            "output.every" => {
                let v = value.parse().map_err(|_| ConfigError::Value {
                    line,
                    msg: format!("`output.every` expects a non-negative integer, got `{value}`"),
                })?;
                set_once(&mut output_every, v).map_err(|_| dup(key))?;
            }
            _ => match key.strip_prefix("bc.") {
                Some(tag) if !tag.is_empty() => {
                    if bcs.get(tag).is_some() {
                        return Err(dup(key));
                    }
                    bcs.set(tag, parse_bc(value, line)?);
                }
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            },
        }
    }

    let time_step = match (dt, cfl) {
        (Some(dt), None) => TimeStep::Fixed(dt),
        (None, Some(c)) => TimeStep::Cfl(c),
        (Some(_), Some(_)) => return Err(ConfigError::TimeStepChoice("both")),
        (None, None) => return Err(ConfigError::TimeStepChoice("neither")),
    };
    let config = Config {
        gamma: gamma.ok_or(ConfigError::MissingKey("gamma"))?,
        t_end: t_end.ok_or(ConfigError::MissingKey("t_end"))?,
        time_step,
        scheme_mass: schemes[0].unwrap_or(FaceScheme::Upwind),
        scheme_energy: schemes[1].unwrap_or(FaceScheme::Upwind),
        scheme_momentum: schemes[2].unwrap_or(FaceScheme::Upwind),
        nu: nu.unwrap_or(0.0),
        s_term: s_term.unwrap_or(true),
        output_every: output_every.unwrap_or(0),
    };
    Ok((config, bcs))
}

fn set_once<T>(slot: &mut Option<T>, value: T) -> Result<(), ()> {
    if slot.is_some() {
        return Err(());
    }
    *slot = Some(value);
    Ok(())
}

fn parse_bc(value: &str, line: usize) -> Result<BoundaryCondition, ConfigError> {
    let mut words = value.split_whitespace();
    let kind = words.next().unwrap_or("");
    let rest: Vec<&str> = words.collect();
    let no_args = |bc: BoundaryCondition| {
        if rest.is_empty() {
            Ok(bc)
        } else {
            Err(ConfigError::Value {
                line,
                msg: format!("`{kind}` takes no arguments, got `{}`", rest.join(" ")),
            })
        }
    };
    match kind {
        "reflexive" => no_args(BoundaryCondition::ReflexiveWall),
        "slip" => no_args(BoundaryCondition::SlipWall),
        "outlet" => no_args(BoundaryCondition::Outlet),
        "dirichlet" => {
            let nums: Vec<f64> = rest.iter().filter_map(|w| w.parse().ok()).collect();
            if nums.len() != rest.len() || nums.len() != 5 {
                return Err(ConfigError::Value {
                    line,
                    msg: format!(
                        "`dirichlet` expects 5 numbers (rho u v w p), got `{}`",
                        rest.join(" ")
                    ),
                });
            }
            Ok(BoundaryCondition::Dirichlet {
                rho: nums[0],
                u: Vec3::new(nums[1], nums[2], nums[3]),
                p: nums[4],
            })
        }
        _ => Err(ConfigError::Value {
            line,
            msg: format!("unknown boundary condition `{kind}` (reflexive|slip|outlet|dirichlet)"),
        }),
    }
}
