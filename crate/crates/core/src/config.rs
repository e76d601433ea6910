//! Scenario description and its JSON form.
//!
//! All quantities are linear inside the crate. In JSON every power-like field
//! may instead be given in decibels through a suffixed key (`c0_db`,
//! `amp_gain_db`, `noise_var_dbw`, `pilot_power_a_dbw`, `pilot_power_b_dbw`,
//! `twoway_power_dbw`); conversion happens once, on load. Omitted fields take
//! the values of [`ScenarioConfig::preset`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn distance(a: &Point3, b: &Point3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub pos_alice: Point3,
    pub pos_bob: Point3,
    /// Position of the attacker (RIS centre reference, relay or spoofer).
    pub pos_eve: Point3,
    /// Linear path loss at the 1 m reference distance.
    pub c0: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Number of NLoS paths per RIS link. The LoS term is added on top, so a
    /// scene described as "five paths, the first one LoS" has `iota = 4`.
    pub iota: usize,
    pub lambda: f64,
    pub mx: usize,
    pub my: usize,
    pub elem_spacing: f64,
    /// ‖x_A‖² in W.
    pub pilot_power_a: f64,
    /// ‖x_B‖² in W.
    pub pilot_power_b: f64,
    /// Variance of the random two-way pilots q_A, q_B in W.
    pub twoway_power: f64,
    /// σ_n²; receiver noise is CN(0, 2σ_n²).
    pub noise_var: f64,
    /// Per-element RIS amplitude gain A_E (linear power).
    pub amp_gain: f64,
    pub beta: f64,
    pub trials: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Desk-scale default scene: Alice at the origin, Bob 50 m along y, the
    /// attacker at (0, 10, 5), C0 = -30 dB, exponents 2 / 3, four NLoS paths,
    /// a 10 x 10 RIS with λ/8 pitch, 0.1 W pilots, 1 W two-way pilots and
    /// -110 dBW noise.
    pub fn preset() -> Self {
        let lambda = 0.1;
        Self {
            pos_alice: [0.0, 0.0, 0.0],
            pos_bob: [0.0, 50.0, 0.0],
            pos_eve: [0.0, 10.0, 5.0],
            c0: db_to_linear(-30.0),
            alpha_los: 2.0,
            alpha_nlos: 3.0,
            iota: 4,
            lambda,
            mx: 10,
            my: 10,
            elem_spacing: lambda / 8.0,
            pilot_power_a: 0.1,
            pilot_power_b: 0.1,
            twoway_power: 1.0,
            noise_var: db_to_linear(-110.0),
            amp_gain: 1.0,
            beta: 0.1,
            trials: 100_000,
            seed: 0,
        }
    }

    /// Square `side x side` RIS keeping the λ/8 pitch convention.
    pub fn with_square_ris(mut self, side: usize) -> Self {
        self.mx = side;
        self.my = side;
        self
    }

    pub fn num_elements(&self) -> usize {
        self.mx * self.my
    }

    pub fn d_ab(&self) -> f64 {
        distance(&self.pos_alice, &self.pos_bob)
    }

    pub fn d_ae(&self) -> f64 {
        distance(&self.pos_alice, &self.pos_eve)
    }

    pub fn d_be(&self) -> f64 {
        distance(&self.pos_bob, &self.pos_eve)
    }

    pub fn endpoint_pos(&self, endpoint: Endpoint) -> Point3 {
        match endpoint {
            Endpoint::Alice => self.pos_alice,
            Endpoint::Bob => self.pos_bob,
        }
    }

    pub fn endpoint_distance(&self, endpoint: Endpoint) -> f64 {
        distance(&self.endpoint_pos(endpoint), &self.pos_eve)
    }

    /// C0 · d^(-α_L): LoS power gain at distance `d`.
    pub fn los_gain(&self, d: f64) -> f64 {
        self.c0 * d.powf(-self.alpha_los)
    }

    /// C0 · d^(-α_N): total NLoS power at distance `d`.
    pub fn nlos_gain(&self, d: f64) -> f64 {
        self.c0 * d.powf(-self.alpha_nlos)
    }

    /// 2σ_h², the total variance of the direct Alice-Bob channel.
    pub fn direct_var2(&self) -> f64 {
        self.nlos_gain(self.d_ab())
    }

    pub fn validate(&self) -> Result<()> {
        let pts = [
            ("alice", self.pos_alice),
            ("bob", self.pos_bob),
            ("eve", self.pos_eve),
        ];
        for (name, p) in &pts {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::config(format!("position of {name} is not finite")));
            }
        }
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                if distance(&pts[i].1, &pts[j].1) <= 0.0 {
                    return Err(Error::config(format!(
                        "{} and {} share a position",
                        pts[i].0, pts[j].0
                    )));
                }
            }
        }
        let positive = [
            ("c0", self.c0),
            ("lambda", self.lambda),
            ("elem_spacing", self.elem_spacing),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("pilot_power_a", self.pilot_power_a),
            ("pilot_power_b", self.pilot_power_b),
            ("twoway_power", self.twoway_power),
            ("noise_var", self.noise_var),
            ("amp_gain", self.amp_gain),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.alpha_los >= 2.0) {
            return Err(Error::config("alpha_los must be at least 2"));
        }
        if !(self.alpha_nlos >= self.alpha_los) {
            return Err(Error::config("alpha_nlos must be at least alpha_los"));
        }
        if self.iota < 1 {
            return Err(Error::config("iota must be at least 1"));
        }
        if self.mx == 0 || self.my == 0 {
            return Err(Error::config("RIS grid dimensions must be positive"));
        }
        if !(0.0..0.5).contains(&self.beta) {
            return Err(Error::config(format!("beta must lie in [0, 0.5), got {}", self.beta)));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text)?;
        let cfg = raw.resolve()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    pos_alice: Option<Point3>,
    pos_bob: Option<Point3>,
    pos_eve: Option<Point3>,
    c0: Option<f64>,
    c0_db: Option<f64>,
    alpha_los: Option<f64>,
    alpha_nlos: Option<f64>,
    iota: Option<usize>,
    lambda: Option<f64>,
    mx: Option<usize>,
    my: Option<usize>,
    elem_spacing: Option<f64>,
    pilot_power_a: Option<f64>,
    pilot_power_a_dbw: Option<f64>,
    pilot_power_b: Option<f64>,
    pilot_power_b_dbw: Option<f64>,
    twoway_power: Option<f64>,
    twoway_power_dbw: Option<f64>,
    noise_var: Option<f64>,
    noise_var_dbw: Option<f64>,
    amp_gain: Option<f64>,
    amp_gain_db: Option<f64>,
    beta: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
}

fn pick(name: &str, linear: Option<f64>, db: Option<f64>, default: f64) -> Result<f64> {
    match (linear, db) {
        (Some(_), Some(_)) => Err(Error::config(format!(
            "{name} given both as a linear value and in dB"
        ))),
        (Some(v), None) => Ok(v),
        (None, Some(db)) => Ok(db_to_linear(db)),
        (None, None) => Ok(default),
    }
}

impl RawConfig {
    fn resolve(self) -> Result<ScenarioConfig> {
        let d = ScenarioConfig::preset();
        let lambda = self.lambda.unwrap_or(d.lambda);
        Ok(ScenarioConfig {
            pos_alice: self.pos_alice.unwrap_or(d.pos_alice),
            pos_bob: self.pos_bob.unwrap_or(d.pos_bob),
            pos_eve: self.pos_eve.unwrap_or(d.pos_eve),
            c0: pick("c0", self.c0, self.c0_db, d.c0)?,
            alpha_los: self.alpha_los.unwrap_or(d.alpha_los),
            alpha_nlos: self.alpha_nlos.unwrap_or(d.alpha_nlos),
            iota: self.iota.unwrap_or(d.iota),
            lambda,
            mx: self.mx.unwrap_or(d.mx),
            my: self.my.unwrap_or(d.my),
            elem_spacing: self.elem_spacing.unwrap_or(lambda / 8.0),
            pilot_power_a: pick("pilot_power_a", self.pilot_power_a, self.pilot_power_a_dbw, d.pilot_power_a)?,
            pilot_power_b: pick("pilot_power_b", self.pilot_power_b, self.pilot_power_b_dbw, d.pilot_power_b)?,
            twoway_power: pick("twoway_power", self.twoway_power, self.twoway_power_dbw, d.twoway_power)?,
            noise_var: pick("noise_var", self.noise_var, self.noise_var_dbw, d.noise_var)?,
            amp_gain: pick("amp_gain", self.amp_gain, self.amp_gain_db, d.amp_gain)?,
            beta: self.beta.unwrap_or(d.beta),
            trials: self.trials.unwrap_or(d.trials),
            seed: self.seed.unwrap_or(d.seed),
        })
    }
}
