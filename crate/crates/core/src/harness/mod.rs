//! Scenario execution, adversary sweeps, complexity-scaling reports, and the
//! oracle-backed verification suites behind the CLI.

pub mod audit;
pub mod fit;
pub mod verify;

pub use audit::{audit_iterations, check_outcome, classify_iteration, RunOutcome};

use crate::bits::Bits;
use crate::convexity::{ConvexSpace, Element, ExplicitSpaceFile, Value, ValueMultiset};
use crate::extractor::Rat;
use crate::protocol::{
    fixed_l_round_bound, transport_encode, unknown_l_round_bound, FixedLParty, ProtocolConfig,
    TransportValue, UnknownLParty,
};
use crate::simnet::{
    run, Adversary, AdversaryKind, NullAdversary, RunConfig, RunTranscript, StandardAdversary,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario invalid: {0}")]
    Invalid(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
}

/// Space descriptor in scenario files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceSpec {
    Grid1d { size: u64 },
    GridBox { dims: Vec<u64> },
    Rational { dim: usize },
    Product { factors: Vec<SpaceSpec> },
    Explicit { file: ExplicitSpaceFile },
}

impl SpaceSpec {
    pub fn build(&self) -> Result<ConvexSpace, HarnessError> {
        match self {
            SpaceSpec::Grid1d { size } => Ok(ConvexSpace::grid_1d(*size)),
            SpaceSpec::GridBox { dims } => Ok(ConvexSpace::grid_box(dims.clone())),
            SpaceSpec::Rational { dim } => Ok(ConvexSpace::euclidean_rational(*dim)),
            SpaceSpec::Product { factors } => {
                let fs: Result<Vec<_>, _> = factors.iter().map(|f| f.build()).collect();
                crate::convexity::product_space(fs?)
                    .map_err(|e| HarnessError::Invalid(e.to_string()))
            }
            SpaceSpec::Explicit { file } => ConvexSpace::finite_explicit(file)
                .map_err(|e| HarnessError::Invalid(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "gen", rename_all = "kebab-case")]
pub enum InputSpec {
    Unanimous { value: Value },
    /// Deterministic distinct-ish values spread over the space, seeded.
    Spread,
    Random,
    List { values: Vec<Value> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub name: String,
    #[serde(default)]
    pub budget: Option<u32>,
}

fn default_version() -> u32 {
    1
}

/// Versioned scenario schema; rationals are strings "p/q".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_version")]
    pub version: u32,
    pub name: String,
    /// "fixed-l" or "unknown-l"
    pub protocol: String,
    pub space: SpaceSpec,
    pub n: usize,
    pub t: usize,
    pub epsilon: String,
    #[serde(default)]
    pub l: Option<u64>,
    pub inputs: InputSpec,
    pub adversary: AdversarySpec,
    /// [first_seed, count]
    pub seeds: [u64; 2],
    #[serde(default)]
    pub expected: Vec<String>,
    #[serde(default)]
    pub log_envelopes: bool,
    /// Optional override for byzantine parties' inputs (protocol-follower
    /// attacks with chosen inputs).
    #[serde(default)]
    pub byzantine_input: Option<Value>,
}

pub fn parse_rat(s: &str) -> Result<Rat, HarnessError> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let p: i64 = p.trim().parse().map_err(|_| HarnessError::Parse(format!("bad rational {s}")))?;
    let q: i64 = q.trim().parse().map_err(|_| HarnessError::Parse(format!("bad rational {s}")))?;
    if q == 0 {
        return Err(HarnessError::Parse("zero denominator".into()));
    }
    Ok(Rat::new(p, q))
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Scenario, HarnessError> {
        serde_json::from_str(s).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    pub fn config(&self) -> Result<ProtocolConfig, HarnessError> {
        Ok(ProtocolConfig {
            n: self.n,
            t: self.t,
            space: self.space.build()?,
            epsilon: parse_rat(&self.epsilon)?,
            l: self.l,
            kappa: crate::erasure::KAPPA,
            lean_assignments: false,
        })
    }
}

/// Deterministic element generation for scenario inputs.
pub fn generate_inputs(
    space: &ConvexSpace,
    spec: &InputSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<Element>, HarnessError> {
    let bad = |e: crate::convexity::ConvexityError| HarnessError::Invalid(e.to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x111_FA7);
    let random_value = |space: &ConvexSpace, rng: &mut ChaCha8Rng| -> Value {
        fn gen(space: &ConvexSpace, rng: &mut ChaCha8Rng) -> Value {
            match space {
                ConvexSpace::GridInterval1D { size } => Value::Grid(rng.gen_range(0..*size)),
                ConvexSpace::GridBox { dims } => {
                    Value::Box(dims.iter().map(|&d| rng.gen_range(0..d)).collect())
                }
                ConvexSpace::EuclideanRational { dim } => Value::point(
                    (0..*dim)
                        .map(|_| {
                            num_rational::BigRational::new(
                                rng.gen_range(-64i64..=64).into(),
                                rng.gen_range(1i64..=8).into(),
                            )
                        })
                        .collect(),
                ),
                ConvexSpace::FiniteExplicit(sp) => Value::Label(rng.gen_range(0..sp.len())),
                ConvexSpace::Product(fs) => {
                    Value::Tuple(fs.iter().map(|f| gen(f, rng)).collect())
                }
            }
        }
        gen(space, rng)
    };
    match spec {
        InputSpec::Unanimous { value } => {
            let e = space.element(value.clone()).map_err(bad)?;
            Ok(vec![e; n])
        }
        InputSpec::List { values } => {
            if values.len() != n {
                return Err(HarnessError::Invalid(format!(
                    "expected {n} inputs, got {}",
                    values.len()
                )));
            }
            values
                .iter()
                .map(|v| space.element(v.clone()).map_err(bad))
                .collect()
        }
        InputSpec::Spread | InputSpec::Random => (0..n)
            .map(|_| space.element(random_value(space, &mut rng)).map_err(bad))
            .collect(),
    }
}

pub fn make_adversary(
    spec: &AdversarySpec,
    t: usize,
    seed: u64,
) -> Result<Option<StandardAdversary>, HarnessError> {
    if spec.name == "none" {
        return Ok(None);
    }
    let kind = AdversaryKind::parse(&spec.name)
        .ok_or_else(|| HarnessError::Invalid(format!("unknown adversary {}", spec.name)))?;
    let budget = spec.budget.unwrap_or(t as u32);
    Ok(Some(StandardAdversary::new(kind, budget, seed)))
}

/// One fixed-length run end to end.
pub fn run_fixed_l(
    cfg: &ProtocolConfig,
    inputs: &[Option<Element>],
    adversary: Option<&mut StandardAdversary>,
    seed: u64,
    log_envelopes: bool,
) -> RunTranscript {
    let machines: Vec<FixedLParty> = (0..cfg.n)
        .map(|i| {
            let enc = inputs[i]
                .as_ref()
                .and_then(|e| transport_encode(&cfg.space, TransportValue::Element(e)));
            FixedLParty::new(cfg.clone(), i as u32, enc)
        })
        .collect();
    let rc = RunConfig {
        n_parties: cfg.n as u32,
        seed,
        round_bound: fixed_l_round_bound(cfg),
        log_envelopes,
    };
    match adversary {
        Some(adv) => run(&rc, machines, adv),
        None => run(&rc, machines, &mut NullAdversary),
    }
}

/// One unknown-length run end to end.
pub fn run_unknown_l(
    cfg: &ProtocolConfig,
    inputs: &[Option<Element>],
    adversary: Option<&mut StandardAdversary>,
    seed: u64,
    log_envelopes: bool,
) -> RunTranscript {
    let machines: Vec<UnknownLParty> = (0..cfg.n)
        .map(|i| UnknownLParty::new(cfg.clone(), i as u32, inputs[i].clone()))
        .collect();
    let rc = RunConfig {
        n_parties: cfg.n as u32,
        seed,
        round_bound: unknown_l_round_bound(cfg),
        log_envelopes,
    };
    match adversary {
        Some(adv) => run(&rc, machines, adv),
        None => run(&rc, machines, &mut NullAdversary),
    }
}

/// Honest parties' original inputs, per the run's final corruption set.
pub fn honest_inputs(transcript: &RunTranscript, inputs: &[Element]) -> ValueMultiset {
    let corrupt: BTreeSet<u32> = transcript
        .corruption_events
        .iter()
        .map(|(_, p)| *p)
        .collect();
    inputs
        .iter()
        .enumerate()
        .filter(|(i, _)| !corrupt.contains(&(*i as u32)))
        .map(|(_, e)| e.clone())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub outcome: RunOutcome,
    pub violated: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub pass: bool,
    pub results: Vec<SeedResult>,
    pub first_failure: Option<String>,
}

impl ScenarioReport {
    /// CSV metrics: one row per seed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,terminated,agreement,validity,bits,rounds\n");
        for r in &self.results {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.seed,
                r.outcome.terminated,
                r.outcome.agreement,
                r.outcome.convex_validity,
                r.outcome.honest_bits,
                r.outcome.rounds
            ));
        }
        out
    }
}

fn check_contracts(expected: &[String], outcome: &RunOutcome) -> Vec<String> {
    let mut violated = Vec::new();
    for c in expected {
        let ok = match c.as_str() {
            "termination" => outcome.terminated,
            "agreement" => outcome.agreement,
            "convex-validity" => outcome.convex_validity,
            "audits" => outcome.audits_ok,
            "no-default-path" => !outcome.default_path_taken,
            other => {
                violated.push(format!("unknown contract {other}"));
                continue;
            }
        };
        if !ok {
            violated.push(c.clone());
        }
    }
    violated
}

/// Executes all seeds of a scenario and asserts its expected contracts.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioReport, HarnessError> {
    let cfg = scenario.config()?;
    match scenario.protocol.as_str() {
        "fixed-l" => cfg
            .validate_fixed_l()
            .map_err(|e| HarnessError::Invalid(e.to_string()))?,
        "unknown-l" => cfg
            .validate_unknown_l()
            .map_err(|e| HarnessError::Invalid(e.to_string()))?,
        other => {
            return Err(HarnessError::Invalid(format!("unknown protocol {other}")));
        }
    }
    let mut results = Vec::new();
    let mut first_failure = None;
    for seed in scenario.seeds[0]..scenario.seeds[0] + scenario.seeds[1] {
        let elems = generate_inputs(&cfg.space, &scenario.inputs, cfg.n, seed)?;
        let mut inputs: Vec<Option<Element>> = elems.iter().cloned().map(Some).collect();
        let mut adversary = make_adversary(&scenario.adversary, scenario.t, seed)?;
        if let (Some(byz_value), Some(adv)) = (&scenario.byzantine_input, &mut adversary) {
            // substitute chosen inputs into the to-be-corrupted parties
            let e = cfg
                .space
                .element(byz_value.clone())
                .map_err(|e| HarnessError::Invalid(e.to_string()))?;
            for p in adv.initial_corruptions(cfg.n as u32, seed) {
                inputs[p as usize] = Some(e.clone());
            }
        }
        let transcript = match scenario.protocol.as_str() {
            "fixed-l" => run_fixed_l(
                &cfg,
                &inputs,
                adversary.as_mut(),
                seed,
                scenario.log_envelopes,
            ),
            _ => run_unknown_l(
                &cfg,
                &inputs,
                adversary.as_mut(),
                seed,
                scenario.log_envelopes,
            ),
        };
        let honest = honest_inputs(&transcript, &elems);
        let outcome = check_outcome(&cfg, &transcript, &honest);
        let violated = check_contracts(&scenario.expected, &outcome);
        if first_failure.is_none() {
            if let Some(v) = violated.first() {
                first_failure = Some(format!("seed {seed}: {v}"));
            }
        }
        results.push(SeedResult { seed, outcome, violated });
    }
    let pass = first_failure.is_none();
    Ok(ScenarioReport { name: scenario.name.clone(), pass, results, first_failure })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalePoint {
    pub n: usize,
    pub l: u64,
    pub bits: u64,
    pub rounds: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub axis: String,
    /// least-squares coefficients for {L n log n, n^2 log n, L n^2}
    pub coefficients: Vec<f64>,
    /// coefficient of the L n^2 term
    pub ln2_coefficient: f64,
    /// max/min of bits / (L n log n + kappa n^2 log n)
    pub normalized_ratio: f64,
    /// rounds = a n + c fit
    pub rounds_slope: f64,
    pub rounds_r2: f64,
}

/// Least-squares fit of measured honest bits against the candidate terms,
/// plus the normalized ratio and the rounds-versus-n linearity.
pub fn scaling_report(points: &[ScalePoint], axis: &str) -> Result<ScalingReport, HarnessError> {
    if points.len() < 4 {
        return Err(HarnessError::DegenerateGrid(format!(
            "need at least 4 grid points, got {}",
            points.len()
        )));
    }
    let kappa = crate::erasure::KAPPA as f64;
    let xs: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let n = p.n as f64;
            let l = p.l as f64;
            let logn = n.log2().max(1.0);
            vec![l * n * logn, n * n * logn, l * n * n]
        })
        .collect();
    let ys: Vec<f64> = points.iter().map(|p| p.bits as f64).collect();
    let coefficients = fit::least_squares(&xs, &ys);
    let ratios: Vec<f64> = points
        .iter()
        .map(|p| {
            let n = p.n as f64;
            let l = p.l as f64;
            let logn = n.log2().max(1.0);
            p.bits as f64 / (l * n * logn + kappa * n * n * logn)
        })
        .collect();
    let normalized_ratio = ratios.iter().cloned().fold(f64::MIN, f64::max)
        / ratios.iter().cloned().fold(f64::MAX, f64::min);
    let ns: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let rs: Vec<f64> = points.iter().map(|p| p.rounds as f64).collect();
    let (rounds_slope, _, rounds_r2) = fit::linear_fit(&ns, &rs);
    Ok(ScalingReport {
        axis: axis.to_string(),
        coefficients: coefficients.clone(),
        ln2_coefficient: coefficients[2],
        normalized_ratio,
        rounds_slope,
        rounds_r2,
    })
}

/// Bundled scenarios shipped with the artifact.
pub fn bundled_scenario(name: &str) -> Option<Scenario> {
    let json = match name {
        "unanimous" => {
            r##"{
                "name": "unanimous",
                "protocol": "fixed-l",
                "space": {"kind": "grid1d", "size": 256},
                "n": 9, "t": 2, "epsilon": "1/1", "l": 8,
                "inputs": {"gen": "unanimous", "value": {"Grid": 113}},
                "adversary": {"name": "crash"},
                "seeds": [0, 10],
                "expected": ["termination", "agreement", "convex-validity", "audits"]
            }"##
        }
        "fixedL-n27" => {
            r##"{
                "name": "fixedL-n27",
                "protocol": "fixed-l",
                "space": {"kind": "grid1d", "size": 256},
                "n": 27, "t": 8, "epsilon": "1/1", "l": 8,
                "inputs": {"gen": "spread"},
                "adversary": {"name": "equivocate"},
                "seeds": [0, 10],
                "expected": ["termination", "agreement", "convex-validity", "audits"]
            }"##
        }
        "product-n9" => {
            r##"{
                "name": "product-n9",
                "protocol": "fixed-l",
                "space": {"kind": "product", "factors": [
                    {"kind": "grid1d", "size": 16}, {"kind": "grid1d", "size": 16}]},
                "n": 9, "t": 2, "epsilon": "1/1", "l": 8,
                "inputs": {"gen": "spread"},
                "adversary": {"name": "root-split"},
                "seeds": [0, 10],
                "expected": ["termination", "agreement", "convex-validity", "audits"]
            }"##
        }
        "unknownL-n10" => {
            r##"{
                "name": "unknownL-n10",
                "protocol": "unknown-l",
                "space": {"kind": "grid1d", "size": 4096},
                "n": 10, "t": 2, "epsilon": "1/1",
                "inputs": {"gen": "spread"},
                "adversary": {"name": "follower"},
                "seeds": [0, 10],
                "expected": ["termination", "agreement", "convex-validity"]
            }"##
        }
        _ => return None,
    };
    Scenario::from_json(json).ok()
}

/// Drives a fixed-L scaling run and reads off one scale point.
pub fn measure_fixed_l(
    cfg: &ProtocolConfig,
    seed: u64,
    adversary: Option<AdversaryKind>,
) -> (ScalePoint, RunTranscript) {
    let inputs =
        generate_inputs(&cfg.space, &InputSpec::Spread, cfg.n, seed).expect("inputs generate");
    let opt: Vec<Option<Element>> = inputs.iter().cloned().map(Some).collect();
    let mut adv = adversary.map(|k| StandardAdversary::new(k, cfg.t as u32, seed));
    let transcript = run_fixed_l(cfg, &opt, adv.as_mut(), seed, false);
    (
        ScalePoint {
            n: cfg.n,
            l: cfg.l.unwrap_or(0),
            bits: transcript.honest_bits_total,
            rounds: transcript.rounds,
        },
        transcript,
    )
}

/// A synthetic control for the fit machinery: a "protocol" that sends
/// exactly L * n bits has a vanishing L n^2 coefficient.
pub fn synthetic_linear_points() -> Vec<ScalePoint> {
    (3..=10)
        .map(|n| ScalePoint {
            n,
            l: 1 << 10,
            bits: (1 << 10) * n as u64,
            rounds: n as u32,
        })
        .collect()
}

pub fn bits_of_output(bytes: &[u8], bit_len: u64) -> Bits {
    Bits::from_bytes_len(bytes.to_vec(), bit_len as usize)
}
