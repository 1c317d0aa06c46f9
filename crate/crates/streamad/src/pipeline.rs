//! Composable slot-and-switch pipeline: detector slots, combiner slots, a
//! validated routing table, lockstep streaming execution and runtime
//! hot-swap of slot contents.
//!
//! Duplicate wiring into one combiner port is rejected at validation rather
//! than silently arbitrated away (a hardware switch would let the lowest
//! numbered producer win).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::combiners::{ScoreMethod, WeightVector};
use crate::data::DataStream;
use crate::detectors::{DetectorKind, EnsembleConfig, EnsembleDetector, NumericMode};
use crate::error::{Error, Result};

/// Default input-port budget of a combiner slot.
pub const DEFAULT_COMBINER_PORTS: usize = 4;

#[derive(Debug, Clone)]
pub struct CombinerSpec {
    pub method: ScoreMethod,
    pub weights: Option<WeightVector>,
}

impl CombinerSpec {
    fn combine(&self, inputs: &[f64]) -> Result<f64> {
        let n = inputs.len() as f64;
        Ok(match self.method {
            ScoreMethod::Averaging => inputs.iter().sum::<f64>() / n,
            ScoreMethod::Maximization => inputs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            ScoreMethod::Weighted { conventional } => {
                let w = self.weights.as_ref().ok_or(Error::MissingWeights)?;
                let divisor = if conventional { 1.0 } else { n };
                inputs
                    .iter()
                    .zip(w.as_slice())
                    .map(|(x, wi)| x * wi)
                    .sum::<f64>()
                    / divisor
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum SlotContent {
    Detector(EnsembleDetector),
    Combiner(CombinerSpec),
    Identity,
}

impl SlotContent {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SlotContent::Detector(_) => "detector",
            SlotContent::Combiner(_) => "combiner",
            SlotContent::Identity => "identity",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Slot {
    pub id: String,
    pub content: SlotContent,
    /// Sub-detector budget; defaults to the detector kind's budget.
    pub capacity: Option<usize>,
    /// Input-port budget for combiner contents.
    pub port_budget: usize,
}

impl Slot {
    pub fn new(id: impl Into<String>, content: SlotContent) -> Self {
        Slot {
            id: id.into(),
            content,
            capacity: None,
            port_budget: DEFAULT_COMBINER_PORTS,
        }
    }

    fn effective_capacity(&self, kind: DetectorKind) -> usize {
        self.capacity.unwrap_or_else(|| kind.default_capacity())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub port: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sink {
    pub from: String,
    pub channel: String,
}

#[derive(Debug, Clone, Default)]
pub struct RoutingTable {
    pub edges: Vec<Edge>,
    pub sinks: Vec<Sink>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateSlotId(String),
    UnknownSlotRef(String),
    DuplicateProducer { to: String, port: usize },
    Cycle(String),
    PortBudgetExceeded { slot: String, inputs: usize, budget: usize },
    CombinerWithoutInputs(String),
    IncomingEdgeOnDetector(String),
    IdentityOverWired(String),
    MissingBinding(String),
    BindingOnCombiner(String),
    UnreachedDetector(String),
    CapacityExceeded { slot: String, capacity: usize, requested: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateSlotId(id) => write!(f, "duplicate slot id '{id}'"),
            Violation::UnknownSlotRef(id) => write!(f, "routing references unknown slot '{id}'"),
            Violation::DuplicateProducer { to, port } => {
                write!(f, "duplicate producer wired to {to}.{port}")
            }
            Violation::Cycle(id) => write!(f, "routing cycle through slot '{id}'"),
            Violation::PortBudgetExceeded { slot, inputs, budget } => {
                write!(f, "port budget exceeded on '{slot}': {inputs} inputs > {budget} ports")
            }
            Violation::CombinerWithoutInputs(id) => {
                write!(f, "combiner slot '{id}' has no inputs")
            }
            Violation::IncomingEdgeOnDetector(id) => {
                write!(f, "detector slot '{id}' cannot take routed inputs")
            }
            Violation::IdentityOverWired(id) => {
                write!(f, "identity slot '{id}' needs exactly one source (binding or edge)")
            }
            Violation::MissingBinding(id) => {
                write!(f, "source slot '{id}' has no dataset binding")
            }
            Violation::BindingOnCombiner(id) => {
                write!(f, "combiner slot '{id}' cannot bind a dataset")
            }
            Violation::UnreachedDetector(id) => {
                write!(f, "output of detector slot '{id}' never reaches a sink")
            }
            Violation::CapacityExceeded { slot, capacity, requested } => {
                write!(f, "capacity exceeded on '{slot}': {requested} > {capacity} sub-detectors")
            }
        }
    }
}

/// Per-sink score series produced by a pipeline run.
pub type SinkOutputs = BTreeMap<String, Vec<f64>>;

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub slots: Vec<Slot>,
    /// slot id -> dataset name
    pub bindings: BTreeMap<String, String>,
    pub routing: RoutingTable,
    pub parallel: bool,
}

impl Pipeline {
    pub fn new(slots: Vec<Slot>, bindings: BTreeMap<String, String>, routing: RoutingTable) -> Self {
        Pipeline {
            slots,
            bindings,
            routing,
            parallel: false,
        }
    }

    fn slot_index(&self, id: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.id == id)
    }

    fn incoming(&self, id: &str) -> Vec<&Edge> {
        self.routing.edges.iter().filter(|e| e.to == id).collect()
    }

    /// Structural validation; returns every violation found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let mut seen = HashSet::new();
        for s in &self.slots {
            if !seen.insert(s.id.clone()) {
                violations.push(Violation::DuplicateSlotId(s.id.clone()));
            }
        }
        let known: HashSet<&str> = self.slots.iter().map(|s| s.id.as_str()).collect();
        for e in &self.routing.edges {
            for id in [&e.from, &e.to] {
                if !known.contains(id.as_str()) {
                    violations.push(Violation::UnknownSlotRef(id.clone()));
                }
            }
        }
        for s in &self.routing.sinks {
            if !known.contains(s.from.as_str()) {
                violations.push(Violation::UnknownSlotRef(s.from.clone()));
            }
        }
        for id in self.bindings.keys() {
            if !known.contains(id.as_str()) {
                violations.push(Violation::UnknownSlotRef(id.clone()));
            }
        }

        // Exactly one producer per consumer port.
        let mut ports = HashSet::new();
        for e in &self.routing.edges {
            if !ports.insert((e.to.clone(), e.port)) {
                violations.push(Violation::DuplicateProducer {
                    to: e.to.clone(),
                    port: e.port,
                });
            }
        }

        for slot in &self.slots {
            let inputs = self.incoming(&slot.id).len();
            let bound = self.bindings.contains_key(&slot.id);
            match &slot.content {
                SlotContent::Detector(det) => {
                    if inputs > 0 {
                        violations.push(Violation::IncomingEdgeOnDetector(slot.id.clone()));
                    }
                    if !bound {
                        violations.push(Violation::MissingBinding(slot.id.clone()));
                    }
                    let capacity = slot.effective_capacity(det.kind());
                    if det.r() > capacity {
                        violations.push(Violation::CapacityExceeded {
                            slot: slot.id.clone(),
                            capacity,
                            requested: det.r(),
                        });
                    }
                }
                SlotContent::Combiner(_) => {
                    if bound {
                        violations.push(Violation::BindingOnCombiner(slot.id.clone()));
                    }
                    if inputs == 0 {
                        violations.push(Violation::CombinerWithoutInputs(slot.id.clone()));
                    }
                    if inputs > slot.port_budget {
                        violations.push(Violation::PortBudgetExceeded {
                            slot: slot.id.clone(),
                            inputs,
                            budget: slot.port_budget,
                        });
                    }
                }
                SlotContent::Identity => {
                    let sources = inputs + usize::from(bound);
                    if sources != 1 {
                        violations.push(Violation::IdentityOverWired(slot.id.clone()));
                    }
                }
            }
        }

        // Cycle detection over the edge graph.
        if self.topological_order().is_none() {
            for slot in &self.slots {
                if self.in_cycle(&slot.id) {
                    violations.push(Violation::Cycle(slot.id.clone()));
                    break;
                }
            }
        }

        // Every detector output must reach a sink.
        let sink_set: HashSet<&str> = self.routing.sinks.iter().map(|s| s.from.as_str()).collect();
        for slot in &self.slots {
            if matches!(slot.content, SlotContent::Detector(_))
                && !self.reaches_sink(&slot.id, &sink_set, &mut HashSet::new())
            {
                violations.push(Violation::UnreachedDetector(slot.id.clone()));
            }
        }

        violations
    }

    fn reaches_sink<'a>(
        &'a self,
        id: &'a str,
        sinks: &HashSet<&str>,
        visited: &mut HashSet<&'a str>,
    ) -> bool {
        if sinks.contains(id) {
            return true;
        }
        if !visited.insert(id) {
            return false;
        }
        self.routing
            .edges
            .iter()
            .filter(|e| e.from == id)
            .any(|e| self.reaches_sink(&e.to, sinks, visited))
    }

    fn in_cycle(&self, start: &str) -> bool {
        let mut stack = vec![start.to_string()];
        let mut visited = HashSet::new();
        while let Some(id) = stack.pop() {
            for e in self.routing.edges.iter().filter(|e| e.from == id) {
                if e.to == start {
                    return true;
                }
                if visited.insert(e.to.clone()) {
                    stack.push(e.to.clone());
                }
            }
        }
        false
    }

    /// Kahn topological order over slot indices; None if the graph is cyclic.
    fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.slots.len();
        let idx: HashMap<&str, usize> = self
            .slots
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();
        let mut indegree = vec![0usize; n];
        for e in &self.routing.edges {
            if let Some(&to) = idx.get(e.to.as_str()) {
                if idx.contains_key(e.from.as_str()) {
                    indegree[to] += 1;
                }
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = queue.pop() {
            order.push(i);
            let from = self.slots[i].id.clone();
            for e in self.routing.edges.iter().filter(|e| e.from == from) {
                if let Some(&to) = idx.get(e.to.as_str()) {
                    indegree[to] -= 1;
                    if indegree[to] == 0 {
                        queue.push(to);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidPipeline(
                violations
                    .iter()
                    .map(|v| format!("  - {v}"))
                    .collect::<Vec<_>>()
                    .join("\n"),
            ))
        }
    }

    fn bound_stream<'a>(
        &self,
        id: &str,
        streams: &'a HashMap<String, DataStream>,
    ) -> Result<&'a DataStream> {
        let name = self
            .bindings
            .get(id)
            .ok_or_else(|| Error::UnknownSlot(id.to_string()))?;
        streams
            .get(name)
            .ok_or_else(|| Error::UnknownDataset(name.clone()))
    }

    /// Common length of all bound streams.
    pub fn stream_len(&self, streams: &HashMap<String, DataStream>) -> Result<usize> {
        let mut len = None;
        for id in self.bindings.keys() {
            let s = self.bound_stream(id, streams)?;
            match len {
                None => len = Some(s.len()),
                Some(n) if n != s.len() => {
                    return Err(Error::StreamLengthMismatch(format!(
                        "'{}' has {} samples, expected {}",
                        s.name,
                        s.len(),
                        n
                    )))
                }
                _ => {}
            }
        }
        len.ok_or(Error::EmptyDataset)
    }

    /// Calibrate every detector slot on the first `prefix_len` samples of
    /// its bound stream (clamped to the stream length).
    pub fn calibrate(
        &mut self,
        streams: &HashMap<String, DataStream>,
        prefix_len: usize,
    ) -> Result<()> {
        let bindings = self.bindings.clone();
        for slot in &mut self.slots {
            if let SlotContent::Detector(det) = &mut slot.content {
                let name = bindings
                    .get(&slot.id)
                    .ok_or_else(|| Error::UnknownSlot(slot.id.clone()))?;
                let stream = streams
                    .get(name)
                    .ok_or_else(|| Error::UnknownDataset(name.clone()))?;
                let end = prefix_len.min(stream.len());
                det.calibrate(&stream.samples[..end])?;
            }
        }
        Ok(())
    }

    /// Run the full stream; equivalent to `run_range(streams, 0, N)`.
    pub fn run(&mut self, streams: &HashMap<String, DataStream>) -> Result<SinkOutputs> {
        let n = self.stream_len(streams)?;
        self.run_range(streams, 0, n)
    }

    /// Process samples `start..end` in lockstep: all slots finish sample t
    /// before sample t+1 begins. Slot state carries across calls, so a
    /// prefix run followed by a suffix run equals one full run.
    pub fn run_range(
        &mut self,
        streams: &HashMap<String, DataStream>,
        start: usize,
        end: usize,
    ) -> Result<SinkOutputs> {
        self.ensure_valid()?;
        let n = self.stream_len(streams)?;
        if end > n || start > end {
            return Err(Error::InvalidParameter(format!(
                "range {start}..{end} outside stream of length {n}"
            )));
        }
        for slot in &self.slots {
            if let SlotContent::Detector(det) = &slot.content {
                let stream = self.bound_stream(&slot.id, streams)?;
                if stream.dimension != det.config().dimension {
                    return Err(Error::DimensionMismatch {
                        expected: det.config().dimension,
                        got: stream.dimension,
                    });
                }
            }
        }

        let order = self
            .topological_order()
            .expect("validated pipeline is acyclic");
        let mut outputs: SinkOutputs = self
            .routing
            .sinks
            .iter()
            .map(|s| (s.channel.clone(), Vec::with_capacity(end - start)))
            .collect();

        for t in start..end {
            let mut values: HashMap<String, f64> = HashMap::new();

            // Source slots (detectors and bound identities) are independent
            // within one sample index and may run on multiple threads.
            let source_scores: Vec<(String, f64)> = {
                let bindings = &self.bindings;
                let eval = |slot: &mut Slot| -> Option<Result<(String, f64)>> {
                    let name = bindings.get(&slot.id)?;
                    let stream = streams.get(name)?;
                    let features = &stream.samples[t].features;
                    match &mut slot.content {
                        SlotContent::Detector(det) => Some(
                            det.process(features).map(|score| (slot.id.clone(), score)),
                        ),
                        SlotContent::Identity => Some(Ok((slot.id.clone(), features[0]))),
                        SlotContent::Combiner(_) => None,
                    }
                };
                if self.parallel {
                    use rayon::prelude::*;
                    self.slots
                        .par_iter_mut()
                        .filter_map(eval)
                        .collect::<Result<Vec<_>>>()?
                } else {
                    self.slots
                        .iter_mut()
                        .filter_map(eval)
                        .collect::<Result<Vec<_>>>()?
                }
            };
            values.extend(source_scores);

            // Combiners and pass-throughs in topological order.
            for &i in order.iter().rev() {
                let id = self.slots[i].id.clone();
                if values.contains_key(&id) {
                    continue;
                }
                let mut inputs: Vec<(usize, f64)> = self
                    .incoming(&id)
                    .iter()
                    .map(|e| (e.port, values[&e.from]))
                    .collect();
                inputs.sort_by_key(|(port, _)| *port);
                let xs: Vec<f64> = inputs.into_iter().map(|(_, v)| v).collect();
                let out = match &self.slots[i].content {
                    SlotContent::Combiner(spec) => spec.combine(&xs)?,
                    SlotContent::Identity => xs[0],
                    SlotContent::Detector(_) => unreachable!("detectors are sources"),
                };
                values.insert(id, out);
            }

            for sink in &self.routing.sinks {
                outputs
                    .get_mut(&sink.channel)
                    .expect("sink channel present")
                    .push(values[&sink.from]);
            }
        }
        Ok(outputs)
    }

    /// Replace a slot's content between samples. The new content starts with
    /// fresh window state; routing is unchanged.
    pub fn swap_slot(&mut self, id: &str, mut new_content: SlotContent) -> Result<()> {
        let idx = self
            .slot_index(id)
            .ok_or_else(|| Error::UnknownSlot(id.to_string()))?;
        let incoming = self.incoming(id).len();
        let bound = self.bindings.contains_key(id);
        match &new_content {
            SlotContent::Detector(det) => {
                if incoming > 0 {
                    return Err(Error::KindMismatch(format!(
                        "slot '{id}' takes routed inputs; a detector cannot"
                    )));
                }
                if !bound {
                    return Err(Error::KindMismatch(format!(
                        "slot '{id}' has no dataset binding for a detector"
                    )));
                }
                let capacity = self.slots[idx].effective_capacity(det.kind());
                if det.r() > capacity {
                    return Err(Error::CapacityExceeded {
                        slot: id.to_string(),
                        capacity,
                        requested: det.r(),
                    });
                }
            }
            SlotContent::Combiner(_) => {
                if incoming == 0 {
                    return Err(Error::KindMismatch(format!(
                        "slot '{id}' is a stream source; a combiner needs routed inputs"
                    )));
                }
                if bound {
                    return Err(Error::KindMismatch(format!(
                        "slot '{id}' binds a dataset; a combiner cannot"
                    )));
                }
            }
            SlotContent::Identity => {
                if incoming + usize::from(bound) != 1 {
                    return Err(Error::KindMismatch(format!(
                        "slot '{id}' must have exactly one source for identity"
                    )));
                }
            }
        }
        // State isolation: a swapped-in detector always starts with empty
        // windows, like a freshly configured region.
        if let SlotContent::Detector(det) = &mut new_content {
            det.reset();
        }
        self.slots[idx].content = new_content;
        Ok(())
    }

    /// Wall-clock duration of a swap.
    pub fn measure_swap_cost(&mut self, id: &str, new_content: SlotContent) -> Result<Duration> {
        let start = Instant::now();
        self.swap_slot(id, new_content)?;
        Ok(start.elapsed())
    }

    /// Detector slots with their kinds and sizes, for op accounting.
    pub fn detector_slots(&self) -> Vec<(&str, &EnsembleDetector)> {
        self.slots
            .iter()
            .filter_map(|s| match &s.content {
                SlotContent::Detector(det) => Some((s.id.as_str(), det)),
                _ => None,
            })
            .collect()
    }

    pub fn ops_executed(&self) -> u64 {
        self.detector_slots()
            .iter()
            .map(|(_, det)| det.ops_executed())
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Configuration files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub mode: Option<String>,
    /// Master seed used by slots that do not set their own.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(rename = "slot")]
    pub slots: Vec<SlotConfig>,
    #[serde(default)]
    pub bindings: BTreeMap<String, String>,
    #[serde(default, rename = "edge")]
    pub edges: Vec<EdgeConfig>,
    #[serde(default, rename = "sink")]
    pub sinks: Vec<SinkConfig>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SlotConfig {
    pub id: String,
    pub kind: String,
    #[serde(default)]
    pub detector: Option<String>,
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default)]
    pub bins: Option<usize>,
    #[serde(default)]
    pub cms_rows: Option<usize>,
    #[serde(default)]
    pub cms_mod: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub seed_offset: Option<u64>,
    #[serde(default)]
    pub numeric: Option<String>,
    #[serde(default)]
    pub capacity: Option<usize>,
    #[serde(default)]
    pub method: Option<String>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub ports: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EdgeConfig {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub port: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SinkConfig {
    pub from: String,
    pub channel: String,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}

fn parse_score_method(name: &str) -> Result<ScoreMethod> {
    match name.to_ascii_lowercase().as_str() {
        "averaging" | "average" | "avg" => Ok(ScoreMethod::Averaging),
        "maximization" | "max" => Ok(ScoreMethod::Maximization),
        "weighted" => Ok(ScoreMethod::Weighted {
            conventional: false,
        }),
        "weighted-conventional" => Ok(ScoreMethod::Weighted { conventional: true }),
        other => Err(Error::Config(format!("unknown combiner method '{other}'"))),
    }
}

fn parse_numeric_mode(name: &str) -> Result<NumericMode> {
    match name.to_ascii_lowercase().as_str() {
        "real" | "float" => Ok(NumericMode::Real),
        "fixed" | "q16.16" | "q16_16" => Ok(NumericMode::Fixed),
        other => Err(Error::Config(format!("unknown numeric mode '{other}'"))),
    }
}

/// Options applied on top of a config file when building a pipeline.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOverrides {
    pub seed: Option<u64>,
    pub parallel: Option<bool>,
    pub numeric: Option<NumericMode>,
}

impl Pipeline {
    /// Build a pipeline from a parsed config. Detector dimensions come from
    /// the bound streams.
    pub fn from_config(
        cfg: &PipelineConfig,
        streams: &HashMap<String, DataStream>,
        overrides: BuildOverrides,
    ) -> Result<Self> {
        let master_seed = overrides.seed.or(cfg.seed).unwrap_or(0);
        let mut slots = Vec::with_capacity(cfg.slots.len());
        for sc in &cfg.slots {
            let content = match sc.kind.to_ascii_lowercase().as_str() {
                "detector" => {
                    let kind: DetectorKind = sc
                        .detector
                        .as_deref()
                        .ok_or_else(|| {
                            Error::Config(format!("slot '{}': detector type missing", sc.id))
                        })?
                        .parse()?;
                    let dataset = cfg.bindings.get(&sc.id).ok_or_else(|| {
                        Error::Config(format!("slot '{}': no dataset binding", sc.id))
                    })?;
                    let stream = streams
                        .get(dataset)
                        .ok_or_else(|| Error::UnknownDataset(dataset.clone()))?;
                    let mut ec = EnsembleConfig::new(kind, stream.dimension);
                    if let Some(r) = sc.r {
                        ec.r = r;
                    }
                    if let Some(w) = sc.window {
                        ec.window = w;
                    }
                    if let Some(b) = sc.bins {
                        ec.bins = b;
                    }
                    if let Some(w) = sc.cms_rows {
                        ec.cms_rows = w;
                    }
                    if let Some(m) = sc.cms_mod {
                        ec.cms_mod = m;
                    }
                    if let Some(k) = sc.k {
                        ec.k = k;
                    }
                    ec.seed = sc.seed.unwrap_or(master_seed);
                    ec.seed_offset = sc.seed_offset.unwrap_or(0);
                    ec.mode = match (&overrides.numeric, &sc.numeric) {
                        (Some(m), _) => *m,
                        (None, Some(name)) => parse_numeric_mode(name)?,
                        (None, None) => NumericMode::Real,
                    };
                    SlotContent::Detector(EnsembleDetector::new(ec)?)
                }
                "combiner" => {
                    let method = parse_score_method(sc.method.as_deref().unwrap_or("averaging"))?;
                    let weights = sc
                        .weights
                        .as_ref()
                        .map(|w| WeightVector::new(w.clone()))
                        .transpose()?;
                    SlotContent::Combiner(CombinerSpec { method, weights })
                }
                "identity" => SlotContent::Identity,
                other => {
                    return Err(Error::Config(format!(
                        "slot '{}': unknown kind '{other}'",
                        sc.id
                    )))
                }
            };
            let mut slot = Slot::new(sc.id.clone(), content);
            slot.capacity = sc.capacity;
            if let Some(p) = sc.ports {
                slot.port_budget = p;
            }
            slots.push(slot);
        }
        let routing = RoutingTable {
            edges: cfg
                .edges
                .iter()
                .map(|e| Edge {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    port: e.port,
                })
                .collect(),
            sinks: cfg
                .sinks
                .iter()
                .map(|s| Sink {
                    from: s.from.clone(),
                    channel: s.channel.clone(),
                })
                .collect(),
        };
        let parallel = match overrides.parallel {
            Some(p) => p,
            None => matches!(cfg.mode.as_deref(), Some("parallel")),
        };
        let mut pipeline = Pipeline::new(slots, cfg.bindings.clone(), routing);
        pipeline.parallel = parallel;
        Ok(pipeline)
    }
}

/// Parse a slot-content spec string such as `identity`,
/// `loda:r=35,seed=7,window=128` or `combiner:averaging`.
pub fn parse_content_spec(spec: &str, dimension: usize) -> Result<SlotContent> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("identity") {
        return Ok(SlotContent::Identity);
    }
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h, r),
        None => (spec, ""),
    };
    if head.eq_ignore_ascii_case("combiner") {
        let method = parse_score_method(if rest.is_empty() { "averaging" } else { rest })?;
        return Ok(SlotContent::Combiner(CombinerSpec {
            method,
            weights: None,
        }));
    }
    let kind: DetectorKind = head.parse()?;
    let mut ec = EnsembleConfig::new(kind, dimension);
    if !rest.is_empty() {
        for pair in rest.split(',') {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad content spec field '{pair}'")))?;
            let parse_usize = || -> Result<usize> {
                value
                    .parse()
                    .map_err(|_| Error::Config(format!("bad value '{value}' for '{key}'")))
            };
            match key.trim() {
                "r" => ec.r = parse_usize()?,
                "window" | "w" => ec.window = parse_usize()?,
                "bins" => ec.bins = parse_usize()?,
                "cms_rows" => ec.cms_rows = parse_usize()?,
                "cms_mod" => ec.cms_mod = parse_usize()?,
                "k" => ec.k = parse_usize()?,
                "seed" => {
                    ec.seed = value
                        .parse()
                        .map_err(|_| Error::Config(format!("bad seed '{value}'")))?
                }
                "numeric" => ec.mode = parse_numeric_mode(value)?,
                other => return Err(Error::Config(format!("unknown content field '{other}'"))),
            }
        }
    }
    Ok(SlotContent::Detector(EnsembleDetector::new(ec)?))
}
