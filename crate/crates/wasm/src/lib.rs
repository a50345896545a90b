//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations are exposed: generating a Mackey-Glass series, training
//! and scoring a small network on it, and describing a topology.

use deepesn::data::MackeyGlass;
use deepesn::experiment::{fit_and_score, prepare_split, DatasetSpec, ModelSpec, SplitSpec};
use deepesn::init::Scale;
use deepesn::ip::IpConfig;
use deepesn::numerics::RngStream;
use deepesn::topology::{Connectivity, Source, TopologyKind};
use wasm_bindgen::prelude::*;

/// Series length used by [`forecast`]; small enough to train interactively.
pub const DEMO_SPLIT: SplitSpec = SplitSpec {
    train_len: 1500,
    test_len: 500,
    horizon: 1,
    washout: 100,
    normalize: true,
};

fn js(e: deepesn::Error) -> JsError {
    JsError::new(&e.to_string())
}

pub fn mackey_glass_series(n: usize, tau: f64) -> deepesn::Result<Vec<f64>> {
    let mg = MackeyGlass { tau, ..MackeyGlass::default() };
    Ok(mg.generate(n)?.values)
}

/// `n` samples of Mackey-Glass with delay `tau` (a whole number of steps).
#[wasm_bindgen(js_name = mackeyGlass)]
pub fn mackey_glass(n: usize, tau: f64) -> Result<Vec<f64>, JsError> {
    mackey_glass_series(n, tau).map_err(js)
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Forecast {
    rmse: f64,
    nrmse: f64,
    effective_radius: f64,
    target: Vec<f64>,
    prediction: Vec<f64>,
}

#[wasm_bindgen]
impl Forecast {
    #[wasm_bindgen(getter)]
    pub fn rmse(&self) -> f64 {
        self.rmse
    }

    #[wasm_bindgen(getter)]
    pub fn nrmse(&self) -> f64 {
        self.nrmse
    }

    /// Largest effective spectral radius over the reservoirs.
    #[wasm_bindgen(getter, js_name = effectiveRadius)]
    pub fn effective_radius(&self) -> f64 {
        self.effective_radius
    }

    #[wasm_bindgen(getter)]
    pub fn target(&self) -> Vec<f64> {
        self.target.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn prediction(&self) -> Vec<f64> {
        self.prediction.clone()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ForecastParams<'a> {
    pub topology: &'a str,
    pub n_r: usize,
    pub horizon: usize,
    pub sigma_in: f64,
    pub alpha: f64,
    pub ip: bool,
    pub seed: u32,
}

pub fn run_forecast(p: ForecastParams<'_>) -> deepesn::Result<Forecast> {
    let split_spec = SplitSpec { horizon: p.horizon, ..DEMO_SPLIT };
    let split = prepare_split(&DatasetSpec::MackeyGlass(MackeyGlass::default()), &split_spec)?;
    let mut spec = ModelSpec::mackey_glass_wide();
    spec.topology = p.topology.parse()?;
    spec.n_r = p.n_r;
    spec.init.sigma_in = Scale::Value(p.sigma_in);
    spec.init.alpha = p.alpha;
    spec.ip = p.ip.then_some(IpConfig { epochs: 2, ..IpConfig::default() });
    spec.validate()?;
    let out = fit_and_score(&split, &spec, &RngStream::root(u64::from(p.seed)).child("demo"))?;
    Ok(Forecast {
        rmse: out.metrics.rmse,
        nrmse: out.metrics.nrmse,
        effective_radius: out.model.max_effective_radius()?,
        target: out.target,
        prediction: out.prediction,
    })
}

/// Trains a network on a fresh Mackey-Glass series and forecasts `horizon`
/// steps ahead over the test window.
#[wasm_bindgen]
pub fn forecast(
    topology: &str,
    n_r: usize,
    horizon: usize,
    sigma_in: f64,
    alpha: f64,
    ip: bool,
    seed: u32,
) -> Result<Forecast, JsError> {
    run_forecast(ForecastParams { topology, n_r, horizon, sigma_in, alpha, ip, seed }).map_err(js)
}

pub fn topology_json(topology: &str) -> deepesn::Result<String> {
    let kind: TopologyKind = topology.parse()?;
    let c = Connectivity::build(kind)?;
    let name = |s: Source| match s {
        Source::Input => serde_json::Value::from("u"),
        Source::Reservoir(i) => serde_json::Value::from(i),
    };
    let edges: Vec<_> = c.edges().into_iter().map(|(s, d)| serde_json::json!([name(s), d])).collect();
    let (columns, rows) = match kind {
        TopologyKind::Wide(w) => (1, w),
        TopologyKind::Layered(d) => (d, 1),
        TopologyKind::CrissCross(n) => (n, n),
        TopologyKind::WideLayered { width, depth } => (depth, width),
    };
    Ok(serde_json::json!({
        "name": kind.to_string(),
        "family": kind.family(),
        "reservoirs": c.n_reservoirs(),
        "columns": columns,
        "rows": rows,
        "edges": edges,
    })
    .to_string())
}

/// JSON description of a topology: reservoir count, grid shape (reservoirs
/// are numbered column-major) and the edge list, with `"u"` for the input.
#[wasm_bindgen(js_name = describeTopology)]
pub fn describe_topology(topology: &str) -> Result<String, JsError> {
    topology_json(topology).map_err(js)
}
