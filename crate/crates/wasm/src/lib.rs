//! wasm-bindgen bindings behind the static demo page in `www/`.
//!
//! The page can search for a fiducial, load a known one, and draw its
//! overlap matrices as heatmaps. Matrices cross the boundary as flat
//! row-major `Float64Array`s.

use js_sys::Float64Array;
use wasm_bindgen::prelude::*;

use sic_core::overlaps::{f_matrix_direct, g_matrix};
use sic_core::search::{search_sic, SearchConfig, SearchMode, Symmetry};
use sic_core::verify::verify_sic;
use sic_core::whgroup::zauner_unitary;
use sic_core::{fiducials, FiducialVector, SicSolution, TOOL_VERSION};

/// Largest dimension the page offers; beyond this a search blocks the tab too long.
pub const MAX_DEMO_DIM: usize = 16;

fn js_err(e: sic_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Fiducial {
    vector: FiducialVector,
    symmetry: String,
    seed: Option<u64>,
    restarts_used: usize,
    seconds: f64,
}

#[wasm_bindgen]
impl Fiducial {
    pub fn dim(&self) -> usize {
        self.vector.dim()
    }

    pub fn symmetry(&self) -> String {
        self.symmetry.clone()
    }

    /// Restarts run before the hit (0 for a known fiducial).
    #[wasm_bindgen(js_name = restartsUsed)]
    pub fn restarts_used(&self) -> usize {
        self.restarts_used
    }

    pub fn seconds(&self) -> f64 {
        self.seconds
    }

    /// Interleaved `re, im` amplitudes.
    pub fn amplitudes(&self) -> Float64Array {
        Float64Array::from(&self.vector.to_interleaved()[..])
    }

    /// `|⟨a|D_{lα}|a⟩|²` with row `α`, column `l`.
    #[wasm_bindgen(js_name = overlapMatrix)]
    pub fn overlap_matrix(&self) -> Float64Array {
        let f = f_matrix_direct(&self.vector);
        let d = self.dim() as i64;
        let flat: Vec<f64> = (0..d).flat_map(|a| (0..d).map(move |l| (a, l))).map(|(a, l)| f.get(a, l)).collect();
        Float64Array::from(&flat[..])
    }

    /// `|G_{kl}|` from the FFT evaluation, row `k`.
    #[wasm_bindgen(js_name = autocorrelationMatrix)]
    pub fn autocorrelation_matrix(&self) -> Float64Array {
        let g = g_matrix(&self.vector);
        let d = self.dim() as i64;
        let flat: Vec<f64> =
            (0..d).flat_map(|k| (0..d).map(move |l| (k, l))).map(|(k, l)| g.get(k, l).norm()).collect();
        Float64Array::from(&flat[..])
    }

    #[wasm_bindgen(js_name = maxDeviation)]
    pub fn max_deviation(&self) -> f64 {
        verify_sic(&self.vector, 1e-9).max_sic_deviation
    }

    #[wasm_bindgen(js_name = frameError)]
    pub fn frame_error(&self) -> f64 {
        verify_sic(&self.vector, 1e-9).frame_error
    }

    /// The fiducial as a `SICFID 1` file.
    #[wasm_bindgen(js_name = toSicfid)]
    pub fn to_sicfid(&self) -> String {
        let mut s = SicSolution::from_vector(&self.vector, &self.symmetry, 17, self.frame_error());
        if let Some(seed) = self.seed {
            s = s.with_provenance(TOOL_VERSION, seed);
        }
        s.to_sicfid()
    }
}

/// First-hit search in dimension `d` with `restarts` Haar-random starts.
/// `symmetry` is anything the CLI accepts: `none`, `zauner`, `zauner:0`, ...
#[wasm_bindgen(js_name = searchFiducial)]
pub fn search_fiducial(d: usize, seed: u64, restarts: usize, symmetry: &str) -> Result<Fiducial, JsError> {
    if d > MAX_DEMO_DIM {
        return Err(JsError::new(&format!("the demo stops at d = {MAX_DEMO_DIM}; use the CLI beyond that")));
    }
    let mut config = SearchConfig::new(d);
    config.symmetry = Symmetry::parse(symmetry).map_err(js_err)?;
    config.master_seed = seed;
    config.restarts = restarts;
    config.mode = SearchMode::FirstHit;
    let (_, report) = search_sic(&config).map_err(js_err)?;
    let best = report.best.ok_or_else(|| JsError::new(&format!("no fiducial in {restarts} restarts")))?;
    Ok(Fiducial {
        vector: best.vector,
        symmetry: best.symmetry,
        seed: Some(best.seed),
        restarts_used: report.records.len(),
        seconds: report.total_seconds,
    })
}

/// `qubit`, `hesse` or `norrell`.
#[wasm_bindgen(js_name = knownFiducial)]
pub fn known_fiducial(name: &str) -> Result<Fiducial, JsError> {
    let vector = match name {
        "qubit" => fiducials::qubit(),
        "hesse" => fiducials::hesse(),
        "norrell" => fiducials::norrell(),
        _ => return Err(JsError::new(&format!("unknown fiducial {name:?}"))),
    };
    Ok(Fiducial { vector, symmetry: "none".into(), seed: None, restarts_used: 0, seconds: 0.0 })
}

/// Dimensions of the three Zauner eigenspaces.
#[wasm_bindgen(js_name = zaunerDims)]
pub fn zauner_dims(d: usize) -> Result<Vec<usize>, JsError> {
    Ok(zauner_unitary(d).map_err(js_err)?.subspace_dims.to_vec())
}
