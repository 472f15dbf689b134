//! Problem manifests: a chart, a contact form (or a primitive to contactify),
//! optional fields, and run settings.
//!
//! ```toml
//! [chart]
//! name = "plane"
//! coords = ["z", "q", "p"]
//! bounds = [[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]]   # optional
//!
//! [forms]
//! eta = "dz - p*dq"          # or: vartheta = "-p*dq" on a base chart
//!
//! [fields]
//! hamiltonian = "q"          # contact Hamiltonian for `hamfield`
//! conformal_factor = "1 + q/2"
//!
//! [run]
//! samples = 100
//! seed = 7
//! tol = 1e-10
//! return_tol = 1e-6
//! horizon = 200.0
//! mesh_level = 5
//! start = [0.0, 0.0, 0.0]
//! time = 1.0
//! ```

use anyhow::{bail, Context, Result};
use reebkit::catalog::{CatalogEntry, Dynamics};
use reebkit::contact::{reeb, standard_contactification, verify_contact};
use reebkit::reduction::{Fibration, Section};
use reebkit::{parse_form, Chart, ScalarField, SampleSet, SmoothMap};
use serde::Deserialize;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub chart: ChartBlock,
    pub forms: FormBlock,
    #[serde(default)]
    pub fields: FieldBlock,
    #[serde(default)]
    pub run: RunBlock,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartBlock {
    #[serde(default = "default_chart_name")]
    pub name: String,
    pub coords: Vec<String>,
    pub bounds: Option<Vec<[f64; 2]>>,
}

fn default_chart_name() -> String {
    "manifest".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormBlock {
    pub eta: Option<String>,
    pub vartheta: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldBlock {
    pub hamiltonian: Option<String>,
    pub conformal_factor: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub return_tol: Option<f64>,
    pub horizon: Option<f64>,
    pub mesh_level: Option<u32>,
    pub start: Option<Vec<f64>>,
    pub time: Option<f64>,
    pub hbar: Option<f64>,
}

pub fn load(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
}

impl Manifest {
    /// Builds the same kind of entry the catalog provides.
    pub fn entry(&self, label: &str, samples: usize) -> Result<CatalogEntry> {
        let mut chart = Chart::new(&self.chart.name, &self.chart.coords)?;
        if let Some(bounds) = &self.chart.bounds {
            chart = chart.with_bounds(bounds.iter().map(|[lo, hi]| (*lo, *hi)).collect())?;
        }
        let chart = Arc::new(chart);
        let base_samples = SampleSet::halton(&chart, samples);
        let (contact, fibration) = match (&self.forms.eta, &self.forms.vartheta) {
            (Some(eta), None) => (
                verify_contact(&parse_form(eta, &chart).context("in forms.eta")?, &base_samples)?,
                None,
            ),
            (None, Some(vartheta)) => {
                let vartheta = parse_form(vartheta, &chart).context("in forms.vartheta")?;
                let contact = standard_contactification(&vartheta, &base_samples)?;
                let total = contact.chart().clone();
                let coords: Vec<&str> = self.chart.coords.iter().map(String::as_str).collect();
                let mut lift = coords.clone();
                lift.push("0");
                let fib = Fibration {
                    total_chart: total.clone(),
                    base_chart: chart.clone(),
                    eta: Some(contact.eta().clone()),
                    d_eta: contact.d_eta().clone(),
                    reeb: reeb(&contact).field().clone(),
                    projection: SmoothMap::parse(&total, &chart, &coords)?,
                    sections: vec![Section::new(
                        "t = 0",
                        SmoothMap::parse(&chart, &total, &lift)?,
                        ScalarField::constant(&chart, 1.0),
                    )?],
                    hbar: None,
                    total_constraints: vec![],
                    base_constraints: vec![],
                    total_samples: base_samples.product(&[-0.5, 0.5]).take(50),
                    base_samples: base_samples.clone(),
                };
                (contact, Some(fib))
            }
            _ => bail!("manifest needs exactly one of forms.eta and forms.vartheta"),
        };
        let samples = if fibration.is_some() {
            base_samples.product(&[-0.5, 0.5])
        } else {
            base_samples
        };
        let field = reeb(&contact).field().clone();
        let dyn_chart = contact.chart().clone();
        let factor = self
            .fields
            .conformal_factor
            .as_deref()
            .map(|f| ScalarField::parse(f, &dyn_chart))
            .transpose()
            .context("in fields.conformal_factor")?;
        let hamiltonian = self
            .fields
            .hamiltonian
            .as_deref()
            .map(|h| ScalarField::parse(h, &dyn_chart))
            .transpose()
            .context("in fields.hamiltonian")?;
        Ok(CatalogEntry {
            name: label.to_string(),
            description: format!("manifest {label}"),
            dynamics: Dynamics {
                chart: dyn_chart,
                field,
                form: contact.eta().clone(),
                embedding: None,
                constraint: None,
            },
            contact,
            samples,
            hamiltonian,
            conformal_factor: factor,
            cone: None,
            fibration,
            trivialization: None,
            start: self.run.start.clone(),
        })
    }
}
