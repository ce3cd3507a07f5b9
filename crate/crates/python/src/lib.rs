//! Python bindings. Structured results come back as plain dicts and lists,
//! matching the CLI's JSON output.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use okit_core::coxeter::DEFAULT_ORDER_CAP;
use okit_core::koszulver::{verify_s5c4, verify_t11, verify_t21, verify_tback, verify_tbgs};
use okit_core::stratblock::{b_block_data, c_ext_profile};
use okit_core::{
    Block, BlockSpec, CBlock, CoxeterGroup, Element, Flavor, KlTable, LinearData, MultMatrix, OkitError,
    ParabolicSubset, RegularBlock,
};

fn err(e: OkitError) -> PyErr {
    match e {
        OkitError::InvariantBreach(_) => PyRuntimeError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn subset(s: &str) -> PyResult<ParabolicSubset> {
    s.parse().map_err(err)
}

/// A finite Coxeter group; elements are comma-separated canonical words.
#[pyclass(name = "CoxeterGroup", frozen)]
struct PyGroup {
    inner: Arc<CoxeterGroup>,
}

impl PyGroup {
    fn el(&self, w: &str) -> PyResult<Element> {
        self.inner.parse(w).map_err(err)
    }
}

#[pymethods]
impl PyGroup {
    #[new]
    #[pyo3(signature = (diagram, cap = DEFAULT_ORDER_CAP))]
    fn new(diagram: &str, cap: u64) -> PyResult<Self> {
        let d = diagram.parse().map_err(err)?;
        Ok(Self { inner: CoxeterGroup::build_with_cap(d, cap).map_err(err)? })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn coxeter_matrix(&self) -> Vec<Vec<u32>> {
        self.inner.coxeter_matrix().to_vec()
    }

    fn elements(&self) -> Vec<String> {
        self.inner.elements().map(|w| self.inner.format(w)).collect()
    }

    fn length(&self, w: &str) -> PyResult<usize> {
        Ok(self.inner.length(self.el(w)?))
    }

    fn longest(&self) -> String {
        self.inner.format(self.inner.longest())
    }

    fn product(&self, x: &str, y: &str) -> PyResult<String> {
        let p = self.inner.product(self.el(x)?, self.el(y)?).map_err(err)?;
        Ok(self.inner.format(p))
    }

    fn inverse(&self, w: &str) -> PyResult<String> {
        Ok(self.inner.format(self.inner.inverse(self.el(w)?)))
    }

    /// Bruhat order `x <= y`.
    fn le(&self, x: &str, y: &str) -> PyResult<bool> {
        self.inner.bruhat_leq(self.el(x)?, self.el(y)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("CoxeterGroup('{}')", self.inner.diagram())
    }
}

/// The graded regular block of a Coxeter type, with its KL table; all
/// other blocks are derived from it.
#[pyclass(name = "RegularBlock", frozen)]
struct PyBlock {
    inner: Arc<RegularBlock>,
}

impl PyBlock {
    fn group(&self) -> &Arc<CoxeterGroup> {
        self.inner.group()
    }

    fn el(&self, w: &str) -> PyResult<Element> {
        self.group().parse(w).map_err(err)
    }

    fn spec(&self, g: &str, h: &str, flavor: Option<&str>) -> PyResult<BlockSpec> {
        let (gs, hs) = (subset(g)?, subset(h)?);
        let flavor = match flavor {
            Some(f) => f.parse().map_err(err)?,
            None => BlockSpec::default_flavor(gs, hs),
        };
        BlockSpec::new(self.group().diagram(), gs, hs, flavor).map_err(err)
    }

    fn matrix<'py>(&self, py: Python<'py>, m: &MultMatrix) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &m.to_json(self.group()))
    }
}

#[pymethods]
impl PyBlock {
    #[new]
    #[pyo3(signature = (diagram, cap = DEFAULT_ORDER_CAP))]
    fn new(py: Python<'_>, diagram: &str, cap: u64) -> PyResult<Self> {
        let d = diagram.parse().map_err(err)?;
        let g = CoxeterGroup::build_with_cap(d, cap).map_err(err)?;
        let inner = py.detach(|| Arc::new(RegularBlock::new(Arc::new(KlTable::build(g)))));
        Ok(Self { inner })
    }

    #[getter(group)]
    fn py_group(&self) -> PyGroup {
        PyGroup { inner: self.group().clone() }
    }

    /// `P_{x,y}` as `[[exponent, coefficient], ...]` in `q`.
    fn kl_poly(&self, x: &str, y: &str) -> PyResult<Vec<(i32, i64)>> {
        let p = self.inner.kl().kl_poly(self.el(x)?, self.el(y)?).map_err(err)?;
        Ok(p.to_pairs().into_iter().map(|(e, c)| (e, i64::try_from(c).expect("small coefficient"))).collect())
    }

    fn kl_string(&self, x: &str, y: &str) -> PyResult<String> {
        let p = self.inner.kl().kl_poly(self.el(x)?, self.el(y)?).map_err(err)?;
        Ok(p.to_string_ascending("q"))
    }

    fn mu(&self, x: &str, y: &str) -> PyResult<String> {
        Ok(self.inner.kl().mu(self.el(x)?, self.el(y)?).map_err(err)?.to_string())
    }

    #[pyo3(signature = (g = "", h = "", flavor = None))]
    fn dec_matrix<'py>(&self, py: Python<'py>, g: &str, h: &str, flavor: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let spec = self.spec(g, h, flavor)?;
        let m = match spec.flavor {
            Flavor::C => CBlock::new(self.inner.clone(), spec.h).map_err(err)?.standard_dec_matrix().clone(),
            _ => Block::new(self.inner.clone(), spec).map_err(err)?.dec_matrix().clone(),
        };
        self.matrix(py, &m)
    }

    #[pyo3(signature = (g = "", h = "", flavor = None))]
    fn cartan<'py>(&self, py: Python<'py>, g: &str, h: &str, flavor: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let spec = self.spec(g, h, flavor)?;
        let m = match spec.flavor {
            Flavor::C => CBlock::new(self.inner.clone(), spec.h).map_err(err)?.cartan().clone(),
            Flavor::B => b_block_data(&self.inner, spec.g, spec.h).map_err(err)?.cartan,
            _ => Block::new(self.inner.clone(), spec).map_err(err)?.cartan().clone(),
        };
        self.matrix(py, &m)
    }

    #[pyo3(signature = (x, g = "", h = "", flavor = None))]
    fn tilting_coresolution<'py>(
        &self,
        py: Python<'py>,
        x: &str,
        g: &str,
        h: &str,
        flavor: Option<&str>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let data = LinearData::new(self.inner.clone(), self.spec(g, h, flavor)?).map_err(err)?;
        let p = data.linear_tilting_coresolution(self.el(x)?).map_err(err)?;
        to_py(py, &p.to_json(self.group()))
    }

    #[pyo3(signature = (x, g = "", h = "", flavor = None))]
    fn projective_resolution<'py>(
        &self,
        py: Python<'py>,
        x: &str,
        g: &str,
        h: &str,
        flavor: Option<&str>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let data = LinearData::new(self.inner.clone(), self.spec(g, h, flavor)?).map_err(err)?;
        let p = data.linear_projective_resolution(self.el(x)?).map_err(err)?;
        to_py(py, &p.to_json(self.group()))
    }

    /// Graded Ext profile in `C_e^H`.
    fn ext<'py>(&self, py: Python<'py>, h: &str, x: &str, y: &str) -> PyResult<Bound<'py, PyAny>> {
        let c = CBlock::new(self.inner.clone(), subset(h)?).map_err(err)?;
        let data = LinearData::new(self.inner.clone(), *c.spec()).map_err(err)?;
        let rep = c_ext_profile(&data, &c, self.el(x)?, self.el(y)?).map_err(err)?;
        to_py(py, &rep.to_json(self.group()))
    }

    /// One of `t21`, `tbgs`, `tback`, `t11`, `s5c4`.
    #[pyo3(signature = (theorem, g = "", h = ""))]
    fn verify<'py>(&self, py: Python<'py>, theorem: &str, g: &str, h: &str) -> PyResult<Bound<'py, PyAny>> {
        let (gs, hs) = (subset(g)?, subset(h)?);
        let r = &self.inner;
        let rep = match theorem {
            "t21" => verify_t21(r),
            "tbgs" => verify_tbgs(r, gs),
            "tback" => verify_tback(r, gs, hs),
            "t11" => verify_t11(r, gs, hs),
            "s5c4" => verify_s5c4(r, hs),
            other => return Err(PyValueError::new_err(format!("unknown theorem {other:?}"))),
        }
        .map_err(err)?;
        to_py(py, &rep.to_json())
    }

    fn __repr__(&self) -> String {
        format!("RegularBlock('{}')", self.group().diagram())
    }
}

#[pymodule]
fn okit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PyBlock>()?;
    Ok(())
}
