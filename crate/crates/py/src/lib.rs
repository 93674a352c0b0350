//! Python bindings. Exact values come back as `fractions.Fraction`, with
//! `float("inf")` for the infinite scalar.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lpfree_core::besov as cb;
use lpfree_core::measure as cm;
use lpfree_core::mobius::{parse_map, parse_space};
use lpfree_core::{verify as cv, ExactScalar, Rank};

fn err(e: lpfree_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rank(n: usize) -> PyResult<Rank> {
    Rank::new(n).map_err(err)
}

fn fraction<'py>(py: Python<'py>, s: &ExactScalar) -> PyResult<Bound<'py, PyAny>> {
    if s.is_infinite() {
        return Ok(f64::INFINITY.into_pyobject(py)?.into_any());
    }
    py.import("fractions")?.getattr("Fraction")?.call1((s.to_string(),))
}

/// A reduced word in the free group of rank `rank`.
#[pyclass(module = "lpfree", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct Word {
    rank: Rank,
    inner: lpfree_core::Word,
}

#[pymethods]
impl Word {
    #[new]
    #[pyo3(signature = (text, rank = 2))]
    fn new(text: &str, rank: usize) -> PyResult<Self> {
        let r = self::rank(rank)?;
        Ok(Word {
            rank: r,
            inner: r.parse_word(text).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (length, seed, rank = 2))]
    fn random(length: usize, seed: u64, rank: usize) -> PyResult<Self> {
        use rand::SeedableRng;
        let r = self::rank(rank)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Ok(Word {
            rank: r,
            inner: r.random_word(length, &mut rng),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Word({:?}, rank={})", self.inner.to_string(), self.rank.n())
    }

    fn __mul__(&self, other: &Word) -> Word {
        Word {
            rank: self.rank,
            inner: self.inner.multiply(&other.inner),
        }
    }

    fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            inner: self.inner.inverse(),
        }
    }

    fn gromov_product(&self, other: &Word) -> usize {
        self.inner.gromov_product(&other.inner)
    }

    fn distance(&self, other: &Word) -> usize {
        self.inner.distance(&other.inner)
    }
}

/// An eventually periodic boundary point, written `pre|(period)^inf`.
#[pyclass(module = "lpfree", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct BoundaryPoint {
    rank: Rank,
    inner: lpfree_core::BoundaryPoint,
}

#[pymethods]
impl BoundaryPoint {
    #[new]
    #[pyo3(signature = (text, rank = 2))]
    fn new(text: &str, rank: usize) -> PyResult<Self> {
        let r = self::rank(rank)?;
        Ok(BoundaryPoint {
            rank: r,
            inner: r.parse_boundary(text).map_err(err)?,
        })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("BoundaryPoint({:?}, rank={})", self.inner.to_string(), self.rank.n())
    }

    fn prefix(&self, n: usize) -> Word {
        Word {
            rank: self.rank,
            inner: self.inner.prefix(n),
        }
    }

    /// `g` applied to this point.
    fn act(&self, g: &Word) -> BoundaryPoint {
        BoundaryPoint {
            rank: self.rank,
            inner: self.inner.act(&g.inner),
        }
    }

    /// `None` for equal points.
    fn gromov_product(&self, other: &BoundaryPoint) -> Option<usize> {
        self.inner.gromov_product(&other.inner).finite()
    }

    fn poisson_kernel<'py>(&self, py: Python<'py>, g: &Word) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &cm::poisson_kernel(self.rank, &g.inner, &self.inner))
    }
}

#[pyfunction]
#[pyo3(signature = (n, rank = 2))]
fn nu_levelset<'py>(py: Python<'py>, n: usize, rank: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &cm::nu_levelset(self::rank(rank)?, n))
}

/// Rows `(n, nu(K_n), partial sum)` for `n = 0..=depth`.
#[pyfunction]
#[pyo3(signature = (depth, rank = 2))]
fn levelset_table<'py>(
    py: Python<'py>,
    depth: usize,
    rank: usize,
) -> PyResult<Vec<(usize, Bound<'py, PyAny>, Bound<'py, PyAny>)>> {
    let t = cm::LevelSetTable::new(self::rank(rank)?, depth);
    t.entries
        .iter()
        .zip(t.partial_sums())
        .map(|((n, m), s)| Ok((*n, fraction(py, m)?, fraction(py, &s)?)))
        .collect()
}

#[pyfunction]
fn mu_cylinder<'py>(py: Python<'py>, x: &Word) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &cm::mu_cylinder(x.rank, &x.inner))
}

/// Exact `||c_g||_p^p` for integer `p`.
#[pyfunction]
fn cocycle_norm_p<'py>(py: Python<'py>, g: &Word, p: u32) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &cm::cocycle_lp_norm_p(g.rank, &g.inner, p).map_err(err)?)
}

/// Floating-point `||c_g||_p^p` for real `p`, depending only on `|g|`.
#[pyfunction]
#[pyo3(signature = (length, p, rank = 2))]
fn cocycle_norm_p_approx(length: usize, p: f64, rank: usize) -> PyResult<f64> {
    Ok(cm::cocycle_lp_norm_p_approx(self::rank(rank)?.q(), length, p))
}

#[pyfunction]
#[pyo3(signature = (length, p, rank = 2))]
fn norm_brackets<'py>(py: Python<'py>, length: usize, p: u32, rank: usize) -> PyResult<Bound<'py, PyDict>> {
    let b = cm::norm_brackets(self::rank(rank)?, length, p);
    let d = PyDict::new(py);
    d.set_item("s", fraction(py, &b.s)?)?;
    d.set_item("lower", fraction(py, &b.lower)?)?;
    d.set_item("upper", fraction(py, &b.upper)?)?;
    d.set_item("rate_lower", fraction(py, &b.rate_lower)?)?;
    d.set_item("rate_upper", fraction(py, &b.rate_upper)?)?;
    Ok(d)
}

/// `(besov_p, norm_p)` for the Busemann function of `g`.
#[pyfunction]
fn besov_bridge<'py>(py: Python<'py>, g: &Word, p: u32) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let (b, n) = cb::bridge_identity(g.rank, &g.inner, p).map_err(err)?;
    Ok((fraction(py, &b)?, fraction(py, &n)?))
}

/// Rows of the properness table as dictionaries.
#[pyfunction]
fn properness_table<'py>(py: Python<'py>, elements: Vec<Word>, p: u32) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let Some(first) = elements.first() else {
        return Ok(Vec::new());
    };
    let words: Vec<_> = elements.iter().map(|w| w.inner.clone()).collect();
    let rows = cb::properness_table(first.rank, &words, p).map_err(err)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("element", r.element.to_string())?;
            d.set_item("length", r.length)?;
            d.set_item("ep_p", fraction(py, &r.ep_p)?)?;
            d.set_item("besov_p", fraction(py, &r.besov_p)?)?;
            d.set_item("lower_bracket", fraction(py, &r.lower_bracket)?)?;
            d.set_item("upper_bracket", fraction(py, &r.upper_bracket)?)?;
            Ok(d)
        })
        .collect()
}

/// Runs the verification suites; returns `(passed, json report)`.
#[pyfunction]
#[pyo3(signature = (rank = 2, p = 2, count = 40, seed = 1, perturb = false))]
fn verify(rank: usize, p: u32, count: usize, seed: u64, perturb: bool) -> PyResult<(bool, String)> {
    let cfg = cv::VerifyConfig {
        p,
        count,
        seed,
        perturb,
        ..cv::VerifyConfig::new(self::rank(rank)?)
    };
    let report = cv::run(&cfg).map_err(err)?;
    Ok((report.passed(), report.to_json()))
}

/// Möbius report for a map on a metric space, both given as text in the
/// formats the command line reads. Returns `(passed, json report)`.
#[pyfunction]
#[pyo3(signature = (space, map, tolerance = None, seed = 1))]
fn mobius_check(space: &str, map: &str, tolerance: Option<f64>, seed: u64) -> PyResult<(bool, String)> {
    let space = parse_space(space).map_err(err)?;
    let map = parse_map(map).map_err(err)?;
    let (v, ok) = lpfree_core::cli::mobius_check_report(&space, &map, tolerance, seed).map_err(err)?;
    Ok((ok, v.to_string()))
}

/// Kappa of a metric space given as text; returns a json report.
#[pyfunction]
fn kappa(space: &str) -> PyResult<String> {
    let space = parse_space(space).map_err(err)?;
    Ok(lpfree_core::cli::kappa_report(&space).map_err(err)?.to_string())
}

#[pymodule]
fn lpfree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Word>()?;
    m.add_class::<BoundaryPoint>()?;
    m.add_function(wrap_pyfunction!(nu_levelset, m)?)?;
    m.add_function(wrap_pyfunction!(levelset_table, m)?)?;
    m.add_function(wrap_pyfunction!(mu_cylinder, m)?)?;
    m.add_function(wrap_pyfunction!(cocycle_norm_p, m)?)?;
    m.add_function(wrap_pyfunction!(cocycle_norm_p_approx, m)?)?;
    m.add_function(wrap_pyfunction!(norm_brackets, m)?)?;
    m.add_function(wrap_pyfunction!(besov_bridge, m)?)?;
    m.add_function(wrap_pyfunction!(properness_table, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(mobius_check, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    Ok(())
}
