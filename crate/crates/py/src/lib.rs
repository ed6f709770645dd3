//! Python bindings: the field/algebra constructions, group and class data,
//! exact character tables, and the verification suites, mirrored from the
//! command-line interface. Structured results come back as JSON strings.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use charmat::chartab::dixon_schneider;
use charmat::classes::{grassmannian_orbits, ClassData};
use charmat::distinction::{
    conjecture_sweep, verify_clifford as clifford_impl, verify_gelfand as gelfand_impl,
    verify_main_theorem, verify_prasad as prasad_impl, Budgets, DistinctionContext,
};
use charmat::gf::{field_for_q, AlgebraKind, QuadraticAlgebra};
use charmat::grp::{build_g_family, gl_group, h_group, sl_group};
use charmat::mackey4::{
    check_prop_42, check_prop_44, prop44_direct_crosscheck, verify_mackey_22, MackeyContext,
    P13Context,
};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_alg(q: u16, kind: &str) -> PyResult<Arc<QuadraticAlgebra>> {
    let field = field_for_q(q).map_err(err)?;
    let kind = AlgebraKind::parse(kind).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(Arc::new(QuadraticAlgebra::new(field, kind).map_err(err)?))
}

/// The quadratic algebra E over F_q with its norm and 2x2 embedding.
#[pyclass]
struct Algebra {
    inner: Arc<QuadraticAlgebra>,
}

#[pymethods]
impl Algebra {
    #[new]
    fn new(q: u16, kind: &str) -> PyResult<Self> {
        Ok(Algebra { inner: parse_alg(q, kind)? })
    }

    fn q(&self) -> u16 {
        self.inner.q()
    }

    fn kind(&self) -> String {
        format!("{:?}", self.inner.kind).to_lowercase()
    }

    fn unit_group_order(&self) -> u32 {
        self.inner.unit_group_order()
    }

    fn units(&self) -> Vec<u32> {
        self.inner.units()
    }

    fn norm(&self, a: u32) -> u16 {
        self.inner.norm(a)
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        self.inner.alg_mul(a, b)
    }

    fn embed2x2(&self, a: u32) -> Vec<Vec<u16>> {
        let m = self.inner.embed2x2(a);
        vec![vec![m[0], m[1]], vec![m[2], m[3]]]
    }

    fn descriptor(&self) -> String {
        self.inner.descriptor().to_string()
    }
}

/// An exact character table handle.
#[pyclass]
struct CharTable {
    table: charmat::chartab::CharacterTable,
}

#[pymethods]
impl CharTable {
    fn group(&self) -> String {
        self.table.data.group_tag.clone()
    }

    fn order(&self) -> u64 {
        self.table.data.order
    }

    fn degrees(&self) -> Vec<u64> {
        self.table.degrees.clone()
    }

    fn num_classes(&self) -> usize {
        self.table.data.num_classes()
    }

    fn class_sizes(&self) -> Vec<u64> {
        self.table.data.classes.iter().map(|c| c.size).collect()
    }

    fn centralizer_orders(&self) -> Vec<u64> {
        self.table.data.classes.iter().map(|c| c.centralizer).collect()
    }

    /// Value chi_row(class) rendered as an exact expression.
    fn value(&self, row: usize, class: usize) -> String {
        format!("{}", self.table.rows[row].values[class])
    }

    fn to_json(&self) -> String {
        self.table.to_json().to_string()
    }

    fn gap_style(&self) -> String {
        self.table.gap_style()
    }
}

fn group_for(tag: &str, n: u8, q: u16, kind: &str) -> PyResult<Arc<charmat::grp::MatGroup>> {
    let field = field_for_q(q).map_err(err)?;
    let budget = charmat::grp::DEFAULT_ORDER_BUDGET;
    Ok(match tag {
        "gl" => gl_group(&field, n, budget),
        "sl" => sl_group(&field, n, budget),
        "h" => h_group(&parse_alg(q, kind)?, n, budget),
        other => return Err(PyValueError::new_err(format!("unknown group '{}'", other))),
    })
}

/// Character table of gl | sl | h at the given size.
#[pyfunction]
#[pyo3(signature = (group, n, q, kind = "nonsplit", seed = 0))]
fn character_table(group: &str, n: u8, q: u16, kind: &str, seed: u64) -> PyResult<CharTable> {
    let g = group_for(group, n, q, kind)?;
    let data = ClassData::enumerate(&g).map_err(err)?;
    let budgets = Budgets::default();
    let table =
        dixon_schneider(&data, seed, budgets.dixon_order, budgets.dixon_classes).map_err(err)?;
    Ok(CharTable { table })
}

/// Orders of the whole subgroup configuration, as JSON.
#[pyfunction]
#[pyo3(signature = (n, q, kind = "nonsplit"))]
fn grp_info(n: u8, q: u16, kind: &str) -> PyResult<String> {
    let alg = parse_alg(q, kind)?;
    let fam = build_g_family(&alg, n, charmat::grp::DEFAULT_ORDER_BUDGET).map_err(err)?;
    Ok(serde_json::json!({
        "G": fam.g.order,
        "Gflat": fam.gflat.order,
        "H": fam.h.order,
        "Hflat": fam.hflat.order,
        "Hplus": fam.hplus.order,
    })
    .to_string())
}

/// Class list (sizes and centralizer orders) of gl | sl | h, as JSON.
#[pyfunction]
#[pyo3(signature = (group, n, q, kind = "nonsplit"))]
fn class_data(group: &str, n: u8, q: u16, kind: &str) -> PyResult<String> {
    let data = if group == "gl" && charmat::grp::gl_order(n as u32, q as u64) > charmat::grp::DEFAULT_ORDER_BUDGET
    {
        let field = field_for_q(q).map_err(err)?;
        ClassData::gl_parametrized(&field, n).map_err(err)?
    } else {
        let g = group_for(group, n, q, kind)?;
        ClassData::enumerate(&g).map_err(err)?
    };
    let entries: Vec<serde_json::Value> = data
        .classes
        .iter()
        .map(|c| serde_json::json!({ "size": c.size, "centralizer": c.centralizer }))
        .collect();
    Ok(serde_json::json!({
        "group": data.group_tag,
        "order": data.order,
        "num_classes": data.num_classes(),
        "classes": entries,
    })
    .to_string())
}

/// The multiplicity-formula verification for one (n, q, kind); JSON report.
#[pyfunction]
#[pyo3(signature = (n, q, kind, seed = 0))]
fn verify_main(n: u8, q: u16, kind: &str, seed: u64) -> PyResult<String> {
    let alg = parse_alg(q, kind)?;
    let ctx = DistinctionContext::build(&alg, n, seed, Budgets::default()).map_err(err)?;
    let rep = verify_main_theorem(&ctx).map_err(err)?;
    serde_json::to_string(&rep).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (q, dim = 2, seed = 0))]
fn verify_clifford(q: u16, dim: u8, seed: u64) -> PyResult<String> {
    let field = field_for_q(q).map_err(err)?;
    let budgets = Budgets::default();
    let g = gl_group(&field, dim, budgets.order);
    let s = sl_group(&field, dim, budgets.order);
    let gd = ClassData::enumerate(&g).map_err(err)?;
    let sd = ClassData::enumerate(&s).map_err(err)?;
    let gt = dixon_schneider(&gd, seed, budgets.dixon_order, budgets.dixon_classes).map_err(err)?;
    let st = dixon_schneider(&sd, seed, budgets.dixon_order, budgets.dixon_classes).map_err(err)?;
    let fusion = charmat::classes::fuse(&sd, &gd).map_err(err)?;
    let rep = clifford_impl(&gt, &st, &fusion).map_err(err)?;
    serde_json::to_string(&rep).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, q, kind, seed = 0))]
fn verify_gelfand(n: u8, q: u16, kind: &str, seed: u64) -> PyResult<String> {
    let alg = parse_alg(q, kind)?;
    let ctx = DistinctionContext::build(&alg, n, seed, Budgets::default()).map_err(err)?;
    let rep = gelfand_impl(&ctx).map_err(err)?;
    serde_json::to_string(&rep).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, q, kind, seed = 0))]
fn verify_prasad(n: u8, q: u16, kind: &str, seed: u64) -> PyResult<String> {
    let alg = parse_alg(q, kind)?;
    let ctx = DistinctionContext::build(&alg, n, seed, Budgets::default()).map_err(err)?;
    let rep = prasad_impl(&ctx).map_err(err)?;
    serde_json::to_string(&rep).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, q, kind, seed = 0))]
fn conjecture(n: u8, q: u16, kind: &str, seed: u64) -> PyResult<String> {
    let alg = parse_alg(q, kind)?;
    let ctx = DistinctionContext::build(&alg, n, seed, Budgets::default()).map_err(err)?;
    let rep = conjecture_sweep(&ctx).map_err(err)?;
    serde_json::to_string(&rep).map_err(err)
}

/// Mackey analyses: shape "22" or "13"; JSON report.
#[pyfunction]
#[pyo3(signature = (shape, q, seed = 0))]
fn mackey_verify(shape: &str, q: u16, seed: u64) -> PyResult<String> {
    let budgets = Budgets::default();
    match shape {
        "22" => {
            let ctx = MackeyContext::build(q, seed, budgets).map_err(err)?;
            let oracle = verify_mackey_22(&ctx).map_err(err)?;
            let bound = check_prop_42(&ctx).map_err(err)?;
            Ok(serde_json::json!({
                "oracle_pass": oracle.pass,
                "triples": oracle.triples.len(),
                "multiplicity_bound_pass": bound.pass,
            })
            .to_string())
        }
        "13" => {
            let ctx = P13Context::build(q, seed, budgets).map_err(err)?;
            let rep = check_prop_44(&ctx).map_err(err)?;
            let crosscheck = if q == 2 {
                Some(prop44_direct_crosscheck(2, seed, budgets).map_err(err)?)
            } else {
                None
            };
            Ok(serde_json::json!({
                "vanishing_pass": rep.pass,
                "control_witness": rep.control_witness,
                "direct_crosscheck": crosscheck,
            })
            .to_string())
        }
        other => Err(PyValueError::new_err(format!("shape must be 22 or 13, got {}", other))),
    }
}

/// Orbit sizes and stabilizer orders on the k-subspaces of F_q^4.
#[pyfunction]
fn orbits(k: usize, q: u16) -> PyResult<Vec<(u64, u64)>> {
    let alg = parse_alg(q, "nonsplit")?;
    let h = h_group(&alg, 2, charmat::grp::DEFAULT_ORDER_BUDGET);
    let os = grassmannian_orbits(&h, k).map_err(err)?;
    Ok(os.iter().map(|o| (o.size, o.stabilizer_order)).collect())
}

#[pymodule]
fn charmat_py(_py: Python, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Algebra>()?;
    m.add_class::<CharTable>()?;
    m.add_function(wrap_pyfunction!(character_table, m)?)?;
    m.add_function(wrap_pyfunction!(grp_info, m)?)?;
    m.add_function(wrap_pyfunction!(class_data, m)?)?;
    m.add_function(wrap_pyfunction!(verify_main, m)?)?;
    m.add_function(wrap_pyfunction!(verify_clifford, m)?)?;
    m.add_function(wrap_pyfunction!(verify_gelfand, m)?)?;
    m.add_function(wrap_pyfunction!(verify_prasad, m)?)?;
    m.add_function(wrap_pyfunction!(conjecture, m)?)?;
    m.add_function(wrap_pyfunction!(mackey_verify, m)?)?;
    m.add_function(wrap_pyfunction!(orbits, m)?)?;
    Ok(())
}
