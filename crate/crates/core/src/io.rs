//! File formats: matrices and systems as JSON, trajectories as CSV.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces every `f64` bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::descriptor::{DescriptorSystem, Trajectory};
use crate::error::{input_err, Result};
use crate::linalg::{Matrix, Vector};
use crate::ocp::{OcpSolution, Qp};

/// `{"rows": r, "cols": c, "data": [row-major entries]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&Matrix> for MatrixJson {
    fn from(m: &Matrix) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
            .collect();
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = crate::Error;

    fn try_from(m: MatrixJson) -> Result<Matrix> {
        if m.data.len() != m.rows * m.cols {
            return input_err(format!(
                "matrix declares {}x{} but carries {} entries",
                m.rows,
                m.cols,
                m.data.len()
            ));
        }
        Ok(Matrix::from_row_slice(m.rows, m.cols, &m.data))
    }
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    serde_json::to_value(MatrixJson::from(m)).expect("plain data serializes")
}

pub fn matrix_from_json(v: &Value) -> Result<Matrix> {
    let m: MatrixJson = serde_json::from_value(v.clone())?;
    m.try_into()
}

pub fn vector_to_json(v: &Vector) -> Value {
    json!(v.as_slice())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct SystemJson {
    E: MatrixJson,
    A: MatrixJson,
    B: MatrixJson,
    C: MatrixJson,
    D: MatrixJson,
}

pub fn system_to_json(sys: &DescriptorSystem) -> Value {
    serde_json::to_value(SystemJson {
        E: sys.e().into(),
        A: sys.a().into(),
        B: sys.b().into(),
        C: sys.c().into(),
        D: sys.d().into(),
    })
    .expect("plain data serializes")
}

pub fn system_from_json(v: &Value) -> Result<DescriptorSystem> {
    let s: SystemJson = serde_json::from_value(v.clone())?;
    DescriptorSystem::new(
        s.E.try_into()?,
        s.A.try_into()?,
        s.B.try_into()?,
        s.C.try_into()?,
        s.D.try_into()?,
    )
}

pub fn read_system(path: &Path) -> Result<DescriptorSystem> {
    let v: Value = serde_json::from_reader(File::open(path)?)?;
    system_from_json(&v)
}

pub fn write_system(path: &Path, sys: &DescriptorSystem) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &system_to_json(sys))?;
    writeln!(f)?;
    Ok(())
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// `t,u_0..u_{m−1},y_0..y_{p−1}`, one row per sample.
pub fn write_trajectory_csv<W: Write>(writer: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend((0..traj.m()).map(|i| format!("u_{i}")));
    header.extend((0..traj.p()).map(|j| format!("y_{j}")));
    w.write_record(&header)?;
    for k in 0..traj.len() {
        let mut row = vec![(traj.start() + k as i64).to_string()];
        row.extend(traj.inputs().column(k).iter().map(|&x| fmt_f64(x)));
        row.extend(traj.outputs().column(k).iter().map(|&x| fmt_f64(x)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses the format of [`write_trajectory_csv`]. Time stamps must be
/// consecutive integers.
pub fn read_trajectory_csv<R: Read>(reader: R) -> Result<Trajectory> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.get(0) != Some("t") {
        return input_err("first CSV column must be `t`");
    }
    let m = header.iter().filter(|h| h.starts_with("u_")).count();
    let p = header.iter().filter(|h| h.starts_with("y_")).count();
    if m == 0 || p == 0 || header.len() != 1 + m + p {
        return input_err(format!("unexpected trajectory header: {:?}", header));
    }
    let mut start = None;
    let mut samples: Vec<f64> = Vec::new();
    let mut len = 0usize;
    for record in r.records() {
        let record = record?;
        let t: i64 = record[0]
            .trim()
            .parse()
            .map_err(|_| crate::Error::Input(format!("bad time stamp `{}`", &record[0])))?;
        let first = *start.get_or_insert(t);
        if t != first + len as i64 {
            return input_err(format!("time stamps must be consecutive, found {t}"));
        }
        for field in record.iter().skip(1) {
            samples.push(
                field
                    .trim()
                    .parse()
                    .map_err(|_| crate::Error::Input(format!("bad number `{field}`")))?,
            );
        }
        len += 1;
    }
    let Some(start) = start else {
        return input_err("trajectory file has no rows");
    };
    let all = Matrix::from_column_slice(m + p, len, &samples);
    Trajectory::new(
        start,
        all.rows(0, m).into_owned(),
        all.rows(m, p).into_owned(),
    )
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    read_trajectory_csv(File::open(path)?)
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    write_trajectory_csv(File::create(path)?, traj)
}

/// Debug dump of an assembled problem and its solution.
pub fn ocp_dump(qp: &Qp, sol: &OcpSolution) -> Value {
    json!({
        "hessian": matrix_to_json(&qp.hessian),
        "gradient": vector_to_json(&qp.gradient),
        "constant": qp.constant,
        "constraints": matrix_to_json(&qp.constraints),
        "rhs": vector_to_json(&qp.rhs),
        "trajectory_map": matrix_to_json(&qp.trajectory_map),
        "solution": ocp_solution_to_json(sol),
    })
}

pub fn ocp_solution_to_json(sol: &OcpSolution) -> Value {
    json!({
        "start": sol.start,
        "u_hat": matrix_to_json(&sol.u_hat),
        "y_hat": matrix_to_json(&sol.y_hat),
        "alpha": vector_to_json(&sol.alpha),
        "cost": sol.cost,
        "kkt_residual": sol.kkt_residual,
        "constraint_violation": sol.constraint_violation,
        "feasible": sol.feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn matrix_json_is_row_major() {
        let m = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let v = matrix_to_json(&m);
        assert_eq!(v["data"], json!([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]));
        assert_eq!(matrix_from_json(&v).unwrap(), m);
        let bad = json!({"rows": 2, "cols": 2, "data": [1.0]});
        assert!(matrix_from_json(&bad).is_err());
    }

    #[test]
    fn system_round_trip() {
        let sys = presets::example_system();
        assert_eq!(system_from_json(&system_to_json(&sys)).unwrap(), sys);
    }

    #[test]
    fn trajectory_csv_round_trip_is_exact() {
        let u = Matrix::from_row_slice(1, 3, &[0.1, -1.0 / 3.0, 1e-300]);
        let y = Matrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, std::f64::consts::PI, 5.5, -6.0]);
        let traj = Trajectory::new(-2, u, y).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,u_0,y_0,y_1\n-2,"));
        assert_eq!(read_trajectory_csv(buf.as_slice()).unwrap(), traj);
    }

    #[test]
    fn gaps_in_time_are_rejected() {
        let text = "t,u_0,y_0\n0,1,2\n2,3,4\n";
        assert!(read_trajectory_csv(text.as_bytes()).is_err());
    }
}
