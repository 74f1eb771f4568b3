//! Initial designs for the response surface.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::UpdateError;
use crate::optim::Bounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    LatinHypercube,
    Uniform,
}

/// `n` points in the box drawn with `sampling`, deterministic per seed.
pub fn sample_design(bounds: &Bounds, n: usize, sampling: Sampling, seed: u64) -> Vec<Vec<f64>> {
    match sampling {
        Sampling::LatinHypercube => latin_hypercube(bounds, n, seed),
        Sampling::Uniform => uniform_design(bounds, n, seed),
    }
}

/// Latin hypercube: along every coordinate the `n` values fall in distinct
/// strata of width `range / n`, each uniformly placed within its stratum.
pub fn latin_hypercube(bounds: &Bounds, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![vec![0.0; bounds.dim()]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for i in 0..bounds.dim() {
        strata.shuffle(&mut rng);
        let width = bounds.range(i) / n as f64;
        for (p, &k) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.random();
            // Keep rounding from landing exactly on the next stratum's edge.
            p[i] = (bounds.lower()[i] + (k as f64 + u) * width).min(bounds.lower()[i] + (k + 1) as f64 * width);
        }
    }
    points
}

pub fn uniform_design(bounds: &Bounds, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| bounds.sample_uniform(&mut rng)).collect()
}

/// Writes design points and their costs as comma-separated rows under a header
/// `modulus_0, …, modulus_{d-1}, cost`.
pub fn write_design_csv<W: Write>(points: &[Vec<f64>], costs: &[f64], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let d = points.first().map_or(0, Vec::len);
    let mut header: Vec<String> = (0..d).map(|i| format!("modulus_{i}")).collect();
    header.push("cost".into());
    w.write_record(&header)?;
    for (x, c) in points.iter().zip(costs) {
        w.write_record(x.iter().chain(std::iter::once(c)).map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_design_csv`].
pub fn read_design_csv<R: Read>(input: R) -> Result<(Vec<Vec<f64>>, Vec<f64>), UpdateError> {
    let bad = |m: String| UpdateError::InvalidConfig(format!("samples file: {m}"));
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers().map_err(|e| bad(e.to_string()))?.len();
    if width < 2 {
        return Err(bad("needs at least one parameter column and a cost column".into()));
    }
    let (mut points, mut costs) = (Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
        let (x, c) = row.split_at(width - 1);
        points.push(x.to_vec());
        costs.push(c[0]);
    }
    if points.is_empty() {
        return Err(bad("no rows".into()));
    }
    Ok((points, costs))
}
