//! Exact simulation from the frailty representation.
//!
//! Every draw owns a ChaCha stream selected by its row index under the root
//! seed, so a batch is identical however rayon splits the work.
//!
//! Default times use the exponential-barrier construction with linear
//! intensities. The uniform-barrier variant is the same law after the map
//! `u = e^{−θ}` and is not implemented separately.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FactorKind, MrfModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Uniforms,
    DefaultTimes,
}

/// Row-major `rows × cols` block of draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub kind: SampleKind,
    pub seed: u64,
    pub model_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMetadata {
    pub seed: u64,
    pub count: usize,
    pub kind: SampleKind,
    pub model_hash: String,
}

/// RNG for draw `index` under `seed`.
pub(crate) fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One `Gamma(ξ_j, 1)` law per factor.
pub(crate) fn factor_laws(model: &MrfModel) -> Vec<Gamma<f64>> {
    model
        .factors()
        .iter()
        .map(|f| Gamma::new(f.shape, 1.0).expect("shapes validated at model construction"))
        .collect()
}

/// Frailty draws for the factors that load at least one component; idle
/// factors stay at zero and consume no randomness.
pub(crate) fn draw_frailties<R: Rng>(model: &MrfModel, laws: &[Gamma<f64>], rng: &mut R, out: &mut [f64]) {
    for (j, law) in laws.iter().enumerate() {
        out[j] = if model.rc(j).is_empty() { 0.0 } else { law.sample(rng) };
    }
}

fn psi(shape: f64, t: f64) -> f64 {
    (-shape * t.ln_1p()).exp()
}

fn generate<F>(model: &MrfModel, count: usize, seed: u64, kind: SampleKind, fill: F) -> Result<SampleBatch>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64], &mut [f64]) + Sync,
{
    if count == 0 {
        return Err(Error::ZeroCount);
    }
    let n = model.dim();
    let m = model.factor_count();
    let mut values = vec![0.0; count * n];
    values
        .par_chunks_mut(n)
        .enumerate()
        .for_each_init(
            || vec![0.0; m],
            |lambda, (row, out)| {
                let mut rng = draw_rng(seed, row as u64);
                fill(&mut rng, lambda, out);
            },
        );
    Ok(SampleBatch {
        values,
        rows: count,
        cols: n,
        kind,
        seed,
        model_hash: model.digest(),
    })
}

/// Draws `count` vectors from the copula.
///
/// Per draw: `Λ_j ~ Gamma(ξ_j, 1)` for each factor, one shared `Exp(1)` per
/// comonotone factor and one `Exp(1)` per (component, independent factor)
/// pair; `U_i = ψ_i(min_j E_{ij}/Λ_j)` with `ψ_i(t) = (1+t)^{−ξ_{c,i}}`.
pub fn sample_copula(model: &MrfModel, count: usize, seed: u64) -> Result<SampleBatch> {
    let laws = factor_laws(model);
    let n = model.dim();
    let m = model.factor_count();
    generate(model, count, seed, SampleKind::Uniforms, |rng, lambda, out| {
        draw_frailties(model, &laws, rng, lambda);
        let mut first = vec![f64::INFINITY; n];
        for j in 0..m {
            let members = model.rc(j);
            if members.is_empty() {
                continue;
            }
            match model.factor(j).kind {
                FactorKind::Comonotone => {
                    let e: f64 = rng.sample(Exp1);
                    let t = e / lambda[j];
                    for &i in members {
                        first[i] = first[i].min(t);
                    }
                }
                FactorKind::Independent => {
                    for &i in members {
                        let e: f64 = rng.sample(Exp1);
                        first[i] = first[i].min(e / lambda[j]);
                    }
                }
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = psi(model.agg_shape(i), first[i]);
        }
    })
}

/// Draws `count` vectors of default times
/// `τ_i = min(min_{comonotone j} E_j/Λ_j, E_i / Σ_{independent j} Λ_j)`.
pub fn sample_default_times(model: &MrfModel, count: usize, seed: u64) -> Result<SampleBatch> {
    let laws = factor_laws(model);
    let m = model.factor_count();
    generate(model, count, seed, SampleKind::DefaultTimes, |rng, lambda, out| {
        draw_frailties(model, &laws, rng, lambda);
        out.fill(f64::INFINITY);
        for j in 0..m {
            let members = model.rc(j);
            if members.is_empty() || model.factor(j).kind != FactorKind::Comonotone {
                continue;
            }
            let e: f64 = rng.sample(Exp1);
            let t = e / lambda[j];
            for &i in members {
                out[i] = out[i].min(t);
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            let intensity: f64 = model.rf_independent(i).iter().map(|&j| lambda[j]).sum();
            if intensity > 0.0 {
                let e: f64 = rng.sample(Exp1);
                *o = o.min(e / intensity);
            }
        }
    })
}

impl SampleBatch {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(c).step_by(self.cols).copied()
    }

    /// Maps default times through the marginal survival functions.
    pub fn to_uniforms(&self, model: &MrfModel) -> Result<SampleBatch> {
        if self.cols != model.dim() {
            return Err(Error::DimensionMismatch {
                what: "batch columns",
                expected: model.dim(),
                found: self.cols,
            });
        }
        if self.kind == SampleKind::Uniforms {
            return Ok(self.clone());
        }
        let shapes = model.agg_shapes();
        let values = self
            .values
            .par_chunks(self.cols)
            .flat_map_iter(|row| row.iter().zip(shapes).map(|(&t, &xi)| psi(xi, t)))
            .collect();
        Ok(SampleBatch {
            values,
            kind: SampleKind::Uniforms,
            ..self.clone()
        })
    }

    pub fn metadata(&self) -> BatchMetadata {
        BatchMetadata {
            seed: self.seed,
            count: self.rows,
            kind: self.kind,
            model_hash: self.model_hash.clone(),
        }
    }

    /// CSV with header `comp_1,…,comp_n` and 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.cols).map(|i| format!("comp_{i}")).collect();
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for r in 0..self.rows {
            line.clear();
            for (c, v) in self.row(r).iter().enumerate() {
                if c > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{v:.16e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Fraction of rows lying componentwise at or below `point`.
pub fn empirical_copula(batch: &SampleBatch, point: &[f64]) -> Result<f64> {
    if batch.rows == 0 {
        return Err(Error::EmptyBatch);
    }
    if point.len() != batch.cols {
        return Err(Error::DimensionMismatch {
            what: "copula point",
            expected: batch.cols,
            found: point.len(),
        });
    }
    let hits = batch
        .values
        .par_chunks(batch.cols)
        .filter(|row| row.iter().zip(point).all(|(x, p)| x <= p))
        .count();
    Ok(hits as f64 / batch.rows as f64)
}

/// Bivariate empirical copula of columns `(i, k)` on the product grid
/// `grid × grid` (ascending), as a row-major `g × g` table.
pub fn empirical_copula_grid(batch: &SampleBatch, i: usize, k: usize, grid: &[f64]) -> Result<Vec<f64>> {
    if batch.rows == 0 {
        return Err(Error::EmptyBatch);
    }
    for idx in [i, k] {
        if idx >= batch.cols {
            return Err(Error::IndexOutOfRange {
                index: idx,
                len: batch.cols,
            });
        }
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::DegenerateGrid("grid must be ascending".into()));
    }
    let g = grid.len();
    // bin b(x) = first grid index with x ≤ grid[b]; g means above every grid point
    let bin = |x: f64| grid.partition_point(|&p| p < x);
    let mut counts = vec![0u64; (g + 1) * (g + 1)];
    for r in 0..batch.rows {
        let row = batch.row(r);
        counts[bin(row[i]) * (g + 1) + bin(row[k])] += 1;
    }
    let mut table = vec![0.0; g * g];
    let mut cum = vec![0u64; (g + 1) * (g + 1)];
    for a in 0..=g {
        for b in 0..=g {
            let mut c = counts[a * (g + 1) + b];
            if a > 0 {
                c += cum[(a - 1) * (g + 1) + b];
            }
            if b > 0 {
                c += cum[a * (g + 1) + b - 1];
            }
            if a > 0 && b > 0 {
                c -= cum[(a - 1) * (g + 1) + b - 1];
            }
            cum[a * (g + 1) + b] = c;
            if a < g && b < g {
                table[a * g + b] = c as f64 / batch.rows as f64;
            }
        }
    }
    Ok(table)
}
