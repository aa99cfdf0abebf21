//! Algebraic curvature tensors in an orthonormal frame at a point.
//!
//! Components are stored densely (`n⁴` entries). The artifact works with
//! `n ≤ 8`, where exhaustive index sweeps are cheap.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension accepted for dense storage.
pub const MAX_DIM: usize = 8;

/// Symmetric 2-tensor, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricTensor {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymmetricTensor {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} entries for a {n}×{n} tensor",
                data.len()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::invalid("2-tensor is not symmetric"));
                }
            }
        }
        Ok(SymmetricTensor { n, data })
    }

    pub fn identity(n: usize) -> Self {
        Self::block_identity(n, 0..n)
    }

    /// Identity on the coordinates in `range`, zero elsewhere.
    pub fn block_identity(n: usize, range: core::ops::Range<usize>) -> Self {
        let mut data = vec![0.0; n * n];
        for i in range {
            data[i * n + i] = 1.0;
        }
        SymmetricTensor { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymmetricTensor {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch("2-tensors of different dimension".into()));
        }
        Ok(SymmetricTensor {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }
}

/// Rank-4 tensor `W_{ijkl}` meant to carry the symmetries of a curvature tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureTensor {
    pub n: usize,
    data: Vec<f64>,
}

/// Largest violation of each algebraic identity found by an index sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryDefects {
    /// `|W_{ijkl} + W_{jikl}|`
    pub first_pair: f64,
    /// `|W_{ijkl} + W_{ijlk}|`
    pub second_pair: f64,
    /// `|W_{ijkl} - W_{klij}|`
    pub pair_exchange: f64,
    /// `|W_{ijkl} + W_{jkil} + W_{kijl}|`
    pub bianchi: f64,
    /// `|Σᵢ W_{ijil}|`
    pub trace: f64,
}

impl SymmetryDefects {
    /// Largest defect apart from the trace.
    pub fn curvature_max(&self) -> f64 {
        self.first_pair
            .max(self.second_pair)
            .max(self.pair_exchange)
            .max(self.bianchi)
    }
}

impl CurvatureTensor {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::invalid(alloc::format!(
                "dense curvature storage supports 1 ≤ n ≤ {MAX_DIM} (got {n})"
            )));
        }
        Ok(CurvatureTensor {
            n,
            data: vec![0.0; n * n * n * n],
        })
    }

    pub fn from_fn<F: FnMut(usize, usize, usize, usize) -> f64>(n: usize, mut f: F) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let idx = t.index(i, j, k, l);
                        t.data[idx] = f(i, j, k, l);
                    }
                }
            }
        }
        Ok(t)
    }

    /// Rebuild from a component list `(i, j, k, l, value)`; omitted entries are zero.
    pub fn from_components(n: usize, entries: &[([usize; 4], f64)]) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        for &([i, j, k, l], v) in entries {
            if [i, j, k, l].iter().any(|&a| a >= n) {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "index ({i},{j},{k},{l}) out of range for n = {n}"
                )));
            }
            let idx = t.index(i, j, k, l);
            t.data[idx] = v;
        }
        Ok(t)
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.index(i, j, k, l)]
    }

    /// Nonzero components, in lexicographic index order.
    pub fn components(&self) -> Vec<([usize; 4], f64)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.get(i, j, k, l);
                        if v != 0.0 {
                            out.push(([i, j, k, l], v));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn linear_combination(terms: &[(f64, &CurvatureTensor)]) -> Result<Self> {
        let n = terms
            .first()
            .map(|t| t.1.n)
            .ok_or_else(|| Error::invalid("empty combination"))?;
        let mut out = Self::zeros(n)?;
        for (c, t) in terms {
            if t.n != n {
                return Err(Error::DimensionMismatch("tensors of different dimension".into()));
            }
            for (o, v) in out.data.iter_mut().zip(&t.data) {
                *o += c * v;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &CurvatureTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `Ric_{jl} = Σᵢ W_{ijil}`.
    pub fn ricci(&self) -> SymmetricTensor {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for j in 0..n {
            for l in 0..n {
                data[j * n + l] = (0..n).map(|i| self.get(i, j, i, l)).sum();
            }
        }
        SymmetricTensor { n, data }
    }

    pub fn scalar(&self) -> f64 {
        let r = self.ricci();
        (0..self.n).map(|i| r.get(i, i)).sum()
    }

    /// Exhaustive sweep of the curvature identities and the trace.
    pub fn symmetry_defects(&self) -> SymmetryDefects {
        let n = self.n;
        let mut d = SymmetryDefects {
            first_pair: 0.0,
            second_pair: 0.0,
            pair_exchange: 0.0,
            bianchi: 0.0,
            trace: 0.0,
        };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let w = self.get(i, j, k, l);
                        d.first_pair = d.first_pair.max((w + self.get(j, i, k, l)).abs());
                        d.second_pair = d.second_pair.max((w + self.get(i, j, l, k)).abs());
                        d.pair_exchange = d.pair_exchange.max((w - self.get(k, l, i, j)).abs());
                        d.bianchi = d
                            .bianchi
                            .max((w + self.get(j, k, i, l) + self.get(k, i, j, l)).abs());
                    }
                }
            }
        }
        let ric = self.ricci();
        d.trace = ric.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        d
    }
}

/// `(T⊙S)_{ijkl} = T_{ik}S_{jl} - T_{il}S_{jk} + T_{jl}S_{ik} - T_{jk}S_{il}`.
pub fn kulkarni_nomizu(t: &SymmetricTensor, s: &SymmetricTensor) -> Result<CurvatureTensor> {
    if t.n != s.n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "Kulkarni–Nomizu product of {}- and {}-dimensional tensors",
            t.n,
            s.n
        )));
    }
    CurvatureTensor::from_fn(t.n, |i, j, k, l| {
        t.get(i, k) * s.get(j, l) - t.get(i, l) * s.get(j, k) + t.get(j, l) * s.get(i, k)
            - t.get(j, k) * s.get(i, l)
    })
}

/// Weyl tensor with a note when the dimension makes it vanish identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylOutput {
    pub tensor: CurvatureTensor,
    pub note: Option<String>,
}

/// `W = Rm - Ric⊙g/(n-2) + S g⊙g/(2(n-1)(n-2))` in an orthonormal frame.
pub fn weyl_from_decomposition(
    rm: &CurvatureTensor,
    ric: &SymmetricTensor,
    scalar: f64,
    n: usize,
) -> Result<WeylOutput> {
    if rm.n != n || ric.n != n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "curvature data of dimension {}/{} for n = {n}",
            rm.n,
            ric.n
        )));
    }
    if n <= 3 {
        return Ok(WeylOutput {
            tensor: CurvatureTensor::zeros(n)?,
            note: Some(alloc::format!("the Weyl tensor vanishes identically in dimension {n}")),
        });
    }
    let g = SymmetricTensor::identity(n);
    let nf = n as f64;
    let ric_g = kulkarni_nomizu(ric, &g)?;
    let g_g = kulkarni_nomizu(&g, &g)?;
    let tensor = CurvatureTensor::linear_combination(&[
        (1.0, rm),
        (-1.0 / (nf - 2.0), &ric_g),
        (scalar / (2.0 * (nf - 1.0) * (nf - 2.0)), &g_g),
    ])?;
    Ok(WeylOutput { tensor, note: None })
}

/// Weyl tensor of the product of unit spheres `S^p × S^q`, in block form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductSphereWeyl {
    pub p: usize,
    pub q: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl ProductSphereWeyl {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p < 2 || q < 2 {
            return Err(Error::invalid(alloc::format!(
                "product-sphere factors need dimension ≥ 2 (got {p}, {q})"
            )));
        }
        let n = (p + q) as f64;
        let d = (n - 1.0) * (n - 2.0);
        let (pf, qf) = (p as f64, q as f64);
        Ok(ProductSphereWeyl {
            p,
            q,
            c1: 2.0 * qf * (qf - 1.0) / d,
            c2: 2.0 * pf * (pf - 1.0) / d,
            c3: 2.0 * (pf - 1.0) * (qf - 1.0) / d,
        })
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    /// Component from the block description: `C1(δδ - δδ)` on the first
    /// factor, `C2(δδ - δδ)` on the second, `W_{iαjβ} = -C3 δᵢⱼ δ_{αβ}` mixed.
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let first = |a: usize| a < self.p;
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let blocks = [first(i), first(j), first(k), first(l)];
        match blocks {
            [true, true, true, true] => self.c1 * (d(i, k) * d(j, l) - d(i, l) * d(j, k)),
            [false, false, false, false] => self.c2 * (d(i, k) * d(j, l) - d(i, l) * d(j, k)),
            // (i α j β) and (α i β j)
            [true, false, true, false] | [false, true, false, true] => {
                -self.c3 * d(i, k) * d(j, l)
            }
            // (i α β j) and (α i j β)
            [true, false, false, true] | [false, true, true, false] => {
                self.c3 * d(i, l) * d(j, k)
            }
            _ => 0.0,
        }
    }

    pub fn materialize(&self) -> Result<CurvatureTensor> {
        CurvatureTensor::from_fn(self.n(), |i, j, k, l| self.component(i, j, k, l))
    }

    /// The same tensor with the factors exchanged.
    pub fn swapped(&self) -> Self {
        ProductSphereWeyl {
            p: self.q,
            q: self.p,
            c1: self.c2,
            c2: self.c1,
            c3: self.c3,
        }
    }

    /// Riemann tensor, Ricci tensor and scalar curvature of `S^p × S^q`.
    pub fn product_curvature(p: usize, q: usize) -> Result<(CurvatureTensor, SymmetricTensor, f64)> {
        let n = p + q;
        let gp = SymmetricTensor::block_identity(n, 0..p);
        let gq = SymmetricTensor::block_identity(n, p..n);
        let rm = CurvatureTensor::linear_combination(&[
            (0.5, &kulkarni_nomizu(&gp, &gp)?),
            (0.5, &kulkarni_nomizu(&gq, &gq)?),
        ])?;
        let ric = gp.scaled((p - 1) as f64).add(&gq.scaled((q - 1) as f64))?;
        let scalar = (p * (p - 1) + q * (q - 1)) as f64;
        Ok((rm, ric, scalar))
    }
}
