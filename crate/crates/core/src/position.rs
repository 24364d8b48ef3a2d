//! Positional predicates and constants of a weighted hypersurface family
//! inside a variety: m-subgeneral position with index, the distributive
//! constant, the weighted subscheme factor, and the hypersurface Seshadri
//! constant.
//!
//! All ratios are exact rationals. The weighted factor ranges over
//! intersections of subsets of the family; restricting the maximum to such
//! subsets loses nothing, since any closed subset contained in several
//! hypersurfaces is contained in their intersection and the ratio only
//! improves there. For a subset Γ the containment test `W_Γ ⊆ Supp D_i` is
//! radical membership of `Q_i` in `I(V) + (Q_j : j ∈ Γ)`: supports are
//! reduced, so `x0^2` does contain the line `x0 = 0`.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::ideals::{
    groebner, member, proj_dim_of_basis, radical_member, Codim, GroebnerBasis, Ideal, Limits,
    ProjDim,
};
use crate::places::Rational;
use crate::polynomials::HomPoly;

/// A variety together with q instantiated hypersurfaces and nonnegative
/// weights, the common input of every position computation.
#[derive(Debug)]
pub struct WeightedConfiguration {
    variety: Ideal,
    variety_basis: GroebnerBasis,
    dim: u32,
    hypersurfaces: Vec<HomPoly>,
    weights: Vec<Rational>,
    /// Projective dimensions of V + (Q_j : j in Γ), keyed by sorted Γ.
    dim_cache: Mutex<HashMap<Vec<usize>, ProjDim>>,
}

impl WeightedConfiguration {
    /// Validate and pre-compute the variety basis. Rejects empty varieties,
    /// mismatched lengths, negative weights, and hypersurfaces lying in the
    /// variety ideal.
    pub fn new(
        variety: Ideal,
        hypersurfaces: Vec<HomPoly>,
        weights: Vec<Rational>,
        limits: &Limits,
    ) -> Result<WeightedConfiguration> {
        if hypersurfaces.is_empty() {
            return Err(Error::InvalidInput("no hypersurfaces given".into()));
        }
        if hypersurfaces.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} hypersurfaces but {} weights",
                hypersurfaces.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::InvalidInput(format!("negative weight {w}")));
        }
        for q in &hypersurfaces {
            if q.num_vars() != variety.num_vars() {
                return Err(Error::DimensionMismatch {
                    expected: variety.num_vars(),
                    found: q.num_vars(),
                });
            }
        }
        let variety_basis = groebner(&variety, limits)?;
        let dim = proj_dim_of_basis(&variety_basis);
        if dim.is_empty() {
            return Err(Error::EmptyScheme);
        }
        for (i, q) in hypersurfaces.iter().enumerate() {
            if member(q, &variety_basis)? {
                return Err(Error::ContainsVariety { index: i + 1 });
            }
        }
        Ok(WeightedConfiguration {
            variety,
            variety_basis,
            dim: dim.0 as u32,
            hypersurfaces,
            weights,
            dim_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn variety(&self) -> &Ideal {
        &self.variety
    }

    /// The precomputed reduced basis of the variety ideal.
    pub fn variety_basis(&self) -> &GroebnerBasis {
        &self.variety_basis
    }

    /// Dimension n of the variety.
    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn hypersurfaces(&self) -> &[HomPoly] {
        &self.hypersurfaces
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    fn len(&self) -> usize {
        self.hypersurfaces.len()
    }

    fn subset_polys(&self, subset: &[usize]) -> Vec<HomPoly> {
        subset
            .iter()
            .map(|&i| self.hypersurfaces[i].clone())
            .collect()
    }

    /// Codimension inside V of the intersection cut out by the subset
    /// (0-based indices), memoized per subset.
    fn subset_codim(&self, subset: &[usize], limits: &Limits) -> Result<Codim> {
        let key = subset.to_vec();
        if let Some(dim_w) = self.dim_cache.lock().expect("cache poisoned").get(&key) {
            return Ok(self.codim_from_dim(*dim_w));
        }
        let ideal = self.variety.with_extra(&self.subset_polys(subset))?;
        let gb = groebner(&ideal, limits)?;
        let dim_w = proj_dim_of_basis(&gb);
        self.dim_cache
            .lock()
            .expect("cache poisoned")
            .insert(key, dim_w);
        Ok(self.codim_from_dim(dim_w))
    }

    fn codim_from_dim(&self, dim_w: ProjDim) -> Codim {
        if dim_w.is_empty() {
            Codim::Infinite
        } else {
            Codim::Finite(self.dim - dim_w.0 as u32)
        }
    }

    /// All nonempty subsets of {0..q-1} with at most `max_size` elements,
    /// ordered by size then lexicographically.
    fn subsets(&self, max_size: usize, limits: &Limits) -> Result<Vec<Vec<usize>>> {
        let q = self.len();
        if q > limits.max_hypersurfaces {
            return Err(Error::ResourceLimit(format!(
                "{} hypersurfaces exceed the subset-enumeration cap {}",
                q, limits.max_hypersurfaces
            )));
        }
        let mut out = Vec::new();
        for size in 1..=max_size.min(q) {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                out.push(idx.clone());
                // Rightmost position that can still advance.
                let mut i = size;
                while i > 0 && idx[i - 1] == q - size + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                idx[i - 1] += 1;
                for j in i..size {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        Ok(out)
    }
}

/// Outcome of a positional predicate; on failure carries the first
/// violating subset in 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionCheck {
    pub holds: bool,
    pub violating_subset: Option<Vec<usize>>,
}

/// Witness for the weighted factor: the subset realizing the maximal ratio,
/// reported 1-based, with its codimension, total contained weight, and the
/// ratio itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubschemeWitness {
    pub subset: Vec<usize>,
    pub codim: Codim,
    pub alpha_value: Rational,
    pub ratio: Rational,
}

fn one_based(subset: &[usize]) -> Vec<usize> {
    subset.iter().map(|i| i + 1).collect()
}

/// m-subgeneral position: every subset Γ with #Γ <= m+1 satisfies
/// `codim(∩_{i∈Γ} D_i ∩ V) >= dim V - (m - #Γ)`.
pub fn check_subgeneral(
    cfg: &WeightedConfiguration,
    m: u32,
    limits: &Limits,
) -> Result<PositionCheck> {
    if (m as i64) < cfg.dim() as i64 {
        return Err(Error::InvalidInput(format!(
            "m = {m} must be at least dim V = {}",
            cfg.dim()
        )));
    }
    for subset in cfg.subsets(m as usize + 1, limits)? {
        let bound = cfg.dim() as i64 - (m as i64 - subset.len() as i64);
        if !cfg.subset_codim(&subset, limits)?.at_least(bound) {
            return Ok(PositionCheck {
                holds: false,
                violating_subset: Some(one_based(&subset)),
            });
        }
    }
    Ok(PositionCheck {
        holds: true,
        violating_subset: None,
    })
}

/// The index-κ refinement: every subset Γ with #Γ <= κ satisfies
/// `codim(∩_{i∈Γ} D_i ∩ V) >= #Γ`.
pub fn check_index(
    cfg: &WeightedConfiguration,
    kappa: u32,
    limits: &Limits,
) -> Result<PositionCheck> {
    if kappa == 0 || kappa > cfg.dim() {
        return Err(Error::InvalidInput(format!(
            "index must satisfy 1 <= kappa <= dim V = {}",
            cfg.dim()
        )));
    }
    for subset in cfg.subsets(kappa as usize, limits)? {
        if !cfg
            .subset_codim(&subset, limits)?
            .at_least(subset.len() as i64)
        {
            return Ok(PositionCheck {
                holds: false,
                violating_subset: Some(one_based(&subset)),
            });
        }
    }
    Ok(PositionCheck {
        holds: true,
        violating_subset: None,
    })
}

/// The distributive constant: `max(1, max_Γ #Γ / codim(∩_{j∈Γ} D_j ∩ V))`
/// over all nonempty subsets, with ratio 0 for empty intersections.
pub fn distributive_constant(cfg: &WeightedConfiguration, limits: &Limits) -> Result<Rational> {
    let mut best = Rational::one();
    for subset in cfg.subsets(cfg.len(), limits)? {
        if let Codim::Finite(c) = cfg.subset_codim(&subset, limits)? {
            if c == 0 {
                continue;
            }
            let ratio = Rational::new((subset.len() as i64).into(), (c as i64).into());
            if ratio > best {
                best = ratio;
            }
        }
    }
    Ok(best)
}

/// The weighted subscheme factor `max_W α(W) / codim W` over nonempty
/// proper intersections `W = ∩_{j∈Γ} D_j ∩ V`, where `α(W)` sums the
/// weights of every hypersurface whose support contains W.
pub fn weighted_factor(
    cfg: &WeightedConfiguration,
    limits: &Limits,
) -> Result<(Rational, SubschemeWitness)> {
    if cfg.weights.iter().all(Rational::is_zero) {
        return Err(Error::AllWeightsZero);
    }
    let mut best: Option<SubschemeWitness> = None;
    for subset in cfg.subsets(cfg.len(), limits)? {
        let codim = cfg.subset_codim(&subset, limits)?;
        let c = match codim {
            Codim::Infinite => continue,  // empty W contributes nothing
            Codim::Finite(0) => continue, // not a proper subset of V
            Codim::Finite(c) => c,
        };
        let ideal = cfg.variety.with_extra(&cfg.subset_polys(&subset))?;
        let mut alpha = Rational::zero();
        for i in 0..cfg.len() {
            let contained =
                subset.contains(&i) || radical_member(&cfg.hypersurfaces[i], &ideal, limits)?;
            if contained {
                alpha += &cfg.weights[i];
            }
        }
        let ratio = &alpha / Rational::from_integer((c as i64).into());
        let better = match &best {
            None => true,
            Some(b) => ratio > b.ratio,
        };
        if better {
            best = Some(SubschemeWitness {
                subset: one_based(&subset),
                codim,
                alpha_value: alpha,
                ratio,
            });
        }
    }
    let witness = best.ok_or_else(|| {
        Error::InvalidInput("every subset intersection is empty or improper".into())
    })?;
    Ok((witness.ratio.clone(), witness))
}

/// Seshadri constant of a degree-d hypersurface against a hyperplane: 1/d.
pub fn seshadri_hypersurface(d: u32) -> Result<Rational> {
    if d == 0 {
        return Err(Error::InvalidInput("degree must be positive".into()));
    }
    Ok(Rational::new(1.into(), (d as i64).into()))
}
