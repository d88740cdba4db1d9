use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::{compose, construct_latency_optimal_pow2, serial_positions, Part, SynthesisError};
use crate::dp::{classify, Case, PhiEtaTables};
use crate::structure::{two_input, Rule, Structure};
use crate::ttree::construct_complexity_optimal;

/// Audit record of how a structure was assembled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub n: usize,
    pub tau: usize,
    pub case: Case,
    pub complexity: usize,
    pub latency: usize,
    pub pi: usize,
    /// Base structure of a composition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<Manifest>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<PartManifest>,
    /// Base inputs left as inputs of the composed structure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unconsumed_inputs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartManifest {
    #[serde(flatten)]
    pub manifest: Manifest,
    /// The joined complement pair, as node ids of the part's serialized form.
    pub pair: [usize; 2],
}

impl Manifest {
    /// JSON with object keys sorted.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("manifest is plain data");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }
}

/// A synthesized structure with its manifest.
#[derive(Clone, Debug)]
pub struct Synthesized {
    pub structure: Structure,
    pub manifest: Manifest,
}

/// Builds `S_{n,τ}` by the five-case dispatch, memoizing every `(n, τ)` it visits.
pub struct Synthesizer<'t> {
    tables: &'t PhiEtaTables,
    memo: HashMap<(usize, usize), Arc<Synthesized>>,
}

impl<'t> Synthesizer<'t> {
    pub fn new(tables: &'t PhiEtaTables) -> Self {
        Synthesizer { tables, memo: HashMap::new() }
    }

    /// Structure on `n` inputs with latency at most `τ` and complexity `φ(n, τ)`.
    pub fn build(&mut self, n: usize, tau: usize) -> Result<Arc<Synthesized>, SynthesisError> {
        if n < 2 {
            return Err(SynthesisError::TooFewInputs { n, min: 2 });
        }
        if let Some(hit) = self.memo.get(&(n, tau)) {
            return Ok(Arc::clone(hit));
        }
        let case = classify(n, tau);
        let mut manifest_base = None;
        let mut manifest_parts = Vec::new();
        let mut unconsumed = None;
        let structure = match case {
            Case::E1 => two_input(),
            Case::E2 => construct_complexity_optimal(n).expect("n >= 3 in case E2"),
            Case::E3 => return Err(SynthesisError::Infeasible { n, tau }),
            Case::E4 => construct_latency_optimal_pow2(n)?,
            Case::E5 => {
                if n > self.tables.n_max() || tau > self.tables.tau_cap() {
                    return Err(SynthesisError::Tables { n, tau, case });
                }
                let d = self.tables.traceback(n, tau)?;
                let base = self.build(d.n0, d.tau0)?;
                let parts: Vec<Arc<Synthesized>> = d
                    .sizes
                    .iter()
                    .zip(&d.taus)
                    .map(|(&k, &t)| self.build(k, t))
                    .collect::<Result<_, _>>()?;
                let joins: Vec<Part<'_>> = parts.iter().map(|p| Part::new(&p.structure)).collect();
                let composed = compose(&base.structure, &joins)?;
                manifest_base = Some(Box::new(base.manifest.clone()));
                for (part, join) in parts.iter().zip(&joins) {
                    let pos = serial_positions(&part.structure);
                    let (a, b) = (pos[join.pair.0 .0], pos[join.pair.1 .0]);
                    manifest_parts.push(PartManifest { manifest: part.manifest.clone(), pair: [a.min(b), a.max(b)] });
                }
                unconsumed = Some(d.n0 - d.m());
                if composed.validate().has(Rule::DuplicateSubtree) {
                    composed.canonicalize()?
                } else {
                    composed
                }
            }
        };
        let manifest = Manifest {
            n,
            tau,
            case,
            complexity: structure.complexity(),
            latency: structure.latency(),
            pi: structure.pi().map_or(0, |p| p.value),
            base: manifest_base,
            parts: manifest_parts,
            unconsumed_inputs: unconsumed,
        };
        let out = Arc::new(Synthesized { structure, manifest });
        self.memo.insert((n, tau), Arc::clone(&out));
        Ok(out)
    }
}

/// One-shot form of [`Synthesizer::build`].
pub fn construct_general(n: usize, tau: usize, tables: &PhiEtaTables) -> Result<Synthesized, SynthesisError> {
    let built = Synthesizer::new(tables).build(n, tau)?;
    Ok(Arc::unwrap_or_clone(built))
}

#[cfg(test)]
mod tests {
    use std::sync::OnceLock;

    use super::*;
    use crate::dp::{compute_tables, Cost};
    use crate::math::{ceil_log2, complexity_upper_bound, min_latency};

    fn tables() -> &'static PhiEtaTables {
        static T: OnceLock<PhiEtaTables> = OnceLock::new();
        T.get_or_init(|| compute_tables(40, 12).unwrap())
    }

    #[test]
    fn printed_examples() {
        for (n, tau, c) in [(7, 3, 18), (8, 4, 18), (33, 5, 165), (6, 3, 12)] {
            let s = construct_general(n, tau, tables()).unwrap();
            assert_eq!(s.structure.complexity(), c, "({n}, {tau})");
            assert!(s.structure.latency() <= tau);
        }
    }

    #[test]
    fn feasibility_boundary_and_costs() {
        let t = tables();
        let mut synth = Synthesizer::new(t);
        for n in 2..=40 {
            for tau in 0..=8 {
                let got = synth.build(n, tau);
                if tau < min_latency(n) {
                    assert_eq!(got.unwrap_err(), SynthesisError::Infeasible { n, tau });
                    continue;
                }
                let s = &got.unwrap().structure;
                let r = s.validate();
                assert!(r.is_for_y, "({n}, {tau}): {r:?}");
                assert!(s.latency() <= tau);
                assert_eq!(Cost::Finite(s.complexity() as i64), t.phi(n, tau).unwrap(), "({n}, {tau})");
                assert!(s.complexity() <= complexity_upper_bound(n));
                assert_eq!(s.pi().unwrap().value, ceil_log2(n).max(1), "({n}, {tau})");
            }
        }
    }

    #[test]
    fn manifest_records_decomposition() {
        let s = construct_general(7, 3, tables()).unwrap();
        assert_eq!(s.manifest.case, Case::E5);
        let json = s.manifest.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["case"], "E5");
        assert!(v["base"]["n"].is_u64());
        assert!(v["parts"][0]["pair"].is_array());
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn outside_tables() {
        let small = compute_tables(8, 2).unwrap();
        assert!(matches!(construct_general(8, 3, &small), Err(SynthesisError::Tables { .. })));
        assert!(matches!(construct_general(20, 5, &small), Err(SynthesisError::Tables { .. })));
        assert_eq!(construct_general(8, 9, &small).unwrap().manifest.case, Case::E2);
    }
}
