//! Set files and group strings.
//!
//! Group strings: `Z:6` and `Z:9x9` are cyclic products with the
//! quotient metric, `Z2^4` is the dyadic cube. Set files are JSON
//! objects `{"group": {"moduli": [...], "metric": "cyclic"|"dyadic"},
//! "elements": [[..], ..]}` with an optional `"runs": [[start, len], ..]`
//! run-length encoding over canonical indices. Writers pick run-length
//! automatically when it is at least four times smaller.

use serde::{Deserialize, Serialize};

use crate::group::{DenseSet, Group, GroupSpec};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
pub struct SetFile {
    pub group: GroupSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<[u64; 2]>>,
}

/// Parse `Z:6`, `Z:9x9`, `Z2^4`.
pub fn parse_group(s: &str) -> Result<GroupSpec> {
    if let Some(rest) = s.strip_prefix("Z2^") {
        let dim: usize = rest
            .parse()
            .map_err(|_| Error::Input(format!("bad dyadic dimension in `{s}`")))?;
        if dim == 0 {
            return Err(Error::Input("dyadic cube needs dimension ≥ 1".into()));
        }
        return Ok(GroupSpec::dyadic(dim));
    }
    if let Some(rest) = s.strip_prefix("Z:") {
        let moduli: Vec<u64> = rest
            .split('x')
            .map(|p| p.parse().map_err(|_| Error::Input(format!("bad modulus `{p}` in `{s}`"))))
            .collect::<Result<_>>()?;
        return Ok(GroupSpec::cyclic(moduli));
    }
    Err(Error::Input(format!(
        "unrecognized group string `{s}` (expected Z:6, Z:9x9 or Z2^4 forms)"
    )))
}

pub fn set_from_file(file: &SetFile, limit: usize) -> Result<(Group, DenseSet)> {
    let group = Group::with_element_limit(file.group.clone(), limit)?;
    let mut set = DenseSet::empty(group.clone());
    if let Some(elements) = &file.elements {
        for coords in elements {
            let e = group.elem(coords.clone())?;
            set.insert_index(group.index_of(&e));
        }
    }
    if let Some(runs) = &file.runs {
        for &[start, len] in runs {
            let end = start
                .checked_add(len)
                .filter(|&e| e as usize <= group.size())
                .ok_or_else(|| Error::Input(format!("run [{start}, {len}] leaves the group")))?;
            for i in start..end {
                set.insert_index(i as usize);
            }
        }
    }
    if file.elements.is_none() && file.runs.is_none() {
        return Err(Error::Input("set file has neither elements nor runs".into()));
    }
    Ok((group, set))
}

/// Run-length encoding of the membership bits over canonical indices.
fn runs_of(set: &DenseSet) -> Vec<[u64; 2]> {
    let mut runs = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for i in set.iter_indices() {
        match current {
            Some((start, len)) if start + len == i => current = Some((start, len + 1)),
            Some((start, len)) => {
                runs.push([start as u64, len as u64]);
                current = Some((i, 1));
            }
            None => current = Some((i, 1)),
        }
    }
    if let Some((start, len)) = current {
        runs.push([start as u64, len as u64]);
    }
    runs
}

pub fn set_to_file(set: &DenseSet) -> SetFile {
    let group = set.group();
    let runs = runs_of(set);
    let elem_tokens = set.cardinality() * group.dim();
    let run_tokens = runs.len() * 2;
    if run_tokens * 4 <= elem_tokens {
        SetFile { group: group.spec().clone(), elements: None, runs: Some(runs) }
    } else {
        let elements = set.elems().into_iter().map(|e| e.coords).collect();
        SetFile { group: group.spec().clone(), elements: Some(elements), runs: None }
    }
}

pub fn load_set(path: &std::path::Path, limit: usize) -> Result<(Group, DenseSet)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    let file: SetFile = serde_json::from_str(&text)
        .map_err(|e| Error::Input(format!("bad set file {}: {e}", path.display())))?;
    set_from_file(&file, limit)
}

pub fn save_set(path: &std::path::Path, set: &DenseSet) -> Result<()> {
    let file = set_to_file(set);
    let text = serde_json::to_string(&file).expect("set file serializes");
    std::fs::write(path, text)
        .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::DEFAULT_ELEMENT_LIMIT;

    #[test]
    fn group_strings() {
        assert_eq!(parse_group("Z:6").unwrap(), GroupSpec::cyclic(vec![6]));
        assert_eq!(parse_group("Z:9x9").unwrap(), GroupSpec::cyclic(vec![9, 9]));
        assert_eq!(parse_group("Z2^4").unwrap(), GroupSpec::dyadic(4));
        assert!(parse_group("Q:5").is_err());
        assert!(parse_group("Z:").is_err());
        // Round-trip through Display.
        for s in ["Z:6", "Z:9x9", "Z2^4"] {
            assert_eq!(parse_group(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn elements_roundtrip() {
        let spec = parse_group("Z:9x9").unwrap();
        let group = Group::new(spec).unwrap();
        let set = DenseSet::from_indices(group.clone(), [0usize, 1, 9, 80]);
        let file = set_to_file(&set);
        let (g2, back) = set_from_file(&file, DEFAULT_ELEMENT_LIMIT).unwrap();
        assert_eq!(&g2, &group);
        assert_eq!(back, set);
    }

    #[test]
    fn runs_chosen_for_intervals() {
        let group = Group::new(parse_group("Z:4096").unwrap()).unwrap();
        let set = DenseSet::from_indices(group.clone(), 0..1024usize);
        let file = set_to_file(&set);
        assert!(file.runs.is_some());
        assert_eq!(file.runs.as_ref().unwrap().len(), 1);
        let (_, back) = set_from_file(&file, DEFAULT_ELEMENT_LIMIT).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn sparse_sets_stay_element_lists() {
        let group = Group::new(parse_group("Z:4096").unwrap()).unwrap();
        let set = DenseSet::from_indices(group.clone(), [5usize, 99, 2100]);
        let file = set_to_file(&set);
        assert!(file.elements.is_some());
    }

    #[test]
    fn bad_inputs_rejected() {
        let file = SetFile {
            group: GroupSpec::cyclic(vec![6]),
            elements: Some(vec![vec![7]]),
            runs: None,
        };
        assert!(set_from_file(&file, DEFAULT_ELEMENT_LIMIT).is_err());
        let file = SetFile {
            group: GroupSpec::cyclic(vec![6]),
            elements: None,
            runs: Some(vec![[4, 4]]),
        };
        assert!(set_from_file(&file, DEFAULT_ELEMENT_LIMIT).is_err());
        let file = SetFile { group: GroupSpec::cyclic(vec![6]), elements: None, runs: None };
        assert!(set_from_file(&file, DEFAULT_ELEMENT_LIMIT).is_err());
    }
}
