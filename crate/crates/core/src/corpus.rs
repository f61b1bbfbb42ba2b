//! Scene library: loading, validation, and mechanic-aware sampling.
//!
//! A corpus is loaded from a JSON manifest that lists scene files (in the
//! `.lvl` text format) with their mechanic labels. Scenes containing
//! unknown tile characters are skipped with a warning rather than guessed
//! at. Sampling always takes an explicit RNG so callers own determinism.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{
    parse_level_text, serialize_level_text, LevelError, MechanicKind, MechanicSet, Scene, SceneId,
};
use crate::rank::linear_rank_weights;

pub mod synthetic;

/// Immutable scene library indexed by mechanic-label count.
#[derive(Debug, Clone)]
pub struct Corpus {
    scenes: Vec<Scene>,
    by_mechanic_count: BTreeMap<usize, Vec<SceneId>>,
    scene_width: usize,
    scene_height: usize,
}

impl Corpus {
    /// Builds a corpus from scenes, assigning ids by position.
    pub fn from_scenes(mut scenes: Vec<Scene>) -> Result<Corpus, CorpusError> {
        if scenes.is_empty() {
            return Err(CorpusError::Empty);
        }
        let scene_width = scenes[0].grid.width();
        let scene_height = scenes[0].grid.height();
        let mut by_mechanic_count: BTreeMap<usize, Vec<SceneId>> = BTreeMap::new();
        for (i, scene) in scenes.iter_mut().enumerate() {
            if scene.grid.width() != scene_width || scene.grid.height() != scene_height {
                return Err(CorpusError::DimensionMismatch {
                    name: scene.name.clone(),
                    got: (scene.grid.width(), scene.grid.height()),
                    expected: (scene_width, scene_height),
                });
            }
            scene.id = SceneId(i as u32);
            by_mechanic_count
                .entry(scene.mechanics.len())
                .or_default()
                .push(scene.id);
        }
        if !by_mechanic_count.contains_key(&0) {
            return Err(CorpusError::NoFlatScene);
        }
        Ok(Corpus {
            scenes,
            by_mechanic_count,
            scene_width,
            scene_height,
        })
    }

    pub fn scene(&self, id: SceneId) -> Option<&Scene> {
        self.scenes.get(id.0 as usize)
    }

    pub fn scenes(&self) -> &[Scene] {
        &self.scenes
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }

    pub fn scene_width(&self) -> usize {
        self.scene_width
    }

    pub fn scene_height(&self) -> usize {
        self.scene_height
    }

    pub fn by_mechanic_count(&self) -> &BTreeMap<usize, Vec<SceneId>> {
        &self.by_mechanic_count
    }

    pub fn max_mechanic_count(&self) -> usize {
        self.by_mechanic_count.keys().next_back().copied().unwrap_or(0)
    }
}

/// One entry of the JSON corpus manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Scene file path, relative to the manifest.
    pub path: String,
    /// Mechanic labels; names must match `MechanicKind` names.
    pub mechanics: Vec<String>,
}

/// The `corpus.json` schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub scene_width: usize,
    pub scene_height: usize,
    pub scenes: Vec<ManifestEntry>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse manifest {path}: {source}")]
    BadManifest {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("scene {path}: {source}")]
    BadScene { path: PathBuf, source: LevelError },
    #[error("scene {path}: unknown mechanic label {label:?}")]
    UnknownLabel { path: PathBuf, label: String },
    #[error("scene {name}: is {got:?} tiles, expected {expected:?}")]
    DimensionMismatch {
        name: String,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("no loadable scenes")]
    Empty,
    #[error("corpus has no zero-mechanic scene")]
    NoFlatScene,
}

/// A loaded corpus plus warnings about skipped scenes.
#[derive(Debug)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub warnings: Vec<String>,
}

/// Loads a corpus from its JSON manifest. Scenes with unknown tile
/// characters are skipped and reported in `warnings`; structural problems
/// (missing files, ragged lines, bad labels, bad dimensions) are errors.
pub fn load_corpus(manifest_path: &Path) -> Result<LoadedCorpus, CorpusError> {
    let text = fs::read_to_string(manifest_path).map_err(|source| CorpusError::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let manifest: CorpusManifest =
        serde_json::from_str(&text).map_err(|source| CorpusError::BadManifest {
            path: manifest_path.to_path_buf(),
            source,
        })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut scenes = Vec::new();
    let mut warnings = Vec::new();
    for entry in &manifest.scenes {
        let path = base.join(&entry.path);
        let text = fs::read_to_string(&path).map_err(|source| CorpusError::Io {
            path: path.clone(),
            source,
        })?;
        let grid = match parse_level_text(&text) {
            Ok(grid) => grid,
            Err(err @ LevelError::UnknownTile { .. }) => {
                warnings.push(format!("skipping {}: {}", path.display(), err));
                continue;
            }
            Err(source) => return Err(CorpusError::BadScene { path, source }),
        };
        if grid.width() != manifest.scene_width || grid.height() != manifest.scene_height {
            return Err(CorpusError::DimensionMismatch {
                name: entry.path.clone(),
                got: (grid.width(), grid.height()),
                expected: (manifest.scene_width, manifest.scene_height),
            });
        }
        let mut mechanics = MechanicSet::EMPTY;
        for label in &entry.mechanics {
            let kind = MechanicKind::from_name(label).ok_or_else(|| CorpusError::UnknownLabel {
                path: path.clone(),
                label: label.clone(),
            })?;
            mechanics.insert(kind);
        }
        scenes.push(Scene {
            id: SceneId(0), // assigned by from_scenes
            name: entry.path.clone(),
            grid,
            mechanics,
        });
    }
    let corpus = Corpus::from_scenes(scenes)?;
    Ok(LoadedCorpus { corpus, warnings })
}

/// Writes a corpus to `dir` as scene files plus a `corpus.json` manifest,
/// returning the manifest path.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<PathBuf, CorpusError> {
    let scenes_dir = dir.join("scenes");
    fs::create_dir_all(&scenes_dir).map_err(|source| CorpusError::Io {
        path: scenes_dir.clone(),
        source,
    })?;
    let mut entries = Vec::new();
    for scene in corpus.scenes() {
        let file = format!("scenes/{}.lvl", scene.name);
        let path = dir.join(&file);
        fs::write(&path, serialize_level_text(&scene.grid) + "\n").map_err(|source| {
            CorpusError::Io {
                path: path.clone(),
                source,
            }
        })?;
        entries.push(ManifestEntry {
            path: file,
            mechanics: scene.mechanics.iter().map(|m| m.name().to_string()).collect(),
        });
    }
    let manifest = CorpusManifest {
        scene_width: corpus.scene_width(),
        scene_height: corpus.scene_height(),
        scenes: entries,
    };
    let manifest_path = dir.join("corpus.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, json).map_err(|source| CorpusError::Io {
        path: manifest_path.clone(),
        source,
    })?;
    Ok(manifest_path)
}

/// Uniformly samples a scene whose label count equals `mechanic_count`,
/// falling back to the nearest available count (ties toward smaller).
pub fn sample_scene_by_count<'c, R: Rng>(
    corpus: &'c Corpus,
    mechanic_count: usize,
    rng: &mut R,
) -> &'c Scene {
    assert!(!corpus.is_empty());
    let bucket = corpus
        .by_mechanic_count()
        .keys()
        .copied()
        .min_by_key(|&c| (c.abs_diff(mechanic_count), c))
        .expect("non-empty corpus has buckets");
    let ids = &corpus.by_mechanic_count()[&bucket];
    let id = ids[rng.random_range(0..ids.len())];
    corpus.scene(id).expect("indexed id resolves")
}

/// Linear-rank sample favoring scenes with fewer mechanics.
pub fn rank_sample_inverse_mechanics<'c, R: Rng>(corpus: &'c Corpus, rng: &mut R) -> &'c Scene {
    rank_sample_by_mechanics(corpus, true, rng)
}

/// Linear-rank sample over label counts; `favor_few` picks the direction.
pub fn rank_sample_by_mechanics<'c, R: Rng>(
    corpus: &'c Corpus,
    favor_few: bool,
    rng: &mut R,
) -> &'c Scene {
    assert!(!corpus.is_empty());
    let counts: Vec<f64> = corpus.scenes().iter().map(|s| s.mechanics.len() as f64).collect();
    let weights = linear_rank_weights(&counts, favor_few);
    let dist = WeightedIndex::new(&weights).expect("positive weights");
    &corpus.scenes()[dist.sample(rng)]
}

#[cfg(test)]
mod tests {
    use super::synthetic::{build_synthetic_corpus, SyntheticConfig};
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn tiny_corpus(counts: &[usize]) -> Corpus {
        // Builds label sets of the requested sizes on flat grids.
        let scenes = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut grid = crate::level::TileGrid::new(4, 4);
                for x in 0..4 {
                    grid.set(x, 3, crate::level::TileKind::Ground);
                }
                let mechanics: MechanicSet =
                    MechanicKind::ALL.iter().copied().take(c).collect();
                Scene {
                    id: SceneId(0),
                    name: format!("s{i}"),
                    grid,
                    mechanics,
                }
            })
            .collect();
        Corpus::from_scenes(scenes).unwrap()
    }

    #[test]
    fn index_is_consistent_with_label_sizes() {
        let corpus = build_synthetic_corpus(&SyntheticConfig::default());
        for (&count, ids) in corpus.by_mechanic_count() {
            for &id in ids {
                assert_eq!(corpus.scene(id).unwrap().mechanics.len(), count);
            }
        }
    }

    #[test]
    fn sample_by_count_prefers_exact_bucket() {
        let corpus = tiny_corpus(&[0, 2, 2, 5]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let s = sample_scene_by_count(&corpus, 2, &mut rng);
            assert_eq!(s.mechanics.len(), 2);
        }
    }

    #[test]
    fn sample_by_count_falls_back_to_nearest_preferring_smaller() {
        let corpus = tiny_corpus(&[0, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Count 2 is equidistant from 0 and 4; ties break toward smaller.
        for _ in 0..20 {
            let s = sample_scene_by_count(&corpus, 2, &mut rng);
            assert_eq!(s.mechanics.len(), 0);
        }
        // A huge request lands on the maximum available count.
        for _ in 0..20 {
            let s = sample_scene_by_count(&corpus, 99, &mut rng);
            assert_eq!(s.mechanics.len(), 4);
        }
    }

    #[test]
    fn sample_by_count_is_seed_deterministic() {
        let corpus = tiny_corpus(&[0, 0, 0, 1, 1, 2]);
        let a: Vec<u32> = {
            let mut rng = ChaCha8Rng::seed_from_u64(33);
            (0..20)
                .map(|_| sample_scene_by_count(&corpus, 1, &mut rng).id.0)
                .collect()
        };
        let b: Vec<u32> = {
            let mut rng = ChaCha8Rng::seed_from_u64(33);
            (0..20)
                .map(|_| sample_scene_by_count(&corpus, 1, &mut rng).id.0)
                .collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn inverse_rank_two_scene_odds() {
        // Counts {0, 5}: linear rank gives the flat scene 2/3 of the draws.
        let corpus = tiny_corpus(&[0, 5]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000;
        let mut flat = 0;
        for _ in 0..draws {
            if rank_sample_inverse_mechanics(&corpus, &mut rng).mechanics.is_empty() {
                flat += 1;
            }
        }
        let p = flat as f64 / draws as f64;
        assert!((p - 2.0 / 3.0).abs() < 0.01, "p = {p}");
    }

    #[test]
    fn rank_sampler_matches_linear_rank_weights_within_two_percent() {
        let corpus = tiny_corpus(&[0, 0, 1, 2, 3, 3, 5]);
        let counts: Vec<f64> =
            corpus.scenes().iter().map(|s| s.mechanics.len() as f64).collect();
        let weights = linear_rank_weights(&counts, true);
        let total: f64 = weights.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 100_000;
        let mut histogram: HashMap<u32, usize> = HashMap::new();
        for _ in 0..draws {
            *histogram
                .entry(rank_sample_inverse_mechanics(&corpus, &mut rng).id.0)
                .or_default() += 1;
        }
        for (i, w) in weights.iter().enumerate() {
            let expected = w / total;
            let observed =
                histogram.get(&(i as u32)).copied().unwrap_or(0) as f64 / draws as f64;
            assert!(
                (observed - expected).abs() < 0.02,
                "scene {i}: observed {observed:.4}, expected {expected:.4}"
            );
        }
    }

    #[test]
    fn single_scene_corpus_always_returns_it() {
        let corpus = tiny_corpus(&[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(rank_sample_inverse_mechanics(&corpus, &mut rng).id, SceneId(0));
    }

    #[test]
    fn corpus_requires_a_flat_scene() {
        let scenes = vec![Scene {
            id: SceneId(0),
            name: "only".into(),
            grid: crate::level::TileGrid::new(4, 4),
            mechanics: [MechanicKind::Jump].into_iter().collect(),
        }];
        assert!(matches!(
            Corpus::from_scenes(scenes),
            Err(CorpusError::NoFlatScene)
        ));
    }

    #[test]
    fn load_round_trips_through_disk() {
        let corpus = build_synthetic_corpus(&SyntheticConfig::default());
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_corpus(&corpus, dir.path()).unwrap();
        let loaded = load_corpus(&manifest).unwrap();
        assert!(loaded.warnings.is_empty());
        assert_eq!(loaded.corpus.len(), corpus.len());
        for (a, b) in corpus.scenes().iter().zip(loaded.corpus.scenes()) {
            assert_eq!(a.grid, b.grid);
            assert_eq!(a.mechanics, b.mechanics);
        }
    }

    #[test]
    fn loader_skips_unknown_tiles_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(dir.path().join("scenes")).unwrap();
        std::fs::write(dir.path().join("scenes/good.lvl"), "--\nXX\n").unwrap();
        std::fs::write(dir.path().join("scenes/weird.lvl"), "-Z\nXX\n").unwrap();
        let manifest = CorpusManifest {
            scene_width: 2,
            scene_height: 2,
            scenes: vec![
                ManifestEntry { path: "scenes/good.lvl".into(), mechanics: vec![] },
                ManifestEntry { path: "scenes/weird.lvl".into(), mechanics: vec![] },
            ],
        };
        let path = dir.path().join("corpus.json");
        std::fs::write(&path, serde_json::to_string(&manifest).unwrap()).unwrap();
        let loaded = load_corpus(&path).unwrap();
        assert_eq!(loaded.corpus.len(), 1);
        assert_eq!(loaded.warnings.len(), 1);
        assert!(loaded.warnings[0].contains("weird.lvl"));
    }

    #[test]
    fn empty_manifest_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = CorpusManifest { scene_width: 2, scene_height: 2, scenes: vec![] };
        let path = dir.path().join("corpus.json");
        std::fs::write(&path, serde_json::to_string(&manifest).unwrap()).unwrap();
        assert!(matches!(load_corpus(&path), Err(CorpusError::Empty)));
    }
}
