use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use spatialqa::geometry::DepthMap;
use spatialqa::interchange::{
    list_scenes, load_scene, validate_scene, write_scene, InterchangeError, ObjectEntity, Rle, SceneRecord,
};
use spatialqa::oracle::{emit_scene, random_observable_spec, render_depth, write_oracle_scene, GeneratorParams, SceneSpec};

fn oracle_spec(seed: u64) -> SceneSpec {
    let params = GeneratorParams {
        width: 160,
        height: 120,
        min_pixels: 40,
        observe_tolerance: 0.03,
        ..Default::default()
    };
    random_observable_spec(&mut ChaCha8Rng::seed_from_u64(seed), &format!("oracle{seed}"), &params)
        .unwrap()
        .0
}

#[test]
fn oracle_scene_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..4 {
        let spec = oracle_spec(seed);
        let (scene, _) = emit_scene(&spec).unwrap();
        validate_scene(&scene).unwrap();
        write_oracle_scene(&spec, dir.path()).unwrap();
        assert_eq!(load_scene(dir.path(), &spec.image_id).unwrap(), scene);
    }
    assert_eq!(list_scenes(dir.path()).unwrap(), vec!["oracle0", "oracle1", "oracle2", "oracle3"]);
}

fn le_f32(bytes: &[u8]) -> Vec<f32> {
    bytes.chunks(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect()
}

fn le_u32(bytes: &[u8]) -> Vec<u32> {
    bytes.chunks(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect()
}

fn expand(counts: &[u32]) -> Vec<bool> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i % 2 == 1, c as usize))
        .collect()
}

// Reads a scene directory from the documented layout alone: scene.json with
// inline mask runs, raw little-endian f32 depth and embeddings, u32 runs for
// the surface mask.
#[test]
fn independent_reader_agrees_with_the_renderer() {
    let dir = tempfile::tempdir().unwrap();
    let spec = oracle_spec(9);
    let scene_dir = write_oracle_scene(&spec, dir.path()).unwrap();
    let render = render_depth(&spec);

    let meta: Value = serde_json::from_slice(&fs::read(scene_dir.join("scene.json")).unwrap()).unwrap();
    let (w, h) = (meta["width"].as_u64().unwrap() as usize, meta["height"].as_u64().unwrap() as usize);
    assert_eq!((w, h), (spec.width, spec.height));
    assert_eq!(meta["fov_h_deg"].as_f64().unwrap(), spec.camera.fov_h_deg);

    let file = |key: &str| fs::read(scene_dir.join(meta[key].as_str().unwrap())).unwrap();
    let depth = le_f32(&file("depth_ref"));
    assert_eq!(depth, render.depth.values);

    let surface = expand(&le_u32(&file("surface_mask_ref")));
    assert_eq!(surface, render.ground);

    let dim = meta["embedding_dim"].as_u64().unwrap() as usize;
    let emb = le_f32(&file("embeddings_ref"));
    let entities = meta["entities"].as_array().unwrap();
    assert_eq!(emb.len(), entities.len() * dim);
    for (row, e) in entities.iter().enumerate() {
        let index = e["index"].as_i64().unwrap() as i32;
        let counts: Vec<u32> = e["mask"]["counts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_u64().unwrap() as u32)
            .collect();
        let mask = expand(&counts);
        assert_eq!(mask.len(), w * h);
        for (px, &m) in mask.iter().enumerate() {
            assert_eq!(m, render.object_id[px] == index, "entity {index} pixel {px}");
        }
        let caption = e["captions"][0].as_str().unwrap();
        assert_eq!(caption, spec.objects[index as usize].caption);
        let norm: f32 = emb[row * dim..(row + 1) * dim].iter().map(|x| x * x).sum::<f32>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
    }
}

fn tiny_scene() -> SceneRecord {
    let (w, h) = (16, 16);
    let mut mask = vec![false; w * h];
    mask[17] = true;
    SceneRecord {
        image_id: "tiny".into(),
        width: w,
        height: h,
        fov_h_deg: 60.0,
        depth: DepthMap::new(w, h, vec![1.5; w * h]),
        surface_mask: Rle::encode(&vec![false; w * h]),
        entities: vec![ObjectEntity {
            index: 0,
            mask: Rle::encode(&mask),
            captions: vec!["mug".into()],
            embedding: vec![1.0, 0.0],
            stats: None,
        }],
        filter_scores: BTreeMap::from([("an iphone photo of an indoor scene".to_string(), 0.3)]),
        embedding_dim: 2,
    }
}

#[test]
fn invalid_scene_is_refused_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = tiny_scene();
    s.entities[0].captions.clear();
    let err = write_scene(&s, dir.path()).unwrap_err();
    assert!(err.to_string().contains("entity 0"), "{err}");
    assert!(!dir.path().join("tiny").exists());
}

#[test]
fn truncated_depth_is_a_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scene(&tiny_scene(), dir.path()).unwrap();
    let depth = path.join("depth.f32");
    let bytes = fs::read(&depth).unwrap();
    fs::write(&depth, &bytes[..bytes.len() - 4]).unwrap();
    assert!(matches!(
        load_scene(dir.path(), "tiny"),
        Err(InterchangeError::DimensionMismatch { expected: 1024, found: 1020, .. })
    ));
}

#[test]
fn missing_sidecar_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_scene(&tiny_scene(), dir.path()).unwrap();
    fs::remove_file(path.join("embeddings.f32")).unwrap();
    match load_scene(dir.path(), "tiny") {
        Err(InterchangeError::MissingFile(p)) => assert!(p.ends_with(Path::new("tiny/embeddings.f32"))),
        other => panic!("{other:?}"),
    }
}

fn arb_scene() -> impl Strategy<Value = SceneRecord> {
    (16usize..40, 16usize..40, 10.0f64..170.0, 0usize..4, 1usize..6).prop_flat_map(|(w, h, fov, n, dim)| {
        let n_px = w * h;
        (
            prop::collection::vec(prop_oneof![Just(0.0f32), 0.05f32..50.0], n_px),
            prop::collection::vec(any::<bool>(), n_px),
            prop::collection::vec(
                (
                    prop::collection::vec(any::<bool>(), n_px),
                    0..n_px,
                    prop::collection::vec("[a-z]{1,8}( [a-z]{1,8}){0,5}", 1..4),
                    prop::collection::vec(-1.0f32..1.0, dim),
                ),
                n,
            ),
            prop::collection::btree_map("[a-z ]{1,20}", -1.0f64..=1.0, 0..4),
        )
            .prop_map(move |(depth, surface, ents, scores)| SceneRecord {
                image_id: "scene".into(),
                width: w,
                height: h,
                fov_h_deg: fov,
                depth: DepthMap::new(w, h, depth),
                surface_mask: Rle::encode(&surface),
                entities: ents
                    .into_iter()
                    .enumerate()
                    .map(|(i, (mut mask, forced, captions, mut emb))| {
                        mask[forced] = true;
                        emb[0] += 2.0;
                        let norm = emb.iter().map(|x| x * x).sum::<f32>().sqrt();
                        emb.iter_mut().for_each(|x| *x /= norm);
                        ObjectEntity {
                            index: i as u32 * 3,
                            mask: Rle::encode(&mask),
                            captions,
                            embedding: emb,
                            stats: None,
                        }
                    })
                    .collect(),
                filter_scores: scores,
                embedding_dim: dim,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn write_then_load_is_identity(scene in arb_scene()) {
        let dir = tempfile::tempdir().unwrap();
        write_scene(&scene, dir.path()).unwrap();
        prop_assert_eq!(load_scene(dir.path(), "scene").unwrap(), scene);
    }
}
