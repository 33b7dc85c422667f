//! The three batch stages: attribute export, per-frame masks, evaluation.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use image::{Rgb, RgbImage};
use log::{info, warn};
use rayon::prelude::*;
use roadprior::attributes::{export_features, scene_attributes, write_attribute_csv, Dynamics};
use roadprior::fusion::{decode_gt, format_table, fuse_available, Category, Counts, EvalResult, PrSweep, ReportRow};
use roadprior::geodesy::{parse_pose_file, SpatialIndex, VehiclePose};
use roadprior::lidar::{lidar_mask, load_velodyne_file};
use roadprior::osm::{parse_osm, OsmGraph};
use roadprior::refine::{relabel, superpixels};
use roadprior::renderer::{build_road_polygons, candidates_mask, render_mask, CameraModel};
use roadprior::vision::{grabcut_road, lane_mark_mask, LineSegment};
use roadprior::{MaskKind, RoadMask};

use crate::config::{PipelineConfig, Threshold};
use crate::kitti::{frame_seed, gt_path, list_frames, parse_dynamics, parse_oxts};

/// Every mask the pipeline writes, in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    OsmDirect,
    OsmRefined,
    OsmCandidates,
    GrabCut,
    LaneMark,
    Lidar,
    Combined,
}

impl Source {
    pub const ALL: [Source; 7] = [
        Source::OsmDirect,
        Source::OsmRefined,
        Source::OsmCandidates,
        Source::GrabCut,
        Source::LaneMark,
        Source::Lidar,
        Source::Combined,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            Source::OsmDirect => "osm_direct",
            Source::OsmRefined => "osm_refined",
            Source::OsmCandidates => "osm_candidates",
            Source::GrabCut => "grabcut",
            Source::LaneMark => "lanemark",
            Source::Lidar => "lidar",
            Source::Combined => "fused",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Source::OsmDirect => "OSM direct",
            Source::OsmRefined => "OSM refinement",
            Source::OsmCandidates => "OSM candidate",
            Source::GrabCut => "Image GrabCut",
            Source::LaneMark => "Image LaneMark",
            Source::Lidar => "Lidar PointCloud",
            Source::Combined => "Combined",
        }
    }

    pub fn is_confidence(self) -> bool {
        matches!(self, Source::OsmCandidates | Source::Combined)
    }
}

/// What a stage did: frames processed, frames that failed with the reason,
/// and for evaluation the pixel-summed score of each source and category.
#[derive(Debug, Default)]
pub struct Outcome {
    pub processed: usize,
    pub failures: Vec<(String, String)>,
    pub scores: BTreeMap<(Source, Category), EvalResult>,
}

impl Outcome {
    pub fn merge(&mut self, other: Outcome) {
        self.processed += other.processed;
        self.failures.extend(other.failures);
        self.scores.extend(other.scores);
    }
}

pub fn load_map(path: &Path) -> Result<(OsmGraph, SpatialIndex)> {
    let xml = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let (graph, report) = parse_osm(&xml).with_context(|| format!("parsing {}", path.display()))?;
    info!("{}: {report:?}", path.display());
    let index = SpatialIndex::build(&graph)?;
    Ok((graph, index))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

/// One attribute record and one feature row per pose.
pub fn run_attributes(cfg: &PipelineConfig) -> Result<Outcome> {
    cfg.require(&[("osm", &cfg.paths.osm), ("pose_file", &cfg.paths.pose_file)])?;
    let (graph, index) = load_map(cfg.paths.osm.as_ref().expect("checked"))?;
    let pose_path = cfg.paths.pose_file.as_ref().expect("checked");
    let text = std::fs::read_to_string(pose_path)?;
    let poses = parse_pose_file(&text)?;
    let dynamics = match &cfg.paths.dynamics_file {
        Some(p) => parse_dynamics(&std::fs::read_to_string(p)?)?,
        None => poses.iter().map(|p| Dynamics::new([0.0; 3], [0.0; 3], 0.0, p.heading_deg)).collect(),
    };
    let (zone, hemisphere) = index.zone();
    let attr = cfg.attribute_config();
    let records = poses
        .iter()
        .map(|p| -> Result<_> {
            let planar = p.in_zone(zone, hemisphere)?.planar();
            Ok((p.timestamp, scene_attributes(&graph, &index, &planar, &attr)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let out = &cfg.paths.output_dir;
    let mut human = create(&out.join("attributes.csv"))?;
    write_attribute_csv(&mut human, records.iter().map(|(t, s)| (*t, s)))?;
    human.flush()?;
    let scenes: Vec<_> = records.into_iter().map(|(_, s)| s).collect();
    let mut features = create(&out.join("features.csv"))?;
    export_features(&mut features, &scenes, &dynamics)?;
    features.flush()?;
    info!("wrote {} attribute records", scenes.len());
    Ok(Outcome { processed: scenes.len(), ..Default::default() })
}

fn selected_frames(cfg: &PipelineConfig, image_dir: &Path) -> Result<Vec<String>> {
    let all = list_frames(image_dir)?;
    if cfg.run.frames.is_empty() {
        return Ok(all);
    }
    Ok(all.into_iter().filter(|f| cfg.run.frames.contains(f)).collect())
}

pub fn mask_dir(cfg: &PipelineConfig, frame: &str) -> PathBuf {
    cfg.paths.output_dir.join("masks").join(frame)
}

/// Writes the six source masks and the fused mask of every frame.
pub fn run_masks(cfg: &PipelineConfig) -> Result<Outcome> {
    let (images, calib, oxts) = (cfg.paths.images(), cfg.paths.calib(), cfg.paths.oxts());
    cfg.require(&[("osm", &cfg.paths.osm), ("image_dir", &images), ("calib_dir", &calib), ("oxts_dir", &oxts)])?;
    let (graph, index) = load_map(cfg.paths.osm.as_ref().expect("checked"))?;
    let frames = selected_frames(cfg, images.as_ref().expect("checked"))?;
    let results: Vec<(String, Result<()>)> = pool(cfg.run.jobs)?
        .install(|| frames.par_iter().map(|f| (f.clone(), masks_for_frame(cfg, &graph, &index, f))).collect());
    let mut outcome = Outcome::default();
    for (frame, r) in results {
        match r {
            Ok(()) => outcome.processed += 1,
            Err(e) => {
                warn!("{frame}: {e:#}");
                outcome.failures.push((frame, format!("{e:#}")));
            }
        }
    }
    Ok(outcome)
}

fn frame_file(dir: &Option<PathBuf>, frame: &str, ext: &str) -> Result<PathBuf> {
    Ok(dir.as_ref().ok_or_else(|| anyhow!("directory not configured"))?.join(format!("{frame}.{ext}")))
}

fn masks_for_frame(cfg: &PipelineConfig, graph: &OsmGraph, index: &SpatialIndex, frame: &str) -> Result<()> {
    let seed = frame_seed(cfg.run.seed, frame);
    let image_path = frame_file(&cfg.paths.images(), frame, "png")?;
    let image = image::open(&image_path).with_context(|| format!("reading {}", image_path.display()))?.to_rgb8();
    let (w, h) = image.dimensions();
    let calib =
        std::fs::read_to_string(frame_file(&cfg.paths.calib(), frame, "txt")?).context("reading calibration")?;
    let cam = CameraModel::parse_kitti(&calib, w, h)?;
    let oxts =
        parse_oxts(&std::fs::read_to_string(frame_file(&cfg.paths.oxts(), frame, "txt")?).context("reading OXTS")?)?;
    let (zone, hemisphere) = index.zone();
    let pose = VehiclePose::new(0.0, oxts.lat, oxts.lon, oxts.yaw.to_degrees())?.in_zone(zone, hemisphere)?.planar();

    let render = cfg.render_config();
    let attr = cfg.attribute_config();
    let direct = render_mask(&build_road_polygons(graph, index, &pose, &render, &attr)?, &cam, &render)?;
    let sp = superpixels(&image, cfg.superpixels.k, &cfg.slic_config())?;
    let refined = relabel(&sp, &direct)?;
    let candidates = candidates_mask(graph, index, &pose, &cam, &cfg.candidate_spec(seed)?, &render, &attr)?;
    let grabcut = grabcut_road(&image, &cfg.grabcut_config(w, h, seed))?;
    let lane = lane_mark_mask(&image, &cfg.lanemark_config())?;
    let lidar = match frame_file(&cfg.paths.velodyne(), frame, "bin") {
        Ok(p) if p.exists() => Some(lidar_mask(&load_velodyne_file(&p)?, &cam, &cfg.ground_config())?),
        _ => {
            warn!("{frame}: no Lidar scan, fusing four masks");
            None
        }
    };
    let fused = fuse_available(
        [Some(&refined), Some(&candidates), Some(&grabcut.mask), Some(&lane.mask), lidar.as_ref()],
        &cfg.weights()?,
    )?;

    let dir = mask_dir(cfg, frame);
    std::fs::create_dir_all(&dir)?;
    let mut outputs = vec![
        (Source::OsmDirect, &direct),
        (Source::OsmRefined, &refined),
        (Source::OsmCandidates, &candidates),
        (Source::GrabCut, &grabcut.mask),
        (Source::LaneMark, &lane.mask),
        (Source::Combined, &fused),
    ];
    if let Some(l) = &lidar {
        outputs.push((Source::Lidar, l));
    }
    for (s, m) in outputs {
        m.save_png(dir.join(format!("{}.png", s.file_stem())))?;
    }
    if cfg.run.debug_images {
        let edges = RoadMask::from_bools(w, h, &lane.edges)?;
        edges.save_png(dir.join("debug_edges.png"))?;
        hough_overlay(&image, &lane.segments).save(dir.join("debug_hough.png"))?;
    }
    Ok(())
}

fn hough_overlay(image: &RgbImage, segments: &[LineSegment]) -> RgbImage {
    let mut out = image.clone();
    for s in segments {
        let steps = s.length().ceil().max(1.0) as usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            let (x, y) = (s.x0 + t * (s.x1 - s.x0), s.y0 + t * (s.y1 - s.y0));
            if x >= 0.0 && y >= 0.0 && (x as u32) < out.width() && (y as u32) < out.height() {
                out.put_pixel(x as u32, y as u32, Rgb([255, 0, 0]));
            }
        }
    }
    out
}

/// Counts of an 8-bit confidence mask by level and ground truth, so any
/// threshold can be applied later and frames summed.
#[derive(Clone, Debug)]
pub struct LevelHistogram {
    road: [u64; 256],
    other: [u64; 256],
}

impl LevelHistogram {
    fn new() -> Self {
        Self { road: [0; 256], other: [0; 256] }
    }

    fn add(&mut self, o: &LevelHistogram) {
        for q in 0..256 {
            self.road[q] += o.road[q];
            self.other[q] += o.other[q];
        }
    }

    /// Road iff the stored level exceeds `round(255·t)`; the value exactly
    /// at a threshold stays non-road, as for the unquantized mask.
    pub fn counts(&self, t: f64) -> Counts {
        let cut = (255.0 * t).round() as usize;
        let mut c = Counts::default();
        for q in 0..256 {
            if q > cut {
                c.tp += self.road[q];
                c.fp += self.other[q];
            } else {
                c.fn_ += self.road[q];
                c.tn += self.other[q];
            }
        }
        c
    }
}

#[allow(clippy::large_enum_variant)]
enum FrameScore {
    Binary(Counts),
    Levels(LevelHistogram),
}

struct FrameEval {
    frame: String,
    category: Category,
    scores: BTreeMap<Source, FrameScore>,
}

fn eval_frame(cfg: &PipelineConfig, gt_dir: &Path, frame: &str) -> Result<Option<FrameEval>> {
    let category = Category::from_frame(frame)?;
    let Some(gt_file) = gt_path(gt_dir, frame) else {
        return Ok(None);
    };
    let gt = decode_gt(&image::open(&gt_file)?.to_rgb8(), cfg.gt_rule());
    let dir = mask_dir(cfg, frame);
    let mut scores = BTreeMap::new();
    for s in Source::ALL {
        let path = dir.join(format!("{}.png", s.file_stem()));
        if !path.exists() {
            if s == Source::Lidar {
                continue;
            }
            return Err(anyhow!("missing {}", path.display()));
        }
        let img = image::open(&path)?.to_luma8();
        if img.dimensions() != (gt.width(), gt.height()) {
            return Err(anyhow!(
                "{} is {:?}, ground truth is {}x{}",
                path.display(),
                img.dimensions(),
                gt.width(),
                gt.height()
            ));
        }
        let score = if s.is_confidence() {
            let mut hist = LevelHistogram::new();
            for (q, g) in img.as_raw().iter().zip(gt.data()) {
                if *g > 0.0 {
                    hist.road[*q as usize] += 1;
                } else {
                    hist.other[*q as usize] += 1;
                }
            }
            FrameScore::Levels(hist)
        } else {
            FrameScore::Binary(Counts::from_masks(&RoadMask::from_gray(&img, MaskKind::Binary), &gt)?)
        };
        scores.insert(s, score);
    }
    Ok(Some(FrameEval { frame: frame.to_string(), category, scores }))
}

fn sweep_thresholds(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    (0..=n).map(|k| (k as f64 * step).min(1.0)).collect()
}

/// Micro- and macro-averaged tables, per-frame records and PR curves.
pub fn run_eval(cfg: &PipelineConfig) -> Result<Outcome> {
    let (images, gt) = (cfg.paths.images(), cfg.paths.gt());
    cfg.require(&[("image_dir", &images), ("gt_dir", &gt)])?;
    let gt_dir = gt.expect("checked");
    let frames = selected_frames(cfg, images.as_ref().expect("checked"))?;
    let results: Vec<(String, Result<Option<FrameEval>>)> =
        pool(cfg.run.jobs)?.install(|| frames.par_iter().map(|f| (f.clone(), eval_frame(cfg, &gt_dir, f))).collect());

    let mut outcome = Outcome::default();
    let mut evals = Vec::new();
    let mut skipped = 0usize;
    for (frame, r) in results {
        match r {
            Ok(Some(e)) => evals.push(e),
            Ok(None) => {
                warn!("{frame}: no ground truth, skipped");
                skipped += 1;
            }
            Err(e) => {
                warn!("{frame}: {e:#}");
                outcome.failures.push((frame, format!("{e:#}")));
            }
        }
    }
    outcome.processed = evals.len();

    // thresholds for the confidence masks, per category
    let ts = sweep_thresholds(cfg.eval.sweep_step);
    let fixed = cfg.threshold()?;
    let out = cfg.paths.output_dir.join("eval");
    let mut chosen: BTreeMap<(Source, Category), f64> = BTreeMap::new();
    for s in Source::ALL.into_iter().filter(|s| s.is_confidence()) {
        for c in Category::ALL {
            let mut hist = LevelHistogram::new();
            let mut any = false;
            for e in evals.iter().filter(|e| e.category == c) {
                if let Some(FrameScore::Levels(h)) = e.scores.get(&s) {
                    hist.add(h);
                    any = true;
                }
            }
            if !any {
                continue;
            }
            let sweep = PrSweep::from_counts(&ts.iter().map(|&t| (t, hist.counts(t))).collect::<Vec<_>>());
            let mut f = create(&out.join(format!("pr_{}_{}.dat", s.file_stem(), c.name().to_lowercase())))?;
            writeln!(f, "# recall precision (thresholds {} to 1 in steps of {})", ts[0], cfg.eval.sweep_step)?;
            writeln!(f, "# best F1 {:.4} at t = {}", sweep.best.f1, sweep.best.t)?;
            for p in &sweep.points {
                writeln!(f, "{:.6} {:.6}", p.recall, p.precision)?;
            }
            f.flush()?;
            let t = match fixed {
                Threshold::Auto => sweep.best.t,
                Threshold::Fixed(t) => t,
            };
            chosen.insert((s, c), t);
        }
    }

    let frame_counts = |e: &FrameEval, s: Source| -> Option<Counts> {
        match e.scores.get(&s)? {
            FrameScore::Binary(c) => Some(*c),
            FrameScore::Levels(h) => Some(h.counts(chosen[&(s, e.category)])),
        }
    };

    let mut per_frame = create(&out.join("per_frame.csv"))?;
    writeln!(per_frame, "frame,category,source,threshold,tp,fp,fn,tn,precision,recall,f1")?;
    let mut micro: BTreeMap<(Source, Category), Counts> = BTreeMap::new();
    let mut macro_sum: BTreeMap<(Source, Category), ([f64; 3], usize)> = BTreeMap::new();
    for e in &evals {
        for s in Source::ALL {
            let Some(c) = frame_counts(e, s) else { continue };
            let r = c.result(Some(e.category));
            let t = chosen.get(&(s, e.category)).map(|t| t.to_string()).unwrap_or_default();
            writeln!(
                per_frame,
                "{},{},{},{t},{},{},{},{},{:.6},{:.6},{:.6}",
                e.frame,
                e.category.name(),
                s.file_stem(),
                c.tp,
                c.fp,
                c.fn_,
                c.tn,
                r.precision,
                r.recall,
                r.f1
            )?;
            *micro.entry((s, e.category)).or_default() += c;
            let m = macro_sum.entry((s, e.category)).or_insert(([0.0; 3], 0));
            m.0[0] += r.precision;
            m.0[1] += r.recall;
            m.0[2] += r.f1;
            m.1 += 1;
        }
    }
    per_frame.flush()?;

    let rows = |score: &dyn Fn(Source, Category) -> Option<EvalResult>| -> Vec<ReportRow> {
        Source::ALL
            .iter()
            .map(|&s| ReportRow { source: s.label().to_string(), scores: Category::ALL.map(|c| score(s, c)) })
            .collect()
    };
    let micro_rows = rows(&|s, c| micro.get(&(s, c)).map(|k| k.result(Some(c))));
    let macro_rows = rows(&|s, c| {
        macro_sum.get(&(s, c)).map(|(sum, n)| {
            let mut r = micro[&(s, c)].result(Some(c));
            let n = *n as f64;
            r.precision = sum[0] / n;
            r.recall = sum[1] / n;
            r.f1 = sum[2] / n;
            r
        })
    });
    let mut report = create(&out.join("report.txt"))?;
    writeln!(report, "Pixel counts summed over each category's frames:\n")?;
    write!(report, "{}", format_table(&micro_rows))?;
    writeln!(report, "\nMean of per-frame scores:\n")?;
    write!(report, "{}", format_table(&macro_rows))?;
    writeln!(report, "\nThresholds for confidence masks:")?;
    for ((s, c), t) in &chosen {
        writeln!(report, "  {} {}: {t}", s.label(), c.name())?;
    }
    let n_cat = |c: Category| evals.iter().filter(|e| e.category == c).count();
    writeln!(
        report,
        "\nFrames evaluated: UM {}, UMM {}, UU {}; skipped without ground truth: {skipped}; failed: {}",
        n_cat(Category::Um),
        n_cat(Category::Umm),
        n_cat(Category::Uu),
        outcome.failures.len()
    )?;
    for (f, why) in &outcome.failures {
        writeln!(report, "  {f}: {why}")?;
    }
    report.flush()?;
    outcome.scores = micro.iter().map(|(&(s, c), k)| ((s, c), k.result(Some(c)))).collect();
    Ok(outcome)
}
