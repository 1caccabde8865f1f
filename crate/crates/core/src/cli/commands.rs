use std::f64::consts::PI;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;

use crate::filterbank::{
    ingest_discrete_bank, synthetic_learned_bank, DiscreteFilter, EndstopParams, Endstopped, FeaturePoint, Gabor,
    GaborParams, Profile, SpaceTimePoint, SpatioTemporalParams, SyntheticBankSpec, SeparablePoint,
};
use crate::geometry::{Axis, FeatureGrid, GridField, Measure};
use crate::kernel::{
    discrete_kernel_column, kernel_c_family, kernel_gabor_shifted, kernel_numeric, kernel_spatiotemporal,
    spatiotemporal_norm_sq, truncate_kernel, PatchSpec,
};
use crate::propagation::{
    evolve_activation, generate_pinwheel, iterate_kernel, lift_image, propagate_pinwheel, Init, KernelField,
    Nonlinearity, PinwheelMap, TranslationBank,
};
use crate::viz_export::{
    argmax_feature, cone_mass, curvature_radius, hue_rgb, overlay_threshold, patchiness_report, percentile_positive,
    project_max, read_csv_bank, read_fbank, read_pgm, render_glyph_field, second_moment_anisotropy, write_fbank,
    write_kgrid, write_pgm, write_ppm, GlyphLayout, GrayImage, Projection2D, RgbImage,
};
use crate::{Error, Result};

use super::{Outputs, RunConfig};

fn gabor_params(cfg: &RunConfig) -> Result<GaborParams> {
    GaborParams::new(cfg.f64("lambda")?, cfg.f64("sigma")?)
}

fn nonlinearity(cfg: &RunConfig) -> Result<Nonlinearity> {
    match cfg.str("nonlinearity") {
        "rectifier" => Nonlinearity::rectifier(cfg.f64("tau")?),
        "logistic" => Ok(Nonlinearity::Logistic),
        _ => Err(cfg.reject("nonlinearity", "expected rectifier or logistic")),
    }
}

fn patch(cfg: &RunConfig, gp: &GaborParams) -> Result<Option<PatchSpec>> {
    if !cfg.bool("truncate")? {
        return Ok(None);
    }
    Ok(Some(PatchSpec::new(cfg.opt_f64("patch_lambda")?.unwrap_or(gp.lambda))?))
}

/// `pNN` is the NN-th percentile of the positive values; anything else is an
/// absolute level.
fn threshold(cfg: &RunConfig, values: &[f64]) -> Result<f64> {
    match cfg.str("threshold").strip_prefix('p') {
        Some(p) => {
            let pct: f64 = p.parse().ok().filter(|x| (0.0..=100.0).contains(x)).ok_or_else(|| {
                cfg.reject("threshold", "percentile must lie in [0, 100]")
            })?;
            Ok(percentile_positive(values, pct).unwrap_or(f64::INFINITY))
        }
        None => cfg.f64("threshold"),
    }
}

fn layout(cfg: &RunConfig) -> Result<GlyphLayout> {
    Ok(GlyphLayout {
        size: cfg.usize("glyph_size")?,
        cell: cfg.usize("glyph_cell")?,
        stride: cfg.usize("glyph_stride")?,
        extent: cfg.opt_f64("glyph_extent")?,
    })
}

fn planar_axes(cfg: &RunConfig, half_key: &str) -> Result<(Axis, Axis)> {
    let step = cfg.f64("xy_step")?;
    if half_key == "es_half" {
        let h = cfg.f64("es_half")?;
        return Ok((Axis::symmetric("x", h, step)?, Axis::symmetric("y", h, step)?));
    }
    Ok((Axis::symmetric("x", cfg.f64("x_half")?, step)?, Axis::symmetric("y", cfg.f64("y_half")?, step)?))
}

fn xyt_grid(cfg: &RunConfig) -> Result<FeatureGrid> {
    let (x, y) = planar_axes(cfg, "x_half")?;
    let theta = Axis::symmetric("theta", cfg.f64("theta_half")?, cfg.f64("theta_step")?)?;
    FeatureGrid::new(vec![x, y, theta], Measure::GridCell)
}

fn origin(cfg: &RunConfig) -> Result<FeaturePoint> {
    Ok(FeaturePoint::new(cfg.f64("origin_x")?, cfg.f64("origin_y")?, cfg.f64("origin_theta")?))
}

fn locate(grid: &FeatureGrid, coords: &[f64]) -> Result<usize> {
    grid.locate(coords).ok_or_else(|| Error::GridMismatch(format!("origin {coords:?} is not a grid node")))
}

fn refs(bases: &[Box<dyn Profile>]) -> Vec<&dyn Profile> {
    bases.iter().map(|b| b.as_ref()).collect()
}

fn gabor_bases(gp: &GaborParams, thetas: &[f64]) -> Vec<Box<dyn Profile>> {
    thetas.iter().map(|&t| Box::new(Gabor::new(*gp, FeaturePoint::new(0.0, 0.0, t))) as Box<dyn Profile>).collect()
}

fn endstop_bases(ep: &EndstopParams, thetas: &[f64]) -> Vec<Box<dyn Profile>> {
    thetas
        .iter()
        .map(|&t| Box::new(Endstopped { params: *ep, at: FeaturePoint::new(0.0, 0.0, t) }) as Box<dyn Profile>)
        .collect()
}

fn write_projection(o: &mut Outputs, name: &str, p: &Projection2D) -> Result<()> {
    write_pgm(&o.file(name), &GrayImage::from_projection(p)?)
}

/// Projects a field down to its first two axes and writes the image.
fn write_planar(o: &mut Outputs, name: &str, field: &GridField) -> Result<()> {
    let mut p = Projection2D { field: field.clone(), source: String::new(), axis: String::new() };
    while p.field.grid.axes().len() > 2 {
        let last = p.field.grid.axes().last().expect("axes").name.clone();
        p = project_max(&p.field, &last)?;
    }
    write_projection(o, name, &p)
}

/// Spatial slice of an `(x, y, feature)` field at one feature index.
fn slice(field: &GridField, k: usize) -> Result<GridField> {
    let nf = field.grid.axes()[2].count;
    let values = field.values.iter().skip(k).step_by(nf).copied().collect();
    GridField::new(field.grid.without_axis(2)?, values)
}

pub(super) fn kernel(cfg: &RunConfig, o: &mut Outputs) -> Result<()> {
    let gp = gabor_params(cfg)?;
    let grid = xyt_grid(cfg)?;
    let p0 = origin(cfg)?;
    let points: Vec<FeaturePoint> = (0..grid.len())
        .map(|i| FeaturePoint::new(grid.coord(i, 0), grid.coord(i, 1), grid.coord(i, 2)))
        .collect();
    let values: Vec<f64> = match cfg.str("bank") {
        "gabor" => points.par_iter().map(|p| kernel_gabor_shifted(&gp, p, &p0)).collect(),
        "endstop" => {
            let ep = first_endstop(cfg, &gp)?;
            let delta = gp.sigma / 10.0;
            let at0 = Endstopped { params: ep, at: p0 };
            points
                .par_iter()
                .map(|p| kernel_numeric(&Endstopped { params: ep, at: *p }, &at0, delta))
                .collect::<Result<_>>()?
        }
        _ => return Err(cfg.reject("bank", "the kernel command supports gabor and endstop banks")),
    };
    let mut kf = KernelField::raw(GridField::new(grid.clone(), values)?, vec![p0.x, p0.y, p0.theta]);
    if let Some(ps) = patch(cfg, &gp)? {
        kf = truncate_kernel(&kf, &ps, cfg.opt_f64("truncate_floor")?)?;
    }
    write_kgrid(&o.file("kernel.kgrid"), &kf.field)?;
    write_projection(o, "kernel_max.pgm", &project_max(&kf.field, "theta")?)?;
    let k = grid.axes()[2].nearest(p0.theta);
    write_planar(o, "kernel_slice.pgm", &slice(&kf.field, k)?)?;
    let (lo, hi) = kf.field.min_max();
    o.line(format!("norm {:.9}", gp.norm_sq()));
    if let Some(i) = grid.locate(&[p0.x, p0.y, p0.theta]) {
        o.line(format!("value_at_origin {:.9}", kf.field.values[i]));
    }
    o.line(format!("range {lo:.9} {hi:.9}"));
    o.line(format!("truncated {}", kf.truncated));
    Ok(())
}

fn first_endstop(cfg: &RunConfig, gp: &GaborParams) -> Result<EndstopParams> {
    let lengths = cfg.f64_list("es_lengths")?;
    EndstopParams::with_length(cfg.f64("es_c_short")?, cfg.f64("es_c_long")?, *gp, lengths[0], cfg.f64("es_ratio")?)
}

/// Glyph render of the final step and the cone masses about the preferred
/// axis of the origin filter.
fn association_outputs(
    cfg: &RunConfig,
    o: &mut Outputs,
    last: &GridField,
    glyphs: &[&dyn Profile],
    p0: &FeaturePoint,
    name: &str,
) -> Result<()> {
    let proj = project_max(last, "theta")?;
    let thr = threshold(cfg, proj.values())?;
    let af = argmax_feature(last, "theta", thr)?;
    write_pgm(&o.file(name), &render_glyph_field(&af, glyphs, layout(cfg)?)?)?;
    let axis = p0.theta + PI / 2.0;
    let along = cone_mass(&proj.field, (p0.x, p0.y), axis, PI / 6.0)?;
    let across = cone_mass(&proj.field, (p0.x, p0.y), axis + PI / 2.0, PI / 6.0)?;
    o.line(format!("threshold {thr:.9}"));
    o.line(format!("glyphs {}", af.count()));
    o.line(format!("cone_mass axial {along:.9} orthogonal {across:.9}"));
    Ok(())
}

pub(super) fn propagate(cfg: &RunConfig, o: &mut Outputs) -> Result<()> {
    let gp = gabor_params(cfg)?;
    let grid = xyt_grid(cfg)?;
    let h = nonlinearity(cfg)?;
    let p0 = origin(cfg)?;
    let thetas = grid.axes()[2].values();
    let (mut bank, bases) = match cfg.str("bank") {
        "gabor" => (TranslationBank::gabor(&gp, grid.clone())?, gabor_bases(&gp, &thetas)),
        "endstop" => {
            let bases = endstop_bases(&first_endstop(cfg, &gp)?, &thetas);
            let delta = cfg.f64("xy_step")? / cfg.usize("lattice")?.max(1) as f64;
            (TranslationBank::from_profiles(&refs(&bases), grid.clone(), delta)?, bases)
        }
        _ => return Err(cfg.reject("bank", "propagation supports gabor and endstop banks")),
    };
    if let Some(ps) = patch(cfg, &gp)? {
        bank.truncate(&ps)?;
    }
    let op = bank.operator(h)?;
    let start = locate(&grid, &[p0.x, p0.y, p0.theta])?;
    let steps = iterate_kernel(&op, &grid, start, cfg.usize("steps")?, Init::Normalized)?;
    for f in &steps {
        write_kgrid(&o.file(format!("step_{:02}.kgrid", f.step)), &f.field)?;
        write_projection(o, &format!("step_{:02}_max.pgm", f.step), &project_max(&f.field, "theta")?)?;
        o.line(format!("step {} mass {:.6}", f.step, f.field.integral()));
    }
    let last = &steps.last().expect("at least one step").field;
    association_outputs(cfg, o, last, &refs(&bases), &p0, "association.pgm")
}

fn map_image(map: &PinwheelMap) -> RgbImage {
    let (w, h) = (map.xs.count, map.ys.count);
    let mut pixels = vec![0u8; 3 * w * h];
    for ix in 0..w {
        for iy in 0..h {
            let i = 3 * ((h - 1 - iy) * w + ix);
            pixels[i..i + 3].copy_from_slice(&hue_rgb(map.theta(ix, iy)));
        }
    }
    RgbImage { width: w, height: h, pixels }
}

pub(super) fn pinwheel(cfg: &RunConfig, o: &mut Outputs) -> Result<()> {
    let gp = gabor_params(cfg)?;
    let (half, step) = (cfg.f64("map_half")?, cfg.f64("map_step")?);
    let (xs, ys) = (Axis::symmetric("x", half, step)?, Axis::symmetric("y", half, step)?);
    let k = cfg.opt_f64("wave_number")?.unwrap_or(2.0 * PI / (10.0 * gp.lambda));
    let seed = cfg.u64("seed")?;
    let map = generate_pinwheel(xs, ys, cfg.usize("waves")?, k, seed)?;
    write_ppm(&o.file("map.ppm"), &map_image(&map))?;
    let at0 = (cfg.f64("origin_x")?, cfg.f64("origin_y")?);
    let fields = propagate_pinwheel(&map, &gp, at0, cfg.usize("steps")?, nonlinearity(cfg)?, patch(cfg, &gp)?)?;
    let last = &fields.last().expect("at least one step").field;
    write_kgrid(&o.file("field.kgrid"), last)?;
    let proj = Projection2D { field: last.clone(), source: "pinwheel".into(), axis: String::new() };
    let thr = threshold(cfg, &last.values)?;
    write_ppm(&o.file("overlay.ppm"), &overlay_threshold(&proj, &map, thr, at0)?)?;
    let mask: Vec<bool> = last.values.iter().map(|v| *v > thr).collect();
    let node = (map.xs.nearest(at0.0), map.ys.nearest(at0.1));
    let report = patchiness_report(&map, &mask, node, cfg.usize("trials")?, seed.wrapping_add(1))?;
    o.line(format!("wave_number {k:.9}"));
    o.line(format!("steps {}", fields.len()));
    o.line(format!("threshold {thr:.9}"));
    o.line(format!("suprathreshold {}", report.count));
    o.line(format!("patchiness {:.6}", report.statistic));
    o.line(format!("baseline_p5 {:.6}", report.baseline_p5));
    o.line(format!("baseline_mean {:.6}", report.baseline_mean));
    o.line(format!("patchy {}", report.is_patchy()));
    Ok(())
}

pub(super) fn endstop(cfg: &RunConfig, o: &mut Outputs) -> Result<()> {
    let gp = gabor_params(cfg)?;
    let (x, y) = planar_axes(cfg, "es_half")?;
    let theta = Axis::circle("theta", cfg.usize("es_orientations")?)?;
    let thetas = theta.values();
    let grid = FeatureGrid::new(vec![x, y, theta], Measure::GridCell)?;
    let step = cfg.f64("xy_step")?;
    let delta = step / cfg.usize("lattice")?.max(1) as f64;
    let (cs, cl, ratio) = (cfg.f64("es_c_short")?, cfg.f64("es_c_long")?, cfg.f64("es_ratio")?);
    if !(cs > cl) {
        return Err(cfg.reject("es_c_short", "endstopping needs es_c_short > es_c_long"));
    }
    let mut banks: Vec<(String, Vec<Box<dyn Profile>>)> = Vec::new();
    let plain = gp.with_aspect(cfg.f64("es_plain_length")? / gp.sigma)?;
    banks.push(("plain".into(), gabor_bases(&plain, &thetas)));
    for l in cfg.f64_list("es_lengths")? {
        let ep = EndstopParams::with_length(cs, cl, gp, l, ratio)?;
        banks.push((format!("{l}"), endstop_bases(&ep, &thetas)));
    }
    let h = nonlinearity(cfg)?;
    let ps = patch(cfg, &gp)?;
    let start = locate(&grid, &[0.0, 0.0, 0.0])?;
    let mut radii = Vec::new();
    for (name, bases) in &banks {
        let mut bank = TranslationBank::from_profiles(&refs(bases), grid.clone(), delta)?;
        if let Some(ps) = &ps {
            bank.truncate(ps)?;
        }
        let op = bank.operator(h)?;
        let steps = iterate_kernel(&op, &grid, start, cfg.usize("steps")?, Init::Normalized)?;
        let last = &steps.last().expect("at least one step").field;
        let proj = project_max(last, "theta")?;
        let thr = threshold(cfg, proj.values())?;
        let af = argmax_feature(last, "theta", thr)?;
        let r = curvature_radius(&af, (0.0, 0.0), 0.0, 1.5 * step)?;
        write_pgm(&o.file(format!("es_{name}.pgm")), &render_glyph_field(&af, &refs(bases), layout(cfg)?)?)?;
        write_projection(o, &format!("es_{name}_max.pgm"), &proj)?;
        o.line(format!("radius {name} {r:.6}"));
        radii.push(r);
    }
    let es = &radii[1..];
    let monotone = es.windows(2).all(|w| w[1] <= w[0]);
    let widest = es.iter().copied().fold(0.0, f64::max);
    o.line(format!("monotone {monotone}"));
    o.line(format!("plain_over_es {:.6}", radii[0] / widest));
    Ok(())
}

pub(super) fn spatiotemporal(cfg: &RunConfig, o: &mut Outputs) -> Result<()> {
    let gp = gabor_params(cfg)?;
    let sp = SpatioTemporalParams::new(gp, cfg.f64("beta")?)?;
    let (x, y) = planar_axes(cfg, "x_half")?;
    let theta = Axis::symmetric("theta", cfg.f64("theta_half")?, cfg.f64("theta_step")?)?;
    let alpha = Axis::symmetric("alpha", cfg.f64("alpha_half")?, cfg.f64("alpha_step")?)?;
    let grid = FeatureGrid::new(vec![x, y, theta, alpha], Measure::GridCell)?;
    let p0 = SpaceTimePoint { at: origin(cfg)?, t: 0.0, alpha: cfg.f64("origin_alpha")? };
    let c = cfg.opt_f64("c_weight")?;
    let q0 = c.map(|c| SeparablePoint::new(p0, c)).transpose()?;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let c4 = grid.coords(i);
            let p = SpaceTimePoint { at: FeaturePoint::new(c4[0], c4[1], c4[2]), t: 0.0, alpha: c4[3] };
            match (c, q0) {
                (Some(c), Some(q0)) => kernel_c_family(&sp, &SeparablePoint::new(p, c)?, &q0),
                _ => kernel_spatiotemporal(&sp, &p, &p0),
            }
        })
        .collect::<Result<_>>()?;
    let field = GridField::new(grid.clone(), values)?;
    write_kgrid(&o.file("kernel.kgrid"), &field)?;
    let over_alpha = project_max(&field, "alpha")?;
    let over_theta = project_max(&field, "theta")?;
    write_kgrid(&o.file("proj_xyt.kgrid"), &over_alpha.field)?;
    write_kgrid(&o.file("proj_xya.kgrid"), &over_theta.field)?;
    write_planar(o, "proj_xyt.pgm", &over_alpha.field)?;
    write_planar(o, "proj_xya.pgm", &over_theta.field)?;
    o.line(format!("norm {:.9}", spatiotemporal_norm_sq(&sp)));
    if let Some(i) = grid.locate(&[p0.at.x, p0.at.y, p0.at.theta, p0.alpha]) {
        o.line(format!("value_at_origin {:.9}", field.values[i]));
    }
    Ok(())
}

fn image_array(img: &GrayImage) -> Array2<f64> {
    Array2::from_shape_fn((img.height, img.width), |(r, c)| img.get(r, c) as f64 / 255.0)
}

pub(super) fn lift_evolve(cfg: &RunConfig, o: &mut Outputs) -> Result<()> {
    let path = cfg.opt_str("image").ok_or_else(|| cfg.reject("image", "lift-evolve needs image=<path to a P5 PGM>"))?;
    let img = image_array(&read_pgm(Path::new(path))?);
    let gp = gabor_params(cfg)?;
    let grid = xyt_grid(cfg)?;
    let h = nonlinearity(cfg)?;
    let bases = gabor_bases(&gp, &grid.axes()[2].values());
    let lifted = lift_image(&img, cfg.f64("pixel")?, &refs(&bases), &grid, h)?;
    let mut bank = TranslationBank::gabor(&gp, grid)?;
    if let Some(ps) = patch(cfg, &gp)? {
        bank.truncate(&ps)?;
    }
    let op = bank.operator(h)?;
    for a in evolve_activation(&op, &lifted, cfg.usize("steps")?)? {
        write_kgrid(&o.file(format!("act_{:02}.kgrid", a.step)), &a.field)?;
        write_projection(o, &format!("act_{:02}_max.pgm", a.step), &project_max(&a.field, "theta")?)?;
        o.line(format!("step {} integral {:.9}", a.step, a.field.integral()));
    }
    Ok(())
}

fn load_bank(cfg: &RunConfig) -> Result<(Vec<DiscreteFilter>, Option<Vec<f64>>)> {
    match cfg.opt_str("bank_file") {
        Some(f) if f.ends_with(".manifest") => Ok((read_csv_bank(Path::new(f))?, None)),
        Some(f) => Ok((read_fbank(Path::new(f))?, None)),
        None => {
            let spec = SyntheticBankSpec {
                count: cfg.usize("learned_count")?,
                size: cfg.usize("learned_size")?,
                seed: cfg.u64("seed")?,
                ..SyntheticBankSpec::default()
            };
            let (bank, stripes) = synthetic_learned_bank(&spec)?;
            Ok((bank, Some(stripes)))
        }
    }
}

pub(super) fn learned(cfg: &RunConfig, o: &mut Outputs) -> Result<()> {
    if cfg.bool("truncate")? {
        // the patch test needs an orientation axis, which learned banks lack
        return Err(cfg.reject("truncate", "learned banks have no orientation axis to truncate on"));
    }
    let (raw, stripes) = load_bank(cfg)?;
    let bank = ingest_discrete_bank(&raw, cfg.usize("pad")?, cfg.usize("crop")?)?;
    write_fbank(&o.file("bank.fbank"), &bank)?;
    let f0 = cfg.usize("learned_feature")?;
    let column = discrete_kernel_column(&bank, f0)?;
    write_kgrid(&o.file("kernel.kgrid"), &column)?;
    let proj = project_max(&column, "feature")?;
    write_projection(o, "kernel_max.pgm", &proj)?;
    let thr = threshold(cfg, proj.values())?;
    let af = argmax_feature(&column, "feature", thr)?;
    let placed: Vec<_> = bank.iter().map(|f| f.placed(0.0, 0.0)).collect();
    let glyphs: Vec<&dyn Profile> = placed.iter().map(|p| p as &dyn Profile).collect();
    write_pgm(&o.file("association.pgm"), &render_glyph_field(&af, &glyphs, layout(cfg)?)?)?;
    o.line(format!("support {}x{}", proj.width(), proj.height()));
    let shapes: Vec<_> = (0..bank.len())
        .into_par_iter()
        .map(|f| -> Result<_> {
            let proj = project_max(&discrete_kernel_column(&bank, f)?, "feature")?;
            let thr = threshold(cfg, proj.values())?;
            second_moment_anisotropy(&proj, thr, (0.0, 0.0))
        })
        .collect::<Result<_>>()?;
    let mut min_ratio = f64::INFINITY;
    for (f, a) in shapes.iter().enumerate() {
        min_ratio = min_ratio.min(a.ratio);
        match &stripes {
            Some(s) => o.line(format!("feature {f} ratio {:.4} axis {:.4} stripe {:.4}", a.ratio, a.major_axis, s[f])),
            None => o.line(format!("feature {f} ratio {:.4} axis {:.4}", a.ratio, a.major_axis)),
        }
    }
    let elongated = shapes.iter().filter(|a| a.ratio >= 1.5).count();
    o.line(format!("min_ratio {min_ratio:.4}"));
    o.line(format!("elongated {elongated}/{}", shapes.len()));
    Ok(())
}
