#include "symlight/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "symlight/config.hpp"
#include "symlight/constraints.hpp"
#include "symlight/image_io.hpp"
#include "symlight/metrics.hpp"
#include "symlight/oracle.hpp"
#include "symlight/render.hpp"
#include "symlight/solver.hpp"

namespace fs = std::filesystem;

namespace symlight {

namespace {

constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();

Falloff parse_falloff(const std::string& s) { return s == "cubic" ? Falloff::cubic : Falloff::relaxed; }

const char* falloff_name(Falloff f) { return f == Falloff::cubic ? "cubic" : "relaxed"; }

// Renderer and oracle need absolute light positions; a missing offset_truth means the rig is centered on the camera.
SymmetricRig<double> metric(SymmetricRig<double> rig) {
  if (!rig.absolute_radius) throw RigNotMetric();
  if (!rig.offset_truth) rig.offset_truth = Vector3<double>::Zero();
  return rig;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string light_file(int light) {
  return "light_" + std::to_string(light / 2) + (light % 2 == 0 ? "_p" : "_m") + ".pfm";
}

Image<bool> read_mask(const fs::path& path) { return read_png_gray(path) > 0; }

Image<std::uint8_t> mask_png(const Image<bool>& mask) { return mask.select(Image<std::uint8_t>::Constant(mask.rows(), mask.cols(), 255), 0); }

std::uint8_t to_byte(double x) { return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); }

struct Dataset {
  Manifest manifest;
  std::vector<Image<float>> images;
  Image<bool> mask;
};

Dataset load_dataset(const fs::path& manifest_path, const SymmetricRig<double>& rig) {
  Dataset d;
  d.manifest = load_manifest(manifest_path);
  if (static_cast<int>(d.manifest.images.size()) != rig.n_lights())
    throw ConfigError("manifest lists " + std::to_string(d.manifest.images.size()) + " images but the rig has " +
                      std::to_string(rig.n_lights()) + " lights");
  const auto& cam = d.manifest.camera;
  for (const auto& im : d.manifest.images) {
    d.images.push_back(read_pfm(d.manifest.resolve(im.path)));
    if (d.images.back().rows() != cam.height || d.images.back().cols() != cam.width)
      throw ConfigError("image " + im.path + " does not match the camera size");
  }
  if (d.manifest.mask) {
    d.mask = read_mask(d.manifest.resolve(*d.manifest.mask));
    if (d.mask.rows() != cam.height || d.mask.cols() != cam.width)
      throw ConfigError("mask does not match the camera size");
  }
  return d;
}

// ---- render ----

struct RenderArgs {
  std::string scene, rig, camera, falloff = "cubic", out;
};

int cmd_render(const RenderArgs& a, std::ostream& out) {
  const Scene scene = load_scene(a.scene);
  const SymmetricRig<double> rig = metric(load_rig(a.rig));
  const CameraIntrinsics<double> camera = load_camera(a.camera);
  const Falloff falloff = parse_falloff(a.falloff);
  const auto stack = render<float>(scene, rig, camera, falloff);

  const fs::path dir(a.out);
  make_dir(dir);
  Manifest manifest;
  manifest.camera = camera;
  for (int i = 0; i < rig.n_lights(); ++i) {
    write_pfm(dir / light_file(i), stack.images[static_cast<std::size_t>(i)]);
    manifest.images.push_back({i / 2, i % 2 == 0 ? LightSign::plus : LightSign::minus, light_file(i)});
  }
  write_pfm(dir / "gt_normal.pfm", stack.gt_normal);
  write_pfm(dir / "gt_depth.pfm", stack.gt_depth);
  write_png(dir / "mask.png", mask_png(stack.mask));
  manifest.mask = "mask.png";
  manifest.gt_normal = "gt_normal.pfm";
  manifest.gt_depth = "gt_depth.pfm";
  manifest.normal_convention = kNormalConvention;
  manifest.provenance = {{"renderer", {{"falloff", falloff_name(falloff)}, {"scene", load_json(a.scene)}, {"rig", to_json(rig)}}}};
  if (stack.mask.any())
    manifest.nominal_distance = median_light_distance(stack.gt_depth.cast<double>(), stack.mask, rig, camera);
  save_json(dir / "manifest.json", to_json(manifest));
  out << "rendered " << rig.n_lights() << " images (" << stack.mask.count() << " valid pixels) to " << dir.string()
      << '\n';
  return kExitOk;
}

// ---- solve ----

struct SolveArgs {
  std::string manifest, rig, out;
  double shadow_threshold = 1e-4;
  double rank_tol = 1e-8;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const SymmetricRig<double> rig = load_rig(a.rig);
  const ArrangementClass cls = classify_arrangement(rig);
  if (!cls.solvable()) throw UnsupportedArrangement(std::string(to_string(cls.kind)) + ": " + cls.diagnostic);
  const Dataset data = load_dataset(a.manifest, rig);
  const auto& camera = data.manifest.camera;

  SolveOptions options;
  options.shadow_threshold = a.shadow_threshold;
  options.rank_tol = a.rank_tol;
  const auto map = solve_image<double, float>(data.images, data.mask, rig, camera, options);

  const int h = camera.height, w = camera.width;
  const double unit = rig.absolute_radius.value_or(1.0);
  Image3<float> normal = make_image3<float>(h, w, kNaN);
  Image<float> depth = Image<float>::Constant(h, w, kNaN);
  Image<float> albedo = Image<float>::Constant(h, w, kNaN);
  Image<std::uint8_t> status(h, w);
  Image3<std::uint8_t> vis = make_image3<std::uint8_t>(h, w, 0);
  long counts[4] = {0, 0, 0, 0};
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const auto& s = map.at(u, v);
      status(v, u) = static_cast<std::uint8_t>(s.status);
      ++counts[static_cast<int>(s.status)];
      if (s.status != PixelStatus::ok) continue;
      depth(v, u) = static_cast<float>(unit * s.x_r.z());
      if (!s.has_normal) continue;
      albedo(v, u) = static_cast<float>(s.scaled_albedo);
      for (int c = 0; c < 3; ++c) normal[c](v, u) = static_cast<float>(s.normal(c));
      vis[0](v, u) = to_byte((s.normal.x() + 1) / 2);
      vis[1](v, u) = to_byte((s.normal.y() + 1) / 2);
      vis[2](v, u) = to_byte((-s.normal.z() + 1) / 2);
    }

  const fs::path dir(a.out);
  make_dir(dir);
  write_pfm(dir / "normal.pfm", normal);
  write_pfm(dir / "depth.pfm", depth);
  write_pfm(dir / "albedo.pfm", albedo);
  write_png(dir / "status.png", status);
  write_png(dir / "normal_vis.png", vis);

  Json info = {
      {"arrangement", to_string(cls.kind)},
      {"depth_units", rig.absolute_radius ? "scene units" : "normalized units"},
      {"depth_reference", "z measured from the light plane"},
      {"albedo", "rho / r"},
      {"normal_convention", kNormalConvention},
      {"status_codes", {{"0", "ok"}, {"1", "shadowed"}, {"2", "sign_conflict"}, {"3", "degenerate"}}},
      {"pixel_counts", {{"ok", counts[0]}, {"shadowed", counts[1]}, {"sign_conflict", counts[2]}, {"degenerate", counts[3]}}},
      {"shadow_threshold", a.shadow_threshold},
      {"rank_tol", a.rank_tol}};
  if (!rig.absolute_radius) info["note"] = "normalized units";
  save_json(dir / "solve_manifest.json", info);
  out << "solved " << to_string(cls.kind) << ": ok " << counts[0] << ", shadowed " << counts[1] << ", sign_conflict "
      << counts[2] << ", degenerate " << counts[3] << '\n';
  return kExitOk;
}

// ---- eval ----

struct EvalArgs {
  std::string estimate, gt, out, alignment = "affine";
};

Image3<double> to_double(const Image3<float>& n) { return {n[0].cast<double>(), n[1].cast<double>(), n[2].cast<double>()}; }

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const fs::path est(a.estimate), gt(a.gt);
  for (const fs::path& f : {est / "normal.pfm", est / "depth.pfm", gt / "gt_normal.pfm", gt / "gt_depth.pfm"})
    if (!fs::is_regular_file(f)) throw IoError("missing file: " + f.string());

  const Image3<double> n_est = to_double(read_pfm3(est / "normal.pfm"));
  const Image<double> z_est = read_pfm(est / "depth.pfm").cast<double>();
  const Image3<double> n_gt = to_double(read_pfm3(gt / "gt_normal.pfm"));
  const Image<double> z_gt = read_pfm(gt / "gt_depth.pfm").cast<double>();
  if (z_est.rows() != z_gt.rows() || z_est.cols() != z_gt.cols())
    throw ConfigError("estimate and ground truth differ in size");

  Image<bool> valid_est = z_est.isFinite();
  if (fs::is_regular_file(est / "status.png")) valid_est = valid_est && (read_png_gray(est / "status.png") == 0);
  Image<bool> valid_gt = z_gt.isFinite() && (z_gt > 0);
  if (fs::is_regular_file(gt / "mask.png")) valid_gt = valid_gt && read_mask(gt / "mask.png");

  const auto mode = a.alignment == "shift" ? AlignmentMode::shift : AlignmentMode::affine;
  const EvalReport report = evaluate(n_est, z_est, valid_est, n_gt, z_gt, valid_gt, mode);

  const fs::path dir = a.out.empty() ? est : fs::path(a.out);
  make_dir(dir);
  const std::string text = to_json(report);
  {
    std::ofstream os(dir / "report.json");
    os << text << '\n';
    if (!os) throw IoError("write failed: " + (dir / "report.json").string());
  }
  write_pfm(dir / "angular_error.pfm", Image<float>(report.angular_error_map.cast<float>()));
  write_pfm(dir / "depth_error.pfm", Image<float>(report.depth_error_map.cast<float>()));
  out << text << '\n';
  return kExitOk;
}

// ---- check ----

struct CheckArgs {
  std::string rig;
  std::uint64_t seed = 7;
};

// Random surface point in front of the rig, lit by every light, rendered with the relaxed model.
PixelStack<double> probe_pixel(const SymmetricRig<double>& rig, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const Vector3<double> offset = rig.offset_mode == OffsetMode::xyz    ? Vector3<double>(0.3, 0.4, 0.5)
                                 : rig.offset_mode == OffsetMode::z_only ? Vector3<double>(0, 0, 0.5)
                                                                         : Vector3<double>::Zero();
  for (;;) {
    const Vector3<double> x_r(0.5 * uni(rng), 0.5 * uni(rng), 4.0 + 2.0 * uni(rng));
    const Vector3<double> n = Vector3<double>(0.3 * uni(rng), 0.3 * uni(rng), -1.0).normalized();
    const double rho = 0.6 + 0.4 * uni(rng);
    VectorX<double> m(rig.n_lights());
    bool lit = true;
    for (int i = 0; i < rig.n_lights(); ++i) {
      const Vector3<double> d = rig.relative_light(i) - x_r;
      m(i) = rho * d.dot(n) / d.squaredNorm();
      lit = lit && m(i) > 0;
    }
    if (!lit) continue;
    const Vector3<double> x = x_r + offset;
    PixelStack<double> stack;
    stack.intensities = m;
    stack.normalized = x.head<2>() / x.z();
    return stack;
  }
}

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const SymmetricRig<double> rig = load_rig(a.rig);
  const ArrangementClass cls = classify_arrangement(rig);
  const int n = rig.n_pairs();
  out << "class: " << to_string(cls.kind) << '\n';
  out << "diagnostic: " << cls.diagnostic << '\n';
  out << "predicted ranks (full arrangement): rank A = " << 2 * n - 3 << ", rank [A; A'] = " << 2 * n - 1 << '\n';
  const auto layout = make_layout(rig);
  const auto system = build_system(layout, probe_pixel(rig, a.seed));
  out << "measured ranks (probe seed " << a.seed << "): rank A = " << numeric_rank(system.A.rows)
      << ", rank [A; A'] = " << numeric_rank(system.stacked()) << '\n';
  return cls.solvable() ? kExitOk : kExitUnsupported;
}

// ---- oracle ----

struct OracleArgs {
  std::string manifest, rig, out, falloff = "relaxed";
  std::optional<double> grid_min, grid_max;
  int grid_steps = 10000;
  double shadow_threshold = 1e-4;
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  const SymmetricRig<double> rig = metric(load_rig(a.rig));
  const Dataset data = load_dataset(a.manifest, rig);
  DepthGrid grid;
  if (a.grid_min && a.grid_max) {
    grid = {*a.grid_min, *a.grid_max, a.grid_steps};
  } else if (!a.grid_min && !a.grid_max && data.manifest.nominal_distance) {
    grid = DepthGrid::around(*data.manifest.nominal_distance, a.grid_steps);
  } else {
    throw ConfigError("oracle: give both --grid-min and --grid-max, or a manifest with nominal_distance");
  }
  const auto maps =
      brute_force_image(data.images, data.mask, rig, data.manifest.camera, grid, parse_falloff(a.falloff),
                        a.shadow_threshold);

  const fs::path dir(a.out);
  make_dir(dir);
  Image3<float> normal = maps.normal;
  for (auto& c : normal) c = maps.valid.select(c, kNaN);
  write_pfm(dir / "oracle_depth.pfm", Image<float>(maps.valid.select(maps.depth, kNaN)));
  write_pfm(dir / "oracle_normal.pfm", normal);
  write_pfm(dir / "oracle_residual.pfm", Image<float>(maps.valid.select(maps.residual, kNaN)));
  out << "oracle: " << maps.valid.count() << " pixels searched over [" << grid.z_min << ", " << grid.z_max << "] in "
      << grid.steps << " steps\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Near-light photometric stereo with symmetric light pairs", "symlight"};
  app.require_subcommand(1);
  const std::vector<std::string> falloffs{"cubic", "relaxed"};

  RenderArgs ra;
  auto* render_cmd = app.add_subcommand("render", "Render a synthetic dataset with ground truth");
  render_cmd->add_option("--scene", ra.scene, "Scene JSON")->required();
  render_cmd->add_option("--rig", ra.rig, "Rig JSON (needs absolute_radius)")->required();
  render_cmd->add_option("--camera", ra.camera, "Camera JSON")->required();
  render_cmd->add_option("--falloff", ra.falloff, "Light fall-off model")->check(CLI::IsMember(falloffs));
  render_cmd->add_option("--out", ra.out, "Output directory")->required();

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Recover normals, depth and albedo");
  solve_cmd->add_option("--manifest", sa.manifest, "Dataset manifest")->required();
  solve_cmd->add_option("--rig", sa.rig, "Rig JSON")->required();
  solve_cmd->add_option("--out", sa.out, "Output directory")->required();
  solve_cmd->add_option("--shadow-threshold", sa.shadow_threshold, "Relative intensity below which a pixel is shadowed")
      ->capture_default_str();
  solve_cmd->add_option("--rank-tol", sa.rank_tol, "Relative singular value tolerance")->capture_default_str();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Compare an estimate with ground truth");
  eval_cmd->add_option("--estimate", ea.estimate, "Directory with normal.pfm, depth.pfm[, status.png]")->required();
  eval_cmd->add_option("--gt", ea.gt, "Directory with gt_normal.pfm, gt_depth.pfm[, mask.png]")->required();
  eval_cmd->add_option("--out", ea.out, "Report directory (default: the estimate directory)");
  eval_cmd->add_option("--alignment", ea.alignment, "Depth alignment")
      ->check(CLI::IsMember({"affine", "shift"}))
      ->capture_default_str();

  CheckArgs ca;
  auto* check_cmd = app.add_subcommand("check", "Classify a rig and probe constraint ranks");
  check_cmd->add_option("--rig", ca.rig, "Rig JSON")->required();
  check_cmd->add_option("--seed", ca.seed, "Probe pixel seed")->capture_default_str();

  OracleArgs oa;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force depth search with calibrated lights");
  oracle_cmd->add_option("--manifest", oa.manifest, "Dataset manifest")->required();
  oracle_cmd->add_option("--rig", oa.rig, "Rig JSON (needs absolute_radius)")->required();
  oracle_cmd->add_option("--out", oa.out, "Output directory")->required();
  oracle_cmd->add_option("--falloff", oa.falloff, "Fall-off model of the search")
      ->check(CLI::IsMember(falloffs))
      ->capture_default_str();
  oracle_cmd->add_option("--grid-min", oa.grid_min, "Smallest depth");
  oracle_cmd->add_option("--grid-max", oa.grid_max, "Largest depth");
  oracle_cmd->add_option("--grid-steps", oa.grid_steps, "Number of depth samples")->capture_default_str();
  oracle_cmd->add_option("--shadow-threshold", oa.shadow_threshold, "Relative intensity below which a pixel is skipped")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*render_cmd) return cmd_render(ra, out);
    if (*solve_cmd) return cmd_solve(sa, out);
    if (*eval_cmd) return cmd_eval(ea, out);
    if (*check_cmd) return cmd_check(ca, out);
    if (*oracle_cmd) return cmd_oracle(oa, out);
  } catch (const UnsupportedArrangement& e) {
    err << "unsupported arrangement: " << e.what() << '\n';
    return kExitUnsupported;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const RigNotMetric& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace symlight
