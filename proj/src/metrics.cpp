#include "symlight/metrics.hpp"

#include <limits>
#include <vector>

#include <json.hpp>

namespace symlight {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 64;
  if (values.size() <= kLeaf) {
    double s = 0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

void check_shapes(const Image<double>& a, const Image<double>& b, const Image<bool>& mask) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || mask.rows() != a.rows() || mask.cols() != a.cols())
    throw ConfigError("metric inputs must share one size");
}

// Row-major gather of f(i) over masked entries.
template <typename F>
std::vector<double> gather(const Image<bool>& mask, F f) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    if (mask.data()[i]) out.push_back(f(i));
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace

DepthAlignment align_depth(const Image<double>& z_est, const Image<double>& z_gt, const Image<bool>& mask) {
  check_shapes(z_est, z_gt, mask);
  const double* e = z_est.data();
  const double* g = z_gt.data();
  const auto es = gather(mask, [&](Eigen::Index i) { return e[i]; });
  if (es.size() < 2) throw DegenerateFit("depth alignment needs at least two pixels");
  const double n = static_cast<double>(es.size());
  const double mean_e = pairwise_sum(es) / n;
  const double mean_g = mean(gather(mask, [&](Eigen::Index i) { return g[i]; }));
  // Centered moments keep the normal equations well conditioned for depths far from zero.
  const double var = pairwise_sum(gather(mask, [&](Eigen::Index i) { return (e[i] - mean_e) * (e[i] - mean_e); }));
  const double cov = pairwise_sum(gather(mask, [&](Eigen::Index i) { return (e[i] - mean_e) * (g[i] - mean_g); }));
  if (!(var > 0)) throw DegenerateFit("estimated depth is constant over the mask");
  const double a = cov / var;
  return {a, mean_g - a * mean_e};
}

DepthAlignment align_depth_shift(const Image<double>& z_est, const Image<double>& z_gt, const Image<bool>& mask) {
  check_shapes(z_est, z_gt, mask);
  const auto d = gather(mask, [&](Eigen::Index i) { return z_gt.data()[i] - z_est.data()[i]; });
  if (d.empty()) throw DegenerateFit("depth alignment needs at least one pixel");
  return {1.0, mean(d)};
}

Image<double> apply_alignment(const DepthAlignment& alignment, const Image<double>& z_est) {
  return alignment.scale * z_est + alignment.shift;
}

double rel_abs_depth_error(const Image<double>& z_aligned, const Image<double>& z_gt, const Image<bool>& mask,
                           Image<double>* map) {
  check_shapes(z_aligned, z_gt, mask);
  const Image<double> err = (z_aligned - z_gt).abs() / z_gt;
  if (map) *map = mask.select(err, std::numeric_limits<double>::quiet_NaN());
  return mean(gather(mask, [&](Eigen::Index i) { return err.data()[i]; }));
}

double mean_angular_error(const Image3<double>& n_est, const Image3<double>& n_gt, const Image<bool>& mask,
                          Image<double>* map) {
  for (int c = 0; c < 3; ++c) check_shapes(n_est[c], n_gt[c], mask);
  auto error_at = [&](Eigen::Index i) {
    const Vector3<double> a(n_est[0].data()[i], n_est[1].data()[i], n_est[2].data()[i]);
    const Vector3<double> b(n_gt[0].data()[i], n_gt[1].data()[i], n_gt[2].data()[i]);
    return angular_error_deg(a, b);
  };
  if (map) {
    *map = Image<double>::Constant(mask.rows(), mask.cols(), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index i = 0; i < mask.size(); ++i)
      if (mask.data()[i]) map->data()[i] = error_at(i);
  }
  return mean(gather(mask, error_at));
}

EvalReport evaluate(const Image3<double>& n_est, const Image<double>& z_est, const Image<bool>& valid_est,
                    const Image3<double>& n_gt, const Image<double>& z_gt, const Image<bool>& valid_gt,
                    AlignmentMode mode) {
  if (valid_est.rows() != valid_gt.rows() || valid_est.cols() != valid_gt.cols())
    throw ConfigError("estimate and ground truth differ in size");
  const Image<bool> mask = valid_est && valid_gt;
  EvalReport report;
  report.pixel_count = mask.count();
  // Depth-only estimates carry zero normals; those pixels are left out of the angular error.
  const Image<bool> has_normal =
      mask && (n_est[0].square() + n_est[1].square() + n_est[2].square() > 0);
  report.mean_angular_error_deg = mean_angular_error(n_est, n_gt, has_normal, &report.angular_error_map);
  const DepthAlignment al =
      mode == AlignmentMode::affine ? align_depth(z_est, z_gt, mask) : align_depth_shift(z_est, z_gt, mask);
  report.scale = al.scale;
  report.shift = al.shift;
  report.mean_rel_abs_depth_error =
      rel_abs_depth_error(apply_alignment(al, z_est), z_gt, mask, &report.depth_error_map);
  return report;
}

std::string to_json(const EvalReport& report) {
  auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  const nlohmann::json j = {{"mean_angular_error_deg", number(report.mean_angular_error_deg)},
                            {"mean_rel_abs_depth_error", number(report.mean_rel_abs_depth_error)},
                            {"scale", number(report.scale)},
                            {"shift", number(report.shift)},
                            {"pixel_count", report.pixel_count}};
  return j.dump(2);
}

}  // namespace symlight
