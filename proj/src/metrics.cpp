#include "splatgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace splatgen {

double metric_psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "metric_psnr");
  if (a.data().empty()) throw std::invalid_argument("metric_psnr: empty image");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.data().size());
  if (mse < 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(size);
  const double center = 0.5 * (size - 1);
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

// Valid-mode separable filtering of a single-channel plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int width,
                                 int height, const std::vector<double>& win) {
  const int k = static_cast<int>(win.size());
  const int ow = width - k + 1;
  const int oh = height - k + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += win[i] * plane[static_cast<std::size_t>(y) * width + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += win[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double metric_ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "metric_ssim");
  if (a.pixel_count() == 0) throw std::invalid_argument("metric_ssim: empty image");
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  const int w = a.width();
  const int h = a.height();
  const int size = std::min({11, w, h});
  const auto win = gaussian_window(size, 1.5);

  double total = 0.0;
  std::size_t count = 0;
  const std::size_t n = a.pixel_count();
  std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
  for (int c = 0; c < a.channels(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = a.data()[i * a.channels() + c];
      const double y = b.data()[i * b.channels() + c];
      pa[i] = x;
      pb[i] = y;
      paa[i] = x * x;
      pbb[i] = y * y;
      pab[i] = x * y;
    }
    const auto mu_a = filter_valid(pa, w, h, win);
    const auto mu_b = filter_valid(pb, w, h, win);
    const auto e_aa = filter_valid(paa, w, h, win);
    const auto e_bb = filter_valid(pbb, w, h, win);
    const auto e_ab = filter_valid(pab, w, h, win);
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i];
      const double mb = mu_b[i];
      const double va = e_aa[i] - ma * ma;
      const double vb = e_bb[i] - mb * mb;
      const double cov = e_ab[i] - ma * mb;
      total += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
               ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    }
    count += mu_a.size();
  }
  return total / static_cast<double>(count);
}

Image constant_mean_image(const Image& img) {
  Image out(img.width(), img.height(), img.channels());
  if (img.pixel_count() == 0) return out;
  for (int c = 0; c < img.channels(); ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < img.pixel_count(); ++i) sum += img.data()[i * img.channels() + c];
    const double mean = sum / static_cast<double>(img.pixel_count());
    for (std::size_t i = 0; i < img.pixel_count(); ++i) out.data()[i * img.channels() + c] = mean;
  }
  return out;
}

namespace {

template <typename F>
double mean_over_depths(const DepthMap& pred, const DepthMap& gt, const char* what,
                        F&& term) {
  if (!pred.depth.same_shape(gt.depth)) {
    throw std::invalid_argument(std::string(what) + ": depth map shapes differ");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.depth.size(); ++i) {
    if (!gt.valid[i] || !pred.valid[i]) continue;
    const double z = gt.depth[i];
    if (!(z > 0.0)) {
      throw std::invalid_argument(std::string(what) + ": non-positive ground-truth depth");
    }
    sum += term(pred.depth[i], z);
    ++n;
  }
  if (n == 0) throw std::invalid_argument(std::string(what) + ": no valid pixels");
  return sum / static_cast<double>(n);
}

}  // namespace

double metric_absrel(const DepthMap& predicted, const DepthMap& ground_truth) {
  return mean_over_depths(predicted, ground_truth, "metric_absrel",
                          [](double zp, double z) { return std::abs(z - zp) / z; });
}

double metric_delta(const DepthMap& predicted, const DepthMap& ground_truth,
                    double eps) {
  return mean_over_depths(predicted, ground_truth, "metric_delta",
                          [eps](double zp, double z) {
                            // max(zp / z, z / zp) < eps without the divisions,
                            // so that zp = eps * z is excluded exactly.
                            return zp < eps * z && z < eps * zp ? 1.0 : 0.0;
                          });
}

double metric_duv(const Pointmap& points, const CameraIntrinsics& intrinsics,
                  const CameraPose& pose) {
  if (points.width() != intrinsics.width || points.height() != intrinsics.height) {
    throw std::invalid_argument("metric_duv: pointmap size differs from camera");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (int v = 0; v < points.height(); ++v) {
    for (int u = 0; u < points.width(); ++u) {
      if (!points.valid(u, v)) continue;
      ++n;
      const auto proj = project_point(intrinsics, pose, points.points(u, v));
      if (!proj) return std::numeric_limits<double>::infinity();
      sum += std::hypot(proj->u - (u + 0.5), proj->v - (v + 0.5));
    }
  }
  if (n == 0) throw std::invalid_argument("metric_duv: no valid points");
  return sum / static_cast<double>(n);
}

DepthMap depth_from_pointmap(const Pointmap& points, const CameraPose& pose) {
  DepthMap d(points.width(), points.height());
  for (std::size_t i = 0; i < points.points.size(); ++i) {
    if (!points.valid[i]) continue;
    const double z = pose.to_camera(points.points[i]).z();
    if (z > 0.0) {
      d.depth[i] = z;
      d.valid[i] = 1;
    }
  }
  return d;
}

}  // namespace splatgen
