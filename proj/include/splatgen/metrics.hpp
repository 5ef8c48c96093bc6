#pragma once

#include "splatgen/geometry.hpp"
#include "splatgen/grid.hpp"

namespace splatgen {

/// Images are assumed to lie in [0, 1].
inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE), capped at kPsnrCap dB when MSE < 1e-10.
double metric_psnr(const Image& a, const Image& b);

/// Mean SSIM over channels and all window positions that fit inside the
/// image. 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2, C2 = 0.03^2. The
/// window shrinks to the image when the image is smaller.
double metric_ssim(const Image& a, const Image& b);

/// Image of the same shape filled with the per-channel mean of `img`.
Image constant_mean_image(const Image& img);

/// mean |z - z_hat| / z over pixels valid in both maps.
double metric_absrel(const DepthMap& predicted, const DepthMap& ground_truth);

/// Fraction of pixels (valid in both) with max(z_hat / z, z / z_hat) < eps.
double metric_delta(const DepthMap& predicted, const DepthMap& ground_truth,
                    double eps = 1.01);

/// Mean pixel distance between each valid point's projection and its own
/// pixel center. Points behind the camera make the result +inf.
double metric_duv(const Pointmap& points, const CameraIntrinsics& intrinsics,
                  const CameraPose& pose);

/// Camera-frame z of each valid point; non-positive depths become invalid.
DepthMap depth_from_pointmap(const Pointmap& points, const CameraPose& pose);

}  // namespace splatgen
