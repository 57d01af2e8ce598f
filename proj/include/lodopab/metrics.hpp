#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "lodopab/array.hpp"
#include "lodopab/image.hpp"

namespace lodopab {

/// PSNR in dB with data-range normalization:
/// 10 log10(range(gt)^2 / MSE), range(gt) = max(gt) - min(gt).
/// Returns +inf when recon == gt; throws ContractError when gt is
/// constant (the metric is undefined).
double psnr(const Array2d<double>& recon, const Array2d<double>& gt);
double psnr(const Image& recon, const Image& gt);

/// Mean SSIM over all fully interior 7x7 windows (stride 1, uniform
/// weights, population variances), with C1 = (0.01 L)^2, C2 = (0.03 L)^2
/// and L = max(gt) - min(gt). Throws ContractError when the image is
/// smaller than the window or L = 0.
double ssim(const Array2d<double>& recon, const Array2d<double>& gt);
double ssim(const Image& recon, const Image& gt);

struct SampleMetrics {
  std::size_t index = 0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// Per-sample metric values plus their arithmetic means.
struct MetricReport {
  std::vector<SampleMetrics> samples;
  double mean_psnr_db = 0.0;
  double mean_ssim = 0.0;
};

MetricReport aggregate(std::vector<SampleMetrics> samples);

/// CSV with one row per sample (index, psnr_db, ssim) and a final summary
/// row labelled "mean".
void write_metric_csv(const MetricReport& report,
                      const std::filesystem::path& path);

}  // namespace lodopab
