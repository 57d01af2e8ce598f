#include "lodopab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "lodopab/errors.hpp"

namespace lodopab {

namespace {

constexpr int kSsimWindow = 7;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

std::pair<double, double> value_range(const Array2d<double>& a) {
  double lo = a.data()[0], hi = a.data()[0];
  for (std::size_t i = 1; i < a.size(); ++i) {
    lo = std::min(lo, a.data()[i]);
    hi = std::max(hi, a.data()[i]);
  }
  return {lo, hi};
}

}  // namespace

double psnr(const Array2d<double>& recon, const Array2d<double>& gt) {
  if (!recon.same_shape(gt)) throw ContractError("psnr: shape mismatch");
  if (gt.empty()) throw ContractError("psnr: empty images");

  const auto [lo, hi] = value_range(gt);
  const double range = hi - lo;
  if (range == 0.0)
    throw ContractError("psnr: undefined for a constant ground truth");

  double mse = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double d = recon.data()[i] - gt.data()[i];
    mse += d * d;
  }
  mse /= static_cast<double>(gt.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(range * range / mse);
}

double ssim(const Array2d<double>& recon, const Array2d<double>& gt) {
  if (!recon.same_shape(gt)) throw ContractError("ssim: shape mismatch");
  const int rows = static_cast<int>(gt.rows());
  const int cols = static_cast<int>(gt.cols());
  if (rows < kSsimWindow || cols < kSsimWindow)
    throw ContractError("ssim: image smaller than the 7x7 window");

  const auto [lo, hi] = value_range(gt);
  const double data_range = hi - lo;
  if (data_range == 0.0)
    throw ContractError("ssim: undefined for a constant ground truth");
  const double c1 = (kSsimK1 * data_range) * (kSsimK1 * data_range);
  const double c2 = (kSsimK2 * data_range) * (kSsimK2 * data_range);

  // Summed-area tables over (recon, gt, squares, cross term).
  const int sr = rows + 1, sc = cols + 1;
  Array2d<double> s_r(sr, sc, 0.0), s_g(sr, sc, 0.0), s_rr(sr, sc, 0.0),
      s_gg(sr, sc, 0.0), s_rg(sr, sc, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x = recon(r, c), y = gt(r, c);
      s_r(r + 1, c + 1) = x + s_r(r, c + 1) + s_r(r + 1, c) - s_r(r, c);
      s_g(r + 1, c + 1) = y + s_g(r, c + 1) + s_g(r + 1, c) - s_g(r, c);
      s_rr(r + 1, c + 1) = x * x + s_rr(r, c + 1) + s_rr(r + 1, c) - s_rr(r, c);
      s_gg(r + 1, c + 1) = y * y + s_gg(r, c + 1) + s_gg(r + 1, c) - s_gg(r, c);
      s_rg(r + 1, c + 1) = x * y + s_rg(r, c + 1) + s_rg(r + 1, c) - s_rg(r, c);
    }
  }
  auto window_sum = [&](const Array2d<double>& s, int r, int c) {
    return s(r + kSsimWindow, c + kSsimWindow) - s(r, c + kSsimWindow) -
           s(r + kSsimWindow, c) + s(r, c);
  };

  const double inv_n = 1.0 / (kSsimWindow * kSsimWindow);
  double total = 0.0;
  long windows = 0;
  for (int r = 0; r + kSsimWindow <= rows; ++r) {
    for (int c = 0; c + kSsimWindow <= cols; ++c) {
      const double mu_r = window_sum(s_r, r, c) * inv_n;
      const double mu_g = window_sum(s_g, r, c) * inv_n;
      // Population variances (divide by the window pixel count).
      const double var_r = window_sum(s_rr, r, c) * inv_n - mu_r * mu_r;
      const double var_g = window_sum(s_gg, r, c) * inv_n - mu_g * mu_g;
      const double cov = window_sum(s_rg, r, c) * inv_n - mu_r * mu_g;
      const double num = (2.0 * mu_r * mu_g + c1) * (2.0 * cov + c2);
      const double den =
          (mu_r * mu_r + mu_g * mu_g + c1) * (var_r + var_g + c2);
      total += num / den;
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

double psnr(const Image& recon, const Image& gt) {
  return psnr(recon.values, gt.values);
}

double ssim(const Image& recon, const Image& gt) {
  return ssim(recon.values, gt.values);
}

MetricReport aggregate(std::vector<SampleMetrics> samples) {
  MetricReport report;
  report.samples = std::move(samples);
  if (report.samples.empty()) return report;
  double sp = 0.0, ss = 0.0;
  for (const auto& s : report.samples) {
    sp += s.psnr_db;
    ss += s.ssim;
  }
  report.mean_psnr_db = sp / static_cast<double>(report.samples.size());
  report.mean_ssim = ss / static_cast<double>(report.samples.size());
  return report;
}

void write_metric_csv(const MetricReport& report,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "index,psnr_db,ssim\n";
  out.precision(9);
  for (const auto& s : report.samples)
    out << s.index << "," << s.psnr_db << "," << s.ssim << "\n";
  out << "mean," << report.mean_psnr_db << "," << report.mean_ssim << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace lodopab
