#include "pact/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "pact/error.hpp"

namespace pact {

ImageSequence normalize_sequence(const ImageSequence& seq, NormalizationBounds* bounds) {
  require(seq.size() > 0, ErrorCode::invalid_argument, "cannot normalize an empty sequence");
  const auto [lo, hi] = std::minmax_element(seq.values().begin(), seq.values().end());
  const double min = *lo;
  const double range = *hi - *lo;
  require(std::isfinite(range) && range > 0.0, ErrorCode::invalid_argument,
          "cannot normalize a constant sequence");
  if (bounds) *bounds = {min, *hi};
  ImageSequence out = seq;
  for (double& v : out.values()) v = (v - min) / range;
  return out;
}

std::pair<ImageSequence, ImageSequence> normalize_pair(const ImageSequence& y,
                                                       const ImageSequence& yhat) {
  require(y.same_shape(yhat), ErrorCode::shape_mismatch,
          "normalize_pair: sequences have different shapes");
  return {normalize_sequence(y), normalize_sequence(yhat)};
}

namespace {

void check_pair(const ImageSequence& y, const ImageSequence& yhat, const char* what) {
  require(y.same_shape(yhat), ErrorCode::shape_mismatch,
          std::string(what) + ": sequences have different shapes");
}

}  // namespace

FrameScores psnr(const ImageSequence& y, const ImageSequence& yhat) {
  check_pair(y, yhat, "psnr");
  FrameScores out;
  const std::size_t pixels = y.pixels_per_frame();
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t t = 0; t < y.frames(); ++t) {
    const auto a = y.frame(t);
    const auto b = yhat.frame(t);
    double sq = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    const double mse = sq / static_cast<double>(pixels);
    const double db =
        mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse);
    out.per_frame.push_back(db);
    if (std::isinf(db)) {
      ++out.excluded;
    } else {
      sum += db;
      ++counted;
    }
  }
  out.mean = counted ? sum / static_cast<double>(counted) : std::numeric_limits<double>::infinity();
  return out;
}

FrameScores ssim(const ImageSequence& y, const ImageSequence& yhat) {
  check_pair(y, yhat, "ssim");
  FrameScores out;
  const std::size_t pixels = y.pixels_per_frame();
  const double count = static_cast<double>(pixels);
  double sum = 0.0;
  for (std::size_t t = 0; t < y.frames(); ++t) {
    const auto a = y.frame(t);
    const auto b = yhat.frame(t);
    double mu_a = 0.0, mu_b = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) {
      mu_a += a[i];
      mu_b += b[i];
    }
    mu_a /= count;
    mu_b /= count;
    double var_a = 0.0, var_b = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) {
      const double da = a[i] - mu_a;
      const double db = b[i] - mu_b;
      var_a += da * da;
      var_b += db * db;
      cov += da * db;
    }
    var_a /= count;
    var_b /= count;
    cov /= count;
    const double value = ((2.0 * mu_a * mu_b + ssim_c1) * (2.0 * cov + ssim_c2)) /
                         ((mu_a * mu_a + mu_b * mu_b + ssim_c1) * (var_a + var_b + ssim_c2));
    out.per_frame.push_back(value);
    sum += value;
  }
  out.mean = y.frames() ? sum / static_cast<double>(y.frames()) : 0.0;
  return out;
}

EvalReport evaluate(const ImageSequence& reference, const ImageSequence& estimate) {
  check_pair(reference, estimate, "evaluate");
  EvalReport report;
  const ImageSequence y = normalize_sequence(reference, &report.reference_bounds);
  const ImageSequence yhat = normalize_sequence(estimate, &report.estimate_bounds);
  report.psnr = psnr(y, yhat);
  report.ssim = ssim(y, yhat);
  return report;
}

namespace {

// JSON has no infinity; +inf PSNR is written as the string "inf".
nlohmann::json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["frames"] = psnr.per_frame.size();
  j["psnr_db"] = nlohmann::json::array();
  for (double v : psnr.per_frame) j["psnr_db"].push_back(number(v));
  j["ssim"] = ssim.per_frame;
  j["mean_psnr_db"] = number(psnr.mean);
  j["mean_ssim"] = ssim.mean;
  j["psnr_excluded_frames"] = psnr.excluded;
  j["normalization"] = {
      {"reference", {{"min", reference_bounds.min}, {"max", reference_bounds.max}}},
      {"estimate", {{"min", estimate_bounds.min}, {"max", estimate_bounds.max}}},
  };
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "frame,psnr_db,ssim\n";
  for (std::size_t t = 0; t < psnr.per_frame.size(); ++t)
    os << t << ',' << psnr.per_frame[t] << ',' << ssim.per_frame[t] << '\n';
  return os.str();
}

}  // namespace pact
