#include "wieat/chew_swallow.hpp"

#include "wieat/error.hpp"
#include "wieat/spectral.hpp"
#include "wieat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wieat {

namespace {

MatrixXd interval_rows(const CsiTrace& trace, const ActivitySegment& interval) {
  if (interval.start_idx < 0 || interval.end_idx > trace.samples() || interval.end_idx <= interval.start_idx) {
    throw Error(ErrorCode::InvalidArgument, "interval outside trace bounds");
  }
  return trace.amplitudes.middleRows(interval.start_idx, interval.length());
}

}  // namespace

ReconstructedSeries reconstruct(const MatrixXd& x, double sample_rate_hz, const ReconstructParams& params) {
  if (!(sample_rate_hz > 0.0 && params.window_s > 0.0) || params.candidates < 1) {
    throw Error(ErrorCode::InvalidArgument, "reconstruct needs positive rate, window and candidate count");
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index cols = x.cols();
  const auto win = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(params.window_s * sample_rate_hz)));
  if (cols == 0 || n < 2 * win) throw Error(ErrorCode::IntervalTooShort, "interval shorter than two reconstruction windows");
  const auto keep = std::min<Eigen::Index>(params.candidates, cols);

  ReconstructedSeries out;
  out.sample_rate_hz = sample_rate_hz;
  out.values.resize(n);
  out.source_subcarrier.resize(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(cols));
  for (Eigen::Index s0 = 0; s0 < n; s0 += win) {
    const Eigen::Index len = std::min(win, n - s0);
    const auto block = x.middleRows(s0, len);
    const Eigen::RowVectorXd means = block.colwise().mean();
    const double grand = means.mean();
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(means(a) - grand) < std::abs(means(b) - grand);
    });
    std::vector<Eigen::Index> cand(order.begin(), order.begin() + keep);
    std::sort(cand.begin(), cand.end());
    Eigen::Index chosen = cand.front();
    double best = -1.0;
    for (const Eigen::Index c : cand) {
      const double range = block.col(c).maxCoeff() - block.col(c).minCoeff();
      if (range > best) {
        best = range;
        chosen = c;
      }
    }
    const double offset = s0 == 0 ? 0.0 : out.values(s0 - 1) - x(s0 - 1, chosen);
    out.values.segment(s0, len) = block.col(chosen).array() + offset;
    std::fill_n(out.source_subcarrier.begin() + s0, len, static_cast<int>(chosen + 1));
  }
  return out;
}

ReconstructedSeries reconstruct(const CsiTrace& trace, const ActivitySegment& interval, const ReconstructParams& params) {
  return reconstruct(interval_rows(trace, interval), trace.sample_rate_hz, params);
}

ApsdSpectrum apsd(const MatrixXd& x, double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  const Eigen::Index n = x.rows();
  if (static_cast<double>(n) < kMinApsdIntervalS * sample_rate_hz) {
    throw Error(ErrorCode::IntervalTooShort, "APSD needs at least 2 s of samples");
  }
  const Eigen::Index nfft = next_pow2(n);
  VectorXd power = VectorXd::Zero(nfft / 2 + 1);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const VectorXd centered = x.col(j).array() - x.col(j).mean();
    power += rfft(centered, nfft).cwiseAbs2() / static_cast<double>(n);
  }
  ApsdSpectrum out;
  out.freqs_hz = rfft_frequencies(nfft, sample_rate_hz);
  out.apsd_db = power.unaryExpr([](double p) { return p > 0.0 ? std::max(10.0 * std::log10(p), kApsdFloorDb) : kApsdFloorDb; });
  return out;
}

ApsdSpectrum apsd(const CsiTrace& trace, const ActivitySegment& interval) {
  return apsd(interval_rows(trace, interval), trace.sample_rate_hz);
}

std::optional<double> estimate_chew_rate(const ApsdSpectrum& spectrum, const ChewRateParams& params) {
  std::vector<Eigen::Index> band;
  for (Eigen::Index k = 0; k < spectrum.freqs_hz.size(); ++k) {
    if (spectrum.freqs_hz(k) >= params.low_hz && spectrum.freqs_hz(k) <= params.high_hz) band.push_back(k);
  }
  if (band.empty()) return std::nullopt;
  VectorXd values(static_cast<Eigen::Index>(band.size()));
  Eigen::Index best = 0;
  for (std::size_t i = 0; i < band.size(); ++i) {
    values(static_cast<Eigen::Index>(i)) = spectrum.apsd_db(band[i]);
    if (values(static_cast<Eigen::Index>(i)) > values(best)) best = static_cast<Eigen::Index>(i);
  }
  if (values(best) < median(values) + params.prominence_db) return std::nullopt;
  return spectrum.freqs_hz(band[static_cast<std::size_t>(best)]);
}

std::vector<Eigen::Index> local_maxima(const Eigen::Ref<const VectorXd>& y) {
  std::vector<Eigen::Index> out;
  const Eigen::Index n = y.size();
  Eigen::Index i = 1;
  while (i < n - 1) {
    if (y(i) > y(i - 1)) {
      Eigen::Index j = i;
      while (j < n - 1 && y(j + 1) == y(i)) ++j;
      if (j < n - 1 && y(j + 1) < y(i)) out.push_back(i);
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

VectorXd peak_drops(const Eigen::Ref<const VectorXd>& y, const std::vector<Eigen::Index>& maxima) {
  VectorXd out(static_cast<Eigen::Index>(maxima.size()));
  for (std::size_t k = 0; k < maxima.size(); ++k) {
    const Eigen::Index p = maxima[k];
    const Eigen::Index end = k + 1 < maxima.size() ? maxima[k + 1] : y.size();
    out(static_cast<Eigen::Index>(k)) = y(p) - y.segment(p, end - p).minCoeff();
  }
  return out;
}

double default_gamma(const Eigen::Ref<const VectorXd>& values, double factor, double q) {
  const auto maxima = local_maxima(values);
  if (maxima.empty()) return 0.0;
  return factor * quantile(peak_drops(values, maxima), q);
}

std::vector<PeakPattern> detect_peaks(const ReconstructedSeries& series, double beta_s, double gamma) {
  if (!(beta_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be non-negative");
  const VectorXd& y = series.values;
  const auto maxima = local_maxima(y);
  const VectorXd drops = peak_drops(y, maxima);

  struct Candidate {
    Eigen::Index idx;
    double drop;
  };
  std::vector<Candidate> cand;
  for (std::size_t k = 0; k < maxima.size(); ++k) {
    if (drops(static_cast<Eigen::Index>(k)) >= gamma) cand.push_back({maxima[k], drops(static_cast<Eigen::Index>(k))});
  }
  std::stable_sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) { return a.drop > b.drop; });

  const double min_sep = beta_s * series.sample_rate_hz;
  std::vector<Eigen::Index> kept;
  for (const Candidate& c : cand) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](Eigen::Index q) {
      return static_cast<double>(std::abs(c.idx - q)) >= min_sep;
    });
    if (clear) kept.push_back(c.idx);
  }
  std::sort(kept.begin(), kept.end());

  std::vector<PeakPattern> out;
  out.reserve(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const Eigen::Index p = kept[k];
    const Eigen::Index end = k + 1 < kept.size() ? kept[k + 1] : y.size();
    Eigen::Index v = 0;
    y.segment(p, end - p).minCoeff(&v);
    out.push_back({p, p + v});
  }
  return out;
}

ChewSwallowReport count_chews_swallows(const ReconstructedSeries& series, const std::vector<PeakPattern>& peaks,
                                       const ActivitySegment& interval) {
  ChewSwallowReport report;
  report.interval = interval;
  if (peaks.empty()) return report;
  const auto m = static_cast<Eigen::Index>(peaks.size());
  VectorXd range(m), span(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const PeakPattern& pk = peaks[static_cast<std::size_t>(j)];
    range(j) = series.values(pk.peak_idx) - series.values(pk.valley_idx);
    span(j) = static_cast<double>(pk.valley_idx - pk.peak_idx) / series.sample_rate_hz;
  }
  report.mean_range = range.mean();
  report.mean_interval_s = span.mean();
  for (Eigen::Index j = 0; j < m; ++j) {
    const double t = interval.start_s + static_cast<double>(peaks[static_cast<std::size_t>(j)].peak_idx) / series.sample_rate_hz;
    // relative margin keeps rounding in the means from splitting identical patterns
    if (range(j) < report.mean_range * (1.0 - 1e-9) && span(j) > report.mean_interval_s * (1.0 + 1e-9)) {
      report.swallow_times_s.push_back(t);
    } else {
      report.chew_times_s.push_back(t);
    }
  }
  report.chew_count = static_cast<int>(report.chew_times_s.size());
  report.swallow_count = static_cast<int>(report.swallow_times_s.size());
  return report;
}

void ChewConfig::validate(double sample_rate_hz) const {
  band.validate(sample_rate_hz);
  if (!(smooth_s >= 0.0)) throw Error(ErrorCode::InvalidConfig, "chew smoothing window must be non-negative");
  if (!(reconstruct.window_s > 0.0) || reconstruct.candidates < 1) {
    throw Error(ErrorCode::InvalidConfig, "reconstruction window and candidate count must be positive");
  }
  if (!(rate.low_hz > 0.0 && rate.low_hz < rate.high_hz)) throw Error(ErrorCode::InvalidConfig, "chew rate band must satisfy 0 < low < high");
  if (!(beta_factor > 0.0 && beta_fallback_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "beta rule parameters must be positive");
  if (!(gamma_factor >= 0.0 && gamma_quantile >= 0.0 && gamma_quantile <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "gamma rule needs factor >= 0 and quantile in [0, 1]");
  }
}

ChewAnalysis analyze_interval(const CsiTrace& trace, const ActivitySegment& interval, const ChewConfig& config) {
  const double fs = trace.sample_rate_hz;
  config.validate(fs);
  const MatrixXd raw = interval_rows(trace, interval);
  if (static_cast<double>(raw.rows()) < kMinApsdIntervalS * fs) {
    throw Error(ErrorCode::IntervalTooShort, "chew analysis needs at least 2 s between deliveries");
  }
  const MatrixXd filtered = bandpass_columns(raw, config.band, fs);
  const auto smooth = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(config.smooth_s * fs)));
  MatrixXd smoothed(filtered.rows(), filtered.cols());
  for (Eigen::Index j = 0; j < filtered.cols(); ++j) smoothed.col(j) = moving_average(filtered.col(j), smooth);

  ChewAnalysis out;
  out.series = reconstruct(smoothed, fs, config.reconstruct);
  out.spectrum = apsd(filtered, fs);
  const auto rate = estimate_chew_rate(out.spectrum, config.rate);
  out.beta_s = rate ? config.beta_factor / *rate : config.beta_fallback_s;
  out.gamma = default_gamma(out.series.values, config.gamma_factor, config.gamma_quantile);
  out.report = count_chews_swallows(out.series, detect_peaks(out.series, out.beta_s, out.gamma), interval);
  out.report.chew_rate_hz = rate;
  return out;
}

}  // namespace wieat
