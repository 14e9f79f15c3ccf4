#include "wieat/segmentation.hpp"

#include "wieat/preprocess.hpp"
#include "wieat/stats.hpp"

#include <cmath>

namespace wieat {

Spectrogram spectrogram(const Eigen::Ref<const VectorXd>& series, double sample_rate_hz, double window_s, double hop_s) {
  if (!(sample_rate_hz > 0.0 && window_s > 0.0 && hop_s > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "spectrogram needs positive sample rate, window and hop");
  }
  const auto win = static_cast<Eigen::Index>(std::llround(window_s * sample_rate_hz));
  const auto hop = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(hop_s * sample_rate_hz)));
  if (win < 8) throw Error(ErrorCode::SeriesTooShort, "spectrogram window must cover at least 8 samples");
  if (series.size() < win) throw Error(ErrorCode::SeriesTooShort, "series shorter than one spectrogram window");

  Spectrogram spec;
  spec.window_s = window_s;
  spec.hop_s = hop_s;
  spec.window_samples = win;
  spec.hop_samples = hop;
  const Eigen::Index frames = (series.size() - win) / hop + 1;
  const Eigen::Index bins = win / 2 + 1;
  spec.power.resize(frames, bins);
  spec.time_bins_s.resize(frames);
  spec.freq_bins_hz = rfft_frequencies(win, sample_rate_hz);
  const VectorXd window = hann_window(win);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const VectorXd frame = series.segment(t * hop, win).cwiseProduct(window);
    spec.power.row(t) = rfft(frame, win).cwiseAbs2().transpose();
    spec.time_bins_s(t) = static_cast<double>(t * hop + win / 2) / sample_rate_hz;
  }
  return spec;
}

VectorXd cumulative_psd(const Spectrogram& spec) { return spec.power.rowwise().sum(); }

double segmentation_threshold(const Eigen::Ref<const VectorXd>& ste, const SegmentParams& params) {
  if (ste.size() == 0) return 0.0;
  const double relative = params.eps_rel * ste.maxCoeff();
  const double floor = params.floor_factor * quantile(ste, params.floor_quantile);
  return std::max(relative, floor);
}

std::vector<ActivitySegment> segment_activities(const Eigen::Ref<const VectorXd>& ste, const SegmentParams& params,
                                                double hop_s, double sample_rate_hz, Eigen::Index n_samples,
                                                double offset_s) {
  if (!(params.eps_rel > 0.0 && params.eps_rel < 1.0)) throw Error(ErrorCode::InvalidArgument, "eps_rel must lie in (0, 1)");
  if (!(hop_s > 0.0 && sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "hop and sample rate must be positive");
  std::vector<ActivitySegment> out;
  const Eigen::Index n = ste.size();
  if (n == 0) return out;
  const double theta = segmentation_threshold(ste, params);

  struct Run {
    Eigen::Index begin, end;  // bins above threshold: [begin, end)
  };
  std::vector<Run> runs;
  for (Eigen::Index i = 0; i < n;) {
    if (ste(i) > theta) {
      Eigen::Index j = i;
      while (j < n && ste(j) > theta) ++j;
      runs.push_back({i, j});
      i = j;
    } else {
      ++i;
    }
  }

  std::vector<Run> merged;
  for (const Run& r : runs) {
    if (!merged.empty() && static_cast<double>(r.begin - merged.back().end) * hop_s < params.min_gap_s) {
      merged.back().end = r.end;
    } else {
      merged.push_back(r);
    }
  }

  const double total_s = static_cast<double>(n_samples) / sample_rate_hz;
  for (const Run& r : merged) {
    // Fractional bin positions of the flanking threshold crossings.
    double left = 0.0;
    if (r.begin > 0) left = static_cast<double>(r.begin - 1) + (theta - ste(r.begin - 1)) / (ste(r.begin) - ste(r.begin - 1));
    double right = static_cast<double>(n - 1);
    if (r.end < n) right = static_cast<double>(r.end - 1) + (ste(r.end - 1) - theta) / (ste(r.end - 1) - ste(r.end));
    const double start_s = std::clamp(offset_s + left * hop_s, 0.0, total_s);
    const double end_s = std::clamp(offset_s + right * hop_s, 0.0, total_s);
    if (end_s - start_s < params.min_len_s) continue;

    ActivitySegment seg;
    seg.start_s = out.empty() ? start_s : std::max(start_s, out.back().end_s);
    seg.end_s = end_s;
    seg.start_idx = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::llround(seg.start_s * sample_rate_hz)), 0, n_samples);
    seg.end_idx = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::llround(seg.end_s * sample_rate_hz)), 0, n_samples);
    if (seg.end_idx > seg.start_idx) out.push_back(seg);
  }
  return out;
}

SegmentationResult segment_trace(const CsiTrace& trace, const SegmentationConfig& config) {
  SegmentationResult result;
  const double fs = trace.sample_rate_hz;
  const VectorXd mean_series = trace.amplitudes.rowwise().mean();
  const auto var_window = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::llround(config.variance_window_s * fs)));
  if (var_window > mean_series.size()) throw Error(ErrorCode::SeriesTooShort, "trace shorter than the moving-variance window");
  result.activity_series = moving_variance(mean_series, var_window);
  if (config.use_moving_std) result.activity_series = result.activity_series.cwiseSqrt();
  result.spec = spectrogram(result.activity_series, fs, config.window_s, config.hop_s);
  result.cpsd = cumulative_psd(result.spec);
  result.ste = short_time_energy(result.cpsd, std::min(config.ste_window, result.cpsd.size()));
  result.frame_times_s = result.spec.time_bins_s;
  result.threshold = segmentation_threshold(result.ste, config.params);
  const double hop_s = static_cast<double>(result.spec.hop_samples) / fs;
  const double offset_s = static_cast<double>(result.spec.window_samples / 2) / fs;
  result.segments = segment_activities(result.ste, config.params, hop_s, fs, trace.samples(), offset_s);
  return result;
}

}  // namespace wieat
