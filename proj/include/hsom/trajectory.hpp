#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hsom/errors.hpp"
#include "hsom/som.hpp"

namespace hsom {

// Grid position normalized by (rows-1, cols-1); single-cell axes map to 0.
struct TracePoint {
  double row{0.0};
  double col{0.0};

  bool operator==(const TracePoint&) const = default;
};

inline double distance(const TracePoint& a, const TracePoint& b) {
  const double dr = b.row - a.row;
  const double dc = b.col - a.col;
  return std::sqrt(dr * dr + dc * dc);
}

// Ordered centers of activity P_1..P_N elicited by one action.
struct ActivityTrace {
  std::vector<TracePoint> centers;
};

inline TracePoint normalize_coord(GridCoord c, std::size_t rows, std::size_t cols) {
  const auto axis = [](std::size_t v, std::size_t n) {
    return n > 1 ? static_cast<double>(v) / static_cast<double>(n - 1) : 0.0;
  };
  return {axis(c.row, rows), axis(c.col, cols)};
}

// Collapses consecutive repeats of the same winner (unless dedup is off).
inline ActivityTrace record_trace(std::span<const GridCoord> winners, std::size_t rows, std::size_t cols,
                                  bool dedup = true) {
  if (winners.empty()) throw Error(ErrorKind::EmptySequence, "activity trace needs at least one winner");
  ActivityTrace trace;
  trace.centers.reserve(winners.size());
  for (std::size_t i = 0; i < winners.size(); ++i) {
    if (dedup && i > 0 && winners[i] == winners[i - 1]) continue;
    trace.centers.push_back(normalize_coord(winners[i], rows, cols));
  }
  return trace;
}

inline double trace_length(const ActivityTrace& trace) {
  double total = 0.0;
  for (std::size_t i = 1; i < trace.centers.size(); ++i) total += distance(trace.centers[i - 1], trace.centers[i]);
  return total;
}

struct EncoderModel {
  std::size_t n_max{1};  // segments per ordered vector
  std::size_t rows{1};
  std::size_t cols{1};

  std::size_t output_dim() const { return 2 * (n_max + 1); }
  bool operator==(const EncoderModel&) const = default;
};

// n_max = longest training trace measured in segments (N - 1), at least 1.
inline EncoderModel fit_nmax(std::span<const ActivityTrace> traces, std::size_t rows, std::size_t cols) {
  if (traces.empty()) throw Error(ErrorKind::EmptyTrainingSet, "fit_nmax needs at least one trace");
  std::size_t longest = 1;
  for (const auto& t : traces) {
    if (t.centers.size() > 1) longest = std::max(longest, t.centers.size() - 1);
  }
  return {longest, rows, cols};
}

using OrderedVector = std::vector<double>;

// Splits the center polyline into n_max pieces of equal arc length
// d = length / n_max and emits the n_max + 1 borders, (row, col) per border.
inline OrderedVector encode(const ActivityTrace& trace, const EncoderModel& model) {
  if (trace.centers.empty()) throw Error(ErrorKind::EmptySequence, "cannot encode an empty trace");
  const std::size_t n = model.n_max;
  OrderedVector out;
  out.reserve(model.output_dim());
  const auto emit = [&out](const TracePoint& p) {
    out.push_back(p.row);
    out.push_back(p.col);
  };

  const auto& c = trace.centers;
  const double total = trace_length(trace);
  if (c.size() == 1 || total == 0.0) {
    for (std::size_t k = 0; k <= n; ++k) emit(c.front());
    return out;
  }

  std::vector<double> cumulative(c.size(), 0.0);
  for (std::size_t i = 1; i < c.size(); ++i) cumulative[i] = cumulative[i - 1] + distance(c[i - 1], c[i]);

  const double step = total / static_cast<double>(n);
  emit(c.front());
  std::size_t seg = 1;  // current segment is [seg-1, seg]
  for (std::size_t k = 1; k < n; ++k) {
    const double target = step * static_cast<double>(k);
    while (seg + 1 < c.size() && cumulative[seg] < target) ++seg;
    const double seg_len = cumulative[seg] - cumulative[seg - 1];
    const double u = seg_len > 0.0 ? std::clamp((target - cumulative[seg - 1]) / seg_len, 0.0, 1.0) : 0.0;
    const TracePoint& a = c[seg - 1];
    const TracePoint& b = c[seg];
    emit({a.row + u * (b.row - a.row), a.col + u * (b.col - a.col)});
  }
  emit(c.back());
  return out;
}

}  // namespace hsom
