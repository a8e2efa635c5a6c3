#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsom/errors.hpp"
#include "hsom/records.hpp"

namespace hsom {

// Frames recorded between a start and an end mark.
struct ActionWindow {
  std::int64_t t_start{0};
  std::int64_t t_end{0};
  std::optional<std::string> label;  // from the start mark, when present
  std::vector<SkeletonFrame> skeletons;
  std::vector<ObjectFrame> objects;
};

// Serializes a window the way a recorder would emit it: start mark, the two
// sub-streams merged by timestamp (skeleton first on ties), end mark.
inline std::vector<Record> window_records(const ActionWindow& w) {
  std::vector<Record> out;
  out.reserve(w.skeletons.size() + w.objects.size() + 2);
  out.push_back(MarkRecord{w.t_start, MarkRecord::Edge::Start, w.label});
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < w.skeletons.size() || j < w.objects.size()) {
    if (j == w.objects.size() || (i < w.skeletons.size() && w.skeletons[i].t_ms <= w.objects[j].t_ms)) {
      out.push_back(w.skeletons[i++]);
    } else {
      out.push_back(w.objects[j++]);
    }
  }
  out.push_back(MarkRecord{w.t_end, MarkRecord::Edge::End, std::nullopt});
  return out;
}

// Segments a record sequence into action windows using the marks. Frames
// outside a window are counted and dropped.
class WindowAssembler {
 public:
  // Returns the completed window when `r` is an end mark closing one.
  // Throws UnbalancedMarks for an end without a start or a nested start;
  // a nested start discards the open window and opens a new one.
  std::optional<ActionWindow> push(const Record& r) {
    if (const auto* m = std::get_if<MarkRecord>(&r)) {
      if (m->edge == MarkRecord::Edge::Start) {
        const bool nested = open_.has_value();
        open_ = ActionWindow{};
        open_->t_start = m->t_ms;
        open_->label = m->label;
        if (nested) throw Error(ErrorKind::UnbalancedMarks, "start mark inside an open window");
        return std::nullopt;
      }
      if (!open_) throw Error(ErrorKind::UnbalancedMarks, "end mark without a start mark");
      ActionWindow done = std::move(*open_);
      open_.reset();
      done.t_end = m->t_ms;
      return done;
    }
    if (!open_) {
      ++discarded_;
      return std::nullopt;
    }
    if (const auto* s = std::get_if<SkeletonFrame>(&r)) {
      open_->skeletons.push_back(*s);
    } else {
      open_->objects.push_back(std::get<ObjectFrame>(r));
    }
    return std::nullopt;
  }

  bool in_window() const { return open_.has_value(); }
  std::size_t discarded_frames() const { return discarded_; }

 private:
  std::optional<ActionWindow> open_;
  std::size_t discarded_{0};
};

}  // namespace hsom
