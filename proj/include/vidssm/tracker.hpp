#pragma once

#include "vidssm/media_io.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

namespace vidssm {

/// A small image to be found in target frames. `anchor` is the tracked
/// point relative to the template's top-left pixel; only pixels set in
/// `mask` enter the similarity sums.
struct Template {
  Frame pixels;
  Eigen::Vector2d anchor;
  Mask mask;

  int width() const { return pixels.width(); }
  int height() const { return pixels.height(); }
};

/// Template cut out of `frame` at `region`, anchored at its center. A frame
/// mask, if present, becomes the template mask.
Template make_template(const Frame& frame, const Region& region);

struct SearchConfig {
  double search_scale = 2.0;
  double theta_min = -15.0;
  double theta_max = 15.0;
  double theta_interval = 5.0;
  double score_thresh = 0.5;
  double iou_thresh = 0.3;
  int n_match = 1;
  bool background_removal = false;
  double d_thresh = 0.1;

  /// Throws InputError when a field is out of range.
  void validate() const;
};

struct Detection {
  Region box;
  double theta = 0.0;
  double score = 0.0;
};

/// Per-frame tracker output; all vectors have one entry per frame.
struct TrackSeries {
  std::vector<double> times;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> thetas;
  std::vector<double> scores;

  std::size_t size() const { return times.size(); }
};

/// Maps an angle in degrees to (-180, 180].
double normalize_degrees(double deg);

/// Per-pixel, per-channel mean over the whole sequence.
Frame frame_average(const FrameSequence& seq);

/// Single-channel 0/1 frame: 1 where max_c |frame - mean| >= d_thresh.
Frame difference_mask(const Frame& frame, const Frame& mean, double d_thresh);

/// Rotates about the template center by `degrees` (counter-clockwise as
/// displayed) with bilinear resampling. Output pixels whose source sample
/// leaves the original support, or touches an invalid input pixel, are
/// masked out. The anchor rotates with the pixels.
Template rotate_template(const Template& t, double degrees);

/// Normalized sum of squared differences for every placement of
/// `t` fully inside `s`. Placements with a zero denominator are +inf and
/// flagged in `degenerate`.
struct SimilarityMap {
  Eigen::ArrayXXd scores;  // (s.h - t.h + 1) x (s.w - t.w + 1), indexed (y, x)
  Mask degenerate;
};
SimilarityMap nssd_map(const Template& t, const Frame& s);

/// Aligned candidate lists: boxes in `s` coordinates, NSSD scores and the
/// absolute template angle that produced each.
struct Candidates {
  std::vector<Region> boxes;
  std::vector<double> scores;
  std::vector<double> angles;

  std::size_t size() const { return boxes.size(); }
};

/// Rotates the template over theta_ref + [theta_min, theta_max] in steps
/// of theta_interval and keeps every placement scoring below score_thresh.
Candidates match_sweep(const Template& t, const Frame& s, const SearchConfig& cfg,
                       double theta_ref);

/// Intersection over union of the pixel sets of two boxes.
double jaccard(const Region& a, const Region& b);

/// Greedy non-maximum suppression. Repeatedly takes the lowest score (ties:
/// lower y, lower x, then angle closest to theta_ref) and drops every
/// remaining candidate overlapping it with IoU >= iou_thresh.
std::vector<Detection> nms(const Candidates& c, double iou_thresh, int n_match,
                           double theta_ref = 0.0);

/// Runs the tracker over every frame. `init_region` is the template's box
/// in the first frame. Throws TrackingLostError when a frame has no
/// candidate below the score threshold.
TrackSeries track(const FrameSequence& seq, const Template& t, const Region& init_region,
                  const SearchConfig& cfg);

/// CSV with header `t,x,y,theta,score`.
void write_track_csv(std::ostream& out, const TrackSeries& series);
TrackSeries read_track_csv(std::istream& in);

}  // namespace vidssm
