#include "vidssm/tracker.hpp"

#include "vidssm/csv.hpp"
#include "vidssm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>

namespace vidssm {

namespace {

constexpr double kSnap = 1e-9;

// cos/sin of an angle in degrees, exact at multiples of 90.
std::pair<double, double> cos_sin_degrees(double deg) {
  const double quarter = deg / 90.0;
  if (std::abs(quarter - std::round(quarter)) < 1e-12) {
    const long q = ((std::lround(quarter) % 4) + 4) % 4;
    static constexpr double c[4] = {1.0, 0.0, -1.0, 0.0};
    static constexpr double s[4] = {0.0, 1.0, 0.0, -1.0};
    return {c[q], s[q]};
  }
  const double rad = deg * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < kSnap ? r : v;
}

}  // namespace

void SearchConfig::validate() const {
  if (!(search_scale > 0.0)) throw InputError("search_scale must be positive");
  if (!(theta_min <= theta_max)) throw InputError("theta_min must not exceed theta_max");
  if (!(theta_interval > 0.0)) throw InputError("theta_interval must be positive");
  if (!(score_thresh >= 0.0 && score_thresh <= 2.0))
    throw InputError("score_thresh must lie in [0, 2]");
  if (!(iou_thresh >= 0.0 && iou_thresh <= 1.0)) throw InputError("iou_thresh must lie in [0, 1]");
  if (n_match < 1) throw InputError("n_match must be at least 1");
  if (background_removal && !(d_thresh >= 0.0 && d_thresh <= 1.0))
    throw InputError("d_thresh must lie in [0, 1]");
}

double normalize_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

Template make_template(const Frame& frame, const Region& region) {
  Frame pixels = crop(frame, region);
  Mask mask = pixels.mask();
  if (!mask.any()) throw InputError("template mask has no valid pixel");
  pixels.clear_mask();
  return Template{std::move(pixels),
                  Eigen::Vector2d((region.w - 1) / 2.0, (region.h - 1) / 2.0), std::move(mask)};
}

Frame frame_average(const FrameSequence& seq) {
  if (seq.empty()) throw InputError("cannot average an empty sequence");
  const Frame& f0 = seq[0];
  std::vector<Plane> sums(f0.channels(), Plane::Zero(f0.height(), f0.width()));
  for (const auto& f : seq.frames())
    for (int c = 0; c < f.channels(); ++c) sums[c] += f.plane(c);
  for (auto& p : sums) p = (p / static_cast<double>(seq.size())).min(1.0).max(0.0);
  return Frame(std::move(sums));
}

Frame difference_mask(const Frame& frame, const Frame& mean, double d_thresh) {
  if (frame.width() != mean.width() || frame.height() != mean.height() ||
      frame.channels() != mean.channels())
    throw ShapeError("frame and mean frame differ in shape");
  Plane dmax = (frame.plane(0) - mean.plane(0)).abs();
  for (int c = 1; c < frame.channels(); ++c)
    dmax = dmax.max((frame.plane(c) - mean.plane(c)).abs());
  Plane out = (dmax >= d_thresh).cast<double>();
  return Frame(std::vector<Plane>{std::move(out)});
}

Template rotate_template(const Template& t, double degrees) {
  if (!std::isfinite(degrees)) throw InputError("rotation angle must be finite");
  const int w = t.width();
  const int h = t.height();
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  const auto [c, s] = cos_sin_degrees(normalize_degrees(degrees));

  std::vector<Plane> planes(t.pixels.channels(), Plane::Zero(h, w));
  Mask mask = Mask::Constant(h, w, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse of the forward map (dx, dy) -> (c dx + s dy, -s dx + c dy).
      const double dx = x - cx;
      const double dy = y - cy;
      const double sx = snap(cx + c * dx - s * dy);
      const double sy = snap(cy + s * dx + c * dy);
      if (sx < 0.0 || sy < 0.0 || sx > w - 1 || sy > h - 1) continue;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const int xs[4] = {x0, x1, x0, x1};
      const int ys[4] = {y0, y0, y1, y1};
      bool ok = true;
      for (int k = 0; k < 4; ++k)
        if (wts[k] > 0.0 && !t.mask(ys[k], xs[k])) ok = false;
      if (!ok) continue;
      mask(y, x) = true;
      for (int ch = 0; ch < t.pixels.channels(); ++ch) {
        const Plane& src = t.pixels.plane(ch);
        double v = 0.0;
        for (int k = 0; k < 4; ++k)
          if (wts[k] > 0.0) v += wts[k] * src(ys[k], xs[k]);
        planes[ch](y, x) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  const Eigen::Vector2d d = t.anchor - Eigen::Vector2d(cx, cy);
  const Eigen::Vector2d anchor(cx + c * d.x() + s * d.y(), cy - s * d.x() + c * d.y());
  return Template{Frame(std::move(planes)), anchor, std::move(mask)};
}

SimilarityMap nssd_map(const Template& t, const Frame& s) {
  if (t.width() >= s.width() || t.height() >= s.height())
    throw InputError("template must be strictly smaller than the searched image");
  if (t.pixels.channels() != s.channels()) throw ShapeError("template and image channel counts differ");
  if (!t.mask.any()) throw InputError("template mask has no valid pixel");

  const int tw = t.width();
  const int th = t.height();
  const int nx = s.width() - tw + 1;
  const int ny = s.height() - th + 1;
  const Plane m = t.mask.cast<double>();

  std::vector<Plane> tm(t.pixels.channels());
  double sum_t2 = 0.0;
  for (int c = 0; c < t.pixels.channels(); ++c) {
    tm[c] = t.pixels.plane(c) * m;
    sum_t2 += tm[c].square().sum();
  }

  SimilarityMap out{Eigen::ArrayXXd(ny, nx), Mask::Constant(ny, nx, false)};
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      double num = 0.0;
      double sum_i2 = 0.0;
      for (int c = 0; c < s.channels(); ++c) {
        const auto patch = s.plane(c).block(y, x, th, tw) * m;
        num += (tm[c] - patch).square().sum();
        sum_i2 += patch.square().sum();
      }
      const double den = std::sqrt(sum_t2 * sum_i2);
      if (den > 0.0) {
        out.scores(y, x) = num / den;
      } else {
        out.scores(y, x) = std::numeric_limits<double>::infinity();
        out.degenerate(y, x) = true;
      }
    }
  }
  if (out.degenerate.all()) throw MatchError("every placement has a zero NSSD denominator");
  return out;
}

Candidates match_sweep(const Template& t, const Frame& s, const SearchConfig& cfg,
                       double theta_ref) {
  cfg.validate();
  Candidates out;
  const long steps =
      static_cast<long>(std::floor((cfg.theta_max - cfg.theta_min) / cfg.theta_interval + 1e-9));
  for (long k = 0; k <= steps; ++k) {
    const double theta = normalize_degrees(theta_ref + cfg.theta_min + k * cfg.theta_interval);
    const Template rotated = rotate_template(t, theta);
    if (!rotated.mask.any()) continue;
    const SimilarityMap r = nssd_map(rotated, s);
    for (int y = 0; y < r.scores.rows(); ++y)
      for (int x = 0; x < r.scores.cols(); ++x)
        if (r.scores(y, x) < cfg.score_thresh) {
          out.boxes.push_back(Region{x, y, t.width(), t.height()});
          out.scores.push_back(r.scores(y, x));
          out.angles.push_back(theta);
        }
  }
  return out;
}

double jaccard(const Region& a, const Region& b) {
  const long ix = std::max(0, std::min(a.x0 + a.w, b.x0 + b.w) - std::max(a.x0, b.x0));
  const long iy = std::max(0, std::min(a.y0 + a.h, b.y0 + b.h) - std::max(a.y0, b.y0));
  const long inter = ix * iy;
  const long uni = static_cast<long>(a.w) * a.h + static_cast<long>(b.w) * b.h - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

std::vector<Detection> nms(const Candidates& c, double iou_thresh, int n_match, double theta_ref) {
  if (c.scores.size() != c.boxes.size() || c.angles.size() != c.boxes.size())
    throw InputError("candidate lists differ in length");
  std::vector<std::size_t> alive(c.size());
  std::iota(alive.begin(), alive.end(), 0);
  auto better = [&](std::size_t i, std::size_t j) {
    if (c.scores[i] != c.scores[j]) return c.scores[i] < c.scores[j];
    if (c.boxes[i].y0 != c.boxes[j].y0) return c.boxes[i].y0 < c.boxes[j].y0;
    if (c.boxes[i].x0 != c.boxes[j].x0) return c.boxes[i].x0 < c.boxes[j].x0;
    return std::abs(normalize_degrees(c.angles[i] - theta_ref)) <
           std::abs(normalize_degrees(c.angles[j] - theta_ref));
  };

  std::vector<Detection> kept;
  while (!alive.empty() && static_cast<int>(kept.size()) < n_match) {
    const auto best_it = std::min_element(alive.begin(), alive.end(), better);
    const std::size_t m = *best_it;
    alive.erase(best_it);
    kept.push_back(Detection{c.boxes[m], c.angles[m], c.scores[m]});
    std::erase_if(alive, [&](std::size_t i) { return jaccard(c.boxes[m], c.boxes[i]) >= iou_thresh; });
  }
  return kept;
}

TrackSeries track(const FrameSequence& seq, const Template& t, const Region& init_region,
                  const SearchConfig& cfg) {
  cfg.validate();
  if (seq.empty()) throw InputError("cannot track an empty sequence");
  if (init_region.w != t.width() || init_region.h != t.height())
    throw InputError("init_region must match the template size");
  const Frame& f0 = seq[0];
  if (!init_region.inside(f0.width(), f0.height()))
    throw BoundsError("init_region lies outside the first frame");

  const int win_w = std::min(f0.width(), static_cast<int>(std::lround(cfg.search_scale * t.width())));
  const int win_h = std::min(f0.height(), static_cast<int>(std::lround(cfg.search_scale * t.height())));
  if (win_w <= t.width() || win_h <= t.height())
    throw InputError("search window must be strictly larger than the template");

  std::optional<Frame> mean;
  if (cfg.background_removal) mean = frame_average(seq);

  TrackSeries out;
  Region prev = init_region;
  double theta_prev = 0.0;
  const double dt = 1.0 / seq.frame_rate();
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Frame target = mean ? difference_mask(seq[i], *mean, cfg.d_thresh) : seq[i];
    const double cx = prev.x0 + prev.w / 2.0;
    const double cy = prev.y0 + prev.h / 2.0;
    const Region window{
        std::clamp(static_cast<int>(std::lround(cx - win_w / 2.0)), 0, target.width() - win_w),
        std::clamp(static_cast<int>(std::lround(cy - win_h / 2.0)), 0, target.height() - win_h),
        win_w, win_h};
    const Frame search = crop(target, window);

    Candidates cand = match_sweep(t, search, cfg, theta_prev);
    const auto found = nms(cand, cfg.iou_thresh, cfg.n_match, theta_prev);
    if (found.empty()) throw TrackingLostError(static_cast<long>(i));
    const Detection& best = found.front();

    prev = Region{best.box.x0 + window.x0, best.box.y0 + window.y0, best.box.w, best.box.h};
    theta_prev = best.theta;
    const Template rotated = rotate_template(t, best.theta);
    out.times.push_back(static_cast<double>(i) * dt);
    out.xs.push_back(prev.x0 + rotated.anchor.x());
    out.ys.push_back(prev.y0 + rotated.anchor.y());
    out.thetas.push_back(best.theta);
    out.scores.push_back(best.score);
  }
  return out;
}

void write_track_csv(std::ostream& out, const TrackSeries& s) {
  out << "t,x,y,theta,score\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << std::fixed << std::setprecision(6) << s.times[i] << std::defaultfloat
        << std::setprecision(17) << ',' << s.xs[i] << ',' << s.ys[i] << ',' << s.thetas[i] << ','
        << s.scores[i] << '\n';
  }
}

TrackSeries read_track_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  TrackSeries s;
  const auto col = [&](const std::string& name) { return table.column(name); };
  const Eigen::VectorXd t = col("t"), x = col("x"), y = col("y"), th = col("theta");
  const bool has_score = table.has_column("score");
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    s.times.push_back(t(i));
    s.xs.push_back(x(i));
    s.ys.push_back(y(i));
    s.thetas.push_back(th(i));
    s.scores.push_back(has_score ? table.column("score")(i) : 0.0);
  }
  return s;
}

}  // namespace vidssm
