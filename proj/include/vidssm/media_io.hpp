#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace vidssm {

/// One image channel, indexed (row = y, col = x).
using Plane = Eigen::ArrayXXd;
/// Per-pixel validity, same indexing as Plane.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Axis-aligned pixel rectangle; (x0, y0) is the top-left pixel.
struct Region {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  bool operator==(const Region&) const = default;
  bool inside(int width, int height) const {
    return w > 0 && h > 0 && x0 >= 0 && y0 >= 0 && x0 + w <= width && y0 + h <= height;
  }
};

/// Image with 1 or 3 channels, intensities in [0, 1], and an optional
/// validity mask.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, int channels, double fill = 0.0);
  explicit Frame(std::vector<Plane> planes);
  Frame(std::vector<Plane> planes, Mask mask);

  int width() const { return planes_.empty() ? 0 : static_cast<int>(planes_[0].cols()); }
  int height() const { return planes_.empty() ? 0 : static_cast<int>(planes_[0].rows()); }
  int channels() const { return static_cast<int>(planes_.size()); }

  const Plane& plane(int c) const { return planes_.at(c); }
  Plane& plane(int c) { return planes_.at(c); }
  double operator()(int x, int y, int c = 0) const { return planes_[c](y, x); }
  double& operator()(int x, int y, int c = 0) { return planes_[c](y, x); }

  bool has_mask() const { return mask_.has_value(); }
  /// All-true mask when none is attached.
  Mask mask() const;
  void set_mask(Mask mask);
  void clear_mask() { mask_.reset(); }

 private:
  void validate() const;

  std::vector<Plane> planes_;
  std::optional<Mask> mask_;
};

/// Frames of a uniform size and channel count at a fixed rate.
class FrameSequence {
 public:
  FrameSequence(std::vector<Frame> frames, double frame_rate);

  const std::vector<Frame>& frames() const { return frames_; }
  const Frame& operator[](std::size_t i) const { return frames_[i]; }
  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  double frame_rate() const { return frame_rate_; }

 private:
  std::vector<Frame> frames_;
  double frame_rate_;
};

/// Sidecar header of the raw container format.
struct RawHeader {
  int width = 0;
  int height = 0;
  int channels = 1;
  double fps = 0.0;
  long count = 0;
};

/// Decodes a binary P5 (grey) or P6 (RGB) image with maxval 255.
/// `frame_index` only labels errors.
Frame decode_pnm(std::istream& in, long frame_index = 0);
Frame read_pnm(const std::filesystem::path& path, long frame_index = 0);
/// Encodes as P5 (c = 1) or P6 (c = 3); samples are rounded to 8 bits.
void encode_pnm(std::ostream& out, const Frame& frame);
void write_pnm(const std::filesystem::path& path, const Frame& frame);

/// Loads either a directory of frame_%06d.pgm/.ppm files or a raw container
/// (the payload path, with its header at `<path>.hdr`). A raw container's
/// header fps is used unless `fps` is given.
FrameSequence load_frame_sequence(const std::filesystem::path& path,
                                  std::optional<double> fps = std::nullopt);

std::filesystem::path raw_header_path(const std::filesystem::path& payload);
RawHeader read_raw_header(const std::filesystem::path& header_path);
void write_raw_container(const std::filesystem::path& payload, const FrameSequence& seq);
void write_frame_directory(const std::filesystem::path& dir, const FrameSequence& seq);

/// Copies a w x h window; the mask is cropped alongside.
Frame crop(const Frame& frame, const Region& region);

/// Luma 0.299 R + 0.587 G + 0.114 B; single-channel input is returned as is.
Frame to_grayscale(const Frame& frame);

}  // namespace vidssm
