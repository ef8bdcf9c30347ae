#include "vidssm/media_io.hpp"

#include "vidssm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <regex>
#include <sstream>
#include <string>

namespace vidssm {

namespace fs = std::filesystem;

Frame::Frame(int width, int height, int channels, double fill) {
  if (width <= 0 || height <= 0) throw ShapeError("frame dimensions must be positive");
  if (channels != 1 && channels != 3) throw ShapeError("frames have 1 or 3 channels");
  planes_.assign(channels, Plane::Constant(height, width, fill));
  validate();
}

Frame::Frame(std::vector<Plane> planes) : planes_(std::move(planes)) { validate(); }

Frame::Frame(std::vector<Plane> planes, Mask mask) : planes_(std::move(planes)) {
  validate();
  set_mask(std::move(mask));
}

void Frame::validate() const {
  if (planes_.size() != 1 && planes_.size() != 3)
    throw ShapeError("frames have 1 or 3 channels, got " + std::to_string(planes_.size()));
  for (const auto& p : planes_) {
    if (p.rows() != planes_[0].rows() || p.cols() != planes_[0].cols())
      throw ShapeError("channel planes differ in size");
    if (p.size() == 0) throw ShapeError("empty frame");
    if (!((p >= 0.0) && (p <= 1.0)).all()) throw InputError("intensities must lie in [0, 1]");
  }
}

Mask Frame::mask() const {
  if (mask_) return *mask_;
  return Mask::Constant(height(), width(), true);
}

void Frame::set_mask(Mask mask) {
  if (mask.rows() != height() || mask.cols() != width())
    throw ShapeError("mask does not match frame size");
  mask_ = std::move(mask);
}

FrameSequence::FrameSequence(std::vector<Frame> frames, double frame_rate)
    : frames_(std::move(frames)), frame_rate_(frame_rate) {
  if (!(frame_rate_ > 0.0) || !std::isfinite(frame_rate_))
    throw InputError("frame rate must be positive");
  for (std::size_t i = 1; i < frames_.size(); ++i) {
    const auto& a = frames_[0];
    const auto& b = frames_[i];
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
      throw ShapeError("frame " + std::to_string(i) + " is " + std::to_string(b.width()) + "x" +
                       std::to_string(b.height()) + "x" + std::to_string(b.channels()) +
                       ", expected " + std::to_string(a.width()) + "x" +
                       std::to_string(a.height()) + "x" + std::to_string(a.channels()));
  }
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int parse_positive(const std::string& tok, long frame_index, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size() || v <= 0 || v > (1 << 24)) throw std::invalid_argument(tok);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw DecodeError(frame_index, std::string("bad ") + what + " '" + tok + "'");
  }
}

Frame frame_from_bytes(const std::vector<unsigned char>& bytes, int width, int height,
                       int channels) {
  std::vector<Plane> planes(channels, Plane(height, width));
  std::size_t k = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) planes[c](y, x) = bytes[k++] / 255.0;
  return Frame(std::move(planes));
}

void frame_to_bytes(const Frame& frame, std::vector<unsigned char>& bytes) {
  bytes.resize(static_cast<std::size_t>(frame.width()) * frame.height() * frame.channels());
  std::size_t k = 0;
  for (int y = 0; y < frame.height(); ++y)
    for (int x = 0; x < frame.width(); ++x)
      for (int c = 0; c < frame.channels(); ++c)
        bytes[k++] = static_cast<unsigned char>(
            std::lround(std::clamp(frame(x, y, c), 0.0, 1.0) * 255.0));
}

}  // namespace

Frame decode_pnm(std::istream& in, long frame_index) {
  const std::string magic = next_token(in);
  int channels = 0;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    throw DecodeError(frame_index, "unsupported magic '" + magic + "' (need P5 or P6)");
  const int width = parse_positive(next_token(in), frame_index, "width");
  const int height = parse_positive(next_token(in), frame_index, "height");
  const int maxval = parse_positive(next_token(in), frame_index, "maxval");
  if (maxval != 255) throw DecodeError(frame_index, "maxval must be 255");
  // next_token consumed exactly one whitespace byte after maxval.
  std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw DecodeError(frame_index, "truncated pixel data");
  return frame_from_bytes(bytes, width, height, channels);
}

Frame read_pnm(const fs::path& path, long frame_index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError(frame_index, "cannot open " + path.string());
  return decode_pnm(in, frame_index);
}

void encode_pnm(std::ostream& out, const Frame& frame) {
  out << (frame.channels() == 1 ? "P5" : "P6") << '\n'
      << frame.width() << ' ' << frame.height() << '\n'
      << 255 << '\n';
  std::vector<unsigned char> bytes;
  frame_to_bytes(frame, bytes);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_pnm(const fs::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  encode_pnm(out, frame);
}

fs::path raw_header_path(const fs::path& payload) {
  fs::path p = payload;
  p += ".hdr";
  return p;
}

RawHeader read_raw_header(const fs::path& header_path) {
  std::ifstream in(header_path);
  if (!in) throw InputError("cannot open raw header " + header_path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  RawHeader h;
  try {
    h.width = std::stoi(kv.at("width"));
    h.height = std::stoi(kv.at("height"));
    h.channels = std::stoi(kv.at("channels"));
    h.fps = std::stod(kv.at("fps"));
    h.count = std::stol(kv.at("count"));
  } catch (const std::exception&) {
    throw InputError("raw header " + header_path.string() +
                     " needs numeric width, height, channels, fps, count");
  }
  if (h.width <= 0 || h.height <= 0 || (h.channels != 1 && h.channels != 3) || h.count <= 0)
    throw InputError("raw header " + header_path.string() + " has invalid dimensions");
  return h;
}

void write_raw_container(const fs::path& payload, const FrameSequence& seq) {
  if (seq.empty()) throw InputError("cannot write an empty sequence");
  const Frame& f0 = seq[0];
  {
    std::ofstream hdr(raw_header_path(payload));
    if (!hdr) throw InputError("cannot write " + raw_header_path(payload).string());
    hdr << "width=" << f0.width() << "\nheight=" << f0.height() << "\nchannels=" << f0.channels()
        << "\nfps=" << std::setprecision(17) << seq.frame_rate() << "\ncount=" << seq.size()
        << '\n';
  }
  std::ofstream out(payload, std::ios::binary);
  if (!out) throw InputError("cannot write " + payload.string());
  std::vector<unsigned char> bytes;
  for (const auto& f : seq.frames()) {
    frame_to_bytes(f, bytes);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

void write_frame_directory(const fs::path& dir, const FrameSequence& seq) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    std::ostringstream name;
    name << "frame_" << std::setw(6) << std::setfill('0') << i
         << (seq[i].channels() == 1 ? ".pgm" : ".ppm");
    write_pnm(dir / name.str(), seq[i]);
  }
}

FrameSequence load_frame_sequence(const fs::path& path, std::optional<double> fps) {
  if (!fs::exists(path)) throw InputError("no such input: " + path.string());

  if (fs::is_directory(path)) {
    if (!fps) throw InputError("a frame directory needs an explicit frame rate");
    static const std::regex pattern(R"(frame_(\d{6})\.(pgm|ppm))");
    std::vector<std::pair<long, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      std::smatch m;
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && std::regex_match(name, m, pattern))
        files.emplace_back(std::stol(m[1].str()), entry.path());
    }
    if (files.empty()) throw InputError("no frame_%06d.pgm/ppm files in " + path.string());
    std::sort(files.begin(), files.end());
    std::vector<Frame> frames;
    frames.reserve(files.size());
    for (const auto& [index, file] : files) frames.push_back(read_pnm(file, index));
    return FrameSequence(std::move(frames), *fps);
  }

  const RawHeader h = read_raw_header(raw_header_path(path));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  const std::size_t frame_bytes = static_cast<std::size_t>(h.width) * h.height * h.channels;
  std::vector<unsigned char> bytes(frame_bytes);
  std::vector<Frame> frames;
  frames.reserve(h.count);
  for (long i = 0; i < h.count; ++i) {
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(frame_bytes));
    if (in.gcount() != static_cast<std::streamsize>(frame_bytes))
      throw DecodeError(i, "raw container payload truncated");
    frames.push_back(frame_from_bytes(bytes, h.width, h.height, h.channels));
  }
  return FrameSequence(std::move(frames), fps.value_or(h.fps));
}

Frame crop(const Frame& frame, const Region& r) {
  if (!r.inside(frame.width(), frame.height()))
    throw BoundsError("region (" + std::to_string(r.x0) + "," + std::to_string(r.y0) + "," +
                      std::to_string(r.w) + "," + std::to_string(r.h) + ") outside " +
                      std::to_string(frame.width()) + "x" + std::to_string(frame.height()) +
                      " frame");
  std::vector<Plane> planes;
  planes.reserve(frame.channels());
  for (int c = 0; c < frame.channels(); ++c)
    planes.emplace_back(frame.plane(c).block(r.y0, r.x0, r.h, r.w));
  Frame out(std::move(planes));
  if (frame.has_mask()) out.set_mask(frame.mask().block(r.y0, r.x0, r.h, r.w));
  return out;
}

Frame to_grayscale(const Frame& frame) {
  if (frame.channels() == 1) return frame;
  Plane luma = 0.299 * frame.plane(0) + 0.587 * frame.plane(1) + 0.114 * frame.plane(2);
  // Guard the [0,1] invariant against rounding in the weighted sum.
  luma = luma.min(1.0).max(0.0);
  Frame out(std::vector<Plane>{std::move(luma)});
  if (frame.has_mask()) out.set_mask(frame.mask());
  return out;
}

}  // namespace vidssm
