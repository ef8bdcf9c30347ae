#include "vidssm/synthetic.hpp"

#include "vidssm/errors.hpp"
#include "vidssm/integrate.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>

namespace vidssm {

void DoublePendulumParams::validate() const {
  if (!(m1 > 0 && m2 > 0 && l1 > 0 && l2 > 0 && w1 > 0 && w2 > 0))
    throw InputError("pendulum masses, lengths and widths must be positive");
  if (!(beta1 >= 0 && beta2 >= 0)) throw InputError("joint damping must be non-negative");
  if (!(g > 0)) throw InputError("gravity must be positive");
  const auto k = dp_constants(*this);
  if (!(4 * k.A * k.B > k.C * k.C)) throw InputError("mass matrix is singular (4AB <= C^2)");
}

double arm_inertia(double mass, double length, double width) {
  const double rect = length * width;
  const double semi = std::numbers::pi * width * width / 8.0;
  const double m_rod = mass * rect / (rect + 2.0 * semi);
  const double m_semi = mass * semi / (rect + 2.0 * semi);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double arm = length / 2.0 + 2.0 * width / (3.0 * std::numbers::pi);
  return m_rod * (length * length + width * width) / 12.0 +
         2.0 * m_semi * ((1.0 / 16.0 - 4.0 / (9.0 * pi2)) * width * width + arm * arm);
}

DoublePendulumConstants dp_constants(const DoublePendulumParams& p) {
  DoublePendulumConstants k;
  k.I1 = arm_inertia(p.m1, p.l1, p.w1);
  k.I2 = arm_inertia(p.m2, p.l2, p.w2);
  k.A = 0.5 * p.m1 * std::pow(0.5 * p.l1, 2) + 0.5 * k.I1 + 0.5 * p.m2 * p.l1 * p.l1;
  k.B = 0.5 * p.m2 * std::pow(0.5 * p.l2, 2) + 0.5 * k.I2;
  k.C = 0.5 * p.m2 * p.l1 * p.l2;
  k.D = (0.5 * p.m1 + p.m2) * p.g * p.l1;
  k.E = 0.5 * p.m2 * p.g * p.l2;
  return k;
}

Eigen::Vector4d dp_derivatives(const Eigen::Vector4d& x, const DoublePendulumParams& p) {
  const auto k = dp_constants(p);
  const double t1 = x(0), t2 = x(1), w1 = x(2), w2 = x(3);
  const double sd = std::sin(t1 - t2);
  const double cd = std::cos(t1 - t2);
  const double K = k.C * k.C * cd * cd - 4.0 * k.A * k.B;
  // Generalized forces of the Rayleigh dissipation function.
  const double F1 = -(p.beta1 + p.beta2) * w1 + p.beta2 * w2;
  const double F2 = p.beta2 * w1 - p.beta2 * w2;
  const double a1 = k.C * k.C * sd * cd * w1 * w1 + 2.0 * k.B * k.C * sd * w2 * w2 +
                    2.0 * k.B * k.D * std::sin(t1) - k.C * k.E * cd * std::sin(t2) + k.C * cd * F2 -
                    2.0 * k.B * F1;
  const double a2 = -2.0 * k.A * k.C * sd * w1 * w1 - k.C * k.C * sd * cd * w2 * w2 -
                    k.C * k.D * cd * std::sin(t1) + 2.0 * k.A * k.E * std::sin(t2) + k.C * cd * F1 -
                    2.0 * k.A * F2;
  return Eigen::Vector4d(w1, w2, a1 / K, a2 / K);
}

double dp_energy(const Eigen::Vector4d& x, const DoublePendulumParams& p) {
  const auto k = dp_constants(p);
  const double T = k.A * x(2) * x(2) + k.B * x(3) * x(3) + k.C * x(2) * x(3) * std::cos(x(1) - x(0));
  return T - k.D * std::cos(x(0)) - k.E * std::cos(x(1));
}

Eigen::Vector2d dp_tip_position(const Eigen::Vector4d& x, const DoublePendulumParams& p) {
  return Eigen::Vector2d(p.l1 * std::sin(x(0)) + p.l2 * std::sin(x(1)),
                         -p.l1 * std::cos(x(0)) - p.l2 * std::cos(x(1)));
}

Eigen::Matrix4d dp_linearization(const DoublePendulumParams& p) {
  const auto k = dp_constants(p);
  Eigen::Matrix2d M, S, Cd;
  M << 2.0 * k.A, k.C, k.C, 2.0 * k.B;
  S << k.D, 0.0, 0.0, k.E;
  Cd << p.beta1 + p.beta2, -p.beta2, -p.beta2, p.beta2;
  const Eigen::Matrix2d Minv = M.inverse();
  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
  J.topRightCorner<2, 2>().setIdentity();
  J.bottomLeftCorner<2, 2>() = -Minv * S;
  J.bottomRightCorner<2, 2>() = -Minv * Cd;
  return J;
}

Eigen::Vector4d dp_slow_mode_state(const DoublePendulumParams& p, double amplitude) {
  Eigen::EigenSolver<Eigen::Matrix4d> es(dp_linearization(p));
  const Eigen::Vector4cd ev = es.eigenvalues();
  int best = -1;
  for (int i = 0; i < 4; ++i)
    if (ev(i).imag() > 0.0 && (best < 0 || ev(i).real() > ev(best).real())) best = i;
  if (best < 0) throw InputError("linearization has no oscillatory mode");
  Eigen::Vector4cd v = es.eigenvectors().col(best);
  const int k = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
  v *= std::conj(v(k)) / std::abs(v(k));
  Eigen::Vector4d x = v.real();
  return x * (amplitude / x.head<2>().cwiseAbs().maxCoeff());
}

Eigen::MatrixXd simulate_double_pendulum(const DoublePendulumParams& p, const Eigen::Vector4d& x0,
                                         double dt, long steps, int substeps) {
  p.validate();
  if (substeps < 1) throw InputError("substeps must be at least 1");
  const auto field = [&](const Eigen::Vector4d& x) { return dp_derivatives(x, p); };
  Eigen::MatrixXd out(4, steps + 1);
  out.col(0) = x0;
  Eigen::Vector4d x = x0;
  for (long s = 0; s < steps; ++s) {
    x = rk4(field, x, dt / substeps, substeps).back();
    out.col(s + 1) = x;
  }
  return out;
}

Eigen::Vector2d hopf_derivatives(const Eigen::Vector2d& x, const HopfParams& p) {
  const std::complex<double> z(x(0), x(1));
  const std::complex<double> dz =
      z * (std::complex<double>(p.gamma0, p.omega0) + std::complex<double>(p.a, p.b) * std::norm(z));
  return Eigen::Vector2d(dz.real(), dz.imag());
}

ReducedModel parse_polynomial_field(const std::vector<std::string>& rows) {
  if (rows.empty()) throw InputError("polynomial field needs at least one row");
  const int d = static_cast<int>(rows.size());
  std::vector<std::map<std::vector<int>, double>> terms(d);
  int order = 1;
  for (int r = 0; r < d; ++r) {
    const std::string& s = rows[r];
    std::size_t i = 0;
    auto skip = [&] {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    };
    auto integer = [&] {
      std::size_t start = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (start == i) throw InputError("expected an integer in polynomial term: " + s);
      return std::stoi(s.substr(start, i - start));
    };
    skip();
    while (i < s.size()) {
      double sign = 1.0;
      if (s[i] == '+' || s[i] == '-') {
        sign = s[i] == '-' ? -1.0 : 1.0;
        ++i;
        skip();
      }
      double coef = 1.0;
      if (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
        char* end = nullptr;
        coef = std::strtod(s.c_str() + i, &end);
        i = static_cast<std::size_t>(end - s.c_str());
      }
      std::vector<int> e(d, 0);
      for (;;) {
        skip();
        if (i < s.size() && s[i] == '*') {
          ++i;
          skip();
        }
        if (i >= s.size() || s[i] != 'x') break;
        ++i;
        const int var = integer();
        if (var < 1 || var > d) throw InputError("variable index out of range in: " + s);
        int pw = 1;
        if (i < s.size() && s[i] == '^') {
          ++i;
          pw = integer();
        }
        e[var - 1] += pw;
      }
      int deg = 0;
      for (int v : e) deg += v;
      if (deg == 0) throw InputError("polynomial field must vanish at the origin: " + s);
      order = std::max(order, deg);
      terms[r][e] += sign * coef;
      skip();
    }
  }
  ReducedModel model;
  model.d = d;
  model.r = order;
  model.basis = MultiIndexBasis(d, 1, order);
  model.R = Eigen::MatrixXd::Zero(d, model.basis.size());
  for (int r = 0; r < d; ++r)
    for (const auto& [e, c] : terms[r]) {
      const int k = model.basis.index_of(Eigen::Map<const Eigen::VectorXi>(e.data(), d));
      model.R(r, k) += c;
    }
  return model;
}

namespace {

PolarPair polar(std::initializer_list<double> gamma, std::initializer_list<double> omega) {
  PolarPair p;
  p.gamma = Eigen::Map<const Eigen::VectorXd>(gamma.begin(), static_cast<Eigen::Index>(gamma.size()));
  p.omega = Eigen::Map<const Eigen::VectorXd>(omega.begin(), static_cast<Eigen::Index>(omega.size()));
  return p;
}

}  // namespace

PolarPair double_pendulum_fixture() { return polar({-0.09352, 0.8130, -2.256}, {6.366, -0.4733, -1.953}); }
PolarPair sloshing_fixture() { return polar({-0.062, -0.029}, {7.80, -0.60}); }
PolarPair flutter_fixture() {
  return polar({0.4844, -1.679, -8.516, 27.28}, {15.90, -34.64, 377.1, -1213.0});
}
PolarPair shimmy_fixture() { return polar({-0.8583, 12.11, -37.71}, {15.17, -9.155, 7.398}); }

ReducedModel flag_fixture() {
  return parse_polynomial_field({
      "- 2.325x2 + 0.3512x2^2 + 1.132x2^3 - 1.479x2^4 - 1.806x2^5 + 1.806x2^6 + 1.742x2^7 - "
      "0.6762x2^8 - 0.5968x2^9 + 0.09106x1 + 0.128x1x2 - 0.8056x1x2^2 - 0.5981x1x2^3 + "
      "5.407x1x2^4 + 0.3837x1x2^5 - 8.837x1x2^6 + 0.1211x1x2^7 + 4.119x1x2^8 + 0.2219x1^2 - "
      "0.502x1^2x2 - 1.619x1^2x2^2 + 0.5419x1^2x2^3 + 3.104x1^2x2^4 + 0.7389x1^2x2^5 - "
      "1.701x1^2x2^6 - 0.608x1^2x2^7 + 0.6853x1^3 + 0.3954x1^3x2 - 3.645x1^3x2^2 + 0.1459x1^3x2^3 "
      "+ 2.215x1^3x2^4 - 0.3787x1^3x2^5 + 0.6783x1^3x2^6 - 0.539x1^4 + 3.49x1^4x2 + 1.664x1^4x2^2 "
      "- 5.234x1^4x2^3 - 1.183x1^4x2^4 + 1.699x1^4x2^5 - 1.499x1^5 - 0.8057x1^5x2 + 5.23x1^5x2^2 "
      "+ 0.4301x1^5x2^3 - 2.93x1^5x2^4 + 0.4203x1^6 - 3.089x1^6x2 - 0.5586x1^6x2^2 + 2.61x1^6x2^3 "
      "+ 0.9821x1^7 + 0.2868x1^7x2 - 1.658x1^7x2^2 - 0.1005x1^8 + 0.7641x1^8x2 - 0.2007x1^9 ",
      "- 0.2462x2 + 0.6229x2^2 + 5.107x2^3 - 1.724x2^4 - 16.8x2^5 + 1.803x2^6 + 19.39x2^7 - "
      "0.6994x2^8 - 7.426x2^9 - 2.741x1 + 1.084x1x2 + 11.86x1x2^2 - 5.412x1x2^3 - 10.74x1x2^4 + "
      "6.211x1x2^5 - 1.404x1x2^6 - 1.81x1x2^7 + 3.985x1x2^8 + 0.1505x1^2 + 0.3348x1^2x2 - "
      "4.276x1^2x2^2 - 8.45x1^2x2^3 + 8.499x1^2x2^4 + 16.54x1^2x2^5 - 4.433x1^2x2^6 - "
      "8.455x1^2x2^7 + 8.555x1^3 - 0.09146x1^3x2 - 43.53x1^3x2^2 + 4.224x1^3x2^3 + 58.71x1^3x2^4 "
      "- 3.911x1^3x2^5 - 23.09x1^3x2^6 - 0.639x1^4 + 7.441x1^4x2 + 4.639x1^4x2^2 - 10.29x1^4x2^3 "
      "- 4.067x1^4x2^4 + 2.415x1^4x2^5 - 10.49x1^5 - 1.479x1^5x2 + 39.89x1^5x2^2 + "
      "0.04915x1^5x2^3 - 28.55x1^5x2^4 + 0.6601x1^6 - 8.282x1^6x2 - 1.522x1^6x2^2 + 7.384x1^6x2^3 "
      "+ 5.691x1^7 + 0.61x1^7x2 - 10.51x1^7x2^2 - 0.1828x1^8 + 2.22x1^8x2 - 1.073x1^9 "});
}

Frame make_marker(int size, int channels) {
  if (size < 3) throw InputError("marker must be at least 3 pixels wide");
  if (channels != 1 && channels != 3) throw InputError("marker needs 1 or 3 channels");
  std::vector<Plane> planes(channels, Plane(size, size));
  const double c = (size - 1) / 2.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double u = (x - c) / size;
      const double v = (y - c) / size;
      const auto bump = [](double t, double w) { return std::exp(-t * t / (2.0 * w * w)); };
      // Two bars of unequal length and an off-center blob: no rotation or
      // reflection maps the pattern onto itself.
      const double top = bump(v + 0.3, 0.06) * bump(std::max(0.0, std::abs(u) - 0.3), 0.05);
      const double left = bump(u + 0.3, 0.06) * bump(std::max(0.0, std::abs(v + 0.1) - 0.15), 0.05);
      const double blob = bump(std::hypot(u - 0.15, v - 0.18), 0.1);
      const double base = 0.05 + 0.85 * std::min(1.0, top + 0.7 * left + 0.55 * blob);
      for (int ch = 0; ch < channels; ++ch)
        planes[ch](y, x) = std::clamp(base + 0.08 * ch * v, 0.0, 1.0);
    }
  return Frame(std::move(planes));
}

RenderedVideo render_marker_video(const std::vector<Pose>& track, const Frame& marker,
                                  const Frame& background, double fps) {
  if (track.empty()) throw InputError("track is empty");
  if (marker.channels() != background.channels())
    throw ShapeError("marker and background channel counts differ");
  const Template base{marker, Eigen::Vector2d((marker.width() - 1) / 2.0, (marker.height() - 1) / 2.0),
                      marker.mask()};
  std::vector<Frame> frames;
  frames.reserve(track.size());
  TrackSeries truth;
  for (std::size_t i = 0; i < track.size(); ++i) {
    const Template rotated = rotate_template(base, track[i].theta);
    const int x0 = static_cast<int>(std::lround(track[i].x - rotated.anchor.x()));
    const int y0 = static_cast<int>(std::lround(track[i].y - rotated.anchor.y()));
    if (!Region{x0, y0, marker.width(), marker.height()}.inside(background.width(), background.height()))
      throw BoundsError("marker leaves the canvas in frame " + std::to_string(i));
    Frame f = background;
    f.clear_mask();
    for (int y = 0; y < marker.height(); ++y)
      for (int x = 0; x < marker.width(); ++x) {
        if (!rotated.mask(y, x)) continue;
        for (int c = 0; c < marker.channels(); ++c) f(x0 + x, y0 + y, c) = rotated.pixels(x, y, c);
      }
    frames.push_back(std::move(f));
    truth.times.push_back(static_cast<double>(i) / fps);
    truth.xs.push_back(x0 + rotated.anchor.x());
    truth.ys.push_back(y0 + rotated.anchor.y());
    truth.thetas.push_back(track[i].theta);
    truth.scores.push_back(0.0);
  }
  return RenderedVideo{FrameSequence(std::move(frames), fps), std::move(truth)};
}

std::vector<Pose> damped_cosine_track(int frames, double fps, const Eigen::Vector2d& center,
                                      double amplitude_px, double amplitude_deg, double omega,
                                      double decay) {
  if (frames < 1 || !(fps > 0.0)) throw InputError("need at least one frame and fps > 0");
  std::vector<Pose> out(frames);
  for (int i = 0; i < frames; ++i) {
    const double t = i / fps;
    const double s = std::exp(-decay * t) * std::cos(omega * t);
    out[i] = Pose{center.x() + amplitude_px * s, center.y(), amplitude_deg * s};
  }
  return out;
}

}  // namespace vidssm
