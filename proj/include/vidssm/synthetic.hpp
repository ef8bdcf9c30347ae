#pragma once

#include "vidssm/media_io.hpp"
#include "vidssm/reduced_dynamics.hpp"
#include "vidssm/tracker.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace vidssm {

/// Two rigid arms with semicircular ends, joined by viscously damped pins.
/// Defaults are a 253 g / 200 mm upper and 114 g / 180 mm lower arm, 25 mm wide.
struct DoublePendulumParams {
  double m1 = 0.253;
  double m2 = 0.114;
  double l1 = 0.200;
  double l2 = 0.180;
  double w1 = 0.025;
  double w2 = 0.025;
  double beta1 = 5e-4;
  double beta2 = 5e-3;
  double g = 9.81;

  /// Throws InputError for non-positive geometry, negative damping or 4AB <= C^2.
  void validate() const;
};

/// Constants of the equations of motion, always recomputed from the primitives.
struct DoublePendulumConstants {
  double I1, I2;
  double A, B, C, D, E;
};

/// Moment of inertia about the pin of an arm of mass `mass`, pin spacing
/// `length` and width `width`: a rectangle plus two semicircular ends,
/// mass shared in proportion to area.
double arm_inertia(double mass, double length, double width);
DoublePendulumConstants dp_constants(const DoublePendulumParams& p);

/// State (theta1, theta2, theta1', theta2') -> time derivative.
Eigen::Vector4d dp_derivatives(const Eigen::Vector4d& state, const DoublePendulumParams& p);
/// Kinetic plus potential energy.
double dp_energy(const Eigen::Vector4d& state, const DoublePendulumParams& p);
/// Lower arm tip in meters, x to the right and y up from the upper pin.
Eigen::Vector2d dp_tip_position(const Eigen::Vector4d& state, const DoublePendulumParams& p);
/// Linearization about the hanging rest state, assembled from the mass,
/// damping and stiffness matrices.
Eigen::Matrix4d dp_linearization(const DoublePendulumParams& p);
/// A rest-free state on the slowest oscillatory eigenspace of the
/// linearization, scaled so that the largest angle equals `amplitude` rad.
Eigen::Vector4d dp_slow_mode_state(const DoublePendulumParams& p, double amplitude);
/// RK4 trajectory, 4 x (steps + 1), each output step split into `substeps`.
Eigen::MatrixXd simulate_double_pendulum(const DoublePendulumParams& p, const Eigen::Vector4d& x0,
                                         double dt, long steps, int substeps = 4);

/// z' = z (gamma0 + i omega0 + (a + i b) |z|^2).
struct HopfParams {
  double gamma0 = 0.0;
  double omega0 = 1.0;
  double a = 0.0;
  double b = 0.0;
};

/// The Hopf field on (Re z, Im z).
Eigen::Vector2d hopf_derivatives(const Eigen::Vector2d& x, const HopfParams& p);

/// Polynomial vector field from text rows such as "0.5*x1 - 2*x1^2*x2 + x2^3",
/// one row per component.
ReducedModel parse_polynomial_field(const std::vector<std::string>& rows);

/// Structural fixtures: the polar forms quoted for the double pendulum,
/// the sloshing tank, the flutter and the shimmy experiments, and the
/// ninth-order reduced model of the inverted flag.
PolarPair double_pendulum_fixture();
PolarPair sloshing_fixture();
PolarPair flutter_fixture();
PolarPair shimmy_fixture();
ReducedModel flag_fixture();

/// A pose of the marker's anchor in canvas pixels and its angle in degrees.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// Asymmetric test marker, `size` x `size`, that never matches a flat background.
Frame make_marker(int size, int channels = 1);

struct RenderedVideo {
  FrameSequence video;
  /// Poses actually drawn (anchor positions after rounding to whole pixels).
  TrackSeries truth;
};

/// Composites the marker, rotated about its center with the tracker's
/// bilinear convention, onto `background` at every pose. Throws BoundsError
/// naming the first frame in which the marker leaves the canvas.
RenderedVideo render_marker_video(const std::vector<Pose>& track, const Frame& marker,
                                  const Frame& background, double fps);

/// Anchor path center + amplitude e^{-decay t} cos(omega t) in x and angle.
std::vector<Pose> damped_cosine_track(int frames, double fps, const Eigen::Vector2d& center,
                                      double amplitude_px, double amplitude_deg, double omega,
                                      double decay);

}  // namespace vidssm
