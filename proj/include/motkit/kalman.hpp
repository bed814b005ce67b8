#pragma once

#include <Eigen/Dense>
#include <vector>

#include <motkit/geometry.hpp>

namespace motkit {

using Vec4 = Eigen::Vector4d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat4 = Eigen::Matrix4d;
using Mat8 = Eigen::Matrix<double, 8, 8>;

// Chi-square 0.95 quantile with 4 degrees of freedom; squared-Mahalanobis
// distances above this mark a track/detection pair infeasible.
inline constexpr double kChi2Gate95_4dof = 9.487729036781154;

// Observation (x, y, gamma, h): box center, aspect ratio w/h, height.
struct Measurement {
    Vec4 v = Vec4::Zero();

    Measurement() = default;
    explicit Measurement(const Vec4& m);
    explicit Measurement(const Box& b);

    Box to_box() const {
        const double w = v[2] * v[3];
        return Box::from_center(v[0], v[1], w, v[3]);
    }
};

// Constant-velocity state over (x, y, gamma, h) plus per-frame velocities.
struct MotionState {
    Vec8 mean = Vec8::Zero();
    Mat8 covariance = Mat8::Identity();
};

// Noise schedule: position/height stds scale with the current height
// (h/20 measurement-side, h/160 velocity process), gamma stds are fixed at
// 1e-2 (measurement) and 1e-5 (process). dt is one frame.
inline constexpr double kStdWeightPosition = 1.0 / 20.0;
inline constexpr double kStdWeightVelocity = 1.0 / 160.0;
inline constexpr double kStdGammaMeasurement = 1e-2;
inline constexpr double kStdGammaProcess = 1e-5;

// Zero-velocity initialization with a diagonal covariance from the schedule
// above. Throws std::invalid_argument for h <= 0 or gamma <= 0.
MotionState kf_initiate(const Measurement& m);

// One constant-velocity step with process noise. Single-state serial form.
MotionState kf_predict(const MotionState& state);

// Batched predict over a pool of states; means are advanced as one packed
// matrix product and covariances in an OpenMP loop. Output order matches
// input order and values match the sequential kf_predict path.
std::vector<MotionState> kf_predict_batch(const std::vector<MotionState>& states);

// Serial reference for kf_predict_batch, kept for tests and the kernel
// benchmark.
std::vector<MotionState> kf_predict_batch_serial(const std::vector<MotionState>& states);

// Standard Kalman correction. Throws std::runtime_error when the innovation
// covariance is not positive definite.
MotionState kf_update(const MotionState& state, const Measurement& m);

// Squared Mahalanobis distance of one measurement from one predicted state,
// over the 4-D measurement space.
double gating_distance(const MotionState& state, const Measurement& m);

// Distance matrix (states x measurements). Each row factors its innovation
// covariance once and solves all measurement columns; rows run under OpenMP.
Eigen::MatrixXd gating_distance_batch(const std::vector<MotionState>& states,
                                      const std::vector<Measurement>& ms);

// Serial per-pair reference for gating_distance_batch.
Eigen::MatrixXd gating_distance_batch_serial(const std::vector<MotionState>& states,
                                             const std::vector<Measurement>& ms);

}  // namespace motkit
