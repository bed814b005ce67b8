#include <motkit/kalman.hpp>

#include <Eigen/Cholesky>
#include <stdexcept>

namespace motkit {

namespace {

Mat8 motion_matrix() {
    Mat8 f = Mat8::Identity();
    for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;  // dt = 1 frame
    return f;
}

const Mat8 kMotionMat = motion_matrix();

// H projects the 8-D state onto the 4-D measurement space.
Eigen::Matrix<double, 4, 8> projection_matrix() {
    Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
    for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
    return h;
}

const Eigen::Matrix<double, 4, 8> kProjectMat = projection_matrix();

Vec8 process_noise_stds(double h) {
    Vec8 std;
    std << kStdWeightPosition * h, kStdWeightPosition * h, kStdGammaProcess,
        kStdWeightPosition * h, kStdWeightVelocity * h, kStdWeightVelocity * h,
        kStdGammaProcess, kStdWeightVelocity * h;
    return std;
}

Vec4 measurement_noise_stds(double h) {
    Vec4 std;
    std << kStdWeightPosition * h, kStdWeightPosition * h, kStdGammaMeasurement,
        kStdWeightPosition * h;
    return std;
}

// Projected mean, innovation covariance S = HPH' + R.
void project(const MotionState& state, Vec4& mean, Mat4& cov) {
    const Vec4 r = measurement_noise_stds(state.mean[3]).array().square();
    mean = state.mean.head<4>();
    cov = state.covariance.topLeftCorner<4, 4>();
    cov.diagonal() += r;
}

}  // namespace

Measurement::Measurement(const Vec4& m) : v(m) {
    if (!(v[3] > 0.0)) throw std::invalid_argument("measurement: h must be positive");
    if (!(v[2] > 0.0)) throw std::invalid_argument("measurement: gamma must be positive");
}

Measurement::Measurement(const Box& b) {
    if (!b.valid()) throw std::invalid_argument("measurement: invalid box");
    v << b.cx(), b.cy(), b.w / b.h, b.h;
}

MotionState kf_initiate(const Measurement& m) {
    MotionState s;
    s.mean.head<4>() = m.v;
    s.mean.tail<4>().setZero();

    const double h = m.v[3];
    Vec8 std;
    std << 2.0 * kStdWeightPosition * h, 2.0 * kStdWeightPosition * h,
        kStdGammaMeasurement, 2.0 * kStdWeightPosition * h,
        10.0 * kStdWeightVelocity * h, 10.0 * kStdWeightVelocity * h,
        kStdGammaProcess, 10.0 * kStdWeightVelocity * h;
    s.covariance = std.array().square().matrix().asDiagonal();
    return s;
}

MotionState kf_predict(const MotionState& state) {
    const Vec8 q = process_noise_stds(state.mean[3]).array().square();
    MotionState out;
    out.mean = kMotionMat * state.mean;
    out.covariance = kMotionMat * state.covariance * kMotionMat.transpose();
    out.covariance.diagonal() += q;
    return out;
}

std::vector<MotionState> kf_predict_batch(const std::vector<MotionState>& states) {
    const int n = static_cast<int>(states.size());
    std::vector<MotionState> out(n);
    if (n == 0) return out;

    Eigen::Matrix<double, 8, Eigen::Dynamic> means(8, n);
    for (int i = 0; i < n; ++i) means.col(i) = states[i].mean;
    Eigen::Matrix<double, 8, Eigen::Dynamic> advanced = kMotionMat * means;

#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const Vec8 q = process_noise_stds(states[i].mean[3]).array().square();
        out[i].mean = advanced.col(i);
        out[i].covariance =
            kMotionMat * states[i].covariance * kMotionMat.transpose();
        out[i].covariance.diagonal() += q;
    }
    return out;
}

std::vector<MotionState> kf_predict_batch_serial(const std::vector<MotionState>& states) {
    std::vector<MotionState> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(kf_predict(s));
    return out;
}

MotionState kf_update(const MotionState& state, const Measurement& m) {
    Vec4 proj_mean;
    Mat4 proj_cov;
    project(state, proj_mean, proj_cov);

    Eigen::LLT<Mat4> llt(proj_cov);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("kf_update: innovation covariance not positive definite");
    }

    // K = P H' S^-1, via S K' = H P'
    const Eigen::Matrix<double, 8, 4> kalman_gain =
        llt.solve(kProjectMat * state.covariance).transpose();
    const Vec4 innovation = m.v - proj_mean;

    MotionState out;
    out.mean = state.mean + kalman_gain * innovation;
    out.covariance = state.covariance -
                     kalman_gain * proj_cov * kalman_gain.transpose();
    return out;
}

double gating_distance(const MotionState& state, const Measurement& m) {
    Vec4 proj_mean;
    Mat4 proj_cov;
    project(state, proj_mean, proj_cov);

    Eigen::LLT<Mat4> llt(proj_cov);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("gating_distance: innovation covariance not positive definite");
    }
    const Vec4 innovation = m.v - proj_mean;
    const Vec4 z = llt.matrixL().solve(innovation);
    return z.squaredNorm();
}

Eigen::MatrixXd gating_distance_batch(const std::vector<MotionState>& states,
                                      const std::vector<Measurement>& ms) {
    const int rows = static_cast<int>(states.size());
    const int cols = static_cast<int>(ms.size());
    Eigen::MatrixXd d(rows, cols);
    if (rows == 0 || cols == 0) return d;

    Eigen::Matrix<double, 4, Eigen::Dynamic> meas(4, cols);
    for (int j = 0; j < cols; ++j) meas.col(j) = ms[j].v;

    bool degenerate = false;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) {
        Vec4 proj_mean;
        Mat4 proj_cov;
        project(states[i], proj_mean, proj_cov);
        Eigen::LLT<Mat4> llt(proj_cov);
        if (llt.info() != Eigen::Success) {
            degenerate = true;
            continue;
        }
        const Eigen::Matrix<double, 4, Eigen::Dynamic> innovations =
            meas.colwise() - proj_mean;
        d.row(i) = llt.matrixL()
                       .solve(innovations)
                       .array()
                       .square()
                       .colwise()
                       .sum();
    }
    if (degenerate) {
        throw std::runtime_error(
            "gating_distance_batch: innovation covariance not positive definite");
    }
    return d;
}

Eigen::MatrixXd gating_distance_batch_serial(const std::vector<MotionState>& states,
                                             const std::vector<Measurement>& ms) {
    Eigen::MatrixXd d(states.size(), ms.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = 0; j < ms.size(); ++j) {
            d(static_cast<int>(i), static_cast<int>(j)) =
                gating_distance(states[i], ms[j]);
        }
    }
    return d;
}

}  // namespace motkit
