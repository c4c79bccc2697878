#pragma once

#include <stdexcept>
#include <vector>

#include "wflow/channel.hpp"
#include "wflow/geometry.hpp"
#include "wflow/rng.hpp"

namespace wflow::mobility {

class TrajectoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct KalmanConfig {
    double dt = 1.0;   // s
    double q = 0.5;    // process noise scale
    double r = 0.1;    // measurement noise scale
    double p0 = 10.0;  // initial covariance scale
};

struct Trajectory {
    std::vector<Point2> positions;
};

// Constant-velocity filter over the measurement history; returns the
// one-step-ahead position prediction. Needs >= 2 positions.
Point2 kalman_predict(const Trajectory& traj, const KalmanConfig& cfg = {});

// Covariance diagnostics from the final filter state, used by property tests.
struct KalmanDiagnostics {
    double symmetry_residual = 0.0;  // max |P - P^T|
    double min_eigenvalue = 0.0;     // smallest eigenvalue of P
};
Point2 kalman_predict_diag(const Trajectory& traj, const KalmanConfig& cfg,
                           KalmanDiagnostics* diag);

struct TrajectoryConfig {
    double min_start_dist = 50.0;
    double max_start_dist = 150.0;
    double speed_min = 1.0;
    double speed_max = 2.5;
    double pos_noise = 0.15;      // per-axis Gaussian, m
    double heading_noise = 0.1;   // rad
    double big_turn_prob = 0.10;
    double big_turn_min = 0.3;    // rad
    double big_turn_max = 0.8;    // rad
    int min_points = 4;
    int max_points = 6;
    int max_attempts = 2000;
};

struct GeneratedTrajectory {
    Trajectory history;  // 4..6 points, last one is the current position
    Point2 next_truth;   // ground-truth next position (includes step noise)
    int steps = 0;
    int big_turns = 0;
};

// Random walk: start in the outdoor annulus around the transmitter, constant
// speed, small heading noise with occasional large turns; indoor steps are
// resampled. Throws TrajectoryError when rejection sampling is exhausted.
GeneratedTrajectory generate_trajectory(const channel::ChannelScene& scene, Rng& rng,
                                        const TrajectoryConfig& cfg = {});

}  // namespace wflow::mobility
