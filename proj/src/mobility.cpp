#include "wflow/mobility.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace wflow::mobility {

namespace {

using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec4 = std::array<double, 4>;

Mat4 identity(double s = 1.0) {
    Mat4 m{};
    for (int i = 0; i < 4; ++i) m[i][i] = s;
    return m;
}

Mat4 matmul(const Mat4& a, const Mat4& b) {
    Mat4 out{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k)
            for (int j = 0; j < 4; ++j) out[i][j] += a[i][k] * b[k][j];
    return out;
}

Mat4 transpose(const Mat4& a) {
    Mat4 out{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i][j] = a[j][i];
    return out;
}

Mat4 add(const Mat4& a, const Mat4& b) {
    Mat4 out{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i][j] = a[i][j] + b[i][j];
    return out;
}

Vec4 matvec(const Mat4& a, const Vec4& v) {
    Vec4 out{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i] += a[i][j] * v[j];
    return out;
}

Mat4 transition(double dt) {
    Mat4 f = identity();
    f[0][2] = dt;
    f[1][3] = dt;
    return f;
}

Mat4 process_noise(double dt, double q) {
    double q2 = q * q;
    double d2 = dt * dt, d3 = d2 * dt, d4 = d3 * dt;
    Mat4 m{};
    m[0][0] = d4 / 4;
    m[1][1] = d4 / 4;
    m[0][2] = d3 / 2;
    m[2][0] = d3 / 2;
    m[1][3] = d3 / 2;
    m[3][1] = d3 / 2;
    m[2][2] = d2;
    m[3][3] = d2;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m[i][j] *= q2;
    return m;
}

// smallest eigenvalue of a symmetric 4x4 via cyclic Jacobi rotations
double min_eigenvalue_sym(Mat4 a) {
    for (int sweep = 0; sweep < 30; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-24) break;
        for (int p = 0; p < 4; ++p)
            for (int q = p + 1; q < 4; ++q) {
                if (std::fabs(a[p][q]) < 1e-18) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < 4; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 4; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    double mn = a[0][0];
    for (int i = 1; i < 4; ++i) mn = std::min(mn, a[i][i]);
    return mn;
}

}  // namespace

Point2 kalman_predict_diag(const Trajectory& traj, const KalmanConfig& cfg,
                           KalmanDiagnostics* diag) {
    if (traj.positions.size() < 2)
        throw TrajectoryError("kalman prediction needs at least 2 positions");

    const Mat4 f = transition(cfg.dt);
    const Mat4 ft = transpose(f);
    const Mat4 qn = process_noise(cfg.dt, cfg.q);
    const double r2 = cfg.r * cfg.r;

    Vec4 x{traj.positions[0].x, traj.positions[0].y, 0.0, 0.0};
    Mat4 p = identity(cfg.p0);

    for (size_t k = 1; k < traj.positions.size(); ++k) {
        // predict
        x = matvec(f, x);
        p = add(matmul(matmul(f, p), ft), qn);

        // update with measurement z = (x, y); H picks the position components
        double s00 = p[0][0] + r2, s01 = p[0][1];
        double s10 = p[1][0], s11 = p[1][1] + r2;
        double det = s00 * s11 - s01 * s10;
        double i00 = s11 / det, i01 = -s01 / det, i10 = -s10 / det, i11 = s00 / det;

        // K = P H^T S^-1 (4x2)
        double kgain[4][2];
        for (int i = 0; i < 4; ++i) {
            kgain[i][0] = p[i][0] * i00 + p[i][1] * i10;
            kgain[i][1] = p[i][0] * i01 + p[i][1] * i11;
        }
        double innov0 = traj.positions[k].x - x[0];
        double innov1 = traj.positions[k].y - x[1];
        for (int i = 0; i < 4; ++i) x[i] += kgain[i][0] * innov0 + kgain[i][1] * innov1;

        // Joseph form: P = (I-KH) P (I-KH)^T + K R K^T
        Mat4 ikh = identity();
        for (int i = 0; i < 4; ++i) {
            ikh[i][0] -= kgain[i][0];
            ikh[i][1] -= kgain[i][1];
        }
        Mat4 krk{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                krk[i][j] = r2 * (kgain[i][0] * kgain[j][0] + kgain[i][1] * kgain[j][1]);
        p = add(matmul(matmul(ikh, p), transpose(ikh)), krk);
    }

    if (diag) {
        double sym = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) sym = std::max(sym, std::fabs(p[i][j] - p[j][i]));
        diag->symmetry_residual = sym;
        diag->min_eigenvalue = min_eigenvalue_sym(p);
    }

    Vec4 ahead = matvec(f, x);
    return {ahead[0], ahead[1]};
}

Point2 kalman_predict(const Trajectory& traj, const KalmanConfig& cfg) {
    return kalman_predict_diag(traj, cfg, nullptr);
}

GeneratedTrajectory generate_trajectory(const channel::ChannelScene& scene, Rng& rng,
                                        const TrajectoryConfig& cfg) {
    Point2 bs{scene.tx.x, scene.tx.y};
    const int max_restarts = 200;
    const int step_attempts = 100;

    for (int restart = 0; restart < max_restarts; ++restart) {
        // start in the outdoor annulus around the base station
        Point2 start;
        bool found = false;
        for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
            double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            // uniform over the annulus area
            double r2min = cfg.min_start_dist * cfg.min_start_dist;
            double r2max = cfg.max_start_dist * cfg.max_start_dist;
            double radius = std::sqrt(rng.uniform(r2min, r2max));
            start = {bs.x + radius * std::cos(angle), bs.y + radius * std::sin(angle)};
            if (scene.is_outdoor(start)) {
                found = true;
                break;
            }
        }
        if (!found) throw TrajectoryError("no outdoor start position found in the annulus");

        GeneratedTrajectory out;
        int n_points = static_cast<int>(rng.uniform_int(cfg.min_points, cfg.max_points));
        double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
        double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);

        out.history.positions.push_back(start);
        Point2 cur = start;

        // n_points - 1 history steps plus one more for the ground-truth next point
        bool stuck = false;
        for (int step = 0; step < n_points && !stuck; ++step) {
            Point2 next;
            bool placed = false;
            for (int attempt = 0; attempt < step_attempts; ++attempt) {
                double h = heading;
                bool big = rng.bernoulli(cfg.big_turn_prob);
                if (big) {
                    double mag = rng.uniform(cfg.big_turn_min, cfg.big_turn_max);
                    h += rng.bernoulli(0.5) ? mag : -mag;
                } else {
                    h += rng.normal(0.0, cfg.heading_noise);
                }
                Point2 cand{cur.x + speed * std::cos(h) + rng.normal(0.0, cfg.pos_noise),
                            cur.y + speed * std::sin(h) + rng.normal(0.0, cfg.pos_noise)};
                if (scene.is_outdoor(cand)) {
                    next = cand;
                    heading = h;
                    if (big) ++out.big_turns;
                    ++out.steps;
                    placed = true;
                    break;
                }
            }
            if (!placed) {
                stuck = true;  // walked into a pocket: restart the walk
                break;
            }
            if (step < n_points - 1)
                out.history.positions.push_back(next);
            else
                out.next_truth = next;
            cur = next;
        }
        if (!stuck) return out;
    }
    throw TrajectoryError("trajectory sampling exhausted");
}

}  // namespace wflow::mobility
