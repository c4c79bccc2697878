#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "wflow/geometry.hpp"

namespace wflow::channel {

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RadioParams {
    double tx_power_dbm = 30.0;
    double carrier_hz = 2.4e9;
    double bandwidth_hz = 20e6;
    double noise_figure_db = 8.0;
    double user_height_m = 1.5;
};

struct Building {
    Polygon footprint;
    double height_m = 10.0;
};

struct ChannelScene {
    std::string region;
    std::vector<Building> buildings;
    Point3 tx;
    RadioParams radio;

    static ChannelScene load(const std::string& path);
    static ChannelScene from_json_text(const std::string& text);

    bool is_outdoor(Point2 p) const;
    BoundingBox bounds() const;
};

struct LinkEstimate {
    bool los = true;
    double path_loss_db = 0.0;
    double snr_db = 0.0;
    int cqi = 1;
    double eta = 0.0;  // bps/Hz
};

// sampled occlusion test along the TX->user segment at t in {0.3, 0.5, 0.7}
bool is_los(const ChannelScene& scene, Point2 user);

double path_loss_db(double distance_m, double carrier_hz, bool los);

// thermal noise floor plus noise figure, dBm
double noise_floor_dbm(const RadioParams& radio);

int snr_to_cqi(double snr_db);

double cqi_to_eta(int cqi);

LinkEstimate estimate_link(const ChannelScene& scene, Point2 user);

// R = B * eta with B in MHz gives Mbps
inline double throughput_mbps(double bandwidth_mhz, double eta) { return bandwidth_mhz * eta; }

}  // namespace wflow::channel
