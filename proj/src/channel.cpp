#include "wflow/channel.hpp"

#include <array>
#include <cmath>

#include "json.hpp"
#include "wflow/util.hpp"

namespace wflow::channel {

using nlohmann::json;

namespace {

// 4-bit CQI table, spectral efficiency in bps/Hz, index = CQI - 1
constexpr std::array<double, 15> kCqiEta = {0.15, 0.23, 0.38, 0.60, 0.88, 1.18, 1.48, 1.91,
                                            2.41, 2.73, 3.32, 3.90, 4.52, 5.12, 5.55};

Building building_from_json(const json& b) {
    Building out;
    for (const auto& pt : b.at("footprint"))
        out.footprint.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
    if (out.footprint.size() < 3) throw GeometryError("building footprint needs >= 3 vertices");
    if (b.contains("height"))
        out.height_m = b.at("height").get<double>();
    else if (b.contains("levels"))
        out.height_m = b.at("levels").get<double>() * 3.0;
    else
        out.height_m = 10.0;
    if (out.height_m <= 0.0) throw GeometryError("building height must be positive");
    return out;
}

}  // namespace

ChannelScene ChannelScene::from_json_text(const std::string& text) {
    json doc = json::parse(text);
    ChannelScene scene;
    scene.region = doc.value("region", std::string("unnamed"));
    for (const auto& b : doc.value("buildings", json::array()))
        scene.buildings.push_back(building_from_json(b));
    if (doc.contains("radio")) {
        const json& r = doc["radio"];
        scene.radio.tx_power_dbm = r.value("tx_power_dbm", scene.radio.tx_power_dbm);
        scene.radio.carrier_hz = r.value("carrier_hz", scene.radio.carrier_hz);
        scene.radio.bandwidth_hz = r.value("bandwidth_hz", scene.radio.bandwidth_hz);
        scene.radio.noise_figure_db = r.value("noise_figure_db", scene.radio.noise_figure_db);
        scene.radio.user_height_m = r.value("user_height_m", scene.radio.user_height_m);
    }
    if (doc.contains("tx")) {
        const json& t = doc["tx"];
        scene.tx = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
    } else {
        // transmitter at the centroid of the tallest building, 5 m above its roof
        if (scene.buildings.empty())
            throw GeometryError("scene without tx needs at least one building");
        const Building* tallest = &scene.buildings.front();
        for (const auto& b : scene.buildings)
            if (b.height_m > tallest->height_m) tallest = &b;
        Point2 c = polygon_centroid(tallest->footprint);
        scene.tx = {c.x, c.y, tallest->height_m + 5.0};
    }
    return scene;
}

ChannelScene ChannelScene::load(const std::string& path) {
    return from_json_text(read_file(path));
}

bool ChannelScene::is_outdoor(Point2 p) const {
    for (const auto& b : buildings)
        if (point_in_polygon(b.footprint, p)) return false;
    return true;
}

BoundingBox ChannelScene::bounds() const {
    BoundingBox box;
    bool first = true;
    for (const auto& b : buildings)
        for (const auto& p : b.footprint) {
            if (first) {
                box = {p.x, p.y, p.x, p.y};
                first = false;
            } else {
                box.expand(p);
            }
        }
    if (first) box = {tx.x - 200, tx.y - 200, tx.x + 200, tx.y + 200};
    box.expand({tx.x, tx.y});
    return box;
}

bool is_los(const ChannelScene& scene, Point2 user) {
    if (!scene.is_outdoor(user)) throw GeometryError("user position is inside a building");
    Point3 u{user.x, user.y, scene.radio.user_height_m};
    for (double t : {0.3, 0.5, 0.7}) {
        Point3 s{scene.tx.x + t * (u.x - scene.tx.x), scene.tx.y + t * (u.y - scene.tx.y),
                 scene.tx.z + t * (u.z - scene.tx.z)};
        for (const auto& b : scene.buildings) {
            if (b.height_m <= s.z) continue;
            if (point_in_polygon(b.footprint, {s.x, s.y})) return false;
        }
    }
    return true;
}

double path_loss_db(double distance_m, double carrier_hz, bool los) {
    if (distance_m <= 0.0 || carrier_hz <= 0.0)
        throw GeometryError("distance and carrier frequency must be positive");
    double pl = 20.0 * std::log10(distance_m) + 20.0 * std::log10(carrier_hz) - 147.55;
    if (!los) pl += 20.0 + 30.0 * std::log10(std::max(distance_m / 100.0, 0.1));
    return pl;
}

double noise_floor_dbm(const RadioParams& radio) {
    return -174.0 + 10.0 * std::log10(radio.bandwidth_hz) + radio.noise_figure_db;
}

int snr_to_cqi(double snr_db) {
    double clamped = std::min(30.0, std::max(-10.0, snr_db));
    double raw = 1.0 + 14.0 * (clamped + 10.0) / 40.0;
    int cqi = static_cast<int>(std::round(raw));  // half away from zero
    return std::min(15, std::max(1, cqi));
}

double cqi_to_eta(int cqi) {
    if (cqi < 1 || cqi > 15) throw GeometryError(strf("cqi out of range: %d", cqi));
    return kCqiEta[static_cast<size_t>(cqi - 1)];
}

LinkEstimate estimate_link(const ChannelScene& scene, Point2 user) {
    LinkEstimate link;
    link.los = is_los(scene, user);
    Point3 u{user.x, user.y, scene.radio.user_height_m};
    double d = dist3(scene.tx, u);
    link.path_loss_db = path_loss_db(d, scene.radio.carrier_hz, link.los);
    link.snr_db = scene.radio.tx_power_dbm - link.path_loss_db - noise_floor_dbm(scene.radio);
    link.cqi = snr_to_cqi(link.snr_db);
    link.eta = cqi_to_eta(link.cqi);
    return link;
}

}  // namespace wflow::channel
