#include "wflow/tools.hpp"

#include <regex>

#include "wflow/mobility.hpp"
#include "wflow/util.hpp"

namespace wflow::tools {

using nlohmann::json;

namespace {

const std::regex kPairRe(R"(\(\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*\))");

double arg_number(const json& args, const std::string& key) {
    if (!args.contains(key)) throw react::ToolError("missing argument '" + key + "'");
    const json& v = args.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            return std::stod(v.get<std::string>());
        } catch (...) {
        }
    }
    throw react::ToolError("argument '" + key + "' is not numeric");
}

std::string format_link(const channel::LinkEstimate& link) {
    return strf("LOS: %s, path loss: %.2f dB, SNR: %.2f dB, CQI: %d, spectral efficiency: %.2f "
                "bps/Hz",
                link.los ? "yes" : "no", link.path_loss_db, link.snr_db, link.cqi, link.eta);
}

}  // namespace

std::vector<Point2> extract_coordinates(const std::string& text) {
    std::vector<Point2> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kPairRe);
         it != std::sregex_iterator(); ++it)
        out.push_back({std::stod((*it)[1].str()), std::stod((*it)[2].str())});
    return out;
}

std::optional<Point2> extract_query_position(const std::string& text) {
    // injected prediction first
    size_t p = text.find("PREDICTED POSITION:");
    if (p != std::string::npos) {
        std::smatch m;
        std::string rest = text.substr(p);
        if (std::regex_search(rest, m, kPairRe))
            return Point2{std::stod(m[1].str()), std::stod(m[2].str())};
    }
    // labeled position
    for (const char* label : {"Position:", "position:", "POSITION:"}) {
        p = text.find(label);
        if (p != std::string::npos) {
            std::smatch m;
            std::string rest = text.substr(p);
            if (std::regex_search(rest, m, kPairRe))
                return Point2{std::stod(m[1].str()), std::stod(m[2].str())};
        }
    }
    auto pairs = extract_coordinates(text);
    if (pairs.size() == 1) return pairs[0];
    return std::nullopt;
}

std::optional<std::vector<Point2>> extract_trajectory(const std::string& text) {
    for (const char* label : {"Historical positions:", "positions:", "Trajectory:"}) {
        size_t p = text.find(label);
        if (p == std::string::npos) continue;
        size_t end = text.find('\n', p);
        std::string line = text.substr(p, end == std::string::npos ? std::string::npos : end - p);
        auto pairs = extract_coordinates(line);
        if (pairs.size() >= 2) return pairs;
    }
    auto pairs = extract_coordinates(text);
    if (pairs.size() >= 2) return pairs;
    return std::nullopt;
}

const channel::ChannelScene* scene_for_text(const DomainToolsConfig& config,
                                            const std::string& text) {
    if (config.scenes.empty()) return nullptr;
    std::string lc = lowercase(text);
    for (const auto& scene : config.scenes) {
        std::string needle = "region: " + lowercase(scene->region);
        if (lc.find(needle) != std::string::npos) return scene.get();
    }
    return config.scenes.front().get();
}

void register_domain_tools(react::ToolRegistry& registry, const DomainToolsConfig& config) {
    DomainToolsConfig cfg = config;  // captured by value in the closures

    if (!cfg.scenes.empty()) {
        react::ToolSpec ray;
        ray.name = "ray_tracing";
        ray.description =
            "Site-specific channel prediction: estimates LOS, SNR, CQI, and spectral efficiency "
            "for a user at coordinates (x, y).";
        ray.args = {{"x", "user x coordinate in meters"},
                    {"y", "user y coordinate in meters"},
                    {"region", "optional region name"}};
        ray.invoke = [cfg](const json& args) {
            double x = arg_number(args, "x");
            double y = arg_number(args, "y");
            std::string region = args.value("region", std::string());
            const channel::ChannelScene* scene =
                scene_for_text(cfg, region.empty() ? "" : "Region: " + region);
            if (!scene) throw react::ToolError("no scene configured");
            channel::LinkEstimate link = channel::estimate_link(*scene, {x, y});
            return format_link(link);
        };
        ray.code_level = [cfg](const std::string& problem) -> std::optional<std::string> {
            auto pos = extract_query_position(problem);
            if (!pos) return std::nullopt;
            const channel::ChannelScene* scene = scene_for_text(cfg, problem);
            if (!scene) return std::nullopt;
            channel::LinkEstimate link;
            try {
                link = channel::estimate_link(*scene, *pos);
            } catch (const std::exception&) {
                return std::nullopt;
            }
            return problem +
                   strf("\nACCURATE CQI FROM RAY TRACING: %d (spectral efficiency %.2f bps/Hz, "
                        "SNR %.2f dB, %s)",
                        link.cqi, link.eta, link.snr_db, link.los ? "LOS" : "NLOS");
        };
        registry.add(std::move(ray));

        react::ToolSpec kalman;
        kalman.name = "kalman_predictor";
        kalman.description =
            "Predicts the next position of a moving user from its historical trajectory with a "
            "constant-velocity filter.";
        kalman.args = {{"positions", "list of [x, y] pairs, oldest first"}};
        kalman.invoke = [](const json& args) {
            if (!args.contains("positions") || !args["positions"].is_array())
                throw react::ToolError("missing 'positions' array");
            mobility::Trajectory traj;
            for (const auto& p : args["positions"]) {
                if (!p.is_array() || p.size() < 2)
                    throw react::ToolError("each position must be an [x, y] pair");
                traj.positions.push_back({p[0].get<double>(), p[1].get<double>()});
            }
            if (traj.positions.size() < 2)
                throw react::ToolError("need at least 2 positions");
            Point2 next = mobility::kalman_predict(traj);
            return strf("predicted next position: (%.1f, %.1f)", next.x, next.y);
        };
        kalman.code_level = [](const std::string& problem) -> std::optional<std::string> {
            auto pts = extract_trajectory(problem);
            if (!pts) return std::nullopt;
            mobility::Trajectory traj{*pts};
            Point2 next = mobility::kalman_predict(traj);
            return problem + strf("\nPREDICTED POSITION: (%.1f, %.1f)", next.x, next.y);
        };
        registry.add(std::move(kalman));
    }

    react::ToolSpec calculator;
    calculator.name = "telecom_calculator";
    calculator.description =
        "Precision calculator for telecom math (erf/erfc/Q functions, Bessel, Marcum Q, BER "
        "formulas, Shannon capacity, fading statistics). Call with operation plus its named "
        "numeric arguments.";
    calculator.args = {{"operation", "one of the documented operation names"},
                       {"...", "named numeric arguments for the operation"}};
    calculator.invoke = [](const json& args) {
        if (!args.contains("operation")) throw react::ToolError("missing 'operation'");
        std::string op = args.at("operation").get<std::string>();
        telecom::CalcArgs calc_args;
        for (const auto& kv : args.items()) {
            if (kv.key() == "operation") continue;
            if (kv.value().is_number())
                calc_args[kv.key()] = kv.value().get<double>();
            else if (kv.value().is_string()) {
                try {
                    calc_args[kv.key()] = std::stod(kv.value().get<std::string>());
                } catch (...) {
                    throw react::ToolError("argument '" + kv.key() + "' is not numeric");
                }
            }
        }
        try {
            double v = telecom::calc(op, calc_args);
            return strf("%.10g", v);
        } catch (const std::exception& e) {
            throw react::ToolError(e.what());
        }
    };
    registry.add(std::move(calculator));

    if (cfg.formula_index) {
        react::ToolSpec retriever;
        retriever.name = "formula_retriever";
        retriever.description =
            "Searches the curated telecom formula base by keyword and returns the best-matching "
            "formulas with variables and usage notes.";
        retriever.args = {{"query", "natural language query"}, {"k", "number of results"}};
        auto index = cfg.formula_index;
        retriever.invoke = [index](const json& args) {
            if (!args.contains("query")) throw react::ToolError("missing 'query'");
            std::string query = args.at("query").get<std::string>();
            int k = 3;
            if (args.contains("k")) k = static_cast<int>(arg_number(args, "k"));
            auto hits = index->retrieve(query, k);
            if (hits.empty()) return std::string("no matching formulas");
            std::string out;
            for (const auto& hit : hits) out += telecom::render_hit(hit);
            return out;
        };
        registry.add(std::move(retriever));
    }
}

}  // namespace wflow::tools
