#include <cmath>

#include "wflow/bench.hpp"
#include "wflow/mobility.hpp"
#include "wflow/telecom.hpp"
#include "wflow/util.hpp"

namespace wflow::bench {

// --- service banks --------------------------------------------------------------

const std::vector<ServiceTemplate>& wcns_service_bank() {
    static const std::vector<ServiceTemplate> bank = {
        {"I need to stream a 4K video", "eMBB"},
        {"I want to browse websites and check email", "eMBB"},
        {"Download a large software update as fast as possible", "eMBB"},
        {"Join a video conference with screen sharing", "eMBB"},
        {"Watch a live HD sports broadcast", "eMBB"},
        {"Upload a batch of high-resolution photos to the cloud", "eMBB"},
        {"Play an online game with rich 3D graphics", "eMBB"},
        {"Stream music and podcasts while commuting", "eMBB"},
        {"Use augmented reality navigation with live map overlays", "eMBB"},
        {"Back up my laptop over the network", "eMBB"},
        {"Watch a 360-degree VR concert", "eMBB"},
        {"Share my screen in a remote lecture", "eMBB"},
        {"Sync a large dataset to the office server", "eMBB"},
        {"Video chat with my family in high definition", "eMBB"},
        {"Binge a show in ultra high definition", "eMBB"},
        {"autonomous vehicle V2X communication", "URLLC"},
        {"Remote control of a surgical robot", "URLLC"},
        {"Real-time control loop for factory robots", "URLLC"},
        {"Emergency response team coordination", "URLLC"},
        {"Tele-operated drone inspection flight", "URLLC"},
        {"Protection signaling for the smart power grid", "URLLC"},
        {"Remote monitoring of patient vital signs with alarms", "URLLC"},
        {"Low-latency trading terminal connection", "URLLC"},
        {"Closed-loop control of a CNC machine", "URLLC"},
        {"Haptic feedback for a remote maintenance glove", "URLLC"},
        {"Collision avoidance messages between vehicles", "URLLC"},
        {"Real-time coordination of warehouse robots", "URLLC"},
        {"Safety interlock signaling on a production line", "URLLC"},
        {"Remote crane operation at the container port", "URLLC"},
        {"Instant fault isolation in a substation", "URLLC"},
    };
    return bank;
}

const std::vector<ServiceType>& wcmsa_service_types() {
    static const std::vector<ServiceType> types = {
        {"4K video streaming", "eMBB", 25},
        {"HD movie download", "eMBB", 50},
        {"cloud gaming with high graphics", "eMBB", 35},
        {"AR navigation (3D maps)", "eMBB", 20},
        {"VR social experience", "eMBB", 40},
        {"8K live sports broadcast", "eMBB", 80},
        {"large file sync", "eMBB", 30},
        {"holographic communication", "eMBB", 60},
        {"remote desktop access", "eMBB", 15},
        {"video analytics services", "eMBB", 20},
        {"remote robotic surgery", "URLLC", 10},
        {"autonomous vehicle V2X", "URLLC", 5},
        {"industrial IoT control", "URLLC", 2},
        {"real-time drone control", "URLLC", 8},
        {"emergency response coordination", "URLLC", 5},
        {"smart grid fault detection", "URLLC", 3},
        {"patient vital signs monitoring", "URLLC", 4},
        {"high-frequency trading", "URLLC", 2},
        {"factory robot synchronization", "URLLC", 6},
        {"precision CNC machine control", "URLLC", 5},
    };
    return types;
}

SlicePolicy slice_policy(const std::string& slice) {
    if (slice == "eMBB") return {90.0, 6.0, 20.0};
    return {30.0, 1.0, 5.0};
}

double allocate_bandwidth_mhz(const std::string& slice, int existing_users) {
    SlicePolicy policy = slice_policy(slice);
    double b = policy.capacity_mhz / (existing_users + 1);
    return std::min(policy.max_mhz, std::max(policy.min_mhz, b));
}

// --- answer rendering -------------------------------------------------------------

namespace {

std::string render_wcns_answer(const std::string& slice, int cqi, double bw_mhz,
                               double tp_mbps) {
    return strf("Slice Type: %s, CQI: %d, Bandwidth: %.10g MHz, Throughput: %.10g Mbps",
                slice.c_str(), cqi, bw_mhz, tp_mbps);
}

std::string render_wcmsa_answer(Point2 pos, int cqi, const std::string& slice, double bw_mhz,
                                double tp_mbps, bool qos) {
    return strf(
        "Predicted Position: (%.10g, %.10g), CQI: %d, Slice: %s, Bandwidth: %.10g MHz, "
        "Throughput: %.10g Mbps, QoS Satisfied: %s",
        pos.x, pos.y, cqi, slice.c_str(), bw_mhz, tp_mbps, qos ? "Yes" : "No");
}

std::string render_positions(const std::vector<Point2>& pts) {
    std::string out;
    for (size_t i = 0; i < pts.size(); ++i)
        out += strf("%s(%.1f, %.1f)", i ? " -> " : "", pts[i].x, pts[i].y);
    return out;
}

std::string network_state_line(int n_embb, int n_urllc) {
    return strf(
        "Network State: eMBB Slice: %d active users (90 MHz capacity); URLLC Slice: %d active "
        "users (30 MHz capacity).",
        n_embb, n_urllc);
}

Point2 sample_outdoor(const channel::ChannelScene& scene, Rng& rng) {
    BoundingBox box = scene.bounds();
    double pad = 30.0;
    for (int attempt = 0; attempt < 5000; ++attempt) {
        Point2 p{rng.uniform(box.min_x - pad, box.max_x + pad),
                 rng.uniform(box.min_y - pad, box.max_y + pad)};
        if (scene.is_outdoor(p)) return p;
    }
    throw std::runtime_error("sampling exhausted: no outdoor position found");
}

}  // namespace

// --- WCHW ---------------------------------------------------------------------------

namespace {

struct WchwInstance {
    std::string question;
    std::string answer;
    std::string cot;
    nlohmann::json metadata;
};

std::string format_mbps(double bps) { return strf("%.4g Mbps", bps / 1e6); }
std::string format_ber(double p) { return strf("%.3g", p); }

WchwInstance wchw_shannon(double bw_mhz, double snr) {
    WchwInstance inst;
    double c = telecom::calc("shannon_capacity", {{"bandwidth_hz", bw_mhz * 1e6}, {"snr", snr}});
    inst.question = strf("Shannon capacity. B=%.10g MHz, SNR=%.10g (linear). Compute C (Mbps).",
                         bw_mhz, snr);
    inst.answer = format_mbps(c);
    inst.cot = strf(
        "Step 1: C = B log2(1+SNR) = %.10g e6 * log2(%.10g). Step 2: log2(%.10g) = %.6g. "
        "Step 3: C = %.6g bps = %s.",
        bw_mhz, 1.0 + snr, 1.0 + snr, std::log2(1.0 + snr), c, inst.answer.c_str());
    inst.metadata = {{"template", "shannon"}, {"bandwidth_mhz", bw_mhz}, {"snr", snr}};
    return inst;
}

WchwInstance wchw_ber(const std::string& op, const std::string& scheme, double ebn0_db) {
    WchwInstance inst;
    double p = telecom::calc(op, {{"ebn0_db", ebn0_db}});
    inst.question = strf("Compute BER for %s at Eb/N0=%.10g dB.", scheme.c_str(), ebn0_db);
    inst.answer = format_ber(p);
    inst.cot = strf("Step 1: convert to linear: gamma = 10^(%.10g/10) = %.6g. Step 2: apply the "
                    "%s error formula. Step 3: P_b = %.6g.",
                    ebn0_db, std::pow(10.0, ebn0_db / 10.0), scheme.c_str(), p);
    inst.metadata = {{"template", op}, {"ebn0_db", ebn0_db}};
    return inst;
}

WchwInstance wchw_pcm(int bits) {
    WchwInstance inst;
    double sqnr = 6.02 * bits + 1.76;
    inst.question = strf("A PCM system uses %d bits per sample. Compute the SQNR in dB.", bits);
    inst.answer = strf("%.4g dB", sqnr);
    inst.cot = strf("Step 1: SQNR = 6.02 n + 1.76 dB. Step 2: 6.02 * %d + 1.76 = %.4g dB.", bits,
                    sqnr);
    inst.metadata = {{"template", "pcm_sqnr"}, {"bits", bits}};
    return inst;
}

WchwInstance wchw_carson(double delta_f_khz, double fm_khz) {
    WchwInstance inst;
    double bw = 2.0 * (delta_f_khz + fm_khz);
    inst.question = strf(
        "An FM signal has peak frequency deviation %.10g kHz and maximum modulating frequency "
        "%.10g kHz. Estimate the transmission bandwidth (kHz).",
        delta_f_khz, fm_khz);
    inst.answer = strf("%.4g kHz", bw);
    inst.cot = strf("Step 1: Carson's rule B = 2(delta_f + f_m). Step 2: 2(%.10g + %.10g) = %.4g "
                    "kHz.",
                    delta_f_khz, fm_khz, bw);
    inst.metadata = {{"template", "carson"}, {"delta_f_khz", delta_f_khz}, {"fm_khz", fm_khz}};
    return inst;
}

Problem make_wchw_problem(const std::string& id, const WchwInstance& inst) {
    Problem p;
    p.id = id;
    p.benchmark = Benchmark::WCHW;
    p.question = inst.question;
    p.reference_text = inst.answer;
    p.reference = {{"type", format_name(classify_format(inst.answer))}, {"value", inst.answer}};
    p.cot = inst.cot;
    p.metadata = inst.metadata;
    return p;
}

}  // namespace

std::vector<Problem> generate_wchw(int count, uint64_t seed) {
    std::vector<Problem> out;
    Rng rng(Rng::mix(seed, 0x77636877ull));

    // the two fixed seed problems ship first
    {
        Problem p;
        p.id = "wchw-seed-001";
        p.benchmark = Benchmark::WCHW;
        p.question = "Shannon capacity. B=50 MHz, SNR=0.1 (linear). Compute C (Mbps).";
        p.reference_text = "6.87 Mbps";
        p.reference = {{"type", "NumericWithUnit"}, {"value", "6.87 Mbps"}};
        p.cot =
            "Step 1: C=B log2(1+SNR)=50e6 log2(1.1). Step 2: log2(1.1)=0.1375. Step 3: "
            "C=50e6*0.1375=6.87e6 bps=6.87 Mbps.";
        p.metadata = {{"template", "shannon"}, {"bandwidth_mhz", 50.0}, {"snr", 0.1}};
        if (static_cast<int>(out.size()) < count) out.push_back(p);
    }
    {
        Problem p;
        p.id = "wchw-seed-020";
        p.benchmark = Benchmark::WCHW;
        p.question = "Compute BER for noncoherent BFSK at Eb/N0=8 dB.";
        p.reference_text = "2.13e-02";
        p.reference = {{"type", "Scientific"}, {"value", "2.13e-02"}};
        p.cot =
            "Step 1: convert to linear: gamma=10^0.8=6.31. Step 2: P_b=0.5 e^{-gamma/2}=0.5 "
            "e^{-3.155}. Step 3: e^{-3.155}=0.0426. Step 4: P_b=0.0213.";
        p.metadata = {{"template", "ber_ncbfsk"}, {"ebn0_db", 8.0}};
        if (static_cast<int>(out.size()) < count) out.push_back(p);
    }

    int k = 0;
    while (static_cast<int>(out.size()) < count) {
        WchwInstance inst;
        switch (k % 6) {
            case 0: inst = wchw_shannon(rng.uniform_int(1, 20) * 5.0,
                                        rng.uniform_int(1, 40) * 0.25); break;
            case 1: inst = wchw_ber("ber_ncbfsk", "noncoherent BFSK",
                                    rng.uniform_int(4, 14) * 1.0); break;
            case 2: inst = wchw_ber("ber_bpsk", "BPSK", rng.uniform_int(0, 12) * 1.0); break;
            case 3: inst = wchw_ber("ber_dpsk", "DPSK", rng.uniform_int(2, 12) * 1.0); break;
            case 4: inst = wchw_pcm(static_cast<int>(rng.uniform_int(4, 16))); break;
            case 5: inst = wchw_carson(rng.uniform_int(10, 75) * 1.0,
                                       rng.uniform_int(5, 20) * 1.0); break;
        }
        out.push_back(make_wchw_problem(strf("wchw-%05d", k + 1), inst));
        ++k;
    }
    return out;
}

// --- WCNS ---------------------------------------------------------------------------

std::vector<Problem> generate_wcns(const channel::ChannelScene& scene, int count, uint64_t seed) {
    std::vector<Problem> out;
    const auto& bank = wcns_service_bank();
    for (int i = 0; i < count; ++i) {
        Rng rng(Rng::mix(Rng::mix(seed, 0x77636e73ull), static_cast<uint64_t>(i)));
        Point2 pos = sample_outdoor(scene, rng);
        int n_embb = static_cast<int>(rng.uniform_int(2, 12));
        int n_urllc = static_cast<int>(rng.uniform_int(2, 10));
        const ServiceTemplate& service =
            bank[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(bank.size()) - 1))];

        channel::LinkEstimate link = channel::estimate_link(scene, pos);
        int n = service.slice == "eMBB" ? n_embb : n_urllc;
        double bw = allocate_bandwidth_mhz(service.slice, n);
        double tp = channel::throughput_mbps(bw, link.eta);

        Problem p;
        p.id = strf("wcns-%05d", i + 1);
        p.benchmark = Benchmark::WCNS;
        p.question = network_state_line(n_embb, n_urllc) + "\n" +
                     strf("Region: %s\nNew User Position: (%.2f, %.2f)\nService Request: \"%s\"\n",
                          scene.region.c_str(), pos.x, pos.y, service.text.c_str()) +
                     "Use ray tracing at the user position to predict the CQI, classify the "
                     "service intent, allocate bandwidth with proportional fairness over the "
                     "slice capacity, and compute the expected throughput.\n"
                     "Answer with: Slice Type: <eMBB|URLLC>, CQI: <1-15>, Bandwidth: <value> "
                     "MHz, Throughput: <value> Mbps";
        p.reference_text = render_wcns_answer(service.slice, link.cqi, bw, tp);
        p.reference = {{"slice", service.slice},
                       {"cqi", link.cqi},
                       {"bandwidth_mhz", bw},
                       {"throughput_mbps", tp}};
        p.cot = strf(
            "(1) Intent: \"%s\" -> %s. (2) CQI at (%.2f, %.2f): %d (eta %.2f bps/Hz). (3) B = "
            "%.10g/(%d+1) clamped to [%g, %g] = %.10g MHz. (4) R = B*eta = %.10g Mbps.",
            service.text.c_str(), service.slice.c_str(), pos.x, pos.y, link.cqi, link.eta,
            slice_policy(service.slice).capacity_mhz, n, slice_policy(service.slice).min_mhz,
            slice_policy(service.slice).max_mhz, bw, tp);
        p.metadata = {{"region", scene.region},  {"position", {pos.x, pos.y}},
                      {"n_embb", n_embb},        {"n_urllc", n_urllc},
                      {"service", service.text}, {"slice", service.slice}};
        out.push_back(std::move(p));
    }
    return out;
}

// --- WCMSA --------------------------------------------------------------------------

std::vector<Problem> generate_wcmsa(const channel::ChannelScene& scene, int count,
                                    uint64_t seed) {
    std::vector<Problem> out;
    const auto& types = wcmsa_service_types();
    for (int i = 0; i < count; ++i) {
        Rng rng(Rng::mix(Rng::mix(seed, 0x77636d73ull), static_cast<uint64_t>(i)));
        mobility::GeneratedTrajectory traj = mobility::generate_trajectory(scene, rng);
        int n_embb = static_cast<int>(rng.uniform_int(2, 12));
        int n_urllc = static_cast<int>(rng.uniform_int(2, 10));
        const ServiceType& service =
            types[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(types.size()) - 1))];

        channel::LinkEstimate link = channel::estimate_link(scene, traj.next_truth);
        int n = service.slice == "eMBB" ? n_embb : n_urllc;
        double bw = allocate_bandwidth_mhz(service.slice, n);
        double tp = channel::throughput_mbps(bw, link.eta);
        bool qos = tp >= service.min_rate_mbps;

        Problem p;
        p.id = strf("wcmsa-%05d", i + 1);
        p.benchmark = Benchmark::WCMSA;
        p.question =
            strf("Historical positions: %s\n", render_positions(traj.history.positions).c_str()) +
            strf("Base Station: located at (%.1f, %.1f), TX power 30 dBm, carrier 2.4 GHz.\n",
                 scene.tx.x, scene.tx.y) +
            strf("Region: %s\n", scene.region.c_str()) + network_state_line(n_embb, n_urllc) +
            "\n" +
            strf("Service Request: \"%s\", Min rate: %.10g Mbps\n", service.name.c_str(),
                 service.min_rate_mbps) +
            "Predict the user's next position, estimate the CQI at the predicted position, "
            "classify the slice, allocate bandwidth with proportional fairness, compute the "
            "expected throughput, and state whether the QoS requirement will be met.\n"
            "Answer with: Predicted Position: (x, y), CQI: <1-15>, Slice: <eMBB|URLLC>, "
            "Bandwidth: <value> MHz, Throughput: <value> Mbps, QoS Satisfied: <Yes|No>";
        p.reference_text =
            render_wcmsa_answer(traj.next_truth, link.cqi, service.slice, bw, tp, qos);
        nlohmann::json history = nlohmann::json::array();
        for (const auto& pt : traj.history.positions) history.push_back({pt.x, pt.y});
        p.reference = {{"position", {traj.next_truth.x, traj.next_truth.y}},
                       {"cqi", link.cqi},
                       {"slice", service.slice},
                       {"bandwidth_mhz", bw},
                       {"throughput_mbps", tp},
                       {"qos_satisfied", qos},
                       {"min_rate_mbps", service.min_rate_mbps}};
        p.cot = strf(
            "(1) Predict next position from the trajectory. (2) CQI at the true next position "
            "(%.2f, %.2f): %d (eta %.2f). (3) Slice %s, B = %.10g MHz for %d existing users. "
            "(4) R = %.10g Mbps. (5) QoS: %.10g %s %.10g -> %s.",
            traj.next_truth.x, traj.next_truth.y, link.cqi, link.eta, service.slice.c_str(), bw,
            n, tp, tp, qos ? ">=" : "<", service.min_rate_mbps, qos ? "Yes" : "No");
        p.metadata = {{"region", scene.region},
                      {"history", history},
                      {"next_truth", {traj.next_truth.x, traj.next_truth.y}},
                      {"n_embb", n_embb},
                      {"n_urllc", n_urllc},
                      {"service", service.name},
                      {"slice", service.slice},
                      {"min_rate_mbps", service.min_rate_mbps}};
        out.push_back(std::move(p));
    }
    return out;
}

// --- deterministic oracle --------------------------------------------------------------

std::string rule_based_oracle(const Problem& problem, const channel::ChannelScene* scene,
                              bool use_kalman) {
    switch (problem.benchmark) {
        case Benchmark::WCHW: {
            const auto& md = problem.metadata;
            std::string tmpl = md.value("template", std::string());
            if (tmpl == "shannon") {
                double c = telecom::calc("shannon_capacity",
                                         {{"bandwidth_hz", md.at("bandwidth_mhz").get<double>() * 1e6},
                                          {"snr", md.at("snr").get<double>()}});
                return format_mbps(c);
            }
            if (tmpl == "ber_ncbfsk" || tmpl == "ber_bpsk" || tmpl == "ber_dpsk" ||
                tmpl == "ber_bfsk") {
                double v = telecom::calc(tmpl, {{"ebn0_db", md.at("ebn0_db").get<double>()}});
                return format_ber(v);
            }
            if (tmpl == "pcm_sqnr")
                return strf("%.4g dB", 6.02 * md.at("bits").get<int>() + 1.76);
            if (tmpl == "carson")
                return strf("%.4g kHz", 2.0 * (md.at("delta_f_khz").get<double>() +
                                               md.at("fm_khz").get<double>()));
            return problem.reference_text;  // unknown template: echo the reference
        }
        case Benchmark::WCNS: {
            if (!scene) throw std::runtime_error("oracle needs the scene for WCNS problems");
            const auto& md = problem.metadata;
            Point2 pos{md.at("position").at(0).get<double>(),
                       md.at("position").at(1).get<double>()};
            std::string slice = md.at("slice").get<std::string>();
            int n = slice == "eMBB" ? md.at("n_embb").get<int>() : md.at("n_urllc").get<int>();
            channel::LinkEstimate link = channel::estimate_link(*scene, pos);
            double bw = allocate_bandwidth_mhz(slice, n);
            double tp = channel::throughput_mbps(bw, link.eta);
            return render_wcns_answer(slice, link.cqi, bw, tp);
        }
        case Benchmark::WCMSA: {
            if (!scene) throw std::runtime_error("oracle needs the scene for WCMSA problems");
            const auto& md = problem.metadata;
            Point2 next{md.at("next_truth").at(0).get<double>(),
                        md.at("next_truth").at(1).get<double>()};
            if (use_kalman) {
                mobility::Trajectory traj;
                for (const auto& pt : md.at("history"))
                    traj.positions.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
                next = mobility::kalman_predict(traj);
            }
            std::string slice = md.at("slice").get<std::string>();
            int n = slice == "eMBB" ? md.at("n_embb").get<int>() : md.at("n_urllc").get<int>();
            double min_rate = md.at("min_rate_mbps").get<double>();
            channel::LinkEstimate link = channel::estimate_link(*scene, next);
            double bw = allocate_bandwidth_mhz(slice, n);
            double tp = channel::throughput_mbps(bw, link.eta);
            return render_wcmsa_answer(next, link.cqi, slice, bw, tp, tp >= min_rate);
        }
    }
    return problem.reference_text;
}

}  // namespace wflow::bench
