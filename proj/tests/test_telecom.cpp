#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "wflow/telecom.hpp"

using namespace wflow;
using telecom::calc;

namespace {

// independent quadrature oracle for the Marcum Q integral, long double Simpson
long double marcum_oracle(long double a, long double b) {
    long double upper = std::max({b + 20.0L, a + 20.0L, 50.0L});
    auto f = [&](long double x) -> long double {
        if (x <= 0.0L) return 0.0L;
        long double lg = std::log(x) - (x * x + a * a) / 2.0L;
        if (a > 0.0L) {
            // I0 via its power series in long double
            long double z = a * x, term = 1.0L, sum = 1.0L;
            for (int k = 1; k < 400; ++k) {
                term *= (z / (2.0L * k)) * (z / (2.0L * k));
                sum += term;
                if (term < 1e-25L * sum) break;
            }
            lg += std::log(sum);
        }
        return lg < -600.0L ? 0.0L : std::exp(lg);
    };
    const int n = 40000;
    long double h = (upper - b) / n;
    long double sum = f(b) + f(upper);
    for (int i = 1; i < n; ++i) sum += f(b + i * h) * (i % 2 ? 4.0L : 2.0L);
    return sum * h / 3.0L;
}

// J0 via the integral definition, independent of std::cyl_bessel_j
long double bessel_j0_oracle(long double z) {
    const int n = 20000;
    long double h = std::numbers::pi_v<long double> / n;
    auto f = [&](long double t) { return std::cos(z * std::sin(t)); };
    long double sum = f(0.0L) + f(std::numbers::pi_v<long double>);
    for (int i = 1; i < n; ++i) sum += f(i * h) * (i % 2 ? 4.0L : 2.0L);
    return sum * h / 3.0L / std::numbers::pi_v<long double>;
}

}  // namespace

TEST_CASE("noncoherent BFSK at 8 dB reproduces the worked value") {
    double v = calc("ber_ncbfsk", {{"ebn0_db", 8.0}});
    CHECK(v == doctest::Approx(2.13e-2).epsilon(0.01));
    long double gamma = std::pow(10.0L, 0.8L);
    CHECK(v == doctest::Approx(static_cast<double>(0.5L * std::exp(-gamma / 2.0L)))
                   .epsilon(1e-12));
}

TEST_CASE("shannon capacity of 50 MHz at linear SNR 0.1") {
    double c = calc("shannon_capacity", {{"bandwidth_hz", 50e6}, {"snr", 0.1}});
    CHECK(c / 1e6 == doctest::Approx(6.87).epsilon(0.01));
}

TEST_CASE("Q function basics and identities") {
    CHECK(calc("q", {{"x", 0.0}}) == doctest::Approx(0.5).epsilon(1e-15));
    for (double x = -4.0; x <= 4.0; x += 0.25) {
        CHECK(calc("erf", {{"x", x}}) + calc("erfc", {{"x", x}}) ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(calc("q", {{"x", x}}) ==
              doctest::Approx(0.5 * std::erfc(x / std::numbers::sqrt2)).epsilon(1e-12));
    }
    for (double x = -3.0; x <= 3.0; x += 0.5) {
        double p = telecom::q_function(x);
        CHECK(telecom::q_inverse(p) == doctest::Approx(x).epsilon(1e-6));
    }
    CHECK_THROWS_AS(calc("q_inv", {{"p", 1.5}}), telecom::DomainError);
    CHECK_THROWS_AS(calc("q_inv", {{"p", 0.0}}), telecom::DomainError);
}

TEST_CASE("marcum Q closed forms and cross-path agreement") {
    CHECK(telecom::marcum_q1(2.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    for (double b = 0.5; b <= 4.0; b += 0.5)
        CHECK(telecom::marcum_q1(0.0, b) ==
              doctest::Approx(std::exp(-b * b / 2.0)).epsilon(1e-12));

    // series path vs integration path over the grid
    for (double a = 0.0; a <= 5.0; a += 1.0)
        for (double b = 0.0; b <= 5.0; b += 1.0) {
            bool converged = false;
            double series = telecom::marcum_q1_series(a, b, &converged);
            CHECK(converged);
            double integral = telecom::marcum_q1_integral(a, b);
            CHECK(series == doctest::Approx(integral).epsilon(1e-8));
        }

    // quadrature oracle for the fixture point
    double q12 = telecom::marcum_q1(1.0, 2.0);
    CHECK(q12 == doctest::Approx(static_cast<double>(marcum_oracle(1.0L, 2.0L))).epsilon(1e-8));
}

TEST_CASE("10-digit accuracy against independent oracles") {
    // Bessel J0 against the integral definition
    for (double z : {0.5, 1.0, 2.5, 5.0}) {
        double jn = calc("bessel_jn", {{"n", 0.0}, {"x", z}});
        CHECK(jn == doctest::Approx(static_cast<double>(bessel_j0_oracle(z))).epsilon(1e-10));
    }
    // BER formulas against long double evaluation
    for (double db : {2.0, 6.0, 10.0}) {
        long double g = std::pow(10.0L, static_cast<long double>(db) / 10.0L);
        CHECK(calc("ber_dpsk", {{"ebn0_db", db}}) ==
              doctest::Approx(static_cast<double>(0.5L * std::exp(-g))).epsilon(1e-10));
        CHECK(calc("ber_bpsk", {{"ebn0_db", db}}) ==
              doctest::Approx(static_cast<double>(
                                  0.5L * std::erfc(std::sqrt(g))))
                  .epsilon(1e-10));
    }
    // fading statistics against their closed forms
    CHECK(calc("rayleigh_lcr", {{"doppler_hz", 20.0}, {"rho", 1.0}}) ==
          doctest::Approx(std::sqrt(2 * std::numbers::pi) * 20.0 * std::exp(-1.0))
              .epsilon(1e-12));
    CHECK(calc("rayleigh_afd", {{"doppler_hz", 20.0}, {"rho", 0.5}}) ==
          doctest::Approx((std::exp(0.25) - 1.0) /
                          (0.5 * 20.0 * std::sqrt(2 * std::numbers::pi)))
              .epsilon(1e-12));
    CHECK(calc("rayleigh_outage", {{"threshold_db", 0.0}, {"avg_snr_db", 10.0}}) ==
          doctest::Approx(1.0 - std::exp(-0.1)).epsilon(1e-12));
    // rician outage reduces to rayleigh at K = 0
    CHECK(calc("rician_outage", {{"k_factor", 0.0}, {"threshold_db", 0.0}, {"avg_snr_db", 10.0}}) ==
          doctest::Approx(1.0 - std::exp(-0.1)).epsilon(1e-8));
}

TEST_CASE("operation table has 20 entries and rejects unknown names") {
    CHECK(telecom::calc_operations().size() == 20);
    CHECK_THROWS_AS(calc("frobnicate", {}), telecom::UnknownOperationError);
    CHECK_THROWS_AS(calc("shannon_capacity", {{"bandwidth_hz", 1e6}}), telecom::DomainError);
    CHECK(calc("db_to_linear", {{"db", 8.0}}) == doctest::Approx(std::pow(10.0, 0.8)));
    CHECK(calc("linear_to_db", {{"x", 100.0}}) == doctest::Approx(20.0));
}

// --- retrieval ------------------------------------------------------------------

namespace {

telecom::FormulaIndex tiny_index() {
    std::vector<telecom::FormulaEntry> entries;
    telecom::FormulaEntry a;
    a.id = "t1";
    a.name = "alpha capacity rule";
    a.latex = "C = B log2(1+snr)";
    a.notes = "plain";
    a.category = "capacity";
    a.keywords = {"alpha", "rule"};
    entries.push_back(a);
    telecom::FormulaEntry b;
    b.id = "t2";
    b.name = "beta fading bound";
    b.latex = "P = exp(-x)";
    b.notes = "mentions alpha too";
    b.category = "fading";
    b.keywords = {"beta", "bound"};
    entries.push_back(b);
    return telecom::FormulaIndex(std::move(entries), {{"speed", {"capacity"}}});
}

}  // namespace

TEST_CASE("weighted relevance: keyword and name only scores 3.5") {
    auto index = tiny_index();
    // "alpha" hits entry t1's keywords and name, not notes/latex/category
    auto hits = index.retrieve("alpha", 5);
    REQUIRE(!hits.empty());
    CHECK(hits[0].entry->id == "t1");
    CHECK(hits[0].flags.keyword);
    CHECK(hits[0].flags.name);
    CHECK_FALSE(hits[0].flags.notes);
    CHECK_FALSE(hits[0].flags.tex);
    CHECK_FALSE(hits[0].flags.category);
    CHECK(hits[0].score == doctest::Approx(3.5).epsilon(1e-12));
    // every returned score reproduces the flag formula exactly
    for (const auto& hit : hits) CHECK(hit.score == doctest::Approx(hit.flags.score()));
}

TEST_CASE("empty query returns nothing; ranking is deterministic") {
    auto index = tiny_index();
    CHECK(index.retrieve("", 5).empty());
    CHECK(index.retrieve("??", 5).empty());
    auto first = index.retrieve("alpha bound", 5);
    auto second = index.retrieve("alpha bound", 5);
    REQUIRE(first.size() == second.size());
    for (size_t i = 0; i < first.size(); ++i) CHECK(first[i].entry->id == second[i].entry->id);
}

TEST_CASE("synonym expansion feeds the category bonus") {
    auto index = tiny_index();
    auto hits = index.retrieve("speed", 5);  // expands to "capacity"
    REQUIRE(!hits.empty());
    CHECK(hits[0].entry->id == "t1");
    CHECK(hits[0].flags.category);
}

TEST_CASE("shipped corpus: 31 entries, lowercase keywords, BPSK query ranks first") {
    auto index = telecom::FormulaIndex::load(std::string(WFLOW_SOURCE_DIR) +
                                             "/data/formulas.json");
    CHECK(index.size() == 31);
    for (const auto& entry : index.entries()) {
        CHECK(!entry.keywords.empty());
        for (const auto& kw : entry.keywords) {
            for (char c : kw) CHECK_FALSE(bool(std::isupper(static_cast<unsigned char>(c))));
        }
    }
    auto hits = index.retrieve("BPSK BER over AWGN", 3);
    REQUIRE(!hits.empty());
    CHECK(hits[0].entry->id == "f02");

    // "bit error" phrase expands to the ber category
    auto expanded = index.expand_query("bit error performance");
    bool has_ber = false;
    for (const auto& token : expanded) has_ber |= token == "ber";
    CHECK(has_ber);
}
