#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "isac/receiver.hpp"

using namespace isac;

namespace {

PulseConfig small_pulse(std::size_t H, std::size_t L, std::size_t N_r, std::size_t S) {
    PulseConfig p;
    p.H = H;
    p.L = L;
    p.N_r = N_r;
    p.S = S;
    p.K = 8;
    return p;
}

ReceivedPri random_rx(const PulseConfig& p, std::mt19937& g, std::size_t k = 0) {
    std::normal_distribution<double> n(0, 1);
    ReceivedPri y;
    y.pri_index = k;
    y.samples.resize(p.M());
    for (auto& v : y.samples) v = {n(g), n(g)};
    return y;
}

cplx at_or_zero(const std::vector<cplx>& y, std::size_t j) { return j < y.size() ? y[j] : cplx{}; }

// O(N^2) oracle for both branches, delay bins 1..N_r+L+S.
BranchOutputs brute_branches(const ReceivedPri& y, const SequenceSet& set, const PulseConfig& p, std::size_t k) {
    BranchOutputs b;
    const auto& pc = set.pulse(k);
    for (std::size_t n = 1; n <= p.delay_bins(); ++n) {
        cplx s1{}, s2{};
        for (std::size_t i = 0; i < p.H; ++i) s1 += std::sqrt(p.P_h) * std::conj(pc.high[i]) * at_or_zero(y.samples, i + n);
        for (std::size_t i = 0; i < p.L; ++i)
            s2 += std::sqrt(p.P_l) * std::conj(pc.low[i]) * at_or_zero(y.samples, p.H + p.N_r + i + n);
        b.r1.push_back(s1);
        b.r2.push_back(s2);
    }
    return b;
}

// One-shot correlation with the concatenated, normalized filter [sqrt(P_h) h | 0 | w sqrt(P_l) l].
std::vector<cplx> full_filter(const ReceivedPri& y, const SequenceSet& set, const PulseConfig& p, std::size_t k,
                              double w) {
    const auto& pc = set.pulse(k);
    std::vector<cplx> f(p.H + p.N_r + p.L);
    for (std::size_t i = 0; i < p.H; ++i) f[i] = std::sqrt(p.P_h) * pc.high[i];
    for (std::size_t i = 0; i < p.L; ++i) f[p.H + p.N_r + i] = w * std::sqrt(p.P_l) * pc.low[i];
    const double norm = std::sqrt(p.P_h * p.H + w * w * p.P_l * p.L);
    std::vector<cplx> r;
    for (std::size_t n = 1; n <= p.delay_bins(); ++n) {
        cplx s{};
        for (std::size_t i = 0; i < f.size(); ++i) s += std::conj(f[i]) * at_or_zero(y.samples, i + n);
        r.push_back(s / norm);
    }
    return r;
}

double max_rel(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double err = 0, mag = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        err = std::max(err, std::abs(a[i] - b[i]));
        mag = std::max(mag, std::abs(b[i]));
    }
    return mag > 0 ? err / mag : err;
}

} // namespace

TEST_CASE("property: branch correlators match the oracle on small configurations") {
    std::mt19937 g(1);
    for (std::size_t H : {2u, 4u, 8u, 16u})
        for (std::size_t L = 1; L <= H; L *= 2)
            for (std::size_t N_r : {0u, 3u}) {
                auto p = small_pulse(H, L, N_r, H + L + N_r + 5);
                auto set = build_sequence_set(H, L);
                MatchedFilterBank bank(p, set);
                for (std::size_t k = 0; k < 4; ++k) {
                    auto y = random_rx(p, g, k);
                    auto o = brute_branches(y, set, p, k);
                    auto b = bank.correlate(y);
                    auto d = branch_correlate(y, set, p, k);
                    CHECK(max_rel(b.r1, o.r1) < 1e-13);
                    CHECK(max_rel(b.r2, o.r2) < 1e-13);
                    CHECK(max_rel(d.r1, o.r1) < 1e-13);
                    CHECK(max_rel(d.r2, o.r2) < 1e-13);
                }
            }
}

TEST_CASE("fft filter bank agrees with the oracle at reference size") {
    auto p = PulseConfig::reference();
    auto set = build_sequence_set(p.H, p.L);
    MatchedFilterBank bank(p, set);
    CHECK(bank.uses_fft());
    std::mt19937 g(2);
    for (std::size_t k = 0; k < 4; ++k) {
        auto y = random_rx(p, g, k);
        auto o = brute_branches(y, set, p, k);
        auto b = bank.correlate(y);
        CHECK(max_rel(b.r1, o.r1) < 1e-12);
        CHECK(max_rel(b.r2, o.r2) < 1e-12);
    }
}

TEST_CASE("unit weight equals the concatenated filter on random noise") {
    auto p = PulseConfig::reference();
    auto set = build_sequence_set(p.H, p.L);
    MatchedFilterBank bank(p, set);
    std::mt19937 g(3);
    auto w = WeightProfile::constant(1.0, p.delay_bins());
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        auto y = random_rx(p, g, static_cast<std::size_t>(t) % 4);
        auto r = combine(bank.correlate(y), w, p);
        worst = std::max(worst, max_rel(r, full_filter(y, set, p, static_cast<std::size_t>(t) % 4, 1.0)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("property: any finite weight equals its concatenated filter") {
    auto p = small_pulse(16, 8, 2, 40);
    auto set = build_sequence_set(16, 8);
    std::mt19937 g(4);
    std::uniform_real_distribution<double> u(0, 20);
    for (int t = 0; t < 50; ++t) {
        const double w = u(g);
        auto y = random_rx(p, g);
        auto r = combine(branch_correlate(y, set, p, 0), WeightProfile::constant(w, p.delay_bins()), p);
        CHECK(max_rel(r, full_filter(y, set, p, 0, w)) < 1e-12);
    }
}

TEST_CASE("weight limits") {
    auto p = small_pulse(8, 4, 0, 20);
    auto set = build_sequence_set(8, 4);
    std::mt19937 g(5);
    auto b = branch_correlate(random_rx(p, g), set, p, 1);
    auto r0 = combine(b, WeightProfile::high_only(p.delay_bins()), p);
    auto ri = combine(b, WeightProfile::low_only(p.delay_bins()), p);
    auto rbig = combine(b, WeightProfile::constant(1e9, p.delay_bins()), p);
    for (std::size_t i = 0; i < r0.size(); ++i) {
        CHECK(std::abs(r0[i] - b.r1[i] / std::sqrt(p.P_h * 8)) < 1e-15 * (1 + std::abs(r0[i])));
        CHECK(std::abs(ri[i] - b.r2[i] / std::sqrt(p.P_l * 4)) < 1e-15 * (1 + std::abs(ri[i])));
        CHECK(std::abs(rbig[i] - ri[i]) < 1e-6 * (1 + std::abs(ri[i])));
    }
    CHECK_THROWS_AS(combine(b, WeightProfile::constant(-1.0, p.delay_bins()), p), std::domain_error);
    CHECK_THROWS_AS(WeightProfile({1.0, std::nan("")}), std::domain_error);
}

TEST_CASE("noiseless long-range target gives the full matched peaks") {
    auto p = PulseConfig::reference();
    auto set = build_sequence_set(p.H, p.L);
    auto c = ChannelConfig::for_pulse(p);
    Rng rng = make_rng(1, 1);
    CpiChannel ch({{bin_range(400, p), 0.0, 1.0}}, c, p, rng);
    const cplx a = ch.echoes()[0].alpha;
    auto y = ch.echo(build_pri(p, set, 0));
    for (auto& v : y.samples) v /= a;  // unit alpha with its phase removed
    auto b = branch_correlate(y, set, p, 0);
    CHECK(std::abs(b.r1[399] - cplx(p.P_h * 128, 0)) < 1e-9 * p.P_h * 128);
    CHECK(std::abs(b.r2[399] - cplx(p.P_l * 64, 0)) < 1e-9 * p.P_l * 64);
}

TEST_CASE("zero input gives zero branches") {
    auto p = PulseConfig::reference();
    auto set = build_sequence_set(p.H, p.L);
    ReceivedPri y;
    y.samples.assign(p.M(), cplx{});
    auto b = MatchedFilterBank(p, set).correlate(y);
    for (std::size_t i = 0; i < b.r1.size(); ++i) {
        CHECK(b.r1[i] == cplx{});
        CHECK(b.r2[i] == cplx{});
    }
    y.samples.resize(10);
    CHECK_THROWS_AS(branch_correlate(y, set, p, 0), std::invalid_argument);
}

TEST_CASE("target inside the recovery gap reaches only the low branch") {
    auto p = small_pulse(8, 4, 3, 30);
    auto set = build_sequence_set(8, 4);
    auto c = ChannelConfig::for_pulse(p);
    Rng rng = make_rng(2, 2);
    CpiChannel ch({{bin_range(2, p), 0.0, 1.0}}, c, p, rng);
    const cplx a = ch.echoes()[0].alpha;
    auto b = branch_correlate(ch.echo(build_pri(p, set, 0)), set, p, 0);
    CHECK(b.r1[1] == cplx{});
    CHECK(std::abs(b.r2[1] - a * p.P_l * 4.0) < 1e-9 * std::abs(a) * p.P_l * 4);
}

TEST_CASE("Doppler processing of constant and tone rows") {
    const std::size_t K = 16;
    FastTimeMatrix D(3, K);
    const cplx c{0.3, -0.4};
    for (std::size_t k = 0; k < K; ++k) {
        D.at(0, k) = c;
        D.at(1, k) = std::polar(1.0, 2 * kPi * 3.0 * static_cast<double>(k) / K);
        D.at(2, k) = std::polar(1.0, -2 * kPi * 5.0 * static_cast<double>(k) / K);
    }
    auto m = rd_map(D, K);
    CHECK(m.cols == K);
    CHECK(m.zero_doppler_col == 7);
    for (std::size_t col = 0; col < K; ++col) {
        const long d = m.doppler_index(col);
        CHECK(m.at(0, col) == doctest::Approx(d == 0 ? K * std::norm(c) : 0.0).epsilon(1e-12).scale(1));
        CHECK(m.at(1, col) == doctest::Approx(d == 3 ? double(K) : 0.0).epsilon(1e-12).scale(1));
        CHECK(m.at(2, col) == doctest::Approx(d == -5 ? double(K) : 0.0).epsilon(1e-12).scale(1));
    }
    CHECK_THROWS_AS(rd_map(D, K - 1), std::invalid_argument);
}

TEST_CASE("property: Parseval over Doppler with zero padding") {
    std::mt19937 g(6);
    std::normal_distribution<double> n(0, 1);
    for (std::size_t m_fft : {8u, 13u, 32u}) {
        FastTimeMatrix D(5, 8);
        for (auto& v : D.data) v = {n(g), n(g)};
        for (auto win : {DopplerWindow::Rectangular}) {
            auto m = rd_map(D, m_fft, win);
            for (std::size_t r = 0; r < 5; ++r) {
                double lhs = 0, rhs = 0;
                for (std::size_t col = 0; col < m_fft; ++col) lhs += m.at(r, col) * 8.0 / static_cast<double>(m_fft);
                for (std::size_t k = 0; k < 8; ++k) rhs += std::norm(D.at(r, k));
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
                for (std::size_t col = 0; col < m_fft; ++col) CHECK(m.at(r, col) >= 0.0);
            }
        }
    }
}

TEST_CASE("noiseless static target at 600 m has no range sidelobes at zero Doppler") {
    auto p = PulseConfig::reference();
    auto set = build_sequence_set(p.H, p.L);
    auto c = ChannelConfig::for_pulse(p);
    Rng rng = make_rng(3, 3);
    CpiChannel ch({{600.0, 0.0, 1.0}}, c, p, rng);
    MatchedFilterBank bank(p, set);
    std::vector<BranchOutputs> cpi;
    for (std::size_t k = 0; k < p.K; ++k) cpi.push_back(bank.correlate(ch.echo(build_pri(p, set, k))));
    for (double w : {0.0, 0.5, 1.0, 3.0}) {
        auto m = rd_map(assemble(cpi, WeightProfile::constant(w, p.delay_bins()), p), p.K, p);
        const auto z = m.zero_doppler_col;
        const double peak = m.at(399, z);
        std::size_t best = 0;
        for (std::size_t r = 0; r < m.rows; ++r)
            if (m.at(r, z) > m.at(best, z)) best = r;
        CHECK(best == 399);
        double worst = 0;
        for (std::size_t r = 0; r < m.rows; ++r)
            if (r != 399) worst = std::max(worst, m.at(r, z) / peak);
        CHECK(worst < 1e-20);
        CHECK(m.range_of_row(399) == doctest::Approx(599.58).epsilon(1e-4));
    }
}

TEST_CASE("map persistence round trip") {
    RdMap m;
    m.rows = 3;
    m.cols = 4;
    m.zero_doppler_col = 1;
    m.range_per_bin_m = 1.5;
    m.velocity_per_bin_mps = 0.25;
    m.power = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 1e-300};
    const auto dir = std::filesystem::temp_directory_path() / "isac_rd_test";
    std::filesystem::create_directories(dir);
    write_rd_binary(m, (dir / "m").string());
    auto back = read_rd_binary((dir / "m").string());
    CHECK(back.power == m.power);
    CHECK(back.rows == 3);
    CHECK(back.cols == 4);
    CHECK(back.velocity_per_bin_mps == 0.25);
    CHECK(std::filesystem::file_size(dir / "m.bin") == 12 * 8);
    write_rd_csv(m, (dir / "m.csv").string());
    std::FILE* f = std::fopen((dir / "m.csv").string().c_str(), "r");
    REQUIRE(f);
    char line[256];
    REQUIRE(std::fgets(line, sizeof line, f));
    CHECK(std::string(line) == "range_bin,range_m,d-1,d0,d1,d2\n");
    std::fclose(f);
    std::filesystem::remove_all(dir);
}
