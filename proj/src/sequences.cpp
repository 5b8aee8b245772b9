#include "isac/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "isac/fft.hpp"

namespace isac {

namespace {

constexpr std::size_t kDirectLimit = 256;

// Integer aperiodic correlation of two sign vectors, same lag convention as ccf.
std::vector<long long> int_ccf(const std::vector<int>& x, const std::vector<int>& y) {
    const long nx = static_cast<long>(x.size());
    const long ny = static_cast<long>(y.size());
    std::vector<long long> out(static_cast<std::size_t>(nx + ny - 1), 0);
    for (long tau = -(ny - 1); tau <= nx - 1; ++tau) {
        long long s = 0;
        for (long i = std::max(0L, -tau); i < ny && i + tau < nx; ++i) s += x[i + tau] * y[i];
        out[static_cast<std::size_t>(tau + ny - 1)] = s;
    }
    return out;
}

long long max_abs(const std::vector<long long>& v) {
    long long m = 0;
    for (auto e : v) m = std::max(m, e < 0 ? -e : e);
    return m;
}

} // namespace

//==============================================================================
// ChipSequence
//==============================================================================

ChipSequence::ChipSequence(std::vector<cplx> chips) : chips_(std::move(chips)) {
    for (std::size_t i = 0; i < chips_.size(); ++i) {
        if (std::abs(std::abs(chips_[i]) - 1.0) > 1e-12)
            throw std::invalid_argument("chip " + std::to_string(i) + " is not unit modulus");
    }
}

ChipSequence ChipSequence::from_signs(const std::vector<int>& signs) {
    std::vector<cplx> c;
    c.reserve(signs.size());
    for (int s : signs) {
        if (s != 1 && s != -1) throw std::invalid_argument("sign sequence must contain only +1/-1");
        c.emplace_back(static_cast<double>(s), 0.0);
    }
    return ChipSequence(std::move(c));
}

bool ChipSequence::is_biphase() const {
    return std::all_of(chips_.begin(), chips_.end(), [](const cplx& c) {
        return c.imag() == 0.0 && (c.real() == 1.0 || c.real() == -1.0);
    });
}

std::vector<int> ChipSequence::signs() const {
    if (!is_biphase()) throw std::invalid_argument("sequence is not biphase");
    std::vector<int> s(chips_.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = chips_[i].real() > 0 ? 1 : -1;
    return s;
}

ChipSequence ChipSequence::negated() const {
    std::vector<cplx> c(chips_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = -chips_[i];
    return ChipSequence(std::move(c));
}

double ChipSequence::energy() const {
    double e = 0.0;
    for (const auto& c : chips_) e += std::norm(c);
    return e;
}

cplx Correlation::at(long lag) const {
    if (lag < min_lag || lag > max_lag()) return {0.0, 0.0};
    return values[static_cast<std::size_t>(lag - min_lag)];
}

//==============================================================================
// Construction
//==============================================================================

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

ComplementaryPair golay_pair(std::size_t length) {
    if (!is_power_of_two(length))
        throw std::invalid_argument("unsupported Golay length " + std::to_string(length) +
                                    " (must be a power of two)");
    std::vector<int> a{1}, b{1};
    while (a.size() < length) {
        std::vector<int> na(a), nb(a);
        na.insert(na.end(), b.begin(), b.end());
        for (int v : b) nb.push_back(-v);
        a = std::move(na);
        b = std::move(nb);
    }
    return {ChipSequence::from_signs(a), ChipSequence::from_signs(b)};
}

SequenceSet build_sequence_set(std::size_t H, std::size_t L) {
    if (!is_power_of_two(H) || !is_power_of_two(L))
        throw std::invalid_argument("H and L must be powers of two");
    if (L > H) throw std::invalid_argument("low-power length L must not exceed H");
    const auto hp = golay_pair(H);
    const auto lp = golay_pair(L);
    SequenceSet s;
    s.H = H;
    s.L = L;
    s.pulses[0] = {hp.a, lp.a};
    s.pulses[1] = {hp.b, lp.b};
    s.pulses[2] = {hp.a, lp.a.negated()};
    s.pulses[3] = {hp.b, lp.b.negated()};
    return s;
}

//==============================================================================
// Correlation
//==============================================================================

Correlation cross_correlate(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    const long nx = static_cast<long>(x.size());
    const long ny = static_cast<long>(y.size());
    Correlation out;
    if (nx == 0 || ny == 0) return out;
    out.min_lag = -(ny - 1);
    out.values.assign(static_cast<std::size_t>(nx + ny - 1), cplx{});
    if (x.size() <= kDirectLimit && y.size() <= kDirectLimit) {
        for (long tau = -(ny - 1); tau <= nx - 1; ++tau) {
            cplx s{};
            for (long i = std::max(0L, -tau); i < ny && i + tau < nx; ++i)
                s += x[static_cast<std::size_t>(i + tau)] * std::conj(y[static_cast<std::size_t>(i)]);
            out.values[static_cast<std::size_t>(tau + ny - 1)] = s;
        }
        return out;
    }
    // R[tau] = sum_i x[i+tau] conj(y[i]) = IDFT(X * conj(Y)) with enough padding.
    const std::size_t n = fft::next_pow2(x.size() + y.size());
    std::vector<cplx> fx(n), fy(n);
    std::copy(x.begin(), x.end(), fx.begin());
    std::copy(y.begin(), y.end(), fy.begin());
    fft::forward(fx);
    fft::forward(fy);
    for (std::size_t i = 0; i < n; ++i) fx[i] *= std::conj(fy[i]);
    fft::inverse(fx);
    const double scale = 1.0 / static_cast<double>(n);
    for (long tau = -(ny - 1); tau <= nx - 1; ++tau) {
        const std::size_t idx = static_cast<std::size_t>((tau % static_cast<long>(n) + static_cast<long>(n)) %
                                                         static_cast<long>(n));
        out.values[static_cast<std::size_t>(tau + ny - 1)] = fx[idx] * scale;
    }
    return out;
}

Correlation ccf(const ChipSequence& x, const ChipSequence& y) { return cross_correlate(x.chips(), y.chips()); }

Correlation acf(const ChipSequence& x) { return ccf(x, x); }

//==============================================================================
// Verification
//==============================================================================

SetVerification verify_set(const SequenceSet& set) {
    SetVerification rep;
    const auto& p = set.pulses;
    bool biphase = true;
    for (const auto& pc : p) biphase = biphase && pc.high.is_biphase() && pc.low.is_biphase();

    if (biphase) {
        auto delta_residual = [](const std::vector<long long>& r1, const std::vector<long long>& r2,
                                 long long n) {
            // Both ACFs are centred on index n-1.
            long long worst = 0;
            for (std::size_t i = 0; i < r1.size(); ++i) {
                long long v = r1[i] + r2[i] - (static_cast<long long>(i) == n - 1 ? 2 * n : 0);
                worst = std::max(worst, v < 0 ? -v : v);
            }
            return worst;
        };
        const auto h0 = p[0].high.signs(), h1 = p[1].high.signs();
        const auto h2 = p[2].high.signs(), h3 = p[3].high.signs();
        const auto l0 = p[0].low.signs(), l1 = p[1].low.signs();
        const auto l2 = p[2].low.signs(), l3 = p[3].low.signs();
        const long long H = static_cast<long long>(h0.size());
        const long long L = static_cast<long long>(l0.size());
        long long high = std::max(delta_residual(int_ccf(h0, h0), int_ccf(h1, h1), H),
                                  delta_residual(int_ccf(h2, h2), int_ccf(h3, h3), H));
        long long low = std::max(delta_residual(int_ccf(l0, l0), int_ccf(l1, l1), L),
                                 delta_residual(int_ccf(l2, l2), int_ccf(l3, l3), L));
        auto sum_abs = [](std::vector<long long> a, const std::vector<long long>& b) {
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
            return max_abs(a);
        };
        long long cross = std::max(sum_abs(int_ccf(h0, l0), int_ccf(h2, l2)),
                                   sum_abs(int_ccf(h1, l1), int_ccf(h3, l3)));
        rep.autocorr_residual_high = static_cast<double>(high);
        rep.autocorr_residual_low = static_cast<double>(low);
        rep.cross_residual = static_cast<double>(cross);
        return rep;
    }

    auto delta_residual = [](const Correlation& r1, const Correlation& r2, double n) {
        double worst = 0.0;
        for (long lag = r1.min_lag; lag <= r1.max_lag(); ++lag)
            worst = std::max(worst, std::abs(r1.at(lag) + r2.at(lag) - (lag == 0 ? cplx(2 * n) : cplx{})));
        return worst;
    };
    auto sum_abs = [](const Correlation& a, const Correlation& b) {
        double worst = 0.0;
        for (long lag = std::min(a.min_lag, b.min_lag); lag <= std::max(a.max_lag(), b.max_lag()); ++lag)
            worst = std::max(worst, std::abs(a.at(lag) + b.at(lag)));
        return worst;
    };
    const double H = static_cast<double>(p[0].high.size());
    const double L = static_cast<double>(p[0].low.size());
    rep.autocorr_residual_high = std::max(delta_residual(acf(p[0].high), acf(p[1].high), H),
                                          delta_residual(acf(p[2].high), acf(p[3].high), H));
    rep.autocorr_residual_low = std::max(delta_residual(acf(p[0].low), acf(p[1].low), L),
                                         delta_residual(acf(p[2].low), acf(p[3].low), L));
    rep.cross_residual = std::max(sum_abs(ccf(p[0].high, p[0].low), ccf(p[2].high, p[2].low)),
                                  sum_abs(ccf(p[1].high, p[1].low), ccf(p[3].high, p[3].low)));
    return rep;
}

//==============================================================================
// JSON
//==============================================================================

nlohmann::json to_json(const ChipSequence& s) {
    if (s.is_biphase()) return nlohmann::json(s.signs());
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : s.chips()) arr.push_back({c.real(), c.imag()});
    return arr;
}

ChipSequence chip_sequence_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("sequence must be a nonempty JSON array");
    try {
        if (j.front().is_number()) return ChipSequence::from_signs(j.get<std::vector<int>>());
        std::vector<cplx> c;
        for (const auto& e : j) {
            if (!e.is_array() || e.size() != 2) throw ConfigError("complex chip must be [re, im]");
            c.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
        return ChipSequence(std::move(c));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(e.what());
    }
}

nlohmann::json to_json(const SequenceSet& set) {
    nlohmann::json j;
    j["H"] = set.H;
    j["L"] = set.L;
    j["pulses"] = nlohmann::json::array();
    for (const auto& p : set.pulses) j["pulses"].push_back({{"high", to_json(p.high)}, {"low", to_json(p.low)}});
    return j;
}

SequenceSet sequence_set_from_json(const nlohmann::json& j) {
    if (!j.contains("pulses") || !j["pulses"].is_array() || j["pulses"].size() != 4)
        throw ConfigError("sequence set needs exactly four pulses");
    SequenceSet s;
    for (std::size_t i = 0; i < 4; ++i) {
        s.pulses[i].high = chip_sequence_from_json(j["pulses"][i].at("high"));
        s.pulses[i].low = chip_sequence_from_json(j["pulses"][i].at("low"));
    }
    s.H = s.pulses[0].high.size();
    s.L = s.pulses[0].low.size();
    for (const auto& p : s.pulses)
        if (p.high.size() != s.H || p.low.size() != s.L) throw ConfigError("inconsistent code lengths in set");
    if (j.contains("H") && j["H"].get<std::size_t>() != s.H) throw ConfigError("H does not match high codes");
    if (j.contains("L") && j["L"].get<std::size_t>() != s.L) throw ConfigError("L does not match low codes");
    if (s.L > s.H) throw ConfigError("low-power length L must not exceed H");
    return s;
}

} // namespace isac
