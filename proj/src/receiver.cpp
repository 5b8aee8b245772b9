#include "isac/receiver.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "isac/fft.hpp"

namespace isac {

WeightProfile::WeightProfile(std::vector<double> w) : w_(std::move(w)) {
    for (double v : w_)
        if (!(v >= 0.0)) throw std::domain_error("weights must be nonnegative");
}

WeightProfile WeightProfile::constant(double w, std::size_t bins) {
    return WeightProfile(std::vector<double>(bins, w));
}

//==============================================================================
// Matched filter bank
//==============================================================================

MatchedFilterBank::MatchedFilterBank(const PulseConfig& pcfg, const SequenceSet& set) : pcfg_(pcfg), set_(set) {
    if (set.H != pcfg.H || set.L != pcfg.L) throw std::invalid_argument("sequence set does not match H/L");
    if (pcfg.M() <= 256) return;
    nfft_ = fft::next_pow2(pcfg.M() + std::max(pcfg.H, pcfg.N_r + pcfg.L));
    const double ah = std::sqrt(pcfg.P_h), al = std::sqrt(pcfg.P_l);
    for (std::size_t p = 0; p < 4; ++p) {
        high_spec_[p].assign(nfft_, cplx{});
        low_spec_[p].assign(nfft_, cplx{});
        for (std::size_t i = 0; i < pcfg.H; ++i) high_spec_[p][i] = ah * set.pulses[p].high[i];
        for (std::size_t i = 0; i < pcfg.L; ++i) low_spec_[p][i] = al * set.pulses[p].low[i];
        fft::forward(high_spec_[p]);
        fft::forward(low_spec_[p]);
        // Store conjugates scaled by 1/N so the product feeds the inverse FFT directly.
        for (std::size_t i = 0; i < nfft_; ++i) {
            high_spec_[p][i] = std::conj(high_spec_[p][i]) / static_cast<double>(nfft_);
            low_spec_[p][i] = std::conj(low_spec_[p][i]) / static_cast<double>(nfft_);
        }
    }
}

BranchOutputs MatchedFilterBank::correlate(const ReceivedPri& y) const {
    const std::size_t M = pcfg_.M();
    if (y.samples.size() != M) throw std::invalid_argument("received vector length does not match M");
    const std::size_t bins = pcfg_.delay_bins();
    const std::size_t off = pcfg_.rx_on();
    BranchOutputs out;
    out.r1.assign(bins, cplx{});
    out.r2.assign(bins, cplx{});
    const std::size_t p = y.pri_index % 4;

    if (nfft_ == 0) {
        const auto& h = set_.pulses[p].high;
        const auto& l = set_.pulses[p].low;
        const double ah = std::sqrt(pcfg_.P_h), al = std::sqrt(pcfg_.P_l);
        for (std::size_t n = 1; n <= bins; ++n) {
            cplx s1{}, s2{};
            for (std::size_t i = 0; i < pcfg_.H && i + n < M; ++i) s1 += std::conj(h[i]) * y.samples[i + n];
            for (std::size_t i = 0; i < pcfg_.L && off + i + n < M; ++i)
                s2 += std::conj(l[i]) * y.samples[off + i + n];
            out.r1[n - 1] = ah * s1;
            out.r2[n - 1] = al * s2;
        }
        return out;
    }

    std::vector<cplx> Y(nfft_, cplx{});
    std::copy(y.samples.begin(), y.samples.end(), Y.begin());
    fft::forward(Y);
    std::vector<cplx> c(nfft_);
    for (std::size_t i = 0; i < nfft_; ++i) c[i] = Y[i] * high_spec_[p][i];
    fft::inverse(c);
    for (std::size_t n = 1; n <= bins; ++n) out.r1[n - 1] = c[n];
    for (std::size_t i = 0; i < nfft_; ++i) c[i] = Y[i] * low_spec_[p][i];
    fft::inverse(c);
    for (std::size_t n = 1; n <= bins; ++n) out.r2[n - 1] = c[n + off];
    return out;
}

BranchOutputs branch_correlate(const ReceivedPri& y, const SequenceSet& set, const PulseConfig& pcfg,
                               std::size_t k) {
    ReceivedPri yk = y;
    yk.pri_index = k;
    return MatchedFilterBank(pcfg, set).correlate(yk);
}

std::vector<cplx> combine(const BranchOutputs& b, const WeightProfile& w, const PulseConfig& pcfg) {
    if (b.r1.size() != b.r2.size() || b.r1.size() != w.size())
        throw std::invalid_argument("branch outputs and weights must have equal lengths");
    const double eh = pcfg.P_h * static_cast<double>(pcfg.H);
    const double el = pcfg.P_l * static_cast<double>(pcfg.L);
    std::vector<cplx> r(b.r1.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double wi = w.values()[i];
        if (!(wi >= 0.0)) throw std::domain_error("weights must be nonnegative");
        if (std::isinf(wi))
            r[i] = b.r2[i] / std::sqrt(el);
        else
            r[i] = (b.r1[i] + wi * b.r2[i]) / std::sqrt(eh + wi * wi * el);
    }
    return r;
}

void FastTimeMatrix::set_column(std::size_t c, const std::vector<cplx>& v) {
    if (v.size() != rows || c >= cols) throw std::invalid_argument("column does not fit fast-time matrix");
    for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] = v[r];
}

FastTimeMatrix assemble(const std::vector<BranchOutputs>& cpi, const WeightProfile& w, const PulseConfig& pcfg) {
    FastTimeMatrix D(pcfg.delay_bins(), cpi.size());
    for (std::size_t k = 0; k < cpi.size(); ++k) D.set_column(k, combine(cpi[k], w, pcfg));
    return D;
}

//==============================================================================
// RD map
//==============================================================================

RdMap rd_map(const FastTimeMatrix& D, std::size_t m_fft, DopplerWindow window) {
    const std::size_t K = D.cols;
    if (K == 0 || m_fft < K) throw std::invalid_argument("M_FFT must be >= K > 0");
    RdMap map;
    map.rows = D.rows;
    map.cols = m_fft;
    map.power.assign(D.rows * m_fft, 0.0);
    map.zero_doppler_col = (m_fft - 1) / 2;

    std::vector<double> taper(K, 1.0);
    if (window == DopplerWindow::Hann && K > 1)
        for (std::size_t k = 0; k < K; ++k)
            taper[k] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(K - 1));

    std::vector<cplx> buf(m_fft);
    const double inv_k = 1.0 / static_cast<double>(K);
    for (std::size_t r = 0; r < D.rows; ++r) {
        std::fill(buf.begin(), buf.end(), cplx{});
        for (std::size_t k = 0; k < K; ++k) buf[k] = D.at(r, k) * taper[k];
        fft::forward(buf);
        for (std::size_t c = 0; c < m_fft; ++c) {
            const long m = static_cast<long>(c) - static_cast<long>(map.zero_doppler_col);
            const std::size_t src = static_cast<std::size_t>((m + static_cast<long>(m_fft)) % static_cast<long>(m_fft));
            map.power[r * m_fft + c] = std::norm(buf[src]) * inv_k;
        }
    }
    return map;
}

RdMap rd_map(const FastTimeMatrix& D, std::size_t m_fft, const PulseConfig& pcfg, DopplerWindow window) {
    RdMap map = rd_map(D, m_fft, window);
    map.range_per_bin_m = pcfg.range_per_bin();
    map.velocity_per_bin_mps = pcfg.wavelength() / (2.0 * static_cast<double>(m_fft) * pcfg.T);
    return map;
}

//==============================================================================
// Persistence
//==============================================================================

void write_rd_csv(const RdMap& map, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "range_bin,range_m";
    for (std::size_t c = 0; c < map.cols; ++c) f << ",d" << map.doppler_index(c);
    f << '\n' << std::setprecision(17);
    for (std::size_t r = 0; r < map.rows; ++r) {
        f << (r + 1) << ',' << map.range_of_row(r);
        for (std::size_t c = 0; c < map.cols; ++c) f << ',' << map.at(r, c);
        f << '\n';
    }
}

nlohmann::json rd_metadata(const RdMap& map) {
    return {{"rows", map.rows},
            {"cols", map.cols},
            {"first_range_bin", 1},
            {"zero_doppler_col", map.zero_doppler_col},
            {"range_per_bin_m", map.range_per_bin_m},
            {"velocity_per_bin_mps", map.velocity_per_bin_mps},
            {"dtype", "float64"},
            {"byte_order", "little"},
            {"layout", "row-major, rows = delay bins"}};
}

namespace {
std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
}
} // namespace

void write_rd_binary(const RdMap& map, const std::string& stem) {
    std::ofstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + stem + ".bin");
    for (double v : map.power) {
        std::uint64_t u;
        std::memcpy(&u, &v, 8);
        u = to_le(u);
        bin.write(reinterpret_cast<const char*>(&u), 8);
    }
    std::ofstream meta(stem + ".json");
    meta << rd_metadata(map).dump(2) << '\n';
}

RdMap read_rd_binary(const std::string& stem) {
    std::ifstream meta(stem + ".json");
    if (!meta) throw std::runtime_error("cannot open " + stem + ".json");
    const auto j = nlohmann::json::parse(meta);
    RdMap map;
    map.rows = j.at("rows").get<std::size_t>();
    map.cols = j.at("cols").get<std::size_t>();
    map.zero_doppler_col = j.at("zero_doppler_col").get<std::size_t>();
    map.range_per_bin_m = j.at("range_per_bin_m").get<double>();
    map.velocity_per_bin_mps = j.at("velocity_per_bin_mps").get<double>();
    map.power.resize(map.rows * map.cols);
    std::ifstream bin(stem + ".bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + stem + ".bin");
    for (auto& v : map.power) {
        std::uint64_t u;
        if (!bin.read(reinterpret_cast<char*>(&u), 8)) throw std::runtime_error("truncated RD binary");
        u = to_le(u);
        std::memcpy(&v, &u, 8);
    }
    return map;
}

} // namespace isac
