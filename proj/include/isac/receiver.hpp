#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "isac/channel.hpp"
#include "isac/sequences.hpp"
#include "isac/waveform.hpp"

namespace isac {

//==============================================================================
// Weights
//==============================================================================

/**
 * @brief Per-delay-bin weight on the low-power branch, bins 1..N_r+L+S.
 * A weight of +inf selects the low-power-only filter.
 */
class WeightProfile {
public:
    WeightProfile() = default;
    explicit WeightProfile(std::vector<double> w);

    static WeightProfile constant(double w, std::size_t bins);
    static WeightProfile high_only(std::size_t bins) { return constant(0.0, bins); }
    static WeightProfile low_only(std::size_t bins) { return constant(kInf, bins); }

    std::size_t size() const { return w_.size(); }
    /// Weight of delay bin n (1-based).
    double at(std::size_t n) const { return w_.at(n - 1); }
    const std::vector<double>& values() const { return w_; }

private:
    std::vector<double> w_;
};

//==============================================================================
// Fast-time processing
//==============================================================================

/// Branch outputs of one PRI; element n-1 holds delay bin n.
struct BranchOutputs {
    std::vector<cplx> r1;  // high-power matched filter
    std::vector<cplx> r2;  // low-power matched filter
};

/**
 * @brief Matched filters for the four pulses of a set, built once and reused.
 *
 * Short PRIs (M <= 256) are correlated by direct summation, longer ones through
 * an FFT of size >= M + max(H, N_r+L) so no circular wrap reaches the outputs.
 */
class MatchedFilterBank {
public:
    MatchedFilterBank(const PulseConfig& pcfg, const SequenceSet& set);
    BranchOutputs correlate(const ReceivedPri& y) const;
    bool uses_fft() const { return nfft_ != 0; }

private:
    PulseConfig pcfg_;
    SequenceSet set_;
    std::size_t nfft_ = 0;
    std::array<std::vector<cplx>, 4> high_spec_;
    std::array<std::vector<cplx>, 4> low_spec_;
};

/// r1[n] = sum_i sqrt(P_h) conj(h_i) y[i+n], r2[n] = sum_i sqrt(P_l) conj(l_i) y[H+N_r+i+n].
BranchOutputs branch_correlate(const ReceivedPri& y, const SequenceSet& set, const PulseConfig& pcfg,
                               std::size_t k);

/// r[n] = (r1[n] + w[n] r2[n]) / sqrt(P_h H + w[n]^2 P_l L); w = inf gives r2 / sqrt(P_l L).
std::vector<cplx> combine(const BranchOutputs& b, const WeightProfile& w, const PulseConfig& pcfg);

/// Delay bins x PRIs, row-major.
struct FastTimeMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<cplx> data;

    FastTimeMatrix() = default;
    FastTimeMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
    cplx& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const cplx& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    void set_column(std::size_t c, const std::vector<cplx>& v);
};

//==============================================================================
// Range-Doppler map
//==============================================================================

enum class DopplerWindow { Rectangular, Hann };

/**
 * @brief Power map, rows = delay bins (row r is bin r+1), columns = Doppler bins.
 * Column c holds Doppler index c - zero_doppler_col, covering (-1/(2T), 1/(2T)].
 */
struct RdMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> power;
    std::size_t zero_doppler_col = 0;
    double range_per_bin_m = 0.0;
    double velocity_per_bin_mps = 0.0;

    double at(std::size_t r, std::size_t c) const { return power[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return power[r * cols + c]; }
    long doppler_index(std::size_t c) const { return static_cast<long>(c) - static_cast<long>(zero_doppler_col); }
    double range_of_row(std::size_t r) const { return static_cast<double>(r + 1) * range_per_bin_m; }
    double velocity_of_col(std::size_t c) const { return static_cast<double>(doppler_index(c)) * velocity_per_bin_mps; }
};

/// P(n,m) = |DFT_{M_FFT}(row n)|^2 / K, FFT-shifted. Axis metadata left at zero.
RdMap rd_map(const FastTimeMatrix& D, std::size_t m_fft, DopplerWindow window = DopplerWindow::Rectangular);
/// Same, with range/velocity bin sizes filled from the pulse configuration.
RdMap rd_map(const FastTimeMatrix& D, std::size_t m_fft, const PulseConfig& pcfg,
             DopplerWindow window = DopplerWindow::Rectangular);

/// Branch outputs of a whole CPI combined with one weight profile.
FastTimeMatrix assemble(const std::vector<BranchOutputs>& cpi, const WeightProfile& w, const PulseConfig& pcfg);

// Persistence: CSV (one row per delay bin) and little-endian float64 + JSON sidecar.
void write_rd_csv(const RdMap& map, const std::string& path);
nlohmann::json rd_metadata(const RdMap& map);
/// Writes <stem>.bin and <stem>.json.
void write_rd_binary(const RdMap& map, const std::string& stem);
RdMap read_rd_binary(const std::string& stem);

} // namespace isac
