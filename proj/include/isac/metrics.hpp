#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "isac/channel.hpp"
#include "isac/detection.hpp"
#include "isac/sequences.hpp"
#include "isac/waveform.hpp"

namespace isac {

/**
 * @brief Everything the analytic single-target metrics need, in linear units.
 * gamma[n] caches the PASLR for N_r < n < H+N_r (other entries unused).
 */
struct MetricParams {
    double K = 32, P_h = 0, P_l = 0;
    std::size_t H = 0, L = 0, N_r = 0, S = 0;
    double beta2 = 0;     // |beta|^2
    double N0B = 0;       // noise power per sample, NF included
    std::size_t g_c = 4, t_c = 16;
    double wavelength = 0, G_t = 0, G_r = 0, T_p = 0;
    double rho = 0;       // minimum detectable SNR (linear)
    double sigma_star = 0;  // m^2; 0 means "solve per delay bin"
    std::vector<double> gamma;

    static MetricParams make(const PulseConfig& p, const ChannelConfig& c, const CfarConfig& cfar,
                             const SequenceSet& set, double rho_db);
    std::size_t delay_bins() const { return N_r + L + S; }
    /// Range of delay bin n: n T_p c0 / 2.
    double range_of(double n) const { return n * T_p * kC0 / 2.0; }
    /// |alpha|^2 per unit RCS at range R.
    double gain_per_rcs(double range_m) const;
    double gamma_at(std::size_t n) const;
};

/// The eight delay regions, in order of increasing delay.
enum class Region {
    LowOnly,         // (0, N_r]
    EclipseRsiLow,   // (N_r, L]
    EclipseRsiHigh,  // (L, L+N_r]
    EclipseRsiFull,  // (L+N_r, H+N_r)
    FullRsi,         // [H+N_r, H+N_r+L]
    FullClean,       // (H+N_r+L, S]
    LowTruncated,    // (S, L+S]
    HighOnly         // (L+S, N_r+L+S]
};

Region region_of(std::size_t n, const MetricParams& p);
const char* region_name(Region r);
bool is_ssinr(Region r);

/// Noiseless joint correlation of the full high-power filter of pulse p with the
/// eclipsed echo for delay n_tau: sum_i conj(h_i) e[i+n], e holding chips received after H+N_r.
double eclipsed_correlation(const SequenceSet& set, std::size_t pulse, std::size_t n_tau, std::size_t N_r,
                            long n);

/// PASLR of the eclipsed high-power correlation under the CFAR training layout.
/// Returns +inf when every training cell is exactly zero.
double paslr(std::size_t n_tau, const SequenceSet& set, const MetricParams& p);

/**
 * @brief Branch of F as K|alpha|^2 (a + w b)^2 / (c0 + w^2 c2).
 * Exposed so boundary agreement and stationarity can be checked per branch.
 */
struct BranchTerms {
    double a = 0, b = 0, c0 = 0, c2 = 0;
};
BranchTerms branch_terms(Region r, std::size_t n, double alpha2, double gamma, const MetricParams& p);
double evaluate_branch(const BranchTerms& t, double w, double K, double alpha2);

/// F(n; w) at RCS sigma; range defaults to the bin range of n.
double sensing_metric(std::size_t n, double w, double sigma, const MetricParams& p);
double sensing_metric(std::size_t n, double w, double sigma, double range_m, const MetricParams& p);

/// Closed-form optimal weight at a given RCS. Throws std::domain_error for n <= N_r.
double optimal_weight(std::size_t n, double sigma, const MetricParams& p);
/// Optimal weight using p.sigma_star, or the bin's own minimum detectable RCS when that is 0.
double optimal_weight(std::size_t n, const MetricParams& p);

/// Max over w of F, i.e. f(n, sigma | w*(n, sigma)).
double optimized_metric(std::size_t n, double sigma, const MetricParams& p);

/// Minimum detectable RCS: f(n, sigma* | w*(n, sigma*)) = rho.
double min_detectable_rcs(std::size_t n, double rho, const MetricParams& p);

/// Weight profile over all delay bins with w*(n, sigma*(n)); bins n <= N_r use the low-only filter.
WeightProfile optimal_weight_profile(const MetricParams& p);

struct MonotonicityCoefficients {
    double A = 0, D = 0, F = 0, m = 0, n = 0, c = 0, d = 0, e = 0;
    double a1 = 0, a2 = 0, a3 = 0, b0 = 0, b1 = 0, b2 = 0;
    double C0 = 0, C1 = 0, C2 = 0, C3 = 0, C4 = 0;
    bool all_positive() const { return C0 > 0 && C1 > 0 && C2 > 0 && C3 > 0 && C4 > 0; }
    /// f(x) = (a3 x^3 + a2 x^2 + a1 x) / (b2 x^2 + b1 x + b0), x = |alpha|^2.
    double f(double x) const;
    /// Numerator of f'(x).
    double g(double x) const;
};

/// Auxiliary constants and derivative coefficients for n in (N_r, L].
MonotonicityCoefficients monotonicity_coefficients(std::size_t n, const MetricParams& p);

struct MetricRow {
    std::size_t n = 0;
    double range_m = 0;
    Region region = Region::FullClean;
    double gamma = 0;
    double w_star = 0;
    double F_db = 0;
    double sigma_star_dbsm = 0;
};

/// One row per delay bin; F evaluated at sigma with the bin's optimal weight.
std::vector<MetricRow> metric_sweep(const MetricParams& p, double sigma);
void write_metric_csv(const std::vector<MetricRow>& rows, const std::string& path);

} // namespace isac
