#include "isac/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace isac {

MetricParams MetricParams::make(const PulseConfig& pc, const ChannelConfig& cc, const CfarConfig& cfar,
                                const SequenceSet& set, double rho_db) {
    MetricParams p;
    p.K = static_cast<double>(pc.K);
    p.P_h = pc.P_h;
    p.P_l = pc.P_l;
    p.H = pc.H;
    p.L = pc.L;
    p.N_r = pc.N_r;
    p.S = pc.S;
    p.beta2 = cc.beta2();
    p.N0B = cc.noise_power(pc.B);
    p.g_c = cfar.guard_cells;
    p.t_c = cfar.training_cells;
    p.wavelength = cc.wavelength_m;
    p.G_t = cc.G_t;
    p.G_r = cc.G_r;
    p.T_p = pc.T_p;
    p.rho = db_to_lin(rho_db);
    p.gamma.assign(pc.H + pc.N_r, kInf);
    for (std::size_t n = pc.N_r + 1; n < pc.H + pc.N_r; ++n) p.gamma[n] = paslr(n, set, p);
    return p;
}

double MetricParams::gain_per_rcs(double range_m) const {
    const double four_pi = 4.0 * kPi;
    const double r2 = range_m * range_m;
    return G_t * G_r * wavelength * wavelength / (four_pi * four_pi * four_pi * r2 * r2);
}

double MetricParams::gamma_at(std::size_t n) const { return n < gamma.size() && n > N_r ? gamma[n] : kInf; }

//==============================================================================
// Regions
//==============================================================================

Region region_of(std::size_t n, const MetricParams& p) {
    const std::size_t H = p.H, L = p.L, Nr = p.N_r, S = p.S;
    if (n == 0 || n > Nr + L + S) throw std::out_of_range("delay bin outside 1..N_r+L+S");
    if (n <= Nr) return Region::LowOnly;
    if (n <= L) return Region::EclipseRsiLow;
    if (n <= L + Nr) return Region::EclipseRsiHigh;
    if (n < H + Nr) return Region::EclipseRsiFull;
    if (n <= H + Nr + L) return Region::FullRsi;
    if (n <= S) return Region::FullClean;
    if (n <= L + S) return Region::LowTruncated;
    return Region::HighOnly;
}

const char* region_name(Region r) {
    switch (r) {
        case Region::LowOnly: return "low_only";
        case Region::EclipseRsiLow: return "eclipse_rsi_low";
        case Region::EclipseRsiHigh: return "eclipse_rsi_high";
        case Region::EclipseRsiFull: return "eclipse_rsi_full";
        case Region::FullRsi: return "full_rsi";
        case Region::FullClean: return "full_clean";
        case Region::LowTruncated: return "low_truncated";
        case Region::HighOnly: return "high_only";
    }
    return "unknown";
}

bool is_ssinr(Region r) {
    return r == Region::EclipseRsiLow || r == Region::EclipseRsiHigh || r == Region::EclipseRsiFull;
}

//==============================================================================
// PASLR
//==============================================================================

double eclipsed_correlation(const SequenceSet& set, std::size_t pulse, std::size_t n_tau, std::size_t N_r, long n) {
    const auto& h = set.pulses[pulse % 4].high;
    const long H = static_cast<long>(h.size());
    const long first = H + static_cast<long>(N_r);        // first received chip
    const long last = H + static_cast<long>(n_tau);       // one past the last echo chip
    cplx s{};
    for (long i = 0; i < H; ++i) {
        const long j = i + n;
        if (j < first || j >= last) continue;
        s += std::conj(h[static_cast<std::size_t>(i)]) * h[static_cast<std::size_t>(j - static_cast<long>(n_tau))];
    }
    return s.real();
}

double paslr(std::size_t n_tau, const SequenceSet& set, const MetricParams& p) {
    const long nt = static_cast<long>(n_tau);
    const long Nr = static_cast<long>(p.N_r);
    const long H = static_cast<long>(p.H);
    if (nt <= Nr || nt >= H + Nr) throw std::domain_error("PASLR is defined only for N_r < n_tau < H + N_r");
    const long g2 = static_cast<long>(p.g_c / 2), t2 = static_cast<long>(p.t_c / 2);
    const long tc = static_cast<long>(p.t_c), gc = static_cast<long>(p.g_c);
    const std::size_t K = static_cast<std::size_t>(p.K);

    // Joint correlation summed over the K PRIs of the CPI (pulses cycle through the set).
    auto joint = [&](long n) {
        long double s = 0.0L;
        for (std::size_t k = 0; k < K; ++k) s += eclipsed_correlation(set, k, n_tau, p.N_r, n);
        return s;
    };
    auto sum_sq = [&](long from, long to) {
        long double s = 0.0L;
        for (long n = from; n <= to; ++n) {
            const long double v = joint(n);
            s += v * v;
        }
        return s;
    };

    long double denom;
    if (nt <= Nr + g2 + 1) {
        denom = sum_sq(nt + g2 + 1, nt + g2 + tc);
    } else if (nt < Nr + g2 + t2 + 1) {
        denom = sum_sq(Nr + 1, nt - g2 - 1) + sum_sq(nt + g2 + 1, Nr + gc + tc + 1);
    } else {
        denom = sum_sq(nt - g2 - t2, nt - g2 - 1) + sum_sq(nt + g2 + 1, nt + g2 + t2);
    }
    const long double peak = joint(nt);
    if (denom == 0.0L) return kInf;
    return static_cast<double>(static_cast<long double>(tc) * peak * peak / denom);
}

//==============================================================================
// Sensing metric
//==============================================================================

BranchTerms branch_terms(Region r, std::size_t n, double alpha2, double gamma, const MetricParams& p) {
    const double nd = static_cast<double>(n);
    const double Nr = static_cast<double>(p.N_r), H = static_cast<double>(p.H), L = static_cast<double>(p.L);
    const double S = static_cast<double>(p.S);
    const double A = p.P_h * (nd - Nr);
    const double D = p.P_l * L;
    const double side = std::isinf(gamma) ? 0.0 : p.K * alpha2 * A * A / gamma;
    BranchTerms t;
    switch (r) {
        case Region::LowOnly:
            t = {0.0, D, 0.0, p.beta2 * (L - nd) * p.P_l * p.P_l + p.N0B * D};
            break;
        case Region::EclipseRsiLow:
            t = {A, D, side + p.beta2 * A * p.P_l + p.N0B * A, p.beta2 * (L - nd) * p.P_l * p.P_l + p.N0B * D};
            break;
        case Region::EclipseRsiHigh:
            t = {A, D, side + p.beta2 * A * p.P_l + p.N0B * A, p.N0B * D};
            break;
        case Region::EclipseRsiFull:
            t = {A, D, side + p.beta2 * L * p.P_h * p.P_l + p.N0B * A, p.N0B * D};
            break;
        case Region::FullRsi:
            t = {p.P_h * H, D, p.beta2 * (H + Nr + L - nd) * p.P_h * p.P_l + p.N0B * p.P_h * H, p.N0B * D};
            break;
        case Region::FullClean:
            t = {p.P_h * H, D, p.N0B * p.P_h * H, p.N0B * D};
            break;
        case Region::LowTruncated: {
            const double Lp = L + S - nd;
            t = {p.P_h * H, p.P_l * Lp, p.N0B * p.P_h * H, p.N0B * p.P_l * Lp};
            break;
        }
        case Region::HighOnly:
            t = {p.P_h * H, 0.0, p.N0B * p.P_h * H, 0.0};
            break;
    }
    return t;
}

double evaluate_branch(const BranchTerms& t, double w, double K, double alpha2) {
    if (std::isinf(w)) {
        if (t.c2 > 0.0) return K * alpha2 * t.b * t.b / t.c2;
        if (t.b == 0.0) return K * alpha2 * t.a * t.a / t.c0;
        return kInf;
    }
    const double num = (t.a + w * t.b) * (t.a + w * t.b);
    const double den = t.c0 + w * w * t.c2;
    if (den == 0.0) return num == 0.0 ? 0.0 : kInf;
    return K * alpha2 * num / den;
}

double sensing_metric(std::size_t n, double w, double sigma, double range_m, const MetricParams& p) {
    if (!(w >= 0.0)) throw std::domain_error("weight must be nonnegative");
    if (!(sigma > 0.0)) throw std::domain_error("RCS must be positive");
    const Region r = region_of(n, p);
    const double alpha2 = p.gain_per_rcs(range_m) * sigma;
    const auto t = branch_terms(r, n, alpha2, p.gamma_at(n), p);
    // No weight exists below N_r: only the low-power code is received.
    if (r == Region::LowOnly) return evaluate_branch(t, kInf, p.K, alpha2);
    return evaluate_branch(t, w, p.K, alpha2);
}

double sensing_metric(std::size_t n, double w, double sigma, const MetricParams& p) {
    return sensing_metric(n, w, sigma, p.range_of(static_cast<double>(n)), p);
}

double optimal_weight(std::size_t n, double sigma, const MetricParams& p) {
    const Region r = region_of(n, p);
    const double nd = static_cast<double>(n);
    const double Nr = static_cast<double>(p.N_r), H = static_cast<double>(p.H), L = static_cast<double>(p.L);
    const double A = p.P_h * (nd - Nr);
    const double alpha2 = p.gain_per_rcs(p.range_of(nd)) * sigma;
    const double g = p.gamma_at(n);
    const double side = std::isinf(g) ? 0.0 : p.K * alpha2 / g;
    switch (r) {
        case Region::LowOnly:
            throw std::domain_error("no weight is defined for n_tau <= N_r");
        case Region::EclipseRsiLow:
            return (L * side * A + L * p.beta2 * p.P_l + p.N0B * L) / (p.beta2 * (L - nd) * p.P_l + p.N0B * L);
        case Region::EclipseRsiHigh:
            return (side * A + p.beta2 * p.P_l + p.N0B) / p.N0B;
        case Region::EclipseRsiFull:
            return (side * A * A + p.beta2 * L * p.P_h * p.P_l) / (p.N0B * A) + 1.0;
        case Region::FullRsi:
            return p.beta2 * (H + Nr + L - nd) * p.P_l / (p.N0B * H) + 1.0;
        case Region::FullClean:
        case Region::LowTruncated:
        case Region::HighOnly:
            return 1.0;
    }
    return 1.0;
}

double optimized_metric(std::size_t n, double sigma, const MetricParams& p) {
    const Region r = region_of(n, p);
    if (r == Region::LowOnly) return sensing_metric(n, kInf, sigma, p);
    return sensing_metric(n, optimal_weight(n, sigma, p), sigma, p);
}

double min_detectable_rcs(std::size_t n, double rho, const MetricParams& p) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
    const Region r = region_of(n, p);
    if (!is_ssinr(r)) {
        // Weight does not depend on sigma here, so F is linear in sigma.
        return rho / optimized_metric(n, 1.0, p);
    }
    auto f = [&](double log_sigma) { return optimized_metric(n, std::exp(log_sigma), p); };
    double lo = std::log(1e-6), hi = std::log(1e-6);
    int guard = 0;
    while (f(lo) >= rho) {
        lo -= std::log(10.0);
        if (++guard > 200) throw std::runtime_error("cannot bracket minimum detectable RCS from below");
    }
    guard = 0;
    while (f(hi) < rho) {
        hi += std::log(10.0);
        if (++guard > 200) throw std::runtime_error("detection threshold unattainable at any RCS");
    }
    for (int it = 0; it < 300 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < rho) lo = mid; else hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double optimal_weight(std::size_t n, const MetricParams& p) {
    const double sigma = p.sigma_star > 0.0 ? p.sigma_star : min_detectable_rcs(n, p.rho, p);
    return optimal_weight(n, sigma, p);
}

WeightProfile optimal_weight_profile(const MetricParams& p) {
    std::vector<double> w(p.delay_bins());
    for (std::size_t n = 1; n <= w.size(); ++n)
        w[n - 1] = region_of(n, p) == Region::LowOnly ? kInf : optimal_weight(n, p);
    return WeightProfile(std::move(w));
}

//==============================================================================
// Monotonicity coefficients
//==============================================================================

double MonotonicityCoefficients::f(double x) const {
    return ((a3 * x + a2) * x + a1) * x / ((b2 * x + b1) * x + b0);
}

double MonotonicityCoefficients::g(double x) const { return (((C4 * x + C3) * x + C2) * x + C1) * x + C0; }

MonotonicityCoefficients monotonicity_coefficients(std::size_t n, const MetricParams& p) {
    if (region_of(n, p) != Region::EclipseRsiLow) throw std::domain_error("coefficients need N_r < n_tau <= L");
    MonotonicityCoefficients c;
    const double nd = static_cast<double>(n), L = static_cast<double>(p.L), Nr = static_cast<double>(p.N_r);
    const double gamma = p.gamma_at(n);
    c.A = p.P_h * (nd - Nr);
    c.D = p.P_l * L;
    c.F = p.beta2 * (L - nd) * p.P_l + p.N0B * L;
    c.m = p.K * L * c.A / (gamma * c.F);
    c.n = (L * p.beta2 * p.P_l + p.N0B * L) / c.F;
    c.c = p.K * c.A * c.A / gamma;
    c.d = p.beta2 * (nd - Nr) * p.P_h * p.P_l + p.N0B * c.A;
    c.e = p.P_l * c.F;
    const double base = c.A + c.n * c.D;
    c.a3 = p.K * c.m * c.m * c.D * c.D;
    c.a2 = 2.0 * p.K * c.m * c.D * base;
    c.a1 = p.K * base * base;
    c.b2 = c.e * c.m * c.m;
    c.b1 = c.c + 2.0 * c.e * c.m * c.n;
    c.b0 = c.d + c.e * c.n * c.n;
    c.C4 = c.a3 * c.b2;
    c.C3 = 2.0 * c.a3 * c.b1;
    c.C2 = 3.0 * c.a3 * c.b0 + c.a2 * c.b1 - c.a1 * c.b2;
    c.C1 = 2.0 * c.a2 * c.b0;
    c.C0 = c.a1 * c.b0;
    return c;
}

//==============================================================================
// Sweeps
//==============================================================================

std::vector<MetricRow> metric_sweep(const MetricParams& p, double sigma) {
    std::vector<MetricRow> rows;
    rows.reserve(p.delay_bins());
    for (std::size_t n = 1; n <= p.delay_bins(); ++n) {
        MetricRow row;
        row.n = n;
        row.range_m = p.range_of(static_cast<double>(n));
        row.region = region_of(n, p);
        row.gamma = is_ssinr(row.region) ? p.gamma_at(n) : kInf;
        row.w_star = row.region == Region::LowOnly ? kInf : optimal_weight(n, p);
        row.F_db = lin_to_db(sensing_metric(n, row.w_star, sigma, p));
        row.sigma_star_dbsm = lin_to_db(min_detectable_rcs(n, p.rho, p));
        rows.push_back(row);
    }
    return rows;
}

void write_metric_csv(const std::vector<MetricRow>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "n_tau,range_m,region,gamma,w_star,F_dB,sigma_star_dbsm\n" << std::setprecision(12);
    for (const auto& r : rows)
        f << r.n << ',' << r.range_m << ',' << region_name(r.region) << ',' << r.gamma << ',' << r.w_star << ','
          << r.F_db << ',' << r.sigma_star_dbsm << '\n';
}

} // namespace isac
