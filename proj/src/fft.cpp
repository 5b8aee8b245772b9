#include "isac/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace isac::fft {
namespace {

std::mutex g_plan_mutex;

fftw_plan get_plan(std::size_t n, int sign) {
    static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    cache.emplace(key, p);
    return p;
}

void run(cplx* data, std::size_t n, int sign) {
    if (n == 0) return;
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(get_plan(n, sign), p, p);
}

} // namespace

void forward(cplx* data, std::size_t n) { run(data, n, FFTW_FORWARD); }
void inverse(cplx* data, std::size_t n) { run(data, n, FFTW_BACKWARD); }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace isac::fft
