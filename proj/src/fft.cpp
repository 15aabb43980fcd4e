#include "singspec/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace singspec::fft {

namespace {

// FFTW plan creation is not thread-safe; execution on distinct buffers is.
// Plans are created once per (size, sign) with FFTW_UNALIGNED so they can be
// re-executed on any buffer via fftw_execute_dft.
class PlanCache {
public:
    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> dummy(n);
        auto* ptr = reinterpret_cast<fftw_complex*>(dummy.data());
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), ptr, ptr, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void execute(std::vector<std::complex<double>>& data, int sign) {
    if (data.empty()) return;
    fftw_plan p = cache().get(data.size(), sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, ptr, ptr);
}

} // namespace

void forward(std::vector<std::complex<double>>& data) { execute(data, FFTW_FORWARD); }

void backward(std::vector<std::complex<double>>& data) { execute(data, FFTW_BACKWARD); }

std::vector<double> circular_autocorrelation(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = x[i];
    forward(buf);
    for (auto& v : buf) v = std::norm(v);
    backward(buf);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real() / static_cast<double>(n);
    return out;
}

std::vector<double> cross_correlation(const std::vector<double>& a,
                                      const std::vector<double>& b) {
    const std::size_t n = a.size();
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    std::vector<std::complex<double>> fa(m), fb(m);
    for (std::size_t i = 0; i < n; ++i) {
        fa[i] = a[i];
        fb[i] = b[i];
    }
    forward(fa);
    forward(fb);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= std::conj(fb[i]);
    backward(fa);
    std::vector<double> out(2 * n - 1);
    // c(tau) lands at index tau mod m after the inverse transform
    for (std::size_t tau = 0; tau < n; ++tau)
        out[(n - 1) + tau] = fa[tau].real() / static_cast<double>(m);
    for (std::size_t tau = 1; tau < n; ++tau)
        out[(n - 1) - tau] = fa[m - tau].real() / static_cast<double>(m);
    return out;
}

} // namespace singspec::fft
