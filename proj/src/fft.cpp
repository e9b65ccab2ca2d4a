#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace chirplayer::detail {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [size, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t size) {
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(size); it != plans_.end()) return it->second;
        std::vector<std::complex<double>> a(size), b(size);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(size),
                                          reinterpret_cast<fftw_complex*>(a.data()),
                                          reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw std::runtime_error("fftw: cannot create plan");
        plans_.emplace(size, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::size_t, fftw_plan> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

}  // namespace

void fft_forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
    if (in.size() != out.size()) throw std::invalid_argument("fft: size mismatch");
    if (in.empty()) return;
    fftw_plan plan = plan_cache().get(in.size());
    // fftw_execute_dft never writes the input of an out-of-place complex transform.
    auto* src = const_cast<std::complex<double>*>(in.data());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(src),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace chirplayer::detail
