#include "fft_engine.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace fracperiod::detail {

FftBuffer::FftBuffer(std::size_t n) : size_(n) {
    data_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (data_ == nullptr) throw std::bad_alloc();
}

FftBuffer::~FftBuffer() { fftw_free(data_); }

namespace {

struct PlanSlot {
    fftw_plan plan = nullptr;
    // Scratch arrays the plan was created on; kept alive for the plan's lifetime.
    FftBuffer in;
    FftBuffer out;
    PlanSlot(std::span<const int> shape, int sign, std::size_t n) : in(n), out(n) {
        plan = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(),
                             reinterpret_cast<fftw_complex*>(in.data()),
                             reinterpret_cast<fftw_complex*>(out.data()),
                             sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~PlanSlot() {
        if (plan != nullptr) fftw_destroy_plan(plan);
    }
};

std::mutex g_plan_mutex;
std::map<std::pair<std::vector<int>, int>, std::unique_ptr<PlanSlot>>& plan_cache() {
    static auto* cache = new std::map<std::pair<std::vector<int>, int>, std::unique_ptr<PlanSlot>>();
    return *cache;
}

}  // namespace

void fft(std::span<const int> shape, const std::complex<double>* in,
         std::complex<double>* out, int sign) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        auto key = std::make_pair(std::vector<int>(shape.begin(), shape.end()), sign);
        auto it = plan_cache().find(key);
        if (it == plan_cache().end()) {
            it = plan_cache().emplace(key, std::make_unique<PlanSlot>(shape, sign, n)).first;
        }
        plan = it->second->plan;
    }
    // Caller buffers are fftw_malloc-aligned, so new-array execution is valid.
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace fracperiod::detail
