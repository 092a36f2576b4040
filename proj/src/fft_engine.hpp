#pragma once
// Thin wrapper over FFTW complex transforms with a mutex-guarded plan cache.
// Plans are created once per (shape, direction) on aligned scratch buffers and
// re-executed on caller buffers through the new-array interface; all buffers
// come from fftw_malloc, so the alignment contract holds.

#include <complex>
#include <span>
#include <vector>

namespace fracperiod::detail {

// sign: -1 forward (e^{-i}), +1 backward (e^{+i}); unnormalized, out-of-place.
void fft(std::span<const int> shape, const std::complex<double>* in,
         std::complex<double>* out, int sign);

// RAII buffer with FFTW-compatible alignment.
class FftBuffer {
  public:
    explicit FftBuffer(std::size_t n);
    ~FftBuffer();
    FftBuffer(const FftBuffer&) = delete;
    FftBuffer& operator=(const FftBuffer&) = delete;
    std::complex<double>* data() { return data_; }
    const std::complex<double>* data() const { return data_; }
    std::size_t size() const { return size_; }

  private:
    std::complex<double>* data_;
    std::size_t size_;
};

}  // namespace fracperiod::detail
