#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace aiot {

using cplx = std::complex<double>;

namespace detail {
// FFTW planning is not thread-safe; execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// Owning wrapper around an FFTW plan pair for one transform length.
class Fft {
public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n == 0) throw std::invalid_argument("fft length must be positive");
        buf_ = fftw_alloc_complex(n);
        std::lock_guard lock(detail::fftw_planner_mutex());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    ~Fft() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(buf_);
    }

    std::size_t size() const { return n_; }

    /// Unnormalized forward DFT, in place.
    void forward(std::span<cplx> x) { run(fwd_, x, 1.0); }
    /// Inverse DFT scaled by 1/n, in place.
    void inverse(std::span<cplx> x) { run(inv_, x, 1.0 / static_cast<double>(n_)); }

private:
    void run(fftw_plan plan, std::span<cplx> x, double scale) {
        if (x.size() != n_) throw std::invalid_argument("fft length mismatch");
        auto* b = reinterpret_cast<cplx*>(buf_);
        std::copy(x.begin(), x.end(), b);
        fftw_execute(plan);
        for (std::size_t i = 0; i < n_; ++i) x[i] = b[i] * scale;
    }

    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

/// Signed frequency of DFT bin k for an n-point transform at `fs`.
inline double bin_frequency(std::size_t k, std::size_t n, double fs) {
    auto kk = static_cast<double>(k);
    auto nn = static_cast<double>(n);
    return (kk < nn / 2.0 ? kk : kk - nn) * fs / nn;
}

/// Welch-averaged two-sided PSD (units of |x|^2 per Hz), Hann window, 50% overlap.
/// Bin order matches `bin_frequency`.
inline std::vector<double> psd_welch(std::span<const cplx> x, double fs, std::size_t nfft) {
    if (x.size() < nfft) throw std::invalid_argument("signal shorter than psd segment");
    std::vector<double> win(nfft);
    double wpow = 0.0;
    for (std::size_t i = 0; i < nfft; ++i) {
        win[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(nfft));
        wpow += win[i] * win[i];
    }
    Fft fft(nfft);
    std::vector<double> acc(nfft, 0.0);
    std::vector<cplx> seg(nfft);
    std::size_t hop = nfft / 2, segments = 0;
    for (std::size_t start = 0; start + nfft <= x.size(); start += hop, ++segments) {
        for (std::size_t i = 0; i < nfft; ++i) seg[i] = x[start + i] * win[i];
        fft.forward(seg);
        for (std::size_t i = 0; i < nfft; ++i) acc[i] += std::norm(seg[i]);
    }
    for (auto& a : acc) a /= static_cast<double>(segments) * wpow * fs;
    return acc;
}

}  // namespace aiot
