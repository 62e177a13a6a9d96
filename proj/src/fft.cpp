#include "jtrack/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace jtrack::fft {

namespace {
// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Fft2d::Fft2d(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("Fft2d: dimensions must be positive");
    const int nb = bins();
    real_buf_ = fftw_alloc_real(static_cast<size_t>(rows_) * cols_);
    cplx_buf_ = fftw_alloc_complex(static_cast<size_t>(nb));
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_fwd_ = fftw_plan_dft_r2c_2d(rows_, cols_, real_buf_,
                                     static_cast<fftw_complex*>(cplx_buf_), FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r_2d(rows_, cols_, static_cast<fftw_complex*>(cplx_buf_),
                                     real_buf_, FFTW_ESTIMATE);
}

Fft2d::~Fft2d() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
    fftw_free(real_buf_);
    fftw_free(cplx_buf_);
}

void Fft2d::forward(const double* spatial, std::complex<double>* spectrum) {
    std::memcpy(real_buf_, spatial, sizeof(double) * rows_ * cols_);
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    std::memcpy(spectrum, cplx_buf_, sizeof(std::complex<double>) * bins());
}

void Fft2d::inverse(const std::complex<double>* spectrum, double* spatial) {
    // c2r destroys its input, hence the copy into the scratch buffer.
    std::memcpy(cplx_buf_, spectrum, sizeof(std::complex<double>) * bins());
    fftw_execute(static_cast<fftw_plan>(plan_inv_));
    const double scale = 1.0 / (static_cast<double>(rows_) * cols_);
    const size_t n = static_cast<size_t>(rows_) * cols_;
    for (size_t i = 0; i < n; ++i) spatial[i] = real_buf_[i] * scale;
}

std::vector<std::complex<double>> Fft2d::forward(const Grid& g) {
    if (g.rows != rows_ || g.cols != cols_) throw std::invalid_argument("Fft2d: size mismatch");
    std::vector<std::complex<double>> out(bins());
    forward(g.v.data(), out.data());
    return out;
}

Grid Fft2d::inverse_grid(const std::complex<double>* spectrum) {
    Grid g(rows_, cols_);
    inverse(spectrum, g.v.data());
    return g;
}

Fft2d& fft_for(int rows, int cols) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Fft2d>> cache;
    auto& slot = cache[{rows, cols}];
    if (!slot) slot = std::make_unique<Fft2d>(rows, cols);
    return *slot;
}

double spectrum_energy(const std::complex<double>* spec, int rows, int cols) {
    const int half = cols / 2 + 1;
    double acc = 0.0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < half; ++c) {
            const std::complex<double> z = spec[r * half + c];
            acc += bin_weight(c, cols) * std::norm(z);
        }
    return acc / (static_cast<double>(rows) * cols);
}

}  // namespace jtrack::fft
